//! The rotationally invariant ansatz `A = Im(f(t) x̄dx)`, `φ = Im(g(t) x̄dx)`
//! with `t = |x|²`, and its exact reduction to ordinary differential equations.
//!
//! Every two-form built from the ansatz is a combination of the self-dual form
//! `x̄dx∧dx̄x` and the anti-self-dual form `dx̄∧dx`. [`ReducedComponents`] holds
//! the six scalar coefficients of `F_A`, `φ∧φ` and `d_Aφ` in that basis.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{KwError, Result};
use crate::forms::{self, Metric, OneForm, Su2OneForm, Su2OneFormJet, Su2TwoForm};
use crate::quat::{ImQuaternion, Quaternion};

/// Evaluation is rejected within this distance (in `t`) of a declared pole.
pub const POLE_GUARD: f64 = 1e-6;

/// A pair of radial profiles `(f, g)` with closed-form derivatives.
pub trait RadialProfile: Send + Sync {
    fn f(&self, t: f64) -> f64;
    fn df(&self, t: f64) -> f64;
    fn g(&self, t: f64) -> f64;
    fn dg(&self, t: f64) -> f64;

    /// Poles of `f` in `[0, ∞)`.
    fn f_poles(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Poles of `g` in `[0, ∞)`.
    fn g_poles(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Points where the profile is only `C¹` (second derivatives jump).
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// `f̃ = t f`.
    fn f_tilde(&self, t: f64) -> f64 {
        t * self.f(t)
    }

    /// `f̃′ = f + t f′`.
    fn f_tilde_prime(&self, t: f64) -> f64 {
        self.f(t) + t * self.df(t)
    }

    /// `g̃ = t g`.
    fn g_tilde(&self, t: f64) -> f64 {
        t * self.g(t)
    }

    fn singular_t(&self) -> Vec<f64> {
        let mut v = self.f_poles();
        v.extend(self.g_poles());
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}

impl<P: RadialProfile + ?Sized> RadialProfile for &P {
    fn f(&self, t: f64) -> f64 {
        (**self).f(t)
    }
    fn df(&self, t: f64) -> f64 {
        (**self).df(t)
    }
    fn g(&self, t: f64) -> f64 {
        (**self).g(t)
    }
    fn dg(&self, t: f64) -> f64 {
        (**self).dg(t)
    }
    fn f_poles(&self) -> Vec<f64> {
        (**self).f_poles()
    }
    fn g_poles(&self) -> Vec<f64> {
        (**self).g_poles()
    }
    fn kinks(&self) -> Vec<f64> {
        (**self).kinks()
    }
    fn f_tilde(&self, t: f64) -> f64 {
        (**self).f_tilde(t)
    }
    fn f_tilde_prime(&self, t: f64) -> f64 {
        (**self).f_tilde_prime(t)
    }
    fn g_tilde(&self, t: f64) -> f64 {
        (**self).g_tilde(t)
    }
}

/// Fails with [`KwError::SingularLocus`] if `t` is within [`POLE_GUARD`] of any pole.
pub fn check_poles(poles: &[f64], t: f64) -> Result<()> {
    match poles.iter().find(|&&p| (t - p).abs() < POLE_GUARD) {
        Some(&pole) => Err(KwError::SingularLocus { t, pole }),
        None => Ok(()),
    }
}

pub fn check_profile(p: &dyn RadialProfile, t: f64) -> Result<()> {
    check_poles(&p.singular_t(), t)
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A profile assembled from closures; used for ad hoc (non-catalog) profiles.
#[derive(Clone)]
pub struct FnProfile {
    f: ScalarFn,
    df: ScalarFn,
    g: ScalarFn,
    dg: ScalarFn,
    f_poles: Vec<f64>,
    g_poles: Vec<f64>,
}

impl fmt::Debug for FnProfile {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        fm.debug_struct("FnProfile")
            .field("f_poles", &self.f_poles)
            .field("g_poles", &self.g_poles)
            .finish_non_exhaustive()
    }
}

impl FnProfile {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dg: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FnProfile {
            f: Arc::new(f),
            df: Arc::new(df),
            g: Arc::new(g),
            dg: Arc::new(dg),
            f_poles: Vec::new(),
            g_poles: Vec::new(),
        }
    }

    pub fn zero() -> Self {
        FnProfile::new(|_| 0.0, |_| 0.0, |_| 0.0, |_| 0.0)
    }

    pub fn with_poles(mut self, f_poles: Vec<f64>, g_poles: Vec<f64>) -> Self {
        self.f_poles = f_poles;
        self.g_poles = g_poles;
        self
    }
}

impl RadialProfile for FnProfile {
    fn f(&self, t: f64) -> f64 {
        (self.f)(t)
    }
    fn df(&self, t: f64) -> f64 {
        (self.df)(t)
    }
    fn g(&self, t: f64) -> f64 {
        (self.g)(t)
    }
    fn dg(&self, t: f64) -> f64 {
        (self.dg)(t)
    }
    fn f_poles(&self) -> Vec<f64> {
        self.f_poles.clone()
    }
    fn g_poles(&self) -> Vec<f64> {
        self.g_poles.clone()
    }
}

/// Wraps a profile and multiplies `g` (and `g′`) by a constant.
#[derive(Debug, Clone)]
pub struct ScaledHiggs<P> {
    pub inner: P,
    pub factor: f64,
}

impl<P: RadialProfile> RadialProfile for ScaledHiggs<P> {
    fn f(&self, t: f64) -> f64 {
        self.inner.f(t)
    }
    fn df(&self, t: f64) -> f64 {
        self.inner.df(t)
    }
    fn g(&self, t: f64) -> f64 {
        self.factor * self.inner.g(t)
    }
    fn dg(&self, t: f64) -> f64 {
        self.factor * self.inner.dg(t)
    }
    fn f_poles(&self) -> Vec<f64> {
        self.inner.f_poles()
    }
    fn g_poles(&self) -> Vec<f64> {
        self.inner.g_poles()
    }
    fn kinks(&self) -> Vec<f64> {
        self.inner.kinks()
    }
    fn f_tilde(&self, t: f64) -> f64 {
        self.inner.f_tilde(t)
    }
    fn f_tilde_prime(&self, t: f64) -> f64 {
        self.inner.f_tilde_prime(t)
    }
}

/// Which quaternionic one-form the profiles multiply.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ansatz {
    /// `Im(f x̄ dx)`.
    #[default]
    XbarDx,
    /// `Im(f x dx̄)`.
    XDxbar,
}

impl Ansatz {
    /// Component `i` of the quaternionic one-form at `x`.
    fn component(self, x: Quaternion, i: usize) -> Quaternion {
        let e = Quaternion::basis(i);
        match self {
            Ansatz::XbarDx => x.conj() * e,
            Ansatz::XDxbar => x * e.conj(),
        }
    }

    /// `∂_j` of component `i`.
    fn component_derivative(self, j: usize, i: usize) -> Quaternion {
        let (ej, ei) = (Quaternion::basis(j), Quaternion::basis(i));
        match self {
            Ansatz::XbarDx => ej.conj() * ei,
            Ansatz::XDxbar => ej * ei.conj(),
        }
    }

    /// The su(2) one-form `Im(s · ω)` where `ω` is the ansatz form at `x`.
    pub fn one_form(self, s: f64, x: Quaternion) -> Su2OneForm {
        OneForm { c: std::array::from_fn(|i| self.component(x, i).im() * s) }
    }

    /// Exact jet of `Im(s(|x|²) ω)` given `s` and `s′` at `t = |x|²`.
    pub fn one_form_jet(self, s: f64, ds: f64, x: Quaternion) -> Su2OneFormJet {
        let value = self.one_form(s, x);
        let partials = std::array::from_fn(|j| {
            let radial = 2.0 * x.coord(j) * ds;
            OneForm {
                c: std::array::from_fn(|i| {
                    self.component(x, i).im() * radial + self.component_derivative(j, i).im() * s
                }),
            }
        });
        Su2OneFormJet { value, partials }
    }
}

/// `A(x) = Im(f(t) x̄dx)`.
pub fn eval_connection(p: &dyn RadialProfile, x: Quaternion) -> Result<Su2OneForm> {
    eval_connection_with(p, Ansatz::XbarDx, x)
}

pub fn eval_connection_with(p: &dyn RadialProfile, ansatz: Ansatz, x: Quaternion) -> Result<Su2OneForm> {
    let t = x.norm_sq();
    check_poles(&p.f_poles(), t)?;
    Ok(ansatz.one_form(p.f(t), x))
}

/// `φ(x) = Im(g(t) x̄dx)`.
pub fn eval_higgs(p: &dyn RadialProfile, x: Quaternion) -> Result<Su2OneForm> {
    eval_higgs_with(p, Ansatz::XbarDx, x)
}

pub fn eval_higgs_with(p: &dyn RadialProfile, ansatz: Ansatz, x: Quaternion) -> Result<Su2OneForm> {
    let t = x.norm_sq();
    check_poles(&p.g_poles(), t)?;
    Ok(ansatz.one_form(p.g(t), x))
}

/// Exact first jets of `(A, φ)` at `x`.
pub fn eval_jets(p: &dyn RadialProfile, ansatz: Ansatz, x: Quaternion) -> Result<(Su2OneFormJet, Su2OneFormJet)> {
    let t = x.norm_sq();
    check_profile(p, t)?;
    Ok((
        ansatz.one_form_jet(p.f(t), p.df(t), x),
        ansatz.one_form_jet(p.g(t), p.dg(t), x),
    ))
}

/// Coefficients of `F_A`, `φ∧φ`, `d_Aφ` against `x̄dx∧dx̄x` (self-dual, `*_sd`)
/// and `dx̄∧dx` (anti-self-dual, `*_asd`).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct ReducedComponents {
    pub fa_sd: f64,
    pub fa_asd: f64,
    pub pp_sd: f64,
    pub pp_asd: f64,
    pub dap_sd: f64,
    pub dap_asd: f64,
}

/// The two basis forms at `x`: `(Im(x̄dx∧dx̄x), Im(dx̄∧dx))`.
pub fn reduced_basis(x: Quaternion) -> (Su2TwoForm, Su2TwoForm) {
    (
        forms::wedge(&forms::xbar_dx(x), &forms::dxbar_x(x)).im(),
        forms::wedge(&forms::dxbar(), &forms::dx()).im(),
    )
}

impl ReducedComponents {
    /// `(F_A, φ∧φ, d_Aφ)` at `x`, with `|x|²` equal to the `t` the components were computed at.
    pub fn assemble(&self, x: Quaternion) -> (Su2TwoForm, Su2TwoForm, Su2TwoForm) {
        let (sd, asd) = reduced_basis(x);
        (
            sd * self.fa_sd + asd * self.fa_asd,
            sd * self.pp_sd + asd * self.pp_asd,
            sd * self.dap_sd + asd * self.dap_asd,
        )
    }

    /// Self-dual coefficient of `F − φ∧φ − ⋆d_Aφ` (`⋆ = +1` there).
    pub fn kw_sd(&self) -> f64 {
        self.fa_sd - self.pp_sd - self.dap_sd
    }

    /// Anti-self-dual coefficient of `F − φ∧φ − ⋆d_Aφ` (`⋆ = −1` there).
    pub fn kw_asd(&self) -> f64 {
        self.fa_asd - self.pp_asd + self.dap_asd
    }

    /// `|F_A⁺|² = 24 t² fa_sd²` under the componentwise norm.
    pub fn curvature_sd_norm_sq(&self, t: f64) -> f64 {
        24.0 * t * t * self.fa_sd * self.fa_sd
    }

    pub fn curvature_asd_norm_sq(&self) -> f64 {
        24.0 * self.fa_asd * self.fa_asd
    }

    pub fn dap_norm_sq(&self, t: f64) -> f64 {
        24.0 * (t * t * self.dap_sd * self.dap_sd + self.dap_asd * self.dap_asd)
    }
}

pub fn reduced_components(p: &dyn RadialProfile, t: f64) -> Result<ReducedComponents> {
    check_profile(p, t)?;
    let (f, df, g, dg) = (p.f(t), p.df(t), p.g(t), p.dg(t));
    Ok(ReducedComponents {
        fa_sd: -0.5 * (df + f * f),
        fa_asd: 0.5 * t * df - 0.5 * t * f * f + f,
        pp_sd: -0.5 * g * g,
        pp_asd: -0.5 * t * g * g,
        dap_sd: -0.5 * (dg + 2.0 * f * g),
        dap_asd: 0.5 * t * dg + g - f * g * t,
    })
}

/// The two reduced twisted equations at parameter `λ ≠ 0`:
/// `f′ + λg′ + f² − g² + 2λfg` and
/// `tf′ − tg′/λ + 2f − 2g/λ + tg² − tf² + 2tfg/λ`.
pub fn kw_ode_residual(p: &dyn RadialProfile, lambda: f64, t: f64) -> Result<(f64, f64)> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(KwError::InvalidLambda(lambda));
    }
    check_profile(p, t)?;
    let (f, df, g, dg) = (p.f(t), p.df(t), p.g(t), p.dg(t));
    let li = 1.0 / lambda;
    let r1 = df + lambda * dg + f * f - g * g + 2.0 * lambda * f * g;
    let r2 = t * df - t * li * dg + 2.0 * f - 2.0 * li * g + g * g * t - f * f * t + 2.0 * t * f * g * li;
    Ok((r1, r2))
}

/// The `λ = 0` system: `f′ + f² − g²` and `tg′ + 2g − 2tfg`.
pub fn asd_ode_residual(p: &dyn RadialProfile, t: f64) -> Result<(f64, f64)> {
    check_profile(p, t)?;
    let (f, df, g, dg) = (p.f(t), p.df(t), p.g(t), p.dg(t));
    Ok((df + f * f - g * g, dg * t + 2.0 * g - 2.0 * t * f * g))
}

/// Residual of the reduced equations appropriate for `λ` (the `λ = 0` system when `λ = 0`).
pub fn governing_residual(p: &dyn RadialProfile, lambda: f64, t: f64) -> Result<(f64, f64)> {
    if lambda == 0.0 {
        asd_ode_residual(p, t)
    } else {
        kw_ode_residual(p, lambda, t)
    }
}

/// `|d_A⋆φ|` (norm of the `dVol` coefficient) at `x`, built from exact jets.
pub fn dastar_phi_residual_at(p: &dyn RadialProfile, ansatz: Ansatz, m: &Metric, x: Quaternion) -> Result<f64> {
    let (a, phi) = eval_jets(p, ansatz, x)?;
    Ok(forms::covariant_codifferential(&a.value, &phi, m, x).norm())
}

/// `|d_A⋆φ|` at a fixed generic point with `|x|² = t`.
pub fn dastar_phi_residual_symbolic(p: &dyn RadialProfile, m: &Metric, t: f64) -> Result<f64> {
    let dir = Quaternion::new(0.5, -0.1, 0.7, 0.3).normalized();
    dastar_phi_residual_at(p, Ansatz::XbarDx, m, dir * t.max(0.0).sqrt())
}

/// A point with `|x|² = t` in the direction of `dir`.
pub fn point_at(t: f64, dir: Quaternion) -> Quaternion {
    dir.normalized() * t.sqrt()
}

/// The commutator-free part of the gauge action: `b̄ a b`.
pub fn conjugate_by(b: Quaternion, a: ImQuaternion) -> ImQuaternion {
    (b.conj() * Quaternion::from(a) * b).im()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::{curvature, covariant_derivative, fourform_trace_density, sd_asd_split, wedge_one_one};
    use proptest::prelude::*;

    fn thooft() -> FnProfile {
        FnProfile::new(|t| 1.0 / (1.0 + t), |t| -1.0 / ((1.0 + t) * (1.0 + t)), |_| 0.0, |_| 0.0)
    }

    // Independent closed forms for the C = 1 member of the first λ = −1 family.
    fn f1() -> FnProfile {
        let d = |t: f64| t * t + 4.0 * t + 1.0;
        FnProfile::new(
            move |t| 3.0 / d(t),
            move |t| -3.0 * (2.0 * t + 4.0) / (d(t) * d(t)),
            move |t| 3.0 * (t + 1.0) / (d(t) * (t - 1.0)),
            move |t| {
                // d/dt [3(t+1) / ((t−1) d)]
                let q = (t - 1.0) * d(t);
                let dq = d(t) + (t - 1.0) * (2.0 * t + 4.0);
                3.0 * (q - (t + 1.0) * dq) / (q * q)
            },
        )
        .with_poles(vec![], vec![1.0])
    }

    fn f2() -> FnProfile {
        let d = |t: f64| t * t + 4.0 * t + 1.0;
        let base = f1();
        let (g, dg) = (base.clone(), base);
        FnProfile::new(
            move |t| (t * t + t + 1.0) / (t * d(t)),
            move |t| {
                let n = t * t + t + 1.0;
                let q = t * d(t);
                let dq = d(t) + t * (2.0 * t + 4.0);
                ((2.0 * t + 1.0) * q - n * dq) / (q * q)
            },
            move |t| g.g(t),
            move |t| dg.dg(t),
        )
        .with_poles(vec![0.0], vec![1.0])
    }

    #[test]
    fn zero_profile_gives_zero_fields() {
        let p = FnProfile::zero();
        let x = Quaternion::new(0.3, 1.0, -2.0, 0.5);
        assert_eq!(eval_connection(&p, x).unwrap(), Su2OneForm::zero());
        let rc = reduced_components(&p, 1.7).unwrap();
        assert_eq!(rc, ReducedComponents::default());
    }

    #[test]
    fn thooft_connection_at_one() {
        let a = eval_connection(&thooft(), Quaternion::ONE).unwrap();
        assert_eq!(a.c[0], ImQuaternion::ZERO);
        assert_eq!(a.c[1], ImQuaternion::new(0.5, 0.0, 0.0));
        assert_eq!(a.c[2], ImQuaternion::new(0.0, 0.5, 0.0));
        assert_eq!(a.c[3], ImQuaternion::new(0.0, 0.0, 0.5));
    }

    #[test]
    fn f1_coefficient_scale_on_unit_sphere() {
        let x = Quaternion::new(0.0, 0.6, 0.0, 0.8);
        let a = eval_connection(&f1(), x).unwrap();
        let unit = Ansatz::XbarDx.one_form(1.0, x);
        assert!((a - unit * 0.5).norm() < 1e-15);
    }

    #[test]
    fn thooft_is_anti_self_dual() {
        for t in [0.0, 0.1, 1.0, 7.5, 100.0] {
            assert!(reduced_components(&thooft(), t).unwrap().fa_sd.abs() < 1e-16);
        }
    }

    #[test]
    fn f1_kw_combinations_vanish_at_two() {
        let rc = reduced_components(&f1(), 2.0).unwrap();
        assert!(rc.kw_sd().abs() < 1e-12);
        assert!(rc.kw_asd().abs() < 1e-12);
        let (r1, r2) = kw_ode_residual(&f1(), -1.0, 2.0).unwrap();
        assert!((rc.kw_sd() + 0.5 * r1).abs() < 1e-14);
        assert!((rc.kw_asd() - 0.5 * r2).abs() < 1e-14);
    }

    #[test]
    fn kw_residual_examples() {
        let (r1, r2) = kw_ode_residual(&f1(), -1.0, 2.0).unwrap();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        let p = f2();
        assert!((p.f(2.0) - 7.0 / 26.0).abs() < 1e-15);
        assert!((p.df(2.0) + 73.0 / 676.0).abs() < 1e-15);
        assert!((p.g(2.0) - 9.0 / 13.0).abs() < 1e-15);
        assert!((p.dg(2.0) + 150.0 / 169.0).abs() < 1e-15);
        let (r1, r2) = kw_ode_residual(&p, -1.0, 2.0).unwrap();
        assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12);
        let bad = FnProfile::new(|t| 1.0 / (1.0 + t), |t| -1.0 / ((1.0 + t) * (1.0 + t)), |_| 1.0, |_| 0.0);
        let (r1, r2) = kw_ode_residual(&bad, -1.0, 1.0).unwrap();
        assert!(r1.abs() > 0.1 || r2.abs() > 0.1);
        assert_eq!(kw_ode_residual(&bad, 0.0, 1.0), Err(KwError::InvalidLambda(0.0)));
    }

    #[test]
    fn asd_residual_examples() {
        let (a, b) = asd_ode_residual(&thooft(), 3.3).unwrap();
        assert!(a.abs() < 1e-16 && b == 0.0);
        let s3 = 3f64.sqrt();
        let q = |t: f64| t * t - 1.0;
        let alt = FnProfile::new(
            move |t| -1.0 / (t * q(t)),
            move |t| (3.0 * t * t - 1.0) / (t * t * q(t) * q(t)),
            move |t| s3 / q(t),
            move |t| -2.0 * s3 * t / (q(t) * q(t)),
        );
        for t in [0.3, 2.0, 5.0] {
            let (a, b) = asd_ode_residual(&alt, t).unwrap();
            assert!(a.abs() < 1e-12 && b.abs() < 1e-12);
        }
        // f = t/(t²−1) with the same g is not a solution: residuals −4/9 and −10√3/9 at t = 2.
        let printed = FnProfile::new(
            move |t| t / q(t),
            move |t| -(t * t + 1.0) / (q(t) * q(t)),
            move |t| s3 / q(t),
            move |t| -2.0 * s3 * t / (q(t) * q(t)),
        );
        let (a, b) = asd_ode_residual(&printed, 2.0).unwrap();
        assert!((a + 4.0 / 9.0).abs() < 1e-14);
        assert!((b + 10.0 * s3 / 9.0).abs() < 1e-14);
        let non = FnProfile::new(|_| 0.0, |_| 0.0, |_| 1.0, |_| 0.0);
        assert_ne!(asd_ode_residual(&non, 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn pole_guard_rejects_near_pole() {
        let x = point_at(1.0 + 1e-8, Quaternion::ONE);
        assert!(matches!(eval_higgs(&f1(), x), Err(KwError::SingularLocus { .. })));
        assert!(eval_connection(&f1(), x).is_ok());
        assert!(reduced_components(&f1(), 1.0 + 2e-6).is_ok());
    }

    #[test]
    fn dastar_phi_vanishes() {
        let p = FnProfile::new(
            |t| (1.0 + t).ln(),
            |t| 1.0 / (1.0 + t),
            |t| t.sin() + 0.3,
            |t| t.cos(),
        );
        let m = Metric::euclidean();
        assert!(dastar_phi_residual_symbolic(&p, &m, 3.0).unwrap() < 1e-10);
        let g0 = FnProfile::new(|t| t, |_| 1.0, |_| 0.0, |_| 0.0);
        assert_eq!(dastar_phi_residual_symbolic(&g0, &m, 2.0).unwrap(), 0.0);
        assert!(dastar_phi_residual_symbolic(&f1(), &Metric::round(), 2.0).unwrap() < 1e-10);
        let x = Quaternion::new(0.2, -1.3, 0.4, 0.9);
        for ansatz in [Ansatz::XbarDx, Ansatz::XDxbar] {
            assert!(dastar_phi_residual_at(&p, ansatz, &Metric::round(), x).unwrap() < 1e-10);
        }
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    fn random_point(seed: &mut u64, scale: f64) -> Quaternion {
        Quaternion::new(lcg(seed), lcg(seed), lcg(seed), lcg(seed)) * scale
    }

    #[test]
    fn reconstruction_matches_direct_evaluation() {
        let mut seed = 2024;
        for p in [f1(), f2(), thooft()] {
            for _ in 0..50 {
                let x = random_point(&mut seed, 1.5);
                let t = x.norm_sq();
                if check_profile(&p, t).is_err() || (t - 1.0).abs() < 1e-2 || t < 1e-2 {
                    continue;
                }
                let (a, phi) = eval_jets(&p, Ansatz::XbarDx, x).unwrap();
                let f = curvature(&a);
                let pp = wedge_one_one(&phi.value, &phi.value);
                let dap = covariant_derivative(&a.value, &phi);
                let (fr, ppr, dapr) = reduced_components(&p, t).unwrap().assemble(x);
                let scale = 1.0 + f.norm() + pp.norm() + dap.norm();
                assert!((f - fr).norm() < 1e-8 * scale);
                assert!((pp - ppr).norm() < 1e-8 * scale);
                assert!((dap - dapr).norm() < 1e-8 * scale);
            }
        }
    }

    #[test]
    fn reduced_norms_match_form_norms() {
        let x = Quaternion::new(0.3, -0.4, 1.1, 0.2);
        let t = x.norm_sq();
        let rc = reduced_components(&f1(), t).unwrap();
        let (f, _, dap) = rc.assemble(x);
        let (sd, asd) = sd_asd_split(&f);
        assert!((sd.norm_sq() - rc.curvature_sd_norm_sq(t)).abs() < 1e-12 * (1.0 + sd.norm_sq()));
        assert!((asd.norm_sq() - rc.curvature_asd_norm_sq()).abs() < 1e-12 * (1.0 + asd.norm_sq()));
        assert!((dap.norm_sq() - rc.dap_norm_sq(t)).abs() < 1e-12 * (1.0 + dap.norm_sq()));
        let d = fourform_trace_density(&f, &f);
        assert!((d - (sd.norm_sq() - asd.norm_sq())).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn connection_is_rotationally_invariant_up_to_gauge(
            a in prop::array::uniform4(-1.0f64..1.0),
            b in prop::array::uniform4(-1.0f64..1.0),
            x in prop::array::uniform4(-2.0f64..2.0),
        ) {
            let a = Quaternion::from_array(a);
            let b = Quaternion::from_array(b);
            prop_assume!(a.norm() > 0.1 && b.norm() > 0.1);
            let (a, b) = (a.normalized(), b.normalized());
            let x = Quaternion::from_array(x);
            let p = thooft();
            let y = a * x * b;
            let ay = eval_connection(&p, y).unwrap();
            let ax = eval_connection(&p, x).unwrap();
            for i in 0..4 {
                // pull back along y = a x b: contract A(y) with d y / d x_i = a e_i b
                let v = a * Quaternion::basis(i) * b;
                let pulled = (0..4).fold(ImQuaternion::ZERO, |acc, k| acc + ay.c[k] * v.coord(k));
                let expected = conjugate_by(b, ax.c[i]);
                prop_assert!((pulled - expected).norm() < 1e-10);
            }
        }
    }
}
