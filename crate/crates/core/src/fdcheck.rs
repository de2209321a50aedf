//! Finite-difference check of the full equations `F − φ∧φ − ⋆d_Aφ = 0`,
//! `d_A⋆φ = 0` for fields given only as point samplers.
//!
//! Nothing here uses the reduced ODEs: derivatives come from centered
//! differences of the sampled forms, and the algebra from [`crate::forms`].

use std::sync::Arc;

use serde::Serialize;

use crate::error::{KwError, Result};
use crate::families::SolutionFamily;
use crate::forms::{
    covariant_codifferential, covariant_derivative, curvature, twisted_residual, wedge_one_one, Metric, OneForm,
    Su2OneForm, Su2OneFormJet, Su2TwoForm,
};
use crate::multicenter::{multicenter_field, u_norm_sq, CenterData};
use crate::quat::Quaternion;
use crate::radial::{eval_connection_with, eval_higgs_with, RadialProfile};

type FormFn = Arc<dyn Fn(Quaternion) -> Result<Su2OneForm> + Send + Sync>;
type GuardFn = Arc<dyn Fn(Quaternion, f64) -> Result<()> + Send + Sync>;

/// Default step `h = 1e−3 · max(1, |x|)`.
pub fn default_step(x: Quaternion) -> f64 {
    1e-3 * x.norm().max(1.0)
}

/// Point samplers for `A` and `φ` plus a guard that accepts `(x, h)` only when
/// the stencil around `x` stays in the smooth part of the domain.
#[derive(Clone)]
pub struct FieldSampler {
    pub name: String,
    pub a: FormFn,
    pub phi: FormFn,
    pub guard: GuardFn,
    /// Twisting parameter of the first equation; `−1` is Kapustin-Witten.
    pub lambda: f64,
}

impl std::fmt::Debug for FieldSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSampler").field("name", &self.name).finish_non_exhaustive()
    }
}

/// Rejects stencils whose `|x|²` range comes within `band` of a singular or
/// non-smooth value.
fn radial_guard(bad: Vec<f64>, band_per_h: f64) -> GuardFn {
    Arc::new(move |x: Quaternion, h: f64| {
        let r = x.norm();
        let (lo, hi) = ((r - 2.0 * h).max(0.0).powi(2), (r + 2.0 * h).powi(2));
        let band = band_per_h * h;
        for &b in &bad {
            if b > lo - band && b < hi + band {
                return Err(KwError::DomainGuard(format!("|x|^2 = {:e} is within {band:e} of {b:e}", r * r)));
            }
        }
        Ok(())
    })
}

impl FieldSampler {
    pub fn new(
        name: impl Into<String>,
        a: impl Fn(Quaternion) -> Result<Su2OneForm> + Send + Sync + 'static,
        phi: impl Fn(Quaternion) -> Result<Su2OneForm> + Send + Sync + 'static,
        guard: impl Fn(Quaternion, f64) -> Result<()> + Send + Sync + 'static,
    ) -> Self {
        FieldSampler { name: name.into(), a: Arc::new(a), phi: Arc::new(phi), guard: Arc::new(guard), lambda: -1.0 }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn zero() -> Self {
        FieldSampler::new("zero", |_| Ok(Su2OneForm::zero()), |_| Ok(Su2OneForm::zero()), |_, _| Ok(()))
    }

    /// The catalog fields of `fam`, guarded at every pole and kink with a band
    /// of `10h` in `|x|²`. The `λ = 0` solutions are checked against the
    /// `λ = 0` equations, everything else against Kapustin-Witten.
    pub fn from_family(fam: &SolutionFamily) -> Self {
        Self::from_family_scaled(fam, 1.0)
    }

    /// As [`FieldSampler::from_family`] with `φ` multiplied by `higgs_factor`.
    pub fn from_family_scaled(fam: &SolutionFamily, higgs_factor: f64) -> Self {
        let p = fam.profile();
        let ansatz = fam.ansatz();
        let mut bad = p.f_poles();
        bad.extend(p.g_poles());
        bad.extend(p.kinks());
        let (pa, pg) = (p, p);
        let name = if higgs_factor == 1.0 { fam.to_string() } else { format!("{fam} (phi x {higgs_factor})") };
        FieldSampler {
            name,
            a: Arc::new(move |x| eval_connection_with(&pa, ansatz, x)),
            phi: Arc::new(move |x| Ok(eval_higgs_with(&pg, ansatz, x)?.scale(higgs_factor))),
            guard: radial_guard(bad, 10.0),
            lambda: if fam.governing_lambda() == 0.0 { 0.0 } else { -1.0 },
        }
    }

    /// U-map fields; the guard is on `|U|²` with band `10h · |∇|U|²|`.
    pub fn from_centers(cd: &CenterData, fam: &SolutionFamily) -> Self {
        let p = fam.profile();
        let mut bad = p.f_poles();
        bad.extend(p.g_poles());
        bad.extend(p.kinks());
        let (ca, cp, cg) = (cd.clone(), cd.clone(), cd.clone());
        let (fa, fp) = (*fam, *fam);
        FieldSampler {
            name: format!("multicenter k={} {fam}", cd.k()),
            a: Arc::new(move |x| Ok(multicenter_field(&ca, &fa, x)?.0)),
            phi: Arc::new(move |x| Ok(multicenter_field(&cp, &fp, x)?.1)),
            guard: Arc::new(move |x: Quaternion, h: f64| {
                let s = u_norm_sq(&cg, x);
                let lipschitz = 2.0 * cg.weight() * ((x - cg.centroid()).norm() + 2.0 * h);
                let band = 10.0 * h * lipschitz.max(1.0) + 2.0 * h * lipschitz;
                for &b in &bad {
                    if (s - b).abs() < band {
                        return Err(KwError::DomainGuard(format!("|U|^2 = {s:e} is within {band:e} of {b:e}")));
                    }
                }
                Ok(())
            }),
            lambda: -1.0,
        }
    }
}

/// Jet of a sampled one-form by centered differences.
pub fn fd_jet(w: &FormFn, x: Quaternion, h: f64) -> Result<Su2OneFormJet> {
    let value = w(x)?;
    let mut partials = [OneForm::zero(); 4];
    for (j, p) in partials.iter_mut().enumerate() {
        let e = Quaternion::basis(j) * h;
        *p = (w(x + e)? - w(x - e)?).scale(0.5 / h);
    }
    Ok(Su2OneFormJet { value, partials })
}

/// `F = dA + A∧A` with `dA` by centered differences.
pub fn fd_curvature(s: &FieldSampler, x: Quaternion, h: f64) -> Result<Su2TwoForm> {
    (s.guard)(x, h)?;
    Ok(curvature(&fd_jet(&s.a, x, h)?))
}

/// Both residual norms at one step: the first equation at the sampler's `λ`
/// (`F − φ∧φ − ⋆d_Aφ` at `λ = −1`) and `d_A⋆φ`.
pub fn residuals_at(s: &FieldSampler, x: Quaternion, h: f64) -> Result<(f64, f64)> {
    (s.guard)(x, h)?;
    let a = fd_jet(&s.a, x, h)?;
    let phi = fd_jet(&s.phi, x, h)?;
    let f = curvature(&a);
    let pp = wedge_one_one(&phi.value, &phi.value);
    let dap = covariant_derivative(&a.value, &phi);
    let r_kw = twisted_residual(&f, &pp, &dap, s.lambda).norm();
    let r_div = covariant_codifferential(&a.value, &phi, &Metric::euclidean(), x).norm();
    Ok((r_kw, r_div))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub x: Quaternion,
    pub r_kw: f64,
    pub r_div: f64,
    pub h: f64,
    pub r_kw_half: f64,
    pub r_div_half: f64,
    /// `log₂(r(h) / r(h/2))` for the larger of the two residuals.
    pub order_estimate: f64,
}

fn order(big: f64, small: f64) -> f64 {
    if big == 0.0 && small == 0.0 {
        return f64::INFINITY;
    }
    (big / small).log2()
}

/// Residuals at `h` and `h/2` and the observed order.
pub fn kw_residual_4d(s: &FieldSampler, x: Quaternion, h: f64) -> Result<ResidualReport> {
    let (r_kw, r_div) = residuals_at(s, x, h)?;
    let (r_kw_half, r_div_half) = residuals_at(s, x, 0.5 * h)?;
    Ok(ResidualReport {
        x,
        r_kw,
        r_div,
        h,
        r_kw_half,
        r_div_half,
        order_estimate: order(r_kw.max(r_div), r_kw_half.max(r_div_half)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderScan {
    pub median_order: f64,
    /// Per point: residual at `h0`, `h0/2`, `h0/4` and the order fitted across them.
    pub points: Vec<ScanPoint>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanPoint {
    pub x: Quaternion,
    pub residuals: [f64; 3],
    pub order: f64,
}

/// Median Richardson order over `points`, from the combined residual
/// `max(r_kw, r_div)` at steps `h0`, `h0/2`, `h0/4`.
pub fn order_scan(s: &FieldSampler, points: &[Quaternion], h0: f64) -> Result<OrderScan> {
    if points.len() < 5 {
        return Err(KwError::TooFewPoints { needed: 5, got: points.len() });
    }
    let mut out = Vec::with_capacity(points.len());
    for &x in points {
        let mut r = [0.0; 3];
        for (slot, k) in r.iter_mut().zip([1.0, 0.5, 0.25]) {
            let (kw, div) = residuals_at(s, x, h0 * k)?;
            *slot = kw.max(div);
        }
        // Least-squares slope of log₂ r against log₂ h; for three equally spaced
        // steps it is the mean of the two successive orders.
        let o = 0.5 * (order(r[0], r[1]) + order(r[1], r[2]));
        out.push(ScanPoint { x, residuals: r, order: o });
    }
    let mut orders: Vec<f64> = out.iter().map(|p| p.order).collect();
    orders.sort_by(f64::total_cmp);
    let n = orders.len();
    let median = if n % 2 == 1 { orders[n / 2] } else { 0.5 * (orders[n / 2 - 1] + orders[n / 2]) };
    Ok(OrderScan { median_order: median, points: out })
}

/// Draws `n` points uniformly from the ball `|x − center| ≤ radius`, keeping
/// only those the guard accepts at step `h_of(x)`.
pub fn admissible_points(
    s: &FieldSampler,
    center: Quaternion,
    radius: f64,
    n: usize,
    rng: &mut impl rand::Rng,
    h_of: impl Fn(Quaternion) -> f64,
) -> Vec<Quaternion> {
    let mut pts = Vec::with_capacity(n);
    let mut tries = 0;
    while pts.len() < n && tries < 1000 * n {
        tries += 1;
        let v = Quaternion::from_array(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        if v.norm_sq() > 1.0 {
            continue;
        }
        let x = center + v * radius;
        if (s.guard)(x, h_of(x)).is_ok() && (s.a)(x).is_ok() && (s.phi)(x).is_ok() {
            pts.push(x);
        }
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_xoshiro::SplitMix64;

    #[test]
    fn constant_connection_has_only_quadratic_curvature() {
        let a0 = Su2OneForm::new([
            crate::quat::ImQuaternion::new(0.1, 0.2, 0.3),
            crate::quat::ImQuaternion::new(-0.4, 0.0, 0.5),
            crate::quat::ImQuaternion::new(0.0, 1.0, 0.0),
            crate::quat::ImQuaternion::new(0.7, -0.2, 0.1),
        ]);
        let s = FieldSampler::new("const", move |_| Ok(a0), |_| Ok(Su2OneForm::zero()), |_, _| Ok(()));
        let f = fd_curvature(&s, Quaternion::new(0.3, 1.0, -2.0, 0.5), 1e-3).unwrap();
        assert!((f - wedge_one_one(&a0, &a0)).norm() < 1e-15);
    }

    #[test]
    fn thooft_is_anti_self_dual() {
        let s = FieldSampler::from_family(&SolutionFamily::THooft);
        let f = fd_curvature(&s, Quaternion::ONE, 1e-3).unwrap();
        assert!(f.sd_part().norm() <= 1e-5);
        assert!(f.asd_part().norm() > 0.1);
    }

    #[test]
    fn zero_fields_have_zero_residual() {
        let r = kw_residual_4d(&FieldSampler::zero(), Quaternion::new(1.0, 2.0, 3.0, 4.0), 1e-3).unwrap();
        assert_eq!((r.r_kw, r.r_div), (0.0, 0.0));
    }

    #[test]
    fn f1_residual_is_second_order() {
        let s = FieldSampler::from_family(&SolutionFamily::F1 { c: 1.0 });
        let x = Quaternion::new(1.2, -0.8, 1.0, 0.6) * (2.0 / Quaternion::new(1.2, -0.8, 1.0, 0.6).norm());
        let r = kw_residual_4d(&s, x, 1e-2).unwrap();
        assert!(r.r_kw < 1e-3);
        assert!((r.order_estimate - 2.0).abs() < 0.2, "{r:?}");
    }

    #[test]
    fn glued_outside_the_sphere() {
        let s = FieldSampler::from_family(&SolutionFamily::GluedPlus { c: 1.0 });
        let x = Quaternion::new(1.0, 1.0, 1.0, 1.0);
        let r = kw_residual_4d(&s, x, 1e-2).unwrap();
        assert!((r.r_kw / r.r_kw_half - 4.0).abs() < 0.4, "{r:?}");
        assert!(matches!(
            kw_residual_4d(&s, Quaternion::new(0.5, 0.5, 0.5, 0.5), 1e-3),
            Err(KwError::DomainGuard(_))
        ));
    }

    #[test]
    fn corrupted_higgs_is_detected() {
        let fam = SolutionFamily::F1 { c: 1.0 };
        let bad = FieldSampler::from_family_scaled(&fam, 1.1);
        let x = Quaternion::new(0.2, 0.4, -0.3, 0.5);
        let coarse = residuals_at(&bad, x, 1e-2).unwrap().0;
        let fine = residuals_at(&bad, x, 1e-4).unwrap().0;
        assert!(fine > 0.1 && (coarse / fine - 1.0).abs() < 1e-2);
    }

    #[test]
    fn scans() {
        let mut rng = SplitMix64::seed_from_u64(1);
        let fam = SolutionFamily::F2 { c: 1.0 };
        let s = FieldSampler::from_family(&fam);
        let pts = admissible_points(&s, Quaternion::ZERO, 2.0, 9, &mut rng, |_| 4e-2);
        assert_eq!(pts.len(), 9);
        let scan = order_scan(&s, &pts, 1e-2).unwrap();
        assert!((1.8..=2.2).contains(&scan.median_order), "{scan:?}");
        let bad = FieldSampler::from_family_scaled(&fam, 1.1);
        let scan = order_scan(&bad, &pts, 1e-2).unwrap();
        assert!(scan.median_order.abs() < 0.5);
        assert!(matches!(order_scan(&s, &pts[..3], 1e-2), Err(KwError::TooFewPoints { needed: 5, got: 3 })));
    }

    #[test]
    fn asd_solutions_use_their_own_equation() {
        let s = FieldSampler::from_family(&SolutionFamily::THooft);
        assert_eq!(s.lambda, 0.0);
        let x = Quaternion::new(0.3, 0.9, -0.2, 0.4);
        let r = kw_residual_4d(&s, x, 1e-2).unwrap();
        assert!((r.order_estimate - 2.0).abs() < 0.2, "{r:?}");
        let as_kw = s.with_lambda(-1.0);
        assert!(residuals_at(&as_kw, x, 1e-4).unwrap().0 > 1.0);
    }

    #[test]
    fn default_step_scales_with_radius() {
        assert_eq!(default_step(Quaternion::real(0.5)), 1e-3);
        assert_eq!(default_step(Quaternion::real(4.0)), 4e-3);
    }
}
