//! Instanton numbers, curvature norms, bubbling and the `L²` divergence of
//! `d_Aφ` at the Higgs pole.
//!
//! Instanton numbers use `k = (1/4π²) ∫ tr(F∧F)`, with `tr(F∧F) = |F⁺|² − |F⁻|²`
//! as in [`fourform_trace_density`]. For the ansatz `Im(f x̄dx)` this reduces to
//! `k = 6 ∫₀^∞ f̃(f̃−1) f̃′ dt = P(f̃(∞)) − P(f̃(0))` with `P(y) = 2y³ − 3y²`. On
//! the conjugate ansatz the sign is reversed. Anti-self-dual connections such as
//! the t'Hooft solution therefore have negative `k`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{KwError, Result};
use crate::families::SolutionFamily;
use crate::forms::{curvature, fourform_trace_density, Su2OneFormJet};
use crate::quadrature::{integrate_breaks, integrate_to_infinity, log_panels, QuadResult};
use crate::quat::Quaternion;
use crate::radial::{check_profile, reduced_components, Ansatz, RadialProfile};

/// Tail start must satisfy `|f̃(t_max) − f̃(∞)|` below this; the quadratic tail
/// correction then leaves an error of order `2|δ|³`.
pub const TAIL_DELTA_MAX: f64 = 1e-3;

pub const CONVENTION_NOTE: &str = "k = (1/4pi^2) int tr(F^F), tr(F^F) = |F+|^2 - |F-|^2; \
     x-bar dx ansatz: k = P(f~(inf)) - P(f~(0)), P(y) = 2y^3 - 3y^2 (anti-self-dual => k < 0); \
     x dx-bar ansatz: sign reversed";

fn antiderivative(y: f64) -> f64 {
    2.0 * y * y * y - 3.0 * y * y
}

fn orientation_sign(fam: &SolutionFamily) -> f64 {
    match fam.ansatz() {
        Ansatz::XbarDx => 1.0,
        Ansatz::XDxbar => -1.0,
    }
}

fn interior_f_pole(fam: &SolutionFamily) -> Option<f64> {
    fam.profile().f_poles().into_iter().find(|&p| p > 0.0)
}

/// `P(f̃(∞)) − P(f̃(0))`, sign-reversed on the conjugate ansatz.
pub fn instanton_boundary(fam: &SolutionFamily) -> Result<f64> {
    let (y0, y1) = fam.tilde_limits();
    let is_eq = |y: f64| y.abs() < 1e-8 || (y - 1.0).abs() < 1e-8;
    if !is_eq(y0) || !is_eq(y1) {
        return Err(KwError::NoLimit { at_zero: y0, at_infinity: y1 });
    }
    if let Some(pole) = interior_f_pole(fam) {
        return Err(KwError::PoleInDomain { pole });
    }
    Ok(orientation_sign(fam) * (antiderivative(y1) - antiderivative(y0)))
}

/// Natural length scale in `t` of a family (`1/C`, or 1).
fn t_scale(fam: &SolutionFamily) -> f64 {
    let c = fam.c();
    if c > 0.0 {
        1.0 / c
    } else {
        1.0
    }
}

fn breaks_for(p: &dyn RadialProfile, lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![0.0];
    b.extend(log_panels(lo, hi, 4));
    for k in p.kinks() {
        if k > lo && k < hi {
            b.push(k);
        }
    }
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InstantonQuadrature {
    pub value: f64,
    pub error_estimate: f64,
    pub tail: f64,
    pub quad: QuadResult,
}

/// `6 ∫₀^{t_max} f̃(f̃−1) f̃′ dt` plus the quadratic tail `(3 − 6f̃(∞)) δ²`,
/// `δ = f̃(t_max) − f̃(∞)`.
pub fn instanton_quadrature(fam: &SolutionFamily, t_max: f64) -> Result<InstantonQuadrature> {
    if let Some(pole) = interior_f_pole(fam) {
        return Err(KwError::PoleInDomain { pole });
    }
    let (y0, y_inf) = fam.tilde_limits();
    let is_eq = |y: f64| y.abs() < 1e-8 || (y - 1.0).abs() < 1e-8;
    if !is_eq(y0) || !is_eq(y_inf) {
        return Err(KwError::NoLimit { at_zero: y0, at_infinity: y_inf });
    }
    let p = fam.profile();
    let delta = p.f_tilde(t_max) - y_inf;
    if !(delta.abs() < TAIL_DELTA_MAX) {
        return Err(KwError::InvalidParameter(format!(
            "t_max = {t_max:e} too small: |f~(t_max) - f~(inf)| = {:e}",
            delta.abs()
        )));
    }
    let scale = t_scale(fam);
    let lo = (1e-10 * scale).min(0.5 * t_max);
    let mut integrand = |t: f64| {
        let y = p.f_tilde(t);
        6.0 * y * (y - 1.0) * p.f_tilde_prime(t)
    };
    let quad = integrate_breaks(&mut integrand, &breaks_for(&p, lo, t_max), 1e-9, 20_000);
    let tail = (3.0 - 6.0 * y_inf) * delta * delta;
    let sign = orientation_sign(fam);
    Ok(InstantonQuadrature {
        value: sign * (quad.value + tail),
        error_estimate: quad.error + 2.0 * delta.abs().powi(3),
        tail: sign * tail,
        quad,
    })
}

/// Both instanton-number paths for a family, plus the 4D trace-density integral.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstantonReport {
    pub family: String,
    pub k_boundary: f64,
    pub k_quadrature: f64,
    pub quadrature_error_estimate: f64,
    pub k_trace_density: f64,
    pub trace_density_error_estimate: f64,
    pub k_abs: f64,
    pub consistent: bool,
    pub convention_note: String,
}

/// Smallest `t_max ≥ 10³ · scale` (by decades) with `|δ| < 1e−7`.
pub fn default_t_max(fam: &SolutionFamily) -> f64 {
    let p = fam.profile();
    let (_, y_inf) = fam.tilde_limits();
    let mut t = 1e3 * t_scale(fam);
    while (p.f_tilde(t) - y_inf).abs() >= 1e-7 && t < 1e14 {
        t *= 10.0;
    }
    t
}

pub fn instanton_report(fam: &SolutionFamily) -> Result<InstantonReport> {
    let k_boundary = instanton_boundary(fam)?;
    let q = instanton_quadrature(fam, default_t_max(fam))?;
    let td = radial_trace_density_instanton(fam)?;
    let tol = 1e-6f64.max(q.error_estimate);
    Ok(InstantonReport {
        family: fam.to_string(),
        k_boundary,
        k_quadrature: q.value,
        quadrature_error_estimate: q.error_estimate,
        k_trace_density: td.value,
        trace_density_error_estimate: td.error,
        k_abs: k_boundary.abs(),
        consistent: (k_boundary - q.value).abs() <= tol && (td.value - k_boundary).abs() <= 1e-4,
        convention_note: CONVENTION_NOTE.to_string(),
    })
}

/// `(1/4π²) ∫ tr(F∧F)` over `ℝ⁴` for a field whose connection jet is given by
/// `jet(x)`, integrated over shells `|x − center|² = t` with `dVol = π² t dt`.
///
/// The density on each shell is averaged over `directions`; the returned error
/// adds the quadrature estimate and the largest directional spread seen,
/// integrated against the shell measure.
pub fn shell_trace_integral(
    jet: &dyn Fn(Quaternion) -> Result<Su2OneFormJet>,
    center: Quaternion,
    directions: &[Quaternion],
    breaks: &[f64],
    tail_from: f64,
) -> Result<QuadResult> {
    let dirs: Vec<Quaternion> = directions.iter().map(|d| d.normalized()).collect();
    let mut failure = None;
    let mut spread_integral = 0.0f64;
    let mut shell = |t: f64, record_spread: bool| -> f64 {
        let r = t.max(0.0).sqrt();
        let mut sum = 0.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for d in &dirs {
            match jet(center + *d * r) {
                Ok(a) => {
                    let f = curvature(&a);
                    let v = fourform_trace_density(&f, &f);
                    sum += v;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                Err(e) => {
                    failure.get_or_insert(e);
                }
            }
        }
        if record_spread {
            spread_integral = spread_integral.max((hi - lo).abs() * t);
        }
        sum / dirs.len() as f64 * PI * PI * t / (4.0 * PI * PI)
    };
    let mut inner = |t: f64| shell(t, true);
    let body = integrate_breaks(&mut inner, breaks, 1e-10, 20_000);
    let mut outer = |t: f64| shell(t, false);
    let tail = integrate_to_infinity(&mut outer, tail_from, 1e-10);
    if let Some(e) = failure {
        return Err(e);
    }
    let mut total = body + tail;
    total.error += spread_integral * tail_from / 4.0;
    Ok(total)
}

/// The 4D trace-density instanton number of a catalog family, from exact jets.
pub fn radial_trace_density_instanton(fam: &SolutionFamily) -> Result<QuadResult> {
    if let Some(pole) = interior_f_pole(fam) {
        return Err(KwError::PoleInDomain { pole });
    }
    let p = fam.profile();
    let ansatz = fam.ansatz();
    let jet = move |x: Quaternion| -> Result<Su2OneFormJet> {
        let t = x.norm_sq();
        Ok(ansatz.one_form_jet(p.f(t), p.df(t), x))
    };
    let scale = t_scale(fam);
    let hi = 1e4 * scale;
    let breaks = breaks_for(&p, 1e-8 * scale, hi);
    let dirs = [
        Quaternion::new(1.0, 0.0, 0.0, 0.0),
        Quaternion::new(0.3, -0.5, 0.8, 0.1),
        Quaternion::new(-0.2, 0.4, 0.1, -0.9),
    ];
    shell_trace_integral(&jet, Quaternion::ZERO, &dirs, &breaks, hi)
}

/// `|F_A⁺|²` and `|F_A⁻|²` at `t`.
pub fn curvature_norm_parts(fam: &SolutionFamily, t: f64) -> Result<(f64, f64)> {
    let p = fam.profile();
    check_profile_f(&p, t)?;
    let (f, df) = (p.f(t), p.df(t));
    let sd = 6.0 * (df + f * f).powi(2) * t * t;
    let asd = 6.0 * (t * df + 2.0 * f - t * f * f).powi(2);
    Ok((sd, asd))
}

fn check_profile_f(p: &dyn RadialProfile, t: f64) -> Result<()> {
    crate::radial::check_poles(&p.f_poles(), t)
}

/// `|F_A|² = 6(tf′ + 2f − tf²)² + 6(f′ + f²)² t²`.
pub fn curvature_norm_sq(fam: &SolutionFamily, t: f64) -> Result<f64> {
    let (sd, asd) = curvature_norm_parts(fam, t)?;
    Ok(sd + asd)
}

/// `|d_Aφ|²` at `t` under the componentwise norm.
pub fn daphi_norm_sq(fam: &SolutionFamily, t: f64) -> Result<f64> {
    let p = fam.profile();
    Ok(reduced_components(&p, t)?.dap_norm_sq(t))
}

/// `|F_A|` of the member `F1(c)`.
fn f1_curvature_norm(c: f64, t: f64) -> f64 {
    curvature_norm_sq(&SolutionFamily::F1 { c }, t).map(f64::sqrt).unwrap_or(f64::NAN)
}

/// `(|F^C|(t), C |F^1|(Ct))` for the `F1` family.
pub fn bubbling_check(c: f64, t: f64) -> (f64, f64) {
    (f1_curvature_norm(c, t), c * f1_curvature_norm(1.0, c * t))
}

/// `∫_{|x|² ≤ t_hi} |F^C|² dVol` for `F1(C)`, computed directly in `t`.
pub fn l2_curvature_mass_to(c: f64, t_hi: f64) -> QuadResult {
    let fam = SolutionFamily::F1 { c };
    let mut f = |t: f64| curvature_norm_sq(&fam, t).unwrap_or(0.0) * PI * PI * t;
    let lo = (1e-8 / c).min(0.5 * t_hi);
    let mut breaks = vec![0.0];
    breaks.extend(log_panels(lo, t_hi, 4));
    integrate_breaks(&mut f, &breaks, 1e-11, 20_000)
}

/// `∫_{ℝ⁴} |F^C|² dVol` for `F1(C)`.
pub fn l2_curvature_mass(c: f64) -> f64 {
    let fam = SolutionFamily::F1 { c };
    let hi = 1e4 / c;
    let body = l2_curvature_mass_to(c, hi);
    let tail = integrate_to_infinity(|t| curvature_norm_sq(&fam, t).unwrap_or(0.0) * PI * PI * t, hi, 1e-13);
    body.value + tail.value
}

/// Fraction of the `L²` curvature mass of `F1(C)` inside `|x| ≤ r`.
pub fn concentration_fraction(c: f64, r: f64) -> Result<f64> {
    if !(c > 0.0) || !(r > 0.0) {
        return Err(KwError::InvalidParameter(format!("need C > 0 and r > 0, got C = {c}, r = {r}")));
    }
    if r.is_infinite() {
        return Ok(1.0);
    }
    Ok(l2_curvature_mass_to(c, r * r).value / l2_curvature_mass(c))
}

/// `∫_{1/C+ε}^{upper} |d_Aφ|² π² t dt` for a family with a Higgs pole at `t = 1/C`.
pub fn singular_integral(fam: &SolutionFamily, eps: f64, upper: f64) -> Result<QuadResult> {
    let pole = 1.0 / fam.c();
    let lo = pole + eps;
    if !(eps > 0.0) || !(upper > lo) {
        return Err(KwError::InvalidParameter(format!("need 0 < eps and 1/C + eps < upper, got eps = {eps}")));
    }
    let p = fam.profile();
    check_profile(&p, lo)?;
    let mut f = |t: f64| daphi_norm_sq(fam, t).unwrap_or(0.0) * PI * PI * t;
    // Panels geometric in the distance to the pole.
    let n = 48;
    let breaks: Vec<f64> = (0..=n).map(|i| pole + eps * ((upper - pole) / eps).powf(i as f64 / n as f64)).collect();
    let tol = 1e-10 * eps.powi(-3).max(1.0);
    Ok(integrate_breaks(&mut f, &breaks, tol, 20_000))
}

/// `∫ |d_Aφ|² π² t dt` over `(1/C − ε, 1/C + ε) ∖ {1/C}`, both sides of the pole.
pub fn singular_integral_two_sided(fam: &SolutionFamily, eps: f64) -> Result<QuadResult> {
    let pole = 1.0 / fam.c();
    if !(eps > 0.0) || !(eps < 0.5 * pole) {
        return Err(KwError::InvalidParameter(format!("need 0 < eps < 1/(2C), got eps = {eps}")));
    }
    let p = fam.profile();
    check_profile(&p, pole - eps)?;
    check_profile(&p, pole + eps)?;
    let mut f = |t: f64| daphi_norm_sq(fam, t).unwrap_or(0.0) * PI * PI * t;
    let n = 24;
    let outer = 0.5 * pole;
    let tol = 1e-10 * eps.powi(-3).max(1.0);
    // Panels geometric in the distance to the pole on each side.
    let dist = |i: usize| eps * (outer / eps).powf(i as f64 / n as f64);
    let left_breaks: Vec<f64> = (0..=n).rev().map(|i| pole - dist(i)).collect();
    let right_breaks: Vec<f64> = (0..=n).map(|i| pole + dist(i)).collect();
    let left = integrate_breaks(&mut f, &left_breaks, tol, 20_000);
    let right = integrate_breaks(&mut f, &right_breaks, tol, 20_000);
    Ok(left + right)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularGrowth {
    pub eps: Vec<f64>,
    pub integrals: Vec<f64>,
    /// `p` in `I(ε) ~ ε^{−p}`.
    pub exponent: f64,
}

/// Growth exponent of [`singular_integral`] as `ε → 0`.
pub fn singular_growth(fam: &SolutionFamily, eps: &[f64], upper: f64) -> Result<SingularGrowth> {
    let integrals = eps
        .iter()
        .map(|&e| singular_integral(fam, e, upper).map(|q| q.value))
        .collect::<Result<Vec<_>>>()?;
    let exponent = -log_log_slope(eps, &integrals);
    Ok(SingularGrowth { eps: eps.to_vec(), integrals, exponent })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CurvatureRow {
    pub t: f64,
    pub f_norm_sq: f64,
    pub f_sd_norm_sq: f64,
    pub f_asd_norm_sq: f64,
    pub dap_norm_sq: f64,
}

/// Rows of `t, |F|², |F⁺|², |F⁻|², |d_Aφ|²`; points on the singular locus are skipped.
pub fn curvature_table(fam: &SolutionFamily, ts: &[f64]) -> Vec<CurvatureRow> {
    ts.iter()
        .filter_map(|&t| {
            let (sd, asd) = curvature_norm_parts(fam, t).ok()?;
            let dap = daphi_norm_sq(fam, t).ok()?;
            Some(CurvatureRow { t, f_norm_sq: sd + asd, f_sd_norm_sq: sd, f_asd_norm_sq: asd, dap_norm_sq: dap })
        })
        .collect()
}
