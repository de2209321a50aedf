//! Autonomous form of the reduced equations.
//!
//! With `s = ln t`, `ũ = t f − ½` and `ṽ = t g`, the twisted equations at
//! parameter `λ` become, writing `a = (λ + λ⁻¹)/2`, `b = (λ − λ⁻¹)/2` and
//! `P = ũ² − ṽ² − ¼`,
//!
//! ```text
//! a ũ′ = b P − 2ũṽ
//! a ṽ′ = −2b ũṽ − P
//! ```
//!
//! The only equilibria are `(±½, 0)` for every admissible `λ`.

use std::io::{self, Write};

use serde::Serialize;

use crate::error::{KwError, Result};
use crate::radial::RadialProfile;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct AutonomousState {
    pub u: f64,
    pub v: f64,
    pub s: f64,
}

impl AutonomousState {
    pub fn new(u: f64, v: f64, s: f64) -> Self {
        AutonomousState { u, v, s }
    }

    /// `(t f(t) − ½, t g(t))` at `t = e^s`.
    pub fn from_profile(p: &dyn RadialProfile, s: f64) -> Self {
        let t = s.exp();
        AutonomousState { u: p.f_tilde(t) - 0.5, v: p.g_tilde(t), s }
    }

    pub fn is_finite(&self) -> bool {
        self.u.is_finite() && self.v.is_finite() && self.s.is_finite()
    }

    /// Recovers `(f, g)` at `t = e^s`.
    pub fn to_fg(&self) -> (f64, f64) {
        let t = self.s.exp();
        ((self.u + 0.5) / t, self.v / t)
    }
}

/// `(a, b) = ((λ + λ⁻¹)/2, (λ − λ⁻¹)/2)`.
fn coefficients(lambda: f64) -> Result<(f64, f64)> {
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(KwError::InvalidLambda(lambda));
    }
    let inv = 1.0 / lambda;
    Ok((0.5 * (lambda + inv), 0.5 * (lambda - inv)))
}

fn rhs_ab(a: f64, b: f64, u: f64, v: f64) -> (f64, f64) {
    let p = u * u - v * v - 0.25;
    ((b * p - 2.0 * u * v) / a, (-2.0 * b * u * v - p) / a)
}

/// `(ũ′, ṽ′)`.
pub fn autonomous_rhs(lambda: f64, st: &AutonomousState) -> Result<(f64, f64)> {
    let (a, b) = coefficients(lambda)?;
    Ok(rhs_ab(a, b, st.u, st.v))
}

/// `I = ũ³/3 − ũṽ² − ũ/4 − b (ṽ³/3 − ũ²ṽ + ṽ/4)`.
///
/// At `λ = −1` (`b = 0`) this is `ũ³/3 − ũṽ² − ũ/4`, equal to `1/12` on every
/// orbit leaving the equilibrium `(−½, 0)`.
pub fn first_integral(lambda: f64, st: &AutonomousState) -> Result<f64> {
    let (_, b) = coefficients(lambda)?;
    let (u, v) = (st.u, st.v);
    Ok(u * u * u / 3.0 - u * v * v - 0.25 * u - b * (v * v * v / 3.0 - u * u * v + 0.25 * v))
}

/// `12ṽ²ũ − (2ũ+1)²(ũ−1)`, which vanishes on the `λ = −1` orbit through `(−½, 0)`.
pub fn cubic_orbit_residual(st: &AutonomousState) -> f64 {
    let (u, v) = (st.u, st.v);
    12.0 * v * v * u - (2.0 * u + 1.0) * (2.0 * u + 1.0) * (u - 1.0)
}

/// `W(ln t) + ũ_{F1}(t)` where `W(ln t) = ½(C²t² − 2Ct + 1)/(C²t² + 4Ct + 1)`.
pub fn branch_identity_check(c: f64, t: f64) -> f64 {
    let d = c * c * t * t + 4.0 * c * t + 1.0;
    let w = 0.5 * (c * c * t * t - 2.0 * c * t + 1.0) / d;
    let u = t * (3.0 * c / d) - 0.5;
    w + u
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct IntegratorStats {
    pub accepted: usize,
    pub rejected: usize,
    /// Largest embedded error estimate of an accepted step, in units of `tol`.
    pub max_error_ratio: f64,
    /// Largest absolute embedded error estimate of an accepted step.
    pub max_error_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub lambda: f64,
    pub samples: Vec<AutonomousState>,
    pub first_integral: Vec<f64>,
    pub stats: IntegratorStats,
    /// Set when integration stopped early: step underflow, overflow or a non-finite state.
    pub blown_up: bool,
}

impl Trajectory {
    pub fn last(&self) -> &AutonomousState {
        self.samples.last().expect("trajectory always holds the initial state")
    }

    /// Largest `|I(s) − I(s₀)|` along the trajectory.
    pub fn max_first_integral_drift(&self) -> f64 {
        let i0 = self.first_integral[0];
        self.first_integral.iter().map(|i| (i - i0).abs()).fold(0.0, f64::max)
    }

    /// Columns `s,u_tilde,v_tilde,first_integral`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "s,u_tilde,v_tilde,first_integral")?;
        for (st, i) in self.samples.iter().zip(&self.first_integral) {
            writeln!(w, "{:.16e},{:.16e},{:.16e},{:.16e}", st.s, st.u, st.v, i)?;
        }
        Ok(())
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;
const MAX_STEPS: usize = 2_000_000;
const OVERFLOW: f64 = 1e12;

type Vec2 = [f64; 2];

fn axpy(y: Vec2, terms: &[(f64, Vec2)], h: f64) -> Vec2 {
    let mut out = y;
    for (c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

/// Integrates from `init` to `s_end > init.s` with an embedded Runge–Kutta 4(5)
/// pair and PI step control. Accepted steps satisfy
/// `|err_i| ≤ tol · max(1, |y_i|)` componentwise.
///
/// A blow-up does not return an error. The trajectory is truncated at the last
/// valid state and `blown_up` is set.
pub fn integrate(lambda: f64, init: AutonomousState, s_end: f64, tol: f64) -> Result<Trajectory> {
    let (a, b) = coefficients(lambda)?;
    if !(tol > 0.0) || !init.is_finite() || !s_end.is_finite() || s_end <= init.s {
        return Err(KwError::InvalidParameter(format!(
            "integrate needs finite init, s_end > s0 and tol > 0 (s0 = {}, s_end = {s_end}, tol = {tol})",
            init.s
        )));
    }
    let f = |y: Vec2| -> Vec2 {
        let (du, dv) = rhs_ab(a, b, y[0], y[1]);
        [du, dv]
    };
    let span = s_end - init.s;
    let h_min = 1e-14 * span;
    let integral = |y: Vec2| {
        let (u, v) = (y[0], y[1]);
        u * u * u / 3.0 - u * v * v - 0.25 * u - b * (v * v * v / 3.0 - u * u * v + 0.25 * v)
    };

    let mut s = init.s;
    let mut y = [init.u, init.v];
    let mut samples = vec![init];
    let mut first = vec![integral(y)];
    let mut stats = IntegratorStats::default();
    let mut blown_up = false;

    let mut k1 = f(y);
    let scale0 = 1.0 + y[0].abs().max(y[1].abs());
    let slope = k1[0].abs().max(k1[1].abs());
    let mut h = if slope > 0.0 { (0.01 * scale0 / slope).min(0.1 * span) } else { 0.1 * span };
    h = h.max(h_min);
    let mut err_prev: f64 = 1.0;

    while s < s_end {
        if stats.accepted + stats.rejected >= MAX_STEPS {
            blown_up = true;
            break;
        }
        let last = s + h >= s_end;
        if last {
            h = s_end - s;
        }
        let k2 = f(axpy(y, &[(A21, k1)], h));
        let k3 = f(axpy(y, &[(A31, k1), (A32, k2)], h));
        let k4 = f(axpy(y, &[(A41, k1), (A42, k2), (A43, k3)], h));
        let k5 = f(axpy(y, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], h));
        let k6 = f(axpy(y, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], h));
        let y_new = axpy(y, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], h);
        let k7 = f(y_new);
        let err: Vec2 = std::array::from_fn(|i| {
            h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let finite = y_new.iter().chain(err.iter()).all(|v| v.is_finite());
        let ratio = if finite {
            (0..2)
                .map(|i| err[i].abs() / (tol * y[i].abs().max(y_new[i].abs()).max(1.0)))
                .fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };

        if ratio <= 1.0 {
            s = if last { s_end } else { s + h };
            y = y_new;
            k1 = k7;
            stats.accepted += 1;
            stats.max_error_ratio = stats.max_error_ratio.max(ratio);
            stats.max_error_estimate = stats.max_error_estimate.max(err[0].abs().max(err[1].abs()));
            samples.push(AutonomousState { u: y[0], v: y[1], s });
            first.push(integral(y));
            if y[0].abs().max(y[1].abs()) > OVERFLOW {
                blown_up = true;
                break;
            }
            let r = ratio.max(1e-10);
            let factor = (SAFETY * r.powf(-PI_ALPHA) * err_prev.powf(PI_BETA)).clamp(0.2, 5.0);
            err_prev = r;
            h *= factor;
        } else {
            stats.rejected += 1;
            let factor = if ratio.is_finite() { (SAFETY * ratio.powf(-0.2)).clamp(0.1, 0.9) } else { 0.1 };
            h *= factor;
        }
        if h < h_min && s < s_end {
            blown_up = true;
            break;
        }
    }

    Ok(Trajectory { lambda, samples, first_integral: first, stats, blown_up })
}

/// The two equilibria `(½, 0)` and `(−½, 0)`.
pub fn equilibria() -> [AutonomousState; 2] {
    [AutonomousState::new(0.5, 0.0, 0.0), AutonomousState::new(-0.5, 0.0, 0.0)]
}

/// Jacobian of [`autonomous_rhs`] at `st` by central differences with step `h`.
pub fn jacobian(lambda: f64, st: &AutonomousState, h: f64) -> Result<[[f64; 2]; 2]> {
    let (a, b) = coefficients(lambda)?;
    let col = |du: f64, dv: f64| {
        let p = rhs_ab(a, b, st.u + du, st.v + dv);
        let m = rhs_ab(a, b, st.u - du, st.v - dv);
        [(p.0 - m.0) / (2.0 * h), (p.1 - m.1) / (2.0 * h)]
    };
    let cu = col(h, 0.0);
    let cv = col(0.0, h);
    Ok([[cu[0], cv[0]], [cu[1], cv[1]]])
}

/// Eigenvalues of a 2×2 matrix as `(re, im)` pairs.
pub fn eigenvalues_2x2(m: &[[f64; 2]; 2]) -> [(f64, f64); 2] {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = 0.25 * tr * tr - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [(0.5 * tr + r, 0.0), (0.5 * tr - r, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [(0.5 * tr, r), (0.5 * tr, -r)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub state: AutonomousState,
    pub jacobian: [[f64; 2]; 2],
    pub eigenvalues: [(f64, f64); 2],
}

pub fn equilibrium_reports(lambda: f64) -> Result<Vec<EquilibriumReport>> {
    equilibria()
        .iter()
        .map(|st| {
            let j = jacobian(lambda, st, 1e-6)?;
            Ok(EquilibriumReport { state: *st, jacobian: j, eigenvalues: eigenvalues_2x2(&j) })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::SolutionFamily;

    fn st(u: f64, v: f64) -> AutonomousState {
        AutonomousState::new(u, v, 0.0)
    }

    #[test]
    fn rhs_examples() {
        assert_eq!(autonomous_rhs(-1.0, &st(-0.5, 0.0)).unwrap(), (0.0, 0.0));
        assert_eq!(autonomous_rhs(-1.0, &st(0.5, 0.0)).unwrap(), (0.0, 0.0));
        assert_eq!(autonomous_rhs(-1.0, &st(0.0, 0.5)).unwrap(), (0.0, -0.5));
        assert_eq!(autonomous_rhs(0.0, &st(0.0, 0.5)), Err(KwError::InvalidLambda(0.0)));
        for lambda in [-3.0, -0.5, 0.7, 2.0] {
            for e in equilibria() {
                assert_eq!(autonomous_rhs(lambda, &e).unwrap(), (0.0, 0.0));
            }
        }
    }

    #[test]
    fn reduces_to_kw_form_at_minus_one() {
        let s = st(0.3, -1.2);
        let (du, dv) = autonomous_rhs(-1.0, &s).unwrap();
        assert_eq!(du, 2.0 * s.u * s.v);
        assert_eq!(dv, s.u * s.u - s.v * s.v - 0.25);
    }

    #[test]
    fn first_integral_examples() {
        assert!((first_integral(-1.0, &st(-0.5, 0.0)).unwrap() - 1.0 / 12.0).abs() < 1e-16);
        let f1 = AutonomousState::new(-1.0 / 26.0, 18.0 / 13.0, 2f64.ln());
        assert!((first_integral(-1.0, &f1).unwrap() - 1.0 / 12.0).abs() < 1e-12);
        assert_eq!(first_integral(-1.0, &st(0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn f1_state_from_profile() {
        let p = SolutionFamily::F1 { c: 1.0 }.profile();
        let s = AutonomousState::from_profile(&p, 2f64.ln());
        assert!((s.u + 1.0 / 26.0).abs() < 1e-15);
        assert!((s.v - 18.0 / 13.0).abs() < 1e-14);
        let (f, g) = s.to_fg();
        assert!((f - 3.0 / 13.0).abs() < 1e-15 && (g - 9.0 / 13.0).abs() < 1e-14);
    }

    // Directional derivative of I along the vector field, by central differences.
    fn lie_derivative(lambda: f64, integral: impl Fn(f64, f64) -> f64, u: f64, v: f64) -> f64 {
        let (du, dv) = autonomous_rhs(lambda, &st(u, v)).unwrap();
        let h = 1e-6;
        let iu = (integral(u + h, v) - integral(u - h, v)) / (2.0 * h);
        let iv = (integral(u, v + h) - integral(u, v - h)) / (2.0 * h);
        iu * du + iv * dv
    }

    #[test]
    fn first_integral_is_conserved_for_general_lambda() {
        for lambda in [-2.0, -0.3, 0.5, 3.0] {
            for (u, v) in [(0.1, 0.2), (-0.7, 1.3), (2.0, -0.4)] {
                let d = lie_derivative(lambda, |u, v| first_integral(lambda, &st(u, v)).unwrap(), u, v);
                assert!(d.abs() < 1e-8, "λ={lambda}: {d}");
            }
        }
    }

    #[test]
    fn cubic_coefficient_on_v_cubed_breaks_conservation() {
        // With ṽ³ in place of ṽ³/3 the function is not constant along flows with λ ≠ ±1.
        let lambda = 2.0;
        let b = 0.5 * (lambda - 1.0 / lambda);
        let printed = |u: f64, v: f64| u * u * u / 3.0 - u * v * v - 0.25 * u - b * (v * v * v - u * u * v + 0.25 * v);
        let d = lie_derivative(lambda, printed, -0.7, 1.3);
        assert!(d.abs() > 1e-2);
    }

    #[test]
    fn cubic_orbit_examples() {
        assert_eq!(cubic_orbit_residual(&st(-0.5, 0.0)), 0.0);
        assert!(cubic_orbit_residual(&st(-1.0 / 26.0, 18.0 / 13.0)).abs() < 1e-12);
        assert_eq!(cubic_orbit_residual(&st(1.0, 0.0)), 0.0);
        assert_eq!(cubic_orbit_residual(&st(1.0, 1.0)), 12.0);
    }

    #[test]
    fn branch_identity_examples() {
        assert!(branch_identity_check(1.0, 2.0).abs() < 1e-14);
        assert_eq!(branch_identity_check(1.0, 1.0), 0.0);
        assert!(branch_identity_check(2.0, 3.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_f1_orbit_to_closed_form() {
        // C = 2 keeps the Higgs pole (s = −ln 2) outside [0, 3].
        let p = SolutionFamily::F1 { c: 2.0 }.profile();
        let init = AutonomousState::from_profile(&p, 0.0);
        let traj = integrate(-1.0, init, 3.0, 1e-10).unwrap();
        assert!(!traj.blown_up);
        let end = traj.last();
        let exact = AutonomousState::from_profile(&p, 3.0);
        assert_eq!(end.s, 3.0);
        assert!((end.u - exact.u).abs() < 1e-7 && (end.v - exact.v).abs() < 1e-7);
        assert!(traj.max_first_integral_drift() <= 1e-8);
        assert!(traj.samples.windows(2).all(|w| w[1].s > w[0].s));
        for s in &traj.samples {
            assert!(cubic_orbit_residual(s).abs() < 1e-8 * (1.0 + s.v * s.v));
        }
    }

    #[test]
    fn equilibrium_is_fixed() {
        let traj = integrate(-1.0, AutonomousState::new(-0.5, 0.0, 0.0), 5.0, 1e-10).unwrap();
        assert!(traj.samples.iter().all(|s| s.u == -0.5 && s.v == 0.0));
        assert_eq!(traj.last().s, 5.0);
    }

    #[test]
    fn detects_blow_up() {
        // ũ stays 0 and ṽ = ½ tan(atan 20 − s/2) reaches −∞ at s* = 2(atan 20 + π/2).
        let s_star = 2.0 * (20f64.atan() + std::f64::consts::FRAC_PI_2);
        let traj = integrate(-1.0, AutonomousState::new(0.0, 10.0, 0.0), 10.0, 1e-10).unwrap();
        assert!(traj.blown_up);
        assert!((traj.last().s - s_star).abs() < 1e-6);
    }

    #[test]
    fn tan_orbit_blows_up() {
        let p = SolutionFamily::TanFamily { c: 0.0 }.profile();
        let init = AutonomousState::from_profile(&p, -1.0);
        let traj = integrate(-1.0, init, 10.0, 1e-10).unwrap();
        assert!(traj.blown_up);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(integrate(-1.0, st(0.0, 0.0), -1.0, 1e-8).is_err());
        assert!(integrate(-1.0, st(0.0, 0.0), 1.0, 0.0).is_err());
        assert!(integrate(0.0, st(0.0, 0.0), 1.0, 1e-8).is_err());
    }

    #[test]
    fn equilibrium_jacobians() {
        let reps = equilibrium_reports(-1.0).unwrap();
        // at (±½, 0): J = [[0, ±1], [±1, 0]]
        for (rep, sign) in reps.iter().zip([1.0, -1.0]) {
            let j = rep.jacobian;
            assert!(j[0][0].abs() < 1e-9 && j[1][1].abs() < 1e-9);
            assert!((j[0][1] - sign).abs() < 1e-9 && (j[1][0] - sign).abs() < 1e-9);
            let ev = rep.eigenvalues;
            assert!((ev[0].0 - 1.0).abs() < 1e-9 && (ev[1].0 + 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let traj = integrate(-1.0, st(-0.4, 0.1), 0.5, 1e-8).unwrap();
        let mut buf = Vec::new();
        traj.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("s,u_tilde,v_tilde,first_integral"));
        assert_eq!(lines.count(), traj.samples.len());
    }
}
