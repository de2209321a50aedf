//! The `S³ × (0,∞)` picture: orthonormal frames on `S³`, the conformal map
//! `Ψ(y, ω) = C^{−1/2} e^y ω`, and the two singular solutions it carries to
//! fields with a Nahm pole at `y = 0`.
//!
//! A radial field `Im(f(t) x̄dx)` pulls back under `Ψ` to `2 f̃(t) Σ t_a e_a⋆`
//! with `t = e^{2y}/C`, where `e_a⋆` is the unit coframe of the round `S³`. The
//! profiles printed for these solutions are that coefficient times `e^{−2y}`;
//! [`pullback_profiles`] returns the printed form and
//! [`true_pullback_profiles`] the exact pullback, and the two agree at the pole.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KwError, Result};
use crate::families::SolutionFamily;
use crate::quadrature::{integrate_breaks, log_panels, QuadResult};
use crate::quat::{ImQuaternion, Quaternion};
use crate::radial::{eval_connection, eval_higgs, RadialProfile};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NahmSolution {
    PlusHalf,
    MinusHalf,
}

impl NahmSolution {
    pub const ALL: [NahmSolution; 2] = [NahmSolution::PlusHalf, NahmSolution::MinusHalf];

    /// The radial family that `Ψ` pulls back.
    pub fn family(self, c: f64) -> SolutionFamily {
        match self {
            NahmSolution::PlusHalf => SolutionFamily::F1 { c },
            NahmSolution::MinusHalf => SolutionFamily::F2 { c },
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            NahmSolution::PlusHalf => "plus_half",
            NahmSolution::MinusHalf => "minus_half",
        }
    }
}

impl fmt::Display for NahmSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for NahmSolution {
    type Err = KwError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus_half" => Ok(NahmSolution::PlusHalf),
            "minus_half" => Ok(NahmSolution::MinusHalf),
            _ => Err(KwError::InvalidParameter(format!("unknown solution '{s}' (plus_half, minus_half)"))),
        }
    }
}

/// `t_a = e_a / 2` for `a = 1, 2, 3`; these satisfy `[t_a, t_b] = ε_{abc} t_c`.
pub fn su2_triple() -> [ImQuaternion; 3] {
    [0, 1, 2].map(|a| ImQuaternion::unit(a) * 0.5)
}

/// The frame `e₁, e₂, e₃` of `T_x S³` and its dual coframe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphereFrame {
    pub x: Quaternion,
    pub e: [Quaternion; 3],
    /// `estar[a][j]` is the `dx_j` coefficient of `e_a⋆`.
    pub estar: [[f64; 4]; 3],
}

impl SphereFrame {
    pub fn gram(&self) -> [[f64; 3]; 3] {
        std::array::from_fn(|a| std::array::from_fn(|b| self.e[a].dot(self.e[b])))
    }
}

pub fn frame(x: Quaternion) -> Result<SphereFrame> {
    let n = x.norm();
    if (n - 1.0).abs() >= 1e-10 {
        return Err(KwError::NonUnitPoint(n));
    }
    let (x1, x2, x3, x4) = (x.w, x.x, x.y, x.z);
    let e = [
        Quaternion::new(-x2, x1, -x4, x3),
        Quaternion::new(-x3, x4, x1, -x2),
        Quaternion::new(-x4, -x3, x2, x1),
    ];
    Ok(SphereFrame { x, e, estar: e.map(|v| v.to_array()) })
}

/// The frame `x·I, x·J, x·K`. Its coframe is the one that decomposes
/// `Im(x̄dx)`; the frame of [`frame`] is `I·x, J·x, K·x` and decomposes
/// `Im(dx x̄)` instead.
pub fn right_frame(x: Quaternion) -> Result<SphereFrame> {
    let n = x.norm();
    if (n - 1.0).abs() >= 1e-10 {
        return Err(KwError::NonUnitPoint(n));
    }
    let e = [Quaternion::I, Quaternion::J, Quaternion::K].map(|u| x * u);
    Ok(SphereFrame { x, e, estar: e.map(|v| v.to_array()) })
}

/// `Σ_a e_a⋆ ⊗ unit_a` as the four `dx_j` coefficients.
pub fn frame_decomposition(fr: &SphereFrame) -> [ImQuaternion; 4] {
    std::array::from_fn(|j| {
        (0..3).fold(ImQuaternion::ZERO, |acc, a| acc + ImQuaternion::unit(a) * fr.estar[a][j])
    })
}

/// Largest componentwise gap between `Im(x̄dx)` and `Σ_a e_a⋆ unit_a` for the
/// frame of [`frame`].
pub fn frame_decomposition_residual(x: Quaternion) -> Result<f64> {
    let dec = frame_decomposition(&frame(x)?);
    let im = crate::radial::Ansatz::XbarDx.one_form(1.0, x);
    Ok((0..4).map(|j| (im.c[j] - dec[j]).norm()).fold(0.0, f64::max))
}

/// `Ψ(y, ω) = C^{−1/2} e^y ω`.
pub fn psi(c: f64, y: f64, omega: Quaternion) -> Quaternion {
    omega * (y.exp() / c.sqrt())
}

fn check_y(y: f64) -> Result<()> {
    if !(y > 0.0) {
        return Err(KwError::InvalidParameter(format!("y must be positive, got {y}")));
    }
    Ok(())
}

fn p_printed(y: f64) -> f64 {
    let e2 = (2.0 * y).exp();
    let q = e2 * e2 + 4.0 * e2 + 1.0;
    // e^{2y} − 1 via expm1 keeps the 1/y pole accurate.
    6.0 * (e2 + 1.0) / (q * (2.0 * y).exp_m1())
}

/// The printed coefficients `(a(y), p(y))` of `Σ t_a e_a⋆` in `A` and `φ`.
pub fn pullback_profiles(which: NahmSolution, y: f64) -> Result<(f64, f64)> {
    check_y(y)?;
    let e2 = (2.0 * y).exp();
    let q = e2 * e2 + 4.0 * e2 + 1.0;
    let a = match which {
        NahmSolution::PlusHalf => 6.0 / q,
        NahmSolution::MinusHalf => 2.0 / e2 * (e2 * e2 + e2 + 1.0) / q,
    };
    Ok((a, p_printed(y)))
}

/// The exact pullback coefficients `(2f̃, 2g̃)` at `t = e^{2y}/C`; these do not
/// depend on `C`.
pub fn true_pullback_profiles(which: NahmSolution, y: f64) -> Result<(f64, f64)> {
    check_y(y)?;
    let s = (2.0 * y).exp();
    let q = s * s + 4.0 * s + 1.0;
    let a = match which {
        NahmSolution::PlusHalf => 6.0 * s / q,
        NahmSolution::MinusHalf => 2.0 * (s * s + s + 1.0) / q,
    };
    Ok((a, 6.0 * s * (s + 1.0) / (q * (2.0 * y).exp_m1())))
}

/// Frame components of `Ψ*A` and `Ψ*φ` at `(y, ω)`, read off the 4D field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PulledBack {
    /// `a[b][a']`: the `t_{a'}` coefficient of `Ψ*A(ê_b)`.
    pub a: [[f64; 3]; 3],
    pub p: [[f64; 3]; 3],
    /// `|Ψ*A(∂_y)|` and `|Ψ*φ(∂_y)|`.
    pub a_radial: f64,
    pub p_radial: f64,
}

impl PulledBack {
    /// Diagonal means, i.e. the `Σ t_a e_a⋆` coefficients.
    pub fn coefficients(&self) -> (f64, f64) {
        let mean = |m: &[[f64; 3]; 3]| (m[0][0] + m[1][1] + m[2][2]) / 3.0;
        (mean(&self.a), mean(&self.p))
    }

    /// Largest deviation from `coefficient · identity`, plus the radial parts.
    pub fn off_frame(&self) -> f64 {
        let (ca, cp) = self.coefficients();
        let dev = |m: &[[f64; 3]; 3], c: f64| {
            (0..3)
                .flat_map(|b| (0..3).map(move |a| (b, a)))
                .map(|(b, a)| (m[b][a] - if a == b { c } else { 0.0 }).abs())
                .fold(0.0, f64::max)
        };
        dev(&self.a, ca).max(dev(&self.p, cp)).max(self.a_radial).max(self.p_radial)
    }
}

/// Evaluates the 4D field at `Ψ(y, ω)` and contracts with `dΨ` of the unit
/// frame `(∂_y, ê₁, ê₂, ê₃)` of [`right_frame`].
pub fn pulled_back_coefficients(which: NahmSolution, c: f64, y: f64, omega: Quaternion) -> Result<PulledBack> {
    check_y(y)?;
    let fr = right_frame(omega)?;
    let p = which.family(c).profile();
    let x = psi(c, y, omega);
    let r = x.norm();
    let a_form = eval_connection(&p, x)?;
    let phi_form = eval_higgs(&p, x)?;
    let t = su2_triple();
    let contract = |w: &crate::forms::Su2OneForm, v: Quaternion| {
        (0..4).fold(ImQuaternion::ZERO, |acc, j| acc + w.c[j] * v.coord(j))
    };
    let matrix = |w: &crate::forms::Su2OneForm| -> [[f64; 3]; 3] {
        std::array::from_fn(|b| {
            let v = contract(w, fr.e[b] * r);
            std::array::from_fn(|a| v.dot(t[a]) / t[a].norm_sq())
        })
    };
    // ∂_y maps to the radial vector x.
    Ok(PulledBack {
        a: matrix(&a_form),
        p: matrix(&phi_form),
        a_radial: contract(&a_form, x).norm(),
        p_radial: contract(&phi_form, x).norm(),
    })
}

/// `|y · p(y) − 1|` for the printed `p`.
pub fn nahm_pole_residual(which: NahmSolution, y: f64) -> Result<f64> {
    let (_, p) = pullback_profiles(which, y)?;
    Ok((y * p - 1.0).abs())
}

/// Least-squares slope of `ln v(y)` against `y` on `n` evenly spaced points.
pub fn decay_slope(v: impl Fn(f64) -> f64, y0: f64, y1: f64, n: usize) -> f64 {
    let ys: Vec<f64> = (0..n).map(|i| y0 + (y1 - y0) * i as f64 / (n - 1) as f64).collect();
    let ls: Vec<f64> = ys.iter().map(|&y| v(y).ln()).collect();
    let my = ys.iter().sum::<f64>() / n as f64;
    let ml = ls.iter().sum::<f64>() / n as f64;
    let sxy: f64 = ys.iter().zip(&ls).map(|(y, l)| (y - my) * (l - ml)).sum();
    let sxx: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    sxy / sxx
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CylinderInstanton {
    pub which: NahmSolution,
    /// `P(f̃(∞)) − P(f̃(1/C))`, `P(y) = 2y³ − 3y²`.
    pub k_boundary: f64,
    pub k_quadrature: f64,
    pub error_estimate: f64,
    pub quad: QuadResult,
}

/// `6 ∫_{1/C}^∞ f̃(f̃−1) f̃′ dt` for the underlying radial profile: the
/// instanton number on the image `|x|² ≥ 1/C` of `Ψ`, by conformal invariance.
pub fn cylinder_instanton(which: NahmSolution) -> CylinderInstanton {
    let c = 1.0;
    let fam = which.family(c);
    let p = fam.profile();
    let (_, y_inf) = fam.tilde_limits();
    let lo = 1.0 / c;
    let t_max = 1e7 / c;
    let mut integrand = |t: f64| {
        let y = p.f_tilde(t);
        6.0 * y * (y - 1.0) * p.f_tilde_prime(t)
    };
    let quad = integrate_breaks(&mut integrand, &log_panels(lo, t_max, 4), 1e-11, 20_000);
    let delta = p.f_tilde(t_max) - y_inf;
    let tail = (3.0 - 6.0 * y_inf) * delta * delta;
    let big_p = |y: f64| 2.0 * y * y * y - 3.0 * y * y;
    CylinderInstanton {
        which,
        k_boundary: big_p(y_inf) - big_p(p.f_tilde(lo)),
        k_quadrature: quad.value + tail,
        error_estimate: quad.error + 2.0 * delta.abs().powi(3),
        quad,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NahmRow {
    pub y: f64,
    pub a: f64,
    pub p: f64,
    pub y_p: f64,
}

pub fn nahm_table(which: NahmSolution, ys: &[f64]) -> Result<Vec<NahmRow>> {
    ys.iter()
        .map(|&y| {
            let (a, p) = pullback_profiles(which, y)?;
            Ok(NahmRow { y, a, p, y_p: y * p })
        })
        .collect()
}
