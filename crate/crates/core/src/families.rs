//! Catalog of closed-form radial solutions.
//!
//! With `D(t) = C²t² + 4Ct + 1` the two `λ = −1` families share the Higgs
//! profile `g = 3C(Ct+1) / (D (Ct−1))`, which has a simple pole on the sphere
//! `t = 1/C`:
//!
//! * `F1`: `f = 3C / D`, so `f̃ = tf` runs from 0 back to 0;
//! * `F2`: `f = (C²t² + Ct + 1) / (tD)`, so `f̃` runs from 1 back to 1;
//! * `GluedPlus`: `F1` inside the sphere and `F2` outside. The two branches meet
//!   with matching value `f̃ = ½` and matching first derivative.
//!
//! `ConjGluedMinus` is the same glued profile on the conjugate ansatz
//! `Im(f x dx̄)`. `x ↦ x̄` reverses orientation, so the Higgs field changes sign
//! and the reduced equations it satisfies are those at `λ = +1`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{KwError, Result};
use crate::forms::Su2OneForm;
use crate::quat::Quaternion;
use crate::radial::{check_poles, Ansatz, RadialProfile};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum SolutionFamily {
    F1 { c: f64 },
    F2 { c: f64 },
    GluedPlus { c: f64 },
    ConjGluedMinus { c: f64 },
    THooft,
    AltAsd,
    TanFamily { c: f64 },
}

/// CLI tags, in catalog order.
pub const FAMILY_TAGS: [&str; 7] = ["f1", "f2", "glued_plus", "conj_glued_minus", "thooft", "alt_asd", "tan"];

impl SolutionFamily {
    /// Builds a family from its tag; `c` is ignored by the parameter-free families.
    pub fn from_tag(tag: &str, c: f64) -> Result<Self> {
        let fam = match tag {
            "f1" => SolutionFamily::F1 { c },
            "f2" => SolutionFamily::F2 { c },
            "glued_plus" | "glued" => SolutionFamily::GluedPlus { c },
            "conj_glued_minus" => SolutionFamily::ConjGluedMinus { c },
            "thooft" => SolutionFamily::THooft,
            "alt_asd" | "alt" => SolutionFamily::AltAsd,
            "tan" => SolutionFamily::TanFamily { c },
            other => return Err(KwError::InvalidParameter(format!("unknown family '{other}'"))),
        };
        fam.validate()?;
        Ok(fam)
    }

    pub fn tag(&self) -> &'static str {
        match self {
            SolutionFamily::F1 { .. } => "f1",
            SolutionFamily::F2 { .. } => "f2",
            SolutionFamily::GluedPlus { .. } => "glued_plus",
            SolutionFamily::ConjGluedMinus { .. } => "conj_glued_minus",
            SolutionFamily::THooft => "thooft",
            SolutionFamily::AltAsd => "alt_asd",
            SolutionFamily::TanFamily { .. } => "tan",
        }
    }

    /// The parameter `C` (zero for parameter-free families).
    pub fn c(&self) -> f64 {
        match *self {
            SolutionFamily::F1 { c }
            | SolutionFamily::F2 { c }
            | SolutionFamily::GluedPlus { c }
            | SolutionFamily::ConjGluedMinus { c }
            | SolutionFamily::TanFamily { c } => c,
            SolutionFamily::THooft | SolutionFamily::AltAsd => 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.c();
        if !c.is_finite() {
            return Err(KwError::InvalidParameter(format!("C must be finite, got {c}")));
        }
        if matches!(self, SolutionFamily::GluedPlus { .. } | SolutionFamily::ConjGluedMinus { .. }) && c <= 0.0 {
            return Err(KwError::InvalidParameter(format!("glued families need C > 0, got {c}")));
        }
        Ok(())
    }

    pub fn profile(&self) -> FamilyProfile {
        FamilyProfile { family: *self }
    }

    pub fn ansatz(&self) -> Ansatz {
        match self {
            SolutionFamily::ConjGluedMinus { .. } => Ansatz::XDxbar,
            _ => Ansatz::XbarDx,
        }
    }

    /// The `λ` whose reduced equations the stored `(f, g)` satisfy.
    pub fn governing_lambda(&self) -> f64 {
        match self {
            SolutionFamily::THooft | SolutionFamily::AltAsd => 0.0,
            SolutionFamily::ConjGluedMinus { .. } => 1.0,
            _ => -1.0,
        }
    }

    /// Exact limits `(f̃(0⁺), f̃(∞))`.
    pub fn tilde_limits(&self) -> (f64, f64) {
        match self {
            SolutionFamily::F1 { .. } => (0.0, 0.0),
            SolutionFamily::F2 { .. } => (1.0, 1.0),
            SolutionFamily::GluedPlus { .. } | SolutionFamily::ConjGluedMinus { .. } | SolutionFamily::THooft => {
                (0.0, 1.0)
            }
            SolutionFamily::AltAsd => (1.0, 0.0),
            SolutionFamily::TanFamily { .. } => (0.5, 0.5),
        }
    }

    /// The smooth catalog members (everything except the tan family).
    pub fn is_smooth_catalog(&self) -> bool {
        !matches!(self, SolutionFamily::TanFamily { .. })
    }
}

impl fmt::Display for SolutionFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionFamily::THooft | SolutionFamily::AltAsd => write!(f, "{}", self.tag()),
            _ => write!(f, "{}(C={})", self.tag(), self.c()),
        }
    }
}

impl FromStr for SolutionFamily {
    type Err = KwError;

    /// Parses `tag` or `tag:C`, e.g. `f1:2`.
    fn from_str(s: &str) -> Result<Self> {
        let (tag, c) = match s.split_once(':') {
            Some((tag, c)) => {
                let c = c.parse::<f64>().map_err(|e| KwError::InvalidParameter(format!("bad C '{c}': {e}")))?;
                (tag, c)
            }
            None => (s, 1.0),
        };
        SolutionFamily::from_tag(tag, c)
    }
}

fn d(c: f64, t: f64) -> f64 {
    c * c * t * t + 4.0 * c * t + 1.0
}

fn dd(c: f64, t: f64) -> f64 {
    2.0 * c * c * t + 4.0 * c
}

fn f1(c: f64, t: f64) -> f64 {
    3.0 * c / d(c, t)
}

fn df1(c: f64, t: f64) -> f64 {
    let dv = d(c, t);
    -3.0 * c * dd(c, t) / (dv * dv)
}

fn f2(c: f64, t: f64) -> f64 {
    (c * c * t * t + c * t + 1.0) / (t * d(c, t))
}

fn df2(c: f64, t: f64) -> f64 {
    let m = c * c * t * t + c * t + 1.0;
    let dm = 2.0 * c * c * t + c;
    let q = t * d(c, t);
    let dq = d(c, t) + t * dd(c, t);
    (dm * q - m * dq) / (q * q)
}

fn g_shared(c: f64, t: f64) -> f64 {
    3.0 * c * (c * t + 1.0) / (d(c, t) * (c * t - 1.0))
}

fn dg_shared(c: f64, t: f64) -> f64 {
    let n = 3.0 * c * (c * t + 1.0);
    let dn = 3.0 * c * c;
    let q = d(c, t) * (c * t - 1.0);
    let dq = dd(c, t) * (c * t - 1.0) + c * d(c, t);
    (dn * q - n * dq) / (q * q)
}

/// `f̃` of the two branches as functions of `s = Ct`; both equal ½ at `s = 1`.
fn f1_tilde_s(s: f64) -> f64 {
    3.0 * s / (s * s + 4.0 * s + 1.0)
}

fn f2_tilde_s(s: f64) -> f64 {
    (s * s + s + 1.0) / (s * s + 4.0 * s + 1.0)
}

/// Positive roots of `D(t)`, i.e. poles of `f₁` for `C < 0`.
fn d_roots(c: f64) -> Vec<f64> {
    if c >= 0.0 {
        return Vec::new();
    }
    let r = 3f64.sqrt();
    vec![(-2.0 + r) / c, (-2.0 - r) / c]
}

/// Poles `t_n = exp(2(C − π/2 − nπ))` of the tan family that are representable.
pub fn tan_poles(c: f64) -> Vec<f64> {
    let mut v = Vec::new();
    let base = 2.0 * (c - FRAC_PI_2);
    let n_min = ((base - 700.0) / (2.0 * PI)).floor() as i64;
    let n_max = ((base + 700.0) / (2.0 * PI)).ceil() as i64;
    for n in n_min..=n_max {
        let ln_t = base - 2.0 * PI * n as f64;
        if ln_t.abs() <= 700.0 {
            v.push(ln_t.exp());
        }
    }
    v.sort_by(f64::total_cmp);
    v
}

/// The `(f, g)` profile of a catalog member.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyProfile {
    pub family: SolutionFamily,
}

impl FamilyProfile {
    fn glued_inside(c: f64, t: f64) -> bool {
        c * t <= 1.0
    }

    fn higgs_sign(&self) -> f64 {
        match self.family {
            SolutionFamily::ConjGluedMinus { .. } => -1.0,
            _ => 1.0,
        }
    }
}

impl RadialProfile for FamilyProfile {
    fn f(&self, t: f64) -> f64 {
        use SolutionFamily::*;
        match self.family {
            F1 { c } => f1(c, t),
            F2 { c } => f2(c, t),
            GluedPlus { c } | ConjGluedMinus { c } => {
                if Self::glued_inside(c, t) {
                    f1(c, t)
                } else {
                    f2(c, t)
                }
            }
            THooft => 1.0 / (1.0 + t),
            AltAsd => -1.0 / (t * (t * t - 1.0)),
            TanFamily { .. } => 0.5 / t,
        }
    }

    fn df(&self, t: f64) -> f64 {
        use SolutionFamily::*;
        match self.family {
            F1 { c } => df1(c, t),
            F2 { c } => df2(c, t),
            GluedPlus { c } | ConjGluedMinus { c } => {
                if Self::glued_inside(c, t) {
                    df1(c, t)
                } else {
                    df2(c, t)
                }
            }
            THooft => -1.0 / ((1.0 + t) * (1.0 + t)),
            AltAsd => {
                let q = t * t - 1.0;
                (3.0 * t * t - 1.0) / (t * t * q * q)
            }
            TanFamily { .. } => -0.5 / (t * t),
        }
    }

    fn g(&self, t: f64) -> f64 {
        use SolutionFamily::*;
        match self.family {
            F1 { c } | F2 { c } | GluedPlus { c } => g_shared(c, t),
            ConjGluedMinus { c } => self.higgs_sign() * g_shared(c, t),
            THooft => 0.0,
            AltAsd => 3f64.sqrt() / (t * t - 1.0),
            TanFamily { c } => (-0.5 * t.ln() + c).tan() / (2.0 * t),
        }
    }

    fn dg(&self, t: f64) -> f64 {
        use SolutionFamily::*;
        match self.family {
            F1 { c } | F2 { c } | GluedPlus { c } => dg_shared(c, t),
            ConjGluedMinus { c } => self.higgs_sign() * dg_shared(c, t),
            THooft => 0.0,
            AltAsd => {
                let q = t * t - 1.0;
                -2.0 * 3f64.sqrt() * t / (q * q)
            }
            TanFamily { c } => {
                let th = -0.5 * t.ln() + c;
                let sec2 = 1.0 / (th.cos() * th.cos());
                (-sec2 - 2.0 * th.tan()) / (4.0 * t * t)
            }
        }
    }

    fn f_poles(&self) -> Vec<f64> {
        use SolutionFamily::*;
        match self.family {
            F1 { c } => d_roots(c),
            F2 { c } => {
                let mut v = vec![0.0];
                v.extend(d_roots(c));
                v
            }
            GluedPlus { .. } | ConjGluedMinus { .. } | THooft => Vec::new(),
            AltAsd => vec![0.0, 1.0],
            TanFamily { .. } => vec![0.0],
        }
    }

    fn g_poles(&self) -> Vec<f64> {
        use SolutionFamily::*;
        match self.family {
            F1 { c } | F2 { c } | GluedPlus { c } | ConjGluedMinus { c } => {
                let mut v = d_roots(c);
                if c > 0.0 {
                    v.push(1.0 / c);
                }
                v
            }
            THooft => Vec::new(),
            AltAsd => vec![1.0],
            TanFamily { c } => {
                let mut v = vec![0.0];
                v.extend(tan_poles(c));
                v
            }
        }
    }

    fn kinks(&self) -> Vec<f64> {
        match self.family {
            SolutionFamily::GluedPlus { c } | SolutionFamily::ConjGluedMinus { c } => vec![1.0 / c],
            _ => Vec::new(),
        }
    }

    fn f_tilde(&self, t: f64) -> f64 {
        use SolutionFamily::*;
        match self.family {
            F1 { c } => f1_tilde_s(c * t),
            F2 { c } => f2_tilde_s(c * t),
            GluedPlus { c } | ConjGluedMinus { c } => {
                let s = c * t;
                if s <= 1.0 {
                    f1_tilde_s(s)
                } else {
                    f2_tilde_s(s)
                }
            }
            THooft => t / (1.0 + t),
            AltAsd => -1.0 / (t * t - 1.0),
            TanFamily { .. } => 0.5,
        }
    }

    fn f_tilde_prime(&self, t: f64) -> f64 {
        use SolutionFamily::*;
        let branch_prime = |c: f64, s: f64, inside: bool| {
            // d/dt f̃(Ct) = C · d/ds; both branches have numerator ±3(1 − s²).
            let q = s * s + 4.0 * s + 1.0;
            let sign = if inside { 1.0 } else { -1.0 };
            c * sign * 3.0 * (1.0 - s * s) / (q * q)
        };
        match self.family {
            F1 { c } => branch_prime(c, c * t, true),
            F2 { c } => branch_prime(c, c * t, false),
            GluedPlus { c } | ConjGluedMinus { c } => branch_prime(c, c * t, c * t <= 1.0),
            THooft => 1.0 / ((1.0 + t) * (1.0 + t)),
            AltAsd => {
                let q = t * t - 1.0;
                2.0 * t / (q * q)
            }
            TanFamily { .. } => 0.0,
        }
    }

    fn g_tilde(&self, t: f64) -> f64 {
        t * self.g(t)
    }
}

/// Convenience: `(f, g)` at `t`, rejecting the singular locus.
pub fn eval_profile(fam: &SolutionFamily, t: f64) -> Result<(f64, f64)> {
    let p = fam.profile();
    check_poles(&p.singular_t(), t)?;
    Ok((p.f(t), p.g(t)))
}

/// `(jump of f̃ at t = 1/C, jump of the one-sided difference quotients of u = f̃ − ½)`.
pub fn glued_u_c1_check(c: f64, h: f64) -> Result<(f64, f64)> {
    if !(c > 0.0) || !(h > 0.0) || h >= 0.5 / c {
        return Err(KwError::InvalidParameter(format!("need C > 0 and 0 < h < 1/(2C), got C = {c}, h = {h}")));
    }
    let t0 = 1.0 / c;
    let s0 = c * t0;
    let value_jump = f1_tilde_s(s0) - f2_tilde_s(s0);
    let u = |t: f64| SolutionFamily::GluedPlus { c }.profile().f_tilde(t) - 0.5;
    let u0 = f1_tilde_s(s0) - 0.5;
    let left = (u0 - u(t0 - h)) / h;
    let right = (u(t0 + h) - u0) / h;
    Ok((value_jump, right - left))
}

/// The conjugate-ansatz connection `Im(f(t) x dx̄)` of a family.
pub fn conjugate_form(fam: &SolutionFamily, x: Quaternion) -> Result<Su2OneForm> {
    let p = fam.profile();
    let t = x.norm_sq();
    check_poles(&p.f_poles(), t)?;
    Ok(Ansatz::XDxbar.one_form(p.f(t), x))
}

/// Smooth catalog members used by sweeps: the three `λ = −1` families at each
/// `C` in `cs`, the conjugate glued solution, and the two `λ = 0` solutions.
pub fn catalog(cs: &[f64]) -> Vec<SolutionFamily> {
    let mut v = Vec::new();
    for &c in cs {
        v.push(SolutionFamily::F1 { c });
        v.push(SolutionFamily::F2 { c });
        v.push(SolutionFamily::GluedPlus { c });
    }
    v.push(SolutionFamily::ConjGluedMinus { c: 1.0 });
    v.push(SolutionFamily::THooft);
    v.push(SolutionFamily::AltAsd);
    v
}
