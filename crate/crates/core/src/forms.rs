//! Quaternion- and su(2)-valued differential forms at a point of R^4.
//!
//! Orientation is `dx1∧dx2∧dx3∧dx4 > 0`. Two-forms are stored on the six
//! ordered pairs `(1,2),(1,3),(1,4),(2,3),(2,4),(3,4)`. A three-form stores the
//! coefficient of `ν_i = ⋆_E dx_i`, so that `dx_i ∧ ν_i = dVol`.
//!
//! Wedge products multiply coefficients as quaternions, in order. With that
//! product `A∧A` and `φ∧φ` are exactly the Lie-algebra brackets that enter the
//! curvature, and `tr(F∧F)` is read off as `-Re` of the top-degree coefficient.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quat::{ImQuaternion, Quaternion};

/// Index pairs `(i, j)`, `i < j`, in storage order (0-based).
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Storage slot and sign of `dx_i ∧ dx_j`.
pub fn pair_slot(i: usize, j: usize) -> Option<(usize, f64)> {
    if i == j {
        return None;
    }
    let (a, b, sign) = if i < j { (i, j, 1.0) } else { (j, i, -1.0) };
    PAIRS.iter().position(|&p| p == (a, b)).map(|k| (k, sign))
}

/// Coefficient algebra for forms.
pub trait Coefficient:
    Copy
    + Default
    + fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Neg<Output = Self>
    + Mul<f64, Output = Self>
    + Into<Quaternion>
{
    fn magnitude_sq(self) -> f64 {
        let q: Quaternion = self.into();
        q.norm_sq()
    }
}

impl Coefficient for Quaternion {}
impl Coefficient for ImQuaternion {}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OneForm<T> {
    pub c: [T; 4],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TwoForm<T> {
    pub c: [T; 6],
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ThreeForm<T> {
    pub c: [T; 4],
}

pub type Su2OneForm = OneForm<ImQuaternion>;
pub type Su2TwoForm = TwoForm<ImQuaternion>;
pub type Su2ThreeForm = ThreeForm<ImQuaternion>;
pub type QOneForm = OneForm<Quaternion>;
pub type QTwoForm = TwoForm<Quaternion>;

macro_rules! linear_form {
    ($name:ident, $n:expr) => {
        impl<T: Coefficient> $name<T> {
            pub fn new(c: [T; $n]) -> Self {
                $name { c }
            }

            pub fn zero() -> Self {
                $name { c: [T::default(); $n] }
            }

            pub fn scale(&self, s: f64) -> Self {
                self.map(|v| v * s)
            }

            pub fn map<U: Coefficient>(&self, f: impl Fn(T) -> U) -> $name<U> {
                $name { c: std::array::from_fn(|k| f(self.c[k])) }
            }

            /// Sum of squared coefficient norms.
            pub fn norm_sq(&self) -> f64 {
                self.c.iter().map(|v| v.magnitude_sq()).sum()
            }

            pub fn norm(&self) -> f64 {
                self.norm_sq().sqrt()
            }

            pub fn to_quaternion(&self) -> $name<Quaternion> {
                self.map(|v| v.into())
            }
        }

        impl $name<Quaternion> {
            /// Projection onto the imaginary part of every coefficient.
            pub fn im(&self) -> $name<ImQuaternion> {
                self.map(|v| v.im())
            }

            /// Largest absolute real part among the coefficients.
            pub fn max_real_part(&self) -> f64 {
                self.c.iter().map(|v| v.w.abs()).fold(0.0, f64::max)
            }
        }

        impl<T: Coefficient> Add for $name<T> {
            type Output = Self;
            fn add(self, o: Self) -> Self {
                $name { c: std::array::from_fn(|k| self.c[k] + o.c[k]) }
            }
        }

        impl<T: Coefficient> Sub for $name<T> {
            type Output = Self;
            fn sub(self, o: Self) -> Self {
                $name { c: std::array::from_fn(|k| self.c[k] - o.c[k]) }
            }
        }

        impl<T: Coefficient> Neg for $name<T> {
            type Output = Self;
            fn neg(self) -> Self {
                self.map(|v| -v)
            }
        }

        impl<T: Coefficient> Mul<f64> for $name<T> {
            type Output = Self;
            fn mul(self, s: f64) -> Self {
                self.scale(s)
            }
        }
    };
}

linear_form!(OneForm, 4);
linear_form!(TwoForm, 6);
linear_form!(ThreeForm, 4);

impl<T: Coefficient> TwoForm<T> {
    /// Coefficient of `dx_i ∧ dx_j` for any ordered pair (zero on the diagonal).
    pub fn get(&self, i: usize, j: usize) -> T {
        match pair_slot(i, j) {
            Some((k, s)) => self.c[k] * s,
            None => T::default(),
        }
    }

    /// Euclidean Hodge star on two-forms.
    pub fn star(&self) -> Self {
        let c = &self.c;
        TwoForm { c: [c[5], -c[4], c[3], c[2], -c[1], c[0]] }
    }

    pub fn sd_part(&self) -> Self {
        (*self + self.star()) * 0.5
    }

    pub fn asd_part(&self) -> Self {
        (*self - self.star()) * 0.5
    }
}

impl Su2TwoForm {
    /// Pointwise inner product: sum over components of coefficient dot products.
    pub fn inner(&self, other: &Su2TwoForm) -> f64 {
        self.c.iter().zip(other.c.iter()).map(|(a, b)| a.dot(*b)).sum()
    }
}

/// Split into (self-dual, anti-self-dual) parts under the Euclidean star.
pub fn sd_asd_split<T: Coefficient>(w: &TwoForm<T>) -> (TwoForm<T>, TwoForm<T>) {
    (w.sd_part(), w.asd_part())
}

/// The self-dual basis forms `dx12+dx34`, `dx13+dx42`, `dx14+dx23` with coefficient `v`.
pub fn sd_basis(a: usize, v: ImQuaternion) -> Su2TwoForm {
    let mut w = Su2TwoForm::zero();
    match a {
        0 => {
            w.c[0] = v;
            w.c[5] = v;
        }
        1 => {
            w.c[1] = v;
            w.c[4] = -v;
        }
        2 => {
            w.c[2] = v;
            w.c[3] = v;
        }
        _ => panic!("self-dual basis index out of range"),
    }
    w
}

/// The anti-self-dual basis forms `dx12+dx43`, `dx13+dx24`, `dx14+dx32` with coefficient `v`.
pub fn asd_basis(a: usize, v: ImQuaternion) -> Su2TwoForm {
    let mut w = Su2TwoForm::zero();
    match a {
        0 => {
            w.c[0] = v;
            w.c[5] = -v;
        }
        1 => {
            w.c[1] = v;
            w.c[4] = v;
        }
        2 => {
            w.c[2] = v;
            w.c[3] = -v;
        }
        _ => panic!("anti-self-dual basis index out of range"),
    }
    w
}

/// `a ∧ b` with quaternion multiplication of coefficients:
/// component `(i,j)` is `a_i b_j - a_j b_i`.
pub fn wedge<A: Coefficient, B: Coefficient>(a: &OneForm<A>, b: &OneForm<B>) -> QTwoForm {
    TwoForm {
        c: PAIRS.map(|(i, j)| {
            let (ai, aj): (Quaternion, Quaternion) = (a.c[i].into(), a.c[j].into());
            let (bi, bj): (Quaternion, Quaternion) = (b.c[i].into(), b.c[j].into());
            ai * bj - aj * bi
        }),
    }
}

/// su(2)-valued wedge, projected to the imaginary part. For `a = b` this is
/// `A∧A = ½[A∧A]`, which is already imaginary.
pub fn wedge_one_one(a: &Su2OneForm, b: &Su2OneForm) -> Su2TwoForm {
    wedge(a, b).im()
}

/// Coefficient of `dx1∧dx2∧dx3∧dx4` in `a ∧ b` for two-forms.
pub fn wedge_two_two<A: Coefficient, B: Coefficient>(a: &TwoForm<A>, b: &TwoForm<B>) -> Quaternion {
    let a: [Quaternion; 6] = a.c.map(Into::into);
    let b: [Quaternion; 6] = b.c.map(Into::into);
    a[0] * b[5] + a[5] * b[0] - a[1] * b[4] - a[4] * b[1] + a[2] * b[3] + a[3] * b[2]
}

/// Coefficient of `dVol` in `tr(w1 ∧ w2)`.
///
/// The trace pairing is `tr(ab) = -Re(ab)`, which is the Euclidean inner
/// product on su(2). With it `tr(w∧w) = (|w⁺|² - |w⁻|²) dVol`, where `|·|²` is
/// [`TwoForm::norm_sq`]; this is the normalisation under which
/// `k = (1/4π²) ∫ tr(F∧F)` is an integer for the charge-one connection.
pub fn fourform_trace_density(w1: &Su2TwoForm, w2: &Su2TwoForm) -> f64 {
    -wedge_two_two(w1, w2).w
}

/// Coefficient of `dVol` in `a ∧ b` for a one-form and a three-form.
pub fn wedge_one_three<A: Coefficient, B: Coefficient>(a: &OneForm<A>, b: &ThreeForm<B>) -> Quaternion {
    (0..4).fold(Quaternion::ZERO, |acc, i| {
        let (ai, bi): (Quaternion, Quaternion) = (a.c[i].into(), b.c[i].into());
        acc + ai * bi
    })
}

/// Coefficient of `dVol` in `b ∧ a` for a three-form and a one-form (`ν_i ∧ dx_i = -dVol`).
pub fn wedge_three_one<A: Coefficient, B: Coefficient>(b: &ThreeForm<B>, a: &OneForm<A>) -> Quaternion {
    (0..4).fold(Quaternion::ZERO, |acc, i| {
        let (ai, bi): (Quaternion, Quaternion) = (a.c[i].into(), b.c[i].into());
        acc - bi * ai
    })
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Rotationally invariant conformal factor `h(t)`, `t = |x|²`.
///
/// The Hodge star on one-forms is `⋆dx_i = h(t)² ⋆_E dx_i`, i.e. the star of the
/// conformally flat metric `h² δ`.
#[derive(Clone)]
pub struct Metric {
    name: &'static str,
    h: ScalarFn,
    dh: ScalarFn,
}

impl fmt::Debug for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Metric").field("name", &self.name).finish()
    }
}

impl Metric {
    pub fn new(
        name: &'static str,
        h: impl Fn(f64) -> f64 + Send + Sync + 'static,
        dh: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Metric { name, h: Arc::new(h), dh: Arc::new(dh) }
    }

    pub fn euclidean() -> Self {
        Metric::new("euclidean", |_| 1.0, |_| 0.0)
    }

    /// `h = 2/(1+t)`, so `h² dx⊗dx̄ = 4/(1+t)² dx⊗dx̄` is the round metric.
    pub fn round() -> Self {
        Metric::new("round", |t| 2.0 / (1.0 + t), |t| -2.0 / ((1.0 + t) * (1.0 + t)))
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn h(&self, t: f64) -> f64 {
        (self.h)(t)
    }

    pub fn dh(&self, t: f64) -> f64 {
        (self.dh)(t)
    }

    /// Factor `h(t)²` multiplying the Euclidean star on one-forms.
    pub fn star_factor(&self, t: f64) -> f64 {
        let h = self.h(t);
        h * h
    }

    /// `∂_j (h(|x|²)²)` at `x`.
    pub fn star_factor_gradient(&self, x: Quaternion) -> [f64; 4] {
        let t = x.norm_sq();
        let d = 2.0 * self.h(t) * self.dh(t);
        std::array::from_fn(|j| d * 2.0 * x.coord(j))
    }
}

pub fn hodge_star_1<T: Coefficient>(w: &OneForm<T>, m: &Metric, t: f64) -> ThreeForm<T> {
    let s = m.star_factor(t);
    ThreeForm { c: w.c.map(|v| v * s) }
}

/// Star on three-forms; `⋆⋆ = -1` on one-forms in four Riemannian dimensions.
pub fn hodge_star_3<T: Coefficient>(w: &ThreeForm<T>, m: &Metric, t: f64) -> OneForm<T> {
    let s = m.star_factor(t);
    OneForm { c: w.c.map(|v| -(v * (1.0 / s))) }
}

/// Quaternion-valued one-form `x̄ dx` at `x`: component `i` is `x̄ e_i`.
pub fn xbar_dx(x: Quaternion) -> QOneForm {
    OneForm { c: std::array::from_fn(|i| x.conj() * Quaternion::basis(i)) }
}

/// `dx̄ x`: component `i` is `ē_i x`.
pub fn dxbar_x(x: Quaternion) -> QOneForm {
    OneForm { c: std::array::from_fn(|i| Quaternion::basis(i).conj() * x) }
}

/// `x dx̄`: component `i` is `x ē_i`.
pub fn x_dxbar(x: Quaternion) -> QOneForm {
    OneForm { c: std::array::from_fn(|i| x * Quaternion::basis(i).conj()) }
}

pub fn dx() -> QOneForm {
    OneForm { c: std::array::from_fn(Quaternion::basis) }
}

pub fn dxbar() -> QOneForm {
    OneForm { c: std::array::from_fn(|i| Quaternion::basis(i).conj()) }
}

/// A one-form together with its first partial derivatives at a point:
/// `partials[j]` is `∂_j` of the form.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OneFormJet<T> {
    pub value: OneForm<T>,
    pub partials: [OneForm<T>; 4],
}

pub type Su2OneFormJet = OneFormJet<ImQuaternion>;

impl<T: Coefficient> OneFormJet<T> {
    pub fn constant(value: OneForm<T>) -> Self {
        OneFormJet { value, partials: [OneForm::zero(); 4] }
    }

    /// `d` of the form: component `(i,j)` is `∂_i w_j - ∂_j w_i`.
    pub fn exterior_derivative(&self) -> TwoForm<T> {
        TwoForm { c: PAIRS.map(|(i, j)| self.partials[i].c[j] - self.partials[j].c[i]) }
    }

    /// `Σ_i ∂_i w_i`, i.e. the `dVol` coefficient of `d ⋆_E w`.
    pub fn divergence(&self) -> T {
        (0..4).fold(T::default(), |acc, i| acc + self.partials[i].c[i])
    }

    pub fn scale(&self, s: f64) -> Self {
        OneFormJet { value: self.value.scale(s), partials: self.partials.map(|p| p.scale(s)) }
    }
}

/// A three-form with first partials, enough to take its exterior derivative.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThreeFormJet<T> {
    pub value: ThreeForm<T>,
    pub partials: [ThreeForm<T>; 4],
}

impl<T: Coefficient> ThreeFormJet<T> {
    /// `dVol` coefficient of `d(Σ ψ_i ν_i) = Σ ∂_i ψ_i dVol`.
    pub fn exterior_derivative(&self) -> T {
        (0..4).fold(T::default(), |acc, i| acc + self.partials[i].c[i])
    }
}

/// `⋆w` together with its partials, by the product rule in `h(|x|²)²`.
pub fn hodge_star_1_jet<T: Coefficient>(w: &OneFormJet<T>, m: &Metric, x: Quaternion) -> ThreeFormJet<T> {
    let t = x.norm_sq();
    let s = m.star_factor(t);
    let ds = m.star_factor_gradient(x);
    ThreeFormJet {
        value: ThreeForm { c: w.value.c.map(|v| v * s) },
        partials: std::array::from_fn(|j| ThreeForm {
            c: std::array::from_fn(|i| w.partials[j].c[i] * s + w.value.c[i] * ds[j]),
        }),
    }
}

/// `F_A = dA + A∧A`.
pub fn curvature(a: &Su2OneFormJet) -> Su2TwoForm {
    a.exterior_derivative() + wedge_one_one(&a.value, &a.value)
}

/// `d_A φ = dφ + A∧φ + φ∧A`.
pub fn covariant_derivative(a: &Su2OneForm, phi: &Su2OneFormJet) -> Su2TwoForm {
    phi.exterior_derivative() + (wedge(a, &phi.value) + wedge(&phi.value, a)).im()
}

/// `dVol` coefficient of `d_A ⋆φ = d⋆φ + A∧⋆φ + ⋆φ∧A` for the metric `m`.
pub fn covariant_codifferential(a: &Su2OneForm, phi: &Su2OneFormJet, m: &Metric, x: Quaternion) -> Quaternion {
    let star_phi = hodge_star_1_jet(phi, m, x);
    let d_star: Quaternion = star_phi.exterior_derivative().into();
    d_star + wedge_one_three(a, &star_phi.value) + wedge_three_one(&star_phi.value, a)
}

/// `F − φ∧φ − ⋆d_Aφ` with the Euclidean star.
pub fn kw_first_equation(f: &Su2TwoForm, pp: &Su2TwoForm, dap: &Su2TwoForm) -> Su2TwoForm {
    *f - *pp - dap.star()
}

/// The twisted equations at parameter `λ`:
/// `(F − φ∧φ + λ d_Aφ)⁺ + (F − φ∧φ − λ⁻¹ d_Aφ)⁻`, and `(F − φ∧φ)⁺ + (d_Aφ)⁻` at `λ = 0`.
///
/// At `λ = −1` this is exactly [`kw_first_equation`].
pub fn twisted_residual(f: &Su2TwoForm, pp: &Su2TwoForm, dap: &Su2TwoForm, lambda: f64) -> Su2TwoForm {
    let base = *f - *pp;
    if lambda == 0.0 {
        return base.sd_part() + dap.asd_part();
    }
    (base + *dap * lambda).sd_part() + (base - *dap * (1.0 / lambda)).asd_part()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rand_im(seed: &mut u64) -> ImQuaternion {
        let mut next = || {
            *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        ImQuaternion::new(next(), next(), next())
    }

    fn rand_two_form(seed: &mut u64) -> Su2TwoForm {
        TwoForm { c: std::array::from_fn(|_| rand_im(seed)) }
    }

    #[test]
    fn wedge_of_zero_is_zero() {
        let b = Su2OneForm::new([ImQuaternion::I, ImQuaternion::J, ImQuaternion::K, ImQuaternion::I]);
        assert_eq!(wedge_one_one(&Su2OneForm::zero(), &b), Su2TwoForm::zero());
    }

    #[test]
    fn dx_wedge_dxbar_matches_closed_form() {
        let w = wedge(&dx(), &dxbar());
        let expected = (sd_basis(0, ImQuaternion::I) + sd_basis(1, ImQuaternion::J) + sd_basis(2, ImQuaternion::K))
            .scale(-2.0)
            .to_quaternion();
        assert_eq!(w, expected);
        let w = wedge(&dxbar(), &dx());
        let expected = (asd_basis(0, ImQuaternion::I) + asd_basis(1, ImQuaternion::J) + asd_basis(2, ImQuaternion::K))
            .scale(2.0)
            .to_quaternion();
        assert_eq!(w, expected);
    }

    #[test]
    fn dx_wedge_dxbar_is_self_dual() {
        let w = wedge(&dx(), &dxbar()).im();
        let (sd, asd) = sd_asd_split(&w);
        assert_eq!(sd, w);
        assert_eq!(asd.norm(), 0.0);
        let w = wedge(&dxbar(), &dx()).im();
        let (sd, asd) = sd_asd_split(&w);
        assert_eq!(sd.norm(), 0.0);
        assert_eq!(asd, w);
    }

    #[test]
    fn self_dual_basis_split() {
        for a in 0..3 {
            let w = sd_basis(a, ImQuaternion::I);
            let (sd, asd) = sd_asd_split(&w);
            assert_eq!(sd, w);
            assert_eq!(asd, Su2TwoForm::zero());
            let v = asd_basis(a, ImQuaternion::K);
            let (sd, asd) = sd_asd_split(&v);
            assert_eq!(sd, Su2TwoForm::zero());
            assert_eq!(asd, v);
        }
    }

    #[test]
    fn split_is_orthogonal_and_idempotent() {
        let mut seed = 17;
        for _ in 0..100 {
            let w = rand_two_form(&mut seed);
            let (sd, asd) = sd_asd_split(&w);
            assert!((sd + asd - w).norm() < 1e-15);
            assert!(sd.inner(&asd).abs() < 1e-14);
            assert!((sd.star() - sd).norm() < 1e-15);
            assert!((asd.star() + asd).norm() < 1e-15);
            let (sd2, asd2) = sd_asd_split(&sd);
            assert!((sd2 - sd).norm() < 1e-14 && asd2.norm() < 1e-14);
        }
    }

    #[test]
    fn star_squares_to_identity_on_two_forms() {
        let mut seed = 5;
        let w = rand_two_form(&mut seed);
        assert_eq!(w.star().star(), w);
    }

    #[test]
    fn wedge_at_one_plus_i_matches_hand_expansion() {
        // a = Im(x̄ dx) at x = 1 + I has components Im(x̄ e_i):
        // x̄ = 1 - I, so x̄·1 = 1 - I, x̄·I = I + 1, x̄·J = J - K, x̄·K = K + J.
        let x = Quaternion::new(1.0, 1.0, 0.0, 0.0);
        let a = xbar_dx(x).im();
        assert_eq!(a.c[0], ImQuaternion::new(-1.0, 0.0, 0.0));
        assert_eq!(a.c[1], ImQuaternion::new(1.0, 0.0, 0.0));
        assert_eq!(a.c[2], ImQuaternion::new(0.0, 1.0, -1.0));
        assert_eq!(a.c[3], ImQuaternion::new(0.0, 1.0, 1.0));
        let w = wedge_one_one(&a, &a);
        // Identity: Im(x̄dx∧x̄dx) = -½|x|² dx̄∧dx - ½ x̄dx∧dx̄x, here |x|² = 2.
        let rhs = (wedge(&dxbar(), &dx()).scale(-1.0) - wedge(&xbar_dx(x), &dxbar_x(x)).scale(0.5)).im();
        assert!((w - rhs).norm() < 1e-14);
        // (1,2): [-I, I] = 0; (3,4): (J - K)(J + K) - (J + K)(J - K) = 4I.
        assert_eq!(w.c[0], ImQuaternion::ZERO);
        assert_eq!(w.c[5], ImQuaternion::new(4.0, 0.0, 0.0));
    }

    #[test]
    fn wedge_of_im_xbar_dx_is_imaginary() {
        let x = Quaternion::new(0.3, -1.1, 0.8, 2.0);
        let a = xbar_dx(x).im();
        assert_eq!(wedge(&a, &a).max_real_part(), 0.0);
        // and agrees with Im(x̄dx∧x̄dx)
        let full = wedge(&xbar_dx(x), &xbar_dx(x)).im();
        assert!((wedge_one_one(&a, &a) - full).norm() < 1e-13);
    }

    fn sample_point(seed: &mut u64) -> Quaternion {
        let a = rand_im(seed);
        let b = rand_im(seed);
        Quaternion::new(a.x * 2.0, a.y * 2.0, a.z * 2.0, b.x * 2.0)
    }

    #[test]
    fn quaternion_square_identity_at_random_points() {
        let mut seed = 99;
        for _ in 0..100 {
            let x = sample_point(&mut seed);
            let t = x.norm_sq();
            let lhs = wedge(&xbar_dx(x), &xbar_dx(x)).im().to_quaternion()
                + wedge(&dxbar(), &dx()).scale(0.5 * t)
                + wedge(&xbar_dx(x), &dxbar_x(x)).scale(0.5);
            let scale = 1.0 + t;
            assert!(lhs.norm() < 1e-12 * scale, "residual {}", lhs.norm());
        }
    }

    #[test]
    fn top_degree_identities() {
        let mut seed = 3;
        for _ in 0..100 {
            let x = sample_point(&mut seed);
            let t = x.norm_sq();
            let w = wedge(&xbar_dx(x), &dxbar_x(x)).im();
            let d = fourform_trace_density(&w, &w);
            assert!((d - 24.0 * t * t).abs() < 1e-12 * (24.0 * t * t).max(1.0));
        }
        let v = wedge(&dxbar(), &dx()).im();
        assert_eq!(fourform_trace_density(&v, &v), -24.0);
    }

    #[test]
    fn trace_density_examples() {
        assert_eq!(fourform_trace_density(&Su2TwoForm::zero(), &Su2TwoForm::zero()), 0.0);
        let w = sd_basis(0, ImQuaternion::I);
        assert_eq!(fourform_trace_density(&w, &w), 2.0);
        let mut seed = 8;
        for _ in 0..50 {
            let w = rand_two_form(&mut seed);
            let (sd, asd) = sd_asd_split(&w);
            let d = fourform_trace_density(&w, &w);
            assert!((d - (sd.norm_sq() - asd.norm_sq())).abs() < 1e-13);
        }
    }

    #[test]
    fn hodge_star_one_forms() {
        let e1 = Su2OneForm::new([ImQuaternion::I, ImQuaternion::ZERO, ImQuaternion::ZERO, ImQuaternion::ZERO]);
        let s = hodge_star_1(&e1, &Metric::euclidean(), 0.3);
        assert_eq!(s.c[0], ImQuaternion::I);
        // round metric at t = 1: h² = 1
        let s = hodge_star_1(&e1, &Metric::round(), 1.0);
        assert_eq!(s.c[0], ImQuaternion::I);
        let s = hodge_star_1(&e1, &Metric::round(), 3.0);
        assert!((s.c[0].x - 0.25).abs() < 1e-16);
        // dx_i ∧ ⋆dx_i = dVol for the Euclidean metric
        for i in 0..4 {
            let mut w = QOneForm::zero();
            w.c[i] = Quaternion::ONE;
            let st = hodge_star_1(&w, &Metric::euclidean(), 0.0);
            assert_eq!(wedge_one_three(&w, &st), Quaternion::ONE);
        }
    }

    #[test]
    fn star_star_is_minus_identity_on_one_forms() {
        let mut seed = 11;
        let w = Su2OneForm::new(std::array::from_fn(|_| rand_im(&mut seed)));
        for m in [Metric::euclidean(), Metric::round()] {
            let back = hodge_star_3(&hodge_star_1(&w, &m, 0.7), &m, 0.7);
            assert!((back + w).norm() < 1e-15);
        }
    }

    #[test]
    fn exterior_derivative_of_linear_form() {
        // w = x_1 dx_2 I has dw = dx1∧dx2 I
        let mut jet = Su2OneFormJet::default();
        jet.partials[0].c[1] = ImQuaternion::I;
        let d = jet.exterior_derivative();
        assert_eq!(d.get(0, 1), ImQuaternion::I);
        assert_eq!(d.get(1, 0), -ImQuaternion::I);
        assert_eq!(d.norm_sq(), 1.0);
    }

    #[test]
    fn constant_connection_curvature_is_bracket_only() {
        let a = Su2OneForm::new([ImQuaternion::I, ImQuaternion::J, ImQuaternion::ZERO, ImQuaternion::ZERO]);
        let f = curvature(&OneFormJet::constant(a));
        assert_eq!(f.get(0, 1), ImQuaternion::new(0.0, 0.0, 2.0));
        assert_eq!(f.norm_sq(), 4.0);
    }

    #[test]
    fn twisted_residual_at_minus_one_is_kw() {
        let mut seed = 21;
        let (f, pp, dap) = (rand_two_form(&mut seed), rand_two_form(&mut seed), rand_two_form(&mut seed));
        let a = twisted_residual(&f, &pp, &dap, -1.0);
        let b = kw_first_equation(&f, &pp, &dap);
        assert!((a - b).norm() < 1e-15);
    }

    #[test]
    fn forms_serialize_as_nested_arrays() {
        let w = Su2OneForm::new([ImQuaternion::I, ImQuaternion::ZERO, ImQuaternion::J, ImQuaternion::K]);
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, "[[1.0,0.0,0.0],[0.0,0.0,0.0],[0.0,1.0,0.0],[0.0,0.0,1.0]]");
    }

    proptest! {
        #[test]
        fn wedge_is_antisymmetric_for_commuting_scalars(a in prop::array::uniform4(-3.0f64..3.0), b in prop::array::uniform4(-3.0f64..3.0)) {
            let fa = QOneForm::new(a.map(Quaternion::real));
            let fb = QOneForm::new(b.map(Quaternion::real));
            let d = wedge(&fa, &fb) + wedge(&fb, &fa);
            prop_assert!(d.norm() < 1e-12);
        }
    }
}
