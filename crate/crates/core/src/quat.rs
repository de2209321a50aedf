//! Quaternions and imaginary quaternions.
//!
//! Points of R^4 are identified with `w + xI + yJ + zK`; su(2) is identified
//! with the imaginary quaternions. Coefficients are always stored in
//! `(1, I, J, K)` order, which is also the JSON array order.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// A real quaternion `w + xI + yJ + zK`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// An imaginary quaternion `xI + yJ + zK`, i.e. an element of su(2).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct ImQuaternion {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion::new(w, 0.0, 0.0, 0.0)
    }

    /// The coordinate basis `e_0 = 1, e_1 = I, e_2 = J, e_3 = K` of R^4.
    pub const fn basis(i: usize) -> Self {
        match i {
            0 => Self::ONE,
            1 => Self::I,
            2 => Self::J,
            3 => Self::K,
            _ => panic!("quaternion basis index out of range"),
        }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    /// Coordinate `x_{i+1}` of the point, `i` in `0..4`.
    pub fn coord(self, i: usize) -> f64 {
        self.to_array()[i]
    }

    pub fn conj(self) -> Self {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn im(self) -> ImQuaternion {
        ImQuaternion::new(self.x, self.y, self.z)
    }

    pub fn re(self) -> f64 {
        self.w
    }

    pub fn norm_sq(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Euclidean inner product on R^4.
    pub fn dot(self, other: Self) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn scale(self, s: f64) -> Self {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(self) -> Self {
        self.scale(1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl ImQuaternion {
    pub const ZERO: ImQuaternion = ImQuaternion::new(0.0, 0.0, 0.0);
    pub const I: ImQuaternion = ImQuaternion::new(1.0, 0.0, 0.0);
    pub const J: ImQuaternion = ImQuaternion::new(0.0, 1.0, 0.0);
    pub const K: ImQuaternion = ImQuaternion::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        ImQuaternion { x, y, z }
    }

    /// The units `I, J, K` for `a` in `0..3`.
    pub const fn unit(a: usize) -> Self {
        match a {
            0 => Self::I,
            1 => Self::J,
            2 => Self::K,
            _ => panic!("imaginary unit index out of range"),
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn to_quaternion(self) -> Quaternion {
        Quaternion::new(0.0, self.x, self.y, self.z)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(self, s: f64) -> Self {
        ImQuaternion::new(self.x * s, self.y * s, self.z * s)
    }

    /// Lie bracket `ab - ba`; equals twice the cross product.
    pub fn commutator(self, other: Self) -> Self {
        ImQuaternion::new(
            2.0 * (self.y * other.z - self.z * other.y),
            2.0 * (self.z * other.x - self.x * other.z),
            2.0 * (self.x * other.y - self.y * other.x),
        )
    }
}

impl From<[f64; 4]> for Quaternion {
    fn from(c: [f64; 4]) -> Self {
        Quaternion::from_array(c)
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.to_array()
    }
}

impl From<[f64; 3]> for ImQuaternion {
    fn from(c: [f64; 3]) -> Self {
        ImQuaternion::new(c[0], c[1], c[2])
    }
}

impl From<ImQuaternion> for [f64; 3] {
    fn from(q: ImQuaternion) -> Self {
        q.to_array()
    }
}

impl From<ImQuaternion> for Quaternion {
    fn from(q: ImQuaternion) -> Self {
        q.to_quaternion()
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Quaternion::real(w)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

/// Hamilton product.
impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q.scale(self)
    }
}

impl Add for ImQuaternion {
    type Output = ImQuaternion;
    fn add(self, o: ImQuaternion) -> ImQuaternion {
        ImQuaternion::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for ImQuaternion {
    type Output = ImQuaternion;
    fn sub(self, o: ImQuaternion) -> ImQuaternion {
        ImQuaternion::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for ImQuaternion {
    type Output = ImQuaternion;
    fn neg(self) -> ImQuaternion {
        ImQuaternion::new(-self.x, -self.y, -self.z)
    }
}

impl AddAssign for ImQuaternion {
    fn add_assign(&mut self, o: ImQuaternion) {
        *self = *self + o;
    }
}

impl SubAssign for ImQuaternion {
    fn sub_assign(&mut self, o: ImQuaternion) {
        *self = *self - o;
    }
}

impl Mul<f64> for ImQuaternion {
    type Output = ImQuaternion;
    fn mul(self, s: f64) -> ImQuaternion {
        self.scale(s)
    }
}

impl Mul<ImQuaternion> for f64 {
    type Output = ImQuaternion;
    fn mul(self, q: ImQuaternion) -> ImQuaternion {
        q.scale(self)
    }
}

/// Product of two imaginary quaternions; the result has real part `-<a, b>`.
impl Mul for ImQuaternion {
    type Output = Quaternion;
    fn mul(self, o: ImQuaternion) -> Quaternion {
        self.to_quaternion() * o.to_quaternion()
    }
}

pub fn mul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

pub fn conj(q: Quaternion) -> Quaternion {
    q.conj()
}

pub fn im(q: Quaternion) -> ImQuaternion {
    q.im()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ONE: Quaternion = Quaternion::ONE;
    const I: Quaternion = Quaternion::I;
    const J: Quaternion = Quaternion::J;
    const K: Quaternion = Quaternion::K;

    #[test]
    fn unit_table() {
        assert_eq!(I * I, -ONE);
        assert_eq!(J * J, -ONE);
        assert_eq!(K * K, -ONE);
        assert_eq!(I * J, K);
        assert_eq!(J * I, -K);
        assert_eq!(J * K, I);
        assert_eq!(K * J, -I);
        assert_eq!(K * I, J);
        assert_eq!(I * K, -J);
    }

    #[test]
    fn mul_examples() {
        let q = Quaternion::new(0.3, -1.2, 2.5, 4.0);
        assert_eq!(q * ONE, q);
        assert_eq!((ONE + I) * (ONE + J), Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn conj_examples() {
        assert_eq!(conj(Quaternion::new(1.0, 2.0, 0.0, 0.0)), Quaternion::new(1.0, -2.0, 0.0, 0.0));
        let x = Quaternion::new(0.5, -1.5, 2.0, 0.25);
        let p = x.conj() * x;
        assert!((p.w - x.norm_sq()).abs() < 1e-15);
        assert_eq!(p.im(), ImQuaternion::ZERO);
        assert_eq!(conj(I * J), J.conj() * I.conj());
        assert_eq!(conj(I * J), -K);
    }

    #[test]
    fn im_examples() {
        assert_eq!(im(Quaternion::real(5.0)), ImQuaternion::ZERO);
        assert_eq!(im(Quaternion::new(1.0, 2.0, 3.0, 0.0)), ImQuaternion::new(2.0, 3.0, 0.0));
        let x = Quaternion::new(-0.7, 0.1, 3.3, -2.0);
        assert!(im(x.conj() * x).norm() < 1e-15 * x.norm_sq());
    }

    #[test]
    fn commutator_matches_quaternion_product() {
        let a = ImQuaternion::new(0.2, -1.0, 0.7);
        let b = ImQuaternion::new(1.5, 0.4, -0.3);
        let direct = (a * b - b * a).im();
        let c = a.commutator(b);
        assert!((direct - c).norm() < 1e-15);
        assert_eq!((a * b - b * a).w, 0.0);
    }

    #[test]
    fn json_layout() {
        let q = Quaternion::new(1.0, 2.0, 3.0, 4.0);
        assert_eq!(serde_json::to_string(&q).unwrap(), "[1.0,2.0,3.0,4.0]");
        let back: Quaternion = serde_json::from_str("[1.0,2.0,3.0,4.0]").unwrap();
        assert_eq!(back, q);
        let v = ImQuaternion::new(-1.0, 0.5, 2.0);
        assert_eq!(serde_json::to_string(&v).unwrap(), "[-1.0,0.5,2.0]");
    }

    fn quat() -> impl Strategy<Value = Quaternion> {
        prop::array::uniform4(-10.0f64..10.0).prop_map(Quaternion::from_array)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(10_000))]

        #[test]
        fn norm_is_multiplicative(a in quat(), b in quat()) {
            let lhs = (a * b).norm();
            let rhs = a.norm() * b.norm();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-300));
        }

        #[test]
        fn im_of_conj_is_negated_im(a in quat()) {
            prop_assert_eq!(a.conj().im(), -a.im());
        }
    }

    proptest! {
        #[test]
        fn product_is_associative(a in quat(), b in quat(), c in quat()) {
            let lhs = (a * b) * c;
            let rhs = a * (b * c);
            let scale = a.norm() * b.norm() * c.norm();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));
        }

        #[test]
        fn conj_reverses_products(a in quat(), b in quat()) {
            let lhs = (a * b).conj();
            let rhs = b.conj() * a.conj();
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (a.norm() * b.norm()).max(1.0));
        }
    }
}
