//! Globally adaptive Gauss–Kronrod (7, 15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct QuadResult {
    pub value: f64,
    /// Sum of the per-interval `|K15 − G7|` estimates.
    pub error: f64,
    pub evaluations: usize,
    pub intervals: usize,
    /// False if the interval budget ran out before the tolerance was met.
    pub converged: bool,
}

impl std::ops::Add for QuadResult {
    type Output = QuadResult;
    fn add(self, o: QuadResult) -> QuadResult {
        QuadResult {
            value: self.value + o.value,
            error: self.error + o.error,
            evaluations: self.evaluations + o.evaluations,
            intervals: self.intervals + o.intervals,
            converged: self.converged && o.converged,
        }
    }
}

/// One (7, 15) rule on `[a, b]`: `(Kronrod value, |Kronrod − Gauss|)`.
pub fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Bisects the interval with the largest error estimate until the summed
/// estimate is at most `abs_tol` or `max_intervals` is reached.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> QuadResult {
    integrate_breaks(&mut f, &[a, b], abs_tol, max_intervals)
}

/// As [`integrate`], starting from the panels delimited by `breaks` (sorted).
pub fn integrate_breaks(f: &mut impl FnMut(f64) -> f64, breaks: &[f64], abs_tol: f64, max_intervals: usize) -> QuadResult {
    let mut heap = BinaryHeap::new();
    let mut evaluations = 0;
    for w in breaks.windows(2) {
        let (value, error) = gk15(f, w[0], w[1]);
        evaluations += 15;
        heap.push(Piece { a: w[0], b: w[1], value, error });
    }
    let total_error = |h: &BinaryHeap<Piece>| h.iter().map(|p| p.error).sum::<f64>();
    let mut converged = true;
    while total_error(&heap) > abs_tol {
        if heap.len() >= max_intervals.max(breaks.len()) {
            converged = false;
            break;
        }
        let worst = heap.pop().expect("at least one panel");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            converged = false;
            break;
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk15(f, a, b);
            evaluations += 15;
            heap.push(Piece { a, b, value, error });
        }
    }
    // Sum in interval order so the result does not depend on heap layout.
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    QuadResult {
        value: pieces.iter().map(|p| p.value).sum(),
        error: pieces.iter().map(|p| p.error).sum(),
        evaluations,
        intervals: pieces.len(),
        converged,
    }
}

/// Panel boundaries `a = x₀ < … < x_n = b` spaced evenly in `ln x`, with
/// `per_decade` panels per factor of ten. Requires `0 < a < b`.
pub fn log_panels(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    assert!(a > 0.0 && b > a, "log panels need 0 < a < b");
    let decades = (b / a).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(1);
    let mut v: Vec<f64> = (0..=n).map(|i| a * (b / a).powf(i as f64 / n as f64)).collect();
    v[0] = a;
    v[n] = b;
    v
}

/// `∫_a^b f` for `0 < a < b` on log-spaced panels.
pub fn integrate_log(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> QuadResult {
    integrate_breaks(&mut f, &log_panels(a, b, 4), abs_tol, 20_000)
}

/// `∫_a^∞ f` for `a > 0` via `t = a/u`, `dt = a/u² du`, `u ∈ (0, 1]`.
pub fn integrate_to_infinity(mut f: impl FnMut(f64) -> f64, a: f64, abs_tol: f64) -> QuadResult {
    assert!(a > 0.0, "tail start must be positive");
    let mut g = |u: f64| {
        if u <= 0.0 {
            return 0.0;
        }
        let t = a / u;
        let v = f(t) * a / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_breaks(&mut g, &log_panels(1e-12, 1.0, 2), abs_tol, 20_000)
}
