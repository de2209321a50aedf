//! Fields built from the map `U = (λ₁(x−b₁), …, λ_k(x−b_k))ᵀ`:
//! `A = Im(f(|U|²) U⋆dU)`, `φ = Im(g(|U|²) U⋆dU)`.
//!
//! Since `U⋆dU = Σ λᵢ²(x̄ − b̄ᵢ)dx = Λ(x̄ − c̄)dx` with `Λ = Σλᵢ²` and `c` the
//! weighted centroid, and `|U|² = Λ|x − c|² + K` with `K = Σλᵢ²|bᵢ − c|²`, every
//! such field is radial about `c` with profile `s ↦ Λ f(Λs + K)`. When `K = 0`
//! that is a rescaled member of the same family; when `K > 0` the shift breaks
//! the reduced equations, which the residual functions here expose.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KwError, Result};
use crate::families::SolutionFamily;
use crate::forms::{
    covariant_derivative, curvature, hodge_star_1, kw_first_equation, wedge_one_one, wedge_one_three, wedge_three_one,
    Metric, OneForm, Su2OneForm, Su2OneFormJet,
};
use crate::gauge_invariants::shell_trace_integral;
use crate::quadrature::{log_panels, QuadResult};
use crate::quat::{ImQuaternion, Quaternion};
use crate::radial::{Ansatz, RadialProfile};

/// Evaluation is rejected within this distance (in `|U|²`) of a profile pole.
pub const SURFACE_GUARD: f64 = 1e-4;

fn default_c() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CenterData {
    pub lambdas: Vec<f64>,
    pub centers: Vec<Quaternion>,
    #[serde(rename = "C", default = "default_c")]
    pub c: f64,
}

impl CenterData {
    pub fn new(lambdas: Vec<f64>, centers: Vec<Quaternion>, c: f64) -> Result<Self> {
        let cd = CenterData { lambdas, centers, c };
        cd.validate()?;
        Ok(cd)
    }

    pub fn single(lambda: f64, center: Quaternion, c: f64) -> Self {
        CenterData { lambdas: vec![lambda], centers: vec![center], c }
    }

    pub fn validate(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.lambdas.len() != self.centers.len() {
            return Err(KwError::InvalidParameter(format!(
                "need k >= 1 matching weights and centers, got {} and {}",
                self.lambdas.len(),
                self.centers.len()
            )));
        }
        if !self.lambdas.iter().all(|l| l.is_finite()) || !self.centers.iter().all(|b| b.is_finite()) {
            return Err(KwError::InvalidParameter("non-finite center data".into()));
        }
        if self.weight() == 0.0 {
            return Err(KwError::InvalidParameter("all weights are zero".into()));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(KwError::InvalidParameter(format!("C must be positive, got {}", self.c)));
        }
        Ok(())
    }

    /// Weights in `[0.5, 1.5]`, centers with coordinates in `[−½, ½]`, and `C`.
    pub fn random(k: usize, c: f64, rng: &mut impl Rng) -> Self {
        let lambdas = (0..k).map(|_| rng.gen_range(0.5..1.5)).collect();
        let centers = (0..k)
            .map(|_| Quaternion::from_array(std::array::from_fn(|_| rng.gen_range(-0.5..0.5))))
            .collect();
        CenterData { lambdas, centers, c }
    }

    pub fn k(&self) -> usize {
        self.lambdas.len()
    }

    /// The `5k` real parameters: weights, then center coordinates.
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = self.lambdas.clone();
        p.extend(self.centers.iter().flat_map(|b| b.to_array()));
        p
    }

    pub fn from_parameters(p: &[f64], c: f64) -> Result<Self> {
        if p.len() % 5 != 0 || p.is_empty() {
            return Err(KwError::InvalidParameter(format!("parameter count {} is not a positive multiple of 5", p.len())));
        }
        let k = p.len() / 5;
        let centers = p[k..].chunks(4).map(|b| Quaternion::new(b[0], b[1], b[2], b[3])).collect();
        CenterData::new(p[..k].to_vec(), centers, c)
    }

    /// `Λ = Σ λᵢ²`.
    pub fn weight(&self) -> f64 {
        self.lambdas.iter().map(|l| l * l).sum()
    }

    /// `c = Σ λᵢ² bᵢ / Λ`.
    pub fn centroid(&self) -> Quaternion {
        let w = self.weight();
        self.lambdas
            .iter()
            .zip(&self.centers)
            .fold(Quaternion::ZERO, |acc, (l, b)| acc + *b * (l * l / w))
    }

    /// `K = Σ λᵢ² |bᵢ − c|²`, the minimum of `|U|²`.
    pub fn offset(&self) -> f64 {
        let c = self.centroid();
        self.lambdas.iter().zip(&self.centers).map(|(l, b)| l * l * (*b - c).norm_sq()).sum()
    }

    pub fn family(&self) -> SolutionFamily {
        SolutionFamily::GluedPlus { c: self.c }
    }

    pub fn translated(&self, shift: Quaternion) -> Self {
        CenterData { centers: self.centers.iter().map(|b| *b + shift).collect(), ..self.clone() }
    }
}

/// `|U|² = Σ λᵢ²|x − bᵢ|²`.
pub fn u_norm_sq(cd: &CenterData, x: Quaternion) -> f64 {
    cd.lambdas.iter().zip(&cd.centers).map(|(l, b)| l * l * (x - *b).norm_sq()).sum()
}

/// `∂_j |U|² = 2 Σ λᵢ² (x_j − b_{ij})`.
pub fn u_norm_sq_gradient(cd: &CenterData, x: Quaternion) -> [f64; 4] {
    std::array::from_fn(|j| {
        cd.lambdas
            .iter()
            .zip(&cd.centers)
            .map(|(l, b)| 2.0 * l * l * (x.coord(j) - b.coord(j)))
            .sum()
    })
}

/// `Im(U⋆dU)`: component `j` is `Σᵢ λᵢ² im((x̄ − b̄ᵢ) e_j)`.
pub fn u_star_du(cd: &CenterData, x: Quaternion) -> Su2OneForm {
    let mut w = Su2OneForm::zero();
    for (l, b) in cd.lambdas.iter().zip(&cd.centers) {
        w = w + Ansatz::XbarDx.one_form(l * l, x - *b);
    }
    w
}

/// Exact jet of `Im(U⋆dU)`; the form is affine in `x`.
pub fn u_star_du_jet(cd: &CenterData, x: Quaternion) -> Su2OneFormJet {
    let w = cd.weight();
    let partials = std::array::from_fn(|j| OneForm {
        c: std::array::from_fn(|i| (Quaternion::basis(j).conj() * Quaternion::basis(i)).im() * w),
    });
    Su2OneFormJet { value: u_star_du(cd, x), partials }
}

fn check_family(fam: &SolutionFamily) -> Result<()> {
    if fam.ansatz() != Ansatz::XbarDx {
        return Err(KwError::InvalidParameter(format!("{fam} uses the conjugate ansatz; U-map fields need x-bar dx")));
    }
    fam.validate()
}

fn check_surfaces(s: f64, poles: &[f64]) -> Result<()> {
    for &pole in poles {
        if (s - pole).abs() < SURFACE_GUARD {
            return Err(KwError::SingularLocus { t: s, pole });
        }
    }
    Ok(())
}

fn scaled_jet(w: &Su2OneFormJet, s: f64, ds: f64, grad: &[f64; 4]) -> Su2OneFormJet {
    Su2OneFormJet {
        value: w.value.scale(s),
        partials: std::array::from_fn(|j| w.value.scale(ds * grad[j]) + w.partials[j].scale(s)),
    }
}

/// Exact first jets of `(A, φ)` at `x`.
pub fn multicenter_jets(cd: &CenterData, fam: &SolutionFamily, x: Quaternion) -> Result<(Su2OneFormJet, Su2OneFormJet)> {
    check_family(fam)?;
    let p = fam.profile();
    let s = u_norm_sq(cd, x);
    check_surfaces(s, &p.f_poles())?;
    check_surfaces(s, &p.g_poles())?;
    let grad = u_norm_sq_gradient(cd, x);
    let w = u_star_du_jet(cd, x);
    Ok((scaled_jet(&w, p.f(s), p.df(s), &grad), scaled_jet(&w, p.g(s), p.dg(s), &grad)))
}

/// `(A, φ)` at `x`.
pub fn multicenter_field(cd: &CenterData, fam: &SolutionFamily, x: Quaternion) -> Result<(Su2OneForm, Su2OneForm)> {
    check_family(fam)?;
    let p = fam.profile();
    let s = u_norm_sq(cd, x);
    check_surfaces(s, &p.f_poles())?;
    check_surfaces(s, &p.g_poles())?;
    let w = u_star_du(cd, x);
    Ok((w.scale(p.f(s)), w.scale(p.g(s))))
}

/// `|F − φ∧φ − ⋆d_Aφ|` at `x` from exact jets.
pub fn kw_residual_exact(cd: &CenterData, fam: &SolutionFamily, x: Quaternion) -> Result<f64> {
    let (a, phi) = multicenter_jets(cd, fam, x)?;
    let f = curvature(&a);
    let pp = wedge_one_one(&phi.value, &phi.value);
    let dap = covariant_derivative(&a.value, &phi);
    Ok(kw_first_equation(&f, &pp, &dap).norm())
}

/// `A∧⋆φ + ⋆φ∧A` as a `dVol` coefficient.
pub fn commutator_density(cd: &CenterData, fam: &SolutionFamily, x: Quaternion) -> Result<Quaternion> {
    let (a, phi) = multicenter_field(cd, fam, x)?;
    let m = Metric::euclidean();
    let star_phi = hodge_star_1(&phi, &m, x.norm_sq());
    Ok(wedge_one_three(&a, &star_phi) + wedge_three_one(&star_phi, &a))
}

/// `|d_A⋆φ|` at `x` with `d⋆φ` taken by centered differences of step `h`.
pub fn dastar_phi_multicenter_residual(cd: &CenterData, fam: &SolutionFamily, x: Quaternion, h: f64) -> Result<f64> {
    let mut div = Quaternion::ZERO;
    for j in 0..4 {
        let e = Quaternion::basis(j) * h;
        let (_, plus) = multicenter_field(cd, fam, x + e)?;
        let (_, minus) = multicenter_field(cd, fam, x - e)?;
        div += Quaternion::from(plus.c[j] - minus.c[j]) * (1.0 / (2.0 * h));
    }
    Ok((div + commutator_density(cd, fam, x)?).norm())
}

/// `Σ_j (x_j − b_{lj}) Im((x̄ − b̄ᵢ)e_j) + (i ↔ l)`.
pub fn antisymmetry_identity(x: Quaternion, bi: Quaternion, bl: Quaternion) -> ImQuaternion {
    let half = |p: Quaternion, q: Quaternion| {
        (0..4).fold(ImQuaternion::ZERO, |acc, j| {
            acc + ((x - q).conj() * Quaternion::basis(j)).im() * (x.coord(j) - p.coord(j))
        })
    };
    half(bl, bi) + half(bi, bl)
}

/// Radius about the centroid at which `|U|² = 1/C`, if that surface exists.
pub fn glue_radius_sq(cd: &CenterData) -> Option<f64> {
    let s = (1.0 / cd.c - cd.offset()) / cd.weight();
    (s > 0.0).then_some(s)
}

/// `(1/4π²) ∫ tr(F∧F)` for the U-map connection by shell quadrature about the
/// centroid. No closed form is known for `k ≥ 2`; this is a numerical value with
/// an error bar, not a theorem.
pub fn conjectural_instanton(cd: &CenterData, fam: &SolutionFamily) -> Result<QuadResult> {
    check_family(fam)?;
    let center = cd.centroid();
    let scale = 1.0 / (cd.weight() * fam.c().max(1e-300));
    let hi = 1e4 * scale.max(1.0);
    let mut breaks = vec![0.0];
    breaks.extend(log_panels(1e-8 * scale, hi, 4));
    if let Some(r2) = glue_radius_sq(cd) {
        breaks.push(r2);
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let dirs = [
        Quaternion::new(1.0, 0.0, 0.0, 0.0),
        Quaternion::new(0.3, -0.5, 0.8, 0.1),
        Quaternion::new(-0.2, 0.4, 0.1, -0.9),
        Quaternion::new(0.0, 0.6, -0.6, 0.5),
    ];
    let p = fam.profile();
    // Only the connection enters; the Higgs pole is irrelevant here.
    let jet = |x: Quaternion| -> Result<Su2OneFormJet> {
        let s = u_norm_sq(cd, x);
        let grad = u_norm_sq_gradient(cd, x);
        Ok(scaled_jet(&u_star_du_jet(cd, x), p.f(s), p.df(s), &grad))
    };
    shell_trace_integral(&jet, center, &dirs, &breaks, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::eval_jets;
    use rand::SeedableRng;
    use rand_xoshiro::SplitMix64;

    fn rng(seed: u64) -> SplitMix64 {
        SplitMix64::seed_from_u64(seed)
    }

    fn random_point(rng: &mut SplitMix64, r: f64) -> Quaternion {
        Quaternion::from_array(std::array::from_fn(|_| rng.gen_range(-r..r)))
    }

    /// A point where `|U|²` is at least `margin` away from `1/C`.
    fn admissible_point(cd: &CenterData, rng: &mut SplitMix64, margin: f64) -> Quaternion {
        loop {
            let x = cd.centroid() + random_point(rng, 1.5);
            if (u_norm_sq(cd, x) - 1.0 / cd.c).abs() > margin {
                return x;
            }
        }
    }

    #[test]
    fn u_norm_examples() {
        let x = Quaternion::new(0.3, -1.0, 2.0, 0.5);
        assert_eq!(u_norm_sq(&CenterData::single(1.0, Quaternion::ZERO, 1.0), x), x.norm_sq());
        let cd = CenterData::new(vec![1.0, 1.0], vec![Quaternion::ZERO, Quaternion::ONE], 1.0).unwrap();
        assert_eq!(u_norm_sq(&cd, Quaternion::ZERO), 1.0);
        let shift = Quaternion::new(-2.0, 0.1, 0.7, 3.0);
        let moved = cd.translated(shift);
        assert!((u_norm_sq(&moved, x + shift) - u_norm_sq(&cd, x)).abs() < 1e-12);
        let mut r = rng(3);
        let cd = CenterData::random(3, 1.0, &mut r);
        let x = random_point(&mut r, 2.0);
        let centroid_form = cd.weight() * (x - cd.centroid()).norm_sq() + cd.offset();
        assert!((u_norm_sq(&cd, x) - centroid_form).abs() < 1e-12);
    }

    #[test]
    fn u_star_du_examples() {
        let x = Quaternion::new(0.3, -1.0, 2.0, 0.5);
        let single = u_star_du(&CenterData::single(1.0, Quaternion::ZERO, 1.0), x);
        assert_eq!(single, Ansatz::XbarDx.one_form(1.0, x));
        let zero = CenterData { lambdas: vec![0.0, 0.0], centers: vec![Quaternion::ONE, Quaternion::I], c: 1.0 };
        assert_eq!(u_star_du(&zero, x), Su2OneForm::zero());
        assert!(zero.validate().is_err());
        let b = Quaternion::new(0.2, 0.1, -0.4, 0.9);
        let pair = CenterData::new(vec![1.0, 1.0], vec![b, -b], 1.0).unwrap();
        let sum = u_star_du(&CenterData::single(1.0, b, 1.0), Quaternion::ZERO)
            + u_star_du(&CenterData::single(1.0, -b, 1.0), Quaternion::ZERO);
        assert_eq!(u_star_du(&pair, Quaternion::ZERO), sum);
    }

    #[test]
    fn jet_matches_differences() {
        let mut r = rng(11);
        let cd = CenterData::random(3, 1.0, &mut r);
        let fam = cd.family();
        for _ in 0..10 {
            let x = admissible_point(&cd, &mut r, 0.05);
            let (a, phi) = multicenter_jets(&cd, &fam, x).unwrap();
            let h = 1e-5;
            for j in 0..4 {
                let e = Quaternion::basis(j) * h;
                let (ap, pp) = multicenter_field(&cd, &fam, x + e).unwrap();
                let (am, pm) = multicenter_field(&cd, &fam, x - e).unwrap();
                let da = (ap - am).scale(0.5 / h);
                let dp = (pp - pm).scale(0.5 / h);
                assert!((da - a.partials[j]).norm() < 1e-6 * (1.0 + da.norm()));
                assert!((dp - phi.partials[j]).norm() < 1e-6 * (1.0 + dp.norm()));
            }
        }
    }

    #[test]
    fn single_center_is_the_radial_solution() {
        let fam = SolutionFamily::GluedPlus { c: 1.0 };
        let cd = CenterData::single(1.0, Quaternion::ZERO, 1.0);
        let x = Quaternion::new(0.4, -0.3, 0.2, 0.5);
        let (a, phi) = multicenter_jets(&cd, &fam, x).unwrap();
        let (ra, rphi) = eval_jets(&fam.profile(), Ansatz::XbarDx, x).unwrap();
        assert!((a.value - ra.value).norm() < 1e-15);
        assert!((phi.value - rphi.value).norm() < 1e-15);
        for j in 0..4 {
            assert!((a.partials[j] - ra.partials[j]).norm() < 1e-13);
        }
        assert!(kw_residual_exact(&cd, &fam, x).unwrap() < 1e-12);
    }

    #[test]
    fn coincident_centers_solve_but_distinct_ones_do_not() {
        let b = Quaternion::new(0.1, 0.2, -0.3, 0.05);
        let fam = SolutionFamily::GluedPlus { c: 1.0 };
        let stacked = CenterData::new(vec![0.8, 1.1, 0.6], vec![b, b, b], 1.0).unwrap();
        assert!(stacked.offset() < 1e-30);
        let spread = CenterData::new(vec![1.0, 1.0], vec![b, -b], 1.0).unwrap();
        assert!(spread.offset() > 0.0);
        let mut r = rng(5);
        let mut worst_stacked = 0.0f64;
        let mut best_spread = f64::INFINITY;
        for _ in 0..20 {
            let x = admissible_point(&stacked, &mut r, 0.01);
            worst_stacked = worst_stacked.max(kw_residual_exact(&stacked, &fam, x).unwrap());
            let y = admissible_point(&spread, &mut r, 0.01);
            best_spread = best_spread.min(kw_residual_exact(&spread, &fam, y).unwrap());
        }
        assert!(worst_stacked < 1e-10, "{worst_stacked}");
        assert!(best_spread > 1e-3, "{best_spread}");
    }

    #[test]
    fn glue_surface_is_guarded() {
        let cd = CenterData::single(1.0, Quaternion::ZERO, 1.0);
        let fam = cd.family();
        assert!(matches!(
            multicenter_field(&cd, &fam, Quaternion::ONE),
            Err(KwError::SingularLocus { .. })
        ));
        let conj = SolutionFamily::ConjGluedMinus { c: 1.0 };
        assert!(multicenter_field(&cd, &conj, Quaternion::I * 0.5).is_err());
    }

    #[test]
    fn antisymmetry_identity_vanishes() {
        let mut r = rng(17);
        for _ in 0..100 {
            let (x, bi, bl) = (random_point(&mut r, 2.0), random_point(&mut r, 2.0), random_point(&mut r, 2.0));
            assert!(antisymmetry_identity(x, bi, bl).norm() < 1e-12);
        }
    }

    #[test]
    fn commutator_density_vanishes() {
        let mut r = rng(19);
        let cd = CenterData::random(3, 1.0, &mut r);
        for _ in 0..50 {
            let x = admissible_point(&cd, &mut r, 0.01);
            assert!(commutator_density(&cd, &cd.family(), x).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn dastar_phi_converges_quadratically() {
        let mut r = rng(23);
        let cd = CenterData::random(3, 1.0, &mut r);
        let fam = cd.family();
        for _ in 0..20 {
            let x = admissible_point(&cd, &mut r, 0.1);
            let big = dastar_phi_multicenter_residual(&cd, &fam, x, 1e-2).unwrap();
            let small = dastar_phi_multicenter_residual(&cd, &fam, x, 5e-3).unwrap();
            assert!(big < 1e-1 && small < 0.3 * big + 1e-12, "{big} {small}");
        }
        let single = CenterData::single(1.0, Quaternion::ZERO, 1.0);
        let x = Quaternion::new(0.2, 0.5, -0.4, 0.3);
        assert!(dastar_phi_multicenter_residual(&single, &fam, x, 1e-3).unwrap() < 1e-5);
    }

    #[test]
    fn higgs_scaling_is_linear_in_residual() {
        // With A fixed, d⋆φ and the commutator are linear in φ.
        let cd = CenterData::random(2, 1.0, &mut rng(29));
        let x = cd.centroid() + Quaternion::new(0.1, 0.9, 0.2, -0.3);
        let (a, phi) = multicenter_field(&cd, &cd.family(), x).unwrap();
        let m = Metric::euclidean();
        let dens = |p: &Su2OneForm| {
            let s = hodge_star_1(p, &m, 0.0);
            wedge_one_three(&a, &s) + wedge_three_one(&s, &a)
        };
        let d1 = dens(&phi);
        let d3 = dens(&phi.scale(3.0));
        assert!((d3 - d1 * 3.0).norm() <= 1e-12 * (1.0 + d1.norm()));
    }

    #[test]
    fn conjectural_instanton_number() {
        let mut r = rng(31);
        for k in [1, 2, 3] {
            let cd = CenterData::random(k, 1.0, &mut r);
            let q = conjectural_instanton(&cd, &cd.family()).unwrap();
            assert!((q.value + 1.0).abs() < 1e-4, "k = {k}: {}", q.value);
        }
    }

    #[test]
    fn json_round_trip() {
        let cd = CenterData::new(vec![1.0, 2.0], vec![Quaternion::ZERO, Quaternion::new(1.0, 2.0, 3.0, 4.0)], 1.5).unwrap();
        let s = serde_json::to_string(&cd).unwrap();
        assert_eq!(s, r#"{"lambdas":[1.0,2.0],"centers":[[0.0,0.0,0.0,0.0],[1.0,2.0,3.0,4.0]],"C":1.5}"#);
        let back: CenterData = serde_json::from_str(&s).unwrap();
        assert_eq!(back, cd);
        let p = cd.parameters();
        assert_eq!(p.len(), 10);
        assert_eq!(CenterData::from_parameters(&p, 1.5).unwrap(), cd);
    }
}
