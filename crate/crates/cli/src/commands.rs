//! One function per subcommand. Each builds a [`Report`]; the caller writes it
//! and maps failed checks to exit status 2.

use std::fmt;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use kw_core::families::{catalog, glued_u_c1_check, SolutionFamily};
use kw_core::fdcheck::{admissible_points, order_scan, FieldSampler};
use kw_core::gauge_invariants::{
    bubbling_check, concentration_fraction, curvature_norm_sq, daphi_norm_sq, instanton_report, l2_curvature_mass,
    log_log_slope, singular_integral, singular_integral_two_sided, CONVENTION_NOTE,
};
use kw_core::multicenter::{
    commutator_density, conjectural_instanton, dastar_phi_multicenter_residual, kw_residual_exact, CenterData,
};
use kw_core::nahm::{
    cylinder_instanton, decay_slope, frame_decomposition, frame_decomposition_residual, nahm_pole_residual,
    nahm_table, pullback_profiles, right_frame, true_pullback_profiles, NahmSolution,
};
use kw_core::ode::{cubic_orbit_residual, first_integral, integrate, AutonomousState};
use kw_core::radial::{check_profile, governing_residual, Ansatz, RadialProfile, ScaledHiggs};
use kw_core::{KwError, Quaternion};

use crate::report::Report;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    /// A computation could not be completed; reported like a tolerance failure.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Failed(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<KwError> for CliError {
    fn from(e: KwError) -> Self {
        match e {
            KwError::InvalidParameter(_) | KwError::InvalidLambda(_) => CliError::Usage(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

/// Sample grid in `t` (or `y` for the Nahm tables).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl Grid {
    pub fn validate(&self) -> CliResult<()> {
        if self.count < 2 {
            return usage(format!("grid needs at least 2 points, got {}", self.count));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min < self.max) {
            return usage(format!("grid needs finite min < max, got [{}, {}]", self.min, self.max));
        }
        if self.log && self.min <= 0.0 {
            return usage(format!("log grid needs min > 0, got {}", self.min));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let s = i as f64 / last;
                if self.log {
                    self.min * (self.max / self.min).powf(s)
                } else {
                    self.min + (self.max - self.min) * s
                }
            })
            .collect()
    }

    fn describe(&self, r: &mut Report, name: &str) {
        r.meta(&format!("{name}_min"), self.min);
        r.meta(&format!("{name}_max"), self.max);
        r.meta("count", self.count);
        r.meta("spacing", if self.log { "log" } else { "linear" });
    }
}

fn join(cs: &[f64]) -> String {
    cs.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";")
}

fn resolve_families(tag: &str, cs: &[f64]) -> CliResult<Vec<SolutionFamily>> {
    if cs.is_empty() {
        return usage("at least one value of C is required");
    }
    let fams = if tag == "all" {
        catalog(cs)
    } else {
        cs.iter().map(|&c| SolutionFamily::from_tag(tag, c)).collect::<kw_core::Result<Vec<_>>>()?
    };
    let mut out: Vec<SolutionFamily> = Vec::new();
    for f in fams {
        f.validate()?;
        if !out.iter().any(|g| g.to_string() == f.to_string()) {
            out.push(f);
        }
    }
    Ok(out)
}

fn single_family(tag: &str, c: f64) -> CliResult<SolutionFamily> {
    if tag == "all" {
        return usage("this command takes a single family");
    }
    Ok(SolutionFamily::from_tag(tag, c)?)
}

/// Characteristic length of the family in `t`.
fn t_scale(fam: &SolutionFamily) -> f64 {
    let c = fam.c().abs();
    if c > 0.0 {
        1.0 / c
    } else {
        1.0
    }
}

fn fd_radius(fam: &SolutionFamily) -> f64 {
    2.0 / fam.c().abs().max(0.25).sqrt()
}

pub struct VerifyConfig {
    pub family: String,
    pub cs: Vec<f64>,
    pub grid: Grid,
    pub h: f64,
    pub seed: u64,
    pub points: usize,
    pub tol: f64,
    pub higgs_scale: f64,
}

/// Values of `(f̃, g̃)` at `t = scale · 10^k` for the given exponents, and the
/// largest spread of each across them.
fn endpoint_behaviour(p: &dyn RadialProfile, scale: f64, exps: &[i32]) -> ((f64, f64), (f64, f64)) {
    let mut fs = Vec::new();
    let mut gs = Vec::new();
    for &k in exps {
        let t = scale * 10f64.powi(k);
        fs.push(p.f_tilde(t));
        gs.push(p.g_tilde(t));
    }
    let spread = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() && hi.is_finite() {
            hi - lo
        } else {
            f64::INFINITY
        }
    };
    ((*fs.last().unwrap(), *gs.last().unwrap()), (spread(&fs), spread(&gs)))
}

pub fn verify(cfg: &VerifyConfig) -> CliResult<Report> {
    cfg.grid.validate()?;
    if !(cfg.h > 0.0) || !(cfg.tol > 0.0) || cfg.points < 5 || !cfg.higgs_scale.is_finite() {
        return usage("verify needs --h > 0, --tol > 0, --points >= 5 and a finite --higgs-scale");
    }
    let fams = resolve_families(&cfg.family, &cfg.cs)?;
    let mut r = Report::new("verify", &["family", "C", "lambda", "t", "r1", "r2"]);
    r.meta("family", cfg.family.as_str());
    r.meta("C", join(&cfg.cs));
    cfg.grid.describe(&mut r, "t");
    r.meta("h", cfg.h);
    r.meta("points", cfg.points);
    r.meta("tol", cfg.tol);
    if cfg.higgs_scale != 1.0 {
        r.meta("higgs_scale", cfg.higgs_scale);
    }
    r.meta("seed", cfg.seed);

    let ts = cfg.grid.points();
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    for fam in &fams {
        let p = ScaledHiggs { inner: fam.profile(), factor: cfg.higgs_scale };
        let lambda = fam.governing_lambda();

        let mut worst = 0.0f64;
        let mut worst_t = f64::NAN;
        let mut evaluated = 0usize;
        for &t in &ts {
            if check_profile(&p, t).is_err() {
                continue;
            }
            let (r1, r2) = governing_residual(&p, lambda, t)?;
            evaluated += 1;
            let m = if r1.is_finite() && r2.is_finite() { r1.abs().max(r2.abs()) } else { f64::INFINITY };
            if m > worst || worst_t.is_nan() {
                worst = worst.max(m);
                worst_t = t;
            }
            r.row(vec![fam.tag().into(), fam.c().into(), lambda.into(), t.into(), r1.into(), r2.into()]);
        }
        r.check(
            format!("{fam}: reduced residuals <= {:e}", cfg.tol),
            evaluated > 0 && worst <= cfg.tol,
            format!("max |r| = {worst:.3e} at t = {worst_t:.6e} over {evaluated} points"),
        );

        // A global solution needs t f and t g to settle on an equilibrium
        // (t f, t g) = (0 or 1, 0) at both ends.
        let scale = t_scale(fam);
        let (at0, spread0) = endpoint_behaviour(&p, scale, &[-10, -11, -12, -13, -14]);
        let (at_inf, spread_inf) = endpoint_behaviour(&p, scale, &[10, 11, 12, 13, 14]);
        let settled = |(f, g): (f64, f64), (sf, sg): (f64, f64)| {
            sf <= 1e-6 && sg <= 1e-6 && f.abs().min((f - 1.0).abs()) <= 1e-6 && g.abs() <= 1e-6
        };
        let limits_ok = settled(at0, spread0) && settled(at_inf, spread_inf);
        r.check(
            format!("{fam}: (t f, t g) settles on an equilibrium as t -> 0 and t -> inf"),
            limits_ok,
            format!(
                "near 0: ({:.6e}, {:.6e}) spread ({:.1e}, {:.1e}); near inf: ({:.6e}, {:.6e}) spread ({:.1e}, {:.1e})",
                at0.0, at0.1, spread0.0, spread0.1, at_inf.0, at_inf.1, spread_inf.0, spread_inf.1
            ),
        );
        let singular: Vec<f64> =
            p.singular_t().into_iter().filter(|&t| t >= cfg.grid.min && t <= cfg.grid.max).collect();
        r.summary(format!("{fam}: singular values of |x|^2 in [{}, {}]", cfg.grid.min, cfg.grid.max), singular.len());
        if !limits_ok {
            blow_up_diagnostics(&mut r, fam, &p, lambda, &cfg.grid);
        }

        if let SolutionFamily::GluedPlus { c } | SolutionFamily::ConjGluedMinus { c } = *fam {
            let mut ok = true;
            let mut parts = Vec::new();
            for step in [1e-3, 1e-4] {
                let (jump, gap) = glued_u_c1_check(c, step)?;
                ok &= jump == 0.0 && gap.abs() <= 10.0 * step;
                parts.push(format!("h = {step:e}: jump {jump:e}, slope gap {gap:.3e}"));
            }
            r.check(format!("{fam}: C^1 across |x|^2 = 1/C"), ok, parts.join("; "));
        }

        let sampler = if cfg.higgs_scale == 1.0 {
            FieldSampler::from_family(fam)
        } else {
            FieldSampler::from_family_scaled(fam, cfg.higgs_scale)
        };
        let pts = admissible_points(&sampler, Quaternion::ZERO, fd_radius(fam), cfg.points, &mut rng, |_| cfg.h);
        match order_scan(&sampler, &pts, cfg.h) {
            Ok(scan) => {
                r.summary(format!("{fam}: finite-difference median order"), scan.median_order);
                r.check(
                    format!("{fam}: 4D finite-difference order >= 1.8"),
                    scan.median_order >= 1.8,
                    format!("median order {:.3} over {} points, h0 = {}", scan.median_order, pts.len(), cfg.h),
                );
            }
            Err(e) => r.check(format!("{fam}: 4D finite-difference order >= 1.8"), false, e.to_string()),
        }
    }
    Ok(r)
}

fn blow_up_diagnostics(r: &mut Report, fam: &SolutionFamily, p: &dyn RadialProfile, lambda: f64, grid: &Grid) {
    let poles: Vec<f64> = p.g_poles().into_iter().filter(|&t| t >= grid.min && t <= grid.max).collect();
    if lambda == 0.0 {
        return;
    }
    let (mut s0, s1) = (grid.min.max(1e-300).ln(), grid.max.ln());
    while check_profile(p, s0.exp()).is_err() && s0 < s1 {
        s0 += 1e-3;
    }
    let init = AutonomousState::from_profile(p, s0);
    match integrate(lambda, init, s1, 1e-10) {
        Ok(traj) if traj.blown_up => {
            let s = traj.last().s;
            let nearest = poles.iter().copied().min_by(|a, b| (a.ln() - s).abs().total_cmp(&(b.ln() - s).abs()));
            r.summary(
                format!("{fam}: blow-up"),
                format!(
                    "the reduced ODE from s = {s0:.6} leaves every bounded set at s = {s:.6} (t = {:.6e}); nearest pole t = {}",
                    s.exp(),
                    nearest.map_or("none".to_string(), |t| format!("{t:.6e}"))
                ),
            );
        }
        Ok(_) => r.summary(format!("{fam}: blow-up"), format!("none between s = {s0:.6} and {s1:.6}")),
        Err(e) => r.summary(format!("{fam}: blow-up"), format!("integration failed: {e}")),
    }
}

pub struct InstantonConfig {
    pub family: String,
    pub cs: Vec<f64>,
}

fn expected_abs_k(fam: &SolutionFamily) -> Option<f64> {
    match fam {
        SolutionFamily::F1 { .. } | SolutionFamily::F2 { .. } => Some(0.0),
        SolutionFamily::GluedPlus { .. } | SolutionFamily::ConjGluedMinus { .. } | SolutionFamily::THooft => Some(1.0),
        _ => None,
    }
}

pub fn instanton(cfg: &InstantonConfig) -> CliResult<Report> {
    let fams = resolve_families(&cfg.family, &cfg.cs)?;
    let all = cfg.family == "all";
    let mut r = Report::new(
        "instanton",
        &[
            "family",
            "C",
            "k_boundary",
            "k_quadrature",
            "quadrature_error_estimate",
            "k_trace_density",
            "trace_density_error_estimate",
            "k_abs",
            "consistent",
        ],
    );
    r.meta("family", cfg.family.as_str());
    r.meta("C", join(&cfg.cs));
    for fam in &fams {
        match instanton_report(fam) {
            Ok(rep) => {
                let expected_ok = expected_abs_k(fam).is_none_or(|k| (rep.k_abs - k).abs() < 1e-12);
                r.check(
                    format!("{fam}: boundary, radial quadrature and 4D trace density agree"),
                    rep.consistent && expected_ok,
                    format!(
                        "k = {:+} / {:+.10} / {:+.8}",
                        rep.k_boundary, rep.k_quadrature, rep.k_trace_density
                    ),
                );
                r.row(vec![
                    fam.tag().into(),
                    fam.c().into(),
                    rep.k_boundary.into(),
                    rep.k_quadrature.into(),
                    rep.quadrature_error_estimate.into(),
                    rep.k_trace_density.into(),
                    rep.trace_density_error_estimate.into(),
                    rep.k_abs.into(),
                    rep.consistent.into(),
                ]);
            }
            Err(e @ (KwError::PoleInDomain { .. } | KwError::NoLimit { .. })) if all => {
                r.summary(format!("{fam}: skipped"), e.to_string());
            }
            Err(e) => r.check(format!("{fam}: instanton number"), false, e.to_string()),
        }
    }
    if all {
        for which in NahmSolution::ALL {
            let cy = cylinder_instanton(which);
            r.summary(format!("cylinder {which}: k"), cy.k_quadrature);
            r.check(
                format!("cylinder {which}: |k| = 1/2 by both paths"),
                (cy.k_boundary.abs() - 0.5).abs() < 1e-12 && (cy.k_boundary - cy.k_quadrature).abs() <= 1e-6,
                format!("boundary {:+}, quadrature {:+.10}", cy.k_boundary, cy.k_quadrature),
            );
        }
    }
    r.summary("convention", CONVENTION_NOTE);
    Ok(r)
}

pub struct BubblingConfig {
    pub cs: Vec<f64>,
    pub r: f64,
    pub grid: Grid,
    pub min_fraction: f64,
}

pub fn bubbling(cfg: &BubblingConfig) -> CliResult<Report> {
    cfg.grid.validate()?;
    if cfg.cs.is_empty() || cfg.cs.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
        return usage("bubbling needs finite C > 0");
    }
    if !(cfg.r > 0.0) {
        return usage("bubbling needs --r > 0");
    }
    let mut r = Report::new("bubbling", &["C", "t", "curvature_norm", "rescaled_norm", "rel_err"]);
    r.meta("C", join(&cfg.cs));
    r.meta("r", cfg.r);
    cfg.grid.describe(&mut r, "t");

    let mut worst = 0.0f64;
    for &c in &cfg.cs {
        for t in std::iter::once(0.0).chain(cfg.grid.points()) {
            let (a, b) = bubbling_check(c, t);
            let rel = (a - b).abs() / a;
            worst = worst.max(rel);
            r.row(vec![c.into(), t.into(), a.into(), b.into(), rel.into()]);
        }
    }
    r.check(
        "|F^C|(t) = C |F|(Ct)",
        worst <= 1e-12,
        format!("max relative error {worst:.3e}"),
    );

    let m1 = l2_curvature_mass(1.0);
    r.summary("L2 curvature mass at C = 1", m1);
    let mut spread = 0.0f64;
    for &c in &cfg.cs {
        let m = l2_curvature_mass(c);
        spread = spread.max((m - m1).abs() / m1);
        r.summary(format!("L2 curvature mass at C = {c}"), m);
    }
    r.check("L2 curvature mass is independent of C", spread <= 1e-8, format!("max relative spread {spread:.3e}"));

    let c_max = cfg.cs.iter().copied().fold(0.0, f64::max);
    let mut frac_max = 0.0;
    for &c in &cfg.cs {
        let frac = concentration_fraction(c, cfg.r)?;
        if c == c_max {
            frac_max = frac;
        }
        r.summary(format!("mass fraction in |x| <= {} at C = {c}", cfg.r), frac);
    }
    r.check(
        format!("mass fraction in |x| <= {} at C = {c_max} >= {}", cfg.r, cfg.min_fraction),
        frac_max >= cfg.min_fraction,
        format!("fraction {frac_max:.10}"),
    );
    Ok(r)
}

pub struct SingularityConfig {
    pub family: String,
    pub c: f64,
    pub eps: Vec<f64>,
    pub upper: Option<f64>,
    pub expect_exponent: f64,
    pub exponent_tol: f64,
}

pub fn singularity(cfg: &SingularityConfig) -> CliResult<Report> {
    let fam = single_family(&cfg.family, cfg.c)?;
    if !matches!(fam, SolutionFamily::F1 { .. } | SolutionFamily::F2 { .. } | SolutionFamily::GluedPlus { .. })
        || !(cfg.c > 0.0)
    {
        return usage("singularity needs f1, f2 or glued_plus with C > 0 (Higgs pole at t = 1/C)");
    }
    if cfg.eps.len() < 2 {
        return usage("singularity needs at least two values of --eps");
    }
    let pole = 1.0 / cfg.c;
    let upper = cfg.upper.unwrap_or(2.0 * pole);
    let mut r = Report::new("singularity", &["eps", "integral", "error_estimate", "two_sided_integral"]);
    r.meta("family", fam.tag());
    r.meta("C", cfg.c);
    r.meta("upper", upper);

    let mut integrals = Vec::new();
    for &e in &cfg.eps {
        let q = singular_integral(&fam, e, upper)?;
        let two = if e < 0.5 * pole { singular_integral_two_sided(&fam, e)?.value } else { f64::NAN };
        integrals.push(q.value);
        r.row(vec![e.into(), q.value.into(), q.error.into(), two.into()]);
    }
    let exponent = -log_log_slope(&cfg.eps, &integrals);
    r.summary("growth exponent p in I(eps) ~ eps^-p", exponent);

    // Order of the pole of |d_A phi|^2 itself, from its log-log slope.
    let ds = [1e-3, 1e-4, 1e-5].map(|d| d * pole);
    let vals: Vec<f64> = ds.iter().map(|&d| daphi_norm_sq(&fam, pole + d)).collect::<kw_core::Result<_>>()?;
    r.summary("pole order of |d_A phi|^2 at t = 1/C", -log_log_slope(&ds, &vals));

    let mut order: Vec<(f64, f64)> = cfg.eps.iter().copied().zip(integrals.iter().copied()).collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let growing = order.windows(2).all(|w| w[1].1 > w[0].1);
    r.check("integral grows as eps -> 0", growing, format!("{} values", integrals.len()));
    r.check(
        format!("growth exponent {} +- {}", cfg.expect_exponent, cfg.exponent_tol),
        (exponent - cfg.expect_exponent).abs() <= cfg.exponent_tol,
        format!("measured {exponent:.4}"),
    );
    Ok(r)
}

pub struct MulticenterConfig {
    pub centers: Option<PathBuf>,
    pub k: usize,
    pub c: f64,
    pub seed: u64,
    pub h: f64,
    pub points: usize,
}

fn load_centers(path: &PathBuf) -> CliResult<CenterData> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let cd: CenterData = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: not a centers file: {e}", path.display())))?;
    cd.validate()?;
    Ok(cd)
}

pub fn multicenter(cfg: &MulticenterConfig) -> CliResult<Report> {
    if !(cfg.h > 0.0) || cfg.points < 5 {
        return usage("multicenter needs --h > 0 and --points >= 5");
    }
    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let cd = match &cfg.centers {
        Some(p) => load_centers(p)?,
        None => {
            if cfg.k == 0 || !(cfg.c > 0.0) {
                return usage("random centers need --k >= 1 and C > 0");
            }
            CenterData::random(cfg.k, cfg.c, &mut rng)
        }
    };
    let fam = cd.family();
    let mut r = Report::new(
        "multicenter",
        &["x0", "x1", "x2", "x3", "r_h", "r_h2", "r_h4", "order", "exact_residual", "commutator", "divergence_residual"],
    );
    match &cfg.centers {
        Some(p) => r.meta("centers", p.display().to_string()),
        None => r.meta("k", cfg.k),
    }
    r.meta("C", cd.c);
    r.meta("h", cfg.h);
    r.meta("points", cfg.points);
    r.meta("seed", cfg.seed);

    let sampler = FieldSampler::from_centers(&cd, &fam);
    let pts = admissible_points(&sampler, cd.centroid(), 2.0, cfg.points, &mut rng, |_| cfg.h);
    let scan = order_scan(&sampler, &pts, cfg.h)?;
    for sp in &scan.points {
        let x = sp.x.to_array();
        let exact = kw_residual_exact(&cd, &fam, sp.x)?;
        let comm = commutator_density(&cd, &fam, sp.x)?.norm();
        let div = dastar_phi_multicenter_residual(&cd, &fam, sp.x, cfg.h)?;
        r.row(vec![
            x[0].into(),
            x[1].into(),
            x[2].into(),
            x[3].into(),
            sp.residuals[0].into(),
            sp.residuals[1].into(),
            sp.residuals[2].into(),
            sp.order.into(),
            exact.into(),
            comm.into(),
            div.into(),
        ]);
    }
    r.summary("centers", serde_json::to_string(&cd).map_err(|e| CliError::Failed(e.to_string()))?);
    r.summary("weight (sum of lambda^2)", cd.weight());
    r.summary("offset K in |U|^2 = weight |x - centroid|^2 + K", cd.offset());
    let q = conjectural_instanton(&cd, &fam)?;
    r.summary("instanton number by shell quadrature", q.value);
    r.summary("instanton quadrature error estimate", q.error);
    r.check(
        "4D finite-difference order >= 1.8",
        scan.median_order >= 1.8,
        format!("median order {:.3} over {} points", scan.median_order, scan.points.len()),
    );
    Ok(r)
}

pub struct NahmConfig {
    pub which: NahmSolution,
    pub grid: Grid,
    pub seed: u64,
    pub frame_points: usize,
}

pub fn nahm(cfg: &NahmConfig) -> CliResult<Report> {
    cfg.grid.validate()?;
    if cfg.grid.min <= 0.0 {
        return usage("nahm needs y_min > 0");
    }
    let which = cfg.which;
    let mut r = Report::new("nahm", &["y", "a", "p", "y_p", "pole_residual"]);
    r.meta("which", which.tag());
    cfg.grid.describe(&mut r, "y");
    r.meta("seed", cfg.seed);

    let mut pole_ok = true;
    for row in nahm_table(which, &cfg.grid.points())? {
        let res = nahm_pole_residual(which, row.y)?;
        if row.y <= 1e-2 {
            pole_ok &= res <= 5.0 * row.y;
        }
        r.row(vec![row.y.into(), row.a.into(), row.p.into(), row.y_p.into(), res.into()]);
    }
    r.check("|y p(y) - 1| <= 5y for y <= 1e-2", pole_ok, "checked on every grid point with y <= 1e-2");

    let printed = |y: f64| pullback_profiles(which, y).map_or(f64::NAN, |v| v.1.abs());
    let exact = |y: f64| true_pullback_profiles(which, y).map_or(f64::NAN, |v| v.1.abs());
    let slope = decay_slope(printed, 5.0, 10.0, 101);
    r.summary("decay slope of ln |p| on [5, 10], exact pullback", decay_slope(exact, 5.0, 10.0, 101));
    r.check("decay slope of ln |p| on [5, 10] = -4 +- 0.01", (slope + 4.0).abs() <= 0.01, format!("{slope:.6}"));

    let mut rng = SplitMix64::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    let mut right_worst = 0.0f64;
    for _ in 0..cfg.frame_points {
        let x = Quaternion::from_array(std::array::from_fn(|_| rng.gen_range(-1.0..1.0))).normalized();
        worst = worst.max(frame_decomposition_residual(x)?);
        let dec = frame_decomposition(&right_frame(x)?);
        let im = Ansatz::XbarDx.one_form(1.0, x);
        right_worst = right_worst.max((0..4).map(|j| (im.c[j] - dec[j]).norm()).fold(0.0, f64::max));
    }
    r.summary("frame (x I, x J, x K) decomposition residual", right_worst);
    r.check(
        "Im(x-bar dx) = sum e_a* unit_a for the frame (I x, J x, K x)",
        worst <= 1e-12,
        format!("max residual {worst:.3e} over {} unit quaternions", cfg.frame_points),
    );

    let cy = cylinder_instanton(which);
    r.summary("cylinder instanton number", cy.k_quadrature);
    r.check(
        "cylinder instanton |k| = 1/2 by both paths",
        (cy.k_boundary.abs() - 0.5).abs() < 1e-12 && (cy.k_boundary - cy.k_quadrature).abs() <= 1e-6,
        format!("boundary {:+}, quadrature {:+.10}", cy.k_boundary, cy.k_quadrature),
    );
    Ok(r)
}

pub struct OdeplotConfig {
    pub family: String,
    pub c: f64,
    pub grid: Grid,
    pub trajectory: bool,
    pub tol: f64,
}

pub fn odeplot(cfg: &OdeplotConfig) -> CliResult<Report> {
    cfg.grid.validate()?;
    let fam = single_family(&cfg.family, cfg.c)?;
    if cfg.trajectory {
        trajectory(cfg, &fam)
    } else {
        profile_table(cfg, &fam)
    }
}

fn profile_table(cfg: &OdeplotConfig, fam: &SolutionFamily) -> CliResult<Report> {
    let p = fam.profile();
    let mut r = Report::new("odeplot", &["t", "f", "g", "f_tilde", "g_tilde", "curvature_norm"]);
    r.meta("family", fam.tag());
    r.meta("C", fam.c());
    cfg.grid.describe(&mut r, "t");
    for t in cfg.grid.points() {
        if check_profile(&p, t).is_err() {
            continue;
        }
        let f2 = curvature_norm_sq(fam, t)?;
        r.row(vec![t.into(), p.f(t).into(), p.g(t).into(), p.f_tilde(t).into(), p.g_tilde(t).into(), f2.sqrt().into()]);
    }
    if let SolutionFamily::F1 { c } = *fam {
        if c > 0.0 {
            // |F^C|^2(t) = C^2 R(Ct) with R the C = 1 rational.
            let rational = |t: f64| {
                let s = c * t;
                c * c * 108.0 * (2.0 * s.powi(4) + 2.0 * s.powi(3) + s * s + 2.0 * s + 2.0)
                    / (s * s + 4.0 * s + 1.0).powi(4)
            };
            let mut worst = 0.0f64;
            let mut prev = curvature_norm_sq(fam, 0.0)?;
            let at_zero = prev;
            let mut decreasing = true;
            for t in cfg.grid.points() {
                let v = curvature_norm_sq(fam, t)?;
                worst = worst.max((v - rational(t)).abs() / rational(t));
                decreasing &= v < prev || t <= 0.0;
                prev = v;
            }
            r.check("|F|^2 matches the closed-form rational", worst <= 1e-10, format!("max relative error {worst:.3e}"));
            r.check(
                "|F|^2(0) = 216 C^2",
                (at_zero - 216.0 * c * c).abs() <= 1e-12 * at_zero,
                format!("|F|^2(0) = {at_zero}"),
            );
            r.check("|F| decreases along the grid", decreasing, format!("{} points", cfg.grid.count));
        }
    }
    Ok(r)
}

fn trajectory(cfg: &OdeplotConfig, fam: &SolutionFamily) -> CliResult<Report> {
    if !(cfg.tol > 0.0) {
        return usage("--tol must be positive");
    }
    let lambda = fam.governing_lambda();
    if lambda == 0.0 {
        return usage(format!("{fam} solves the lambda = 0 equations, which have no autonomous form"));
    }
    let p = fam.profile();
    let (s_lo, s_hi) = (cfg.grid.min.ln(), cfg.grid.max.ln());
    if !cfg.grid.log || !s_lo.is_finite() {
        return usage("trajectories need a log grid with t_min > 0");
    }
    let mut cuts: Vec<f64> =
        p.singular_t().into_iter().filter(|&t| t > 0.0).map(f64::ln).filter(|s| *s > s_lo && *s < s_hi).collect();
    cuts.sort_by(f64::total_cmp);
    let mut edges = vec![s_lo];
    for s in cuts {
        edges.push(s - 0.3);
        edges.push(s + 0.3);
    }
    edges.push(s_hi);

    let mut r = Report::new("odeplot", &["segment", "s", "u_tilde", "v_tilde", "first_integral"]);
    r.meta("family", fam.tag());
    r.meta("C", fam.c());
    r.meta("lambda", lambda);
    cfg.grid.describe(&mut r, "t");
    r.meta("tol", cfg.tol);

    let f1_orbit = matches!(fam, SolutionFamily::F1 { c } if *c > 0.0);
    let (mut drift, mut orbit, mut level) = (0.0f64, 0.0f64, 0.0f64);
    let mut blown = 0usize;
    let mut segments = 0usize;
    for pair in edges.chunks(2) {
        let (a, b) = (pair[0], pair[1]);
        if b - a < 0.1 {
            continue;
        }
        let traj = integrate(lambda, AutonomousState::from_profile(&p, a), b, cfg.tol)?;
        segments += 1;
        blown += traj.blown_up as usize;
        drift = drift.max(traj.max_first_integral_drift());
        for (st, i) in traj.samples.iter().zip(&traj.first_integral) {
            if f1_orbit {
                orbit = orbit.max(cubic_orbit_residual(st).abs());
                level = level.max((first_integral(lambda, st)? - 1.0 / 12.0).abs());
            }
            r.row(vec![segments.into(), st.s.into(), st.u.into(), st.v.into(), (*i).into()]);
        }
    }
    if segments == 0 {
        return usage("no integrable segment in the requested range");
    }
    r.check(
        "first integral conserved to 1e-8 without blow-up",
        drift <= 1e-8 && blown == 0,
        format!("max drift {drift:.3e} over {segments} segments, {blown} blew up"),
    );
    if f1_orbit {
        r.check(
            "F1 orbit: |I - 1/12| <= 1e-8 and cubic orbit residual <= 1e-8",
            level <= 1e-8 && orbit <= 1e-8,
            format!("max |I - 1/12| = {level:.3e}, max cubic residual = {orbit:.3e}"),
        );
    }
    Ok(r)
}
