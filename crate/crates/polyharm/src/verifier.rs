//! Sampling-based certification of r-harmonicity, isoparametricity and
//! eigenfunction claims, with branch-safe domain handling and
//! machine-readable reports.
//!
//! "Vanishes" and "does not vanish identically" are operationalized over a
//! seeded low-discrepancy sample of an open box: a pass requires the top
//! residual below `tol_zero * scale` and the previous level above
//! `tol_nonzero * scale`, where the scale is the largest tension-field
//! magnitude seen across the whole sample. For real-analytic functions a
//! box sample detects non-vanishing up to measure-zero flukes; different
//! seeds give independent draws.
//!
//! Every passing r-harmonic verdict additionally cross-checks a handful of
//! samples against the finite-difference oracle; disagreement demotes the
//! verdict to `inconclusive`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constructors::{golden_grid, poly_eval_c, IsoparametricPair};
use crate::error::{Error, Result};
use crate::expr::FieldExpr;
use crate::groups::{GroupSpec, Point};
use crate::operators::{eval_jet, tau_fd, tau_iter, TauCoefficients, DEFAULT_FD_STEP};

/// Default number of sample points.
pub const DEFAULT_SAMPLES: usize = 200;
/// Default sampling seed.
pub const DEFAULT_SEED: u64 = 7;
/// Default distance every branch-node argument must keep from its cut.
pub const DEFAULT_GUARD_MARGIN: f64 = 0.05;
/// Default zero tolerance (relative to the sample scale).
pub const DEFAULT_TOL_ZERO: f64 = 1e-8;
/// Default non-vanishing threshold (relative to the sample scale).
pub const DEFAULT_TOL_NONZERO: f64 = 1e-3;
/// Default isoparametric/eigenfunction identity tolerance.
pub const DEFAULT_TOL_ISO: f64 = 1e-9;
/// Oracle agreement threshold for the pass-verdict spot check.
pub const ORACLE_REL_TOL: f64 = 1e-5;
const ORACLE_POINTS: usize = 5;

/// A deterministic sampling recipe: seeded low-discrepancy points in a box,
/// filtered by the branch guards of the function under test.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub count: usize,
    /// Per-coordinate closed intervals, in jet-slot order `t…, ξ?, x…`.
    pub intervals: Vec<(f64, f64)>,
    pub guard_margin: f64,
}

impl SamplePlan {
    /// The default box: `t, ξ ∈ [-1, 1]`, `x ∈ [0.2, 2]` — coordinates stay
    /// small so exponential coefficients remain well-conditioned, and the
    /// positive x-box clears the cuts of the catalog functions.
    pub fn default_for(spec: &GroupSpec) -> SamplePlan {
        let mut intervals = vec![(-1.0, 1.0); spec.m()];
        if spec.has_xi() {
            intervals.push((-1.0, 1.0));
        }
        intervals.extend(std::iter::repeat((0.2, 2.0)).take(spec.x_dim()));
        SamplePlan {
            seed: DEFAULT_SEED,
            count: DEFAULT_SAMPLES,
            intervals,
            guard_margin: DEFAULT_GUARD_MARGIN,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> SamplePlan {
        self.seed = seed;
        self
    }

    pub fn with_count(mut self, count: usize) -> SamplePlan {
        self.count = count;
        self
    }

    pub fn with_intervals(mut self, intervals: Vec<(f64, f64)>) -> SamplePlan {
        self.intervals = intervals;
        self
    }
}

/// A branch constraint derived from one log/sqrt/power/arsinh node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchGuard {
    /// Child-index chain from the root to the node.
    pub path: Vec<usize>,
    pub primitive: &'static str,
}

/// All branch constraints a function imposes on its sampling domain.
pub fn branch_guards(field: &FieldExpr) -> Vec<BranchGuard> {
    let mut out = Vec::new();
    let mut path = Vec::new();
    collect_guards(field, &mut path, &mut out);
    out
}

fn collect_guards(e: &FieldExpr, path: &mut Vec<usize>, out: &mut Vec<BranchGuard>) {
    let primitive = match e {
        FieldExpr::Log(_) => Some("log"),
        FieldExpr::Sqrt(_) => Some("sqrt"),
        FieldExpr::PowComplex(_, _) => Some("pow_complex"),
        FieldExpr::Arsinh(_) => Some("arsinh"),
        FieldExpr::PowInt(_, p) if *p < 0 => Some("pow_int"),
        _ => None,
    };
    if let Some(primitive) = primitive {
        out.push(BranchGuard { path: path.clone(), primitive });
    }
    for (i, child) in e.children().iter().enumerate() {
        path.push(i);
        collect_guards(child, path, out);
        path.pop();
    }
}

/// Draw `plan.count` points from a seeded low-discrepancy sequence in the
/// box, keeping only points where every branch guard of `field` holds with
/// the plan's margin. Fails if fewer than 10% of candidates are admissible.
pub fn sample_points(
    spec: &GroupSpec,
    plan: &SamplePlan,
    field: Option<&FieldExpr>,
) -> Result<Vec<Point>> {
    if plan.intervals.len() != spec.jet_dim() {
        return Err(Error::Argument(format!(
            "plan has {} intervals, spec needs {}",
            plan.intervals.len(),
            spec.jet_dim()
        )));
    }
    if plan.count == 0 {
        return Err(Error::Argument("sample count must be positive".into()));
    }
    let budget = plan.count * 10;
    let raw = golden_grid(spec.jet_dim(), budget, plan.seed);
    let mut points = Vec::with_capacity(plan.count);
    for unit in raw {
        if points.len() == plan.count {
            break;
        }
        let flat: Vec<f64> = unit
            .iter()
            .zip(&plan.intervals)
            .map(|(u, (lo, hi))| lo + (hi - lo) * u)
            .collect();
        let point = Point::from_flat(spec, &flat)?;
        if let Some(field) = field {
            let lookup = crate::operators::make_lookup(spec, &flat);
            if field.eval_complex_guarded(&lookup, plan.guard_margin).is_err() {
                continue;
            }
        }
        points.push(point);
    }
    if points.len() < plan.count {
        return Err(Error::Sampling(format!(
            "only {} of {} requested points satisfy the branch guards (acceptance below 10%); \
             enlarge the box or relax the guards",
            points.len(),
            plan.count
        )));
    }
    Ok(points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// The claim a report certifies, with its claim-specific data.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "claim", rename_all = "snake_case")]
pub enum ClaimInfo {
    RHarmonic { order: usize },
    Isoparametric { phi_poly: Vec<[f64; 2]>, psi_poly: Vec<[f64; 2]> },
    Eigenfunction { lambda: [f64; 2], mu: [f64; 2] },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_zero: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol_nonzero: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleCheck {
    pub points: usize,
    pub max_rel_dev: f64,
    pub agreed: bool,
}

/// Identification labels a caller attaches to a report.
#[derive(Debug, Clone, Default)]
pub struct ReportMeta {
    pub spec_id: String,
    pub function_id: String,
    pub erratum_flags: Vec<String>,
}

impl ReportMeta {
    pub fn new(spec_id: impl Into<String>, function_id: impl Into<String>) -> ReportMeta {
        ReportMeta {
            spec_id: spec_id.into(),
            function_id: function_id.into(),
            erratum_flags: Vec::new(),
        }
    }

    pub fn with_flags(mut self, flags: Vec<String>) -> ReportMeta {
        self.erratum_flags = flags;
        self
    }
}

/// Machine-readable verification result. Deterministic for fixed inputs:
/// no timestamps, sampling fixed by the seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    #[serde(flatten)]
    pub claim: ClaimInfo,
    pub spec_id: String,
    pub function_id: String,
    pub seed: u64,
    pub samples: usize,
    /// τ^r values per sample (r-harmonic claims) or per-sample residuals of
    /// the first identity (isoparametric/eigenfunction claims).
    pub residuals: Vec<[f64; 2]>,
    /// Residuals of the κ identity (isoparametric/eigenfunction claims).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa_residuals: Option<Vec<[f64; 2]>>,
    /// |τ^{r-1}| per sample (r-harmonic claims).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prev_magnitudes: Option<Vec<f64>>,
    pub max_residual: f64,
    pub mean_residual: f64,
    pub scale: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonvanishing_stat: Option<f64>,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleCheck>,
    pub verdict: Verdict,
    pub erratum_flags: Vec<String>,
    pub diagnostics: Vec<String>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("report: {e}")))
    }
}

/// Certify `τ^r(field) = 0` with `τ^{r-1}` not vanishing identically.
/// The finite-difference oracle spot-checks five samples; use
/// [`verify_r_harmonic_full_oracle`] to cross-check every sample.
pub fn verify_r_harmonic(
    spec: &GroupSpec,
    field: &FieldExpr,
    r: usize,
    plan: &SamplePlan,
    tol_zero: f64,
    tol_nonzero: f64,
    meta: &ReportMeta,
) -> Result<Report> {
    verify_r_harmonic_impl(spec, field, r, plan, tol_zero, tol_nonzero, meta, false)
}

/// [`verify_r_harmonic`] with the oracle run at every sample point.
pub fn verify_r_harmonic_full_oracle(
    spec: &GroupSpec,
    field: &FieldExpr,
    r: usize,
    plan: &SamplePlan,
    tol_zero: f64,
    tol_nonzero: f64,
    meta: &ReportMeta,
) -> Result<Report> {
    verify_r_harmonic_impl(spec, field, r, plan, tol_zero, tol_nonzero, meta, true)
}

#[allow(clippy::too_many_arguments)]
fn verify_r_harmonic_impl(
    spec: &GroupSpec,
    field: &FieldExpr,
    r: usize,
    plan: &SamplePlan,
    tol_zero: f64,
    tol_nonzero: f64,
    meta: &ReportMeta,
    full_oracle: bool,
) -> Result<Report> {
    if r == 0 {
        return Err(Error::Argument("order must be at least 1".into()));
    }
    field.validate_for(spec)?;
    let points = sample_points(spec, plan, Some(field))?;
    let mut diagnostics = Vec::new();

    let mut evaluations = Vec::with_capacity(points.len());
    let mut kept_points = Vec::with_capacity(points.len());
    let mut failures = 0usize;
    for point in &points {
        match tau_iter(spec, field, point, r) {
            Ok(eval) => {
                evaluations.push(eval);
                kept_points.push(point.clone());
            }
            Err(Error::Domain(msg)) => {
                failures += 1;
                if diagnostics.len() < 3 {
                    diagnostics.push(format!("domain error at {point:?}: {msg}"));
                }
            }
            Err(other) => return Err(other),
        }
    }
    if failures * 2 > points.len() {
        diagnostics.push(format!(
            "{failures} of {} samples hit domain errors; claim cannot be assessed",
            points.len()
        ));
        return Ok(Report {
            schema_version: 1,
            claim: ClaimInfo::RHarmonic { order: r },
            spec_id: meta.spec_id.clone(),
            function_id: meta.function_id.clone(),
            seed: plan.seed,
            samples: points.len(),
            residuals: vec![],
            kappa_residuals: None,
            prev_magnitudes: None,
            max_residual: f64::NAN,
            mean_residual: f64::NAN,
            scale: f64::NAN,
            nonvanishing_stat: None,
            tolerances: Tolerances { tol_zero, tol_nonzero: Some(tol_nonzero) },
            oracle: None,
            verdict: Verdict::Inconclusive,
            erratum_flags: meta.erratum_flags.clone(),
            diagnostics,
        });
    }

    let scale = evaluations
        .iter()
        .flat_map(|e| e.values.iter())
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    let residuals: Vec<[f64; 2]> = evaluations.iter().map(|e| {
        let v = e.values[r];
        [v.re, v.im]
    }).collect();
    let prev: Vec<f64> = evaluations.iter().map(|e| e.values[r - 1].norm()).collect();
    let max_residual = evaluations.iter().map(|e| e.values[r].norm()).fold(0.0f64, f64::max);
    let mean_residual = if evaluations.is_empty() {
        0.0
    } else {
        evaluations.iter().map(|e| e.values[r].norm()).sum::<f64>() / evaluations.len() as f64
    };
    let nonvanishing = prev.iter().copied().fold(0.0f64, f64::max);

    let zero_ok = max_residual <= tol_zero * scale;
    let nonzero_ok = nonvanishing >= tol_nonzero * scale;
    let mut verdict = if zero_ok && nonzero_ok { Verdict::Pass } else { Verdict::Fail };
    if !zero_ok {
        diagnostics.push(format!(
            "max |tau^{r}| = {max_residual:.3e} exceeds {:.3e}",
            tol_zero * scale
        ));
    }
    if !nonzero_ok {
        diagnostics.push(format!(
            "max |tau^{}| = {nonvanishing:.3e} is below the non-vanishing threshold {:.3e}",
            r - 1,
            tol_nonzero * scale
        ));
    }

    // independent finite-difference spot check of the first tau application
    let oracle = {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed ^ 0x0FAC_1E00);
        let mut max_rel = 0.0f64;
        let mut checked = 0usize;
        if !kept_points.is_empty() {
            let indices: Vec<usize> = if full_oracle {
                (0..kept_points.len()).collect()
            } else {
                (0..ORACLE_POINTS).map(|_| rng.gen_range(0..kept_points.len())).collect()
            };
            for idx in indices {
                match tau_fd(spec, field, &kept_points[idx], DEFAULT_FD_STEP) {
                    Ok(fd) => {
                        let jet = evaluations[idx].values[1];
                        let rel = (fd - jet).norm() / scale.max(1.0);
                        max_rel = max_rel.max(rel);
                        checked += 1;
                    }
                    Err(Error::Domain(_)) => {}
                    Err(other) => return Err(other),
                }
            }
        }
        let agreed = max_rel <= ORACLE_REL_TOL;
        if !agreed {
            diagnostics.push(format!(
                "finite-difference oracle deviates by {max_rel:.3e} (relative); verdict demoted"
            ));
            if verdict == Verdict::Pass {
                verdict = Verdict::Inconclusive;
            }
        }
        Some(OracleCheck { points: checked, max_rel_dev: max_rel, agreed })
    };

    Ok(Report {
        schema_version: 1,
        claim: ClaimInfo::RHarmonic { order: r },
        spec_id: meta.spec_id.clone(),
        function_id: meta.function_id.clone(),
        seed: plan.seed,
        samples: kept_points.len(),
        residuals,
        kappa_residuals: None,
        prev_magnitudes: Some(prev),
        max_residual,
        mean_residual,
        scale,
        nonvanishing_stat: Some(nonvanishing),
        tolerances: Tolerances { tol_zero, tol_nonzero: Some(tol_nonzero) },
        oracle,
        verdict,
        erratum_flags: meta.erratum_flags.clone(),
        diagnostics,
    })
}

/// Certify `τ(φ) = Φ∘φ` and `κ(φ,φ) = Ψ∘φ` for a pair.
pub fn verify_isoparametric(
    spec: &GroupSpec,
    pair: &IsoparametricPair,
    plan: &SamplePlan,
    tol: f64,
    meta: &ReportMeta,
) -> Result<Report> {
    let claim = ClaimInfo::Isoparametric {
        phi_poly: pair.big_phi.iter().map(|c| [c.re, c.im]).collect(),
        psi_poly: pair.big_psi.iter().map(|c| [c.re, c.im]).collect(),
    };
    verify_identity_pair(spec, &pair.phi, &pair.big_phi, &pair.big_psi, claim, plan, tol, meta)
}

/// Certify the eigenfunction identities `τφ = λφ`, `κ(φ,φ) = μφ²` — the
/// monomial special case of the isoparametric check.
pub fn verify_eigenfunction(
    spec: &GroupSpec,
    field: &FieldExpr,
    lambda: Complex64,
    mu: Complex64,
    plan: &SamplePlan,
    tol: f64,
    meta: &ReportMeta,
) -> Result<Report> {
    let phi_poly = vec![Complex64::ZERO, lambda];
    let psi_poly = vec![Complex64::ZERO, Complex64::ZERO, mu];
    let claim = ClaimInfo::Eigenfunction { lambda: [lambda.re, lambda.im], mu: [mu.re, mu.im] };
    verify_identity_pair(spec, field, &phi_poly, &psi_poly, claim, plan, tol, meta)
}

#[allow(clippy::too_many_arguments)]
fn verify_identity_pair(
    spec: &GroupSpec,
    phi: &FieldExpr,
    big_phi: &[Complex64],
    big_psi: &[Complex64],
    claim: ClaimInfo,
    plan: &SamplePlan,
    tol: f64,
    meta: &ReportMeta,
) -> Result<Report> {
    phi.validate_for(spec)?;
    let points = sample_points(spec, plan, Some(phi))?;
    let mut diagnostics = Vec::new();
    let mut tau_res = Vec::with_capacity(points.len());
    let mut kappa_res = Vec::with_capacity(points.len());
    let mut scale = 0.0f64;
    let mut failures = 0usize;
    for point in &points {
        let coeffs = TauCoefficients::build(spec, point, 2)?;
        let jet = match eval_jet(phi, spec, point, 2) {
            Ok(j) => j,
            Err(Error::Domain(msg)) => {
                failures += 1;
                if diagnostics.len() < 3 {
                    diagnostics.push(format!("domain error at {point:?}: {msg}"));
                }
                continue;
            }
            Err(other) => return Err(other),
        };
        let phi0 = jet.value();
        let tau_val = coeffs.apply(&jet)?.value();
        let kappa_val = coeffs.kappa_scalar(&jet, &jet)?;
        let want_tau = poly_eval_c(big_phi, phi0);
        let want_kappa = poly_eval_c(big_psi, phi0);
        for v in [tau_val, want_tau, kappa_val, want_kappa] {
            scale = scale.max(v.norm());
        }
        let dt = tau_val - want_tau;
        let dk = kappa_val - want_kappa;
        tau_res.push([dt.re, dt.im]);
        kappa_res.push([dk.re, dk.im]);
    }
    if failures * 2 > points.len() {
        diagnostics.push(format!(
            "{failures} of {} samples hit domain errors; claim cannot be assessed",
            points.len()
        ));
    }
    let max_residual = tau_res
        .iter()
        .chain(kappa_res.iter())
        .map(|[re, im]| re.hypot(*im))
        .fold(0.0f64, f64::max);
    let count = tau_res.len().max(1);
    let mean_residual = tau_res
        .iter()
        .chain(kappa_res.iter())
        .map(|[re, im]| re.hypot(*im))
        .sum::<f64>()
        / (2 * count) as f64;
    let verdict = if failures * 2 > points.len() {
        Verdict::Inconclusive
    } else if max_residual <= tol * scale.max(1e-300) {
        Verdict::Pass
    } else {
        diagnostics.push(format!(
            "max identity residual {max_residual:.3e} exceeds {:.3e}",
            tol * scale
        ));
        Verdict::Fail
    };
    Ok(Report {
        schema_version: 1,
        claim,
        spec_id: meta.spec_id.clone(),
        function_id: meta.function_id.clone(),
        seed: plan.seed,
        samples: tau_res.len(),
        residuals: tau_res,
        kappa_residuals: Some(kappa_res),
        prev_magnitudes: None,
        max_residual,
        mean_residual,
        scale,
        nonvanishing_stat: None,
        tolerances: Tolerances { tol_zero: tol, tol_nonzero: None },
        oracle: None,
        verdict,
        erratum_flags: meta.erratum_flags.clone(),
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::constructors::isoparametric_from_eigenvector;
    use crate::groups::{build_spec, TargetKind};
    use crate::linalg::{common_eigenvectors, RealMatrix};
    use std::collections::BTreeMap;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sol3() -> GroupSpec {
        build_spec(
            TargetKind::AbelianTarget,
            1,
            2,
            vec![RealMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.])],
        )
        .unwrap()
    }

    fn sol3_arsinh(r: usize) -> FieldExpr {
        let g = catalog::lookup("Sol3", &BTreeMap::new()).unwrap();
        catalog::builtin(&g, "sol3-arsinh", r, &[Complex64::ONE, Complex64::ONE])
            .unwrap()
            .expr
    }

    #[test]
    fn sampling_is_deterministic_and_guarded() {
        let spec = sol3();
        let plan = SamplePlan::default_for(&spec);
        let field = sol3_arsinh(1);
        let a = sample_points(&spec, &plan, Some(&field)).unwrap();
        let b = sample_points(&spec, &plan, Some(&field)).unwrap();
        assert_eq!(a.len(), plan.count);
        assert_eq!(a, b, "same seed must give identical points");
        for p in &a {
            assert!(p.x[0] >= 0.2 && p.x[0] <= 2.0);
        }
        let other = sample_points(&spec, &plan.clone().with_seed(8), Some(&field)).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn sampling_guard_starvation_errors() {
        let spec = sol3();
        // log(x1) with an all-negative x1 box: every point violates the guard
        let field = FieldExpr::coord_x(0).log();
        let plan = SamplePlan::default_for(&spec)
            .with_intervals(vec![(-1.0, 1.0), (-2.0, -1.0), (0.2, 2.0)]);
        let err = sample_points(&spec, &plan, Some(&field)).unwrap_err();
        assert!(matches!(err, Error::Sampling(_)), "{err}");
    }

    #[test]
    fn branch_guards_are_collected() {
        let field = sol3_arsinh(2);
        let guards = branch_guards(&field);
        assert!(guards.iter().any(|g| g.primitive == "arsinh"));
        let plain = FieldExpr::coord_x(0).powi(3);
        assert!(branch_guards(&plain).is_empty());
    }

    #[test]
    fn verify_constant_field_passes_r1() {
        let spec = sol3();
        let plan = SamplePlan::default_for(&spec).with_count(50);
        let field = FieldExpr::constant(c(2.0, 1.0));
        let report = verify_r_harmonic(
            &spec, &field, 1, &plan, DEFAULT_TOL_ZERO, DEFAULT_TOL_NONZERO,
            &ReportMeta::new("Sol3", "const"),
        )
        .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.max_residual, 0.0);
    }

    #[test]
    fn verify_arsinh_ladder_verdicts() {
        let spec = sol3();
        let plan = SamplePlan::default_for(&spec).with_count(60);
        // r = 2 passes at order 2 and fails at order 1 (it is only biharmonic)
        let field = sol3_arsinh(2);
        let pass = verify_r_harmonic(&spec, &field, 2, &plan, DEFAULT_TOL_ZERO,
            DEFAULT_TOL_NONZERO, &ReportMeta::new("Sol3", "sol3-arsinh")).unwrap();
        assert_eq!(pass.verdict, Verdict::Pass, "{:?}", pass.diagnostics);
        let fail = verify_r_harmonic(&spec, &field, 1, &plan, DEFAULT_TOL_ZERO,
            DEFAULT_TOL_NONZERO, &ReportMeta::new("Sol3", "sol3-arsinh")).unwrap();
        assert_eq!(fail.verdict, Verdict::Fail);
    }

    #[test]
    fn monotonicity_forbids_pass_above_the_proper_order() {
        // passing at r means failing properness at r+1 under the same plan
        let spec = sol3();
        let plan = SamplePlan::default_for(&spec).with_count(40);
        for r in 1..=2usize {
            let field = sol3_arsinh(r);
            let at_r = verify_r_harmonic(&spec, &field, r, &plan, DEFAULT_TOL_ZERO,
                DEFAULT_TOL_NONZERO, &ReportMeta::default()).unwrap();
            assert_eq!(at_r.verdict, Verdict::Pass);
            let above = verify_r_harmonic(&spec, &field, r + 1, &plan, DEFAULT_TOL_ZERO,
                DEFAULT_TOL_NONZERO, &ReportMeta::default()).unwrap();
            assert_ne!(above.verdict, Verdict::Pass, "tau^{r} vanishes, properness must fail");
        }
    }

    #[test]
    fn verdicts_are_scale_invariant() {
        let spec = sol3();
        let plan = SamplePlan::default_for(&spec).with_count(40);
        for r in [1usize, 2] {
            let field = sol3_arsinh(r);
            let scaled = field.clone().scaled(c(3.7e4, -1.2e3));
            for order in [r, r + 1] {
                let a = verify_r_harmonic(&spec, &field, order, &plan, DEFAULT_TOL_ZERO,
                    DEFAULT_TOL_NONZERO, &ReportMeta::default()).unwrap();
                let b = verify_r_harmonic(&spec, &scaled, order, &plan, DEFAULT_TOL_ZERO,
                    DEFAULT_TOL_NONZERO, &ReportMeta::default()).unwrap();
                assert_eq!(a.verdict, b.verdict, "order {order}");
            }
        }
    }

    #[test]
    fn report_is_bit_deterministic() {
        let spec = sol3();
        let plan = SamplePlan::default_for(&spec).with_count(30);
        let field = sol3_arsinh(1);
        let meta = ReportMeta::new("Sol3", "sol3-arsinh");
        let a = verify_r_harmonic(&spec, &field, 1, &plan, DEFAULT_TOL_ZERO,
            DEFAULT_TOL_NONZERO, &meta).unwrap();
        let b = verify_r_harmonic(&spec, &field, 1, &plan, DEFAULT_TOL_ZERO,
            DEFAULT_TOL_NONZERO, &meta).unwrap();
        assert_eq!(a.to_json(), b.to_json());
    }

    #[test]
    fn report_round_trips_through_json() {
        let spec = sol3();
        let plan = SamplePlan::default_for(&spec).with_count(20);
        let report = verify_r_harmonic(&spec, &sol3_arsinh(1), 1, &plan, DEFAULT_TOL_ZERO,
            DEFAULT_TOL_NONZERO, &ReportMeta::new("Sol3", "sol3-arsinh")).unwrap();
        let back = Report::from_json(&report.to_json()).unwrap();
        assert_eq!(back.to_json(), report.to_json());
        assert!(matches!(back.claim, ClaimInfo::RHarmonic { order: 1 }));
    }

    #[test]
    fn isoparametric_identities_and_perturbation() {
        let spec = sol3();
        let pairs = common_eigenvectors(spec.family()).unwrap();
        let plus = pairs.iter().find(|p| (p.lambda[0].re - 1.0).abs() < 1e-8).unwrap();
        let iso = isoparametric_from_eigenvector(&spec, plus).unwrap();
        let plan = SamplePlan::default_for(&spec).with_count(60);
        let report = verify_isoparametric(&spec, &iso, &plan, DEFAULT_TOL_ISO,
            &ReportMeta::new("Sol3", "phi1")).unwrap();
        assert_eq!(report.verdict, Verdict::Pass, "{:?}", report.diagnostics);

        // perturbing Psi by 1e-3 must flip the verdict
        let mut bad = iso.clone();
        bad.big_psi[0] += c(1e-3, 0.0);
        let report = verify_isoparametric(&spec, &bad, &plan, DEFAULT_TOL_ISO,
            &ReportMeta::new("Sol3", "phi1-perturbed")).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);
    }

    #[test]
    fn eigenfunction_check_rejects_isoparametric_offset() {
        // e^{-t} x1 satisfies κ = φ² + 1, so the pure eigenfunction claim
        // (λ = 1, μ = 1) must fail on the κ side.
        let spec = sol3();
        let phi = FieldExpr::mul(vec![
            FieldExpr::coord_t(0).neg().exp(),
            FieldExpr::coord_x(0),
        ]);
        let plan = SamplePlan::default_for(&spec).with_count(40);
        let report = verify_eigenfunction(&spec, &phi, Complex64::ONE, Complex64::ONE,
            &plan, DEFAULT_TOL_ISO, &ReportMeta::default()).unwrap();
        assert_eq!(report.verdict, Verdict::Fail);

        // constant field with λ = μ = 0 passes
        let report = verify_eigenfunction(&spec, &FieldExpr::constant(c(1.0, 2.0)),
            Complex64::ZERO, Complex64::ZERO, &plan, DEFAULT_TOL_ISO, &ReportMeta::default())
            .unwrap();
        assert_eq!(report.verdict, Verdict::Pass);
    }
}
