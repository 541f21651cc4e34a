//! Command-line surface: catalog browsing, function construction,
//! verification, the jet-vs-finite-difference oracle and the acceptance
//! selftest.
//!
//! Exit codes: 0 success / verification pass, 1 verification fail,
//! 2 usage or validation error, 3 numerical or domain error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::json;

use polyharm::catalog::{self, BuiltinClaim};
use polyharm::constructors::{
    eigenfunction_isotropic, isoparametric_from_eigenvector, ladder_for_pair, quadratic_harmonic,
    re_im_parts, separated_product, t_power_factor, IsoparametricPair,
};
use polyharm::expr::FieldExpr;
use polyharm::groups::{spec_from_json, GroupSpec, Point};
use polyharm::linalg::common_eigenvectors;
use polyharm::operators::{tau_fd, tau_iter, DEFAULT_FD_STEP};
use polyharm::verifier::{
    verify_eigenfunction, verify_isoparametric, verify_r_harmonic, Report, ReportMeta, SamplePlan,
    Verdict, DEFAULT_TOL_NONZERO, DEFAULT_TOL_ZERO,
};
use polyharm::{Error, Result};

#[derive(Parser)]
#[command(name = "polyharm", version, about = "r-harmonic and complex isoparametric functions on R^m x R^n and R^m x H^(2n+1)", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Browse the built-in group registry
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Build a function family and write it as a function file
    Construct(ConstructArgs),
    /// Verify an r-harmonicity, isoparametricity or eigenfunction claim
    Verify(VerifyArgs),
    /// Compare jet and finite-difference evaluations of tau at one point
    Oracle {
        #[command(subcommand)]
        what: OracleWhat,
    },
    /// Run the acceptance suite
    Selftest {
        /// Run a single criterion (1..=10) instead of the whole suite
        #[arg(long)]
        criterion: Option<usize>,
    },
}

#[derive(Subcommand)]
enum CatalogAction {
    /// List registered groups with parameters and builtins
    List,
    /// Show one group: family matrices, drift vector, builtins
    Show {
        name: String,
        #[command(flatten)]
        params: GroupParams,
    },
}

#[derive(Subcommand)]
enum OracleWhat {
    /// tau via jets next to tau via central differences
    Tau {
        #[command(flatten)]
        group: GroupSelect,
        /// Function file or builtin:<id>
        #[arg(long)]
        function: String,
        /// Order the builtin is constructed at (builtins only)
        #[arg(long, default_value_t = 1)]
        builtin_r: usize,
        /// Comma-separated coordinates in the order t…, xi (Heisenberg), x…
        #[arg(long)]
        point: String,
        /// Finite-difference step
        #[arg(long, default_value_t = DEFAULT_FD_STEP)]
        step: f64,
    },
}

#[derive(Args, Clone)]
struct GroupParams {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
}

impl GroupParams {
    fn to_map(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        if let Some(a) = self.alpha {
            map.insert("alpha".to_string(), a);
        }
        if let Some(b) = self.beta {
            map.insert("beta".to_string(), b);
        }
        if let Some(g) = self.gamma {
            map.insert("gamma".to_string(), g);
        }
        map
    }
}

#[derive(Args, Clone)]
struct GroupSelect {
    /// Registered group name (see `catalog list`) or a group-spec JSON file
    #[arg(long)]
    group: String,
    #[command(flatten)]
    params: GroupParams,
}

struct ResolvedGroup {
    spec: GroupSpec,
    catalog: Option<catalog::CatalogGroup>,
    id: String,
}

impl GroupSelect {
    fn resolve(&self) -> Result<ResolvedGroup> {
        let params = self.params.to_map();
        if catalog::list_names().iter().any(|n| n.eq_ignore_ascii_case(&self.group)) {
            let entry = catalog::lookup(&self.group, &params)?;
            let id = if params.is_empty() {
                entry.name.clone()
            } else {
                let ps: Vec<String> = params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                format!("{} ({})", entry.name, ps.join(", "))
            };
            return Ok(ResolvedGroup { spec: entry.spec.clone(), catalog: Some(entry), id });
        }
        let path = PathBuf::from(&self.group);
        if !path.exists() {
            return Err(Error::Lookup(format!(
                "'{}' is neither a registered group (try `catalog list`) nor an existing file",
                self.group
            )));
        }
        if !params.is_empty() {
            return Err(Error::Validation(
                "parameter flags apply only to registered catalog groups".into(),
            ));
        }
        let text = std::fs::read_to_string(&path)?;
        let spec = spec_from_json(&text)?;
        Ok(ResolvedGroup { spec, catalog: None, id: format!("file:{}", self.group) })
    }
}

#[derive(Args)]
struct ConstructArgs {
    #[command(flatten)]
    group: GroupSelect,
    /// eigenvector | isotropic | re-im | t-factor | quadratic | ladder | product
    #[arg(long)]
    method: String,
    /// Claimed polyharmonic order
    #[arg(long, default_value_t = 1)]
    r: usize,
    /// Comma-separated coefficients, each `a` or `a+bi` (defaults to ones)
    #[arg(long, default_value = "")]
    coeffs: String,
    /// Which verified common eigendirection to use (eigenvector/isotropic/re-im)
    #[arg(long, default_value_t = 0)]
    eigen_index: usize,
    /// Free exponent vector for the isotropic method, e.g. "0.5,0.5+1i"
    #[arg(long)]
    nu: Option<String>,
    /// re or im (re-im method)
    #[arg(long, default_value = "re")]
    part: String,
    /// 1-based t-coordinate index (t-factor/product methods)
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// JSON file with {a, b, v, B} for the quadratic method
    #[arg(long)]
    data: Option<PathBuf>,
    /// Second factor for the product method: function file or builtin:<id>
    #[arg(long)]
    psi: Option<String>,
    /// Phi polynomial coefficients, low-to-high (ladder method)
    #[arg(long)]
    phi_poly: Option<String>,
    /// Psi polynomial coefficients, low-to-high (ladder method)
    #[arg(long)]
    psi_poly: Option<String>,
    /// Claimed order of the second factor (product method)
    #[arg(long)]
    psi_order: Option<usize>,
    /// Output function file
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    group: GroupSelect,
    /// Function file or builtin:<id>
    #[arg(long)]
    function: String,
    /// Claimed polyharmonic order (r-harmonic claims)
    #[arg(long)]
    order: Option<usize>,
    /// Order to construct a builtin at, when different from --order
    #[arg(long)]
    builtin_r: Option<usize>,
    /// Coefficients for builtins, each `a` or `a+bi`
    #[arg(long, default_value = "")]
    coeffs: String,
    /// r-harmonic | isoparametric | eigenfunction
    #[arg(long, default_value = "r-harmonic")]
    claim: String,
    /// Phi polynomial, low-to-high (isoparametric claim)
    #[arg(long)]
    phi_poly: Option<String>,
    /// Psi polynomial, low-to-high (isoparametric claim)
    #[arg(long)]
    psi_poly: Option<String>,
    /// lambda (eigenfunction claim), `a` or `a+bi`
    #[arg(long)]
    lambda: Option<String>,
    /// mu (eigenfunction claim)
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol_zero: Option<f64>,
    #[arg(long)]
    tol_nonzero: Option<f64>,
    /// Identity tolerance for isoparametric/eigenfunction claims
    #[arg(long)]
    tol: Option<f64>,
    /// Cross-check every sample against the finite-difference oracle
    /// instead of the default five-point spot check
    #[arg(long, default_value_t = false)]
    full_oracle: bool,
    /// Report file (JSON); without it the report goes to stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_complex(text: &str) -> Result<Complex64> {
    let t = text.trim().replace(' ', "");
    if t.is_empty() {
        return Err(Error::Parse("empty complex literal".into()));
    }
    if let Ok(re) = t.parse::<f64>() {
        return Ok(Complex64::new(re, 0.0));
    }
    if let Some(body) = t.strip_suffix('i') {
        // a+bi / a-bi: split at the last sign that is not an exponent sign
        let bytes = body.as_bytes();
        for pos in (1..bytes.len()).rev() {
            let ch = bytes[pos] as char;
            if (ch == '+' || ch == '-') && !matches!(bytes[pos - 1] as char, 'e' | 'E') {
                let re: f64 = body[..pos]
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad complex literal '{text}'")))?;
                let im_str = &body[pos..];
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str
                        .parse()
                        .map_err(|_| Error::Parse(format!("bad complex literal '{text}'")))?
                };
                return Ok(Complex64::new(re, im));
            }
        }
        let im: f64 = if body.is_empty() {
            1.0
        } else {
            body.parse()
                .map_err(|_| Error::Parse(format!("bad complex literal '{text}'")))?
        };
        return Ok(Complex64::new(0.0, im));
    }
    Err(Error::Parse(format!("bad complex literal '{text}'")))
}

fn parse_complex_list(text: &str) -> Result<Vec<Complex64>> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(parse_complex).collect()
}

fn parse_point(spec: &GroupSpec, text: &str) -> Result<Point> {
    let values: Vec<f64> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad coordinate '{s}'")))
        })
        .collect::<Result<_>>()?;
    Point::from_flat(spec, &values)
}

struct ResolvedFunction {
    expr: FieldExpr,
    id: String,
    flags: Vec<String>,
    claim: Option<BuiltinClaim>,
}

fn resolve_function(
    group: &ResolvedGroup,
    reference: &str,
    builtin_r: usize,
    coeffs: &[Complex64],
) -> Result<ResolvedFunction> {
    if let Some(id) = reference.strip_prefix("builtin:") {
        let Some(entry) = &group.catalog else {
            return Err(Error::Validation(
                "builtins are only available on registered catalog groups".into(),
            ));
        };
        let built = catalog::builtin(entry, id, builtin_r, coeffs)?;
        return Ok(ResolvedFunction {
            expr: built.expr,
            id: format!("builtin:{id}"),
            flags: built.erratum_flags,
            claim: Some(built.claim),
        });
    }
    let text = std::fs::read_to_string(reference)?;
    let expr = FieldExpr::from_json(&text)?;
    expr.validate_for(&group.spec)?;
    let id = format!("file:{}", expr.content_hash());
    Ok(ResolvedFunction { expr, id, flags: Vec::new(), claim: None })
}

fn run() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::Catalog { action } => run_catalog(action),
        Command::Construct(args) => run_construct(args),
        Command::Verify(args) => run_verify(args),
        Command::Oracle { what } => run_oracle(what),
        Command::Selftest { criterion } => run_selftest(criterion),
    }
}

fn matrices_row_major(spec: &GroupSpec) -> Vec<Vec<f64>> {
    spec.family()
        .iter()
        .map(|a| a.transpose().as_slice().to_vec())
        .collect()
}

fn run_catalog(action: CatalogAction) -> Result<i32> {
    match action {
        CatalogAction::List => {
            let mut entries = Vec::new();
            for name in catalog::list_names() {
                let (params, builtins, reference) = catalog::describe(name)?;
                entries.push(json!({
                    "name": name,
                    "parameters": params.iter().map(|p| json!({
                        "name": p.name, "constraint": p.constraint,
                    })).collect::<Vec<_>>(),
                    "builtins": builtins.iter().map(|b| json!({
                        "id": b.id, "summary": b.summary,
                    })).collect::<Vec<_>>(),
                    "reference": reference,
                }));
            }
            println!("{}", serde_json::to_string_pretty(&entries).expect("serializable"));
            Ok(0)
        }
        CatalogAction::Show { name, params } => {
            let entry = catalog::lookup(&name, &params.to_map())?;
            let (param_info, builtins, _) = catalog::describe(&name)?;
            let out = json!({
                "name": entry.name,
                "kind": match entry.spec.kind() {
                    polyharm::groups::TargetKind::AbelianTarget => "abelian",
                    polyharm::groups::TargetKind::HeisenbergTarget => "heisenberg",
                },
                "m": entry.spec.m(),
                "n": entry.spec.n(),
                "parameters": param_info.iter().map(|p| json!({
                    "name": p.name, "constraint": p.constraint,
                    "value": entry.params.get(p.name),
                })).collect::<Vec<_>>(),
                "matrices": matrices_row_major(&entry.spec),
                "omega": entry.spec.omega(),
                "builtins": builtins.iter().map(|b| json!({
                    "id": b.id, "summary": b.summary,
                })).collect::<Vec<_>>(),
                "reference": entry.reference,
                "notes": entry.notes,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            Ok(0)
        }
    }
}

fn default_pair(c: &[Complex64]) -> (Complex64, Complex64) {
    (
        c.first().copied().unwrap_or(Complex64::ONE),
        c.get(1).copied().unwrap_or(Complex64::ONE),
    )
}

fn run_construct(args: ConstructArgs) -> Result<i32> {
    let group = args.group.resolve()?;
    let coeffs = parse_complex_list(&args.coeffs)?;
    let r = args.r;
    if r == 0 {
        return Err(Error::Argument("--r must be at least 1".into()));
    }

    let pair_at = |index: usize| -> Result<polyharm::linalg::EigenPair> {
        let pairs = common_eigenvectors(group.spec.family())?;
        pairs.get(index).cloned().ok_or_else(|| {
            Error::Argument(format!(
                "eigen index {index} out of range; {} verified eigendirections",
                pairs.len()
            ))
        })
    };
    let compose = |pair: &IsoparametricPair| -> Result<(FieldExpr, serde_json::Value)> {
        let ladder = ladder_for_pair(pair, r, default_pair(&coeffs), None)?;
        let expr = ladder.compose(&pair.phi)?;
        Ok((
            expr,
            json!({
                "ladder": ladder.provenance.as_str(),
                "phi_poly": pair.big_phi.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                "psi_poly": pair.big_psi.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
            }),
        ))
    };

    let mut erratum_flags: Vec<String> = Vec::new();
    let (expr, claimed_order, method_info) = match args.method.as_str() {
        "eigenvector" => {
            let pair = pair_at(args.eigen_index)?;
            let iso = isoparametric_from_eigenvector(&group.spec, &pair)?;
            let (expr, ladder_info) = compose(&iso)?;
            (expr, r, json!({
                "method": "eigenvector",
                "eigen_index": args.eigen_index,
                "eigenvector": pair.v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                "lambda": pair.lambda.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                "ladder": ladder_info,
            }))
        }
        "isotropic" => {
            let pair = pair_at(args.eigen_index)?;
            let nu = match &args.nu {
                Some(text) => parse_complex_list(text)?,
                None => vec![Complex64::ONE; group.spec.m()],
            };
            let iso = eigenfunction_isotropic(&group.spec, &pair.v, &nu)?;
            let (expr, ladder_info) = compose(&iso)?;
            (expr, r, json!({
                "method": "isotropic",
                "eigen_index": args.eigen_index,
                "nu": nu.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>(),
                "ladder": ladder_info,
            }))
        }
        "re-im" => {
            let pair = pair_at(args.eigen_index)?;
            let (re, im) = re_im_parts(&group.spec, &pair)?;
            let iso = match args.part.as_str() {
                "re" => re,
                "im" => im,
                other => {
                    return Err(Error::Argument(format!(
                        "--part must be 're' or 'im', got '{other}'"
                    )))
                }
            };
            let (expr, ladder_info) = compose(&iso)?;
            (expr, r, json!({
                "method": "re-im",
                "part": args.part,
                "eigen_index": args.eigen_index,
                "ladder": ladder_info,
            }))
        }
        "t-factor" => {
            if args.k == 0 || args.k > group.spec.m() {
                return Err(Error::Argument(format!(
                    "--k must be in 1..={}",
                    group.spec.m()
                )));
            }
            let expr = t_power_factor(&group.spec, args.k - 1, r, default_pair(&coeffs))?;
            (expr, r, json!({"method": "t-factor", "k": args.k}))
        }
        "quadratic" => {
            let expr = match &args.data {
                Some(path) => {
                    let text = std::fs::read_to_string(path)?;
                    let data: serde_json::Value = serde_json::from_str(&text)
                        .map_err(|e| Error::Parse(format!("quadratic data: {e}")))?;
                    let get_c = |v: &serde_json::Value| -> Result<Complex64> {
                        let arr = v.as_array().ok_or_else(|| {
                            Error::Parse("complex values are [re, im] arrays".into())
                        })?;
                        Ok(Complex64::new(
                            arr.first().and_then(|x| x.as_f64()).unwrap_or(0.0),
                            arr.get(1).and_then(|x| x.as_f64()).unwrap_or(0.0),
                        ))
                    };
                    let a = data.get("a").map(&get_c).transpose()?.unwrap_or(Complex64::ZERO);
                    let b = data.get("b").filter(|v| !v.is_null()).map(&get_c).transpose()?;
                    let d = group.spec.x_dim();
                    let v: Vec<Complex64> = match data.get("v") {
                        Some(arr) => arr
                            .as_array()
                            .ok_or_else(|| Error::Parse("v must be an array".into()))?
                            .iter()
                            .map(&get_c)
                            .collect::<Result<_>>()?,
                        None => vec![Complex64::ZERO; d],
                    };
                    let bm: Vec<Complex64> = match data.get("B") {
                        Some(rows) => {
                            let rows = rows
                                .as_array()
                                .ok_or_else(|| Error::Parse("B must be an array of rows".into()))?;
                            let mut flat = Vec::with_capacity(d * d);
                            for row in rows {
                                for entry in row
                                    .as_array()
                                    .ok_or_else(|| Error::Parse("B rows must be arrays".into()))?
                                {
                                    flat.push(get_c(entry)?);
                                }
                            }
                            flat
                        }
                        None => vec![Complex64::ZERO; d * d],
                    };
                    quadratic_harmonic(&group.spec, a, b, &v, &bm)?
                }
                None => {
                    // affine default: a + <1, x>, trivially harmonic
                    let d = group.spec.x_dim();
                    quadratic_harmonic(
                        &group.spec,
                        Complex64::ONE,
                        None,
                        &vec![Complex64::ONE; d],
                        &vec![Complex64::ZERO; d * d],
                    )?
                }
            };
            (expr, 1, json!({"method": "quadratic"}))
        }
        "ladder" => {
            let base = args.psi.as_ref().ok_or_else(|| {
                Error::Argument("--method ladder needs --psi <fn-file|builtin:id> as the base".into())
            })?;
            // base builtins are the raw isoparametric functions: order 1,
            // coefficients (1, 0)
            let base_fn =
                resolve_function(&group, base, 1, &[Complex64::ONE, Complex64::ZERO])?;
            let phi_poly = parse_complex_list(args.phi_poly.as_deref().ok_or_else(|| {
                Error::Argument("--method ladder needs --phi-poly".into())
            })?)?;
            let psi_poly = parse_complex_list(args.psi_poly.as_deref().ok_or_else(|| {
                Error::Argument("--method ladder needs --psi-poly".into())
            })?)?;
            let pair = IsoparametricPair {
                phi: base_fn.expr.clone(),
                big_phi: phi_poly,
                big_psi: psi_poly,
            };
            let ladder = ladder_for_pair(&pair, r, default_pair(&coeffs), None)?;
            let expr = ladder.compose(&pair.phi)?;
            erratum_flags.extend(base_fn.flags.clone());
            (expr, r, json!({
                "method": "ladder",
                "base": base_fn.id,
                "ladder": ladder.provenance.as_str(),
            }))
        }
        "product" => {
            let psi_ref = args.psi.as_ref().ok_or_else(|| {
                Error::Argument("--method product needs --psi <fn-file|builtin:id>".into())
            })?;
            let q = args.psi_order.ok_or_else(|| {
                Error::Argument("--method product needs --psi-order".into())
            })?;
            if args.k == 0 || args.k > group.spec.m() {
                return Err(Error::Argument(format!(
                    "--k must be in 1..={}",
                    group.spec.m()
                )));
            }
            let psi_fn = resolve_function(&group, psi_ref, q, &coeffs)?;
            let phi_t = t_power_factor(&group.spec, args.k - 1, r, default_pair(&coeffs))?;
            let (expr, order) = separated_product(&group.spec, &phi_t, r, &psi_fn.expr, q, 11)?;
            erratum_flags.extend(psi_fn.flags.clone());
            (expr, order, json!({
                "method": "product",
                "k": args.k,
                "t_factor_order": r,
                "psi": psi_fn.id,
                "psi_order": q,
            }))
        }
        other => {
            return Err(Error::Argument(format!(
                "unknown method '{other}'; expected eigenvector, isotropic, re-im, t-factor, \
                 quadratic, ladder or product"
            )))
        }
    };

    std::fs::write(&args.out, expr.to_json_pretty())?;
    let provenance = json!({
        "group": group.id,
        "claimed_order": claimed_order,
        "construction": method_info,
        "erratum_flags": erratum_flags,
        "function_file": args.out.display().to_string(),
        "function_hash": expr.content_hash(),
    });
    println!("{}", serde_json::to_string_pretty(&provenance).expect("serializable"));
    Ok(0)
}

fn run_verify(args: VerifyArgs) -> Result<i32> {
    let group = args.group.resolve()?;
    let coeffs = parse_complex_list(&args.coeffs)?;
    let order = args.order;
    let builtin_r = args.builtin_r.or(order).unwrap_or(1);
    let function = resolve_function(&group, &args.function, builtin_r, &coeffs)?;

    let mut plan = SamplePlan::default_for(&group.spec);
    if let Some(samples) = args.samples {
        plan = plan.with_count(samples);
    }
    if let Some(seed) = args.seed {
        plan = plan.with_seed(seed);
    }
    let meta = ReportMeta::new(group.id.clone(), function.id.clone())
        .with_flags(function.flags.clone());

    let report: Report = match args.claim.as_str() {
        "r-harmonic" => {
            let order = order.ok_or_else(|| {
                Error::Argument("--order is required for r-harmonic claims".into())
            })?;
            let verify = if args.full_oracle {
                polyharm::verifier::verify_r_harmonic_full_oracle
            } else {
                verify_r_harmonic
            };
            verify(
                &group.spec,
                &function.expr,
                order,
                &plan,
                args.tol_zero.unwrap_or(DEFAULT_TOL_ZERO),
                args.tol_nonzero.unwrap_or(DEFAULT_TOL_NONZERO),
                &meta,
            )?
        }
        "isoparametric" => {
            let phi_poly = parse_complex_list(args.phi_poly.as_deref().ok_or_else(|| {
                Error::Argument("--phi-poly is required for isoparametric claims".into())
            })?)?;
            let psi_poly = parse_complex_list(args.psi_poly.as_deref().ok_or_else(|| {
                Error::Argument("--psi-poly is required for isoparametric claims".into())
            })?)?;
            let pair = IsoparametricPair {
                phi: function.expr.clone(),
                big_phi: phi_poly,
                big_psi: psi_poly,
            };
            verify_isoparametric(
                &group.spec,
                &pair,
                &plan,
                args.tol.unwrap_or(polyharm::verifier::DEFAULT_TOL_ISO),
                &meta,
            )?
        }
        "eigenfunction" => {
            let (lambda, mu) = match (&args.lambda, &args.mu) {
                (Some(l), Some(m)) => (parse_complex(l)?, parse_complex(m)?),
                _ => match &function.claim {
                    Some(BuiltinClaim::Eigenfunction { lambda, mu }) => (*lambda, *mu),
                    _ => {
                        return Err(Error::Argument(
                            "--lambda and --mu are required unless the builtin claims an \
                             eigenfunction"
                                .into(),
                        ))
                    }
                },
            };
            verify_eigenfunction(
                &group.spec,
                &function.expr,
                lambda,
                mu,
                &plan,
                args.tol.unwrap_or(polyharm::verifier::DEFAULT_TOL_ISO),
                &meta,
            )?
        }
        other => {
            return Err(Error::Argument(format!(
                "unknown claim '{other}'; expected r-harmonic, isoparametric or eigenfunction"
            )))
        }
    };

    let summary = format!(
        "{}: {} on {} — verdict {:?} (max residual {:.3e}, scale {:.3e}{})",
        args.claim,
        function.id,
        group.id,
        report.verdict,
        report.max_residual,
        report.scale,
        report
            .nonvanishing_stat
            .map(|s| format!(", nonvanishing {s:.3e}"))
            .unwrap_or_default(),
    );
    match &args.out {
        Some(path) => {
            std::fs::write(path, report.to_json())?;
            println!("{summary}");
            println!("report written to {}", path.display());
        }
        None => {
            eprintln!("{summary}");
            println!("{}", report.to_json());
        }
    }
    Ok(match report.verdict {
        Verdict::Pass => 0,
        Verdict::Fail => 1,
        Verdict::Inconclusive => 3,
    })
}

fn run_oracle(what: OracleWhat) -> Result<i32> {
    match what {
        OracleWhat::Tau { group, function, builtin_r, point, step } => {
            let group = group.resolve()?;
            let function = resolve_function(&group, &function, builtin_r, &[])?;
            let point = parse_point(&group.spec, &point)?;
            let jet = tau_iter(&group.spec, &function.expr, &point, 1)?.values[1];
            let fd = tau_fd(&group.spec, &function.expr, &point, step)?;
            let abs = (jet - fd).norm();
            let rel = abs / jet.norm().max(fd.norm()).max(1.0);
            let out = json!({
                "point": point.flat(),
                "jet": [jet.re, jet.im],
                "finite_difference": [fd.re, fd.im],
                "step": step,
                "abs_diff": abs,
                "rel_diff": rel,
            });
            println!("{}", serde_json::to_string_pretty(&out).expect("serializable"));
            Ok(0)
        }
    }
}

fn run_selftest(criterion: Option<usize>) -> Result<i32> {
    let results = match criterion {
        Some(index) => vec![polyharm::selftest::run_criterion(index)?],
        None => polyharm::selftest::run_all()?,
    };
    let mut all_passed = true;
    for result in &results {
        println!("{}", result.summary_line());
        for line in &result.details {
            println!("    {line}");
        }
        all_passed &= result.passed;
    }
    let total: f64 = results.iter().map(|r| r.elapsed.as_secs_f64()).sum();
    println!(
        "{}/{} criteria passed in {total:.1}s",
        results.iter().filter(|r| r.passed).count(),
        results.len()
    );
    Ok(if all_passed { 0 } else { 1 })
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}
