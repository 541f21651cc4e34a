//! Built-in registry of named semidirect products and their ready-made
//! function families, addressable by name and parameters.
//!
//! The four-dimensional entries follow the standard classification of
//! indecomposable solvable Lie algebras (g4.1 … g4.10); `Sol3` is the
//! three-dimensional solvable Thurston geometry. Each entry carries the
//! commuting family A, the admissible parameter ranges, and the function
//! families known to be proper r-harmonic (or eigenfunctions) on it.
//!
//! Two registered functions intentionally differ from a widely circulated
//! printed form, in both cases because the printed version fails the
//! finite-difference oracle: the `G4.4` product uses `e^{+3t}` (the drift
//! equation `τ(e^{ct}) = (c² − ωc) e^{ct}` with ω = 3 forces the positive
//! sign) and the quadratic uses `x₃²` (the trace condition needs a
//! quadratic form). The `G4.9` family is registered with drift coefficient
//! `5α²` — the value `3α²` fails the same oracle, while the closed-form
//! harmonic function differentiates consistently with `5α²`. Reports carry
//! erratum flags whenever these functions are exercised.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::FieldExpr;
use crate::groups::{build_spec, GroupSpec, TargetKind};
use crate::linalg::RealMatrix;

/// Erratum flag attached to G4.9 verifications: the registered drift
/// coefficient is `5α²`.
pub const FLAG_G49_DRIFT: &str = "phi-coefficient-5a2";
/// Erratum flag: the registered G4.4 t-factor grows like `e^{+3t}`.
pub const FLAG_G44_EXPONENT: &str = "g44-t-exponent-positive";
/// Erratum flag: the registered G4.4 quadratic uses `x3^2`, not a cubic.
pub const FLAG_G44_QUADRATIC: &str = "g44-quadratic-term-degree";
/// Flag set on the deliberately registered printed variant that fails.
pub const FLAG_G44_PRINTED: &str = "g44-printed-form-not-harmonic";

/// What a built-in function claims about itself.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltinClaim {
    /// Proper r-harmonic at the order it was built with.
    ProperRHarmonic(usize),
    /// Eigenfunction: τφ = λφ and κ(φ,φ) = μφ².
    Eigenfunction { lambda: Complex64, mu: Complex64 },
}

/// A constructed built-in function with its claim and any erratum flags.
#[derive(Debug, Clone)]
pub struct BuiltFunction {
    pub expr: FieldExpr,
    pub claim: BuiltinClaim,
    pub erratum_flags: Vec<String>,
}

/// Static description of a built-in function family.
#[derive(Debug, Clone)]
pub struct BuiltinInfo {
    pub id: &'static str,
    pub summary: &'static str,
}

/// Static description of a parameter with its admissible range.
#[derive(Debug, Clone)]
pub struct ParamInfo {
    pub name: &'static str,
    pub constraint: &'static str,
}

/// A looked-up catalog group: validated spec plus metadata.
#[derive(Debug, Clone)]
pub struct CatalogGroup {
    pub name: String,
    pub spec: GroupSpec,
    pub params: BTreeMap<String, f64>,
    pub reference: String,
    pub notes: Vec<String>,
    pub builtins: Vec<BuiltinInfo>,
}

struct EntryDef {
    name: &'static str,
    params: &'static [ParamInfo],
    reference: &'static str,
    builtins: &'static [BuiltinInfo],
}

const ENTRIES: &[EntryDef] = &[
    EntryDef {
        name: "G4.1",
        params: &[],
        reference: "indecomposable solvable Lie group g4.1, R x_A R^3 with a nilpotent Jordan block",
        builtins: &[BuiltinInfo { id: "g41-poly", summary: "a1 x3^(2r-1) + a2 x3^(2r-2), proper r-harmonic" }],
    },
    EntryDef {
        name: "G4.2",
        params: &[ParamInfo { name: "alpha", constraint: "alpha != 0" }],
        reference: "indecomposable solvable Lie group g4.2(alpha), R x_A R^3",
        builtins: &[],
    },
    EntryDef {
        name: "G4.3",
        params: &[],
        reference: "indecomposable solvable Lie group g4.3, R x_A R^3",
        builtins: &[],
    },
    EntryDef {
        name: "G4.4",
        params: &[],
        reference: "indecomposable solvable Lie group g4.4, R x_A R^3 with a full Jordan block",
        builtins: &[
            BuiltinInfo {
                id: "g44-sep",
                summary: "(c1 t^(r-1) e^(3t) + c2 t^(r-1)) (a1 + a2 x1 + a3 x2 + a4 (x2^2 - x3^2 - 2 x1 x3)), proper r-harmonic",
            },
            BuiltinInfo {
                id: "g44-sep-printed",
                summary: "same but with e^(-3t); fails verification, kept as the erratum witness",
            },
        ],
    },
    EntryDef {
        name: "G4.5",
        params: &[
            ParamInfo { name: "alpha", constraint: "alpha != 0" },
            ParamInfo { name: "beta", constraint: "beta != 0" },
            ParamInfo { name: "gamma", constraint: "gamma != 0" },
        ],
        reference: "indecomposable solvable Lie group g4.5(alpha, beta, gamma), R x_A R^3 diagonal",
        builtins: &[],
    },
    EntryDef {
        name: "G4.6",
        params: &[
            ParamInfo { name: "alpha", constraint: "alpha > 0" },
            ParamInfo { name: "beta", constraint: "any real" },
        ],
        reference: "indecomposable solvable Lie group g4.6(alpha, beta), R x_A R^3 with a rotation block",
        builtins: &[],
    },
    EntryDef {
        name: "G4.7",
        params: &[],
        reference: "indecomposable solvable Lie group g4.7, R x_A H^3",
        builtins: &[],
    },
    EntryDef {
        name: "G4.8",
        params: &[ParamInfo { name: "alpha", constraint: "alpha in [-1, 1]" }],
        reference: "indecomposable solvable Lie group g4.8(alpha), R x_A H^3 diagonal",
        builtins: &[BuiltinInfo {
            id: "g48-sep",
            summary: "t-factor times (a1 + a2 xi + a3 x1 + a4 x2 + a5 x1 x2), proper r-harmonic",
        }],
    },
    EntryDef {
        name: "G4.9",
        params: &[ParamInfo { name: "alpha", constraint: "alpha >= 0" }],
        reference: "indecomposable solvable Lie group g4.9(alpha), R x_A H^3 with a rotation-scaling block",
        builtins: &[
            BuiltinInfo { id: "g49-poly", summary: "c1 x1^(2r-1) + c2 x1^(2r-2), proper r-harmonic at alpha = 0" },
            BuiltinInfo { id: "g49-harmonic", summary: "c1 (2u^3 + 3u)/(u^2+1)^(3/2) + c2 with u = alpha e^(-alpha t) x1, proper harmonic" },
            BuiltinInfo { id: "g49-biharmonic", summary: "the matching closed form of order 2, proper biharmonic" },
        ],
    },
    EntryDef {
        name: "G4.10",
        params: &[],
        reference: "indecomposable solvable Lie group g4.10, R^2 x_A R^2",
        builtins: &[BuiltinInfo {
            id: "g410-eigen",
            summary: "e^(-(nu1 t1 + nu2 t2)) (x1 + i x2), eigenfunction for any complex nu",
        }],
    },
    EntryDef {
        name: "Sol3",
        params: &[],
        reference: "three-dimensional solvable Thurston geometry, R x_A R^2 with A = diag(1, -1)",
        builtins: &[BuiltinInfo {
            id: "sol3-arsinh",
            summary: "c1 arsinh(e^(-t) x1)^(2r-1) + c2 arsinh(e^(-t) x1)^(2r-2), proper r-harmonic",
        }],
    },
];

/// Registered group names, in catalog order.
pub fn list_names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

/// Static parameter and builtin metadata for a registered name.
pub fn describe(name: &str) -> Result<(&'static [ParamInfo], &'static [BuiltinInfo], &'static str)> {
    let entry = find(name)?;
    Ok((entry.params, entry.builtins, entry.reference))
}

fn find(name: &str) -> Result<&'static EntryDef> {
    ENTRIES.iter().find(|e| e.name.eq_ignore_ascii_case(name)).ok_or_else(|| {
        Error::Lookup(format!(
            "unknown group '{name}'; registered names: {}",
            list_names().join(", ")
        ))
    })
}

fn need(params: &BTreeMap<String, f64>, key: &str, constraint: &str) -> Result<f64> {
    params.get(key).copied().ok_or_else(|| {
        Error::Validation(format!("parameter '{key}' required ({constraint})"))
    })
}

/// Look up a registered group, validating parameters against their
/// admissible ranges.
pub fn lookup(name: &str, params: &BTreeMap<String, f64>) -> Result<CatalogGroup> {
    let entry = find(name)?;
    for key in params.keys() {
        if !entry.params.iter().any(|p| p.name == key) {
            return Err(Error::Validation(format!(
                "group {} takes no parameter '{key}'",
                entry.name
            )));
        }
    }
    let reject = |cond: bool, msg: &str| -> Result<()> {
        if cond {
            Err(Error::Validation(format!("{}: {msg}", entry.name)))
        } else {
            Ok(())
        }
    };
    let mut notes: Vec<String> = Vec::new();
    let spec = match entry.name {
        "G4.1" => build_spec(
            TargetKind::AbelianTarget,
            1,
            3,
            vec![RealMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 0.])],
        )?,
        "G4.2" => {
            let alpha = need(params, "alpha", "alpha != 0")?;
            reject(alpha == 0.0, "alpha must be non-zero")?;
            build_spec(
                TargetKind::AbelianTarget,
                1,
                3,
                vec![RealMatrix::from_row_slice(3, 3, &[alpha, 0., 0., 0., 1., 1., 0., 0., 1.])],
            )?
        }
        "G4.3" => build_spec(
            TargetKind::AbelianTarget,
            1,
            3,
            vec![RealMatrix::from_row_slice(3, 3, &[1., 0., 0., 0., 0., 1., 0., 0., 0.])],
        )?,
        "G4.4" => {
            notes.push(
                "the registered product family uses e^(+3t) and a quadratic x3^2 term; \
                 the circulated printed variant (e^(-3t), cubic x3^3) fails the oracle"
                    .into(),
            );
            build_spec(
                TargetKind::AbelianTarget,
                1,
                3,
                vec![RealMatrix::from_row_slice(3, 3, &[1., 1., 0., 0., 1., 1., 0., 0., 1.])],
            )?
        }
        "G4.5" => {
            let alpha = need(params, "alpha", "alpha != 0")?;
            let beta = need(params, "beta", "beta != 0")?;
            let gamma = need(params, "gamma", "gamma != 0")?;
            reject(alpha * beta * gamma == 0.0, "alpha, beta, gamma must all be non-zero")?;
            build_spec(
                TargetKind::AbelianTarget,
                1,
                3,
                vec![RealMatrix::from_row_slice(3, 3, &[alpha, 0., 0., 0., beta, 0., 0., 0., gamma])],
            )?
        }
        "G4.6" => {
            let alpha = need(params, "alpha", "alpha > 0")?;
            let beta = params.get("beta").copied().unwrap_or(0.0);
            reject(alpha <= 0.0, "alpha must be positive")?;
            build_spec(
                TargetKind::AbelianTarget,
                1,
                3,
                vec![RealMatrix::from_row_slice(3, 3, &[alpha, 0., 0., 0., beta, 1., 0., -1., beta])],
            )?
        }
        "G4.7" => build_spec(
            TargetKind::HeisenbergTarget,
            1,
            1,
            vec![RealMatrix::from_row_slice(2, 2, &[1., 1., 0., 1.])],
        )?,
        "G4.8" => {
            let alpha = need(params, "alpha", "alpha in [-1, 1]")?;
            reject(!(-1.0..=1.0).contains(&alpha), "alpha must lie in [-1, 1]")?;
            build_spec(
                TargetKind::HeisenbergTarget,
                1,
                1,
                vec![RealMatrix::from_row_slice(2, 2, &[1., 0., 0., alpha])],
            )?
        }
        "G4.9" => {
            let alpha = need(params, "alpha", "alpha >= 0")?;
            reject(alpha < 0.0, "alpha must be non-negative")?;
            notes.push(
                "isoparametric drift registered as 5*alpha^2 (the printed 3*alpha^2 fails \
                 the finite-difference oracle; the closed-form harmonic function is \
                 consistent with 5*alpha^2)"
                    .into(),
            );
            build_spec(
                TargetKind::HeisenbergTarget,
                1,
                1,
                vec![RealMatrix::from_row_slice(2, 2, &[alpha, 1., -1., alpha])],
            )?
        }
        "G4.10" => build_spec(
            TargetKind::AbelianTarget,
            2,
            2,
            vec![
                RealMatrix::from_row_slice(2, 2, &[-1., 0., 0., -1.]),
                RealMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]),
            ],
        )?,
        "Sol3" => build_spec(
            TargetKind::AbelianTarget,
            1,
            2,
            vec![RealMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.])],
        )?,
        _ => unreachable!("all registered names handled"),
    };
    Ok(CatalogGroup {
        name: entry.name.to_string(),
        spec,
        params: params.clone(),
        reference: entry.reference.to_string(),
        notes,
        builtins: entry.builtins.to_vec(),
    })
}

fn coeff(coeffs: &[Complex64], i: usize) -> Complex64 {
    coeffs.get(i).copied().unwrap_or(Complex64::ONE)
}

/// Construct a registered function family at order `r` with the given
/// coefficients (missing coefficients default to 1).
pub fn builtin(
    group: &CatalogGroup,
    id: &str,
    r: usize,
    coeffs: &[Complex64],
) -> Result<BuiltFunction> {
    if !group.builtins.iter().any(|b| b.id == id) {
        let known: Vec<&str> = group.builtins.iter().map(|b| b.id).collect();
        return Err(Error::Lookup(format!(
            "group {} has no builtin '{id}'; registered: {}",
            group.name,
            if known.is_empty() { "none".to_string() } else { known.join(", ") }
        )));
    }
    if r == 0 {
        return Err(Error::Argument("order must be at least 1".into()));
    }
    let one = Complex64::ONE;
    let c0 = coeff(coeffs, 0);
    let c1 = coeff(coeffs, 1);
    let ri = r as i32;

    let built = match id {
        "g41-poly" => BuiltFunction {
            expr: FieldExpr::add(vec![
                FieldExpr::coord_x(2).powi(2 * ri - 1).scaled(c0),
                FieldExpr::coord_x(2).powi(2 * ri - 2).scaled(c1),
            ]),
            claim: BuiltinClaim::ProperRHarmonic(r),
            erratum_flags: vec![],
        },
        "sol3-arsinh" => {
            let w = FieldExpr::mul(vec![
                FieldExpr::coord_t(0).neg().exp(),
                FieldExpr::coord_x(0),
            ])
            .arsinh();
            BuiltFunction {
                expr: FieldExpr::add(vec![
                    w.clone().powi(2 * ri - 1).scaled(c0),
                    w.powi(2 * ri - 2).scaled(c1),
                ]),
                claim: BuiltinClaim::ProperRHarmonic(r),
                erratum_flags: vec![],
            }
        }
        "g44-sep" | "g44-sep-printed" => {
            let printed = id == "g44-sep-printed";
            let sign = if printed { -3.0 } else { 3.0 };
            let t = FieldExpr::coord_t(0);
            let grow = t.clone().scaled(Complex64::new(sign, 0.0)).exp();
            let t_factor = FieldExpr::add(vec![
                FieldExpr::mul(vec![t.clone().powi(ri - 1), grow]).scaled(c0),
                t.powi(ri - 1).scaled(c1),
            ]);
            let a = |i: usize| coeff(coeffs, 2 + i);
            let quad = FieldExpr::add(vec![
                FieldExpr::coord_x(1).powi(2),
                FieldExpr::coord_x(2).powi(2).neg(),
                FieldExpr::mul(vec![FieldExpr::coord_x(0), FieldExpr::coord_x(2)])
                    .scaled(Complex64::new(-2.0, 0.0)),
            ]);
            let spatial = FieldExpr::add(vec![
                FieldExpr::constant(a(0)),
                FieldExpr::coord_x(0).scaled(a(1)),
                FieldExpr::coord_x(1).scaled(a(2)),
                quad.scaled(a(3)),
            ]);
            BuiltFunction {
                expr: FieldExpr::mul(vec![t_factor, spatial]),
                claim: BuiltinClaim::ProperRHarmonic(r),
                erratum_flags: if printed {
                    vec![FLAG_G44_PRINTED.into()]
                } else {
                    vec![FLAG_G44_EXPONENT.into(), FLAG_G44_QUADRATIC.into()]
                },
            }
        }
        "g48-sep" => {
            let alpha = *group.params.get("alpha").ok_or_else(|| {
                Error::Argument("g48-sep needs the group's alpha parameter".into())
            })?;
            let t = FieldExpr::coord_t(0);
            let t_factor = if (alpha + 1.0).abs() < 1e-12 {
                FieldExpr::add(vec![
                    t.clone().powi(2 * ri - 1).scaled(c0),
                    t.powi(2 * ri - 2).scaled(c1),
                ])
            } else {
                let grow = t.clone().scaled(Complex64::new(2.0 * (1.0 + alpha), 0.0)).exp();
                FieldExpr::add(vec![
                    FieldExpr::mul(vec![t.clone().powi(ri - 1), grow]).scaled(c0),
                    t.powi(ri - 1).scaled(c1),
                ])
            };
            let a = |i: usize| coeff(coeffs, 2 + i);
            let spatial = FieldExpr::add(vec![
                FieldExpr::constant(a(0)),
                FieldExpr::coord_xi().scaled(a(1)),
                FieldExpr::coord_x(0).scaled(a(2)),
                FieldExpr::coord_x(1).scaled(a(3)),
                FieldExpr::mul(vec![FieldExpr::coord_x(0), FieldExpr::coord_x(1)]).scaled(a(4)),
            ]);
            BuiltFunction {
                expr: FieldExpr::mul(vec![t_factor, spatial]),
                claim: BuiltinClaim::ProperRHarmonic(r),
                erratum_flags: vec![],
            }
        }
        "g49-poly" => {
            let alpha = *group.params.get("alpha").unwrap_or(&0.0);
            if alpha.abs() > 1e-12 {
                return Err(Error::Validation(
                    "g49-poly is proper r-harmonic only at alpha = 0".into(),
                ));
            }
            BuiltFunction {
                expr: FieldExpr::add(vec![
                    FieldExpr::coord_x(0).powi(2 * ri - 1).scaled(c0),
                    FieldExpr::coord_x(0).powi(2 * ri - 2).scaled(c1),
                ]),
                claim: BuiltinClaim::ProperRHarmonic(r),
                erratum_flags: vec![],
            }
        }
        "g49-harmonic" | "g49-biharmonic" => {
            let alpha = *group.params.get("alpha").ok_or_else(|| {
                Error::Argument("this builtin needs the group's alpha parameter".into())
            })?;
            if alpha.abs() <= 1e-12 {
                return Err(Error::Validation(
                    "the closed forms degenerate at alpha = 0; use g49-poly there".into(),
                ));
            }
            let order = if id == "g49-harmonic" { 1 } else { 2 };
            let ladder = crate::constructors::fr_linear_quadratic(
                Complex64::new(5.0 * alpha * alpha, 0.0),
                Complex64::new(alpha * alpha, 0.0),
                one,
                order,
                (c0, c1),
            )?;
            let base = FieldExpr::mul(vec![
                FieldExpr::coord_t(0).scaled(Complex64::new(-alpha, 0.0)).exp(),
                FieldExpr::coord_x(0),
            ]);
            BuiltFunction {
                expr: ladder.compose(&base)?,
                claim: BuiltinClaim::ProperRHarmonic(order),
                erratum_flags: vec![FLAG_G49_DRIFT.into()],
            }
        }
        "g410-eigen" => {
            let nu1 = coeff(coeffs, 0);
            let nu2 = coeff(coeffs, 1);
            let expr = FieldExpr::mul(vec![
                crate::expr::linear_form(
                    Complex64::ZERO,
                    &[
                        (crate::expr::Coord::T(0), -nu1),
                        (crate::expr::Coord::T(1), -nu2),
                    ],
                )
                .exp(),
                crate::expr::linear_form(
                    Complex64::ZERO,
                    &[
                        (crate::expr::Coord::X(0), one),
                        (crate::expr::Coord::X(1), Complex64::new(0.0, 1.0)),
                    ],
                ),
            ]);
            BuiltFunction {
                expr,
                claim: BuiltinClaim::Eigenfunction {
                    lambda: nu1 * nu1 - 2.0 * nu1 + nu2 * nu2,
                    mu: nu1 * nu1 + nu2 * nu2,
                },
                erratum_flags: vec![],
            }
        }
        _ => unreachable!("registered ids handled"),
    };
    Ok(built)
}
