//! Serializable expression trees for smooth complex-valued functions of the
//! group coordinates `(t, ξ, x)`.
//!
//! The node set is exactly what the constructed function families need:
//! complex constants, coordinates, sums, products, negation, integer and
//! complex powers, `exp`, `log`, `sqrt`, `sin`, `cos` and `arsinh`. Trees
//! evaluate either to plain complex values or to jets of any order, and
//! serialize to nested `{op, args…}` objects with complex constants as
//! `[re, im]` pairs.
//!
//! A tree may also use the placeholder variable `z`; such trees denote
//! holomorphic functions of one complex variable and are composed onto a
//! base function with [`FieldExpr::substitute_z`] before group-level use.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groups::GroupSpec;
use crate::jets::{self, Jet};

/// A coordinate of the group manifold, or the composition placeholder `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    /// `t_k`, 0-based.
    T(usize),
    /// The central Heisenberg coordinate.
    Xi,
    /// `x_i`, 0-based.
    X(usize),
    /// Placeholder for one-variable holomorphic functions.
    Z,
}

impl Coord {
    fn name(&self) -> String {
        match self {
            Coord::T(k) => format!("t{}", k + 1),
            Coord::Xi => "xi".into(),
            Coord::X(i) => format!("x{}", i + 1),
            Coord::Z => "z".into(),
        }
    }

    fn parse(name: &str) -> Result<Coord> {
        if name == "xi" {
            return Ok(Coord::Xi);
        }
        if name == "z" {
            return Ok(Coord::Z);
        }
        let (prefix, rest) = name.split_at(1);
        let index: usize = rest
            .parse()
            .map_err(|_| Error::Parse(format!("bad coordinate name '{name}'")))?;
        if index == 0 {
            return Err(Error::Parse(format!("coordinate indices are 1-based: '{name}'")));
        }
        match prefix {
            "t" => Ok(Coord::T(index - 1)),
            "x" => Ok(Coord::X(index - 1)),
            _ => Err(Error::Parse(format!("bad coordinate name '{name}'"))),
        }
    }
}

/// Expression tree for a smooth complex-valued function.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpr {
    Const(Complex64),
    Coord(Coord),
    Add(Vec<FieldExpr>),
    Mul(Vec<FieldExpr>),
    Neg(Box<FieldExpr>),
    PowInt(Box<FieldExpr>, i32),
    PowComplex(Box<FieldExpr>, Complex64),
    Exp(Box<FieldExpr>),
    Log(Box<FieldExpr>),
    Sqrt(Box<FieldExpr>),
    Sin(Box<FieldExpr>),
    Cos(Box<FieldExpr>),
    Arsinh(Box<FieldExpr>),
}

impl FieldExpr {
    pub fn constant(c: Complex64) -> FieldExpr {
        FieldExpr::Const(c)
    }

    pub fn real(x: f64) -> FieldExpr {
        FieldExpr::Const(Complex64::new(x, 0.0))
    }

    pub fn coord_t(k: usize) -> FieldExpr {
        FieldExpr::Coord(Coord::T(k))
    }

    pub fn coord_xi() -> FieldExpr {
        FieldExpr::Coord(Coord::Xi)
    }

    pub fn coord_x(i: usize) -> FieldExpr {
        FieldExpr::Coord(Coord::X(i))
    }

    pub fn z() -> FieldExpr {
        FieldExpr::Coord(Coord::Z)
    }

    /// n-ary sum; collapses trivial cases.
    pub fn add(terms: Vec<FieldExpr>) -> FieldExpr {
        let mut terms: Vec<FieldExpr> = terms
            .into_iter()
            .filter(|t| !matches!(t, FieldExpr::Const(c) if c.norm() == 0.0))
            .collect();
        match terms.len() {
            0 => FieldExpr::Const(Complex64::ZERO),
            1 => terms.pop().unwrap(),
            _ => FieldExpr::Add(terms),
        }
    }

    /// n-ary product; collapses trivial cases.
    pub fn mul(factors: Vec<FieldExpr>) -> FieldExpr {
        let mut factors: Vec<FieldExpr> = factors
            .into_iter()
            .filter(|f| !matches!(f, FieldExpr::Const(c) if *c == Complex64::ONE))
            .collect();
        match factors.len() {
            0 => FieldExpr::Const(Complex64::ONE),
            1 => factors.pop().unwrap(),
            _ => FieldExpr::Mul(factors),
        }
    }

    pub fn neg(self) -> FieldExpr {
        FieldExpr::Neg(Box::new(self))
    }

    pub fn scaled(self, c: Complex64) -> FieldExpr {
        if c == Complex64::ONE {
            self
        } else {
            FieldExpr::mul(vec![FieldExpr::Const(c), self])
        }
    }

    pub fn powi(self, p: i32) -> FieldExpr {
        match p {
            0 => FieldExpr::Const(Complex64::ONE),
            1 => self,
            _ => FieldExpr::PowInt(Box::new(self), p),
        }
    }

    pub fn powc(self, s: Complex64) -> FieldExpr {
        FieldExpr::PowComplex(Box::new(self), s)
    }

    pub fn exp(self) -> FieldExpr {
        FieldExpr::Exp(Box::new(self))
    }

    pub fn log(self) -> FieldExpr {
        FieldExpr::Log(Box::new(self))
    }

    pub fn sqrt(self) -> FieldExpr {
        FieldExpr::Sqrt(Box::new(self))
    }

    pub fn sin(self) -> FieldExpr {
        FieldExpr::Sin(Box::new(self))
    }

    pub fn cos(self) -> FieldExpr {
        FieldExpr::Cos(Box::new(self))
    }

    pub fn arsinh(self) -> FieldExpr {
        FieldExpr::Arsinh(Box::new(self))
    }

    pub fn children(&self) -> &[FieldExpr] {
        match self {
            FieldExpr::Const(_) | FieldExpr::Coord(_) => &[],
            FieldExpr::Add(v) | FieldExpr::Mul(v) => v,
            FieldExpr::Neg(b)
            | FieldExpr::PowInt(b, _)
            | FieldExpr::PowComplex(b, _)
            | FieldExpr::Exp(b)
            | FieldExpr::Log(b)
            | FieldExpr::Sqrt(b)
            | FieldExpr::Sin(b)
            | FieldExpr::Cos(b)
            | FieldExpr::Arsinh(b) => std::slice::from_ref(b),
        }
    }

    /// All coordinates referenced anywhere in the tree.
    pub fn coords_used(&self) -> Vec<Coord> {
        let mut out = Vec::new();
        self.walk(&mut |e| {
            if let FieldExpr::Coord(c) = e {
                if !out.contains(c) {
                    out.push(*c);
                }
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&FieldExpr)) {
        f(self);
        for child in self.children() {
            child.walk(f);
        }
    }

    /// Check that every referenced coordinate exists in the target group
    /// (ξ only on Heisenberg targets, no free `z`).
    pub fn validate_for(&self, spec: &GroupSpec) -> Result<()> {
        for c in self.coords_used() {
            match c {
                Coord::T(k) if k >= spec.m() => {
                    return Err(Error::Validation(format!(
                        "coordinate t{} does not exist (m = {})",
                        k + 1,
                        spec.m()
                    )));
                }
                Coord::X(i) if i >= spec.x_dim() => {
                    return Err(Error::Validation(format!(
                        "coordinate x{} does not exist (x-block size {})",
                        i + 1,
                        spec.x_dim()
                    )));
                }
                Coord::Xi if !spec.has_xi() => {
                    return Err(Error::Validation(
                        "coordinate xi exists only on Heisenberg targets".into(),
                    ));
                }
                Coord::Z => {
                    return Err(Error::Validation(
                        "placeholder variable z must be substituted before group-level use".into(),
                    ));
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Replace every occurrence of the placeholder `z`.
    pub fn substitute_z(&self, replacement: &FieldExpr) -> FieldExpr {
        match self {
            FieldExpr::Coord(Coord::Z) => replacement.clone(),
            FieldExpr::Const(_) | FieldExpr::Coord(_) => self.clone(),
            FieldExpr::Add(v) => {
                FieldExpr::Add(v.iter().map(|e| e.substitute_z(replacement)).collect())
            }
            FieldExpr::Mul(v) => {
                FieldExpr::Mul(v.iter().map(|e| e.substitute_z(replacement)).collect())
            }
            FieldExpr::Neg(b) => FieldExpr::Neg(Box::new(b.substitute_z(replacement))),
            FieldExpr::PowInt(b, p) => {
                FieldExpr::PowInt(Box::new(b.substitute_z(replacement)), *p)
            }
            FieldExpr::PowComplex(b, s) => {
                FieldExpr::PowComplex(Box::new(b.substitute_z(replacement)), *s)
            }
            FieldExpr::Exp(b) => FieldExpr::Exp(Box::new(b.substitute_z(replacement))),
            FieldExpr::Log(b) => FieldExpr::Log(Box::new(b.substitute_z(replacement))),
            FieldExpr::Sqrt(b) => FieldExpr::Sqrt(Box::new(b.substitute_z(replacement))),
            FieldExpr::Sin(b) => FieldExpr::Sin(Box::new(b.substitute_z(replacement))),
            FieldExpr::Cos(b) => FieldExpr::Cos(Box::new(b.substitute_z(replacement))),
            FieldExpr::Arsinh(b) => FieldExpr::Arsinh(Box::new(b.substitute_z(replacement))),
        }
    }

    /// Evaluate at explicit coordinate values. Domain errors point at the
    /// offending node as a child-index chain from the root.
    pub fn eval_complex(&self, lookup: &dyn Fn(Coord) -> Option<Complex64>) -> Result<Complex64> {
        self.eval_complex_guarded(lookup, jets::BRANCH_CUT_TOL)
    }

    /// Evaluate while requiring every branch-node argument to keep at least
    /// `margin` distance from its cut (and pole arguments from zero).
    pub fn eval_complex_guarded(
        &self,
        lookup: &dyn Fn(Coord) -> Option<Complex64>,
        margin: f64,
    ) -> Result<Complex64> {
        let mut path = Vec::new();
        self.eval_complex_inner(lookup, margin, &mut path)
    }

    fn eval_complex_inner(
        &self,
        lookup: &dyn Fn(Coord) -> Option<Complex64>,
        margin: f64,
        path: &mut Vec<usize>,
    ) -> Result<Complex64> {
        fn descend(
            e: &FieldExpr,
            i: usize,
            path: &mut Vec<usize>,
            margin: f64,
            lookup: &dyn Fn(Coord) -> Option<Complex64>,
        ) -> Result<Complex64> {
            path.push(i);
            let r = e.eval_complex_inner(lookup, margin, path);
            path.pop();
            r
        }
        match self {
            FieldExpr::Const(c) => Ok(*c),
            FieldExpr::Coord(c) => lookup(*c).ok_or_else(|| {
                Error::Argument(format!("coordinate {} has no value here", c.name()))
            }),
            FieldExpr::Add(v) => {
                let mut acc = Complex64::ZERO;
                for (i, e) in v.iter().enumerate() {
                    acc += descend(e, i, path, margin, lookup)?;
                }
                Ok(acc)
            }
            FieldExpr::Mul(v) => {
                let mut acc = Complex64::ONE;
                for (i, e) in v.iter().enumerate() {
                    acc *= descend(e, i, path, margin, lookup)?;
                }
                Ok(acc)
            }
            FieldExpr::Neg(b) => Ok(-descend(b, 0, path, margin, lookup)?),
            FieldExpr::PowInt(b, p) => {
                let base = descend(b, 0, path, margin, lookup)?;
                if *p < 0 && base.norm() <= margin {
                    return Err(at_path(path, "pow_int", "argument at the pole 0"));
                }
                Ok(base.powi(*p))
            }
            FieldExpr::PowComplex(b, s) => {
                let base = descend(b, 0, path, margin, lookup)?;
                if jets::distance_to_log_cut(base) <= margin {
                    return Err(at_path(path, "pow_complex", "argument on the branch cut"));
                }
                Ok(base.powc(*s))
            }
            FieldExpr::Exp(b) => Ok(descend(b, 0, path, margin, lookup)?.exp()),
            FieldExpr::Log(b) => {
                let a = descend(b, 0, path, margin, lookup)?;
                if jets::distance_to_log_cut(a) <= margin {
                    return Err(at_path(path, "log", "argument on the branch cut"));
                }
                Ok(a.ln())
            }
            FieldExpr::Sqrt(b) => {
                let a = descend(b, 0, path, margin, lookup)?;
                if jets::distance_to_log_cut(a) <= margin {
                    return Err(at_path(path, "sqrt", "argument on the branch cut"));
                }
                Ok(a.sqrt())
            }
            FieldExpr::Sin(b) => Ok(descend(b, 0, path, margin, lookup)?.sin()),
            FieldExpr::Cos(b) => Ok(descend(b, 0, path, margin, lookup)?.cos()),
            FieldExpr::Arsinh(b) => {
                let a = descend(b, 0, path, margin, lookup)?;
                if jets::distance_to_arsinh_cut(a) <= margin {
                    return Err(at_path(path, "arsinh", "argument on the branch cut"));
                }
                Ok(a.asinh())
            }
        }
    }

    /// Evaluate over jets; `vars[i]` is the jet of coordinate slot `i` and
    /// `slot_of` maps coordinates to slots.
    pub fn eval_jet_with(
        &self,
        vars: &[Jet],
        slot_of: &dyn Fn(Coord) -> Option<usize>,
    ) -> Result<Jet> {
        if vars.is_empty() {
            return Err(Error::Argument("need at least one coordinate jet".into()));
        }
        let mut path = Vec::new();
        self.eval_jet_inner(vars, slot_of, &mut path)
    }

    fn eval_jet_inner(
        &self,
        vars: &[Jet],
        slot_of: &dyn Fn(Coord) -> Option<usize>,
        path: &mut Vec<usize>,
    ) -> Result<Jet> {
        let (dim, order) = (vars[0].dim(), vars[0].order());
        macro_rules! child {
            ($e:expr, $i:expr) => {{
                path.push($i);
                let r = $e.eval_jet_inner(vars, slot_of, path);
                path.pop();
                r?
            }};
        }
        let tag_path = |r: Result<Jet>, path: &[usize]| {
            r.map_err(|e| match e {
                Error::Domain(msg) => Error::Domain(format!("{msg} (node path {path:?})")),
                other => other,
            })
        };
        match self {
            FieldExpr::Const(c) => Ok(Jet::constant(*c, dim, order)),
            FieldExpr::Coord(c) => {
                let slot = slot_of(*c).ok_or_else(|| {
                    Error::Argument(format!("coordinate {} has no slot here", c.name()))
                })?;
                Ok(vars[slot].clone())
            }
            FieldExpr::Add(v) => {
                let mut acc = Jet::constant(Complex64::ZERO, dim, order);
                for (i, e) in v.iter().enumerate() {
                    acc = acc.add(&child!(e, i))?;
                }
                Ok(acc)
            }
            FieldExpr::Mul(v) => {
                let mut acc = Jet::constant(Complex64::ONE, dim, order);
                for (i, e) in v.iter().enumerate() {
                    acc = acc.mul(&child!(e, i))?;
                }
                Ok(acc)
            }
            FieldExpr::Neg(b) => Ok(child!(b, 0).neg()),
            FieldExpr::PowInt(b, p) => {
                let inner = child!(b, 0);
                tag_path(inner.powi(*p), path)
            }
            FieldExpr::PowComplex(b, s) => {
                let inner = child!(b, 0);
                tag_path(inner.powc(*s), path)
            }
            FieldExpr::Exp(b) => Ok(child!(b, 0).exp()),
            FieldExpr::Log(b) => {
                let inner = child!(b, 0);
                tag_path(inner.ln(), path)
            }
            FieldExpr::Sqrt(b) => {
                let inner = child!(b, 0);
                tag_path(inner.sqrt(), path)
            }
            FieldExpr::Sin(b) => Ok(child!(b, 0).sin()),
            FieldExpr::Cos(b) => Ok(child!(b, 0).cos()),
            FieldExpr::Arsinh(b) => {
                let inner = child!(b, 0);
                tag_path(inner.arsinh(), path)
            }
        }
    }

    /// Stable content hash of the serialized tree (FNV-1a), used to identify
    /// file-loaded functions inside reports.
    pub fn content_hash(&self) -> String {
        let bytes = self.to_json();
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in bytes.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&Wire::from_expr(self)).expect("serializable")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&Wire::from_expr(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<FieldExpr> {
        let wire: Wire =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("function: {e}")))?;
        wire.into_expr()
    }
}

fn at_path(path: &[usize], what: &str, msg: &str) -> Error {
    Error::Domain(format!("{what}: {msg} (node path {path:?})"))
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldExpr::Const(c) => {
                if c.im == 0.0 {
                    write!(f, "{}", c.re)
                } else {
                    write!(f, "({}+{}i)", c.re, c.im)
                }
            }
            FieldExpr::Coord(c) => write!(f, "{}", c.name()),
            FieldExpr::Add(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join(" + "))
            }
            FieldExpr::Mul(v) => {
                let parts: Vec<String> = v.iter().map(|e| e.to_string()).collect();
                write!(f, "({})", parts.join("*"))
            }
            FieldExpr::Neg(b) => write!(f, "-{b}"),
            FieldExpr::PowInt(b, p) => write!(f, "{b}^{p}"),
            FieldExpr::PowComplex(b, s) => write!(f, "{b}^({}+{}i)", s.re, s.im),
            FieldExpr::Exp(b) => write!(f, "exp{b}"),
            FieldExpr::Log(b) => write!(f, "log{b}"),
            FieldExpr::Sqrt(b) => write!(f, "sqrt{b}"),
            FieldExpr::Sin(b) => write!(f, "sin{b}"),
            FieldExpr::Cos(b) => write!(f, "cos{b}"),
            FieldExpr::Arsinh(b) => write!(f, "arsinh{b}"),
        }
    }
}

/// Wire form: nested `{op, args…}` objects, complex scalars as `[re, im]`.
#[derive(Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum Wire {
    Const { value: [f64; 2] },
    Coord { name: String },
    Add { args: Vec<Wire> },
    Mul { args: Vec<Wire> },
    Neg { args: Vec<Wire> },
    PowInt { args: Vec<Wire>, exponent: i32 },
    PowComplex { args: Vec<Wire>, exponent: [f64; 2] },
    Exp { args: Vec<Wire> },
    Log { args: Vec<Wire> },
    Sqrt { args: Vec<Wire> },
    Sin { args: Vec<Wire> },
    Cos { args: Vec<Wire> },
    Arsinh { args: Vec<Wire> },
}

impl Wire {
    fn from_expr(e: &FieldExpr) -> Wire {
        let pack = |v: &[FieldExpr]| v.iter().map(Wire::from_expr).collect::<Vec<_>>();
        match e {
            FieldExpr::Const(c) => Wire::Const { value: [c.re, c.im] },
            FieldExpr::Coord(c) => Wire::Coord { name: c.name() },
            FieldExpr::Add(v) => Wire::Add { args: pack(v) },
            FieldExpr::Mul(v) => Wire::Mul { args: pack(v) },
            FieldExpr::Neg(b) => Wire::Neg { args: vec![Wire::from_expr(b)] },
            FieldExpr::PowInt(b, p) => {
                Wire::PowInt { args: vec![Wire::from_expr(b)], exponent: *p }
            }
            FieldExpr::PowComplex(b, s) => {
                Wire::PowComplex { args: vec![Wire::from_expr(b)], exponent: [s.re, s.im] }
            }
            FieldExpr::Exp(b) => Wire::Exp { args: vec![Wire::from_expr(b)] },
            FieldExpr::Log(b) => Wire::Log { args: vec![Wire::from_expr(b)] },
            FieldExpr::Sqrt(b) => Wire::Sqrt { args: vec![Wire::from_expr(b)] },
            FieldExpr::Sin(b) => Wire::Sin { args: vec![Wire::from_expr(b)] },
            FieldExpr::Cos(b) => Wire::Cos { args: vec![Wire::from_expr(b)] },
            FieldExpr::Arsinh(b) => Wire::Arsinh { args: vec![Wire::from_expr(b)] },
        }
    }

    fn into_expr(self) -> Result<FieldExpr> {
        fn nary(args: Vec<Wire>, what: &str) -> Result<Vec<FieldExpr>> {
            if args.len() < 2 {
                return Err(Error::Parse(format!("{what} needs at least 2 arguments")));
            }
            args.into_iter().map(Wire::into_expr).collect()
        }
        fn unary(mut args: Vec<Wire>, what: &str) -> Result<Box<FieldExpr>> {
            if args.len() != 1 {
                return Err(Error::Parse(format!("{what} takes exactly 1 argument")));
            }
            Ok(Box::new(args.pop().unwrap().into_expr()?))
        }
        Ok(match self {
            Wire::Const { value } => FieldExpr::Const(Complex64::new(value[0], value[1])),
            Wire::Coord { name } => FieldExpr::Coord(Coord::parse(&name)?),
            Wire::Add { args } => FieldExpr::Add(nary(args, "add")?),
            Wire::Mul { args } => FieldExpr::Mul(nary(args, "mul")?),
            Wire::Neg { args } => FieldExpr::Neg(unary(args, "neg")?),
            Wire::PowInt { args, exponent } => FieldExpr::PowInt(unary(args, "pow_int")?, exponent),
            Wire::PowComplex { args, exponent } => FieldExpr::PowComplex(
                unary(args, "pow_complex")?,
                Complex64::new(exponent[0], exponent[1]),
            ),
            Wire::Exp { args } => FieldExpr::Exp(unary(args, "exp")?),
            Wire::Log { args } => FieldExpr::Log(unary(args, "log")?),
            Wire::Sqrt { args } => FieldExpr::Sqrt(unary(args, "sqrt")?),
            Wire::Sin { args } => FieldExpr::Sin(unary(args, "sin")?),
            Wire::Cos { args } => FieldExpr::Cos(unary(args, "cos")?),
            Wire::Arsinh { args } => FieldExpr::Arsinh(unary(args, "arsinh")?),
        })
    }
}

/// Linear form `c0 + Σ c_i coord_i` as an expression.
pub fn linear_form(constant: Complex64, terms: &[(Coord, Complex64)]) -> FieldExpr {
    let mut parts = Vec::with_capacity(terms.len() + 1);
    if constant.norm() > 0.0 {
        parts.push(FieldExpr::Const(constant));
    }
    for (c, w) in terms {
        if w.norm() > 0.0 {
            parts.push(FieldExpr::Coord(*c).scaled(*w));
        }
    }
    FieldExpr::add(parts)
}

/// Univariate polynomial in `z` (coefficients low-to-high) as an expression.
pub fn poly_in_z(coeffs: &[Complex64]) -> FieldExpr {
    let mut terms = Vec::new();
    for (k, c) in coeffs.iter().enumerate() {
        if c.norm() > 0.0 {
            terms.push(FieldExpr::z().powi(k as i32).scaled(*c));
        }
    }
    FieldExpr::add(terms)
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    fn arb_coord() -> impl Strategy<Value = Coord> {
        prop_oneof![
            (0usize..3).prop_map(Coord::T),
            Just(Coord::Xi),
            (0usize..4).prop_map(Coord::X),
            Just(Coord::Z),
        ]
    }

    fn arb_expr() -> impl Strategy<Value = FieldExpr> {
        let leaf = prop_oneof![
            (-10.0..10.0f64, -10.0..10.0f64)
                .prop_map(|(re, im)| FieldExpr::Const(Complex64::new(re, im))),
            arb_coord().prop_map(FieldExpr::Coord),
        ];
        leaf.prop_recursive(4, 24, 3, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 2..4).prop_map(FieldExpr::Add),
                prop::collection::vec(inner.clone(), 2..4).prop_map(FieldExpr::Mul),
                inner.clone().prop_map(|e| FieldExpr::Neg(Box::new(e))),
                (inner.clone(), -4..5i32)
                    .prop_map(|(e, p)| FieldExpr::PowInt(Box::new(e), p)),
                (inner.clone(), -2.0..2.0f64, -2.0..2.0f64).prop_map(|(e, re, im)| {
                    FieldExpr::PowComplex(Box::new(e), Complex64::new(re, im))
                }),
                inner.clone().prop_map(|e| FieldExpr::Exp(Box::new(e))),
                inner.clone().prop_map(|e| FieldExpr::Log(Box::new(e))),
                inner.clone().prop_map(|e| FieldExpr::Sqrt(Box::new(e))),
                inner.clone().prop_map(|e| FieldExpr::Sin(Box::new(e))),
                inner.clone().prop_map(|e| FieldExpr::Cos(Box::new(e))),
                inner.prop_map(|e| FieldExpr::Arsinh(Box::new(e))),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        /// Serialization round-trips structurally and textually.
        #[test]
        fn json_round_trip(expr in arb_expr()) {
            let json = expr.to_json();
            let back = FieldExpr::from_json(&json).unwrap();
            prop_assert_eq!(&back, &expr);
            prop_assert_eq!(back.to_json(), json);
            prop_assert_eq!(back.content_hash(), expr.content_hash());
        }
    }
}
