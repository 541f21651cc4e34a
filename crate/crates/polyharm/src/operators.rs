//! The tension field τ, the conformality operator κ and the iterated τ^r,
//! evaluated through jets, plus an independent finite-difference oracle.
//!
//! On both group families the operators reduce to closed coefficient
//! formulas in the global coordinates. Abelian target:
//!
//! ```text
//! τ(φ) = Σ_k (∂²φ/∂t_k² − ω_k ∂φ/∂t_k) + Σ_ij (μ μ^T)_ij ∂²φ/∂x_i∂x_j
//! κ(φ,ψ) = Σ_k ∂φ/∂t_k ∂ψ/∂t_k + Σ_ij (μ μ^T)_ij ∂φ/∂x_i ∂ψ/∂x_j
//! ```
//!
//! Heisenberg target: additionally the ∂²/∂ξ² term with coefficient
//! `a(t)² + ¼⟨μ^T J x, μ^T J x⟩`, and the mixed ∂²/∂ξ∂x_i terms with
//! coefficients `(μ μ^T J x)_i`.
//!
//! Iteration happens at the jet level: the field is expanded once at order
//! `2r` and the τ assembly is applied r times, losing two orders per
//! application, so every recorded value of τ^α is exact to rounding. The
//! coefficient jets depend only on the point (not the field) and are built
//! once per (point, order).

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expr::{Coord, FieldExpr};
use crate::groups::{a_scalar, heisenberg_j, GroupSpec, Point, TargetKind};
use crate::jets::Jet;
use crate::linalg::{mat_exp_jet, JetMatrix};

/// Default step for the finite-difference oracle.
pub const DEFAULT_FD_STEP: f64 = 1e-4;

/// Values of τ^α(field) at a point for α = 0..r.
#[derive(Debug, Clone)]
pub struct TauEvaluation {
    pub values: Vec<Complex64>,
    pub jet_order_used: usize,
}

impl TauEvaluation {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }
}

/// Order-K jet of a field at a point, differentiating in all group
/// coordinates.
pub fn eval_jet(field: &FieldExpr, spec: &GroupSpec, point: &Point, order: usize) -> Result<Jet> {
    field.validate_for(spec)?;
    spec.validate_point(point)?;
    let vars = coordinate_jets(spec, point, order)?;
    field.eval_jet_with(&vars, &slot_fn(spec))
}

fn slot_fn(spec: &GroupSpec) -> impl Fn(Coord) -> Option<usize> + '_ {
    move |c| match c {
        Coord::T(k) if k < spec.m() => Some(spec.t_slot(k)),
        Coord::Xi if spec.has_xi() => Some(spec.xi_slot()),
        Coord::X(i) if i < spec.x_dim() => Some(spec.x_slot(i)),
        _ => None,
    }
}

fn coordinate_jets(spec: &GroupSpec, point: &Point, order: usize) -> Result<Vec<Jet>> {
    let dim = spec.jet_dim();
    let flat = point.flat();
    (0..dim)
        .map(|i| Jet::variable(i, Complex64::new(flat[i], 0.0), dim, order))
        .collect()
}

/// Point-bound coefficient jets of the τ and κ formulas, reusable across
/// the r applications of an iterated evaluation.
pub struct TauCoefficients {
    kind: TargetKind,
    m: usize,
    x_dim: usize,
    xi_slot: usize,
    x_slot0: usize,
    omega: Vec<f64>,
    order: usize,
    /// (μ μ^T)_ij at full jet order, row-major.
    mu_mu_t: Vec<Jet>,
    /// ξξ-coefficient and the mixed ξx_i coefficients (Heisenberg only).
    xi_xi: Option<Jet>,
    xi_x: Vec<Jet>,
}

impl TauCoefficients {
    /// Build the coefficient jets for a (spec, point, order) triple.
    ///
    /// μ(t) and a(t) are expanded as jets in the t-block only and then
    /// embedded into the full coordinate space, which keeps the matrix
    /// exponential cheap at high orders.
    pub fn build(spec: &GroupSpec, point: &Point, order: usize) -> Result<TauCoefficients> {
        spec.validate_point(point)?;
        let dim = spec.jet_dim();
        let m = spec.m();
        let x_dim = spec.x_dim();

        // jets of t_k in the m-dimensional t-space
        let t_vars: Vec<Jet> = (0..m)
            .map(|k| Jet::variable(k, Complex64::new(point.t[k], 0.0), m, order))
            .collect::<Result<Vec<_>>>()?;

        // Exp(Σ A_k t_k) over t-jets
        let zero_t = Jet::constant(Complex64::ZERO, m, order);
        let mut sum_entries = vec![zero_t; x_dim * x_dim];
        for (k, a) in spec.family().iter().enumerate() {
            for i in 0..x_dim {
                for j in 0..x_dim {
                    let w = a[(i, j)];
                    if w != 0.0 {
                        let term = t_vars[k].scale(Complex64::new(w, 0.0));
                        sum_entries[i * x_dim + j] = sum_entries[i * x_dim + j].add(&term)?;
                    }
                }
            }
        }
        let mu_t = mat_exp_jet(&JetMatrix::from_entries(x_dim, x_dim, sum_entries)?)?;
        let mu_mu_t_small = mu_t.mul(&mu_t.transpose())?;

        let embed = |j: &Jet| embed_t_jet(j, spec, dim, order);
        let mu_mu_t: Vec<Jet> = mu_mu_t_small.entries.iter().map(embed).collect::<Result<_>>()?;

        let (xi_xi, xi_x) = if spec.kind() == TargetKind::HeisenbergTarget {
            // a(t)^2 as a t-jet, embedded
            let tr_form = {
                let mut acc = Jet::constant(Complex64::ZERO, m, order);
                for (k, a) in spec.family().iter().enumerate() {
                    acc = acc.add(&t_vars[k].scale(Complex64::new(a.trace(), 0.0)))?;
                }
                acc.scale(Complex64::new(2.0 / spec.n() as f64, 0.0))
            };
            let a_sq = embed(&tr_form.exp())?;

            // J x as full-space jets (linear in the x coordinates)
            let j_mat = heisenberg_j(spec.n());
            let x_jets: Vec<Jet> = (0..x_dim)
                .map(|i| {
                    Jet::variable(
                        spec.x_slot(i),
                        Complex64::new(point.x[i], 0.0),
                        dim,
                        order,
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let jx: Vec<Jet> = (0..x_dim)
                .map(|i| {
                    let mut acc = Jet::constant(Complex64::ZERO, dim, order);
                    for (l, xj) in x_jets.iter().enumerate() {
                        let w = j_mat[(i, l)];
                        if w != 0.0 {
                            acc = acc.add(&xj.scale(Complex64::new(w, 0.0)))?;
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?;

            let mu_full: Vec<Jet> = mu_t.entries.iter().map(embed).collect::<Result<_>>()?;
            let mu_full = JetMatrix::from_entries(x_dim, x_dim, mu_full)?;
            let mu_t_jx = mu_full.transpose().mul_vec(&jx)?;
            let mut quarter_norm = Jet::constant(Complex64::ZERO, dim, order);
            for v in &mu_t_jx {
                quarter_norm = quarter_norm.add(&v.mul(v)?)?;
            }
            let xi_xi = a_sq.add(&quarter_norm.scale(Complex64::new(0.25, 0.0)))?;

            let mmt_full = JetMatrix::from_entries(x_dim, x_dim, mu_mu_t.clone())?;
            let xi_x = mmt_full.mul_vec(&jx)?;
            (Some(xi_xi), xi_x)
        } else {
            (None, Vec::new())
        };

        Ok(TauCoefficients {
            kind: spec.kind(),
            m,
            x_dim,
            xi_slot: spec.xi_slot(),
            x_slot0: spec.x_slot(0),
            omega: spec.omega().to_vec(),
            order,
            mu_mu_t,
            xi_xi,
            xi_x,
        })
    }

    /// Apply the τ assembly to a field jet of order `K <= order`, producing
    /// the jet of τφ at order `K - 2`.
    pub fn apply(&self, phi: &Jet) -> Result<Jet> {
        let k_in = phi.order();
        if k_in < 2 {
            return Err(Error::Argument(format!(
                "tau needs a jet of order >= 2, got {k_in}"
            )));
        }
        if k_in > self.order {
            return Err(Error::Argument(format!(
                "field jet order {k_in} exceeds the coefficient order {}",
                self.order
            )));
        }
        let k_out = k_in - 2;
        let mut acc = Jet::constant(Complex64::ZERO, phi.dim(), k_out);

        // drift block: Σ_k ∂²/∂t_k² − ω_k ∂/∂t_k
        for k in 0..self.m {
            let d1 = phi.derivative(k)?;
            let d2 = d1.derivative(k)?;
            acc = acc.add(&d2.truncated(k_out)?)?;
            let drift = d1.truncated(k_out)?.scale(Complex64::new(-self.omega[k], 0.0));
            acc = acc.add(&drift)?;
        }

        // flat block: Σ_ij (μ μ^T)_ij ∂²/∂x_i∂x_j, using symmetry
        for i in 0..self.x_dim {
            let di = phi.derivative(self.x_slot0 + i)?;
            for j in i..self.x_dim {
                let d2 = di.derivative(self.x_slot0 + j)?.truncated(k_out)?;
                let coeff = self.mu_mu_t[i * self.x_dim + j].truncated(k_out)?;
                let factor = if i == j { 1.0 } else { 2.0 };
                acc = acc.add(&coeff.mul(&d2)?.scale(Complex64::new(factor, 0.0)))?;
            }
        }

        if self.kind == TargetKind::HeisenbergTarget {
            let dxi = phi.derivative(self.xi_slot)?;
            let dxixi = dxi.derivative(self.xi_slot)?.truncated(k_out)?;
            let cxx = self.xi_xi.as_ref().expect("present on Heisenberg").truncated(k_out)?;
            acc = acc.add(&cxx.mul(&dxixi)?)?;
            for i in 0..self.x_dim {
                let mixed = dxi.derivative(self.x_slot0 + i)?.truncated(k_out)?;
                let coeff = self.xi_x[i].truncated(k_out)?;
                acc = acc.add(&coeff.mul(&mixed)?)?;
            }
        }
        Ok(acc)
    }

    /// κ(f, g) from order-≥1 field jets, as a scalar. The assembly order is
    /// symmetric in f and g, so κ(f,g) == κ(g,f) exactly.
    pub fn kappa_scalar(&self, f: &Jet, g: &Jet) -> Result<Complex64> {
        let d1 = |jet: &Jet, slot: usize| -> Result<Complex64> {
            let mut alpha = vec![0u8; jet.dim()];
            alpha[slot] = 1;
            jet.partial(&alpha)
        };
        let mut acc = Complex64::ZERO;
        for k in 0..self.m {
            acc += d1(f, k)? * d1(g, k)?;
        }
        if self.kind == TargetKind::HeisenbergTarget {
            let cxx = self.xi_xi.as_ref().expect("present").value();
            acc += cxx * d1(f, self.xi_slot)? * d1(g, self.xi_slot)?;
            for i in 0..self.x_dim {
                let c = self.xi_x[i].value() * 0.5;
                acc += c
                    * (d1(f, self.xi_slot)? * d1(g, self.x_slot0 + i)?
                        + d1(f, self.x_slot0 + i)? * d1(g, self.xi_slot)?);
            }
        }
        for i in 0..self.x_dim {
            for j in 0..self.x_dim {
                let c = self.mu_mu_t[i * self.x_dim + j].value();
                acc += c * d1(f, self.x_slot0 + i)? * d1(g, self.x_slot0 + j)?;
            }
        }
        Ok(acc)
    }
}

fn embed_t_jet(j: &Jet, spec: &GroupSpec, dim: usize, order: usize) -> Result<Jet> {
    // Copy a jet in the t-variables into the full coordinate space by
    // re-scattering its coefficients; t-slots come first in both spaces.
    let mut out = Jet::constant(Complex64::ZERO, dim, order);
    let mut out_coeffs = vec![Complex64::ZERO; out.coefficients().len()];
    let mut alpha_full = vec![0u8; dim];
    for (k, &c) in j.coefficients().iter().enumerate() {
        if c.norm() == 0.0 {
            continue;
        }
        let alpha_t = j.index_of(k);
        alpha_full.iter_mut().for_each(|a| *a = 0);
        alpha_full[..spec.m()].copy_from_slice(alpha_t);
        let rank = rank_of(&out, &alpha_full)?;
        out_coeffs[rank] = c;
    }
    out = Jet::constant(Complex64::ZERO, dim, order);
    // rebuild with the scattered coefficients
    Ok(out.with_coefficients(out_coeffs))
}

fn rank_of(reference: &Jet, alpha: &[u8]) -> Result<usize> {
    reference.rank_of_index(alpha)
}

/// τ^α(field)(point) for α = 0..r, via a single jet expansion of order `2r`.
pub fn tau_iter(spec: &GroupSpec, field: &FieldExpr, point: &Point, r: usize) -> Result<TauEvaluation> {
    if r == 0 {
        return Err(Error::Argument("iterated tau needs r >= 1".into()));
    }
    let order = 2 * r;
    let coeffs = TauCoefficients::build(spec, point, order)?;
    let mut jet = eval_jet(field, spec, point, order)?;
    let mut values = Vec::with_capacity(r + 1);
    values.push(jet.value());
    for _ in 0..r {
        jet = coeffs.apply(&jet)?;
        values.push(jet.value());
    }
    Ok(TauEvaluation { values, jet_order_used: order })
}

/// τ(field)(point) through jets.
pub fn tau(spec: &GroupSpec, field: &FieldExpr, point: &Point) -> Result<Complex64> {
    Ok(tau_iter(spec, field, point, 1)?.values[1])
}

/// κ(f, g)(point) through order-1 jets.
pub fn kappa(spec: &GroupSpec, f: &FieldExpr, g: &FieldExpr, point: &Point) -> Result<Complex64> {
    f.validate_for(spec)?;
    g.validate_for(spec)?;
    let coeffs = TauCoefficients::build(spec, point, 1)?;
    let fj = eval_jet(f, spec, point, 1)?;
    let gj = eval_jet(g, spec, point, 1)?;
    coeffs.kappa_scalar(&fj, &gj)
}

/// τ(field)(point) with every partial derivative replaced by a central
/// finite difference of plain evaluations: 3-point stencils for pure second
/// derivatives, 4-point cross stencils for mixed ones. Independent of the
/// jet path; this is the oracle the jet evaluations are checked against.
pub fn tau_fd(spec: &GroupSpec, field: &FieldExpr, point: &Point, h: f64) -> Result<Complex64> {
    field.validate_for(spec)?;
    spec.validate_point(point)?;
    if h <= 0.0 {
        return Err(Error::Argument("finite-difference step must be positive".into()));
    }
    let flat = point.flat();
    let eval = |coords: &[f64]| -> Result<Complex64> {
        let lookup = make_lookup(spec, coords);
        field.eval_complex(&lookup)
    };
    let shift = |base: &[f64], i: usize, s: f64| {
        let mut v = base.to_vec();
        v[i] += s;
        v
    };
    let f0 = eval(&flat)?;
    let d1 = |i: usize| -> Result<Complex64> {
        Ok((eval(&shift(&flat, i, h))? - eval(&shift(&flat, i, -h))?) / (2.0 * h))
    };
    let d2 = |i: usize, j: usize| -> Result<Complex64> {
        if i == j {
            Ok((eval(&shift(&flat, i, h))? - 2.0 * f0 + eval(&shift(&flat, i, -h))?) / (h * h))
        } else {
            let pp = eval(&shift(&shift(&flat, i, h), j, h))?;
            let pm = eval(&shift(&shift(&flat, i, h), j, -h))?;
            let mp = eval(&shift(&shift(&flat, i, -h), j, h))?;
            let mm = eval(&shift(&shift(&flat, i, -h), j, -h))?;
            Ok((pp - pm - mp + mm) / (4.0 * h * h))
        }
    };
    let mut acc = Complex64::ZERO;
    for k in 0..spec.m() {
        acc += d2(k, k)? - spec.omega()[k] * d1(k)?;
    }
    let mu = spec.mu(&point.t)?;
    let mmt = &mu * mu.transpose();
    for i in 0..spec.x_dim() {
        for j in 0..spec.x_dim() {
            acc += mmt[(i, j)] * d2(spec.x_slot(i), spec.x_slot(j))?;
        }
    }
    if spec.kind() == TargetKind::HeisenbergTarget {
        let a = a_scalar(spec, &point.t)?;
        let jx = heisenberg_j(spec.n())
            * nalgebra::DMatrix::from_column_slice(spec.x_dim(), 1, &point.x);
        let mut mt_jx_sq = 0.0;
        let mt = mu.transpose();
        for i in 0..spec.x_dim() {
            let mut v = 0.0;
            for l in 0..spec.x_dim() {
                v += mt[(i, l)] * jx[(l, 0)];
            }
            mt_jx_sq += v * v;
        }
        acc += (a * a + 0.25 * mt_jx_sq) * d2(spec.xi_slot(), spec.xi_slot())?;
        let mmt_jx = &mmt * &jx;
        for i in 0..spec.x_dim() {
            acc += mmt_jx[(i, 0)] * d2(spec.xi_slot(), spec.x_slot(i))?;
        }
    }
    Ok(acc)
}

pub(crate) fn make_lookup<'a>(
    spec: &'a GroupSpec,
    coords: &'a [f64],
) -> impl Fn(Coord) -> Option<Complex64> + 'a {
    move |c| match c {
        Coord::T(k) if k < spec.m() => Some(Complex64::new(coords[spec.t_slot(k)], 0.0)),
        Coord::Xi if spec.has_xi() => Some(Complex64::new(coords[spec.xi_slot()], 0.0)),
        Coord::X(i) if i < spec.x_dim() => Some(Complex64::new(coords[spec.x_slot(i)], 0.0)),
        _ => None,
    }
}

/// Plain evaluation of a field at a point.
pub fn eval_value(spec: &GroupSpec, field: &FieldExpr, point: &Point) -> Result<Complex64> {
    field.validate_for(spec)?;
    spec.validate_point(point)?;
    let flat = point.flat();
    let value = field.eval_complex(&make_lookup(spec, &flat));
    value
}

/// |τ(fg) − τ(f)g − 2κ(f,g) − f τ(g)| at a point, all terms through jets.
pub fn product_rule_residual(
    spec: &GroupSpec,
    f: &FieldExpr,
    g: &FieldExpr,
    point: &Point,
) -> Result<Complex64> {
    let product = FieldExpr::mul(vec![f.clone(), g.clone()]);
    let tau_fg = tau(spec, &product, point)?;
    let tau_f = tau(spec, f, point)?;
    let tau_g = tau(spec, g, point)?;
    let kap = kappa(spec, f, g, point)?;
    let f0 = eval_value(spec, f, point)?;
    let g0 = eval_value(spec, g, point)?;
    Ok(tau_fg - tau_f * g0 - 2.0 * kap - f0 * tau_g)
}
