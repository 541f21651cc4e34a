//! Truncated multivariate Taylor-jet arithmetic over complex coefficients.
//!
//! A [`Jet`] stores the Taylor coefficients of a smooth complex-valued
//! function of `dim` real variables at a point, up to total degree `order`.
//! The coefficient attached to the multi-index α is `∂^α f / α!`, so jets
//! propagate *all* partial derivatives up to the truncation order through
//! arithmetic and analytic primitives in a single forward pass.
//!
//! Storage is dense, indexed by graded-lexicographic rank: dimensions stay
//! small (≤ 8) and orders modest (≤ 10, twice the polyharmonic order being
//! certified), where dense tables with a precomputed Cauchy-product pair
//! list beat sparse maps.
//!
//! All principal branches: `ln` and complex powers cut along (−∞, 0],
//! `arsinh` along the imaginary axis outside [−i, i]. Operations reject
//! constant terms within `1e-12` of a cut.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance under which a constant term is considered to sit on a branch cut.
pub const BRANCH_CUT_TOL: f64 = 1e-12;

/// Exponent vector of a multivariate Taylor term. Entry `i` is the power of
/// coordinate `i`; the total degree is the entry sum.
pub type MultiIndex = Vec<u8>;

/// Shared per-(dim, order) tables: the graded-lex index enumeration, its
/// inverse, the Cauchy-product pair list and the coefficient maps for
/// single-coordinate differentiation.
struct JetShape {
    dim: usize,
    order: usize,
    indices: Vec<MultiIndex>,
    rank: HashMap<MultiIndex, u32>,
    /// `pairs[pair_offsets[t]..pair_offsets[t+1]]` lists the (a, b) ranks
    /// with index(a) + index(b) = index(t).
    pair_offsets: Vec<u32>,
    pairs: Vec<(u32, u32)>,
    /// `deriv[c][j] = (src, factor)`: coefficient `j` of ∂/∂x_c (a jet of
    /// order `order - 1`) is `factor * coeffs[src]`.
    deriv: Vec<Vec<(u32, f64)>>,
}

fn enumerate_indices(dim: usize, order: usize) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    let mut scratch = vec![0u8; dim];
    for degree in 0..=order {
        push_degree(&mut out, &mut scratch, 0, degree as u8);
    }
    out
}

fn push_degree(out: &mut Vec<MultiIndex>, scratch: &mut [u8], pos: usize, remaining: u8) {
    if pos + 1 == scratch.len() {
        scratch[pos] = remaining;
        out.push(scratch.to_vec());
        return;
    }
    for v in (0..=remaining).rev() {
        scratch[pos] = v;
        push_degree(out, scratch, pos + 1, remaining - v);
    }
}

impl JetShape {
    fn build(dim: usize, order: usize) -> Self {
        let indices = enumerate_indices(dim, order);
        let mut rank = HashMap::with_capacity(indices.len());
        for (i, idx) in indices.iter().enumerate() {
            rank.insert(idx.clone(), i as u32);
        }

        let mut pair_offsets = Vec::with_capacity(indices.len() + 1);
        let mut pairs = Vec::new();
        let mut sub = vec![0u8; dim];
        for target in &indices {
            pair_offsets.push(pairs.len() as u32);
            enumerate_pairs(target, &mut sub, 0, &rank, &mut pairs);
        }
        pair_offsets.push(pairs.len() as u32);

        // Differentiation maps target the order-(K-1) enumeration.
        let mut deriv = Vec::with_capacity(dim);
        if order >= 1 {
            let lower = enumerate_indices(dim, order - 1);
            for c in 0..dim {
                let mut map = Vec::with_capacity(lower.len());
                for beta in &lower {
                    let mut src = beta.clone();
                    src[c] += 1;
                    let src_rank = rank[&src];
                    map.push((src_rank, f64::from(beta[c]) + 1.0));
                }
                deriv.push(map);
            }
        }

        JetShape { dim, order, indices, rank, pair_offsets, pairs, deriv }
    }

    fn len(&self) -> usize {
        self.indices.len()
    }
}

fn enumerate_pairs(
    target: &[u8],
    sub: &mut [u8],
    pos: usize,
    rank: &HashMap<MultiIndex, u32>,
    pairs: &mut Vec<(u32, u32)>,
) {
    if pos == target.len() {
        let a = rank[&sub.to_vec()];
        let b_idx: MultiIndex = target.iter().zip(sub.iter()).map(|(t, s)| t - s).collect();
        let b = rank[&b_idx];
        pairs.push((a, b));
        return;
    }
    for v in 0..=target[pos] {
        sub[pos] = v;
        enumerate_pairs(target, sub, pos + 1, rank, pairs);
    }
}

fn shape(dim: usize, order: usize) -> Arc<JetShape> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<JetShape>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(s) = cache.lock().unwrap().get(&(dim, order)) {
        return Arc::clone(s);
    }
    let built = Arc::new(JetShape::build(dim, order));
    let mut guard = cache.lock().unwrap();
    Arc::clone(guard.entry((dim, order)).or_insert(built))
}

/// Truncated multivariate Taylor expansion of a complex-valued function.
///
/// Binary operations require operands of equal `dim` and `order`.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<JetShape>,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet(dim={}, order={}, value={})", self.dim(), self.order(), self.value())
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

impl Jet {
    /// The jet of a constant function.
    pub fn constant(value: Complex64, dim: usize, order: usize) -> Jet {
        let shape = shape(dim, order);
        let mut coeffs = vec![Complex64::ZERO; shape.len()];
        coeffs[0] = value;
        Jet { shape, coeffs }
    }

    /// The jet of the coordinate function `x_index` at `value`: constant term
    /// `value`, a single unit first-order coefficient, everything else zero.
    pub fn variable(index: usize, value: Complex64, dim: usize, order: usize) -> Result<Jet> {
        if index >= dim {
            return Err(Error::Argument(format!(
                "coordinate index {index} out of range for dimension {dim}"
            )));
        }
        if order < 1 {
            return Err(Error::Argument("variable jets need order >= 1".into()));
        }
        let mut jet = Jet::constant(value, dim, order);
        let mut idx = vec![0u8; dim];
        idx[index] = 1;
        let slot = jet.shape.rank[&idx] as usize;
        jet.coeffs[slot] = Complex64::ONE;
        Ok(jet)
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn order(&self) -> usize {
        self.shape.order
    }

    /// Constant (degree-zero) coefficient: the function value.
    pub fn value(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Raw Taylor coefficients in graded-lexicographic order.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// The multi-index of coefficient slot `i`.
    pub fn index_of(&self, i: usize) -> &[u8] {
        &self.shape.indices[i]
    }

    /// Taylor coefficient at a multi-index (not the derivative; see
    /// [`Jet::partial`]).
    pub fn coefficient(&self, alpha: &[u8]) -> Result<Complex64> {
        let rank = self.lookup(alpha)?;
        Ok(self.coeffs[rank as usize])
    }

    /// The true partial derivative `∂^α f = α! * coeff(α)`.
    pub fn partial(&self, alpha: &[u8]) -> Result<Complex64> {
        let rank = self.lookup(alpha)?;
        let mut fact = 1.0;
        for &a in alpha {
            for k in 2..=u32::from(a) {
                fact *= f64::from(k);
            }
        }
        Ok(self.coeffs[rank as usize] * fact)
    }

    fn lookup(&self, alpha: &[u8]) -> Result<u32> {
        if alpha.len() != self.dim() {
            return Err(Error::Argument(format!(
                "multi-index length {} does not match jet dimension {}",
                alpha.len(),
                self.dim()
            )));
        }
        let degree: usize = alpha.iter().map(|&a| usize::from(a)).sum();
        if degree > self.order() {
            return Err(Error::Argument(format!(
                "multi-index degree {} exceeds jet order {}",
                degree,
                self.order()
            )));
        }
        Ok(self.shape.rank[&alpha.to_vec()])
    }

    fn check_same(&self, other: &Jet) -> Result<()> {
        if self.dim() != other.dim() || self.order() != other.order() {
            return Err(Error::Argument(format!(
                "jet mismatch: ({}, {}) vs ({}, {})",
                self.dim(),
                self.order(),
                other.dim(),
                other.order()
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Jet { shape: Arc::clone(&self.shape), coeffs })
    }

    pub fn sub(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Jet { shape: Arc::clone(&self.shape), coeffs })
    }

    pub fn neg(&self) -> Jet {
        let coeffs = self.coeffs.iter().map(|a| -a).collect();
        Jet { shape: Arc::clone(&self.shape), coeffs }
    }

    pub fn scale(&self, factor: Complex64) -> Jet {
        let coeffs = self.coeffs.iter().map(|a| a * factor).collect();
        Jet { shape: Arc::clone(&self.shape), coeffs }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet) -> Result<Jet> {
        self.check_same(other)?;
        let shape = &self.shape;
        let mut coeffs = vec![Complex64::ZERO; shape.len()];
        for (t, out) in coeffs.iter_mut().enumerate() {
            let lo = shape.pair_offsets[t] as usize;
            let hi = shape.pair_offsets[t + 1] as usize;
            let mut acc = Complex64::ZERO;
            for &(a, b) in &shape.pairs[lo..hi] {
                acc += self.coeffs[a as usize] * other.coeffs[b as usize];
            }
            *out = acc;
        }
        Ok(Jet { shape: Arc::clone(shape), coeffs })
    }

    /// Drop coefficients above `new_order`. Graded ordering makes the
    /// surviving block a prefix, so this agrees with recomputing at the
    /// lower order.
    pub fn truncated(&self, new_order: usize) -> Result<Jet> {
        if new_order > self.order() {
            return Err(Error::Argument(format!(
                "cannot truncate order {} jet to order {}",
                self.order(),
                new_order
            )));
        }
        let target = shape(self.dim(), new_order);
        let coeffs = self.coeffs[..target.len()].to_vec();
        Ok(Jet { shape: target, coeffs })
    }

    /// Single-coordinate derivative as a jet of order `order - 1`.
    pub fn derivative(&self, coord: usize) -> Result<Jet> {
        if coord >= self.dim() {
            return Err(Error::Argument(format!(
                "coordinate {} out of range for dimension {}",
                coord,
                self.dim()
            )));
        }
        if self.order() == 0 {
            return Err(Error::Argument("cannot differentiate an order-0 jet".into()));
        }
        let target = shape(self.dim(), self.order() - 1);
        let map = &self.shape.deriv[coord];
        let coeffs = map.iter().map(|&(src, f)| self.coeffs[src as usize] * f).collect();
        Ok(Jet { shape: target, coeffs })
    }

    /// Compose a univariate analytic germ onto this jet: `series[k]` is the
    /// k-th Taylor coefficient of `f` around the constant term, and the
    /// result is `Σ series[k] (self - a0)^k` truncated at the jet order.
    fn compose_series(&self, series: &[Complex64]) -> Jet {
        debug_assert_eq!(series.len(), self.order() + 1);
        let mut reduced = self.clone();
        reduced.coeffs[0] = Complex64::ZERO;
        let mut acc = Jet::constant(series[self.order()], self.dim(), self.order());
        for k in (0..self.order()).rev() {
            acc = acc.mul(&reduced).expect("same shape");
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let mut series = vec![Complex64::ZERO; self.order() + 1];
        series[0] = self.value().exp();
        for k in 1..series.len() {
            series[k] = series[k - 1] / k as f64;
        }
        self.compose_series(&series)
    }

    pub fn sin(&self) -> Jet {
        self.sin_cos_series(true)
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos_series(false)
    }

    fn sin_cos_series(&self, is_sin: bool) -> Jet {
        let (s, c) = (self.value().sin(), self.value().cos());
        let cycle = if is_sin { [s, c, -s, -c] } else { [c, -s, -c, s] };
        let mut series = vec![Complex64::ZERO; self.order() + 1];
        let mut inv_fact = 1.0;
        for (k, out) in series.iter_mut().enumerate() {
            if k > 0 {
                inv_fact /= k as f64;
            }
            *out = cycle[k % 4] * inv_fact;
        }
        self.compose_series(&series)
    }

    pub fn ln(&self) -> Result<Jet> {
        check_off_log_cut(self.value(), "log")?;
        let a0 = self.value();
        let mut series = vec![Complex64::ZERO; self.order() + 1];
        series[0] = a0.ln();
        if self.order() >= 1 {
            series[1] = a0.inv();
        }
        for k in 2..series.len() {
            series[k] = -series[k - 1] * (k as f64 - 1.0) / (k as f64 * a0);
        }
        Ok(self.compose_series(&series))
    }

    pub fn sqrt(&self) -> Result<Jet> {
        check_off_log_cut(self.value(), "sqrt")?;
        self.pow_series(Complex64::new(0.5, 0.0), "sqrt")
    }

    /// Principal-branch complex power `self^s`.
    pub fn powc(&self, s: Complex64) -> Result<Jet> {
        check_off_log_cut(self.value(), "pow_complex")?;
        self.pow_series(s, "pow_complex")
    }

    fn pow_series(&self, s: Complex64, _what: &str) -> Result<Jet> {
        let a0 = self.value();
        let mut series = vec![Complex64::ZERO; self.order() + 1];
        series[0] = a0.powc(s);
        for k in 1..series.len() {
            let kf = k as f64;
            series[k] = series[k - 1] * (s - (kf - 1.0)) / (kf * a0);
        }
        Ok(self.compose_series(&series))
    }

    /// Integer power. Non-negative exponents multiply out exactly (defined
    /// for any constant term); negative ones go through the reciprocal and
    /// require a constant term away from zero.
    pub fn powi(&self, p: i32) -> Result<Jet> {
        if p < 0 {
            return self.recip()?.powi(-p);
        }
        let mut acc = Jet::constant(Complex64::ONE, self.dim(), self.order());
        let mut base = self.clone();
        let mut e = p as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    pub fn recip(&self) -> Result<Jet> {
        let a0 = self.value();
        if a0.norm() <= BRANCH_CUT_TOL {
            return Err(Error::Domain(format!(
                "recip: constant term {a0} within {BRANCH_CUT_TOL:.0e} of the pole at 0"
            )));
        }
        let mut series = vec![Complex64::ZERO; self.order() + 1];
        series[0] = a0.inv();
        for k in 1..series.len() {
            series[k] = -series[k - 1] / a0;
        }
        Ok(self.compose_series(&series))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet> {
        self.mul(&other.recip()?)
    }

    /// Principal-branch inverse hyperbolic sine, `log(z + sqrt(z^2 + 1))`,
    /// with the induced cut on the imaginary axis outside [−i, i].
    pub fn arsinh(&self) -> Result<Jet> {
        check_off_arsinh_cut(self.value())?;
        let one = Jet::constant(Complex64::ONE, self.dim(), self.order());
        let inner = self.mul(self)?.add(&one)?;
        // Off the arsinh cut both z^2+1 and z + sqrt(z^2+1) avoid the log cut.
        self.add(&inner.sqrt()?)?.ln()
    }

    /// Largest coefficient magnitude; convenient as an error-control norm.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Replace the full coefficient table. The caller must supply exactly
    /// one coefficient per multi-index slot.
    pub(crate) fn with_coefficients(self, coeffs: Vec<Complex64>) -> Jet {
        assert_eq!(coeffs.len(), self.shape.len());
        Jet { shape: self.shape, coeffs }
    }

    /// Slot of a multi-index in the coefficient table.
    pub(crate) fn rank_of_index(&self, alpha: &[u8]) -> Result<usize> {
        Ok(self.lookup(alpha)? as usize)
    }
}

/// Distance from `z` to the ray (−∞, 0].
pub fn distance_to_log_cut(z: Complex64) -> f64 {
    if z.re <= 0.0 {
        z.im.abs()
    } else {
        z.norm()
    }
}

/// Distance from `z` to the arsinh cut, the imaginary axis outside [−i, i].
pub fn distance_to_arsinh_cut(z: Complex64) -> f64 {
    if z.im.abs() >= 1.0 {
        z.re.abs()
    } else {
        z.re.hypot(1.0 - z.im.abs())
    }
}

fn check_off_log_cut(z: Complex64, what: &str) -> Result<()> {
    if distance_to_log_cut(z) <= BRANCH_CUT_TOL {
        return Err(Error::Domain(format!(
            "{what}: constant term {z} within {BRANCH_CUT_TOL:.0e} of the branch cut (-inf, 0]"
        )));
    }
    Ok(())
}

fn check_off_arsinh_cut(z: Complex64) -> Result<()> {
    if distance_to_arsinh_cut(z) <= BRANCH_CUT_TOL {
        return Err(Error::Domain(format!(
            "arsinh: constant term {z} within {BRANCH_CUT_TOL:.0e} of the branch cut i*[1, inf) u -i*[1, inf)"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn variable_jet_layout() {
        let j = Jet::variable(0, c(2.0, 0.0), 2, 2).unwrap();
        assert_eq!(j.coefficient(&[0, 0]).unwrap(), c(2.0, 0.0));
        assert_eq!(j.coefficient(&[1, 0]).unwrap(), Complex64::ONE);
        assert_eq!(j.coefficient(&[0, 1]).unwrap(), Complex64::ZERO);
        assert_eq!(j.coefficient(&[2, 0]).unwrap(), Complex64::ZERO);
        assert_eq!(j.coefficient(&[1, 1]).unwrap(), Complex64::ZERO);

        let j = Jet::variable(1, Complex64::ZERO, 2, 1).unwrap();
        assert_eq!(j.coefficient(&[0, 0]).unwrap(), Complex64::ZERO);
        assert_eq!(j.coefficient(&[0, 1]).unwrap(), Complex64::ONE);
        assert_eq!(j.coefficient(&[1, 0]).unwrap(), Complex64::ZERO);
    }

    #[test]
    fn variable_jet_rejects_bad_index() {
        assert!(Jet::variable(2, Complex64::ZERO, 2, 1).is_err());
        assert!(Jet::variable(0, Complex64::ZERO, 1, 0).is_err());
    }

    #[test]
    fn derivative_of_coordinate_is_one() {
        let j = Jet::variable(0, c(5.0, 0.0), 1, 3).unwrap();
        assert_eq!(j.partial(&[1]).unwrap(), Complex64::ONE);
    }

    #[test]
    fn square_of_variable() {
        // x^2 at x = 3: value 9, first derivative 6, second derivative 2
        // (stored as Taylor coefficient 1).
        let x = Jet::variable(0, c(3.0, 0.0), 1, 2).unwrap();
        let sq = x.mul(&x).unwrap();
        assert_eq!(sq.value(), c(9.0, 0.0));
        assert_eq!(sq.coefficient(&[1]).unwrap(), c(6.0, 0.0));
        assert_eq!(sq.coefficient(&[2]).unwrap(), c(1.0, 0.0));
        assert_eq!(sq.partial(&[2]).unwrap(), c(2.0, 0.0));
    }

    #[test]
    fn additive_inverse_gives_zero_jet() {
        let x = Jet::variable(0, c(1.5, -0.5), 2, 3).unwrap();
        let z = x.add(&x.neg()).unwrap();
        assert!(z.coefficients().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn mixed_partial_of_product() {
        let u = Jet::variable(0, c(2.0, 0.0), 2, 2).unwrap();
        let v = Jet::variable(1, c(5.0, 0.0), 2, 2).unwrap();
        let uv = u.mul(&v).unwrap();
        assert_eq!(uv.partial(&[1, 1]).unwrap(), Complex64::ONE);
        assert_eq!(uv.value(), c(10.0, 0.0));
    }

    #[test]
    fn zero_multi_index_is_value() {
        let j = Jet::variable(0, c(0.25, 1.0), 3, 2).unwrap();
        assert_eq!(j.partial(&[0, 0, 0]).unwrap(), j.value());
    }

    #[test]
    fn partial_above_order_is_rejected() {
        let j = Jet::variable(0, Complex64::ONE, 1, 2).unwrap();
        assert!(j.partial(&[3]).is_err());
    }

    fn random_jet(rng: &mut impl rand::Rng, dim: usize, order: usize, scale: f64) -> Jet {
        let mut j = Jet::constant(Complex64::ZERO, dim, order);
        for k in 0..j.coeffs.len() {
            j.coeffs[k] = c(
                rng.gen_range(-scale..scale),
                rng.gen_range(-scale..scale),
            );
        }
        j
    }

    /// Evaluate a jet as a polynomial at a real offset h (all coordinates
    /// shifted). Test-only oracle helper.
    fn eval_poly(j: &Jet, h: &[f64]) -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (k, coeff) in j.coeffs.iter().enumerate() {
            let alpha = j.index_of(k);
            let mut term = *coeff;
            for (i, &a) in alpha.iter().enumerate() {
                term *= h[i].powi(i32::from(a));
            }
            acc += term;
        }
        acc
    }

    #[test]
    fn cauchy_product_matches_finite_differences() {
        // Central-difference oracle on the evaluated product of two random
        // order-4 jets, along each coordinate direction.
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let a = random_jet(&mut rng, 2, 4, 1.0);
        let b = random_jet(&mut rng, 2, 4, 1.0);
        let prod = a.mul(&b).unwrap();

        let h = 1e-4;
        for coord in 0..2 {
            let mut hp = [0.0, 0.0];
            hp[coord] = h;
            let mut hm = [0.0, 0.0];
            hm[coord] = -h;
            let f = |x: &[f64]| eval_poly(&a, x) * eval_poly(&b, x);
            let fd = (f(&hp) - f(&hm)) / (2.0 * h);
            let mut alpha = vec![0u8; 2];
            alpha[coord] = 1;
            let exact = prod.partial(&alpha).unwrap();
            assert!(
                (fd - exact).norm() <= 1e-6 * exact.norm().max(1.0),
                "coord {coord}: fd {fd} vs jet {exact}"
            );
        }
    }

    #[test]
    fn leibniz_rule_at_coefficient_level() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let a = random_jet(&mut rng, 2, 3, 1.0);
        let b = random_jet(&mut rng, 2, 3, 1.0);
        let prod = a.mul(&b).unwrap();
        // partial(ab, alpha) = sum_{beta <= alpha} binom(alpha, beta)
        //                      partial(a, beta) partial(b, alpha - beta)
        let alpha = [2u8, 1u8];
        let mut total = Complex64::ZERO;
        for b0 in 0..=alpha[0] {
            for b1 in 0..=alpha[1] {
                let binom = |n: u8, k: u8| -> f64 {
                    let (mut num, mut den) = (1.0, 1.0);
                    for i in 0..k {
                        num *= f64::from(n - i);
                        den *= f64::from(i + 1);
                    }
                    num / den
                };
                let w = binom(alpha[0], b0) * binom(alpha[1], b1);
                total += w
                    * a.partial(&[b0, b1]).unwrap()
                    * b.partial(&[alpha[0] - b0, alpha[1] - b1]).unwrap();
            }
        }
        let direct = prod.partial(&alpha).unwrap();
        assert_relative_eq!(total.re, direct.re, max_relative = 1e-12, epsilon = 1e-12);
        assert_relative_eq!(total.im, direct.im, max_relative = 1e-12, epsilon = 1e-12);
    }

    #[test]
    fn exp_of_log_is_identity() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut j = random_jet(&mut rng, 2, 4, 0.3);
        j.coeffs[0] = c(2.0, 1.0);
        let back = j.ln().unwrap().exp();
        for (a, b) in j.coefficients().iter().zip(back.coefficients()) {
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn arsinh_derivative_at_zero() {
        let x = Jet::variable(0, Complex64::ZERO, 1, 3).unwrap();
        let a = x.arsinh().unwrap();
        assert!((a.coefficient(&[1]).unwrap() - Complex64::ONE).norm() < 1e-14);
        assert!(a.value().norm() < 1e-14);
    }

    #[test]
    fn arsinh_matches_finite_differences_of_log_form() {
        // d^k/dz^k arsinh at z0 = 1 against central differences of
        // log(z + sqrt(z^2 + 1)).
        let z0 = 1.0f64;
        let x = Jet::variable(0, c(z0, 0.0), 1, 3).unwrap();
        let a = x.arsinh().unwrap();
        let f = |z: f64| (z + (z * z + 1.0).sqrt()).ln();
        let h = 1e-4;
        let d1 = (f(z0 + h) - f(z0 - h)) / (2.0 * h);
        let d2 = (f(z0 + h) - 2.0 * f(z0) + f(z0 - h)) / (h * h);
        assert!((a.partial(&[1]).unwrap().re - d1).abs() <= 1e-6 * d1.abs());
        assert!((a.partial(&[2]).unwrap().re - d2).abs() <= 1e-5 * d2.abs().max(1.0));
        assert!((a.value().re - f(z0)).abs() <= 1e-14);
    }

    #[test]
    fn log_on_cut_is_domain_error() {
        let j = Jet::constant(c(-1.0, 0.0), 1, 2);
        let err = j.ln().unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
        assert!(err.to_string().contains("log"));
    }

    #[test]
    fn sqrt_at_zero_is_domain_error() {
        let j = Jet::constant(Complex64::ZERO, 1, 2);
        assert!(matches!(j.sqrt().unwrap_err(), Error::Domain(_)));
    }

    #[test]
    fn arsinh_on_cut_is_domain_error() {
        let j = Jet::constant(c(0.0, 1.5), 1, 2);
        let err = j.arsinh().unwrap_err();
        assert!(err.to_string().contains("arsinh"));
        // [-i, i] interior is fine
        assert!(Jet::constant(c(0.0, 0.5), 1, 2).arsinh().is_ok());
    }

    #[test]
    fn powc_is_exp_log() {
        let j = Jet::variable(0, c(1.3, 0.7), 1, 4).unwrap();
        let s = c(0.75, -0.4);
        let direct = j.powc(s).unwrap();
        let via_log = j.ln().unwrap().scale(s).exp();
        for (a, b) in direct.coefficients().iter().zip(via_log.coefficients()) {
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
        }
    }

    #[test]
    fn powi_negative_matches_recip() {
        let j = Jet::variable(0, c(2.0, 0.5), 1, 4).unwrap();
        let a = j.powi(-2).unwrap();
        let b = j.mul(&j).unwrap().recip().unwrap();
        for (x, y) in a.coefficients().iter().zip(b.coefficients()) {
            assert!((x - y).norm() <= 1e-13 * x.norm().max(1.0));
        }
    }

    #[test]
    fn truncation_consistency() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = random_jet(&mut rng, 3, 4, 0.5);
        let mut b = random_jet(&mut rng, 3, 4, 0.5);
        b.coeffs[0] = c(1.7, 0.2);
        let full = a.mul(&b.ln().unwrap()).unwrap().truncated(3).unwrap();
        let low = a.truncated(3).unwrap().mul(&b.truncated(3).unwrap().ln().unwrap()).unwrap();
        for (x, y) in full.coefficients().iter().zip(low.coefficients()) {
            assert!((x - y).norm() <= 1e-13 * x.norm().max(1.0));
        }
    }

    #[test]
    fn chain_rule_first_order_for_primitives() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut a = random_jet(&mut rng, 2, 3, 0.4);
        a.coeffs[0] = c(1.2, 0.6);
        let cases: Vec<(Jet, Complex64)> = vec![
            (a.exp(), a.value().exp()),
            (a.ln().unwrap(), a.value().inv()),
            (a.sqrt().unwrap(), 0.5 / a.value().sqrt()),
            (a.sin(), a.value().cos()),
            (a.cos(), -a.value().sin()),
            (
                a.arsinh().unwrap(),
                (a.value() * a.value() + 1.0).sqrt().inv(),
            ),
        ];
        for (res, fprime) in cases {
            for idx in [[1u8, 0u8], [0u8, 1u8]] {
                let lhs = res.coefficient(&idx).unwrap();
                let rhs = fprime * a.coefficient(&idx).unwrap();
                assert!(
                    (lhs - rhs).norm() <= 1e-12 * rhs.norm().max(1.0),
                    "{lhs} vs {rhs}"
                );
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn mul_commutative_and_associative(seed in 0u64..1u64 << 48, order in 1usize..=6) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = random_jet(&mut rng, 2, order, 1.0);
            let b = random_jet(&mut rng, 2, order, 1.0);
            let d = random_jet(&mut rng, 2, order, 1.0);

            let ab = a.mul(&b).unwrap();
            let ba = b.mul(&a).unwrap();
            for (x, y) in ab.coefficients().iter().zip(ba.coefficients()) {
                prop_assert!((x - y).norm() <= 1e-13 * x.norm().max(1.0));
            }
            let left = ab.mul(&d).unwrap();
            let right = a.mul(&b.mul(&d).unwrap()).unwrap();
            for (x, y) in left.coefficients().iter().zip(right.coefficients()) {
                prop_assert!((x - y).norm() <= 1e-13 * x.norm().max(1.0));
            }
        }

        #[test]
        fn truncation_drops_top_block(seed in 0u64..1u64 << 48) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let a = random_jet(&mut rng, 2, 4, 1.0);
            let t = a.truncated(3).unwrap();
            prop_assert_eq!(t.order(), 3);
            for (k, coeff) in t.coefficients().iter().enumerate() {
                prop_assert_eq!(*coeff, a.coefficients()[k]);
            }
        }
    }
}
