//! Real and jet-valued matrix exponentials, commuting-family utilities and
//! common-eigenvector extraction.
//!
//! The exponential uses scaling-and-squaring around a degree-16 Taylor core,
//! shared between `f64` matrices and matrices of jets so that the constant
//! terms of the jet-valued exponential coincide with the plain one by
//! construction.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::jets::Jet;

pub type RealMatrix = DMatrix<f64>;

/// A common eigenvector of a transposed commuting family together with its
/// eigenvalue vector (one eigenvalue per family member) and the worst
/// per-member residual `max_k ||A_k^T v - λ_k v||`.
#[derive(Debug, Clone)]
pub struct EigenPair {
    pub v: DVector<Complex64>,
    pub lambda: Vec<Complex64>,
    pub residual: f64,
}

const TAYLOR_DEGREE: usize = 16;
const SCALING_TARGET: f64 = 0.5;

fn exp_core<M: Clone>(
    m: &M,
    norm: f64,
    identity: impl Fn() -> M,
    add: impl Fn(&M, &M) -> M,
    mul: impl Fn(&M, &M) -> M,
    scale: impl Fn(&M, f64) -> M,
) -> M {
    let squarings = if norm > SCALING_TARGET {
        (norm / SCALING_TARGET).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let x = scale(m, 0.5f64.powi(squarings as i32));
    // Horner evaluation of the degree-16 Taylor polynomial of exp.
    let mut acc = identity();
    for k in (1..=TAYLOR_DEGREE).rev() {
        acc = add(&identity(), &scale(&mul(&x, &acc), 1.0 / k as f64));
    }
    for _ in 0..squarings {
        acc = mul(&acc, &acc);
    }
    acc
}

/// Matrix exponential of a square real matrix.
pub fn mat_exp(m: &RealMatrix) -> Result<RealMatrix> {
    if !m.is_square() {
        return Err(Error::Argument(format!(
            "matrix exponential needs a square matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = m.nrows();
    Ok(exp_core(
        m,
        m.norm(),
        || RealMatrix::identity(n, n),
        |a, b| a + b,
        |a, b| a * b,
        |a, f| a * f,
    ))
}

/// Row-major matrix of jets. All entries share dimension and order.
#[derive(Debug, Clone)]
pub struct JetMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Jet>,
}

impl JetMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Jet>) -> Result<JetMatrix> {
        if entries.len() != rows * cols {
            return Err(Error::Argument(format!(
                "expected {} entries for a {rows}x{cols} jet matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        let (dim, order) = (entries[0].dim(), entries[0].order());
        if entries.iter().any(|e| e.dim() != dim || e.order() != order) {
            return Err(Error::Argument(
                "jet matrix entries must share dimension and order".into(),
            ));
        }
        Ok(JetMatrix { rows, cols, entries })
    }

    pub fn identity(n: usize, dim: usize, order: usize) -> JetMatrix {
        let zero = Jet::constant(Complex64::ZERO, dim, order);
        let one = Jet::constant(Complex64::ONE, dim, order);
        let mut entries = vec![zero; n * n];
        for i in 0..n {
            entries[i * n + i] = one.clone();
        }
        JetMatrix { rows: n, cols: n, entries }
    }

    pub fn get(&self, i: usize, j: usize) -> &Jet {
        &self.entries[i * self.cols + j]
    }

    pub fn jet_dim(&self) -> usize {
        self.entries[0].dim()
    }

    pub fn jet_order(&self) -> usize {
        self.entries[0].order()
    }

    pub fn add(&self, other: &JetMatrix) -> Result<JetMatrix> {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.add(b))
            .collect::<Result<Vec<_>>>()?;
        JetMatrix::from_entries(self.rows, self.cols, entries)
    }

    pub fn mul(&self, other: &JetMatrix) -> Result<JetMatrix> {
        if self.cols != other.rows {
            return Err(Error::Argument("jet matrix product shape mismatch".into()));
        }
        let mut entries = Vec::with_capacity(self.rows * other.cols);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = self.get(i, 0).mul(other.get(0, j))?;
                for k in 1..self.cols {
                    acc = acc.add(&self.get(i, k).mul(other.get(k, j))?)?;
                }
                entries.push(acc);
            }
        }
        JetMatrix::from_entries(self.rows, other.cols, entries)
    }

    pub fn transpose(&self) -> JetMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                entries.push(self.get(i, j).clone());
            }
        }
        JetMatrix { rows: self.cols, cols: self.rows, entries }
    }

    pub fn scale(&self, f: f64) -> JetMatrix {
        let factor = Complex64::new(f, 0.0);
        let entries = self.entries.iter().map(|e| e.scale(factor)).collect();
        JetMatrix { rows: self.rows, cols: self.cols, entries }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Jet]) -> Result<Vec<Jet>> {
        if v.len() != self.cols {
            return Err(Error::Argument("jet matrix-vector shape mismatch".into()));
        }
        let mut out = Vec::with_capacity(self.rows);
        for i in 0..self.rows {
            let mut acc = self.get(i, 0).mul(&v[0])?;
            for k in 1..self.cols {
                acc = acc.add(&self.get(i, k).mul(&v[k])?)?;
            }
            out.push(acc);
        }
        Ok(out)
    }

    fn frobenius_all_coefficients(&self) -> f64 {
        self.entries
            .iter()
            .flat_map(|e| e.coefficients().iter())
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Jet-valued matrix exponential: scaling-and-squaring applied over jet
/// arithmetic. Constant terms equal [`mat_exp`] of the constant-term matrix.
pub fn mat_exp_jet(m: &JetMatrix) -> Result<JetMatrix> {
    if m.rows != m.cols {
        return Err(Error::Argument(format!(
            "jet matrix exponential needs a square matrix, got {}x{}",
            m.rows, m.cols
        )));
    }
    let (n, dim, order) = (m.rows, m.jet_dim(), m.jet_order());
    Ok(exp_core(
        m,
        m.frobenius_all_coefficients(),
        || JetMatrix::identity(n, dim, order),
        |a, b| a.add(b).expect("shape fixed"),
        |a, b| a.mul(b).expect("shape fixed"),
        |a, f| a.scale(f),
    ))
}

/// Check a family of equally sized square matrices for pairwise commutation.
/// Returns the verdict and the largest commutator norm; the verdict compares
/// that deviation against `tol * max_k ||A_k||^2` (Frobenius).
pub fn check_commuting(family: &[RealMatrix], tol: f64) -> Result<(bool, f64)> {
    if family.is_empty() {
        return Err(Error::Argument("empty matrix family".into()));
    }
    let n = family[0].nrows();
    for a in family {
        if !a.is_square() || a.nrows() != n {
            return Err(Error::Argument("family members must be square and equally sized".into()));
        }
    }
    let mut deviation: f64 = 0.0;
    for i in 0..family.len() {
        for j in (i + 1)..family.len() {
            let comm = &family[i] * &family[j] - &family[j] * &family[i];
            deviation = deviation.max(comm.norm());
        }
    }
    let scale = family.iter().map(|a| a.norm()).fold(0.0f64, f64::max);
    Ok((deviation <= tol * scale * scale, deviation))
}

const EIGEN_RETRIES: usize = 5;

/// All distinct common eigendirections of the transposed family, each with
/// its eigenvalue vector.
///
/// The candidates come from a random real linear combination of the
/// transposes; every candidate is then verified against each family member
/// and kept only if the residual stays below `1e-8 * max ||A_k||`. Only
/// genuine eigenvectors are returned; generalized eigendirections of
/// defective members are dropped by the verification step.
pub fn common_eigenvectors(family: &[RealMatrix]) -> Result<Vec<EigenPair>> {
    let (commutes, dev) = check_commuting(family, 1e-10)?;
    if !commutes {
        return Err(Error::Validation(format!(
            "family does not commute (deviation {dev:.3e})"
        )));
    }
    let n = family[0].nrows();
    let norm_scale = family.iter().map(|a| a.norm()).fold(0.0f64, f64::max).max(1e-300);
    let accept = 1e-8 * norm_scale;
    let transposed: Vec<RealMatrix> = family.iter().map(|a| a.transpose()).collect();

    for attempt in 0..EIGEN_RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(0x51EE_D000 + attempt as u64);
        let mut combo = RealMatrix::zeros(n, n);
        for a in &transposed {
            combo += a * rng.gen_range(0.5..1.5);
        }
        // Eigenvalues of the combination. Multiple roots come back as a
        // cluster; its mean still carries the sqrt(eps) noise floor of a
        // defective eigenvalue, so polish it on the (m-1)-th derivative of
        // the characteristic polynomial, where an m-fold root is simple.
        let charpoly = charpoly_faddeev_leverrier(&combo);
        let eigenvalues = durand_kerner(&charpoly);
        let cluster_tol = 1e-5 * (1.0 + combo.norm());
        let mut distinct: Vec<Complex64> = Vec::new();
        for cluster in cluster_points(&eigenvalues, cluster_tol) {
            let mean = cluster.iter().sum::<Complex64>() / cluster.len() as f64;
            let polished = newton_polish_multiple_root(&charpoly, cluster.len(), mean);
            if !distinct.iter().any(|d| (d - polished).norm() <= cluster_tol) {
                distinct.push(polished);
            }
        }

        let mut pairs: Vec<EigenPair> = Vec::new();
        for lambda_c in distinct {
            let shifted: Vec<Vec<Complex64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut z = Complex64::new(combo[(i, j)], 0.0);
                            if i == j {
                                z -= lambda_c;
                            }
                            z
                        })
                        .collect()
                })
                .collect();
            // Candidate generation is cheap; sweep a few rank tolerances and
            // let the per-member verification below arbitrate.
            for tol_exp in [-12i32, -10, -8, -6] {
                let tol = 10f64.powi(tol_exp) * norm_scale.max(1.0);
                for v in complex_null_space(shifted.clone(), tol) {
                    let v = normalize_phase(DVector::from_vec(v));
                    let mut lambda = Vec::with_capacity(transposed.len());
                    let mut residual: f64 = 0.0;
                    for at in &transposed {
                        let av = at.map(|x| Complex64::new(x, 0.0)) * &v;
                        let lam = v.dotc(&av); // unit v: Rayleigh quotient
                        lambda.push(lam);
                        residual = residual.max((&av - &v * lam).norm());
                    }
                    if residual <= accept && !pairs.iter().any(|p| same_direction(&p.v, &v)) {
                        pairs.push(EigenPair { v, lambda, residual });
                    }
                }
            }
        }
        if !pairs.is_empty() {
            pairs.sort_by(|a, b| {
                let ka: Vec<(f64, f64)> = a.lambda.iter().map(|z| (z.re, z.im)).collect();
                let kb: Vec<(f64, f64)> = b.lambda.iter().map(|z| (z.re, z.im)).collect();
                ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
            });
            return Ok(pairs);
        }
    }
    Err(Error::Numerical(format!(
        "no common eigenvector verified after {EIGEN_RETRIES} random combinations; \
         supply an explicit eigenvector"
    )))
}

/// Eigenvalues of a small real matrix as the roots of its characteristic
/// polynomial.
///
/// QR-iteration eigensolvers can cycle on the defective matrices this crate
/// routinely meets (nilpotent Jordan families and friends); at sizes <= 16
/// the characteristic-polynomial route with a simultaneous root iteration is
/// robust and terminates unconditionally.
pub fn eigenvalues_via_charpoly(m: &RealMatrix) -> Vec<Complex64> {
    let coeffs = charpoly_faddeev_leverrier(m);
    durand_kerner(&coeffs)
}

/// Monic characteristic polynomial coefficients, low-to-high degree.
fn charpoly_faddeev_leverrier(a: &RealMatrix) -> Vec<f64> {
    let n = a.nrows();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut m = a.clone();
    for k in 1..=n {
        let c = -m.trace() / k as f64;
        coeffs[n - k] = c;
        if k < n {
            m = a * (&m + RealMatrix::identity(n, n) * c);
        }
    }
    coeffs
}

/// All roots of a monic polynomial by the Durand-Kerner simultaneous
/// iteration. Multiple roots converge to a tight cluster around the true
/// value; callers average clusters.
fn durand_kerner(coeffs: &[f64]) -> Vec<Complex64> {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return Vec::new();
    }
    let bound = 1.0
        + coeffs[..degree]
            .iter()
            .map(|c| c.abs())
            .fold(0.0f64, f64::max);
    let eval = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(coeffs[degree], 0.0);
        for k in (0..degree).rev() {
            acc = acc * z + coeffs[k];
        }
        acc
    };
    // deliberately non-real, non-symmetric start points
    let mut roots: Vec<Complex64> = (0..degree)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / degree as f64 + 0.4;
            Complex64::from_polar(0.7 * bound, angle)
        })
        .collect();
    for _ in 0..500 {
        let mut worst: f64 = 0.0;
        for i in 0..degree {
            let mut denom = Complex64::ONE;
            for j in 0..degree {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-300, 0.0);
            }
            let delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            worst = worst.max(delta.norm());
        }
        if worst <= 1e-14 * bound {
            break;
        }
    }
    roots
}

/// Newton refinement of an m-fold polynomial root: run Newton on the
/// (m-1)-th derivative, where the root is simple and well-conditioned.
fn newton_polish_multiple_root(coeffs: &[f64], multiplicity: usize, start: Complex64) -> Complex64 {
    let mut poly: Vec<f64> = coeffs.to_vec();
    for _ in 1..multiplicity {
        poly = poly
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * k as f64)
            .collect();
    }
    if poly.len() < 2 {
        return start;
    }
    let deriv: Vec<f64> = poly
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * k as f64)
        .collect();
    let eval = |cs: &[f64], z: Complex64| -> Complex64 {
        let mut acc = Complex64::ZERO;
        for &c in cs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let mut z = start;
    for _ in 0..40 {
        let d = eval(&deriv, z);
        if d.norm() == 0.0 {
            break;
        }
        let step = eval(&poly, z) / d;
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    // keep the polish only if it stayed inside the cluster neighbourhood
    if (z - start).norm() <= 1.0 + start.norm() {
        z
    } else {
        start
    }
}

fn cluster_points(points: &[Complex64], tol: f64) -> Vec<Vec<Complex64>> {
    let mut clusters: Vec<Vec<Complex64>> = Vec::new();
    for &p in points {
        if let Some(cl) = clusters
            .iter_mut()
            .find(|cl| cl.iter().any(|q| (q - p).norm() <= tol))
        {
            cl.push(p);
        } else {
            clusters.push(vec![p]);
        }
    }
    clusters
}

fn same_direction(a: &DVector<Complex64>, b: &DVector<Complex64>) -> bool {
    let overlap = a.dotc(b).norm();
    overlap >= (1.0 - 1e-8) * a.norm() * b.norm()
}

/// Normalize to unit Hermitian norm with the largest component rotated to
/// the positive real axis, so repeated runs agree bit-for-bit.
fn normalize_phase(mut v: DVector<Complex64>) -> DVector<Complex64> {
    let norm = v.norm();
    if norm > 0.0 {
        v /= Complex64::new(norm, 0.0);
    }
    let mut best = 0usize;
    for i in 1..v.len() {
        if v[i].norm() > v[best].norm() + 1e-12 {
            best = i;
        }
    }
    let pivot = v[best];
    if pivot.norm() > 0.0 {
        let phase = pivot / pivot.norm();
        v /= phase;
    }
    v
}

/// Null-space basis of a small complex matrix by Gaussian elimination with
/// partial pivoting.
fn complex_null_space(mut m: Vec<Vec<Complex64>>, tol: f64) -> Vec<Vec<Complex64>> {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let mut pivot_cols = Vec::new();
    let mut r = 0usize;
    for c in 0..cols {
        let mut best = r;
        for i in r..rows {
            if m[i][c].norm() > m[best][c].norm() {
                best = i;
            }
        }
        if r >= rows || m[best][c].norm() <= tol {
            continue;
        }
        m.swap(r, best);
        let inv = m[r][c].inv();
        for x in m[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..rows {
            if i != r {
                let f = m[i][c];
                if f.norm() > 0.0 {
                    for j in 0..cols {
                        let sub = f * m[r][j];
                        m[i][j] -= sub;
                    }
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_cols.contains(&free) {
            continue;
        }
        let mut v = vec![Complex64::ZERO; cols];
        v[free] = Complex64::ONE;
        for (row, &pc) in pivot_cols.iter().enumerate() {
            v[pc] = -m[row][free];
        }
        basis.push(v);
    }
    basis
}

/// Adjugate of a 2x2 matrix: `[[d, -b], [-c, a]]`.
pub fn adjugate_2x2(m: &RealMatrix) -> RealMatrix {
    debug_assert!(m.nrows() == 2 && m.ncols() == 2);
    RealMatrix::from_row_slice(2, 2, &[m[(1, 1)], -m[(0, 1)], -m[(1, 0)], m[(0, 0)]])
}

/// `m` commuting matrices built as low-degree polynomials of a single random
/// matrix, so commutation holds structurally.
pub fn make_test_family(seed: u64, m: usize, size: usize) -> Result<Vec<RealMatrix>> {
    if m == 0 || size == 0 {
        return Err(Error::Argument("family size and matrix size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut base = RealMatrix::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0));
    let norm = base.norm();
    if norm > 0.0 {
        base *= 1.2 / norm;
    }
    let degree = size.min(3);
    let mut family = Vec::with_capacity(m);
    for _ in 0..m {
        let mut acc = RealMatrix::identity(size, size) * rng.gen_range(-0.8..0.8f64);
        let mut power = RealMatrix::identity(size, size);
        for _ in 0..degree {
            power = &power * &base;
            acc += &power * rng.gen_range(-0.8..0.8f64);
        }
        family.push(acc);
    }
    Ok(family)
}

/// `m` commuting matrices of size `2n` inside the admissible algebra of the
/// Heisenberg semidirect products: scalar parts plus odd polynomials of a
/// random infinitesimally symplectic generator. Commutation and the
/// admissible block form both hold structurally.
pub fn make_heisenberg_test_family(seed: u64, m: usize, n: usize) -> Result<Vec<RealMatrix>> {
    if m == 0 || n == 0 {
        return Err(Error::Argument("family size and block count must be positive".into()));
    }
    let size = 2 * n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sym = {
        let raw = RealMatrix::from_fn(size, size, |_, _| rng.gen_range(-1.0..1.0));
        (&raw + raw.transpose()) * 0.5
    };
    let j = crate::groups::heisenberg_j(n);
    // S = -J Q with Q symmetric satisfies S^T J + J S = 0.
    let mut s = -(&j * &sym);
    let norm = s.norm();
    if norm > 0.0 {
        s *= 1.0 / norm;
    }
    let s3 = &s * &s * &s;
    let mut family = Vec::with_capacity(m);
    for _ in 0..m {
        let acc = RealMatrix::identity(size, size) * rng.gen_range(-0.6..0.6f64)
            + &s * rng.gen_range(-0.8..0.8f64)
            + &s3 * rng.gen_range(-0.8..0.8f64);
        family.push(acc);
    }
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jets::Jet;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let z = RealMatrix::zeros(3, 3);
        let e = mat_exp(&z).unwrap();
        assert!((e - RealMatrix::identity(3, 3)).norm() < 1e-15);
    }

    #[test]
    fn exp_of_jordan_block() {
        // Exp(t N) with N the strictly upper 3x3 Jordan block.
        let t = 0.7;
        let n = RealMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 0.]);
        let e = mat_exp(&(&n * t)).unwrap();
        let expected = RealMatrix::from_row_slice(
            3,
            3,
            &[1., t, t * t / 2.0, 0., 1., t, 0., 0., 1.],
        );
        assert!((e - expected).norm() < 1e-14);
    }

    #[test]
    fn exp_of_diagonal() {
        let t = 1.3;
        let a = RealMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.]);
        let e = mat_exp(&(&a * t)).unwrap();
        assert!((e[(0, 0)] - t.exp()).abs() < 1e-13 * t.exp());
        assert!((e[(1, 1)] - (-t).exp()).abs() < 1e-13);
        assert!(e[(0, 1)].abs() < 1e-15 && e[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn exp_semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..5 {
            let a = RealMatrix::from_fn(3, 3, |_, _| rng.gen_range(-2.0..2.0));
            let (s, t) = (rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5));
            let lhs = mat_exp(&(&a * (s + t))).unwrap();
            let rhs = mat_exp(&(&a * s)).unwrap() * mat_exp(&(&a * t)).unwrap();
            assert!((&lhs - &rhs).norm() <= 1e-11 * lhs.norm());
        }
    }

    #[test]
    fn exp_of_commuting_sum_factorizes() {
        let fam = make_test_family(3, 2, 3).unwrap();
        let lhs = mat_exp(&(&fam[0] + &fam[1])).unwrap();
        let rhs = mat_exp(&fam[0]).unwrap() * mat_exp(&fam[1]).unwrap();
        assert!((&lhs - &rhs).norm() <= 1e-11 * lhs.norm());
    }

    #[test]
    fn det_exp_is_exp_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = RealMatrix::from_fn(4, 4, |_, _| rng.gen_range(-1.0..1.0));
        let e = mat_exp(&a).unwrap();
        let det = e.determinant();
        let expected = a.trace().exp();
        assert!((det - expected).abs() <= 1e-10 * expected.abs());
    }

    #[test]
    fn exp_large_norm_accuracy() {
        // diag entries up to ~35 keep us in the ||M|| <= 50 contract range.
        let a = RealMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, -2.0]);
        let e = mat_exp(&(&a * 10.0)).unwrap();
        assert!((e[(0, 0)] - 30f64.exp()).abs() <= 1e-12 * 30f64.exp());
        assert!((e[(1, 1)] - (-20f64).exp()).abs() <= 1e-12);
    }

    #[test]
    fn jet_exp_constant_matches_real() {
        let a = RealMatrix::from_row_slice(2, 2, &[0.3, -1.1, 0.6, 0.2]);
        let entries = a.row_iter()
            .flat_map(|r| r.iter().map(|&x| Jet::constant(c(x, 0.0), 1, 3)).collect::<Vec<_>>())
            .collect();
        let jm = JetMatrix::from_entries(2, 2, entries).unwrap();
        let je = mat_exp_jet(&jm).unwrap();
        let re = mat_exp(&a).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((je.get(i, j).value().re - re[(i, j)]).abs() <= 1e-13 * re.norm());
                assert!(je.get(i, j).value().im.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn jet_exp_time_derivative() {
        // d/dt Exp(tA) = A Exp(tA), checked through the jet's first-order slot.
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a = RealMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let t0 = 0.37;
        let t_jet = Jet::variable(0, c(t0, 0.0), 1, 2).unwrap();
        let entries = (0..3)
            .flat_map(|i| (0..3).map(|j| t_jet.scale(c(a[(i, j)], 0.0))).collect::<Vec<_>>())
            .collect();
        let jm = JetMatrix::from_entries(3, 3, entries).unwrap();
        let je = mat_exp_jet(&jm).unwrap();
        let e = mat_exp(&(&a * t0)).unwrap();
        let ae = &a * &e;
        for i in 0..3 {
            for j in 0..3 {
                let d = je.get(i, j).partial(&[1]).unwrap();
                assert!(
                    (d.re - ae[(i, j)]).abs() <= 1e-9 * ae.norm().max(1.0),
                    "entry ({i},{j}): {} vs {}",
                    d.re,
                    ae[(i, j)]
                );
            }
        }
    }

    #[test]
    fn jet_exp_sol3_first_derivative_at_zero() {
        let t_jet = Jet::variable(0, Complex64::ZERO, 1, 2).unwrap();
        let entries = vec![
            t_jet.clone(),
            Jet::constant(Complex64::ZERO, 1, 2),
            Jet::constant(Complex64::ZERO, 1, 2),
            t_jet.neg(),
        ];
        let jm = JetMatrix::from_entries(2, 2, entries).unwrap();
        let je = mat_exp_jet(&jm).unwrap();
        assert!((je.get(0, 0).partial(&[1]).unwrap() - Complex64::ONE).norm() < 1e-13);
    }

    #[test]
    fn charpoly_eigenvalues_known_spectra() {
        // diag(2, -1, 0.5)
        let d = RealMatrix::from_row_slice(3, 3, &[2., 0., 0., 0., -1., 0., 0., 0., 0.5]);
        let mut ev = eigenvalues_via_charpoly(&d);
        ev.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (got, want) in ev.iter().zip([-1.0, 0.5, 2.0]) {
            assert!((got - Complex64::new(want, 0.0)).norm() < 1e-10, "{got} vs {want}");
        }
        // rotation block: eigenvalues ±i
        let r = RealMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]);
        let ev = eigenvalues_via_charpoly(&r);
        assert!(ev.iter().any(|z| (z - Complex64::new(0., 1.)).norm() < 1e-10));
        assert!(ev.iter().any(|z| (z - Complex64::new(0., -1.)).norm() < 1e-10));
        // nilpotent Jordan block: a tight cluster at 0 (the case QR-based
        // solvers fail to terminate on)
        let n = RealMatrix::from_row_slice(3, 3, &[0., 1., 0., 0., 0., 1., 0., 0., 0.]);
        let ev = eigenvalues_via_charpoly(&n);
        assert_eq!(ev.len(), 3);
        for z in &ev {
            assert!(z.norm() < 1e-4, "{z}");
        }
        let mean = ev.iter().sum::<Complex64>() / 3.0;
        assert!(mean.norm() < 1e-8, "cluster mean {mean}");
    }

    #[test]
    fn commuting_checks() {
        let g410 = vec![
            RealMatrix::from_row_slice(2, 2, &[-1., 0., 0., -1.]),
            RealMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]),
        ];
        let (ok, dev) = check_commuting(&g410, 1e-10).unwrap();
        assert!(ok && dev < 1e-14);

        let j = RealMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]);
        let m = RealMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.]);
        let (ok, dev) = check_commuting(&[j, m], 1e-10).unwrap();
        assert!(!ok && dev > 0.1);

        let single = vec![RealMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.])];
        let (ok, dev) = check_commuting(&single, 1e-10).unwrap();
        assert!(ok && dev == 0.0);
    }

    #[test]
    fn eigenvectors_sol3() {
        let fam = vec![RealMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.])];
        let pairs = common_eigenvectors(&fam).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert!(p.residual < 1e-10);
            let lam = p.lambda[0];
            assert!((lam.im).abs() < 1e-10);
            if (lam.re - 1.0).abs() < 1e-8 {
                assert!((p.v[0].norm() - 1.0).abs() < 1e-10 && p.v[1].norm() < 1e-10);
            } else {
                assert!((lam.re + 1.0).abs() < 1e-8);
                assert!((p.v[1].norm() - 1.0).abs() < 1e-10 && p.v[0].norm() < 1e-10);
            }
        }
    }

    #[test]
    fn eigenvectors_nilpotent_single_direction() {
        let fam = vec![RealMatrix::from_row_slice(
            3,
            3,
            &[0., 1., 0., 0., 0., 1., 0., 0., 0.],
        )];
        let pairs = common_eigenvectors(&fam).unwrap();
        assert_eq!(pairs.len(), 1);
        let p = &pairs[0];
        assert!(p.lambda[0].norm() < 1e-9);
        // A^T has kernel spanned by e_3.
        assert!((p.v[2].norm() - 1.0).abs() < 1e-9);
        assert!(p.v[0].norm() < 1e-9 && p.v[1].norm() < 1e-9);
    }

    #[test]
    fn eigenvectors_g410_isotropic_pair() {
        let fam = vec![
            RealMatrix::from_row_slice(2, 2, &[-1., 0., 0., -1.]),
            RealMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]),
        ];
        let pairs = common_eigenvectors(&fam).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert!((p.lambda[0] - c(-1.0, 0.0)).norm() < 1e-9);
            assert!((p.lambda[1].norm() - 1.0).abs() < 1e-9 && p.lambda[1].re.abs() < 1e-9);
            // v is proportional to (1, ±i); after phase normalization the
            // first component is real positive.
            let ratio = p.v[1] / p.v[0];
            assert!((ratio.norm() - 1.0).abs() < 1e-9 && ratio.re.abs() < 1e-9);
            // lambda_2 = -i goes with v = (1, i) and +i with (1, -i).
            assert!((ratio + p.lambda[1]).norm() < 1e-9);
        }
    }

    #[test]
    fn eigenvector_identity_under_mu_transpose() {
        // mu(t)^T v = e^{<lambda, t>} v for every verified pair.
        let fam = make_test_family(17, 2, 3).unwrap();
        let pairs = common_eigenvectors(&fam).unwrap();
        assert!(!pairs.is_empty());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in &pairs {
            let t: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.5..1.5)).collect();
            let mut sum = RealMatrix::zeros(3, 3);
            for (k, a) in fam.iter().enumerate() {
                sum += a * t[k];
            }
            let mu_t = mat_exp(&sum).unwrap().transpose().map(|x| c(x, 0.0));
            let lhs = &mu_t * &p.v;
            let phase: Complex64 =
                (p.lambda[0] * t[0] + p.lambda[1] * t[1]).exp();
            let rhs = &p.v * phase;
            assert!((&lhs - &rhs).norm() <= 1e-9 * rhs.norm().max(1.0));
        }
    }

    #[test]
    fn adjugate_examples() {
        let id = RealMatrix::identity(2, 2);
        assert!((adjugate_2x2(&id) - &id).norm() < 1e-15);
        let m = RealMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.]);
        let adj = adjugate_2x2(&m);
        let expected = RealMatrix::from_row_slice(2, 2, &[4., -2., -3., 1.]);
        assert!((&adj - &expected).norm() < 1e-15);
        // M adj(M) = det(M) I
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let r = RealMatrix::from_fn(2, 2, |_, _| rng.gen_range(-3.0..3.0));
        let prod = &r * adjugate_2x2(&r);
        let det_i = RealMatrix::identity(2, 2) * r.determinant();
        assert!((prod - det_i).norm() < 1e-12);
    }

    #[test]
    fn test_family_commutes() {
        for seed in 0..10u64 {
            let fam = make_test_family(seed, 2, 4).unwrap();
            let (ok, dev) = check_commuting(&fam, 1e-10).unwrap();
            assert!(ok, "seed {seed}: deviation {dev:.3e}");
            assert!(dev <= 1e-10);
        }
        let single = make_test_family(1, 1, 3).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn test_family_spectral_mapping() {
        // Eigenvalues of p(R) are p applied to eigenvalues of R: compare the
        // sorted spectra of a family member against the polynomial applied
        // to the base spectrum, via the commuting-combination trick.
        let fam = make_test_family(23, 2, 3).unwrap();
        // All members share eigenvectors with the base matrix, hence with
        // each other; verify spectra are consistent with simultaneous
        // diagonalizability: the commutator is tiny (already checked) and
        // the characteristic polynomial of fam[0]+fam[1] factorizes over
        // the sums of paired eigenvalues.
        let sum = &fam[0] + &fam[1];
        let ev_sum = eigenvalues_via_charpoly(&sum);
        let e0 = eigenvalues_via_charpoly(&fam[0]);
        let e1 = eigenvalues_via_charpoly(&fam[1]);
        // For commuting matrices there is a pairing with eigenvalue sums;
        // check each eigenvalue of the sum is close to some e0[i] + e1[j].
        for s in ev_sum.iter() {
            let ok = e0.iter().any(|a| {
                e1.iter().any(|b| (s - (a + b)).norm() <= 1e-8)
            });
            assert!(ok, "eigenvalue {s} of the sum not explained");
        }
    }

    #[test]
    fn spectral_mapping_for_matrix_polynomials() {
        // eigenvalues of p(R) are p applied to the eigenvalues of R
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let r = RealMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
        let p = |z: Complex64| 0.4 - 0.7 * z + 0.3 * z * z;
        let pr = RealMatrix::identity(3, 3) * 0.4 - &r * 0.7 + (&r * &r) * 0.3;
        let ev_r = eigenvalues_via_charpoly(&r);
        let ev_pr = eigenvalues_via_charpoly(&pr);
        for z in &ev_r {
            let mapped = p(*z);
            assert!(
                ev_pr.iter().any(|w| (w - mapped).norm() <= 1e-9 * (1.0 + mapped.norm())),
                "p({z}) = {mapped} not found in spectrum of p(R)"
            );
        }
    }

    #[test]
    fn defective_eigenvalue_is_polished_to_full_precision() {
        // Jordan-type family: the double eigenvalue and its eigenvector come
        // out exact despite the defectiveness.
        let fam = vec![RealMatrix::from_row_slice(2, 2, &[1., 1., 0., 1.])];
        let pairs = common_eigenvectors(&fam).unwrap();
        assert_eq!(pairs.len(), 1);
        let p = &pairs[0];
        assert!((p.lambda[0] - Complex64::ONE).norm() < 1e-13, "{}", p.lambda[0]);
        assert!(p.v[0].norm() < 1e-13 && (p.v[1].norm() - 1.0).abs() < 1e-13);
        assert!(p.residual < 1e-13);
    }

    #[test]
    fn heisenberg_family_is_admissible_and_commutes() {
        for seed in 0..6u64 {
            for n in 1..=2usize {
                let fam = make_heisenberg_test_family(seed, 2, n).unwrap();
                let (ok, dev) = check_commuting(&fam, 1e-10).unwrap();
                assert!(ok, "seed {seed} n {n}: dev {dev:.3e}");
                for a in &fam {
                    crate::groups::check_heisenberg_block_form(a, n, 1e-10)
                        .unwrap_or_else(|e| panic!("seed {seed} n {n}: {e}"));
                }
            }
        }
    }
}
