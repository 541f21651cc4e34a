//! Semidirect-product group specifications and the left-invariant metric.
//!
//! A [`GroupSpec`] describes `R^m ⋉_A G` where the target `G` is either
//! `R^n` (abelian) or the Heisenberg group `H^{2n+1}`, twisted by
//! `μ(t) = Exp(Σ A_k t_k)` for a commuting family `A = (A_k)`. The spec
//! caches the drift vector ω, which carries the whole first-order part of
//! the Laplace-Beltrami operator in the `t`-directions.
//!
//! The metric itself is materialized only for cross-checks; the operators
//! work from the closed coefficient formulas directly.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{adjugate_2x2, check_commuting, mat_exp, RealMatrix};

const COMMUTE_TOL: f64 = 1e-10;
const BLOCK_FORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TargetKind {
    /// Target `R^n`.
    #[serde(rename = "abelian")]
    AbelianTarget,
    /// Target `H^{2n+1}`; the flat block of coordinates has size `2n` and a
    /// central coordinate ξ is present.
    #[serde(rename = "heisenberg")]
    HeisenbergTarget,
}

/// A validated semidirect product `R^m ⋉_A G`.
#[derive(Debug, Clone)]
pub struct GroupSpec {
    kind: TargetKind,
    m: usize,
    n: usize,
    family: Vec<RealMatrix>,
    omega: Vec<f64>,
}

/// A point of the group manifold in the global coordinates `(t, ξ, x)`;
/// ξ is present exactly on Heisenberg targets.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub t: Vec<f64>,
    pub xi: Option<f64>,
    pub x: Vec<f64>,
}

impl Point {
    pub fn new(t: Vec<f64>, xi: Option<f64>, x: Vec<f64>) -> Point {
        Point { t, xi, x }
    }

    /// All coordinates in jet-slot order: `t_1..t_m, ξ?, x_1..`.
    pub fn flat(&self) -> Vec<f64> {
        let mut out = self.t.clone();
        if let Some(xi) = self.xi {
            out.push(xi);
        }
        out.extend_from_slice(&self.x);
        out
    }

    pub fn from_flat(spec: &GroupSpec, values: &[f64]) -> Result<Point> {
        if values.len() != spec.jet_dim() {
            return Err(Error::Argument(format!(
                "expected {} coordinates, got {}",
                spec.jet_dim(),
                values.len()
            )));
        }
        let m = spec.m();
        let t = values[..m].to_vec();
        let (xi, rest) = match spec.kind() {
            TargetKind::HeisenbergTarget => (Some(values[m]), &values[m + 1..]),
            TargetKind::AbelianTarget => (None, &values[m..]),
        };
        Ok(Point { t, xi, x: rest.to_vec() })
    }
}

impl GroupSpec {
    pub fn kind(&self) -> TargetKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn family(&self) -> &[RealMatrix] {
        &self.family
    }

    /// Drift vector: `trace(A_k)` on abelian targets, `(n+1)/n trace(A_k)`
    /// on Heisenberg targets.
    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    /// Size of the flat coordinate block: `n`, or `2n` on Heisenberg targets.
    pub fn x_dim(&self) -> usize {
        match self.kind {
            TargetKind::AbelianTarget => self.n,
            TargetKind::HeisenbergTarget => 2 * self.n,
        }
    }

    pub fn has_xi(&self) -> bool {
        self.kind == TargetKind::HeisenbergTarget
    }

    /// Number of active jet coordinates: `m + (ξ?) + x_dim`.
    pub fn jet_dim(&self) -> usize {
        self.m + usize::from(self.has_xi()) + self.x_dim()
    }

    /// Jet slot of `t_k`.
    pub fn t_slot(&self, k: usize) -> usize {
        k
    }

    /// Jet slot of ξ (Heisenberg only).
    pub fn xi_slot(&self) -> usize {
        self.m
    }

    /// Jet slot of `x_i`.
    pub fn x_slot(&self, i: usize) -> usize {
        self.m + usize::from(self.has_xi()) + i
    }

    pub fn validate_point(&self, p: &Point) -> Result<()> {
        if p.t.len() != self.m {
            return Err(Error::Argument(format!(
                "point has {} t-coordinates, spec needs {}",
                p.t.len(),
                self.m
            )));
        }
        if p.xi.is_some() != self.has_xi() {
            return Err(Error::Argument(
                "xi coordinate present iff the target is Heisenberg".into(),
            ));
        }
        if p.x.len() != self.x_dim() {
            return Err(Error::Argument(format!(
                "point has {} x-coordinates, spec needs {}",
                p.x.len(),
                self.x_dim()
            )));
        }
        Ok(())
    }

    /// `μ(t) = Exp(Σ A_k t_k)`.
    pub fn mu(&self, t: &[f64]) -> Result<RealMatrix> {
        if t.len() != self.m {
            return Err(Error::Argument(format!(
                "expected {} t-coordinates, got {}",
                self.m,
                t.len()
            )));
        }
        let d = self.x_dim();
        let mut sum = RealMatrix::zeros(d, d);
        for (k, a) in self.family.iter().enumerate() {
            sum += a * t[k];
        }
        mat_exp(&sum)
    }
}

/// Validate and build a [`GroupSpec`].
pub fn build_spec(
    kind: TargetKind,
    m: usize,
    n: usize,
    family: Vec<RealMatrix>,
) -> Result<GroupSpec> {
    if m == 0 {
        return Err(Error::Validation(
            "at least one t-coordinate is required (m >= 1)".into(),
        ));
    }
    if n == 0 {
        return Err(Error::Validation("target dimension must be positive".into()));
    }
    if family.len() != m {
        return Err(Error::Validation(format!(
            "family has {} matrices but m = {m}",
            family.len()
        )));
    }
    let want = match kind {
        TargetKind::AbelianTarget => n,
        TargetKind::HeisenbergTarget => 2 * n,
    };
    for (k, a) in family.iter().enumerate() {
        if a.nrows() != want || a.ncols() != want {
            return Err(Error::Validation(format!(
                "matrix {} must be {want}x{want}, got {}x{}",
                k + 1,
                a.nrows(),
                a.ncols()
            )));
        }
    }
    let (commutes, deviation) = check_commuting(&family, COMMUTE_TOL)?;
    if !commutes {
        // Name the worst offending pair for the error message.
        let mut worst = (0, 1, 0.0f64);
        for i in 0..family.len() {
            for j in (i + 1)..family.len() {
                let dev = (&family[i] * &family[j] - &family[j] * &family[i]).norm();
                if dev > worst.2 {
                    worst = (i, j, dev);
                }
            }
        }
        return Err(Error::Validation(format!(
            "matrices {} and {} do not commute (deviation {:.3e}, total {deviation:.3e})",
            worst.0 + 1,
            worst.1 + 1,
            worst.2
        )));
    }
    if kind == TargetKind::HeisenbergTarget {
        for (k, a) in family.iter().enumerate() {
            check_heisenberg_block_form(a, n, BLOCK_FORM_TOL)
                .map_err(|e| Error::Validation(format!("matrix {}: {e}", k + 1)))?;
        }
    }
    let omega = family
        .iter()
        .map(|a| match kind {
            TargetKind::AbelianTarget => a.trace(),
            TargetKind::HeisenbergTarget => (n as f64 + 1.0) / n as f64 * a.trace(),
        })
        .collect();
    Ok(GroupSpec { kind, m, n, family, omega })
}

/// The standard complex structure on `R^{2n}`: block diagonal with blocks
/// `[[0, -1], [1, 0]]`, i.e. `J x = (-x_2, x_1, ..., -x_{2n}, x_{2n-1})`.
pub fn heisenberg_j(n: usize) -> RealMatrix {
    let mut j = RealMatrix::zeros(2 * n, 2 * n);
    for b in 0..n {
        j[(2 * b, 2 * b + 1)] = -1.0;
        j[(2 * b + 1, 2 * b)] = 1.0;
    }
    j
}

/// Check the admissible block form for Heisenberg twists: in the 2x2 block
/// decomposition the strictly upper blocks equal minus the adjugate of the
/// mirrored lower blocks, and all diagonal blocks share a common trace.
pub fn check_heisenberg_block_form(a: &RealMatrix, n: usize, tol: f64) -> Result<()> {
    if a.nrows() != 2 * n || a.ncols() != 2 * n {
        return Err(Error::Validation(format!(
            "expected a {0}x{0} matrix for n = {n}",
            2 * n
        )));
    }
    let scale = a.norm().max(1.0);
    let block = |i: usize, j: usize| -> RealMatrix {
        RealMatrix::from_row_slice(
            2,
            2,
            &[
                a[(2 * i, 2 * j)],
                a[(2 * i, 2 * j + 1)],
                a[(2 * i + 1, 2 * j)],
                a[(2 * i + 1, 2 * j + 1)],
            ],
        )
    };
    let common = block(0, 0).trace();
    for i in 0..n {
        let dev = (block(i, i).trace() - common).abs();
        if dev > tol * scale {
            return Err(Error::Validation(format!(
                "diagonal block ({0},{0}) trace differs from block (1,1) by {dev:.3e}",
                i + 1
            )));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let upper = block(i, j);
            let expected = -adjugate_2x2(&block(j, i));
            let dev = (&upper - &expected).norm();
            if dev > tol * scale {
                return Err(Error::Validation(format!(
                    "block ({},{}) is not minus the adjugate of block ({},{}) (deviation {dev:.3e})",
                    i + 1,
                    j + 1,
                    j + 1,
                    i + 1
                )));
            }
        }
    }
    Ok(())
}

/// `a(t) = exp((1/n) Σ trace(A_k) t_k)`, the central scaling of the
/// Heisenberg automorphism.
pub fn a_scalar(spec: &GroupSpec, t: &[f64]) -> Result<f64> {
    if spec.kind() != TargetKind::HeisenbergTarget {
        return Err(Error::Argument(
            "a(t) is defined only for Heisenberg targets".into(),
        ));
    }
    if t.len() != spec.m() {
        return Err(Error::Argument(format!(
            "expected {} t-coordinates, got {}",
            spec.m(),
            t.len()
        )));
    }
    let s: f64 = spec
        .family()
        .iter()
        .zip(t)
        .map(|(a, tk)| a.trace() * tk)
        .sum();
    Ok((s / spec.n() as f64).exp())
}

/// The left-invariant metric in global coordinates.
///
/// Abelian: `diag(I_m, μ(-t)^T μ(-t))`. Heisenberg: the three-factor product
/// `L diag(I_m, a(-t)^2, μ(-t)^T μ(-t)) L^T` with `L` the unipotent factor
/// carrying `-J x / 2`.
pub fn metric_matrix(spec: &GroupSpec, point: &Point) -> Result<RealMatrix> {
    spec.validate_point(point)?;
    let neg_t: Vec<f64> = point.t.iter().map(|v| -v).collect();
    let mu_neg = spec.mu(&neg_t)?;
    let core = mu_neg.transpose() * &mu_neg;
    match spec.kind() {
        TargetKind::AbelianTarget => {
            let d = spec.jet_dim();
            let mut g = RealMatrix::identity(d, d);
            g.view_mut((spec.m(), spec.m()), (spec.n(), spec.n()))
                .copy_from(&core);
            Ok(g)
        }
        TargetKind::HeisenbergTarget => {
            let m = spec.m();
            let two_n = spec.x_dim();
            let d = spec.jet_dim();
            let a_neg = a_scalar(spec, &neg_t)?;
            let mut mid = RealMatrix::identity(d, d);
            mid[(m, m)] = a_neg * a_neg;
            mid.view_mut((m + 1, m + 1), (two_n, two_n)).copy_from(&core);
            let jx = heisenberg_j(spec.n()) * DMatrix::from_column_slice(two_n, 1, &point.x);
            let mut l = RealMatrix::identity(d, d);
            for i in 0..two_n {
                l[(m + 1 + i, m)] = -0.5 * jx[(i, 0)];
            }
            Ok(&l * mid * l.transpose())
        }
    }
}

/// Expanded two-term form of the Heisenberg metric, kept as an independent
/// route for cross-checking the factorized product.
pub fn metric_matrix_expanded(spec: &GroupSpec, point: &Point) -> Result<RealMatrix> {
    if spec.kind() != TargetKind::HeisenbergTarget {
        return metric_matrix(spec, point);
    }
    spec.validate_point(point)?;
    let m = spec.m();
    let two_n = spec.x_dim();
    let d = spec.jet_dim();
    let neg_t: Vec<f64> = point.t.iter().map(|v| -v).collect();
    let mu_neg = spec.mu(&neg_t)?;
    let core = mu_neg.transpose() * &mu_neg;
    let a_neg = a_scalar(spec, &neg_t)?;
    let jx = heisenberg_j(spec.n()) * DMatrix::from_column_slice(two_n, 1, &point.x);

    let mut first = RealMatrix::zeros(d, d);
    first.view_mut((0, 0), (m, m)).copy_from(&RealMatrix::identity(m, m));
    first.view_mut((m + 1, m + 1), (two_n, two_n)).copy_from(&core);

    let mut second = RealMatrix::zeros(d, d);
    second[(m, m)] = 1.0;
    for i in 0..two_n {
        second[(m, m + 1 + i)] = -0.5 * jx[(i, 0)];
        second[(m + 1 + i, m)] = -0.5 * jx[(i, 0)];
        for j in 0..two_n {
            second[(m + 1 + i, m + 1 + j)] = 0.25 * jx[(i, 0)] * jx[(j, 0)];
        }
    }
    Ok(first + second * (a_neg * a_neg))
}

/// On-disk form of a group spec: kind, dimensions and the family as
/// row-major entry arrays.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpecFile {
    pub kind: TargetKind,
    pub m: usize,
    pub n: usize,
    pub matrices: Vec<Vec<f64>>,
}

impl GroupSpecFile {
    pub fn from_spec(spec: &GroupSpec) -> GroupSpecFile {
        GroupSpecFile {
            kind: spec.kind(),
            m: spec.m(),
            n: spec.n(),
            matrices: spec
                .family()
                .iter()
                .map(|a| a.transpose().as_slice().to_vec()) // row-major
                .collect(),
        }
    }

    pub fn into_spec(self) -> Result<GroupSpec> {
        let size = match self.kind {
            TargetKind::AbelianTarget => self.n,
            TargetKind::HeisenbergTarget => 2 * self.n,
        };
        let mut family = Vec::with_capacity(self.matrices.len());
        for (k, rows) in self.matrices.iter().enumerate() {
            if rows.len() != size * size {
                return Err(Error::Validation(format!(
                    "matrix {} has {} entries, expected {}",
                    k + 1,
                    rows.len(),
                    size * size
                )));
            }
            family.push(RealMatrix::from_row_slice(size, size, rows));
        }
        build_spec(self.kind, self.m, self.n, family)
    }
}

pub fn spec_to_json(spec: &GroupSpec) -> String {
    serde_json::to_string_pretty(&GroupSpecFile::from_spec(spec)).expect("serializable")
}

pub fn spec_from_json(text: &str) -> Result<GroupSpec> {
    let file: GroupSpecFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("group spec: {e}")))?;
    file.into_spec()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sol3() -> GroupSpec {
        build_spec(
            TargetKind::AbelianTarget,
            1,
            2,
            vec![RealMatrix::from_row_slice(2, 2, &[1., 0., 0., -1.])],
        )
        .unwrap()
    }

    fn g48(alpha: f64) -> GroupSpec {
        build_spec(
            TargetKind::HeisenbergTarget,
            1,
            1,
            vec![RealMatrix::from_row_slice(2, 2, &[1., 0., 0., alpha])],
        )
        .unwrap()
    }

    #[test]
    fn sol3_omega_is_zero() {
        assert_eq!(sol3().omega(), &[0.0]);
    }

    #[test]
    fn g48_omega() {
        let spec = g48(0.4);
        assert!((spec.omega()[0] - 2.0 * 1.4).abs() < 1e-15);
    }

    #[test]
    fn diagonal_family_omega_is_trace() {
        let spec = build_spec(
            TargetKind::AbelianTarget,
            1,
            3,
            vec![RealMatrix::from_row_slice(3, 3, &[0.7, 0., 0., 0., -1.2, 0., 0., 0., 2.0])],
        )
        .unwrap();
        assert!((spec.omega()[0] - (0.7 - 1.2 + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn non_commuting_family_is_rejected() {
        let err = build_spec(
            TargetKind::AbelianTarget,
            2,
            2,
            vec![
                RealMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]),
                RealMatrix::from_row_slice(2, 2, &[1., 2., 3., 4.]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("commute"));
    }

    #[test]
    fn m_zero_is_rejected() {
        assert!(build_spec(TargetKind::AbelianTarget, 0, 2, vec![]).is_err());
    }

    #[test]
    fn heisenberg_block_form_enforced() {
        // For n = 2 the off-diagonal blocks are constrained; a generic
        // commuting family (single matrix) violating the form must fail.
        let bad = RealMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64 * 0.1);
        let err = build_spec(TargetKind::HeisenbergTarget, 1, 2, vec![bad]).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
        assert!(err.to_string().contains("block"), "{err}");

        let good = crate::linalg::make_heisenberg_test_family(5, 1, 2).unwrap();
        assert!(build_spec(TargetKind::HeisenbergTarget, 1, 2, good).is_ok());
    }

    #[test]
    fn heisenberg_j_properties() {
        let j = heisenberg_j(1);
        assert_eq!(j, RealMatrix::from_row_slice(2, 2, &[0., -1., 1., 0.]));
        for n in 1..=3 {
            let j = heisenberg_j(n);
            assert!((&j * &j + RealMatrix::identity(2 * n, 2 * n)).norm() < 1e-15);
            assert!((j.transpose() + &j).norm() < 1e-15);
        }
    }

    #[test]
    fn a_scalar_values() {
        let spec = g48(0.3);
        assert!((a_scalar(&spec, &[0.0]).unwrap() - 1.0).abs() < 1e-15);
        let t = 0.8;
        assert!((a_scalar(&spec, &[t]).unwrap() - (1.3 * t).exp()).abs() < 1e-13);
        // rotation-type family: trace 2 alpha
        let g49 = build_spec(
            TargetKind::HeisenbergTarget,
            1,
            1,
            vec![RealMatrix::from_row_slice(2, 2, &[0.5, 1., -1., 0.5])],
        )
        .unwrap();
        assert!((a_scalar(&g49, &[t]).unwrap() - (2.0 * 0.5 * t).exp()).abs() < 1e-13);
        assert!(a_scalar(&sol3(), &[0.0]).is_err());
    }

    #[test]
    fn sol3_metric_closed_form() {
        let spec = sol3();
        let t = 0.6;
        let p = Point::new(vec![t], None, vec![0.3, -0.7]);
        let g = metric_matrix(&spec, &p).unwrap();
        let expected = RealMatrix::from_row_slice(
            3,
            3,
            &[1., 0., 0., 0., (-2.0 * t).exp(), 0., 0., 0., (2.0 * t).exp()],
        );
        assert!((g - expected).norm() < 1e-12);
    }

    #[test]
    fn metric_is_identity_at_origin() {
        let specs = [
            sol3(),
            g48(0.7),
            build_spec(
                TargetKind::AbelianTarget,
                2,
                2,
                vec![
                    RealMatrix::from_row_slice(2, 2, &[-1., 0., 0., -1.]),
                    RealMatrix::from_row_slice(2, 2, &[0., 1., -1., 0.]),
                ],
            )
            .unwrap(),
        ];
        for spec in &specs {
            let p = Point::new(
                vec![0.0; spec.m()],
                spec.has_xi().then_some(0.0),
                vec![0.0; spec.x_dim()],
            );
            let g = metric_matrix(spec, &p).unwrap();
            let d = spec.jet_dim();
            assert!((g - RealMatrix::identity(d, d)).norm() < 1e-12);
        }
    }

    #[test]
    fn heisenberg_factorized_equals_expanded() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let spec = g48(rng.gen_range(-1.0..1.0));
            let p = Point::new(
                vec![rng.gen_range(-1.5..1.5)],
                Some(rng.gen_range(-1.5..1.5)),
                vec![rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)],
            );
            let a = metric_matrix(&spec, &p).unwrap();
            let b = metric_matrix_expanded(&spec, &p).unwrap();
            assert!((&a - &b).norm() <= 1e-12 * a.norm());
        }
    }

    #[test]
    fn metric_is_positive_definite() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let specs = [sol3(), g48(-0.4)];
        for spec in &specs {
            for _ in 0..5 {
                let p = Point::new(
                    (0..spec.m()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                    spec.has_xi().then(|| rng.gen_range(-1.0..1.0)),
                    (0..spec.x_dim()).map(|_| rng.gen_range(-1.0..1.0)).collect(),
                );
                let g = metric_matrix(spec, &p).unwrap();
                assert!(g.clone().cholesky().is_some(), "metric not SPD at {p:?}");
            }
        }
    }

    #[test]
    fn inverse_metric_x_block_is_mu_mu_t() {
        let spec = sol3();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..5 {
            let t = rng.gen_range(-1.2..1.2);
            let p = Point::new(vec![t], None, vec![0.1, 0.2]);
            let g = metric_matrix(&spec, &p).unwrap();
            let ginv = g.try_inverse().unwrap();
            let mu = spec.mu(&[t]).unwrap();
            let mmt = &mu * mu.transpose();
            let block = ginv.view((1, 1), (2, 2)).clone_owned();
            assert!((block - mmt).norm() < 1e-10);
        }
    }

    #[test]
    fn heisenberg_omega_ratio() {
        let fam = vec![RealMatrix::from_row_slice(2, 2, &[1., 0., 0., 0.5])];
        let heis = build_spec(TargetKind::HeisenbergTarget, 1, 1, fam.clone()).unwrap();
        let abel = build_spec(TargetKind::AbelianTarget, 1, 2, fam).unwrap();
        let ratio = (heis.n() as f64 + 1.0) / heis.n() as f64;
        assert!((heis.omega()[0] - ratio * abel.omega()[0]).abs() < 1e-14);
    }

    #[test]
    fn spec_file_round_trip() {
        let spec = g48(0.37);
        let json = spec_to_json(&spec);
        let back = spec_from_json(&json).unwrap();
        assert_eq!(back.kind(), spec.kind());
        assert_eq!(back.m(), spec.m());
        assert_eq!(back.n(), spec.n());
        for (a, b) in back.family().iter().zip(spec.family()) {
            assert_eq!(a, b, "round trip must be bit-exact");
        }
        assert_eq!(spec_to_json(&back), json);
    }

    #[test]
    fn spec_file_rejects_bad_dimensions() {
        let json = r#"{"kind":"abelian","m":1,"n":2,"matrices":[[1.0,0.0,0.0]]}"#;
        assert!(spec_from_json(json).is_err());
        let json = r#"{"kind":"abelian","m":1,"n":2,"matrices":[[1,0,0,1]],"extra":3}"#;
        assert!(spec_from_json(json).is_err());
    }
}
