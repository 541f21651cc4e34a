//! Complex-segment quadrature and the ladder integrator.
//!
//! Two pieces live here. [`integrate_segment`] is an adaptive 15-point
//! Gauss-Kronrod rule along a straight segment in the complex plane, used
//! for one-shot antiderivatives. [`LadderIntegrator`] evaluates the
//! holomorphic ladder of a (Φ, Ψ) pair — the functions `f_r` with
//! `Ψ f_r'' + Φ f_r' = f_{r-1}` built from iterated path integrals — by
//! integrating the equivalent prefix-integral system along the segment
//! `z₀ → z` with an adaptive embedded Runge-Kutta scheme. Evaluating the
//! nested integral formulas literally costs time exponential in `r`; the
//! prefix system computes identical integrals in one pass.
//!
//! The ladder integrator is generic over the scalar, so running it on a
//! one-dimensional jet endpoint yields `f_r` together with its `z`
//! derivatives from the same integration — the residual checks use this.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jets::Jet;

// 15-point Kronrod nodes (positive half), with the embedded 7-point Gauss
// weights at the odd positions.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

fn gk15<F>(f: &mut F, a: Complex64, b: Complex64) -> Result<(Complex64, f64)>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let center = (a + b) * 0.5;
    let half = (b - a) * 0.5;
    let mut kronrod = Complex64::ZERO;
    let mut gauss = Complex64::ZERO;
    for (i, &x) in XGK.iter().enumerate() {
        if x == 0.0 {
            let v = f(center)?;
            kronrod += WGK[i] * v;
            gauss += WG[3] * v;
            continue;
        }
        let vp = f(center + half * x)?;
        let vm = f(center - half * x)?;
        kronrod += WGK[i] * (vp + vm);
        if i % 2 == 1 {
            gauss += WG[i / 2] * (vp + vm);
        }
    }
    let scale = half.norm();
    Ok((kronrod * half, (kronrod - gauss).norm() * scale))
}

/// Adaptive Gauss-Kronrod integration of `f` along the straight segment
/// from `a` to `b`, to absolute tolerance `tol` (relative to the running
/// estimate when that is larger than one).
pub fn integrate_segment<F>(mut f: F, a: Complex64, b: Complex64, tol: f64) -> Result<Complex64>
where
    F: FnMut(Complex64) -> Result<Complex64>,
{
    let mut stack = vec![(a, b)];
    let mut total = Complex64::ZERO;
    let mut total_err = 0.0;
    let mut splits = 0usize;
    let mut pieces: Vec<(Complex64, f64)> = Vec::new();
    while let Some((lo, hi)) = stack.pop() {
        let (value, err) = gk15(&mut f, lo, hi)?;
        let local_tol = tol * ((hi - lo).norm() / (b - a).norm().max(1e-300)).max(1e-3);
        if err > local_tol && splits < 2000 {
            let mid = (lo + hi) * 0.5;
            stack.push((lo, mid));
            stack.push((mid, hi));
            splits += 1;
        } else {
            pieces.push((value, err));
        }
    }
    for (v, e) in pieces {
        total += v;
        total_err += e;
    }
    if total_err > tol * total.norm().max(1.0) * 10.0 {
        return Err(Error::Numerical(format!(
            "segment quadrature error estimate {total_err:.3e} exceeds the target {tol:.3e}"
        )));
    }
    Ok(total)
}

/// Scalar abstraction so the ladder integrates over plain complex numbers or
/// one-dimensional jets with the same code.
pub trait LadderScalar: Clone {
    fn constant_like(&self, c: Complex64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Result<Self>;
    fn scale(&self, f: f64) -> Self;
    fn exp(&self) -> Self;
    /// Norm used for step-size control.
    fn magnitude(&self) -> f64;
    /// The underlying point value (constant term for jets).
    fn center(&self) -> Complex64;
}

impl LadderScalar for Complex64 {
    fn constant_like(&self, c: Complex64) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Result<Self> {
        if o.norm() == 0.0 {
            return Err(Error::Numerical("division by zero in ladder integration".into()));
        }
        Ok(self / o)
    }
    fn scale(&self, f: f64) -> Self {
        self * f
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn center(&self) -> Complex64 {
        *self
    }
}

impl LadderScalar for Jet {
    fn constant_like(&self, c: Complex64) -> Self {
        Jet::constant(c, self.dim(), self.order())
    }
    fn add(&self, o: &Self) -> Self {
        Jet::add(self, o).expect("matching shapes")
    }
    fn sub(&self, o: &Self) -> Self {
        Jet::sub(self, o).expect("matching shapes")
    }
    fn mul(&self, o: &Self) -> Self {
        Jet::mul(self, o).expect("matching shapes")
    }
    fn div(&self, o: &Self) -> Result<Self> {
        Jet::div(self, o)
    }
    fn scale(&self, f: f64) -> Self {
        Jet::scale(self, Complex64::new(f, 0.0))
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn magnitude(&self) -> f64 {
        self.max_norm()
    }
    fn center(&self) -> Complex64 {
        self.value()
    }
}

fn poly_eval<S: LadderScalar>(coeffs: &[Complex64], z: &S) -> S {
    let mut acc = z.constant_like(*coeffs.last().unwrap_or(&Complex64::ZERO));
    for &c in coeffs.iter().rev().skip(1) {
        acc = acc.mul(z).add(&z.constant_like(c));
    }
    acc
}

/// Evaluates the holomorphic ladder of a polynomial pair (Φ, Ψ) with Ψ not
/// identically zero, as defined by
///
/// ```text
/// Λ  = exp(-∫ Φ/Ψ),   f₁ = c₁ ∫ Λ + c₂,
/// f_r = ∫ Λ(η) ∫ f_{r-1}(ζ) / (Λ(ζ) Ψ(ζ)) dζ dη
/// ```
///
/// with all integrals along the straight segment from the base point `z₀`.
/// A zero of Ψ on the path (|Ψ| < 1e-8) aborts with a domain error naming
/// the offending point.
pub struct LadderIntegrator {
    pub phi: Vec<Complex64>,
    pub psi: Vec<Complex64>,
    pub r: usize,
    pub c1: Complex64,
    pub c2: Complex64,
    pub z0: Complex64,
}

const PSI_PATH_TOL: f64 = 1e-8;
const RK_RTOL: f64 = 1e-10;
const RK_ATOL: f64 = 1e-12;

impl LadderIntegrator {
    /// All ladder levels `f_1(z), ..., f_r(z)`.
    pub fn eval_levels<S: LadderScalar>(&self, z: &S) -> Result<Vec<S>> {
        if self.r == 0 {
            return Err(Error::Argument("ladder order must be at least 1".into()));
        }
        let delta = z.sub(&z.constant_like(self.z0));
        let zero = z.constant_like(Complex64::ZERO);

        // state = [L, F1, G2, F2, ..., Gr, Fr]
        let mut state = vec![zero.clone(); 2 * self.r];
        state[1] = z.constant_like(self.c2);

        let rhs = |s: f64, y: &[S], out: &mut Vec<S>| -> Result<()> {
            let zeta = z.constant_like(self.z0).add(&delta.scale(s));
            let psi = poly_eval(&self.psi, &zeta);
            if psi.center().norm() < PSI_PATH_TOL {
                return Err(Error::Domain(format!(
                    "the integration segment crosses a zero of the quadratic data near {}",
                    zeta.center()
                )));
            }
            let phi = poly_eval(&self.phi, &zeta);
            let q = phi.div(&psi)?;
            let lambda = y[0].scale(-1.0).exp();
            out.clear();
            out.push(q.mul(&delta)); // L'
            out.push(lambda.mul(&delta).mul(&z.constant_like(self.c1))); // F1'
            for k in 2..=self.r {
                let f_prev = y[2 * (k - 1) - 1].clone();
                let g_prime = f_prev.mul(&delta).div(&lambda.mul(&psi))?;
                let f_prime = lambda.mul(&y[2 * (k - 1)]).mul(&delta);
                out.push(g_prime);
                out.push(f_prime);
            }
            Ok(())
        };

        integrate_rk(&mut state, rhs)?;
        let mut levels = Vec::with_capacity(self.r);
        levels.push(state[1].clone());
        for k in 2..=self.r {
            levels.push(state[2 * k - 1].clone());
        }
        Ok(levels)
    }

    /// Top ladder level `f_r(z)`.
    pub fn eval<S: LadderScalar>(&self, z: &S) -> Result<S> {
        Ok(self.eval_levels(z)?.pop().expect("r >= 1"))
    }
}

/// Adaptive Dormand-Prince 5(4) over `s` in [0, 1].
fn integrate_rk<S, F>(state: &mut Vec<S>, rhs: F) -> Result<()>
where
    S: LadderScalar,
    F: Fn(f64, &[S], &mut Vec<S>) -> Result<()>,
{
    // Butcher tableau of DOPRI5
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
        [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
        [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
    ];
    const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let n = state.len();
    let mut s = 0.0f64;
    let mut h = 0.05f64;
    let mut k: Vec<Vec<S>> = vec![Vec::new(); 7];
    let mut scratch = Vec::new();
    let mut steps = 0usize;

    while s < 1.0 {
        if steps > 100_000 {
            return Err(Error::Numerical(
                "ladder integration exceeded the step budget".into(),
            ));
        }
        steps += 1;
        h = h.min(1.0 - s);

        rhs(s, state, &mut scratch)?;
        k[0] = scratch.clone();
        for stage in 0..6 {
            let mut y = state.clone();
            for (j, yj) in y.iter_mut().enumerate().take(n) {
                let mut acc = yj.clone();
                for (l, kl) in k.iter().enumerate().take(stage + 1) {
                    let w = A[stage][l];
                    if w != 0.0 {
                        acc = acc.add(&kl[j].scale(w * h));
                    }
                }
                *yj = acc;
            }
            rhs(s + C[stage] * h, &y, &mut scratch)?;
            k[stage + 1] = scratch.clone();
        }

        let mut err: f64 = 0.0;
        let mut y5 = state.clone();
        for j in 0..n {
            let mut acc5 = state[j].clone();
            let mut acc_err: Option<S> = None;
            for (l, kl) in k.iter().enumerate() {
                if B5[l] != 0.0 {
                    acc5 = acc5.add(&kl[j].scale(B5[l] * h));
                }
                let w = (B5[l] - B4[l]) * h;
                if w != 0.0 {
                    let term = kl[j].scale(w);
                    acc_err = Some(match acc_err {
                        Some(e) => e.add(&term),
                        None => term,
                    });
                }
            }
            let e = acc_err.map(|e| e.magnitude()).unwrap_or(0.0);
            let tol = RK_ATOL + RK_RTOL * state[j].magnitude().max(acc5.magnitude());
            err = err.max(e / tol);
            y5[j] = acc5;
        }

        if err <= 1.0 {
            s += h;
            *state = y5;
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 4.0 };
        h *= factor.clamp(0.2, 4.0);
        if h < 1e-10 {
            return Err(Error::Numerical(
                "ladder integration step size collapsed".into(),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn gk_integrates_exponential_exactly() {
        let got = integrate_segment(|z| Ok(z.exp()), c(-1.0, 0.0), c(1.0, 0.0), 1e-12).unwrap();
        let want = c(1.0f64.exp() - (-1.0f64).exp(), 0.0);
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn gk_complex_segment_entire_function() {
        // along a diagonal segment, against the antiderivative difference
        let a = c(-0.5, -0.3);
        let b = c(1.2, 0.9);
        let got = integrate_segment(|z| Ok((z * z).exp() * 2.0 * z), a, b, 1e-11).unwrap();
        let want = (b * b).exp() - (a * a).exp();
        assert!((got - want).norm() <= 1e-10 * want.norm());
    }

    #[test]
    fn gk_handles_rational_integrand_adaptively() {
        // 1/(z + 2) on [0, 1]: log(3/2)
        let got =
            integrate_segment(|z| Ok((z + 2.0).inv()), c(0.0, 0.0), c(1.0, 0.0), 1e-12).unwrap();
        let want = c((3.0f64 / 2.0).ln(), 0.0);
        assert!((got - want).norm() < 1e-12);
    }

    #[test]
    fn ladder_trivial_drift_free_case() {
        // Φ = 0, Ψ = 1: Λ = 1, f₁ = c₁ (z - z₀) + c₂
        let ladder = LadderIntegrator {
            phi: vec![],
            psi: vec![Complex64::ONE],
            r: 1,
            c1: c(2.0, 0.5),
            c2: c(-1.0, 0.0),
            z0: c(0.3, 0.0),
        };
        for z in [c(1.0, 0.2), c(-0.4, 1.0)] {
            let got = ladder.eval(&z).unwrap();
            let want = c(2.0, 0.5) * (z - c(0.3, 0.0)) + c(-1.0, 0.0);
            assert!((got - want).norm() <= 1e-9 * want.norm().max(1.0));
        }
    }

    #[test]
    fn ladder_matches_arsinh_closed_form() {
        // Φ(z) = z, Ψ(z) = z² + 1 from z₀ = 0: Λ = (z²+1)^{-1/2},
        // f₁ = c₁ arsinh(z) + c₂ exactly (arsinh(0) = 0 fixes the constant).
        let ladder = LadderIntegrator {
            phi: vec![Complex64::ZERO, Complex64::ONE],
            psi: vec![Complex64::ONE, Complex64::ZERO, Complex64::ONE],
            r: 1,
            c1: c(1.0, 0.0),
            c2: c(0.0, 0.0),
            z0: Complex64::ZERO,
        };
        for x in [-1.5, -0.4, 0.2, 0.9, 2.0] {
            let got = ladder.eval(&c(x, 0.0)).unwrap();
            let want = c(x.asinh(), 0.0);
            assert!((got - want).norm() <= 1e-8 * want.norm().max(1.0), "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn ladder_residual_via_jets() {
        // Ψ f_r'' + Φ f_r' = f_{r-1} checked with z-jets, r = 3.
        let ladder = LadderIntegrator {
            phi: vec![Complex64::ZERO, c(1.0, 0.0)],
            psi: vec![c(1.0, 0.0), Complex64::ZERO, c(1.0, 0.0)],
            r: 3,
            c1: c(1.0, 0.0),
            c2: c(0.7, 0.0),
            z0: Complex64::ZERO,
        };
        for x in [0.4, 1.1] {
            let zjet = Jet::variable(0, c(x, 0.0), 1, 2).unwrap();
            let levels = ladder.eval_levels(&zjet).unwrap();
            let f3 = &levels[2];
            let f2 = levels[1].value();
            let f3p = f3.partial(&[1]).unwrap();
            let f3pp = f3.partial(&[2]).unwrap();
            let psi = c(x * x + 1.0, 0.0);
            let phi = c(x, 0.0);
            let residual = psi * f3pp + phi * f3p - f2;
            let scale = [psi * f3pp, phi * f3p, f2]
                .iter()
                .map(|v| v.norm())
                .fold(1.0f64, f64::max);
            assert!(residual.norm() <= 1e-7 * scale, "x={x}: residual {residual}");
        }
    }

    #[test]
    fn ladder_detects_psi_zero_on_path() {
        // Ψ(z) = z² + 1 has zeros at ±i; integrate from 0 straight to 2i.
        let ladder = LadderIntegrator {
            phi: vec![Complex64::ZERO, Complex64::ONE],
            psi: vec![Complex64::ONE, Complex64::ZERO, Complex64::ONE],
            r: 1,
            c1: Complex64::ONE,
            c2: Complex64::ZERO,
            z0: Complex64::ZERO,
        };
        let err = ladder.eval(&c(0.0, 2.0)).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
        assert!(err.to_string().contains("zero"), "{err}");
    }
}
