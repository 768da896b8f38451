//! The scalar abstraction shared by real and complex models.
//!
//! Everything downstream (bundles, actions, cocycles, solvers) is generic
//! over [`Scalar`], which is `f64` or `Complex64` with `f64` as the real
//! field. Norms, adjoints, and eigenvalue routines come from `nalgebra`.

use nalgebra::{ComplexField, DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub use nalgebra::Complex;

/// Double-precision complex scalar.
pub type Complex64 = Complex<f64>;

/// Scalars a Hilbert bundle can be modelled over.
pub trait Scalar: ComplexField<RealField = f64> + Copy + 'static {
    const IS_COMPLEX: bool;

    /// A standard Gaussian draw; the complex version has independent
    /// standard-normal real and imaginary parts.
    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self;

    /// Builds a scalar from real and imaginary parts; `im` must be zero for
    /// real scalars (callers validate this, it is debug-asserted here).
    fn from_re_im(re: f64, im: f64) -> Self;

    /// A Haar-ish random isometry of finite order dividing `k`: a random
    /// isometry conjugating a block rotation (real) or a diagonal of k-th
    /// roots of unity (complex).
    fn random_finite_order_isometry<R: Rng + ?Sized>(
        dim: usize,
        k: usize,
        rng: &mut R,
    ) -> DMatrix<Self>;
}

impl Scalar for f64 {
    const IS_COMPLEX: bool = false;

    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        rng.sample(StandardNormal)
    }

    fn from_re_im(re: f64, im: f64) -> Self {
        debug_assert_eq!(im, 0.0, "imaginary part on a real scalar");
        re
    }

    fn random_finite_order_isometry<R: Rng + ?Sized>(
        dim: usize,
        k: usize,
        rng: &mut R,
    ) -> DMatrix<Self> {
        let q = random_isometry::<f64, _>(dim, rng);
        let mut block = DMatrix::<f64>::identity(dim, dim);
        let mut i = 0;
        while i + 1 < dim {
            let j = rng.random_range(0..k);
            let theta = std::f64::consts::TAU * j as f64 / k as f64;
            let (s, c) = theta.sin_cos();
            block[(i, i)] = c;
            block[(i, i + 1)] = -s;
            block[(i + 1, i)] = s;
            block[(i + 1, i + 1)] = c;
            i += 2;
        }
        &q * block * q.transpose()
    }
}

impl Scalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn sample_standard<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    fn from_re_im(re: f64, im: f64) -> Self {
        Complex::new(re, im)
    }

    fn random_finite_order_isometry<R: Rng + ?Sized>(
        dim: usize,
        k: usize,
        rng: &mut R,
    ) -> DMatrix<Self> {
        let q = random_isometry::<Complex64, _>(dim, rng);
        let mut block = DMatrix::<Complex64>::zeros(dim, dim);
        for i in 0..dim {
            let j = rng.random_range(0..k);
            let theta = std::f64::consts::TAU * j as f64 / k as f64;
            block[(i, i)] = Complex::new(theta.cos(), theta.sin());
        }
        &q * block * q.adjoint()
    }
}

/// A random isometry: QR of a Gaussian matrix with the column phases fixed
/// so that R has positive diagonal. For `f64` this is Haar-orthogonal, for
/// `Complex64` Haar-unitary.
pub fn random_isometry<S: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<S> {
    if dim == 0 {
        return DMatrix::zeros(0, 0);
    }
    let gauss = DMatrix::from_fn(dim, dim, |_, _| S::sample_standard(rng));
    let qr = gauss.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let m = d.modulus();
        let phase = if m > 0.0 {
            d / S::from_real(m)
        } else {
            S::one()
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// The operator (spectral) norm, zero for empty matrices.
pub fn operator_norm<S: Scalar>(m: &DMatrix<S>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(0.0, f64::max)
}

/// Largest deviation of the singular values from 1. Zero exactly when the
/// matrix is a (square) isometry.
pub fn isometry_defect<S: Scalar>(m: &DMatrix<S>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Flattens an `S`-vector to real coordinates: identity for `f64`,
/// `(re, im)` interleaved per entry for `Complex64`.
pub fn realify<S: Scalar>(v: &DVector<S>) -> DVector<f64> {
    if S::IS_COMPLEX {
        DVector::from_fn(2 * v.len(), |i, _| {
            let z = v[i / 2];
            if i % 2 == 0 {
                z.real()
            } else {
                z.imaginary()
            }
        })
    } else {
        v.map(|z| z.real())
    }
}

/// Inverse of [`realify`].
pub fn unrealify<S: Scalar>(v: &DVector<f64>) -> DVector<S> {
    if S::IS_COMPLEX {
        assert!(
            v.len().is_multiple_of(2),
            "odd real length for a complex vector"
        );
        DVector::from_fn(v.len() / 2, |i, _| S::from_re_im(v[2 * i], v[2 * i + 1]))
    } else {
        v.map(S::from_real)
    }
}
