//! Bundle-valued cocycles over a finite groupoid.
//!
//! A cocycle assigns to every arrow `a` a vector `c(a)` in the fiber over
//! `range(a)`, satisfying `c(a.b) = c(a) + L(a) c(b)`. A coboundary is
//! `c(a) = f(range(a)) - L(a) f(source(a))` for a section `f`. Cocycles act
//! on fibers affinely by `a . u = L(a) u + c(a)`, and the squared norm
//! `psi(a) = |c(a)|^2` of any cocycle is conditionally negative definite
//! over every base unit, which [`check_cnd`] tests spectrally.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::bundle::{BundleError, HilbertBundle, IsometricAction, Section};
use crate::groupoid::{ArrowId, FiniteGroupoid, Side, UnitId};
use crate::par;
use crate::scalar::Scalar;

/// One fiber vector per arrow, living over the arrow's range.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle<S: Scalar> {
    values: Vec<DVector<S>>,
}

impl<S: Scalar> Cocycle<S> {
    pub fn new(
        groupoid: &FiniteGroupoid,
        bundle: &HilbertBundle,
        values: Vec<DVector<S>>,
    ) -> Result<Self, BundleError> {
        if values.len() != groupoid.n_arrows() {
            return Err(BundleError::EntryCount {
                per: "arrow",
                expected: groupoid.n_arrows(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            let range = groupoid.range(ArrowId(i));
            if v.len() != bundle.dim(range) {
                return Err(BundleError::FiberDim {
                    unit: range,
                    expected: bundle.dim(range),
                    got: v.len(),
                });
            }
        }
        Ok(Cocycle { values })
    }

    pub fn zero(groupoid: &FiniteGroupoid, bundle: &HilbertBundle) -> Self {
        Cocycle {
            values: groupoid
                .arrows()
                .iter()
                .map(|a| DVector::zeros(bundle.dim(a.range)))
                .collect(),
        }
    }

    pub fn value(&self, a: ArrowId) -> &DVector<S> {
        &self.values[a.0]
    }

    pub fn set(&mut self, a: ArrowId, v: DVector<S>) {
        assert_eq!(v.len(), self.values[a.0].len(), "fiber dimension mismatch");
        self.values[a.0] = v;
    }

    pub fn values(&self) -> &[DVector<S>] {
        &self.values
    }

    /// Adds `delta` to the real part of one coordinate of one value,
    /// generally destroying the cocycle identity.
    pub fn perturb(&mut self, a: ArrowId, coord: usize, delta: f64) {
        self.values[a.0][coord] += S::from_real(delta);
    }

    /// Largest value norm over all arrows.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest value norm over one fiber of the chosen side.
    pub fn fiber_sup_norm(&self, groupoid: &FiniteGroupoid, x: UnitId, side: Side) -> f64 {
        groupoid
            .fiber(x, side)
            .iter()
            .map(|&a| self.values[a.0].norm())
            .fold(0.0, f64::max)
    }
}

/// The coboundary of a section: `c(a) = f(range(a)) - L(a) f(source(a))`.
pub fn coboundary<S: Scalar>(
    groupoid: &FiniteGroupoid,
    action: &IsometricAction<S>,
    section: &Section<S>,
) -> Cocycle<S> {
    Cocycle {
        values: groupoid
            .arrows()
            .iter()
            .map(|a| section.value(a.range) - action.apply(a.id, section.value(a.source)))
            .collect(),
    }
}

/// Worst-case defects of the three cocycle identities. The unit and
/// inversion identities follow from the composition identity, but are
/// measured separately for diagnosis.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct CocycleCheck {
    pub composition_defect: f64,
    pub unit_defect: f64,
    pub inversion_defect: f64,
}

impl CocycleCheck {
    pub fn max_defect(&self) -> f64 {
        self.composition_defect
            .max(self.unit_defect)
            .max(self.inversion_defect)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_defect() <= tol
    }
}

/// Measures `|c(a.b) - c(a) - L(a) c(b)|` over all composable pairs, plus
/// the derived unit (`c(unit) = 0`) and inversion
/// (`c(a^-1) = -L(a^-1) c(a)`) identities.
pub fn check_cocycle<S: Scalar>(
    groupoid: &FiniteGroupoid,
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
) -> CocycleCheck {
    let unit_defect = groupoid
        .units()
        .map(|x| cocycle.value(groupoid.unit_arrow(x)).norm())
        .fold(0.0, f64::max);

    let composition_defect = par::max_indexed(groupoid.n_arrows(), |i| {
        let a = ArrowId(i);
        let source = groupoid.source(a);
        let mut worst = 0.0f64;
        for &b in groupoid.fiber(source, Side::Range) {
            if let Some(c) = groupoid.compose(a, b) {
                let expected = cocycle.value(a) + action.apply(a, cocycle.value(b));
                worst = worst.max((cocycle.value(c) - expected).norm());
            }
        }
        worst
    })
    .max(0.0);

    let inversion_defect = par::max_indexed(groupoid.n_arrows(), |i| {
        let a = ArrowId(i);
        let inv = groupoid.inverse(a);
        (cocycle.value(inv) + action.apply(inv, cocycle.value(a))).norm()
    })
    .max(0.0);

    CocycleCheck {
        composition_defect,
        unit_defect,
        inversion_defect,
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error(
    "vector of dimension {got} is not in the source fiber of arrow {arrow} (dimension {expected})"
)]
pub struct FiberMismatch {
    pub arrow: ArrowId,
    pub expected: usize,
    pub got: usize,
}

/// The affine action of an arrow on its source fiber:
/// `a . u = L(a) u + c(a)`, landing in the range fiber.
pub fn affine_apply<S: Scalar>(
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
    a: ArrowId,
    u: &DVector<S>,
) -> Result<DVector<S>, FiberMismatch> {
    let m = action.matrix(a);
    if u.len() != m.ncols() {
        return Err(FiberMismatch {
            arrow: a,
            expected: m.ncols(),
            got: u.len(),
        });
    }
    Ok(m * u + cocycle.value(a))
}

/// The fundamental involution `W(a, u) = (a^-1, a . u)` on pairs of an
/// arrow and a point of its source fiber. Applying it twice returns the
/// argument exactly when the cocycle identity holds along `a`.
pub fn fundamental_involution<S: Scalar>(
    groupoid: &FiniteGroupoid,
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
    a: ArrowId,
    u: &DVector<S>,
) -> Result<(ArrowId, DVector<S>), FiberMismatch> {
    Ok((groupoid.inverse(a), affine_apply(action, cocycle, a, u)?))
}

/// The squared norm of a cocycle value.
pub fn psi<S: Scalar>(cocycle: &Cocycle<S>, a: ArrowId) -> f64 {
    cocycle.value(a).norm_squared()
}

/// Conditional negative definiteness of `psi(a) = |c(a)|^2` at base `x`,
/// via [`check_cnd_with`].
pub fn check_cnd<S: Scalar>(groupoid: &FiniteGroupoid, cocycle: &Cocycle<S>, x: UnitId) -> f64 {
    check_cnd_with(groupoid, x, |a| psi(cocycle, a))
}

/// Largest eigenvalue, clamped below at zero, of the kernel
/// `K[i][j] = psi(g_i^-1 . g_j)` over the range fiber at `x`, compressed to
/// the zero-sum subspace. A value of zero (up to eigensolver noise) means
/// `psi` is conditionally negative definite at `x`; any genuine positive
/// eigenvalue is returned as the violation.
///
/// The kernel is symmetrised before the eigensolve, since an arbitrary
/// `psi` need not satisfy `psi(a) = psi(a^-1)`.
pub fn check_cnd_with<F>(groupoid: &FiniteGroupoid, x: UnitId, psi: F) -> f64
where
    F: Fn(ArrowId) -> f64,
{
    let fiber = groupoid.fiber(x, Side::Range);
    let p = fiber.len();
    if p <= 1 {
        return 0.0;
    }
    let mut kernel = DMatrix::<f64>::zeros(p, p);
    for (i, &gi) in fiber.iter().enumerate() {
        let inv = groupoid.inverse(gi);
        for (j, &gj) in fiber.iter().enumerate() {
            let through = groupoid
                .compose(inv, gj)
                .expect("all pairs over the range fiber compose");
            kernel[(i, j)] = psi(through);
        }
    }
    let kernel = (&kernel + kernel.transpose()) * 0.5;
    // P projects onto the zero-sum subspace; PKP restricted there is what
    // conditional negativity constrains.
    let projector = DMatrix::<f64>::identity(p, p) - DMatrix::from_element(p, p, 1.0 / p as f64);
    let compressed = &projector * kernel * &projector;
    let sym = (&compressed + compressed.transpose()) * 0.5;
    let eigen = sym.symmetric_eigenvalues();
    eigen.iter().copied().fold(0.0, f64::max)
}
