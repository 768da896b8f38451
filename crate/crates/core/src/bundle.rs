//! Hilbert bundles over the unit space and isometric groupoid actions.
//!
//! A bundle assigns a fiber dimension to every unit; a section picks a
//! vector in every fiber. An action assigns to every arrow `a` a linear map
//! `L(a)` from the source fiber to the range fiber. Validation checks that
//! each `L(a)` is a surjective isometry, that unit arrows act as the
//! identity, that composition is respected, and that inverses act as
//! adjoints; violations are reported as data with operator-norm defects.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::groupoid::{ArrowId, FiniteGroupoid, Side, UnitId, VIOLATION_CAP};
use crate::par;
use crate::scalar::{isometry_defect, operator_norm, Scalar};

/// Fiber dimensions over the unit space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertBundle {
    dims: Vec<usize>,
}

impl HilbertBundle {
    pub fn constant(n_units: usize, dim: usize) -> Self {
        HilbertBundle {
            dims: vec![dim; n_units],
        }
    }

    pub fn from_dims(dims: Vec<usize>) -> Self {
        HilbertBundle { dims }
    }

    pub fn n_units(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self, x: UnitId) -> usize {
        self.dims[x.0]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Total dimension of the direct sum of all fibers.
    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    /// Start offset of each fiber inside the direct sum, plus the total.
    pub fn offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.dims.len() + 1);
        let mut acc = 0;
        for &d in &self.dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        offsets
    }

    /// The common fiber dimension, if there is one.
    pub fn constant_dim(&self) -> Option<usize> {
        let first = *self.dims.first()?;
        self.dims.iter().all(|&d| d == first).then_some(first)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BundleError {
    #[error("expected {expected} entries (one per {per}), got {got}")]
    EntryCount {
        per: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("value at unit {unit} has dimension {got}, the fiber has {expected}")]
    FiberDim {
        unit: UnitId,
        expected: usize,
        got: usize,
    },
    #[error("matrix at arrow {arrow} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    MatrixShape {
        arrow: ArrowId,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("arrow {arrow} joins fibers of dimensions {source_dim} and {range_dim}, which no surjective isometry can")]
    NonSquareFiberPair {
        arrow: ArrowId,
        range_dim: usize,
        source_dim: usize,
    },
}

/// One vector per fiber.
#[derive(Clone, Debug, PartialEq)]
pub struct Section<S: Scalar> {
    values: Vec<DVector<S>>,
}

impl<S: Scalar> Section<S> {
    pub fn new(bundle: &HilbertBundle, values: Vec<DVector<S>>) -> Result<Self, BundleError> {
        if values.len() != bundle.n_units() {
            return Err(BundleError::EntryCount {
                per: "unit",
                expected: bundle.n_units(),
                got: values.len(),
            });
        }
        for (x, v) in values.iter().enumerate() {
            if v.len() != bundle.dims()[x] {
                return Err(BundleError::FiberDim {
                    unit: UnitId(x),
                    expected: bundle.dims()[x],
                    got: v.len(),
                });
            }
        }
        Ok(Section { values })
    }

    pub fn zero(bundle: &HilbertBundle) -> Self {
        Section {
            values: bundle.dims().iter().map(|&d| DVector::zeros(d)).collect(),
        }
    }

    pub fn value(&self, x: UnitId) -> &DVector<S> {
        &self.values[x.0]
    }

    pub fn set(&mut self, x: UnitId, v: DVector<S>) {
        assert_eq!(v.len(), self.values[x.0].len(), "fiber dimension mismatch");
        self.values[x.0] = v;
    }

    pub fn values(&self) -> &[DVector<S>] {
        &self.values
    }

    /// Largest fiber norm.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// A single defect found while validating an action, with the operator-norm
/// distance from the expected identity.
#[derive(Clone, Debug, PartialEq)]
pub enum ActionViolation {
    NonSquare {
        arrow: ArrowId,
        range_dim: usize,
        source_dim: usize,
    },
    NotIsometric {
        arrow: ArrowId,
        defect: f64,
    },
    UnitNotIdentity {
        unit: UnitId,
        defect: f64,
    },
    NotFunctorial {
        left: ArrowId,
        right: ArrowId,
        defect: f64,
    },
    InverseNotAdjoint {
        arrow: ArrowId,
        defect: f64,
    },
}

impl ActionViolation {
    pub fn defect(&self) -> f64 {
        match self {
            ActionViolation::NonSquare { .. } => f64::INFINITY,
            ActionViolation::NotIsometric { defect, .. }
            | ActionViolation::UnitNotIdentity { defect, .. }
            | ActionViolation::NotFunctorial { defect, .. }
            | ActionViolation::InverseNotAdjoint { defect, .. } => *defect,
        }
    }
}

impl std::fmt::Display for ActionViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ActionViolation::NonSquare {
                arrow,
                range_dim,
                source_dim,
            } => write!(
                f,
                "arrow {arrow} maps a {source_dim}-dimensional fiber to a {range_dim}-dimensional one"
            ),
            ActionViolation::NotIsometric { arrow, defect } => {
                write!(f, "arrow {arrow} does not act isometrically (defect {defect:.3e})")
            }
            ActionViolation::UnitNotIdentity { unit, defect } => {
                write!(f, "unit arrow at {unit} is not the identity (defect {defect:.3e})")
            }
            ActionViolation::NotFunctorial { left, right, defect } => write!(
                f,
                "action of {left} . {right} differs from the composed action (defect {defect:.3e})"
            ),
            ActionViolation::InverseNotAdjoint { arrow, defect } => write!(
                f,
                "inverse of arrow {arrow} does not act as the adjoint (defect {defect:.3e})"
            ),
        }
    }
}

/// Outcome of an action validation scan; defects at or below the tolerance
/// passed to [`IsometricAction::validate`] are not reported.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ActionReport {
    pub violations: Vec<ActionViolation>,
    pub total: usize,
    pub max_defect: f64,
}

impl ActionReport {
    pub fn is_valid(&self) -> bool {
        self.total == 0
    }

    fn push(&mut self, v: ActionViolation) {
        self.total += 1;
        let d = v.defect();
        if d.is_finite() {
            self.max_defect = self.max_defect.max(d);
        } else {
            self.max_defect = f64::INFINITY;
        }
        if self.violations.len() < VIOLATION_CAP {
            self.violations.push(v);
        }
    }

    fn merge(reports: impl IntoIterator<Item = ActionReport>) -> ActionReport {
        let mut out = ActionReport::default();
        for r in reports {
            out.total += r.total;
            out.max_defect = out.max_defect.max(r.max_defect);
            for v in r.violations {
                if out.violations.len() < VIOLATION_CAP {
                    out.violations.push(v);
                }
            }
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum CompletionError {
    #[error(transparent)]
    Shape(#[from] BundleError),
    #[error("generators force conflicting matrices at arrow {arrow} (defect {defect:.3e})")]
    Inconsistent { arrow: ArrowId, defect: f64 },
    #[error("generators reach only {assigned} of {total} arrows (first unreached: {arrow})")]
    Incomplete {
        arrow: ArrowId,
        assigned: usize,
        total: usize,
    },
}

/// One matrix per arrow, acting on sections fiberwise.
#[derive(Clone, Debug)]
pub struct IsometricAction<S: Scalar> {
    matrices: Vec<DMatrix<S>>,
}

impl<S: Scalar> IsometricAction<S> {
    /// Wraps explicit matrices after checking their shapes against the
    /// bundle. Isometry itself is checked by [`validate`](Self::validate).
    pub fn new(
        groupoid: &FiniteGroupoid,
        bundle: &HilbertBundle,
        matrices: Vec<DMatrix<S>>,
    ) -> Result<Self, BundleError> {
        if matrices.len() != groupoid.n_arrows() {
            return Err(BundleError::EntryCount {
                per: "arrow",
                expected: groupoid.n_arrows(),
                got: matrices.len(),
            });
        }
        for (i, m) in matrices.iter().enumerate() {
            let a = groupoid.arrow(ArrowId(i));
            let (er, ec) = (bundle.dim(a.range), bundle.dim(a.source));
            if m.nrows() != er || m.ncols() != ec {
                return Err(BundleError::MatrixShape {
                    arrow: a.id,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    expected_rows: er,
                    expected_cols: ec,
                });
            }
        }
        Ok(IsometricAction { matrices })
    }

    /// The trivial action: every arrow acts as the identity. Fails when some
    /// arrow joins fibers of different dimensions.
    pub fn trivial(groupoid: &FiniteGroupoid, bundle: &HilbertBundle) -> Result<Self, BundleError> {
        let matrices = groupoid
            .arrows()
            .iter()
            .map(|a| {
                let (dr, ds) = (bundle.dim(a.range), bundle.dim(a.source));
                if dr != ds {
                    return Err(BundleError::NonSquareFiberPair {
                        arrow: a.id,
                        range_dim: dr,
                        source_dim: ds,
                    });
                }
                Ok(DMatrix::identity(dr, dr))
            })
            .collect::<Result<_, _>>()?;
        Ok(IsometricAction { matrices })
    }

    pub fn matrix(&self, a: ArrowId) -> &DMatrix<S> {
        &self.matrices[a.0]
    }

    pub fn apply(&self, a: ArrowId, v: &DVector<S>) -> DVector<S> {
        &self.matrices[a.0] * v
    }

    /// Checks isometry, unit identity, functoriality, and adjoint inverses.
    /// Defects at or below `tol` are considered numerical noise and pass.
    pub fn validate(
        &self,
        groupoid: &FiniteGroupoid,
        bundle: &HilbertBundle,
        tol: f64,
    ) -> ActionReport {
        let mut head = ActionReport::default();
        for x in groupoid.units() {
            let d = bundle.dim(x);
            let m = self.matrix(groupoid.unit_arrow(x));
            if m.nrows() == d && m.ncols() == d {
                let defect = operator_norm(&(m - DMatrix::<S>::identity(d, d)));
                if defect > tol {
                    head.push(ActionViolation::UnitNotIdentity { unit: x, defect });
                }
            }
        }

        let per_arrow = par::map_indexed(groupoid.n_arrows(), |i| {
            self.scan_arrow(groupoid, bundle, ArrowId(i), tol)
        });
        ActionReport::merge(std::iter::once(head).chain(per_arrow))
    }

    fn scan_arrow(
        &self,
        groupoid: &FiniteGroupoid,
        bundle: &HilbertBundle,
        a: ArrowId,
        tol: f64,
    ) -> ActionReport {
        let mut rep = ActionReport::default();
        let arrow = groupoid.arrow(a);
        let m = self.matrix(a);

        let (dr, ds) = (bundle.dim(arrow.range), bundle.dim(arrow.source));
        if dr != ds {
            rep.push(ActionViolation::NonSquare {
                arrow: a,
                range_dim: dr,
                source_dim: ds,
            });
        } else {
            let defect = isometry_defect(m);
            if defect > tol {
                rep.push(ActionViolation::NotIsometric { arrow: a, defect });
            }
        }

        let inv = groupoid.inverse(a);
        let adj = m.adjoint();
        let m_inv = self.matrix(inv);
        if m_inv.shape() == adj.shape() {
            let defect = operator_norm(&(m_inv - adj));
            if defect > tol {
                rep.push(ActionViolation::InverseNotAdjoint { arrow: a, defect });
            }
        }

        for &b in groupoid.fiber(arrow.source, Side::Range) {
            if let Some(c) = groupoid.compose(a, b) {
                let product = m * self.matrix(b);
                let defect = operator_norm(&(self.matrix(c) - product));
                if defect > tol {
                    rep.push(ActionViolation::NotFunctorial {
                        left: a,
                        right: b,
                        defect,
                    });
                }
            }
        }
        rep
    }

    /// Completes an action from matrices on generating arrows.
    ///
    /// Unit arrows start as identities. The closure repeatedly assigns
    /// `L(a^-1) = L(a)*` and `L(a.b) = L(a) L(b)`, and keeps sweeping until
    /// nothing changes; on the final sweep every derivable relation has been
    /// re-derived and compared, so a success is consistent within `tol` by
    /// construction. Non-isometric generators surface as inconsistencies,
    /// since the adjoint then fails to invert.
    pub fn complete_from_generators(
        groupoid: &FiniteGroupoid,
        bundle: &HilbertBundle,
        generators: &[(ArrowId, DMatrix<S>)],
        tol: f64,
    ) -> Result<Self, CompletionError> {
        let n = groupoid.n_arrows();
        let mut matrices: Vec<Option<DMatrix<S>>> = vec![None; n];

        let assign = |slot: &mut Vec<Option<DMatrix<S>>>,
                      a: ArrowId,
                      m: DMatrix<S>|
         -> Result<bool, CompletionError> {
            match &slot[a.0] {
                Some(old) => {
                    let defect = operator_norm(&(old - &m));
                    if defect > tol {
                        Err(CompletionError::Inconsistent { arrow: a, defect })
                    } else {
                        Ok(false)
                    }
                }
                None => {
                    slot[a.0] = Some(m);
                    Ok(true)
                }
            }
        };

        for x in groupoid.units() {
            let d = bundle.dim(x);
            assign(
                &mut matrices,
                groupoid.unit_arrow(x),
                DMatrix::identity(d, d),
            )?;
        }
        for (a, m) in generators {
            let arrow = groupoid.arrow(*a);
            let (er, ec) = (bundle.dim(arrow.range), bundle.dim(arrow.source));
            if m.nrows() != er || m.ncols() != ec {
                return Err(BundleError::MatrixShape {
                    arrow: *a,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    expected_rows: er,
                    expected_cols: ec,
                }
                .into());
            }
            assign(&mut matrices, *a, m.clone())?;
        }

        loop {
            let mut changed = false;
            for i in 0..n {
                let Some(m) = matrices[i].clone() else {
                    continue;
                };
                let inv = groupoid.inverse(ArrowId(i));
                changed |= assign(&mut matrices, inv, m.adjoint())?;
                for j in 0..n {
                    let Some(mj) = &matrices[j] else { continue };
                    if let Some(c) = groupoid.compose(ArrowId(i), ArrowId(j)) {
                        let product = &m * mj;
                        changed |= assign(&mut matrices, c, product)?;
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let assigned = matrices.iter().filter(|m| m.is_some()).count();
        if assigned < n {
            let first = matrices.iter().position(|m| m.is_none()).unwrap();
            return Err(CompletionError::Incomplete {
                arrow: ArrowId(first),
                assigned,
                total: n,
            });
        }
        Ok(IsometricAction {
            matrices: matrices.into_iter().map(Option::unwrap).collect(),
        })
    }
}
