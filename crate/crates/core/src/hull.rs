//! Affine orbits and invariance of their convex hulls.
//!
//! The affine action `a . u = L(a) u + c(a)` moves a seed vector through
//! the fibers. For a genuine coboundary `c(a) = f(r a) - L(a) f(s a)`, the
//! orbit of `f(x)` is the section itself and every fiber holds one point;
//! for a bounded cocycle the orbit stays bounded and the fiberwise convex
//! hulls of its closure form an invariant family: each arrow maps the hull
//! over its source into the hull over its range. The defect computed here
//! measures how far a stored family is from that invariance, as the largest
//! distance from a mapped point to the target fiber's hull.

use nalgebra::DVector;

use crate::bundle::IsometricAction;
use crate::cocycle::{affine_apply, Cocycle, FiberMismatch};
use crate::groupoid::{ArrowId, FiniteGroupoid, Side, UnitId};
use crate::meb::distance_to_hull;
use crate::par;
use crate::scalar::Scalar;

/// Points that coincide within this distance are stored once.
const DEDUP_TOL: f64 = 1e-9;

/// One step of the affine orbit: the arrow applied and where the seed
/// landed (a vector in the fiber over the arrow's range).
#[derive(Clone, Debug)]
pub struct AffineOrbitPoint<S: Scalar> {
    pub arrow: ArrowId,
    pub point: DVector<S>,
}

/// Applies every arrow of the source fiber at `seed_unit` to `seed`,
/// producing one orbit point per arrow. The unit arrow reproduces the seed.
pub fn affine_orbit<S: Scalar>(
    groupoid: &FiniteGroupoid,
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
    seed_unit: UnitId,
    seed: &DVector<S>,
) -> Result<Vec<AffineOrbitPoint<S>>, FiberMismatch> {
    groupoid
        .fiber(seed_unit, Side::Source)
        .iter()
        .map(|&a| {
            affine_apply(action, cocycle, a, seed).map(|point| AffineOrbitPoint { arrow: a, point })
        })
        .collect()
}

/// The orbit of a seed vector, bucketed by the unit whose fiber each point
/// lies in, with near-duplicates collapsed.
#[derive(Clone, Debug)]
pub struct OrbitHull<S: Scalar> {
    seed_unit: UnitId,
    fibers: Vec<Vec<DVector<S>>>,
}

impl<S: Scalar> OrbitHull<S> {
    /// Builds the fiber buckets of the affine orbit of `seed`. Units the
    /// orbit never reaches (other connected components) get empty buckets.
    pub fn new(
        groupoid: &FiniteGroupoid,
        action: &IsometricAction<S>,
        cocycle: &Cocycle<S>,
        seed_unit: UnitId,
        seed: &DVector<S>,
    ) -> Result<Self, FiberMismatch> {
        let mut fibers: Vec<Vec<DVector<S>>> = vec![Vec::new(); groupoid.n_units()];
        for orbit_point in affine_orbit(groupoid, action, cocycle, seed_unit, seed)? {
            let unit = groupoid.arrow(orbit_point.arrow).range;
            let bucket = &mut fibers[unit.0];
            let duplicate = bucket
                .iter()
                .any(|p| (p - &orbit_point.point).norm() <= DEDUP_TOL);
            if !duplicate {
                bucket.push(orbit_point.point);
            }
        }
        Ok(Self { seed_unit, fibers })
    }

    pub fn seed_unit(&self) -> UnitId {
        self.seed_unit
    }

    /// Stored points over `unit`.
    pub fn fiber_points(&self, unit: UnitId) -> &[DVector<S>] {
        &self.fibers[unit.0]
    }

    /// Number of stored points across all fibers.
    pub fn n_points(&self) -> usize {
        self.fibers.iter().map(Vec::len).sum()
    }
}

/// Largest distance from an arrow image of a stored point to the convex
/// hull of the stored points over that arrow's range. Zero (up to `tol`)
/// certifies that the family of fiberwise hulls is invariant under the
/// affine action.
///
/// Convexity makes checking the stored points sufficient: an affine map
/// sends the hull of a fiber onto the hull of the image points, and a hull
/// is contained in another convex set exactly when its vertices are, so a
/// violation always shows up at some stored point.
pub fn hull_invariance_defect<S: Scalar>(
    groupoid: &FiniteGroupoid,
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
    hull: &OrbitHull<S>,
    tol: f64,
) -> f64 {
    par::max_indexed(groupoid.n_arrows(), |i| {
        let a = groupoid.arrow(ArrowId(i));
        let sources = hull.fiber_points(a.source);
        let targets = hull.fiber_points(a.range);
        if sources.is_empty() {
            return 0.0;
        }
        sources
            .iter()
            .map(|v| {
                let image = affine_apply(action, cocycle, a.id, v)
                    .expect("stored points live in their fibers");
                if targets.is_empty() {
                    image.norm()
                } else {
                    distance_to_hull(&image, targets, tol)
                        .expect("hull points share the fiber dimension")
                }
            })
            .fold(0.0, f64::max)
    })
    .max(0.0)
}

/// Builds the orbit hull of `seed` and measures its invariance defect in
/// one call.
pub fn orbit_hull_invariance_check<S: Scalar>(
    groupoid: &FiniteGroupoid,
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
    seed_unit: UnitId,
    seed: &DVector<S>,
    tol: f64,
) -> Result<f64, FiberMismatch> {
    let hull = OrbitHull::new(groupoid, action, cocycle, seed_unit, seed)?;
    Ok(hull_invariance_defect(
        groupoid, action, cocycle, &hull, tol,
    ))
}
