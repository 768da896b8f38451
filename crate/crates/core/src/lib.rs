//! Finite groupoids acting isometrically on Hilbert bundles, cocycles over
//! them, and solvers that decide whether a cocycle is a coboundary.
//!
//! The library is organised bottom-up:
//!
//! - [`groupoid`]: finite groupoids as explicit arrow tables, axiom validation,
//!   orbits and minimality.
//! - [`transform`]: windowed transformation groupoids of a map on finitely
//!   many points, and Birkhoff-sum cocycles of a scalar potential.
//! - [`scalar`]: the scalar abstraction shared by real and complex models.
//! - [`bundle`]: Hilbert bundles over the unit space, sections, and isometric
//!   groupoid actions (including completion from generators).
//! - [`cocycle`]: bundle-valued cocycles, coboundaries, the affine action, the
//!   fundamental involution, and the conditionally-negative-definite test.
//! - [`meb`]: minimum enclosing balls and hull distances via simplex
//!   Frank-Wolfe with away steps.
//! - [`solve`]: coboundary solvers (fiber-center, least-squares, transfer
//!   function) and the boundedness probe with growth classification.
//! - [`hull`]: affine orbits and the hull-invariance check.
//! - [`convexity`]: the uniform convexity modulus, midpoint contraction, and
//!   moduli of continuity over a metric on units.
//! - [`gen`]: seeded random sections, isometries, and actions used by tests,
//!   benches, and the scenario generator.
//!
//! With the `parallel` feature (on by default) the arrow-wise scans in
//! validation, cocycle checking, and the solvers fan out over a thread
//! pool; the sequential fallback computes bitwise-identical results.

pub mod bundle;
pub mod cocycle;
pub mod convexity;
pub mod gen;
pub mod groupoid;
pub mod hull;
pub mod meb;
pub mod par;
pub mod scalar;
pub mod solve;
pub mod transform;

pub use bundle::{ActionReport, ActionViolation, HilbertBundle, IsometricAction, Section};
pub use cocycle::{
    affine_apply, check_cnd, check_cocycle, coboundary, fundamental_involution, psi, Cocycle,
    CocycleCheck,
};
pub use groupoid::{
    Arrow, ArrowId, FiniteGroupoid, Side, StructureError, UnitId, ValidationReport,
};
pub use hull::{affine_orbit, hull_invariance_defect, AffineOrbitPoint, OrbitHull};
pub use meb::{distance_to_hull, min_enclosing_ball, Ball};
pub use scalar::{Complex64, Scalar};
pub use solve::{
    boundedness_probe, solve_by_center, solve_by_center_windowed, solve_least_squares,
    solve_transfer_function, GrowthClassification, GrowthVerdict, SolveMethod, SolveReport,
    SolverError,
};
pub use transform::{
    birkhoff_cocycle, build_transformation_groupoid, TransformationSystem, WindowedArrow,
    WindowedGroupoid,
};
