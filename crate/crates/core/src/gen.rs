//! Seeded random model builders used by tests, benches, and the CLI.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::bundle::{CompletionError, HilbertBundle, IsometricAction, Section};
use crate::groupoid::{ArrowId, FiniteGroupoid, UnitId};
use crate::scalar::Scalar;

pub use crate::scalar::random_isometry;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("isotropy at unit {unit} is not cyclic, no single generator spans it")]
    NonCyclicIsotropy { unit: UnitId },
    #[error(transparent)]
    Completion(#[from] CompletionError),
}

/// Standard Gaussian vector.
pub fn random_vector<S: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<S> {
    DVector::from_fn(dim, |_, _| S::sample_standard(rng))
}

/// Section with independent Gaussian fiber values of spread `scale`.
pub fn random_section<S: Scalar, R: Rng + ?Sized>(
    bundle: &HilbertBundle,
    scale: f64,
    rng: &mut R,
) -> Section<S> {
    let values = (0..bundle.n_units())
        .map(|x| random_vector::<S, _>(bundle.dim(UnitId(x)), rng) * S::from_real(scale))
        .collect();
    Section::new(bundle, values).expect("dimensions drawn from the bundle")
}

/// Generator matrices for a random isometric action on a groupoid whose
/// isotropy groups are cyclic: spanning-forest arrows get independent Haar
/// isometries, and at each orbit root a full-order isotropy generator gets
/// a finite-order isometry matching its order. Everything else follows by
/// composition (so completion determines the rest exactly).
pub fn random_action_generators<S: Scalar, R: Rng + ?Sized>(
    groupoid: &FiniteGroupoid,
    bundle: &HilbertBundle,
    rng: &mut R,
) -> Result<Vec<(ArrowId, nalgebra::DMatrix<S>)>, GenError> {
    let mut generators: Vec<(ArrowId, nalgebra::DMatrix<S>)> = Vec::new();
    for &a in &groupoid.spanning_forest() {
        let arrow = groupoid.arrow(a);
        debug_assert_eq!(bundle.dim(arrow.source), bundle.dim(arrow.range));
        generators.push((a, random_isometry(bundle.dim(arrow.source), rng)));
    }
    for root in orbit_roots(groupoid) {
        let isotropy = groupoid.isotropy(root);
        let order = isotropy.len();
        if order <= 1 {
            continue;
        }
        let generator = isotropy
            .iter()
            .copied()
            .find(|&a| groupoid.arrow_order(a) == Some(order))
            .ok_or(GenError::NonCyclicIsotropy { unit: root })?;
        generators.push((
            generator,
            S::random_finite_order_isometry(bundle.dim(root), order, rng),
        ));
    }
    Ok(generators)
}

/// Random isometric action built from [`random_action_generators`] by
/// completion.
pub fn random_transitive_action<S: Scalar, R: Rng + ?Sized>(
    groupoid: &FiniteGroupoid,
    bundle: &HilbertBundle,
    rng: &mut R,
) -> Result<IsometricAction<S>, GenError> {
    let generators = random_action_generators(groupoid, bundle, rng)?;
    Ok(IsometricAction::complete_from_generators(
        groupoid,
        bundle,
        &generators,
        1e-9,
    )?)
}

/// One representative unit per orbit.
fn orbit_roots(groupoid: &FiniteGroupoid) -> Vec<UnitId> {
    groupoid
        .orbits()
        .into_iter()
        .filter_map(|block| block.into_iter().next())
        .collect()
}

/// Potential with prescribed mean: `mean` plus a centered Gaussian
/// fluctuation of spread `amplitude`, recentered so the sample mean is
/// exactly `mean`.
pub fn random_potential<R: Rng + ?Sized>(
    n: usize,
    mean: f64,
    amplitude: f64,
    rng: &mut R,
) -> Vec<f64> {
    let mut f: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            amplitude * z
        })
        .collect();
    let sample_mean = f.iter().sum::<f64>() / n as f64;
    for v in &mut f {
        *v += mean - sample_mean;
    }
    f
}
