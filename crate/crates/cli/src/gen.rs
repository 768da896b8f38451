//! Seeded scenario generation for the `gen` subcommand.
//!
//! Every generator is a pure function of its parameters: the same seed and
//! shape produce byte-identical scenario text, so generated files can sit
//! in fixtures and regression suites.

use cocycle_core::bundle::HilbertBundle;
use cocycle_core::gen::{random_action_generators, random_potential, random_section};
use cocycle_core::groupoid::{ArrowId, FiniteGroupoid};
use cocycle_core::scalar::{Complex64, Scalar};
use cocycle_core::transform::TransformationSystem;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scenario::{
    write_finite_scenario, write_windowed_scenario, ActionSpec, CocycleSpec, WindowedModel,
};

/// Shape caps keep generated scenarios loadable in reasonable time.
pub const MAX_UNITS: usize = 32;
pub const MAX_DIM: usize = 16;
pub const MAX_ISOTROPY: usize = 4;
pub const MAX_POINTS: usize = 256;

/// Distinct seed streams per generator family, so one seed does not yield
/// correlated draws across kinds.
const SALT_MINIMAL: u64 = 0x6d69_6e69;
const SALT_TRANSFORM: u64 = 0x6d61_7073;
const SALT_PERTURBED: u64 = 0x7065_7274;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GenKind {
    /// Transitive groupoid, random isometric action in generator form, and
    /// a coboundary cocycle.
    MinimalGroupoid,
    /// Random cyclic permutation with a potential of prescribed mean.
    Transformation,
    /// A minimal-groupoid scenario plus one perturbation line that breaks
    /// the cocycle identity.
    Perturbed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldChoice {
    Real,
    Complex,
}

#[derive(Clone, Debug)]
pub struct GenParams {
    pub kind: GenKind,
    pub seed: u64,
    pub units: usize,
    pub dim: usize,
    pub isotropy: usize,
    pub field: FieldChoice,
    pub points: usize,
    pub mean: f64,
    /// Perturbation target; defaults to the first arrow joining two
    /// distinct units.
    pub arrow: Option<usize>,
    pub coord: usize,
    pub delta: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            kind: GenKind::MinimalGroupoid,
            seed: 0,
            units: 3,
            dim: 2,
            isotropy: 2,
            field: FieldChoice::Real,
            points: 8,
            mean: 0.0,
            arrow: None,
            coord: 0,
            delta: 1e-2,
        }
    }
}

#[derive(Debug, Error)]
pub enum GenCliError {
    #[error("{msg}")]
    BadParams { msg: String },
    #[error(transparent)]
    Gen(#[from] cocycle_core::gen::GenError),
}

fn bad(msg: impl Into<String>) -> GenCliError {
    GenCliError::BadParams { msg: msg.into() }
}

/// Produces the scenario text for `params`.
pub fn generate(params: &GenParams) -> Result<String, GenCliError> {
    match params.kind {
        GenKind::MinimalGroupoid => match params.field {
            FieldChoice::Real => minimal_groupoid::<f64>(params, false),
            FieldChoice::Complex => minimal_groupoid::<Complex64>(params, false),
        },
        GenKind::Transformation => transformation(params),
        GenKind::Perturbed => match params.field {
            FieldChoice::Real => minimal_groupoid::<f64>(params, true),
            FieldChoice::Complex => minimal_groupoid::<Complex64>(params, true),
        },
    }
}

fn check_shape(params: &GenParams) -> Result<(), GenCliError> {
    if params.units == 0 || params.units > MAX_UNITS {
        return Err(bad(format!("units must be in 1..={MAX_UNITS}")));
    }
    if params.dim == 0 || params.dim > MAX_DIM {
        return Err(bad(format!("dim must be in 1..={MAX_DIM}")));
    }
    if params.isotropy == 0 || params.isotropy > MAX_ISOTROPY {
        return Err(bad(format!(
            "isotropy order must be in 1..={MAX_ISOTROPY} (cyclic)"
        )));
    }
    Ok(())
}

fn minimal_groupoid<S: Scalar>(params: &GenParams, perturb: bool) -> Result<String, GenCliError> {
    check_shape(params)?;
    if perturb && params.units < 2 {
        return Err(bad("perturbed scenarios need at least 2 units"));
    }
    let salt = if perturb {
        SALT_PERTURBED
    } else {
        SALT_MINIMAL
    };
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ salt);
    let groupoid = FiniteGroupoid::transitive_with_cyclic_isotropy(params.units, params.isotropy);
    let bundle = HilbertBundle::constant(params.units, params.dim);
    let generators = random_action_generators::<S, _>(&groupoid, &bundle, &mut rng)?;
    let section = random_section::<S, _>(&bundle, 1.0, &mut rng);

    let perturbations: Vec<(ArrowId, usize, f64)> = if perturb {
        let target = match params.arrow {
            Some(i) => {
                if i >= groupoid.n_arrows() {
                    return Err(bad(format!(
                        "arrow {i} out of range for {} arrows",
                        groupoid.n_arrows()
                    )));
                }
                ArrowId(i)
            }
            None => groupoid
                .arrows()
                .iter()
                .find(|a| a.source != a.range)
                .map(|a| a.id)
                .expect("two units give a cross arrow"),
        };
        if params.coord >= params.dim {
            return Err(bad(format!("coord must be below dim {}", params.dim)));
        }
        vec![(target, params.coord, params.delta)]
    } else {
        Vec::new()
    };

    let word = if perturb { "pert" } else { "min" };
    let field_word = if S::IS_COMPLEX { "complex" } else { "real" };
    let id = format!(
        "gen_{word}_u{}d{}k{}_{field_word}_s{}",
        params.units, params.dim, params.isotropy, params.seed
    );
    let comment = format!(
        "generated: transitive groupoid on {} units, isotropy order {}, fiber dim {}, {} coboundary{}",
        params.units,
        params.isotropy,
        params.dim,
        field_word,
        if perturb { ", one perturbation" } else { "" }
    );
    Ok(write_finite_scenario(
        &id,
        Some(params.seed),
        &groupoid,
        &bundle,
        &ActionSpec {
            kind: "generators",
            matrices: generators,
        },
        &CocycleSpec::Coboundary(&section),
        &perturbations,
        Some(&comment),
    ))
}

fn transformation(params: &GenParams) -> Result<String, GenCliError> {
    if params.points < 2 || params.points > MAX_POINTS {
        return Err(bad(format!("points must be in 2..={MAX_POINTS}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed ^ SALT_TRANSFORM);
    let n = params.points;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut map = vec![0usize; n];
    for i in 0..n {
        map[order[i]] = order[(i + 1) % n];
    }
    let system = TransformationSystem::new(map).expect("indices stay in range");
    let potential = random_potential(n, params.mean, 1.0, &mut rng);
    let window = n as i64;
    let model = WindowedModel {
        system,
        potential,
        window,
        windows: vec![window, 2 * window, 4 * window, 8 * window],
    };
    let id = format!("gen_map_n{}_s{}", n, params.seed);
    let comment = format!(
        "generated: random {n}-cycle with potential mean {}",
        crate::scenario::fmt_float(params.mean)
    );
    Ok(write_windowed_scenario(
        &id,
        Some(params.seed),
        &model,
        Some(&comment),
    ))
}
