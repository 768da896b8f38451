//! Randomised structural properties: cocycle identities on generated
//! models, the involution, Birkhoff telescoping, ball invariants, and the
//! exact rational transfer dichotomy.

use cocycle_core::bundle::HilbertBundle;
use cocycle_core::cocycle::{check_cocycle, coboundary, fundamental_involution, Cocycle};
use cocycle_core::gen;
use cocycle_core::groupoid::{ArrowId, FiniteGroupoid, UnitId};
use cocycle_core::meb::min_enclosing_ball;
use cocycle_core::solve::{
    boundedness_probe, solve_by_center, solve_transfer_function, GrowthVerdict, TransferError,
};
use cocycle_core::transform::{
    birkhoff_cocycle, build_transformation_groupoid, TransformationSystem,
};
use nalgebra::DVector;
use num_rational::Rational64;
use num_traits::Zero;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Coboundaries of random sections satisfy every cocycle identity, and
    /// the center solver reproduces a section with vanishing residual.
    #[test]
    fn coboundaries_always_check_out(
        n in 1usize..4,
        k in 1usize..4,
        d in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = FiniteGroupoid::transitive_with_cyclic_isotropy(n, k);
        let bundle = HilbertBundle::constant(n, d);
        let action = gen::random_transitive_action::<f64, _>(&g, &bundle, &mut rng).unwrap();
        let f = gen::random_section(&bundle, 1.0, &mut rng);
        let c = coboundary(&g, &action, &f);
        let check = check_cocycle(&g, &action, &c);
        prop_assert!(check.max_defect() < 1e-8, "defect {}", check.max_defect());
        let report = solve_by_center(&g, &action, &c, 1e-7).unwrap();
        prop_assert!(report.max_residual < 1e-6, "residual {}", report.max_residual);
    }

    /// The fundamental involution is an involution on pairs (arrow, vector).
    #[test]
    fn involution_squares_to_identity(
        n in 1usize..4,
        k in 1usize..4,
        seed in any::<u64>(),
        arrow_pick in any::<prop::sample::Index>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = FiniteGroupoid::transitive_with_cyclic_isotropy(n, k);
        let bundle = HilbertBundle::constant(n, 2);
        let action = gen::random_transitive_action::<f64, _>(&g, &bundle, &mut rng).unwrap();
        let f = gen::random_section(&bundle, 1.0, &mut rng);
        let c = coboundary(&g, &action, &f);
        let a = ArrowId(arrow_pick.index(g.n_arrows()));
        let u = gen::random_vector::<f64, _>(bundle.dim(g.arrow(a).source), &mut rng);
        let (b, v) = fundamental_involution(&g, &action, &c, a, &u).unwrap();
        prop_assert_eq!(b, g.inverse(a));
        let (back_arrow, back) = fundamental_involution(&g, &action, &c, b, &v).unwrap();
        prop_assert_eq!(back_arrow, a);
        prop_assert!((&back - &u).norm() < 1e-9, "w^2 moved the vector by {}", (&back - &u).norm());
    }

    /// Ball solver invariants that need no oracle: enclosure, the
    /// two-point lower bound, and the centroid upper bound.
    #[test]
    fn ball_radius_sits_between_its_bounds(
        seed in any::<u64>(),
        n in 1usize..9,
        dim in 1usize..4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<DVector<f64>> = (0..n)
            .map(|_| gen::random_vector::<f64, _>(dim, &mut rng))
            .collect();
        let ball = min_enclosing_ball(&points, 1e-9).unwrap();
        let mut half_diameter = 0.0f64;
        for i in 0..n {
            for j in 0..i {
                half_diameter = half_diameter.max(0.5 * (&points[i] - &points[j]).norm());
            }
        }
        let centroid = points.iter().sum::<DVector<f64>>() / n as f64;
        let centroid_radius = points
            .iter()
            .map(|p| (p - &centroid).norm())
            .fold(0.0, f64::max);
        for p in &points {
            prop_assert!((p - &ball.center).norm() <= ball.radius + 1e-9);
        }
        prop_assert!(ball.radius + 1e-9 >= half_diameter);
        prop_assert!(ball.radius <= centroid_radius + 1e-9);
    }

    /// Birkhoff values telescope along every composable pair of windowed
    /// arrows, whatever the underlying map does.
    #[test]
    fn birkhoff_telescopes_on_random_maps(
        map in prop::collection::vec(0usize..5, 2..6),
        window in 1i64..4,
        seed in any::<u64>(),
    ) {
        let n = map.len();
        let map: Vec<usize> = map.into_iter().map(|y| y % n).collect();
        let sys = TransformationSystem::new(map).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f: Vec<f64> = (0..n).map(|_| gen::random_vector::<f64, _>(1, &mut rng)[0]).collect();
        let g = build_transformation_groupoid(&sys, window);
        let values = birkhoff_cocycle(&g, &f);
        for a in 0..g.n_arrows() {
            for b in 0..g.n_arrows() {
                if let Some(ab) = g.compose(a, b) {
                    let lhs = values[ab];
                    let rhs = values[a] + values[b];
                    prop_assert!(
                        (lhs - rhs).abs() < 1e-9,
                        "c(ab) = {lhs} differs from c(a) + c(b) = {rhs}"
                    );
                }
            }
        }
    }

    /// Exact dichotomy: over a random cyclic permutation, the rational
    /// transfer equation solves exactly when the cycle sum vanishes, and
    /// the solution reconstructs the potential with no rounding at all.
    #[test]
    fn rational_transfer_dichotomy(
        numerators in prop::collection::vec(-6i64..7, 2..8),
        force_zero_sum in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let n = numerators.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = random_cycle(n, &mut rng);
        let mut f: Vec<Rational64> =
            numerators.iter().map(|&p| Rational64::new(p, 3)).collect();
        if force_zero_sum {
            let partial: Rational64 = f[..n - 1].iter().sum();
            f[n - 1] = -partial;
        }
        let cycle_sum: Rational64 = f.iter().sum();
        match solve_transfer_function(&sys, &f, 0.0) {
            Ok(g) => {
                prop_assert!(cycle_sum.is_zero());
                for x in 0..n {
                    prop_assert_eq!(f[x], g[x] - g[sys.apply(x)]);
                }
            }
            Err(TransferError::NotACoboundary { cycle_sum: reported }) => {
                prop_assert!(!cycle_sum.is_zero());
                prop_assert_eq!(reported, cycle_sum);
            }
            Err(TransferError::NotCyclic) => prop_assert!(false, "cycle built non-cyclic"),
        }
    }

    /// Groupoid constructors only emit tables that validate, stay closed
    /// under composition, and invert cleanly.
    #[test]
    fn constructed_groupoids_validate(n in 1usize..5, k in 1usize..5) {
        let g = FiniteGroupoid::transitive_with_cyclic_isotropy(n, k);
        prop_assert!(g.validate().is_valid());
        prop_assert!(g.is_minimal());
        prop_assert_eq!(g.n_arrows(), n * n * k);
        for a in g.arrows() {
            let inv = g.inverse(a.id);
            prop_assert_eq!(g.compose(a.id, inv).unwrap(), g.unit_arrow(a.range));
        }
    }
}

fn random_cycle(n: usize, rng: &mut ChaCha8Rng) -> TransformationSystem {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut map = vec![0usize; n];
    for i in 0..n {
        map[order[i]] = order[(i + 1) % n];
    }
    TransformationSystem::new(map).unwrap()
}

/// The probe's verdict agrees with the exact dichotomy on float potentials.
#[test]
fn probe_verdicts_follow_the_cycle_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for case in 0..12 {
        let n = 3 + (case % 5);
        let sys = random_cycle(n, &mut rng);
        let zero_sum = case % 2 == 0;
        let mean = if zero_sum {
            0.0
        } else {
            0.2 + 0.1 * (case % 3) as f64
        };
        let f = gen::random_potential(n, mean, 0.3, &mut rng);
        let windows: Vec<i64> = (1..=6).map(|i| (n as i64) * 2 * i).collect();
        let probe = boundedness_probe(&sys, &f, 0, &windows);
        if zero_sum {
            assert_eq!(
                probe.verdict,
                GrowthVerdict::Bounded,
                "case {case}: sups {:?}",
                probe.sup_by_window
            );
        } else {
            assert_eq!(
                probe.verdict,
                GrowthVerdict::LinearGrowth,
                "case {case}: sups {:?}",
                probe.sup_by_window
            );
            assert!(
                (probe.slope - mean).abs() < 0.1 * mean + 0.05,
                "case {case}: slope {} for mean {mean}",
                probe.slope
            );
        }
    }
}

/// A coboundary's orbit under the affine action is the translated section;
/// shifting the cocycle by a constant on one arrow shifts exactly the
/// reachable orbit points.
#[test]
fn affine_orbit_reaches_every_unit_once_per_arrow() {
    let mut rng = ChaCha8Rng::seed_from_u64(201);
    let g = FiniteGroupoid::transitive_with_cyclic_isotropy(3, 2);
    let bundle = HilbertBundle::constant(3, 2);
    let action = gen::random_transitive_action::<f64, _>(&g, &bundle, &mut rng).unwrap();
    let c = Cocycle::zero(&g, &bundle);
    let seed = gen::random_vector::<f64, _>(2, &mut rng);
    let orbit = cocycle_core::hull::affine_orbit(&g, &action, &c, UnitId(0), &seed).unwrap();
    assert_eq!(
        orbit.len(),
        g.fiber(UnitId(0), cocycle_core::groupoid::Side::Source)
            .len()
    );
    for p in &orbit {
        assert!(
            (p.point.norm() - seed.norm()).abs() < 1e-9,
            "isometries preserve norms"
        );
    }
}
