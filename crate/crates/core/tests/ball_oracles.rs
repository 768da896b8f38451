//! Cross-checks of the enclosing-ball solver against two independent
//! oracles: exhaustive boundary-subset enumeration (with its own little
//! Gaussian elimination) and derivative-free grid refinement. Neither
//! shares code with the production solver beyond the point type.

use cocycle_core::meb::{distance_to_hull, min_enclosing_ball};
use cocycle_core::scalar::{realify, Complex64};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot =
            (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let pivot_row = a[col].clone();
        let pivot_rhs = b[col];
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col] / pivot_row[col];
            for k in col..n {
                a[row][k] -= factor * pivot_row[k];
            }
            b[row] -= factor * pivot_rhs;
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Smallest ball with the given subset on its boundary and center in the
/// subset's affine hull; `None` when the subset is affinely degenerate.
fn boundary_ball(points: &[DVector<f64>], subset: &[usize]) -> Option<(DVector<f64>, f64)> {
    let base = &points[subset[0]];
    let deltas: Vec<DVector<f64>> = subset[1..].iter().map(|&i| &points[i] - base).collect();
    let k = deltas.len();
    if k == 0 {
        return Some((base.clone(), 0.0));
    }
    let gram: Vec<Vec<f64>> = (0..k)
        .map(|i| (0..k).map(|j| deltas[i].dot(&deltas[j])).collect())
        .collect();
    let rhs: Vec<f64> = (0..k).map(|i| 0.5 * deltas[i].norm_squared()).collect();
    let t = gauss_solve(gram, rhs)?;
    let mut center = base.clone();
    for (ti, d) in t.iter().zip(&deltas) {
        center += d * *ti;
    }
    let radius = (&center - base).norm();
    Some((center, radius))
}

/// Exact minimum enclosing ball by enumerating every candidate boundary
/// subset of size at most dim + 1. Exponential, fine for tiny inputs.
fn enumeration_meb(points: &[DVector<f64>]) -> (DVector<f64>, f64) {
    let n = points.len();
    let dim = points[0].len();
    let mut best: Option<(DVector<f64>, f64)> = None;
    for mask in 1u32..(1 << n) {
        if mask.count_ones() as usize > dim + 1 {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
        let Some((center, radius)) = boundary_ball(points, &subset) else {
            continue;
        };
        let encloses = points.iter().all(|p| (p - &center).norm() <= radius + 1e-9);
        if encloses && best.as_ref().is_none_or(|(_, r)| radius < *r) {
            best = Some((center, radius));
        }
    }
    best.expect("the full-set candidate always encloses")
}

/// Grid-refinement minimiser of the farthest-point distance. Pattern
/// search can stall in the narrow descent cones of this nonsmooth
/// objective, so its result is a certified upper bound on the optimal
/// radius rather than the optimum itself.
fn grid_meb_radius(points: &[DVector<f64>]) -> f64 {
    let dim = points[0].len();
    let n = points.len() as f64;
    let mut center: DVector<f64> = points.iter().sum::<DVector<f64>>() / n;
    let farthest = |c: &DVector<f64>| points.iter().map(|p| (p - c).norm()).fold(0.0, f64::max);
    let mut step = farthest(&center).max(1e-12);
    let mut offsets: Vec<Vec<f64>> = vec![vec![]];
    for _ in 0..dim {
        offsets = offsets
            .iter()
            .flat_map(|o| {
                [-1.0, 0.0, 1.0].iter().map(move |&d| {
                    let mut o = o.clone();
                    o.push(d);
                    o
                })
            })
            .collect();
    }
    let mut current = farthest(&center);
    let mut evals = 0usize;
    while step > 1e-12 && evals < 100_000 {
        let mut improved = false;
        for offset in &offsets {
            let candidate = &center + DVector::from_fn(dim, |i, _| step * offset[i]);
            let value = farthest(&candidate);
            evals += 1;
            if value < current {
                current = value;
                center = candidate;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    current
}

fn random_points(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<DVector<f64>> {
    (0..n)
        .map(|_| {
            DVector::from_fn(dim, |_, _| {
                let z: f64 = StandardNormal.sample(rng);
                2.0 * z
            })
        })
        .collect()
}

#[test]
fn solver_matches_subset_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for case in 0..40 {
        let dim = rng.random_range(2..=3);
        let n = rng.random_range(1..=7);
        let points = random_points(&mut rng, n, dim);
        let ball = min_enclosing_ball(&points, 1e-9).unwrap();
        let (oracle_center, oracle_radius) = enumeration_meb(&points);
        assert!(
            (ball.radius - oracle_radius).abs() < 1e-7,
            "case {case}: radius {} vs oracle {}",
            ball.radius,
            oracle_radius
        );
        // The minimum enclosing ball is unique, so centers agree too.
        assert!(
            (&ball.center - &oracle_center).norm() < 1e-6,
            "case {case}: center offset {}",
            (&ball.center - &oracle_center).norm()
        );
    }
}

#[test]
fn solver_beats_grid_refinement() {
    // The solver claims the optimum, so it must tie or beat the radius of
    // any independently found enclosing center, and not by a margin that
    // would mean the two describe different point sets.
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for case in 0..25 {
        let dim = rng.random_range(1..=3);
        let n = rng.random_range(2..=9);
        let points = random_points(&mut rng, n, dim);
        let ball = min_enclosing_ball(&points, 1e-9).unwrap();
        let upper_bound = grid_meb_radius(&points);
        assert!(
            ball.radius <= upper_bound + 1e-9,
            "case {case}: radius {} exceeds independent bound {}",
            ball.radius,
            upper_bound
        );
        assert!(
            upper_bound - ball.radius < 0.05 * ball.radius.max(1.0),
            "case {case}: bound {} is suspiciously far above radius {}",
            upper_bound,
            ball.radius
        );
    }
}

#[test]
fn complex_ball_agrees_with_its_real_picture() {
    // A complex point set and its real interleaving share the same
    // pairwise geometry, hence the same ball radius.
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for _ in 0..10 {
        let n = rng.random_range(2..=6);
        let points: Vec<DVector<Complex64>> = (0..n)
            .map(|_| {
                DVector::from_fn(2, |_, _| {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    Complex64::new(re, im)
                })
            })
            .collect();
        let real_points: Vec<DVector<f64>> = points.iter().map(realify).collect();
        let complex_ball = min_enclosing_ball(&points, 1e-9).unwrap();
        let real_ball = min_enclosing_ball(&real_points, 1e-9).unwrap();
        assert!((complex_ball.radius - real_ball.radius).abs() < 1e-8);
        assert!((realify(&complex_ball.center) - &real_ball.center).norm() < 1e-6);
    }
}

#[test]
fn hull_distance_matches_grid_search_on_segments() {
    // For a two-point hull the distance to a segment has a closed form;
    // check random targets against it.
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    for _ in 0..30 {
        let a = random_points(&mut rng, 1, 3).pop().unwrap();
        let b = random_points(&mut rng, 1, 3).pop().unwrap();
        let target = random_points(&mut rng, 1, 3).pop().unwrap();
        let measured = distance_to_hull(&target, &[a.clone(), b.clone()], 1e-10).unwrap();
        let ab = &b - &a;
        let t = ((&target - &a).dot(&ab) / ab.norm_squared()).clamp(0.0, 1.0);
        let exact = (&target - (&a + ab * t)).norm();
        assert!(
            (measured - exact).abs() < 1e-7,
            "measured {measured} vs exact {exact}"
        );
    }
}
