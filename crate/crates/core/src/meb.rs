//! Minimum enclosing balls and distances to convex hulls of finite point
//! sets, over real or complex fibers.
//!
//! Both problems are simplex-constrained quadratic programs in the weights
//! `lambda`: the enclosing-ball dual maximises
//! `sum_i lambda_i |p_i|^2 - |sum_i lambda_i p_i|^2`, the hull distance
//! minimises `|sum_i lambda_i p_i - q|^2`. A single Frank-Wolfe loop with
//! away steps and exact line search drives both; only the Gram matrix and
//! the linear term differ. Complex points enter through the real part of
//! the Hermitian inner product, which is the real-vector-space Gram of the
//! realified points, so the weights stay real.
//!
//! The ball solver certifies its answer: for any weights,
//! `|center(lambda) - center*|^2 <= R(lambda)^2 - g(lambda)` where `R` is
//! the exact farthest-point distance and `g` the dual value (expand
//! `g(lambda) = sum lambda_i |p_i - c*|^2 - |c(lambda) - c*|^2` and bound
//! the first term by `R*^2 <= R^2`). The loop refines until this bound
//! meets the requested tolerance, then polishes the support set by solving
//! the equidistance system in the affine hull of the support, accepting the
//! polished center only if it re-verifies.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MebError {
    #[error("cannot enclose an empty point set")]
    Empty,
    #[error("points have mixed dimensions ({first} vs {other})")]
    MixedDims { first: usize, other: usize },
}

/// A center with the exact farthest-point radius of the input set.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball<S: Scalar> {
    pub center: DVector<S>,
    pub radius: f64,
}

/// Iteration budget for one Frank-Wolfe call. Away steps converge linearly
/// on these problems, so this is generous at the intended scale.
const MAX_ITERS: usize = 200_000;

/// One pass of Frank-Wolfe with away steps on
/// `f(lambda) = lambda' G lambda - beta . lambda` over the simplex,
/// warm-started from `lambda`. Stops at the requested duality gap or the
/// iteration budget. Returns the final Frank-Wolfe gap.
fn minimize_on_simplex(
    gram: &DMatrix<f64>,
    beta: &DVector<f64>,
    lambda: &mut DVector<f64>,
    gap_tol: f64,
    max_iters: usize,
) -> f64 {
    let p = gram.nrows();
    let mut q = gram * &*lambda;
    let mut gap = f64::INFINITY;
    for iter in 0..max_iters {
        // Exact recompute now and then to cancel drift in the running q.
        if iter % 1024 == 1023 {
            let total: f64 = lambda.iter().sum();
            *lambda /= total;
            q = gram * &*lambda;
        }
        let grad = |i: usize| 2.0 * q[i] - beta[i];
        let mut fw = 0usize;
        let mut fw_val = f64::INFINITY;
        let mut away = 0usize;
        let mut away_val = f64::NEG_INFINITY;
        let mut grad_dot_lambda = 0.0;
        for i in 0..p {
            let g = grad(i);
            if g < fw_val {
                fw_val = g;
                fw = i;
            }
            if lambda[i] > 0.0 {
                grad_dot_lambda += lambda[i] * g;
                if g > away_val {
                    away_val = g;
                    away = i;
                }
            }
        }
        let gap_fw = grad_dot_lambda - fw_val;
        gap = gap_fw;
        if gap_fw <= gap_tol {
            break;
        }
        let gap_away = away_val - grad_dot_lambda;

        let lambda_q: f64 = lambda.dot(&q);
        if gap_fw >= gap_away || lambda[away] >= 1.0 {
            // Toward the best vertex: d = e_fw - lambda.
            let curve = gram[(fw, fw)] - 2.0 * q[fw] + lambda_q;
            let t = if curve > f64::MIN_POSITIVE {
                (gap_fw / (2.0 * curve)).clamp(0.0, 1.0)
            } else {
                1.0
            };
            *lambda *= 1.0 - t;
            lambda[fw] += t;
            let col = gram.column(fw);
            for i in 0..p {
                q[i] = (1.0 - t) * q[i] + t * col[i];
            }
        } else {
            // Away from the worst active vertex: d = lambda - e_away.
            let curve = lambda_q - 2.0 * q[away] + gram[(away, away)];
            let t_max = lambda[away] / (1.0 - lambda[away]);
            let t = if curve > f64::MIN_POSITIVE {
                (gap_away / (2.0 * curve)).min(t_max)
            } else {
                t_max
            };
            let drop = t >= t_max;
            *lambda *= 1.0 + t;
            lambda[away] -= t;
            if drop {
                lambda[away] = 0.0;
            }
            let col = gram.column(away);
            for i in 0..p {
                q[i] = (1.0 + t) * q[i] - t * col[i];
            }
        }
    }
    gap
}

/// Real part of the Hermitian Gram matrix of the points.
fn real_gram<S: Scalar>(points: &[DVector<S>]) -> DMatrix<f64> {
    let p = points.len();
    let mut gram = DMatrix::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v = points[i].dotc(&points[j]).real();
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    gram
}

fn combine<S: Scalar>(points: &[DVector<S>], lambda: &DVector<f64>) -> DVector<S> {
    let mut c = DVector::zeros(points[0].len());
    for (p, &l) in points.iter().zip(lambda.iter()) {
        if l != 0.0 {
            c.axpy(S::from_real(l), p, S::one());
        }
    }
    c
}

fn check_dims<S: Scalar>(points: &[DVector<S>]) -> Result<usize, MebError> {
    let first = points.first().ok_or(MebError::Empty)?.len();
    for p in points {
        if p.len() != first {
            return Err(MebError::MixedDims {
                first,
                other: p.len(),
            });
        }
    }
    Ok(first)
}

fn farthest_distance<S: Scalar>(points: &[DVector<S>], center: &DVector<S>) -> f64 {
    points
        .iter()
        .map(|p| (p - center).norm())
        .fold(0.0, f64::max)
}

/// Solves the equidistance system over the affine hull of `support`,
/// returning the circumcenter and its barycentric weights there.
fn circumcenter_in_affine_hull<S: Scalar>(
    support: &[DVector<S>],
) -> Option<(DVector<S>, Vec<f64>)> {
    let m = support.len();
    let base = &support[0];
    if m == 1 {
        return Some((base.clone(), vec![1.0]));
    }
    let deltas: Vec<DVector<S>> = support[1..].iter().map(|p| p - base).collect();
    let mut gram = DMatrix::<f64>::zeros(m - 1, m - 1);
    let mut rhs = DVector::<f64>::zeros(m - 1);
    for i in 0..m - 1 {
        for j in 0..m - 1 {
            gram[(i, j)] = deltas[i].dotc(&deltas[j]).real();
        }
        rhs[i] = 0.5 * deltas[i].norm_squared();
    }
    let svd = gram.svd(true, true);
    let t = svd.solve(&rhs, 1e-12).ok()?;
    let mut center = base.clone();
    for (d, &ti) in deltas.iter().zip(t.iter()) {
        center.axpy(S::from_real(ti), d, S::one());
    }
    let mut weights = Vec::with_capacity(m);
    weights.push(1.0 - t.iter().sum::<f64>());
    weights.extend(t.iter().copied());
    Some((center, weights))
}

/// The minimum enclosing ball, with the center certified within `tol` of
/// the true center (and hence the radius within `tol` of optimal, since the
/// farthest-point radius is 1-Lipschitz in the center).
pub fn min_enclosing_ball<S: Scalar>(points: &[DVector<S>], tol: f64) -> Result<Ball<S>, MebError> {
    check_dims(points)?;
    let p = points.len();
    if p == 1 {
        return Ok(Ball {
            center: points[0].clone(),
            radius: 0.0,
        });
    }

    let gram = real_gram(points);
    let beta = DVector::from_fn(p, |i, _| gram[(i, i)]);
    let scale = beta.iter().copied().fold(1.0, f64::max);
    let mut lambda = DVector::from_element(p, 1.0 / p as f64);

    // Certificate target in squared units; the floating-point floor keeps
    // the loop honest once the dual value saturates.
    let target = (tol * tol).max(1e-14 * scale);
    let mut gap_tol = target;
    let mut best: Option<(DVector<S>, f64, f64)> = None;
    for _ in 0..24 {
        minimize_on_simplex(&gram, &beta, &mut lambda, gap_tol, MAX_ITERS);
        let center = combine(points, &lambda);
        let radius = farthest_distance(points, &center);
        let dual: f64 = lambda
            .iter()
            .enumerate()
            .map(|(i, &l)| l * beta[i])
            .sum::<f64>()
            - lambda.dot(&(&gram * &lambda));
        let cert = radius * radius - dual;
        if best.as_ref().is_none_or(|b| cert < b.2) {
            best = Some((center, radius, cert));
        }
        if cert <= target {
            break;
        }
        gap_tol *= 0.25;
    }
    let (center, radius, _) = best.expect("at least one round ran");

    // Polish: the active support pins the center as a circumcenter in its
    // affine hull. Accept only if the polished ball re-verifies.
    let active: Vec<usize> = (0..p).filter(|&i| lambda[i] > 1e-9).collect();
    let support: Vec<DVector<S>> = active.iter().map(|&i| points[i].clone()).collect();
    if let Some((polished, weights)) = circumcenter_in_affine_hull(&support) {
        let r_polished = farthest_distance(points, &polished);
        let in_hull = weights.iter().all(|&w| w >= -1e-9);
        let support_radius = support
            .iter()
            .map(|s| (s - &polished).norm())
            .fold(0.0, f64::max);
        if in_hull && r_polished <= support_radius + tol.max(1e-12) && r_polished <= radius {
            return Ok(Ball {
                center: polished,
                radius: r_polished,
            });
        }
    }
    Ok(Ball { center, radius })
}

/// Distance from `target` to the convex hull of `points`, computed from the
/// explicit residual vector of the optimal combination, accurate to about
/// `tol` (and to machine precision when the nearest point is a vertex).
pub fn distance_to_hull<S: Scalar>(
    target: &DVector<S>,
    points: &[DVector<S>],
    tol: f64,
) -> Result<f64, MebError> {
    let dim = check_dims(points)?;
    if target.len() != dim {
        return Err(MebError::MixedDims {
            first: dim,
            other: target.len(),
        });
    }
    let p = points.len();
    let gram = real_gram(points);
    let beta = DVector::from_fn(p, |i, _| 2.0 * points[i].dotc(target).real());
    let scale = (0..p)
        .map(|i| gram[(i, i)])
        .fold(target.norm_squared(), f64::max)
        .max(1.0);
    let mut lambda = DVector::from_element(p, 1.0 / p as f64);
    let gap_tol = (tol * tol).max(1e-15 * scale);
    minimize_on_simplex(&gram, &beta, &mut lambda, gap_tol, MAX_ITERS);
    Ok((combine(points, &lambda) - target).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Complex64;
    use nalgebra::Complex;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dvec(coords: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(coords)
    }

    #[test]
    fn two_points_give_the_midpoint() {
        let pts = vec![dvec(&[1.0, 0.0]), dvec(&[5.0, 0.0])];
        let ball = min_enclosing_ball(&pts, 1e-9).unwrap();
        assert!((ball.center - dvec(&[3.0, 0.0])).norm() < 1e-9);
        assert!((ball.radius - 2.0).abs() < 1e-9);
    }

    #[test]
    fn obtuse_triangle_centers_on_the_long_edge() {
        // The circumcenter of {(0,0), (2,0), (1,0.5)} lies outside the
        // triangle; the ball is carried by the long edge alone.
        let pts = vec![dvec(&[0.0, 0.0]), dvec(&[2.0, 0.0]), dvec(&[1.0, 0.5])];
        let ball = min_enclosing_ball(&pts, 1e-9).unwrap();
        assert!((ball.center - dvec(&[1.0, 0.0])).norm() < 1e-8);
        assert!((ball.radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn right_triangle_uses_the_circumcenter() {
        // 3-4-5 triangle: center at the hypotenuse midpoint, radius 5/2.
        let pts = vec![dvec(&[0.0, 0.0]), dvec(&[3.0, 0.0]), dvec(&[0.0, 4.0])];
        let ball = min_enclosing_ball(&pts, 1e-9).unwrap();
        assert!((ball.center - dvec(&[1.5, 2.0])).norm() < 1e-8);
        assert!((ball.radius - 2.5).abs() < 1e-9);
    }

    #[test]
    fn interior_points_do_not_matter() {
        let mut pts = vec![
            dvec(&[-1.0, 0.0, 0.0]),
            dvec(&[1.0, 0.0, 0.0]),
            dvec(&[0.0, 1.0, 0.0]),
            dvec(&[0.0, -1.0, 0.0]),
            dvec(&[0.0, 0.0, 1.0]),
            dvec(&[0.0, 0.0, -1.0]),
        ];
        for _ in 0..10 {
            pts.push(dvec(&[0.1, 0.05, -0.2]));
        }
        let ball = min_enclosing_ball(&pts, 1e-9).unwrap();
        assert!(ball.center.norm() < 1e-8);
        assert!((ball.radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn coincident_points_give_radius_zero() {
        let pts = vec![dvec(&[2.0, -1.0]); 5];
        let ball = min_enclosing_ball(&pts, 1e-9).unwrap();
        assert_eq!(ball.radius, 0.0);
        assert!((ball.center - dvec(&[2.0, -1.0])).norm() < 1e-12);
    }

    #[test]
    fn complex_pair_matches_the_real_picture() {
        // i and -i on the complex line: center 0, radius 1.
        let pts = vec![
            DVector::from_column_slice(&[Complex::new(0.0, 1.0)]),
            DVector::from_column_slice(&[Complex::new(0.0, -1.0)]),
        ];
        let ball = min_enclosing_ball::<Complex64>(&pts, 1e-9).unwrap();
        assert!(ball.center[0].norm() < 1e-9);
        assert!((ball.radius - 1.0).abs() < 1e-9);
    }

    #[test]
    fn enclosure_and_tightness_on_random_sets() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for round in 0..50 {
            let n = 2 + (round % 11);
            let d = 1 + (round % 4);
            let pts: Vec<DVector<f64>> = (0..n)
                .map(|_| DVector::from_fn(d, |_, _| f64::sample_standard(&mut rng) * 3.0))
                .collect();
            let ball = min_enclosing_ball(&pts, 1e-9).unwrap();
            // Exact enclosure by construction of the radius.
            for p in &pts {
                assert!((p - &ball.center).norm() <= ball.radius + 1e-12);
            }
            // No strictly smaller ball at a nearby center.
            for p in &pts {
                let shifted = &ball.center + (p - &ball.center) * 1e-3;
                assert!(farthest_distance(&pts, &shifted) >= ball.radius - 1e-6);
            }
        }
    }

    #[test]
    fn hull_distance_for_a_segment() {
        let pts = vec![dvec(&[0.0, 0.0]), dvec(&[2.0, 0.0])];
        let d = distance_to_hull(&dvec(&[1.0, 1.0]), &pts, 1e-9).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
        let d = distance_to_hull(&dvec(&[3.0, 0.0]), &pts, 1e-9).unwrap();
        assert!((d - 1.0).abs() < 1e-9);
        let d = distance_to_hull(&dvec(&[1.5, 0.0]), &pts, 1e-9).unwrap();
        assert!(d < 1e-9);
    }

    #[test]
    fn hull_distance_hits_vertices_exactly() {
        let pts = vec![dvec(&[0.0, 0.0]), dvec(&[1.0, 0.0]), dvec(&[0.0, 1.0])];
        let d = distance_to_hull(&dvec(&[1.0, 0.0]), &pts, 1e-9).unwrap();
        assert!(d < 1e-12);
    }

    #[test]
    fn empty_input_is_an_error() {
        let pts: Vec<DVector<f64>> = Vec::new();
        assert_eq!(min_enclosing_ball(&pts, 1e-9).err(), Some(MebError::Empty));
    }
}
