//! Uniform convexity of the unit ball and metric moduli of continuity.
//!
//! In a Hilbert space the parallelogram law pins the modulus of convexity
//! down exactly: two unit-ball vectors at distance `eps` have their
//! midpoint at norm at most `1 - delta(eps)` with
//! `delta(eps) = 1 - sqrt(1 - eps^2 / 4)`. The midpoint check below
//! verifies that inequality on concrete pairs; the metric utilities
//! measure how fast sections vary across a weighted graph on the units.

use nalgebra::DVector;
use thiserror::Error;

use crate::bundle::Section;
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ConvexityError {
    #[error("separation {eps} outside [0, 2], impossible inside the unit ball")]
    SeparationOutOfRange { eps: f64 },
    #[error("vector norm {norm} exceeds the unit ball bound")]
    NotInUnitBall { norm: f64 },
    #[error("vectors have mismatched dimensions {left} and {right}")]
    DimensionMismatch { left: usize, right: usize },
}

/// Modulus of convexity of a Hilbert unit ball at separation `eps`.
pub fn uniform_convexity_modulus(eps: f64) -> Result<f64, ConvexityError> {
    if !(0.0..=2.0).contains(&eps) {
        return Err(ConvexityError::SeparationOutOfRange { eps });
    }
    Ok(1.0 - (1.0 - eps * eps / 4.0).sqrt())
}

/// Checks the uniform convexity inequality on a concrete pair: the
/// midpoint of two unit-ball vectors must have norm at most
/// `1 - delta(|u - v|)`, up to floating-point slack. Returns the measured
/// midpoint norm margin `1 - delta - |midpoint|` (nonnegative when the
/// inequality holds).
pub fn midpoint_check<S: Scalar>(u: &DVector<S>, v: &DVector<S>) -> Result<f64, ConvexityError> {
    if u.len() != v.len() {
        return Err(ConvexityError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    for w in [u, v] {
        let norm = w.norm();
        if norm > 1.0 + 1e-9 {
            return Err(ConvexityError::NotInUnitBall { norm });
        }
    }
    let eps = (u - v).norm().min(2.0);
    let delta = uniform_convexity_modulus(eps)?;
    let midpoint_norm = ((u + v) * S::from_real(0.5)).norm();
    Ok(1.0 - delta - midpoint_norm + 1e-12)
}

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("edge ({a}, {b}) out of range for {n} units")]
    EdgeOutOfRange { a: usize, b: usize, n: usize },
    #[error("edge ({a}, {b}) has negative weight {w}")]
    NegativeWeight { a: usize, b: usize, w: f64 },
}

/// Shortest-path metric on the unit set of a groupoid, from weighted
/// undirected edges. Unreachable pairs sit at infinity.
#[derive(Clone, Debug)]
pub struct UnitMetric {
    n: usize,
    dist: Vec<f64>,
}

impl UnitMetric {
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self, MetricError> {
        let mut dist = vec![f64::INFINITY; n * n];
        for x in 0..n {
            dist[x * n + x] = 0.0;
        }
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(MetricError::EdgeOutOfRange { a, b, n });
            }
            if w < 0.0 {
                return Err(MetricError::NegativeWeight { a, b, w });
            }
            if w < dist[a * n + b] {
                dist[a * n + b] = w;
                dist[b * n + a] = w;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = dist[i * n + k] + dist[k * n + j];
                    if via < dist[i * n + j] {
                        dist[i * n + j] = via;
                    }
                }
            }
        }
        Ok(Self { n, dist })
    }

    pub fn n_units(&self) -> usize {
        self.n
    }

    pub fn distance(&self, x: usize, y: usize) -> f64 {
        assert!(x < self.n && y < self.n, "unit out of range");
        self.dist[x * self.n + y]
    }
}

/// Pointwise modulus of continuity of a section at radius `r`: for each
/// unit `x`, the largest `|f(y) - f(x)|` over units within metric distance
/// `r`. Fibers must share one dimension so the differences make sense.
pub fn modulus_of_continuity<S: Scalar>(
    section: &Section<S>,
    metric: &UnitMetric,
    r: f64,
) -> Result<Vec<f64>, ConvexityError> {
    let n = metric.n_units();
    assert_eq!(section.values().len(), n, "one fiber value per unit");
    let dim = section.values().first().map_or(0, DVector::len);
    for v in section.values() {
        if v.len() != dim {
            return Err(ConvexityError::DimensionMismatch {
                left: dim,
                right: v.len(),
            });
        }
    }
    Ok((0..n)
        .map(|x| {
            (0..n)
                .filter(|&y| metric.distance(x, y) <= r)
                .map(|y| (section.values()[y].clone() - &section.values()[x]).norm())
                .fold(0.0, f64::max)
        })
        .collect())
}
