//! Coboundary solvers and the boundedness probe.
//!
//! The center solver rests on one geometric fact: right translation by an
//! arrow `a` maps the range fiber of cocycle values at `source(a)` onto the
//! one at `range(a)` through the affine isometry `u -> L(a) u + c(a)`, and
//! the center of a bounded set's minimum enclosing ball is equivariant
//! under affine isometries. Setting `f(x)` to the center of
//! `{ c(g) : g in G^x }` therefore solves `c(a) = f(range a) - L(a)
//! f(source a)` exactly; numerically, to the ball solver's certificate.
//!
//! The least-squares solver solves the same linear system in the minimum
//! norm sense and reports the gauge dimension, the kernel of the coboundary
//! operator (invariant sections). The transfer solver handles single-cycle
//! transformation scenarios exactly, including in rational arithmetic. The
//! probe classifies sup-norm growth of a Birkhoff cocycle over nested
//! windows.

use nalgebra::{DMatrix, DVector};
use num_rational::Rational64;
use num_traits::Zero;
use thiserror::Error;

use crate::bundle::{HilbertBundle, IsometricAction, Section};
use crate::cocycle::{check_cocycle, Cocycle};
use crate::groupoid::{FiniteGroupoid, Side, UnitId};
use crate::meb::{min_enclosing_ball, MebError};
use crate::par;
use crate::scalar::Scalar;
use crate::transform::{
    birkhoff_cocycle, build_transformation_groupoid, TransformationSystem, WindowedGroupoid,
};

/// Center precision requested from the enclosing-ball solver.
const CENTER_TOL: f64 = 1e-9;

/// Relative eigenvalue threshold below which a normal-equations mode counts
/// as gauge (kernel) rather than signal.
const GAUGE_EIGEN_TOL: f64 = 1e-10;

/// Relative stall threshold: the sup norms over the trailing half of the
/// windows must agree to this factor to call the growth bounded.
const STALL_EPS: f64 = 1e-6;

/// Slopes at or below this are treated as zero by the classifier.
const SLOPE_EPS: f64 = 1e-6;

/// Largest relative residual of the linear fit that still counts as linear
/// growth.
const FIT_REL_TOL: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum SolverError {
    #[error("cocycle identities fail (defect {defect:.3e} > tolerance {tol:.3e})")]
    CocycleDefect { defect: f64, tol: f64 },
    #[error(transparent)]
    Ball(#[from] MebError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMethod {
    Center,
    LeastSquares,
    Transfer,
}

impl std::fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SolveMethod::Center => "center",
            SolveMethod::LeastSquares => "lsq",
            SolveMethod::Transfer => "transfer",
        })
    }
}

/// A candidate section together with how well its coboundary matches.
#[derive(Clone, Debug)]
pub struct SolveReport<S: Scalar> {
    pub method: SolveMethod,
    pub section: Section<S>,
    /// Largest arrow-wise norm of `c(a) - f(range a) + L(a) f(source a)`.
    pub max_residual: f64,
    /// Enclosing-ball radius per unit (center method only).
    pub fiber_radii: Vec<f64>,
    /// Dimension of the coboundary operator's kernel (least squares only).
    pub gauge_dim: Option<usize>,
    pub minimal: bool,
}

/// Largest arrow-wise residual of the coboundary equation for `section`.
pub fn coboundary_residual<S: Scalar>(
    groupoid: &FiniteGroupoid,
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
    section: &Section<S>,
) -> f64 {
    par::max_indexed(groupoid.n_arrows(), |i| {
        let a = groupoid.arrow(crate::groupoid::ArrowId(i));
        let expected = section.value(a.range) - action.apply(a.id, section.value(a.source));
        (cocycle.value(a.id) - expected).norm()
    })
    .max(0.0)
}

/// Solves the coboundary equation by taking, at every unit, the center of
/// the enclosing ball of the cocycle values over its range fiber.
///
/// Fails fast when the cocycle identities are violated beyond `tol`: the
/// fiber translation argument needs them, so a defective input would yield
/// a meaningless section.
pub fn solve_by_center<S: Scalar>(
    groupoid: &FiniteGroupoid,
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
    tol: f64,
) -> Result<SolveReport<S>, SolverError> {
    let check = check_cocycle(groupoid, action, cocycle);
    if !check.passes(tol) {
        return Err(SolverError::CocycleDefect {
            defect: check.max_defect(),
            tol,
        });
    }
    let balls = par::map_indexed(groupoid.n_units(), |x| {
        let points: Vec<DVector<S>> = groupoid
            .fiber(UnitId(x), Side::Range)
            .iter()
            .map(|&a| cocycle.value(a).clone())
            .collect();
        // The unit arrow contributes c(unit) = 0, so the fiber is nonempty.
        min_enclosing_ball(&points, CENTER_TOL)
    });
    let mut values = Vec::with_capacity(groupoid.n_units());
    let mut fiber_radii = Vec::with_capacity(groupoid.n_units());
    for ball in balls {
        let ball = ball?;
        values.push(ball.center);
        fiber_radii.push(ball.radius);
    }
    let bundle = HilbertBundle::from_dims(values.iter().map(|v| v.len()).collect());
    let section = Section::new(&bundle, values).expect("centers live in their fibers");
    let max_residual = coboundary_residual(groupoid, action, cocycle, &section);
    Ok(SolveReport {
        method: SolveMethod::Center,
        section,
        max_residual,
        fiber_radii,
        gauge_dim: None,
        minimal: groupoid.is_minimal(),
    })
}

/// Pseudoinverse solve of the hermitian system `m f = rhs`, returning the
/// minimum-norm solution and the kernel dimension at the relative
/// eigenvalue cutoff.
fn solve_min_norm<S: Scalar>(m: DMatrix<S>, rhs: DVector<S>) -> (DVector<S>, usize) {
    let dim = m.nrows();
    if dim == 0 {
        return (rhs, 0);
    }
    let eigen = m.symmetric_eigen();
    let cutoff = GAUGE_EIGEN_TOL * eigen.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut solution = DVector::zeros(dim);
    let mut kernel = 0usize;
    for (i, &ev) in eigen.eigenvalues.iter().enumerate() {
        if ev <= cutoff {
            kernel += 1;
            continue;
        }
        let q = eigen.eigenvectors.column(i);
        let coeff = q.dotc(&rhs) / S::from_real(ev);
        solution.axpy(coeff, &q.clone_owned(), S::one());
    }
    (solution, kernel)
}

/// Solves the coboundary equation in the least-squares sense over all
/// arrows, via the normal equations on the direct sum of the fibers. Always
/// returns a section; on a genuine coboundary its residual vanishes, and on
/// anything else it is the best l2 compromise.
pub fn solve_least_squares<S: Scalar>(
    groupoid: &FiniteGroupoid,
    bundle: &HilbertBundle,
    action: &IsometricAction<S>,
    cocycle: &Cocycle<S>,
) -> SolveReport<S> {
    let offsets = bundle.offsets();
    let total = bundle.total_dim();
    let mut normal = DMatrix::<S>::zeros(total, total);
    let mut rhs = DVector::<S>::zeros(total);

    // Each arrow contributes the row block E_r - L(a) E_s; accumulate
    // A* A and A* c directly.
    for a in groupoid.arrows() {
        let (r, s) = (a.range.0, a.source.0);
        let (dr, ds) = (bundle.dims()[r], bundle.dims()[s]);
        let l = action.matrix(a.id);
        let c = cocycle.value(a.id);
        for i in 0..dr {
            normal[(offsets[r] + i, offsets[r] + i)] += S::one();
            rhs[offsets[r] + i] += c[i];
        }
        // -(L* c) on the source block, -L on the (r, s) off-diagonal
        // blocks, L* L on the source diagonal block.
        for i in 0..ds {
            let mut acc = S::zero();
            for k in 0..dr {
                acc += l[(k, i)].conjugate() * c[k];
            }
            rhs[offsets[s] + i] -= acc;
        }
        for i in 0..dr {
            for j in 0..ds {
                normal[(offsets[r] + i, offsets[s] + j)] -= l[(i, j)];
                normal[(offsets[s] + j, offsets[r] + i)] -= l[(i, j)].conjugate();
            }
        }
        for i in 0..ds {
            for j in 0..ds {
                let mut acc = S::zero();
                for k in 0..dr {
                    acc += l[(k, i)].conjugate() * l[(k, j)];
                }
                normal[(offsets[s] + i, offsets[s] + j)] += acc;
            }
        }
    }

    let (stacked, gauge_dim) = solve_min_norm(normal, rhs);
    let values: Vec<DVector<S>> = (0..groupoid.n_units())
        .map(|x| DVector::from_fn(bundle.dims()[x], |i, _| stacked[offsets[x] + i]))
        .collect();
    let section = Section::new(bundle, values).expect("solution blocks match the bundle");
    let max_residual = coboundary_residual(groupoid, action, cocycle, &section);
    SolveReport {
        method: SolveMethod::LeastSquares,
        section,
        max_residual,
        fiber_radii: Vec::new(),
        gauge_dim: Some(gauge_dim),
        minimal: groupoid.is_minimal(),
    }
}

/// Scalars the transfer solver can walk a cycle with: exact rationals, or
/// floats with a tolerance deciding when the cycle obstruction counts as
/// zero.
pub trait CycleScalar: Clone + Zero + std::ops::Sub<Output = Self> {
    fn negligible(&self, tol: f64) -> bool;
}

impl CycleScalar for f64 {
    fn negligible(&self, tol: f64) -> bool {
        self.abs() <= tol
    }
}

impl CycleScalar for Rational64 {
    fn negligible(&self, _tol: f64) -> bool {
        self.is_zero()
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum TransferError<K: std::fmt::Debug> {
    #[error("transformation is not a single cycle through every point")]
    NotCyclic,
    #[error("cycle sum obstruction {cycle_sum:?} is not zero")]
    NotACoboundary { cycle_sum: K },
}

/// Solves `f = g - g . T` along a single-cycle transformation, walking the
/// cycle from point 0 with `g(0) = 0`. Succeeds exactly when the sum of `f`
/// over the cycle vanishes (within `zero_tol` for floats, exactly for
/// rationals); otherwise the obstruction is returned.
pub fn solve_transfer_function<K: CycleScalar + std::fmt::Debug>(
    system: &TransformationSystem,
    potential: &[K],
    zero_tol: f64,
) -> Result<Vec<K>, TransferError<K>> {
    assert_eq!(potential.len(), system.n_points(), "one value per point");
    if !system.is_single_cycle() {
        return Err(TransferError::NotCyclic);
    }
    let n = system.n_points();
    let mut g = vec![K::zero(); n];
    let mut x = 0usize;
    let mut acc = K::zero();
    for _ in 0..n {
        g[x] = acc.clone();
        acc = acc - potential[x].clone();
        x = system.apply(x);
    }
    // Back at the start: acc is minus the cycle sum of f.
    let cycle_sum = K::zero() - acc;
    if cycle_sum.negligible(zero_tol) {
        Ok(g)
    } else {
        Err(TransferError::NotACoboundary { cycle_sum })
    }
}

/// Per-window outcome of the windowed center solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowRecord {
    pub window: i64,
    pub max_residual: f64,
    pub max_radius: f64,
}

#[derive(Clone, Debug)]
pub struct WindowedSolveReport {
    /// Candidate transfer values from the largest window.
    pub section: Vec<f64>,
    pub records: Vec<WindowRecord>,
    /// True when the residual keeps climbing with the window, the windowed
    /// signature of an unbounded cocycle.
    pub residual_growing: bool,
}

/// Center solve for the Birkhoff cocycle of a scalar potential, repeated
/// over a list of windows. Fiber values are scalar, so the enclosing
/// interval midpoint is the exact center.
pub fn solve_by_center_windowed(
    system: &TransformationSystem,
    potential: &[f64],
    windows: &[i64],
) -> WindowedSolveReport {
    let mut windows: Vec<i64> = windows.to_vec();
    windows.sort_unstable();
    windows.dedup();
    assert!(!windows.is_empty(), "need at least one window");
    let full = build_transformation_groupoid(system, *windows.last().unwrap());

    let mut records = Vec::with_capacity(windows.len());
    let mut section = vec![0.0; system.n_points()];
    for &window in &windows {
        let sub = full.sub_window(window);
        let values = birkhoff_cocycle(&sub, potential);
        let mut f = vec![0.0; system.n_points()];
        let mut max_radius = 0.0f64;
        for (x, fx) in f.iter_mut().enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in sub.fiber(x, Side::Range) {
                lo = lo.min(values[i]);
                hi = hi.max(values[i]);
            }
            *fx = 0.5 * (lo + hi);
            max_radius = max_radius.max(0.5 * (hi - lo));
        }
        let max_residual = sub
            .arrows()
            .iter()
            .enumerate()
            .map(|(i, a)| (values[i] - f[a.range_point] + f[a.source_point]).abs())
            .fold(0.0, f64::max);
        records.push(WindowRecord {
            window,
            max_residual,
            max_radius,
        });
        section = f;
    }
    let first = records.first().unwrap().max_residual;
    let last = records.last().unwrap().max_residual;
    let residual_growing = records.len() > 1 && last > 1e-9 && last > 2.0 * first.max(1e-12);
    WindowedSolveReport {
        section,
        records,
        residual_growing,
    }
}

/// Least-squares transfer values over the windowed groupoid: minimises the
/// sum of `(c(a) - g(range) + g(source))^2` over all arrows. Returns the
/// minimum-norm `g` and the kernel dimension (one gauge constant per
/// orbit).
pub fn solve_least_squares_windowed(
    groupoid: &WindowedGroupoid,
    potential: &[f64],
) -> (Vec<f64>, f64, usize) {
    let n = groupoid.n_points();
    let values = birkhoff_cocycle(groupoid, potential);
    let mut normal = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for (i, a) in groupoid.arrows().iter().enumerate() {
        let (r, s) = (a.range_point, a.source_point);
        normal[(r, r)] += 1.0;
        normal[(s, s)] += 1.0;
        normal[(r, s)] -= 1.0;
        normal[(s, r)] -= 1.0;
        rhs[r] += values[i];
        rhs[s] -= values[i];
    }
    let (g, gauge) = solve_min_norm(normal, rhs);
    let residual = groupoid
        .arrows()
        .iter()
        .enumerate()
        .map(|(i, a)| (values[i] - g[a.range_point] + g[a.source_point]).abs())
        .fold(0.0, f64::max);
    (g.iter().copied().collect(), residual, gauge)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthVerdict {
    Bounded,
    LinearGrowth,
    Inconclusive,
}

impl std::fmt::Display for GrowthVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GrowthVerdict::Bounded => "bounded",
            GrowthVerdict::LinearGrowth => "linear_growth",
            GrowthVerdict::Inconclusive => "inconclusive",
        })
    }
}

/// Growth classification of fiber sup norms over nested windows.
#[derive(Clone, Debug, PartialEq)]
pub struct GrowthClassification {
    pub base_point: usize,
    pub sup_by_window: Vec<(i64, f64)>,
    pub verdict: GrowthVerdict,
    /// Least-squares slope of sup norm against window size.
    pub slope: f64,
    /// Relative residual of that linear fit.
    pub fit_rel_error: f64,
}

/// Sup norm of the Birkhoff cocycle over the source fiber at `base_point`,
/// for each window in `windows`, classified as bounded (the trailing half
/// of the sups stalls), linear growth (a good linear fit with positive
/// slope), or inconclusive.
pub fn boundedness_probe(
    system: &TransformationSystem,
    potential: &[f64],
    base_point: usize,
    windows: &[i64],
) -> GrowthClassification {
    let mut windows: Vec<i64> = windows.to_vec();
    windows.sort_unstable();
    windows.dedup();
    assert!(!windows.is_empty(), "need at least one window");
    assert!(base_point < system.n_points(), "base point out of range");
    let full = build_transformation_groupoid(system, *windows.last().unwrap());
    let values = birkhoff_cocycle(&full, potential);
    let sup_by_window: Vec<(i64, f64)> = windows
        .iter()
        .map(|&window| {
            let sup = full
                .fiber(base_point, Side::Source)
                .iter()
                .filter(|&&i| full.arrow(i).shift.abs() <= window)
                .map(|&i| values[i].abs())
                .fold(0.0, f64::max);
            (window, sup)
        })
        .collect();
    classify_growth(base_point, sup_by_window)
}

/// Shared classifier for any sup-by-window series.
pub fn classify_growth(base_point: usize, sup_by_window: Vec<(i64, f64)>) -> GrowthClassification {
    let n = sup_by_window.len();
    let (slope, fit_rel_error) = linear_fit(&sup_by_window);
    let verdict = if n < 2 {
        GrowthVerdict::Inconclusive
    } else {
        let tail = &sup_by_window[n / 2..];
        let tail_max = tail
            .iter()
            .map(|&(_, s)| s)
            .fold(f64::NEG_INFINITY, f64::max);
        let tail_min = tail.iter().map(|&(_, s)| s).fold(f64::INFINITY, f64::min);
        let stalled = tail_max <= 1e-12 || (tail_max - tail_min) <= STALL_EPS * tail_max;
        if stalled {
            GrowthVerdict::Bounded
        } else if slope > SLOPE_EPS && fit_rel_error <= FIT_REL_TOL {
            GrowthVerdict::LinearGrowth
        } else {
            GrowthVerdict::Inconclusive
        }
    };
    GrowthClassification {
        base_point,
        sup_by_window,
        verdict,
        slope,
        fit_rel_error,
    }
}

/// Least-squares line through `(window, sup)`; returns the slope and the
/// residual norm relative to the data norm.
fn linear_fit(data: &[(i64, f64)]) -> (f64, f64) {
    let n = data.len() as f64;
    if data.len() < 2 {
        return (0.0, 0.0);
    }
    let mean_k = data.iter().map(|&(k, _)| k as f64).sum::<f64>() / n;
    let mean_s = data.iter().map(|&(_, s)| s).sum::<f64>() / n;
    let var_k: f64 = data.iter().map(|&(k, _)| (k as f64 - mean_k).powi(2)).sum();
    let cov: f64 = data
        .iter()
        .map(|&(k, s)| (k as f64 - mean_k) * (s - mean_s))
        .sum();
    let slope = if var_k > 0.0 { cov / var_k } else { 0.0 };
    let intercept = mean_s - slope * mean_k;
    let ss_res: f64 = data
        .iter()
        .map(|&(k, s)| (s - slope * k as f64 - intercept).powi(2))
        .sum();
    let ss_tot: f64 = data.iter().map(|&(_, s)| s * s).sum();
    let rel = if ss_tot > 0.0 {
        (ss_res / ss_tot).sqrt()
    } else {
        0.0
    };
    (slope, rel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::coboundary;
    use crate::gen;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn center_solver_recovers_a_coboundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(50);
        for (n, k, d) in [(3usize, 2usize, 2usize), (5, 1, 1), (2, 3, 4)] {
            let g = FiniteGroupoid::transitive_with_cyclic_isotropy(n, k);
            let bundle = HilbertBundle::constant(n, d);
            let action = gen::random_transitive_action::<f64, _>(&g, &bundle, &mut rng).unwrap();
            let f = gen::random_section(&bundle, 1.0, &mut rng);
            let c = coboundary(&g, &action, &f);
            let report = solve_by_center(&g, &action, &c, 1e-9).unwrap();
            assert!(
                report.max_residual < 1e-7,
                "residual {}",
                report.max_residual
            );
            assert!(report.minimal);
        }
    }

    #[test]
    fn center_solver_rejects_defective_cocycles() {
        let g = FiniteGroupoid::pair(3);
        let bundle = HilbertBundle::constant(3, 2);
        let action = IsometricAction::<f64>::trivial(&g, &bundle).unwrap();
        let mut c = Cocycle::zero(&g, &bundle);
        c.perturb(crate::groupoid::ArrowId(1), 0, 1.0);
        assert!(matches!(
            solve_by_center(&g, &action, &c, 1e-9),
            Err(SolverError::CocycleDefect { .. })
        ));
    }

    #[test]
    fn least_squares_matches_center_up_to_gauge() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let g = FiniteGroupoid::transitive_with_cyclic_isotropy(4, 2);
        let bundle = HilbertBundle::constant(4, 2);
        let action = gen::random_transitive_action::<f64, _>(&g, &bundle, &mut rng).unwrap();
        let f = gen::random_section(&bundle, 1.0, &mut rng);
        let c = coboundary(&g, &action, &f);
        let lsq = solve_least_squares(&g, &bundle, &action, &c);
        assert!(lsq.max_residual < 1e-8, "residual {}", lsq.max_residual);
        // The coboundaries agree even when the sections differ by gauge.
        let center = solve_by_center(&g, &action, &c, 1e-9).unwrap();
        let c_lsq = coboundary(&g, &action, &lsq.section);
        let c_center = coboundary(&g, &action, &center.section);
        for a in g.arrows() {
            assert!((c_lsq.value(a.id) - c_center.value(a.id)).norm() < 1e-6);
        }
    }

    #[test]
    fn gauge_dimension_counts_invariant_sections() {
        // Trivial action of the pair groupoid: invariant sections are the
        // constant ones, a d-dimensional kernel.
        let g = FiniteGroupoid::pair(3);
        let bundle = HilbertBundle::constant(3, 2);
        let action = IsometricAction::<f64>::trivial(&g, &bundle).unwrap();
        let c = Cocycle::zero(&g, &bundle);
        let lsq = solve_least_squares(&g, &bundle, &action, &c);
        assert_eq!(lsq.gauge_dim, Some(2));
        assert!(lsq.max_residual < 1e-12);
    }

    #[test]
    fn transfer_solves_zero_sum_rationals_exactly() {
        let sys = TransformationSystem::cycle(6);
        let f: Vec<Rational64> = [3, -1, 4, -1, -5, 0]
            .iter()
            .map(|&n| Rational64::new(n, 7))
            .collect();
        let g = solve_transfer_function(&sys, &f, 0.0).unwrap();
        for x in 0..6 {
            assert_eq!(f[x], g[x] - g[sys.apply(x)]);
        }
        assert_eq!(g[0], Rational64::zero());
    }

    #[test]
    fn transfer_reports_the_obstruction() {
        let sys = TransformationSystem::cycle(4);
        let f: Vec<Rational64> = [1, 1, 1, 2]
            .iter()
            .map(|&n| Rational64::new(n, 1))
            .collect();
        match solve_transfer_function(&sys, &f, 0.0) {
            Err(TransferError::NotACoboundary { cycle_sum }) => {
                assert_eq!(cycle_sum, Rational64::new(5, 1));
            }
            other => panic!("expected obstruction, got {other:?}"),
        }
        let two_cycles = TransformationSystem::new(vec![1, 0, 3, 2]).unwrap();
        let f = vec![0.0, 0.0, 0.0, 0.0];
        assert_eq!(
            solve_transfer_function(&two_cycles, &f, 1e-9),
            Err(TransferError::NotCyclic)
        );
    }

    #[test]
    fn windowed_center_flattens_a_coboundary() {
        // Potential h - h(T .) for h = position parity; bounded case.
        let sys = TransformationSystem::cycle(6);
        let h: Vec<f64> = (0..6)
            .map(|x| if x % 2 == 0 { 1.0 } else { -0.5 })
            .collect();
        let f: Vec<f64> = (0..6).map(|x| h[x] - h[sys.apply(x)]).collect();
        let report = solve_by_center_windowed(&sys, &f, &[3, 6, 9, 12]);
        assert!(!report.residual_growing);
        let last = report.records.last().unwrap();
        assert!(last.max_residual < 1e-10, "residual {}", last.max_residual);
        // Radii stall at the spread of h.
        let spread = 0.5
            * (h.iter().copied().fold(f64::NEG_INFINITY, f64::max)
                - h.iter().copied().fold(f64::INFINITY, f64::min));
        assert!((last.max_radius - spread).abs() < 1e-10);
    }

    #[test]
    fn windowed_center_residual_grows_without_a_transfer() {
        let sys = TransformationSystem::cycle(5);
        let f = vec![1.0; 5];
        let report = solve_by_center_windowed(&sys, &f, &[5, 10, 20, 40]);
        assert!(report.residual_growing);
    }

    #[test]
    fn probe_classifies_constant_potential_as_linear() {
        let sys = TransformationSystem::cycle(5);
        let f = vec![1.0; 5];
        let probe = boundedness_probe(&sys, &f, 0, &[2, 4, 8, 16]);
        assert_eq!(probe.verdict, GrowthVerdict::LinearGrowth);
        assert!((probe.slope - 1.0).abs() < 0.05, "slope {}", probe.slope);
    }

    #[test]
    fn probe_classifies_zero_sum_as_bounded() {
        let sys = TransformationSystem::cycle(6);
        let f = vec![1.0, -2.0, 0.5, 1.5, -3.0, 2.0];
        assert_eq!(f.iter().sum::<f64>(), 0.0);
        let probe = boundedness_probe(&sys, &f, 2, &[6, 12, 24, 48]);
        assert_eq!(probe.verdict, GrowthVerdict::Bounded);
        assert!(probe.slope.abs() < 0.05);
    }

    #[test]
    fn probe_slope_tracks_the_mean() {
        for mean in [0.1, 0.3, 1.0] {
            let n = 10usize;
            let f: Vec<f64> = (0..n)
                .map(|x| mean + if x % 2 == 0 { 1e-3 } else { -1e-3 })
                .collect();
            let sys = TransformationSystem::cycle(n);
            let probe = boundedness_probe(&sys, &f, 0, &[10, 20, 40, 80]);
            assert_eq!(probe.verdict, GrowthVerdict::LinearGrowth);
            assert!(
                (probe.slope - mean).abs() <= 0.05 * mean,
                "slope {} for mean {}",
                probe.slope,
                mean
            );
        }
    }

    #[test]
    fn least_squares_windowed_matches_transfer() {
        let sys = TransformationSystem::cycle(5);
        let h = [0.3, -0.7, 0.2, 0.9, -0.4];
        let f: Vec<f64> = (0..5).map(|x| h[x] - h[sys.apply(x)]).collect();
        let g = build_transformation_groupoid(&sys, 5);
        let (sol, residual, gauge) = solve_least_squares_windowed(&g, &f);
        assert!(residual < 1e-9, "residual {residual}");
        assert_eq!(gauge, 1);
        // Solutions agree with h up to the gauge constant.
        let offset = sol[0] - h[0];
        for x in 0..5 {
            assert!((sol[x] - h[x] - offset).abs() < 1e-9);
        }
    }
}
