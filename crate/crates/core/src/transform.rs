//! Windowed transformation groupoids of a self-map on finitely many points.
//!
//! For a map `T` on points `0..n`, the arrows are triples `(x, k, y)` with
//! `T^m x = T^n y` and `k = m - n`; the arrow runs `y -> x` and composes by
//! `(x, k, y) . (y, l, z) = (x, k + l, z)`. A window bound `|k| <= K` keeps
//! the arrow set finite while exponents stay below a horizon `m_max`.
//!
//! The default horizon is `2 * n_points + window`. Every forward orbit of
//! `n` points is eventually periodic with preperiod plus period at most `n`,
//! so whenever witnesses `(m, n)` with `m - n = k` exist at all, a pair
//! exists with `max(m, n) <= 2 * n_points + |k|`: shifting both exponents
//! down by whole periods once both orbits are in their cycles preserves the
//! meeting point. Enlarging the horizon therefore never adds arrows, which
//! is covered by a test.

use std::collections::HashMap;

use thiserror::Error;

use crate::groupoid::Side;

/// How many witness exponent pairs each arrow records, smallest `m` first.
pub const WITNESS_CAP: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("map sends point {index} to {target}, outside 0..{n_points}")]
pub struct MapRangeError {
    pub index: usize,
    pub target: usize,
    pub n_points: usize,
}

/// A self-map of `{0, .., n-1}`, not necessarily invertible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransformationSystem {
    map: Vec<usize>,
}

impl TransformationSystem {
    pub fn new(map: Vec<usize>) -> Result<Self, MapRangeError> {
        let n_points = map.len();
        for (index, &target) in map.iter().enumerate() {
            if target >= n_points {
                return Err(MapRangeError {
                    index,
                    target,
                    n_points,
                });
            }
        }
        Ok(TransformationSystem { map })
    }

    /// The cyclic shift `x -> x + 1 mod n`.
    pub fn cycle(n: usize) -> Self {
        assert!(n > 0, "a cycle needs at least one point");
        TransformationSystem {
            map: (0..n).map(|x| (x + 1) % n).collect(),
        }
    }

    pub fn n_points(&self) -> usize {
        self.map.len()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    pub fn iterate(&self, mut x: usize, m: u32) -> usize {
        for _ in 0..m {
            x = self.map[x];
        }
        x
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.map.len()];
        for &y in &self.map {
            if seen[y] {
                return false;
            }
            seen[y] = true;
        }
        true
    }

    /// True when the map is one cycle through every point.
    pub fn is_single_cycle(&self) -> bool {
        let n = self.map.len();
        if n == 0 || !self.is_permutation() {
            return false;
        }
        let mut x = 0;
        for _ in 0..n - 1 {
            x = self.map[x];
            if x == 0 {
                return false;
            }
        }
        self.map[x] == 0
    }

    /// `table[x][m] = T^m x` for `m` in `0..=m_max`.
    pub fn orbit_table(&self, m_max: u32) -> Vec<Vec<usize>> {
        self.map
            .iter()
            .enumerate()
            .map(|(x, _)| {
                let mut row = Vec::with_capacity(m_max as usize + 1);
                let mut p = x;
                row.push(p);
                for _ in 0..m_max {
                    p = self.map[p];
                    row.push(p);
                }
                row
            })
            .collect()
    }
}

/// An arrow `(x, k, y)` of the windowed groupoid: it runs `y -> x`, carries
/// the exponent difference `k = m - n`, and records witness pairs `(m, n)`
/// with `T^m x = T^n y`, at most [`WITNESS_CAP`] of them, smallest first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WindowedArrow {
    pub range_point: usize,
    pub shift: i64,
    pub source_point: usize,
    pub witnesses: Vec<(u32, u32)>,
}

impl WindowedArrow {
    pub fn witness(&self) -> (u32, u32) {
        self.witnesses[0]
    }
}

/// The arrows `(x, k, y)` with `|k| <= window`, enumerated up to an exponent
/// horizon and sorted by `(range_point, shift, source_point)`.
#[derive(Clone, Debug)]
pub struct WindowedGroupoid {
    system: TransformationSystem,
    window: i64,
    m_max: u32,
    arrows: Vec<WindowedArrow>,
    by_source: Vec<Vec<usize>>,
    by_range: Vec<Vec<usize>>,
}

/// Builds the windowed transformation groupoid with the default horizon
/// `2 * n_points + window`, which is witness-complete (see the module docs).
pub fn build_transformation_groupoid(
    system: &TransformationSystem,
    window: i64,
) -> WindowedGroupoid {
    let m_max = 2 * system.n_points() as u32 + window.unsigned_abs() as u32;
    build_with_horizon(system, window, m_max)
}

/// Same as [`build_transformation_groupoid`] with an explicit horizon;
/// exponents range over `0..=m_max`.
pub fn build_with_horizon(
    system: &TransformationSystem,
    window: i64,
    m_max: u32,
) -> WindowedGroupoid {
    assert!(window >= 0, "window must be nonnegative");
    let n = system.n_points();
    let orbit = system.orbit_table(m_max);

    // reached[e][v] lists the y with T^e y = v, ascending.
    let mut reached: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); n]; m_max as usize + 1];
    for (y, row) in orbit.iter().enumerate() {
        for (e, &v) in row.iter().enumerate() {
            reached[e][v].push(y);
        }
    }

    let mut index: HashMap<(usize, i64, usize), usize> = HashMap::new();
    let mut arrows: Vec<WindowedArrow> = Vec::new();
    for m in 0..=m_max as i64 {
        for (x, row) in orbit.iter().enumerate() {
            let v = row[m as usize];
            let lo = (m - window).max(0);
            let hi = (m + window).min(m_max as i64);
            for e in lo..=hi {
                for &y in &reached[e as usize][v] {
                    let key = (x, m - e, y);
                    let slot = *index.entry(key).or_insert_with(|| {
                        arrows.push(WindowedArrow {
                            range_point: x,
                            shift: m - e,
                            source_point: y,
                            witnesses: Vec::new(),
                        });
                        arrows.len() - 1
                    });
                    if arrows[slot].witnesses.len() < WITNESS_CAP {
                        arrows[slot].witnesses.push((m as u32, e as u32));
                    }
                }
            }
        }
    }
    arrows.sort_by_key(|a| (a.range_point, a.shift, a.source_point));
    WindowedGroupoid::from_sorted(system.clone(), window, m_max, arrows)
}

impl WindowedGroupoid {
    fn from_sorted(
        system: TransformationSystem,
        window: i64,
        m_max: u32,
        arrows: Vec<WindowedArrow>,
    ) -> Self {
        let n = system.n_points();
        let mut by_source = vec![Vec::new(); n];
        let mut by_range = vec![Vec::new(); n];
        for (i, a) in arrows.iter().enumerate() {
            by_source[a.source_point].push(i);
            by_range[a.range_point].push(i);
        }
        WindowedGroupoid {
            system,
            window,
            m_max,
            arrows,
            by_source,
            by_range,
        }
    }

    pub fn system(&self) -> &TransformationSystem {
        &self.system
    }

    pub fn window(&self) -> i64 {
        self.window
    }

    pub fn horizon(&self) -> u32 {
        self.m_max
    }

    pub fn n_points(&self) -> usize {
        self.system.n_points()
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn arrows(&self) -> &[WindowedArrow] {
        &self.arrows
    }

    pub fn arrow(&self, i: usize) -> &WindowedArrow {
        &self.arrows[i]
    }

    /// Index of the arrow `(x, k, y)` if it is present.
    pub fn find(&self, range_point: usize, shift: i64, source_point: usize) -> Option<usize> {
        self.arrows
            .binary_search_by_key(&(range_point, shift, source_point), |a| {
                (a.range_point, a.shift, a.source_point)
            })
            .ok()
    }

    /// Arrow indices whose chosen endpoint is `point`, ascending.
    pub fn fiber(&self, point: usize, side: Side) -> &[usize] {
        match side {
            Side::Source => &self.by_source[point],
            Side::Range => &self.by_range[point],
        }
    }

    /// `(x, k, y) . (y, l, z) = (x, k + l, z)` when the endpoints meet and
    /// the combined shift stays inside the window.
    pub fn compose(&self, i: usize, j: usize) -> Option<usize> {
        let (a, b) = (&self.arrows[i], &self.arrows[j]);
        if a.source_point != b.range_point {
            return None;
        }
        let k = a.shift + b.shift;
        if k.abs() > self.window {
            return None;
        }
        let found = self.find(a.range_point, k, b.source_point);
        debug_assert!(found.is_some(), "composite of windowed arrows must exist");
        found
    }

    /// `(x, k, y)` inverts to `(y, -k, x)`, always present.
    pub fn inverse(&self, i: usize) -> usize {
        let a = &self.arrows[i];
        self.find(a.source_point, -a.shift, a.range_point)
            .expect("windowed arrow sets are closed under inversion")
    }

    /// The same groupoid restricted to `|shift| <= window`; the horizon and
    /// recorded witnesses carry over.
    pub fn sub_window(&self, window: i64) -> WindowedGroupoid {
        assert!(
            (0..=self.window).contains(&window),
            "sub-window must shrink the window"
        );
        let arrows: Vec<WindowedArrow> = self
            .arrows
            .iter()
            .filter(|a| a.shift.abs() <= window)
            .cloned()
            .collect();
        WindowedGroupoid::from_sorted(self.system.clone(), window, self.m_max, arrows)
    }

    /// Orbits of the point set under arrow connectivity, sorted blocks in
    /// order of smallest member.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let n = self.n_points();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for a in &self.arrows {
            let (rs, rr) = (
                find(&mut parent, a.source_point),
                find(&mut parent, a.range_point),
            );
            if rs != rr {
                parent[rs.max(rr)] = rs.min(rr);
            }
        }
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); n];
        for x in 0..n {
            let root = find(&mut parent, x);
            blocks[root].push(x);
        }
        blocks.retain(|b| !b.is_empty());
        blocks
    }

    pub fn is_minimal(&self) -> bool {
        self.orbits().len() == 1
    }
}

/// Prefix sums of a potential along forward orbits:
/// `value(x, m) = f(x) + f(Tx) + ... + f(T^(m-1) x)`.
pub struct PartialSums {
    table: Vec<Vec<f64>>,
}

impl PartialSums {
    pub fn new(system: &TransformationSystem, potential: &[f64], m_max: u32) -> Self {
        assert_eq!(
            potential.len(),
            system.n_points(),
            "one potential value per point"
        );
        let table = (0..system.n_points())
            .map(|x| {
                let mut row = Vec::with_capacity(m_max as usize + 2);
                let mut acc = 0.0;
                let mut p = x;
                row.push(0.0);
                for _ in 0..=m_max {
                    acc += potential[p];
                    p = system.apply(p);
                    row.push(acc);
                }
                row
            })
            .collect();
        PartialSums { table }
    }

    pub fn value(&self, x: usize, m: u32) -> f64 {
        self.table[x][m as usize]
    }
}

/// The Birkhoff cocycle of a scalar potential: for an arrow `(x, k, y)` with
/// witness `(m, n)`, the sum of `f` along `m` steps from `x` minus the sum
/// along `n` steps from `y`.
///
/// The value does not depend on the witness: the witness set of an arrow is
/// upward closed under adding one step to both exponents, and adding a step
/// changes both sums by the same amount, namely `f` at the common meeting
/// point. [`birkhoff_witness_spread`] exposes the residual disagreement over
/// recorded witnesses, which is floating-point noise only.
pub fn birkhoff_cocycle(groupoid: &WindowedGroupoid, potential: &[f64]) -> Vec<f64> {
    let sums = PartialSums::new(groupoid.system(), potential, groupoid.horizon());
    groupoid
        .arrows()
        .iter()
        .map(|a| {
            let (m, n) = a.witness();
            sums.value(a.range_point, m) - sums.value(a.source_point, n)
        })
        .collect()
}

/// Largest disagreement of the Birkhoff value across all recorded witnesses
/// of any arrow.
pub fn birkhoff_witness_spread(groupoid: &WindowedGroupoid, potential: &[f64]) -> f64 {
    let sums = PartialSums::new(groupoid.system(), potential, groupoid.horizon());
    let mut spread = 0.0f64;
    for a in groupoid.arrows() {
        let values = a
            .witnesses
            .iter()
            .map(|&(m, n)| sums.value(a.range_point, m) - sums.value(a.source_point, n));
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        spread = spread.max(hi - lo);
    }
    spread
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_cycle_window_counts() {
        let sys = TransformationSystem::cycle(3);
        let g = build_transformation_groupoid(&sys, 6);
        // Arrows (x, k, y) exist exactly when k = y - x mod 3; residue 0
        // admits shifts {-6,-3,0,3,6}, the others four shifts each.
        assert_eq!(g.n_arrows(), 3 * 5 + 6 * 4);
        for a in g.arrows() {
            let k = a.shift.rem_euclid(3) as usize;
            assert_eq!((a.range_point + k) % 3, a.source_point % 3);
        }
    }

    #[test]
    fn injective_map_pins_shifts() {
        // For an invertible T, T^m x = T^n y forces the shift to match the
        // cycle offset; in particular k = 0 only pairs a point with itself.
        let sys = TransformationSystem::cycle(5);
        let g = build_transformation_groupoid(&sys, 0);
        assert_eq!(g.n_arrows(), 5);
        for a in g.arrows() {
            assert_eq!(a.range_point, a.source_point);
        }
    }

    #[test]
    fn collapsing_map_merges_points() {
        // T sends everything to 2, so any two points meet after one step.
        let sys = TransformationSystem::new(vec![2, 2, 2]).unwrap();
        let g = build_transformation_groupoid(&sys, 0);
        assert_eq!(g.n_arrows(), 9);
        assert!(g.is_minimal());
        assert!(!sys.is_permutation());
    }

    #[test]
    fn window_monotone_and_horizon_complete() {
        let sys = TransformationSystem::new(vec![1, 2, 0, 4, 3, 3]).unwrap();
        let key = |g: &WindowedGroupoid| {
            g.arrows()
                .iter()
                .map(|a| (a.range_point, a.shift, a.source_point))
                .collect::<Vec<_>>()
        };
        for window in 0..4 {
            let g = build_transformation_groupoid(&sys, window);
            let bigger = build_transformation_groupoid(&sys, window + 1);
            let ours = key(&g);
            let theirs = key(&bigger);
            for t in &ours {
                assert!(theirs.binary_search(t).is_ok(), "windows must nest");
            }
            // A larger horizon finds no new arrows.
            let wide = build_with_horizon(&sys, window, g.horizon() + 7);
            assert_eq!(ours, key(&wide));
            // Restriction of the wide window agrees with a direct build.
            assert_eq!(key(&bigger.sub_window(window)), ours);
        }
    }

    #[test]
    fn composition_and_inverse_close_up() {
        let sys = TransformationSystem::cycle(4);
        let g = build_transformation_groupoid(&sys, 3);
        for i in 0..g.n_arrows() {
            let inv = g.inverse(i);
            assert_eq!(g.arrow(inv).shift, -g.arrow(i).shift);
            assert_eq!(g.inverse(inv), i);
            for j in 0..g.n_arrows() {
                let a = g.arrow(i);
                let b = g.arrow(j);
                match g.compose(i, j) {
                    Some(c) => {
                        let c = g.arrow(c);
                        assert_eq!(c.shift, a.shift + b.shift);
                        assert_eq!(c.range_point, a.range_point);
                        assert_eq!(c.source_point, b.source_point);
                    }
                    None => {
                        assert!(
                            a.source_point != b.range_point
                                || (a.shift + b.shift).abs() > g.window()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn birkhoff_values_are_witness_independent() {
        let sys = TransformationSystem::new(vec![1, 2, 0, 0, 2]).unwrap();
        let g = build_transformation_groupoid(&sys, 4);
        let potential = vec![0.7, -1.3, 0.25, 2.0, -0.5];
        assert!(birkhoff_witness_spread(&g, &potential) < 1e-12);
    }

    #[test]
    fn birkhoff_on_a_cycle_telescopes() {
        // For the shift on Z/4 and an arrow (x, k, y) with k = y - x mod 4,
        // the value is the sum of f over the k consecutive points from x.
        let sys = TransformationSystem::cycle(4);
        let g = build_transformation_groupoid(&sys, 2);
        let f = [1.0, 2.0, 4.0, 8.0];
        let c = birkhoff_cocycle(&g, &f);
        let idx = g.find(0, 2, 2).unwrap();
        assert_eq!(c[idx], f[0] + f[1]);
        let idx = g.find(3, 1, 0).unwrap();
        assert_eq!(c[idx], f[3]);
        for (i, a) in g.arrows().iter().enumerate() {
            let inv = g.inverse(i);
            assert!((c[inv] + c[i]).abs() < 1e-12);
            assert!(a.shift != 0 || c[i] == 0.0);
        }
    }

    #[test]
    fn single_cycle_detection() {
        assert!(TransformationSystem::cycle(6).is_single_cycle());
        assert!(!TransformationSystem::new(vec![1, 0, 3, 2])
            .unwrap()
            .is_single_cycle());
        assert!(!TransformationSystem::new(vec![0, 2, 1])
            .unwrap()
            .is_single_cycle());
        assert!(TransformationSystem::new(vec![0])
            .unwrap()
            .is_single_cycle());
    }

    #[test]
    fn map_range_is_checked() {
        assert_eq!(
            TransformationSystem::new(vec![0, 3]).err(),
            Some(MapRangeError {
                index: 1,
                target: 3,
                n_points: 2
            })
        );
    }
}
