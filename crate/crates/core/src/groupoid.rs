//! Finite groupoids as explicit arrow tables.
//!
//! A groupoid here is a finite set of units, a finite set of arrows with
//! source and range units, a unit arrow per unit, an inverse per arrow, and a
//! partial composition. `compose(a, b)` is function-style: it is defined
//! exactly when `source(a) == range(b)`, and the composite runs
//! `source(b) -> range(a)`.
//!
//! Construction only checks shape (ids in range, table sizes). The groupoid
//! axioms themselves are checked by [`FiniteGroupoid::validate`], which
//! reports violations as data rather than failing fast, so that deliberately
//! broken tables can be inspected.

use thiserror::Error;

use crate::par;

/// Index of a unit (object) of the groupoid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnitId(pub usize);

/// Index of an arrow (morphism) of the groupoid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArrowId(pub usize);

impl std::fmt::Display for UnitId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for ArrowId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// An arrow with its endpoints. The arrow runs `source -> range`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub id: ArrowId,
    pub source: UnitId,
    pub range: UnitId,
}

/// Which endpoint map a fiber or a neutrality check refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Source,
    Range,
}

/// Shape errors raised while building a groupoid from raw tables.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum StructureError {
    #[error("unit id {unit} out of range (have {n_units} units)")]
    UnitOutOfRange { unit: usize, n_units: usize },
    #[error("arrow id {arrow} out of range (have {n_arrows} arrows)")]
    ArrowOutOfRange { arrow: usize, n_arrows: usize },
    #[error("expected one unit arrow per unit ({expected}), got {got}")]
    UnitArrowCount { expected: usize, got: usize },
    #[error("expected one inverse per arrow ({expected}), got {got}")]
    InverseCount { expected: usize, got: usize },
    #[error("composition of {left} and {right} listed twice with different results")]
    DuplicateComposition { left: usize, right: usize },
}

/// A single groupoid-axiom violation found by [`FiniteGroupoid::validate`].
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
pub enum AxiomViolation {
    #[error("unit arrow {arrow} of unit {unit} does not start and end at {unit}")]
    UnitArrowEndpoints { unit: UnitId, arrow: ArrowId },
    #[error("inverse of arrow {arrow} does not swap its endpoints")]
    InverseEndpoints { arrow: ArrowId },
    #[error("inverse of the inverse of arrow {arrow} is not {arrow}")]
    InverseInvolution { arrow: ArrowId },
    #[error("arrows {left} and {right} are composable but their composite is missing")]
    MissingComposition { left: ArrowId, right: ArrowId },
    #[error("arrows {left} and {right} are not composable but a composite is listed")]
    SpuriousComposition { left: ArrowId, right: ArrowId },
    #[error("composite {composite} of {left} and {right} has wrong endpoints")]
    CompositeEndpoints {
        left: ArrowId,
        right: ArrowId,
        composite: ArrowId,
    },
    #[error("composition of {a}, {b}, {c} is not associative")]
    NotAssociative { a: ArrowId, b: ArrowId, c: ArrowId },
    #[error("arrow {arrow} composed with its inverse misses the unit arrow on its {side:?} side")]
    InverseNotNeutral { arrow: ArrowId, side: Side },
    #[error("the unit arrow on the {side:?} side of arrow {arrow} is not neutral")]
    UnitNotNeutral { arrow: ArrowId, side: Side },
}

/// How many violations a report stores verbatim. `total` keeps counting past
/// the cap so badly broken tables stay cheap to diagnose.
pub const VIOLATION_CAP: usize = 64;

/// Outcome of a full axiom scan.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<AxiomViolation>,
    pub total: usize,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.total == 0
    }

    pub fn truncated(&self) -> bool {
        self.total > self.violations.len()
    }

    fn merge(reports: impl IntoIterator<Item = ValidationReport>) -> ValidationReport {
        let mut out = ValidationReport::default();
        for r in reports {
            out.total += r.total;
            for v in r.violations {
                if out.violations.len() < VIOLATION_CAP {
                    out.violations.push(v);
                }
            }
        }
        out
    }

    fn push(&mut self, v: AxiomViolation) {
        self.total += 1;
        if self.violations.len() < VIOLATION_CAP {
            self.violations.push(v);
        }
    }
}

const NONE: u32 = u32::MAX;

/// A finite groupoid with a dense composition table.
///
/// Lookup of `compose(a, b)` is O(1); the table costs `n_arrows^2` entries of
/// 4 bytes, which is fine at the intended scale (thousands of arrows).
#[derive(Clone, Debug)]
pub struct FiniteGroupoid {
    n_units: usize,
    arrows: Vec<Arrow>,
    unit_arrows: Vec<ArrowId>,
    inverses: Vec<ArrowId>,
    table: Vec<u32>,
    by_source: Vec<Vec<ArrowId>>,
    by_range: Vec<Vec<ArrowId>>,
}

impl FiniteGroupoid {
    /// Builds a groupoid from raw tables.
    ///
    /// `arrows[i] = (source, range)`, `unit_arrows[x]` is the unit arrow at
    /// unit `x`, `inverses[i]` the inverse of arrow `i`, and each composition
    /// entry `(left, right, result)` declares `left . right = result`.
    /// Only shape is checked here; run [`validate`](Self::validate) for the
    /// axioms.
    pub fn from_parts(
        n_units: usize,
        arrows: Vec<(usize, usize)>,
        unit_arrows: Vec<usize>,
        inverses: Vec<usize>,
        compositions: &[(usize, usize, usize)],
    ) -> Result<Self, StructureError> {
        let n_arrows = arrows.len();
        if n_arrows >= NONE as usize {
            return Err(StructureError::ArrowOutOfRange {
                arrow: n_arrows,
                n_arrows: NONE as usize,
            });
        }
        let check_unit = |unit: usize| {
            if unit < n_units {
                Ok(())
            } else {
                Err(StructureError::UnitOutOfRange { unit, n_units })
            }
        };
        let check_arrow = |arrow: usize| {
            if arrow < n_arrows {
                Ok(())
            } else {
                Err(StructureError::ArrowOutOfRange { arrow, n_arrows })
            }
        };

        let arrows: Vec<Arrow> = arrows
            .into_iter()
            .enumerate()
            .map(|(id, (source, range))| {
                check_unit(source)?;
                check_unit(range)?;
                Ok(Arrow {
                    id: ArrowId(id),
                    source: UnitId(source),
                    range: UnitId(range),
                })
            })
            .collect::<Result<_, StructureError>>()?;

        if unit_arrows.len() != n_units {
            return Err(StructureError::UnitArrowCount {
                expected: n_units,
                got: unit_arrows.len(),
            });
        }
        if inverses.len() != n_arrows {
            return Err(StructureError::InverseCount {
                expected: n_arrows,
                got: inverses.len(),
            });
        }
        let unit_arrows: Vec<ArrowId> = unit_arrows
            .into_iter()
            .map(|a| check_arrow(a).map(|_| ArrowId(a)))
            .collect::<Result<_, _>>()?;
        let inverses: Vec<ArrowId> = inverses
            .into_iter()
            .map(|a| check_arrow(a).map(|_| ArrowId(a)))
            .collect::<Result<_, _>>()?;

        let mut table = vec![NONE; n_arrows * n_arrows];
        for &(left, right, result) in compositions {
            check_arrow(left)?;
            check_arrow(right)?;
            check_arrow(result)?;
            let slot = &mut table[left * n_arrows + right];
            if *slot != NONE && *slot != result as u32 {
                return Err(StructureError::DuplicateComposition { left, right });
            }
            *slot = result as u32;
        }

        let mut by_source = vec![Vec::new(); n_units];
        let mut by_range = vec![Vec::new(); n_units];
        for a in &arrows {
            by_source[a.source.0].push(a.id);
            by_range[a.range.0].push(a.id);
        }

        Ok(FiniteGroupoid {
            n_units,
            arrows,
            unit_arrows,
            inverses,
            table,
            by_source,
            by_range,
        })
    }

    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn n_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn units(&self) -> impl Iterator<Item = UnitId> {
        (0..self.n_units).map(UnitId)
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow(&self, a: ArrowId) -> Arrow {
        self.arrows[a.0]
    }

    pub fn source(&self, a: ArrowId) -> UnitId {
        self.arrows[a.0].source
    }

    pub fn range(&self, a: ArrowId) -> UnitId {
        self.arrows[a.0].range
    }

    pub fn unit_arrow(&self, x: UnitId) -> ArrowId {
        self.unit_arrows[x.0]
    }

    pub fn inverse(&self, a: ArrowId) -> ArrowId {
        self.inverses[a.0]
    }

    /// The composite `a . b`, defined when `source(a) == range(b)`.
    pub fn compose(&self, a: ArrowId, b: ArrowId) -> Option<ArrowId> {
        let raw = self.table[a.0 * self.arrows.len() + b.0];
        (raw != NONE).then_some(ArrowId(raw as usize))
    }

    /// Arrows whose chosen endpoint is `x`, in ascending id order.
    pub fn fiber(&self, x: UnitId, side: Side) -> &[ArrowId] {
        match side {
            Side::Source => &self.by_source[x.0],
            Side::Range => &self.by_range[x.0],
        }
    }

    /// All arrows running `from -> to`, in ascending id order.
    pub fn arrows_from_to(&self, from: UnitId, to: UnitId) -> Vec<ArrowId> {
        self.by_source[from.0]
            .iter()
            .copied()
            .filter(|&a| self.range(a) == to)
            .collect()
    }

    /// Checks every groupoid axiom and reports all violations found, capped
    /// at [`VIOLATION_CAP`] stored entries.
    pub fn validate(&self) -> ValidationReport {
        let mut head = ValidationReport::default();
        for x in self.units() {
            let ua = self.unit_arrow(x);
            let arr = self.arrow(ua);
            if arr.source != x || arr.range != x {
                head.push(AxiomViolation::UnitArrowEndpoints { unit: x, arrow: ua });
            }
        }

        // Per-arrow scans are independent; the merge keeps ascending arrow
        // order, so the report is identical with and without `parallel`.
        let n = self.n_arrows();
        let per_arrow = par::map_indexed(n, |i| self.scan_arrow(ArrowId(i)));
        ValidationReport::merge(std::iter::once(head).chain(per_arrow))
    }

    fn scan_arrow(&self, a: ArrowId) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let arrow = self.arrow(a);
        let inv = self.inverse(a);
        let inv_arrow = self.arrow(inv);

        if inv_arrow.source != arrow.range || inv_arrow.range != arrow.source {
            rep.push(AxiomViolation::InverseEndpoints { arrow: a });
        }
        if self.inverse(inv) != a {
            rep.push(AxiomViolation::InverseInvolution { arrow: a });
        }

        for b in self.arrows() {
            let composable = arrow.source == b.range;
            match (self.compose(a, b.id), composable) {
                (None, true) => rep.push(AxiomViolation::MissingComposition {
                    left: a,
                    right: b.id,
                }),
                (Some(_), false) => rep.push(AxiomViolation::SpuriousComposition {
                    left: a,
                    right: b.id,
                }),
                (Some(c), true) => {
                    let comp = self.arrow(c);
                    if comp.range != arrow.range || comp.source != b.source {
                        rep.push(AxiomViolation::CompositeEndpoints {
                            left: a,
                            right: b.id,
                            composite: c,
                        });
                    }
                }
                (None, false) => {}
            }
        }

        // Associativity over triples rooted at `a`. Missing composites are
        // already reported above, so undefined lookups are skipped here.
        for &b in self.fiber(arrow.source, Side::Range) {
            let ab = self.compose(a, b);
            for &c in self.fiber(self.source(b), Side::Range) {
                let bc = self.compose(b, c);
                if let (Some(ab), Some(bc)) = (ab, bc) {
                    if let (Some(left), Some(right)) = (self.compose(ab, c), self.compose(a, bc)) {
                        if left != right {
                            rep.push(AxiomViolation::NotAssociative { a, b, c });
                        }
                    }
                }
            }
        }

        let unit_r = self.unit_arrow(arrow.range);
        let unit_s = self.unit_arrow(arrow.source);
        if self.compose(a, inv) != Some(unit_r) {
            rep.push(AxiomViolation::InverseNotNeutral {
                arrow: a,
                side: Side::Range,
            });
        }
        if self.compose(inv, a) != Some(unit_s) {
            rep.push(AxiomViolation::InverseNotNeutral {
                arrow: a,
                side: Side::Source,
            });
        }
        if self.compose(unit_r, a) != Some(a) {
            rep.push(AxiomViolation::UnitNotNeutral {
                arrow: a,
                side: Side::Range,
            });
        }
        if self.compose(a, unit_s) != Some(a) {
            rep.push(AxiomViolation::UnitNotNeutral {
                arrow: a,
                side: Side::Source,
            });
        }
        rep
    }

    /// Orbits of the unit space under reachability by arrows, each sorted,
    /// listed by smallest member.
    pub fn orbits(&self) -> Vec<Vec<UnitId>> {
        let mut parent: Vec<usize> = (0..self.n_units).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for a in &self.arrows {
            let (rs, rr) = (find(&mut parent, a.source.0), find(&mut parent, a.range.0));
            if rs != rr {
                let (lo, hi) = (rs.min(rr), rs.max(rr));
                parent[hi] = lo;
            }
        }
        let mut blocks: Vec<Vec<UnitId>> = vec![Vec::new(); self.n_units];
        for x in 0..self.n_units {
            let root = find(&mut parent, x);
            blocks[root].push(UnitId(x));
        }
        blocks.retain(|b| !b.is_empty());
        blocks
    }

    /// True when every unit is reachable from every other, i.e. the unit
    /// space carries a single orbit. For a finite discrete unit space this is
    /// exactly minimality of the groupoid action on itself.
    pub fn is_minimal(&self) -> bool {
        self.orbits().len() == 1
    }

    /// One arrow per non-root unit, forming a breadth-first forest rooted at
    /// the smallest unit of each orbit. Each returned arrow runs
    /// `parent -> child`, taking inverses where the stored arrow points the
    /// other way. Together with one generator of each root's isotropy group,
    /// these generate the groupoid.
    pub fn spanning_forest(&self) -> Vec<ArrowId> {
        let mut seen = vec![false; self.n_units];
        let mut tree = Vec::new();
        for root in 0..self.n_units {
            if seen[root] {
                continue;
            }
            seen[root] = true;
            let mut queue = std::collections::VecDeque::from([UnitId(root)]);
            while let Some(p) = queue.pop_front() {
                // Outgoing arrows p -> q and incoming q -> p both connect q.
                for &a in self.fiber(p, Side::Source) {
                    let q = self.range(a);
                    if !seen[q.0] {
                        seen[q.0] = true;
                        tree.push(a);
                        queue.push_back(q);
                    }
                }
                for &a in self.fiber(p, Side::Range) {
                    let q = self.source(a);
                    if !seen[q.0] {
                        seen[q.0] = true;
                        tree.push(self.inverse(a));
                        queue.push_back(q);
                    }
                }
            }
        }
        tree
    }

    /// The isotropy group at `x`: all self-arrows `x -> x`, in id order.
    pub fn isotropy(&self, x: UnitId) -> Vec<ArrowId> {
        self.arrows_from_to(x, x)
    }

    /// Order of a self-arrow under composition, `None` if `a` is not a
    /// self-arrow or its powers never return to the unit arrow.
    pub fn arrow_order(&self, a: ArrowId) -> Option<usize> {
        if self.source(a) != self.range(a) {
            return None;
        }
        let unit = self.unit_arrow(self.source(a));
        let mut power = a;
        for m in 1..=self.n_arrows() + 1 {
            if power == unit {
                return Some(m);
            }
            power = self.compose(power, a)?;
        }
        None
    }

    /// The pair groupoid on `n` units: one arrow `s -> r` per ordered pair.
    pub fn pair(n: usize) -> FiniteGroupoid {
        FiniteGroupoid::transitive_with_cyclic_isotropy(n, 1)
    }

    /// The cyclic group of order `k` viewed as a groupoid with one unit.
    pub fn cyclic_group(k: usize) -> FiniteGroupoid {
        FiniteGroupoid::transitive_with_cyclic_isotropy(1, k)
    }

    /// Only unit arrows: `n` isolated units.
    pub fn units_only(n: usize) -> FiniteGroupoid {
        let arrows = (0..n).map(|x| (x, x)).collect();
        let unit_arrows: Vec<usize> = (0..n).collect();
        let inverses = unit_arrows.clone();
        let comps: Vec<(usize, usize, usize)> = (0..n).map(|x| (x, x, x)).collect();
        FiniteGroupoid::from_parts(n, arrows, unit_arrows, inverses, &comps)
            .expect("units-only tables are well formed")
    }

    /// The transitive groupoid on `n` units whose isotropy at every unit is
    /// cyclic of order `k`: arrows are triples `(r, s, h)` running `s -> r`
    /// with `h` in `Z/k`, composed by `(r, s, h) . (s, t, h') = (r, t, h+h')`.
    /// Arrow ids follow `(r * n + s) * k + h`.
    pub fn transitive_with_cyclic_isotropy(n: usize, k: usize) -> FiniteGroupoid {
        assert!(n > 0 && k > 0, "need at least one unit and isotropy order");
        let id = |r: usize, s: usize, h: usize| (r * n + s) * k + h;
        let mut arrows = Vec::with_capacity(n * n * k);
        for r in 0..n {
            for s in 0..n {
                for h in 0..k {
                    debug_assert_eq!(arrows.len(), id(r, s, h));
                    arrows.push((s, r));
                }
            }
        }
        let unit_arrows: Vec<usize> = (0..n).map(|x| id(x, x, 0)).collect();
        let mut inverses = vec![0; arrows.len()];
        for r in 0..n {
            for s in 0..n {
                for h in 0..k {
                    inverses[id(r, s, h)] = id(s, r, (k - h) % k);
                }
            }
        }
        let mut comps = Vec::with_capacity(n * n * n * k * k);
        for r in 0..n {
            for s in 0..n {
                for t in 0..n {
                    for h1 in 0..k {
                        for h2 in 0..k {
                            comps.push((id(r, s, h1), id(s, t, h2), id(r, t, (h1 + h2) % k)));
                        }
                    }
                }
            }
        }
        FiniteGroupoid::from_parts(n, arrows, unit_arrows, inverses, &comps)
            .expect("product tables are well formed")
    }

    /// Disjoint union, re-indexing units and arrows of `other` after `self`.
    pub fn disjoint_union(&self, other: &FiniteGroupoid) -> FiniteGroupoid {
        let (nu, na) = (self.n_units, self.n_arrows());
        let mut arrows: Vec<(usize, usize)> = self
            .arrows
            .iter()
            .map(|a| (a.source.0, a.range.0))
            .collect();
        arrows.extend(
            other
                .arrows
                .iter()
                .map(|a| (a.source.0 + nu, a.range.0 + nu)),
        );
        let mut unit_arrows: Vec<usize> = self.unit_arrows.iter().map(|a| a.0).collect();
        unit_arrows.extend(other.unit_arrows.iter().map(|a| a.0 + na));
        let mut inverses: Vec<usize> = self.inverses.iter().map(|a| a.0).collect();
        inverses.extend(other.inverses.iter().map(|a| a.0 + na));
        let mut comps = Vec::new();
        for a in 0..self.n_arrows() {
            for b in 0..self.n_arrows() {
                if let Some(c) = self.compose(ArrowId(a), ArrowId(b)) {
                    comps.push((a, b, c.0));
                }
            }
        }
        for a in 0..other.n_arrows() {
            for b in 0..other.n_arrows() {
                if let Some(c) = other.compose(ArrowId(a), ArrowId(b)) {
                    comps.push((a + na, b + na, c.0 + na));
                }
            }
        }
        FiniteGroupoid::from_parts(nu + other.n_units, arrows, unit_arrows, inverses, &comps)
            .expect("union of well-formed tables is well formed")
    }

    /// Raw composition triples `(left, right, result)`, in left-major order.
    /// This is the inverse of the `compositions` argument of
    /// [`from_parts`](Self::from_parts).
    pub fn composition_triples(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.n_arrows() {
            for b in 0..self.n_arrows() {
                if let Some(c) = self.compose(ArrowId(a), ArrowId(b)) {
                    out.push((a, b, c.0));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_groupoid_is_valid_and_minimal() {
        let g = FiniteGroupoid::pair(4);
        assert_eq!(g.n_units(), 4);
        assert_eq!(g.n_arrows(), 16);
        assert!(g.validate().is_valid());
        assert!(g.is_minimal());
        assert_eq!(g.orbits(), vec![(0..4).map(UnitId).collect::<Vec<_>>()]);
    }

    #[test]
    fn cyclic_group_composition_adds_exponents() {
        let g = FiniteGroupoid::cyclic_group(5);
        assert!(g.validate().is_valid());
        // Arrow h composed with arrow h' is h + h' mod 5.
        assert_eq!(g.compose(ArrowId(2), ArrowId(4)), Some(ArrowId(1)));
        assert_eq!(g.inverse(ArrowId(3)), ArrowId(2));
        assert_eq!(g.arrow_order(ArrowId(1)), Some(5));
        assert_eq!(g.arrow_order(ArrowId(0)), Some(1));
    }

    #[test]
    fn transitive_with_isotropy_is_valid() {
        let g = FiniteGroupoid::transitive_with_cyclic_isotropy(3, 4);
        assert_eq!(g.n_arrows(), 3 * 3 * 4);
        assert!(g.validate().is_valid());
        assert!(g.is_minimal());
        assert_eq!(g.isotropy(UnitId(1)).len(), 4);
        // Isotropy generator (1,1,1) has order 4.
        let id = |r: usize, s: usize, h: usize| ArrowId((r * 3 + s) * 4 + h);
        assert_eq!(g.arrow_order(id(1, 1, 1)), Some(4));
        // (r,s,h) . (s,t,h') = (r,t,h+h').
        assert_eq!(g.compose(id(0, 2, 3), id(2, 1, 2)), Some(id(0, 1, 1)));
        assert_eq!(g.compose(id(0, 2, 3), id(1, 2, 0)), None);
    }

    #[test]
    fn fibers_match_endpoints() {
        let g = FiniteGroupoid::pair(3);
        for x in g.units() {
            for &a in g.fiber(x, Side::Source) {
                assert_eq!(g.source(a), x);
            }
            for &a in g.fiber(x, Side::Range) {
                assert_eq!(g.range(a), x);
            }
            assert_eq!(g.fiber(x, Side::Source).len(), 3);
        }
    }

    #[test]
    fn broken_inverse_is_reported() {
        let g = FiniteGroupoid::pair(2);
        let mut inverses: Vec<usize> = (0..4).map(|a| g.inverse(ArrowId(a)).0).collect();
        // Declare arrow 1 (0 -> 1) to be its own inverse: endpoints no longer swap.
        let orig = inverses[1];
        inverses[1] = 1;
        let arrows = g.arrows().iter().map(|a| (a.source.0, a.range.0)).collect();
        let units = (0..2).map(|x| g.unit_arrow(UnitId(x)).0).collect();
        let broken =
            FiniteGroupoid::from_parts(2, arrows, units, inverses, &g.composition_triples())
                .unwrap();
        let report = broken.validate();
        assert!(!report.is_valid());
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, AxiomViolation::InverseEndpoints { arrow } if arrow.0 == 1)));
        // The untouched partner arrow now fails the involution check.
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, AxiomViolation::InverseInvolution { arrow } if arrow.0 == orig)));
    }

    #[test]
    fn missing_composition_is_reported() {
        let g = FiniteGroupoid::pair(2);
        let arrows = g.arrows().iter().map(|a| (a.source.0, a.range.0)).collect();
        let units: Vec<usize> = (0..2).map(|x| g.unit_arrow(UnitId(x)).0).collect();
        let inverses = (0..4).map(|a| g.inverse(ArrowId(a)).0).collect();
        let mut comps = g.composition_triples();
        let dropped = comps.pop().unwrap();
        let broken = FiniteGroupoid::from_parts(2, arrows, units, inverses, &comps).unwrap();
        let report = broken.validate();
        assert!(report.violations.iter().any(|v| matches!(
            v,
            AxiomViolation::MissingComposition { left, right }
                if left.0 == dropped.0 && right.0 == dropped.1
        )));
    }

    #[test]
    fn duplicate_composition_is_a_structure_error() {
        let err =
            FiniteGroupoid::from_parts(1, vec![(0, 0)], vec![0], vec![0], &[(0, 0, 0), (0, 0, 0)]);
        assert!(err.is_ok(), "identical repeats are tolerated");
        let g = FiniteGroupoid::cyclic_group(2);
        let mut comps = g.composition_triples();
        comps.push((0, 0, 1));
        let err = FiniteGroupoid::from_parts(
            1,
            g.arrows().iter().map(|a| (a.source.0, a.range.0)).collect(),
            vec![0],
            (0..2).map(|a| g.inverse(ArrowId(a)).0).collect(),
            &comps,
        );
        assert_eq!(
            err.err(),
            Some(StructureError::DuplicateComposition { left: 0, right: 0 })
        );
    }

    #[test]
    fn disjoint_union_has_two_orbits() {
        let g = FiniteGroupoid::pair(2).disjoint_union(&FiniteGroupoid::cyclic_group(3));
        assert!(g.validate().is_valid());
        assert!(!g.is_minimal());
        assert_eq!(g.orbits().len(), 2);
        assert_eq!(g.n_units(), 3);
        assert_eq!(g.n_arrows(), 4 + 3);
        // Cross-component compositions stay undefined.
        assert_eq!(g.compose(ArrowId(0), ArrowId(5)), None);
    }

    #[test]
    fn spanning_forest_reaches_every_unit() {
        let g = FiniteGroupoid::transitive_with_cyclic_isotropy(5, 2)
            .disjoint_union(&FiniteGroupoid::pair(3));
        let forest = g.spanning_forest();
        assert_eq!(forest.len(), g.n_units() - g.orbits().len());
        let mut reached: Vec<UnitId> = forest.iter().map(|&a| g.range(a)).collect();
        reached.extend([UnitId(0), UnitId(5)]);
        reached.sort();
        assert_eq!(reached, g.units().collect::<Vec<_>>());
    }

    #[test]
    fn validation_report_caps_but_counts() {
        // All-wrong table: lone unit whose arrow is not listed as a unit
        // arrow anywhere it should be. Build a 2-arrow groupoid with every
        // composition pointing at the wrong arrow.
        let g = FiniteGroupoid::from_parts(
            1,
            vec![(0, 0), (0, 0)],
            vec![0],
            vec![1, 1],
            &[(0, 0, 1), (0, 1, 1), (1, 0, 1), (1, 1, 1)],
        )
        .unwrap();
        let report = g.validate();
        assert!(!report.is_valid());
        assert!(report.total >= report.violations.len());
    }
}
