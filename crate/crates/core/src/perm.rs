//! Partial injections of ℤ, grown one assignment at a time.
//!
//! The generator `alpha` only ever exists as a finite set of stored edges
//! `x → y` plus a set of *pinned* points promised to stay fixed forever. Any
//! such partial map extends canonically to a genuine permutation: each finite
//! chain closes into a cycle (the tail wraps around to the head) and
//! everything untouched is fixed. [`Space::eval_closed`] evaluates that
//! closure; the strict variants refuse to invent anything and only follow
//! stored edges or pins, which is what certification uses. `beta` needs no
//! state at all — it is the successor map.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::words::{Gen, Sign, Word};

/// A point of the integer line.
pub type Point = i64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("point {0} already has an outgoing assignment")]
    DomainConflict(Point),
    #[error("point {0} already has an incoming assignment")]
    ImageConflict(Point),
    #[error("pinned-point conflict at {0}")]
    PinnedConflict(Point),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("no stored edge or pin resolves point {at} at letter {step}")]
    Unresolved { at: Point, step: usize },
}

/// Finitely many edges of an injection, with the inverse map mirrored for
/// O(log n) lookups in both directions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PartialInjection {
    fwd: BTreeMap<Point, Point>,
    bwd: BTreeMap<Point, Point>,
}

impl PartialInjection {
    pub fn new() -> PartialInjection {
        PartialInjection::default()
    }

    pub fn len(&self) -> usize {
        self.fwd.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fwd.is_empty()
    }

    pub fn contains_domain(&self, x: Point) -> bool {
        self.fwd.contains_key(&x)
    }

    pub fn contains_image(&self, y: Point) -> bool {
        self.bwd.contains_key(&y)
    }

    pub fn image_of(&self, x: Point) -> Option<Point> {
        self.fwd.get(&x).copied()
    }

    pub fn preimage_of(&self, y: Point) -> Option<Point> {
        self.bwd.get(&y).copied()
    }

    /// Adds the edge `x → y`, refusing to overwrite either endpoint.
    pub fn assign(&mut self, x: Point, y: Point) -> Result<(), PermError> {
        if self.fwd.contains_key(&x) {
            return Err(PermError::DomainConflict(x));
        }
        if self.bwd.contains_key(&y) {
            return Err(PermError::ImageConflict(y));
        }
        self.fwd.insert(x, y);
        self.bwd.insert(y, x);
        Ok(())
    }

    /// Stored edges in increasing domain order.
    pub fn iter(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.fwd.iter().map(|(&x, &y)| (x, y))
    }

    /// Evaluates the canonical closure: stored edges verbatim, the end of a
    /// chain wraps back to its start, everything else is fixed.
    pub fn eval_closed(&self, x: Point) -> Point {
        if let Some(y) = self.fwd.get(&x) {
            return *y;
        }
        if self.bwd.contains_key(&x) {
            // x ends a chain; its image under the closure is the chain head.
            // Back-walks never meet a stored cycle (cycle points stay on
            // their cycle), so this terminates.
            let mut head = x;
            while let Some(&prev) = self.bwd.get(&head) {
                head = prev;
            }
            return head;
        }
        x
    }

    /// Inverse of [`eval_closed`].
    pub fn eval_inverse_closed(&self, y: Point) -> Point {
        if let Some(x) = self.bwd.get(&y) {
            return *x;
        }
        if self.fwd.contains_key(&y) {
            // y starts a chain; its preimage is the chain tail.
            let mut tail = y;
            while let Some(&next) = self.fwd.get(&tail) {
                tail = next;
            }
            return tail;
        }
        y
    }
}

/// Points promised to be fixed forever, disjoint from the injection's domain
/// and image.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PinnedSet {
    points: BTreeSet<Point>,
}

impl PinnedSet {
    pub fn new() -> PinnedSet {
        PinnedSet::default()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: Point) -> bool {
        self.points.contains(&x)
    }

    pub fn insert(&mut self, x: Point) {
        self.points.insert(x);
    }

    pub fn iter(&self) -> impl Iterator<Item = Point> + '_ {
        self.points.iter().copied()
    }

    /// Maximal runs of consecutive points, as inclusive `(lo, hi)` ranges.
    pub fn ranges(&self) -> Vec<(Point, Point)> {
        let mut out: Vec<(Point, Point)> = Vec::new();
        for p in self.points.iter().copied() {
            match out.last_mut() {
                Some((_, hi)) if *hi + 1 == p => *hi = p,
                _ => out.push((p, p)),
            }
        }
        out
    }
}

/// The first fresh interval of `size` points lying strictly beyond
/// `used_extent` with a clearance of `margin` untouched points before it.
pub fn fresh_interval(used_extent: Point, size: i64, margin: i64) -> (Point, Point) {
    debug_assert!(size >= 1 && margin >= 0);
    (used_extent + margin + 1, used_extent + margin + size)
}

/// Successor-map powers: `beta^k`.
pub fn beta(x: Point, k: i64) -> Point {
    x + k
}

/// A partial injection together with its pinned points and a high-water mark
/// for fresh allocation. Both the `alpha` under construction and the
/// conjugator `sigma` live in one of these.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Space {
    pub map: PartialInjection,
    pub pins: PinnedSet,
    pub used_extent: Point,
}

impl Space {
    pub fn new() -> Space {
        Space::default()
    }

    /// Adds an edge, also guarding the pins and advancing the extent so no
    /// later allocation can collide with either endpoint.
    pub fn assign(&mut self, x: Point, y: Point) -> Result<(), PermError> {
        if self.pins.contains(x) {
            return Err(PermError::PinnedConflict(x));
        }
        if self.pins.contains(y) {
            return Err(PermError::PinnedConflict(y));
        }
        self.map.assign(x, y)?;
        self.used_extent = self.used_extent.max(x).max(y);
        Ok(())
    }

    /// Pins a point as fixed forever.
    pub fn pin(&mut self, x: Point) -> Result<(), PermError> {
        if self.map.contains_domain(x) || self.map.contains_image(x) {
            return Err(PermError::PinnedConflict(x));
        }
        self.pins.insert(x);
        self.used_extent = self.used_extent.max(x);
        Ok(())
    }

    /// Claims a fresh interval (see [`fresh_interval`]) and moves the
    /// high-water mark past it, whether or not every point gets used.
    pub fn allocate(&mut self, size: i64, margin: i64) -> (Point, Point) {
        let (lo, hi) = fresh_interval(self.used_extent, size, margin);
        self.used_extent = hi;
        (lo, hi)
    }

    pub fn eval_closed(&self, x: Point) -> Point {
        if self.pins.contains(x) {
            return x;
        }
        self.map.eval_closed(x)
    }

    pub fn eval_inverse_closed(&self, y: Point) -> Point {
        if self.pins.contains(y) {
            return y;
        }
        self.map.eval_inverse_closed(y)
    }
}

/// Evaluates a word at a point, letters in application order, `a`-letters
/// through the closure of `space` and `b`-letters through the successor map.
/// Returns the endpoint and every point the trajectory visits.
pub fn evaluate_word(space: &Space, w: &Word, x: Point) -> (Point, BTreeSet<Point>) {
    let mut touched = BTreeSet::new();
    let mut p = x;
    touched.insert(p);
    for &l in w.letters() {
        p = match (l.gen, l.sign) {
            (Gen::A, Sign::Pos) => space.eval_closed(p),
            (Gen::A, Sign::Neg) => space.eval_inverse_closed(p),
            (Gen::B, Sign::Pos) => p + 1,
            (Gen::B, Sign::Neg) => p - 1,
        };
        touched.insert(p);
    }
    (p, touched)
}

/// Like [`evaluate_word`], but every `a`-step must resolve through a stored
/// edge or a pinned point — the closure is not consulted. This is the
/// evaluation mode used for certificates: a strict success today cannot be
/// invalidated by any future assignment.
pub fn evaluate_word_strict(space: &Space, w: &Word, x: Point) -> Result<Point, EvalError> {
    let mut p = x;
    for (step, &l) in w.letters().iter().enumerate() {
        p = match (l.gen, l.sign) {
            (Gen::A, Sign::Pos) => match space.map.image_of(p) {
                Some(y) => y,
                None if space.pins.contains(p) => p,
                None => return Err(EvalError::Unresolved { at: p, step }),
            },
            (Gen::A, Sign::Neg) => match space.map.preimage_of(p) {
                Some(y) => y,
                None if space.pins.contains(p) => p,
                None => return Err(EvalError::Unresolved { at: p, step }),
            },
            (Gen::B, Sign::Pos) => p + 1,
            (Gen::B, Sign::Neg) => p - 1,
        };
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn assign_and_conflicts() {
        let mut inj = PartialInjection::new();
        inj.assign(5, 7).unwrap();
        assert_eq!(inj.assign(5, 9), Err(PermError::DomainConflict(5)));
        assert_eq!(inj.assign(2, 7), Err(PermError::ImageConflict(7)));
        assert_eq!(inj.image_of(5), Some(7));
        assert_eq!(inj.preimage_of(7), Some(5));
        assert_eq!(inj.len(), 1);
    }

    #[test]
    fn closure_of_a_single_edge() {
        let mut inj = PartialInjection::new();
        inj.assign(5, 7).unwrap();
        assert_eq!(inj.eval_closed(5), 7);
        // The chain closes: 7 wraps back to 5, everything else is fixed.
        assert_eq!(inj.eval_closed(7), 5);
        assert_eq!(inj.eval_closed(9), 9);
        assert_eq!(inj.eval_inverse_closed(7), 5);
        assert_eq!(inj.eval_inverse_closed(5), 7);
        assert_eq!(inj.eval_inverse_closed(9), 9);
    }

    #[test]
    fn closure_of_longer_chains_and_cycles() {
        let mut inj = PartialInjection::new();
        inj.assign(1, 2).unwrap();
        inj.assign(2, 3).unwrap();
        assert_eq!(inj.eval_closed(3), 1);
        assert_eq!(inj.eval_inverse_closed(1), 3);

        // A stored cycle needs no closure at all.
        inj.assign(10, 11).unwrap();
        inj.assign(11, 10).unwrap();
        assert_eq!(inj.eval_closed(10), 11);
        assert_eq!(inj.eval_closed(11), 10);

        // Self-loops are legal edges.
        inj.assign(20, 20).unwrap();
        assert_eq!(inj.eval_closed(20), 20);
    }

    #[test]
    fn pins_guard_assignments() {
        let mut space = Space::new();
        space.pin(3).unwrap();
        assert_eq!(space.assign(3, 10), Err(PermError::PinnedConflict(3)));
        assert_eq!(space.assign(10, 3), Err(PermError::PinnedConflict(3)));
        space.assign(8, 9).unwrap();
        assert_eq!(space.pin(9), Err(PermError::PinnedConflict(9)));
        assert_eq!(space.eval_closed(3), 3);
    }

    #[test]
    fn fresh_intervals_and_extent() {
        assert_eq!(fresh_interval(0, 5, 3), (4, 8));
        assert_eq!(fresh_interval(10, 1, 0), (11, 11));
        let mut space = Space::new();
        let (lo, hi) = space.allocate(4, 2);
        assert_eq!((lo, hi), (3, 6));
        assert_eq!(space.used_extent, 6);
        let (lo2, _) = space.allocate(1, 5);
        assert_eq!(lo2, 12);
        space.assign(100, 101).unwrap();
        assert_eq!(space.used_extent, 101);
        space.pin(150).unwrap();
        assert_eq!(space.used_extent, 150);
    }

    #[test]
    fn pin_ranges_compress() {
        let mut pins = PinnedSet::new();
        for p in [1, 2, 3, 7, 9, 10] {
            pins.insert(p);
        }
        assert_eq!(pins.ranges(), vec![(1, 3), (7, 7), (9, 10)]);
    }

    #[test]
    fn word_evaluation_plain_and_strict() {
        let mut space = Space::new();
        space.assign(4, 9).unwrap();
        // "ab" applies b first: 3 → 4 → 9.
        let (end, touched) = evaluate_word(&space, &w("ab"), 3);
        assert_eq!(end, 9);
        assert_eq!(touched, BTreeSet::from([3, 4, 9]));
        assert_eq!(evaluate_word_strict(&space, &w("ab"), 3), Ok(9));
        // Strict evaluation refuses closure steps the plain one invents.
        assert_eq!(evaluate_word(&space, &w("a"), 9).0, 4);
        assert_eq!(
            evaluate_word_strict(&space, &w("a"), 9),
            Err(EvalError::Unresolved { at: 9, step: 0 })
        );
        // A pin resolves strictly as a fixed point.
        space.pin(20).unwrap();
        assert_eq!(evaluate_word_strict(&space, &w("aB"), 21), Ok(20));
    }

    #[test]
    fn closure_is_a_bijection() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
        for _ in 0..20 {
            let mut inj = PartialInjection::new();
            for _ in 0..40 {
                let x = rng.gen_range(0..30);
                let y = rng.gen_range(0..30);
                let _ = inj.assign(x, y);
            }
            let mut seen = BTreeSet::new();
            for x in -5..=45 {
                let y = inj.eval_closed(x);
                assert!(seen.insert(y), "closure not injective at {x}");
                assert_eq!(inj.eval_inverse_closed(y), x);
            }
        }
    }
}
