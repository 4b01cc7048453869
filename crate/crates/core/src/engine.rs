//! The staged construction.
//!
//! A build starts from a base word `c` (normalized to a weakly cyclically
//! reduced special word via [`crate::autos::specialize`]) and runs a fixed
//! number of stages. Each stage satisfies a deterministic batch of
//! *requirements*, each of which extends `alpha` and `sigma` by finitely many
//! assignments in fresh territory and records an explicit certificate:
//!
//! - [`Requirement::FfWitness`]: embed a fixed-point gadget for a word `w`
//!   outside `⟨c⟩`, yielding points `x ≠ w x` both fixed by `c` — evidence
//!   that `w` avoids the centralizer of `c` in the realized action.
//! - [`Requirement::InfiniteOrder`]: embed a path spelling `c^k`, so some
//!   point visibly moves under `c^k` — no power of `c` collapses.
//! - [`Requirement::Folner`]: build a block `A` of consecutive `c`-fixed
//!   points on which `alpha` acts with symmetric difference at most `|A|/l`
//!   (exactly a shift by the slope of `c`, or pointwise fixation when the
//!   slope is zero).
//! - [`Requirement::Transitivity`]: wire a cycle of `alpha`-assignments so
//!   that the pair `{alpha^n, beta^m}` reaches every residue class mod `m`
//!   from 0.
//! - [`Requirement::SigmaFaithful`]: for an alternating two-factor form,
//!   chain fresh gadgets through new `sigma`-transpositions so the form
//!   visibly moves a recorded point.
//! - [`Requirement::SigmaReserve`]: pin the Følner blocks against any future
//!   `sigma` support, freezing the transfer of block ratios to the second
//!   factor's generators.
//!
//! Requirements only ever touch fresh points (above the allocation
//! high-water mark), so everything certified stays certified: stored edges
//! are never overwritten and strict evaluations never change value. The
//! stage schedule telescopes — word lengths and form sizes grow like `s/3`,
//! `s/6`, `s/4` — so every word and form is reached eventually, and earlier
//! words are re-witnessed at every later stage.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::amalgam::{self, AlternatingForm, Factor};
use crate::autos::{self, AutoError};
use crate::graphs::{self, GraphError};
use crate::perm::{evaluate_word_strict, EvalError, PermError, Point, Space};
use crate::words::{enumerate_reduced, Gen, Word, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Auto(#[from] AutoError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error(transparent)]
    Strict(#[from] EvalError),
    #[error("certificate check failed at {point}: expected {expected}, evaluated {found}")]
    CertificationFailed {
        point: Point,
        expected: Point,
        found: Point,
    },
    #[error("power witness needs a nonzero exponent")]
    ZeroPower,
    #[error("scale parameters must be at least 1")]
    BadScale,
    #[error("malformed alternating form: {0}")]
    MalformedForm(String),
    #[error("the identity form cannot move a point")]
    TrivialForm,
}

/// One unit of visible progress; the build log is a sequence of these.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Requirement {
    FfWitness(Word),
    InfiniteOrder(i64),
    Folner(i64),
    Transitivity(i64, i64),
    SigmaFaithful(AlternatingForm),
    SigmaReserve,
}

impl Requirement {
    /// One-line log form, inverse of [`Requirement::parse_log_line`].
    pub fn log_line(&self) -> String {
        match self {
            Requirement::FfWitness(w) => format!("ff {w}"),
            Requirement::InfiniteOrder(k) => format!("inforder {k}"),
            Requirement::Folner(l) => format!("folner {l}"),
            Requirement::Transitivity(n, m) => format!("trans {n} {m}"),
            Requirement::SigmaFaithful(form) => format!("sigma {}", form.token()),
            Requirement::SigmaReserve => "sigreserve".to_string(),
        }
    }

    pub fn parse_log_line(line: &str) -> Result<Requirement, String> {
        let mut parts = line.split_whitespace();
        let head = parts.next().ok_or("empty log line")?;
        let mut rest = || parts.next().ok_or_else(|| format!("truncated: {line}"));
        let req = match head {
            "ff" => Requirement::FfWitness(
                Word::parse(rest()?).map_err(|e| format!("{line}: {e}"))?,
            ),
            "inforder" => Requirement::InfiniteOrder(
                rest()?.parse().map_err(|_| format!("bad power: {line}"))?,
            ),
            "folner" => Requirement::Folner(
                rest()?.parse().map_err(|_| format!("bad scale: {line}"))?,
            ),
            "trans" => {
                let n = rest()?.parse().map_err(|_| format!("bad count: {line}"))?;
                let m = rest()?.parse().map_err(|_| format!("bad count: {line}"))?;
                Requirement::Transitivity(n, m)
            }
            "sigma" => Requirement::SigmaFaithful(AlternatingForm::parse_token(rest()?)?),
            "sigreserve" => Requirement::SigmaReserve,
            other => return Err(format!("unknown requirement '{other}'")),
        };
        if parts.next().is_some() {
            return Err(format!("trailing tokens: {line}"));
        }
        Ok(req)
    }
}

/// A certified pair `x`, `w x` of distinct `c`-fixed points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessTriple {
    pub word: Word,
    pub x: Point,
    pub wx: Point,
}

/// A block `[lo, hi]` of certified `c`-fixed points with
/// `|A △ alpha·A| ≤ (eps_num/eps_den)·|A|`, exactly. Once `reserved`, the
/// block is pinned against `sigma` forever.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerBlock {
    pub lo: Point,
    pub hi: Point,
    pub eps_num: i64,
    pub eps_den: i64,
    pub reserved: bool,
}

impl FolnerBlock {
    pub fn len(&self) -> i64 {
        self.hi - self.lo + 1
    }

    pub fn points(&self) -> impl Iterator<Item = Point> {
        self.lo..=self.hi
    }
}

/// Everything the construction has promised so far.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionState {
    /// The normalized base word: weakly cyclically reduced and special.
    pub c: Word,
    /// The `alpha` generator under construction.
    pub alpha: Space,
    /// The conjugator; its stored edges are always transpositions between
    /// certified `c`-fixed points, its pins cover the reserved blocks.
    pub sigma: Space,
    /// Points where a strict evaluation of `c` has returned to its start.
    pub certified_fix_c: BTreeSet<Point>,
    /// Fixed-point witnesses, keyed by word, in minting order.
    pub witness_pool: BTreeMap<Word, Vec<WitnessTriple>>,
    pub folner_blocks: Vec<FolnerBlock>,
    /// For each exponent `k`, recorded pairs `(z, c^k z)` with `c^k z ≠ z`.
    pub order_witnesses: BTreeMap<i64, Vec<(Point, Point)>>,
    /// For each satisfied alternating form, a recorded point it moves and
    /// where it lands.
    pub sigma_movers: BTreeMap<AlternatingForm, (Point, Point)>,
    pub log: Vec<Requirement>,
    /// Number of schedule stages this state has completed.
    pub stages: u32,
}

impl ConstructionState {
    /// Normalizes the base word (reduce, cyclically reduce, specialize if the
    /// sums demand it) and starts an empty construction over it.
    pub fn new(c_input: &Word) -> Result<ConstructionState, EngineError> {
        let (mut core, _) = c_input.cyclically_reduce();
        if core.is_empty() {
            return Err(AutoError::FreelyTrivial.into());
        }
        if !core.is_special() {
            let (_, specialized) = autos::specialize(&core)?;
            core = specialized;
        }
        // A nonempty special reduced word always contains an a-letter: a pure
        // b-word has sums (0, k) with k ≠ 0, which is not special.
        debug_assert!(core.letters().iter().any(|l| l.gen == Gen::A));
        Ok(ConstructionState {
            c: core,
            alpha: Space::new(),
            sigma: Space::new(),
            certified_fix_c: BTreeSet::new(),
            witness_pool: BTreeMap::new(),
            folner_blocks: Vec::new(),
            order_witnesses: BTreeMap::new(),
            sigma_movers: BTreeMap::new(),
            log: Vec::new(),
            stages: 0,
        })
    }

    /// Appends to the log and satisfies, the only path `run` and `replay` use
    /// — so the log is exactly the sequence of top-level requirements.
    fn process(&mut self, req: Requirement) -> Result<(), EngineError> {
        self.log.push(req.clone());
        self.satisfy(&req)
    }

    /// Satisfies any requirement (without logging it).
    pub fn satisfy(&mut self, req: &Requirement) -> Result<(), EngineError> {
        match req {
            Requirement::FfWitness(w) => self.satisfy_ff(w).map(drop),
            Requirement::InfiniteOrder(k) => self.satisfy_infinite_order(*k).map(drop),
            Requirement::Folner(l) => self.satisfy_folner(*l).map(drop),
            Requirement::Transitivity(n, m) => self.satisfy_transitivity(*n, *m),
            Requirement::SigmaFaithful(form) => self.satisfy_sigma_faithful(form).map(drop),
            Requirement::SigmaReserve => self.satisfy_sigma_reserve().map(drop),
        }
    }

    /// Strictly evaluates `c` at `p`, demands it returns to `p`, and records
    /// the point as certified. Strict success is permanent: it only consults
    /// stored edges and pins, which later growth never disturbs.
    fn certify_fix_c(&mut self, p: Point) -> Result<(), EngineError> {
        let found = evaluate_word_strict(&self.alpha, &self.c, p)?;
        if found != p {
            return Err(EngineError::CertificationFailed {
                point: p,
                expected: p,
                found,
            });
        }
        self.certified_fix_c.insert(p);
        Ok(())
    }

    /// Pins every placed point that carries no `alpha`-edge, so strict walks
    /// through the gadget resolve at every vertex.
    fn pin_placement_leftovers(
        &mut self,
        placement: &BTreeMap<usize, Point>,
    ) -> Result<(), EngineError> {
        for &p in placement.values() {
            if !self.alpha.map.contains_domain(p) && !self.alpha.map.contains_image(p) {
                self.alpha.pin(p)?;
            }
        }
        Ok(())
    }

    /// Builds, embeds, and certifies one fixed-point gadget for `w`,
    /// returning the fresh witness triple (not pooled).
    fn mint_ff(&mut self, w: &Word) -> Result<WitnessTriple, EngineError> {
        let gadget = graphs::build_ff_graph(&self.c, w)?;
        let placement = graphs::embed(&mut self.alpha, &gadget.graph)?;
        self.pin_placement_leftovers(&placement)?;
        let x = placement[&gadget.graph.base.expect("gadget keeps its base")];
        let wx = placement[&gadget.graph.end.expect("gadget keeps its end")];
        self.certify_fix_c(x)?;
        self.certify_fix_c(wx)?;
        let found = evaluate_word_strict(&self.alpha, w, x)?;
        if found != wx {
            return Err(EngineError::CertificationFailed {
                point: x,
                expected: wx,
                found,
            });
        }
        Ok(WitnessTriple {
            word: w.clone(),
            x,
            wx,
        })
    }

    /// Satisfies a fixed-point witness requirement: a fresh triple enters the
    /// pool; every call for the same word adds another, so witness counts
    /// only grow.
    pub fn satisfy_ff(&mut self, w: &Word) -> Result<WitnessTriple, EngineError> {
        let triple = self.mint_ff(w)?;
        self.witness_pool
            .entry(w.clone())
            .or_default()
            .push(triple.clone());
        Ok(triple)
    }

    /// Embeds a path spelling `c^k` so its start visibly moves, and records
    /// the pair.
    pub fn satisfy_infinite_order(&mut self, k: i64) -> Result<(Point, Point), EngineError> {
        if k == 0 {
            return Err(EngineError::ZeroPower);
        }
        // c is weakly cyclically reduced, so the literal power is reduced.
        let word = self.c.pow(k);
        let g = graphs::path_graph(&word)?;
        let placement = graphs::embed(&mut self.alpha, &g)?;
        self.pin_placement_leftovers(&placement)?;
        let z = placement[&g.base.expect("paths have a base")];
        let end = placement[&g.end.expect("paths have an end")];
        let found = evaluate_word_strict(&self.alpha, &word, z)?;
        if found != end {
            return Err(EngineError::CertificationFailed {
                point: z,
                expected: end,
                found,
            });
        }
        debug_assert_ne!(z, end);
        self.order_witnesses.entry(k).or_default().push((z, end));
        Ok((z, end))
    }

    /// Builds a Følner block at quality `1/l`.
    ///
    /// The slope `t = sum_b / sum_a` of the special word `c` decides the
    /// branch. With `t = 0` (both sums zero, or no net `b`), any `c`-walk has
    /// zero net displacement once `alpha` fixes everything in reach, so an
    /// entirely pinned window gives a block `alpha` fixes pointwise — ratio
    /// exactly 0. Otherwise `alpha := x ↦ x − t` on a window around the block
    /// makes every `c`-walk telescope back to its start, and the block's
    /// symmetric difference under `alpha` is exactly `2|t| = |A|/l`.
    pub fn satisfy_folner(&mut self, l: i64) -> Result<FolnerBlock, EngineError> {
        if l < 1 {
            return Err(EngineError::BadScale);
        }
        let (sum_a, sum_b) = self.c.exponent_sums();
        let size_c = self.c.len() as i64;
        let n_beta = max_beta_run(&self.c);
        let block = if sum_b == 0 {
            let len = (2 * l).max(size_c * (n_beta + 1));
            let (w_lo, w_hi) = self.alpha.allocate(len + 2 * size_c, size_c);
            for p in w_lo..=w_hi {
                self.alpha.pin(p)?;
            }
            let (lo, hi) = (w_lo + size_c, w_hi - size_c);
            for p in lo..=hi {
                self.certify_fix_c(p)?;
            }
            FolnerBlock {
                lo,
                hi,
                eps_num: 1,
                eps_den: l,
                reserved: false,
            }
        } else {
            debug_assert!(sum_a != 0 && sum_b % sum_a == 0, "base word not special");
            let t = sum_b / sum_a;
            // No net b but nonzero sum_b is impossible here; and a special
            // word with b-letters at all has n_beta ≥ 1, which the padding
            // arithmetic below relies on.
            let pad = size_c * (t.abs() + n_beta);
            let len = 2 * l * t.abs();
            let width = len + 2 * pad + t.abs();
            let (w_lo, w_hi) = self.alpha.allocate(width, pad);
            // Walk range U, with the assigned domain W = U ∪ (U + t) one
            // slope wider so inverse steps resolve everywhere on U too.
            let (u_lo, u_hi) = if t > 0 {
                (w_lo, w_hi - t)
            } else {
                (w_lo - t, w_hi)
            };
            for x in w_lo..=w_hi {
                self.alpha.assign(x, x - t)?;
            }
            let (lo, hi) = (u_lo + pad, u_hi - pad);
            for p in lo..=hi {
                self.certify_fix_c(p)?;
            }
            FolnerBlock {
                lo,
                hi,
                eps_num: 1,
                eps_den: l,
                reserved: false,
            }
        };
        self.folner_blocks.push(block.clone());
        Ok(block)
    }

    /// Wires a fresh `alpha`-cycle through one representative of every
    /// residue class mod `m`, spaced so `alpha^n` steps the representatives
    /// around; with `beta^m` holding classes fixed, the pair reaches every
    /// class from anywhere.
    pub fn satisfy_transitivity(&mut self, n: i64, m: i64) -> Result<(), EngineError> {
        if n < 1 || m < 1 {
            return Err(EngineError::BadScale);
        }
        if n == 1 && m == 1 {
            // beta alone is transitive.
            return Ok(());
        }
        let (z_lo, _) = self.alpha.allocate(n * m, m);
        // Representative of class i: first point ≥ z_lo congruent to i.
        let rep = |i: i64| z_lo + (i - z_lo).rem_euclid(m);
        let mut points: Vec<Point> = Vec::with_capacity((n * m) as usize);
        for i in 1..=m {
            points.push(rep(i));
            for j in 1..n {
                points.push(rep(i) + j * m);
            }
        }
        // One long alpha-cycle: n points of class 1, then class 2, …, back
        // around to the start.
        for (idx, &p) in points.iter().enumerate() {
            let q = points[(idx + 1) % points.len()];
            self.alpha.assign(p, q)?;
        }
        // Post-check: alpha^n carries each representative to the next.
        for i in 1..=m {
            let mut p = rep(i);
            for _ in 0..n {
                p = self.alpha.eval_closed(p);
            }
            let expected = rep(if i == m { 1 } else { i + 1 });
            if p != expected {
                return Err(EngineError::CertificationFailed {
                    point: rep(i),
                    expected,
                    found: p,
                });
            }
        }
        Ok(())
    }

    /// Adds the stored transposition `sigma(u) = v`, `sigma(v) = u`. Both
    /// ends must already be certified `c`-fixed — that is the whole reason
    /// `sigma` commutes with `c(alpha, beta)`.
    fn define_sigma_swap(&mut self, u: Point, v: Point) -> Result<(), EngineError> {
        debug_assert!(self.certified_fix_c.contains(&u));
        debug_assert!(self.certified_fix_c.contains(&v));
        self.sigma.assign(u, v)?;
        if u != v {
            self.sigma.assign(v, u)?;
        }
        Ok(())
    }

    /// Satisfies a faithfulness requirement for one alternating form: mints a
    /// fresh gadget per syllable, stitches them with new `sigma`
    /// transpositions, and records the moved point.
    ///
    /// A leading `c`-power changes nothing once there is at least one
    /// syllable — the chain's endpoint is a certified fixed point of `c` — so
    /// only the pure powers delegate to an infinite-order witness.
    pub fn satisfy_sigma_faithful(
        &mut self,
        form: &AlternatingForm,
    ) -> Result<(Point, Point), EngineError> {
        form.validate(&self.c)
            .map_err(EngineError::MalformedForm)?;
        if form.syllables.is_empty() {
            if form.c_power == 0 {
                return Err(EngineError::TrivialForm);
            }
            let pair = self.satisfy_infinite_order(form.c_power)?;
            self.sigma_movers.insert(form.clone(), pair);
            return Ok(pair);
        }
        let mints: Vec<WitnessTriple> = form
            .syllables
            .iter()
            .map(|s| self.mint_ff(&s.word))
            .collect::<Result<_, _>>()?;
        // The trajectory of x₀ through the syllables, resolving each
        // second-factor conjugation with a fresh transposition. `At(p)`
        // means the running point is p; `AfterSigmaInv(q)` means the running
        // point is sigma⁻¹(q), with the choice of preimage still open.
        enum Cursor {
            At(Point),
            AfterSigmaInv(Point),
        }
        let x0 = mints[0].x;
        let mut cursor = match form.syllables[0].factor {
            // First-factor syllables act directly on the fresh anchor.
            Factor::F1 => Cursor::At(mints[0].wx),
            // sigma never touches x₀ (now or later), so sigma(x₀) = x₀ and
            // the syllable's word walks the gadget before the pending
            // sigma⁻¹.
            Factor::F2 => Cursor::AfterSigmaInv(mints[0].wx),
        };
        for (syllable, t) in form.syllables.iter().zip(&mints).skip(1) {
            cursor = match (cursor, syllable.factor) {
                (Cursor::At(p), Factor::F2) => {
                    // Send the running point into the fresh gadget…
                    self.define_sigma_swap(p, t.x)?;
                    Cursor::AfterSigmaInv(t.wx)
                }
                (Cursor::AfterSigmaInv(q), Factor::F1) => {
                    // …or resolve the pending preimage into it.
                    self.define_sigma_swap(t.x, q)?;
                    Cursor::At(t.wx)
                }
                // Validation guarantees strict alternation.
                _ => unreachable!("factors alternate"),
            };
        }
        let endpoint = match cursor {
            Cursor::At(p) => p,
            // The pending sigma⁻¹ stays unresolved forever: q never enters
            // sigma's support, so sigma⁻¹(q) = q permanently.
            Cursor::AfterSigmaInv(q) => q,
        };
        // Re-derive the endpoint through the public action as a check.
        let spelled = form.to_amalgam_word(&self.c);
        let found = amalgam::act(self, &spelled, x0);
        if found != endpoint || endpoint == x0 {
            return Err(EngineError::CertificationFailed {
                point: x0,
                expected: endpoint,
                found,
            });
        }
        self.sigma_movers.insert(form.clone(), (x0, endpoint));
        Ok((x0, endpoint))
    }

    /// Pins every unreserved Følner block in `sigma`'s space, so no future
    /// transposition can touch it; returns how many blocks became reserved.
    pub fn satisfy_sigma_reserve(&mut self) -> Result<usize, EngineError> {
        let mut count = 0;
        for i in 0..self.folner_blocks.len() {
            if self.folner_blocks[i].reserved {
                continue;
            }
            let (lo, hi) = (self.folner_blocks[i].lo, self.folner_blocks[i].hi);
            for p in lo..=hi {
                self.sigma.pin(p)?;
            }
            self.folner_blocks[i].reserved = true;
            count += 1;
        }
        Ok(count)
    }

    fn run_stage(&mut self, s: u32) -> Result<(), EngineError> {
        let stage = s as i64;
        for len in 1..=ff_length_bound(s) {
            for word in enumerate_reduced(len) {
                if word.power_of(&self.c)?.is_some() {
                    continue;
                }
                self.process(Requirement::FfWitness(word))?;
            }
        }
        self.process(Requirement::InfiniteOrder(stage))?;
        self.process(Requirement::InfiniteOrder(-stage))?;
        self.process(Requirement::Folner(stage))?;
        for n in 1..=stage {
            for m in 1..=stage {
                self.process(Requirement::Transitivity(n, m))?;
            }
        }
        let bounds = sigma_form_bounds(s);
        let previous = if s > 1 { Some(sigma_form_bounds(s - 1)) } else { None };
        for form in amalgam::enumerate_forms(bounds.0, bounds.1, &self.c) {
            // One witness per form suffices forever; only satisfy the forms
            // new to this stage's bounds.
            if let Some((prev_syll, prev_len)) = previous {
                if form.syllables.len() <= prev_syll
                    && form.syllables.iter().all(|s| s.word.len() <= prev_len)
                {
                    continue;
                }
            }
            self.process(Requirement::SigmaFaithful(form))?;
        }
        self.process(Requirement::SigmaReserve)?;
        self.stages = s;
        Ok(())
    }
}

/// Longest word the fixed-point schedule covers at stage `s`.
pub fn ff_length_bound(s: u32) -> usize {
    ((s + 2) / 3) as usize
}

/// `(max syllables, max letters per syllable)` the faithfulness schedule
/// covers at stage `s`.
pub fn sigma_form_bounds(s: u32) -> (usize, usize) {
    (((s + 5) / 6) as usize, ((s + 3) / 4) as usize)
}

fn max_beta_run(w: &Word) -> i64 {
    let mut best = 0;
    let mut run = 0;
    for l in w.letters() {
        if l.gen == Gen::B {
            run += 1;
            best = best.max(run);
        } else {
            run = 0;
        }
    }
    best
}

/// Builds a state for `c_input` by running `stages` full schedule stages.
pub fn run(c_input: &Word, stages: u32) -> Result<ConstructionState, EngineError> {
    let mut state = ConstructionState::new(c_input)?;
    for s in 1..=stages {
        state.run_stage(s)?;
    }
    Ok(state)
}

/// Re-executes a recorded log against a fresh state. Satisfaction is
/// deterministic, so a faithful log reproduces the original state exactly.
pub fn replay(
    c: &Word,
    stages: u32,
    log: &[Requirement],
) -> Result<ConstructionState, EngineError> {
    let mut state = ConstructionState::new(c)?;
    for req in log {
        state.log.push(req.clone());
        state.satisfy(req)?;
    }
    state.stages = stages;
    Ok(state)
}

/// Breadth-first search from `start` using only `alpha^{±n}` and `beta^{±m}`,
/// bounded to points the construction has touched (plus slack); returns the
/// residue classes mod `m` that get visited. With the transitivity gadgets in
/// place this reaches all `m` classes.
pub fn transitivity_bfs(
    state: &ConstructionState,
    n: i64,
    m: i64,
    start: Point,
) -> BTreeSet<i64> {
    let slack = n + m + 2;
    let lo = -slack;
    let hi = state.alpha.used_extent + slack;
    let alpha_pow = |mut x: Point, k: i64| {
        for _ in 0..k.abs() {
            x = if k > 0 {
                state.alpha.eval_closed(x)
            } else {
                state.alpha.eval_inverse_closed(x)
            };
        }
        x
    };
    let mut classes = BTreeSet::new();
    let mut visited = BTreeSet::new();
    let mut queue = std::collections::VecDeque::new();
    visited.insert(start);
    queue.push_back(start);
    while let Some(p) = queue.pop_front() {
        classes.insert(p.rem_euclid(m));
        if classes.len() as i64 == m {
            break;
        }
        for q in [alpha_pow(p, n), alpha_pow(p, -n), p + m, p - m] {
            if q >= lo && q <= hi && visited.insert(q) {
                queue.push_back(q);
            }
        }
    }
    classes
}

/// DOT rendering of the ball of the built action around `center`: every point
/// within `radius` generator steps, `alpha`-edges solid (self-loops omitted),
/// `beta`-edges dashed.
pub fn ball_dot(state: &ConstructionState, center: Point, radius: u32) -> String {
    let mut ball = BTreeSet::new();
    let mut frontier = vec![center];
    ball.insert(center);
    for _ in 0..radius {
        let mut next = Vec::new();
        for &p in &frontier {
            for q in [
                state.alpha.eval_closed(p),
                state.alpha.eval_inverse_closed(p),
                p + 1,
                p - 1,
            ] {
                if ball.insert(q) {
                    next.push(q);
                }
            }
        }
        frontier = next;
    }
    let vertices: Vec<Point> = ball.iter().copied().collect();
    let mut edges = Vec::new();
    for &p in &ball {
        let ap = state.alpha.eval_closed(p);
        if ap != p && ball.contains(&ap) {
            edges.push((p, ap, Gen::A));
        }
        if ball.contains(&(p + 1)) {
            edges.push((p, p + 1, Gen::B));
        }
    }
    graphs::render_dot(&vertices, &edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amalgam::Syllable;
    use crate::perm::evaluate_word;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn new_state_normalizes_the_base_word() {
        assert_eq!(ConstructionState::new(&w("abAB")).unwrap().c, w("abAB"));
        // Non-special words get specialized: b^3 becomes a^3.
        assert_eq!(ConstructionState::new(&w("bbb")).unwrap().c, w("aaa"));
        // Conjugating layers are stripped first.
        assert_eq!(ConstructionState::new(&w("Bab")).unwrap().c, w("a"));
        assert!(matches!(
            ConstructionState::new(&Word::empty()),
            Err(EngineError::Auto(AutoError::FreelyTrivial))
        ));
    }

    #[test]
    fn ff_witnesses_accumulate_and_certify() {
        let mut state = ConstructionState::new(&w("aa")).unwrap();
        let t1 = state.satisfy_ff(&w("b")).unwrap();
        assert_eq!(t1.wx, t1.x + 1);
        assert!(state.certified_fix_c.contains(&t1.x));
        assert!(state.certified_fix_c.contains(&t1.wx));
        let t2 = state.satisfy_ff(&w("b")).unwrap();
        assert_ne!(t1.x, t2.x);
        assert_eq!(state.witness_pool[&w("b")].len(), 2);
        // Certified points really are fixed under the closed evaluation too.
        assert_eq!(evaluate_word(&state.alpha, &state.c, t1.x).0, t1.x);
        // Powers of the base word are rejected.
        assert!(matches!(
            state.satisfy_ff(&w("aaaa")),
            Err(EngineError::Graph(GraphError::PowerOfBase(2)))
        ));
    }

    #[test]
    fn order_witnesses_move() {
        let mut state = ConstructionState::new(&w("aa")).unwrap();
        let (z, end) = state.satisfy_infinite_order(2).unwrap();
        assert_ne!(z, end);
        assert_eq!(evaluate_word_strict(&state.alpha, &state.c.pow(2), z), Ok(end));
        let (z, end) = state.satisfy_infinite_order(-1).unwrap();
        assert_eq!(evaluate_word_strict(&state.alpha, &state.c.pow(-1), z), Ok(end));
        assert_eq!(state.satisfy_infinite_order(0), Err(EngineError::ZeroPower));
        assert_eq!(state.order_witnesses.len(), 2);
    }

    #[test]
    fn folner_block_with_zero_slope() {
        let mut state = ConstructionState::new(&w("abAB")).unwrap();
        let block = state.satisfy_folner(4).unwrap();
        assert_eq!(block.len(), 8);
        assert!(!block.reserved);
        // Pinned pointwise: alpha fixes the block, symmetric difference 0.
        for p in block.points() {
            assert_eq!(state.alpha.eval_closed(p), p);
            assert!(state.certified_fix_c.contains(&p));
        }
        let reserved = state.satisfy_sigma_reserve().unwrap();
        assert_eq!(reserved, 1);
        assert!(state.folner_blocks[0].reserved);
        assert!(state.sigma.pins.contains(block.lo));
        assert!(state.sigma.pins.contains(block.hi));
        assert_eq!(state.satisfy_sigma_reserve().unwrap(), 0);
    }

    #[test]
    fn folner_block_with_shift() {
        // c = abb has sums (1, 2): slope 2, so alpha shifts by -2 around the
        // block and the ratio is exactly 2·|t| / |A| = 4/16 = 1/4.
        let mut state = ConstructionState::new(&w("abb")).unwrap();
        let block = state.satisfy_folner(4).unwrap();
        assert_eq!(block.len(), 16);
        assert_eq!((block.eps_num, block.eps_den), (1, 4));
        for p in block.points() {
            assert!(state.certified_fix_c.contains(&p));
            assert_eq!(state.alpha.eval_closed(p), p - 2);
        }
        let a: BTreeSet<Point> = block.points().collect();
        let alpha_a: BTreeSet<Point> = block.points().map(|p| state.alpha.eval_closed(p)).collect();
        let sym_diff = a.symmetric_difference(&alpha_a).count() as i64;
        assert_eq!(sym_diff, 4);
        assert_eq!(sym_diff * block.eps_den, block.len() * block.eps_num);
        // The beta difference is always exactly 2.
        let beta_a: BTreeSet<Point> = block.points().map(|p| p + 1).collect();
        assert_eq!(a.symmetric_difference(&beta_a).count(), 2);
    }

    #[test]
    fn transitivity_gadget_reaches_all_classes() {
        let mut state = ConstructionState::new(&w("abAB")).unwrap();
        state.satisfy_transitivity(2, 3).unwrap();
        assert_eq!(
            transitivity_bfs(&state, 2, 3, 0),
            BTreeSet::from([0, 1, 2])
        );
        state.satisfy_transitivity(1, 4).unwrap();
        assert_eq!(
            transitivity_bfs(&state, 1, 4, 0),
            BTreeSet::from([0, 1, 2, 3])
        );
        // (1, 1) needs no gadget at all.
        state.satisfy_transitivity(1, 1).unwrap();
        assert_eq!(transitivity_bfs(&state, 1, 1, 0), BTreeSet::from([0]));
        assert_eq!(state.satisfy_transitivity(0, 2), Err(EngineError::BadScale));
    }

    #[test]
    fn sigma_chains_move_their_anchor() {
        let mut state = ConstructionState::new(&w("aa")).unwrap();
        let form = AlternatingForm {
            c_power: 0,
            syllables: vec![
                Syllable { factor: Factor::F2, word: w("b") },
                Syllable { factor: Factor::F1, word: w("a") },
            ],
        };
        let (x0, end) = state.satisfy_sigma_faithful(&form).unwrap();
        assert_ne!(x0, end);
        assert_eq!(state.sigma_movers[&form], (x0, end));
        // The public action agrees.
        let spelled = form.to_amalgam_word(&state.c);
        assert_eq!(amalgam::act(&state, &spelled, x0), end);
        // sigma's support is certified fixed.
        for (u, _) in state.sigma.map.iter() {
            assert!(state.certified_fix_c.contains(&u));
        }
    }

    #[test]
    fn sigma_single_syllables_and_powers() {
        let mut state = ConstructionState::new(&w("aa")).unwrap();
        for factor in [Factor::F1, Factor::F2] {
            let form = AlternatingForm {
                c_power: 0,
                syllables: vec![Syllable { factor, word: w("b") }],
            };
            let (x0, end) = state.satisfy_sigma_faithful(&form).unwrap();
            assert_ne!(x0, end);
            // A one-syllable witness never needs sigma edges.
            let spelled = form.to_amalgam_word(&state.c);
            assert_eq!(amalgam::act(&state, &spelled, x0), end);
        }
        assert!(state.sigma.map.is_empty());
        // Pure powers delegate to order witnesses.
        let form = AlternatingForm { c_power: 2, syllables: vec![] };
        let (z, end) = state.satisfy_sigma_faithful(&form).unwrap();
        assert_ne!(z, end);
        assert!(state.order_witnesses.contains_key(&2));
        // The identity form is rejected.
        assert_eq!(
            state.satisfy_sigma_faithful(&AlternatingForm { c_power: 0, syllables: vec![] }),
            Err(EngineError::TrivialForm)
        );
    }

    #[test]
    fn schedule_bounds() {
        assert_eq!(ff_length_bound(1), 1);
        assert_eq!(ff_length_bound(3), 1);
        assert_eq!(ff_length_bound(4), 2);
        assert_eq!(ff_length_bound(12), 4);
        assert_eq!(sigma_form_bounds(1), (1, 1));
        assert_eq!(sigma_form_bounds(5), (1, 2));
        assert_eq!(sigma_form_bounds(9), (2, 3));
        assert_eq!(sigma_form_bounds(12), (2, 3));
    }

    #[test]
    fn run_is_deterministic_and_monotone() {
        let a = run(&w("abAB"), 2).unwrap();
        let b = run(&w("abAB"), 2).unwrap();
        assert_eq!(a, b);
        let c = run(&w("abAB"), 3).unwrap();
        // The shorter run's log is a prefix of the longer one's.
        assert_eq!(&c.log[..a.log.len()], &a.log[..]);
        // Witness counts only grow.
        for (word, triples) in &a.witness_pool {
            assert!(c.witness_pool[word].len() >= triples.len());
        }
        assert_eq!(a.stages, 2);
        assert_eq!(c.stages, 3);
    }

    #[test]
    fn replay_reproduces_the_state() {
        let built = run(&w("abAB"), 2).unwrap();
        let replayed = replay(&built.c, built.stages, &built.log).unwrap();
        assert_eq!(built, replayed);
    }

    #[test]
    fn log_lines_round_trip() {
        let built = run(&w("aa"), 2).unwrap();
        for req in &built.log {
            let line = req.log_line();
            assert_eq!(Requirement::parse_log_line(&line).unwrap(), *req, "{line}");
        }
        assert!(Requirement::parse_log_line("conjure 3").is_err());
        assert!(Requirement::parse_log_line("ff").is_err());
        assert!(Requirement::parse_log_line("trans 2 2 2").is_err());
    }

    #[test]
    fn ball_dot_shapes() {
        let state = ConstructionState::new(&w("aa")).unwrap();
        let dot = ball_dot(&state, 0, 0);
        assert_eq!(dot.matches("->").count(), 0);
        assert!(dot.contains("\"0\""));
        let dot = ball_dot(&state, 0, 2);
        // Pure successor line: 5 vertices, 4 beta edges, no alpha edges.
        assert_eq!(dot.matches("style=dashed").count(), 4);
        assert_eq!(dot.matches("label=\"a\"").count(), 0);
        assert_eq!(ball_dot(&state, 0, 2), ball_dot(&state, 0, 2));
    }
}
