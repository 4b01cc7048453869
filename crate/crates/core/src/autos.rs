//! Nielsen moves on the free group of rank two, the integer matrices they
//! induce on exponent sums, and the specialization pipeline: given any
//! nontrivial base word, produce an automorphism whose image word is special
//! (its `a`-sum divides its `b`-sum), so the Følner machinery downstream has a
//! slope to work with.
//!
//! Matrices act on exponent-sum *column* vectors: if `f` is the automorphism
//! of a single move and `w` any word, `exponent_sums(f(w)) = C · exponent_sums(w)`
//! with `C` the move's induced matrix, and products compose with the
//! last-applied move leftmost. Move lists, like letters in a word, are stored
//! in application order.

use std::fmt;

use thiserror::Error;

use crate::words::{Gen, Letter, Sign, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutoError {
    #[error("matrix with determinant {0} is not invertible over the integers")]
    NotUnimodular(i64),
    #[error("cannot specialize the identity word")]
    FreelyTrivial,
}

/// A 2×2 integer matrix, rows `(a b; c d)`, acting on column vectors of
/// exponent sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbelianMatrix {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: i64,
}

impl AbelianMatrix {
    pub const fn new(a: i64, b: i64, c: i64, d: i64) -> AbelianMatrix {
        AbelianMatrix { a, b, c, d }
    }

    pub const fn identity() -> AbelianMatrix {
        AbelianMatrix::new(1, 0, 0, 1)
    }

    /// The coordinate swap `(0 1; 1 0)`.
    pub const fn swap() -> AbelianMatrix {
        AbelianMatrix::new(0, 1, 1, 0)
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs() == 1
    }

    /// Matrix product `self · rhs`.
    pub fn mul(&self, rhs: &AbelianMatrix) -> AbelianMatrix {
        AbelianMatrix::new(
            self.a * rhs.a + self.b * rhs.c,
            self.a * rhs.b + self.b * rhs.d,
            self.c * rhs.a + self.d * rhs.c,
            self.c * rhs.b + self.d * rhs.d,
        )
    }

    /// Applies the matrix to an exponent-sum column vector.
    pub fn apply_to_sums(&self, sums: (i64, i64)) -> (i64, i64) {
        (
            self.a * sums.0 + self.b * sums.1,
            self.c * sums.0 + self.d * sums.1,
        )
    }
}

/// The six Whitehead-style elementary automorphisms. `MulAB` sends `a ↦ ab`
/// (apply `b` first, then `a`), `MulBA` sends `b ↦ ba`, and the `Inv`
/// variants compose with the inverted right-hand generator; `InvertA`/`InvertB`
/// invert one generator outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NielsenMove {
    InvertA,
    InvertB,
    MulAB,
    MulABInv,
    MulBA,
    MulBAInv,
}

impl NielsenMove {
    /// Induced action on exponent-sum columns.
    pub fn matrix(self) -> AbelianMatrix {
        match self {
            NielsenMove::InvertA => AbelianMatrix::new(-1, 0, 0, 1),
            NielsenMove::InvertB => AbelianMatrix::new(1, 0, 0, -1),
            NielsenMove::MulAB => AbelianMatrix::new(1, 0, 1, 1),
            NielsenMove::MulABInv => AbelianMatrix::new(1, 0, -1, 1),
            NielsenMove::MulBA => AbelianMatrix::new(1, 1, 0, 1),
            NielsenMove::MulBAInv => AbelianMatrix::new(1, -1, 0, 1),
        }
    }

    /// Image of a single letter, in application order.
    fn substitute(self, l: Letter) -> Vec<Letter> {
        let a_pos = Letter::new(Gen::A, Sign::Pos);
        let a_neg = Letter::new(Gen::A, Sign::Neg);
        let b_pos = Letter::new(Gen::B, Sign::Pos);
        let b_neg = Letter::new(Gen::B, Sign::Neg);
        match (self, l.gen, l.sign) {
            (NielsenMove::InvertA, Gen::A, _) => vec![l.inverse()],
            (NielsenMove::InvertB, Gen::B, _) => vec![l.inverse()],
            // a ↦ a∘b, so a⁻¹ ↦ b⁻¹ preceded by a⁻¹ in application order.
            (NielsenMove::MulAB, Gen::A, Sign::Pos) => vec![b_pos, a_pos],
            (NielsenMove::MulAB, Gen::A, Sign::Neg) => vec![a_neg, b_neg],
            (NielsenMove::MulABInv, Gen::A, Sign::Pos) => vec![b_neg, a_pos],
            (NielsenMove::MulABInv, Gen::A, Sign::Neg) => vec![a_neg, b_pos],
            (NielsenMove::MulBA, Gen::B, Sign::Pos) => vec![a_pos, b_pos],
            (NielsenMove::MulBA, Gen::B, Sign::Neg) => vec![b_neg, a_neg],
            (NielsenMove::MulBAInv, Gen::B, Sign::Pos) => vec![a_neg, b_pos],
            (NielsenMove::MulBAInv, Gen::B, Sign::Neg) => vec![b_neg, a_pos],
            _ => vec![l],
        }
    }

    /// The move written as the substitution it performs on one generator;
    /// the other generator is fixed.
    pub fn describe(self) -> &'static str {
        match self {
            NielsenMove::InvertA => "a->A",
            NielsenMove::InvertB => "b->B",
            NielsenMove::MulAB => "a->ab",
            NielsenMove::MulABInv => "a->aB",
            NielsenMove::MulBA => "b->ba",
            NielsenMove::MulBAInv => "b->bA",
        }
    }

    /// Applies the move to a whole word and freely reduces the image.
    pub fn apply(self, w: &Word) -> Word {
        let mut letters = Vec::with_capacity(2 * w.len());
        for &l in w.letters() {
            letters.extend(self.substitute(l));
        }
        Word::from_letters(letters).free_reduce()
    }
}

impl fmt::Display for NielsenMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

impl fmt::Display for AbelianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{} {}; {} {}]", self.a, self.b, self.c, self.d)
    }
}

/// A composition of Nielsen moves, stored in application order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FreeAutomorphism {
    pub moves: Vec<NielsenMove>,
}

impl FreeAutomorphism {
    pub fn identity() -> FreeAutomorphism {
        FreeAutomorphism::default()
    }

    pub fn apply(&self, w: &Word) -> Word {
        let mut out = w.free_reduce();
        for &m in &self.moves {
            out = m.apply(&out);
        }
        out
    }

    /// Product of the moves' induced matrices, last-applied leftmost, so that
    /// `exponent_sums(self.apply(w)) = self.matrix() · exponent_sums(w)`.
    pub fn matrix(&self) -> AbelianMatrix {
        self.moves
            .iter()
            .rev()
            .fold(AbelianMatrix::identity(), |acc, m| acc.mul(&m.matrix()))
    }
}

/// Iterative extended Euclid on `(|s|, |t|)` with signs fixed up afterwards:
/// returns `(d, p, q)` with `d = gcd(s, t) ≥ 0` and `p·s + q·t = d`. The
/// coefficients are automatically coprime. Degenerate input `(0, 0)` yields
/// `(0, 1, 0)`.
pub fn extended_gcd(s: i64, t: i64) -> (i64, i64, i64) {
    let (mut old_r, mut r) = (s.abs(), t.abs());
    let (mut old_p, mut p) = (1_i64, 0_i64);
    let (mut old_q, mut q) = (0_i64, 1_i64);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_p, p) = (p, old_p - quot * p);
        (old_q, q) = (q, old_q - quot * q);
    }
    if s < 0 {
        old_p = -old_p;
    }
    if t < 0 {
        old_q = -old_q;
    }
    (old_r, old_p, old_q)
}

/// A unimodular matrix carrying the exponent sums `(sum_a, sum_b)` to a
/// special pair (first entry dividing the second).
///
/// Already-special shapes get the cheapest matrix: `sum_b = 0` (which covers
/// `(0,0)`) maps to the identity, and `sum_a = 0` with `sum_b ≠ 0` to the
/// coordinate swap. Otherwise the top row is the Bézout pair `(p, q)` with
/// `p·sum_a + q·sum_b = gcd`, so the image `a`-sum is the gcd, which divides
/// every integer combination of the two sums — in particular the image
/// `b`-sum, whatever the bottom row. The bottom row `(t, r)` solves
/// `p·r − q·t = 1` (determinant +1): `(t, r) = (0, p)` when `p = ±1`, else
/// the solution minimizing `(|r|, |t|, r, t)` lexicographically — an
/// arbitrary but fixed tie-break, so the matrix is deterministic.
pub fn specializing_matrix(sums: (i64, i64)) -> AbelianMatrix {
    let (sum_a, sum_b) = sums;
    if sum_b == 0 {
        return AbelianMatrix::identity();
    }
    if sum_a == 0 {
        return AbelianMatrix::swap();
    }
    let (_, p, q) = extended_gcd(sum_a, sum_b);
    let (t, r) = if p.abs() == 1 {
        (0, p)
    } else {
        // gcd(p, q) = 1 and |p| ≥ 2 force q ≠ 0. Solve p·r − q·t = 1 from a
        // Bézout witness for (p, q); the solution family is
        // (r₀ + k·q, t₀ + k·p), and |r| is minimized near k = −r₀/q.
        let (_, u, v) = extended_gcd(p, q);
        let (r0, t0) = (u, -v);
        let center = -r0 / q;
        let mut best: Option<((i64, i64, i64, i64), (i64, i64))> = None;
        for k in (center - 2)..=(center + 2) {
            let (rk, tk) = (r0 + k * q, t0 + k * p);
            let key = (rk.abs(), tk.abs(), rk, tk);
            if best.as_ref().map_or(true, |(bk, _)| key < *bk) {
                best = Some((key, (tk, rk)));
            }
        }
        best.unwrap().1
    };
    let m = AbelianMatrix::new(p, q, t, r);
    debug_assert_eq!(m.det(), 1);
    m
}

/// Writes a unimodular matrix as a product of Nielsen-move matrices,
/// returning the automorphism (moves in application order) whose
/// [`FreeAutomorphism::matrix`] reproduces the input exactly.
pub fn decompose_to_nielsen(m: &AbelianMatrix) -> Result<FreeAutomorphism, AutoError> {
    if !m.is_unimodular() {
        return Err(AutoError::NotUnimodular(m.det()));
    }
    let mut cur = *m;
    // Reduce to the identity by left-multiplied row operations; applying the
    // inverse of a move's matrix while recording the move means the recorded
    // list, reversed into application order, multiplies back to the input.
    let mut recorded: Vec<NielsenMove> = Vec::new();
    let row1_plus_row2 = |cur: &mut AbelianMatrix, rec: &mut Vec<NielsenMove>| {
        cur.a += cur.c;
        cur.b += cur.d;
        rec.push(NielsenMove::MulBAInv);
    };
    let row1_minus_row2 = |cur: &mut AbelianMatrix, rec: &mut Vec<NielsenMove>| {
        cur.a -= cur.c;
        cur.b -= cur.d;
        rec.push(NielsenMove::MulBA);
    };
    let row2_plus_row1 = |cur: &mut AbelianMatrix, rec: &mut Vec<NielsenMove>| {
        cur.c += cur.a;
        cur.d += cur.b;
        rec.push(NielsenMove::MulABInv);
    };
    let row2_minus_row1 = |cur: &mut AbelianMatrix, rec: &mut Vec<NielsenMove>| {
        cur.c -= cur.a;
        cur.d -= cur.b;
        rec.push(NielsenMove::MulAB);
    };
    let negate_row1 = |cur: &mut AbelianMatrix, rec: &mut Vec<NielsenMove>| {
        cur.a = -cur.a;
        cur.b = -cur.b;
        rec.push(NielsenMove::InvertA);
    };
    let negate_row2 = |cur: &mut AbelianMatrix, rec: &mut Vec<NielsenMove>| {
        cur.c = -cur.c;
        cur.d = -cur.d;
        rec.push(NielsenMove::InvertB);
    };
    let swap_rows = |cur: &mut AbelianMatrix, rec: &mut Vec<NielsenMove>| {
        row1_plus_row2(cur, rec);
        row2_minus_row1(cur, rec);
        row1_plus_row2(cur, rec);
        negate_row2(cur, rec);
    };
    // Euclid on the first column.
    while cur.c != 0 {
        if cur.a == 0 {
            swap_rows(&mut cur, &mut recorded);
            continue;
        }
        let quot = cur.c / cur.a;
        if quot == 0 {
            // |c| < |a|: bring the smaller entry on top and keep going.
            swap_rows(&mut cur, &mut recorded);
            continue;
        }
        for _ in 0..quot.unsigned_abs() {
            if quot > 0 {
                row2_minus_row1(&mut cur, &mut recorded);
            } else {
                row2_plus_row1(&mut cur, &mut recorded);
            }
        }
    }
    // Lower-triangular entry gone; the diagonal is now ±1.
    if cur.a < 0 {
        negate_row1(&mut cur, &mut recorded);
    }
    if cur.d < 0 {
        negate_row2(&mut cur, &mut recorded);
    }
    for _ in 0..cur.b.unsigned_abs() {
        if cur.b > 0 {
            row1_minus_row2(&mut cur, &mut recorded);
        } else {
            row1_plus_row2(&mut cur, &mut recorded);
        }
    }
    debug_assert_eq!(cur, AbelianMatrix::identity());
    recorded.reverse();
    let auto = FreeAutomorphism { moves: recorded };
    debug_assert_eq!(auto.matrix(), *m);
    Ok(auto)
}

/// The full pipeline: from any word representing a nontrivial element,
/// produce an automorphism and the weakly cyclically reduced core of its
/// image, which is guaranteed special and nonempty.
pub fn specialize(c: &Word) -> Result<(FreeAutomorphism, Word), AutoError> {
    let reduced = c.free_reduce();
    if reduced.is_empty() {
        return Err(AutoError::FreelyTrivial);
    }
    let m = specializing_matrix(reduced.exponent_sums());
    let auto = decompose_to_nielsen(&m)?;
    let image = auto.apply(&reduced);
    let (core, _) = image.cyclically_reduce();
    debug_assert!(!core.is_empty());
    debug_assert!(core.is_special());
    Ok((auto, core))
}
