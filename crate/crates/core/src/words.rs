//! Reduced words over the two generators `a` and `b`.
//!
//! A word denotes a composition of partial maps, and compositions are read the
//! usual way: in the display string `"aBAb"` the rightmost letter acts first.
//! Internally the letters are stored in *application order* (index 0 is the
//! first letter to act), which makes evaluation a left-to-right fold; only
//! `Display` and the parser flip between the two conventions. Anything that
//! hands letters across module boundaries (`letters()`, graph gadgets, the
//! automorphism substitutions) speaks application order.

use std::fmt;

use thiserror::Error;

/// One of the two free generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    A,
    B,
}

/// Orientation of a letter: `Pos` is the generator itself, `Neg` its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn as_i64(self) -> i64 {
        match self {
            Sign::Pos => 1,
            Sign::Neg => -1,
        }
    }
}

/// A single signed generator. Ordering is `a < A < b < B`, matching the
/// enumeration order used everywhere words are listed deterministically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub gen: Gen,
    pub sign: Sign,
}

impl Letter {
    pub const fn new(gen: Gen, sign: Sign) -> Letter {
        Letter { gen, sign }
    }

    pub fn inverse(self) -> Letter {
        Letter::new(self.gen, self.sign.flip())
    }

    pub fn to_char(self) -> char {
        match (self.gen, self.sign) {
            (Gen::A, Sign::Pos) => 'a',
            (Gen::A, Sign::Neg) => 'A',
            (Gen::B, Sign::Pos) => 'b',
            (Gen::B, Sign::Neg) => 'B',
        }
    }

    pub fn from_char(ch: char) -> Option<Letter> {
        match ch {
            'a' => Some(Letter::new(Gen::A, Sign::Pos)),
            'A' => Some(Letter::new(Gen::A, Sign::Neg)),
            'b' => Some(Letter::new(Gen::B, Sign::Pos)),
            'B' => Some(Letter::new(Gen::B, Sign::Neg)),
            _ => None,
        }
    }
}

/// All four letters in enumeration order.
pub const ALPHABET: [Letter; 4] = [
    Letter::new(Gen::A, Sign::Pos),
    Letter::new(Gen::A, Sign::Neg),
    Letter::new(Gen::B, Sign::Pos),
    Letter::new(Gen::B, Sign::Neg),
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("unrecognized character '{0}' in word")]
    BadCharacter(char),
    #[error("malformed syllable '{0}'")]
    BadSyllable(String),
    #[error("power test against the empty word")]
    EmptyBase,
}

/// A word in the two generators, stored as letters in application order.
/// The empty word is the identity map.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Word {
        Word::default()
    }

    /// Builds a word from letters given in application order, verbatim.
    pub fn from_letters(letters: Vec<Letter>) -> Word {
        Word { letters }
    }

    /// Letters in application order: `letters()[0]` acts first.
    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Parses either compact form (`"aBAb"`, rightmost letter acts first;
    /// `"1"` is the identity) or syllable form (`"a^2 b^-1"`: whitespace-
    /// separated tokens, each one letter with an optional nonzero exponent).
    pub fn parse(input: &str) -> Result<Word, WordError> {
        let trimmed = input.trim();
        if trimmed == "1" {
            return Ok(Word::empty());
        }
        if trimmed.contains(char::is_whitespace) || trimmed.contains('^') {
            return Word::parse_syllables(trimmed);
        }
        let mut letters = Vec::with_capacity(trimmed.len());
        for ch in trimmed.chars().rev() {
            letters.push(Letter::from_char(ch).ok_or(WordError::BadCharacter(ch))?);
        }
        Ok(Word { letters })
    }

    fn parse_syllables(input: &str) -> Result<Word, WordError> {
        let tokens: Vec<&str> = input.split_whitespace().collect();
        let mut letters = Vec::new();
        // Tokens read left to right name the last-applied syllable first.
        for token in tokens.into_iter().rev() {
            let (head, exp) = match token.split_once('^') {
                Some((head, tail)) => {
                    let exp: i64 = tail
                        .parse()
                        .map_err(|_| WordError::BadSyllable(token.to_string()))?;
                    (head, exp)
                }
                None => (token, 1),
            };
            let mut chars = head.chars();
            let (ch, rest) = (chars.next(), chars.next());
            let base = match (ch, rest) {
                (Some(ch), None) => {
                    Letter::from_char(ch).ok_or(WordError::BadSyllable(token.to_string()))?
                }
                _ => return Err(WordError::BadSyllable(token.to_string())),
            };
            if exp == 0 {
                return Err(WordError::BadSyllable(token.to_string()));
            }
            let letter = if exp < 0 { base.inverse() } else { base };
            for _ in 0..exp.unsigned_abs() {
                letters.push(letter);
            }
        }
        Ok(Word { letters })
    }

    /// The inverse word: letters reversed and individually inverted.
    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Concatenation in application order: `self` acts first, then `later`.
    /// As group elements this is the product `later · self`.
    pub fn then(&self, later: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&later.letters);
        Word { letters }
    }

    /// The literal `k`-th power (no free reduction; negative `k` powers the
    /// inverse).
    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(self.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        Word { letters }
    }

    /// Cancels adjacent inverse pairs until none remain.
    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Word { letters: stack }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters
            .windows(2)
            .all(|pair| pair[1] != pair[0].inverse())
    }

    /// No cancellation across the wrap-around: the last-applied letter is not
    /// the inverse of the first-applied one. Words of length at most one (the
    /// identity included) qualify.
    pub fn is_weakly_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.letters.first(), self.letters.last()) {
                (Some(&first), Some(&last)) if self.letters.len() >= 2 => last != first.inverse(),
                _ => true,
            }
    }

    /// Splits `w` as `conj ∘ core ∘ conj⁻¹` with `core` weakly cyclically
    /// reduced; the concatenation reassembles the reduced form of `w` letter
    /// for letter. Reduces first, so any word is accepted.
    pub fn cyclically_reduce(&self) -> (Word, Word) {
        let reduced = self.free_reduce();
        let ls = &reduced.letters;
        let mut i = 0;
        let mut j = ls.len();
        // Each stripped layer contributes the inverse of the current
        // first-applied letter to the conjugator, outermost layer first.
        let mut stripped = Vec::new();
        while j - i >= 2 && ls[j - 1] == ls[i].inverse() {
            stripped.push(ls[i].inverse());
            i += 1;
            j -= 1;
        }
        let core = Word {
            letters: ls[i..j].to_vec(),
        };
        stripped.reverse();
        (core, Word { letters: stripped })
    }

    /// Net exponent of each generator, as `(sum_a, sum_b)`.
    pub fn exponent_sums(&self) -> (i64, i64) {
        let mut sums = (0_i64, 0_i64);
        for &l in &self.letters {
            match l.gen {
                Gen::A => sums.0 += l.sign.as_i64(),
                Gen::B => sums.1 += l.sign.as_i64(),
            }
        }
        sums
    }

    /// A word is special when its exponent sums are both zero, or the `a`-sum
    /// is nonzero and divides the `b`-sum.
    pub fn is_special(&self) -> bool {
        sums_are_special(self.exponent_sums())
    }

    /// Conjugacy test: both cyclic cores are rotations of each other.
    pub fn are_conjugate(&self, other: &Word) -> bool {
        let (u, _) = self.cyclically_reduce();
        let (v, _) = other.cyclically_reduce();
        cores_conjugate(u.letters(), v.letters())
    }

    /// If `self` is a literal power of `base` (or of its inverse), returns the
    /// exponent, with the empty word counting as the zeroth power. `self` must
    /// be reduced and `base` weakly cyclically reduced, so no cancellation can
    /// hide a match. Errors only on an empty `base`.
    pub fn power_of(&self, base: &Word) -> Result<Option<i64>, WordError> {
        if base.is_empty() {
            return Err(WordError::EmptyBase);
        }
        if self.is_empty() {
            return Ok(Some(0));
        }
        if self.len() % base.len() != 0 {
            return Ok(None);
        }
        let k = (self.len() / base.len()) as i64;
        if self.letters == base.pow(k).letters {
            Ok(Some(k))
        } else if self.letters == base.pow(-k).letters {
            Ok(Some(-k))
        } else {
            Ok(None)
        }
    }

    /// Maximal runs of a single generator, in application order, as
    /// `(generator, signed exponent)` pairs.
    pub fn syllables(&self) -> Vec<(Gen, i64)> {
        let mut out: Vec<(Gen, i64)> = Vec::new();
        for &l in &self.letters {
            match out.last_mut() {
                Some((gen, exp)) if *gen == l.gen => *exp += l.sign.as_i64(),
                _ => out.push((l.gen, l.sign.as_i64())),
            }
        }
        out
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return f.write_str("1");
        }
        for &l in self.letters.iter().rev() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// See [`Word::is_special`]; exposed for callers that already hold the sums.
pub fn sums_are_special(sums: (i64, i64)) -> bool {
    sums == (0, 0) || (sums.0 != 0 && sums.1 % sums.0 == 0)
}

/// Rotation comparison of two already-cyclically-reduced cores, without
/// allocating. Used directly by sweeps that precompute their cores.
pub fn cores_conjugate(u: &[Letter], v: &[Letter]) -> bool {
    if u.len() != v.len() {
        return false;
    }
    let n = u.len();
    if n == 0 {
        return true;
    }
    (0..n).any(|shift| (0..n).all(|i| u[(shift + i) % n] == v[i]))
}

/// All reduced words of exactly the given length, in lexicographic order of
/// their application-order letter sequences (`a < A < b < B`).
pub fn enumerate_reduced(len: usize) -> Vec<Word> {
    let mut out = Vec::new();
    let mut prefix = Vec::with_capacity(len);
    fn rec(prefix: &mut Vec<Letter>, remaining: usize, out: &mut Vec<Word>) {
        if remaining == 0 {
            out.push(Word::from_letters(prefix.clone()));
            return;
        }
        for l in ALPHABET {
            if prefix.last() == Some(&l.inverse()) {
                continue;
            }
            prefix.push(l);
            rec(prefix, remaining - 1, out);
            prefix.pop();
        }
    }
    rec(&mut prefix, len, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn parse_stores_application_order() {
        let word = w("aBAb");
        let chars: Vec<char> = word.letters().iter().map(|l| l.to_char()).collect();
        // Rightmost display letter acts first.
        assert_eq!(chars, vec!['b', 'A', 'B', 'a']);
        assert_eq!(word.to_string(), "aBAb");
    }

    #[test]
    fn parse_identity_and_errors() {
        assert_eq!(w("1"), Word::empty());
        assert_eq!(Word::empty().to_string(), "1");
        assert_eq!(Word::parse("axb"), Err(WordError::BadCharacter('x')));
        assert!(matches!(
            Word::parse("a^0"),
            Err(WordError::BadSyllable(_))
        ));
        assert!(matches!(
            Word::parse("ab^2"),
            Err(WordError::BadSyllable(_))
        ));
    }

    #[test]
    fn syllable_form_matches_compact_form() {
        assert_eq!(w("a^2 b^-1"), w("aaB"));
        assert_eq!(w("A^2"), w("AA"));
        assert_eq!(w("b a"), w("ba"));
        assert_eq!(w("a^3 b^2 A"), w("aaabbA"));
    }

    #[test]
    fn inverse_and_concatenation() {
        assert_eq!(w("ab").inverse().to_string(), "BA");
        // `then` applies the receiver first: b then a composes to the
        // display product "ab".
        assert_eq!(w("b").then(&w("a")), w("ab"));
        assert_eq!(w("ab").pow(2), w("abab"));
        assert_eq!(w("ab").pow(-2), w("BABA"));
        assert_eq!(w("ab").pow(0), Word::empty());
    }

    #[test]
    fn free_reduction() {
        assert_eq!(w("aA").free_reduce(), Word::empty());
        assert_eq!(w("abBA").free_reduce(), Word::empty());
        assert_eq!(w("abAB").free_reduce(), w("abAB"));
        assert_eq!(w("abBb").free_reduce(), w("ab"));
        assert!(w("abAB").is_reduced());
        assert!(!w("aA").is_reduced());
    }

    #[test]
    fn cyclic_reduction_examples() {
        // Conjugate of a by b^-1: strips to core a with conjugator b^-1.
        assert_eq!(w("Bab").cyclically_reduce(), (w("a"), w("B")));
        // Two layers: conjugator comes out as b^-2.
        assert_eq!(w("BBabb").cyclically_reduce(), (w("a"), w("BB")));
        // Already weakly cyclically reduced words pass through untouched.
        assert_eq!(w("abAB").cyclically_reduce(), (w("abAB"), Word::empty()));
        assert_eq!(Word::empty().cyclically_reduce(), (Word::empty(), Word::empty()));
    }

    #[test]
    fn weak_cyclic_reduction_predicate() {
        assert!(w("abAB").is_weakly_cyclically_reduced());
        assert!(w("a").is_weakly_cyclically_reduced());
        assert!(Word::empty().is_weakly_cyclically_reduced());
        // aba^-1 cancels around the wrap.
        assert!(!w("abA").is_weakly_cyclically_reduced());
        // Unreduced words never qualify.
        assert!(!w("aAb").is_weakly_cyclically_reduced());
        // b·a·b is fine: first-applied b, last-applied b, no inverse pair.
        assert!(w("bab").is_weakly_cyclically_reduced());
    }

    #[test]
    fn cyclic_reduction_reassembles_literally() {
        // Over every reduced word of length <= 5: the decomposition
        // conj⁻¹-first concatenation rebuilds the word with no cancellation,
        // and the core is weakly cyclically reduced.
        for len in 0..=5 {
            for word in enumerate_reduced(len) {
                let (core, conj) = word.cyclically_reduce();
                assert!(core.is_weakly_cyclically_reduced(), "word {word}");
                let rebuilt = conj.inverse().then(&core).then(&conj);
                assert_eq!(rebuilt.letters(), word.letters(), "word {word}");
                // The strip count is maximal: stripping further would need
                // the core to still wrap-cancel.
                assert_eq!(core.len() + 2 * conj.len(), word.len(), "word {word}");
            }
        }
    }

    #[test]
    fn exponent_sums_and_special_words() {
        assert_eq!(w("abAB").exponent_sums(), (0, 0));
        assert_eq!(w("aaB").exponent_sums(), (2, -1));
        assert!(w("abAB").is_special());
        assert!(w("ab").is_special());
        assert!(w("abb").is_special());
        assert!(!w("aab").is_special());
        // Nonzero b-sum with zero a-sum is not special.
        assert!(!w("b").is_special());
        assert!(w("a").is_special());
        assert!(Word::empty().is_special());
    }

    #[test]
    fn conjugacy() {
        assert!(w("ab").are_conjugate(&w("ba")));
        assert!(!w("ab").are_conjugate(&w("aB")));
        // Conjugated spellings of the same element.
        assert!(w("Babb").are_conjugate(&w("ab")));
        assert!(w("abAB").are_conjugate(&w("bABa")));
        assert!(!w("ab").are_conjugate(&w("abb")));
        assert!(Word::empty().are_conjugate(&w("aA").free_reduce()));
    }

    #[test]
    fn power_detection() {
        let c = w("ab");
        assert_eq!(w("abab").power_of(&c), Ok(Some(2)));
        assert_eq!(w("BABA").power_of(&c), Ok(Some(-2)));
        assert_eq!(w("ab").power_of(&c), Ok(Some(1)));
        assert_eq!(w("a").power_of(&c), Ok(None));
        assert_eq!(w("abba").power_of(&c), Ok(None));
        assert_eq!(Word::empty().power_of(&c), Ok(Some(0)));
        assert_eq!(w("a").power_of(&Word::empty()), Err(WordError::EmptyBase));
    }

    #[test]
    fn syllable_grouping() {
        assert_eq!(w("aaB").syllables(), vec![(Gen::B, -1), (Gen::A, 2)]);
        assert_eq!(Word::empty().syllables(), vec![]);
        assert_eq!(
            w("abAB").syllables(),
            vec![(Gen::B, -1), (Gen::A, -1), (Gen::B, 1), (Gen::A, 1)]
        );
    }

    #[test]
    fn enumeration_counts_and_order() {
        assert_eq!(enumerate_reduced(0), vec![Word::empty()]);
        assert_eq!(enumerate_reduced(1).len(), 4);
        assert_eq!(enumerate_reduced(2).len(), 12);
        assert_eq!(enumerate_reduced(3).len(), 36);
        for word in enumerate_reduced(4) {
            assert!(word.is_reduced());
        }
        // First length-2 word in order: a then a.
        assert_eq!(enumerate_reduced(2)[0], w("aa"));
        let words = enumerate_reduced(3);
        let mut sorted = words.clone();
        sorted.sort();
        assert_eq!(words, sorted);
    }

    #[test]
    fn display_parse_round_trip() {
        for len in 0..=4 {
            for word in enumerate_reduced(len) {
                assert_eq!(Word::parse(&word.to_string()).unwrap(), word);
            }
        }
    }
}
