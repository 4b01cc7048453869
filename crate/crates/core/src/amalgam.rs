//! Words over the two amalgamated factors and their induced action.
//!
//! The group being realized is the free product of two rank-2 free groups,
//! amalgamated over the cyclic subgroup generated by `c`: the first copy's
//! generators act as `alpha` and `beta`, the second copy's as their
//! conjugates by `sigma`. Letters `a b` (and inverses `A B`) spell the first
//! factor, `x y X Y` the second, with `x` over `a` and `y` over `b`.
//!
//! Every element has an alternating form `c^k · s_r ⋯ s_1` (rightmost
//! applied first) where consecutive syllables come from different factors
//! and no syllable lies in `⟨c⟩`; [`to_alternating`] computes it by free
//! reduction, merging, and migrating `c`-powers outward. The amalgamated
//! relation — `c` spelled in either factor acts identically — is what makes
//! the migration sound, and it is checked on points rather than assumed
//! wherever the engine certifies a form.

use std::fmt;

use thiserror::Error;

use crate::engine::ConstructionState;
use crate::perm::{evaluate_word, Point};
use crate::words::{enumerate_reduced, Letter, Word, WordError};

/// Which free factor a letter or syllable belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Factor {
    F1,
    F2,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::F1 => Factor::F2,
            Factor::F2 => Factor::F1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct AmalgamLetter {
    pub factor: Factor,
    pub letter: Letter,
}

impl AmalgamLetter {
    fn to_char(self) -> char {
        let base = self.letter.to_char();
        match self.factor {
            Factor::F1 => base,
            Factor::F2 => match base {
                'a' => 'x',
                'A' => 'X',
                'b' => 'y',
                'B' => 'Y',
                _ => unreachable!(),
            },
        }
    }

    fn from_char(ch: char) -> Result<AmalgamLetter, WordError> {
        let (factor, base) = match ch {
            'a' | 'A' | 'b' | 'B' => (Factor::F1, ch),
            'x' => (Factor::F2, 'a'),
            'X' => (Factor::F2, 'A'),
            'y' => (Factor::F2, 'b'),
            'Y' => (Factor::F2, 'B'),
            other => return Err(WordError::BadCharacter(other)),
        };
        let letter = Letter::from_char(base).ok_or(WordError::BadCharacter(ch))?;
        Ok(AmalgamLetter { factor, letter })
    }
}

/// A word over both factors, stored in application order (index 0 acts
/// first) and displayed in composition order, like [`Word`].
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct AmalgamWord {
    letters: Vec<AmalgamLetter>,
}

impl AmalgamWord {
    pub fn empty() -> AmalgamWord {
        AmalgamWord::default()
    }

    pub fn from_letters(letters: Vec<AmalgamLetter>) -> AmalgamWord {
        AmalgamWord { letters }
    }

    pub fn letters(&self) -> &[AmalgamLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn parse(text: &str) -> Result<AmalgamWord, WordError> {
        let trimmed = text.trim();
        if trimmed == "1" {
            return Ok(AmalgamWord::empty());
        }
        let mut letters = Vec::with_capacity(trimmed.len());
        for ch in trimmed.chars().rev() {
            if ch.is_whitespace() {
                continue;
            }
            letters.push(AmalgamLetter::from_char(ch)?);
        }
        Ok(AmalgamWord { letters })
    }

    /// Tags every letter of a plain word with one factor.
    pub fn lift(word: &Word, factor: Factor) -> AmalgamWord {
        AmalgamWord {
            letters: word
                .letters()
                .iter()
                .map(|&letter| AmalgamLetter { factor, letter })
                .collect(),
        }
    }

    /// Appends `later`, to be applied after all of `self`.
    pub fn then(&self, later: &AmalgamWord) -> AmalgamWord {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&later.letters);
        AmalgamWord { letters }
    }

    /// Maximal runs of same-factor letters, in application order.
    pub fn runs(&self) -> Vec<(Factor, Word)> {
        let mut out: Vec<(Factor, Vec<Letter>)> = Vec::new();
        for l in &self.letters {
            match out.last_mut() {
                Some((factor, run)) if *factor == l.factor => run.push(l.letter),
                _ => out.push((l.factor, vec![l.letter])),
            }
        }
        out.into_iter()
            .map(|(f, run)| (f, Word::from_letters(run)))
            .collect()
    }
}

impl fmt::Display for AmalgamWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in self.letters.iter().rev() {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

/// One block of an alternating form: a word in a single factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Syllable {
    pub factor: Factor,
    pub word: Word,
}

/// `c^{c_power} · s_r ⋯ s_1`, syllables stored in application order,
/// consecutive syllables in different factors, none a power of `c`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AlternatingForm {
    pub c_power: i64,
    pub syllables: Vec<Syllable>,
}

/// Where an amalgam word lands after normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NormalForm {
    Identity,
    PowerOfC(i64),
    Mixed(AlternatingForm),
}

impl AlternatingForm {
    /// Checks the shape: alternation, and syllables reduced, nonempty, and
    /// outside `⟨c⟩`.
    pub fn validate(&self, c: &Word) -> Result<(), String> {
        for (i, s) in self.syllables.iter().enumerate() {
            if s.word.is_empty() {
                return Err(format!("syllable {i} is empty"));
            }
            if !s.word.is_reduced() {
                return Err(format!("syllable {i} ({}) is not freely reduced", s.word));
            }
            if s.word.power_of(c).map_err(|e| e.to_string())?.is_some() {
                return Err(format!("syllable {i} ({}) is a power of {c}", s.word));
            }
            if i > 0 && self.syllables[i - 1].factor == s.factor {
                return Err(format!("syllables {} and {i} share a factor", i - 1));
            }
        }
        Ok(())
    }

    /// Compact one-line key: `<k>` for a pure power, otherwise
    /// `<k>|<factor>:<word>|…` with syllables in application order.
    pub fn token(&self) -> String {
        let mut out = self.c_power.to_string();
        for s in &self.syllables {
            let f = match s.factor {
                Factor::F1 => 1,
                Factor::F2 => 2,
            };
            out.push_str(&format!("|{f}:{}", s.word));
        }
        out
    }

    pub fn parse_token(token: &str) -> Result<AlternatingForm, String> {
        let mut parts = token.split('|');
        let c_power = parts
            .next()
            .and_then(|p| p.parse().ok())
            .ok_or_else(|| format!("bad form token head: {token}"))?;
        let mut syllables = Vec::new();
        for part in parts {
            let (f, word) = part
                .split_once(':')
                .ok_or_else(|| format!("bad syllable '{part}' in {token}"))?;
            let factor = match f {
                "1" => Factor::F1,
                "2" => Factor::F2,
                other => return Err(format!("bad factor '{other}' in {token}")),
            };
            let word = Word::parse(word).map_err(|e| format!("{token}: {e}"))?;
            syllables.push(Syllable { factor, word });
        }
        Ok(AlternatingForm { c_power, syllables })
    }

    /// Spells the form as a concrete amalgam word: syllables first (in
    /// application order), then the `c`-power in the first factor.
    pub fn to_amalgam_word(&self, c: &Word) -> AmalgamWord {
        let mut out = AmalgamWord::empty();
        for s in &self.syllables {
            out = out.then(&AmalgamWord::lift(&s.word, s.factor));
        }
        out.then(&AmalgamWord::lift(&c.pow(self.c_power), Factor::F1))
    }
}

/// Rewrites an amalgam word into its normal form relative to `c`: group into
/// runs, freely reduce and merge, and migrate `c`-power syllables toward the
/// applied-last end, absorbing them into their neighbor until none remain
/// inside. Each rewrite drops the syllable count, so this terminates.
pub fn to_alternating(w: &AmalgamWord, c: &Word) -> Result<NormalForm, WordError> {
    let mut c_power: i64 = 0;
    let mut syllables: Vec<Syllable> = w
        .runs()
        .into_iter()
        .map(|(factor, word)| Syllable { factor, word })
        .collect();
    'rewrite: loop {
        for s in &mut syllables {
            s.word = s.word.free_reduce();
        }
        for i in 0..syllables.len() {
            if syllables[i].word.is_empty() {
                syllables.remove(i);
                continue 'rewrite;
            }
        }
        for i in 0..syllables.len().saturating_sub(1) {
            if syllables[i].factor == syllables[i + 1].factor {
                let merged = syllables[i].word.then(&syllables[i + 1].word);
                syllables[i].word = merged;
                syllables.remove(i + 1);
                continue 'rewrite;
            }
        }
        for i in 0..syllables.len() {
            if let Some(k) = syllables[i].word.power_of(c)? {
                if i + 1 == syllables.len() {
                    c_power += k;
                    syllables.remove(i);
                } else {
                    // c^k lies in both factors, so absorb it into the next
                    // syllable (applied after it) regardless of factor.
                    syllables[i + 1].word = c.pow(k).then(&syllables[i + 1].word);
                    syllables.remove(i);
                }
                continue 'rewrite;
            }
        }
        break;
    }
    if syllables.is_empty() {
        return Ok(if c_power == 0 {
            NormalForm::Identity
        } else {
            NormalForm::PowerOfC(c_power)
        });
    }
    let form = AlternatingForm { c_power, syllables };
    debug_assert!(form.validate(c).is_ok());
    Ok(NormalForm::Mixed(form))
}

/// Applies an amalgam word to a point of the built action: first-factor runs
/// evaluate through `alpha`/`beta` directly, second-factor runs conjugate by
/// `sigma` (applied first, undone last).
pub fn act(state: &ConstructionState, w: &AmalgamWord, x: Point) -> Point {
    let mut p = x;
    for (factor, word) in w.runs() {
        match factor {
            Factor::F1 => {
                p = evaluate_word(&state.alpha, &word, p).0;
            }
            Factor::F2 => {
                p = state.sigma.eval_closed(p);
                p = evaluate_word(&state.alpha, &word, p).0;
                p = state.sigma.eval_inverse_closed(p);
            }
        }
    }
    p
}

/// Every alternating form with `c_power = 0`, between 1 and `max_syllables`
/// syllables, each syllable word reduced of length 1..=`max_word_len` and
/// outside `⟨c⟩`. Deterministic order: syllable count, then leading factor
/// (`F1` first), then the word tuple lexicographically (first-applied
/// syllable most significant).
pub fn enumerate_forms(
    max_syllables: usize,
    max_word_len: usize,
    c: &Word,
) -> Vec<AlternatingForm> {
    let mut pool: Vec<Word> = Vec::new();
    for len in 1..=max_word_len {
        for w in enumerate_reduced(len) {
            if w.power_of(c).expect("base word is nonempty").is_none() {
                pool.push(w);
            }
        }
    }
    let mut forms = Vec::new();
    if pool.is_empty() {
        return forms;
    }
    for n in 1..=max_syllables {
        for start in [Factor::F1, Factor::F2] {
            let mut indices = vec![0usize; n];
            loop {
                let mut factor = start;
                let syllables = indices
                    .iter()
                    .map(|&i| {
                        let s = Syllable {
                            factor,
                            word: pool[i].clone(),
                        };
                        factor = factor.other();
                        s
                    })
                    .collect();
                forms.push(AlternatingForm {
                    c_power: 0,
                    syllables,
                });
                // Odometer with the last syllable's index fastest.
                let mut pos = n;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    indices[pos] += 1;
                    if indices[pos] < pool.len() {
                        break;
                    }
                    indices[pos] = 0;
                }
                if indices.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
    }
    forms
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FaithfulnessError {
    #[error("no recorded witness for form {0}")]
    MissingWitness(String),
    #[error("witness for form {form} failed: point {x0} reaches {found}, recorded {expected}")]
    BrokenWitness {
        form: String,
        x0: Point,
        found: Point,
        expected: Point,
    },
}

/// Re-derives every witness for the forms within the given bounds through
/// the public action and reports them as `token\tpoint\timage` lines.
pub fn faithfulness_report(
    state: &ConstructionState,
    max_syllables: usize,
    max_word_len: usize,
) -> Result<String, FaithfulnessError> {
    let mut out = String::new();
    for form in enumerate_forms(max_syllables, max_word_len, &state.c) {
        let token = form.token();
        let &(x0, expected) = state
            .sigma_movers
            .get(&form)
            .ok_or_else(|| FaithfulnessError::MissingWitness(token.clone()))?;
        let found = act(state, &form.to_amalgam_word(&state.c), x0);
        if found != expected || found == x0 {
            return Err(FaithfulnessError::BrokenWitness {
                form: token,
                x0,
                found,
                expected,
            });
        }
        out.push_str(&format!("{token}\t{x0}\t{expected}\n"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine;
    use rand::{Rng, SeedableRng};

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    fn aw(s: &str) -> AmalgamWord {
        AmalgamWord::parse(s).unwrap()
    }

    #[test]
    fn parse_and_display_use_application_order() {
        let word = aw("ay");
        // Rightmost displayed letter acts first.
        assert_eq!(word.letters()[0].factor, Factor::F2);
        assert_eq!(word.letters()[1].factor, Factor::F1);
        assert_eq!(word.to_string(), "ay");
        assert_eq!(aw("1"), AmalgamWord::empty());
        assert_eq!(AmalgamWord::empty().to_string(), "1");
        assert_eq!(aw("xYXy aB").to_string(), "xYXyaB");
        assert!(matches!(
            AmalgamWord::parse("axq"),
            Err(WordError::BadCharacter('q'))
        ));
    }

    #[test]
    fn runs_group_consecutive_factors() {
        let runs = aw("aaxYb").runs();
        // Application order: b, then the factor-2 pair (as a plain word),
        // then a a.
        assert_eq!(runs.len(), 3);
        assert_eq!(runs[0], (Factor::F1, w("b")));
        assert_eq!(runs[1], (Factor::F2, w("aB")));
        assert_eq!(runs[2], (Factor::F1, w("aa")));
    }

    #[test]
    fn alternating_form_of_mixed_words() {
        let c = w("abAB");
        match to_alternating(&aw("ax"), &c).unwrap() {
            NormalForm::Mixed(form) => {
                assert_eq!(form.c_power, 0);
                assert_eq!(form.syllables.len(), 2);
                assert_eq!(form.syllables[0], Syllable { factor: Factor::F2, word: w("a") });
                assert_eq!(form.syllables[1], Syllable { factor: Factor::F1, word: w("a") });
            }
            other => panic!("expected mixed form, got {other:?}"),
        }
    }

    #[test]
    fn alternating_form_collapses_trivial_words() {
        let c = w("abAB");
        assert_eq!(to_alternating(&aw("xX"), &c).unwrap(), NormalForm::Identity);
        assert_eq!(to_alternating(&aw("1"), &c).unwrap(), NormalForm::Identity);
        // c spelled in the second factor is still just c.
        assert_eq!(
            to_alternating(&aw("xyXY"), &c).unwrap(),
            NormalForm::PowerOfC(1)
        );
        assert_eq!(
            to_alternating(&aw("abAB abAB"), &c).unwrap(),
            NormalForm::PowerOfC(2)
        );
    }

    #[test]
    fn c_powers_migrate_outward() {
        let c = w("abAB");
        // Innermost c in the second factor, applied before a factor-1 'a':
        // the power migrates out to the front.
        match to_alternating(&aw("a xyXY"), &c).unwrap() {
            NormalForm::Mixed(form) => {
                assert_eq!(form.c_power, 0);
                assert_eq!(form.syllables.len(), 1);
                // Applied-first c gets absorbed: the word is a·c.
                assert_eq!(form.syllables[0], Syllable { factor: Factor::F1, word: w("aabAB") });
            }
            other => panic!("expected mixed form, got {other:?}"),
        }
        // c applied last (displayed leftmost) becomes the leading power.
        match to_alternating(&aw("xyXY a"), &c).unwrap() {
            NormalForm::Mixed(form) => {
                assert_eq!(form.c_power, 1);
                assert_eq!(form.syllables.len(), 1);
                assert_eq!(form.syllables[0], Syllable { factor: Factor::F1, word: w("a") });
            }
            other => panic!("expected mixed form, got {other:?}"),
        }
    }

    #[test]
    fn form_tokens_round_trip() {
        let c = w("abAB");
        for form in enumerate_forms(2, 2, &c) {
            let token = form.token();
            assert_eq!(AlternatingForm::parse_token(&token).unwrap(), form, "{token}");
            assert!(!token.contains(char::is_whitespace));
        }
        let pure = AlternatingForm { c_power: -3, syllables: vec![] };
        assert_eq!(pure.token(), "-3");
        assert_eq!(AlternatingForm::parse_token("-3").unwrap(), pure);
        assert!(AlternatingForm::parse_token("0|3:a").is_err());
        assert!(AlternatingForm::parse_token("0|1").is_err());
        assert!(AlternatingForm::parse_token("q").is_err());
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        let c = w("abAB");
        let good = AlternatingForm {
            c_power: 0,
            syllables: vec![
                Syllable { factor: Factor::F1, word: w("a") },
                Syllable { factor: Factor::F2, word: w("b") },
            ],
        };
        assert!(good.validate(&c).is_ok());
        let same_factor = AlternatingForm {
            c_power: 0,
            syllables: vec![
                Syllable { factor: Factor::F1, word: w("a") },
                Syllable { factor: Factor::F1, word: w("b") },
            ],
        };
        assert!(same_factor.validate(&c).is_err());
        let unreduced = AlternatingForm {
            c_power: 0,
            syllables: vec![Syllable { factor: Factor::F1, word: Word::from_letters(
                vec![w("a").letters()[0], w("A").letters()[0]],
            ) }],
        };
        assert!(unreduced.validate(&c).is_err());
        let power = AlternatingForm {
            c_power: 0,
            syllables: vec![Syllable { factor: Factor::F2, word: w("abAB") }],
        };
        assert!(power.validate(&c).is_err());
    }

    #[test]
    fn spelled_forms_parse_back_to_themselves() {
        let c = w("abAB");
        for form in enumerate_forms(2, 2, &c) {
            let spelled = form.to_amalgam_word(&c);
            match to_alternating(&spelled, &c).unwrap() {
                NormalForm::Mixed(back) => assert_eq!(back, form, "{}", form.token()),
                other => panic!("form {} collapsed to {other:?}", form.token()),
            }
        }
    }

    #[test]
    fn enumeration_counts_and_order() {
        let c = w("abAB");
        let small = enumerate_forms(1, 1, &c);
        assert_eq!(small.len(), 8);
        // F1 forms come first, words in enumeration order starting at "a".
        assert_eq!(small[0].syllables[0].factor, Factor::F1);
        assert_eq!(small[0].syllables[0].word, w("a"));
        assert_eq!(small[4].syllables[0].factor, Factor::F2);
        let larger = enumerate_forms(2, 2, &c);
        // Pool: 16 reduced words of length ≤ 2 (no powers of c that short).
        assert_eq!(larger.len(), 2 * 16 + 2 * 16 * 16);
        // With c = a^2, the words a^±2 drop out of a length-2 pool.
        let pool_c = w("aa");
        let trimmed = enumerate_forms(1, 2, &pool_c);
        assert_eq!(trimmed.len(), 2 * 14);
    }

    #[test]
    fn action_respects_normalization() {
        let state = engine::run(&w("aa"), 2).unwrap();
        let c = state.c.clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let alphabet: Vec<char> = "aAbBxXyY".chars().collect();
        for _ in 0..60 {
            let len = rng.gen_range(0..8);
            let text: String = (0..len).map(|_| alphabet[rng.gen_range(0..8)]).collect();
            let word = if text.is_empty() { aw("1") } else { aw(&text) };
            let respelled = match to_alternating(&word, &c).unwrap() {
                NormalForm::Identity => AmalgamWord::empty(),
                NormalForm::PowerOfC(k) => AmalgamWord::lift(&c.pow(k), Factor::F1),
                NormalForm::Mixed(form) => form.to_amalgam_word(&c),
            };
            for x in [-3, 0, 5, 17, 40] {
                assert_eq!(
                    act(&state, &word, x),
                    act(&state, &respelled, x),
                    "word {word} vs {respelled} at {x}"
                );
            }
        }
    }

    #[test]
    fn faithfulness_report_covers_enumerated_forms() {
        let state = engine::run(&w("aa"), 1).unwrap();
        let report = faithfulness_report(&state, 1, 1).unwrap();
        assert_eq!(report.lines().count(), 8);
        for line in report.lines() {
            let mut cols = line.split('\t');
            let token = cols.next().unwrap();
            assert!(AlternatingForm::parse_token(token).is_ok());
            let x0: Point = cols.next().unwrap().parse().unwrap();
            let end: Point = cols.next().unwrap().parse().unwrap();
            assert_ne!(x0, end);
        }
        // Stage 1 has no two-syllable witnesses yet.
        assert!(matches!(
            faithfulness_report(&state, 2, 1),
            Err(FaithfulnessError::MissingWitness(_))
        ));
    }
}
