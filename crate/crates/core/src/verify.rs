//! Independent re-checking of a loaded state.
//!
//! Every promise a state makes — witness triples, certified fixed points,
//! Følner ratios, transposition structure, movers — is re-derived here from
//! the stored assignments alone, using strict evaluation wherever the
//! original certification was strict. The checks never consult the log
//! except in the full level's replay, so a state file stands or falls on
//! its own content.

use std::collections::BTreeSet;

use crate::amalgam;
use crate::engine::{self, ConstructionState, Requirement};
use crate::perm::{evaluate_word, evaluate_word_strict, Point};
use crate::statefile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// Content checks only.
    Quick,
    /// Content checks plus log replay and transitivity reachability.
    Full,
}

/// One named check and its outcome. On success the string reports how much
/// material the check covered; on failure it describes the first violation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckLine {
    pub name: &'static str,
    pub outcome: Result<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub lines: Vec<CheckLine>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.lines.iter().all(|l| l.outcome.is_ok())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for line in &self.lines {
            match &line.outcome {
                Ok(detail) => out.push_str(&format!("ok   {}: {detail}\n", line.name)),
                Err(msg) => out.push_str(&format!("FAIL {}: {msg}\n", line.name)),
            }
        }
        out
    }
}

fn check_loader_defects(defects: &[String]) -> Result<String, String> {
    if defects.is_empty() {
        Ok("no defects".to_string())
    } else {
        Err(defects.join("; "))
    }
}

fn check_injection(state: &ConstructionState) -> Result<String, String> {
    // assign() maintains the mirror map; re-derive injectivity from the
    // entries themselves so a hand-edited state cannot smuggle a collision.
    for space in [&state.alpha, &state.sigma] {
        let mut images = BTreeSet::new();
        for (_, y) in space.map.iter() {
            if !images.insert(y) {
                return Err(format!("image {y} has two sources"));
            }
        }
        for (x, y) in space.map.iter() {
            if space.map.preimage_of(y) != Some(x) {
                return Err(format!("mirror entry for {x} -> {y} is wrong"));
            }
        }
    }
    Ok(format!(
        "{} entries",
        state.alpha.map.len() + state.sigma.map.len()
    ))
}

fn check_sigma_involution(state: &ConstructionState) -> Result<String, String> {
    for (u, v) in state.sigma.map.iter() {
        if state.sigma.map.image_of(v) != Some(u) {
            return Err(format!("sigma moves {u} to {v} but not {v} back to {u}"));
        }
    }
    Ok(format!("{} assignments", state.sigma.map.len()))
}

fn check_pins_disjoint(state: &ConstructionState) -> Result<String, String> {
    for (name, space) in [("alpha", &state.alpha), ("sigma", &state.sigma)] {
        for p in space.pins.iter() {
            if space.map.contains_domain(p) || space.map.contains_image(p) {
                return Err(format!("{name} pin at {p} overlaps an assignment"));
            }
        }
    }
    Ok(format!(
        "{} pins",
        state.alpha.pins.len() + state.sigma.pins.len()
    ))
}

fn check_witness_pool(state: &ConstructionState) -> Result<String, String> {
    let mut anchors = BTreeSet::new();
    let mut triple_count = 0usize;
    for (word, triples) in &state.witness_pool {
        triple_count += triples.len();
        for t in triples {
            if t.word != *word {
                return Err(format!("triple for {word} recorded under {}", t.word));
            }
            for p in [t.x, t.wx] {
                match evaluate_word_strict(&state.alpha, &state.c, p) {
                    Ok(q) if q == p => {}
                    Ok(q) => return Err(format!("{word}: anchor {p} moves to {q} under c")),
                    Err(e) => return Err(format!("{word}: anchor {p}: {e}")),
                }
                if !anchors.insert(p) {
                    return Err(format!("anchor {p} appears twice in the pool"));
                }
            }
            match evaluate_word_strict(&state.alpha, word, t.x) {
                Ok(q) if q == t.wx => {}
                Ok(q) => return Err(format!("{word} sends {} to {q}, recorded {}", t.x, t.wx)),
                Err(e) => return Err(format!("{word} at {}: {e}", t.x)),
            }
        }
    }
    Ok(format!(
        "{} triples for {} words",
        triple_count,
        state.witness_pool.len()
    ))
}

fn check_certified_fixc(state: &ConstructionState) -> Result<String, String> {
    for &p in &state.certified_fix_c {
        match evaluate_word_strict(&state.alpha, &state.c, p) {
            Ok(q) if q == p => {}
            Ok(q) => return Err(format!("certified point {p} moves to {q}")),
            Err(e) => return Err(format!("certified point {p}: {e}")),
        }
    }
    Ok(format!("{} points", state.certified_fix_c.len()))
}

fn check_folner_blocks(state: &ConstructionState) -> Result<String, String> {
    for (i, b) in state.folner_blocks.iter().enumerate() {
        if b.eps_den < 1 || b.eps_num < 0 {
            return Err(format!("block {i} has a malformed ratio"));
        }
        for p in b.points() {
            if !state.certified_fix_c.contains(&p) {
                return Err(format!("block {i} point {p} is not certified c-fixed"));
            }
        }
        let a: BTreeSet<Point> = b.points().collect();
        let alpha_a: BTreeSet<Point> = b.points().map(|p| state.alpha.eval_closed(p)).collect();
        let diff = a.symmetric_difference(&alpha_a).count() as i64;
        // |A △ alpha·A| ≤ (num/den)·|A|, compared without division.
        if diff * b.eps_den > b.eps_num * b.len() {
            return Err(format!(
                "block {i}: alpha difference {diff} exceeds {}/{} of {}",
                b.eps_num,
                b.eps_den,
                b.len()
            ));
        }
        let beta_a: BTreeSet<Point> = b.points().map(|p| p + 1).collect();
        if a.symmetric_difference(&beta_a).count() != 2 {
            return Err(format!("block {i} is not an interval under beta"));
        }
        if b.reserved {
            for p in b.points() {
                if !state.sigma.pins.contains(p) {
                    return Err(format!("reserved block {i} point {p} is not sigma-pinned"));
                }
                if state.sigma.eval_closed(p) != p {
                    return Err(format!("sigma moves reserved block {i} point {p}"));
                }
            }
        }
    }
    Ok(format!("{} blocks", state.folner_blocks.len()))
}

fn check_sigma_support(state: &ConstructionState) -> Result<String, String> {
    let mut battery: BTreeSet<Point> = state.sigma.map.iter().map(|(u, _)| u).collect();
    for &p in &state.certified_fix_c {
        battery.insert(p);
        break;
    }
    battery.extend(-10..=10);
    let step = (state.alpha.used_extent / 101).max(1);
    battery.extend((0..=state.alpha.used_extent).step_by(step as usize));
    for (u, _) in state.sigma.map.iter() {
        if !state.certified_fix_c.contains(&u) {
            return Err(format!("sigma support point {u} is not certified c-fixed"));
        }
    }
    let probes = battery.len();
    for x in battery {
        let lhs = state.sigma.eval_closed(evaluate_word(&state.alpha, &state.c, x).0);
        let rhs = evaluate_word(&state.alpha, &state.c, state.sigma.eval_closed(x)).0;
        if lhs != rhs {
            return Err(format!(
                "sigma and c disagree at {x}: sigma∘c gives {lhs}, c∘sigma gives {rhs}"
            ));
        }
    }
    Ok(format!("{probes} commutation probes"))
}

fn check_order_witnesses(state: &ConstructionState) -> Result<String, String> {
    let mut witness_count = 0usize;
    for (&k, pairs) in &state.order_witnesses {
        if k == 0 {
            return Err("witness recorded for the zeroth power".to_string());
        }
        witness_count += pairs.len();
        for &(z, end) in pairs {
            if z == end {
                return Err(format!("power {k} witness at {z} does not move"));
            }
            match evaluate_word_strict(&state.alpha, &state.c.pow(k), z) {
                Ok(q) if q == end => {}
                Ok(q) => return Err(format!("c^{k} sends {z} to {q}, recorded {end}")),
                Err(e) => return Err(format!("c^{k} at {z}: {e}")),
            }
        }
    }
    Ok(format!(
        "{} witnesses over {} powers",
        witness_count,
        state.order_witnesses.len()
    ))
}

fn check_sigma_movers(state: &ConstructionState) -> Result<String, String> {
    for (form, &(x0, end)) in &state.sigma_movers {
        let token = form.token();
        form.validate(&state.c)
            .map_err(|e| format!("form {token}: {e}"))?;
        if x0 == end {
            return Err(format!("mover for {token} does not move"));
        }
        let found = amalgam::act(state, &form.to_amalgam_word(&state.c), x0);
        if found != end {
            return Err(format!("form {token} sends {x0} to {found}, recorded {end}"));
        }
    }
    Ok(format!("{} movers", state.sigma_movers.len()))
}

fn check_log_replay(state: &ConstructionState) -> Result<String, String> {
    let replayed = engine::replay(&state.c, state.stages, &state.log)
        .map_err(|e| format!("replay aborted: {e}"))?;
    if statefile::serialize(&replayed) != statefile::serialize(state) {
        return Err("replaying the log yields a different state".to_string());
    }
    Ok(format!("{} entries", state.log.len()))
}

fn check_transitivity_classes(state: &ConstructionState) -> Result<String, String> {
    let mut seen = BTreeSet::new();
    for req in &state.log {
        let Requirement::Transitivity(n, m) = *req else {
            continue;
        };
        if !seen.insert((n, m)) {
            continue;
        }
        let classes = engine::transitivity_bfs(state, n, m, 0);
        if classes.len() as i64 != m {
            return Err(format!(
                "generators alpha^{n}, beta^{m} reach only {} of {m} classes",
                classes.len()
            ));
        }
    }
    Ok(format!("{} generator pairs", seen.len()))
}

/// Runs the battery against a state (with any loader defects) and collects
/// one line per check.
pub fn run_checks(state: &ConstructionState, defects: &[String], level: Level) -> Report {
    let mut lines = vec![
        CheckLine {
            name: "loader-defects",
            outcome: check_loader_defects(defects),
        },
        CheckLine {
            name: "maps-injective",
            outcome: check_injection(state),
        },
        CheckLine {
            name: "sigma-involution",
            outcome: check_sigma_involution(state),
        },
        CheckLine {
            name: "pins-disjoint",
            outcome: check_pins_disjoint(state),
        },
        CheckLine {
            name: "witness-pool",
            outcome: check_witness_pool(state),
        },
        CheckLine {
            name: "certified-fixc",
            outcome: check_certified_fixc(state),
        },
        CheckLine {
            name: "folner-blocks",
            outcome: check_folner_blocks(state),
        },
        CheckLine {
            name: "sigma-support",
            outcome: check_sigma_support(state),
        },
        CheckLine {
            name: "order-witnesses",
            outcome: check_order_witnesses(state),
        },
        CheckLine {
            name: "sigma-movers",
            outcome: check_sigma_movers(state),
        },
    ];
    if level == Level::Full {
        lines.push(CheckLine {
            name: "log-replay",
            outcome: check_log_replay(state),
        });
        lines.push(CheckLine {
            name: "transitivity-classes",
            outcome: check_transitivity_classes(state),
        });
    }
    Report { lines }
}
