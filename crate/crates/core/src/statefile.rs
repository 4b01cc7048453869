//! Plain-text persistence for construction states.
//!
//! The format is line-oriented and fully deterministic: a fixed sequence of
//! sections (`meta:`, `alpha:`, `sigma:`, `pinned:`, `fixc:`, `witness:`,
//! `folner:`, `order:`, `movers:`, `log:`), each holding sorted one-line
//! entries. Serializing a state, parsing it back, and serializing again
//! yields identical bytes.
//!
//! Two failure modes are kept deliberately distinct. Text that does not
//! follow the format at all — unknown sections, unparseable numbers — is a
//! [`StateFileError`]; there is no state to salvage. Text that parses but
//! contradicts itself (say, two `alpha` entries claiming the same source)
//! loads anyway: the loader keeps the first entry, drops the rest, and
//! records one human-readable defect per dropped entry, so a verification
//! pass can report exactly what is wrong instead of refusing to look.
//!
//! `sigma` pins are not stored: they are, by construction, exactly the
//! reserved Følner blocks, and the loader re-derives them from the `folner:`
//! section.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::engine::{ConstructionState, FolnerBlock, Requirement, WitnessTriple};
use crate::perm::{Point, Space};
use crate::words::Word;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StateFileError {
    #[error("state file has no content")]
    Empty,
    #[error("missing {0} entry in meta section")]
    MissingMeta(&'static str),
    #[error("unsupported format version {0}")]
    Version(String),
    #[error("line {0}: {1}")]
    Line(usize, String),
}

/// A structurally parsed state plus any semantic contradictions the loader
/// had to smooth over (empty for a healthy file).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedState {
    pub state: ConstructionState,
    pub defects: Vec<String>,
}

const SECTIONS: [&str; 10] = [
    "meta:", "alpha:", "sigma:", "pinned:", "fixc:", "witness:", "folner:", "order:", "movers:",
    "log:",
];

fn compress_ranges(points: impl Iterator<Item = Point>) -> Vec<(Point, Point)> {
    let mut out: Vec<(Point, Point)> = Vec::new();
    for p in points {
        match out.last_mut() {
            Some((_, hi)) if *hi + 1 == p => *hi = p,
            _ => out.push((p, p)),
        }
    }
    out
}

pub fn serialize(state: &ConstructionState) -> String {
    let mut out = String::new();
    out.push_str("meta:\n");
    out.push_str("version 1\n");
    out.push_str(&format!("c {}\n", state.c));
    out.push_str(&format!("stages {}\n", state.stages));
    out.push_str("alpha:\n");
    for (x, y) in state.alpha.map.iter() {
        out.push_str(&format!("{x} -> {y}\n"));
    }
    out.push_str("sigma:\n");
    for (x, y) in state.sigma.map.iter() {
        out.push_str(&format!("{x} -> {y}\n"));
    }
    out.push_str("pinned:\n");
    for (lo, hi) in state.alpha.pins.ranges() {
        out.push_str(&format!("{lo}..{hi}\n"));
    }
    out.push_str("fixc:\n");
    for (lo, hi) in compress_ranges(state.certified_fix_c.iter().copied()) {
        out.push_str(&format!("{lo}..{hi}\n"));
    }
    out.push_str("witness:\n");
    for triples in state.witness_pool.values() {
        for t in triples {
            out.push_str(&format!("{} {} {}\n", t.word, t.x, t.wx));
        }
    }
    out.push_str("folner:\n");
    for b in &state.folner_blocks {
        let r = if b.reserved { 1 } else { 0 };
        out.push_str(&format!(
            "{} {} {} {} {r}\n",
            b.lo, b.hi, b.eps_num, b.eps_den
        ));
    }
    out.push_str("order:\n");
    for (k, pairs) in &state.order_witnesses {
        for (z, end) in pairs {
            out.push_str(&format!("{k} {z} {end}\n"));
        }
    }
    out.push_str("movers:\n");
    for (form, (x0, end)) in &state.sigma_movers {
        out.push_str(&format!("{} {x0} {end}\n", form.token()));
    }
    out.push_str("log:\n");
    for req in &state.log {
        out.push_str(&req.log_line());
        out.push('\n');
    }
    out
}

struct Collected {
    version: Option<String>,
    c: Option<Word>,
    stages: Option<u32>,
    alpha: Vec<(Point, Point)>,
    sigma: Vec<(Point, Point)>,
    pinned: Vec<(Point, Point)>,
    fixc: Vec<(Point, Point)>,
    witness: Vec<WitnessTriple>,
    folner: Vec<FolnerBlock>,
    order: Vec<(i64, Point, Point)>,
    movers: Vec<(crate::amalgam::AlternatingForm, Point, Point)>,
    log: Vec<Requirement>,
}

fn parse_point(token: &str) -> Result<Point, String> {
    token
        .parse()
        .map_err(|_| format!("expected an integer, found '{token}'"))
}

fn parse_arrow(line: &str) -> Result<(Point, Point), String> {
    let (x, y) = line
        .split_once("->")
        .ok_or_else(|| format!("expected 'x -> y', found '{line}'"))?;
    Ok((parse_point(x.trim())?, parse_point(y.trim())?))
}

fn parse_range(line: &str) -> Result<(Point, Point), String> {
    let (lo, hi) = line
        .split_once("..")
        .ok_or_else(|| format!("expected 'lo..hi', found '{line}'"))?;
    let (lo, hi) = (parse_point(lo.trim())?, parse_point(hi.trim())?);
    if lo > hi {
        return Err(format!("empty range '{line}'"));
    }
    Ok((lo, hi))
}

pub fn parse(text: &str) -> Result<ParsedState, StateFileError> {
    let mut got = Collected {
        version: None,
        c: None,
        stages: None,
        alpha: Vec::new(),
        sigma: Vec::new(),
        pinned: Vec::new(),
        fixc: Vec::new(),
        witness: Vec::new(),
        folner: Vec::new(),
        order: Vec::new(),
        movers: Vec::new(),
        log: Vec::new(),
    };
    let mut section: Option<&str> = None;
    let mut any = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        any = true;
        let lineno = idx + 1;
        let fail = |msg: String| StateFileError::Line(lineno, msg);
        if let Some(&header) = SECTIONS.iter().find(|&&s| s == line) {
            section = Some(header);
            continue;
        }
        let Some(section) = section else {
            return Err(fail(format!("expected a section header, found '{line}'")));
        };
        match section {
            "meta:" => {
                let (key, value) = line
                    .split_once(' ')
                    .ok_or_else(|| fail(format!("bad meta entry '{line}'")))?;
                match key {
                    "version" => got.version = Some(value.trim().to_string()),
                    "c" => {
                        got.c = Some(
                            Word::parse(value.trim()).map_err(|e| fail(format!("base word: {e}")))?,
                        )
                    }
                    "stages" => {
                        got.stages = Some(
                            value
                                .trim()
                                .parse()
                                .map_err(|_| fail(format!("bad stage count '{value}'")))?,
                        )
                    }
                    other => return Err(fail(format!("unknown meta key '{other}'"))),
                }
            }
            "alpha:" => got.alpha.push(parse_arrow(line).map_err(fail)?),
            "sigma:" => got.sigma.push(parse_arrow(line).map_err(fail)?),
            "pinned:" => got.pinned.push(parse_range(line).map_err(fail)?),
            "fixc:" => got.fixc.push(parse_range(line).map_err(fail)?),
            "witness:" => {
                let mut cols = line.split_whitespace();
                let word = cols
                    .next()
                    .ok_or_else(|| fail("empty witness line".into()))
                    .and_then(|t| Word::parse(t).map_err(|e| fail(format!("witness word: {e}"))))?;
                let x = cols
                    .next()
                    .ok_or_else(|| fail(format!("truncated witness '{line}'")))
                    .and_then(|t| parse_point(t).map_err(fail))?;
                let wx = cols
                    .next()
                    .ok_or_else(|| fail(format!("truncated witness '{line}'")))
                    .and_then(|t| parse_point(t).map_err(fail))?;
                if cols.next().is_some() {
                    return Err(fail(format!("trailing tokens in witness '{line}'")));
                }
                got.witness.push(WitnessTriple { word, x, wx });
            }
            "folner:" => {
                let cols: Vec<&str> = line.split_whitespace().collect();
                if cols.len() != 5 {
                    return Err(fail(format!("expected 5 block fields, found '{line}'")));
                }
                let nums: Vec<i64> = cols
                    .iter()
                    .map(|t| parse_point(t))
                    .collect::<Result<_, _>>()
                    .map_err(fail)?;
                if nums[0] > nums[1] || nums[3] < 1 || !(nums[4] == 0 || nums[4] == 1) {
                    return Err(fail(format!("malformed block '{line}'")));
                }
                got.folner.push(FolnerBlock {
                    lo: nums[0],
                    hi: nums[1],
                    eps_num: nums[2],
                    eps_den: nums[3],
                    reserved: nums[4] == 1,
                });
            }
            "order:" => {
                let cols: Vec<&str> = line.split_whitespace().collect();
                if cols.len() != 3 {
                    return Err(fail(format!("expected 'k z end', found '{line}'")));
                }
                let nums: Vec<i64> = cols
                    .iter()
                    .map(|t| parse_point(t))
                    .collect::<Result<_, _>>()
                    .map_err(fail)?;
                got.order.push((nums[0], nums[1], nums[2]));
            }
            "movers:" => {
                let cols: Vec<&str> = line.split_whitespace().collect();
                if cols.len() != 3 {
                    return Err(fail(format!("expected 'form x0 end', found '{line}'")));
                }
                let form = crate::amalgam::AlternatingForm::parse_token(cols[0]).map_err(fail)?;
                let x0 = parse_point(cols[1]).map_err(fail)?;
                let end = parse_point(cols[2]).map_err(fail)?;
                got.movers.push((form, x0, end));
            }
            "log:" => got
                .log
                .push(Requirement::parse_log_line(line).map_err(fail)?),
            _ => unreachable!("section list is fixed"),
        }
    }
    if !any {
        return Err(StateFileError::Empty);
    }
    let version = got.version.ok_or(StateFileError::MissingMeta("version"))?;
    if version != "1" {
        return Err(StateFileError::Version(version));
    }
    let c = got.c.ok_or(StateFileError::MissingMeta("c"))?;
    let stages = got.stages.ok_or(StateFileError::MissingMeta("stages"))?;

    let mut defects = Vec::new();
    let mut alpha = Space::new();
    for (x, y) in got.alpha {
        if let Err(e) = alpha.assign(x, y) {
            defects.push(format!("alpha {x} -> {y} rejected: {e}"));
        }
    }
    for (lo, hi) in got.pinned {
        for p in lo..=hi {
            if let Err(e) = alpha.pin(p) {
                defects.push(format!("alpha pin {p} rejected: {e}"));
            }
        }
    }
    let mut sigma = Space::new();
    for (x, y) in got.sigma {
        if let Err(e) = sigma.assign(x, y) {
            defects.push(format!("sigma {x} -> {y} rejected: {e}"));
        }
    }
    // sigma pins live exactly on the reserved blocks.
    for b in got.folner.iter().filter(|b| b.reserved) {
        for p in b.lo..=b.hi {
            if let Err(e) = sigma.pin(p) {
                defects.push(format!("sigma pin {p} (reserved block) rejected: {e}"));
            }
        }
    }
    let mut certified_fix_c = BTreeSet::new();
    for (lo, hi) in got.fixc {
        certified_fix_c.extend(lo..=hi);
    }
    let mut witness_pool: std::collections::BTreeMap<Word, Vec<WitnessTriple>> =
        std::collections::BTreeMap::new();
    for t in got.witness {
        witness_pool.entry(t.word.clone()).or_default().push(t);
    }
    let mut order_witnesses: std::collections::BTreeMap<i64, Vec<(Point, Point)>> =
        std::collections::BTreeMap::new();
    for (k, z, end) in got.order {
        order_witnesses.entry(k).or_default().push((z, end));
    }
    let mut sigma_movers = std::collections::BTreeMap::new();
    for (form, x0, end) in got.movers {
        if let Some(&(px, pe)) = sigma_movers.get(&form) {
            if (px, pe) != (x0, end) {
                defects.push(format!(
                    "mover for {} rejected: already recorded as {px} {pe}",
                    form.token()
                ));
            }
            continue;
        }
        sigma_movers.insert(form, (x0, end));
    }
    let state = ConstructionState {
        c,
        alpha,
        sigma,
        certified_fix_c,
        witness_pool,
        folner_blocks: got.folner,
        order_witnesses,
        sigma_movers,
        log: got.log,
        stages,
    };
    Ok(ParsedState { state, defects })
}
