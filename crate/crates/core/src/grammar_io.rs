//! Line-oriented grammar file format.
//!
//! ```text
//! #! costmodel fixed 160/17
//! #! surface a e h l p r s t w
//! # free comment
//! #! id det
//! 4	D/i 17/i t h e #D/i
//! ```
//!
//! Each record is `<frequency><TAB><tokens>`; a `/i` suffix marks an
//! ID-symbol. Records are numbered from 1 and take that ordinal as their id
//! unless an `#! id` directive precedes them.
#![allow(clippy::tabs_in_doc_comments)]

use std::collections::{BTreeSet, HashSet};
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::pattern::{parse_pattern, CostMode, Grammar, PatternId};
use crate::scalar::Bits;

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn load_grammar<T: Bits, R: BufRead>(source: R) -> Result<Grammar<T>> {
    let mut cost_mode = CostMode::default();
    let mut surface = BTreeSet::new();
    let mut patterns = Vec::new();
    let mut seen = HashSet::new();
    let mut pending_id: Option<String> = None;

    for (index, line) in source.lines().enumerate() {
        let lineno = index + 1;
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let line = line.trim_end_matches(['\r', '\n']);
        if line.trim().is_empty() {
            continue;
        }
        if let Some(directive) = line.strip_prefix("#!") {
            let mut words = directive.split_whitespace();
            match words.next() {
                Some("costmodel") => {
                    let kind = words.next();
                    let value = words
                        .next()
                        .ok_or_else(|| parse_err(lineno, "costmodel needs a value"))?;
                    let value = T::parse_bits(value)
                        .ok_or_else(|| parse_err(lineno, format!("bad number {value:?}")))?;
                    if value <= T::zero() {
                        return Err(parse_err(lineno, "cost must be positive"));
                    }
                    cost_mode = match kind {
                        Some("fixed") => CostMode::Fixed(value),
                        Some("frequency") => CostMode::Frequency { floor: value },
                        other => {
                            return Err(parse_err(lineno, format!("unknown cost model {other:?}")))
                        }
                    };
                    if words.next().is_some() {
                        return Err(parse_err(lineno, "trailing text after costmodel"));
                    }
                }
                Some("surface") => surface.extend(words.map(str::to_owned)),
                Some("id") => {
                    let name = words
                        .next()
                        .ok_or_else(|| parse_err(lineno, "id directive needs a name"))?;
                    if words.next().is_some() {
                        return Err(parse_err(lineno, "pattern ids cannot contain spaces"));
                    }
                    pending_id = Some(name.to_owned());
                }
                other => return Err(parse_err(lineno, format!("unknown directive {other:?}"))),
            }
            continue;
        }
        if line.starts_with('#') {
            continue;
        }

        let (freq, body) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(lineno, "expected <frequency><TAB><tokens>"))?;
        let freq: i64 = freq
            .trim()
            .parse()
            .map_err(|_| parse_err(lineno, format!("bad frequency {freq:?}")))?;
        if freq < 1 {
            return Err(Error::BadFrequency(freq));
        }
        let ordinal = patterns.len() + 1;
        let id = PatternId(pending_id.take().unwrap_or_else(|| ordinal.to_string()));
        if !seen.insert(id.clone()) {
            return Err(Error::DuplicateId(id.0));
        }
        let pattern = parse_pattern(body, true).map_err(|e| match e {
            Error::EmptyPattern | Error::MalformedToken(_) => parse_err(lineno, e.to_string()),
            other => other,
        })?;
        patterns.push(pattern.with_id(id).with_frequency(freq as u64)?);
    }
    if pending_id.is_some() {
        return Err(parse_err(0, "id directive without a following record"));
    }
    Grammar::new(patterns, cost_mode, surface)
}

pub fn load_grammar_str<T: Bits>(text: &str) -> Result<Grammar<T>> {
    load_grammar(text.as_bytes())
}

/// Writes the canonical form: cost model, surface alphabet, then records.
pub fn save_grammar<T: Bits, W: Write>(grammar: &Grammar<T>, mut out: W) -> std::io::Result<()> {
    match grammar.cost_mode() {
        CostMode::Fixed(bits) => writeln!(out, "#! costmodel fixed {}", bits.format_bits())?,
        CostMode::Frequency { floor } => {
            writeln!(out, "#! costmodel frequency {}", floor.format_bits())?
        }
    }
    if !grammar.declared_surface().is_empty() {
        let tokens: Vec<&str> = grammar
            .declared_surface()
            .iter()
            .map(String::as_str)
            .collect();
        writeln!(out, "#! surface {}", tokens.join(" "))?;
    }
    for (index, pattern) in grammar.patterns().iter().enumerate() {
        if pattern.id().as_str() != (index + 1).to_string() {
            writeln!(out, "#! id {}", pattern.id())?;
        }
        writeln!(out, "{}\t{}", pattern.frequency(), pattern.render(true))?;
    }
    Ok(())
}

pub fn save_grammar_string<T: Bits>(grammar: &Grammar<T>) -> String {
    let mut buf = Vec::new();
    save_grammar(grammar, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("grammar text is UTF-8")
}
