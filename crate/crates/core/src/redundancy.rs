//! Detectors for repeated structure in sequences and grammars.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::alignment::{match_reversed, MultipleAlignment};
use crate::error::{Error, Result};
use crate::pattern::{Grammar, SpPattern};
use crate::scalar::Bits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    Chunk,
    Schema,
    Run,
    Dependency,
    Mirror,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Chunk => "chunk",
            Kind::Schema => "schema",
            Kind::Run => "run",
            Kind::Dependency => "dependency",
            Kind::Mirror => "mirror",
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a report was found.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Location {
    /// Half-open range `[start, end)`.
    Span { start: usize, end: usize },
    /// Indices of one discontinuous occurrence.
    Indices(Vec<usize>),
    /// A segment and its mirror image.
    Mirror {
        first: (usize, usize),
        second: (usize, usize),
    },
    /// Matched columns of an alignment row.
    Row {
        alignment: usize,
        row: usize,
        columns: Vec<usize>,
    },
}

fn join(items: &[usize]) -> String {
    items
        .iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Location::Span { start, end } => write!(f, "[{start},{end})"),
            Location::Indices(ix) => write!(f, "({})", join(ix)),
            Location::Mirror { first, second } => {
                write!(f, "[{},{})~[{},{})", first.0, first.1, second.0, second.1)
            }
            Location::Row {
                alignment,
                row,
                columns,
            } => write!(f, "{alignment}:{row}:({})", join(columns)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RedundancyReport<T> {
    pub kind: Kind,
    pub subject: Vec<String>,
    pub occurrences: usize,
    pub expected: T,
    pub locations: Vec<Location>,
    pub significant: bool,
}

impl<T: Bits> RedundancyReport<T> {
    fn new(
        kind: Kind,
        subject: Vec<String>,
        occurrences: usize,
        expected: T,
        locations: Vec<Location>,
        threshold: &T,
    ) -> Self {
        let significant = is_significant(occurrences, &expected, threshold);
        Self {
            kind,
            subject,
            occurrences,
            expected,
            locations,
            significant,
        }
    }
}

impl<T: Bits> fmt::Display for RedundancyReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at: Vec<String> = self.locations.iter().map(Location::to_string).collect();
        write!(
            f,
            "kind={} subject=\"{}\" count={} expected={:.4} significant={} at={}",
            self.kind,
            self.subject.join(" "),
            self.occurrences,
            self.expected.to_f64(),
            self.significant,
            at.join(",")
        )
    }
}

/// `occurrences > expected * threshold`.
pub fn is_significant<T: Bits>(occurrences: usize, expected: &T, threshold: &T) -> bool {
    T::from_count(occurrences as u64) > expected.clone() * threshold.clone()
}

/// Default significance threshold.
pub fn default_threshold<T: Bits>() -> T {
    T::from_int(2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Contiguous, possibly overlapping.
    Contiguous,
    /// Disjoint greedy embeddings with gaps allowed.
    Subsequence,
}

fn owned<S: AsRef<str>>(items: &[S]) -> Vec<String> {
    items.iter().map(|s| s.as_ref().to_owned()).collect()
}

pub fn count_occurrences<S: AsRef<str>, D: AsRef<str>>(
    subject: &[S],
    data: &[D],
    mode: CountMode,
) -> (usize, Vec<Location>) {
    if subject.is_empty() || subject.len() > data.len() {
        return (0, Vec::new());
    }
    let eq = |a: &S, b: &D| a.as_ref() == b.as_ref();
    let mut found = Vec::new();
    match mode {
        CountMode::Contiguous => {
            for start in 0..=data.len() - subject.len() {
                if subject.iter().zip(&data[start..]).all(|(s, d)| eq(s, d)) {
                    found.push(Location::Span {
                        start,
                        end: start + subject.len(),
                    });
                }
            }
        }
        CountMode::Subsequence => {
            let mut used = vec![false; data.len()];
            loop {
                let mut tuple = Vec::with_capacity(subject.len());
                let mut from = 0;
                for s in subject {
                    match (from..data.len()).find(|&i| !used[i] && eq(s, &data[i])) {
                        Some(i) => {
                            tuple.push(i);
                            from = i + 1;
                        }
                        None => break,
                    }
                }
                if tuple.len() < subject.len() {
                    break;
                }
                for &i in &tuple {
                    used[i] = true;
                }
                found.push(Location::Indices(tuple));
            }
        }
    }
    (found.len(), found)
}

/// Chance count of contiguous `subject` in `data` when tokens are drawn
/// independently with their empirical frequencies.
pub fn expected_count<T: Bits, S: AsRef<str>, D: AsRef<str>>(subject: &[S], data: &[D]) -> T {
    if subject.is_empty() || subject.len() > data.len() {
        return T::zero();
    }
    let mut freq: BTreeMap<&str, u64> = BTreeMap::new();
    for d in data {
        *freq.entry(d.as_ref()).or_default() += 1;
    }
    let n = T::from_count(data.len() as u64);
    let p = subject.iter().fold(T::one(), |acc, s| {
        acc * T::from_count(freq.get(s.as_ref()).copied().unwrap_or(0)) / n.clone()
    });
    T::from_count((data.len() - subject.len() + 1) as u64) * p
}

fn is_primitive<S: AsRef<str>>(chunk: &[S]) -> bool {
    let p = chunk.len();
    !(1..p)
        .any(|q| p.is_multiple_of(q) && (q..p).all(|i| chunk[i].as_ref() == chunk[i - q].as_ref()))
}

/// Maximal stretches that repeat a chunk back to back at least `min_repeats`
/// times. Each stretch is reported under its smallest period, starting at its
/// leftmost position, with any trailing partial repetition cut off.
pub fn detect_runs<T: Bits, D: AsRef<str>>(
    data: &[D],
    min_repeats: usize,
    threshold: &T,
) -> Vec<RedundancyReport<T>> {
    let min_repeats = min_repeats.max(2);
    let n = data.len();
    let mut out = Vec::new();
    for p in 1..=n / min_repeats {
        let mut x = 0;
        while x + p < n {
            if data[x].as_ref() != data[x + p].as_ref() {
                x += 1;
                continue;
            }
            let start = x;
            while x + p < n && data[x].as_ref() == data[x + p].as_ref() {
                x += 1;
            }
            let repeats = (x - start + p) / p;
            let chunk = &data[start..start + p];
            if repeats >= min_repeats && is_primitive(chunk) {
                let expected = expected_count(chunk, data);
                let span = Location::Span {
                    start,
                    end: start + repeats * p,
                };
                out.push(RedundancyReport::new(
                    Kind::Run,
                    owned(chunk),
                    repeats,
                    expected,
                    vec![span],
                    threshold,
                ));
            }
        }
    }
    out.sort_by(|a, b| {
        a.locations
            .cmp(&b.locations)
            .then(a.subject.len().cmp(&b.subject.len()))
    });
    out
}

/// Pairs of non-overlapping segments, at least `min_len` long, where the
/// second is the first reversed. Only pairs that cannot grow are reported.
pub fn detect_mirrors<T: Bits, D: AsRef<str>>(
    data: &[D],
    min_len: usize,
    threshold: &T,
) -> Vec<RedundancyReport<T>> {
    let min_len = min_len.max(1);
    let n = data.len();
    let at = |i: usize| data[i].as_ref();
    let mut out = Vec::new();
    for i in 0..n {
        for e in (i + 1..n).rev() {
            if at(i) != at(e) || (i > 0 && e + 1 < n && at(i - 1) == at(e + 1)) {
                continue;
            }
            let mut len = 0;
            while 2 * (len + 1) <= e - i + 1 && at(i + len) == at(e - len) {
                len += 1;
            }
            if len < min_len {
                continue;
            }
            let first = &data[i..i + len];
            let second = &data[e + 1 - len..=e];
            if match_reversed(first, second).len() != len {
                continue;
            }
            let reversed: Vec<&str> = first.iter().rev().map(AsRef::as_ref).collect();
            let expected =
                expected_count::<T, _, _>(first, data) + expected_count::<T, _, _>(&reversed, data);
            let location = Location::Mirror {
                first: (i, i + len),
                second: (e + 1 - len, e + 1),
            };
            out.push(RedundancyReport::new(
                Kind::Mirror,
                owned(first),
                2,
                expected,
                vec![location],
                threshold,
            ));
        }
    }
    out
}

/// Contiguous sequences of at least `min_len` tokens that occur more than
/// once and cannot be extended on either side without losing an occurrence.
pub fn detect_chunks<T: Bits, D: AsRef<str>>(
    data: &[D],
    min_len: usize,
    threshold: &T,
) -> Vec<RedundancyReport<T>> {
    let min_len = min_len.max(1);
    let n = data.len();
    let tokens: Vec<&str> = data.iter().map(AsRef::as_ref).collect();
    let mut seen: BTreeSet<&[&str]> = BTreeSet::new();
    let mut out = Vec::new();
    for len in min_len..n {
        for start in 0..=n - len {
            let subject = &tokens[start..start + len];
            if !seen.insert(subject) {
                continue;
            }
            let starts: Vec<usize> = (0..=n - len)
                .filter(|&s| tokens[s..s + len] == *subject)
                .collect();
            if starts.len() < 2 {
                continue;
            }
            let same = |pick: fn(&[&str], usize, usize) -> Option<usize>| {
                let token = |s: usize| pick(&tokens, s, len).map(|i| tokens[i]);
                token(starts[0]).is_some() && starts.iter().all(|&s| token(s) == token(starts[0]))
            };
            let left = same(|_, s, _| s.checked_sub(1));
            let right = same(|t, s, len| (s + len < t.len()).then_some(s + len));
            if left || right {
                continue;
            }
            let expected = expected_count(subject, &tokens);
            let locations = starts
                .iter()
                .map(|&s| Location::Span {
                    start: s,
                    end: s + len,
                })
                .collect();
            out.push(RedundancyReport::new(
                Kind::Chunk,
                owned(subject),
                starts.len(),
                expected,
                locations,
                threshold,
            ));
        }
    }
    out
}

fn has_bracket(tokens: &[&str]) -> bool {
    tokens.iter().enumerate().any(|(i, t)| {
        let close = format!("#{t}");
        !t.starts_with('#') && tokens[i + 1..].iter().any(|u| *u == close)
    })
}

/// Structural kind of a grammar pattern: run (refers to itself), then
/// dependency (only references, no surface tokens, no bracketed slot), then
/// schema (has a `T ... #T` slot), otherwise chunk.
pub fn classify_grammar_pattern<T: Bits>(
    pattern: &SpPattern,
    grammar: &Grammar<T>,
) -> Result<Kind> {
    if grammar
        .get(pattern.id())
        .is_none_or(|p| p.symbols() != pattern.symbols())
    {
        return Err(Error::UnknownPattern(pattern.id().to_string()));
    }
    let body = pattern.body();
    let identity: Vec<&str> = pattern
        .symbols()
        .iter()
        .take_while(|s| s.is_id())
        .map(|s| s.token())
        .collect();
    let self_reference = !identity.is_empty()
        && body
            .windows(identity.len())
            .any(|w| w == identity.as_slice());
    if self_reference {
        return Ok(Kind::Run);
    }
    let bracketed = has_bracket(&body);
    if !body.is_empty() && !bracketed && body.iter().all(|t| !grammar.is_surface(t)) {
        return Ok(Kind::Dependency);
    }
    Ok(if bracketed { Kind::Schema } else { Kind::Chunk })
}

/// Rows of each alignment whose matched columns are split by matched
/// material of other rows. Stretches enclosed by one of the row's own
/// contents pairs `T ... #T` are slots, not dependencies, and are skipped.
pub fn detect_dependencies<T: Bits>(
    alignments: &[MultipleAlignment],
    threshold: &T,
) -> Vec<RedundancyReport<T>> {
    let mut out = Vec::new();
    for (a, ma) in alignments.iter().enumerate() {
        let at = ma.locate();
        for (r, row) in ma.rows().iter().enumerate().skip(1) {
            let symbols = row.pattern.symbols();
            let mut slots: Vec<(usize, usize)> = Vec::new();
            let mut open: Vec<(usize, &str)> = Vec::new();
            for p in row
                .ordered_positions()
                .into_iter()
                .filter(|&p| !symbols[p].is_id())
            {
                let token = symbols[p].token();
                match token.strip_prefix('#') {
                    Some(name) if open.iter().any(|(_, t)| *t == name) => {
                        while let Some((c, t)) = open.pop() {
                            if t == name {
                                slots.push((c, at[r][p]));
                                break;
                            }
                        }
                    }
                    _ => open.push((at[r][p], token)),
                }
            }
            let mut matched: Vec<usize> = row
                .ordered_positions()
                .into_iter()
                .map(|p| at[r][p])
                .filter(|&c| ma.columns()[c].is_matched())
                .collect();
            matched.sort_unstable();
            let split = matched.windows(2).any(|w| {
                let (c1, c2) = (w[0], w[1]);
                let inside_slot = slots.iter().any(|&(lo, hi)| lo <= c1 && c2 <= hi);
                !inside_slot
                    && (c1 + 1..c2)
                        .any(|c| ma.columns()[c].is_matched() && !ma.columns()[c].contains_row(r))
            });
            if split {
                let subject = row.pattern.tokens().map(str::to_owned).collect();
                let location = Location::Row {
                    alignment: a,
                    row: r,
                    columns: matched,
                };
                out.push(RedundancyReport::new(
                    Kind::Dependency,
                    subject,
                    1,
                    T::zero(),
                    vec![location],
                    threshold,
                ));
            }
        }
    }
    out
}
