//! Grammar induction by compression.
//!
//! New patterns are folded in one at a time: matched Old patterns gain
//! frequency, partial matches are split into new patterns, and unmatched
//! input is stored whole. Periodic pruning keeps only the patterns that
//! lower the combined size of grammar and encodings.

use std::collections::{BTreeMap, BTreeSet};

use crate::alignment::{MultipleAlignment, SearchConfig};
use crate::encoder::{encode, Encoding};
use crate::error::{Error, Result};
use crate::pattern::{CostMode, Grammar, Origin, PatternId, Role, SpPattern, Symbol};
use crate::scalar::Bits;

const CLASS_LETTERS: &str = "ABCDEFGHIJKLMNOPQRSTUVWXYZ";

/// Issues ID-symbol triples `L`, `n`, `#L` that avoid reserved tokens.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdGenerator {
    next_ordinal: u64,
    next_class: usize,
    reserved: BTreeSet<String>,
}

impl IdGenerator {
    pub fn new() -> Self {
        Self {
            next_ordinal: 1,
            next_class: 0,
            reserved: BTreeSet::new(),
        }
    }

    /// Marks tokens that must never be issued, typically surface tokens.
    pub fn reserve<I, S>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.reserved.extend(tokens.into_iter().map(Into::into));
    }

    pub fn next_ordinal(&self) -> u64 {
        self.next_ordinal
    }

    fn free(&self, token: &str) -> bool {
        !self.reserved.contains(token)
    }

    /// The next `(open, ordinal, close)` triple.
    pub fn next_ids(&mut self) -> (String, String, String) {
        let letter = CLASS_LETTERS
            .chars()
            .nth(self.next_class % CLASS_LETTERS.len())
            .unwrap();
        self.next_class += 1;
        let mut open = letter.to_string();
        while !self.free(&open) || !self.free(&format!("#{open}")) {
            open.push('\'');
        }
        let mut ordinal = self.next_ordinal;
        while !self.free(&ordinal.to_string()) {
            ordinal += 1;
        }
        self.next_ordinal = ordinal + 1;
        let close = format!("#{open}");
        (open, ordinal.to_string(), close)
    }

    /// Frames `body` as `L n body #L`, with the ordinal as pattern id.
    pub fn frame(&mut self, body: &[&str], frequency: u64) -> Result<SpPattern> {
        if body.is_empty() {
            return Err(Error::EmptyPattern);
        }
        let (open, ordinal, close) = self.next_ids();
        let mut symbols = vec![Symbol::id(open)?, Symbol::id(ordinal.clone())?];
        for token in body {
            symbols.push(Symbol::contents(*token)?);
        }
        symbols.push(Symbol::id(close)?);
        SpPattern::new(PatternId(ordinal), symbols, frequency, Origin::Old)
    }
}

/// Everything carried between learning steps.
#[derive(Debug, Clone)]
pub struct LearnState<T> {
    pub grammar: Grammar<T>,
    /// One per corpus item, in corpus order.
    pub encodings: Vec<Encoding<T>>,
    pub corpus: Vec<SpPattern>,
    pub ids: IdGenerator,
    pub total_g_bits: T,
    pub total_e_bits: T,
}

impl<T: Bits> LearnState<T> {
    pub fn new(cost_mode: CostMode<T>) -> Self {
        Self {
            grammar: Grammar::empty(cost_mode),
            encodings: Vec::new(),
            corpus: Vec::new(),
            ids: IdGenerator::new(),
            total_g_bits: T::zero(),
            total_e_bits: T::zero(),
        }
    }

    /// Starts from an existing grammar; its tokens are never reissued as IDs.
    pub fn from_grammar(grammar: Grammar<T>) -> Result<Self> {
        let mut ids = IdGenerator::new();
        ids.reserve(
            grammar
                .patterns()
                .iter()
                .flat_map(|p| p.tokens().map(str::to_owned)),
        );
        ids.reserve(grammar.declared_surface().iter().cloned());
        let mut state = Self {
            grammar,
            ids,
            ..Self::new(CostMode::default())
        };
        state.refresh()?;
        Ok(state)
    }

    fn refresh(&mut self) -> Result<()> {
        self.total_g_bits = self.grammar.size_bits()?;
        self.total_e_bits = T::sum(self.encodings.iter().map(|e| e.bits_out.clone()));
        Ok(())
    }
}

/// `(g_bits, e_bits, g_bits + e_bits)`.
pub fn grammar_cost<T: Bits>(state: &LearnState<T>) -> Result<(T, T, T)> {
    let g = state.grammar.size_bits()?;
    let e = T::sum(state.encodings.iter().map(|e| e.bits_out.clone()));
    Ok((g.clone(), e.clone(), g + e))
}

/// Adds one to the frequency of every Old row whose contents symbols all sit
/// in matched columns, once per row instance.
pub fn update_frequencies<T: Bits>(
    ma: &MultipleAlignment,
    grammar: &Grammar<T>,
) -> Result<Grammar<T>> {
    let at = ma.locate();
    let mut bumps: BTreeMap<PatternId, u64> = BTreeMap::new();
    for (r, row) in ma.rows().iter().enumerate().skip(1) {
        let all_matched = row
            .pattern
            .symbols()
            .iter()
            .enumerate()
            .filter(|(_, s)| !s.is_id())
            .all(|(pos, _)| ma.columns()[at[r][pos]].is_matched());
        if all_matched {
            *bumps.entry(row.pattern_id().clone()).or_default() += 1;
        }
    }
    let mut updates = BTreeMap::new();
    for (id, bump) in bumps {
        let pattern = grammar
            .get(&id)
            .ok_or_else(|| Error::UnknownPattern(id.to_string()))?;
        updates.insert(id, pattern.frequency() + bump);
    }
    grammar.with_frequencies(&updates)
}

/// Splits partially matched rows into new patterns: each maximal run of
/// contents symbols matched to consecutive New symbols (frequency 2), each
/// maximal unmatched stretch of such a row's contents (frequency 1), and
/// each maximal unmatched stretch of the New row (frequency 1).
pub fn derive_patterns_from_partial_match(
    ma: &MultipleAlignment,
    ids: &mut IdGenerator,
) -> Result<Vec<SpPattern>> {
    let at = ma.locate();
    let new_pos = |c: usize| {
        ma.columns()[c]
            .cells()
            .iter()
            .find(|cell| cell.row == 0)
            .map(|cell| cell.pos)
    };
    let mut bodies: Vec<(Vec<&str>, u64)> = Vec::new();

    for (r, row) in ma.rows().iter().enumerate().skip(1) {
        let symbols = row.pattern.symbols();
        let contents: Vec<usize> = row
            .ordered_positions()
            .into_iter()
            .filter(|&p| !symbols[p].is_id())
            .collect();
        let matched = |p: usize| ma.columns()[at[r][p]].is_matched();
        let touches_new = contents.iter().any(|&p| new_pos(at[r][p]).is_some());
        if !touches_new || contents.iter().all(|&p| matched(p)) {
            continue;
        }

        let mut runs: Vec<Vec<&str>> = Vec::new();
        let mut last_new: Option<usize> = None;
        for &p in &contents {
            match new_pos(at[r][p]) {
                Some(q) => {
                    if last_new.is_some_and(|l| l + 1 == q) {
                        runs.last_mut().unwrap().push(symbols[p].token());
                    } else {
                        runs.push(vec![symbols[p].token()]);
                    }
                    last_new = Some(q);
                }
                None => last_new = None,
            }
        }
        bodies.extend(runs.into_iter().map(|b| (b, 2)));
        bodies.extend(
            segments(
                contents
                    .iter()
                    .map(|&p| (!matched(p)).then(|| symbols[p].token())),
            )
            .into_iter()
            .map(|b| (b, 1)),
        );
    }

    let new = ma.new_pattern();
    let new_matched: Vec<bool> = (0..new.len())
        .map(|q| ma.columns()[at[0][q]].is_matched())
        .collect();
    if new_matched.iter().any(|&m| m) {
        let unmatched = new
            .symbols()
            .iter()
            .zip(&new_matched)
            .map(|(s, &m)| (!m).then(|| s.token()));
        bodies.extend(segments(unmatched).into_iter().map(|b| (b, 1)));
    }

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (body, frequency) in bodies {
        if seen.insert(body.clone()) {
            out.push(ids.frame(&body, frequency)?);
        }
    }
    Ok(out)
}

/// Maximal runs of `Some` items.
fn segments<'a>(items: impl Iterator<Item = Option<&'a str>>) -> Vec<Vec<&'a str>> {
    let mut out: Vec<Vec<&str>> = Vec::new();
    let mut open = false;
    for item in items {
        match item {
            Some(token) if open => out.last_mut().unwrap().push(token),
            Some(token) => {
                out.push(vec![token]);
                open = true;
            }
            None => open = false,
        }
    }
    out
}

fn full_coverage(cfg: &SearchConfig) -> SearchConfig {
    SearchConfig {
        require_full_new_coverage_for_encoding: true,
        ..cfg.clone()
    }
}

fn contents_body(pattern: &SpPattern) -> Vec<String> {
    pattern
        .symbols()
        .iter()
        .filter(|s| s.role() == Role::Contents)
        .map(|s| s.token().to_owned())
        .collect()
}

fn store_whole<T: Bits>(state: &mut LearnState<T>, new: &SpPattern) -> Result<()> {
    let body: Vec<&str> = new.tokens().collect();
    let pattern = state.ids.frame(&body, 1)?;
    state.grammar = state.grammar.with_pattern(pattern)?;
    Ok(())
}

/// Folds one New pattern into the state.
pub fn ingest<T: Bits>(
    state: &LearnState<T>,
    new: &SpPattern,
    cfg: &SearchConfig,
) -> Result<LearnState<T>> {
    if new.origin() != Origin::New {
        return Err(Error::Config("ingest needs a New pattern".into()));
    }
    let mut state = state.clone();
    state.ids.reserve(new.tokens().map(str::to_owned));

    let best = if state.grammar.is_empty() {
        None
    } else {
        let ranked = crate::alignment::build_alignments(new, &state.grammar, cfg)?;
        ranked.into_iter().find(|s| s.score.new_matched > 0)
    };
    match best {
        None => store_whole(&mut state, new)?,
        Some(best) => {
            state.grammar = update_frequencies(&best.alignment, &state.grammar)?;
            let known: BTreeSet<Vec<String>> = state
                .grammar
                .patterns()
                .iter()
                .map(|p| contents_body(p))
                .collect();
            for pattern in derive_patterns_from_partial_match(&best.alignment, &mut state.ids)? {
                if !known.contains(&contents_body(&pattern)) {
                    state.grammar = state.grammar.with_pattern(pattern)?;
                }
            }
        }
    }

    let encoding = match encode(new, &state.grammar, &full_coverage(cfg)) {
        Ok(e) => e,
        Err(Error::IncompleteCoverage(_)) => {
            store_whole(&mut state, new)?;
            encode(new, &state.grammar, &full_coverage(cfg))?
        }
        Err(e) => return Err(e),
    };
    state.corpus.push(new.clone());
    state.encodings.push(encoding);
    state.refresh()?;
    Ok(state)
}

/// Encodes every item with full coverage, or `None` if some item cannot be.
fn encode_all<T: Bits>(
    grammar: &Grammar<T>,
    corpus: &[SpPattern],
    cfg: &SearchConfig,
) -> Result<Option<Vec<Encoding<T>>>> {
    let cfg = full_coverage(cfg);
    let mut out = Vec::with_capacity(corpus.len());
    for item in corpus {
        match encode(item, grammar, &cfg) {
            Ok(e) => out.push(e),
            Err(Error::IncompleteCoverage(_) | Error::UnknownToken(_)) => return Ok(None),
            Err(e) => return Err(e),
        }
    }
    Ok(Some(out))
}

fn id_order(a: &PatternId, b: &PatternId) -> std::cmp::Ordering {
    a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0))
}

/// Greedy pruning: repeatedly drops the one pattern whose removal lowers
/// total cost the most, while every corpus item still encodes in full.
pub fn select_grammar<T: Bits>(
    state: &LearnState<T>,
    corpus: &[SpPattern],
    cfg: &SearchConfig,
) -> Result<LearnState<T>> {
    let mut state = state.clone();
    state.corpus = corpus.to_vec();
    if let Some(encodings) = encode_all(&state.grammar, corpus, cfg)? {
        state.encodings = encodings;
    }
    state.refresh()?;
    loop {
        let (_, _, current) = grammar_cost(&state)?;
        let mut ids: Vec<PatternId> = state
            .grammar
            .patterns()
            .iter()
            .map(|p| p.id().clone())
            .collect();
        ids.sort_by(id_order);
        let mut best: Option<(T, Grammar<T>, Vec<Encoding<T>>)> = None;
        for id in ids {
            let grammar = state.grammar.without(&id)?;
            let Some(encodings) = encode_all(&grammar, corpus, cfg)? else {
                continue;
            };
            let total = grammar.size_bits()? + T::sum(encodings.iter().map(|e| e.bits_out.clone()));
            let improves = total.cmp_bits(&current).is_lt();
            let beats = best
                .as_ref()
                .is_none_or(|(b, _, _)| total.cmp_bits(b).is_lt());
            if improves && beats {
                best = Some((total, grammar, encodings));
            }
        }
        match best {
            Some((_, grammar, encodings)) => {
                state.grammar = grammar;
                state.encodings = encodings;
                state.refresh()?;
            }
            None => return Ok(state),
        }
    }
}

/// Options for [`learn`].
#[derive(Debug, Clone)]
pub struct LearnConfig<T> {
    pub search: SearchConfig,
    pub cost_mode: CostMode<T>,
    /// Prune after this many items; 0 prunes only at the end.
    pub prune_every: usize,
}

impl<T: Bits> Default for LearnConfig<T> {
    fn default() -> Self {
        Self {
            search: SearchConfig::default(),
            cost_mode: CostMode::default(),
            prune_every: 10,
        }
    }
}

/// Learns a grammar and per-item encodings for `corpus`.
pub fn learn<T: Bits>(corpus: &[SpPattern], cfg: &LearnConfig<T>) -> Result<LearnState<T>> {
    if corpus.is_empty() {
        return Err(Error::Config("corpus is empty".into()));
    }
    let mut state = LearnState::new(cfg.cost_mode.clone());
    state
        .ids
        .reserve(corpus.iter().flat_map(|p| p.tokens().map(str::to_owned)));
    for (i, item) in corpus.iter().enumerate() {
        state = ingest(&state, item, &cfg.search)?;
        if cfg.prune_every > 0 && (i + 1) % cfg.prune_every == 0 && i + 1 < corpus.len() {
            state = select_grammar(&state, &corpus[..=i], &cfg.search)?;
        }
    }
    select_grammar(&state, corpus, &cfg.search)
}
