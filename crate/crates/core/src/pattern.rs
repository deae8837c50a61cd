//! Symbols, SP patterns, cost models and grammars.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::Bits;

/// Suffix marking an identification symbol in textual patterns.
pub const ID_SUFFIX: &str = "/i";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Identification symbol: part of a pattern's name or code.
    Id,
    /// Contents symbol.
    Contents,
}

/// An atomic token. Two symbols match iff their tokens are byte-equal; the
/// role never takes part in that decision.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    token: String,
    role: Role,
}

impl Symbol {
    pub fn new(token: impl Into<String>, role: Role) -> Result<Self> {
        let token = token.into();
        if token.is_empty() || token.chars().any(char::is_whitespace) {
            return Err(Error::MalformedToken(token));
        }
        Ok(Self { token, role })
    }

    pub fn id(token: impl Into<String>) -> Result<Self> {
        Self::new(token, Role::Id)
    }

    pub fn contents(token: impl Into<String>) -> Result<Self> {
        Self::new(token, Role::Contents)
    }

    pub fn token(&self) -> &str {
        &self.token
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn is_id(&self) -> bool {
        self.role == Role::Id
    }

    pub fn matches(&self, other: &Symbol) -> bool {
        self.token == other.token
    }

    /// Textual form with role markup.
    pub fn marked(&self) -> String {
        match self.role {
            Role::Id => format!("{}{ID_SUFFIX}", self.token),
            Role::Contents => self.token.clone(),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PatternId(pub String);

impl PatternId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PatternId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PatternId {
    fn from(s: &str) -> Self {
        Self(s.to_owned())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    New,
    Old,
}

/// A one-dimensional SP pattern.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpPattern {
    id: PatternId,
    symbols: Vec<Symbol>,
    frequency: u64,
    origin: Origin,
}

impl SpPattern {
    pub fn new(
        id: PatternId,
        symbols: Vec<Symbol>,
        frequency: u64,
        origin: Origin,
    ) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::EmptyPattern);
        }
        if frequency == 0 {
            return Err(Error::BadFrequency(0));
        }
        if origin == Origin::New {
            if let Some(s) = symbols.iter().find(|s| s.is_id()) {
                return Err(Error::MalformedToken(s.marked()));
            }
        }
        Ok(Self {
            id,
            symbols,
            frequency,
            origin,
        })
    }

    /// A New pattern from plain tokens.
    pub fn new_input<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let symbols = tokens
            .into_iter()
            .map(Symbol::contents)
            .collect::<Result<Vec<_>>>()?;
        Self::new(PatternId("new".into()), symbols, 1, Origin::New)
    }

    pub fn id(&self) -> &PatternId {
        &self.id
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn frequency(&self) -> u64 {
        self.frequency
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.symbols.iter().map(Symbol::token)
    }

    /// Tokens of the contents symbols, in order.
    pub fn body(&self) -> Vec<&str> {
        self.symbols
            .iter()
            .filter(|s| !s.is_id())
            .map(Symbol::token)
            .collect()
    }

    pub fn with_frequency(&self, frequency: u64) -> Result<Self> {
        Self::new(
            self.id.clone(),
            self.symbols.clone(),
            frequency,
            self.origin,
        )
    }

    pub fn with_id(&self, id: PatternId) -> Self {
        Self { id, ..self.clone() }
    }

    /// Space-separated tokens, with `/i` markup when `marked` is set.
    pub fn render(&self, marked: bool) -> String {
        let parts: Vec<String> = if marked {
            self.symbols.iter().map(Symbol::marked).collect()
        } else {
            self.symbols.iter().map(|s| s.token.clone()).collect()
        };
        parts.join(" ")
    }
}

impl fmt::Display for SpPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(false))
    }
}

/// Parses whitespace-separated tokens into a pattern.
///
/// With `role_markup` set, tokens ending in `/i` become ID-symbols and the
/// result is an Old pattern; otherwise every token is a contents symbol of a
/// New pattern.
pub fn parse_pattern(line: &str, role_markup: bool) -> Result<SpPattern> {
    let mut symbols = Vec::new();
    for raw in line.split_whitespace() {
        if raw == ID_SUFFIX {
            return Err(Error::MalformedToken(raw.to_owned()));
        }
        let symbol = match raw.strip_suffix(ID_SUFFIX) {
            Some(token) if role_markup => Symbol::id(token)?,
            _ => Symbol::contents(raw)?,
        };
        symbols.push(symbol);
    }
    let origin = if role_markup {
        Origin::Old
    } else {
        Origin::New
    };
    let id = PatternId(if role_markup { "1" } else { "new" }.into());
    SpPattern::new(id, symbols, 1, origin)
}

/// How per-symbol costs are chosen.
#[derive(Debug, Clone, PartialEq)]
pub enum CostMode<T> {
    /// Every symbol costs the same.
    Fixed(T),
    /// Shannon-style lengths from grammar token frequencies, clamped below.
    Frequency { floor: T },
}

impl<T: Bits> CostMode<T> {
    /// 160/17 bits per symbol: the 17-symbol reference sentence measures 160 bits.
    pub fn default_fixed() -> Self {
        CostMode::Fixed(T::from_int(160) / T::from_int(17))
    }

    pub fn frequency() -> Self {
        CostMode::Frequency { floor: T::one() }
    }
}

impl<T: Bits> Default for CostMode<T> {
    fn default() -> Self {
        Self::default_fixed()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostModel<T> {
    Fixed {
        bits: T,
    },
    Frequency {
        floor: T,
        per_symbol: BTreeMap<String, T>,
    },
}

impl<T: Bits> CostModel<T> {
    pub fn fixed(bits: T) -> Result<Self> {
        if bits <= T::zero() {
            return Err(Error::Config(format!(
                "fixed bits must be positive, got {bits}"
            )));
        }
        Ok(CostModel::Fixed { bits })
    }

    /// Builds a frequency-mode table directly from raw per-token costs.
    pub fn from_table(floor: T, per_symbol: BTreeMap<String, T>) -> Result<Self> {
        if floor <= T::zero() {
            return Err(Error::Config(format!(
                "floor bits must be positive, got {floor}"
            )));
        }
        Ok(CostModel::Frequency { floor, per_symbol })
    }

    /// Derives token costs `max(floor, ceil(-log2(f / F)))` where `f` counts a
    /// token's occurrences weighted by pattern frequency and `F` is the total.
    pub fn from_frequencies<'a, I>(floor: T, patterns: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a SpPattern>,
    {
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for p in patterns {
            for s in p.symbols() {
                *counts.entry(s.token().to_owned()).or_default() += p.frequency();
            }
        }
        let total: u64 = counts.values().sum();
        let per_symbol = counts
            .into_iter()
            .map(|(token, f)| (token, T::from_count(ceil_log2_ratio(total, f))))
            .collect();
        Self::from_table(floor, per_symbol)
    }

    pub fn mode(&self) -> CostMode<T> {
        match self {
            CostModel::Fixed { bits } => CostMode::Fixed(bits.clone()),
            CostModel::Frequency { floor, .. } => CostMode::Frequency {
                floor: floor.clone(),
            },
        }
    }

    pub fn floor_bits(&self) -> Option<&T> {
        match self {
            CostModel::Fixed { .. } => None,
            CostModel::Frequency { floor, .. } => Some(floor),
        }
    }

    pub fn has_token(&self, token: &str) -> bool {
        match self {
            CostModel::Fixed { .. } => true,
            CostModel::Frequency { per_symbol, .. } => per_symbol.contains_key(token),
        }
    }
}

/// Smallest `k` with `f * 2^k >= total`, i.e. `ceil(log2(total / f))`.
fn ceil_log2_ratio(total: u64, f: u64) -> u64 {
    let mut k = 0;
    let mut scaled = u128::from(f);
    while scaled < u128::from(total) {
        scaled <<= 1;
        k += 1;
    }
    k
}

pub fn symbol_cost<T: Bits>(token: &str, model: &CostModel<T>) -> Result<T> {
    match model {
        CostModel::Fixed { bits } => Ok(bits.clone()),
        CostModel::Frequency { floor, per_symbol } => {
            let raw = per_symbol
                .get(token)
                .ok_or_else(|| Error::UnknownToken(token.to_owned()))?;
            Ok(if raw < floor {
                floor.clone()
            } else {
                raw.clone()
            })
        }
    }
}

pub fn pattern_size_bits<T: Bits>(pattern: &SpPattern, model: &CostModel<T>) -> Result<T> {
    symbols_size_bits(pattern.symbols(), model)
}

pub fn symbols_size_bits<T: Bits>(symbols: &[Symbol], model: &CostModel<T>) -> Result<T> {
    symbols
        .iter()
        .try_fold(T::zero(), |acc, s| Ok(acc + symbol_cost(s.token(), model)?))
}

/// A set of Old patterns with the cost model used to measure them.
#[derive(Debug, Clone, PartialEq)]
pub struct Grammar<T> {
    patterns: Vec<Arc<SpPattern>>,
    cost_mode: CostMode<T>,
    cost_model: CostModel<T>,
    surface: BTreeSet<String>,
}

impl<T: Bits> Grammar<T> {
    pub fn new(
        patterns: Vec<SpPattern>,
        cost_mode: CostMode<T>,
        surface: BTreeSet<String>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for p in &patterns {
            if p.origin() != Origin::Old {
                return Err(Error::Config(format!(
                    "pattern {} is not an Old pattern",
                    p.id()
                )));
            }
            if !seen.insert(p.id().clone()) {
                return Err(Error::DuplicateId(p.id().to_string()));
            }
        }
        let cost_model = match &cost_mode {
            CostMode::Fixed(bits) => CostModel::fixed(bits.clone())?,
            CostMode::Frequency { floor } => CostModel::from_frequencies(floor.clone(), &patterns)?,
        };
        Ok(Self {
            patterns: patterns.into_iter().map(Arc::new).collect(),
            cost_mode,
            cost_model,
            surface,
        })
    }

    pub fn empty(cost_mode: CostMode<T>) -> Self {
        Self::new(Vec::new(), cost_mode, BTreeSet::new()).expect("empty grammar is valid")
    }

    pub fn patterns(&self) -> &[Arc<SpPattern>] {
        &self.patterns
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn get(&self, id: &PatternId) -> Option<&Arc<SpPattern>> {
        self.patterns.iter().find(|p| p.id() == id)
    }

    pub fn cost_model(&self) -> &CostModel<T> {
        &self.cost_model
    }

    pub fn cost_mode(&self) -> &CostMode<T> {
        &self.cost_mode
    }

    /// The declared surface alphabet.
    pub fn declared_surface(&self) -> &BTreeSet<String> {
        &self.surface
    }

    /// Tokens that may appear in New patterns: the declared alphabet, or when
    /// none is declared, every token never used as an ID-symbol.
    pub fn surface_alphabet(&self) -> BTreeSet<String> {
        if !self.surface.is_empty() {
            return self.surface.clone();
        }
        let ids: BTreeSet<&str> = self
            .patterns
            .iter()
            .flat_map(|p| p.symbols().iter().filter(|s| s.is_id()).map(Symbol::token))
            .collect();
        self.patterns
            .iter()
            .flat_map(|p| p.tokens())
            .filter(|t| !ids.contains(t))
            .map(str::to_owned)
            .collect()
    }

    pub fn is_surface(&self, token: &str) -> bool {
        if self.surface.is_empty() {
            self.surface_alphabet().contains(token)
        } else {
            self.surface.contains(token)
        }
    }

    pub fn symbol_cost(&self, token: &str) -> Result<T> {
        symbol_cost(token, &self.cost_model)
    }

    pub fn pattern_size_bits(&self, pattern: &SpPattern) -> Result<T> {
        pattern_size_bits(pattern, &self.cost_model)
    }

    /// Σ pattern sizes over the grammar.
    pub fn size_bits(&self) -> Result<T> {
        self.patterns
            .iter()
            .try_fold(T::zero(), |acc, p| Ok(acc + self.pattern_size_bits(p)?))
    }

    fn rebuild(&self, patterns: Vec<SpPattern>) -> Result<Self> {
        Self::new(patterns, self.cost_mode.clone(), self.surface.clone())
    }

    fn owned_patterns(&self) -> Vec<SpPattern> {
        self.patterns.iter().map(|p| SpPattern::clone(p)).collect()
    }

    pub fn with_pattern(&self, pattern: SpPattern) -> Result<Self> {
        let mut patterns = self.owned_patterns();
        patterns.push(pattern);
        self.rebuild(patterns)
    }

    pub fn without(&self, id: &PatternId) -> Result<Self> {
        if self.get(id).is_none() {
            return Err(Error::UnknownPattern(id.to_string()));
        }
        let patterns = self
            .owned_patterns()
            .into_iter()
            .filter(|p| p.id() != id)
            .collect();
        self.rebuild(patterns)
    }

    /// Replaces frequencies for the listed patterns.
    pub fn with_frequencies(&self, updates: &BTreeMap<PatternId, u64>) -> Result<Self> {
        let patterns = self
            .owned_patterns()
            .into_iter()
            .map(|p| match updates.get(p.id()) {
                Some(&f) => p.with_frequency(f),
                None => Ok(p),
            })
            .collect::<Result<Vec<_>>>()?;
        self.rebuild(patterns)
    }

    pub fn with_cost_mode(&self, cost_mode: CostMode<T>) -> Result<Self> {
        Self::new(self.owned_patterns(), cost_mode, self.surface.clone())
    }

    pub fn with_surface(&self, surface: BTreeSet<String>) -> Result<Self> {
        Self::new(self.owned_patterns(), self.cost_mode.clone(), surface)
    }
}
