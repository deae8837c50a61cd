//! Encoding New patterns as codes and decoding codes back to surface tokens.

use std::cmp::Ordering;
use std::fmt;

use crate::alignment::search::{search, Objective};
use crate::alignment::{CellKind, MultipleAlignment, ScoredAlignment, SearchConfig};
use crate::error::{Error, Result};
use crate::pattern::{symbols_size_bits, CostModel, Grammar, SpPattern, Symbol};
use crate::scalar::Bits;

/// The code pattern of an alignment: ID-symbols of Old rows left unmatched,
/// in column order.
pub fn derive_code_pattern(ma: &MultipleAlignment) -> Vec<Symbol> {
    ma.columns()
        .iter()
        .filter(|c| !c.is_matched())
        .map(|c| c.cells()[0])
        .filter(|&cell| ma.cell_kind(cell) == CellKind::OldId)
        .map(|cell| {
            Symbol::contents(ma.symbol(cell).token()).expect("token was valid in its pattern")
        })
        .collect()
}

/// A New pattern expressed as a code, with its size before and after.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoding<T> {
    pub code: Vec<Symbol>,
    pub symbols_in: usize,
    pub symbols_out: usize,
    pub bits_in: T,
    pub bits_out: T,
}

impl<T: Bits> Encoding<T> {
    /// Code tokens separated by single spaces.
    pub fn code_line(&self) -> String {
        self.code
            .iter()
            .map(Symbol::token)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn metrics_line(&self) -> String {
        format!(
            "symbols_in={} symbols_out={} bits_in={:.2} bits_out={:.2}",
            self.symbols_in,
            self.symbols_out,
            self.bits_in.to_f64(),
            self.bits_out.to_f64()
        )
    }
}

impl<T: Bits> fmt::Display for Encoding<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.code_line())?;
        write!(f, "{}", self.metrics_line())
    }
}

/// Encodes `new` using the best alignment found against `grammar`.
pub fn encode<T: Bits>(
    new: &SpPattern,
    grammar: &Grammar<T>,
    cfg: &SearchConfig,
) -> Result<Encoding<T>> {
    encode_with(new, grammar, cfg, None)
}

/// Like [`encode`], but measures the code under `code_costs` when given.
pub fn encode_with<T: Bits>(
    new: &SpPattern,
    grammar: &Grammar<T>,
    cfg: &SearchConfig,
    code_costs: Option<&CostModel<T>>,
) -> Result<Encoding<T>> {
    let best = best_alignment(new, grammar, cfg)?;
    let code = derive_code_pattern(&best.alignment);
    Ok(Encoding {
        symbols_in: new.len(),
        symbols_out: code.len(),
        bits_in: symbols_size_bits(new.symbols(), grammar.cost_model())?,
        bits_out: symbols_size_bits(&code, code_costs.unwrap_or(grammar.cost_model()))?,
        code,
    })
}

/// The alignment [`encode`] builds its code from. With full coverage
/// required, only alignments that match every New symbol and leave no Old
/// contents symbol unmatched qualify.
pub fn best_alignment<T: Bits>(
    new: &SpPattern,
    grammar: &Grammar<T>,
    cfg: &SearchConfig,
) -> Result<ScoredAlignment<T>> {
    let mut outcome = search(new, grammar, cfg, Objective::Compression)?;
    let best = outcome.ranked.remove(0);
    if !cfg.require_full_new_coverage_for_encoding || best.is_faithful() {
        return Ok(best);
    }
    if outcome.complete.is_empty() {
        Err(Error::IncompleteCoverage(Box::new(best.alignment)))
    } else {
        Ok(outcome.complete.remove(0))
    }
}

/// Reads `code` back into surface tokens.
///
/// The code is aligned as if it were New data; the best alignment that
/// accounts for every code symbol is read out column by column, keeping
/// surface tokens only.
pub fn decode<T: Bits>(
    code: &[Symbol],
    grammar: &Grammar<T>,
    cfg: &SearchConfig,
) -> Result<Vec<String>> {
    if code.is_empty() {
        return Err(Error::UnknownCode);
    }
    let new = SpPattern::new_input(code.iter().map(|s| s.token().to_owned()))?;
    let outcome = search(&new, grammar, cfg, Objective::Derivation)?;
    let surface = grammar.surface_alphabet();
    let read = |s: &ScoredAlignment<T>| -> Vec<String> {
        let ma = &s.alignment;
        (0..ma.columns().len())
            .map(|c| ma.column_token(c))
            .filter(|t| surface.contains(*t))
            .map(str::to_owned)
            .collect()
    };
    let Some(best) = outcome.complete.first() else {
        return Err(Error::UnknownCode);
    };
    let output = read(best);
    if best.defect == 0 {
        let rival = outcome.complete[1..]
            .iter()
            .take_while(|s| s.defect == 0 && s.score.cd.cmp_bits(&best.score.cd) == Ordering::Equal)
            .any(|s| read(s) != output);
        if rival {
            return Err(Error::DecodeAmbiguous);
        }
    }
    Ok(output)
}

/// Ratios of input to output size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompressionMetrics {
    /// `symbols_in / symbols_out`; infinite for an empty code.
    pub symbol_ratio: f64,
    pub bit_ratio: f64,
    pub symbol_ratio_infinite: bool,
    pub bit_ratio_infinite: bool,
}

pub fn compression_metrics<T: Bits>(encoding: &Encoding<T>) -> CompressionMetrics {
    let ratio = |a: f64, b: f64| if b == 0.0 { f64::INFINITY } else { a / b };
    let symbol_ratio = ratio(encoding.symbols_in as f64, encoding.symbols_out as f64);
    let bit_ratio = ratio(encoding.bits_in.to_f64(), encoding.bits_out.to_f64());
    CompressionMetrics {
        symbol_ratio,
        bit_ratio,
        symbol_ratio_infinite: symbol_ratio.is_infinite(),
        bit_ratio_infinite: bit_ratio.is_infinite(),
    }
}
