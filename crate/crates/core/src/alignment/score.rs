use crate::encoder::derive_code_pattern;
use crate::error::Result;
use crate::pattern::{symbol_cost, CostModel};
use crate::scalar::Bits;

use super::MultipleAlignment;

/// How well an alignment compresses its New pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressionScore<T> {
    /// Bits of New symbols that sit in matched columns.
    pub b_new_matched: T,
    /// Bits of the derived code pattern.
    pub b_code: T,
    /// `b_new_matched - b_code`.
    pub cd: T,
    pub new_matched: usize,
    pub new_len: usize,
    pub new_coverage: f64,
}

impl<T: Bits> CompressionScore<T> {
    pub fn is_complete(&self) -> bool {
        self.new_matched == self.new_len
    }
}

pub fn score<T: Bits>(ma: &MultipleAlignment, model: &CostModel<T>) -> Result<CompressionScore<T>> {
    let mut b_new_matched = T::zero();
    let mut new_matched = 0;
    for column in ma.columns().iter().filter(|c| c.is_matched()) {
        for cell in column.cells().iter().filter(|c| c.row == 0) {
            b_new_matched = b_new_matched + symbol_cost(ma.symbol(*cell).token(), model)?;
            new_matched += 1;
        }
    }
    let b_code = derive_code_pattern(ma)
        .iter()
        .try_fold(T::zero(), |acc, s| {
            Ok::<_, crate::Error>(acc + symbol_cost(s.token(), model)?)
        })?;
    let new_len = ma.new_pattern().len();
    Ok(CompressionScore {
        cd: b_new_matched.clone() - b_code.clone(),
        b_new_matched,
        b_code,
        new_matched,
        new_len,
        new_coverage: new_matched as f64 / new_len as f64,
    })
}
