//! Raw data to discrete observation sequences.
//!
//! Both experiments reduce their measurements to the same three-symbol trend
//! alphabet: consecutive quantized values go up, down or stay put.

pub mod iris;
pub mod ratio;
pub mod sampler;

use crate::error::Result;
use crate::sequence::ObservationSequence;

/// Alphabet size of trend sequences.
pub const TREND_SYMBOLS: usize = 3;

/// File codes are fixed: INCREASE = 1, DECREASE = 2, NO_CHANGE = 3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TrendSymbol {
    Increase = 1,
    Decrease = 2,
    NoChange = 3,
}

impl TrendSymbol {
    pub fn between<Q: Ord>(prev: Q, next: Q) -> Self {
        match next.cmp(&prev) {
            std::cmp::Ordering::Greater => TrendSymbol::Increase,
            std::cmp::Ordering::Less => TrendSymbol::Decrease,
            std::cmp::Ordering::Equal => TrendSymbol::NoChange,
        }
    }

    /// 1-based code as written to sequence files.
    pub fn code(self) -> usize {
        self as usize
    }

    /// 0-based symbol index used by the models.
    pub fn index(self) -> usize {
        self.code() - 1
    }
}

/// Trend symbols between consecutive levels.
pub fn trends<Q: Ord + Copy>(levels: &[Q]) -> Vec<TrendSymbol> {
    levels
        .windows(2)
        .map(|w| TrendSymbol::between(w[0], w[1]))
        .collect()
}

pub fn trend_sequence(symbols: &[TrendSymbol]) -> Result<ObservationSequence> {
    ObservationSequence::new(symbols.iter().map(|s| s.index()).collect())
}
