//! Order-preserving matching between two symbol sequences, with gaps of any
//! size on either side.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::pattern::Symbol;

impl AsRef<str> for Symbol {
    fn as_ref(&self) -> &str {
        self.token()
    }
}

/// Index pairs `(left, right)` of matching symbols.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PairwiseMatch {
    pairs: Vec<(usize, usize)>,
}

impl PairwiseMatch {
    /// Requires both coordinates to be strictly increasing.
    pub fn new(pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs
            .windows(2)
            .any(|w| w[0].0 >= w[1].0 || w[0].1 >= w[1].1)
        {
            return Err(Error::InvariantViolation(
                "pairs must increase in both coordinates".into(),
            ));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Number of places where consecutive pairs are not adjacent on both sides.
    pub fn gaps(&self) -> usize {
        self.pairs
            .windows(2)
            .filter(|w| w[1].0 != w[0].0 + 1 || w[1].1.abs_diff(w[0].1) != 1)
            .count()
    }

    fn rank(&self, other: &Self) -> Ordering {
        other
            .len()
            .cmp(&self.len())
            .then(self.gaps().cmp(&other.gaps()))
            .then_with(|| self.pairs.cmp(&other.pairs))
    }
}

/// Up to `limit` distinct matches, best first: more pairs, then fewer gaps,
/// then leftmost. The empty match is returned only when nothing matches.
pub fn pairwise_match<L: AsRef<str>, R: AsRef<str>>(
    left: &[L],
    right: &[R],
    limit: usize,
) -> Vec<PairwiseMatch> {
    let limit = limit.max(1);
    let (n, m) = (left.len(), right.len());
    // suffix[i][j] = LCS length of left[i..] and right[j..]; an exact upper bound.
    let mut suffix = vec![vec![0usize; m + 1]; n + 1];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            suffix[i][j] = if left[i].as_ref() == right[j].as_ref() {
                1 + suffix[i + 1][j + 1]
            } else {
                suffix[i + 1][j].max(suffix[i][j + 1])
            };
        }
    }

    struct Walk<'a, L, R> {
        left: &'a [L],
        right: &'a [R],
        suffix: &'a [Vec<usize>],
        limit: usize,
        best: Vec<PairwiseMatch>,
        current: Vec<(usize, usize)>,
    }

    impl<L: AsRef<str>, R: AsRef<str>> Walk<'_, L, R> {
        fn go(&mut self, i: usize, j_min: usize) {
            if self.best.len() == self.limit {
                let worst = self.best.last().map_or(0, PairwiseMatch::len);
                if self.current.len() + self.suffix[i][j_min] < worst {
                    return;
                }
            }
            if i == self.left.len() || j_min == self.right.len() {
                if !self.current.is_empty() {
                    self.offer();
                }
                return;
            }
            for j in j_min..self.right.len() {
                if self.left[i].as_ref() == self.right[j].as_ref() {
                    self.current.push((i, j));
                    self.go(i + 1, j + 1);
                    self.current.pop();
                }
            }
            self.go(i + 1, j_min);
        }

        fn offer(&mut self) {
            let candidate = PairwiseMatch {
                pairs: self.current.clone(),
            };
            let at = self
                .best
                .partition_point(|b| b.rank(&candidate) == Ordering::Less);
            if at < self.limit {
                self.best.insert(at, candidate);
                self.best.truncate(self.limit);
            }
        }
    }

    let mut walk = Walk {
        left,
        right,
        suffix: &suffix,
        limit,
        best: Vec::new(),
        current: Vec::new(),
    };
    walk.go(0, 0);
    if walk.best.is_empty() {
        walk.best.push(PairwiseMatch::default());
    }
    walk.best
}

/// Best match of `left` against `right` read backwards. Pairs are reported in
/// the original coordinates of `right`, so the right index decreases.
pub fn match_reversed<L: AsRef<str>, R: AsRef<str>>(left: &[L], right: &[R]) -> PairwiseMatch {
    let reversed: Vec<&str> = right.iter().rev().map(AsRef::as_ref).collect();
    let best = pairwise_match(left, &reversed, 1).remove(0);
    let last = right.len().saturating_sub(1);
    PairwiseMatch {
        pairs: best.pairs.into_iter().map(|(l, r)| (l, last - r)).collect(),
    }
}
