//! Beam search over stepwise-built multiple alignments.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::sync::Arc;

use crate::encoder::derive_code_pattern;
use crate::error::{Error, Result};
use crate::pattern::{Grammar, Origin, SpPattern};
use crate::scalar::Bits;

use super::{
    roles_compatible, score, CellKind, CompressionScore, MultipleAlignment, Reach, RowMatch,
};

/// Search effort limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    /// Alignments kept per cycle and returned.
    pub beam_width: usize,
    /// Each cycle adds one row to every beam member.
    pub max_cycles: usize,
    /// Row limit including the New row.
    pub max_rows: usize,
    /// Also try every pattern right-to-left.
    pub allow_reverse: bool,
    pub require_full_new_coverage_for_encoding: bool,
    /// Candidate matches tried per (alignment, pattern) pair.
    pub match_limit: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            beam_width: 50,
            max_cycles: 10,
            max_rows: 32,
            allow_reverse: false,
            require_full_new_coverage_for_encoding: false,
            match_limit: 8,
        }
    }
}

impl SearchConfig {
    pub fn check(&self) -> Result<()> {
        let bad = |name: &str| Err(Error::Config(format!("{name} must be positive")));
        if self.beam_width == 0 {
            return bad("beam_width");
        }
        if self.max_cycles == 0 {
            return bad("max_cycles");
        }
        if self.match_limit == 0 {
            return bad("match_limit");
        }
        if self.max_rows < 2 {
            return Err(Error::Config("max_rows must be at least 2".into()));
        }
        Ok(())
    }
}

/// An alignment with its score and the keys used to rank it.
#[derive(Debug, Clone)]
pub struct ScoredAlignment<T> {
    pub alignment: MultipleAlignment,
    pub score: CompressionScore<T>,
    /// Code pattern tokens joined by spaces.
    pub code: String,
    pub signature: String,
    /// Unaccounted symbols when read as a derivation (decode ranking only).
    pub(crate) defect: usize,
    /// Old contents symbols left unmatched.
    pub(crate) loose: usize,
    /// Distinct pairs of rows sharing a column.
    pub(crate) links: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Objective {
    /// cd, then New coverage, rows, loose Old symbols, row links, code.
    Compression,
    /// cd, then fewest unresolved symbols: reading a code back out.
    Derivation,
}

impl<T: Bits> ScoredAlignment<T> {
    /// Every New symbol matched and, when encoding, every Old contents
    /// symbol too, so that the code reads back to exactly the input.
    pub(crate) fn is_complete(&self, objective: Objective) -> bool {
        self.score.is_complete() && (objective == Objective::Derivation || self.loose == 0)
    }

    /// Whether the alignment accounts for all of New and all Old contents.
    pub fn is_faithful(&self) -> bool {
        self.is_complete(Objective::Compression)
    }
}

pub(crate) struct SearchOutcome<T> {
    pub ranked: Vec<ScoredAlignment<T>>,
    /// Best alignments passing [`ScoredAlignment::is_complete`].
    pub complete: Vec<ScoredAlignment<T>>,
}

fn scored<T: Bits>(
    alignment: MultipleAlignment,
    grammar: &Grammar<T>,
    objective: Objective,
) -> Result<ScoredAlignment<T>> {
    let score = score(&alignment, grammar.cost_model())?;
    let code = derive_code_pattern(&alignment)
        .iter()
        .map(|s| s.token())
        .collect::<Vec<_>>()
        .join(" ");
    let defect = match objective {
        Objective::Compression => 0,
        Objective::Derivation => derivation_defect(&alignment, grammar),
    };
    let loose = alignment
        .columns()
        .iter()
        .filter(|c| !c.is_matched() && alignment.cell_kind(c.cells()[0]) == CellKind::OldContents)
        .count();
    let links = alignment
        .columns()
        .iter()
        .filter(|c| c.is_matched())
        .map(|c| (c.cells()[0].row, c.cells()[1].row))
        .collect::<HashSet<_>>()
        .len();
    let signature = alignment.signature();
    Ok(ScoredAlignment {
        alignment,
        score,
        code,
        signature,
        defect,
        loose,
        links,
    })
}

/// Unmatched New symbols, unmatched ID-symbols and unmatched non-surface
/// contents symbols: everything a derivation leaves unexplained.
fn derivation_defect<T: Bits>(ma: &MultipleAlignment, grammar: &Grammar<T>) -> usize {
    let surface = grammar.surface_alphabet();
    ma.columns()
        .iter()
        .filter(|c| !c.is_matched())
        .filter(|c| {
            let cell = c.cells()[0];
            match ma.cell_kind(cell) {
                CellKind::New | CellKind::OldId => true,
                CellKind::OldContents => !surface.contains(ma.symbol(cell).token()),
            }
        })
        .count()
}

fn rank<T: Bits>(a: &ScoredAlignment<T>, b: &ScoredAlignment<T>, objective: Objective) -> Ordering {
    let cd = b.score.cd.cmp_bits(&a.score.cd);
    let coverage = b.score.new_matched.cmp(&a.score.new_matched);
    let rows = a.alignment.rows().len().cmp(&b.alignment.rows().len());
    let head = match objective {
        Objective::Compression => cd.then(coverage).then(rows),
        Objective::Derivation => cd.then(a.defect.cmp(&b.defect)).then(coverage).then(rows),
    };
    head.then(a.loose.cmp(&b.loose))
        .then(a.links.cmp(&b.links))
        .then_with(|| a.code.cmp(&b.code))
        .then_with(|| a.signature.cmp(&b.signature))
}

fn keep_best<T: Bits>(pool: &mut Vec<ScoredAlignment<T>>, width: usize, objective: Objective) {
    pool.sort_by(|a, b| rank(a, b, objective));
    pool.truncate(width);
}

/// Builds alignments of `new` against `grammar`, best first.
///
/// Every cycle extends each beam member by one row for every pattern and
/// each of its best candidate matches; patterns may be reused, which is
/// what lets a self-referencing pattern nest inside itself. The result is
/// the best `beam_width` alignments seen in any cycle, the bare New
/// alignment included.
pub fn build_alignments<T: Bits>(
    new: &SpPattern,
    grammar: &Grammar<T>,
    cfg: &SearchConfig,
) -> Result<Vec<ScoredAlignment<T>>> {
    Ok(search(new, grammar, cfg, Objective::Compression)?.ranked)
}

pub(crate) fn search<T: Bits>(
    new: &SpPattern,
    grammar: &Grammar<T>,
    cfg: &SearchConfig,
    objective: Objective,
) -> Result<SearchOutcome<T>> {
    cfg.check()?;
    if new.origin() != Origin::New {
        return Err(Error::Config("search input must be a New pattern".into()));
    }
    let seed = scored(
        MultipleAlignment::from_new(Arc::new(new.clone())),
        grammar,
        objective,
    )?;
    let mut seen: HashSet<String> = HashSet::from([seed.signature.clone()]);
    let mut ranked = vec![seed.clone()];
    let mut complete: Vec<ScoredAlignment<T>> = if seed.is_complete(objective) {
        vec![seed.clone()]
    } else {
        Vec::new()
    };
    let mut beam = vec![seed];

    let orientations: &[bool] = if cfg.allow_reverse {
        &[false, true]
    } else {
        &[false]
    };
    for _ in 0..cfg.max_cycles {
        let mut next = Vec::new();
        for member in &beam {
            if member.alignment.rows().len() >= cfg.max_rows {
                continue;
            }
            let reach = member.alignment.reach();
            for pattern in grammar.patterns() {
                for &reversed in orientations {
                    if reversed && pattern.len() == 1 {
                        continue;
                    }
                    for rm in row_matches(
                        &member.alignment,
                        &reach,
                        pattern,
                        reversed,
                        grammar,
                        cfg.match_limit,
                    )? {
                        let merged = member.alignment.merge_row(pattern.clone(), &rm)?;
                        let candidate = scored(merged, grammar, objective)?;
                        if seen.insert(candidate.signature.clone()) {
                            next.push(candidate);
                        }
                    }
                }
            }
        }
        if next.is_empty() {
            break;
        }
        let all = next.len();
        keep_best(&mut next, all, objective);
        ranked.extend(next.iter().take(cfg.beam_width).cloned());
        keep_best(&mut ranked, cfg.beam_width, objective);
        complete.extend(
            next.iter()
                .filter(|s| s.is_complete(objective))
                .take(cfg.beam_width)
                .cloned(),
        );
        keep_best(&mut complete, cfg.beam_width, objective);
        next.truncate(cfg.beam_width);
        beam = next;
    }
    Ok(SearchOutcome { ranked, complete })
}

const NODE_BUDGET: usize = 200_000;

/// Best ways to attach `pattern` as a new row, ranked by the change in
/// compression difference they cause. Only maximal matches are returned (no
/// further pair could be added); the empty match appears only when the
/// pattern cannot touch the alignment at all.
fn row_matches<T: Bits>(
    ma: &MultipleAlignment,
    reach: &Reach,
    pattern: &Arc<SpPattern>,
    reversed: bool,
    grammar: &Grammar<T>,
    limit: usize,
) -> Result<Vec<RowMatch>> {
    let len = pattern.len();
    let pos_at = |k: usize| if reversed { len - 1 - k } else { k };
    let cost = |token: &str| grammar.symbol_cost(token).map(|c| c.to_f64());

    let mut base = 0.0;
    let mut cand: Vec<Vec<(usize, f64)>> = Vec::with_capacity(len);
    for k in 0..len {
        let symbol = &pattern.symbols()[pos_at(k)];
        let own = if symbol.is_id() {
            cost(symbol.token())?
        } else {
            0.0
        };
        base -= own;
        let mut options = Vec::new();
        for (c, column) in ma.columns().iter().enumerate() {
            if column.cells().len() != 1 {
                continue;
            }
            let cell = column.cells()[0];
            let kind = ma.cell_kind(cell);
            if ma.symbol(cell).token() != symbol.token() || !roles_compatible(kind, symbol.role()) {
                continue;
            }
            let theirs = match kind {
                CellKind::New | CellKind::OldId => cost(symbol.token())?,
                CellKind::OldContents => 0.0,
            };
            options.push((c, own + theirs));
        }
        options.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        cand.push(options);
    }
    let mut bound = vec![0.0; len + 1];
    for k in (0..len).rev() {
        bound[k] = bound[k + 1] + cand[k].first().map_or(0.0, |o| o.1.max(0.0));
    }

    let mut dfs = MatchDfs {
        cand: &cand,
        bound: &bound,
        reach,
        limit,
        nodes: 0,
        chosen: Vec::new(),
        best: Vec::new(),
    };
    dfs.go(0, base);
    Ok(dfs
        .best
        .into_iter()
        .map(|(_, chosen)| RowMatch {
            pairs: chosen.into_iter().map(|(k, c)| (pos_at(k), c)).collect(),
            reversed,
        })
        .collect())
}

struct MatchDfs<'a> {
    cand: &'a [Vec<(usize, f64)>],
    bound: &'a [f64],
    reach: &'a Reach,
    limit: usize,
    nodes: usize,
    chosen: Vec<(usize, usize)>,
    best: Vec<(f64, Vec<(usize, usize)>)>,
}

impl MatchDfs<'_> {
    fn consistent(&self, k: usize, col: usize) -> bool {
        self.chosen.iter().all(|&(ka, ca)| {
            ca != col
                && if ka < k {
                    !self.reach.precedes(col, ca)
                } else {
                    !self.reach.precedes(ca, col)
                }
        })
    }

    fn go(&mut self, k: usize, gain: f64) {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return;
        }
        if self.best.len() == self.limit {
            let worst = self.best.last().map_or(f64::NEG_INFINITY, |b| b.0);
            if gain + self.bound[k] < worst - 1e-9 {
                return;
            }
        }
        if k == self.cand.len() {
            if self.is_maximal() {
                self.offer(gain);
            }
            return;
        }
        for i in 0..self.cand[k].len() {
            let (col, w) = self.cand[k][i];
            if self.consistent(k, col) {
                self.chosen.push((k, col));
                self.go(k + 1, gain + w);
                self.chosen.pop();
            }
        }
        self.go(k + 1, gain);
    }

    fn is_maximal(&self) -> bool {
        (0..self.cand.len())
            .filter(|k| self.chosen.iter().all(|&(ka, _)| ka != *k))
            .all(|k| {
                self.cand[k]
                    .iter()
                    .all(|&(col, _)| !self.consistent(k, col))
            })
    }

    fn offer(&mut self, gain: f64) {
        let chosen = self.chosen.clone();
        let better = |a: &(f64, Vec<(usize, usize)>)| {
            let by_gain = if (a.0 - gain).abs() <= 1e-9 {
                Ordering::Equal
            } else {
                gain.total_cmp(&a.0)
            };
            by_gain
                .then(chosen.len().cmp(&a.1.len()))
                .then_with(|| a.1.cmp(&chosen))
                == Ordering::Less
        };
        let at = self.best.partition_point(better);
        if at < self.limit {
            self.best.insert(at, (gain, chosen));
            self.best.truncate(self.limit);
        }
    }
}
