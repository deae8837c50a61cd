//! Multiple alignments of one New pattern with instances of Old patterns.
//!
//! An alignment is a set of rows plus an ordered list of columns. Each column
//! holds cells `(row, position)` whose symbols share one token. Columns also
//! form a partial order (each row's symbols must appear in row order); the
//! stored column list is one topological order of it. Merging a row only
//! needs to respect the partial order, so rows may be added in any sequence.
//!
//! Column occupancy follows the pairing rules visible in the reference
//! alignments: a column holds at most two cells, never two ID-symbols and
//! never two contents symbols from Old rows. New symbols pair with either
//! role.

mod pairwise;
mod render;
mod score;
pub(crate) mod search;

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt::Write as _;
use std::sync::Arc;

pub use pairwise::{match_reversed, pairwise_match, PairwiseMatch};
pub use render::{dump, parse_render, render, RenderedColumn};
pub use score::{score, CompressionScore};
pub use search::{build_alignments, ScoredAlignment, SearchConfig};

use crate::error::{Error, Result};
use crate::pattern::{Origin, PatternId, Role, SpPattern, Symbol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowInstance {
    pub row_index: usize,
    pub pattern: Arc<SpPattern>,
    /// 1 for the first appearance of a pattern, 2 for the second, ...
    pub instance_ordinal: usize,
    /// Row symbols run right-to-left across the columns.
    pub reversed: bool,
}

impl RowInstance {
    pub fn pattern_id(&self) -> &PatternId {
        self.pattern.id()
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Pattern position of the `k`-th symbol in alignment order.
    pub fn position_at(&self, k: usize) -> usize {
        if self.reversed {
            self.len() - 1 - k
        } else {
            k
        }
    }

    /// Positions in the order they must appear across columns.
    pub fn ordered_positions(&self) -> Vec<usize> {
        (0..self.len()).map(|k| self.position_at(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    pub row: usize,
    pub pos: usize,
}

/// Occupant class of a cell, for the column pairing rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellKind {
    New,
    OldId,
    OldContents,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    cells: Vec<Cell>,
}

impl Column {
    pub fn new(mut cells: Vec<Cell>) -> Self {
        cells.sort();
        Self { cells }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_matched(&self) -> bool {
        self.cells.len() >= 2
    }

    pub fn contains_row(&self, row: usize) -> bool {
        self.cells.iter().any(|c| c.row == row)
    }

    fn insert(&mut self, cell: Cell) {
        let at = self.cells.partition_point(|c| *c < cell);
        self.cells.insert(at, cell);
    }
}

/// Pattern positions paired with existing columns, for [`MultipleAlignment::merge_row`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Default)]
pub struct RowMatch {
    /// `(pattern position, column index)`, sorted by alignment order of the
    /// pattern positions.
    pub pairs: Vec<(usize, usize)>,
    pub reversed: bool,
}

/// Reachability between columns: `precedes(a, b)` when column `a` must come
/// before column `b` in every valid ordering.
#[derive(Debug, Clone)]
pub struct Reach {
    words: usize,
    bits: Vec<u64>,
}

impl Reach {
    pub fn precedes(&self, a: usize, b: usize) -> bool {
        self.bits[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultipleAlignment {
    rows: Vec<RowInstance>,
    columns: Vec<Column>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationKind {
    NotNewRow,
    EmptyColumn,
    CellOutOfRange,
    TokenMismatch,
    DuplicateCell,
    MissingCell,
    RowOrderViolation,
    ColumnConflict,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub kind: ViolationKind,
    pub row: Option<usize>,
    pub column: Option<usize>,
}

impl MultipleAlignment {
    /// The alignment of a New pattern on its own: one column per symbol.
    pub fn from_new(new: Arc<SpPattern>) -> Self {
        let columns = (0..new.len())
            .map(|pos| Column::new(vec![Cell { row: 0, pos }]))
            .collect();
        let rows = vec![RowInstance {
            row_index: 0,
            pattern: new,
            instance_ordinal: 1,
            reversed: false,
        }];
        Self { rows, columns }
    }

    /// Assembles an alignment without checking it; see [`Self::validate`].
    pub fn from_parts(rows: Vec<RowInstance>, columns: Vec<Column>) -> Self {
        Self { rows, columns }
    }

    pub fn rows(&self) -> &[RowInstance] {
        &self.rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn new_pattern(&self) -> &SpPattern {
        &self.rows[0].pattern
    }

    pub fn symbol(&self, cell: Cell) -> &Symbol {
        &self.rows[cell.row].pattern.symbols()[cell.pos]
    }

    pub fn cell_kind(&self, cell: Cell) -> CellKind {
        if cell.row == 0 {
            CellKind::New
        } else if self.symbol(cell).role() == Role::Id {
            CellKind::OldId
        } else {
            CellKind::OldContents
        }
    }

    pub fn column_token(&self, column: usize) -> &str {
        self.symbol(self.columns[column].cells[0]).token()
    }

    /// Column tokens, left to right.
    pub fn projection(&self) -> Vec<&str> {
        (0..self.columns.len())
            .map(|c| self.column_token(c))
            .collect()
    }

    /// `locate()[row][pos]` is the column holding that cell.
    pub fn locate(&self) -> Vec<Vec<usize>> {
        let mut at: Vec<Vec<usize>> = self
            .rows
            .iter()
            .map(|r| vec![usize::MAX; r.len()])
            .collect();
        for (c, column) in self.columns.iter().enumerate() {
            for cell in &column.cells {
                at[cell.row][cell.pos] = c;
            }
        }
        at
    }

    /// Transitive closure of the row-order constraints over columns.
    pub fn reach(&self) -> Reach {
        let n = self.columns.len();
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        let at = self.locate();
        let next: Vec<Vec<Option<usize>>> = self
            .rows
            .iter()
            .map(|row| {
                let order = row.ordered_positions();
                let mut next = vec![None; row.len()];
                for pair in order.windows(2) {
                    next[pair[0]] = Some(pair[1]);
                }
                next
            })
            .collect();
        for c in (0..n).rev() {
            for cell in &self.columns[c].cells {
                if let Some(pos) = next[cell.row][cell.pos] {
                    let s = at[cell.row][pos];
                    bits[c * words + s / 64] |= 1 << (s % 64);
                    if s > c {
                        for w in 0..words {
                            let v = bits[s * words + w];
                            bits[c * words + w] |= v;
                        }
                    }
                }
            }
        }
        Reach { words, bits }
    }

    /// Adds a row whose match is given as order-preserving pairs against the
    /// column projection.
    pub fn merge(&self, pattern: Arc<SpPattern>, pm: &PairwiseMatch) -> Result<Self> {
        let mut pairs = pm.pairs().to_vec();
        pairs.sort();
        self.merge_row(
            pattern,
            &RowMatch {
                pairs,
                reversed: false,
            },
        )
    }

    /// Adds one row for `pattern`. Matched positions join existing
    /// single-cell columns; the rest get fresh columns placed next to their
    /// matched neighbours. `self` is left untouched.
    pub fn merge_row(&self, pattern: Arc<SpPattern>, rm: &RowMatch) -> Result<Self> {
        if pattern.origin() != Origin::Old {
            return Err(Error::InvariantViolation(
                "only Old patterns can be merged".into(),
            ));
        }
        let row_index = self.rows.len();
        let instance_ordinal = 1 + self
            .rows
            .iter()
            .filter(|r| r.pattern_id() == pattern.id())
            .count();
        let row = RowInstance {
            row_index,
            pattern,
            instance_ordinal,
            reversed: rm.reversed,
        };
        self.check_row_match(&row, rm)?;

        let n = self.columns.len();
        let mut columns = self.columns.clone();
        let mut keys: Vec<(usize, usize)> = (0..n).map(|i| (2 * i + 1, 0)).collect();
        let by_order: BTreeMap<usize, usize> = rm
            .pairs
            .iter()
            .map(|&(pos, col)| (order_of(&row, pos), col))
            .collect();
        let first_anchor = by_order.values().next().copied();
        let mut last_anchor: Option<usize> = None;
        for k in 0..row.len() {
            let pos = row.position_at(k);
            let cell = Cell {
                row: row_index,
                pos,
            };
            if let Some(&col) = by_order.get(&k) {
                columns[col].insert(cell);
                last_anchor = Some(col);
                continue;
            }
            let key = match (last_anchor, first_anchor) {
                (Some(a), _) => (2 * a + 1, k + 1),
                (None, Some(f)) => (2 * f, k),
                (None, None) => (2 * n, k),
            };
            columns.push(Column::new(vec![cell]));
            keys.push(key);
        }

        let mut rows = self.rows.clone();
        rows.push(row);
        let merged = Self { rows, columns };
        let order = merged.topological_order(|c| keys[c])?;
        Ok(merged.reordered(&order))
    }

    fn check_row_match(&self, row: &RowInstance, rm: &RowMatch) -> Result<()> {
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        let reach = self.reach();
        let mut prev: Option<usize> = None;
        let mut chosen: Vec<usize> = Vec::with_capacity(rm.pairs.len());
        for &(pos, col) in &rm.pairs {
            if pos >= row.len() || col >= self.columns.len() {
                return fail(format!("pair ({pos}, {col}) out of range"));
            }
            let k = order_of(row, pos);
            if prev.is_some_and(|p| p >= k) {
                return fail("pattern positions are not in alignment order".into());
            }
            prev = Some(k);
            let column = &self.columns[col];
            if column.cells.len() != 1 {
                return fail(format!("column {col} is already matched"));
            }
            let existing = column.cells[0];
            let symbol = &row.pattern.symbols()[pos];
            if self.symbol(existing).token() != symbol.token() {
                return fail(format!(
                    "token {} does not match column {col}",
                    symbol.token()
                ));
            }
            if !roles_compatible(self.cell_kind(existing), symbol.role()) {
                return fail(format!(
                    "column {col} cannot take another {:?} symbol",
                    symbol.role()
                ));
            }
            if chosen.iter().any(|&c| c == col || reach.precedes(col, c)) {
                return fail(format!("column {col} would cross an earlier match"));
            }
            chosen.push(col);
        }
        Ok(())
    }

    /// Kahn's algorithm, taking the available column with the smallest key.
    fn topological_order<K: Ord>(&self, key: impl Fn(usize) -> K) -> Result<Vec<usize>> {
        let n = self.columns.len();
        let at = self.locate();
        let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut indegree = vec![0usize; n];
        for (r, row) in self.rows.iter().enumerate() {
            for pair in row.ordered_positions().windows(2) {
                let (a, b) = (at[r][pair[0]], at[r][pair[1]]);
                if a == usize::MAX || b == usize::MAX {
                    return Err(Error::InvariantViolation(format!(
                        "row {r} has an unplaced symbol"
                    )));
                }
                succ[a].push(b);
                indegree[b] += 1;
            }
        }
        let mut heap: BinaryHeap<Reverse<(K, usize)>> = (0..n)
            .filter(|&c| indegree[c] == 0)
            .map(|c| Reverse((key(c), c)))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, c))) = heap.pop() {
            order.push(c);
            for &s in &succ[c] {
                indegree[s] -= 1;
                if indegree[s] == 0 {
                    heap.push(Reverse((key(s), s)));
                }
            }
        }
        if order.len() != n {
            return Err(Error::InvariantViolation("column order has a cycle".into()));
        }
        Ok(order)
    }

    fn reordered(&self, order: &[usize]) -> Self {
        Self {
            rows: self.rows.clone(),
            columns: order.iter().map(|&c| self.columns[c].clone()).collect(),
        }
    }

    /// A text key identical for alignments that differ only in the order
    /// rows were added or in how incomparable columns were laid out.
    pub fn signature(&self) -> String {
        let content: Vec<Vec<(String, usize, bool)>> = self
            .columns
            .iter()
            .map(|col| {
                col.cells
                    .iter()
                    .map(|cell| {
                        let row = &self.rows[cell.row];
                        let pid = if cell.row == 0 {
                            String::new()
                        } else {
                            row.pattern_id().0.clone()
                        };
                        (pid, cell.pos, row.reversed)
                    })
                    .collect::<Vec<_>>()
            })
            .map(|mut v| {
                v.sort();
                v
            })
            .collect();
        let order = self
            .topological_order(|c| (content[c].clone(), c))
            .expect("alignment columns are acyclic");
        let mut label = vec![usize::MAX; self.rows.len()];
        let mut next_label = 0;
        let mut out = String::new();
        for &c in &order {
            for cell in &self.columns[c].cells {
                if label[cell.row] == usize::MAX {
                    label[cell.row] = next_label;
                    next_label += 1;
                }
            }
            let mut parts: Vec<(String, usize, bool, usize)> = self.columns[c]
                .cells
                .iter()
                .map(|cell| {
                    let row = &self.rows[cell.row];
                    let pid = if cell.row == 0 {
                        String::new()
                    } else {
                        row.pattern_id().0.clone()
                    };
                    (pid, cell.pos, row.reversed, label[cell.row])
                })
                .collect();
            parts.sort();
            out.push('[');
            for (pid, pos, rev, l) in parts {
                let _ = write!(out, "{pid}:{pos}{}@{l};", if rev { "r" } else { "" });
            }
            out.push(']');
        }
        out
    }

    /// Checks every structural invariant; an empty list means valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let v = |kind, row, column| Violation { kind, row, column };
        match self.rows.first() {
            Some(r) if r.pattern.origin() == Origin::New && !r.reversed => {}
            _ => out.push(v(ViolationKind::NotNewRow, Some(0), None)),
        }
        let mut seen: Vec<Vec<bool>> = self.rows.iter().map(|r| vec![false; r.len()]).collect();
        let mut last: Vec<Option<usize>> = vec![None; self.rows.len()];
        for (c, column) in self.columns.iter().enumerate() {
            if column.cells.is_empty() {
                out.push(v(ViolationKind::EmptyColumn, None, Some(c)));
                continue;
            }
            let mut in_range = Vec::new();
            for &cell in &column.cells {
                if cell.row >= self.rows.len() || cell.pos >= self.rows[cell.row].len() {
                    out.push(v(ViolationKind::CellOutOfRange, Some(cell.row), Some(c)));
                } else {
                    in_range.push(cell);
                }
            }
            if let Some(&first) = in_range.first() {
                let token = self.symbol(first).token();
                if in_range
                    .iter()
                    .any(|&cell| self.symbol(cell).token() != token)
                {
                    out.push(v(ViolationKind::TokenMismatch, None, Some(c)));
                }
            }
            let ids = in_range
                .iter()
                .filter(|&&cell| self.cell_kind(cell) == CellKind::OldId)
                .count();
            let olds = in_range
                .iter()
                .filter(|&&cell| self.cell_kind(cell) == CellKind::OldContents)
                .count();
            if column.cells.len() > 2 || ids > 1 || olds > 1 {
                out.push(v(ViolationKind::ColumnConflict, None, Some(c)));
            }
            for &cell in &in_range {
                if std::mem::replace(&mut seen[cell.row][cell.pos], true) {
                    out.push(v(ViolationKind::DuplicateCell, Some(cell.row), Some(c)));
                    continue;
                }
                let k = order_of(&self.rows[cell.row], cell.pos);
                if last[cell.row].is_some_and(|p| p >= k) {
                    out.push(v(ViolationKind::RowOrderViolation, Some(cell.row), Some(c)));
                }
                last[cell.row] = Some(k);
            }
        }
        for (r, flags) in seen.iter().enumerate() {
            if flags.iter().any(|f| !f) {
                out.push(v(ViolationKind::MissingCell, Some(r), None));
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}

fn order_of(row: &RowInstance, pos: usize) -> usize {
    if row.reversed {
        row.len() - 1 - pos
    } else {
        pos
    }
}

/// Whether a symbol with `role` may join a column whose only cell is `existing`.
pub fn roles_compatible(existing: CellKind, role: Role) -> bool {
    match existing {
        CellKind::New => true,
        CellKind::OldId => role == Role::Contents,
        CellKind::OldContents => role == Role::Id,
    }
}
