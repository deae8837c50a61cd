//! Text layout of alignments.
//!
//! Rows are printed top to bottom with the row number at both ends. Every
//! column gets its own horizontal slot. Cells of a matched column are joined
//! by a vertical line of `|`, drawn through the rows and connector lines
//! between them.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::MultipleAlignment;

struct Layout {
    xs: Vec<usize>,
    right: usize,
    spans: Vec<Option<(usize, usize)>>,
}

fn layout(ma: &MultipleAlignment) -> Layout {
    let label_width = (ma.rows().len() - 1).to_string().len();
    let mut x = label_width + 1;
    let mut xs = Vec::with_capacity(ma.columns().len());
    let mut spans = Vec::with_capacity(ma.columns().len());
    for (c, column) in ma.columns().iter().enumerate() {
        xs.push(x);
        x += ma.column_token(c).chars().count() + 1;
        let rows = column.cells().iter().map(|cell| cell.row);
        spans.push(
            column
                .is_matched()
                .then(|| (rows.clone().min().unwrap(), rows.max().unwrap())),
        );
    }
    Layout {
        xs,
        right: x,
        spans,
    }
}

fn put(line: &mut Vec<char>, x: usize, text: &str) {
    for (i, ch) in text.chars().enumerate() {
        if x + i >= line.len() {
            line.resize(x + i + 1, ' ');
        }
        line[x + i] = ch;
    }
}

fn finish(line: Vec<char>) -> String {
    line.into_iter().collect::<String>().trim_end().to_owned()
}

pub fn render(ma: &MultipleAlignment) -> String {
    let lay = layout(ma);
    let at = ma.locate();
    let mut out = String::new();
    for (r, cols) in at.iter().enumerate() {
        let mut line = vec![' '; lay.right];
        put(&mut line, 0, &r.to_string());
        for (c, &x) in lay.xs.iter().enumerate() {
            if cols.contains(&c) {
                put(&mut line, x, ma.column_token(c));
            } else if lay.spans[c].is_some_and(|(lo, hi)| lo < r && r < hi) {
                put(&mut line, x, "|");
            }
        }
        put(&mut line, lay.right, &r.to_string());
        out.push_str(&finish(line));
        out.push('\n');
        if r + 1 < ma.rows().len() {
            let mut connector = vec![' '; lay.right];
            for (c, &x) in lay.xs.iter().enumerate() {
                if lay.spans[c].is_some_and(|(lo, hi)| lo <= r && r < hi) {
                    put(&mut connector, x, "|");
                }
            }
            out.push_str(&finish(connector));
            out.push('\n');
        }
    }
    out
}

/// One line per column: `col <ordinal>: <token> <row>:<pos> ...`.
pub fn dump(ma: &MultipleAlignment) -> String {
    let mut out = String::new();
    for (c, column) in ma.columns().iter().enumerate() {
        let _ = write!(out, "col {}: {}", c + 1, ma.column_token(c));
        for cell in column.cells() {
            let _ = write!(out, " {}:{}", cell.row, cell.pos);
        }
        out.push('\n');
    }
    out
}

/// A column recovered from rendered text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedColumn {
    pub token: String,
    pub rows: Vec<usize>,
}

/// Reads back the output of [`render`]: the columns, left to right, with the
/// rows that hold a symbol in each. Tokens must not be a bare `|`.
pub fn parse_render(text: &str) -> Vec<RenderedColumn> {
    let mut columns: BTreeMap<usize, RenderedColumn> = BTreeMap::new();
    for (r, line) in text.lines().step_by(2).enumerate() {
        let mut words = Vec::new();
        let mut start = None;
        for (i, ch) in line.chars().chain(std::iter::once(' ')).enumerate() {
            match (ch == ' ', start) {
                (false, None) => start = Some(i),
                (true, Some(s)) => {
                    words.push((s, line.chars().skip(s).take(i - s).collect::<String>()));
                    start = None;
                }
                _ => {}
            }
        }
        // first and last words are the row labels
        let inner = words.len().saturating_sub(1);
        for (x, word) in words.into_iter().take(inner).skip(1) {
            if word == "|" {
                continue;
            }
            columns
                .entry(x)
                .or_insert_with(|| RenderedColumn {
                    token: word,
                    rows: Vec::new(),
                })
                .rows
                .push(r);
        }
    }
    columns.into_values().collect()
}
