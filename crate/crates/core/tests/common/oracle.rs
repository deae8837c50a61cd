//! Exhaustive reference search for small alignment problems.
//!
//! Works on plain token lists with its own column model, sharing no code
//! with the engine. Costs are one unit per symbol, so the compression
//! difference is matched New symbols minus unmatched ID-symbols.

use spmodel::MultipleAlignment;

#[derive(Debug, Clone)]
pub struct Instance {
    pub new: Vec<String>,
    /// Each symbol is `(token, is_id)`.
    pub patterns: Vec<Vec<(String, bool)>>,
}

#[derive(Clone)]
struct State {
    /// Pattern index of each row; row 0 is New and has none.
    rows: Vec<Option<usize>>,
    /// Column of every cell, by row then position.
    col_of: Vec<Vec<usize>>,
    /// Cells of every column.
    cols: Vec<Vec<(usize, usize)>>,
}

impl Instance {
    fn symbol(&self, st: &State, row: usize, pos: usize) -> (&str, bool) {
        match st.rows[row] {
            None => (&self.new[pos], false),
            Some(p) => {
                let (t, id) = &self.patterns[p][pos];
                (t, *id)
            }
        }
    }

    fn cd(&self, st: &State) -> i64 {
        let mut cd = 0;
        for col in &st.cols {
            if col.len() > 1 {
                cd += col.iter().filter(|c| c.0 == 0).count() as i64;
            } else {
                let (r, p) = col[0];
                if self.symbol(st, r, p).1 {
                    cd -= 1;
                }
            }
        }
        cd
    }

    fn upper_bound(&self, st: &State) -> i64 {
        let open: i64 = st
            .cols
            .iter()
            .filter(|c| c.len() == 1 && (c[0].0 == 0 || self.symbol(st, c[0].0, c[0].1).1))
            .count() as i64;
        self.cd(st) + open
    }

    fn reach(st: &State) -> Vec<Vec<bool>> {
        let n = st.cols.len();
        let mut r = vec![vec![false; n]; n];
        for row in &st.col_of {
            for w in row.windows(2) {
                r[w[0]][w[1]] = true;
            }
        }
        for k in 0..n {
            let via = r[k].clone();
            for row in r.iter_mut().filter(|row| row[k]) {
                for (cell, &step) in row.iter_mut().zip(&via) {
                    *cell |= step;
                }
            }
        }
        r
    }

    /// Best compression difference over every alignment with at most
    /// `max_rows` rows, New included.
    pub fn optimum(&self, max_rows: usize) -> i64 {
        let start = State {
            rows: vec![None],
            col_of: vec![(0..self.new.len()).collect()],
            cols: (0..self.new.len()).map(|q| vec![(0, q)]).collect(),
        };
        let mut best = 0;
        self.explore(&start, max_rows - 1, &mut best);
        best
    }

    fn explore(&self, st: &State, rows_left: usize, best: &mut i64) {
        *best = (*best).max(self.cd(st));
        if rows_left == 0 || self.upper_bound(st) <= *best {
            return;
        }
        let reach = Self::reach(st);
        for p in 0..self.patterns.len() {
            let mut chosen = Vec::new();
            self.assign(st, &reach, p, 0, &mut chosen, rows_left, best);
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn assign(
        &self,
        st: &State,
        reach: &[Vec<bool>],
        p: usize,
        k: usize,
        chosen: &mut Vec<Option<usize>>,
        rows_left: usize,
        best: &mut i64,
    ) {
        let pattern = &self.patterns[p];
        if k == pattern.len() {
            if chosen.iter().any(Option::is_some) {
                let child = self.attach(st, p, chosen);
                self.explore(&child, rows_left - 1, best);
            }
            return;
        }
        let (token, is_id) = (&pattern[k].0, pattern[k].1);
        chosen.push(None);
        self.assign(st, reach, p, k + 1, chosen, rows_left, best);
        chosen.pop();
        for (c, cells) in st.cols.iter().enumerate() {
            if cells.len() != 1 {
                continue;
            }
            let (r, q) = cells[0];
            let (t, other_id) = self.symbol(st, r, q);
            let roles_ok = if r == 0 {
                true
            } else {
                !is_id && other_id || is_id && !other_id
            };
            if t != token || !roles_ok || chosen.contains(&Some(c)) {
                continue;
            }
            let ordered = chosen.iter().flatten().all(|&earlier| !reach[c][earlier]);
            if ordered {
                chosen.push(Some(c));
                self.assign(st, reach, p, k + 1, chosen, rows_left, best);
                chosen.pop();
            }
        }
    }

    fn attach(&self, st: &State, p: usize, chosen: &[Option<usize>]) -> State {
        let mut next = st.clone();
        let row = next.rows.len();
        next.rows.push(Some(p));
        let mut cols = Vec::with_capacity(chosen.len());
        for (k, slot) in chosen.iter().enumerate() {
            let c = match slot {
                Some(c) => *c,
                None => {
                    next.cols.push(Vec::new());
                    next.cols.len() - 1
                }
            };
            next.cols[c].push((row, k));
            cols.push(c);
        }
        next.col_of.push(cols);
        next
    }
}

/// Compression difference of an engine alignment in unit costs, computed
/// from its columns alone.
pub fn unit_cd(ma: &MultipleAlignment) -> i64 {
    let mut cd = 0;
    for col in ma.columns() {
        let cells = col.cells();
        if cells.len() > 1 {
            cd += cells.iter().filter(|c| c.row == 0).count() as i64;
        } else if ma.symbol(cells[0]).is_id() {
            cd -= 1;
        }
    }
    cd
}
