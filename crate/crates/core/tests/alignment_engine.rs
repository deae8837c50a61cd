mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::{fig1, fig2, new, toks, FIG1_CODE, FIG1_SENTENCE, FIG2_SENTENCE};
use spmodel::{
    build_alignments, dump, match_reversed, pairwise_match, parse_pattern, parse_render, render,
    score, Cell, Column, CostMode, CostModel, Error, Exact, Grammar, GrammarExact,
    MultipleAlignment, PairwiseMatch, RenderedColumn, RowInstance, RowMatch, SearchConfig,
    SpPattern, ViolationKind,
};

const FIGURE_1: &str = "\
0                       t h e                a p p l e    s                a r e         s w e e t       0
                        | | |                | | | | |    |                | | |         | | | | |
1                       | | |         N Nr 6 a p p l e #N |                | | |         | | | | |       1
                        | | |         | |              |  |                | | |         | | | | |
2                       | | |    N Np N Nr             #N s #N             | | |         | | | | |       2
                        | | |    | |                        |              | | |         | | | | |
3                  D 17 t h e #D | |                        |              | | |         | | | | |       3
                   |          |  | |                        |              | | |         | | | | |
4            NP 0a D          #D N |                        #N #NP         | | |         | | | | |       4
             |                     |                            |          | | |         | | | | |
5            |                     |                            |  V Vp 11 a r e #V      | | | | |       5
             |                     |                            |  | |           |       | | | | |
6 S Num    ; NP                    |                           #NP V |           #V A    | | | | | #A #S 6
     |     |                       |                                 |              |    | | | | | |
7    |     |                       |                                 |              A 21 s w e e t #A    7
     |     |                       |                                 |
8   Num PL ;                       Np                                Vp                                  8
";

const FIGURE_2: &str = "\
0     a b c     a b c     a b c     a b c     $                0
      | | |     | | |     | | |     | | |     |
1     | | |     | | | X 1 a b c X 1 | | |     |    #X #X       1
      | | |     | | | | |       | | | | |     |    |  |
2     | | |     | | | | |       X 1 a b c X 1 | #X #X |        2
      | | |     | | | | |                 | | | |     |
3     | | | X 1 a b c X 1                 | | | |     #X #X    3
      | | | | |                           | | | |        |
4 X 1 a b c X 1                           | | | |        #X #X 4
                                          | | | |
5                                         X 1 $ #X             5
";

fn old(text: &str) -> Arc<SpPattern> {
    Arc::new(parse_pattern(text, true).unwrap())
}

fn bare(text: &str) -> MultipleAlignment {
    MultipleAlignment::from_new(Arc::new(new(text)))
}

fn pm(pairs: &[(usize, usize)]) -> PairwiseMatch {
    PairwiseMatch::new(pairs.to_vec()).unwrap()
}

fn column_of(ma: &MultipleAlignment, row: usize, pos: usize) -> usize {
    ma.columns()
        .iter()
        .position(|c| c.cells().contains(&Cell { row, pos }))
        .unwrap()
}

fn best(text: &str, g: &GrammarExact) -> MultipleAlignment {
    build_alignments(&new(text), g, &SearchConfig::default())
        .unwrap()
        .remove(0)
        .alignment
}

/// Tokens of each rendered row, in column order.
fn row_tokens(cols: &[RenderedColumn]) -> Vec<Vec<String>> {
    let n = cols
        .iter()
        .flat_map(|c| c.rows.iter())
        .max()
        .map_or(0, |m| m + 1);
    let mut rows = vec![Vec::new(); n];
    for c in cols {
        for &r in &c.rows {
            rows[r].push(c.token.clone());
        }
    }
    rows
}

/// Multiset of `(token, rows)` columns after renaming rows.
fn incidence(cols: &[RenderedColumn], rename: &[usize]) -> Vec<(String, Vec<usize>)> {
    let mut out: Vec<_> = cols
        .iter()
        .map(|c| {
            let mut rows: Vec<_> = c.rows.iter().map(|&r| rename[r]).collect();
            rows.sort();
            (c.token.clone(), rows)
        })
        .collect();
    out.sort();
    out
}

/// Whether two renders connect the same symbols, allowing rows that hold
/// the same pattern to be numbered differently.
fn same_incidence(expected: &[RenderedColumn], actual: &[RenderedColumn]) -> bool {
    let want_rows = row_tokens(expected);
    let got_rows = row_tokens(actual);
    if want_rows.len() != got_rows.len() || want_rows[0] != got_rows[0] {
        return false;
    }
    let want = incidence(expected, &(0..want_rows.len()).collect::<Vec<_>>());
    let mut rename = vec![usize::MAX; got_rows.len()];
    rename[0] = 0;
    let mut used = vec![false; want_rows.len()];
    used[0] = true;
    search_renaming(
        1,
        &want_rows,
        &got_rows,
        &mut rename,
        &mut used,
        &|rename| incidence(actual, rename) == want,
    )
}

fn search_renaming(
    r: usize,
    want_rows: &[Vec<String>],
    got_rows: &[Vec<String>],
    rename: &mut Vec<usize>,
    used: &mut Vec<bool>,
    accept: &dyn Fn(&[usize]) -> bool,
) -> bool {
    if r == got_rows.len() {
        return accept(rename);
    }
    for target in 1..want_rows.len() {
        if used[target] || want_rows[target] != got_rows[r] {
            continue;
        }
        used[target] = true;
        rename[r] = target;
        if search_renaming(r + 1, want_rows, got_rows, rename, used, accept) {
            return true;
        }
        used[target] = false;
    }
    false
}

#[test]
fn pairwise_examples() {
    let m = pairwise_match(&toks("a b c"), &toks("a x c"), 1);
    assert_eq!(m[0].pairs(), [(0, 0), (2, 2)]);

    let m = pairwise_match(&toks("t h e"), &toks("D 17 t h e #D"), 1);
    assert_eq!(m[0].pairs(), [(0, 2), (1, 3), (2, 4)]);

    let m = pairwise_match(&toks("a b a b"), &toks("a b"), 3);
    let got: Vec<_> = m.iter().map(|m| m.pairs().to_vec()).collect();
    assert_eq!(
        got,
        [
            vec![(0, 0), (1, 1)],
            vec![(2, 0), (3, 1)],
            vec![(0, 0), (3, 1)]
        ]
    );
}

#[test]
fn pairwise_returns_empty_match_only_without_alternatives() {
    let m = pairwise_match(&toks("a b"), &toks("c d"), 4);
    assert_eq!(m.len(), 1);
    assert!(m[0].is_empty());
}

#[test]
fn pairwise_matches_are_order_preserving_and_token_equal() {
    let left = toks("a b a c b a");
    let right = toks("b a c a b");
    for m in pairwise_match(&left, &right, 10) {
        assert!(m
            .pairs()
            .windows(2)
            .all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1));
        assert!(m.pairs().iter().all(|&(l, r)| left[l] == right[r]));
    }
}

#[test]
fn reversed_examples() {
    let m = match_reversed(
        &toks("i n f o r m a t i o n"),
        &toks("n o i t a m r o f n i"),
    );
    assert_eq!(m.len(), 11);
    assert_eq!(match_reversed(&toks("a"), &toks("a")).pairs(), [(0, 0)]);
    assert_eq!(
        match_reversed(&toks("a b c"), &toks("c b a")).pairs(),
        [(0, 2), (1, 1), (2, 0)]
    );
}

#[test]
fn reversed_matching_is_symmetric_in_size() {
    let cases = [
        ("a b c d", "d x c b"),
        ("r a c e c a r", "c a r"),
        ("a b a b", "b b a"),
    ];
    for (a, b) in cases {
        assert_eq!(
            match_reversed(&toks(a), &toks(b)).len(),
            match_reversed(&toks(b), &toks(a)).len(),
            "{a} / {b}"
        );
    }
}

#[test]
fn merge_leaves_ids_unmatched_around_a_chunk() {
    let ma = bare("t h e");
    let merged = ma
        .merge(old("D/i 17/i t h e #D/i"), &pm(&[(2, 0), (3, 1), (4, 2)]))
        .unwrap();
    assert!(merged.is_valid());
    assert_eq!(merged.rows().len(), 2);
    assert_eq!(
        merged.columns().iter().filter(|c| c.is_matched()).count(),
        3
    );
    assert_eq!(merged.columns().len(), 6);
    assert_eq!(ma, bare("t h e"));
}

#[test]
fn merge_with_empty_match_adds_an_unmatched_row() {
    let ma = bare("a b");
    let merged = ma.merge(old("P/i x y #P/i"), &pm(&[])).unwrap();
    assert!(merged.is_valid());
    assert_eq!(merged.rows().len(), 2);
    assert_eq!(merged.columns().len(), 6);
    assert!(merged.columns().iter().all(|c| !c.is_matched()));
}

#[test]
fn merge_rejects_crossing_pairs() {
    let ma = bare("a b");
    let crossing = RowMatch {
        pairs: vec![(1, 1), (2, 0)],
        reversed: false,
    };
    let err = ma.merge_row(old("P/i a b #P/i"), &crossing).unwrap_err();
    assert!(matches!(err, Error::InvariantViolation(_)));
    assert!(PairwiseMatch::new(vec![(1, 1), (2, 0)]).is_err());
}

#[test]
fn second_instance_nests_inside_the_first() {
    let pattern = old("X/i 1/i a b c X 1 #X #X/i");
    let ma = bare(FIG2_SENTENCE);
    let first = ma
        .merge(
            pattern.clone(),
            &pm(&[
                (2, column_of(&ma, 0, 0)),
                (3, column_of(&ma, 0, 1)),
                (4, column_of(&ma, 0, 2)),
            ]),
        )
        .unwrap();
    let inner = RowMatch {
        pairs: vec![
            (0, column_of(&first, 1, 5)),
            (1, column_of(&first, 1, 6)),
            (2, column_of(&first, 0, 3)),
            (3, column_of(&first, 0, 4)),
            (4, column_of(&first, 0, 5)),
            (8, column_of(&first, 1, 7)),
        ],
        reversed: false,
    };
    let second = first.merge_row(pattern, &inner).unwrap();
    assert!(second.is_valid(), "{:?}", second.validate());
    assert_eq!(second.rows()[2].instance_ordinal, 2);
    assert_eq!(second.rows()[1].instance_ordinal, 1);
    // the inner row's leading X 1 sits in the outer row's interior X 1
    assert_eq!(column_of(&second, 2, 0), column_of(&second, 1, 5));
    assert_eq!(column_of(&second, 2, 8), column_of(&second, 1, 7));
}

#[test]
fn validate_accepts_the_first_figure_alignment() {
    let ma = best(FIG1_SENTENCE, &fig1());
    assert!(ma.validate().is_empty());
}

#[test]
fn validate_reports_token_mismatch() {
    let ma = bare("a b");
    let p = old("P/i b #P/i");
    let rows = vec![
        ma.rows()[0].clone(),
        RowInstance {
            row_index: 1,
            pattern: p,
            instance_ordinal: 1,
            reversed: false,
        },
    ];
    let cell = |row, pos| Cell { row, pos };
    let columns = vec![
        Column::new(vec![cell(1, 0)]),
        Column::new(vec![cell(0, 0), cell(1, 1)]),
        Column::new(vec![cell(0, 1)]),
        Column::new(vec![cell(1, 2)]),
    ];
    let kinds: Vec<_> = MultipleAlignment::from_parts(rows, columns)
        .validate()
        .into_iter()
        .map(|v| v.kind)
        .collect();
    assert_eq!(kinds, [ViolationKind::TokenMismatch]);
}

#[test]
fn validate_reports_row_order_violation() {
    let ma = bare("a b");
    let rows = vec![
        ma.rows()[0].clone(),
        RowInstance {
            row_index: 1,
            pattern: old("P/i a b #P/i"),
            instance_ordinal: 1,
            reversed: false,
        },
        RowInstance {
            row_index: 2,
            pattern: old("Q/i a b #Q/i"),
            instance_ordinal: 1,
            reversed: false,
        },
    ];
    let cell = |row, pos| Cell { row, pos };
    let columns = vec![
        Column::new(vec![cell(1, 0)]),
        Column::new(vec![cell(2, 0)]),
        Column::new(vec![cell(0, 0), cell(1, 1)]),
        Column::new(vec![cell(2, 2)]),
        Column::new(vec![cell(2, 1)]),
        Column::new(vec![cell(0, 1), cell(1, 2)]),
        Column::new(vec![cell(1, 3)]),
        Column::new(vec![cell(2, 3)]),
    ];
    let violations = MultipleAlignment::from_parts(rows, columns).validate();
    assert_eq!(violations.len(), 1);
    assert_eq!(violations[0].kind, ViolationKind::RowOrderViolation);
    assert_eq!(violations[0].row, Some(2));
}

#[test]
fn score_of_first_figure() {
    let g = fig1();
    let ma = best(FIG1_SENTENCE, &g);
    let s = score(&ma, g.cost_model()).unwrap();
    // oracle: count the New cells of matched columns
    let matched = ma
        .columns()
        .iter()
        .filter(|c| c.is_matched() && c.contains_row(0))
        .count();
    assert_eq!(matched, 17);
    assert_eq!(s.b_new_matched, Exact::from_integer(160));
    assert_eq!(s.new_coverage, 1.0);
    assert_eq!(s.cd, s.b_new_matched - s.b_code);
}

#[test]
fn score_of_bare_new_is_zero() {
    let s = score(
        &bare("a b c"),
        &CostModel::fixed(Exact::from_integer(3)).unwrap(),
    )
    .unwrap();
    assert_eq!(s.cd, Exact::from_integer(0));
    assert_eq!(s.b_code, Exact::from_integer(0));
    assert_eq!(s.new_coverage, 0.0);
}

#[test]
fn score_with_unit_costs_of_two() {
    let ma = bare("t h e")
        .merge(old("D/i 17/i t h e #D/i"), &pm(&[(2, 0), (3, 1), (4, 2)]))
        .unwrap();
    let s = score(&ma, &CostModel::fixed(2.0_f64).unwrap()).unwrap();
    assert_eq!((s.b_new_matched, s.b_code, s.cd), (6.0, 6.0, 0.0));
}

#[test]
fn first_figure_code_and_structure() {
    let g = fig1();
    let results = build_alignments(&new(FIG1_SENTENCE), &g, &SearchConfig::default()).unwrap();
    assert_eq!(results[0].code, FIG1_CODE);
    assert!(same_incidence(
        &parse_render(FIGURE_1),
        &parse_render(&render(&results[0].alignment))
    ));
}

#[test]
fn second_figure_structure() {
    let results = build_alignments(&new(FIG2_SENTENCE), &fig2(), &SearchConfig::default()).unwrap();
    let top = &results[0];
    let mut uses: BTreeMap<&str, usize> = BTreeMap::new();
    for row in &top.alignment.rows()[1..] {
        *uses.entry(row.pattern_id().as_str()).or_default() += 1;
    }
    assert_eq!(uses.values().copied().collect::<Vec<_>>(), [4, 1]);
    assert_eq!(top.score.new_matched, 13);
    assert!(same_incidence(
        &parse_render(FIGURE_2),
        &parse_render(&render(&top.alignment))
    ));
    // the code is the figure's unconnected ID-symbols, read left to right
    assert_eq!(top.code, "X 1 #X");
}

#[test]
fn empty_grammar_returns_the_bare_alignment() {
    let g: GrammarExact = Grammar::empty(CostMode::default());
    let results = build_alignments(&new("a b c"), &g, &SearchConfig::default()).unwrap();
    assert_eq!(results.len(), 1);
    assert_eq!(results[0].alignment.rows().len(), 1);
    assert_eq!(results[0].score.cd, Exact::from_integer(0));
}

#[test]
fn results_are_valid_sorted_and_within_the_beam() {
    let g = fig1();
    let cfg = SearchConfig {
        beam_width: 12,
        ..SearchConfig::default()
    };
    let results = build_alignments(&new("t h e a p p l e s"), &g, &cfg).unwrap();
    assert!(results.len() <= 12);
    assert!(results.iter().all(|r| r.alignment.is_valid()));
    assert!(results.windows(2).all(|w| w[0].score.cd >= w[1].score.cd));
}

#[test]
fn search_is_deterministic() {
    let g = fig1();
    let run = || -> Vec<String> {
        build_alignments(&new(FIG1_SENTENCE), &g, &SearchConfig::default())
            .unwrap()
            .into_iter()
            .map(|r| r.signature)
            .collect()
    };
    assert_eq!(run(), run());
}

#[test]
fn reverse_matching_is_opt_in() {
    let g: GrammarExact = spmodel::load_grammar_str("1\tR/i a b c d #R/i\n").unwrap();
    let input = new("d c b a");
    let forward = build_alignments(&input, &g, &SearchConfig::default()).unwrap();
    assert!(forward[0].score.new_matched < 4);
    let cfg = SearchConfig {
        allow_reverse: true,
        ..SearchConfig::default()
    };
    let both = build_alignments(&input, &g, &cfg).unwrap();
    assert_eq!(both[0].score.new_matched, 4);
    assert!(both[0].alignment.rows()[1].reversed);
    assert!(both[0].alignment.is_valid());
}

#[test]
fn config_bounds_are_checked() {
    let g = fig1();
    for cfg in [
        SearchConfig {
            beam_width: 0,
            ..SearchConfig::default()
        },
        SearchConfig {
            max_cycles: 0,
            ..SearchConfig::default()
        },
        SearchConfig {
            max_rows: 1,
            ..SearchConfig::default()
        },
    ] {
        assert!(matches!(
            build_alignments(&new("t h e"), &g, &cfg),
            Err(Error::Config(_))
        ));
    }
}

#[test]
fn render_examples() {
    assert_eq!(render(&bare("a b")), "0 a b 0\n");
    let ma = bare("t h e")
        .merge(old("D/i 17/i t h e #D/i"), &pm(&[(2, 0), (3, 1), (4, 2)]))
        .unwrap();
    let text = render(&ma);
    assert_eq!(text.lines().count(), 3);
    let connector = text.lines().nth(1).unwrap();
    let row1 = text.lines().nth(2).unwrap();
    let bars: Vec<_> = connector.match_indices('|').map(|(i, _)| i).collect();
    let letters: Vec<_> = ["t", "h", "e"]
        .iter()
        .map(|t| row1.find(&format!(" {t} ")).unwrap() + 1)
        .collect();
    assert_eq!(bars, letters);
}

#[test]
fn render_round_trips_the_incidence() {
    let g = fig1();
    for r in build_alignments(&new(FIG1_SENTENCE), &g, &SearchConfig::default())
        .unwrap()
        .iter()
        .take(10)
    {
        let ma = &r.alignment;
        let parsed = parse_render(&render(ma));
        assert_eq!(parsed.len(), ma.columns().len());
        for (c, (col, got)) in ma.columns().iter().zip(&parsed).enumerate() {
            assert_eq!(got.token, ma.column_token(c));
            let rows: Vec<_> = col.cells().iter().map(|cell| cell.row).collect();
            assert_eq!(got.rows, rows);
        }
    }
}

#[test]
fn dump_lists_cells_by_row() {
    let ma = bare("t h e")
        .merge(old("D/i 17/i t h e #D/i"), &pm(&[(2, 0), (3, 1), (4, 2)]))
        .unwrap();
    assert_eq!(
        dump(&ma),
        "col 1: D 1:0\ncol 2: 17 1:1\ncol 3: t 0:0 1:2\ncol 4: h 0:1 1:3\n\
         col 5: e 0:2 1:4\ncol 6: #D 1:5\n"
    );
}
