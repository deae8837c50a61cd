#![allow(dead_code)]

pub mod oracle;

use std::fs;
use std::path::Path;

use spmodel::{load_grammar_str, GrammarExact, SpPattern};

pub const FIG1_SENTENCE: &str = "t h e a p p l e s a r e s w e e t";
pub const FIG1_CODE: &str = "S PL 0a 17 6 11 21 #S";
pub const FIG2_SENTENCE: &str = "a b c a b c a b c a b c $";

pub fn fixture_text(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    fs::read_to_string(path).unwrap()
}

pub fn fixture(name: &str) -> GrammarExact {
    load_grammar_str(&fixture_text(name)).unwrap()
}

pub fn fig1() -> GrammarExact {
    fixture("fig1.grammar")
}

pub fn fig2() -> GrammarExact {
    fixture("fig2.grammar")
}

pub fn new(text: &str) -> SpPattern {
    SpPattern::new_input(text.split_whitespace()).unwrap()
}

pub fn toks(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}
