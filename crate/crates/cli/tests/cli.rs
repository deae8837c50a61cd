use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::{Command, Output, Stdio};

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn spmodel(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_spmodel"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(stdin.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn align_prints_the_reference_code() {
    let o = spmodel(
        &["align", "--grammar", &fixture("fig1.grammar")],
        "t h e a p p l e s a r e s w e e t\n",
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("code: S PL 0a 17 6 11 21 #S"), "{text}");
    assert!(text.starts_with("rank=1 cd="));
}

#[test]
fn align_against_an_empty_grammar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.grammar");
    fs::write(&path, "# nothing yet\n").unwrap();
    let o = spmodel(&["align", "--grammar", path.to_str().unwrap()], "a b\n");
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("cd=0.00"), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 a b 0"));
}

#[test]
fn require_positive_fails_without_compression() {
    let o = spmodel(
        &[
            "align",
            "--grammar",
            &fixture("fig1.grammar"),
            "--require-positive",
        ],
        "q q q\n",
    );
    assert_eq!(o.status.code(), Some(2));
    let o = spmodel(
        &[
            "align",
            "--grammar",
            &fixture("fig1.grammar"),
            "--require-positive",
        ],
        "t h e a p p l e s a r e s w e e t\n",
    );
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn missing_files_and_bad_usage_exit_with_one() {
    let o = spmodel(&["encode", "--grammar", "/no/such/file.grammar"], "a\n");
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
    let o = spmodel(&["encode"], "a\n");
    assert_eq!(o.status.code(), Some(1));
    let o = spmodel(&["frobnicate"], "");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn encode_then_decode_round_trips() {
    let grammar = fixture("fig1.grammar");
    let sentence = "t h e a p p l e s a r e s w e e t";
    let enc = spmodel(&["encode", "--grammar", &grammar], &format!("{sentence}\n"));
    assert_eq!(enc.status.code(), Some(0));
    let text = stdout(&enc);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("S PL 0a 17 6 11 21 #S"));
    assert_eq!(
        lines.next(),
        Some("symbols_in=17 symbols_out=8 bits_in=160.00 bits_out=75.29")
    );
    // decode skips the metrics lines
    let dec = spmodel(&["decode", "--grammar", &grammar], &text);
    assert_eq!(dec.status.code(), Some(0));
    assert_eq!(stdout(&dec).trim_end(), sentence);
}

#[test]
fn semantic_failures_exit_with_two() {
    let o = spmodel(
        &[
            "encode",
            "--grammar",
            &fixture("fig1.grammar"),
            "--full-coverage",
        ],
        "q r s\n",
    );
    assert_eq!(o.status.code(), Some(2));
    let o = spmodel(
        &["decode", "--grammar", &fixture("fig1.grammar")],
        "Z 9 #Z\n",
    );
    assert_eq!(o.status.code(), Some(2));
    let o = spmodel(
        &["decode", "--grammar", &fixture("fig2.grammar")],
        "X 1 #X\n",
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn learn_writes_a_grammar_and_encodings() {
    let dir = tempfile::tempdir().unwrap();
    let grammar = dir.path().join("learned.grammar");
    let codes = dir.path().join("codes.txt");
    let corpus = "p q r s t\n".repeat(10);
    let o = spmodel(
        &[
            "learn",
            "--out",
            grammar.to_str().unwrap(),
            "--encodings",
            codes.to_str().unwrap(),
        ],
        &corpus,
    );
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(&grammar).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .collect();
    assert_eq!(rows.len(), 1, "{text}");
    let (freq, body) = rows[0].split_once('\t').unwrap();
    assert!(freq.parse::<u64>().unwrap() >= 10);
    assert!(body.contains("p q r s t"));
    assert_eq!(fs::read_to_string(&codes).unwrap().lines().count(), 10);

    // the learned grammar decodes its own codes
    let dec = spmodel(
        &["decode", "--grammar", grammar.to_str().unwrap()],
        &fs::read_to_string(&codes).unwrap(),
    );
    assert_eq!(dec.status.code(), Some(0));
    assert!(stdout(&dec).lines().all(|l| l == "p q r s t"));
}

#[test]
fn detect_reports_the_run_and_classifies_patterns() {
    let o = spmodel(
        &["detect", "--grammar", &fixture("fig2.grammar")],
        "a b c a b c a b c a b c $\n",
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(
        text.contains(
            "kind=run subject=\"a b c\" count=4 expected=0.3204 significant=true at=[0,12)"
        ),
        "{text}"
    );
    assert!(text.contains("pattern=1 kind=run tokens=\"X 1 a b c X 1 #X #X\""));
    assert!(text.contains("pattern=2 kind=chunk"));

    let o = spmodel(
        &["detect", "--grammar", &fixture("fig1.grammar")],
        "t h e a p p l e s a r e s w e e t\n",
    );
    let text = stdout(&o);
    assert!(text.contains("pattern=8 kind=dependency"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with("kind=dependency subject=\"Num PL ; Np Vp\""))
            .count(),
        1
    );
}

#[test]
fn render_and_stats() {
    let o = spmodel(
        &["render", "--grammar", &fixture("fig2.grammar")],
        "a b c a b c a b c a b c $\n",
    );
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("0     a b c     a b c     a b c     a b c     $"));
    assert_eq!(
        text.lines()
            .filter(|l| l.starts_with(char::is_numeric))
            .count(),
        6
    );

    let o = spmodel(
        &["stats", "--grammar", &fixture("fig1.grammar")],
        "t h e a p p l e s a r e s w e e t\n",
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("2.125"), "{}", stdout(&o));
}

#[test]
fn output_is_deterministic() {
    let args = ["align", "--grammar", &fixture("fig1.grammar"), "--top", "5"];
    let input = "t h e a p p l e s\na r e s w e e t\n";
    assert_eq!(
        stdout(&spmodel(&args, input)),
        stdout(&spmodel(&args, input))
    );
}
