use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use spmodel::{
    build_alignments, classify_grammar_pattern, compression_metrics, decode, detect_chunks,
    detect_dependencies, detect_mirrors, detect_runs, dump, encode, learn, load_grammar_str,
    render, save_grammar_string, Bits, CostMode, Exact, Grammar, LearnConfig, SearchConfig,
    SpPattern, Symbol,
};

type G = Grammar<Exact>;

#[derive(Parser)]
#[command(
    name = "spmodel",
    version,
    about = "Multiple alignment, encoding and grammar learning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the best alignments of each input line against a grammar.
    Align {
        #[command(flatten)]
        io: GrammarIo,
        #[command(flatten)]
        search: SearchArgs,
        /// Number of alignments to print per line.
        #[arg(long, default_value_t = 1)]
        top: usize,
        /// Exit with status 2 unless some alignment has positive compression.
        #[arg(long)]
        require_positive: bool,
    },
    /// Encode each input line as a code line followed by a metrics line.
    Encode {
        #[command(flatten)]
        io: GrammarIo,
        #[command(flatten)]
        search: SearchArgs,
        /// Print code lines only.
        #[arg(long)]
        codes_only: bool,
    },
    /// Decode each code line back to surface tokens.
    Decode {
        #[command(flatten)]
        io: GrammarIo,
        #[command(flatten)]
        search: SearchArgs,
    },
    /// Learn a grammar from a corpus with one pattern per line.
    Learn {
        #[command(flatten)]
        io: PlainIo,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        cost: CostArgs,
        /// Prune the grammar after this many items (0: only at the end).
        #[arg(long, default_value_t = 10)]
        prune_every: usize,
        /// Write one code line per corpus line here.
        #[arg(long)]
        encodings: Option<PathBuf>,
    },
    /// Report runs, mirror images and repeated chunks in each input line.
    Detect {
        #[command(flatten)]
        io: PlainIo,
        #[command(flatten)]
        search: SearchArgs,
        #[command(flatten)]
        cost: CostArgs,
        /// Also classify this grammar's patterns and report dependencies in
        /// the best alignment of each line.
        #[arg(long)]
        grammar: Option<PathBuf>,
        /// Reports need count > threshold x expected to be significant.
        #[arg(long, default_value = "2")]
        threshold: String,
        #[arg(long, default_value_t = 2)]
        min_repeats: usize,
        #[arg(long, default_value_t = 2)]
        min_len: usize,
    },
    /// Draw the best alignment of each input line.
    Render {
        #[command(flatten)]
        io: GrammarIo,
        #[command(flatten)]
        search: SearchArgs,
        /// Print the column listing instead of the drawing.
        #[arg(long)]
        dump: bool,
    },
    /// Print compression metrics for each input line and the grammar size.
    Stats {
        #[command(flatten)]
        io: GrammarIo,
        #[command(flatten)]
        search: SearchArgs,
    },
}

#[derive(Args)]
struct PlainIo {
    /// Input file; standard input when absent.
    input: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GrammarIo {
    #[arg(long)]
    grammar: PathBuf,
    #[command(flatten)]
    plain: PlainIo,
    #[command(flatten)]
    cost: CostArgs,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 50)]
    beam: usize,
    #[arg(long, default_value_t = 10)]
    cycles: usize,
    #[arg(long, default_value_t = 32)]
    max_rows: usize,
    /// Also match patterns right to left.
    #[arg(long)]
    reverse: bool,
    /// Only encode from alignments that account for every symbol.
    #[arg(long)]
    full_coverage: bool,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig> {
        let cfg = SearchConfig {
            beam_width: self.beam,
            max_cycles: self.cycles,
            max_rows: self.max_rows,
            allow_reverse: self.reverse,
            require_full_new_coverage_for_encoding: self.full_coverage,
            ..SearchConfig::default()
        };
        cfg.check()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CostKind {
    Fixed,
    Frequency,
}

#[derive(Args)]
struct CostArgs {
    /// Overrides the grammar file's cost model.
    #[arg(long, value_enum)]
    cost: Option<CostKind>,
    /// Bits per symbol in fixed mode, e.g. 160/17 or 9.41.
    #[arg(long)]
    fixed_bits: Option<String>,
    /// Least bits per symbol in frequency mode.
    #[arg(long)]
    floor_bits: Option<String>,
}

fn positive(text: &str, flag: &str) -> Result<Exact> {
    match Exact::parse_bits(text) {
        Some(v) if v > Exact::from_int(0) => Ok(v),
        _ => bail!("{flag} must be a positive number, got {text:?}"),
    }
}

impl CostArgs {
    /// The requested cost mode, or `None` to keep the grammar's own.
    fn mode(&self, current: Option<&CostMode<Exact>>) -> Result<Option<CostMode<Exact>>> {
        let kind = match (self.cost, current) {
            (Some(kind), _) => kind,
            (None, Some(CostMode::Fixed(_))) if self.fixed_bits.is_some() => CostKind::Fixed,
            (None, Some(CostMode::Frequency { .. })) if self.floor_bits.is_some() => {
                CostKind::Frequency
            }
            (None, None) if self.fixed_bits.is_some() => CostKind::Fixed,
            (None, None) if self.floor_bits.is_some() => CostKind::Frequency,
            _ => return Ok(None),
        };
        Ok(Some(match kind {
            CostKind::Fixed => match &self.fixed_bits {
                Some(bits) => CostMode::Fixed(positive(bits, "--fixed-bits")?),
                None => CostMode::default_fixed(),
            },
            CostKind::Frequency => match &self.floor_bits {
                Some(bits) => CostMode::Frequency {
                    floor: positive(bits, "--floor-bits")?,
                },
                None => CostMode::frequency(),
            },
        }))
    }
}

fn read_input(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("cannot read {}", p.display())),
        None => {
            let mut text = String::new();
            io::stdin()
                .read_to_string(&mut text)
                .context("cannot read standard input")?;
            Ok(text)
        }
    }
}

fn lines(text: &str) -> Vec<Vec<&str>> {
    text.lines()
        .map(|l| l.split_whitespace().collect::<Vec<_>>())
        .filter(|t| !t.is_empty())
        .collect()
}

fn new_patterns(text: &str) -> Result<Vec<SpPattern>> {
    lines(text)
        .into_iter()
        .map(|t| Ok(SpPattern::new_input(t)?))
        .collect()
}

fn load(path: &Path, cost: &CostArgs) -> Result<G> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let grammar: G = load_grammar_str(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(match cost.mode(Some(grammar.cost_mode()))? {
        Some(mode) => grammar.with_cost_mode(mode)?,
        None => grammar,
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            io::stdout()
                .lock()
                .write_all(text.as_bytes())
                .context("cannot write standard output")?;
            Ok(())
        }
    }
}

fn fmt2(x: &Exact) -> String {
    format!("{:.2}", x.to_f64())
}

/// A failure in meaning rather than in input: exit status 2.
#[derive(Debug)]
struct Semantic(String);

impl std::fmt::Display for Semantic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Semantic {}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Align {
            io,
            search,
            top,
            require_positive,
        } => {
            let grammar = load(&io.grammar, &io.cost)?;
            let cfg = search.config()?;
            let mut out = String::new();
            let mut positive = false;
            for new in new_patterns(&read_input(io.plain.input.as_deref())?)? {
                let ranked = build_alignments(&new, &grammar, &cfg)?;
                positive |= ranked.iter().any(|s| s.score.cd > Exact::from_int(0));
                for (rank, s) in ranked.iter().take(top.max(1)).enumerate() {
                    out.push_str(&format!(
                        "rank={} cd={} b_new_matched={} b_code={} coverage={:.4} rows={}\ncode: {}\n{}\n",
                        rank + 1,
                        fmt2(&s.score.cd),
                        fmt2(&s.score.b_new_matched),
                        fmt2(&s.score.b_code),
                        s.score.new_coverage,
                        s.alignment.rows().len(),
                        s.code,
                        render(&s.alignment)
                    ));
                }
            }
            emit(io.plain.out.as_deref(), &out)?;
            if require_positive && !positive {
                return Err(Semantic("no alignment compresses the input".into()).into());
            }
        }
        Command::Encode {
            io,
            search,
            codes_only,
        } => {
            let grammar = load(&io.grammar, &io.cost)?;
            let cfg = search.config()?;
            let mut out = String::new();
            for new in new_patterns(&read_input(io.plain.input.as_deref())?)? {
                let e = encode(&new, &grammar, &cfg)?;
                out.push_str(&e.code_line());
                out.push('\n');
                if !codes_only {
                    out.push_str(&e.metrics_line());
                    out.push('\n');
                }
            }
            emit(io.plain.out.as_deref(), &out)?;
        }
        Command::Decode { io, search } => {
            let grammar = load(&io.grammar, &io.cost)?;
            let cfg = search.config()?;
            let mut out = String::new();
            let text = read_input(io.plain.input.as_deref())?;
            for tokens in lines(&text) {
                if tokens[0].starts_with("symbols_in=") {
                    continue;
                }
                let code = tokens
                    .iter()
                    .map(|t| Ok(Symbol::contents(*t)?))
                    .collect::<Result<Vec<_>>>()?;
                out.push_str(&decode(&code, &grammar, &cfg)?.join(" "));
                out.push('\n');
            }
            emit(io.plain.out.as_deref(), &out)?;
        }
        Command::Learn {
            io,
            search,
            cost,
            prune_every,
            encodings,
        } => {
            let corpus = new_patterns(&read_input(io.input.as_deref())?)?;
            if corpus.is_empty() {
                bail!("corpus is empty");
            }
            let cfg = LearnConfig {
                search: search.config()?,
                cost_mode: cost.mode(None)?.unwrap_or_default(),
                prune_every,
            };
            let state = learn(&corpus, &cfg)?;
            emit(io.out.as_deref(), &save_grammar_string(&state.grammar))?;
            if let Some(path) = encodings {
                let codes: String = state
                    .encodings
                    .iter()
                    .map(|e| e.code_line() + "\n")
                    .collect();
                fs::write(&path, codes)
                    .with_context(|| format!("cannot write {}", path.display()))?;
            }
        }
        Command::Detect {
            io,
            search,
            cost,
            grammar,
            threshold,
            min_repeats,
            min_len,
        } => {
            let threshold = positive(&threshold, "--threshold")?;
            let text = read_input(io.input.as_deref())?;
            let grammar = grammar.map(|g| load(&g, &cost)).transpose()?;
            let mut out = String::new();
            if let Some(g) = &grammar {
                for p in g.patterns() {
                    let kind = classify_grammar_pattern(p, g)?;
                    out.push_str(&format!(
                        "pattern={} kind={} tokens=\"{}\"\n",
                        p.id(),
                        kind,
                        p.render(false)
                    ));
                }
            }
            let cfg = search.config()?;
            for tokens in lines(&text) {
                let mut reports = detect_runs(&tokens, min_repeats, &threshold);
                reports.extend(detect_mirrors(&tokens, min_len, &threshold));
                reports.extend(detect_chunks(&tokens, min_len, &threshold));
                if let Some(g) = &grammar {
                    let best =
                        build_alignments(&SpPattern::new_input(tokens.iter().copied())?, g, &cfg)?;
                    reports.extend(detect_dependencies(
                        &[best[0].alignment.clone()],
                        &threshold,
                    ));
                }
                for r in reports {
                    out.push_str(&format!("{r}\n"));
                }
            }
            emit(io.out.as_deref(), &out)?;
        }
        Command::Render {
            io,
            search,
            dump: as_dump,
        } => {
            let grammar = load(&io.grammar, &io.cost)?;
            let cfg = search.config()?;
            let mut out = String::new();
            for new in new_patterns(&read_input(io.plain.input.as_deref())?)? {
                let best = build_alignments(&new, &grammar, &cfg)?.remove(0);
                out.push_str(&if as_dump {
                    dump(&best.alignment)
                } else {
                    render(&best.alignment)
                });
            }
            emit(io.plain.out.as_deref(), &out)?;
        }
        Command::Stats { io, search } => {
            let grammar = load(&io.grammar, &io.cost)?;
            let cfg = search.config()?;
            let mut out = format!(
                "patterns={} g_bits={}\n",
                grammar.len(),
                fmt2(&grammar.size_bits()?)
            );
            for new in new_patterns(&read_input(io.plain.input.as_deref())?)? {
                let e = encode(&new, &grammar, &cfg)?;
                let m = compression_metrics(&e);
                out.push_str(&format!(
                    "{} symbol_ratio={:.4} bit_ratio={:.4}\n",
                    e.metrics_line(),
                    m.symbol_ratio,
                    m.bit_ratio
                ));
            }
            emit(io.plain.out.as_deref(), &out)?;
        }
    }
    Ok(())
}

fn exit_status(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<Semantic>().is_some() {
        return 2;
    }
    match err.downcast_ref::<spmodel::Error>() {
        Some(
            spmodel::Error::IncompleteCoverage(_)
            | spmodel::Error::UnknownCode
            | spmodel::Error::DecodeAmbiguous,
        ) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
