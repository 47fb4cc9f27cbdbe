use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use prudens::best_reply::Optimality;
use prudens::game_core::{Game, StrategySpace, DEFAULT_STRATEGY_CAP};
use prudens::game_dsl::{elaborate_with_cap, parse_bytes, serialize, GameDoc};
use prudens::procedures::{reduced_variants, verify_analysis, verify_with, Analysis, ProcedureError, Settings, VerifyReport};
use prudens::random::{generate_with, rng_for, Bounds};
use prudens::report;
use prudens::shrink::shrink;

const EXIT_USAGE: u8 = 2;
const EXIT_PARSE: u8 = 3;
const EXIT_VIOLATION: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "prudens", version, about = "Exact solver and verifier for cautious reasoning in finite sequential games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Input `.seqgame` files. Defaults to every game in the corpus directory.
    files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Per-player cap on strategy counts (fuzz: on generated games).
    #[arg(long)]
    max_strategies: Option<usize>,
    /// Use the weak sequential best reply instead of the sequential one.
    #[arg(long)]
    weak: bool,
    /// Directory for counterexample files.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterated admissibility with dominance certificates.
    Ia(Common),
    /// Prudent rationalizability with conditional lexicographic beliefs.
    PrCnps(Common),
    /// Prudent rationalizability with conditional probability systems.
    PrCps(Common),
    /// Check both step-set equalities against iterated admissibility.
    Verify(Common),
    /// The reduced-strategy variants with the weak sequential best reply.
    Reduced(Common),
    /// Run `verify` on seeded random games.
    Fuzz {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        count: u64,
        /// Check the reduced variants instead of the full-strategy procedures.
        #[arg(long)]
        reduced: bool,
    },
    /// Print games in canonical form.
    Fmt {
        files: Vec<PathBuf>,
        /// Rewrite the files in place.
        #[arg(long)]
        write: bool,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }

    fn parse(message: impl Into<String>) -> Self {
        Failure { code: EXIT_PARSE, message: message.into() }
    }
}

impl From<ProcedureError> for Failure {
    fn from(e: ProcedureError) -> Self {
        Failure { code: 1, message: e.to_string() }
    }
}

fn corpus_dir() -> PathBuf {
    match std::env::var_os("PRUDENS_CORPUS") {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus"),
    }
}

fn inputs(files: &[PathBuf]) -> Result<Vec<PathBuf>, Failure> {
    let corpus = corpus_dir();
    if files.is_empty() {
        let entries = fs::read_dir(&corpus).map_err(|e| Failure::usage(format!("{}: {e}", corpus.display())))?;
        let mut out: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "seqgame"))
            .collect();
        out.sort();
        if out.is_empty() {
            return Err(Failure::usage(format!("no .seqgame files in {}", corpus.display())));
        }
        return Ok(out);
    }
    files
        .iter()
        .map(|f| {
            if f.exists() {
                return Ok(f.clone());
            }
            let fallback = f.file_name().map(|n| corpus.join(n));
            match fallback {
                Some(p) if p.exists() => Ok(p),
                _ => Err(Failure::usage(format!("{}: no such file", f.display()))),
            }
        })
        .collect()
}

fn read_doc(path: &Path) -> Result<GameDoc, Failure> {
    let bytes = fs::read(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_bytes(&bytes).map_err(|e| Failure::parse(format!("{}:{e}", path.display())))
}

fn load(path: &Path, cap: usize) -> Result<(GameDoc, Game), Failure> {
    let doc = read_doc(path)?;
    let game = elaborate_with_cap(&doc, cap).map_err(|e| Failure::parse(format!("{}: {e}", path.display())))?;
    Ok((doc, game))
}

fn settings(common: &Common) -> Settings {
    let optimality = if common.weak { Optimality::WeakSequential } else { Optimality::Sequential };
    Settings { optimality, ..Settings::default() }
}

fn has_violation(report: &VerifyReport) -> bool {
    !report.violations.is_empty() || report.ia.exclusions.iter().any(|e| !e.verified)
}

fn theorem_of(report: &VerifyReport) -> Option<u8> {
    report.violations.iter().map(|v| v.theorem).min()
}

/// Greedily shrinks `doc` while the same equality still fails.
fn minimize(doc: &GameDoc, cap: usize, check: &dyn Fn(&Game) -> Option<VerifyReport>) -> GameDoc {
    let Some(target) = elaborate_with_cap(doc, cap).ok().and_then(|g| check(&g)).and_then(|r| theorem_of(&r)) else {
        return doc.clone();
    };
    shrink(doc, |d| {
        elaborate_with_cap(d, cap).ok().and_then(|g| check(&g)).is_some_and(|r| r.violations.iter().any(|v| v.theorem == target))
    })
}

fn write_counterexample(dir: &Path, name: &str, doc: &GameDoc) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, serialize(doc)).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn emit(format: Format, json_reports: Vec<Value>, tables: Vec<String>) {
    match format {
        Format::Json => {
            let value = if json_reports.len() == 1 { json_reports.into_iter().next().expect("one") } else { Value::Array(json_reports) };
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        }
        Format::Table => {
            for t in tables {
                print!("{t}");
            }
        }
    }
}

fn label(path: &Path) -> String {
    path.display().to_string()
}

fn run_procedure(common: &Common, which: &str) -> Result<u8, Failure> {
    let cap = common.max_strategies.unwrap_or(DEFAULT_STRATEGY_CAP);
    let settings = settings(common);
    let mut jsons = Vec::new();
    let mut tables = Vec::new();
    for path in inputs(&common.files)? {
        let (_, game) = load(&path, cap)?;
        let mut analysis = Analysis::new(&game, settings.space);
        let trace = match which {
            "ia" => analysis.ia_trace(),
            "pr-cnps" => analysis.pr_cnps(settings).map_err(ProcedureError::from)?,
            _ => analysis.pr_cps(settings),
        };
        jsons.push(report::procedure_report(&analysis, &label(&path), &trace));
        tables.push(report::trace_table(&analysis, &label(&path), &trace));
    }
    emit(common.format, jsons, tables);
    Ok(0)
}

fn counterexample_name(path: &Path) -> String {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "game".into());
    format!("{stem}.counterexample.seqgame")
}

fn run_verify(common: &Common, reduced: bool) -> Result<u8, Failure> {
    let cap = common.max_strategies.unwrap_or(DEFAULT_STRATEGY_CAP);
    let settings = settings(common);
    let mut jsons = Vec::new();
    let mut tables = Vec::new();
    let mut code = 0;
    for path in inputs(&common.files)? {
        let (doc, game) = load(&path, cap)?;
        let source = label(&path);
        let (mut json, table, report) = if reduced {
            let r = reduced_variants(&game)?;
            let analysis = Analysis::new(&game, StrategySpace::Reduced);
            let mut table = report::verify_table(&analysis, &source, &r.verify);
            table.push_str(&format!("  projection of full IA sets: {}\n", if r.projection_matches { "matches" } else { "differs" }));
            (report::reduced_report(&analysis, &source, &r), table, r.verify)
        } else {
            let mut analysis = Analysis::new(&game, settings.space);
            let r = verify_analysis(&mut analysis, settings)?;
            (report::verify_report(&analysis, &source, &r), report::verify_table(&analysis, &source, &r), r)
        };
        let mut table = table;
        if has_violation(&report) {
            code = EXIT_VIOLATION;
            let check = |g: &Game| -> Option<VerifyReport> {
                if reduced {
                    reduced_variants(g).ok().map(|r| r.verify)
                } else {
                    verify_with(g, settings).ok()
                }
            };
            let small = minimize(&doc, cap, &check);
            let written = write_counterexample(&common.out, &counterexample_name(&path), &small)?;
            eprintln!("{source}: violation; counterexample written to {}", written.display());
            json["counterexample"] = Value::String(label(&written));
            table.push_str(&format!("  counterexample: {}\n", written.display()));
        }
        jsons.push(json);
        tables.push(table);
    }
    emit(common.format, jsons, tables);
    Ok(code)
}

struct FuzzOutcome {
    index: u64,
    rounds: usize,
    doc: GameDoc,
    theorems: Vec<u8>,
    unverified_exclusions: bool,
}

fn run_fuzz(common: &Common, seed: u64, count: u64, reduced: bool) -> Result<u8, Failure> {
    if !common.files.is_empty() {
        return Err(Failure::usage("fuzz takes no input files"));
    }
    let bounds = Bounds { max_strategies: common.max_strategies.unwrap_or(Bounds::default().max_strategies), ..Bounds::default() };
    let cap = DEFAULT_STRATEGY_CAP;
    let settings = if reduced {
        Settings { space: StrategySpace::Reduced, optimality: Optimality::WeakSequential, exhaustive: false }
    } else {
        settings(common)
    };
    let check = move |g: &Game| -> Option<VerifyReport> {
        if reduced {
            reduced_variants(g).ok().map(|r| r.verify)
        } else {
            verify_with(g, settings).ok()
        }
    };
    let outcomes: Vec<Result<FuzzOutcome, String>> = (0..count)
        .into_par_iter()
        .map(|index| {
            let doc = generate_with(&mut rng_for(seed, index), bounds);
            let game = elaborate_with_cap(&doc, cap).map_err(|e| format!("game {index}: {e}"))?;
            let r = check(&game).ok_or_else(|| format!("game {index}: procedure error"))?;
            Ok(FuzzOutcome {
                index,
                rounds: r.ia.fixpoint,
                theorems: r.violations.iter().map(|v| v.theorem).collect(),
                unverified_exclusions: r.ia.exclusions.iter().any(|e| !e.verified),
                doc,
            })
        })
        .collect();
    let mut histogram = std::collections::BTreeMap::<usize, u64>::new();
    let mut by_theorem = [0u64; 2];
    let mut unverified = 0u64;
    let mut violating = Vec::new();
    let mut errors = Vec::new();
    let mut first: Option<&FuzzOutcome> = None;
    for o in &outcomes {
        match o {
            Err(e) => errors.push(e.clone()),
            Ok(o) => {
                *histogram.entry(o.rounds).or_default() += 1;
                for &t in &o.theorems {
                    by_theorem[usize::from(t - 1)] += 1;
                }
                unverified += u64::from(o.unverified_exclusions);
                if !o.theorems.is_empty() || o.unverified_exclusions {
                    violating.push(o.index);
                    first.get_or_insert(o);
                }
            }
        }
    }
    let mut summary = json!({
        "schema": report::SCHEMA,
        "command": "fuzz",
        "seed": seed,
        "count": count,
        "variant": if reduced { "reduced" } else if settings.optimality == Optimality::WeakSequential { "weak-sequential" } else { "sequential" },
        "bounds": {
            "max_players": bounds.max_players,
            "max_histories": bounds.max_histories,
            "max_actions": bounds.max_actions,
            "max_strategies": bounds.max_strategies,
            "max_depth": bounds.max_depth,
        },
        "ia_rounds": histogram.iter().map(|(k, v)| (k.to_string(), json!(v))).collect::<serde_json::Map<_, _>>(),
        "violations": {
            "pr_cnps": by_theorem[0],
            "pr_cps": by_theorem[1],
            "unverified_exclusions": unverified,
            "games": violating,
        },
        "errors": errors,
        "status": if violating.is_empty() && errors.is_empty() { "ok" } else { "violation" },
    });
    let mut table = format!(
        "fuzz seed {seed}, {count} games: {} violating ({} pr-cnps, {} pr-cps, {} unverified exclusions), {} errors\n",
        violating.len(),
        by_theorem[0],
        by_theorem[1],
        unverified,
        errors.len()
    );
    let rounds: Vec<String> = histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    table.push_str(&format!("  IA rounds histogram {}\n", rounds.join(" ")));
    let mut code = if errors.is_empty() { 0 } else { 1 };
    if let Some(o) = first {
        code = EXIT_VIOLATION;
        let small = minimize(&o.doc, cap, &check);
        let written = write_counterexample(&common.out, &format!("fuzz-{seed}-{}.counterexample.seqgame", o.index), &small)?;
        eprintln!("fuzz: violation in game {}; counterexample written to {}", o.index, written.display());
        summary["counterexample"] = json!({ "index": o.index, "path": label(&written), "game": serialize(&small) });
        table.push_str(&format!("  first violation: game {}, counterexample {}\n", o.index, written.display()));
    }
    emit(common.format, vec![summary], vec![table]);
    Ok(code)
}

fn run_fmt(files: &[PathBuf], write: bool) -> Result<u8, Failure> {
    for path in inputs(files)? {
        let doc = read_doc(&path)?;
        let text = serialize(&doc);
        if write {
            fs::write(&path, &text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
        } else {
            print!("{text}");
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ia(c) => run_procedure(c, "ia"),
        Command::PrCnps(c) => run_procedure(c, "pr-cnps"),
        Command::PrCps(c) => run_procedure(c, "pr-cps"),
        Command::Verify(c) => run_verify(c, false),
        Command::Reduced(c) => run_verify(c, true),
        Command::Fuzz { common, seed, count, reduced } => run_fuzz(common, *seed, *count, *reduced),
        Command::Fmt { files, write } => run_fmt(files, *write),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("prudens: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
