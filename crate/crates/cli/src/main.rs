//! `catpurify`: yield curves, oracle verification and hashing simulations for
//! cat-state purification.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use catpurify::catlabel::{self, CatLabel};
use catpurify::ensemble::werner_single;
use catpurify::hashing::sim::{
    default_safety_bits, run_trials, HashingParams, DEFAULT_SEARCH_NODES,
};
use catpurify::oracle;
use catpurify::strategy::{self, MethodSpec, RecurrenceVariant, DEFAULT_MAX_ROUNDS};

use config::ConfigFile;
use output::{num, Format, Table};

#[derive(Parser, Debug)]
#[command(
    name = "catpurify",
    version,
    about = "Purification yields for multiparty cat states"
)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tabulate method yields over a Werner fidelity grid.
    YieldCurve(YieldCurveArgs),
    /// Check the label rules against the state-vector oracle.
    Verify(VerifyArgs),
    /// Monte Carlo runs of finite-size multiparty hashing.
    SimulateHashing(SimulateArgs),
    /// Locate the recurrence knee and the block-method improvement region.
    Knee(KneeArgs),
}

#[derive(Args, Debug)]
struct CommonArgs {
    /// Flat key=value file using long flag names; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output format: csv or tsv.
    #[arg(long)]
    format: Option<String>,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct YieldCurveArgs {
    /// Number of parties.
    #[arg(short = 'N', long = "parties")]
    parties: Option<usize>,
    /// Comma-separated method ids: rec-hash, block<m>, mp-hash, 2p-hash.
    #[arg(long)]
    methods: Option<String>,
    /// Fidelity grid as min:max:step.
    #[arg(long = "f")]
    range: Option<String>,
    /// Maximum recurrence rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Re-twirl to Werner form between recurrence rounds.
    #[arg(long)]
    twirl: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Comma-separated party counts.
    #[arg(short = 'N', long = "parties")]
    parties: Option<String>,
    /// Harness self-test: check a deliberately wrong rule and expect failures.
    #[arg(long)]
    corrupt_rule: bool,
    /// Flat key=value file using long flag names; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Number of parties.
    #[arg(short = 'N', long = "parties")]
    parties: Option<usize>,
    /// Block size.
    #[arg(short = 'm', long = "block-size")]
    block_size: Option<usize>,
    /// Werner fidelity of each input state.
    #[arg(short = 'f', long = "fidelity")]
    fidelity: Option<f64>,
    /// Number of independent blocks to simulate.
    #[arg(long)]
    trials: Option<usize>,
    /// Base seed; trial k uses seed + k.
    #[arg(long)]
    seed: Option<u64>,
    /// Extra rounds per phase (default: ceil(2 log2 m)).
    #[arg(long)]
    safety_bits: Option<usize>,
    /// Node budget of each exact decode.
    #[arg(long)]
    search_nodes: Option<u64>,
    /// Write one transcript per trial into this directory.
    #[arg(long)]
    transcript_dir: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args, Debug)]
struct KneeArgs {
    /// Maximum recurrence rounds.
    #[arg(long)]
    rounds: Option<usize>,
    /// Re-twirl to Werner form between recurrence rounds.
    #[arg(long)]
    twirl: bool,
    #[command(flatten)]
    common: CommonArgs,
}

/// Failure classes, each with its own exit code.
#[derive(Debug)]
enum Failure {
    Config(String),
    Capacity(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Capacity(_) => 3,
            Failure::Internal(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Capacity(m) | Failure::Internal(m) => m,
        }
    }
}

impl From<catpurify::Error> for Failure {
    fn from(e: catpurify::Error) -> Self {
        match e {
            catpurify::Error::Capacity { .. } => Failure::Capacity(e.to_string()),
            catpurify::Error::Internal(_) => Failure::Internal(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

impl From<String> for Failure {
    fn from(m: String) -> Self {
        Failure::Config(m)
    }
}

type CmdResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn load_config(path: Option<&Path>, allowed: &[&str]) -> CmdResult<ConfigFile> {
    let Some(path) = path else {
        return Ok(ConfigFile::default());
    };
    let c = ConfigFile::load(path)?;
    c.check_keys(allowed)?;
    Ok(c)
}

fn init_threads(threads: Option<usize>) -> CmdResult<()> {
    let n = match threads {
        Some(0) => return Err(Failure::Config("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> CmdResult<()> {
    match cli.command {
        Command::YieldCurve(a) => cmd_yield_curve(a, cli.threads),
        Command::Verify(a) => cmd_verify(a, cli.threads),
        Command::SimulateHashing(a) => cmd_simulate(a, cli.threads),
        Command::Knee(a) => cmd_knee(a, cli.threads),
    }
}

struct Sink {
    format: Format,
    out: Option<PathBuf>,
}

impl Sink {
    fn resolve(common: &CommonArgs, cfg: &ConfigFile) -> CmdResult<Self> {
        let format = match cfg.merge(common.format.clone(), "format")? {
            None => Format::Csv,
            Some(s) => {
                Format::parse(&s).ok_or_else(|| Failure::Config(format!("unknown format {s:?}")))?
            }
        };
        Ok(Self {
            format,
            out: cfg.merge(common.out.clone(), "out")?,
        })
    }

    fn emit(&self, text: &str) -> CmdResult<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text)
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display()))),
            None => {
                use std::io::Write;
                let mut stdout = std::io::stdout().lock();
                stdout
                    .write_all(text.as_bytes())
                    .and_then(|_| stdout.flush())
                    .map_err(|e| Failure::Internal(format!("stdout: {e}")))
            }
        }
    }
}

const COMMON_KEYS: [&str; 3] = ["format", "out", "threads"];

fn keys(extra: &[&'static str]) -> Vec<&'static str> {
    COMMON_KEYS.iter().chain(extra).copied().collect()
}

fn parse_range(s: &str) -> CmdResult<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Failure::Config(format!("fidelity range {s:?} is not min:max:step"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<CmdResult<_>>()?;
    Ok((v[0], v[1], v[2]))
}

fn parse_methods(
    s: &str,
    max_rounds: usize,
    variant: RecurrenceVariant,
) -> CmdResult<Vec<MethodSpec>> {
    let methods: Vec<MethodSpec> = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| {
            t.parse::<MethodSpec>()
                .map(|m| m.with_recurrence(max_rounds, variant))
        })
        .collect::<Result<_, _>>()?;
    if methods.is_empty() {
        return Err(Failure::Config("empty method list".into()));
    }
    Ok(methods)
}

fn variant(twirl: bool) -> RecurrenceVariant {
    if twirl {
        RecurrenceVariant::WernerTwirl
    } else {
        RecurrenceVariant::Rotation
    }
}

fn cmd_yield_curve(a: YieldCurveArgs, threads: Option<usize>) -> CmdResult<()> {
    let cfg = load_config(
        a.common.config.as_deref(),
        &keys(&["parties", "methods", "f", "rounds", "twirl"]),
    )?;
    init_threads(cfg.merge(threads, "threads")?)?;
    let sink = Sink::resolve(&a.common, &cfg)?;
    let n = cfg.merge(a.parties, "parties")?.unwrap_or(2);
    let rounds = cfg.merge(a.rounds, "rounds")?.unwrap_or(DEFAULT_MAX_ROUNDS);
    let var = variant(cfg.merge_flag(a.twirl, "twirl")?);
    let default_methods = if n == 2 {
        "rec-hash,block3,block4,block5"
    } else {
        "mp-hash"
    };
    let methods = cfg
        .merge(a.methods, "methods")?
        .unwrap_or_else(|| default_methods.into());
    let methods = parse_methods(&methods, rounds, var)?;
    let range = cfg
        .merge(a.range, "f")?
        .unwrap_or_else(|| "0.5:1.0:0.005".into());
    let (lo, hi, step) = parse_range(&range)?;

    let curve = strategy::yield_curve(n, lo, hi, step, &methods)?;
    let mut header = vec!["fidelity".to_string()];
    for m in &methods {
        header.push(format!("{m}_raw"));
        header.push(format!("{m}_clamped"));
    }
    let mut table = Table::new(sink.format, &header);
    for (j, &f) in curve.grid.iter().enumerate() {
        let mut row = vec![num(f)];
        for k in 0..methods.len() {
            row.push(num(curve.raw[k][j]));
            row.push(num(curve.clamped[k][j]));
        }
        table.row(&row);
    }
    sink.emit(&table.into_string())
}

/// Deliberately wrong rule for the harness self-test: the target's phase
/// also flips with the source's phase.
fn corrupted_mxor(source: CatLabel, target: CatLabel) -> catpurify::Result<(CatLabel, CatLabel)> {
    let (s, t) = catlabel::mxor(source, target)?;
    Ok((s, t.with_phase(t.phase() ^ source.phase())))
}

fn parse_party_list(s: &str) -> CmdResult<Vec<usize>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| Failure::Config(format!("bad party count {t:?}")))
        })
        .collect()
}

fn cmd_verify(a: VerifyArgs, threads: Option<usize>) -> CmdResult<()> {
    let cfg = load_config(a.config.as_deref(), &["parties", "corrupt-rule", "threads"])?;
    init_threads(cfg.merge(threads, "threads")?)?;
    let parties = parse_party_list(
        &cfg.merge(a.parties, "parties")?
            .unwrap_or_else(|| "2,3".into()),
    )?;
    let corrupt = cfg.merge_flag(a.corrupt_rule, "corrupt-rule")?;

    let mut report = String::new();
    let mut all_pass = true;
    if !corrupt {
        let conj = oracle::verify_conjugation_rules();
        let ok = conj.iter().filter(|c| c.pass).count();
        report += &format!("conjugation rules: {ok}/{} pass\n", conj.len());
        for c in conj.iter().filter(|c| !c.pass) {
            report += &format!("  FAIL {} (deviation {})\n", c.describe(), num(c.deviation));
        }
        all_pass &= ok == conj.len();
    }
    let mut detected = true;
    for &n in &parties {
        let r = if corrupt {
            oracle::verify_mxor_with(n, corrupted_mxor)?
        } else {
            oracle::verify_mxor(n)?
        };
        let label = if corrupt { " (corrupted rule)" } else { "" };
        report += &format!(
            "N={n} mxor pairs{label}: {}/{} pass, {} fail\n",
            r.passed(),
            r.pairs.len(),
            r.failed()
        );
        all_pass &= r.all_pass();
        detected &= r.failed() > 0;
    }
    if corrupt {
        report += if detected {
            "self-test: corrupted rule detected\n"
        } else {
            "self-test: corrupted rule NOT detected\n"
        };
    }
    print!("{report}");
    match (corrupt, detected, all_pass) {
        (true, true, _) | (false, _, true) => Ok(()),
        (true, false, _) => Err(Failure::Internal("oracle accepted a corrupted rule".into())),
        (false, _, false) => Err(Failure::Internal(
            "label rules disagree with the oracle".into(),
        )),
    }
}

fn cmd_simulate(a: SimulateArgs, threads: Option<usize>) -> CmdResult<()> {
    let cfg = load_config(
        a.common.config.as_deref(),
        &keys(&[
            "parties",
            "block-size",
            "fidelity",
            "trials",
            "seed",
            "safety-bits",
            "search-nodes",
            "transcript-dir",
        ]),
    )?;
    init_threads(cfg.merge(threads, "threads")?)?;
    let sink = Sink::resolve(&a.common, &cfg)?;
    let n = cfg.merge(a.parties, "parties")?.unwrap_or(3);
    let m = cfg
        .merge(a.block_size, "block-size")?
        .ok_or_else(|| Failure::Config("missing block size (-m)".into()))?;
    let f = cfg
        .merge(a.fidelity, "fidelity")?
        .ok_or_else(|| Failure::Config("missing fidelity (-f)".into()))?;
    let trials = cfg.merge(a.trials, "trials")?.unwrap_or(1);
    let seed = cfg.merge(a.seed, "seed")?.unwrap_or(0);
    let safety = cfg
        .merge(a.safety_bits, "safety-bits")?
        .unwrap_or_else(|| default_safety_bits(m));
    let nodes = cfg
        .merge(a.search_nodes, "search-nodes")?
        .unwrap_or(DEFAULT_SEARCH_NODES);
    let transcripts: Option<PathBuf> = cfg.merge(a.transcript_dir, "transcript-dir")?;

    let single = werner_single(n, f)?;
    let params = HashingParams::new(n, m)
        .with_safety_bits(safety)
        .with_search_nodes(nodes);
    let outcomes = run_trials(&params, &single, seed, trials)?;

    if let Some(dir) = &transcripts {
        std::fs::create_dir_all(dir)
            .map_err(|e| Failure::Config(format!("cannot create {}: {e}", dir.display())))?;
        for o in &outcomes {
            let p = dir.join(format!("trial-{}.txt", o.run.seed));
            std::fs::write(&p, o.run.to_text())
                .map_err(|e| Failure::Config(format!("cannot write {}: {e}", p.display())))?;
        }
    }

    let header = [
        "seed",
        "success",
        "empirical_yield",
        "rounds_A",
        "rounds_B",
        "consumed",
        "failure",
    ];
    let mut table = Table::new(sink.format, &header);
    for o in &outcomes {
        table.row(&[
            o.run.seed.to_string(),
            o.success.to_string(),
            num(o.empirical_yield),
            o.rounds_a().to_string(),
            o.rounds_b().to_string(),
            o.consumed().to_string(),
            o.failure.map_or("none", |r| r.as_str()).to_string(),
        ]);
    }
    let n_trials = outcomes.len().max(1) as f64;
    let rate = outcomes.iter().filter(|o| o.success).count() as f64 / n_trials;
    let mean = outcomes.iter().map(|o| o.empirical_yield).sum::<f64>() / n_trials;
    table.row(&[
        "summary".to_string(),
        num(rate),
        num(mean),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
    ]);
    sink.emit(&table.into_string())
}

fn cmd_knee(a: KneeArgs, threads: Option<usize>) -> CmdResult<()> {
    let cfg = load_config(a.common.config.as_deref(), &keys(&["rounds", "twirl"]))?;
    init_threads(cfg.merge(threads, "threads")?)?;
    let sink = Sink::resolve(&a.common, &cfg)?;
    let rounds = cfg.merge(a.rounds, "rounds")?.unwrap_or(DEFAULT_MAX_ROUNDS);
    let var = variant(cfg.merge_flag(a.twirl, "twirl")?);

    let knee = strategy::find_knee(rounds, var)?;
    let methods = [
        MethodSpec::rec_hash().with_recurrence(rounds, var),
        MethodSpec::block(3)?,
        MethodSpec::block(4)?,
    ];
    let curve = strategy::yield_curve(2, 0.5, 1.0, strategy::KNEE_SWEEP_STEP, &methods)?;
    let c = &curve.clamped;
    let region: Vec<f64> = curve
        .grid
        .iter()
        .enumerate()
        .filter(|&(j, _)| c[1][j].max(c[2][j]) > c[0][j])
        .map(|(_, &f)| f)
        .collect();

    let opt = |v: Option<f64>| v.map_or("absent".to_string(), num);
    let mut table = Table::new(sink.format, &["quantity", "value"]);
    table.row(&["knee".to_string(), opt(knee)]);
    table.row(&["improvement_min".to_string(), opt(region.first().copied())]);
    table.row(&["improvement_max".to_string(), opt(region.last().copied())]);
    sink.emit(&table.into_string())
}
