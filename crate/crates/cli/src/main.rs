use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tomo_core::harness::{emit_outputs, run_scenario, run_table1, ConfigBuilder, ScenarioResult};
use tomo_core::qubit::{bb84_constraints, bb84_discard_fix, tetrahedron_physical, Bb84Counts};
use tomo_core::TomoError;

#[derive(Parser)]
#[command(name = "tomo", version, about = "Four-qubit tomography benchmark: LIN vs MLE target fidelities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write runs.csv, summary.json and histogram.csv.
    Run(RunArgs),
    /// Check four qubit outcome probabilities (or BB84 counts) for physicality.
    /// Exits 0 when physical, 1 when not.
    CheckConstraints(CheckArgs),
    /// Run the built-in GHZ / W / random-target scenario suite.
    Table1(Table1Args),
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    copies_per_setting: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of `lin,mle`.
    #[arg(long)]
    estimators: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    bin_width: Option<f64>,
    /// Worker threads (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Also write each run's counts to `<out-dir>/counts/`.
    #[arg(long)]
    dump_counts: bool,
}

#[derive(Args)]
struct RunArgs {
    /// ghz4 | w4 | random-pure | file:PATH
    #[arg(long)]
    target: Option<String>,
    /// Seed of the random-pure target.
    #[arg(long)]
    target_seed: Option<u64>,
    /// Depolarize the target to this fidelity to get the true state.
    #[arg(long, conflicts_with = "true_file")]
    true_fidelity: Option<f64>,
    /// Read the true state from a density-matrix file.
    #[arg(long)]
    true_file: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct Table1Args {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum PomKind {
    /// Four tetrahedron probabilities.
    Tetrahedron,
    /// Probabilities `p0 p1 p+ p-` of the beam-splitter measurement.
    Bb84,
    /// Click counts `n0 n1 n+ n-`, corrected by discarding `n+`.
    Bb84Counts,
}

#[derive(Args)]
struct CheckArgs {
    /// File with four numbers separated by whitespace or commas.
    file: PathBuf,
    #[arg(long, value_enum, default_value = "tetrahedron")]
    pom: PomKind,
}

fn builder(common: &CommonArgs) -> Result<ConfigBuilder, TomoError> {
    let mut b = ConfigBuilder::new();
    if let Some(path) = &common.config {
        b.parse_file(path)?;
    }
    let mut set = |k: &str, v: Option<String>| -> Result<(), TomoError> {
        if let Some(v) = v {
            b.set(k, v)?;
        }
        Ok(())
    };
    set("runs", common.runs.map(|v| v.to_string()))?;
    set("copies_per_setting", common.copies_per_setting.map(|v| v.to_string()))?;
    set("seed", common.seed.map(|v| v.to_string()))?;
    set("estimators", common.estimators.clone())?;
    set("out_dir", common.out_dir.as_ref().map(|p| p.display().to_string()))?;
    set("bin_width", common.bin_width.map(|v| v.to_string()))?;
    set("workers", common.workers.map(|v| v.to_string()))?;
    if common.dump_counts {
        set("dump_counts", Some("true".into()))?;
    }
    Ok(b)
}

fn print_summary(label: &str, res: &ScenarioResult) {
    println!("{label}: F0 = {:.6}", res.f0);
    for (est, s) in &res.summaries {
        println!(
            "  {est}: mean {:.6}  std {:.3e}  bias^2 {:.3e}  var {:.3e}  mse {:.3e}  >1 {:.3}  nonphysical {:.3}  unconverged {}",
            s.stats.mean,
            s.stats.std_dev(),
            s.stats.bias_sq,
            s.stats.variance,
            s.stats.mse,
            s.stats.frac_above_one,
            s.stats.frac_nonphysical_estimates,
            s.unconverged_runs,
        );
    }
}

fn cmd_run(args: &RunArgs) -> Result<(), TomoError> {
    let mut b = builder(&args.common)?;
    if let Some(t) = &args.target {
        b.set("target", t.clone())?;
    }
    if let Some(s) = args.target_seed {
        b.set("target_seed", s.to_string())?;
    }
    if let Some(f) = args.true_fidelity {
        b.set("true_fidelity", f.to_string())?;
    }
    if let Some(p) = &args.true_file {
        b.set("true_file", p.display().to_string())?;
    }
    let mut cfg = b.build()?;
    let out = cfg.out_dir.get_or_insert_with(|| PathBuf::from("out")).clone();
    let res = run_scenario(&cfg)?;
    emit_outputs(&res, &cfg, &out)?;
    print_summary(&cfg.true_state.label(), &res);
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_table1(args: &Table1Args) -> Result<(), TomoError> {
    let mut base = builder(&args.common)?.build()?;
    let root = base.out_dir.take().unwrap_or_else(|| PathBuf::from("table1"));
    run_table1(&base, &root, print_summary)?;
    println!("wrote {}", root.join("table1.csv").display());
    Ok(())
}

fn read_four(path: &Path) -> Result<[f64; 4], TomoError> {
    let text = fs::read_to_string(path)?;
    let nums = text
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| TomoError::Config(format!("not a number: {s:?}")))
        })
        .collect::<Result<Vec<f64>, _>>()?;
    nums.try_into()
        .map_err(|v: Vec<f64>| TomoError::Config(format!("expected 4 numbers, found {}", v.len())))
}

fn cmd_check(args: &CheckArgs) -> Result<bool, TomoError> {
    let p = read_four(&args.file)?;
    let ok = match args.pom {
        PomKind::Tetrahedron => {
            let sq: f64 = p.iter().map(|x| x * x).sum();
            println!("sum p = {}, sum p^2 = {sq} (bound 1/3)", p.iter().sum::<f64>());
            tetrahedron_physical(&p)
        }
        PomKind::Bb84 => bb84_constraints(&p),
        PomKind::Bb84Counts => {
            let count = |x: f64| {
                if x >= 0.0 && x.fract() == 0.0 {
                    Ok(x as u64)
                } else {
                    Err(TomoError::Config(format!("counts must be non-negative integers, got {x}")))
                }
            };
            let c = Bb84Counts::new(count(p[0])?, count(p[1])?, count(p[2])?, count(p[3])?);
            let (f, n_eff) = bb84_discard_fix(c)?;
            println!("corrected frequencies {f:?} over {n_eff} counts");
            bb84_constraints(&f)
        }
    };
    println!("{}", if ok { "physical" } else { "unphysical" });
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => cmd_run(a).map(|_| true),
        Command::Table1(a) => cmd_table1(a).map(|_| true),
        Command::CheckConstraints(a) => cmd_check(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
