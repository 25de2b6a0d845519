//! Command-line front end. Exit codes: 0 success, 1 usage, 2 validation
//! failure, 3 runtime failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tunematch::bench::{
    consolidate, execute_run, inverse_datasets, sweep_datasets, train_model, write_eval_report, write_loss_history,
    Partitioned, Profile, Report, RunConfig, StrategyKind,
};
use tunematch::circuit::{CircuitTopology, Orientation, Slot};
use tunematch::data::{read_dataset, write_dataset, DatasetFormat, ScenarioSuite};
use tunematch::nn::{evaluate_surrogate, MlpModel, ModelRole};
use tunematch::{Error, Result};

#[derive(Parser)]
#[command(name = "tunematch", version, about = "Adaptive impedance matching toolkit")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

/// Run-config fields; each flag overrides the config file.
#[derive(Args, Default)]
struct Overrides {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    profile: Option<ProfileArg>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    circuit: Option<PathBuf>,
    #[arg(long, global = true)]
    recbm_model: Option<PathBuf>,
    #[arg(long, global = true)]
    ims_model: Option<PathBuf>,
    #[arg(long, global = true)]
    scenario_file: Option<PathBuf>,
    #[arg(long, global = true)]
    scenarios: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    noise_sigma: Option<f64>,
    #[arg(long, global = true)]
    repeat: Option<usize>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Comma-separated: sapso, adadam, ims, grid, ideal.
    #[arg(long, global = true, value_delimiter = ',')]
    strategies: Option<Vec<String>>,
    #[arg(long, global = true)]
    grid_step_pf: Option<f64>,
    #[arg(long, global = true)]
    compliance_threshold: Option<f64>,
    #[arg(long, global = true)]
    inference_cost: Option<f64>,
    #[arg(long, global = true)]
    width_scale: Option<f64>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Desk,
    Paper,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Bin,
}

#[derive(Subcommand)]
enum Command {
    /// Circuit descriptions.
    #[command(subcommand)]
    Circuit(CircuitCmd),
    /// Dataset and scenario generation.
    #[command(subcommand)]
    Data(DataCmd),
    /// Model training.
    #[command(subcommand)]
    Train(TrainCmd),
    /// Model evaluation.
    #[command(subcommand)]
    Eval(EvalCmd),
    /// Matching runs.
    #[command(subcommand)]
    Match(MatchCmd),
    /// Consolidate report files into tables.
    Report {
        /// `report.json` files or run directories.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
    },
}

#[derive(Subcommand)]
enum CircuitCmd {
    /// Load and validate a circuit file.
    Validate { path: PathBuf },
}

#[derive(Subcommand)]
enum DataCmd {
    /// Exact S-parameter sweep, split into train and test files.
    Sweep {
        #[arg(long, value_enum, default_value = "bin")]
        format: FormatArg,
    },
    /// Inverse pairs predicted by the forward model.
    Inverse {
        #[arg(long, value_enum, default_value = "bin")]
        format: FormatArg,
    },
    /// Seeded mismatch scenarios.
    Scenarios,
}

#[derive(Subcommand)]
enum TrainCmd {
    /// Forward model on a sweep dataset.
    Recbm {
        #[arg(long)]
        data: PathBuf,
    },
    /// Inverse model on an inverse dataset; needs --recbm-model.
    Ims {
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Subcommand)]
enum EvalCmd {
    /// Per-dimension and overall error of a model on a dataset.
    Surrogate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
}

#[derive(Subcommand)]
enum MatchCmd {
    /// Run the selected strategies over a scenario suite.
    Run,
}

fn config(o: &Overrides) -> Result<RunConfig> {
    let profile = o.profile.map(|p| match p {
        ProfileArg::Desk => Profile::Desk,
        ProfileArg::Paper => Profile::Paper,
    });
    let mut cfg = match (&o.config, profile) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Some(p)) => RunConfig::for_profile(p),
        (None, None) => RunConfig::for_profile(Profile::Desk),
    };
    if let (Some(_), Some(p)) = (&o.config, profile) {
        cfg.profile = p;
    }
    macro_rules! set {
        ($($field:ident),*) => { $( if let Some(v) = &o.$field { cfg.$field = v.clone(); } )* };
    }
    set!(scenarios, seed, noise_sigma, repeat, workers, grid_step_pf, compliance_threshold, width_scale);
    macro_rules! set_opt {
        ($($field:ident),*) => { $( if let Some(v) = &o.$field { cfg.$field = Some(v.clone()); } )* };
    }
    set_opt!(circuit, recbm_model, ims_model, scenario_file, inference_cost);
    if let Some(out) = &o.out {
        cfg.output_dir = out.clone();
    }
    if let Some(list) = &o.strategies {
        cfg.strategies = list.iter().map(|s| s.parse()).collect::<Result<Vec<StrategyKind>>>()?;
    }
    if let Some(e) = o.epochs {
        cfg.training.epochs = e;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn ext(f: FormatArg) -> &'static str {
    match f {
        FormatArg::Csv => "csv",
        FormatArg::Bin => "bin",
    }
}

fn out_dir(cfg: &RunConfig) -> Result<&Path> {
    let d = cfg.output_dir.as_path();
    std::fs::create_dir_all(d).map_err(|e| Error::Io { path: d.to_path_buf(), source: e })?;
    Ok(d)
}

fn write_partitioned(cfg: &RunConfig, stem: &str, p: &Partitioned, format: FormatArg) -> Result<()> {
    let dir = out_dir(cfg)?;
    let fmt = DatasetFormat::from_path(Path::new(&format!("x.{}", ext(format))));
    let train = dir.join(format!("{stem}_train.{}", ext(format)));
    let test = dir.join(format!("{stem}_test.{}", ext(format)));
    write_dataset(&p.train, &train, fmt)?;
    write_dataset(&p.test, &test, fmt)?;
    let meta = serde_json::json!({
        "lattice_points": p.generated.dataset.len() + p.generated.skipped,
        "rows": p.generated.dataset.len(),
        "skipped": p.generated.skipped,
        "train_rows": p.train.len(),
        "test_rows": p.test.len(),
        "seed": cfg.seed,
        "sweep": cfg.sweep,
    });
    std::fs::write(dir.join(format!("{stem}_meta.json")), serde_json::to_string_pretty(&meta)?)
        .map_err(|e| Error::Io { path: dir.to_path_buf(), source: e })?;
    println!("{stem}: {} rows ({} skipped) -> {}, {}", p.generated.dataset.len(), p.generated.skipped, train.display(), test.display());
    Ok(())
}

fn train_and_save(cfg: &RunConfig, role: ModelRole, data: &Path) -> Result<()> {
    let topology = cfg.topology()?;
    let ds = read_dataset(data)?;
    let paired = match role {
        ModelRole::Ims => {
            let p = cfg
                .recbm_model
                .as_ref()
                .ok_or_else(|| Error::Validation("train ims needs --recbm-model".into()))?;
            Some(MlpModel::load(p)?)
        }
        ModelRole::Recbm => None,
    };
    let (model, outcome) = train_model(role, cfg, &ds, &topology.fingerprint(), paired.as_ref())?;
    let dir = out_dir(cfg)?;
    let name = match role {
        ModelRole::Recbm => "recbm",
        ModelRole::Ims => "ims",
    };
    model.save(dir.join(format!("{name}.bin")))?;
    write_loss_history(&dir.join(format!("{name}_loss.csv")), &outcome)?;
    let last = outcome.history.last().expect("history has the untrained entry");
    println!("{name}: {} epochs, train mse {:e}, val mse {:e}", last.epoch, last.train_mse, last.val_mse);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Command::Circuit(CircuitCmd::Validate { path }) = &cli.command {
        let t = CircuitTopology::load(path)?;
        let tunable = t.arms().iter().filter(|a| a.expr.references(Slot::P) || a.expr.references(Slot::S)).count();
        println!("{}: {} arms, {} tunable, {} fixed elements", t.name(), t.arms().len(), tunable, t.fixed_element_count());
        for slot in [Slot::P, Slot::S] {
            let i = t.tunable_arm(slot);
            let o = match t.arms()[i].orientation {
                Orientation::Series => "series",
                Orientation::Shunt => "shunt",
            };
            let r = t.tunable_range(slot);
            println!("  {slot:?}: arm {} ({o}), {} to {} pF", i + 1, r.lo * 1e12, r.hi * 1e12);
        }
        println!("  fingerprint {}", t.fingerprint());
        return Ok(());
    }
    let cfg = config(&cli.overrides)?;
    match cli.command {
        Command::Circuit(_) => unreachable!(),
        Command::Data(DataCmd::Sweep { format }) => {
            let p = sweep_datasets(&cfg, &cfg.topology()?)?;
            write_partitioned(&cfg, "sweep", &p, format)
        }
        Command::Data(DataCmd::Inverse { format }) => {
            let path = cfg.recbm_model.as_ref().ok_or_else(|| Error::Validation("data inverse needs --recbm-model".into()))?;
            let p = inverse_datasets(&cfg, &cfg.topology()?, &MlpModel::load(path)?)?;
            write_partitioned(&cfg, "inverse", &p, format)
        }
        Command::Data(DataCmd::Scenarios) => {
            let suite = ScenarioSuite::generate(&cfg.topology()?, cfg.scenarios, cfg.seed, cfg.noise_sigma)?;
            let p = out_dir(&cfg)?.join("scenarios.json");
            suite.save(&p)?;
            println!("{} scenarios -> {}", suite.scenarios.len(), p.display());
            Ok(())
        }
        Command::Train(TrainCmd::Recbm { data }) => train_and_save(&cfg, ModelRole::Recbm, &data),
        Command::Train(TrainCmd::Ims { data }) => train_and_save(&cfg, ModelRole::Ims, &data),
        Command::Eval(EvalCmd::Surrogate { model, data }) => {
            let report = evaluate_surrogate(&MlpModel::load(model)?, &read_dataset(data)?, 1000)?;
            write_eval_report(out_dir(&cfg)?, &report)?;
            for d in &report.dimensions {
                println!("{:>8}  mae {:.3e}  mre {:.3e}", d.name, d.mae, d.mre);
            }
            println!("{:>8}  mae {:.3e}  mre {:.3e}", "overall", report.overall_mae, report.overall_mre);
            Ok(())
        }
        Command::Match(MatchCmd::Run) => {
            let out = execute_run(&cfg)?;
            for s in &out.report.strategies {
                println!(
                    "{:>7}  compliance {:.4}  mean |G| {:.4}  mean evaluations {:.1}  failures {}",
                    s.strategy.name(),
                    s.compliance,
                    s.gamma.map_or(f64::NAN, |g| g.mean),
                    s.evaluations.map_or(f64::NAN, |e| e.mean),
                    s.failures
                );
            }
            Ok(())
        }
        Command::Report { reports } => {
            let loaded = reports
                .iter()
                .map(|p| if p.is_dir() { Report::load(p.join("report.json")) } else { Report::load(p) })
                .collect::<Result<Vec<_>>>()?;
            let sweep = consolidate(&loaded, out_dir(&cfg)?)?;
            for (k, pts) in sweep {
                let cells: Vec<String> = pts.iter().map(|(s, c)| format!("sigma {s}: {c:.4}")).collect();
                println!("{:>7}  {}", k.name(), cells.join("  "));
            }
            Ok(())
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidArgument(_)
        | Error::Validation(_)
        | Error::DegenerateNormalization { .. }
        | Error::ShapeMismatch { .. }
        | Error::EmptyDataset(_)
        | Error::ModelFormat(_)
        | Error::DatasetFormat(_)
        | Error::ReportSchema(_)
        | Error::FingerprintMismatch { .. }
        | Error::Json(_)
        | Error::Toml(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
