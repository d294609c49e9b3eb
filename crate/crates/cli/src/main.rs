use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use stdpnet::attack::{adversarial_accuracy, AttackConfig};
use stdpnet::data::DataPaths;
use stdpnet::harness::{
    comparison_table, emit_reports, evaluate, load_model, load_pair, save_model, train_with,
    write_adversarial_csv, DatasetKind, ExperimentConfig, Method, RunRecord,
};
use stdpnet::rule::sample_curves;

mod config_file;

#[derive(Parser)]
#[command(
    name = "stdpnet",
    version,
    about = "Local STDP learning vs backprop on binary MNIST/IRIS"
)]
// Config file entries are spliced in before the command-line flags, so the
// last occurrence of a flag has to win.
#[command(args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one or both methods, attack the results and write reports.
    Train(TrainArgs),
    /// Report clean train/test accuracy of a saved model.
    Eval(ModelArgs),
    /// FGSM-attack a saved model on the test split.
    Attack(ModelArgs),
    /// Sample both STDP timing curves as CSV.
    Curve(CurveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Dataset {
    Mnist,
    Iris,
}

impl From<Dataset> for DatasetKind {
    fn from(d: Dataset) -> Self {
        match d {
            Dataset::Mnist => DatasetKind::Mnist,
            Dataset::Iris => DatasetKind::Iris,
        }
    }
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum MethodArg {
    Stdp,
    Bp,
    Both,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Config file of key=value lines; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "mnist")]
    dataset: Dataset,
    /// Class pair, e.g. `0,1`. The first class becomes label 0.
    #[arg(long, default_value = "0,1", value_parser = parse_pair)]
    pair: (u8, u8),
    #[arg(long)]
    epochs: Option<usize>,
    /// Defaults to 100 for MNIST and 40 for IRIS.
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long, default_value_t = 1e-3)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed_init: u64,
    #[arg(long, default_value_t = 0)]
    seed_assoc: u64,
    #[arg(long, default_value_t = 0)]
    seed_shuffle: u64,
    #[arg(long, default_value_t = 0)]
    seed_split: u64,
    #[arg(long, default_value = "data/mnist")]
    mnist_dir: PathBuf,
    #[arg(long, default_value = "data/iris.csv")]
    iris_file: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Clamp on |ΔW| of the STDP rule. Off unless given.
    #[arg(long)]
    delta_cap: Option<f64>,
    /// Comma-separated FGSM strengths; fractions like `8/255` are accepted.
    #[arg(long, default_value = "4/255,8/255,12/255", value_parser = parse_epsilons)]
    epsilons: Epsilons,
}

#[derive(Clone, Debug, PartialEq)]
struct Epsilons(Vec<f64>);

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    #[arg(long, value_enum, default_value = "both")]
    method: MethodArg,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    exp: ExperimentArgs,
    /// Model file written by `train`.
    #[arg(long)]
    model: PathBuf,
    /// Method label for the report rows.
    #[arg(long, default_value = "stdp")]
    method: String,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long, default_value_t = 1.0)]
    t_pre: f64,
    /// Samples ΔT over [-limit, limit].
    #[arg(long, default_value_t = 0.9)]
    limit: f64,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_pair(s: &str) -> Result<(u8, u8), String> {
    let (a, b) = s.split_once(',').ok_or("expected A,B")?;
    let p = |v: &str| v.trim().parse::<u8>().map_err(|e| format!("{v:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let v = match s.split_once('/') {
        Some((n, d)) => {
            let n: f64 = n.trim().parse().map_err(|_| format!("bad number {n:?}"))?;
            let d: f64 = d.trim().parse().map_err(|_| format!("bad number {d:?}"))?;
            n / d
        }
        None => s.parse().map_err(|_| format!("bad number {s:?}"))?,
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{s:?} is not finite"))
    }
}

fn parse_epsilons(s: &str) -> Result<Epsilons, String> {
    s.split(',')
        .map(parse_fraction)
        .collect::<Result<_, _>>()
        .map(Epsilons)
}

impl ExperimentArgs {
    fn config(&self, method: Method) -> Result<ExperimentConfig> {
        let dataset = DatasetKind::from(self.dataset);
        let mut cfg = ExperimentConfig::new(dataset, self.pair, method);
        if let Some(e) = self.epochs {
            cfg.epochs = e;
        }
        if let Some(b) = self.batch_size {
            cfg.batch_size = b;
        }
        cfg.adam.lr = self.lr;
        cfg.seeds.init = self.seed_init;
        cfg.seeds.assoc = self.seed_assoc;
        cfg.seeds.shuffle = self.seed_shuffle;
        cfg.seeds.split = self.seed_split;
        cfg.rule.delta_cap = self.delta_cap;
        cfg.attack = AttackConfig {
            epsilons: self.epsilons.0.clone(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn paths(&self) -> DataPaths {
        DataPaths {
            mnist_dir: Some(self.mnist_dir.clone()),
            iris_file: Some(self.iris_file.clone()),
        }
    }
}

fn run_label(cfg: &ExperimentConfig) -> String {
    format!("{}-{}", cfg.dataset, cfg.pair_label())
}

fn train_cmd(args: &TrainArgs) -> Result<()> {
    let methods: &[Method] = match args.method {
        MethodArg::Stdp => &[Method::Stdp],
        MethodArg::Bp => &[Method::Bp],
        MethodArg::Both => &[Method::Stdp, Method::Bp],
    };
    let base = args.exp.config(methods[0])?;
    let (train, test) = load_pair(&base, &args.exp.paths()).context("loading data")?;
    eprintln!(
        "{}: {} train / {} test samples, {} features",
        run_label(&base),
        train.len(),
        test.len(),
        train.dim()
    );
    std::fs::create_dir_all(&args.exp.out_dir)
        .with_context(|| format!("creating {}", args.exp.out_dir.display()))?;

    let mut runs = Vec::new();
    for &method in methods {
        let cfg = base.clone().with_method(method);
        let outcome = train_with(&cfg, &train, &test, |m| {
            eprintln!(
                "[{method}] epoch {:>3}  train {:.4}  test {:.4}  bce {:.4}",
                m.epoch, m.train_accuracy, m.test_accuracy, m.mean_train_loss
            );
        })?;
        let model_path = args
            .exp
            .out_dir
            .join(format!("model_{method}_{}.stdpnet", run_label(&cfg)));
        save_model(&outcome.network, &outcome.assoc, &model_path)?;
        let adversarial = adversarial_accuracy(&outcome.network, &test, &cfg.attack)?;
        runs.push(RunRecord {
            method,
            pair: cfg.pair_label(),
            metrics: outcome.metrics,
            adversarial,
        });
    }
    for path in emit_reports(&runs, &args.exp.out_dir)? {
        eprintln!("wrote {}", path.display());
    }
    print!("{}", comparison_table(&runs));
    Ok(())
}

fn eval_cmd(args: &ModelArgs) -> Result<()> {
    let cfg = args.exp.config(Method::Stdp)?;
    let (net, _) = load_model(&args.model)?;
    let (train, test) = load_pair(&cfg, &args.exp.paths())?;
    let (train_acc, train_loss) = evaluate(&net, &train)?;
    let (test_acc, test_loss) = evaluate(&net, &test)?;
    println!("split,accuracy,bce");
    println!("train,{train_acc},{train_loss}");
    println!("test,{test_acc},{test_loss}");
    Ok(())
}

fn attack_cmd(args: &ModelArgs) -> Result<()> {
    let method: Method = args.method.parse()?;
    let cfg = args.exp.config(method)?;
    let (net, _) = load_model(&args.model)?;
    let (_, test) = load_pair(&cfg, &args.exp.paths())?;
    let run = RunRecord {
        method,
        pair: cfg.pair_label(),
        metrics: Vec::new(),
        adversarial: adversarial_accuracy(&net, &test, &cfg.attack)?,
    };
    write_output(
        Some(&args.exp.out_dir.join("adversarial.csv")),
        &write_adversarial_csv(std::slice::from_ref(&run)),
    )
}

fn curve_cmd(args: &CurveArgs) -> Result<()> {
    let mut csv = String::from("delta_t,corrected,uncorrected\n");
    for p in sample_curves(args.t_pre, args.limit, args.step)? {
        csv.push_str(&format!(
            "{},{},{}\n",
            p.delta_t, p.corrected, p.uncorrected
        ));
    }
    write_output(args.out.as_deref(), &csv)
}

fn write_output(path: Option<&Path>, body: &str) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{body}"),
    }
    Ok(())
}

fn run(args: Vec<OsString>) -> Result<()> {
    let cli = Cli::try_parse_from(config_file::expand(args)?).unwrap_or_else(|e| e.exit());
    match &cli.command {
        Command::Train(a) => train_cmd(a),
        Command::Eval(a) => eval_cmd(a),
        Command::Attack(a) => attack_cmd(a),
        Command::Curve(a) => curve_cmd(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
