use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use gcirc_core::experiment::{run_experiment, Check, ExperimentPlan, Thresholds};
use gcirc_core::{
    emit_histogram, read_eigenvalues_csv, run_selftest, BaseDistribution, EnsembleConfig, GroupSpec,
};
use serde::Deserialize;

/// Spectra of random G-circulant matrices over finite abelian groups.
#[derive(Parser)]
#[command(name = "gcirc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact-count and transform-oracle checks on a built-in group suite.
    Selftest {
        /// Print every check, not only failures.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Size, involution fraction and character counts of a group such as "4,2^9".
    GroupInfo { spec: String },
    /// Sample trials, compute spectra and compare with the limiting law.
    Experiment(ExperimentArgs),
    /// Equal-width histogram of the eigenvalues in a CSV file.
    Histogram {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        /// Write the histogram here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct ExperimentArgs {
    /// TOML plan with the same keys as the flags; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    group: Option<String>,
    /// gaussian, rademacher or uniform.
    #[arg(long)]
    base: Option<BaseDistribution>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    hermitian: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated: limit_distance, covariance, norm_curve, lindeberg, selftest.
    #[arg(long)]
    checks: Option<String>,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-trial eigenvalue CSV path.
    #[arg(long)]
    eigen_csv: Option<PathBuf>,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    group: Option<String>,
    base: Option<BaseDistribution>,
    alpha: Option<f64>,
    beta: Option<f64>,
    hermitian: Option<bool>,
    trials: Option<usize>,
    seed: Option<u64>,
    checks: Option<Vec<Check>>,
    out: Option<PathBuf>,
    eigen_csv: Option<PathBuf>,
    jobs: Option<usize>,
    thresholds: Option<Thresholds>,
}

fn build_plan(args: ExperimentArgs) -> anyhow::Result<(ExperimentPlan, usize)> {
    let file = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            toml::from_str::<PlanFile>(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => PlanFile::default(),
    };
    let Some(group) = args.group.or(file.group) else {
        bail!("missing group: pass --group <spec> (e.g. \"2^12\" or \"4,2,5\") or set `group` in the config file");
    };
    let group: GroupSpec = group.parse()?;
    let Some(trials) = args.trials.or(file.trials) else {
        bail!("missing trial count: pass --trials <n> or set `trials` in the config file");
    };
    let checks = match args.checks {
        Some(list) => Check::parse_list(&list)?,
        None => file.checks.unwrap_or_else(|| vec![Check::LimitDistance]),
    };
    let defaults = EnsembleConfig::default();
    let ensemble = EnsembleConfig::new(
        args.base.or(file.base).unwrap_or(defaults.base),
        args.alpha.or(file.alpha).unwrap_or(defaults.alpha),
        args.beta.or(file.beta).unwrap_or(defaults.beta),
        args.hermitian || file.hermitian.unwrap_or(false),
        args.seed.or(file.seed).unwrap_or(defaults.seed),
    )?;
    let mut plan = ExperimentPlan::new(group, ensemble, trials, checks);
    plan.thresholds = file.thresholds.unwrap_or_default();
    plan.out = args.out.or(file.out);
    plan.eigen_csv = args.eigen_csv.or(file.eigen_csv);
    Ok((plan, args.jobs.or(file.jobs).unwrap_or(0)))
}

fn experiment(args: ExperimentArgs) -> anyhow::Result<ExitCode> {
    let (plan, jobs) = build_plan(args)?;
    let report = run_experiment(&plan, jobs)?;
    if plan.out.is_none() {
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    for o in &report.outcomes {
        eprintln!(
            "{} {}: {}",
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
    }
    Ok(if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn selftest(verbose: bool) -> ExitCode {
    let report = run_selftest();
    for c in &report.checks {
        if verbose || !c.passed {
            println!(
                "{} {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
    }
    let failed = report.checks.iter().filter(|c| !c.passed).count();
    println!("{} checks, {failed} failed", report.checks.len());
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn group_info(spec: &str) -> anyhow::Result<()> {
    let g: GroupSpec = spec.parse()?;
    let p = g.p2();
    println!("group: {g}");
    println!("N: {}", g.size());
    println!("p2: {p} ({:.6})", *p.numer() as f64 / *p.denom() as f64);
    println!("involutions: {}", g.involution_count());
    println!("real characters: {}", g.real_character_count());
    Ok(())
}

fn histogram(input: PathBuf, bins: usize, out: Option<PathBuf>) -> anyhow::Result<()> {
    let file = File::open(&input).with_context(|| format!("opening {}", input.display()))?;
    let samples = read_eigenvalues_csv(BufReader::new(file))?;
    let h = emit_histogram(&samples, bins)?;
    match out {
        Some(path) => h.write_csv(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        )?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            h.write_csv(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Selftest { verbose } => Ok(selftest(verbose)),
        Command::GroupInfo { spec } => group_info(&spec).map(|()| ExitCode::SUCCESS),
        Command::Experiment(args) => experiment(args),
        Command::Histogram { input, bins, out } => {
            histogram(input, bins, out).map(|()| ExitCode::SUCCESS)
        }
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
