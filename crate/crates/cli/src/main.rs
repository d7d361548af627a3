use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use modpc::campaign::{run, run_all, ExperimentConfig, Statement, SuiteConfig};
use modpc::congruence::constants_76;
use modpc::exec::Exec;
use modpc::padic::rational::parse_q;
use modpc::symplectic::cosets::{coset_reps_check, CosetSpace};
use modpc::symplectic::TorusElement;

#[derive(Parser)]
#[command(name = "modpc", version, about = "Seeded verification campaigns for p-adic congruences of Hecke eigencharacters")]
#[command(after_help = "Environment: MODPC_PRECISION_CAP caps the p-adic working precision (default 4096).")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one campaign (or the whole suite with `--statement all`).
    Run(RunArgs),
    /// Characteristic-polynomial valuations and torus extraction.
    Lemma71(CampaignArgs),
    /// Congruences between normalised traces of congruent weights.
    Prop74(Prop74Args),
    /// Formal geometric-side comparison.
    Thm75(Thm75Args),
    /// The family constants for a slope bound.
    Constants(ConstantsArgs),
    /// Enumerate coset representatives for `h_p^e`.
    Cosets(CosetsArgs),
    /// The full suite at default sizes.
    All(AllArgs),
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    precision: Option<u32>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write a CSV table of per-trial valuations.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Run trials one after another.
    #[arg(long)]
    sequential: bool,
    /// Corrupt every instance before checking it.
    #[arg(long)]
    mutate: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    statement: Option<String>,
    /// JSON config file; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    e: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    beta: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct CampaignArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    e: Option<u32>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Prop74Args {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<u64>,
    /// Width of the range of pairings above `2C`.
    #[arg(long)]
    k: Option<i64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    e: Option<u32>,
    /// The constant `C` (a rational); derived from `--beta` when absent.
    #[arg(long = "C")]
    c: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Thm75Args {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    beta: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ConstantsArgs {
    #[arg(long)]
    beta: String,
    #[arg(long = "M")]
    m: u64,
    #[arg(long = "M1")]
    m1: u64,
    #[arg(long)]
    p: u64,
}

#[derive(Args)]
struct CosetsArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    p: u64,
    #[arg(long)]
    exponent: u32,
    /// Print every representative's parameters.
    #[arg(long)]
    list: bool,
}

#[derive(Args)]
struct AllArgs {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    precision: Option<u32>,
    /// Cap on every campaign's trial count.
    #[arg(long)]
    max_trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    mutate: bool,
}

fn apply_common(cfg: &mut ExperimentConfig, c: &Common) {
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(t) = c.trials {
        cfg.trials = t;
    }
    if let Some(pr) = c.precision {
        cfg.precision = pr;
    }
    if c.sequential {
        cfg.exec = Exec::Sequential;
    }
    cfg.mutate |= c.mutate;
    if let Some(p) = &c.out {
        cfg.out = Some(p.display().to_string());
    }
    if let Some(p) = &c.csv {
        cfg.csv = Some(p.display().to_string());
    }
}

fn emit(text: &str, out: Option<&str>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n")).with_context(|| format!("writing {path}")),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn exit_for(falsified: bool) -> ExitCode {
    if falsified {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn campaign(cfg: ExperimentConfig) -> Result<ExitCode> {
    let report = run(&cfg)?;
    emit(&report.to_json_pretty(), cfg.out.as_deref())?;
    if let Some(path) = &cfg.csv {
        std::fs::write(path, report.to_csv()?).with_context(|| format!("writing {path}"))?;
    }
    eprintln!(
        "{}: {}/{} passed, {} falsified, {} operational errors",
        report.statement, report.aggregate.passed, report.aggregate.trials, report.aggregate.falsifications, report.aggregate.operational_errors
    );
    Ok(exit_for(report.has_falsification()))
}

fn suite(s: SuiteConfig, out: Option<PathBuf>) -> Result<ExitCode> {
    let summary = run_all(&s)?;
    let text = serde_json::to_string_pretty(&summary)?;
    emit(&text, out.as_ref().map(|p| p.display().to_string()).as_deref())?;
    for r in &summary.reports {
        eprintln!("{}: {}/{} passed, {} falsified", r.statement, r.aggregate.passed, r.aggregate.trials, r.aggregate.falsifications);
    }
    Ok(exit_for(summary.has_falsification()))
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.cmd {
        Cmd::Run(a) => {
            let file: Option<ExperimentConfig> = match &a.config {
                Some(path) => {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
                }
                None => None,
            };
            let statement: Statement = match (&a.statement, &file) {
                (Some(s), _) => s.parse()?,
                (None, Some(f)) => f.statement,
                (None, None) => bail!("--statement or --config is required"),
            };
            if statement == Statement::All {
                let mut s = SuiteConfig::default();
                if let Some(seed) = a.common.seed {
                    s.seed = seed;
                }
                if let Some(pr) = a.common.precision {
                    s.precision = pr;
                }
                s.max_trials = a.common.trials;
                s.mutate = a.common.mutate;
                if a.common.sequential {
                    s.exec = Exec::Sequential;
                }
                return suite(s, a.common.out.clone());
            }
            let mut cfg = match file {
                Some(f) if f.statement == statement => f,
                Some(f) => ExperimentConfig { statement, ..f },
                None => ExperimentConfig::for_statement(statement),
            };
            if let Some(n) = a.n {
                cfg.n = n;
            }
            if let Some(p) = a.p {
                cfg.p = p;
            }
            if a.e.is_some() {
                cfg.e = a.e;
            }
            if a.m.is_some() {
                cfg.m = a.m;
            }
            if a.beta.is_some() {
                cfg.beta = a.beta.clone();
            }
            apply_common(&mut cfg, &a.common);
            campaign(cfg)
        }
        Cmd::Lemma71(a) => {
            let mut cfg = ExperimentConfig::for_statement(Statement::Lemma71);
            cfg.n = a.n.unwrap_or(cfg.n);
            cfg.p = a.p.unwrap_or(cfg.p);
            cfg.e = a.e;
            apply_common(&mut cfg, &a.common);
            campaign(cfg)
        }
        Cmd::Prop74(a) => {
            let mut cfg = ExperimentConfig::for_statement(Statement::Prop74);
            cfg.n = a.n.unwrap_or(cfg.n);
            cfg.p = a.p.unwrap_or(cfg.p);
            cfg.weight_span = a.k.unwrap_or(cfg.weight_span);
            cfg.m = a.m;
            cfg.e = a.e;
            cfg.beta = a.beta;
            cfg.c = a.c;
            apply_common(&mut cfg, &a.common);
            campaign(cfg)
        }
        Cmd::Thm75(a) => {
            let mut cfg = ExperimentConfig::for_statement(Statement::Thm75);
            cfg.n = a.n.unwrap_or(cfg.n);
            cfg.p = a.p.unwrap_or(cfg.p);
            cfg.m = a.m;
            cfg.beta = a.beta;
            apply_common(&mut cfg, &a.common);
            campaign(cfg)
        }
        Cmd::Constants(a) => {
            let beta = parse_q(&a.beta)?;
            let k = constants_76(&beta, a.m, a.m1, a.p)?;
            println!("{}", serde_json::to_string_pretty(&k)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Cosets(a) => {
            if a.exponent == 0 {
                bail!("--exponent must be at least 1");
            }
            let s = TorusElement::h_p(a.n, a.p).pow(a.exponent as i64);
            let space = CosetSpace::new(&s, a.p)?;
            let rep = coset_reps_check(&space, 2000)?;
            let mut out = serde_json::json!({ "schema": 1, "n": a.n, "p": a.p, "exponent": a.exponent, "report": rep });
            if a.list {
                out["representatives"] = serde_json::json!(space.enumerate()?);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Cmd::All(a) => {
            let mut s = SuiteConfig::default();
            if let Some(seed) = a.seed {
                s.seed = seed;
            }
            if let Some(pr) = a.precision {
                s.precision = pr;
            }
            s.max_trials = a.max_trials;
            s.mutate = a.mutate;
            if a.sequential {
                s.exec = Exec::Sequential;
            }
            suite(s, a.out)
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
