//! Command-line front end for construction, verification grids, p-adic limits and bundle checks.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use num_bigint::BigInt;
use pskz::algebra::PolyZ;
use pskz::grid::{run_bundle, run_suites, BundleConfig, GridConfig, Suite};
use pskz::hypergeometric::{family, DEFAULT_DEGREE_BUDGET};
use pskz::padic::{limit_vector, DomainOracle, Unramified};
use pskz::report::{all_pass, CheckRecord};
use pskz::Error;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "pskz",
    version,
    about = "p^s-hypergeometric solutions, their congruences and p-adic limits"
)]
struct Cli {
    /// Worker threads for grid cells (0 = one per core).
    #[arg(long, global = true, env = "PSKZ_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Dynamical,
    Qkz,
    Dwork,
    Factor,
    Construction,
    All,
}

impl SuiteArg {
    fn suites(self) -> Vec<Suite> {
        match self {
            SuiteArg::Dynamical => vec![Suite::Dynamical],
            SuiteArg::Qkz => vec![Suite::Qkz],
            SuiteArg::Dwork => vec![Suite::Dwork],
            SuiteArg::Factor => vec![Suite::Factor],
            SuiteArg::Construction => vec![Suite::Construction],
            SuiteArg::All => Suite::ALL.to_vec(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print T_s, I_{s,1}, I_{s,2} as term lists.
    Compute {
        #[arg(long)]
        p: u64,
        #[arg(long)]
        s: u32,
        #[arg(long, allow_hyphen_values = true)]
        lambda: i64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, default_value_t = DEFAULT_DEGREE_BUDGET)]
        budget: u64,
    },
    /// Run a verification grid; exit 1 if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
        primes: Vec<u64>,
        #[arg(long)]
        s_max: Option<u32>,
        #[arg(long, default_value_t = DEFAULT_DEGREE_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
        /// Corrupt one coefficient of every family before checking.
        #[arg(long)]
        perturb: bool,
        /// Record wall time per cell (makes the report nondeterministic).
        #[arg(long)]
        timings: bool,
    },
    /// Evaluate the limit vector at a Teichmüller-lifted point.
    Limit {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        m: u32,
        #[arg(long, allow_hyphen_values = true)]
        lambda: i64,
        /// Residues "a,b"; for m > 1 each coordinate is colon-separated coefficients, low degree first.
        #[arg(long)]
        point: String,
        #[arg(long, default_value_t = 2)]
        precision: u32,
    },
    /// Sampled invariance checks and the intersection count; exit 1 on failure.
    Bundle {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, default_value_t = 2)]
        precision: u32,
        /// Inclusive range "a..b"; the odd values in it are used.
        #[arg(long, allow_hyphen_values = true, default_value = "-3..3")]
        lambda_range: String,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::OutsideDomain(_)) => 3,
                _ => 2,
            };
            ExitCode::from(code)
        }
    }
}

fn run(cmd: Command) -> anyhow::Result<ExitCode> {
    match cmd {
        Command::Compute {
            p,
            s,
            lambda,
            format,
            budget,
        } => {
            let fam = family(p, s, lambda, budget)?;
            let polys = [("T", &fam.t), ("I1", &fam.i[0]), ("I2", &fam.i[1])];
            let mut out = io::stdout().lock();
            match format {
                Format::Json => {
                    let terms = |poly: &PolyZ| -> Vec<serde_json::Value> {
                        sorted_terms(poly)
                            .into_iter()
                            .map(|(e, c)| json!([e, c.to_string()]))
                            .collect()
                    };
                    let report = json!({
                        "schema_version": SCHEMA_VERSION,
                        "config": {"command": "compute", "p": p, "s": s, "lambda": lambda},
                        "family": {"T": terms(&fam.t), "I1": terms(&fam.i[0]), "I2": terms(&fam.i[1])},
                    });
                    serde_json::to_writer_pretty(&mut out, &report)?;
                    writeln!(out)?;
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(out);
                    w.write_record(["poly", "e1", "e2", "coefficient"])?;
                    for (name, poly) in polys {
                        for (e, c) in sorted_terms(poly) {
                            w.write_record([
                                name.to_string(),
                                e[0].to_string(),
                                e[1].to_string(),
                                c.to_string(),
                            ])?;
                        }
                    }
                    w.flush()?;
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify {
            suite,
            primes,
            s_max,
            budget,
            format,
            output,
            perturb,
            timings,
        } => {
            let cfg = GridConfig {
                primes: primes.clone(),
                s_max,
                budget,
                perturb,
                timings,
            };
            let records = run_suites(&suite.suites(), &cfg)?;
            let config = json!({
                "command": "verify",
                "suite": suite.to_possible_value().map(|v| v.get_name().to_string()),
                "primes": primes,
                "s_max": primes.iter().map(|&p| cfg.s_max_for(p)).collect::<Vec<_>>(),
                "budget": budget,
                "perturb": perturb,
            });
            emit_report(&config, &records, format, output.as_ref())?;
            Ok(finish(&records))
        }
        Command::Limit {
            p,
            m,
            lambda,
            point,
            precision,
        } => {
            let ctx = Unramified::new(p, m, precision)?;
            let fq = ctx.residue_field();
            let coords = parse_point(&point, m)?;
            let a = [
                ctx.teichmuller(&fq.from_coeffs(&coords[0])),
                ctx.teichmuller(&fq.from_coeffs(&coords[1])),
            ];
            let oracle = DomainOracle::new(fq)?;
            let residues = [a[0].residue(), a[1].residue()];
            let with_shifted = oracle.flags(&residues, lambda + 2)?.in_domain;
            let lv = limit_vector(&oracle, lambda, &a, with_shifted)?;
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "config": {"command": "limit", "p": p, "m": m, "lambda": lambda, "point": point, "precision": precision},
                "limit": lv,
            });
            let mut out = io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, &report)?;
            writeln!(out)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Bundle {
            p,
            m,
            precision,
            lambda_range,
            samples,
            seed,
            format,
            output,
        } => {
            let lambdas = parse_lambda_range(&lambda_range)?;
            let cfg = BundleConfig {
                p,
                m,
                precision,
                lambdas: lambdas.clone(),
                samples,
                seed,
            };
            let records = run_bundle(&cfg)?;
            let config = json!({
                "command": "bundle",
                "p": p,
                "m": m,
                "precision": precision,
                "lambdas": lambdas,
                "samples": samples,
                "seed": seed,
            });
            emit_report(&config, &records, format, output.as_ref())?;
            Ok(finish(&records))
        }
    }
}

/// Terms with exponent pairs in descending lexicographic order.
fn sorted_terms(poly: &PolyZ) -> Vec<(Vec<u32>, BigInt)> {
    let mut t = poly.term_list();
    t.sort_by(|a, b| b.0.cmp(&a.0));
    t
}

fn finish(records: &[CheckRecord]) -> ExitCode {
    if all_pass(records) {
        return ExitCode::SUCCESS;
    }
    let failed: Vec<_> = records.iter().filter(|r| !r.pass).collect();
    eprintln!("{} of {} checks failed", failed.len(), records.len());
    for r in failed.iter().take(20) {
        eprintln!("  FAIL {} {}", r.check, format_params(r));
    }
    ExitCode::from(1)
}

fn format_params(r: &CheckRecord) -> String {
    r.params
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Serialize)]
struct Report<'a> {
    schema_version: u32,
    config: &'a serde_json::Value,
    records: &'a [CheckRecord],
}

fn emit_report(
    config: &serde_json::Value,
    records: &[CheckRecord],
    format: Format,
    output: Option<&PathBuf>,
) -> anyhow::Result<()> {
    let sink: Box<dyn Write> = match output {
        Some(path) => Box::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        ),
        None => Box::new(io::stdout().lock()),
    };
    match format {
        Format::Json => {
            let mut sink = sink;
            let report = Report {
                schema_version: SCHEMA_VERSION,
                config,
                records,
            };
            serde_json::to_writer_pretty(&mut sink, &report)?;
            writeln!(sink)?;
            sink.flush()?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(sink);
            w.write_record([
                "check",
                "params",
                "guaranteed",
                "observed",
                "pass",
                "detail",
                "runtime_ms",
            ])?;
            for r in records {
                w.write_record([
                    r.check.clone(),
                    format_params(r),
                    r.guaranteed.map(|g| g.to_string()).unwrap_or_default(),
                    r.observed.map(|o| o.to_string()).unwrap_or_default(),
                    r.pass.to_string(),
                    r.detail.clone().unwrap_or_default(),
                    r.runtime_ms.map(|t| t.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn parse_point(spec: &str, m: u32) -> anyhow::Result<[Vec<i64>; 2]> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("point must have two coordinates, got {spec:?}");
    }
    let coord = |s: &str| -> anyhow::Result<Vec<i64>> {
        let c = s
            .split(':')
            .map(|x| {
                x.trim()
                    .parse::<i64>()
                    .with_context(|| format!("bad coefficient {x:?}"))
            })
            .collect::<anyhow::Result<Vec<_>>>()?;
        if c.len() > m as usize {
            bail!("coordinate {s:?} has more than m = {m} coefficients");
        }
        Ok(c)
    };
    Ok([coord(parts[0])?, coord(parts[1])?])
}

fn parse_lambda_range(spec: &str) -> anyhow::Result<Vec<i64>> {
    let (a, b) = spec
        .split_once("..")
        .ok_or_else(|| anyhow!("lambda range must look like a..b, got {spec:?}"))?;
    let a: i64 = a.trim().parse().context("bad lambda range start")?;
    let b: i64 = b.trim().parse().context("bad lambda range end")?;
    let v: Vec<i64> = (a..=b).filter(|l| l.rem_euclid(2) == 1).collect();
    if v.is_empty() {
        bail!("lambda range {spec:?} contains no odd integers");
    }
    Ok(v)
}
