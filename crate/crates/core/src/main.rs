use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde_json::json;

use anticyclo::bqf::AbelianPGroup;
use anticyclo::brink::{intersection_depth, DEFAULT_ELL_BOUND};
use anticyclo::cohen_lenstra::{
    intersection_distribution, invariants_lower_bound, prob_contained, prob_disjoint, DEFAULT_TERMS,
};
use anticyclo::iwasawa::{self, fixtures};
use anticyclo::quadfield::{to_fundamental, ImagQuadField};
use anticyclo::schertz::{self, PrecisionContext};
use anticyclo::survey::{tabulate, Family, SurveyRunner, SweepConfig};

#[derive(Parser)]
#[command(
    name = "anticyclo",
    version,
    about = "Anti-cyclotomic towers over imaginary quadratic fields"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Intersection depth of the p-Hilbert class field with the tower.
    Nu {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_ELL_BOUND)]
        ell_bound: u64,
    },
    /// Predicted intersection distributions and constants.
    Heuristics {
        #[arg(long)]
        p: u64,
        /// Exponents, e.g. `2,1` for Z/p^2 x Z/p.
        #[arg(long, value_delimiter = ',')]
        group: Option<Vec<u32>>,
    },
    /// Vanishing criteria for the Iwasawa invariants of a tabulated field.
    Iwasawa {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        p: u64,
        #[arg(long)]
        fixtures: Option<PathBuf>,
    },
    /// Defining polynomial of the k-th layer for p = 3.
    Schertz {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        k: u32,
        #[arg(long = "M")]
        m: Option<u64>,
        #[arg(long)]
        digits: Option<u32>,
    },
    /// Sweep a family d = a*k+b and tabulate nu by A_0.
    Survey {
        #[arg(long, allow_hyphen_values = true)]
        family: Family,
        #[arg(long)]
        k_start: u64,
        #[arg(long)]
        k_end: u64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_ELL_BOUND)]
        ell_bound: u64,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, default_value_t = anticyclo::survey::DEFAULT_BLOCK_SIZE)]
        block_size: u64,
    },
}

/// `-n` fundamental, or else `n` squarefree.
fn field(n: u64) -> Result<ImagQuadField> {
    if let Some(k) = to_fundamental(n) {
        return Ok(k);
    }
    ImagQuadField::from_squarefree(n)
        .with_context(|| format!("{n} is neither a fundamental discriminant label nor squarefree"))
}

fn print(v: &impl serde::Serialize) -> Result<()> {
    emit(&serde_json::to_string_pretty(v)?)
}

fn emit(s: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{}", s.trim_end()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Nu { d, p, ell_bound } => {
            let r = intersection_depth(&field(d)?, p, ell_bound)?;
            print(&r)?;
        }
        Cmd::Heuristics { p, group } => {
            if p == 2 || !anticyclo::arith::is_prime(p) {
                bail!("{p} is not an odd prime");
            }
            let dist = group
                .map(|e| AbelianPGroup::new(p, e).map(|g| intersection_distribution(&g)))
                .transpose()?;
            print(&json!({
                "p": p,
                "prob_disjoint": prob_disjoint(p).to_string(),
                "prob_contained": prob_contained(p, DEFAULT_TERMS),
                "invariants_lower_bound": invariants_lower_bound(p, DEFAULT_TERMS),
                "distribution": dist,
            }))?;
        }
        Cmd::Iwasawa {
            d,
            p,
            fixtures: path,
        } => {
            let recs = match path {
                Some(path) => fixtures::load(&path)?,
                None => fixtures::builtin(),
            };
            let rec = fixtures::find(&recs, d, p)
                .with_context(|| format!("no fixture for d={d}, p={p}"))?;
            let ir = intersection_depth(&field(d)?, p, DEFAULT_ELL_BOUND).ok();
            let from = ir.as_ref().map_or(0, |r| r.nu);
            let data = rec.to_layer_data(from)?;
            let c = iwasawa::evaluate(&data, ir.as_ref());
            print(&json!({ "d": d, "p": p, "nu": ir.map(|r| r.nu), "conclusion": c }))?;
        }
        Cmd::Schertz { d, k, m, digits } => {
            let f = field(d)?;
            let ctx = PrecisionContext::new(digits.unwrap_or_else(|| schertz::default_digits(k)))?;
            let tp = schertz::layer_polynomial(&f, 3, k, m, &ctx)?;
            let comp = if tp.degree() > 1 {
                Some(schertz::compositum_polynomial(&tp.coefficients, &f)?)
            } else {
                None
            };
            let strs =
                |c: &[num_bigint::BigInt]| c.iter().map(|x| x.to_string()).collect::<Vec<_>>();
            print(&json!({
                "polynomial": strs(&tp.coefficients),
                "residual": tp.residual,
                "residual_log10": tp.residual_log10,
                "degree": tp.degree(),
                "M": tp.m_param,
                "digits": tp.digits,
                "compositum": comp.map(|c| json!({ "polynomial": strs(&c.coefficients), "shift": c.shift })),
            }))?;
        }
        Cmd::Survey {
            family,
            k_start,
            k_end,
            p,
            ell_bound,
            threads,
            out,
            csv,
            checkpoint,
            block_size,
        } => {
            if let Some(n) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()?;
            }
            let mut config = SweepConfig::new(family, k_start, k_end, p);
            config.ell_bound = ell_bound;
            config.block_size = block_size.max(1);
            let runner = SurveyRunner {
                csv,
                checkpoint,
                ..SurveyRunner::new(config)
            };
            let status = runner.run()?;
            let caption = format!("d = {family}, {k_start} <= k <= {k_end}, p = {p}");
            let report = tabulate(p, &caption, status.tally());
            emit(&report.to_text())?;
            if let Some(path) = out {
                std::fs::write(&path, serde_json::to_vec_pretty(&report)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if report.low_confidence > 0 {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
