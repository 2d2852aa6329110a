//! Command-line driver: every experiment and exact computation of the
//! toolkit, emitting CSV/JSON tables and optional SVG charts.

use catalan_perc::error::Error;
use catalan_perc::harness::{
    lower_bound_mc_rows, run, CouplingKind, ExperimentKind, ExperimentSpec, ResultRow, RunResult,
};
use catalan_perc::oriented::CrossDirection;
use catalan_perc::par::Parallelism;
use catalan_perc::poly::rational_to_f64;
use catalan_perc::report::{csv_string, json_string, svg_chart};
use catalan_perc::series::{
    lower_bound_pm, McLowerBoundOptions, ThetaTable,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num::rational::BigRational;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "catalan-perc", version, about = "Catalan percolation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Clone)]
struct Common {
    /// Base seed for all randomness.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Replicates (default depends on the subcommand).
    #[arg(long, global = true)]
    reps: Option<u64>,
    /// Output file (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format for experiment tables.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Also write a one-polyline SVG chart of the sweep.
    #[arg(long, global = true)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Direction {
    Up,
    Right,
    Left,
}

impl From<Direction> for CrossDirection {
    fn from(d: Direction) -> Self {
        match d {
            Direction::Up => CrossDirection::Up,
            Direction::Right => CrossDirection::Right,
            Direction::Left => CrossDirection::Left,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Shape {
    /// long side (m - 4*ell, m)
    Minus4,
    /// long side (m + 4*ell, m)
    Plus4,
    /// long side (m, m)
    Diagonal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CouplingArg {
    Op,
    Enhanced,
}

#[derive(Subcommand)]
enum Command {
    /// Conditional occupation probabilities phi_n over a p-grid.
    PhiCurve {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        p_min: f64,
        #[arg(long, default_value_t = 1.0)]
        p_max: f64,
        #[arg(long, default_value_t = 0.05)]
        p_step: f64,
    },
    /// Mean conditioned threshold p-tilde_c(n).
    PcEstimate {
        #[arg(long, default_value_t = 2000)]
        n: usize,
    },
    /// Truncated thresholds p-tilde_c^+(L, n) over an L sweep.
    TruncatedPc {
        #[arg(long, default_value_t = 2000)]
        n: usize,
        /// Comma-separated truncation lengths.
        #[arg(long, default_value = "1,2,4,8,16,32", value_delimiter = ',')]
        l_values: Vec<usize>,
    },
    /// Exact theta_n as a polynomial (or its first coefficients).
    ThetaExact {
        #[arg(long)]
        n: usize,
        /// Print power-series coefficients p^0..p^kmax instead.
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Certified enclosure of the exact lower bound p_{n0}.
    LowerBound {
        #[arg(long)]
        n0: usize,
        #[arg(long, default_value_t = 1e-6)]
        precision: f64,
    },
    /// Monte Carlo lower-bound sweep over cutoffs (Fig. 6 pipeline).
    LowerBoundMc {
        #[arg(long, default_value_t = 40)]
        n0_max: usize,
        #[arg(long, default_value_t = 4000)]
        n_terms: usize,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        /// Optional theta-hat table (CSV: n,p,theta_hat[,stderr]).
        #[arg(long)]
        theta_csv: Option<PathBuf>,
    },
    /// Edge speeds alpha and beta of the enhanced lattice.
    EdgeSpeed {
        #[arg(long, default_value_t = 0.7055)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        /// Half the level count: speeds are read at level 2n.
        #[arg(long, default_value_t = 1000)]
        n: u32,
    },
    /// Crossing probability of a parallelogram tube.
    Crossing {
        #[arg(long, default_value_t = 0.7055)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        #[arg(long, default_value_t = 200)]
        m: i64,
        /// Tube width; default ceil(m^0.45).
        #[arg(long)]
        ell: Option<i64>,
        #[arg(long, value_enum, default_value_t = Shape::Minus4)]
        shape: Shape,
        #[arg(long, value_enum, default_value_t = Direction::Up)]
        direction: Direction,
    },
    /// Survival probability of the geometric-defects model.
    Defects {
        #[arg(long, default_value_t = 0.95)]
        p: f64,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 2000)]
        n_max: u32,
        /// Window width; default n_max + 1 (never overflows).
        #[arg(long)]
        width: Option<usize>,
    },
    /// Count violations of a coupling implication (always expect zero).
    CouplingCheck {
        #[arg(long, value_enum)]
        kind: CouplingArg,
        #[arg(long, default_value_t = 50)]
        n: usize,
        #[arg(long, default_value_t = 0.72)]
        p: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_resource() {
                ExitCode::from(3)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn parallelism(threads: usize) -> Parallelism {
    match threads {
        0 => Parallelism::Auto,
        1 => Parallelism::Sequential,
        k => Parallelism::Threads(k),
    }
}

fn emit(common: &Common, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_result(common: &Common, spec: &ExperimentSpec, result: &RunResult) -> Result<ExitCode, Error> {
    let text = match common.format {
        Format::Csv => csv_string(result, spec),
        Format::Json => json_string(result, spec),
    };
    emit(common, &text)?;
    if let Some(svg_path) = &common.svg {
        let points = sweep_points(&result.rows);
        std::fs::write(svg_path, svg_chart(&points.1, &points.0, "estimate"))?;
    }
    if result.complete {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("warning: resource bound hit; result is partial");
        Ok(ExitCode::from(3))
    }
}

/// Pick the sweep axis for charting: p, then L, then n0, then row index.
fn sweep_points(rows: &[ResultRow]) -> (String, Vec<(f64, f64, f64)>) {
    let axis = |r: &ResultRow| -> Option<(String, f64)> {
        if let Some(p) = r.p {
            Some(("p".into(), p))
        } else {
            r.l
                .map(|l| ("L".into(), l as f64))
                .or_else(|| r.n0.map(|n0| ("n0".into(), n0 as f64)))
        }
    };
    let mut label = "index".to_string();
    let mut pts = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        let (lab, x) = axis(r).unwrap_or(("index".into(), i as f64));
        label = lab;
        pts.push((x, r.estimate, r.stderr.unwrap_or(0.0)));
    }
    (label, pts)
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    let common = cli.common.clone();
    let par = parallelism(common.threads);
    let spec = |kind: ExperimentKind, default_reps: u64| ExperimentSpec {
        kind,
        seed: common.seed,
        reps: common.reps.unwrap_or(default_reps),
        parallelism: par,
    };
    match cli.command {
        Command::PhiCurve {
            n,
            p_min,
            p_max,
            p_step,
        } => {
            if p_step <= 0.0 {
                return Err(Error::Parse("p-step must be positive".into()));
            }
            let mut p_grid = Vec::new();
            let mut p = p_min;
            while p <= p_max + 1e-12 {
                p_grid.push(p.min(1.0));
                p += p_step;
            }
            let s = spec(ExperimentKind::PhiCurve { n, p_grid }, 10_000);
            let r = run(&s)?;
            emit_result(&common, &s, &r)
        }
        Command::PcEstimate { n } => {
            let s = spec(ExperimentKind::PcTilde { n }, 2000);
            let r = run(&s)?;
            emit_result(&common, &s, &r)
        }
        Command::TruncatedPc { n, l_values } => {
            let s = spec(ExperimentKind::TruncatedPc { n, l_values }, 2000);
            let r = run(&s)?;
            emit_result(&common, &s, &r)
        }
        Command::ThetaExact { n, kmax } => {
            let text = match kmax {
                None => {
                    let poly = catalan_perc::catalan::exact_theta_poly(n)?;
                    format!("{}\n", poly.render("p"))
                }
                Some(k) => {
                    let coeffs = catalan_perc::catalan::exact_theta_coeffs(n, k)?;
                    let rendered: Vec<String> =
                        coeffs.iter().map(|c| c.to_string()).collect();
                    format!("{}\n", rendered.join(","))
                }
            };
            emit(&common, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::LowerBound { n0, precision } => {
            if precision <= 0.0 {
                return Err(Error::Parse("precision must be positive".into()));
            }
            let prec = BigRational::from_float(precision)
                .ok_or_else(|| Error::Parse("bad precision".into()))?;
            let b = lower_bound_pm(n0, &prec)?;
            let text = format!(
                "p_{n0} in [{:.10}, {:.10}]  (exact: [{}, {}])\n",
                rational_to_f64(&b.lo),
                rational_to_f64(&b.hi),
                b.lo,
                b.hi
            );
            emit(&common, &text)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::LowerBoundMc {
            n0_max,
            n_terms,
            tol,
            theta_csv,
        } => {
            let reps = common.reps.unwrap_or(100_000);
            match theta_csv {
                None => {
                    let s = spec(
                        ExperimentKind::LowerBoundMc { n0_max, n_terms, tol },
                        100_000,
                    );
                    let r = run(&s)?;
                    emit_result(&common, &s, &r)
                }
                Some(path) => {
                    let text = std::fs::read_to_string(&path)?;
                    let table = theta_table_from_csv(&text, n0_max)?;
                    let opts = McLowerBoundOptions {
                        n_terms,
                        tol,
                        ..Default::default()
                    };
                    let s = spec(
                        ExperimentKind::LowerBoundMc { n0_max, n_terms, tol },
                        reps,
                    );
                    let rows = catalan_perc::par::run_with(par, || {
                        lower_bound_mc_rows(&table, n0_max, &opts, reps, common.seed)
                    })?;
                    let r = RunResult {
                        rows,
                        complete: true,
                        wall_time_s: 0.0,
                        spec_digest: s.digest(),
                        seed: s.seed,
                    };
                    emit_result(&common, &s, &r)
                }
            }
        }
        Command::EdgeSpeed { p, q, n } => {
            let s = spec(ExperimentKind::EdgeSpeed { p, q, n }, 200);
            let r = run(&s)?;
            emit_result(&common, &s, &r)
        }
        Command::Crossing {
            p,
            q,
            m,
            ell,
            shape,
            direction,
        } => {
            let ell = ell.unwrap_or_else(|| (m as f64).powf(0.45).ceil() as i64);
            let vx = match shape {
                Shape::Minus4 => m - 4 * ell,
                Shape::Plus4 => m + 4 * ell,
                Shape::Diagonal => m,
            };
            let kind = ExperimentKind::Crossing {
                p,
                q,
                u: ((ell, 1), (0, 1)),
                v: ((vx, 1), (m, 1)),
                direction: direction.into(),
                m_report: Some(m as u64),
                l_report: Some(ell as u64),
            };
            let s = spec(kind, 2000);
            let r = run(&s)?;
            emit_result(&common, &s, &r)
        }
        Command::Defects {
            p,
            delta,
            n_max,
            width,
        } => {
            let width = width.unwrap_or(n_max as usize + 1);
            let s = spec(
                ExperimentKind::Defects {
                    p,
                    delta,
                    width,
                    n_max,
                },
                200,
            );
            let r = run(&s)?;
            emit_result(&common, &s, &r)
        }
        Command::CouplingCheck { kind, n, p } => {
            let kind = match kind {
                CouplingArg::Op => CouplingKind::OpImplies,
                CouplingArg::Enhanced => CouplingKind::EnhancedImplies,
            };
            let s = spec(ExperimentKind::CouplingCheck { kind, n, p }, 10_000);
            let r = run(&s)?;
            emit_result(&common, &s, &r)
        }
    }
}

/// Parse a theta-hat table: CSV rows n,p,theta_hat[,stderr], '#' comments
/// and a non-numeric header line allowed.
fn theta_table_from_csv(text: &str, n_max: usize) -> Result<ThetaTable, Error> {
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 3 {
            return Err(Error::Parse(format!("line {}: need n,p,theta_hat", lineno + 1)));
        }
        let parsed: Option<(usize, f64, f64)> = (|| {
            Some((
                fields[0].parse().ok()?,
                fields[1].parse().ok()?,
                fields[2].parse().ok()?,
            ))
        })();
        match parsed {
            Some(row) => rows.push(row),
            // tolerate one header line
            None if lineno == 0 => continue,
            None => {
                return Err(Error::Parse(format!("line {}: bad number", lineno + 1)));
            }
        }
    }
    ThetaTable::from_rows(n_max, &rows)
}
