//! Seeded, reproducible experiment runner. Every replicate draws its own
//! substream keyed by (experiment id, point index, replicate index), so
//! results are independent of scheduling and replay byte-identically.

use crate::catalan::{sample_field, threshold_table, TruncationRule};
use crate::couplings;
use crate::error::{Error, Result};
use crate::oriented::{
    crossing_probability, defects_survival, edge_speed_estimate, CrossDirection, Parallelogram,
    Rat,
};
use crate::par::{self, Parallelism};
use crate::rng::mix64;
use crate::series::{self, McLowerBoundOptions, ThetaProvider};
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CouplingKind {
    OpImplies,
    EnhancedImplies,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentKind {
    /// Conditional occupation probability curve for one n over a p-grid.
    PhiCurve { n: usize, p_grid: Vec<f64> },
    /// Mean conditioned threshold p-tilde_c(n).
    PcTilde { n: usize },
    /// Truncated thresholds p-tilde_c^+(L, n) over an L-sweep, plus the full
    /// rule, on shared fields.
    TruncatedPc { n: usize, l_values: Vec<usize> },
    /// Fig. 6 pipeline: Monte Carlo theta-hat feeding the radius classifier,
    /// swept over cutoffs 1..=n0_max. `reps` is the per-n theta sample count.
    LowerBoundMc {
        n0_max: usize,
        n_terms: usize,
        tol: f64,
    },
    /// Edge speeds alpha, beta at (p, q) from 2n levels.
    EdgeSpeed { p: f64, q: f64, n: u32 },
    /// Crossing probability of R(u, v) from `base`, in a direction.
    Crossing {
        p: f64,
        q: f64,
        u: (Rat, Rat),
        v: (Rat, Rat),
        direction: CrossDirection,
        m_report: Option<u64>,
        l_report: Option<u64>,
    },
    /// Geometric-defects survival probability.
    Defects {
        p: f64,
        delta: f64,
        width: usize,
        n_max: u32,
    },
    /// Count violations of a coupling implication.
    CouplingCheck {
        kind: CouplingKind,
        n: usize,
        p: f64,
    },
}

impl ExperimentKind {
    fn id(&self) -> u64 {
        match self {
            ExperimentKind::PhiCurve { .. } => 1,
            ExperimentKind::PcTilde { .. } => 2,
            ExperimentKind::TruncatedPc { .. } => 3,
            ExperimentKind::LowerBoundMc { .. } => 4,
            ExperimentKind::EdgeSpeed { .. } => 5,
            ExperimentKind::Crossing { .. } => 6,
            ExperimentKind::Defects { .. } => 7,
            ExperimentKind::CouplingCheck { .. } => 8,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::PhiCurve { .. } => "phi_curve",
            ExperimentKind::PcTilde { .. } => "pc_tilde",
            ExperimentKind::TruncatedPc { .. } => "truncated_pc",
            ExperimentKind::LowerBoundMc { .. } => "lower_bound_mc",
            ExperimentKind::EdgeSpeed { .. } => "edge_speed",
            ExperimentKind::Crossing { .. } => "crossing",
            ExperimentKind::Defects { .. } => "defects",
            ExperimentKind::CouplingCheck { .. } => "coupling_check",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub seed: u64,
    pub reps: u64,
    pub parallelism: Parallelism,
}

impl ExperimentSpec {
    /// Canonical one-line echo of the resolved configuration.
    pub fn config_line(&self) -> String {
        let mut s = format!("kind={}", self.kind.name());
        match &self.kind {
            ExperimentKind::PhiCurve { n, p_grid } => {
                let _ = write!(s, " n={n} p_grid=");
                for (i, p) in p_grid.iter().enumerate() {
                    let _ = write!(s, "{}{p}", if i == 0 { "" } else { "," });
                }
            }
            ExperimentKind::PcTilde { n } => {
                let _ = write!(s, " n={n}");
            }
            ExperimentKind::TruncatedPc { n, l_values } => {
                let _ = write!(s, " n={n} l_values=");
                for (i, l) in l_values.iter().enumerate() {
                    let _ = write!(s, "{}{l}", if i == 0 { "" } else { "," });
                }
            }
            ExperimentKind::LowerBoundMc {
                n0_max,
                n_terms,
                tol,
            } => {
                let _ = write!(s, " n0_max={n0_max} n_terms={n_terms} tol={tol}");
            }
            ExperimentKind::EdgeSpeed { p, q, n } => {
                let _ = write!(s, " p={p} q={q} n={n}");
            }
            ExperimentKind::Crossing {
                p,
                q,
                u,
                v,
                direction,
                ..
            } => {
                let _ = write!(
                    s,
                    " p={p} q={q} u={}/{},{}/{} v={}/{},{}/{} direction={direction:?}",
                    u.0 .0, u.0 .1, u.1 .0, u.1 .1, v.0 .0, v.0 .1, v.1 .0, v.1 .1
                );
            }
            ExperimentKind::Defects {
                p,
                delta,
                width,
                n_max,
            } => {
                let _ = write!(s, " p={p} delta={delta} width={width} n_max={n_max}");
            }
            ExperimentKind::CouplingCheck { kind, n, p } => {
                let _ = write!(s, " coupling={kind:?} n={n} p={p}");
            }
        }
        let _ = write!(s, " reps={} seed={}", self.reps, self.seed);
        s
    }

    pub fn digest(&self) -> u64 {
        fnv1a64(self.config_line().as_bytes())
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// One output row; the fixed CSV schema is
/// experiment,n,L,p,q,n0,estimate,stderr,reps,truncated,seed.
#[derive(Clone, Debug)]
pub struct ResultRow {
    pub experiment: String,
    pub n: Option<u64>,
    pub l: Option<u64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub n0: Option<u64>,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub reps: u64,
    pub truncated: u64,
    pub seed: u64,
}

impl ResultRow {
    fn new(experiment: impl Into<String>, estimate: f64, reps: u64, seed: u64) -> Self {
        ResultRow {
            experiment: experiment.into(),
            n: None,
            l: None,
            p: None,
            q: None,
            n0: None,
            estimate,
            stderr: None,
            reps,
            truncated: 0,
            seed,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub rows: Vec<ResultRow>,
    /// False when a resource bound stopped the experiment early.
    pub complete: bool,
    pub wall_time_s: f64,
    pub spec_digest: u64,
    pub seed: u64,
}

fn sub_seed(seed: u64, exp_id: u64, point: u64, rep: u64) -> u64 {
    mix64(seed ^ mix64(exp_id ^ mix64(point ^ mix64(rep))))
}

fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() < 2 {
        0.0
    } else {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    };
    (mean, (var / n).sqrt())
}

fn binomial_stderr(p_hat: f64, reps: u64) -> f64 {
    (p_hat * (1.0 - p_hat) / reps as f64).sqrt()
}

/// Run the experiment. Resource-bound aborts come back as a partial result
/// with `complete = false` rather than an error.
pub fn run(spec: &ExperimentSpec) -> Result<RunResult> {
    let started = Instant::now();
    let body = || dispatch(spec);
    let outcome = par::run_with(spec.parallelism, body);
    let (rows, complete) = match outcome {
        Ok(rows) => (rows, true),
        Err(e) if e.is_resource() => (Vec::new(), false),
        Err(e) => return Err(e),
    };
    Ok(RunResult {
        rows,
        complete,
        wall_time_s: started.elapsed().as_secs_f64(),
        spec_digest: spec.digest(),
        seed: spec.seed,
    })
}

fn dispatch(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let seed = spec.seed;
    let reps = spec.reps;
    if reps == 0 {
        return Err(Error::Infeasible("reps must be positive".into()));
    }
    let exp = spec.kind.id();
    match &spec.kind {
        ExperimentKind::PhiCurve { n, p_grid } => {
            let n = *n;
            let tops = conditioned_tops(n, TruncationRule::Full, reps, seed, exp, 0)?;
            let mut rows = Vec::new();
            for &p in p_grid {
                let phi = tops.iter().filter(|&&t| t <= p).count() as f64 / reps as f64;
                let mut row = ResultRow::new("phi_curve", phi, reps, seed);
                row.n = Some(n as u64);
                row.p = Some(p);
                row.stderr = Some(binomial_stderr(phi, reps));
                rows.push(row);
            }
            Ok(rows)
        }
        ExperimentKind::PcTilde { n } => {
            let tops = conditioned_tops(*n, TruncationRule::Full, reps, seed, exp, 0)?;
            let (mean, se) = mean_stderr(&tops);
            let mut row = ResultRow::new("pc_tilde", mean, reps, seed);
            row.n = Some(*n as u64);
            row.stderr = Some(se);
            Ok(vec![row])
        }
        ExperimentKind::TruncatedPc { n, l_values } => {
            let paths = truncated_pc_paths(*n, l_values, reps, seed)?;
            let mut rows = Vec::new();
            for (k, &l) in l_values.iter().enumerate() {
                let vals: Vec<f64> = paths.iter().map(|(_, ls)| ls[k]).collect();
                let (mean, se) = mean_stderr(&vals);
                let mut row = ResultRow::new("truncated_pc", mean, reps, seed);
                row.n = Some(*n as u64);
                row.l = Some(l as u64);
                row.stderr = Some(se);
                rows.push(row);
            }
            let fulls: Vec<f64> = paths.iter().map(|(f, _)| *f).collect();
            let (mean, se) = mean_stderr(&fulls);
            let mut row = ResultRow::new("truncated_pc.full", mean, reps, seed);
            row.n = Some(*n as u64);
            row.stderr = Some(se);
            rows.push(row);
            Ok(rows)
        }
        ExperimentKind::LowerBoundMc {
            n0_max,
            n_terms,
            tol,
        } => {
            let provider = SampledThetaProvider::sample(*n0_max, reps, seed, exp)?;
            let opts = McLowerBoundOptions {
                n_terms: *n_terms,
                tol: *tol,
                ..Default::default()
            };
            lower_bound_mc_rows(&provider, *n0_max, &opts, reps, seed)
        }
        ExperimentKind::EdgeSpeed { p, q, n } => {
            let est = edge_speed_estimate(*p, *q, *n, reps, sub_seed(seed, exp, 0, 0))?;
            let mut rows = Vec::new();
            for (name, value, se) in [
                ("edge_speed.alpha", est.alpha_hat, Some(est.alpha_stderr)),
                ("edge_speed.beta", est.beta_hat, Some(est.beta_stderr)),
                (
                    "edge_speed.alpha_subadditive",
                    est.alpha_subadditive,
                    None,
                ),
                (
                    "edge_speed.beta_superadditive",
                    est.beta_superadditive,
                    None,
                ),
            ] {
                let mut row = ResultRow::new(name, value, est.reps_used, seed);
                row.n = Some(*n as u64);
                row.p = Some(*p);
                row.q = Some(*q);
                row.stderr = se;
                row.truncated = est.excluded;
                rows.push(row);
            }
            Ok(rows)
        }
        ExperimentKind::Crossing {
            p,
            q,
            u,
            v,
            direction,
            m_report,
            l_report,
        } => {
            let r = Parallelogram::from_rational((0, 0), *u, *v)?;
            let (est, se) =
                crossing_probability(&r, *direction, *p, *q, reps, sub_seed(seed, exp, 0, 0))?;
            let mut row = ResultRow::new("crossing", est, reps, seed);
            row.n = *m_report;
            row.l = *l_report;
            row.p = Some(*p);
            row.q = Some(*q);
            row.stderr = Some(se);
            Ok(vec![row])
        }
        ExperimentKind::Defects {
            p,
            delta,
            width,
            n_max,
        } => {
            let d = defects_survival(*p, *delta, *width, *n_max, reps, sub_seed(seed, exp, 0, 0))?;
            // the q column carries delta for this experiment (documented)
            let mut row = ResultRow::new("defects", d.estimate, reps, seed);
            row.n = Some(*n_max as u64);
            row.l = Some(*width as u64);
            row.p = Some(*p);
            row.q = Some(*delta);
            row.stderr = Some(d.stderr);
            row.truncated = d.overflowed;
            Ok(vec![row])
        }
        ExperimentKind::CouplingCheck { kind, n, p } => {
            let outcomes: Vec<Result<couplings::CouplingOutcome>> =
                par::map_indexed(reps, |rep| {
                    let s = sub_seed(seed, exp, 0, rep);
                    match kind {
                        CouplingKind::OpImplies => couplings::op_implies_catalan(*n, *p, s),
                        CouplingKind::EnhancedImplies => {
                            couplings::enhanced_implies_catalan(*n, *p, s)
                        }
                    }
                });
            let mut violations = 0u64;
            let mut premises = 0u64;
            for o in outcomes {
                let o = o?;
                violations += o.violated() as u64;
                premises += o.premise as u64;
            }
            let mut rows = Vec::new();
            let mut row = ResultRow::new("coupling_check.violations", violations as f64, reps, seed);
            row.n = Some(*n as u64);
            row.p = Some(*p);
            rows.push(row);
            let rate = premises as f64 / reps as f64;
            let mut row = ResultRow::new("coupling_check.premise_rate", rate, reps, seed);
            row.n = Some(*n as u64);
            row.p = Some(*p);
            row.stderr = Some(binomial_stderr(rate, reps));
            rows.push(row);
            Ok(rows)
        }
    }
}

/// Conditioned thresholds t(0, n) over independent fields; the whole phi
/// curve of one n falls out of this sample via the monotone coupling.
fn conditioned_tops(
    n: usize,
    rule: TruncationRule,
    reps: u64,
    seed: u64,
    exp: u64,
    point: u64,
) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(Error::InvalidWindow { n, min: 2 });
    }
    let tops: Vec<Result<f64>> = par::map_indexed(reps, |rep| {
        let field = sample_field(n, sub_seed(seed, exp, point, rep))?;
        Ok(threshold_table(&field, rule, true).top())
    });
    tops.into_iter().collect()
}

/// Per-replicate (full, for-each-L) conditioned thresholds on shared fields;
/// the pathwise ordering p-tilde_c(n) <= p-tilde_c^+(L, n) is testable from
/// the raw pairs.
pub fn truncated_pc_paths(
    n: usize,
    l_values: &[usize],
    reps: u64,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    if n < 2 {
        return Err(Error::InvalidWindow { n, min: 2 });
    }
    if l_values.iter().any(|&l| l == 0) {
        return Err(Error::Infeasible("truncation lengths must be positive".into()));
    }
    let exp = 3u64;
    let ls = l_values.to_vec();
    let paths: Vec<Result<(f64, Vec<f64>)>> = par::map_indexed(reps, |rep| {
        let field = sample_field(n, sub_seed(seed, exp, 0, rep))?;
        let full = threshold_table(&field, TruncationRule::Full, true).top();
        let per_l = ls
            .iter()
            .map(|&l| threshold_table(&field, TruncationRule::Truncated(l), true).top())
            .collect();
        Ok((full, per_l))
    });
    paths.into_iter().collect()
}

/// theta-hat provider built from sampled conditioned thresholds:
/// theta_n(p) = p * (empirical CDF of the thresholds at p), exact in p.
pub struct SampledThetaProvider {
    sorted: Vec<Vec<f64>>, // index n; n = 0, 1 unused
}

impl SampledThetaProvider {
    pub fn sample(n_max: usize, reps_per_n: u64, seed: u64, exp: u64) -> Result<Self> {
        let mut sorted = vec![Vec::new(); 2.max(n_max + 1)];
        for n in 2..=n_max {
            let mut tops =
                conditioned_tops(n, TruncationRule::Full, reps_per_n, seed, exp, n as u64)?;
            tops.sort_by(f64::total_cmp);
            sorted[n] = tops;
        }
        Ok(SampledThetaProvider { sorted })
    }
}

impl ThetaProvider for SampledThetaProvider {
    fn max_n(&self) -> usize {
        self.sorted.len() - 1
    }

    fn theta(&self, n: usize, p: f64) -> f64 {
        if n == 1 {
            return 1.0;
        }
        let tops = &self.sorted[n];
        let le = tops.partition_point(|&t| t <= p);
        p * le as f64 / tops.len() as f64
    }
}

/// Sweep the Monte Carlo lower bound over cutoffs, one row per n0.
pub fn lower_bound_mc_rows(
    provider: &(dyn ThetaProvider + Sync),
    n0_max: usize,
    opts: &McLowerBoundOptions,
    reps: u64,
    seed: u64,
) -> Result<Vec<ResultRow>> {
    let bounds: Vec<Result<series::McLowerBound>> = par::map_indexed(n0_max as u64, |i| {
        series::lower_bound_mc(provider, i as usize + 1, opts)
    });
    let mut rows = Vec::new();
    for b in bounds {
        let b = b?;
        let mut row = ResultRow::new("lower_bound_mc", b.mid(), reps, seed);
        row.n0 = Some(b.n0 as u64);
        row.stderr = Some(b.half_width());
        row.truncated = (!b.consistent) as u64;
        rows.push(row);
    }
    Ok(rows)
}
