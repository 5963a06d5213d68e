//! Monte Carlo comparison of the estimators.
//!
//! Every replication draws its own sample from a seed mixed out of
//! (base seed, θ index, n index, replication), fits all methods on it and
//! stores the estimates. Reduction happens afterwards in replication order,
//! so results do not depend on the number of worker threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::UnitTeissier;
use crate::error::{Error, Result};
use crate::estimate::{fit, Method};
use crate::sample::Sample;

pub const DEFAULT_SEED: u64 = 2024;
/// Metric values are rounded to this many decimals before ranking, as in printed tables.
pub const RANK_DECIMALS: i32 = 5;

pub const FULL_THETAS: [f64; 10] = [0.26, 0.35, 0.5, 1.0, 1.25, 1.75, 2.0, 2.5, 3.0, 3.2];
pub const FULL_NS: [usize; 5] = [30, 50, 100, 250, 500];
pub const FULL_REPLICATIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub thetas: Vec<f64>,
    pub ns: Vec<usize>,
    pub replications: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default = "all_methods")]
    pub methods: Vec<Method>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn all_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}

impl StudyConfig {
    /// The full grid: ten θ values, five sample sizes, 1000 replications.
    pub fn full_grid() -> Self {
        Self {
            thetas: FULL_THETAS.to_vec(),
            ns: FULL_NS.to_vec(),
            replications: FULL_REPLICATIONS,
            base_seed: DEFAULT_SEED,
            methods: all_methods(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Invalid("replications must be at least 1".into()));
        }
        if self.thetas.is_empty() || self.ns.is_empty() || self.methods.is_empty() {
            return Err(Error::Invalid(
                "thetas, ns and methods must be non-empty".into(),
            ));
        }
        if let Some(t) = self.thetas.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::Invalid(format!("theta must be positive, got {t}")));
        }
        if let Some(n) = self.ns.iter().find(|&&n| n < 2) {
            return Err(Error::Invalid(format!(
                "sample sizes must be at least 2, got {n}"
            )));
        }
        Ok(())
    }
}

/// Accuracy of one method at one (θ, n) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub theta: f64,
    pub n: usize,
    pub method: Method,
    pub bias: f64,
    pub mse: f64,
    pub mre: f64,
    /// Replications whose fit failed or did not converge; excluded from the averages.
    pub failures: usize,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `r` in cell (θ index, n index).
pub fn replication_seed(base_seed: u64, theta_idx: usize, n_idx: usize, r: usize) -> u64 {
    [theta_idx as u64, n_idx as u64, r as u64]
        .into_iter()
        .fold(splitmix64(base_seed), |h, v| splitmix64(h ^ splitmix64(v)))
}

/// Mean absolute error, mean squared error and relative error over the
/// successful estimates; `None` entries count as failures.
pub fn metrics_from_estimates(theta: f64, estimates: &[Option<f64>]) -> (f64, f64, f64, usize) {
    let ok: Vec<f64> = estimates.iter().filter_map(|e| *e).collect();
    let failures = estimates.len() - ok.len();
    let m = ok.len() as f64;
    let bias = ok.iter().map(|e| (e - theta).abs()).sum::<f64>() / m;
    let mse = ok.iter().map(|e| (e - theta).powi(2)).sum::<f64>() / m;
    (bias, mse, bias / theta, failures)
}

/// The default estimator: θ̂ when the fit converged.
pub fn default_estimator(method: Method, s: &Sample) -> Option<f64> {
    match fit(method, s) {
        Ok(r) if r.converged => Some(r.theta_hat),
        _ => None,
    }
}

pub fn run_study(cfg: &StudyConfig) -> Result<Vec<MetricRow>> {
    run_study_with(cfg, rayon::current_num_threads(), default_estimator)
}

/// Run the study on `workers` threads with a caller-supplied estimator.
pub fn run_study_with<E>(cfg: &StudyConfig, workers: usize, estimator: E) -> Result<Vec<MetricRow>>
where
    E: Fn(Method, &Sample) -> Option<f64> + Sync,
{
    cfg.validate()?;
    let units: Vec<(usize, usize, usize)> = (0..cfg.thetas.len())
        .flat_map(|ti| {
            (0..cfg.ns.len()).flat_map(move |ni| (0..cfg.replications).map(move |r| (ti, ni, r)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?;
    let per_rep: Vec<Vec<Option<f64>>> = pool.install(|| {
        units
            .par_iter()
            .map(|&(ti, ni, r)| {
                let d = UnitTeissier::new(cfg.thetas[ti]).expect("validated theta");
                let seed = replication_seed(cfg.base_seed, ti, ni, r);
                let s = Sample::new(d.sample(cfg.ns[ni], seed)).expect("draws lie in (0, 1)");
                cfg.methods.iter().map(|&m| estimator(m, &s)).collect()
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(cfg.thetas.len() * cfg.ns.len() * cfg.methods.len());
    for (cell, chunk) in per_rep.chunks(cfg.replications).enumerate() {
        let theta = cfg.thetas[cell / cfg.ns.len()];
        let n = cfg.ns[cell % cfg.ns.len()];
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let est: Vec<Option<f64>> = chunk.iter().map(|rep| rep[mi]).collect();
            let (bias, mse, mre, failures) = metrics_from_estimates(theta, &est);
            rows.push(MetricRow {
                theta,
                n,
                method,
                bias,
                mse,
                mre,
                failures,
            });
        }
    }
    Ok(rows)
}

/// Ranks of one row of values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowRanks {
    /// 1 for the smallest value; ties share the average of their positions.
    pub ranks: Vec<f64>,
    /// Indices of non-finite values, which are ranked after every finite one.
    pub non_finite: Vec<usize>,
}

/// Ascending average ranks.
pub fn rank_row(values: &[f64]) -> RowRanks {
    let key = |v: f64| if v.is_finite() { v } else { f64::INFINITY };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| key(values[a]).total_cmp(&key(values[b])));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let v = key(values[order[start]]);
        let mut end = start + 1;
        while end < order.len() && key(values[order[end]]) == v {
            end += 1;
        }
        // positions start+1 ..= end share their mean
        let avg = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    let non_finite = (0..values.len())
        .filter(|&i| !values[i].is_finite())
        .collect();
    RowRanks { ranks, non_finite }
}

fn round_to(v: f64, decimals: i32) -> f64 {
    let scale = 10f64.powi(decimals);
    (v * scale).round() / scale
}

/// Ranks for one (θ, n) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellRanks {
    pub theta: f64,
    pub n: usize,
    pub rank_bias: Vec<f64>,
    pub rank_mse: Vec<f64>,
    pub rank_mre: Vec<f64>,
    pub sum_ranks: Vec<f64>,
    /// ΣRanks re-ranked across methods.
    pub partial: Vec<f64>,
    /// True when some metric was not finite (e.g. every replication failed).
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub methods: Vec<Method>,
    pub cells: Vec<CellRanks>,
    /// Per θ, the partial ranks summed over sample sizes.
    pub theta_sums: Vec<(f64, Vec<f64>)>,
    /// Partial ranks summed over every cell.
    pub total: Vec<f64>,
    /// Rank of `total`, 1 being best.
    pub overall: Vec<f64>,
}

impl RankTable {
    pub fn cell(&self, theta: f64, n: usize) -> Option<&CellRanks> {
        self.cells.iter().find(|c| c.theta == theta && c.n == n)
    }

    pub fn overall_rank(&self, method: Method) -> Option<f64> {
        self.methods
            .iter()
            .position(|&m| m == method)
            .map(|i| self.overall[i])
    }
}

/// Rank one cell from its BIAS, MSE and MRE rows (one entry per method).
pub fn rank_cell(theta: f64, n: usize, bias: &[f64], mse: &[f64], mre: &[f64]) -> CellRanks {
    let ranked = |v: &[f64]| {
        let rounded: Vec<f64> = v.iter().map(|&x| round_to(x, RANK_DECIMALS)).collect();
        rank_row(&rounded)
    };
    let (rb, rm, rr) = (ranked(bias), ranked(mse), ranked(mre));
    let flagged =
        !(rb.non_finite.is_empty() && rm.non_finite.is_empty() && rr.non_finite.is_empty());
    let sum_ranks: Vec<f64> = (0..bias.len())
        .map(|i| rb.ranks[i] + rm.ranks[i] + rr.ranks[i])
        .collect();
    let partial = rank_row(&sum_ranks).ranks;
    CellRanks {
        theta,
        n,
        rank_bias: rb.ranks,
        rank_mse: rm.ranks,
        rank_mre: rr.ranks,
        sum_ranks,
        partial,
        flagged,
    }
}

/// Rank every (θ, n) cell and aggregate into per-θ and overall rankings.
pub fn aggregate_ranks(rows: &[MetricRow]) -> Result<RankTable> {
    let mut thetas: Vec<f64> = Vec::new();
    let mut ns: Vec<usize> = Vec::new();
    let mut methods: Vec<Method> = Vec::new();
    for r in rows {
        if !thetas.contains(&r.theta) {
            thetas.push(r.theta);
        }
        if !ns.contains(&r.n) {
            ns.push(r.n);
        }
        if !methods.contains(&r.method) {
            methods.push(r.method);
        }
    }
    if rows.is_empty() {
        return Err(Error::IncompleteGrid("no rows".into()));
    }
    let index: BTreeMap<(u64, usize, Method), &MetricRow> = rows
        .iter()
        .map(|r| ((r.theta.to_bits(), r.n, r.method), r))
        .collect();

    let mut missing = Vec::new();
    for &t in &thetas {
        for &n in &ns {
            for &m in &methods {
                if !index.contains_key(&(t.to_bits(), n, m)) {
                    missing.push(format!("theta={t} n={n} method={m}"));
                }
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::IncompleteGrid(missing.join(", ")));
    }

    let k = methods.len();
    let mut cells = Vec::with_capacity(thetas.len() * ns.len());
    let mut theta_sums = Vec::with_capacity(thetas.len());
    let mut total = vec![0.0; k];
    for &t in &thetas {
        let mut per_theta = vec![0.0; k];
        for &n in &ns {
            let get = |f: fn(&MetricRow) -> f64| -> Vec<f64> {
                methods
                    .iter()
                    .map(|&m| f(index[&(t.to_bits(), n, m)]))
                    .collect()
            };
            let cell = rank_cell(t, n, &get(|r| r.bias), &get(|r| r.mse), &get(|r| r.mre));
            for i in 0..k {
                per_theta[i] += cell.partial[i];
                total[i] += cell.partial[i];
            }
            cells.push(cell);
        }
        theta_sums.push((t, per_theta));
    }
    let overall = rank_row(&total).ranks;
    Ok(RankTable {
        methods,
        cells,
        theta_sums,
        total,
        overall,
    })
}

/// CSV with one row per (θ, n, method), full precision.
pub fn write_csv<W: io::Write>(rows: &[MetricRow], table: &RankTable, out: W) -> Result<()> {
    let io_err = |e: csv::Error| Error::Invalid(format!("cannot write csv: {e}"));
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "theta",
        "n",
        "method",
        "bias",
        "mse",
        "mre",
        "rank_bias",
        "rank_mse",
        "rank_mre",
        "sum_ranks",
        "failures",
    ])
    .map_err(io_err)?;
    for r in rows {
        let cell = table
            .cell(r.theta, r.n)
            .expect("table built from these rows");
        let i = table
            .methods
            .iter()
            .position(|&m| m == r.method)
            .expect("method present");
        w.write_record([
            r.theta.to_string(),
            r.n.to_string(),
            r.method.to_string(),
            r.bias.to_string(),
            r.mse.to_string(),
            r.mre.to_string(),
            cell.rank_bias[i].to_string(),
            cell.rank_mse[i].to_string(),
            cell.rank_mre[i].to_string(),
            cell.sum_ranks[i].to_string(),
            r.failures.to_string(),
        ])
        .map_err(io_err)?;
    }
    w.flush()
        .map_err(|e| Error::Invalid(format!("cannot write csv: {e}")))?;
    Ok(())
}

/// Markdown tables: one per θ with BIAS/MSE/MRE/ΣRanks rows per n and ranks
/// in braces, followed by the partial and overall rankings.
pub fn render_markdown(rows: &[MetricRow], table: &RankTable) -> String {
    let mut s = String::new();
    let header: Vec<String> = table.methods.iter().map(|m| m.to_string()).collect();
    let sep = "|---".repeat(header.len() + 2) + "|";
    let value = |t: f64, n: usize, m: Method| {
        rows.iter()
            .find(|r| r.theta == t && r.n == n && r.method == m)
            .expect("complete grid")
    };
    for (t, _) in &table.theta_sums {
        let _ = writeln!(s, "### θ = {t}\n");
        let _ = writeln!(s, "| n | Est. | {} |", header.join(" | "));
        let _ = writeln!(s, "{sep}");
        for cell in table.cells.iter().filter(|c| c.theta == *t) {
            type Line<'a> = (&'a str, fn(&MetricRow) -> f64, &'a Vec<f64>);
            let lines: [Line; 3] = [
                ("BIAS", |r| r.bias, &cell.rank_bias),
                ("MSE", |r| r.mse, &cell.rank_mse),
                ("MRE", |r| r.mre, &cell.rank_mre),
            ];
            for (j, (name, get, ranks)) in lines.iter().enumerate() {
                let n_col = if j == 0 {
                    cell.n.to_string()
                } else {
                    String::new()
                };
                let entries: Vec<String> = table
                    .methods
                    .iter()
                    .zip(ranks.iter())
                    .map(|(&m, rk)| format!("{:.5} {{{rk}}}", get(value(*t, cell.n, m))))
                    .collect();
                let _ = writeln!(s, "| {n_col} | {name} | {} |", entries.join(" | "));
            }
            let entries: Vec<String> = cell
                .sum_ranks
                .iter()
                .zip(&cell.partial)
                .map(|(sr, p)| format!("{sr} {{{p}}}"))
                .collect();
            let _ = writeln!(s, "|  | ΣRanks | {} |", entries.join(" | "));
        }
        s.push('\n');
    }
    let _ = writeln!(s, "### Partial and overall rankings\n");
    let _ = writeln!(s, "| θ | n | {} |", header.join(" | "));
    let _ = writeln!(s, "{sep}");
    for cell in &table.cells {
        let p: Vec<String> = cell.partial.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "| {} | {} | {} |", cell.theta, cell.n, p.join(" | "));
    }
    let tot: Vec<String> = table.total.iter().map(|v| v.to_string()).collect();
    let ovr: Vec<String> = table.overall.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(s, "| ΣRanks |  | {} |", tot.join(" | "));
    let _ = writeln!(s, "| Overall rank |  | {} |", ovr.join(" | "));
    s
}
