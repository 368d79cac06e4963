//! Seeded Monte Carlo sweeps, empirical threshold location, and model
//! comparison.
//!
//! Every trial derives its stream from `(master_seed, global trial counter)`,
//! so records depend only on the configuration, never on worker count or
//! schedule, and identical configs produce bit-identical CSV files.

use std::io::{BufRead, Write};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cores::peel_kcore;
use crate::error::{Error, Result};
use crate::hypergraph::MultiHypergraph;
use crate::numerics::giant_fraction;
use crate::rng::{SeedSpec, BOOTSTRAP_STREAM_INDEX};
use crate::sampler::{lambda_to_p, sample_binomial, sample_poc};
use crate::sat::{pure_literal_eliminate, sample_ksat};
use crate::stats::{mean_ci, percentile_interval, resample_into, total_variation, MeanCi};

/// Which generative model a sweep exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepModel {
    Poc,
    Binomial,
    Sat,
}

impl std::fmt::Display for SweepModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SweepModel::Poc => write!(f, "poc"),
            SweepModel::Binomial => write!(f, "binomial"),
            SweepModel::Sat => write!(f, "sat"),
        }
    }
}

impl std::str::FromStr for SweepModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poc" => Ok(SweepModel::Poc),
            "binomial" => Ok(SweepModel::Binomial),
            "sat" => Ok(SweepModel::Sat),
            other => Err(Error::invalid(format!("unknown model `{other}`"))),
        }
    }
}

/// One sweep: a parameter grid, trials per point, and a master seed.
///
/// Hypergraph models read `lambda_grid`; the SAT model reads `density_grid`
/// (clauses per variable, with `d` ignored and `k` the clause width).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub model: SweepModel,
    pub n: usize,
    #[serde(default = "default_d")]
    pub d: usize,
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_grid: Option<Vec<f64>>,
    pub trials_per_point: usize,
    pub master_seed: u64,
    /// CSV destination; `None` means the caller handles output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn default_d() -> usize {
    2
}

impl SweepConfig {
    /// The active grid for the configured model.
    pub fn grid(&self) -> Result<&[f64]> {
        let (grid, name) = match self.model {
            SweepModel::Sat => (&self.density_grid, "density_grid"),
            _ => (&self.lambda_grid, "lambda_grid"),
        };
        grid.as_deref()
            .ok_or_else(|| Error::invalid(format!("model {} needs {name}", self.model)))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("n must be >= 1"));
        }
        if self.trials_per_point == 0 {
            return Err(Error::invalid("trials_per_point must be >= 1"));
        }
        let grid = self.grid()?;
        if grid.is_empty() {
            return Err(Error::invalid("parameter grid is empty"));
        }
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("parameter grid must be strictly increasing"));
        }
        match self.model {
            SweepModel::Sat => {
                if self.k == 0 || self.k > self.n {
                    return Err(Error::invalid("need 1 <= k <= n for SAT sweeps"));
                }
            }
            _ => {
                if self.d < 2 {
                    return Err(Error::invalid("d must be >= 2"));
                }
                if grid.iter().any(|&l| l <= 0.0) {
                    return Err(Error::invalid("lambda grid must be positive"));
                }
            }
        }
        Ok(())
    }
}

/// One trial's measured statistics. `runtime_ms` is kept in memory for
/// profiling but never written to the CSV, whose bytes must be identical
/// across reruns and worker counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub model: SweepModel,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    /// Grid value: λ for hypergraph models, clause density for SAT.
    pub param: f64,
    pub trial_index: usize,
    /// Stream index the trial's randomness derived from.
    pub seed: u64,
    pub core_size: Option<usize>,
    pub core_edge_count: Option<usize>,
    pub giant_component_size: Option<usize>,
    pub sat_success: Option<bool>,
    pub error: Option<String>,
    pub runtime_ms: u64,
}

/// CSV header, matching the record field order (runtime excluded).
pub const CSV_HEADER: &str =
    "model,n,d,k,param,trial_index,seed,core_size,core_edge_count,giant_component_size,sat_success,error";

fn fmt_f64(x: f64) -> String {
    // 17 significant digits: enough to reproduce any f64 exactly.
    format!("{x:.16e}")
}

impl SweepRecord {
    pub fn csv_line(&self) -> String {
        let opt_usize = |v: &Option<usize>| v.map(|x| x.to_string()).unwrap_or_default();
        let sat = match self.sat_success {
            Some(true) => "1",
            Some(false) => "0",
            None => "",
        };
        let error = self
            .error
            .as_deref()
            .unwrap_or("")
            .replace([',', '\n'], ";");
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            self.model,
            self.n,
            self.d,
            self.k,
            fmt_f64(self.param),
            self.trial_index,
            self.seed,
            opt_usize(&self.core_size),
            opt_usize(&self.core_edge_count),
            opt_usize(&self.giant_component_size),
            sat,
            error
        )
    }

    pub fn parse_csv_line(line: &str, lineno: usize) -> Result<SweepRecord> {
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 12 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 12 fields, found {}", parts.len()),
            });
        }
        let field_err = |what: &str| Error::Parse {
            line: lineno,
            message: format!("bad {what}"),
        };
        let opt_usize = |s: &str, what: &str| -> Result<Option<usize>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| field_err(what))
            }
        };
        Ok(SweepRecord {
            model: parts[0].parse()?,
            n: parts[1].parse().map_err(|_| field_err("n"))?,
            d: parts[2].parse().map_err(|_| field_err("d"))?,
            k: parts[3].parse().map_err(|_| field_err("k"))?,
            param: parts[4].parse().map_err(|_| field_err("param"))?,
            trial_index: parts[5].parse().map_err(|_| field_err("trial_index"))?,
            seed: parts[6].parse().map_err(|_| field_err("seed"))?,
            core_size: opt_usize(parts[7], "core_size")?,
            core_edge_count: opt_usize(parts[8], "core_edge_count")?,
            giant_component_size: opt_usize(parts[9], "giant_component_size")?,
            sat_success: match parts[10] {
                "" => None,
                "1" => Some(true),
                "0" => Some(false),
                _ => return Err(field_err("sat_success")),
            },
            error: if parts[11].is_empty() {
                None
            } else {
                Some(parts[11].to_string())
            },
            runtime_ms: 0,
        })
    }
}

/// Writes records as CSV with a header row.
pub fn write_csv<W: Write>(records: &[SweepRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(w, "{}", r.csv_line())?;
    }
    Ok(())
}

pub fn records_to_csv_string(records: &[SweepRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(records, &mut buf).expect("write to Vec");
    String::from_utf8(buf).expect("csv is ascii")
}

/// Reads back a CSV produced by [`write_csv`]; aggregations never need more
/// than this file.
pub fn read_csv<R: BufRead>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if idx == 0 {
            if line != CSV_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: "unrecognized CSV header".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        records.push(SweepRecord::parse_csv_line(&line, idx + 1)?);
    }
    Ok(records)
}

fn run_one_trial(config: &SweepConfig, grid_idx: usize, trial: usize) -> SweepRecord {
    let grid = config.grid().expect("validated");
    let param = grid[grid_idx];
    let stream = (grid_idx * config.trials_per_point + trial) as u64;
    let seed = SeedSpec::new(config.master_seed, stream);
    let start = Instant::now();
    let mut record = SweepRecord {
        model: config.model,
        n: config.n,
        d: config.d,
        k: config.k,
        param,
        trial_index: trial,
        seed: stream,
        core_size: None,
        core_edge_count: None,
        giant_component_size: None,
        sat_success: None,
        error: None,
        runtime_ms: 0,
    };

    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<()> {
        match config.model {
            SweepModel::Poc | SweepModel::Binomial => {
                let h: MultiHypergraph = match config.model {
                    SweepModel::Poc => sample_poc(config.n, config.d, param, seed)?.hypergraph,
                    _ => {
                        let p = lambda_to_p(config.n, config.d, param)?;
                        sample_binomial(config.n, config.d, p, seed)?
                    }
                };
                // Peeling statistics; the order stream is offset so it cannot
                // alias the sampling stream.
                let core = peel_kcore(&h, config.k, seed.with_stream(stream ^ (1 << 63)));
                record.core_size = Some(core.core_size());
                record.core_edge_count = Some(core.core_edges.len());
                record.giant_component_size = Some(h.largest_component_size());
            }
            SweepModel::Sat => {
                let n_clauses = (param * config.n as f64).round() as usize;
                let formula = sample_ksat(config.n, n_clauses, config.k, seed)?;
                let trace = pure_literal_eliminate(&formula, seed.with_stream(stream ^ (1 << 63)));
                record.sat_success = Some(trace.succeeded());
            }
        }
        Ok(())
    }));

    match outcome {
        Ok(Ok(())) => {}
        Ok(Err(e)) => record.error = Some(e.to_string()),
        Err(panic) => {
            let reason = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            record.error = Some(format!("panic: {reason}"));
        }
    }
    record.runtime_ms = start.elapsed().as_millis() as u64;
    record
}

/// Runs the sweep on a pool of `workers` threads (0 means rayon's default).
/// Records come back sorted by (grid point, trial index) regardless of
/// schedule; per-trial panics become error records, never aborts.
pub fn run_sweep(config: &SweepConfig, workers: usize) -> Result<Vec<SweepRecord>> {
    config.validate()?;
    let grid_len = config.grid()?.len();
    let jobs: Vec<(usize, usize)> = (0..grid_len)
        .flat_map(|g| (0..config.trials_per_point).map(move |t| (g, t)))
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    let mut records: Vec<((usize, usize), SweepRecord)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, t)| ((g, t), run_one_trial(config, g, t)))
            .collect()
    });
    records.sort_by_key(|&(key, _)| key);
    Ok(records.into_iter().map(|(_, r)| r).collect())
}

/// Linear interpolation of the parameter where a success curve crosses 0.5.
///
/// Scans adjacent pairs whose fractions straddle 0.5 and interpolates inside
/// the pair closest to 0.5. Errors when no pair brackets the crossing.
pub fn estimate_crossing(points: &[(f64, f64)]) -> Result<f64> {
    let mut best: Option<(f64, f64, f64, f64)> = None;
    let mut best_score = f64::INFINITY;
    for w in points.windows(2) {
        let (x0, p0) = w[0];
        let (x1, p1) = w[1];
        if (p0 - 0.5) * (p1 - 0.5) <= 0.0 && p0 != p1 {
            let score = (p0 - 0.5).abs() + (p1 - 0.5).abs();
            if score < best_score {
                best_score = score;
                best = Some((x0, p0, x1, p1));
            }
        }
    }
    match best {
        Some((x0, p0, x1, p1)) => Ok(x0 + (x1 - x0) * (p0 - 0.5) / (p0 - p1)),
        None => Err(Error::NoCrossing(format!(
            "no adjacent pair brackets 0.5 among {} points",
            points.len()
        ))),
    }
}

/// Crossing estimate with a bootstrap percentile interval.
#[derive(Debug, Clone, Serialize)]
pub struct CrossingEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub resamples: usize,
}

/// Bootstraps [`estimate_crossing`] over per-point Bernoulli trial outcomes:
/// 1000 resamples, percentile 95% interval, resampling stream reserved off
/// the master seed. Resamples without a crossing are dropped.
pub fn estimate_crossing_bootstrap(
    outcomes: &[(f64, Vec<bool>)],
    master_seed: u64,
) -> Result<CrossingEstimate> {
    const RESAMPLES: usize = 1000;
    let points: Vec<(f64, f64)> = outcomes
        .iter()
        .map(|(x, os)| {
            (
                *x,
                os.iter().filter(|&&b| b).count() as f64 / os.len().max(1) as f64,
            )
        })
        .collect();
    let estimate = estimate_crossing(&points)?;

    let mut rng = SeedSpec::new(master_seed, BOOTSTRAP_STREAM_INDEX).stream();
    let mut replicates = Vec::with_capacity(RESAMPLES);
    let mut buf: Vec<bool> = Vec::new();
    for _ in 0..RESAMPLES {
        let resampled: Vec<(f64, f64)> = outcomes
            .iter()
            .map(|(x, os)| {
                resample_into(os, &mut rng, &mut buf);
                (
                    *x,
                    buf.iter().filter(|&&b| b).count() as f64 / buf.len().max(1) as f64,
                )
            })
            .collect();
        if let Ok(c) = estimate_crossing(&resampled) {
            replicates.push(c);
        }
    }
    if replicates.is_empty() {
        return Err(Error::NoCrossing(
            "no bootstrap resample crossed 0.5".into(),
        ));
    }
    let (ci_low, ci_high) = percentile_interval(&mut replicates, 0.95);
    Ok(CrossingEstimate {
        estimate,
        ci_low,
        ci_high,
        resamples: RESAMPLES,
    })
}

/// Side-by-side statistics for one model in a comparison run.
#[derive(Debug, Clone, Serialize)]
pub struct ModelStats {
    pub degree_histogram: Vec<u64>,
    pub core_fraction_k2: MeanCi,
    pub core_fraction_k3: MeanCi,
    pub giant_fraction: MeanCi,
}

/// Statistical comparison of the cloning and binomial models at matched
/// expected degree.
#[derive(Debug, Clone, Serialize)]
pub struct ModelComparison {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub trials: usize,
    pub degree_tv: f64,
    pub poc: ModelStats,
    pub binomial: ModelStats,
    /// Branching-process prediction for the giant fraction, for reference.
    pub predicted_giant_fraction: f64,
}

fn collect_model_stats(
    model: SweepModel,
    n: usize,
    d: usize,
    lambda: f64,
    trials: usize,
    seed: SeedSpec,
) -> Result<ModelStats> {
    let mut histogram: Vec<u64> = Vec::new();
    let mut k2 = Vec::with_capacity(trials);
    let mut k3 = Vec::with_capacity(trials);
    let mut giant = Vec::with_capacity(trials);
    for t in 0..trials {
        let spec = seed.with_stream(seed.stream_index + t as u64);
        let h = match model {
            SweepModel::Poc => sample_poc(n, d, lambda, spec)?.hypergraph,
            SweepModel::Binomial => {
                let p = lambda_to_p(n, d, lambda)?;
                sample_binomial(n, d, p, spec)?
            }
            SweepModel::Sat => return Err(Error::invalid("comparison covers hypergraph models")),
        };
        for &deg in &h.degree_sequence().degrees {
            if deg >= histogram.len() {
                histogram.resize(deg + 1, 0);
            }
            histogram[deg] += 1;
        }
        let order = spec.with_stream(spec.stream_index ^ (1 << 62));
        k2.push(peel_kcore(&h, 2, order).core_size() as f64 / n as f64);
        k3.push(peel_kcore(&h, 3, order).core_size() as f64 / n as f64);
        giant.push(h.largest_component_size() as f64 / n as f64);
    }
    Ok(ModelStats {
        degree_histogram: histogram,
        core_fraction_k2: mean_ci(&k2),
        core_fraction_k3: mean_ci(&k3),
        giant_fraction: mean_ci(&giant),
    })
}

/// Samples both models `trials` times at matched expected degree and reports
/// pooled degree-histogram total variation, k-core fractions for k in {2, 3},
/// and giant-component fractions.
pub fn compare_models(
    n: usize,
    d: usize,
    lambda: f64,
    trials: usize,
    seed: SeedSpec,
) -> Result<ModelComparison> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    lambda_to_p(n, d, lambda)?; // validates the parameter set
    let poc = collect_model_stats(SweepModel::Poc, n, d, lambda, trials, seed)?;
    let binomial = collect_model_stats(
        SweepModel::Binomial,
        n,
        d,
        lambda,
        trials,
        // Disjoint stream block for the second model.
        seed.with_stream(seed.stream_index + trials as u64),
    )?;
    let degree_tv = total_variation(&poc.degree_histogram, &binomial.degree_histogram);
    Ok(ModelComparison {
        n,
        d,
        lambda,
        trials,
        degree_tv,
        predicted_giant_fraction: giant_fraction(lambda, d)?,
        poc,
        binomial,
    })
}
