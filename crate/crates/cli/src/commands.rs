//! Subcommand implementations.

use std::io::BufReader;
use std::path::PathBuf;

use clap::{Args, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use poclab_core::cores::{cutoff_line_kcore, peel_kcore, CoreResult, CutoffTrace};
use poclab_core::numerics::{kcore_fixpoint, kcore_threshold};
use poclab_core::sampler::{lambda_to_p, sample_binomial, sample_poc, CloneConfiguration};
use poclab_core::sat::{
    pure_literal_eliminate, pure_literal_success_outcomes, pure_literal_success_probability,
    sample_ksat, CnfFormula, SuccessEstimate,
};
use poclab_core::sweep::{
    compare_models, estimate_crossing_bootstrap, records_to_csv_string, run_sweep,
    CrossingEstimate, SweepConfig, SweepModel,
};
use poclab_core::{Error, MultiHypergraph, Result, SeedSpec};

use crate::config::{display, emit, load, or_default, parse_grid, require};

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one hypergraph and print it in the fixture format
    Sample(SampleArgs),
    /// Compute a k-core by peeling or by the cut-off line algorithm
    Core(CoreArgs),
    /// Compute the k-core appearance threshold
    Threshold(ThresholdArgs),
    /// Evaluate the core-size fixed point at a given expected degree
    Predict(PredictArgs),
    /// Run a Monte Carlo sweep from a JSON config and write CSV records
    Sweep(SweepArgs),
    /// Compare the cloning and binomial models at matched expected degree
    Compare(CompareArgs),
    /// Sample random k-SAT and run pure-literal elimination
    Sat(SatArgs),
}

impl Command {
    pub fn run(&self) -> Result<()> {
        match self {
            Command::Sample(a) => a.run(),
            Command::Core(a) => a.run(),
            Command::Threshold(a) => a.run(),
            Command::Predict(a) => a.run(),
            Command::Sweep(a) => a.run(),
            Command::Compare(a) => a.run(),
            Command::Sat(a) => a.run(),
        }
    }
}

fn to_pretty_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// sample
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ModelArg {
    Poc,
    Binomial,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Generative model
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    /// Expected vertex degree
    #[arg(long)]
    lambda: Option<f64>,
    /// Master seed
    #[arg(long)]
    seed: Option<u64>,
    /// Stream index under the master seed
    #[arg(long)]
    stream: Option<u64>,
    /// Write the fixture here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also dump the clone configuration (`clone_id vertex height` lines)
    #[arg(long)]
    clones_out: Option<PathBuf>,
    /// JSON file with defaults for the flags above
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleConfig {
    model: Option<ModelArg>,
    n: Option<usize>,
    d: Option<usize>,
    lambda: Option<f64>,
    seed: Option<u64>,
    stream: Option<u64>,
    out: Option<PathBuf>,
    clones_out: Option<PathBuf>,
}

impl SampleArgs {
    fn run(&self) -> Result<()> {
        let file: SampleConfig = load(&self.config)?;
        let model = or_default(self.model, file.model, ModelArg::Poc);
        let n = require(self.n, file.n, "n")?;
        let d = or_default(self.d, file.d, 2);
        let lambda = require(self.lambda, file.lambda, "lambda")?;
        let seed = SeedSpec::new(
            or_default(self.seed, file.seed, 0),
            or_default(self.stream, file.stream, 0),
        );
        let out = self.out.clone().or(file.out);
        let clones_out = self.clones_out.clone().or(file.clones_out);

        let hypergraph = match model {
            ModelArg::Poc => {
                let sample = sample_poc(n, d, lambda, seed)?;
                if let Some(path) = &clones_out {
                    let mut buf = Vec::new();
                    sample.clones.write_debug(&mut buf).expect("write to Vec");
                    std::fs::write(path, buf).map_err(|e| Error::io(display(path), e))?;
                }
                sample.hypergraph
            }
            ModelArg::Binomial => {
                if clones_out.is_some() {
                    return Err(Error::invalid("--clones-out applies to the poc model only"));
                }
                let p = lambda_to_p(n, d, lambda)?;
                sample_binomial(n, d, p, seed)?
            }
        };
        emit(&out, &hypergraph.to_fixture_string())
    }
}

// ---------------------------------------------------------------------------
// core
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum CoreAlgo {
    Peel,
    Cutoff,
}

#[derive(Debug, Args)]
pub struct CoreArgs {
    #[arg(long, value_enum)]
    algo: Option<CoreAlgo>,
    #[arg(long)]
    k: Option<usize>,
    /// Fixture file to peel (peel only); otherwise an instance is sampled
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    /// Write the (revealed) hypergraph fixture here
    #[arg(long)]
    graph_out: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoreConfig {
    algo: Option<CoreAlgo>,
    k: Option<usize>,
    input: Option<PathBuf>,
    n: Option<usize>,
    d: Option<usize>,
    lambda: Option<f64>,
    seed: Option<u64>,
    stream: Option<u64>,
    graph_out: Option<PathBuf>,
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct CoreReport {
    algo: &'static str,
    k: usize,
    core: CoreResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<CutoffTrace>,
}

impl CoreArgs {
    fn run(&self) -> Result<()> {
        let file: CoreConfig = load(&self.config)?;
        let algo = or_default(self.algo, file.algo, CoreAlgo::Peel);
        let k = require(self.k, file.k, "k")?;
        let input = self.input.clone().or(file.input);
        let seed = SeedSpec::new(
            or_default(self.seed, file.seed, 0),
            or_default(self.stream, file.stream, 0),
        );
        let out = self.out.clone().or(file.out);
        let graph_out = self.graph_out.clone().or(file.graph_out);

        let report;
        let graph;
        match algo {
            CoreAlgo::Peel => {
                graph = match &input {
                    Some(path) => {
                        let reader =
                            std::fs::File::open(path).map_err(|e| Error::io(display(path), e))?;
                        MultiHypergraph::parse_fixture(BufReader::new(reader))?
                    }
                    None => {
                        let n = require(self.n, file.n, "n")?;
                        let d = or_default(self.d, file.d, 2);
                        let lambda = require(self.lambda, file.lambda, "lambda")?;
                        sample_poc(n, d, lambda, seed)?.hypergraph
                    }
                };
                let order = seed.with_stream(seed.stream_index ^ (1 << 63));
                report = CoreReport {
                    algo: "peel",
                    k,
                    core: peel_kcore(&graph, k, order),
                    trace: None,
                };
            }
            CoreAlgo::Cutoff => {
                if input.is_some() {
                    return Err(Error::invalid(
                        "the cut-off algorithm runs on sampled clone configurations, not fixtures",
                    ));
                }
                let n = require(self.n, file.n, "n")?;
                let d = or_default(self.d, file.d, 2);
                let lambda = require(self.lambda, file.lambda, "lambda")?;
                let config = CloneConfiguration::sample_with_heights(n, d, lambda, seed)?;
                let grouping = seed.with_stream(seed.stream_index ^ (1 << 63));
                let (core, trace, revealed) = cutoff_line_kcore(&config, k, grouping)?;
                graph = revealed;
                report = CoreReport {
                    algo: "cutoff",
                    k,
                    core,
                    trace: Some(trace),
                };
            }
        }
        if let Some(path) = &graph_out {
            std::fs::write(path, graph.to_fixture_string())
                .map_err(|e| Error::io(display(path), e))?;
        }
        emit(&out, &to_pretty_json(&report))
    }
}

// ---------------------------------------------------------------------------
// threshold / predict
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>, // accepted for interface uniformity; unused
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ThresholdConfig {
    k: Option<usize>,
    d: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct ThresholdReport {
    k: usize,
    d: usize,
    lambda_crit: f64,
    minimizer_x: Option<f64>,
    attained: bool,
}

impl ThresholdArgs {
    fn run(&self) -> Result<()> {
        let file: ThresholdConfig = load(&self.config)?;
        let k = require(self.k, file.k, "k")?;
        let d = require(self.d, file.d, "d")?;
        let t = kcore_threshold(k, d)?;
        if let Some(w) = &t.warning {
            eprintln!("warning: {w}");
        }
        let report = ThresholdReport {
            k,
            d,
            lambda_crit: t.lambda_crit,
            minimizer_x: t.minimizer_x,
            attained: t.attained,
        };
        emit(&self.out.clone().or(file.out), &to_pretty_json(&report))
    }
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>, // unused, uniform interface
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PredictConfig {
    lambda: Option<f64>,
    k: Option<usize>,
    d: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct PredictReport {
    lambda: f64,
    k: usize,
    d: usize,
    x_star: Option<f64>,
    core_fraction: f64,
    cutoff_position: Option<f64>,
}

impl PredictArgs {
    fn run(&self) -> Result<()> {
        let file: PredictConfig = load(&self.config)?;
        let lambda = require(self.lambda, file.lambda, "lambda")?;
        let k = require(self.k, file.k, "k")?;
        let d = require(self.d, file.d, "d")?;
        let f = kcore_fixpoint(lambda, k, d)?;
        let report = PredictReport {
            lambda,
            k,
            d,
            x_star: f.x_star,
            core_fraction: f.core_fraction,
            cutoff_position: f.cutoff_position,
        };
        emit(&self.out.clone().or(file.out), &to_pretty_json(&report))
    }
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep config JSON (keys are SweepConfig field names)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<SweepModel>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated grid; λ for hypergraph models, density for sat
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Master seed override
    #[arg(long)]
    seed: Option<u64>,
    /// CSV destination override
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores)
    #[arg(long, env = "POCLAB_WORKERS", default_value_t = 0)]
    workers: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFileConfig {
    model: Option<SweepModel>,
    n: Option<usize>,
    d: Option<usize>,
    k: Option<usize>,
    lambda_grid: Option<Vec<f64>>,
    density_grid: Option<Vec<f64>>,
    trials_per_point: Option<usize>,
    master_seed: Option<u64>,
    output: Option<PathBuf>,
}

impl SweepArgs {
    fn run(&self) -> Result<()> {
        let file: SweepFileConfig = load(&self.config)?;
        let model = require(self.model, file.model, "model")?;
        let flag_grid = self.grid.as_deref().map(parse_grid).transpose()?;
        let (lambda_grid, density_grid) = match model {
            SweepModel::Sat => (None, flag_grid.or(file.density_grid)),
            _ => (flag_grid.or(file.lambda_grid), None),
        };
        let config = SweepConfig {
            model,
            n: require(self.n, file.n, "n")?,
            d: or_default(self.d, file.d, 2),
            k: require(self.k, file.k, "k")?,
            lambda_grid,
            density_grid,
            trials_per_point: require(self.trials, file.trials_per_point, "trials")?,
            master_seed: or_default(self.seed, file.master_seed, 0),
            output: self.out.clone().or(file.output),
        };
        let records = run_sweep(&config, self.workers)?;
        let csv = records_to_csv_string(&records);
        let total_ms: u64 = records.iter().map(|r| r.runtime_ms).sum();
        eprintln!(
            "sweep: {} records ({} errors), {} ms of trial work",
            records.len(),
            records.iter().filter(|r| r.error.is_some()).count(),
            total_ms
        );
        emit(&config.output, &csv)
    }
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CompareConfig {
    n: Option<usize>,
    d: Option<usize>,
    lambda: Option<f64>,
    trials: Option<usize>,
    seed: Option<u64>,
    stream: Option<u64>,
    out: Option<PathBuf>,
}

impl CompareArgs {
    fn run(&self) -> Result<()> {
        let file: CompareConfig = load(&self.config)?;
        let n = require(self.n, file.n, "n")?;
        let d = or_default(self.d, file.d, 2);
        let lambda = require(self.lambda, file.lambda, "lambda")?;
        let trials = or_default(self.trials, file.trials, 10);
        let seed = SeedSpec::new(
            or_default(self.seed, file.seed, 0),
            or_default(self.stream, file.stream, 0),
        );
        let report = compare_models(n, d, lambda, trials, seed)?;
        emit(&self.out.clone().or(file.out), &to_pretty_json(&report))
    }
}

// ---------------------------------------------------------------------------
// sat
// ---------------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct SatArgs {
    #[arg(long)]
    n_vars: Option<usize>,
    /// Clause width
    #[arg(long)]
    k: Option<usize>,
    /// Single clause density (clauses per variable)
    #[arg(long)]
    density: Option<f64>,
    /// Comma-separated density grid for a success-curve sweep
    #[arg(long)]
    densities: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
    /// Run elimination on an existing DIMACS file instead of sampling
    #[arg(long)]
    input: Option<PathBuf>,
    /// Write the sampled formula (first trial) as DIMACS
    #[arg(long)]
    dimacs_out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stream: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SatConfig {
    n_vars: Option<usize>,
    k: Option<usize>,
    density: Option<f64>,
    densities: Option<Vec<f64>>,
    trials: Option<usize>,
    input: Option<PathBuf>,
    dimacs_out: Option<PathBuf>,
    seed: Option<u64>,
    stream: Option<u64>,
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct EliminationReport {
    n_vars: usize,
    n_clauses: usize,
    succeeded: bool,
    eliminated: usize,
    removed_clauses: usize,
    residual_clauses: usize,
}

#[derive(Debug, Serialize)]
struct SatCurveReport {
    n_vars: usize,
    k: usize,
    trials: usize,
    points: Vec<poclab_core::sat::SuccessEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    crossing: Option<CrossingEstimate>,
}

impl SatArgs {
    fn run(&self) -> Result<()> {
        let file: SatConfig = load(&self.config)?;
        let seed = SeedSpec::new(
            or_default(self.seed, file.seed, 0),
            or_default(self.stream, file.stream, 0),
        );
        let out = self.out.clone().or(file.out);

        // Mode 1: eliminate an existing DIMACS file.
        if let Some(path) = self.input.clone().or(file.input) {
            let reader = std::fs::File::open(&path).map_err(|e| Error::io(display(&path), e))?;
            let formula = CnfFormula::parse_dimacs(BufReader::new(reader))?;
            let trace = pure_literal_eliminate(&formula, seed);
            let report = EliminationReport {
                n_vars: formula.n_vars(),
                n_clauses: formula.clause_count(),
                succeeded: trace.succeeded(),
                eliminated: trace.eliminated_literals.len(),
                removed_clauses: trace.removed_clause_ids.len(),
                residual_clauses: trace.residual_clause_ids.len(),
            };
            return emit(&out, &to_pretty_json(&report));
        }

        let n_vars = require(self.n_vars, file.n_vars, "n-vars")?;
        let k = or_default(self.k, file.k, 3);
        let trials = or_default(self.trials, file.trials, 100);
        let flag_densities = self.densities.as_deref().map(parse_grid).transpose()?;

        // Mode 2: density-grid success curve with a crossing estimate.
        if let Some(grid) = flag_densities.or(file.densities) {
            if grid.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::invalid("density grid must be strictly increasing"));
            }
            let mut points = Vec::with_capacity(grid.len());
            let mut outcomes = Vec::with_capacity(grid.len());
            for (i, &density) in grid.iter().enumerate() {
                let point_seed = seed.with_stream(seed.stream_index + (i * trials * 2) as u64);
                let trial_outcomes =
                    pure_literal_success_outcomes(n_vars, density, k, trials, point_seed)?;
                points.push(SuccessEstimate::from_outcomes(
                    n_vars,
                    density,
                    k,
                    &trial_outcomes,
                ));
                outcomes.push((density, trial_outcomes));
            }
            let crossing = estimate_crossing_bootstrap(&outcomes, seed.master_seed).ok();
            let report = SatCurveReport {
                n_vars,
                k,
                trials,
                points,
                crossing,
            };
            return emit(&out, &to_pretty_json(&report));
        }

        // Mode 3: single density point.
        let density = require(self.density, file.density, "density")?;
        if let Some(path) = self.dimacs_out.clone().or(file.dimacs_out) {
            let n_clauses = (density * n_vars as f64).round() as usize;
            let formula = sample_ksat(n_vars, n_clauses, k, seed)?;
            std::fs::write(&path, formula.to_dimacs_string())
                .map_err(|e| Error::io(display(&path), e))?;
        }
        let est = pure_literal_success_probability(n_vars, density, k, trials, seed)?;
        emit(&out, &to_pretty_json(&est))
    }
}
