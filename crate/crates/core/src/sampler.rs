//! Random d-uniform multihypergraph samplers.
//!
//! Two generative models at matched expected degree:
//!
//! * the cloning model: every vertex independently receives a Poisson(λ)
//!   number of clones and all clones are partitioned uniformly at random into
//!   d-sets, each becoming a hyperedge on the owners;
//! * the classical binomial model: every one of the C(n, d) possible simple
//!   edges is present independently with probability p.
//!
//! [`lambda_to_p`] converts between the two parametrizations.

use std::collections::HashSet;
use std::io::Write;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::MultiHypergraph;
use crate::rng::{derive_stream, RandomStream, SeedSpec};

/// A sampled clone population: per-vertex Poisson(λ) clone counts, the
/// clone → owner map, and (optionally) i.i.d. uniform heights on [0, λ] used
/// by the cut-off line algorithm.
///
/// Clone ids are assigned vertex-major: vertex 0's clones come first, then
/// vertex 1's, and so on. `clone_ranges` relies on that layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneConfiguration {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub clone_owner: Vec<usize>,
    pub heights: Option<Vec<f64>>,
}

impl CloneConfiguration {
    /// Builds a configuration from per-vertex clone counts.
    pub fn from_counts(
        n: usize,
        d: usize,
        lambda: f64,
        counts: &[usize],
        heights: Option<Vec<f64>>,
    ) -> Result<Self> {
        if counts.len() != n {
            return Err(Error::invalid(format!(
                "{} clone counts for n={n} vertices",
                counts.len()
            )));
        }
        let total: usize = counts.iter().sum();
        if let Some(h) = &heights {
            if h.len() != total {
                return Err(Error::invalid(format!(
                    "{} heights for {total} clones",
                    h.len()
                )));
            }
            if h.iter().any(|&x| !x.is_finite() || x < 0.0 || x > lambda) {
                return Err(Error::invalid("height outside [0, lambda]"));
            }
        }
        let mut clone_owner = Vec::with_capacity(total);
        for (v, &c) in counts.iter().enumerate() {
            clone_owner.extend(std::iter::repeat_n(v, c));
        }
        Ok(CloneConfiguration {
            n,
            d,
            lambda,
            clone_owner,
            heights,
        })
    }

    /// Samples clone counts only; heights absent.
    pub fn sample(n: usize, d: usize, lambda: f64, seed: SeedSpec) -> Result<Self> {
        validate_model_params(n, d, lambda)?;
        let mut rng = derive_stream(seed);
        let counts = clone_counts_with_rng(n, lambda, &mut rng);
        Self::from_counts(n, d, lambda, &counts, None)
    }

    /// Samples clone counts, then one uniform height per clone from the same
    /// stream. Counts are drawn first and heights second; the draw order is
    /// part of the reproducibility contract.
    pub fn sample_with_heights(n: usize, d: usize, lambda: f64, seed: SeedSpec) -> Result<Self> {
        validate_model_params(n, d, lambda)?;
        let mut rng = derive_stream(seed);
        let counts = clone_counts_with_rng(n, lambda, &mut rng);
        let total: usize = counts.iter().sum();
        let heights: Vec<f64> = (0..total).map(|_| rng.random_range(0.0..=lambda)).collect();
        Self::from_counts(n, d, lambda, &counts, Some(heights))
    }

    pub fn clone_count(&self) -> usize {
        self.clone_owner.len()
    }

    /// Per-vertex clone counts recovered from the owner map.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.n];
        for &v in &self.clone_owner {
            counts[v] += 1;
        }
        counts
    }

    /// Per-vertex `start..end` ranges into the clone id space. Valid because
    /// clone ids are vertex-major.
    pub fn clone_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut ranges = Vec::with_capacity(self.n);
        let mut start = 0usize;
        let mut v = 0usize;
        for (c, &owner) in self.clone_owner.iter().enumerate() {
            while v < owner {
                ranges.push(start..c);
                start = c;
                v += 1;
            }
        }
        while v < self.n {
            ranges.push(start..self.clone_owner.len());
            start = self.clone_owner.len();
            v += 1;
        }
        ranges
    }

    /// Debug dump: one `clone_id vertex height` line per clone (height blank
    /// when absent).
    pub fn write_debug<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (c, &v) in self.clone_owner.iter().enumerate() {
            match &self.heights {
                Some(h) => writeln!(w, "{c} {v} {:e}", h[c])?,
                None => writeln!(w, "{c} {v}")?,
            }
        }
        Ok(())
    }
}

/// A uniform partition of clones into d-sets, plus the leftover clones
/// (`total mod d` of them, a uniformly random subset) that no edge absorbed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingResult {
    pub edges: Vec<Vec<usize>>,
    pub discarded: Vec<usize>,
}

/// The full cloning-model pipeline output: the hypergraph together with the
/// clone population and grouping that produced it.
#[derive(Debug, Clone)]
pub struct PocSample {
    pub hypergraph: MultiHypergraph,
    pub clones: CloneConfiguration,
    pub grouping: GroupingResult,
}

fn validate_model_params(n: usize, d: usize, lambda: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if d < 2 {
        return Err(Error::invalid(format!("d={d} must be >= 2")));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(format!("lambda={lambda} must be positive")));
    }
    Ok(())
}

/// Draws i.i.d. Poisson(λ) clone counts for `n` vertices.
pub fn sample_clone_counts(n: usize, lambda: f64, seed: SeedSpec) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(format!("lambda={lambda} must be positive")));
    }
    let mut rng = derive_stream(seed);
    Ok(clone_counts_with_rng(n, lambda, &mut rng))
}

fn clone_counts_with_rng(n: usize, lambda: f64, rng: &mut RandomStream) -> Vec<usize> {
    (0..n).map(|_| sample_poisson(rng, lambda)).collect()
}

/// One Poisson(λ) draw. Inversion by sequential search below λ = 30,
/// Atkinson's rejection method above; both consume the stream
/// deterministically.
pub(crate) fn sample_poisson(rng: &mut RandomStream, lambda: f64) -> usize {
    if lambda <= 30.0 {
        let u: f64 = rng.random();
        let mut pmf = (-lambda).exp();
        let mut cdf = pmf;
        let mut k = 0usize;
        while u > cdf {
            k += 1;
            pmf *= lambda / k as f64;
            cdf += pmf;
            if pmf == 0.0 {
                break; // u in the far tail beyond f64 resolution
            }
        }
        k
    } else {
        poisson_rejection(rng, lambda)
    }
}

// Rejection method PA (Atkinson 1979) for large rates.
fn poisson_rejection(rng: &mut RandomStream, lambda: f64) -> usize {
    let c = 0.767 - 3.36 / lambda;
    let beta = std::f64::consts::PI / (3.0 * lambda).sqrt();
    let alpha = beta * lambda;
    let k = c.ln() - lambda - beta.ln();
    loop {
        let u: f64 = rng.random();
        if u <= 0.0 || u >= 1.0 {
            continue;
        }
        let x = (alpha - ((1.0 - u) / u).ln()) / beta;
        let n = (x + 0.5).floor();
        if n < 0.0 {
            continue;
        }
        let v: f64 = rng.random();
        let y = alpha - beta * x;
        let temp = 1.0 + y.exp();
        let lhs = y + (v / (temp * temp)).ln();
        let rhs = k + n * lambda.ln() - crate::stats::ln_factorial(n as u64);
        if lhs <= rhs {
            return n as usize;
        }
    }
}

/// Partitions the configuration's clones uniformly at random into d-sets.
///
/// A uniform shuffle followed by consecutive blocks of d induces the uniform
/// partition; the `total mod d` tail clones are the discarded set.
pub fn group_clones(config: &CloneConfiguration, seed: SeedSpec) -> GroupingResult {
    let mut rng = derive_stream(seed);
    let ids: Vec<usize> = (0..config.clone_count()).collect();
    group_ids_with_rng(ids, config.d, &mut rng)
}

pub(crate) fn group_ids_with_rng(
    mut ids: Vec<usize>,
    d: usize,
    rng: &mut RandomStream,
) -> GroupingResult {
    ids.shuffle(rng);
    let full = ids.len() / d;
    let mut edges = Vec::with_capacity(full);
    for block in ids.chunks_exact(d) {
        let mut edge = block.to_vec();
        edge.sort_unstable();
        edges.push(edge);
    }
    let mut discarded = ids[full * d..].to_vec();
    discarded.sort_unstable();
    GroupingResult { edges, discarded }
}

/// Samples one hypergraph from the cloning model: Poisson(λ) clone counts,
/// then a uniform grouping of the clones into hyperedges.
pub fn sample_poc(n: usize, d: usize, lambda: f64, seed: SeedSpec) -> Result<PocSample> {
    validate_model_params(n, d, lambda)?;
    let mut rng = derive_stream(seed);
    let counts = clone_counts_with_rng(n, lambda, &mut rng);
    let clones = CloneConfiguration::from_counts(n, d, lambda, &counts, None)?;
    let grouping = group_ids_with_rng((0..clones.clone_count()).collect(), d, &mut rng);
    let hypergraph = hypergraph_from_grouping(&clones, &grouping)?;
    Ok(PocSample {
        hypergraph,
        clones,
        grouping,
    })
}

/// Maps clone-id edges through the owner map into a vertex hypergraph.
pub fn hypergraph_from_grouping(
    config: &CloneConfiguration,
    grouping: &GroupingResult,
) -> Result<MultiHypergraph> {
    MultiHypergraph::new(
        config.n,
        config.d,
        grouping
            .edges
            .iter()
            .map(|e| e.iter().map(|&c| config.clone_owner[c]).collect::<Vec<_>>()),
    )
}

/// Edge probability giving the binomial model the same expected degree λ:
/// p = λ / C(n−1, d−1).
pub fn lambda_to_p(n: usize, d: usize, lambda: f64) -> Result<f64> {
    if d < 2 || n <= d {
        return Err(Error::invalid(format!("need n > d >= 2, got n={n} d={d}")));
    }
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(format!("lambda={lambda} must be positive")));
    }
    let choices = binomial_coefficient(n - 1, d - 1)?;
    let p = lambda / choices as f64;
    if p > 1.0 {
        return Err(Error::invalid(format!(
            "lambda={lambda} needs p={p:.6} > 1 at n={n}, d={d}"
        )));
    }
    Ok(p)
}

/// C(n, k) in u64 with overflow detection.
pub fn binomial_coefficient(n: usize, k: usize) -> Result<u64> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return Err(Error::invalid(format!("C({n}, {k}) overflows u64")));
        }
    }
    Ok(acc as u64)
}

/// Samples the classical binomial model: each of the C(n, d) simple d-sets is
/// an edge independently with probability p.
///
/// Draws the edge count m ~ Binomial(C(n, d), p), then m distinct d-sets by
/// rejection against a seen-set, never materializing the C(n, d) candidates.
pub fn sample_binomial(n: usize, d: usize, p: f64, seed: SeedSpec) -> Result<MultiHypergraph> {
    if n == 0 || d < 2 || n < d {
        return Err(Error::invalid(format!("need n >= d >= 2, got n={n} d={d}")));
    }
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!("p={p} outside [0, 1]")));
    }
    let candidates = binomial_coefficient(n, d)?;
    let mut rng = derive_stream(seed);
    let m = Binomial::new(candidates, p)
        .map_err(|e| Error::invalid(format!("binomial draw: {e}")))?
        .sample(&mut rng);
    let mut seen: HashSet<Vec<usize>> = HashSet::with_capacity(m as usize);
    let mut edges: Vec<Vec<usize>> = Vec::with_capacity(m as usize);
    while (edges.len() as u64) < m {
        let mut edge = Vec::with_capacity(d);
        while edge.len() < d {
            let v = rng.random_range(0..n);
            if !edge.contains(&v) {
                edge.push(v);
            }
        }
        edge.sort_unstable();
        if seen.insert(edge.clone()) {
            edges.push(edge);
        }
    }
    MultiHypergraph::new(n, d, edges)
}
