//! Distributional law checks on the samplers: grouping uniformity on tiny
//! clone sets, vertex exchangeability, clone-count law, and the binomial
//! model's degree distribution against its exact total-variation oracle.

use std::collections::HashMap;

use poclab_core::numerics::kcore_threshold;
use poclab_core::sampler::{group_clones, lambda_to_p, sample_binomial, CloneConfiguration};
use poclab_core::stats::{chi_square_gof, chi_square_homogeneity, ln_factorial, total_variation};
use poclab_core::{sample_clone_counts, sample_poc, SeedSpec};

fn seed(master: u64, stream: u64) -> SeedSpec {
    SeedSpec::new(master, stream)
}

/// Number of unordered partitions of N labelled clones into groups of d:
/// N! / ((d!)^(N/d) (N/d)!).
fn partition_count(n: usize, d: usize) -> u64 {
    let fact = |m: usize| -> u64 { (1..=m as u64).product::<u64>().max(1) };
    let groups = n / d;
    fact(n) / (fact(d).pow(groups as u32) * fact(groups))
}

fn grouping_uniformity_case(total: usize, d: usize, trials: usize, master: u64) {
    let counts = vec![total];
    let config = CloneConfiguration::from_counts(1, d, total as f64, &counts, None).unwrap();
    let classes = partition_count(total, d);
    let mut frequencies: HashMap<Vec<Vec<usize>>, u64> = HashMap::new();
    for t in 0..trials {
        let g = group_clones(&config, seed(master, t as u64));
        let mut key = g.edges.clone();
        key.sort();
        *frequencies.entry(key).or_default() += 1;
    }
    assert_eq!(
        frequencies.len() as u64,
        classes,
        "not every partition appeared"
    );
    let observed: Vec<u64> = frequencies.values().copied().collect();
    let expected: Vec<f64> = vec![trials as f64 / classes as f64; observed.len()];
    let test = chi_square_gof(&observed, &expected, 5.0, 0);
    assert!(
        test.passes(0.001),
        "N={total} d={d}: χ²={} df={} p={}",
        test.statistic,
        test.df,
        test.p_value
    );
}

#[test]
fn grouping_uniform_on_four_clones_pairs() {
    // 3 perfect matchings of 4 clones into pairs, 30k seeds.
    grouping_uniformity_case(4, 2, 30_000, 0x6A01);
}

#[test]
fn grouping_uniform_on_six_clones_pairs() {
    // 15 matchings of 6 clones into pairs.
    grouping_uniformity_case(6, 2, 30_000, 0x6A02);
}

#[test]
fn grouping_uniform_on_six_clones_triples() {
    // 10 partitions of 6 clones into two triples.
    grouping_uniformity_case(6, 3, 30_000, 0x6A03);
}

#[test]
fn clone_counts_pass_poisson_chi_square() {
    // Pooled 1e5 Poisson(3) draws against the exact pmf at α = 0.001.
    let lambda = 3.0;
    let counts = sample_clone_counts(100_000, lambda, seed(0x6A04, 0)).unwrap();
    let max = counts.iter().copied().max().unwrap();
    let mut histogram = vec![0u64; max + 1];
    for &c in &counts {
        histogram[c] += 1;
    }
    let expected: Vec<f64> = (0..histogram.len())
        .map(|j| {
            let ln_pmf = j as f64 * lambda.ln() - lambda - ln_factorial(j as u64);
            counts.len() as f64 * ln_pmf.exp()
        })
        .collect();
    let test = chi_square_gof(&histogram, &expected, 5.0, 0);
    assert!(
        test.passes(0.001),
        "χ²={} df={} p={}",
        test.statistic,
        test.df,
        test.p_value
    );
}

#[test]
fn vertex_degrees_are_exchangeable() {
    // Relabelling symmetry: per-vertex degree distributions are homogeneous
    // across vertex indices. Contingency table over 4000 trials at n = 6.
    let n = 6;
    let trials = 4000;
    let cap = 8usize; // degrees >= cap pool into the last column
    let mut table = vec![vec![0u64; cap + 1]; n];
    for t in 0..trials {
        let s = sample_poc(n, 2, 2.0, seed(0x6A05, t as u64)).unwrap();
        for (v, &deg) in s.hypergraph.degree_sequence().degrees.iter().enumerate() {
            table[v][deg.min(cap)] += 1;
        }
    }
    let test = chi_square_homogeneity(&table);
    assert!(
        test.passes(0.001),
        "χ²={} df={} p={}",
        test.statistic,
        test.df,
        test.p_value
    );
}

#[test]
fn binomial_degree_histogram_close_to_poisson() {
    // Exact oracle first: TV(Binomial(n-1, p), Poisson(λ)) is p/2-scale small.
    let (n, d, lambda) = (1000usize, 2usize, 3.0f64);
    let p = lambda_to_p(n, d, lambda).unwrap();
    let cap = 40usize;
    let mut oracle_tv = 0.0;
    let mut binom_pmf = (1.0 - p).powi((n - 1) as i32); // j = 0
    for j in 0..=cap {
        let ln_poisson = j as f64 * lambda.ln() - lambda - ln_factorial(j as u64);
        oracle_tv += (binom_pmf - ln_poisson.exp()).abs();
        // next Binomial term via the ratio identity
        binom_pmf *= ((n - 1 - j) as f64 / (j + 1) as f64) * (p / (1.0 - p));
    }
    oracle_tv /= 2.0;
    assert!(
        oracle_tv < 0.005,
        "exact TV oracle unexpectedly large: {oracle_tv}"
    );

    // Pooled empirical degrees across 20 samples vs the Poisson histogram.
    let mut histogram = vec![0u64; cap + 1];
    let mut draws = 0u64;
    for t in 0..20u64 {
        let h = sample_binomial(n, d, p, seed(0x6A06, t)).unwrap();
        for &deg in &h.degree_sequence().degrees {
            histogram[deg.min(cap)] += 1;
            draws += 1;
        }
    }
    let poisson_counts: Vec<u64> = (0..=cap)
        .map(|j| {
            let ln_pmf = j as f64 * lambda.ln() - lambda - ln_factorial(j as u64);
            (draws as f64 * ln_pmf.exp()).round() as u64
        })
        .collect();
    let tv = total_variation(&histogram, &poisson_counts);
    assert!(tv < 0.02, "empirical TV {tv} (oracle {oracle_tv})");
}

#[test]
fn repeated_vertex_edges_vanish_with_n() {
    // The cloning model keeps edges that touch a vertex more than once; their
    // frequency is 1/n-scale and must fall away as n grows.
    let repeat_fraction = |n: usize, master: u64| -> f64 {
        let mut repeats = 0usize;
        let mut edges = 0usize;
        for t in 0..50u64 {
            let s = sample_poc(n, 2, 3.0, seed(master, t)).unwrap();
            for e in s.hypergraph.edges() {
                if e[0] == e[1] {
                    repeats += 1;
                }
                edges += 1;
            }
        }
        repeats as f64 / edges as f64
    };
    let small = repeat_fraction(50, 0x6A07);
    let large = repeat_fraction(5000, 0x6A08);
    assert!(small > large, "small-n {small} vs large-n {large}");
    assert!(large < 1e-3, "large-n frequency {large}");
}

#[test]
fn graph_thresholds_match_brute_force_up_to_k8() {
    // Coarse independent scan within 1e-3 for k in 3..=8, d = 2.
    for k in 3..=8usize {
        let got = kcore_threshold(k, 2).unwrap().lambda_crit;
        let mut oracle = f64::INFINITY;
        let mut x: f64 = 1e-3;
        while x < 16.0 {
            // lower-sum complement with k-1 terms
            let mut factorial = 1.0;
            let mut lower = 0.0;
            for j in 0..k - 1 {
                if j > 0 {
                    factorial *= j as f64;
                }
                lower += x.powi(j as i32) * (-x).exp() / factorial;
            }
            let tail = (1.0 - lower).max(0.0);
            if tail > 0.0 {
                oracle = oracle.min(x / tail);
            }
            x += 1e-3;
        }
        assert!(
            (got - oracle).abs() < 1e-3,
            "k={k}: got {got}, oracle {oracle}"
        );
    }
}
