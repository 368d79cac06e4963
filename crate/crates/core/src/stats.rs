//! Statistical test machinery shared by the experiment harness and the
//! verification suites: special functions, chi-square and Kolmogorov-Smirnov
//! tests, Wilson score intervals, and percentile bootstrap.

use rand::Rng;

use crate::rng::RandomStream;

// ---------------------------------------------------------------------------
// Special functions
// ---------------------------------------------------------------------------

// Lanczos approximation, g = 7, 9 coefficients. Relative error below 2e-10
// over the positive reals, which is ample for test p-values.
const LANCZOS_G: f64 = 7.0;
// Published coefficient digits kept verbatim even past f64 precision.
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx).
        let pi = std::f64::consts::PI;
        pi.ln() - (pi * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
    }
}

/// ln(n!) via a cumulative table for small n and `ln_gamma` beyond it.
pub fn ln_factorial(n: u64) -> f64 {
    const TABLE_LEN: usize = 256;
    static TABLE: std::sync::OnceLock<[f64; TABLE_LEN]> = std::sync::OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0.0; TABLE_LEN];
        for i in 2..TABLE_LEN {
            t[i] = t[i - 1] + (i as f64).ln();
        }
        t
    });
    if (n as usize) < TABLE_LEN {
        table[n as usize]
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn regularized_gamma_p(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_series(a, x)
    } else {
        1.0 - gamma_continued_fraction(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn regularized_gamma_q(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_series(a, x)
    } else {
        gamma_continued_fraction(a, x)
    }
}

fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..1000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    // Lentz's algorithm for the continued-fraction form of Q(a, x).
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..1000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Chi-square survival function: P(X >= x) for X ~ chi-square(df).
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    regularized_gamma_q(df as f64 / 2.0, x / 2.0)
}

// ---------------------------------------------------------------------------
// Chi-square tests
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub df: usize,
    pub p_value: f64,
}

impl ChiSquareTest {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// Goodness-of-fit test of observed counts against expected counts.
///
/// Bins with expected count below `min_expected` are pooled into their right
/// neighbour (the final bin absorbs leftovers) so the chi-square
/// approximation stays valid. `df` is `bins - 1 - df_reduction`; pass zero
/// when no parameter was estimated from the data.
pub fn chi_square_gof(
    observed: &[u64],
    expected: &[f64],
    min_expected: f64,
    df_reduction: usize,
) -> ChiSquareTest {
    assert_eq!(observed.len(), expected.len());
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc_obs = 0.0;
    let mut acc_exp = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_obs += o as f64;
        acc_exp += e;
        if acc_exp >= min_expected {
            pooled.push((acc_obs, acc_exp));
            acc_obs = 0.0;
            acc_exp = 0.0;
        }
    }
    if acc_exp > 0.0 || acc_obs > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.0 += acc_obs;
            last.1 += acc_exp;
        } else {
            pooled.push((acc_obs, acc_exp));
        }
    }
    let statistic: f64 = pooled
        .iter()
        .map(|&(o, e)| {
            let diff = o - e;
            diff * diff / e
        })
        .sum();
    let df = pooled.len().saturating_sub(1 + df_reduction).max(1);
    ChiSquareTest {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    }
}

/// Homogeneity test over a contingency table `rows x cols` of counts: are the
/// row distributions identical? Columns whose total is zero are dropped.
pub fn chi_square_homogeneity(table: &[Vec<u64>]) -> ChiSquareTest {
    let rows = table.len();
    let cols = table[0].len();
    let row_totals: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_totals: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j] as f64).sum())
        .collect();
    let grand: f64 = row_totals.iter().sum();
    let live_cols: Vec<usize> = (0..cols).filter(|&j| col_totals[j] > 0.0).collect();
    let mut statistic = 0.0;
    for i in 0..rows {
        for &j in &live_cols {
            let expected = row_totals[i] * col_totals[j] / grand;
            if expected > 0.0 {
                let diff = table[i][j] as f64 - expected;
                statistic += diff * diff / expected;
            }
        }
    }
    let df = (rows - 1) * (live_cols.len().saturating_sub(1)).max(1);
    ChiSquareTest {
        statistic,
        df,
        p_value: chi_square_sf(statistic, df),
    }
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct KsTest {
    pub statistic: f64,
    pub n: usize,
    pub p_value: f64,
}

impl KsTest {
    pub fn passes(&self, alpha: f64) -> bool {
        self.p_value >= alpha
    }
}

/// One-sample KS test of `samples` against the uniform distribution on
/// [0, 1]. Uses the asymptotic Kolmogorov distribution with Stephens' finite-n
/// correction, accurate for the pooled sample sizes used here.
pub fn ks_uniform(samples: &[f64]) -> KsTest {
    assert!(!samples.is_empty(), "KS test needs samples");
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let hi = (i as f64 + 1.0) / n - x;
        let lo = x - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    let effective = n.sqrt() + 0.12 + 0.11 / n.sqrt();
    let lambda = effective * d;
    KsTest {
        statistic: d,
        n: sorted.len(),
        p_value: kolmogorov_sf(lambda),
    }
}

/// Survival function of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²).
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..100 {
        let term = (-2.0 * (j as f64).powi(2) * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-18 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

// ---------------------------------------------------------------------------
// Intervals and distances
// ---------------------------------------------------------------------------

/// Wilson score interval for a binomial proportion at the 95% level.
pub fn wilson_interval(successes: u64, trials: u64) -> (f64, f64) {
    const Z: f64 = 1.959_963_984_540_054; // 97.5% normal quantile
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = Z * Z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = (Z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Sample mean with a 95% normal-approximation confidence interval.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct MeanCi {
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

pub fn mean_ci(samples: &[f64]) -> MeanCi {
    const Z: f64 = 1.959_963_984_540_054;
    let n = samples.len();
    assert!(n > 0, "mean of empty sample");
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = if n > 1 {
        samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n as f64 - 1.0)
    } else {
        0.0
    };
    let half = Z * (var / n as f64).sqrt();
    MeanCi {
        mean,
        ci_low: mean - half,
        ci_high: mean + half,
        n,
    }
}

/// Total-variation distance between two empirical count histograms over the
/// same index set. Histograms are normalized before comparison; trailing
/// length mismatch is treated as zero counts.
pub fn total_variation(p_counts: &[u64], q_counts: &[u64]) -> f64 {
    let len = p_counts.len().max(q_counts.len());
    let p_total: f64 = p_counts.iter().sum::<u64>() as f64;
    let q_total: f64 = q_counts.iter().sum::<u64>() as f64;
    assert!(p_total > 0.0 && q_total > 0.0, "empty histogram");
    let mut dist = 0.0;
    for i in 0..len {
        let p = p_counts.get(i).copied().unwrap_or(0) as f64 / p_total;
        let q = q_counts.get(i).copied().unwrap_or(0) as f64 / q_total;
        dist += (p - q).abs();
    }
    dist / 2.0
}

/// Percentile interval from bootstrap replicates (sorted internally).
pub fn percentile_interval(replicates: &mut [f64], level: f64) -> (f64, f64) {
    assert!(!replicates.is_empty());
    replicates.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    (
        quantile_sorted(replicates, alpha),
        quantile_sorted(replicates, 1.0 - alpha),
    )
}

fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = pos.ceil() as usize;
    if i == j {
        sorted[i]
    } else {
        let t = pos - i as f64;
        (1.0 - t) * sorted[i] + t * sorted[j]
    }
}

/// Draws one bootstrap resample (with replacement) of `data` into `out`.
pub fn resample_into<T: Copy>(data: &[T], rng: &mut RandomStream, out: &mut Vec<T>) {
    out.clear();
    for _ in 0..data.len() {
        out.push(data[rng.random_range(0..data.len())]);
    }
}
