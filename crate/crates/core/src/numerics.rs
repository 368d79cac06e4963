//! Closed-form predictions: Poisson tails, the k-core appearance threshold,
//! the core-size fixed point, and the giant-component fraction.
//!
//! All root-finding is bracketed bisection and all minimization is a guarded
//! grid scan plus golden-section refinement; tolerances are fixed constants
//! so results are reproducible across machines.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::ln_factorial;

/// Argument tolerance for the threshold minimizer.
pub const ARG_TOL: f64 = 1e-8;
/// Residual tolerance for fixed-point roots.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Search range for the threshold's x variable.
pub const X_RANGE: (f64, f64) = (1e-6, 1e3);

const GRID_POINTS: usize = 4000;

/// Upper tail P(Po(x) >= k), absolute error well below 1e-13 for x <= 1e3.
///
/// Summation runs in linear space anchored at a log-space term, upward from k
/// when k sits above the mean and as the complement of the lower sum
/// otherwise, so neither underflow at p(0) nor cancellation can bite.
pub fn poisson_tail(x: f64, k: usize) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::invalid(format!(
            "poisson_tail needs x >= 0, got {x}"
        )));
    }
    if k == 0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if (k as f64) > x {
        // Direct upper sum from j = k, collected until underflow and summed
        // smallest-first. Past the mean the terms decay at least
        // geometrically, so this stays short.
        let mut terms = Vec::new();
        let mut term = pmf(x, k);
        let mut j = k;
        while term > 1e-300 {
            terms.push(term);
            j += 1;
            term *= x / j as f64;
        }
        Ok(terms.iter().rev().sum())
    } else {
        // Complement of the lower sum, accumulated downward from j = k-1.
        let mut sum = 0.0;
        let mut term = pmf(x, k - 1);
        let mut j = k - 1;
        loop {
            sum += term;
            if j == 0 || term < 1e-20 {
                break;
            }
            term *= j as f64 / x;
            j -= 1;
        }
        Ok((1.0 - sum).clamp(0.0, 1.0))
    }
}

fn pmf(x: f64, j: usize) -> f64 {
    (j as f64 * x.ln() - x - ln_factorial(j as u64)).exp()
}

/// Threshold location for the k-core of a random d-uniform hypergraph:
/// the infimum over x > 0 of x / P(Po(x) >= k-1)^(d-1).
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdResult {
    pub lambda_crit: f64,
    /// Argument attaining the infimum; `None` when the infimum is only
    /// approached as x -> 0 (the (k, d) = (2, 2) case).
    pub minimizer_x: Option<f64>,
    pub attained: bool,
    /// Set when the guard grid saw more than one local minimum.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn threshold_objective(x: f64, k: usize, d: usize) -> f64 {
    let tail = poisson_tail(x, k - 1).expect("x >= 0 in scan");
    let denom = tail.powi(d as i32 - 1);
    if denom == 0.0 {
        f64::INFINITY
    } else {
        x / denom
    }
}

/// Computes the k-core threshold λ_{k,d} for k >= 2, d >= 2.
///
/// A geometric grid over [1e-6, 1e3] brackets the minimizer (and guards
/// against multimodality), then golden-section refines the bracket to
/// [`ARG_TOL`]. For (k, d) = (2, 2) the objective x/(1 - e^{-x}) is strictly
/// increasing with limit 1 at 0+, so the infimum is 1 and is not attained.
pub fn kcore_threshold(k: usize, d: usize) -> Result<ThresholdResult> {
    if k < 2 || d < 2 {
        return Err(Error::invalid(format!(
            "threshold needs k >= 2 and d >= 2, got k={k} d={d}"
        )));
    }
    if (k, d) == (2, 2) {
        return Ok(ThresholdResult {
            lambda_crit: 1.0,
            minimizer_x: None,
            attained: false,
            warning: None,
        });
    }
    let (lo, hi) = X_RANGE;
    let ratio = (hi / lo).ln() / (GRID_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|i| lo * (ratio * i as f64).exp())
        .collect();
    let values: Vec<f64> = grid.iter().map(|&x| threshold_objective(x, k, d)).collect();
    let best = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");

    let mut local_minima = 0usize;
    for i in 1..GRID_POINTS - 1 {
        if values[i].is_finite() && values[i] < values[i - 1] && values[i] <= values[i + 1] {
            local_minima += 1;
        }
    }
    let warning = (local_minima > 1).then(|| {
        format!("grid scan found {local_minima} local minima; keeping the global scan minimum")
    });

    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(GRID_POINTS - 1)];
    let x_min = golden_section(|x| threshold_objective(x, k, d), a, b, ARG_TOL);
    Ok(ThresholdResult {
        lambda_crit: threshold_objective(x_min, k, d),
        minimizer_x: Some(x_min),
        attained: true,
        warning,
    })
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let inv_phi2 = 1.0 - inv_phi;
    let mut x1 = a + inv_phi2 * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = a + inv_phi2 * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// The core-size fixed point at expected degree λ.
#[derive(Debug, Clone, Serialize)]
pub struct FixpointResult {
    /// Largest root of x = λ P(Po(x) >= k-1)^(d-1); `None` below threshold.
    pub x_star: Option<f64>,
    /// Predicted core fraction P(Po(x*) >= k); zero when the root is absent.
    pub core_fraction: f64,
    /// Predicted final cut-off line position (equals x*).
    pub cutoff_position: Option<f64>,
}

impl FixpointResult {
    pub fn is_present(&self) -> bool {
        self.x_star.is_some()
    }

    fn absent() -> Self {
        FixpointResult {
            x_star: None,
            core_fraction: 0.0,
            cutoff_position: None,
        }
    }
}

/// Finds the largest positive root of g(x) = λ P(Po(x) >= k-1)^(d-1) - x.
///
/// g(λ) < 0 because the tail is below one, so a descending grid from λ looks
/// for the first sign change and bisection refines it; no sign change on the
/// grid means the root is absent (λ below threshold). The grid is fine enough
/// to resolve the root pair λ - λ_crit = 1e-3 apart that the threshold
/// consistency checks exercise.
pub fn kcore_fixpoint(lambda: f64, k: usize, d: usize) -> Result<FixpointResult> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(format!("lambda={lambda} must be positive")));
    }
    if d < 2 {
        return Err(Error::invalid(format!("d={d} must be >= 2")));
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    if lambda > X_RANGE.1 {
        return Err(Error::invalid(format!(
            "lambda={lambda} above supported range {}",
            X_RANGE.1
        )));
    }
    if k == 1 {
        // P(Po(x) >= 0) = 1, so the map is x -> λ exactly.
        return Ok(FixpointResult {
            x_star: Some(lambda),
            core_fraction: poisson_tail(lambda, 1)?,
            cutoff_position: Some(lambda),
        });
    }
    let g = |x: f64| lambda * poisson_tail(x, k - 1).expect("x >= 0").powi(d as i32 - 1) - x;
    let steps = 20_000usize;
    let mut hi = lambda;
    let mut lo = None;
    for i in 1..=steps {
        let x = lambda * (1.0 - i as f64 / steps as f64);
        if x <= 0.0 {
            break;
        }
        if g(x) > 0.0 {
            lo = Some(x);
            break;
        }
        hi = x;
    }
    let Some(mut lo) = lo else {
        return Ok(FixpointResult::absent());
    };
    // Bisect [lo, hi] with g(lo) > 0 >= g(hi) down to machine-scale width.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x_star = if g(hi).abs() < g(lo).abs() { hi } else { lo };
    debug_assert!(g(x_star).abs() < RESIDUAL_TOL);
    Ok(FixpointResult {
        x_star: Some(x_star),
        core_fraction: poisson_tail(x_star, k)?,
        cutoff_position: Some(x_star),
    })
}

/// Largest root ρ in [0, 1] of ρ = 1 - exp(-λ(1 - (1-ρ)^(d-1))): the
/// branching-process giant-component fraction. Zero when λ(d-1) <= 1.
pub fn giant_fraction(lambda: f64, d: usize) -> Result<f64> {
    if !lambda.is_finite() || lambda <= 0.0 {
        return Err(Error::invalid(format!("lambda={lambda} must be positive")));
    }
    if d < 2 {
        return Err(Error::invalid(format!("d={d} must be >= 2")));
    }
    if lambda * (d as f64 - 1.0) <= 1.0 {
        return Ok(0.0);
    }
    let h = |rho: f64| 1.0 - (-lambda * (1.0 - (1.0 - rho).powi(d as i32 - 1))).exp() - rho;
    // h(1) = -e^{-λ} < 0; find a positive starting point by halving toward 0.
    let mut lo = 0.5;
    while h(lo) <= 0.0 {
        lo /= 2.0;
        if lo < 1e-300 {
            return Ok(0.0);
        }
    }
    let mut hi = 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = if h(hi).abs() < h(lo).abs() { hi } else { lo };
    debug_assert!(h(root).abs() < RESIDUAL_TOL);
    Ok(root)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_total_mass_and_empty_support() {
        assert_eq!(poisson_tail(2.5, 0).unwrap(), 1.0);
        assert_eq!(poisson_tail(0.0, 1).unwrap(), 0.0);
        assert!(poisson_tail(-0.1, 1).is_err());
    }

    #[test]
    fn tail_two_term_complement_by_hand() {
        // P(Po(1) >= 2) = 1 - 2/e.
        let expect = 1.0 - 2.0 * (-1.0f64).exp();
        assert!((poisson_tail(1.0, 2).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn tail_complement_identity_against_direct_pmf_sum() {
        // Independent oracle: brute-force pmf summation in log space.
        let cases: [(f64, usize); 7] = [
            (0.5, 3),
            (3.0, 1),
            (3.0, 7),
            (30.0, 25),
            (100.0, 90),
            (100.0, 130),
            (1000.0, 1000),
        ];
        for &(x, k) in &cases {
            let mut lower = 0.0;
            for j in 0..k {
                lower += (j as f64 * x.ln() - x - ln_factorial(j as u64)).exp();
            }
            let got = poisson_tail(x, k).unwrap();
            assert!(
                (got + lower - 1.0).abs() < 1e-13,
                "x={x} k={k}: tail={got}, lower={lower}"
            );
        }
    }

    #[test]
    fn tail_monotone_in_x_and_k() {
        let xs: Vec<f64> = (1..60).map(|i| i as f64 * 0.5).collect();
        for k in 1..12usize {
            for w in xs.windows(2) {
                assert!(poisson_tail(w[0], k).unwrap() <= poisson_tail(w[1], k).unwrap());
            }
        }
        for &x in &xs {
            for k in 0..11usize {
                assert!(poisson_tail(x, k).unwrap() >= poisson_tail(x, k + 1).unwrap());
            }
        }
    }

    #[test]
    fn threshold_degenerate_two_two() {
        let t = kcore_threshold(2, 2).unwrap();
        assert_eq!(t.lambda_crit, 1.0);
        assert!(!t.attained);
        assert!(t.minimizer_x.is_none());
        // Series oracle: x/(1 - e^{-x}) -> 1 as x -> 0+, and increases.
        let mut prev = 1.0;
        for i in 1..=100 {
            let x = i as f64 * 0.05;
            let v = x / (1.0 - (-x).exp());
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn threshold_classical_constants() {
        let t32 = kcore_threshold(3, 2).unwrap();
        assert!((t32.lambda_crit - 3.350_918_87).abs() < 1e-6, "{t32:?}");
        assert!(t32.attained);
        let t42 = kcore_threshold(4, 2).unwrap();
        assert!((t42.lambda_crit - 5.149_402_75).abs() < 1e-6, "{t42:?}");
    }

    #[test]
    fn threshold_rejects_degenerate_inputs() {
        assert!(kcore_threshold(1, 2).is_err());
        assert!(kcore_threshold(2, 1).is_err());
    }

    #[test]
    fn threshold_minimizer_is_consistent() {
        let t = kcore_threshold(2, 3).unwrap();
        let x = t.minimizer_x.unwrap();
        assert!((threshold_objective(x, 2, 3) - t.lambda_crit).abs() < 1e-9);
        assert!((t.lambda_crit - 2.455_407_482).abs() < 1e-6);
    }

    #[test]
    fn fixpoint_reference_point() {
        // lambda=4, k=3, d=2: x* ~ 3.42297, fraction ~ 0.66467 (bisection oracle).
        let f = kcore_fixpoint(4.0, 3, 2).unwrap();
        let x = f.x_star.unwrap();
        assert!((x - 3.422_973_338).abs() < 1e-6, "x*={x}");
        assert!((f.core_fraction - 0.664_670_650).abs() < 1e-6);
        assert_eq!(f.cutoff_position, f.x_star);
        let residual = 4.0 * poisson_tail(x, 2).unwrap() - x;
        assert!(residual.abs() < RESIDUAL_TOL);
    }

    #[test]
    fn fixpoint_absent_below_threshold() {
        assert!(!kcore_fixpoint(3.0, 3, 2).unwrap().is_present());
        assert!(!kcore_fixpoint(3.2, 3, 2).unwrap().is_present());
        assert_eq!(kcore_fixpoint(3.0, 3, 2).unwrap().core_fraction, 0.0);
    }

    #[test]
    fn fixpoint_high_rate_limit() {
        let f = kcore_fixpoint(50.0, 3, 2).unwrap();
        let x = f.x_star.unwrap();
        assert!(x > 49.0 && x <= 50.0, "x*={x}");
    }

    #[test]
    fn fixpoint_k_one_is_exact() {
        let f = kcore_fixpoint(2.0, 1, 2).unwrap();
        assert_eq!(f.x_star, Some(2.0));
        assert!((f.core_fraction - (1.0 - (-2.0f64).exp())).abs() < 1e-13);
    }

    #[test]
    fn fixpoint_threshold_consistency() {
        for &(k, d) in &[(3usize, 2usize), (4, 2), (2, 3), (3, 3)] {
            let t = kcore_threshold(k, d).unwrap();
            let above = kcore_fixpoint(t.lambda_crit + 1e-3, k, d).unwrap();
            assert!(above.is_present(), "k={k} d={d} above threshold");
            let below = kcore_fixpoint(t.lambda_crit - 1e-3, k, d).unwrap();
            assert!(!below.is_present(), "k={k} d={d} below threshold");
        }
    }

    #[test]
    fn giant_fraction_reference_points() {
        assert!((giant_fraction(2.0, 2).unwrap() - 0.796_812_130).abs() < 1e-8);
        assert!((giant_fraction(1.2, 2).unwrap() - 0.313_698_331).abs() < 1e-8);
        assert_eq!(giant_fraction(0.9, 2).unwrap(), 0.0);
        assert_eq!(giant_fraction(0.5, 3).unwrap(), 0.0); // lambda (d-1) = 1 exactly
    }

    #[test]
    fn giant_fraction_residual() {
        for &(lambda, d) in &[(1.5, 2usize), (2.0, 2), (4.0, 2), (1.0, 3), (0.8, 4)] {
            let rho = giant_fraction(lambda, d).unwrap();
            if rho > 0.0 {
                let h = 1.0 - (-lambda * (1.0 - (1.0 - rho).powi(d as i32 - 1))).exp() - rho;
                assert!(h.abs() < RESIDUAL_TOL, "lambda={lambda} d={d}");
            }
        }
    }

    #[test]
    fn core_fraction_nondecreasing_in_lambda() {
        // Grid check over 50 rates spanning the threshold.
        let mut prev = 0.0;
        for i in 0..50 {
            let lambda = 3.0 + i as f64 * 0.05;
            let f = kcore_fixpoint(lambda, 3, 2).unwrap();
            assert!(
                f.core_fraction >= prev - 1e-12,
                "fraction dropped at lambda={lambda}"
            );
            prev = f.core_fraction;
        }
    }
}
