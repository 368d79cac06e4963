//! Random k-SAT generation and the pure-literal elimination algorithm.
//!
//! A literal is pure when its negation occurs in no remaining clause;
//! satisfying it deletes every clause containing it, which can make further
//! literals pure. The residual clause set is the same whatever order pure
//! literals are processed in (confluence), and the density at which the
//! residual stops emptying locates the algorithm's threshold.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{derive_stream, SeedSpec};
use crate::stats::wilson_interval;

/// A signed literal, encoded as `2*var` (positive) or `2*var + 1` (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Lit(u32);

impl Lit {
    pub fn positive(var: usize) -> Lit {
        Lit(2 * var as u32)
    }

    pub fn negative(var: usize) -> Lit {
        Lit(2 * var as u32 + 1)
    }

    pub fn var(self) -> usize {
        (self.0 / 2) as usize
    }

    pub fn is_positive(self) -> bool {
        self.0.is_multiple_of(2)
    }

    pub fn negated(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    /// Index into per-literal arrays.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// DIMACS encoding: 1-based variable, sign for polarity.
    pub fn to_dimacs(self) -> i64 {
        let v = self.var() as i64 + 1;
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(code: i64) -> Result<Lit> {
        if code == 0 {
            return Err(Error::invalid("literal 0 is the clause terminator"));
        }
        let var = (code.unsigned_abs() - 1) as usize;
        Ok(if code > 0 {
            Lit::positive(var)
        } else {
            Lit::negative(var)
        })
    }
}

impl std::fmt::Display for Lit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A CNF formula whose clauses all have the same width over distinct
/// variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnfFormula {
    n_vars: usize,
    clauses: Vec<Vec<Lit>>,
}

impl CnfFormula {
    /// Validates literal ranges, uniform clause width, and per-clause
    /// variable distinctness.
    pub fn new(n_vars: usize, clauses: Vec<Vec<Lit>>) -> Result<Self> {
        let mut width: Option<usize> = None;
        for (i, clause) in clauses.iter().enumerate() {
            match width {
                None => width = Some(clause.len()),
                Some(w) if w != clause.len() => {
                    return Err(Error::invalid(format!(
                        "clause {i} has width {}, expected {w}",
                        clause.len()
                    )));
                }
                _ => {}
            }
            if clause.is_empty() {
                return Err(Error::invalid(format!("clause {i} is empty")));
            }
            let mut vars: Vec<usize> = clause.iter().map(|l| l.var()).collect();
            if let Some(&v) = vars.iter().find(|&&v| v >= n_vars) {
                return Err(Error::invalid(format!(
                    "clause {i} uses variable {v}, but n_vars={n_vars}"
                )));
            }
            vars.sort_unstable();
            if vars.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("clause {i} repeats a variable")));
            }
        }
        Ok(CnfFormula { n_vars, clauses })
    }

    pub fn empty(n_vars: usize) -> Self {
        CnfFormula {
            n_vars,
            clauses: Vec::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clause_count(&self) -> usize {
        self.clauses.len()
    }

    pub fn clause(&self, i: usize) -> &[Lit] {
        &self.clauses[i]
    }

    pub fn clauses(&self) -> impl Iterator<Item = &[Lit]> {
        self.clauses.iter().map(|c| c.as_slice())
    }

    /// Writes the standard DIMACS form: `p cnf n m`, clauses as signed
    /// 1-based integers terminated by 0.
    pub fn write_dimacs<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "p cnf {} {}", self.n_vars, self.clauses.len())?;
        for clause in &self.clauses {
            for lit in clause {
                write!(w, "{} ", lit.to_dimacs())?;
            }
            writeln!(w, "0")?;
        }
        Ok(())
    }

    pub fn to_dimacs_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("write to Vec");
        String::from_utf8(buf).expect("dimacs is ascii")
    }

    /// Parses DIMACS, tolerating comment lines and multi-line clauses.
    pub fn parse_dimacs<R: BufRead>(reader: R) -> Result<Self> {
        let mut n_vars: Option<usize> = None;
        let mut declared_clauses = 0usize;
        let mut clauses: Vec<Vec<Lit>> = Vec::new();
        let mut current: Vec<Lit> = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if line.starts_with('p') {
                let parts: Vec<&str> = line.split_whitespace().collect();
                if parts.len() != 4 || parts[1] != "cnf" {
                    return Err(Error::Parse {
                        line: idx + 1,
                        message: format!("bad problem line `{line}`"),
                    });
                }
                n_vars = Some(parts[2].parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: "bad variable count".into(),
                })?);
                declared_clauses = parts[3].parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: "bad clause count".into(),
                })?;
                continue;
            }
            if n_vars.is_none() {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: "clause before `p cnf` header".into(),
                });
            }
            for tok in line.split_whitespace() {
                let code: i64 = tok.parse().map_err(|_| Error::Parse {
                    line: idx + 1,
                    message: format!("bad literal `{tok}`"),
                })?;
                if code == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(Lit::from_dimacs(code)?);
                }
            }
        }
        let n_vars = n_vars.ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing `p cnf` header".into(),
        })?;
        if !current.is_empty() {
            return Err(Error::invalid("unterminated final clause"));
        }
        if clauses.len() != declared_clauses {
            return Err(Error::invalid(format!(
                "header declares {declared_clauses} clauses, found {}",
                clauses.len()
            )));
        }
        CnfFormula::new(n_vars, clauses)
    }

    pub fn parse_dimacs_str(s: &str) -> Result<Self> {
        Self::parse_dimacs(s.as_bytes())
    }
}

/// Samples a random k-SAT formula: each clause independently picks k distinct
/// variables uniformly and flips a fair coin per polarity. Duplicate clauses
/// and complementary pairs are allowed, matching the i.i.d. clause model.
pub fn sample_ksat(
    n_vars: usize,
    n_clauses: usize,
    k: usize,
    seed: SeedSpec,
) -> Result<CnfFormula> {
    if k == 0 || k > n_vars {
        return Err(Error::invalid(format!(
            "need 1 <= k <= n_vars, got k={k} n_vars={n_vars}"
        )));
    }
    let mut rng = derive_stream(seed);
    let mut clauses = Vec::with_capacity(n_clauses);
    let mut vars: Vec<usize> = Vec::with_capacity(k);
    for _ in 0..n_clauses {
        vars.clear();
        while vars.len() < k {
            let v = rng.random_range(0..n_vars);
            if !vars.contains(&v) {
                vars.push(v);
            }
        }
        let clause: Vec<Lit> = vars
            .iter()
            .map(|&v| {
                if rng.random::<bool>() {
                    Lit::positive(v)
                } else {
                    Lit::negative(v)
                }
            })
            .collect();
        clauses.push(clause);
    }
    CnfFormula::new(n_vars, clauses)
}

/// Record of one pure-literal elimination run.
#[derive(Debug, Clone, Serialize)]
pub struct EliminationTrace {
    /// Literals set true, in elimination order, with their step index.
    pub eliminated_literals: Vec<(Lit, usize)>,
    /// Sorted ids of clauses removed (each contains an eliminated literal).
    pub removed_clause_ids: Vec<usize>,
    /// Sorted ids of the clauses that remain.
    pub residual_clause_ids: Vec<usize>,
}

impl EliminationTrace {
    /// True when elimination emptied the formula.
    pub fn succeeded(&self) -> bool {
        self.residual_clause_ids.is_empty()
    }

    /// View of the residual clauses inside `formula`.
    pub fn residual<'a>(&'a self, formula: &'a CnfFormula) -> impl Iterator<Item = &'a [Lit]> {
        self.residual_clause_ids.iter().map(|&i| formula.clause(i))
    }
}

/// Runs pure-literal elimination to exhaustion.
///
/// Per-literal occurrence counters plus a worklist of newly pure literals
/// give O(total literal occurrences) time. The residual is order-independent
/// (confluence), so `order_seed`, which randomizes the pop position in the
/// pending worklist, only reshuffles the trace. A variable with no
/// occurrences at all is ignored: both its literals are vacuously pure but
/// eliminate nothing.
pub fn pure_literal_eliminate(formula: &CnfFormula, order_seed: SeedSpec) -> EliminationTrace {
    let n_lits = 2 * formula.n_vars();
    let mut occurrences = vec![0usize; n_lits];
    for clause in formula.clauses() {
        for lit in clause {
            occurrences[lit.index()] += 1;
        }
    }
    // clause ids per literal, for clause removal
    let mut clause_lists: Vec<Vec<usize>> = vec![Vec::new(); n_lits];
    for (i, clause) in formula.clauses().enumerate() {
        for lit in clause {
            clause_lists[lit.index()].push(i);
        }
    }

    let mut rng = derive_stream(order_seed);
    let mut pending: Vec<Lit> = Vec::new();
    let mut enqueued = vec![false; n_lits];
    for var in 0..formula.n_vars() {
        for lit in [Lit::positive(var), Lit::negative(var)] {
            if occurrences[lit.index()] > 0 && occurrences[lit.negated().index()] == 0 {
                pending.push(lit);
                enqueued[lit.index()] = true;
            }
        }
    }

    let mut clause_removed = vec![false; formula.clause_count()];
    let mut eliminated_literals = Vec::new();
    let mut removed_clause_ids = Vec::new();
    let mut step = 0usize;

    while !pending.is_empty() {
        let pick = rng.random_range(0..pending.len());
        let lit = pending.swap_remove(pick);
        if occurrences[lit.index()] == 0 {
            continue; // became occurrence-free while queued; nothing to do
        }
        eliminated_literals.push((lit, step));
        step += 1;
        for &cid in &clause_lists[lit.index()] {
            if clause_removed[cid] {
                continue;
            }
            clause_removed[cid] = true;
            removed_clause_ids.push(cid);
            for other in formula.clause(cid) {
                let idx = other.index();
                occurrences[idx] -= 1;
                if occurrences[idx] == 0 {
                    let opposite = other.negated();
                    if occurrences[opposite.index()] > 0 && !enqueued[opposite.index()] {
                        pending.push(opposite);
                        enqueued[opposite.index()] = true;
                    }
                }
            }
        }
    }

    removed_clause_ids.sort_unstable();
    let residual_clause_ids: Vec<usize> = (0..formula.clause_count())
        .filter(|&i| !clause_removed[i])
        .collect();
    EliminationTrace {
        eliminated_literals,
        removed_clause_ids,
        residual_clause_ids,
    }
}

/// Monte Carlo estimate of the pure-literal success probability.
#[derive(Debug, Clone, Serialize)]
pub struct SuccessEstimate {
    pub n_vars: usize,
    pub density: f64,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub fraction: f64,
    /// Wilson 95% score interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl SuccessEstimate {
    pub fn from_outcomes(n_vars: usize, density: f64, k: usize, outcomes: &[bool]) -> Self {
        let trials = outcomes.len();
        let successes = outcomes.iter().filter(|&&b| b).count();
        let (ci_low, ci_high) = wilson_interval(successes as u64, trials as u64);
        SuccessEstimate {
            n_vars,
            density,
            k,
            trials,
            successes,
            fraction: successes as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }
}

/// Per-trial elimination outcomes at clause density `density` (clauses per
/// variable). Trial t samples its formula from stream `seed.stream_index +
/// 2t` and its elimination order from the following stream.
pub fn pure_literal_success_outcomes(
    n_vars: usize,
    density: f64,
    k: usize,
    trials: usize,
    seed: SeedSpec,
) -> Result<Vec<bool>> {
    if trials == 0 {
        return Err(Error::invalid("trials must be >= 1"));
    }
    if !density.is_finite() || density < 0.0 {
        return Err(Error::invalid(format!("density={density} must be >= 0")));
    }
    let n_clauses = (density * n_vars as f64).round() as usize;
    let mut outcomes = Vec::with_capacity(trials);
    for t in 0..trials {
        let base = seed.stream_index.wrapping_add(2 * t as u64);
        let formula = sample_ksat(n_vars, n_clauses, k, seed.with_stream(base))?;
        let trace = pure_literal_eliminate(&formula, seed.with_stream(base.wrapping_add(1)));
        outcomes.push(trace.succeeded());
    }
    Ok(outcomes)
}

/// Fraction of seeded trials in which elimination empties the formula, with
/// a Wilson 95% interval.
pub fn pure_literal_success_probability(
    n_vars: usize,
    density: f64,
    k: usize,
    trials: usize,
    seed: SeedSpec,
) -> Result<SuccessEstimate> {
    let outcomes = pure_literal_success_outcomes(n_vars, density, k, trials, seed)?;
    Ok(SuccessEstimate::from_outcomes(
        n_vars, density, k, &outcomes,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn seed(i: u64) -> SeedSpec {
        SeedSpec::new(0x5A7, i)
    }

    fn clause(lits: &[i64]) -> Vec<Lit> {
        lits.iter().map(|&c| Lit::from_dimacs(c).unwrap()).collect()
    }

    #[test]
    fn literal_encoding_round_trips() {
        for code in [-5i64, -1, 1, 3, 7] {
            let lit = Lit::from_dimacs(code).unwrap();
            assert_eq!(lit.to_dimacs(), code);
            assert_eq!(lit.negated().negated(), lit);
            assert_ne!(lit.negated().is_positive(), lit.is_positive());
        }
        assert!(Lit::from_dimacs(0).is_err());
    }

    #[test]
    fn formula_validation() {
        assert!(CnfFormula::new(2, vec![clause(&[1, -2])]).is_ok());
        // repeated variable in a clause
        assert!(CnfFormula::new(2, vec![clause(&[1, -1])]).is_err());
        // variable out of range
        assert!(CnfFormula::new(2, vec![clause(&[1, 3])]).is_err());
        // ragged widths
        assert!(CnfFormula::new(3, vec![clause(&[1, 2]), clause(&[3])]).is_err());
    }

    #[test]
    fn dimacs_round_trip_is_bit_exact() {
        let f = CnfFormula::new(3, vec![clause(&[1, -2]), clause(&[-1, 3])]).unwrap();
        let text = f.to_dimacs_string();
        assert_eq!(text, "p cnf 3 2\n1 -2 0\n-1 3 0\n");
        let back = CnfFormula::parse_dimacs_str(&text).unwrap();
        assert_eq!(back, f);
        assert_eq!(back.to_dimacs_string(), text);
    }

    #[test]
    fn dimacs_parser_handles_comments_and_validates_count() {
        let ok = "c header comment\np cnf 2 1\n1 2 0\n";
        assert_eq!(CnfFormula::parse_dimacs_str(ok).unwrap().clause_count(), 1);
        let wrong_count = "p cnf 2 2\n1 2 0\n";
        assert!(CnfFormula::parse_dimacs_str(wrong_count).is_err());
        assert!(CnfFormula::parse_dimacs_str("1 2 0\n").is_err());
    }

    #[test]
    fn sample_ksat_empty_formula() {
        let f = sample_ksat(10, 0, 3, seed(0)).unwrap();
        assert_eq!(f.clause_count(), 0);
    }

    #[test]
    fn sample_ksat_distinct_vars_per_clause() {
        // By construction; assert across a large batch of sampled clauses.
        let f = sample_ksat(30, 10_000, 3, seed(1)).unwrap();
        for clause in f.clauses() {
            let mut vars: Vec<usize> = clause.iter().map(|l| l.var()).collect();
            vars.sort_unstable();
            vars.dedup();
            assert_eq!(vars.len(), 3);
        }
        assert!(sample_ksat(2, 5, 3, seed(2)).is_err());
    }

    #[test]
    fn sample_ksat_literal_occurrence_mean() {
        // At density c, each literal occurs on average k*c/2 times.
        let n = 2000;
        let density = 1.5;
        let k = 3;
        let f = sample_ksat(n, (density * n as f64) as usize, k, seed(3)).unwrap();
        let mut counts = vec![0f64; 2 * n];
        for clause in f.clauses() {
            for lit in clause {
                counts[lit.index()] += 1.0;
            }
        }
        let mean = counts.iter().sum::<f64>() / counts.len() as f64;
        let expect = k as f64 * density / 2.0;
        // Mean over 2n literals of a Binomial-ish count; 3 sigma of the
        // grand-mean estimator.
        let sd = (expect / (2 * n) as f64).sqrt();
        assert!(
            (mean - expect).abs() < 3.0 * sd,
            "mean={mean} expect={expect}"
        );
    }

    #[test]
    fn elimination_hand_trace_single_pure() {
        // (x0 v x1) & (~x0 v x1): x1 pure, removes both clauses.
        let f = CnfFormula::new(2, vec![clause(&[1, 2]), clause(&[-1, 2])]).unwrap();
        let trace = pure_literal_eliminate(&f, seed(4));
        assert!(trace.succeeded());
        assert_eq!(trace.removed_clause_ids, vec![0, 1]);
    }

    #[test]
    fn elimination_hand_trace_cascade() {
        // (x0 v x1) & (~x1 v x2): x2 pure removes clause 1, then x0 (or x1).
        let f = CnfFormula::new(3, vec![clause(&[1, 2]), clause(&[-2, 3])]).unwrap();
        let trace = pure_literal_eliminate(&f, seed(5));
        assert!(trace.succeeded());
        assert_eq!(trace.removed_clause_ids, vec![0, 1]);
    }

    #[test]
    fn elimination_stuck_formula() {
        // All four literals over {x0, x1} occur: nothing is pure.
        let f = CnfFormula::new(
            2,
            vec![
                clause(&[1, 2]),
                clause(&[-1, -2]),
                clause(&[1, -2]),
                clause(&[-1, 2]),
            ],
        )
        .unwrap();
        let trace = pure_literal_eliminate(&f, seed(6));
        assert!(!trace.succeeded());
        assert_eq!(trace.residual_clause_ids, vec![0, 1, 2, 3]);
        assert!(trace.eliminated_literals.is_empty());
    }

    #[test]
    fn elimination_is_confluent() {
        // 20 elimination orders leave the same residual clause set.
        for i in 0..10 {
            let f = sample_ksat(60, 150, 3, seed(100 + i)).unwrap();
            let reference = pure_literal_eliminate(&f, seed(0)).residual_clause_ids;
            for j in 1..20 {
                let other = pure_literal_eliminate(&f, seed(j)).residual_clause_ids;
                assert_eq!(reference, other, "formula {i}, order seed {j}");
            }
        }
    }

    #[test]
    fn elimination_is_sound() {
        // Setting the eliminated literals true satisfies every removed clause,
        // and no variable is eliminated with both polarities.
        for i in 0..10 {
            let f = sample_ksat(80, 180, 3, seed(200 + i)).unwrap();
            let trace = pure_literal_eliminate(&f, seed(300 + i));
            let assigned: HashSet<Lit> =
                trace.eliminated_literals.iter().map(|&(l, _)| l).collect();
            for &l in &assigned {
                assert!(!assigned.contains(&l.negated()), "contradictory assignment");
            }
            for &cid in &trace.removed_clause_ids {
                assert!(
                    f.clause(cid).iter().any(|l| assigned.contains(l)),
                    "removed clause {cid} not satisfied"
                );
            }
        }
    }

    #[test]
    fn elimination_replay_confirms_purity_at_each_step() {
        // Replaying the trace, each eliminated literal's negation is absent
        // from the clauses still standing at its step.
        for i in 0..10 {
            let f = sample_ksat(60, 130, 3, seed(500 + i)).unwrap();
            let trace = pure_literal_eliminate(&f, seed(600 + i));
            let mut removed = vec![false; f.clause_count()];
            for &(lit, _) in &trace.eliminated_literals {
                let negation_present = f
                    .clauses()
                    .enumerate()
                    .any(|(cid, c)| !removed[cid] && c.contains(&lit.negated()));
                assert!(!negation_present, "literal {lit} was not pure at its step");
                for (cid, c) in f.clauses().enumerate() {
                    if c.contains(&lit) {
                        removed[cid] = true;
                    }
                }
            }
            let replay_removed: Vec<usize> =
                (0..f.clause_count()).filter(|&c| removed[c]).collect();
            assert_eq!(replay_removed, trace.removed_clause_ids);
        }
    }

    #[test]
    fn elimination_failure_is_monotone_in_clauses() {
        // Adding clauses never shrinks the residual set (on nested formulas).
        for i in 0..5 {
            let full = sample_ksat(50, 140, 3, seed(400 + i)).unwrap();
            let prefix_clauses: Vec<Vec<Lit>> =
                full.clauses().take(90).map(|c| c.to_vec()).collect();
            let prefix = CnfFormula::new(50, prefix_clauses).unwrap();
            let small: HashSet<usize> = pure_literal_eliminate(&prefix, seed(7))
                .residual_clause_ids
                .into_iter()
                .collect();
            let large: HashSet<usize> = pure_literal_eliminate(&full, seed(8))
                .residual_clause_ids
                .into_iter()
                .collect();
            assert!(
                small.iter().all(|id| large.contains(id)),
                "formula {i}: residual shrank when clauses were added"
            );
        }
    }

    #[test]
    fn success_probability_endpoints() {
        let empty = pure_literal_success_probability(100, 0.0, 3, 20, seed(9)).unwrap();
        assert_eq!(empty.fraction, 1.0);

        let sub = pure_literal_success_probability(300, 0.5, 3, 40, seed(10)).unwrap();
        assert!(sub.fraction > 0.95, "subcritical fraction {}", sub.fraction);

        let sup = pure_literal_success_probability(300, 3.0, 3, 40, seed(11)).unwrap();
        assert!(
            sup.fraction < 0.05,
            "supercritical fraction {}",
            sup.fraction
        );

        assert!(pure_literal_success_probability(10, 1.0, 3, 0, seed(12)).is_err());
    }

    #[test]
    fn success_probability_is_deterministic() {
        let a = pure_literal_success_probability(200, 1.6, 3, 30, seed(13)).unwrap();
        let b = pure_literal_success_probability(200, 1.6, 3, 30, seed(13)).unwrap();
        assert_eq!(a.successes, b.successes);
    }
}
