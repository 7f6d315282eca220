//! Search for the filter set that minimises the QCRB of `|ψ(α,{m})⟩|β⟩`.
//!
//! Candidates are scored from cached coherent-state sums: removing a set of
//! Fock components only subtracts a handful of terms from each moment sum, so
//! a score costs `O(k)` instead of a full state construction. The winning set
//! is rescored through [`score_filter_set`] before it is returned.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{coherent_amplitudes, filtered_coherent_state, truncation_dim, FilterSet, ModeMoments, DEGENERATE_MASS};
use crate::metrology::{bounds_for, qfi_port2_coherent, InputConfig, PhaseBounds};
use crate::special::binomial;

/// Largest number of candidate sets an exhaustive search will enumerate.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    Greedy,
    /// Exhaustive within [`EXHAUSTIVE_LIMIT`], greedy beyond.
    Auto,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Greedy => "greedy",
            Strategy::Auto => "auto",
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchSpec {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub k: usize,
    /// Candidate indices are `0..=n_max`.
    pub n_max: usize,
    pub strategy: Strategy,
}

impl SearchSpec {
    /// Spec with the default window `ceil(|α|² + 6|α| + 6)`.
    pub fn new(alpha: Complex64, beta: Complex64, k: usize, strategy: Strategy) -> Self {
        SearchSpec { alpha, beta, k, n_max: default_window(alpha), strategy }
    }

    pub fn window_size(&self) -> usize {
        self.n_max + 1
    }

    fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > self.window_size() {
            return Err(Error::InvalidInput(format!(
                "k = {} must lie in 1..={} for window [0, {}]",
                self.k,
                self.window_size(),
                self.n_max
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub best_set: FilterSet,
    pub bounds: PhaseBounds,
    pub evaluations: u64,
    pub strategy_used: Strategy,
}

pub fn default_window(alpha: Complex64) -> usize {
    let a2 = alpha.norm_sqr();
    (a2 + 6.0 * a2.sqrt() + 6.0).ceil() as usize
}

/// Bounds for `|ψ(α,{m})⟩|β⟩` from the constructed state.
pub fn score_filter_set(alpha: Complex64, beta: Complex64, filter: &FilterSet) -> Result<PhaseBounds> {
    let state = filtered_coherent_state(alpha, filter, truncation_dim(alpha, filter))?;
    bounds_for(&InputConfig::new(state, beta))
}

/// Cached sums of the truncated coherent state backing every candidate score.
struct Scorer {
    beta: Complex64,
    prob: Vec<f64>,
    /// `c̄ₙ cₙ₊₁ √(n+1)`
    hop1: Vec<Complex64>,
    /// `c̄ₙ cₙ₊₂ √((n+1)(n+2))`
    hop2: Vec<Complex64>,
    mass: f64,
    sum_n: f64,
    sum_a: Complex64,
    sum_a2: Complex64,
}

impl Scorer {
    fn new(alpha: Complex64, beta: Complex64, n_max: usize) -> Self {
        let dim = truncation_dim(alpha, &FilterSet::singleton(n_max));
        let c = coherent_amplitudes(alpha, dim);
        let prob: Vec<f64> = c.iter().map(|x| x.norm_sqr()).collect();
        let hop1: Vec<Complex64> = (0..dim - 1).map(|n| c[n].conj() * c[n + 1] * ((n + 1) as f64).sqrt()).collect();
        let hop2: Vec<Complex64> =
            (0..dim - 2).map(|n| c[n].conj() * c[n + 2] * (((n + 1) * (n + 2)) as f64).sqrt()).collect();
        Scorer {
            beta,
            mass: prob.iter().sum(),
            sum_n: prob.iter().enumerate().map(|(n, p)| n as f64 * p).sum(),
            sum_a: hop1.iter().sum(),
            sum_a2: hop2.iter().sum(),
            prob,
            hop1,
            hop2,
        }
    }

    /// QCRB of the filtered input, `+∞` when the filter is degenerate.
    fn qcrb(&self, set: &[usize]) -> f64 {
        let mut mass = self.mass;
        let mut sum_n = self.sum_n;
        let mut sum_a = self.sum_a;
        let mut sum_a2 = self.sum_a2;
        let in_set = |n: usize| set.binary_search(&n).is_ok();
        for (i, &m) in set.iter().enumerate() {
            mass -= self.prob[m];
            sum_n -= m as f64 * self.prob[m];
            // pair (m, m+1) always goes; (m−1, m) unless m−1 was already removed as its own pair
            sum_a -= self.hop1[m];
            if m >= 1 && !(i > 0 && set[i - 1] == m - 1) {
                sum_a -= self.hop1[m - 1];
            }
            sum_a2 -= self.hop2[m];
            if m >= 2 && !in_set(m - 2) {
                sum_a2 -= self.hop2[m - 2];
            }
        }
        if mass < DEGENERATE_MASS {
            return f64::INFINITY;
        }
        let moments = ModeMoments { mean_a: sum_a / mass, mean_a2: sum_a2 / mass, mean_n: sum_n / mass };
        match qfi_port2_coherent(&moments, self.beta) {
            Ok(f) if f > 0.0 => 1.0 / f.sqrt(),
            _ => f64::INFINITY,
        }
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    qcrb: f64,
    set: Vec<usize>,
}

impl Candidate {
    /// Lower QCRB wins; equal scores fall back to the lexicographically smaller set.
    fn better_than(&self, other: &Candidate) -> bool {
        match self.qcrb.total_cmp(&other.qcrb) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.set < other.set,
        }
    }
}

fn finish(alpha: Complex64, beta: Complex64, best: Candidate, evaluations: u64, strategy: Strategy) -> Result<SearchResult> {
    if !best.qcrb.is_finite() {
        return Err(Error::DegenerateFilter { retained: 0.0 });
    }
    let best_set = FilterSet::new(best.set)?;
    let bounds = score_filter_set(alpha, beta, &best_set)?;
    if bounds.theta_ratio < 1.0 {
        log::warn!("filter set {best_set} reports theta ratio {} below 1", bounds.theta_ratio);
    }
    Ok(SearchResult { best_set, bounds, evaluations, strategy_used: strategy })
}

/// Global minimum over every `k`-subset of the window.
pub fn exhaustive_search(spec: &SearchSpec) -> Result<SearchResult> {
    spec.validate()?;
    let n = spec.window_size();
    let k = spec.k;
    let candidates = binomial(n as u64, k as u64);
    if candidates > EXHAUSTIVE_LIMIT {
        return Err(Error::CombinatorialBlowup { candidates, limit: EXHAUSTIVE_LIMIT });
    }
    let scorer = Scorer::new(spec.alpha, spec.beta, spec.n_max);
    let leaders: Vec<Candidate> = (0..=n - k)
        .into_par_iter()
        .map(|first| {
            let mut set: Vec<usize> = (first..first + k).collect();
            let mut best = Candidate { qcrb: scorer.qcrb(&set), set: set.clone() };
            // lexicographic walk over the tail positions with `first` held fixed
            while advance_tail(&mut set, n) {
                let q = scorer.qcrb(&set);
                if q < best.qcrb {
                    best = Candidate { qcrb: q, set: set.clone() };
                }
            }
            best
        })
        .collect();
    let best = leaders.into_iter().reduce(|a, b| if b.better_than(&a) { b } else { a }).expect("non-empty window");
    finish(spec.alpha, spec.beta, best, candidates as u64, Strategy::Exhaustive)
}

/// Next combination in lexicographic order, leaving `set[0]` fixed.
fn advance_tail(set: &mut [usize], n: usize) -> bool {
    let k = set.len();
    let mut i = k;
    while i > 1 {
        i -= 1;
        if set[i] < n - (k - i) {
            set[i] += 1;
            for j in i + 1..k {
                set[j] = set[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Adds, one index at a time, the member that lowers the QCRB most.
pub fn greedy_search(spec: &SearchSpec) -> Result<SearchResult> {
    spec.validate()?;
    let scorer = Scorer::new(spec.alpha, spec.beta, spec.n_max);
    let mut chosen: Vec<usize> = Vec::with_capacity(spec.k);
    let mut evaluations = 0u64;
    let mut best = Candidate { qcrb: f64::INFINITY, set: Vec::new() };
    for _ in 0..spec.k {
        let mut step: Option<Candidate> = None;
        for idx in 0..=spec.n_max {
            if chosen.contains(&idx) {
                continue;
            }
            let mut trial = chosen.clone();
            let pos = trial.partition_point(|&x| x < idx);
            trial.insert(pos, idx);
            let cand = Candidate { qcrb: scorer.qcrb(&trial), set: trial };
            evaluations += 1;
            if step.as_ref().is_none_or(|s| cand.better_than(s)) {
                step = Some(cand);
            }
        }
        let step = step.expect("window larger than k");
        chosen = step.set.clone();
        best = step;
    }
    finish(spec.alpha, spec.beta, best, evaluations, Strategy::Greedy)
}

/// Dispatches on `spec.strategy`.
pub fn search(spec: &SearchSpec) -> Result<SearchResult> {
    match spec.strategy {
        Strategy::Exhaustive => exhaustive_search(spec),
        Strategy::Greedy => greedy_search(spec),
        Strategy::Auto => {
            if binomial(spec.window_size() as u64, spec.k as u64) <= EXHAUSTIVE_LIMIT {
                exhaustive_search(spec)
            } else {
                greedy_search(spec)
            }
        }
    }
}
