//! Strategies and property checks shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use nfcs::experiments::{ExperimentConfig, ExperimentId};
use nfcs::oracle::{apply_jy, apply_jy_block, beam_splitter_apply, beam_splitter_inverse, rotate_x};
use nfcs::search::search;
use nfcs::{
    coherent_state, filtered_coherent_state, run_experiment, snfcs_moments_closed_form, truncation_dim, Complex64,
    FilterSet, SearchSpec, Strategy as SearchStrategy, TwoModeAmplitudes,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

pub const UNITARITY_TOL: f64 = 1e-12;
pub const MOMENT_TOL: f64 = 1e-9;
pub const EMPTY_FILTER_TOL: f64 = 1e-14;

/// Normalised two-mode state with each dimension in `1..=8`.
pub fn two_mode_state() -> impl Strategy<Value = TwoModeAmplitudes> {
    (1usize..=8, 1usize..=8)
        .prop_flat_map(|(d1, d2)| {
            (Just(d1), Just(d2), prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), d1 * d2))
        })
        .prop_filter("needs nonzero norm", |(_, _, v)| v.iter().map(|(a, b)| a * a + b * b).sum::<f64>() > 1e-6)
        .prop_map(|(d1, d2, v)| {
            let norm = v.iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
            let amps = v.into_iter().map(|(a, b)| Complex64::new(a / norm, b / norm)).collect();
            TwoModeAmplitudes::from_vec(d1, d2, amps).expect("dimensions match")
        })
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn block_mass(s: &TwoModeAmplitudes, total: usize) -> f64 {
    s.block(total).iter().map(|x| x.norm_sqr()).sum()
}

pub fn check_unitarity(s: &TwoModeAmplitudes) -> Result<(), TestCaseError> {
    let out = beam_splitter_apply(s);
    let dev = (out.norm_sqr().sqrt() - 1.0).abs();
    ensure(dev < UNITARITY_TOL, || format!("norm drift {dev:.3e} for dims {:?}", s.dims()))
}

pub fn check_inverse_round_trip(s: &TwoModeAmplitudes) -> Result<(), TestCaseError> {
    let back = beam_splitter_inverse(&beam_splitter_apply(s));
    let (d1, d2) = s.dims();
    let mut err: f64 = 0.0;
    for n1 in 0..back.dims().0 {
        for n2 in 0..back.dims().1 {
            let want = if n1 < d1 && n2 < d2 { s.get(n1, n2) } else { Complex64::new(0.0, 0.0) };
            err = err.max((back.get(n1, n2) - want).norm());
        }
    }
    ensure(err < UNITARITY_TOL, || format!("round trip error {err:.3e}"))
}

/// `J_y` and `exp(−iθJ_x)` act within each total-photon block.
pub fn check_block_conservation(s: &TwoModeAmplitudes, theta: f64) -> Result<(), TestCaseError> {
    let jy = apply_jy(s);
    for total in 0..=jy.max_total() {
        let want = if total <= s.max_total() { apply_jy_block(&s.block(total), total) } else { vec![] };
        let got = jy.block(total);
        for (n1, g) in got.iter().enumerate() {
            let w = want.get(n1).copied().unwrap_or_default();
            ensure((g - w).norm() < 1e-12, || format!("J_y mixes blocks at N={total}, n1={n1}"))?;
        }
    }
    let rotated = rotate_x(s, theta);
    for total in 0..=rotated.max_total() {
        let before = block_mass(s, total);
        let after = block_mass(&rotated, total);
        ensure((before - after).abs() < 1e-12, || {
            format!("block N={total} mass {before:.15} became {after:.15} at theta={theta}")
        })?;
    }
    Ok(())
}

/// Runs a strategy through a deterministic runner and reports the first failure.
pub fn run_property<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<u32, String> {
    let mut runner = TestRunner::new_with_rng(
        Config { cases, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner.run(&strategy, test).map(|()| cases).map_err(|e| e.to_string())
}

/// Grid `|α| ∈ {0.5,1,2,3}` × phases `{0, π/4, π/2}`.
pub fn alpha_grid() -> Vec<Complex64> {
    let mut out = Vec::new();
    for abs in [0.5, 1.0, 2.0, 3.0] {
        for t in [0.0, 0.25, 0.5] {
            out.push(Complex64::from_polar(abs, t * PI));
        }
    }
    out
}

/// Closed-form against brute-force moments for `m ∈ 0..=12`; returns the worst scaled deviation.
pub fn moment_agreement() -> Result<f64, String> {
    let mut worst: f64 = 0.0;
    for alpha in alpha_grid() {
        for m in 0..=12 {
            let filter = FilterSet::singleton(m);
            let state = filtered_coherent_state(alpha, &filter, truncation_dim(alpha, &filter)).map_err(|e| e.to_string())?;
            let brute = state.moments();
            let closed = snfcs_moments_closed_form(alpha, m).map_err(|e| e.to_string())?;
            let devs = [
                (brute.mean_a - closed.mean_a).norm() / closed.mean_a.norm().max(1.0),
                (brute.mean_a2 - closed.mean_a2).norm() / closed.mean_a2.norm().max(1.0),
                (brute.mean_n - closed.mean_n).abs() / closed.mean_n.max(1.0),
            ];
            let dev = devs.into_iter().fold(0.0, f64::max);
            if dev > MOMENT_TOL {
                return Err(format!("alpha={alpha} m={m}: deviation {dev:.3e}"));
            }
            worst = worst.max(dev);
        }
    }
    Ok(worst)
}

pub fn check_empty_filter(alpha: Complex64, dim: usize) -> Result<(), TestCaseError> {
    let a = filtered_coherent_state(alpha, &FilterSet::empty(), dim).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let b = coherent_state(alpha, dim).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let err = a.amps().iter().zip(b.amps()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    ensure(a.dim() == b.dim() && err <= EMPTY_FILTER_TOL, || format!("alpha={alpha} dim={dim}: error {err:.3e}"))
}

/// `(α, dim)` pairs whose truncated coherent norm stays within the construction guard.
pub fn coherent_input() -> impl Strategy<Value = (Complex64, usize)> {
    (0.0f64..4.0, 0.0f64..2.0).prop_flat_map(|(abs, t)| {
        let alpha = Complex64::from_polar(abs, t * PI);
        let min_dim = truncation_dim(alpha, &FilterSet::empty());
        (Just(alpha), min_dim..min_dim + 20)
    })
}

/// Two identical searches give identical results, bit for bit.
pub fn search_determinism() -> Result<usize, String> {
    let mut checked = 0;
    for (alpha, beta, k) in [
        (Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0), 2),
        (Complex64::new(0.0, 3.0), Complex64::new(3.0, 0.0), 3),
        (Complex64::from_polar(1.5, PI / 4.0), Complex64::new(1.0, 0.0), 2),
    ] {
        for strategy in [SearchStrategy::Exhaustive, SearchStrategy::Greedy] {
            let spec = SearchSpec::new(alpha, beta, k, strategy);
            let a = search(&spec).map_err(|e| e.to_string())?;
            let b = search(&spec).map_err(|e| e.to_string())?;
            if a != b || a.bounds.qcrb.to_bits() != b.bounds.qcrb.to_bits() {
                return Err(format!("search {alpha} k={k} {strategy:?}: {:?} vs {:?}", a.best_set, b.best_set));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

/// Two runs of each listed experiment write byte-identical files.
pub fn csv_byte_stability() -> Result<usize, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let configs = [
        ExperimentConfig::preset(ExperimentId::Fig2),
        ExperimentConfig::preset(ExperimentId::Fig6),
        ExperimentConfig::from_json(r#"{"experiment": "fig5", "alpha": [[0, 2]], "k": {"start": 1, "end": 2}}"#)
            .map_err(|e| e.to_string())?,
        ExperimentConfig::from_json(r#"{"experiment": "custom", "alpha": [2], "beta": 3, "filter": [4]}"#)
            .map_err(|e| e.to_string())?,
    ];
    for cfg in &configs {
        let first = nfcs::experiments::run_and_write(cfg, &dir.path().join("a")).map_err(|e| e.to_string())?;
        let second = nfcs::experiments::run_and_write(cfg, &dir.path().join("b")).map_err(|e| e.to_string())?;
        let (x, y) = (std::fs::read(&first).map_err(|e| e.to_string())?, std::fs::read(&second).map_err(|e| e.to_string())?);
        if x != y {
            return Err(format!("{} differs between runs", cfg.experiment));
        }
        let in_memory = run_experiment(cfg).map_err(|e| e.to_string())?.to_csv_string();
        if in_memory.as_bytes() != x.as_slice() {
            return Err(format!("{} in-memory CSV differs from the written file", cfg.experiment));
        }
    }
    Ok(configs.len())
}
