use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentId};
use super::table::{Column, ColumnType, ResultTable, Value};
use super::stamp;
use crate::error::Result;
use crate::fock::{
    filtered_coherent_state, squeezed_truncation_dim, squeezed_vacuum, truncation_dim, FilterSet, FockAmplitudes,
};
use crate::metrology::{
    bounds_for, heisenberg_scaling_qcrb, matched_filter_index, matched_squeezing, qcrb_ecs_closed_form,
    qcrb_ocs_closed_form, qcrb_snfcs_closed_form, qcrb_squeezed_vacuum, ecs_mean_photons, ocs_mean_photons,
    InputConfig,
};
use crate::search::{search, SearchSpec, Strategy};
use crate::special::poisson_weight;
use crate::wigner::{default_extent, negativity_volume, DEFAULT_STEP};

type Row = (Vec<Value>, Vec<usize>);

/// Evaluates every sweep point in parallel, keeping rows in sweep order.
fn sweep<P, L, F>(points: &[P], label: L, f: F) -> Result<(Vec<Vec<Value>>, BTreeSet<usize>)>
where
    P: Sync,
    L: Fn(&P) -> String + Sync,
    F: Fn(&P) -> Result<Row> + Sync,
{
    let rows: Vec<Row> = points.par_iter().map(|p| f(p).map_err(|e| e.at_row(label(p)))).collect::<Result<_>>()?;
    let mut dims = BTreeSet::new();
    let mut cells = Vec::with_capacity(rows.len());
    for (row, d) in rows {
        dims.extend(d);
        cells.push(row);
    }
    Ok((cells, dims))
}

fn columns(spec: &[(&str, ColumnType)]) -> Vec<Column> {
    spec.iter().map(|(n, t)| Column::new(n, *t)).collect()
}

fn complex_cells(z: Complex64) -> [Value; 2] {
    [Value::from(z.re), Value::from(z.im)]
}

fn fmt_complex(z: Complex64) -> String {
    format!("{}{:+}i", super::format_float(z.re), z.im)
}

use ColumnType::{Bool, Float, Int, Text};

const POINT: [(&str, ColumnType); 4] = [("alpha_re", Float), ("alpha_im", Float), ("beta_re", Float), ("beta_im", Float)];

fn with_point(extra: &[(&'static str, ColumnType)]) -> Vec<Column> {
    let mut spec: Vec<(&str, ColumnType)> = POINT.to_vec();
    spec.extend_from_slice(extra);
    columns(&spec)
}

fn snfcs_state(cfg: &ExperimentConfig, alpha: Complex64, filter: &FilterSet) -> Result<FockAmplitudes> {
    let dim = cfg.overrides.dim.unwrap_or_else(|| truncation_dim(alpha, filter));
    filtered_coherent_state(alpha, filter, dim)
}

/// Runs the configured experiment; unset parameters take the figure defaults.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    let cfg = config.with_defaults();
    let hash = config.hash();
    let (mut table, dims) = match cfg.experiment {
        ExperimentId::Fig2 => fig2(&cfg)?,
        ExperimentId::Fig3 => fig3(&cfg)?,
        ExperimentId::Fig4 => fig4(&cfg)?,
        ExperimentId::Fig5 => fig5(&cfg)?,
        ExperimentId::Fig6 => fig6(&cfg)?,
        ExperimentId::Fig7 => fig7(&cfg)?,
        ExperimentId::Custom => custom(&cfg)?,
    };
    stamp(&mut table, cfg.experiment.as_str(), &hash, &dims);
    log::info!("{}: {} rows", cfg.experiment, table.rows.len());
    Ok(table)
}

fn points(cfg: &ExperimentConfig) -> Result<Vec<(Complex64, Complex64)>> {
    cfg.alphas()?.into_iter().map(|a| Ok((a, cfg.beta_for(a)?))).collect()
}

fn finish(cols: Vec<Column>, (rows, dims): (Vec<Vec<Value>>, BTreeSet<usize>)) -> Result<(ResultTable, BTreeSet<usize>)> {
    let mut t = ResultTable::new(cols);
    for r in rows {
        t.push_row(r)?;
    }
    Ok((t, dims))
}

/// QCRB of single-filter states against the filtered index `m`.
fn fig2(cfg: &ExperimentConfig) -> Result<(ResultTable, BTreeSet<usize>)> {
    let m_range = cfg.m.expect("default m range");
    let grid: Vec<(Complex64, Complex64, usize)> =
        points(cfg)?.into_iter().flat_map(|(a, b)| m_range.iter().map(move |m| (a, b, m))).collect();
    let cols = with_point(&[
        ("m", Int),
        ("weight", Float),
        ("mean_n", Float),
        ("qcrb_S", Float),
        ("qcrb_closed", Float),
        ("sql", Float),
        ("hl", Float),
        ("theta_ratio", Float),
    ]);
    let rows = sweep(
        &grid,
        |(a, b, m)| format!("fig2 row alpha={} beta={} m={m}", fmt_complex(*a), fmt_complex(*b)),
        |&(a, b, m)| {
            let state = snfcs_state(cfg, a, &FilterSet::singleton(m))?;
            let mean_n = state.moments().mean_n;
            let dim = state.dim();
            let bounds = bounds_for(&InputConfig::new(state, b))?;
            let closed = qcrb_snfcs_closed_form(a, m, b)?;
            let mut row: Vec<Value> = complex_cells(a).into_iter().chain(complex_cells(b)).collect();
            row.extend([
                Value::from(m),
                poisson_weight(a.norm_sqr(), m as u64).into(),
                mean_n.into(),
                bounds.qcrb.into(),
                closed.qcrb.into(),
                bounds.sql.into(),
                bounds.hl.into(),
                bounds.theta_ratio.into(),
            ]);
            Ok((row, vec![dim]))
        },
    )?;
    finish(cols, rows)
}

/// Scaling of the matched single-filter state with total photon number.
fn fig3(cfg: &ExperimentConfig) -> Result<(ResultTable, BTreeSet<usize>)> {
    let grid = points(cfg)?;
    let cols = with_point(&[
        ("alpha_sq", Float),
        ("m", Int),
        ("n_total", Float),
        ("qcrb_S", Float),
        ("qcrb_asymptotic", Float),
        ("sql", Float),
        ("hl", Float),
        ("theta_ratio", Float),
    ]);
    let rows = sweep(
        &grid,
        |(a, b)| format!("fig3 row alpha={} beta={}", fmt_complex(*a), fmt_complex(*b)),
        |&(a, b)| {
            let a2 = a.norm_sqr();
            let m = matched_filter_index(a2);
            let state = snfcs_state(cfg, a, &FilterSet::singleton(m))?;
            let dim = state.dim();
            let mean_n = state.moments().mean_n;
            let bounds = bounds_for(&InputConfig::new(state, b))?;
            let mut row: Vec<Value> = complex_cells(a).into_iter().chain(complex_cells(b)).collect();
            row.extend([
                Value::from(a2),
                m.into(),
                (mean_n + b.norm_sqr()).into(),
                bounds.qcrb.into(),
                heisenberg_scaling_qcrb(a2).into(),
                bounds.sql.into(),
                bounds.hl.into(),
                bounds.theta_ratio.into(),
            ]);
            Ok((row, vec![dim]))
        },
    )?;
    finish(cols, rows)
}

/// Matched single-filter state against squeezed vacuum of equal mean photon number.
fn fig4(cfg: &ExperimentConfig) -> Result<(ResultTable, BTreeSet<usize>)> {
    let grid = points(cfg)?;
    let cols = with_point(&[
        ("m", Int),
        ("mean_n", Float),
        ("r", Float),
        ("qcrb_S", Float),
        ("qcrb_sv", Float),
        ("qcrb_sv_state", Float),
        ("sql", Float),
        ("hl", Float),
    ]);
    let rows = sweep(
        &grid,
        |(a, b)| format!("fig4 row alpha={} beta={}", fmt_complex(*a), fmt_complex(*b)),
        |&(a, b)| {
            let m = matched_filter_index(a.norm_sqr());
            let state = snfcs_state(cfg, a, &FilterSet::singleton(m))?;
            let dim = state.dim();
            let mean_n = state.moments().mean_n;
            let bounds = bounds_for(&InputConfig::new(state, b))?;
            let r = matched_squeezing(mean_n);
            let sv_dim = cfg.overrides.dim.unwrap_or_else(|| squeezed_truncation_dim(r));
            let sv = bounds_for(&InputConfig::new(squeezed_vacuum(r, sv_dim)?, b))?;
            let mut row: Vec<Value> = complex_cells(a).into_iter().chain(complex_cells(b)).collect();
            row.extend([
                Value::from(m),
                mean_n.into(),
                r.into(),
                bounds.qcrb.into(),
                qcrb_squeezed_vacuum(r, b).into(),
                sv.qcrb.into(),
                bounds.sql.into(),
                bounds.hl.into(),
            ]);
            Ok((row, vec![dim, sv_dim]))
        },
    )?;
    finish(cols, rows)
}

fn search_spec(cfg: &ExperimentConfig, alpha: Complex64, beta: Complex64, k: usize) -> SearchSpec {
    let mut spec = SearchSpec::new(alpha, beta, k, cfg.overrides.strategy.unwrap_or(Strategy::Auto));
    if let Some(n) = cfg.overrides.n_max {
        spec.n_max = n;
    }
    spec
}

/// Optimal multi-filter sets and their distance from the Heisenberg limit, per set size.
fn fig5(cfg: &ExperimentConfig) -> Result<(ResultTable, BTreeSet<usize>)> {
    let k_range = cfg.k.expect("default k range");
    let grid: Vec<(Complex64, Complex64, usize)> =
        points(cfg)?.into_iter().flat_map(|(a, b)| k_range.iter().map(move |k| (a, b, k))).collect();
    let cols = with_point(&[
        ("k", Int),
        ("best_set", Text),
        ("qcrb", Float),
        ("hl", Float),
        ("theta_ratio", Float),
        ("evaluations", Int),
        ("strategy", Text),
    ]);
    let rows = sweep(
        &grid,
        |(a, b, k)| format!("fig5 row alpha={} beta={} k={k}", fmt_complex(*a), fmt_complex(*b)),
        |&(a, b, k)| {
            let res = search(&search_spec(cfg, a, b, k))?;
            let dim = truncation_dim(a, &res.best_set);
            let mut row: Vec<Value> = complex_cells(a).into_iter().chain(complex_cells(b)).collect();
            row.extend([
                Value::from(k),
                res.best_set.to_string().into(),
                res.bounds.qcrb.into(),
                res.bounds.hl.into(),
                res.bounds.theta_ratio.into(),
                res.evaluations.into(),
                res.strategy_used.as_str().into(),
            ]);
            Ok((row, vec![dim]))
        },
    )?;
    finish(cols, rows)
}

/// Even and odd coherent states against squeezed vacuum with `sinh²r = |α|²`.
fn fig6(cfg: &ExperimentConfig) -> Result<(ResultTable, BTreeSet<usize>)> {
    let grid = points(cfg)?;
    let cols = with_point(&[
        ("alpha_abs", Float),
        ("alpha_arg_pi", Float),
        ("mean_n_ecs", Float),
        ("mean_n_ocs", Float),
        ("r", Float),
        ("qcrb_ecs", Float),
        ("qcrb_ocs", Float),
        ("qcrb_sv", Float),
        ("max_gap", Float),
        ("sql", Float),
        ("hl", Float),
    ]);
    let rows = sweep(
        &grid,
        |(a, b)| format!("fig6 row alpha={} beta={}", fmt_complex(*a), fmt_complex(*b)),
        |&(a, b)| {
            let a2 = a.norm_sqr();
            let r = matched_squeezing(a2);
            let e = qcrb_ecs_closed_form(a, b)?;
            let o = qcrb_ocs_closed_form(a, b)?;
            let s = qcrb_squeezed_vacuum(r, b);
            let hi = e.max(o).max(s);
            let lo = e.min(o).min(s);
            let total = a2 + b.norm_sqr();
            let mut row: Vec<Value> = complex_cells(a).into_iter().chain(complex_cells(b)).collect();
            row.extend([
                Value::from(a.norm()),
                (a.arg() / PI).into(),
                ecs_mean_photons(a).into(),
                ocs_mean_photons(a)?.into(),
                r.into(),
                e.into(),
                o.into(),
                s.into(),
                ((hi - lo) / lo).into(),
                (1.0 / total.sqrt()).into(),
                (1.0 / total).into(),
            ]);
            Ok((row, vec![]))
        },
    )?;
    finish(cols, rows)
}

/// Wigner negativity of the optimal multi-filter states.
fn fig7(cfg: &ExperimentConfig) -> Result<(ResultTable, BTreeSet<usize>)> {
    let k_range = cfg.k.expect("default k range");
    let grid_cfg = cfg.grid.unwrap_or_default();
    let step = grid_cfg.step.unwrap_or(DEFAULT_STEP);
    let grid: Vec<(Complex64, Complex64, usize)> =
        points(cfg)?.into_iter().flat_map(|(a, b)| k_range.iter().map(move |k| (a, b, k))).collect();
    let cols = with_point(&[
        ("k", Int),
        ("best_set", Text),
        ("theta_ratio", Float),
        ("mean_n", Float),
        ("n_v", Float),
        ("negative_part", Float),
        ("convergence_estimate", Float),
        ("flagged", Bool),
        ("extent", Float),
        ("step", Float),
    ]);
    let rows = sweep(
        &grid,
        |(a, b, k)| format!("fig7 row alpha={} beta={} k={k}", fmt_complex(*a), fmt_complex(*b)),
        |&(a, b, k)| {
            let res = search(&search_spec(cfg, a, b, k))?;
            let state = snfcs_state(cfg, a, &res.best_set)?;
            let dim = state.dim();
            let extent = grid_cfg.extent.unwrap_or_else(|| default_extent(&state));
            let nv = negativity_volume(&state, extent, step)?;
            let mut row: Vec<Value> = complex_cells(a).into_iter().chain(complex_cells(b)).collect();
            row.extend([
                Value::from(k),
                res.best_set.to_string().into(),
                res.bounds.theta_ratio.into(),
                state.moments().mean_n.into(),
                nv.n_v.into(),
                nv.negative_part.into(),
                nv.convergence_estimate.into(),
                nv.flagged.into(),
                nv.extent.into(),
                nv.step.into(),
            ]);
            Ok((row, vec![dim]))
        },
    )?;
    finish(cols, rows)
}

/// Single-shot bounds for an explicit filter set, with negativity when a grid is configured.
fn custom(cfg: &ExperimentConfig) -> Result<(ResultTable, BTreeSet<usize>)> {
    let filter = FilterSet::new(cfg.filter.clone().unwrap_or_default())?;
    let grid = points(cfg)?;
    let mut extra = vec![
        ("filter", Text),
        ("mean_n", Float),
        ("fisher", Float),
        ("qcrb", Float),
        ("sql", Float),
        ("hl", Float),
        ("theta_ratio", Float),
    ];
    if cfg.grid.is_some() {
        extra.extend([("n_v", Float), ("convergence_estimate", Float)]);
    }
    let cols = with_point(&extra);
    let rows = sweep(
        &grid,
        |(a, b)| format!("custom row alpha={} beta={} filter={filter}", fmt_complex(*a), fmt_complex(*b)),
        |&(a, b)| {
            let state = snfcs_state(cfg, a, &filter)?;
            let dim = state.dim();
            let mean_n = state.moments().mean_n;
            let nv = match cfg.grid {
                Some(g) => {
                    let extent = g.extent.unwrap_or_else(|| default_extent(&state));
                    Some(negativity_volume(&state, extent, g.step.unwrap_or(DEFAULT_STEP))?)
                }
                None => None,
            };
            let bounds = bounds_for(&InputConfig::new(state, b))?;
            let mut row: Vec<Value> = complex_cells(a).into_iter().chain(complex_cells(b)).collect();
            row.extend([
                Value::from(filter.to_string()),
                mean_n.into(),
                bounds.fisher.into(),
                bounds.qcrb.into(),
                bounds.sql.into(),
                bounds.hl.into(),
                bounds.theta_ratio.into(),
            ]);
            if let Some(nv) = nv {
                row.extend([Value::from(nv.n_v), nv.convergence_estimate.into()]);
            }
            Ok((row, vec![dim]))
        },
    )?;
    finish(cols, rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::config::RangeSpec;

    #[test]
    fn fig2_single_alpha() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "fig2", "alpha": [2]}"#).unwrap();
        let t = run_experiment(&cfg).unwrap();
        assert_eq!(t.rows.len(), 15);
        let q = t.float_column("qcrb_S").unwrap();
        let argmin = (0..q.len()).min_by(|&i, &j| q[i].total_cmp(&q[j])).unwrap();
        assert_eq!(argmin, 5);
        assert!((q[4] - q[5]) / q[5] < 2e-3);
        let closed = t.float_column("qcrb_closed").unwrap();
        assert!(q.iter().zip(&closed).all(|(a, b)| ((a - b) / a).abs() < 1e-9));
        assert!(t.provenance("config_sha256").is_some());
    }

    #[test]
    fn custom_matches_direct_evaluation() {
        let cfg = ExperimentConfig::from_json(r#"{"experiment": "custom", "alpha": [2], "beta": 3, "filter": [4]}"#).unwrap();
        let t = run_experiment(&cfg).unwrap();
        assert_eq!(t.rows.len(), 1);
        let direct = qcrb_snfcs_closed_form(Complex64::new(2.0, 0.0), 4, Complex64::new(3.0, 0.0)).unwrap();
        let q = t.float_column("qcrb").unwrap()[0];
        assert!(((q - direct.qcrb) / q).abs() < 1e-9);
    }

    #[test]
    fn failing_row_is_identified() {
        // α = 0 with a nonzero filter index makes the closed form singular
        let mut cfg = ExperimentConfig::preset(ExperimentId::Fig2);
        cfg.alpha = Some(vec![crate::experiments::ComplexSpec::Real(0.0)]);
        cfg.m = Some(RangeSpec { start: 1, end: 1 });
        let err = run_experiment(&cfg).unwrap_err().to_string();
        assert!(err.contains("fig2 row") && err.contains("m=1"), "{err}");
    }

    #[test]
    fn fig6_gaps_shrink() {
        let t = run_experiment(&ExperimentConfig::preset(ExperimentId::Fig6)).unwrap();
        let gaps = t.float_column("max_gap").unwrap();
        let abs = t.float_column("alpha_abs").unwrap();
        let tail: Vec<f64> = gaps.iter().zip(&abs).filter(|(_, a)| **a >= 3.0).map(|(g, _)| *g).collect();
        assert!(tail.windows(2).all(|w| w[1] < w[0]));
    }
}
