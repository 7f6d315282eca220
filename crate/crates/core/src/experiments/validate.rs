use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{KindSpec, SimpleKind, ValidationGrid};
use super::stamp;
use super::table::{Column, ColumnType, ResultTable, Value};
use crate::error::{Error, Result};
use crate::fock::{
    coherent_state, even_coherent_state, filtered_coherent_state, fock_state, odd_coherent_state,
    squeezed_truncation_dim, squeezed_vacuum, truncation_dim, FilterSet, FockAmplitudes,
};
use crate::metrology::{
    fisher_squeezed_vacuum, matched_squeezing, qcrb_ecs_closed_form, qcrb_ocs_closed_form, qcrb_snfcs_closed_form,
    qfi_port2_coherent,
};
use crate::oracle::{coherent_port, qfi_finite_difference, qfi_jy_variance, tensor};
use crate::special::rel_dev;

/// Outcome of the three-route cross-check.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub table: ResultTable,
    pub max_deviation: f64,
    /// One message per row above the tolerance.
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Debug)]
struct Point {
    kind: &'static str,
    param: f64,
    alpha: Complex64,
    beta: Complex64,
    spec: Option<KindSpec>,
}

impl Point {
    fn label(&self) -> String {
        format!("{}({}) alpha={} beta={}", self.kind, self.param, self.alpha, self.beta)
    }
}

fn expand(grid: &ValidationGrid) -> Vec<Point> {
    let mut out = Vec::new();
    if grid.vacuum_point {
        out.push(Point { kind: "vacuum", param: 0.0, alpha: Complex64::new(0.0, 0.0), beta: Complex64::new(0.0, 0.0), spec: None });
    }
    for spec in &grid.kinds {
        let (kind, param, alpha_free) = match spec {
            KindSpec::Simple(SimpleKind::Vacuum) => ("vacuum", 0.0, true),
            KindSpec::Simple(SimpleKind::Coherent) => ("coherent", 0.0, false),
            KindSpec::Simple(SimpleKind::Ecs) => ("ecs", 0.0, false),
            KindSpec::Simple(SimpleKind::Ocs) => ("ocs", 0.0, false),
            KindSpec::Snfcs { snfcs } => ("snfcs", *snfcs as f64, false),
            KindSpec::Sv { sv } => ("sv", *sv, true),
        };
        for &b in &grid.beta {
            let beta = Complex64::new(b, 0.0);
            if alpha_free {
                out.push(Point { kind, param, alpha: Complex64::new(0.0, 0.0), beta, spec: Some(spec.clone()) });
                continue;
            }
            for &a in &grid.alpha_abs {
                for &p in &grid.phases_pi {
                    let alpha = Complex64::from_polar(a, p * PI);
                    out.push(Point { kind, param, alpha, beta, spec: Some(spec.clone()) });
                }
            }
        }
    }
    out
}

/// Port-1 state and its family closed-form Fisher information.
fn port1(point: &Point) -> Result<(FockAmplitudes, f64)> {
    let (a, b) = (point.alpha, point.beta);
    let b2 = b.norm_sqr();
    let dim = truncation_dim(a, &FilterSet::empty());
    Ok(match &point.spec {
        None | Some(KindSpec::Simple(SimpleKind::Vacuum)) => (fock_state(0, 2)?, b2),
        Some(KindSpec::Simple(SimpleKind::Coherent)) => (coherent_state(a, dim)?, a.norm_sqr() + b2),
        Some(KindSpec::Simple(SimpleKind::Ecs)) => {
            let q = qcrb_ecs_closed_form(a, b)?;
            (even_coherent_state(a, dim)?, 1.0 / (q * q))
        }
        Some(KindSpec::Simple(SimpleKind::Ocs)) => {
            let q = qcrb_ocs_closed_form(a, b)?;
            (odd_coherent_state(a, dim)?, 1.0 / (q * q))
        }
        Some(KindSpec::Snfcs { snfcs }) => {
            let filter = FilterSet::singleton(*snfcs);
            let state = filtered_coherent_state(a, &filter, truncation_dim(a, &filter))?;
            (state, qcrb_snfcs_closed_form(a, *snfcs, b)?.fisher)
        }
        Some(KindSpec::Sv { sv }) => {
            let r = matched_squeezing(*sv);
            (squeezed_vacuum(r, squeezed_truncation_dim(r))?, fisher_squeezed_vacuum(r, b))
        }
    })
}

fn max_pairwise(values: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, &x) in values.iter().enumerate() {
        for &y in &values[i + 1..] {
            let d = rel_dev(x, y);
            worst = worst.max(if d.is_nan() { f64::INFINITY } else { d });
        }
    }
    worst
}

/// Evaluates every grid point by the closed form, the moment form, the `J_y`
/// variance of the two-mode state and the finite-difference overlap route.
pub fn validate_oracles(grid: &ValidationGrid) -> Result<ValidationReport> {
    grid.validate()?;
    let pts = expand(grid);
    let rows: Vec<(Vec<Value>, Vec<usize>, Option<String>, f64)> = pts
        .par_iter()
        .map(|p| {
            let (state, f_closed) = port1(p).map_err(|e| e.at_row(p.label()))?;
            let p2 = coherent_port(p.beta, &state).map_err(|e| e.at_row(p.label()))?;
            let f_moment = qfi_port2_coherent(&state.moments(), p.beta).map_err(|e| e.at_row(p.label()))?;
            let f_jy = qfi_jy_variance(&tensor(&state, &p2)).map_err(|e| e.at_row(p.label()))?;
            let (f_fd, fd_note) = match qfi_finite_difference(&state, &p2, grid.fd_step) {
                Ok(f) => (f, None),
                Err(e @ Error::FiniteDifference { .. }) => (f64::NAN, Some(e.to_string())),
                Err(e) => return Err(e.at_row(p.label())),
            };
            let dev = max_pairwise(&[f_closed, f_moment, f_jy, f_fd]);
            let pass = dev < grid.tolerance;
            let failure = (!pass).then(|| {
                let why = fd_note.unwrap_or_else(|| format!("max relative deviation {dev:.3e}"));
                format!("{}: closed {f_closed}, moment {f_moment}, jy {f_jy}, fd {f_fd}: {why}", p.label())
            });
            let row = vec![
                Value::from(p.kind),
                Value::from(p.param),
                Value::from(p.alpha.norm()),
                Value::from(p.alpha.arg() / PI),
                Value::from(p.beta.re),
                Value::from(state.dim()),
                Value::from(p2.dim()),
                Value::from(f_closed),
                Value::from(f_moment),
                Value::from(f_jy),
                Value::from(f_fd),
                Value::from(dev),
                Value::from(pass),
            ];
            Ok((row, vec![state.dim(), p2.dim()], failure, dev))
        })
        .collect::<Result<_>>()?;

    use ColumnType::{Bool, Float, Int, Text};
    let cols = [
        ("kind", Text),
        ("param", Float),
        ("alpha_abs", Float),
        ("alpha_arg_pi", Float),
        ("beta", Float),
        ("dim1", Int),
        ("dim2", Int),
        ("f_closed", Float),
        ("f_moment", Float),
        ("f_jy", Float),
        ("f_fd", Float),
        ("max_rel_dev", Float),
        ("pass", Bool),
    ];
    let mut table = ResultTable::new(cols.iter().map(|(n, t)| Column::new(n, *t)).collect());
    let mut dims = BTreeSet::new();
    let mut failures = Vec::new();
    let mut max_deviation: f64 = 0.0;
    for (row, d, failure, dev) in rows {
        table.push_row(row)?;
        dims.extend(d);
        failures.extend(failure);
        max_deviation = max_deviation.max(dev);
    }
    let hash = {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_vec(grid)?;
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect::<String>()
    };
    stamp(&mut table, "validate", &hash, &dims);
    Ok(ValidationReport { table, max_deviation, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vacuum_point_is_exactly_zero() {
        let grid = ValidationGrid::from_json(r#"{"kinds": [], "beta": []}"#).unwrap();
        let rep = validate_oracles(&grid).unwrap();
        assert_eq!(rep.table.rows.len(), 1);
        for col in ["f_closed", "f_moment", "f_jy", "f_fd"] {
            assert_eq!(rep.table.float_column(col).unwrap()[0], 0.0, "{col}");
        }
        assert!(rep.passed());
    }

    #[test]
    fn coherent_points_sum_photons() {
        let grid = ValidationGrid::from_json(r#"{"kinds": ["coherent"], "alpha_abs": [1, 2], "beta": [1, 3], "vacuum_point": false}"#).unwrap();
        let rep = validate_oracles(&grid).unwrap();
        assert!(rep.passed(), "{:?}", rep.failures);
        let a = rep.table.float_column("alpha_abs").unwrap();
        let b = rep.table.float_column("beta").unwrap();
        for route in ["f_moment", "f_jy", "f_fd"] {
            let f = rep.table.float_column(route).unwrap();
            for i in 0..f.len() {
                let expect = a[i] * a[i] + b[i] * b[i];
                assert!(((f[i] - expect) / expect).abs() < 1e-9, "{route} row {i}: {} vs {expect}", f[i]);
            }
        }
    }
}
