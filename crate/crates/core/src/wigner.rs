//! Wigner function and negativity volume of single-mode pure states.
//!
//! Displacement matrix elements use the associated-Laguerre closed form
//! `⟨n+k|D(β)|n⟩ = √(n!/(n+k)!) β^k e^{−|β|²/2} L_n^{(k)}(|β|²)`, evaluated along
//! each diagonal by the three-term recurrence in `n` on the normalised
//! quantity, with an explicit log scale so neither the `e^{−|β|²/2}` prefactor
//! nor the factorials can underflow or overflow.

use std::f64::consts::FRAC_2_PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::FockAmplitudes;
use crate::special::{ln_factorial, CompensatedSum};

/// Largest Fock index the series route will extend its guard band to.
const SERIES_CAP: usize = 4096;
/// Norm deficit of the displaced state tolerated by the series route.
const SERIES_TAIL_TOL: f64 = 1e-10;

/// Real factors `g_n = √(n!/(n+k)!) |β|^k e^{−|β|²/2} L_n^{(k)}(|β|²)` for `n < len`.
fn laguerre_diagonal(abs_beta: f64, k: usize, len: usize, out: &mut Vec<f64>) {
    out.clear();
    if len == 0 {
        return;
    }
    let x = abs_beta * abs_beta;
    if abs_beta == 0.0 {
        out.extend((0..len).map(|n| if k == 0 && n < len { 1.0 } else { 0.0 }));
        return;
    }
    let kf = k as f64;
    let mut log_scale = kf * abs_beta.ln() - 0.5 * x - 0.5 * ln_factorial(k as u64);
    let mut scale = log_scale.exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    out.push(cur * scale);
    for n in 0..len - 1 {
        let nf = n as f64;
        let next = ((2.0 * nf + 1.0 + kf - x) * cur - (nf * (nf + kf)).sqrt() * prev) / ((nf + 1.0) * (nf + 1.0 + kf)).sqrt();
        prev = cur;
        cur = next;
        if cur.abs() > 1e150 {
            prev *= 1e-150;
            cur *= 1e-150;
            log_scale += 150.0 * std::f64::consts::LN_10;
            scale = log_scale.exp();
        }
        out.push(cur * scale);
    }
}

/// `⟨m|D(χ)|n⟩` with `D(χ) = exp(χa† − χ*a)`.
pub fn displacement_matrix_element(chi: Complex64, m: usize, n: usize) -> Complex64 {
    let (lo, k) = if m >= n { (n, m - n) } else { (m, n - m) };
    let mut g = Vec::with_capacity(lo + 1);
    laguerre_diagonal(chi.norm(), k, lo + 1, &mut g);
    let phase = chi.arg() * k as f64;
    let v = g[lo];
    if m >= n {
        Complex64::from_polar(v, phase)
    } else {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::from_polar(sign * v, -phase)
    }
}

/// Dense block `⟨m|D(χ)|n⟩` for `m < rows`, `n < cols`, row-major.
pub fn displacement_matrix(chi: Complex64, rows: usize, cols: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); rows * cols];
    let abs = chi.norm();
    let arg = chi.arg();
    let mut g = Vec::new();
    // lower diagonals m = n + k
    for k in 0..rows {
        let len = cols.min(rows - k);
        laguerre_diagonal(abs, k, len, &mut g);
        let ph = Complex64::from_polar(1.0, arg * k as f64);
        for (n, &v) in g.iter().enumerate() {
            out[(n + k) * cols + n] = ph * v;
        }
    }
    // upper diagonals n = m + k
    for k in 1..cols {
        let len = rows.min(cols - k);
        laguerre_diagonal(abs, k, len, &mut g);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let ph = Complex64::from_polar(sign, -arg * k as f64);
        for (m, &v) in g.iter().enumerate() {
            out[m * cols + m + k] = ph * v;
        }
    }
    out
}

/// `W(χ) = (2/π) Σₙ (−1)ⁿ |⟨φ|D(χ)|n⟩|²`, summing `n` up to `dim + 10` and
/// extending the band until the displaced state's norm deficit is below `1e-10`.
pub fn wigner_value(state: &FockAmplitudes, chi: Complex64) -> f64 {
    let phi = state.amps();
    let rows = phi.len();
    let mut cols = rows + 10;
    loop {
        let d = displacement_matrix(chi, rows, cols);
        let mut parity = CompensatedSum::default();
        let mut kept = CompensatedSum::default();
        for n in 0..cols {
            let psi: Complex64 = (0..rows).map(|m| phi[m].conj() * d[m * cols + n]).sum();
            let p = psi.norm_sqr();
            kept.add(p);
            parity.add(if n % 2 == 0 { p } else { -p });
        }
        let deficit = 1.0 - kept.value();
        if deficit <= SERIES_TAIL_TOL || cols >= SERIES_CAP {
            if deficit > SERIES_TAIL_TOL {
                log::warn!("Wigner series at χ = {chi} truncated with norm deficit {deficit:.3e}");
            }
            return FRAC_2_PI * parity.value();
        }
        cols = (2 * cols).min(SERIES_CAP);
    }
}

/// Per-diagonal data for the displaced-parity kernel: the products
/// `φ̄_{j+k} φ_j` and the `χ`-independent recurrence coefficients.
struct ParityKernel {
    dim: usize,
    diagonals: Vec<Diagonal>,
}

struct Diagonal {
    pairs: Vec<Complex64>,
    /// `1/√((j+1)(j+1+k))`
    inv_next: Vec<f64>,
    /// `√(j(j+k))`
    prev: Vec<f64>,
    /// `½ ln k!`
    half_ln_fact: f64,
}

impl ParityKernel {
    fn new(state: &FockAmplitudes) -> Self {
        let phi = state.amps();
        // components below 1e-14 in modulus cannot move W at double precision
        let dim = phi.iter().rposition(|a| a.norm_sqr() > 1e-28).map_or(1, |i| i + 1);
        let diagonals = (0..dim)
            .map(|k| {
                let len = dim - k;
                let kf = k as f64;
                Diagonal {
                    pairs: (0..len).map(|j| phi[j + k].conj() * phi[j]).collect(),
                    inv_next: (0..len).map(|j| 1.0 / ((j as f64 + 1.0) * (j as f64 + 1.0 + kf)).sqrt()).collect(),
                    prev: (0..len).map(|j| (j as f64 * (j as f64 + kf)).sqrt()).collect(),
                    half_ln_fact: 0.5 * ln_factorial(k as u64),
                }
            })
            .collect();
        ParityKernel { dim, diagonals }
    }

    /// `W(χ) = (2/π) ⟨φ|D(2χ)Π|φ⟩`, exact for the truncated state.
    fn value(&self, chi: Complex64, scratch: &mut Vec<f64>) -> f64 {
        let beta = 2.0 * chi;
        let abs = beta.norm();
        let x = abs * abs;
        if abs == 0.0 {
            // D(0) = 1 leaves only the parity of the diagonal
            let p = &self.diagonals[0].pairs;
            return FRAC_2_PI * p.iter().enumerate().map(|(j, v)| if j % 2 == 0 { v.re } else { -v.re }).sum::<f64>();
        }
        // far from the origin the unscaled recurrence would underflow; use the scaled one
        if x > 1200.0 {
            return self.value_scaled(beta, scratch);
        }
        let ln_abs = abs.ln();
        let unit = beta / abs;
        let mut ph = Complex64::new(1.0, 0.0);
        let mut acc = 0.0;
        for (k, d) in self.diagonals.iter().enumerate() {
            let kf = k as f64;
            let g0 = (kf * ln_abs - 0.5 * x - d.half_ln_fact).exp();
            let mut prev = 0.0;
            let mut cur = g0;
            let mut diag = 0.0;
            let len = d.pairs.len();
            for j in 0..len {
                let term = cur * (ph * d.pairs[j]).re;
                diag += if j % 2 == 0 { term } else { -term };
                if j + 1 < len {
                    let next = ((2.0 * j as f64 + 1.0 + kf - x) * cur - d.prev[j] * prev) * d.inv_next[j];
                    prev = cur;
                    cur = next;
                }
            }
            acc += if k == 0 { diag } else { 2.0 * diag };
            ph *= unit;
        }
        FRAC_2_PI * acc
    }

    fn value_scaled(&self, beta: Complex64, scratch: &mut Vec<f64>) -> f64 {
        let abs = beta.norm();
        let arg = beta.arg();
        let mut acc = 0.0;
        for (k, d) in self.diagonals.iter().enumerate() {
            laguerre_diagonal(abs, k, d.pairs.len(), scratch);
            let ph = Complex64::from_polar(1.0, arg * k as f64);
            let mut diag = 0.0;
            for (j, (&g, p)) in scratch.iter().zip(&d.pairs).enumerate() {
                let term = g * (ph * p).re;
                diag += if j % 2 == 0 { term } else { -term };
            }
            acc += if k == 0 { diag } else { 2.0 * diag };
        }
        debug_assert!(self.dim == self.diagonals.len());
        FRAC_2_PI * acc
    }
}

/// `W(χ)` from the displaced-parity identity `D(χ)ΠD(χ)† = D(2χ)Π`.
pub fn wigner_value_parity(state: &FockAmplitudes, chi: Complex64) -> f64 {
    ParityKernel::new(state).value(chi, &mut Vec::new())
}

/// Square grid of `W` sampled at cell centres of `[−L, L]²`.
#[derive(Clone, Debug)]
pub struct WignerGrid {
    /// Half-width `L`.
    pub extent: f64,
    /// Cell width, `2L / cells`.
    pub step: f64,
    pub cells: usize,
    /// `values[i * cells + j]` at `χ = x_i + i y_j`.
    pub values: Vec<f64>,
}

impl WignerGrid {
    pub fn center(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.step
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().copied().collect::<CompensatedSum>().value() * self.step * self.step
    }

    /// `∬ max(−W, 0)` by the midpoint rule.
    pub fn negative_part(&self) -> f64 {
        self.values.iter().map(|w| (-w).max(0.0)).collect::<CompensatedSum>().value() * self.step * self.step
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// `chi_re,chi_im,W` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["chi_re", "chi_im", "W"])?;
        for i in 0..self.cells {
            for j in 0..self.cells {
                w.write_record([
                    crate::experiments::format_float(self.center(i)),
                    crate::experiments::format_float(self.center(j)),
                    crate::experiments::format_float(self.values[i * self.cells + j]),
                ])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_grid(extent: f64, step: f64) -> Result<usize> {
    if !(extent > 0.0 && extent.is_finite()) {
        return Err(Error::InvalidInput(format!("grid extent must be positive, got {extent}")));
    }
    if !(step > 0.0 && step <= 0.1) {
        return Err(Error::InvalidInput(format!("grid step must lie in (0, 0.1], got {step}")));
    }
    Ok(((2.0 * extent / step).round() as usize).max(1))
}

fn grid_with_cells(state: &FockAmplitudes, extent: f64, cells: usize) -> WignerGrid {
    let kernel = ParityKernel::new(state);
    let step = 2.0 * extent / cells as f64;
    let values: Vec<f64> = (0..cells)
        .into_par_iter()
        .flat_map_iter(|i| {
            let x = -extent + (i as f64 + 0.5) * step;
            let mut scratch = Vec::with_capacity(kernel.dim);
            (0..cells)
                .map(|j| {
                    let y = -extent + (j as f64 + 0.5) * step;
                    kernel.value(Complex64::new(x, y), &mut scratch)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    WignerGrid { extent, step, cells, values }
}

/// Samples `W` on `[−extent, extent]²`; the step is adjusted so an integer number of cells fits.
pub fn wigner_grid(state: &FockAmplitudes, extent: f64, step: f64) -> Result<WignerGrid> {
    let cells = check_grid(extent, step)?;
    Ok(grid_with_cells(state, extent, cells))
}

/// Negativity volume and its step-halving convergence estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NegativityResult {
    /// `∬(|W| − W) dχ'dχ'' = ∫|W| − 1`.
    pub n_v: f64,
    /// `∬ max(−W, 0)`, half of `n_v`.
    pub negative_part: f64,
    pub extent: f64,
    pub step: f64,
    /// `|n_v(h/2) − n_v(h)|`.
    pub convergence_estimate: f64,
    /// Set when the estimate exceeds 10% of `n_v`.
    pub flagged: bool,
}

pub fn negativity_volume(state: &FockAmplitudes, extent: f64, step: f64) -> Result<NegativityResult> {
    let cells = check_grid(extent, step)?;
    if let Some(alpha) = state.params().alpha() {
        let need = alpha.norm() + 5.0;
        if extent < need - 1e-12 {
            return Err(Error::InvalidInput(format!("extent {extent} does not reach |α| + 5 = {need}")));
        }
    }
    let coarse = grid_with_cells(state, extent, cells);
    let fine = grid_with_cells(state, extent, 2 * cells);
    let n_coarse = 2.0 * coarse.negative_part();
    let n_fine = 2.0 * fine.negative_part();
    let estimate = (n_fine - n_coarse).abs();
    let flagged = n_coarse > 1e-8 && estimate > 0.1 * n_coarse;
    if flagged {
        log::warn!("negativity volume {n_coarse} not converged (halving changes it by {estimate})");
    }
    Ok(NegativityResult {
        n_v: n_coarse,
        negative_part: 0.5 * n_coarse,
        extent,
        step: coarse.step,
        convergence_estimate: estimate,
        flagged,
    })
}

/// Default half-width `|α| + 5`, or 5 when the state has no nominal `α`.
pub fn default_extent(state: &FockAmplitudes) -> f64 {
    state.params().alpha().map_or(5.0, |a| a.norm()) + 5.0
}

pub const DEFAULT_STEP: f64 = 0.05;
