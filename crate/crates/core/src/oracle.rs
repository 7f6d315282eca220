//! Brute-force two-mode verification path.
//!
//! The product input `|ψ₁⟩|ψ₂⟩` is held as a dense amplitude matrix. The
//! Schwinger operators conserve the total photon number `N = n₁ + n₂`, so every
//! operator here acts block by block on the `N + 1` amplitudes of a fixed `N`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{coherent_state, truncation_dim, FilterSet, FockAmplitudes};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Amplitudes of `|n₁⟩|n₂⟩`, row-major in `n₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoModeAmplitudes {
    dim1: usize,
    dim2: usize,
    amps: Vec<Complex64>,
}

/// First and second moments of `J_y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngularMomentumMoments {
    pub mean_jy: f64,
    pub mean_jy2: f64,
}

impl AngularMomentumMoments {
    pub fn variance(&self) -> f64 {
        self.mean_jy2 - self.mean_jy * self.mean_jy
    }
}

impl TwoModeAmplitudes {
    pub fn zeros(dim1: usize, dim2: usize) -> Self {
        TwoModeAmplitudes { dim1, dim2, amps: vec![ZERO; dim1 * dim2] }
    }

    pub fn from_vec(dim1: usize, dim2: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != dim1 * dim2 || dim1 == 0 || dim2 == 0 {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes do not fill a {dim1}x{dim2} grid",
                amps.len()
            )));
        }
        Ok(TwoModeAmplitudes { dim1, dim2, amps })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.dim1, self.dim2)
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn get(&self, n1: usize, n2: usize) -> Complex64 {
        if n1 < self.dim1 && n2 < self.dim2 {
            self.amps[n1 * self.dim2 + n2]
        } else {
            ZERO
        }
    }

    fn add_at(&mut self, n1: usize, n2: usize, v: Complex64) {
        self.amps[n1 * self.dim2 + n2] += v;
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_total(&self) -> usize {
        self.dim1 + self.dim2 - 2
    }

    /// `⟨self|other⟩` over the common support.
    pub fn inner(&self, other: &TwoModeAmplitudes) -> Complex64 {
        let mut acc = ZERO;
        for n1 in 0..self.dim1.min(other.dim1) {
            for n2 in 0..self.dim2.min(other.dim2) {
                acc += self.get(n1, n2).conj() * other.get(n1, n2);
            }
        }
        acc
    }

    /// Amplitudes of the fixed-`N` block, indexed by `n₁ = 0..=N`.
    pub fn block(&self, total: usize) -> Vec<Complex64> {
        (0..=total).map(|n1| self.get(n1, total - n1)).collect()
    }

    /// Copy into a `dim1 × dim2` grid; fails if that discards more than `tol` of mass.
    pub fn truncated(&self, dim1: usize, dim2: usize, tol: f64) -> Result<Self> {
        let mut out = TwoModeAmplitudes::zeros(dim1, dim2);
        for n1 in 0..dim1 {
            for n2 in 0..dim2 {
                out.amps[n1 * dim2 + n2] = self.get(n1, n2);
            }
        }
        let lost = self.norm_sqr() - out.norm_sqr();
        if lost > tol {
            return Err(Error::Truncation { dim: dim1.max(dim2), tail: lost, tol });
        }
        Ok(out)
    }
}

/// `|ψ₁⟩ ⊗ |ψ₂⟩`.
pub fn tensor(port1: &FockAmplitudes, port2: &FockAmplitudes) -> TwoModeAmplitudes {
    let (d1, d2) = (port1.dim(), port2.dim());
    let mut amps = Vec::with_capacity(d1 * d2);
    for a in port1.amps() {
        for b in port2.amps() {
            amps.push(a * b);
        }
    }
    TwoModeAmplitudes { dim1: d1, dim2: d2, amps }
}

/// Coherent port-2 state sized for an oracle run alongside `port1`.
pub fn coherent_port(beta: Complex64, port1: &FockAmplitudes) -> Result<FockAmplitudes> {
    let dim = (truncation_dim(beta, &FilterSet::empty()) + 2).max(port1.dim());
    coherent_state(beta, dim)
}

/// `exp(−iθJ_x)` applied block by block.
///
/// Columns of the block unitary follow from the transformed creation operators
/// `b₁† = cos(θ/2)a₁† − i sin(θ/2)a₂†`, `b₂† = cos(θ/2)a₂† − i sin(θ/2)a₁†`:
/// `U|n₁,n₂⟩ = b₁† U|n₁−1,n₂⟩/√n₁` and `U|0,N⟩ = b₂† U|0,N−1⟩/√N`.
/// The output grid holds every block reachable from the input, `(D₁+D₂−1)²`.
pub fn rotate_x(state: &TwoModeAmplitudes, theta: f64) -> TwoModeAmplitudes {
    let n_max = state.max_total();
    let out_dim = n_max + 1;
    let mut out = TwoModeAmplitudes::zeros(out_dim, out_dim);
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let cs = Complex64::new(c, 0.0);
    let si = Complex64::new(0.0, -s);

    // columns of the previous block, cols[n1][j] = ⟨j, N−1−j| U |n1, N−1−n1⟩
    let mut cols: Vec<Vec<Complex64>> = vec![vec![Complex64::new(1.0, 0.0)]];
    out.add_at(0, 0, state.get(0, 0));

    for total in 1..=n_max {
        let prev = total - 1;
        // a₁† and a₂† acting on a block-(N−1) vector, landing in block N
        let raise = |v: &[Complex64], w1: Complex64, w2: Complex64| -> Vec<Complex64> {
            let mut r = vec![ZERO; total + 1];
            for (j, &x) in v.iter().enumerate() {
                if x == ZERO {
                    continue;
                }
                r[j + 1] += w1 * ((j + 1) as f64).sqrt() * x;
                r[j] += w2 * ((prev - j + 1) as f64).sqrt() * x;
            }
            r
        };
        let mut next = Vec::with_capacity(total + 1);
        for n1 in 0..=total {
            let col = if n1 == 0 {
                let mut v = raise(&cols[0], si, cs);
                let k = 1.0 / (total as f64).sqrt();
                v.iter_mut().for_each(|x| *x *= k);
                v
            } else {
                let mut v = raise(&cols[n1 - 1], cs, si);
                let k = 1.0 / (n1 as f64).sqrt();
                v.iter_mut().for_each(|x| *x *= k);
                v
            };
            next.push(col);
        }
        for (n1, col) in next.iter().enumerate() {
            let amp = state.get(n1, total - n1);
            if amp == ZERO {
                continue;
            }
            for (j, &u) in col.iter().enumerate() {
                out.add_at(j, total - j, u * amp);
            }
        }
        cols = next;
    }
    out
}

/// 50:50 beam splitter `exp(−i(π/4)(a₁†a₂ + a₁a₂†)) = exp(−i(π/2)J_x)`.
pub fn beam_splitter_apply(state: &TwoModeAmplitudes) -> TwoModeAmplitudes {
    rotate_x(state, std::f64::consts::FRAC_PI_2)
}

pub fn beam_splitter_inverse(state: &TwoModeAmplitudes) -> TwoModeAmplitudes {
    rotate_x(state, -std::f64::consts::FRAC_PI_2)
}

/// `exp(−iθJ_z)`, `J_z = (n₁ − n₂)/2`.
pub fn phase_shift(state: &TwoModeAmplitudes, theta: f64) -> TwoModeAmplitudes {
    let mut out = state.clone();
    for n1 in 0..state.dim1 {
        for n2 in 0..state.dim2 {
            let jz = 0.5 * (n1 as f64 - n2 as f64);
            out.amps[n1 * state.dim2 + n2] *= Complex64::from_polar(1.0, -theta * jz);
        }
    }
    out
}

/// `J_y = (−i/2)(a₁†a₂ − a₁a₂†)` by index shifts on the full grid (one row/column of padding).
pub fn apply_jy(state: &TwoModeAmplitudes) -> TwoModeAmplitudes {
    let mut out = TwoModeAmplitudes::zeros(state.dim1 + 1, state.dim2 + 1);
    let half_i = Complex64::new(0.0, -0.5);
    for n1 in 0..state.dim1 {
        for n2 in 0..state.dim2 {
            let x = state.get(n1, n2);
            if x == ZERO {
                continue;
            }
            let (f1, f2) = (n1 as f64, n2 as f64);
            if n2 > 0 {
                out.add_at(n1 + 1, n2 - 1, half_i * ((f1 + 1.0) * f2).sqrt() * x);
            }
            if n1 > 0 {
                out.add_at(n1 - 1, n2 + 1, -half_i * (f1 * (f2 + 1.0)).sqrt() * x);
            }
        }
    }
    out
}

/// `J_y` restricted to the block of total photon number `total`.
pub fn apply_jy_block(block: &[Complex64], total: usize) -> Vec<Complex64> {
    let half_i = Complex64::new(0.0, -0.5);
    let n = total as f64;
    (0..=total)
        .map(|n1| {
            let f1 = n1 as f64;
            let mut acc = ZERO;
            if n1 > 0 {
                acc += (f1 * (n - f1 + 1.0)).sqrt() * block[n1 - 1];
            }
            if n1 < total {
                acc -= ((f1 + 1.0) * (n - f1)).sqrt() * block[n1 + 1];
            }
            half_i * acc
        })
        .collect()
}

/// Moments of `J_y`, accumulated independently over each total-photon block.
pub fn jy_moments(state: &TwoModeAmplitudes) -> AngularMomentumMoments {
    let mut mean = 0.0;
    let mut mean_sq = 0.0;
    for total in 0..=state.max_total() {
        let block = state.block(total);
        if block.iter().all(|x| *x == ZERO) {
            continue;
        }
        let jb = apply_jy_block(&block, total);
        let e: Complex64 = block.iter().zip(&jb).map(|(a, b)| a.conj() * b).sum();
        mean += e.re;
        mean_sq += jb.iter().map(|x| x.norm_sqr()).sum::<f64>();
    }
    AngularMomentumMoments { mean_jy: mean, mean_jy2: mean_sq }
}

/// `4 Var(J_y)` in the input state.
pub fn qfi_jy_variance(state: &TwoModeAmplitudes) -> Result<f64> {
    let var = jy_moments(state).variance();
    if var < -1e-10 {
        return Err(Error::Numerical(format!("negative J_y variance {var}")));
    }
    Ok(4.0 * var.max(0.0))
}

fn fisher_from_derivative(derivative: &TwoModeAmplitudes, psi: &TwoModeAmplitudes) -> f64 {
    4.0 * (derivative.norm_sqr() - derivative.inner(psi).norm_sqr())
}

fn central_difference(phi: &TwoModeAmplitudes, step: f64) -> TwoModeAmplitudes {
    let plus = phase_shift(phi, step);
    let minus = phase_shift(phi, -step);
    let amps = plus.amps.iter().zip(&minus.amps).map(|(p, m)| (p - m) / (2.0 * step)).collect();
    TwoModeAmplitudes { dim1: phi.dim1, dim2: phi.dim2, amps }
}

/// Fisher information of `|ψ(θ)⟩ = e^{−iθJ_z} U_BS |ψ₁⟩|ψ₂⟩` at `θ = 0` from a
/// numerically differentiated state, Richardson-combined over `δ` and `δ/2`.
pub fn qfi_finite_difference(port1: &FockAmplitudes, port2: &FockAmplitudes, dtheta: f64) -> Result<f64> {
    if !(1e-6..=1e-3).contains(&dtheta) {
        return Err(Error::InvalidInput(format!("finite-difference step {dtheta} outside [1e-6, 1e-3]")));
    }
    let phi = beam_splitter_apply(&tensor(port1, port2));
    let coarse_d = central_difference(&phi, dtheta);
    let fine_d = central_difference(&phi, 0.5 * dtheta);
    let coarse = fisher_from_derivative(&coarse_d, &phi);
    let fine = fisher_from_derivative(&fine_d, &phi);
    let amps = fine_d.amps.iter().zip(&coarse_d.amps).map(|(f, c)| (4.0 * f - c) / 3.0).collect();
    let extrapolated = TwoModeAmplitudes { dim1: phi.dim1, dim2: phi.dim2, amps };
    let f = fisher_from_derivative(&extrapolated, &phi);
    if (f - fine).abs() > 1e-3 * f.abs().max(1.0) {
        return Err(Error::FiniteDifference { coarse, fine });
    }
    Ok(f.max(0.0))
}

fn falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64).product()
}

/// `⟨a₁†^p₁ a₁^q₁ a₂†^p₂ a₂^q₂⟩`.
pub fn normal_ordered_expectation(state: &TwoModeAmplitudes, (p1, q1): (usize, usize), (p2, q2): (usize, usize)) -> Complex64 {
    let mut acc = ZERO;
    for n1 in q1..state.dim1 {
        for n2 in q2..state.dim2 {
            let x = state.get(n1, n2);
            if x == ZERO {
                continue;
            }
            let (m1, m2) = (n1 - q1 + p1, n2 - q2 + p2);
            let y = state.get(m1, m2);
            if y == ZERO {
                continue;
            }
            // a^q|n⟩ = √(n!/(n−q)!)|n−q⟩, a†^p|n−q⟩ = √((n−q+p)!/(n−q)!)|n−q+p⟩
            let coef = (falling(n1, q1) * falling(m1, p1) * falling(n2, q2) * falling(m2, p2)).sqrt();
            acc += y.conj() * x * coef;
        }
    }
    acc
}

/// Fisher information from the eight-term ladder-operator expansion of `4 Var(J_y)`.
pub fn qfi_operator_expansion(state: &TwoModeAmplitudes) -> f64 {
    let e = |a, b| normal_ordered_expectation(state, a, b);
    let n1 = e((1, 1), (0, 0));
    let n2 = e((0, 0), (1, 1));
    let raise1_lower2_sq = e((2, 0), (0, 2));
    let lower1_raise2_sq = e((0, 2), (2, 0));
    let n1n2 = e((1, 1), (1, 1));
    let hop = e((1, 0), (0, 1));
    let hop_back = e((0, 1), (1, 0));
    let f = n1 + n2 - raise1_lower2_sq - lower1_raise2_sq + 2.0 * n1n2 + hop * hop + hop_back * hop_back
        - 2.0 * hop * hop_back;
    f.re
}
