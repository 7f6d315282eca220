//! Single-mode pure states in a truncated Fock basis.
//!
//! Every constructor returns a unit-norm amplitude vector over `|0⟩..|D-1⟩`
//! and refuses a truncation whose discarded tail mass exceeds
//! [`TRUNCATION_TOL`]. The amplitudes are renormalised after truncation.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{ln_factorial, poisson_weight};

/// Largest tail mass a truncation may discard.
pub const TRUNCATION_TOL: f64 = 1e-12;

/// Retained mass below which a filter is considered to annihilate the state.
pub const DEGENERATE_MASS: f64 = 1e-14;

/// Strictly increasing set of Fock indices removed from a coherent state.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FilterSet(Vec<usize>);

impl FilterSet {
    pub fn empty() -> Self {
        FilterSet(Vec::new())
    }

    /// Builds a set from arbitrary order; duplicates are rejected.
    pub fn new(members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = members.into_iter().collect();
        v.sort_unstable();
        if v.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput(format!("duplicate filter member in {v:?}")));
        }
        Ok(FilterSet(v))
    }

    pub fn singleton(m: usize) -> Self {
        FilterSet(vec![m])
    }

    /// All odd indices below `dim`.
    pub fn odd_below(dim: usize) -> Self {
        FilterSet((1..dim).step_by(2).collect())
    }

    /// All even indices below `dim`.
    pub fn even_below(dim: usize) -> Self {
        FilterSet((0..dim).step_by(2).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, n: usize) -> bool {
        self.0.binary_search(&n).is_ok()
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }
}

impl TryFrom<Vec<usize>> for FilterSet {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        FilterSet::new(v)
    }
}

impl From<FilterSet> for Vec<usize> {
    fn from(f: FilterSet) -> Self {
        f.0
    }
}

impl fmt::Display for FilterSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{m}")?;
        }
        f.write_str("}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Coherent,
    Filtered,
    Even,
    Odd,
    SqueezedVacuum,
    Fock,
}

impl StateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StateKind::Coherent => "coherent",
            StateKind::Filtered => "filtered",
            StateKind::Even => "even",
            StateKind::Odd => "odd",
            StateKind::SqueezedVacuum => "squeezed_vacuum",
            StateKind::Fock => "fock",
        }
    }
}

impl std::str::FromStr for StateKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "coherent" => StateKind::Coherent,
            "filtered" | "snfcs" | "mnfcs" => StateKind::Filtered,
            "even" | "ecs" => StateKind::Even,
            "odd" | "ocs" => StateKind::Odd,
            "squeezed_vacuum" | "sv" => StateKind::SqueezedVacuum,
            "fock" => StateKind::Fock,
            other => return Err(Error::InvalidInput(format!("unknown state kind `{other}`"))),
        })
    }
}

/// Nominal construction parameters carried alongside the amplitudes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StateParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<FilterSet>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

impl StateParams {
    pub fn alpha(&self) -> Option<Complex64> {
        self.alpha.map(|[re, im]| Complex64::new(re, im))
    }
}

/// Unit-norm amplitudes over a truncated Fock basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FockAmplitudes {
    kind: StateKind,
    params: StateParams,
    amps: Vec<Complex64>,
}

/// JSON fixture form: `{kind, params, dim, amps: [[re, im], ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateRecord {
    pub kind: StateKind,
    pub params: StateParams,
    pub dim: usize,
    pub amps: Vec<[f64; 2]>,
}

impl FockAmplitudes {
    fn normalized(kind: StateKind, params: StateParams, mut amps: Vec<Complex64>) -> Self {
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        for a in &mut amps {
            *a /= norm;
        }
        FockAmplitudes { kind, params, amps }
    }

    pub fn kind(&self) -> StateKind {
        self.kind
    }

    pub fn params(&self) -> &StateParams {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn probability(&self, n: usize) -> f64 {
        self.amps.get(n).map_or(0.0, |a| a.norm_sqr())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `⟨self|other⟩`, zero-padding the shorter vector.
    pub fn overlap(&self, other: &FockAmplitudes) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn moments(&self) -> ModeMoments {
        moments(self)
    }

    pub fn to_record(&self) -> StateRecord {
        StateRecord {
            kind: self.kind,
            params: self.params.clone(),
            dim: self.dim(),
            amps: self.amps.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn from_record(record: StateRecord) -> Result<Self> {
        if record.dim != record.amps.len() || record.dim == 0 {
            return Err(Error::InvalidInput(format!(
                "record dim {} does not match {} amplitudes",
                record.dim,
                record.amps.len()
            )));
        }
        let amps: Vec<Complex64> = record.amps.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("record is not normalized (norm² = {norm})")));
        }
        Ok(FockAmplitudes { kind: record.kind, params: record.params, amps })
    }
}

/// Builds a state of the given kind, choosing the truncation rule for it unless `dim` is given.
pub fn build_state(kind: StateKind, params: &StateParams, dim: Option<usize>) -> Result<FockAmplitudes> {
    let need_alpha = || params.alpha().ok_or_else(|| Error::InvalidInput(format!("{} state needs alpha", kind.as_str())));
    let empty = FilterSet::empty();
    match kind {
        StateKind::Coherent => {
            let a = need_alpha()?;
            coherent_state(a, dim.unwrap_or_else(|| truncation_dim(a, &empty)))
        }
        StateKind::Filtered => {
            let a = need_alpha()?;
            let f = params.filter.clone().unwrap_or_default();
            filtered_coherent_state(a, &f, dim.unwrap_or_else(|| truncation_dim(a, &f)))
        }
        StateKind::Even => {
            let a = need_alpha()?;
            even_coherent_state(a, dim.unwrap_or_else(|| truncation_dim(a, &empty)))
        }
        StateKind::Odd => {
            let a = need_alpha()?;
            odd_coherent_state(a, dim.unwrap_or_else(|| truncation_dim(a, &empty)))
        }
        StateKind::SqueezedVacuum => {
            let r = params.r.ok_or_else(|| Error::InvalidInput("squeezed vacuum needs r".into()))?;
            squeezed_vacuum(r, dim.unwrap_or_else(|| squeezed_truncation_dim(r)))
        }
        StateKind::Fock => {
            let n = params.n.ok_or_else(|| Error::InvalidInput("Fock state needs n".into()))?;
            fock_state(n, dim.unwrap_or(n + 1))
        }
    }
}

/// `⟨a⟩`, `⟨a²⟩` and `⟨a†a⟩` of a single-mode state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMoments {
    pub mean_a: Complex64,
    pub mean_a2: Complex64,
    pub mean_n: f64,
}

impl ModeMoments {
    /// Exact moments of an untruncated coherent state.
    pub fn coherent(alpha: Complex64) -> Self {
        ModeMoments { mean_a: alpha, mean_a2: alpha * alpha, mean_n: alpha.norm_sqr() }
    }
}

fn check_alpha(alpha: Complex64) -> Result<()> {
    if alpha.re.is_finite() && alpha.im.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("non-finite alpha {alpha}")))
    }
}

/// Truncation dimension for a (filtered) coherent state.
///
/// `ceil(|α|² + 10√(|α|²+1) + 20)`, raised so that it exceeds `max(filter) + 5`.
pub fn truncation_dim(alpha: Complex64, filter: &FilterSet) -> usize {
    let a2 = alpha.norm_sqr();
    let base = (a2 + 10.0 * (a2 + 1.0).sqrt() + 20.0).ceil() as usize;
    match filter.max() {
        Some(m) => base.max(m + 6),
        None => base,
    }
}

/// Smallest even dimension whose squeezed-vacuum tail is below [`TRUNCATION_TOL`].
pub fn squeezed_truncation_dim(r: f64) -> usize {
    if r == 0.0 {
        return 2;
    }
    let mut mass = 0.0;
    let mut k = 0usize;
    loop {
        mass += squeezed_weight(r, k).powi(2);
        k += 1;
        // a few pairs of guard so renormalisation never sees a marginal tail
        if 1.0 - mass < 0.1 * TRUNCATION_TOL || k > 100_000 {
            return 2 * k + 2;
        }
    }
}

fn squeezed_weight(r: f64, k: usize) -> f64 {
    let t = r.tanh();
    let log = k as f64 * t.ln() + 0.5 * ln_factorial(2 * k as u64)
        - k as f64 * std::f64::consts::LN_2
        - ln_factorial(k as u64)
        - 0.5 * r.cosh().ln();
    log.exp()
}

/// Raw (unrenormalised) coherent amplitudes `e^{-|α|²/2} α^n / √n!`.
pub(crate) fn coherent_amplitudes(alpha: Complex64, dim: usize) -> Vec<Complex64> {
    let a2 = alpha.norm_sqr();
    if a2 == 0.0 {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        v[0] = Complex64::new(1.0, 0.0);
        return v;
    }
    let ln_abs = alpha.norm().ln();
    let phase = alpha.arg();
    (0..dim)
        .map(|n| {
            let mag = (-0.5 * a2 + n as f64 * ln_abs - 0.5 * ln_factorial(n as u64)).exp();
            Complex64::from_polar(mag, n as f64 * phase)
        })
        .collect()
}

fn check_tail(dim: usize, mass: f64) -> Result<()> {
    let tail = 1.0 - mass;
    if tail > TRUNCATION_TOL {
        Err(Error::Truncation { dim, tail, tol: TRUNCATION_TOL })
    } else {
        Ok(())
    }
}

fn alpha_param(alpha: Complex64) -> Option<[f64; 2]> {
    Some([alpha.re, alpha.im])
}

pub fn coherent_state(alpha: Complex64, dim: usize) -> Result<FockAmplitudes> {
    check_alpha(alpha)?;
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let amps = coherent_amplitudes(alpha, dim);
    check_tail(dim, amps.iter().map(|a| a.norm_sqr()).sum())?;
    let params = StateParams { alpha: alpha_param(alpha), ..Default::default() };
    Ok(FockAmplitudes::normalized(StateKind::Coherent, params, amps))
}

/// Coherent state with the Fock components in `filter` removed.
pub fn filtered_coherent_state(alpha: Complex64, filter: &FilterSet, dim: usize) -> Result<FockAmplitudes> {
    filtered_with_kind(alpha, filter, dim, StateKind::Filtered)
}

fn filtered_with_kind(alpha: Complex64, filter: &FilterSet, dim: usize, kind: StateKind) -> Result<FockAmplitudes> {
    check_alpha(alpha)?;
    if let Some(m) = filter.max() {
        if m >= dim {
            return Err(Error::InvalidInput(format!(
                "filter member {m} lies outside the truncated basis of dimension {dim}"
            )));
        }
    }
    let mut amps = coherent_amplitudes(alpha, dim);
    check_tail(dim, amps.iter().map(|a| a.norm_sqr()).sum())?;
    for &m in filter.members() {
        amps[m] = Complex64::new(0.0, 0.0);
    }
    let retained: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if retained < DEGENERATE_MASS {
        return Err(Error::DegenerateFilter { retained });
    }
    let params = match kind {
        StateKind::Filtered => StateParams { alpha: alpha_param(alpha), filter: Some(filter.clone()), ..Default::default() },
        _ => StateParams { alpha: alpha_param(alpha), ..Default::default() },
    };
    Ok(FockAmplitudes::normalized(kind, params, amps))
}

/// Even coherent state: every odd Fock component filtered out.
pub fn even_coherent_state(alpha: Complex64, dim: usize) -> Result<FockAmplitudes> {
    filtered_with_kind(alpha, &FilterSet::odd_below(dim), dim, StateKind::Even)
}

/// Odd coherent state: every even Fock component filtered out.
pub fn odd_coherent_state(alpha: Complex64, dim: usize) -> Result<FockAmplitudes> {
    if alpha.norm_sqr() == 0.0 {
        return Err(Error::DegenerateState("odd coherent state of zero amplitude vanishes".into()));
    }
    filtered_with_kind(alpha, &FilterSet::even_below(dim), dim, StateKind::Odd).map_err(|e| match e {
        Error::DegenerateFilter { retained } => {
            Error::DegenerateState(format!("odd coherent state retains mass {retained:.3e}"))
        }
        e => e,
    })
}

/// Squeezed vacuum with real squeezing parameter `r`, `⟨a²⟩ = -sinh r cosh r`.
pub fn squeezed_vacuum(r: f64, dim: usize) -> Result<FockAmplitudes> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::InvalidInput(format!("squeezing parameter must be finite and >= 0, got {r}")));
    }
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be positive".into()));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    if r == 0.0 {
        amps[0] = Complex64::new(1.0, 0.0);
    } else {
        for k in 0..dim.div_ceil(2) {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            amps[2 * k] = Complex64::new(sign * squeezed_weight(r, k), 0.0);
        }
    }
    check_tail(dim, amps.iter().map(|a| a.norm_sqr()).sum())?;
    let params = StateParams { r: Some(r), ..Default::default() };
    Ok(FockAmplitudes::normalized(StateKind::SqueezedVacuum, params, amps))
}

/// Number state `|n⟩` in a basis of dimension `dim`.
pub fn fock_state(n: usize, dim: usize) -> Result<FockAmplitudes> {
    if n >= dim {
        return Err(Error::InvalidInput(format!("|{n}⟩ does not fit in dimension {dim}")));
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    amps[n] = Complex64::new(1.0, 0.0);
    let params = StateParams { n: Some(n), ..Default::default() };
    Ok(FockAmplitudes { kind: StateKind::Fock, params, amps })
}

/// Direct Fock-basis sums for `⟨a⟩`, `⟨a²⟩`, `⟨a†a⟩`.
pub fn moments(state: &FockAmplitudes) -> ModeMoments {
    let c = state.amps();
    let mut mean_a = Complex64::new(0.0, 0.0);
    let mut mean_a2 = Complex64::new(0.0, 0.0);
    let mut mean_n = 0.0;
    for n in 0..c.len() {
        let nf = n as f64;
        mean_n += nf * c[n].norm_sqr();
        if n + 1 < c.len() {
            mean_a += (nf + 1.0).sqrt() * c[n].conj() * c[n + 1];
        }
        if n + 2 < c.len() {
            mean_a2 += ((nf + 1.0) * (nf + 2.0)).sqrt() * c[n].conj() * c[n + 2];
        }
    }
    ModeMoments { mean_a, mean_a2, mean_n }
}

/// `N_m = √(1 - e^{-|α|²} |α|^{2m} / m!)`, the single-filter norm factor.
pub fn snfcs_norm_factor(alpha: Complex64, m: usize) -> f64 {
    (1.0 - poisson_weight(alpha.norm_sqr(), m as u64)).sqrt()
}

/// Printed closed forms for the moments of a single-number-state filtered coherent state.
///
/// Terms carrying a factor `m` are dropped before dividing by `α*`, so `m = 0` is regular.
pub fn snfcs_moments_closed_form(alpha: Complex64, m: usize) -> Result<ModeMoments> {
    check_alpha(alpha)?;
    let a2 = alpha.norm_sqr();
    if a2 == 0.0 && m > 0 {
        return Err(Error::Singular(format!("alpha = 0 with m = {m} divides by alpha*")));
    }
    let n2 = 1.0 - poisson_weight(a2, m as u64);
    if n2 <= 0.0 {
        return Err(Error::DegenerateFilter { retained: n2 });
    }
    let mf = m as f64;
    let mean_n = (a2 - mf * (1.0 - n2)) / n2;
    let (mean_a, mean_a2) = if m == 0 {
        (alpha, alpha * alpha)
    } else {
        let ac = alpha.conj();
        let a = alpha + mf / ac - mf / (ac * n2);
        let c2 = mf * (mf - 1.0);
        let a_sq = alpha * alpha + c2 / (ac * ac) - c2 / (ac * ac * n2);
        (a, a_sq)
    };
    Ok(ModeMoments { mean_a, mean_a2, mean_n })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dim_for(alpha: Complex64) -> usize {
        truncation_dim(alpha, &FilterSet::empty())
    }

    #[test]
    fn vacuum_is_zero_amplitude_coherent_state() {
        let s = coherent_state(c(0.0, 0.0), 8).unwrap();
        assert_eq!(s.amps()[0], c(1.0, 0.0));
        assert!(s.amps()[1..].iter().all(|a| *a == c(0.0, 0.0)));
    }

    #[test]
    fn coherent_moments_and_poisson_weight() {
        let alpha = c(2.0, 0.0);
        let s = coherent_state(alpha, dim_for(alpha)).unwrap();
        let m = s.moments();
        assert!((m.mean_n - 4.0).abs() < 1e-10);
        assert!((m.mean_a - c(2.0, 0.0)).norm() < 1e-10);
        assert!((m.mean_a2 - c(4.0, 0.0)).norm() < 1e-10);
        // e^{-4} 4^4 / 4!
        assert!((s.probability(4) - 0.195_366_814_813_164_6).abs() < 1e-12);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn too_small_dimension_is_a_truncation_error() {
        assert!(matches!(coherent_state(c(3.0, 0.0), 10), Err(Error::Truncation { .. })));
        assert!(matches!(coherent_state(c(f64::NAN, 0.0), 10), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn single_filter_norm_and_overlap() {
        let alpha = c(2.0, 0.0);
        let f = FilterSet::singleton(4);
        let d = truncation_dim(alpha, &f);
        let s = filtered_coherent_state(alpha, &f, d).unwrap();
        assert_eq!(s.amps()[4], c(0.0, 0.0));
        let nm = snfcs_norm_factor(alpha, 4);
        assert!((nm - 0.897_013_481_050_778_5).abs() < 1e-12);
        let coh = coherent_state(alpha, d).unwrap();
        assert!((s.overlap(&coh).norm_sqr() - nm * nm).abs() < 1e-12);
    }

    #[test]
    fn empty_filter_is_identity() {
        let alpha = Complex64::from_polar(2.0, 0.3);
        let d = dim_for(alpha);
        let a = filtered_coherent_state(alpha, &FilterSet::empty(), d).unwrap();
        let b = coherent_state(alpha, d).unwrap();
        for (x, y) in a.amps().iter().zip(b.amps()) {
            assert!((x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn even_and_odd_mean_photons() {
        let alpha = c(2.0, 0.0);
        let d = dim_for(alpha);
        let e = even_coherent_state(alpha, d).unwrap();
        let o = odd_coherent_state(alpha, d).unwrap();
        assert!((e.moments().mean_n - 3.997_317_198_956_268).abs() < 1e-9);
        assert!((o.moments().mean_n - 4.002_684_601_606_730).abs() < 1e-9);
        assert!(e.amps().iter().skip(1).step_by(2).all(|a| a.norm() == 0.0));
        assert!(o.amps().iter().step_by(2).all(|a| a.norm() == 0.0));
        let ecs_i = even_coherent_state(c(0.0, 2.0), d).unwrap();
        assert_eq!(ecs_i.moments().mean_a, c(0.0, 0.0));
    }

    #[test]
    fn even_state_at_zero_is_vacuum_and_odd_state_is_rejected() {
        let e = even_coherent_state(c(0.0, 0.0), 6).unwrap();
        assert_eq!(e.amps()[0], c(1.0, 0.0));
        assert!(matches!(odd_coherent_state(c(0.0, 0.0), 6), Err(Error::DegenerateState(_))));
    }

    #[test]
    fn squeezed_vacuum_moments() {
        let r = 1.0;
        let s = squeezed_vacuum(r, squeezed_truncation_dim(r)).unwrap();
        let m = s.moments();
        assert!((m.mean_n - 1.381_097_845_541_815_7).abs() < 1e-10);
        assert!((m.mean_a2 - c(-r.sinh() * r.cosh(), 0.0)).norm() < 1e-10);
        assert_eq!(s.amps()[1], c(0.0, 0.0));
        assert_eq!(s.amps()[3], c(0.0, 0.0));
        let v = squeezed_vacuum(0.0, 4).unwrap();
        assert_eq!(v.amps()[0], c(1.0, 0.0));
        assert!(matches!(squeezed_vacuum(2.0, 20), Err(Error::Truncation { .. })));
    }

    #[test]
    fn degenerate_filter() {
        let err = filtered_coherent_state(c(0.0, 0.0), &FilterSet::singleton(0), 4).unwrap_err();
        assert!(matches!(err, Error::DegenerateFilter { .. }));
        assert!(FilterSet::new([3, 1, 3]).is_err());
    }

    #[test]
    fn closed_form_moments_alpha_two_m_four() {
        let alpha = c(2.0, 0.0);
        let f = FilterSet::singleton(4);
        let s = filtered_coherent_state(alpha, &f, truncation_dim(alpha, &f)).unwrap();
        let brute = s.moments();
        let closed = snfcs_moments_closed_form(alpha, 4).unwrap();
        let nm2 = snfcs_norm_factor(alpha, 4).powi(2);
        assert!((closed.mean_n - (4.0 - 4.0 * (1.0 - nm2)) / nm2).abs() < 1e-14);
        assert!((brute.mean_n - closed.mean_n).abs() < 1e-10);
        assert!((brute.mean_a - closed.mean_a).norm() < 1e-10);
        assert!((brute.mean_a2 - closed.mean_a2).norm() < 1e-10);
    }

    #[test]
    fn closed_form_m_zero_and_singular_alpha() {
        let m = snfcs_moments_closed_form(c(2.0, 0.0), 0).unwrap();
        let n0 = 1.0 - (-4.0f64).exp();
        assert!((m.mean_n - 4.0 / n0).abs() < 1e-12);
        assert_eq!(m.mean_a, c(2.0, 0.0));
        assert!(matches!(snfcs_moments_closed_form(c(0.0, 0.0), 3), Err(Error::Singular(_))));
    }

    #[test]
    fn closed_form_tends_to_coherent_for_large_m() {
        let alpha = c(1.5, 0.5);
        let m = snfcs_moments_closed_form(alpha, 60).unwrap();
        let coh = ModeMoments::coherent(alpha);
        assert!((m.mean_n - coh.mean_n).abs() < 1e-12);
        assert!((m.mean_a - coh.mean_a).norm() < 1e-12);
        assert!((m.mean_a2 - coh.mean_a2).norm() < 1e-12);
    }

    #[test]
    fn closed_form_agrees_with_brute_force_on_grid() {
        for &r in &[0.5, 1.0, 2.0, 3.0] {
            for &phi in &[0.0, FRAC_PI_4, FRAC_PI_2] {
                let alpha = Complex64::from_polar(r, phi);
                for m in 0..=12 {
                    let f = FilterSet::singleton(m);
                    let s = filtered_coherent_state(alpha, &f, truncation_dim(alpha, &f)).unwrap();
                    let b = s.moments();
                    let cf = snfcs_moments_closed_form(alpha, m).unwrap();
                    assert!((b.mean_n - cf.mean_n).abs() < 1e-9, "n r={r} phi={phi} m={m}");
                    assert!((b.mean_a - cf.mean_a).norm() < 1e-9, "a r={r} phi={phi} m={m}");
                    assert!((b.mean_a2 - cf.mean_a2).norm() < 1e-9, "a2 r={r} phi={phi} m={m}");
                }
            }
        }
    }

    #[test]
    fn parity_states_have_zero_mean_field() {
        let alpha = Complex64::from_polar(2.5, 0.7);
        let d = dim_for(alpha);
        for s in [
            even_coherent_state(alpha, d).unwrap(),
            odd_coherent_state(alpha, d).unwrap(),
            squeezed_vacuum(0.8, squeezed_truncation_dim(0.8)).unwrap(),
        ] {
            let m = s.moments();
            assert_eq!(m.mean_a, c(0.0, 0.0));
            assert!(m.mean_a2.norm() > 0.1);
        }
        let ecs = even_coherent_state(alpha, d).unwrap();
        assert!((ecs.moments().mean_a2 - alpha * alpha).norm() < 1e-10);
    }

    #[test]
    fn doubling_the_dimension_leaves_moments_unchanged() {
        let alpha = Complex64::from_polar(3.0, 1.1);
        let f = FilterSet::new([2, 9]).unwrap();
        let d = truncation_dim(alpha, &f);
        let a = filtered_coherent_state(alpha, &f, d).unwrap().moments();
        let b = filtered_coherent_state(alpha, &f, 2 * d).unwrap().moments();
        assert!((a.mean_n - b.mean_n).abs() < 1e-10);
        assert!((a.mean_a - b.mean_a).norm() < 1e-10);
        assert!((a.mean_a2 - b.mean_a2).norm() < 1e-10);
        let r = 1.2;
        let d = squeezed_truncation_dim(r);
        let a = squeezed_vacuum(r, d).unwrap().moments();
        let b = squeezed_vacuum(r, 2 * d).unwrap().moments();
        assert!((a.mean_n - b.mean_n).abs() < 1e-10);
        assert!((a.mean_a2 - b.mean_a2).norm() < 1e-10);
    }

    #[test]
    fn record_round_trip() {
        let alpha = c(1.0, -0.5);
        let f = FilterSet::new([0, 3]).unwrap();
        let s = filtered_coherent_state(alpha, &f, truncation_dim(alpha, &f)).unwrap();
        let json = serde_json::to_string(&s.to_record()).unwrap();
        assert!(json.contains("\"filter\":[0,3]"));
        let back = FockAmplitudes::from_record(serde_json::from_str(&json).unwrap()).unwrap();
        assert_eq!(back, s);
    }
}
