//! JSON experiment configuration.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fock::FilterSet;
use crate::search::Strategy;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Custom,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 7] = [
        ExperimentId::Fig2,
        ExperimentId::Fig3,
        ExperimentId::Fig4,
        ExperimentId::Fig5,
        ExperimentId::Fig6,
        ExperimentId::Fig7,
        ExperimentId::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentId::Fig2 => "fig2",
            ExperimentId::Fig3 => "fig3",
            ExperimentId::Fig4 => "fig4",
            ExperimentId::Fig5 => "fig5",
            ExperimentId::Fig6 => "fig6",
            ExperimentId::Fig7 => "fig7",
            ExperimentId::Custom => "custom",
        }
    }
}

impl fmt::Display for ExperimentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment id '{s}'")))
    }
}

/// A complex number written as `2.0`, `[re, im]`, or `{"abs": r, "arg_pi": t}`
/// (argument `t·π`) / `{"abs": r, "arg": t}` (argument in radians).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexSpec {
    Real(f64),
    Pair([f64; 2]),
    Polar(PolarSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolarSpec {
    pub abs: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arg_pi: Option<f64>,
}

impl ComplexSpec {
    pub fn polar_pi(abs: f64, arg_pi: f64) -> Self {
        ComplexSpec::Polar(PolarSpec { abs, arg: None, arg_pi: Some(arg_pi) })
    }

    pub fn value(&self) -> Result<Complex64> {
        let z = match self {
            ComplexSpec::Real(x) => Complex64::new(*x, 0.0),
            ComplexSpec::Pair([re, im]) => Complex64::new(*re, *im),
            ComplexSpec::Polar(p) => {
                let theta = match (p.arg, p.arg_pi) {
                    (Some(_), Some(_)) => return Err(Error::Config("give either 'arg' or 'arg_pi', not both".into())),
                    (Some(t), None) => t,
                    (None, Some(t)) => return polar_pi(p.abs, t),
                    (None, None) => 0.0,
                };
                if p.abs < 0.0 {
                    return Err(Error::Config(format!("negative modulus {}", p.abs)));
                }
                Complex64::from_polar(p.abs, theta)
            }
        };
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Config(format!("non-finite complex value {z}")));
        }
        Ok(z)
    }
}

/// `r e^{iπt}`, exact on the axes.
fn polar_pi(r: f64, t: f64) -> Result<Complex64> {
    if !(r >= 0.0 && r.is_finite() && t.is_finite()) {
        return Err(Error::Config(format!("invalid polar value {r}·e^(iπ·{t})")));
    }
    let quarter = 2.0 * t;
    if quarter.fract() == 0.0 {
        let unit = match quarter.rem_euclid(4.0) as u8 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
        return Ok(unit * r);
    }
    Ok(Complex64::from_polar(r, t * PI))
}

/// How `β` follows from `α`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaRule {
    /// `β = α`
    Alpha,
    /// `β = |α|`
    AbsAlpha,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BetaSpec {
    Rule(BetaRule),
    Value(ComplexSpec),
}

impl BetaSpec {
    pub fn resolve(&self, alpha: Complex64) -> Result<Complex64> {
        match self {
            BetaSpec::Rule(BetaRule::Alpha) => Ok(alpha),
            BetaSpec::Rule(BetaRule::AbsAlpha) => Ok(Complex64::new(alpha.norm(), 0.0)),
            BetaSpec::Value(v) => v.value(),
        }
    }
}

/// Inclusive integer range.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: usize,
    pub end: usize,
}

impl RangeSpec {
    pub fn iter(self) -> std::ops::RangeInclusive<usize> {
        self.start..=self.end
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSettings {
    /// Half-width of the phase-space window; defaults to `|α| + 5`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Fixed truncation dimension for every constructed state.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<Strategy>,
    /// Largest candidate index for the filter search.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<ComplexSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<BetaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<RangeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<RangeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filter: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSettings>,
    /// File name of the CSV inside the output directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub overrides: Overrides,
}

fn reals(xs: impl IntoIterator<Item = f64>) -> Vec<ComplexSpec> {
    xs.into_iter().map(ComplexSpec::Real).collect()
}

fn imaginary(xs: impl IntoIterator<Item = f64>) -> Vec<ComplexSpec> {
    xs.into_iter().map(|a| ComplexSpec::polar_pi(a, 0.5)).collect()
}

impl ExperimentConfig {
    /// Parses and type-checks a config.
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Config with every parameter set to its figure default.
    pub fn preset(id: ExperimentId) -> Self {
        let mut cfg = ExperimentConfig {
            experiment: id,
            alpha: None,
            beta: None,
            m: None,
            k: None,
            filter: None,
            grid: None,
            output: None,
            overrides: Overrides::default(),
        };
        match id {
            ExperimentId::Fig2 => {
                cfg.alpha = Some(reals([2.0, 3.0]));
                cfg.beta = Some(BetaSpec::Value(ComplexSpec::Real(3.0)));
                cfg.m = Some(RangeSpec { start: 0, end: 14 });
            }
            ExperimentId::Fig3 => {
                cfg.alpha = Some(reals((1..=6).map(f64::from)));
                cfg.beta = Some(BetaSpec::Rule(BetaRule::Alpha));
            }
            ExperimentId::Fig4 => {
                cfg.alpha = Some(reals((0..=8).map(|i| 1.0 + 0.25 * f64::from(i))));
                cfg.beta = Some(BetaSpec::Rule(BetaRule::Alpha));
            }
            ExperimentId::Fig5 => {
                cfg.alpha = Some(imaginary([3.0, 4.0]));
                cfg.beta = Some(BetaSpec::Rule(BetaRule::AbsAlpha));
                cfg.k = Some(RangeSpec { start: 1, end: 6 });
            }
            ExperimentId::Fig6 => {
                cfg.alpha = Some(imaginary((1..=24).map(|i| 0.25 * f64::from(i))));
                cfg.beta = Some(BetaSpec::Rule(BetaRule::AbsAlpha));
            }
            ExperimentId::Fig7 => {
                cfg.alpha = Some(imaginary([3.0, 4.0]));
                cfg.beta = Some(BetaSpec::Rule(BetaRule::AbsAlpha));
                cfg.k = Some(RangeSpec { start: 1, end: 6 });
                cfg.grid = Some(GridSettings { extent: None, step: Some(crate::wigner::DEFAULT_STEP) });
            }
            ExperimentId::Custom => {}
        }
        cfg
    }

    /// Fills unset stanzas from the figure defaults.
    pub fn with_defaults(&self) -> Self {
        let base = ExperimentConfig::preset(self.experiment);
        ExperimentConfig {
            experiment: self.experiment,
            alpha: self.alpha.clone().or(base.alpha),
            beta: self.beta.clone().or(base.beta),
            m: self.m.or(base.m),
            k: self.k.or(base.k),
            filter: self.filter.clone().or(base.filter),
            grid: self.grid.or(base.grid),
            output: self.output.clone(),
            overrides: self.overrides,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let id = self.experiment;
        let reject = |present: bool, name: &str, allowed: &[ExperimentId]| -> Result<()> {
            if present && !allowed.contains(&id) {
                return Err(Error::Config(format!("'{name}' is not a parameter of experiment {id}")));
            }
            Ok(())
        };
        reject(self.m.is_some(), "m", &[ExperimentId::Fig2])?;
        reject(self.k.is_some(), "k", &[ExperimentId::Fig5, ExperimentId::Fig7])?;
        reject(self.filter.is_some(), "filter", &[ExperimentId::Custom])?;
        reject(self.grid.is_some(), "grid", &[ExperimentId::Fig7, ExperimentId::Custom])?;

        if let Some(alphas) = &self.alpha {
            if alphas.is_empty() {
                return Err(Error::Config("'alpha' list is empty".into()));
            }
            for a in alphas {
                a.value()?;
            }
        }
        if let Some(BetaSpec::Value(v)) = &self.beta {
            v.value()?;
        }
        if id == ExperimentId::Custom && (self.alpha.is_none() || self.beta.is_none()) {
            return Err(Error::Config("custom experiments need 'alpha' and 'beta'".into()));
        }
        for (name, r) in [("m", self.m), ("k", self.k)] {
            if let Some(r) = r {
                if r.start > r.end {
                    return Err(Error::Config(format!("'{name}' range {}..{} is empty", r.start, r.end)));
                }
            }
        }
        if let Some(k) = self.k {
            if k.start == 0 {
                return Err(Error::Config("'k' must start at 1 or above".into()));
            }
        }
        if let Some(f) = &self.filter {
            FilterSet::new(f.iter().copied()).map_err(|e| Error::Config(e.to_string()))?;
        }
        if let Some(g) = self.grid {
            if let Some(s) = g.step {
                if !(s > 0.0 && s <= 0.1) {
                    return Err(Error::Config(format!("grid step {s} outside (0, 0.1]")));
                }
            }
            if let Some(e) = g.extent {
                if !(e > 0.0 && e.is_finite()) {
                    return Err(Error::Config(format!("grid extent {e} must be positive")));
                }
            }
        }
        let o = self.overrides;
        if o.dim == Some(0) {
            return Err(Error::Config("dimension override must be positive".into()));
        }
        if let Some(name) = &self.output {
            if name.is_empty() || name.contains(['/', '\\']) {
                return Err(Error::Config(format!("output '{name}' must be a plain file name")));
            }
        }
        Ok(())
    }

    pub fn alphas(&self) -> Result<Vec<Complex64>> {
        self.alpha.as_deref().unwrap_or_default().iter().map(ComplexSpec::value).collect()
    }

    pub fn beta_for(&self, alpha: Complex64) -> Result<Complex64> {
        self.beta.as_ref().ok_or_else(|| Error::Config("'beta' is not set".into()))?.resolve(alpha)
    }

    pub fn output_name(&self) -> String {
        self.output.clone().unwrap_or_else(|| format!("{}.csv", self.experiment))
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Candidate family in the oracle validation grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KindSpec {
    Simple(SimpleKind),
    Snfcs { snfcs: usize },
    /// Squeezed vacuum with `sinh²r` given.
    Sv { sv: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimpleKind {
    Vacuum,
    Coherent,
    Ecs,
    Ocs,
}

fn default_alpha_abs() -> Vec<f64> {
    vec![0.5, 1.0, 2.0, 3.0]
}
fn default_phases() -> Vec<f64> {
    vec![0.0, 0.25, 0.5]
}
fn default_betas() -> Vec<f64> {
    vec![1.0, 2.0, 3.0]
}
fn default_kinds() -> Vec<KindSpec> {
    vec![
        KindSpec::Simple(SimpleKind::Coherent),
        KindSpec::Snfcs { snfcs: 1 },
        KindSpec::Snfcs { snfcs: 4 },
        KindSpec::Snfcs { snfcs: 9 },
        KindSpec::Simple(SimpleKind::Ecs),
        KindSpec::Simple(SimpleKind::Ocs),
        KindSpec::Sv { sv: 1.0 },
        KindSpec::Sv { sv: 4.0 },
    ]
}
fn default_tolerance() -> f64 {
    1e-6
}
fn default_fd_step() -> f64 {
    1e-4
}
fn yes() -> bool {
    true
}

/// Parameter grid for the three-route Fisher-information cross-check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidationGrid {
    #[serde(default = "default_alpha_abs")]
    pub alpha_abs: Vec<f64>,
    /// Arguments of `α` in units of `π`.
    #[serde(default = "default_phases")]
    pub phases_pi: Vec<f64>,
    /// Real port-2 amplitudes.
    #[serde(default = "default_betas")]
    pub beta: Vec<f64>,
    #[serde(default = "default_kinds")]
    pub kinds: Vec<KindSpec>,
    /// Adds the all-vacuum input, for which every route must give exactly zero.
    #[serde(default = "yes")]
    pub vacuum_point: bool,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
}

impl Default for ValidationGrid {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults deserialize")
    }
}

impl ValidationGrid {
    pub fn from_json(text: &str) -> Result<Self> {
        let g: ValidationGrid = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite() && *x >= 0.0);
        if !finite(&self.alpha_abs) || !finite(&self.beta) || !self.phases_pi.iter().all(|x| x.is_finite()) {
            return Err(Error::Config("grid values must be finite, moduli non-negative".into()));
        }
        if let Some(a) = self.alpha_abs.iter().find(|a| **a > 6.0) {
            return Err(Error::Config(format!("|α| = {a} exceeds the supported range of 6")));
        }
        if let Some(b) = self.beta.iter().find(|b| **b > 6.0) {
            return Err(Error::Config(format!("β = {b} exceeds the supported range of 6")));
        }
        for k in &self.kinds {
            match k {
                KindSpec::Snfcs { snfcs } if *snfcs > 60 => {
                    return Err(Error::Config(format!("filter index {snfcs} exceeds 60")));
                }
                KindSpec::Sv { sv } if !(*sv >= 0.0 && *sv <= 36.0) => {
                    return Err(Error::Config(format!("sinh²r = {sv} outside [0, 36]")));
                }
                _ => {}
            }
        }
        if !(1e-6..=1e-3).contains(&self.fd_step) {
            return Err(Error::Config(format!("fd_step {} outside [1e-6, 1e-3]", self.fd_step)));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}
