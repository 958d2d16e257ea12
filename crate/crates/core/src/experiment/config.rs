//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radii::RadiusLaw;
use crate::sampler::DEFAULT_HALO_FACTOR;
use crate::spaces::{Space, SpaceSpec};

/// A single value or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowPolicy {
    /// Observation window radius; defaults to twice the largest grid radius.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_halo")]
    pub halo_factor: f64,
    /// When set, the halo factor is raised so the halo gap clears twice
    /// this quantile of the radius law.
    #[serde(default)]
    pub truncation_quantile: Option<f64>,
    /// Abort when the far-ball influence bound exceeds this.
    #[serde(default = "default_ceiling")]
    pub influence_ceiling: f64,
    /// Anchors are drawn from the ball of this radius around the window
    /// center; defaults to a quarter of the window radius.
    #[serde(default)]
    pub anchor_spread: Option<f64>,
}

fn default_halo() -> f64 {
    DEFAULT_HALO_FACTOR
}

fn default_ceiling() -> f64 {
    0.1
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy {
            radius: None,
            halo_factor: DEFAULT_HALO_FACTOR,
            truncation_quantile: None,
            influence_ceiling: default_ceiling(),
            anchor_spread: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySettings {
    #[serde(default = "default_trials")]
    pub ahlfors_trials: usize,
    #[serde(default = "default_perfect_trials")]
    pub perfectness_trials: usize,
    #[serde(default = "default_eps_levels")]
    pub eps_levels: u32,
    #[serde(default = "default_probe_budget")]
    pub probe_budget: usize,
    /// Scale of the K/L nets.
    #[serde(default = "default_net_r")]
    pub net_r: f64,
    /// Relative tolerance on fitted exponents.
    #[serde(default = "default_exponent_tol")]
    pub exponent_tol: f64,
    /// `σ` of the K/L nets; see `experiment::verify::default_net_sigma`.
    #[serde(default)]
    pub net_sigma: Option<f64>,
    #[serde(default)]
    pub skip_nets: bool,
}

fn default_trials() -> usize {
    100
}
fn default_perfect_trials() -> usize {
    50
}
fn default_eps_levels() -> u32 {
    6
}
fn default_probe_budget() -> usize {
    20_000
}
fn default_net_r() -> f64 {
    1.0
}
fn default_exponent_tol() -> f64 {
    0.1
}

impl Default for VerifySettings {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub space: SpaceSpec,
    /// One law, or the law grid of a sweep.
    pub law: OneOrMany<RadiusLaw>,
    /// One intensity or a grid.
    pub lambda: OneOrMany<f64>,
    #[serde(default = "default_anchors")]
    pub anchors: usize,
    pub r_grid: Vec<f64>,
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub window: WindowPolicy,
    /// Moment exponent for `E[min(M, window)^β]`.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Radius of the ball tested by the single-ball cover statistic.
    #[serde(default = "default_cover_r")]
    pub cover_r: f64,
    /// Net-product constant; measured from K/L nets when absent.
    #[serde(default)]
    pub c1: Option<f64>,
    #[serde(default = "default_checkpoint")]
    pub checkpoint_every: u64,
    /// Stop after this many checkpoint chunks (simulated interruption).
    #[serde(default)]
    pub stop_after_chunks: Option<u64>,
    #[serde(default)]
    pub verify: VerifySettings,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

fn default_anchors() -> usize {
    16
}
fn default_replications() -> u64 {
    1000
}
fn default_cover_r() -> f64 {
    1.0
}
fn default_checkpoint() -> u64 {
    1000
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        Space::from_spec(&self.space).map_err(|e| Error::Config(e.to_string()))?;
        let laws = self.laws();
        if laws.is_empty() {
            return bad("law grid is empty".into());
        }
        for law in &laws {
            law.validated().map_err(|e| Error::Config(e.to_string()))?;
        }
        let lambdas = self.lambdas();
        if lambdas.is_empty() {
            return bad("lambda grid is empty".into());
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return bad(format!("intensity {l} is not positive"));
        }
        if self.r_grid.is_empty() {
            return bad("r_grid is empty".into());
        }
        if self.r_grid.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("r_grid entries must be positive".into());
        }
        if self.r_grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("r_grid must be strictly increasing".into());
        }
        if self.replications == 0 {
            return bad("replications must be at least 1".into());
        }
        if self.anchors == 0 {
            return bad("anchors must be at least 1".into());
        }
        if self.checkpoint_every == 0 {
            return bad("checkpoint_every must be at least 1".into());
        }
        if !(self.window.halo_factor >= 1.0) {
            return bad("halo_factor must be at least 1".into());
        }
        if let Some(r) = self.window.radius {
            if !(r > 0.0) {
                return bad("window radius must be positive".into());
            }
        }
        if let Some(q) = self.window.truncation_quantile {
            if !(q > 0.0 && q < 1.0) {
                return bad("truncation_quantile must lie in (0,1)".into());
            }
        }
        if let Some(s) = self.verify.net_sigma {
            if !(s > 1.0) {
                return bad("verify.net_sigma must exceed 1".into());
            }
        }
        if let Some(c) = self.c1 {
            if !(c >= 1.0 && c.is_finite()) {
                return bad("c1 must be a finite number at least 1".into());
            }
        }
        if let Some(b) = self.beta {
            if !(b > 0.0) {
                return bad("beta must be positive".into());
            }
        }
        Ok(())
    }

    pub fn space(&self) -> Space {
        Space::from_spec(&self.space).expect("validated")
    }

    pub fn laws(&self) -> Vec<RadiusLaw> {
        self.law.to_vec()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda.to_vec()
    }

    pub fn window_radius(&self) -> f64 {
        self.window
            .radius
            .unwrap_or(2.0 * self.r_grid[self.r_grid.len() - 1])
    }

    pub fn anchor_spread(&self) -> f64 {
        self.window
            .anchor_spread
            .unwrap_or(0.25 * self.window_radius())
    }

    pub fn halo_factor(&self, law: &RadiusLaw) -> f64 {
        match self.window.truncation_quantile {
            Some(q) => {
                let cut = law.quantile(q);
                if cut.is_finite() {
                    self.window
                        .halo_factor
                        .max(1.0 + 2.0 * cut / self.window_radius())
                } else {
                    self.window.halo_factor
                }
            }
            None => self.window.halo_factor,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{"space":{"kind":"euclidean","dim":2},"law":{"kind":"dirac","r0":1},"lambda":0.1,"r_grid":[1,2]}"#;

    #[test]
    fn defaults_fill_in() {
        let c = ExperimentConfig::from_json(BASE).unwrap();
        assert_eq!(c.anchors, 16);
        assert_eq!(c.window.halo_factor, 3.0);
        assert_eq!(c.lambdas(), vec![0.1]);
        assert_eq!(c.window_radius(), 4.0);
    }

    #[test]
    fn invalid_grids_rejected() {
        let cases = [
            BASE.replace("\"lambda\":0.1", "\"lambda\":[]"),
            BASE.replace("[1,2]", "[2,1]"),
            BASE.replace("[1,2]", "[]"),
            BASE.replace("\"r_grid\"", "\"replications\":0,\"r_grid\""),
            BASE.replace("\"r_grid\"", "\"bogus\":1,\"r_grid\""),
        ];
        for c in cases {
            assert!(
                matches!(ExperimentConfig::from_json(&c), Err(Error::Config(_))),
                "{c}"
            );
        }
    }
}
