//! Theory bound tables and single-sample draws.

use serde::{Deserialize, Serialize};

use super::estimate::Plan;
use super::verify::default_net_sigma;
use super::ExperimentConfig;
use crate::error::Result;
use crate::rng::{derive_seed, stream};
use crate::sampler::BooleanSample;
use crate::theory::{BoundSheet, Constants};
use crate::verify::nets_k_l;

/// Long-format bound row. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub lambda: f64,
    pub law: String,
    pub c1: f64,
    pub lambda0: Option<f64>,
    pub r: f64,
    pub g_bound: f64,
    pub h_bound: f64,
    pub htilde_bound: f64,
    pub envelope: f64,
}

/// `C₁` from the configuration, else `#K·#L` of nets at `verify.net_r`.
pub fn resolve_c1(cfg: &ExperimentConfig) -> Result<f64> {
    if let Some(c) = cfg.c1 {
        return Ok(c);
    }
    let space = cfg.space();
    let sigma = cfg
        .verify
        .net_sigma
        .unwrap_or_else(|| default_net_sigma(&space));
    let mut rng = stream(derive_seed(cfg.seed, 0x6331), 0);
    let kl = nets_k_l(
        &space,
        &space.origin(),
        cfg.verify.net_r,
        sigma,
        cfg.verify.probe_budget,
        &mut rng,
    )?;
    Ok((kl.k.cardinality * kl.l.cardinality) as f64)
}

pub fn bound_sheets(cfg: &ExperimentConfig, c1: f64) -> Result<Vec<BoundSheet>> {
    cfg.validate()?;
    let space = cfg.space();
    let mut out = Vec::new();
    for lambda in cfg.lambdas() {
        for law in cfg.laws() {
            out.push(BoundSheet::new(
                Constants::of(&space, lambda),
                &law,
                c1,
                &cfg.r_grid,
            )?);
        }
    }
    Ok(out)
}

pub fn bounds_rows(sheets: &[BoundSheet]) -> Vec<BoundsRow> {
    sheets
        .iter()
        .flat_map(|sh| {
            sh.rows.iter().map(move |row| BoundsRow {
                lambda: sh.constants.lambda,
                law: sh.law.to_string(),
                c1: sh.c1,
                lambda0: sh.lambda0.value(),
                r: row.r,
                g_bound: row.g_bound.value,
                h_bound: row.h_bound.value,
                htilde_bound: row.htilde_bound.value,
                envelope: row.envelope,
            })
        })
        .collect()
}

pub fn bounds_csv(sheets: &[BoundSheet]) -> Result<String> {
    super::rows_to_csv(&bounds_rows(sheets))
}

/// Replication 0 of the first (λ, law) cell, as `estimate` draws it.
pub fn draw_sample(cfg: &ExperimentConfig) -> Result<BooleanSample> {
    Plan::new(cfg)?.sample(0, 0)
}

/// One germ per row.
#[derive(Debug, Clone, Serialize)]
struct GermRow {
    germ: usize,
    radius: f64,
    center: String,
}

pub fn sample_csv(sample: &BooleanSample) -> Result<String> {
    let rows = sample
        .germs
        .iter()
        .enumerate()
        .map(|(i, g)| {
            Ok(GermRow {
                germ: i,
                radius: g.radius,
                center: serde_json::to_string(&g.center)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    super::rows_to_csv(&rows)
}
