//! Phase table over the λ × law grid.

use serde::{Deserialize, Serialize};

use super::estimate::{run_tallies, Plan};
use super::{binomial_se, ExperimentConfig, RunOptions};
use crate::error::Result;
use crate::theory::{cover_lower_bound, whole_cover_dichotomy, CoverVerdict};

/// One (λ, law) cell. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub law: String,
    /// Largest radius of the grid; the tail columns refer to it.
    pub r: f64,
    pub replications: u64,
    pub p_upper: f64,
    pub se_upper: f64,
    pub p_lower: f64,
    pub se_lower: f64,
    pub verdict: CoverVerdict,
    pub cover_r: f64,
    pub cover_lower_bound: f64,
    pub single_ball_freq: f64,
    pub single_ball_se: f64,
    pub influence_bound: f64,
}

pub enum SweepOutcome {
    Complete(Vec<SweepRow>),
    Stopped,
}

pub fn run_sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<SweepOutcome> {
    let plan = Plan::new(cfg)?;
    let Some(tallies) = run_tallies(cfg, &plan, opts)? else {
        return Ok(SweepOutcome::Stopped);
    };
    let table = super::estimate::tabulate(&plan, &tallies)?;
    let last = plan.r_grid.len() - 1;
    let (s, c_v) = (plan.space.s(), plan.space.c_v());
    let n = plan.replications;
    let rows = plan
        .cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let t = &table.rows[i * plan.r_grid.len() + last];
            SweepRow {
                lambda: cell.lambda,
                law: t.law.clone(),
                r: t.r,
                replications: n,
                p_upper: t.p_upper,
                se_upper: t.se_upper,
                p_lower: t.p_lower,
                se_lower: t.se_lower,
                verdict: whole_cover_dichotomy(&cell.law, s),
                cover_r: cfg.cover_r,
                cover_lower_bound: cover_lower_bound(cell.lambda, c_v, s, &cell.law, cfg.cover_r),
                single_ball_freq: t.single_ball_freq,
                single_ball_se: binomial_se(t.single_ball_freq, n),
                influence_bound: cell.influence_bound,
            }
        })
        .collect();
    Ok(SweepOutcome::Complete(rows))
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<String> {
    super::rows_to_csv(rows)
}
