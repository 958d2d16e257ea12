//! Tail estimation of `M(anchor)` over seeded replications.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checkpoint::{CellTally, Manifest, MANIFEST_VERSION};
use super::{binomial_se, ExperimentConfig, RunOptions};
use crate::error::{Error, Result};
use crate::percolation::{single_ball_covers, Clustering};
use crate::radii::RadiusLaw;
use crate::rng::{self, derive_seed, AUX_STREAM};
use crate::sampler::{far_ball_influence_bound, BooleanSample, ModelSpec};
use crate::spaces::{Point, Space};
use crate::theory::{cluster_tail_envelope, event_bounds, ultrametric_tail_bound, Constants};

/// One (λ, law) combination of the configured grids.
#[derive(Debug, Clone)]
pub struct CellPlan {
    pub lambda: f64,
    pub law: RadiusLaw,
    pub halo_factor: f64,
    pub influence_bound: f64,
    seed: u64,
}

/// Everything fixed before the first replication.
#[derive(Debug, Clone)]
pub struct Plan {
    pub space: Space,
    pub center: Point,
    pub window_radius: f64,
    pub anchors: Vec<Point>,
    pub r_grid: Vec<f64>,
    pub cells: Vec<CellPlan>,
    pub replications: u64,
    beta: Option<f64>,
    cover_r: f64,
}

/// Per-replication observations.
struct Outcome {
    m: Vec<f64>,
    censored: Vec<bool>,
    covers: bool,
}

impl Plan {
    /// Fixes anchors and halos; aborts when a cell's far-ball influence
    /// exceeds the configured ceiling.
    pub fn new(cfg: &ExperimentConfig) -> Result<Plan> {
        cfg.validate()?;
        let space = cfg.space();
        let center = space.origin();
        let window_radius = cfg.window_radius();
        let mut aux = rng::stream(cfg.seed, AUX_STREAM);
        let spread = space.window(&center, cfg.anchor_spread())?;
        let anchors = (0..cfg.anchors)
            .map(|_| spread.sample(&mut aux))
            .collect::<Result<Vec<_>>>()?;
        let mut cells = Vec::new();
        for lambda in cfg.lambdas() {
            for law in cfg.laws() {
                let halo_factor = cfg.halo_factor(&law);
                let influence_bound = far_ball_influence_bound(
                    &space,
                    lambda,
                    &law,
                    window_radius,
                    halo_factor * window_radius,
                )?;
                if influence_bound > cfg.window.influence_ceiling {
                    return Err(Error::Truncation(format!(
                        "far-ball influence bound {influence_bound:.3e} exceeds the ceiling {} for λ={lambda}, law {law}; \
                         raise window.halo_factor or set window.truncation_quantile",
                        cfg.window.influence_ceiling
                    )));
                }
                let seed = derive_seed(cfg.seed, cells.len() as u64);
                cells.push(CellPlan {
                    lambda,
                    law,
                    halo_factor,
                    influence_bound,
                    seed,
                });
            }
        }
        Ok(Plan {
            space,
            center,
            window_radius,
            anchors,
            r_grid: cfg.r_grid.clone(),
            cells,
            replications: cfg.replications,
            beta: cfg.beta,
            cover_r: cfg.cover_r,
        })
    }

    pub fn model(&self, cell: usize) -> ModelSpec<'_> {
        let c = &self.cells[cell];
        ModelSpec {
            space: &self.space,
            lambda: c.lambda,
            law: &c.law,
            window_center: &self.center,
            window_radius: self.window_radius,
            halo_factor: c.halo_factor,
        }
    }

    /// Replication `index` of `cell`, exactly as the runner draws it.
    pub fn sample(&self, cell: usize, index: u64) -> Result<BooleanSample> {
        self.model(cell).replicate(self.cells[cell].seed, index)
    }

    fn observe(&self, sample: &BooleanSample) -> Result<Outcome> {
        let clustering = Clustering::new(&self.space, sample)?;
        let mut m = Vec::with_capacity(self.anchors.len());
        let mut censored = Vec::with_capacity(self.anchors.len());
        for a in &self.anchors {
            let rep = clustering.report(a)?;
            m.push(rep.m_value);
            censored.push(rep.censored);
        }
        let covers = single_ball_covers(&self.space, sample, &self.center, self.cover_r)?;
        Ok(Outcome {
            m,
            censored,
            covers,
        })
    }

    fn absorb(&self, t: &mut CellTally, o: &Outcome) {
        for (k, a) in t.anchors.iter_mut().enumerate() {
            let (m, cens) = (o.m[k], o.censored[k]);
            a.censored += cens as u64;
            for (j, &r) in self.r_grid.iter().enumerate() {
                if m > r || cens {
                    a.upper[j] += 1;
                }
                if m > r && !cens {
                    a.lower[j] += 1;
                }
            }
            if let Some(beta) = self.beta {
                let v = m.min(self.window_radius).powf(beta);
                a.beta_sum += v;
                a.beta_sq += v * v;
            }
        }
        t.cover_hits += o.covers as u64;
    }

    /// Folds replications `from..to` of `cell` into `t` in index order.
    /// Returns the last sample of the range for checkpoint dumps.
    fn run_chunk(
        &self,
        cell: usize,
        t: &mut CellTally,
        from: u64,
        to: u64,
    ) -> Result<BooleanSample> {
        let results: Vec<Result<(Outcome, Option<BooleanSample>)>> = (from..to)
            .into_par_iter()
            .map(|i| {
                let sample = self.sample(cell, i)?;
                let o = self.observe(&sample)?;
                Ok((o, (i + 1 == to).then_some(sample)))
            })
            .collect();
        let mut last = None;
        for r in results {
            let (o, s) = r?;
            self.absorb(t, &o);
            last = s.or(last);
        }
        t.done = to;
        Ok(last.expect("non-empty chunk"))
    }
}

/// Canonical JSON of the fields that influence results.
pub fn fingerprint(cfg: &ExperimentConfig) -> Result<String> {
    let mut c = cfg.clone();
    c.out = None;
    c.stop_after_chunks = None;
    c.checkpoint_every = 0;
    c.verify = Default::default();
    Ok(serde_json::to_string(&c)?)
}

/// Tallies for every cell, resuming from `opts.out` when a checkpoint
/// exists. `None` when `stop_after_chunks` interrupted the run.
pub(crate) fn run_tallies(
    cfg: &ExperimentConfig,
    plan: &Plan,
    opts: &RunOptions,
) -> Result<Option<Vec<CellTally>>> {
    let fp = fingerprint(cfg)?;
    let fresh = || Manifest {
        version: MANIFEST_VERSION,
        fingerprint: fp.clone(),
        cells: vec![CellTally::new(plan.anchors.len(), plan.r_grid.len()); plan.cells.len()],
        dumps: Vec::new(),
    };
    let mut manifest = match &opts.out {
        Some(dir) => Manifest::load(dir, &fp)?.unwrap_or_else(fresh),
        None => fresh(),
    };
    let pool = opts.pool()?;
    let mut chunks = 0u64;
    for cell in 0..plan.cells.len() {
        while manifest.cells[cell].done < plan.replications {
            if cfg.stop_after_chunks.is_some_and(|n| chunks >= n) {
                if let Some(dir) = &opts.out {
                    manifest.save(dir)?;
                }
                return Ok(None);
            }
            let from = manifest.cells[cell].done;
            let to = plan.replications.min(from + cfg.checkpoint_every);
            let mut t = manifest.cells[cell].clone();
            let last = pool.install(|| plan.run_chunk(cell, &mut t, from, to))?;
            manifest.cells[cell] = t;
            chunks += 1;
            if let Some(dir) = &opts.out {
                manifest.dump(dir, cell, &last)?;
                manifest.save(dir)?;
            }
        }
    }
    Ok(Some(manifest.cells))
}

/// One row of the tail table. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    pub lambda: f64,
    pub law: String,
    pub r: f64,
    pub replications: u64,
    /// Max over anchors of the censored-as-exceeding frequency of `M > r`.
    pub p_upper: f64,
    pub se_upper: f64,
    /// Max over anchors of the censored-dropped frequency of `M > r`.
    pub p_lower: f64,
    pub se_lower: f64,
    /// Anchor attaining `p_upper`.
    pub anchor_upper: usize,
    /// Largest censored fraction over anchors.
    pub censored_fraction: f64,
    /// Theory bound on `sup_x P(M(x) > r)` at scale `r/(9σ²)`.
    pub cluster_tail_envelope: f64,
    /// Ultrametric backends: `1 - exp(-λ ∫_{(r,∞)} μ(B(x,R)) ρ(dR))`.
    pub ultrametric_exact: Option<f64>,
    /// Ultrametric backends: `P(M > r)` under open-ball semantics.
    pub ultrametric_strict: Option<f64>,
    pub influence_bound: f64,
    /// Max over anchors of the mean of `min(M, window)^β`.
    pub beta_moment: Option<f64>,
    pub beta_se: Option<f64>,
    /// Frequency of one ball covering the cover-test ball.
    pub single_ball_freq: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateTable {
    pub anchors: Vec<Point>,
    pub rows: Vec<EstimateRow>,
}

pub enum EstimateOutcome {
    Complete(EstimateTable),
    /// Interrupted by `stop_after_chunks`; the checkpoint holds the progress.
    Stopped,
}

pub(crate) fn tabulate(plan: &Plan, tallies: &[CellTally]) -> Result<EstimateTable> {
    let mut rows = Vec::new();
    let n = plan.replications;
    let sigma = plan.space.sigma();
    for (cell, t) in plan.cells.iter().zip(tallies) {
        let k = Constants::of(&plan.space, cell.lambda);
        let freq = |c: u64| c as f64 / n as f64;
        let (beta_moment, beta_se) = match plan.beta {
            None => (None, None),
            Some(_) => {
                let best = t
                    .anchors
                    .iter()
                    .map(|a| {
                        let mean = a.beta_sum / n as f64;
                        let var = (a.beta_sq / n as f64 - mean * mean).max(0.0);
                        (mean, (var / n as f64).sqrt())
                    })
                    .fold(
                        (f64::NEG_INFINITY, 0.0),
                        |acc, v| if v.0 > acc.0 { v } else { acc },
                    );
                (Some(best.0), Some(best.1))
            }
        };
        for (j, &r) in plan.r_grid.iter().enumerate() {
            let mut anchor_upper = 0;
            for (i, a) in t.anchors.iter().enumerate() {
                if a.upper[j] > t.anchors[anchor_upper].upper[j] {
                    anchor_upper = i;
                }
            }
            let p_upper = freq(t.anchors[anchor_upper].upper[j]);
            let p_lower = freq(t.anchors.iter().map(|a| a.lower[j]).max().unwrap_or(0));
            let scale = r / (9.0 * sigma * sigma);
            let g = event_bounds(&k, &cell.law, scale)?.g.value;
            let envelope = cluster_tail_envelope(&k, &cell.law, g, scale)?;
            let ultra = if plan.space.ultrametric() {
                Some(ultrametric_tail_bound(
                    &plan.space,
                    cell.lambda,
                    &cell.law,
                    r,
                )?)
            } else {
                None
            };
            rows.push(EstimateRow {
                lambda: cell.lambda,
                law: cell.law.to_string(),
                r,
                replications: n,
                p_upper,
                se_upper: binomial_se(p_upper, n),
                p_lower,
                se_lower: binomial_se(p_lower, n),
                anchor_upper,
                censored_fraction: freq(t.anchors.iter().map(|a| a.censored).max().unwrap_or(0)),
                cluster_tail_envelope: envelope,
                ultrametric_exact: ultra.map(|u| u.exact),
                ultrametric_strict: ultra.map(|u| u.strict),
                influence_bound: cell.influence_bound,
                beta_moment,
                beta_se,
                single_ball_freq: freq(t.cover_hits),
            });
        }
    }
    Ok(EstimateTable {
        anchors: plan.anchors.clone(),
        rows,
    })
}

pub fn run_estimate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<EstimateOutcome> {
    let plan = Plan::new(cfg)?;
    match run_tallies(cfg, &plan, opts)? {
        None => Ok(EstimateOutcome::Stopped),
        Some(t) => Ok(EstimateOutcome::Complete(tabulate(&plan, &t)?)),
    }
}

impl EstimateTable {
    pub fn to_csv(&self) -> Result<String> {
        super::rows_to_csv(&self.rows)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `estimate.csv` or `estimate.json` and `tail.svg` into `dir`.
    pub fn write(&self, dir: &Path, json: bool) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        if json {
            std::fs::write(dir.join("estimate.json"), self.to_json()?)?;
        } else {
            std::fs::write(dir.join("estimate.csv"), self.to_csv()?)?;
        }
        std::fs::write(dir.join("tail.svg"), super::svg::tail_plot(&self.rows))?;
        Ok(())
    }
}
