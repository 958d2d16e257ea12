//! Clusters of a realization and the scale events used by the renormalization
//! argument.
//!
//! `G(x, r)`: inside `B(x, 10σ³r)`, a chain of germs links `B(x, r)` to the
//! annulus `B(x, 9σ²r) \ B(x, 8σr)`. `H(x, r)`: some germ centered outside
//! `B(x, 10σ³r)` has radius above `d(x, y)/(10τ)`. `H̃(x, r)`: some germ
//! centered in `B(x, 100σ⁶r)` has radius at least `r`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index;
use crate::sampler::{BooleanSample, Germ};
use crate::spaces::{Point, Space};
use crate::theory::tau;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    pub anchor: Point,
    /// `M(anchor)`; 0 when no germ ball contains the anchor.
    pub m_value: f64,
    /// The cluster may extend past what the halo can see.
    pub censored: bool,
    pub component_size: usize,
    /// `m_value` is an upper envelope rather than the exact supremum.
    pub envelope_flag: bool,
}

impl ClusterReport {
    pub const CSV_HEADER: &'static str = "anchor_id,m_value,censored,component_size,envelope_flag";

    pub fn csv_row(&self, anchor_id: usize) -> String {
        format!(
            "{anchor_id},{},{},{},{}",
            self.m_value, self.censored, self.component_size, self.envelope_flag
        )
    }
}

fn balls(germs: &[Germ]) -> Vec<(&Point, f64)> {
    germs.iter().map(|g| (&g.center, g.radius)).collect()
}

/// Partition of germ indices into percolation components, each sorted, in
/// order of smallest member.
pub fn connected_components(space: &Space, sample: &BooleanSample) -> Result<Vec<Vec<usize>>> {
    let labels = index::component_labels(space, &balls(&sample.germs))?;
    Ok(partition(&labels))
}

fn partition(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut out = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        out[l].push(i);
    }
    out
}

/// Components of one sample, reusable across anchors.
pub struct Clustering<'a> {
    space: &'a Space,
    sample: &'a BooleanSample,
    labels: Vec<usize>,
    sizes: Vec<usize>,
    /// Per component: some member ball reaches the halo boundary.
    touches_halo: Vec<bool>,
}

impl<'a> Clustering<'a> {
    pub fn new(space: &'a Space, sample: &'a BooleanSample) -> Result<Self> {
        let labels = index::component_labels(space, &balls(&sample.germs))?;
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0; k];
        let mut touches_halo = vec![false; k];
        for (g, &l) in sample.germs.iter().zip(&labels) {
            sizes[l] += 1;
            if !touches_halo[l] {
                let reach = space.ball_sup_distance(&sample.window_center, &g.center, g.radius)?;
                touches_halo[l] = reach.value >= sample.halo_radius;
            }
        }
        Ok(Clustering {
            space,
            sample,
            labels,
            sizes,
            touches_halo,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn components(&self) -> Vec<Vec<usize>> {
        partition(&self.labels)
    }

    pub fn report(&self, anchor: &Point) -> Result<ClusterReport> {
        let space = self.space;
        let mut hit = None;
        for (i, g) in self.sample.germs.iter().enumerate() {
            if space.distance(anchor, &g.center)? < g.radius {
                hit = Some(self.labels[i]);
                break;
            }
        }
        let Some(label) = hit else {
            return Ok(ClusterReport {
                anchor: anchor.clone(),
                m_value: 0.0,
                censored: false,
                component_size: 0,
                envelope_flag: false,
            });
        };
        let mut m = 0.0f64;
        let mut envelope = false;
        for (g, &l) in self.sample.germs.iter().zip(&self.labels) {
            if l == label {
                let sup = space.ball_sup_distance(anchor, &g.center, g.radius)?;
                m = m.max(sup.value);
                envelope |= sup.envelope;
            }
        }
        let unbounded_leak = self.sample.influence_bound > 0.0 && !self.sample.law.is_bounded();
        Ok(ClusterReport {
            anchor: anchor.clone(),
            m_value: m,
            censored: self.touches_halo[label] || unbounded_leak,
            component_size: self.sizes[label],
            envelope_flag: envelope,
        })
    }
}

pub fn cluster_radius(
    space: &Space,
    sample: &BooleanSample,
    anchor: &Point,
) -> Result<ClusterReport> {
    Clustering::new(space, sample)?.report(anchor)
}

fn check_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("scale r must be positive, got {r}")))
    }
}

/// `G(x, r)`. Fails with a coverage error when the halo does not contain
/// `B(x, 10σ³r)`.
pub fn event_g(
    space: &Space,
    sample: &BooleanSample,
    x: &Point,
    r: f64,
    sigma: f64,
) -> Result<bool> {
    check_radius(r)?;
    let outer = 10.0 * sigma.powi(3) * r;
    let reach = space.ball_sup_distance(&sample.window_center, x, outer)?;
    if reach.value > sample.halo_radius {
        return Err(Error::Coverage(format!(
            "halo radius {} does not contain B(x, {outer}) (needs {})",
            sample.halo_radius, reach.value
        )));
    }
    let mut inside = Vec::new();
    for g in &sample.germs {
        if space.distance(x, &g.center)? < outer {
            inside.push(g);
        }
    }
    if inside.is_empty() {
        return Ok(false);
    }
    let pts: Vec<(&Point, f64)> = inside.iter().map(|g| (&g.center, g.radius)).collect();
    let labels = index::component_labels(space, &pts)?;
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut touches_core = vec![false; k];
    for (g, &l) in inside.iter().zip(&labels) {
        if !touches_core[l] && space.balls_intersect(x, r, &g.center, g.radius)? {
            touches_core[l] = true;
        }
    }
    let (r_in, r_out) = (8.0 * sigma * r, 9.0 * sigma * sigma * r);
    for (g, &l) in inside.iter().zip(&labels) {
        if touches_core[l]
            && space
                .ball_meets_annulus(&g.center, g.radius, x, r_in, r_out)?
                .hit()
        {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `H(x, r)`, over the germs the sample holds.
pub fn event_h(
    space: &Space,
    sample: &BooleanSample,
    x: &Point,
    r: f64,
    sigma: f64,
) -> Result<bool> {
    check_radius(r)?;
    let outer = 10.0 * sigma.powi(3) * r;
    let t = tau(sigma)?;
    for g in &sample.germs {
        let d = space.distance(x, &g.center)?;
        if d >= outer && g.radius > d / (10.0 * t) {
            return Ok(true);
        }
    }
    Ok(false)
}

/// `H̃(x, r)`.
pub fn event_htilde(
    space: &Space,
    sample: &BooleanSample,
    x: &Point,
    r: f64,
    sigma: f64,
) -> Result<bool> {
    check_radius(r)?;
    let outer = 100.0 * sigma.powi(6) * r;
    for g in &sample.germs {
        if g.radius >= r && space.distance(x, &g.center)? < outer {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Some germ has `d(o, center) < radius - r`, which forces `B(o, r)` inside
/// its ball.
pub fn single_ball_covers(
    space: &Space,
    sample: &BooleanSample,
    o: &Point,
    r: f64,
) -> Result<bool> {
    check_radius(r)?;
    for g in &sample.germs {
        if g.radius > r && space.distance(o, &g.center)? < g.radius - r {
            return Ok(true);
        }
    }
    Ok(false)
}
