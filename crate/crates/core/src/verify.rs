//! Constructive geometry checks: ε-nets for the covering condition,
//! Ahlfors regularity, uniform perfectness and covering numbers.
//!
//! Nets are built greedily from random probes and their coverage is then
//! validated against an independent probe set.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::index::NearIndex;
use crate::spaces::{Point, Space};

/// Smallest probe batch while growing a net.
const MIN_BATCH: usize = 2_000;
/// Construction gives up after this many batches.
const MAX_BATCHES: usize = 400;
/// Largest net `greedy_net` will build before giving up.
pub const MAX_NET_POINTS: usize = 2_000_000;
/// Proposals allowed per annulus probe.
const ANNULUS_TRIES: u64 = 1_000_000;
/// Validation rounds that may add gap probes to a net.
const MAX_REPAIRS: usize = 8;
/// Probe budget per (x, r) in the uniform-perfectness check.
pub const PERFECTNESS_BUDGET: u64 = 100_000;

/// Parameters of the covering condition: `O` is `εl`-separated and the
/// balls `B(y, l)`, `y ∈ O`, cover `B(x, σr) \ B(x, r)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionParams {
    pub x: Point,
    pub l: f64,
    pub r: f64,
    pub eps: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetReport {
    pub points: Vec<Point>,
    /// Smallest pairwise distance.
    pub separation: f64,
    /// Largest distance from a validation probe to the net.
    pub covering_radius: f64,
    pub cardinality: usize,
    pub params: ConditionParams,
    pub construction_probes: usize,
    pub validation_probes: usize,
    pub passed: bool,
}

/// One draw from the annulus `B(x, outer) \ B(x, inner)`, or `None` after
/// `budget` rejected proposals.
fn annulus_probe(
    space: &Space,
    x: &Point,
    inner: f64,
    outer: f64,
    budget: u64,
    rng: &mut dyn RngCore,
) -> Result<Option<Point>> {
    let window = space.window(x, outer)?;
    for _ in 0..budget {
        if let Some(p) = window.propose(rng) {
            if space.distance(x, &p)? >= inner {
                return Ok(Some(p));
            }
        }
    }
    Ok(None)
}

/// Greedy `ε·l`-separated net of the annulus `B(x, σ·r_scale) \ B(x, r_scale)`.
///
/// Probes are drawn in rounds and inserted greedily, so the net is maximal
/// among all probes drawn. Rounds stop once a fresh check batch finds no
/// point at distance `l` or more from the net; the coverage clause is then
/// validated on `probe_budget` further probes, and validation probes found
/// in a gap are added before validating again.
#[allow(clippy::too_many_arguments)]
pub fn greedy_net(
    space: &Space,
    x: &Point,
    l: f64,
    r_scale: f64,
    eps: f64,
    sigma: f64,
    probe_budget: usize,
    rng: &mut dyn RngCore,
) -> Result<NetReport> {
    if !(l > 0.0 && r_scale > 0.0) {
        return Err(Error::Domain("net scales must be positive".into()));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let (inner, outer) = (r_scale, sigma * r_scale);
    let sep = eps * l;
    let mut net = NearIndex::new(space, sep);
    let mut cover = NearIndex::new(space, l);
    let mut used = 0;
    for _ in 0..MAX_BATCHES {
        if net.len() > MAX_NET_POINTS {
            return Err(Error::Geometry(format!(
                "net at scale {r_scale} exceeds {MAX_NET_POINTS} points"
            )));
        }
        let batch = MIN_BATCH.max(net.len());
        for _ in 0..batch {
            let p =
                annulus_probe(space, x, inner, outer, ANNULUS_TRIES, rng)?.ok_or_else(|| {
                    Error::Geometry(format!("annulus [{inner}, {outer}) yielded no probe point"))
                })?;
            used += 1;
            if net.nearest_within(&p)?.is_none() {
                cover.insert(p.clone());
                net.insert(p);
            }
        }
        let mut uncovered = false;
        for _ in 0..MIN_BATCH {
            let p = annulus_probe(space, x, inner, outer, ANNULUS_TRIES, rng)?
                .expect("annulus produced points before");
            used += 1;
            if cover.nearest_within(&p)?.is_none() {
                uncovered = true;
                cover.insert(p.clone());
                net.insert(p);
                break;
            }
        }
        if !uncovered {
            break;
        }
    }
    // validation probes that land in a gap join the net, then a fresh
    // validation round runs
    let mut validated = 0;
    let mut covering_radius = f64::INFINITY;
    for _ in 0..MAX_REPAIRS {
        let v = validate_cover(space, x, inner, outer, net.points(), l, probe_budget, rng)?;
        validated += v.probes;
        covering_radius = v.worst;
        if v.gaps.is_empty() {
            break;
        }
        for p in v.gaps {
            if net.nearest_within(&p)?.is_none() {
                net.insert(p);
            }
        }
    }
    let points = net.into_points();
    let separation = min_pairwise(space, &points, sep)?;
    let passed = separation >= sep && covering_radius < l;
    Ok(NetReport {
        cardinality: points.len(),
        points,
        separation,
        covering_radius,
        params: ConditionParams {
            x: x.clone(),
            l,
            r: r_scale,
            eps,
            sigma,
        },
        construction_probes: used,
        validation_probes: validated,
        passed,
    })
}

struct CoverCheck {
    /// Largest probe-to-net distance, capped at `2l`.
    worst: f64,
    probes: usize,
    /// Probes at distance `l` or more from the net.
    gaps: Vec<Point>,
}

/// Probe-to-net distances over fresh annulus probes.
#[allow(clippy::too_many_arguments)]
fn validate_cover(
    space: &Space,
    x: &Point,
    inner: f64,
    outer: f64,
    points: &[Point],
    l: f64,
    budget: usize,
    rng: &mut dyn RngCore,
) -> Result<CoverCheck> {
    let cap = 2.0 * l;
    let mut idx = NearIndex::new(space, cap);
    for p in points {
        idx.insert(p.clone());
    }
    let window = space.window(x, outer)?;
    let mut check = CoverCheck {
        worst: 0.0,
        probes: 0,
        gaps: Vec::new(),
    };
    for _ in 0..budget {
        let Some(p) = window.propose(rng) else {
            continue;
        };
        if space.distance(x, &p)? < inner {
            continue;
        }
        check.probes += 1;
        let d = idx.nearest_within(&p)?.unwrap_or(cap);
        check.worst = check.worst.max(d);
        if d >= l {
            check.gaps.push(p);
        }
    }
    Ok(check)
}

/// Smallest pairwise distance, or `floor` when every pair is at least that
/// far apart.
fn min_pairwise(space: &Space, points: &[Point], floor: f64) -> Result<f64> {
    let mut idx = NearIndex::new(space, floor);
    let mut best = floor;
    for p in points {
        if let Some(d) = idx.nearest_within(p)? {
            best = best.min(d);
        }
        idx.insert(p.clone());
    }
    Ok(best)
}

/// Re-checks both clauses of a net with a fresh probe set.
pub fn revalidate(
    space: &Space,
    report: &NetReport,
    probe_budget: usize,
    rng: &mut dyn RngCore,
) -> Result<bool> {
    let p = &report.params;
    let radius = validate_cover(
        space,
        &p.x,
        p.r,
        p.sigma * p.r,
        &report.points,
        p.l,
        probe_budget,
        rng,
    )?
    .worst;
    let sep = min_pairwise(space, &report.points, p.eps * p.l)?;
    Ok(radius < p.l && sep >= p.eps * p.l)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KlNets {
    pub k: NetReport,
    pub l: NetReport,
    /// Lower bound on `d(y, z)` over `y ∈ K`, `z ∈ L`.
    pub cross_distance_bound: f64,
    /// Every `y ∈ K`, `z ∈ L` has `d(y, z) > 20σ³r`.
    pub disjoint: bool,
}

/// The nets `K(x, r)` and `L(x, r)` at scales `10σ³r` and `80σ⁴r`, with
/// `l = r` and `ε = 1/5`.
pub fn nets_k_l(
    space: &Space,
    x: &Point,
    r: f64,
    sigma: f64,
    probe_budget: usize,
    rng: &mut dyn RngCore,
) -> Result<KlNets> {
    let k = greedy_net(
        space,
        x,
        r,
        10.0 * sigma.powi(3) * r,
        0.2,
        sigma,
        probe_budget,
        rng,
    )?;
    let l = greedy_net(
        space,
        x,
        r,
        80.0 * sigma.powi(4) * r,
        0.2,
        sigma,
        probe_budget,
        rng,
    )?;
    let threshold = 20.0 * sigma.powi(3) * r;
    // triangle inequality through x
    let mut k_far = 0.0f64;
    for a in &k.points {
        k_far = k_far.max(space.distance(x, a)?);
    }
    let mut l_near = f64::INFINITY;
    for b in &l.points {
        l_near = l_near.min(space.distance(x, b)?);
    }
    let mut bound = (l_near - k_far).max(0.0);
    let mut disjoint = bound > threshold;
    if !disjoint {
        let mut idx = NearIndex::new(space, threshold);
        for b in &l.points {
            idx.insert(b.clone());
        }
        let mut closest = f64::INFINITY;
        for a in &k.points {
            if let Some(d) = idx.nearest_within(a)? {
                closest = closest.min(d);
            }
        }
        disjoint = closest.is_infinite();
        bound = closest.min(threshold);
    }
    Ok(KlNets {
        k,
        l,
        cross_distance_bound: bound,
        disjoint,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhlforsViolation {
    pub x: Point,
    pub r: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AhlforsFit {
    pub s_hat: f64,
    /// Smallest constant sandwiching every measured mass with the declared `s`.
    pub c_v_hat: f64,
    pub declared_s: f64,
    pub declared_c_v: f64,
    pub violations: Vec<AhlforsViolation>,
    pub samples: usize,
}

/// Radius of the ball around the origin from which random centers are drawn.
const CENTER_SPREAD: f64 = 4.0;

/// Least-squares slope of `log μ(B(x, r))` against `log r` over random
/// centers, plus sandwich violations against the declared constants.
pub fn check_ahlfors(
    space: &Space,
    trials: usize,
    r_grid: &[f64],
    rng: &mut dyn RngCore,
) -> Result<AhlforsFit> {
    if trials < 100 {
        return Err(Error::Usage(format!(
            "at least 100 trials required, got {trials}"
        )));
    }
    if r_grid.len() < 2 {
        return Err(Error::Usage("r grid needs two or more radii".into()));
    }
    let (s, c_v) = (space.s(), space.c_v());
    let origin = space.origin();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut c_hat = 1.0f64;
    let mut violations = Vec::new();
    for _ in 0..trials {
        let x = space.sample_point(&origin, CENTER_SPREAD, rng)?;
        for &r in r_grid {
            let m = space.ball_measure(&x, r)?;
            let scale = r.powf(s);
            xs.push(r.ln());
            ys.push(m.mid().ln());
            c_hat = c_hat.max(m.upper / scale).max(scale / m.lower);
            let tol = 1.0 + 1e-9;
            if m.lower > c_v * scale * tol || m.upper * c_v * tol < scale {
                violations.push(AhlforsViolation {
                    x: x.clone(),
                    r,
                    lower: m.lower,
                    upper: m.upper,
                });
            }
        }
    }
    let (slope, _) = least_squares(&xs, &ys);
    Ok(AhlforsFit {
        s_hat: slope,
        c_v_hat: c_hat,
        declared_s: s,
        declared_c_v: c_v,
        violations,
        samples: xs.len(),
    })
}

/// `(slope, intercept)` of the least-squares line.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerfectnessReport {
    pub sigma: f64,
    pub passed: bool,
    pub checked: usize,
    /// First `(x, r)` whose annulus produced no point.
    pub witness: Option<(Point, f64)>,
}

/// Searches `B(x, σr) \ B(x, r)` for a point at random `(x, r)`, with `r`
/// log-uniform over six decades around 1.
pub fn check_uniformly_perfect(
    space: &Space,
    sigma: f64,
    trials: usize,
    rng: &mut dyn RngCore,
) -> Result<PerfectnessReport> {
    if !(sigma > 1.0) {
        return Err(Error::Domain(format!("sigma must exceed 1, got {sigma}")));
    }
    let origin = space.origin();
    for i in 0..trials {
        let x = space.sample_point(&origin, CENTER_SPREAD, rng)?;
        let r = 10f64.powf(rng.random_range(-3.0..3.0));
        if annulus_probe(space, &x, r, sigma * r, PERFECTNESS_BUDGET, rng)?.is_none() {
            return Ok(PerfectnessReport {
                sigma,
                passed: false,
                checked: i + 1,
                witness: Some((x, r)),
            });
        }
    }
    Ok(PerfectnessReport {
        sigma,
        passed: true,
        checked: trials,
        witness: None,
    })
}

/// Size of a greedy maximal `εr`-separated subset of `B(x, r)`.
pub fn covering_number(
    space: &Space,
    x: &Point,
    r: f64,
    eps: f64,
    rng: &mut dyn RngCore,
) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("eps must lie in (0,1), got {eps}")));
    }
    let window = space.window(x, r)?;
    let mut net = NearIndex::new(space, eps * r);
    for _ in 0..MAX_BATCHES {
        let batch = MIN_BATCH.max(4 * net.len());
        let mut added = 0;
        for _ in 0..batch {
            let Some(p) = window.propose(rng) else {
                continue;
            };
            if net.nearest_within(&p)?.is_none() {
                net.insert(p);
                added += 1;
            }
        }
        if added == 0 && !net.is_empty() {
            break;
        }
    }
    Ok(net.len())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringFit {
    /// `(ε, count)` pairs.
    pub counts: Vec<(f64, usize)>,
    pub c: f64,
    /// Slope of `log count` against `log(1/ε)`.
    pub net_exponent: f64,
}

pub fn covering_fit(
    space: &Space,
    x: &Point,
    r: f64,
    eps_grid: &[f64],
    rng: &mut dyn RngCore,
) -> Result<CoveringFit> {
    let counts = eps_grid
        .iter()
        .map(|&e| Ok((e, covering_number(space, x, r, e, rng)?)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = counts.iter().map(|(e, _)| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(CoveringFit {
        counts,
        c: intercept.exp(),
        net_exponent: slope,
    })
}

/// `ε = 1/2, 1/4, …, 2^{-levels}`.
pub fn dyadic_eps_grid(levels: u32) -> Vec<f64> {
    (1..=levels).map(|k| 0.5f64.powi(k as i32)).collect()
}
