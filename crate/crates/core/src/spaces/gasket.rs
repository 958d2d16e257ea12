//! The unbounded Sierpinski gasket `⋃ₙ 2ⁿ S̃` with its geodesic metric and
//! the `log 3 / log 2`-dimensional Hausdorff measure normalized so the unit
//! gasket has mass 1.
//!
//! A point at scale `n` with base-3 address `w` is `2ⁿ F_w(a₀)`, where
//! `F_i(x) = (x - aᵢ)/2 + aᵢ`. Every cell meets the rest of the gasket only
//! at its three corners, so the distance from a point to the corners of the
//! cells containing it obeys a three-term min-plus recursion along the
//! address. Geodesic distances between addressed points are exact.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CORNERS: [[f64; 2]; 3] = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.866_025_403_784_438_6]];

/// Random base-3 digits appended below a sampling cell.
pub const SAMPLE_DEPTH: usize = 30;
/// Digits used to approximate a cell corner by an addressed point.
const VERTEX_DEPTH: usize = 40;
/// Target ratio upper/lower for certified ball masses.
pub const MASS_RATIO_TARGET: f64 = 1.0 + 1e-2;
const MAX_REFINE_LEVELS: usize = 40;
const MAX_FRONTIER: usize = 4_000_000;

pub fn dimension() -> f64 {
    3f64.ln() / 2f64.ln()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasketPoint {
    pub scale: i32,
    pub address: Vec<u8>,
    pub ambient: [f64; 2],
}

pub fn decode(scale: i32, address: &[u8]) -> [f64; 2] {
    let mut x = [0.0, 0.0];
    let mut w = 0.5;
    for &d in address {
        let a = CORNERS[d as usize];
        x[0] += a[0] * w;
        x[1] += a[1] * w;
        w *= 0.5;
    }
    let s = 2f64.powi(scale);
    [x[0] * s, x[1] * s]
}

impl GasketPoint {
    /// Canonical point: leading zero digits fold into the scale and trailing
    /// zero digits are dropped.
    pub fn new(scale: i32, address: Vec<u8>) -> Result<Self> {
        if address.iter().any(|&d| d > 2) {
            return Err(Error::Domain(
                "gasket address digits must be 0, 1 or 2".into(),
            ));
        }
        let lead = address.iter().take_while(|&&d| d == 0).count();
        let mut address = address[lead..].to_vec();
        while address.last() == Some(&0) {
            address.pop();
        }
        let scale = if address.is_empty() {
            0
        } else {
            scale - lead as i32
        };
        let ambient = decode(scale, &address);
        Ok(GasketPoint {
            scale,
            address,
            ambient,
        })
    }

    pub fn origin() -> Self {
        GasketPoint {
            scale: 0,
            address: Vec::new(),
            ambient: [0.0, 0.0],
        }
    }

    /// Checks the stored ambient pair against the decoded address.
    pub fn check(&self) -> Result<()> {
        if self.address.iter().any(|&d| d > 2) {
            return Err(Error::Domain(
                "gasket address digits must be 0, 1 or 2".into(),
            ));
        }
        let d = decode(self.scale, &self.address);
        let tol = 1e-12 * 2f64.powi(self.scale).max(1.0);
        if (d[0] - self.ambient[0]).abs() > tol || (d[1] - self.ambient[1]).abs() > tol {
            return Err(Error::Domain(format!(
                "gasket ambient {:?} does not match address decode {:?}",
                self.ambient, d
            )));
        }
        Ok(())
    }

    /// Address relative to the cell `2^top S̃`.
    fn aligned(&self, top: i32) -> Vec<u8> {
        debug_assert!(top >= self.scale || self.address.is_empty());
        let lead = (top - self.scale).max(0) as usize;
        let mut w = vec![0u8; lead];
        w.extend_from_slice(&self.address);
        w
    }

    /// Top scale at which the point's address starts (no leading zeros).
    fn top_scale(&self) -> i32 {
        if self.address.is_empty() {
            i32::MIN / 2
        } else {
            self.scale
        }
    }
}

/// Vertices of the level-1 graph of a cell: `(i, i)` is corner `i`, `(i, k)`
/// with `i < k` the midpoint of corners `i` and `k`.
type Vertex = (u8, u8);

fn vertex(i: u8, k: u8) -> Vertex {
    if i <= k {
        (i, k)
    } else {
        (k, i)
    }
}

/// Graph distance in edges between level-1 vertices.
fn edges(a: Vertex, b: Vertex) -> f64 {
    if a == b {
        return 0.0;
    }
    let (ac, bc) = (a.0 == a.1, b.0 == b.1);
    match (ac, bc) {
        (true, true) => 2.0,
        (true, false) => {
            if b.0 == a.0 || b.1 == a.0 {
                1.0
            } else {
                2.0
            }
        }
        (false, true) => {
            if a.0 == b.0 || a.1 == b.0 {
                1.0
            } else {
                2.0
            }
        }
        (false, false) => 1.0,
    }
}

/// Distances from a point to the corners of every cell on its address path.
struct Tracker {
    addr: Vec<u8>,
    chain: Vec<[f64; 3]>,
    top_side: f64,
}

impl Tracker {
    fn new(p: &GasketPoint, top: i32) -> Self {
        let addr = p.aligned(top);
        let top_side = 2f64.powi(top);
        let depth = addr.len();
        let mut chain = vec![[0.0; 3]; depth + 1];
        let leaf = top_side * 0.5f64.powi(depth as i32);
        chain[depth] = [0.0, leaf, leaf];
        for j in (0..depth).rev() {
            let i = addr[j];
            let child = top_side * 0.5f64.powi(j as i32 + 1);
            let below = chain[j + 1];
            for t in 0..3u8 {
                chain[j][t as usize] = (0..3u8)
                    .map(|k| below[k as usize] + edges(vertex(i, k), (t, t)) * child)
                    .fold(f64::INFINITY, f64::min);
            }
        }
        Tracker {
            addr,
            chain,
            top_side,
        }
    }

    fn digit(&self, level: usize) -> u8 {
        self.addr.get(level).copied().unwrap_or(0)
    }

    fn dists(&self, level: usize) -> [f64; 3] {
        match self.chain.get(level) {
            Some(d) => *d,
            None => {
                let side = self.top_side * 0.5f64.powi(level as i32);
                [0.0, side, side]
            }
        }
    }
}

fn min3(d: [f64; 3]) -> f64 {
    d[0].min(d[1]).min(d[2])
}

#[derive(Debug, Clone)]
struct Cell {
    prefix: Vec<u8>,
    dists: Vec<[f64; 3]>,
    contains: Vec<bool>,
}

struct Descent {
    top: i32,
    trackers: Vec<Tracker>,
}

impl Descent {
    fn side(&self, level: usize) -> f64 {
        2f64.powi(self.top) * 0.5f64.powi(level as i32)
    }

    fn mass(&self, level: usize) -> f64 {
        3f64.powi(self.top - level as i32)
    }

    fn root(&self) -> Cell {
        Cell {
            prefix: Vec::new(),
            dists: self.trackers.iter().map(|t| t.dists(0)).collect(),
            contains: vec![true; self.trackers.len()],
        }
    }

    fn children(&self, cell: &Cell) -> [Cell; 3] {
        let level = cell.prefix.len();
        let child_side = self.side(level + 1);
        std::array::from_fn(|i| {
            let i = i as u8;
            let mut prefix = cell.prefix.clone();
            prefix.push(i);
            let mut dists = Vec::with_capacity(self.trackers.len());
            let mut contains = Vec::with_capacity(self.trackers.len());
            for (t, tr) in self.trackers.iter().enumerate() {
                if cell.contains[t] {
                    let j = tr.digit(level);
                    if j == i {
                        dists.push(tr.dists(level + 1));
                        contains.push(true);
                    } else {
                        let own = tr.dists(level + 1);
                        let d: [f64; 3] = std::array::from_fn(|kk| {
                            (0..3u8)
                                .map(|k| {
                                    own[k as usize]
                                        + edges(vertex(j, k), vertex(i, kk as u8)) * child_side
                                })
                                .fold(f64::INFINITY, f64::min)
                        });
                        dists.push(d);
                        contains.push(false);
                    }
                } else {
                    let parent = cell.dists[t];
                    let d: [f64; 3] = std::array::from_fn(|kk| {
                        (0..3u8)
                            .map(|c| {
                                parent[c as usize] + edges((c, c), vertex(i, kk as u8)) * child_side
                            })
                            .fold(f64::INFINITY, f64::min)
                    });
                    dists.push(d);
                    contains.push(false);
                }
            }
            Cell {
                prefix,
                dists,
                contains,
            }
        })
    }

    /// Range `[inf, sup]` of distances from tracker `t` to points of the cell.
    fn range(&self, cell: &Cell, t: usize) -> (f64, f64) {
        let side = self.side(cell.prefix.len());
        let m = min3(cell.dists[t]);
        let inf = if cell.contains[t] { 0.0 } else { m };
        (inf, m + side)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Gasket;

/// Cells of a sampling window: all level-`level` cells meeting the ball,
/// below the top cell `2^top S̃`.
#[derive(Debug, Clone)]
pub struct CellCover {
    pub top: i32,
    pub level: usize,
    pub cells: Vec<Vec<u8>>,
}

impl CellCover {
    pub fn cell_mass(&self) -> f64 {
        3f64.powi(self.top - self.level as i32)
    }

    pub fn total_mass(&self) -> f64 {
        self.cell_mass() * self.cells.len() as f64
    }

    /// μ-uniform point of a uniformly chosen cell.
    pub fn propose(&self, rng: &mut dyn RngCore) -> GasketPoint {
        let cell = &self.cells[rng.random_range(0..self.cells.len())];
        let mut addr = cell.clone();
        addr.extend((0..SAMPLE_DEPTH).map(|_| rng.random_range(0..3u8)));
        GasketPoint::new(self.top, addr).expect("valid digits")
    }
}

impl Gasket {
    pub fn distance(&self, a: &GasketPoint, b: &GasketPoint) -> f64 {
        let top = a.top_scale().max(b.top_scale()).max(0);
        let mut wa = a.aligned(top);
        let mut wb = b.aligned(top);
        let len = wa.len().max(wb.len());
        wa.resize(len, 0);
        wb.resize(len, 0);
        let Some(p) = (0..len).find(|&j| wa[j] != wb[j]) else {
            return 0.0;
        };
        let top_side = 2f64.powi(top);
        let child = top_side * 0.5f64.powi(p as i32 + 1);
        let da = corner_dists_at(&wa, p + 1, top_side);
        let db = corner_dists_at(&wb, p + 1, top_side);
        let (i, j) = (wa[p], wb[p]);
        let mut best = f64::INFINITY;
        for k in 0..3u8 {
            for l in 0..3u8 {
                let d = da[k as usize] + edges(vertex(i, k), vertex(j, l)) * child + db[l as usize];
                best = best.min(d);
            }
        }
        best
    }

    /// Smallest top scale whose cell contains `B(x, r)` and all `others`.
    fn top_for(&self, x: &GasketPoint, r: f64, others: &[&GasketPoint]) -> i32 {
        let mut top = others
            .iter()
            .map(|p| p.top_scale())
            .fold(x.top_scale(), i32::max)
            .max(0);
        loop {
            let t = Tracker::new(x, top);
            let d = t.dists(0);
            if d[1].min(d[2]) >= r {
                return top;
            }
            top += 1;
        }
    }

    /// Certified interval for `μ(B(x, r))` by cell counting.
    pub fn ball_measure(&self, x: &GasketPoint, r: f64) -> (f64, f64) {
        let top = self.top_for(x, r, &[]);
        let descent = Descent {
            top,
            trackers: vec![Tracker::new(x, top)],
        };
        let mut lower = 0.0;
        let mut frontier = vec![descent.root()];
        let mut level = 0usize;
        // descend without bookkeeping until cells are well below r
        let start = (top as f64 - r.log2()).ceil().max(0.0) as usize + 2;
        loop {
            let side = descent.side(level);
            let mut boundary = Vec::new();
            for cell in frontier {
                let (inf, sup) = descent.range(&cell, 0);
                if sup < r {
                    lower += descent.mass(level);
                } else if inf < r {
                    boundary.push(cell);
                }
            }
            let upper = lower + boundary.len() as f64 * descent.mass(level);
            let done = level >= start && lower > 0.0 && upper <= MASS_RATIO_TARGET * lower;
            if done
                || boundary.is_empty()
                || level >= start + MAX_REFINE_LEVELS
                || boundary.len() * 3 > MAX_FRONTIER
            {
                return (lower, upper);
            }
            let _ = side;
            frontier = boundary.iter().flat_map(|c| descent.children(c)).collect();
            level += 1;
        }
    }

    /// Level-ℓ cells (side at most `r`) meeting `B(c, r)`.
    pub fn cover(&self, c: &GasketPoint, r: f64) -> CellCover {
        let top = self.top_for(c, r, &[]);
        let descent = Descent {
            top,
            trackers: vec![Tracker::new(c, top)],
        };
        let target = (top as f64 - r.log2()).ceil().max(0.0) as usize;
        let mut frontier = vec![descent.root()];
        for _ in 0..target {
            frontier = frontier
                .iter()
                .flat_map(|cell| descent.children(cell))
                .filter(|cell| descent.range(cell, 0).0 < r)
                .collect();
        }
        CellCover {
            top,
            level: target,
            cells: frontier.into_iter().map(|c| c.prefix).collect(),
        }
    }

    /// Searches cell corners for a point of `B(c, r)` whose distance from
    /// `center` lies in `[r_in, r_out)`, refining down to cells of side
    /// `resolution`.
    pub fn annulus_witness(
        &self,
        c: &GasketPoint,
        r: f64,
        center: &GasketPoint,
        r_in: f64,
        r_out: f64,
        resolution: f64,
    ) -> Option<GasketPoint> {
        let top = self.top_for(c, r, &[center]);
        let descent = Descent {
            top,
            trackers: vec![Tracker::new(c, top), Tracker::new(center, top)],
        };
        let mut stack = vec![descent.root()];
        while let Some(cell) = stack.pop() {
            let level = cell.prefix.len();
            for k in 0..3 {
                let (dc, dz) = (cell.dists[0][k], cell.dists[1][k]);
                if dc < r && dz >= r_in && dz < r_out {
                    return Some(vertex_point(top, &cell.prefix, k as u8));
                }
            }
            if descent.side(level) <= resolution {
                continue;
            }
            for child in descent.children(&cell) {
                let (binf, _) = descent.range(&child, 0);
                let (ainf, asup) = descent.range(&child, 1);
                if binf < r && asup >= r_in && ainf < r_out {
                    stack.push(child);
                }
            }
        }
        None
    }
}

fn corner_dists_at(addr: &[u8], level: usize, top_side: f64) -> [f64; 3] {
    let depth = addr.len();
    let leaf = top_side * 0.5f64.powi(depth as i32);
    let mut d = [0.0, leaf, leaf];
    for j in (level..depth).rev() {
        let i = addr[j];
        let child = top_side * 0.5f64.powi(j as i32 + 1);
        d = std::array::from_fn(|t| {
            (0..3u8)
                .map(|k| d[k as usize] + edges(vertex(i, k), (t as u8, t as u8)) * child)
                .fold(f64::INFINITY, f64::min)
        });
    }
    d
}

/// Addressed point within `2^-VERTEX_DEPTH` cell sides of corner `k`.
fn vertex_point(top: i32, prefix: &[u8], k: u8) -> GasketPoint {
    let mut addr = prefix.to_vec();
    addr.extend(std::iter::repeat_n(k, VERTEX_DEPTH));
    GasketPoint::new(top, addr).expect("valid digits")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(scale: i32, addr: &[u8]) -> GasketPoint {
        GasketPoint::new(scale, addr.to_vec()).unwrap()
    }

    #[test]
    fn corners_are_unit_apart() {
        let g = Gasket;
        let a1 = GasketPoint::origin();
        let a2 = pt(1, &[1]);
        let a3 = pt(1, &[2]);
        assert_eq!(a2.ambient, [1.0, 0.0]);
        assert_eq!(g.distance(&a1, &a2), 1.0);
        assert_eq!(g.distance(&a2, &a3), 1.0);
        assert_eq!(g.distance(&a1, &a3), 1.0);
    }

    #[test]
    fn midpoints_and_canonical_form() {
        let g = Gasket;
        // midpoint of a1a2 is F_1(a1): scale 0 address [1]
        let m = pt(0, &[1]);
        assert_eq!(m.ambient, [0.5, 0.0]);
        assert_eq!(g.distance(&GasketPoint::origin(), &m), 0.5);
        // same point written with leading and trailing zeros
        let m2 = pt(2, &[0, 0, 1, 0, 0]);
        assert_eq!(m2, m);
        assert_eq!(g.distance(&m, &m2), 0.0);
        // a3/2 to F_1(a3/2): half an edge to a corner of cell 1, then a quarter
        assert_eq!(g.distance(&pt(0, &[2]), &pt(0, &[1, 2])), 0.75);
        // a3/2 to F_2(a2/2) runs along the bottom edge of cell 2
        assert_eq!(g.distance(&pt(0, &[2]), &pt(0, &[2, 1])), 0.25);
    }

    #[test]
    fn geodesic_dominates_euclidean() {
        let g = Gasket;
        let pts = [
            pt(0, &[1, 2, 2, 0, 1]),
            pt(2, &[2, 1, 0, 0, 2, 1]),
            pt(1, &[0, 2, 1]),
            pt(3, &[1, 1, 2, 2, 0, 1]),
        ];
        for a in &pts {
            for b in &pts {
                let e = ((a.ambient[0] - b.ambient[0]).powi(2)
                    + (a.ambient[1] - b.ambient[1]).powi(2))
                .sqrt();
                assert!(g.distance(a, b) >= e - 1e-12);
            }
        }
    }

    #[test]
    fn cell_count_mass_at_corner() {
        // B(a1, 2^-m) is the level-m corner cell up to null sets: mass 3^-m.
        let g = Gasket;
        for m in 0..4 {
            let r = 0.5f64.powi(m);
            let (lo, hi) = g.ball_measure(&GasketPoint::origin(), r);
            let want = 3f64.powi(-m);
            assert!(
                lo <= want * (1.0 + 1e-12) && hi >= want * (1.0 - 1e-12),
                "m={m}: [{lo},{hi}]"
            );
            assert!(hi / lo <= MASS_RATIO_TARGET + 1e-12);
        }
    }

    #[test]
    fn decode_check_catches_tampering() {
        let mut p = pt(1, &[2, 1]);
        assert!(p.check().is_ok());
        p.ambient[0] += 1e-6;
        assert!(p.check().is_err());
    }
}
