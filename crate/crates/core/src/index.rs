//! Candidate-pair generation for the ball-intersection graph and
//! union-find over it.
//!
//! Coordinate backends hash germ centers into a grid of side `h` (median
//! embedded radius); germs with embedded radius above `h` go to an oversize
//! list checked against everything. The dyadic backend buckets germs by the
//! closed cylinder of radius `pred(h)` they sit in, which contains every
//! ball of radius at most `h` around them.

use std::collections::HashMap;

use crate::error::Result;
use crate::spaces::{dyadic, DyadicWord, Embedded, Point, Space};

/// Below this size all pairs are tested directly.
const BRUTE_FORCE_BELOW: usize = 48;

#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }

    /// Component label per element: labels are `0..k` in order of first
    /// appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let mut map = HashMap::new();
        (0..n)
            .map(|i| {
                let root = self.find(i);
                let next = map.len();
                *map.entry(root).or_insert(next)
            })
            .collect()
    }
}

/// Candidate pairs `(i, j)` with `i < j`; every intersecting pair is
/// included.
pub fn candidate_pairs(space: &Space, balls: &[(&Point, f64)]) -> Vec<(usize, usize)> {
    let n = balls.len();
    if n < BRUTE_FORCE_BELOW {
        return all_pairs(n);
    }
    let radii: Vec<f64> = balls
        .iter()
        .map(|(_, r)| space.embedded_radius(*r))
        .collect();
    let mut sorted = radii.clone();
    sorted.sort_by(f64::total_cmp);
    let h = sorted[n / 2];
    if !(h > 0.0 && h.is_finite()) {
        return all_pairs(n);
    }
    let (small, oversize): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| radii[i] <= h);
    let mut pairs = Vec::new();
    match space.embed(balls[0].0) {
        Embedded::Coords(_) => grid_pairs(space, balls, &small, h, &mut pairs),
        Embedded::Word(_) => cylinder_pairs(space, balls, &small, h, &mut pairs),
    }
    for (k, &i) in oversize.iter().enumerate() {
        for &j in &small {
            pairs.push((i.min(j), i.max(j)));
        }
        for &j in &oversize[k + 1..] {
            pairs.push((i.min(j), i.max(j)));
        }
    }
    pairs
}

fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

fn coords<'a>(space: &Space, p: &'a Point) -> &'a [f64] {
    match space.embed(p) {
        Embedded::Coords(c) => c,
        Embedded::Word(_) => unreachable!("coordinate backend"),
    }
}

fn word<'a>(space: &Space, p: &'a Point) -> &'a DyadicWord {
    match space.embed(p) {
        Embedded::Word(w) => w,
        Embedded::Coords(_) => unreachable!("dyadic backend"),
    }
}

fn grid_pairs(
    space: &Space,
    balls: &[(&Point, f64)],
    members: &[usize],
    h: f64,
    out: &mut Vec<(usize, usize)>,
) {
    // Two small balls can only meet when their centers are within 2h, i.e.
    // at most two cells apart along each axis.
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for &i in members {
        let key: Vec<i64> = coords(space, balls[i].0)
            .iter()
            .map(|x| (x / h).floor() as i64)
            .collect();
        grid.entry(key).or_default().push(i);
    }
    let dim = grid.keys().next().map_or(0, |k| k.len());
    let offsets = neighbour_offsets(dim, 2);
    let mut keys: Vec<&Vec<i64>> = grid.keys().collect();
    keys.sort();
    for key in keys {
        let here = &grid[key];
        for off in &offsets {
            let other: Vec<i64> = key.iter().zip(off).map(|(k, o)| k + o).collect();
            // visit each unordered cell pair once
            if other < *key {
                continue;
            }
            let Some(there) = grid.get(&other) else {
                continue;
            };
            let same = other == *key;
            for (a, &i) in here.iter().enumerate() {
                let start = if same { a + 1 } else { 0 };
                for &j in &there[start..] {
                    out.push((i.min(j), i.max(j)));
                }
            }
        }
    }
}

fn neighbour_offsets(dim: usize, reach: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..dim {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-reach..=reach).map(move |o| {
                    let mut w = v.clone();
                    w.push(o);
                    w
                })
            })
            .collect();
    }
    out
}

fn cylinder_pairs(
    space: &Space,
    balls: &[(&Point, f64)],
    members: &[usize],
    h: f64,
    out: &mut Vec<(usize, usize)>,
) {
    // Ultrametric: small balls meet only if d < max radius <= h, so both
    // centers share the closed cylinder of radius pred(h).
    let level = dyadic::open_ball_level(h);
    let mut buckets: HashMap<DyadicWord, Vec<usize>> = HashMap::new();
    for &i in members {
        buckets
            .entry(word(space, balls[i].0).prefix_above(level))
            .or_default()
            .push(i);
    }
    let mut groups: Vec<&Vec<usize>> = buckets.values().collect();
    groups.sort();
    for group in groups {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                out.push((i.min(j), i.max(j)));
            }
        }
    }
}

/// Connected components of the ball-intersection graph, as labels.
pub fn component_labels(space: &Space, balls: &[(&Point, f64)]) -> Result<Vec<usize>> {
    let mut uf = UnionFind::new(balls.len());
    for (i, j) in candidate_pairs(space, balls) {
        if uf.find(i) != uf.find(j)
            && space.balls_intersect(balls[i].0, balls[i].1, balls[j].0, balls[j].1)?
        {
            uf.union(i, j);
        }
    }
    Ok(uf.labels())
}

/// Incremental point set answering "which stored points lie within
/// `radius` of p" for a fixed query radius.
pub struct NearIndex<'a> {
    space: &'a Space,
    radius: f64,
    points: Vec<Point>,
    grid: HashMap<Vec<i64>, Vec<usize>>,
    cylinders: HashMap<DyadicWord, Vec<usize>>,
    cell: f64,
    level: i32,
}

impl<'a> NearIndex<'a> {
    pub fn new(space: &'a Space, radius: f64) -> Self {
        let cell = space.embedded_radius(radius);
        NearIndex {
            space,
            radius,
            points: Vec::new(),
            grid: HashMap::new(),
            cylinders: HashMap::new(),
            cell,
            level: dyadic::open_ball_level(cell),
        }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    fn key(&self, c: &[f64]) -> Vec<i64> {
        c.iter().map(|x| (x / self.cell).floor() as i64).collect()
    }

    pub fn insert(&mut self, p: Point) {
        let i = self.points.len();
        match self.space.embed(&p) {
            Embedded::Coords(c) => {
                let key = self.key(c);
                self.grid.entry(key).or_default().push(i);
            }
            Embedded::Word(w) => {
                let key = w.prefix_above(self.level);
                self.cylinders.entry(key).or_default().push(i);
            }
        }
        self.points.push(p);
    }

    /// Smallest distance from `p` to a stored point, if below the radius.
    pub fn nearest_within(&self, p: &Point) -> Result<Option<f64>> {
        let mut best: Option<f64> = None;
        let mut consider = |j: usize| -> Result<()> {
            let d = self.space.distance(p, &self.points[j])?;
            if d < self.radius && best.is_none_or(|b| d < b) {
                best = Some(d);
            }
            Ok(())
        };
        match self.space.embed(p) {
            Embedded::Coords(c) => {
                let key = self.key(c);
                for off in neighbour_offsets(key.len(), 1) {
                    let k: Vec<i64> = key.iter().zip(&off).map(|(a, b)| a + b).collect();
                    if let Some(v) = self.grid.get(&k) {
                        for &j in v {
                            consider(j)?;
                        }
                    }
                }
            }
            Embedded::Word(w) => {
                if let Some(v) = self.cylinders.get(&w.prefix_above(self.level)) {
                    for &j in v {
                        consider(j)?;
                    }
                }
            }
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_find_labels_in_first_appearance_order() {
        let mut uf = UnionFind::new(5);
        uf.union(3, 4);
        uf.union(1, 3);
        assert_eq!(uf.labels(), vec![0, 1, 2, 1, 1]);
    }

    #[test]
    fn near_index_matches_brute_force() {
        use crate::rng::stream;
        let spaces = [
            Space::euclidean(2).unwrap(),
            Space::dyadic(),
            Space::gasket(),
            Space::snowflake(Space::euclidean(1).unwrap(), 0.5).unwrap(),
        ];
        let mut rng = stream(2, 0);
        for space in spaces {
            let mut idx = NearIndex::new(&space, 0.3);
            let pts: Vec<Point> = (0..300)
                .map(|_| space.sample_point(&space.origin(), 2.0, &mut rng).unwrap())
                .collect();
            for p in &pts[..150] {
                idx.insert(p.clone());
            }
            for q in &pts[150..] {
                let brute = pts[..150]
                    .iter()
                    .map(|p| space.distance(p, q).unwrap())
                    .filter(|&d| d < 0.3)
                    .fold(None, |b: Option<f64>, d| Some(b.map_or(d, |b| b.min(d))));
                assert_eq!(idx.nearest_within(q).unwrap(), brute, "{}", space.kind());
            }
        }
    }

    #[test]
    fn offsets_cover_the_block() {
        assert_eq!(neighbour_offsets(2, 2).len(), 25);
        assert_eq!(neighbour_offsets(0, 2), vec![Vec::<i64>::new()]);
    }
}
