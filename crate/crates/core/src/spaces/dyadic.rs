//! Finitely supported two-sided binary expansions with the valuation metric
//! `d(x, y) = 2^k`, `k` the highest index at which the digits differ.
//!
//! Closed balls of radius `2^k` are cylinders fixing every digit above `k`,
//! and carry mass `2^k`. The space is ultrametric, 1-Ahlfors regular with
//! `C_V = 2`, and unbounded because indices extend upward.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

/// Number of random digits drawn below the top of a sampling cylinder.
pub const SAMPLE_DEPTH: i32 = 40;

/// Set of indices carrying a one, stored strictly decreasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<i32>", into = "Vec<i32>")]
pub struct DyadicWord {
    ones: Vec<i32>,
}

impl TryFrom<Vec<i32>> for DyadicWord {
    type Error = String;
    fn try_from(mut v: Vec<i32>) -> Result<Self, String> {
        v.sort_unstable_by(|a, b| b.cmp(a));
        let before = v.len();
        v.dedup();
        if v.len() != before {
            return Err("duplicate digit index".into());
        }
        Ok(DyadicWord { ones: v })
    }
}

impl From<DyadicWord> for Vec<i32> {
    fn from(w: DyadicWord) -> Vec<i32> {
        w.ones
    }
}

impl DyadicWord {
    pub fn zero() -> Self {
        DyadicWord::default()
    }

    pub fn from_ones(indices: impl IntoIterator<Item = i32>) -> Self {
        DyadicWord::try_from(indices.into_iter().collect::<Vec<_>>())
            .unwrap_or_else(|_| panic!("duplicate digit index"))
    }

    pub fn ones(&self) -> &[i32] {
        &self.ones
    }

    pub fn digit(&self, index: i32) -> bool {
        self.ones.binary_search_by(|p| index.cmp(p)).is_ok()
    }

    pub fn highest_one(&self) -> Option<i32> {
        self.ones.first().copied()
    }

    /// The word with the digit at `index` toggled.
    pub fn flipped(&self, index: i32) -> Self {
        let mut ones = self.ones.clone();
        match ones.binary_search_by(|p| index.cmp(p)) {
            Ok(pos) => {
                ones.remove(pos);
            }
            Err(pos) => ones.insert(pos, index),
        }
        DyadicWord { ones }
    }

    /// Highest index where the two words differ.
    pub fn top_difference(&self, other: &Self) -> Option<i32> {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.ones, &other.ones);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return None,
                (Some(&x), None) => return Some(x),
                (None, Some(&y)) => return Some(y),
                (Some(&x), Some(&y)) => {
                    if x == y {
                        i += 1;
                        j += 1;
                    } else {
                        return Some(x.max(y));
                    }
                }
            }
        }
    }

    pub fn distance(&self, other: &Self) -> f64 {
        self.top_difference(other).map_or(0.0, pow2)
    }

    /// Digits strictly above `level`, the key of the closed cylinder of
    /// radius `2^level` containing this word.
    pub fn prefix_above(&self, level: i32) -> DyadicWord {
        DyadicWord {
            ones: self
                .ones
                .iter()
                .copied()
                .take_while(|&i| i > level)
                .collect(),
        }
    }

    /// Uniform draw from the cylinder fixing digits above `level`, with
    /// `SAMPLE_DEPTH` random digits beneath it.
    pub fn random_in_cylinder(&self, level: i32, rng: &mut dyn RngCore) -> DyadicWord {
        let mut ones = self.prefix_above(level).ones;
        for idx in (level - SAMPLE_DEPTH + 1..=level).rev() {
            if rng.random::<bool>() {
                ones.push(idx);
            }
        }
        DyadicWord { ones }
    }
}

pub(crate) fn pow2(k: i32) -> f64 {
    2f64.powi(k)
}

/// Exponent of the largest power of two strictly below `r`.
pub fn open_ball_level(r: f64) -> i32 {
    let mut k = r.log2().ceil() as i32 - 1;
    while pow2(k + 1) < r {
        k += 1;
    }
    while pow2(k) >= r {
        k -= 1;
    }
    k
}

/// Largest distance value strictly below `r`.
pub fn spectrum_pred(r: f64) -> f64 {
    pow2(open_ball_level(r))
}

/// Smallest distance value strictly above `r`.
pub fn spectrum_succ(r: f64) -> f64 {
    let mut k = r.log2().floor() as i32;
    while pow2(k) <= r {
        k += 1;
    }
    while k > i32::MIN + 1 && pow2(k - 1) > r {
        k -= 1;
    }
    pow2(k)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dyadic;

impl Dyadic {
    pub const S: f64 = 1.0;
    pub const C_V: f64 = 2.0;

    /// `μ(B(x, r))` for the open ball: the closed cylinder one level down.
    pub fn ball_measure(&self, r: f64) -> f64 {
        spectrum_pred(r)
    }
}
