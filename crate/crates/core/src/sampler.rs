//! Realizations of the Poisson Boolean model inside an observation window.
//!
//! Germ centers come from a Poisson process of intensity `λμ` on the halo
//! ball `B(center, halo_factor · window_radius)`, radii are i.i.d. from the
//! law. Radii are never truncated; the chance that a germ outside the halo
//! reaches the window is reported as `influence_bound`.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radii::{MomentValue, RadiusLaw};
use crate::rng::{self, StreamRng};
use crate::spaces::{DyadicWord, GasketPoint, Point, Space, SpaceDescriptor, SpaceSpec};

pub const DEFAULT_HALO_FACTOR: f64 = 3.0;
/// Quantile used to suggest a halo large enough for the bulk of the radii.
pub const TRUNCATION_QUANTILE: f64 = 1.0 - 1e-6;

/// Largest Poisson mean drawn by a single inversion.
const INVERSION_MAX_MEAN: f64 = 30.0;
/// Refuse to materialize more germs than this.
const MAX_GERMS: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "(Point, f64)", into = "(Point, f64)")]
pub struct Germ {
    pub center: Point,
    pub radius: f64,
}

impl From<(Point, f64)> for Germ {
    fn from((center, radius): (Point, f64)) -> Self {
        Germ { center, radius }
    }
}

impl From<Germ> for (Point, f64) {
    fn from(g: Germ) -> Self {
        (g.center, g.radius)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BooleanSample {
    pub space: SpaceSpec,
    pub descriptor: SpaceDescriptor,
    pub lambda: f64,
    pub law: RadiusLaw,
    pub window_center: Point,
    pub window_radius: f64,
    pub halo_radius: f64,
    pub germs: Vec<Germ>,
    pub seed: u64,
    /// Stream id the germs were drawn from.
    pub stream: u64,
    pub influence_bound: f64,
}

/// Draws `Poisson(mean)` exactly: inversion for small means, and a sum of
/// independent small-mean draws otherwise.
pub fn poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let mut remaining = mean;
    let mut total = 0;
    while remaining > 0.0 {
        let m = remaining.min(INVERSION_MAX_MEAN);
        remaining -= m;
        total += poisson_inversion(m, rng);
    }
    total
}

fn poisson_inversion<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.random();
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u >= cdf {
        k += 1;
        p *= mean / k as f64;
        let next = cdf + p;
        if next == cdf {
            // tail below double precision
            break;
        }
        cdf = next;
    }
    k
}

/// Upper bound on the probability that a germ centered outside the halo
/// meets the window: `λ C_V 2^s ∫_{(halo-window)/2}^∞ R^s ρ(dR)`, clamped.
pub fn influence_bound(
    lambda: f64,
    s: f64,
    c_v: f64,
    law: &RadiusLaw,
    window_radius: f64,
    halo_radius: f64,
) -> f64 {
    let gap = (halo_radius - window_radius) / 2.0;
    match law.tail_moment(s, gap.max(0.0)) {
        MomentValue::Infinite => 1.0,
        MomentValue::Finite(t) => (lambda * c_v * 2f64.powf(s) * t).clamp(0.0, 1.0),
    }
}

/// [`influence_bound`] with the constants of `space`.
pub fn far_ball_influence_bound(
    space: &Space,
    lambda: f64,
    law: &RadiusLaw,
    window_radius: f64,
    halo_radius: f64,
) -> Result<f64> {
    if !(halo_radius > window_radius) {
        return Err(Error::Domain(format!(
            "halo radius {halo_radius} must exceed window radius {window_radius}"
        )));
    }
    Ok(influence_bound(
        lambda,
        space.s(),
        space.c_v(),
        law,
        window_radius,
        halo_radius,
    ))
}

/// Halo factor whose gap clears twice the truncation quantile of the law,
/// never below the default.
pub fn suggested_halo_factor(law: &RadiusLaw, window_radius: f64) -> f64 {
    let q = law.quantile(TRUNCATION_QUANTILE);
    if !q.is_finite() {
        return DEFAULT_HALO_FACTOR;
    }
    (1.0 + 2.0 * q / window_radius).max(DEFAULT_HALO_FACTOR)
}

/// Parameters of one model realization, minus the randomness.
#[derive(Debug, Clone)]
pub struct ModelSpec<'a> {
    pub space: &'a Space,
    pub lambda: f64,
    pub law: &'a RadiusLaw,
    pub window_center: &'a Point,
    pub window_radius: f64,
    pub halo_factor: f64,
}

impl ModelSpec<'_> {
    pub fn halo_radius(&self) -> f64 {
        self.halo_factor * self.window_radius
    }

    fn check(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Domain(format!(
                "intensity must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.window_radius > 0.0 && self.window_radius.is_finite()) {
            return Err(Error::Domain(format!(
                "window radius must be positive, got {}",
                self.window_radius
            )));
        }
        if !(self.halo_factor >= 1.0 && self.halo_factor.is_finite()) {
            return Err(Error::Domain(format!(
                "halo factor must be at least 1, got {}",
                self.halo_factor
            )));
        }
        self.space.validate(self.window_center)
    }

    /// Replication `index` of the experiment keyed by `seed`.
    pub fn replicate(&self, seed: u64, index: u64) -> Result<BooleanSample> {
        let mut rng = rng::stream(seed, index);
        let mut sample = self.sample_with(&mut rng)?;
        sample.seed = seed;
        sample.stream = index;
        Ok(sample)
    }

    /// One realization drawn from `rng`; `seed` and `stream` are left at 0.
    pub fn sample_with(&self, rng: &mut StreamRng) -> Result<BooleanSample> {
        self.check()?;
        let halo = self.halo_radius();
        let window = self.space.window(self.window_center, halo)?;
        let mass = window.superset_mass();
        if !mass.is_finite() {
            return Err(Error::Config(format!(
                "halo ball of radius {halo} has infinite mass"
            )));
        }
        let n = poisson(self.lambda * mass, rng);
        if n > MAX_GERMS {
            return Err(Error::Config(format!(
                "{n} germ proposals exceed the limit of {MAX_GERMS}"
            )));
        }
        let mut germs = Vec::new();
        for _ in 0..n {
            if let Some(center) = window.propose(rng as &mut dyn RngCore) {
                let radius = self.law.sample(rng);
                germs.push(Germ { center, radius });
            }
        }
        let influence = if halo > self.window_radius {
            influence_bound(
                self.lambda,
                self.space.s(),
                self.space.c_v(),
                self.law,
                self.window_radius,
                halo,
            )
        } else {
            1.0
        };
        Ok(BooleanSample {
            space: self.space.spec(),
            descriptor: self.space.descriptor(),
            lambda: self.lambda,
            law: *self.law,
            window_center: self.window_center.clone(),
            window_radius: self.window_radius,
            halo_radius: halo,
            germs,
            seed: 0,
            stream: 0,
            influence_bound: influence,
        })
    }
}

/// One realization with default stream derivation (`stream(seed, 0)`).
pub fn sample_boolean_model(
    space: &Space,
    lambda: f64,
    law: &RadiusLaw,
    window_center: &Point,
    window_radius: f64,
    halo_factor: f64,
    seed: u64,
) -> Result<BooleanSample> {
    ModelSpec {
        space,
        lambda,
        law,
        window_center,
        window_radius,
        halo_factor,
    }
    .replicate(seed, 0)
}

impl BooleanSample {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// Keeps each germ independently with probability `p`.
    pub fn thinned<R: Rng + ?Sized>(&self, p: f64, rng: &mut R) -> BooleanSample {
        let mut out = self.clone();
        out.germs.retain(|_| rng.random::<f64>() < p);
        out.lambda *= p;
        out
    }

    pub fn germs_within(&self, space: &Space, x: &Point, radius: f64) -> Result<usize> {
        let mut n = 0;
        for g in &self.germs {
            if space.distance(x, &g.center)? < radius {
                n += 1;
            }
        }
        Ok(n)
    }
}

const MAGIC: &[u8; 4] = b"PBM1";
const VERSION: u32 = 1;

const TAG_EUCLIDEAN: u8 = 0;
const TAG_DYADIC: u8 = 1;
const TAG_GASKET: u8 = 2;
const TAG_SNOWFLAKE: u8 = 3;
const TAG_WEIGHTED: u8 = 4;

/// Compact little-endian dump: `PBM1`, version, scalar fields, space and
/// law as length-prefixed JSON, then the germs.
pub fn write_binary<W: Write>(sample: &BooleanSample, mut w: W) -> Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_u64::<LittleEndian>(sample.seed)?;
    w.write_u64::<LittleEndian>(sample.stream)?;
    for v in [
        sample.lambda,
        sample.window_radius,
        sample.halo_radius,
        sample.influence_bound,
    ] {
        w.write_f64::<LittleEndian>(v)?;
    }
    write_blob(&mut w, &serde_json::to_vec(&sample.space)?)?;
    write_blob(&mut w, &serde_json::to_vec(&sample.law)?)?;
    write_point(&mut w, &sample.window_center)?;
    w.write_u64::<LittleEndian>(sample.germs.len() as u64)?;
    for g in &sample.germs {
        write_point(&mut w, &g.center)?;
        w.write_f64::<LittleEndian>(g.radius)?;
    }
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<BooleanSample> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a PBM1 sample dump".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported dump version {version}")));
    }
    let seed = r.read_u64::<LittleEndian>()?;
    let stream = r.read_u64::<LittleEndian>()?;
    let lambda = r.read_f64::<LittleEndian>()?;
    let window_radius = r.read_f64::<LittleEndian>()?;
    let halo_radius = r.read_f64::<LittleEndian>()?;
    let influence_bound = r.read_f64::<LittleEndian>()?;
    let spec: SpaceSpec =
        serde_json::from_slice(&read_blob(&mut r)?).map_err(|e| Error::Format(e.to_string()))?;
    let law: RadiusLaw =
        serde_json::from_slice(&read_blob(&mut r)?).map_err(|e| Error::Format(e.to_string()))?;
    let space = Space::from_spec(&spec)?;
    let window_center = read_point(&mut r)?;
    let n = r.read_u64::<LittleEndian>()?;
    let mut germs = Vec::with_capacity(n.min(1 << 20) as usize);
    for _ in 0..n {
        let center = read_point(&mut r)?;
        let radius = r.read_f64::<LittleEndian>()?;
        germs.push(Germ { center, radius });
    }
    Ok(BooleanSample {
        space: spec,
        descriptor: space.descriptor(),
        lambda,
        law,
        window_center,
        window_radius,
        halo_radius,
        germs,
        seed,
        stream,
        influence_bound,
    })
}

fn write_blob<W: Write>(w: &mut W, bytes: &[u8]) -> Result<()> {
    w.write_u32::<LittleEndian>(bytes.len() as u32)?;
    w.write_all(bytes)?;
    Ok(())
}

fn read_blob<R: Read>(r: &mut R) -> Result<Vec<u8>> {
    let n = r.read_u32::<LittleEndian>()? as usize;
    if n > 1 << 24 {
        return Err(Error::Format(format!("header blob of {n} bytes")));
    }
    let mut buf = vec![0; n];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

fn write_coords<W: Write>(w: &mut W, c: &[f64]) -> Result<()> {
    w.write_u32::<LittleEndian>(c.len() as u32)?;
    for v in c {
        w.write_f64::<LittleEndian>(*v)?;
    }
    Ok(())
}

fn read_coords<R: Read>(r: &mut R) -> Result<Vec<f64>> {
    let n = r.read_u32::<LittleEndian>()? as usize;
    if n > 64 {
        return Err(Error::Format(format!("point dimension {n}")));
    }
    (0..n).map(|_| Ok(r.read_f64::<LittleEndian>()?)).collect()
}

fn write_point<W: Write>(w: &mut W, p: &Point) -> Result<()> {
    match p {
        Point::Euclidean(c) => {
            w.write_u8(TAG_EUCLIDEAN)?;
            write_coords(w, c)?;
        }
        Point::Weighted(c) => {
            w.write_u8(TAG_WEIGHTED)?;
            write_coords(w, c)?;
        }
        Point::Dyadic(word) => {
            w.write_u8(TAG_DYADIC)?;
            w.write_u32::<LittleEndian>(word.ones().len() as u32)?;
            for i in word.ones() {
                w.write_i32::<LittleEndian>(*i)?;
            }
        }
        Point::Gasket(g) => {
            w.write_u8(TAG_GASKET)?;
            w.write_i32::<LittleEndian>(g.scale)?;
            w.write_u32::<LittleEndian>(g.address.len() as u32)?;
            w.write_all(&g.address)?;
        }
        Point::Snowflake(inner) => {
            w.write_u8(TAG_SNOWFLAKE)?;
            write_point(w, inner)?;
        }
    }
    Ok(())
}

fn read_point<R: Read>(r: &mut R) -> Result<Point> {
    Ok(match r.read_u8()? {
        TAG_EUCLIDEAN => Point::Euclidean(read_coords(r)?),
        TAG_WEIGHTED => Point::Weighted(read_coords(r)?),
        TAG_DYADIC => {
            let n = r.read_u32::<LittleEndian>()? as usize;
            let ones = (0..n)
                .map(|_| r.read_i32::<LittleEndian>())
                .collect::<std::io::Result<Vec<_>>>()?;
            Point::Dyadic(DyadicWord::try_from(ones).map_err(Error::Format)?)
        }
        TAG_GASKET => {
            let scale = r.read_i32::<LittleEndian>()?;
            let n = r.read_u32::<LittleEndian>()? as usize;
            let mut address = vec![0; n];
            r.read_exact(&mut address)?;
            Point::Gasket(GasketPoint::new(scale, address)?)
        }
        TAG_SNOWFLAKE => Point::Snowflake(Box::new(read_point(r)?)),
        t => return Err(Error::Format(format!("unknown point tag {t}"))),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_mean_and_variance() {
        let mut r = rng::stream(11, 0);
        for mean in [0.7, 12.0, 95.0] {
            let n = 20_000;
            let xs: Vec<f64> = (0..n).map(|_| poisson(mean, &mut r) as f64).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64;
            assert!(
                (m - mean).abs() < 4.0 * (mean / n as f64).sqrt(),
                "mean {m} vs {mean}"
            );
            assert!((v / mean - 1.0).abs() < 0.05, "variance {v} vs {mean}");
        }
    }

    #[test]
    fn influence_examples() {
        let law = RadiusLaw::pareto(4.0).unwrap();
        let b = influence_bound(0.01, 2.0, 1.0, &law, 1.0, 11.0);
        assert!((b - 3.2e-3).abs() < 1e-15, "{b}");
        let dirac = RadiusLaw::dirac(1.0).unwrap();
        assert_eq!(influence_bound(1.0, 2.0, 1.0, &dirac, 1.0, 3.5), 0.0);
        assert_eq!(
            influence_bound(1e-9, 2.0, 1.0, &RadiusLaw::pareto(1.5).unwrap(), 1.0, 1e9),
            1.0
        );
    }

    #[test]
    fn dirac_radii_and_halo_membership() {
        let space = Space::euclidean(2).unwrap();
        let law = RadiusLaw::dirac(0.5).unwrap();
        let s = sample_boolean_model(&space, 2.0, &law, &space.origin(), 2.0, 3.0, 5).unwrap();
        assert!(!s.germs.is_empty());
        for g in &s.germs {
            assert_eq!(g.radius, 0.5);
            assert!(space.distance(&s.window_center, &g.center).unwrap() < s.halo_radius);
        }
    }

    #[test]
    fn binary_and_json_round_trip() {
        for space in [
            Space::euclidean(2).unwrap(),
            Space::dyadic(),
            Space::gasket(),
            Space::snowflake(Space::gasket(), 0.5).unwrap(),
            Space::weighted(1, crate::spaces::Density::Stripes).unwrap(),
        ] {
            let law = RadiusLaw::exponential(2.0).unwrap();
            let s = sample_boolean_model(&space, 3.0, &law, &space.origin(), 1.0, 2.0, 9).unwrap();
            let mut buf = Vec::new();
            write_binary(&s, &mut buf).unwrap();
            assert_eq!(read_binary(&buf[..]).unwrap(), s, "{}", space.kind());
            assert_eq!(BooleanSample::from_json(&s.to_json().unwrap()).unwrap(), s);
        }
        assert!(matches!(
            read_binary(&b"PBM2...."[..]),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn bad_parameters_rejected() {
        let space = Space::euclidean(1).unwrap();
        let law = RadiusLaw::dirac(1.0).unwrap();
        assert!(sample_boolean_model(&space, 0.0, &law, &space.origin(), 1.0, 3.0, 0).is_err());
        assert!(sample_boolean_model(&space, 1.0, &law, &space.origin(), 1.0, 0.5, 0).is_err());
        let bad = Point::Euclidean(vec![0.0, 0.0]);
        assert!(sample_boolean_model(&space, 1.0, &law, &bad, 1.0, 3.0, 0).is_err());
    }
}
