//! Metric measure spaces and every geometric predicate the engine uses.
//!
//! Five backends are provided (flat Euclidean, dyadic ultrametric, unbounded
//! Sierpinski gasket, snowflake of any backend, density-weighted Euclidean)
//! plus a two-point space kept as a negative control for the geometry
//! checks. `Space` values are immutable and `Sync`; randomness always comes
//! from the caller.

pub mod dyadic;
pub mod euclidean;
pub mod gasket;

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use dyadic::{Dyadic, DyadicWord};
pub use euclidean::{Density, Euclidean, TwoPoint, Weighted};
pub use gasket::{Gasket, GasketPoint};

/// Rejection cap for single-point sampling.
pub const MAX_SAMPLING_TRIES: u64 = 1_000_000;

/// A location in one of the backends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    Euclidean(Vec<f64>),
    Dyadic(DyadicWord),
    Gasket(GasketPoint),
    Snowflake(Box<Point>),
    Weighted(Vec<f64>),
}

impl Point {
    pub fn kind(&self) -> &'static str {
        match self {
            Point::Euclidean(_) => "euclidean",
            Point::Dyadic(_) => "dyadic",
            Point::Gasket(_) => "gasket",
            Point::Snowflake(_) => "snowflake",
            Point::Weighted(_) => "weighted",
        }
    }
}

/// Ball mass. Exact backends return `lower == upper`; the gasket returns a
/// certified interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mass {
    pub lower: f64,
    pub upper: f64,
}

impl Mass {
    pub fn exact(v: f64) -> Self {
        Mass { lower: v, upper: v }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    /// Geometric midpoint, used for regressions.
    pub fn mid(&self) -> f64 {
        if self.is_exact() {
            self.lower
        } else {
            (self.lower * self.upper).sqrt()
        }
    }

    /// Whether `[lower, upper]` meets `[lo, hi]`.
    pub fn meets(&self, lo: f64, hi: f64) -> bool {
        self.upper >= lo && self.lower <= hi
    }
}

/// `sup_{y ∈ B(c, r)} d(x, y)`, or an upper envelope of it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupDistance {
    pub value: f64,
    pub envelope: bool,
}

/// Outcome of an annulus test.
#[derive(Debug, Clone, PartialEq)]
pub enum AnnulusTest {
    /// The ball meets the annulus; a witness point is attached when the
    /// decision came from a search.
    Hit { witness: Option<Point> },
    /// No intersection. `resolution` is the witness-net spacing when the
    /// answer is "no witness found" rather than exact.
    Miss { resolution: Option<f64> },
}

impl AnnulusTest {
    pub fn hit(&self) -> bool {
        matches!(self, AnnulusTest::Hit { .. })
    }
}

/// Constants of a backend.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceDescriptor {
    pub kind: String,
    /// Ahlfors exponent.
    pub s: f64,
    /// Regularity constant, at least 1.
    pub c_v: f64,
    /// Uniform-perfectness parameter, greater than 1.
    pub sigma: f64,
    /// Whether `d(x, z) < R₁ + R₂` decides ball intersection.
    pub geodesic: bool,
    /// `μ(B(origin, 1))`.
    pub measure_unit_ball: Mass,
}

/// JSON space descriptor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceSpec {
    Euclidean { dim: usize },
    Dyadic,
    Gasket,
    Snowflake { alpha: f64, base: Box<SpaceSpec> },
    Weighted { dim: usize, density: Density },
    TwoPoint { gap: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snowflake {
    pub base: Box<Space>,
    pub alpha: f64,
}

impl Snowflake {
    pub fn new(base: Space, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!(
                "snowflake exponent must lie in (0,1), got {alpha}"
            )));
        }
        Ok(Snowflake {
            base: Box::new(base),
            alpha,
        })
    }

    /// Base-space radius corresponding to a snowflake radius.
    pub fn base_radius(&self, r: f64) -> f64 {
        r.powf(1.0 / self.alpha)
    }
}

/// Default uniform-perfectness parameter.
pub const DEFAULT_SIGMA: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub enum Space {
    Euclidean(Euclidean),
    Dyadic(Dyadic),
    Gasket(Gasket),
    Snowflake(Snowflake),
    Weighted(Weighted),
    TwoPoint(TwoPoint),
}

/// Coordinates usable for spatial hashing: `d(p, q) < r` implies the
/// embedded distance is below `embedded_radius(r)`.
#[derive(Debug, Clone, Copy)]
pub enum Embedded<'a> {
    Coords(&'a [f64]),
    Word(&'a DyadicWord),
}

fn mixed(p: &Point, q: &Point) -> Error {
    Error::Usage(format!(
        "points from different spaces: {} vs {}",
        p.kind(),
        q.kind()
    ))
}

fn positive(r: f64, what: &str) -> Result<()> {
    if r > 0.0 && !r.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} must be positive, got {r}")))
    }
}

impl Space {
    pub fn euclidean(dim: usize) -> Result<Self> {
        Ok(Space::Euclidean(Euclidean::new(dim)?))
    }

    pub fn dyadic() -> Self {
        Space::Dyadic(Dyadic)
    }

    pub fn gasket() -> Self {
        Space::Gasket(Gasket)
    }

    pub fn snowflake(base: Space, alpha: f64) -> Result<Self> {
        Ok(Space::Snowflake(Snowflake::new(base, alpha)?))
    }

    pub fn weighted(dim: usize, density: Density) -> Result<Self> {
        Ok(Space::Weighted(Weighted::new(dim, density)?))
    }

    pub fn two_point(gap: f64) -> Result<Self> {
        Ok(Space::TwoPoint(TwoPoint::new(gap)?))
    }

    pub fn from_spec(spec: &SpaceSpec) -> Result<Self> {
        match spec {
            SpaceSpec::Euclidean { dim } => Space::euclidean(*dim),
            SpaceSpec::Dyadic => Ok(Space::dyadic()),
            SpaceSpec::Gasket => Ok(Space::gasket()),
            SpaceSpec::Snowflake { alpha, base } => {
                Space::snowflake(Space::from_spec(base)?, *alpha)
            }
            SpaceSpec::Weighted { dim, density } => Space::weighted(*dim, *density),
            SpaceSpec::TwoPoint { gap } => Space::two_point(*gap),
        }
    }

    pub fn from_json(json: &str) -> Result<Self> {
        let spec: SpaceSpec =
            serde_json::from_str(json).map_err(|e| Error::Config(e.to_string()))?;
        Space::from_spec(&spec)
    }

    pub fn spec(&self) -> SpaceSpec {
        match self {
            Space::Euclidean(e) => SpaceSpec::Euclidean { dim: e.dim },
            Space::Dyadic(_) => SpaceSpec::Dyadic,
            Space::Gasket(_) => SpaceSpec::Gasket,
            Space::Snowflake(s) => SpaceSpec::Snowflake {
                alpha: s.alpha,
                base: Box::new(s.base.spec()),
            },
            Space::Weighted(w) => SpaceSpec::Weighted {
                dim: w.dim,
                density: w.density,
            },
            Space::TwoPoint(t) => SpaceSpec::TwoPoint { gap: t.gap },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Space::Euclidean(_) => "euclidean",
            Space::Dyadic(_) => "dyadic",
            Space::Gasket(_) => "gasket",
            Space::Snowflake(_) => "snowflake",
            Space::Weighted(_) => "weighted",
            Space::TwoPoint(_) => "two_point",
        }
    }

    /// Ahlfors exponent.
    pub fn s(&self) -> f64 {
        match self {
            Space::Euclidean(e) => e.dim as f64,
            Space::Weighted(w) => w.dim as f64,
            Space::Dyadic(_) => Dyadic::S,
            Space::Gasket(_) => gasket::dimension(),
            Space::Snowflake(sf) => sf.base.s() / sf.alpha,
            Space::TwoPoint(_) => 1.0,
        }
    }

    /// Declared regularity constant.
    pub fn c_v(&self) -> f64 {
        match self {
            Space::Euclidean(e) => e.c_v(),
            Space::Weighted(w) => w.c_v(),
            Space::Dyadic(_) => Dyadic::C_V,
            Space::Gasket(_) => GASKET_C_V,
            Space::Snowflake(sf) => sf.base.c_v(),
            Space::TwoPoint(_) => 1.0,
        }
    }

    pub fn sigma(&self) -> f64 {
        match self {
            Space::Snowflake(sf) => sf.base.sigma().powf(sf.alpha).max(DEFAULT_SIGMA).ceil(),
            _ => DEFAULT_SIGMA,
        }
    }

    pub fn geodesic(&self) -> bool {
        matches!(
            self,
            Space::Euclidean(_) | Space::Gasket(_) | Space::Weighted(_)
        )
    }

    /// Whether the metric satisfies the ultratriangle inequality.
    pub fn ultrametric(&self) -> bool {
        match self {
            Space::Dyadic(_) => true,
            Space::Snowflake(sf) => sf.base.ultrametric(),
            _ => false,
        }
    }

    pub fn descriptor(&self) -> SpaceDescriptor {
        SpaceDescriptor {
            kind: self.kind().to_string(),
            s: self.s(),
            c_v: self.c_v(),
            sigma: self.sigma(),
            geodesic: self.geodesic(),
            measure_unit_ball: self
                .ball_measure(&self.origin(), 1.0)
                .expect("unit ball at the origin is valid"),
        }
    }

    /// A distinguished base point.
    pub fn origin(&self) -> Point {
        match self {
            Space::Euclidean(e) => Point::Euclidean(vec![0.0; e.dim]),
            Space::Weighted(w) => Point::Weighted(vec![0.0; w.dim]),
            Space::Dyadic(_) => Point::Dyadic(DyadicWord::zero()),
            Space::Gasket(_) => Point::Gasket(GasketPoint::origin()),
            Space::Snowflake(sf) => Point::Snowflake(Box::new(sf.base.origin())),
            Space::TwoPoint(_) => Point::Euclidean(vec![0.0]),
        }
    }

    /// Checks that a point belongs to this space and satisfies its variant
    /// invariants.
    pub fn validate(&self, p: &Point) -> Result<()> {
        match (self, p) {
            (Space::Euclidean(_), Point::Euclidean(c))
            | (Space::Weighted(_), Point::Weighted(c))
                if Some(c.len()) == self.coord_dim() && c.iter().all(|v| v.is_finite()) =>
            {
                Ok(())
            }
            (Space::Dyadic(_), Point::Dyadic(_)) => Ok(()),
            (Space::Gasket(_), Point::Gasket(g)) => g.check(),
            (Space::Snowflake(sf), Point::Snowflake(inner)) => sf.base.validate(inner),
            (Space::TwoPoint(t), Point::Euclidean(c))
                if c.len() == 1 && (c[0] == 0.0 || c[0] == t.gap) =>
            {
                Ok(())
            }
            _ => Err(Error::Usage(format!(
                "point of kind {} does not belong to a {} space",
                p.kind(),
                self.kind()
            ))),
        }
    }

    fn coord_dim(&self) -> Option<usize> {
        match self {
            Space::Euclidean(e) => Some(e.dim),
            Space::Weighted(w) => Some(w.dim),
            _ => None,
        }
    }

    pub fn distance(&self, p: &Point, q: &Point) -> Result<f64> {
        match (self, p, q) {
            (Space::Euclidean(e), Point::Euclidean(a), Point::Euclidean(b))
                if a.len() == e.dim && b.len() == e.dim =>
            {
                Ok(euclidean::euclid(a, b))
            }
            (Space::Weighted(w), Point::Weighted(a), Point::Weighted(b))
                if a.len() == w.dim && b.len() == w.dim =>
            {
                Ok(euclidean::euclid(a, b))
            }
            (Space::TwoPoint(_), Point::Euclidean(a), Point::Euclidean(b))
                if a.len() == 1 && b.len() == 1 =>
            {
                Ok((a[0] - b[0]).abs())
            }
            (Space::Dyadic(_), Point::Dyadic(a), Point::Dyadic(b)) => Ok(a.distance(b)),
            (Space::Gasket(g), Point::Gasket(a), Point::Gasket(b)) => Ok(g.distance(a, b)),
            (Space::Snowflake(sf), Point::Snowflake(a), Point::Snowflake(b)) => {
                Ok(sf.base.distance(a, b)?.powf(sf.alpha))
            }
            _ => Err(mixed(p, q)),
        }
    }

    pub fn ball_measure(&self, x: &Point, r: f64) -> Result<Mass> {
        positive(r, "ball radius")?;
        match (self, x) {
            (Space::Euclidean(e), Point::Euclidean(c)) if c.len() == e.dim => {
                Ok(Mass::exact(e.ball_measure(r)))
            }
            (Space::Weighted(w), Point::Weighted(c)) if c.len() == w.dim => {
                Ok(Mass::exact(w.ball_measure(c, r)))
            }
            (Space::Dyadic(d), Point::Dyadic(_)) => Ok(Mass::exact(d.ball_measure(r))),
            (Space::Gasket(g), Point::Gasket(p)) => {
                let (lower, upper) = g.ball_measure(p, r);
                Ok(Mass { lower, upper })
            }
            (Space::Snowflake(sf), Point::Snowflake(inner)) => {
                sf.base.ball_measure(inner, sf.base_radius(r))
            }
            (Space::TwoPoint(t), Point::Euclidean(c)) if c.len() == 1 => {
                Ok(Mass::exact(t.ball_measure(c[0], r)))
            }
            _ => Err(Error::Usage(format!(
                "point of kind {} does not belong to a {} space",
                x.kind(),
                self.kind()
            ))),
        }
    }

    /// Proposal mechanism for `μ` restricted to `B(center, radius)`.
    pub fn window(&self, center: &Point, radius: f64) -> Result<Window<'_>> {
        positive(radius, "window radius")?;
        self.validate(center)?;
        let kind = match (self, center) {
            (Space::Euclidean(_), Point::Euclidean(c)) => WindowKind::Cube {
                center: c.clone(),
                g_max: None,
            },
            (Space::Weighted(w), Point::Weighted(c)) => WindowKind::Cube {
                center: c.clone(),
                g_max: Some(w.density.bounds().1),
            },
            (Space::Dyadic(_), Point::Dyadic(w)) => WindowKind::Cylinder {
                base: w.clone(),
                level: dyadic::open_ball_level(radius),
            },
            (Space::Gasket(g), Point::Gasket(p)) => WindowKind::Cells(g.cover(p, radius)),
            (Space::Snowflake(sf), Point::Snowflake(inner)) => {
                WindowKind::Snowflake(Box::new(sf.base.window(inner, sf.base_radius(radius))?))
            }
            (Space::TwoPoint(t), Point::Euclidean(c)) => WindowKind::Discrete(
                t.points()
                    .iter()
                    .filter(|p| (c[0] - **p).abs() < radius)
                    .map(|p| Point::Euclidean(vec![*p]))
                    .collect(),
            ),
            _ => unreachable!("validated above"),
        };
        Ok(Window {
            space: self,
            center: center.clone(),
            radius,
            kind,
        })
    }

    /// One draw from `μ` restricted to `B(center, radius)`, normalized.
    pub fn sample_point(
        &self,
        center: &Point,
        radius: f64,
        rng: &mut dyn RngCore,
    ) -> Result<Point> {
        self.window(center, radius)?.sample(rng)
    }

    pub fn balls_intersect(&self, c1: &Point, r1: f64, c2: &Point, r2: f64) -> Result<bool> {
        positive(r1, "ball radius")?;
        positive(r2, "ball radius")?;
        match self {
            Space::Snowflake(sf) => match (c1, c2) {
                (Point::Snowflake(a), Point::Snowflake(b)) => {
                    sf.base
                        .balls_intersect(a, sf.base_radius(r1), b, sf.base_radius(r2))
                }
                _ => Err(mixed(c1, c2)),
            },
            Space::Dyadic(_) => Ok(self.distance(c1, c2)? < r1.max(r2)),
            Space::TwoPoint(t) => {
                // Balls meet iff one of the two points lies in both.
                let d = self.distance(c1, c2)?;
                let (a, b) = (coord1(c1), coord1(c2));
                Ok(t.points()
                    .iter()
                    .any(|p| (a - p).abs() < r1 && (b - p).abs() < r2)
                    || d == 0.0)
            }
            _ => Ok(self.distance(c1, c2)? < r1 + r2),
        }
    }

    pub fn ball_sup_distance(&self, x: &Point, c: &Point, r: f64) -> Result<SupDistance> {
        positive(r, "ball radius")?;
        match self {
            Space::Euclidean(_) | Space::Weighted(_) => Ok(SupDistance {
                value: self.distance(x, c)? + r,
                envelope: false,
            }),
            Space::Gasket(_) => Ok(SupDistance {
                value: self.distance(x, c)? + r,
                envelope: true,
            }),
            Space::Dyadic(_) => {
                let d = self.distance(x, c)?;
                Ok(SupDistance {
                    value: d.max(dyadic::spectrum_pred(r)),
                    envelope: false,
                })
            }
            Space::Snowflake(sf) => match (x, c) {
                (Point::Snowflake(a), Point::Snowflake(b)) => {
                    let base = sf.base.ball_sup_distance(a, b, sf.base_radius(r))?;
                    Ok(SupDistance {
                        value: base.value.powf(sf.alpha),
                        envelope: base.envelope,
                    })
                }
                _ => Err(mixed(x, c)),
            },
            Space::TwoPoint(t) => {
                let (xc, cc) = (coord1(x), coord1(c));
                let value = t
                    .points()
                    .iter()
                    .filter(|p| (cc - **p).abs() < r)
                    .map(|p| (xc - p).abs())
                    .fold(0.0, f64::max);
                Ok(SupDistance {
                    value,
                    envelope: false,
                })
            }
        }
    }

    /// Whether `B(c, r)` meets `B(center, r_out) \ B(center, r_in)`.
    pub fn ball_meets_annulus(
        &self,
        c: &Point,
        r: f64,
        center: &Point,
        r_in: f64,
        r_out: f64,
    ) -> Result<AnnulusTest> {
        positive(r, "ball radius")?;
        positive(r_in, "inner radius")?;
        if !(r_in < r_out) {
            return Err(Error::Domain(format!(
                "annulus needs r_in < r_out, got [{r_in}, {r_out})"
            )));
        }
        match self {
            Space::Euclidean(_) | Space::Weighted(_) => {
                let d = self.distance(center, c)?;
                let hit = d - r < r_out && d + r > r_in;
                Ok(if hit {
                    AnnulusTest::Hit { witness: None }
                } else {
                    AnnulusTest::Miss { resolution: None }
                })
            }
            Space::Dyadic(_) => {
                let (Point::Dyadic(cw), Point::Dyadic(zw)) = (c, center) else {
                    return Err(mixed(c, center));
                };
                // smallest power of two >= r_in must fall below r_out
                if dyadic::pow2(dyadic::open_ball_level(r_in) + 1) >= r_out {
                    return Err(Error::Geometry(format!(
                        "dyadic annulus [{r_in}, {r_out}) contains no distance value"
                    )));
                }
                let d = cw.distance(zw);
                if d >= r {
                    // every point of the ball sits at distance d from center
                    return Ok(if d >= r_in && d < r_out {
                        AnnulusTest::Hit {
                            witness: Some(c.clone()),
                        }
                    } else {
                        AnnulusTest::Miss { resolution: None }
                    });
                }
                // center lies in the ball: flipping digit k gives distance 2^k
                let mut k = dyadic::open_ball_level(r);
                while dyadic::pow2(k) >= r_in {
                    if dyadic::pow2(k) < r_out {
                        return Ok(AnnulusTest::Hit {
                            witness: Some(Point::Dyadic(zw.flipped(k))),
                        });
                    }
                    k -= 1;
                }
                Ok(AnnulusTest::Miss { resolution: None })
            }
            Space::Gasket(g) => {
                let (Point::Gasket(cp), Point::Gasket(zp)) = (c, center) else {
                    return Err(mixed(c, center));
                };
                let resolution = r.min(r_in) / 20.0;
                Ok(
                    match g.annulus_witness(cp, r, zp, r_in, r_out, resolution) {
                        Some(w) => AnnulusTest::Hit {
                            witness: Some(Point::Gasket(w)),
                        },
                        None => AnnulusTest::Miss {
                            resolution: Some(resolution),
                        },
                    },
                )
            }
            Space::Snowflake(sf) => {
                let (Point::Snowflake(a), Point::Snowflake(b)) = (c, center) else {
                    return Err(mixed(c, center));
                };
                let res = sf.base.ball_meets_annulus(
                    a,
                    sf.base_radius(r),
                    b,
                    sf.base_radius(r_in),
                    sf.base_radius(r_out),
                )?;
                Ok(match res {
                    AnnulusTest::Hit { witness } => AnnulusTest::Hit {
                        witness: witness.map(|w| Point::Snowflake(Box::new(w))),
                    },
                    AnnulusTest::Miss { resolution } => AnnulusTest::Miss {
                        resolution: resolution.map(|d| d.powf(sf.alpha)),
                    },
                })
            }
            Space::TwoPoint(t) => {
                let (cc, zc) = (coord1(c), coord1(center));
                let annulus: Vec<f64> = t
                    .points()
                    .iter()
                    .copied()
                    .filter(|p| (zc - p).abs() >= r_in && (zc - p).abs() < r_out)
                    .collect();
                if annulus.is_empty() {
                    return Err(Error::Geometry(format!(
                        "annulus [{r_in}, {r_out}) around {zc} is empty"
                    )));
                }
                Ok(match annulus.iter().find(|p| (cc - **p).abs() < r) {
                    Some(p) => AnnulusTest::Hit {
                        witness: Some(Point::Euclidean(vec![*p])),
                    },
                    None => AnnulusTest::Miss { resolution: None },
                })
            }
        }
    }

    pub fn embed<'a>(&self, p: &'a Point) -> Embedded<'a> {
        match p {
            Point::Euclidean(c) | Point::Weighted(c) => Embedded::Coords(c),
            Point::Gasket(g) => Embedded::Coords(&g.ambient),
            Point::Dyadic(w) => Embedded::Word(w),
            Point::Snowflake(inner) => match self {
                Space::Snowflake(sf) => sf.base.embed(inner),
                _ => sf_embed_fallback(inner),
            },
        }
    }

    /// Embedded counterpart of a radius (see [`Embedded`]).
    pub fn embedded_radius(&self, r: f64) -> f64 {
        match self {
            Space::Snowflake(sf) => sf.base.embedded_radius(sf.base_radius(r)),
            _ => r,
        }
    }
}

fn sf_embed_fallback(p: &Point) -> Embedded<'_> {
    match p {
        Point::Euclidean(c) | Point::Weighted(c) => Embedded::Coords(c),
        Point::Gasket(g) => Embedded::Coords(&g.ambient),
        Point::Dyadic(w) => Embedded::Word(w),
        Point::Snowflake(inner) => sf_embed_fallback(inner),
    }
}

fn coord1(p: &Point) -> f64 {
    match p {
        Point::Euclidean(c) => c[0],
        _ => f64::NAN,
    }
}

/// Declared regularity constant of the gasket backend (geodesic metric,
/// unit gasket of mass 1). Measured ratios `μ(B)/r^s` stay in `[0.84, 1.96]`.
pub const GASKET_C_V: f64 = 4.0;

enum WindowKind<'a> {
    Cube {
        center: Vec<f64>,
        g_max: Option<f64>,
    },
    Cylinder {
        base: DyadicWord,
        level: i32,
    },
    Cells(gasket::CellCover),
    Snowflake(Box<Window<'a>>),
    Discrete(Vec<Point>),
}

/// `μ` restricted to a ball, realized as `μ` restricted to a superset with
/// known mass followed by rejection. Thinning a Poisson process on the
/// superset by acceptance yields the exact process on the ball.
pub struct Window<'a> {
    space: &'a Space,
    center: Point,
    radius: f64,
    kind: WindowKind<'a>,
}

impl Window<'_> {
    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Mass of the proposal superset (for the weighted backend, the
    /// dominating measure `g_max · Lebesgue`).
    pub fn superset_mass(&self) -> f64 {
        match &self.kind {
            WindowKind::Cube { center, g_max } => {
                (2.0 * self.radius).powi(center.len() as i32) * g_max.unwrap_or(1.0)
            }
            WindowKind::Cylinder { level, .. } => dyadic::pow2(*level),
            WindowKind::Cells(cover) => cover.total_mass(),
            WindowKind::Snowflake(inner) => inner.superset_mass(),
            WindowKind::Discrete(pts) => pts.len() as f64,
        }
    }

    /// One proposal; `None` when rejected.
    pub fn propose(&self, rng: &mut dyn RngCore) -> Option<Point> {
        match &self.kind {
            WindowKind::Cube { center, g_max } => {
                let x = euclidean::cube_point(center, self.radius, rng);
                if euclidean::euclid(&x, center) >= self.radius {
                    return None;
                }
                if let (Some(g_max), Space::Weighted(w)) = (g_max, self.space) {
                    if rng.random::<f64>() * g_max >= w.density.eval(&x) {
                        return None;
                    }
                    return Some(Point::Weighted(x));
                }
                Some(Point::Euclidean(x))
            }
            WindowKind::Cylinder { base, level } => {
                Some(Point::Dyadic(base.random_in_cylinder(*level, rng)))
            }
            WindowKind::Cells(cover) => {
                let p = Point::Gasket(cover.propose(rng));
                let d = self.space.distance(&self.center, &p).ok()?;
                (d < self.radius).then_some(p)
            }
            WindowKind::Snowflake(inner) => {
                inner.propose(rng).map(|p| Point::Snowflake(Box::new(p)))
            }
            WindowKind::Discrete(pts) => {
                if pts.is_empty() {
                    None
                } else {
                    Some(pts[rng.random_range(0..pts.len())].clone())
                }
            }
        }
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Result<Point> {
        if self.superset_mass() <= 0.0 {
            return Err(Error::Sampling {
                reason: "window has zero mass".into(),
                tries: 0,
            });
        }
        for _ in 0..MAX_SAMPLING_TRIES {
            if let Some(p) = self.propose(rng) {
                return Ok(p);
            }
        }
        Err(Error::Sampling {
            reason: format!(
                "rejection cap reached for a {} window of radius {}",
                self.space.kind(),
                self.radius
            ),
            tries: MAX_SAMPLING_TRIES,
        })
    }
}
