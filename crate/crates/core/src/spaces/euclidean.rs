//! Coordinate backends: flat ℝⁿ, density-weighted ℝⁿ, and the two-point
//! negative control.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erf;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::quad;

/// Volume of the unit ball in ℝⁿ.
pub fn unit_ball_volume(dim: usize) -> f64 {
    let half = dim as f64 / 2.0;
    std::f64::consts::PI.powf(half) / gamma(half + 1.0)
}

pub(crate) fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Uniform point of the cube `[center - r, center + r]^n`.
pub(crate) fn cube_point(center: &[f64], r: f64, rng: &mut dyn RngCore) -> Vec<f64> {
    center
        .iter()
        .map(|c| c + r * (2.0 * rng.random::<f64>() - 1.0))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Euclidean {
    pub dim: usize,
}

impl Euclidean {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("euclidean dimension must be positive".into()));
        }
        Ok(Euclidean { dim })
    }

    pub fn c_v(&self) -> f64 {
        let w = unit_ball_volume(self.dim);
        w.max(1.0 / w)
    }

    pub fn ball_measure(&self, r: f64) -> f64 {
        unit_ball_volume(self.dim) * r.powi(self.dim as i32)
    }
}

/// Built-in densities for the weighted backend. Each is bounded between
/// `g_min` and `g_max`, which is what makes the weighted measure Ahlfors
/// regular.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    /// g ≡ 1
    Uniform,
    /// g(x) = 1 + cos(2π x₁) / 2
    Stripes,
    /// g(x) = 1 + exp(-|x|²) / 2
    Bump,
}

impl Density {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Density::Uniform => 1.0,
            Density::Stripes => 1.0 + 0.5 * (2.0 * std::f64::consts::PI * x[0]).cos(),
            Density::Bump => 1.0 + 0.5 * (-x.iter().map(|v| v * v).sum::<f64>()).exp(),
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Density::Uniform => (1.0, 1.0),
            Density::Stripes => (0.5, 1.5),
            Density::Bump => (1.0, 1.5),
        }
    }
}

/// Relative tolerance of the ball-mass quadrature when no primitive exists.
pub const WEIGHTED_QUAD_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Weighted {
    pub dim: usize,
    pub density: Density,
}

impl Weighted {
    pub fn new(dim: usize, density: Density) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Config("weighted dimension must be positive".into()));
        }
        if density != Density::Uniform && dim > 2 {
            return Err(Error::Config(format!(
                "density {density:?} supports dimensions 1 and 2 only"
            )));
        }
        Ok(Weighted { dim, density })
    }

    pub fn c_v(&self) -> f64 {
        let w = unit_ball_volume(self.dim);
        let (lo, hi) = self.density.bounds();
        (hi * w).max(1.0 / (lo * w))
    }

    /// Whether `ball_measure` uses a closed-form primitive.
    pub fn has_primitive(&self) -> bool {
        self.density == Density::Uniform || self.dim == 1
    }

    pub fn ball_measure(&self, x: &[f64], r: f64) -> f64 {
        use std::f64::consts::PI;
        match (self.density, self.dim) {
            (Density::Uniform, n) => unit_ball_volume(n) * r.powi(n as i32),
            (Density::Stripes, 1) => {
                2.0 * r + 0.5 * (2.0 * PI * x[0]).cos() * (2.0 * PI * r).sin() / PI
            }
            (Density::Bump, 1) => 2.0 * r + 0.25 * PI.sqrt() * (erf(x[0] + r) - erf(x[0] - r)),
            _ => self.ball_measure_quadrature(x, r),
        }
    }

    /// Polar-coordinate quadrature of the density over a disc.
    pub fn ball_measure_quadrature(&self, x: &[f64], r: f64) -> f64 {
        if self.dim == 1 {
            return quad::integrate(
                |t| self.density.eval(&[t]),
                x[0] - r,
                x[0] + r,
                WEIGHTED_QUAD_TOL * 0.1,
            )
            .value;
        }
        let tau = 2.0 * std::f64::consts::PI;
        quad::integrate(
            |rho| {
                let ring = quad::integrate(
                    |theta| {
                        self.density
                            .eval(&[x[0] + rho * theta.cos(), x[1] + rho * theta.sin()])
                    },
                    0.0,
                    tau,
                    WEIGHTED_QUAD_TOL * 0.1,
                );
                rho * ring.value
            },
            0.0,
            r,
            WEIGHTED_QUAD_TOL * 0.1,
        )
        .value
    }
}

/// Two points at distance `gap` with counting measure. It is not uniformly
/// perfect and exists as a negative control for the geometry checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPoint {
    pub gap: f64,
}

impl TwoPoint {
    pub fn new(gap: f64) -> Result<Self> {
        if !(gap.is_finite() && gap > 0.0) {
            return Err(Error::Config("two-point gap must be positive".into()));
        }
        Ok(TwoPoint { gap })
    }

    pub fn points(&self) -> [f64; 2] {
        [0.0, self.gap]
    }

    pub fn ball_measure(&self, x: f64, r: f64) -> f64 {
        self.points().iter().filter(|p| (x - *p).abs() < r).count() as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disc_area() {
        let e = Euclidean::new(2).unwrap();
        assert!((e.ball_measure(1.0) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn weighted_primitives_match_quadrature() {
        for density in [Density::Stripes, Density::Bump] {
            let w = Weighted::new(1, density).unwrap();
            for (x, r) in [(0.3, 0.7), (-2.0, 3.1), (0.0, 0.05)] {
                let exact = w.ball_measure(&[x], r);
                let q = w.ball_measure_quadrature(&[x], r);
                assert!(
                    (exact - q).abs() <= 1e-6 * exact,
                    "{density:?} {x} {r}: {exact} vs {q}"
                );
            }
        }
        let flat = Weighted::new(2, Density::Uniform).unwrap();
        let q = flat.ball_measure_quadrature(&[0.4, -1.0], 2.0);
        assert!((q - 4.0 * std::f64::consts::PI).abs() < 1e-6 * q);
    }

    #[test]
    fn weighted_masses_respect_density_bounds() {
        let w = Weighted::new(2, Density::Stripes).unwrap();
        for r in [0.1, 1.0, 3.0] {
            let m = w.ball_measure(&[0.25, 0.0], r);
            let v = std::f64::consts::PI * r * r;
            assert!(m >= 0.5 * v && m <= 1.5 * v);
        }
    }
}
