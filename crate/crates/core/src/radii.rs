//! Radius distributions with inverse-CDF sampling and tail moments
//! `∫_r^∞ R^s ρ(dR)`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{domain, Result};
use crate::quad;

/// Relative tolerance of the quadrature route.
pub const QUAD_REL_TOL: f64 = 1e-10;

/// A moment that may diverge. Divergence is a value and propagates through
/// every bound that consumes it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentValue {
    Finite(f64),
    Infinite,
}

impl MomentValue {
    pub fn is_finite(self) -> bool {
        matches!(self, MomentValue::Finite(_))
    }

    /// `f64::INFINITY` for the divergent case.
    pub fn as_f64(self) -> f64 {
        match self {
            MomentValue::Finite(v) => v,
            MomentValue::Infinite => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            MomentValue::Finite(v) => Some(v),
            MomentValue::Infinite => None,
        }
    }
}

impl fmt::Display for MomentValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MomentValue::Finite(v) => write!(f, "{v}"),
            MomentValue::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for MomentValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            MomentValue::Finite(v) => s.serialize_f64(*v),
            MomentValue::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for MomentValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(MomentValue::Finite(v)),
            Repr::Str(s) if s == "inf" => Ok(MomentValue::Infinite),
            Repr::Str(s) => Err(serde::de::Error::custom(format!("bad moment value {s:?}"))),
        }
    }
}

/// Radius law ρ. Pareto laws have scale fixed at 1, so the tail index alone
/// decides which moments are finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadiusLaw {
    Dirac { r0: f64 },
    Pareto { a: f64 },
    ParetoTruncated { a: f64, cap: f64 },
    Exponential { rate: f64 },
}

impl RadiusLaw {
    pub fn dirac(r0: f64) -> Result<Self> {
        RadiusLaw::Dirac { r0 }.validated()
    }

    pub fn pareto(a: f64) -> Result<Self> {
        RadiusLaw::Pareto { a }.validated()
    }

    pub fn pareto_truncated(a: f64, cap: f64) -> Result<Self> {
        RadiusLaw::ParetoTruncated { a, cap }.validated()
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        RadiusLaw::Exponential { rate }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        match self {
            RadiusLaw::Dirac { r0 } if ok(r0) => Ok(self),
            RadiusLaw::Pareto { a } if ok(a) => Ok(self),
            RadiusLaw::ParetoTruncated { a, cap } if ok(a) && cap.is_finite() && cap > 1.0 => {
                Ok(self)
            }
            RadiusLaw::Exponential { rate } if ok(rate) => Ok(self),
            other => domain(format!("invalid radius law parameters: {other:?}")),
        }
    }

    /// Whether the support is bounded above.
    pub fn is_bounded(&self) -> bool {
        matches!(
            self,
            RadiusLaw::Dirac { .. } | RadiusLaw::ParetoTruncated { .. }
        )
    }

    pub fn support_max(&self) -> f64 {
        match *self {
            RadiusLaw::Dirac { r0 } => r0,
            RadiusLaw::ParetoTruncated { cap, .. } => cap,
            _ => f64::INFINITY,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RadiusLaw::Dirac { r0 } => r0,
            _ => self.quantile(rng.random::<f64>()),
        }
    }

    /// Inverse CDF on `[0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match *self {
            RadiusLaw::Dirac { r0 } => r0,
            RadiusLaw::Pareto { a } => (1.0 - p).powf(-1.0 / a),
            RadiusLaw::ParetoTruncated { a, cap } => {
                let mass = 1.0 - cap.powf(-a);
                (1.0 - p * mass).powf(-1.0 / a).min(cap)
            }
            RadiusLaw::Exponential { rate } => -(-p).ln_1p() / rate,
        }
    }

    /// `P(R ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            RadiusLaw::Dirac { r0 } => {
                if x >= r0 {
                    1.0
                } else {
                    0.0
                }
            }
            RadiusLaw::Pareto { a } => {
                if x <= 1.0 {
                    0.0
                } else {
                    1.0 - x.powf(-a)
                }
            }
            RadiusLaw::ParetoTruncated { a, cap } => {
                if x <= 1.0 {
                    0.0
                } else if x >= cap {
                    1.0
                } else {
                    (1.0 - x.powf(-a)) / (1.0 - cap.powf(-a))
                }
            }
            RadiusLaw::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    -(-rate * x).exp_m1()
                }
            }
        }
    }

    /// Lebesgue density, absent for the atomic law.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            RadiusLaw::Dirac { .. } => None,
            RadiusLaw::Pareto { a } => Some(if x < 1.0 { 0.0 } else { a * x.powf(-a - 1.0) }),
            RadiusLaw::ParetoTruncated { a, cap } => Some(if x < 1.0 || x > cap {
                0.0
            } else {
                a * x.powf(-a - 1.0) / (1.0 - cap.powf(-a))
            }),
            RadiusLaw::Exponential { rate } => Some(if x < 0.0 {
                0.0
            } else {
                rate * (-rate * x).exp()
            }),
        }
    }

    /// Closed-form `∫_r^∞ R^s ρ(dR)`.
    pub fn tail_moment(&self, s: f64, r: f64) -> MomentValue {
        let r = r.max(0.0);
        match *self {
            RadiusLaw::Dirac { r0 } => MomentValue::Finite(if r < r0 { r0.powf(s) } else { 0.0 }),
            RadiusLaw::Pareto { a } => {
                if a <= s {
                    MomentValue::Infinite
                } else {
                    MomentValue::Finite(a / (a - s) * r.max(1.0).powf(s - a))
                }
            }
            RadiusLaw::ParetoTruncated { a, cap } => {
                let m = r.max(1.0);
                if m >= cap {
                    return MomentValue::Finite(0.0);
                }
                let norm = a / (1.0 - cap.powf(-a));
                let integral = if (s - a).abs() < 1e-12 {
                    (cap / m).ln()
                } else {
                    (cap.powf(s - a) - m.powf(s - a)) / (s - a)
                };
                MomentValue::Finite(norm * integral)
            }
            RadiusLaw::Exponential { rate } => {
                let upper = if r == 0.0 {
                    1.0
                } else {
                    gamma_ur(s + 1.0, rate * r)
                };
                MomentValue::Finite(gamma(s + 1.0) * upper / rate.powf(s))
            }
        }
    }

    /// `∫_0^∞ R^s ρ(dR)`.
    pub fn moment(&self, s: f64) -> MomentValue {
        self.tail_moment(s, 0.0)
    }

    /// The same tail moment computed by adaptive quadrature of the density.
    /// The atomic law has no density and falls back to its closed form.
    pub fn tail_moment_quadrature(&self, s: f64, r: f64) -> MomentValue {
        let r = r.max(0.0);
        match *self {
            RadiusLaw::Dirac { .. } => self.tail_moment(s, r),
            RadiusLaw::Pareto { a } => {
                if a <= s {
                    return MomentValue::Infinite;
                }
                let lo = r.max(1.0);
                let e = quad::integrate_to_infinity(
                    |x| x.powf(s) * a * x.powf(-a - 1.0),
                    lo,
                    QUAD_REL_TOL,
                );
                MomentValue::Finite(e.value)
            }
            RadiusLaw::ParetoTruncated { cap, .. } => {
                let lo = r.max(1.0);
                if lo >= cap {
                    return MomentValue::Finite(0.0);
                }
                let e = quad::integrate(
                    |x| x.powf(s) * self.density(x).unwrap_or(0.0),
                    lo,
                    cap,
                    QUAD_REL_TOL,
                );
                MomentValue::Finite(e.value)
            }
            RadiusLaw::Exponential { rate } => {
                // split at the mode of the integrand so the map to [0,1) sees it
                let peak = (s / rate).max(r);
                let head = quad::integrate(
                    |x| x.powf(s) * rate * (-rate * x).exp(),
                    r,
                    peak,
                    QUAD_REL_TOL,
                );
                let tail = quad::integrate_to_infinity(
                    |x| x.powf(s) * rate * (-rate * x).exp(),
                    peak,
                    QUAD_REL_TOL,
                );
                MomentValue::Finite(head.value + tail.value)
            }
        }
    }

    /// Points where the density (or mass) is not smooth.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            RadiusLaw::Dirac { r0 } => vec![r0],
            RadiusLaw::Pareto { .. } => vec![1.0],
            RadiusLaw::ParetoTruncated { cap, .. } => vec![1.0, cap],
            RadiusLaw::Exponential { .. } => vec![],
        }
    }

    /// Exact-form description used in reports.
    pub fn describe(&self) -> String {
        match *self {
            RadiusLaw::Dirac { r0 } => format!("dirac(r0={r0})"),
            RadiusLaw::Pareto { a } => format!("pareto(xmin=1,a={a})"),
            RadiusLaw::ParetoTruncated { a, cap } => {
                format!("pareto_truncated(xmin=1,a={a},cap={cap})")
            }
            RadiusLaw::Exponential { rate } => format!("exponential(rate={rate})"),
        }
    }
}

impl fmt::Display for RadiusLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn dirac_examples() {
        let law = RadiusLaw::dirac(4.0).unwrap();
        let mut rng = stream(1, 0);
        assert!((0..100).all(|_| law.sample(&mut rng) == 4.0));
        assert_eq!(law.tail_moment(2.0, 2.0), MomentValue::Finite(16.0));
        assert_eq!(law.tail_moment(2.0, 4.0), MomentValue::Finite(0.0));
        assert_eq!(
            RadiusLaw::dirac(2.0).unwrap().moment(3.0),
            MomentValue::Finite(8.0)
        );
    }

    #[test]
    fn pareto_tail_moment_values() {
        // ∫_1^∞ R² 3R^-4 dR = 3 (frozen from the quadrature oracle below)
        let law = RadiusLaw::pareto(3.0).unwrap();
        assert!((law.tail_moment(2.0, 1.0).as_f64() - 3.0).abs() < 1e-12);
        let oracle = quad::integrate_to_infinity(|x| x * x * 3.0 * x.powi(-4), 1.0, 1e-12).value;
        assert!((oracle - 3.0).abs() < 1e-9);
        assert_eq!(
            RadiusLaw::pareto(1.5).unwrap().tail_moment(2.0, 7.0),
            MomentValue::Infinite
        );
        assert_eq!(
            RadiusLaw::pareto(2.0).unwrap().moment(2.0),
            MomentValue::Infinite
        );
        assert!((RadiusLaw::pareto(5.0).unwrap().moment(2.0).as_f64() - 5.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_mean_is_gamma_two() {
        let law = RadiusLaw::exponential(1.0).unwrap();
        assert!((law.moment(1.0).as_f64() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn truncated_draws_stay_in_support() {
        let law = RadiusLaw::pareto_truncated(1.5, 10.0).unwrap();
        let mut rng = stream(2, 0);
        for _ in 0..10_000 {
            let r = law.sample(&mut rng);
            assert!((1.0..=10.0).contains(&r));
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(RadiusLaw::pareto(0.0).is_err());
        assert!(RadiusLaw::pareto_truncated(2.0, 1.0).is_err());
        assert!(RadiusLaw::dirac(-1.0).is_err());
        assert!(RadiusLaw::exponential(f64::NAN).is_err());
    }

    #[test]
    fn json_descriptor_round_trip() {
        let law: RadiusLaw = serde_json::from_str(r#"{"kind":"pareto","a":3.0}"#).unwrap();
        assert_eq!(law, RadiusLaw::Pareto { a: 3.0 });
        let t: RadiusLaw =
            serde_json::from_str(r#"{"kind":"pareto_truncated","a":1.5,"cap":10}"#).unwrap();
        assert_eq!(t.support_max(), 10.0);
        assert_eq!(
            serde_json::to_string(&MomentValue::Infinite).unwrap(),
            "\"inf\""
        );
    }
}
