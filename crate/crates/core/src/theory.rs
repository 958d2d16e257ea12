//! Closed-form bounds, thresholds and identities, evaluated numerically.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad;
use crate::radii::{MomentValue, RadiusLaw};
use crate::rng;
use crate::spaces::{dyadic, Space};

pub fn tau(sigma: f64) -> Result<f64> {
    if !(sigma >= 1.0) || !sigma.is_finite() {
        return domain(format!("sigma must be at least 1, got {sigma}"));
    }
    Ok(sigma / (10.0 * sigma - 9.0))
}

pub fn snowflake_exponent(s: f64, alpha: f64) -> Result<f64> {
    if !(s > 0.0) {
        return domain(format!("exponent must be positive, got {s}"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("snowflake exponent must lie in (0,1), got {alpha}"));
    }
    Ok(s / alpha)
}

/// A probability bound with its value before clamping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bound {
    pub value: f64,
    /// Unclamped value; `inf` when a moment diverges.
    #[serde(with = "inf_as_string")]
    pub raw: f64,
    /// A divergent integral forced the clamp.
    pub infinite: bool,
}

impl Bound {
    fn from_raw(raw: f64) -> Self {
        Bound {
            value: raw.clamp(0.0, 1.0),
            raw,
            infinite: raw.is_infinite(),
        }
    }

    fn product(factor: f64, m: MomentValue) -> Self {
        match m {
            MomentValue::Finite(v) => Bound::from_raw(factor * v),
            MomentValue::Infinite => Bound::from_raw(f64::INFINITY),
        }
    }
}

mod inf_as_string {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum V {
            N(f64),
            S(String),
        }
        match V::deserialize(d)? {
            V::N(x) => Ok(x),
            V::S(s) if s == "inf" => Ok(f64::INFINITY),
            V::S(s) => Err(serde::de::Error::custom(format!("bad number {s}"))),
        }
    }
}

/// Constants shared by every bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub lambda: f64,
    pub c_v: f64,
    pub s: f64,
    pub sigma: f64,
}

impl Constants {
    pub fn of(space: &Space, lambda: f64) -> Self {
        Constants {
            lambda,
            c_v: space.c_v(),
            s: space.s(),
            sigma: space.sigma(),
        }
    }

    fn check(&self) -> Result<()> {
        for (name, v) in [
            ("lambda", self.lambda),
            ("C_V", self.c_v),
            ("s", self.s),
            ("sigma", self.sigma),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive, got {v}"));
            }
        }
        tau(self.sigma).map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventBounds {
    pub g: Bound,
    pub h: Bound,
    pub htilde: Bound,
}

/// Bounds on `P(G(x,r))`, `P(H(x,r))`, `P(H̃(x,r))`.
pub fn event_bounds(k: &Constants, law: &RadiusLaw, r: f64) -> Result<EventBounds> {
    k.check()?;
    if !(r > 0.0) {
        return domain(format!("scale r must be positive, got {r}"));
    }
    let Constants {
        lambda,
        c_v,
        s,
        sigma,
    } = *k;
    let t = tau(sigma)?;
    let g = Bound::from_raw((10.0 * sigma.powi(3)).powf(s) * lambda * c_v * r.powf(s));
    let h = Bound::product(
        (10.0 * t).powf(s) * lambda * c_v,
        law.tail_moment(s, sigma.powi(3) * r / t),
    );
    let htilde = Bound::product(
        (100.0 * sigma.powi(6)).powf(s) * lambda * c_v,
        law.tail_moment(s, r),
    );
    Ok(EventBounds { g, h, htilde })
}

/// Certified bound on `sup_x P(G(x, 10σ³r))` given `p ≥ sup_x P(G(x, r))`.
pub fn scaling_envelope(k: &Constants, law: &RadiusLaw, c1: f64, p: f64, r: f64) -> Result<f64> {
    check_probability(p)?;
    let b = event_bounds(k, law, r)?;
    Ok((c1 * p * p + b.htilde.raw).min(1.0))
}

/// Bound on `sup_x P(M(x) > 9σ²r)` given `g_sup ≥ sup_x P(G(x, r))`.
pub fn cluster_tail_envelope(k: &Constants, law: &RadiusLaw, g_sup: f64, r: f64) -> Result<f64> {
    check_probability(g_sup)?;
    let b = event_bounds(k, law, r)?;
    Ok((g_sup + b.h.raw).min(1.0))
}

fn check_probability(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        domain(format!("probability must lie in [0,1], got {p}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lambda0 {
    Finite(f64),
    /// The `s`-moment diverges: the whole space is covered at every intensity.
    NoSubcritical,
}

impl Lambda0 {
    pub fn value(self) -> Option<f64> {
        match self {
            Lambda0::Finite(v) => Some(v),
            Lambda0::NoSubcritical => None,
        }
    }
}

/// Largest intensity for which `f = C₁·g_bound` satisfies `f ≤ 1/2` on
/// `[1, 10σ³]` and `g = C₁·htilde_bound ≤ 1/4`.
pub fn lambda0(c1: f64, c_v: f64, s: f64, sigma: f64, law: &RadiusLaw) -> Result<Lambda0> {
    if !(c1 > 0.0 && c_v > 0.0 && s > 0.0) {
        return domain("C1, C_V and s must be positive");
    }
    tau(sigma)?;
    let Some(m) = law.moment(s).finite() else {
        return Ok(Lambda0::NoSubcritical);
    };
    let first = 1.0 / (2.0 * c1 * c_v * (10.0 * sigma.powi(3)).powf(2.0 * s));
    let second = 1.0 / (4.0 * c1 * c_v * (100.0 * sigma.powi(6)).powf(s) * m);
    Ok(Lambda0::Finite(first.min(second)))
}

/// Number of log-spaced points checked on `[1, 10c]` for hypothesis (a).
const BASE_CHECKS: usize = 64;
/// Envelope value treated as vanished.
const DECAY_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub c: f64,
    /// Grid `r_k = (10c)^k r₁`, `k = 0..`.
    pub grid: Vec<f64>,
    /// Upper envelope of `f` at each grid point.
    pub envelope: Vec<f64>,
    pub decays: bool,
    /// `Some(true)` when `Σ r_k^{θ-1} envelope_k Δr_k` converges numerically.
    pub theta_integrable: Option<bool>,
}

impl Certificate {
    /// Envelope at the largest grid point not above `r`.
    pub fn envelope_at(&self, r: f64) -> Option<f64> {
        self.grid
            .iter()
            .rposition(|&x| x <= r * (1.0 + 1e-12))
            .map(|i| self.envelope[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Refusal {
    /// `a` for `f ≤ 1/2` on the base interval, `b` for `g ≤ 1/4`.
    pub hypothesis: char,
    pub r: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Certification {
    Certified(Certificate),
    Refused(Refusal),
}

/// Iterates `F_{k+1}(r) = F_k(r/10c)² + g(r)` along `r_k = (10c)^k r₁`
/// starting from `F_0 = f0(r₁)`.
pub fn recursion_certify(
    f0: &dyn Fn(f64) -> f64,
    g: &dyn Fn(f64) -> f64,
    c: f64,
    r1: f64,
    levels: usize,
    theta: Option<f64>,
) -> Result<Certification> {
    if !(c > 1.0) {
        return domain(format!("c must exceed 1, got {c}"));
    }
    let step = 10.0 * c;
    if !(1.0..=step).contains(&r1) {
        return domain(format!("r1 must lie in [1, {step}], got {r1}"));
    }
    for i in 0..BASE_CHECKS {
        let r = step.powf(i as f64 / (BASE_CHECKS - 1) as f64);
        let v = f0(r);
        if !(v <= 0.5) {
            return Ok(Certification::Refused(Refusal {
                hypothesis: 'a',
                r,
                value: v,
            }));
        }
    }
    let grid: Vec<f64> = (0..=levels).map(|k| r1 * step.powi(k as i32)).collect();
    let base_grid = (0..BASE_CHECKS).map(|i| step.powf(i as f64 / (BASE_CHECKS - 1) as f64));
    for r in base_grid.chain(grid.iter().copied()) {
        let v = g(r);
        if !(v <= 0.25) {
            return Ok(Certification::Refused(Refusal {
                hypothesis: 'b',
                r,
                value: v,
            }));
        }
    }
    let mut envelope = Vec::with_capacity(grid.len());
    let mut e = f0(r1);
    envelope.push(e);
    for &r in &grid[1..] {
        e = e * e + g(r);
        envelope.push(e);
    }
    let decays = *envelope.last().expect("grid is non-empty") <= DECAY_TOL;
    let theta_integrable = theta.map(|th| {
        let terms: Vec<f64> = (1..grid.len())
            .map(|k| grid[k].powf(th - 1.0) * envelope[k] * (grid[k] - grid[k - 1]))
            .collect();
        let tail = &terms[terms.len().saturating_sub(11)..];
        tail.len() >= 2
            && tail
                .windows(2)
                .all(|w| w[1] == 0.0 || (w[0] > 0.0 && w[1] / w[0] < 1.0))
    });
    Ok(Certification::Certified(Certificate {
        c,
        grid,
        envelope,
        decays,
        theta_integrable,
    }))
}

/// `1 - exp(-λ/(2^s C_V) ∫_{2r}^∞ R^s ρ(dR))`.
pub fn cover_lower_bound(lambda: f64, c_v: f64, s: f64, law: &RadiusLaw, r: f64) -> f64 {
    match law.tail_moment(s, 2.0 * r) {
        MomentValue::Infinite => 1.0,
        MomentValue::Finite(t) => -(-lambda / (2f64.powf(s) * c_v) * t).exp_m1(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CoverVerdict {
    CoversEverything,
    ProperSubset,
}

pub fn whole_cover_dichotomy(law: &RadiusLaw, s: f64) -> CoverVerdict {
    if law.moment(s).is_finite() {
        CoverVerdict::ProperSubset
    } else {
        CoverVerdict::CoversEverything
    }
}

/// Tail of `M(x)` on an ultrametric backend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UltrametricTail {
    /// `1 - exp(-λ ∫_{(r,∞)} μ(B(x,R)) ρ(dR))`.
    pub exact: f64,
    /// `P(M(x) > r)` for open balls: only radii above the next distance
    /// value beyond `r` push the sup past `r`.
    pub strict: f64,
    /// `P(M(x) ≥ r)` for open balls.
    pub at_least: f64,
    /// `1 - exp(-λ C_V ∫_r^∞ R^s ρ(dR))`.
    pub envelope: f64,
}

/// Distance-spectrum neighbours `(largest value < r, smallest value > r)`.
fn spectrum(space: &Space, r: f64) -> Option<(f64, f64)> {
    match space {
        Space::Dyadic(_) => Some((dyadic::spectrum_pred(r), dyadic::spectrum_succ(r))),
        Space::Snowflake(sf) => {
            let (p, q) = spectrum(&sf.base, sf.base_radius(r))?;
            Some((p.powf(sf.alpha), q.powf(sf.alpha)))
        }
        _ => None,
    }
}

/// `∫_{(a,∞)} μ(B(x,R)) ρ(dR)`, summed exactly over the shells between
/// consecutive distance values, on which open-ball masses are constant.
fn ultrametric_integral(space: &Space, law: &RadiusLaw, a: f64) -> Result<MomentValue> {
    let (s, c_v) = (space.s(), space.c_v());
    if !law.tail_moment(s, a).is_finite() {
        return Ok(MomentValue::Infinite);
    }
    let x = space.origin();
    let mut lo = a;
    let mut total = 0.0;
    for _ in 0..4096 {
        let (_, hi) = spectrum(space, lo).expect("ultrametric backend");
        let shell = law.cdf(hi) - law.cdf(lo);
        if shell > 0.0 {
            total += shell * space.ball_measure(&x, hi)?.upper;
        }
        lo = hi;
        let rest = law.tail_moment(s, lo).finite().unwrap_or(f64::INFINITY) * c_v;
        if lo >= law.support_max() || rest <= 1e-13 * total || rest < 1e-300 {
            return Ok(MomentValue::Finite(total));
        }
    }
    Err(Error::Domain(
        "ultrametric shell sum did not converge".into(),
    ))
}

pub fn ultrametric_tail_bound(
    space: &Space,
    lambda: f64,
    law: &RadiusLaw,
    r: f64,
) -> Result<UltrametricTail> {
    if !space.ultrametric() {
        return Err(Error::Usage(format!(
            "{} space is not ultrametric",
            space.kind()
        )));
    }
    if !(r > 0.0 && lambda > 0.0) {
        return domain("lambda and r must be positive");
    }
    let prob = |m: MomentValue| match m {
        MomentValue::Infinite => 1.0,
        MomentValue::Finite(v) => -(-lambda * v).exp_m1(),
    };
    let (pred, succ) = spectrum(space, r).expect("ultrametric backend");
    // smallest distance value >= r
    let ceil = if spectrum(space, pred).map(|p| p.1) == Some(r) {
        r
    } else {
        succ
    };
    let envelope = match law.tail_moment(space.s(), r) {
        MomentValue::Infinite => 1.0,
        MomentValue::Finite(t) => -(-lambda * space.c_v() * t).exp_m1(),
    };
    Ok(UltrametricTail {
        exact: prob(ultrametric_integral(space, law, r)?),
        strict: prob(ultrametric_integral(space, law, succ)?),
        at_least: prob(ultrametric_integral(space, law, ceil)?),
        envelope,
    })
}

/// Lower bound on `E[M(x)^β]` at intensity `λ`.
pub fn mean_cluster_lower_bound(
    lambda: f64,
    c_v: f64,
    s: f64,
    beta: f64,
    law: &RadiusLaw,
) -> Result<MomentValue> {
    let m = match law.moment(s) {
        MomentValue::Finite(m) if m > 0.0 => m,
        _ => return domain("the s-moment must be finite and positive"),
    };
    let c = lambda / (2f64.powf(s) * c_v) * m;
    let factor = if c > 0.0 { -(-c).exp_m1() / c } else { 1.0 };
    Ok(match law.moment(s + beta) {
        MomentValue::Infinite => MomentValue::Infinite,
        MomentValue::Finite(mb) => {
            MomentValue::Finite(lambda * factor / (2f64.powf(s + beta) * (s + beta) * c_v) * mb)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cavalieri {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

/// Both sides of `∫ R^{p+q} ρ(dR) = p ∫_0^∞ r^{p-1} (∫_r^∞ R^q ρ(dR)) dr`;
/// `None` when the `(p+q)`-moment diverges.
pub fn cavalieri_residual(law: &RadiusLaw, p: f64, q: f64) -> Result<Option<Cavalieri>> {
    if !(p > 0.0 && q > 0.0) {
        return domain("p and q must be positive");
    }
    let MomentValue::Finite(lhs) = law.tail_moment_quadrature(p + q, 0.0) else {
        return Ok(None);
    };
    let tail = |r: f64| law.tail_moment(q, r).as_f64();
    let integrand = |r: f64| {
        if r == 0.0 {
            0.0
        } else {
            p * r.powf(p - 1.0) * tail(r)
        }
    };
    let breaks = law.breakpoints();
    let rhs = if law.is_bounded() {
        quad::integrate_pieces(integrand, 0.0, law.support_max(), &breaks, 1e-12).value
    } else {
        let split = breaks.iter().copied().fold(1.0, f64::max);
        quad::integrate_pieces(integrand, 0.0, split, &breaks, 1e-12).value
            + quad::integrate_to_infinity(integrand, split, 1e-12).value
    };
    let residual = if lhs == 0.0 {
        rhs.abs()
    } else {
        (lhs - rhs).abs() / lhs
    };
    Ok(Some(Cavalieri { lhs, rhs, residual }))
}

/// Largest violation of `(1-e^{-a}) b ≥ (1-e^{-b}) a` over `n` random pairs
/// `0 ≤ a ≤ b ≤ 10` (0 when none).
pub fn proof_inequality_violation(n: usize, seed: u64) -> f64 {
    let mut r = rng::stream(seed, rng::AUX_STREAM);
    let mut worst = 0.0f64;
    for _ in 0..n {
        let (u, v): (f64, f64) = (r.random_range(0.0..=10.0), r.random_range(0.0..=10.0));
        let (a, b) = (u.min(v), u.max(v));
        let gap = -(-a).exp_m1() * b - (-(-b).exp_m1()) * a;
        worst = worst.max(-gap);
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub r: f64,
    pub g_bound: Bound,
    pub h_bound: Bound,
    pub htilde_bound: Bound,
    /// `min(1, g_bound + h_bound)`.
    pub envelope: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSheet {
    pub constants: Constants,
    pub law: RadiusLaw,
    pub tau: f64,
    pub c1: f64,
    pub lambda0: Lambda0,
    pub rows: Vec<BoundRow>,
}

impl BoundSheet {
    pub const CSV_HEADER: &'static str = "r,g_bound,h_bound,htilde_bound,envelope";

    pub fn new(k: Constants, law: &RadiusLaw, c1: f64, r_grid: &[f64]) -> Result<Self> {
        let rows = r_grid
            .iter()
            .map(|&r| {
                let b = event_bounds(&k, law, r)?;
                Ok(BoundRow {
                    r,
                    g_bound: b.g,
                    h_bound: b.h,
                    htilde_bound: b.htilde,
                    envelope: (b.g.raw + b.h.raw).min(1.0),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundSheet {
            constants: k,
            law: *law,
            tau: tau(k.sigma)?,
            c1,
            lambda0: lambda0(c1, k.c_v, k.s, k.sigma, law)?,
            rows,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                row.r, row.g_bound.value, row.h_bound.value, row.htilde_bound.value, row.envelope
            ));
        }
        out
    }
}
