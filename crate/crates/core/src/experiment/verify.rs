//! Geometry and theory checks on the configured space and law.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::ExperimentConfig;
use crate::error::Result;
use crate::radii::RadiusLaw;
use crate::rng::{derive_seed, stream};
use crate::spaces::Space;
use crate::theory::{
    cavalieri_residual, event_bounds, lambda0, recursion_certify, Certification, Constants, Lambda0,
};
use crate::verify::{
    check_ahlfors, check_uniformly_perfect, covering_fit, dyadic_eps_grid, nets_k_l,
};

/// Radii of the Ahlfors fit: `2^{-6}, 2^{-5.5}, …, 1`.
pub fn ahlfors_grid() -> Vec<f64> {
    (0..13).map(|i| 2f64.powf(-6.0 + 0.5 * i as f64)).collect()
}

/// Covering-fit depth; snowflake distances are costly, so its fit stops at
/// `ε = 1/8`.
fn eps_levels(space: &Space, configured: u32) -> u32 {
    match space {
        Space::Snowflake(_) => configured.min(3),
        _ => configured,
    }
}

/// Default net `σ`: connected spaces are uniformly perfect for every
/// `σ > 1`, and net sizes grow like `σ^{5s}`.
pub fn default_net_sigma(space: &Space) -> f64 {
    if space.geodesic() {
        1.1
    } else {
        space.sigma()
    }
}

/// One line of the report. Column order is the CSV schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check: String,
    pub passed: bool,
    pub value: f64,
    pub target: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub space: String,
    pub law: String,
    pub passed: bool,
    pub failures: Vec<String>,
    pub checks: Vec<CheckResult>,
    /// Measured `#K·#L`, when the nets were built.
    pub c1: Option<f64>,
}

impl VerifyReport {
    pub fn to_csv(&self) -> Result<String> {
        super::rows_to_csv(&self.checks)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "verification of {} with {}", self.space, self.law);
        for c in &self.checks {
            let mark = if c.passed { "ok  " } else { "FAIL" };
            let _ = writeln!(
                out,
                "  {mark} {:<22} value={:<12.6e} target {}  {}",
                c.check, c.value, c.target, c.detail
            );
        }
        let _ = writeln!(
            out,
            "{}",
            if self.passed {
                "all checks passed"
            } else {
                "verification failed"
            }
        );
        out
    }
}

fn failed(check: &str, target: String, err: impl std::fmt::Display) -> CheckResult {
    CheckResult {
        check: check.into(),
        passed: false,
        value: f64::NAN,
        target,
        detail: format!("error: {err}"),
    }
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<VerifyReport> {
    cfg.validate()?;
    let space = cfg.space();
    let law = cfg.laws()[0];
    let v = &cfg.verify;
    let (s, tol) = (space.s(), v.exponent_tol);
    let rng = |label: u64| stream(derive_seed(cfg.seed, 0x7665_7269), label);
    let mut checks = Vec::new();

    let target = format!("|s_hat - {s}| <= {tol}*s, no violations");
    checks.push(
        match check_ahlfors(&space, v.ahlfors_trials, &ahlfors_grid(), &mut rng(0)) {
            Ok(f) => CheckResult {
                check: "ahlfors".into(),
                passed: (f.s_hat - s).abs() <= tol * s && f.violations.is_empty(),
                value: f.s_hat,
                target,
                detail: format!("c_v_hat={} violations={}", f.c_v_hat, f.violations.len()),
            },
            Err(e) => failed("ahlfors", target, e),
        },
    );

    let sigma = space.sigma();
    let target = format!("annulus points found at sigma={sigma}");
    checks.push(
        match check_uniformly_perfect(&space, sigma, v.perfectness_trials, &mut rng(1)) {
            Ok(p) => CheckResult {
                check: "uniformly_perfect".into(),
                passed: p.passed,
                value: p.checked as f64,
                target,
                detail: p
                    .witness
                    .map(|(x, r)| format!("empty annulus at r={r} around {x:?}"))
                    .unwrap_or_default(),
            },
            Err(e) => failed("uniformly_perfect", target, e),
        },
    );

    let levels = eps_levels(&space, v.eps_levels);
    let target = format!("|exponent - {s}| <= {tol}*s");
    checks.push(
        match covering_fit(
            &space,
            &space.origin(),
            1.0,
            &dyadic_eps_grid(levels),
            &mut rng(2),
        ) {
            Ok(f) => CheckResult {
                check: "covering_number".into(),
                passed: (f.net_exponent - s).abs() <= tol * s,
                value: f.net_exponent,
                target,
                detail: format!(
                    "c={} counts={:?}",
                    f.c,
                    f.counts.iter().map(|c| c.1).collect::<Vec<_>>()
                ),
            },
            Err(e) => failed("covering_number", target, e),
        },
    );

    let mut c1 = None;
    if !v.skip_nets {
        let net_sigma = v.net_sigma.unwrap_or_else(|| default_net_sigma(&space));
        let target = "both nets satisfy (I), dilated balls disjoint".to_string();
        checks.push(
            match nets_k_l(
                &space,
                &space.origin(),
                v.net_r,
                net_sigma,
                v.probe_budget,
                &mut rng(3),
            ) {
                Ok(kl) => {
                    c1 = Some((kl.k.cardinality * kl.l.cardinality) as f64);
                    CheckResult {
                        check: "nets_k_l".into(),
                        passed: kl.k.passed && kl.l.passed && kl.disjoint,
                        value: c1.unwrap(),
                        target,
                        detail: format!(
                            "sigma={net_sigma} #K={} #L={} cover_K={} cover_L={} cross>={}",
                            kl.k.cardinality,
                            kl.l.cardinality,
                            kl.k.covering_radius,
                            kl.l.covering_radius,
                            kl.cross_distance_bound
                        ),
                    }
                }
                Err(e) => failed("nets_k_l", target, e),
            },
        );
    }

    let target = "relative residual <= 1e-6".to_string();
    checks.push(match cavalieri_residual(&law, 1.0, 2.0) {
        Ok(Some(c)) => CheckResult {
            check: "cavalieri".into(),
            passed: c.residual <= 1e-6,
            value: c.residual,
            target,
            detail: format!("lhs={} rhs={}", c.lhs, c.rhs),
        },
        Ok(None) => CheckResult {
            check: "cavalieri".into(),
            passed: true,
            value: f64::INFINITY,
            target,
            detail: "3-moment diverges; identity holds as infinity".into(),
        },
        Err(e) => failed("cavalieri", target, e),
    });

    let c1_used = cfg.c1.or(c1);
    checks.push(recursion_check(&space, &law, c1_used));

    let failures = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.check.clone())
        .collect::<Vec<_>>();
    Ok(VerifyReport {
        space: space.kind().to_string(),
        law: law.to_string(),
        passed: failures.is_empty(),
        failures,
        checks,
        c1,
    })
}

/// The recursion machine must certify at `λ₀/2`, where its hypotheses hold
/// by construction of `λ₀`.
fn recursion_check(space: &Space, law: &RadiusLaw, c1: Option<f64>) -> CheckResult {
    let target = "certified at lambda0/2".to_string();
    let c1 = c1.unwrap_or(1.0);
    let sigma = space.sigma();
    let run = || -> Result<CheckResult> {
        let l0 = match lambda0(c1, space.c_v(), space.s(), sigma, law)? {
            Lambda0::Finite(v) => v,
            Lambda0::NoSubcritical => {
                return Ok(CheckResult {
                    check: "recursion".into(),
                    passed: true,
                    value: 0.0,
                    target: target.clone(),
                    detail: "s-moment diverges: no subcritical phase".into(),
                })
            }
        };
        let k = Constants::of(space, l0 / 2.0);
        let f0 = |r: f64| c1 * event_bounds(&k, law, r).map_or(f64::INFINITY, |b| b.g.value);
        let g = |r: f64| c1 * event_bounds(&k, law, r).map_or(f64::INFINITY, |b| b.htilde.raw);
        let cert = recursion_certify(&f0, &g, sigma.powi(3), 1.0, 12, None)?;
        Ok(match cert {
            Certification::Certified(c) => CheckResult {
                check: "recursion".into(),
                passed: true,
                value: l0,
                target: target.clone(),
                detail: format!(
                    "c1={c1} final envelope={:e}",
                    c.envelope.last().copied().unwrap_or(0.0)
                ),
            },
            Certification::Refused(r) => CheckResult {
                check: "recursion".into(),
                passed: false,
                value: l0,
                target: target.clone(),
                detail: format!(
                    "hypothesis ({}) fails at r={}: {}",
                    r.hypothesis, r.r, r.value
                ),
            },
        })
    };
    run().unwrap_or_else(|e| failed("recursion", target.clone(), e))
}
