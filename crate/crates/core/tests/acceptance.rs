//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero when
//! any criterion fails. Tolerances and runtime limits are pinned below.

#![allow(clippy::needless_range_loop)]

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use boolperc::experiment::verify::ahlfors_grid;
use boolperc::experiment::{run_estimate, EstimateOutcome, ExperimentConfig, RunOptions};
use boolperc::index::component_labels;
use boolperc::percolation::{cluster_radius, event_g, event_h, event_htilde, single_ball_covers};
use boolperc::radii::RadiusLaw;
use boolperc::sampler::{BooleanSample, ModelSpec};
use boolperc::spaces::{Density, Point, Space};
use boolperc::theory::{
    cavalieri_residual, cover_lower_bound, event_bounds, lambda0, proof_inequality_violation,
    recursion_certify, ultrametric_tail_bound, Certification, Constants, Lambda0,
};
use boolperc::verify::{
    check_ahlfors, check_uniformly_perfect, covering_fit, dyadic_eps_grid, nets_k_l,
};

/// Monte Carlo agreement, in binomial standard errors.
const Z_AGREE: f64 = 3.0;
/// Required separation for the decay criterion, in standard errors.
const Z_DECAY: f64 = 5.0;
const CAVALIERI_TOL: f64 = 1e-6;
const PROOF_INEQ_TOL: f64 = 1e-12;
const EXACT_EXPONENT_TOL: f64 = 1e-6;
const GASKET_EXPONENT_REL: f64 = 0.10;
const SNOWFLAKE_EXPONENT_REL: f64 = 0.05;
const COVERING_EXPONENT_REL: f64 = 0.10;
/// Sigma of the K/L nets and the events they serve: any σ > 1 is valid in
/// ℝ², and at σ = 2 the L net alone would need about 5·10⁷ points.
const NET_SIGMA: f64 = 1.1;

/// (id, name, runtime limit in seconds, check)
type Criterion = (u32, &'static str, u64, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn se(p: f64, n: usize) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

fn law(json: &str) -> RadiusLaw {
    serde_json::from_str::<RadiusLaw>(json)
        .unwrap()
        .validated()
        .unwrap()
}

fn model<'a>(
    space: &'a Space,
    lambda: f64,
    law: &'a RadiusLaw,
    center: &'a Point,
    w: f64,
    halo: f64,
) -> ModelSpec<'a> {
    ModelSpec {
        space,
        lambda,
        law,
        window_center: center,
        window_radius: w,
        halo_factor: halo,
    }
}

// 1 ---------------------------------------------------------------------

fn transitive_closure(space: &Space, s: &BooleanSample) -> Vec<usize> {
    let n = s.germs.len();
    let mut reach: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let (a, b) = (&s.germs[i], &s.germs[j]);
                    i == j
                        || space
                            .balls_intersect(&a.center, a.radius, &b.center, b.radius)
                            .unwrap()
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    for i in 0..n {
        if labels[i] == usize::MAX {
            for j in 0..n {
                if reach[i][j] {
                    labels[j] = next;
                }
            }
            next += 1;
        }
    }
    labels
}

fn criterion_1() -> Verdict {
    let spaces = [
        Space::euclidean(2).unwrap(),
        Space::dyadic(),
        Space::gasket(),
        Space::snowflake(Space::euclidean(2).unwrap(), 0.5).unwrap(),
        Space::weighted(2, Density::Bump).unwrap(),
    ];
    let mut mismatches = 0;
    let mut checked = 0;
    for space in &spaces {
        let center = space.origin();
        let w = 4.0;
        let mass = space.window(&center, w).unwrap().superset_mass();
        let mut got = 0;
        let mut index = 0;
        while got < 200 {
            let mean_r = 0.1 + 0.5 * (index % 7) as f64;
            let l = RadiusLaw::exponential(1.0 / mean_r).unwrap();
            let s = model(space, 30.0 / mass, &l, &center, w, 1.0)
                .replicate(1, index)
                .unwrap();
            index += 1;
            if s.germs.len() > 60 {
                continue;
            }
            let balls: Vec<(&Point, f64)> = s.germs.iter().map(|g| (&g.center, g.radius)).collect();
            if component_labels(space, &balls).unwrap() != transitive_closure(space, &s) {
                mismatches += 1;
            }
            got += 1;
            checked += 1;
        }
    }
    verdict(
        mismatches == 0,
        format!(
            "{checked} samples over {} backends, {mismatches} mismatches",
            spaces.len()
        ),
    )
}

// 2 ---------------------------------------------------------------------

fn criterion_2() -> Verdict {
    let space = Space::dyadic();
    let l = law(r#"{"kind":"dirac","r0":4}"#);
    let lambda = 0.5;
    let o = space.origin();
    let n = 100_000;
    let spec = model(&space, lambda, &l, &o, 4.0, 3.0);
    let m: Vec<f64> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            cluster_radius(&space, &spec.replicate(2, i).unwrap(), &o)
                .unwrap()
                .m_value
        })
        .collect();
    let freq = |f: &dyn Fn(f64) -> bool| m.iter().filter(|&&v| f(v)).count() as f64 / n as f64;
    let tail = ultrametric_tail_bound(&space, lambda, &l, 2.0).unwrap();
    let p_gt = freq(&|v| v > 2.0);
    let p_ge = freq(&|v| v >= 2.0);
    let ok_strict = (p_gt - tail.strict).abs() <= Z_AGREE * se(tail.strict, n);
    let ok_at_least = (p_ge - tail.at_least).abs() <= Z_AGREE * se(tail.at_least, n);
    let grid = [0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0];
    let mut envelope_ok = true;
    for &r in &grid {
        let p = freq(&|v| v > r);
        let env = ultrametric_tail_bound(&space, lambda, &l, r)
            .unwrap()
            .envelope;
        envelope_ok &= p <= env + Z_AGREE * se(p.max(1.0 / n as f64), n);
    }
    verdict(
        ok_strict && ok_at_least && envelope_ok,
        format!(
            "P(M>2)={p_gt} vs open-ball law {:.6}; P(M>=2)={p_ge:.5} vs exact {:.5} (1-e^-1); envelope on 10 radii: {envelope_ok}",
            tail.strict, tail.exact
        ),
    )
}

// 8 ---------------------------------------------------------------------

fn criterion_8() -> Verdict {
    let dirac = cavalieri_residual(&law(r#"{"kind":"dirac","r0":2}"#), 1.0, 2.0)
        .unwrap()
        .unwrap();
    let pareto = cavalieri_residual(&law(r#"{"kind":"pareto","a":5}"#), 1.0, 2.0)
        .unwrap()
        .unwrap();
    let mut worst = 0.0f64;
    let k = 45;
    let mut points = 0;
    for i in 0..k {
        for j in i..k {
            let (a, b) = (
                10.0 * i as f64 / (k - 1) as f64,
                10.0 * j as f64 / (k - 1) as f64,
            );
            let gap = -(-a).exp_m1() * b + (-b).exp_m1() * a;
            worst = worst.max(-gap);
            points += 1;
        }
    }
    let random = proof_inequality_violation(1000, 8);
    verdict(
        dirac.residual <= CAVALIERI_TOL && pareto.residual <= CAVALIERI_TOL && worst <= PROOF_INEQ_TOL && random <= PROOF_INEQ_TOL,
        format!(
            "residuals dirac={:.1e} pareto={:.1e}; inequality worst violation {worst:.1e} on {points} grid points, {random:.1e} on 1000 random",
            dirac.residual, pareto.residual
        ),
    )
}

// 9 ---------------------------------------------------------------------

fn certificate(
    f0: f64,
    g: &dyn Fn(f64) -> f64,
    c: f64,
    levels: usize,
) -> boolperc::theory::Certificate {
    match recursion_certify(&|_| f0, g, c, 1.0, levels, None).unwrap() {
        Certification::Certified(cert) => cert,
        Certification::Refused(r) => panic!("refused: {r:?}"),
    }
}

fn criterion_9() -> Verdict {
    let a = certificate(0.5, &|_| 0.0, 2.0, 6);
    let cascade =
        (0..=6).all(|k| a.envelope[k] == 0.5f64.powi(1 << k)) && a.envelope[5] == 2f64.powi(-32);
    let b = certificate(0.5, &|_| 0.25, 2.0, 12);
    let fixed = b.envelope.iter().all(|&e| e <= 0.5) && !b.decays;
    let c = certificate(0.5, &|r: f64| 0.25f64.min(1.0 / r), 2.0, 8);
    let mut first_bad = None;
    for (r, e) in c.grid.iter().zip(&c.envelope) {
        if *r >= 400.0 && *e > 2.0 / r && first_bad.is_none() {
            first_bad = Some((*r, *e));
        }
    }
    let decay = c.decays && first_bad.is_none();
    verdict(
        cascade && fixed && decay,
        format!(
            "squaring cascade {cascade} (k=5: {:e}); fixed point {fixed}; r^-1 decay: decays={} {}",
            a.envelope[5],
            c.decays,
            match first_bad {
                None => "envelope <= 2/r for r >= 400".to_string(),
                Some((r, e)) => format!("envelope({r}) = {e:.4} > 2/r = {:.2e}", 2.0 / r),
            }
        ),
    )
}

// 3 ---------------------------------------------------------------------

fn criterion_3() -> Verdict {
    let space = Space::euclidean(2).unwrap();
    let o = space.origin();
    let sigma = 2.0;
    let lambda = 1e-3;
    let n = 10_000;
    let grid = [0.02, 0.05, 0.1, 0.2, 0.4];
    let k = Constants {
        lambda,
        c_v: space.c_v(),
        s: space.s(),
        sigma,
    };
    let mut worst = f64::NEG_INFINITY;
    let mut all = true;
    let mut tally = Vec::new();
    for (li, json) in [r#"{"kind":"dirac","r0":1}"#, r#"{"kind":"pareto","a":4}"#]
        .iter()
        .enumerate()
    {
        let l = law(json);
        for (ri, &r) in grid.iter().enumerate() {
            // the halo holds B(o, 100σ⁶r), where every germ counted by H̃ lies
            let halo = (96.0f64).max(100.0 * sigma.powi(6) * r + 1.0);
            let spec = model(&space, lambda, &l, &o, 32.0, halo / 32.0);
            let stream_seed = 300 + 10 * li as u64 + ri as u64;
            let hits: (usize, usize, usize) = (0..n as u64)
                .into_par_iter()
                .map(|i| {
                    let s = spec.replicate(stream_seed, i).unwrap();
                    (
                        event_g(&space, &s, &o, r, sigma).unwrap() as usize,
                        event_h(&space, &s, &o, r, sigma).unwrap() as usize,
                        event_htilde(&space, &s, &o, r, sigma).unwrap() as usize,
                    )
                })
                .reduce(|| (0, 0, 0), |a, b| (a.0 + b.0, a.1 + b.1, a.2 + b.2));
            let b = event_bounds(&k, &l, r).unwrap();
            for (count, bound) in [
                (hits.0, b.g.value),
                (hits.1, b.h.value),
                (hits.2, b.htilde.value),
            ] {
                let p = count as f64 / n as f64;
                let slack = p - bound - Z_AGREE * se(p, n);
                worst = worst.max(slack);
                all &= slack <= 0.0;
            }
            tally.push(hits.0 + hits.1 + hits.2);
        }
    }
    verdict(
        all,
        format!("2 laws x {} radii x 3 events, max(P_hat - bound - 3se) = {worst:.3e}, event hits {tally:?}", grid.len()),
    )
}

// 4 ---------------------------------------------------------------------

fn criterion_4() -> Verdict {
    let space = Space::euclidean(2).unwrap();
    let o = space.origin();
    let sigma = 2.0;
    let l = law(r#"{"kind":"pareto_truncated","a":2.5,"cap":8}"#);
    let grid = [0.02, 0.05, 0.1, 0.2];
    // halo 20 holds every germ able to reach the window and B(o, 80·0.2)
    let spec = model(&space, 0.05, &l, &o, 10.0, 2.0);
    let target = 10_000;
    let mut uncensored = 0;
    let mut exceed = 0;
    let mut violations = 0;
    let mut batch = 0u64;
    while uncensored < target {
        let rows: Vec<Option<(usize, usize)>> = (0..2_000u64)
            .into_par_iter()
            .map(|j| {
                let i = batch * 2_000 + j;
                let s = spec.replicate(4, i).unwrap();
                let rep = cluster_radius(&space, &s, &o).unwrap();
                if rep.censored {
                    return None;
                }
                let r = grid[(i % grid.len() as u64) as usize];
                if rep.m_value > 9.0 * sigma * sigma * r {
                    let covered = event_g(&space, &s, &o, r, sigma).unwrap()
                        || event_h(&space, &s, &o, r, sigma).unwrap();
                    Some((1, !covered as usize))
                } else {
                    Some((0, 0))
                }
            })
            .collect();
        for (e, v) in rows.into_iter().flatten() {
            if uncensored == target {
                break;
            }
            uncensored += 1;
            exceed += e;
            violations += v;
        }
        batch += 1;
    }
    verdict(
        violations == 0 && exceed > 0,
        format!("{uncensored} uncensored samples, {exceed} with M > 9 sigma^2 r, {violations} outside G or H"),
    )
}

// 5, 6 -------------------------------------------------------------------

/// `C₁ = #K · #L` measured in ℝ² at `NET_SIGMA`.
fn measured_c1() -> f64 {
    static C1: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *C1.get_or_init(|| {
        let space = Space::euclidean(2).unwrap();
        let mut rng = boolperc::rng::stream(5, 0);
        let kl = nets_k_l(&space, &space.origin(), 1.0, NET_SIGMA, 20_000, &mut rng).unwrap();
        assert!(
            kl.disjoint && kl.k.passed && kl.l.passed,
            "nets failed: disjoint={} K={:?} L={:?}",
            kl.disjoint,
            (kl.k.passed, kl.k.covering_radius, kl.k.separation),
            (kl.l.passed, kl.l.covering_radius, kl.l.separation)
        );
        (kl.k.cardinality * kl.l.cardinality) as f64
    })
}

fn criterion_5() -> Verdict {
    let space = Space::euclidean(2).unwrap();
    let o = space.origin();
    let sigma = NET_SIGMA;
    let c1 = measured_c1();
    let l = law(r#"{"kind":"dirac","r0":1}"#);
    let lambda = 0.02;
    let n = 10_000;
    let k = Constants {
        lambda,
        c_v: space.c_v(),
        s: space.s(),
        sigma,
    };
    let step = 10.0 * sigma.powi(3);
    let mut all = true;
    let mut lines = Vec::new();
    for (ri, &r) in [0.25, 0.5, 1.0].iter().enumerate() {
        // B(o, 10σ³·10σ³r) inside the halo, plus the largest radius
        let halo = step * step * r + 2.0;
        let spec = model(&space, lambda, &l, &o, 1.0, halo);
        let (small, large): (usize, usize) = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                let s = spec.replicate(500 + ri as u64, i).unwrap();
                (
                    event_g(&space, &s, &o, r, sigma).unwrap() as usize,
                    event_g(&space, &s, &o, step * r, sigma).unwrap() as usize,
                )
            })
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let (p0, p1) = (small as f64 / n as f64, large as f64 / n as f64);
        let htilde = event_bounds(&k, &l, r).unwrap().htilde.value;
        let combined = (se(p1, n).powi(2) + (2.0 * c1 * p0 * se(p0, n)).powi(2)).sqrt();
        let ok = p1 <= c1 * p0 * p0 + htilde + Z_AGREE * combined;
        all &= ok;
        lines.push(format!(
            "r={r}: {p1} <= {:.3e}",
            c1 * p0 * p0 + htilde + Z_AGREE * combined
        ));
    }
    verdict(all, format!("C1={c1:.3e}; {}", lines.join("; ")))
}

fn criterion_6() -> Verdict {
    let space = Space::euclidean(2).unwrap();
    let l = law(r#"{"kind":"pareto","a":3}"#);
    let c1 = measured_c1();
    let l0 = match lambda0(c1, space.c_v(), space.s(), NET_SIGMA, &l).unwrap() {
        Lambda0::Finite(v) => v,
        other => return verdict(false, format!("no lambda0: {other:?}")),
    };
    let lambda = l0 / 2.0;
    let grid: Vec<f64> = (0..6).map(|i| 10f64.powf(i as f64 / 5.0)).collect();
    let n = 10_000u64;
    let cfg = ExperimentConfig::from_json(&format!(
        r#"{{"space":{{"kind":"euclidean","dim":2}},"law":{{"kind":"pareto","a":3}},"lambda":{lambda:e},
            "anchors":1,"r_grid":{grid:?},"replications":{n},"seed":6}}"#
    ))
    .unwrap();
    let table = match run_estimate(&cfg, &RunOptions::default()).unwrap() {
        EstimateOutcome::Complete(t) => t,
        EstimateOutcome::Stopped => unreachable!(),
    };
    let (first, last) = (&table.rows[0], &table.rows[table.rows.len() - 1]);
    let sep = first.p_upper - last.p_upper;
    let decays =
        sep >= Z_DECAY * (first.se_upper.powi(2) + last.se_upper.powi(2)).sqrt() && sep > 0.0;
    let below = table
        .rows
        .iter()
        .all(|row| row.p_upper <= row.cluster_tail_envelope);
    verdict(
        decays && below,
        format!(
            "lambda0/2={lambda:.3e} (C1={c1:.3e}); P_upper r={}: {} vs r={}: {}; decay by 5se: {decays}; below envelope: {below}",
            first.r, first.p_upper, last.r, last.p_upper
        ),
    )
}

// 7 ---------------------------------------------------------------------

fn criterion_7() -> Verdict {
    let space = Space::euclidean(2).unwrap();
    let o = space.origin();
    let lambda = 0.005;
    let n = 2_000;
    let mut prev = -1.0;
    let mut monotone = true;
    let mut above = true;
    let mut lines = Vec::new();
    for (ti, cap) in [10.0, 100.0, 1000.0].into_iter().enumerate() {
        let l = RadiusLaw::pareto_truncated(1.5, cap).unwrap();
        // germs farther than cap + 1 cannot reach B(o, 1)
        let spec = model(&space, lambda, &l, &o, 1.0, cap + 1.0);
        let hits: usize = (0..n as u64)
            .into_par_iter()
            .map(|i| {
                single_ball_covers(
                    &space,
                    &spec.replicate(700 + ti as u64, i).unwrap(),
                    &o,
                    1.0,
                )
                .unwrap() as usize
            })
            .sum();
        let p = hits as f64 / n as f64;
        let lower = cover_lower_bound(lambda, space.c_v(), space.s(), &l, 1.0);
        monotone &= p >= prev;
        above &= p >= lower - Z_AGREE * se(lower, n);
        prev = p;
        lines.push(format!("T={cap}: {p:.4} (bound {lower:.4})"));
    }
    verdict(monotone && above, lines.join(", ").to_string())
}

// 10 --------------------------------------------------------------------

fn criterion_10() -> Verdict {
    let mut rng = boolperc::rng::stream(10, 0);
    let euclid = Space::euclidean(2).unwrap();
    let cases: Vec<(Space, f64, f64, u32)> = vec![
        (euclid.clone(), 2.0, EXACT_EXPONENT_TOL, 6),
        (Space::dyadic(), 1.0, EXACT_EXPONENT_TOL, 6),
        (
            Space::gasket(),
            3f64.ln() / 2f64.ln(),
            GASKET_EXPONENT_REL * 3f64.ln() / 2f64.ln(),
            6,
        ),
        (
            Space::snowflake(euclid, 0.5).unwrap(),
            4.0,
            SNOWFLAKE_EXPONENT_REL * 4.0,
            3,
        ),
        (
            Space::weighted(2, Density::Bump).unwrap(),
            2.0,
            f64::INFINITY,
            6,
        ),
    ];
    let mut all = true;
    let mut lines = Vec::new();
    for (space, s, tol, levels) in &cases {
        let mut line = space.kind().to_string();
        if tol.is_finite() {
            let fit = check_ahlfors(space, 100, &ahlfors_grid(), &mut rng).unwrap();
            let ok = (fit.s_hat - s).abs() <= *tol;
            all &= ok;
            line += &format!(" s_hat={:.4}", fit.s_hat);
        }
        let perfect = check_uniformly_perfect(space, space.sigma(), 50, &mut rng).unwrap();
        all &= perfect.passed;
        let cover = covering_fit(
            space,
            &space.origin(),
            1.0,
            &dyadic_eps_grid(*levels),
            &mut rng,
        )
        .unwrap();
        all &= (cover.net_exponent - space.s()).abs() <= COVERING_EXPONENT_REL * space.s();
        line += &format!(
            " perfect={} cover_exp={:.3}",
            perfect.passed, cover.net_exponent
        );
        lines.push(line);
    }
    let control = Space::two_point(1.0).unwrap();
    let negative = check_uniformly_perfect(&control, control.sigma(), 50, &mut rng).unwrap();
    all &= !negative.passed;
    lines.push(format!("two_point perfect={}", negative.passed));
    verdict(all, lines.join("; "))
}

// 11 --------------------------------------------------------------------

fn criterion_11() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(
        &cfg,
        r#"{"space":{"kind":"euclidean","dim":2},"law":{"kind":"pareto_truncated","a":2.5,"cap":4},
            "lambda":[0.05,0.2],"anchors":4,"r_grid":[0.5,1,2,4],"replications":2000,"seed":11}"#,
    )
    .unwrap();
    let run = |threads: &str| {
        std::process::Command::new(env!("CARGO_BIN_EXE_boolperc"))
            .args([
                "estimate",
                "--config",
                cfg.to_str().unwrap(),
                "--seed",
                "11",
                "--threads",
                threads,
            ])
            .output()
            .unwrap()
    };
    let (a, b) = (run("1"), run("4"));
    let ok =
        a.status.success() && b.status.success() && !a.stdout.is_empty() && a.stdout == b.stdout;
    verdict(
        ok,
        format!(
            "threads 1 vs 4: {} CSV bytes, identical={}",
            a.stdout.len(),
            a.stdout == b.stdout
        ),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<Criterion> = vec![
        (1, "clustering oracle", 10, criterion_1),
        (2, "ultrametric law", 120, criterion_2),
        (3, "event bounds", 300, criterion_3),
        (4, "cluster inclusion", 120, criterion_4),
        (5, "recursive inequality", 300, criterion_5),
        (6, "subcritical decay", 600, criterion_6),
        (7, "no-subcritical side", 300, criterion_7),
        (8, "Cavalieri identity", 1, criterion_8),
        (9, "recursion certifier", 1, criterion_9),
        (10, "geometry suite", 600, criterion_10),
        (11, "determinism", 120, criterion_11),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let t = Instant::now();
        let v = run();
        let elapsed = t.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = v.pass && in_time;
        failed += !pass as u32;
        println!(
            "{} criterion {id:>2} ({name}): {} [{:.2}s, limit {limit}s{}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
