use boolperc::experiment::{
    run_estimate, EstimateOutcome, EstimateTable, ExperimentConfig, RunOptions,
};
use boolperc::Error;

fn config(json: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(json).unwrap()
}

fn complete(cfg: &ExperimentConfig, opts: &RunOptions) -> EstimateTable {
    match run_estimate(cfg, opts).unwrap() {
        EstimateOutcome::Complete(t) => t,
        EstimateOutcome::Stopped => panic!("run stopped early"),
    }
}

#[test]
fn vanishing_intensity_gives_zero_frequencies() {
    let cfg = config(
        r#"{"space":{"kind":"euclidean","dim":2},"law":{"kind":"dirac","r0":0.5},
            "lambda":1e-11,"r_grid":[0.25,0.5,1.0],"replications":300,"seed":3}"#,
    );
    let t = complete(&cfg, &RunOptions::default());
    assert_eq!(t.rows.len(), 3);
    for row in &t.rows {
        assert_eq!(row.p_upper, 0.0);
        assert_eq!(row.p_lower, 0.0);
        assert_eq!(row.se_upper, 0.0);
    }
}

#[test]
fn dyadic_dirac_matches_open_ball_law() {
    let cfg = config(
        r#"{"space":{"kind":"dyadic"},"law":{"kind":"dirac","r0":4},"lambda":0.5,
            "anchors":1,"r_grid":[1,2,3],"replications":20000,"seed":11}"#,
    );
    let t = complete(&cfg, &RunOptions::default());
    for row in &t.rows {
        let strict = row.ultrametric_strict.unwrap();
        assert!(row.ultrametric_exact.unwrap() >= strict);
        assert_eq!(
            row.p_upper, row.p_lower,
            "bounded law without halo contact is never censored"
        );
        assert!(
            (row.p_upper - strict).abs() <= 4.0 * row.se_upper.max(1e-3),
            "{row:?}"
        );
    }
    assert!((t.rows[0].p_upper - (1.0 - (-1.0f64).exp())).abs() < 0.02);
    assert_eq!(t.rows[1].p_upper, 0.0);
}

#[test]
fn output_is_independent_of_thread_count() {
    let cfg = config(
        r#"{"space":{"kind":"euclidean","dim":2},"law":{"kind":"pareto_truncated","a":3,"cap":2},
            "lambda":0.3,"anchors":4,"r_grid":[0.5,1,2],"replications":300,"seed":5,"beta":1,
            "checkpoint_every":70}"#,
    );
    let a = complete(
        &cfg,
        &RunOptions {
            threads: Some(1),
            out: None,
        },
    )
    .to_csv()
    .unwrap();
    let b = complete(
        &cfg,
        &RunOptions {
            threads: Some(4),
            out: None,
        },
    )
    .to_csv()
    .unwrap();
    assert_eq!(a, b);
    assert!(a.starts_with("lambda,law,r,replications,p_upper,se_upper,p_lower,se_lower,"));
}

#[test]
fn resumed_run_reproduces_uninterrupted_table() {
    let json = r#"{"space":{"kind":"gasket"},"law":{"kind":"dirac","r0":0.3},
            "lambda":[0.5,2],"anchors":3,"r_grid":[0.1,0.4],"replications":120,"seed":9,
            "checkpoint_every":25}"#;
    let full = complete(&config(json), &RunOptions::default());
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        threads: Some(2),
        out: Some(dir.path().to_path_buf()),
    };
    let mut cut = config(json);
    cut.stop_after_chunks = Some(3);
    assert!(matches!(
        run_estimate(&cut, &opts).unwrap(),
        EstimateOutcome::Stopped
    ));
    cut.stop_after_chunks = Some(4);
    assert!(matches!(
        run_estimate(&cut, &opts).unwrap(),
        EstimateOutcome::Stopped
    ));
    let manifest = std::fs::read_to_string(dir.path().join("checkpoint/manifest.json")).unwrap();
    assert!(manifest.contains("\"done\": 120"));
    assert!(dir.path().join("checkpoint/cell0_rep24.pbm").exists());
    let resumed = complete(&config(json), &opts);
    assert_eq!(full.to_csv().unwrap(), resumed.to_csv().unwrap());
}

#[test]
fn foreign_checkpoint_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        threads: None,
        out: Some(dir.path().to_path_buf()),
    };
    let mut cfg = config(
        r#"{"space":{"kind":"dyadic"},"law":{"kind":"dirac","r0":1},"lambda":1,
            "r_grid":[1],"replications":10,"checkpoint_every":5,"stop_after_chunks":1}"#,
    );
    run_estimate(&cfg, &opts).unwrap();
    cfg.seed = 1;
    assert!(matches!(run_estimate(&cfg, &opts), Err(Error::Config(_))));
}

#[test]
fn heavy_far_field_aborts_with_truncation_error() {
    let cfg = config(
        r#"{"space":{"kind":"euclidean","dim":2},"law":{"kind":"pareto","a":2.2},
            "lambda":5,"r_grid":[1],"replications":10}"#,
    );
    let err = run_estimate(&cfg, &RunOptions::default()).err().unwrap();
    assert!(
        matches!(err, Error::Truncation(ref m) if m.contains("halo_factor")),
        "{err}"
    );
}

#[test]
fn probabilities_and_errors_are_in_range() {
    let cfg = config(
        r#"{"space":{"kind":"euclidean","dim":2},"law":{"kind":"exponential","rate":2},
            "lambda":1,"anchors":5,"r_grid":[0.5,1,2,4],"replications":200,"seed":2,"beta":2}"#,
    );
    let t = complete(&cfg, &RunOptions::default());
    for row in &t.rows {
        for p in [
            row.p_upper,
            row.p_lower,
            row.censored_fraction,
            row.cluster_tail_envelope,
            row.single_ball_freq,
        ] {
            assert!((0.0..=1.0).contains(&p), "{row:?}");
        }
        assert!(row.se_upper >= 0.0 && row.se_lower >= 0.0 && row.beta_se.unwrap() >= 0.0);
        assert!(row.p_lower <= row.p_upper);
    }
}
