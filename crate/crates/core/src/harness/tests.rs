use super::*;
use crate::fourier::{read_coeffs, Basis};

fn small_learn(tree: &str, trials: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Learn, 6, 0.1);
    cfg.tree = tree.parse().unwrap();
    cfg.m = 2000;
    cfg.trials = trials;
    cfg.depth_cap = Some(6);
    cfg.seed = 11;
    cfg
}

fn csv_bytes(records: &[TrialRecord]) -> Vec<u8> {
    let mut buf = Vec::new();
    write_records(records, &mut buf).unwrap();
    buf
}

#[test]
fn tree_source_round_trip() {
    for s in ["random:8", "parity:4", "file:/tmp/t.txt"] {
        let t: TreeSource = s.parse().unwrap();
        assert_eq!(t.to_string(), s);
    }
    for s in ["random", "random:x", "parity:", "file:", "tree:3"] {
        assert!(s.parse::<TreeSource>().is_err(), "{s}");
    }
}

#[test]
fn base_means_round_trip() {
    for s in ["zero", "random", "random:-0.02:0.02", "file:mu.txt"] {
        let m: BaseMeans = s.parse().unwrap();
        assert_eq!(m.to_string(), s);
    }
    for s in ["", "rand", "random:0.1", "random:0.3:0.1", "file:"] {
        assert!(s.parse::<BaseMeans>().is_err(), "{s}");
    }
}

#[test]
fn eval_mode_parsing_and_default() {
    assert_eq!("exact".parse::<EvalMode>().unwrap(), EvalMode::Exact);
    assert_eq!("mc:500".parse::<EvalMode>().unwrap(), EvalMode::MonteCarlo(500));
    assert!("mc:0".parse::<EvalMode>().is_err());
    assert!("mc".parse::<EvalMode>().is_err());
    assert_eq!(EvalMode::default_for(20), EvalMode::Exact);
    assert_eq!(EvalMode::default_for(21), EvalMode::MonteCarlo(DEFAULT_MC_POINTS));
}

#[test]
fn bias_convention_maps_to_means() {
    let conv = MeanConvention::ZeroOne;
    assert!((conv.to_pm1(0.49) + 0.02).abs() < 1e-12);
    assert!((conv.to_pm1(0.51) - 0.02).abs() < 1e-12);
    assert_eq!(MeanConvention::PlusMinusOne.to_pm1(0.3), 0.3);
    let mut cfg = small_learn("random:4", 1);
    cfg.mu = "random:0.49:0.51".parse().unwrap();
    cfg.mu_convention = MeanConvention::ZeroOne;
    let run = run_learn_trial(&cfg, 5).unwrap();
    assert!(run.instance.base_mu.iter().all(|v| v.abs() <= 0.02 + 1e-12));
}

#[test]
fn validation_rejects_bad_configs() {
    let ok = small_learn("random:4", 2);
    ok.validate().unwrap();
    type Mutation = Box<dyn Fn(&mut ExperimentConfig)>;
    let cases: Vec<Mutation> = vec![
        Box::new(|c| c.c = 0.25),
        Box::new(|c| c.c = 0.0),
        Box::new(|c| c.n = 0),
        Box::new(|c| c.trials = 0),
        Box::new(|c| c.m = 0),
        Box::new(|c| c.workers = Some(0)),
        Box::new(|c| c.eps = 1.0),
        Box::new(|c| c.max_fail_rate = 1.5),
        Box::new(|c| c.threshold = Some(0.0)),
        Box::new(|c| {
            c.n = 24;
            c.eval = EvalMode::Exact;
        }),
        Box::new(|c| c.mu = BaseMeans::Range(-0.9, 0.9)),
    ];
    for (i, mutate) in cases.iter().enumerate() {
        let mut cfg = ok.clone();
        mutate(&mut cfg);
        assert!(matches!(cfg.validate(), Err(Error::Config(_))), "case {i}");
    }
}

#[test]
fn constant_target_has_zero_error() {
    let mut cfg = small_learn("random:1", 5);
    cfg.m = 100;
    let records = run_learn_experiment(&cfg).unwrap();
    assert_eq!(records.len(), 5);
    for r in &records {
        assert!(!r.fail);
        assert_eq!(r.error, Some(0.0));
        assert_eq!(r.final_frontier_size, 1);
    }
}

#[test]
fn rows_follow_trial_order() {
    let records = run_learn_experiment(&small_learn("random:4", 6)).unwrap();
    for (k, r) in records.iter().enumerate() {
        assert_eq!(r.trial, k);
        assert_eq!(r.seed, derive_seed(11, label::TRIAL, k as u64));
        assert_eq!(r.frontier_sizes[0], 1);
        assert_eq!(*r.frontier_sizes.last().unwrap(), r.final_frontier_size);
    }
}

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let mut cfg = small_learn("random:6", 8);
    cfg.workers = Some(1);
    let one = csv_bytes(&run_learn_experiment(&cfg).unwrap());
    let again = csv_bytes(&run_learn_experiment(&cfg).unwrap());
    cfg.workers = Some(4);
    let four = csv_bytes(&run_learn_experiment(&cfg).unwrap());
    assert_eq!(one, again);
    assert_eq!(one, four);
}

#[test]
fn a_row_replays_in_isolation() {
    let cfg = small_learn("parity:2", 4);
    let records = run_learn_experiment(&cfg).unwrap();
    let r = &records[3];
    let run = run_learn_trial(&cfg, r.seed).unwrap();
    assert_eq!(digest(&run.instance.base_mu), r.mu_base_digest);
    assert_eq!(digest(&run.instance.delta), r.delta_digest);
    assert_eq!(run.error, r.error);
    assert_eq!(run.outcome.frontier.len(), r.final_frontier_size);
}

#[test]
fn digests_are_stable_and_sensitive() {
    let a = digest(&[0.1, -0.2]);
    assert_eq!(a.len(), 16);
    assert_eq!(a, digest(&[0.1, -0.2]));
    assert_ne!(a, digest(&[0.1, -0.2000001]));
    assert_ne!(digest(&[0.0]), digest(&[-0.0]));
}

#[test]
fn squared_loss_bounds_error() {
    let records = run_learn_experiment(&small_learn("random:6", 6)).unwrap();
    for r in records.iter().filter(|r| !r.fail) {
        assert!(r.error.unwrap() <= r.squared_loss.unwrap() + 1e-12);
    }
}

#[test]
fn monte_carlo_eval_skips_squared_loss() {
    let mut cfg = small_learn("random:4", 2);
    cfg.eval = EvalMode::MonteCarlo(5000);
    for r in run_learn_experiment(&cfg).unwrap() {
        assert!(r.error.is_some());
        assert!(r.squared_loss.is_none());
    }
}

#[test]
fn fail_outcomes_are_recorded() {
    let mut cfg = small_learn("random:8", 3);
    cfg.threshold = Some(1e-6);
    cfg.m = 20;
    let records = run_learn_experiment(&cfg).unwrap();
    assert!(records.iter().all(|r| r.fail && r.error.is_none()));
    let s = summarize(&records, cfg.eps, cfg.delta);
    assert_eq!(s.fails, 3);
    assert_eq!(s.fail_rate, 1.0);
    assert!(!s.meets_confidence);
    assert_eq!(s.mean_error, None);
}

#[test]
fn timing_column_is_opt_in() {
    let cfg = small_learn("random:2", 2);
    let plain = String::from_utf8(csv_bytes(&run_learn_experiment(&cfg).unwrap())).unwrap();
    assert!(plain.starts_with(
        "trial,seed,mu_base_digest,delta_digest,frontier_sizes,final_frontier_size,fail,error,squared_loss\n"
    ));
    let mut timed = cfg.clone();
    timed.timing = true;
    let text = String::from_utf8(csv_bytes(&run_learn_experiment(&timed).unwrap())).unwrap();
    assert!(text.lines().next().unwrap().ends_with(",wall_time"));
}

#[test]
fn sidecar_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_learn("parity:3", 2);
    cfg.mu = BaseMeans::Range(-0.1, 0.1);
    cfg.eval = EvalMode::MonteCarlo(1000);
    let path = write_sidecar(&cfg, &dir.path().join("r.csv")).unwrap();
    assert!(path.ends_with("r.csv.config.json"));
    let back: ExperimentConfig = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(back, cfg);
}

#[test]
fn file_sources_are_read_once_per_campaign() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("t.txt");
    fs::write(&tree, "(node 1 (node 2 (leaf -1) (leaf +1)) (leaf +1))\n").unwrap();
    let mu = dir.path().join("mu.txt");
    fs::write(&mu, "0.5\n0.5\n0.5\n0.5\n0.5\n0.5\n").unwrap();
    let mut cfg = small_learn(&format!("file:{}", tree.display()), 2);
    cfg.mu = format!("file:{}", mu.display()).parse().unwrap();
    cfg.mu_convention = MeanConvention::ZeroOne;
    let records = run_learn_experiment(&cfg).unwrap();
    assert_eq!(records[0].mu_base_digest, digest(&[0.0; 6]));
    assert_ne!(records[0].delta_digest, records[1].delta_digest);
}

#[test]
fn bad_files_name_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("bad.txt");
    fs::write(&tree, "(node 1 (leaf -1)").unwrap();
    let cfg = small_learn(&format!("file:{}", tree.display()), 1);
    let err = run_learn_experiment(&cfg).unwrap_err();
    assert!(matches!(&err, Error::InFile { source, .. } if matches!(**source, Error::TreeParse { .. })));
    assert!(err.to_string().contains("bad.txt"));
    let missing = small_learn("file:/nonexistent/tree.txt", 1);
    assert!(matches!(run_learn_experiment(&missing), Err(Error::File { .. })));
    let mut short = small_learn("random:2", 1);
    let mu = dir.path().join("mu.txt");
    fs::write(&mu, "0.1\n").unwrap();
    short.mu = BaseMeans::File(mu);
    assert!(matches!(run_learn_experiment(&short), Err(Error::InFile { .. })));
}

#[test]
fn parity_source_draws_k_variables() {
    let src = TreeSource::Parity(3);
    let mut rng = stream(1, "t", 0);
    for _ in 0..10 {
        let t = src.build(8, &mut rng).unwrap();
        assert_eq!(t.relevant_vars().len(), 3);
        assert_eq!(t.size(), 8);
    }
    assert!(TreeSource::Parity(9).build(8, &mut rng).is_err());
}

#[test]
fn recovery_on_an_easy_target() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::CoeffRecovery, 6, 0.1);
    cfg.tree = TreeSource::Parity(2);
    cfg.m = 20_000;
    cfg.trials = 4;
    cfg.depth_cap = Some(6);
    let records = run_coeff_recovery(&cfg).unwrap();
    for r in &records {
        assert!(r.captured, "{r:?}");
        assert!(r.heavy_size >= 1 && r.heavy_size <= 4);
        assert!(r.admissible_size >= r.heavy_size);
        assert!((r.tau - r.threshold * 0.1f64.sqrt() / 4.0).abs() < 1e-15);
        assert_eq!(r.error, Some(0.0));
    }
}

#[test]
fn sz_grid_respects_the_bound() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::SzCheck, 1, 0.1);
    cfg.trials = 20_000;
    cfg.sz_max_degree = 3;
    cfg.sz_eps = vec![1e-1, 1e-2];
    let rows = run_sz_check(&cfg).unwrap();
    assert_eq!(rows.len(), 3 * 2 * 3);
    assert!(rows.iter().filter(|r| r.quantity == "sz-bound").all(|r| r.pass));
    for r in rows
        .iter()
        .filter(|r| r.params.starts_with("d=1;") || r.params.starts_with("d=2;"))
    {
        if r.quantity == "sz-unscaled-sum" {
            let exact = rows
                .iter()
                .find(|e| e.quantity == "sz-exact" && e.params == r.params)
                .unwrap();
            assert!((r.bound - exact.bound).abs() < 1e-15);
        }
    }
}

#[test]
fn propagation_zero_a_never_fires() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::PropagationCheck, 6, 0.1);
    cfg.tree = TreeSource::Random(6);
    cfg.trials = 300;
    cfg.alphas = vec![0.0, 0.05];
    let rows = run_propagation_check(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    for r in rows.iter().filter(|r| r.params.starts_with("a=0;")) {
        assert_eq!(r.estimate, 0.0);
        assert!(r.pass);
    }
}

#[test]
fn oracle_coeffs_of_a_parity() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::OracleCoeffs, 4, 0.1);
    cfg.tree = TreeSource::Parity(4);
    cfg.mu = BaseMeans::Zero;
    let mut buf = Vec::new();
    run_oracle_coeffs(&cfg, &mut buf).unwrap();
    let poly = read_coeffs(buf.as_slice(), 4, Basis::Character { mu: vec![0.0; 4] }).unwrap();
    assert_eq!(poly.len(), 1);
    assert!((poly.get(SubsetIndex::full(4)) - 1.0).abs() < 1e-12);
}
