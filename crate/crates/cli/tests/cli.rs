use std::path::Path;
use std::process::Command;

use quantal_cli::output::ResultRow;
use quantal_cli::{Experiment, ExperimentConfig};
use quantal_core::regret::{solve_cfr_br, solve_qne};
use quantal_core::{metrics, zoo, Game, Player, QuantalModel, RegretConfig};
use serde_json::json;

fn config(v: serde_json::Value) -> ExperimentConfig {
    serde_json::from_value(v).expect("valid config")
}

fn experiment(v: serde_json::Value, out: &Path) -> Experiment {
    Experiment::new(config(v), Some(out.to_path_buf()), Some(2), None, false)
}

fn find<'a>(rows: &'a [ResultRow], alg: &str) -> Vec<&'a ResultRow> {
    rows.iter().filter(|r| r.algorithm == alg).collect()
}

#[test]
fn empty_algorithm_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let e = experiment(json!({"games": [{"family": "classic", "name": "badqne"}], "algorithms": []}), dir.path());
    let err = e.solve().unwrap_err();
    assert!(format!("{err:#}").contains("no algorithms"));

    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"games": [{"family": "leduc"}], "algorithms": []}"#).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_quantal"))
        .args(["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!status.status.success());
}

#[test]
fn config_rejects_duplicate_seeds_and_unknown_fields() {
    let dup = config(json!({
        "games": [{"family": "random_nfg", "rows": 2, "cols": 2, "seeds": [1, 1]}],
        "algorithms": [{"name": "nash"}]
    }));
    assert!(dup.validate(true).is_err());
    let bad: Result<ExperimentConfig, _> =
        serde_json::from_value(json!({"games": [{"family": "leduc", "size": 3}], "algorithms": []}));
    assert!(bad.is_err());
    let aliases = config(json!({
        "games": [{"family": "leduc"}],
        "algorithms": [{"name": "cfr"}, {"name": "cfr_qr"}, {"name": "rm_qr", "iterations": 5}]
    }));
    // cfr_qr and rm_qr are the same algorithm.
    assert!(aliases.validate(true).is_err());
}

#[test]
fn badqne_rows_reproduce_reference_utilities() {
    let dir = tempfile::tempdir().unwrap();
    let e = experiment(
        json!({
            "games": [{"family": "classic", "name": "badqne"}],
            "algorithms": [{"name": "nash", "iterations": 100000}, {"name": "qne", "iterations": 100000}],
            "value": {"iterations": 100000}
        }),
        dir.path(),
    );
    let rows = e.solve().unwrap();
    assert_eq!(rows.len(), 2);
    let nash = find(&rows, "nash")[0];
    let qne = find(&rows, "qne")[0];
    assert!((nash.eu_vs_qr - 1.6438).abs() < 1e-3, "{}", nash.eu_vs_qr);
    assert!((qne.eu_vs_qr - 1.6366).abs() < 1e-3, "{}", qne.eu_vs_qr);
    assert!(nash.gain.unwrap() > qne.gain.unwrap());
    let text = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "game_id,family,seed,algorithm,lambda,iterations,gain,exploitability,eu_vs_qr,eu_vs_br,tuned_param,wall_ms"
    );
    assert!(dir.path().join("strategies/badqne__nash.json").exists());
    assert!(dir.path().join("values.csv").exists());
}

#[test]
fn stored_strategies_reproduce_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let games = json!([
        {"family": "random_nfg", "rows": 5, "cols": 4, "seeds": [3, 4]},
        {"family": "random_efg", "set": 2, "seeds": [7]}
    ]);
    let first = experiment(
        json!({
            "games": games,
            "algorithms": [{"name": "nash", "iterations": 500}, {"name": "rqr", "iterations": 300},
                           {"name": "comb", "iterations": 300}],
            "value": {"iterations": 3000},
            "trace_every": 100
        }),
        dir.path(),
    )
    .solve()
    .unwrap();
    let again_dir = tempfile::tempdir().unwrap();
    let reloaded = experiment(
        json!({
            "games": games,
            "algorithms": [{"name": "load", "dir": dir.path(), "source": "nash"},
                           {"name": "load", "dir": dir.path(), "source": "rqr"},
                           {"name": "load", "dir": dir.path(), "source": "comb"}],
            "value": {"iterations": 3000}
        }),
        again_dir.path(),
    )
    .solve()
    .unwrap();
    assert_eq!(first.len(), reloaded.len());
    for (a, b) in first.iter().zip(&reloaded) {
        assert_eq!(format!("load_{}", a.algorithm), b.algorithm);
        assert_eq!(a.tuned_param, b.tuned_param);
        for (x, y) in [(a.gain, b.gain), (a.exploitability, b.exploitability)] {
            assert!((x.unwrap() - y.unwrap()).abs() <= 1e-9);
        }
        assert!((a.eu_vs_qr - b.eu_vs_qr).abs() <= 1e-9);
    }
    let trace = std::fs::read_to_string(dir.path().join("traces/random_efg_set2_7__rqr.csv")).unwrap();
    assert_eq!(trace.lines().next().unwrap(), "iter,p_or_alpha,gain_current,epsilon_br,wall_ms");
}

#[test]
fn general_sum_rows_leave_gain_empty() {
    let dir = tempfile::tempdir().unwrap();
    let rows = experiment(
        json!({
            "games": [{"family": "gamut", "game": "grab_the_dollar", "actions": 3, "seeds": [1]}],
            "algorithms": [{"name": "qne", "iterations": 500}, {"name": "ga", "restarts": 2}]
        }),
        dir.path(),
    )
    .solve()
    .unwrap();
    assert!(rows.iter().all(|r| r.gain.is_none() && r.exploitability.is_none()));
    assert!(!dir.path().join("values.csv").exists() || {
        let t = std::fs::read_to_string(dir.path().join("values.csv")).unwrap();
        t.lines().count() == 1
    });
}

#[test]
fn sweep_has_one_row_per_lambda_and_uniform_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let rows = experiment(
        json!({
            "games": [{"family": "classic", "name": "matching_pennies"}, {"family": "random_nfg", "rows": 4, "cols": 6, "seeds": [2]}],
            "algorithms": [{"name": "nash", "iterations": 20000}, {"name": "qne", "iterations": 2000}],
            "lambdas": [0, 1, 10],
            "value": {"iterations": 20000}
        }),
        dir.path(),
    )
    .sweep_lambda()
    .unwrap();
    assert_eq!(rows.len(), 2 * 2 * 3);
    let game: Game = zoo::random_nfg(4, 6, 2, true).unwrap().into();
    let value = metrics::game_value(&game, &RegretConfig::new(20000)).unwrap();
    let nash = quantal_core::regret::solve_nash(&game, &RegretConfig::new(20000)).unwrap().strategy;
    let uniform = game.expected_utility(&nash, &game.uniform_strategy(Player::Follower)).unwrap()[0];
    let zero = rows.iter().find(|r| r.game_id == "random_nfg_4x6_zs_2" && r.algorithm == "nash" && r.lambda == Some(0.0));
    assert!((zero.unwrap().eu_vs_qr - uniform).abs() < 1e-12);
    for r in rows.iter().filter(|r| r.game_id == "matching_pennies" && r.algorithm == "nash") {
        assert!(r.gain.unwrap().abs() <= value.gap.max(1e-3));
    }
}

#[test]
fn p_profile_endpoints_match_direct_runs() {
    let dir = tempfile::tempdir().unwrap();
    let rows = experiment(
        json!({
            "games": [{"family": "one_card_poker", "deck_size": 3}],
            "p_grid": [0, 0.5, 1],
            "profile_iterations": 400,
            "model": {"kind": "logit", "lambda": 2},
            "value": {"iterations": 20000}
        }),
        dir.path(),
    )
    .p_profile()
    .unwrap();
    assert_eq!(rows.len(), 6);
    let game: Game = zoo::one_card_poker(3).unwrap().into();
    let model = QuantalModel::logit(2.0).unwrap();
    let cfg = RegretConfig::new(400);
    let br = solve_cfr_br(&game, &cfg).unwrap().strategy;
    let qne = solve_qne(&game, &model, &cfg).unwrap().strategy;
    let rqr = find(&rows, "rqr");
    let eu = |s| metrics::eu_vs_qr(&game, s, &model).unwrap();
    assert!((rqr[0].eu_vs_qr - eu(&br)).abs() < 1e-6);
    assert!((rqr[2].eu_vs_qr - eu(&qne)).abs() < 1e-6);
    let comb = find(&rows, "comb");
    assert!((comb[2].eu_vs_qr - eu(&qne)).abs() < 1e-12);
    assert_eq!(comb.iter().map(|r| r.tuned_param.unwrap()).collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
}

#[test]
fn leduc_profile_has_one_row_per_point_and_method() {
    let dir = tempfile::tempdir().unwrap();
    let rows = experiment(
        json!({
            "games": [{"family": "leduc"}],
            "profile_iterations": 50,
            "model": {"kind": "logit", "lambda": 2},
            "value": {"iterations": 500}
        }),
        dir.path(),
    )
    .p_profile()
    .unwrap();
    assert_eq!(rows.len(), 22);
    let text = std::fs::read_to_string(dir.path().join("p_profile.csv")).unwrap();
    assert_eq!(text.lines().count(), 23);
}

#[test]
fn one_card_poker_profile_shape() {
    let dir = tempfile::tempdir().unwrap();
    let rows = experiment(
        json!({
            "games": [{"family": "one_card_poker", "deck_size": 13}],
            "profile_iterations": 1000,
            "model": {"kind": "logit", "lambda": 2}
        }),
        dir.path(),
    )
    .p_profile()
    .unwrap();
    let rqr = find(&rows, "rqr");
    let gain: Vec<f64> = rqr.iter().map(|r| r.gain.unwrap()).collect();
    let expl: Vec<f64> = rqr.iter().map(|r| r.exploitability.unwrap()).collect();
    for w in gain.windows(2) {
        assert!(w[1] >= w[0] - 1e-3, "{gain:?}");
    }
    for w in expl.windows(2) {
        assert!(w[1] >= w[0] - 1e-3, "{expl:?}");
    }
    // Saturation: the second half of the grid adds less than the first.
    assert!(gain[10] - gain[5] < gain[5] - gain[0]);
    assert!(expl[10] > expl[0]);
}

#[test]
fn generate_is_idempotent_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({"games": [{"family": "random_nfg", "rows": 3, "cols": 3, "seeds": [1, 2, 3]}]});
    let paths = experiment(cfg.clone(), dir.path()).generate().unwrap();
    assert_eq!(paths.len(), 3);
    assert!(paths[0].ends_with("games/random_nfg_3x3_zs_1.json"));
    let before: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
    experiment(cfg, dir.path()).generate().unwrap();
    let after: Vec<Vec<u8>> = paths.iter().map(|p| std::fs::read(p).unwrap()).collect();
    assert_eq!(before, after);
}

#[test]
fn set_two_batch_passes_validation() {
    let dir = tempfile::tempdir().unwrap();
    let seeds: Vec<u64> = (0..100).collect();
    experiment(json!({"games": [{"family": "random_efg", "set": 2, "seeds": seeds}]}), dir.path())
        .generate()
        .unwrap();
    let games = dir.path().join("games");
    let checks = quantal_cli::run::validate_dir(&games).unwrap();
    assert_eq!(checks.len(), 100);
    assert!(checks.iter().all(|c| c.error.is_none()));

    let out = Command::new(env!("CARGO_BIN_EXE_quantal"))
        .args(["validate", "--dir", games.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(out.status.success());
    std::fs::write(games.join("broken.json"), "{\"leader_payoffs\": 3}").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_quantal"))
        .args(["validate", "--dir", games.to_str().unwrap()])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

#[test]
fn games_from_files_solve_like_generated_ones() {
    let dir = tempfile::tempdir().unwrap();
    let paths = experiment(json!({"games": [{"family": "goofspiel", "k": 3}]}), dir.path()).generate().unwrap();
    let algs = json!([{"name": "nash", "iterations": 200}]);
    let a = experiment(json!({"games": [{"family": "goofspiel", "k": 3}], "algorithms": algs, "value": {"iterations": 500}}), &dir.path().join("a"))
        .solve()
        .unwrap();
    let b = experiment(json!({"games": [{"family": "file", "path": paths[0]}], "algorithms": algs, "value": {"iterations": 500}}), &dir.path().join("b"))
        .solve()
        .unwrap();
    assert_eq!(a[0].game_id, b[0].game_id);
    assert_eq!(a[0].gain, b[0].gain);
}

#[test]
fn lambda_multiplier_trains_against_a_sharper_follower() {
    let dir = tempfile::tempdir().unwrap();
    let base = json!({
        "games": [{"family": "classic", "name": "badqne"}],
        "algorithms": [{"name": "qne", "iterations": 20000}],
        "value": {"iterations": 20000}
    });
    let plain = experiment(base.clone(), &dir.path().join("a")).solve().unwrap();
    let mut doubled = base;
    doubled["lambda_multiplier"] = json!(2.0);
    let sharp = experiment(doubled, &dir.path().join("b")).solve().unwrap();
    // Evaluation stays at the configured rationality.
    assert_eq!(plain[0].lambda, sharp[0].lambda);
    assert!((plain[0].eu_vs_qr - sharp[0].eu_vs_qr).abs() > 1e-4);
}

#[test]
fn timing_flag_fills_wall_clock_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(json!({"games": [{"family": "classic", "name": "game1"}], "algorithms": [{"name": "nash", "iterations": 100}]}));
    let rows = Experiment::new(cfg.clone(), Some(dir.path().into()), Some(1), None, true).solve().unwrap();
    assert!(rows[0].wall_ms.is_some());
    let rows = Experiment::new(cfg, Some(dir.path().into()), Some(1), None, false).solve().unwrap();
    assert!(rows[0].wall_ms.is_none());
}
