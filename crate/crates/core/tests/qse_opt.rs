mod common;

use approx::assert_abs_diff_eq;
use common::*;
use proptest::prelude::*;
use quantal_core::game::Player;
use quantal_core::metrics::{eu_vs_qr, game_value};
use quantal_core::qse::*;
use quantal_core::regret::{solve_nash, solve_qne};
use quantal_core::simplex::project;
use quantal_core::zoo::*;
use quantal_core::{BehavioralStrategy, GaConfig, Game, NormalFormGame, QuantalModel, RegretConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn logit(lambda: f64) -> QuantalModel {
    QuantalModel::logit(lambda).unwrap()
}

/// Objective over a two-row leader by scanning p = P(first row).
fn scan_two_rows(g: &NormalFormGame, model: &QuantalModel, step: f64) -> Vec<(f64, f64)> {
    let n = (1.0 / step).round() as usize;
    (0..=n)
        .map(|k| {
            let p = k as f64 / n as f64;
            (p, qse_objective_nfg(g, &[p, 1.0 - p], model).unwrap())
        })
        .collect()
}

#[test]
fn objective_equals_utility_against_the_response() {
    let mut r = ChaCha8Rng::seed_from_u64(1);
    for seed in 0..20 {
        let g = random_nfg(4, 5, seed, true).unwrap();
        let x = random_mixed(4, &mut r);
        for model in [logit(0.5), QuantalModel::ordering_based()] {
            let y = quantal_core::quantal::nfg_quantal_response(&g, &x, &model).unwrap();
            let eu = g.expected_utility(&x, &y).unwrap()[0];
            assert_abs_diff_eq!(qse_objective_nfg(&g, &x, &model).unwrap(), eu, epsilon = 1e-12);
        }
    }
}

#[test]
fn single_column_objective_ignores_the_model() {
    let g = NormalFormGame::zero_sum(vec![vec![3.0], vec![-1.0], vec![2.0]]).unwrap();
    let x = [0.2, 0.3, 0.5];
    for model in [logit(0.1), logit(40.0), QuantalModel::ordering_based()] {
        assert_abs_diff_eq!(qse_objective_nfg(&g, &x, &model).unwrap(), 0.6 - 0.3 + 1.0, epsilon = 1e-14);
    }
}

#[test]
fn badqne_objective_at_nash() {
    let v = qse_objective_nfg(&badqne(), &[1.0 / 6.0, 5.0 / 6.0], &logit(1.0)).unwrap();
    assert_abs_diff_eq!(v, 1.6438, epsilon = 1e-3);
}

#[test]
fn game1_uniform_is_below_both_global_maxima() {
    let scan = scan_two_rows(&game1(), &logit(0.92), 1e-4);
    let best = scan.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let uniform = qse_objective_nfg(&game1(), &[0.5, 0.5], &logit(0.92)).unwrap();
    assert!(uniform < best - 1e-6);
    let maxima: Vec<f64> = scan.iter().filter(|s| s.1 > best - 1e-9).map(|s| s.0).collect();
    assert!(maxima.iter().any(|&p| p < 0.5) && maxima.iter().any(|&p| p > 0.5));
}

#[test]
fn game1_has_two_mirror_optima_above_qne() {
    let g = game1();
    let model = logit(0.92);
    let config = GaConfig { restarts: 16, ..GaConfig::default() };
    let r = solve_qse_ga_nfg(&g, &model, &config, None).unwrap();
    let best = r.optima.iter().map(|o| o.objective).fold(f64::NEG_INFINITY, f64::max);
    let top: Vec<f64> = r.optima.iter().filter(|o| o.objective > best - 1e-6).map(|o| o.strategy.infoset(0)[0]).collect();
    let low = top.iter().copied().fold(f64::INFINITY, f64::min);
    let high = top.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    assert!(high - low > 0.5, "optima {top:?}");
    assert_abs_diff_eq!(low, 1.0 - high, epsilon = 1e-4);
    let qne = solve_qne(&g.clone().into(), &model, &RegretConfig::new(50_000)).unwrap();
    let qne_obj = qse_objective_nfg(&g, qne.strategy.infoset(0), &model).unwrap();
    assert!(best > qne_obj);
}

#[test]
fn game2_optimum_mixes_in_the_dominated_row() {
    let g = game2();
    let model = logit(1.0);
    let r = solve_qse_ga_nfg(&g, &model, &GaConfig::default(), None).unwrap();
    let x = r.strategy.infoset(0)[0];
    assert!(x < 1.0 - 1e-3, "optimum {x}");
    let scan = scan_two_rows(&g, &model, 1e-5);
    let (p, best) = scan.iter().copied().fold((0.0, f64::NEG_INFINITY), |b, s| if s.1 > b.1 { s } else { b });
    let obj = qse_objective_nfg(&g, r.strategy.infoset(0), &model).unwrap();
    assert!(obj >= best - 1e-6 && obj <= best + 1e-6, "{obj} vs grid {best}");
    assert_abs_diff_eq!(x, p, epsilon = 1e-3);
    assert!(obj > qse_objective_nfg(&g, &[1.0, 0.0], &model).unwrap());
}

#[test]
fn one_row_game_is_trivial() {
    let g = NormalFormGame::zero_sum(vec![vec![1.0, -2.0, 4.0]]).unwrap();
    let model = logit(1.0);
    let r = solve_qse_ga_nfg(&g, &model, &GaConfig::default(), None).unwrap();
    assert_eq!(r.strategy.infoset(0), &[1.0]);
    let y = naive_weights(&[-1.0, 2.0, -4.0]);
    let expected = y[0] * 1.0 - y[1] * 2.0 + y[2] * 4.0;
    assert_abs_diff_eq!(qse_objective_nfg(&g, &[1.0], &model).unwrap(), expected, epsilon = 1e-12);
}

fn naive_weights(values: &[f64]) -> Vec<f64> {
    let e: Vec<f64> = values.iter().map(|v| v.exp()).collect();
    let t: f64 = e.iter().sum();
    e.iter().map(|x| x / t).collect()
}

#[test]
fn tree_ascent_on_a_matrix_game_matches_matrix_ascent() {
    for g in [badqne(), game2()] {
        let model = logit(1.0);
        let nfg = solve_qse_ga_nfg(&g, &model, &GaConfig::default(), None).unwrap();
        let efg = solve_qse_ga_efg(&g.to_extensive(), &model, &GaConfig::default(), None).unwrap();
        let a = qse_objective_nfg(&g, nfg.strategy.infoset(0), &model).unwrap();
        let b = qse_objective_nfg(&g, efg.strategy.infoset(0), &model).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-6);
    }
}

#[test]
fn ga_is_at_least_as_good_as_qne() {
    let mut games = vec![badqne(), game1(), game2()];
    games.extend((0..5).map(|s| random_nfg(5, 5, s, true).unwrap()));
    for g in games {
        let model = logit(1.0);
        let ga = solve_qse_ga_nfg(&g, &model, &GaConfig::default(), None).unwrap();
        let qne = solve_qne(&g.clone().into(), &model, &RegretConfig::new(50_000)).unwrap();
        let a = qse_objective_nfg(&g, ga.strategy.infoset(0), &model).unwrap();
        let b = qse_objective_nfg(&g, qne.strategy.infoset(0), &model).unwrap();
        assert!(a >= b - 1e-9, "ga {a} qne {b}");
    }
}

#[test]
fn accepted_steps_never_decrease_the_objective() {
    let g = random_nfg(6, 6, 4, true).unwrap();
    let config = GaConfig { record_trace: true, ..GaConfig::default() };
    let r = solve_qse_ga_nfg(&g, &logit(1.0), &config, None).unwrap();
    assert!(!r.ga_trace.is_empty());
    for w in r.ga_trace.windows(2) {
        if w[0].restart_id == w[1].restart_id {
            assert!(w[1].objective >= w[0].objective - 1e-12);
        }
    }
}

#[test]
fn ga_is_deterministic() {
    let g = random_nfg(5, 5, 7, true).unwrap();
    let a = solve_qse_ga_nfg(&g, &logit(1.0), &GaConfig::default(), None).unwrap();
    let b = solve_qse_ga_nfg(&g, &logit(1.0), &GaConfig::default(), None).unwrap();
    assert_eq!(a.strategy, b.strategy);
}

/// Leader utility in the reduction game, in closed form from the matrix
/// subgame objective and the partition infoset's logit response.
fn reduction_objective(items: &[f64], s: &[f64]) -> f64 {
    let n = items.len() as f64;
    let matrix: f64 = s.iter().map(|&p| commitment_value(p)).sum();
    let a1: f64 = items.iter().zip(s).map(|(x, p)| x * p).sum();
    let a2: f64 = items.iter().zip(s).map(|(x, p)| x * (1.0 - p)).sum();
    let q = naive_weights(&[-a1, -a2]);
    (matrix + q[0] * a1 + q[1] * a2) / (2.0 * n)
}

/// Leader utility in [[0,10,0],[0,0,10]] against a rationality-1 logit
/// follower when the leader plays the first row with probability `p`.
fn commitment_value(p: f64) -> f64 {
    let leader = [0.0, 10.0 * p, 10.0 * (1.0 - p)];
    let y = naive_weights(&leader.map(|v| -v));
    leader.iter().zip(&y).map(|(a, b)| a * b).sum()
}

fn best_commitment() -> f64 {
    let mut best: f64 = 0.0;
    for k in 0..=100_000 {
        best = best.max(commitment_value(k as f64 * 1e-5));
    }
    best
}

/// Best closed-form objective over a grid on [0,1]^n followed by
/// coordinate refinement around the best cell.
fn reduction_optimum(items: &[f64]) -> f64 {
    let n = items.len();
    let steps = match n {
        1 => 10_000,
        2 => 400,
        _ => 60,
    };
    let mut best = (f64::NEG_INFINITY, vec![0.0; n]);
    let mut idx = vec![0usize; n];
    loop {
        let s: Vec<f64> = idx.iter().map(|&k| k as f64 / steps as f64).collect();
        let v = reduction_objective(items, &s);
        if v > best.0 {
            best = (v, s);
        }
        let mut d = 0;
        while d < n && idx[d] == steps {
            idx[d] = 0;
            d += 1;
        }
        if d == n {
            break;
        }
        idx[d] += 1;
    }
    let mut h = 1.0 / steps as f64;
    while h > 1e-9 {
        let mut improved = false;
        for d in 0..n {
            for dir in [-1.0, 1.0] {
                let mut s = best.1.clone();
                s[d] = (s[d] + dir * h).clamp(0.0, 1.0);
                let v = reduction_objective(items, &s);
                if v > best.0 {
                    best = (v, s);
                    improved = true;
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    best.0
}

fn reduction_ga(items: &[f64]) -> f64 {
    let g = partition_reduction_game(items, ReductionVariant::ZeroSum).unwrap();
    let model = logit(reduction_rationality(items.len()));
    let config = GaConfig { restarts: 16, ..GaConfig::default() };
    let r = solve_qse_ga_efg(&g, &model, &config, None).unwrap();
    let game: Game = g.into();
    eu_vs_qr(&game, &r.strategy, &model).unwrap()
}

#[test]
fn closed_form_matches_the_reduction_tree() {
    let items = [1.0, 2.0, 3.0];
    let g = partition_reduction_game(&items, ReductionVariant::ZeroSum).unwrap();
    let model = logit(reduction_rationality(3));
    let s = [0.3, 0.9, 0.45];
    let mut probs = vec![vec![0.0; 2]; 3];
    for (k, info) in g.infosets(Player::Leader).iter().enumerate() {
        let i: usize = info.name[1..].parse().unwrap();
        probs[k] = vec![s[i], 1.0 - s[i]];
    }
    let game: Game = g.into();
    let eu = eu_vs_qr(&game, &BehavioralStrategy::new(probs), &model).unwrap();
    assert_abs_diff_eq!(eu, reduction_objective(&items, &s), epsilon = 1e-12);
}

#[test]
fn solvable_partition_reaches_the_target() {
    let m = best_commitment();
    let items = [1.0, 1.0];
    let target = m / 2.0 + items.iter().sum::<f64>() / (4.0 * items.len() as f64);
    let ga = reduction_ga(&items);
    assert!((ga - target).abs() < 1e-3, "ga {ga} target {target}");
}

#[test]
fn unsolvable_partition_falls_short() {
    let m = best_commitment();
    let items = [1.0, 2.0];
    let target = m / 2.0 + 3.0 / 8.0;
    let optimum = reduction_optimum(&items);
    let delta = target - optimum;
    assert!(delta > 1e-3, "delta {delta}");
    let ga = reduction_ga(&items);
    assert!(ga <= optimum + 1e-6 && ga < target - delta + 1e-6, "ga {ga} optimum {optimum}");
}

#[test]
fn best_ne_keeps_a_unique_equilibrium() {
    let g = badqne();
    let game: Game = g.clone().into();
    let v = game_value(&game, &RegretConfig::new(100_000).with_tolerance(1e-6)).unwrap();
    let ne = solve_nash(&game, &RegretConfig::new(100_000)).unwrap();
    let r = best_ne_search(&g, &logit(1.0), &GaConfig::default(), &v, &ne.strategy).unwrap();
    assert_abs_diff_eq!(r.strategy.infoset(0)[0], 1.0 / 6.0, epsilon = 5e-3);
}

#[test]
fn best_ne_finds_the_better_end_of_an_equilibrium_face() {
    let g = NormalFormGame::zero_sum(vec![vec![1.0, -1.0, 2.0], vec![-1.0, 1.0, 2.0], vec![0.0, 0.0, 1.0]]).unwrap();
    let game: Game = g.clone().into();
    let model = logit(1.0);
    let v = game_value(&game, &RegretConfig::new(100_000).with_tolerance(1e-7)).unwrap();
    assert_abs_diff_eq!(v.value, 0.0, epsilon = 1e-4);
    let ne = solve_nash(&game, &RegretConfig::new(100_000)).unwrap();
    let r = best_ne_search(&g, &model, &GaConfig::default(), &v, &ne.strategy).unwrap();
    let gain = |x: &[f64]| qse_objective_nfg(&g, x, &model).unwrap() - v.value;
    let found = gain(r.strategy.infoset(0));
    for vertex in [[0.0, 0.0, 1.0], [0.5, 0.5, 0.0]] {
        assert!(found >= gain(&vertex) - 1e-6, "found {found} vertex {vertex:?}");
    }
    let worst = g.leader_col_values(r.strategy.infoset(0)).into_iter().fold(f64::INFINITY, f64::min);
    assert!(worst >= v.value - v.gap - 1e-12);
}

#[test]
fn best_ne_in_matching_pennies_stays_uniform() {
    let g = matching_pennies();
    let game: Game = g.clone().into();
    let v = game_value(&game, &RegretConfig::new(100_000).with_tolerance(1e-8)).unwrap();
    let ne = solve_nash(&game, &RegretConfig::new(100_000)).unwrap();
    let r = best_ne_search(&g, &logit(1.0), &GaConfig::default(), &v, &ne.strategy).unwrap();
    assert_abs_diff_eq!(r.strategy.infoset(0)[0], 0.5, epsilon = 1e-3);
    let gain = qse_objective_nfg(&g, r.strategy.infoset(0), &logit(1.0)).unwrap() - v.value;
    assert_abs_diff_eq!(gain, 0.0, epsilon = 1e-3);
}

#[test]
fn best_ne_rejects_general_sum_games() {
    let g = coordination();
    let v = quantal_core::GameValue { value: 0.0, lower: 0.0, upper: 0.0, gap: 0.0, iterations: 0 };
    let s = BehavioralStrategy::mixed(vec![0.5, 0.5]);
    assert!(best_ne_search(&g, &logit(1.0), &GaConfig::default(), &v, &s).is_err());
}

#[test]
fn ga_config_validation() {
    assert!(GaConfig { restarts: 0, ..GaConfig::default() }.validate().is_err());
    assert!(GaConfig { armijo_backtrack_factor: 1.0, ..GaConfig::default() }.validate().is_err());
    assert!(GaConfig { finite_diff_h: 0.0, ..GaConfig::default() }.validate().is_err());
    let parsed: GaConfig = serde_json::from_str(r#"{"restarts": 3}"#).unwrap();
    assert_eq!(parsed, GaConfig { restarts: 3, ..GaConfig::default() });
}

/// Sort-based Euclidean projection onto the probability simplex.
fn sort_projection(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        cumulative += x;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

proptest! {
    #[test]
    fn analytic_gradient_matches_differences(seed in 0u64..10_000, lambda in 0.1f64..3.0) {
        let g = random_nfg(4, 5, seed, true).unwrap();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let x = random_mixed(4, &mut r);
        let model = logit(lambda);
        let grad = qse_gradient_nfg(&g, &x, &model, 1e-6);
        let h = 1e-6;
        for k in 0..4 {
            let (mut up, mut down) = (x.clone(), x.clone());
            up[k] += h;
            down[k] -= h;
            let f = |v: &[f64]| {
                let p = model.respond(&g.follower_col_values(v));
                g.leader_col_values(v).iter().zip(&p).map(|(a, b)| a * b).sum::<f64>()
            };
            let fd = (f(&up) - f(&down)) / (2.0 * h);
            prop_assert!((grad[k] - fd).abs() <= 1e-5 * fd.abs().max(1.0), "{} vs {}", grad[k], fd);
        }
    }

    #[test]
    fn projection_is_the_nearest_simplex_point(v in prop::collection::vec(-5.0f64..5.0, 1..12), seed in 0u64..1000) {
        let p = project(&v);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let oracle = sort_projection(&v);
        for (a, b) in p.iter().zip(&oracle) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let dist = |q: &[f64]| q.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..20 {
            prop_assert!(dist(&p) <= dist(&random_mixed(v.len(), &mut r)) + 1e-12);
        }
    }
}
