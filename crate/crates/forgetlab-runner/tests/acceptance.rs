//! Acceptance suite: one test per criterion, printing a PASS/FAIL line for
//! every asserted property before the assertion fires.
//!
//! Reference endpoint values are asserted at their stated tolerances.
//! Where the measured dynamics of this implementation differ from a
//! reference endpoint, the test stays faithful to the stated number and is
//! allowed to fail; see the README's reproduction notes.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use forgetlab_core::dynamics::{
    run_bimodal, run_distance_sweep, run_unimodal, Objective, SimConfig,
};
use forgetlab_core::lab::{
    accuracy, analytic_optimal_policy, evaluate, grpo_train, make_world,
    pretrain_initial_policy, train_method, AccuracyMode, LinearSoftmaxPolicy, Method,
    PretrainConfig, TrainSpec, World, WorldConfig,
};
use forgetlab_core::mixture::{
    overlap_area, tv_distance, GaussianComponent, GaussianMixture, Grid,
};
use forgetlab_runner::config::parse_config;
use forgetlab_runner::run_experiment;

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];

fn check(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

// --- criterion 1: uni-modal simulation endpoints ---

fn unimodal_runs(objective: Objective) -> &'static (Vec<f64>, Vec<f64>) {
    static FKL: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    static RKL: std::sync::OnceLock<(Vec<f64>, Vec<f64>)> = std::sync::OnceLock::new();
    let cell = match objective {
        Objective::ForwardKl => &FKL,
        Objective::ReverseKl => &RKL,
    };
    cell.get_or_init(|| {
        let mut gains = Vec::new();
        let mut drops = Vec::new();
        for seed in SEEDS {
            let cfg = SimConfig::unimodal(objective, seed);
            let t = run_unimodal(&cfg).expect("run completes");
            gains.push(t.gain());
            drops.push(t.drop_value());
        }
        (gains, drops)
    })
}

#[test]
fn criterion_01a_unimodal_forward_kl_stops_at_gain() {
    let t0 = Instant::now();
    let (gains, _) = &unimodal_runs(Objective::ForwardKl);
    let ok = gains.iter().all(|&g| g >= 0.9);
    let line = check(
        "criterion 1a (uni-modal FKL runs stop at gain >= 0.9)",
        ok,
        format!("gains {gains:.3?}, elapsed {:?}", t0.elapsed()),
    );
    assert!(line);
}

#[test]
fn criterion_01b_unimodal_forward_kl_drop_matches_reference() {
    let (_, drops) = &unimodal_runs(Objective::ForwardKl);
    let m = mean(&drops);
    let ok = (m - 0.64).abs() <= 0.05;
    check(
        "criterion 1b (uni-modal FKL mean terminal drop 0.64 +- 0.05)",
        ok,
        format!("mean drop {m:.4} over seeds {drops:.3?}"),
    );
    assert!(ok, "mean drop {m:.4} outside 0.64 +- 0.05");
}

#[test]
fn criterion_01c_unimodal_reverse_kl_stops_at_gain() {
    let (gains, _) = &unimodal_runs(Objective::ReverseKl);
    let ok = gains.iter().all(|&g| g >= 0.9);
    check(
        "criterion 1c (uni-modal RKL runs stop at gain >= 0.9)",
        ok,
        format!("gains {gains:.3?}"),
    );
    assert!(ok);
}

#[test]
fn criterion_01d_unimodal_reverse_kl_drop_matches_reference() {
    let (_, drops) = &unimodal_runs(Objective::ReverseKl);
    let m = mean(&drops);
    let ok = (m - 0.70).abs() <= 0.05;
    check(
        "criterion 1d (uni-modal RKL mean terminal drop 0.70 +- 0.05)",
        ok,
        format!("mean drop {m:.4} over seeds {drops:.3?}"),
    );
    assert!(ok, "mean drop {m:.4} outside 0.70 +- 0.05");
}

#[test]
fn criterion_01e_unimodal_runtime_budget() {
    let t0 = Instant::now();
    let _ = unimodal_runs(Objective::ForwardKl);
    let _ = unimodal_runs(Objective::ReverseKl);
    let secs = t0.elapsed().as_secs_f64();
    let ok = secs < 30.0;
    check(
        "criterion 1e (uni-modal suite under 30 s)",
        ok,
        format!("{secs:.1} s"),
    );
    assert!(ok);
}

// --- criterion 2: bi-modal simulation endpoints ---

fn bimodal_runs(objective: Objective, lr: f64) -> (Vec<f64>, Vec<f64>) {
    use std::collections::HashMap;
    use std::sync::Mutex;
    static CACHE: Mutex<Option<HashMap<(bool, u64), (Vec<f64>, Vec<f64>)>>> = Mutex::new(None);
    let key = (objective == Objective::ForwardKl, lr.to_bits());
    let mut guard = CACHE.lock().unwrap();
    let map = guard.get_or_insert_with(HashMap::new);
    map.entry(key)
        .or_insert_with(|| {
            let mut gains = Vec::new();
            let mut drops = Vec::new();
            for seed in SEEDS {
                let cfg = SimConfig::bimodal(objective, lr, seed);
                let t = run_bimodal(&cfg).expect("run completes");
                gains.push(t.gain());
                drops.push(t.drop_value());
            }
            (gains, drops)
        })
        .clone()
}

#[test]
fn criterion_02a_bimodal_fkl_high_lr_reaches_gain_with_small_drop() {
    let t0 = Instant::now();
    let (gains, drops) = bimodal_runs(Objective::ForwardKl, 0.15);
    let m = mean(&drops);
    let ok = gains.iter().all(|&g| g >= 0.9) && (m - 0.12).abs() <= 0.05;
    check(
        "criterion 2a (bi-modal FKL lr 0.15: gain >= 0.9, drop 0.12 +- 0.05)",
        ok,
        format!(
            "gains {gains:.3?}, mean drop {m:.4}, elapsed {:?}",
            t0.elapsed()
        ),
    );
    assert!(ok, "gains {gains:?} / mean drop {m:.4}");
}

#[test]
fn criterion_02b_bimodal_fkl_low_lr_fails_to_learn() {
    let (gains, _) = bimodal_runs(Objective::ForwardKl, 0.01);
    let ok = gains.iter().all(|&g| g < 0.9);
    check(
        "criterion 2b (bi-modal FKL lr 0.01 fails to reach gain 0.9 in every seed)",
        ok,
        format!("gains {gains:.3?}"),
    );
    assert!(ok, "gains {gains:?}");
}

#[test]
fn criterion_02c_bimodal_rkl_low_lr_keeps_old_mode() {
    let (gains, drops) = bimodal_runs(Objective::ReverseKl, 0.01);
    let m = mean(&drops);
    let ok = gains.iter().all(|&g| g >= 0.9) && m <= 0.05;
    check(
        "criterion 2c (bi-modal RKL lr 0.01: gain >= 0.9, mean drop <= 0.05)",
        ok,
        format!("gains {gains:.3?}, mean drop {m:.4}"),
    );
    assert!(ok, "gains {gains:?} / mean drop {m:.4}");
}

#[test]
fn criterion_02d_bimodal_runtime_budget() {
    let t0 = Instant::now();
    let _ = bimodal_runs(Objective::ForwardKl, 0.15);
    let _ = bimodal_runs(Objective::ForwardKl, 0.01);
    let _ = bimodal_runs(Objective::ReverseKl, 0.01);
    let secs = t0.elapsed().as_secs_f64();
    let ok = secs < 60.0;
    check(
        "criterion 2d (bi-modal suite under 60 s)",
        ok,
        format!("{secs:.1} s"),
    );
    assert!(ok);
}

// --- criterion 3: distance sweep monotonicity ---

#[test]
fn criterion_03_sweep_drop_nondecreasing_in_distance() {
    let distances = [4.0, 5.0, 6.0];
    let mut per_distance = vec![Vec::new(); distances.len()];
    for seed in SEEDS {
        let base = SimConfig::bimodal(Objective::ReverseKl, 0.01, seed);
        let points = run_distance_sweep(&base, &distances).expect("sweep completes");
        for (i, pt) in points.iter().enumerate() {
            per_distance[i].push(pt.trajectory.drop_value());
        }
    }
    let means: Vec<f64> = per_distance.iter().map(|v| mean(v)).collect();
    let ok = means.windows(2).all(|w| w[0] <= w[1]);
    check(
        "criterion 3 (mean terminal RKL drop nondecreasing over distances 4, 5, 6)",
        ok,
        format!("mean drops {means:.4?}"),
    );
    assert!(ok, "mean drops {means:?}");
}

// --- criterion 4: overlap <-> TV identity ---

#[test]
fn criterion_04_overlap_and_tv_forms_agree() {
    let grid = Grid::default_sim();
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    let mut max_err = 0.0f64;
    for _ in 0..50 {
        let weight = rng.gen_range(0.1..0.9);
        let comp = GaussianComponent::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.3..1.2))
            .unwrap();
        // supports kept well inside the grid so the identity's theoretical
        // 1/2 + 1/(2w) constant holds to quadrature precision
        let policy = |rng: &mut ChaCha8Rng| {
            let c1 = GaussianComponent::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.3..1.2))
                .unwrap();
            if rng.gen::<bool>() {
                GaussianMixture::new(vec![1.0], vec![c1]).unwrap()
            } else {
                let c2 =
                    GaussianComponent::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.3..1.2))
                        .unwrap();
                GaussianMixture::two(rng.gen_range(0.05..0.95), c1, c2).unwrap()
            }
        };
        let pol_start = policy(&mut rng);
        let pol_end = policy(&mut rng);
        // drop via overlaps
        let s0 = overlap_area(weight, &comp, &pol_start, &grid).unwrap().raw;
        let s1 = overlap_area(weight, &comp, &pol_end, &grid).unwrap().raw;
        let drop_overlap = s0 - s1;
        // drop via the TV identity: (TV_T - TV_0) / weight on the same grid
        let scaled: Vec<f64> = grid.points().map(|y| weight * comp.density(y)).collect();
        let tv0 = tv_distance(&scaled, &pol_start.density_on(&grid), &grid).unwrap();
        let tv1 = tv_distance(&scaled, &pol_end.density_on(&grid), &grid).unwrap();
        let drop_tv = (tv1 - tv0) / weight;
        max_err = max_err.max((drop_overlap - drop_tv).abs());
    }
    let ok = max_err < 1e-9;
    check(
        "criterion 4 (overlap-form drop == TV-form drop on 50 random triples)",
        ok,
        format!("max |difference| {max_err:.3e}"),
    );
    assert!(ok);
}

// --- criterion 5: identity suite ---

#[test]
fn criterion_05_identity_suite_and_cli() {
    let t0 = Instant::now();
    let report = forgetlab_runner::identities::run_identity_suite(100, 0);
    let residual_ok = report.passed();
    check(
        "criterion 5a (SFT/RL identity residuals < 1e-10 on 100 random configurations)",
        residual_ok,
        format!(
            "max residuals {:.3e} / {:.3e}",
            report.max_sft_residual, report.max_rl_residual
        ),
    );
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_forgetlab"))
        .args(["check", "identities"])
        .output()
        .expect("binary runs");
    let cli_ok = out.status.code() == Some(0);
    let secs = t0.elapsed().as_secs_f64();
    check(
        "criterion 5b (forgetlab check identities exits 0, suite under 5 s)",
        cli_ok && secs < 5.0,
        format!("exit {:?}, {secs:.2} s", out.status.code()),
    );
    assert!(residual_ok && cli_ok && secs < 5.0);
}

// --- criterion 6: GRPO converges to the closed-form optimum ---

#[test]
fn criterion_06_bandit_grpo_matches_analytic_optimum() {
    let mut worst = 0.0f64;
    for seed in [1u64, 2, 3] {
        let world = make_world(WorldConfig {
            n_prompts: 1,
            n_responses: 16,
            n_non_target_tasks: 0,
            feature_dim: 32,
            seed,
        })
        .unwrap();
        let pi_0 = pretrain_initial_policy(&world, &PretrainConfig::default()).unwrap();
        let spec = TrainSpec::new(Method::Grpo, seed + 100)
            .with_lr(0.2)
            .with_steps(5000);
        let (trained, _, _) = grpo_train(&pi_0, &world, &spec).unwrap();
        let pi0_rows = vec![pi_0.probs(&world, 0)];
        let rewards = vec![(0..16).map(|y| world.reward(0, y)).collect::<Vec<f64>>()];
        let star = analytic_optimal_policy(&pi0_rows, &rewards, 0.05).unwrap();
        let p = trained.probs(&world, 0);
        let tv = 0.5
            * p.iter()
                .zip(&star[0])
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>();
        worst = worst.max(tv);
    }
    let ok = worst <= 0.05;
    check(
        "criterion 6 (tabular GRPO beta=0.05 within TV 0.05 of analytic pi* in <= 5000 steps)",
        ok,
        format!("worst TV {worst:.4}"),
    );
    assert!(ok);
}

// --- criterion 7: gradient checks against central finite differences ---

#[test]
fn criterion_07_gradients_match_finite_differences() {
    use forgetlab_core::dynamics::{grad_log_density, PolicyParams};
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let h = 1e-5;
    let mut worst_mix = 0.0f64;
    for _ in 0..20 {
        let c1 =
            GaussianComponent::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.4..2.0)).unwrap();
        let c2 =
            GaussianComponent::new(rng.gen_range(-3.0..3.0), rng.gen_range(0.4..2.0)).unwrap();
        let m = GaussianMixture::two(rng.gen_range(0.1..0.9), c1, c2).unwrap();
        let y = rng.gen_range(-4.0..4.0);
        let g = grad_log_density(&m, y);
        let base = PolicyParams::from_mixture(&m);
        let mut probe = |field: usize, idx: usize, analytic: f64| {
            let perturb = |delta: f64| {
                let mut p = base.clone();
                match field {
                    0 => p.perturb_mean(idx, delta),
                    1 => p.perturb_log_std(idx, delta),
                    _ => p.perturb_weight_logit(delta),
                }
                p.to_mixture().log_density(y).unwrap()
            };
            let fd = (perturb(h) - perturb(-h)) / (2.0 * h);
            let rel = (fd - analytic).abs() / analytic.abs().max(1e-3);
            worst_mix = worst_mix.max(rel);
        };
        for i in 0..2 {
            probe(0, i, g.means[i]);
            probe(1, i, g.log_stds[i]);
        }
        probe(2, 0, g.weight_logits[0]);
    }
    let mix_ok = worst_mix < 1e-5;
    check(
        "criterion 7a (mixture gradients vs central differences at 20 random points)",
        mix_ok,
        format!("worst relative error {worst_mix:.2e}"),
    );

    // linear-softmax W: loss = mean CE over a small batch
    let world = make_world(WorldConfig {
        n_prompts: 12,
        n_responses: 8,
        n_non_target_tasks: 3,
        feature_dim: 16,
        seed: 5,
    })
    .unwrap();
    let mut worst_w = 0.0f64;
    for trial in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(500 + trial);
        let mut pol = LinearSoftmaxPolicy::uniform(&world);
        for v in pol.weights_mut() {
            *v = rng.gen_range(-0.5..0.5);
        }
        let batch: Vec<(usize, usize)> = (0..3)
            .map(|_| {
                let x = rng.gen_range(0..world.n_prompts());
                (x, world.rewarded_response(x))
            })
            .collect();
        let loss = |p: &LinearSoftmaxPolicy| -> f64 {
            batch
                .iter()
                .map(|&(x, y)| -p.probs(&world, x)[y].ln())
                .sum::<f64>()
                / batch.len() as f64
        };
        // analytic dLoss/dW entry via the softmax CE coefficient form
        let d = world.feature_dim();
        let (i, j) = (rng.gen_range(0..d), rng.gen_range(0..d));
        let mut analytic = 0.0;
        for &(x, y_star) in &batch {
            let p = pol.probs(&world, x);
            let phi = world.prompt_features(x)[i];
            let mut coeff = 0.0;
            for y in 0..world.n_responses() {
                let indicator = if y == y_star { 1.0 } else { 0.0 };
                coeff += (p[y] - indicator) * world.response_features(y)[j];
            }
            analytic += phi * coeff / batch.len() as f64;
        }
        let mut plus = pol.clone();
        plus.weights_mut()[i * d + j] += h;
        let mut minus = pol.clone();
        minus.weights_mut()[i * d + j] -= h;
        let fd = (loss(&plus) - loss(&minus)) / (2.0 * h);
        let rel = (fd - analytic).abs() / analytic.abs().max(1e-3);
        worst_w = worst_w.max(rel);
    }
    let w_ok = worst_w < 1e-5;
    check(
        "criterion 7b (linear-softmax W gradient vs central differences at 20 random points)",
        w_ok,
        format!("worst relative error {worst_w:.2e}"),
    );
    assert!(mix_ok && w_ok);
}

// --- criteria 8 and 9: lab orderings ---

struct LabResults {
    gain: std::collections::BTreeMap<&'static str, f64>,
    drop: std::collections::BTreeMap<&'static str, f64>,
    elapsed: f64,
}

fn lab_protocol() -> &'static LabResults {
    static CELL: std::sync::OnceLock<LabResults> = std::sync::OnceLock::new();
    CELL.get_or_init(run_lab_protocol)
}

fn run_lab_protocol() -> LabResults {
    let t0 = Instant::now();
    let mut gains: std::collections::BTreeMap<&'static str, Vec<f64>> = Default::default();
    let mut drops: std::collections::BTreeMap<&'static str, Vec<f64>> = Default::default();
    for seed in SEEDS {
        let mut wc = WorldConfig::default();
        wc.seed = seed;
        let world: World = make_world(wc).unwrap();
        let pi_0 = pretrain_initial_policy(&world, &PretrainConfig::default())
            .expect("default worlds pretrain cleanly");
        // sanity on the setup contract
        let t_acc = accuracy(&pi_0, world.target_task(), &world, AccuracyMode::Exact).unwrap();
        assert!(t_acc < 0.3, "pretrained target accuracy {t_acc}");
        for t in world.non_target_tasks() {
            let a = accuracy(&pi_0, t, &world, AccuracyMode::Exact).unwrap();
            assert!(a >= 0.9, "non-target accuracy {a}");
        }
        let suite: Vec<(&'static str, TrainSpec)> = vec![
            (
                "sft_hi",
                TrainSpec::new(Method::Sft, seed + 1).with_lr(1.0).with_epochs(20),
            ),
            (
                "sft_lo",
                TrainSpec::new(Method::Sft, seed + 1).with_lr(0.1).with_epochs(20),
            ),
            (
                "self_sft",
                TrainSpec::new(Method::SelfSft, seed + 2)
                    .with_lr(1.0)
                    .with_epochs(20),
            ),
            (
                "iterative_sft",
                TrainSpec::new(Method::IterativeSft, seed + 3)
                    .with_lr(1.0)
                    .with_epochs(20),
            ),
            (
                "grpo",
                TrainSpec::new(Method::Grpo, seed + 4).with_lr(0.2).with_steps(200),
            ),
            (
                "grpo_beta0",
                TrainSpec::new(Method::Grpo, seed + 4)
                    .with_lr(0.2)
                    .with_steps(200)
                    .with_beta(0.0),
            ),
            (
                "reinforce",
                TrainSpec::new(Method::Reinforce, seed + 4)
                    .with_lr(0.2)
                    .with_steps(200),
            ),
        ];
        for (name, spec) in suite {
            let out = train_method(&pi_0, &world, &spec).unwrap();
            let r = evaluate(&pi_0, &out.policy, &world).unwrap();
            gains.entry(name).or_default().push(r.gain);
            drops.entry(name).or_default().push(r.drop);
        }
    }
    LabResults {
        gain: gains.into_iter().map(|(k, v)| (k, mean(&v))).collect(),
        drop: drops.into_iter().map(|(k, v)| (k, mean(&v))).collect(),
        elapsed: t0.elapsed().as_secs_f64(),
    }
}

#[test]
fn criterion_08a_sft_drops_more_than_self_sft() {
    let r = lab_protocol();
    let ok = r.drop["sft_hi"] > r.drop["self_sft"];
    check(
        "criterion 8a (drop SFT-high-lr > drop Self-SFT)",
        ok,
        format!("{:.4} vs {:.4}", r.drop["sft_hi"], r.drop["self_sft"]),
    );
    assert!(ok);
}

#[test]
fn criterion_08b_self_sft_drops_more_than_iterative() {
    let r = lab_protocol();
    let ok = r.drop["self_sft"] > r.drop["iterative_sft"];
    check(
        "criterion 8b (drop Self-SFT > drop Iterative-SFT)",
        ok,
        format!("{:.4} vs {:.4}", r.drop["self_sft"], r.drop["iterative_sft"]),
    );
    assert!(ok);
}

#[test]
fn criterion_08c_grpo_drop_small() {
    let r = lab_protocol();
    let ok = r.drop["grpo"] <= 0.02;
    check(
        "criterion 8c (drop GRPO <= 0.02)",
        ok,
        format!("{:.4}", r.drop["grpo"]),
    );
    assert!(ok);
}

#[test]
fn criterion_08d_grpo_gain_substantial() {
    let r = lab_protocol();
    let ok = r.gain["grpo"] >= 0.5;
    check(
        "criterion 8d (gain GRPO >= 0.5)",
        ok,
        format!("{:.3}", r.gain["grpo"]),
    );
    assert!(ok);
}

#[test]
fn criterion_08e_kl_regularization_not_load_bearing() {
    let r = lab_protocol();
    let ok = (r.drop["grpo_beta0"] - r.drop["grpo"]).abs() <= 0.05;
    check(
        "criterion 8e (drop GRPO beta=0 within 0.05 of beta=0.05)",
        ok,
        format!("{:.4} vs {:.4}", r.drop["grpo_beta0"], r.drop["grpo"]),
    );
    assert!(ok);
}

#[test]
fn criterion_08f_reinforce_gains_at_most_grpo() {
    let r = lab_protocol();
    let ok = r.gain["reinforce"] <= r.gain["grpo"];
    check(
        "criterion 8f (gain REINFORCE <= gain GRPO)",
        ok,
        format!("{:.3} vs {:.3}", r.gain["reinforce"], r.gain["grpo"]),
    );
    assert!(ok);
}

#[test]
fn criterion_08g_reinforce_drop_small() {
    let r = lab_protocol();
    let ok = r.drop["reinforce"] <= 0.02;
    check(
        "criterion 8g (drop REINFORCE <= 0.02)",
        ok,
        format!("{:.4}", r.drop["reinforce"]),
    );
    assert!(ok);
}

#[test]
fn criterion_08h_lab_runtime_budget() {
    let r = lab_protocol();
    println!(
        "lab means: {}",
        r.gain
            .keys()
            .map(|k| format!("{k}(g={:.3},d={:+.4})", r.gain[k], r.drop[k]))
            .collect::<Vec<_>>()
            .join(" ")
    );
    let ok = r.elapsed < 180.0;
    check(
        "criterion 8h (lab suite under 3 min)",
        ok,
        format!("{:.1} s", r.elapsed),
    );
    assert!(ok);
}

#[test]
fn criterion_09_low_lr_sft_trades_gain_for_retention() {
    let r = lab_protocol();
    let ok = r.drop["sft_lo"] < r.drop["sft_hi"] && r.gain["sft_lo"] < r.gain["sft_hi"];
    check(
        "criterion 9 (low-lr SFT has lower drop and lower gain at equal epochs)",
        ok,
        format!(
            "drop {:.4} vs {:.4}, gain {:.3} vs {:.3}",
            r.drop["sft_lo"], r.drop["sft_hi"], r.gain["sft_lo"], r.gain["sft_hi"]
        ),
    );
    assert!(ok);
}

// --- criterion 10: determinism of shipped configs ---

#[test]
fn criterion_10_shipped_config_runs_are_byte_identical() {
    let manifest = std::path::Path::new(env!("CARGO_MANIFEST_DIR"));
    let config_path = manifest.join("../../configs/sim_uni.json");
    let text = std::fs::read_to_string(&config_path).expect("shipped config exists");
    let dirs = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [dirs.0.path(), dirs.1.path()] {
        let cfg = parse_config(&text).unwrap();
        run_experiment(&cfg, Some(dir)).unwrap();
    }
    let mut files_a: Vec<_> = std::fs::read_dir(dirs.0.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".csv"))
        .collect();
    files_a.sort();
    let ok = !files_a.is_empty()
        && files_a.iter().all(|name| {
            let a = std::fs::read(dirs.0.path().join(name)).unwrap();
            let b = std::fs::read(dirs.1.path().join(name)).unwrap();
            a == b
        });
    check(
        "criterion 10 (shipped example config reruns byte-identically)",
        ok,
        format!("{} CSV files compared", files_a.len()),
    );
    assert!(ok);
}
