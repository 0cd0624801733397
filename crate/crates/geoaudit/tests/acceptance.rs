//! Acceptance suite: one test per release criterion. Each test prints a
//! single `ACCEPTANCE nn <name>: PASS/FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`) and asserts the criterion.

use geoaudit::auditor::run_audit;
use geoaudit::baselines::{compare_importance, train_l1_probe, JttConfig, run_jtt};
use geoaudit::capacity::{detect_transition, sweep_capacity, Aggregation};
use geoaudit::config::ExperimentConfig;
use geoaudit::dataprep::{drop_features, gen_xor_shortcut, split, DatasetMatrix};
use geoaudit::nncore::{
    accuracy, check_gradients, random_dataset, train_mlp, GradCheckKind, TrainConfig,
};
use geoaudit::pipeline::{prepare_data, run_pipeline, PreparedData, Stage};
use geoaudit::stresstest::{stress_suite, StressScenarios, SCENARIO_INJECT, SCENARIO_OVERRIDE};
use std::time::Instant;

fn verdict(num: u32, name: &str, ok: bool, details: &str) {
    println!(
        "ACCEPTANCE {num:02} {name}: {} ({details})",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {num} ({name}) failed: {details}");
}

fn census_config(seed: u64) -> ExperimentConfig {
    ExperimentConfig::from_toml(&format!(
        "seed = {seed}\n[data]\nkind = \"census-sim\"\n"
    ))
    .expect("valid census config")
}

fn census_data(seed: u64) -> PreparedData {
    prepare_data(&census_config(seed)).expect("census data prepares")
}

/// Audit the census training split and return (pruned train, pruned test,
/// flagged names) alongside the prepared splits.
fn census_audited(seed: u64) -> (PreparedData, Vec<String>, DatasetMatrix, DatasetMatrix) {
    let data = census_data(seed);
    let audit = run_audit(&data.train, &TrainConfig::probe(seed)).unwrap();
    let pruned_train = drop_features(&data.train, &audit.flagged).unwrap();
    let pruned_test = drop_features(&data.test, &audit.flagged).unwrap();
    (data, audit.flagged, pruned_train, pruned_test)
}

#[test]
fn criterion_01_gradient_correctness() {
    let start = Instant::now();
    let data = random_dataset(16, 6, 42);
    let mut worst = check_gradients(GradCheckKind::Linear, &data, 1e-5).unwrap();
    for width in [1, 8, 32] {
        let rel = check_gradients(GradCheckKind::Mlp { hidden_width: width }, &data, 1e-5).unwrap();
        worst = worst.max(rel);
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "gradient-correctness",
        worst < 1e-4 && secs < 5.0,
        &format!("max relative error {worst:.2e}, {secs:.2}s"),
    );
}

#[test]
fn criterion_02_synthetic_shortcut_detection() {
    let start = Instant::now();
    let mut exact = 0;
    for seed in 0..100u64 {
        let data = gen_xor_shortcut(2000, 1.0, 0.0, seed).unwrap();
        let audit = run_audit(&data, &TrainConfig::probe(seed)).unwrap();
        if audit.flagged == ["shortcut"] {
            exact += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        2,
        "synthetic-shortcut-detection",
        exact >= 95 && secs < 120.0,
        &format!("exact flag set in {exact}/100 seeds, {secs:.1}s"),
    );
}

#[test]
fn criterion_03_synthetic_phase_transition() {
    let data = gen_xor_shortcut(2000, 1.0, 0.0, 7).unwrap();
    let pruned = drop_features(&data, &["shortcut".into()]).unwrap();
    let pair = split(&pruned, 0.8, 7).unwrap();
    let best_at = |width: usize| {
        (0..5u64)
            .map(|seed| {
                let (m, _) = train_mlp(&pair.train, width, &TrainConfig::mlp(seed)).unwrap();
                accuracy(&m, &pair.test).unwrap()
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let narrow = best_at(1);
    let wide = best_at(4);
    verdict(
        3,
        "synthetic-phase-transition",
        narrow <= 0.80 && wide >= 0.95,
        &format!("best-of-5 test accuracy: N=1 {narrow:.3}, N=4 {wide:.3}"),
    );
}

#[test]
fn criterion_04_census_audit_flags_leak() {
    let mut hits = 0;
    for seed in 0..10u64 {
        let data = census_data(seed);
        let audit = run_audit(&data.train, &TrainConfig::probe(seed)).unwrap();
        if audit.flagged.iter().any(|f| f == "capital-gain") {
            hits += 1;
        }
    }
    verdict(
        4,
        "census-audit-flags-leak",
        hits >= 9,
        &format!("capital-gain flagged in {hits}/10 seeds"),
    );
}

#[test]
fn criterion_05_census_capacity_plateau() {
    let start = Instant::now();
    let widths = [1usize, 2, 4, 8, 16, 32];
    let mut pruned_n32 = Vec::new();
    let mut pruned_critical = Vec::new();
    let mut baseline_critical = Vec::new();
    for seed in 0..3u64 {
        let (data, _, pruned_train, pruned_test) = census_audited(seed);
        let cfg = TrainConfig::mlp(seed);
        let baseline = sweep_capacity(
            &data.train,
            &data.test,
            &widths,
            &cfg,
            3,
            Aggregation::Mean,
            "baseline",
        )
        .unwrap();
        let pruned = sweep_capacity(
            &pruned_train,
            &pruned_test,
            &widths,
            &cfg,
            3,
            Aggregation::Mean,
            "pruned",
        )
        .unwrap();
        baseline_critical.push(detect_transition(&baseline, 0.01).unwrap().critical_width as f64);
        pruned_critical.push(detect_transition(&pruned, 0.01).unwrap().critical_width as f64);
        pruned_n32.push(pruned.points.last().unwrap().test_accuracy);
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let acc = mean(&pruned_n32);
    let pruned_w = mean(&pruned_critical);
    let baseline_w = mean(&baseline_critical);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        5,
        "census-capacity-plateau",
        (0.80..=0.85).contains(&acc) && pruned_w >= 8.0 && baseline_w <= 2.0 && secs < 600.0,
        &format!(
            "pruned N=32 mean {acc:.3}, critical widths pruned {pruned_w:.1} / unpruned {baseline_w:.1}, {secs:.0}s"
        ),
    );
}

fn stress_reports(seed: u64) -> Vec<geoaudit::stresstest::CounterfactualReport> {
    let (data, _, pruned_train, pruned_test) = census_audited(seed);
    let cfg = TrainConfig::mlp(seed);
    let (baseline, _) = train_mlp(&data.train, 32, &cfg).unwrap();
    let (robust, _) = train_mlp(&pruned_train, 32, &cfg).unwrap();
    stress_suite(
        (&baseline, &data.test),
        (&robust, &pruned_test),
        &StressScenarios {
            inject_feature: "capital-gain".into(),
            inject_value: 99999.0,
            override_group: "relationship".into(),
            override_category: "Husband".into(),
            threshold: 0.5,
        },
    )
    .unwrap()
}

#[test]
fn criterion_06_leakage_stress() {
    let reports = stress_reports(0);
    let pick = |model: &str| {
        reports
            .iter()
            .find(|r| r.scenario == SCENARIO_INJECT && r.model_label == model)
            .unwrap()
    };
    let baseline = pick("baseline");
    let robust = pick("robust");
    verdict(
        6,
        "leakage-stress",
        baseline.flip_rate_pct >= 90.0
            && robust.flip_rate_pct == 0.0
            && robust.structurally_immune,
        &format!(
            "injection flips: baseline {:.1}%, robust {:.1}% (immune: {})",
            baseline.flip_rate_pct, robust.flip_rate_pct, robust.structurally_immune
        ),
    );
}

#[test]
fn criterion_07_demographic_stress() {
    let mut baseline_rates = Vec::new();
    let mut robust_rates = Vec::new();
    for seed in 0..3u64 {
        let reports = stress_reports(seed);
        for r in &reports {
            if r.scenario != SCENARIO_OVERRIDE {
                continue;
            }
            match r.model_label.as_str() {
                "baseline" => baseline_rates.push(r.flip_rate_pct),
                "robust" => robust_rates.push(r.flip_rate_pct),
                _ => {}
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let baseline = mean(&baseline_rates);
    let robust = mean(&robust_rates);
    verdict(
        7,
        "demographic-stress",
        baseline > 0.0 && robust <= 0.7 * baseline,
        &format!("Husband-override flips: baseline mean {baseline:.2}%, robust mean {robust:.2}%"),
    );
}

#[test]
fn criterion_08_l1_baseline_shape() {
    let data = census_data(0);
    let audit = run_audit(&data.train, &TrainConfig::probe(0)).unwrap();
    let (l1, _) = train_l1_probe(&data.train, 0.05, &TrainConfig::probe(0)).unwrap();
    let (plain, _) = train_l1_probe(&data.train, 0.0, &TrainConfig::probe(0)).unwrap();
    let cmp = compare_importance(&audit, &l1).unwrap();
    let mass = |w: &[f64]| w.iter().sum::<f64>();
    let l1_mass = mass(&l1.abs_weights());
    let plain_mass = mass(&plain.abs_weights());
    verdict(
        8,
        "l1-baseline-shape",
        cmp.l1_sparsity >= 0.5 && l1_mass < plain_mass,
        &format!(
            "sparsity {:.3}, weight mass {l1_mass:.2} vs {plain_mass:.2}, surviving top {}",
            cmp.l1_sparsity, cmp.l1_top
        ),
    );
}

#[test]
fn criterion_09_jtt_cost_accounting() {
    let data = census_data(0);
    let cfg = TrainConfig::mlp(0);
    let (_, erm_trace) = train_mlp(&data.train, 32, &cfg).unwrap();
    let jtt = JttConfig {
        upweight_factor: 5,
        phase1_epochs: cfg.epochs,
        phase2_epochs: cfg.epochs,
    };
    let (_, jtt_cost) = run_jtt(&data.train, 32, &jtt, &cfg).unwrap();
    let erm_param_epochs = erm_trace.parameter_count * erm_trace.epochs;
    let probe_param_epochs = (data.train.d() + 1) * cfg.epochs;
    let probe_share = probe_param_epochs as f64 / erm_param_epochs as f64;
    verdict(
        9,
        "jtt-cost-accounting",
        jtt_cost.epochs_total == 2 * erm_trace.epochs && probe_share < 0.05,
        &format!(
            "jtt epochs {} vs erm {}, probe cost {:.1}% of erm parameter-epochs",
            jtt_cost.epochs_total,
            erm_trace.epochs,
            100.0 * probe_share
        ),
    );
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let cfg = ExperimentConfig::from_toml(&format!(
            r#"
seed = 3
out_dir = {out:?}

[data]
kind = "census-sim"
n = 1500

[sweep]
widths = [1, 4, 16]
seeds_per_point = 2
aggregation = "mean"
delta = 0.01
"#,
            out = out.display().to_string()
        ))
        .unwrap();
        run_pipeline(&cfg, &Stage::ALL).unwrap();
        let read = |f: &str| std::fs::read(out.join(f)).unwrap();
        (read("audit.json"), read("capacity.csv"))
    };
    let (audit_a, capacity_a) = run("a");
    let (audit_b, capacity_b) = run("b");
    verdict(
        10,
        "determinism",
        audit_a == audit_b && capacity_a == capacity_b,
        &format!(
            "audit.json {} bytes, capacity.csv {} bytes, byte-identical across runs",
            audit_a.len(),
            capacity_a.len()
        ),
    );
}
