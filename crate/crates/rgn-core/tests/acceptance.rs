//! Acceptance suite: one test per shipping criterion, each printing a
//! single pass/fail line. Thresholds and tolerances are pinned here.

#![allow(clippy::needless_range_loop)]

mod common;

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgn_core::eval::{count_macs, crossval, roc_auc};
use rgn_core::gradcheck::{check_model_gradients, random_pair_batch, DEFAULT_STEP};
use rgn_core::hrgn::{latent_presets, HRgn, HRgnConfig, InitMode, LowerInputMode};
use rgn_core::numerics::{OptimizerKind, ParameterStore, PoolKind, Tape, Tensor};
use rgn_core::pipeline::{synth_generate, ExtractorMode, SynthConfig};
use rgn_core::srgn::SRgnConfig;
use rgn_core::topology::build_boundary;
use rgn_core::training::{train, TrainConfig};
use rgn_core::ModelConfig;

fn report(n: u32, name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {n} ({name}): {} {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_gradient_fidelity() {
    let started = Instant::now();
    let tolerance = 1e-5;
    let mut worst = 0.0_f64;

    for seed in 0..5u64 {
        for pool in [PoolKind::Max, PoolKind::Avg] {
            let cfg = ModelConfig::Srgn(SRgnConfig {
                dims: vec![6, 3],
                aggre_pool: pool,
                init_pool: if pool == PoolKind::Max {
                    PoolKind::Avg
                } else {
                    PoolKind::Max
                },
                ..SRgnConfig::new(8)
            });
            let batch = random_pair_batch(8, 4, 2, 100 + seed);
            let r =
                check_model_gradients(&cfg, &batch, ExtractorMode::Precomputed, seed, DEFAULT_STEP)
                    .unwrap();
            worst = worst.max(r.max_rel_err);
        }
        for mode in [
            LowerInputMode::Comprehensive,
            LowerInputMode::LiteralMessage,
        ] {
            let cfg = ModelConfig::Hrgn(HRgnConfig {
                latent_widths: vec![4, 2],
                dims: vec![6, 3],
                lower_input_mode: mode,
                init_mode: InitMode::SelfAttention,
                ..HRgnConfig::new(12)
            });
            let batch = random_pair_batch(12, 4, 2, 200 + seed);
            let r =
                check_model_gradients(&cfg, &batch, ExtractorMode::Precomputed, seed, DEFAULT_STEP)
                    .unwrap();
            worst = worst.max(r.max_rel_err);
        }
    }
    let elapsed = started.elapsed();
    let ok = worst <= tolerance && elapsed.as_secs() < 60;
    report(
        1,
        "gradient fidelity",
        ok,
        &format!("(worst rel err {worst:.3e}, {elapsed:.2?})"),
    );
}

#[test]
fn criterion_2_adjacency_oracle() {
    let started = Instant::now();
    let mut ok = true;
    let mut detail = String::new();
    'outer: for n_prev in 1..=64usize {
        for n_cur in 1..=n_prev {
            let b = build_boundary(n_prev, n_cur).unwrap();
            let a = common::adjacency_from_equations(n_prev, n_cur);

            // Exact match against the piecewise predicates.
            for i in 0..n_prev {
                for p in 0..n_cur {
                    if a[i][p] != (b.parents()[i] == p) {
                        ok = false;
                        detail = format!("mismatch at ({n_prev},{n_cur}) row {i} col {p}");
                        break 'outer;
                    }
                }
            }

            // Partition invariants.
            let c = n_prev % n_cur;
            let (hi, lo) = (n_prev.div_ceil(n_cur), n_prev / n_cur);
            let mut covered = 0usize;
            let mut larger = 0usize;
            let mut next_start = 0usize;
            for p in 0..n_cur {
                let r = b.children(p);
                if r.start != next_start || r.is_empty() {
                    ok = false;
                    detail = format!("non-contiguous children at ({n_prev},{n_cur}) parent {p}");
                    break 'outer;
                }
                next_start = r.end;
                covered += r.len();
                if r.len() == hi && hi != lo {
                    larger += 1;
                } else if r.len() != lo && r.len() != hi {
                    ok = false;
                    detail = format!("bad child count at ({n_prev},{n_cur}) parent {p}");
                    break 'outer;
                }
            }
            if covered != n_prev || (hi != lo && larger != c) {
                ok = false;
                detail = format!("cover/count failure at ({n_prev},{n_cur})");
                break 'outer;
            }
        }
    }
    let elapsed = started.elapsed();
    ok &= elapsed.as_secs() < 10;
    report(
        2,
        "adjacency oracle",
        ok,
        &format!("(all pairs <= 64, {elapsed:.2?}) {detail}"),
    );
}

#[test]
fn criterion_3_equation_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(9000);
    let mut worst = 0.0_f64;
    for _ in 0..50 {
        worst = worst.max(common::check_srgn_instance(&mut rng, false));
    }
    for _ in 0..50 {
        worst = worst.max(common::check_hrgn_instance(&mut rng, false));
    }
    let ok = worst <= 1e-12;
    report(
        3,
        "equation-oracle equivalence",
        ok,
        &format!("(50+50 instances, worst |diff| {worst:.3e})"),
    );
}

#[test]
fn criterion_4_normalization_and_invariance() {
    let mut ok = true;
    let mut rng = ChaCha8Rng::seed_from_u64(44);

    // Attention groups are positive and sum to one.
    for _ in 0..10 {
        let d = rng.random_range(4..=12);
        let w1 = rng.random_range(1..=d / 2 + 1);
        let cfg = HRgnConfig {
            latent_widths: vec![w1],
            dims: vec![3],
            ..HRgnConfig::new(d)
        };
        let model = HRgn::new(cfg).unwrap();
        let store = common::seeded_store(rng.random(), |s, r| model.add_params(s, r).unwrap());
        let gx = common::random_vec(&mut rng, d);
        let gy = common::random_vec(&mut rng, d);
        let mut tape = Tape::new();
        let ix = tape.constant(Tensor::new(gx.clone(), vec![1, d]).unwrap());
        let iy = tape.constant(Tensor::new(gy.clone(), vec![1, d]).unwrap());
        let (_, groups) = model
            .init_hier_traced(&mut tape, &store, ix, iy, None)
            .unwrap();
        ok &= !groups.is_empty();
        for g in groups {
            let w = tape.value(g.weights).data();
            ok &= w.iter().all(|&x| x > 0.0);
            ok &= (w.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
        }
    }

    // Pooling permutation invariance.
    for _ in 0..20 {
        let n = rng.random_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| common::random_vec(&mut rng, 4)).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut rng);
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| rows[i].clone()).collect();
        let max_a = common::pool_vecs(PoolKind::Max, &rows);
        let max_b = common::pool_vecs(PoolKind::Max, &permuted);
        ok &= max_a == max_b;
        let avg_a = common::pool_vecs(PoolKind::Avg, &rows);
        let avg_b = common::pool_vecs(PoolKind::Avg, &permuted);
        ok &= avg_a
            .iter()
            .zip(&avg_b)
            .all(|(x, y)| (x - y).abs() <= 1e-12);
    }

    // Softmax shift invariance and normalization.
    for _ in 0..20 {
        let v = common::random_vec(&mut rng, 6);
        let shift = rng.random_range(-10.0..10.0);
        let run = |v: &[f64]| {
            let mut tape = Tape::<f64>::new();
            let x = tape.constant(Tensor::from_slice(v).unwrap());
            let y = tape.softmax(x).unwrap();
            tape.value(y).data().to_vec()
        };
        let a = run(&v);
        ok &= (a.iter().sum::<f64>() - 1.0).abs() <= 1e-12;
        let shifted: Vec<f64> = v.iter().map(|x| x + shift).collect();
        let b = run(&shifted);
        ok &= a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12);
    }

    // Cosine symmetry and positive-scale invariance.
    for _ in 0..20 {
        let a = common::random_vec(&mut rng, 5);
        let b = common::random_vec(&mut rng, 5);
        let lambda = rng.random_range(0.01..50.0);
        ok &= common::cosine_vec(&a, &b) == common::cosine_vec(&b, &a);
        let scaled: Vec<f64> = a.iter().map(|x| lambda * x).collect();
        ok &= (common::cosine_vec(&scaled, &b) - common::cosine_vec(&a, &b)).abs() <= 1e-12;
    }

    // Single-node top layer: the general mixing formula collapses to the
    // pass-through branch (cos(c,c) = 1 up to ulps, 0 for the zero row).
    for _ in 0..20 {
        let c = common::random_vec(&mut rng, 4);
        let w = common::cosine_vec(&c, &c);
        let mixed: Vec<f64> = c.iter().map(|x| w * x).collect();
        ok &= mixed.iter().zip(&c).all(|(x, y)| (x - y).abs() <= 1e-12);
    }
    let zero = vec![0.0; 4];
    let w = common::cosine_vec(&zero, &zero);
    ok &= zero.iter().map(|x| w * x).all(|x| x == 0.0);

    report(4, "normalization and invariance suite", ok, "");
}

#[test]
fn criterion_5_synthetic_benchmark() {
    let started = Instant::now();
    let (manifest, features) = synth_generate(&SynthConfig {
        seed: 1,
        n_families: 400,
        d_raw: 32,
        shared_fraction: 0.5,
        noise_sigma: 0.1,
        tri_subject: false,
    })
    .unwrap();

    // 150 epochs over 640 training pairs per fold, final-point capture only.
    let mut tc = TrainConfig::new(TrainConfig::iterations_for_epochs(150, 640, 32), 1);
    tc.eval_every = tc.iterations;

    let srgn_cfg = ModelConfig::Srgn(SRgnConfig {
        dims: vec![16, 4],
        ..SRgnConfig::new(32)
    });
    let srgn_report = crossval::<f64>(&srgn_cfg, &manifest, &features, &tc).unwrap();

    let hrgn_cfg = ModelConfig::Hrgn(HRgnConfig {
        latent_widths: vec![8, 4],
        dims: vec![16, 4],
        ..HRgnConfig::new(32)
    });
    let hrgn_report = crossval::<f64>(&hrgn_cfg, &manifest, &features, &tc).unwrap();

    let cos_report = crossval::<f64>(
        &ModelConfig::CosBaseline { d: 32 },
        &manifest,
        &features,
        &tc,
    )
    .unwrap();

    let elapsed = started.elapsed();
    let chance_margin = 0.35;
    let ok = srgn_report.overall_mean >= 0.90
        && hrgn_report.overall_mean >= 0.90
        && cos_report.auc > 0.7
        && srgn_report.overall_mean - 0.5 >= chance_margin
        && hrgn_report.overall_mean - 0.5 >= chance_margin
        && elapsed.as_secs() <= 600;
    report(
        5,
        "synthetic benchmark",
        ok,
        &format!(
            "(srgn {:.3}, hrgn {:.3}, cos AUC {:.3}, {elapsed:.1?})",
            srgn_report.overall_mean, hrgn_report.overall_mean, cos_report.auc
        ),
    );
}

#[test]
fn criterion_6_default_config_fidelity() {
    let s = SRgnConfig::new(512);
    let h = HRgnConfig::new(512);
    let t = TrainConfig::new(1, 0);
    let ok = s.k() == 2
        && s.dims == vec![512, 4]
        && s.init_pool == PoolKind::Avg
        && s.aggre_pool == PoolKind::Max
        && h.k() == 2
        && h.dims == vec![512, 4]
        && h.aggre_pool == PoolKind::Avg
        && h.init_mode == InitMode::SelfAttention
        && latent_presets()
            == vec![
                vec![32],
                vec![128, 16],
                vec![128, 32, 8],
                vec![128, 32, 8, 2],
            ]
        && t.optimizer
            == OptimizerKind::Adam {
                beta1: 0.9,
                beta2: 0.999,
                eps: 1e-8,
            }
        && t.lr == 1e-3;
    report(6, "default-config fidelity", ok, "");
}

#[test]
fn criterion_7_mac_trend() {
    let mut totals = Vec::new();
    for widths in latent_presets() {
        let cfg = ModelConfig::Hrgn(HRgnConfig {
            latent_widths: widths,
            dims: vec![512, 4],
            ..HRgnConfig::new(512)
        });
        totals.push(count_macs(&cfg).unwrap().total);
    }
    let ok = totals.windows(2).all(|w| w[1] > w[0]);
    report(
        7,
        "MAC trend over latent presets",
        ok,
        &format!("({totals:?})"),
    );
}

#[test]
fn criterion_8_determinism_and_persistence() {
    let mut ok = true;
    let mut detail = String::new();

    // Bitwise-identical training runs persist to identical checkpoints.
    let (manifest, features) = synth_generate(&SynthConfig {
        seed: 21,
        n_families: 60,
        d_raw: 8,
        shared_fraction: 0.6,
        noise_sigma: 0.1,
        tri_subject: false,
    })
    .unwrap();
    let model_cfg = ModelConfig::Srgn(SRgnConfig {
        dims: vec![4, 2],
        ..SRgnConfig::new(8)
    });
    let mut tc = TrainConfig::new(40, 70);
    tc.eval_every = 40;
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for run in 0..2 {
        let outcome = train::<f64>(&model_cfg, &manifest, &features, 1, &tc).unwrap();
        let path = dir.path().join(format!("run{run}.rgn"));
        outcome
            .model
            .save_checkpoint(&path, &outcome.store)
            .unwrap();
        bytes.push(std::fs::read(&path).unwrap());
    }
    if bytes[0] != bytes[1] {
        ok = false;
        detail.push_str("training not bitwise reproducible; ");
    }

    // Checkpoint round-trips are bit-exact.
    let model = model_cfg.build().unwrap();
    let extractor =
        rgn_core::pipeline::FeatureExtractor::new(ExtractorMode::Precomputed, 8).unwrap();
    let store: ParameterStore<f64> = model.init_store(99, &extractor).unwrap();
    let path = dir.path().join("roundtrip.rgn");
    model.save_checkpoint(&path, &store).unwrap();
    let mut reloaded: ParameterStore<f64> = model.init_store(1, &extractor).unwrap();
    model.load_checkpoint(&path, &mut reloaded).unwrap();
    for (name, t) in store.iter() {
        let u = reloaded.get(name).unwrap();
        if !t
            .data()
            .iter()
            .zip(u.data())
            .all(|(a, b)| a.to_bits() == b.to_bits())
        {
            ok = false;
            detail.push_str(&format!("round-trip mismatch in {name}; "));
        }
    }

    // Tri-subject mode passes the gradient and oracle suites at D=8.
    let mut worst_grad = 0.0_f64;
    for seed in 0..5u64 {
        for cfg in [
            ModelConfig::Srgn(SRgnConfig {
                subject_count: 3,
                dims: vec![6, 3],
                ..SRgnConfig::new(8)
            }),
            ModelConfig::Hrgn(HRgnConfig {
                subject_count: 3,
                latent_widths: vec![4, 2],
                dims: vec![6, 3],
                ..HRgnConfig::new(8)
            }),
        ] {
            let batch = random_pair_batch(8, 4, 3, 300 + seed);
            let r =
                check_model_gradients(&cfg, &batch, ExtractorMode::Precomputed, seed, DEFAULT_STEP)
                    .unwrap();
            worst_grad = worst_grad.max(r.max_rel_err);
        }
    }
    if worst_grad > 1e-5 {
        ok = false;
        detail.push_str(&format!("tri gradient err {worst_grad:.3e}; "));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8080);
    let mut worst_oracle = 0.0_f64;
    for _ in 0..20 {
        worst_oracle = worst_oracle.max(common::check_srgn_instance(&mut rng, true));
        worst_oracle = worst_oracle.max(common::check_hrgn_instance(&mut rng, true));
    }
    if worst_oracle > 1e-12 {
        ok = false;
        detail.push_str(&format!("tri oracle |diff| {worst_oracle:.3e}; "));
    }

    // Tri-subject scoring also drives the metrics end to end.
    let (tri_manifest, tri_features) = synth_generate(&SynthConfig {
        seed: 33,
        n_families: 60,
        d_raw: 8,
        shared_fraction: 0.6,
        noise_sigma: 0.1,
        tri_subject: true,
    })
    .unwrap();
    let tri_cfg = ModelConfig::Srgn(SRgnConfig {
        subject_count: 3,
        dims: vec![4, 2],
        ..SRgnConfig::new(8)
    });
    let mut tri_tc = TrainConfig::new(60, 4);
    tri_tc.eval_every = 60;
    let outcome = train::<f64>(&tri_cfg, &tri_manifest, &tri_features, 1, &tri_tc).unwrap();
    if roc_auc(&outcome.test_scores, &outcome.test_labels).is_err() {
        ok = false;
        detail.push_str("tri scoring failed; ");
    }

    report(8, "determinism and persistence", ok, &detail);
}
