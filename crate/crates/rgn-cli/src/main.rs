mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use config::{Config, Precision};
use rgn_core::eval::{count_macs, crossval, metrics, report};
use rgn_core::gradcheck::{self, check_model_gradients, random_pair_batch};
use rgn_core::hrgn::{HRgnConfig, LowerInputMode};
use rgn_core::numerics::{PoolKind, Real};
use rgn_core::pipeline::{cv_split, synth_generate, ExtractorMode, FeatureTable, SampleManifest};
use rgn_core::srgn::SRgnConfig;
use rgn_core::training::train;
use rgn_core::ModelConfig;

#[derive(Parser)]
#[command(
    name = "rgn",
    version,
    about = "Reasoning graph networks for pairwise feature verification"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Plain-text key = value configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed override (wins over the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory for reports, checkpoints, and logs.
    #[arg(long, global = true, default_value = "rgn-out")]
    out: PathBuf,

    /// JSON-lines sample manifest.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,

    /// Feature table (CSV or FTB1 binary).
    #[arg(long, global = true)]
    features: Option<PathBuf>,

    /// Model: srgn | hrgn | mlp-baseline | cos-baseline.
    #[arg(long, global = true)]
    model: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Train one model on four folds, holding one out.
    Train,
    /// Score a held-out fold with a trained checkpoint (or cos-baseline).
    Eval {
        /// Checkpoint produced by `train` (not used by cos-baseline).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Full five-fold cross-validation with report emission.
    Crossval,
    /// Finite-difference gradient verification of the graph models.
    Gradcheck,
    /// Generate the synthetic benchmark and cross-validate on it.
    SynthBench,
    /// Closed-form multiply-accumulate counts for a configuration.
    CountMacs,
}

fn main() {
    env_logger::init();
    if let Err(e) = run() {
        let msg = serde_json::json!({ "error": format!("{e:#}") });
        eprintln!("{msg}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let cfg = Config::load(cli.config.as_deref())?;
    match cfg.precision()? {
        Precision::F64 => dispatch::<f64>(&cli, &cfg),
        Precision::F32 => dispatch::<f32>(&cli, &cfg),
    }
}

fn dispatch<T: Real>(cli: &Cli, cfg: &Config) -> Result<()> {
    match &cli.command {
        Command::Train => cmd_train::<T>(cli, cfg),
        Command::Eval { checkpoint } => cmd_eval::<T>(cli, cfg, checkpoint.as_deref()),
        Command::Crossval => cmd_crossval::<T>(cli, cfg),
        Command::Gradcheck => cmd_gradcheck(cli, cfg),
        Command::SynthBench => cmd_synth_bench::<T>(cli, cfg),
        Command::CountMacs => cmd_count_macs(cli, cfg),
    }
}

fn load_data(cli: &Cli) -> Result<(SampleManifest, FeatureTable)> {
    let manifest_path = cli
        .manifest
        .as_deref()
        .context("--manifest is required for this command")?;
    let features_path = cli
        .features
        .as_deref()
        .context("--features is required for this command")?;
    let manifest = SampleManifest::load(manifest_path)?;
    let features = FeatureTable::load(features_path)?;
    Ok((manifest, features))
}

fn train_sample_count(manifest: &SampleManifest, subject_count: usize, held_out: u8) -> usize {
    // Positives in the four training folds, doubled for the negatives.
    2 * manifest
        .for_subject_count(subject_count)
        .iter()
        .filter(|r| r.fold != held_out)
        .count()
}

fn cmd_train<T: Real>(cli: &Cli, cfg: &Config) -> Result<()> {
    let (manifest, features) = load_data(cli)?;
    let model_cfg = cfg.model_config(cli.model.as_deref(), Some(features.width()))?;
    let fold = cfg.fold()?;
    let n_train = train_sample_count(&manifest, model_cfg.subject_count(), fold);
    let tc = cfg.train_config(cli.seed, n_train)?;

    eprintln!(
        "training {} with fold {fold} held out ({} iterations, batch {})",
        model_cfg.name(),
        tc.iterations,
        tc.batch_size
    );
    let mut outcome = train::<T>(&model_cfg, &manifest, &features, fold, &tc)?;

    fs::create_dir_all(&cli.out)?;
    let ckpt_path = cli.out.join("model.rgn");
    outcome.model.save_checkpoint(&ckpt_path, &outcome.store)?;
    outcome.record.checkpoint = Some(ckpt_path.clone());

    let mut metrics_file = fs::File::create(cli.out.join("metrics.jsonl"))?;
    for point in &outcome.record.points {
        writeln!(metrics_file, "{}", serde_json::to_string(point)?)?;
    }

    let rate = metrics::verification_rate(&outcome.test_scores, &outcome.test_labels, 0.5)?;
    let summary = serde_json::json!({
        "model": model_cfg.name(),
        "held_out_fold": fold,
        "iterations": tc.iterations,
        "final": outcome.record.points.last(),
        "heldout_verification_rate": rate,
        "checkpoint": ckpt_path,
    });
    fs::write(
        cli.out.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "held-out fold {fold} verification rate: {:.1}%",
        100.0 * rate
    );
    println!("checkpoint: {}", ckpt_path.display());
    Ok(())
}

fn cmd_eval<T: Real>(cli: &Cli, cfg: &Config, checkpoint: Option<&Path>) -> Result<()> {
    let (manifest, features) = load_data(cli)?;
    let model_cfg = cfg.model_config(cli.model.as_deref(), Some(features.width()))?;
    let fold = cfg.fold()?;
    let seed = cfg.seed(cli.seed)?;
    let split = cv_split(&manifest, fold, model_cfg.subject_count(), seed)?;

    let (scores, labels, relations, threshold) = match &model_cfg {
        ModelConfig::CosBaseline { .. } => {
            let score =
                |samples: &[rgn_core::pipeline::PairSample]| -> Result<(Vec<f64>, Vec<bool>)> {
                    let mut s = Vec::new();
                    let mut l = Vec::new();
                    for p in samples {
                        s.push(rgn_core::baselines::cos_baseline(
                            features.get(&p.parent)?,
                            features.get(&p.child)?,
                        )?);
                        l.push(p.label);
                    }
                    Ok((s, l))
                };
            let (ts, tl) = score(&split.train)?;
            let threshold = metrics::ThresholdPolicy::TrainFoldTuned.threshold(&ts, &tl)?;
            let (s, l) = score(&split.test)?;
            let rel: Vec<_> = split.test.iter().map(|p| p.relation).collect();
            (s, l, rel, threshold)
        }
        _ => {
            let path = checkpoint.context("--checkpoint is required for trained models")?;
            let model = model_cfg.build()?;
            let extractor_mode = cfg.train_config(cli.seed, 1)?.extractor;
            let extractor =
                rgn_core::pipeline::FeatureExtractor::new(extractor_mode, features.width())?;
            let mut store: rgn_core::numerics::ParameterStore<T> =
                model.init_store(seed, &extractor)?;
            model.load_checkpoint(path, &mut store)?;
            let batch = rgn_core::pipeline::PairBatch::<T>::assemble(&split.test, &features)?;
            let (scores, _) = model.evaluate(&store, &batch, &extractor)?;
            (scores, batch.labels.clone(), batch.relations.clone(), 0.5)
        }
    };

    let mut per_relation = BTreeMap::new();
    for rel in relations
        .iter()
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
    {
        let idx: Vec<usize> = (0..relations.len())
            .filter(|&i| relations[i] == rel)
            .collect();
        let s: Vec<f64> = idx.iter().map(|&i| scores[i]).collect();
        let l: Vec<bool> = idx.iter().map(|&i| labels[i]).collect();
        per_relation.insert(rel.as_str(), metrics::verification_rate(&s, &l, threshold)?);
    }
    let overall = metrics::verification_rate(&scores, &labels, threshold)?;
    let (_, auc) = metrics::roc_auc(&scores, &labels)?;

    fs::create_dir_all(&cli.out)?;
    let out = serde_json::json!({
        "model": model_cfg.name(),
        "held_out_fold": fold,
        "threshold": threshold,
        "per_relation": per_relation,
        "verification_rate": overall,
        "auc": auc,
    });
    fs::write(
        cli.out.join("eval.json"),
        serde_json::to_string_pretty(&out)?,
    )?;
    for (rel, rate) in &per_relation {
        println!("{rel:>6}: {:.1}%", 100.0 * rate);
    }
    println!("  mean: {:.1}%  (AUC {auc:.4})", 100.0 * overall);
    Ok(())
}

fn cmd_crossval<T: Real>(cli: &Cli, cfg: &Config) -> Result<()> {
    let (manifest, features) = load_data(cli)?;
    let model_cfg = cfg.model_config(cli.model.as_deref(), Some(features.width()))?;
    let n_train = train_sample_count(&manifest, model_cfg.subject_count(), 1);
    let tc = cfg.train_config(cli.seed, n_train)?;
    let report_data = crossval::<T>(&model_cfg, &manifest, &features, &tc)?;
    report::write_files(&report_data, &cli.out)?;
    println!("{} five-fold cross-validation", report_data.model);
    print!("{}", report::human_table(&report_data));
    println!("reports written to {}", cli.out.display());
    Ok(())
}

fn gradcheck_suite() -> Vec<(String, ModelConfig)> {
    let mut suite = Vec::new();
    for pool in [PoolKind::Max, PoolKind::Avg] {
        let cfg = SRgnConfig {
            dims: vec![6, 3],
            aggre_pool: pool,
            init_pool: if pool == PoolKind::Max {
                PoolKind::Avg
            } else {
                PoolKind::Max
            },
            ..SRgnConfig::new(8)
        };
        suite.push((
            format!("srgn d8 aggre={}", pool.as_str()),
            ModelConfig::Srgn(cfg),
        ));
    }
    for mode in [
        LowerInputMode::Comprehensive,
        LowerInputMode::LiteralMessage,
    ] {
        let cfg = HRgnConfig {
            latent_widths: vec![4, 2],
            dims: vec![6, 3],
            lower_input_mode: mode,
            ..HRgnConfig::new(12)
        };
        suite.push((
            format!("hrgn d12 lower={}", mode.as_str()),
            ModelConfig::Hrgn(cfg),
        ));
    }
    // Tri-subject variants at D=8.
    let cfg = SRgnConfig {
        subject_count: 3,
        dims: vec![6, 3],
        ..SRgnConfig::new(8)
    };
    suite.push(("srgn d8 tri".into(), ModelConfig::Srgn(cfg)));
    let cfg = HRgnConfig {
        subject_count: 3,
        latent_widths: vec![4, 2],
        dims: vec![6, 3],
        ..HRgnConfig::new(8)
    };
    suite.push(("hrgn d8 tri".into(), ModelConfig::Hrgn(cfg)));
    suite
}

fn cmd_gradcheck(cli: &Cli, cfg: &Config) -> Result<()> {
    let tolerance = 1e-5;
    let base_seed = cfg.seed(cli.seed)?;
    let filter = cli.model.as_deref();
    let mut results = Vec::new();
    let mut worst_overall = 0.0_f64;
    let started = std::time::Instant::now();
    for (label, model_cfg) in gradcheck_suite() {
        if let Some(f) = filter {
            if model_cfg.name() != f {
                continue;
            }
        }
        for seed in 0..5u64 {
            let batch = random_pair_batch(
                model_cfg.d(),
                4,
                model_cfg.subject_count(),
                base_seed ^ (seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            );
            let report = check_model_gradients(
                &model_cfg,
                &batch,
                ExtractorMode::Precomputed,
                base_seed.wrapping_add(seed),
                gradcheck::DEFAULT_STEP,
            )?;
            println!(
                "{label:<28} seed {seed}: max rel err {:.3e} {}",
                report.max_rel_err,
                if report.passes(tolerance) {
                    "ok"
                } else {
                    "FAIL"
                }
            );
            worst_overall = worst_overall.max(report.max_rel_err);
            results.push(serde_json::json!({
                "config": label,
                "seed": seed,
                "max_rel_err": report.max_rel_err,
            }));
        }
    }
    if results.is_empty() {
        bail!("no gradcheck configuration matches --model {filter:?}");
    }
    fs::create_dir_all(&cli.out)?;
    fs::write(
        cli.out.join("gradcheck.json"),
        serde_json::to_string_pretty(&serde_json::json!({
            "tolerance": tolerance,
            "worst": worst_overall,
            "runs": results,
        }))?,
    )?;
    println!(
        "worst relative error {:.3e} over {} runs in {:.2?}",
        worst_overall,
        results.len(),
        started.elapsed()
    );
    if worst_overall > tolerance {
        bail!("gradient check failed: {worst_overall:.3e} > {tolerance:e}");
    }
    Ok(())
}

fn cmd_synth_bench<T: Real>(cli: &Cli, cfg: &Config) -> Result<()> {
    let synth = cfg.synth_config(cli.seed)?;
    let (manifest, features) = synth_generate(&synth)?;
    fs::create_dir_all(&cli.out)?;
    let manifest_path = cli.out.join("manifest.jsonl");
    let mut mf = fs::File::create(&manifest_path)?;
    manifest.save(&mut mf)?;
    features.save_csv(&cli.out.join("features.csv"))?;
    eprintln!(
        "generated {} families (d_raw {}, shared {}, sigma {})",
        synth.n_families, synth.d_raw, synth.shared_fraction, synth.noise_sigma
    );

    // Desk-scale model defaults unless the config overrides them.
    let mut bench_cfg = cfg.clone();
    if cfg.get("dims").is_none() && cfg.get("k").is_none() {
        bench_cfg.set("dims", "16,4");
    }
    if cfg.get("latent_widths").is_none() {
        bench_cfg.set("latent_widths", "8,4");
    }
    if cfg.get("epochs").is_none() && cfg.get("iterations").is_none() {
        bench_cfg.set("epochs", "150");
    }

    let models: Vec<String> = match &cli.model {
        Some(m) => vec![m.clone()],
        None => vec!["srgn".into(), "hrgn".into(), "cos-baseline".into()],
    };
    let n_train = train_sample_count(&manifest, if synth.tri_subject { 3 } else { 2 }, 1);
    for name in models {
        let model_cfg = bench_cfg.model_config(Some(&name), Some(features.width()))?;
        let mut tc = bench_cfg.train_config(cli.seed, n_train)?;
        if bench_cfg.get("eval_every").is_none() {
            // Periodic full-split evaluation is pure overhead here.
            tc.eval_every = tc.iterations;
        }
        let started = std::time::Instant::now();
        let report_data = crossval::<T>(&model_cfg, &manifest, &features, &tc)?;
        let out_dir = cli.out.join(&name);
        report::write_files(&report_data, &out_dir)?;
        println!("\n{name} ({:.1?})", started.elapsed());
        print!("{}", report::human_table(&report_data));
    }
    Ok(())
}

fn cmd_count_macs(cli: &Cli, cfg: &Config) -> Result<()> {
    let model_cfg = cfg.model_config(cli.model.as_deref(), None)?;
    let report = count_macs(&model_cfg)?;
    println!("{} MAC count ({})", report.model, report.note);
    print!("{}", report.table());
    if let ModelConfig::Hrgn(hcfg) = &model_cfg {
        let model = rgn_core::hrgn::HRgn::new(hcfg.clone())?;
        print!("{}", model.topology().dump());
    }
    fs::create_dir_all(&cli.out)?;
    fs::write(
        cli.out.join("macs.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    Ok(())
}
