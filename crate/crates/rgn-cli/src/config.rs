//! Plain-text key/value configuration.
//!
//! One `key = value` pair per line, `#` comments. Every model, training,
//! and synthesis field is settable here; command-line flags override the
//! file.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rgn_core::baselines::MlpBaselineConfig;
use rgn_core::hrgn::HRgnConfig;
use rgn_core::numerics::{OptimizerKind, PoolKind};
use rgn_core::pipeline::{ExtractorMode, SynthConfig};
use rgn_core::srgn::SRgnConfig;
use rgn_core::training::TrainConfig;
use rgn_core::ModelConfig;

const KNOWN_KEYS: &[&str] = &[
    // model selection
    "model",
    "precision",
    // graph model shape
    "d",
    "subject_count",
    "k",
    "dims",
    "init_pool",
    "aggre_pool",
    "untie_central_message",
    "head_hidden",
    "latent_widths",
    "init_mode",
    "lower_input_mode",
    "att_hidden",
    "mlp_hidden",
    // training
    "iterations",
    "epochs",
    "batch_size",
    "optimizer",
    "lr",
    "momentum",
    "beta1",
    "beta2",
    "eps",
    "seed",
    "resample_negatives",
    "eval_every",
    "extractor",
    "extractor_dim",
    "fold",
    // synthetic data
    "n_families",
    "d_raw",
    "shared_fraction",
    "noise_sigma",
    "tri_subject",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Precision {
    F32,
    F64,
}

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut cfg = Config::default();
        let Some(path) = path else { return Ok(cfg) };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| anyhow!("config line {}: expected key = value", lineno + 1))?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                bail!("config line {}: unknown key '{}'", lineno + 1, key);
            }
            cfg.values.insert(key, value.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.values.insert(key.to_string(), value.into());
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<T>()
                .map(Some)
                .map_err(|e| anyhow!("config key '{key}': bad value '{raw}': {e}")),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parse::<usize>(key)?.unwrap_or(default))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.parse::<f64>(key)?.unwrap_or(default))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        Ok(self.parse::<bool>(key)?.unwrap_or(default))
    }

    fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) if raw.is_empty() => Ok(Some(Vec::new())),
            Some(raw) => raw
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<usize>()
                        .map_err(|e| anyhow!("config key '{key}': bad entry '{p}': {e}"))
                })
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    pub fn precision(&self) -> Result<Precision> {
        match self.get("precision").unwrap_or("f64") {
            "f64" => Ok(Precision::F64),
            "f32" => Ok(Precision::F32),
            other => bail!("precision must be f32 or f64, got '{other}'"),
        }
    }

    pub fn seed(&self, flag: Option<u64>) -> Result<u64> {
        if let Some(s) = flag {
            return Ok(s);
        }
        Ok(self.parse::<u64>("seed")?.unwrap_or(0))
    }

    pub fn fold(&self) -> Result<u8> {
        let fold = self.usize_or("fold", 1)?;
        if !(1..=5).contains(&fold) {
            bail!("fold must be in 1..5, got {fold}");
        }
        Ok(fold as u8)
    }

    /// Per-layer feature widths: explicit `dims`, or derived from `k` with
    /// the default convention (last layer 4, earlier layers 512).
    fn dims(&self) -> Result<Vec<usize>> {
        if let Some(dims) = self.usize_list("dims")? {
            if dims.is_empty() {
                bail!("dims must not be empty");
            }
            if let Some(k) = self.parse::<usize>("k")? {
                if k != dims.len() {
                    bail!("k = {k} disagrees with dims of length {}", dims.len());
                }
            }
            return Ok(dims);
        }
        let k = self.usize_or("k", 2)?;
        if k == 0 {
            bail!("k must be at least 1");
        }
        let mut dims = vec![512; k - 1];
        dims.push(4);
        Ok(dims)
    }

    /// The feature width the graph model sees: explicit `d`, else the
    /// toy-extractor output width, else the feature-table width.
    pub fn model_d(&self, feature_width: Option<usize>) -> Result<usize> {
        if let Some(d) = self.parse::<usize>("d")? {
            return Ok(d);
        }
        if let Some(ExtractorMode::ToyTrainable { out_dim }) = self.extractor_mode()? {
            return Ok(out_dim);
        }
        if let Some(w) = feature_width {
            return Ok(w);
        }
        Ok(512)
    }

    fn extractor_mode(&self) -> Result<Option<ExtractorMode>> {
        match self.get("extractor") {
            None => Ok(None),
            Some("precomputed") => Ok(Some(ExtractorMode::Precomputed)),
            Some("toy-trainable") => {
                let out_dim = self.usize_or("extractor_dim", 16)?;
                Ok(Some(ExtractorMode::ToyTrainable { out_dim }))
            }
            Some(other) => bail!("extractor must be precomputed or toy-trainable, got '{other}'"),
        }
    }

    pub fn model_config(
        &self,
        flag: Option<&str>,
        feature_width: Option<usize>,
    ) -> Result<ModelConfig> {
        let name = flag.or_else(|| self.get("model")).unwrap_or("srgn");
        let d = self.model_d(feature_width)?;
        let subject_count = self.usize_or("subject_count", 2)?;
        match name {
            "srgn" => {
                let mut cfg = SRgnConfig::new(d);
                cfg.subject_count = subject_count;
                cfg.dims = self.dims()?;
                if let Some(p) = self.get("init_pool") {
                    cfg.init_pool = p.parse::<PoolKind>()?;
                }
                if let Some(p) = self.get("aggre_pool") {
                    cfg.aggre_pool = p.parse::<PoolKind>()?;
                }
                cfg.untie_central_message = self.bool_or("untie_central_message", false)?;
                if let Some(h) = self.usize_list("head_hidden")? {
                    cfg.head_hidden = h;
                }
                Ok(ModelConfig::Srgn(cfg))
            }
            "hrgn" => {
                let mut cfg = HRgnConfig::new(d);
                cfg.subject_count = subject_count;
                cfg.dims = self.dims()?;
                if let Some(w) = self.usize_list("latent_widths")? {
                    cfg.latent_widths = w;
                }
                if let Some(p) = self.get("aggre_pool") {
                    cfg.aggre_pool = p.parse::<PoolKind>()?;
                }
                if let Some(m) = self.get("init_mode") {
                    cfg.init_mode = m.parse()?;
                }
                if let Some(m) = self.get("lower_input_mode") {
                    cfg.lower_input_mode = m.parse()?;
                }
                cfg.att_hidden = self.usize_or("att_hidden", cfg.att_hidden)?;
                if let Some(h) = self.usize_list("head_hidden")? {
                    cfg.head_hidden = h;
                }
                Ok(ModelConfig::Hrgn(cfg))
            }
            "mlp-baseline" => {
                let mut cfg = MlpBaselineConfig::new(d);
                cfg.subject_count = subject_count;
                if let Some(h) = self.usize_list("mlp_hidden")? {
                    cfg.hidden = h;
                }
                Ok(ModelConfig::MlpBaseline(cfg))
            }
            "cos-baseline" => Ok(ModelConfig::CosBaseline { d }),
            other => bail!("unknown model '{other}' (want srgn|hrgn|mlp-baseline|cos-baseline)"),
        }
    }

    /// Training configuration. `iterations` wins when given; otherwise
    /// `epochs` (default 150) is converted using the training-set size.
    pub fn train_config(
        &self,
        seed_flag: Option<u64>,
        n_train_samples: usize,
    ) -> Result<TrainConfig> {
        let seed = self.seed(seed_flag)?;
        let batch_size = self.usize_or("batch_size", 32)?;
        let iterations = match self.parse::<usize>("iterations")? {
            Some(n) if n > 0 => n,
            _ => {
                let epochs = self.usize_or("epochs", 150)?;
                TrainConfig::iterations_for_epochs(epochs, n_train_samples.max(1), batch_size)
            }
        };
        let mut cfg = TrainConfig::new(iterations, seed);
        cfg.batch_size = batch_size;
        cfg.lr = self.f64_or("lr", 1e-3)?;
        cfg.optimizer = match self.get("optimizer").unwrap_or("adam") {
            "adam" => OptimizerKind::Adam {
                beta1: self.f64_or("beta1", 0.9)?,
                beta2: self.f64_or("beta2", 0.999)?,
                eps: self.f64_or("eps", 1e-8)?,
            },
            "sgd-momentum" => OptimizerKind::SgdMomentum {
                momentum: self.f64_or("momentum", 0.9)?,
            },
            other => bail!("optimizer must be adam or sgd-momentum, got '{other}'"),
        };
        cfg.resample_negatives = self.bool_or("resample_negatives", false)?;
        cfg.eval_every = self.usize_or("eval_every", 50)?;
        cfg.extractor = self.extractor_mode()?.unwrap_or(ExtractorMode::Precomputed);
        Ok(cfg)
    }

    pub fn synth_config(&self, seed_flag: Option<u64>) -> Result<SynthConfig> {
        Ok(SynthConfig {
            seed: self.seed(seed_flag)?,
            n_families: self.usize_or("n_families", 400)?,
            d_raw: self.usize_or("d_raw", 32)?,
            shared_fraction: self.f64_or("shared_fraction", 0.5)?,
            noise_sigma: self.f64_or("noise_sigma", 0.1)?,
            tri_subject: self.bool_or("tri_subject", false)?,
        })
    }
}
