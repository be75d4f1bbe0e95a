//! Closed-form multiply-accumulate counting for the reasoning modules.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::ModelConfig;

pub const MAC_NOTE: &str = "affine multiply-accumulates only (one per weight element per \
application); bias adds, pooling, ReLU, softmax, and cosine mixing are free; the feature \
backbone is not included";

#[derive(Clone, Debug, Serialize)]
pub struct MacStage {
    pub name: String,
    pub macs: u64,
}

/// Per-pair MAC budget of one configuration, decomposed by stage.
#[derive(Clone, Debug, Serialize)]
pub struct MacReport {
    pub model: String,
    pub stages: Vec<MacStage>,
    pub total: u64,
    pub note: String,
}

impl MacReport {
    pub fn table(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "{:<16} {:>14}", "stage", "MACs");
        for s in &self.stages {
            let _ = writeln!(out, "{:<16} {:>14}", s.name, s.macs);
        }
        let _ = writeln!(out, "{:<16} {:>14}", "total", self.total);
        out
    }
}

/// Count MACs for one forward pass of the reasoning module (graph
/// initialization, K message-passing steps, readout head).
pub fn count_macs(cfg: &ModelConfig) -> Result<MacReport> {
    if matches!(cfg, ModelConfig::CosBaseline { .. }) {
        return Err(Error::config(
            "cos-baseline applies no affine maps; nothing to count",
        ));
    }
    let stages: Vec<MacStage> = cfg
        .build()?
        .mac_stages()?
        .into_iter()
        .filter(|(_, macs)| *macs > 0)
        .map(|(name, macs)| MacStage { name, macs })
        .collect();
    let total = stages.iter().map(|s| s.macs).sum();
    Ok(MacReport {
        model: cfg.name().to_string(),
        stages,
        total,
        note: MAC_NOTE.to_string(),
    })
}
