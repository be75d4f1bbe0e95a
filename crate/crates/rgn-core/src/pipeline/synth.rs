//! Synthetic kinship-style dataset generator for desk-scale verification.
//!
//! Each family draws a parent vector from a standard normal; the child
//! copies a fixed random subset of coordinates (the "inherited" dimensions)
//! and draws the rest fresh. Independent Gaussian noise is added to every
//! stored coordinate of every subject. Tri-subject mode adds a second
//! parent whose inherited subset is disjoint from the first parent's.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pipeline::features::FeatureTable;
use crate::pipeline::manifest::{ManifestRecord, Relation, SampleManifest};

#[derive(Clone, Copy, Debug)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_families: usize,
    pub d_raw: usize,
    /// Fraction of coordinates the child copies from each parent.
    pub shared_fraction: f64,
    pub noise_sigma: f64,
    pub tri_subject: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            n_families: 400,
            d_raw: 32,
            shared_fraction: 0.5,
            noise_sigma: 0.1,
            tri_subject: false,
        }
    }
}

pub fn synth_generate(cfg: &SynthConfig) -> Result<(SampleManifest, FeatureTable)> {
    if !(0.0..=1.0).contains(&cfg.shared_fraction) {
        return Err(Error::config(format!(
            "shared_fraction must be in [0,1], got {}",
            cfg.shared_fraction
        )));
    }
    if cfg.n_families == 0 || cfg.d_raw == 0 {
        return Err(Error::config("synth needs n_families >= 1 and d_raw >= 1"));
    }
    let d = cfg.d_raw;
    let shared = (cfg.shared_fraction * d as f64).floor() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut table = FeatureTable::new(d);
    let mut records = Vec::with_capacity(cfg.n_families);

    for fam in 0..cfg.n_families {
        let z1: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let mut coords: Vec<usize> = (0..d).collect();
        coords.shuffle(&mut rng);
        let inherit1 = &coords[..shared];

        let mut child: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        for &c in inherit1 {
            child[c] = z1[c];
        }

        let parent2 = if cfg.tri_subject {
            let z2: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            // Second parent's inherited subset is disjoint from the first.
            let take2 = shared.min(d - shared);
            let inherit2 = &coords[shared..shared + take2];
            for &c in inherit2 {
                child[c] = z2[c];
            }
            Some(z2)
        } else {
            None
        };

        let noise = |rng: &mut ChaCha8Rng, v: &[f64]| -> Vec<f64> {
            v.iter()
                .map(|&x| x + cfg.noise_sigma * rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        let parent_feat = noise(&mut rng, &z1);
        let child_feat = noise(&mut rng, &child);
        let parent2_feat = parent2.as_ref().map(|z2| noise(&mut rng, z2));

        let parent_id = format!("f{fam:04}_p");
        let child_id = format!("f{fam:04}_c");
        table.insert(&parent_id, parent_feat)?;
        table.insert(&child_id, child_feat)?;
        let parent2_id = match parent2_feat {
            Some(feat) => {
                let id = format!("f{fam:04}_q");
                table.insert(&id, feat)?;
                Some(id)
            }
            None => None,
        };

        let relation = if cfg.tri_subject {
            Relation::TRI[fam % 2]
        } else {
            Relation::BI[fam % 4]
        };
        records.push(ManifestRecord {
            pair_id: format!("pair{fam:04}"),
            relation,
            fold: (fam % 5) as u8 + 1,
            parent_ref: parent_id,
            child_ref: child_id,
            parent2_ref: parent2_id,
        });
    }
    Ok((SampleManifest::new(records)?, table))
}
