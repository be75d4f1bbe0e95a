//! Dataset ingestion, balanced negative sampling, the five-fold protocol,
//! the feature-extractor front end, and the synthetic benchmark generator.

pub mod batch;
pub mod extractor;
pub mod features;
pub mod manifest;
pub mod sampling;
pub mod synth;

pub use batch::{PairBatch, PairSample};
pub use extractor::{ExtractorMode, FeatureExtractor};
pub use features::FeatureTable;
pub use manifest::{ManifestRecord, Relation, SampleManifest};
pub use sampling::{build_negatives, cv_split, positives_as_samples, Split};
pub use synth::{synth_generate, SynthConfig};
