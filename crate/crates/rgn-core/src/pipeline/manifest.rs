use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kin relation of a pair (bi-subject) or triple (tri-subject) record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "F-S")]
    FatherSon,
    #[serde(rename = "F-D")]
    FatherDaughter,
    #[serde(rename = "M-S")]
    MotherSon,
    #[serde(rename = "M-D")]
    MotherDaughter,
    #[serde(rename = "FM-S")]
    FatherMotherSon,
    #[serde(rename = "FM-D")]
    FatherMotherDaughter,
}

impl Relation {
    pub const BI: [Relation; 4] = [
        Relation::FatherSon,
        Relation::FatherDaughter,
        Relation::MotherSon,
        Relation::MotherDaughter,
    ];

    pub const TRI: [Relation; 2] = [Relation::FatherMotherSon, Relation::FatherMotherDaughter];

    pub fn is_tri(self) -> bool {
        matches!(
            self,
            Relation::FatherMotherSon | Relation::FatherMotherDaughter
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Relation::FatherSon => "F-S",
            Relation::FatherDaughter => "F-D",
            Relation::MotherSon => "M-S",
            Relation::MotherDaughter => "M-D",
            Relation::FatherMotherSon => "FM-S",
            Relation::FatherMotherDaughter => "FM-D",
        }
    }
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Relation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "F-S" => Ok(Relation::FatherSon),
            "F-D" => Ok(Relation::FatherDaughter),
            "M-S" => Ok(Relation::MotherSon),
            "M-D" => Ok(Relation::MotherDaughter),
            "FM-S" => Ok(Relation::FatherMotherSon),
            "FM-D" => Ok(Relation::FatherMotherDaughter),
            other => Err(Error::data(format!("unknown relation '{other}'"))),
        }
    }
}

/// One positive sample: a parent/child pair (plus a second parent for the
/// FM-* relations) with its cross-validation fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub pair_id: String,
    pub relation: Relation,
    pub fold: u8,
    pub parent_ref: String,
    pub child_ref: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parent2_ref: Option<String>,
}

/// Validated dataset description: the positive set plus fold assignment.
#[derive(Clone, Debug, Default)]
pub struct SampleManifest {
    records: Vec<ManifestRecord>,
}

impl SampleManifest {
    pub fn new(records: Vec<ManifestRecord>) -> Result<Self> {
        let manifest = SampleManifest { records };
        manifest.validate()?;
        Ok(manifest)
    }

    /// Load UTF-8 JSON-lines, one record per line.
    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path)
            .map_err(|e| Error::data(format!("cannot open manifest {}: {e}", path.display())))?;
        Self::from_reader(BufReader::new(file))
    }

    pub fn from_reader<R: Read>(reader: BufReader<R>) -> Result<Self> {
        let mut records = Vec::new();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: ManifestRecord = serde_json::from_str(&line)
                .map_err(|e| Error::data(format!("manifest line {}: {e}", lineno + 1)))?;
            records.push(record);
        }
        Self::new(records)
    }

    fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert(r.pair_id.as_str()) {
                problems.push(format!("duplicate pair_id '{}'", r.pair_id));
            }
            if r.relation.is_tri() && r.parent2_ref.is_none() {
                problems.push(format!(
                    "record '{}' has relation {} but no parent2_ref",
                    r.pair_id, r.relation
                ));
            }
            if !r.relation.is_tri() && r.parent2_ref.is_some() {
                problems.push(format!(
                    "record '{}' has relation {} but carries parent2_ref",
                    r.pair_id, r.relation
                ));
            }
            if !(1..=5).contains(&r.fold) {
                problems.push(format!(
                    "record '{}' has fold {} outside 1..5",
                    r.pair_id, r.fold
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::data(problems.join("; ")))
        }
    }

    pub fn save<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)
                .map_err(|e| Error::data(format!("manifest serialization: {e}")))?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn records(&self) -> &[ManifestRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Records matching the model arity: tri-subject models see FM-*
    /// records, bi-subject models see the rest.
    pub fn for_subject_count(&self, subject_count: usize) -> Vec<&ManifestRecord> {
        let tri = subject_count == 3;
        self.records
            .iter()
            .filter(|r| r.relation.is_tri() == tri)
            .collect()
    }

    /// Relations present, in canonical order.
    pub fn relations(&self) -> Vec<Relation> {
        Relation::BI
            .into_iter()
            .chain(Relation::TRI)
            .filter(|rel| self.records.iter().any(|r| r.relation == *rel))
            .collect()
    }
}
