use crate::error::{Error, Result};
use crate::numerics::{Real, Tensor};
use crate::pipeline::features::FeatureTable;
use crate::pipeline::manifest::Relation;

/// One labeled pair (or triple) by feature reference.
#[derive(Clone, Debug, PartialEq)]
pub struct PairSample {
    pub parent: String,
    pub child: String,
    pub parent2: Option<String>,
    pub relation: Relation,
    pub label: bool,
}

/// Batched features for a set of pair samples: row `i` of each matrix
/// belongs to sample `i`.
#[derive(Clone, Debug)]
pub struct PairBatch<T> {
    pub parents: Tensor<T>,
    pub children: Tensor<T>,
    pub parents2: Option<Tensor<T>>,
    pub labels: Vec<bool>,
    pub relations: Vec<Relation>,
}

impl<T: Real> PairBatch<T> {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_width(&self) -> usize {
        self.parents.shape()[1]
    }

    /// Resolve feature references into matrices. All samples must share
    /// arity (all tri or none).
    pub fn assemble(samples: &[PairSample], table: &FeatureTable) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::data("cannot assemble an empty batch"));
        }
        let tri = samples[0].parent2.is_some();
        let width = table.width();
        let n = samples.len();
        let mut parents = Vec::with_capacity(n * width);
        let mut children = Vec::with_capacity(n * width);
        let mut parents2 = if tri {
            Vec::with_capacity(n * width)
        } else {
            Vec::new()
        };
        let mut labels = Vec::with_capacity(n);
        let mut relations = Vec::with_capacity(n);
        for s in samples {
            if s.parent2.is_some() != tri {
                return Err(Error::data("mixed bi/tri samples in one batch"));
            }
            parents.extend_from_slice(table.get(&s.parent)?);
            children.extend_from_slice(table.get(&s.child)?);
            if let Some(p2) = &s.parent2 {
                parents2.extend_from_slice(table.get(p2)?);
            }
            labels.push(s.label);
            relations.push(s.relation);
        }
        let to_tensor = |v: Vec<f64>| Tensor::<T>::from_f64_slice(&v, vec![n, width]);
        Ok(PairBatch {
            parents: to_tensor(parents)?,
            children: to_tensor(children)?,
            parents2: if tri {
                Some(to_tensor(parents2)?)
            } else {
                None
            },
            labels,
            relations,
        })
    }
}
