//! Hierarchical reasoning graph network.
//!
//! Latent layers sit above the D comparison nodes in a balanced tree. At
//! initialization each latent node is an attention-weighted (or pooled)
//! combination of its children. Every step then (a) transforms all node
//! features, (b) abstracts bottom-up into comprehensive features, (c) mixes
//! the top layer through cosine-weighted sums (or passes it through when it
//! has one node), and (d) propagates top-down back to the comparison layer.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mlp::{Activation, AffineStack};
use crate::numerics::{ParameterStore, PoolKind, Real, Tape, ValueId};
use crate::topology::{build_hierarchy, HierTopology, LayerConfig};

/// How latent nodes are initialized from their children.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitMode {
    SelfAttention,
    Avg,
    Max,
}

impl InitMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InitMode::SelfAttention => "self-attention",
            InitMode::Avg => "avg",
            InitMode::Max => "max",
        }
    }
}

impl std::str::FromStr for InitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "self-attention" => Ok(InitMode::SelfAttention),
            "avg" => Ok(InitMode::Avg),
            "max" => Ok(InitMode::Max),
            other => Err(Error::config(format!(
                "unknown init mode '{other}' (want self-attention|avg|max)"
            ))),
        }
    }
}

/// What the bottom-up aggregation reads from the layer below: the already
/// abstracted comprehensive features (default), or the raw transformed
/// messages exactly as the update equation prints them. The two differ only
/// for L >= 2.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerInputMode {
    Comprehensive,
    LiteralMessage,
}

impl LowerInputMode {
    pub fn as_str(self) -> &'static str {
        match self {
            LowerInputMode::Comprehensive => "comprehensive",
            LowerInputMode::LiteralMessage => "literal-message",
        }
    }
}

impl std::str::FromStr for LowerInputMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comprehensive" => Ok(LowerInputMode::Comprehensive),
            "literal-message" => Ok(LowerInputMode::LiteralMessage),
            other => Err(Error::config(format!(
                "unknown lower input mode '{other}' (want comprehensive|literal-message)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HRgnConfig {
    pub d: usize,
    pub subject_count: usize,
    /// Latent layer widths N_1..N_L.
    pub latent_widths: Vec<usize>,
    /// Per-step feature widths F_1..F_K.
    pub dims: Vec<usize>,
    pub aggre_pool: PoolKind,
    pub init_mode: InitMode,
    pub lower_input_mode: LowerInputMode,
    /// Hidden width of the attention scorer.
    pub att_hidden: usize,
    pub head_hidden: Vec<usize>,
}

impl HRgnConfig {
    pub fn new(d: usize) -> Self {
        HRgnConfig {
            d,
            subject_count: 2,
            latent_widths: vec![128, 16],
            dims: vec![512, 4],
            aggre_pool: PoolKind::Avg,
            init_mode: InitMode::SelfAttention,
            lower_input_mode: LowerInputMode::Comprehensive,
            att_hidden: 8,
            head_hidden: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.dims.len()
    }

    pub fn feature_dim(&self, k: usize) -> usize {
        if k == 0 {
            self.subject_count
        } else {
            self.dims[k - 1]
        }
    }

    /// Widths [N_0, N_1, ..., N_L] with N_0 = D.
    pub fn layer_config(&self) -> Result<LayerConfig> {
        let mut counts = Vec::with_capacity(self.latent_widths.len() + 1);
        counts.push(self.d);
        counts.extend_from_slice(&self.latent_widths);
        LayerConfig::new(counts)
    }

    /// Total node count over all layers, times F_K: the head input width.
    pub fn head_input(&self) -> Result<usize> {
        Ok(self.layer_config()?.total_nodes() * self.dims[self.k() - 1])
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::config("hrgn: d must be positive"));
        }
        if !(2..=3).contains(&self.subject_count) {
            return Err(Error::config(format!(
                "hrgn: subject_count must be 2 or 3, got {}",
                self.subject_count
            )));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::config(format!(
                "hrgn: invalid layer dims {:?}",
                self.dims
            )));
        }
        if self.att_hidden == 0 {
            return Err(Error::config("hrgn: att_hidden must be positive"));
        }
        self.layer_config().map(|_| ())
    }
}

/// The latent-width presets the default configurations cycle through,
/// keyed by number of latent layers.
pub fn latent_presets() -> Vec<Vec<usize>> {
    vec![
        vec![32],
        vec![128, 16],
        vec![128, 32, 8],
        vec![128, 32, 8, 2],
    ]
}

/// Per-layer node feature matrices (`N_l x F_k`) after some step.
#[derive(Clone, Debug)]
pub struct HierState {
    pub layers: Vec<ValueId>,
    pub step: usize,
}

/// Softmax attention weights of one child group, recorded for inspection.
#[derive(Clone, Copy, Debug)]
pub struct AttentionGroup {
    pub layer: usize,
    pub parent: usize,
    pub weights: ValueId,
}

#[derive(Clone, Debug)]
pub struct HRgn {
    cfg: HRgnConfig,
    topo: HierTopology,
}

impl HRgn {
    pub fn new(cfg: HRgnConfig) -> Result<Self> {
        cfg.validate()?;
        let topo = build_hierarchy(&cfg.layer_config()?)?;
        Ok(HRgn { cfg, topo })
    }

    pub fn config(&self) -> &HRgnConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &HierTopology {
        &self.topo
    }

    fn attention(&self) -> AffineStack {
        AffineStack {
            prefix: "hrgn.att".into(),
            input: self.cfg.subject_count,
            hidden: vec![self.cfg.att_hidden],
            output: 1,
            activation: Activation::Tanh,
        }
    }

    fn head(&self) -> Result<AffineStack> {
        Ok(AffineStack {
            prefix: "hrgn.head".into(),
            input: self.cfg.head_input()?,
            hidden: self.cfg.head_hidden.clone(),
            output: 1,
            activation: Activation::Relu,
        })
    }

    pub fn add_params<T: Real>(
        &self,
        store: &mut ParameterStore<T>,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        use crate::numerics::init::{init_params_from, InitScheme};
        if self.cfg.init_mode == InitMode::SelfAttention {
            self.attention().add_params(store, rng)?;
        }
        for k in 1..=self.cfg.k() {
            let (f_prev, f) = (self.cfg.feature_dim(k - 1), self.cfg.feature_dim(k));
            store.insert(
                format!("hrgn.layer{k}.u_trans"),
                init_params_from(&[f_prev, f], InitScheme::XavierUniform, rng),
            )?;
            store.insert(
                format!("hrgn.layer{k}.u_up"),
                init_params_from(&[2 * f, f], InitScheme::XavierUniform, rng),
            )?;
            store.insert(
                format!("hrgn.layer{k}.u_down"),
                init_params_from(&[2 * f, f], InitScheme::XavierUniform, rng),
            )?;
        }
        self.head()?.add_params(store, rng)
    }

    /// Step-0 initialization: the comparison layer pairs feature values
    /// dimension-wise, then each latent layer combines its child groups,
    /// layer by layer.
    pub fn init_hier<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParameterStore<T>,
        gx: ValueId,
        gy: ValueId,
        gz: Option<ValueId>,
    ) -> Result<HierState> {
        Ok(self.init_hier_traced(tape, store, gx, gy, gz)?.0)
    }

    /// Same, also returning every attention group's softmax weights (empty
    /// for the pooling init modes).
    pub fn init_hier_traced<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParameterStore<T>,
        gx: ValueId,
        gy: ValueId,
        gz: Option<ValueId>,
    ) -> Result<(HierState, Vec<AttentionGroup>)> {
        let d = self.cfg.d;
        for (name, id) in [("gx", Some(gx)), ("gy", Some(gy)), ("gz", gz)] {
            if let Some(id) = id {
                let shape = tape.value(id).shape();
                if shape != [1, d] {
                    return Err(Error::shape(format!(
                        "hrgn: input {name} must be 1 x {d}, got {shape:?}"
                    )));
                }
            }
        }
        match (self.cfg.subject_count, gz) {
            (2, None) | (3, Some(_)) => {}
            (3, None) => return Err(Error::shape("hrgn: tri-subject model needs a third input")),
            (2, Some(_)) => return Err(Error::shape("hrgn: pair model got a third input")),
            _ => unreachable!("subject_count validated to 2 or 3"),
        }

        let mut columns = Vec::with_capacity(self.cfg.subject_count);
        for id in [Some(gx), Some(gy), gz].into_iter().flatten() {
            columns.push(tape.reshape(id, &[d, 1])?);
        }
        let mut layers = vec![tape.concat(&columns, 1)?];
        let mut attention_groups = Vec::new();

        let att = self.attention();
        for l in 1..=self.topo.latent_layers() {
            let prev = layers[l - 1];
            let mut nodes = Vec::with_capacity(self.topo.width(l));
            for parent in 0..self.topo.width(l) {
                let range = self.topo.children_of(l, parent)?;
                let group = tape.slice_rows(prev, range.start, range.len())?;
                let node = match self.cfg.init_mode {
                    InitMode::SelfAttention => {
                        let scores = att.forward(tape, store, group)?;
                        let flat = tape.reshape(scores, &[range.len()])?;
                        let weights = tape.softmax(flat)?;
                        attention_groups.push(AttentionGroup {
                            layer: l,
                            parent,
                            weights,
                        });
                        let wrow = tape.reshape(weights, &[1, range.len()])?;
                        tape.matmul(wrow, group)?
                    }
                    InitMode::Avg => {
                        let pooled = tape.pool(PoolKind::Avg, group)?;
                        tape.reshape(pooled, &[1, self.cfg.subject_count])?
                    }
                    InitMode::Max => {
                        let pooled = tape.pool(PoolKind::Max, group)?;
                        tape.reshape(pooled, &[1, self.cfg.subject_count])?
                    }
                };
                nodes.push(node);
            }
            layers.push(tape.concat(&nodes, 0)?);
        }
        Ok((HierState { layers, step: 0 }, attention_groups))
    }

    /// One full message-passing step (transform, bottom-up, top mixing,
    /// top-down), taking the state from step k-1 to step k.
    pub fn step<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParameterStore<T>,
        state: &HierState,
        k: usize,
    ) -> Result<HierState> {
        let levels = self.topo.latent_layers();
        let f_prev = self.cfg.feature_dim(k - 1);
        let f = self.cfg.feature_dim(k);
        if tape.value(state.layers[0]).shape() != [self.cfg.d, f_prev] {
            return Err(Error::shape(format!(
                "hrgn step {k}: expected layer-0 {} x {f_prev}, got {:?}",
                self.cfg.d,
                tape.value(state.layers[0]).shape()
            )));
        }
        let u_trans = tape.param(store, &format!("hrgn.layer{k}.u_trans"))?;
        let u_up = tape.param(store, &format!("hrgn.layer{k}.u_up"))?;
        let u_down = tape.param(store, &format!("hrgn.layer{k}.u_down"))?;

        // (a) transform every node in every layer with the shared matrix.
        let mut transformed = Vec::with_capacity(levels + 1);
        for &layer in &state.layers {
            let m = tape.matmul(layer, u_trans)?;
            transformed.push(tape.relu(m));
        }

        // (b) bottom-up abstraction into comprehensive features.
        let mut comprehensive = vec![transformed[0]];
        for l in 1..=levels {
            let lower = match self.cfg.lower_input_mode {
                LowerInputMode::Comprehensive => comprehensive[l - 1],
                LowerInputMode::LiteralMessage => transformed[l - 1],
            };
            let mut nodes = Vec::with_capacity(self.topo.width(l));
            for parent in 0..self.topo.width(l) {
                let range = self.topo.children_of(l, parent)?;
                let group = tape.slice_rows(lower, range.start, range.len())?;
                let pooled = tape.pool(self.cfg.aggre_pool, group)?;
                let agg = tape.reshape(pooled, &[1, f])?;
                let own = tape.row(transformed[l], parent)?;
                let cat = tape.concat(&[own, agg], 1)?;
                let lin = tape.matmul(cat, u_up)?;
                nodes.push(tape.relu(lin));
            }
            comprehensive.push(tape.concat(&nodes, 0)?);
        }

        // (c) top layer: pass through a single node, otherwise mix with raw
        // cosine weights (the self term keeps weight 1).
        let top = if self.topo.width(levels) == 1 {
            comprehensive[levels]
        } else {
            Self::mix_top(tape, comprehensive[levels])?
        };

        // (d) top-down propagation back to the comparison layer, built from
        // the top so each layer can read its parents' fresh features.
        let mut updated_rev = vec![top];
        for l in (0..levels).rev() {
            let parent_layer = *updated_rev.last().unwrap();
            let mut blocks = Vec::with_capacity(self.topo.width(l + 1));
            for parent in 0..self.topo.width(l + 1) {
                let range = self.topo.children_of(l + 1, parent)?;
                let kids = tape.slice_rows(comprehensive[l], range.start, range.len())?;
                let par = tape.row(parent_layer, parent)?;
                let par_rows = tape.broadcast_rows(par, range.len())?;
                let cat = tape.concat(&[kids, par_rows], 1)?;
                let lin = tape.matmul(cat, u_down)?;
                blocks.push(tape.relu(lin));
            }
            updated_rev.push(tape.concat(&blocks, 0)?);
        }
        updated_rev.reverse();

        Ok(HierState {
            layers: updated_rev,
            step: k,
        })
    }

    /// Pairwise mixing of the top layer's rows: each output row is the sum
    /// of all rows weighted by cosine similarity to the target row,
    /// including the target itself.
    fn mix_top<T: Real>(tape: &mut Tape<T>, c_top: ValueId) -> Result<ValueId> {
        let n_top = tape.value(c_top).shape()[0];
        let mut rows = Vec::with_capacity(n_top);
        for n in 0..n_top {
            let target = tape.row(c_top, n)?;
            let mut acc: Option<ValueId> = None;
            for s in 0..n_top {
                let other = tape.row(c_top, s)?;
                let w = tape.cosine(target, other)?;
                let term = tape.scale(w, other)?;
                acc = Some(match acc {
                    Some(a) => tape.add(a, term)?,
                    None => term,
                });
            }
            rows.push(acc.expect("at least one row"));
        }
        tape.concat(&rows, 0)
    }

    /// Full forward pass to a single logit. Inputs are `1 x D` rows.
    pub fn logit<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParameterStore<T>,
        gx: ValueId,
        gy: ValueId,
        gz: Option<ValueId>,
    ) -> Result<ValueId> {
        let mut state = self.init_hier(tape, store, gx, gy, gz)?;
        for k in 1..=self.cfg.k() {
            state = self.step(tape, store, &state, k)?;
        }
        let f_k = self.cfg.feature_dim(self.cfg.k());
        let mut parts = Vec::with_capacity(state.layers.len());
        for (l, &layer) in state.layers.iter().enumerate() {
            parts.push(tape.reshape(layer, &[1, self.topo.width(l) * f_k])?);
        }
        let readout = tape.concat(&parts, 1)?;
        self.head()?.forward(tape, store, readout)
    }

    /// MAC counts per stage for one pair: attention init (when enabled),
    /// K message-passing steps, and the head. Cosine mixing and pooling
    /// contribute no affine multiplies.
    pub(crate) fn mac_stages(&self) -> Result<Vec<(String, u64)>> {
        let levels = self.topo.latent_layers();
        let counts = self.topo.layer_config().node_counts();
        let total_nodes: u64 = counts.iter().map(|&n| n as u64).sum();
        let child_nodes: u64 = counts[..levels].iter().map(|&n| n as u64).sum();
        let latent_nodes: u64 = counts[1..].iter().map(|&n| n as u64).sum();

        let mut stages = Vec::new();
        if self.cfg.init_mode == InitMode::SelfAttention {
            stages.push(("init-attention".into(), self.attention().macs(child_nodes)));
        }
        for k in 1..=self.cfg.k() {
            let (f_prev, f) = (
                self.cfg.feature_dim(k - 1) as u64,
                self.cfg.feature_dim(k) as u64,
            );
            stages.push((format!("step{k}.trans"), total_nodes * f_prev * f));
            stages.push((format!("step{k}.up"), latent_nodes * (2 * f) * f));
            stages.push((format!("step{k}.down"), child_nodes * (2 * f) * f));
        }
        stages.push(("head".into(), self.head()?.macs(1)));
        Ok(stages)
    }
}
