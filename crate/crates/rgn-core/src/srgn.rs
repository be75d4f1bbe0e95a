//! Star-shaped reasoning graph network.
//!
//! Each of the D surrounding nodes starts as the pair (or triple) of
//! feature values at one dimension; a single central node mediates all
//! interaction. One layer transforms every node into a message with a
//! shared matrix, updates surrounding nodes from `[own message || central
//! message]`, and updates the center from `[central message || pooled
//! surrounding messages]`. After K layers the concatenated node features
//! (center first) feed an affine head that emits one logit.

use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mlp::{Activation, AffineStack};
use crate::numerics::{ParameterStore, PoolKind, Real, Tape, ValueId};
use crate::topology::StarTopology;

#[derive(Clone, Debug, PartialEq)]
pub struct SRgnConfig {
    /// Feature dimension D (one surrounding node per dimension).
    pub d: usize,
    /// 2 for pair verification, 3 for tri-subject.
    pub subject_count: usize,
    /// Per-layer feature widths F_1..F_K.
    pub dims: Vec<usize>,
    /// Central-node initialization pooling.
    pub init_pool: PoolKind,
    /// Incoming-message aggregation pooling.
    pub aggre_pool: PoolKind,
    /// Give the central node its own message matrix instead of sharing
    /// the surrounding one (ablation switch; default shared).
    pub untie_central_message: bool,
    /// Hidden widths of the readout head; empty = single affine map.
    pub head_hidden: Vec<usize>,
}

impl SRgnConfig {
    pub fn new(d: usize) -> Self {
        SRgnConfig {
            d,
            subject_count: 2,
            dims: vec![512, 4],
            init_pool: PoolKind::Avg,
            aggre_pool: PoolKind::Max,
            untie_central_message: false,
            head_hidden: Vec::new(),
        }
    }

    /// Layer count K.
    pub fn k(&self) -> usize {
        self.dims.len()
    }

    /// F_k for k in 0..=K; F_0 is the subject count.
    pub fn feature_dim(&self, k: usize) -> usize {
        if k == 0 {
            self.subject_count
        } else {
            self.dims[k - 1]
        }
    }

    /// Width of the concatenated readout: (D + 1) * F_K.
    pub fn head_input(&self) -> usize {
        (self.d + 1) * self.dims[self.k() - 1]
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::config("srgn: d must be positive"));
        }
        if !(2..=3).contains(&self.subject_count) {
            return Err(Error::config(format!(
                "srgn: subject_count must be 2 or 3, got {}",
                self.subject_count
            )));
        }
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(Error::config(format!(
                "srgn: invalid layer dims {:?}",
                self.dims
            )));
        }
        Ok(())
    }
}

/// Node features after some number of message-passing steps.
#[derive(Clone, Copy, Debug)]
pub struct StarState {
    /// `D x F_k` matrix, row d = surrounding node d.
    pub surrounding: ValueId,
    /// `1 x F_k` central node feature.
    pub central: ValueId,
    pub step: usize,
}

#[derive(Clone, Debug)]
pub struct SRgn {
    cfg: SRgnConfig,
    topo: StarTopology,
}

impl SRgn {
    pub fn new(cfg: SRgnConfig) -> Result<Self> {
        cfg.validate()?;
        let topo = StarTopology::new(cfg.d)?;
        Ok(SRgn { cfg, topo })
    }

    pub fn topology(&self) -> StarTopology {
        self.topo
    }

    pub fn config(&self) -> &SRgnConfig {
        &self.cfg
    }

    fn head(&self) -> AffineStack {
        AffineStack {
            prefix: "srgn.head".into(),
            input: self.cfg.head_input(),
            hidden: self.cfg.head_hidden.clone(),
            output: 1,
            activation: Activation::Relu,
        }
    }

    /// Register all learnable weights, drawing from `rng` in a fixed order.
    pub fn add_params<T: Real>(
        &self,
        store: &mut ParameterStore<T>,
        rng: &mut ChaCha8Rng,
    ) -> Result<()> {
        use crate::numerics::init::{init_params_from, InitScheme};
        for k in 1..=self.cfg.k() {
            let (f_prev, f) = (self.cfg.feature_dim(k - 1), self.cfg.feature_dim(k));
            store.insert(
                format!("srgn.layer{k}.w_mess"),
                init_params_from(&[f_prev, f], InitScheme::XavierUniform, rng),
            )?;
            if self.cfg.untie_central_message {
                store.insert(
                    format!("srgn.layer{k}.w_mess_c"),
                    init_params_from(&[f_prev, f], InitScheme::XavierUniform, rng),
                )?;
            }
            store.insert(
                format!("srgn.layer{k}.w_surr"),
                init_params_from(&[2 * f, f], InitScheme::XavierUniform, rng),
            )?;
            store.insert(
                format!("srgn.layer{k}.w_cen"),
                init_params_from(&[2 * f, f], InitScheme::XavierUniform, rng),
            )?;
        }
        self.head().add_params(store, rng)
    }

    fn check_input<T: Real>(&self, tape: &Tape<T>, id: ValueId, name: &str) -> Result<()> {
        let shape = tape.value(id).shape();
        if shape != [1, self.cfg.d] {
            return Err(Error::shape(format!(
                "srgn: input {name} must be 1 x {}, got {:?}",
                self.cfg.d, shape
            )));
        }
        Ok(())
    }

    /// Build the step-0 state: surrounding node d holds the values of
    /// feature dimension d across all subjects; the center pools them.
    pub fn init_star<T: Real>(
        &self,
        tape: &mut Tape<T>,
        gx: ValueId,
        gy: ValueId,
        gz: Option<ValueId>,
    ) -> Result<StarState> {
        self.check_input(tape, gx, "gx")?;
        self.check_input(tape, gy, "gy")?;
        match (self.cfg.subject_count, gz) {
            (2, None) | (3, Some(_)) => {}
            (3, None) => return Err(Error::shape("srgn: tri-subject model needs a third input")),
            (2, Some(_)) => return Err(Error::shape("srgn: pair model got a third input")),
            _ => unreachable!("subject_count validated to 2 or 3"),
        }
        let d = self.cfg.d;
        let mut columns = Vec::with_capacity(self.cfg.subject_count);
        for id in [Some(gx), Some(gy), gz].into_iter().flatten() {
            self.check_input(tape, id, "input")?;
            columns.push(tape.reshape(id, &[d, 1])?);
        }
        let surrounding = tape.concat(&columns, 1)?;
        let pooled = tape.pool(self.cfg.init_pool, surrounding)?;
        let central = tape.reshape(pooled, &[1, self.cfg.subject_count])?;
        Ok(StarState {
            surrounding,
            central,
            step: 0,
        })
    }

    /// One message-passing step, taking the state from step k-1 to step k.
    pub fn layer<T: Real>(
        &self,
        tape: &mut Tape<T>,
        store: &ParameterStore<T>,
        state: &StarState,
        k: usize,
    ) -> Result<StarState> {
        let f_prev = self.cfg.feature_dim(k - 1);
        if tape.value(state.surrounding).shape() != [self.cfg.d, f_prev] {
            return Err(Error::shape(format!(
                "srgn layer {k}: expected surrounding {} x {f_prev}, got {:?}",
                self.cfg.d,
                tape.value(state.surrounding).shape()
            )));
        }
        let w_mess = tape.param(store, &format!("srgn.layer{k}.w_mess"))?;
        let w_mess_c = if self.cfg.untie_central_message {
            tape.param(store, &format!("srgn.layer{k}.w_mess_c"))?
        } else {
            w_mess
        };
        let w_surr = tape.param(store, &format!("srgn.layer{k}.w_surr"))?;
        let w_cen = tape.param(store, &format!("srgn.layer{k}.w_cen"))?;

        // Messages for every surrounding node and the center.
        let mm = tape.matmul(state.surrounding, w_mess)?;
        let m_surr = tape.relu(mm);
        let mc = tape.matmul(state.central, w_mess_c)?;
        let m_cen = tape.relu(mc);

        // Surrounding update from [own message || central message].
        let m_cen_rows = tape.broadcast_rows(m_cen, self.cfg.d)?;
        let cat_surr = tape.concat(&[m_surr, m_cen_rows], 1)?;
        let ms = tape.matmul(cat_surr, w_surr)?;
        let surrounding = tape.relu(ms);

        // Central update from [central message || aggregated messages].
        let pooled = tape.pool(self.cfg.aggre_pool, m_surr)?;
        let f = self.cfg.feature_dim(k);
        let m_agg = tape.reshape(pooled, &[1, f])?;
        let cat_cen = tape.concat(&[m_cen, m_agg], 1)?;
        let mc2 = tape.matmul(cat_cen, w_cen)?;
        let central = tape.relu(mc2);

        Ok(StarState {
            surrounding,
            central,
            step: k,
        })
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
        let mut state = self.init_star(tape, gx, gy, gz)?;
        for k in 1..=self.cfg.k() {
            state = self.layer(tape, store, &state, k)?;
        }
        // Readout order: central node first, then surrounding nodes in
        // dimension order (row-major flatten).
        let f_k = self.cfg.feature_dim(self.cfg.k());
        let flat = tape.reshape(state.surrounding, &[1, self.cfg.d * f_k])?;
        let readout = tape.concat(&[state.central, flat], 1)?;
        self.head().forward(tape, store, readout)
    }

    /// MAC counts per weight matrix for one pair: K message-passing steps
    /// plus the head (initialization is pooling only, so it never
    /// multiplies).
    pub(crate) fn mac_stages(&self) -> Vec<(String, u64)> {
        let d = self.cfg.d as u64;
        let mut stages = Vec::new();
        for k in 1..=self.cfg.k() {
            let (f_prev, f) = (
                self.cfg.feature_dim(k - 1) as u64,
                self.cfg.feature_dim(k) as u64,
            );
            // w_mess applies to the D surrounding nodes plus the center.
            stages.push((format!("step{k}.mess"), (d + 1) * f_prev * f));
            stages.push((format!("step{k}.surr"), d * (2 * f) * f));
            stages.push((format!("step{k}.cen"), (2 * f) * f));
        }
        stages.push(("head".into(), self.head().macs(1)));
        stages
    }
}
