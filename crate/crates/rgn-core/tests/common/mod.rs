//! Independent straight-line oracles for the integration suites.
//!
//! Everything here recomputes the model forward passes (and the hierarchy
//! adjacency) with plain per-node f64 loops, reading weights from the
//! parameter store by name. No tape, no topology helpers: these paths
//! share nothing with the implementation they check.

#![allow(dead_code)]
#![allow(clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rgn_core::hrgn::HRgn;
use rgn_core::hrgn::{HRgnConfig, InitMode, LowerInputMode};
use rgn_core::numerics::{ParameterStore, PoolKind};
use rgn_core::numerics::{Tape, Tensor};
use rgn_core::srgn::SRgn;
use rgn_core::srgn::SRgnConfig;

/// Row-major weight matrix snapshot.
#[derive(Clone, Debug)]
pub struct Mat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Mat {
    pub fn from_store(store: &ParameterStore<f64>, name: &str) -> Mat {
        let t = store.get(name).unwrap();
        assert!(t.rank() <= 2, "{name} has rank {}", t.rank());
        let (rows, cols) = if t.rank() == 2 {
            (t.shape()[0], t.shape()[1])
        } else {
            (1, t.shape()[0])
        };
        Mat {
            rows,
            cols,
            data: t.to_f64_vec(),
        }
    }

    /// `W^T h` for a column vector `h` of length `rows`.
    pub fn t_vec(&self, h: &[f64]) -> Vec<f64> {
        assert_eq!(h.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for j in 0..self.cols {
            let mut acc = 0.0;
            for p in 0..self.rows {
                acc += h[p] * self.data[p * self.cols + j];
            }
            out[j] = acc;
        }
        out
    }
}

pub fn relu_vec(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| if x > 0.0 { x } else { 0.0 }).collect()
}

pub fn concat2(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = a.to_vec();
    out.extend_from_slice(b);
    out
}

/// Elementwise pooling over a set of equal-length vectors.
pub fn pool_vecs(kind: PoolKind, rows: &[Vec<f64>]) -> Vec<f64> {
    let f = rows[0].len();
    let mut out = vec![0.0; f];
    match kind {
        PoolKind::Max => {
            for j in 0..f {
                let mut best = rows[0][j];
                for r in rows.iter().skip(1) {
                    if r[j] > best {
                        best = r[j];
                    }
                }
                out[j] = best;
            }
        }
        PoolKind::Avg => {
            for j in 0..f {
                let mut acc = 0.0;
                for r in rows {
                    acc += r[j];
                }
                out[j] = acc / rows.len() as f64;
            }
        }
    }
    out
}

pub fn cosine_vec(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    let (na, nb) = (na.sqrt(), nb.sqrt());
    if na < 1e-12 || nb < 1e-12 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Affine stack `prefix.l{i}.weight/bias` with the given hidden activation
/// between layers.
pub fn mlp_forward(
    store: &ParameterStore<f64>,
    prefix: &str,
    n_layers: usize,
    tanh_hidden: bool,
    x: &[f64],
) -> Vec<f64> {
    let mut cur = x.to_vec();
    for i in 1..=n_layers {
        let w = Mat::from_store(store, &format!("{prefix}.l{i}.weight"));
        let b = Mat::from_store(store, &format!("{prefix}.l{i}.bias"));
        let mut y = w.t_vec(&cur);
        for (yj, bj) in y.iter_mut().zip(&b.data) {
            *yj += bj;
        }
        if i < n_layers {
            cur = if tanh_hidden {
                y.iter().map(|v| v.tanh()).collect()
            } else {
                relu_vec(&y)
            };
        } else {
            cur = y;
        }
    }
    cur
}

fn head_layers(store: &ParameterStore<f64>, prefix: &str) -> usize {
    (1..)
        .take_while(|i| store.contains(&format!("{prefix}.l{i}.weight")))
        .count()
}

/// Literal transcription of the star-graph forward pass.
pub fn oracle_srgn_forward(
    gx: &[f64],
    gy: &[f64],
    gz: Option<&[f64]>,
    store: &ParameterStore<f64>,
    cfg: &SRgnConfig,
) -> f64 {
    let d = cfg.d;
    // Surrounding node d pairs the d-th value of every subject.
    let mut h: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut node = vec![gx[i], gy[i]];
            if let Some(gz) = gz {
                node.push(gz[i]);
            }
            node
        })
        .collect();
    let mut h_c = pool_vecs(cfg.init_pool, &h);

    for k in 1..=cfg.k() {
        let w_mess = Mat::from_store(store, &format!("srgn.layer{k}.w_mess"));
        let w_mess_c = if cfg.untie_central_message {
            Mat::from_store(store, &format!("srgn.layer{k}.w_mess_c"))
        } else {
            w_mess.clone()
        };
        let w_surr = Mat::from_store(store, &format!("srgn.layer{k}.w_surr"));
        let w_cen = Mat::from_store(store, &format!("srgn.layer{k}.w_cen"));

        let m: Vec<Vec<f64>> = h.iter().map(|hd| relu_vec(&w_mess.t_vec(hd))).collect();
        let m_c = relu_vec(&w_mess_c.t_vec(&h_c));
        h = m
            .iter()
            .map(|md| relu_vec(&w_surr.t_vec(&concat2(md, &m_c))))
            .collect();
        let m_a = pool_vecs(cfg.aggre_pool, &m);
        h_c = relu_vec(&w_cen.t_vec(&concat2(&m_c, &m_a)));
    }

    let mut readout = h_c;
    for hd in &h {
        readout.extend_from_slice(hd);
    }
    let n_layers = head_layers(store, "srgn.head");
    mlp_forward(store, "srgn.head", n_layers, false, &readout)[0]
}

/// 0/1 adjacency between adjacent layers, evaluated directly from the
/// piecewise predicates (1-based node indices inside).
pub fn adjacency_from_equations(n_prev: usize, n_cur: usize) -> Vec<Vec<bool>> {
    let c = n_prev % n_cur;
    let ceil = n_prev.div_ceil(n_cur);
    let floor = n_prev / n_cur;
    let mut a = vec![vec![false; n_cur]; n_prev];
    for (i, row) in a.iter_mut().enumerate() {
        let low = i + 1; // 1-based lower index
        for (p, cell) in row.iter_mut().enumerate() {
            let up = p + 1; // 1-based upper index
            *cell = if up <= c {
                ceil * (up - 1) < low && low <= ceil * up
            } else {
                let shifted = low as i64 - c as i64;
                ((floor * (up - 1)) as i64) < shifted && shifted <= (floor * up) as i64
            };
        }
    }
    a
}

/// Children (0-based) of upper node `p` per the predicate adjacency.
pub fn oracle_children(a: &[Vec<bool>], p: usize) -> Vec<usize> {
    (0..a.len()).filter(|&i| a[i][p]).collect()
}

/// Parent (0-based) of lower node `i` per the predicate adjacency.
pub fn oracle_parent(a: &[Vec<bool>], i: usize) -> usize {
    let parents: Vec<usize> = (0..a[i].len()).filter(|&p| a[i][p]).collect();
    assert_eq!(parents.len(), 1, "lower node {i} has parents {parents:?}");
    parents[0]
}

/// Literal transcription of the hierarchical forward pass.
pub fn oracle_hrgn_forward(
    gx: &[f64],
    gy: &[f64],
    gz: Option<&[f64]>,
    store: &ParameterStore<f64>,
    cfg: &HRgnConfig,
) -> f64 {
    let d = cfg.d;
    let levels = cfg.latent_widths.len();
    let mut widths = vec![d];
    widths.extend_from_slice(&cfg.latent_widths);
    let adj: Vec<Vec<Vec<bool>>> = (1..=levels)
        .map(|l| adjacency_from_equations(widths[l - 1], widths[l]))
        .collect();

    // Step-0 features, layer by layer.
    let mut h: Vec<Vec<Vec<f64>>> = Vec::with_capacity(levels + 1);
    h.push(
        (0..d)
            .map(|i| {
                let mut node = vec![gx[i], gy[i]];
                if let Some(gz) = gz {
                    node.push(gz[i]);
                }
                node
            })
            .collect(),
    );
    for l in 1..=levels {
        let mut layer = Vec::with_capacity(widths[l]);
        for p in 0..widths[l] {
            let kids = oracle_children(&adj[l - 1], p);
            let child_feats: Vec<Vec<f64>> = kids.iter().map(|&s| h[l - 1][s].clone()).collect();
            let node = match cfg.init_mode {
                InitMode::SelfAttention => {
                    let scores: Vec<f64> = child_feats
                        .iter()
                        .map(|f| mlp_forward(store, "hrgn.att", 2, true, f)[0])
                        .collect();
                    let total: f64 = scores.iter().map(|s| s.exp()).sum();
                    let mut node = vec![0.0; child_feats[0].len()];
                    for (s, feat) in scores.iter().zip(&child_feats) {
                        let w = s.exp() / total;
                        for (nj, fj) in node.iter_mut().zip(feat) {
                            *nj += w * fj;
                        }
                    }
                    node
                }
                InitMode::Avg => pool_vecs(PoolKind::Avg, &child_feats),
                InitMode::Max => pool_vecs(PoolKind::Max, &child_feats),
            };
            layer.push(node);
        }
        h.push(layer);
    }

    for k in 1..=cfg.k() {
        let u_trans = Mat::from_store(store, &format!("hrgn.layer{k}.u_trans"));
        let u_up = Mat::from_store(store, &format!("hrgn.layer{k}.u_up"));
        let u_down = Mat::from_store(store, &format!("hrgn.layer{k}.u_down"));

        // (a) shared transform on every node of every layer.
        let m: Vec<Vec<Vec<f64>>> = h
            .iter()
            .map(|layer| layer.iter().map(|n| relu_vec(&u_trans.t_vec(n))).collect())
            .collect();

        // (b) bottom-up comprehensive features.
        let mut c: Vec<Vec<Vec<f64>>> = vec![m[0].clone()];
        for l in 1..=levels {
            let mut layer = Vec::with_capacity(widths[l]);
            for p in 0..widths[l] {
                let kids = oracle_children(&adj[l - 1], p);
                let lower: Vec<Vec<f64>> = kids
                    .iter()
                    .map(|&s| match cfg.lower_input_mode {
                        LowerInputMode::Comprehensive => c[l - 1][s].clone(),
                        LowerInputMode::LiteralMessage => m[l - 1][s].clone(),
                    })
                    .collect();
                let agg = pool_vecs(cfg.aggre_pool, &lower);
                layer.push(relu_vec(&u_up.t_vec(&concat2(&m[l][p], &agg))));
            }
            c.push(layer);
        }

        // (c) top layer: pass-through or raw cosine mixing.
        let n_top = widths[levels];
        let top: Vec<Vec<f64>> = if n_top == 1 {
            c[levels].clone()
        } else {
            (0..n_top)
                .map(|n| {
                    let mut acc = vec![0.0; c[levels][n].len()];
                    for s in 0..n_top {
                        let w = cosine_vec(&c[levels][n], &c[levels][s]);
                        for (aj, cj) in acc.iter_mut().zip(&c[levels][s]) {
                            *aj += w * cj;
                        }
                    }
                    acc
                })
                .collect()
        };

        // (d) top-down propagation.
        let mut new_h = vec![Vec::new(); levels + 1];
        new_h[levels] = top;
        for l in (0..levels).rev() {
            let mut layer = Vec::with_capacity(widths[l]);
            for i in 0..widths[l] {
                let parent = oracle_parent(&adj[l], i);
                let cat = concat2(&c[l][i], &new_h[l + 1][parent]);
                layer.push(relu_vec(&u_down.t_vec(&cat)));
            }
            new_h[l] = layer;
        }
        h = new_h;
    }

    let mut readout = Vec::new();
    for layer in &h {
        for node in layer {
            readout.extend_from_slice(node);
        }
    }
    let n_layers = head_layers(store, "hrgn.head");
    mlp_forward(store, "hrgn.head", n_layers, false, &readout)[0]
}

/// Stable sigmoid used by score-level oracles.
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

pub fn srgn_logit(
    model: &SRgn,
    store: &ParameterStore<f64>,
    gx: &[f64],
    gy: &[f64],
    gz: Option<&[f64]>,
) -> f64 {
    let mut tape = Tape::new();
    let ix = tape.constant(Tensor::new(gx.to_vec(), vec![1, gx.len()]).unwrap());
    let iy = tape.constant(Tensor::new(gy.to_vec(), vec![1, gy.len()]).unwrap());
    let iz = gz.map(|v| tape.constant(Tensor::new(v.to_vec(), vec![1, v.len()]).unwrap()));
    let logit = model.logit(&mut tape, store, ix, iy, iz).unwrap();
    tape.value(logit).item().unwrap()
}

pub fn hrgn_logit(
    model: &HRgn,
    store: &ParameterStore<f64>,
    gx: &[f64],
    gy: &[f64],
    gz: Option<&[f64]>,
) -> f64 {
    let mut tape = Tape::new();
    let ix = tape.constant(Tensor::new(gx.to_vec(), vec![1, gx.len()]).unwrap());
    let iy = tape.constant(Tensor::new(gy.to_vec(), vec![1, gy.len()]).unwrap());
    let iz = gz.map(|v| tape.constant(Tensor::new(v.to_vec(), vec![1, v.len()]).unwrap()));
    let logit = model.logit(&mut tape, store, ix, iy, iz).unwrap();
    tape.value(logit).item().unwrap()
}

pub fn seeded_store<F>(seed: u64, add: F) -> ParameterStore<f64>
where
    F: FnOnce(&mut ParameterStore<f64>, &mut ChaCha8Rng),
{
    let mut store = ParameterStore::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add(&mut store, &mut rng);
    store
}

/// One random tiny S-RGN instance checked against the oracle.
pub fn check_srgn_instance(rng: &mut ChaCha8Rng, tri: bool) -> f64 {
    let d = rng.random_range(2..=8);
    let k = rng.random_range(1..=2);
    let dims: Vec<usize> = (0..k).map(|_| rng.random_range(1..=6)).collect();
    let cfg = SRgnConfig {
        d,
        subject_count: if tri { 3 } else { 2 },
        dims,
        init_pool: if rng.random::<bool>() {
            PoolKind::Avg
        } else {
            PoolKind::Max
        },
        aggre_pool: if rng.random::<bool>() {
            PoolKind::Max
        } else {
            PoolKind::Avg
        },
        untie_central_message: rng.random::<bool>(),
        head_hidden: if rng.random::<bool>() {
            vec![rng.random_range(1..=4)]
        } else {
            vec![]
        },
    };
    let model = SRgn::new(cfg.clone()).unwrap();
    let seed = rng.random::<u64>();
    let store = seeded_store(seed, |s, r| model.add_params(s, r).unwrap());

    let gx = random_vec(rng, d);
    let gy = random_vec(rng, d);
    let gz = tri.then(|| random_vec(rng, d));
    let got = srgn_logit(&model, &store, &gx, &gy, gz.as_deref());
    let want = oracle_srgn_forward(&gx, &gy, gz.as_deref(), &store, &cfg);
    (got - want).abs()
}

/// One random tiny H-RGN instance checked against the oracle.
pub fn check_hrgn_instance(rng: &mut ChaCha8Rng, tri: bool) -> f64 {
    let d = rng.random_range(3..=12);
    let levels = rng.random_range(1..=2);
    let mut latent_widths = Vec::with_capacity(levels);
    let mut prev = d;
    for _ in 0..levels {
        let w = rng.random_range(1..=prev);
        latent_widths.push(w);
        prev = w;
    }
    let k = rng.random_range(1..=2);
    let dims: Vec<usize> = (0..k).map(|_| rng.random_range(1..=5)).collect();
    let cfg = HRgnConfig {
        d,
        subject_count: if tri { 3 } else { 2 },
        latent_widths,
        dims,
        aggre_pool: if rng.random::<bool>() {
            PoolKind::Avg
        } else {
            PoolKind::Max
        },
        init_mode: match rng.random_range(0..3) {
            0 => InitMode::SelfAttention,
            1 => InitMode::Avg,
            _ => InitMode::Max,
        },
        lower_input_mode: if rng.random::<bool>() {
            LowerInputMode::Comprehensive
        } else {
            LowerInputMode::LiteralMessage
        },
        att_hidden: rng.random_range(2..=8),
        head_hidden: if rng.random::<bool>() {
            vec![rng.random_range(1..=4)]
        } else {
            vec![]
        },
    };
    let model = HRgn::new(cfg.clone()).unwrap();
    let seed = rng.random::<u64>();
    let store = seeded_store(seed, |s, r| model.add_params(s, r).unwrap());

    let gx = random_vec(rng, d);
    let gy = random_vec(rng, d);
    let gz = tri.then(|| random_vec(rng, d));
    let got = hrgn_logit(&model, &store, &gx, &gy, gz.as_deref());
    let want = oracle_hrgn_forward(&gx, &gy, gz.as_deref(), &store, &cfg);
    (got - want).abs()
}
