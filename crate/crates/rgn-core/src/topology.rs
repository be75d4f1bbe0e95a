//! Star and hierarchical graph structures.
//!
//! The hierarchical graph is a balanced, locally connected tree between
//! adjacent layers: every lower node has exactly one parent, children of a
//! parent form a contiguous index range, and with `C = N_prev mod N_cur`
//! the first `C` parents take `ceil(N_prev/N_cur)` children while the rest
//! take the floor. Node indices are 0-based internally; dumps and file
//! formats print 1-based indices.

use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};

/// Star graph: one central node plus `d` surrounding nodes, each connected
/// only to the center.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StarTopology {
    d: usize,
}

impl StarTopology {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::config(
                "star topology needs at least one surrounding node",
            ));
        }
        Ok(StarTopology { d })
    }

    pub fn surrounding(&self) -> usize {
        self.d
    }
}

/// Layer widths `[N_0, N_1, ..., N_L]` of the hierarchical graph. `N_0` is
/// the visual-comparison layer; widths may stay equal (warned) but never
/// increase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerConfig {
    node_counts: Vec<usize>,
}

impl LayerConfig {
    pub fn new(node_counts: Vec<usize>) -> Result<Self> {
        if node_counts.len() < 2 {
            return Err(Error::config(format!(
                "hierarchy needs at least one latent layer, got widths {node_counts:?}"
            )));
        }
        if node_counts.contains(&0) {
            return Err(Error::config(format!(
                "layer widths must be positive: {node_counts:?}"
            )));
        }
        for w in node_counts.windows(2) {
            if w[1] > w[0] {
                return Err(Error::config(format!(
                    "layer widths must not increase: {} -> {} in {node_counts:?}",
                    w[0], w[1]
                )));
            }
            if w[1] == w[0] {
                log::warn!(
                    "equal consecutive layer widths {} = {}; allowed but unusual",
                    w[0],
                    w[1]
                );
            }
        }
        Ok(LayerConfig { node_counts })
    }

    /// Number of latent layers L (layer 0 excluded).
    pub fn latent_layers(&self) -> usize {
        self.node_counts.len() - 1
    }

    pub fn node_counts(&self) -> &[usize] {
        &self.node_counts
    }

    pub fn width(&self, layer: usize) -> usize {
        self.node_counts[layer]
    }

    pub fn total_nodes(&self) -> usize {
        self.node_counts.iter().sum()
    }
}

/// Parent assignment for one boundary between adjacent layers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Boundary {
    /// `parent[i]` is the 0-based upper-layer parent of lower node `i`.
    parent: Vec<usize>,
    /// Contiguous child range per parent, in parent order.
    children: Vec<Range<usize>>,
}

impl Boundary {
    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    pub fn children(&self, parent: usize) -> Range<usize> {
        self.children[parent].clone()
    }

    pub fn n_lower(&self) -> usize {
        self.parent.len()
    }

    pub fn n_upper(&self) -> usize {
        self.children.len()
    }
}

/// Balanced parent assignment of `n_prev` lower nodes to `n_cur` parents.
/// With `c = n_prev mod n_cur`, parents `0..c` take `ceil(n_prev/n_cur)`
/// consecutive children and the remaining parents take the floor.
pub fn build_boundary(n_prev: usize, n_cur: usize) -> Result<Boundary> {
    if n_cur == 0 || n_cur > n_prev {
        return Err(Error::config(format!(
            "boundary needs 1 <= n_cur <= n_prev, got n_prev={n_prev}, n_cur={n_cur}"
        )));
    }
    let c = n_prev % n_cur;
    let ceil_q = n_prev.div_ceil(n_cur);
    let floor_q = n_prev / n_cur;
    let split = c * ceil_q;

    let mut parent = Vec::with_capacity(n_prev);
    let mut children = Vec::with_capacity(n_cur);
    let mut start = 0;
    for p in 0..n_cur {
        let take = if p < c { ceil_q } else { floor_q };
        children.push(start..start + take);
        parent.extend(std::iter::repeat_n(p, take));
        start += take;
    }
    debug_assert_eq!(start, n_prev);
    debug_assert!(c == 0 || children[c - 1].end == split);
    Ok(Boundary { parent, children })
}

/// The full hierarchical topology: one boundary per adjacent layer pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HierTopology {
    cfg: LayerConfig,
    boundaries: Vec<Boundary>,
}

/// Build every boundary of the hierarchy described by `cfg`.
pub fn build_hierarchy(cfg: &LayerConfig) -> Result<HierTopology> {
    let boundaries = cfg
        .node_counts()
        .windows(2)
        .map(|w| build_boundary(w[0], w[1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(HierTopology {
        cfg: cfg.clone(),
        boundaries,
    })
}

impl HierTopology {
    pub fn layer_config(&self) -> &LayerConfig {
        &self.cfg
    }

    pub fn latent_layers(&self) -> usize {
        self.cfg.latent_layers()
    }

    pub fn width(&self, layer: usize) -> usize {
        self.cfg.width(layer)
    }

    /// Boundary between layers `l-1` and `l`, for `1 <= l <= L`.
    pub fn boundary(&self, l: usize) -> &Boundary {
        &self.boundaries[l - 1]
    }

    /// Children (0-based lower-layer range) of node `node` in layer `l`.
    pub fn children_of(&self, l: usize, node: usize) -> Result<Range<usize>> {
        if l == 0 || l > self.latent_layers() {
            return Err(Error::config(format!(
                "children_of: layer {l} out of range 1..={}",
                self.latent_layers()
            )));
        }
        let b = self.boundary(l);
        if node >= b.n_upper() {
            return Err(Error::config(format!(
                "children_of: node {node} out of range for layer {l} width {}",
                b.n_upper()
            )));
        }
        Ok(b.children(node))
    }

    /// Parent (0-based) of `node` in layer `l` seen from layer `l+1`.
    pub fn parent_of(&self, l: usize, node: usize) -> usize {
        self.boundaries[l].parents()[node]
    }

    /// Human-readable dump: per-boundary parent arrays (1-based, matching
    /// the file-format convention) plus a summary table.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, b) in self.boundaries.iter().enumerate() {
            let parents: Vec<String> = b.parents().iter().map(|p| (p + 1).to_string()).collect();
            let _ = writeln!(
                out,
                "layer {}: parent[1..{}] = [{}]",
                i + 1,
                b.n_lower(),
                parents.join(", ")
            );
        }
        let _ = writeln!(out, "layer  nodes  children/parent");
        let counts = self.cfg.node_counts();
        let _ = writeln!(out, "{:>5}  {:>5}  -", 0, counts[0]);
        for (i, b) in self.boundaries.iter().enumerate() {
            let c = b.n_lower() % b.n_upper();
            let hi = b.n_lower().div_ceil(b.n_upper());
            let lo = b.n_lower() / b.n_upper();
            let sizes = if c == 0 {
                format!("{lo}")
            } else {
                format!("{hi} x{c}, {lo} x{}", b.n_upper() - c)
            };
            let _ = writeln!(out, "{:>5}  {:>5}  {}", i + 1, counts[i + 1], sizes);
        }
        out
    }
}
