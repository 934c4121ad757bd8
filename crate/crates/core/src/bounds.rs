//! Cut-set upper bounds on per-node downlink and uplink rates.
//!
//! Downlink cuts separate one base station (with its `ell` array dimensions)
//! from every node; uplink cuts separate one node from the rest of the
//! network. Relays are ignored: they change constants, not exponents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{gain_from_d2, log2_1p};
use crate::geometry::NetworkRealization;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CutsetReport {
    /// Throughput bound of each base-station cut (bits/s).
    pub per_cell_dl: Vec<f64>,
    /// Throughput bound of each node cut (bits/s).
    pub per_node_ul: Vec<f64>,
    /// `(m/n) * min_t per_cell_dl[t]`.
    pub ub_per_node_dl: Option<f64>,
    /// `min_u per_node_ul[u]`.
    pub ub_per_node_ul: Option<f64>,
}

impl CutsetReport {
    /// Merges a downlink-only and an uplink-only report.
    pub fn merge(self, other: CutsetReport) -> CutsetReport {
        CutsetReport {
            per_cell_dl: if self.per_cell_dl.is_empty() { other.per_cell_dl } else { self.per_cell_dl },
            per_node_ul: if self.per_node_ul.is_empty() { other.per_node_ul } else { self.per_node_ul },
            ub_per_node_dl: self.ub_per_node_dl.or(other.ub_per_node_dl),
            ub_per_node_ul: self.ub_per_node_ul.or(other.ub_per_node_ul),
        }
    }
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// `sum_r d_{t,r}^-alpha` over all nodes for base station `t`, far-field guarded.
pub fn bs_gain_sum(real: &NetworkRealization, t: usize) -> f64 {
    let alpha = real.exponents.alpha;
    let bs = real.layout.centers[t];
    real.nodes
        .iter()
        .map(|p| gain_from_d2(real.guarded_dist2(bs, *p), alpha))
        .sum()
}

/// Downlink cut-set bound with equal power over the `ell` array dimensions:
/// `T^t = W ell log2(1 + P_BS/(W N0) sum_r d_{t,r}^-alpha)`.
pub fn cutset_dl(real: &NetworkRealization) -> CutsetReport {
    let p = &real.params;
    let c = &real.constants;
    let snr_scale = c.p_bs / (p.bandwidth * c.n0);
    let per_cell: Vec<f64> = (0..p.m)
        .into_par_iter()
        .map(|t| p.bandwidth * p.ell as f64 * log2_1p(snr_scale * bs_gain_sum(real, t)))
        .collect();
    let ub = p.m as f64 / p.n as f64 * min_of(&per_cell);
    CutsetReport {
        per_cell_dl: per_cell,
        ub_per_node_dl: Some(ub),
        ..Default::default()
    }
}

/// Uplink cut-set bound: each node against everyone else, BSs counting with
/// their array gain `ell`. Cost is quadratic in `n`.
pub fn cutset_ul(real: &NetworkRealization) -> CutsetReport {
    let p = &real.params;
    let c = &real.constants;
    let alpha = real.exponents.alpha;
    let ell = p.ell as f64;
    let snr_scale = c.p_node / (p.bandwidth * c.n0);
    let per_node: Vec<f64> = (0..p.n)
        .into_par_iter()
        .map(|u| {
            let me = real.nodes[u];
            let mut sum = 0.0;
            for (r, q) in real.nodes.iter().enumerate() {
                if r != u {
                    sum += gain_from_d2(real.guarded_dist2(me, *q), alpha);
                }
            }
            for b in &real.layout.centers {
                sum += ell * gain_from_d2(real.guarded_dist2(me, *b), alpha);
            }
            p.bandwidth * log2_1p(snr_scale * sum)
        })
        .collect();
    let ub = min_of(&per_node);
    CutsetReport {
        per_node_ul: per_node,
        ub_per_node_ul: Some(ub),
        ..Default::default()
    }
}

/// Both sides of the cut-set bound.
pub fn cutset(real: &NetworkRealization) -> CutsetReport {
    cutset_dl(real).merge(cutset_ul(real))
}
