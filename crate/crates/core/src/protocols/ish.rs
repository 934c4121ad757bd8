//! Infrastructure single-hop: every node talks directly to its base station.
//!
//! Each BS sorts its users by distance and splits them into groups of `ell`;
//! a group shares one FDMA subchannel and is spatially multiplexed by the
//! array. Streams see array gain `ell` and unit-gain leakage from the other
//! `ell - 1` streams of the group.

use rayon::prelude::*;

use super::{Direction, LinkDiag, Mode, Protocol, RateReport};
use crate::channel::{gain_from_d2, log2_1p};
use crate::geometry::NetworkRealization;

/// Per-cell FDMA grouping: user order by distance and the group of each node.
pub(crate) struct Grouping {
    /// Users of each cell, nearest to the BS first.
    pub by_cell: Vec<Vec<usize>>,
    /// Group (subchannel) index of each node within its cell.
    pub group: Vec<usize>,
    /// Size of the node's group.
    pub group_size: Vec<usize>,
}

pub(crate) fn group_users(real: &NetworkRealization) -> Grouping {
    let ell = real.params.ell;
    let mut by_cell = real.nodes_by_cell();
    let mut group = vec![0; real.params.n];
    let mut group_size = vec![0; real.params.n];
    for (c, users) in by_cell.iter_mut().enumerate() {
        let bs = real.layout.centers[c];
        let key = |i: &usize| real.layout.dist2(bs, real.nodes[*i]);
        users.sort_by(|a, b| key(a).total_cmp(&key(b)).then(a.cmp(b)));
        let load = users.len();
        for (pos, &u) in users.iter().enumerate() {
            let j = pos / ell;
            group[u] = j;
            group_size[u] = ell.min(load - j * ell);
        }
    }
    Grouping {
        by_cell,
        group,
        group_size,
    }
}

/// Rates with nominal shares, see [`ish_rates_with`].
pub fn ish_rates(real: &NetworkRealization, direction: Direction) -> RateReport {
    ish_rates_with(real, direction, Mode::Paper)
}

/// Single-hop rates.
///
/// In [`Mode::Paper`] every user gets the nominal bandwidth `(m/n) ell W` and
/// stream power `(m/n) P_BS`, with leakage from `ell - 1` streams. In
/// [`Mode::Exact`] a cell with load `L` uses `ceil(L/ell)` subchannels of
/// bandwidth `W / ceil(L/ell)`, and leakage counts the realized group size.
pub fn ish_rates_with(real: &NetworkRealization, direction: Direction, mode: Mode) -> RateReport {
    let p = &real.params;
    let c = &real.constants;
    let alpha = real.exponents.alpha;
    let w = p.bandwidth;
    let ell = p.ell as f64;
    let grouping = group_users(real);
    let active: Vec<usize> = (0..p.m)
        .filter(|&t| !grouping.by_cell[t].is_empty())
        .collect();

    // subchannel bandwidth of each cell
    let band: Vec<f64> = grouping
        .by_cell
        .iter()
        .map(|users| match mode {
            Mode::Paper => p.m as f64 / p.n as f64 * ell * w,
            Mode::Exact => w / users.len().div_ceil(p.ell).max(1) as f64,
        })
        .collect();
    let leakers = |u: usize| match mode {
        Mode::Paper => ell - 1.0,
        Mode::Exact => grouping.group_size[u] as f64 - 1.0,
    };

    // uplink: received power at each BS from other cells, by subchannel index
    let ul_out: Vec<Vec<f64>> = if direction == Direction::Ul {
        (0..p.m)
            .into_par_iter()
            .map(|t| {
                let groups = grouping.by_cell[t].len().div_ceil(p.ell);
                let mut acc = vec![0.0; groups];
                let bs = real.layout.centers[t];
                for (u, q) in real.nodes.iter().enumerate() {
                    let j = grouping.group[u];
                    if real.cell_of_node[u] != t && j < groups {
                        acc[j] += c.p_node * gain_from_d2(real.guarded_dist2(bs, *q), alpha);
                    }
                }
                acc
            })
            .collect()
    } else {
        Vec::new()
    };

    let diags: Vec<LinkDiag> = (0..p.n)
        .into_par_iter()
        .map(|u| {
            let t = real.cell_of_node[u];
            let b = band[t];
            let x = real.nodes[u];
            let g = gain_from_d2(real.guarded_dist2(real.layout.centers[t], x), alpha);
            let sinr = match direction {
                Direction::Dl => {
                    let stream = match mode {
                        Mode::Paper => p.m as f64 / p.n as f64 * c.p_bs,
                        Mode::Exact => c.p_bs / (w / b * ell),
                    };
                    let out: f64 = active
                        .iter()
                        .filter(|&&o| o != t)
                        .map(|&o| gain_from_d2(real.guarded_dist2(real.layout.centers[o], x), alpha))
                        .sum::<f64>()
                        * c.p_bs
                        / w;
                    ell * stream * g / (leakers(u) * stream * g + b * (c.n0 + out))
                }
                Direction::Ul => {
                    let out = ul_out[t][grouping.group[u]];
                    ell * c.p_node * g / (leakers(u) * c.p_node * g + b * c.n0 + out)
                }
            };
            LinkDiag {
                sinr,
                duty: 1.0,
                bandwidth: b,
            }
        })
        .collect();
    let rates = diags.iter().map(|d| d.bandwidth * log2_1p(d.sinr)).collect();
    RateReport::new(Protocol::Ish, direction, mode, rates, diags)
}
