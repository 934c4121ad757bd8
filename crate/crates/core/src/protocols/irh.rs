//! Infrastructure relay multi-hop: an access phase from every node to its
//! nearest access point (BS or relay node), and a backhaul phase that carries
//! relay traffic to the BS over the relays' hexagonal lattice.
//!
//! Access points are treated as single-antenna in the access phase and share
//! the band by FDMA. Backhaul reuses the multi-hop machinery: the BS
//! multiplexes `min(ell, k/m)` relay routes through its array and relay hops
//! follow the 7-slot schedule of the relay lattice. A node's rate is the
//! decode-and-forward combination `a b / (a + b)` of its access rate `a` and
//! its share `b` of the relay's backhaul.

use std::collections::HashMap;

use rayon::prelude::*;

use super::{received_power, tau_star, Direction, Emitter, LinkDiag, Mode, Protocol, RateReport};
use crate::channel::gain_from_d2;
use crate::error::Result;
use crate::geometry::{NetworkRealization, Point2D, PointIndex};
use crate::subcell::Axial;
use crate::theory::rn_switch_decision;

/// Rates with nominal shares, see [`irh_rates_with`].
pub fn irh_rates(real: &NetworkRealization, direction: Direction) -> Result<RateReport> {
    irh_rates_with(real, direction, Mode::Paper)
}

/// Relay-based rates. When the exponents say relays do not pay off, the
/// single-hop rates are returned with `rn_used = false`.
pub fn irh_rates_with(real: &NetworkRealization, direction: Direction, mode: Mode) -> Result<RateReport> {
    if !rn_switch_decision(direction, &real.exponents) {
        let mut r = super::ish_rates_with(real, direction, mode);
        r.protocol = Protocol::Irh;
        r.rn_used = false;
        return Ok(r);
    }
    let access = access_phase(real, direction, mode);
    let backhaul = backhaul_phase(real, direction, mode);
    let p = &real.params;
    let m = p.m;

    let mut rates = Vec::with_capacity(p.n);
    let mut diags = Vec::with_capacity(p.n);
    let mut taus = Vec::with_capacity(p.n);
    for u in 0..p.n {
        let ap = access.serving[u];
        let a_diag = access.diag[u];
        let a = a_diag.rate();
        let (b, b_diag) = if ap < m {
            (f64::INFINITY, a_diag)
        } else {
            let r = ap - m;
            let per_relay = backhaul.rate[r];
            let b = match mode {
                Mode::Paper => p.k as f64 / p.n as f64 * per_relay,
                Mode::Exact => per_relay / access.load[ap].max(1) as f64,
            };
            (b, backhaul.diag[r])
        };
        let (tau, rate) = tau_star(a, b);
        rates.push(rate);
        taus.push(tau);
        diags.push(if a <= b { a_diag } else { b_diag });
    }
    let mut report = RateReport::new(Protocol::Irh, direction, mode, rates, diags);
    report.rn_used = true;
    report.tau = taus;
    Ok(report)
}

struct Access {
    serving: Vec<usize>,
    load: Vec<usize>,
    diag: Vec<LinkDiag>,
}

/// Access points: base stations first, then relays.
fn access_points(real: &NetworkRealization) -> (Vec<Point2D>, Vec<f64>) {
    let c = &real.constants;
    let mut pos = real.layout.centers.clone();
    pos.extend_from_slice(&real.relays.positions);
    let mut power = vec![c.p_bs; real.params.m];
    power.extend(std::iter::repeat(c.p_rn).take(real.relays.positions.len()));
    (pos, power)
}

fn access_phase(real: &NetworkRealization, direction: Direction, mode: Mode) -> Access {
    let p = &real.params;
    let c = &real.constants;
    let alpha = real.exponents.alpha;
    let w = p.bandwidth;
    let (aps, power) = access_points(real);
    let index = PointIndex::new(&aps, &real.layout);
    let serving: Vec<usize> = real
        .nodes
        .iter()
        .map(|x| index.nearest(*x).expect("at least one access point"))
        .collect();
    let mut members = vec![Vec::new(); aps.len()];
    for (u, &a) in serving.iter().enumerate() {
        members[a].push(u);
    }
    let load: Vec<usize> = members.iter().map(Vec::len).collect();
    let band = |a: usize| match mode {
        Mode::Paper => (w * aps.len() as f64 / p.n as f64).min(w),
        Mode::Exact => w / load[a].max(1) as f64,
    };

    let diag: Vec<LinkDiag> = match direction {
        Direction::Dl => {
            let active: Vec<Emitter> = (0..aps.len())
                .filter(|&a| load[a] > 0)
                .map(|a| Emitter {
                    pos: aps[a],
                    power: power[a],
                    key: a as u64,
                })
                .collect();
            (0..p.n)
                .into_par_iter()
                .map(|u| {
                    let a = serving[u];
                    let x = real.nodes[u];
                    let g = gain_from_d2(real.guarded_dist2(aps[a], x), alpha);
                    // every AP spreads its power over the full band, so the
                    // subchannel width cancels from the SINR
                    let i = received_power(real, &active, x, a as u64);
                    LinkDiag {
                        sinr: power[a] * g / (i + w * c.n0),
                        duty: 1.0,
                        bandwidth: band(a),
                    }
                })
                .collect()
        }
        Direction::Ul => {
            // subchannel of a node: its rank by distance within the microcell
            let mut sub = vec![0usize; p.n];
            for (a, us) in members.iter_mut().enumerate() {
                us.sort_by(|x, y| {
                    let dx = real.layout.dist2(aps[a], real.nodes[*x]);
                    let dy = real.layout.dist2(aps[a], real.nodes[*y]);
                    dx.total_cmp(&dy).then(x.cmp(y))
                });
                for (j, &u) in us.iter().enumerate() {
                    sub[u] = j;
                }
            }
            let out: Vec<Vec<f64>> = (0..aps.len())
                .into_par_iter()
                .map(|a| {
                    let mut acc = vec![0.0; load[a]];
                    if load[a] == 0 {
                        return acc;
                    }
                    for (u, x) in real.nodes.iter().enumerate() {
                        if serving[u] != a && sub[u] < load[a] {
                            acc[sub[u]] += c.p_node * gain_from_d2(real.guarded_dist2(aps[a], *x), alpha);
                        }
                    }
                    acc
                })
                .collect();
            (0..p.n)
                .map(|u| {
                    let a = serving[u];
                    let b = band(a);
                    let g = gain_from_d2(real.guarded_dist2(aps[a], real.nodes[u]), alpha);
                    LinkDiag {
                        sinr: c.p_node * g / (out[a][sub[u]] + b * c.n0),
                        duty: 1.0,
                        bandwidth: b,
                    }
                })
                .collect()
        }
    };
    Access { serving, load, diag }
}

struct Backhaul {
    /// Full-time backhaul rate of each relay.
    rate: Vec<f64>,
    diag: Vec<LinkDiag>,
}

/// Relay route toward the BS within one cell: relay indices from the source
/// to a relay adjacent to the BS.
struct RelayRoute {
    path: Vec<usize>,
    reached: bool,
}

fn relay_routes(real: &NetworkRealization, cell: usize, relays: &[usize]) -> (Vec<RelayRoute>, Vec<bool>) {
    let rp = &real.relays;
    let spacing = rp.spacing[cell];
    let bs = real.layout.centers[cell];
    let at: HashMap<Axial, usize> = relays.iter().map(|&r| (rp.axial[r], r)).collect();
    let dist = |r: usize| real.layout.distance(bs, rp.positions[r]);
    let is_head = |r: usize| dist(r) <= spacing * (1.0 + 1e-9);
    let head: Vec<bool> = relays.iter().map(|&r| is_head(r)).collect();
    let routes = relays
        .iter()
        .map(|&r| {
            let mut path = vec![r];
            let mut cur = r;
            let mut reached = true;
            while !is_head(cur) {
                let here = dist(cur);
                let next = rp.axial[cur]
                    .neighbors()
                    .filter_map(|a| at.get(&a).copied())
                    .map(|nb| (dist(nb), nb))
                    .filter(|(d, _)| *d < here)
                    .min_by(|a, b| a.0.total_cmp(&b.0));
                match next {
                    Some((_, nb)) => {
                        path.push(nb);
                        cur = nb;
                    }
                    None => {
                        reached = false;
                        break;
                    }
                }
            }
            RelayRoute { path, reached }
        })
        .collect();
    (routes, head)
}

fn backhaul_phase(real: &NetworkRealization, direction: Direction, mode: Mode) -> Backhaul {
    let p = &real.params;
    let c = &real.constants;
    let alpha = real.exponents.alpha;
    let w = p.bandwidth;
    let rp = &real.relays;
    let k = rp.positions.len();
    let mut by_cell = vec![Vec::new(); p.m];
    for r in 0..k {
        by_cell[rp.cell[r]].push(r);
    }
    let plans: Vec<(Vec<RelayRoute>, Vec<bool>)> = by_cell
        .iter()
        .enumerate()
        .map(|(cell, rs)| relay_routes(real, cell, rs))
        .collect();

    // transmit load of each relay and the per-slot emitters
    let mut tx_load = vec![0usize; k];
    for (routes, _) in &plans {
        for r in routes.iter().filter(|r| r.reached) {
            let n_hops = r.path.len() - 1;
            let tx: &[usize] = match direction {
                Direction::Dl => &r.path[1..],
                Direction::Ul => &r.path[..n_hops],
            };
            for &x in tx {
                tx_load[x] += 1;
            }
        }
    }
    let mut slots = vec![Vec::new(); 7];
    for r in 0..k {
        if tx_load[r] > 0 {
            slots[rp.axial[r].color() as usize].push(Emitter {
                pos: rp.positions[r],
                power: c.p_rn,
                key: r as u64,
            });
        }
    }
    // array links: other BSs (downlink) or other cells' head relays (uplink)
    let heads: Vec<Emitter> = match direction {
        Direction::Dl => (0..p.m)
            .filter(|&t| !by_cell[t].is_empty())
            .map(|t| Emitter {
                pos: real.layout.centers[t],
                power: c.p_bs,
                key: t as u64,
            })
            .collect(),
        Direction::Ul => plans
            .iter()
            .zip(&by_cell)
            .flat_map(|((_, head), rs)| {
                rs.iter()
                    .zip(head)
                    .filter(|(_, h)| **h)
                    .map(|(&r, _)| Emitter {
                        pos: rp.positions[r],
                        power: c.p_rn,
                        key: (k + rp.cell[r]) as u64,
                    })
                    .collect::<Vec<_>>()
            })
            .collect(),
    };

    let hop = |tx: usize, rx: usize, share: f64| {
        let g = gain_from_d2(real.guarded_dist2(rp.positions[tx], rp.positions[rx]), alpha);
        let i = received_power(real, &slots[rp.axial[tx].color() as usize], rp.positions[rx], tx as u64);
        LinkDiag {
            sinr: c.p_rn * g / (w * c.n0 + i),
            duty: share / 7.0,
            bandwidth: w,
        }
    };

    let mut rate = vec![0.0; k];
    let mut diag = vec![LinkDiag::default(); k];
    let results: Vec<Vec<(usize, LinkDiag, bool)>> = plans
        .par_iter()
        .enumerate()
        .map(|(cell, (routes, _))| {
            let count = by_cell[cell].len();
            let streams = p.ell.min(count).max(1) as f64;
            let (head_share, hop_share): (f64, Box<dyn Fn(usize) -> f64 + Sync>) = match mode {
                Mode::Paper => {
                    let f = (streams * p.m as f64 / k as f64).min(1.0);
                    (f, Box::new(move |_| f))
                }
                Mode::Exact => (
                    (streams / count.max(1) as f64).min(1.0),
                    Box::new(|r: usize| 1.0 / tx_load[r].max(1) as f64),
                ),
            };
            let bs = real.layout.centers[cell];
            let (tx_power, array_key) = match direction {
                Direction::Dl => (c.p_bs / streams, cell as u64),
                Direction::Ul => (c.p_rn, (k + cell) as u64),
            };
            let array = |r: usize| {
                let g = gain_from_d2(real.guarded_dist2(bs, rp.positions[r]), alpha);
                let rx = match direction {
                    Direction::Dl => rp.positions[r],
                    Direction::Ul => bs,
                };
                let i = received_power(real, &heads, rx, array_key);
                LinkDiag {
                    sinr: tx_power * g * streams / ((streams - 1.0) * tx_power * g + w * c.n0 + i),
                    duty: head_share,
                    bandwidth: w,
                }
            };
            let mut cache: HashMap<(usize, usize), LinkDiag> = HashMap::new();
            routes
                .iter()
                .map(|route| {
                    let src = route.path[0];
                    if !route.reached {
                        return (src, LinkDiag::default(), false);
                    }
                    let end = *route.path.last().unwrap();
                    let mut links = vec![*cache.entry((end, usize::MAX)).or_insert_with(|| array(end))];
                    for w2 in route.path.windows(2) {
                        let (tx, rx) = match direction {
                            Direction::Dl => (w2[1], w2[0]),
                            Direction::Ul => (w2[0], w2[1]),
                        };
                        let l = *cache.entry((tx, rx)).or_insert_with(|| hop(tx, rx, hop_share(tx)));
                        links.push(l);
                    }
                    let worst = links
                        .into_iter()
                        .min_by(|a, b| a.rate().total_cmp(&b.rate()))
                        .unwrap();
                    (src, worst, true)
                })
                .collect()
        })
        .collect();
    for (r, d, ok) in results.into_iter().flatten() {
        rate[r] = if ok { d.rate() } else { 0.0 };
        diag[r] = d;
    }
    Backhaul { rate, diag }
}
