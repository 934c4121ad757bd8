//! Infrastructure multi-hop: traffic is relayed between adjacent routing
//! subcells, one relay node per subcell, toward the base station.
//!
//! All cells share one subcell lattice. A BS serves the six subcells around
//! its own directly through its array, `ell` routes at a time. Relay hops
//! follow the 7-slot schedule: a relay transmits only in the slot of its
//! subcell's color, on the full band, so a hop gets a `1/7` time share on top
//! of its route share. The BS transmits in the slot of its own subcell.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{received_power, Direction, Emitter, LinkDiag, Mode, Protocol, RateReport};
use crate::channel::gain_from_d2;
use crate::error::Result;
use crate::geometry::{NetworkRealization, Point2D};
use crate::subcell::{Axial, SubcellGrid, SubcellLattice};

/// Subcell route of one node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Route {
    pub node: usize,
    /// Subcells from the node's own subcell to one adjacent to the BS subcell
    /// (or the BS subcell itself when the node sits there).
    pub path: Vec<Axial>,
    /// False when the greedy walk got stuck before reaching the BS ring.
    pub reached: bool,
}

impl Route {
    /// Relay-to-relay or relay-to-node transmissions, excluding the BS link.
    pub fn hops(&self) -> usize {
        self.path.len() - 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub cell: usize,
    pub grid: SubcellGrid,
    pub routes: Vec<Route>,
    /// Routes relayed by each subcell (indexed like `grid.cells`): the number
    /// of routes in which the subcell appears after the starting one.
    pub load: Vec<usize>,
}

impl RoutePlan {
    pub fn total_hops(&self) -> usize {
        self.routes.iter().filter(|r| r.reached).map(Route::hops).sum()
    }

    /// Every scheduled transmission as `(transmitting subcell, destination)`,
    /// destination `None` meaning the base station.
    pub fn transmissions(&self, direction: Direction) -> Vec<(Axial, Option<Axial>)> {
        let mut out = Vec::new();
        for r in self.routes.iter().filter(|r| r.reached) {
            let k = r.hops();
            match direction {
                Direction::Dl => {
                    out.push((self.grid.bs_axial, Some(r.path[k])));
                    for i in (1..=k).rev() {
                        out.push((r.path[i], Some(r.path[i - 1])));
                    }
                }
                Direction::Ul => {
                    for i in 0..k {
                        out.push((r.path[i], Some(r.path[i + 1])));
                    }
                    out.push((r.path[k], None));
                }
            }
        }
        out
    }
}

fn subcell_key(a: Axial) -> u64 {
    ((a.q as u32 as u64) << 32) | a.r as u32 as u64
}

fn bs_key(cell: usize) -> u64 {
    (1 << 63) | cell as u64
}

/// Greedy routes for every node of `cell`.
///
/// From the node's subcell the walk repeatedly moves to the occupied
/// neighbor whose center is nearest the BS, provided it is strictly nearer
/// than the current one, and stops once adjacent to the BS subcell. Empty
/// neighbors are skipped, which makes the walk detour around holes; a walk
/// with no admissible move is marked unreached.
pub fn imh_build_routes(real: &NetworkRealization, cell: usize) -> Result<RoutePlan> {
    Ok(imh_routes_on(real, &SubcellLattice::new(real)?, cell))
}

/// Like [`imh_build_routes`] on a prebuilt lattice.
pub fn imh_routes_on(real: &NetworkRealization, lattice: &SubcellLattice, cell: usize) -> RoutePlan {
    let grid = lattice.grid(real, cell);
    let bs = real.layout.centers[cell];
    let mut load = vec![0; grid.cells.len()];
    let mut routes = Vec::with_capacity(grid.members.len());
    let radius = |a: Axial| (a.to_offset(grid.spacing) - bs).norm();
    for &(node, start) in &grid.members {
        let mut cur = grid.cells[start].axial;
        let mut path = vec![cur];
        let mut reached = true;
        while cur.hex_distance(grid.bs_axial) > 1 {
            let here = radius(cur);
            let next = (0..6)
                .map(|d| cur.neighbor(d))
                .filter(|nb| grid.get(*nb).is_some_and(|s| s.occupant.is_some()))
                .map(|nb| (radius(nb), nb))
                .filter(|(r, _)| *r < here)
                .min_by(|a, b| a.0.total_cmp(&b.0));
            match next {
                Some((_, nb)) => {
                    cur = nb;
                    path.push(nb);
                }
                None => {
                    reached = false;
                    break;
                }
            }
        }
        if reached {
            for a in &path[1..] {
                load[grid.position(*a).expect("route stays on grid")] += 1;
            }
        }
        routes.push(Route {
            node,
            path,
            reached,
        });
    }
    RoutePlan {
        cell,
        grid,
        routes,
        load,
    }
}

struct Shares {
    head: f64,
    /// Route share of hops transmitted from each subcell (before the 1/7).
    hop: Vec<f64>,
}

fn shares(real: &NetworkRealization, plan: &RoutePlan, direction: Direction, mode: Mode) -> Shares {
    let p = &real.params;
    match mode {
        Mode::Paper => {
            let f = (p.m as f64 * p.ell as f64 / p.n as f64).min(1.0);
            Shares {
                head: f,
                hop: vec![f; plan.grid.cells.len()],
            }
        }
        Mode::Exact => {
            let tx_load = match direction {
                Direction::Dl => plan.load.clone(),
                Direction::Ul => {
                    let mut l = vec![0usize; plan.grid.cells.len()];
                    for r in plan.routes.iter().filter(|r| r.reached) {
                        for a in &r.path[..r.hops()] {
                            l[plan.grid.position(*a).unwrap()] += 1;
                        }
                    }
                    l
                }
            };
            Shares {
                head: (p.ell as f64 / plan.routes.len().max(1) as f64).min(1.0),
                hop: tx_load.iter().map(|&l| 1.0 / l.max(1) as f64).collect(),
            }
        }
    }
}

/// Transmitters active in each of the 7 slots across all cells.
fn slot_emitters(real: &NetworkRealization, plans: &[RoutePlan], direction: Direction) -> Vec<Vec<Emitter>> {
    let c = &real.constants;
    let mut slots = vec![Vec::new(); 7];
    let mut seen = HashSet::new();
    for plan in plans {
        let reached: Vec<&Route> = plan.routes.iter().filter(|r| r.reached).collect();
        if direction == Direction::Dl && !reached.is_empty() {
            slots[plan.grid.bs_axial.color() as usize].push(Emitter {
                pos: real.layout.centers[plan.cell],
                power: c.p_bs,
                key: bs_key(plan.cell),
            });
        }
        for r in reached {
            let tx: &[Axial] = match direction {
                Direction::Dl => &r.path[1..],
                Direction::Ul => &r.path,
            };
            for a in tx {
                if !seen.insert(*a) {
                    continue;
                }
                let s = plan.grid.get(*a).unwrap();
                let Some(o) = s.occupant else { continue };
                slots[s.color as usize].push(Emitter {
                    pos: real.nodes[o],
                    power: c.p_node,
                    key: subcell_key(*a),
                });
            }
        }
    }
    slots
}

struct LinkEval<'a> {
    real: &'a NetworkRealization,
    slots: &'a [Vec<Emitter>],
}

impl LinkEval<'_> {
    fn hop(&self, tx: Point2D, key: u64, color: u8, rx: Point2D, share: f64) -> LinkDiag {
        let r = self.real;
        let w = r.params.bandwidth;
        let g = gain_from_d2(r.guarded_dist2(tx, rx), r.exponents.alpha);
        let i = received_power(r, &self.slots[color as usize], rx, key);
        LinkDiag {
            sinr: r.constants.p_node * g / (w * r.constants.n0 + i),
            duty: share / 7.0,
            bandwidth: w,
        }
    }

    /// BS array link: `tx_power` per stream, array gain `ell`, leakage from
    /// the other `ell - 1` streams.
    fn head(&self, a: Point2D, b: Point2D, tx_power: f64, rx: Point2D, key: u64, color: u8, share: f64) -> LinkDiag {
        let r = self.real;
        let w = r.params.bandwidth;
        let ell = r.params.ell as f64;
        let g = gain_from_d2(r.guarded_dist2(a, b), r.exponents.alpha);
        let i = received_power(r, &self.slots[color as usize], rx, key);
        LinkDiag {
            sinr: tx_power * g * ell / ((ell - 1.0) * tx_power * g + w * r.constants.n0 + i),
            duty: share,
            bandwidth: w,
        }
    }
}

fn route_links(
    eval: &LinkEval,
    plan: &RoutePlan,
    route: &Route,
    direction: Direction,
    sh: &Shares,
    cache: &mut HashMap<(usize, usize), LinkDiag>,
) -> LinkDiag {
    let real = eval.real;
    let c = &real.constants;
    let ell = real.params.ell as f64;
    let bs = real.layout.centers[plan.cell];
    let bs_key = bs_key(plan.cell);
    let bs_color = plan.grid.bs_axial.color();
    let grid = &plan.grid;
    let idx = |a: Axial| grid.position(a).unwrap();
    let relay = |a: Axial| real.nodes[grid.cells[idx(a)].occupant.unwrap()];
    let key = subcell_key;
    let color = |a: Axial| a.color();
    let node = real.nodes[route.node];
    let k = route.hops();
    let path = &route.path;
    let mut links: Vec<LinkDiag> = Vec::with_capacity(k + 1);

    match direction {
        Direction::Dl => {
            let p_t = c.p_bs / ell;
            if k == 0 {
                links.push(eval.head(bs, node, p_t, node, bs_key, bs_color, sh.head));
            } else {
                let end = path[k];
                let head = *cache
                    .entry((usize::MAX, idx(end)))
                    .or_insert_with(|| eval.head(bs, relay(end), p_t, relay(end), bs_key, bs_color, sh.head));
                links.push(head);
                for i in (2..=k).rev() {
                    let (s, t) = (path[i], path[i - 1]);
                    let (si, ti) = (idx(s), idx(t));
                    let l = *cache.entry((si, ti)).or_insert_with(|| {
                        eval.hop(relay(s), key(s), color(s), relay(t), sh.hop[si])
                    });
                    links.push(l);
                }
                let s = path[1];
                links.push(eval.hop(relay(s), key(s), color(s), node, sh.hop[idx(s)]));
            }
        }
        Direction::Ul => {
            let p_t = c.p_node;
            if k == 0 {
                let s = path[0];
                links.push(eval.head(node, bs, p_t, bs, key(s), color(s), sh.head));
            } else {
                let (s0, s1) = (path[0], path[1]);
                links.push(eval.hop(node, key(s0), color(s0), relay(s1), sh.hop[idx(s0)]));
                for i in 1..k {
                    let (s, t) = (path[i], path[i + 1]);
                    let (si, ti) = (idx(s), idx(t));
                    let l = *cache.entry((si, ti)).or_insert_with(|| {
                        eval.hop(relay(s), key(s), color(s), relay(t), sh.hop[si])
                    });
                    links.push(l);
                }
                let end = path[k];
                let head = *cache.entry((idx(end), usize::MAX)).or_insert_with(|| {
                    eval.head(relay(end), bs, p_t, bs, key(end), color(end), sh.head)
                });
                links.push(head);
            }
        }
    }
    links
        .into_iter()
        .min_by(|a, b| a.rate().total_cmp(&b.rate()))
        .expect("route has at least one link")
}

/// Multi-hop rates on every cell's routing subcells.
///
/// The per-node rate is the minimum over its BS link and relay hops. In
/// [`Mode::Paper`] every link carries the BS route share `m ell / n`; in
/// [`Mode::Exact`] the BS link gets `ell` over the realized number of routes
/// in the cell and a hop gets one over the number of routes its transmitting
/// subcell forwards. Interference at a receiver is the exact sum over all
/// transmitters active in the same slot, in every cell; a relay shared by
/// routes of several cells counts once.
pub fn imh_rates(real: &NetworkRealization, direction: Direction, mode: Mode) -> Result<RateReport> {
    let lattice = SubcellLattice::new(real)?;
    let plans: Vec<RoutePlan> = (0..real.params.m)
        .into_par_iter()
        .map(|c| imh_routes_on(real, &lattice, c))
        .collect();
    Ok(imh_rates_on(real, &plans, direction, mode))
}

/// Like [`imh_rates`] but on prebuilt route plans (one per cell, in order).
pub fn imh_rates_on(real: &NetworkRealization, plans: &[RoutePlan], direction: Direction, mode: Mode) -> RateReport {
    let slots = slot_emitters(real, plans, direction);
    let eval = LinkEval { real, slots: &slots };
    let per_cell: Vec<Vec<(usize, LinkDiag, bool)>> = plans
        .par_iter()
        .map(|plan| {
            let sh = shares(real, plan, direction, mode);
            let mut cache = HashMap::new();
            plan.routes
                .iter()
                .map(|r| {
                    if r.reached {
                        (r.node, route_links(&eval, plan, r, direction, &sh, &mut cache), true)
                    } else {
                        (r.node, LinkDiag::default(), false)
                    }
                })
                .collect()
        })
        .collect();
    let mut rates = vec![0.0; real.params.n];
    let mut diags = vec![LinkDiag::default(); real.params.n];
    for (node, d, ok) in per_cell.into_iter().flatten() {
        rates[node] = if ok { d.rate() } else { 0.0 };
        diags[node] = d;
    }
    RateReport::new(Protocol::Imh, direction, mode, rates, diags)
}
