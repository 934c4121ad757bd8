//! Per-node achievable rates of the three infrastructure protocols.
//!
//! * [`ish`]: single hop between each node and its base station, FDMA groups
//!   of `ell` users served by MU-MIMO.
//! * [`imh`]: multi-hop through one relay node per routing subcell, the BS
//!   multiplexing `ell` routes at the cell center.
//! * [`irh`]: single-hop access to the nearest access point (BS or relay
//!   node) plus multi-hop wireless backhaul among relay nodes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{NetworkRealization, Point2D};

pub mod imh;
pub mod irh;
pub mod ish;

pub use imh::{imh_build_routes, imh_rates, imh_rates_on, imh_routes_on, Route, RoutePlan};
pub use irh::irh_rates;
pub use ish::{ish_rates, ish_rates_with};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Protocol {
    Ish,
    Imh,
    Irh,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Dl,
    Ul,
}

/// How time and bandwidth shares are assigned to links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Nominal shares from the average load (`m ell / n` and friends).
    #[default]
    Paper,
    /// Shares from the realized load of each cell, subcell or access point.
    Exact,
}

macro_rules! text_enum {
    ($ty:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        impl $ty {
            pub fn as_str(self) -> &'static str {
                match self {
                    $($ty::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $ty {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($text => Ok($ty::$variant),)+
                    other => Err(Error::domain(
                        stringify!($ty),
                        format!("unknown value {other:?}"),
                    )),
                }
            }
        }
    };
}

text_enum!(Protocol { Ish => "ish", Imh => "imh", Irh => "irh" });
text_enum!(Direction { Dl => "dl", Ul => "ul" });
text_enum!(Mode { Paper => "paper", Exact => "exact" });

/// Bottleneck link of one node.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkDiag {
    pub sinr: f64,
    pub duty: f64,
    pub bandwidth: f64,
}

impl LinkDiag {
    pub fn rate(&self) -> f64 {
        self.duty * self.bandwidth * crate::channel::log2_1p(self.sinr)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub protocol: Protocol,
    pub direction: Direction,
    pub mode: Mode,
    pub per_node_rate: Vec<f64>,
    /// Rate every node is guaranteed: the minimum over `per_node_rate`.
    pub min_rate: f64,
    /// Nodes that could not be served (no route); their rate is 0.
    pub failures: usize,
    /// Relay-based only: whether relay nodes were used at all.
    pub rn_used: bool,
    pub diagnostics: Vec<LinkDiag>,
    /// Relay-based only: access-phase time fraction of each node.
    pub tau: Vec<f64>,
}

impl RateReport {
    pub(crate) fn new(
        protocol: Protocol,
        direction: Direction,
        mode: Mode,
        per_node_rate: Vec<f64>,
        diagnostics: Vec<LinkDiag>,
    ) -> Self {
        let failures = per_node_rate.iter().filter(|r| **r <= 0.0).count();
        let min_rate = per_node_rate.iter().copied().fold(f64::INFINITY, f64::min);
        RateReport {
            protocol,
            direction,
            mode,
            min_rate: if min_rate.is_finite() { min_rate } else { 0.0 },
            per_node_rate,
            failures,
            rn_used: false,
            diagnostics,
            tau: Vec::new(),
        }
    }

    /// Smallest strictly positive per-node rate, ignoring failed nodes.
    pub fn min_served_rate(&self) -> Option<f64> {
        self.per_node_rate
            .iter()
            .copied()
            .filter(|r| *r > 0.0)
            .reduce(f64::min)
    }

    fn scale(mut self, factor: f64) -> Self {
        for r in &mut self.per_node_rate {
            *r *= factor;
        }
        for d in &mut self.diagnostics {
            d.duty *= factor;
        }
        self.min_rate *= factor;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ProtocolOptions {
    pub mode: Mode,
    /// Halve every rate for the uplink/downlink time split.
    pub tdd_halving: bool,
}

/// Dispatches to the protocol's rate computation.
pub fn rates(
    real: &NetworkRealization,
    protocol: Protocol,
    direction: Direction,
    opts: ProtocolOptions,
) -> Result<RateReport> {
    let report = match protocol {
        Protocol::Ish => ish_rates_with(real, direction, opts.mode),
        Protocol::Imh => imh_rates(real, direction, opts.mode)?,
        Protocol::Irh => irh::irh_rates_with(real, direction, opts.mode)?,
    };
    Ok(if opts.tdd_halving { report.scale(0.5) } else { report })
}

/// Optimal decode-and-forward time split between an access rate `a` and a
/// backhaul rate `b`: returns `(tau, a b / (a + b))` with `tau = b / (a + b)`.
pub fn tau_star(a: f64, b: f64) -> (f64, f64) {
    if a + b <= 0.0 {
        return (0.5, 0.0);
    }
    if b.is_infinite() {
        return (1.0, a);
    }
    if a.is_infinite() {
        return (0.0, b);
    }
    let tau = b / (a + b);
    (tau, tau * a)
}

/// A transmitter active in some time slot.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Emitter {
    pub pos: Point2D,
    pub power: f64,
    pub key: u64,
}

/// Total received power at `rx` from `emitters`, skipping the one with `skip`.
pub(crate) fn received_power(
    real: &NetworkRealization,
    emitters: &[Emitter],
    rx: Point2D,
    skip: u64,
) -> f64 {
    let alpha = real.exponents.alpha;
    emitters
        .iter()
        .filter(|e| e.key != skip)
        .map(|e| e.power * crate::channel::gain_from_d2(real.guarded_dist2(rx, e.pos), alpha))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tau_star_values() {
        assert_eq!(tau_star(3.0, 1.0), (0.25, 0.75));
        assert_eq!(tau_star(0.0, 5.0).1, 0.0);
        assert_eq!(tau_star(0.0, 0.0), (0.5, 0.0));
        let (t, r) = tau_star(2.0, 2.0);
        assert_eq!((t, r), (0.5, 1.0));
        assert_eq!(tau_star(4.0, f64::INFINITY), (1.0, 4.0));
    }

    #[test]
    fn enum_text_round_trip() {
        for p in [Protocol::Ish, Protocol::Imh, Protocol::Irh] {
            assert_eq!(p.as_str().parse::<Protocol>().unwrap(), p);
        }
        assert_eq!("UL".parse::<Direction>().unwrap(), Direction::Ul);
        assert_eq!("exact".parse::<Mode>().unwrap(), Mode::Exact);
        assert!("bogus".parse::<Mode>().is_err());
    }
}
