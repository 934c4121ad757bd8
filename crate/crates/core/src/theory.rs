//! Closed-form rate-scaling exponents, operating regimes and the relay
//! switching rule.
//!
//! All exponents have the shape `offset + min(psi, knee)`: the `psi` arm is
//! the bandwidth-limited one, the `knee` arm the power-limited one.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{validate_exponents, ScalingExponents};
use crate::protocols::{Direction, Protocol};

/// What an exponent describes: a protocol, the cut-set bound, or capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Ub,
    Capacity,
    Ish,
    Imh,
    Irh,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [Scheme::Ub, Scheme::Capacity, Scheme::Ish, Scheme::Imh, Scheme::Irh];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Ub => "ub",
            Scheme::Capacity => "capacity",
            Scheme::Ish => "ish",
            Scheme::Imh => "imh",
            Scheme::Irh => "irh",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::domain("Scheme", format!("unknown value {s:?}")))
    }
}

impl From<Protocol> for Scheme {
    fn from(p: Protocol) -> Self {
        match p {
            Protocol::Ish => Scheme::Ish,
            Protocol::Imh => Scheme::Imh,
            Protocol::Irh => Scheme::Irh,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegimeLabel {
    BandwidthLimitedI,
    BandwidthLimitedII,
    PowerLimited,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RegimeLabel::BandwidthLimitedI => "bandwidth-limited-I",
            RegimeLabel::BandwidthLimitedII => "bandwidth-limited-II",
            RegimeLabel::PowerLimited => "power-limited",
        })
    }
}

/// Which arm of `min(psi, knee)` is active. Ties go to `Bandwidth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Bandwidth,
    Power,
}

impl fmt::Display for Arm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Arm::Bandwidth => "bandwidth",
            Arm::Power => "power",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentResult {
    pub scheme: Scheme,
    pub direction: Direction,
    pub exponent: f64,
    pub arm: Arm,
    /// Power-limited knee of the active formula, in units of `psi`.
    pub knee: f64,
    /// Relay-based scheme only: whether the relays are used.
    pub rn_used: Option<bool>,
}

fn capped(offset: f64, psi: f64, knee: f64) -> (f64, Arm) {
    if psi <= knee {
        (offset + psi, Arm::Bandwidth)
    } else {
        (offset + knee, Arm::Power)
    }
}

/// `(1 - nu) alpha / 2`: the knee of the bound and of multi-hop.
pub fn network_knee(e: &ScalingExponents) -> f64 {
    (1.0 - e.nu) * e.alpha / 2.0
}

/// `(beta - nu) alpha / 2`: the downlink knee of single-hop.
pub fn cell_knee(e: &ScalingExponents) -> f64 {
    (e.beta - e.nu) * e.alpha / 2.0
}

/// Whether relay nodes are worth using.
///
/// Downlink: `rho >= beta + gamma + (beta - nu) alpha / 2 - psi`. Uplink:
/// `min(psi - (beta+gamma-rho)^+, (rho-nu) alpha/2) >= min(psi, (beta-nu) alpha/2 + 1 - beta)`.
/// Equality counts as using them.
pub fn rn_switch_decision(direction: Direction, e: &ScalingExponents) -> bool {
    let excess = e.excess_infrastructure();
    match direction {
        Direction::Dl => e.rho >= e.beta + e.gamma + cell_knee(e) - e.psi,
        Direction::Ul => {
            let lhs = (e.psi - excess).min((e.rho - e.nu) * e.alpha / 2.0);
            let rhs = e.psi.min(cell_knee(e) + 1.0 - e.beta);
            lhs >= rhs
        }
    }
}

/// Closed-form scaling exponent of the per-node rate.
///
/// Capacity is only characterized in the uplink when `beta + gamma = 1`,
/// where it coincides with the bound; other uplink capacity queries fail.
pub fn theoretical_exponent(scheme: Scheme, direction: Direction, e: &ScalingExponents) -> Result<ExponentResult> {
    validate_exponents(e)?;
    let bg = e.beta + e.gamma - 1.0;
    let net = network_knee(e);
    let ish_ul_knee = cell_knee(e) + 1.0 - e.beta;
    let mut rn_used = None;
    let (offset, knee) = match (scheme, direction) {
        (Scheme::Ub | Scheme::Capacity | Scheme::Imh, Direction::Dl) | (Scheme::Imh, Direction::Ul) => (bg, net),
        (Scheme::Ub, Direction::Ul) => (0.0, net),
        (Scheme::Capacity, Direction::Ul) => {
            if (bg).abs() > 1e-12 {
                return Err(Error::domain(
                    "theoretical_exponent",
                    "uplink capacity is only characterized for beta + gamma = 1",
                ));
            }
            (0.0, net)
        }
        (Scheme::Ish, Direction::Dl) => (bg, cell_knee(e)),
        (Scheme::Ish, Direction::Ul) => (bg, ish_ul_knee),
        (Scheme::Irh, dir) => {
            let used = rn_switch_decision(dir, e);
            rn_used = Some(used);
            let relay_knee = (e.rho - e.nu) * e.alpha / 2.0;
            let offset = (e.beta + e.gamma).min(e.rho) - 1.0;
            match (used, dir) {
                (true, Direction::Dl) => (offset, relay_knee),
                (true, Direction::Ul) => (offset, relay_knee + e.excess_infrastructure()),
                (false, Direction::Dl) => (bg, cell_knee(e)),
                (false, Direction::Ul) => (bg, ish_ul_knee),
            }
        }
    };
    let (exponent, arm) = capped(offset, e.psi, knee);
    Ok(ExponentResult {
        scheme,
        direction,
        exponent,
        arm,
        knee,
        rn_used,
    })
}

/// Regime of operation, from the position of `psi` relative to the
/// single-hop and network knees.
pub fn classify_regime(e: &ScalingExponents) -> RegimeLabel {
    if e.psi < cell_knee(e) {
        RegimeLabel::BandwidthLimitedI
    } else if e.psi <= network_knee(e) {
        RegimeLabel::BandwidthLimitedII
    } else {
        RegimeLabel::PowerLimited
    }
}

/// Characteristic lengths: the exponents of the cell radius `(nu-beta)/2`
/// and of the nearest-neighbor distance `(nu-1)/2`, and the distance
/// `W^(-1/alpha)` at which a unit-power link has unit SNR per hertz.
pub fn characteristic_radii(e: &ScalingExponents, _n: usize, bandwidth: f64) -> (f64, f64, f64) {
    (
        (e.nu - e.beta) / 2.0,
        (e.nu - 1.0) / 2.0,
        bandwidth.powf(-1.0 / e.alpha),
    )
}

fn candidate_knees(scheme: Scheme, direction: Direction, e: &ScalingExponents) -> Vec<f64> {
    let net = network_knee(e);
    let cell = cell_knee(e);
    let ish_ul = cell + 1.0 - e.beta;
    let relay = (e.rho - e.nu) * e.alpha / 2.0;
    let x = e.excess_infrastructure();
    match (scheme, direction) {
        (Scheme::Ub | Scheme::Capacity | Scheme::Imh, _) => vec![net],
        (Scheme::Ish, Direction::Dl) => vec![cell],
        (Scheme::Ish, Direction::Ul) => vec![ish_ul],
        (Scheme::Irh, Direction::Dl) => vec![cell, relay, e.beta + e.gamma + cell - e.rho],
        (Scheme::Irh, Direction::Ul) => vec![ish_ul, relay, relay + x, ish_ul + x, x],
    }
}

/// `psi` values at which the exponent's active arm changes (knees, and the
/// relay switching threshold), ascending. `psi` in `e` is ignored.
pub fn breakpoints(scheme: Scheme, direction: Direction, e: &ScalingExponents) -> Vec<f64> {
    let at = |psi: f64| {
        let mut e = *e;
        e.psi = psi;
        theoretical_exponent(scheme, direction, &e).map(|r| r.exponent)
    };
    let h = 1e-6;
    let mut out: Vec<f64> = candidate_knees(scheme, direction, e)
        .into_iter()
        .filter(|&p| p > h)
        .filter(|&p| match (at(p - h), at(p), at(p + h)) {
            (Ok(l), Ok(c), Ok(r)) => ((r - c) - (c - l)).abs() > 1e-9,
            _ => false,
        })
        .collect();
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(psi: f64, nu: f64, beta: f64, gamma: f64, rho: f64) -> ScalingExponents {
        ScalingExponents {
            psi,
            nu,
            beta,
            gamma,
            rho,
            alpha: 4.0,
        }
    }

    fn exp(s: Scheme, d: Direction, x: &ScalingExponents) -> f64 {
        theoretical_exponent(s, d, x).unwrap().exponent
    }

    #[test]
    fn substitution_examples() {
        assert_eq!(exp(Scheme::Ish, Direction::Dl, &e(0.0, 0.0, 0.5, 0.0, 0.5)), -0.5);
        let x = e(3.0, 0.0, 0.5, 0.25, 0.75);
        let r = theoretical_exponent(Scheme::Imh, Direction::Dl, &x).unwrap();
        assert_eq!((r.exponent, r.arm), (1.75, Arm::Power));
        assert_eq!(exp(Scheme::Ish, Direction::Dl, &x), 0.75);
        let d = ScalingExponents::default();
        assert_eq!(exp(Scheme::Ish, Direction::Dl, &d), -0.25);
        assert_eq!(exp(Scheme::Imh, Direction::Dl, &d), -0.25);
    }

    #[test]
    fn relay_switch_examples() {
        // rho = beta, gamma > 0, psi = 0, nu = beta: falls back to single hop
        let x = e(0.0, 0.5, 0.5, 0.25, 0.5);
        assert!(!rn_switch_decision(Direction::Dl, &x));
        let r = theoretical_exponent(Scheme::Irh, Direction::Dl, &x).unwrap();
        assert_eq!(r.rn_used, Some(false));
        assert_eq!(r.exponent, exp(Scheme::Ish, Direction::Dl, &x));
        // rho = beta + gamma = 1 in the uplink
        for psi in [0.0, 0.5, 1.0, 2.5, 4.0] {
            assert!(rn_switch_decision(Direction::Ul, &e(psi, 0.0, 0.5, 0.5, 1.0)));
        }
        // rho > beta + gamma with psi past the cell knee always uses relays
        for psi in [1.0, 1.5, 3.0] {
            assert!(rn_switch_decision(Direction::Dl, &e(psi, 0.0, 0.5, 0.25, 0.8)));
        }
    }

    #[test]
    fn regimes() {
        assert_eq!(classify_regime(&e(0.5, 0.0, 0.5, 0.0, 0.5)), RegimeLabel::BandwidthLimitedI);
        assert_eq!(classify_regime(&e(1.5, 0.0, 0.5, 0.0, 0.5)), RegimeLabel::BandwidthLimitedII);
        assert_eq!(classify_regime(&e(2.5, 0.0, 0.5, 0.0, 0.5)), RegimeLabel::PowerLimited);
        // ties stay bandwidth limited
        assert_eq!(classify_regime(&e(2.0, 0.0, 0.5, 0.0, 0.5)), RegimeLabel::BandwidthLimitedII);
        assert_eq!(classify_regime(&e(1.0, 0.0, 0.5, 0.0, 0.5)), RegimeLabel::BandwidthLimitedII);
    }

    #[test]
    fn radii() {
        let x = e(0.0, 0.5, 0.5, 0.0, 0.5);
        let (rc, rs, rv) = characteristic_radii(&x, 100, 1.0);
        assert_eq!((rc, rs, rv), (0.0, -0.25, 1.0));
    }

    #[test]
    fn breakpoint_examples() {
        let x = e(0.0, 0.0, 0.5, 0.25, 0.75);
        assert_eq!(breakpoints(Scheme::Ish, Direction::Dl, &x), vec![1.0]);
        assert_eq!(breakpoints(Scheme::Imh, Direction::Dl, &x), vec![2.0]);
        assert_eq!(breakpoints(Scheme::Ish, Direction::Ul, &x), vec![1.5]);
        assert_eq!(breakpoints(Scheme::Ub, Direction::Ul, &x), vec![2.0]);
    }

    #[test]
    fn exponent_slope_is_one_then_zero() {
        let x = e(0.0, 0.0, 0.5, 0.25, 0.75);
        for s in [Scheme::Ish, Scheme::Imh, Scheme::Ub] {
            let knee = *breakpoints(s, Direction::Dl, &x).last().unwrap();
            let f = |psi: f64| exp(s, Direction::Dl, &ScalingExponents { psi, ..x });
            assert!((f(knee - 0.1) - f(knee - 0.2) - 0.1).abs() < 1e-12);
            assert!((f(knee + 0.2) - f(knee + 0.1)).abs() < 1e-12);
        }
    }

    #[test]
    fn uplink_capacity_only_on_full_infrastructure() {
        assert!(theoretical_exponent(Scheme::Capacity, Direction::Ul, &e(1.0, 0.0, 0.5, 0.25, 0.75)).is_err());
        let r = theoretical_exponent(Scheme::Capacity, Direction::Ul, &e(1.0, 0.0, 0.5, 0.5, 0.75)).unwrap();
        assert_eq!(r.exponent, 1.0);
    }

    #[test]
    fn invalid_exponents_propagate() {
        assert!(theoretical_exponent(Scheme::Imh, Direction::Dl, &e(0.0, 0.0, 0.6, 0.5, 0.6)).is_err());
    }
}
