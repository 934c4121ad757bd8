//! Scaling exponents, model constants and their instantiation at a given `n`.
//!
//! Every network quantity grows as a power of the number of user nodes:
//!
//! | quantity            | value           | exponent range |
//! |---------------------|-----------------|----------------|
//! | bandwidth `W`       | `W0 · n^psi`    | `psi >= 0`     |
//! | area `A`            | `A0 · n^nu`     | `[0, 1]`       |
//! | base stations `m`   | `m0 · n^beta`   | `[0, 1]`       |
//! | BS array dims `ell` | `l0 · n^gamma`  | `[0, 1-beta]`  |
//! | relay nodes `k`     | `k0 · n^rho`    | `[beta, 1]`    |

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingExponents {
    pub psi: f64,
    pub nu: f64,
    pub beta: f64,
    pub gamma: f64,
    pub rho: f64,
    /// Path-loss exponent; must exceed 2 for interference sums to converge.
    pub alpha: f64,
}

impl Default for ScalingExponents {
    fn default() -> Self {
        ScalingExponents {
            psi: 0.0,
            nu: 0.0,
            beta: 0.5,
            gamma: 0.25,
            rho: 0.75,
            alpha: 4.0,
        }
    }
}

fn check(field: &'static str, value: f64, ok: bool, expected: &'static str) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            field,
            value,
            expected,
        })
    }
}

impl ScalingExponents {
    pub fn validate(&self) -> Result<()> {
        validate_exponents(self)
    }

    /// `(x)^+` shorthand used throughout the closed forms.
    pub fn excess_infrastructure(&self) -> f64 {
        (self.beta + self.gamma - self.rho).max(0.0)
    }
}

/// Checks every range constraint, reporting the first offending field.
pub fn validate_exponents(e: &ScalingExponents) -> Result<()> {
    check("psi", e.psi, e.psi >= 0.0, "psi >= 0")?;
    check("nu", e.nu, (0.0..=1.0).contains(&e.nu), "nu in [0, 1]")?;
    check("beta", e.beta, (0.0..=1.0).contains(&e.beta), "beta in [0, 1]")?;
    check(
        "gamma",
        e.gamma,
        e.gamma >= 0.0 && e.gamma <= 1.0 - e.beta + 1e-12,
        "gamma in [0, 1 - beta]",
    )?;
    check(
        "rho",
        e.rho,
        e.rho >= e.beta - 1e-12 && e.rho <= 1.0,
        "rho in [beta, 1]",
    )?;
    check("alpha", e.alpha, e.alpha > 2.0, "alpha > 2")?;
    Ok(())
}

/// Prefactors of the scaling laws plus transmit powers and noise density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelConstants {
    pub w0: f64,
    pub a0: f64,
    pub m0: f64,
    pub l0: f64,
    pub k0: f64,
    /// Node transmit power (W).
    pub p_node: f64,
    /// Base-station transmit power (W).
    pub p_bs: f64,
    /// Relay-node transmit power (W).
    pub p_rn: f64,
    /// Noise power spectral density (W/Hz).
    pub n0: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            w0: 1.0,
            a0: 1.0,
            m0: 1.0,
            l0: 1.0,
            k0: 1.0,
            p_node: 1.0,
            p_bs: 1.0,
            p_rn: 1.0,
            n0: 1.0,
        }
    }
}

impl ModelConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("w0", self.w0),
            ("a0", self.a0),
            ("m0", self.m0),
            ("l0", self.l0),
            ("k0", self.k0),
            ("p_node", self.p_node),
            ("p_bs", self.p_bs),
            ("p_rn", self.p_rn),
            ("n0", self.n0),
        ];
        for (field, value) in fields {
            check(field, value, value > 0.0, "strictly positive")?;
        }
        Ok(())
    }

    /// Far-field guard distance: links shorter than this are clamped.
    pub fn min_distance(&self) -> f64 {
        1e-3 * self.a0.sqrt()
    }
}

/// Concrete network dimensions for one value of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceParams {
    pub n: usize,
    /// Total bandwidth (Hz).
    pub bandwidth: f64,
    pub area: f64,
    /// Number of base stations.
    pub m: usize,
    /// Effective BS array dimensions.
    pub ell: usize,
    /// Number of relay nodes.
    pub k: usize,
}

impl InstanceParams {
    /// Nominal number of users per cell, `n / m`.
    pub fn users_per_cell(&self) -> f64 {
        self.n as f64 / self.m as f64
    }
}

fn round_half_up(x: f64) -> usize {
    (x + 0.5).floor().max(0.0) as usize
}

/// Instantiates the network dimensions for `n` users.
pub fn instantiate(e: &ScalingExponents, c: &ModelConstants, n: usize) -> Result<InstanceParams> {
    validate_exponents(e)?;
    c.validate()?;
    if n == 0 {
        return Err(Error::NTooSmall {
            n,
            reason: "need at least one user node".into(),
        });
    }
    let nf = n as f64;
    let m = round_half_up(c.m0 * nf.powf(e.beta)).max(1);
    let ell = round_half_up(c.l0 * nf.powf(e.gamma)).max(1);
    let k = round_half_up(c.k0 * nf.powf(e.rho)).max(m);
    if ell > n / m {
        return Err(Error::NTooSmall {
            n,
            reason: format!("ell = {ell} exceeds floor(n/m) = {}", n / m),
        });
    }
    Ok(InstanceParams {
        n,
        bandwidth: c.w0 * nf.powf(e.psi),
        area: c.a0 * nf.powf(e.nu),
        m,
        ell,
        k,
    })
}
