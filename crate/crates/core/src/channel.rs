//! Path loss, the Shannon link-rate primitive, and interference densities.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2D;
use crate::special::hurwitz_zeta;

/// Everything needed to evaluate one link's rate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LinkBudget {
    /// Received desired power after array gain (W).
    pub signal_power: f64,
    /// Total in-band interference, self-interference included (W).
    pub interference_power: f64,
    /// `N0` times the link bandwidth (W).
    pub noise_power: f64,
    /// Hz.
    pub link_bandwidth: f64,
    /// Time share in `(0, 1]`.
    pub duty: f64,
}

impl LinkBudget {
    pub fn sinr(&self) -> f64 {
        self.signal_power / (self.interference_power + self.noise_power)
    }
}

/// Power gain `d^-alpha`.
pub fn path_gain(d: f64, alpha: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::domain("path_gain", format!("distance must be positive, got {d}")));
    }
    Ok(d.powf(-alpha))
}

/// `d^-alpha` evaluated from the squared distance, with exact fast paths for
/// the common integer exponents.
#[inline]
pub fn gain_from_d2(d2: f64, alpha: f64) -> f64 {
    if alpha == 4.0 {
        1.0 / (d2 * d2)
    } else if alpha == 3.0 {
        1.0 / (d2 * d2.sqrt())
    } else if alpha == 2.0 {
        1.0 / d2
    } else {
        d2.powf(-0.5 * alpha)
    }
}

/// `duty * B * log2(1 + S / (I + N))` in bits/s.
pub fn link_rate(b: &LinkBudget) -> f64 {
    if b.signal_power <= 0.0 {
        return 0.0;
    }
    b.duty * b.link_bandwidth * log2_1p(b.sinr())
}

/// `log2(1 + x)` accurate for small `x`.
#[inline]
pub fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

/// Noise plus interference PSD at `receiver`: `N0 + sum_j P_j d_j^-alpha / W`
/// with planar distances.
pub fn interference_psd(
    receiver: Point2D,
    interferers: &[(Point2D, f64)],
    bandwidth: f64,
    alpha: f64,
    n0: f64,
) -> Result<f64> {
    let mut sum = 0.0;
    for (p, power) in interferers {
        let d = (*p - receiver).norm();
        sum += power * path_gain(d, alpha).map_err(|_| {
            Error::domain("interference_psd", "interferer coincides with receiver")
        })?;
    }
    Ok(n0 + sum / bandwidth)
}

/// Closed-form bound on the same-subchannel interference gain from all other
/// cells of an infinite hexagonal layout, per unit interferer power:
/// `12 r^-alpha (3/2)^(alpha-1) zeta(alpha-1, 1/3)`.
pub fn ring_interference_bound(r_cell: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::domain(
            "ring_interference_bound",
            format!("sum diverges for alpha = {alpha} <= 2"),
        ));
    }
    Ok(12.0 * r_cell.powf(-alpha) * 1.5f64.powf(alpha - 1.0) * hurwitz_zeta(alpha - 1.0, 1.0 / 3.0)?)
}

/// Concentric-ring bound on `sum_r d^-alpha` over `n` uniform nodes seen from
/// a base station: `e (ln n + 1) n^((1-nu) alpha / 2)`.
pub fn stripping_bound(n: usize, nu: f64, alpha: f64) -> f64 {
    let nf = n as f64;
    E * (nf.ln() + 1.0) * nf.powf((1.0 - nu) * alpha / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn budget(s: f64, i: f64, n: f64, w: f64, duty: f64) -> LinkBudget {
        LinkBudget {
            signal_power: s,
            interference_power: i,
            noise_power: n,
            link_bandwidth: w,
            duty,
        }
    }

    #[test]
    fn path_gain_values() {
        assert_eq!(path_gain(1.0, 3.7).unwrap(), 1.0);
        assert_eq!(path_gain(2.0, 4.0).unwrap(), 0.0625);
        assert!(path_gain(0.0, 4.0).is_err());
        assert!(path_gain(-1.0, 4.0).is_err());
    }

    #[test]
    fn gain_fast_paths_agree_with_powf() {
        for &a in &[2.0, 3.0, 4.0, 3.3] {
            for &d in &[0.01, 0.5, 1.0, 7.0] {
                let g = gain_from_d2(d * d, a);
                assert!((g - d.powf(-a)).abs() <= 1e-12 * g);
            }
        }
    }

    #[test]
    fn link_rate_values() {
        assert_eq!(link_rate(&budget(1.0, 0.0, 1.0, 1.0, 1.0)), 1.0);
        assert_eq!(link_rate(&budget(0.0, 0.0, 1.0, 1.0, 1.0)), 0.0);
        assert!((link_rate(&budget(3.0, 0.0, 1.0, 7.0, 1.0 / 7.0)) - 2.0).abs() < 1e-12);
        // head-link arithmetic: share 0.1, SINR 3
        assert!((link_rate(&budget(3.0, 0.0, 1.0, 1.0, 0.1)) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn psd_values() {
        let rx = Point2D::new(0.0, 0.0);
        assert_eq!(interference_psd(rx, &[], 5.0, 4.0, 0.3).unwrap(), 0.3);
        let one = [(Point2D::new(2.0, 0.0), 16.0)];
        assert_eq!(interference_psd(rx, &one, 1.0, 4.0, 0.0).unwrap(), 1.0);
        let two = [(Point2D::new(2.0, 0.0), 16.0), (Point2D::new(0.0, -2.0), 16.0)];
        let n0 = 0.5;
        let e1 = interference_psd(rx, &one, 1.0, 4.0, n0).unwrap() - n0;
        let e2 = interference_psd(rx, &two, 1.0, 4.0, n0).unwrap() - n0;
        assert!((e2 - 2.0 * e1).abs() < 1e-12);
        assert!(interference_psd(rx, &[(rx, 1.0)], 1.0, 4.0, 0.0).is_err());
    }

    #[test]
    fn ring_bound_values() {
        let z = hurwitz_zeta(2.0, 1.0 / 3.0).unwrap();
        let b = ring_interference_bound(1.0, 3.0).unwrap();
        assert!((b - 27.0 * z).abs() < 1e-9);
        let b2 = ring_interference_bound(2.0, 3.0).unwrap();
        assert!((b / b2 - 8.0).abs() < 1e-12);
        assert!(ring_interference_bound(1.0, 2.0).is_err());
    }

    #[test]
    fn stripping_bound_values() {
        let got = stripping_bound(1024, 0.0, 3.0);
        let want = E * (1024f64.ln() + 1.0) * 32768.0;
        assert!((got - want).abs() < 1e-6);
        assert!((got - 7.065e5).abs() < 1e3);
        let flat = stripping_bound(5000, 1.0, 3.0);
        assert!((flat - E * (5000f64.ln() + 1.0)).abs() < 1e-9);
    }
}
