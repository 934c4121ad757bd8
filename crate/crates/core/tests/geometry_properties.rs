use std::collections::HashMap;

use cellscale::channel::{interference_psd, link_rate, ring_interference_bound, LinkBudget};
use cellscale::special::hurwitz_zeta;
use cellscale::subcell::Axial;
use cellscale::Point2D;
use proptest::prelude::*;

const SQRT7: f64 = 2.645_751_311_064_590_7;

/// Axial coordinates of a `side x side` block of subcells.
fn block(side: i32) -> Vec<Axial> {
    (0..side)
        .flat_map(|r| (0..side).map(move |c| Axial::new(c - r / 2, r)))
        .collect()
}

#[test]
fn same_color_subcells_are_sqrt7_spacings_apart() {
    for side in [7, 21, 70] {
        let cells = block(side);
        let spacing = 0.37;
        let mut by_color: HashMap<u8, Vec<Point2D>> = HashMap::new();
        for a in &cells {
            by_color.entry(a.color()).or_default().push(a.to_offset(spacing));
        }
        assert_eq!(by_color.len(), 7);
        let mut closest = f64::INFINITY;
        for pts in by_color.values() {
            for (i, p) in pts.iter().enumerate() {
                for q in &pts[i + 1..] {
                    closest = closest.min((*p - *q).norm());
                }
            }
        }
        assert!((closest - SQRT7 * spacing).abs() < 1e-9, "side {side}: {closest}");
    }
}

#[test]
fn neighbors_never_share_a_color() {
    for a in block(70) {
        let mut colors: Vec<u8> = a.neighbors().map(Axial::color).collect();
        colors.push(a.color());
        colors.sort_unstable();
        colors.dedup();
        assert_eq!(colors.len(), 7, "{a:?}");
    }
}

#[test]
fn each_slot_activates_one_seventh_of_full_periods() {
    // a 7 x 7 block is one full period of the schedule
    for periods in [1, 3, 10] {
        let cells = block(7 * periods);
        let mut count = [0usize; 7];
        for a in &cells {
            count[a.color() as usize] += 1;
        }
        for c in count {
            assert_eq!(c * 7, cells.len());
        }
    }
}

/// Same-subchannel gain at a receiver in the home cell from the other cells
/// of a hexagonal layout with circumradius `r`, truncated after `rings`.
fn hex_ring_sum(r: f64, alpha: f64, rx: Point2D, rings: i32) -> f64 {
    let s = r * 3f64.sqrt();
    let mut total = 0.0;
    for q in -rings..=rings {
        for t in -rings..=rings {
            let a = Axial::new(q, t);
            if a.hex_len() == 0 || a.hex_len() > rings {
                continue;
            }
            total += ((a.to_offset(s) - rx).norm()).powf(-alpha);
        }
    }
    total
}

#[test]
fn ring_bound_dominates_truncated_hex_sums() {
    let r = 0.8;
    for alpha in [2.5, 3.0, 4.0] {
        let bound = ring_interference_bound(r, alpha).unwrap();
        // center, edge midpoint and vertex of the home cell
        let inradius = r * 3f64.sqrt() / 2.0;
        for rx in [
            Point2D::new(0.0, 0.0),
            Point2D::new(0.0, inradius),
            Point2D::new(r * 0.5, inradius),
        ] {
            let sum = hex_ring_sum(r, alpha, rx, 30);
            assert!(sum <= bound, "alpha {alpha}: {sum} > {bound}");
        }
    }
}

#[test]
fn zeta_reference_values() {
    let pi = std::f64::consts::PI;
    assert!((hurwitz_zeta(2.0, 1.0).unwrap() - pi * pi / 6.0).abs() < 1e-9);
    assert!((hurwitz_zeta(3.0, 1.0).unwrap() - 1.202_056_903_2).abs() < 1e-9);
}

fn budget(signal: f64, interference: f64) -> LinkBudget {
    LinkBudget {
        signal_power: signal,
        interference_power: interference,
        noise_power: 1.0,
        link_bandwidth: 10.0,
        duty: 0.5,
    }
}

proptest! {
    #[test]
    fn rate_rises_with_signal_and_falls_with_interference(
        s in 1e-6..1e6f64,
        i in 0.0..1e6f64,
        k in 1.0..100.0f64,
    ) {
        prop_assert!(link_rate(&budget(s * k, i)) >= link_rate(&budget(s, i)));
        prop_assert!(link_rate(&budget(s, i * k)) <= link_rate(&budget(s, i)));
        prop_assert!(link_rate(&budget(s, i)) >= 0.0);
    }

    #[test]
    fn psd_never_drops_below_noise(
        pts in prop::collection::vec((-10.0..10.0f64, -10.0..10.0f64, 0.0..5.0f64), 0..20),
        n0 in 0.0..2.0f64,
        w in 0.1..100.0f64,
    ) {
        let rx = Point2D::new(20.0, 20.0);
        let interferers: Vec<(Point2D, f64)> = pts.iter().map(|&(x, y, p)| (Point2D::new(x, y), p)).collect();
        prop_assert!(interference_psd(rx, &interferers, w, 3.5, n0).unwrap() >= n0);
    }

    #[test]
    fn zeta_shift_identity(s in 1.2..8.0f64, a in 0.05..5.0f64) {
        let lhs = hurwitz_zeta(s, a).unwrap();
        let rhs = a.powf(-s) + hurwitz_zeta(s, a + 1.0).unwrap();
        prop_assert!(((lhs - rhs) / lhs).abs() < 1e-9);
    }

    #[test]
    fn color_is_a_lattice_homomorphism(q in -500..500i32, r in -500..500i32) {
        // shifting by a reuse vector keeps the color
        let a = Axial::new(q, r);
        prop_assert_eq!(Axial::new(q + 1, r + 2).color(), a.color());
        prop_assert_eq!(Axial::new(q + 3, r - 1).color(), a.color());
    }
}
