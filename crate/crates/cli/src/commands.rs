//! Subcommand implementations. Each `*_report` function computes the records
//! a subcommand emits; writing is left to the caller.

use anyhow::{bail, Result};
use cellscale::bounds::cutset;
use cellscale::experiments::{compare_to_theory, fit_exponent, geometric_n_values, run_sweep, SweepPlan, SweepRow};
use cellscale::protocols::{rates, ProtocolOptions};
use cellscale::theory::{
    breakpoints, cell_knee, characteristic_radii, classify_regime, network_knee, theoretical_exponent, Scheme,
};
use cellscale::{Direction, Mode, NetworkRealization, Protocol, ScalingExponents};
use serde::Serialize;

use crate::config::RunConfig;

/// Schemes shown by `exponent` and `figure`.
pub const SCHEMES: [Scheme; 4] = [Scheme::Ub, Scheme::Ish, Scheme::Imh, Scheme::Irh];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentRow {
    pub proto: Scheme,
    pub direction: Direction,
    pub exponent: f64,
    pub branch: String,
    pub knee: f64,
    pub rn_used: Option<bool>,
}

pub fn exponent_report(cfg: &RunConfig) -> Result<Vec<ExponentRow>> {
    let mut rows = Vec::new();
    for scheme in SCHEMES {
        for direction in [Direction::Dl, Direction::Ul] {
            let r = theoretical_exponent(scheme, direction, &cfg.exponents)?;
            rows.push(ExponentRow {
                proto: scheme,
                direction,
                exponent: r.exponent,
                branch: r.arm.to_string(),
                knee: r.knee,
                rn_used: r.rn_used,
            });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeRow {
    pub regime: String,
    pub psi: f64,
    /// Single-hop knee `(beta - nu) alpha / 2`.
    pub cell_threshold: f64,
    /// Network knee `(1 - nu) alpha / 2`.
    pub network_threshold: f64,
    pub r_cell_exponent: f64,
    pub r_s_exponent: f64,
    pub r_v_exponent: f64,
    pub n: usize,
    pub bandwidth: f64,
    pub r_v: f64,
}

pub fn regime_report(cfg: &RunConfig) -> Result<RegimeRow> {
    let e = &cfg.exponents;
    let bandwidth = cfg.constants.w0 * (cfg.n as f64).powf(e.psi);
    let (r_cell, r_s, r_v) = characteristic_radii(e, cfg.n, bandwidth);
    Ok(RegimeRow {
        regime: classify_regime(e).to_string(),
        psi: e.psi,
        cell_threshold: cell_knee(e),
        network_threshold: network_knee(e),
        r_cell_exponent: r_cell,
        r_s_exponent: r_s,
        r_v_exponent: -e.psi / e.alpha,
        n: cfg.n,
        bandwidth,
        r_v,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub proto: Scheme,
    pub direction: Direction,
    pub mode: Mode,
    pub n: usize,
    pub seed: u64,
    pub m: usize,
    pub ell: usize,
    pub k: usize,
    pub bandwidth: f64,
    pub min_rate: f64,
    pub failures: usize,
    pub rn_used: bool,
    pub ub_dl: Option<f64>,
    pub ub_ul: Option<f64>,
    /// The bound in the simulated direction is at least the protocol's
    /// minimum rate.
    pub ub_dominates: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRow {
    pub node: usize,
    pub cell: usize,
    pub x: f64,
    pub y: f64,
    pub rate: f64,
    pub sinr: f64,
    pub duty: f64,
    pub bandwidth: f64,
    pub tau: Option<f64>,
}

pub struct Simulation {
    pub summary: SimulationSummary,
    pub nodes: Vec<NodeRow>,
    pub realization: NetworkRealization,
}

pub fn simulate_report(cfg: &RunConfig) -> Result<Simulation> {
    let real = NetworkRealization::generate(&cfg.exponents, &cfg.constants, cfg.n, cfg.seed, cfg.wrap)?;
    let ub = cutset(&real);
    let p = real.params;
    let ub_here = match cfg.direction {
        Direction::Dl => ub.ub_per_node_dl,
        Direction::Ul => ub.ub_per_node_ul,
    };
    let opts = ProtocolOptions {
        mode: cfg.mode,
        tdd_halving: cfg.tdd_halving,
    };
    let protocol = match cfg.proto {
        Scheme::Ish => Some(Protocol::Ish),
        Scheme::Imh => Some(Protocol::Imh),
        Scheme::Irh => Some(Protocol::Irh),
        Scheme::Ub => None,
        Scheme::Capacity => bail!("capacity has no simulator; use ub or a protocol"),
    };
    let (min_rate, failures, rn_used, nodes) = match protocol {
        Some(proto) => {
            let r = rates(&real, proto, cfg.direction, opts)?;
            let nodes = (0..p.n)
                .map(|i| {
                    let d = r.diagnostics[i];
                    NodeRow {
                        node: i,
                        cell: real.cell_of_node[i],
                        x: real.nodes[i].x,
                        y: real.nodes[i].y,
                        rate: r.per_node_rate[i],
                        sinr: d.sinr,
                        duty: d.duty,
                        bandwidth: d.bandwidth,
                        tau: r.tau.get(i).copied(),
                    }
                })
                .collect();
            (r.min_rate, r.failures, r.rn_used, nodes)
        }
        None => (ub_here.unwrap_or(0.0), 0, false, Vec::new()),
    };
    let summary = SimulationSummary {
        proto: cfg.proto,
        direction: cfg.direction,
        mode: cfg.mode,
        n: p.n,
        seed: cfg.seed,
        m: p.m,
        ell: p.ell,
        k: p.k,
        bandwidth: p.bandwidth,
        min_rate,
        failures,
        rn_used,
        ub_dl: ub.ub_per_node_dl,
        ub_ul: ub.ub_per_node_ul,
        ub_dominates: ub_here.is_some_and(|u| u >= min_rate),
    };
    Ok(Simulation {
        summary,
        nodes,
        realization: real,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepVerdict {
    pub proto: Scheme,
    pub direction: Direction,
    pub mode: Mode,
    pub slope: f64,
    pub stderr: f64,
    pub r2: f64,
    pub theory: f64,
    pub delta: f64,
    pub tolerance: f64,
    pub branch: String,
    pub pass: bool,
    pub dropped: usize,
}

pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub verdict: SweepVerdict,
    pub warnings: Vec<String>,
}

pub fn sweep_plan(cfg: &RunConfig) -> SweepPlan {
    let mut plan = SweepPlan::new(
        cfg.proto,
        cfg.direction,
        cfg.exponents,
        geometric_n_values(cfg.n_min, cfg.n_max),
    );
    plan.trials_per_n = cfg.trials;
    plan.master_seed = cfg.seed;
    plan.mode = cfg.mode;
    plan.constants = cfg.constants;
    plan.wrap = cfg.wrap;
    plan.tdd_halving = cfg.tdd_halving;
    plan
}

pub fn sweep_report(cfg: &RunConfig) -> Result<SweepOutcome> {
    let plan = sweep_plan(cfg);
    let table = run_sweep(&plan)?;
    let est = fit_exponent(&table)?;
    let cmp = compare_to_theory(&est, cfg.proto, cfg.direction, &cfg.exponents, cfg.tolerance)?;
    let warnings = table
        .dropped
        .iter()
        .map(|(n, why)| format!("dropped n={n}: {why}"))
        .collect();
    Ok(SweepOutcome {
        verdict: SweepVerdict {
            proto: cfg.proto,
            direction: cfg.direction,
            mode: cfg.mode,
            slope: est.slope,
            stderr: est.stderr,
            r2: est.r2,
            theory: cmp.theory,
            delta: cmp.delta,
            tolerance: cmp.tolerance,
            branch: cmp.arm.to_string(),
            pass: cmp.pass,
            dropped: table.dropped.len(),
        },
        rows: table.rows,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub proto: Scheme,
    pub direction: Direction,
    pub psi: f64,
    pub exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub scheme: Scheme,
    pub direction: Direction,
    pub breakpoints: Vec<f64>,
    /// `(psi, exponent)` in increasing `psi`.
    pub points: Vec<(f64, f64)>,
}

/// Samples on a uniform grid of this many steps, plus every breakpoint.
const FIGURE_STEPS: usize = 240;

/// Exponent-versus-`psi` curves of every scheme over `[0, psi_max]`.
pub fn figure_curves(e: &ScalingExponents, direction: Direction, psi_max: f64) -> Result<Vec<Curve>> {
    let mut curves = Vec::new();
    for scheme in SCHEMES {
        let bps = breakpoints(scheme, direction, e);
        let mut grid: Vec<f64> = (0..=FIGURE_STEPS)
            .map(|i| psi_max * i as f64 / FIGURE_STEPS as f64)
            .chain(bps.iter().copied().filter(|&b| b <= psi_max))
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let points = grid
            .into_iter()
            .map(|psi| {
                let x = theoretical_exponent(scheme, direction, &ScalingExponents { psi, ..*e })?;
                Ok((psi, x.exponent))
            })
            .collect::<Result<Vec<_>>>()?;
        curves.push(Curve {
            scheme,
            direction,
            breakpoints: bps,
            points,
        });
    }
    Ok(curves)
}

/// Flat records of the curves, for CSV or JSON.
pub fn curve_records(curves: &[Curve]) -> Vec<CurvePoint> {
    curves
        .iter()
        .flat_map(|c| {
            c.points.iter().map(|&(psi, exponent)| CurvePoint {
                proto: c.scheme,
                direction: c.direction,
                psi,
                exponent,
            })
        })
        .collect()
}

/// Validates everything except `psi`, which the figure sweeps.
pub fn figure_exponents(cfg: &RunConfig) -> Result<ScalingExponents> {
    let e = ScalingExponents {
        psi: 0.0,
        ..cfg.exponents
    };
    e.validate()?;
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_exponent_table() {
        let rows = exponent_report(&RunConfig::default()).unwrap();
        assert_eq!(rows.len(), 8);
        let get = |s: Scheme, d: Direction| rows.iter().find(|r| r.proto == s && r.direction == d).unwrap().exponent;
        assert!((get(Scheme::Ish, Direction::Dl) + 0.25).abs() < 1e-12);
        assert!((get(Scheme::Imh, Direction::Dl) + 0.25).abs() < 1e-12);

        let mut cfg = RunConfig::default();
        cfg.exponents.psi = 3.0;
        let rows = exponent_report(&cfg).unwrap();
        let get = |s: Scheme| rows.iter().find(|r| r.proto == s && r.direction == Direction::Dl).unwrap().exponent;
        assert!((get(Scheme::Imh) - 1.75).abs() < 1e-12);
        assert!((get(Scheme::Ish) - 0.75).abs() < 1e-12);
    }

    #[test]
    fn regime_examples() {
        let mut cfg = RunConfig::default();
        for (psi, want) in [(0.5, "bandwidth-limited-I"), (1.5, "bandwidth-limited-II"), (2.5, "power-limited")] {
            cfg.exponents.psi = psi;
            assert_eq!(regime_report(&cfg).unwrap().regime, want);
        }
        cfg.exponents.psi = 0.0;
        assert_eq!(regime_report(&cfg).unwrap().r_v, 1.0);
    }

    #[test]
    fn figure_curves_include_their_breakpoints() {
        let e = figure_exponents(&RunConfig::default()).unwrap();
        let curves = figure_curves(&e, Direction::Dl, 3.0).unwrap();
        let ish = curves.iter().find(|c| c.scheme == Scheme::Ish).unwrap();
        assert_eq!(ish.breakpoints, vec![1.0]);
        assert!(ish.points.iter().any(|p| p.0 == 1.0));
        assert_eq!(ish.points.first().unwrap().0, 0.0);
        assert_eq!(ish.points.last().unwrap().0, 3.0);
    }
}
