//! Seeded Monte Carlo sweeps over `n`, median aggregation and log-log slope
//! fits compared against the closed-form exponents.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{cutset_dl, cutset_ul};
use crate::error::{Error, Result};
use crate::geometry::NetworkRealization;
use crate::params::{instantiate, ModelConstants, ScalingExponents};
use crate::protocols::{rates, Direction, Mode, Protocol, ProtocolOptions};
use crate::theory::{theoretical_exponent, Arm, Scheme};

pub const DEFAULT_TOLERANCE: f64 = 0.15;
pub const MIN_POINTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub n_values: Vec<usize>,
    pub trials_per_n: usize,
    pub master_seed: u64,
    /// A protocol or the cut-set bound (`Scheme::Ub`).
    pub scheme: Scheme,
    pub direction: Direction,
    pub mode: Mode,
    pub exponents: ScalingExponents,
    pub constants: ModelConstants,
    pub wrap: bool,
    pub tdd_halving: bool,
}

impl SweepPlan {
    pub fn new(scheme: Scheme, direction: Direction, exponents: ScalingExponents, n_values: Vec<usize>) -> Self {
        SweepPlan {
            n_values,
            trials_per_n: 20,
            master_seed: 1,
            scheme,
            direction,
            mode: Mode::Paper,
            exponents,
            constants: ModelConstants::default(),
            wrap: false,
            tdd_halving: false,
        }
    }

    fn validate(&self) -> Result<()> {
        let mut distinct = self.n_values.clone();
        distinct.sort_unstable();
        distinct.dedup();
        if distinct.len() < MIN_POINTS {
            return Err(Error::TooFewPoints {
                got: distinct.len(),
                need: MIN_POINTS,
            });
        }
        if self.trials_per_n == 0 {
            return Err(Error::OutOfRange {
                field: "trials_per_n",
                value: 0.0,
                expected: ">= 1",
            });
        }
        if self.scheme == Scheme::Capacity {
            return Err(Error::domain("run_sweep", "capacity has no simulator; use ub or a protocol"));
        }
        self.exponents.validate()?;
        self.constants.validate()
    }
}

/// Powers of two in `[n_min, n_max]`.
pub fn geometric_n_values(n_min: usize, n_max: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut n = n_min.max(1).next_power_of_two();
    while n <= n_max {
        out.push(n);
        n *= 2;
    }
    out
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` at size `n`: nested splitmix64 over
/// `(master, n, trial)`.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ trial as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub proto: Scheme,
    pub direction: Direction,
    pub mode: Mode,
    pub min_rate: f64,
    /// Nodes left unserved in this trial.
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Sizes dropped from the sweep, with the reason.
    pub dropped: Vec<(usize, String)>,
}

/// Rate guaranteed to every node on one realization, and the failure count.
pub fn evaluate(real: &NetworkRealization, plan: &SweepPlan) -> Result<(f64, usize)> {
    let protocol = match plan.scheme {
        Scheme::Ub => {
            let ub = match plan.direction {
                Direction::Dl => cutset_dl(real).ub_per_node_dl,
                Direction::Ul => cutset_ul(real).ub_per_node_ul,
            };
            return Ok((ub.unwrap_or(0.0), 0));
        }
        Scheme::Capacity => unreachable!("rejected by plan validation"),
        Scheme::Ish => Protocol::Ish,
        Scheme::Imh => Protocol::Imh,
        Scheme::Irh => Protocol::Irh,
    };
    let opts = ProtocolOptions {
        mode: plan.mode,
        tdd_halving: plan.tdd_halving,
    };
    let r = rates(real, protocol, plan.direction, opts)?;
    Ok((r.min_rate, r.failures))
}

/// Runs every `(n, trial)` of the plan. Output order is by `n`, then trial,
/// independent of scheduling.
pub fn run_sweep(plan: &SweepPlan) -> Result<SweepTable> {
    plan.validate()?;
    let mut ns = plan.n_values.clone();
    ns.sort_unstable();
    ns.dedup();
    let mut dropped = Vec::new();
    let mut usable = Vec::new();
    for &n in &ns {
        match instantiate(&plan.exponents, &plan.constants, n) {
            Ok(_) => usable.push(n),
            Err(e) => dropped.push((n, e.to_string())),
        }
    }
    let jobs: Vec<(usize, usize)> = usable
        .iter()
        .flat_map(|&n| (0..plan.trials_per_n).map(move |t| (n, t)))
        .collect();
    let results: Vec<Result<SweepRow>> = jobs
        .par_iter()
        .map(|&(n, trial)| {
            let seed = trial_seed(plan.master_seed, n, trial);
            let real = NetworkRealization::generate(&plan.exponents, &plan.constants, n, seed, plan.wrap)?;
            let (min_rate, failures) = evaluate(&real, plan)?;
            Ok(SweepRow {
                n,
                trial,
                seed,
                proto: plan.scheme,
                direction: plan.direction,
                mode: plan.mode,
                min_rate,
                failures,
            })
        })
        .collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut bad: Vec<usize> = Vec::new();
    for (res, &(n, _)) in results.into_iter().zip(&jobs) {
        match res {
            Ok(r) => rows.push(r),
            Err(e) => {
                if !bad.contains(&n) {
                    bad.push(n);
                    dropped.push((n, e.to_string()));
                }
            }
        }
    }
    rows.retain(|r| !bad.contains(&r.n));
    let kept = usable.len() - bad.len();
    if kept < MIN_POINTS {
        return Err(Error::TooFewPoints {
            got: kept,
            need: MIN_POINTS,
        });
    }
    dropped.sort_by_key(|d| d.0);
    Ok(SweepTable { rows, dropped })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub stderr: f64,
    pub r2: f64,
    /// `(ln n, ln median rate)` per size.
    pub points: Vec<(f64, f64)>,
}

pub fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len();
    Some(if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    })
}

/// Median of the successful trials at each `n`, in increasing `n`. Trials
/// with a zero rate (unserved nodes) are left out.
pub fn aggregate(rows: &[SweepRow]) -> Vec<(usize, Option<f64>)> {
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    ns.into_iter()
        .map(|n| {
            let mut v: Vec<f64> = rows
                .iter()
                .filter(|r| r.n == n && r.min_rate > 0.0 && r.min_rate.is_finite())
                .map(|r| r.min_rate)
                .collect();
            (n, median(&mut v))
        })
        .collect()
}

/// Ordinary least squares of `y` on `x`.
pub fn fit_points(points: &[(f64, f64)]) -> Result<ExponentEstimate> {
    let k = points.len();
    if k < MIN_POINTS {
        return Err(Error::TooFewPoints { got: k, need: MIN_POINTS });
    }
    let kf = k as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / kf;
    let my = points.iter().map(|p| p.1).sum::<f64>() / kf;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::TooFewPoints { got: 1, need: MIN_POINTS });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    let r2 = if syy > 0.0 { (1.0 - ssr / syy).clamp(0.0, 1.0) } else { 1.0 };
    let stderr = (ssr / (kf - 2.0) / sxx).sqrt();
    Ok(ExponentEstimate {
        slope,
        intercept,
        stderr,
        r2,
        points: points.to_vec(),
    })
}

/// Fits `ln(median min_rate)` against `ln n`.
pub fn fit_exponent(table: &SweepTable) -> Result<ExponentEstimate> {
    let mut points = Vec::new();
    for (n, med) in aggregate(&table.rows) {
        match med {
            Some(v) if v > 0.0 => points.push(((n as f64).ln(), v.ln())),
            other => {
                return Err(Error::NonPositiveRate {
                    n,
                    rate: other.unwrap_or(0.0),
                })
            }
        }
    }
    fit_points(&points)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoryComparison {
    pub theory: f64,
    pub estimate: f64,
    pub delta: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub arm: Arm,
    pub rn_used: Option<bool>,
}

pub fn compare_to_theory(
    est: &ExponentEstimate,
    scheme: Scheme,
    direction: Direction,
    exponents: &ScalingExponents,
    tolerance: Option<f64>,
) -> Result<TheoryComparison> {
    let th = theoretical_exponent(scheme, direction, exponents)?;
    let tolerance = tolerance.unwrap_or(DEFAULT_TOLERANCE);
    let delta = (est.slope - th.exponent).abs();
    Ok(TheoryComparison {
        theory: th.exponent,
        estimate: est.slope,
        delta,
        tolerance,
        pass: delta <= tolerance,
        arm: th.arm,
        rn_used: th.rn_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(f: impl Fn(f64) -> f64) -> SweepTable {
        let rows = (10..=16)
            .flat_map(|k| {
                let n = 1usize << k;
                let f = &f;
                (0..3).map(move |t| SweepRow {
                    n,
                    trial: t,
                    seed: 0,
                    proto: Scheme::Ish,
                    direction: Direction::Dl,
                    mode: Mode::Paper,
                    min_rate: f(n as f64),
                    failures: 0,
                })
            })
            .collect();
        SweepTable {
            rows,
            dropped: vec![],
        }
    }

    #[test]
    fn exact_power_law() {
        let est = fit_exponent(&synthetic(|n| 7.0 * n.powf(-0.5))).unwrap();
        assert!((est.slope + 0.5).abs() < 1e-12);
        assert!((est.intercept - 7f64.ln()).abs() < 1e-9);
        assert!((est.r2 - 1.0).abs() < 1e-12);
        assert!(est.stderr < 1e-9);
    }

    #[test]
    fn constant_rate() {
        let est = fit_exponent(&synthetic(|_| 3.0)).unwrap();
        assert!(est.slope.abs() < 1e-12);
    }

    #[test]
    fn zero_trials_are_excluded() {
        let mut t = synthetic(|n| n.powf(0.25));
        t.rows[0].min_rate = 0.0;
        t.rows[0].failures = 3;
        let est = fit_exponent(&t).unwrap();
        assert!((est.slope - 0.25).abs() < 1e-12);
        for r in t.rows.iter_mut().filter(|r| r.n == 1024) {
            r.min_rate = 0.0;
        }
        assert!(matches!(fit_exponent(&t), Err(Error::NonPositiveRate { n: 1024, .. })));
    }

    #[test]
    fn median_is_order_free() {
        let mut a = vec![5.0, 1.0, 3.0, 2.0];
        let mut b = vec![2.0, 3.0, 5.0, 1.0];
        assert_eq!(median(&mut a), Some(2.5));
        assert_eq!(median(&mut a), median(&mut b));
        assert_eq!(median(&mut []), None);
    }

    #[test]
    fn comparison_verdicts() {
        let x = ScalingExponents {
            beta: 0.5,
            gamma: 0.0,
            rho: 0.5,
            ..Default::default()
        };
        let mut est = fit_points(&[(0.0, 0.0), (1.0, -0.45), (2.0, -0.9)]).unwrap();
        let c = compare_to_theory(&est, Scheme::Ish, Direction::Dl, &x, None).unwrap();
        assert!(c.pass && (c.delta - 0.05).abs() < 1e-12 && c.theory == -0.5);
        est.slope = -0.9;
        assert!(!compare_to_theory(&est, Scheme::Ish, Direction::Dl, &x, None).unwrap().pass);
        assert!(compare_to_theory(&est, Scheme::Ish, Direction::Dl, &x, Some(0.5)).unwrap().pass);
    }

    #[test]
    fn seeds_differ_and_repeat() {
        assert_eq!(trial_seed(1, 1024, 0), trial_seed(1, 1024, 0));
        assert_ne!(trial_seed(1, 1024, 0), trial_seed(1, 1024, 1));
        assert_ne!(trial_seed(1, 1024, 0), trial_seed(1, 2048, 0));
        assert_ne!(trial_seed(1, 1024, 0), trial_seed(2, 1024, 0));
    }

    #[test]
    fn geometric_grid() {
        assert_eq!(geometric_n_values(1024, 8192), vec![1024, 2048, 4096, 8192]);
        assert_eq!(geometric_n_values(1000, 4000), vec![1024, 2048]);
    }

    #[test]
    fn too_few_sizes() {
        let plan = SweepPlan::new(
            Scheme::Ish,
            Direction::Dl,
            ScalingExponents::default(),
            vec![1024, 4096],
        );
        assert!(matches!(run_sweep(&plan), Err(Error::TooFewPoints { got: 2, .. })));
    }
}
