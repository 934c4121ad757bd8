//! Run configuration: a flat `key = value` file overridden by command-line
//! flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use cellscale::theory::{network_knee, Scheme};
use cellscale::{Direction, Mode, ModelConstants, ScalingExponents};
use clap::{Args, ValueEnum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => bail!("unknown format {other:?}, expected csv, json or svg"),
        }
    }
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to the defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true)]
    pub psi: Option<f64>,
    #[arg(long, global = true)]
    pub nu: Option<f64>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub rho: Option<f64>,

    #[arg(long, global = true)]
    pub w0: Option<f64>,
    #[arg(long, global = true)]
    pub a0: Option<f64>,
    #[arg(long, global = true)]
    pub m0: Option<f64>,
    #[arg(long, global = true)]
    pub l0: Option<f64>,
    #[arg(long, global = true)]
    pub k0: Option<f64>,
    /// Node transmit power.
    #[arg(long = "p", global = true)]
    pub p_node: Option<f64>,
    #[arg(long, global = true)]
    pub p_bs: Option<f64>,
    #[arg(long, global = true)]
    pub p_rn: Option<f64>,
    #[arg(long, global = true)]
    pub n0: Option<f64>,

    /// Number of user nodes (simulate, regime).
    #[arg(long, global = true)]
    pub n: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    #[arg(long, global = true)]
    pub n_min: Option<usize>,
    #[arg(long, global = true)]
    pub n_max: Option<usize>,
    /// ish, imh, irh or ub.
    #[arg(long, global = true)]
    pub proto: Option<Scheme>,
    #[arg(long, global = true)]
    pub direction: Option<Direction>,
    #[arg(long, global = true)]
    pub mode: Option<Mode>,
    /// Wrap the region into a torus to remove border effects.
    #[arg(long, global = true)]
    pub wrap: bool,
    /// Halve every rate for the uplink/downlink time split.
    #[arg(long, global = true)]
    pub tdd_halving: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub tolerance: Option<f64>,
    /// Upper end of the figure's psi axis.
    #[arg(long, global = true)]
    pub psi_max: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub exponents: ScalingExponents,
    pub constants: ModelConstants,
    pub n: usize,
    pub seed: u64,
    pub trials: usize,
    pub n_min: usize,
    pub n_max: usize,
    pub proto: Scheme,
    pub direction: Direction,
    pub mode: Mode,
    pub wrap: bool,
    pub tdd_halving: bool,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub tolerance: Option<f64>,
    pub psi_max: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            exponents: ScalingExponents::default(),
            constants: ModelConstants::default(),
            n: 4096,
            seed: 1,
            trials: 20,
            n_min: 1 << 10,
            n_max: 1 << 16,
            proto: Scheme::Ish,
            direction: Direction::Dl,
            mode: Mode::Paper,
            wrap: false,
            tdd_halving: false,
            out: None,
            format: Format::Csv,
            tolerance: None,
            psi_max: None,
        }
    }
}

/// Parses `key = value` lines; `#` starts a comment. Keys are case
/// insensitive and `-` is read as `_`.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value, got {raw:?}", no + 1);
        };
        let key = k.trim().to_ascii_lowercase().replace('-', "_");
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            bail!("config line {}: duplicate key {key:?}", no + 1);
        }
    }
    Ok(out)
}

struct Layer {
    file: BTreeMap<String, String>,
    source: String,
}

impl Layer {
    fn take<T>(&mut self, key: &str, flag: Option<T>, current: T) -> Result<T>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        let from_file = self.file.remove(key);
        if let Some(v) = flag {
            return Ok(v);
        }
        match from_file {
            Some(s) => s
                .parse()
                .map_err(|e| anyhow::anyhow!("{}: bad value {s:?} for {key}: {e}", self.source)),
            None => Ok(current),
        }
    }

    fn take_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: std::fmt::Display,
    {
        let from_file = self.file.remove(key);
        match (flag, from_file) {
            (Some(v), _) => Ok(Some(v)),
            (None, Some(s)) => s
                .parse()
                .map(Some)
                .map_err(|e| anyhow::anyhow!("{}: bad value {s:?} for {key}: {e}", self.source)),
            (None, None) => Ok(None),
        }
    }

    fn take_bool(&mut self, key: &str, flag: bool, current: bool) -> Result<bool> {
        self.take(key, flag.then_some(true), current)
    }
}

impl RunConfig {
    /// Resolves flags over the config file over defaults, then validates.
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig> {
        let (file, source) = match &args.config {
            Some(path) => (read_config(path)?, path.display().to_string()),
            None => (BTreeMap::new(), String::new()),
        };
        let mut l = Layer { file, source };
        let d = RunConfig::default();
        let e = d.exponents;
        let c = d.constants;
        let cfg = RunConfig {
            exponents: ScalingExponents {
                psi: l.take("psi", args.psi, e.psi)?,
                nu: l.take("nu", args.nu, e.nu)?,
                beta: l.take("beta", args.beta, e.beta)?,
                gamma: l.take("gamma", args.gamma, e.gamma)?,
                rho: l.take("rho", args.rho, e.rho)?,
                alpha: l.take("alpha", args.alpha, e.alpha)?,
            },
            constants: ModelConstants {
                w0: l.take("w0", args.w0, c.w0)?,
                a0: l.take("a0", args.a0, c.a0)?,
                m0: l.take("m0", args.m0, c.m0)?,
                l0: l.take("l0", args.l0, c.l0)?,
                k0: l.take("k0", args.k0, c.k0)?,
                p_node: l.take("p", args.p_node, c.p_node)?,
                p_bs: l.take("p_bs", args.p_bs, c.p_bs)?,
                p_rn: l.take("p_rn", args.p_rn, c.p_rn)?,
                n0: l.take("n0", args.n0, c.n0)?,
            },
            n: l.take("n", args.n, d.n)?,
            seed: l.take("seed", args.seed, d.seed)?,
            trials: l.take("trials", args.trials, d.trials)?,
            n_min: l.take("n_min", args.n_min, d.n_min)?,
            n_max: l.take("n_max", args.n_max, d.n_max)?,
            proto: l.take("proto", args.proto, d.proto)?,
            direction: l.take("direction", args.direction, d.direction)?,
            mode: l.take("mode", args.mode, d.mode)?,
            wrap: l.take_bool("wrap", args.wrap, d.wrap)?,
            tdd_halving: l.take_bool("tdd_halving", args.tdd_halving, d.tdd_halving)?,
            out: l.take_opt("out", args.out.clone())?,
            format: l.take("format", args.format, d.format)?,
            tolerance: l.take_opt("tolerance", args.tolerance)?,
            psi_max: l.take_opt("psi_max", args.psi_max)?,
        };
        if let Some(k) = l.file.keys().next() {
            bail!("{}: unknown key {k:?}", l.source);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.exponents.validate()?;
        self.constants.validate()?;
        if self.n == 0 {
            bail!("n must be at least 1");
        }
        if self.trials == 0 {
            bail!("trials must be at least 1");
        }
        if self.n_min > self.n_max {
            bail!("n_min ({}) exceeds n_max ({})", self.n_min, self.n_max);
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                bail!("tolerance must be positive, got {t}");
            }
        }
        if let Some(p) = self.psi_max {
            if !(p > 0.0 && p.is_finite()) {
                bail!("psi_max must be positive, got {p}");
            }
        }
        Ok(())
    }

    /// Right end of the figure's psi axis: one past the network knee unless
    /// set explicitly.
    pub fn psi_max(&self) -> f64 {
        self.psi_max.unwrap_or_else(|| network_knee(&self.exponents) + 1.0)
    }
}

fn read_config(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    parse_config_text(&text).with_context(|| format!("parsing config {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comments_blank_lines_and_key_spelling() {
        let m = parse_config_text("# sweep\n\nN-MIN = 256 # smallest\npsi=1.5\n").unwrap();
        assert_eq!(m["n_min"], "256");
        assert_eq!(m["psi"], "1.5");
        assert!(parse_config_text("psi 1.5").is_err());
        assert!(parse_config_text("psi=1\npsi=2").is_err());
    }

    #[test]
    fn defaults_validate() {
        let cfg = RunConfig::resolve(&CommonArgs::default()).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.psi_max(), 3.0);
    }

    #[test]
    fn invalid_exponents_are_rejected() {
        let args = CommonArgs {
            gamma: Some(0.9),
            ..Default::default()
        };
        assert!(RunConfig::resolve(&args).is_err());
    }
}
