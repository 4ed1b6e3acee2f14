//! Resolved run configuration and the KEY=VALUE config-file format.
//!
//! Precedence: built-in defaults < config file (--config) < command-line
//! flags, and the RELSOL_OUT environment variable overrides the output
//! directory last of all.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::Serialize;

/// Every knob a subcommand can consume, fully resolved. The manifest embeds
/// this verbatim so a run can be reproduced from its output directory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub p: f64,
    pub c: f64,
    pub mass: f64,
    pub grid_l: f64,
    pub grid_n: usize,
    pub dt: f64,
    pub t_final: f64,
    pub sample_stride: usize,
    /// perturbation size for `stability`
    pub delta: f64,
    pub seed: u64,
    pub out: PathBuf,
    /// constants-cache file; `None` resolves to `<out>/constants.json`
    pub cache: Option<PathBuf>,
    pub strict: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p: 3.0,
            c: 8.0,
            mass: 1.0,
            grid_l: 80.0,
            grid_n: 4096,
            dt: 1e-3,
            t_final: 1.0,
            sample_stride: 100,
            delta: 1e-3,
            seed: 0,
            out: PathBuf::from("out"),
            cache: None,
            strict: false,
        }
    }
}

impl RunConfig {
    pub fn cache_path(&self) -> PathBuf {
        self.cache
            .clone()
            .unwrap_or_else(|| self.out.join("constants.json"))
    }

    /// Assign one config key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num(key: &str, value: &str) -> Result<f64, String> {
            value
                .parse::<f64>()
                .map_err(|_| format!("config key `{key}` expects a number, got `{value}`"))
        }
        fn int(key: &str, value: &str) -> Result<usize, String> {
            value
                .parse::<usize>()
                .map_err(|_| format!("config key `{key}` expects a non-negative integer, got `{value}`"))
        }
        match key {
            "p" => self.p = num(key, value)?,
            "c" => self.c = num(key, value)?,
            "mass" => self.mass = num(key, value)?,
            "grid_l" => self.grid_l = num(key, value)?,
            "grid_n" => self.grid_n = int(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "t_final" => self.t_final = num(key, value)?,
            "sample_stride" => self.sample_stride = int(key, value)?,
            "delta" => self.delta = num(key, value)?,
            "seed" => {
                self.seed = value
                    .parse::<u64>()
                    .map_err(|_| format!("config key `seed` expects a u64, got `{value}`"))?
            }
            "out" => self.out = PathBuf::from(value),
            "cache" => {
                self.cache = if value.is_empty() {
                    None
                } else {
                    Some(PathBuf::from(value))
                }
            }
            "strict" => {
                self.strict = match value {
                    "true" => true,
                    "false" => false,
                    _ => {
                        return Err(format!(
                            "config key `strict` expects true or false, got `{value}`"
                        ))
                    }
                }
            }
            other => return Err(format!("unknown config key `{other}`")),
        }
        Ok(())
    }

    /// Overlay KEY=VALUE lines (blank lines and # comments skipped).
    pub fn apply_kv(&mut self, text: &str) -> Result<(), String> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected KEY=VALUE, got `{line}`", i + 1))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<RunConfig, String> {
        let mut cfg = RunConfig::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    /// Canonical KEY=VALUE serialization; `from_kv` of the output reproduces
    /// the config exactly (float display is shortest-round-trip).
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "p={}", self.p);
        let _ = writeln!(s, "c={}", self.c);
        let _ = writeln!(s, "mass={}", self.mass);
        let _ = writeln!(s, "grid_l={}", self.grid_l);
        let _ = writeln!(s, "grid_n={}", self.grid_n);
        let _ = writeln!(s, "dt={}", self.dt);
        let _ = writeln!(s, "t_final={}", self.t_final);
        let _ = writeln!(s, "sample_stride={}", self.sample_stride);
        let _ = writeln!(s, "delta={}", self.delta);
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "out={}", self.out.display());
        let _ = writeln!(
            s,
            "cache={}",
            self.cache.as_deref().map(|p| p.display().to_string()).unwrap_or_default()
        );
        let _ = writeln!(s, "strict={}", self.strict);
        s
    }

    /// Shared post-overlay validation. Speeds below 1 are rejected outright:
    /// the c-scaling symmetry maps any c < 1 problem to an equivalent one
    /// with c >= 1, and the admissibility thresholds are stated in that
    /// normalization.
    pub fn validate(&self) -> Result<(), String> {
        if !(self.c >= 1.0) {
            return Err(format!(
                "c = {} rejected: speeds below 1 are outside the supported normalization \
                 (rescale the mass instead); admissibility is governed by the existence \
                 threshold c >= max{{(alpha M)^((p-1)/(5-p)), (alpha^(4/(p+3)) M)^((p-1)/(5-p))}} \
                 with alpha(3) ~ 12.96, which already sits above 1 at unit mass",
                self.c
            ));
        }
        if !(self.grid_l.is_finite() && self.grid_l > 0.0) {
            return Err(format!("grid_l = {} must be positive and finite", self.grid_l));
        }
        if self.grid_n == 0 || self.grid_n % 2 != 0 {
            return Err(format!("grid_n = {} must be a positive even integer", self.grid_n));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(format!("dt = {} must be positive and finite", self.dt));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(format!("t_final = {} must be positive and finite", self.t_final));
        }
        if self.sample_stride == 0 {
            return Err("sample_stride must be at least 1".to_string());
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(format!("delta = {} must be positive and finite", self.delta));
        }
        Ok(())
    }
}

/// 17 significant digits, the round-trip precision of f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}
