use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Serialize;

use crate::error::{Result, StabilityError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ProfileCheck,
    Nyquist,
    Spectrum,
    Mode,
    EvolveLinear,
    EvolveNonlinear,
    ScanBeta,
    ScanDelta,
    #[value(name = "scan-M")]
    #[serde(rename = "scan-M")]
    ScanM,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::ProfileCheck => "profile-check",
            Command::Nyquist => "nyquist",
            Command::Spectrum => "spectrum",
            Command::Mode => "mode",
            Command::EvolveLinear => "evolve-linear",
            Command::EvolveNonlinear => "evolve-nonlinear",
            Command::ScanBeta => "scan-beta",
            Command::ScanDelta => "scan-delta",
            Command::ScanM => "scan-M",
        }
    }

    /// File stem of the command's outputs.
    pub fn stem(&self) -> String {
        self.name().replace('-', "_").to_lowercase()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Tanh,
    Couette,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Every setting a command can read, after defaults, config file and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub kind: Kind,
    pub beta: f64,
    /// Friedlander parameter; `None` leaves the density linear with `gradient`.
    pub alpha: Option<f64>,
    pub gradient: f64,
    pub k: i64,
    pub kappa: f64,
    pub m_scale: f64,
    pub nz: usize,
    pub nx: usize,
    pub dt: f64,
    pub t_final: Option<f64>,
    pub tol: f64,
    pub panels: usize,
    pub eps: f64,
    pub eps_check: f64,
    pub radius: Option<f64>,
    pub eps_floor: f64,
    pub region: Option<[f64; 4]>,
    pub per_edge: usize,
    pub seed: u64,
    pub delta: f64,
    pub delta_list: Option<Vec<f64>>,
    pub threshold: f64,
    pub beta_list: Vec<f64>,
    pub m_list: Vec<f64>,
    pub c_guess: Option<(f64, f64)>,
    pub sample_every: usize,
    pub out: PathBuf,
    pub formats: Vec<Format>,
}

/// Keys accepted in config files and embedded in JSON summaries.
pub const KEYS: &[&str] = &[
    "kind", "beta", "alpha", "gradient", "k", "kappa", "M", "nz", "nx", "dt", "t_final", "tol", "panels",
    "eps", "eps_check", "radius", "eps_floor", "region", "per_edge", "seed", "delta", "delta_list",
    "threshold", "beta_list", "M_list", "c_re", "c_im", "sample_every", "out", "format",
];

fn bad(key: &str, value: &str) -> StabilityError {
    StabilityError::Config(format!("invalid value {value:?} for key {key:?}"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            kind: Kind::Tanh,
            beta: 5.0,
            alpha: Some(0.97),
            gradient: 0.0,
            k: 1,
            kappa: 0.0,
            m_scale: 0.5,
            nz: match command {
                Command::EvolveNonlinear | Command::ScanDelta => 128,
                _ => 512,
            },
            nx: 64,
            dt: match command {
                Command::EvolveNonlinear | Command::ScanDelta => 1e-2,
                _ => 1e-3,
            },
            t_final: None,
            tol: 1e-12,
            panels: crate::dispersion::DEFAULT_PANELS,
            eps: crate::rootfinder::NYQUIST_EPS,
            eps_check: crate::rootfinder::NYQUIST_EPS_CHECK,
            radius: None,
            eps_floor: crate::rootfinder::DEFAULT_EPS_FLOOR,
            region: None,
            per_edge: 32,
            seed: 0,
            delta: 1e-4,
            delta_list: (command == Command::ScanDelta).then(|| vec![1e-3, 1e-4, 1e-5]),
            threshold: 0.05,
            beta_list: crate::rootfinder::BETA_SCAN.to_vec(),
            m_list: vec![20.0, 40.0, 80.0],
            c_guess: None,
            sample_every: 10,
            out: PathBuf::from("."),
            formats: vec![Format::Csv, Format::Json],
        }
    }

    /// Applies one `key = value` setting. Unknown keys are configuration errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "command" => {
                let c = Command::from_str(v, true).map_err(|_| bad(key, v))?;
                if c != self.command {
                    return Err(StabilityError::Config(format!(
                        "config is for {:?} but the command is {}",
                        v,
                        self.command.name()
                    )));
                }
            }
            "kind" => self.kind = Kind::from_str(v, true).map_err(|_| bad(key, v))?,
            "beta" => self.beta = num(key, v)?,
            "alpha" => self.alpha = if v == "none" { None } else { Some(num(key, v)?) },
            "gradient" => self.gradient = num(key, v)?,
            "k" => self.k = num(key, v)?,
            "kappa" => self.kappa = num(key, v)?,
            "M" => self.m_scale = num(key, v)?,
            "nz" => self.nz = num(key, v)?,
            "nx" => self.nx = num(key, v)?,
            "dt" => self.dt = num(key, v)?,
            "t_final" => self.t_final = if v == "auto" { None } else { Some(num(key, v)?) },
            "tol" => self.tol = num(key, v)?,
            "panels" => self.panels = num(key, v)?,
            "eps" => self.eps = num(key, v)?,
            "eps_check" => self.eps_check = num(key, v)?,
            "radius" => self.radius = if v == "auto" { None } else { Some(num(key, v)?) },
            "eps_floor" => self.eps_floor = num(key, v)?,
            "region" => {
                self.region = if v == "auto" {
                    None
                } else {
                    let r = list(key, v)?;
                    Some(<[f64; 4]>::try_from(r).map_err(|_| bad(key, v))?)
                }
            }
            "per_edge" => self.per_edge = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "delta" => self.delta = num(key, v)?,
            "delta_list" => self.delta_list = if v == "none" { None } else { Some(list(key, v)?) },
            "threshold" => self.threshold = num(key, v)?,
            "beta_list" => self.beta_list = list(key, v)?,
            "M_list" => self.m_list = list(key, v)?,
            "c_re" => self.c_guess = Some((num(key, v)?, self.c_guess.map_or(0.5, |c| c.1))),
            "c_im" => self.c_guess = Some((self.c_guess.map_or(0.0, |c| c.0), num(key, v)?)),
            "sample_every" => self.sample_every = num(key, v)?,
            "out" => self.out = PathBuf::from(v),
            "format" => {
                self.formats = v
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| Format::from_str(s.trim(), true).map_err(|_| bad(key, v)))
                    .collect::<Result<_>>()?
            }
            _ => return Err(StabilityError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Reads a flat `key = value` file (`#` comments), or the `config`
    /// object of a JSON summary written by an earlier run.
    pub fn load_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StabilityError::Config(format!("cannot read {}: {e}", path.display())))?;
        if text.trim_start().starts_with('{') {
            let json: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| StabilityError::Config(format!("{}: {e}", path.display())))?;
            let obj = json
                .get("config")
                .and_then(|c| c.as_object())
                .ok_or_else(|| StabilityError::Config(format!("{}: no config object", path.display())))?;
            for (k, v) in obj {
                let s = v.as_str().map(str::to_owned).unwrap_or_else(|| v.to_string());
                self.set(k, &s)?;
            }
            return Ok(());
        }
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                StabilityError::Config(format!("{}:{}: expected key = value", path.display(), no + 1))
            })?;
            self.set(k.trim(), v)?;
        }
        Ok(())
    }

    /// Resolved settings as ordered `(key, value)` text, readable by [`RunConfig::set`].
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let opt = |o: Option<f64>, none: &str| o.map_or(none.to_string(), |x| x.to_string());
        let formats = self
            .formats
            .iter()
            .map(|f| f.to_possible_value().unwrap().get_name().to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut v = vec![
            ("command", self.command.name().to_string()),
            ("kind", self.kind.to_possible_value().unwrap().get_name().to_string()),
            ("beta", self.beta.to_string()),
            ("alpha", opt(self.alpha, "none")),
            ("gradient", self.gradient.to_string()),
            ("k", self.k.to_string()),
            ("kappa", self.kappa.to_string()),
            ("M", self.m_scale.to_string()),
            ("nz", self.nz.to_string()),
            ("nx", self.nx.to_string()),
            ("dt", self.dt.to_string()),
            ("t_final", opt(self.t_final, "auto")),
            ("tol", self.tol.to_string()),
            ("panels", self.panels.to_string()),
            ("eps", self.eps.to_string()),
            ("eps_check", self.eps_check.to_string()),
            ("radius", opt(self.radius, "auto")),
            ("eps_floor", self.eps_floor.to_string()),
            ("region", self.region.map_or("auto".into(), |r| join(&r))),
            ("per_edge", self.per_edge.to_string()),
            ("seed", self.seed.to_string()),
            ("delta", self.delta.to_string()),
            ("delta_list", self.delta_list.as_deref().map_or("none".into(), join)),
            ("threshold", self.threshold.to_string()),
            ("beta_list", join(&self.beta_list)),
            ("M_list", join(&self.m_list)),
        ];
        if let Some((re, im)) = self.c_guess {
            v.push(("c_re", re.to_string()));
            v.push(("c_im", im.to_string()));
        }
        v.push(("sample_every", self.sample_every.to_string()));
        v.push(("out", self.out.display().to_string()));
        v.push(("format", formats));
        v
    }

    /// Rejects settings no command can run with.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta", self.beta),
            ("dt", self.dt),
            ("tol", self.tol),
            ("eps", self.eps),
            ("eps_check", self.eps_check),
            ("eps_floor", self.eps_floor),
            ("M", self.m_scale),
            ("delta", self.delta),
            ("threshold", self.threshold),
        ];
        for (k, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(StabilityError::Config(format!("{k} must be positive and finite, got {v}")));
            }
        }
        if let Some(a) = self.alpha {
            let lo_ok = if self.command == Command::ProfileCheck { a >= 0.5 } else { a > 0.5 };
            if !(lo_ok && a <= 1.0) {
                return Err(StabilityError::AlphaOutOfRange(a));
            }
        }
        if self.kappa < 0.0 || !self.kappa.is_finite() {
            return Err(StabilityError::Config(format!("kappa must be >= 0, got {}", self.kappa)));
        }
        if self.k == 0 {
            return Err(StabilityError::Config("k must be nonzero".into()));
        }
        if self.nz < 8 || self.nx < 8 || self.nx % 2 == 1 {
            return Err(StabilityError::Config("nz >= 8 and an even nx >= 8 are required".into()));
        }
        if self.panels == 0 || self.per_edge < 4 || self.sample_every == 0 {
            return Err(StabilityError::Config("panels, per_edge and sample_every must be positive".into()));
        }
        if let Some(t) = self.t_final {
            if !(t > 0.0) {
                return Err(StabilityError::Config(format!("t_final must be positive, got {t}")));
            }
        }
        if let Some(r) = self.region {
            if !(r[0] < r[1] && r[2] < r[3] && r[2] > 0.0) {
                return Err(StabilityError::Config("region must be re_min,re_max,im_min,im_max with 0 < im_min".into()));
            }
        }
        for d in self.delta_list.iter().flatten() {
            if !(*d > 0.0) {
                return Err(StabilityError::Config(format!("delta_list entries must be positive, got {d}")));
            }
        }
        if self.formats.is_empty() {
            return Err(StabilityError::Config("at least one output format is required".into()));
        }
        Ok(())
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.pairs() {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}
