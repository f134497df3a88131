//! Command-line front end.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;

pub use commands::run;
pub use config::{Command, Format, Kind, RunConfig};

use crate::error::StabilityError;

#[derive(Debug, Parser)]
#[command(name = "shearstab", version, about = "Stability analysis of stratified shear flows", allow_negative_numbers = true)]
struct Cli {
    command: Command,
    /// Flat `key = value` file, or a JSON summary from an earlier run. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_name = "tanh|couette")]
    kind: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Friedlander parameter, or `none` for a linear density.
    #[arg(long)]
    alpha: Option<String>,
    /// Density gradient when `alpha = none`.
    #[arg(long)]
    gradient: Option<String>,
    #[arg(long)]
    kappa: Option<String>,
    #[arg(long)]
    k: Option<String>,
    #[arg(long = "M")]
    m: Option<String>,
    #[arg(long)]
    nz: Option<String>,
    #[arg(long)]
    nx: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    t_final: Option<String>,
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    panels: Option<String>,
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    eps_check: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long)]
    eps_floor: Option<String>,
    /// `re_min,re_max,im_min,im_max`
    #[arg(long)]
    region: Option<String>,
    #[arg(long)]
    per_edge: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    delta: Option<String>,
    #[arg(long)]
    delta_list: Option<String>,
    #[arg(long)]
    threshold: Option<String>,
    #[arg(long)]
    beta_list: Option<String>,
    #[arg(long = "M-list")]
    m_list: Option<String>,
    #[arg(long)]
    c_re: Option<String>,
    #[arg(long)]
    c_im: Option<String>,
    #[arg(long)]
    sample_every: Option<String>,
    #[arg(long)]
    out: Option<String>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long)]
    format: Option<String>,
}

impl Cli {
    fn overrides(&self) -> Vec<(&'static str, &str)> {
        let all = [
            ("kind", &self.kind),
            ("beta", &self.beta),
            ("alpha", &self.alpha),
            ("gradient", &self.gradient),
            ("kappa", &self.kappa),
            ("k", &self.k),
            ("M", &self.m),
            ("nz", &self.nz),
            ("nx", &self.nx),
            ("dt", &self.dt),
            ("t_final", &self.t_final),
            ("tol", &self.tol),
            ("panels", &self.panels),
            ("eps", &self.eps),
            ("eps_check", &self.eps_check),
            ("radius", &self.radius),
            ("eps_floor", &self.eps_floor),
            ("region", &self.region),
            ("per_edge", &self.per_edge),
            ("seed", &self.seed),
            ("delta", &self.delta),
            ("delta_list", &self.delta_list),
            ("threshold", &self.threshold),
            ("beta_list", &self.beta_list),
            ("M_list", &self.m_list),
            ("c_re", &self.c_re),
            ("c_im", &self.c_im),
            ("sample_every", &self.sample_every),
            ("out", &self.out),
            ("format", &self.format),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

/// Resolves defaults, then the config file, then flags.
pub fn resolve<I, T>(args: I) -> Result<RunConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let mut cfg = RunConfig::defaults(cli.command);
    let apply = |cfg: &mut RunConfig| -> Result<(), StabilityError> {
        if let Some(p) = &cli.config {
            cfg.load_file(p)?;
        }
        for (k, v) in cli.overrides() {
            cfg.set(k, v)?;
        }
        Ok(())
    };
    apply(&mut cfg).map_err(|e| clap::Error::raw(clap::error::ErrorKind::InvalidValue, format!("{e}\n")))?;
    Ok(cfg)
}

/// Runs the CLI and returns the process exit code: 0 success, 2 configuration
/// error, 3 numerical failure.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match resolve(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config_error() {
                2
            } else {
                3
            }
        }
    }
}
