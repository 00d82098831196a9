//! Run configuration: optional JSON file merged under command-line flags.

use std::fs;
use std::path::Path;

use ptsym_core::config::Tolerances;
use ptsym_core::dynamics::TimeGrid;
use ptsym_core::metric::SignCharacteristic;
use ptsym_core::Complex64;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub t_start: Option<f64>,
    pub t_end: Option<f64>,
    pub num_points: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub grid: GridConfig,
    pub signs: Option<Vec<i8>>,
    pub probe: Option<ProbeConfig>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
        let cfg: Self =
            serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
        cfg.tolerances.validate()?;
        Ok(cfg)
    }
}

/// Tolerance overrides; each flag wins over the config file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct TolFlags {
    #[arg(long, global = true)]
    pub cluster_tol: Option<f64>,
    #[arg(long, global = true)]
    pub coalesce_tol: Option<f64>,
    #[arg(long, global = true)]
    pub rank_tol: Option<f64>,
    #[arg(long, global = true)]
    pub val_tol: Option<f64>,
    #[arg(long, global = true)]
    pub can_tol: Option<f64>,
    #[arg(long, global = true)]
    pub met_tol: Option<f64>,
    #[arg(long, global = true)]
    pub crit_tol: Option<f64>,
    #[arg(long, global = true)]
    pub p_tol: Option<f64>,
}

impl TolFlags {
    pub fn merge(&self, base: Tolerances) -> Result<Tolerances, CliError> {
        let pick = |flag: Option<f64>, file: f64| flag.unwrap_or(file);
        let t = Tolerances {
            cluster_tol: pick(self.cluster_tol, base.cluster_tol),
            coalesce_tol: pick(self.coalesce_tol, base.coalesce_tol),
            rank_tol: pick(self.rank_tol, base.rank_tol),
            val_tol: pick(self.val_tol, base.val_tol),
            can_tol: pick(self.can_tol, base.can_tol),
            met_tol: pick(self.met_tol, base.met_tol),
            crit_tol: pick(self.crit_tol, base.crit_tol),
            p_tol: pick(self.p_tol, base.p_tol),
        };
        t.validate()?;
        Ok(t)
    }
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct GridFlags {
    #[arg(long, allow_hyphen_values = true)]
    pub t_start: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub num_points: Option<usize>,
}

impl GridFlags {
    pub fn merge(&self, base: &GridConfig) -> Result<TimeGrid, CliError> {
        let default = TimeGrid::default();
        let t_start = self.t_start.or(base.t_start).unwrap_or(default.t_start);
        let t_end = self.t_end.or(base.t_end).unwrap_or(default.t_end);
        let num_points = self.num_points.or(base.num_points).unwrap_or(default.num_points);
        Ok(TimeGrid::new(t_start, t_end, num_points)?)
    }
}

pub fn signs(flag: Option<&[i8]>, cfg: &RunConfig) -> Result<Option<SignCharacteristic>, CliError> {
    match flag.map(<[i8]>::to_vec).or_else(|| cfg.signs.clone()) {
        Some(v) => Ok(Some(SignCharacteristic::new(v)?)),
        None => Ok(None),
    }
}

/// `re` or `re,im`.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("bad number {p:?}: {e}"));
    let z = match parts.as_slice() {
        [re] => Complex64::new(num(re)?, 0.0),
        [re, im] => Complex64::new(num(re)?, num(im)?),
        _ => return Err(format!("expected re or re,im, got {s:?}")),
    };
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(format!("non-finite value {s:?}"))
    }
}

pub fn probe(x: Option<Complex64>, y: Option<Complex64>, cfg: &RunConfig) -> (Complex64, Complex64) {
    let from_cfg = cfg.probe.as_ref().map(|p| (Complex64::new(p.x[0], p.x[1]), Complex64::new(p.y[0], p.y[1])));
    let (dx, dy) = from_cfg.unwrap_or((Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)));
    (x.unwrap_or(dx), y.unwrap_or(dy))
}
