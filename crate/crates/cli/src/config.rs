//! Run configuration: an optional JSON/TOML file overridden by command-line flags.

use std::path::Path;

use quartic_prym::verify::{Suite, DEFAULT_SEED};
use quartic_prym::{BranchConfig, Precision, Tolerances};
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub points: Option<Vec<f64>>,
    pub theta_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub nodes: Option<usize>,
    pub precision: Option<Precision>,
    pub suites: Option<Vec<String>>,
    pub seed: Option<u64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path).map_err(|e| UsageError(format!("cannot read {}: {e}", path.display())))?;
        let parsed = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| e.to_string()),
            Some("json") => serde_json::from_str(&text).map_err(|e| e.to_string()),
            _ => return Err(UsageError(format!("{}: config must end in .json or .toml", path.display()))),
        };
        parsed.map_err(|e| UsageError(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub cfg: BranchConfig,
    pub tol: Tolerances,
    pub suites: Vec<Suite>,
    pub seed: u64,
}

/// Flag values; `None` means "not given".
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub points: Option<Vec<f64>>,
    pub theta_tol: Option<f64>,
    pub quad_tol: Option<f64>,
    pub nodes: Option<usize>,
    pub precision: Option<Precision>,
    pub suites: Option<Vec<String>>,
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn resolve(file: Option<&Path>, o: Overrides) -> Result<Self, UsageError> {
        let f = match file {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let cfg = match o.points.or(f.points) {
            Some(p) => BranchConfig::from_slice(&p).map_err(|e| UsageError(e.to_string()))?,
            None => BranchConfig::standard(),
        };
        let d = Tolerances::default();
        let tol = Tolerances {
            theta: o.theta_tol.or(f.theta_tol).unwrap_or(d.theta),
            quad: o.quad_tol.or(f.quad_tol).unwrap_or(d.quad),
            nodes: o.nodes.or(f.nodes).unwrap_or(d.nodes),
            precision: o.precision.or(f.precision).unwrap_or(d.precision),
        };
        tol.validate().map_err(|e| UsageError(e.to_string()))?;
        let mut suites = Vec::new();
        for s in o.suites.or(f.suites).unwrap_or_else(|| vec!["full".into()]) {
            suites.extend(Suite::parse(&s).map_err(|e| UsageError(e.to_string()))?);
        }
        suites.sort();
        suites.dedup();
        Ok(Self { cfg, tol, suites, seed: o.seed.or(f.seed).unwrap_or(DEFAULT_SEED) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("qprym-cfg-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("run.toml");
        std::fs::write(&p, "points = [0, 1, 2, 3, 4, 5, 6, 7]\ntheta_tol = 1e-10\nsuites = [\"lattice\"]\n").unwrap();
        let r = RunConfig::resolve(Some(&p), Overrides { theta_tol: Some(1e-11), ..Default::default() }).unwrap();
        assert_eq!(r.cfg.points()[0], 0.0);
        assert_eq!(r.tol.theta, 1e-11);
        assert_eq!(r.suites, vec![Suite::Lattice]);
    }

    #[test]
    fn rejects_bad_points() {
        let o = Overrides { points: Some(vec![1.0, 2.0, 3.0]), ..Default::default() };
        assert!(RunConfig::resolve(None, o).is_err());
    }
}
