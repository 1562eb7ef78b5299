//! Run manifests: the merged config, the version, wall time and every check.

use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Non-finite residuals are recorded as f64::MAX and fail.
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    /// Passes when `residual <= tolerance`.
    pub fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        let finite = residual.is_finite();
        Check {
            name: name.into(),
            passed: finite && residual <= tolerance,
            residual: if finite { residual } else { f64::MAX },
            tolerance,
        }
    }

    /// A yes/no check; residual 0 on success and 1 on failure.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            passed: ok,
            residual: if ok { 0.0 } else { 1.0 },
            tolerance: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub config: RunConfig,
    pub wall_time_s: f64,
    pub checks_run: usize,
    pub checks_failed: usize,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl RunManifest {
    pub fn new(config: RunConfig, wall_time_s: f64, checks: Vec<Check>) -> Self {
        let failed = checks.iter().filter(|c| !c.passed).count();
        RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            wall_time_s,
            checks_run: checks.len(),
            checks_failed: failed,
            passed: failed == 0,
            checks,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_residual_fails() {
        let c = Check::at_most("x", f64::NAN, 1.0);
        assert!(!c.passed);
        assert_eq!(c.residual, f64::MAX);
        assert!(Check::at_most("y", 1.0, 1.0).passed);
    }
}
