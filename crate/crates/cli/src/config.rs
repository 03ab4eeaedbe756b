use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use hardy_core::detection::DetectorModel;
use hardy_core::experiment::HardyParams;
use hardy_core::source::DistinguishabilityModel;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScanConfig {
    /// Grid points for scan-delay, scan-phase and threshold.
    pub points: usize,
    /// scan-delay covers [−delay_max_fs, +delay_max_fs].
    pub delay_max_fs: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            points: 41,
            delay_max_fs: 1500.0,
        }
    }
}

/// Everything a run needs. Loaded from a JSON file, then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: HardyParams,
    pub detectors: DetectorModel,
    pub n_trials: u64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub network: Option<PathBuf>,
    pub scan: ScanConfig,
    /// Run the nine-combination shutter calibration before `simulate` and
    /// correct the counts with its pair efficiencies.
    pub calibrate: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: HardyParams::default(),
            detectors: DetectorModel::default(),
            n_trials: 1_000_000,
            seed: 1,
            out: None,
            format: Format::Csv,
            network: None,
            scan: ScanConfig::default(),
            calibrate: false,
        }
    }
}

#[derive(Args, Clone, Debug, Default)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its fields
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Source pairs per setting
    #[arg(long, global = true, value_name = "N")]
    pub trials: Option<u64>,
    #[arg(long, global = true, value_name = "P")]
    pub p_disting: Option<f64>,
    /// Relative delay in fs; switches the source to the delay model with
    /// p-disting as the zero-delay floor
    #[arg(long, global = true, value_name = "FS", allow_hyphen_values = true)]
    pub delay: Option<f64>,
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    pub phase_plus: Option<f64>,
    #[arg(long, global = true, value_name = "RAD", allow_hyphen_values = true)]
    pub phase_minus: Option<f64>,
    /// Write data here instead of standard output
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Network description file to use instead of the built-in network
    #[arg(long, global = true, value_name = "PATH")]
    pub network: Option<PathBuf>,
    /// Grid points for scans
    #[arg(long, global = true, value_name = "N")]
    pub points: Option<usize>,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
}

/// Flag > file > default.
pub fn resolve(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => load(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(n) = args.trials {
        cfg.n_trials = n;
    }
    if let Some(p) = args.p_disting {
        cfg.params.source.p_disting = p;
    }
    if let Some(delay) = args.delay {
        cfg.params.source.delay_fs = delay;
        cfg.params.source.model = DistinguishabilityModel::FromDelay;
    }
    if let Some(phi) = args.phase_plus {
        cfg.params.phase_plus = phi;
    }
    if let Some(phi) = args.phase_minus {
        cfg.params.phase_minus = phi;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(format) = args.format {
        cfg.format = format;
    }
    if let Some(net) = &args.network {
        cfg.network = Some(net.clone());
    }
    if let Some(points) = args.points {
        cfg.scan.points = points;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.n_trials == 0 {
        return Err(CliError::Config("n_trials must be at least 1".into()));
    }
    if cfg.scan.points < 2 {
        return Err(CliError::Config("scans need at least 2 points".into()));
    }
    if !(cfg.scan.delay_max_fs > 0.0 && cfg.scan.delay_max_fs.is_finite()) {
        return Err(CliError::Config("delay_max_fs must be positive".into()));
    }
    cfg.params.validate()?;
    cfg.detectors.validate()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_over_defaults() {
        let dir = std::env::temp_dir().join(format!("hardy-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.json");
        fs::write(
            &path,
            r#"{"seed": 5, "n_trials": 10, "params": {"source": {"p_disting": 0.2}}}"#,
        )
        .unwrap();
        let args = CommonArgs {
            config: Some(path),
            seed: Some(9),
            ..CommonArgs::default()
        };
        let cfg = resolve(&args).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.n_trials, 10);
        assert_eq!(cfg.params.source.p_disting, 0.2);
        assert_eq!(cfg.scan.points, 41);
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn delay_flag_selects_delay_model() {
        let args = CommonArgs {
            delay: Some(200.0),
            ..CommonArgs::default()
        };
        let cfg = resolve(&args).unwrap();
        assert_eq!(cfg.params.source.model, DistinguishabilityModel::FromDelay);
    }

    #[test]
    fn invalid_values_rejected() {
        let zero = CommonArgs {
            trials: Some(0),
            ..CommonArgs::default()
        };
        assert!(matches!(resolve(&zero), Err(CliError::Config(_))));
        let bad_p = CommonArgs {
            p_disting: Some(1.5),
            ..CommonArgs::default()
        };
        assert!(matches!(resolve(&bad_p), Err(CliError::Core(_))));
    }
}
