//! Flag and config-file resolution.
//!
//! Precedence: CLI flag > TOML config file (`--config`) > built-in default.
//! Everything is validated here, before any input file is touched; bad
//! values are usage errors.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use simploscore::curvature::VertexCurvatureMode;
use simploscore::evolution::{EvolutionMode, StepUnit};
use simploscore::rational::parse_beats;
use simploscore::Beats;

use crate::{AppError, SharedOpts};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    Linear,
    Exponential,
    Poly(usize),
}

impl ModelSpec {
    fn parse(s: &str) -> Result<Self, AppError> {
        match s {
            "linear" => Ok(ModelSpec::Linear),
            "exp" => Ok(ModelSpec::Exponential),
            other => {
                if let Some(degree) = other.strip_prefix("poly:") {
                    let n: usize = degree.parse().map_err(|_| {
                        AppError::Usage(format!("bad polynomial degree in `--model {other}`"))
                    })?;
                    if n == 0 {
                        return Err(AppError::Usage(
                            "polynomial degree must be at least 1".into(),
                        ));
                    }
                    Ok(ModelSpec::Poly(n))
                } else {
                    Err(AppError::Usage(format!(
                        "unknown model `{other}` (expected linear, exp or poly:N)"
                    )))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Formats {
            csv: true,
            json: true,
            svg: false,
        }
    }
}

impl Formats {
    fn parse(s: &str) -> Result<Self, AppError> {
        let mut formats = Formats {
            csv: false,
            json: false,
            svg: false,
        };
        for part in s.split(',') {
            match part.trim() {
                "csv" => formats.csv = true,
                "json" => formats.json = true,
                "svg" => formats.svg = true,
                other => {
                    return Err(AppError::Usage(format!(
                        "unknown format `{other}` (expected a comma list of csv, json, svg)"
                    )))
                }
            }
        }
        Ok(formats)
    }
}

/// `--config` file contents; keys mirror the long flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    epsilon_beats: Option<String>,
    beats_per_measure: Option<String>,
    pickup_beats: Option<String>,
    mode: Option<String>,
    window: Option<usize>,
    stride: Option<usize>,
    step_unit: Option<String>,
    curvature: Option<String>,
    model: Option<String>,
    out: Option<PathBuf>,
    format: Option<String>,
}

/// Fully resolved, validated run settings.
#[derive(Debug, Clone)]
pub struct Settings {
    pub epsilon_beats: Beats,
    pub beats_per_measure: Option<Beats>,
    pub pickup_beats: Beats,
    pub mode: EvolutionMode,
    pub window: usize,
    pub stride: usize,
    pub step_unit: StepUnit,
    pub curvature: VertexCurvatureMode,
    pub model: ModelSpec,
    pub out: PathBuf,
    pub formats: Formats,
    pub exp_no_offset: bool,
}

fn beats_flag(value: &Option<String>, flag: &str) -> Result<Option<Beats>, AppError> {
    value
        .as_deref()
        .map(|s| parse_beats(s).map_err(|e| AppError::Usage(format!("--{flag}: {e}"))))
        .transpose()
}

pub fn resolve(opts: &SharedOpts) -> Result<Settings, AppError> {
    let file: FileConfig = match &opts.config {
        None => FileConfig::default(),
        Some(path) => load_config(path)?,
    };

    let epsilon_beats = beats_flag(&opts.epsilon_beats, "epsilon-beats")?
        .or(beats_flag(&file.epsilon_beats, "epsilon-beats (config)")?)
        .unwrap_or(Beats::new(1, 16));
    if epsilon_beats < Beats::from_integer(0) {
        return Err(AppError::Usage("--epsilon-beats must be nonnegative".into()));
    }
    let beats_per_measure = beats_flag(&opts.beats_per_measure, "beats-per-measure")?
        .or(beats_flag(&file.beats_per_measure, "beats-per-measure (config)")?);
    if let Some(b) = beats_per_measure {
        if b <= Beats::from_integer(0) {
            return Err(AppError::Usage("--beats-per-measure must be positive".into()));
        }
    }
    let pickup_beats = beats_flag(&opts.pickup_beats, "pickup-beats")?
        .or(beats_flag(&file.pickup_beats, "pickup-beats (config)")?)
        .unwrap_or(Beats::from_integer(0));
    if pickup_beats < Beats::from_integer(0) {
        return Err(AppError::Usage("--pickup-beats must be nonnegative".into()));
    }

    let mode = opts
        .mode
        .as_deref()
        .or(file.mode.as_deref())
        .map(|s| s.parse::<EvolutionMode>())
        .transpose()
        .map_err(|e| AppError::Usage(e.to_string()))?
        .unwrap_or_default();
    let step_unit = opts
        .step_unit
        .as_deref()
        .or(file.step_unit.as_deref())
        .map(|s| s.parse::<StepUnit>())
        .transpose()
        .map_err(|e| AppError::Usage(e.to_string()))?
        .unwrap_or_default();
    let curvature = opts
        .curvature
        .as_deref()
        .or(file.curvature.as_deref())
        .map(|s| s.parse::<VertexCurvatureMode>())
        .transpose()
        .map_err(|e| AppError::Usage(e.to_string()))?
        .unwrap_or_default();
    let model = opts
        .model
        .as_deref()
        .or(file.model.as_deref())
        .map(ModelSpec::parse)
        .transpose()?
        .unwrap_or(ModelSpec::Linear);

    let window = opts.window.or(file.window).unwrap_or(2);
    let stride = opts.stride.or(file.stride).unwrap_or(1);
    if window == 0 {
        return Err(AppError::Usage("--window must be at least 1".into()));
    }
    if stride == 0 {
        return Err(AppError::Usage("--stride must be at least 1".into()));
    }

    let formats = opts
        .format
        .as_deref()
        .or(file.format.as_deref())
        .map(Formats::parse)
        .transpose()?
        .unwrap_or_default();
    let out = opts
        .out
        .clone()
        .or(file.out)
        .unwrap_or_else(|| PathBuf::from("."));

    Ok(Settings {
        epsilon_beats,
        beats_per_measure,
        pickup_beats,
        mode,
        window,
        stride,
        step_unit,
        curvature,
        model,
        out,
        formats,
        exp_no_offset: opts.exp_no_offset,
    })
}

fn load_config(path: &Path) -> Result<FileConfig, AppError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| AppError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text)
        .map_err(|e| AppError::Usage(format!("bad config {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SharedOpts {
        SharedOpts::default()
    }

    #[test]
    fn defaults() {
        let s = resolve(&opts()).unwrap();
        assert_eq!(s.epsilon_beats, Beats::new(1, 16));
        assert_eq!(s.pickup_beats, Beats::from_integer(0));
        assert_eq!(s.beats_per_measure, None);
        assert_eq!(s.mode, EvolutionMode::Cumulative);
        assert_eq!(s.window, 2);
        assert_eq!(s.stride, 1);
        assert_eq!(s.model, ModelSpec::Linear);
        assert!(s.formats.csv && s.formats.json && !s.formats.svg);
    }

    #[test]
    fn flag_beats_parsing_and_validation() {
        let mut o = opts();
        o.epsilon_beats = Some("1/8".into());
        o.beats_per_measure = Some("3".into());
        let s = resolve(&o).unwrap();
        assert_eq!(s.epsilon_beats, Beats::new(1, 8));
        assert_eq!(s.beats_per_measure, Some(Beats::from_integer(3)));

        o.beats_per_measure = Some("0".into());
        assert!(matches!(resolve(&o), Err(AppError::Usage(_))));
    }

    #[test]
    fn model_strings() {
        assert_eq!(ModelSpec::parse("linear").unwrap(), ModelSpec::Linear);
        assert_eq!(ModelSpec::parse("exp").unwrap(), ModelSpec::Exponential);
        assert_eq!(ModelSpec::parse("poly:4").unwrap(), ModelSpec::Poly(4));
        assert!(ModelSpec::parse("poly:x").is_err());
        assert!(ModelSpec::parse("cubic").is_err());
    }

    #[test]
    fn config_file_precedence() {
        let dir = std::env::temp_dir().join("simploscore-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        std::fs::write(&path, "epsilon-beats = \"1/4\"\nwindow = 7\nmodel = \"poly:3\"\n").unwrap();

        let mut o = opts();
        o.config = Some(path.clone());
        let s = resolve(&o).unwrap();
        assert_eq!(s.epsilon_beats, Beats::new(1, 4));
        assert_eq!(s.window, 7);
        assert_eq!(s.model, ModelSpec::Poly(3));

        // explicit flag wins over the file
        o.epsilon_beats = Some("1/2".into());
        let s = resolve(&o).unwrap();
        assert_eq!(s.epsilon_beats, Beats::new(1, 2));
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn unknown_config_key_is_a_usage_error() {
        let dir = std::env::temp_dir().join("simploscore-config-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.toml");
        std::fs::write(&path, "zoom = 3\n").unwrap();
        let mut o = opts();
        o.config = Some(path.clone());
        assert!(matches!(resolve(&o), Err(AppError::Usage(_))));
        std::fs::remove_file(path).ok();
    }
}
