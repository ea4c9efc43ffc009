//! JSON experiment configuration. Angles are in degrees here and converted
//! to radians when the core types are built.

use std::path::{Path, PathBuf};

use lens_crlb::simulate::{noise_variance_for_snr, SearchConfig};
use lens_crlb::{ArrayConfig, LensConfig, PhiSupport, SignalParams};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub array: ArraySection,
    pub sigma_c_list: Vec<f64>,
    pub phi_grid: PhiGrid,
    #[serde(default)]
    pub lens: LensSection,
    #[serde(default)]
    pub signal: SignalSection,
    #[serde(default)]
    pub mc: Option<McSection>,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArraySection {
    pub n_elements: usize,
    #[serde(default = "default_spacing")]
    pub spacing_wavelengths: f64,
}

fn default_spacing() -> f64 {
    0.5
}

/// `count` evenly spaced angles from `min` to `max` inclusive, in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl PhiGrid {
    pub fn degrees(&self) -> Vec<f64> {
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                if k + 1 == self.count {
                    self.max
                } else {
                    self.min + step * k as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LensSection {
    /// Interval the lens power is averaged over, degrees.
    #[serde(default = "default_support")]
    pub phi_support_deg: [f64; 2],
    #[serde(default)]
    pub lens_phase_deg: f64,
}

fn default_support() -> [f64; 2] {
    [-60.0, 60.0]
}

impl Default for LensSection {
    fn default() -> Self {
        Self {
            phi_support_deg: default_support(),
            lens_phase_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSection {
    pub amplitude: f64,
    pub phase_deg: f64,
    pub noise_variance: f64,
}

impl Default for SignalSection {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            phase_deg: 0.0,
            noise_variance: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub trials: usize,
    pub master_seed: u64,
    pub snr_list_db: Vec<f64>,
    /// True arrival angle of every trial, degrees.
    #[serde(default = "default_mc_doa")]
    pub doa_deg: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_refine_iters")]
    pub refine_iters: usize,
}

fn default_mc_doa() -> f64 {
    20.0
}

fn default_grid_points() -> usize {
    SearchConfig::default().grid_points
}

fn default_refine_iters() -> usize {
    SearchConfig::default().refine_iters
}

impl McSection {
    pub fn search(&self) -> SearchConfig {
        SearchConfig {
            grid_points: self.grid_points,
            refine_iters: self.refine_iters,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    /// CSV only.
    #[default]
    Csv,
    /// CSV plus an SVG plot of the sweep.
    Svg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out_dir")]
    pub directory: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: default_out_dir(),
            format: OutputFormat::default(),
        }
    }
}

impl ExperimentConfig {
    /// N = 17 at half-wavelength spacing, four lens widths spanning 1/1.96
    /// to 100, 121 angles over [-60, 60] degrees.
    pub fn default_fig2() -> Self {
        Self {
            array: ArraySection {
                n_elements: 17,
                spacing_wavelengths: 0.5,
            },
            sigma_c_list: vec![1.0 / 1.96, 2.0, 10.0, 100.0],
            phi_grid: PhiGrid {
                min: -60.0,
                max: 60.0,
                count: 121,
            },
            lens: LensSection::default(),
            signal: SignalSection::default(),
            mc: Some(McSection {
                trials: 10_000,
                master_seed: 20_240_601,
                snr_list_db: vec![0.0, 10.0, 20.0, 30.0],
                doa_deg: default_mc_doa(),
                grid_points: default_grid_points(),
                refine_iters: default_refine_iters(),
            }),
            output: OutputSection {
                directory: default_out_dir(),
                format: OutputFormat::Svg,
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Rejects anything the core constructors would reject, before any work starts.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.array_config()?;
        if self.sigma_c_list.is_empty() {
            return bad("sigma_c_list must not be empty".into());
        }
        if let Some(s) = self.sigma_c_list.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return bad(format!("sigma_c values must be positive, got {s}"));
        }
        let g = &self.phi_grid;
        if g.count < 2 {
            return bad(format!("phi_grid.count must be at least 2, got {}", g.count));
        }
        let inside = |d: f64| d.is_finite() && d.abs() < 90.0;
        if !(inside(g.min) && inside(g.max) && g.min < g.max) {
            return bad(format!(
                "phi_grid must satisfy -90 < min < max < 90 degrees, got [{}, {}]",
                g.min, g.max
            ));
        }
        self.phi_support()?;
        for &sigma_c in &self.sigma_c_list {
            self.lens_config(sigma_c)?;
        }
        self.signal_params(0.0)?;
        if let Some(mc) = &self.mc {
            if mc.trials < 100 {
                return bad(format!("mc.trials must be at least 100, got {}", mc.trials));
            }
            if mc.snr_list_db.is_empty() || mc.snr_list_db.iter().any(|s| !s.is_finite()) {
                return bad("mc.snr_list_db must be a nonempty list of finite values".into());
            }
            if !inside(mc.doa_deg) {
                return bad(format!("mc.doa_deg must lie inside (-90, 90), got {}", mc.doa_deg));
            }
            mc.search().validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn array_config(&self) -> Result<ArrayConfig> {
        ArrayConfig::new(self.array.n_elements, self.array.spacing_wavelengths)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn phi_support(&self) -> Result<PhiSupport> {
        let [lo, hi] = self.lens.phi_support_deg;
        PhiSupport::new(lo.to_radians(), hi.to_radians()).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn lens_config(&self, sigma_c: f64) -> Result<LensConfig> {
        LensConfig::normalized(&self.array_config()?, sigma_c, self.phi_support()?)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Signal parameters of the sweep at `doa_deg`.
    pub fn signal_params(&self, doa_deg: f64) -> Result<SignalParams> {
        let s = &self.signal;
        SignalParams::new(
            s.amplitude,
            s.phase_deg.to_radians(),
            doa_deg.to_radians(),
            s.noise_variance,
        )
        .map(|p| p.with_lens_phase(self.lens.lens_phase_deg.to_radians()))
        .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Signal parameters of a Monte Carlo campaign at `snr_db`; the noise
    /// variance follows from the configured amplitude.
    pub fn mc_params(&self, mc: &McSection, snr_db: f64) -> Result<SignalParams> {
        let noise = noise_variance_for_snr(self.signal.amplitude, snr_db);
        let base = self.signal_params(mc.doa_deg)?;
        base.with_noise_variance(noise)
            .map_err(|e| CliError::Config(e.to_string()))
    }
}
