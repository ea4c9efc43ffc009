//! WebAssembly bindings for the interactive bound explorer in `www/`.
//!
//! Each exported function validates its inputs through the core types and
//! hands back flat `Float64Array`s, so the page needs no serialization layer.

use lens_crlb::fisher::{crlb_lens, crlb_ula};
use lens_crlb::simulate::{monte_carlo_variance, noise_variance_for_snr};
use lens_crlb::{array_model, ArrayConfig, LensConfig, PhiSupport, SearchConfig, SignalParams};
use wasm_bindgen::prelude::*;

/// Upper limit on Monte Carlo trials per call, to keep the page responsive.
pub const MAX_TRIALS: usize = 5000;

fn lens(cfg: &ArrayConfig, sigma_c: f64) -> Result<LensConfig, String> {
    LensConfig::normalized(cfg, sigma_c, PhiSupport::default()).map_err(|e| e.to_string())
}

fn signal(snr_db: f64, doa_deg: f64) -> Result<SignalParams, String> {
    if !snr_db.is_finite() {
        return Err(format!("SNR must be finite, got {snr_db}"));
    }
    SignalParams::new(1.0, 0.0, doa_deg.to_radians(), noise_variance_for_snr(1.0, snr_db)).map_err(|e| e.to_string())
}

/// Bound curves over an angle grid: one lens curve per width and the
/// bare-array reference, all at unit amplitude.
#[wasm_bindgen]
#[derive(Debug, Clone, PartialEq)]
pub struct BoundCurves {
    phi_deg: Vec<f64>,
    sigma_c: Vec<f64>,
    lens: Vec<f64>,
    ula: Vec<f64>,
}

#[wasm_bindgen]
impl BoundCurves {
    #[wasm_bindgen(getter)]
    pub fn phi_deg(&self) -> Vec<f64> {
        self.phi_deg.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn sigma_c(&self) -> Vec<f64> {
        self.sigma_c.clone()
    }

    /// Lens bounds, row-major: curve `i` occupies `[i * len, (i + 1) * len)`.
    #[wasm_bindgen(getter)]
    pub fn lens(&self) -> Vec<f64> {
        self.lens.clone()
    }

    #[wasm_bindgen(getter)]
    pub fn ula(&self) -> Vec<f64> {
        self.ula.clone()
    }
}

pub fn compute_bound_curves(
    n_elements: usize,
    spacing: f64,
    sigma_c: &[f64],
    phi_min_deg: f64,
    phi_max_deg: f64,
    count: usize,
    snr_db: f64,
) -> Result<BoundCurves, String> {
    let cfg = ArrayConfig::new(n_elements, spacing).map_err(|e| e.to_string())?;
    if sigma_c.is_empty() {
        return Err("at least one lens width is needed".into());
    }
    if !(2..=4001).contains(&count) {
        return Err(format!("angle count must be in [2, 4001], got {count}"));
    }
    if !(phi_min_deg < phi_max_deg) {
        return Err(format!("empty angle range [{phi_min_deg}, {phi_max_deg}]"));
    }
    let step = (phi_max_deg - phi_min_deg) / (count - 1) as f64;
    let phi_deg: Vec<f64> = (0..count).map(|i| phi_min_deg + step * i as f64).collect();
    let params: Vec<SignalParams> = phi_deg.iter().map(|&p| signal(snr_db, p)).collect::<Result<_, _>>()?;

    let ula = params
        .iter()
        .map(|s| crlb_ula(&cfg, s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let mut curves = Vec::with_capacity(sigma_c.len() * count);
    for &width in sigma_c {
        let lens = lens(&cfg, width)?;
        for s in &params {
            curves.push(crlb_lens(&cfg, &lens, s).map_err(|e| e.to_string())?);
        }
    }
    Ok(BoundCurves {
        phi_deg,
        sigma_c: sigma_c.to_vec(),
        lens: curves,
        ula,
    })
}

/// Normalized lens amplitudes `|A_nn|`, element order from left to right.
pub fn compute_amplitude_profile(n_elements: usize, sigma_c: f64, doa_deg: f64) -> Result<Vec<f64>, String> {
    let cfg = ArrayConfig::new(n_elements, 0.5).map_err(|e| e.to_string())?;
    let lens = lens(&cfg, sigma_c)?;
    let doa = signal(0.0, doa_deg)?.doa();
    Ok(array_model::amplitude_matrix(&cfg, &lens, doa).into_inner())
}

/// `[doa_variance, crlb, efficiency, doa_bias]` from a seeded ML campaign.
#[allow(clippy::too_many_arguments)]
pub fn compute_monte_carlo_point(
    n_elements: usize,
    spacing: f64,
    sigma_c: f64,
    snr_db: f64,
    doa_deg: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    if trials > MAX_TRIALS {
        return Err(format!("at most {MAX_TRIALS} trials per call, got {trials}"));
    }
    let cfg = ArrayConfig::new(n_elements, spacing).map_err(|e| e.to_string())?;
    let lens = lens(&cfg, sigma_c)?;
    let params = signal(snr_db, doa_deg)?;
    let r =
        monte_carlo_variance(&cfg, &lens, &params, trials, seed, SearchConfig::default()).map_err(|e| e.to_string())?;
    Ok(vec![r.doa_variance, r.crlb, r.efficiency, r.doa_bias])
}

#[wasm_bindgen]
pub fn bound_curves(
    n_elements: usize,
    spacing: f64,
    sigma_c: Vec<f64>,
    phi_min_deg: f64,
    phi_max_deg: f64,
    count: usize,
    snr_db: f64,
) -> Result<BoundCurves, JsError> {
    compute_bound_curves(n_elements, spacing, &sigma_c, phi_min_deg, phi_max_deg, count, snr_db)
        .map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn amplitude_profile(n_elements: usize, sigma_c: f64, doa_deg: f64) -> Result<Vec<f64>, JsError> {
    compute_amplitude_profile(n_elements, sigma_c, doa_deg).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn monte_carlo_point(
    n_elements: usize,
    spacing: f64,
    sigma_c: f64,
    snr_db: f64,
    doa_deg: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    compute_monte_carlo_point(n_elements, spacing, sigma_c, snr_db, doa_deg, trials, seed).map_err(|e| JsError::new(&e))
}
