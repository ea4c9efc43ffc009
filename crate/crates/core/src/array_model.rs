//! Array geometry, lens amplitude profile and signal parameters.
//!
//! Element indices run symmetrically from `-(N-1)/2` to `(N-1)/2` so the phase
//! reference sits at the array centre. The lens is a sampled Gaussian whose
//! centre moves linearly with the arrival angle:
//!
//! ```text
//! A(phi)_nn = sqrt(p_lens) / sqrt(2 pi sigma_c^2) * exp(-(n + (N-1) phi / pi)^2 / sigma_c^2)
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use num_complex::Complex64;

use crate::error::{ModelError, Result};
use crate::quadrature;

/// Geometry of an odd-length uniform linear array.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayConfig {
    n_elements: usize,
    spacing_wavelengths: f64,
}

impl ArrayConfig {
    pub fn new(n_elements: usize, spacing_wavelengths: f64) -> Result<Self> {
        if n_elements < 3 || n_elements.is_multiple_of(2) {
            return Err(ModelError::InvalidArray(format!(
                "element count must be odd and at least 3, got {n_elements}"
            )));
        }
        if !(spacing_wavelengths.is_finite() && spacing_wavelengths > 0.0) {
            return Err(ModelError::InvalidArray(format!(
                "element spacing must be positive, got {spacing_wavelengths}"
            )));
        }
        Ok(Self {
            n_elements,
            spacing_wavelengths,
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn spacing_wavelengths(&self) -> f64 {
        self.spacing_wavelengths
    }

    /// Wavenumber times spacing, `k d = 2 pi d / lambda`.
    pub fn kd(&self) -> f64 {
        2.0 * PI * self.spacing_wavelengths
    }

    /// `(N-1)/2`, the largest element index.
    pub fn half_span(&self) -> usize {
        (self.n_elements - 1) / 2
    }

    /// Element indices `-(N-1)/2, ..., (N-1)/2` in ascending order.
    pub fn indices(&self) -> impl Iterator<Item = f64> + Clone {
        let h = self.half_span() as i64;
        (-h..=h).map(|n| n as f64)
    }

    /// Shift of the lens profile along the index axis, `(N-1) phi / pi`.
    pub fn lens_shift(&self, doa: f64) -> f64 {
        (self.n_elements - 1) as f64 * doa / PI
    }
}

/// Closed interval of arrival angles (radians) over which lens power is
/// averaged when normalizing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiSupport {
    lo: f64,
    hi: f64,
}

impl PhiSupport {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let valid = lo.is_finite() && hi.is_finite() && lo < hi && lo > -FRAC_PI_2 && hi < FRAC_PI_2;
        if !valid {
            return Err(ModelError::DegenerateSupport { lo, hi });
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

impl Default for PhiSupport {
    /// `[-pi/3, pi/3]`.
    fn default() -> Self {
        Self {
            lo: -FRAC_PI_3,
            hi: FRAC_PI_3,
        }
    }
}

/// Lens width parameter together with its power normalization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LensConfig {
    sigma_c: f64,
    p_lens: f64,
    phi_support: PhiSupport,
}

impl LensConfig {
    /// Builds a lens whose `p_lens` equalizes the average received power with
    /// the bare array over `phi_support`.
    pub fn normalized(cfg: &ArrayConfig, sigma_c: f64, phi_support: PhiSupport) -> Result<Self> {
        let p_lens = normalize_power(cfg, sigma_c, phi_support)?;
        Ok(Self {
            sigma_c,
            p_lens,
            phi_support,
        })
    }

    /// Builds a lens with an explicit normalization factor. Mostly useful for
    /// hand-checkable cases such as `p_lens = 1`.
    pub fn with_p_lens(sigma_c: f64, p_lens: f64, phi_support: PhiSupport) -> Result<Self> {
        check_sigma_c(sigma_c)?;
        if !(p_lens.is_finite() && p_lens > 0.0) {
            return Err(ModelError::InvalidLens(format!(
                "p_lens must be positive, got {p_lens}"
            )));
        }
        Ok(Self {
            sigma_c,
            p_lens,
            phi_support,
        })
    }

    pub fn sigma_c(&self) -> f64 {
        self.sigma_c
    }

    pub fn p_lens(&self) -> f64 {
        self.p_lens
    }

    pub fn phi_support(&self) -> PhiSupport {
        self.phi_support
    }

    /// Common prefactor of the squared amplitude, `p_lens / (2 pi sigma_c^2)`.
    pub fn power_scale(&self) -> f64 {
        self.p_lens / (2.0 * PI * self.sigma_c * self.sigma_c)
    }
}

fn check_sigma_c(sigma_c: f64) -> Result<()> {
    if sigma_c.is_finite() && sigma_c > 0.0 {
        Ok(())
    } else {
        Err(ModelError::InvalidLens(format!(
            "sigma_c must be positive, got {sigma_c}"
        )))
    }
}

/// Deterministic unknowns of the single-source model plus the noise level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalParams {
    amplitude: f64,
    phase: f64,
    lens_phase: f64,
    doa: f64,
    noise_variance: f64,
}

impl SignalParams {
    /// `phase` is wrapped into `[-pi, pi)`. The lens phase defaults to 0.
    pub fn new(amplitude: f64, phase: f64, doa: f64, noise_variance: f64) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude > 0.0) {
            return Err(ModelError::InvalidSignal(format!(
                "amplitude must be positive, got {amplitude}"
            )));
        }
        if !(noise_variance.is_finite() && noise_variance > 0.0) {
            return Err(ModelError::InvalidSignal(format!(
                "noise variance must be positive, got {noise_variance}"
            )));
        }
        if !phase.is_finite() {
            return Err(ModelError::InvalidSignal(format!("phase must be finite, got {phase}")));
        }
        check_doa(doa)?;
        Ok(Self {
            amplitude,
            phase: wrap_phase(phase),
            lens_phase: 0.0,
            doa,
            noise_variance,
        })
    }

    pub fn with_lens_phase(mut self, lens_phase: f64) -> Self {
        self.lens_phase = lens_phase;
        self
    }

    pub fn with_doa(self, doa: f64) -> Result<Self> {
        check_doa(doa)?;
        Ok(Self { doa, ..self })
    }

    pub fn with_amplitude(self, amplitude: f64) -> Result<Self> {
        Self::new(amplitude, self.phase, self.doa, self.noise_variance).map(|p| p.with_lens_phase(self.lens_phase))
    }

    pub fn with_noise_variance(self, noise_variance: f64) -> Result<Self> {
        Self::new(self.amplitude, self.phase, self.doa, noise_variance).map(|p| p.with_lens_phase(self.lens_phase))
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn lens_phase(&self) -> f64 {
        self.lens_phase
    }

    pub fn doa(&self) -> f64 {
        self.doa
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    /// Per-element SNR `p^2 / sigma_n^2` in dB.
    pub fn snr_db(&self) -> f64 {
        10.0 * (self.amplitude * self.amplitude / self.noise_variance).log10()
    }
}

/// Wraps an angle into `[-pi, pi)`.
pub fn wrap_phase(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(2.0 * PI) - PI;
    // rem_euclid can round up to exactly 2 pi
    if wrapped >= PI {
        wrapped - 2.0 * PI
    } else {
        wrapped
    }
}

pub(crate) fn check_doa(doa: f64) -> Result<()> {
    if doa.is_finite() && doa.abs() < FRAC_PI_2 {
        Ok(())
    } else {
        Err(ModelError::DoaOutOfRange(doa))
    }
}

/// Diagonal real matrix stored by its diagonal, in element-index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagMatrix(Vec<f64>);

impl DiagMatrix {
    pub fn diag(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        if row == col {
            self.0[row]
        } else {
            0.0
        }
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// `s(phi)`: entry `n` is `z^n` with `z = exp(j kd sin phi)`.
pub fn steering_vector(cfg: &ArrayConfig, doa: f64) -> Result<Vec<Complex64>> {
    check_doa(doa)?;
    let psi = cfg.kd() * doa.sin();
    Ok(cfg.indices().map(|n| Complex64::cis(psi * n)).collect())
}

/// `d s / d phi`: entry `n` is `j kd cos(phi) n z^n`.
pub fn steering_derivative(cfg: &ArrayConfig, doa: f64) -> Result<Vec<Complex64>> {
    check_doa(doa)?;
    let psi = cfg.kd() * doa.sin();
    let rate = cfg.kd() * doa.cos();
    Ok(cfg
        .indices()
        .map(|n| Complex64::new(0.0, rate * n) * Complex64::cis(psi * n))
        .collect())
}

/// `C(phi)` with diagonal `n + (N-1) phi / pi`.
pub fn offset_matrix(cfg: &ArrayConfig, doa: f64) -> DiagMatrix {
    let shift = cfg.lens_shift(doa);
    DiagMatrix(cfg.indices().map(|n| n + shift).collect())
}

/// `A(phi)`, the lens amplitude taper.
pub fn amplitude_matrix(cfg: &ArrayConfig, lens: &LensConfig, doa: f64) -> DiagMatrix {
    let scale = (lens.p_lens / (2.0 * PI * lens.sigma_c * lens.sigma_c)).sqrt();
    let inv_var = 1.0 / (lens.sigma_c * lens.sigma_c);
    let shift = cfg.lens_shift(doa);
    DiagMatrix(
        cfg.indices()
            .map(|n| {
                let c = n + shift;
                scale * (-c * c * inv_var).exp()
            })
            .collect(),
    )
}

/// `sum_n A(phi)_nn^2` with `p_lens = 1`.
fn unnormalized_power(cfg: &ArrayConfig, sigma_c: f64, doa: f64) -> f64 {
    let inv_var = 1.0 / (sigma_c * sigma_c);
    let shift = cfg.lens_shift(doa);
    let sum: f64 = cfg
        .indices()
        .map(|n| {
            let c = n + shift;
            (-2.0 * c * c * inv_var).exp()
        })
        .sum();
    sum / (2.0 * PI * sigma_c * sigma_c)
}

/// Average of [`unnormalized_power`] over `doa` uniform on the support,
/// evaluated with the fixed 256-node Gauss-Legendre rule.
fn average_unnormalized_power(cfg: &ArrayConfig, sigma_c: f64, support: PhiSupport) -> f64 {
    let integral = quadrature::integrate(support.lo, support.hi, |phi| unnormalized_power(cfg, sigma_c, phi));
    integral / (support.hi - support.lo)
}

/// Factor `p_lens` making the expected total lens power equal `N` when the
/// arrival angle is uniform on `phi_support`.
pub fn normalize_power(cfg: &ArrayConfig, sigma_c: f64, phi_support: PhiSupport) -> Result<f64> {
    check_sigma_c(sigma_c)?;
    // re-validate in case the support was built by struct update elsewhere
    let support = PhiSupport::new(phi_support.lo, phi_support.hi)?;
    let average = average_unnormalized_power(cfg, sigma_c, support);
    if !(average.is_finite() && average > 0.0) {
        return Err(ModelError::InvalidLens(format!(
            "lens with sigma_c = {sigma_c} collects no power over the support"
        )));
    }
    Ok(cfg.n_elements as f64 / average)
}

/// Expected total lens power over the support for the given lens, i.e. the
/// left-hand side of the normalization condition.
pub fn average_lens_power(cfg: &ArrayConfig, lens: &LensConfig) -> f64 {
    lens.p_lens * average_unnormalized_power(cfg, lens.sigma_c, lens.phi_support)
}

/// Noiseless received vector `v = p A(phi) e^{j(b + f)} s(phi)`.
pub fn signal_mean(cfg: &ArrayConfig, lens: &LensConfig, params: &SignalParams) -> Vec<Complex64> {
    let amp = amplitude_matrix(cfg, lens, params.doa);
    let gain = Complex64::from_polar(params.amplitude, params.phase + params.lens_phase);
    let psi = cfg.kd() * params.doa.sin();
    cfg.indices()
        .zip(amp.diag())
        .map(|(n, &a)| gain * a * Complex64::cis(psi * n))
        .collect()
}
