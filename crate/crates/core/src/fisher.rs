//! Fisher information and Cramer-Rao bounds over `theta = [p, b, phi]`.
//!
//! The analytic matrix is assembled from the quadratic forms
//! `s^H A^2 s`, `s^H C A^2 s`, `s^H C^2 A^2 s`, `s1^H A^2 s1` and
//! `s^H A^2 s1`. The closed-form determinant and lens bound instead go
//! through the weighted index moments `D`, `D1`, `D2` of the squared taper, so
//! the two routes check each other. [`fisher_numeric`] is a third,
//! model-agnostic route based on finite differences of the noiseless signal.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::array_model::{
    amplitude_matrix, check_doa, offset_matrix, signal_mean, steering_derivative, steering_vector, ArrayConfig,
    LensConfig, SignalParams,
};
use crate::error::Result;

/// Position of a parameter in `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Param {
    Amplitude = 0,
    Phase = 1,
    Doa = 2,
}

impl Param {
    pub const ALL: [Param; 3] = [Param::Amplitude, Param::Phase, Param::Doa];

    pub fn name(self) -> &'static str {
        match self {
            Param::Amplitude => "p",
            Param::Phase => "b",
            Param::Doa => "phi",
        }
    }
}

/// Weighted index moments of the squared lens taper at one arrival angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DMoments {
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    pub d_frac: f64,
}

/// Real symmetric 3x3 Fisher information matrix in `[p, b, phi]` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherMatrix {
    entries: [[f64; 3]; 3],
}

impl FisherMatrix {
    pub fn from_entries(entries: [[f64; 3]; 3]) -> Self {
        Self { entries }
    }

    pub fn entries(&self) -> &[[f64; 3]; 3] {
        &self.entries
    }

    pub fn get(&self, row: Param, col: Param) -> f64 {
        self.entries[row as usize][col as usize]
    }

    pub fn set(&mut self, row: Param, col: Param, value: f64) {
        self.entries[row as usize][col as usize] = value;
    }

    /// Cofactor expansion along the first row.
    pub fn determinant(&self) -> f64 {
        det3(&self.entries)
    }

    /// Sum of the absolute values of the six products in the Leibniz
    /// expansion divided by `|det|`. Rounding in the assembled entries moves
    /// the determinant (and every inverse entry) by roughly this factor times
    /// machine epsilon.
    pub fn determinant_condition(&self) -> f64 {
        let m = &self.entries;
        let terms = [
            m[0][0] * m[1][1] * m[2][2],
            m[0][1] * m[1][2] * m[2][0],
            m[0][2] * m[1][0] * m[2][1],
            m[0][2] * m[1][1] * m[2][0],
            m[0][0] * m[1][2] * m[2][1],
            m[0][1] * m[1][0] * m[2][2],
        ];
        terms.iter().map(|t| t.abs()).sum::<f64>() / self.determinant().abs()
    }

    /// Inverse via the adjugate; `None` when the determinant is zero or not finite.
    pub fn inverse(&self) -> Option<[[f64; 3]; 3]> {
        inverse3(&self.entries)
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = &self.entries;
        (0..3).all(|i| (0..3).all(|j| (m[i][j] - m[j][i]).abs() <= tol))
    }

    /// Cholesky factorization succeeds with strictly positive pivots.
    pub fn is_positive_definite(&self) -> bool {
        let m = &self.entries;
        let mut l = [[0.0f64; 3]; 3];
        for i in 0..3 {
            for j in 0..=i {
                let partial: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    let pivot = m[i][i] - partial;
                    if !(pivot > 0.0 && pivot.is_finite()) {
                        return false;
                    }
                    l[i][i] = pivot.sqrt();
                } else {
                    l[i][j] = (m[i][j] - partial) / l[j][j];
                }
            }
        }
        true
    }
}

pub(crate) fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub(crate) fn inverse3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let det = det3(m);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    // adjugate = transpose of the cofactor matrix
    let adj = [
        [cof(1, 2, 1, 2), -cof(0, 2, 1, 2), cof(0, 1, 1, 2)],
        [-cof(1, 2, 0, 2), cof(0, 2, 0, 2), -cof(0, 1, 0, 2)],
        [cof(1, 2, 0, 1), -cof(0, 2, 0, 1), cof(0, 1, 0, 1)],
    ];
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = adj[i][j] / det;
        }
    }
    Some(inv)
}

/// `4 (N-1)^2 / (pi^2 sigma_c^4)`: information contributed by the sliding taper.
fn lens_rate(cfg: &ArrayConfig, lens: &LensConfig) -> f64 {
    let n1 = (cfg.n_elements() - 1) as f64;
    let s2 = lens.sigma_c() * lens.sigma_c();
    4.0 * n1 * n1 / (PI * PI * s2 * s2)
}

/// `k^2 d^2 cos^2 phi`: information contributed by the phase progression.
fn phase_rate(cfg: &ArrayConfig, doa: f64) -> f64 {
    let r = cfg.kd() * doa.cos();
    r * r
}

/// Squared-taper weights `p_lens / (2 pi sigma_c^2) exp(-2 (n + shift)^2 / sigma_c^2)`.
fn taper_weights<'a>(cfg: &'a ArrayConfig, lens: &'a LensConfig, doa: f64) -> impl Iterator<Item = (f64, f64)> + 'a {
    let scale = lens.power_scale();
    let inv_var = 1.0 / (lens.sigma_c() * lens.sigma_c());
    let shift = cfg.lens_shift(doa);
    cfg.indices().map(move |n| {
        let c = n + shift;
        (n, scale * (-2.0 * c * c * inv_var).exp())
    })
}

/// `D`, `D1`, `D2` and `D_frac = D / (D D2 - D1^2)`.
pub fn d_moments(cfg: &ArrayConfig, lens: &LensConfig, doa: f64) -> DMoments {
    let (d0, d1, d2) =
        taper_weights(cfg, lens, doa).fold((0.0, 0.0, 0.0), |(a, b, c), (n, w)| (a + w, b + n * w, c + n * n * w));
    let margin = positivity_margin(cfg, lens, doa);
    DMoments {
        d0,
        d1,
        d2,
        d_frac: d0 / margin,
    }
}

/// `D D2 - D1^2`, evaluated through Lagrange's identity as
/// `sum_{i<j} w_i w_j (n_i - n_j)^2` so that no cancellation occurs when one
/// element dominates the taper. Always positive for a valid lens unless the
/// off-peak weights underflow.
pub fn positivity_margin(cfg: &ArrayConfig, lens: &LensConfig, doa: f64) -> f64 {
    let weights: Vec<(f64, f64)> = taper_weights(cfg, lens, doa).collect();
    let mut margin = 0.0;
    for (i, &(ni, wi)) in weights.iter().enumerate() {
        for &(nj, wj) in &weights[i + 1..] {
            let dn = ni - nj;
            margin += wi * wj * dn * dn;
        }
    }
    margin
}

/// Assembles `J = -E[d^2 g / d theta_i d theta_j]` entry by entry.
pub fn fisher_matrix(cfg: &ArrayConfig, lens: &LensConfig, params: &SignalParams) -> FisherMatrix {
    let doa = params.doa();
    let p = params.amplitude();
    let noise = params.noise_variance();
    let s = steering_vector(cfg, doa).expect("SignalParams guarantees |doa| < pi/2");
    let s1 = steering_derivative(cfg, doa).expect("SignalParams guarantees |doa| < pi/2");
    let a = amplitude_matrix(cfg, lens, doa);
    let c = offset_matrix(cfg, doa);

    let mut s_a2_s = 0.0;
    let mut s_ca2_s = 0.0;
    let mut s_c2a2_s = 0.0;
    let mut s1_a2_s1 = 0.0;
    let mut s_a2_s1 = Complex64::new(0.0, 0.0);
    for k in 0..cfg.n_elements() {
        let a2 = a.diag()[k] * a.diag()[k];
        let ck = c.diag()[k];
        // s^H A^2 s and friends: |s_n|^2 = 1 but kept explicit to mirror the forms
        let ss = (s[k].conj() * s[k]).re;
        s_a2_s += ss * a2;
        s_ca2_s += ss * ck * a2;
        s_c2a2_s += ss * ck * ck * a2;
        s1_a2_s1 += (s1[k].conj() * s1[k]).re * a2;
        s_a2_s1 += s[k].conj() * a2 * s1[k];
    }

    let n1 = (cfg.n_elements() - 1) as f64;
    let sc2 = lens.sigma_c() * lens.sigma_c();
    let two_over_noise = 2.0 / noise;

    let pp = two_over_noise * s_a2_s;
    let bb = two_over_noise * p * p * s_a2_s;
    let phiphi = two_over_noise * p * p * (lens_rate(cfg, lens) * s_c2a2_s + s1_a2_s1);
    let pb = 0.0;
    // -E[d2g/db dphi] = -Re(2j p^2/sigma^2 s^H A^2 s1); s^H A^2 s1 is purely imaginary
    let bphi = -(Complex64::new(0.0, two_over_noise * p * p) * s_a2_s1).re;
    let phip = -4.0 * p * n1 / (PI * noise * sc2) * s_ca2_s;

    FisherMatrix {
        entries: [[pp, pb, phip], [pb, bb, bphi], [phip, bphi, phiphi]],
    }
}

/// Finite-difference oracle: `J_ij = (2/sigma_n^2) Re[(dv/dtheta_i)^H (dv/dtheta_j)]`
/// with central differences of the noiseless mean `v`.
pub fn fisher_numeric(cfg: &ArrayConfig, lens: &LensConfig, params: &SignalParams) -> FisherMatrix {
    let p = params.amplitude();
    let b = params.phase();
    let doa = params.doa();
    let steps = [1e-6 * p.max(1.0), 1e-6, 1e-6];

    let mean_at = |theta: [f64; 3]| {
        // build without SignalParams validation; the phase need not stay wrapped here
        let shifted = SignalParams::new(theta[0], 0.0, theta[2], params.noise_variance())
            .expect("finite-difference stencil stays inside the valid domain")
            .with_lens_phase(params.lens_phase() + theta[1]);
        signal_mean(cfg, lens, &shifted)
    };

    let theta = [p, b, doa];
    let grads: Vec<Vec<Complex64>> = (0..3)
        .map(|i| {
            let mut plus = theta;
            let mut minus = theta;
            plus[i] += steps[i];
            minus[i] -= steps[i];
            let vp = mean_at(plus);
            let vm = mean_at(minus);
            vp.iter().zip(&vm).map(|(a, b)| (a - b) / (2.0 * steps[i])).collect()
        })
        .collect();

    let mut entries = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let inner: Complex64 = grads[i].iter().zip(&grads[j]).map(|(x, y)| x.conj() * y).sum();
            let value = 2.0 / params.noise_variance() * inner.re;
            entries[i][j] = value;
            entries[j][i] = value;
        }
    }
    FisherMatrix { entries }
}

/// Closed-form determinant of the Fisher matrix,
/// `(8 p^4 / sigma_n^6) D (D D2 - D1^2) [4(N-1)^2/(pi^2 sigma_c^4) + k^2 d^2 cos^2 phi]`.
///
/// The factor is written here as `D D2 - D1^2`, which is positive; the
/// opposite ordering `D1^2 - D D2` would give the negative of the assembled
/// determinant of a positive definite matrix.
pub fn fisher_determinant_closed(cfg: &ArrayConfig, lens: &LensConfig, params: &SignalParams) -> f64 {
    let doa = params.doa();
    let p2 = params.amplitude() * params.amplitude();
    let noise = params.noise_variance();
    let m = d_moments(cfg, lens, doa);
    let margin = positivity_margin(cfg, lens, doa);
    8.0 * p2 * p2 / (noise * noise * noise) * m.d0 * margin * (lens_rate(cfg, lens) + phase_rate(cfg, doa))
}

/// Lens bound `D_frac sigma_n^2 / (2 p^2 [4(N-1)^2/(pi^2 sigma_c^4) + k^2 d^2 cos^2 phi])`,
/// the `(phi, phi)` entry of the inverse Fisher matrix with `p` and `b`
/// treated as nuisance parameters.
pub fn crlb_lens(cfg: &ArrayConfig, lens: &LensConfig, params: &SignalParams) -> Result<f64> {
    let doa = params.doa();
    check_doa(doa)?;
    let m = d_moments(cfg, lens, doa);
    let p2 = params.amplitude() * params.amplitude();
    Ok(m.d_frac * params.noise_variance() / (2.0 * p2 * (lens_rate(cfg, lens) + phase_rate(cfg, doa))))
}

/// Bare-array bound `6 sigma_n^2 / (p^2 N (N^2 - 1) k^2 d^2 cos^2 phi)`.
pub fn crlb_ula(cfg: &ArrayConfig, params: &SignalParams) -> Result<f64> {
    let doa = params.doa();
    check_doa(doa)?;
    let n = cfg.n_elements() as f64;
    let p2 = params.amplitude() * params.amplitude();
    Ok(6.0 * params.noise_variance() / (p2 * n * (n * n - 1.0) * phase_rate(cfg, doa)))
}

/// Wide-lens approximation of [`crlb_lens`]: with `D ~ N`, `D1 ~ 0`,
/// `D2 ~ N (N^2 - 1) / 12` and a vanishing taper term it coincides with
/// [`crlb_ula`].
pub fn crlb_lens_large_sigma(cfg: &ArrayConfig, params: &SignalParams) -> Result<f64> {
    crlb_ula(cfg, params)
}

/// `[J^-1]_{phi, phi}` by explicit inversion.
pub fn crlb_from_fisher(j: &FisherMatrix) -> Option<f64> {
    j.inverse().map(|inv| inv[2][2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::array_model::PhiSupport;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    struct Draw {
        cfg: ArrayConfig,
        lens: LensConfig,
        params: SignalParams,
    }

    fn random_draw(rng: &mut ChaCha8Rng) -> Draw {
        let n = 2 * rng.random_range(1..=20) + 1;
        let cfg = ArrayConfig::new(n, rng.random_range(0.1..1.0)).unwrap();
        let sigma_c = 10f64.powf(rng.random_range(0.2f64.log10()..200f64.log10()));
        let lens = LensConfig::normalized(&cfg, sigma_c, PhiSupport::default()).unwrap();
        let snr_db: f64 = rng.random_range(-10.0..30.0);
        let amplitude = rng.random_range(0.5..2.0);
        let noise = amplitude * amplitude / 10f64.powf(snr_db / 10.0);
        let doa = rng.random_range(-75f64..75.0).to_radians();
        let params = SignalParams::new(amplitude, rng.random_range(-PI..PI), doa, noise)
            .unwrap()
            .with_lens_phase(rng.random_range(-PI..PI));
        Draw { cfg, lens, params }
    }

    fn cfg17() -> ArrayConfig {
        ArrayConfig::new(17, 0.5).unwrap()
    }

    /// 1e-9, widened to the rounding floor of an ill-conditioned assembly:
    /// entries good to a few hundred ulps, three per determinant term.
    fn assembly_tolerance(j: &FisherMatrix) -> f64 {
        (3.0 * 256.0 * f64::EPSILON * j.determinant_condition()).max(1e-9)
    }

    fn scaled_error(a: &FisherMatrix, b: &FisherMatrix) -> f64 {
        let mut worst: f64 = 0.0;
        for i in Param::ALL {
            for j in Param::ALL {
                let scale = (a.get(i, i) * a.get(j, j)).sqrt();
                worst = worst.max((a.get(i, j) - b.get(i, j)).abs() / scale);
            }
        }
        worst
    }

    #[test]
    fn d1_vanishes_at_broadside() {
        for sigma_c in [0.3, 1.0, 7.0, 150.0] {
            let cfg = ArrayConfig::new(11, 0.5).unwrap();
            let lens = LensConfig::normalized(&cfg, sigma_c, PhiSupport::default()).unwrap();
            let m = d_moments(&cfg, &lens, 0.0);
            assert!(m.d1.abs() <= 1e-14 * m.d0, "{m:?}");
            assert_relative_eq!(positivity_margin(&cfg, &lens, 0.0), m.d0 * m.d2, max_relative = 1e-12);
        }
    }

    #[test]
    fn three_element_moments() {
        let cfg = ArrayConfig::new(3, 0.5).unwrap();
        let lens = LensConfig::with_p_lens(1.0, 1.0, PhiSupport::default()).unwrap();
        let m = d_moments(&cfg, &lens, 0.0);
        let e2 = (-2.0f64).exp();
        assert_relative_eq!(m.d0, (1.0 + 2.0 * e2) / (2.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(m.d2, 2.0 * e2 / (2.0 * PI), max_relative = 1e-14);
        assert_relative_eq!(m.d_frac, m.d0 / (m.d0 * m.d2 - m.d1 * m.d1), max_relative = 1e-12);
    }

    #[test]
    fn wide_lens_moments_approach_bare_array() {
        let cfg = cfg17();
        let lens = LensConfig::normalized(&cfg, 100.0, PhiSupport::default()).unwrap();
        let m = d_moments(&cfg, &lens, 0.0);
        assert_relative_eq!(m.d0, 17.0, max_relative = 0.02);
        assert_relative_eq!(m.d2, 408.0, max_relative = 0.02);
    }

    #[test]
    fn appendix_three_element_identity() {
        let cfg = ArrayConfig::new(3, 0.5).unwrap();
        for &(sigma_c, doa) in &[(0.7, 0.3), (2.0, -1.1), (0.25, 0.05), (9.0, 1.4)] {
            // p_lens chosen so every weight is the bare exponential a_k
            let lens = LensConfig::with_p_lens(sigma_c, 2.0 * PI * sigma_c * sigma_c, PhiSupport::default()).unwrap();
            let m = cfg.lens_shift(doa);
            let a = |k: f64| (-2.0 * (k + m) * (k + m) / (sigma_c * sigma_c)).exp();
            let expected = 4.0 * a(-1.0) * a(1.0) + a(-1.0) * a(0.0) + a(0.0) * a(1.0);
            assert_relative_eq!(positivity_margin(&cfg, &lens, doa), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn amplitude_phase_entry_is_exactly_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let d = random_draw(&mut rng);
            let j = fisher_matrix(&d.cfg, &d.lens, &d.params);
            assert_eq!(j.get(Param::Amplitude, Param::Phase), 0.0);
            assert_eq!(j.get(Param::Phase, Param::Amplitude), 0.0);
        }
    }

    #[test]
    fn wide_lens_amplitude_entry() {
        let cfg = ArrayConfig::new(3, 0.5).unwrap();
        let lens = LensConfig::normalized(&cfg, 1e4, PhiSupport::default()).unwrap();
        let params = SignalParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let j = fisher_matrix(&cfg, &lens, &params);
        assert_relative_eq!(j.get(Param::Amplitude, Param::Amplitude), 6.0, max_relative = 1e-3);
    }

    #[test]
    fn analytic_matches_numeric() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let d = random_draw(&mut rng);
            let a = fisher_matrix(&d.cfg, &d.lens, &d.params);
            let n = fisher_numeric(&d.cfg, &d.lens, &d.params);
            let err = scaled_error(&a, &n);
            assert!(err < 1e-6, "err {err} for {:?} {:?} {:?}", d.cfg, d.lens, d.params);
        }
    }

    #[test]
    fn flipped_cross_term_is_detected() {
        let cfg = cfg17();
        let lens = LensConfig::normalized(&cfg, 2.0, PhiSupport::default()).unwrap();
        // near the array edge the truncated taper gives a sizeable (phi, p) coupling
        let params = SignalParams::new(1.0, 0.2, 1.2, 0.1).unwrap();
        let mut a = fisher_matrix(&cfg, &lens, &params);
        let v = a.get(Param::Doa, Param::Amplitude);
        a.set(Param::Doa, Param::Amplitude, -v);
        a.set(Param::Amplitude, Param::Doa, -v);
        let n = fisher_numeric(&cfg, &lens, &params);
        assert!(scaled_error(&a, &n) > 1e-3);
    }

    #[test]
    fn numeric_phase_doa_entry_vanishes_at_broadside() {
        let cfg = cfg17();
        let lens = LensConfig::normalized(&cfg, 2.0, PhiSupport::default()).unwrap();
        let params = SignalParams::new(1.3, 0.4, 0.0, 0.5).unwrap();
        let n = fisher_numeric(&cfg, &lens, &params);
        let scale = (n.get(Param::Phase, Param::Phase) * n.get(Param::Doa, Param::Doa)).sqrt();
        assert!(n.get(Param::Phase, Param::Doa).abs() < 1e-8 * scale);
    }

    #[test]
    fn numeric_amplitude_scaling() {
        let cfg = cfg17();
        let lens = LensConfig::normalized(&cfg, 3.0, PhiSupport::default()).unwrap();
        let one = SignalParams::new(1.0, 0.1, 0.3, 0.2).unwrap();
        let two = one.with_amplitude(2.0).unwrap();
        let j1 = fisher_numeric(&cfg, &lens, &one);
        let j2 = fisher_numeric(&cfg, &lens, &two);
        let pp = (Param::Amplitude, Param::Amplitude);
        assert_relative_eq!(j2.get(pp.0, pp.1), j1.get(pp.0, pp.1), max_relative = 1e-8);
        for q in [Param::Phase, Param::Doa] {
            assert_relative_eq!(j2.get(q, q), 4.0 * j1.get(q, q), max_relative = 1e-8);
        }
    }

    #[test]
    fn determinant_identity_and_scaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let d = random_draw(&mut rng);
            let j = fisher_matrix(&d.cfg, &d.lens, &d.params);
            let closed = fisher_determinant_closed(&d.cfg, &d.lens, &d.params);
            assert!(closed > 0.0);
            let tol = assembly_tolerance(&j);
            assert!((closed - j.determinant()).abs() <= tol * closed, "tol {tol}");
        }
        let cfg = cfg17();
        let lens = LensConfig::normalized(&cfg, 2.0, PhiSupport::default()).unwrap();
        let base = SignalParams::new(1.0, 0.0, 0.2, 0.3).unwrap();
        let d0 = fisher_determinant_closed(&cfg, &lens, &base);
        let doubled_p = fisher_determinant_closed(&cfg, &lens, &base.with_amplitude(2.0).unwrap());
        let doubled_noise = fisher_determinant_closed(&cfg, &lens, &base.with_noise_variance(0.6).unwrap());
        assert_relative_eq!(doubled_p, 16.0 * d0, max_relative = 1e-12);
        assert_relative_eq!(doubled_noise, d0 / 8.0, max_relative = 1e-12);
    }

    #[test]
    fn lens_bound_is_inverse_entry() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let d = random_draw(&mut rng);
            let j = fisher_matrix(&d.cfg, &d.lens, &d.params);
            let inv = crlb_from_fisher(&j).unwrap();
            let closed = crlb_lens(&d.cfg, &d.lens, &d.params).unwrap();
            let tol = assembly_tolerance(&j);
            assert!((closed - inv).abs() <= tol * closed, "tol {tol}");
        }
    }

    #[test]
    fn ula_reference_values() {
        // kd = 1 needs spacing 1/(2 pi)
        let cfg = ArrayConfig::new(3, 1.0 / (2.0 * PI)).unwrap();
        let params = SignalParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(crlb_ula(&cfg, &params).unwrap(), 0.25, max_relative = 1e-14);
        let cfg5 = ArrayConfig::new(5, 1.0 / (2.0 * PI)).unwrap();
        assert_relative_eq!(crlb_ula(&cfg5, &params).unwrap(), 0.05, max_relative = 1e-14);
    }

    #[test]
    fn ula_matches_numeric_fisher_with_identity_taper() {
        // the bare array is the lens model with A = I: zero taper slope and unit amplitude
        for n in [3usize, 5, 9] {
            let cfg = ArrayConfig::new(n, 1.0 / (2.0 * PI)).unwrap();
            let params = SignalParams::new(1.0, 0.0, 0.25, 1.0).unwrap();
            let s = steering_vector(&cfg, 0.25).unwrap();
            let s1 = steering_derivative(&cfg, 0.25).unwrap();
            let grads = [s.clone(), s.iter().map(|z| Complex64::i() * z).collect::<Vec<_>>(), s1];
            let mut j = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    let inner: Complex64 = grads[a].iter().zip(&grads[b]).map(|(x, y)| x.conj() * y).sum();
                    j[a][b] = 2.0 * inner.re;
                }
            }
            let oracle = inverse3(&j).unwrap()[2][2];
            assert_relative_eq!(crlb_ula(&cfg, &params).unwrap(), oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn ula_grows_toward_endfire() {
        let cfg = cfg17();
        let mut last = 0.0;
        for k in 0..60 {
            let doa = k as f64 * 0.026;
            let params = SignalParams::new(1.0, 0.0, doa, 1.0).unwrap();
            let v = crlb_ula(&cfg, &params).unwrap();
            assert!(v > last);
            last = v;
        }
        let near_endfire = SignalParams::new(1.0, 0.0, PI / 2.0 - 1e-9, 1.0).unwrap();
        assert!(crlb_ula(&cfg, &near_endfire).unwrap() > 1e12);
    }

    #[test]
    fn large_sigma_approximation() {
        let cfg = cfg17();
        let params = SignalParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
        let approx = crlb_lens_large_sigma(&cfg, &params).unwrap();
        assert_eq!(approx, crlb_ula(&cfg, &params).unwrap());
        let wide = LensConfig::normalized(&cfg, 1e4, PhiSupport::default()).unwrap();
        assert_relative_eq!(crlb_lens(&cfg, &wide, &params).unwrap(), approx, max_relative = 1e-4);

        // a sigma_c = 10 lens departs from the bare array somewhere on the grid
        let mid = LensConfig::normalized(&cfg, 10.0, PhiSupport::default()).unwrap();
        let worst = (0..121)
            .map(|k| {
                let doa = (-60.0 + k as f64).to_radians();
                let p = params.with_doa(doa).unwrap();
                (crlb_lens(&cfg, &mid, &p).unwrap() / crlb_ula(&cfg, &p).unwrap() - 1.0).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst > 0.1, "worst {worst}");
    }

    #[test]
    fn identity_helpers() {
        let m = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let inv = inverse3(&m).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| m[i][k] * inv[k][j]).sum();
                assert_relative_eq!(v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        assert!(inverse3(&[[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]]).is_none());
        assert!(
            !FisherMatrix::from_entries([[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).is_positive_definite()
        );
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn setup() -> impl Strategy<Value = (ArrayConfig, LensConfig, SignalParams)> {
            (
                1usize..=20,
                0.1f64..1.0,
                -0.7f64..2.3,
                -1.4f64..1.4,
                0.3f64..3.0,
                -PI..PI,
                1e-3f64..10.0,
            )
                .prop_map(|(h, d, log_sigma, doa, p, b, noise)| {
                    let cfg = ArrayConfig::new(2 * h + 1, d).unwrap();
                    let lens = LensConfig::normalized(&cfg, 10f64.powf(log_sigma), PhiSupport::default()).unwrap();
                    let params = SignalParams::new(p, b, doa, noise).unwrap();
                    (cfg, lens, params)
                })
        }

        proptest! {
            #[test]
            fn fisher_is_symmetric_positive_definite((cfg, lens, params) in setup()) {
                let j = fisher_matrix(&cfg, &lens, &params);
                prop_assert!(j.is_symmetric(1e-12));
                // Sylvester with the closed-form determinant when Cholesky
                // loses the last pivot to rounding.
                let closed = fisher_determinant_closed(&cfg, &lens, &params);
                let within = (j.determinant() - closed).abs() <= assembly_tolerance(&j) * closed;
                prop_assert!(j.is_positive_definite() || (closed > 0.0 && within));
                let minor = j.get(Param::Amplitude, Param::Amplitude) * j.get(Param::Phase, Param::Phase)
                    - j.get(Param::Amplitude, Param::Phase).powi(2);
                prop_assert!(minor > 0.0);
                for q in Param::ALL {
                    prop_assert!(j.get(q, q) > 0.0);
                }
            }

            #[test]
            fn bounds_are_even_in_doa((cfg, lens, params) in setup()) {
                let mirrored = params.with_doa(-params.doa()).unwrap();
                let a = crlb_lens(&cfg, &lens, &params).unwrap();
                let b = crlb_lens(&cfg, &lens, &mirrored).unwrap();
                prop_assert!((a - b).abs() <= 1e-9 * a);
                let u = crlb_ula(&cfg, &params).unwrap();
                let v = crlb_ula(&cfg, &mirrored).unwrap();
                prop_assert!((u - v).abs() <= 1e-12 * u);
            }

            #[test]
            fn bounds_ignore_lens_phase((cfg, lens, params) in setup(), f in -PI..PI) {
                let shifted = params.with_lens_phase(f);
                let a = crlb_lens(&cfg, &lens, &params).unwrap();
                prop_assert_eq!(a, crlb_lens(&cfg, &lens, &shifted).unwrap());
                let ja = fisher_matrix(&cfg, &lens, &params);
                let jb = fisher_matrix(&cfg, &lens, &shifted);
                prop_assert_eq!(ja, jb);
                let na = fisher_numeric(&cfg, &lens, &params);
                let nb = fisher_numeric(&cfg, &lens, &shifted);
                prop_assert!(scaled_error(&na, &nb) < 1e-6);
            }

            #[test]
            fn bounds_scale_with_noise_and_amplitude((cfg, lens, params) in setup(), k in 0.2f64..5.0) {
                let base = crlb_lens(&cfg, &lens, &params).unwrap();
                let noisier = params.with_noise_variance(params.noise_variance() * k).unwrap();
                let louder = params.with_amplitude(params.amplitude() * k).unwrap();
                prop_assert!((crlb_lens(&cfg, &lens, &noisier).unwrap() - k * base).abs() <= 1e-12 * k * base);
                prop_assert!((crlb_lens(&cfg, &lens, &louder).unwrap() - base / (k * k)).abs() <= 1e-12 * base / (k * k));
                let ula = crlb_ula(&cfg, &params).unwrap();
                prop_assert!((crlb_ula(&cfg, &noisier).unwrap() - k * ula).abs() <= 1e-12 * k * ula);
                prop_assert!((crlb_ula(&cfg, &louder).unwrap() - ula / (k * k)).abs() <= 1e-12 * ula / (k * k));
            }

            #[test]
            fn margin_positive(h in 1usize..=20, log_sigma in -0.7f64..2.3, doa in -1.57f64..1.57) {
                let cfg = ArrayConfig::new(2 * h + 1, 0.5).unwrap();
                let lens = LensConfig::normalized(&cfg, 10f64.powf(log_sigma), PhiSupport::default()).unwrap();
                prop_assert!(positivity_margin(&cfg, &lens, doa) > 0.0);
            }
        }
    }
}
