//! Randomized invariant suite behind the `check` subcommand.
//!
//! Every draw is generated up front from a single seeded ChaCha stream, so a
//! report depends only on the seed and draw counts.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use lens_crlb::fisher::{
    crlb_from_fisher, crlb_lens, crlb_ula, fisher_determinant_closed, fisher_matrix, fisher_numeric, positivity_margin,
};
use lens_crlb::{ArrayConfig, FisherMatrix, LensConfig, Param, PhiSupport, SignalParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Entrywise analytic-vs-finite-difference limit, relative to `sqrt(J_ii J_jj)`.
pub const NUMERIC_TOL: f64 = 1e-6;
/// Limit for identities between two analytic routes.
pub const IDENTITY_TOL: f64 = 1e-9;

/// Source of the analytic Fisher matrix under test; swappable so the suite
/// can be pointed at a deliberately broken implementation.
pub type FisherFn = dyn Fn(&ArrayConfig, &LensConfig, &SignalParams) -> FisherMatrix + Sync;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckOptions {
    pub seed: u64,
    pub draws: usize,
    pub positivity_draws: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            draws: 1000,
            positivity_draws: 10_000,
        }
    }
}

/// One randomized operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Draw {
    pub cfg: ArrayConfig,
    pub lens: LensConfig,
    pub params: SignalParams,
}

impl Draw {
    /// N odd in [3, 41], spacing in [0.1, 1) wavelengths, sigma_c log-uniform
    /// on [0.2, 200], phi in (-75, 75) degrees, per-element SNR in
    /// [-10, 30] dB, amplitude in [0.5, 2), phase and lens phase uniform.
    pub fn sample(rng: &mut ChaCha8Rng) -> Self {
        let n = 2 * rng.random_range(1..=20usize) + 1;
        let cfg = ArrayConfig::new(n, rng.random_range(0.1..1.0)).expect("valid array draw");
        let sigma_c = 10f64.powf(rng.random_range(0.2f64.log10()..=200f64.log10()));
        let lens = LensConfig::normalized(&cfg, sigma_c, PhiSupport::default()).expect("valid lens draw");
        let amplitude: f64 = rng.random_range(0.5..2.0);
        let snr_db: f64 = rng.random_range(-10.0..=30.0);
        let noise = amplitude * amplitude / 10f64.powf(snr_db / 10.0);
        let doa = rng.random_range(-75.0f64..75.0).to_radians();
        let phase = rng.random_range(-PI..PI);
        let params = SignalParams::new(amplitude, phase, doa, noise)
            .expect("valid signal draw")
            .with_lens_phase(rng.random_range(-PI..PI));
        Self { cfg, lens, params }
    }

    /// `count` draws from the stream seeded by `seed`.
    pub fn batch(seed: u64, count: usize) -> Vec<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count).map(|_| Self::sample(&mut rng)).collect()
    }
}

impl fmt::Display for Draw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} spacing={:e} sigma_c={:e} p_lens={:e} p={:e} b={:e} f={:e} phi={:e} noise_variance={:e}",
            self.cfg.n_elements(),
            self.cfg.spacing_wavelengths(),
            self.lens.sigma_c(),
            self.lens.p_lens(),
            self.params.amplitude(),
            self.params.phase(),
            self.params.lens_phase(),
            self.params.doa(),
            self.params.noise_variance()
        )
    }
}

/// Largest entrywise gap between two Fisher matrices, each entry scaled by
/// `sqrt(J_ii J_jj)` of the first so that structurally zero entries are
/// judged against the matrix scale instead of themselves.
pub fn scaled_entry_error(reference: &FisherMatrix, other: &FisherMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in Param::ALL {
        for j in Param::ALL {
            let scale = (reference.get(i, i) * reference.get(j, j)).abs().sqrt();
            let gap = (reference.get(i, j) - other.get(i, j)).abs() / scale;
            worst = worst.max(if gap.is_nan() { f64::INFINITY } else { gap });
        }
    }
    worst
}

/// Accuracy of a single assembled entry, in ulps. Taper weights come from
/// exponentials with arguments in the tens to hundreds for narrow lenses,
/// and the argument's own rounding is amplified by that magnitude.
pub const ENTRY_ULPS: f64 = 256.0;

/// Tolerance for comparing a closed form against a quantity derived from
/// the assembled f64 matrix: [`IDENTITY_TOL`], widened to the first-order
/// rounding band `3 ENTRY_ULPS eps cond(J)` when the assembly is
/// ill-conditioned.
pub fn assembly_tolerance(j: &FisherMatrix) -> f64 {
    (3.0 * ENTRY_ULPS * f64::EPSILON * j.determinant_condition()).max(IDENTITY_TOL)
}

fn relative_gap(reference: f64, value: f64) -> f64 {
    let gap = (reference - value).abs() / reference.abs();
    if gap.is_nan() {
        f64::INFINITY
    } else {
        gap
    }
}

/// Cholesky on the assembled matrix, falling back to Sylvester's criterion
/// with the closed-form determinant when the assembled one sits inside its
/// own rounding band (near-collinear amplitude and angle derivatives).
fn definite(j: &FisherMatrix, d: &Draw) -> bool {
    if j.is_positive_definite() {
        return true;
    }
    let closed = fisher_determinant_closed(&d.cfg, &d.lens, &d.params);
    let minor = j.get(Param::Amplitude, Param::Amplitude) * j.get(Param::Phase, Param::Phase)
        - j.get(Param::Amplitude, Param::Phase).powi(2);
    j.get(Param::Amplitude, Param::Amplitude) > 0.0
        && minor > 0.0
        && closed > 0.0
        && relative_gap(closed, j.determinant()) <= assembly_tolerance(j)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Largest observed error, in units of the per-case limit.
    pub worst_ratio: f64,
    pub first_failure: Option<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub options: CheckOptions,
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::passed)
    }

    pub fn summary(&self) -> String {
        let mut out = format!(
            "invariant suite: seed {}, {} draws, {} positivity draws\n",
            self.options.seed, self.options.draws, self.options.positivity_draws
        );
        for o in &self.outcomes {
            out.push_str(&format!(
                "{} {:<34} {:>6} cases  {:>4} failures  worst/limit {:.3e}\n",
                if o.passed() { "PASS" } else { "FAIL" },
                o.name,
                o.cases,
                o.failures,
                o.worst_ratio
            ));
            if let Some(first) = &o.first_failure {
                out.push_str(&format!("     first failure: {first}\n"));
            }
        }
        out.push_str(if self.passed() {
            "result: PASS\n"
        } else {
            "result: FAIL\n"
        });
        out
    }
}

/// Evaluates `ratio` (error divided by its limit) on every item in parallel
/// and keeps the first failure in item order.
fn run_case<T, F>(name: &'static str, items: &[T], ratio: F) -> CheckOutcome
where
    T: Sync,
    F: Fn(&T) -> (f64, String) + Sync,
{
    let results: Vec<(f64, String)> = items.par_iter().map(&ratio).collect();
    let failures = results.iter().filter(|(r, _)| !(*r <= 1.0)).count();
    let worst_ratio = results
        .iter()
        .map(|(r, _)| if r.is_nan() { f64::INFINITY } else { *r })
        .fold(0.0, f64::max);
    let first_failure = results.into_iter().find(|(r, _)| !(*r <= 1.0)).map(|(_, msg)| msg);
    CheckOutcome {
        name,
        cases: items.len(),
        failures,
        worst_ratio,
        first_failure,
    }
}

pub fn run_check(options: CheckOptions) -> CheckReport {
    run_check_with(options, &fisher_matrix)
}

pub fn run_check_with(options: CheckOptions, analytic: &FisherFn) -> CheckReport {
    let draws = Draw::batch(options.seed, options.draws);
    let mut outcomes = Vec::new();

    outcomes.push(run_case("fisher analytic vs finite difference", &draws, |d| {
        let a = analytic(&d.cfg, &d.lens, &d.params);
        let n = fisher_numeric(&d.cfg, &d.lens, &d.params);
        let err = scaled_entry_error(&n, &a);
        let detail = format!("{d}\n     analytic {:?}\n     numeric  {:?}", a.entries(), n.entries());
        (err / NUMERIC_TOL, detail)
    }));

    outcomes.push(run_case("determinant closed form", &draws, |d| {
        let j = analytic(&d.cfg, &d.lens, &d.params);
        let closed = fisher_determinant_closed(&d.cfg, &d.lens, &d.params);
        let gap = relative_gap(closed, j.determinant());
        let detail = format!("{d}\n     closed {closed:e} assembled {:e}", j.determinant());
        (gap / assembly_tolerance(&j), detail)
    }));

    outcomes.push(run_case("lens bound vs inverse entry", &draws, |d| {
        let j = analytic(&d.cfg, &d.lens, &d.params);
        let closed = crlb_lens(&d.cfg, &d.lens, &d.params).unwrap_or(f64::NAN);
        let inv = crlb_from_fisher(&j).unwrap_or(f64::NAN);
        let detail = format!("{d}\n     closed {closed:e} inverse {inv:e}");
        let tol = assembly_tolerance(&j);
        // A singular assembly carries no digits to compare once rounding
        // swamps the determinant.
        let ratio = if inv.is_nan() && closed > 0.0 && tol >= 1.0 {
            0.0
        } else {
            relative_gap(closed, inv) / tol
        };
        (ratio, detail)
    }));

    outcomes.push(run_case("symmetry and definiteness", &draws, |d| {
        let j = analytic(&d.cfg, &d.lens, &d.params);
        let mirrored = d.params.with_doa(-d.params.doa()).expect("mirrored angle is valid");
        let lens_gap = relative_gap(
            crlb_lens(&d.cfg, &d.lens, &d.params).unwrap_or(f64::NAN),
            crlb_lens(&d.cfg, &d.lens, &mirrored).unwrap_or(f64::NAN),
        );
        let ula_gap = relative_gap(
            crlb_ula(&d.cfg, &d.params).unwrap_or(f64::NAN),
            crlb_ula(&d.cfg, &mirrored).unwrap_or(f64::NAN),
        );
        let structural = j.is_symmetric(1e-12) && definite(&j, d);
        let ratio = if structural {
            lens_gap.max(ula_gap) / IDENTITY_TOL
        } else {
            f64::INFINITY
        };
        (ratio, format!("{d}\n     J {:?}", j.entries()))
    }));

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed ^ 0x5eed_0fa9_9ed1_c500);
    let margin_draws: Vec<(ArrayConfig, LensConfig, f64)> = (0..options.positivity_draws)
        .map(|_| {
            let n = 2 * rng.random_range(1..=20usize) + 1;
            let cfg = ArrayConfig::new(n, 0.5).expect("valid array draw");
            let sigma_c = 10f64.powf(rng.random_range(0.2f64.log10()..=200f64.log10()));
            let lens = LensConfig::normalized(&cfg, sigma_c, PhiSupport::default()).expect("valid lens draw");
            let doa = rng.random_range(-FRAC_PI_2..FRAC_PI_2);
            (cfg, lens, doa)
        })
        .collect();
    outcomes.push(run_case("positivity margin", &margin_draws, |(cfg, lens, doa)| {
        let margin = positivity_margin(cfg, lens, *doa);
        let ratio = if margin > 0.0 && margin.is_finite() {
            0.0
        } else {
            f64::INFINITY
        };
        let detail = format!(
            "N={} sigma_c={:e} phi={doa:e} margin={margin:e}",
            cfg.n_elements(),
            lens.sigma_c()
        );
        (ratio, detail)
    }));

    CheckReport { options, outcomes }
}
