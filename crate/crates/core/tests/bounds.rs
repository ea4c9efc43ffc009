use approx::assert_relative_eq;
use lens_crlb::fisher::{crlb_from_fisher, crlb_lens, crlb_ula, fisher_matrix, positivity_margin};
use lens_crlb::simulate::{ml_estimate, monte_carlo_variance, synthesize_snapshot};
use lens_crlb::{ArrayConfig, LensConfig, PhiSupport, SearchConfig, SignalParams};
use proptest::prelude::*;

fn setup(n: usize, spacing: f64, sigma_c: f64) -> (ArrayConfig, LensConfig) {
    let cfg = ArrayConfig::new(n, spacing).unwrap();
    let lens = LensConfig::normalized(&cfg, sigma_c, PhiSupport::default()).unwrap();
    (cfg, lens)
}

#[test]
fn ula_bound_closed_form() {
    let cfg = ArrayConfig::new(17, 0.5).unwrap();
    let s = SignalParams::new(1.0, 0.0, 0.0, 1.0).unwrap();
    let kd = std::f64::consts::PI;
    let expected = 6.0 / (17.0 * (17.0f64.powi(2) - 1.0) * kd * kd);
    assert_relative_eq!(crlb_ula(&cfg, &s).unwrap(), expected, max_relative = 1e-12);
}

#[test]
fn near_noiseless_pipeline_recovers_the_source() {
    let (cfg, lens) = setup(17, 0.5, 2.0);
    let truth = SignalParams::new(1.3, 0.4, 0.3, 1e-24).unwrap();
    let snap = synthesize_snapshot(&cfg, &lens, &truth, 11);
    let est = ml_estimate(&snap, &cfg, &lens, SearchConfig::default()).unwrap();
    assert!((est.doa - 0.3).abs() < 1e-6);
    assert_relative_eq!(est.amplitude, 1.3, max_relative = 1e-9);
    assert!((est.phase - 0.4).abs() < 1e-9);
}

#[test]
fn campaigns_repeat_bit_for_bit() {
    let (cfg, lens) = setup(9, 0.5, 2.0);
    let s = SignalParams::new(1.0, 0.0, 0.2, 0.05).unwrap();
    let a = monte_carlo_variance(&cfg, &lens, &s, 200, 42, SearchConfig::default()).unwrap();
    let b = monte_carlo_variance(&cfg, &lens, &s, 200, 42, SearchConfig::default()).unwrap();
    assert_eq!(a, b);
    assert!(a.doa_variance >= a.dominance_floor());
}

proptest! {
    #[test]
    fn bound_scales_with_noise_over_power(
        sigma_c in 1.0f64..50.0,
        doa in -1.0f64..1.0,
        amp in 0.2f64..5.0,
        noise in 0.01f64..10.0,
    ) {
        let (cfg, lens) = setup(11, 0.5, sigma_c);
        let unit = crlb_lens(&cfg, &lens, &SignalParams::new(1.0, 0.0, doa, 1.0).unwrap()).unwrap();
        let scaled = crlb_lens(&cfg, &lens, &SignalParams::new(amp, 0.0, doa, noise).unwrap()).unwrap();
        prop_assert!((scaled / (unit * noise / (amp * amp)) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bound_is_even_in_angle_and_blind_to_phases(
        sigma_c in 0.5f64..50.0,
        doa in -1.2f64..1.2,
        b in -3.0f64..3.0,
        f in -3.0f64..3.0,
    ) {
        let (cfg, lens) = setup(13, 0.5, sigma_c);
        let base = crlb_lens(&cfg, &lens, &SignalParams::new(1.0, 0.0, doa, 1.0).unwrap()).unwrap();
        let mirrored = crlb_lens(&cfg, &lens, &SignalParams::new(1.0, 0.0, -doa, 1.0).unwrap()).unwrap();
        let phased = SignalParams::new(1.0, b, doa, 1.0).unwrap().with_lens_phase(f);
        prop_assert!((mirrored / base - 1.0).abs() < 1e-10);
        prop_assert!((crlb_lens(&cfg, &lens, &phased).unwrap() / base - 1.0).abs() < 1e-10);
    }

    #[test]
    fn closed_form_matches_fisher_inverse_for_moderate_widths(
        sigma_c in 1.0f64..100.0,
        doa in -1.2f64..1.2,
        spacing in 0.2f64..1.0,
    ) {
        let (cfg, lens) = setup(15, spacing, sigma_c);
        let s = SignalParams::new(1.0, 0.0, doa, 1.0).unwrap();
        let closed = crlb_lens(&cfg, &lens, &s).unwrap();
        let inverse = crlb_from_fisher(&fisher_matrix(&cfg, &lens, &s)).unwrap();
        prop_assert!((inverse / closed - 1.0).abs() < 1e-8, "{inverse} vs {closed}");
        prop_assert!(positivity_margin(&cfg, &lens, doa) > 0.0);
    }
}
