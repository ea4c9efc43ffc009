//! Fixed-order Gauss-Legendre rule on [-1, 1].

use std::f64::consts::PI;
use std::sync::OnceLock;

pub(crate) const GAUSS_LEGENDRE_ORDER: usize = 256;

/// Nodes and weights of the 256-point rule, computed once by Newton iteration
/// on P_n starting from the Chebyshev-like initial guesses.
pub(crate) fn gauss_legendre() -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    RULE.get_or_init(|| legendre_rule(GAUSS_LEGENDRE_ORDER))
}

fn legendre_rule(n: usize) -> Vec<(f64, f64)> {
    let mut rule = vec![(0.0, 0.0); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            deriv = dp;
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        if dp != 0.0 {
            deriv = dp;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        rule[i] = (-x, w);
        rule[n - 1 - i] = (x, w);
    }
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Integrates `f` over `[lo, hi]`.
pub(crate) fn integrate<F: Fn(f64) -> f64>(lo: f64, hi: f64, f: F) -> f64 {
    let half = 0.5 * (hi - lo);
    let mid = 0.5 * (hi + lo);
    gauss_legendre()
        .iter()
        .map(|&(x, w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let total: f64 = gauss_legendre().iter().map(|&(_, w)| w).sum();
        assert!((total - 2.0).abs() < 1e-13, "{total}");
    }

    #[test]
    fn nodes_are_sorted_and_symmetric() {
        let rule = gauss_legendre();
        assert!(rule.windows(2).all(|w| w[0].0 < w[1].0));
        for i in 0..rule.len() {
            let j = rule.len() - 1 - i;
            assert_eq!(rule[i].0, -rule[j].0);
        }
    }

    #[test]
    fn exact_on_high_degree_polynomials() {
        // x^100 over [-1, 1] integrates to 2/101.
        let v = integrate(-1.0, 1.0, |x| x.powi(100));
        assert!((v - 2.0 / 101.0).abs() < 1e-14);
        let c = integrate(0.0, PI, f64::sin);
        assert!((c - 2.0).abs() < 1e-13);
    }
}
