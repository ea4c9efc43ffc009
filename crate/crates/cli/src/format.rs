/// Formats `x` with 12 significant digits in the style of C's `%.12g`:
/// fixed notation for exponents in `[-5, 12)`, scientific otherwise, trailing
/// zeros removed.
pub fn sig12(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_values() {
        assert_eq!(sig12(0.0), "0");
        assert_eq!(sig12(-60.0), "-60");
        assert_eq!(sig12(1.0 / 1.96), "0.510204081633");
        assert_eq!(sig12(1.241681172087473e-4), "0.000124168117209");
        assert_eq!(sig12(1.5e-7), "1.5e-07");
        assert_eq!(sig12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(sig12(408.0), "408");
        assert_eq!(sig12(-2.5e-300), "-2.5e-300");
    }

    proptest! {
        #[test]
        fn keeps_twelve_digits_and_is_idempotent(m in -10.0f64..10.0, e in -300i32..300) {
            let x = m * 10f64.powi(e);
            let text = sig12(x);
            let back: f64 = text.parse().unwrap();
            prop_assert!((back - x).abs() <= 5.0001e-12 * x.abs());
            prop_assert_eq!(sig12(back), text);
        }
    }
}
