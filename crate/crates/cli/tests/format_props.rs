use gauss_share_cli::output::{real, SIGNIFICANT_DIGITS};
use proptest::prelude::*;

proptest! {
    #[test]
    fn reals_round_trip_at_twelve_digits(x in prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL) {
        let s = real(x);
        let back: f64 = s.parse().unwrap();
        // Re-emitting the parsed value is a fixed point.
        prop_assert_eq!(real(back), s.clone());
        let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
        prop_assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), SIGNIFICANT_DIGITS);
        if x != 0.0 && x.is_normal() {
            prop_assert!((back - x).abs() <= 5e-12 * x.abs());
        }
    }
}

#[test]
fn non_finite_values() {
    assert_eq!(real(f64::INFINITY), "inf");
    assert_eq!(real(f64::NEG_INFINITY), "-inf");
    assert!(real(f64::NAN).parse::<f64>().unwrap().is_nan());
}
