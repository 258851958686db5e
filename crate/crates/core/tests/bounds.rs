use epsent_core::bounds::*;
use epsent_core::Error;
use proptest::prelude::*;

fn h(p: f64) -> f64 {
    if p == 0.0 || p == 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

#[test]
fn closed_forms() {
    // sigma / eps = 7.5 rounds up to 8 jumps each way.
    let v = output_noise_upper(0.7, 0.2, 0.3, 0.04).unwrap();
    assert!((v - (0.7 + 0.2 * 16f64.log2() + h(0.2))).abs() < 1e-12);
    // An exact ratio is not pushed up a step by rounding.
    let v = output_noise_upper(0.0, 0.5, 0.3, 0.1).unwrap();
    assert!((v - (0.5 * 6f64.log2() + 1.0)).abs() < 1e-12);
    assert!((kifer_lower(0.25, 2.0).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn domain_errors() {
    assert!(matches!(
        output_noise_upper(1.0, 1.5, 0.1, 0.1),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        output_noise_upper(1.0, 0.1, -0.1, 0.1),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        output_noise_upper(1.0, 0.1, 0.1, 0.0),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        dynamical_noise_upper(1.0, 0.0, 0.1, 0.0, 0.1),
        Err(Error::Consistency(_))
    ));
    assert!(matches!(kifer_lower(0.0, 1.0), Err(Error::Domain(_))));
    assert!(matches!(kifer_lower(0.1, -1.0), Err(Error::Domain(_))));
}

#[test]
fn envelope_without_density_bound_has_no_lower_edge() {
    let b = envelope(1.0, 0.05, 0.0, 0.0, 0.1, 0.05, None).unwrap();
    assert_eq!(b.envelope_low, f64::NEG_INFINITY);
    assert!(b.is_ordered());
}

proptest! {
    #[test]
    fn upper_bounds_dominate_h_eps(
        h_eps in 0.0f64..8.0,
        delta in 0.0f64..0.5,
        p in 0.0f64..1.0,
        sigma in 1e-4f64..1.0,
        eps in 1e-3f64..1.0,
    ) {
        let o = output_noise_upper(h_eps, p, sigma, eps).unwrap();
        let d = dynamical_noise_upper(h_eps, delta, p, sigma, eps).unwrap();
        prop_assert!(o >= h_eps);
        prop_assert!(d >= o - 1e-12);
        prop_assert!((d - o - delta).abs() < 1e-9);
    }

    #[test]
    fn lower_bound_falls_with_eps(a in 1e-4f64..1.0, b in 1e-4f64..1.0, k in 0.5f64..100.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(kifer_lower(lo, k).unwrap() >= kifer_lower(hi, k).unwrap());
    }

    #[test]
    fn envelope_is_ordered_on_pure_noise(n in 2usize..250) {
        // sigma = 0.5 with wrap makes the symbols i.i.d. uniform: h = log2 N, p = 1 - 1/N.
        let eps = 1.0 / n as f64;
        let hn = (n as f64).log2();
        let b = envelope(hn, 0.0, 1.0 - eps, 0.5, eps, eps, Some(1.0)).unwrap();
        prop_assert!(b.is_ordered());
        prop_assert!((b.kifer_lower - hn).abs() < 1e-9);
    }
}
