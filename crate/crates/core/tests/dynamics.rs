use epsent_core::dynamics::*;
use proptest::prelude::*;

fn maps() -> Vec<MapSpec> {
    vec![
        MapSpec::logistic(4.0).unwrap(),
        MapSpec::logistic(3.7).unwrap(),
        MapSpec::doubling(),
        MapSpec::tent(),
    ]
}

fn boundaries() -> [Boundary; 3] {
    [Boundary::Clamp, Boundary::Reflect, Boundary::Wrap]
}

#[test]
fn spec_orbits() {
    let o = generate_orbit(&MapSpec::doubling(), 0.3, 3, &NoiseSpec::none(0)).unwrap();
    assert!((o.points[0] - 0.3).abs() < 1e-15);
    assert!((o.points[1] - 0.6).abs() < 1e-15);
    assert!((o.points[2] - 0.2).abs() < 1e-15);
    let l = MapSpec::logistic(4.0).unwrap();
    let o = generate_orbit(&l, 0.5, 3, &NoiseSpec::dynamical(0.0, Boundary::Clamp, 1)).unwrap();
    assert_eq!(o.points, vec![0.5, 1.0, 0.0]);
    let o = generate_orbit(
        &l,
        0.2,
        10_000,
        &NoiseSpec::dynamical(0.01, Boundary::Clamp, 1),
    )
    .unwrap();
    assert!(o.points.iter().all(|x| (0.0..=1.0).contains(x)));
    assert_eq!(o.len(), 10_000);
}

#[test]
fn noise_sample_statistics() {
    let s = sample_noise(&NoiseSpec::dynamical(0.1, Boundary::Wrap, 5), 1_000_000);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    assert!(mean.abs() < 3.0 * (0.1 / 3f64.sqrt()) / 1e3, "{mean}");
    assert!(s.iter().all(|w| (-0.1..=0.1).contains(w)));
    assert_eq!(sample_noise(&NoiseSpec::none(5), 5), vec![0.0; 5]);
}

#[test]
fn invalid_inputs() {
    let l = MapSpec::logistic(4.0).unwrap();
    assert!(iterate_map(&l, 1.5).is_err());
    assert!(iterate_map(&l, -0.1).is_err());
    assert!(generate_orbit(&l, 2.0, 10, &NoiseSpec::none(0)).is_err());
    assert!(generate_orbit(&l, 0.2, 0, &NoiseSpec::none(0)).is_err());
    assert!(generate_orbit(&l, 0.2, 10, &NoiseSpec::dynamical(-0.1, Boundary::Wrap, 0)).is_err());
    assert!(MapSpec::logistic(4.5).is_err());
    assert!(MapSpec::logistic(0.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_sigma_matches_unperturbed(x0 in 0.0f64..=1.0, seed: u64, m in 0usize..4, len in 1usize..500) {
        let map = maps()[m];
        let clean = generate_orbit(&map, x0, len, &NoiseSpec::none(seed)).unwrap();
        for b in boundaries() {
            for noise in [NoiseSpec::dynamical(0.0, b, seed), NoiseSpec::output(0.0, b, seed)] {
                let o = generate_orbit(&map, x0, len, &noise).unwrap();
                prop_assert_eq!(&o.points, &clean.points);
            }
        }
    }

    #[test]
    fn boundary_closure(x0 in 0.0f64..=1.0, seed: u64, sigma in 0.0f64..2.0, m in 0usize..4,
                        b in 0usize..3, output: bool) {
        let map = maps()[m];
        let boundary = boundaries()[b];
        let noise = if output {
            NoiseSpec::output(sigma, boundary, seed)
        } else {
            NoiseSpec::dynamical(sigma, boundary, seed)
        };
        let o = generate_orbit(&map, x0, 300, &noise).unwrap();
        prop_assert!(o.points.iter().all(|x| (0.0..=1.0).contains(x)));
    }

    #[test]
    fn deterministic_in_seed(x0 in 0.0f64..=1.0, seed: u64, sigma in 0.0f64..0.5) {
        let map = MapSpec::logistic(4.0).unwrap();
        let noise = NoiseSpec::dynamical(sigma, Boundary::Wrap, seed);
        let a = generate_orbit(&map, x0, 200, &noise).unwrap();
        let b = generate_orbit(&map, x0, 200, &noise).unwrap();
        prop_assert_eq!(a.points, b.points);
    }

    #[test]
    fn output_noise_is_within_sigma_of_clean_orbit(x0 in 0.0f64..=1.0, seed: u64, sigma in 0.0f64..0.3) {
        // With clamp, the emitted point can only move toward the clean one.
        let map = MapSpec::logistic(3.9).unwrap();
        let clean = generate_orbit(&map, x0, 200, &NoiseSpec::none(seed)).unwrap();
        let noisy = generate_orbit(&map, x0, 200, &NoiseSpec::output(sigma, Boundary::Clamp, seed)).unwrap();
        for (c, n) in clean.points.iter().zip(&noisy.points) {
            prop_assert!((c - n).abs() <= sigma + 1e-15);
        }
    }

    #[test]
    fn boundary_policies_fold_into_unit_interval(y in -3.0f64..4.0) {
        for b in boundaries() {
            let z = b.apply(y);
            prop_assert!((0.0..=1.0).contains(&z));
            if (0.0..=1.0).contains(&y) {
                prop_assert_eq!(z, y);
            }
        }
        let w = Boundary::Wrap.apply(y);
        prop_assert!(((y - w) - (y - w).round()).abs() < 1e-12);
    }
}

#[test]
fn dump_has_seventeen_digits() {
    let o = generate_orbit(
        &MapSpec::logistic(4.0).unwrap(),
        0.1,
        4,
        &NoiseSpec::none(0),
    )
    .unwrap();
    let mut buf = Vec::new();
    o.write_dump(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    for (line, x) in lines.iter().zip(&o.points) {
        let mantissa = line.split('e').next().unwrap().replace(['-', '.'], "");
        assert_eq!(mantissa.len(), 17, "{line}");
        assert_eq!(line.parse::<f64>().unwrap(), *x);
    }
}
