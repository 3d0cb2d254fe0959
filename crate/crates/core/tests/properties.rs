//! Randomized invariants.

use proptest::prelude::*;
use twocenter::params::{potential_cartesian, potential_value, to_spheroidal};
use twocenter::run::{fmt_f64, from_csv, from_json};
use twocenter::specfun::{kummer_m, SeriesControl};
use twocenter::{fixtures, PhysicalConfig, SpheroidalPoint};

proptest! {
    #[test]
    fn spheroidal_round_trip(xi in 1.0f64..50.0, eta in -1.0f64..=1.0, r in 0.1f64..100.0) {
        let pt = SpheroidalPoint::new(xi, eta, 0.0);
        let (r1, r2) = pt.distances(r);
        let back = to_spheroidal(r1, r2, r).unwrap();
        prop_assert!((back.xi - xi).abs() <= 1e-12 * xi);
        prop_assert!((back.eta - eta).abs() <= 1e-12 * xi);
    }

    #[test]
    fn potential_forms_agree(
        xi in 1.001f64..30.0,
        eta in -0.999f64..0.999,
        z in 0.0f64..5.0,
        omega in 0.01f64..3.0,
        r in 0.1f64..40.0,
    ) {
        let config = PhysicalConfig::new(z, omega, r).unwrap();
        let pt = SpheroidalPoint::new(xi, eta, 0.0);
        let (r1, r2) = pt.distances(r);
        let direct = potential_cartesian(r1, r2, &config);
        let separable = potential_value(&pt, &config).unwrap();
        prop_assert!((separable - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
    }

    #[test]
    fn kummer_exponential(a in 0.05f64..20.0, x in 0.0f64..30.0) {
        let m = kummer_m(a, a, x, &SeriesControl::default()).unwrap();
        prop_assert!((m - x.exp()).abs() <= 1e-12 * x.exp());
    }

    #[test]
    fn kummer_recurrence(a in -4.0f64..4.0, b in 0.3f64..6.0, x in 0.0f64..10.0) {
        // (b − a) M(a − 1) + (2a − b + x) M(a) − a M(a + 1) = 0
        let ctl = SeriesControl::default();
        let m0 = kummer_m(a - 1.0, b, x, &ctl).unwrap();
        let m1 = kummer_m(a, b, x, &ctl).unwrap();
        let m2 = kummer_m(a + 1.0, b, x, &ctl).unwrap();
        let scale = ((b - a) * m0).abs() + ((2.0 * a - b + x) * m1).abs() + (a * m2).abs();
        let resid = (b - a) * m0 + (2.0 * a - b + x) * m1 - a * m2;
        prop_assert!(resid.abs() <= 1e-11 * scale.max(1e-300));
    }

    #[test]
    fn number_format_lossless(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(fmt_f64(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
    }

    #[test]
    fn parsers_do_not_panic(text in ".{0,400}") {
        let _ = fixtures::parse(&text);
        let _ = from_csv(&text);
        let _ = from_json(&text);
    }
}

const CSV_SEED: &str = include_str!("../../../fuzz/corpus/run_csv/both.csv");
const FIXTURE_SEED: &str = include_str!("../fixtures/oracle_fixtures.txt");

fn mutate(seed: &str, edits: &[(usize, u8)]) -> String {
    let mut bytes = seed.as_bytes().to_vec();
    for &(pos, b) in edits {
        let i = pos % bytes.len();
        bytes[i] = b"0123456789.,-+eE \n#naif"[b as usize % 23];
    }
    String::from_utf8(bytes).unwrap()
}

proptest! {
    #[test]
    fn mutated_csv_round_trips(edits in proptest::collection::vec((any::<usize>(), any::<u8>()), 1..6)) {
        let text = mutate(CSV_SEED, &edits);
        if let Ok(out) = from_csv(&text) {
            let rendered = twocenter::run::to_csv(&out);
            let again = from_csv(&rendered).unwrap();
            prop_assert_eq!(twocenter::run::to_csv(&again), rendered);
        }
    }

    #[test]
    fn mutated_fixtures_round_trip(edits in proptest::collection::vec((any::<usize>(), any::<u8>()), 1..6)) {
        let text = mutate(FIXTURE_SEED, &edits);
        if let Ok(fx) = fixtures::parse(&text) {
            let again = fixtures::parse(&fixtures::render(&fx, "x")).unwrap();
            prop_assert_eq!(fx.len(), again.len());
            for (a, b) in fx.iter().zip(&again) {
                prop_assert_eq!((a.z, a.omega, a.r, a.energy), (b.z, b.omega, b.r, b.energy));
            }
        }
    }
}
