//! Property tests against brute-force oracles.

use patrolsim_core::geodata::{distance_feet, point_in_polygon, BoundingBox, GridIndex, LatLon, Polygon};
use patrolsim_core::metrics::{bias_amplification_score, dir_from_rates, disparate_impact_ratio, gini, parity_gap, Dir, GroupRates};
use patrolsim_core::simulate::noisy_or_from_count;
use proptest::prelude::*;

fn gini_double_loop(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let total: f64 = x.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for a in x {
        for b in x {
            acc += (a - b).abs();
        }
    }
    acc / (2.0 * n * total)
}

fn baltimore_point() -> impl Strategy<Value = LatLon> {
    let b = BoundingBox::BALTIMORE;
    (b.lat_min..b.lat_max, b.lon_min..b.lon_max).prop_map(|(lat, lon)| LatLon::new(lat, lon))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn gini_matches_double_loop(x in prop::collection::vec(0.0f64..1.0, 1..8)) {
        let g = gini(&x);
        prop_assert!((g - gini_double_loop(&x)).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&g));
        // scale invariance
        let scaled: Vec<f64> = x.iter().map(|v| v * 7.5).collect();
        prop_assert!((gini(&scaled) - g).abs() < 1e-12);
    }

    #[test]
    fn equal_rates_are_fair(r in 0.001f64..1.0) {
        let rates = GroupRates::from_rates(Some(r), Some(r), Some(r));
        prop_assert_eq!(disparate_impact_ratio(&rates), Dir::Finite(1.0));
        prop_assert_eq!(parity_gap(&rates), Some(0.0));
        prop_assert!(gini(&rates.defined_rates()).abs() < 1e-15);
    }

    #[test]
    fn dir_and_gap_agree_in_sign(b in 0.0f64..1.0, w in 0.001f64..1.0, n in 0.0f64..1.0) {
        let rates = GroupRates::from_rates(Some(b), Some(w), Some(n));
        let dir = disparate_impact_ratio(&rates).finite().unwrap();
        let gap = parity_gap(&rates).unwrap();
        prop_assert!(dir >= 0.0);
        prop_assert_eq!(dir > 1.0, gap > 0.0);
        let bas = bias_amplification_score(gap, gini(&rates.defined_rates()));
        prop_assert!(bas == 0.0 || bas.signum() == gap.signum());
    }

    #[test]
    fn zero_white_rate_is_flagged(b in 0.0f64..1.0) {
        let d = dir_from_rates(Some(b), Some(0.0));
        if b > 0.0 {
            prop_assert_eq!(d, Dir::Infinite);
        } else {
            prop_assert_eq!(d, Dir::Undefined);
        }
    }

    #[test]
    fn noisy_or_is_monotone(k in 0usize..40, p in 0.0f64..=1.0) {
        let a = noisy_or_from_count(k, p);
        let b = noisy_or_from_count(k + 1, p);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn distance_is_a_metric(a in baltimore_point(), b in baltimore_point(), c in baltimore_point()) {
        prop_assert!(distance_feet(a, a) == 0.0);
        prop_assert!((distance_feet(a, b) - distance_feet(b, a)).abs() < 1e-9);
        // equirectangular distances are not exactly a metric; the slack
        // covers the mean-latitude cosine varying by pair
        let slack = 1e-3 * (distance_feet(a, b) + distance_feet(b, c));
        prop_assert!(distance_feet(a, c) <= distance_feet(a, b) + distance_feet(b, c) + slack + 1e-9);
    }

    #[test]
    fn offsets_round_trip(p in baltimore_point(), n in -5000.0f64..5000.0, e in -5000.0f64..5000.0) {
        let q = p.offset_feet(n, e);
        let d = distance_feet(p, q);
        prop_assert!((d - (n * n + e * e).sqrt()).abs() < 1e-3 * (1.0 + d));
    }

    #[test]
    fn grid_query_matches_brute_force(
        points in prop::collection::vec(baltimore_point(), 0..200),
        probes in prop::collection::vec(baltimore_point(), 1..10),
        radius in 0.0f64..3000.0,
        cell in 100.0f64..2000.0,
    ) {
        let index = GridIndex::build(&points, cell, &BoundingBox::BALTIMORE);
        for c in probes {
            let mut got = index.radius_query(c, radius);
            got.sort_unstable();
            let want: Vec<usize> = (0..points.len()).filter(|&i| distance_feet(c, points[i]) <= radius).collect();
            prop_assert_eq!(&got, &want);
            prop_assert_eq!(index.count_within(c, radius), want.len());
        }
    }

    #[test]
    fn rectangle_containment_matches_bounds(
        a in baltimore_point(), b in baltimore_point(), p in baltimore_point()
    ) {
        prop_assume!((a.lat - b.lat).abs() > 1e-6 && (a.lon - b.lon).abs() > 1e-6);
        let poly = Polygon::rectangle(a, b);
        let (lat0, lat1) = (a.lat.min(b.lat), a.lat.max(b.lat));
        let (lon0, lon1) = (a.lon.min(b.lon), a.lon.max(b.lon));
        // strict interior and strict exterior; boundary rules are tested separately
        let inside = p.lat > lat0 && p.lat < lat1 && p.lon > lon0 && p.lon < lon1;
        let outside = p.lat < lat0 || p.lat > lat1 || p.lon < lon0 || p.lon > lon1;
        if inside {
            prop_assert!(point_in_polygon(p, &poly));
        }
        if outside {
            prop_assert!(!point_in_polygon(p, &poly));
        }
    }

    #[test]
    fn convex_polygon_matches_half_planes(
        n in 3usize..9, r in 0.005f64..0.05, p in baltimore_point(), phase in 0.0f64..1.0
    ) {
        // regular n-gon around the city center, counter-clockwise
        let c = BoundingBox::BALTIMORE.center();
        let ring: Vec<LatLon> = (0..n)
            .map(|i| {
                let t = (i as f64 + phase) / n as f64 * std::f64::consts::TAU;
                LatLon::new(c.lat + r * t.sin(), c.lon + r * t.cos())
            })
            .collect();
        let side = |i: usize| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon)
        };
        let sides: Vec<f64> = (0..n).map(side).collect();
        let poly = Polygon::new(ring.clone());
        if sides.iter().all(|s| *s > 1e-12) {
            prop_assert!(point_in_polygon(p, &poly));
        }
        if sides.iter().any(|s| *s < -1e-12) {
            prop_assert!(!point_in_polygon(p, &poly));
        }
    }
}
