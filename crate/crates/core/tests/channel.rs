use d2d_core::channel::*;
use d2d_core::rng::from_seed;
use proptest::prelude::*;

#[test]
fn lte_table_thresholds_and_rates() {
    let t = McsTable::lte();
    let thresholds = [-2.6, -0.4, 0.8, 1.5, 4.5, 6.8, 8.0, 8.7, 10.9, 14.3, 15.2, 15.8, 19.3, 21.5, 22.6];
    let rates = [0.25, 0.4, 0.5, 0.67, 1.0, 1.3, 1.5, 1.6, 2.0, 2.66, 3.0, 3.2, 4.0, 4.5, 4.8];
    assert_eq!(t.len(), 16);
    assert_eq!(t.rate(0), 0.0);
    for k in 0..15 {
        assert!((t.entries()[k + 1].threshold_db().unwrap() - thresholds[k]).abs() < 1e-12);
        assert_eq!(t.lower(k + 1), db_to_linear(thresholds[k]));
        assert_eq!(t.rate(k + 1), rates[k]);
    }
    assert_eq!(t.top_rate(), 4.8);
}

#[test]
fn snr_on_a_threshold_takes_the_upper_level() {
    let t = McsTable::lte();
    let c = db_to_linear(10.9);
    assert_eq!(t.rate(t.level_of(c)), 2.0);
    assert_eq!(t.rate(t.level_of(c * (1.0 - 1e-12))), 1.6);
    assert_eq!(t.level_of(0.0), 0);
    assert_eq!(t.level_of(1e9), 15);
}

#[test]
fn cluster_of_one_is_the_user() {
    let t = McsTable::lte();
    let g = db_to_linear(16.0);
    let a = mcs_probabilities(g, &t).unwrap();
    let b = cluster_mcs_probabilities(&[g], &t).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-15);
    }
}

// oracle: 2e5 inverse-cdf draws, every level within 4 sigma
#[test]
fn histogram_matches_draws() {
    let t = McsTable::lte();
    let g = db_to_linear(12.0);
    let p = mcs_probabilities(g, &t).unwrap();
    let n = 200_000;
    let mut rng = from_seed(5);
    let mut h = vec![0u64; t.len()];
    for _ in 0..n {
        h[t.level_of(sample_snr(g, &mut rng))] += 1;
    }
    for k in 0..t.len() {
        let sd = (p[k] * (1.0 - p[k]) / n as f64).sqrt();
        assert!((h[k] as f64 / n as f64 - p[k]).abs() <= 4.0 * sd + 1e-12, "level {k}");
    }
}

// oracle: closed-form tail of the best of two exponentials
#[test]
fn cluster_top_level_closed_form() {
    let t = McsTable::lte();
    let (a, b) = (db_to_linear(7.0), db_to_linear(23.0));
    let c = t.lower(15);
    let hand = 1.0 - (1.0 - (-c / a).exp()) * (1.0 - (-c / b).exp());
    let p = cluster_mcs_probabilities(&[a, b], &t).unwrap();
    assert!((p[15] - hand).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn probabilities_sum_to_one(db in -5.0f64..40.0) {
        let s: f64 = mcs_probabilities(db_to_linear(db), &McsTable::lte()).unwrap().iter().sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cluster_probabilities_sum_to_one(dbs in prop::collection::vec(0.0f64..30.0, 1..12)) {
        let g: Vec<f64> = dbs.iter().map(|d| db_to_linear(*d)).collect();
        let p = cluster_mcs_probabilities(&g, &McsTable::lte()).unwrap();
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn level_is_monotone(a in 0.0f64..1e4, b in 0.0f64..1e4) {
        let t = McsTable::lte();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(t.level_of(lo) <= t.level_of(hi));
        prop_assert!(t.lower(t.level_of(hi)) <= hi);
    }

    #[test]
    fn adding_a_member_shifts_mass_up(dbs in prop::collection::vec(0.0f64..30.0, 1..6), extra in 0.0f64..30.0) {
        let g: Vec<f64> = dbs.iter().map(|d| db_to_linear(*d)).collect();
        let mut h = g.clone();
        h.push(db_to_linear(extra));
        for z in [0.5, 3.0, 30.0, 150.0] {
            prop_assert!(cluster_snr_cdf(&h, z).unwrap() <= cluster_snr_cdf(&g, z).unwrap() + 1e-15);
        }
    }
}
