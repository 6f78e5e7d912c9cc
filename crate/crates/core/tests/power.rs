use d2d_core::analytics::{Cell, ClusterScheduler, FrameBudget};
use d2d_core::channel::{ClusterPartition, McsTable, SnrClass};
use d2d_core::power::*;
use proptest::prelude::*;

#[test]
fn cell_energy_matches_member_reports() {
    let g: Vec<f64> = (0..8).map(|u| SnrClass::ALL[u % 3].gamma()).collect();
    let c = Cell::new(g, ClusterPartition::from_sizes(&[3, 5]).unwrap(), McsTable::lte(), FrameBudget::default()).unwrap();
    let p = PowerParams::default();
    let reps = cell_energy(&c, ClusterScheduler::ClWrr, &p).unwrap();
    let a = c.analyse(ClusterScheduler::ClWrr).unwrap();
    for (u, r) in reps.iter().enumerate() {
        assert!((r.w_total - r.w_lte - r.w_wifi).abs() < 1e-12);
        assert!((r.eta - a.user_throughput[u] / r.w_total).abs() < 1e-6 * r.eta);
        assert!((0.0..=1.0).contains(&r.active_probability));
    }
}

#[test]
fn active_probability_is_clamped() {
    let a = wifi_active_probability(60e6, 0.1, 10e6, 54e6);
    assert_eq!(a.value, 1.0);
    assert!(a.clamped && a.raw > 1.0);
    let b = wifi_active_probability(0.0, 1.0, 5e6, 54e6);
    assert_eq!(b.value, 0.0);
    assert!(b.clamped);
}

#[test]
fn standalone_keeps_wifi_idle() {
    let p = PowerParams::default();
    let r = standalone_report(4e6, 0.5, &p);
    assert_eq!(r.w_wifi, p.beta_wifi_idle);
    assert_eq!(r.wifi_tx, 0.0);
}

#[test]
fn invalid_constants_are_named() {
    let p = PowerParams { beta_lte: -1.0, ..PowerParams::default() };
    let e = p.validate().unwrap_err();
    assert!(format!("{e}").contains("beta_lte"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    // direct expression against the two-radio composition
    #[test]
    fn total_is_lte_plus_wifi(
        members in prop::collection::vec((0.0f64..20e6, 0.0f64..40e6, 0.0f64..1.0), 1..8),
        idx in 0usize..8,
        r_wifi in 10e6f64..300e6,
    ) {
        let idx = idx % members.len();
        let p = PowerParams { r_wifi, ..PowerParams::default() };
        let t: Vec<f64> = members.iter().map(|m| m.0).collect();
        let r: Vec<f64> = members.iter().map(|m| m.1).collect();
        let rates = wifi_rates(idx, &t, &r).unwrap();
        let active = if rates.degenerate { 0.0 } else { wifi_active_probability(t[idx], rates.delta, r[idx], r_wifi).value };
        let composed = lte_power(members[idx].2, r[idx], &p) + wifi_power(&rates, active, &p);
        let load = MemberLoad {
            head_prob: members[idx].2,
            throughput: t[idx],
            relay_rate: r[idx],
            cluster_throughput: t.iter().sum(),
            others_relay: r.iter().sum::<f64>() - r[idx],
        };
        prop_assert!((total_power(&load, &p) - composed).abs() < 1e-9);
    }
}
