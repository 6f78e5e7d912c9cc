use d2d_core::analytics::*;
use d2d_core::channel::{db_to_linear, ClusterPartition, McsTable, SnrClass};
use d2d_core::simkit::{run, ScenarioConfig, SchedulerKind};
use proptest::prelude::*;

fn cell(gammas: Vec<f64>, sizes: &[usize]) -> Cell {
    Cell::new(gammas, ClusterPartition::from_sizes(sizes).unwrap(), McsTable::lte(), FrameBudget::default()).unwrap()
}

fn classes(n: usize) -> Vec<f64> {
    (0..n).map(|u| SnrClass::ALL[u % 3].gamma()).collect()
}

/// P(X_i > X_j for all j) for independent exponentials, by inclusion-exclusion.
fn best_of_all(rates: &[f64], i: usize) -> f64 {
    let others: Vec<f64> = rates.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| *r).collect();
    let mut s = 0.0;
    for mask in 0u32..(1 << others.len()) {
        let sum: f64 = (0..others.len()).filter(|b| mask >> b & 1 == 1).map(|b| others[b]).sum();
        let sign = if mask.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * rates[i] / (rates[i] + sum);
    }
    s
}

#[test]
fn pair_head_probability_closed_form() {
    let (a, b) = (db_to_linear(7.0), db_to_linear(23.0));
    let c = cell(vec![a, b, 50.0], &[2, 1]);
    let w = 2.0 / 3.0;
    // P(X > Y) = a / (a + b) for exponential means a, b
    assert!((c.clwrr_head_probability(0).unwrap() - w * a / (a + b)).abs() < 1e-9);
    assert!((c.clwrr_head_probability(1).unwrap() - w * b / (a + b)).abs() < 1e-9);
}

#[test]
fn clmr_head_probability_closed_form() {
    let g: Vec<f64> = [5.0, 9.0, 14.0, 20.0, 23.0].iter().map(|d| db_to_linear(*d)).collect();
    let c = cell(g.clone(), &[2, 3]);
    let inv: Vec<f64> = g.iter().map(|x| 1.0 / x).collect();
    for u in 0..5 {
        let hand = best_of_all(&inv, u);
        assert!((c.clmr_head_probability(u).unwrap() - hand).abs() < 1e-9, "user {u}");
    }
}

#[test]
fn clmr_total_is_system_maxrate() {
    let c = cell(classes(20), &[2, 4, 6, 8]);
    let total: f64 = (0..4).map(|k| c.clmr_cluster_throughput(k).unwrap()).sum();
    let sys = c.system_maxrate_throughput();
    assert!((total - sys).abs() < 1e-7 * sys);
}

#[test]
fn relay_rates_carry_every_bit() {
    let c = cell(classes(20), &[2, 4, 6, 8]);
    for s in [ClusterScheduler::ClWrr, ClusterScheduler::ClMr] {
        let a = c.analyse(s).unwrap();
        let relayed: f64 = a.relay_rate.iter().sum();
        let served: f64 = a.cluster_throughput.iter().sum();
        assert!((relayed - served).abs() < 1e-7 * served, "{s:?}");
    }
}

#[test]
fn fig_topology_cluster_values_follow_simulation() {
    let g = classes(20);
    let part = ClusterPartition::from_sizes(&[2, 4, 6, 8]).unwrap();
    let c = Cell::new(g.clone(), part.clone(), McsTable::lte(), FrameBudget::default()).unwrap();
    for (s, k, tol) in [
        (ClusterScheduler::ClWrr, SchedulerKind::ClusterWrr, 0.01),
        (ClusterScheduler::ClMr, SchedulerKind::ClusterMaxRate, 0.03),
    ] {
        let a = c.analyse(s).unwrap();
        let mut cfg = ScenarioConfig::new(g.clone(), part.clone());
        cfg.scheduler = k;
        cfg.frames = 200_000;
        cfg.seed = 21;
        let r = run(&cfg).unwrap();
        let total: f64 = a.cluster_throughput.iter().sum();
        // a cluster that wins a fraction of a percent of frames is too noisy to pin at this length
        for n in (0..4).filter(|&n| a.cluster_throughput[n] > 0.01 * total) {
            let rel = r.cluster_throughput[n] / a.cluster_throughput[n] - 1.0;
            assert!(rel.abs() < tol, "{s:?} cluster {n}: {rel}");
        }
    }
}

#[test]
fn degenerate_level_is_reported() {
    let t = McsTable::lte();
    assert!(conditional_snr_cdf(1e-4, t.lower(15), 15, &t).is_err());
    assert!(conditional_snr_cdf(100.0, t.lower(3), 3, &t).unwrap() == 0.0);
    assert_eq!(conditional_snr_cdf(100.0, t.lower(4), 3, &t).unwrap(), 1.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn head_probabilities_sum_to_weights(dbs in prop::collection::vec(0.0f64..30.0, 2..9), cut in 1usize..8) {
        let n = dbs.len();
        let cut = cut.min(n - 1);
        let g: Vec<f64> = dbs.iter().map(|d| db_to_linear(*d)).collect();
        let c = cell(g, &[cut, n - cut]);
        let wrr = c.analyse(ClusterScheduler::ClWrr).unwrap();
        let mr = c.analyse(ClusterScheduler::ClMr).unwrap();
        let first: f64 = wrr.head_probability[..cut].iter().sum();
        prop_assert!((first - cut as f64 / n as f64).abs() < 1e-6);
        prop_assert!((mr.head_probability.iter().sum::<f64>() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn clwrr_user_shares_are_equal(dbs in prop::collection::vec(0.0f64..30.0, 3..7)) {
        let n = dbs.len();
        let g: Vec<f64> = dbs.iter().map(|d| db_to_linear(*d)).collect();
        let c = cell(g, &[n]);
        let t0 = c.clwrr_user_throughput(0).unwrap();
        for u in 1..n {
            prop_assert_eq!(t0, c.clwrr_user_throughput(u).unwrap());
        }
        // one cluster holding everyone: CL(WRR), CL(MR) and MaxRate coincide
        let sys = c.system_maxrate_throughput();
        prop_assert!((c.clwrr_cluster_throughput(0).unwrap() - sys).abs() < 1e-9 * sys);
        prop_assert!((c.clmr_cluster_throughput(0).unwrap() - sys).abs() < 1e-9 * sys);
    }
}
