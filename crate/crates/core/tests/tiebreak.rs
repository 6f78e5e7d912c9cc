use d2d_core::channel::{cluster_mcs_probabilities, db_to_linear, McsTable};
use d2d_core::rng::from_seed;
use d2d_core::tiebreak::*;
use proptest::prelude::*;
use rand::Rng;

fn profile(dbs: &[f64]) -> ConnectionProfile {
    let g: Vec<f64> = dbs.iter().map(|d| db_to_linear(*d)).collect();
    ConnectionProfile::new(cluster_mcs_probabilities(&g, &McsTable::lte()).unwrap()).unwrap()
}

fn random_profiles(n: usize, rng: &mut impl Rng) -> Vec<ConnectionProfile> {
    (0..n)
        .map(|_| {
            let m = rng.random_range(1..=4);
            let dbs: Vec<f64> = (0..m).map(|_| [7.0, 16.0, 23.0][rng.random_range(0..3)]).collect();
            profile(&dbs)
        })
        .collect()
}

/// Supply/demand check: every subset S of connections can absorb its demand
/// from the tie sets that lie inside S.
fn gale_feasible(profiles: &[ConnectionProfile], rates: &[f64]) -> bool {
    let n = profiles.len();
    let full = 1u64 << n;
    let rh: Vec<f64> = (0..full).map(|h| if h == 0 { 0.0 } else { tie_throughput(h, profiles, rates).unwrap() }).collect();
    let r_star = rh.iter().sum::<f64>() / n as f64;
    let demand: Vec<f64> = (0..n).map(|i| r_star - rh[1 << i]).collect();
    if demand.iter().any(|d| *d < -1e-9) {
        return false;
    }
    for s in 1..full {
        // tie sets fully inside S must fit in S's demand
        let inside: f64 = (1..full).filter(|h| h.count_ones() >= 2 && h & !s == 0).map(|h| rh[h as usize]).sum();
        let need: f64 = (0..n).filter(|i| s >> i & 1 == 1).map(|i| demand[i]).sum();
        if inside > need + 1e-9 {
            return false;
        }
    }
    true
}

#[test]
fn identical_pair_splits_ties_evenly() {
    let rates = McsTable::lte().rates();
    let a = profile(&[16.0]);
    let r = pair_rates(&a, &a, &rates).unwrap();
    let m = maxfair_alpha(r);
    assert!(m.achievable);
    assert!((m.alpha - 0.5).abs() < 1e-15);
}

#[test]
fn tie_sets_partition_maxrate() {
    let rates = McsTable::lte().rates();
    let ps = vec![profile(&[7.0, 23.0]), profile(&[16.0]), profile(&[23.0, 23.0, 7.0])];
    let total: f64 = (1u64..8).map(|h| tie_throughput(h, &ps, &rates).unwrap()).sum();
    let sys = system_maxrate_throughput(&ps, &rates).unwrap();
    assert!((total - sys).abs() < 1e-12);
    assert!(tie_throughput(8, &ps, &rates).is_err());
}

#[test]
fn exact_wrr_matches_simulation() {
    let rates = McsTable::lte().rates();
    let ps = vec![profile(&[7.0, 16.0]), profile(&[16.0]), profile(&[23.0])];
    let w = [0.2, 0.5, 0.3];
    let mut rng = from_seed(2);
    let exact = wrr_expected_throughput(&w, &ps, &rates, 0, &mut rng).unwrap();
    assert!(exact.exact);
    // frame-by-frame draws of the same system
    let frames = 400_000;
    let mut got = [0.0; 3];
    let mut sq = [0.0; 3];
    for _ in 0..frames {
        let lv: Vec<usize> = ps.iter().map(|p| draw_level(p, &mut rng)).collect();
        let top = *lv.iter().max().unwrap();
        let tied: Vec<usize> = (0..3).filter(|&i| lv[i] == top).collect();
        let total: f64 = tied.iter().map(|&i| w[i]).sum();
        let mut u = rng.random::<f64>() * total;
        let mut who = tied[tied.len() - 1];
        for &i in &tied {
            u -= w[i];
            if u < 0.0 {
                who = i;
                break;
            }
        }
        got[who] += rates[top];
        sq[who] += rates[top] * rates[top];
    }
    for i in 0..3 {
        let g = got[i] / frames as f64;
        let se = ((sq[i] / frames as f64 - g * g) / frames as f64).sqrt();
        assert!((g - exact.values[i]).abs() < 4.0 * se, "{i}: {g} vs {}", exact.values[i]);
    }
}

#[test]
fn lp_agrees_with_subset_condition() {
    let rates = McsTable::lte().rates();
    let mut rng = from_seed(9);
    for n in 3..=5 {
        for _ in 0..40 {
            let ps = random_profiles(n, &mut rng);
            let lp = solve_tie_lp(&ps, &rates, LP_CAP).unwrap();
            assert_eq!(lp.feasible, gale_feasible(&ps, &rates));
            if lp.feasible {
                for t in &lp.throughputs {
                    assert!((t - lp.r_star).abs() < 1e-9);
                }
            }
        }
    }
}

#[test]
fn heuristics_produce_valid_weights() {
    let rates = McsTable::lte().rates();
    let ps = vec![profile(&[23.0, 16.0]), profile(&[7.0]), profile(&[16.0, 16.0, 7.0]), profile(&[23.0])];
    let order = [0, 1, 2, 3];
    for w in [
        fish_weights(&ps, &rates).unwrap(),
        pike_weights(&ps, &rates).unwrap(),
        belf_weights(&ps, &rates, &order, TreeShape::LeftSpine).unwrap(),
        wolf_weights(&ps, &rates, &order, TreeShape::Balanced).unwrap(),
    ] {
        assert!(w.alpha.iter().all(|a| *a >= 0.0 && a.is_finite()), "{:?}", w.source);
    }
    let t = belf_weights(&ps, &rates, &order, TreeShape::LeftSpine).unwrap();
    assert!((t.alpha.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    assert!(belf_weights(&ps, &rates, &[0, 0, 1, 2], TreeShape::LeftSpine).is_err());
}

#[test]
fn jain_bounds() {
    assert_eq!(jain_index(&[3.0, 3.0, 3.0]).unwrap(), 1.0);
    assert!((jain_index(&[1.0, 0.0, 0.0, 0.0]).unwrap() - 0.25).abs() < 1e-15);
    assert!(jain_index(&[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn maxfair_pair_properties(a in prop::collection::vec(0usize..3, 1..6), b in prop::collection::vec(0usize..3, 1..6)) {
        let rates = McsTable::lte().rates();
        let cls = [7.0, 16.0, 23.0];
        let pa = profile(&a.iter().map(|i| cls[*i]).collect::<Vec<_>>());
        let pb = profile(&b.iter().map(|i| cls[*i]).collect::<Vec<_>>());
        let r = pair_rates(&pa, &pb, &rates).unwrap();
        let m = maxfair_alpha(r);
        let (t1, t2) = pair_throughputs(r, m.alpha);
        prop_assert!((t1 + t2 - (r.r1 + r.r2 + r.rx)).abs() < 1e-12);
        let sys = system_maxrate_throughput(&[pa, pb], &rates).unwrap();
        prop_assert!((r.r1 + r.r2 + r.rx - sys).abs() < 1e-12);
        if m.achievable {
            prop_assert!((t1 - t2).abs() < 1e-12);
        } else {
            for step in 0..=1000 {
                let (u1, u2) = pair_throughputs(r, step as f64 / 1000.0);
                prop_assert!((t1 - t2).abs() <= (u1 - u2).abs() + 1e-12);
            }
        }
    }

    #[test]
    fn wrr_keeps_aggregate(w in prop::collection::vec(0.0f64..1.0, 4), seed in any::<u64>()) {
        let rates = McsTable::lte().rates();
        let mut rng = from_seed(seed);
        let ps = random_profiles(4, &mut rng);
        let t = wrr_expected_throughput(&w, &ps, &rates, 0, &mut rng).unwrap();
        let sys = system_maxrate_throughput(&ps, &rates).unwrap();
        prop_assert!((t.values.iter().sum::<f64>() - sys).abs() < 1e-12);
    }
}
