//! Experiment pipelines. Each one turns a validated config into tables.

use std::path::{Path, PathBuf};

use d2d_core::analytics::{Cell, ClusterScheduler};
use d2d_core::channel::{cluster_mcs_probabilities, db_to_linear, ClusterPartition, McsTable};
use d2d_core::coalition::{merge_split, normalize, CachedGame, ClusterGame};
use d2d_core::modeselect::{
    brute_force_optimal, heuristic_greedy, heuristic_ranked, heuristic_social, random_order, Mode, ModeScenario, Pathloss,
    SelectionOutcome, UtilityModel, BRUTE_FORCE_CAP,
};
use d2d_core::power::{cell_energy, standalone_report};
use d2d_core::rng::{substream, SimRng};
use d2d_core::simkit::{run, SchedulerKind, SimReport, Traffic};
use d2d_core::tiebreak::{
    belf_weights, fish_weights, jain_index, lexicographic_order, maxfair_alpha, pair_rates, pike_weights, solve_tie_lp,
    wolf_weights, wrr_expected_throughput, ClassCounts, ConnectionProfile, TieBreakWeights, LP_CAP,
};
use rand::Rng;
use rayon::prelude::*;

use crate::config::{class_cycle_db, LabConfig, SweepAxis};
use crate::error::{Context, LabError};
use crate::output::{num, write_run, Provenance, Table};

/// The runnable experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Analytics,
    Simulate,
    Tiebreak,
    Modeselect,
    Sweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Analytics => "analytics",
            Experiment::Simulate => "simulate",
            Experiment::Tiebreak => "tiebreak",
            Experiment::Modeselect => "modeselect",
            Experiment::Sweep => "sweep",
        }
    }
}

/// Seed of replication `r`, decorrelated from the base seed.
pub fn replication_seed(base: u64, r: usize) -> u64 {
    substream(base, r as u64).random()
}

fn mbps(bits_per_s: f64) -> f64 {
    bits_per_s / 1e6
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Compute an experiment's tables.
pub fn tables(exp: Experiment, cfg: &LabConfig) -> Result<Vec<Table>, LabError> {
    match exp {
        Experiment::Analytics => analytics(cfg),
        Experiment::Simulate => simulate(cfg),
        Experiment::Tiebreak => Ok(vec![tiebreak(cfg, cfg.run.seed, cfg.tiebreak.instances)?]),
        Experiment::Modeselect => Ok(vec![modeselect_table(cfg)?]),
        Experiment::Sweep => Ok(vec![sweep(cfg)?]),
    }
}

/// Run an experiment and write its files under `out`.
pub fn run_experiment(exp: Experiment, cfg: &LabConfig, out: &Path) -> Result<Vec<PathBuf>, LabError> {
    if exp == Experiment::Sweep {
        cfg.require_sweep()?;
    }
    let text = cfg.to_toml();
    let prov = Provenance::new(exp.name(), &text, cfg.run.seed);
    let t = tables(exp, cfg)?;
    write_run(out, &prov, &text, &t)
}

// ---- analytics ----

fn analytics(cfg: &LabConfig) -> Result<Vec<Table>, LabError> {
    let cell = Cell::new(cfg.gammas(), cfg.partition(), McsTable::lte(), cfg.budget()).context(|| "analytics: cell".into())?;
    let params = cfg.power_params();
    let db = cfg.snr_db();
    let mut clusters = Table::new("analytics_clusters", &["scheduler", "cluster", "size", "weight", "throughput_mbps"]);
    let mut users = Table::new(
        "analytics_users",
        &["scheduler", "user", "snr_db", "cluster", "throughput_mbps", "head_probability", "relay_mbps", "power_w", "eta_bits_per_j"],
    );
    for (s, name) in [(ClusterScheduler::ClWrr, "clwrr"), (ClusterScheduler::ClMr, "clmr")] {
        let a = cell.analyse(s).context(|| format!("analytics: {name}"))?;
        let energy = cell_energy(&cell, s, &params).context(|| format!("analytics: {name} energy"))?;
        let part = cell.partition();
        for (c, members) in part.clusters().iter().enumerate() {
            clusters.push(vec![
                name.into(),
                c.to_string(),
                members.len().to_string(),
                num(part.weight(c).expect("cluster exists")),
                num(mbps(a.cluster_throughput[c])),
            ]);
        }
        for u in 0..db.len() {
            users.push(vec![
                name.into(),
                u.to_string(),
                num(db[u]),
                part.cluster_of(u).expect("user exists").to_string(),
                num(mbps(a.user_throughput[u])),
                num(a.head_probability[u]),
                num(mbps(a.relay_rate[u])),
                num(energy[u].w_total),
                num(energy[u].eta),
            ]);
        }
    }
    let mut out = vec![clusters, users];
    if cfg.coalition.enabled {
        out.push(coalition(cfg)?);
    }
    Ok(out)
}

/// Per-user efficiency without clustering.
pub fn baseline_etas(cfg: &LabConfig) -> Result<Vec<f64>, LabError> {
    let params = cfg.power_params();
    let n = cfg.n_users();
    if cfg.coalition.baseline == "rr-analytic" {
        let cell = Cell::new(cfg.gammas(), ClusterPartition::singletons(n), McsTable::lte(), cfg.budget())
            .context(|| "coalition baseline".into())?;
        let e = cell_energy(&cell, ClusterScheduler::ClWrr, &params).context(|| "coalition baseline".into())?;
        return Ok(e.iter().map(|r| r.eta).collect());
    }
    let mut sc = cfg.scenario_for(cfg.gammas(), ClusterPartition::singletons(n), "pf", 0.0);
    sc.traffic = Traffic::FullBuffer;
    sc.frames = cfg.coalition.baseline_frames;
    sc.trace = false;
    sc.power = None;
    let r = run(&sc).context(|| "coalition baseline simulation".into())?;
    Ok((0..n).map(|u| standalone_report(r.user_throughput[u], r.head_frequency(u), &params).eta).collect())
}

fn coalition(cfg: &LabConfig) -> Result<Table, LabError> {
    let n = cfg.n_users();
    let mut rng = substream(cfg.run.seed, 0);
    let radius = cfg.coalition.radius_m;
    let positions: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let r = radius * rng.random::<f64>().sqrt();
            let t = 2.0 * std::f64::consts::PI * rng.random::<f64>();
            (r * t.cos(), r * t.sin())
        })
        .collect();
    let game = ClusterGame {
        gammas: cfg.gammas(),
        positions: Some(positions.clone()),
        d_max: cfg.coalition.d_max_m.unwrap_or(f64::INFINITY),
        baseline_etas: baseline_etas(cfg)?,
        table: McsTable::lte(),
        budget: cfg.budget(),
        params: cfg.power_params(),
        scheduler: cfg.coalition_scheduler(),
        metric: cfg.coalition_metric(),
    };
    let cached = CachedGame::new(&game);
    let singles: Vec<Vec<usize>> = (0..n).map(|u| vec![u]).collect();
    let mut p = merge_split(&singles, &cached);
    if let Some(e) = cached.take_error() {
        return Err(LabError::Model { context: "coalition formation".into(), source: e });
    }
    normalize(&mut p);
    let part = ClusterPartition::new(p, n).context(|| "coalition partition".into())?;
    let cell = Cell::new(cfg.gammas(), part.clone(), McsTable::lte(), cfg.budget()).context(|| "coalition cell".into())?;
    let energy = cell_energy(&cell, cfg.coalition_scheduler(), &cfg.power_params()).context(|| "coalition energy".into())?;
    let db = cfg.snr_db();
    let mut t = Table::new(
        "analytics_coalition",
        &["user", "snr_db", "x_m", "y_m", "coalition", "coalition_size", "baseline_eta_bits_per_j", "eta_bits_per_j"],
    );
    for u in 0..n {
        let c = part.cluster_of(u).expect("user exists");
        t.push(vec![
            u.to_string(),
            num(db[u]),
            num(positions[u].0),
            num(positions[u].1),
            c.to_string(),
            part.clusters()[c].len().to_string(),
            num(game.baseline_etas[u]),
            num(energy[u].eta),
        ]);
    }
    Ok(t)
}

// ---- simulate ----

fn run_jobs(jobs: Vec<(usize, String, d2d_core::simkit::ScenarioConfig)>) -> Result<Vec<(usize, String, u64, SimReport)>, LabError> {
    jobs.into_par_iter()
        .map(|(r, name, sc)| {
            let seed = sc.seed;
            let rep = run(&sc).context(|| format!("replication {r}, scheduler {name}"))?;
            Ok((r, name, seed, rep))
        })
        .collect()
}

fn simulate(cfg: &LabConfig) -> Result<Vec<Table>, LabError> {
    let mut jobs = Vec::new();
    for r in 0..cfg.run.replications {
        for name in &cfg.simulate.schedulers {
            let mut sc = cfg.scenario(name);
            sc.seed = replication_seed(cfg.run.seed, r);
            sc.trace = cfg.run.trace && r == 0;
            jobs.push((r, name.clone(), sc));
        }
    }
    let done = run_jobs(jobs)?;
    let db = cfg.snr_db();
    let part = cfg.partition();
    let mut runs = Table::new(
        "simulate_runs",
        &[
            "replication",
            "seed",
            "scheduler",
            "aggregate_mbps",
            "jain_users",
            "jain_clusters",
            "delivery_ratio",
            "delay_mean_ms",
            "delay_p90_ms",
            "delay_cdf_1ms",
            "delay_cdf_10ms",
            "dropped_packets",
        ],
    );
    let mut users = Table::new(
        "simulate_users",
        &[
            "replication",
            "scheduler",
            "user",
            "snr_db",
            "cluster",
            "throughput_mbps",
            "head_frequency",
            "relay_mbps",
            "d2d_mbps",
            "offered_packets",
            "delivered_packets",
            "dropped_packets",
            "queued_packets",
            "fallback_frames",
            "power_w",
            "eta_bits_per_j",
        ],
    );
    let mut trace = Table::new("simulate_trace", &["scheduler", "frame", "served_connection", "mcs_level", "queued_packets"]);
    let mut pooled: Vec<(String, d2d_core::simkit::DelayHistogram)> =
        cfg.simulate.schedulers.iter().map(|s| (s.clone(), Default::default())).collect();
    for (r, name, seed, rep) in &done {
        let packets = rep.delays.count() > 0;
        runs.push(vec![
            r.to_string(),
            seed.to_string(),
            name.clone(),
            num(mbps(rep.aggregate_throughput())),
            num(rep.jain_users()),
            num(rep.jain_clusters()),
            num(rep.delivery_ratio()),
            opt_num(rep.delays.mean().map(|s| s * 1e3)),
            opt_num(rep.delays.quantile(0.9).map(|s| s * 1e3)),
            if packets { num(rep.delays.cdf(1e-3)) } else { String::new() },
            if packets { num(rep.delays.cdf(10e-3)) } else { String::new() },
            rep.dropped_packets.iter().sum::<u64>().to_string(),
        ]);
        for u in 0..db.len() {
            let e = rep.energy.as_ref().map(|e| e[u]);
            users.push(vec![
                r.to_string(),
                name.clone(),
                u.to_string(),
                num(db[u]),
                part.cluster_of(u).expect("user exists").to_string(),
                num(mbps(rep.user_throughput[u])),
                num(rep.head_frequency(u)),
                num(mbps(rep.relay_rate[u])),
                num(mbps(rep.d2d_rate[u])),
                rep.offered_packets[u].to_string(),
                rep.delivered_packets[u].to_string(),
                rep.dropped_packets[u].to_string(),
                rep.queued_packets[u].to_string(),
                rep.fallback_frames[u].to_string(),
                opt_num(e.map(|e| e.w_total)),
                opt_num(e.map(|e| e.eta)),
            ]);
        }
        for t in &rep.trace {
            trace.push(vec![
                name.clone(),
                t.frame.to_string(),
                t.served.map(|c| c.to_string()).unwrap_or_default(),
                t.level.to_string(),
                t.queued.to_string(),
            ]);
        }
        let slot = pooled.iter_mut().find(|(s, _)| s == name).expect("scheduler listed");
        slot.1.merge(&rep.delays);
    }
    let mut cdf = Table::new("simulate_delay_cdf", &["scheduler", "delay_ms", "packets", "cdf"]);
    for (name, h) in &pooled {
        let total = h.count() as f64;
        let mut seen = 0u64;
        for (s, c) in h.iter() {
            seen += c;
            cdf.push(vec![name.clone(), num(s * 1e3), c.to_string(), num(seen as f64 / total)]);
        }
    }
    let mut out = vec![runs, users, cdf];
    if cfg.run.trace {
        out.push(trace);
    }
    Ok(out)
}

// ---- tiebreak ----

/// A random tie-breaking instance: connection profiles and member classes.
pub struct TieInstance {
    pub profiles: Vec<ConnectionProfile>,
    pub goodness: Vec<ClassCounts>,
    pub members: usize,
}

/// Draw an instance within the configured connection and member ranges.
pub fn random_tie_instance(cfg: &LabConfig, rng: &mut SimRng) -> Result<TieInstance, LabError> {
    let t = &cfg.tiebreak;
    let mut classes = t.classes_db.clone();
    classes.sort_by(f64::total_cmp);
    let n = rng.random_range(t.connections_min..=t.connections_max);
    let mut profiles = Vec::with_capacity(n);
    let mut goodness = Vec::with_capacity(n);
    let mut members = 0;
    for _ in 0..n {
        let m = rng.random_range(t.members_min..=t.members_max);
        members += m;
        let mut g = ClassCounts::default();
        let mut gammas = Vec::with_capacity(m);
        for _ in 0..m {
            let k = rng.random_range(0..classes.len());
            if k + 1 == classes.len() && classes.len() > 1 {
                g.good += 1;
            } else if k == 0 {
                g.poor += 1;
            } else {
                g.average += 1;
            }
            gammas.push(db_to_linear(classes[k]));
        }
        let p = cluster_mcs_probabilities(&gammas, &McsTable::lte()).context(|| "tiebreak profile".into())?;
        profiles.push(ConnectionProfile::new(p).context(|| "tiebreak profile".into())?);
        goodness.push(g);
    }
    Ok(TieInstance { profiles, goodness, members })
}

fn tiebreak(cfg: &LabConfig, seed: u64, instances: usize) -> Result<Table, LabError> {
    let rates = McsTable::lte().rates();
    let scale = cfg.budget().symbol_rate() / 1e6;
    let tree = cfg.tree_shape();
    let rows: Vec<Vec<Vec<String>>> = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<Vec<Vec<String>>, LabError> {
            let mut rng = substream(seed, i as u64);
            let inst = random_tie_instance(cfg, &mut rng)?;
            let ps = &inst.profiles;
            let n = ps.len();
            let ctx = || format!("tiebreak instance {i}");
            let order = lexicographic_order(&inst.goodness);
            let mut methods: Vec<(&str, TieBreakWeights)> = vec![("mr-random", TieBreakWeights::uniform(n))];
            if n == 2 {
                let m = maxfair_alpha(pair_rates(&ps[0], &ps[1], &rates).context(ctx)?);
                methods.push(("exact-pair", TieBreakWeights { alpha: vec![m.alpha, 1.0 - m.alpha], ..TieBreakWeights::uniform(2) }));
            }
            methods.push(("fish", fish_weights(ps, &rates).context(ctx)?));
            methods.push(("pike", pike_weights(ps, &rates).context(ctx)?));
            methods.push(("belf", belf_weights(ps, &rates, &order, tree).context(ctx)?));
            methods.push(("wolf", wolf_weights(ps, &rates, &order, tree).context(ctx)?));
            let lp = if cfg.tiebreak.lp && n <= LP_CAP { Some(solve_tie_lp(ps, &rates, LP_CAP).context(ctx)?) } else { None };
            let feasible = lp.as_ref().map(|l| l.feasible.to_string()).unwrap_or_default();
            let mut out = Vec::new();
            let mut row = |method: &str, values: &[f64], exact: bool| -> Result<(), LabError> {
                let v: Vec<f64> = values.iter().map(|x| x * scale).collect();
                out.push(vec![
                    i.to_string(),
                    n.to_string(),
                    inst.members.to_string(),
                    method.to_string(),
                    num(v.iter().sum()),
                    num(jain_index(&v).context(ctx)?),
                    num(v.iter().copied().fold(f64::INFINITY, f64::min)),
                    num(v.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
                    feasible.clone(),
                    exact.to_string(),
                ]);
                Ok(())
            };
            for (name, w) in &methods {
                let t = wrr_expected_throughput(&w.alpha, ps, &rates, cfg.tiebreak.mc_frames, &mut rng).context(ctx)?;
                row(name, &t.values, t.exact)?;
            }
            if let Some(l) = &lp {
                row("lp", &l.throughputs, true)?;
            }
            Ok(out)
        })
        .collect::<Result<_, _>>()?;
    let mut t = Table::new(
        "tiebreak_instances",
        &["instance", "connections", "members", "method", "aggregate_mbps", "jain", "min_mbps", "max_mbps", "lp_feasible", "exact"],
    );
    for r in rows.into_iter().flatten() {
        t.push(r);
    }
    Ok(t)
}

// ---- modeselect ----

fn modes_label(modes: &[Mode]) -> String {
    modes.iter().map(|m| m.number().to_string()).collect::<Vec<_>>().join("-")
}

/// Each method's outcome on one random instance, optimum first when the
/// instance is small enough for exhaustive search.
pub fn mode_instance(cfg: &LabConfig, rng: &mut SimRng) -> Result<Vec<(&'static str, d2d_core::Result<SelectionOutcome>)>, LabError> {
    let sc = ModeScenario::random(&cfg.mode_shape(), cfg.link_params(), cfg.utility_params(), cfg.tolerances(), &Pathloss::default(), rng)
        .context(|| "mode-selection scenario".into())?;
    let order = random_order(sc.n_pairs(), rng);
    let mut out = Vec::new();
    if sc.n_pairs() <= BRUTE_FORCE_CAP {
        out.push(("optimal", brute_force_optimal(&sc, BRUTE_FORCE_CAP)));
    }
    out.push(("social", heuristic_social(&sc, &order)));
    out.push(("greedy", heuristic_greedy(&sc, &order)));
    out.push(("ranked", heuristic_ranked(&sc)));
    Ok(out)
}

fn mode_rows(cfg: &LabConfig, seed: u64, instances: usize, prefix: &[String]) -> Result<Vec<Vec<String>>, LabError> {
    let per: Vec<Vec<Vec<String>>> = (0..instances)
        .into_par_iter()
        .map(|i| -> Result<Vec<Vec<String>>, LabError> {
            let mut rng = substream(seed, i as u64);
            let res = mode_instance(cfg, &mut rng)?;
            let opt = res.iter().find(|(m, _)| *m == "optimal").and_then(|(_, r)| r.as_ref().ok()).map(|o| o.utility);
            Ok(res
                .into_iter()
                .map(|(method, r)| {
                    let mut row = prefix.to_vec();
                    row.extend([i.to_string(), cfg.modeselect.pairs.to_string(), cfg.modeselect.cellular.to_string(), method.to_string()]);
                    match r {
                        Ok(o) => row.extend([
                            "ok".to_string(),
                            num(o.utility),
                            opt.map(|u| num(o.utility / u)).unwrap_or_default(),
                            o.iterations.to_string(),
                            modes_label(&o.modes),
                        ]),
                        Err(e) => row.extend([e.to_string(), String::new(), String::new(), String::new(), String::new()]),
                    }
                    row
                })
                .collect())
        })
        .collect::<Result<_, _>>()?;
    Ok(per.into_iter().flatten().collect())
}

const MODE_COLUMNS: [&str; 9] = ["instance", "pairs", "cellular", "method", "status", "utility", "ratio_to_optimum", "iterations", "modes"];

fn modeselect_table(cfg: &LabConfig) -> Result<Table, LabError> {
    let mut t = Table::new("modeselect_instances", &MODE_COLUMNS);
    for r in mode_rows(cfg, cfg.run.seed, cfg.modeselect.instances, &[])? {
        t.push(r);
    }
    Ok(t)
}

// ---- sweep ----

/// Cluster sizes of `n` users in chunks of `size`, the last one shorter.
pub fn chunk_sizes(n: usize, size: usize) -> Vec<usize> {
    let mut out = vec![size; n / size];
    if n % size > 0 {
        out.push(n % size);
    }
    out
}

fn sweep(cfg: &LabConfig) -> Result<Table, LabError> {
    let sw = cfg.require_sweep()?;
    let axis = cfg.sweep_axis().expect("validated axis");
    match axis {
        SweepAxis::Users | SweepAxis::Load => {
            let mut jobs = Vec::new();
            let mut keys = Vec::new();
            for &v in &sw.values {
                for r in 0..cfg.run.replications {
                    for name in &cfg.simulate.schedulers {
                        let seed = replication_seed(cfg.run.seed, r);
                        let mut sc = if axis == SweepAxis::Users {
                            let n = v as usize;
                            let g = class_cycle_db(n).iter().map(|d| db_to_linear(*d)).collect();
                            let part = ClusterPartition::from_sizes(&chunk_sizes(n, sw.cluster_size)).context(|| "sweep partition".into())?;
                            cfg.scenario_for(g, part, name, cfg.simulate.load_mbps)
                        } else {
                            let mut c = cfg.clone();
                            c.simulate.traffic = "poisson".into();
                            c.scenario_for(cfg.gammas(), cfg.partition(), name, v)
                        };
                        if let SchedulerKind::MaxRateWrr { weights } = &mut sc.scheduler {
                            weights.resize(sc.partition.len(), 1.0);
                        }
                        sc.seed = seed;
                        sc.trace = false;
                        keys.push(v);
                        jobs.push((r, name.clone(), sc));
                    }
                }
            }
            let done = run_jobs(jobs)?;
            let mut t = Table::new(
                &format!("sweep_{}", axis.name()),
                &["axis_value", "replication", "seed", "scheduler", "aggregate_mbps", "jain_users", "delivery_ratio", "delay_cdf_1ms", "delay_p90_ms"],
            );
            for (v, (r, name, seed, rep)) in keys.into_iter().zip(done) {
                let packets = rep.delays.count() > 0;
                t.push(vec![
                    num(v),
                    r.to_string(),
                    seed.to_string(),
                    name,
                    num(mbps(rep.aggregate_throughput())),
                    num(rep.jain_users()),
                    num(rep.delivery_ratio()),
                    if packets { num(rep.delays.cdf(1e-3)) } else { String::new() },
                    opt_num(rep.delays.quantile(0.9).map(|s| s * 1e3)),
                ]);
            }
            Ok(t)
        }
        SweepAxis::Overlay | SweepAxis::Alpha => {
            let mut header = vec!["axis_value", "replication", "seed"];
            header.extend(MODE_COLUMNS);
            let mut t = Table::new(&format!("sweep_{}", axis.name()), &header);
            for &v in &sw.values {
                let mut c = cfg.clone();
                if axis == SweepAxis::Overlay {
                    c.modeselect.overlay_fraction = v;
                } else {
                    c.modeselect.alpha = v;
                }
                for r in 0..cfg.run.replications {
                    let seed = replication_seed(cfg.run.seed, r);
                    let prefix = [num(v), r.to_string(), seed.to_string()];
                    for row in mode_rows(&c, seed, c.modeselect.instances, &prefix)? {
                        t.push(row);
                    }
                }
            }
            Ok(t)
        }
    }
}
