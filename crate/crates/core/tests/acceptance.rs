//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Set `CORCLUST_ACCEPTANCE=1,4,7` to run a subset.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use corclust::cdk::{cdk_run, CdkConfig};
use corclust::engine::run;
use corclust::graph::gen_gnp;
use corclust::harness::{
    desk_fixtures, median, oracle_fixtures, repetition_permutation, round_bound, sampling_seed,
    serial_approximation_check, HypothesisConfig,
};
use corclust::ordering::random_permutation;
use corclust::quality::{disagreements, disagreements_bruteforce, objective_ratio};
use corclust::serial::{kwik_cluster, kwik_cluster_traced};
use corclust::{Assignment, EngineConfig, Graph, Rng, Variant};

const ROOT: u64 = 0x5EED;
const SEEDS: usize = 100;
const EPSILONS: [f64; 3] = [0.1, 0.5, 0.9];
const THREADS: [usize; 4] = [1, 2, 4, 8];

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn fixture(name: &str) -> Graph {
    let (_, source) = desk_fixtures()
        .into_iter()
        .find(|(n, _)| *n == name)
        .expect("fixture");
    source.load(ROOT).expect("fixture graph")
}

/// Criteria 1 and 5 share their runs.
struct Equivalence {
    mismatches: Vec<String>,
    runs: usize,
    max_blocked: f64,
    blocked_over: Vec<String>,
}

fn equivalence_runs() -> Equivalence {
    let mut eq = Equivalence {
        mismatches: Vec::new(),
        runs: 0,
        max_blocked: 0.0,
        blocked_over: Vec::new(),
    };
    for name in ["gnp-2000", "planted-2000"] {
        let g = fixture(name);
        for r in 0..SEEDS {
            let perm = repetition_permutation(g.n(), ROOT, r);
            let serial = kwik_cluster(&g, &perm).unwrap().canonical();
            for &eps in &EPSILONS {
                for &p in &THREADS {
                    for variant in [Variant::C4Bsp, Variant::C4Async] {
                        let cfg = EngineConfig::new(variant)
                            .epsilon(eps)
                            .threads(p)
                            .seed(sampling_seed(ROOT, r));
                        let tag = format!("{name} {variant:?} eps={eps} P={p} seed={r}");
                        eq.runs += 1;
                        match run(&g, &perm, &cfg) {
                            Ok((a, report)) => {
                                if a.canonical() != serial {
                                    eq.mismatches.push(tag.clone());
                                }
                                let blocked = report.blocked_fraction();
                                eq.max_blocked = eq.max_blocked.max(blocked);
                                if blocked >= 0.01 {
                                    eq.blocked_over
                                        .push(format!("{tag}: {:.3}%", 100.0 * blocked));
                                }
                            }
                            Err(e) => eq.mismatches.push(format!("{tag}: {e}")),
                        }
                    }
                }
            }
        }
    }
    eq
}

fn first_few(items: &[String]) -> String {
    items.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
}

fn criterion_1(eq: &Equivalence) -> Outcome {
    outcome(
        eq.mismatches.is_empty(),
        format!(
            "{} C4 runs, {} differ from serial {}",
            eq.runs,
            eq.mismatches.len(),
            first_few(&eq.mismatches)
        ),
    )
}

fn criterion_2() -> Outcome {
    let fixtures = oracle_fixtures(ROOT).unwrap();
    let v = serial_approximation_check(
        &fixtures,
        &HypothesisConfig {
            permutations: 10_000,
            seed: ROOT,
            ..HypothesisConfig::default()
        },
    )
    .unwrap();
    let worst = fixtures
        .iter()
        .filter(|f| f.opt > 0)
        .map(|f| v.metrics[&format!("{}.mean", f.name)] / f.opt as f64)
        .fold(0.0, f64::max);
    outcome(v.passed, format!("{}; worst mean/OPT {worst:.3}", v.detail))
}

/// Criteria 3 and 4 share their runs.
struct Quality {
    cw_bsp_median: Vec<(f64, f64)>,
    cw_async_median: f64,
    round_failures: Vec<String>,
    round_runs: usize,
    worst_round_ratio: f64,
}

fn quality_runs() -> Quality {
    let g = fixture("gnp-5000");
    let bound_threads = 4;
    let mut bsp: Vec<Vec<f64>> = vec![Vec::new(); EPSILONS.len()];
    let mut asyn = Vec::new();
    let mut q = Quality {
        cw_bsp_median: Vec::new(),
        cw_async_median: 0.0,
        round_failures: Vec::new(),
        round_runs: 0,
        worst_round_ratio: 0.0,
    };
    for r in 0..SEEDS {
        let perm = repetition_permutation(g.n(), ROOT, r);
        let serial = disagreements(&g, &kwik_cluster(&g, &perm).unwrap()).unwrap();
        let seed = sampling_seed(ROOT, r);
        for (i, &eps) in EPSILONS.iter().enumerate() {
            for variant in [Variant::CwBsp, Variant::C4Bsp] {
                let cfg = EngineConfig::new(variant)
                    .epsilon(eps)
                    .threads(bound_threads)
                    .seed(seed);
                let (_, report) = run(&g, &perm, &cfg).unwrap();
                if variant == Variant::CwBsp {
                    bsp[i].push(objective_ratio(&serial, &report.breakdown).unwrap());
                }
                let bound = round_bound(g.n(), g.max_degree(), eps);
                q.round_runs += 1;
                q.worst_round_ratio = q.worst_round_ratio.max(report.rounds as f64 / bound);
                if report.rounds as f64 > bound {
                    q.round_failures.push(format!(
                        "{variant:?} eps={eps} seed={r}: {} > {bound:.1}",
                        report.rounds
                    ));
                }
            }
        }
        let cfg = EngineConfig::new(Variant::CwAsync).threads(8).seed(seed);
        let (_, report) = run(&g, &perm, &cfg).unwrap();
        asyn.push(objective_ratio(&serial, &report.breakdown).unwrap());
    }
    q.cw_bsp_median = EPSILONS
        .iter()
        .zip(&bsp)
        .map(|(&e, xs)| (e, median(xs)))
        .collect();
    q.cw_async_median = median(&asyn);
    q
}

fn criterion_3(q: &Quality) -> Outcome {
    let bsp_ok = q.cw_bsp_median.iter().all(|&(_, m)| m <= 1.05);
    let async_ok = q.cw_async_median <= 1.15;
    let medians: Vec<String> = q
        .cw_bsp_median
        .iter()
        .map(|(e, m)| format!("eps={e}: {m:.4}"))
        .collect();
    outcome(
        bsp_ok && async_ok,
        format!(
            "CW BSP median ratio {} (limit 1.05); CW async P=8 median {:.4} (limit 1.15)",
            medians.join(", "),
            q.cw_async_median
        ),
    )
}

fn criterion_4(q: &Quality) -> Outcome {
    outcome(
        q.round_failures.is_empty(),
        format!(
            "{} BSP runs, max rounds/bound {:.4} {}",
            q.round_runs,
            q.worst_round_ratio,
            first_few(&q.round_failures)
        ),
    )
}

fn criterion_5(eq: &Equivalence) -> Outcome {
    outcome(
        eq.blocked_over.is_empty(),
        format!(
            "max blocked fraction {:.4}% (limit 1%) {}",
            100.0 * eq.max_blocked,
            first_few(&eq.blocked_over)
        ),
    )
}

fn bad_triangles_at(g: &Graph, center: u32, alive: &[bool]) -> u64 {
    let live: Vec<u32> = (0..g.n() as u32)
        .filter(|&v| alive[v as usize] && v != center)
        .collect();
    let mut count = 0;
    for (i, &u) in live.iter().enumerate() {
        for &w in &live[i + 1..] {
            let edges = [
                g.has_edge(center, u),
                g.has_edge(center, w),
                g.has_edge(u, w),
            ];
            if edges.iter().filter(|&&e| e).count() == 2 {
                count += 1;
            }
        }
    }
    count
}

fn criterion_6() -> Outcome {
    let mut rng = Rng::new(ROOT ^ 6);
    let mut mismatches = 0;
    let mut checks = 0;
    for i in 0..50 {
        let n = 2 + rng.next_below(49) as usize;
        let g = gen_gnp(n, 0.05 + 0.6 * rng.next_f64(), ROOT + i).unwrap();
        for _ in 0..20 {
            let perm = random_permutation(n, &mut rng);
            let (a, trace) = kwik_cluster_traced(&g, &perm).unwrap();
            let mut alive = vec![true; n];
            let mut counted = 0;
            for step in &trace.steps {
                counted += bad_triangles_at(&g, step.center, &alive);
                for &v in &step.members {
                    alive[v as usize] = false;
                }
            }
            checks += 1;
            if counted != disagreements(&g, &a).unwrap().total || counted != trace.total() {
                mismatches += 1;
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checks} traced runs, {mismatches} mismatches"),
    )
}

fn criterion_7() -> Outcome {
    let mut rng = Rng::new(ROOT ^ 7);
    let mut mismatches = 0;
    for i in 0..200 {
        let n = 1 + rng.next_below(200) as usize;
        let g = gen_gnp(n, rng.next_f64() * 0.5, ROOT + i).unwrap();
        let k = 1 + rng.next_below(n as u64);
        let a = Assignment::from_labels((0..n).map(|_| rng.next_below(k) as u32).collect());
        if disagreements(&g, &a).unwrap().total != disagreements_bruteforce(&g, &a).unwrap() {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("200 pairs, {mismatches} mismatches"),
    )
}

fn criterion_8() -> Outcome {
    let build = Instant::now();
    let g = fixture("gnp-1m");
    eprintln!(
        "large fixture n={} m={} built in {:.1?}",
        g.n(),
        g.m(),
        build.elapsed()
    );
    let perm = repetition_permutation(g.n(), ROOT, 0);
    let reps = 3;
    let mut medians = std::collections::BTreeMap::new();
    for variant in [Variant::CwAsync, Variant::C4Async] {
        for p in [1usize, 8] {
            let times: Vec<f64> = (0..reps)
                .map(|r| {
                    let cfg = EngineConfig::new(variant)
                        .threads(p)
                        .seed(sampling_seed(ROOT, r));
                    run(&g, &perm, &cfg).unwrap().1.wall_ns_cluster as f64 / 1e9
                })
                .collect();
            medians.insert((format!("{variant:?}"), p), median(&times));
        }
    }
    let t = |v: &str, p: usize| medians[&(v.to_string(), p)];
    let cw_speedup = t("CwAsync", 1) / t("CwAsync", 8);
    let c4_speedup = t("C4Async", 1) / t("C4Async", 8);
    let cw_faster = t("CwAsync", 8) <= t("C4Async", 8);
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    outcome(
        cw_speedup >= 2.0 && c4_speedup >= 2.0 && cw_faster,
        format!(
            "speedup at P=8: CW async {cw_speedup:.2}x, C4 async {c4_speedup:.2}x (need 2x); \
             P=8 median CW {:.3}s vs C4 {:.3}s; {cores} hardware threads",
            t("CwAsync", 8),
            t("C4Async", 8)
        ),
    )
}

fn criterion_9() -> Outcome {
    let g = fixture("gnp-2000");
    let mut cdk_obj = Vec::new();
    let mut cw_obj = Vec::new();
    let mut cdk_wall = Vec::new();
    let mut cw_wall = Vec::new();
    for r in 0..SEEDS {
        let perm = repetition_permutation(g.n(), ROOT, r);
        let seed = sampling_seed(ROOT, r);
        let (_, cw) = run(
            &g,
            &perm,
            &EngineConfig::new(Variant::CwBsp).epsilon(0.9).seed(seed),
        )
        .unwrap();
        let (_, cdk) = cdk_run(
            &g,
            &CdkConfig {
                epsilon: 0.9,
                seed,
                ..CdkConfig::default()
            },
        )
        .unwrap();
        cw_obj.push(cw.objective as f64);
        cdk_obj.push(cdk.objective as f64);
        cw_wall.push(cw.wall_ns_cluster as f64);
        cdk_wall.push(cdk.wall_ns_cluster as f64);
    }
    let (co, wo) = (median(&cdk_obj), median(&cw_obj));
    let (ct, wt) = (median(&cdk_wall), median(&cw_wall));
    outcome(
        co >= wo && ct >= wt,
        format!(
            "median objective CDK {co} vs CW BSP {wo}; median wall CDK {:.2}ms vs CW BSP {:.2}ms",
            ct / 1e6,
            wt / 1e6
        ),
    )
}

fn timed<T>(f: fn() -> T) -> (T, Duration) {
    let start = Instant::now();
    (f(), start.elapsed())
}

fn main() -> ExitCode {
    let selected: Option<Vec<u32>> = std::env::var("CORCLUST_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let wants = |c: u32| selected.as_ref().is_none_or(|s| s.contains(&c));

    let names = [
        "C4 serializability",
        "serial 3-approximation in expectation",
        "ClusterWild! quality vs serial",
        "round bound",
        "C4 blocked vertices",
        "bad-triangle accounting",
        "objective oracle equivalence",
        "speedup trend",
        "CDK comparison",
    ];
    // Criteria sharing runs report the time of the shared runs.
    let equivalence = (wants(1) || wants(5)).then(|| timed(equivalence_runs));
    let quality = (wants(3) || wants(4)).then(|| timed(quality_runs));
    let mut failed = 0;
    for c in 1..=9u32 {
        if !wants(c) {
            continue;
        }
        let start = Instant::now();
        let shared = match c {
            1 | 5 => equivalence.as_ref().map(|e| e.1),
            3 | 4 => quality.as_ref().map(|q| q.1),
            _ => None,
        };
        let result = match c {
            1 => criterion_1(&equivalence.as_ref().unwrap().0),
            2 => criterion_2(),
            3 => criterion_3(&quality.as_ref().unwrap().0),
            4 => criterion_4(&quality.as_ref().unwrap().0),
            5 => criterion_5(&equivalence.as_ref().unwrap().0),
            6 => criterion_6(),
            7 => criterion_7(),
            8 => criterion_8(),
            _ => criterion_9(),
        };
        if !result.passed {
            failed += 1;
        }
        println!(
            "{} [{c}] {}: {} ({:.1?})",
            if result.passed { "PASS" } else { "FAIL" },
            names[c as usize - 1],
            result.detail,
            shared.unwrap_or_default() + start.elapsed()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
