use corclust::cdk::{cdk_run, CdkConfig};
use corclust::engine::run;
use corclust::graph::{gen_gnp, gen_planted};
use corclust::ordering::random_permutation;
use corclust::quality::disagreements;
use corclust::serial::kwik_cluster;
use corclust::{EngineConfig, Rng, Variant};

#[test]
fn c4_async_matches_serial_on_many_permutations() {
    let g = gen_gnp(2000, 0.01, 7).unwrap();
    for seed in 0..10 {
        let perm = random_permutation(g.n(), &mut Rng::new(seed));
        let serial = kwik_cluster(&g, &perm).unwrap().canonical();
        for threads in [1, 2, 4, 8] {
            let (a, _) = run(
                &g,
                &perm,
                &EngineConfig::new(Variant::C4Async).threads(threads),
            )
            .unwrap();
            assert_eq!(a.canonical(), serial, "seed {seed} threads {threads}");
        }
    }
}

#[test]
fn c4_bsp_matches_serial_on_planted_partition() {
    let g = gen_planted(2000, 20, 0.3, 0.005, 7).unwrap();
    for seed in 0..5 {
        let perm = random_permutation(g.n(), &mut Rng::new(seed));
        let serial = kwik_cluster(&g, &perm).unwrap().canonical();
        for eps in [0.1, 0.5, 0.9] {
            let cfg = EngineConfig::new(Variant::C4Bsp)
                .epsilon(eps)
                .threads(4)
                .seed(seed);
            let (a, report) = run(&g, &perm, &cfg).unwrap();
            assert_eq!(a.canonical(), serial);
            assert_eq!(report.batch_sizes.iter().sum::<u64>() as usize, g.n());
        }
    }
}

#[test]
fn cw_stays_close_to_serial() {
    let g = gen_gnp(2000, 0.005, 3).unwrap();
    let perm = random_permutation(g.n(), &mut Rng::new(1));
    let serial = disagreements(&g, &kwik_cluster(&g, &perm).unwrap())
        .unwrap()
        .total as f64;
    for variant in [Variant::CwBsp, Variant::CwAsync] {
        let (_, report) = run(&g, &perm, &EngineConfig::new(variant).threads(4)).unwrap();
        assert!((report.objective as f64) < 1.2 * serial, "{variant:?}");
    }
}

#[test]
fn cdk_produces_a_valid_partition() {
    let g = gen_gnp(2000, 0.01, 7).unwrap();
    let (a, report) = cdk_run(
        &g,
        &CdkConfig {
            threads: 4,
            ..CdkConfig::default()
        },
    )
    .unwrap();
    a.check_complete().unwrap();
    assert_eq!(report.objective, disagreements(&g, &a).unwrap().total);
    assert!(!report.straggler_fallback);
}
