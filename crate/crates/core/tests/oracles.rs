use corclust::graph::gen_gnp;
use corclust::ordering::random_permutation;
use corclust::quality::{count_bad_triangles, disagreements};
use corclust::serial::{brute_force_opt, kwik_cluster, kwik_cluster_traced};
use corclust::{Graph, Permutation, Rng};

/// Bad triangles that contain `center` among the vertices in `alive`.
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

#[test]
fn peel_cost_equals_bad_triangles_at_the_center() {
    let mut rng = Rng::new(0xbad);
    for graph_index in 0..50 {
        let n = 5 + rng.next_below(46) as usize;
        let g = gen_gnp(n, 0.1 + 0.5 * rng.next_f64(), graph_index).unwrap();
        for _ in 0..20 {
            let perm = random_permutation(n, &mut rng);
            let (a, trace) = kwik_cluster_traced(&g, &perm).unwrap();
            let mut alive = vec![true; n];
            let mut independent = 0;
            for step in &trace.steps {
                let cost = bad_triangles_at(&g, step.center, &alive);
                assert_eq!(step.increment(), cost);
                independent += cost;
                for &v in &step.members {
                    alive[v as usize] = false;
                }
            }
            assert_eq!(trace.total(), disagreements(&g, &a).unwrap().total);
            assert_eq!(independent, trace.total());
        }
    }
}

#[test]
fn serial_objective_is_at_most_bad_triangle_count_bound() {
    // Every disagreement is charged to a bad triangle, so the objective
    // never exceeds the total number of bad triangles.
    for seed in 0..20 {
        let g = gen_gnp(30, 0.3, seed).unwrap();
        let bad = count_bad_triangles(&g).count;
        let perm = random_permutation(30, &mut Rng::new(seed));
        assert!(
            disagreements(&g, &kwik_cluster(&g, &perm).unwrap())
                .unwrap()
                .total
                <= bad
        );
    }
}

#[test]
fn serial_is_three_approximate_in_expectation() {
    for seed in 0..6 {
        let g = gen_gnp(8, 0.5, seed).unwrap();
        let (opt, best) = brute_force_opt(&g).unwrap();
        assert_eq!(disagreements(&g, &best).unwrap().total, opt);
        let samples: Vec<f64> = (0..4000)
            .map(|s| {
                let perm = random_permutation(8, &mut Rng::new(s));
                disagreements(&g, &kwik_cluster(&g, &perm).unwrap())
                    .unwrap()
                    .total as f64
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var =
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
        assert!(mean <= 3.0 * opt as f64 + 3.0 * (var / samples.len() as f64).sqrt());
        assert!(mean >= opt as f64);
    }
}

#[test]
fn every_permutation_of_the_bad_triangle_costs_one() {
    let g = Graph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
    for order in [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ] {
        let perm = Permutation::from_order(order.to_vec()).unwrap();
        assert_eq!(
            disagreements(&g, &kwik_cluster(&g, &perm).unwrap())
                .unwrap()
                .total,
            1
        );
    }
}
