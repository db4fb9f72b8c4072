use adcsbm::baselines::{
    kmeans, label_propagation, make_few_shot_split, nearest_centroid, KMeansOptions, PropagationOptions, SplitSpec,
};
use adcsbm::features::{build_feature_memberships, EdgeFeatureParams, FeatureMode, Matrix};
use adcsbm::graph::{graph_stats, Graph};
use adcsbm::metrics::{clustering_accuracy, hungarian, nmi, spearman};
use adcsbm::sbm::{
    build_block_matrix, detectability_threshold, sample_degree_propensities, sample_graph, sample_memberships,
    GraphParams,
};
use adcsbm::seeding::stream;
use adcsbm::{generate, GeneratorConfig};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

fn labels(max_k: usize, max_n: usize) -> impl Strategy<Value = Vec<usize>> {
    (1..=max_k).prop_flat_map(move |k| prop::collection::vec(0..k, 1..=max_n))
}

fn pair(max_k: usize, max_n: usize) -> impl Strategy<Value = (Vec<usize>, Vec<usize>)> {
    (1..=max_n, 1..=max_k, 1..=max_k).prop_flat_map(|(n, ka, kb)| {
        (prop::collection::vec(0..ka, n), prop::collection::vec(0..kb, n))
    })
}

fn relabel(x: &[usize], seed: u64) -> Vec<usize> {
    let k = x.iter().max().map_or(0, |m| m + 1);
    let mut names: Vec<usize> = (0..k).map(|c| c + 10).collect();
    names.shuffle(&mut stream(seed, &[]));
    x.iter().map(|&c| names[c]).collect()
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metrics_are_symmetric((a, b) in pair(6, 50)) {
        prop_assert!((nmi(&a, &b).unwrap() - nmi(&b, &a).unwrap()).abs() < 1e-12);
        prop_assert!((clustering_accuracy(&a, &b).unwrap() - clustering_accuracy(&b, &a).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn metrics_ignore_label_names((a, b) in pair(6, 50), seed in any::<u64>()) {
        let a2 = relabel(&a, seed);
        prop_assert!((nmi(&a2, &b).unwrap() - nmi(&a, &b).unwrap()).abs() < 1e-12);
        prop_assert!((clustering_accuracy(&a2, &b).unwrap() - clustering_accuracy(&a, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn self_agreement(a in labels(6, 50)) {
        let distinct = { let mut s = a.clone(); s.sort(); s.dedup(); s.len() };
        if distinct >= 2 {
            prop_assert!((nmi(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        }
        prop_assert_eq!(clustering_accuracy(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn accuracy_at_least_one_over_k((a, b) in pair(6, 50)) {
        // With fewer predicted than true clusters the bound uses the larger
        // count: a = [0, 0], b = [0, 1] scores 1/2.
        let count = |x: &[usize]| { let mut s = x.to_vec(); s.sort(); s.dedup(); s.len() };
        let k = count(&a).max(count(&b));
        prop_assert!(clustering_accuracy(&a, &b).unwrap() >= 1.0 / k as f64 - 1e-12);
    }

    #[test]
    fn hungarian_matches_brute_force(rows in 1usize..=5, extra in 0usize..=2, seed in any::<u64>()) {
        let cols = rows + extra;
        let mut rng = stream(seed, &[]);
        let cost: Vec<f64> = (0..rows * cols).map(|_| rng.random_range(0..20) as f64).collect();
        let assign = hungarian(&cost, rows, cols);
        let got: f64 = assign.iter().enumerate().map(|(r, &c)| cost[r * cols + c]).sum();
        let mut seen = assign.clone();
        seen.sort();
        seen.dedup();
        prop_assert_eq!(seen.len(), rows);
        let best = permutations(cols)
            .iter()
            .map(|p| (0..rows).map(|r| cost[r * cols + p[r]]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        prop_assert_eq!(got, best);
    }

    #[test]
    fn threshold_is_monotone(d in 4.5f64..200.0, k in 2usize..4, step in 0.1f64..5.0) {
        prop_assume!(d / ((k + 1) as f64) > 1.0);
        let t = detectability_threshold(d, k).unwrap();
        prop_assert!(detectability_threshold(d + step, k).unwrap() > t);
        prop_assert!(detectability_threshold(d, k + 1).unwrap() < t);
    }

    #[test]
    fn split_parts_are_disjoint(seed in any::<u64>(), shots in 1usize..5, val in 0usize..5) {
        let mut rng = stream(seed, &[]);
        let labels: Vec<usize> = (0..60).map(|i| i % 3).chain((0..30).map(|_| rng.random_range(0..3))).collect();
        let s = make_few_shot_split(&labels, shots, val, &mut rng).unwrap();
        let mut all: Vec<usize> = s.train.iter().chain(&s.val).chain(&s.test).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..labels.len()).collect::<Vec<_>>());
        for c in 0..3 {
            prop_assert_eq!(s.train.iter().filter(|&&i| labels[i] == c).count(), shots);
        }
    }

    #[test]
    fn nest_and_group_predicates(seed in any::<u64>(), k in 2usize..6, extra in 1usize..8) {
        let a = sample_memberships(200, k, &mut stream(seed, &[0])).unwrap();
        let nest = build_feature_memberships(&a, k + extra, FeatureMode::Nest, &mut stream(seed, &[1])).unwrap();
        // each feature cluster sits inside one graph cluster
        let mut owner = vec![None; k + extra];
        for (&g, &f) in a.labels().iter().zip(&nest.labels) {
            prop_assert!(owner[f].is_none_or(|o| o == g));
            owner[f] = Some(g);
        }
        if k > 2 {
            let k_f = 2 + (extra % (k - 2));
            let group = build_feature_memberships(&a, k_f, FeatureMode::Group, &mut stream(seed, &[2])).unwrap();
            let mut target = vec![None; k];
            for (&g, &f) in a.labels().iter().zip(&group.labels) {
                prop_assert!(target[g].is_none_or(|t| t == f));
                target[g] = Some(f);
            }
        }
    }
}

fn random_orthogonal(dim: usize, seed: u64) -> Vec<f64> {
    let mut rng = stream(seed, &[]);
    let g = DMatrix::<f64>::from_fn(dim, dim, |_, _| rng.sample(StandardNormal));
    let q = g.qr().q();
    (0..dim * dim).map(|i| q[(i / dim, i % dim)]).collect()
}

#[test]
fn kmeans_and_centroid_ignore_rotations() {
    for seed in 0..5 {
        let mut cfg = GeneratorConfig { seed, ..Default::default() };
        cfg.graph.n = 400;
        cfg.features.s = 6;
        cfg.features.sigma_c = 1.0;
        let b = generate(&cfg).unwrap();
        let q = random_orthogonal(6, seed + 100);
        let rotated = b.features.mul_square(&q);

        let opts = KMeansOptions::default();
        let plain = kmeans(&b.features, 4, &opts, &mut stream(seed, &[1])).unwrap();
        let turned = kmeans(&rotated, 4, &opts, &mut stream(seed, &[1])).unwrap();
        assert_eq!(clustering_accuracy(&plain.labels, &turned.labels).unwrap(), 1.0);
        assert!((plain.sse - turned.sse).abs() <= 1e-9 * plain.sse);

        let split = make_few_shot_split(b.labels(), 20, 30, &mut stream(seed, &[2])).unwrap();
        assert_eq!(
            nearest_centroid(&b.features, &split, b.labels()).unwrap(),
            nearest_centroid(&rotated, &split, b.labels()).unwrap()
        );
    }
}

#[test]
fn label_propagation_is_permutation_equivariant() {
    for seed in 0..5 {
        let mut cfg = GeneratorConfig { seed, ..Default::default() }.semi_supervised();
        cfg.graph.n = 500;
        let b = generate(&cfg).unwrap();
        let truth = b.labels();
        let split = make_few_shot_split(truth, 10, 0, &mut stream(seed, &[1])).unwrap();
        let pred = label_propagation(&b.graph, &split, truth, &PropagationOptions::default()).unwrap();

        let n = truth.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut stream(seed, &[2]));
        let graph = b.graph.relabel_nodes(&perm).unwrap();
        let mut labels = vec![0; n];
        for i in 0..n {
            labels[perm[i]] = truth[i];
        }
        let map = |ids: &[usize]| {
            let mut v: Vec<usize> = ids.iter().map(|&i| perm[i]).collect();
            v.sort();
            v
        };
        let moved = SplitSpec {
            n,
            shots: split.shots,
            train: map(&split.train),
            val: map(&split.val),
            test: map(&split.test),
        };
        let pred2 = label_propagation(&graph, &moved, &labels, &PropagationOptions::default()).unwrap();
        for i in 0..n {
            assert_eq!(pred2[perm[i]], pred[i], "node {i}");
        }
    }
}

#[test]
fn degree_follows_propensity() {
    // Fixed memberships and propensities, 20 graph draws: the mean realized
    // degree ranks like theta.
    let params = GraphParams::default();
    let a = sample_memberships(params.n, params.k, &mut stream(1, &[])).unwrap();
    let block = build_block_matrix(&params, a.sizes()).unwrap();
    let theta = sample_degree_propensities(&a, &params.power_law, &mut stream(2, &[])).unwrap();
    let mut mean_degree = vec![0.0; params.n];
    for seed in 0..20 {
        let g = sample_graph(&a, &block, &theta, &mut stream(seed, &[3])).unwrap();
        for (m, d) in mean_degree.iter_mut().zip(g.degrees()) {
            *m += d as f64 / 20.0;
        }
    }
    let rho = spearman(theta.as_slice(), &mean_degree).unwrap();
    assert!(rho >= 0.8, "rank correlation {rho}");
}

#[test]
fn cluster_relabeling_is_exchangeable() {
    // Renaming clusters and permuting D the same way leaves the law of the
    // block-pair counts unchanged.
    let params = GraphParams {
        n: 400,
        ..Default::default()
    };
    let a = sample_memberships(params.n, params.k, &mut stream(5, &[])).unwrap();
    let perm = [2, 0, 3, 1];
    let a2 = a.permute_clusters(&perm).unwrap();
    let block = build_block_matrix(&params, a.sizes()).unwrap();
    let block2 = block.permute(&perm);
    let theta = sample_degree_propensities(&a, &params.power_law, &mut stream(6, &[])).unwrap();
    let seeds = 60;
    let k = params.k;
    let mut m1 = vec![0.0; k * k];
    let mut m2 = vec![0.0; k * k];
    for seed in 0..seeds {
        let g1 = sample_graph(&a, &block, &theta, &mut stream(seed, &[1])).unwrap();
        let g2 = sample_graph(&a2, &block2, &theta, &mut stream(seed, &[2])).unwrap();
        let s1 = graph_stats(&g1, &a).unwrap();
        let s2 = graph_stats(&g2, &a2).unwrap();
        for x in 0..k {
            for y in 0..k {
                m1[x * k + y] += s1.block_pair_counts[x][y] as f64 / seeds as f64;
                m2[x * k + y] += s2.block_pair_counts[perm[x]][perm[y]] as f64 / seeds as f64;
            }
        }
    }
    for i in 0..k * k {
        // counts are near Poisson, so the sd of a mean is sqrt(mean / seeds)
        let se = ((m1[i] + m2[i]) / seeds as f64).sqrt().max(1e-9);
        assert!((m1[i] - m2[i]).abs() <= 4.0 * se, "entry {i}: {} vs {}", m1[i], m2[i]);
    }
}

fn auc(pos: &[f64], neg: &[f64]) -> f64 {
    let mut wins = 0.0;
    for p in pos {
        for q in neg {
            wins += if p > q { 1.0 } else if p == q { 0.5 } else { 0.0 };
        }
    }
    wins / (pos.len() * neg.len()) as f64
}

#[test]
fn edge_feature_separability_grows_with_shift() {
    let grid = [0.0, 0.25, 0.5, 1.0, 2.0];
    let seeds = 20;
    let mut means = Vec::new();
    for &x_e in &grid {
        let mut total = 0.0;
        for seed in 0..seeds {
            let mut cfg = GeneratorConfig { seed, ..Default::default() };
            cfg.graph.n = 300;
            cfg.graph.d_out = 8.0;
            cfg.features.s = 2;
            cfg.edge_features = Some(EdgeFeatureParams { s_e: 4, sigma_e: 1.0, x_e });
            let b = generate(&cfg).unwrap();
            let ef = b.edge_features.unwrap();
            let (mut inter, mut intra) = (Vec::new(), Vec::new());
            for (row, &(u, v)) in ef.iter_rows().zip(b.graph.edges()) {
                let m = row.iter().sum::<f64>() / row.len() as f64;
                if b.assignment.labels()[u] != b.assignment.labels()[v] { inter.push(m) } else { intra.push(m) }
            }
            total += auc(&inter, &intra);
        }
        means.push(total / seeds as f64);
    }
    assert!((means[0] - 0.5).abs() < 0.02, "{means:?}");
    assert!(means.windows(2).all(|w| w[1] >= w[0]), "{means:?}");
    assert!(means[4] > 0.99, "{means:?}");
}

fn mean_kmeans_nmi(sigma_c: f64, seeds: u64) -> f64 {
    (0..seeds)
        .map(|seed| {
            let mut cfg = GeneratorConfig { seed, ..Default::default() };
            cfg.features.sigma_c = sigma_c;
            let b = generate(&cfg).unwrap();
            let fit = kmeans(&b.features, 4, &KMeansOptions::default(), &mut stream(seed, &[9])).unwrap();
            nmi(&fit.labels, b.labels()).unwrap()
        })
        .sum::<f64>()
        / seeds as f64
}

#[test]
fn kmeans_recovers_well_separated_features() {
    let high = mean_kmeans_nmi(3.0, 20);
    let low = mean_kmeans_nmi(0.01, 20);
    assert!(high >= 0.95, "{high}");
    assert!(low <= 0.05, "{low}");
}

#[test]
fn centroid_is_near_chance_without_feature_signal() {
    let mut total = 0.0;
    for seed in 0..20 {
        let mut cfg = GeneratorConfig { seed, ..Default::default() };
        cfg.features.sigma_c = 1e-9;
        let b = generate(&cfg).unwrap();
        let split = make_few_shot_split(b.labels(), 20, 30, &mut stream(seed, &[1])).unwrap();
        let pred = nearest_centroid(&b.features, &split, b.labels()).unwrap();
        total += adcsbm::metrics::classification_accuracy(&pred, b.labels(), &split.test_mask()).unwrap();
    }
    let acc = total / 20.0;
    assert!((acc - 0.25).abs() < 0.03, "{acc}");
}

#[test]
fn relabel_and_rotation_helpers() {
    let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
    assert_eq!(m.mul_square(&[1.0, 0.0, 0.0, 1.0]), m);
    let g = Graph::new(3, [(0, 1)]).unwrap();
    assert_eq!(g.relabel_nodes(&[2, 1, 0]).unwrap().edges(), &[(1, 2)]);
}

#[test]
fn calibrated_spread_rises_with_graph_signal() {
    let mut found = Vec::new();
    for d_out in [8.0, 10.0, 11.0] {
        let mut cfg = GeneratorConfig::default();
        cfg.graph.d_out = d_out;
        let c = adcsbm::calibrate::calibrate_feature_signal(&cfg, 3, 0.02).unwrap();
        assert!(c.converged, "{c:?}");
        found.push((c.graph_nmi, c.sigma_c));
    }
    assert!(found.windows(2).all(|w| w[1].0 < w[0].0 && w[1].1 < w[0].1), "{found:?}");
}
