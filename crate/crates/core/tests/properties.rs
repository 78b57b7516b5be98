use graphmetric::graphon::{graphon_distance, step_graphon, EstimatorConfig, Graphon, PathFunction};
use graphmetric::metric::{exp_complement, log_domain_transform, weighted_product_distance, ExponentVector};
use graphmetric::{
    distance_distribution, experiment, Digraph, DistanceTable, ElementalMetric, Metric, SampleSource, SampleSpec,
    Space, VertexSet, WeightedDigraph,
};
use num_complex::Complex;
use proptest::prelude::*;

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Digraph> {
    (1..=max_n).prop_flat_map(|n| {
        (
            Just(n),
            proptest::collection::vec(proptest::option::weighted(0.35, 0.01f64..=1.0), n * n),
            any::<bool>(),
        )
            .prop_map(|(n, cells, implicit)| {
                let edges = cells.into_iter().enumerate().filter_map(|(k, p)| p.map(|p| (k / n, k % n, p)));
                Digraph::from_edges(n, implicit, edges).unwrap()
            })
    })
}

fn graph_with_points(max_n: usize, count: usize) -> impl Strategy<Value = (Digraph, Vec<Vec<f64>>)> {
    graph_strategy(max_n).prop_flat_map(move |g| {
        let n = g.n();
        (Just(g), proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, n), count))
    })
}

fn reachability(n: usize, g: &Digraph) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (j, row) in r.iter_mut().enumerate() {
        row[j] = true;
    }
    for (j, i, _) in g.edges() {
        r[j][i] = true;
    }
    // Warshall
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                r[a][b] = r[a][b] || (r[a][k] && r[k][b]);
            }
        }
    }
    r
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn half_absolute_triangle(a in 0.0f64..=1.0, b in 0.0f64..=1.0, c in 0.0f64..=1.0) {
        let m = Metric::HalfAbsolute;
        prop_assert!(m.evaluate(a, c) <= m.evaluate(a, b) + m.evaluate(b, c) + 1e-15);
        prop_assert_eq!(m.evaluate(a, b), m.evaluate(b, a));
        prop_assert!((0.0..=1.0).contains(&m.evaluate(a, b)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn product_metric_axioms(
        (xs, a) in (1usize..=6).prop_flat_map(|n| (
            proptest::collection::vec(proptest::collection::vec(0.0f64..=1.0, n), 3),
            proptest::collection::vec(1.0f64..50.0, n),
        ))
    ) {
        let n = a.len();
        let metrics = vec![ElementalMetric::HalfAbsolute; n];
        let a = ExponentVector::new(a).unwrap();
        let d = |x: &[f64], y: &[f64]| weighted_product_distance(x, y, &metrics, &a).unwrap();
        let (x, y, z) = (&xs[0], &xs[1], &xs[2]);
        prop_assert_eq!(d(x, x), 0.0);
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-12);
        prop_assert!(x == y || d(x, y) > 0.0);
    }

    #[test]
    fn complement_is_subadditive_and_inverts_the_log(s in 0.0f64..40.0, t in 0.0f64..40.0, v in 0.0f64..0.999_999) {
        prop_assert!(exp_complement(s + t) <= exp_complement(s) + exp_complement(t) + 1e-15);
        prop_assert!((exp_complement(log_domain_transform(v).unwrap()) - v).abs() <= 1e-12);
    }

    #[test]
    fn joint_metric_axioms((g, pts) in graph_with_points(7, 3)) {
        let s = Space::uniform(g, Metric::HalfAbsolute);
        let d = |x: &[f64], y: &[f64]| s.joint_distance(x, y).unwrap();
        let (x, y, z) = (&pts[0], &pts[1], &pts[2]);
        prop_assert_eq!(d(x, x), 0.0);
        prop_assert_eq!(d(x, y), d(y, x));
        prop_assert!((0.0..=1.0).contains(&d(x, y)));
        prop_assert!(d(x, z) <= d(x, y) + d(y, z) + 1e-12);
    }

    #[test]
    fn f32_tracks_f64((g, pts) in graph_with_points(6, 2)) {
        let s64 = Space::uniform(g.clone(), Metric::HalfAbsolute);
        let edges: Vec<(usize, usize, f32)> = g.edges().map(|(j, i, p)| (j, i, p as f32)).collect();
        let g32 = WeightedDigraph::<f32>::from_edges(g.n(), g.implicit_self_loops(), edges).unwrap();
        let s32 = graphmetric::JointMetricSpace::uniform(g32, ElementalMetric::<f32>::HalfAbsolute);
        let to32 = |v: &[f64]| v.iter().map(|&c| c as f32).collect::<Vec<_>>();
        let d64 = s64.joint_distance(&pts[0], &pts[1]).unwrap();
        let d32 = s32.joint_distance(&to32(&pts[0]), &to32(&pts[1])).unwrap();
        prop_assert!((f64::from(d32) - d64).abs() < 1e-4, "{} vs {}", d32, d64);
    }

    #[test]
    fn closure_is_extensive_monotone_idempotent(
        g in graph_strategy(7),
        a_bits in any::<u8>(),
        extra_bits in any::<u8>(),
    ) {
        let n = g.n();
        let set = |bits: u8| (0..n).filter(|&v| bits >> v & 1 == 1).collect::<VertexSet>();
        let a = set(a_bits);
        let b = set(a_bits | extra_bits);
        let ca = g.hereditary_closure(&a).unwrap();
        prop_assert!(a.is_subset(&ca));
        prop_assert!(ca.is_subset(&g.hereditary_closure(&b).unwrap()));
        prop_assert_eq!(g.hereditary_closure(&ca).unwrap(), ca.clone());

        let r = reachability(n, &g);
        let oracle: VertexSet = (0..n).filter(|&j| a.iter().any(|i| r[j][i])).collect();
        prop_assert_eq!(ca, oracle);
    }

    #[test]
    fn transitive_closure_matches_warshall(g in graph_strategy(7)) {
        let n = g.n();
        let t = g.transitive_closure();
        let r = reachability(n, &g);
        for (j, row) in r.iter().enumerate() {
            for (i, &reachable) in row.iter().enumerate() {
                if j != i {
                    prop_assert_eq!(t.has_explicit_edge(j, i), reachable, "({}, {})", j, i);
                }
            }
        }
        prop_assert_eq!(t.transitive_closure(), t);
    }

    #[test]
    fn product_edge_count(g1 in graph_strategy(5), g2 in graph_strategy(5)) {
        let p = g1.cartesian_product(&g2);
        prop_assert_eq!(p.n(), g1.n() * g2.n());
        prop_assert_eq!(
            p.non_self_edge_count(),
            g1.n() * g2.non_self_edge_count() + g2.n() * g1.non_self_edge_count()
        );
    }

    #[test]
    fn disjoint_union_is_block_diagonal(g1 in graph_strategy(5), g2 in graph_strategy(5)) {
        let u = g1.disjoint_union(&g2);
        let n1 = g1.n();
        let w = u.weight_matrix();
        for (j, row) in w.iter().enumerate() {
            for (i, &p) in row.iter().enumerate() {
                if (j < n1) != (i < n1) {
                    prop_assert_eq!(p, 0.0);
                }
            }
        }
    }

    #[test]
    fn adding_an_edge_never_lowers_any_pair(
        (g, pts) in graph_with_points(6, 2),
        j in 0usize..6,
        i in 0usize..6,
        p in 0.01f64..=1.0,
    ) {
        let (j, i) = (j % g.n(), i % g.n());
        prop_assume!(!g.has_explicit_edge(j, i) && !(j == i && g.implicit_self_loops()));
        let bigger = g.apply_edit(graphmetric::Edit::AddEdge { j, i, p }).unwrap();
        let d = |g: Digraph| Space::uniform(g, Metric::HalfAbsolute).joint_distance(&pts[0], &pts[1]).unwrap();
        prop_assert!(d(g) <= d(bigger) + 1e-12);
    }

    #[test]
    fn finite_tables_satisfy_the_triangle_inequality(
        pts in proptest::collection::vec((0.0f64..=1.0, 0.0f64..=1.0), 2..6)
    ) {
        // Euclidean distances between plane points, rescaled into [0, 1]
        let n = pts.len();
        let raw: Vec<f64> = (0..n * n)
            .map(|k| {
                let (a, b) = (pts[k / n], pts[k % n]);
                ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
            })
            .collect();
        let entries: Vec<f64> = raw.iter().map(|v| v / 2f64.sqrt()).collect();
        let t = DistanceTable::new(n, entries).unwrap();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    prop_assert!(t.get(a, c) <= t.get(a, b) + t.get(b, c) + 1e-12);
                }
            }
        }
        let back = DistanceTable::<f64>::from_csv_str(&t.to_csv_string()).unwrap();
        prop_assert_eq!(back.entries(), t.entries());
    }
}

fn piecewise(values: &[f64]) -> PathFunction<f64> {
    PathFunction::uniform_steps(values.iter().map(|&v| Complex::new(v, 0.0)).collect()).unwrap()
}

#[test]
fn grid_on_a_step_graphon_matches_the_cellwise_sum() {
    let g = Digraph::from_edges(3, true, [(0, 1, 0.4), (1, 0, 0.4), (1, 2, 0.9), (2, 1, 0.9), (0, 0, 0.5)]).unwrap();
    let floor = 0.05;
    let w = step_graphon(&g, floor).unwrap();
    let (gf, hf) = (piecewise(&[0.1, 0.8, 0.3]), piecewise(&[0.6, 0.2, 0.35]));
    let est = graphon_distance(&w, &gf, &hf, &EstimatorConfig::grid(3 * 40)).unwrap();

    let cell = |a: usize, b: usize| g.weight(a, b).unwrap_or(floor);
    let log_term: Vec<f64> = [(0.1, 0.6), (0.8, 0.2), (0.3, 0.35)]
        .iter()
        .map(|(u, v): &(f64, f64)| (1.0 - (u - v).abs() / 2.0).ln())
        .collect();
    let outer: f64 = (0..3)
        .map(|a| ((0..3).map(|b| log_term[b] / cell(a, b)).sum::<f64>() / 3.0).exp())
        .sum::<f64>()
        / 3.0;
    let closed = 1.0 - outer;
    assert!((est.estimate - closed).abs() < 1e-10, "{} vs {closed}", est.estimate);
}

#[test]
fn monte_carlo_covers_a_nonconstant_case() {
    let g = Digraph::from_edges(2, true, [(0, 1, 0.6), (1, 0, 0.6)]).unwrap();
    let w = step_graphon(&g, 0.3).unwrap();
    let (gf, hf) = (piecewise(&[0.0, 0.9, 0.4, 0.2]), piecewise(&[0.5, 0.1, 0.4, 1.0]));
    let truth = graphon_distance(&w, &gf, &hf, &EstimatorConfig::grid(4 * 64)).unwrap().estimate;
    let mut covered = 0;
    for seed in 0..100 {
        let e = graphon_distance(&w, &gf, &hf, &EstimatorConfig::monte_carlo(400, seed)).unwrap();
        let se = e.std_error.unwrap();
        assert!(se > 0.0);
        if (e.estimate - truth).abs() <= 4.0 * se {
            covered += 1;
        }
    }
    assert!(covered >= 95, "covered {covered} of 100");
}

#[test]
fn graphon_distance_grows_as_the_kernel_shrinks() {
    let (gf, hf) = (piecewise(&[0.1, 0.9]), piecewise(&[0.7, 0.2]));
    let cfg = EstimatorConfig::grid(64);
    let mut last = 0.0;
    for c in [1.0, 0.8, 0.5, 0.3, 0.1] {
        let d = graphon_distance(&Graphon::constant(c).unwrap(), &gf, &hf, &cfg).unwrap().estimate;
        assert!(d >= last, "W = {c}: {d} < {last}");
        last = d;
    }
}

#[test]
fn exhaustive_distribution_matches_a_hamming_enumeration() {
    // null graph on 5 cube vertices: d = Hamming weight of g xor h over 5
    let s = SampleSource::CubeVertices.space(Digraph::null(5).unwrap());
    let spec = SampleSpec::new(SampleSource::CubeVertices, 1, 0);
    let d = distance_distribution(&s, &spec, 5).unwrap();
    let mut oracle = vec![0u64; 5];
    for g in 0u32..32 {
        for h in 0u32..32 {
            let w = (g ^ h).count_ones() as usize;
            oracle[(w * 5 / 5).min(4)] += 1;
        }
    }
    assert_eq!(d.counts, oracle);
    assert_eq!(d.count, 1024);
}

#[test]
fn nested_graphs_shift_the_mean_right() {
    let small = Digraph::from_edges(4, true, [(0, 1, 1.0)]).unwrap();
    let big = Digraph::from_edges(4, true, [(0, 1, 1.0), (1, 2, 1.0), (3, 0, 1.0)]).unwrap();
    let spec = SampleSpec::new(SampleSource::CubeVolume, 4000, 8);
    let a = distance_distribution(&SampleSource::CubeVolume.space(small), &spec, 32).unwrap();
    let b = distance_distribution(&SampleSource::CubeVolume.space(big), &spec, 32).unwrap();
    assert!(a.mean < b.mean);
    for s in [&a, &b] {
        assert_eq!(s.counts.iter().sum::<u64>(), s.count);
        assert!(s.min <= s.mean && s.mean <= s.max);
    }
}

#[test]
fn complete_graph_log_ratio_is_the_hand_value() {
    // g = (0, 1), h = (1, 0) on K2: d_full = 0.75, d_null = 0.5
    let s = Space::uniform(
        graphmetric::generate(&graphmetric::GraphKind::Complete { n: 2 }, 1.0).unwrap(),
        Metric::HalfAbsolute,
    );
    let refs = s.reference_distances(&[0.0, 1.0], &[1.0, 0.0]).unwrap();
    assert!(((refs.d_full / refs.d_null).ln() - 1.5f64.ln()).abs() < 1e-15);

    let spec = SampleSpec::new(SampleSource::CubeVolume, 3000, 2);
    let r = graphmetric::log_distance_ratio_distribution(&s, &spec, 16).unwrap();
    assert!(r.min >= 0.0);
    assert_eq!(r.count + r.excluded, 3000);
}

#[test]
fn json_export_has_the_documented_fields() {
    let s = SampleSource::CubeVolume.space(Digraph::null(3).unwrap());
    let d = distance_distribution(&s, &SampleSpec::new(SampleSource::CubeVolume, 100, 1), 4).unwrap();
    let v: serde_json::Value = serde_json::from_str(&d.to_json_string()).unwrap();
    for key in ["provenance", "bin_edges", "counts", "mean", "variance", "min", "max", "count", "excluded"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["bin_edges"].as_array().unwrap().len(), 5);
    assert_eq!(v["provenance"]["seed"], 1);
    let back: experiment::DistributionSummary = serde_json::from_value(v).unwrap();
    assert_eq!(back, d);
}

#[test]
fn export_writes_files_and_reports_bad_paths() {
    let dir = tempfile::tempdir().unwrap();
    let s = SampleSource::CubeVolume.space(Digraph::null(2).unwrap());
    let d = distance_distribution(&s, &SampleSpec::new(SampleSource::CubeVolume, 50, 1), 4).unwrap();
    let path = dir.path().join("h.csv");
    d.export(graphmetric::ExportFormat::Csv, &path).unwrap();
    let rows = experiment::parse_csv_counts(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rows.iter().map(|r| r.2).sum::<u64>(), 50);
    let bad = dir.path().join("missing").join("h.svg");
    let err = d.export(graphmetric::ExportFormat::Svg, &bad).unwrap_err();
    assert!(err.to_string().contains("missing"));
}
