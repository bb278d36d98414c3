use dde_circle::evaluation::{generate_synthetic, run_benchmark, BenchCase, BenchOptions, SceneSpec};
use dde_circle::{
    detect_circle, error_score, is_success, rasterize_circle, Circle, DetectorConfig, EdgeMap, ScoreWeights,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn circle() -> impl Strategy<Value = Circle> {
    (-100.0f64..300.0, -100.0f64..300.0, 1.0f64..150.0).prop_map(|(x, y, r)| Circle::new(x, y, r))
}

fn spec(circles: Vec<Circle>, noise: f64) -> SceneSpec {
    SceneSpec {
        width: 200,
        height: 200,
        circles,
        shapes: vec![],
        noise_density: noise,
        margin: 5.0,
    }
}

proptest! {
    #[test]
    fn error_score_is_symmetric(a in circle(), b in circle(), eta in 0.0f64..2.0, mu in 0.0f64..2.0) {
        let w = ScoreWeights { eta, mu };
        prop_assert_eq!(error_score(&a, &b, &w), error_score(&b, &a, &w));
    }

    #[test]
    fn error_score_is_linear_in_weights(a in circle(), b in circle(), eta in 0.0f64..2.0, mu in 0.0f64..2.0, k in 0.0f64..10.0) {
        let base = error_score(&a, &b, &ScoreWeights { eta, mu });
        let scaled = error_score(&a, &b, &ScoreWeights { eta: k * eta, mu: k * mu });
        prop_assert!((scaled - k * base).abs() <= 1e-9 * (1.0 + scaled.abs()));
        let split = error_score(&a, &b, &ScoreWeights { eta, mu: 0.0 }) + error_score(&a, &b, &ScoreWeights { eta: 0.0, mu });
        prop_assert!((split - base).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn identical_circles_always_succeed(c in circle(), eta in 0.0f64..100.0, mu in 0.0f64..100.0) {
        let w = ScoreWeights { eta, mu };
        prop_assert!(is_success(error_score(&c, &c, &w)));
    }
}

#[test]
fn error_score_reference_cases() {
    let w = ScoreWeights::default();
    let truth = Circle::new(100.0, 100.0, 40.0);
    assert!((error_score(&truth, &Circle::new(100.0, 100.0, 50.0), &w) - 1.0).abs() < 1e-12);
    assert!(!is_success(error_score(&truth, &Circle::new(100.0, 100.0, 50.0), &w)));
    assert!((error_score(&truth, &Circle::new(120.0, 100.0, 40.0), &w) - 1.0).abs() < 1e-12);
    assert!(is_success(error_score(&truth, &Circle::new(119.0, 100.0, 40.0), &w)));
}

#[test]
fn noise_count_follows_the_binomial_law() {
    let c = Circle::new(100.0, 100.0, 40.0);
    let p = 0.03;
    let drawn = rasterize_circle(&c, 200, 200).unwrap().ns() as f64;
    let total = 200.0 * 200.0;
    let mean = drawn * (1.0 - p) + (total - drawn) * p;
    let sigma = (total * p * (1.0 - p)).sqrt();
    for seed in 0..5 {
        let np = generate_synthetic(&spec(vec![c], p), &mut rng(seed)).unwrap().edges.np() as f64;
        assert!((np - mean).abs() < 3.0 * sigma, "seed {seed}: np {np}, expected {mean} ± {sigma}");
    }
}

#[test]
fn overlapping_circles_share_pixels() {
    let a = Circle::new(80.0, 100.0, 40.0);
    let b = Circle::new(110.0, 100.0, 40.0);
    let edges = generate_synthetic(&spec(vec![a, b], 0.0), &mut rng(0)).unwrap().edges;
    let union = EdgeMap::from_points(
        200,
        200,
        rasterize_circle(&a, 200, 200)
            .unwrap()
            .points
            .into_iter()
            .chain(rasterize_circle(&b, 200, 200).unwrap().points),
    );
    assert_eq!(edges, union);
    let sum = rasterize_circle(&a, 200, 200).unwrap().ns() + rasterize_circle(&b, 200, 200).unwrap().ns();
    assert!(edges.np() < sum);
}

fn case(name: &str, circles: Vec<Circle>, noise: f64, seed: u64) -> BenchCase {
    let scene = generate_synthetic(&spec(circles, noise), &mut rng(seed)).unwrap();
    BenchCase {
        name: name.into(),
        edges: scene.edges,
        truth: scene.truth,
    }
}

fn untimed(seeds: Vec<u64>, parallel: bool) -> BenchOptions {
    BenchOptions {
        parallel,
        timing: false,
        ..BenchOptions::new(seeds)
    }
}

#[test]
fn perfect_circle_benchmark_always_succeeds() {
    let suite = [case("perfect", vec![Circle::new(100.0, 100.0, 40.0)], 0.0, 0)];
    let report = run_benchmark(&suite, &DetectorConfig::default(), &BenchOptions::new((0..10).collect())).unwrap();
    let row = &report.rows[0];
    assert_eq!(row.runs, 10);
    assert_eq!(row.success_rate_pct, 100.0);
    assert!(row.mean_es < 0.2, "{row:?}");
    assert!(row.mean_time_s > 0.0);
}

#[test]
fn single_run_has_zero_spread() {
    let suite = [case("one", vec![Circle::new(90.0, 95.0, 35.0)], 0.01, 3)];
    let report = run_benchmark(&suite, &DetectorConfig::default(), &BenchOptions::new(vec![42])).unwrap();
    assert_eq!(report.rows[0].std_time_s, 0.0);
    assert_eq!(report.rows[0].std_es, 0.0);
}

#[test]
fn benchmark_replays_exactly() {
    let suite = [
        case("a", vec![Circle::new(100.0, 100.0, 40.0)], 0.03, 1),
        case("b", vec![Circle::new(60.0, 60.0, 30.0), Circle::new(140.0, 140.0, 35.0)], 0.02, 2),
    ];
    let cfg = DetectorConfig::default();
    let seeds: Vec<u64> = (100..108).collect();
    let a = run_benchmark(&suite, &cfg, &untimed(seeds.clone(), true)).unwrap();
    let b = run_benchmark(&suite, &cfg, &untimed(seeds.clone(), true)).unwrap();
    let c = run_benchmark(&suite, &cfg, &untimed(seeds, false)).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a.to_csv(), c.to_csv());
    assert_eq!(a.rows[1].runs, 8);
}

#[test]
fn benchmark_needs_a_seed() {
    let suite = [case("a", vec![Circle::new(100.0, 100.0, 40.0)], 0.0, 1)];
    assert!(run_benchmark(&suite, &DetectorConfig::default(), &BenchOptions::new(vec![])).is_err());
}

#[test]
fn error_grows_with_noise() {
    let truth = Circle::new(100.0, 100.0, 40.0);
    let cfg = DetectorConfig::default();
    let w = ScoreWeights::default();
    let means: Vec<f64> = [0.0, 0.03, 0.06]
        .iter()
        .map(|&noise| {
            let total: f64 = (0..50)
                .map(|s| {
                    let edges = generate_synthetic(&spec(vec![truth], noise), &mut rng(1000 + s)).unwrap().edges;
                    let det = detect_circle(&edges, &cfg, &mut rng(s)).unwrap();
                    error_score(&truth, &det.circle, &w)
                })
                .sum();
            total / 50.0
        })
        .collect();
    let inversions = means.windows(2).filter(|m| m[1] < m[0]).count();
    assert!(inversions <= 1, "mean Es by noise: {means:?}");
}
