//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::path::Path;
use std::time::Instant;

use clap::Parser;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dde_circle::dde::{evolve, select, DdeConfig, Transform};
use dde_circle::detector::objective_j;
use dde_circle::evaluation::{
    error_score, generate_synthetic, is_success, match_detections, random_circles,
    random_distractors, SceneSpec, ScoreWeights, Shape,
};
use dde_circle::geometry::{circle_from_points, rasterize_circle, Circle};
use dde_circle::{detect_circle, detect_multiple, save_edge_map, DetectorConfig, EdgeMap, Pixel};
use dde_circle_cli::Cli;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("C1  transform round-trip over [0, 999]", transform_round_trip),
        ("C2  three-point circle recovery", three_point_oracle),
        ("C3  midpoint raster fidelity", midpoint_fidelity),
        ("C4  single-circle synthetic detection", single_circle_detection),
        ("C5  three-circle detection", multi_circle_detection),
        ("C6  circle among distractors", shape_discrimination),
        ("C7  120 degree arc approximation", arc_approximation),
        ("C8  small-instance global optimum", small_instance_optimum),
        ("C9  elitism and selection ties", engine_properties),
        ("C10 benchmark CSV reproducibility", bench_reproducibility),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}

fn transform_round_trip() -> Outcome {
    let tf = Transform { h: 100.0, cap: 1000 };
    let start = Instant::now();
    let failures = (0..=999i64)
        .filter(|&k| tf.backward(tf.forward(k)).ok() != Some(k))
        .count();
    let secs = start.elapsed().as_secs_f64();
    check(
        failures == 0 && secs < 1.0,
        format!("{failures} failures out of 1000 in {secs:.4}s"),
    )
}

fn three_point_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3_C1C1E);
    let mut worst = 0.0f64;
    let mut degenerate = 0;
    for _ in 0..10_000 {
        let r = rng.gen_range(3..=80);
        let (cx, cy) = (rng.gen_range(-200..=200), rng.gen_range(-200..=200));
        let raster = rasterize_circle(&Circle::new(cx as f64, cy as f64, r as f64), 1, 1)
            .map_err(|e| e.to_string())?
            .points;
        let mut raster = raster;
        raster.sort_by(|a, b| {
            let ang = |p: &Pixel| ((p.1 - cy) as f64).atan2((p.0 - cx) as f64);
            ang(a).total_cmp(&ang(b))
        });
        // Three raster points roughly a third of a turn apart.
        let n = raster.len();
        let a = rng.gen_range(0..n);
        let jitter = (n / 12).max(1);
        let pick = |k: usize, rng: &mut ChaCha8Rng| raster[(a + k * n / 3 + rng.gen_range(0..jitter)) % n];
        let (p, q, s) = (raster[a], pick(1, &mut rng), pick(2, &mut rng));
        if p == q || q == s || p == s {
            continue;
        }
        let cross = (q.0 - p.0) as i64 * (s.1 - p.1) as i64 - (s.0 - p.0) as i64 * (q.1 - p.1) as i64;
        match circle_from_points(p, q, s) {
            Ok(c) => {
                let err = (c.x0 - cx as f64)
                    .abs()
                    .max((c.y0 - cy as f64).abs())
                    .max((c.r - r as f64).abs());
                worst = worst.max(err);
            }
            Err(_) if cross != 0 => degenerate += 1,
            Err(_) => {}
        }
    }
    check(
        worst <= 1.0 && degenerate == 0,
        format!("max error {worst:.3} px, {degenerate} false degenerate results"),
    )
}

/// Nearest-pixel first octant: `x = round(sqrt(r² − y²))` while `x ≥ y`.
fn octant_oracle(r: i32) -> Vec<Pixel> {
    let mut out = Vec::new();
    for y in 0.. {
        let x = (((r * r - y * y) as f64).sqrt() + 0.5).floor() as i32;
        if x < y {
            break;
        }
        out.push((x, y));
    }
    out
}

fn reflect_all(cx: i32, cy: i32, octant: &[Pixel]) -> Vec<Pixel> {
    let mut pts: Vec<Pixel> = octant
        .iter()
        .flat_map(|&(x, y)| {
            [
                (x, y),
                (y, x),
                (-y, x),
                (-x, y),
                (-x, -y),
                (-y, -x),
                (y, -x),
                (x, -y),
            ]
        })
        .map(|(x, y)| (cx + x, cy + y))
        .collect();
    pts.sort_unstable();
    pts.dedup();
    pts
}

fn midpoint_fidelity() -> Outcome {
    let (cx, cy) = (40, 37);
    for r in 1..=30 {
        let got = rasterize_circle(&Circle::new(cx as f64, cy as f64, r as f64), 100, 100)
            .map_err(|e| e.to_string())?;
        let mut sorted = got.points.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(format!("r = {r}: duplicate raster points"));
        }
        if sorted != reflect_all(cx, cy, &octant_oracle(r)) {
            return Err(format!("r = {r}: raster differs from the octant oracle"));
        }
        for &(x, y) in &got.points {
            let dev = ((x - cx) as f64).hypot((y - cy) as f64) - r as f64;
            if dev.abs() > 0.75 {
                return Err(format!("r = {r}: point ({x}, {y}) is {dev:.3} px off"));
            }
            let (dx, dy) = (x - cx, y - cy);
            for (u, v) in [(dy, dx), (-dx, dy), (dx, -dy)] {
                if sorted.binary_search(&(cx + u, cy + v)).is_err() {
                    return Err(format!("r = {r}: symmetric image of ({x}, {y}) missing"));
                }
            }
        }
    }
    Ok("30 radii match the oracle, all points within 0.75 px, 8-fold symmetric".into())
}

fn single_circle_scene(index: u64, noise: f64) -> (EdgeMap, Circle) {
    let mut rng = ChaCha8Rng::seed_from_u64(10_000 + index);
    let circles = random_circles(&mut rng, 200, 200, 1, (30, 90), 5.0, 0.0).expect("one circle fits");
    let spec = SceneSpec {
        width: 200,
        height: 200,
        circles: circles.clone(),
        shapes: vec![],
        noise_density: noise,
        margin: 5.0,
    };
    let scene = generate_synthetic(&spec, &mut rng).expect("valid scene");
    (scene.edges, circles[0])
}

fn single_circle_detection() -> Outcome {
    let cfg = DetectorConfig::default();
    let w = ScoreWeights::default();
    let (mut ok, mut total) = (0, 0);
    let mut slowest = 0.0f64;
    for noise in [0.0, 0.03] {
        for image in 0..20 {
            let (edges, truth) = single_circle_scene(image, noise);
            for seed in 0..10 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let start = Instant::now();
                let d = detect_circle(&edges, &cfg, &mut rng).map_err(|e| e.to_string())?;
                slowest = slowest.max(start.elapsed().as_secs_f64());
                total += 1;
                ok += is_success(error_score(&truth, &d.circle, &w)) as usize;
            }
        }
    }
    let rate = 100.0 * ok as f64 / total as f64;
    check(
        rate >= 95.0 && slowest < 1.0,
        format!("{ok}/{total} successful ({rate:.1}%), slowest detection {slowest:.3}s"),
    )
}

fn multi_circle_detection() -> Outcome {
    let w = ScoreWeights::default();
    let cfg = DetectorConfig {
        max_circles: 3,
        ..DetectorConfig::default()
    };
    let (mut ok, mut total) = (0, 0);
    for fixture in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(20_000 + fixture);
        let circles = random_circles(&mut rng, 256, 256, 3, (25, 50), 5.0, 6.0).map_err(|e| e.to_string())?;
        let spec = SceneSpec {
            width: 256,
            height: 256,
            circles: circles.clone(),
            shapes: vec![],
            noise_density: 0.02,
            margin: 5.0,
        };
        let edges = generate_synthetic(&spec, &mut rng).map_err(|e| e.to_string())?.edges;
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let found: Vec<Circle> = detect_multiple(&edges, &cfg, &mut rng)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|d| d.circle)
                .collect();
            let matched = match_detections(&circles, &found, &w);
            total += 1;
            ok += (matched.len() == 3 && matched.iter().all(|m| is_success(m.2))) as usize;
        }
    }
    let rate = 100.0 * ok as f64 / total as f64;
    check(
        rate >= 90.0,
        format!("all three circles recovered in {ok}/{total} fixture runs ({rate:.1}%)"),
    )
}

fn shape_discrimination() -> Outcome {
    let w = ScoreWeights::default();
    let mut cfg = DetectorConfig::default();
    cfg.dde.max_generations = 500;
    let (mut ok, mut total) = (0, 0);
    let mut per_image = Vec::new();
    // Five 540x300 images holding 2, 3, 4, 8 and 11 shapes, one a circle.
    for (image, shapes) in [2usize, 3, 4, 8, 11].into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(30_000 + image as u64);
        let circles = random_circles(&mut rng, 540, 300, 1, (30, 90), 5.0, 0.0).map_err(|e| e.to_string())?;
        let distractors =
            random_distractors(&mut rng, 540, 300, shapes - 1, &circles, 6.0).map_err(|e| e.to_string())?;
        let spec = SceneSpec {
            width: 540,
            height: 300,
            circles: circles.clone(),
            shapes: distractors,
            noise_density: 0.03,
            margin: 5.0,
        };
        let edges = generate_synthetic(&spec, &mut rng).map_err(|e| e.to_string())?.edges;
        let mut hits = 0;
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = detect_circle(&edges, &cfg, &mut rng).map_err(|e| e.to_string())?;
            hits += is_success(error_score(&circles[0], &d.circle, &w)) as usize;
        }
        per_image.push(format!("{hits}/20"));
        ok += hits;
        total += 20;
    }
    let rate = 100.0 * ok as f64 / total as f64;
    check(
        rate >= 95.0,
        format!("{ok}/{total} runs matched the circle ({rate:.1}%); per image {}", per_image.join(" ")),
    )
}

fn arc_approximation() -> Outcome {
    let w = ScoreWeights::default();
    let cfg = DetectorConfig::default();
    let (mut ok, mut total) = (0, 0);
    for fixture in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(40_000 + fixture);
        let circle = random_circles(&mut rng, 200, 200, 1, (30, 80), 5.0, 0.0).map_err(|e| e.to_string())?[0];
        let arc = Shape::Arc {
            circle,
            start: rng.gen_range(0.0..std::f64::consts::TAU),
            sweep: 120f64.to_radians(),
        };
        let edges = EdgeMap::from_points(200, 200, arc.pixels());
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = detect_circle(&edges, &cfg, &mut rng).map_err(|e| e.to_string())?;
            total += 1;
            ok += is_success(error_score(&circle, &d.circle, &w)) as usize;
        }
    }
    let rate = 100.0 * ok as f64 / total as f64;
    check(rate >= 90.0, format!("{ok}/{total} runs recovered the circle ({rate:.1}%)"))
}

/// Objective computed from scratch: circumcircle from the textbook formula,
/// nearest-pixel raster, brute-force window scan. `None` marks a penalized
/// triplet.
fn oracle_j(edges: &EdgeMap, a: Pixel, b: Pixel, c: Pixel, window: i32, min_r: f64) -> Option<f64> {
    let (ax, ay, bx, by, cx, cy) = (a.0 as f64, a.1 as f64, b.0 as f64, b.1 as f64, c.0 as f64, c.1 as f64);
    let d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by));
    if d == 0.0 {
        return None;
    }
    let (sa, sb, sc) = (ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy);
    let ux = (sa * (by - cy) + sb * (cy - ay) + sc * (ay - by)) / d;
    let uy = (sa * (cx - bx) + sb * (ax - cx) + sc * (bx - ax)) / d;
    let r = (ax - ux).hypot(ay - uy);
    let diagonal = (edges.width() as f64).hypot(edges.height() as f64);
    if r < min_r || r > diagonal {
        return None;
    }
    let (px, py, pr) = (ux.round() as i32, uy.round() as i32, r.round() as i32);
    let pts = reflect_all(px, py, &octant_oracle(pr));
    let half = window / 2;
    let hits = pts
        .iter()
        .filter(|&&(x, y)| {
            edges.in_bounds(x, y)
                && edges
                    .points()
                    .iter()
                    .any(|&(ex, ey)| (ex - x).abs() <= half && (ey - y).abs() <= half)
        })
        .count();
    Some(1.0 - hits as f64 / pts.len() as f64)
}

fn small_instance_optimum() -> Outcome {
    let mut cfg = DetectorConfig::default();
    cfg.dde.max_generations = 500;
    let mut worst_hits = usize::MAX;
    let mut per_map = Vec::new();
    for map in 0..5u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(50_000 + map);
        // A partial circle plus scattered points, 12 pixels in total.
        let circle = Circle::new(30.0, 30.0, rng.gen_range(8..=15) as f64);
        let ring = rasterize_circle(&circle, 60, 60).map_err(|e| e.to_string())?.points;
        let mut pts: Vec<Pixel> = Vec::new();
        while pts.len() < 7 {
            let p = ring[rng.gen_range(0..ring.len())];
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        while pts.len() < 12 {
            let p = (rng.gen_range(0..60), rng.gen_range(0..60));
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let edges = EdgeMap::from_points(60, 60, pts);
        let p = edges.points();
        let mut global = f64::INFINITY;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                for k in j + 1..p.len() {
                    let oracle = oracle_j(&edges, p[i], p[j], p[k], cfg.window as i32, cfg.min_radius);
                    let engine = objective_j([i as i64 + 1, j as i64 + 1, k as i64 + 1], &edges, &cfg);
                    match oracle {
                        Some(v) if (v - engine).abs() < 1e-12 => global = global.min(v),
                        None if engine == cfg.dde.penalty_cost => {}
                        _ => {
                            return Err(format!(
                                "map {map}: objective {engine} disagrees with oracle {oracle:?} at ({i}, {j}, {k})"
                            ))
                        }
                    }
                }
            }
        }
        let mut hits = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = detect_circle(&edges, &cfg, &mut rng).map_err(|e| e.to_string())?;
            hits += (d.objective <= global + 0.05) as usize;
        }
        per_map.push(format!("{hits}/10"));
        worst_hits = worst_hits.min(hits);
    }
    check(
        worst_hits >= 9,
        format!(
            "objective matches the oracle on every triplet; seeds within 0.05 of the optimum per map: {}",
            per_map.join(" ")
        ),
    )
}

fn engine_properties() -> Outcome {
    let cfg = DdeConfig {
        lower_bound: 1,
        upper_bound: 200,
        max_generations: 60,
        ..DdeConfig::default()
    };
    let toy = |v: &[i64]| {
        let d: f64 = v
            .iter()
            .zip([37i64, 150, 88])
            .map(|(&a, b)| ((a - b) as f64).abs())
            .sum();
        d / 600.0
    };
    let mut violations = 0;
    for seed in 0..1000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let res = evolve(&toy, &cfg, &mut rng).map_err(|e| e.to_string())?;
        violations += res.objective_trace.windows(2).filter(|w| w[1] > w[0]).count();
    }
    let tie_keeps_trial = select("target", "trial", 0.5, 0.5).0 == "trial";
    check(
        violations == 0 && tie_keeps_trial,
        format!("{violations} trace increases over 1000 runs, tie keeps trial: {tie_keeps_trial}"),
    )
}

fn write_fixture(dir: &Path, name: &str, spec: &SceneSpec, seed: u64) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scene = generate_synthetic(spec, &mut rng).map_err(|e| e.to_string())?;
    save_edge_map(&scene.edges, dir.join(format!("{name}.pbm"))).map_err(|e| e.to_string())?;
    let truth = serde_json::to_string_pretty(&scene.truth).map_err(|e| e.to_string())?;
    std::fs::write(dir.join(format!("{name}.json")), truth).map_err(|e| e.to_string())
}

fn bench_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let suite = dir.path().join("suite");
    std::fs::create_dir(&suite).map_err(|e| e.to_string())?;
    let scene = |circles: Vec<Circle>| SceneSpec {
        width: 160,
        height: 160,
        circles,
        shapes: vec![],
        noise_density: 0.02,
        margin: 5.0,
    };
    write_fixture(&suite, "one", &scene(vec![Circle::new(80.0, 80.0, 40.0)]), 1)?;
    write_fixture(
        &suite,
        "two",
        &scene(vec![Circle::new(45.0, 45.0, 30.0), Circle::new(115.0, 115.0, 30.0)]),
        2,
    )?;
    let seeds = dir.path().join("seeds.txt");
    std::fs::write(&seeds, "11 22 33 44 55 66\n").map_err(|e| e.to_string())?;

    // Each invocation parses a fresh command line and runs the `bench`
    // command exactly as the binary does.
    let run = |out: &str| -> Result<Vec<u8>, String> {
        let csv = dir.path().join(out);
        let path = |p: &Path| p.to_string_lossy().into_owned();
        let argv = [
            "dde-circle".to_string(),
            "bench".into(),
            "--runs".into(),
            "6".into(),
            "--no-timing".into(),
            "--suite".into(),
            path(&suite),
            "--seeds".into(),
            path(&seeds),
            "--csv".into(),
            path(&csv),
        ];
        let cli = Cli::try_parse_from(argv).map_err(|e| e.to_string())?;
        match dde_circle_cli::run(cli) {
            Ok(0) => std::fs::read(&csv).map_err(|e| e.to_string()),
            Ok(code) => Err(format!("bench exited with {code}")),
            Err(f) => Err(format!("bench failed with {}: {}", f.code, f.message)),
        }
    };
    let (a, b) = (run("a.csv")?, run("b.csv")?);
    let rows = String::from_utf8_lossy(&a).lines().count().saturating_sub(1);
    check(a == b && rows == 2, format!("two invocations, {rows} rows, identical: {}", a == b))
}
