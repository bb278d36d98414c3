use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use dde_circle::detector::{detect_multiple, DetectError};
use dde_circle::evaluation::{
    generate_synthetic, random_circles, random_distractors, run_benchmark, BenchCase, BenchOptions,
    GroundTruth, SceneSpec, SynthError,
};
use dde_circle::pnm::{self, Encoding};
use dde_circle::{
    canny_edges, load_edge_map, load_gray_image, save_edge_map, CannyParams, Circle,
    DetectorConfig, EdgeMap,
};

use crate::document::{DetectionRecord, ResultDocument};
use crate::{BenchArgs, CannyArgs, Cli, Command, DetectArgs, EdgesArgs, SynthArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_CIRCLE: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_INSUFFICIENT_EDGES: u8 = 3;
pub const EXIT_GENERATION: u8 = 4;
pub const EXIT_BAD_SUITE: u8 = 5;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(message: impl std::fmt::Display) -> Self {
        Self::new(EXIT_IO, message.to_string())
    }
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    detector: DetectorConfig,
    canny: CannyParams,
}

pub fn run(cli: Cli) -> Result<u8, Failure> {
    let file_cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<FileConfig>(&text)
                .map_err(|e| Failure::io(format!("invalid config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Edges(args) => cmd_edges(args, &file_cfg),
        Command::Detect(args) => cmd_detect(args, &file_cfg),
        Command::Synth(args) => cmd_synth(args),
        Command::Bench(args) => cmd_bench(args, &file_cfg),
    }
}

fn canny_params(args: &CannyArgs, base: &CannyParams) -> Result<CannyParams, Failure> {
    let p = CannyParams {
        gaussian_sigma: args.sigma.unwrap_or(base.gaussian_sigma),
        low_threshold: args.low.unwrap_or(base.low_threshold),
        high_threshold: args.high.unwrap_or(base.high_threshold),
    };
    p.validate().map_err(Failure::io)?;
    Ok(p)
}

fn seed_or_entropy(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s = rand::random::<u64>();
        eprintln!("seed: {s}");
        s
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_edges(args: EdgesArgs, file_cfg: &FileConfig) -> Result<u8, Failure> {
    let params = canny_params(&args.canny, &file_cfg.canny)?;
    let img = load_gray_image(&args.input).map_err(Failure::io)?;
    let edges = canny_edges(&img, &params);
    save_edge_map(&edges, &args.output).map_err(Failure::io)?;
    println!("np = {}", edges.np());
    Ok(EXIT_OK)
}

fn is_bitmap(bytes: &[u8]) -> bool {
    bytes.starts_with(b"P1") || bytes.starts_with(b"P4")
}

fn load_detection_input(args: &DetectArgs, canny: &CannyParams) -> Result<EdgeMap, Failure> {
    let bytes = fs::read(&args.input)
        .map_err(|e| Failure::io(format!("cannot read {}: {e}", args.input.display())))?;
    if is_bitmap(&bytes) || args.edge_input {
        load_edge_map(&args.input).map_err(Failure::io)
    } else {
        let img = pnm::decode_gray(&bytes).map_err(Failure::io)?;
        Ok(canny_edges(&img, canny))
    }
}

fn cmd_detect(args: DetectArgs, file_cfg: &FileConfig) -> Result<u8, Failure> {
    let canny = canny_params(&args.canny, &file_cfg.canny)?;
    let mut cfg = file_cfg.detector.clone();
    cfg.max_circles = args.circles;
    if let Some(g) = args.generations {
        cfg.dde.max_generations = g;
    }
    if let Some(w) = args.window {
        cfg.window = w;
    }
    if let Some(r) = args.min_radius {
        cfg.min_radius = r;
    }
    if let Some(t) = args.threshold {
        cfg.completeness_threshold = t;
    }
    let seed = seed_or_entropy(args.seed);
    cfg.dde.seed = seed;
    cfg.validate().map_err(Failure::io)?;

    let edges = load_detection_input(&args, &canny)?;
    if edges.np() < 3 {
        return Err(Failure::new(
            EXIT_INSUFFICIENT_EDGES,
            format!("edge map has {} edge pixels; at least 3 are required", edges.np()),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let detections = match detect_multiple(&edges, &cfg, &mut rng) {
        Ok(d) => d,
        Err(DetectError::InsufficientEdges(n)) => {
            return Err(Failure::new(
                EXIT_INSUFFICIENT_EDGES,
                format!("edge map has {n} edge pixels; at least 3 are required"),
            ))
        }
        Err(e) => return Err(Failure::io(e)),
    };

    let doc = ResultDocument {
        input: args.input.display().to_string(),
        seed,
        config: cfg,
        detections: detections
            .iter()
            .map(|d| DetectionRecord::from_detection(d, !args.no_timing))
            .collect(),
    };
    write_output(args.json.as_deref(), &doc.to_json())?;
    if let Some(path) = &args.svg {
        let circles: Vec<Circle> = detections.iter().map(|d| d.circle).collect();
        fs::write(path, crate::svg::overlay(&edges, &circles))
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))?;
    }
    if detections.is_empty() {
        eprintln!("no circle detected");
        return Ok(EXIT_NO_CIRCLE);
    }
    Ok(EXIT_OK)
}

fn parse_range(s: &str) -> Option<(i32, i32)> {
    let (a, b) = s.split_once(':')?;
    let (a, b) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    (a >= 1 && a <= b).then_some((a, b))
}

fn parse_circles(s: &str) -> Option<Vec<Circle>> {
    s.split(';')
        .filter(|p| !p.trim().is_empty())
        .map(|part| {
            let v: Vec<f64> = part
                .split(',')
                .map(|x| x.trim().parse().ok())
                .collect::<Option<_>>()?;
            match v.as_slice() {
                &[x, y, r] => Some(Circle::new(x, y, r)),
                _ => None,
            }
        })
        .collect()
}

fn synth_failure(e: SynthError) -> Failure {
    Failure::new(EXIT_GENERATION, e.to_string())
}

fn cmd_synth(args: SynthArgs) -> Result<u8, Failure> {
    let seed = seed_or_entropy(args.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let margin = 5.0;
    let circles = match args.circles.trim().parse::<usize>() {
        Ok(count) => {
            let range = parse_range(&args.radius)
                .ok_or_else(|| Failure::io(format!("invalid radius range '{}'", args.radius)))?;
            random_circles(&mut rng, args.width, args.height, count, range, margin, 4.0)
                .map_err(synth_failure)?
        }
        Err(_) => parse_circles(&args.circles)
            .ok_or_else(|| Failure::io(format!("invalid circle list '{}'", args.circles)))?,
    };
    let shapes = random_distractors(&mut rng, args.width, args.height, args.distractors, &circles, 6.0)
        .map_err(synth_failure)?;
    let spec = SceneSpec {
        width: args.width,
        height: args.height,
        circles,
        shapes,
        noise_density: args.noise,
        margin,
    };
    let scene = generate_synthetic(&spec, &mut rng).map_err(synth_failure)?;

    let prefix = args.out.display().to_string();
    let pgm = PathBuf::from(format!("{prefix}.pgm"));
    let pbm = PathBuf::from(format!("{prefix}.pbm"));
    let json = PathBuf::from(format!("{prefix}.json"));
    pnm::save_pgm(&scene.image, &pgm, Encoding::Binary).map_err(Failure::io)?;
    save_edge_map(&scene.edges, &pbm).map_err(Failure::io)?;
    let mut truth = serde_json::to_string_pretty(&scene.truth).expect("ground truth serializes");
    truth.push('\n');
    fs::write(&json, truth).map_err(|e| Failure::io(format!("cannot write {}: {e}", json.display())))?;
    println!(
        "wrote {} {} {} (np = {})",
        pgm.display(),
        pbm.display(),
        json.display(),
        scene.edges.np()
    );
    Ok(EXIT_OK)
}

fn load_suite(dir: &Path) -> Result<Vec<BenchCase>, Failure> {
    let entries = fs::read_dir(dir)
        .map_err(|e| Failure::new(EXIT_BAD_SUITE, format!("cannot read suite {}: {e}", dir.display())))?;
    let mut maps: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "pbm"))
        .collect();
    maps.sort();
    let mut suite = Vec::with_capacity(maps.len());
    for map in maps {
        let truth_path = map.with_extension("json");
        let text = fs::read_to_string(&truth_path).map_err(|e| {
            Failure::new(
                EXIT_BAD_SUITE,
                format!("missing ground truth {}: {e}", truth_path.display()),
            )
        })?;
        let truth: GroundTruth = serde_json::from_str(&text).map_err(|e| {
            Failure::new(EXIT_BAD_SUITE, format!("invalid ground truth {}: {e}", truth_path.display()))
        })?;
        let edges = load_edge_map(&map).map_err(|e| Failure::new(EXIT_BAD_SUITE, e.to_string()))?;
        let name = map
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        suite.push(BenchCase { name, edges, truth });
    }
    if suite.is_empty() {
        return Err(Failure::new(
            EXIT_BAD_SUITE,
            format!("suite {} contains no .pbm fixtures", dir.display()),
        ));
    }
    Ok(suite)
}

fn load_seeds(path: &Path, runs: usize) -> Result<Vec<u64>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::io(format!("cannot read {}: {e}", path.display())))?;
    let seeds: Vec<u64> = text
        .split_whitespace()
        .map(|t| t.parse())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::new(EXIT_BAD_SUITE, format!("invalid seed file {}: {e}", path.display())))?;
    if seeds.len() < runs {
        return Err(Failure::new(
            EXIT_BAD_SUITE,
            format!("seed file has {} seeds, {runs} runs requested", seeds.len()),
        ));
    }
    Ok(seeds[..runs].to_vec())
}

fn cmd_bench(args: BenchArgs, file_cfg: &FileConfig) -> Result<u8, Failure> {
    if args.runs == 0 {
        return Err(Failure::new(EXIT_BAD_SUITE, "--runs must be at least 1"));
    }
    let suite = load_suite(&args.suite)?;
    let seeds = match &args.seeds {
        Some(path) => load_seeds(path, args.runs)?,
        None => {
            let base = seed_or_entropy(args.seed);
            (0..args.runs as u64).map(|i| base.wrapping_add(i)).collect()
        }
    };
    let mut cfg = file_cfg.detector.clone();
    if let Some(g) = args.generations {
        cfg.dde.max_generations = g;
    }
    cfg.validate().map_err(Failure::io)?;

    let opts = BenchOptions {
        parallel: !args.sequential,
        timing: !args.no_timing,
        ..BenchOptions::new(seeds)
    };
    let report = run_benchmark(&suite, &cfg, &opts).map_err(|e| Failure::new(EXIT_BAD_SUITE, e.to_string()))?;
    write_output(args.csv.as_deref(), &report.to_csv())?;
    if let Some(path) = &args.json {
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        fs::write(path, s).map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(EXIT_OK)
}
