use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use colorforge::annealer::{profile_from_name, Optimizer, OptimizerConfig};
use colorforge::cvd::CvdModel;
use colorforge::io::{self, apply_to_field, render_png, ColormapDocument, ConfigSnapshot, Format, ScalarField};
use colorforge::metrics::{benchmark_sweep, evaluate, Family, SweepParams};
use colorforge::preference::{Edit, PreferenceBlock, PreferenceShelf};
use colorforge::{Error, Result};

#[derive(Parser)]
#[command(name = "colorforge", version, about = "Generate, evaluate and apply continuous colormaps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize a new colormap.
    Generate(GenerateArgs),
    /// Print the evaluation report of a colormap as JSON.
    Eval(EvalArgs),
    /// Color a scalar field (CSV grid or grayscale PNG) into a PNG.
    Apply(ApplyArgs),
    /// Generate a batch of maps and write one CSV row of metrics per map.
    Bench(BenchArgs),
    /// Warm-start from an existing colormap with new preferences.
    Refine(RefineArgs),
    /// Run the local HTTP API.
    Serve(ServeArgs),
}

#[derive(Args)]
struct Tuning {
    /// Coarse smoothness weight in [0, 1]; higher restrains hue variation.
    #[arg(long)]
    colorfulness: Option<f64>,
    /// CVD model as condition[:severity], or "off".
    #[arg(long)]
    cvd: Option<String>,
    /// Iteration multiplier: draft (0.25), normal (1), high (4) or a number.
    #[arg(long, value_parser = parse_quality)]
    quality: Option<f64>,
    /// Perturbations per temperature rung, before the quality multiplier.
    #[arg(long)]
    iter_count: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct GenerateArgs {
    /// Luminance profile: linear, diverging or wave, with an optional
    /// -inv suffix.
    #[arg(long, default_value = "linear")]
    profile: String,
    /// Number of control points.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    lmin: Option<f64>,
    #[arg(long)]
    lmax: Option<f64>,
    /// Preference block L,A,B@center±extent; repeatable.
    #[arg(long = "pref", value_parser = parse_block)]
    prefs: Vec<PreferenceBlock>,
    #[command(flatten)]
    tuning: Tuning,
    /// Output file; the format follows the extension. JSON on stdout if
    /// omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the format implied by the extension.
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct EvalArgs {
    map: PathBuf,
    /// Defaults to the model recorded in the document.
    #[arg(long)]
    cvd: Option<String>,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct ApplyArgs {
    map: PathBuf,
    field: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Value range lo,hi mapped onto the colormap; the field's own range if
    /// omitted.
    #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
    range: Option<(f64, f64)>,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "sequential")]
    family: Family,
    #[arg(long, default_value_t = 50)]
    count: usize,
    #[arg(long, default_value_t = 0.25)]
    colorfulness: f64,
    /// Model to optimize against and score with, or "off" to optimize
    /// without CVD (scoring still uses the default model).
    #[arg(long, default_value = "deutan")]
    cvd: String,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_parser = parse_quality)]
    quality: Option<f64>,
    /// CSV output; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RefineArgs {
    map: PathBuf,
    /// Additional preference block L,A,B@center±extent; repeatable.
    #[arg(long = "pref", value_parser = parse_block)]
    prefs: Vec<PreferenceBlock>,
    /// Direct edit L,A,B@position, optionally ±extent; repeatable.
    #[arg(long = "edit", value_parser = parse_edit)]
    edits: Vec<Edit>,
    /// Drop the document's preferences before adding new ones.
    #[arg(long)]
    clear_shelf: bool,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<Format>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, env = "COLORFORGE_PORT", default_value_t = colorforge::service::DEFAULT_PORT)]
    port: u16,
    /// Run the jobs of a multi-run request concurrently.
    #[arg(long)]
    parallel: bool,
}

fn parse_quality(s: &str) -> std::result::Result<f64, String> {
    match s {
        "draft" => Ok(0.25),
        "normal" => Ok(1.0),
        "high" => Ok(4.0),
        _ => match s.parse::<f64>() {
            Ok(q) if q > 0.0 && q.is_finite() => Ok(q),
            _ => Err(format!("expected draft, normal, high or a positive number, got {s:?}")),
        },
    }
}

fn parse_block(s: &str) -> std::result::Result<PreferenceBlock, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_edit(s: &str) -> std::result::Result<Edit, String> {
    let block = parse_block(s)?;
    let sized = s.contains('±') || s.contains("+-");
    Ok(Edit {
        position: block.center(),
        color: block.color(),
        extent: sized.then_some(block.extent()),
    })
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad lower bound {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad upper bound {hi:?}"))?;
    Ok((lo, hi))
}

fn apply_tuning(cfg: &mut OptimizerConfig, t: &Tuning) -> Result<()> {
    if let Some(s) = &t.cvd {
        cfg.cvd = s.parse()?;
    }
    if let Some(c) = t.colorfulness {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidArgument(format!("colorfulness must be in [0, 1], got {c}")));
        }
        cfg.weights = cfg.weights.with_coarse_smoothness(c);
    }
    if let Some(n) = t.iter_count {
        cfg.iter_count = n;
    }
    if let Some(q) = t.quality {
        cfg.iter_count = ((cfg.iter_count as f64 * q).round() as usize).max(1);
    }
    if let Some(s) = t.seed {
        cfg.seed = s;
    }
    cfg.validate()
}

fn random_seed() -> u64 {
    u64::from(rand::random::<u32>())
}

fn read_map(path: &Path, format: Option<Format>) -> Result<ColormapDocument> {
    io::read_document(path, format.unwrap_or_else(|| Format::from_path(path)))
}

fn emit(doc: &ColormapDocument, out: Option<&Path>, format: Option<Format>) -> Result<()> {
    match out {
        Some(path) => io::write_document(path, doc, format.unwrap_or_else(|| Format::from_path(path))),
        None => {
            let bytes = io::export(doc, format.unwrap_or(Format::Json));
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(&bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                })
        }
    }
}

fn run_optimizer(
    profile: colorforge::annealer::LuminanceProfile,
    cfg: &OptimizerConfig,
    shelf: &PreferenceShelf,
    initial: Option<colorforge::Colormap>,
) -> Result<ColormapDocument> {
    let mut opt = Optimizer::new(profile, cfg, shelf);
    if let Some(map) = initial {
        opt = opt.warm_start(map);
    }
    let outcome = opt.run(|_| {})?;
    eprintln!(
        "seed {}  cost {:.6} (uniformity {:.6}, smoothness {:.6}, cvd {:.6})",
        cfg.seed, outcome.cost.total, outcome.cost.uniformity, outcome.cost.smoothness, outcome.cost.cvd
    );
    Ok(ColormapDocument {
        colormap: outcome.colormap,
        shelf: shelf.clone(),
        config: Some(ConfigSnapshot::from(cfg)),
        cost: Some(outcome.cost),
    })
}

fn generate(a: GenerateArgs) -> Result<()> {
    let profile = profile_from_name(&a.profile, a.n, a.lmin, a.lmax)?;
    let mut cfg = OptimizerConfig {
        seed: random_seed(),
        ..OptimizerConfig::default()
    };
    apply_tuning(&mut cfg, &a.tuning)?;
    let shelf = PreferenceShelf::new(a.prefs);
    let doc = run_optimizer(profile, &cfg, &shelf, None)?;
    emit(&doc, a.out.as_deref(), a.format)
}

fn refine(a: RefineArgs) -> Result<()> {
    let doc = read_map(&a.map, a.format)?;
    let profile = *doc
        .colormap
        .profile()
        .ok_or_else(|| Error::InvalidArgument("only profile-pinned colormaps can be refined".into()))?;
    let mut cfg = OptimizerConfig::default();
    match &doc.config {
        Some(snap) => {
            cfg.seed = snap.seed;
            cfg.weights = snap.weights;
            cfg.cvd = snap.cvd.clone();
        }
        None => cfg.seed = random_seed(),
    }
    apply_tuning(&mut cfg, &a.tuning)?;
    let mut shelf = if a.clear_shelf {
        PreferenceShelf::default()
    } else {
        doc.shelf.clone()
    };
    for b in a.prefs {
        shelf.push(b);
    }
    for e in &a.edits {
        shelf = shelf.absorb_edit(e)?;
    }
    let out = run_optimizer(profile, &cfg, &shelf, Some(doc.colormap))?;
    emit(&out, a.out.as_deref(), a.format)
}

fn eval(a: EvalArgs) -> Result<()> {
    let doc = read_map(&a.map, a.format)?;
    let model: CvdModel = match (&a.cvd, &doc.config) {
        (Some(s), _) => s.parse()?,
        (None, Some(snap)) => snap.cvd.clone(),
        (None, None) => CvdModel::default(),
    };
    let report = evaluate(&doc.colormap, &model)?;
    println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    Ok(())
}

fn apply(a: ApplyArgs) -> Result<()> {
    let doc = read_map(&a.map, a.format)?;
    let field = ScalarField::read(&a.field)?;
    let img = apply_to_field(&doc.colormap, &field, a.range)?;
    std::fs::write(&a.out, render_png(&img)).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })
}

fn bench(a: BenchArgs) -> Result<()> {
    let (cvd, model) = if a.cvd == "off" {
        (false, CvdModel::default())
    } else {
        (true, a.cvd.parse()?)
    };
    let mut params = SweepParams::new(a.count, a.family, a.colorfulness, cvd, a.seed);
    params.eval_model = model;
    if let Some(q) = a.quality {
        params.iter_count = ((params.iter_count as f64 * q).round() as usize).max(1);
    }
    let summary = benchmark_sweep(&params)?;
    eprintln!("seed {}  maps {}", a.seed, summary.rows.len());
    for (name, m) in [
        ("uniformity", &summary.uniformity),
        ("smoothness", &summary.smoothness),
        ("discriminability", &summary.discriminability),
        ("cvd_discriminability", &summary.cvd_discriminability),
        ("retention", &summary.retention),
    ] {
        eprintln!("{name:>22}  median {:.4}  [{:.4}, {:.4}]", m.median, m.min, m.max);
    }
    let csv = summary.to_csv();
    match &a.out {
        Some(path) => std::fs::write(path, csv).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn serve(a: ServeArgs) -> Result<()> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::Io {
            path: "<runtime>".into(),
            source: e,
        })?;
    rt.block_on(colorforge::service::serve(a.port, a.parallel))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Eval(a) => eval(a),
        Command::Apply(a) => apply(a),
        Command::Bench(a) => bench(a),
        Command::Refine(a) => refine(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
