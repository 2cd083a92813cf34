//! Command-line front end: generate, stats, evaluate, score, render.

use std::ffi::OsString;
use std::fmt::Display;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use shapebench::bench::{compute_stats, read_jsonl, read_manifest, write_jsonl, SCENES_FILE};
use shapebench::pipeline::{generate_dataset, render_figure, NoiseMode, PipelineConfig};
use shapebench::scene::SceneDescription;
use shapebench_eval::{evaluate_manifest, score, EndpointConfig, ResponseRecord};

pub const RUN_RECORD_SUFFIX: &str = ".run.json";

#[derive(Debug, Parser)]
#[command(name = "shapebench", version, about = "Synthetic geometric perception benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate figures, images, questions and the manifest.
    Generate(GenerateArgs),
    /// Dataset statistics from a manifest.
    Stats(StatsArgs),
    /// Query a chat-completions endpoint for every manifest question.
    Evaluate(EvaluateArgs),
    /// Score persisted responses against a manifest.
    Score(ScoreArgs),
    /// Re-render one figure of a generated dataset.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// JSON pipeline config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub easy: Option<usize>,
    #[arg(long)]
    pub hard: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Make each figure noisy with this probability instead of by split.
    #[arg(long)]
    pub noise_prob: Option<f64>,
    #[arg(long)]
    pub max_shapes: Option<usize>,
    #[arg(long)]
    pub size: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Print JSON instead of the table.
    #[arg(long)]
    pub json: bool,
    /// Also write the stats JSON and a run record here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Dataset root for image paths; defaults to the manifest's directory.
    #[arg(long)]
    pub root: Option<PathBuf>,
    /// JSON endpoint config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub base_url: Option<String>,
    #[arg(long)]
    pub model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    pub api_key_env: Option<String>,
    /// Send no Authorization header.
    #[arg(long, conflicts_with = "api_key_env")]
    pub no_auth: bool,
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub timeout_secs: Option<f64>,
    #[arg(long)]
    pub max_attempts: Option<u32>,
    /// Response records are written here as JSON lines.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub responses: PathBuf,
    #[arg(long)]
    pub json: bool,
    /// Also write the report JSON and a run record here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Directory written by `generate`.
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub figure: String,
    /// Apply noise even if the figure is clean; labels are unchanged.
    #[arg(long)]
    pub force_noise: bool,
    #[arg(long)]
    pub size: Option<u32>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Failure of a subcommand, reported as one line.
#[derive(Debug)]
pub struct CliError(pub String);

impl<E: Display> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError(e.to_string())
    }
}

type CliResult<T> = Result<T, CliError>;

/// Merges `patch` into `base`; objects merge by key, everything else replaces.
pub fn merge_json(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                merge_json(b.entry(k).or_insert(Value::Null), v);
            }
        }
        (b, p) => *b = p,
    }
}

fn load_with_defaults<T: Serialize + serde::de::DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let mut v = serde_json::to_value(T::default())?;
    if let Some(p) = path {
        let text = std::fs::read_to_string(p).map_err(|e| CliError(format!("{}: {e}", p.display())))?;
        let file: Value = serde_json::from_str(&text).map_err(|e| CliError(format!("{}: {e}", p.display())))?;
        merge_json(&mut v, file);
    }
    Ok(serde_json::from_value(v)?)
}

/// Pipeline config from the optional file, then flags.
pub fn resolve_generate(args: &GenerateArgs) -> CliResult<PipelineConfig> {
    let mut cfg: PipelineConfig = load_with_defaults(args.config.as_deref())?;
    if let Some(v) = args.easy {
        cfg.easy = v;
    }
    if let Some(v) = args.hard {
        cfg.hard = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(p) = args.noise_prob {
        cfg.noise_mode = NoiseMode::Bernoulli { p };
    }
    if let Some(v) = args.max_shapes {
        cfg.generation.max_shapes = v;
    }
    if let Some(v) = args.size {
        cfg.render.size = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Endpoint config from the optional file, then flags.
pub fn resolve_endpoint(args: &EvaluateArgs) -> CliResult<EndpointConfig> {
    let mut cfg: EndpointConfig = load_with_defaults(args.config.as_deref())?;
    if let Some(v) = &args.base_url {
        cfg.base_url = v.clone();
    }
    if let Some(v) = &args.model {
        cfg.model = v.clone();
    }
    if let Some(v) = &args.api_key_env {
        cfg.api_key_env = Some(v.clone());
    }
    if args.no_auth {
        cfg.api_key_env = None;
    }
    if let Some(v) = args.parallel {
        cfg.max_parallel_requests = v;
    }
    if let Some(v) = args.timeout_secs {
        cfg.timeout_secs = v;
    }
    if let Some(v) = args.max_attempts {
        cfg.retry.max_attempts = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(RUN_RECORD_SUFFIX);
    PathBuf::from(s)
}

fn write_run_record(path: &Path, command: &str, config: Value, extra: Value) -> CliResult<()> {
    let mut rec = json!({
        "tool": "shapebench",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "config": config,
    });
    merge_json(&mut rec, extra);
    std::fs::write(path, serde_json::to_string_pretty(&rec)?)?;
    Ok(())
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(p)?;
    }
    Ok(())
}

fn run_generate(args: &GenerateArgs) -> CliResult<()> {
    let cfg = resolve_generate(args)?;
    std::fs::create_dir_all(&args.out)?;
    let run = generate_dataset(&cfg, &args.out)?;
    println!(
        "generated {} figures, {} questions in {}",
        run.figures,
        run.questions,
        args.out.display()
    );
    Ok(())
}

fn run_stats(args: &StatsArgs) -> CliResult<()> {
    let stats = compute_stats(&read_manifest(&args.manifest)?);
    if args.json {
        println!("{}", serde_json::to_string_pretty(&stats)?);
    } else {
        print!("{}", stats.to_table());
    }
    if let Some(out) = &args.out {
        ensure_parent(out)?;
        std::fs::write(out, serde_json::to_string_pretty(&stats)?)?;
        write_run_record(&sidecar(out), "stats", json!({"manifest": args.manifest}), json!({}))?;
    }
    Ok(())
}

fn run_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    let cfg = resolve_endpoint(args)?;
    let records = read_manifest(&args.manifest)?;
    let root = match &args.root {
        Some(r) => r.clone(),
        None => args.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let rt = tokio::runtime::Runtime::new()?;
    let eval = rt.block_on(evaluate_manifest(&cfg, &records, &root))?;
    ensure_parent(&args.out)?;
    write_jsonl(&eval.responses, &args.out)?;
    write_run_record(
        &sidecar(&args.out),
        "evaluate",
        serde_json::to_value(&cfg)?,
        json!({
            "manifest": args.manifest,
            "responses": eval.responses.len(),
            "failures": eval.failures.iter().map(|(q, m)| json!({"question_id": q, "error": m})).collect::<Vec<_>>(),
        }),
    )?;
    println!(
        "{} responses written to {}; {} failed",
        eval.responses.len(),
        args.out.display(),
        eval.failures.len()
    );
    Ok(())
}

fn run_score(args: &ScoreArgs) -> CliResult<()> {
    let manifest = read_manifest(&args.manifest)?;
    let responses: Vec<ResponseRecord> = read_jsonl(&args.responses)?;
    let report = score(&manifest, &responses)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print!("{}", report.to_table());
    }
    if let Some(out) = &args.out {
        ensure_parent(out)?;
        std::fs::write(out, serde_json::to_string_pretty(&report)?)?;
        write_run_record(
            &sidecar(out),
            "score",
            json!({"manifest": args.manifest, "responses": args.responses}),
            json!({}),
        )?;
    }
    Ok(())
}

fn run_render(args: &RenderArgs) -> CliResult<()> {
    let cfg_path = args.run.join("config.json");
    let text = std::fs::read_to_string(&cfg_path).map_err(|e| CliError(format!("{}: {e}", cfg_path.display())))?;
    let mut cfg: PipelineConfig = serde_json::from_str(&text)?;
    if let Some(s) = args.size {
        cfg.render.size = s;
    }
    let scenes: Vec<SceneDescription> = read_jsonl(&args.run.join(SCENES_FILE))?;
    let desc = scenes
        .iter()
        .find(|d| d.figure_id == args.figure)
        .ok_or_else(|| CliError(format!("no figure {} in {}", args.figure, args.run.display())))?;
    let img = render_figure(desc, &cfg.render, &cfg.noise, args.force_noise)?;
    ensure_parent(&args.out)?;
    img.write_png(&args.out)?;
    write_run_record(
        &sidecar(&args.out),
        "render",
        json!({"run": args.run, "figure": args.figure, "force_noise": args.force_noise, "render": cfg.render, "noise": cfg.noise}),
        json!({"seed": desc.seed}),
    )?;
    println!("wrote {}", args.out.display());
    Ok(())
}

pub fn run(cli: &Cli) -> CliResult<()> {
    match &cli.command {
        Command::Generate(a) => run_generate(a),
        Command::Stats(a) => run_stats(a),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Score(a) => run_score(a),
        Command::Render(a) => run_render(a),
    }
}

/// Parses arguments and runs; returns the process exit code.
pub fn dispatch<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(CliError(msg)) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn merge_overrides_nested() {
        let mut a = json!({"x": 1, "g": {"m": 8, "t": 0.05}});
        merge_json(&mut a, json!({"g": {"m": 6}}));
        assert_eq!(a, json!({"x": 1, "g": {"m": 6, "t": 0.05}}));
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"seed": 5, "easy": 3, "generation": {"max_shapes": 7}}"#).unwrap();
        let cli = Cli::try_parse_from([
            "shapebench",
            "generate",
            "--config",
            p.to_str().unwrap(),
            "--seed",
            "9",
            "--out",
            "o",
        ])
        .unwrap();
        let Command::Generate(a) = cli.command else { panic!() };
        let cfg = resolve_generate(&a).unwrap();
        assert_eq!((cfg.seed, cfg.easy, cfg.generation.max_shapes), (9, 3, 7));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_ne!(dispatch(["shapebench", "generate", "--bogus"]), 0);
        assert_ne!(dispatch(["shapebench", "frobnicate"]), 0);
    }
}
