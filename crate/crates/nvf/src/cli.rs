//! Command-line front end. [`run`] parses arguments, executes one command
//! and returns the process exit code.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nvf_core::geometry::{Bvh, Scene};
use nvf_core::render::{mse, relmse, Image, PathTraceConfig, DEFAULT_RELMSE_EPSILON};
use nvf_core::trainer::RadianceModel;
use serde::Serialize;

use crate::bench::{bench, bench_csv, BenchEntry};
use crate::checkpoint::{geometry_hash, load_checkpoint, save_checkpoint, Checkpoint};
use crate::config::{load_training, Encoder, TrainingFile};
use crate::error::{Error, Result};
use crate::genscene::{generate, GenOptions, SceneKind};
use crate::image_io::{read_pfm, write_pfm, write_ppm};
use crate::manifest::{RunManifest, MANIFEST_FILE};
use crate::render::{neural_image, reference_image, with_threads};
use crate::scene_file::{load_scene, mesh_to_obj, save_scene, SceneFile};
use crate::training::{face_lod_csv, initial_state, lod_events_csv, loss_csv, train_scene};

pub const CHECKPOINT_FILE: &str = "checkpoint.nvf";

#[derive(Debug, Parser)]
#[command(name = "nvf", version, about = "Train and render vertex-feature radiance caches")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit a radiance cache to a scene.
    Train(TrainArgs),
    /// Render with a trained cache, or path-trace a reference.
    Render(RenderArgs),
    /// Tabulate encoder memory, gathers and image error.
    Bench(BenchArgs),
    /// Write a procedural test scene.
    Genscene(GenArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Single worker thread.
    #[arg(long)]
    pub deterministic: bool,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Training configuration JSON; defaults apply when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub encoder: Option<Encoder>,
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Disable adaptive LOD.
    #[arg(long)]
    pub no_lod: bool,
    /// Also write `checkpoint_<step>.nvf` after these steps.
    #[arg(long, value_delimiter = ',')]
    pub checkpoint_at: Vec<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long, conflicts_with = "reference")]
    pub checkpoint: Option<PathBuf>,
    /// Path-trace instead of querying a cache.
    #[arg(long)]
    pub reference: bool,
    #[arg(long, default_value_t = 32)]
    pub spp: u32,
    #[arg(long, default_value_t = 16)]
    pub max_depth: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// PFM image to report errors against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Training configurations to size freshly built models from.
    #[arg(long)]
    pub config: Vec<PathBuf>,
    /// Trained checkpoints to size and, with a reference, render.
    #[arg(long)]
    pub checkpoint: Vec<PathBuf>,
    /// PFM reference image for the error columns.
    #[arg(long)]
    pub reference_image: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub spp: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5)]
    pub lod_cap_ratio: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: SceneKind,
    #[arg(long)]
    pub subdiv: Option<u32>,
    #[arg(long, default_value_t = 32)]
    pub resolution: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub common: Common,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Train(a) => cmd_train(a),
        Command::Render(a) => cmd_render(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Genscene(a) => cmd_genscene(a),
    }
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(dir: &Path, name: &str, text: &str, manifest: &mut RunManifest) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    manifest.artifact(name);
    Ok(())
}

fn write_json<S: Serialize>(dir: &Path, name: &str, value: &S, manifest: &mut RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Invalid(e.to_string()))?;
    write_text(dir, name, &(text + "\n"), manifest)
}

fn threads(common: &Common) -> Option<usize> {
    common.deterministic.then_some(1)
}

fn to_value<S: Serialize>(s: &S) -> serde_json::Value {
    serde_json::to_value(s).unwrap_or(serde_json::Value::Null)
}

/// Training settings after applying command-line overrides.
pub fn resolve_training(a: &TrainArgs) -> Result<TrainingFile> {
    let mut file = match &a.config {
        Some(p) => load_training(p)?,
        None => TrainingFile::default(),
    };
    if let Some(e) = a.encoder {
        file.encoder = e;
    }
    if let Some(s) = a.steps {
        file.total_steps = s;
    }
    if let Some(s) = a.seed {
        file.seed = s;
    }
    if a.no_lod {
        file.adaptive_lod = false;
    }
    file.validate()?;
    Ok(file)
}

#[derive(Serialize)]
struct TrainSummary {
    steps: u64,
    final_loss: f64,
    skipped_steps: u64,
    encoder_params: usize,
    total_params: usize,
    virtual_vertices: Option<usize>,
    seconds: f64,
    manifest: &'static str,
}

pub fn cmd_train(a: &TrainArgs) -> Result<()> {
    let file = resolve_training(a)?;
    let scene = load_scene(&a.scene)?;
    let out = &a.common.out;
    prepare_out(out)?;
    let mut manifest = RunManifest::new("train", file.seed, a.common.deterministic, to_value(&file));
    let bvh = manifest.phase("load", || Bvh::build(&scene.mesh));
    let hash = geometry_hash(&scene.mesh);
    let run_id = manifest.run_id.clone();
    let mut snapshots = Vec::new();
    let outcome = manifest.phase("train", || {
        train_scene(&scene, &bvh, &file, |report, state| {
            let done = report.step + 1;
            if a.checkpoint_at.contains(&done) {
                let name = format!("checkpoint_{done}.nvf");
                let c = Checkpoint {
                    geometry_hash: hash,
                    run_id: run_id.clone(),
                    state: state.clone(),
                };
                save_checkpoint(&out.join(&name), &c)?;
                snapshots.push(name);
            }
            Ok(())
        })
    })?;
    for s in snapshots {
        manifest.artifact(s);
    }
    let model = &outcome.state.model;
    use nvf_core::params::Parameterized;
    let summary = TrainSummary {
        steps: outcome.state.step,
        final_loss: outcome.loss_log.last().map_or(f64::NAN, |r| r.mean_loss),
        skipped_steps: outcome.skipped,
        encoder_params: model.encoder.param_count(),
        total_params: model.param_count(),
        virtual_vertices: model.encoder.as_vertex().map(|s| s.virtual_vertex_count()),
        seconds: outcome.seconds,
        manifest: MANIFEST_FILE,
    };
    let checkpoint = Checkpoint {
        geometry_hash: hash,
        run_id: manifest.run_id.clone(),
        state: outcome.state.clone(),
    };
    save_checkpoint(&out.join(CHECKPOINT_FILE), &checkpoint)?;
    manifest.artifact(CHECKPOINT_FILE);
    write_text(out, "loss.csv", &loss_csv(&outcome.loss_log), &mut manifest)?;
    write_text(out, "lod_updates.csv", &lod_events_csv(&outcome.lod_events), &mut manifest)?;
    if let Some(store) = model.encoder.as_vertex() {
        write_text(out, "face_lod.csv", &face_lod_csv(store.face_lods()), &mut manifest)?;
        write_text(out, "mesh.obj", &mesh_to_obj(&scene.mesh), &mut manifest)?;
    }
    write_json(out, "train_report.json", &summary, &mut manifest)?;
    manifest.write(out)?;
    Ok(())
}

#[derive(Serialize)]
struct RenderReport {
    mse: Option<f64>,
    relmse: Option<f64>,
    spp: u32,
    seconds: f64,
    mean: [f64; 3],
    manifest: &'static str,
}

/// Neural image from `checkpoint`, or a path-traced one when it is `None`.
pub fn render_image(
    scene: &Scene,
    bvh: &Bvh,
    checkpoint: Option<&Path>,
    spp: u32,
    max_depth: u32,
    seed: u64,
    threads: Option<usize>,
) -> Result<Image> {
    match checkpoint {
        Some(p) => {
            let c = load_checkpoint(p, &scene.mesh)?;
            with_threads(threads, || neural_image(scene, bvh, &c.state.model, spp, seed))?
        }
        None => {
            let cfg = PathTraceConfig { spp, max_depth, seed };
            with_threads(threads, || reference_image(scene, bvh, &cfg))?
        }
    }
}

pub fn cmd_render(a: &RenderArgs) -> Result<()> {
    if a.checkpoint.is_none() && !a.reference {
        return Err(Error::Invalid("render needs --checkpoint or --reference".into()));
    }
    let scene = load_scene(&a.scene)?;
    let out = &a.common.out;
    prepare_out(out)?;
    let config = serde_json::json!({
        "scene": a.scene, "checkpoint": a.checkpoint, "reference": a.reference,
        "spp": a.spp, "max_depth": a.max_depth,
    });
    let mut manifest = RunManifest::new("render", a.seed, a.common.deterministic, config);
    let bvh = manifest.phase("load", || Bvh::build(&scene.mesh));
    let start = std::time::Instant::now();
    let image = manifest.phase("render", || {
        render_image(&scene, &bvh, a.checkpoint.as_deref(), a.spp, a.max_depth, a.seed, threads(&a.common))
    })?;
    let seconds = start.elapsed().as_secs_f64();
    let (mse_v, relmse_v) = match &a.compare {
        Some(p) => {
            let target = read_pfm(p)?;
            (
                Some(mse(&image, &target)?),
                Some(relmse(&image, &target, DEFAULT_RELMSE_EPSILON)?),
            )
        }
        None => (None, None),
    };
    write_pfm(&out.join("image.pfm"), &image)?;
    manifest.artifact("image.pfm");
    write_ppm(&out.join("image.ppm"), &image)?;
    manifest.artifact("image.ppm");
    let report = RenderReport {
        mse: mse_v,
        relmse: relmse_v,
        spp: a.spp,
        seconds,
        mean: image.mean().0,
        manifest: MANIFEST_FILE,
    };
    write_json(out, "render_report.json", &report, &mut manifest)?;
    manifest.write(out)?;
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let scene = load_scene(&a.scene)?;
    let out = &a.common.out;
    prepare_out(out)?;
    let config = serde_json::json!({
        "scene": a.scene, "config": a.config, "checkpoint": a.checkpoint,
        "reference_image": a.reference_image, "spp": a.spp, "lod_cap_ratio": a.lod_cap_ratio,
    });
    let mut manifest = RunManifest::new("bench", a.seed, a.common.deterministic, config);
    let mut models: Vec<(String, RadianceModel<f32>)> = Vec::new();
    if a.config.is_empty() && a.checkpoint.is_empty() {
        for encoder in [Encoder::Vertex, Encoder::Hashgrid] {
            let file = TrainingFile {
                encoder,
                ..Default::default()
            };
            models.push((format!("{encoder:?}").to_lowercase(), initial_state(&scene, &file)?.model));
        }
    }
    for p in &a.config {
        models.push((p.display().to_string(), initial_state(&scene, &load_training(p)?)?.model));
    }
    for p in &a.checkpoint {
        models.push((p.display().to_string(), load_checkpoint(p, &scene.mesh)?.state.model));
    }
    let reference = a.reference_image.as_deref().map(read_pfm).transpose()?;
    let entries: Vec<BenchEntry> = models
        .iter()
        .map(|(label, model)| BenchEntry {
            label: label.clone(),
            model,
        })
        .collect();
    let report = manifest.phase("bench", || {
        with_threads(threads(&a.common), || {
            bench(
                &scene,
                &entries,
                a.lod_cap_ratio,
                reference.as_ref().map(|r| (r, a.spp, a.seed)),
                MANIFEST_FILE,
            )
        })
    })??;
    write_json(out, "bench.json", &report, &mut manifest)?;
    write_text(out, "bench.csv", &bench_csv(&report), &mut manifest)?;
    manifest.write(out)?;
    Ok(())
}

pub fn cmd_genscene(a: &GenArgs) -> Result<()> {
    let options = GenOptions {
        subdiv: a.subdiv,
        resolution: a.resolution,
    };
    let scene = generate(a.kind, &options)?;
    let out = &a.common.out;
    prepare_out(out)?;
    let config = serde_json::json!({"kind": a.kind, "subdiv": a.subdiv, "resolution": a.resolution});
    let mut manifest = RunManifest::new("genscene", a.seed, a.common.deterministic, config);
    let name = format!("{}.json", a.kind.name());
    save_scene(&out.join(&name), &SceneFile::from_scene(&scene))?;
    manifest.artifact(name);
    manifest.write(out)?;
    Ok(())
}
