//! Training loop with loss and LOD logging.

use std::fmt::Write as _;
use std::time::Instant;

use nvf_core::geometry::{Bvh, Scene};
use nvf_core::trainer::{LodChange, StepReport, TrainState, Trainer};

use crate::config::TrainingFile;
use crate::error::Result;

/// Loss averaged over one logging interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossRow {
    /// Steps completed at the end of the interval.
    pub step: u64,
    pub mean_loss: f64,
    pub m: u32,
    pub learning_rate: f64,
    pub skipped: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LodEvent {
    /// Steps completed when the update ran.
    pub step: u64,
    pub change: LodChange,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub state: TrainState<f32>,
    pub loss_log: Vec<LossRow>,
    pub lod_events: Vec<LodEvent>,
    pub skipped: u64,
    pub seconds: f64,
}

pub fn initial_state(scene: &Scene, file: &TrainingFile) -> Result<TrainState<f32>> {
    let model = file.model_config().build::<f32>(scene, file.seed)?;
    Ok(TrainState::new(model, file.train_config().adam))
}

/// Trains from scratch, calling `observer` after every step.
pub fn train_scene(
    scene: &Scene,
    bvh: &Bvh,
    file: &TrainingFile,
    mut observer: impl FnMut(&StepReport, &TrainState<f32>) -> Result<()>,
) -> Result<TrainOutcome> {
    file.validate()?;
    let start = Instant::now();
    let mut trainer = Trainer::new(scene, bvh, file.train_config(), initial_state(scene, file)?)?;
    let mut loss_log = Vec::new();
    let mut lod_events = Vec::new();
    let mut skipped = 0;
    let (mut sum, mut n, mut interval_skipped) = (0.0, 0u64, 0u64);
    while !trainer.is_finished() {
        let report = trainer.step()?;
        if report.skipped {
            skipped += 1;
            interval_skipped += 1;
        } else {
            sum += report.loss;
            n += 1;
        }
        if let Some(r) = &report.refinement {
            lod_events.extend(r.changes.iter().map(|&change| LodEvent {
                step: report.step + 1,
                change,
            }));
        }
        let done = report.step + 1;
        if done % file.log_interval == 0 || trainer.is_finished() {
            let mean_loss = if n > 0 { sum / n as f64 } else { f64::NAN };
            log::info!("step {done}: loss {mean_loss:.6e}, M {}, lr {:.2e}", report.m, report.learning_rate);
            loss_log.push(LossRow {
                step: done,
                mean_loss,
                m: report.m,
                learning_rate: report.learning_rate,
                skipped: interval_skipped,
            });
            (sum, n, interval_skipped) = (0.0, 0, 0);
        }
        observer(&report, trainer.state())?;
    }
    Ok(TrainOutcome {
        state: trainer.into_state(),
        loss_log,
        lod_events,
        skipped,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn loss_csv(rows: &[LossRow]) -> String {
    let mut s = String::from("step,mean_loss,m,learning_rate,skipped\n");
    for r in rows {
        let _ = writeln!(s, "{},{:e},{},{:e},{}", r.step, r.mean_loss, r.m, r.learning_rate, r.skipped);
    }
    s
}

pub fn lod_events_csv(events: &[LodEvent]) -> String {
    let mut s = String::from("step,face,from,to\n");
    for e in events {
        let _ = writeln!(s, "{},{},{},{}", e.step, e.change.face, e.change.from, e.change.to);
    }
    s
}

pub fn face_lod_csv(lods: &[u32]) -> String {
    let mut s = String::from("face,k\n");
    for (f, k) in lods.iter().enumerate() {
        let _ = writeln!(s, "{f},{k}");
    }
    s
}
