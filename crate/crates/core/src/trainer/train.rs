use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::encoding::{EncoderKind, HashGridConfig, HashGridEncoder, PositionEncoder, VertexFeatureStore};
use crate::encoding::hashgrid::dilated_bounds;
use crate::encoding::vertex::DEFAULT_FEATURE_WIDTH;
use crate::error::{Error, Result};
use crate::geometry::sampling::{to_world, uniform_hemisphere, UNIFORM_HEMISPHERE_PDF};
use crate::geometry::{Bvh, Scene};
use crate::math::Rgb;
use crate::neural::adam::{AdamConfig, OptimizerState, StepOutcome};
use crate::neural::schedule::schedule_m;
use crate::params::Parameterized;
use crate::real::Real;
use crate::rng;
use crate::trainer::distribution::FaceDistribution;
use crate::trainer::lod::{update_lod, FaceLossStats, RefinementReport};
use crate::trainer::model::{InputLayout, ModelGradients, RadianceField, RadianceModel};
use crate::trainer::residual::ResidualPlan;

/// Added to `‖LHS‖²` when the relative loss is enabled.
pub const RELATIVE_LOSS_EPSILON: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub total_steps: u64,
    /// Surface samples per step.
    pub batch_size: usize,
    /// Reflected rays per residual at step 0; doubled every fifth of training.
    pub m0: u32,
    pub adaptive_lod: bool,
    /// Virtual vertices allowed, as a fraction of the mesh vertex count.
    pub lod_cap_ratio: f64,
    /// Area weight in the face distribution.
    pub alpha: f64,
    pub seed: u64,
    /// Stop gradients through the reflected-ray queries.
    pub detach_rhs: bool,
    pub relative_loss: bool,
    pub adam: AdamConfig,
    /// Network rows evaluated per forward/backward pass.
    pub chunk_rows: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            total_steps: 5000,
            batch_size: 1024,
            m0: 32,
            adaptive_lod: true,
            lod_cap_ratio: 0.5,
            alpha: 0.5,
            seed: 0,
            detach_rhs: false,
            relative_loss: false,
            adam: AdamConfig::default(),
            chunk_rows: 8192,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        if self.total_steps == 0 {
            return fail("total_steps must be >= 1");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be >= 1");
        }
        if self.m0 == 0 || self.m0 > u32::MAX >> 4 {
            return fail("m0 must be in [1, 2^28)");
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return fail("alpha must be in [0, 1]");
        }
        if !(self.lod_cap_ratio >= 0.0) {
            return fail("lod_cap_ratio must be >= 0");
        }
        if self.chunk_rows == 0 {
            return fail("chunk_rows must be >= 1");
        }
        if !(self.adam.learning_rate > 0.0) {
            return fail("learning rate must be > 0");
        }
        Ok(())
    }
}

/// Steps after which the LOD controller runs: `⌈T/8⌉`, `⌈T/4⌉`, `⌈3T/8⌉`.
pub fn lod_update_steps(total_steps: u64) -> [u64; 3] {
    [
        total_steps.div_ceil(8),
        total_steps.div_ceil(4),
        (3 * total_steps).div_ceil(8),
    ]
}

/// Encoder choice and network shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConfig {
    pub encoder: EncoderKind,
    pub feature_width: usize,
    pub hash_grid: HashGridConfig,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub inputs: InputLayout,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            encoder: EncoderKind::Vertex,
            feature_width: DEFAULT_FEATURE_WIDTH,
            hash_grid: HashGridConfig::default(),
            hidden_width: 64,
            hidden_layers: 3,
            inputs: InputLayout::default(),
        }
    }
}

impl ModelConfig {
    pub fn build<T: Real>(&self, scene: &Scene, seed: u64) -> Result<RadianceModel<T>> {
        let encoder = match self.encoder {
            EncoderKind::Vertex => {
                PositionEncoder::Vertex(VertexFeatureStore::new(&scene.mesh, self.feature_width, seed)?)
            }
            EncoderKind::HashGrid => {
                let (lo, hi) = scene.mesh.bounds();
                PositionEncoder::HashGrid(HashGridEncoder::new(self.hash_grid, dilated_bounds(lo, hi), seed)?)
            }
        };
        RadianceModel::new(encoder, self.hidden_width, self.hidden_layers, self.inputs, seed)
    }
}

/// Everything needed to resume training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState<T> {
    pub model: RadianceModel<T>,
    pub optimizer: OptimizerState<T>,
    /// Completed steps.
    pub step: u64,
}

impl<T: Real> TrainState<T> {
    pub fn new(model: RadianceModel<T>, adam: AdamConfig) -> Self {
        TrainState {
            model,
            optimizer: OptimizerState::new(adam),
            step: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    /// 0-based index of the step just taken.
    pub step: u64,
    /// Batch estimate of the surface loss.
    pub loss: f64,
    pub m: u32,
    pub learning_rate: f64,
    pub skipped: bool,
    pub refinement: Option<RefinementReport>,
}

pub struct Trainer<'a, T> {
    scene: &'a Scene,
    bvh: &'a Bvh,
    config: TrainConfig,
    state: TrainState<T>,
    distribution: FaceDistribution,
    stats: FaceLossStats,
    grads: ModelGradients<T>,
    plan: ResidualPlan,
    face_losses: Vec<(usize, f64)>,
}

impl<'a, T: Real> Trainer<'a, T> {
    pub fn new(scene: &'a Scene, bvh: &'a Bvh, config: TrainConfig, state: TrainState<T>) -> Result<Self> {
        config.validate()?;
        if let Some(store) = state.model.encoder.as_vertex() {
            if store.faces() != scene.mesh.faces() || store.vertex_count() != scene.mesh.vertex_count() {
                return Err(Error::GeometryMismatch);
            }
        }
        let distribution = Self::distribution_for(scene, &state.model, &config)?;
        let grads = ModelGradients::zeros_like(&state.model);
        Ok(Trainer {
            scene,
            bvh,
            config,
            stats: FaceLossStats::new(scene.mesh.face_count()),
            state,
            distribution,
            grads,
            plan: ResidualPlan::default(),
            face_losses: Vec::new(),
        })
    }

    /// The hash grid has no per-face capacity, so it samples by area alone.
    fn distribution_for(scene: &Scene, model: &RadianceModel<T>, config: &TrainConfig) -> Result<FaceDistribution> {
        match model.encoder.as_vertex() {
            Some(store) => FaceDistribution::build(&scene.mesh, Some(store.face_lods()), config.alpha),
            None => FaceDistribution::build(&scene.mesh, None, 1.0),
        }
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn state(&self) -> &TrainState<T> {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut TrainState<T> {
        &mut self.state
    }

    pub fn into_state(self) -> TrainState<T> {
        self.state
    }

    pub fn model(&self) -> &RadianceModel<T> {
        &self.state.model
    }

    pub fn distribution(&self) -> &FaceDistribution {
        &self.distribution
    }

    pub fn stats(&self) -> &FaceLossStats {
        &self.stats
    }

    pub fn gradients(&self) -> &ModelGradients<T> {
        &self.grads
    }

    pub fn is_finished(&self) -> bool {
        self.state.step >= self.config.total_steps
    }

    /// Batch loss `(1/B)·Σ_b w_b‖r_b‖²` with `w_b = 1/(pdf_area·pdf_ω)` for
    /// the samples of `step`, leaving its gradient in [`gradients`](Self::gradients).
    /// Samples depend only on `(seed, step, sample index)`.
    pub fn loss_and_gradients(&mut self, step: u64, m: u32) -> Result<f64> {
        let cfg = self.config;
        let model = &self.state.model;
        self.grads.conform_to(model);
        self.grads.zero();
        self.face_losses.clear();
        let b = cfg.batch_size;
        let inv_b = 1.0 / b as f64;
        let per_chunk = (cfg.chunk_rows / (1 + m as usize)).max(1);
        let mut loss = 0.0;
        let mut weights = Vec::with_capacity(per_chunk.min(b));
        let mut start = 0;
        while start < b {
            let end = (start + per_chunk).min(b);
            self.plan.clear();
            weights.clear();
            for i in start..end {
                let mut r = rng::stream2(cfg.seed, step, i as u64);
                let x = self.distribution.sample_surface(self.scene, &mut r);
                let wo = to_world(x.normal, uniform_hemisphere(r.random(), r.random()));
                self.plan.push(self.scene, self.bvh, &x, wo, m, &mut r);
                weights.push(1.0 / (x.pdf_area * UNIFORM_HEMISPHERE_PDF));
            }
            let queries = &self.plan.queries;
            let batch = model.network_batch(queries)?;
            let taped = if batch.rows.is_empty() {
                None
            } else {
                Some(model.forward_with_tape(&batch)?)
            };
            let radiance = match &taped {
                Some((out, _)) => model.compose(queries, &batch, out),
                None => queries.iter().map(|q| q.emission).collect(),
            };
            let residuals = self.plan.residuals(&radiance, self.scene.environment);
            let mut d_radiance = vec![Rgb::BLACK; queries.len()];
            for ((term, r), &w) in self.plan.terms.iter().zip(&residuals).zip(&weights) {
                let w = if cfg.relative_loss {
                    w / (radiance[term.lhs].squared_norm() + RELATIVE_LOSS_EPSILON)
                } else {
                    w
                };
                let sq = r.squared_norm();
                loss += w * sq * inv_b;
                self.face_losses.push((queries[term.lhs].point.face, sq));
                let g = *r * (2.0 * w * inv_b);
                d_radiance[term.lhs] += g;
                if !cfg.detach_rhs && !term.rhs.is_empty() {
                    let g_rhs = g * term.albedo * (-1.0 / term.m as f64);
                    for q in term.rhs.clone() {
                        d_radiance[q] += g_rhs;
                    }
                }
            }
            if let Some((_, tape)) = &taped {
                model.backward(queries, &batch, tape, &d_radiance, &mut self.grads)?;
            }
            start = end;
        }
        Ok(loss)
    }

    /// One optimization step, followed by a LOD update when one is due.
    pub fn step(&mut self) -> Result<StepReport> {
        let s = self.state.step;
        let total = self.config.total_steps;
        let m = schedule_m(s, total, self.config.m0);
        let learning_rate = self.config.adam.learning_rate_at(s, total);
        let loss = self.loss_and_gradients(s, m)?;
        let mut skipped = !loss.is_finite();
        if !skipped {
            let grads = self.grads.slices();
            let mut params = self.state.model.param_groups_mut();
            skipped = self.state.optimizer.step(&mut params, &grads, learning_rate) == StepOutcome::SkippedNonFinite;
        } else {
            log::warn!("step {s}: non-finite loss, update skipped");
        }
        if !skipped {
            for &(face, l) in &self.face_losses {
                self.stats.record(face, l);
            }
        }
        self.state.step += 1;
        let mut refinement = None;
        if self.config.adaptive_lod && lod_update_steps(total).contains(&self.state.step) {
            if let Some(store) = self.state.model.encoder.as_vertex_mut() {
                let report = update_lod(&mut self.stats, store, self.config.lod_cap_ratio)?;
                log::info!(
                    "step {}: refined {} faces, {} virtual vertices (cap {})",
                    self.state.step,
                    report.changes.len(),
                    report.virtual_vertices,
                    report.cap
                );
                self.distribution = FaceDistribution::build(&self.scene.mesh, Some(store.face_lods()), self.config.alpha)?;
                refinement = Some(report);
            }
        }
        Ok(StepReport {
            step: s,
            loss,
            m,
            learning_rate,
            skipped,
            refinement,
        })
    }

    /// Steps until `total_steps`, passing every report to `on_step`.
    pub fn run<F: FnMut(&StepReport)>(&mut self, mut on_step: F) -> Result<()> {
        while !self.is_finished() {
            let report = self.step()?;
            on_step(&report);
        }
        Ok(())
    }
}

/// Monte Carlo estimate of the surface loss `∫_S ∫_Ω ‖r‖²` of a fixed
/// radiance field under `distribution`, with its standard error.
pub fn estimate_loss<F: RadianceField + ?Sized>(
    scene: &Scene,
    bvh: &Bvh,
    field: &F,
    distribution: &FaceDistribution,
    samples: usize,
    m: u32,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut plan = ResidualPlan::default();
    let mut weights = Vec::new();
    let (mut sum, mut sum_sq) = (0.0, 0.0);
    let chunk = 1024;
    let mut start = 0;
    while start < samples {
        let end = (start + chunk).min(samples);
        plan.clear();
        weights.clear();
        for i in start..end {
            let mut r = rng::stream(seed, i as u64);
            let x = distribution.sample_surface(scene, &mut r);
            let wo = to_world(x.normal, uniform_hemisphere(r.random(), r.random()));
            plan.push(scene, bvh, &x, wo, m, &mut r);
            weights.push(1.0 / (x.pdf_area * UNIFORM_HEMISPHERE_PDF));
        }
        let radiance = field.radiance(&plan.queries)?;
        for (r, w) in plan.residuals(&radiance, scene.environment).iter().zip(&weights) {
            let v = w * r.squared_norm();
            sum += v;
            sum_sq += v * v;
        }
        start = end;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok((mean, libm::sqrt(var / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Material;
    use crate::neural::mlp::Dense;
    use crate::testutil::cube;

    fn furnace() -> Scene {
        cube(Material::new(Rgb::splat(0.5), Rgb::splat(0.5)))
    }

    fn small_model() -> ModelConfig {
        ModelConfig {
            hidden_width: 16,
            hidden_layers: 2,
            ..Default::default()
        }
    }

    fn config(total: u64, batch: usize, m0: u32) -> TrainConfig {
        TrainConfig {
            total_steps: total,
            batch_size: batch,
            m0,
            seed: 11,
            chunk_rows: 64,
            ..Default::default()
        }
    }

    #[test]
    fn update_schedule() {
        assert_eq!(lod_update_steps(5000), [625, 1250, 1875]);
        assert_eq!(lod_update_steps(10), [2, 3, 4]);
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        for bad in [
            TrainConfig { batch_size: 0, ..Default::default() },
            TrainConfig { total_steps: 0, ..Default::default() },
            TrainConfig { alpha: -0.1, ..Default::default() },
            TrainConfig { m0: 0, ..Default::default() },
            TrainConfig { lod_cap_ratio: f64::NAN, ..Default::default() },
        ] {
            assert!(bad.validate().is_err());
        }
    }

    /// Central differences on the largest-gradient parameters of the
    /// encoder and the first network layer.
    fn check_probe(scene: &Scene, model: RadianceModel<f64>, cfg: TrainConfig) {
        let bvh = Bvh::build(&scene.mesh);
        let mut t = Trainer::new(scene, &bvh, cfg, TrainState::new(model, cfg.adam)).unwrap();
        t.loss_and_gradients(0, 2).unwrap();
        let grads = t.gradients().clone();
        let n_mlp = grads.mlp.groups.len();
        let flat = grads.slices();
        let mut probes = Vec::new();
        for range in [0..1, n_mlp..flat.len()] {
            let (mut best, mut at) = (0.0, (0, 0));
            for g in range {
                for (i, &v) in flat[g].iter().enumerate() {
                    if v.abs() > best {
                        best = v.abs();
                        at = (g, i);
                    }
                }
            }
            assert!(best > 0.0);
            probes.push(at);
        }
        let h = 1e-6;
        for (g, i) in probes {
            let mut eval = |delta: f64| {
                let x = t.state_mut().model.param_groups_mut()[g][i];
                t.state_mut().model.param_groups_mut()[g][i] = x + delta;
                let l = t.loss_and_gradients(0, 2).unwrap();
                t.state_mut().model.param_groups_mut()[g][i] = x;
                l
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let an = flat[g][i];
            let rel = (fd - an).abs() / an.abs().max(fd.abs());
            assert!(rel <= 1e-3, "group {g} index {i}: analytic {an}, fd {fd}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let scene = cube(Material::new(Rgb::new(0.7, 0.5, 0.3), Rgb::new(0.2, 0.4, 0.1)));
        let mut model: RadianceModel<f64> = small_model().build(&scene, 4).unwrap();
        let store = model.encoder.as_vertex_mut().unwrap();
        store.refine_face(0, 3).unwrap();
        store.refine_face(5, 2).unwrap();
        for x in store.base_features_mut() {
            *x *= 1e3;
        }
        check_probe(&scene, model, config(10, 24, 2));
        let hash = ModelConfig {
            encoder: EncoderKind::HashGrid,
            hash_grid: HashGridConfig {
                table_size_log2: 10,
                levels: 3,
                ..Default::default()
            },
            ..small_model()
        };
        let mut model: RadianceModel<f64> = hash.build(&scene, 5).unwrap();
        for x in model.encoder.param_groups_mut().into_iter().flatten() {
            *x *= 1e3;
        }
        check_probe(&scene, model, config(10, 24, 2));
    }

    #[test]
    fn detached_rhs_drops_the_rhs_path() {
        let scene = furnace();
        let bvh = Bvh::build(&scene.mesh);
        let model: RadianceModel<f64> = small_model().build(&scene, 4).unwrap();
        let mut cfg = config(10, 16, 2);
        let mut full = Trainer::new(&scene, &bvh, cfg, TrainState::new(model.clone(), cfg.adam)).unwrap();
        let l_full = full.loss_and_gradients(0, 2).unwrap();
        cfg.detach_rhs = true;
        let mut det = Trainer::new(&scene, &bvh, cfg, TrainState::new(model, cfg.adam)).unwrap();
        let l_det = det.loss_and_gradients(0, 2).unwrap();
        assert_eq!(l_full, l_det);
        assert_ne!(full.gradients(), det.gradients());
    }

    /// Network output fixed at `softplus(bias)`.
    fn constant_network(model: &mut RadianceModel<f64>, bias: f64) {
        let n = model.mlp.layers().len();
        let last: &mut Dense<f64> = &mut model.mlp.layers_mut()[n - 1];
        last.weights.fill(0.0);
        last.bias.fill(bias);
    }

    #[test]
    fn furnace_solution_has_zero_gradient() {
        let scene = furnace();
        let bvh = Bvh::build(&scene.mesh);
        let mut model: RadianceModel<f64> = small_model().build(&scene, 4).unwrap();
        // softplus(ln(e − 1)) = 1, so L = 0.5 + 0.5·1 everywhere.
        constant_network(&mut model, libm::log(core::f64::consts::E - 1.0));
        let cfg = TrainConfig {
            chunk_rows: 8192,
            ..config(10, 100_000, 1)
        };
        let mut t = Trainer::new(&scene, &bvh, cfg, TrainState::new(model, cfg.adam)).unwrap();
        let loss = t.loss_and_gradients(0, 1).unwrap();
        assert!(loss < 1e-25, "{loss}");
        let worst = t.gradients().slices().iter().flat_map(|g| g.iter()).fold(0.0f64, |a, &g| a.max(g.abs()));
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn emitter_only_scene_has_zero_loss() {
        let scene = cube(Material::emitter(Rgb::new(1.0, 0.5, 0.25)));
        let bvh = Bvh::build(&scene.mesh);
        let model: RadianceModel<f32> = small_model().build(&scene, 4).unwrap();
        let cfg = config(10, 64, 4);
        let mut t = Trainer::new(&scene, &bvh, cfg, TrainState::new(model, cfg.adam)).unwrap();
        let r = t.step().unwrap();
        assert_eq!(r.loss, 0.0);
        assert!(!r.skipped);
    }

    #[test]
    fn same_seed_same_trajectory() {
        let scene = furnace();
        let bvh = Bvh::build(&scene.mesh);
        let run = || {
            let model: RadianceModel<f32> = small_model().build(&scene, 9).unwrap();
            let cfg = config(8, 32, 1);
            let mut t = Trainer::new(&scene, &bvh, cfg, TrainState::new(model, cfg.adam)).unwrap();
            let mut losses = Vec::new();
            t.run(|r| losses.push(r.loss)).unwrap();
            (losses, t.into_state())
        };
        let (a, sa) = run();
        let (b, sb) = run();
        assert_eq!(a, b);
        assert_eq!(sa, sb);
        assert_eq!(sa.step, 8);
    }

    #[test]
    fn furnace_loss_decreases() {
        let scene = furnace();
        let bvh = Bvh::build(&scene.mesh);
        let model: RadianceModel<f32> = small_model().build(&scene, 3).unwrap();
        let cfg = TrainConfig {
            adam: AdamConfig {
                learning_rate: 1e-2,
                ..Default::default()
            },
            ..config(300, 64, 1)
        };
        let mut t = Trainer::new(&scene, &bvh, cfg, TrainState::new(model, cfg.adam)).unwrap();
        let mut losses = Vec::new();
        t.run(|r| losses.push(r.loss)).unwrap();
        let head: f64 = losses[..20].iter().sum();
        let tail: f64 = losses[losses.len() - 20..].iter().sum();
        assert!(tail < 0.1 * head, "{head} -> {tail}");
    }

    #[test]
    fn capacity_is_monotone_and_capped() {
        // Bright floor, dark walls: floor faces carry the largest residuals.
        let mut scene = cube(Material::diffuse(Rgb::splat(0.8)));
        scene.materials.push(Material::new(Rgb::splat(0.5), Rgb::splat(20.0)));
        let mut fm = scene.mesh.face_materials().to_vec();
        fm[0] = 1;
        scene.mesh = crate::geometry::TriangleMesh::new(
            scene.mesh.vertices().to_vec(),
            scene.mesh.faces().to_vec(),
            fm,
            2,
        )
        .unwrap();
        let bvh = Bvh::build(&scene.mesh);
        let model: RadianceModel<f32> = small_model().build(&scene, 3).unwrap();
        let cfg = TrainConfig {
            lod_cap_ratio: 4.0,
            ..config(16, 256, 1)
        };
        let mut t = Trainer::new(&scene, &bvh, cfg, TrainState::new(model, cfg.adam)).unwrap();
        let base = t.model().encoder.param_count();
        let mut last = base;
        let mut updates = 0;
        while !t.is_finished() {
            let r = t.step().unwrap();
            if let Some(rep) = &r.refinement {
                updates += 1;
                assert!(rep.virtual_vertices <= rep.cap);
            }
            let count = t.model().encoder.param_count();
            assert!(count >= last);
            last = count;
        }
        assert_eq!(updates, 3);
        assert!(last > base);
        assert!(last <= base + 4 * 32);
    }

    #[test]
    fn loss_estimate_independent_of_alpha() {
        let scene = cube(Material::new(Rgb::new(0.7, 0.5, 0.3), Rgb::new(0.2, 0.4, 0.1)));
        let bvh = Bvh::build(&scene.mesh);
        let mut model: RadianceModel<f64> = small_model().build(&scene, 4).unwrap();
        let store = model.encoder.as_vertex_mut().unwrap();
        store.refine_face(0, 4).unwrap();
        store.refine_face(7, 3).unwrap();
        let lods = store.face_lods().to_vec();
        let n = 20_000;
        let area = FaceDistribution::build(&scene.mesh, Some(&lods), 1.0).unwrap();
        let vertex = FaceDistribution::build(&scene.mesh, Some(&lods), 0.0).unwrap();
        assert_ne!(area.probabilities(), vertex.probabilities());
        let (a, sa) = estimate_loss(&scene, &bvh, &model, &area, n, 1, 1).unwrap();
        let (b, sb) = estimate_loss(&scene, &bvh, &model, &vertex, n, 1, 2).unwrap();
        let sigma = libm::sqrt(sa * sa + sb * sb);
        assert!((a - b).abs() <= 3.0 * sigma, "{a} vs {b} (σ {sigma})");
    }
}
