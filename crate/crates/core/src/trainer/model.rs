use alloc::vec;
use alloc::vec::Vec;

use crate::encoding::{PositionEncoder, SurfacePoint};
use crate::error::{Error, Result};
use crate::geometry::{Hit, Scene};
use crate::math::{Rgb, Vec3};
use crate::neural::mlp::{Mlp, MlpShape, MlpTape};
use crate::neural::oneblob::{oneblob_encode_into, DEFAULT_BINS};
use crate::neural::sh::{sh_coefficient_count, sh_encode_into, DEFAULT_SH_DEGREE, MAX_SH_DEGREE};
use crate::params::{Gradients, Parameterized};
use crate::real::Real;

/// Everything the radiance model is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShadingQuery {
    pub point: SurfacePoint,
    /// Unit normal on the side being shaded.
    pub normal: Vec3,
    /// Unit outgoing direction.
    pub wo: Vec3,
    pub albedo: Rgb,
    pub emission: Rgb,
}

impl ShadingQuery {
    pub fn at_hit(scene: &Scene, hit: &Hit, wo: Vec3) -> Self {
        let material = scene.materials[hit.material];
        ShadingQuery {
            point: SurfacePoint {
                face: hit.face,
                u: hit.u,
                v: hit.v,
                position: hit.position,
            },
            normal: hit.normal,
            wo,
            albedo: material.albedo,
            emission: material.emission,
        }
    }
}

/// Anything that can answer radiance queries: the trained model or an
/// analytic stand-in.
pub trait RadianceField {
    fn radiance(&self, queries: &[ShadingQuery]) -> Result<Vec<Rgb>>;
}

/// `L ≡ c` everywhere.
#[derive(Debug, Clone, Copy)]
pub struct ConstantRadiance(pub Rgb);

impl RadianceField for ConstantRadiance {
    fn radiance(&self, queries: &[ShadingQuery]) -> Result<Vec<Rgb>> {
        Ok(vec![self.0; queries.len()])
    }
}

/// `L ≡ L_e`: emitted radiance only.
#[derive(Debug, Clone, Copy)]
pub struct EmittedRadiance;

impl RadianceField for EmittedRadiance {
    fn radiance(&self, queries: &[ShadingQuery]) -> Result<Vec<Rgb>> {
        Ok(queries.iter().map(|q| q.emission).collect())
    }
}

/// Radiance given by a closure over single queries.
pub struct FnRadiance<F>(pub F);

impl<F: Fn(&ShadingQuery) -> Rgb> RadianceField for FnRadiance<F> {
    fn radiance(&self, queries: &[ShadingQuery]) -> Result<Vec<Rgb>> {
        Ok(queries.iter().map(&self.0).collect())
    }
}

/// Fixed-function encodings appended after the position feature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InputLayout {
    pub sh_degree: u32,
    pub oneblob_bins: usize,
}

impl Default for InputLayout {
    fn default() -> Self {
        InputLayout {
            sh_degree: DEFAULT_SH_DEGREE,
            oneblob_bins: DEFAULT_BINS,
        }
    }
}

impl InputLayout {
    pub fn validate(&self) -> Result<()> {
        if self.sh_degree > MAX_SH_DEGREE || self.oneblob_bins == 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "input layout out of range: sh degree {}, oneblob bins {}",
                self.sh_degree,
                self.oneblob_bins
            )));
        }
        Ok(())
    }

    /// Network input width for a position feature of `position_width`:
    /// `[feature | SH(ωo) | SH(n) | OneBlob(albedo)]`.
    pub fn width(&self, position_width: usize) -> usize {
        position_width + 2 * sh_coefficient_count(self.sh_degree) + 3 * self.oneblob_bins
    }
}

/// Network rows for the queries that need the network (non-black albedo).
#[derive(Debug, Clone, Default)]
pub struct NetworkBatch<T> {
    pub input: Vec<T>,
    /// Query index of each row.
    pub rows: Vec<usize>,
}

/// Gradient buffers for a [`RadianceModel`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelGradients<T> {
    pub mlp: Gradients<T>,
    pub encoder: Gradients<T>,
}

impl<T: Real> ModelGradients<T> {
    pub fn zeros_like(model: &RadianceModel<T>) -> Self {
        ModelGradients {
            mlp: Gradients::zeros_like(&model.mlp),
            encoder: Gradients::zeros_like(&model.encoder),
        }
    }

    pub fn conform_to(&mut self, model: &RadianceModel<T>) {
        self.mlp.conform_to(&model.mlp);
        self.encoder.conform_to(&model.encoder);
    }

    pub fn zero(&mut self) {
        self.mlp.zero();
        self.encoder.zero();
    }

    /// Same order as [`RadianceModel::param_groups`].
    pub fn slices(&self) -> Vec<&[T]> {
        let mut s = self.mlp.slices();
        s.extend(self.encoder.slices());
        s
    }
}

/// `L_θ(x, ωo) = L_e(x) + albedo(x) ⊙ MLP(feature(x), SH(ωo), SH(n), OneBlob(albedo))`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadianceModel<T> {
    pub encoder: PositionEncoder<T>,
    pub mlp: Mlp<T>,
    pub inputs: InputLayout,
}

impl<T: Real> RadianceModel<T> {
    pub fn new(
        encoder: PositionEncoder<T>,
        hidden_width: usize,
        hidden_layers: usize,
        inputs: InputLayout,
        seed: u64,
    ) -> Result<Self> {
        inputs.validate()?;
        let shape = MlpShape {
            inputs: inputs.width(encoder.output_width()),
            hidden_width,
            hidden_layers,
            outputs: 3,
        };
        let mlp = Mlp::new(shape, seed)?;
        Ok(RadianceModel { encoder, mlp, inputs })
    }

    pub fn from_parts(encoder: PositionEncoder<T>, mlp: Mlp<T>, inputs: InputLayout) -> Result<Self> {
        inputs.validate()?;
        let expected = inputs.width(encoder.output_width());
        if mlp.input_width() != expected {
            return Err(Error::ShapeMismatch {
                what: "network input width",
                expected,
                found: mlp.input_width(),
            });
        }
        if mlp.output_width() != 3 {
            return Err(Error::ShapeMismatch {
                what: "network output width",
                expected: 3,
                found: mlp.output_width(),
            });
        }
        Ok(RadianceModel { encoder, mlp, inputs })
    }

    pub fn input_width(&self) -> usize {
        self.mlp.input_width()
    }

    /// Writes the network input for `q` into `row`.
    pub fn write_input(&self, q: &ShadingQuery, row: &mut [T]) -> Result<()> {
        let pw = self.encoder.output_width();
        let sh = sh_coefficient_count(self.inputs.sh_degree);
        let bins = self.inputs.oneblob_bins;
        self.encoder.encode_into(&q.point, &mut row[..pw])?;
        let mut buf = [0.0f64; 25];
        let mut at = pw;
        for dir in [q.wo, q.normal] {
            sh_encode_into(dir, self.inputs.sh_degree, &mut buf[..sh])?;
            for (o, &c) in row[at..at + sh].iter_mut().zip(&buf[..sh]) {
                *o = T::from_f64(c);
            }
            at += sh;
        }
        let mut blob = vec![0.0f64; bins];
        for c in 0..3 {
            oneblob_encode_into(q.albedo[c], bins, &mut blob);
            for (o, &b) in row[at..at + bins].iter_mut().zip(&blob) {
                *o = T::from_f64(b);
            }
            at += bins;
        }
        Ok(())
    }

    pub fn network_batch(&self, queries: &[ShadingQuery]) -> Result<NetworkBatch<T>> {
        let w = self.input_width();
        let rows: Vec<usize> = (0..queries.len()).filter(|&i| !queries[i].albedo.is_black()).collect();
        let mut input = vec![T::zero(); rows.len() * w];
        for (chunk, &q) in input.chunks_exact_mut(w).zip(&rows) {
            self.write_input(&queries[q], chunk)?;
        }
        Ok(NetworkBatch { input, rows })
    }

    /// Combines network outputs (`rows × 3`) with emission and albedo.
    pub fn compose(&self, queries: &[ShadingQuery], batch: &NetworkBatch<T>, output: &[T]) -> Vec<Rgb> {
        let mut radiance: Vec<Rgb> = queries.iter().map(|q| q.emission).collect();
        for (j, &q) in batch.rows.iter().enumerate() {
            let o = &output[3 * j..3 * j + 3];
            let net = Rgb::new(o[0].as_f64(), o[1].as_f64(), o[2].as_f64());
            radiance[q] += queries[q].albedo * net;
        }
        radiance
    }

    pub fn forward_with_tape(&self, batch: &NetworkBatch<T>) -> Result<(Vec<T>, MlpTape<T>)> {
        self.mlp.forward_with_tape(&batch.input, batch.rows.len())
    }

    /// Accumulates gradients given `d_radiance` per query, routing the
    /// albedo factor back through the network and into the encoder.
    pub fn backward(
        &self,
        queries: &[ShadingQuery],
        batch: &NetworkBatch<T>,
        tape: &MlpTape<T>,
        d_radiance: &[Rgb],
        grads: &mut ModelGradients<T>,
    ) -> Result<()> {
        let mut d_out = vec![T::zero(); 3 * batch.rows.len()];
        for (j, &q) in batch.rows.iter().enumerate() {
            let g = d_radiance[q] * queries[q].albedo;
            for c in 0..3 {
                d_out[3 * j + c] = T::from_f64(g[c]);
            }
        }
        let d_in = self.mlp.backward(tape, &d_out, &mut grads.mlp)?;
        let w = self.input_width();
        let pw = self.encoder.output_width();
        for (j, &q) in batch.rows.iter().enumerate() {
            self.encoder
                .encode_backward(&queries[q].point, &d_in[j * w..j * w + pw], &mut grads.encoder)?;
        }
        Ok(())
    }

    pub fn predict(&self, queries: &[ShadingQuery]) -> Result<Vec<Rgb>> {
        let batch = self.network_batch(queries)?;
        let out = self.mlp.forward(&batch.input, batch.rows.len())?;
        Ok(self.compose(queries, &batch, &out))
    }
}

impl<T: Real> RadianceField for RadianceModel<T> {
    fn radiance(&self, queries: &[ShadingQuery]) -> Result<Vec<Rgb>> {
        self.predict(queries)
    }
}

impl<T: Real> Parameterized<T> for RadianceModel<T> {
    /// Network groups first, then encoder groups.
    fn param_groups(&self) -> Vec<&[T]> {
        let mut g = self.mlp.param_groups();
        g.extend(self.encoder.param_groups());
        g
    }

    fn param_groups_mut(&mut self) -> Vec<&mut [T]> {
        let mut g = self.mlp.param_groups_mut();
        g.extend(self.encoder.param_groups_mut());
        g
    }

    fn param_count(&self) -> usize {
        self.mlp.param_count() + self.encoder.param_count()
    }
}

/// Radiance leaving the primary hit `hit` toward `wo`.
pub fn predict_radiance<F: RadianceField + ?Sized>(scene: &Scene, field: &F, hit: &Hit, wo: Vec3) -> Result<Rgb> {
    let q = ShadingQuery::at_hit(scene, hit, wo);
    Ok(field.radiance(core::slice::from_ref(&q))?[0])
}
