//! Memory and quality table across encoders.

use std::fmt::Write as _;

use nvf_core::encoding::{EncoderKind, PositionEncoder};
use nvf_core::geometry::{Bvh, Scene};
use nvf_core::params::Parameterized;
use nvf_core::render::{mse, relmse, Image, DEFAULT_RELMSE_EPSILON};
use nvf_core::trainer::RadianceModel;
use serde::Serialize;

use crate::error::Result;
use crate::render::neural_image;

pub const BYTES_PER_PARAM: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub label: String,
    pub encoder: &'static str,
    pub encoder_params: usize,
    pub encoder_bytes: usize,
    pub mlp_params: usize,
    pub total_params: usize,
    pub total_bytes: usize,
    pub gathers_per_query: usize,
    /// Vertex encoder only: parameters if every allowed virtual vertex were used.
    pub encoder_params_at_cap: Option<usize>,
    pub mse: Option<f64>,
    pub relmse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub vertices: usize,
    pub faces: usize,
    pub lod_cap_ratio: f64,
    pub rows: Vec<BenchRow>,
    /// First hash-grid row over first vertex row, by encoder parameters.
    pub hash_over_vertex: Option<f64>,
    /// Same, with the vertex encoder at its cap.
    pub hash_over_vertex_at_cap: Option<f64>,
    pub manifest: String,
}

pub struct BenchEntry<'a> {
    pub label: String,
    pub model: &'a RadianceModel<f32>,
}

fn encoder_name(kind: EncoderKind) -> &'static str {
    match kind {
        EncoderKind::Vertex => "vertex",
        EncoderKind::HashGrid => "hashgrid",
    }
}

/// One row per entry. With a reference image each model is rendered with
/// `spp` samples per pixel and compared against it.
pub fn bench(
    scene: &Scene,
    entries: &[BenchEntry],
    lod_cap_ratio: f64,
    reference: Option<(&Image, u32, u64)>,
    manifest: &str,
) -> Result<BenchReport> {
    let bvh = Bvh::build(&scene.mesh);
    let cap = (lod_cap_ratio * scene.mesh.vertex_count() as f64) as usize;
    let mut rows = Vec::new();
    for e in entries {
        let encoder_params = e.model.encoder.param_count();
        let mlp_params = e.model.mlp.param_count();
        let at_cap = match &e.model.encoder {
            PositionEncoder::Vertex(s) => Some(s.width() * (s.vertex_count() + cap)),
            PositionEncoder::HashGrid(_) => None,
        };
        let (mse_v, relmse_v) = match reference {
            Some((img, spp, seed)) => {
                let rendered = neural_image(scene, &bvh, e.model, spp, seed)?;
                (
                    Some(mse(&rendered, img)?),
                    Some(relmse(&rendered, img, DEFAULT_RELMSE_EPSILON)?),
                )
            }
            None => (None, None),
        };
        rows.push(BenchRow {
            label: e.label.clone(),
            encoder: encoder_name(e.model.encoder.kind()),
            encoder_params,
            encoder_bytes: BYTES_PER_PARAM * encoder_params,
            mlp_params,
            total_params: encoder_params + mlp_params,
            total_bytes: BYTES_PER_PARAM * (encoder_params + mlp_params),
            gathers_per_query: e.model.encoder.gathers_per_query(),
            encoder_params_at_cap: at_cap,
            mse: mse_v,
            relmse: relmse_v,
        });
    }
    let first = |name: &str| rows.iter().find(|r| r.encoder == name);
    let (hash, vertex) = (first("hashgrid"), first("vertex"));
    let ratio = |a: Option<usize>, b: Option<usize>| match (a, b) {
        (Some(a), Some(b)) if b > 0 => Some(a as f64 / b as f64),
        _ => None,
    };
    Ok(BenchReport {
        vertices: scene.mesh.vertex_count(),
        faces: scene.mesh.face_count(),
        lod_cap_ratio,
        hash_over_vertex: ratio(hash.map(|r| r.encoder_params), vertex.map(|r| r.encoder_params)),
        hash_over_vertex_at_cap: ratio(
            hash.map(|r| r.encoder_params),
            vertex.and_then(|r| r.encoder_params_at_cap),
        ),
        rows,
        manifest: manifest.to_owned(),
    })
}

pub fn bench_csv(report: &BenchReport) -> String {
    let mut s = String::from(
        "label,encoder,encoder_params,encoder_bytes,mlp_params,total_params,total_bytes,gathers_per_query,encoder_params_at_cap,mse,relmse\n",
    );
    let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.label,
            r.encoder,
            r.encoder_params,
            r.encoder_bytes,
            r.mlp_params,
            r.total_params,
            r.total_bytes,
            r.gathers_per_query,
            r.encoder_params_at_cap.map(|v| v.to_string()).unwrap_or_default(),
            opt(r.mse),
            opt(r.relmse)
        );
    }
    s
}
