//! Binary training checkpoints.
//!
//! Layout (little-endian): magic, format version, 32-byte geometry hash,
//! run id, step, then three tagged segments (`ENC `, `NET `, `OPT `), each
//! prefixed with its byte length.

use std::fs;
use std::path::Path;

use nvf_core::encoding::{HashGridConfig, HashGridEncoder, PositionEncoder, VertexFeatureStore};
use nvf_core::geometry::TriangleMesh;
use nvf_core::neural::{AdamConfig, Dense, Mlp, OptimizerState};
use nvf_core::trainer::{InputLayout, RadianceModel, TrainState};
use nvf_core::Vec3;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"NVFCKPT\0";
pub const VERSION: u32 = 1;

/// SHA-256 over vertex positions and face indices.
pub fn geometry_hash(mesh: &TriangleMesh) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(b"nvf-geometry");
    h.update((mesh.vertex_count() as u64).to_le_bytes());
    for v in mesh.vertices() {
        for c in v.to_array() {
            h.update(c.to_le_bytes());
        }
    }
    h.update((mesh.face_count() as u64).to_le_bytes());
    for f in mesh.faces() {
        for i in f {
            h.update(i.to_le_bytes());
        }
    }
    h.finalize().into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub geometry_hash: [u8; 32],
    /// Identifier of the run manifest that produced this file.
    pub run_id: String,
    pub state: TrainState<f32>,
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f32s(&mut self, v: &[f32]) {
        self.u64(v.len() as u64);
        for x in v {
            self.0.extend_from_slice(&x.to_le_bytes());
        }
    }
    fn u32s(&mut self, v: &[u32]) {
        self.u64(v.len() as u64);
        for x in v {
            self.u32(*x);
        }
    }
    fn str(&mut self, s: &str) {
        self.u64(s.len() as u64);
        self.0.extend_from_slice(s.as_bytes());
    }
    fn segment(&mut self, tag: &[u8; 4], body: Writer) {
        self.0.extend_from_slice(tag);
        self.u64(body.0.len() as u64);
        self.0.extend(body.0);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn err(&self, m: impl Into<String>) -> Error {
        Error::format(self.path, m)
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err(format!("truncated at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn array<const N: usize>(&mut self) -> Result<[u8; N]> {
        Ok(self.take(N)?.try_into().unwrap())
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.array()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.array()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.array()?))
    }
    fn len(&mut self, elem: usize) -> Result<usize> {
        let n = self.u64()? as usize;
        if n.checked_mul(elem).is_none_or(|b| b > self.bytes.len() - self.pos) {
            return Err(self.err(format!("array of {n} elements overruns the file")));
        }
        Ok(n)
    }
    fn f32s(&mut self) -> Result<Vec<f32>> {
        let n = self.len(4)?;
        Ok(self
            .take(4 * n)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn u32s(&mut self) -> Result<Vec<u32>> {
        let n = self.len(4)?;
        Ok(self
            .take(4 * n)?
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
    fn str(&mut self) -> Result<String> {
        let n = self.len(1)?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| self.err("run id is not UTF-8"))
    }
    fn segment(&mut self, tag: &[u8; 4]) -> Result<Reader<'a>> {
        let found = self.array::<4>()?;
        if &found != tag {
            return Err(self.err(format!(
                "expected segment {:?}, found {:?}",
                String::from_utf8_lossy(tag),
                String::from_utf8_lossy(&found)
            )));
        }
        let n = self.len(1)?;
        Ok(Reader {
            bytes: self.take(n)?,
            pos: 0,
            path: self.path,
        })
    }
    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.err(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}

fn write_encoder(w: &mut Writer, encoder: &PositionEncoder<f32>) {
    match encoder {
        PositionEncoder::Vertex(s) => {
            w.u8(0);
            w.u32(s.width() as u32);
            w.f32s(s.base_features());
            w.u32s(s.face_lods());
            w.u64(s.blocks().len() as u64);
            for b in s.blocks() {
                w.f32s(b);
            }
        }
        PositionEncoder::HashGrid(g) => {
            let c = g.config();
            w.u8(1);
            w.u32(c.levels);
            w.u32(c.base_resolution);
            w.f64(c.per_level_scale);
            w.u32(c.features_per_level);
            w.u32(c.table_size_log2);
            let (lo, hi) = g.bounds();
            for x in lo.to_array().into_iter().chain(hi.to_array()) {
                w.f64(x);
            }
            w.u64(g.tables().len() as u64);
            for t in g.tables() {
                w.f32s(t);
            }
        }
    }
}

fn read_encoder(r: &mut Reader, faces: &[[u32; 3]]) -> Result<PositionEncoder<f32>> {
    match r.u8()? {
        0 => {
            let width = r.u32()? as usize;
            let base = r.f32s()?;
            let lods = r.u32s()?;
            let n = r.len(8)?;
            let blocks = (0..n).map(|_| r.f32s()).collect::<Result<Vec<_>>>()?;
            Ok(PositionEncoder::Vertex(VertexFeatureStore::from_parts(
                width,
                faces.to_vec(),
                base,
                lods,
                blocks,
            )?))
        }
        1 => {
            let config = HashGridConfig {
                levels: r.u32()?,
                base_resolution: r.u32()?,
                per_level_scale: r.f64()?,
                features_per_level: r.u32()?,
                table_size_log2: r.u32()?,
            };
            let lo = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
            let hi = Vec3::new(r.f64()?, r.f64()?, r.f64()?);
            let n = r.len(8)?;
            let tables = (0..n).map(|_| r.f32s()).collect::<Result<Vec<_>>>()?;
            Ok(PositionEncoder::HashGrid(HashGridEncoder::from_parts(config, (lo, hi), tables)?))
        }
        k => Err(r.err(format!("unknown encoder kind {k}"))),
    }
}

fn write_network(w: &mut Writer, model: &RadianceModel<f32>) {
    w.u32(model.inputs.sh_degree);
    w.u32(model.inputs.oneblob_bins as u32);
    w.u32(model.mlp.layers().len() as u32);
    for l in model.mlp.layers() {
        w.u32(l.inputs as u32);
        w.u32(l.outputs as u32);
        w.f32s(&l.weights);
        w.f32s(&l.bias);
    }
}

fn read_network(r: &mut Reader) -> Result<(InputLayout, Mlp<f32>)> {
    let inputs = InputLayout {
        sh_degree: r.u32()?,
        oneblob_bins: r.u32()? as usize,
    };
    let n = r.u32()?;
    let mut layers = Vec::new();
    for _ in 0..n {
        layers.push(Dense {
            inputs: r.u32()? as usize,
            outputs: r.u32()? as usize,
            weights: r.f32s()?,
            bias: r.f32s()?,
        });
    }
    Ok((inputs, Mlp::from_layers(layers)?))
}

fn write_optimizer(w: &mut Writer, opt: &OptimizerState<f32>) {
    let c = opt.config;
    for x in [c.learning_rate, c.beta1, c.beta2, c.epsilon, c.decay] {
        w.f64(x);
    }
    w.u64(opt.step);
    w.u32(opt.first_moment.len() as u32);
    for (m, v) in opt.first_moment.iter().zip(&opt.second_moment) {
        w.f32s(m);
        w.f32s(v);
    }
}

fn read_optimizer(r: &mut Reader) -> Result<OptimizerState<f32>> {
    let config = AdamConfig {
        learning_rate: r.f64()?,
        beta1: r.f64()?,
        beta2: r.f64()?,
        epsilon: r.f64()?,
        decay: r.f64()?,
    };
    let step = r.u64()?;
    let n = r.u32()?;
    let mut opt = OptimizerState::new(config);
    opt.step = step;
    for _ in 0..n {
        let m = r.f32s()?;
        let v = r.f32s()?;
        if m.len() != v.len() {
            return Err(r.err("optimizer moment lengths differ"));
        }
        opt.first_moment.push(m);
        opt.second_moment.push(v);
    }
    Ok(opt)
}

pub fn encode_checkpoint(c: &Checkpoint) -> Vec<u8> {
    let mut w = Writer::default();
    w.0.extend_from_slice(MAGIC);
    w.u32(VERSION);
    w.0.extend_from_slice(&c.geometry_hash);
    w.str(&c.run_id);
    w.u64(c.state.step);
    let mut enc = Writer::default();
    write_encoder(&mut enc, &c.state.model.encoder);
    w.segment(b"ENC ", enc);
    let mut net = Writer::default();
    write_network(&mut net, &c.state.model);
    w.segment(b"NET ", net);
    let mut opt = Writer::default();
    write_optimizer(&mut opt, &c.state.optimizer);
    w.segment(b"OPT ", opt);
    w.0
}

/// Decodes a checkpoint for `mesh`, failing if it was trained on other
/// geometry. `path` only labels errors.
pub fn decode_checkpoint(bytes: &[u8], mesh: &TriangleMesh, path: &Path) -> Result<Checkpoint> {
    let mut r = Reader { bytes, pos: 0, path };
    if r.take(MAGIC.len()).ok() != Some(&MAGIC[..]) {
        return Err(r.err("not a checkpoint file"));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(r.err(format!("unsupported checkpoint version {version}")));
    }
    let geometry_hash: [u8; 32] = r.array()?;
    let expected = self::geometry_hash(mesh);
    if geometry_hash != expected {
        return Err(Error::GeometryMismatch {
            expected: hex(&expected[..8]),
            found: hex(&geometry_hash[..8]),
        });
    }
    let run_id = r.str()?;
    let step = r.u64()?;
    let mut enc = r.segment(b"ENC ")?;
    let encoder = read_encoder(&mut enc, mesh.faces())?;
    enc.finish()?;
    let mut net = r.segment(b"NET ")?;
    let (inputs, mlp) = read_network(&mut net)?;
    net.finish()?;
    let mut opt = r.segment(b"OPT ")?;
    let optimizer = read_optimizer(&mut opt)?;
    opt.finish()?;
    r.finish()?;
    Ok(Checkpoint {
        geometry_hash,
        run_id,
        state: TrainState {
            model: RadianceModel::from_parts(encoder, mlp, inputs)?,
            optimizer,
            step,
        },
    })
}

pub fn save_checkpoint(path: &Path, c: &Checkpoint) -> Result<()> {
    fs::write(path, encode_checkpoint(c)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path, mesh: &TriangleMesh) -> Result<Checkpoint> {
    decode_checkpoint(&fs::read(path).map_err(|e| Error::io(path, e))?, mesh, path)
}
