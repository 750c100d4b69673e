use alloc::vec;
use alloc::vec::Vec;

use crate::encoding::{lod_vertex_count, VertexFeatureStore};
use crate::error::{Error, Result};
use crate::real::Real;

/// Squared-residual sums and sample counts per face over the current
/// update interval.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceLossStats {
    sum: Vec<f64>,
    count: Vec<u64>,
}

impl FaceLossStats {
    pub fn new(face_count: usize) -> Self {
        FaceLossStats {
            sum: vec![0.0; face_count],
            count: vec![0; face_count],
        }
    }

    pub fn face_count(&self) -> usize {
        self.sum.len()
    }

    pub fn record(&mut self, face: usize, loss: f64) {
        self.sum[face] += loss;
        self.count[face] += 1;
    }

    pub fn count(&self, face: usize) -> u64 {
        self.count[face]
    }

    pub fn mean(&self, face: usize) -> Option<f64> {
        (self.count[face] > 0).then(|| self.sum[face] / self.count[face] as f64)
    }

    pub fn sampled_faces(&self) -> usize {
        self.count.iter().filter(|&&c| c > 0).count()
    }

    /// Mean and population standard deviation of the per-face means, over
    /// faces with at least one sample.
    pub fn population(&self) -> Option<(f64, f64)> {
        let means: Vec<f64> = (0..self.face_count()).filter_map(|f| self.mean(f)).collect();
        if means.is_empty() {
            return None;
        }
        let n = means.len() as f64;
        let mean = means.iter().sum::<f64>() / n;
        let var = means.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / n;
        Some((mean, libm::sqrt(var)))
    }

    pub fn reset(&mut self) {
        self.sum.fill(0.0);
        self.count.fill(0);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LodChange {
    pub face: usize,
    pub from: u32,
    pub to: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RefinementReport {
    pub loss_mean: f64,
    pub loss_std: f64,
    pub changes: Vec<LodChange>,
    /// A candidate was clamped or dropped to respect the cap.
    pub capped: bool,
    pub virtual_vertices: usize,
    pub cap: usize,
}

/// Raises `k_i` by `⌊(L(i) − L_mean)/L_std⌋` for faces with
/// `L(i) > L_mean + 2·L_std`, highest loss first, while the number of
/// virtual vertices stays within `cap_ratio` times the original vertex
/// count. A face whose full jump would overrun the cap gets the largest
/// level that still fits and refinement stops there. Statistics are reset.
pub fn update_lod<T: Real>(
    stats: &mut FaceLossStats,
    store: &mut VertexFeatureStore<T>,
    cap_ratio: f64,
) -> Result<RefinementReport> {
    if stats.face_count() != store.face_count() {
        return Err(Error::ShapeMismatch {
            what: "loss statistics",
            expected: store.face_count(),
            found: stats.face_count(),
        });
    }
    if !(cap_ratio >= 0.0) {
        return Err(Error::InvalidArgument(alloc::format!("cap ratio {cap_ratio} is negative")));
    }
    let cap = (cap_ratio * store.vertex_count() as f64) as usize;
    let mut virtual_vertices = store.virtual_vertex_count();
    let mut report = RefinementReport {
        loss_mean: 0.0,
        loss_std: 0.0,
        changes: Vec::new(),
        capped: false,
        virtual_vertices,
        cap,
    };
    let population = stats.population();
    let enough = stats.sampled_faces() >= 2;
    let candidates = match population {
        Some((mean, std)) if enough && std > 0.0 => {
            report.loss_mean = mean;
            report.loss_std = std;
            let mut c: Vec<(usize, f64)> = (0..stats.face_count())
                .filter_map(|f| stats.mean(f).map(|l| (f, l)))
                .filter(|&(_, l)| l > mean + 2.0 * std)
                .collect();
            c.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            c
        }
        _ => Vec::new(),
    };
    let (mean, std) = (report.loss_mean, report.loss_std);
    for (face, loss) in candidates {
        let from = store.lod(face);
        let jump = libm::floor((loss - mean) / std) as u32;
        let held = if from > 1 { lod_vertex_count(from) } else { 0 };
        let fits = |k: u32| virtual_vertices - held + lod_vertex_count(k) <= cap;
        let mut to = from.saturating_add(jump);
        if !fits(to) {
            report.capped = true;
            while to > from && !fits(to) {
                to -= 1;
            }
        }
        if to > from {
            store.refine_face(face, to)?;
            virtual_vertices = virtual_vertices - held + lod_vertex_count(to);
            report.changes.push(LodChange { face, from, to });
        }
        if report.capped {
            break;
        }
    }
    report.virtual_vertices = virtual_vertices;
    stats.reset();
    Ok(report)
}
