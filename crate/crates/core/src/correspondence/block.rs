use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::CentralizedFeatures;
use crate::types::{Region, RegionIndex};

/// Cosine similarity of two centralized descriptors with guarded norms.
#[inline]
pub(crate) fn cosine(a: &[f64], norm_a: f64, b: &[f64], norm_b: f64, epsilon: f64) -> f64 {
    let mut dot = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
    }
    dot / (norm_a.max(epsilon) * norm_b.max(epsilon))
}

/// Read access to a correlation block, whether it is stored or computed on
/// demand. Rows are animated-frame pixels, columns target-frame pixels.
pub trait Affinity: Sync {
    fn rows(&self) -> &RegionIndex;

    fn cols(&self) -> &RegionIndex;

    /// Writes row `i` (one value per column) into `out`.
    fn row_into(&self, i: usize, out: &mut [f64]);

    /// Writes column `j` (one value per row) into `out`.
    fn col_into(&self, j: usize, out: &mut [f64]);

    fn region(&self) -> Region {
        self.rows().region()
    }

    fn shape(&self) -> (usize, usize) {
        (self.rows().len(), self.cols().len())
    }
}

/// Counts live correlation entries and remembers the high-water mark.
#[derive(Debug, Default)]
pub struct EntryTracker {
    live: AtomicU64,
    peak: AtomicU64,
    total: AtomicU64,
}

impl EntryTracker {
    pub fn new() -> Arc<Self> {
        Arc::new(Self::default())
    }

    fn allocate(&self, n: u64) {
        let live = self.live.fetch_add(n, Ordering::SeqCst) + n;
        self.peak.fetch_max(live, Ordering::SeqCst);
        self.total.fetch_add(n, Ordering::SeqCst);
    }

    fn release(&self, n: u64) {
        self.live.fetch_sub(n, Ordering::SeqCst);
    }

    pub fn live(&self) -> u64 {
        self.live.load(Ordering::SeqCst)
    }

    pub fn peak(&self) -> u64 {
        self.peak.load(Ordering::SeqCst)
    }

    /// Entries ever allocated.
    pub fn total(&self) -> u64 {
        self.total.load(Ordering::SeqCst)
    }
}

/// A materialized `N_A × N_T` matrix of cosine similarities for one region.
pub struct CorrelationBlock {
    rows: RegionIndex,
    cols: RegionIndex,
    values: Vec<f64>,
    tracker: Option<Arc<EntryTracker>>,
}

impl CorrelationBlock {
    /// Value at (row `i`, column `j`), positions within the region indices.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.cols.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of stored entries.
    pub fn entries(&self) -> usize {
        self.values.len()
    }
}

impl std::fmt::Debug for CorrelationBlock {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "CorrelationBlock({}, {}x{})",
            self.rows.region(),
            self.rows.len(),
            self.cols.len()
        )
    }
}

impl Drop for CorrelationBlock {
    fn drop(&mut self) {
        if let Some(t) = &self.tracker {
            t.release(self.values.len() as u64);
        }
    }
}

impl Affinity for CorrelationBlock {
    fn rows(&self) -> &RegionIndex {
        &self.rows
    }

    fn cols(&self) -> &RegionIndex {
        &self.cols
    }

    fn row_into(&self, i: usize, out: &mut [f64]) {
        out.copy_from_slice(self.row(i));
    }

    fn col_into(&self, j: usize, out: &mut [f64]) {
        let n = self.cols.len();
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.values[i * n + j];
        }
    }
}

/// Shared read-only view of both centralized feature maps.
#[derive(Clone, Copy, Debug)]
pub struct Correlator<'a> {
    animated: &'a CentralizedFeatures,
    target: &'a CentralizedFeatures,
    epsilon: f64,
}

impl<'a> Correlator<'a> {
    pub fn new(
        animated: &'a CentralizedFeatures,
        target: &'a CentralizedFeatures,
        epsilon: f64,
    ) -> Result<Self> {
        if animated.channels() != target.channels() {
            return Err(Error::invalid(format!(
                "channel mismatch: animated features have {}, target features {}",
                animated.channels(),
                target.channels()
            )));
        }
        if epsilon.is_nan() || epsilon <= 0.0 {
            return Err(Error::invalid("epsilon must be positive"));
        }
        Ok(Self {
            animated,
            target,
            epsilon,
        })
    }

    pub fn animated(&self) -> &'a CentralizedFeatures {
        self.animated
    }

    pub fn target(&self) -> &'a CentralizedFeatures {
        self.target
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// Similarity between animated pixel `u` and target pixel `v`.
    #[inline]
    pub fn value(&self, u: usize, v: usize) -> f64 {
        cosine(
            self.animated.pixel(u),
            self.animated.norm(u),
            self.target.pixel(v),
            self.target.norm(v),
            self.epsilon,
        )
    }

    fn check(&self, rows: &RegionIndex, cols: &RegionIndex) -> Result<()> {
        if rows.dims() != self.animated.dims() {
            return Err(Error::invalid(format!(
                "row index frame {:?} does not match animated features {:?}",
                rows.dims(),
                self.animated.dims()
            )));
        }
        if cols.dims() != self.target.dims() {
            return Err(Error::invalid(format!(
                "column index frame {:?} does not match target features {:?}",
                cols.dims(),
                self.target.dims()
            )));
        }
        Ok(())
    }

    /// Materializes the block, registering its entries with `tracker`.
    pub fn block(
        &self,
        rows: &RegionIndex,
        cols: &RegionIndex,
        tracker: Option<&Arc<EntryTracker>>,
    ) -> Result<CorrelationBlock> {
        self.check(rows, cols)?;
        let n = cols.len();
        let mut values = vec![0.0; rows.len() * n];
        if let Some(t) = tracker {
            t.allocate(values.len() as u64);
        }
        if n > 0 {
            values
                .par_chunks_mut(n)
                .zip(rows.indices().par_iter())
                .for_each(|(out, &u)| {
                    for (o, &v) in out.iter_mut().zip(cols.indices()) {
                        *o = self.value(u as usize, v as usize);
                    }
                });
        }
        Ok(CorrelationBlock {
            rows: rows.clone(),
            cols: cols.clone(),
            values,
            tracker: tracker.cloned(),
        })
    }

    /// A block whose entries are recomputed whenever a row or column is read.
    pub fn streamed(&self, rows: RegionIndex, cols: RegionIndex) -> Result<StreamedBlock<'a>> {
        self.check(&rows, &cols)?;
        Ok(StreamedBlock {
            correlator: *self,
            rows,
            cols,
        })
    }
}

/// Correlation block that never stores more than one row or column.
#[derive(Clone, Debug)]
pub struct StreamedBlock<'a> {
    correlator: Correlator<'a>,
    rows: RegionIndex,
    cols: RegionIndex,
}

impl Affinity for StreamedBlock<'_> {
    fn rows(&self) -> &RegionIndex {
        &self.rows
    }

    fn cols(&self) -> &RegionIndex {
        &self.cols
    }

    fn row_into(&self, i: usize, out: &mut [f64]) {
        let u = self.rows.indices()[i] as usize;
        for (o, &v) in out.iter_mut().zip(self.cols.indices()) {
            *o = self.correlator.value(u, v as usize);
        }
    }

    fn col_into(&self, j: usize, out: &mut [f64]) {
        let v = self.cols.indices()[j] as usize;
        for (o, &u) in out.iter_mut().zip(self.rows.indices()) {
            *o = self.correlator.value(u as usize, v);
        }
    }
}

/// Cosine similarities restricted to one region pair.
///
/// Allocates exactly `rows.len() × cols.len()` entries.
pub fn region_correlation(
    animated: &CentralizedFeatures,
    target: &CentralizedFeatures,
    rows: &RegionIndex,
    cols: &RegionIndex,
    epsilon: f64,
) -> Result<CorrelationBlock> {
    Correlator::new(animated, target, epsilon)?.block(rows, cols, None)
}

/// Largest frame, in pixels, that [`naive_full_correlation`] accepts by default.
pub const DEFAULT_NAIVE_CAP: usize = 64 * 64;

/// Dense `wh × wh` similarity matrix between every animated and every target pixel.
pub struct FullCorrelation {
    pixels: usize,
    values: Vec<f64>,
    tracker: Option<Arc<EntryTracker>>,
}

impl FullCorrelation {
    #[inline]
    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.values[u * self.pixels + v]
    }

    pub fn pixels(&self) -> usize {
        self.pixels
    }

    pub fn entries(&self) -> usize {
        self.values.len()
    }
}

impl Drop for FullCorrelation {
    fn drop(&mut self) {
        if let Some(t) = &self.tracker {
            t.release(self.values.len() as u64);
        }
    }
}

/// Baseline correlation over all pixel pairs.
///
/// Normalizes every descriptor first and then takes plain dot products, a
/// different evaluation order from the per-region path. Frames larger than
/// `cap` pixels are refused.
pub fn naive_full_correlation(
    animated: &CentralizedFeatures,
    target: &CentralizedFeatures,
    epsilon: f64,
    cap: usize,
    tracker: Option<&Arc<EntryTracker>>,
) -> Result<FullCorrelation> {
    if animated.dims() != target.dims() {
        return Err(Error::DimensionMismatch {
            what: "naive correlation",
            left_w: animated.width(),
            left_h: animated.height(),
            right_w: target.width(),
            right_h: target.height(),
        });
    }
    if animated.channels() != target.channels() {
        return Err(Error::invalid("channel mismatch between feature maps"));
    }
    let pixels = animated.pixel_count();
    if pixels > cap {
        return Err(Error::CapExceeded {
            pixels,
            cap,
            entries: (pixels as u128) * (pixels as u128),
        });
    }
    let unit = |f: &CentralizedFeatures| -> Vec<f64> {
        let mut out = Vec::with_capacity(f.values().len());
        for i in 0..f.pixel_count() {
            let s = 1.0 / f.norm(i).max(epsilon);
            out.extend(f.pixel(i).iter().map(|x| x * s));
        }
        out
    };
    let c = animated.channels();
    let (ua, ut) = (unit(animated), unit(target));
    let mut values = vec![0.0; pixels * pixels];
    if let Some(t) = tracker {
        t.allocate(values.len() as u64);
    }
    values
        .par_chunks_mut(pixels)
        .enumerate()
        .for_each(|(u, row)| {
            let a = &ua[u * c..(u + 1) * c];
            for (v, o) in row.iter_mut().enumerate() {
                let b = &ut[v * c..(v + 1) * c];
                *o = a.iter().zip(b).map(|(x, y)| x * y).sum();
            }
        });
    Ok(FullCorrelation {
        pixels,
        values,
        tracker: tracker.cloned(),
    })
}
