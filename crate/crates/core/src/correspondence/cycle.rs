//! Target → animated → target round trips and their L1 losses.

use super::block::{Affinity, Correlator};
use super::warp::{check_tau, gather, quantize, softmax_warp, to_f64, warp_cols};
use crate::error::{Error, Result};
use crate::types::{ReferenceImage, Region, RegionIndex, RgbImage};

/// Cycle loss contributed by one region.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionCycleLoss {
    pub region: Region,
    /// Target pixels that received a round-trip color.
    pub pixels: usize,
    /// Mean absolute error on the [0, 1] color scale; `None` when the region
    /// has no pixels on one side.
    pub loss: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct CycleResult {
    /// Colors warped back into target geometry.
    pub reference: ReferenceImage,
    /// Mean absolute error over every valid pixel and channel, in [0, 1].
    pub loss: f64,
    pub regions: Vec<RegionCycleLoss>,
}

/// Warps `forward` (already in animated geometry) back to the target frame
/// through the transposed blocks, and measures the L1 distance to `compare`.
///
/// Each block's softmax runs over its rows, i.e. over animated pixels. The
/// loss covers target pixels of blocks that have at least one row.
pub fn cycle_warp_and_loss<A: Affinity>(
    blocks: &[A],
    forward: &ReferenceImage,
    compare: &RgbImage,
    tau: f64,
) -> Result<CycleResult> {
    check_tau(tau)?;
    let Some(first) = blocks.first() else {
        return Err(Error::EmptyCycleDomain);
    };
    let (w, h) = first.cols().dims();
    if compare.dims() != (w, h) {
        return Err(Error::invalid("comparison image does not match the target frame"));
    }
    let mut reference = ReferenceImage::empty(w, h)?;
    let mut regions = Vec::with_capacity(blocks.len());
    let (mut total, mut count) = (0.0, 0usize);
    for block in blocks {
        if block.cols().dims() != (w, h) || block.rows().dims() != forward.dims() {
            return Err(Error::invalid("blocks must share animated and target frames"));
        }
        if block.rows().is_empty() || block.cols().is_empty() {
            regions.push(RegionCycleLoss {
                region: block.region(),
                pixels: 0,
                loss: None,
            });
            continue;
        }
        if let Some(&u) = block.rows().indices().iter().find(|&&u| !forward.valid.get(u as usize)) {
            return Err(Error::invalid(format!(
                "forward reference has no color at animated pixel {u}"
            )));
        }
        let back = warp_cols(block, &gather(&forward.colors, block.rows()), tau);
        let mut sum = 0.0;
        for (&v, c) in block.cols().indices().iter().zip(&back) {
            let v = v as usize;
            let truth = to_f64(compare.get(v));
            sum += (0..3).map(|k| (c[k] - truth[k]).abs()).sum::<f64>();
            reference.colors.set(v, quantize(*c));
            reference.valid.set(v, true);
        }
        let n = block.cols().len();
        regions.push(RegionCycleLoss {
            region: block.region(),
            pixels: n,
            loss: Some(sum / (3.0 * 255.0 * n as f64)),
        });
        total += sum;
        count += n;
    }
    if count == 0 {
        return Err(Error::EmptyCycleDomain);
    }
    Ok(CycleResult {
        reference,
        loss: total / (3.0 * 255.0 * count as f64),
        regions,
    })
}

/// Animated/target index pair for one region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionPair {
    pub rows: RegionIndex,
    pub cols: RegionIndex,
}

impl RegionPair {
    pub fn new(rows: RegionIndex, cols: RegionIndex) -> Result<Self> {
        if rows.region() != cols.region() {
            return Err(Error::invalid(format!(
                "region pair mixes {} and {}",
                rows.region(),
                cols.region()
            )));
        }
        Ok(Self { rows, cols })
    }

    pub fn region(&self) -> Region {
        self.rows.region()
    }

    pub fn entries(&self) -> u64 {
        self.rows.len() as u64 * self.cols.len() as u64
    }
}

/// Forward warp from `source_image` into the animated frame, then back, with
/// the loss measured against `compare`. Blocks are streamed, never stored.
///
/// With `compare` equal to `source_image` this is the plain cycle loss; with a
/// different source it is the cross-pair loss.
pub fn round_trip(
    correlator: &Correlator<'_>,
    pairs: &[RegionPair],
    source_image: &RgbImage,
    compare: &RgbImage,
    tau: f64,
) -> Result<CycleResult> {
    check_tau(tau)?;
    let (w, h) = correlator.animated().dims();
    let mut forward = ReferenceImage::empty(w, h)?;
    let mut blocks = Vec::with_capacity(pairs.len());
    for pair in pairs {
        let block = correlator.streamed(pair.rows.clone(), pair.cols.clone())?;
        forward.merge(&softmax_warp(&block, source_image, tau)?)?;
        blocks.push(block);
    }
    cycle_warp_and_loss(&blocks, &forward, compare, tau)
}

/// Plain cycle loss for the target the correlator was built with.
pub fn cycle_loss(
    correlator: &Correlator<'_>,
    pairs: &[RegionPair],
    target: &RgbImage,
    tau: f64,
) -> Result<CycleResult> {
    round_trip(correlator, pairs, target, target, tau)
}

/// Cycle through a second target `other` (the correlator's target side must
/// hold `other`'s features), scored against the original `target` colors.
pub fn cross_pair_cycle_loss(
    correlator: &Correlator<'_>,
    pairs: &[RegionPair],
    other: &RgbImage,
    target: &RgbImage,
    tau: f64,
) -> Result<CycleResult> {
    if other.dims() != target.dims() {
        return Err(Error::DimensionMismatch {
            what: "second target vs target",
            left_w: other.width(),
            left_h: other.height(),
            right_w: target.width(),
            right_h: target.height(),
        });
    }
    round_trip(correlator, pairs, other, target, tau)
}
