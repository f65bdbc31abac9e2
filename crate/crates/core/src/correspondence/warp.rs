use rayon::prelude::*;

use super::block::{Affinity, Correlator};
use crate::error::{Error, Result};
use crate::features::CentralizedFeatures;
use crate::types::{
    BinaryMask, BlenderConfig, FallbackPolicy, LabelMap, ReferenceImage, Region, RegionIndex,
    RgbImage, HEAD_LABELS,
};

/// Replaces `logits` with `exp((x - max) / tau)` and returns their sum.
pub(crate) fn softmax_in_place(logits: &mut [f64], tau: f64) -> f64 {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for x in logits.iter_mut() {
        *x = ((*x - max) / tau).exp();
        sum += *x;
    }
    sum
}

/// `Σ w_k c_k / Σ w_k` for softmax weights over `logits`.
///
/// Colors are accumulated as offsets from the best-scoring color, so a
/// region of one color reproduces it exactly and near-hard attention loses
/// no precision to rounding.
fn weighted_color(logits: &mut [f64], tau: f64, color: impl Fn(usize) -> [f64; 3]) -> [f64; 3] {
    let sum = softmax_in_place(logits, tau);
    let best = logits.iter().position(|&w| w == 1.0).unwrap_or(0);
    let anchor = color(best);
    let mut acc = [0.0; 3];
    for (k, &w) in logits.iter().enumerate() {
        let c = color(k);
        for ch in 0..3 {
            acc[ch] += w * (c[ch] - anchor[ch]);
        }
    }
    [0, 1, 2].map(|ch| anchor[ch] + acc[ch] / sum)
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("temperature must be positive, got {tau}")))
    }
}

/// Normalized softmax weights of one animated pixel over the region's target pixels.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionRow {
    /// Linear index of the animated pixel.
    pub source: u32,
    pub weights: Vec<f64>,
}

/// Softmax over row `i` of `block` at temperature `tau`.
pub fn attention_row<A: Affinity + ?Sized>(block: &A, i: usize, tau: f64) -> Result<AttentionRow> {
    check_tau(tau)?;
    let mut weights = vec![0.0; block.cols().len()];
    block.row_into(i, &mut weights);
    if !weights.is_empty() {
        let sum = softmax_in_place(&mut weights, tau);
        weights.iter_mut().for_each(|w| *w /= sum);
    }
    Ok(AttentionRow {
        source: block.rows().indices()[i],
        weights,
    })
}

/// Per-row weighted colors: row `i` gets `Σ_j softmax_j(Γ(i, j)/τ) · colors[j]`.
pub fn warp_rows<A: Affinity + ?Sized>(block: &A, colors: &[[f64; 3]], tau: f64) -> Vec<[f64; 3]> {
    let (n_rows, n_cols) = block.shape();
    assert_eq!(colors.len(), n_cols, "one color per column");
    if n_cols == 0 {
        return Vec::new();
    }
    (0..n_rows)
        .into_par_iter()
        .map_init(
            || vec![0.0; n_cols],
            |buf, i| {
                block.row_into(i, buf);
                weighted_color(buf, tau, |j| colors[j])
            },
        )
        .collect()
}

/// Per-column weighted colors with the softmax taken over rows:
/// column `j` gets `Σ_i softmax_i(Γ(i, j)/τ) · colors[i]`.
pub fn warp_cols<A: Affinity + ?Sized>(block: &A, colors: &[[f64; 3]], tau: f64) -> Vec<[f64; 3]> {
    let (n_rows, n_cols) = block.shape();
    assert_eq!(colors.len(), n_rows, "one color per row");
    if n_rows == 0 {
        return Vec::new();
    }
    (0..n_cols)
        .into_par_iter()
        .map_init(
            || vec![0.0; n_rows],
            |buf, j| {
                block.col_into(j, buf);
                weighted_color(buf, tau, |i| colors[i])
            },
        )
        .collect()
}

pub(crate) fn to_f64(c: [u8; 3]) -> [f64; 3] {
    [c[0] as f64, c[1] as f64, c[2] as f64]
}

pub(crate) fn quantize(c: [f64; 3]) -> [u8; 3] {
    c.map(|v| v.round().clamp(0.0, 255.0) as u8)
}

pub(crate) fn gather(image: &RgbImage, index: &RegionIndex) -> Vec<[f64; 3]> {
    index
        .indices()
        .iter()
        .map(|&i| to_f64(image.get(i as usize)))
        .collect()
}

/// Warps target colors onto the block's animated pixels.
///
/// The result is valid exactly on the row pixels; a block without columns
/// yields an empty-valid reference.
pub fn softmax_warp<A: Affinity + ?Sized>(
    block: &A,
    target: &RgbImage,
    tau: f64,
) -> Result<ReferenceImage> {
    check_tau(tau)?;
    if target.dims() != block.cols().dims() {
        return Err(Error::invalid("target image does not match the block's column frame"));
    }
    let (w, h) = block.rows().dims();
    let mut out = ReferenceImage::empty(w, h)?;
    if block.cols().is_empty() {
        return Ok(out);
    }
    let warped = warp_rows(block, &gather(target, block.cols()), tau);
    for (&u, c) in block.rows().indices().iter().zip(warped) {
        out.colors.set(u as usize, quantize(c));
        out.valid.set(u as usize, true);
    }
    Ok(out)
}

/// Target columns to use for `cols`, applying the fallback policy when empty.
fn resolve_columns(
    cols: RegionIndex,
    target_head: impl FnOnce() -> BinaryMask,
    policy: FallbackPolicy,
) -> Option<RegionIndex> {
    if !cols.is_empty() {
        return Some(cols);
    }
    match policy {
        FallbackPolicy::Skip => None,
        FallbackPolicy::GlobalHead => {
            let head = RegionIndex::from_mask(cols.region(), &target_head());
            (!head.is_empty()).then_some(head)
        }
    }
}

/// How one region's block was formed during reference creation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionOutcome {
    pub region: Region,
    pub rows: usize,
    pub cols: usize,
    /// True when the target region was empty and the fallback supplied columns.
    pub fell_back: bool,
    /// True when no columns were available and the rows stayed invalid.
    pub skipped: bool,
}

/// A reference plus per-region bookkeeping.
#[derive(Clone, Debug)]
pub struct ReferenceBuild {
    pub reference: ReferenceImage,
    pub regions: Vec<RegionOutcome>,
}

impl ReferenceBuild {
    /// Correlation entries evaluated while building this reference.
    pub fn entries(&self) -> u64 {
        self.regions
            .iter()
            .map(|r| r.rows as u64 * r.cols as u64)
            .sum()
    }
}

fn build_region(
    correlator: &Correlator<'_>,
    rows: RegionIndex,
    cols: RegionIndex,
    target: &RgbImage,
    target_head: impl FnOnce() -> BinaryMask,
    config: &BlenderConfig,
    out: &mut ReferenceImage,
) -> Result<RegionOutcome> {
    let region = rows.region();
    let n_rows = rows.len();
    let was_empty = cols.is_empty();
    let Some(cols) = resolve_columns(cols, target_head, config.fallback) else {
        return Ok(RegionOutcome {
            region,
            rows: n_rows,
            cols: 0,
            fell_back: false,
            skipped: n_rows > 0,
        });
    };
    let n_cols = cols.len();
    if n_rows > 0 {
        let block = correlator.streamed(rows, cols)?;
        out.merge(&softmax_warp(&block, target, config.tau)?)?;
    }
    Ok(RegionOutcome {
        region,
        rows: n_rows,
        cols: if n_rows > 0 { n_cols } else { 0 },
        fell_back: was_empty,
        skipped: false,
    })
}

fn check_frames(
    animated: &CentralizedFeatures,
    animated_frame: (usize, usize),
    target: &CentralizedFeatures,
    target_frame: (usize, usize),
    target_image: &RgbImage,
) -> Result<()> {
    if animated.dims() != animated_frame {
        return Err(Error::invalid("animated features do not match the animated masks"));
    }
    if target.dims() != target_frame || target_image.dims() != target_frame {
        return Err(Error::invalid("target features, masks and image must share one size"));
    }
    Ok(())
}

/// Head-color reference: one block per label-defined head region, warped
/// independently and merged.
pub fn create_head_color_reference(
    animated: &CentralizedFeatures,
    animated_labels: &LabelMap,
    target: &CentralizedFeatures,
    target_labels: &LabelMap,
    target_image: &RgbImage,
    config: &BlenderConfig,
) -> Result<ReferenceBuild> {
    config.validate()?;
    check_frames(
        animated,
        animated_labels.dims(),
        target,
        target_labels.dims(),
        target_image,
    )?;
    let correlator = Correlator::new(animated, target, config.epsilon)?;
    let (w, h) = animated.dims();
    let mut reference = ReferenceImage::empty(w, h)?;
    let mut regions = Vec::with_capacity(Region::HEAD.len());
    for region in Region::HEAD {
        let rows = RegionIndex::from_labels(animated_labels, region);
        let cols = RegionIndex::from_labels(target_labels, region);
        regions.push(build_region(
            &correlator,
            rows,
            cols,
            target_image,
            || target_labels.mask_of(&HEAD_LABELS),
            config,
            &mut reference,
        )?);
    }
    Ok(ReferenceBuild { reference, regions })
}

/// Inpainting reference: a single block from the animated band to the target band.
///
/// `target_head` supplies the fallback columns under [`FallbackPolicy::GlobalHead`].
#[allow(clippy::too_many_arguments)]
pub fn create_inpainting_reference(
    animated: &CentralizedFeatures,
    animated_band: &BinaryMask,
    target: &CentralizedFeatures,
    target_band: &BinaryMask,
    target_head: &BinaryMask,
    target_image: &RgbImage,
    config: &BlenderConfig,
) -> Result<ReferenceBuild> {
    config.validate()?;
    check_frames(
        animated,
        animated_band.dims(),
        target,
        target_band.dims(),
        target_image,
    )?;
    let correlator = Correlator::new(animated, target, config.epsilon)?;
    let (w, h) = animated.dims();
    let mut reference = ReferenceImage::empty(w, h)?;
    let outcome = build_region(
        &correlator,
        RegionIndex::from_mask(Region::Inpainting, animated_band),
        RegionIndex::from_mask(Region::Inpainting, target_band),
        target_image,
        || target_head.clone(),
        config,
        &mut reference,
    )?;
    Ok(ReferenceBuild {
        reference,
        regions: vec![outcome],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::block::region_correlation;
    use crate::features::{centralize, FeatureMap};

    fn frame_feats(w: usize, h: usize, per_pixel: &[[f32; 3]]) -> CentralizedFeatures {
        let values = per_pixel.iter().flatten().copied().collect();
        centralize(&FeatureMap::new(w, h, 3, values).unwrap())
    }

    #[test]
    fn single_column_copies_its_color() {
        let f = frame_feats(3, 1, &[[0.0, 1.0, 3.0], [2.0, 0.0, 1.0], [1.0, 1.0, 0.0]]);
        let rows = RegionIndex::new(Region::Nose, 3, 1, vec![0, 1]).unwrap();
        let cols = RegionIndex::new(Region::Nose, 3, 1, vec![2]).unwrap();
        let block = region_correlation(&f, &f, &rows, &cols, 1e-8).unwrap();
        let target = RgbImage::from_raw(3, 1, vec![0, 0, 0, 0, 0, 0, 12, 34, 56]).unwrap();
        for tau in [1e-6, 0.01, 100.0] {
            let r = softmax_warp(&block, &target, tau).unwrap();
            assert_eq!(r.colors.get(0), [12, 34, 56]);
            assert_eq!(r.colors.get(1), [12, 34, 56]);
            assert_eq!(r.valid.indices().collect::<Vec<_>>(), vec![0, 1]);
        }
    }

    #[test]
    fn equal_correlations_average() {
        // Both target pixels have the same descriptor.
        let f = frame_feats(3, 1, &[[0.0, 1.0, 2.0], [3.0, 1.0, 0.0], [3.0, 1.0, 0.0]]);
        let rows = RegionIndex::new(Region::Lip, 3, 1, vec![0]).unwrap();
        let cols = RegionIndex::new(Region::Lip, 3, 1, vec![1, 2]).unwrap();
        let block = region_correlation(&f, &f, &rows, &cols, 1e-8).unwrap();
        let target = RgbImage::from_raw(3, 1, vec![0, 0, 0, 10, 100, 200, 30, 50, 0]).unwrap();
        let r = softmax_warp(&block, &target, 0.01).unwrap();
        assert_eq!(r.colors.get(0), [20, 75, 100]);
    }

    #[test]
    fn empty_columns_give_empty_reference() {
        let f = frame_feats(2, 1, &[[0.0, 1.0, 2.0], [3.0, 1.0, 0.0]]);
        let rows = RegionIndex::new(Region::Tooth, 2, 1, vec![0]).unwrap();
        let cols = RegionIndex::new(Region::Tooth, 2, 1, vec![]).unwrap();
        let block = region_correlation(&f, &f, &rows, &cols, 1e-8).unwrap();
        let r = softmax_warp(&block, &RgbImage::new(2, 1).unwrap(), 0.01).unwrap();
        assert!(r.valid.is_empty());
    }

    #[test]
    fn rows_sum_to_one() {
        let f = frame_feats(4, 1, &[[0.0, 1.0, 2.0], [3.0, 1.0, 0.0], [1.0, 5.0, 0.0], [2.0, 2.0, 9.0]]);
        let idx = RegionIndex::new(Region::Face, 4, 1, vec![0, 1, 2, 3]).unwrap();
        let block = region_correlation(&f, &f, &idx, &idx, 1e-8).unwrap();
        for tau in [1e-3, 1e-2, 1.0, 10.0] {
            for i in 0..4 {
                let row = attention_row(&block, i, tau).unwrap();
                assert!((row.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
        assert!(attention_row(&block, 0, 0.0).is_err());
    }

    #[test]
    fn skip_and_global_head_policies() {
        // Animated has a tooth pixel, target has none.
        let la = LabelMap::new(3, 1, vec![1, 9, 0]).unwrap();
        let lt = LabelMap::new(3, 1, vec![1, 1, 0]).unwrap();
        let f = frame_feats(3, 1, &[[0.0, 1.0, 2.0], [3.0, 1.0, 0.0], [1.0, 5.0, 0.0]]);
        let img = RgbImage::from_raw(3, 1, vec![50, 60, 70, 50, 60, 70, 0, 0, 0]).unwrap();
        let skip = BlenderConfig {
            fallback: FallbackPolicy::Skip,
            ..BlenderConfig::default()
        };
        let built = create_head_color_reference(&f, &la, &f, &lt, &img, &skip).unwrap();
        assert!(built.reference.valid.get(0));
        assert!(!built.reference.valid.get(1));
        let tooth = built.regions.iter().find(|r| r.region == Region::Tooth).unwrap();
        assert!(tooth.skipped);

        let global = BlenderConfig::default();
        let built = create_head_color_reference(&f, &la, &f, &lt, &img, &global).unwrap();
        assert!(built.reference.valid.get(1));
        assert_eq!(built.reference.colors.get(1), [50, 60, 70]);
        let tooth = built.regions.iter().find(|r| r.region == Region::Tooth).unwrap();
        assert!(tooth.fell_back && tooth.cols == 2);
    }
}
