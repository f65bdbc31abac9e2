//! Mask derivation from parsed label maps: head masks, inpainting bands,
//! the grayscale head and the background cutout.

use crate::error::{Error, Result};
use crate::types::{same_dims, BinaryMask, GrayImage, LabelMap, RgbImage, LABEL_COUNT};

/// Mask of pixels whose label is one of `head_ids`.
pub fn head_mask(labels: &LabelMap, head_ids: &[u8]) -> Result<BinaryMask> {
    if let Some(&bad) = head_ids.iter().find(|&&id| id >= LABEL_COUNT) {
        return Err(Error::invalid(format!("unknown head label id {bad}")));
    }
    Ok(labels.mask_of(head_ids))
}

/// Square-element dilation: a pixel is set when any pixel within Chebyshev
/// distance `radius` is set. Windows are clipped at the image border.
pub fn dilate(mask: &BinaryMask, radius: usize) -> BinaryMask {
    if radius == 0 {
        return mask.clone();
    }
    let (w, h) = mask.dims();
    // Separable: horizontal pass into counts, then vertical pass.
    let horizontal = window_any(w, h, radius, |y, x| mask.get(y * w + x), true);
    let vertical = window_any(w, h, radius, |y, x| horizontal[y * w + x], false);
    BinaryMask::from_bits(w, h, vertical).expect("dims preserved")
}

/// Sliding-window OR along rows (`along_rows`) or columns.
fn window_any(
    w: usize,
    h: usize,
    radius: usize,
    get: impl Fn(usize, usize) -> bool,
    along_rows: bool,
) -> Vec<bool> {
    let mut out = vec![false; w * h];
    let (outer, inner) = if along_rows { (h, w) } else { (w, h) };
    let mut prefix = vec![0u32; inner + 1];
    for o in 0..outer {
        for i in 0..inner {
            let v = if along_rows { get(o, i) } else { get(i, o) };
            prefix[i + 1] = prefix[i] + v as u32;
        }
        for i in 0..inner {
            let lo = i.saturating_sub(radius);
            let hi = (i + radius + 1).min(inner);
            let idx = if along_rows { o * w + i } else { i * w + o };
            out[idx] = prefix[hi] > prefix[lo];
        }
    }
    out
}

/// The band grown around the target head: `dilate(head, radius) \ head`.
pub fn target_inpaint_mask(target_head: &BinaryMask, radius: usize) -> Result<BinaryMask> {
    if radius < 1 {
        return Err(Error::invalid("inpainting dilation radius must be at least 1"));
    }
    dilate(target_head, radius).difference(target_head)
}

/// Animated-side masks derived from both head masks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnimatedMasks {
    /// Pixels to inpaint around the animated head.
    pub inpaint: BinaryMask,
    /// Dilated union of both head masks.
    pub dilated_union: BinaryMask,
}

pub fn animated_inpaint_mask(
    animated_head: &BinaryMask,
    target_head: &BinaryMask,
    radius: usize,
) -> Result<AnimatedMasks> {
    if radius < 1 {
        return Err(Error::invalid("union dilation radius must be at least 1"));
    }
    let union = animated_head.union(target_head)?;
    let dilated_union = dilate(&union, radius);
    let inpaint = dilated_union.difference(animated_head)?;
    Ok(AnimatedMasks {
        inpaint,
        dilated_union,
    })
}

/// BT.601 luma, rounded to the nearest integer.
#[inline]
pub fn luma(rgb: [u8; 3]) -> u8 {
    let y = 0.299 * rgb[0] as f64 + 0.587 * rgb[1] as f64 + 0.114 * rgb[2] as f64;
    y.round().clamp(0.0, 255.0) as u8
}

/// Luma inside the head mask, zero elsewhere.
pub fn grayscale_head(animated: &RgbImage, head: &BinaryMask) -> Result<GrayImage> {
    same_dims("grayscale head", animated.dims(), head.dims())?;
    let (w, h) = animated.dims();
    let mut out = GrayImage::new(w, h)?;
    for i in head.indices() {
        out.set(i, luma(animated.get(i)));
    }
    Ok(out)
}

/// Target image with every pixel of `dilated_union` zeroed.
pub fn background_cutout(target: &RgbImage, dilated_union: &BinaryMask) -> Result<RgbImage> {
    same_dims("background cutout", target.dims(), dilated_union.dims())?;
    let mut out = target.clone();
    for i in dilated_union.indices() {
        out.set(i, [0, 0, 0]);
    }
    Ok(out)
}

/// Everything the later stages need, derived from one animated/target pair.
#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub animated_head: BinaryMask,
    pub target_head: BinaryMask,
    pub animated_inpaint: BinaryMask,
    pub target_inpaint: BinaryMask,
    pub dilated_union: BinaryMask,
    pub gray_head: GrayImage,
    pub background: RgbImage,
}

/// Runs every preprocessing step with the radii from `config`.
pub fn preprocess(
    animated: &RgbImage,
    animated_labels: &LabelMap,
    target: &RgbImage,
    target_labels: &LabelMap,
    config: &crate::types::BlenderConfig,
) -> Result<Preprocessed> {
    same_dims("animated image vs labels", animated.dims(), animated_labels.dims())?;
    same_dims("target image vs labels", target.dims(), target_labels.dims())?;
    same_dims("animated vs target", animated.dims(), target.dims())?;
    config.validate()?;
    let height = animated.height();

    let animated_head = head_mask(animated_labels, &crate::types::HEAD_LABELS)?;
    let target_head = head_mask(target_labels, &crate::types::HEAD_LABELS)?;
    let target_inpaint = target_inpaint_mask(&target_head, config.target_radius(height))?;
    let AnimatedMasks {
        inpaint: animated_inpaint,
        dilated_union,
    } = animated_inpaint_mask(&animated_head, &target_head, config.union_radius(height))?;
    let gray_head = grayscale_head(animated, &animated_head)?;
    let background = background_cutout(target, &dilated_union)?;
    Ok(Preprocessed {
        animated_head,
        target_head,
        animated_inpaint,
        target_inpaint,
        dilated_union,
        gray_head,
        background,
    })
}
