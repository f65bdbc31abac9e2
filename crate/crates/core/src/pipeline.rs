//! End-to-end head blending: preprocess → features → references → recolor →
//! fill → composite. Errors are prefixed with the failing stage.

use std::path::PathBuf;

use crate::compositor::{composite, fill_inpainting, recolor_head};
use crate::correspondence::{
    create_head_color_reference, create_inpainting_reference, ReferenceBuild,
};
use crate::error::{Error, Result, ResultExt};
use crate::features::{centralize, extract_pyramid_features, load_features, CentralizedFeatures, FeatureMap};
use crate::preprocess::{preprocess, Preprocessed};
use crate::types::{BinaryMask, BlenderConfig, LabelMap, RgbImage};

/// Where correlation features come from.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum FeatureSource {
    #[default]
    Pyramid,
    /// Precomputed `FMAP` files for the animated and target frames.
    Files { animated: PathBuf, target: PathBuf },
}

impl std::str::FromStr for FeatureSource {
    type Err = Error;

    /// `pyramid` or `file:ANIMATED.fmap,TARGET.fmap`.
    fn from_str(s: &str) -> Result<Self> {
        if s == "pyramid" {
            return Ok(FeatureSource::Pyramid);
        }
        let Some(rest) = s.strip_prefix("file:") else {
            return Err(Error::invalid(format!(
                "unknown feature source '{s}' (expected pyramid or file:A.fmap,T.fmap)"
            )));
        };
        let Some((a, t)) = rest.split_once(',') else {
            return Err(Error::invalid(
                "file feature source needs two paths: file:ANIMATED.fmap,TARGET.fmap",
            ));
        };
        Ok(FeatureSource::Files {
            animated: a.into(),
            target: t.into(),
        })
    }
}

impl std::fmt::Display for FeatureSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FeatureSource::Pyramid => f.write_str("pyramid"),
            FeatureSource::Files { animated, target } => {
                write!(f, "file:{},{}", animated.display(), target.display())
            }
        }
    }
}

/// An animated portrait and a target frame with their parses.
#[derive(Clone, Debug)]
pub struct PairInputs {
    pub animated: RgbImage,
    pub animated_labels: LabelMap,
    pub target: RgbImage,
    pub target_labels: LabelMap,
}

/// The image the animated-side features are extracted from: the animated head
/// over the target background, with the still-empty band filled by the
/// nearest background color.
pub fn feature_source_image(
    animated: &RgbImage,
    animated_head: &BinaryMask,
    band: &BinaryMask,
    background: &RgbImage,
) -> Result<RgbImage> {
    let mut source = background.clone();
    for i in animated_head.indices() {
        source.set(i, animated.get(i));
    }
    let empty = crate::types::ReferenceImage::empty(animated.width(), animated.height())?;
    let filled = fill_inpainting(&empty, band, animated_head, background)?;
    for i in band.indices() {
        source.set(i, filled.get(i));
    }
    Ok(source)
}

/// Centralized features for both frames.
pub fn compute_features(
    source: &FeatureSource,
    animated_view: &RgbImage,
    target: &RgbImage,
    config: &BlenderConfig,
) -> Result<(CentralizedFeatures, CentralizedFeatures)> {
    let (fa, ft): (FeatureMap, FeatureMap) = match source {
        FeatureSource::Pyramid => (
            extract_pyramid_features(animated_view, config.pyramid_levels, config.patch_radius)?,
            extract_pyramid_features(target, config.pyramid_levels, config.patch_radius)?,
        ),
        FeatureSource::Files { animated, target } => (load_features(animated)?, load_features(target)?),
    };
    if fa.dims() != animated_view.dims() || ft.dims() != target.dims() {
        return Err(Error::invalid(format!(
            "feature maps {:?}/{:?} do not match image size {:?}",
            fa.dims(),
            ft.dims(),
            target.dims()
        )));
    }
    Ok((centralize(&fa), centralize(&ft)))
}

/// Both color references.
#[derive(Clone, Debug)]
pub struct References {
    pub head: ReferenceBuild,
    pub inpaint: ReferenceBuild,
}

pub fn build_references(
    inputs: &PairInputs,
    pre: &Preprocessed,
    source: &FeatureSource,
    config: &BlenderConfig,
) -> Result<References> {
    let view = feature_source_image(&inputs.animated, &pre.animated_head, &pre.animated_inpaint, &pre.background)
        .context("features")?;
    let (fa, ft) = compute_features(source, &view, &inputs.target, config).context("features")?;
    let head = create_head_color_reference(
        &fa,
        &inputs.animated_labels,
        &ft,
        &inputs.target_labels,
        &inputs.target,
        config,
    )
    .context("references")?;
    let inpaint = create_inpainting_reference(
        &fa,
        &pre.animated_inpaint,
        &ft,
        &pre.target_inpaint,
        &pre.target_head,
        &inputs.target,
        config,
    )
    .context("references")?;
    Ok(References { head, inpaint })
}

/// Every intermediate of one swap.
#[derive(Clone, Debug)]
pub struct SwapResult {
    pub pre: Preprocessed,
    pub references: References,
    pub head_colors: RgbImage,
    pub band_fill: RgbImage,
    pub blended: RgbImage,
}

pub fn swap(inputs: &PairInputs, source: &FeatureSource, config: &BlenderConfig) -> Result<SwapResult> {
    let pre = preprocess(
        &inputs.animated,
        &inputs.animated_labels,
        &inputs.target,
        &inputs.target_labels,
        config,
    )
    .context("preprocess")?;
    let references = build_references(inputs, &pre, source, config)?;
    let head_colors = recolor_head(&pre.gray_head, &references.head.reference, &pre.animated_head)
        .context("compositor")?;
    let band_fill = fill_inpainting(
        &references.inpaint.reference,
        &pre.animated_inpaint,
        &pre.animated_head,
        &pre.background,
    )
    .context("compositor")?;
    let blended = composite(
        &head_colors,
        &band_fill,
        &pre.background,
        &pre.animated_head,
        &pre.animated_inpaint,
        config.feather,
    )
    .context("compositor")?;
    Ok(SwapResult {
        pre,
        references,
        head_colors,
        band_fill,
        blended,
    })
}
