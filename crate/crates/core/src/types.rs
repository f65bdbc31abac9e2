//! Image, mask and label containers shared by every stage of the pipeline.
//!
//! All containers are row-major and immutable once handed to another stage;
//! mutation happens only while a stage is building its output.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

fn check_size(width: usize, height: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "image dimensions must be at least 1x1, got {width}x{height}"
        )));
    }
    Ok(())
}

/// Fails with [`Error::DimensionMismatch`] unless both sizes agree.
pub(crate) fn same_dims(
    what: &'static str,
    left: (usize, usize),
    right: (usize, usize),
) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch {
            what,
            left_w: left.0,
            left_h: left.1,
            right_w: right.0,
            right_h: right.1,
        });
    }
    Ok(())
}

/// 8-bit RGB image.
#[derive(Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl RgbImage {
    /// All-black image.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_size(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![0; width * height * 3],
        })
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_size(width, height)?;
        if data.len() != width * height * 3 {
            return Err(Error::invalid(format!(
                "rgb buffer holds {} bytes, expected {} for {width}x{height}",
                data.len(),
                width * height * 3
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> [u8; 3],
    ) -> Result<Self> {
        let mut img = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                img.set(y * width + x, f(x, y));
            }
        }
        Ok(img)
    }

    pub fn filled(width: usize, height: usize, color: [u8; 3]) -> Result<Self> {
        Self::from_fn(width, height, |_, _| color)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Pixel at linear index `i`.
    #[inline]
    pub fn get(&self, i: usize) -> [u8; 3] {
        let o = i * 3;
        [self.data[o], self.data[o + 1], self.data[o + 2]]
    }

    #[inline]
    pub fn get_xy(&self, x: usize, y: usize) -> [u8; 3] {
        self.get(y * self.width + x)
    }

    #[inline]
    pub fn set(&mut self, i: usize, rgb: [u8; 3]) {
        self.data[i * 3..i * 3 + 3].copy_from_slice(&rgb);
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }

    pub fn into_raw(self) -> Vec<u8> {
        self.data
    }
}

impl fmt::Debug for RgbImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RgbImage({}x{})", self.width, self.height)
    }
}

/// 8-bit single-channel image.
#[derive(Clone, PartialEq, Eq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_size(width, height)?;
        Ok(Self {
            width,
            height,
            data: vec![0; width * height],
        })
    }

    pub fn from_raw(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        check_size(width, height)?;
        if data.len() != width * height {
            return Err(Error::invalid(format!(
                "gray buffer holds {} bytes, expected {} for {width}x{height}",
                data.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut img = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                img.data[y * width + x] = f(x, y);
            }
        }
        Ok(img)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.data[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: u8) {
        self.data[i] = v;
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.data
    }
}

impl fmt::Debug for GrayImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GrayImage({}x{})", self.width, self.height)
    }
}

/// One boolean per pixel.
#[derive(Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl BinaryMask {
    /// Empty mask.
    pub fn new(width: usize, height: usize) -> Result<Self> {
        check_size(width, height)?;
        Ok(Self {
            width,
            height,
            bits: vec![false; width * height],
        })
    }

    pub fn full(width: usize, height: usize) -> Result<Self> {
        check_size(width, height)?;
        Ok(Self {
            width,
            height,
            bits: vec![true; width * height],
        })
    }

    pub fn from_bits(width: usize, height: usize, bits: Vec<bool>) -> Result<Self> {
        check_size(width, height)?;
        if bits.len() != width * height {
            return Err(Error::invalid(format!(
                "mask holds {} bits, expected {}",
                bits.len(),
                width * height
            )));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut m = Self::new(width, height)?;
        for y in 0..height {
            for x in 0..width {
                m.bits[y * width + x] = f(x, y);
            }
        }
        Ok(m)
    }

    pub fn from_indices(width: usize, height: usize, indices: &[usize]) -> Result<Self> {
        let mut m = Self::new(width, height)?;
        for &i in indices {
            if i >= width * height {
                return Err(Error::invalid(format!(
                    "mask index {i} out of range for {width}x{height}"
                )));
            }
            m.bits[i] = true;
        }
        Ok(m)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    #[inline]
    pub fn get_xy(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Linear indices of set pixels, increasing.
    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        same_dims("mask set operation", self.dims(), other.dims())?;
        Ok(BinaryMask {
            width: self.width,
            height: self.height,
            bits: self
                .bits
                .iter()
                .zip(&other.bits)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn union(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    /// Pixels in `self` but not in `other`.
    pub fn difference(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn intersection(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn is_subset_of(&self, other: &BinaryMask) -> bool {
        self.dims() == other.dims() && self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b)
    }
}

impl fmt::Debug for BinaryMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "BinaryMask({}x{}, {} set)",
            self.width,
            self.height,
            self.count()
        )
    }
}

/// Number of ids in the canonical face-parsing label set.
pub const LABEL_COUNT: u8 = 13;

const CANONICAL_LABELS: [(u8, &str); LABEL_COUNT as usize] = [
    (0, "background"),
    (1, "skin"),
    (2, "left_brow"),
    (3, "right_brow"),
    (4, "left_eye"),
    (5, "right_eye"),
    (6, "nose"),
    (7, "upper_lip"),
    (8, "lower_lip"),
    (9, "tooth"),
    (10, "hair"),
    (11, "neck"),
    (12, "body"),
];

/// The fixed `(id, name)` table that label maps are validated against.
pub fn canonical_labels() -> &'static [(u8, &'static str)] {
    &CANONICAL_LABELS
}

/// Labels making up the head area: skin through hair, excluding neck and body.
pub const HEAD_LABELS: [u8; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// Per-pixel semantic label ids from a face parser.
#[derive(Clone, PartialEq, Eq)]
pub struct LabelMap {
    width: usize,
    height: usize,
    labels: Vec<u8>,
}

impl LabelMap {
    /// Fails with [`Error::InvalidLabel`] on the first id outside the canonical set.
    pub fn new(width: usize, height: usize, labels: Vec<u8>) -> Result<Self> {
        check_size(width, height)?;
        if labels.len() != width * height {
            return Err(Error::invalid(format!(
                "label buffer holds {} entries, expected {}",
                labels.len(),
                width * height
            )));
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= LABEL_COUNT) {
            return Err(Error::InvalidLabel { label, index });
        }
        Ok(Self {
            width,
            height,
            labels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut labels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                labels.push(f(x, y));
            }
        }
        Self::new(width, height, labels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn get(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn as_raw(&self) -> &[u8] {
        &self.labels
    }

    /// Mask of pixels whose label is in `ids`.
    pub fn mask_of(&self, ids: &[u8]) -> BinaryMask {
        let mut lut = [false; 256];
        for &id in ids {
            lut[id as usize] = true;
        }
        BinaryMask {
            width: self.width,
            height: self.height,
            bits: self.labels.iter().map(|&l| lut[l as usize]).collect(),
        }
    }
}

impl fmt::Debug for LabelMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabelMap({}x{})", self.width, self.height)
    }
}

/// Semantic regions that get their own correlation block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Region {
    Face,
    Hair,
    Eye,
    Nose,
    Lip,
    Tooth,
    /// Defined by the inpainting masks, not by labels.
    Inpainting,
}

impl Region {
    pub const ALL: [Region; 7] = [
        Region::Face,
        Region::Hair,
        Region::Eye,
        Region::Nose,
        Region::Lip,
        Region::Tooth,
        Region::Inpainting,
    ];

    /// The six regions that are looked up through label ids.
    pub const HEAD: [Region; 6] = [
        Region::Face,
        Region::Hair,
        Region::Eye,
        Region::Nose,
        Region::Lip,
        Region::Tooth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Region::Face => "face",
            Region::Hair => "hair",
            Region::Eye => "eye",
            Region::Nose => "nose",
            Region::Lip => "lip",
            Region::Tooth => "tooth",
            Region::Inpainting => "inpainting",
        }
    }

    pub fn label_ids(self) -> &'static [u8] {
        match self {
            Region::Face => &[1, 2, 3],
            Region::Hair => &[10],
            Region::Eye => &[4, 5],
            Region::Nose => &[6],
            Region::Lip => &[7, 8],
            Region::Tooth => &[9],
            Region::Inpainting => &[],
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Region::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown region '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionSpec {
    pub region: Region,
    pub labels: Vec<u8>,
}

/// face, hair, eye, nose, lip, tooth and the mask-defined inpainting region.
pub fn default_region_specs() -> Vec<RegionSpec> {
    Region::ALL
        .into_iter()
        .map(|region| RegionSpec {
            region,
            labels: region.label_ids().to_vec(),
        })
        .collect()
}

/// Sorted linear pixel indices belonging to one region of one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionIndex {
    region: Region,
    width: usize,
    height: usize,
    indices: Vec<u32>,
}

impl RegionIndex {
    /// Validates that indices are strictly increasing and inside the frame.
    pub fn new(region: Region, width: usize, height: usize, indices: Vec<u32>) -> Result<Self> {
        check_size(width, height)?;
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("region indices must be strictly increasing"));
        }
        if let Some(&last) = indices.last() {
            if last as usize >= width * height {
                return Err(Error::invalid(format!(
                    "region index {last} out of range for {width}x{height}"
                )));
            }
        }
        Ok(Self {
            region,
            width,
            height,
            indices,
        })
    }

    pub fn from_labels(labels: &LabelMap, region: Region) -> Self {
        Self::from_mask(region, &labels.mask_of(region.label_ids()))
    }

    pub fn from_mask(region: Region, mask: &BinaryMask) -> Self {
        Self {
            region,
            width: mask.width(),
            height: mask.height(),
            indices: mask.indices().map(|i| i as u32).collect(),
        }
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn to_mask(&self) -> BinaryMask {
        let mut m = BinaryMask {
            width: self.width,
            height: self.height,
            bits: vec![false; self.width * self.height],
        };
        for &i in &self.indices {
            m.bits[i as usize] = true;
        }
        m
    }
}

/// Warped colors plus the pixels where a warped color exists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceImage {
    pub colors: RgbImage,
    pub valid: BinaryMask,
}

impl ReferenceImage {
    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Ok(Self {
            colors: RgbImage::new(width, height)?,
            valid: BinaryMask::new(width, height)?,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        self.colors.dims()
    }

    /// Copies every valid pixel of `other` into `self`.
    pub fn merge(&mut self, other: &ReferenceImage) -> Result<()> {
        same_dims("reference merge", self.dims(), other.dims())?;
        for i in other.valid.indices() {
            self.colors.set(i, other.colors.get(i));
            self.valid.set(i, true);
        }
        Ok(())
    }
}

/// What to do when the target has no pixels for a region the animated head has.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FallbackPolicy {
    /// Leave those pixels invalid.
    Skip,
    /// Correlate against every head pixel of the target instead.
    #[default]
    GlobalHead,
}

impl FallbackPolicy {
    pub fn name(self) -> &'static str {
        match self {
            FallbackPolicy::Skip => "skip",
            FallbackPolicy::GlobalHead => "global-head",
        }
    }
}

impl FromStr for FallbackPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip" => Ok(FallbackPolicy::Skip),
            "global-head" => Ok(FallbackPolicy::GlobalHead),
            other => Err(Error::invalid(format!(
                "unknown fallback policy '{other}' (expected skip or global-head)"
            ))),
        }
    }
}

impl fmt::Display for FallbackPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Default target dilation radius at 512 px image height.
pub const DEFAULT_TARGET_RADIUS_512: usize = 7;
/// Default union dilation radius at 512 px image height.
pub const DEFAULT_UNION_RADIUS_512: usize = 11;

#[derive(Clone, Debug, PartialEq)]
pub struct BlenderConfig {
    /// Softmax temperature.
    pub tau: f64,
    /// Guard on cosine denominators.
    pub epsilon: f64,
    /// Dilation radius for the target head mask; `None` scales the 512 px default.
    pub dilate_target: Option<usize>,
    /// Dilation radius for the head-mask union; `None` scales the 512 px default.
    pub dilate_union: Option<usize>,
    pub feather: usize,
    pub fallback: FallbackPolicy,
    pub pyramid_levels: usize,
    pub patch_radius: usize,
}

impl Default for BlenderConfig {
    fn default() -> Self {
        Self {
            tau: 0.01,
            epsilon: 1e-8,
            dilate_target: None,
            dilate_union: None,
            feather: 3,
            fallback: FallbackPolicy::GlobalHead,
            pyramid_levels: 3,
            patch_radius: 2,
        }
    }
}

fn scaled_radius(base: usize, height: usize) -> usize {
    ((base as f64 * height as f64 / 512.0).round() as usize).max(1)
}

impl BlenderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid(format!("tau must be positive, got {}", self.tau)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.dilate_target == Some(0) || self.dilate_union == Some(0) {
            return Err(Error::invalid("dilation radii must be at least 1"));
        }
        if self.pyramid_levels == 0 {
            return Err(Error::invalid("pyramid levels must be at least 1"));
        }
        Ok(())
    }

    pub fn target_radius(&self, height: usize) -> usize {
        self.dilate_target
            .unwrap_or_else(|| scaled_radius(DEFAULT_TARGET_RADIUS_512, height))
    }

    pub fn union_radius(&self, height: usize) -> usize {
        self.dilate_union
            .unwrap_or_else(|| scaled_radius(DEFAULT_UNION_RADIUS_512, height))
    }
}
