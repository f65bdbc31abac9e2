//! Per-pixel descriptor grids that feed the correlation stage.
//!
//! [`extract_pyramid_features`] is a classical, training-free extractor.
//! Features computed elsewhere (for instance by a neural backbone) can be
//! injected through the `FMAP` file format handled by [`save_features`] and
//! [`load_features`].

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::RgbImage;

/// H×W×C grid of finite `f32` values, row-major, channel-fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureMap {
    width: usize,
    height: usize,
    channels: usize,
    values: Vec<f32>,
}

impl FeatureMap {
    pub fn new(width: usize, height: usize, channels: usize, values: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("feature map must be at least 1x1"));
        }
        if channels < 2 {
            return Err(Error::invalid(format!(
                "feature map needs at least 2 channels, got {channels}"
            )));
        }
        if values.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "feature buffer holds {} values, expected {}",
                values.len(),
                width * height * channels
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite feature value at index {i}")));
        }
        Ok(Self {
            width,
            height,
            channels,
            values,
        })
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

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// Descriptor of the pixel at linear index `i`.
    #[inline]
    pub fn pixel(&self, i: usize) -> &[f32] {
        &self.values[i * self.channels..(i + 1) * self.channels]
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Copy with pixels rearranged: output pixel `i` takes input pixel `source[i]`.
    pub fn permuted(&self, source: &[usize]) -> Result<Self> {
        if source.len() != self.width * self.height {
            return Err(Error::invalid("permutation length does not match pixel count"));
        }
        let mut values = Vec::with_capacity(self.values.len());
        for &s in source {
            values.extend_from_slice(self.pixel(s));
        }
        Self::new(self.width, self.height, self.channels, values)
    }
}

/// Features with each pixel's channel mean removed, held in `f64` together
/// with per-pixel Euclidean norms. Correlation only accepts this type.
#[derive(Clone, Debug, PartialEq)]
pub struct CentralizedFeatures {
    width: usize,
    height: usize,
    channels: usize,
    values: Vec<f64>,
    norms: Vec<f64>,
}

impl CentralizedFeatures {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    #[inline]
    pub fn pixel(&self, i: usize) -> &[f64] {
        &self.values[i * self.channels..(i + 1) * self.channels]
    }

    /// Euclidean norm of the centralized descriptor at pixel `i`.
    #[inline]
    pub fn norm(&self, i: usize) -> f64 {
        self.norms[i]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Subtracts each pixel's channel mean from that pixel's channels.
pub fn centralize(features: &FeatureMap) -> CentralizedFeatures {
    let c = features.channels;
    let mut values = Vec::with_capacity(features.values.len());
    let mut norms = Vec::with_capacity(features.width * features.height);
    for px in features.values.chunks_exact(c) {
        let mean = px.iter().map(|&v| v as f64).sum::<f64>() / c as f64;
        let start = values.len();
        values.extend(px.iter().map(|&v| v as f64 - mean));
        // A second pass removes the rounding residue of the first mean.
        let residue = values[start..].iter().sum::<f64>() / c as f64;
        let mut sq = 0.0;
        for v in &mut values[start..] {
            *v -= residue;
            sq += *v * *v;
        }
        norms.push(sq.sqrt());
    }
    CentralizedFeatures {
        width: features.width,
        height: features.height,
        channels: c,
        values,
        norms,
    }
}

/// One pyramid level stored as planar RGB in [0, 1].
struct Level {
    width: usize,
    height: usize,
    rgb: Vec<[f64; 3]>,
}

impl Level {
    fn from_image(image: &RgbImage) -> Self {
        let rgb = (0..image.pixel_count())
            .map(|i| {
                let p = image.get(i);
                [p[0] as f64 / 255.0, p[1] as f64 / 255.0, p[2] as f64 / 255.0]
            })
            .collect();
        Self {
            width: image.width(),
            height: image.height(),
            rgb,
        }
    }

    /// 2×2 box average; a trailing odd row or column is dropped.
    fn half(&self) -> Self {
        let (w, h) = (self.width / 2, self.height / 2);
        let mut rgb = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let at = |dx: usize, dy: usize| self.rgb[(2 * y + dy) * self.width + 2 * x + dx];
                let (a, b, c, d) = (at(0, 0), at(1, 0), at(0, 1), at(1, 1));
                rgb.push(std::array::from_fn(|k| (a[k] + b[k] + c[k] + d[k]) / 4.0));
            }
        }
        Self {
            width: w,
            height: h,
            rgb,
        }
    }

    /// Per-pixel [R, G, B, patch luma mean, patch luma variance].
    fn descriptors(&self, radius: usize) -> Vec<[f64; 5]> {
        let (w, h) = (self.width, self.height);
        let luma: Vec<f64> = self
            .rgb
            .iter()
            .map(|p| 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2])
            .collect();
        let mut out = Vec::with_capacity(w * h);
        for y in 0..h {
            let (y0, y1) = (y.saturating_sub(radius), (y + radius).min(h - 1));
            for x in 0..w {
                let (x0, x1) = (x.saturating_sub(radius), (x + radius).min(w - 1));
                let n = ((y1 - y0 + 1) * (x1 - x0 + 1)) as f64;
                let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        let v = luma[yy * w + xx];
                        sum += v;
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                let p = self.rgb[y * w + x];
                // Flat patches are reported exactly, independent of window size.
                if lo == hi {
                    out.push([p[0], p[1], p[2], lo, 0.0]);
                    continue;
                }
                let mean = sum / n;
                let mut var = 0.0;
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        let d = luma[yy * w + xx] - mean;
                        var += d * d;
                    }
                }
                out.push([p[0], p[1], p[2], mean, var / n]);
            }
        }
        out
    }
}

/// Bilinear sample of a `src_w`×`src_h` grid at the full-resolution pixel
/// `(x, y)` using half-pixel centres. Equal neighbours reproduce exactly.
fn bilinear<const N: usize>(
    grid: &[[f64; N]],
    src_w: usize,
    src_h: usize,
    dst_w: usize,
    dst_h: usize,
    x: usize,
    y: usize,
) -> [f64; N] {
    let map = |d: usize, src: usize, dst: usize| -> (usize, usize, f64) {
        let s = ((d as f64 + 0.5) * src as f64 / dst as f64 - 0.5).clamp(0.0, (src - 1) as f64);
        let i0 = s.floor() as usize;
        let i1 = (i0 + 1).min(src - 1);
        (i0, i1, s - i0 as f64)
    };
    let (x0, x1, tx) = map(x, src_w, dst_w);
    let (y0, y1, ty) = map(y, src_h, dst_h);
    let lerp = |a: f64, b: f64, t: f64| if a == b { a } else { a + (b - a) * t };
    std::array::from_fn(|k| {
        let top = lerp(grid[y0 * src_w + x0][k], grid[y0 * src_w + x1][k], tx);
        let bottom = lerp(grid[y1 * src_w + x0][k], grid[y1 * src_w + x1][k], tx);
        lerp(top, bottom, ty)
    })
}

/// Number of channels produced per pyramid level.
pub const CHANNELS_PER_LEVEL: usize = 5;

/// Multi-scale color and local-contrast descriptors.
///
/// For every level of a 2× box pyramid the extractor emits RGB in [0, 1]
/// plus the mean and variance of luma over a `(2r+1)²` patch, upsampled
/// bilinearly back to full resolution. The result has `levels × 5`
/// channels, level 0 first.
pub fn extract_pyramid_features(
    image: &RgbImage,
    levels: usize,
    patch_radius: usize,
) -> Result<FeatureMap> {
    if levels == 0 {
        return Err(Error::invalid("pyramid needs at least one level"));
    }
    let min_side = 1usize
        .checked_shl((levels - 1) as u32)
        .filter(|&s| s <= image.width().min(image.height()))
        .ok_or_else(|| {
            Error::invalid(format!(
                "{}x{} image too small for {levels} pyramid levels",
                image.width(),
                image.height()
            ))
        })?;
    debug_assert!(min_side >= 1);

    let (w, h) = image.dims();
    let channels = levels * CHANNELS_PER_LEVEL;
    let mut values = vec![0f32; w * h * channels];
    let mut level = Level::from_image(image);
    for l in 0..levels {
        if l > 0 {
            level = level.half();
        }
        let desc = level.descriptors(patch_radius);
        for y in 0..h {
            for x in 0..w {
                let d = if l == 0 {
                    desc[y * w + x]
                } else {
                    bilinear(&desc, level.width, level.height, w, h, x, y)
                };
                let base = (y * w + x) * channels + l * CHANNELS_PER_LEVEL;
                for (k, v) in d.iter().enumerate() {
                    values[base + k] = *v as f32;
                }
            }
        }
    }
    FeatureMap::new(w, h, channels, values)
}

const MAGIC: &[u8; 4] = b"FMAP";
const VERSION: u32 = 1;
const HEADER_LEN: u64 = 20;

/// Writes the `FMAP` v1 encoding: magic, then little-endian u32 version,
/// height, width, channels, then all values as little-endian f32.
pub fn write_features(features: &FeatureMap, mut out: impl Write) -> std::io::Result<()> {
    out.write_all(MAGIC)?;
    for v in [
        VERSION,
        features.height as u32,
        features.width as u32,
        features.channels as u32,
    ] {
        out.write_all(&v.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(features.values.len() * 4);
    for v in &features.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    out.write_all(&buf)
}

/// Parses an `FMAP` v1 stream. Errors carry the byte offset of the problem.
pub fn read_features(mut input: impl Read) -> Result<FeatureMap> {
    let mut bytes = Vec::new();
    input
        .read_to_end(&mut bytes)
        .map_err(|e| Error::format(0, format!("read failed: {e}")))?;
    parse_features(&bytes)
}

/// Parses an in-memory `FMAP` document.
pub fn parse_features(bytes: &[u8]) -> Result<FeatureMap> {
    if bytes.len() < 4 {
        return Err(Error::format(bytes.len() as u64, "truncated magic"));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::format(0, "bad magic, expected \"FMAP\""));
    }
    if (bytes.len() as u64) < HEADER_LEN {
        return Err(Error::format(bytes.len() as u64, "truncated header"));
    }
    let field = |k: usize| u32::from_le_bytes(bytes[4 + 4 * k..8 + 4 * k].try_into().unwrap());
    let (version, height, width, channels) = (field(0), field(1), field(2), field(3));
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    if height == 0 {
        return Err(Error::format(8, "height is zero"));
    }
    if width == 0 {
        return Err(Error::format(12, "width is zero"));
    }
    if channels < 2 {
        return Err(Error::format(16, format!("channel count {channels} below 2")));
    }
    let count = height as u64 * width as u64 * channels as u64;
    let expected = HEADER_LEN + count * 4;
    let actual = bytes.len() as u64;
    if actual < expected {
        return Err(Error::format(
            actual,
            format!("truncated payload: header promises {expected} bytes, file has {actual}"),
        ));
    }
    if actual > expected {
        return Err(Error::format(expected, "trailing bytes after payload"));
    }
    let mut values = Vec::with_capacity(count as usize);
    for (k, chunk) in bytes[HEADER_LEN as usize..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::format(
                HEADER_LEN + 4 * k as u64,
                format!("non-finite value {v}"),
            ));
        }
        values.push(v);
    }
    FeatureMap::new(width as usize, height as usize, channels as usize, values)
}

pub fn save_features(features: &FeatureMap, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_features(features, &mut w).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_features(path: impl AsRef<Path>) -> Result<FeatureMap> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_features(&bytes).map_err(|e| e.context(path.display().to_string()))
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(w: usize, h: usize, seed: u64) -> RgbImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RgbImage::from_fn(w, h, |_, _| rng.gen()).unwrap()
    }

    #[test]
    fn constant_image_gives_identical_vectors() {
        let img = RgbImage::filled(13, 9, [40, 120, 200]).unwrap();
        for (levels, r) in [(1, 0), (2, 1), (3, 2)] {
            let f = extract_pyramid_features(&img, levels, r).unwrap();
            assert_eq!(f.channels(), levels * 5);
            let first = f.pixel(0).to_vec();
            for i in 0..13 * 9 {
                assert_eq!(f.pixel(i), first.as_slice());
            }
        }
    }

    #[test]
    fn base_level_is_scaled_rgb() {
        let img = random_image(6, 5, 1);
        let f = extract_pyramid_features(&img, 1, 0).unwrap();
        for i in 0..30 {
            let p = img.get(i);
            for k in 0..3 {
                assert_eq!(f.pixel(i)[k], (p[k] as f64 / 255.0) as f32);
            }
            assert_eq!(f.pixel(i)[4], 0.0);
        }
    }

    #[test]
    fn radius_zero_single_level_is_local() {
        let a = random_image(7, 7, 2);
        let mut b = a.clone();
        b.set(24, [1, 2, 3]);
        let fa = extract_pyramid_features(&a, 1, 0).unwrap();
        let fb = extract_pyramid_features(&b, 1, 0).unwrap();
        for i in 0..49 {
            assert_eq!(fa.pixel(i) == fb.pixel(i), i != 24, "pixel {i}");
        }
    }

    #[test]
    fn too_small_for_pyramid() {
        let img = random_image(8, 3, 3);
        assert!(extract_pyramid_features(&img, 2, 1).is_ok());
        assert!(extract_pyramid_features(&img, 3, 1).is_err());
        assert!(extract_pyramid_features(&img, 0, 1).is_err());
    }

    #[test]
    fn extraction_is_deterministic() {
        let img = random_image(32, 24, 4);
        let a = extract_pyramid_features(&img, 3, 2).unwrap();
        let b = extract_pyramid_features(&img, 3, 2).unwrap();
        assert_eq!(
            a.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn centralize_examples() {
        let f = FeatureMap::new(2, 1, 3, vec![1.0, 2.0, 3.0, 5.0, 5.0, 5.0]).unwrap();
        let c = centralize(&f);
        assert_eq!(c.pixel(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(c.pixel(1), &[0.0, 0.0, 0.0]);
        assert_eq!(c.norm(1), 0.0);
        assert!((c.norm(0) - 2f64.sqrt()).abs() < 1e-15);
        // Re-centralizing a centralized map changes nothing.
        let again = FeatureMap::new(2, 1, 3, c.values().iter().map(|&v| v as f32).collect()).unwrap();
        assert_eq!(centralize(&again), c);
    }

    #[test]
    fn feature_map_rejects_bad_input() {
        assert!(FeatureMap::new(1, 1, 1, vec![0.0]).is_err());
        assert!(FeatureMap::new(1, 1, 2, vec![0.0, f32::NAN]).is_err());
        assert!(FeatureMap::new(2, 1, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn file_round_trip_is_bitwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let values: Vec<f32> = (0..8 * 8 * 6).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let f = FeatureMap::new(8, 8, 6, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.fmap");
        save_features(&f, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert_eq!(&bytes[..4], b"FMAP");
        assert_eq!(bytes.len(), 20 + 8 * 8 * 6 * 4);
        let g = load_features(&path).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn malformed_files() {
        let f = FeatureMap::new(4, 4, 3, vec![0.5; 48]).unwrap();
        let mut bytes = Vec::new();
        write_features(&f, &mut bytes).unwrap();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(parse_features(&bad), Err(Error::Format { offset: 0, .. })));

        let short = &bytes[..bytes.len() - 10];
        match parse_features(short) {
            Err(Error::Format { offset, message }) => {
                assert_eq!(offset, short.len() as u64);
                assert!(message.contains("truncated"));
            }
            other => panic!("expected truncation error, got {other:?}"),
        }

        let mut nan = bytes.clone();
        nan[20 + 4 * 5..20 + 4 * 6].copy_from_slice(&f32::INFINITY.to_le_bytes());
        assert!(matches!(parse_features(&nan), Err(Error::Format { offset: 40, .. })));

        let mut version = bytes.clone();
        version[4] = 9;
        assert!(matches!(parse_features(&version), Err(Error::Format { offset: 4, .. })));
    }

    proptest! {
        #[test]
        fn centralized_pixels_have_zero_mean(
            values in proptest::collection::vec(-1e3f32..1e3, 4 * 3 * 5)
        ) {
            let raw = FeatureMap::new(4, 3, 5, values).unwrap();
            let f = centralize(&raw);
            for i in 0..12 {
                let px = f.pixel(i);
                let mean: f64 = px.iter().sum::<f64>() / 5.0;
                let scale: f64 = raw.pixel(i).iter().map(|&v| (v as f64).abs()).fold(f64::MIN_POSITIVE, f64::max);
                prop_assert!(mean.abs() <= 1e-12 * scale, "mean {} scale {}", mean, scale);
            }
        }
    }
}
