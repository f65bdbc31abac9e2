//! PSNR, SSIM and masked L1.

use crate::error::{Error, Result};
use crate::types::{same_dims, BinaryMask, GrayImage, RgbImage};

/// Reported PSNR for identical inputs.
pub const PSNR_CAP: f64 = 99.0;

fn check_mask(mask: &BinaryMask, dims: (usize, usize)) -> Result<()> {
    same_dims("mask vs image", mask.dims(), dims)?;
    if mask.is_empty() {
        return Err(Error::invalid("mask selects no pixels"));
    }
    Ok(())
}

/// Peak signal-to-noise ratio in dB over all channels of the selected pixels,
/// capped at [`PSNR_CAP`].
pub fn psnr(a: &RgbImage, b: &RgbImage, mask: Option<&BinaryMask>) -> Result<f64> {
    same_dims("psnr", a.dims(), b.dims())?;
    if let Some(m) = mask {
        check_mask(m, a.dims())?;
    }
    let (mut sq, mut n) = (0.0f64, 0usize);
    for i in 0..a.pixel_count() {
        if mask.is_some_and(|m| !m.get(i)) {
            continue;
        }
        let (pa, pb) = (a.get(i), b.get(i));
        for k in 0..3 {
            let d = pa[k] as f64 - pb[k] as f64;
            sq += d * d;
        }
        n += 3;
    }
    let mse = sq / n as f64;
    if mse == 0.0 {
        return Ok(PSNR_CAP);
    }
    Ok((10.0 * (255.0f64 * 255.0 / mse).log10()).min(PSNR_CAP))
}

/// Mean `|a − b| / 255` over the selected pixels and all channels.
pub fn l1_masked(a: &RgbImage, b: &RgbImage, mask: &BinaryMask) -> Result<f64> {
    same_dims("l1", a.dims(), b.dims())?;
    check_mask(mask, a.dims())?;
    let (mut sum, mut n) = (0.0f64, 0usize);
    for i in mask.indices() {
        let (pa, pb) = (a.get(i), b.get(i));
        for k in 0..3 {
            sum += (pa[k] as f64 - pb[k] as f64).abs();
        }
        n += 3;
    }
    Ok(sum / (255.0 * n as f64))
}

pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

fn gaussian_taps() -> [f64; SSIM_WINDOW] {
    let half = (SSIM_WINDOW / 2) as f64;
    let mut taps: [f64; SSIM_WINDOW] =
        std::array::from_fn(|i| (-((i as f64 - half).powi(2)) / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp());
    let sum: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= sum);
    taps
}

/// Separable Gaussian filter keeping only windows fully inside the image.
fn filter_valid(src: &[f64], w: usize, h: usize, taps: &[f64; SSIM_WINDOW]) -> Vec<f64> {
    let ow = w - SSIM_WINDOW + 1;
    let oh = h - SSIM_WINDOW + 1;
    let mut rows = vec![0.0; ow * h];
    for y in 0..h {
        for x in 0..ow {
            rows[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * src[y * w + x + k])
                .sum();
        }
    }
    let mut out = vec![0.0; ow * oh];
    for y in 0..oh {
        for x in 0..ow {
            out[y * ow + x] = taps
                .iter()
                .enumerate()
                .map(|(k, t)| t * rows[(y + k) * ow + x])
                .sum();
        }
    }
    out
}

/// Structural similarity with an 11×11 Gaussian window (σ = 1.5),
/// K1 = 0.01, K2 = 0.03, L = 255, averaged over all full windows.
pub fn ssim(a: &GrayImage, b: &GrayImage) -> Result<f64> {
    same_dims("ssim", a.dims(), b.dims())?;
    let (w, h) = a.dims();
    if w.min(h) < SSIM_WINDOW {
        return Err(Error::invalid(format!(
            "ssim needs images of at least {SSIM_WINDOW}x{SSIM_WINDOW}, got {w}x{h}"
        )));
    }
    let c1 = (SSIM_K1 * 255.0).powi(2);
    let c2 = (SSIM_K2 * 255.0).powi(2);
    let fa: Vec<f64> = a.as_raw().iter().map(|&v| v as f64).collect();
    let fb: Vec<f64> = b.as_raw().iter().map(|&v| v as f64).collect();
    let prod = |x: &[f64], y: &[f64]| -> Vec<f64> { x.iter().zip(y).map(|(p, q)| p * q).collect() };
    let taps = gaussian_taps();
    let mu_a = filter_valid(&fa, w, h, &taps);
    let mu_b = filter_valid(&fb, w, h, &taps);
    let aa = filter_valid(&prod(&fa, &fa), w, h, &taps);
    let bb = filter_valid(&prod(&fb, &fb), w, h, &taps);
    let ab = filter_valid(&prod(&fa, &fb), w, h, &taps);
    let mut total = 0.0;
    for i in 0..mu_a.len() {
        let (ma, mb) = (mu_a[i], mu_b[i]);
        let var_a = aa[i] - ma * ma;
        let var_b = bb[i] - mb * mb;
        let cov = ab[i] - ma * mb;
        total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
            / ((ma * ma + mb * mb + c1) * (var_a + var_b + c2));
    }
    Ok(total / mu_a.len() as f64)
}

/// BT.601 luma image, for feeding RGB images to [`ssim`].
pub fn to_gray(img: &RgbImage) -> GrayImage {
    let (w, h) = img.dims();
    GrayImage::from_raw(
        w,
        h,
        (0..img.pixel_count())
            .map(|i| crate::preprocess::luma(img.get(i)))
            .collect(),
    )
    .expect("dims preserved")
}
