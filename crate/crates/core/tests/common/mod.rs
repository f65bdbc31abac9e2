//! Test-side oracles: slow, direct re-derivations of what the library computes.
#![allow(dead_code, clippy::needless_range_loop)]

use headblend::{FeatureMap, GrayImage, LabelMap, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_features(rng: &mut ChaCha8Rng, w: usize, h: usize, c: usize) -> FeatureMap {
    let values = (0..w * h * c).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    FeatureMap::new(w, h, c, values).unwrap()
}

pub fn random_image(rng: &mut ChaCha8Rng, w: usize, h: usize) -> RgbImage {
    RgbImage::from_fn(w, h, |_, _| [rng.gen(), rng.gen(), rng.gen()]).unwrap()
}

/// Each pixel takes one of `ids` uniformly.
pub fn random_labels(rng: &mut ChaCha8Rng, w: usize, h: usize, ids: &[u8]) -> LabelMap {
    LabelMap::from_fn(w, h, |_, _| ids[rng.gen_range(0..ids.len())]).unwrap()
}

/// Cosine of mean-removed descriptors, straight from the definition.
pub fn oracle_cosine(a: &FeatureMap, u: usize, b: &FeatureMap, v: usize, eps: f64) -> f64 {
    let center = |p: &[f32]| -> Vec<f64> {
        let mean = p.iter().map(|&x| x as f64).sum::<f64>() / p.len() as f64;
        p.iter().map(|&x| x as f64 - mean).collect()
    };
    let (x, y) = (center(a.pixel(u)), center(b.pixel(v)));
    let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
    let nx = x.iter().map(|p| p * p).sum::<f64>().sqrt();
    let ny = y.iter().map(|p| p * p).sum::<f64>().sqrt();
    dot / (nx.max(eps) * ny.max(eps))
}

/// Index into `candidates` with the highest score; first one wins ties.
pub fn argmax(candidates: &[u32], score: impl Fn(usize) -> f64) -> usize {
    let mut best = candidates[0] as usize;
    let mut best_score = score(best);
    for &c in &candidates[1..] {
        let s = score(c as usize);
        if s > best_score {
            best = c as usize;
            best_score = s;
        }
    }
    best
}

/// Pixels of `labels` whose id is one of `ids`, in index order.
pub fn pixels_with(labels: &LabelMap, ids: &[u8]) -> Vec<u32> {
    (0..labels.width() * labels.height())
        .filter(|&i| ids.contains(&labels.get(i)))
        .map(|i| i as u32)
        .collect()
}

/// SSIM computed window by window with an explicit 2-D Gaussian, only over
/// windows that fit entirely inside the image.
pub fn naive_ssim(a: &GrayImage, b: &GrayImage) -> f64 {
    let (w, h) = a.dims();
    let (c1, c2) = ((0.01f64 * 255.0).powi(2), (0.03f64 * 255.0).powi(2));
    let mut kernel = [[0.0f64; 11]; 11];
    let mut total = 0.0;
    for (dy, row) in kernel.iter_mut().enumerate() {
        for (dx, k) in row.iter_mut().enumerate() {
            let (x, y) = (dx as f64 - 5.0, dy as f64 - 5.0);
            *k = (-(x * x + y * y) / (2.0 * 1.5 * 1.5)).exp();
            total += *k;
        }
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for y0 in 0..=h - 11 {
        for x0 in 0..=w - 11 {
            let (mut ma, mut mb) = (0.0, 0.0);
            for dy in 0..11 {
                for dx in 0..11 {
                    let k = kernel[dy][dx] / total;
                    let i = (y0 + dy) * w + x0 + dx;
                    ma += k * a.get(i) as f64;
                    mb += k * b.get(i) as f64;
                }
            }
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for dy in 0..11 {
                for dx in 0..11 {
                    let k = kernel[dy][dx] / total;
                    let i = (y0 + dy) * w + x0 + dx;
                    let (da, db) = (a.get(i) as f64 - ma, b.get(i) as f64 - mb);
                    va += k * da * da;
                    vb += k * db * db;
                    cov += k * da * db;
                }
            }
            sum += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            count += 1;
        }
    }
    sum / count as f64
}

/// Mirrors an image left to right.
pub fn flip_rgb(image: &RgbImage) -> RgbImage {
    let w = image.width();
    RgbImage::from_fn(w, image.height(), |x, y| image.get_xy(w - 1 - x, y)).unwrap()
}

pub fn flip_labels(labels: &LabelMap) -> LabelMap {
    let w = labels.width();
    LabelMap::from_fn(w, labels.height(), |x, y| labels.get(y * w + w - 1 - x)).unwrap()
}
