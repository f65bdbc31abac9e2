//! Dense versus region-restricted correlation: time and entry counts.

use std::fmt::Write as _;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::correspondence::{
    head_region_pairs, inpainting_pair, measure_peak_entries, memory_report,
    naive_full_correlation, Correlator, EntryTracker, MemoryReport, RegionPair,
};
use crate::error::{Error, Result};
use crate::features::{centralize, CentralizedFeatures, FeatureMap};
use crate::preprocess::preprocess;
use crate::types::{BlenderConfig, Region, RegionIndex, RgbImage};

/// How region indices are generated for each benchmark size.
#[derive(Clone, Debug, PartialEq)]
pub enum BenchLayout {
    /// `fraction` of the pixels on each side, spread round-robin over the
    /// first `regions` regions.
    Uniform { fraction: f64, regions: usize },
    /// Parses of two synthetic portraits, including the inpainting band.
    Portrait,
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub layout: BenchLayout,
    pub repetitions: usize,
    /// Largest frame (in pixels) for which the dense arm runs.
    pub naive_cap: usize,
    pub channels: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![32, 64],
            layout: BenchLayout::Portrait,
            repetitions: 3,
            naive_cap: crate::correspondence::DEFAULT_NAIVE_CAP,
            channels: 15,
            seed: 7,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub size: usize,
    pub memory: MemoryReport,
    /// Peak live entries of the dense arm, `None` when skipped by the cap.
    pub naive_measured: Option<u64>,
    pub naive_ms: Option<f64>,
    pub restricted_ms: f64,
}

impl BenchRow {
    /// `restricted / naive` entry ratio.
    pub fn entry_fraction(&self) -> f64 {
        self.memory.restricted_entries as f64 / self.memory.naive_entries as f64
    }
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

fn random_features(size: usize, channels: usize, rng: &mut ChaCha8Rng) -> Result<CentralizedFeatures> {
    let values = (0..size * size * channels).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
    Ok(centralize(&FeatureMap::new(size, size, channels, values)?))
}

fn uniform_regions(
    size: usize,
    fraction: f64,
    regions: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<RegionIndex>> {
    let wh = size * size;
    let take = ((fraction * wh as f64).round() as usize).min(wh);
    let mut pixels: Vec<u32> = (0..wh as u32).collect();
    pixels.shuffle(rng);
    let mut buckets = vec![Vec::new(); regions];
    for (k, &p) in pixels[..take].iter().enumerate() {
        buckets[k % regions].push(p);
    }
    buckets
        .into_iter()
        .zip(Region::ALL)
        .map(|(mut idx, r)| {
            idx.sort_unstable();
            RegionIndex::new(r, size, size, idx)
        })
        .collect()
}

fn layout_pairs(size: usize, layout: &BenchLayout, rng: &mut ChaCha8Rng, seed: u64) -> Result<Vec<RegionPair>> {
    match *layout {
        BenchLayout::Uniform { fraction, regions } => {
            if !(0.0..=1.0).contains(&fraction) {
                return Err(Error::invalid(format!("region fraction {fraction} outside [0, 1]")));
            }
            if regions == 0 || regions > Region::ALL.len() {
                return Err(Error::invalid(format!(
                    "region count must be 1..={}, got {regions}",
                    Region::ALL.len()
                )));
            }
            let a = uniform_regions(size, fraction, regions, rng)?;
            let t = uniform_regions(size, fraction, regions, rng)?;
            Ok(a.into_iter()
                .zip(t)
                .map(|(rows, cols)| RegionPair { rows, cols })
                .collect())
        }
        BenchLayout::Portrait => {
            let pa = crate::synth::portrait(size, seed)?;
            let pt = crate::synth::portrait(size, seed + 1)?;
            let pre = preprocess(&pa.image, &pa.labels, &pt.image, &pt.labels, &BlenderConfig::default())?;
            let mut pairs = head_region_pairs(&pa.labels, &pt.labels);
            pairs.push(inpainting_pair(&pre.animated_inpaint, &pre.target_inpaint));
            Ok(pairs)
        }
    }
}

fn mean_ms(samples: &[f64]) -> f64 {
    samples.iter().sum::<f64>() / samples.len() as f64
}

/// Runs both arms for every size and checks the entry counts against the
/// predicted `Σ N_A·N_T` and `(wh)²`.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    if config.repetitions == 0 {
        return Err(Error::invalid("repetitions must be at least 1"));
    }
    let mut rows = Vec::with_capacity(config.sizes.len());
    for &size in &config.sizes {
        if size == 0 {
            return Err(Error::invalid("benchmark sizes must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ size as u64);
        let pairs = layout_pairs(size, &config.layout, &mut rng, config.seed)?;
        let fa = random_features(size, config.channels, &mut rng)?;
        let ft = random_features(size, config.channels, &mut rng)?;
        let correlator = Correlator::new(&fa, &ft, 1e-8)?;

        let animated: Vec<RegionIndex> = pairs.iter().map(|p| p.rows.clone()).collect();
        let target: Vec<RegionIndex> = pairs.iter().map(|p| p.cols.clone()).collect();
        let mut memory = memory_report(&animated, &target, size, size)?;

        let mut restricted_times = Vec::new();
        let mut peak = 0;
        for _ in 0..config.repetitions {
            let start = Instant::now();
            peak = measure_peak_entries(&correlator, &pairs)?;
            restricted_times.push(start.elapsed().as_secs_f64() * 1e3);
        }
        memory.measured_peak = Some(peak);
        if memory.measurement_matches() != Some(true) {
            return Err(Error::Internal(format!(
                "measured {peak} entries but predicted {}",
                memory.restricted_entries
            )));
        }

        let (naive_measured, naive_ms) = if size * size <= config.naive_cap {
            let mut times = Vec::new();
            let mut peak = 0;
            for _ in 0..config.repetitions {
                let tracker = EntryTracker::new();
                let start = Instant::now();
                let full = naive_full_correlation(&fa, &ft, 1e-8, config.naive_cap, Some(&tracker))?;
                times.push(start.elapsed().as_secs_f64() * 1e3);
                drop(full);
                peak = tracker.peak();
            }
            if peak as u128 != memory.naive_entries {
                return Err(Error::Internal(format!(
                    "dense arm measured {peak} entries, predicted {}",
                    memory.naive_entries
                )));
            }
            (Some(peak), Some(mean_ms(&times)))
        } else {
            (None, None)
        };
        rows.push(BenchRow {
            size,
            memory,
            naive_measured,
            naive_ms,
            restricted_ms: mean_ms(&restricted_times),
        });
    }
    Ok(BenchReport { rows })
}

impl BenchReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "{:>6} {:>14} {:>14} {:>14} {:>10} {:>12} {:>12}",
            "size", "naive", "restricted", "measured", "ratio", "naive_ms", "restr_ms"
        );
        for r in &self.rows {
            let naive = r
                .naive_measured
                .map_or("skipped(cap)".to_string(), |n| n.to_string());
            let ratio = r
                .memory
                .ratio()
                .map_or("undefined".to_string(), |x| format!("{x:.3}"));
            let naive_ms = r.naive_ms.map_or("-".to_string(), |t| format!("{t:.2}"));
            let _ = writeln!(
                s,
                "{:>6} {:>14} {:>14} {:>14} {:>10} {:>12} {:>12.2}",
                format!("{0}x{0}", r.size),
                naive,
                r.memory.restricted_entries,
                r.memory.measured_peak.unwrap_or(0),
                ratio,
                naive_ms,
                r.restricted_ms
            );
        }
        s
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let p = format!("size.{}", r.size);
            let _ = writeln!(s, "{p}.naive_entries = {}", r.memory.naive_entries);
            let _ = writeln!(
                s,
                "{p}.naive_measured = {}",
                r.naive_measured.map_or("skipped(cap)".to_string(), |n| n.to_string())
            );
            let _ = writeln!(s, "{p}.restricted_entries = {}", r.memory.restricted_entries);
            let _ = writeln!(s, "{p}.restricted_measured = {}", r.memory.measured_peak.unwrap_or(0));
            let _ = writeln!(s, "{p}.entry_fraction = {:.12}", r.entry_fraction());
            let _ = writeln!(
                s,
                "{p}.ratio = {}",
                r.memory.ratio().map_or("undefined".to_string(), |x| format!("{x:.6}"))
            );
            if let Some(t) = r.naive_ms {
                let _ = writeln!(s, "{p}.naive_ms = {t:.3}");
            }
            let _ = writeln!(s, "{p}.restricted_ms = {:.3}", r.restricted_ms);
        }
        s
    }
}

/// Synthetic image used by the examples to visualize bench layouts.
pub fn layout_preview(size: usize, pairs: &[RegionPair]) -> Result<RgbImage> {
    let mut img = RgbImage::new(size, size)?;
    for (k, p) in pairs.iter().enumerate() {
        let shade = 60 + (k as u8 * 29) % 190;
        for &i in p.rows.indices() {
            img.set(i as usize, [shade, 255 - shade, 128]);
        }
    }
    Ok(img)
}
