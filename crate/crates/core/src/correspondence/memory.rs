//! Correlation-entry accounting: dense baseline versus per-region blocks.

use std::fmt::Write as _;

use super::block::{Correlator, EntryTracker};
use super::cycle::RegionPair;
use crate::error::{Error, Result};
use crate::types::{Region, RegionIndex};

#[derive(Clone, Debug, PartialEq)]
pub struct RegionEntries {
    pub region: Region,
    pub animated_pixels: usize,
    pub target_pixels: usize,
}

impl RegionEntries {
    pub fn entries(&self) -> u128 {
        self.animated_pixels as u128 * self.target_pixels as u128
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MemoryReport {
    pub width: usize,
    pub height: usize,
    pub regions: Vec<RegionEntries>,
    /// `(wh)²`.
    pub naive_entries: u128,
    /// `Σ_r N_A^r · N_T^r`.
    pub restricted_entries: u128,
    /// Peak live entries observed while every block was held at once.
    pub measured_peak: Option<u64>,
}

impl MemoryReport {
    /// `naive / restricted`, or `None` when nothing is restricted.
    pub fn ratio(&self) -> Option<f64> {
        (self.restricted_entries > 0)
            .then(|| self.naive_entries as f64 / self.restricted_entries as f64)
    }

    /// True when a measurement exists and equals the prediction.
    pub fn measurement_matches(&self) -> Option<bool> {
        self.measured_peak
            .map(|m| m as u128 == self.restricted_entries)
    }

    fn ratio_text(&self) -> String {
        match self.ratio() {
            Some(r) => format!("{r:.6}"),
            None => "undefined".to_string(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "frame {}x{}", self.width, self.height);
        for r in &self.regions {
            let _ = writeln!(
                s,
                "region {:<10} animated {:>8} target {:>8} entries {:>12}",
                r.region.name(),
                r.animated_pixels,
                r.target_pixels,
                r.entries()
            );
        }
        let _ = writeln!(s, "naive entries      {}", self.naive_entries);
        let _ = writeln!(s, "restricted entries {}", self.restricted_entries);
        let _ = writeln!(s, "ratio              {}", self.ratio_text());
        if let Some(m) = self.measured_peak {
            let _ = writeln!(s, "measured peak      {m}");
        }
        s
    }

    /// One `key = value` line per field.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "width = {}", self.width);
        let _ = writeln!(s, "height = {}", self.height);
        for r in &self.regions {
            let n = r.region.name();
            let _ = writeln!(s, "region.{n}.animated = {}", r.animated_pixels);
            let _ = writeln!(s, "region.{n}.target = {}", r.target_pixels);
            let _ = writeln!(s, "region.{n}.entries = {}", r.entries());
        }
        let _ = writeln!(s, "naive_entries = {}", self.naive_entries);
        let _ = writeln!(s, "restricted_entries = {}", self.restricted_entries);
        let _ = writeln!(s, "ratio = {}", self.ratio_text());
        if let Some(m) = self.measured_peak {
            let _ = writeln!(s, "measured_peak = {m}");
        }
        s
    }
}

/// Predicted entry counts. Regions are matched by name; a region present on
/// one side only contributes zero entries.
pub fn memory_report(
    animated: &[RegionIndex],
    target: &[RegionIndex],
    width: usize,
    height: usize,
) -> Result<MemoryReport> {
    for idx in animated.iter().chain(target) {
        if idx.dims() != (width, height) {
            return Err(Error::invalid(format!(
                "region {} indexes a {:?} frame, expected {width}x{height}",
                idx.region(),
                idx.dims()
            )));
        }
    }
    let mut regions: Vec<Region> = animated.iter().chain(target).map(|r| r.region()).collect();
    regions.sort();
    regions.dedup();
    let count = |side: &[RegionIndex], r: Region| -> usize {
        side.iter().filter(|i| i.region() == r).map(|i| i.len()).sum()
    };
    let regions: Vec<RegionEntries> = regions
        .into_iter()
        .map(|region| RegionEntries {
            region,
            animated_pixels: count(animated, region),
            target_pixels: count(target, region),
        })
        .collect();
    let wh = (width * height) as u128;
    Ok(MemoryReport {
        width,
        height,
        restricted_entries: regions.iter().map(|r| r.entries()).sum(),
        regions,
        naive_entries: wh * wh,
        measured_peak: None,
    })
}

/// Materializes every region block at once and returns the tracker's peak.
pub fn measure_peak_entries(correlator: &Correlator<'_>, pairs: &[RegionPair]) -> Result<u64> {
    let tracker = EntryTracker::new();
    let blocks = pairs
        .iter()
        .map(|p| correlator.block(&p.rows, &p.cols, Some(&tracker)))
        .collect::<Result<Vec<_>>>()?;
    let peak = tracker.peak();
    drop(blocks);
    debug_assert_eq!(tracker.live(), 0);
    Ok(peak)
}
