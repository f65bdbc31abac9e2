//! Semantic-region correspondence.
//!
//! Animated and target pixels are only compared when they carry the same
//! semantic region, so each region gets its own `N_A × N_T` block of cosine
//! similarities between centralized descriptors instead of one `wh × wh`
//! matrix. A temperature softmax over a block's columns turns each row into
//! weights for averaging target colors; the head-color and inpainting
//! references are built that way. Softmax over rows runs the same block in
//! reverse for cycle checks.
//!
//! Blocks come in two forms behind the [`Affinity`] trait: a stored
//! [`CorrelationBlock`] (instrumented by [`EntryTracker`], used for
//! benchmarking and inspection) and a [`StreamedBlock`] that recomputes a
//! row or column on demand, which the full-resolution pipeline uses.

mod attention;
mod block;
mod cycle;
mod memory;
mod warp;

pub use attention::{accumulated_attention, accumulated_attention_values};
pub use block::{
    naive_full_correlation, region_correlation, Affinity, CorrelationBlock, Correlator,
    EntryTracker, FullCorrelation, StreamedBlock, DEFAULT_NAIVE_CAP,
};
pub use cycle::{
    cross_pair_cycle_loss, cycle_loss, cycle_warp_and_loss, round_trip, CycleResult,
    RegionCycleLoss, RegionPair,
};
pub use memory::{measure_peak_entries, memory_report, MemoryReport, RegionEntries};
pub use warp::{
    attention_row, create_head_color_reference, create_inpainting_reference, softmax_warp,
    warp_cols, warp_rows, AttentionRow, ReferenceBuild, RegionOutcome,
};

use crate::types::{BinaryMask, LabelMap, Region, RegionIndex};

/// Pairs for the six label-defined head regions, in [`Region::HEAD`] order.
pub fn head_region_pairs(animated: &LabelMap, target: &LabelMap) -> Vec<RegionPair> {
    Region::HEAD
        .into_iter()
        .map(|r| RegionPair {
            rows: RegionIndex::from_labels(animated, r),
            cols: RegionIndex::from_labels(target, r),
        })
        .collect()
}

/// Pair for the inpainting band.
pub fn inpainting_pair(animated_band: &BinaryMask, target_band: &BinaryMask) -> RegionPair {
    RegionPair {
        rows: RegionIndex::from_mask(Region::Inpainting, animated_band),
        cols: RegionIndex::from_mask(Region::Inpainting, target_band),
    }
}
