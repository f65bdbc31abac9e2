//! Dense vs. region-restricted correlation memory.
//!
//! Two layouts are measured: random regions covering a fixed fraction of
//! each frame, and real-looking portrait parses (head ≈ a third of the
//! frame, plus the inpainting band). Entry counts are measured by
//! materializing every block at once and compared with `Σ N_A·N_T`.
//!
//! ```bash
//! cargo run --release --example memory_bench -- 32,64,128
//! ```

use headblend::bench::{run_bench, BenchConfig, BenchLayout};
use headblend::correspondence::memory_report;
use headblend::preprocess::preprocess;
use headblend::types::RegionIndex;
use headblend::{synth, BlenderConfig};

fn main() -> headblend::Result<()> {
    let sizes: Vec<usize> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').filter_map(|v| v.parse().ok()).collect())
        .unwrap_or_else(|| vec![32, 64]);

    println!("## uniform: 30% of pixels, 6 regions");
    let uniform = run_bench(&BenchConfig {
        sizes: sizes.clone(),
        layout: BenchLayout::Uniform {
            fraction: 0.3,
            regions: 6,
        },
        repetitions: 2,
        ..BenchConfig::default()
    })?;
    print!("{}", uniform.to_text());

    println!("\n## portrait parses");
    let portrait = run_bench(&BenchConfig {
        sizes,
        layout: BenchLayout::Portrait,
        repetitions: 2,
        ..BenchConfig::default()
    })?;
    print!("{}", portrait.to_text());

    // At full resolution the dense matrix is out of reach, but the
    // prediction is just arithmetic.
    println!("\n## 512x512 prediction (no allocation)");
    let a = synth::portrait(512, 1)?;
    let t = synth::portrait(512, 2)?;
    let pre = preprocess(&a.image, &a.labels, &t.image, &t.labels, &BlenderConfig::default())?;
    let mut rows: Vec<RegionIndex> = headblend::Region::HEAD
        .iter()
        .map(|&r| RegionIndex::from_labels(&a.labels, r))
        .collect();
    let mut cols: Vec<RegionIndex> = headblend::Region::HEAD
        .iter()
        .map(|&r| RegionIndex::from_labels(&t.labels, r))
        .collect();
    rows.push(RegionIndex::from_mask(headblend::Region::Inpainting, &pre.animated_inpaint));
    cols.push(RegionIndex::from_mask(headblend::Region::Inpainting, &pre.target_inpaint));
    let report = memory_report(&rows, &cols, 512, 512)?;
    print!("{}", report.to_text());
    let gib = |entries: u128| entries as f64 * 4.0 / (1u64 << 30) as f64;
    println!(
        "as f32: dense {:.1} GiB, restricted {:.2} GiB",
        gib(report.naive_entries),
        gib(report.restricted_entries)
    );
    Ok(())
}
