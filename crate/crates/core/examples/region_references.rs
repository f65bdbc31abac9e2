//! Build head-color and inpainting references between two different portraits.
//!
//! Prints how each semantic region was matched (direct, fallback or
//! skipped), how many correlation entries that took compared with a dense
//! correlation, and writes the references next to the inputs.
//!
//! ```bash
//! cargo run --release --example region_references -- skip
//! ```

use std::path::PathBuf;

use headblend::io::{write_mask, write_rgb};
use headblend::pipeline::{build_references, FeatureSource, PairInputs};
use headblend::preprocess::preprocess;
use headblend::{synth, BlenderConfig, FallbackPolicy};

fn main() -> headblend::Result<()> {
    let fallback: FallbackPolicy = match std::env::args().nth(1) {
        Some(s) => s.parse()?,
        None => FallbackPolicy::GlobalHead,
    };
    let config = BlenderConfig {
        fallback,
        ..BlenderConfig::default()
    };
    let a = synth::portrait(192, 21)?;
    let t = synth::portrait(192, 22)?;
    let inputs = PairInputs {
        animated: a.image,
        animated_labels: a.labels,
        target: t.image,
        target_labels: t.labels,
    };
    let pre = preprocess(
        &inputs.animated,
        &inputs.animated_labels,
        &inputs.target,
        &inputs.target_labels,
        &config,
    )?;
    let refs = build_references(&inputs, &pre, &FeatureSource::Pyramid, &config)?;

    println!("{:<11} {:>7} {:>7}  outcome", "region", "rows", "cols");
    for r in refs.head.regions.iter().chain(&refs.inpaint.regions) {
        let outcome = match (r.skipped, r.fell_back) {
            _ if r.rows == 0 => "absent in animated",
            (true, _) => "skipped",
            (false, true) => "fallback",
            _ => "matched",
        };
        println!("{:<11} {:>7} {:>7}  {outcome}", r.region.name(), r.rows, r.cols);
    }
    let pixels = (192u64 * 192) as f64;
    let used = (refs.head.entries() + refs.inpaint.entries()) as f64;
    println!(
        "entries: {used:.0} restricted vs {:.0} dense ({:.1}x fewer)",
        pixels * pixels,
        pixels * pixels / used
    );

    let out = PathBuf::from("target/region_references");
    std::fs::create_dir_all(&out).map_err(|e| headblend::Error::io(&out, e))?;
    write_rgb(&refs.head.reference.colors, out.join("head_ref.png"))?;
    write_mask(&refs.head.reference.valid, out.join("head_ref_valid.png"))?;
    write_rgb(&refs.inpaint.reference.colors, out.join("inpaint_ref.png"))?;
    write_mask(&refs.inpaint.reference.valid, out.join("inpaint_ref_valid.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
