//! Derive the blend masks for an animated/target pair and save them as PNGs.
//!
//! The animated portrait and the target come from the procedural portrait
//! generator, so no parser is needed. Pass an output directory to keep the
//! files (default `target/preprocess_masks`).
//!
//! ```bash
//! cargo run --release --example preprocess_masks -- /tmp/masks
//! ```

use std::path::PathBuf;

use headblend::io::{write_gray, write_mask, write_rgb};
use headblend::preprocess::preprocess;
use headblend::{synth, BlenderConfig};

fn main() -> headblend::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("target/preprocess_masks"));
    std::fs::create_dir_all(&out).map_err(|e| headblend::Error::io(&out, e))?;

    let animated = synth::portrait(256, 11)?;
    let target = synth::portrait(256, 12)?;
    let config = BlenderConfig::default();
    let pre = preprocess(&animated.image, &animated.labels, &target.image, &target.labels, &config)?;

    println!(
        "radii at 256 px: target band {} px, union {} px",
        config.target_radius(256),
        config.union_radius(256)
    );
    let masks = [
        ("head_mask_a", &pre.animated_head),
        ("head_mask_t", &pre.target_head),
        ("inpaint_mask_a", &pre.animated_inpaint),
        ("inpaint_mask_t", &pre.target_inpaint),
        ("union_mask_a", &pre.dilated_union),
    ];
    for (name, mask) in masks {
        write_mask(mask, out.join(format!("{name}.png")))?;
        println!("{name:<15} {:>6} px", mask.count());
    }

    // The animated band and head tile the dilated union exactly.
    let tiled = pre.animated_head.union(&pre.animated_inpaint)?;
    assert_eq!(tiled, pre.dilated_union);
    assert!(pre.animated_head.intersection(&pre.animated_inpaint)?.is_empty());

    write_gray(&pre.gray_head, out.join("gray_head_a.png"))?;
    write_rgb(&pre.background, out.join("background_t.png"))?;
    println!("wrote {}", out.display());
    Ok(())
}
