//! Precomputed features through FMAP files.
//!
//! Any extractor (a neural network, for example) can feed the pipeline by
//! writing one `FMAP` file per frame: the magic `FMAP`, little-endian `u32`
//! version, height, width and channel count, then `f32` values row-major per
//! pixel. This example writes pyramid features, reads them back, shows a
//! format error with its byte offset, and runs a swap from the files.

use headblend::features::{extract_pyramid_features, load_features, parse_features, save_features};
use headblend::pipeline::{swap, FeatureSource, PairInputs};
use headblend::{synth, BlenderConfig};

fn main() -> headblend::Result<()> {
    let dir = std::path::PathBuf::from("target/feature_files");
    std::fs::create_dir_all(&dir).map_err(|e| headblend::Error::io(&dir, e))?;
    let a = synth::portrait(96, 41)?;
    let t = synth::portrait(96, 42)?;

    let fa = extract_pyramid_features(&a.image, 3, 2)?;
    let ft = extract_pyramid_features(&t.image, 3, 2)?;
    save_features(&fa, dir.join("animated.fmap"))?;
    save_features(&ft, dir.join("target.fmap"))?;
    let back = load_features(dir.join("animated.fmap"))?;
    assert_eq!(back, fa);
    println!(
        "animated.fmap: {}x{}x{} ({} bytes)",
        back.width(),
        back.height(),
        back.channels(),
        20 + 4 * back.values().len()
    );

    let mut bytes = std::fs::read(dir.join("target.fmap")).map_err(|e| headblend::Error::io(&dir, e))?;
    bytes.truncate(1000);
    match parse_features(&bytes) {
        Ok(_) => unreachable!("truncated file parsed"),
        Err(e) => println!("truncated file: {e}"),
    }

    let inputs = PairInputs {
        animated: a.image,
        animated_labels: a.labels,
        target: t.image,
        target_labels: t.labels,
    };
    let source = FeatureSource::Files {
        animated: dir.join("animated.fmap"),
        target: dir.join("target.fmap"),
    };
    let from_files = swap(&inputs, &source, &BlenderConfig::default())?;
    let direct = swap(&inputs, &FeatureSource::Pyramid, &BlenderConfig::default())?;
    // The pipeline extracts animated features from the head pasted over the
    // target background, so raw-image files give a (slightly) different blend.
    let differing = (0..96 * 96)
        .filter(|&i| from_files.blended.get(i) != direct.blended.get(i))
        .count();
    println!("source {source}: {differing} pixels differ from the built-in extractor");
    Ok(())
}
