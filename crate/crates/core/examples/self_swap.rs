//! Swap a portrait onto itself and measure how faithfully the frame comes back.
//!
//! With the animated portrait equal to the target, every stage should be
//! close to the identity: the correspondence matches each pixel to itself,
//! the recolored head keeps its colors up to YCbCr rounding, and everything
//! outside the dilated head union is copied from the target untouched.
//!
//! ```bash
//! cargo run --release --example self_swap -- 256 5
//! ```

use std::time::Instant;

use headblend::metrics::{psnr, ssim, to_gray};
use headblend::pipeline::{swap, FeatureSource, PairInputs};
use headblend::{synth, BlenderConfig};

fn main() -> headblend::Result<()> {
    let mut args = std::env::args().skip(1);
    let size: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(256);
    let count: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);
    let config = BlenderConfig::default();

    println!("{:>4} {:>9} {:>8} {:>10} {:>8}", "seed", "psnr_dB", "ssim", "outside_eq", "ms");
    for seed in 0..count {
        let p = synth::portrait(size, seed)?;
        let inputs = PairInputs {
            animated: p.image.clone(),
            animated_labels: p.labels.clone(),
            target: p.image.clone(),
            target_labels: p.labels,
        };
        let start = Instant::now();
        let out = swap(&inputs, &FeatureSource::Pyramid, &config)?;
        let ms = start.elapsed().as_secs_f64() * 1e3;

        let outside_equal = (0..p.image.pixel_count())
            .filter(|&i| !out.pre.dilated_union.get(i))
            .all(|i| out.blended.get(i) == p.image.get(i));
        println!(
            "{seed:>4} {:>9.3} {:>8.5} {:>10} {:>8.1}",
            psnr(&out.blended, &p.image, None)?,
            ssim(&to_gray(&out.blended), &to_gray(&p.image))?,
            outside_equal,
            ms
        );
    }
    Ok(())
}
