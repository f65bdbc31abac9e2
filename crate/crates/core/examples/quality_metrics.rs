//! PSNR, SSIM and masked L1 on a few easy-to-reason-about cases.

use headblend::metrics::{l1_masked, psnr, ssim, to_gray};
use headblend::{synth, BinaryMask, RgbImage};

fn main() -> headblend::Result<()> {
    let p = synth::portrait(128, 3)?;
    let shifted = RgbImage::from_fn(128, 128, |x, y| p.image.get_xy(x, y).map(|v| v.saturating_add(1)))?;
    let noisy = RgbImage::from_fn(128, 128, |x, y| {
        let n = ((x * 7 + y * 13) % 9) as i32 - 4;
        p.image.get_xy(x, y).map(|v| (v as i32 + n).clamp(0, 255) as u8)
    })?;
    let head = p.labels.mask_of(&headblend::types::HEAD_LABELS);
    let everything = BinaryMask::full(128, 128)?;

    println!("{:<14} {:>9} {:>9} {:>9}", "vs original", "psnr_dB", "ssim", "l1");
    for (name, img) in [("identical", &p.image), ("+1 offset", &shifted), ("±4 noise", &noisy)] {
        println!(
            "{name:<14} {:>9.3} {:>9.5} {:>9.5}",
            psnr(img, &p.image, None)?,
            ssim(&to_gray(img), &to_gray(&p.image))?,
            l1_masked(img, &p.image, &everything)?
        );
    }
    println!("head-only PSNR of the noisy copy: {:.3} dB", psnr(&noisy, &p.image, Some(&head))?);
    Ok(())
}
