//! Cycle-consistency of the region correspondence.
//!
//! Colors of the target are warped onto the animated frame and back. For a
//! self pair with sharp attention the round trip returns the target almost
//! exactly; a horizontally flipped copy (a permutation of the same pixels)
//! does too, because every descriptor still has an exact partner. A
//! different portrait shows a real, non-zero loss, and a second target gives
//! the cross-pair loss.

use headblend::correspondence::{
    cross_pair_cycle_loss, cycle_loss, head_region_pairs, Correlator, CycleResult,
};
use headblend::features::{centralize, extract_pyramid_features};
use headblend::{synth, LabelMap, RgbImage};

fn flip(image: &RgbImage) -> RgbImage {
    let w = image.width();
    RgbImage::from_fn(w, image.height(), |x, y| image.get_xy(w - 1 - x, y)).unwrap()
}

fn flip_labels(labels: &LabelMap) -> LabelMap {
    let w = labels.width();
    LabelMap::from_fn(w, labels.height(), |x, y| labels.get(y * w + w - 1 - x)).unwrap()
}

fn show(name: &str, r: &CycleResult) {
    print!("{name:<22} L = {:.3e}  |", r.loss);
    for region in &r.regions {
        match region.loss {
            Some(l) => print!(" {}={l:.1e}", region.region),
            None => print!(" {}=empty", region.region),
        }
    }
    println!();
}

fn main() -> headblend::Result<()> {
    let tau = 1e-6;
    let t = synth::portrait(96, 5)?;
    let features = |img: &RgbImage| extract_pyramid_features(img, 3, 2).map(|f| centralize(&f));

    let ft = features(&t.image)?;
    let pairs = head_region_pairs(&t.labels, &t.labels);
    let corr = Correlator::new(&ft, &ft, 1e-8)?;
    show("self pair", &cycle_loss(&corr, &pairs, &t.image, tau)?);

    let fa = features(&flip(&t.image))?;
    let flipped_labels = flip_labels(&t.labels);
    let corr = Correlator::new(&fa, &ft, 1e-8)?;
    let pairs = head_region_pairs(&flipped_labels, &t.labels);
    show("flipped animated", &cycle_loss(&corr, &pairs, &t.image, tau)?);

    let other = synth::portrait(96, 6)?;
    let fo = features(&other.image)?;
    let corr = Correlator::new(&fo, &ft, 1e-8)?;
    let pairs = head_region_pairs(&other.labels, &t.labels);
    show("other portrait", &cycle_loss(&corr, &pairs, &t.image, 0.01)?);

    // Cross-pair: animated = target geometry, second target = another frame.
    let corr = Correlator::new(&ft, &fo, 1e-8)?;
    let pairs = head_region_pairs(&t.labels, &other.labels);
    show(
        "cross pair (L_c')",
        &cross_pair_cycle_loss(&corr, &pairs, &other.image, &t.image, 0.01)?,
    );
    Ok(())
}
