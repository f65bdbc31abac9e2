//! Accumulated attention per region: every pixel of the region lights up,
//! everything else stays black.

use headblend::correspondence::{accumulated_attention, head_region_pairs, Correlator};
use headblend::features::{centralize, extract_pyramid_features};
use headblend::io::write_gray;
use headblend::synth;

fn main() -> headblend::Result<()> {
    let a = synth::portrait(128, 31)?;
    let t = synth::portrait(128, 32)?;
    let fa = centralize(&extract_pyramid_features(&a.image, 3, 2)?);
    let ft = centralize(&extract_pyramid_features(&t.image, 3, 2)?);
    let corr = Correlator::new(&fa, &ft, 1e-8)?;

    let out = std::path::PathBuf::from("target/attention_maps");
    std::fs::create_dir_all(&out).map_err(|e| headblend::Error::io(&out, e))?;
    for pair in head_region_pairs(&a.labels, &t.labels) {
        let block = corr.streamed(pair.rows.clone(), pair.cols.clone())?;
        let map = accumulated_attention(&block, 0.01)?;
        let lit = map.as_raw().iter().filter(|&&v| v > 0).count();
        let dark_outside = (0..map.as_raw().len())
            .filter(|&i| !pair.rows.to_mask().get(i))
            .all(|i| map.get(i) == 0);
        println!(
            "{:<6} lit {:>5} of {:>5} region px, dark outside: {dark_outside}",
            pair.region().name(),
            lit,
            pair.rows.len()
        );
        write_gray(&map, out.join(format!("{}.png", pair.region().name())))?;
    }
    Ok(())
}
