use super::block::Affinity;
use super::warp::{check_tau, softmax_in_place};
use crate::error::Result;
use crate::types::GrayImage;

/// Total softmax weight each animated pixel receives from the block's target
/// pixels, laid out over the animated frame. Pixels outside the block are 0.
pub fn accumulated_attention_values<A: Affinity + ?Sized>(block: &A, tau: f64) -> Result<Vec<f64>> {
    check_tau(tau)?;
    let (w, h) = block.rows().dims();
    let mut out = vec![0.0; w * h];
    let n = block.cols().len();
    if n == 0 {
        return Ok(out);
    }
    let mut buf = vec![0.0; n];
    for (i, &u) in block.rows().indices().iter().enumerate() {
        block.row_into(i, &mut buf);
        let sum = softmax_in_place(&mut buf, tau);
        out[u as usize] = buf.iter().map(|w| w / sum).sum();
    }
    Ok(out)
}

/// [`accumulated_attention_values`] rendered as 8-bit gray, 1.0 ↦ 255.
pub fn accumulated_attention<A: Affinity + ?Sized>(block: &A, tau: f64) -> Result<GrayImage> {
    let (w, h) = block.rows().dims();
    let values = accumulated_attention_values(block, tau)?;
    GrayImage::from_raw(
        w,
        h,
        values
            .iter()
            .map(|v| (v * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::block::region_correlation;
    use crate::features::{centralize, FeatureMap};
    use crate::types::{Region, RegionIndex};

    #[test]
    fn lights_only_the_region() {
        let values: Vec<f32> = (0..12 * 3).map(|i| ((i * 13) % 7) as f32).collect();
        let f = centralize(&FeatureMap::new(4, 3, 3, values).unwrap());
        let rows = RegionIndex::new(Region::Eye, 4, 3, vec![1, 2, 5]).unwrap();
        let cols = RegionIndex::new(Region::Eye, 4, 3, vec![0, 6, 7, 11]).unwrap();
        let block = region_correlation(&f, &f, &rows, &cols, 1e-8).unwrap();
        let img = accumulated_attention(&block, 0.01).unwrap();
        for i in 0..12 {
            let expected = if [1, 2, 5].contains(&i) { 255 } else { 0 };
            assert_eq!(img.get(i), expected);
        }
        let empty = RegionIndex::new(Region::Eye, 4, 3, vec![]).unwrap();
        let block = region_correlation(&f, &f, &rows, &empty, 1e-8).unwrap();
        assert!(accumulated_attention(&block, 0.01).unwrap().as_raw().iter().all(|&v| v == 0));
    }
}
