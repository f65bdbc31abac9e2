//! Classical head compositing: chroma transfer onto the grayscale head,
//! nearest-color hole filling for the inpainting band, and feathered layering
//! over the background.

use std::collections::VecDeque;

use crate::error::Result;
use crate::types::{same_dims, BinaryMask, GrayImage, ReferenceImage, RgbImage};

/// Full-range BT.601 chroma `(Cb, Cr)`.
#[inline]
pub fn chroma(rgb: [u8; 3]) -> (f64, f64) {
    let [r, g, b] = rgb.map(|v| v as f64);
    let cb = 128.0 - 0.168736 * r - 0.331264 * g + 0.5 * b;
    let cr = 128.0 + 0.5 * r - 0.418688 * g - 0.081312 * b;
    (cb, cr)
}

/// Inverse full-range BT.601 transform, rounded and clamped.
#[inline]
pub fn ycbcr_to_rgb(y: f64, cb: f64, cr: f64) -> [u8; 3] {
    let (cb, cr) = (cb - 128.0, cr - 128.0);
    [
        y + 1.402 * cr,
        y - 0.344136 * cb - 0.714136 * cr,
        y + 1.772 * cb,
    ]
    .map(|v| v.round().clamp(0.0, 255.0) as u8)
}

/// Gives each head pixel the reference's chroma and the gray head's luma.
///
/// Chroma is quantized to integers before recombining. Head pixels without a
/// valid reference keep their gray value; pixels outside the head are black.
pub fn recolor_head(
    gray_head: &GrayImage,
    head_reference: &ReferenceImage,
    head: &BinaryMask,
) -> Result<RgbImage> {
    same_dims("recolor: gray head vs reference", gray_head.dims(), head_reference.dims())?;
    same_dims("recolor: gray head vs mask", gray_head.dims(), head.dims())?;
    let (w, h) = gray_head.dims();
    let mut out = RgbImage::new(w, h)?;
    for i in head.indices() {
        let y = gray_head.get(i);
        let rgb = if head_reference.valid.get(i) {
            let (cb, cr) = chroma(head_reference.colors.get(i));
            ycbcr_to_rgb(y as f64, cb.round(), cr.round())
        } else {
            [y; 3]
        };
        out.set(i, rgb);
    }
    Ok(out)
}

/// Fills the inpainting band.
///
/// Band pixels take the reference color where it is valid. Other band pixels
/// copy the Euclidean-nearest pixel that is either a valid band pixel or a
/// background pixel (outside both `band` and `head`), ties going to the lower
/// linear index. Pixels outside the band are black.
pub fn fill_inpainting(
    inpaint_reference: &ReferenceImage,
    band: &BinaryMask,
    head: &BinaryMask,
    background: &RgbImage,
) -> Result<RgbImage> {
    same_dims("fill: reference vs band", inpaint_reference.dims(), band.dims())?;
    same_dims("fill: band vs head", band.dims(), head.dims())?;
    same_dims("fill: band vs background", band.dims(), background.dims())?;
    let (w, h) = band.dims();
    let mut out = RgbImage::new(w, h)?;

    // Candidate color per pixel, if the pixel can donate.
    let donor = |i: usize| -> Option<[u8; 3]> {
        if band.get(i) {
            inpaint_reference
                .valid
                .get(i)
                .then(|| inpaint_reference.colors.get(i))
        } else if head.get(i) {
            None
        } else {
            Some(background.get(i))
        }
    };

    for i in band.indices() {
        if let Some(c) = donor(i).filter(|_| inpaint_reference.valid.get(i)) {
            out.set(i, c);
            continue;
        }
        if let Some(j) = nearest_donor(i, w, h, |j| donor(j).is_some()) {
            out.set(i, donor(j).expect("donor checked"));
        }
    }
    Ok(out)
}

/// Nearest pixel satisfying `is_donor` by Euclidean distance, ties broken by
/// linear index. Searches square rings outward and stops once no farther
/// ring can beat the best hit.
fn nearest_donor(i: usize, w: usize, h: usize, is_donor: impl Fn(usize) -> bool) -> Option<usize> {
    let (x0, y0) = ((i % w) as isize, (i / w) as isize);
    let max_ring = w.max(h) as isize;
    let mut best: Option<(isize, usize)> = None;
    for r in 1..=max_ring {
        // Every pixel on ring r is at least r away.
        if let Some((d2, _)) = best {
            if r * r > d2 {
                break;
            }
        }
        for dy in -r..=r {
            let y = y0 + dy;
            if y < 0 || y >= h as isize {
                continue;
            }
            let step = if dy.abs() == r { 1 } else { 2 * r };
            let mut dx = -r;
            while dx <= r {
                let x = x0 + dx;
                if x >= 0 && x < w as isize {
                    let j = y as usize * w + x as usize;
                    if is_donor(j) {
                        let d2 = dx * dx + dy * dy;
                        if best.is_none_or(|(bd, bj)| (d2, j) < (bd, bj)) {
                            best = Some((d2, j));
                        }
                    }
                }
                dx += step;
            }
        }
    }
    best.map(|(_, j)| j)
}

/// Squared Euclidean distance from each pixel to the nearest pixel with
/// `seed[i] == true` (Felzenszwalb–Huttenlocher). Infinite if there is none.
pub(crate) fn squared_distance(seed: &[bool], w: usize, h: usize) -> Vec<f64> {
    let mut grid: Vec<f64> = seed
        .iter()
        .map(|&s| if s { 0.0 } else { f64::INFINITY })
        .collect();
    let mut f = vec![0.0; w.max(h)];
    let mut d = vec![0.0; w.max(h)];
    for x in 0..w {
        for y in 0..h {
            f[y] = grid[y * w + x];
        }
        distance_1d(&f[..h], &mut d[..h]);
        for y in 0..h {
            grid[y * w + x] = d[y];
        }
    }
    for y in 0..h {
        f[..w].copy_from_slice(&grid[y * w..(y + 1) * w]);
        distance_1d(&f[..w], &mut d[..w]);
        grid[y * w..(y + 1) * w].copy_from_slice(&d[..w]);
    }
    grid
}

fn distance_1d(f: &[f64], d: &mut [f64]) {
    let n = f.len();
    let finite: Vec<usize> = (0..n).filter(|&q| f[q].is_finite()).collect();
    if finite.is_empty() {
        d.fill(f64::INFINITY);
        return;
    }
    // Lower envelope of parabolas rooted at finite samples.
    let mut v = vec![0usize; finite.len()];
    let mut z = vec![0.0f64; finite.len() + 1];
    let mut k = 0;
    v[0] = finite[0];
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let key = |p: usize| f[p] + (p * p) as f64;
    for &q in &finite[1..] {
        let mut s = (key(q) - key(v[k])) / (2.0 * (q - v[k]) as f64);
        while s <= z[k] {
            k -= 1;
            s = (key(q) - key(v[k])) / (2.0 * (q - v[k]) as f64);
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    let mut k = 0;
    for (q, out) in d.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let p = v[k];
        let diff = q as f64 - p as f64;
        *out = diff * diff + f[p];
    }
}

/// Linear ramp inside `mask`: `min(1, distance_to_outside / feather)`, zero
/// outside, 1 everywhere inside when `feather == 0`. The image border does
/// not count as outside.
pub fn feather_alpha(mask: &BinaryMask, feather: usize) -> Vec<f64> {
    let (w, h) = mask.dims();
    if feather == 0 {
        return mask.bits().iter().map(|&b| b as u8 as f64).collect();
    }
    let outside: Vec<bool> = mask.bits().iter().map(|&b| !b).collect();
    let d2 = squared_distance(&outside, w, h);
    mask.bits()
        .iter()
        .zip(d2)
        .map(|(&m, d2)| if m { (d2.sqrt() / feather as f64).min(1.0) } else { 0.0 })
        .collect()
}

/// Extends `image` from the pixels of `source` outward with an 8-connected
/// breadth-first wavefront seeded in index order. Pixels unreachable from
/// any source stay black.
fn extend_colors(image: &RgbImage, source: &[bool]) -> RgbImage {
    let (w, h) = image.dims();
    let mut out = RgbImage::new(w, h).expect("dims preserved");
    let mut seen = vec![false; w * h];
    let mut queue = VecDeque::new();
    for (i, &s) in source.iter().enumerate() {
        if s {
            seen[i] = true;
            out.set(i, image.get(i));
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        let (x, y) = ((i % w) as isize, (i / w) as isize);
        for dy in -1..=1isize {
            for dx in -1..=1isize {
                let (nx, ny) = (x + dx, y + dy);
                if nx < 0 || ny < 0 || nx >= w as isize || ny >= h as isize {
                    continue;
                }
                let j = ny as usize * w + nx as usize;
                if !seen[j] {
                    seen[j] = true;
                    out.set(j, out.get(i));
                    queue.push_back(j);
                }
            }
        }
    }
    out
}

#[inline]
fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    std::array::from_fn(|k| a[k] + (b[k] - a[k]) * t)
}

/// Alpha for a layer whose edge straddles the mask boundary: 1/2 on the
/// boundary, reaching 1 at `feather / 2` pixels inside and 0 at `feather / 2`
/// pixels outside. `feather == 0` gives the plain mask.
pub fn seam_alpha(mask: &BinaryMask, feather: usize) -> Vec<f64> {
    let (w, h) = mask.dims();
    if feather == 0 || mask.is_empty() {
        return mask.bits().iter().map(|&b| b as u8 as f64).collect();
    }
    let outside: Vec<bool> = mask.bits().iter().map(|&b| !b).collect();
    let to_outside = squared_distance(&outside, w, h);
    let to_inside = squared_distance(mask.bits(), w, h);
    mask.bits()
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let signed = if m {
                to_outside[i].sqrt() - 0.5
            } else {
                0.5 - to_inside[i].sqrt()
            };
            (0.5 + signed / feather as f64).clamp(0.0, 1.0)
        })
        .collect()
}

/// Layers `background < band fill < head`.
///
/// The band+head area fades in over `feather` pixels inside its own edge, so
/// nothing outside `head ∪ band` changes. The head's seam with the band is
/// centered on the head edge: the ramp runs `feather / 2` pixels into the
/// head and as far into the band, with head colors continued outward. Under
/// a partially transparent edge the other layers are continued by
/// nearest-color extension. `feather == 0` is a hard paste.
pub fn composite(
    head_colors: &RgbImage,
    band_fill: &RgbImage,
    background: &RgbImage,
    head: &BinaryMask,
    band: &BinaryMask,
    feather: usize,
) -> Result<RgbImage> {
    same_dims("composite: head colors vs background", head_colors.dims(), background.dims())?;
    same_dims("composite: band fill vs background", band_fill.dims(), background.dims())?;
    same_dims("composite: head mask", head.dims(), background.dims())?;
    same_dims("composite: band mask", band.dims(), background.dims())?;
    let (w, h) = background.dims();
    let covered = head.union(band)?;
    let head_alpha = seam_alpha(head, feather);
    let covered_alpha = feather_alpha(&covered, feather);

    let bg_source: Vec<bool> = covered.bits().iter().map(|&b| !b).collect();
    let (bg_ext, fill_ext, head_ext) = if feather == 0 {
        (background.clone(), band_fill.clone(), head_colors.clone())
    } else {
        let bg_ext = extend_colors(background, &bg_source);
        let fill_ext = if band.is_empty() {
            bg_ext.clone()
        } else {
            extend_colors(band_fill, band.bits())
        };
        (bg_ext, fill_ext, extend_colors(head_colors, head.bits()))
    };

    let mut out = RgbImage::new(w, h)?;
    let to_f = |c: [u8; 3]| c.map(|v| v as f64);
    for i in 0..w * h {
        if !covered.get(i) {
            out.set(i, background.get(i));
            continue;
        }
        let lower = lerp(to_f(bg_ext.get(i)), to_f(fill_ext.get(i)), covered_alpha[i]);
        let px = lerp(lower, to_f(head_ext.get(i)), head_alpha[i]);
        out.set(i, px.map(|v| v.round().clamp(0.0, 255.0) as u8));
    }
    Ok(out)
}
