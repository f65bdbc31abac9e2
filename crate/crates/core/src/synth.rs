//! Procedural portraits with exact label maps.
//!
//! Used by the examples, the tests and the `synth` CLI command when no parsed
//! photographs are at hand. Each portrait has a textured background, body,
//! neck, a shaded face with brows, eyes, nose and lips (optionally teeth),
//! and hair, and the label map matches the drawing pixel for pixel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::types::{LabelMap, RgbImage};

#[derive(Clone, Debug)]
pub struct Portrait {
    pub image: RgbImage,
    pub labels: LabelMap,
}

struct Ellipse {
    cx: f64,
    cy: f64,
    rx: f64,
    ry: f64,
}

impl Ellipse {
    fn value(&self, x: f64, y: f64) -> f64 {
        ((x - self.cx) / self.rx).powi(2) + ((y - self.cy) / self.ry).powi(2)
    }

    fn contains(&self, x: f64, y: f64) -> bool {
        self.value(x, y) <= 1.0
    }
}

fn jitter(rng: &mut ChaCha8Rng, base: [u8; 3], spread: i32) -> [u8; 3] {
    base.map(|c| (c as i32 + rng.gen_range(-spread..=spread)).clamp(0, 255) as u8)
}

fn shade(c: [u8; 3], factor: f64, noise: f64) -> [u8; 3] {
    c.map(|v| (v as f64 * factor + noise).round().clamp(0.0, 255.0) as u8)
}

/// Square `size`×`size` portrait; `seed` varies pose, proportions and colors.
pub fn portrait(size: usize, seed: u64) -> Result<Portrait> {
    if size < 32 {
        return Err(Error::invalid("synthetic portraits need at least 32 px"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = size as f64;
    let cx = s * (0.5 + rng.gen_range(-0.04..0.04));
    let cy = s * (0.42 + rng.gen_range(-0.03..0.03));
    let rx = s * rng.gen_range(0.17..0.21);
    let ry = rx * rng.gen_range(1.2..1.38);
    let face = Ellipse { cx, cy, rx, ry };
    let hair = Ellipse {
        cx,
        cy: cy - 0.08 * ry,
        rx: rx * rng.gen_range(1.08..1.2),
        ry: ry * rng.gen_range(1.05..1.15),
    };
    let hairline = cy - rng.gen_range(0.35..0.55) * ry;
    let eye_dx = 0.42 * rx;
    let eye_y = cy - 0.12 * ry;
    let eyes = [-1.0, 1.0].map(|side| Ellipse {
        cx: cx + side * eye_dx,
        cy: eye_y,
        rx: 0.2 * rx,
        ry: 0.075 * ry,
    });
    let brows = [-1.0, 1.0].map(|side| Ellipse {
        cx: cx + side * eye_dx,
        cy: eye_y - 0.16 * ry,
        rx: 0.24 * rx,
        ry: 0.035 * ry,
    });
    let nose = Ellipse {
        cx,
        cy: cy + 0.14 * ry,
        rx: 0.12 * rx,
        ry: 0.2 * ry,
    };
    let mouth_y = cy + 0.5 * ry;
    let mouth = Ellipse {
        cx,
        cy: mouth_y,
        rx: 0.34 * rx,
        ry: 0.1 * ry,
    };
    let teeth_gap = if rng.gen_bool(0.5) { 0.035 * ry } else { 0.0 };
    let neck_half = rx * 0.45;
    let shoulder_y = cy + ry * 1.35;

    let skin = jitter(&mut rng, [200, 150, 120], 40);
    let hair_c = jitter(&mut rng, [70, 45, 30], 30);
    let shirt = [rng.gen(), rng.gen(), rng.gen()];
    let bg_a = [rng.gen_range(40..220), rng.gen_range(40..220), rng.gen_range(40..220)];
    let bg_b = [rng.gen_range(40..220), rng.gen_range(40..220), rng.gen_range(40..220)];
    let lip_c = jitter(&mut rng, [170, 70, 80], 20);
    let eye_c = jitter(&mut rng, [60, 80, 110], 30);
    let brow_c = shade(hair_c, 0.8, 0.0);
    let freq = rng.gen_range(3.0..9.0);

    let mut image = RgbImage::new(size, size)?;
    let mut labels = vec![0u8; size * size];
    for yi in 0..size {
        for xi in 0..size {
            let (x, y) = (xi as f64 + 0.5, yi as f64 + 0.5);
            let noise = rng.gen_range(-5.0..5.0);
            let t = y / s;
            let wave = 12.0 * (freq * x / s * std::f64::consts::TAU).sin() * (y / s * 5.0).cos();
            let mut color: [u8; 3] =
                std::array::from_fn(|k| (bg_a[k] as f64 * (1.0 - t) + bg_b[k] as f64 * t + wave + noise).clamp(0.0, 255.0) as u8);
            let mut label = 0u8;

            let shoulder_half = neck_half + (y - shoulder_y).max(0.0) * 2.2;
            if y >= shoulder_y && (x - cx).abs() <= shoulder_half {
                label = 12;
                color = shade(shirt, 0.85 + 0.15 * (1.0 - (x - cx).abs() / shoulder_half), noise);
            } else if y >= cy && y < shoulder_y && (x - cx).abs() <= neck_half {
                label = 11;
                color = shade(skin, 0.8, noise);
            }

            let in_face = face.contains(x, y);
            if in_face {
                label = 1;
                let light = 1.05 - 0.3 * face.value(x, y) - 0.05 * (y - cy) / ry;
                color = shade(skin, light, noise);
            }
            if hair.contains(x, y) && (!in_face || y < hairline) {
                label = 10;
                let strand = 10.0 * ((x - cx) * 0.9 + (y * 0.3)).sin();
                color = shade(hair_c, 1.0, noise + strand);
            }
            if in_face && y >= hairline {
                for (k, brow) in brows.iter().enumerate() {
                    if brow.contains(x, y) {
                        label = 2 + k as u8;
                        color = shade(brow_c, 1.0, noise);
                    }
                }
                for (k, eye) in eyes.iter().enumerate() {
                    if eye.contains(x, y) {
                        label = 4 + k as u8;
                        let pupil = ((x - eye.cx) / eye.rx).abs() < 0.35;
                        color = if pupil {
                            shade(eye_c, 0.6, noise)
                        } else {
                            shade([235, 235, 230], 1.0, noise)
                        };
                    }
                }
                if nose.contains(x, y) {
                    label = 6;
                    color = shade(skin, 0.9 - 0.15 * (x - cx) / nose.rx, noise);
                }
                if mouth.contains(x, y) {
                    let d = y - mouth_y;
                    if teeth_gap > 0.0 && d.abs() <= teeth_gap {
                        label = 9;
                        color = shade([240, 238, 225], 1.0, noise);
                    } else if d < 0.0 {
                        label = 7;
                        color = shade(lip_c, 0.9, noise);
                    } else {
                        label = 8;
                        color = shade(lip_c, 1.05, noise);
                    }
                }
            }
            let i = yi * size + xi;
            labels[i] = label;
            image.set(i, color);
        }
    }
    Ok(Portrait {
        image,
        labels: LabelMap::new(size, size, labels)?,
    })
}
