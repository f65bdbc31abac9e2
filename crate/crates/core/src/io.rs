//! PNG reading and writing for images, masks and label maps.
//!
//! Masks are written as 1-bit grayscale, images as 8-bit gray or RGB. Any
//! PNG the `image` crate decodes can be read back; a mask pixel is set when
//! its gray value is non-zero.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::error::{Error, Result};
use crate::types::{BinaryMask, GrayImage, LabelMap, RgbImage};

fn open(path: &Path) -> Result<DynamicImage> {
    let reader = ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    reader.decode().map_err(|e| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn read_rgb(path: impl AsRef<Path>) -> Result<RgbImage> {
    let path = path.as_ref();
    let img = open(path)?.to_rgb8();
    let (w, h) = img.dimensions();
    RgbImage::from_raw(w as usize, h as usize, img.into_raw())
}

pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let img = open(path)?.to_luma8();
    let (w, h) = img.dimensions();
    GrayImage::from_raw(w as usize, h as usize, img.into_raw())
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let gray = read_gray(path)?;
    let (w, h) = gray.dims();
    BinaryMask::from_bits(w, h, gray.as_raw().iter().map(|&v| v != 0).collect())
}

/// Reads an 8-bit grayscale PNG whose pixel values are label ids.
pub fn read_labels(path: impl AsRef<Path>) -> Result<LabelMap> {
    let path = path.as_ref();
    let img = match open(path)? {
        DynamicImage::ImageLuma8(img) => img,
        other => {
            return Err(Error::Image {
                path: path.to_path_buf(),
                message: format!(
                    "label map must be an 8-bit grayscale PNG, got {:?}",
                    other.color()
                ),
            })
        }
    };
    let (w, h) = img.dimensions();
    LabelMap::new(w as usize, h as usize, img.into_raw())
        .map_err(|e| e.context(path.display().to_string()))
}

fn write_png(
    path: &Path,
    width: usize,
    height: usize,
    color: png::ColorType,
    depth: png::BitDepth,
    data: &[u8],
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut encoder = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    encoder.set_color(color);
    encoder.set_depth(depth);
    let encode_err = |e: png::EncodingError| Error::Image {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let mut writer = encoder.write_header().map_err(encode_err)?;
    writer.write_image_data(data).map_err(encode_err)?;
    writer.finish().map_err(encode_err)
}

pub fn write_rgb(image: &RgbImage, path: impl AsRef<Path>) -> Result<()> {
    write_png(
        path.as_ref(),
        image.width(),
        image.height(),
        png::ColorType::Rgb,
        png::BitDepth::Eight,
        image.as_raw(),
    )
}

pub fn write_gray(image: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    write_png(
        path.as_ref(),
        image.width(),
        image.height(),
        png::ColorType::Grayscale,
        png::BitDepth::Eight,
        image.as_raw(),
    )
}

pub fn write_labels(labels: &LabelMap, path: impl AsRef<Path>) -> Result<()> {
    write_png(
        path.as_ref(),
        labels.width(),
        labels.height(),
        png::ColorType::Grayscale,
        png::BitDepth::Eight,
        labels.as_raw(),
    )
}

/// Writes a 1-bit grayscale PNG, rows packed most significant bit first.
pub fn write_mask(mask: &BinaryMask, path: impl AsRef<Path>) -> Result<()> {
    let (w, h) = mask.dims();
    let stride = w.div_ceil(8);
    let mut packed = vec![0u8; stride * h];
    for i in mask.indices() {
        let (x, y) = (i % w, i / w);
        packed[y * stride + x / 8] |= 0x80 >> (x % 8);
    }
    write_png(
        path.as_ref(),
        w,
        h,
        png::ColorType::Grayscale,
        png::BitDepth::One,
        &packed,
    )
}
