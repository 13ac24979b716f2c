//! File formats: PNG images, binary PGM masks and label maps, homography JSON.

use std::fs;
use std::io::Write;
use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::alignment::Homography;
use crate::error::{Error, Result};
use crate::imaging::{BinaryMask, Dims, GrayImage, Image, SoftMask};
use crate::seams::{Label, LabelMap};

/// Mask pixels at or above this 8-bit value read as 1.
pub const MASK_THRESHOLD: u8 = 128;

fn open(path: &Path) -> Result<DynamicImage> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let reader = ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    Ok(reader.decode()?)
}

/// Reads an RGB image; 8-bit samples are divided by 255, 16-bit by 65535.
/// Alpha, if present, is dropped.
pub fn read_image(path: impl AsRef<Path>) -> Result<Image> {
    let img = open(path.as_ref())?;
    let dims = Dims::new(img.height() as usize, img.width() as usize);
    let data: Vec<f64> = if img.color().bytes_per_pixel() / img.color().channel_count() > 1 {
        img.to_rgb16()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 65535.0)
            .collect()
    } else {
        img.to_rgb8()
            .into_raw()
            .into_iter()
            .map(|v| f64::from(v) / 255.0)
            .collect()
    };
    Image::new(dims, data)
}

fn to_u8(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes an 8-bit RGB PNG.
pub fn write_image(path: impl AsRef<Path>, img: &Image) -> Result<()> {
    let buf: Vec<u8> = img.data().iter().map(|&v| to_u8(v)).collect();
    let out = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, buf)
        .expect("buffer length matches dimensions");
    out.save(path.as_ref())?;
    Ok(())
}

/// Reads a single-channel PGM or PNG as 8-bit levels.
pub fn read_gray_levels(path: impl AsRef<Path>) -> Result<(Dims, Vec<u8>)> {
    let path = path.as_ref();
    let img = open(path)?;
    let channels = img.color().channel_count();
    if channels != 1 {
        return Err(Error::MultiChannel {
            path: path.to_path_buf(),
            channels,
        });
    }
    let dims = Dims::new(img.height() as usize, img.width() as usize);
    Ok((dims, img.to_luma8().into_raw()))
}

/// Reads a mask, thresholding at [`MASK_THRESHOLD`].
pub fn read_mask(path: impl AsRef<Path>) -> Result<BinaryMask> {
    let (dims, levels) = read_gray_levels(path)?;
    BinaryMask::new(
        dims,
        levels.into_iter().map(|v| u8::from(v >= MASK_THRESHOLD)).collect(),
    )
}

/// Reads a single-channel image as intensities in `[0, 1]`.
pub fn read_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let (dims, levels) = read_gray_levels(path)?;
    GrayImage::new(dims, levels.into_iter().map(|v| f64::from(v) / 255.0).collect())
}

/// Binary PGM (P5), maxval 255.
pub fn write_pgm(path: impl AsRef<Path>, dims: Dims, levels: &[u8]) -> Result<()> {
    assert_eq!(levels.len(), dims.len());
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write!(f, "P5\n{} {}\n255\n", dims.width, dims.height).map_err(|e| Error::io(path, e))?;
    f.write_all(levels).map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn write_mask(path: impl AsRef<Path>, m: &BinaryMask) -> Result<()> {
    let levels: Vec<u8> = m.data().iter().map(|&v| v * 255).collect();
    write_pgm(path, m.dims(), &levels)
}

pub fn write_soft_mask(path: impl AsRef<Path>, m: &SoftMask) -> Result<()> {
    let levels: Vec<u8> = m.data().iter().map(|&v| to_u8(v)).collect();
    write_pgm(path, m.dims(), &levels)
}

/// Level used for each label when a label map is exported as PGM.
pub fn label_level(l: Label) -> u8 {
    match l {
        Label::Target => 255,
        Label::Reference => 0,
        Label::Invalid => 128,
    }
}

pub fn write_label_map(path: impl AsRef<Path>, labels: &LabelMap) -> Result<()> {
    let levels: Vec<u8> = labels.data().iter().map(|&l| label_level(l)).collect();
    write_pgm(path, labels.dims(), &levels)
}

pub fn read_label_map(path: impl AsRef<Path>) -> Result<LabelMap> {
    let (dims, levels) = read_gray_levels(path)?;
    let data = levels
        .into_iter()
        .map(|v| match v {
            255 => Ok(Label::Target),
            0 => Ok(Label::Reference),
            128 => Ok(Label::Invalid),
            other => Err(Error::InvalidValue(format!("label level {other}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    LabelMap::new(dims, data)
}

/// Homography as a JSON array of nine numbers, row-major.
pub fn read_homography(path: impl AsRef<Path>) -> Result<Homography> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_homography(&text)
}

pub fn parse_homography(text: &str) -> Result<Homography> {
    let v: Vec<f64> = serde_json::from_str(text)?;
    let arr: [f64; 9] = v
        .try_into()
        .map_err(|v: Vec<f64>| Error::InvalidValue(format!("homography needs 9 numbers, got {}", v.len())))?;
    Homography::from_row_major(arr)
}

pub fn write_homography(path: impl AsRef<Path>, h: &Homography) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(&h.to_row_major())?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: serde::Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a JSON configuration file. Missing or malformed files are
/// configuration errors.
pub fn read_config<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}
