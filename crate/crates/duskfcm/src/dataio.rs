//! Dataset layout and image files.
//!
//! A dataset root holds `images/` and optionally `masks/`; a mask belongs to
//! the image with the same file stem.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use duskfcm_core::{BinaryMask, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const EXTENSIONS: [&str; 3] = ["png", "jpg", "jpeg"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub id: String,
    pub image: PathBuf,
    pub mask: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub root: PathBuf,
    /// Sorted by id.
    pub samples: Vec<SampleRecord>,
}

impl DatasetIndex {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub(crate) fn image_files(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(Error::io(dir))? {
        let path = entry.map_err(Error::io(dir))?.path();
        let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
        if !path.is_file() || !ext.is_some_and(|e| EXTENSIONS.contains(&e.as_str())) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()) else { continue };
        if out.insert(stem.to_owned(), path.clone()).is_some() {
            return Err(Error::DuplicateId(stem.to_owned()));
        }
    }
    Ok(out)
}

pub fn index_dataset(root: &Path) -> Result<DatasetIndex> {
    let images_dir = root.join("images");
    if !images_dir.is_dir() {
        return Err(Error::MissingImagesDir(root.to_path_buf()));
    }
    let images = image_files(&images_dir)?;
    if images.is_empty() {
        return Err(Error::EmptyDataset(root.to_path_buf()));
    }
    let masks_dir = root.join("masks");
    let mut masks = if masks_dir.is_dir() { image_files(&masks_dir)? } else { BTreeMap::new() };
    let samples = images
        .into_iter()
        .map(|(id, image)| {
            let mask = masks.remove(&id);
            SampleRecord { id, image, mask }
        })
        .collect();
    Ok(DatasetIndex { root: root.to_path_buf(), samples })
}

pub fn load_rgb(path: &Path) -> Result<RgbImage> {
    let img = image::open(path).map_err(|source| Error::Image { path: path.to_path_buf(), source })?.into_rgb8();
    let (w, h) = img.dimensions();
    Ok(RgbImage::new(w as usize, h as usize, img.into_raw())?)
}

/// Grayscale-decoded mask; a pixel is lesion when its value exceeds 127.
pub fn load_mask(path: &Path) -> Result<BinaryMask> {
    let img = image::open(path).map_err(|source| Error::Image { path: path.to_path_buf(), source })?.into_luma8();
    let (w, h) = img.dimensions();
    let data = img.into_raw().into_iter().map(|v| v > 127).collect();
    Ok(BinaryMask::new(w as usize, h as usize, data)?)
}

pub fn save_rgb(img: &RgbImage, path: &Path) -> Result<()> {
    let buf = image::RgbImage::from_raw(img.width() as u32, img.height() as u32, img.as_raw().to_vec())
        .expect("buffer length checked by RgbImage");
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|source| Error::Image { path: path.to_path_buf(), source })
}

/// Writes lesion pixels as 255 and background as 0.
pub fn save_mask(mask: &BinaryMask, path: &Path) -> Result<()> {
    let data = mask.as_slice().iter().map(|&b| if b { 255 } else { 0 }).collect();
    let buf = image::GrayImage::from_raw(mask.width() as u32, mask.height() as u32, data)
        .expect("buffer length checked by BinaryMask");
    buf.save_with_format(path, image::ImageFormat::Png).map_err(|source| Error::Image { path: path.to_path_buf(), source })
}
