//! Synthetic phantom datasets on disk.

use std::fs;
use std::path::Path;

use duskfcm_core::phantom::{disk_phantom, phantom_set_member, PhantomConfig};

use crate::dataio::{save_mask, save_rgb};
use crate::error::{Error, Result};

pub fn phantom_id(index: usize) -> String {
    format!("phantom_{index:03}")
}

/// Writes `count` members of the phantom set seeded by `base` as
/// `images/phantom_NNN.png` and `masks/phantom_NNN.png` under `root`.
pub fn write_phantom_set(root: &Path, base: &PhantomConfig, first: usize, count: usize) -> Result<()> {
    let (images, masks) = (root.join("images"), root.join("masks"));
    fs::create_dir_all(&images).map_err(Error::io(&images))?;
    fs::create_dir_all(&masks).map_err(Error::io(&masks))?;
    for i in first..first + count {
        let p = disk_phantom(&phantom_set_member(base, i))?;
        let name = format!("{}.png", phantom_id(i));
        save_rgb(&p.image, &images.join(&name))?;
        save_mask(&p.mask, &masks.join(&name))?;
    }
    Ok(())
}
