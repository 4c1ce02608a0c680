//! IDX binary files (the MNIST distribution format).
//!
//! Headers are big-endian `u32`s. Images: magic `0x00000803`, count, rows,
//! cols, then `count * rows * cols` unsigned bytes. Labels: magic
//! `0x00000801`, count, then `count` bytes.

use std::path::Path;

use crate::error::{Error, IdxError, Result};

use super::Dataset;

pub const IMAGE_MAGIC: u32 = 0x0000_0803;
pub const LABEL_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    /// `count * rows * cols` pixels, image-major.
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        self.pixels.len().checked_div(self.rows * self.cols).unwrap_or(0)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], IdxError> {
        let end = self.pos.checked_add(n).ok_or(IdxError::Truncated {
            needed: usize::MAX,
            available: self.bytes.len(),
        })?;
        if end > self.bytes.len() {
            return Err(IdxError::Truncated {
                needed: end,
                available: self.bytes.len(),
            });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, IdxError> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn magic(&mut self, expected: u32) -> Result<(), IdxError> {
        let found = self.u32()?;
        if found != expected {
            return Err(IdxError::WrongMagic { expected, found });
        }
        Ok(())
    }

    fn finish(&self) -> Result<(), IdxError> {
        match self.bytes.len() - self.pos {
            0 => Ok(()),
            extra => Err(IdxError::TrailingBytes(extra)),
        }
    }
}

pub fn parse_idx_images(bytes: &[u8]) -> Result<IdxImages, IdxError> {
    let mut cur = Cursor { bytes, pos: 0 };
    cur.magic(IMAGE_MAGIC)?;
    let count = cur.u32()? as usize;
    let rows = cur.u32()? as usize;
    let cols = cur.u32()? as usize;
    let len = count
        .checked_mul(rows)
        .and_then(|x| x.checked_mul(cols))
        .ok_or(IdxError::Truncated {
            needed: usize::MAX,
            available: bytes.len(),
        })?;
    let pixels = cur.take(len)?.to_vec();
    cur.finish()?;
    Ok(IdxImages { rows, cols, pixels })
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, IdxError> {
    let mut cur = Cursor { bytes, pos: 0 };
    cur.magic(LABEL_MAGIC)?;
    let count = cur.u32()? as usize;
    let labels = cur.take(count)?.to_vec();
    cur.finish()?;
    Ok(labels)
}

/// # Panics
/// If `images.pixels.len()` is not a multiple of `rows * cols`.
pub fn encode_idx_images(images: &IdxImages) -> Vec<u8> {
    let size = images.rows * images.cols;
    assert!(size > 0 && images.pixels.len().is_multiple_of(size));
    let mut out = Vec::with_capacity(16 + images.pixels.len());
    for word in [IMAGE_MAGIC, images.count() as u32, images.rows as u32, images.cols as u32] {
        out.extend_from_slice(&word.to_be_bytes());
    }
    out.extend_from_slice(&images.pixels);
    out
}

pub fn encode_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads an image/label file pair with pixels scaled to `[0, 1]`.
///
/// `num_classes` is one more than the largest label present.
pub fn read_idx_unstandardized(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let idx_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Idx { path, source }
    };
    let images = parse_idx_images(&read_file(images_path)?).map_err(idx_err(images_path))?;
    let labels = parse_idx_labels(&read_file(labels_path)?).map_err(idx_err(labels_path))?;
    if images.count() != labels.len() {
        return Err(Error::Idx {
            path: labels_path.to_path_buf(),
            source: IdxError::CountMismatch {
                images: images.count(),
                labels: labels.len(),
            },
        });
    }
    if labels.is_empty() || images.rows * images.cols == 0 {
        return Err(Error::Idx {
            path: images_path.to_path_buf(),
            source: IdxError::Empty,
        });
    }
    let features = images.pixels.iter().map(|&p| f64::from(p) / 255.0).collect();
    let num_classes = usize::from(*labels.iter().max().expect("non-empty")) + 1;
    Dataset::from_flat(
        images.rows * images.cols,
        features,
        labels.into_iter().map(usize::from).collect(),
        num_classes,
    )
}

/// [`read_idx_unstandardized`] followed by z-scoring with the file's own
/// global pixel mean and standard deviation.
pub fn read_idx(images_path: &Path, labels_path: &Path) -> Result<Dataset> {
    let mut data = read_idx_unstandardized(images_path, labels_path)?;
    Standardizer::fit(&data).apply(&mut data);
    Ok(data)
}

/// Global (all-pixel) z-scoring. Fit on the training set, then apply to
/// both training and held-out data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Standardizer {
    pub mean: f64,
    pub std: f64,
}

impl Standardizer {
    pub fn fit(data: &Dataset) -> Self {
        let xs = data.flat_features();
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        // constant input: centre only
        let std = if std > 0.0 { std } else { 1.0 };
        Self { mean, std }
    }

    pub fn apply(&self, data: &mut Dataset) {
        for x in data.flat_features_mut() {
            *x = (*x - self.mean) / self.std;
        }
    }
}
