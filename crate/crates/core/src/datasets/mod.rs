//! Labelled datasets: synthetic Gaussian blobs, IDX ingestion and
//! neighbouring-dataset pairs.

mod idx;
mod synth;

pub use idx::{
    encode_idx_images, encode_idx_labels, parse_idx_images, parse_idx_labels, read_idx,
    read_idx_unstandardized, IdxImages, Standardizer, IMAGE_MAGIC, LABEL_MAGIC,
};
pub use synth::{blob_centers, sample_blob, synth_blobs};

use crate::error::{Error, Result};

/// One labelled example.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub features: Vec<f64>,
    pub label: usize,
}

/// `n ≥ 1` samples of a common feature dimension, labels in `0..num_classes`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    labels: Vec<usize>,
    dim: usize,
    num_classes: usize,
}

impl Dataset {
    pub fn from_flat(dim: usize, features: Vec<f64>, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::domain("dataset must contain at least one sample"));
        }
        if dim == 0 {
            return Err(Error::domain("feature dimension must be at least 1"));
        }
        if features.len() != dim * labels.len() {
            return Err(Error::domain(format!(
                "{} feature values do not form {} rows of dimension {dim}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::domain(format!(
                "label {bad} out of range for {num_classes} classes"
            )));
        }
        if let Some(i) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("feature value {i} is {}", features[i])));
        }
        Ok(Self {
            features,
            labels,
            dim,
            num_classes,
        })
    }

    pub fn from_samples(samples: &[Sample], num_classes: usize) -> Result<Self> {
        let dim = samples.first().map_or(0, |s| s.features.len());
        if let Some(s) = samples.iter().find(|s| s.features.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.features.len(),
            });
        }
        let features = samples.iter().flat_map(|s| s.features.iter().copied()).collect();
        let labels = samples.iter().map(|s| s.label).collect();
        Self::from_flat(dim, features, labels, num_classes)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn flat_features(&self) -> &[f64] {
        &self.features
    }

    pub(crate) fn flat_features_mut(&mut self) -> &mut [f64] {
        &mut self.features
    }

    pub fn sample(&self, i: usize) -> Sample {
        Sample {
            features: self.features(i).to_vec(),
            label: self.label(i),
        }
    }

    /// The first `n` samples (all of them if `n ≥ len`).
    pub fn head(&self, n: usize) -> Result<Self> {
        let n = n.min(self.len());
        Self::from_flat(
            self.dim,
            self.features[..n * self.dim].to_vec(),
            self.labels[..n].to_vec(),
            self.num_classes,
        )
    }

    /// `(first n, rest)`. Both parts must be non-empty.
    pub fn split_at(&self, n: usize) -> Result<(Self, Self)> {
        if n == 0 || n >= self.len() {
            return Err(Error::domain(format!("cannot split {} samples at {n}", self.len())));
        }
        let cut = n * self.dim;
        let part = |f: &[f64], l: &[usize]| Self::from_flat(self.dim, f.to_vec(), l.to_vec(), self.num_classes);
        Ok((
            part(&self.features[..cut], &self.labels[..n])?,
            part(&self.features[cut..], &self.labels[n..])?,
        ))
    }

    /// Keeps samples labelled `negative` or `positive`, relabelled 0 and 1.
    pub fn binary_subset(&self, negative: usize, positive: usize) -> Result<Self> {
        let mut features = Vec::new();
        let mut labels = Vec::new();
        for i in 0..self.len() {
            let l = self.label(i);
            if l == negative || l == positive {
                features.extend_from_slice(self.features(i));
                labels.push(usize::from(l == positive));
            }
        }
        Self::from_flat(self.dim, features, labels, 2)
    }

    /// Largest feature-vector norm, used for analytic gradient bounds.
    pub fn max_feature_norm(&self) -> f64 {
        (0..self.len())
            .map(|i| crate::numerics::norm(self.features(i)))
            .fold(0.0, f64::max)
    }
}

/// Two datasets that agree everywhere except possibly at `index`.
#[derive(Debug, Clone)]
pub struct NeighborPair {
    pub base: Dataset,
    pub variant: Dataset,
    pub index: usize,
    /// Set when the replacement equals the original sample.
    pub identical: bool,
}

/// Replaces sample `index` of `base` with `replacement`.
pub fn make_neighbor(base: &Dataset, index: usize, replacement: Sample) -> Result<NeighborPair> {
    if index >= base.len() {
        return Err(Error::domain(format!(
            "neighbor index {index} out of range for {} samples",
            base.len()
        )));
    }
    if replacement.features.len() != base.dim() {
        return Err(Error::DimensionMismatch {
            expected: base.dim(),
            found: replacement.features.len(),
        });
    }
    if replacement.label >= base.num_classes() {
        return Err(Error::domain(format!(
            "replacement label {} out of range for {} classes",
            replacement.label,
            base.num_classes()
        )));
    }
    let identical = base.sample(index) == replacement;
    let mut variant = base.clone();
    let d = base.dim();
    variant.features[index * d..(index + 1) * d].copy_from_slice(&replacement.features);
    variant.labels[index] = replacement.label;
    Ok(NeighborPair {
        base: base.clone(),
        variant,
        index,
        identical,
    })
}
