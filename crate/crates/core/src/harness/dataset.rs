use std::path::Path;

use crate::error::{Error, Result};
use crate::harness::idx::{self, IdxImages};
use crate::tensor::SeededRng;

/// Row-major `n × d` features, optionally labelled.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<f64>,
    dim: usize,
    labels: Option<Vec<u8>>,
    num_classes: Option<usize>,
}

impl Dataset {
    pub fn new(features: Vec<f64>, dim: usize, labels: Option<Vec<u8>>, num_classes: Option<usize>) -> Result<Self> {
        if dim == 0 || features.len() % dim != 0 {
            return Err(Error::invalid(
                "features",
                format!("length {} is not a multiple of dim {dim}", features.len()),
            ));
        }
        let n = features.len() / dim;
        if let Some(labels) = &labels {
            if labels.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    actual: labels.len(),
                });
            }
            let classes = num_classes.ok_or_else(|| Error::invalid("num_classes", "required with labels"))?;
            if let Some(&bad) = labels.iter().find(|&&l| l as usize >= classes) {
                return Err(Error::invalid(
                    "labels",
                    format!("label {bad} outside [0, {classes})"),
                ));
            }
        }
        Ok(Self {
            features,
            dim,
            labels,
            num_classes,
        })
    }

    /// Pixels scaled by `1/255`, labels in `[0, 10)`.
    pub fn from_idx(images: &IdxImages, labels: Option<Vec<u8>>) -> Result<Self> {
        let features = images.pixels.iter().map(|&p| p as f64 / 255.0).collect();
        let classes = labels.as_ref().map(|_| 10);
        Self::new(features, images.pixels_per_image(), labels, classes)
    }

    pub fn len(&self) -> usize {
        self.features.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.dim..(i + 1) * self.dim]
    }

    pub fn label(&self, i: usize) -> Option<u8> {
        self.labels.as_ref().map(|l| l[i])
    }

    pub fn labels(&self) -> Option<&[u8]> {
        self.labels.as_deref()
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.num_classes
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// The listed rows, in order.
    pub fn select(&self, rows: &[usize]) -> Result<Self> {
        let mut features = Vec::with_capacity(rows.len() * self.dim);
        for &i in rows {
            if i >= self.len() {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    len: self.len(),
                });
            }
            features.extend_from_slice(self.row(i));
        }
        let labels = self.labels.as_ref().map(|l| rows.iter().map(|&i| l[i]).collect());
        Self::new(features, self.dim, labels, self.num_classes)
    }

    /// The first `limit` rows of a seeded shuffle; the whole set, unshuffled,
    /// when `limit` is `None` or not smaller than the set.
    pub fn limit(&self, limit: Option<usize>, seed: u64) -> Result<Self> {
        match limit {
            Some(k) if k < self.len() => {
                let mut order: Vec<usize> = (0..self.len()).collect();
                SeededRng::new(seed).shuffle(&mut order);
                order.truncate(k);
                self.select(&order)
            }
            _ => Ok(self.clone()),
        }
    }
}

/// Train and test splits read from the standard four MNIST IDX files.
pub fn load_mnist(dir: impl AsRef<Path>, limit: Option<usize>, seed: u64) -> Result<(Dataset, Dataset)> {
    let dir = dir.as_ref();
    let split = |images: &str, labels: &str| -> Result<Dataset> {
        let imgs = idx::read_images(dir.join(images))?;
        let labels = idx::read_labels(dir.join(labels))?;
        if labels.len() != imgs.n {
            return Err(Error::DimensionMismatch {
                expected: imgs.n,
                actual: labels.len(),
            });
        }
        Dataset::from_idx(&imgs, Some(labels))?.limit(limit, seed)
    };
    Ok((
        split("train-images-idx3-ubyte", "train-labels-idx1-ubyte")?,
        split("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte")?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Dataset::new(vec![0.0; 5], 2, None, None).is_err());
        assert!(Dataset::new(vec![0.0; 4], 2, Some(vec![0]), Some(2)).is_err());
        assert!(Dataset::new(vec![0.0; 4], 2, Some(vec![0, 2]), Some(2)).is_err());
        assert!(Dataset::new(vec![0.0; 4], 2, Some(vec![0, 1]), None).is_err());
        let d = Dataset::new(vec![1.0, 2.0, 3.0, 4.0], 2, Some(vec![0, 1]), Some(2)).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.row(1), &[3.0, 4.0]);
        assert_eq!(d.label(1), Some(1));
    }

    #[test]
    fn limit_is_seeded_prefix() {
        let d = Dataset::new((0..20).map(f64::from).collect(), 1, None, None).unwrap();
        let a = d.limit(Some(5), 3).unwrap();
        let b = d.limit(Some(5), 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        assert_ne!(a, d.limit(Some(5), 4).unwrap());
        assert_eq!(d.limit(Some(50), 3).unwrap(), d);
    }

    #[test]
    fn bundled_subset_loads() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/mnist-subset");
        let (train, test) = load_mnist(&dir, None, 0).unwrap();
        assert_eq!((train.len(), test.len(), train.dim()), (1000, 500, 784));
        assert!(train.features().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let (small, _) = load_mnist(&dir, Some(100), 1).unwrap();
        assert_eq!(small.len(), 100);
    }
}
