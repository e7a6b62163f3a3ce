//! Samples, datasets, unit normalization and the synthetic logistic generator.

use alloc::format;
use alloc::vec::Vec;

use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::sampling::RngStream;

/// One labeled example: feature vector `h` and class label `+1` or `-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    features: Vec<f64>,
    label: i8,
}

impl Sample {
    pub fn new(features: Vec<f64>, label: i8) -> Result<Self> {
        if label != 1 && label != -1 {
            return Err(Error::invalid(format!("label must be +1 or -1, got {label}")));
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("non-finite feature value"));
        }
        Ok(Sample { features, label })
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn label(&self) -> i8 {
        self.label
    }

    /// Label as a real number, the `γ` of the loss formulas.
    #[inline]
    pub fn target(&self) -> f64 {
        f64::from(self.label)
    }

    pub fn dim(&self) -> usize {
        self.features.len()
    }
}

/// An ordered, non-empty collection of samples sharing one feature dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    dim: usize,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        let first = samples.first().ok_or_else(|| Error::invalid("no samples"))?;
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::invalid("feature dimension must be at least 1"));
        }
        if let Some(pos) = samples.iter().position(|s| s.dim() != dim) {
            return Err(Error::invalid(format!(
                "sample {pos} has dimension {} but the dataset has {dim}",
                samples[pos].dim()
            )));
        }
        Ok(Dataset { samples, dim })
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Feature dimension `M`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn sample(&self, n: usize) -> &Sample {
        &self.samples[n]
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }
}

/// Divides every feature vector by its Euclidean norm.
pub fn normalize_unit(dataset: &Dataset) -> Result<Dataset> {
    let samples = dataset
        .samples()
        .iter()
        .enumerate()
        .map(|(n, s)| {
            let norm = libm::sqrt(dot(s.features(), s.features()));
            if norm == 0.0 {
                return Err(Error::invalid(format!("sample {n} has a zero feature vector")));
            }
            let features = s.features().iter().map(|v| v / norm).collect();
            Sample::new(features, s.label())
        })
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples)
}

/// Seed of the stream that draws the hidden labeling vector; independent of the data seed.
const HIDDEN_WEIGHT_SEED: u64 = 0x6869_6464_656e_0001;
/// Per-coordinate standard deviation of the hidden labeling vector.
const HIDDEN_WEIGHT_SCALE: f64 = 2.0;

/// The hidden weight vector that [`synth_logistic`] labels against.
pub fn synth_hidden_weights(m: usize) -> Vec<f64> {
    let mut rng = RngStream::new(HIDDEN_WEIGHT_SEED ^ m as u64);
    (0..m)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            HIDDEN_WEIGHT_SCALE * z
        })
        .collect()
}

/// Deterministic synthetic binary classification data.
///
/// Features are standard normal vectors projected onto the unit sphere. The label
/// of `h` is `+1` with probability `sigmoid(hᵀw)` for the hidden vector returned by
/// [`synth_hidden_weights`], otherwise `-1`. Each sample draws `m` normals and then
/// one uniform from the stream seeded by `seed`, in sample order.
pub fn synth_logistic(n: usize, m: usize, seed: u64) -> Result<Dataset> {
    if n == 0 || m == 0 {
        return Err(Error::invalid("synthetic data needs n >= 1 and m >= 1"));
    }
    let hidden = synth_hidden_weights(m);
    let mut rng = RngStream::new(seed);
    let mut samples = Vec::with_capacity(n);
    while samples.len() < n {
        let mut h: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = libm::sqrt(dot(&h, &h));
        let u = rng.next_f64();
        if norm == 0.0 {
            continue;
        }
        h.iter_mut().for_each(|v| *v /= norm);
        let p = crate::model::sigmoid(dot(&h, &hidden));
        let label = if u < p { 1 } else { -1 };
        samples.push(Sample::new(h, label)?);
    }
    Dataset::new(samples)
}
