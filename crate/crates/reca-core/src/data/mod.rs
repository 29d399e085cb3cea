//! Dataset containers, deterministic splits, normalization, and batch order.
//!
//! Two containers cover the two domains the pipeline moves through:
//! [`Dataset`] holds raw 8-bit images as read from disk, [`SampleSet`] holds
//! real-valued inputs ready for the network. Every split and batch order is a
//! pure function of explicit seeds.

pub mod cifar;
pub mod synth;

use crate::element::Element;
use crate::error::{Error, Result};
use crate::rng::{seeded, seeded_stream, shuffled_indices};
use crate::tensor::Tensor;

/// Guard against division by a degenerate per-channel standard deviation.
pub const STD_FLOOR: f64 = 1e-6;

/// Raw 8-bit image dataset in `[N, C, H, W]` storage order.
#[derive(Debug, Clone)]
pub struct Dataset {
    name: String,
    channels: usize,
    height: usize,
    width: usize,
    /// `N * C * H * W` bytes, sample-major.
    pixels: Vec<u8>,
    labels: Vec<u8>,
    class_count: usize,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        channels: usize,
        height: usize,
        width: usize,
        pixels: Vec<u8>,
        labels: Vec<u8>,
        class_count: usize,
    ) -> Result<Self> {
        let sample = channels * height * width;
        if sample == 0 {
            return Err(Error::Shape("dataset images must have nonzero extent".into()));
        }
        if pixels.len() != labels.len() * sample {
            return Err(Error::Shape(format!(
                "{} pixel bytes do not cover {} samples of {} bytes each",
                pixels.len(),
                labels.len(),
                sample
            )));
        }
        if class_count == 0 || class_count > 256 {
            return Err(Error::Config(format!(
                "class count {class_count} outside 1..=256"
            )));
        }
        if let Some(pos) = labels.iter().position(|&l| usize::from(l) >= class_count) {
            return Err(Error::Data(format!(
                "label {} at record {pos} out of range for {class_count} classes",
                labels[pos]
            )));
        }
        Ok(Self { name: name.into(), channels, height, width, pixels, labels, class_count })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Per-sample shape `[C, H, W]`.
    pub fn image_shape(&self) -> [usize; 3] {
        [self.channels, self.height, self.width]
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    fn sample_len(&self) -> usize {
        self.channels * self.height * self.width
    }

    /// New dataset holding the listed samples in the listed order.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Result<Self> {
        let sample = self.sample_len();
        let mut pixels = Vec::with_capacity(indices.len() * sample);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Shape(format!(
                    "sample index {i} out of range for {} samples",
                    self.len()
                )));
            }
            pixels.extend_from_slice(&self.pixels[i * sample..(i + 1) * sample]);
            labels.push(self.labels[i]);
        }
        Self::new(name, self.channels, self.height, self.width, pixels, labels, self.class_count)
    }

    /// Seeded shuffle then prefix/suffix cut; train size is `floor(fraction * N)`.
    pub fn split(&self, spec: &SplitSpec) -> Result<(Self, Self)> {
        let (train_idx, test_idx) = split_indices(self.len(), spec)?;
        let train = self.subset(&train_idx, format!("{}-train", self.name))?;
        let test = self.subset(&test_idx, format!("{}-test", self.name))?;
        Ok((train, test))
    }
}

/// How to cut one dataset into train and test parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self { train_fraction: 0.8, seed: 0 }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction {} outside open interval (0, 1)",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Shuffled index lists for the two sides of a split.
///
/// The shuffle runs on the split seed alone, so the same `(n, spec)` always
/// produces the same cut regardless of caller state.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    spec.validate()?;
    let mut rng = seeded(spec.seed);
    let mut order = shuffled_indices(n, &mut rng);
    let cut = (spec.train_fraction * n as f64).floor() as usize;
    let test = order.split_off(cut);
    Ok((order, test))
}

/// Per-channel statistics of pixel intensities scaled to `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

/// Mean and standard deviation of `x / 255` per channel.
///
/// Constant channels get their deviation floored to [`STD_FLOOR`] so that
/// normalization maps them to exact zeros instead of dividing by zero.
pub fn channel_stats(dataset: &Dataset) -> Result<ChannelStats> {
    if dataset.is_empty() {
        return Err(Error::Domain("channel statistics need at least one sample".into()));
    }
    let [c, h, w] = dataset.image_shape();
    let plane = h * w;
    let sample = c * plane;
    let count = (dataset.len() * plane) as f64;
    let mut mean = vec![0.0f64; c];
    for (i, &p) in dataset.pixels.iter().enumerate() {
        mean[(i % sample) / plane] += f64::from(p) / 255.0;
    }
    for m in &mut mean {
        *m /= count;
    }
    let mut var = vec![0.0f64; c];
    for (i, &p) in dataset.pixels.iter().enumerate() {
        let d = f64::from(p) / 255.0 - mean[(i % sample) / plane];
        var[(i % sample) / plane] += d * d;
    }
    let std = var.iter().map(|v| (v / count).sqrt().max(STD_FLOOR)).collect();
    Ok(ChannelStats { mean, std })
}

/// Standardize to `(x/255 - mean_c) / std_c` using the given statistics.
///
/// Statistics come from the train split and are reused verbatim for test
/// data; pass the same `stats` to both calls.
pub fn normalize<E: Element>(dataset: &Dataset, stats: &ChannelStats) -> Result<SampleSet<E>> {
    let [c, h, w] = dataset.image_shape();
    if stats.mean.len() != c || stats.std.len() != c {
        return Err(Error::Shape(format!(
            "statistics cover {} channels, dataset has {c}",
            stats.mean.len()
        )));
    }
    let plane = h * w;
    let sample = c * plane;
    let mut data = Vec::with_capacity(dataset.pixels.len());
    for (i, &p) in dataset.pixels.iter().enumerate() {
        let ch = (i % sample) / plane;
        data.push(E::narrow((f64::from(p) / 255.0 - stats.mean[ch]) / stats.std[ch]));
    }
    let x = Tensor::from_vec(&[dataset.len(), c, h, w], data)?;
    let labels = dataset.labels.iter().map(|&l| u32::from(l)).collect();
    SampleSet::new(dataset.name.clone(), x, labels, dataset.class_count)
}

/// Real-valued samples ready for the network, first axis indexes samples.
#[derive(Debug, Clone)]
pub struct SampleSet<E: Element> {
    name: String,
    x: Tensor<E>,
    labels: Vec<u32>,
    class_count: usize,
}

impl<E: Element> SampleSet<E> {
    pub fn new(
        name: impl Into<String>,
        x: Tensor<E>,
        labels: Vec<u32>,
        class_count: usize,
    ) -> Result<Self> {
        if x.rank() == 0 || x.dim(0) != labels.len() {
            return Err(Error::Shape(format!(
                "input shape {:?} does not index {} labels",
                x.shape(),
                labels.len()
            )));
        }
        if class_count == 0 {
            return Err(Error::Config("class count must be positive".into()));
        }
        if let Some(pos) = labels.iter().position(|&l| l as usize >= class_count) {
            return Err(Error::Data(format!(
                "label {} at record {pos} out of range for {class_count} classes",
                labels[pos]
            )));
        }
        Ok(Self { name: name.into(), x, labels, class_count })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn x(&self) -> &Tensor<E> {
        &self.x
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Per-sample shape, the input shape the model must accept.
    pub fn sample_shape(&self) -> &[usize] {
        &self.x.shape()[1..]
    }

    fn sample_len(&self) -> usize {
        self.sample_shape().iter().product()
    }

    /// Batch tensor and labels for the listed samples in the listed order.
    pub fn gather(&self, indices: &[usize]) -> Result<(Tensor<E>, Vec<u32>)> {
        let sample = self.sample_len();
        let mut shape = self.x.shape().to_vec();
        shape[0] = indices.len();
        let mut data = Vec::with_capacity(indices.len() * sample);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.len() {
                return Err(Error::Shape(format!(
                    "sample index {i} out of range for {} samples",
                    self.len()
                )));
            }
            data.extend_from_slice(&self.x.data()[i * sample..(i + 1) * sample]);
            labels.push(self.labels[i]);
        }
        Ok((Tensor::from_vec(&shape, data)?, labels))
    }

    /// New set holding the listed samples in the listed order.
    pub fn subset(&self, indices: &[usize], name: impl Into<String>) -> Result<Self> {
        let (x, labels) = self.gather(indices)?;
        Self::new(name, x, labels, self.class_count)
    }

    /// First `n` samples in current order; `n` larger than the set is an error.
    pub fn take_prefix(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::Config(format!(
                "requested {n} samples, set {} holds {}",
                self.name,
                self.len()
            )));
        }
        let indices: Vec<usize> = (0..n).collect();
        self.subset(&indices, self.name.clone())
    }

    /// Seeded shuffle then prefix/suffix cut; train size is `floor(fraction * N)`.
    pub fn split(&self, spec: &SplitSpec) -> Result<(Self, Self)> {
        let (train_idx, test_idx) = split_indices(self.len(), spec)?;
        let train = self.subset(&train_idx, format!("{}-train", self.name))?;
        let test = self.subset(&test_idx, format!("{}-test", self.name))?;
        Ok((train, test))
    }

    /// Same samples in another element precision.
    pub fn cast<T: Element>(&self) -> SampleSet<T> {
        SampleSet {
            name: self.name.clone(),
            x: self.x.cast(),
            labels: self.labels.clone(),
            class_count: self.class_count,
        }
    }
}

/// Batch index lists for one epoch.
///
/// The order is a pure function of `(seed, epoch)`: each epoch draws from its
/// own RNG stream, so epochs can be revisited in any order. The final partial
/// batch is kept. With `shuffle` off the original sample order is used.
pub fn batch_indices(
    n: usize,
    batch_size: usize,
    seed: u64,
    epoch: u64,
    shuffle: bool,
) -> Result<Vec<Vec<usize>>> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be at least 1".into()));
    }
    let order: Vec<usize> = if shuffle {
        let mut rng = seeded_stream(seed, epoch);
        shuffled_indices(n, &mut rng)
    } else {
        (0..n).collect()
    };
    Ok(order.chunks(batch_size).map(<[usize]>::to_vec).collect())
}
