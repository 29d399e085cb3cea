//! Synthetic data sources: a 2-D evaluation lattice, a two-spiral
//! classification toy, and a generator of CIFAR-10-layout image directories
//! for exercising the image pipeline without real data.
//!
//! The point sets emit real-valued [`SampleSet`]s directly since their
//! coordinates are exact reals, not 8-bit intensities.

use std::fs;
use std::path::Path;

use super::SampleSet;
use crate::error::{Error, Result};
use crate::rng::seeded;
use crate::tensor::Tensor;
use rand::Rng;

/// Square lattice of roughly `n_points` samples covering `range` in both axes.
///
/// The side length is the nearest integer to `sqrt(n_points)` (at least 2),
/// so the default request of 1000 yields a 32 x 32 = 1024-point lattice. Rows
/// are emitted x-fastest; the four range corners appear exactly.
pub fn grid2d(n_points: usize, range: (f64, f64)) -> Result<SampleSet<f64>> {
    let (lo, hi) = range;
    if n_points == 0 {
        return Err(Error::Config("lattice needs at least one point".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Config(format!("degenerate lattice range ({lo}, {hi})")));
    }
    let side = ((n_points as f64).sqrt().round() as usize).max(2);
    // Endpoints are written literally so the corners are exact.
    let coord = |i: usize| {
        if i == 0 {
            lo
        } else if i == side - 1 {
            hi
        } else {
            lo + (hi - lo) * (i as f64 / (side - 1) as f64)
        }
    };
    let mut data = Vec::with_capacity(side * side * 2);
    for yi in 0..side {
        for xi in 0..side {
            data.push(coord(xi));
            data.push(coord(yi));
        }
    }
    let x = Tensor::from_vec(&[side * side, 2], data)?;
    SampleSet::new("grid2d", x, vec![0; side * side], 1)
}

/// Lattice matching the default landscape evaluation: 1024 points on [-1, 1]^2.
pub fn grid2d_default() -> Result<SampleSet<f64>> {
    grid2d(1000, (-1.0, 1.0))
}

/// Two interleaved Archimedean spirals, one class each, `n` points in total.
///
/// Class 1 is class 0 rotated by pi, which leaves a radial gap of a third of
/// the outer radius between the arms. With `noise` 0 the classes are
/// separable by construction; noise displaces each coordinate uniformly by at
/// most `noise`.
pub fn spirals(n: usize, noise: f64, seed: u64) -> Result<SampleSet<f64>> {
    if n == 0 {
        return Err(Error::Config("spiral set needs at least one point".into()));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::Config(format!("spiral noise {noise} must be finite and >= 0")));
    }
    let counts = [n - n / 2, n / 2];
    let (theta_lo, theta_hi) = (0.5 * std::f64::consts::PI, 3.0 * std::f64::consts::PI);
    let mut rng = seeded(seed);
    let mut data = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for (class, &m) in counts.iter().enumerate() {
        for j in 0..m {
            let t = if m == 1 { 0.0 } else { j as f64 / (m - 1) as f64 };
            let theta = theta_lo + t * (theta_hi - theta_lo);
            let r = theta / theta_hi;
            let rot = theta + class as f64 * std::f64::consts::PI;
            let mut px = r * rot.cos();
            let mut py = r * rot.sin();
            if noise > 0.0 {
                px += rng.gen_range(-noise..=noise);
                py += rng.gen_range(-noise..=noise);
            }
            data.push(px);
            data.push(py);
            labels.push(class as u32);
        }
    }
    let x = Tensor::from_vec(&[n, 2], data)?;
    SampleSet::new("spirals", x, labels, 2)
}

/// One well-separated base color per class; pairs differ by at least 100
/// levels in some channel, far above the noise the writer adds.
const CLASS_COLORS: [[u8; 3]; 10] = [
    [220, 30, 30],
    [30, 220, 30],
    [30, 30, 220],
    [220, 220, 30],
    [220, 30, 220],
    [30, 220, 220],
    [240, 130, 20],
    [20, 130, 240],
    [130, 240, 130],
    [120, 120, 120],
];

/// Writes a directory of synthetic 10-class images in the CIFAR-10 binary
/// layout: six files of `per_file` records, each record one label byte
/// followed by 32 x 32 planes of R, G, B.
///
/// Labels cycle through the classes so every file is balanced. Each image is
/// its class color under a per-image brightness shift and per-pixel noise,
/// all drawn from `seed`, so channel statistics separate the classes and a
/// small network can learn them. Rewriting with the same arguments produces
/// identical bytes.
pub fn write_synthetic_cifar10(dir: &Path, per_file: usize, seed: u64) -> Result<()> {
    if per_file == 0 {
        return Err(Error::Config("synthetic image files need at least one record".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = seeded(seed);
    for (file_no, name) in super::cifar::CIFAR10_FILES.iter().enumerate() {
        let mut bytes = Vec::with_capacity(per_file * (1 + 3 * 32 * 32));
        for record in 0..per_file {
            let class = (file_no * per_file + record) % CLASS_COLORS.len();
            bytes.push(class as u8);
            let brightness: i16 = rng.gen_range(-30..=30);
            for channel in CLASS_COLORS[class] {
                for _ in 0..32 * 32 {
                    let v = i16::from(channel) + brightness + rng.gen_range(-45..=45);
                    bytes.push(v.clamp(0, 255) as u8);
                }
            }
        }
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
