//! Readers for the CIFAR-10 and CIFAR-100 binary batch formats.
//!
//! Both loaders merge every batch file, train and test alike, into one
//! dataset; the canonical split dissolves because the pipeline re-splits
//! later with its own seed. Record order is canonical: files sorted by name,
//! records in file order.

use std::fs;
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};

/// Bytes per image: 32 x 32 pixels, R plane then G plane then B plane.
pub const IMAGE_BYTES: usize = 3 * 32 * 32;

pub(super) const CIFAR10_FILES: [&str; 6] = [
    "data_batch_1.bin",
    "data_batch_2.bin",
    "data_batch_3.bin",
    "data_batch_4.bin",
    "data_batch_5.bin",
    "test_batch.bin",
];

// Sorted name order puts the test file first; in-file order is unchanged.
const CIFAR100_FILES: [&str; 2] = ["test.bin", "train.bin"];

/// All CIFAR-10 records under `dir`; record = 1 label byte + image.
///
/// The canonical batches hold 10,000 records each, but the record count is
/// derived from file size, so shorter files in the same layout load too.
pub fn load_cifar10(dir: &Path) -> Result<Dataset> {
    load(dir, "cifar10", &CIFAR10_FILES, &[10], 0, 10)
}

/// All CIFAR-100 records under `dir`; record = coarse + fine label byte + image.
///
/// Fine labels become the dataset labels; coarse labels are only validated.
pub fn load_cifar100(dir: &Path) -> Result<Dataset> {
    load(dir, "cifar100", &CIFAR100_FILES, &[20, 100], 1, 100)
}

fn load(
    dir: &Path,
    name: &str,
    files: &[&str],
    label_limits: &[usize],
    label_pick: usize,
    class_count: usize,
) -> Result<Dataset> {
    let record_size = label_limits.len() + IMAGE_BYTES;
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for file in files {
        let path = dir.join(file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        if bytes.len() % record_size != 0 {
            let offset = (bytes.len() / record_size) * record_size;
            return Err(Error::Data(format!(
                "truncated record in {file} at offset {offset}: \
                 {} bytes left of a {record_size}-byte record",
                bytes.len() - offset
            )));
        }
        for (idx, rec) in bytes.chunks_exact(record_size).enumerate() {
            for (pos, &limit) in label_limits.iter().enumerate() {
                if usize::from(rec[pos]) >= limit {
                    return Err(Error::Data(format!(
                        "label byte {pos} of record {idx} in {file} is {}, \
                         limit {limit}",
                        rec[pos]
                    )));
                }
            }
            labels.push(rec[label_pick]);
            pixels.extend_from_slice(&rec[label_limits.len()..]);
        }
    }
    // Byte accounting: every consumed byte lands in exactly one record.
    debug_assert_eq!(
        pixels.len() + labels.len() * label_limits.len(),
        labels.len() * record_size
    );
    Dataset::new(name, 3, 32, 32, pixels, labels, class_count)
}
