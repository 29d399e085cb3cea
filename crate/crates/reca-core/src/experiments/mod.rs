//! Reproducible experiment drivers: curve sweeps, gradient verification,
//! loss-landscape probes, training runs, and cross-run reporting.

pub mod gradcheck;
pub mod landscape;
pub mod presets;
pub mod report;
pub mod sweep;
pub mod train;
