pub mod compare;
pub mod gradcheck;
pub mod inspect;
pub mod landscape;
pub mod resources;
pub mod sweep;
pub mod train;
