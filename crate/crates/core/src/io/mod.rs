//! Fixture data, file formats and plotting.

pub mod branch_file;
pub mod fixtures;
pub mod svg;
pub mod trajectory;
