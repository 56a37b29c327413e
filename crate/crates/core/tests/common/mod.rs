#![allow(dead_code)]

pub mod mcmc;
pub mod postcheck;
pub mod quadrature;
pub mod toy;

use std::path::PathBuf;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}
