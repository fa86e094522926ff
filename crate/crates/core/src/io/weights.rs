//! Weights on disk are a flat JSON array of numbers, one per constraint row.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::WeightVector;

pub fn parse_weights(text: &str) -> Result<WeightVector> {
    let values: Vec<f64> = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), format!("weights: {e}")))?;
    WeightVector::new(values)
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<WeightVector> {
    parse_weights(&fs::read_to_string(path)?)
}

/// Shortest round-trip representation of every weight.
pub fn weights_json(w: &WeightVector) -> String {
    serde_json::to_string(w.as_slice()).expect("finite floats always serialize")
}

pub fn write_weights(w: &WeightVector, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, weights_json(w) + "\n")?;
    Ok(())
}
