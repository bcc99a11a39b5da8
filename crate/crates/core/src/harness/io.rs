//! JSON files for instances and certificates. Emission is canonical:
//! pretty-printed, fields in declaration order, trailing newline.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::bpbcorrect::Certificate;
use crate::error::Result;
use crate::harness::Instance;

pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

/// Re-emits `text` in canonical form after a full parse.
pub fn canonicalize_instance(text: &str) -> Result<String> {
    to_canonical_json(&from_json::<Instance>(text)?)
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    from_json(&fs::read_to_string(path)?)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &Instance) -> Result<()> {
    Ok(fs::write(path, to_canonical_json(instance)?)?)
}

pub fn read_certificate(path: impl AsRef<Path>) -> Result<Certificate> {
    from_json(&fs::read_to_string(path)?)
}

pub fn write_certificate(path: impl AsRef<Path>, cert: &Certificate) -> Result<()> {
    Ok(fs::write(path, to_canonical_json(cert)?)?)
}
