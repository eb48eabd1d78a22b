//! Command implementations behind the `permcrack` binary.

pub mod commands;
pub mod manifest;
pub mod sweep;

use std::path::Path;

use anyhow::{Context, Result};
use permcrack::Key;

/// Reads a one-line `x0 mu m n T` key file, validating the full key domain.
pub fn load_key(path: &Path) -> Result<Key> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading key file {}", path.display()))?;
    let line = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .with_context(|| format!("key file {} is empty", path.display()))?;
    line.parse::<Key>()
        .with_context(|| format!("invalid key in {}", path.display()))
}
