//! Pair manifests: one `plain_path<TAB>cipher_path` line per pair. Relative
//! paths resolve against the manifest's directory.

use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPaths {
    pub plain: PathBuf,
    pub cipher: PathBuf,
}

pub fn read_manifest(path: &Path) -> Result<Vec<PairPaths>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut pairs = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((plain, cipher)) = line.split_once('\t') else {
            bail!("{}:{}: expected `plain<TAB>cipher`", path.display(), n + 1);
        };
        pairs.push(PairPaths {
            plain: base.join(plain.trim()),
            cipher: base.join(cipher.trim()),
        });
    }
    Ok(pairs)
}

/// Writes paths relative to the manifest's own directory when possible.
pub fn write_manifest(path: &Path, pairs: &[PairPaths]) -> Result<()> {
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let rel = |p: &Path| p.strip_prefix(base).unwrap_or(p).display().to_string();
    let mut f = std::io::BufWriter::new(
        std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    for pair in pairs {
        writeln!(f, "{}\t{}", rel(&pair.plain), rel(&pair.cipher))?;
    }
    f.flush()?;
    Ok(())
}
