use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use log::info;
use permcrack::analysis::{bit_histogram, demonstrate_equivalent_key};
use permcrack::cipher::{decrypt, encrypt};
use permcrack::keystream::trajectory_histogram;
use permcrack::recovery::{
    attack, construct_chosen_pixel_plaintexts, construct_chosen_plaintexts, AttackReport,
};
use permcrack::{Error, GrayImage, Key, Mode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::manifest::{read_manifest, write_manifest, PairPaths};
use crate::sweep::{run_sweep, write_csv, ExperimentConfig};

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn load(path: &Path) -> Result<GrayImage> {
    GrayImage::load(path).with_context(|| format!("loading {}", path.display()))
}

fn save(img: &GrayImage, path: &Path) -> Result<()> {
    img.save(path).with_context(|| format!("writing {}", path.display()))
}

pub fn encrypt_file(key: &Key, input: &Path, output: &Path) -> Result<()> {
    let img = load(input)?;
    save(&encrypt(&img, key)?, output)
}

pub fn decrypt_file(key: &Key, input: &Path, output: &Path) -> Result<()> {
    let img = load(input)?;
    save(&decrypt(&img, key)?, output)
}

/// Runs the known-plaintext attack over a manifest and writes `map.txt` and
/// `report.csv` into `out`.
pub fn attack_known(manifest: &Path, mode: Mode, out: &Path) -> Result<AttackReport> {
    let entries = read_manifest(manifest)?;
    if entries.is_empty() {
        bail!("manifest {} lists no pairs", manifest.display());
    }
    let mut pairs = Vec::with_capacity(entries.len());
    for e in &entries {
        pairs.push((load(&e.plain)?, load(&e.cipher)?));
    }
    let (map, report) = match attack(&pairs, mode) {
        Ok(r) => r,
        Err(err @ Error::InconsistentPair { pair, .. }) if pair < entries.len() => {
            let e = &entries[pair];
            bail!(
                "{err}\n  pair {pair}: {} / {}",
                e.plain.display(),
                e.cipher.display()
            );
        }
        Err(e) => return Err(e.into()),
    };
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    map.write_text(create(&out.join("map.txt"))?)?;
    let mut csv = create(&out.join("report.csv"))?;
    writeln!(csv, "{}", AttackReport::CSV_HEADER)?;
    writeln!(csv, "{}", report.csv_row())?;
    csv.flush()?;
    info!(
        "{} pairs, {} leaves, residual {:.3} bits",
        report.pairs_used, report.leaf_count, report.residual_log2
    );
    Ok(report)
}

/// Writes the chosen plaintexts as `chosen_NN.pgm`. With a key, also writes
/// `cipher_NN.pgm` and a `manifest.tsv` pairing them.
pub fn gen_chosen(rows: usize, cols: usize, mode: Mode, key: Option<&Key>, out: &Path) -> Result<Vec<PathBuf>> {
    if rows == 0 || cols == 0 {
        bail!("image dimensions must be positive, got {rows}x{cols}");
    }
    let images = match mode {
        Mode::Bit => construct_chosen_plaintexts(rows, cols),
        Mode::Byte => construct_chosen_pixel_plaintexts(rows, cols, 256),
    };
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut written = Vec::new();
    let mut manifest = Vec::new();
    for (t, img) in images.iter().enumerate() {
        let plain = out.join(format!("chosen_{t:02}.pgm"));
        save(img, &plain)?;
        if let Some(key) = key {
            let cipher = out.join(format!("cipher_{t:02}.pgm"));
            save(&encrypt(img, key)?, &cipher)?;
            manifest.push(PairPaths {
                plain: plain.clone(),
                cipher,
            });
        }
        written.push(plain);
    }
    if key.is_some() {
        write_manifest(&out.join("manifest.tsv"), &manifest)?;
    }
    info!("wrote {} chosen images to {}", images.len(), out.display());
    Ok(written)
}

pub fn sweep(cfg: &ExperimentConfig, out: &Path) -> Result<()> {
    let rows = run_sweep(cfg)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    write_csv(create(out)?, cfg, &rows)?;
    info!("{} sweep rows written to {}", rows.len(), out.display());
    Ok(())
}

/// `(x0, mu)` pairs whose trajectories are histogrammed by [`diagnostics`].
pub const TRAJECTORY_SEEDS: [(f64, f64); 2] = [(0.3333, 3.5786), (0.5656, 3.5786)];
pub const TRAJECTORY_ITERATES: usize = 10_000;
pub const TRAJECTORY_BINS: usize = 50;

/// Property checks for `key` and trajectory histograms, as `kind,name,value`
/// CSV.
pub fn diagnostics<W: Write>(key: &Key, seed: u64, mut w: W) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = GrayImage::filled(16, 16, 0)?;
    let zero_fixed = encrypt(&zero, key)? == zero;
    let equivalent = demonstrate_equivalent_key(key, &mut rng)?;
    let mut hist_ok = true;
    for _ in 0..8 {
        let img = GrayImage::new(16, 16, (0..256).map(|_| rand::Rng::gen(&mut rng)).collect())?;
        hist_ok &= bit_histogram(&img) == bit_histogram(&encrypt(&img, key)?);
    }

    writeln!(w, "kind,name,value")?;
    writeln!(w, "key,x0,{}", key.x0())?;
    writeln!(w, "key,mu,{}", key.mu())?;
    writeln!(w, "key,m,{}", key.m())?;
    writeln!(w, "key,n,{}", key.n())?;
    writeln!(w, "key,T,{}", key.rounds())?;
    writeln!(w, "check,zero_fixed_point,{zero_fixed}")?;
    writeln!(w, "check,equivalent_key,{equivalent}")?;
    writeln!(w, "check,bit_histogram_invariance,{hist_ok}")?;
    for (x0, mu) in TRAJECTORY_SEEDS {
        let counts = trajectory_histogram(x0, mu, TRAJECTORY_ITERATES, TRAJECTORY_BINS)?;
        for (b, c) in counts.iter().enumerate() {
            writeln!(w, "trajectory,x0={x0}/mu={mu}/bin={b},{c}")?;
        }
    }
    w.flush()?;
    Ok(zero_fixed && equivalent && hist_ok)
}
