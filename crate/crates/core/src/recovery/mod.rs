//! Known/chosen-plaintext recovery of the secret permutation.

mod bounds;
mod chosen;
mod tree;

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

pub use bounds::{
    binomial_pmf8, error_bit_pmf, min_known_plaintexts, predicted_bit_accuracy,
    predicted_element_accuracy,
};
pub use chosen::{
    chosen_pixel_plaintext_count, chosen_plaintext_count, construct_chosen_pixel_plaintexts,
    construct_chosen_plaintexts,
};
pub use tree::{Leaf, NodeId, RecoveryTree};

use crate::error::{Error, Result};
use crate::image::{expand_to_bits, GrayImage};
use crate::permutation::PermutationMap;

/// Granularity at which the attacked cipher permutes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Bits of the `M x 8N` expansion, two levels.
    Bit,
    /// Whole pixels of the `M x N` image, 256 levels.
    Byte,
}

impl Mode {
    pub fn levels(self) -> usize {
        match self {
            Mode::Bit => 2,
            Mode::Byte => 256,
        }
    }

    /// Grid the permutation acts on for an `rows x cols` image.
    pub fn grid(self, rows: usize, cols: usize) -> (usize, usize) {
        match self {
            Mode::Bit => (rows, cols * 8),
            Mode::Byte => (rows, cols),
        }
    }

    fn elements(self, img: &GrayImage) -> Vec<u8> {
        match self {
            Mode::Bit => expand_to_bits(img).bits().to_vec(),
            Mode::Byte => img.pixels().to_vec(),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Bit => "bit",
            Mode::Byte => "byte",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bit" => Ok(Mode::Bit),
            "byte" => Ok(Mode::Byte),
            other => Err(Error::Parse(format!("mode must be `bit` or `byte`, got `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackReport {
    /// `n0`.
    pub pairs_used: usize,
    /// `P`.
    pub leaf_count: usize,
    pub singleton_fraction: f64,
    /// `log2` of the product of leaf-cardinality factorials.
    pub residual_log2: f64,
    pub predicted_pb: f64,
    pub positions_processed: u64,
    pub elapsed: Duration,
}

impl AttackReport {
    pub const CSV_HEADER: &'static str =
        "n0,P,singleton_fraction,residual_log2,predicted_pb,positions_processed,elapsed_ms";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{:.6},{:.6},{},{:.3}",
            self.pairs_used,
            self.leaf_count,
            self.singleton_fraction,
            self.residual_log2,
            self.predicted_pb,
            self.positions_processed,
            self.elapsed.as_secs_f64() * 1e3
        )
    }
}

/// Builds the tree from `pairs` and returns the estimated map over the mode's
/// grid along with a summary.
///
/// An inconsistent pair aborts the attack; the error carries its index.
pub fn attack(pairs: &[(GrayImage, GrayImage)], mode: Mode) -> Result<(PermutationMap, AttackReport)> {
    let started = Instant::now();
    let (first, _) = pairs.first().ok_or(Error::NoPairs)?;
    for (k, (plain, cipher)) in pairs.iter().enumerate() {
        first
            .same_shape(plain)
            .and_then(|_| plain.same_shape(cipher))
            .map_err(|e| Error::Shape(format!("pair {k}: {e}")))?;
    }
    let (rows, cols) = mode.grid(first.rows(), first.cols());
    let mut tree = RecoveryTree::new(rows, cols, mode.levels())?;
    for (plain, cipher) in pairs {
        tree.refine(&mode.elements(plain), &mode.elements(cipher))?;
    }
    let map = tree.estimate_map();
    let report = AttackReport {
        pairs_used: pairs.len(),
        leaf_count: tree.leaf_count(),
        singleton_fraction: tree.singleton_fraction(),
        residual_log2: tree.residual_ambiguity(),
        predicted_pb: predicted_element_accuracy(rows * cols, mode.levels(), pairs.len()),
        positions_processed: tree.positions_processed(),
        elapsed: started.elapsed(),
    };
    Ok((map, report))
}
