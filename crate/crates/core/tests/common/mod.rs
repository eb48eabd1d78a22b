#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use permcrack::{expand_to_bits, GrayImage, Key, RecoveryTree};
use rand::Rng;

pub fn random_key<R: Rng>(rng: &mut R) -> Key {
    Key::new(
        rng.gen_range(0.001..0.999),
        rng.gen_range(3.5700..3.9999),
        rng.gen_range(1..64),
        rng.gen_range(1..64),
        rng.gen_range(1..=4),
    )
    .unwrap()
}

pub fn random_image<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> GrayImage {
    GrayImage::new(rows, cols, (0..rows * cols).map(|_| rng.gen()).collect()).unwrap()
}

pub fn bits(img: &GrayImage) -> Vec<u8> {
    expand_to_bits(img).bits().to_vec()
}

pub type Partition = BTreeSet<(Vec<u32>, Vec<u32>)>;

pub fn tree_partition(tree: &RecoveryTree) -> Partition {
    tree.leaves()
        .map(|l| (l.plain_set.to_vec(), l.cipher_set.to_vec()))
        .collect()
}

/// Candidate-set intersection: for each plain position, the cipher positions
/// whose values agree with it in every pair, obtained by intersecting one
/// candidate set per pair. Plain positions sharing a final candidate set form
/// one block, matched with that set.
pub fn intersection_partition(pairs: &[(Vec<u8>, Vec<u8>)], size: usize) -> Partition {
    let mut blocks: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    for p in 0..size {
        let mut cand: BTreeSet<u32> = (0..size as u32).collect();
        for (plain, cipher) in pairs {
            let this: BTreeSet<u32> = (0..size as u32)
                .filter(|&c| cipher[c as usize] == plain[p])
                .collect();
            cand = cand.intersection(&this).copied().collect();
        }
        blocks
            .entry(cand.into_iter().collect())
            .or_default()
            .push(p as u32);
    }
    blocks.into_iter().map(|(c, p)| (p, c)).collect()
}

/// Exact mean of `1 / (1 + X)`, `X ~ Binomial(size - 1, levels^-n0)`: the
/// chance a position is paired correctly inside its leaf.
pub fn occupancy_accuracy(size: usize, levels: usize, n0: usize) -> f64 {
    let q = (levels as f64).powi(-(n0 as i32));
    let g = size as f64;
    (1.0 - (1.0 - q).powf(g)) / (g * q)
}
