//! The bit-permutation image cipher: per round a row gather by `T_M`, then a
//! per-row bit gather by `T_N`, repeated `T` times with the keystream reseeded
//! from its own last iterate.

use crate::error::{Error, Result};
use crate::image::{expand_to_bits, pack_to_image, BitMatrix, GrayImage};
use crate::keystream::{build_schedule, generate_sequence, rank_vector, Key, Schedule};
use crate::permutation::{apply_inverse_pixels, apply_map_pixels, PermutationMap};
use crate::scalar::Scalar;

fn check_schedule<F>(b: &BitMatrix, s: &Schedule<F>) -> Result<()> {
    let ok = s.row_perm.len() == b.rows()
        && s.col_perms.len() == b.rows()
        && s.col_perms.iter().all(|c| c.len() == b.cols());
    if ok {
        Ok(())
    } else {
        Err(Error::Shape(format!(
            "schedule for {}x{} applied to {}x{} bit matrix",
            s.row_perm.len(),
            s.col_perms.first().map_or(0, |c| c.len()),
            b.rows(),
            b.cols()
        )))
    }
}

pub fn encrypt_round<F>(b: &BitMatrix, s: &Schedule<F>) -> Result<BitMatrix> {
    check_schedule(b, s)?;
    let cols = b.cols();
    let mut out = Vec::with_capacity(b.rows() * cols);
    for (i, tn) in s.col_perms.iter().enumerate() {
        // B*(i, :) = B(T_M(i), :), then B'(i, l) = B*(i, T_N(i, l))
        let src = b.row(s.row_perm[i]);
        out.extend(tn.as_slice().iter().map(|&c| src[c]));
    }
    Ok(BitMatrix::from_raw(b.rows(), cols, out))
}

pub fn decrypt_round<F>(b: &BitMatrix, s: &Schedule<F>) -> Result<BitMatrix> {
    check_schedule(b, s)?;
    let cols = b.cols();
    let mut out = vec![0u8; b.rows() * cols];
    for (i, tn) in s.col_perms.iter().enumerate() {
        let src = b.row(i);
        let dst = &mut out[s.row_perm[i] * cols..(s.row_perm[i] + 1) * cols];
        for (l, &c) in tn.as_slice().iter().enumerate() {
            dst[c] = src[l];
        }
    }
    Ok(BitMatrix::from_raw(b.rows(), cols, out))
}

/// Schedules of all `T` rounds, in encryption order.
pub fn round_schedules<F: Scalar>(key: &Key<F>, rows: usize, cols: usize) -> Result<Vec<Schedule<F>>> {
    let mut schedules = Vec::with_capacity(key.rounds());
    let mut k = *key;
    for r in 0..key.rounds() {
        let s = build_schedule(&k, rows, cols)?;
        if r + 1 < key.rounds() {
            k = k.reseeded(s.final_state)?;
        }
        schedules.push(s);
    }
    Ok(schedules)
}

pub fn encrypt_bits<F: Scalar>(b: &BitMatrix, key: &Key<F>) -> Result<BitMatrix> {
    let mut cur = b.clone();
    let mut k = *key;
    for _ in 0..key.rounds() {
        let s = build_schedule(&k, b.rows(), b.cols())?;
        cur = encrypt_round(&cur, &s)?;
        k = k.reseeded(s.final_state)?;
    }
    Ok(cur)
}

pub fn decrypt_bits<F: Scalar>(b: &BitMatrix, key: &Key<F>) -> Result<BitMatrix> {
    let schedules = round_schedules(key, b.rows(), b.cols())?;
    schedules
        .iter()
        .rev()
        .try_fold(b.clone(), |cur, s| decrypt_round(&cur, s))
}

pub fn encrypt<F: Scalar>(img: &GrayImage, key: &Key<F>) -> Result<GrayImage> {
    pack_to_image(&encrypt_bits(&expand_to_bits(img), key)?)
}

pub fn decrypt<F: Scalar>(cipher: &GrayImage, key: &Key<F>) -> Result<GrayImage> {
    pack_to_image(&decrypt_bits(&expand_to_bits(cipher), key)?)
}

/// The whole `T`-round cipher on an `rows x cols` image as one bijection on
/// the `rows x 8*cols` bit grid.
pub fn compose_permutation<F: Scalar>(key: &Key<F>, rows: usize, cols: usize) -> Result<PermutationMap> {
    let n8 = cols * 8;
    let mut where_now: Vec<usize> = (0..rows * n8).collect();
    let mut dest_of = vec![0usize; rows * n8];
    for s in round_schedules(key, rows, n8)? {
        // the bit at (T_M(i), T_N(i, l)) moves to (i, l)
        for (i, tn) in s.col_perms.iter().enumerate() {
            let src_row = s.row_perm[i] * n8;
            for (l, &c) in tn.as_slice().iter().enumerate() {
                dest_of[src_row + c] = i * n8 + l;
            }
        }
        for w in where_now.iter_mut() {
            *w = dest_of[*w];
        }
    }
    PermutationMap::new(rows, n8, where_now)
}

/// A pixel-permutation cipher over whole bytes: a keyed shuffle of the
/// `rows x cols` pixel grid. Serves as the target of the byte-level attack.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelShuffle {
    map: PermutationMap,
}

impl PixelShuffle {
    /// Ranks the `rows*cols` iterates after offset `n`; pixel `p` of the cipher
    /// image is plain pixel `rank[p]`.
    pub fn from_key<F: Scalar>(key: &Key<F>, rows: usize, cols: usize) -> Result<Self> {
        let size = rows * cols;
        if size == 0 {
            return Err(Error::Shape("pixel shuffle needs a non-empty grid".into()));
        }
        let seq = generate_sequence(key, key.n() + size)?;
        let rank = rank_vector(&seq.values()[key.n()..])?;
        let mut target = vec![0; size];
        for (p, &src) in rank.as_slice().iter().enumerate() {
            target[src] = p;
        }
        Ok(Self {
            map: PermutationMap::new(rows, cols, target)?,
        })
    }

    pub fn from_map(map: PermutationMap) -> Self {
        Self { map }
    }

    pub fn map(&self) -> &PermutationMap {
        &self.map
    }

    pub fn encrypt(&self, img: &GrayImage) -> Result<GrayImage> {
        apply_map_pixels(&self.map, img)
    }

    pub fn decrypt(&self, img: &GrayImage) -> Result<GrayImage> {
        apply_inverse_pixels(&self.map, img)
    }
}
