//! Recovery metrics and property probes for the cipher.

use rand::Rng;

use crate::cipher::encrypt;
use crate::error::{Error, Result};
use crate::image::{expand_to_bits, GrayImage};
use crate::keystream::Key;
use crate::permutation::PermutationMap;
use crate::scalar::Scalar;

/// Bit/pixel agreement between a recovered image and the original.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageComparison {
    pub bit_accuracy: f64,
    pub pixel_accuracy: f64,
    /// Among wrong pixels, the share with exactly one wrong bit; 0 without
    /// errors.
    pub one_bit_error_fraction: f64,
    /// `error_bit_histogram[i]` counts pixels with `i` wrong bits.
    pub error_bit_histogram: [usize; 9],
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccuracySummary {
    pub bit_accuracy: f64,
    pub pixel_accuracy: f64,
    pub perm_accuracy: f64,
    pub one_bit_error_fraction: f64,
}

impl AccuracySummary {
    pub fn new(images: &ImageComparison, perm_accuracy: f64) -> Self {
        Self {
            bit_accuracy: images.bit_accuracy,
            pixel_accuracy: images.pixel_accuracy,
            perm_accuracy,
            one_bit_error_fraction: images.one_bit_error_fraction,
        }
    }
}

pub fn compare_images(recovered: &GrayImage, original: &GrayImage) -> Result<ImageComparison> {
    recovered.same_shape(original)?;
    let mut hist = [0usize; 9];
    for (&a, &b) in recovered.pixels().iter().zip(original.pixels()) {
        hist[(a ^ b).count_ones() as usize] += 1;
    }
    let pixels = original.pixels().len();
    let wrong_bits: usize = hist.iter().enumerate().map(|(i, &c)| i * c).sum();
    let wrong_pixels = pixels - hist[0];
    Ok(ImageComparison {
        bit_accuracy: 1.0 - wrong_bits as f64 / (8 * pixels) as f64,
        pixel_accuracy: hist[0] as f64 / pixels as f64,
        one_bit_error_fraction: if wrong_pixels == 0 {
            0.0
        } else {
            hist[1] as f64 / wrong_pixels as f64
        },
        error_bit_histogram: hist,
    })
}

/// Fraction of positions on which two maps agree.
pub fn perm_accuracy(estimate: &PermutationMap, truth: &PermutationMap) -> Result<f64> {
    if estimate.rows() != truth.rows() || estimate.cols() != truth.cols() {
        return Err(Error::Shape(format!(
            "{}x{} estimate vs {}x{} truth",
            estimate.rows(),
            estimate.cols(),
            truth.rows(),
            truth.cols()
        )));
    }
    let hits = estimate
        .targets()
        .iter()
        .zip(truth.targets())
        .filter(|(a, b)| a == b)
        .count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Offset of difference `0` in [`difference_histogram`]'s output.
pub const DIFF_ZERO: usize = 255;

/// Counts of `recovered - original` per pixel; index `d + 255` holds
/// difference `d` in `-255..=255`.
pub fn difference_histogram(recovered: &GrayImage, original: &GrayImage) -> Result<Vec<usize>> {
    recovered.same_shape(original)?;
    let mut hist = vec![0usize; 511];
    for (&a, &b) in recovered.pixels().iter().zip(original.pixels()) {
        hist[(a as i32 - b as i32 + DIFF_ZERO as i32) as usize] += 1;
    }
    Ok(hist)
}

/// 3x3 median with replicated borders.
pub fn median_filter_3x3(img: &GrayImage) -> GrayImage {
    let (rows, cols) = (img.rows(), img.cols());
    let mut out = Vec::with_capacity(rows * cols);
    let mut window = [0u8; 9];
    for i in 0..rows {
        for j in 0..cols {
            let mut k = 0;
            for di in [-1isize, 0, 1] {
                let r = (i as isize + di).clamp(0, rows as isize - 1) as usize;
                for dj in [-1isize, 0, 1] {
                    let c = (j as isize + dj).clamp(0, cols as isize - 1) as usize;
                    window[k] = img.get(r, c);
                    k += 1;
                }
            }
            let (_, median, _) = window.select_nth_unstable(4);
            out.push(*median);
        }
    }
    GrayImage::new(rows, cols, out).expect("same shape as input")
}

/// `(zeros, ones)` over the bit expansion.
pub fn bit_histogram(img: &GrayImage) -> (usize, usize) {
    let ones = expand_to_bits(img).count_ones();
    (8 * img.pixels().len() - ones, ones)
}

/// Encrypts a random non-constant probe under `key` and under its `1 - x0`
/// twin and reports whether the cipher images agree bit for bit.
pub fn demonstrate_equivalent_key<F: Scalar, R: Rng + ?Sized>(key: &Key<F>, rng: &mut R) -> Result<bool> {
    let probe = random_probe(rng, 16, 16);
    Ok(encrypt(&probe, key)? == encrypt(&probe, &key.mirrored())?)
}

/// Whether two keys encrypt a random non-constant probe identically.
pub fn keys_agree<F: Scalar, R: Rng + ?Sized>(a: &Key<F>, b: &Key<F>, rng: &mut R) -> Result<bool> {
    let probe = random_probe(rng, 16, 16);
    Ok(encrypt(&probe, a)? == encrypt(&probe, b)?)
}

fn random_probe<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> GrayImage {
    loop {
        let px: Vec<u8> = (0..rows * cols).map(|_| rng.gen()).collect();
        if px.iter().any(|&p| p != px[0]) {
            return GrayImage::new(rows, cols, px).expect("non-empty probe");
        }
    }
}
