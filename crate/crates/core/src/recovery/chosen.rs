//! Chosen plain images that force every leaf of the recovery tree down to a
//! single position.

use crate::image::{pack_to_image, BitMatrix, GrayImage};
use crate::recovery::bounds::{ceil_log, ceil_log2};

/// `n_c = ceil(log2(8*rows*cols))`.
pub fn chosen_plaintext_count(rows: usize, cols: usize) -> usize {
    ceil_log2(8 * rows as u64 * cols as u64) as usize
}

/// Bit-plane encoding of the label grid `B+(i, l) = i*8*cols + l`: image `t`
/// has bit `t` of each label at bit position `(i, l)`.
pub fn construct_chosen_plaintexts(rows: usize, cols: usize) -> Vec<GrayImage> {
    let n8 = cols * 8;
    (0..chosen_plaintext_count(rows, cols))
        .map(|t| {
            let bits = (0..rows * n8).map(|label| ((label >> t) & 1) as u8).collect();
            let b = BitMatrix::new(rows, n8, bits).expect("labels are bits");
            pack_to_image(&b).expect("width is a multiple of 8")
        })
        .collect()
}

/// `ceil(log_levels(rows*cols))`, at least one.
pub fn chosen_pixel_plaintext_count(rows: usize, cols: usize, levels: usize) -> usize {
    (ceil_log(rows as u64 * cols as u64, levels as u64) as usize).max(1)
}

/// Chosen images for a pixel-permutation cipher over `levels <= 256` values:
/// image `t` carries base-`levels` digit `t` of each pixel's row-major index.
pub fn construct_chosen_pixel_plaintexts(rows: usize, cols: usize, levels: usize) -> Vec<GrayImage> {
    assert!((2..=256).contains(&levels), "pixel levels must lie in 2..=256");
    let count = chosen_pixel_plaintext_count(rows, cols, levels);
    let mut place = 1usize;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let pixels = (0..rows * cols).map(|p| ((p / place) % levels) as u8).collect();
        out.push(GrayImage::new(rows, cols, pixels).expect("non-empty grid"));
        place = place.saturating_mul(levels);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::expand_to_bits;

    #[test]
    fn counts() {
        assert_eq!(chosen_plaintext_count(256, 256), 19);
        assert_eq!(chosen_plaintext_count(1, 1), 3);
        for (m, n) in [(1, 1), (2, 2), (3, 5), (16, 16), (256, 256)] {
            let mn = (m * n) as u64;
            assert_eq!(chosen_plaintext_count(m, n), 3 + ceil_log2(mn) as usize);
        }
        assert_eq!(chosen_pixel_plaintext_count(8, 8, 256), 1);
        assert_eq!(chosen_pixel_plaintext_count(16, 17, 256), 2);
        assert_eq!(chosen_pixel_plaintext_count(1, 1, 256), 1);
        assert_eq!(chosen_pixel_plaintext_count(3, 3, 2), 4);
    }

    #[test]
    fn smallest_case_is_three_bit_planes() {
        let imgs = construct_chosen_plaintexts(1, 1);
        assert_eq!(imgs.len(), 3);
        // labels 0..8 LSB-first: plane t of byte is sum over l of bit_t(l) 2^l
        assert_eq!(imgs[0].pixels(), &[0b1010_1010]);
        assert_eq!(imgs[1].pixels(), &[0b1100_1100]);
        assert_eq!(imgs[2].pixels(), &[0b1111_0000]);
    }

    #[test]
    fn planes_restack_to_labels() {
        let (m, n) = (3, 5);
        let imgs = construct_chosen_plaintexts(m, n);
        let planes: Vec<_> = imgs.iter().map(expand_to_bits).collect();
        for label in 0..m * n * 8 {
            let v: usize = planes
                .iter()
                .enumerate()
                .map(|(t, b)| (b.bits()[label] as usize) << t)
                .sum();
            assert_eq!(v, label);
        }
    }

    #[test]
    fn pixel_digits_are_distinct() {
        let imgs = construct_chosen_pixel_plaintexts(3, 3, 2);
        let mut labels: Vec<usize> = (0..9)
            .map(|p| imgs.iter().enumerate().map(|(t, im)| (im.pixels()[p] as usize) << t).sum())
            .collect();
        assert_eq!(labels, (0..9).collect::<Vec<_>>());
        labels.dedup();
        assert_eq!(labels.len(), 9);
        let one = construct_chosen_pixel_plaintexts(8, 8, 256);
        assert_eq!(one[0].pixels(), (0..64).map(|v| v as u8).collect::<Vec<_>>().as_slice());
    }
}
