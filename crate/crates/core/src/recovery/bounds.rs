//! Closed-form accuracy model of the known-plaintext attack under uniformly
//! distributed, independent plain elements.

use crate::scalar::Scalar;

/// `ceil(log2(x))` for `x >= 1`.
pub(crate) fn ceil_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    64 - (x - 1).leading_zeros()
}

/// `ceil(log_base(x))` for `x >= 1`, `base >= 2`, in exact integer arithmetic.
pub(crate) fn ceil_log(x: u64, base: u64) -> u32 {
    debug_assert!(x >= 1 && base >= 2);
    let mut k = 0;
    let mut reach: u64 = 1;
    while reach < x {
        reach = reach.saturating_mul(base);
        k += 1;
    }
    k
}

/// Known-plaintext count at which decryption by the estimated map becomes
/// acceptable on an `rows x cols` image: the least
/// `n0 > ceil(log2(8*rows*cols - 1))`.
pub fn min_known_plaintexts(rows: usize, cols: usize) -> usize {
    let bits = 8 * rows as u64 * cols as u64;
    ceil_log2(bits - 1) as usize + 1
}

/// Probability that one element's position is recovered when `grid_size`
/// elements take `levels` equiprobable values and `n0` pairs are known:
/// `1 / (1 + (grid_size - 1) / levels^n0)`.
pub fn predicted_element_accuracy<F: Scalar>(grid_size: usize, levels: usize, n0: usize) -> F {
    let fakes = F::from_usize(grid_size.saturating_sub(1)).unwrap();
    let log2_levels = F::from_usize(levels).unwrap().log2();
    let expected_fakes = fakes * (-(log2_levels * F::from_usize(n0).unwrap())).exp2();
    F::one() / (F::one() + expected_fakes)
}

/// `p_b` for the bit-permutation cipher on an `rows x cols` image.
pub fn predicted_bit_accuracy<F: Scalar>(rows: usize, cols: usize, n0: usize) -> F {
    predicted_element_accuracy(8 * rows * cols, 2, n0)
}

/// Distribution of the number of wrong bits in a recovered pixel,
/// `Binomial(8, 1 - p_b)` evaluated at `0..=8`.
pub fn error_bit_pmf<F: Scalar>(rows: usize, cols: usize, n0: usize) -> [F; 9] {
    binomial_pmf8(predicted_bit_accuracy(rows, cols, n0))
}

/// `P(i wrong bits out of 8)` when each bit is right with probability `p`.
pub fn binomial_pmf8<F: Scalar>(p: F) -> [F; 9] {
    const CHOOSE: [u32; 9] = [1, 8, 28, 56, 70, 56, 28, 8, 1];
    let q = F::one() - p;
    let mut out = [F::zero(); 9];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = F::from_u32(CHOOSE[i]).unwrap() * q.powi(i as i32) * p.powi(8 - i as i32);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plaintext_bound() {
        assert_eq!(min_known_plaintexts(256, 256), 20);
        assert_eq!(min_known_plaintexts(1, 1), 4);
        assert_eq!(min_known_plaintexts(16, 16), 12);
    }

    #[test]
    fn bound_clears_one_half() {
        for (m, n) in [(1, 1), (2, 3), (16, 16), (7, 13), (256, 256)] {
            let n0 = min_known_plaintexts(m, n);
            assert!(predicted_bit_accuracy::<f64>(m, n, n0) > 0.5);
            // the strict inequality makes the bound one larger than needed
            assert!(predicted_bit_accuracy::<f64>(m, n, n0 - 1) > 0.5);
            assert!(predicted_bit_accuracy::<f64>(m, n, n0 - 2) < 0.5);
        }
    }

    #[test]
    fn integer_logs() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(7), 3);
        assert_eq!(ceil_log2(8), 3);
        assert_eq!(ceil_log2(2047), 11);
        assert_eq!(ceil_log2((1 << 19) - 1), 19);
        assert_eq!(ceil_log(64, 256), 1);
        assert_eq!(ceil_log(257, 256), 2);
        assert_eq!(ceil_log(1, 256), 0);
        assert_eq!(ceil_log(9, 3), 2);
    }

    #[test]
    fn bit_accuracy_values() {
        let pb: f64 = predicted_bit_accuracy(16, 16, 11);
        assert!((pb - 1.0 / (1.0 + 2047.0 / 2048.0)).abs() < 1e-15);
        assert!((pb - 0.50012).abs() < 1e-5);
        let pb32: f32 = predicted_bit_accuracy(16, 16, 11);
        assert!((pb32 as f64 - pb).abs() < 1e-6);
        let near_one: f64 = predicted_bit_accuracy(16, 16, 200);
        assert!(near_one > 1.0 - 1e-12);
        let pmf: [f64; 9] = error_bit_pmf(16, 16, 200);
        assert!(pmf[0] > 1.0 - 1e-10);
    }

    #[test]
    fn pmf_sums_to_one() {
        for n0 in 1..30 {
            let s: f64 = error_bit_pmf::<f64>(16, 16, n0).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
        let s: f32 = error_bit_pmf::<f32>(5, 9, 7).iter().sum();
        assert!((s - 1.0).abs() < 1e-5);
    }
}
