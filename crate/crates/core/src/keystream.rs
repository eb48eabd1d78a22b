//! Logistic-map keystream and the rank-order permutation schedule derived
//! from it.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower edge of the admissible control-parameter interval (exclusive).
pub const MU_MIN: f64 = 3.569945672;
/// Upper edge of the admissible control-parameter interval (exclusive).
pub const MU_MAX: f64 = 4.0;

/// Secret key `(x0, mu, m, n, T)`.
///
/// `m` and `n` are the offsets into the chaotic sequence at which the row
/// and column segments start; `rounds` is the repetition count `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Key<F> {
    x0: F,
    mu: F,
    m: usize,
    n: usize,
    rounds: usize,
}

impl<F: Scalar> Key<F> {
    pub fn new(x0: F, mu: F, m: usize, n: usize, rounds: usize) -> Result<Self> {
        check_seed(x0)?;
        check_mu(mu)?;
        if m == 0 || n == 0 || rounds == 0 {
            return Err(Error::InvalidKeyDomain(format!(
                "m, n and T must be positive (got m={m}, n={n}, T={rounds})"
            )));
        }
        Ok(Self {
            x0,
            mu,
            m,
            n,
            rounds,
        })
    }

    pub fn x0(&self) -> F {
        self.x0
    }

    pub fn mu(&self) -> F {
        self.mu
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Same key with the initial condition replaced. Used for round reseeding.
    pub fn reseeded(&self, x0: F) -> Result<Self> {
        check_seed(x0)?;
        Ok(Self { x0, ..*self })
    }

    /// The equivalent key with initial condition `1 - x0`.
    pub fn mirrored(&self) -> Self {
        Self {
            x0: F::one() - self.x0,
            ..*self
        }
    }
}

impl<F: Scalar> fmt::Display for Key<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {}",
            self.x0, self.mu, self.m, self.n, self.rounds
        )
    }
}

/// Parses the one-line text form `x0 mu m n T`.
impl<F: Scalar + FromStr> FromStr for Key<F> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(Error::Parse(format!(
                "key needs 5 fields `x0 mu m n T`, found {}",
                fields.len()
            )));
        }
        let real = |name: &str, s: &str| -> Result<F> {
            s.parse::<F>()
                .map_err(|_| Error::Parse(format!("{name}: `{s}` is not a real number")))
        };
        let int = |name: &str, s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("{name}: `{s}` is not a non-negative integer")))
        };
        Key::new(
            real("x0", fields[0])?,
            real("mu", fields[1])?,
            int("m", fields[2])?,
            int("n", fields[3])?,
            int("T", fields[4])?,
        )
    }
}

fn check_seed<F: Scalar>(x: F) -> Result<()> {
    if x > F::zero() && x < F::one() {
        Ok(())
    } else {
        Err(Error::InvalidKeyDomain(format!(
            "x0 must lie in (0, 1), got {x}"
        )))
    }
}

fn check_mu<F: Scalar>(mu: F) -> Result<()> {
    if mu > F::lit(MU_MIN) && mu < F::lit(MU_MAX) {
        Ok(())
    } else {
        Err(Error::InvalidKeyDomain(format!(
            "mu must lie in ({MU_MIN}, {MU_MAX}), got {mu}"
        )))
    }
}

/// One iteration of the Logistic map, `mu * x * (1 - x)`.
pub fn logistic_step<F: Scalar>(x: F, mu: F) -> Result<F> {
    check_seed(x)?;
    check_mu(mu)?;
    Ok(step(x, mu))
}

/// Evaluated on the folded argument `u = max(x, 1 - x)`. For `u` in
/// `[0.5, 1)` the subtraction `1 - u` is exact, so `step(x) == step(1 - x)`
/// holds bit for bit and not only in real arithmetic.
#[inline(always)]
fn step<F: Scalar>(x: F, mu: F) -> F {
    let half = F::lit(0.5);
    let u = if x < half { F::one() - x } else { x };
    mu * u * (F::one() - u)
}

/// A run `x_1 ... x_len` of the map started from `origin_x0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaoticSequence<F> {
    values: Vec<F>,
    origin_x0: F,
}

impl<F: Scalar> ChaoticSequence<F> {
    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn origin_x0(&self) -> F {
        self.origin_x0
    }

    /// Last generated value; seeds the next cipher round.
    pub fn final_state(&self) -> F {
        *self.values.last().expect("sequence is never empty")
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Iterates the map `len` times from the key's `x0`. The seed itself is not
/// part of the output: `values[0] = f(x0)`.
pub fn generate_sequence<F: Scalar>(key: &Key<F>, len: usize) -> Result<ChaoticSequence<F>> {
    iterate(key.x0, key.mu, len)
}

fn iterate<F: Scalar>(x0: F, mu: F, len: usize) -> Result<ChaoticSequence<F>> {
    if len == 0 {
        return Err(Error::Shape("sequence length must be positive".into()));
    }
    let mut values = Vec::with_capacity(len);
    let mut x = x0;
    for _ in 0..len {
        x = step(x, mu);
        values.push(x);
    }
    Ok(ChaoticSequence {
        values,
        origin_x0: x0,
    })
}

/// Permutation of `0..len` listing source indices from largest to smallest
/// value.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankVector {
    indices: Vec<usize>,
}

impl RankVector {
    pub fn identity(len: usize) -> Self {
        Self {
            indices: (0..len).collect(),
        }
    }

    /// Wraps `indices`, checking that it is a permutation of `0..len`.
    pub fn from_indices(indices: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; indices.len()];
        for &i in &indices {
            if i >= seen.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Shape(format!(
                    "{indices:?} is not a permutation of 0..{}",
                    seen.len()
                )));
            }
        }
        Ok(Self { indices })
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

impl std::ops::Index<usize> for RankVector {
    type Output = usize;

    fn index(&self, i: usize) -> &usize {
        &self.indices[i]
    }
}

/// Ranks `segment` in descending order. Equal values keep ascending index
/// order.
pub fn rank_vector<F: PartialOrd>(segment: &[F]) -> Result<RankVector> {
    if segment.is_empty() {
        return Err(Error::EmptySegment);
    }
    let mut indices: Vec<usize> = (0..segment.len()).collect();
    // sort_by is stable, so ties stay in index order
    indices.sort_by(|&a, &b| {
        segment[b]
            .partial_cmp(&segment[a])
            .unwrap_or(Ordering::Equal)
    });
    Ok(RankVector { indices })
}

/// Row permutation `T_M` and per-row column permutations `T_N` for one round.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule<F> {
    pub row_perm: RankVector,
    pub col_perms: Vec<RankVector>,
    /// Last iterate of the sequence the schedule was cut from.
    pub final_state: F,
}

impl<F: Scalar> Schedule<F> {
    /// Schedule that leaves every bit in place. Not reachable from a key.
    pub fn identity(rows: usize, cols: usize) -> Self {
        Self {
            row_perm: RankVector::identity(rows),
            col_perms: vec![RankVector::identity(cols); rows],
            final_state: F::zero(),
        }
    }

    pub fn rows(&self) -> usize {
        self.row_perm.len()
    }

    pub fn cols(&self) -> usize {
        self.col_perms.first().map_or(0, RankVector::len)
    }
}

/// Number of iterates one round consumes for an `rows x cols` bit matrix.
pub fn schedule_len(m: usize, n: usize, rows: usize, cols: usize) -> usize {
    (m + rows).max(n + rows * cols)
}

/// Builds the round schedule for a `rows x cols` bit matrix from the key's
/// current `x0`.
pub fn build_schedule<F: Scalar>(key: &Key<F>, rows: usize, cols: usize) -> Result<Schedule<F>> {
    if rows == 0 || cols == 0 {
        return Err(Error::Shape(format!(
            "schedule dimensions must be positive, got {rows}x{cols}"
        )));
    }
    let seq = generate_sequence(key, schedule_len(key.m, key.n, rows, cols))?;
    let xs = seq.values();
    // x_{m+k}, k = 1..=rows lives at values[m + k - 1]
    let row_perm = rank_vector(&xs[key.m..key.m + rows])?;
    let col_perms = (0..rows)
        .map(|i| {
            let start = key.n + cols * i;
            rank_vector(&xs[start..start + cols])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Schedule {
        row_perm,
        col_perms,
        final_state: seq.final_state(),
    })
}

/// Counts of the first `count` iterates from `x0` falling in each of `bins`
/// equal-width bins over `(0, 1)`.
pub fn trajectory_histogram<F: Scalar>(x0: F, mu: F, count: usize, bins: usize) -> Result<Vec<usize>> {
    check_seed(x0)?;
    if !(mu > F::zero() && mu < F::lit(MU_MAX)) {
        return Err(Error::InvalidKeyDomain(format!(
            "mu must lie in (0, 4) for a bounded trajectory, got {mu}"
        )));
    }
    if bins == 0 || count < bins {
        return Err(Error::Shape(format!(
            "need count >= bins >= 1, got count={count}, bins={bins}"
        )));
    }
    let mut hist = vec![0usize; bins];
    let scale = F::from_usize(bins).expect("bin count fits scalar");
    let mut x = x0;
    for _ in 0..count {
        x = step(x, mu);
        let b = (x * scale).floor().to_usize().unwrap_or(0).min(bins - 1);
        hist[b] += 1;
    }
    Ok(hist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn key(x0: f64, mu: f64, m: usize, n: usize, t: usize) -> Key<f64> {
        Key::new(x0, mu, m, n, t).unwrap()
    }

    #[test]
    fn step_values() {
        assert!((logistic_step(0.5f64, 3.98).unwrap() - 0.995).abs() < 1e-15);
        // 30-digit evaluation: 0.6389459762
        assert!((logistic_step(0.2009f64, 3.98).unwrap() - 0.6389459762).abs() < 1e-12);
        for &x in &[0.1, 0.2009, 0.37, 0.999] {
            assert_eq!(
                logistic_step(x, 3.9).unwrap(),
                logistic_step(1.0 - x, 3.9).unwrap()
            );
        }
    }

    #[test]
    fn step_rejects_out_of_domain() {
        assert!(matches!(logistic_step(0.0, 3.9), Err(Error::InvalidKeyDomain(_))));
        assert!(matches!(logistic_step(1.0, 3.9), Err(Error::InvalidKeyDomain(_))));
        assert!(matches!(logistic_step(0.5, 4.0), Err(Error::InvalidKeyDomain(_))));
        assert!(matches!(logistic_step(0.5, 3.5), Err(Error::InvalidKeyDomain(_))));
    }

    #[test]
    fn two_iterates_from_half() {
        let seq = generate_sequence(&key(0.5, 3.98, 1, 1, 1), 2).unwrap();
        assert!((seq.values()[0] - 0.995).abs() < 1e-15);
        assert!((seq.values()[1] - 0.0198005).abs() < 1e-15);
        assert_eq!(seq.final_state(), seq.values()[1]);

        let one = generate_sequence(&key(0.3, 3.9, 1, 1, 1), 1).unwrap();
        assert_eq!(one.values(), &[logistic_step(0.3, 3.9).unwrap()]);
    }

    #[test]
    fn f32_keystream() {
        let k = Key::<f32>::new(0.2009, 3.98, 20, 51, 4).unwrap();
        let seq = generate_sequence(&k, 100).unwrap();
        assert!(seq.values().iter().all(|&x| x > 0.0 && x < 1.0));
        assert!((seq.values()[0] - 0.638_946).abs() < 1e-5);
    }

    #[test]
    fn key_parsing() {
        let k: Key<f64> = "0.2009 3.98 20 51 4".parse().unwrap();
        assert_eq!(k, key(0.2009, 3.98, 20, 51, 4));
        assert_eq!(k.to_string().parse::<Key<f64>>().unwrap(), k);
        assert!(matches!(
            "0.2 4.1 20 51 4".parse::<Key<f64>>(),
            Err(Error::InvalidKeyDomain(_))
        ));
        assert!(matches!("0.2 3.9 0 1 1".parse::<Key<f64>>(), Err(Error::InvalidKeyDomain(_))));
        assert!(matches!("0.2 3.9 1 1".parse::<Key<f64>>(), Err(Error::Parse(_))));
        assert!(matches!("0.2 3.9 a 1 1".parse::<Key<f64>>(), Err(Error::Parse(_))));
    }

    #[test]
    fn ranks() {
        assert_eq!(rank_vector(&[0.3, 0.9, 0.5]).unwrap().as_slice(), &[1, 2, 0]);
        assert_eq!(rank_vector(&[0.5, 0.5]).unwrap().as_slice(), &[0, 1]);
        assert_eq!(rank_vector(&[0.7]).unwrap().as_slice(), &[0]);
        assert_eq!(rank_vector::<f64>(&[]), Err(Error::EmptySegment));
    }

    #[test]
    fn single_row_schedule() {
        let s = build_schedule(&key(0.2009, 3.98, 20, 51, 4), 1, 8).unwrap();
        assert_eq!(s.row_perm.as_slice(), &[0]);
        assert_eq!(s.col_perms.len(), 1);
        assert_eq!(s.col_perms[0].len(), 8);
    }

    /// Straight transcription of the initialization procedure: 1-based
    /// sequence, selection of the (i+1)-th largest element by repeated scans.
    fn schedule_oracle(x0: f64, mu: f64, m: usize, n: usize, rows: usize, cols: usize) -> (Vec<usize>, Vec<Vec<usize>>, f64) {
        let len = std::cmp::max(m + rows, n + cols * rows);
        let mut x = vec![0.0; len + 1];
        x[0] = x0;
        for k in 1..=len {
            // same evaluation order as the library: fold onto [0.5, 1) first
            let u = if x[k - 1] < 0.5 { 1.0 - x[k - 1] } else { x[k - 1] };
            x[k] = mu * u * (1.0 - u);
        }
        let select = |s: &[f64]| {
            let mut taken = vec![false; s.len()];
            let mut out = Vec::new();
            for _ in 0..s.len() {
                let mut best: Option<usize> = None;
                for j in 0..s.len() {
                    if !taken[j] && best.is_none_or(|b| s[j] > s[b]) {
                        best = Some(j);
                    }
                }
                taken[best.unwrap()] = true;
                out.push(best.unwrap());
            }
            out
        };
        let sm: Vec<f64> = (1..=rows).map(|k| x[m + k]).collect();
        let tn = (0..rows)
            .map(|i| {
                let sn: Vec<f64> = (1..=cols).map(|k| x[n + cols * i + k]).collect();
                select(&sn)
            })
            .collect();
        (select(&sm), tn, x[len])
    }

    #[test]
    fn schedule_matches_transcription() {
        let k = key(0.2009, 3.98, 20, 51, 4);
        let s = build_schedule(&k, 2, 8).unwrap();
        let (tm, tn, last) = schedule_oracle(0.2009, 3.98, 20, 51, 2, 8);
        assert_eq!(s.row_perm.as_slice(), tm.as_slice());
        for (got, want) in s.col_perms.iter().zip(&tn) {
            assert_eq!(got.as_slice(), want.as_slice());
        }
        assert_eq!(s.final_state, last);

        let k = key(0.731, 3.77, 3, 9, 1);
        let s = build_schedule(&k, 5, 24).unwrap();
        let (tm, tn, last) = schedule_oracle(0.731, 3.77, 3, 9, 5, 24);
        assert_eq!(s.row_perm.as_slice(), tm.as_slice());
        assert_eq!(
            s.col_perms.iter().map(|r| r.as_slice().to_vec()).collect::<Vec<_>>(),
            tn
        );
        assert_eq!(s.final_state, last);
    }

    #[test]
    fn trajectory_histograms() {
        for x0 in [0.3333, 0.5656] {
            let h = trajectory_histogram(x0, 3.5786, 10_000, 50).unwrap();
            assert_eq!(h.iter().sum::<usize>(), 10_000);
            let max = *h.iter().max().unwrap();
            let min = *h.iter().min().unwrap();
            assert!(max > 2 * min, "histogram too flat: {h:?}");
        }
        assert_eq!(trajectory_histogram(0.4, 3.9, 123, 1).unwrap(), vec![123]);
        assert!(trajectory_histogram(0.4, 3.9, 3, 5).is_err());
    }

    #[test]
    fn iterates_stay_in_unit_interval() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let k = key(rng.gen_range(1e-9..1.0 - 1e-9), rng.gen_range(3.57..3.999_999), 1, 1, 1);
            let seq = generate_sequence(&k, 10_000).unwrap();
            assert!(seq.values().iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    proptest! {
        #[test]
        fn rank_is_sorted_permutation(seg in prop::collection::vec(0.0f64..1.0, 1..64)) {
            let r = rank_vector(&seg).unwrap();
            let mut seen = r.as_slice().to_vec();
            seen.sort_unstable();
            prop_assert_eq!(seen, (0..seg.len()).collect::<Vec<_>>());
            for w in r.as_slice().windows(2) {
                prop_assert!(seg[w[0]] >= seg[w[1]]);
            }
            // naive selection: the i-th pick is the largest remaining value
            let mut rest: Vec<usize> = (0..seg.len()).collect();
            for &got in r.as_slice() {
                let best = rest.iter().copied().fold(rest[0], |b, j| if seg[j] > seg[b] { j } else { b });
                prop_assert_eq!(seg[got], seg[best]);
                rest.retain(|&j| j != got);
            }
        }

        #[test]
        fn mirrored_seed_gives_identical_sequence(x0 in 0.001f64..0.999, mu in 3.57f64..3.9999, len in 1usize..500) {
            let a = generate_sequence(&key(x0, mu, 1, 1, 1), len).unwrap();
            let b = generate_sequence(&key(1.0 - x0, mu, 1, 1, 1), len).unwrap();
            prop_assert_eq!(a.values(), b.values());
        }
    }
}
