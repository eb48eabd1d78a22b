//! Position bijections on a rectangular grid.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::image::{BitMatrix, GrayImage};

/// Bijection `w` on `{0..rows} x {0..cols}`: the element at plain position
/// `(i, l)` sits at `w(i, l)` in the cipher grid.
///
/// Positions are stored flattened, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PermutationMap {
    rows: usize,
    cols: usize,
    target: Vec<usize>,
}

impl PermutationMap {
    pub fn new(rows: usize, cols: usize, target: Vec<usize>) -> Result<Self> {
        let size = rows * cols;
        if target.len() != size {
            return Err(Error::Shape(format!(
                "{rows}x{cols} map needs {size} targets, got {}",
                target.len()
            )));
        }
        let mut hit = vec![false; size];
        for (p, &t) in target.iter().enumerate() {
            if t >= size {
                return Err(Error::Shape(format!("target {t} of position {p} is off the grid")));
            }
            if std::mem::replace(&mut hit[t], true) {
                return Err(Error::Shape(format!("target {t} is hit twice; not a bijection")));
            }
        }
        Ok(Self { rows, cols, target })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, target: Vec<usize>) -> Self {
        debug_assert_eq!(target.len(), rows * cols);
        Self { rows, cols, target }
    }

    pub fn identity(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, (0..rows * cols).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.target.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    /// Flattened targets, indexed by flattened plain position.
    pub fn targets(&self) -> &[usize] {
        &self.target
    }

    /// `w(i, l) = (i', l')`.
    pub fn get(&self, i: usize, l: usize) -> (usize, usize) {
        let t = self.target[i * self.cols + l];
        (t / self.cols, t % self.cols)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.target.len()];
        for (p, &t) in self.target.iter().enumerate() {
            inv[t] = p;
        }
        Self::from_raw(self.rows, self.cols, inv)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &PermutationMap) -> Result<Self> {
        self.check_dims(next.rows, next.cols)?;
        Ok(Self::from_raw(
            self.rows,
            self.cols,
            self.target.iter().map(|&t| next.target[t]).collect(),
        ))
    }

    fn check_dims(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rows == rows && self.cols == cols {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{}x{} map applied to {rows}x{cols} grid",
                self.rows, self.cols
            )))
        }
    }

    /// Moves every element of a flattened grid to its target.
    pub fn scatter<T: Copy + Default>(&self, plain: &[T]) -> Result<Vec<T>> {
        if plain.len() != self.target.len() {
            return Err(Error::Shape(format!(
                "map of {} positions applied to {} elements",
                self.target.len(),
                plain.len()
            )));
        }
        let mut out = vec![T::default(); plain.len()];
        for (&t, &v) in self.target.iter().zip(plain) {
            out[t] = v;
        }
        Ok(out)
    }

    /// Pulls every element back from its target; inverse of [`scatter`](Self::scatter).
    pub fn gather<T: Copy>(&self, cipher: &[T]) -> Result<Vec<T>> {
        if cipher.len() != self.target.len() {
            return Err(Error::Shape(format!(
                "map of {} positions applied to {} elements",
                self.target.len(),
                cipher.len()
            )));
        }
        Ok(self.target.iter().map(|&t| cipher[t]).collect())
    }

    /// Text form: header `rows cols`, then one `i l i' l'` line per position.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{} {}", self.rows, self.cols)?;
        for i in 0..self.rows {
            for l in 0..self.cols {
                let (ti, tl) = self.get(i, l);
                writeln!(w, "{i} {l} {ti} {tl}")?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines().filter(|l| l.as_ref().map_or(true, |s| !s.trim().is_empty()));
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty permutation file".into()))??;
        let dims = parse_fields::<2>(&header)?;
        let (rows, cols) = (dims[0], dims[1]);
        let mut target = vec![usize::MAX; rows * cols];
        for line in lines {
            let [i, l, ti, tl] = parse_fields::<4>(&line?)?;
            if i >= rows || l >= cols || ti >= rows || tl >= cols {
                return Err(Error::Parse(format!("entry {i} {l} {ti} {tl} is off the {rows}x{cols} grid")));
            }
            let slot = &mut target[i * cols + l];
            if *slot != usize::MAX {
                return Err(Error::Parse(format!("position {i} {l} listed twice")));
            }
            *slot = ti * cols + tl;
        }
        if target.contains(&usize::MAX) {
            return Err(Error::Parse("permutation file does not cover every position".into()));
        }
        Self::new(rows, cols, target)
    }
}

fn parse_fields<const K: usize>(line: &str) -> Result<[usize; K]> {
    let mut out = [0usize; K];
    let mut it = line.split_whitespace();
    for slot in out.iter_mut() {
        let tok = it
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {K} integers in `{line}`")))?;
        *slot = tok
            .parse()
            .map_err(|_| Error::Parse(format!("`{tok}` is not a non-negative integer")))?;
    }
    if it.next().is_some() {
        return Err(Error::Parse(format!("expected {K} integers in `{line}`")));
    }
    Ok(out)
}

/// Encrypts a bit matrix with `w`.
pub fn apply_map(w: &PermutationMap, b: &BitMatrix) -> Result<BitMatrix> {
    w.check_dims(b.rows(), b.cols())?;
    Ok(BitMatrix::from_raw(b.rows(), b.cols(), w.scatter(b.bits())?))
}

/// Decrypts a bit matrix with `w`, i.e. applies `w^{-1}`.
pub fn apply_inverse(w: &PermutationMap, b: &BitMatrix) -> Result<BitMatrix> {
    w.check_dims(b.rows(), b.cols())?;
    Ok(BitMatrix::from_raw(b.rows(), b.cols(), w.gather(b.bits())?))
}

/// Pixel-level counterpart of [`apply_map`].
pub fn apply_map_pixels(w: &PermutationMap, img: &GrayImage) -> Result<GrayImage> {
    w.check_dims(img.rows(), img.cols())?;
    GrayImage::new(img.rows(), img.cols(), w.scatter(img.pixels())?)
}

/// Pixel-level counterpart of [`apply_inverse`].
pub fn apply_inverse_pixels(w: &PermutationMap, img: &GrayImage) -> Result<GrayImage> {
    w.check_dims(img.rows(), img.cols())?;
    GrayImage::new(img.rows(), img.cols(), w.gather(img.pixels())?)
}
