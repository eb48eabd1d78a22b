//! Grayscale images, their bit-plane expansion, and binary PGM (P5) I/O.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// An `rows x cols` 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, pixels: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("image must be non-empty, got {rows}x{cols}")));
        }
        if pixels.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} image needs {} pixels, got {}",
                rows * cols,
                pixels.len()
            )));
        }
        Ok(Self { rows, cols, pixels })
    }

    pub fn filled(rows: usize, cols: usize, value: u8) -> Result<Self> {
        Self::new(rows, cols, vec![value; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.pixels[i * self.cols + j]
    }

    pub fn same_shape(&self, other: &GrayImage) -> Result<()> {
        if self.rows == other.rows && self.cols == other.cols {
            Ok(())
        } else {
            Err(Error::Shape(format!(
                "{}x{} image vs {}x{} image",
                self.rows, self.cols, other.rows, other.cols
            )))
        }
    }

    /// Reads a binary PGM (`P5`, maxval 255).
    pub fn read_pgm<R: BufRead>(mut r: R) -> Result<Self> {
        let magic = pgm_token(&mut r)?;
        if magic != "P5" {
            return Err(Error::Parse(format!("expected PGM magic P5, found `{magic}`")));
        }
        let cols = pgm_number(&mut r, "width")?;
        let rows = pgm_number(&mut r, "height")?;
        let maxval = pgm_number(&mut r, "maxval")?;
        if maxval != 255 {
            return Err(Error::Parse(format!("only maxval 255 is supported, got {maxval}")));
        }
        // pgm_token consumed exactly one whitespace byte after maxval
        let mut pixels = vec![0u8; rows * cols];
        r.read_exact(&mut pixels)
            .map_err(|e| Error::Parse(format!("truncated PGM raster: {e}")))?;
        Self::new(rows, cols, pixels)
    }

    pub fn write_pgm<W: Write>(&self, mut w: W) -> Result<()> {
        write!(w, "P5\n{} {}\n255\n", self.cols, self.rows)?;
        w.write_all(&self.pixels)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::read_pgm(std::io::BufReader::new(f))
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let path = path.as_ref();
        let f = std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.write_pgm(std::io::BufWriter::new(f))
    }
}

/// Next header token, skipping whitespace and `#` comments. Consumes the single
/// whitespace byte that terminates the token.
fn pgm_token<R: BufRead>(r: &mut R) -> Result<String> {
    let mut tok = String::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            if tok.is_empty() {
                return Err(Error::Parse("unexpected end of PGM header".into()));
            }
            return Ok(tok);
        }
        let c = byte[0];
        if c == b'#' && tok.is_empty() {
            let mut comment = Vec::new();
            r.read_until(b'\n', &mut comment)?;
        } else if c.is_ascii_whitespace() {
            if !tok.is_empty() {
                return Ok(tok);
            }
        } else {
            tok.push(c as char);
        }
    }
}

fn pgm_number<R: BufRead>(r: &mut R, what: &str) -> Result<usize> {
    let tok = pgm_token(r)?;
    tok.parse()
        .map_err(|_| Error::Parse(format!("PGM {what}: `{tok}` is not a number")))
}

/// An `rows x cols` matrix of bits stored one per byte.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u8>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize, bits: Vec<u8>) -> Result<Self> {
        if bits.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} bit matrix needs {} entries, got {}",
                rows * cols,
                bits.len()
            )));
        }
        if let Some(p) = bits.iter().position(|&b| b > 1) {
            return Err(Error::ValueOutOfRange {
                position: p,
                value: bits[p] as u32,
                levels: 2,
            });
        }
        Ok(Self { rows, cols, bits })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn get(&self, i: usize, l: usize) -> u8 {
        self.bits[i * self.cols + l]
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.bits[i * self.cols..(i + 1) * self.cols]
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, bits: Vec<u8>) -> Self {
        debug_assert_eq!(bits.len(), rows * cols);
        Self { rows, cols, bits }
    }
}

/// Bit `k` of pixel `(i, j)` lands in column `8j + k`, least significant bit
/// first.
pub fn expand_to_bits(img: &GrayImage) -> BitMatrix {
    let mut bits = Vec::with_capacity(img.pixels.len() * 8);
    for &p in &img.pixels {
        bits.extend((0..8).map(|k| (p >> k) & 1));
    }
    BitMatrix::from_raw(img.rows, img.cols * 8, bits)
}

/// Inverse of [`expand_to_bits`].
pub fn pack_to_image(bits: &BitMatrix) -> Result<GrayImage> {
    if !bits.cols.is_multiple_of(8) {
        return Err(Error::Shape(format!(
            "bit matrix width {} is not a multiple of 8",
            bits.cols
        )));
    }
    let pixels = bits
        .bits
        .chunks_exact(8)
        .map(|byte| byte.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | (b << k)))
        .collect();
    GrayImage::new(bits.rows, bits.cols / 8, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn img(rows: usize, cols: usize, px: &[u8]) -> GrayImage {
        GrayImage::new(rows, cols, px.to_vec()).unwrap()
    }

    #[test]
    fn expansion_is_lsb_first() {
        assert_eq!(expand_to_bits(&img(1, 1, &[5])).bits(), &[1, 0, 1, 0, 0, 0, 0, 0]);
        assert_eq!(expand_to_bits(&img(1, 1, &[0])).bits(), &[0; 8]);
        assert_eq!(
            expand_to_bits(&img(1, 2, &[255, 128])).bits(),
            &[1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0, 1]
        );
    }

    #[test]
    fn packing() {
        let ones = BitMatrix::new(1, 8, vec![1; 8]).unwrap();
        assert_eq!(pack_to_image(&ones).unwrap().pixels(), &[255]);
        let two = BitMatrix::new(1, 8, vec![0, 1, 0, 0, 0, 0, 0, 0]).unwrap();
        assert_eq!(pack_to_image(&two).unwrap().pixels(), &[2]);
        let odd = BitMatrix::new(1, 7, vec![0; 7]).unwrap();
        assert!(matches!(pack_to_image(&odd), Err(Error::Shape(_))));
    }

    #[test]
    fn constructor_checks() {
        assert!(GrayImage::new(2, 2, vec![0; 3]).is_err());
        assert!(GrayImage::new(0, 2, vec![]).is_err());
        assert!(matches!(
            BitMatrix::new(1, 2, vec![0, 2]),
            Err(Error::ValueOutOfRange { position: 1, .. })
        ));
    }

    #[test]
    fn pgm_with_comment() {
        let data = b"P5\n# made by hand\n3 2\n255\n\x00\x01\x02\x03\x04\xff";
        let im = GrayImage::read_pgm(&data[..]).unwrap();
        assert_eq!((im.rows(), im.cols()), (2, 3));
        assert_eq!(im.pixels(), &[0, 1, 2, 3, 4, 255]);
        assert_eq!(im.get(1, 2), 255);
    }

    #[test]
    fn pgm_first_pixel_is_whitespace_byte() {
        // raster begins with 0x0a and 0x20, which must not be eaten as header
        let data = b"P5 2 1 255\n\x0a\x20";
        assert_eq!(GrayImage::read_pgm(&data[..]).unwrap().pixels(), &[0x0a, 0x20]);
    }

    #[test]
    fn pgm_rejects_bad_input() {
        assert!(GrayImage::read_pgm(&b"P2\n1 1\n255\n0"[..]).is_err());
        assert!(GrayImage::read_pgm(&b"P5\n1 1\n65535\n\x00\x00"[..]).is_err());
        assert!(GrayImage::read_pgm(&b"P5\n2 2\n255\n\x00"[..]).is_err());
    }

    proptest! {
        #[test]
        fn pack_inverts_expand(rows in 1usize..6, cols in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let im = GrayImage::new(rows, cols, (0..rows * cols).map(|_| rng.gen()).collect()).unwrap();
            prop_assert_eq!(pack_to_image(&expand_to_bits(&im)).unwrap(), im.clone());

            let mut buf = Vec::new();
            im.write_pgm(&mut buf).unwrap();
            prop_assert_eq!(GrayImage::read_pgm(&buf[..]).unwrap(), im);
        }
    }
}
