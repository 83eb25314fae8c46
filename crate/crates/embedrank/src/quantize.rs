//! Binarization of float embeddings into bit-packed codes.
//!
//! Codes are packed into 64-bit words, little-endian bit order within each
//! word: logical bit `i` lives at bit `i % 64` of word `i / 64`. Pad bits
//! beyond the logical length are always zero.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::embedding::EmbeddingSet;
use crate::error::{Error, Result};
use crate::io::{expect_magic, read_u32_vec, truncated, write_u32_slice};

const BIN_MAGIC: &[u8; 4] = b"BIN1";

/// N bit-packed codes with Hamming geometry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryCodeSet {
    n: usize,
    bits: usize,
    words_per_code: usize,
    words: Vec<u64>,
    labels: Vec<u32>,
}

/// Borrowed view of a single packed code.
#[derive(Debug, Clone, Copy)]
pub struct BinaryCode<'a> {
    bits: usize,
    words: &'a [u64],
}

impl<'a> BinaryCode<'a> {
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn words(&self) -> &'a [u64] {
        self.words
    }

    pub fn bit(&self, i: usize) -> bool {
        assert!(i < self.bits, "bit index {i} out of range ({})", self.bits);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }
}

impl BinaryCodeSet {
    fn with_capacity(n: usize, bits: usize, labels: Vec<u32>) -> Self {
        let words_per_code = bits.div_ceil(64);
        BinaryCodeSet {
            n,
            bits,
            words_per_code,
            words: vec![0_u64; n * words_per_code],
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Logical code length per item.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn code(&self, i: usize) -> BinaryCode<'_> {
        let start = i * self.words_per_code;
        BinaryCode {
            bits: self.bits,
            words: &self.words[start..start + self.words_per_code],
        }
    }

    /// Bytes occupied by the packed code payload: a 64-bit code for N items
    /// takes exactly 8·N bytes.
    pub fn code_bytes(&self) -> usize {
        self.words.len() * 8
    }

    /// Every pad bit beyond the logical length is zero.
    pub fn pad_bits_clear(&self) -> bool {
        let tail = self.bits % 64;
        if tail == 0 {
            return true;
        }
        let mask = !((1_u64 << tail) - 1);
        (0..self.n).all(|i| self.words[(i + 1) * self.words_per_code - 1] & mask == 0)
    }

    fn set_bit(&mut self, item: usize, bit: usize) {
        self.words[item * self.words_per_code + bit / 64] |= 1 << (bit % 64);
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path.as_ref())?);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let mut r = BufReader::new(File::open(path.as_ref())?);
        Self::read(&mut r)
    }

    pub(crate) fn write(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(BIN_MAGIC)?;
        w.write_u32::<LittleEndian>(self.n as u32)?;
        w.write_u32::<LittleEndian>(self.bits as u32)?;
        for &word in &self.words {
            w.write_u64::<LittleEndian>(word)?;
        }
        write_u32_slice(w, &self.labels)?;
        Ok(())
    }

    pub(crate) fn read(r: &mut impl Read) -> Result<Self> {
        expect_magic(r, BIN_MAGIC)?;
        let n = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        let bits = r.read_u32::<LittleEndian>().map_err(truncated)? as usize;
        if n == 0 || bits == 0 {
            return Err(Error::format(format!("invalid BIN1 header: n={n}, bits={bits}")));
        }
        let words_per_code = bits.div_ceil(64);
        let mut words = vec![0_u64; n * words_per_code];
        r.read_u64_into::<LittleEndian>(&mut words).map_err(truncated)?;
        let labels = read_u32_vec(r, n)?;
        let set = BinaryCodeSet {
            n,
            bits,
            words_per_code,
            words,
            labels,
        };
        if !set.pad_bits_clear() {
            return Err(Error::format("BIN1 pad bits are not zero"));
        }
        Ok(set)
    }
}

/// Sign binarization: bit = 1 iff the component is strictly positive, so
/// zero maps to 0.
pub fn binarize_sign(x: &EmbeddingSet) -> BinaryCodeSet {
    binarize_by(x, |v| v > 0.0)
}

/// Threshold binarization for sigmoid activations: bit = 1 iff the component
/// is strictly greater than `threshold`.
pub fn binarize_sigmoid(x: &EmbeddingSet, threshold: f32) -> BinaryCodeSet {
    binarize_by(x, |v| v > threshold)
}

fn binarize_by(x: &EmbeddingSet, predicate: impl Fn(f32) -> bool) -> BinaryCodeSet {
    let mut out = BinaryCodeSet::with_capacity(x.len(), x.dim(), x.labels().to_vec());
    for (i, row) in x.vectors().rows().into_iter().enumerate() {
        for (bit, &v) in row.iter().enumerate() {
            if predicate(v) {
                out.set_bit(i, bit);
            }
        }
    }
    debug_assert!(out.pad_bits_clear());
    out
}
