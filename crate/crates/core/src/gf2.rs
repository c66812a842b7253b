//! Dense matrices over GF(2).
//!
//! Rows are packed into `u64` words, least-significant bit first, so that
//! row operations run word-parallel. Every public operation is defined
//! entry-wise; the packing never leaks into behaviour.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const WORD_BITS: usize = 64;

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A dense binary matrix stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Result of [`BitMatrix::row_reduce`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowEchelon {
    /// Reduced row-echelon form of the input.
    pub reduced: BitMatrix,
    pub rank: usize,
    /// Pivot column of each nonzero row, strictly increasing.
    pub pivot_cols: Vec<usize>,
}

impl BitMatrix {
    /// All-zero matrix. Zero-sized dimensions are allowed so that fully
    /// erased column selections can be represented.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from rows of 0/1 values. All rows must have the same
    /// nonzero length and every entry must be 0 or 1.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let nrows = rows.len();
        if nrows == 0 {
            return Err(Error::Parse("matrix has no rows".into()));
        }
        let ncols = rows[0].as_ref().len();
        if ncols == 0 {
            return Err(Error::Parse("matrix has no columns".into()));
        }
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != ncols {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            for (j, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(i, j, true),
                    other => return Err(Error::Parse(format!("entry ({i},{j}) is {other}, not 0/1"))),
                }
            }
        }
        Ok(m)
    }

    /// Parses rows written as strings of '0'/'1'. Whitespace inside a row is
    /// ignored, so `"1 0 1"` and `"101"` are the same row.
    pub fn from_row_strings<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.as_ref()
                    .chars()
                    .filter(|c| !c.is_whitespace())
                    .map(|c| match c {
                        '0' => Ok(0u8),
                        '1' => Ok(1u8),
                        other => Err(Error::Parse(format!("unexpected character {other:?}"))),
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(&parsed)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        (self.data[i * self.stride + j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        let w = &mut self.data[i * self.stride + j / WORD_BITS];
        let mask = 1u64 << (j % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub(crate) fn row_words(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    /// Entries of row `i` as booleans.
    pub fn row(&self, i: usize) -> Vec<bool> {
        (0..self.cols).map(|j| self.get(i, j)).collect()
    }

    pub fn row_weight(&self, i: usize) -> usize {
        self.row_words(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows).map(|i| self.row_weight(i)).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// `row[dst] ^= row[src]`
    fn xor_row_into(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        for w in 0..self.stride {
            let v = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= v;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    /// Product over GF(2).
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                if self.get(i, t) {
                    let src = other.row_words(t);
                    for (d, s) in out.row_words_mut(i).iter_mut().zip(src) {
                        *d ^= *s;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `u · self`.
    pub fn vec_mul(&self, u: &[bool]) -> Result<Vec<bool>> {
        if u.len() != self.rows {
            return Err(Error::Shape(format!(
                "vector of length {} cannot multiply {}x{} matrix",
                u.len(),
                self.rows,
                self.cols
            )));
        }
        let mut acc = vec![0u64; self.stride];
        for (i, _) in u.iter().enumerate().filter(|(_, &b)| b) {
            for (a, s) in acc.iter_mut().zip(self.row_words(i)) {
                *a ^= *s;
            }
        }
        Ok((0..self.cols)
            .map(|j| (acc[j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1)
            .collect())
    }

    /// Kronecker product: block `(i, j)` of the result is `self(i, j) · other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if !self.get(i, j) {
                    continue;
                }
                for bi in 0..other.rows {
                    for bj in 0..other.cols {
                        if other.get(bi, bj) {
                            out.set(i * other.rows + bi, j * other.cols + bj, true);
                        }
                    }
                }
            }
        }
        out
    }

    /// Matrix made of the given rows and columns, in the order given.
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut out = Self::zeros(rows.len(), cols.len());
        for (oi, &i) in rows.iter().enumerate() {
            for (oj, &j) in cols.iter().enumerate() {
                if self.get(i, j) {
                    out.set(oi, oj, true);
                }
            }
        }
        out
    }

    /// Gauss–Jordan elimination. Pivots are taken in column order, using the
    /// first row at or below the current position with a one in that column.
    pub fn row_reduce(&self) -> RowEchelon {
        let mut m = self.clone();
        let mut pivot_cols = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| m.get(i, c)) else {
                continue;
            };
            m.swap_rows(r, p);
            for i in 0..m.rows {
                if i != r && m.get(i, c) {
                    m.xor_row_into(r, i);
                }
            }
            pivot_cols.push(c);
            r += 1;
        }
        RowEchelon {
            reduced: m,
            rank: r,
            pivot_cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().rank
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Inverse of a square full-rank matrix.
    pub fn invert(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::Shape(format!(
                "cannot invert non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                if self.get(i, j) {
                    aug.set(i, j, true);
                }
            }
            aug.set(i, n + i, true);
        }
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| aug.get(i, c)) else {
                return Err(Error::Singular);
            };
            aug.swap_rows(c, p);
            for i in 0..n {
                if i != c && aug.get(i, c) {
                    aug.xor_row_into(c, i);
                }
            }
        }
        let right: Vec<usize> = (n..2 * n).collect();
        let rows: Vec<usize> = (0..n).collect();
        Ok(aug.submatrix(&rows, &right))
    }

    /// Whether `u[target_row]` is the same in every solution of `u · self = c`,
    /// for every consistent `c`. Equivalently, whether the unit vector
    /// `e_target_row` lies in the column space of `self`.
    pub fn coordinate_determined(&self, target_row: usize) -> Result<bool> {
        if target_row >= self.rows {
            return Err(Error::Index {
                index: target_row,
                bound: self.rows,
            });
        }
        if self.cols == 0 {
            return Ok(false);
        }
        // Columns of self become rows of the transpose; reduce e_target
        // against that row space.
        let echelon = self.transpose().row_reduce();
        let mut probe = vec![0u64; words_for(self.rows)];
        probe[target_row / WORD_BITS] |= 1 << (target_row % WORD_BITS);
        for (r, &c) in echelon.pivot_cols.iter().enumerate() {
            if (probe[c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1 {
                for (p, s) in probe.iter_mut().zip(echelon.reduced.row_words(r)) {
                    *p ^= *s;
                }
            }
        }
        Ok(probe.iter().all(|&w| w == 0))
    }

    /// Rows as strings of '0'/'1', newline separated, no trailing newline.
    pub fn to_row_strings(&self) -> Vec<String> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| if self.get(i, j) { '1' } else { '0' }).collect())
            .collect()
    }
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_row_strings().join("\n"))
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        write!(f, "{self}")
    }
}

impl FromStr for BitMatrix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        Self::from_row_strings(&rows)
    }
}
