//! Dense bit-packed linear algebra over GF(2).
//!
//! Rows are stored as contiguous runs of `u64` words. All elimination routines
//! pick the first row holding a set bit in the current column, so pivots and the
//! resulting kernel bases are reproducible.

use std::fmt;
use std::str::FromStr;

use crate::error::ParseError;

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector { len, words: vec![0; words_for(len)] }
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = BitVector::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Vector of length `len` with ones at `indices` (duplicates cancel).
    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVector::zeros(len);
        for i in indices {
            v.toggle(i);
        }
        v
    }

    pub fn from_words(len: usize, mut words: Vec<u64>) -> Self {
        words.resize(words_for(len), 0);
        let mut v = BitVector { len, words };
        v.clear_tail();
        v
    }

    fn clear_tail(&mut self) {
        let r = self.len % WORD;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << r) - 1;
            }
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "length mismatch");
        xor_words(&mut self.words, &other.words);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "length mismatch");
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        iter_word_ones(&self.words)
    }

    pub fn to_bools(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    /// `'0'`/`'1'` characters, index 0 first.
    pub fn to_bit_string(&self) -> String {
        (0..self.len).map(|i| if self.get(i) { '1' } else { '0' }).collect()
    }

    pub fn parse_bit_string(s: &str) -> Result<Self, ParseError> {
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => return Err(ParseError::new(format!("unexpected character {other:?} in bit string"))),
            }
        }
        Ok(v)
    }

    /// Concatenation `[self | other]`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in self.iter_ones() {
            out.set(i, true);
        }
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({})", self.to_bit_string())
    }
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

pub(crate) fn iter_word_ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + b)
            }
        })
    })
}

/// Dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub matrix: BitMatrix,
    /// `pivots[i]` is the pivot column of row `i`; rows past `pivots.len()` are zero.
    pub pivots: Vec<usize>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        BitMatrix { rows, cols, stride, data: vec![0; rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from equal-length rows. An empty row list needs `cols` explicitly,
    /// see [`BitMatrix::from_rows_with_cols`].
    pub fn from_rows(rows: &[BitVector]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows_with_cols(rows, cols)
    }

    pub fn from_rows_with_cols(rows: &[BitVector], cols: usize) -> Self {
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "row {i} has wrong length");
            m.row_words_mut(i).copy_from_slice(r.words());
        }
        m
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = BitMatrix::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), cols, "ragged rows");
            for (j, &b) in r.iter().enumerate() {
                if b & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        self.data[r * self.stride + c / WORD] ^= 1u64 << (c % WORD);
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_vectors(&self) -> Vec<BitVector> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_ones(&self, r: usize) -> impl Iterator<Item = usize> + '_ {
        iter_word_ones(self.row_words(r))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// `row[dst] ^= row[src]`.
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        if dst == src {
            self.row_words_mut(dst).fill(0);
            return;
        }
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        xor_words(a, b);
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row_ones(r) {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix-vector product `M v`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let parity = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones());
            if parity & 1 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = BitMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in self.row_ones(r).collect::<Vec<_>>() {
                let src = other.row_words(k).to_vec();
                xor_words(out.row_words_mut(r), &src);
            }
        }
        out
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.rows, other.rows, "row count mismatch");
        let mut out = BitMatrix::zeros(self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in self.row_ones(r) {
                out.set(r, c, true);
            }
            for c in other.row_ones(r) {
                out.set(r, self.cols + c, true);
            }
        }
        out
    }

    /// `[self ; other]`.
    pub fn vstack(&self, other: &BitMatrix) -> BitMatrix {
        assert_eq!(self.cols, other.cols, "column count mismatch");
        let mut out = BitMatrix::zeros(self.rows + other.rows, self.cols);
        out.data[..self.data.len()].copy_from_slice(&self.data);
        out.data[self.data.len()..].copy_from_slice(&other.data);
        out
    }

    /// Reduced row echelon form by Gauss-Jordan elimination.
    pub fn echelon(&self) -> Echelon {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(next, p);
            for r in 0..self.rows {
                if r != next && m.get(r, c) {
                    m.xor_rows(r, next);
                }
            }
            pivots.push(c);
            next += 1;
        }
        Echelon { matrix: m, pivots }
    }

    pub fn rank(&self) -> usize {
        // forward elimination only
        let mut m = self.clone();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(p) = (rank..self.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, p);
            for r in rank + 1..self.rows {
                if m.get(r, c) {
                    m.xor_rows(r, rank);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Basis of the right null space `{v : M v = 0}`, one vector per row.
    pub fn kernel_basis(&self) -> BitMatrix {
        let ech = self.echelon();
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = BitMatrix::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            basis.set(i, f, true);
            for (r, &p) in ech.pivots.iter().enumerate() {
                if ech.matrix.get(r, f) {
                    basis.set(i, p, true);
                }
            }
        }
        basis
    }

    /// Some `x` with `M x = b`, or `None` when the system is inconsistent.
    /// Free variables are set to zero.
    pub fn solve(&self, b: &BitVector) -> Option<BitVector> {
        assert_eq!(b.len(), self.rows, "right-hand side has wrong length");
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            for c in self.row_ones(r) {
                aug.set(r, c, true);
            }
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let ech = aug.echelon();
        if ech.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = BitVector::zeros(self.cols);
        for (r, &p) in ech.pivots.iter().enumerate() {
            if ech.matrix.get(r, self.cols) {
                x.set(p, true);
            }
        }
        debug_assert_eq!(&self.mul_vec(&x), b);
        Some(x)
    }

    /// True when `v` lies in the row space.
    pub fn rowspace_contains(&self, v: &BitVector) -> bool {
        RowReducer::new(self).contains(v)
    }

    /// Minimum Hamming weight of `v` with `M v = 0` and `v` outside the row space of
    /// `exclude`, searching supports of weight `1..=max_weight` in lexicographic order.
    pub fn min_weight_in_coset_exhaustive(&self, exclude: &BitMatrix, max_weight: usize) -> Option<usize> {
        assert_eq!(self.cols, exclude.cols, "column count mismatch");
        let n = self.cols;
        let columns: Vec<BitVector> = {
            let t = self.transpose();
            (0..n).map(|c| t.row(c)).collect()
        };
        let reducer = RowReducer::new(exclude);
        for w in 1..=max_weight.min(n) {
            let mut support: Vec<usize> = (0..w).collect();
            loop {
                let mut syn = BitVector::zeros(self.rows);
                for &c in &support {
                    syn.xor_assign(&columns[c]);
                }
                if syn.is_zero() {
                    let v = BitVector::from_indices(n, support.iter().copied());
                    if !reducer.contains(&v) {
                        return Some(w);
                    }
                }
                if !next_combination(&mut support, n) {
                    break;
                }
            }
        }
        None
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, ParseError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| ParseError::new("missing matrix header"))?;
        let mut dims = header.split_whitespace().map(usize::from_str);
        let (rows, cols) = match (dims.next(), dims.next(), dims.next()) {
            (Some(Ok(r)), Some(Ok(c)), None) => (r, c),
            _ => return Err(ParseError::new(format!("bad matrix header {header:?}"))),
        };
        let mut m = BitMatrix::zeros(rows, cols);
        for r in 0..rows {
            let line = lines.next().ok_or_else(|| ParseError::new(format!("missing row {r}")))?.trim();
            if line.len() != cols {
                return Err(ParseError::new(format!("row {r} has {} entries, expected {cols}", line.len())));
            }
            let v = BitVector::parse_bit_string(line)?;
            m.row_words_mut(r).copy_from_slice(v.words());
        }
        if lines.next().is_some() {
            return Err(ParseError::new("trailing rows after matrix body"));
        }
        Ok(m)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r).to_bit_string())?;
        }
        Ok(())
    }
}

/// Advances `comb` (strictly increasing indices below `n`) to the next combination in
/// lexicographic order. Returns false when exhausted.
pub fn next_combination(comb: &mut [usize], n: usize) -> bool {
    let k = comb.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - k + i {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Echelon basis of a row space, used for repeated membership tests.
#[derive(Clone, Debug)]
pub struct RowReducer {
    basis: Vec<(usize, BitVector)>,
}

impl RowReducer {
    pub fn new(m: &BitMatrix) -> Self {
        let ech = m.echelon();
        let basis = ech
            .pivots
            .iter()
            .enumerate()
            .map(|(r, &p)| (p, ech.matrix.row(r)))
            .collect();
        RowReducer { basis }
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Reduces `v` against the basis; returns the remainder.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        let mut r = v.clone();
        for (p, b) in &self.basis {
            if r.get(*p) {
                r.xor_assign(b);
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` to the span; returns false if it was already inside.
    pub fn push(&mut self, v: &BitVector) -> bool {
        let r = self.reduce(v);
        let Some(p) = r.iter_ones().next() else {
            return false;
        };
        for (_, b) in self.basis.iter_mut() {
            if b.get(p) {
                b.xor_assign(&r);
            }
        }
        self.basis.push((p, r));
        true
    }
}

impl FromStr for BitMatrix {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BitMatrix::from_text(s)
    }
}
