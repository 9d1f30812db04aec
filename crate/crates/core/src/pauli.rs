//! Pauli strings with exact sign tracking.
//!
//! The phase convention follows the Aaronson-Gottesman tableau: a string with bits
//! `(x, z)` and sign bit `r` denotes `(-1)^r * prod_j i^{x_j z_j} X^{x_j} Z^{z_j}`, so a
//! qubit with both bits set holds a Hermitian `Y`.

use std::fmt;

use crate::error::ParseError;
use crate::gf2::BitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => '_',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    x: BitVector,
    z: BitVector,
    negative: bool,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString { x: BitVector::zeros(n), z: BitVector::zeros(n), negative: false }
    }

    pub fn from_parts(x: BitVector, z: BitVector, negative: bool) -> Self {
        assert_eq!(x.len(), z.len(), "support masks must have equal length");
        PauliString { x, z, negative }
    }

    /// Builds `+P` from `(qubit, pauli)` pairs.
    pub fn from_sparse(n: usize, terms: &[(usize, Pauli)]) -> Self {
        let mut p = PauliString::identity(n);
        for &(q, pauli) in terms {
            p.set(q, pauli);
        }
        p
    }

    /// `Z` on every qubit in `support`.
    pub fn z_on(n: usize, support: impl IntoIterator<Item = usize>) -> Self {
        let mut p = PauliString::identity(n);
        for q in support {
            p.set(q, Pauli::Z);
        }
        p
    }

    pub fn x_on(n: usize, support: impl IntoIterator<Item = usize>) -> Self {
        let mut p = PauliString::identity(n);
        for q in support {
            p.set(q, Pauli::X);
        }
        p
    }

    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_mask(&self) -> &BitVector {
        &self.x
    }

    pub fn z_mask(&self) -> &BitVector {
        &self.z
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn negate(&mut self) {
        self.negative = !self.negative;
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    pub fn has_x(&self, q: usize) -> bool {
        self.x.get(q)
    }

    pub fn has_z(&self, q: usize) -> bool {
        self.z.get(q)
    }

    pub(crate) fn toggle_z(&mut self, q: usize) {
        self.z.toggle(q);
    }

    pub(crate) fn clear_z(&mut self, q: usize) {
        self.z.set(q, false);
    }

    pub(crate) fn swap_xz(&mut self, q: usize) {
        let (x, z) = (self.x.get(q), self.z.get(q));
        // H: X -> Z, Z -> X, Y -> -Y
        if x && z {
            self.negative = !self.negative;
        }
        self.x.set(q, z);
        self.z.set(q, x);
    }

    pub(crate) fn apply_cx(&mut self, c: usize, t: usize) {
        let (xc, zc, xt, zt) = (self.x.get(c), self.z.get(c), self.x.get(t), self.z.get(t));
        if xc && zt && (xt == zc) {
            self.negative = !self.negative;
        }
        self.x.set(t, xt ^ xc);
        self.z.set(c, zc ^ zt);
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn weight(&self) -> usize {
        (0..self.num_qubits()).filter(|&q| self.x.get(q) || self.z.get(q)).count()
    }

    pub fn commutes(&self, other: &PauliString) -> bool {
        !(self.x.dot(&other.z) ^ self.z.dot(&other.x))
    }

    /// Product `self * other`; panics if the result would carry a factor of `±i`
    /// (that only happens for anticommuting inputs).
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.num_qubits(), other.num_qubits(), "size mismatch");
        assert!(self.commutes(other), "product of anticommuting Paulis is not Hermitian");
        // phase exponent of i, accumulated per qubit as in Aaronson-Gottesman rowsum
        let mut phase: i64 = 2 * (self.negative as i64) + 2 * (other.negative as i64);
        for q in 0..self.num_qubits() {
            phase += g(self.x.get(q), self.z.get(q), other.x.get(q), other.z.get(q));
        }
        let phase = phase.rem_euclid(4);
        debug_assert!(phase == 0 || phase == 2);
        let mut x = self.x.clone();
        x.xor_assign(&other.x);
        let mut z = self.z.clone();
        z.xor_assign(&other.z);
        PauliString { x, z, negative: phase == 2 }
    }

    pub fn parse(s: &str) -> Result<Self, ParseError> {
        let (negative, body) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let mut p = PauliString::identity(body.chars().count());
        for (q, c) in body.chars().enumerate() {
            let pauli = match c {
                '_' | 'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(ParseError::new(format!("bad Pauli character {other:?}"))),
            };
            p.set(q, pauli);
        }
        p.negative = negative;
        Ok(p)
    }
}

/// Exponent of `i` picked up when multiplying single-qubit Paulis `(x1,z1) * (x2,z2)`.
fn g(x1: bool, z1: bool, x2: bool, z2: bool) -> i64 {
    let (x2, z2) = (x2 as i64, z2 as i64);
    match (x1, z1) {
        (false, false) => 0,
        (true, true) => z2 - x2,
        (true, false) => z2 * (2 * x2 - 1),
        (false, true) => x2 * (1 - 2 * z2),
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", if self.negative { '-' } else { '+' })?;
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}
