//! Pauli strings and weighted Pauli sums.
//!
//! A string over `n` qubits is stored as two bit masks: `x` marks qubits
//! carrying X or Y, `z` marks qubits carrying Z or Y. Qubit 0 is the least
//! significant bit of a statevector index and is printed leftmost.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Coefficients below this magnitude are dropped.
pub const PRUNE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub x: u64,
    pub z: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

const I_POW: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

impl PauliString {
    pub const IDENTITY: PauliString = PauliString { x: 0, z: 0 };

    pub fn single(qubit: usize, p: Pauli) -> Self {
        let bit = 1u64 << qubit;
        match p {
            Pauli::I => Self::IDENTITY,
            Pauli::X => PauliString { x: bit, z: 0 },
            Pauli::Y => PauliString { x: bit, z: bit },
            Pauli::Z => PauliString { x: 0, z: bit },
        }
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        let xb = (self.x >> qubit) & 1 == 1;
        let zb = (self.z >> qubit) & 1 == 1;
        match (xb, zb) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Product `self * other = phase * result`.
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        // P = i^{#Y} X^x Z^z; Z^z1 X^x2 = (-1)^{|z1 & x2|} X^x2 Z^z1.
        let res = PauliString {
            x: self.x ^ other.x,
            z: self.z ^ other.z,
        };
        let sign = 2 * (self.z & other.x).count_ones();
        let pow = (self.y_count() + other.y_count() + sign + 4 * 64 - res.y_count()) % 4;
        (I_POW[pow as usize], res)
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()).is_multiple_of(2)
    }

    /// Action on a computational basis state: `P|b> = phase |b ^ x>`.
    #[inline]
    pub fn apply_to_basis(&self, b: u64) -> (Complex64, u64) {
        let pow = (self.y_count() + 2 * (b & self.z).count_ones()) % 4;
        (I_POW[pow as usize], b ^ self.x)
    }

    pub fn label(&self, n_qubits: usize) -> String {
        (0..n_qubits)
            .map(|q| match self.letter(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            })
            .collect()
    }

    pub fn parse(label: &str) -> Result<Self> {
        let mut s = PauliString::IDENTITY;
        for (q, ch) in label.chars().enumerate() {
            let p = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Invalid(format!("bad Pauli letter '{other}'"))),
            };
            let t = PauliString::single(q, p);
            s.x |= t.x;
            s.z |= t.z;
        }
        Ok(s)
    }
}

/// Weighted sum of Pauli strings over `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    pub n_qubits: usize,
    pub terms: BTreeMap<PauliString, Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Self {
        PauliSum {
            n_qubits,
            terms: BTreeMap::new(),
        }
    }

    pub fn identity(n_qubits: usize, coeff: f64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(PauliString::IDENTITY, Complex64::new(coeff, 0.0));
        s.simplify();
        s
    }

    pub fn from_term(n_qubits: usize, p: PauliString, c: Complex64) -> Self {
        let mut s = Self::zero(n_qubits);
        s.add_term(p, c);
        s
    }

    pub fn add_term(&mut self, p: PauliString, c: Complex64) {
        *self.terms.entry(p).or_insert(Complex64::new(0.0, 0.0)) += c;
    }

    pub fn add_assign(&mut self, other: &PauliSum) {
        assert_eq!(self.n_qubits, other.n_qubits);
        for (p, c) in &other.terms {
            self.add_term(*p, *c);
        }
    }

    pub fn scale(&mut self, c: Complex64) {
        for v in self.terms.values_mut() {
            *v *= c;
        }
    }

    /// Drops terms with `|c| < PRUNE_TOL`.
    pub fn simplify(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE_TOL);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_imag(&self) -> f64 {
        self.terms.values().map(|c| c.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.max_imag() <= tol
    }

    /// Returns the sum with imaginary parts zeroed, after checking that they
    /// are below `tol`.
    pub fn into_hermitian(mut self, tol: f64) -> Result<Self> {
        let im = self.max_imag();
        if im > tol {
            return Err(Error::Numerical(format!(
                "operator is not Hermitian: max |Im c| = {im:e}"
            )));
        }
        for c in self.terms.values_mut() {
            c.im = 0.0;
        }
        Ok(self)
    }

    pub fn coefficient(&self, p: &PauliString) -> Complex64 {
        self.terms.get(p).copied().unwrap_or_default()
    }

    pub fn adjoint(&self) -> PauliSum {
        PauliSum {
            n_qubits: self.n_qubits,
            terms: self.terms.iter().map(|(p, c)| (*p, c.conj())).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &PauliSum) -> f64 {
        let mut d = self.clone();
        let mut neg = other.clone();
        neg.scale(Complex64::new(-1.0, 0.0));
        d.add_assign(&neg);
        d.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Dense `2^n x 2^n` matrix; row index is the output basis state.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        for (p, c) in &self.terms {
            for b in 0..dim as u64 {
                let (ph, out) = p.apply_to_basis(b);
                m[(out as usize, b as usize)] += c * ph;
            }
        }
        m
    }

    /// One term per line: `<coeff> <string>`, qubit 0 leftmost. Real
    /// coefficients print as a single number, complex ones as `(re,im)`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (p, c) in &self.terms {
            let label = p.label(self.n_qubits);
            if c.im == 0.0 {
                out.push_str(&format!("{:.16e} {}\n", c.re, label));
            } else {
                out.push_str(&format!("({:.16e},{:.16e}) {}\n", c.re, c.im, label));
            }
        }
        out
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Product of two Pauli sums with exact phase bookkeeping.
pub fn pauli_multiply(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    if a.n_qubits != b.n_qubits {
        return Err(Error::Dimension(format!(
            "Pauli sums on {} and {} qubits",
            a.n_qubits, b.n_qubits
        )));
    }
    let mut out = PauliSum::zero(a.n_qubits);
    for (pa, ca) in &a.terms {
        for (pb, cb) in &b.terms {
            let (ph, p) = pa.mul(pb);
            out.add_term(p, ca * cb * ph);
        }
    }
    out.simplify();
    Ok(out)
}
