//! Dense statevector simulation.
//!
//! Amplitude `k` belongs to the computational basis state whose bit `q` is
//! the occupation of qubit (spin orbital) `q`.

use num_complex::Complex64;

use crate::fermion::{apply_chain, spin_orbital, FermionOp, Ladder, DOWN, UP};
use crate::pauli::{PauliString, PauliSum};
use crate::{Error, Result};

pub const MAX_QUBITS: usize = 16;
const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > MAX_QUBITS {
            return Err(Error::Invalid(format!(
                "{n_qubits} qubits exceeds the {MAX_QUBITS}-qubit limit"
            )));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::Invalid(format!("basis index {index} >= {dim}")));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps an amplitude vector; it must already be normalized.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if !dim.is_power_of_two() || dim > 1 << MAX_QUBITS {
            return Err(Error::Dimension(format!("{dim} is not a valid statevector length")));
        }
        let s = Statevector {
            n_qubits: dim.trailing_zeros() as usize,
            amps,
        };
        let n = s.norm();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::Invalid(format!("state norm {n} != 1")));
        }
        Ok(s)
    }

    /// Normalizes `amps` before wrapping them.
    pub fn normalized(mut amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return Err(Error::Invalid("cannot normalize a zero vector".into()));
        }
        for a in &mut amps {
            *a /= n;
        }
        Self::from_amplitudes(amps)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// In place: `psi <- exp(i * angle * P) psi`.
    pub fn apply_exp_pauli_mut(&mut self, p: &PauliString, angle: f64) {
        let (s, c) = angle.sin_cos();
        let is = Complex64::new(0.0, s);
        if p.x == 0 {
            for (b, a) in self.amps.iter_mut().enumerate() {
                let (ph, _) = p.apply_to_basis(b as u64);
                *a *= c + is * ph;
            }
            return;
        }
        let dim = self.amps.len() as u64;
        for b in 0..dim {
            let partner = b ^ p.x;
            if partner < b {
                continue;
            }
            let (ph_b, _) = p.apply_to_basis(b);
            let (ph_p, _) = p.apply_to_basis(partner);
            let ab = self.amps[b as usize];
            let ap = self.amps[partner as usize];
            self.amps[b as usize] = ab * c + is * ph_p * ap;
            self.amps[partner as usize] = ap * c + is * ph_b * ab;
        }
    }

    /// `exp(i * angle * P) psi`, leaving `self` untouched.
    pub fn apply_exp_pauli(&self, p: &PauliString, angle: f64) -> Result<Statevector> {
        if p.weight() > 0 && (p.x | p.z) >> self.n_qubits != 0 {
            return Err(Error::Dimension(format!(
                "Pauli string acts outside {} qubits",
                self.n_qubits
            )));
        }
        let mut out = self.clone();
        out.apply_exp_pauli_mut(p, angle);
        Ok(out)
    }

    /// `Op |psi>` as a raw amplitude vector.
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<Vec<Complex64>> {
        self.check_qubits(op.n_qubits)?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (p, c) in &op.terms {
            for (b, a) in self.amps.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                let (ph, nb) = p.apply_to_basis(b as u64);
                out[nb as usize] += c * ph * a;
            }
        }
        Ok(out)
    }

    /// `<psi|Op|psi>` without any hermiticity assumption.
    pub fn expectation_complex(&self, op: &PauliSum) -> Result<Complex64> {
        let v = self.apply_pauli_sum(op)?;
        Ok(self.amps.iter().zip(&v).map(|(a, b)| a.conj() * b).sum())
    }

    fn check_qubits(&self, n: usize) -> Result<()> {
        if n != self.n_qubits {
            Err(Error::Dimension(format!(
                "operator on {n} qubits, state on {}",
                self.n_qubits
            )))
        } else {
            Ok(())
        }
    }

    /// Little-endian `(re, im)` pairs of 64-bit floats in index order.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.amps.len() * 16);
        for a in &self.amps {
            out.extend_from_slice(&a.re.to_le_bytes());
            out.extend_from_slice(&a.im.to_le_bytes());
        }
        out
    }
}

/// Computational basis state with the listed spin orbitals occupied.
pub fn prepare_determinant(n_qubits: usize, occupied: &[usize]) -> Result<Statevector> {
    let mut bits = 0usize;
    for &j in occupied {
        if j >= n_qubits {
            return Err(Error::Invalid(format!("spin orbital {j} >= {n_qubits} qubits")));
        }
        if bits & (1 << j) != 0 {
            return Err(Error::Invalid(format!("spin orbital {j} listed twice")));
        }
        bits |= 1 << j;
    }
    Statevector::basis(n_qubits, bits)
}

/// Occupied spin orbitals of a closed-shell determinant with the listed
/// spatial orbitals doubly occupied.
pub fn closed_shell_occupation(doubly_occupied: &[usize]) -> Vec<usize> {
    doubly_occupied
        .iter()
        .flat_map(|&t| [spin_orbital(t, UP), spin_orbital(t, DOWN)])
        .collect()
}

/// `1/sqrt(2) sum_sigma a^dag_{lumo,sigma} a_{homo,sigma} |HF>`, with the
/// fermionic signs of the occupation-number convention.
pub fn prepare_singlet_homo_lumo(
    n_qubits: usize,
    hf_occupied: &[usize],
    homo: usize,
    lumo: usize,
) -> Result<Statevector> {
    let hf = prepare_determinant(n_qubits, hf_occupied)?;
    let hf_bits = hf
        .amps
        .iter()
        .position(|a| a.re == 1.0)
        .expect("basis state") as u64;
    for sigma in [UP, DOWN] {
        let h = spin_orbital(homo, sigma);
        let l = spin_orbital(lumo, sigma);
        if l >= n_qubits || h >= n_qubits {
            return Err(Error::Invalid("HOMO/LUMO outside the register".into()));
        }
        if hf_bits & (1 << h) == 0 {
            return Err(Error::Invalid(format!("HOMO spin orbital {h} is not occupied")));
        }
        if hf_bits & (1 << l) != 0 {
            return Err(Error::Invalid(format!("LUMO spin orbital {l} is occupied")));
        }
    }
    let mut amps = vec![Complex64::new(0.0, 0.0); hf.dim()];
    for sigma in [UP, DOWN] {
        let chain = [
            Ladder::create(spin_orbital(lumo, sigma)),
            Ladder::annihilate(spin_orbital(homo, sigma)),
        ];
        let (s, b) = apply_chain(&chain, hf_bits).expect("occupations checked above");
        amps[b as usize] += Complex64::new(s / std::f64::consts::SQRT_2, 0.0);
    }
    Statevector::from_amplitudes(amps)
}

/// Real part of `<psi|Op|psi>`; the imaginary part must be below `1e-9`.
pub fn expectation(state: &Statevector, op: &PauliSum) -> Result<f64> {
    let v = state.expectation_complex(op)?;
    if v.im.abs() > 1e-9 {
        return Err(Error::Numerical(format!(
            "expectation has imaginary part {:e}; operator not Hermitian?",
            v.im
        )));
    }
    Ok(v.re)
}

/// `<a|b>`.
pub fn state_overlap(a: &Statevector, b: &Statevector) -> Result<Complex64> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension(format!(
            "states of dimension {} and {}",
            a.dim(),
            b.dim()
        )));
    }
    Ok(a.amps.iter().zip(&b.amps).map(|(x, y)| x.conj() * y).sum())
}

/// `<psi|F|psi>` for a fermion operator, evaluated without the qubit map.
pub fn fermion_expectation(state: &Statevector, op: &FermionOp) -> Complex64 {
    let v = op.apply_dense(&state.amps);
    state.amps.iter().zip(&v).map(|(a, b)| a.conj() * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::Pauli;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn hf_determinant_bits() {
        let s = prepare_determinant(6, &[0, 1, 2, 3]).unwrap();
        assert_eq!(s.amplitude(0b001111), Complex64::new(1.0, 0.0));
        assert!((s.norm() - 1.0).abs() < 1e-15);
        let vac = prepare_determinant(4, &[]).unwrap();
        assert_eq!(vac.amplitude(0), Complex64::new(1.0, 0.0));
        assert!(prepare_determinant(4, &[1, 1]).is_err());
        assert!(prepare_determinant(4, &[4]).is_err());
    }

    #[test]
    fn exp_pauli_examples() {
        let zero = Statevector::basis(1, 0).unwrap();
        let x = PauliString::single(0, Pauli::X);
        let same = zero.apply_exp_pauli(&x, 0.0).unwrap();
        assert_eq!(same, zero);
        let flipped = zero.apply_exp_pauli(&x, FRAC_PI_2).unwrap();
        assert!((flipped.amplitude(1) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(flipped.amplitude(0).norm() < 1e-15);
    }

    #[test]
    fn expectation_examples() {
        let one = Statevector::basis(1, 1).unwrap();
        let z = PauliSum::from_term(1, PauliString::single(0, Pauli::Z), Complex64::new(1.0, 0.0));
        assert_eq!(expectation(&one, &z).unwrap(), -1.0);
        assert_eq!(expectation(&one, &PauliSum::identity(1, 1.0)).unwrap(), 1.0);
        assert!(expectation(&one, &PauliSum::identity(2, 1.0)).is_err());
    }

    #[test]
    fn overlaps() {
        let a = Statevector::basis(2, 0).unwrap();
        let b = Statevector::basis(2, 1).unwrap();
        assert_eq!(state_overlap(&a, &a).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(state_overlap(&a, &b).unwrap(), Complex64::new(0.0, 0.0));
        assert!(state_overlap(&a, &Statevector::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn homo_lumo_singlet_preconditions() {
        let hf = closed_shell_occupation(&[0, 1]);
        assert!(prepare_singlet_homo_lumo(6, &hf, 2, 1).is_err());
        assert!(prepare_singlet_homo_lumo(6, &hf, 1, 0).is_err());
        let b = prepare_singlet_homo_lumo(6, &hf, 1, 2).unwrap();
        let a = prepare_determinant(6, &hf).unwrap();
        assert!(state_overlap(&a, &b).unwrap().norm() < 1e-15);
        assert!((b.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn byte_dump_layout() {
        let s = Statevector::basis(1, 1).unwrap();
        let bytes = s.to_le_bytes();
        assert_eq!(bytes.len(), 32);
        assert_eq!(&bytes[16..24], &1.0f64.to_le_bytes());
    }
}
