//! Oracles shared by the integration tests. Everything here is written
//! directly from definitions and avoids the library's own operator code.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use saoovqe::integrals::FrozenCoreHamiltonian;
use saoovqe::statevector::Statevector;

/// Dense matrix of `a^dag_j` on `n` qubits, qubit 0 least significant,
/// sign `(-1)^(occupied modes below j)`.
pub fn creation(j: usize, n: usize) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for b in 0..dim {
        if b >> j & 1 == 0 {
            let parity = (b & ((1 << j) - 1)).count_ones();
            m[(b | 1 << j, b)] = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
        }
    }
    m
}

pub fn annihilation(j: usize, n: usize) -> DMatrix<f64> {
    creation(j, n).transpose()
}

pub fn one_body(p: usize, q: usize, n_orb: usize) -> DMatrix<f64> {
    let n = 2 * n_orb;
    (0..2).map(|s| creation(2 * p + s, n) * annihilation(2 * q + s, n)).fold(DMatrix::zeros(1 << n, 1 << n), |a, b| a + b)
}

pub fn two_body(p: usize, q: usize, r: usize, s: usize, n_orb: usize) -> DMatrix<f64> {
    let n = 2 * n_orb;
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for a in 0..2 {
        for b in 0..2 {
            m += creation(2 * p + a, n) * creation(2 * r + b, n) * annihilation(2 * s + b, n) * annihilation(2 * q + a, n);
        }
    }
    m
}

/// `shift + sum h E + 1/2 sum g e` as a dense real matrix.
pub fn dense_hamiltonian(fc: &FrozenCoreHamiltonian) -> DMatrix<f64> {
    let n = fc.n_active_orb;
    let dim = 1 << (2 * n);
    let mut h = DMatrix::identity(dim, dim) * fc.shift;
    for t in 0..n {
        for u in 0..n {
            h += one_body(t, u, n) * fc.h_eff[(t, u)];
            for v in 0..n {
                for w in 0..n {
                    let g = fc.g_act.get(t, u, v, w);
                    if g != 0.0 {
                        h += two_body(t, u, v, w, n) * (0.5 * g);
                    }
                }
            }
        }
    }
    h
}

pub fn real_part(m: &DMatrix<Complex64>) -> DMatrix<f64> {
    m.map(|c| c.re)
}

pub fn max_imag(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|c| c.im.abs()).fold(0.0, f64::max)
}

pub fn sorted_eigenvalues(m: DMatrix<f64>) -> Vec<f64> {
    let mut v: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Principal submatrix on the given basis indices.
pub fn restrict(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

/// Random real state supported on basis indices with `n_elec` set bits.
pub fn random_sector_state(rng: &mut impl Rng, n_qubits: usize, n_elec: u32) -> Statevector {
    let amps = (0..1usize << n_qubits)
        .map(|b| {
            if b.count_ones() == n_elec {
                Complex64::new(rng.gen_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Statevector::normalized(amps).unwrap()
}

/// Random real state with equal alpha and beta counts.
pub fn random_sz0_state(rng: &mut impl Rng, n_qubits: usize, n_elec: u32) -> Statevector {
    let even = 0x5555_5555_5555_5555usize;
    let amps = (0..1usize << n_qubits)
        .map(|b| {
            let a = (b & even).count_ones();
            let c = (b & !even).count_ones();
            if a + c == n_elec && a == c {
                Complex64::new(rng.gen_range(-1.0..1.0), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Statevector::normalized(amps).unwrap()
}

pub fn as_complex(v: &[f64]) -> Vec<Complex64> {
    v.iter().map(|&x| Complex64::new(x, 0.0)).collect()
}

pub fn dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Frozen-core Hamiltonian of a molecule-like system in its starting orbitals.
pub fn molecule_fc(seed: u64, n_orb: usize, n_elec: usize, n_act_e: usize, n_act: usize) -> FrozenCoreHamiltonian {
    use saoovqe::integrals::{build_frozen_core, transform_to_mo, ActiveSpaceSpec};
    let fx = saoovqe::synthetic::molecule_like(&saoovqe::synthetic::SyntheticSpec::new(seed, n_orb, n_elec));
    let mo = transform_to_mo(&fx.integrals, &fx.coeffs).unwrap();
    build_frozen_core(&mo, &ActiveSpaceSpec::contiguous(n_elec, n_act_e, n_act).unwrap()).unwrap()
}

pub fn ci_state(basis: &saoovqe::reference::DeterminantBasis, v: &[f64]) -> Statevector {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * basis.n_orb)];
    for (i, &x) in v.iter().enumerate() {
        amps[basis.bits(i) as usize] = Complex64::new(x, 0.0);
    }
    Statevector::normalized(amps).unwrap()
}

pub fn real_vector(s: &Statevector) -> nalgebra::DVector<f64> {
    nalgebra::DVector::from_iterator(s.dim(), s.amplitudes().iter().map(|a| a.re))
}
