//! Spin-free second-quantized operators and the Jordan-Wigner mapping.
//!
//! Spin orbitals are interleaved: spatial orbital `t` maps to mode `2t` (up)
//! and `2t + 1` (down). A basis state with occupation bits `b` is
//! `prod_{j ascending} (a_j^dag)^{b_j} |vac>`, so the Jordan-Wigner parity
//! string of mode `j` runs over modes `0..j`.

use num_complex::Complex64;

use crate::integrals::FrozenCoreHamiltonian;
use crate::pauli::{Pauli, PauliString, PauliSum};
use crate::{Error, Result};

pub const UP: usize = 0;
pub const DOWN: usize = 1;

#[inline]
pub fn spin_orbital(spatial: usize, spin: usize) -> usize {
    2 * spatial + spin
}

/// A creation (`dagger = true`) or annihilation operator on one mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ladder {
    pub mode: usize,
    pub dagger: bool,
}

impl Ladder {
    pub fn create(mode: usize) -> Self {
        Ladder { mode, dagger: true }
    }

    pub fn annihilate(mode: usize) -> Self {
        Ladder {
            mode,
            dagger: false,
        }
    }

    /// Action on an occupation bitstring; `None` if the result vanishes.
    #[inline]
    pub fn apply(&self, bits: u64) -> Option<(f64, u64)> {
        let m = 1u64 << self.mode;
        let occupied = bits & m != 0;
        if occupied == self.dagger {
            return None;
        }
        let parity = (bits & (m - 1)).count_ones();
        let sign = if parity.is_multiple_of(2) { 1.0 } else { -1.0 };
        Some((sign, bits ^ m))
    }
}

/// Product of ladder operators, written left to right as in the formula
/// (the rightmost operator acts first).
pub type Chain = Vec<Ladder>;

/// Apply a chain to a basis state.
#[inline]
pub fn apply_chain(chain: &[Ladder], bits: u64) -> Option<(f64, u64)> {
    let mut sign = 1.0;
    let mut b = bits;
    for op in chain.iter().rev() {
        let (s, nb) = op.apply(b)?;
        sign *= s;
        b = nb;
    }
    Some((sign, b))
}

/// Hermitian conjugate of a chain: reversed order, daggers flipped.
pub fn adjoint_chain(chain: &[Ladder]) -> Chain {
    chain
        .iter()
        .rev()
        .map(|l| Ladder {
            mode: l.mode,
            dagger: !l.dagger,
        })
        .collect()
}

/// Real linear combination of ladder-operator chains. An empty chain is the
/// identity.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FermionOp {
    pub terms: Vec<(f64, Chain)>,
}

impl FermionOp {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn identity(c: f64) -> Self {
        FermionOp {
            terms: vec![(c, Vec::new())],
        }
    }

    pub fn push(&mut self, c: f64, chain: Chain) {
        self.terms.push((c, chain));
    }

    pub fn extend_scaled(&mut self, other: &FermionOp, c: f64) {
        for (v, ch) in &other.terms {
            self.terms.push((v * c, ch.clone()));
        }
    }

    pub fn max_mode(&self) -> Option<usize> {
        self.terms
            .iter()
            .flat_map(|(_, ch)| ch.iter().map(|l| l.mode))
            .max()
    }

    pub fn conserves_particle_number(&self) -> bool {
        self.terms.iter().all(|(_, ch)| {
            let n_c = ch.iter().filter(|l| l.dagger).count();
            2 * n_c == ch.len()
        })
    }

    /// `sum_terms c * <out|chain|in>` accumulated into `out_amps` for an
    /// input amplitude vector indexed by occupation bits.
    pub fn apply_dense(&self, amps: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); amps.len()];
        for (c, chain) in &self.terms {
            for (b, a) in amps.iter().enumerate() {
                if a.norm_sqr() == 0.0 {
                    continue;
                }
                if let Some((s, nb)) = apply_chain(chain, b as u64) {
                    out[nb as usize] += a * (c * s);
                }
            }
        }
        out
    }
}

fn check_index(i: usize, n_orb: usize) -> Result<()> {
    if i >= n_orb {
        Err(Error::Invalid(format!(
            "spatial orbital {i} out of range for {n_orb} orbitals"
        )))
    } else {
        Ok(())
    }
}

/// `E_pq = sum_sigma a^dag_{p sigma} a_{q sigma}`.
pub fn spin_free_one_body(p: usize, q: usize, n_orb: usize) -> Result<FermionOp> {
    check_index(p, n_orb)?;
    check_index(q, n_orb)?;
    let mut op = FermionOp::new();
    for sigma in [UP, DOWN] {
        op.push(
            1.0,
            vec![
                Ladder::create(spin_orbital(p, sigma)),
                Ladder::annihilate(spin_orbital(q, sigma)),
            ],
        );
    }
    Ok(op)
}

/// `e_pqrs = sum_{sigma,tau} a^dag_{p sigma} a^dag_{r tau} a_{s tau} a_{q sigma}`.
pub fn spin_free_two_body(p: usize, q: usize, r: usize, s: usize, n_orb: usize) -> Result<FermionOp> {
    for i in [p, q, r, s] {
        check_index(i, n_orb)?;
    }
    let mut op = FermionOp::new();
    for sigma in [UP, DOWN] {
        for tau in [UP, DOWN] {
            op.push(
                1.0,
                vec![
                    Ladder::create(spin_orbital(p, sigma)),
                    Ladder::create(spin_orbital(r, tau)),
                    Ladder::annihilate(spin_orbital(s, tau)),
                    Ladder::annihilate(spin_orbital(q, sigma)),
                ],
            );
        }
    }
    Ok(op)
}

/// `H = shift + sum h_eff[t,u] E_tu + 1/2 sum g[t,u,v,w] e_tuvw`.
pub fn hamiltonian_to_fermion(fc: &FrozenCoreHamiltonian) -> FermionOp {
    let n = fc.n_active_orb;
    let mut op = FermionOp::identity(fc.shift);
    for t in 0..n {
        for u in 0..n {
            let h = fc.h_eff[(t, u)];
            if h != 0.0 {
                op.extend_scaled(&spin_free_one_body(t, u, n).unwrap(), h);
            }
        }
    }
    for t in 0..n {
        for u in 0..n {
            for v in 0..n {
                for w in 0..n {
                    let g = fc.g_act.get(t, u, v, w);
                    if g != 0.0 {
                        op.extend_scaled(&spin_free_two_body(t, u, v, w, n).unwrap(), 0.5 * g);
                    }
                }
            }
        }
    }
    op
}

/// Jordan-Wigner image of a single ladder operator:
/// `a^dag_j -> 1/2 (X_j - i Y_j) Z_{j-1} ... Z_0`.
pub fn jw_ladder(l: Ladder, n_qubits: usize) -> PauliSum {
    let parity = (1u64 << l.mode) - 1;
    let mut xs = PauliString::single(l.mode, Pauli::X);
    xs.z |= parity;
    let mut ys = PauliString::single(l.mode, Pauli::Y);
    ys.z |= parity;
    let y_sign = if l.dagger { -0.5 } else { 0.5 };
    let mut s = PauliSum::zero(n_qubits);
    s.add_term(xs, Complex64::new(0.5, 0.0));
    s.add_term(ys, Complex64::new(0.0, y_sign));
    s
}

fn jw_chain(chain: &[Ladder], n_qubits: usize) -> PauliSum {
    let mut acc = PauliSum::identity(n_qubits, 1.0);
    for l in chain {
        let f = jw_ladder(*l, n_qubits);
        let mut next = PauliSum::zero(n_qubits);
        for (pa, ca) in &acc.terms {
            for (pb, cb) in &f.terms {
                let (ph, p) = pa.mul(pb);
                next.add_term(p, ca * cb * ph);
            }
        }
        acc = next;
    }
    acc
}

/// Jordan-Wigner image of a fermion operator on `n_qubits` qubits.
pub fn jordan_wigner(f: &FermionOp, n_qubits: usize) -> Result<PauliSum> {
    if let Some(m) = f.max_mode() {
        if m >= n_qubits {
            return Err(Error::Invalid(format!(
                "mode {m} does not fit in {n_qubits} qubits"
            )));
        }
    }
    let mut out = PauliSum::zero(n_qubits);
    for (c, chain) in &f.terms {
        let mut img = jw_chain(chain, n_qubits);
        img.scale(Complex64::new(*c, 0.0));
        out.add_assign(&img);
    }
    out.simplify();
    Ok(out)
}

/// Qubit Hamiltonian of a frozen-core Hamiltonian, real coefficients.
pub fn qubit_hamiltonian(fc: &FrozenCoreHamiltonian) -> PauliSum {
    let op = hamiltonian_to_fermion(fc);
    jordan_wigner(&op, fc.n_qubits())
        .and_then(|p| p.into_hermitian(1e-12))
        .expect("frozen-core Hamiltonian maps to a Hermitian Pauli sum")
}
