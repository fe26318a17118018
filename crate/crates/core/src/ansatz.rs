//! Generalized spin-free double-excitation ansatz.
//!
//! Parameters are indexed by quadruples `(t, u, v, w)` of active orbitals with
//! `t >= v >= w >= u`, excluding `t = u = v = w`. Each parameter drives eight
//! fermionic exponentials in a single Trotter step: the four spin
//! combinations of `a^dag_{t s} a^dag_{v r} a_{w r} a_{u s} - h.c.` followed by
//! the same four with `(tu)` and `(vw)` exchanged.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::fermion::{jordan_wigner, spin_orbital, Chain, FermionOp, Ladder, DOWN, UP};
use crate::pauli::PauliString;
use crate::statevector::Statevector;
use crate::{Error, Result};

/// `(sigma, tau)` order within one block.
pub const SPIN_ORDER: [(usize, usize); 4] = [(UP, UP), (DOWN, UP), (UP, DOWN), (DOWN, DOWN)];

/// Excitation quadruple `(t, u, v, w)`.
pub type Quadruple = [usize; 4];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermEntry {
    pub param: usize,
    pub sigma: usize,
    pub tau: usize,
    pub swapped: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnsatzSpec {
    pub n_active_orb: usize,
    pub parameters: Vec<Quadruple>,
    pub term_sequence: Vec<TermEntry>,
}

impl AnsatzSpec {
    pub fn new(n_active_orb: usize) -> Self {
        let parameters = enumerate_parameters(n_active_orb);
        let term_sequence = build_term_sequence(parameters.len());
        AnsatzSpec {
            n_active_orb,
            parameters,
            term_sequence,
        }
    }

    pub fn n_params(&self) -> usize {
        self.parameters.len()
    }

    pub fn n_qubits(&self) -> usize {
        2 * self.n_active_orb
    }

    /// `a^dag_{t s} a^dag_{v r} a_{w r} a_{u s}`, or the exchanged variant.
    pub fn excitation_chain(&self, e: &TermEntry) -> Chain {
        let [t, u, v, w] = self.parameters[e.param];
        let (t, u, v, w) = if e.swapped { (v, w, t, u) } else { (t, u, v, w) };
        vec![
            Ladder::create(spin_orbital(t, e.sigma)),
            Ladder::create(spin_orbital(v, e.tau)),
            Ladder::annihilate(spin_orbital(w, e.tau)),
            Ladder::annihilate(spin_orbital(u, e.sigma)),
        ]
    }

    /// `A - A^dag` for one entry of the term sequence.
    pub fn generator(&self, e: &TermEntry) -> FermionOp {
        let a = self.excitation_chain(e);
        let adj = crate::fermion::adjoint_chain(&a);
        FermionOp {
            terms: vec![(1.0, a), (-1.0, adj)],
        }
    }

    /// One line per exponential: `param spins order t u v w`, with the
    /// indices as they appear in the excitation after any exchange.
    pub fn export_text(&self) -> String {
        let mut out = String::new();
        for e in &self.term_sequence {
            let [t, u, v, w] = self.parameters[e.param];
            let (t, u, v, w) = if e.swapped { (v, w, t, u) } else { (t, u, v, w) };
            let spin = |s: usize| if s == UP { 'u' } else { 'd' };
            writeln!(
                out,
                "{} {}{} {} {} {} {} {}",
                e.param,
                spin(e.sigma),
                spin(e.tau),
                if e.swapped { "exchanged" } else { "direct" },
                t,
                u,
                v,
                w
            )
            .unwrap();
        }
        out
    }
}

/// Quadruples in the nested-loop order `u`, `t`, `w`, `v` (outer to inner).
pub fn enumerate_parameters(n_active_orb: usize) -> Vec<Quadruple> {
    let n = n_active_orb;
    let mut out = Vec::new();
    for u in 0..n {
        for t in 0..n {
            for w in 0..n {
                for v in 0..n {
                    let all_equal = t == u && u == v && v == w;
                    if !all_equal && t >= v && v >= w && w >= u {
                        out.push([t, u, v, w]);
                    }
                }
            }
        }
    }
    out
}

/// Eight entries per parameter: four direct spin blocks then four exchanged.
pub fn build_term_sequence(n_params: usize) -> Vec<TermEntry> {
    let mut seq = Vec::with_capacity(8 * n_params);
    for param in 0..n_params {
        for swapped in [false, true] {
            for (sigma, tau) in SPIN_ORDER {
                seq.push(TermEntry {
                    param,
                    sigma,
                    tau,
                    swapped,
                });
            }
        }
    }
    seq
}

/// A fermionic exponential lowered to mutually commuting Pauli rotations:
/// `exp(theta (A - A^dag)) = prod_k exp(i theta r_k P_k)`.
#[derive(Debug, Clone)]
pub struct CompiledTerm {
    pub param: usize,
    pub rotations: Vec<(PauliString, f64)>,
}

/// The ansatz circuit as an ordered list of parametrized Pauli rotations.
#[derive(Debug, Clone)]
pub struct CompiledAnsatz {
    pub spec: AnsatzSpec,
    pub terms: Vec<CompiledTerm>,
}

impl CompiledAnsatz {
    pub fn new(spec: AnsatzSpec) -> Result<Self> {
        let nq = spec.n_qubits();
        let mut terms = Vec::with_capacity(spec.term_sequence.len());
        for e in &spec.term_sequence {
            let img = jordan_wigner(&spec.generator(e), nq)?;
            let mut rotations = Vec::with_capacity(img.len());
            for (p, c) in &img.terms {
                if c.re.abs() > 1e-12 {
                    return Err(Error::Numerical(
                        "generator image has a real coefficient; not anti-Hermitian".into(),
                    ));
                }
                rotations.push((*p, c.im));
            }
            for (i, (a, _)) in rotations.iter().enumerate() {
                for (b, _) in &rotations[i + 1..] {
                    if !a.commutes_with(b) {
                        return Err(Error::Numerical(format!(
                            "non-commuting strings {} and {} in one exponential",
                            a.label(nq),
                            b.label(nq)
                        )));
                    }
                }
            }
            terms.push(CompiledTerm {
                param: e.param,
                rotations,
            });
        }
        Ok(CompiledAnsatz { spec, terms })
    }

    pub fn for_active_space(n_active_orb: usize) -> Result<Self> {
        Self::new(AnsatzSpec::new(n_active_orb))
    }

    pub fn n_params(&self) -> usize {
        self.spec.n_params()
    }

    pub fn n_qubits(&self) -> usize {
        self.spec.n_qubits()
    }

    /// `U(theta)|psi>`.
    pub fn apply(&self, state: &Statevector, theta: &[f64]) -> Result<Statevector> {
        if theta.len() != self.n_params() {
            return Err(Error::Dimension(format!(
                "{} parameters for an ansatz with {}",
                theta.len(),
                self.n_params()
            )));
        }
        if state.n_qubits() != self.n_qubits() {
            return Err(Error::Dimension(format!(
                "state on {} qubits, ansatz on {}",
                state.n_qubits(),
                self.n_qubits()
            )));
        }
        let mut out = state.clone();
        for term in &self.terms {
            let th = theta[term.param];
            if th == 0.0 {
                continue;
            }
            for (p, r) in &term.rotations {
                out.apply_exp_pauli_mut(p, th * r);
            }
        }
        Ok(out)
    }
}

/// `U(theta)|psi>` for a compiled ansatz.
pub fn apply_ansatz(state: &Statevector, ansatz: &CompiledAnsatz, theta: &[f64]) -> Result<Statevector> {
    ansatz.apply(state, theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCount {
    pub total: usize,
    pub single_qubit: usize,
    pub two_qubit: usize,
}

/// Gates for one `exp(i a P)` under the CNOT-ladder decomposition: a basis
/// change before and after on every X/Y qubit (H or Rx(pi/2)), a CNOT ladder
/// down and back up over the support, and one Rz.
pub fn gates_for_string(p: &PauliString) -> GateCount {
    let weight = p.weight() as usize;
    if weight == 0 {
        return GateCount::default();
    }
    let n_xy = p.x.count_ones() as usize;
    let single = 2 * n_xy + 1;
    let two = 2 * (weight - 1);
    GateCount {
        total: single + two,
        single_qubit: single,
        two_qubit: two,
    }
}

pub fn count_gates(ansatz: &CompiledAnsatz) -> GateCount {
    let mut c = GateCount::default();
    for term in &ansatz.terms {
        for (p, _) in &term.rotations {
            let g = gates_for_string(p);
            c.total += g.total;
            c.single_qubit += g.single_qubit;
            c.two_qubit += g.two_qubit;
        }
    }
    c
}

/// Dense amplitude representation helper used in tests: `exp(theta G)` for a
/// real anti-Hermitian fermion generator by truncated Taylor series.
#[doc(hidden)]
pub fn expm_generator_dense(gen: &FermionOp, theta: f64, amps: &[Complex64]) -> Vec<Complex64> {
    let mut out = amps.to_vec();
    let mut term = amps.to_vec();
    for k in 1..60 {
        let next = gen.apply_dense(&term);
        term = next.into_iter().map(|v| v * (theta / k as f64)).collect();
        for (o, t) in out.iter_mut().zip(&term) {
            *o += t;
        }
    }
    out
}
