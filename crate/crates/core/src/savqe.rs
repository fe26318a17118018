//! State-averaged VQE over a pair of orthogonal reference states.

use num_complex::Complex64;
use rand::Rng;

use crate::ansatz::CompiledAnsatz;
use crate::optimize::{Bfgs, MinimizeOptions, Minimizer};
use crate::pauli::{pauli_multiply, PauliSum};
use crate::statevector::{
    closed_shell_occupation, expectation, prepare_determinant, prepare_singlet_homo_lumo,
    state_overlap, Statevector,
};
use crate::synthetic::rng;
use crate::{Error, Result};

const WEIGHT_TOL: f64 = 1e-12;
const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Weights and reference states of a two-state ensemble.
#[derive(Debug, Clone)]
pub struct EnsembleSpec {
    weights: (f64, f64),
    states: (Statevector, Statevector),
}

impl EnsembleSpec {
    pub fn new(weights: (f64, f64), state_a: Statevector, state_b: Statevector) -> Result<Self> {
        let (wa, wb) = weights;
        if !(wa.is_finite() && wb.is_finite()) || (wa + wb - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Invalid(format!("weights ({wa}, {wb}) do not sum to 1")));
        }
        if wb < 0.0 || wa < wb {
            return Err(Error::Invalid(format!(
                "weights ({wa}, {wb}) must satisfy w_A >= w_B >= 0"
            )));
        }
        let ov = state_overlap(&state_a, &state_b)?;
        if ov.norm() > ORTHOGONALITY_TOL {
            return Err(Error::Invalid(format!(
                "reference states are not orthogonal (|<A|B>| = {:e})",
                ov.norm()
            )));
        }
        Ok(EnsembleSpec {
            weights,
            states: (state_a, state_b),
        })
    }

    /// Closed-shell ground determinant and the singlet HOMO->LUMO excitation
    /// of an active space.
    pub fn hf_and_singlet(n_active_orb: usize, n_active_elec: usize, weights: (f64, f64)) -> Result<Self> {
        if !n_active_elec.is_multiple_of(2) || n_active_elec == 0 || n_active_elec / 2 >= n_active_orb {
            return Err(Error::Invalid(format!(
                "need an even, nonzero electron count with a virtual orbital: ({n_active_elec}, {n_active_orb})"
            )));
        }
        let nq = 2 * n_active_orb;
        let homo = n_active_elec / 2 - 1;
        let occ = closed_shell_occupation(&(0..=homo).collect::<Vec<_>>());
        let a = prepare_determinant(nq, &occ)?;
        let b = prepare_singlet_homo_lumo(nq, &occ, homo, homo + 1)?;
        Self::new(weights, a, b)
    }

    pub fn weights(&self) -> (f64, f64) {
        self.weights
    }

    pub fn state_a(&self) -> &Statevector {
        &self.states.0
    }

    pub fn state_b(&self) -> &Statevector {
        &self.states.1
    }

    pub fn n_qubits(&self) -> usize {
        self.states.0.n_qubits()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaEnergy {
    pub e_sa: f64,
    pub e_a: f64,
    pub e_b: f64,
}

/// Both ansatz states `U(theta)|Phi_A>`, `U(theta)|Phi_B>`.
pub fn ensemble_states(
    theta: &[f64],
    ensemble: &EnsembleSpec,
    ansatz: &CompiledAnsatz,
) -> Result<(Statevector, Statevector)> {
    Ok((
        ansatz.apply(ensemble.state_a(), theta)?,
        ansatz.apply(ensemble.state_b(), theta)?,
    ))
}

pub fn sa_energy_of_states(
    a: &Statevector,
    b: &Statevector,
    weights: (f64, f64),
    h: &PauliSum,
) -> Result<SaEnergy> {
    let e_a = expectation(a, h)?;
    let e_b = expectation(b, h)?;
    Ok(SaEnergy {
        e_sa: weights.0 * e_a + weights.1 * e_b,
        e_a,
        e_b,
    })
}

pub fn sa_energy(
    theta: &[f64],
    ensemble: &EnsembleSpec,
    ansatz: &CompiledAnsatz,
    h: &PauliSum,
) -> Result<SaEnergy> {
    let (a, b) = ensemble_states(theta, ensemble, ansatz)?;
    sa_energy_of_states(&a, &b, ensemble.weights(), h)
}

/// `<H^2> - <H>^2` for one state.
pub fn state_variance(state: &Statevector, h: &PauliSum, h2: &PauliSum) -> Result<f64> {
    let e = expectation(state, h)?;
    let e2 = expectation(state, h2)?;
    Ok(e2 - e * e)
}

pub fn sa_variance_of_states(
    a: &Statevector,
    b: &Statevector,
    weights: (f64, f64),
    h: &PauliSum,
    h2: &PauliSum,
) -> Result<f64> {
    Ok(weights.0 * state_variance(a, h, h2)? + weights.1 * state_variance(b, h, h2)?)
}

/// Weighted per-state variance; `h2` is `H*H`.
pub fn sa_variance(
    theta: &[f64],
    ensemble: &EnsembleSpec,
    ansatz: &CompiledAnsatz,
    h: &PauliSum,
    h2: &PauliSum,
) -> Result<f64> {
    let (a, b) = ensemble_states(theta, ensemble, ansatz)?;
    sa_variance_of_states(&a, &b, ensemble.weights(), h, h2)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CostMode {
    #[default]
    Energy,
    /// `e_sa + beta * variance_sa`.
    EnergyPlusVariance { beta: f64 },
}

#[derive(Debug, Clone)]
pub struct SaVqeOptions {
    pub max_iterations: usize,
    pub f_tolerance: f64,
    /// Starting point; zero when absent.
    pub theta0: Option<Vec<f64>>,
    pub cost: CostMode,
    /// Extra seeded random starts around `theta0`.
    pub restarts: usize,
    pub seed: u64,
    pub restart_amplitude: f64,
}

impl Default for SaVqeOptions {
    fn default() -> Self {
        SaVqeOptions {
            max_iterations: 400,
            f_tolerance: 1e-4,
            theta0: None,
            cost: CostMode::Energy,
            restarts: 0,
            seed: 0,
            restart_amplitude: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaVqeTraceRow {
    pub iteration: usize,
    pub e_sa: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub variance: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SaVqeResult {
    pub theta_opt: Vec<f64>,
    pub e_a: f64,
    pub e_b: f64,
    pub e_sa: f64,
    pub variance_sa: Option<f64>,
    pub n_evaluations: usize,
    pub converged: bool,
    pub trace: Vec<SaVqeTraceRow>,
}

impl SaVqeResult {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("iteration,e_sa,e_A,e_B,variance\n");
        for r in &self.trace {
            let v = r.variance.map(|v| format!("{v:.12e}")).unwrap_or_default();
            s.push_str(&format!(
                "{},{:.12},{:.12},{:.12},{}\n",
                r.iteration, r.e_sa, r.e_a, r.e_b, v
            ));
        }
        s
    }
}

struct Problem<'a> {
    ensemble: &'a EnsembleSpec,
    ansatz: &'a CompiledAnsatz,
    h: &'a PauliSum,
    h2: Option<PauliSum>,
    beta: f64,
}

impl Problem<'_> {
    fn evaluate(&self, theta: &[f64]) -> Result<(f64, SaEnergy, Option<f64>)> {
        let (a, b) = ensemble_states(theta, self.ensemble, self.ansatz)?;
        let w = self.ensemble.weights();
        let e = sa_energy_of_states(&a, &b, w, self.h)?;
        match &self.h2 {
            None => Ok((e.e_sa, e, None)),
            Some(h2) => {
                let v = sa_variance_of_states(&a, &b, w, self.h, h2)?;
                Ok((e.e_sa + self.beta * v, e, Some(v)))
            }
        }
    }

    fn cost(&self, theta: &[f64]) -> f64 {
        self.evaluate(theta).map(|r| r.0).unwrap_or(f64::NAN)
    }
}

/// Minimizes the ensemble cost from `options.theta0` (and optional random
/// restarts), returning the best point found.
pub fn optimize(
    ensemble: &EnsembleSpec,
    h: &PauliSum,
    ansatz: &CompiledAnsatz,
    options: &SaVqeOptions,
) -> Result<SaVqeResult> {
    optimize_with(ensemble, h, ansatz, options, &Bfgs::default())
}

pub fn optimize_with(
    ensemble: &EnsembleSpec,
    h: &PauliSum,
    ansatz: &CompiledAnsatz,
    options: &SaVqeOptions,
    minimizer: &dyn Minimizer,
) -> Result<SaVqeResult> {
    if !h.is_hermitian(1e-10) {
        return Err(Error::Invalid("Hamiltonian is not Hermitian".into()));
    }
    if h.n_qubits != ensemble.n_qubits() || ansatz.n_qubits() != ensemble.n_qubits() {
        return Err(Error::Dimension("Hamiltonian, ansatz and ensemble qubit counts differ".into()));
    }
    let n = ansatz.n_params();
    let theta0 = options.theta0.clone().unwrap_or_else(|| vec![0.0; n]);
    if theta0.len() != n {
        return Err(Error::Dimension(format!("theta0 has {} entries, ansatz {}", theta0.len(), n)));
    }
    let (h2, beta) = match options.cost {
        CostMode::Energy => (None, 0.0),
        CostMode::EnergyPlusVariance { beta } => (Some(pauli_multiply(h, h)?), beta),
    };
    let problem = Problem {
        ensemble,
        ansatz,
        h,
        h2,
        beta,
    };
    let mopts = MinimizeOptions {
        max_iterations: options.max_iterations,
        f_tolerance: options.f_tolerance,
    };

    let mut starts = vec![theta0.clone()];
    let mut r = rng(options.seed);
    for _ in 0..options.restarts {
        let a = options.restart_amplitude;
        starts.push(theta0.iter().map(|t| t + r.gen_range(-a..=a)).collect());
    }

    let mut best: Option<(f64, Vec<f64>, bool)> = None;
    let mut best_trace = Vec::new();
    let mut n_evaluations = 0;
    for start in starts {
        let mut trace = Vec::new();
        let (c0, e0, v0) = problem.evaluate(&start)?;
        trace.push(SaVqeTraceRow {
            iteration: 0,
            e_sa: e0.e_sa,
            e_a: e0.e_a,
            e_b: e0.e_b,
            variance: v0,
        });
        let mut cost = |t: &[f64]| problem.cost(t);
        let mut observer = |it: usize, x: &[f64], _f: f64| {
            if let Ok((_, e, v)) = problem.evaluate(x) {
                trace.push(SaVqeTraceRow {
                    iteration: it,
                    e_sa: e.e_sa,
                    e_a: e.e_a,
                    e_b: e.e_b,
                    variance: v,
                });
            }
        };
        let res = minimizer.minimize(&mut cost, &start, &mopts, &mut observer)?;
        n_evaluations += res.n_evaluations + 1;
        let (x, f) = if res.f <= c0 { (res.x, res.f) } else { (start, c0) };
        if best.as_ref().is_none_or(|b| f < b.0) {
            best = Some((f, x, res.converged));
            best_trace = trace;
        }
    }
    let (_, theta_opt, converged) = best.expect("at least one start");
    let (_, e, v) = problem.evaluate(&theta_opt)?;
    Ok(SaVqeResult {
        theta_opt,
        e_a: e.e_a,
        e_b: e.e_b,
        e_sa: e.e_sa,
        variance_sa: v,
        n_evaluations,
        converged,
        trace: best_trace,
    })
}

/// Real 2x2 rotation of a state pair: `(c A + s B, -s A + c B)`.
pub fn rotate_pair(a: &Statevector, b: &Statevector, angle: f64) -> Result<(Statevector, Statevector)> {
    let (s, c) = angle.sin_cos();
    let mix = |x: f64, y: f64| -> Vec<Complex64> {
        a.amplitudes()
            .iter()
            .zip(b.amplitudes())
            .map(|(p, q)| p * x + q * y)
            .collect()
    };
    Ok((
        Statevector::from_amplitudes(mix(c, s))?,
        Statevector::from_amplitudes(mix(-s, c))?,
    ))
}
