//! Spin-free one- and two-body reduced density matrices.

use nalgebra::DMatrix;

use crate::fermion::{apply_chain, spin_orbital, spin_free_one_body, spin_free_two_body, jordan_wigner, Ladder, DOWN, UP};
use crate::integrals::FrozenCoreHamiltonian;
use crate::statevector::Statevector;
use crate::tensor::Tensor4;
use crate::{Error, Result};

/// `d1[t,u] = <E_tu>`, `d2[t,u,v,w] = <e_tuvw>`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinFreeRDMs {
    pub d1: DMatrix<f64>,
    pub d2: Tensor4,
}

impl SpinFreeRDMs {
    pub fn zeros(n: usize) -> Self {
        SpinFreeRDMs {
            d1: DMatrix::zeros(n, n),
            d2: Tensor4::zeros(n),
        }
    }

    pub fn n_orb(&self) -> usize {
        self.d1.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.d1.trace()
    }

    /// `shift + sum h D + 1/2 sum g d`.
    pub fn energy(&self, fc: &FrozenCoreHamiltonian) -> f64 {
        let n = self.n_orb();
        assert_eq!(n, fc.n_active_orb);
        let mut e = fc.shift + fc.h_eff.component_mul(&self.d1).sum();
        let g = fc.g_act.as_slice();
        let d = self.d2.as_slice();
        e += 0.5 * g.iter().zip(d).map(|(a, b)| a * b).sum::<f64>();
        e
    }

    /// `w_a * a + w_b * b`, elementwise.
    pub fn weighted_sum(a: &SpinFreeRDMs, wa: f64, b: &SpinFreeRDMs, wb: f64) -> Result<Self> {
        if a.n_orb() != b.n_orb() {
            return Err(Error::Dimension(format!(
                "RDMs over {} and {} orbitals",
                a.n_orb(),
                b.n_orb()
            )));
        }
        let d1 = &a.d1 * wa + &b.d1 * wb;
        let mut d2 = Tensor4::zeros(a.n_orb());
        for ((o, x), y) in d2
            .as_mut_slice()
            .iter_mut()
            .zip(a.d2.as_slice())
            .zip(b.d2.as_slice())
        {
            *o = wa * x + wb * y;
        }
        Ok(SpinFreeRDMs { d1, d2 })
    }
}

fn check(state: &Statevector, n_orb: usize) -> Result<()> {
    if state.n_qubits() != 2 * n_orb {
        return Err(Error::Dimension(format!(
            "{} qubits cannot hold {} spatial orbitals",
            state.n_qubits(),
            n_orb
        )));
    }
    Ok(())
}

/// RDMs by direct contraction of amplitudes through the ladder-operator
/// action; zero amplitudes are skipped.
pub fn measure_rdms(state: &Statevector, n_orb: usize) -> Result<SpinFreeRDMs> {
    check(state, n_orb)?;
    let amps = state.amplitudes();
    let support: Vec<usize> = (0..amps.len()).filter(|&b| amps[b].norm_sqr() > 0.0).collect();
    let mut out = SpinFreeRDMs::zeros(n_orb);
    let mut max_im = 0.0f64;

    let mut contract = |chain: &[Ladder]| -> f64 {
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for &b in &support {
            if let Some((s, nb)) = apply_chain(chain, b as u64) {
                acc += amps[nb as usize].conj() * amps[b] * s;
            }
        }
        max_im = max_im.max(acc.im.abs());
        acc.re
    };

    for t in 0..n_orb {
        for u in 0..n_orb {
            let mut v = 0.0;
            for sigma in [UP, DOWN] {
                v += contract(&[
                    Ladder::create(spin_orbital(t, sigma)),
                    Ladder::annihilate(spin_orbital(u, sigma)),
                ]);
            }
            out.d1[(t, u)] = v;
        }
    }
    for t in 0..n_orb {
        for u in 0..n_orb {
            for v in 0..n_orb {
                for w in 0..n_orb {
                    let mut acc = 0.0;
                    for sigma in [UP, DOWN] {
                        for tau in [UP, DOWN] {
                            acc += contract(&[
                                Ladder::create(spin_orbital(t, sigma)),
                                Ladder::create(spin_orbital(v, tau)),
                                Ladder::annihilate(spin_orbital(w, tau)),
                                Ladder::annihilate(spin_orbital(u, sigma)),
                            ]);
                        }
                    }
                    out.d2.set(t, u, v, w, acc);
                }
            }
        }
    }
    if max_im > 1e-9 {
        return Err(Error::Numerical(format!(
            "RDM element with imaginary part {max_im:e}; complex state?"
        )));
    }
    Ok(out)
}

/// Same quantities as [`measure_rdms`] via expectation values of the
/// Jordan-Wigner images of `E_tu` and `e_tuvw`.
pub fn measure_rdms_pauli(state: &Statevector, n_orb: usize) -> Result<SpinFreeRDMs> {
    check(state, n_orb)?;
    let nq = 2 * n_orb;
    let mut out = SpinFreeRDMs::zeros(n_orb);
    for t in 0..n_orb {
        for u in 0..n_orb {
            let op = jordan_wigner(&spin_free_one_body(t, u, n_orb)?, nq)?;
            out.d1[(t, u)] = state.expectation_complex(&op)?.re;
        }
    }
    for t in 0..n_orb {
        for u in 0..n_orb {
            for v in 0..n_orb {
                for w in 0..n_orb {
                    let op = jordan_wigner(&spin_free_two_body(t, u, v, w, n_orb)?, nq)?;
                    out.d2.set(t, u, v, w, state.expectation_complex(&op)?.re);
                }
            }
        }
    }
    Ok(out)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::{closed_shell_occupation, prepare_determinant};

    #[test]
    fn hf_rdm_is_occupation() {
        let hf = prepare_determinant(6, &closed_shell_occupation(&[0, 1])).unwrap();
        let r = measure_rdms(&hf, 3).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![2.0, 2.0, 0.0]));
        assert_eq!(r.d1, expected);
        assert_eq!(r.d2.get(0, 0, 1, 1), 4.0);
        assert_eq!(r.d2.get(0, 1, 1, 0), -2.0);
        assert_eq!(r.d2.get(0, 0, 0, 0), 2.0);
        assert_eq!(r.trace(), 4.0);
    }

    #[test]
    fn wrong_register_size() {
        let s = prepare_determinant(4, &[0]).unwrap();
        assert!(measure_rdms(&s, 3).is_err());
    }

    #[test]
    fn weighted_sum_dimension_check() {
        let a = SpinFreeRDMs::zeros(2);
        let b = SpinFreeRDMs::zeros(3);
        assert!(SpinFreeRDMs::weighted_sum(&a, 0.5, &b, 0.5).is_err());
    }
}
