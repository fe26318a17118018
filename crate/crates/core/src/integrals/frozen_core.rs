use nalgebra::DMatrix;

use super::{BasisTag, IntegralSet};
use crate::tensor::Tensor4;
use crate::{Error, Result};

/// Partition of the MO set into doubly occupied (frozen) and active orbitals.
/// Orbitals in neither list are virtual.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActiveSpaceSpec {
    pub frozen: Vec<usize>,
    pub active: Vec<usize>,
    pub n_active_elec: usize,
}

impl ActiveSpaceSpec {
    /// Lowest orbitals frozen, the next `n_active_orb` active.
    pub fn contiguous(n_elec: usize, n_active_elec: usize, n_active_orb: usize) -> Result<Self> {
        if n_active_elec > n_elec || !(n_elec - n_active_elec).is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "cannot place {n_active_elec} of {n_elec} electrons in an active space \
                 with doubly occupied core"
            )));
        }
        let n_frozen = (n_elec - n_active_elec) / 2;
        Ok(ActiveSpaceSpec {
            frozen: (0..n_frozen).collect(),
            active: (n_frozen..n_frozen + n_active_orb).collect(),
            n_active_elec,
        })
    }

    pub fn n_active_orb(&self) -> usize {
        self.active.len()
    }

    pub fn validate(&self, n_orb: usize, n_elec: usize) -> Result<()> {
        for &i in self.frozen.iter().chain(&self.active) {
            if i >= n_orb {
                return Err(Error::Invalid(format!(
                    "orbital index {i} out of range for {n_orb} orbitals"
                )));
            }
        }
        let mut all: Vec<usize> = self.frozen.iter().chain(&self.active).copied().collect();
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invalid(
                "frozen and active orbital lists overlap or repeat".into(),
            ));
        }
        if 2 * self.frozen.len() + self.n_active_elec != n_elec {
            return Err(Error::Invalid(format!(
                "2 x {} frozen + {} active electrons != {} total",
                self.frozen.len(),
                self.n_active_elec,
                n_elec
            )));
        }
        if self.n_active_elec > 2 * self.active.len() {
            return Err(Error::Invalid(format!(
                "{} electrons do not fit in {} active orbitals",
                self.n_active_elec,
                self.active.len()
            )));
        }
        Ok(())
    }
}

/// Effective Hamiltonian on the active orbitals with the frozen core folded
/// into a scalar shift and a one-body embedding potential:
///
/// `H = shift + sum_tu h_eff[t,u] E_tu + 1/2 sum_tuvw g_act[t,u,v,w] e_tuvw`
#[derive(Debug, Clone)]
pub struct FrozenCoreHamiltonian {
    pub h_eff: DMatrix<f64>,
    pub g_act: Tensor4,
    pub shift: f64,
    pub n_active_orb: usize,
    pub n_active_elec: usize,
}

impl FrozenCoreHamiltonian {
    pub fn n_qubits(&self) -> usize {
        2 * self.n_active_orb
    }
}

pub fn build_frozen_core(mo: &IntegralSet, spec: &ActiveSpaceSpec) -> Result<FrozenCoreHamiltonian> {
    if mo.basis != BasisTag::Mo {
        return Err(Error::Invalid("frozen-core construction needs MO integrals".into()));
    }
    spec.validate(mo.n_orb, mo.n_elec)?;
    let h = &mo.h;
    let g = &mo.g;

    let mut e_frozen = 0.0;
    for &i in &spec.frozen {
        e_frozen += 2.0 * h[(i, i)];
        for &j in &spec.frozen {
            e_frozen += 2.0 * g.get(i, i, j, j) - g.get(i, j, j, i);
        }
    }

    let n = spec.active.len();
    let mut h_eff = DMatrix::zeros(n, n);
    for (a, &t) in spec.active.iter().enumerate() {
        for (b, &u) in spec.active.iter().enumerate() {
            let mut v = h[(t, u)];
            for &i in &spec.frozen {
                v += 2.0 * g.get(t, u, i, i) - g.get(t, i, i, u);
            }
            h_eff[(a, b)] = v;
        }
    }

    Ok(FrozenCoreHamiltonian {
        h_eff,
        g_act: g.slice(&spec.active),
        shift: mo.e_scalar + e_frozen,
        n_active_orb: n,
        n_active_elec: spec.n_active_elec,
    })
}
