//! One- and two-electron integrals, their file formats, the AO to MO
//! transformation and the frozen-core active-space Hamiltonian.
//!
//! Two-electron integrals use chemist notation `g[p,q,r,s] = (pq|rs)` and are
//! stored densely with all eight permutation images populated.

mod aoint;
mod fcidump;
mod frozen_core;
mod transform;

pub use aoint::{parse_aoint, write_aoint, AoIntFixture};
pub use fcidump::{parse_fcidump, write_fcidump};
pub use frozen_core::{build_frozen_core, ActiveSpaceSpec, FrozenCoreHamiltonian};
pub use transform::{transform_to_mo, transform_to_mo_naive};

use nalgebra::DMatrix;

use crate::tensor::Tensor4;

/// Threshold on `|C^T S C - 1|` above which a transform is refused.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisTag {
    Ao,
    Mo,
}

/// One- and two-electron integrals plus overlap and scalar energy.
#[derive(Debug, Clone)]
pub struct IntegralSet {
    pub n_orb: usize,
    /// Core Hamiltonian `h[p,q]`.
    pub h: DMatrix<f64>,
    /// `(pq|rs)`, all eight images populated.
    pub g: Tensor4,
    /// Overlap; identity in an orthonormal MO basis.
    pub s: DMatrix<f64>,
    /// Nuclear repulsion plus any folded constant.
    pub e_scalar: f64,
    pub n_elec: usize,
    /// Twice the spin projection, as recorded by FCIDUMP.
    pub ms2: i64,
    pub basis: BasisTag,
}

impl IntegralSet {
    /// MO-basis set with identity overlap.
    pub fn new_mo(h: DMatrix<f64>, g: Tensor4, e_scalar: f64, n_elec: usize) -> Self {
        let n = h.nrows();
        assert_eq!(g.dim(), n);
        IntegralSet {
            n_orb: n,
            h,
            g,
            s: DMatrix::identity(n, n),
            e_scalar,
            n_elec,
            ms2: 0,
            basis: BasisTag::Mo,
        }
    }

    pub fn max_h_asymmetry(&self) -> f64 {
        let n = self.n_orb;
        let mut err = 0.0f64;
        for p in 0..n {
            for q in 0..n {
                err = err.max((self.h[(p, q)] - self.h[(q, p)]).abs());
            }
        }
        err
    }
}

/// MO coefficients; column `p` expands MO `p` over the AOs.
#[derive(Debug, Clone, PartialEq)]
pub struct MOCoefficients {
    pub c: DMatrix<f64>,
}

impl MOCoefficients {
    pub fn new(c: DMatrix<f64>) -> Self {
        MOCoefficients { c }
    }

    pub fn identity(n: usize) -> Self {
        MOCoefficients {
            c: DMatrix::identity(n, n),
        }
    }

    pub fn n_ao(&self) -> usize {
        self.c.nrows()
    }

    pub fn n_mo(&self) -> usize {
        self.c.ncols()
    }

    /// `max |C^T S C - 1|`.
    pub fn orthonormality_error(&self, s: &DMatrix<f64>) -> f64 {
        let m = self.c.transpose() * s * &self.c;
        let n = m.nrows();
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                err = err.max((m[(i, j)] - target).abs());
            }
        }
        err
    }
}

pub(crate) fn parse_f64(tok: &str) -> Option<f64> {
    let t = tok.trim();
    t.parse::<f64>()
        .ok()
        .or_else(|| t.replace(['D', 'd'], "E").parse::<f64>().ok())
}
