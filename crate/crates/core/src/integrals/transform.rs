use nalgebra::DMatrix;

use super::{BasisTag, IntegralSet, MOCoefficients, ORTHONORMALITY_TOL};
use crate::tensor::{Tensor4, Tensor4Rect};
use crate::{Error, Result};

fn check(ao: &IntegralSet, c: &MOCoefficients) -> Result<()> {
    if c.n_ao() != ao.n_orb {
        return Err(Error::Dimension(format!(
            "coefficients have {} rows, integrals have {} basis functions",
            c.n_ao(),
            ao.n_orb
        )));
    }
    if c.n_mo() > c.n_ao() {
        return Err(Error::Dimension(format!(
            "{} MOs requested from {} AOs",
            c.n_mo(),
            c.n_ao()
        )));
    }
    let err = c.orthonormality_error(&ao.s);
    if err > ORTHONORMALITY_TOL {
        return Err(Error::Numerical(format!(
            "MO coefficients are not orthonormal: |C^T S C - 1| = {err:e}"
        )));
    }
    Ok(())
}

fn mo_set(ao: &IntegralSet, mut h: DMatrix<f64>, mut g: Tensor4) -> IntegralSet {
    let n = h.nrows();
    // Copy canonical entries onto their images so symmetry holds bitwise.
    for p in 0..n {
        for q in 0..p {
            h[(q, p)] = h[(p, q)];
        }
    }
    g.close_symmetry();
    IntegralSet {
        n_orb: n,
        h,
        g,
        s: DMatrix::identity(n, n),
        e_scalar: ao.e_scalar,
        n_elec: ao.n_elec,
        ms2: ao.ms2,
        basis: BasisTag::Mo,
    }
}

/// Transforms integrals into the basis spanned by the columns of `c`.
///
/// The two-electron part is done as four successive one-index contractions,
/// `O(n_ao^4 n_mo)` overall.
pub fn transform_to_mo(ao: &IntegralSet, c: &MOCoefficients) -> Result<IntegralSet> {
    check(ao, c)?;
    let cm = &c.c;
    let h = cm.transpose() * &ao.h * cm;
    let mut t = Tensor4Rect::from_square(ao.g.clone());
    for _ in 0..4 {
        t = t.contract_first_and_rotate(cm);
    }
    Ok(mo_set(ao, h, t.into_square()))
}

/// Single eight-fold loop; reference path for testing only.
pub fn transform_to_mo_naive(ao: &IntegralSet, c: &MOCoefficients) -> Result<IntegralSet> {
    check(ao, c)?;
    let cm = &c.c;
    let n_ao = c.n_ao();
    let n = c.n_mo();
    let h = cm.transpose() * &ao.h * cm;
    let mut g = Tensor4::zeros(n);
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    let mut acc = 0.0;
                    for a in 0..n_ao {
                        for b in 0..n_ao {
                            for cc in 0..n_ao {
                                for d in 0..n_ao {
                                    acc += ao.g.get(a, b, cc, d)
                                        * cm[(a, p)]
                                        * cm[(b, q)]
                                        * cm[(cc, r)]
                                        * cm[(d, s)];
                                }
                            }
                        }
                    }
                    g.set(p, q, r, s, acc);
                }
            }
        }
    }
    Ok(mo_set(ao, h, g))
}
