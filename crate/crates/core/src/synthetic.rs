//! Deterministic seeded generators for test and demo systems.
//!
//! Everything here is driven by a `ChaCha8Rng` seeded from a `u64`, so output
//! is reproducible across runs and platforms.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::integrals::{AoIntFixture, BasisTag, IntegralSet, MOCoefficients};
use crate::tensor::Tensor4;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(-1.0..1.0)
}

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = scale * uniform(rng);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Random tensor with the eight-fold `(pq|rs)` symmetry and uniform entries.
pub fn random_eri(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Tensor4 {
    let mut g = Tensor4::zeros(n);
    for p in 0..n {
        for q in 0..=p {
            for r in 0..=p {
                let s_max = if r == p { q } else { r };
                for s in 0..=s_max {
                    g.set_8fold(p, q, r, s, scale * uniform(rng));
                }
            }
        }
    }
    g
}

/// Random orthogonal `n_rows x n_cols` matrix (orthonormal columns) from the
/// QR factorization of a random matrix.
pub fn random_orthogonal(seed: u64, n: usize) -> DMatrix<f64> {
    let mut r = rng(seed ^ 0x5_eed0_f0a7);
    let m = DMatrix::from_fn(n, n, |_, _| uniform(&mut r));
    let qr = m.qr();
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..n {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// MO-basis integral set with uniform random entries of the right symmetry.
/// Not physical; used for algebraic identities.
pub fn random_mo_integrals(seed: u64, n_orb: usize, n_elec: usize) -> IntegralSet {
    let mut r = rng(seed);
    let h = random_symmetric(&mut r, n_orb, 1.0);
    let g = random_eri(&mut r, n_orb, 0.5);
    let e = uniform(&mut r);
    IntegralSet::new_mo(h, g, e, n_elec)
}

/// AO-basis set with a random positive-definite overlap.
pub fn random_ao_integrals(seed: u64, n_orb: usize, n_elec: usize) -> IntegralSet {
    let mut r = rng(seed);
    let h = random_symmetric(&mut r, n_orb, 1.0);
    let g = random_eri(&mut r, n_orb, 0.5);
    let e = uniform(&mut r);
    let s = random_overlap(&mut r, n_orb);
    IntegralSet {
        n_orb,
        h,
        g,
        s,
        e_scalar: e,
        n_elec,
        ms2: 0,
        basis: BasisTag::Ao,
    }
}

fn random_overlap(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::identity(n, n);
    let off = random_symmetric(r, n, 0.15 / (n as f64).sqrt());
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s[(i, j)] = off[(i, j)];
            }
        }
    }
    s
}

/// `S^{-1/2}` for a symmetric positive-definite matrix.
pub fn inverse_sqrt(s: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = s.clone().symmetric_eigen();
    let d = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|l| 1.0 / l.sqrt()));
    &eig.eigenvectors * DMatrix::from_diagonal(&d) * eig.eigenvectors.transpose()
}

/// Parameters of a molecule-like synthetic system.
#[derive(Debug, Clone)]
pub struct SyntheticSpec {
    pub seed: u64,
    pub n_orb: usize,
    pub n_elec: usize,
    /// Scan coordinate; the one-electron part is distorted linearly in it.
    pub alpha_deg: f64,
    pub phi_deg: f64,
}

impl SyntheticSpec {
    pub fn new(seed: u64, n_orb: usize, n_elec: usize) -> Self {
        SyntheticSpec {
            seed,
            n_orb,
            n_elec,
            alpha_deg: 120.0,
            phi_deg: 90.0,
        }
    }
}

/// Molecule-like AO system: increasing orbital energies, a positive
/// semidefinite factorized two-electron supermatrix, a non-orthogonal
/// overlap and RHF canonical orbitals as the initial MO coefficients.
pub fn molecule_like(spec: &SyntheticSpec) -> AoIntFixture {
    let n = spec.n_orb;
    let mut r = rng(spec.seed);
    let s = random_overlap(&mut r, n);

    let mut h = random_symmetric(&mut r, n, 0.2);
    for k in 0..n {
        h[(k, k)] = -2.0 + 0.6 * k as f64 + 0.1 * uniform(&mut r);
    }
    let distortion = random_symmetric(&mut r, n, 0.05);
    let x = (spec.alpha_deg - 120.0) / 10.0;
    h += distortion * x;

    // (pq|rs) = sum_P B_P[p,q] B_P[r,s] is positive semidefinite as a
    // supermatrix and carries the full real eight-fold symmetry.
    let n_aux = 2 * n;
    let mut g = Tensor4::zeros(n);
    for _ in 0..n_aux {
        let mut b = random_symmetric(&mut r, n, 0.4);
        for k in 0..n {
            b[(k, k)] += 0.35 + 0.05 * uniform(&mut r);
        }
        for p in 0..n {
            for q in 0..n {
                let bpq = b[(p, q)];
                for rr in 0..n {
                    for ss in 0..n {
                        g.add(p, q, rr, ss, bpq * b[(rr, ss)] / n_aux as f64);
                    }
                }
            }
        }
    }
    let e_nuc = 1.0 + 0.5 * uniform(&mut r);

    let integrals = IntegralSet {
        n_orb: n,
        h,
        g,
        s,
        e_scalar: e_nuc,
        n_elec: spec.n_elec,
        ms2: 0,
        basis: BasisTag::Ao,
    };
    let c = rhf(&integrals, 200, 1e-11);
    AoIntFixture {
        integrals,
        coeffs: MOCoefficients::new(c),
        metadata: vec![
            ("label".into(), format!("synthetic-s{}-a{}", spec.seed, fmt_angle(spec.alpha_deg))),
            ("alpha_deg".into(), fmt_angle(spec.alpha_deg)),
            ("phi_deg".into(), fmt_angle(spec.phi_deg)),
            ("seed".into(), spec.seed.to_string()),
        ],
    }
}

fn fmt_angle(a: f64) -> String {
    let s = format!("{a:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Closed-shell Roothaan-Hall SCF with density damping. Returns canonical
/// orbitals ordered by orbital energy.
pub fn rhf(ints: &IntegralSet, max_iter: usize, tol: f64) -> DMatrix<f64> {
    let n = ints.n_orb;
    let n_occ = ints.n_elec / 2;
    let x = inverse_sqrt(&ints.s);
    let diag = |f: &DMatrix<f64>| -> DMatrix<f64> {
        let fp = x.transpose() * f * &x;
        let eig = fp.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let mut c = DMatrix::zeros(n, n);
        for (k, &o) in order.iter().enumerate() {
            let mut col = &x * eig.eigenvectors.column(o);
            // fix sign: largest component positive
            let imax = col.iamax();
            if col[imax] < 0.0 {
                col.neg_mut();
            }
            c.set_column(k, &col);
        }
        c
    };
    let density = |c: &DMatrix<f64>| -> DMatrix<f64> {
        let occ = c.columns(0, n_occ);
        occ * occ.transpose() * 2.0
    };
    let fock = |p: &DMatrix<f64>| -> DMatrix<f64> {
        let mut f = ints.h.clone();
        for a in 0..n {
            for b in 0..n {
                let mut v = 0.0;
                for c in 0..n {
                    for d in 0..n {
                        v += p[(c, d)] * (ints.g.get(a, b, c, d) - 0.5 * ints.g.get(a, c, b, d));
                    }
                }
                f[(a, b)] += v;
            }
        }
        f
    };
    let energy = |p: &DMatrix<f64>, f: &DMatrix<f64>| -> f64 {
        0.5 * (p.component_mul(&(&ints.h + f))).sum()
    };

    let mut c = diag(&ints.h);
    let mut p = density(&c);
    let mut e_old = f64::INFINITY;
    for it in 0..max_iter {
        let f = fock(&p);
        let e = energy(&p, &f);
        c = diag(&f);
        let p_new = density(&c);
        let damp = if it < 10 { 0.3 } else { 0.0 };
        p = &p_new * (1.0 - damp) + &p * damp;
        if (e - e_old).abs() < tol && (&p_new - &p).amax() < 1e-8 {
            break;
        }
        e_old = e;
    }
    c
}
