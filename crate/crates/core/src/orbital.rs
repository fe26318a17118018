//! Orbital optimization at fixed state-averaged RDMs.
//!
//! Orbitals rotate as `C <- C exp(-K)` with `K` skew-symmetric,
//! `K[p,q] = kappa_pq` for each independent pair `p > q`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::integrals::{
    build_frozen_core, transform_to_mo, ActiveSpaceSpec, IntegralSet, MOCoefficients,
};
use crate::rdm::SpinFreeRDMs;
use crate::tensor::Tensor4;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct OoOptions {
    /// Stop when `max |G| < g_tol`.
    pub g_tol: f64,
    pub max_iters: usize,
    /// Smallest eigenvalue enforced on the shifted Hessian.
    pub tau_eig: f64,
    /// Cap on `max |delta kappa|`.
    pub kappa_max: f64,
    pub max_halvings: usize,
    /// Number of leading MOs in the rotation window; all MOs when `None`.
    pub window: Option<usize>,
    pub include_active_active: bool,
}

impl Default for OoOptions {
    fn default() -> Self {
        OoOptions {
            g_tol: 1e-6,
            max_iters: 25,
            tau_eig: 1e-4,
            kappa_max: 0.5,
            max_halvings: 10,
            window: None,
            include_active_active: true,
        }
    }
}

/// Rotation amplitudes over independent MO pairs `(p, q)`, `p > q`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitalRotation {
    pub pairs: Vec<(usize, usize)>,
    pub kappa: Vec<f64>,
}

impl OrbitalRotation {
    pub fn new(pairs: Vec<(usize, usize)>, kappa: Vec<f64>) -> Result<Self> {
        if pairs.len() != kappa.len() {
            return Err(Error::Dimension(format!(
                "{} pairs, {} amplitudes",
                pairs.len(),
                kappa.len()
            )));
        }
        if let Some(&(p, q)) = pairs.iter().find(|(p, q)| p <= q) {
            return Err(Error::Invalid(format!("pair ({p}, {q}) is not ordered p > q")));
        }
        Ok(OrbitalRotation { pairs, kappa })
    }

    pub fn skew(&self, n_mo: usize) -> Result<DMatrix<f64>> {
        let mut k = DMatrix::zeros(n_mo, n_mo);
        for (&(p, q), &v) in self.pairs.iter().zip(&self.kappa) {
            if p >= n_mo {
                return Err(Error::Invalid(format!("pair index {p} outside {n_mo} MOs")));
            }
            k[(p, q)] += v;
            k[(q, p)] -= v;
        }
        Ok(k)
    }

    /// `exp(-K)`.
    pub fn unitary(&self, n_mo: usize) -> Result<DMatrix<f64>> {
        Ok((-self.skew(n_mo)?).exp())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OOStepReport {
    pub gradient_norm: f64,
    pub hessian_min_eig: f64,
    pub nu: f64,
    pub step_norm: f64,
    pub n_halvings: usize,
    pub e_sa_before: f64,
    pub e_sa_after: f64,
}

#[derive(Debug, Clone)]
pub struct OoCycleResult {
    pub c: MOCoefficients,
    pub mo: IntegralSet,
    pub reports: Vec<OOStepReport>,
    pub converged: bool,
    pub final_gradient_norm: f64,
}

/// Weighted average of two states' RDMs.
pub fn sa_rdms(a: &SpinFreeRDMs, b: &SpinFreeRDMs, weights: (f64, f64)) -> Result<SpinFreeRDMs> {
    SpinFreeRDMs::weighted_sum(a, weights.0, b, weights.1)
}

/// MO indices inside the rotation window.
pub fn window_indices(n_mo: usize, spec: &ActiveSpaceSpec, window: Option<usize>) -> Result<Vec<usize>> {
    let w = window.unwrap_or(n_mo);
    if w > n_mo {
        return Err(Error::Invalid(format!("window of {w} exceeds {n_mo} MOs")));
    }
    if let Some(&i) = spec.frozen.iter().chain(&spec.active).find(|&&i| i >= w) {
        return Err(Error::Invalid(format!(
            "occupied or active orbital {i} lies outside the {w}-orbital window"
        )));
    }
    Ok((0..w).collect())
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Frozen,
    Active,
    Virtual,
}

fn classify(n_mo: usize, spec: &ActiveSpaceSpec) -> Vec<Class> {
    let mut c = vec![Class::Virtual; n_mo];
    for &i in &spec.frozen {
        c[i] = Class::Frozen;
    }
    for &t in &spec.active {
        c[t] = Class::Active;
    }
    c
}

/// Non-redundant pairs `p > q` in the window. Frozen-frozen and
/// virtual-virtual pairs never change the energy and are skipped.
pub fn rotation_pairs(
    n_mo: usize,
    spec: &ActiveSpaceSpec,
    window: &[usize],
    include_active_active: bool,
) -> Vec<(usize, usize)> {
    let cls = classify(n_mo, spec);
    let mut pairs = Vec::new();
    for (a, &p) in window.iter().enumerate() {
        for &q in &window[..a] {
            let (p, q) = if p > q { (p, q) } else { (q, p) };
            match (cls[p], cls[q]) {
                (Class::Frozen, Class::Frozen) | (Class::Virtual, Class::Virtual) => continue,
                (Class::Active, Class::Active) if !include_active_active => continue,
                _ => pairs.push((p, q)),
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Active-space RDMs embedded in the full MO range, with closed-shell
/// blocks for the frozen orbitals.
pub struct ExtendedRdms {
    pub d1: DMatrix<f64>,
    pub d2: Tensor4,
    /// Orbitals with nonzero occupation (frozen then active).
    pub occupied: Vec<usize>,
}

pub fn extended_rdms(n_mo: usize, spec: &ActiveSpaceSpec, rdms: &SpinFreeRDMs) -> Result<ExtendedRdms> {
    if rdms.n_orb() != spec.active.len() {
        return Err(Error::Dimension(format!(
            "RDMs over {} orbitals, active space has {}",
            rdms.n_orb(),
            spec.active.len()
        )));
    }
    let mut d1 = DMatrix::zeros(n_mo, n_mo);
    let mut d2 = Tensor4::zeros(n_mo);
    let act = &spec.active;
    for &i in &spec.frozen {
        d1[(i, i)] = 2.0;
        for &j in &spec.frozen {
            d2.add(i, i, j, j, 4.0);
            d2.add(i, j, j, i, -2.0);
        }
    }
    for (a, &t) in act.iter().enumerate() {
        for (b, &u) in act.iter().enumerate() {
            let dtu = rdms.d1[(a, b)];
            d1[(t, u)] = dtu;
            for &i in &spec.frozen {
                d2.add(i, i, t, u, 2.0 * dtu);
                d2.add(t, u, i, i, 2.0 * dtu);
                d2.add(t, i, i, u, -dtu);
                d2.add(i, u, t, i, -dtu);
            }
            for (c, &v) in act.iter().enumerate() {
                for (d, &w) in act.iter().enumerate() {
                    d2.set(t, u, v, w, rdms.d2.get(a, b, c, d));
                }
            }
        }
    }
    let occupied = spec.frozen.iter().chain(act).copied().collect();
    Ok(ExtendedRdms { d1, d2, occupied })
}

/// State-averaged energy of fixed active RDMs in the orbitals of `mo`.
pub fn oo_energy(mo: &IntegralSet, spec: &ActiveSpaceSpec, rdms: &SpinFreeRDMs) -> Result<f64> {
    let fc = build_frozen_core(mo, spec)?;
    Ok(rdms.energy(&fc))
}

/// Generalized Fock matrix `F[m,n] = sum_q D[m,q] h[n,q] + sum_qrs d[m,q,r,s] g[n,q,r,s]`.
fn generalized_fock(mo: &IntegralSet, x: &ExtendedRdms) -> DMatrix<f64> {
    let n = mo.n_orb;
    let occ = &x.occupied;
    let mut f = DMatrix::zeros(n, n);
    for &m in occ {
        for nn in 0..n {
            let mut v = 0.0;
            for &q in occ {
                v += x.d1[(m, q)] * mo.h[(nn, q)];
                for &r in occ {
                    for &s in occ {
                        let d = x.d2.get(m, q, r, s);
                        if d != 0.0 {
                            v += d * mo.g.get(nn, q, r, s);
                        }
                    }
                }
            }
            f[(m, nn)] = v;
        }
    }
    f
}

fn check_inputs(mo: &IntegralSet, spec: &ActiveSpaceSpec) -> Result<()> {
    spec.validate(mo.n_orb, mo.n_elec)
}

/// Analytic orbital gradient `G_pq = 2 (F_pq - F_qp)` over `pairs`.
pub fn orbital_gradient(
    mo: &IntegralSet,
    spec: &ActiveSpaceSpec,
    rdms: &SpinFreeRDMs,
    pairs: &[(usize, usize)],
) -> Result<DVector<f64>> {
    check_inputs(mo, spec)?;
    let x = extended_rdms(mo.n_orb, spec, rdms)?;
    let f = generalized_fock(mo, &x);
    Ok(DVector::from_iterator(
        pairs.len(),
        pairs.iter().map(|&(p, q)| 2.0 * (f[(p, q)] - f[(q, p)])),
    ))
}

/// Analytic orbital Hessian over `pairs`.
pub fn orbital_hessian(
    mo: &IntegralSet,
    spec: &ActiveSpaceSpec,
    rdms: &SpinFreeRDMs,
    pairs: &[(usize, usize)],
) -> Result<DMatrix<f64>> {
    check_inputs(mo, spec)?;
    let n = mo.n_orb;
    let x = extended_rdms(n, spec, rdms)?;
    let f = generalized_fock(mo, &x);
    let occ = &x.occupied;
    let mut is_occ = vec![false; n];
    occ.iter().for_each(|&i| is_occ[i] = true);

    // Y[p,q,r,s] = sum_mn (d[p,m,r,n] + d[p,m,n,r]) g[q,m,s,n] + d[p,r,m,n] g[q,s,m,n],
    // nonzero only for occupied p, r.
    let mut y = Tensor4::zeros(n);
    for &p in occ {
        for &r in occ {
            for q in 0..n {
                for s in 0..n {
                    let mut v = 0.0;
                    for &m in occ {
                        for &k in occ {
                            let a = x.d2.get(p, m, r, k) + x.d2.get(p, m, k, r);
                            let b = x.d2.get(p, r, m, k);
                            if a != 0.0 {
                                v += a * mo.g.get(q, m, s, k);
                            }
                            if b != 0.0 {
                                v += b * mo.g.get(q, s, m, k);
                            }
                        }
                    }
                    y.set(p, q, r, s, v);
                }
            }
        }
    }

    let term = |p: usize, q: usize, r: usize, s: usize| -> f64 {
        let mut v = 0.0;
        if is_occ[p] && is_occ[r] {
            v += 2.0 * x.d1[(p, r)] * mo.h[(q, s)] + 2.0 * y.get(p, q, r, s);
        }
        if q == s {
            v -= f[(p, r)] + f[(r, p)];
        }
        v
    };

    let np = pairs.len();
    let mut hess = DMatrix::zeros(np, np);
    for (a, &(p, q)) in pairs.iter().enumerate() {
        for (b, &(r, s)) in pairs.iter().enumerate().take(a + 1) {
            let v = term(p, q, r, s) - term(q, p, r, s) - term(p, q, s, r) + term(q, p, s, r);
            hess[(a, b)] = v;
            hess[(b, a)] = v;
        }
    }
    Ok(hess)
}

/// Shifted Newton step `-(H + nu)^-1 G`, capped in max-norm.
pub fn augment_and_step(
    gradient: &DVector<f64>,
    hessian: &DMatrix<f64>,
    options: &OoOptions,
) -> Result<(DVector<f64>, OOStepReport)> {
    let n = gradient.len();
    if hessian.nrows() != n || hessian.ncols() != n {
        return Err(Error::Dimension(format!(
            "gradient of length {n} with a {}x{} Hessian",
            hessian.nrows(),
            hessian.ncols()
        )));
    }
    let gnorm = gradient.amax();
    if n == 0 {
        return Ok((
            DVector::zeros(0),
            OOStepReport {
                gradient_norm: 0.0,
                hessian_min_eig: 0.0,
                nu: 0.0,
                step_norm: 0.0,
                n_halvings: 0,
                e_sa_before: f64::NAN,
                e_sa_after: f64::NAN,
            },
        ));
    }
    let eig = SymmetricEigen::new(hessian.clone());
    let lmin = eig.eigenvalues.min();
    let lmax = eig.eigenvalues.max();
    if !lmin.is_finite() || !lmax.is_finite() {
        return Err(Error::Numerical("orbital Hessian has non-finite eigenvalues".into()));
    }
    let nu = (options.tau_eig - lmin).max(0.0);
    let shifted_min = lmin + nu;
    let shifted_max = lmax + nu;
    if shifted_min <= 0.0 || shifted_max / shifted_min > 1e14 {
        return Err(Error::Numerical(format!(
            "shifted orbital Hessian is singular (eigenvalues {shifted_min:e} .. {shifted_max:e})"
        )));
    }
    let proj = eig.eigenvectors.transpose() * gradient;
    let scaled = DVector::from_iterator(
        n,
        proj.iter().zip(eig.eigenvalues.iter()).map(|(g, l)| -g / (l + nu)),
    );
    let mut step = &eig.eigenvectors * scaled;
    let m = step.amax();
    if m > options.kappa_max {
        step *= options.kappa_max / m;
    }
    let report = OOStepReport {
        gradient_norm: gnorm,
        hessian_min_eig: lmin,
        nu,
        step_norm: step.norm(),
        n_halvings: 0,
        e_sa_before: f64::NAN,
        e_sa_after: f64::NAN,
    };
    Ok((step, report))
}

/// `C <- C exp(-K)`. Columns not touched by any pair are unchanged.
pub fn rotate_orbitals(c: &MOCoefficients, rotation: &OrbitalRotation) -> Result<MOCoefficients> {
    let u = rotation.unitary(c.n_mo())?;
    Ok(MOCoefficients::new(&c.c * u))
}

/// Newton iterations on the orbitals at fixed RDMs, re-transforming the
/// integrals from `ao` after every accepted step.
pub fn sa_oo_cycle(
    ao: &IntegralSet,
    c: &MOCoefficients,
    spec: &ActiveSpaceSpec,
    rdms: &SpinFreeRDMs,
    options: &OoOptions,
) -> Result<OoCycleResult> {
    let n_mo = c.n_mo();
    let window = window_indices(n_mo, spec, options.window)?;
    let pairs = rotation_pairs(n_mo, spec, &window, options.include_active_active);
    let mut c = c.clone();
    let mut mo = transform_to_mo(ao, &c)?;
    let mut e = oo_energy(&mo, spec, rdms)?;
    let mut reports = Vec::new();
    let mut converged = false;
    let mut gnorm = f64::INFINITY;

    for _ in 0..=options.max_iters {
        let g = orbital_gradient(&mo, spec, rdms, &pairs)?;
        gnorm = g.amax();
        if gnorm < options.g_tol || pairs.is_empty() {
            converged = true;
            gnorm = if pairs.is_empty() { 0.0 } else { gnorm };
            break;
        }
        if reports.len() == options.max_iters {
            break;
        }
        let h = orbital_hessian(&mo, spec, rdms, &pairs)?;
        let (step, mut report) = augment_and_step(&g, &h, options)?;
        report.e_sa_before = e;

        let mut scale = 1.0;
        let mut accepted = None;
        for halving in 0..=options.max_halvings {
            let rot = OrbitalRotation::new(pairs.clone(), (&step * scale).iter().copied().collect())?;
            let c_new = rotate_orbitals(&c, &rot)?;
            let mo_new = transform_to_mo(ao, &c_new)?;
            let e_new = oo_energy(&mo_new, spec, rdms)?;
            if e_new.is_finite() && e_new <= e + 1e-10 {
                accepted = Some((c_new, mo_new, e_new, halving));
                break;
            }
            scale *= 0.5;
        }
        let Some((c_new, mo_new, e_new, halvings)) = accepted else {
            return Err(Error::Numerical(format!(
                "orbital step raised the energy after {} halvings (E = {e:.12}, |G| = {gnorm:e}, nu = {:e})",
                options.max_halvings, report.nu
            )));
        };
        report.n_halvings = halvings;
        report.step_norm *= scale;
        report.e_sa_after = e_new;
        reports.push(report);
        c = c_new;
        mo = mo_new;
        e = e_new;
    }
    Ok(OoCycleResult {
        c,
        mo,
        reports,
        converged,
        final_gradient_norm: gnorm,
    })
}
