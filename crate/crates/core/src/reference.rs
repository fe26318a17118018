//! Exact reference solvers and cross-basis comparisons.
//!
//! Determinants are products of creation operators in ascending
//! interleaved spin-orbital order (`2t` = alpha, `2t+1` = beta), matching
//! the qubit register, so CI coefficients equal statevector amplitudes.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::integrals::{
    build_frozen_core, transform_to_mo, ActiveSpaceSpec, FrozenCoreHamiltonian, IntegralSet,
    MOCoefficients,
};
use crate::orbital::{sa_oo_cycle, sa_rdms, OoOptions};
use crate::rdm::{measure_rdms, SpinFreeRDMs};
use crate::statevector::Statevector;
use crate::tensor::Tensor4;
use crate::{Error, Result};
use num_complex::Complex64;

/// Largest sector handled by the dense solver.
pub const MAX_DETERMINANTS: usize = 10_000;

/// Fixed-`(n_alpha, n_beta)` determinants, ordered by `(alpha, beta)` masks.
#[derive(Debug, Clone, PartialEq)]
pub struct DeterminantBasis {
    pub n_orb: usize,
    pub determinants: Vec<(u64, u64)>,
    index: HashMap<u64, usize>,
}

fn masks(n: usize, k: usize) -> Vec<u64> {
    (0u64..1 << n).filter(|m| m.count_ones() as usize == k).collect()
}

/// Interleaved occupation bits of an `(alpha, beta)` pair.
pub fn interleave(alpha: u64, beta: u64, n_orb: usize) -> u64 {
    let mut b = 0;
    for t in 0..n_orb {
        b |= ((alpha >> t) & 1) << (2 * t);
        b |= ((beta >> t) & 1) << (2 * t + 1);
    }
    b
}

impl DeterminantBasis {
    pub fn new(n_orb: usize, n_alpha: usize, n_beta: usize) -> Result<Self> {
        if n_orb > 16 || n_alpha > n_orb || n_beta > n_orb {
            return Err(Error::Invalid(format!(
                "no sector with ({n_alpha}, {n_beta}) electrons in {n_orb} orbitals"
            )));
        }
        let a = masks(n_orb, n_alpha);
        let b = masks(n_orb, n_beta);
        if a.len() * b.len() > MAX_DETERMINANTS {
            return Err(Error::Invalid(format!(
                "sector of {} determinants exceeds the dense limit of {MAX_DETERMINANTS}",
                a.len() * b.len()
            )));
        }
        let mut determinants = Vec::with_capacity(a.len() * b.len());
        for &x in &a {
            for &y in &b {
                determinants.push((x, y));
            }
        }
        let index = determinants
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| (interleave(x, y, n_orb), i))
            .collect();
        Ok(DeterminantBasis {
            n_orb,
            determinants,
            index,
        })
    }

    /// `S_z = 0` sector of `n_elec` electrons.
    pub fn singlet_sector(n_orb: usize, n_elec: usize) -> Result<Self> {
        if !n_elec.is_multiple_of(2) {
            return Err(Error::Invalid(format!("{n_elec} electrons have no S_z = 0 sector")));
        }
        Self::new(n_orb, n_elec / 2, n_elec / 2)
    }

    pub fn len(&self) -> usize {
        self.determinants.len()
    }

    pub fn is_empty(&self) -> bool {
        self.determinants.is_empty()
    }

    /// Interleaved occupation bits (the qubit basis index) of determinant `i`.
    pub fn bits(&self, i: usize) -> u64 {
        let (a, b) = self.determinants[i];
        interleave(a, b, self.n_orb)
    }

    pub fn position(&self, bits: u64) -> Option<usize> {
        self.index.get(&bits).copied()
    }
}

/// Anticommutation sign and result of `a_m` (`create = false`) or `a^dag_m`.
fn ladder(bits: u64, m: usize, create: bool) -> Option<(f64, u64)> {
    let occ = bits >> m & 1 == 1;
    if occ == create {
        return None;
    }
    let below = (bits & ((1u64 << m) - 1)).count_ones();
    Some((if below.is_multiple_of(2) { 1.0 } else { -1.0 }, bits ^ (1 << m)))
}

/// Spin-orbital Hamiltonian data: `h[P,Q]` and antisymmetrized
/// `<PQ||RS>` assembled from spatial integrals.
struct SpinOrbitalHamiltonian<'a> {
    h: &'a DMatrix<f64>,
    g: &'a Tensor4,
    shift: f64,
}

impl SpinOrbitalHamiltonian<'_> {
    fn h1(&self, p: usize, q: usize) -> f64 {
        if p % 2 != q % 2 {
            0.0
        } else {
            self.h[(p / 2, q / 2)]
        }
    }

    /// `<PQ|RS> = (pr|qs)` with spin selection.
    fn phys(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        if p % 2 != r % 2 || q % 2 != s % 2 {
            0.0
        } else {
            self.g.get(p / 2, r / 2, q / 2, s / 2)
        }
    }

    fn anti(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.phys(p, q, r, s) - self.phys(p, q, s, r)
    }

    /// `<J|H|I>` by the Slater-Condon rules.
    fn element(&self, bj: u64, bi: u64) -> f64 {
        let diff = bj ^ bi;
        let occ = |b: u64| (0..64).filter(move |k| b >> k & 1 == 1);
        match diff.count_ones() {
            0 => {
                let mut e = self.shift;
                for i in occ(bi) {
                    e += self.h1(i, i);
                    for j in occ(bi) {
                        e += 0.5 * self.anti(i, j, i, j);
                    }
                }
                e
            }
            2 => {
                let i = (diff & bi).trailing_zeros() as usize;
                let a = (diff & bj).trailing_zeros() as usize;
                let (s1, b1) = ladder(bi, i, false).expect("occupied");
                let (s2, b2) = ladder(b1, a, true).expect("empty");
                debug_assert_eq!(b2, bj);
                let mut v = self.h1(a, i);
                for j in occ(bi) {
                    if j != i {
                        v += self.anti(a, j, i, j);
                    }
                }
                s1 * s2 * v
            }
            4 => {
                let holes: Vec<usize> = occ(diff & bi).collect();
                let parts: Vec<usize> = occ(diff & bj).collect();
                let (i, j) = (holes[0], holes[1]);
                let (a, b) = (parts[0], parts[1]);
                // |J> = sign a^dag_a a^dag_b a_j a_i |I>
                let mut sign = 1.0;
                let mut bits = bi;
                for (m, create) in [(i, false), (j, false), (b, true), (a, true)] {
                    let (s, nb) = ladder(bits, m, create).expect("valid excitation");
                    sign *= s;
                    bits = nb;
                }
                debug_assert_eq!(bits, bj);
                sign * self.anti(a, b, i, j)
            }
            _ => 0.0,
        }
    }
}

/// Dense Hamiltonian matrix over a determinant basis.
pub fn ci_matrix(basis: &DeterminantBasis, h: &DMatrix<f64>, g: &Tensor4, shift: f64) -> Result<DMatrix<f64>> {
    if h.nrows() != basis.n_orb || g.dim() != basis.n_orb {
        return Err(Error::Dimension(format!(
            "integrals over {} orbitals for a {}-orbital determinant basis",
            h.nrows(),
            basis.n_orb
        )));
    }
    let ham = SpinOrbitalHamiltonian { h, g, shift };
    let n = basis.len();
    let bits: Vec<u64> = (0..n).map(|i| basis.bits(i)).collect();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = ham.element(bits[j], bits[i]);
            m[(j, i)] = v;
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

pub fn ci_matrix_fc(fc: &FrozenCoreHamiltonian, basis: &DeterminantBasis) -> Result<DMatrix<f64>> {
    ci_matrix(basis, &fc.h_eff, &fc.g_act, fc.shift)
}

/// `<Phi|H|Phi>` for one determinant over the full orbital set, given as
/// interleaved occupation bits.
pub fn determinant_energy(ints: &IntegralSet, bits: u64) -> f64 {
    SpinOrbitalHamiltonian {
        h: &ints.h,
        g: &ints.g,
        shift: ints.e_scalar,
    }
    .element(bits, bits)
}

/// `S_+ |c>` as a sparse map over interleaved bits.
fn s_plus(basis: &DeterminantBasis, c: &[f64]) -> HashMap<u64, f64> {
    let mut out: HashMap<u64, f64> = HashMap::new();
    for (i, &ci) in c.iter().enumerate() {
        if ci == 0.0 {
            continue;
        }
        let b = basis.bits(i);
        for t in 0..basis.n_orb {
            let Some((s1, b1)) = ladder(b, 2 * t + 1, false) else { continue };
            let Some((s2, b2)) = ladder(b1, 2 * t, true) else { continue };
            *out.entry(b2).or_default() += s1 * s2 * ci;
        }
    }
    out
}

/// `<S^2>` of a CI vector.
pub fn spin_squared(basis: &DeterminantBasis, c: &[f64]) -> f64 {
    let (a, b) = basis.determinants.first().map_or((0, 0), |&(a, b)| (a.count_ones(), b.count_ones()));
    let sz = (a as f64 - b as f64) / 2.0;
    let norm2: f64 = c.iter().map(|x| x * x).sum();
    let sp: f64 = s_plus(basis, c).values().map(|v| v * v).sum();
    sp + norm2 * (sz * sz + sz)
}

/// Dense `S^2` over a determinant basis.
pub fn spin_squared_matrix(basis: &DeterminantBasis) -> DMatrix<f64> {
    let n = basis.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        for j in 0..n {
            let mut f = vec![0.0; n];
            f[j] = 1.0;
            let a = s_plus(basis, &e);
            let b = s_plus(basis, &f);
            m[(i, j)] = a.iter().map(|(k, v)| v * b.get(k).copied().unwrap_or(0.0)).sum();
        }
    }
    let (na, nb) = basis.determinants.first().map_or((0, 0), |&(a, b)| (a.count_ones(), b.count_ones()));
    let sz = (na as f64 - nb as f64) / 2.0;
    for i in 0..n {
        m[(i, i)] += sz * sz + sz;
    }
    m
}

/// CI expansion over active-space determinants, tied to the orbitals that
/// define them.
#[derive(Debug, Clone)]
pub struct CIVector {
    pub basis: DeterminantBasis,
    pub coefficients: DVector<f64>,
    pub basis_c: MOCoefficients,
    pub space: ActiveSpaceSpec,
}

impl CIVector {
    pub fn new(
        basis: DeterminantBasis,
        coefficients: DVector<f64>,
        basis_c: MOCoefficients,
        space: ActiveSpaceSpec,
    ) -> Result<Self> {
        if coefficients.len() != basis.len() {
            return Err(Error::Dimension(format!(
                "{} coefficients for {} determinants",
                coefficients.len(),
                basis.len()
            )));
        }
        if (coefficients.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::Invalid(format!(
                "CI vector norm {} is not 1",
                coefficients.norm()
            )));
        }
        if space.active.len() != basis.n_orb {
            return Err(Error::Dimension("active space and determinant basis disagree".into()));
        }
        Ok(CIVector {
            basis,
            coefficients,
            basis_c,
            space,
        })
    }

    /// Reads the sector amplitudes of a real statevector.
    pub fn from_statevector(
        state: &Statevector,
        basis: DeterminantBasis,
        basis_c: MOCoefficients,
        space: ActiveSpaceSpec,
    ) -> Result<Self> {
        if state.n_qubits() != 2 * basis.n_orb {
            return Err(Error::Dimension("statevector and determinant basis disagree".into()));
        }
        let mut leak = 0.0;
        let mut c = DVector::zeros(basis.len());
        for (k, a) in state.amplitudes().iter().enumerate() {
            match basis.position(k as u64) {
                Some(i) => {
                    if a.im.abs() > 1e-8 {
                        return Err(Error::Numerical(format!(
                            "amplitude {k} has imaginary part {:e}",
                            a.im
                        )));
                    }
                    c[i] = a.re;
                }
                None => leak += a.norm_sqr(),
            }
        }
        if leak > 1e-10 {
            return Err(Error::Invalid(format!("state has weight {leak:e} outside the sector")));
        }
        Self::new(basis, c, basis_c, space)
    }

    pub fn to_statevector(&self) -> Result<Statevector> {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * self.basis.n_orb)];
        for (i, &v) in self.coefficients.iter().enumerate() {
            amps[self.basis.bits(i) as usize] = Complex64::new(v, 0.0);
        }
        Statevector::from_amplitudes(amps)
    }

    /// Occupied spin orbitals of determinant `i` in the full MO set, frozen
    /// orbitals first, in creation order.
    fn full_occupation(&self, i: usize) -> Vec<usize> {
        let mut occ: Vec<usize> = self.space.frozen.iter().flat_map(|&f| [2 * f, 2 * f + 1]).collect();
        let bits = self.basis.bits(i);
        for k in 0..2 * self.basis.n_orb {
            if bits >> k & 1 == 1 {
                occ.push(2 * self.space.active[k / 2] + k % 2);
            }
        }
        occ
    }
}

#[derive(Debug, Clone)]
pub struct CasciState {
    pub energy: f64,
    pub s_squared: f64,
    pub vector: DVector<f64>,
}

fn eig_sorted(m: DMatrix<f64>) -> Vec<(f64, DVector<f64>)> {
    let e = SymmetricEigen::new(m);
    let mut v: Vec<(f64, DVector<f64>)> = e
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(i, &l)| (l, e.eigenvectors.column(i).into_owned()))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    v
}

/// Lowest `n_states` eigenpairs of the active Hamiltonian in the `S_z = 0`
/// sector, energies including the frozen-core shift.
pub fn casci_solve(fc: &FrozenCoreHamiltonian, n_states: usize) -> Result<(DeterminantBasis, Vec<CasciState>)> {
    let basis = DeterminantBasis::singlet_sector(fc.n_active_orb, fc.n_active_elec)?;
    let m = ci_matrix_fc(fc, &basis)?;
    let states = eig_sorted(m)
        .into_iter()
        .take(n_states)
        .map(|(energy, vector)| CasciState {
            energy,
            s_squared: spin_squared(&basis, vector.as_slice()),
            vector,
        })
        .collect();
    Ok((basis, states))
}

/// As [`casci_solve`] restricted to the singlet subspace.
pub fn casci_solve_singlets(fc: &FrozenCoreHamiltonian, n_states: usize) -> Result<(DeterminantBasis, Vec<CasciState>)> {
    let basis = DeterminantBasis::singlet_sector(fc.n_active_orb, fc.n_active_elec)?;
    let h = ci_matrix_fc(fc, &basis)?;
    let s2 = eig_sorted(spin_squared_matrix(&basis));
    let cols: Vec<DVector<f64>> = s2.into_iter().filter(|(l, _)| l.abs() < 1e-8).map(|(_, v)| v).collect();
    if cols.is_empty() {
        return Err(Error::Invalid("sector has no singlet states".into()));
    }
    let p = DMatrix::from_columns(&cols);
    let hs = p.transpose() * &h * &p;
    let states = eig_sorted(hs)
        .into_iter()
        .take(n_states)
        .map(|(energy, y)| {
            let vector = &p * y;
            CasciState {
                energy,
                s_squared: spin_squared(&basis, vector.as_slice()),
                vector,
            }
        })
        .collect();
    Ok((basis, states))
}

/// Full spectrum of a whole-space Hamiltonian in its `S_z` sector.
pub fn full_ci_spectrum(ints: &IntegralSet) -> Result<Vec<f64>> {
    let n_alpha = (ints.n_elec as i64 + ints.ms2) / 2;
    let n_beta = ints.n_elec as i64 - n_alpha;
    if n_alpha < 0 || n_beta < 0 || (ints.n_elec as i64 + ints.ms2) % 2 != 0 {
        return Err(Error::Invalid(format!(
            "inconsistent NELEC = {} and MS2 = {}",
            ints.n_elec, ints.ms2
        )));
    }
    let basis = DeterminantBasis::new(ints.n_orb, n_alpha as usize, n_beta as usize)?;
    let m = ci_matrix(&basis, &ints.h, &ints.g, ints.e_scalar)?;
    Ok(eig_sorted(m).into_iter().map(|(l, _)| l).collect())
}

#[derive(Debug, Clone)]
pub struct ReferenceOptions {
    pub global_tol: f64,
    pub max_cycles: usize,
    pub oo: OoOptions,
    /// Solve inside the singlet subspace.
    pub singlets: bool,
}

impl Default for ReferenceOptions {
    fn default() -> Self {
        ReferenceOptions {
            global_tol: 1e-4,
            max_cycles: 20,
            oo: OoOptions::default(),
            singlets: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SaCasscfResult {
    pub energies: (f64, f64),
    pub e_sa: f64,
    pub states: (CIVector, CIVector),
    pub c: MOCoefficients,
    pub n_cycles: usize,
    pub converged: bool,
    pub gradient_norm: f64,
}

fn state_rdms(basis: &DeterminantBasis, v: &DVector<f64>) -> Result<SpinFreeRDMs> {
    let mut amps = vec![Complex64::new(0.0, 0.0); 1 << (2 * basis.n_orb)];
    for (i, &x) in v.iter().enumerate() {
        amps[basis.bits(i) as usize] = Complex64::new(x, 0.0);
    }
    measure_rdms(&Statevector::from_amplitudes(amps)?, basis.n_orb)
}

/// Ensemble CASSCF: exact two-state CASCI alternated with orbital cycles
/// until the averaged energy changes by less than `global_tol`.
pub fn sa_casscf_reference(
    ao: &IntegralSet,
    c0: &MOCoefficients,
    spec: &ActiveSpaceSpec,
    weights: (f64, f64),
    options: &ReferenceOptions,
) -> Result<SaCasscfResult> {
    let mut c = c0.clone();
    let mut last = f64::INFINITY;
    let mut n_cycles = 0;
    let mut converged = false;
    let mut gradient_norm = f64::INFINITY;
    let solve = |fc: &FrozenCoreHamiltonian| {
        if options.singlets {
            casci_solve_singlets(fc, 2)
        } else {
            casci_solve(fc, 2)
        }
    };
    while n_cycles < options.max_cycles {
        n_cycles += 1;
        let mo = transform_to_mo(ao, &c)?;
        let fc = build_frozen_core(&mo, spec)?;
        let (basis, st) = solve(&fc)?;
        if st.len() < 2 {
            return Err(Error::Invalid("active space holds fewer than two states".into()));
        }
        let ra = state_rdms(&basis, &st[0].vector)?;
        let rb = state_rdms(&basis, &st[1].vector)?;
        let avg = sa_rdms(&ra, &rb, weights)?;
        let cyc = sa_oo_cycle(ao, &c, spec, &avg, &options.oo)?;
        c = cyc.c;
        gradient_norm = cyc.final_gradient_norm;
        let e_sa = weights.0 * st[0].energy + weights.1 * st[1].energy;
        if (e_sa - last).abs() < options.global_tol {
            converged = true;
            break;
        }
        last = e_sa;
    }
    // Final exact solve in the final orbitals.
    let mo = transform_to_mo(ao, &c)?;
    let fc = build_frozen_core(&mo, spec)?;
    let (basis, st) = solve(&fc)?;
    let mk = |v: &DVector<f64>| CIVector::new(basis.clone(), v.clone(), c.clone(), spec.clone());
    let energies = (st[0].energy, st[1].energy);
    Ok(SaCasscfResult {
        energies,
        e_sa: weights.0 * energies.0 + weights.1 * energies.1,
        states: (mk(&st[0].vector)?, mk(&st[1].vector)?),
        c,
        n_cycles,
        converged,
        gradient_norm,
    })
}

/// Spatial overlap `C1^T S C2` expanded to interleaved spin orbitals.
pub fn mo_overlap_matrix(c1: &MOCoefficients, c2: &MOCoefficients, s_ao: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if c1.n_ao() != s_ao.nrows() || c2.n_ao() != s_ao.nrows() || !s_ao.is_square() {
        return Err(Error::Dimension(format!(
            "coefficients over {} and {} AOs with a {}x{} overlap",
            c1.n_ao(),
            c2.n_ao(),
            s_ao.nrows(),
            s_ao.ncols()
        )));
    }
    let m = c1.c.transpose() * s_ao * &c2.c;
    let (a, b) = (m.nrows(), m.ncols());
    let mut out = DMatrix::zeros(2 * a, 2 * b);
    for p in 0..a {
        for q in 0..b {
            out[(2 * p, 2 * q)] = m[(p, q)];
            out[(2 * p + 1, 2 * q + 1)] = m[(p, q)];
        }
    }
    Ok(out)
}

/// `<Phi1|Phi2>` for determinants given as ordered lists of occupied spin
/// orbitals.
pub fn determinant_overlap(occ1: &[usize], occ2: &[usize], mo_overlap: &DMatrix<f64>) -> Result<f64> {
    if occ1.len() != occ2.len() {
        return Err(Error::Invalid(format!(
            "determinants with {} and {} electrons",
            occ1.len(),
            occ2.len()
        )));
    }
    let n = occ1.len();
    let m = DMatrix::from_fn(n, n, |i, j| mo_overlap[(occ1[i], occ2[j])]);
    Ok(if n == 0 { 1.0 } else { m.determinant() })
}

/// `sum_IJ d_I d~_J <Phi_I|Phi~_J>`.
pub fn ci_overlap(psi: &CIVector, psi_ref: &CIVector, s_ao: &DMatrix<f64>) -> Result<f64> {
    if psi.space.n_active_elec != psi_ref.space.n_active_elec
        || psi.space.frozen.len() != psi_ref.space.frozen.len()
        || psi.basis.n_orb != psi_ref.basis.n_orb
    {
        return Err(Error::Invalid("states belong to different active-space sectors".into()));
    }
    let ov = mo_overlap_matrix(&psi.basis_c, &psi_ref.basis_c, s_ao)?;
    let occ_a: Vec<Vec<usize>> = (0..psi.basis.len()).map(|i| psi.full_occupation(i)).collect();
    let occ_b: Vec<Vec<usize>> = (0..psi_ref.basis.len()).map(|j| psi_ref.full_occupation(j)).collect();
    let mut sum = 0.0;
    for (i, oa) in occ_a.iter().enumerate() {
        let di = psi.coefficients[i];
        if di == 0.0 {
            continue;
        }
        for (j, ob) in occ_b.iter().enumerate() {
            let dj = psi_ref.coefficients[j];
            if dj != 0.0 {
                sum += di * dj * determinant_overlap(oa, ob, &ov)?;
            }
        }
    }
    Ok(sum)
}

/// `|<psi_ref|psi>|^2` across orbital bases.
pub fn fidelity(psi: &CIVector, psi_ref: &CIVector, s_ao: &DMatrix<f64>) -> Result<f64> {
    Ok(ci_overlap(psi, psi_ref, s_ao)?.powi(2))
}

/// `|<det|psi>|^2` for a determinant given by its interleaved bits.
pub fn dominant_config_weight(psi: &CIVector, det_bits: u64) -> f64 {
    psi.basis
        .position(det_bits)
        .map_or(0.0, |i| psi.coefficients[i].powi(2))
}
