mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use saoovqe::integrals::*;
use saoovqe::optimize::{MinimizeOptions, Minimizer, NelderMead};
use saoovqe::orbital::{rotate_orbitals, rotation_pairs, OrbitalRotation};
use saoovqe::reference::*;
use saoovqe::statevector::Statevector;
use saoovqe::synthetic::{inverse_sqrt, molecule_like, random_eri, random_orthogonal, rng, SyntheticSpec};
use saoovqe::tensor::Tensor4;

fn fc_of(ao: &IntegralSet, c: &MOCoefficients, spec: &ActiveSpaceSpec) -> FrozenCoreHamiltonian {
    build_frozen_core(&transform_to_mo(ao, c).unwrap(), spec).unwrap()
}

#[test]
fn casci_four_in_three_has_nine_determinants() {
    let fc = molecule_fc(3, 5, 6, 4, 3);
    let (basis, st) = casci_solve(&fc, 9).unwrap();
    assert_eq!(basis.len(), 9);
    assert_eq!(st.len(), 9);
    let dense = sorted_eigenvalues(ci_matrix_fc(&fc, &basis).unwrap());
    for (s, e) in st.iter().zip(&dense) {
        assert!((s.energy - e).abs() < 1e-10);
    }
    for w in st.windows(2) {
        assert!(w[0].energy <= w[1].energy);
    }
}

#[test]
fn non_interacting_energies_are_orbital_sums() {
    let eps = [-1.3, -0.4, 0.7];
    let h = DMatrix::from_diagonal(&DVector::from_column_slice(&eps));
    let mo = IntegralSet::new_mo(h, Tensor4::zeros(3), 0.25, 4);
    let spec = ActiveSpaceSpec::contiguous(4, 4, 3).unwrap();
    let fc = build_frozen_core(&mo, &spec).unwrap();
    let (basis, st) = casci_solve(&fc, 9).unwrap();
    let mut expect: Vec<f64> = (0..basis.len())
        .map(|i| {
            let b = basis.bits(i);
            0.25 + (0..6).filter(|k| b >> k & 1 == 1).map(|k| eps[k / 2]).sum::<f64>()
        })
        .collect();
    expect.sort_by(f64::total_cmp);
    for (s, e) in st.iter().zip(&expect) {
        assert!((s.energy - e).abs() < 1e-12, "{} vs {e}", s.energy);
    }
}

#[test]
fn degenerate_levels_are_resolved() {
    // Two electrons, one low orbital and two degenerate upper ones.
    let h = DMatrix::from_diagonal(&DVector::from_column_slice(&[0.0, 1.0, 1.0]));
    let mo = IntegralSet::new_mo(h, Tensor4::zeros(3), 0.0, 2);
    let fc = build_frozen_core(&mo, &ActiveSpaceSpec::contiguous(2, 2, 3).unwrap()).unwrap();
    let (_, st) = casci_solve(&fc, 5).unwrap();
    assert!(st[0].energy.abs() < 1e-12);
    for s in &st[1..5] {
        assert!((s.energy - 1.0).abs() < 1e-12);
    }
}

#[test]
fn singlet_states_have_zero_spin() {
    for seed in 0..4 {
        let fc = molecule_fc(seed, 5, 6, 4, 3);
        let (basis, st) = casci_solve_singlets(&fc, 3).unwrap();
        let s2 = spin_squared_matrix(&basis);
        for s in &st {
            assert!(s.s_squared.abs() < 1e-8);
            assert!((&s2 * &s.vector).dot(&s.vector).abs() < 1e-8);
        }
    }
}

/// SA-CASSCF energy at orbitals `C0 exp(-K)`, solved exactly.
fn sa_energy_at(fx: &AoIntFixture, spec: &ActiveSpaceSpec, pairs: &[(usize, usize)], k: &[f64], w: (f64, f64)) -> f64 {
    let rot = OrbitalRotation::new(pairs.to_vec(), k.to_vec()).unwrap();
    let c = rotate_orbitals(&fx.coeffs, &rot).unwrap();
    let (_, st) = casci_solve_singlets(&fc_of(&fx.integrals, &c, spec), 2).unwrap();
    w.0 * st[0].energy + w.1 * st[1].energy
}

#[test]
fn sa_casscf_matches_brute_force_orbital_search() {
    for seed in 0..2 {
        let fx = molecule_like(&SyntheticSpec::new(seed, 4, 4));
        let spec = ActiveSpaceSpec::contiguous(4, 2, 2).unwrap();
        let mut opts = ReferenceOptions { global_tol: 1e-10, max_cycles: 60, ..Default::default() };
        opts.oo.g_tol = 1e-8;
        let r = sa_casscf_reference(&fx.integrals, &fx.coeffs, &spec, (0.5, 0.5), &opts).unwrap();
        assert!(r.converged);

        let pairs = rotation_pairs(4, &spec, &[0, 1, 2, 3], false);
        let mut cost = |k: &[f64]| sa_energy_at(&fx, &spec, &pairs, k, (0.5, 0.5));
        let mo = MinimizeOptions { max_iterations: 20000, f_tolerance: 1e-14 };
        let mut x = vec![0.0; pairs.len()];
        let mut best = f64::INFINITY;
        for _ in 0..4 {
            let res = NelderMead { initial_step: 0.05 }.minimize(&mut cost, &x, &mo, &mut |_, _, _| {}).unwrap();
            x = res.x;
            best = res.f;
        }
        assert!((r.e_sa - best).abs() < 1e-6, "seed {seed}: {} vs {best}", r.e_sa);
    }
}

#[test]
fn ground_state_weighting_lowers_the_ground_energy() {
    for seed in 0..3 {
        let fx = molecule_like(&SyntheticSpec::new(seed, 5, 6));
        let spec = ActiveSpaceSpec::contiguous(6, 4, 3).unwrap();
        let (_, st) = casci_solve_singlets(&fc_of(&fx.integrals, &fx.coeffs, &spec), 1).unwrap();
        let r = sa_casscf_reference(&fx.integrals, &fx.coeffs, &spec, (1.0, 0.0), &ReferenceOptions::default()).unwrap();
        assert!(r.energies.0 <= st[0].energy + 1e-10, "seed {seed}");
        assert!(r.c.orthonormality_error(&fx.integrals.s) < 1e-10);
    }
}

#[test]
fn mo_overlap_identity_rotation_and_loop() {
    let fx = molecule_like(&SyntheticSpec::new(5, 4, 4));
    let s = &fx.integrals.s;
    let c1 = &fx.coeffs;
    let ov = mo_overlap_matrix(c1, c1, s).unwrap();
    assert!((ov - DMatrix::identity(8, 8)).amax() < 1e-12);

    let r = random_orthogonal(9, 4);
    let c2 = MOCoefficients::new(&c1.c * &r);
    let ov = mo_overlap_matrix(c1, &c2, s).unwrap();
    for p in 0..4 {
        for q in 0..4 {
            assert!((ov[(2 * p, 2 * q)] - r[(p, q)]).abs() < 1e-12);
            assert!((ov[(2 * p + 1, 2 * q + 1)] - r[(p, q)]).abs() < 1e-12);
            assert_eq!(ov[(2 * p, 2 * q + 1)], 0.0);
        }
    }

    let mut g = rng(41);
    let a = MOCoefficients::new(DMatrix::from_fn(4, 3, |_, _| g.gen_range(-1.0..1.0)));
    let b = MOCoefficients::new(DMatrix::from_fn(4, 2, |_, _| g.gen_range(-1.0..1.0)));
    let ov = mo_overlap_matrix(&a, &b, s).unwrap();
    for p in 0..3 {
        for q in 0..2 {
            let mut sum = 0.0;
            for mu in 0..4 {
                for nu in 0..4 {
                    sum += a.c[(mu, p)] * s[(mu, nu)] * b.c[(nu, q)];
                }
            }
            assert!((ov[(2 * p, 2 * q)] - sum).abs() < 1e-12);
        }
    }
    assert!(mo_overlap_matrix(&a, &b, &DMatrix::identity(3, 3)).is_err());
}

#[test]
fn determinant_overlap_same_basis_and_two_electron_form() {
    let basis = DeterminantBasis::singlet_sector(3, 4).unwrap();
    let id = DMatrix::identity(6, 6);
    let occ = |b: u64| (0..6).filter(|k| b >> k & 1 == 1).collect::<Vec<_>>();
    for i in 0..basis.len() {
        for j in 0..basis.len() {
            let o = determinant_overlap(&occ(basis.bits(i)), &occ(basis.bits(j)), &id).unwrap();
            assert_eq!(o, if i == j { 1.0 } else { 0.0 });
        }
    }

    let mut g = rng(2);
    let s = DMatrix::from_fn(6, 6, |_, _| g.gen_range(-1.0..1.0));
    let (a, b, c, d) = (0, 2, 2, 4);
    let expect = s[(a, c)] * s[(b, d)] - s[(a, d)] * s[(b, c)];
    assert!((determinant_overlap(&[a, b], &[c, d], &s).unwrap() - expect).abs() < 1e-14);
    assert!(determinant_overlap(&[0], &[0, 1], &s).is_err());
}

/// Dense Fock-space image of a CI vector, expanded in the Lowdin-orthonormal
/// AO basis.
fn expand_in_ao(psi: &CIVector, s_half: &DMatrix<f64>) -> DVector<f64> {
    let n_ao = s_half.nrows();
    let nq = 2 * n_ao;
    let chat = s_half * &psi.basis_c.c;
    let dressed = |so: usize| {
        let (p, sigma) = (so / 2, so % 2);
        (0..n_ao).fold(DMatrix::zeros(1 << nq, 1 << nq), |m, k| m + creation(2 * k + sigma, nq) * chat[(k, p)])
    };
    let mut out = DVector::zeros(1 << nq);
    for i in 0..psi.basis.len() {
        let mut occ: Vec<usize> = psi.space.frozen.iter().flat_map(|&f| [2 * f, 2 * f + 1]).collect();
        let bits = psi.basis.bits(i);
        for k in 0..2 * psi.basis.n_orb {
            if bits >> k & 1 == 1 {
                occ.push(2 * psi.space.active[k / 2] + k % 2);
            }
        }
        let mut v = DVector::zeros(1 << nq);
        v[0] = 1.0;
        for &so in occ.iter().rev() {
            v = dressed(so) * v;
        }
        out += v * psi.coefficients[i];
    }
    out
}

fn sqrt_spd(s: &DMatrix<f64>) -> DMatrix<f64> {
    inverse_sqrt(s).try_inverse().unwrap()
}

fn random_ci(g: &mut impl Rng, basis: &DeterminantBasis, c: &MOCoefficients, spec: &ActiveSpaceSpec) -> CIVector {
    let v = DVector::from_fn(basis.len(), |_, _| g.gen_range(-1.0..1.0)).normalize();
    CIVector::new(basis.clone(), v, c.clone(), spec.clone()).unwrap()
}

#[test]
fn cross_basis_overlap_matches_common_basis_expansion() {
    for seed in 0..6 {
        let fx = molecule_like(&SyntheticSpec::new(seed, 3, 4));
        let s = &fx.integrals.s;
        let spec = ActiveSpaceSpec::contiguous(4, 2, 2).unwrap();
        let basis = DeterminantBasis::singlet_sector(2, 2).unwrap();
        let c2 = MOCoefficients::new(&fx.coeffs.c * random_orthogonal(100 + seed, 3));
        let mut g = rng(seed);
        let a = random_ci(&mut g, &basis, &fx.coeffs, &spec);
        let b = random_ci(&mut g, &basis, &c2, &spec);
        let sh = sqrt_spd(s);
        let expect = expand_in_ao(&a, &sh).dot(&expand_in_ao(&b, &sh));
        let got = ci_overlap(&a, &b, s).unwrap();
        assert!((got - expect).abs() < 1e-10, "seed {seed}: {got} vs {expect}");
    }
}

#[test]
fn fidelity_properties() {
    let fx = molecule_like(&SyntheticSpec::new(4, 5, 6));
    let s = &fx.integrals.s;
    let spec = ActiveSpaceSpec::contiguous(6, 4, 3).unwrap();
    let fc = fc_of(&fx.integrals, &fx.coeffs, &spec);
    let (basis, st) = casci_solve_singlets(&fc, 2).unwrap();
    let mk = |v: &DVector<f64>, c: &MOCoefficients| CIVector::new(basis.clone(), v.clone(), c.clone(), spec.clone()).unwrap();
    let a = mk(&st[0].vector, &fx.coeffs);
    let b = mk(&st[1].vector, &fx.coeffs);
    assert!((fidelity(&a, &a, s).unwrap() - 1.0).abs() < 1e-12);
    assert!(fidelity(&a, &b, s).unwrap() < 1e-12);

    let mut g = rng(8);
    for k in 0..20 {
        let c2 = MOCoefficients::new(&fx.coeffs.c * random_orthogonal(200 + k, 5));
        let x = random_ci(&mut g, &basis, &fx.coeffs, &spec);
        let y = random_ci(&mut g, &basis, &c2, &spec);
        let (fxy, fyx) = (fidelity(&x, &y, s).unwrap(), fidelity(&y, &x, s).unwrap());
        assert!((fxy - fyx).abs() < 1e-12);
        assert!((0.0..=1.0 + 1e-9).contains(&fxy));
    }
}

#[test]
fn civector_round_trips_through_statevector() {
    let basis = DeterminantBasis::singlet_sector(3, 4).unwrap();
    let spec = ActiveSpaceSpec::contiguous(4, 4, 3).unwrap();
    let mut g = rng(12);
    let x = random_ci(&mut g, &basis, &MOCoefficients::identity(3), &spec);
    let sv = x.to_statevector().unwrap();
    let y = CIVector::from_statevector(&sv, basis.clone(), x.basis_c.clone(), spec.clone()).unwrap();
    assert_eq!(x.coefficients, y.coefficients);

    // Weight outside the sector is refused.
    let mut amps = sv.amplitudes().to_vec();
    amps[0b1] = Complex64::new(0.1, 0.0);
    let leaky = Statevector::normalized(amps).unwrap();
    assert!(CIVector::from_statevector(&leaky, basis.clone(), x.basis_c.clone(), spec.clone()).is_err());
    assert!(CIVector::new(basis, DVector::from_element(9, 1.0), MOCoefficients::identity(3), spec).is_err());
}

#[test]
fn dominant_configuration_weights() {
    let basis = DeterminantBasis::singlet_sector(3, 4).unwrap();
    let spec = ActiveSpaceSpec::contiguous(4, 4, 3).unwrap();
    let hf = interleave(0b011, 0b011, 3);
    let i = basis.position(hf).unwrap();
    let mut v = DVector::zeros(9);
    v[i] = 1.0;
    let det = CIVector::new(basis.clone(), v, MOCoefficients::identity(3), spec.clone()).unwrap();
    assert_eq!(dominant_config_weight(&det, hf), 1.0);
    assert_eq!(dominant_config_weight(&det, basis.bits((i + 1) % 9)), 0.0);

    // Weak two-electron coupling on well-separated levels.
    let h = DMatrix::from_diagonal(&DVector::from_column_slice(&[-2.0, -1.0, 1.0]));
    let g = random_eri(&mut rng(3), 3, 0.05);
    let mo = IntegralSet::new_mo(h, g, 0.0, 4);
    let fc = build_frozen_core(&mo, &spec).unwrap();
    let (b, st) = casci_solve_singlets(&fc, 1).unwrap();
    let psi = CIVector::new(b, st[0].vector.clone(), MOCoefficients::identity(3), spec).unwrap();
    assert!(dominant_config_weight(&psi, hf) > 0.9);
}
