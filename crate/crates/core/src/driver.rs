//! The SA-OO-VQE outer loop, potential-energy scans and crossing location.

use std::fmt::Write as _;

use crate::ansatz::CompiledAnsatz;
use crate::fermion::qubit_hamiltonian;
use crate::integrals::{
    build_frozen_core, transform_to_mo, ActiveSpaceSpec, AoIntFixture, IntegralSet, MOCoefficients,
};
use crate::orbital::{sa_oo_cycle, sa_rdms, OoOptions};
use crate::rdm::{measure_rdms, SpinFreeRDMs};
use crate::reference::{
    fidelity, sa_casscf_reference, CIVector, DeterminantBasis, ReferenceOptions,
};
use crate::savqe::{self, CostMode, EnsembleSpec, SaVqeOptions};
use crate::statevector::{state_overlap, Statevector};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub active_space: ActiveSpaceSpec,
    pub weights: (f64, f64),
    pub vqe: SaVqeOptions,
    pub oo: OoOptions,
    /// Outer-loop threshold on the change of the averaged energy.
    pub global_tol: f64,
    pub max_cycles: usize,
    pub use_variance: bool,
    pub variance_beta: f64,
    /// Carry the circuit parameters over between cycles.
    pub warm_start: bool,
    /// Skip orbital optimization entirely.
    pub no_oo: bool,
}

impl RunConfig {
    pub fn new(active_space: ActiveSpaceSpec) -> Self {
        RunConfig {
            active_space,
            weights: (0.5, 0.5),
            vqe: SaVqeOptions::default(),
            oo: OoOptions::default(),
            global_tol: 1e-4,
            max_cycles: 20,
            use_variance: false,
            variance_beta: 1.0,
            warm_start: true,
            no_oo: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.global_tol > 0.0) || !(self.vqe.f_tolerance > 0.0) || !(self.oo.g_tol > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if self.max_cycles == 0 {
            return Err(Error::Invalid("max_cycles must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Vqe,
    Oo,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Vqe => "vqe",
            Phase::Oo => "oo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub cycle: usize,
    pub phase: Phase,
    pub iteration: usize,
    pub e_sa: f64,
    pub e_a: Option<f64>,
    pub e_b: Option<f64>,
    pub grad_norm: Option<f64>,
    pub nu: Option<f64>,
}

pub const TRACE_HEADER: &str = "cycle,phase,iteration,e_sa,e_A,e_B,grad_norm,nu";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.12}")).unwrap_or_default()
}

pub fn trace_csv(rows: &[TraceRow]) -> String {
    let mut s = format!("{TRACE_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.12},{},{},{},{}",
            r.cycle,
            r.phase.as_str(),
            r.iteration,
            r.e_sa,
            opt(r.e_a),
            opt(r.e_b),
            r.grad_norm.map(|x| format!("{x:.6e}")).unwrap_or_default(),
            r.nu.map(|x| format!("{x:.6e}")).unwrap_or_default(),
        );
    }
    s
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub e_a: f64,
    pub e_b: f64,
    pub e_sa: f64,
    pub theta: Vec<f64>,
    pub c: MOCoefficients,
    pub states: (Statevector, Statevector),
    pub rdms: (SpinFreeRDMs, SpinFreeRDMs),
    pub n_cycles: usize,
    pub converged: bool,
    /// Averaged energy at the end of each cycle.
    pub cycle_energies: Vec<f64>,
    /// Largest orbital step norm per cycle.
    pub cycle_step_norms: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

impl RunRecord {
    /// `|<Phi_A|Psi_A>|^2` and `|<Phi_B|Psi_B>|^2` with the reference
    /// configurations in the final orbitals.
    pub fn dominant_weights(&self, ensemble: &EnsembleSpec) -> Result<(f64, f64)> {
        Ok((
            state_overlap(ensemble.state_a(), &self.states.0)?.norm_sqr(),
            state_overlap(ensemble.state_b(), &self.states.1)?.norm_sqr(),
        ))
    }
}

/// Averaged energy at given circuit parameters and orbitals.
pub fn evaluate(
    ao: &IntegralSet,
    c: &MOCoefficients,
    config: &RunConfig,
    theta: &[f64],
) -> Result<savqe::SaEnergy> {
    let spec = &config.active_space;
    let fc = build_frozen_core(&transform_to_mo(ao, c)?, spec)?;
    let h = qubit_hamiltonian(&fc);
    let ens = EnsembleSpec::hf_and_singlet(spec.n_active_orb(), spec.n_active_elec, config.weights)?;
    let ans = CompiledAnsatz::for_active_space(spec.n_active_orb())?;
    savqe::sa_energy(theta, &ens, &ans, &h)
}

/// Alternates SA-VQE and orbital optimization until the averaged energy
/// changes by less than `global_tol` over a cycle.
pub fn sa_oo_vqe_run(ao: &IntegralSet, c0: &MOCoefficients, config: &RunConfig) -> Result<RunRecord> {
    config.validate()?;
    let spec = &config.active_space;
    spec.validate(c0.n_mo(), ao.n_elec)?;
    let n_act = spec.n_active_orb();
    let ensemble = EnsembleSpec::hf_and_singlet(n_act, spec.n_active_elec, config.weights)?;
    let ansatz = CompiledAnsatz::for_active_space(n_act)?;
    let mut vqe_opts = config.vqe.clone();
    if config.use_variance {
        vqe_opts.cost = CostMode::EnergyPlusVariance {
            beta: config.variance_beta,
        };
    }

    let mut c = c0.clone();
    let mut theta = vqe_opts.theta0.clone().unwrap_or_else(|| vec![0.0; ansatz.n_params()]);
    let mut trace = Vec::new();
    let mut cycle_energies = Vec::new();
    let mut cycle_step_norms = Vec::new();
    let mut converged = false;
    let mut n_cycles = 0;

    while n_cycles < config.max_cycles {
        n_cycles += 1;
        let cycle = n_cycles;
        let mo = transform_to_mo(ao, &c)?;
        let fc = build_frozen_core(&mo, spec)?;
        let h = qubit_hamiltonian(&fc);

        let opts = SaVqeOptions {
            theta0: if config.warm_start { Some(theta.clone()) } else { None },
            ..vqe_opts.clone()
        };
        let res = savqe::optimize(&ensemble, &h, &ansatz, &opts)?;
        for r in &res.trace {
            trace.push(TraceRow {
                cycle,
                phase: Phase::Vqe,
                iteration: r.iteration,
                e_sa: r.e_sa,
                e_a: Some(r.e_a),
                e_b: Some(r.e_b),
                grad_norm: None,
                nu: None,
            });
        }
        theta = res.theta_opt;
        let e_vqe = res.e_sa;

        let mut e_end = e_vqe;
        let mut step_max: f64 = 0.0;
        if !config.no_oo {
            let (a, b) = savqe::ensemble_states(&theta, &ensemble, &ansatz)?;
            let avg = sa_rdms(&measure_rdms(&a, n_act)?, &measure_rdms(&b, n_act)?, config.weights)?;
            let cyc = sa_oo_cycle(ao, &c, spec, &avg, &config.oo)?;
            for (i, rep) in cyc.reports.iter().enumerate() {
                step_max = step_max.max(rep.step_norm);
                trace.push(TraceRow {
                    cycle,
                    phase: Phase::Oo,
                    iteration: i + 1,
                    e_sa: rep.e_sa_after,
                    e_a: None,
                    e_b: None,
                    grad_norm: Some(rep.gradient_norm),
                    nu: Some(rep.nu),
                });
            }
            if let Some(last) = cyc.reports.last() {
                e_end = last.e_sa_after;
            }
            c = cyc.c;
        }
        cycle_step_norms.push(step_max);

        let reference = cycle_energies.last().copied().unwrap_or(e_vqe);
        cycle_energies.push(e_end);
        if (e_end - reference).abs() < config.global_tol {
            converged = true;
            break;
        }
    }

    let mo = transform_to_mo(ao, &c)?;
    let fc = build_frozen_core(&mo, spec)?;
    let h = qubit_hamiltonian(&fc);
    let (a, b) = savqe::ensemble_states(&theta, &ensemble, &ansatz)?;
    let e = savqe::sa_energy_of_states(&a, &b, config.weights, &h)?;
    let rdms = (measure_rdms(&a, n_act)?, measure_rdms(&b, n_act)?);
    Ok(RunRecord {
        e_a: e.e_a,
        e_b: e.e_b,
        e_sa: e.e_sa,
        theta,
        c,
        states: (a, b),
        rdms,
        n_cycles,
        converged,
        cycle_energies,
        cycle_step_norms,
        trace,
    })
}

/// Geometry label and scan coordinates of a fixture.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryParams {
    pub label: String,
    pub alpha_deg: f64,
    pub phi_deg: Option<f64>,
}

impl GeometryParams {
    pub fn from_fixture(f: &AoIntFixture, fallback_label: &str) -> Self {
        GeometryParams {
            label: f.meta("label").unwrap_or(fallback_label).to_string(),
            alpha_deg: f.meta_f64("alpha_deg").unwrap_or(f64::NAN),
            phi_deg: f.meta_f64("phi_deg"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub geometry: GeometryParams,
    pub e_a: f64,
    pub e_b: f64,
    pub e_sa: f64,
    /// `e_B - e_A` with diabatic labels.
    pub gap: f64,
    pub n_cycles: usize,
    pub converged: bool,
    pub fidelity: Option<(f64, f64)>,
    pub dominant_weights: (f64, f64),
    pub run: RunRecord,
}

#[derive(Debug, Clone)]
pub enum ScanEntry {
    Ok(Box<ScanRow>),
    Failed { geometry: GeometryParams, error: String },
}

impl ScanEntry {
    pub fn geometry(&self) -> &GeometryParams {
        match self {
            ScanEntry::Ok(r) => &r.geometry,
            ScanEntry::Failed { geometry, .. } => geometry,
        }
    }

    pub fn row(&self) -> Option<&ScanRow> {
        match self {
            ScanEntry::Ok(r) => Some(r),
            ScanEntry::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanResult {
    pub entries: Vec<ScanEntry>,
}

pub const SCAN_HEADER: &str =
    "label,alpha_deg,phi_deg,e_A,e_B,e_sa,gap,n_cycles,converged,fid_A,fid_B,w_dom_A,w_dom_B";

fn fmt_coord(v: f64) -> String {
    if v.is_finite() {
        let s = format!("{v:.6}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        String::new()
    }
}

impl ScanResult {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{SCAN_HEADER}\n");
        for e in &self.entries {
            let g = e.geometry();
            let phi = g.phi_deg.map(fmt_coord).unwrap_or_default();
            match e {
                ScanEntry::Ok(r) => {
                    let (fa, fb) = r
                        .fidelity
                        .map(|(a, b)| (format!("{a:.10}"), format!("{b:.10}")))
                        .unwrap_or_default();
                    let _ = writeln!(
                        s,
                        "{},{},{},{:.10},{:.10},{:.10},{:.10},{},{},{},{},{:.6},{:.6}",
                        g.label,
                        fmt_coord(g.alpha_deg),
                        phi,
                        r.e_a,
                        r.e_b,
                        r.e_sa,
                        r.gap,
                        r.n_cycles,
                        r.converged,
                        fa,
                        fb,
                        r.dominant_weights.0,
                        r.dominant_weights.1
                    );
                }
                ScanEntry::Failed { .. } => {
                    let _ = writeln!(s, "{},{},{},,,,,,false,,,,", g.label, fmt_coord(g.alpha_deg), phi);
                }
            }
        }
        s
    }

    /// `(alpha, gap)` for successful rows, in scan order.
    pub fn gaps(&self) -> Vec<(f64, f64)> {
        self.entries
            .iter()
            .filter_map(|e| e.row().map(|r| (r.geometry.alpha_deg, r.gap)))
            .collect()
    }
}

/// SA-CASSCF states used for the fidelity columns.
pub fn reference_fidelities(
    ao: &IntegralSet,
    c0: &MOCoefficients,
    config: &RunConfig,
    run: &RunRecord,
) -> Result<(f64, f64)> {
    let spec = &config.active_space;
    let refopts = ReferenceOptions {
        global_tol: config.global_tol,
        max_cycles: config.max_cycles,
        oo: config.oo.clone(),
        singlets: true,
    };
    let r = sa_casscf_reference(ao, c0, spec, config.weights, &refopts)?;
    let basis = DeterminantBasis::singlet_sector(spec.n_active_orb(), spec.n_active_elec)?;
    let to_ci = |s: &Statevector| {
        CIVector::from_statevector(&normalized_real(s)?, basis.clone(), run.c.clone(), spec.clone())
    };
    let a = to_ci(&run.states.0)?;
    let b = to_ci(&run.states.1)?;
    Ok((fidelity(&a, &r.states.0, &ao.s)?, fidelity(&b, &r.states.1, &ao.s)?))
}

fn normalized_real(s: &Statevector) -> Result<Statevector> {
    Statevector::normalized(s.amplitudes().to_vec())
}

/// One scan row: SA-OO-VQE at one geometry, plus oracle fidelities when
/// requested.
pub fn scan_point(template: &RunConfig, name: &str, f: &AoIntFixture, oracle: bool) -> Result<ScanRow> {
    let geometry = GeometryParams::from_fixture(f, name);
    let run = sa_oo_vqe_run(&f.integrals, &f.coeffs, template)?;
    let spec = &template.active_space;
    let ens = EnsembleSpec::hf_and_singlet(spec.n_active_orb(), spec.n_active_elec, template.weights)?;
    let dominant_weights = run.dominant_weights(&ens)?;
    let fidelity = if oracle {
        Some(reference_fidelities(&f.integrals, &f.coeffs, template, &run)?)
    } else {
        None
    };
    Ok(ScanRow {
        geometry,
        e_a: run.e_a,
        e_b: run.e_b,
        e_sa: run.e_sa,
        gap: run.e_b - run.e_a,
        n_cycles: run.n_cycles,
        converged: run.converged,
        fidelity,
        dominant_weights,
        run,
    })
}

/// Runs every fixture independently; failures are recorded per row.
pub fn pes_scan(template: &RunConfig, fixtures: &[(String, AoIntFixture)], oracle: bool) -> ScanResult {
    let entries = fixtures
        .iter()
        .map(|(name, f)| match scan_point(template, name, f, oracle) {
            Ok(r) => ScanEntry::Ok(Box::new(r)),
            Err(e) => ScanEntry::Failed {
                geometry: GeometryParams::from_fixture(f, name),
                error: e.to_string(),
            },
        })
        .collect();
    ScanResult { entries }
}

/// Coordinates where the signed gap changes sign, by linear interpolation
/// between bracketing points. Points are taken in ascending coordinate.
pub fn locate_crossing(points: &[(f64, f64)]) -> Vec<f64> {
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|(a, g)| a.is_finite() && g.is_finite())
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    let mut last_sign = 0.0;
    let mut last_nonzero: Option<(f64, f64)> = None;
    for &(a, g) in &pts {
        if g == 0.0 {
            if last_sign != 0.0 {
                out.push(a);
                last_sign = 0.0;
                last_nonzero = None;
            }
            continue;
        }
        if let Some((a0, g0)) = last_nonzero {
            if g0 * g < 0.0 {
                out.push(a0 + (a - a0) * g0 / (g0 - g));
            }
        }
        last_sign = g.signum();
        last_nonzero = Some((a, g));
    }
    out
}
