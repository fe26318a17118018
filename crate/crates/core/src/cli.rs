//! Command-line front end. Exit codes: 0 success, 1 usage or input error,
//! 2 numerical failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ci_model::{cone_grid_csv, ConeModel};
use crate::driver::{
    locate_crossing, pes_scan, reference_fidelities, sa_oo_vqe_run, scan_point, trace_csv, RunConfig,
    ScanEntry, ScanResult,
};
use crate::integrals::{
    build_frozen_core, parse_aoint, parse_fcidump, transform_to_mo, write_aoint, ActiveSpaceSpec,
    AoIntFixture, IntegralSet, MOCoefficients,
};
use crate::reference::{casci_solve, casci_solve_singlets};
use crate::savqe::CostMode;
use crate::synthetic::{molecule_like, SyntheticSpec};
use crate::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "saoovqe", version, about = "SA-OO-VQE on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One SA-OO-VQE calculation.
    Run(RunArgs),
    /// SA-OO-VQE over every AOINT fixture in a directory.
    Scan(ScanArgs),
    /// Exact lowest states of the active-space Hamiltonian.
    Casci(CasciArgs),
    /// Fidelities of SA-OO-VQE states against the internal SA-CASSCF.
    Fidelity(RunArgs),
    /// Write a deterministic molecule-like AOINT fixture.
    MakeSynthetic(SynthArgs),
    /// CSV grid of a two-level cone model.
    CiModel(ConeArgs),
}

#[derive(Args, Debug, Clone)]
struct SourceArgs {
    /// AOINT fixture.
    #[arg(long, conflicts_with = "fcidump")]
    fixture: Option<PathBuf>,
    /// FCIDUMP file; its orbitals are taken as the starting MOs.
    #[arg(long)]
    fcidump: Option<PathBuf>,
    /// Active electrons and orbitals, `n_elec,n_orb`.
    #[arg(long, default_value = "4,3")]
    active: String,
    /// Frozen orbital indices (0-based); the active orbitals are the next
    /// lowest ones not listed.
    #[arg(long, value_delimiter = ',')]
    frozen: Option<Vec<usize>>,
}

#[derive(Args, Debug, Clone)]
struct SolverArgs {
    /// Ensemble weights `w_A,w_B`.
    #[arg(long, default_value = "0.5,0.5")]
    weights: String,
    /// Global convergence threshold on the averaged energy (hartree).
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long, default_value_t = 20)]
    max_cycles: usize,
    /// Number of leading MOs in the orbital-rotation window.
    #[arg(long)]
    oo_window: Option<usize>,
    /// Add the averaged variance to the cost.
    #[arg(long)]
    variance: bool,
    /// Variance weight in the cost.
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Fill the oracle columns from the internal SA-CASSCF.
    #[arg(long)]
    oracle: bool,
    /// Skip orbital optimization.
    #[arg(long)]
    no_oo: bool,
    /// Restart the circuit parameters from zero every cycle.
    #[arg(long)]
    zero_reset: bool,
    /// Leave active-active pairs out of the orbital rotation.
    #[arg(long)]
    exclude_active_active: bool,
    /// Extra random starts of the circuit optimizer.
    #[arg(long, default_value_t = 0)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Result CSV.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-iteration trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// Directory of `*.aoint` fixtures, one per geometry.
    #[arg(long)]
    fixtures: PathBuf,
    #[arg(long, default_value = "4,3")]
    active: String,
    #[arg(long, value_delimiter = ',')]
    frozen: Option<Vec<usize>>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args, Debug)]
struct CasciArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 4)]
    n_states: usize,
    /// Restrict to singlet states.
    #[arg(long)]
    singlets: bool,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    n_orb: usize,
    #[arg(long)]
    n_elec: Option<usize>,
    #[arg(long, default_value_t = 120.0)]
    alpha: f64,
    #[arg(long, default_value_t = 90.0)]
    phi: f64,
    /// Output path; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConeArgs {
    #[arg(long, default_value_t = 1.0)]
    hx: f64,
    #[arg(long, default_value_t = 1.0)]
    hz: f64,
    #[arg(long, default_value_t = 1.0)]
    half_width: f64,
    #[arg(long, default_value_t = 21)]
    steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code.
pub fn cli_main<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{text}");
            } else {
                let _ = write!(err, "{text}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                2
            } else {
                1
            }
        }
    }
}

fn parse_pair<T: std::str::FromStr>(s: &str, what: &str) -> Result<(T, T)> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Invalid(format!("{what} must be two comma-separated values, got '{s}'"));
    if parts.len() != 2 {
        return Err(bad());
    }
    Ok((parts[0].parse().map_err(|_| bad())?, parts[1].parse().map_err(|_| bad())?))
}

fn active_space(active: &str, frozen: Option<&[usize]>, n_orb: usize, n_elec: usize) -> Result<ActiveSpaceSpec> {
    let (ne, no): (usize, usize) = parse_pair(active, "--active")?;
    let spec = match frozen {
        None => ActiveSpaceSpec::contiguous(n_elec, ne, no)?,
        Some(f) => ActiveSpaceSpec {
            frozen: f.to_vec(),
            active: (0..n_orb).filter(|i| !f.contains(i)).take(no).collect(),
            n_active_elec: ne,
        },
    };
    if spec.active.len() != no {
        return Err(Error::Invalid(format!("only {} orbitals available for the active space", spec.active.len())));
    }
    spec.validate(n_orb, n_elec)?;
    Ok(spec)
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Load(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Load(format!("{}: {e}", path.display())))
}

/// Integrals plus starting orbitals from either input format.
fn load_source(src: &SourceArgs) -> Result<AoIntFixture> {
    match (&src.fixture, &src.fcidump) {
        (Some(p), None) => parse_aoint(&read(p)?),
        (None, Some(p)) => {
            let ints: IntegralSet = parse_fcidump(&read(p)?)?;
            let n = ints.n_orb;
            Ok(AoIntFixture {
                integrals: ints,
                coeffs: MOCoefficients::identity(n),
                metadata: Vec::new(),
            })
        }
        _ => Err(Error::Invalid("exactly one of --fixture or --fcidump is required".into())),
    }
}

fn run_config(spec: ActiveSpaceSpec, s: &SolverArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::new(spec);
    cfg.weights = parse_pair(&s.weights, "--weights")?;
    cfg.global_tol = s.tol;
    cfg.max_cycles = s.max_cycles;
    cfg.oo.window = s.oo_window;
    cfg.oo.include_active_active = !s.exclude_active_active;
    cfg.use_variance = s.variance;
    cfg.variance_beta = s.beta;
    cfg.warm_start = !s.zero_reset;
    cfg.no_oo = s.no_oo;
    cfg.vqe.restarts = s.restarts;
    cfg.vqe.seed = s.seed;
    if s.variance {
        cfg.vqe.cost = CostMode::EnergyPlusVariance { beta: s.beta };
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Run(a) => {
            let f = load_source(&a.source)?;
            let n = f.coeffs.n_mo();
            let spec = active_space(&a.source.active, a.source.frozen.as_deref(), n, f.integrals.n_elec)?;
            let cfg = run_config(spec, &a.solver)?;
            let name = a
                .source
                .fixture
                .as_ref()
                .or(a.source.fcidump.as_ref())
                .and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let row = scan_point(&cfg, &name, &f, a.solver.oracle)?;
            writeln!(out, "e_A {:.10}", row.e_a)?;
            writeln!(out, "e_B {:.10}", row.e_b)?;
            writeln!(out, "e_sa {:.10}", row.e_sa)?;
            writeln!(out, "n_cycles {}", row.n_cycles)?;
            writeln!(out, "converged {}", row.converged)?;
            if let Some((fa, fb)) = row.fidelity {
                writeln!(out, "fidelity {fa:.8} {fb:.8}")?;
            }
            if let Some(p) = &a.solver.trace {
                write_file(p, &trace_csv(&row.run.trace))?;
            }
            if let Some(p) = &a.solver.out {
                let scan = ScanResult {
                    entries: vec![ScanEntry::Ok(Box::new(row))],
                };
                write_file(p, &scan.to_csv())?;
            }
            Ok(())
        }
        Command::Scan(a) => {
            let fixtures = load_dir(&a.fixtures)?;
            let first = &fixtures[0].1;
            let spec = active_space(&a.active, a.frozen.as_deref(), first.coeffs.n_mo(), first.integrals.n_elec)?;
            let cfg = run_config(spec, &a.solver)?;
            let scan = pes_scan(&cfg, &fixtures, a.solver.oracle);
            let csv = scan.to_csv();
            match &a.solver.out {
                Some(p) => write_file(p, &csv)?,
                None => write!(out, "{csv}")?,
            }
            if let Some(p) = &a.solver.trace {
                let mut all = String::new();
                for e in &scan.entries {
                    if let Some(r) = e.row() {
                        all.push_str(&format!("# {}\n", r.geometry.label));
                        all.push_str(&trace_csv(&r.run.trace));
                    }
                }
                write_file(p, &all)?;
            }
            let crossings = locate_crossing(&scan.gaps());
            for c in crossings {
                writeln!(out, "# crossing at alpha = {c:.4}")?;
            }
            for e in &scan.entries {
                if let ScanEntry::Failed { geometry, error } = e {
                    writeln!(out, "# failed {}: {error}", geometry.label)?;
                }
            }
            Ok(())
        }
        Command::Casci(a) => {
            let f = load_source(&a.source)?;
            let spec = active_space(&a.source.active, a.source.frozen.as_deref(), f.coeffs.n_mo(), f.integrals.n_elec)?;
            let mo = transform_to_mo(&f.integrals, &f.coeffs)?;
            let fc = build_frozen_core(&mo, &spec)?;
            let (_, st) = if a.singlets {
                casci_solve_singlets(&fc, a.n_states)?
            } else {
                casci_solve(&fc, a.n_states)?
            };
            for (i, s) in st.iter().enumerate() {
                writeln!(out, "{i} {:.12} {:.6}", s.energy, s.s_squared.abs())?;
            }
            Ok(())
        }
        Command::Fidelity(a) => {
            let f = load_source(&a.source)?;
            let spec = active_space(&a.source.active, a.source.frozen.as_deref(), f.coeffs.n_mo(), f.integrals.n_elec)?;
            let cfg = run_config(spec, &a.solver)?;
            let run = sa_oo_vqe_run(&f.integrals, &f.coeffs, &cfg)?;
            let (fa, fb) = reference_fidelities(&f.integrals, &f.coeffs, &cfg, &run)?;
            writeln!(out, "fid_A {fa:.10}")?;
            writeln!(out, "fid_B {fb:.10}")?;
            Ok(())
        }
        Command::MakeSynthetic(a) => {
            let n_elec = a.n_elec.unwrap_or(a.n_orb);
            if n_elec == 0 || n_elec % 2 != 0 || n_elec > 2 * a.n_orb {
                return Err(Error::Invalid(format!("cannot place {n_elec} electrons closed-shell in {} orbitals", a.n_orb)));
            }
            let spec = SyntheticSpec {
                alpha_deg: a.alpha,
                phi_deg: a.phi,
                ..SyntheticSpec::new(a.seed, a.n_orb, n_elec)
            };
            let text = write_aoint(&molecule_like(&spec));
            match &a.out {
                Some(p) => write_file(p, &text)?,
                None => write!(out, "{text}")?,
            }
            Ok(())
        }
        Command::CiModel(a) => {
            let m = ConeModel::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], a.hx, a.hz)?;
            let csv = cone_grid_csv(&m, a.half_width, a.steps)?;
            match &a.out {
                Some(p) => write_file(p, &csv)?,
                None => write!(out, "{csv}")?,
            }
            Ok(())
        }
    }
}

/// AOINT fixtures of a directory, ordered by scan coordinate then name.
fn load_dir(dir: &Path) -> Result<Vec<(String, AoIntFixture)>> {
    let rd = std::fs::read_dir(dir).map_err(|e| Error::Load(format!("{}: {e}", dir.display())))?;
    let mut paths: Vec<PathBuf> = rd
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "aoint"))
        .collect();
    paths.sort();
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let f = parse_aoint(&read(&p)?).map_err(|e| Error::Load(format!("{}: {e}", p.display())))?;
        let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        out.push((name, f));
    }
    if out.is_empty() {
        return Err(Error::Load(format!("no .aoint fixtures in {}", dir.display())));
    }
    out.sort_by(|a, b| {
        let key = |f: &AoIntFixture| f.meta_f64("alpha_deg").unwrap_or(f64::INFINITY);
        key(&a.1).total_cmp(&key(&b.1))
    });
    Ok(out)
}
