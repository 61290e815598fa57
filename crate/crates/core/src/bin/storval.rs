use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use storval::analysis::{
    component_mpi, evaluate_criteria, kpis, lcos_report, market_potential, static_lcos, whole_system_benefit,
    ReferenceStorage,
};
use storval::formulation::{build_problem, write_mps};
use storval::ingest::{parse_scenario, read_network_bundle, BundleError};
use storval::model::{validate_network, ComponentKind};
use storval::results::atomic_write;
use storval::run::{load_network, load_run, run_from_files, RunError, RunRequest, StoredRun};
use storval::solver::SolveStatus;

#[derive(Parser)]
#[command(name = "storval", version, about = "Storage valuation on capacity-expansion models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone, Default)]
struct SolveFlags {
    /// Feasibility and optimality tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Aggregate every N snapshots before building.
    #[arg(long, value_name = "N")]
    resample: Option<usize>,
    /// Dispatch cost on storage converters, EUR/MWh.
    #[arg(long)]
    epsilon_cost: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a network bundle and print every violation.
    Validate { bundle: PathBuf },
    /// Solve one scenario and write result tables, certificate and manifest.
    Solve {
        bundle: PathBuf,
        scenario: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        flags: SolveFlags,
    },
    /// Modelled LCOS of a stored run, or the static reference table without one.
    Lcos {
        run: Option<PathBuf>,
        #[arg(long)]
        min_flh: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Per-bus market potential of a stored run.
    Mpi {
        run: PathBuf,
        /// Keep only these bus ids or country codes.
        #[arg(long, value_delimiter = ',')]
        region: Option<Vec<String>>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// System KPIs of a stored run.
    Kpi {
        run: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Whole-system benefit of storage between two stored runs.
    Wsb {
        without: PathBuf,
        with: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Cross-scenario MPI table and criteria verdicts.
    Compare {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        threshold_mw: Option<f64>,
        /// Directory for compare.csv and criteria.json.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Write the scenario's linear program in free MPS format.
    ExportLp {
        bundle: PathBuf,
        scenario: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        flags: SolveFlags,
    },
}

/// Failure with its exit code and machine-readable class.
struct Failure {
    code: u8,
    class: &'static str,
    message: String,
}

impl Failure {
    fn new(code: u8, class: &'static str, message: impl ToString) -> Self {
        Self { code, class, message: message.to_string() }
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        use storval::ingest::ScenarioError;
        let (code, class) = match &e {
            RunError::Bundle(BundleError::MissingFile(_) | BundleError::Io { .. }) => (4, "io"),
            RunError::Bundle(_) | RunError::Resample(_) | RunError::Formulation(_) => (2, "validation"),
            RunError::Scenario(ScenarioError::Io { .. }) => (4, "io"),
            RunError::Scenario(_) => (2, "validation"),
            RunError::Io { .. } | RunError::Output(_) | RunError::Manifest { .. } => (4, "io"),
            RunError::StaleInput { .. } => (4, "stale_input"),
            RunError::Solver(_) => (5, "internal"),
        };
        Failure::new(code, class, e)
    }
}

impl From<BundleError> for Failure {
    fn from(e: BundleError) -> Self {
        Failure::from(RunError::from(e))
    }
}

fn internal(e: impl ToString) -> Failure {
    Failure::new(5, "internal", e)
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            atomic_write(path, text.as_bytes()).map_err(|e| Failure::new(4, "io", format!("{}: {e}", path.display())))
        }
        None => {
            stdout(text);
            Ok(())
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn stdout(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn apply(flags: &SolveFlags, scenario: &mut storval::ingest::ScenarioConfig) {
    if let Some(t) = flags.tol {
        scenario.solver.feasibility_tol = t;
        scenario.solver.optimality_tol = t;
    }
    if let Some(n) = flags.max_iter {
        scenario.solver.max_iterations = n;
    }
    if let Some(e) = flags.epsilon_cost {
        scenario.epsilon_cost = e;
    }
}

fn validate(bundle: &Path) -> Result<(), Failure> {
    let network = read_network_bundle(bundle)?;
    let report = validate_network(&network);
    stdout(&report.to_string());
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::new(2, "validation", format!("{} violation(s)", report.violations.len())))
    }
}

fn solve(bundle: &Path, scenario: &Path, out: &Path, flags: &SolveFlags) -> Result<(), Failure> {
    let req = RunRequest {
        bundle: bundle.to_path_buf(),
        scenario: scenario.to_path_buf(),
        out_dir: out.to_path_buf(),
        resample: flags.resample,
    };
    let (_, run, _) = run_from_files(&req, |s| apply(flags, s))?;
    let s = &run.solution;
    stdout(&format!(
        "{} objective {:.6e} iterations {} solve {:.2}s\n",
        s.status.as_str(),
        s.objective,
        s.iterations,
        s.solve_seconds
    ));
    match s.status {
        SolveStatus::Optimal => {
            let c = run.certificate.as_ref().expect("optimal runs are certified");
            stdout(&format!(
                "kkt {} primal {:.1e} dual {:.1e} complementarity {:.1e} gap {:.1e}\n",
                if c.passed { "passed" } else { "FAILED" },
                c.max_primal_residual,
                c.max_dual_residual,
                c.max_complementarity,
                c.duality_gap
            ));
            if c.passed {
                Ok(())
            } else {
                Err(internal("optimality certificate failed"))
            }
        }
        SolveStatus::Infeasible => Err(Failure::new(3, "infeasible", "problem is infeasible")),
        SolveStatus::Unbounded => Err(Failure::new(3, "unbounded", "problem is unbounded")),
        SolveStatus::IterationLimit => Err(Failure::new(3, "iteration_limit", "iteration limit reached")),
    }
}

fn lcos(run: Option<&Path>, min_flh: Option<f64>, out: Option<&Path>) -> Result<(), Failure> {
    let mut text = String::new();
    match run {
        None => {
            text.push_str("design,lcos_eur_per_kwh,roundtrip_efficiency,full_load_hours,ep_ratio_hours\n");
            for design in ReferenceStorage::ALL {
                let a = design.assumptions();
                let v = static_lcos(&a).map_err(internal)?;
                let _ = writeln!(
                    text,
                    "{},{v:.4},{:.4},{},{}",
                    design.name(),
                    a.roundtrip_efficiency(),
                    a.yearly_full_load_hours,
                    a.discharge_ratio_hours
                );
            }
        }
        Some(dir) => {
            let stored = load_run(dir)?;
            let min_flh = min_flh.unwrap_or(stored.scenario.min_flh);
            text.push_str("tech,bus,lcos_eur_per_kwh,full_load_hours,ep_ratio_hours,discharged_mwh,capital_eur,energy_eur,discharger_mpi_mw\n");
            for m in lcos_report(&stored.result, &stored.network, stored.scenario.min_mpi_mw, min_flh) {
                let _ = writeln!(
                    text,
                    "{},{},{:.6},{:.3},{:.3},{:.3},{:.2},{:.2},{:.3}",
                    m.tech,
                    m.bus,
                    m.lcos,
                    m.full_load_hours,
                    m.ep_ratio,
                    m.discharged,
                    m.capital_cost,
                    m.energy_cost,
                    m.discharger_mpi
                );
            }
        }
    }
    emit(out, &text)
}

fn mpi(dir: &Path, region: Option<&[String]>, out: Option<&Path>) -> Result<(), Failure> {
    let stored = load_run(dir)?;
    let mut text = String::from("kind,component,technology,bus,mpi\n");
    for kind in ComponentKind::ALL {
        for row in market_potential(&stored.result, &stored.network, kind, region).rows {
            let _ = writeln!(text, "{kind},{},{},{},{:.6}", row.component, row.technology, row.bus, row.expanded);
        }
    }
    emit(out, &text)
}

fn json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("report serializes") + "\n"
}

fn kpi(dir: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let stored = load_run(dir)?;
    emit(out, &json(&kpis(&stored.result, &stored.network)))
}

fn wsb(without: &Path, with: &Path, out: Option<&Path>) -> Result<(), Failure> {
    let a = load_run(without)?;
    let b = load_run(with)?;
    let report =
        whole_system_benefit(&a.result, &b.result, &b.network).map_err(|e| Failure::new(2, "validation", e))?;
    emit(out, &json(&report))
}

fn compare(dirs: &[PathBuf], threshold_mw: Option<f64>, out: Option<&Path>) -> Result<(), Failure> {
    let loaded: Vec<Result<StoredRun, RunError>> = std::thread::scope(|s| {
        let handles: Vec<_> = dirs.iter().map(|d| s.spawn(move || load_run(d))).collect();
        handles.into_iter().map(|h| h.join().expect("loader thread")).collect()
    });
    let runs = loaded.into_iter().collect::<Result<Vec<_>, _>>()?;
    let threshold = threshold_mw.unwrap_or(runs[0].scenario.threshold_mw);
    let tables: Vec<(String, BTreeMap<String, f64>)> =
        runs.iter().map(|r| (r.result.mode.to_string(), component_mpi(&r.result, &r.network))).collect();
    // Rank every pair of technologies per component kind.
    let mut comparisons = Vec::new();
    let components: Vec<&String> = tables[0].1.keys().collect();
    for (i, a) in components.iter().enumerate() {
        for b in &components[i + 1..] {
            if a.rsplit('/').next() == b.rsplit('/').next() {
                comparisons.push(((*a).clone(), (*b).clone()));
            }
        }
    }
    let report = evaluate_criteria(&tables, threshold, &comparisons).map_err(|e| Failure::new(2, "validation", e))?;
    let mut csv = String::from("component,scenario,mpi\n");
    for v in &report.verdicts {
        for (scenario, mpi) in report.scenarios.iter().zip(&v.mpi) {
            let _ = writeln!(csv, "{},{scenario},{mpi:.6}", v.component);
        }
    }
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::new(4, "io", format!("{}: {e}", dir.display())))?;
            emit(Some(&dir.join("compare.csv")), &csv)?;
            emit(Some(&dir.join("criteria.json")), &json(&report))?;
        }
        None => stdout(&csv),
    }
    let mut summary = String::new();
    for v in &report.verdicts {
        let _ = writeln!(
            summary,
            "# {}: {:?}, above {threshold} MW in some scenario: {}",
            v.component, v.verdict, v.threshold_pass
        );
    }
    stdout(&summary);
    Ok(())
}

fn export_lp(bundle: &Path, scenario: &Path, out: Option<&Path>, flags: &SolveFlags) -> Result<(), Failure> {
    let network = load_network(bundle, flags.resample)?;
    let mut cfg = parse_scenario(scenario).map_err(RunError::from)?;
    apply(flags, &mut cfg);
    let lp = build_problem(&network, &cfg).map_err(RunError::from)?;
    let name = bundle.file_name().map_or("storval".into(), |n| n.to_string_lossy().into_owned());
    emit(out, &write_mps(&lp, &name))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { bundle } => validate(bundle),
        Command::Solve { bundle, scenario, out, flags } => solve(bundle, scenario, out, flags),
        Command::Lcos { run, min_flh, out } => lcos(run.as_deref(), *min_flh, out.as_deref()),
        Command::Mpi { run, region, out } => mpi(run, region.as_deref(), out.as_deref()),
        Command::Kpi { run, out } => kpi(run, out.as_deref()),
        Command::Wsb { without, with, out } => wsb(without, with, out.as_deref()),
        Command::Compare { runs, threshold_mw, out } => compare(runs, *threshold_mw, out.as_deref()),
        Command::ExportLp { bundle, scenario, out, flags } => export_lp(bundle, scenario, out.as_deref(), flags),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.class, f.message.replace('\n', "; ").trim_end_matches("; "));
            ExitCode::from(f.code)
        }
    }
}
