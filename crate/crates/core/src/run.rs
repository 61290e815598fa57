//! End-to-end runs: bundle and scenario in, solved and certified result
//! plus a reproducibility manifest out, and read-back of stored runs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::formulation::{build_problem, FormulationError, LinearProgram};
use crate::ingest::{
    parse_network_bundle, parse_scenario, parse_scenario_str, resample_snapshots, BundleError, ResampleError,
    ScenarioConfig, ScenarioError,
};
use crate::model::Network;
use crate::results::{atomic_write, read_result_dir, write_result_tables, ResultIoError, SystemResult};
use crate::solver::{solve, verify_kkt, CertificateReport, KktError, Solution, SolveStatus, SolverError};

pub const MANIFEST: &str = "manifest.json";
pub const CERTIFICATE: &str = "certificate.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Resample(#[from] ResampleError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Output(#[from] ResultIoError),
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed manifest {path}: {detail}")]
    Manifest { path: PathBuf, detail: String },
    #[error("{path} changed since the run (digest mismatch)")]
    StaleInput { path: String },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub read_seconds: f64,
    pub build_seconds: f64,
    pub solve_seconds: f64,
    pub certify_seconds: f64,
    pub write_seconds: f64,
}

pub struct ScenarioRun {
    pub lp: LinearProgram,
    pub solution: Solution,
    pub result: SystemResult,
    /// `None` when the solve did not reach optimality.
    pub certificate: Option<CertificateReport>,
    pub timings: Timings,
}

/// Tolerance for the optimality certificate of a scenario run.
pub const KKT_TOL: f64 = 1e-6;

pub fn solve_scenario(network: &Network, scenario: &ScenarioConfig) -> Result<ScenarioRun, RunError> {
    let t0 = Instant::now();
    let lp = build_problem(network, scenario)?;
    let build_seconds = t0.elapsed().as_secs_f64();
    let solution = solve(&lp, &scenario.solver)?;
    let t1 = Instant::now();
    let certificate = match verify_kkt(&lp, &solution, KKT_TOL) {
        Ok(c) => Some(c),
        Err(KktError::NotOptimal(_)) => None,
        Err(KktError::DimensionMismatch) => unreachable!("solution built from this program"),
    };
    let certify_seconds = t1.elapsed().as_secs_f64();
    let result = SystemResult::from_solution(network, scenario.storage_mode, &lp, &solution);
    Ok(ScenarioRun {
        timings: Timings {
            build_seconds,
            solve_seconds: solution.solve_seconds,
            certify_seconds,
            ..Timings::default()
        },
        lp,
        solution,
        result,
        certificate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Everything needed to reproduce a run and to analyse it later without
/// solving again.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub bundle: String,
    pub scenario_path: String,
    pub output_dir: String,
    /// Snapshot aggregation step applied after reading the bundle.
    pub resample: Option<usize>,
    /// The effective scenario, in scenario file syntax.
    pub scenario: String,
    pub status: String,
    pub objective: f64,
    pub iterations: usize,
    pub n_vars: usize,
    pub n_rows: usize,
    pub timings: Timings,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn digests(paths: &[PathBuf]) -> Result<Vec<FileDigest>, RunError> {
    paths
        .iter()
        .map(|p| {
            Ok(FileDigest {
                path: p.display().to_string(),
                sha256: sha256_file(p).map_err(|source| RunError::Io { path: p.clone(), source })?,
            })
        })
        .collect()
}

fn bundle_files(dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let io = |source| RunError::Io { path: dir.to_path_buf(), source };
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(io)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .collect();
    files.sort();
    Ok(files)
}

impl RunManifest {
    /// Recomputes every recorded digest and reports the first mismatch.
    pub fn verify_digests(&self) -> Result<(), RunError> {
        for d in self.inputs.iter().chain(&self.outputs) {
            let path = PathBuf::from(&d.path);
            let now = sha256_file(&path).map_err(|source| RunError::Io { path, source })?;
            if now != d.sha256 {
                return Err(RunError::StaleInput { path: d.path.clone() });
            }
        }
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self, RunError> {
        let path = dir.join(MANIFEST);
        let text = std::fs::read_to_string(&path).map_err(|source| RunError::Io { path: path.clone(), source })?;
        serde_json::from_str(&text).map_err(|e| RunError::Manifest { path, detail: e.to_string() })
    }
}

/// Options of a file-based run on top of the scenario file.
#[derive(Debug, Clone, Default)]
pub struct RunRequest {
    pub bundle: PathBuf,
    pub scenario: PathBuf,
    pub out_dir: PathBuf,
    pub resample: Option<usize>,
}

/// Reads the bundle, applying the optional resampling step.
pub fn load_network(bundle: &Path, resample: Option<usize>) -> Result<Network, RunError> {
    let network = parse_network_bundle(bundle)?;
    Ok(match resample {
        Some(step) => resample_snapshots(&network, step)?,
        None => network,
    })
}

/// Solves a scenario from files and writes result tables, the optimality
/// certificate and `manifest.json` into the output directory. `adjust`
/// may override scenario settings before the build. Non-optimal runs only
/// get a manifest.
pub fn run_from_files(
    req: &RunRequest,
    adjust: impl FnOnce(&mut ScenarioConfig),
) -> Result<(Network, ScenarioRun, RunManifest), RunError> {
    let t0 = Instant::now();
    let network = load_network(&req.bundle, req.resample)?;
    let mut scenario = parse_scenario(&req.scenario)?;
    adjust(&mut scenario);
    let read_seconds = t0.elapsed().as_secs_f64();
    let mut run = solve_scenario(&network, &scenario)?;
    run.timings.read_seconds = read_seconds;

    let dir = &req.out_dir;
    std::fs::create_dir_all(dir).map_err(|source| RunError::Io { path: dir.clone(), source })?;
    let t1 = Instant::now();
    let mut outputs = Vec::new();
    if run.solution.status == SolveStatus::Optimal {
        outputs = write_result_tables(&run.result, &network, dir)?;
        let path = dir.join(CERTIFICATE);
        let json = serde_json::to_vec_pretty(&run.certificate).expect("certificate serializes");
        atomic_write(&path, &json).map_err(|source| RunError::Io { path: path.clone(), source })?;
        outputs.push(path);
    }
    run.timings.write_seconds = t1.elapsed().as_secs_f64();

    let mut inputs = bundle_files(&req.bundle)?;
    inputs.push(req.scenario.clone());
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        bundle: req.bundle.display().to_string(),
        scenario_path: req.scenario.display().to_string(),
        output_dir: dir.display().to_string(),
        resample: req.resample,
        scenario: scenario.to_config_string(),
        status: run.solution.status.as_str().to_string(),
        objective: run.solution.objective,
        iterations: run.solution.iterations,
        n_vars: run.lp.n_vars(),
        n_rows: run.lp.n_rows(),
        timings: run.timings.clone(),
        inputs: digests(&inputs)?,
        outputs: digests(&outputs)?,
    };
    let path = dir.join(MANIFEST);
    let json = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    atomic_write(&path, &json).map_err(|source| RunError::Io { path, source })?;
    Ok((network, run, manifest))
}

/// A solved run read back from its output directory.
pub struct StoredRun {
    pub manifest: RunManifest,
    pub scenario: ScenarioConfig,
    pub network: Network,
    pub result: SystemResult,
}

/// Loads a run directory after checking that its inputs and outputs still
/// match the recorded digests.
pub fn load_run(dir: &Path) -> Result<StoredRun, RunError> {
    let manifest = RunManifest::read(dir)?;
    manifest.verify_digests()?;
    let scenario = parse_scenario_str(&manifest.scenario)?;
    let network = load_network(Path::new(&manifest.bundle), manifest.resample)?;
    let result = read_result_dir(dir, &network)?;
    Ok(StoredRun { manifest, scenario, network, result })
}
