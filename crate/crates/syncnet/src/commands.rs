//! Command execution and report assembly.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use syncnet_core::dynamics::{integrate, IntegrationSettings, NetworkSystem};
use syncnet_core::experiments::{
    burnt_in_state, estimate_decay_rate, find_critical_coupling, loglog_slope, pairwise_spread,
    persistence_experiment, prepare_initial_state, sample_jacobians, sweep_point, ExperimentError,
    RunConfig, Series, SweepPoint, SweepRow,
};
use syncnet_core::network::{approx_diagonalizable, build_laplacian, spectral_gap, LaplacianBundle};
use syncnet_core::stability::{
    analyze, compute_gamma, estimate_varrho, persistence_bound, CouplingSpec, SyncAnalysis,
};
use syncnet_core::Complex64;
use thiserror::Error;

use crate::config::{family_gamma, Command, ConfigError, ExperimentConfig, GammaFamily};
use crate::output;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Results of a finished command: the report body, files written, and a
/// runtime failure that still produced a report.
#[derive(Debug)]
pub struct Outcome {
    pub results: Value,
    pub files: Vec<String>,
    pub failure: Option<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failure.is_some() {
            2
        } else {
            0
        }
    }
}

struct Sink {
    dir: PathBuf,
    files: Vec<String>,
}

impl Sink {
    fn create(&mut self, name: &str) -> Result<BufWriter<File>, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        self.files.push(name.to_string());
        Ok(BufWriter::new(file))
    }

    fn csv(&mut self, name: &str, write: impl FnOnce(BufWriter<File>) -> csv::Result<()>) -> Result<(), CliError> {
        let out = self.create(name)?;
        let path = self.dir.join(name);
        write(out).map_err(|e| CliError::io(&path, e.into()))
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serialisable")
}

fn complex_list(values: &[Complex64]) -> Value {
    values.iter().map(|z| json!([z.re, z.im])).collect()
}

/// Runs the configured command, writes its CSV files and the JSON report
/// into the output directory, and returns the outcome.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let dir = PathBuf::from(cfg.output().dir.clone().unwrap_or_else(|| "out".into()));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    let mut sink = Sink { dir, files: Vec::new() };
    let (results, failure) = match execute(cfg, &mut sink) {
        Ok(v) => v,
        Err(CliError::Runtime(msg)) => (Value::Null, Some(msg)),
        Err(e) => return Err(e),
    };
    let report_name = cfg.output().report.clone().unwrap_or_else(|| "report.json".into());
    let report = json!({
        "command": cfg.command().to_string(),
        "status": if failure.is_some() { "runtime_error" } else { "ok" },
        "error": failure,
        "config": cfg,
        "results": results,
        "files": sink.files,
    });
    let path = sink.dir.join(&report_name);
    let text = serde_json::to_string_pretty(&report).expect("serialisable") + "\n";
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    let mut files = sink.files;
    files.push(report_name);
    Ok(Outcome {
        results,
        files,
        failure,
    })
}

type Executed = (Value, Option<String>);

fn execute(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Executed, CliError> {
    match cfg.command() {
        Command::Analyze => Ok((analysis_report(cfg)?, None)),
        Command::Simulate => simulate(cfg, sink),
        Command::Critical => critical(cfg),
        Command::Sweep => sweep(cfg, sink),
        Command::Persistence => persistence(cfg, sink),
    }
}

fn laplacian(cfg: &ExperimentConfig) -> Result<LaplacianBundle, CliError> {
    build_laplacian(&cfg.weights()?).map_err(runtime)
}

/// `ϱ` from the configuration, or the largest Jacobian norm along an orbit
/// of the isolated system.
fn varrho(cfg: &ExperimentConfig) -> Result<(f64, bool), CliError> {
    if let Some(v) = cfg.analysis().varrho {
        return Ok((v, false));
    }
    let field = cfg.field()?;
    let run = cfg.run_config();
    let start = burnt_in_state(field.as_ref(), &run).map_err(runtime)?;
    // Only the orbit's Jacobians matter, so growth is not a failure here.
    let settings = IntegrationSettings::new(run.dt, run.method).with_guard(f64::INFINITY);
    let samples = cfg.analysis().varrho_samples.unwrap_or(400);
    let jac = sample_jacobians(field.as_ref(), &start, run.t_burn, run.t_end, &settings, samples)
        .map_err(runtime)?;
    Ok((estimate_varrho(&jac).map_err(runtime)?, true))
}

fn sync_analysis(cfg: &ExperimentConfig, bundle: &LaplacianBundle) -> Result<(SyncAnalysis, f64, bool), CliError> {
    let a = cfg.analysis();
    let jordan = cfg.laplacian_jordan()?;
    let approx = approx_diagonalizable(bundle, jordan.as_ref(), a.eps.unwrap_or(1e-3)).map_err(runtime)?;
    let coupling = cfg.coupling_spec(cfg.gamma()?).map_err(CliError::Runtime)?;
    let (varrho, estimated) = varrho(cfg)?;
    let report = analyze(
        bundle,
        &approx,
        &coupling,
        varrho,
        a.jordan_eps_ratio.unwrap_or(0.5),
        cfg.constants(),
    )
    .map_err(runtime)?;
    Ok((report, varrho, estimated))
}

fn analysis_report(cfg: &ExperimentConfig) -> Result<Value, CliError> {
    let bundle = laplacian(cfg)?;
    let (report, _, estimated) = sync_analysis(cfg, &bundle)?;
    let coupling = cfg.coupling_spec(cfg.gamma()?).map_err(CliError::Runtime)?;
    let alpha = cfg.system.alpha;
    let mut v = to_value(&report);
    let obj = v.as_object_mut().expect("object");
    obj.insert("alpha".into(), json!(alpha));
    obj.insert("rate_at_alpha".into(), json!(report.rate(alpha)));
    obj.insert("certified_at_alpha".into(), json!(report.certifies(alpha)));
    obj.insert("varrho_estimated".into(), json!(estimated));
    obj.insert("laplacian_eigenvalues".into(), complex_list(bundle.spectrum().values()));
    obj.insert("coupling_eigenvalues".into(), complex_list(coupling.beta_spectrum().values()));
    obj.insert("coupling_structure".into(), to_value(&coupling.structure()));
    if bundle.is_symmetric() {
        let gap = spectral_gap(&bundle).map_err(runtime)?;
        obj.insert("spectral_gap".into(), to_value(&gap));
    }
    Ok(v)
}

fn simulate(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Executed, CliError> {
    let system = cfg.network()?;
    let run = cfg.run_config();
    let x0 = prepare_initial_state(&system, &run).map_err(runtime)?;
    let settings = IntegrationSettings::new(run.dt, run.method)
        .with_guard(run.divergence_guard)
        .with_stride(run.record_stride);
    let traj = integrate(&system, &x0, run.t_burn, run.t_end, &settings).map_err(runtime)?;
    let m = system.m();
    let mut spread = Series::default();
    for (t, x) in traj.times().iter().zip(traj.states()) {
        spread.push(*t, pairwise_spread(x, m));
    }
    let form = cfg.csv_form();
    sink.csv("trajectory.csv", |w| output::write_trajectory(w, &traj, form))?;
    sink.csv("spread.csv", |w| output::write_series(w, &spread, "spread"))?;
    let window = run.rate_fit_window.unwrap_or((run.t_burn, run.t_end));
    let scale = traj.states().map(|x| syncnet_core::dynamics::max_node_norm(x, m)).fold(0.0, f64::max);
    let fit = estimate_decay_rate(&spread, window, 1e-12 * scale);
    let results = json!({
        "n": system.n(),
        "m": m,
        "alpha": system.alpha(),
        "samples": traj.len(),
        "final_time": traj.times().last(),
        "final_state": traj.last_state(),
        "initial_spread": spread.first(),
        "final_spread": spread.last(),
        "decay_fit": fit,
        "diverged": traj.diverged(),
    });
    let failure = traj.diverged().map(|d| {
        format!("trajectory diverged ({:?}) after t = {}", d.kind, d.last_valid_time)
    });
    Ok((results, failure))
}

fn known_gamma(bundle: Option<&LaplacianBundle>, coupling: Option<CouplingSpec>) -> Option<f64> {
    compute_gamma(bundle?, &coupling?).ok()
}

fn critical(cfg: &ExperimentConfig) -> Result<Executed, CliError> {
    let system = cfg.network()?;
    let run = cfg.run_config();
    let c = cfg.critical();
    let bracket = c.bracket.expect("resolved");
    let bundle = laplacian(cfg).ok();
    let gamma = known_gamma(bundle.as_ref(), cfg.coupling_spec(cfg.gamma()?).ok());
    match find_critical_coupling(&system, &run, bracket, c.tol.unwrap_or(1e-3), c.max_doublings.unwrap_or(30)) {
        Ok(mut r) => {
            r.rho_c_gamma = gamma.map(|g| g * r.alpha_c);
            Ok((json!({ "gamma": gamma, "critical": r }), None))
        }
        Err(e @ ExperimentError::NoThreshold { .. }) => {
            Ok((json!({ "gamma": gamma, "critical": Value::Null }), Some(e.to_string())))
        }
        Err(e) => Err(runtime(e)),
    }
}

/// Worker count for sweeps: `SYNCNET_THREADS` when set, else all cores.
pub fn sweep_threads() -> usize {
    std::env::var("SYNCNET_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn sweep(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Executed, CliError> {
    let s = cfg.sweep.as_ref().expect("validated");
    let run = cfg.run_config();
    let m = cfg.field()?.dim();
    let base = match s.family {
        GammaFamily::Scaled => Some(cfg.gamma()?),
        _ => None,
    };
    let bundle = laplacian(cfg).ok();
    let build = |beta: f64| -> Result<SweepPoint, ExperimentError> {
        let gamma = family_gamma(s.family, beta, m, base.as_ref());
        let spec = match s.family {
            GammaFamily::ScaledIdentity => CouplingSpec::scaled_identity(m, beta).ok(),
            GammaFamily::Jordan => CouplingSpec::jordan_block(m, beta).ok(),
            GammaFamily::Scaled => CouplingSpec::new(gamma.clone()).ok(),
        };
        let system: NetworkSystem = cfg
            .network_with_gamma(gamma)
            .map_err(|_| ExperimentError::Domain("cannot build the network for this β"))?;
        Ok(SweepPoint {
            system,
            gamma: known_gamma(bundle.as_ref(), spec),
        })
    };
    let bracket = s.bracket.expect("resolved");
    let tol = s.tol.unwrap_or(1e-3);
    let doublings = s.max_doublings.unwrap_or(30);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep_threads())
        .build()
        .map_err(runtime)?;
    let rows: Vec<SweepRow> = pool.install(|| {
        s.beta_grid
            .par_iter()
            .enumerate()
            .map(|(i, &beta)| sweep_point(&build, &run, beta, i, bracket, tol, doublings))
            .collect()
    });
    let slope = loglog_slope(&rows, s.fit_range);
    sink.csv("sweep.csv", |w| output::write_sweep(w, &rows))?;
    let results = json!({
        "rows": rows,
        "loglog_slope": slope,
        "slope_defined": slope.is_some(),
        "fit_range": s.fit_range,
    });
    Ok((results, None))
}

fn persistence(cfg: &ExperimentConfig, sink: &mut Sink) -> Result<Executed, CliError> {
    let system = cfg.network()?;
    let run: RunConfig = cfg.run_config();
    let bundle = laplacian(cfg)?;
    let eps0 = system.perturbation().map_or(0.0, |p| p.eps0());
    let (analysis, bound, bound_gap) = match sync_analysis(cfg, &bundle) {
        Ok((a, _, _)) => {
            match persistence_bound(a.c_estimate, eps0, system.alpha(), a.gamma, a.rho_bound) {
                Ok(b) => (Some(a), Some(b), None),
                Err(e) => (Some(a), None, Some(e.to_string())),
            }
        }
        Err(e) => (None, None, Some(e.to_string())),
    };
    let r = persistence_experiment(&system, &run, cfg.tail_fraction(), bound).map_err(runtime)?;
    sink.csv("persistence.csv", |w| output::write_series(w, &r.es_series, "e_s"))?;
    let results = json!({
        "eps0": r.eps0,
        "alpha": system.alpha(),
        "limsup_estimate": r.limsup_estimate,
        "bound": r.bound,
        "ratio": r.ratio,
        "bound_unavailable": bound_gap,
        "analysis": analysis,
        "diverged": r.diverged,
        "samples": r.es_series.len(),
    });
    let failure = r.diverged.map(|d| format!("perturbed network diverged after t = {}", d.last_valid_time));
    Ok((results, failure))
}
