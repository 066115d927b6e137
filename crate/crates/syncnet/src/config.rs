//! Experiment configuration files.
//!
//! A configuration is a JSON document with a `system` block and optional
//! `analysis`, `run`, `critical`, `sweep`, `persistence` and `output` blocks.
//! Unknown keys are rejected. [`parse_config`] fills every default, so the
//! echoed configuration in a report parses back to the same value.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use syncnet_core::dynamics::{
    ConstantBias, CouplingFunction, LinearCoupling, LinearField, Lorenz, Method, NetworkSystem,
    NonautonomousLinear, Perturbation, TanhCoupling, VectorField,
};
use syncnet_core::experiments::{Bracket, RunConfig};
use syncnet_core::linalg::RealMatrix;
use syncnet_core::network::{JordanForm, WeightMatrix};
use syncnet_core::stability::{Constants, CouplingSpec};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Analyze,
    Simulate,
    Critical,
    Sweep,
    Persistence,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Analyze => "analyze",
            Command::Simulate => "simulate",
            Command::Critical => "critical",
            Command::Sweep => "sweep",
            Command::Persistence => "persistence",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("JSON syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("dimension mismatch at {path}: expected {expected}, got {got}")]
    Dimension {
        path: String,
        expected: String,
        got: String,
    },
}

fn schema(path: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

type Rows = Vec<Vec<f64>>;

/// Node dynamics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Lorenz {
        sigma: Option<f64>,
        r: Option<f64>,
        b: Option<f64>,
    },
    NonautonomousLinear,
    Linear {
        #[serde(rename = "A")]
        a: Rows,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    Linear,
    Tanh,
}

/// A real Jordan factorisation `M = O J O⁻¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JordanSpec {
    #[serde(rename = "O")]
    pub o: Rows,
    #[serde(rename = "J")]
    pub j: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingBlock {
    pub kind: CouplingKind,
    /// Optional in sweeps, where Γ is generated from β.
    #[serde(rename = "Gamma")]
    pub gamma: Option<Rows>,
    pub jordan: Option<JordanSpec>,
}

/// Constant per-node biases, either explicit or random with a given norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationBlock {
    pub biases: Option<Rows>,
    pub eps0: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemBlock {
    pub field: FieldSpec,
    #[serde(rename = "W")]
    pub w: Rows,
    pub coupling: CouplingBlock,
    #[serde(default)]
    pub alpha: f64,
    pub perturbation: Option<PerturbationBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    /// Bound on `‖D₂f‖`; estimated along an orbit when absent.
    pub varrho: Option<f64>,
    pub varrho_samples: Option<usize>,
    /// Perturbation scale for a defective Laplacian.
    pub eps: Option<f64>,
    pub jordan_eps_ratio: Option<f64>,
    pub constants: Option<Constants>,
    pub laplacian_jordan: Option<JordanSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunBlock {
    pub t0: Option<f64>,
    pub t_burn: Option<f64>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub method: Option<Method>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub sync_tol: Option<f64>,
    pub rate_min: Option<f64>,
    pub rate_fit_window: Option<(f64, f64)>,
    pub divergence_guard: Option<f64>,
    pub record_stride: Option<usize>,
    pub base_state: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalBlock {
    pub bracket: Option<Bracket>,
    pub tol: Option<f64>,
    pub max_doublings: Option<u32>,
}

/// How Γ depends on β in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaFamily {
    /// `β I`.
    ScaledIdentity,
    /// `β I` plus ones on the superdiagonal.
    Jordan,
    /// `β Γ₀` with `Γ₀` from the system block.
    Scaled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub beta_grid: Vec<f64>,
    pub family: GammaFamily,
    /// On the `ρ = α·β` scale.
    pub bracket: Option<Bracket>,
    pub tol: Option<f64>,
    pub max_doublings: Option<u32>,
    pub fit_range: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PersistenceBlock {
    pub tail_fraction: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CsvForm {
    Wide,
    Long,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    pub dir: Option<String>,
    pub report: Option<String>,
    pub csv_form: Option<CsvForm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Option<Command>,
    pub system: SystemBlock,
    pub analysis: Option<AnalysisBlock>,
    pub run: Option<RunBlock>,
    pub critical: Option<CriticalBlock>,
    pub sweep: Option<SweepBlock>,
    pub persistence: Option<PersistenceBlock>,
    pub output: Option<OutputBlock>,
}

fn pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    if out.is_empty() {
        out.push('/');
    }
    out
}

/// Parses, validates and fills defaults. `command` overrides or supplies the
/// command named in the document; a conflicting one is an error.
pub fn parse_config(text: &str, command: Option<Command>) -> Result<ExperimentConfig, ConfigError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let raw: ExperimentConfig = match serde_path_to_error::deserialize(&mut de) {
        Ok(v) => v,
        Err(e) => {
            let path = pointer(e.path());
            let inner = e.into_inner();
            return Err(match inner.classify() {
                serde_json::error::Category::Syntax | serde_json::error::Category::Eof => {
                    ConfigError::Syntax {
                        line: inner.line(),
                        column: inner.column(),
                        message: inner.to_string(),
                    }
                }
                _ => schema(&path, strip_position(&inner.to_string())),
            });
        }
    };
    if let Err(e) = de.end() {
        return Err(ConfigError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        });
    }
    resolve(raw, command)
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(k) => msg[..k].to_string(),
        None => msg.to_string(),
    }
}

fn field_defaults(field: &FieldSpec) -> RunConfig {
    match field {
        FieldSpec::Lorenz { .. } => RunConfig::chaotic(),
        _ => RunConfig::linear(),
    }
}

fn resolve(raw: ExperimentConfig, command: Option<Command>) -> Result<ExperimentConfig, ConfigError> {
    let command = match (raw.command, command) {
        (Some(a), Some(b)) if a != b => {
            return Err(schema("/command", format!("configuration is for `{a}`, invoked as `{b}`")))
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => return Err(schema("/command", "missing command")),
    };
    let mut system = raw.system;
    if let FieldSpec::Lorenz { sigma, r, b } = &mut system.field {
        let d = Lorenz::default();
        sigma.get_or_insert(d.sigma);
        r.get_or_insert(d.r);
        b.get_or_insert(d.b);
    }
    if let Some(p) = &mut system.perturbation {
        if p.eps0.is_some() && p.biases.is_none() {
            p.seed.get_or_insert(0);
        }
    }

    let a = raw.analysis.unwrap_or(AnalysisBlock {
        varrho: None,
        varrho_samples: None,
        eps: None,
        jordan_eps_ratio: None,
        constants: None,
        laplacian_jordan: None,
    });
    let analysis = AnalysisBlock {
        varrho: a.varrho,
        varrho_samples: Some(a.varrho_samples.unwrap_or(400)),
        eps: Some(a.eps.unwrap_or(1e-3)),
        jordan_eps_ratio: Some(a.jordan_eps_ratio.unwrap_or(0.5)),
        constants: Some(a.constants.unwrap_or_default()),
        laplacian_jordan: a.laplacian_jordan,
    };

    let d = field_defaults(&system.field);
    let r = raw.run.unwrap_or(RunBlock {
        t0: None,
        t_burn: None,
        t_end: None,
        dt: None,
        method: None,
        delta: None,
        seed: None,
        sync_tol: None,
        rate_min: None,
        rate_fit_window: None,
        divergence_guard: None,
        record_stride: None,
        base_state: None,
    });
    let run = RunBlock {
        t0: Some(r.t0.unwrap_or(d.t0)),
        t_burn: Some(r.t_burn.unwrap_or(d.t_burn)),
        t_end: Some(r.t_end.unwrap_or(d.t_end)),
        dt: Some(r.dt.unwrap_or(d.dt)),
        method: Some(r.method.unwrap_or(d.method)),
        delta: Some(r.delta.unwrap_or(d.delta)),
        seed: Some(r.seed.unwrap_or(d.seed)),
        sync_tol: Some(r.sync_tol.unwrap_or(d.sync_tol)),
        rate_min: Some(r.rate_min.unwrap_or(d.rate_min)),
        rate_fit_window: r.rate_fit_window,
        divergence_guard: Some(r.divergence_guard.unwrap_or(d.divergence_guard)),
        record_stride: Some(r.record_stride.unwrap_or(d.record_stride)),
        base_state: r.base_state,
    };

    let c = raw.critical.unwrap_or(CriticalBlock {
        bracket: None,
        tol: None,
        max_doublings: None,
    });
    let critical = CriticalBlock {
        bracket: Some(c.bracket.unwrap_or(Bracket { lo: 0.0, hi: 1.0 })),
        tol: Some(c.tol.unwrap_or(1e-3)),
        max_doublings: Some(c.max_doublings.unwrap_or(30)),
    };

    let sweep = raw.sweep.map(|s| SweepBlock {
        bracket: Some(s.bracket.unwrap_or(Bracket { lo: 0.0, hi: 1.0 })),
        tol: Some(s.tol.unwrap_or(1e-3)),
        max_doublings: Some(s.max_doublings.unwrap_or(30)),
        ..s
    });

    let persistence = PersistenceBlock {
        tail_fraction: Some(raw.persistence.and_then(|p| p.tail_fraction).unwrap_or(0.5)),
    };

    let o = raw.output.unwrap_or(OutputBlock {
        dir: None,
        report: None,
        csv_form: None,
    });
    let output = OutputBlock {
        dir: Some(o.dir.unwrap_or_else(|| "out".to_string())),
        report: Some(o.report.unwrap_or_else(|| "report.json".to_string())),
        csv_form: Some(o.csv_form.unwrap_or(CsvForm::Wide)),
    };

    let cfg = ExperimentConfig {
        command: Some(command),
        system,
        analysis: Some(analysis),
        run: Some(run),
        critical: Some(critical),
        sweep,
        persistence: Some(persistence),
        output: Some(output),
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn matrix(rows: &Rows, path: &str) -> Result<RealMatrix, ConfigError> {
    let r = rows.len();
    if r == 0 {
        return Err(schema(path, "matrix is empty"));
    }
    let c = rows[0].len();
    if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != c) {
        return Err(schema(
            &format!("{path}/{i}"),
            format!("ragged matrix: row 0 has {c} entries, row {i} has {}", row.len()),
        ));
    }
    RealMatrix::from_rows(rows).map_err(|e| schema(path, e.to_string()))
}

fn square(rows: &Rows, path: &str) -> Result<RealMatrix, ConfigError> {
    let m = matrix(rows, path)?;
    if !m.is_square() {
        return Err(schema(
            path,
            format!("expected a square matrix, got {}×{}", m.rows(), m.cols()),
        ));
    }
    Ok(m)
}

fn require_dim(m: &RealMatrix, dim: usize, path: &str) -> Result<(), ConfigError> {
    if m.rows() != dim || m.cols() != dim {
        return Err(ConfigError::Dimension {
            path: path.to_string(),
            expected: format!("{dim}×{dim}"),
            got: format!("{}×{}", m.rows(), m.cols()),
        });
    }
    Ok(())
}

fn positive(v: Option<f64>, path: &str) -> Result<(), ConfigError> {
    match v {
        Some(x) if !(x > 0.0 && x.is_finite()) => Err(schema(path, format!("must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    let m = cfg.field_dim()?;
    let n = square(&cfg.system.w, "/system/W")?.rows();
    cfg.weights()?;
    if !(cfg.system.alpha >= 0.0 && cfg.system.alpha.is_finite()) {
        return Err(schema("/system/alpha", "must be non-negative and finite"));
    }
    let coupling = &cfg.system.coupling;
    match &coupling.gamma {
        Some(g) => require_dim(&square(g, "/system/coupling/Gamma")?, m, "/system/coupling/Gamma")?,
        None => {
            let needs = cfg.command != Some(Command::Sweep)
                || cfg.sweep.as_ref().is_some_and(|s| s.family == GammaFamily::Scaled);
            if needs {
                return Err(schema("/system/coupling/Gamma", "missing coupling matrix"));
            }
        }
    }
    if let Some(j) = &coupling.jordan {
        require_dim(&square(&j.o, "/system/coupling/jordan/O")?, m, "/system/coupling/jordan/O")?;
        require_dim(&square(&j.j, "/system/coupling/jordan/J")?, m, "/system/coupling/jordan/J")?;
    }
    if let Some(p) = &cfg.system.perturbation {
        match (&p.biases, p.eps0) {
            (Some(b), None) => {
                let b = matrix(b, "/system/perturbation/biases")?;
                if b.rows() != n || b.cols() != m {
                    return Err(ConfigError::Dimension {
                        path: "/system/perturbation/biases".into(),
                        expected: format!("{n}×{m}"),
                        got: format!("{}×{}", b.rows(), b.cols()),
                    });
                }
            }
            (None, Some(e)) if e >= 0.0 && e.is_finite() => {}
            (None, Some(_)) => return Err(schema("/system/perturbation/eps0", "must be non-negative")),
            _ => {
                return Err(schema(
                    "/system/perturbation",
                    "give either `biases` or `eps0` (with an optional `seed`)",
                ))
            }
        }
    }
    if let Some(a) = &cfg.analysis {
        positive(a.varrho, "/analysis/varrho")?;
        positive(a.eps, "/analysis/eps")?;
        match a.jordan_eps_ratio {
            Some(r) if !(r > 0.0 && r < 1.0) => {
                return Err(schema("/analysis/jordan_eps_ratio", "must lie in (0, 1)"))
            }
            _ => {}
        }
        if a.varrho_samples == Some(0) {
            return Err(schema("/analysis/varrho_samples", "must be at least 1"));
        }
        if let Some(j) = &a.laplacian_jordan {
            require_dim(&square(&j.o, "/analysis/laplacian_jordan/O")?, n, "/analysis/laplacian_jordan/O")?;
            require_dim(&square(&j.j, "/analysis/laplacian_jordan/J")?, n, "/analysis/laplacian_jordan/J")?;
        }
    }
    let run = cfg.run_config();
    if let Some(b) = &run.base_state {
        if b.len() != m {
            return Err(ConfigError::Dimension {
                path: "/run/base_state".into(),
                expected: m.to_string(),
                got: b.len().to_string(),
            });
        }
    }
    run.validate().map_err(|e| schema("/run", e.to_string()))?;
    if let Some(c) = &cfg.critical {
        if let Some(b) = c.bracket {
            Bracket::new(b.lo, b.hi).map_err(|e| schema("/critical/bracket", e.to_string()))?;
        }
        positive(c.tol, "/critical/tol")?;
    }
    match &cfg.sweep {
        Some(s) => {
            syncnet_core::experiments::validate_grid(&s.beta_grid)
                .map_err(|e| schema("/sweep/beta_grid", e.to_string()))?;
            if let Some(b) = s.bracket {
                Bracket::new(b.lo, b.hi).map_err(|e| schema("/sweep/bracket", e.to_string()))?;
            }
            positive(s.tol, "/sweep/tol")?;
        }
        None if cfg.command == Some(Command::Sweep) => {
            return Err(schema("/sweep", "the sweep command needs a sweep block"))
        }
        None => {}
    }
    if let Some(t) = cfg.persistence.as_ref().and_then(|p| p.tail_fraction) {
        if !(t > 0.0 && t <= 1.0) {
            return Err(schema("/persistence/tail_fraction", "must lie in (0, 1]"));
        }
    }
    if cfg.command == Some(Command::Persistence) {
        if cfg.system.perturbation.is_none() {
            return Err(schema("/system/perturbation", "the persistence command needs perturbations"));
        }
        if n < 2 {
            return Err(schema("/system/W", "the persistence command needs at least two nodes"));
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn command(&self) -> Command {
        self.command.expect("resolved configuration")
    }

    pub fn field(&self) -> Result<Arc<dyn VectorField>, ConfigError> {
        Ok(match &self.system.field {
            FieldSpec::Lorenz { sigma, r, b } => {
                let d = Lorenz::default();
                Arc::new(Lorenz {
                    sigma: sigma.unwrap_or(d.sigma),
                    r: r.unwrap_or(d.r),
                    b: b.unwrap_or(d.b),
                })
            }
            FieldSpec::NonautonomousLinear => Arc::new(NonautonomousLinear),
            FieldSpec::Linear { a } => {
                let a = square(a, "/system/field/A")?;
                Arc::new(LinearField::new(a).expect("square"))
            }
        })
    }

    fn field_dim(&self) -> Result<usize, ConfigError> {
        Ok(self.field()?.dim())
    }

    pub fn weights(&self) -> Result<WeightMatrix, ConfigError> {
        let w = square(&self.system.w, "/system/W")?;
        WeightMatrix::new(w).map_err(|e| schema("/system/W", e.to_string()))
    }

    /// Γ from the system block.
    pub fn gamma(&self) -> Result<RealMatrix, ConfigError> {
        match &self.system.coupling.gamma {
            Some(g) => square(g, "/system/coupling/Gamma"),
            None => Err(schema("/system/coupling/Gamma", "missing coupling matrix")),
        }
    }

    pub fn coupling_function(&self, gamma: RealMatrix) -> Arc<dyn CouplingFunction> {
        match self.system.coupling.kind {
            CouplingKind::Linear => Arc::new(LinearCoupling::new(gamma).expect("square")),
            CouplingKind::Tanh => Arc::new(TanhCoupling::new(gamma).expect("square")),
        }
    }

    /// Spectral data of Γ, using the supplied Jordan form when present.
    pub fn coupling_spec(&self, gamma: RealMatrix) -> Result<CouplingSpec, String> {
        match &self.system.coupling.jordan {
            Some(j) => {
                let o = square(&j.o, "/system/coupling/jordan/O").map_err(|e| e.to_string())?;
                let jm = square(&j.j, "/system/coupling/jordan/J").map_err(|e| e.to_string())?;
                CouplingSpec::with_jordan_form(gamma, o.to_complex(), jm.to_complex())
                    .map_err(|e| e.to_string())
            }
            None => CouplingSpec::new(gamma).map_err(|e| e.to_string()),
        }
    }

    pub fn laplacian_jordan(&self) -> Result<Option<JordanForm>, ConfigError> {
        let Some(j) = self.analysis.as_ref().and_then(|a| a.laplacian_jordan.as_ref()) else {
            return Ok(None);
        };
        Ok(Some(JordanForm {
            o: square(&j.o, "/analysis/laplacian_jordan/O")?.to_complex(),
            j: square(&j.j, "/analysis/laplacian_jordan/J")?.to_complex(),
        }))
    }

    pub fn perturbation(&self, n: usize, m: usize) -> Result<Option<Arc<dyn Perturbation>>, ConfigError> {
        let Some(p) = &self.system.perturbation else {
            return Ok(None);
        };
        let bias = match (&p.biases, p.eps0) {
            (Some(b), _) => ConstantBias::new(matrix(b, "/system/perturbation/biases")?),
            (None, Some(eps0)) => ConstantBias::random(n, m, eps0, p.seed.unwrap_or(0))
                .ok_or_else(|| schema("/system/perturbation", "cannot draw biases"))?,
            (None, None) => return Err(schema("/system/perturbation", "missing biases")),
        };
        Ok(Some(Arc::new(bias)))
    }

    /// The network with Γ from the system block and any perturbation.
    pub fn network(&self) -> Result<NetworkSystem, ConfigError> {
        self.network_with_gamma(self.gamma()?)
    }

    pub fn network_with_gamma(&self, gamma: RealMatrix) -> Result<NetworkSystem, ConfigError> {
        let weights = self.weights()?;
        let n = weights.n();
        let field = self.field()?;
        let m = field.dim();
        let mut sys = NetworkSystem::new(field, self.coupling_function(gamma), weights, self.system.alpha)
            .map_err(|e| schema("/system", e.to_string()))?;
        if let Some(p) = self.perturbation(n, m)? {
            sys = sys
                .with_perturbation(p)
                .map_err(|e| schema("/system/perturbation", e.to_string()))?;
        }
        Ok(sys)
    }

    pub fn run_config(&self) -> RunConfig {
        let d = field_defaults(&self.system.field);
        let Some(r) = &self.run else { return d };
        RunConfig {
            t0: r.t0.unwrap_or(d.t0),
            t_burn: r.t_burn.unwrap_or(d.t_burn),
            t_end: r.t_end.unwrap_or(d.t_end),
            dt: r.dt.unwrap_or(d.dt),
            method: r.method.unwrap_or(d.method),
            delta: r.delta.unwrap_or(d.delta),
            seed: r.seed.unwrap_or(d.seed),
            sync_tol: r.sync_tol.unwrap_or(d.sync_tol),
            rate_min: r.rate_min.unwrap_or(d.rate_min),
            rate_fit_window: r.rate_fit_window,
            divergence_guard: r.divergence_guard.unwrap_or(d.divergence_guard),
            record_stride: r.record_stride.unwrap_or(d.record_stride),
            base_state: r.base_state.clone(),
        }
    }

    pub fn analysis(&self) -> &AnalysisBlock {
        self.analysis.as_ref().expect("resolved configuration")
    }

    pub fn constants(&self) -> Constants {
        self.analysis().constants.unwrap_or_default()
    }

    pub fn critical(&self) -> &CriticalBlock {
        self.critical.as_ref().expect("resolved configuration")
    }

    pub fn output(&self) -> &OutputBlock {
        self.output.as_ref().expect("resolved configuration")
    }

    pub fn csv_form(&self) -> CsvForm {
        self.output().csv_form.unwrap_or(CsvForm::Wide)
    }

    pub fn tail_fraction(&self) -> f64 {
        self.persistence.as_ref().and_then(|p| p.tail_fraction).unwrap_or(0.5)
    }

    /// Replaces the run seed.
    pub fn set_seed(&mut self, seed: u64) {
        if let Some(r) = &mut self.run {
            r.seed = Some(seed);
        }
    }

    pub fn set_output_dir(&mut self, dir: String) {
        if let Some(o) = &mut self.output {
            o.dir = Some(dir);
        }
    }
}

/// Γ for one β of a sweep.
pub fn family_gamma(family: GammaFamily, beta: f64, m: usize, base: Option<&RealMatrix>) -> RealMatrix {
    match family {
        GammaFamily::ScaledIdentity => RealMatrix::identity(m).scale(beta),
        GammaFamily::Jordan => RealMatrix::from_fn(m, m, |i, j| {
            if i == j {
                beta
            } else if j == i + 1 {
                1.0
            } else {
                0.0
            }
        }),
        GammaFamily::Scaled => base.expect("validated").scale(beta),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const COUNTEREXAMPLE: &str = r#"{
        "command": "analyze",
        "system": {
            "field": {"name": "linear", "A": [[-0.1, 0], [0, -0.1]]},
            "W": [[0, 2, 1], [0, 0, 2], [1, 0, 0]],
            "coupling": {"kind": "linear", "Gamma": [[2, 1], [-17, 0]]},
            "alpha": 1
        }
    }"#;

    #[test]
    fn defaults_are_filled() {
        let cfg = parse_config(COUNTEREXAMPLE, None).unwrap();
        let run = cfg.run.as_ref().unwrap();
        assert_eq!(run.dt, Some(1e-3));
        assert_eq!(run.method, Some(Method::Rk6));
        assert_eq!(cfg.command(), Command::Analyze);
        assert_eq!(cfg.csv_form(), CsvForm::Wide);

        let lorenz = COUNTEREXAMPLE
            .replace(r#"{"name": "linear", "A": [[-0.1, 0], [0, -0.1]]}"#, r#"{"name": "lorenz"}"#)
            .replace("[[2, 1], [-17, 0]]", "[[1, 0, 0], [0, 1, 0], [0, 0, 1]]");
        let cfg = parse_config(&lorenz, None).unwrap();
        assert_eq!(cfg.run.as_ref().unwrap().dt, Some(1e-4));
        assert!(matches!(cfg.system.field, FieldSpec::Lorenz { sigma: Some(s), .. } if s == 10.0));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse_config(COUNTEREXAMPLE, None).unwrap();
        let echo = serde_json::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&echo, None).unwrap(), cfg);
    }

    #[test]
    fn rectangular_weights_are_rejected() {
        let bad = COUNTEREXAMPLE.replace("[[0, 2, 1], [0, 0, 2], [1, 0, 0]]", "[[0, 1], [1, 0], [1, 1]]");
        match parse_config(&bad, None) {
            Err(ConfigError::Schema { path, message }) => {
                assert_eq!(path, "/system/W");
                assert!(message.contains("3×2"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_keys_carry_their_path() {
        let bad = COUNTEREXAMPLE.replace("\"alpha\": 1", "\"alpha\": 1, \"alhpa\": 2");
        match parse_config(&bad, None) {
            Err(ConfigError::Schema { path, message }) => {
                assert_eq!(path, "/system/alhpa");
                assert!(message.contains("unknown field"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        let bad = COUNTEREXAMPLE.replace("\"alpha\": 1", "\"alpha\": \"one\"");
        assert!(matches!(parse_config(&bad, None), Err(ConfigError::Schema { path, .. }) if path == "/system/alpha"));
    }

    #[test]
    fn syntax_errors_report_position() {
        match parse_config("{\n  \"command\": ,\n}", None) {
            Err(ConfigError::Syntax { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dimension_mismatches_name_both_sides() {
        let bad = COUNTEREXAMPLE.replace("[[2, 1], [-17, 0]]", "[[1, 0, 0], [0, 1, 0], [0, 0, 1]]");
        match parse_config(&bad, None) {
            Err(ConfigError::Dimension { path, expected, got }) => {
                assert_eq!(path, "/system/coupling/Gamma");
                assert_eq!((expected.as_str(), got.as_str()), ("2×2", "3×3"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn command_conflicts_are_rejected() {
        assert!(parse_config(COUNTEREXAMPLE, Some(Command::Analyze)).is_ok());
        assert!(parse_config(COUNTEREXAMPLE, Some(Command::Simulate)).is_err());
        let bare = COUNTEREXAMPLE.replace("\"command\": \"analyze\",", "");
        assert!(parse_config(&bare, None).is_err());
        assert_eq!(parse_config(&bare, Some(Command::Simulate)).unwrap().command(), Command::Simulate);
    }

    #[test]
    fn command_specific_blocks() {
        let sweep = COUNTEREXAMPLE.replace("\"analyze\"", "\"sweep\"");
        assert!(matches!(parse_config(&sweep, None), Err(ConfigError::Schema { path, .. }) if path == "/sweep"));
        let pers = COUNTEREXAMPLE.replace("\"analyze\"", "\"persistence\"");
        assert!(parse_config(&pers, None).is_err());
        let with = pers.replace("\"alpha\": 1", "\"alpha\": 1, \"perturbation\": {\"eps0\": 0.01}");
        let cfg = parse_config(&with, None).unwrap();
        assert_eq!(cfg.system.perturbation.as_ref().unwrap().seed, Some(0));
        assert!(cfg.network().unwrap().perturbation().is_some());
    }

    #[test]
    fn sweep_families() {
        let j = family_gamma(GammaFamily::Jordan, 0.3, 2, None);
        assert_eq!(j, RealMatrix::from_rows(&[[0.3, 1.0], [0.0, 0.3]]).unwrap());
        let s = family_gamma(GammaFamily::ScaledIdentity, 2.0, 3, None);
        assert_eq!(s, RealMatrix::identity(3).scale(2.0));
    }
}
