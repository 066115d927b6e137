use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{estimate_decay_rate, pairwise_spread, sync_error, DecayFit, ExperimentError, Series};
use crate::dynamics::{
    finite_difference_jacobian, integrate, integrate_observed, max_node_norm, Divergence,
    IntegrationSettings, Isolated, Method, NetworkSystem, VectorField,
};
use crate::linalg::RealMatrix;
use crate::stability::PersistenceBound;
use crate::tolerances::DIVERGENCE_GUARD;
#[allow(unused_imports)]
use num_traits::Float;

/// Spreads below this fraction of the state norm are rounding noise.
const RELATIVE_SPREAD_FLOOR: f64 = 1e-12;

/// Timing, sampling and decision knobs for one simulated run.
///
/// The isolated system is integrated from `base_state` over `[t0, t_burn]`;
/// the network then starts at `t_burn` from a δ-ball around the result and
/// runs until `t_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub t0: f64,
    pub t_burn: f64,
    pub t_end: f64,
    pub dt: f64,
    pub method: Method,
    /// Radius of the initial scatter around the burnt-in state.
    pub delta: f64,
    pub seed: u64,
    /// Required ratio of final to initial spread.
    pub sync_tol: f64,
    /// Required decay rate magnitude.
    pub rate_min: f64,
    /// Fit window; the whole network run when absent.
    pub rate_fit_window: Option<(f64, f64)>,
    pub divergence_guard: f64,
    /// Record every `record_stride`-th integration step.
    pub record_stride: usize,
    /// Start of the burn-in; all ones when absent.
    pub base_state: Option<Vec<f64>>,
}

impl RunConfig {
    /// Linear node dynamics: no burn-in, `dt = 10⁻³`.
    pub fn linear() -> Self {
        Self {
            t0: 0.0,
            t_burn: 0.0,
            t_end: 10.0,
            dt: 1e-3,
            method: Method::Rk6,
            delta: 1e-3,
            seed: 0,
            sync_tol: 1e-6,
            rate_min: 0.05,
            rate_fit_window: None,
            divergence_guard: DIVERGENCE_GUARD,
            record_stride: 10,
            base_state: None,
        }
    }

    /// Chaotic node dynamics: burn-in of 20 time units, `dt = 10⁻⁴`.
    pub fn chaotic() -> Self {
        Self {
            t_burn: 20.0,
            t_end: 70.0,
            dt: 1e-4,
            record_stride: 100,
            ..Self::linear()
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let finite = [self.t0, self.t_burn, self.t_end, self.dt, self.delta, self.sync_tol]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(ExperimentError::Config("times and tolerances must be finite"));
        }
        if !(self.t0 <= self.t_burn && self.t_burn < self.t_end) {
            return Err(ExperimentError::Config("need t0 ≤ t_burn < t_end"));
        }
        if !(self.dt > 0.0) {
            return Err(ExperimentError::Config("dt must be positive"));
        }
        if !(self.delta > 0.0) {
            return Err(ExperimentError::Config("delta must be positive"));
        }
        if !(self.sync_tol > 0.0) {
            return Err(ExperimentError::Config("sync_tol must be positive"));
        }
        if !(self.rate_min >= 0.0) {
            return Err(ExperimentError::Config("rate_min must be non-negative"));
        }
        if self.record_stride == 0 {
            return Err(ExperimentError::Config("record_stride must be at least 1"));
        }
        if let Some((a, b)) = self.rate_fit_window {
            if !(a < b) {
                return Err(ExperimentError::Config("rate_fit_window must be increasing"));
            }
        }
        Ok(())
    }

    fn settings(&self) -> IntegrationSettings {
        IntegrationSettings::new(self.dt, self.method).with_guard(self.divergence_guard)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncRunResult {
    pub spread_series: Series,
    pub fit: DecayFit,
    pub synchronised: bool,
    pub diverged: Option<Divergence>,
    pub initial_spread: f64,
    pub final_spread: f64,
}

impl SyncRunResult {
    /// Fitted exponent; `−∞` for an exactly synchronised run.
    pub fn decay_rate(&self) -> f64 {
        self.fit.rate.unwrap_or(f64::NEG_INFINITY)
    }

    pub fn is_diverged(&self) -> bool {
        self.diverged.is_some()
    }
}

/// `n` node states `s₀ + δuᵢ` with `uᵢ` uniform in the unit ball.
pub fn initial_states(n: usize, s0: &[f64], delta: f64, seed: u64) -> Vec<f64> {
    let m = s0.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::with_capacity(n * m);
    for _ in 0..n {
        let dir = crate::dynamics::unit_vector(&mut rng, m);
        let u: f64 = rng.random();
        let r = delta * u.powf(1.0 / m as f64);
        x.extend(s0.iter().zip(dir).map(|(s, d)| s + r * d));
    }
    x
}

/// Burns in the isolated system; `None` if it leaves the guard.
fn burn_in(field: &dyn VectorField, cfg: &RunConfig) -> Result<Option<Vec<f64>>, ExperimentError> {
    let m = field.dim();
    let base = match &cfg.base_state {
        Some(b) if b.len() != m => {
            return Err(crate::dynamics::DynamicsError::Dimension {
                what: "base state",
                expected: m,
                got: b.len(),
            }
            .into())
        }
        Some(b) => b.clone(),
        None => vec![1.0; m],
    };
    if cfg.t_burn <= cfg.t0 {
        return Ok(Some(base));
    }
    let settings = cfg.settings().with_stride(usize::MAX);
    let traj = integrate(&Isolated(field), &base, cfg.t0, cfg.t_burn, &settings)?;
    if traj.diverged().is_some() {
        return Ok(None);
    }
    Ok(Some(traj.last_state().to_vec()))
}

/// The scattered network start used by [`classify_run`]: burn-in of the
/// isolated system, then a δ-ball around the result.
pub fn prepare_initial_state(system: &NetworkSystem, cfg: &RunConfig) -> Result<Vec<f64>, ExperimentError> {
    let s0 = burnt_in_state(system.field().as_ref(), cfg)?;
    Ok(initial_states(system.n(), &s0, cfg.delta, cfg.seed))
}

/// State of the isolated system at `t_burn`.
pub fn burnt_in_state(field: &dyn VectorField, cfg: &RunConfig) -> Result<Vec<f64>, ExperimentError> {
    cfg.validate()?;
    burn_in(field, cfg)?.ok_or(ExperimentError::Domain("isolated system diverged during burn-in"))
}

/// Integrates the network from a scattered start and records `metric` every
/// `record_stride` steps. Returns the series, the largest recorded node norm
/// and any divergence.
fn run_network(
    system: &NetworkSystem,
    cfg: &RunConfig,
    x0: &[f64],
    mut metric: impl FnMut(&[f64]) -> f64,
) -> Result<(Series, f64, Option<Divergence>), ExperimentError> {
    let m = system.m();
    let stride = cfg.record_stride;
    let mut series = Series::default();
    let mut scale: f64 = 0.0;
    let mut pending: Option<(f64, f64, f64)> = None;
    let diverged = integrate_observed(system, x0, cfg.t_burn, cfg.t_end, &cfg.settings(), |k, t, x| {
        let norm = max_node_norm(x, m);
        if k % stride == 0 {
            series.push(t, metric(x));
            scale = scale.max(norm);
            pending = None;
        } else {
            pending = Some((t, metric(x), norm));
        }
        ControlFlow::Continue(())
    })?;
    if let Some((t, v, norm)) = pending {
        series.push(t, v);
        scale = scale.max(norm);
    }
    Ok((series, scale, diverged))
}

/// Simulates one scattered start and decides whether it synchronises.
///
/// A run is synchronised when it is exactly synchronised, or when the fitted
/// rate is below `−rate_min` and the final spread is below `sync_tol` times
/// the initial spread. Divergent runs are never synchronised.
pub fn classify_run(system: &NetworkSystem, cfg: &RunConfig) -> Result<SyncRunResult, ExperimentError> {
    let m = system.m();
    let x0 = prepare_initial_state(system, cfg)?;
    let (series, scale, diverged) = run_network(system, cfg, &x0, |x| pairwise_spread(x, m))?;
    let window = cfg.rate_fit_window.unwrap_or((cfg.t_burn, cfg.t_end));
    let fit = estimate_decay_rate(&series, window, RELATIVE_SPREAD_FLOOR * scale);
    let initial_spread = series.first().unwrap_or(0.0);
    let final_spread = series.last().unwrap_or(0.0);
    let contracting = match fit.rate {
        None => true,
        Some(rate) => rate < -cfg.rate_min && final_spread < cfg.sync_tol * initial_spread,
    };
    Ok(SyncRunResult {
        synchronised: diverged.is_none() && (fit.exact_sync || contracting),
        spread_series: series,
        fit,
        diverged,
        initial_spread,
        final_spread,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PersistenceResult {
    /// Average synchronisation error over time.
    pub es_series: Series,
    /// Largest error over the tail window.
    pub limsup_estimate: f64,
    pub eps0: f64,
    pub bound: Option<PersistenceBound>,
    /// `limsup_estimate / bound.asymptotic_error`.
    pub ratio: Option<f64>,
    pub diverged: Option<Divergence>,
}

/// Runs a perturbed network from a scattered start and measures how far it
/// stays from synchrony over the last `tail_fraction` of the run.
pub fn persistence_experiment(
    system: &NetworkSystem,
    cfg: &RunConfig,
    tail_fraction: f64,
    bound: Option<PersistenceBound>,
) -> Result<PersistenceResult, ExperimentError> {
    cfg.validate()?;
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(ExperimentError::Config("tail_fraction must lie in (0, 1]"));
    }
    if system.n() < 2 {
        return Err(ExperimentError::Domain("synchronisation error needs at least two nodes"));
    }
    let m = system.m();
    let eps0 = system.perturbation().map_or(0.0, |g| g.eps0());
    let x0 = prepare_initial_state(system, cfg)?;
    let (series, _, diverged) =
        run_network(system, cfg, &x0, |x| sync_error(x, m).unwrap_or(f64::NAN))?;
    let tail_start = cfg.t_end - tail_fraction * (cfg.t_end - cfg.t_burn);
    let limsup_estimate = series
        .t
        .iter()
        .zip(&series.v)
        .filter(|(t, _)| **t >= tail_start)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max);
    let ratio = bound
        .filter(|b| b.asymptotic_error > 0.0)
        .map(|b| limsup_estimate / b.asymptotic_error);
    Ok(PersistenceResult {
        es_series: series,
        limsup_estimate,
        eps0,
        bound,
        ratio,
        diverged,
    })
}

/// `count` Jacobians of `field` at evenly spaced points of the orbit from
/// `x0` over `[t0, t1]`; central differences when no closed form exists.
pub fn sample_jacobians(
    field: &dyn VectorField,
    x0: &[f64],
    t0: f64,
    t1: f64,
    settings: &IntegrationSettings,
    count: usize,
) -> Result<Vec<RealMatrix>, ExperimentError> {
    if count == 0 {
        return Err(ExperimentError::Domain("at least one Jacobian sample is required"));
    }
    let steps = ((t1 - t0) / settings.dt).ceil().max(1.0) as usize;
    let stride = (steps / count).max(1);
    let traj = integrate(&Isolated(field), x0, t0, t1, &settings.with_stride(stride))?;
    if traj.diverged().is_some() {
        return Err(ExperimentError::Domain("orbit left the absorbing region"));
    }
    let mut out = Vec::with_capacity(count);
    for (t, x) in traj.times().iter().zip(traj.states()).take(count) {
        let jac = field
            .jacobian(*t, x)
            .unwrap_or_else(|| finite_difference_jacobian(field, *t, x, 1e-6));
        out.push(jac);
    }
    Ok(out)
}
