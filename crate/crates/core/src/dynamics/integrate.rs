//! Fixed-step explicit Runge–Kutta integration.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use super::{DynamicsError, OdeSystem};
use crate::tolerances::DIVERGENCE_GUARD;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Classical fourth-order method.
    Rk4,
    /// Seven-stage sixth-order method due to Butcher.
    Rk6,
}

struct Tableau {
    a: &'static [&'static [f64]],
    b: &'static [f64],
    c: &'static [f64],
}

const RK4: Tableau = Tableau {
    a: &[&[], &[0.5], &[0.0, 0.5], &[0.0, 0.0, 1.0]],
    b: &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
    c: &[0.0, 0.5, 0.5, 1.0],
};

const RK6: Tableau = Tableau {
    a: &[
        &[],
        &[1.0 / 3.0],
        &[0.0, 2.0 / 3.0],
        &[1.0 / 12.0, 1.0 / 3.0, -1.0 / 12.0],
        &[-1.0 / 16.0, 9.0 / 8.0, -3.0 / 16.0, -3.0 / 8.0],
        &[0.0, 9.0 / 8.0, -3.0 / 8.0, -3.0 / 4.0, 1.0 / 2.0],
        &[9.0 / 44.0, -9.0 / 11.0, 63.0 / 44.0, 18.0 / 11.0, 0.0, -16.0 / 11.0],
    ],
    b: &[
        11.0 / 120.0,
        0.0,
        27.0 / 40.0,
        27.0 / 40.0,
        -4.0 / 15.0,
        -4.0 / 15.0,
        11.0 / 120.0,
    ],
    c: &[0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 1.0 / 2.0, 1.0 / 2.0, 1.0],
};

impl Method {
    fn tableau(self) -> &'static Tableau {
        match self {
            Method::Rk4 => &RK4,
            Method::Rk6 => &RK6,
        }
    }

    pub fn order(self) -> u32 {
        match self {
            Method::Rk4 => 4,
            Method::Rk6 => 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub dt: f64,
    pub method: Method,
    /// Integration stops once the max-node norm exceeds this value.
    pub divergence_guard: f64,
    /// Keep every `stride`-th state in a [`Trajectory`].
    pub stride: usize,
}

impl IntegrationSettings {
    pub fn new(dt: f64, method: Method) -> Self {
        Self {
            dt,
            method,
            divergence_guard: DIVERGENCE_GUARD,
            stride: 1,
        }
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.divergence_guard = guard;
        self
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivergenceKind {
    /// The max-node norm exceeded the guard.
    Guard,
    /// The state became NaN or infinite.
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub kind: DivergenceKind,
    /// Time of the last finite state.
    pub last_valid_time: f64,
}

/// Sampled solution of an integration run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<f64>,
    dim: usize,
    node_dim: usize,
    dt: f64,
    diverged: Option<Divergence>,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn state(&self, k: usize) -> &[f64] {
        &self.states[k * self.dim..(k + 1) * self.dim]
    }

    pub fn states(&self) -> impl Iterator<Item = &[f64]> {
        self.states.chunks_exact(self.dim)
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn node_dim(&self) -> usize {
        self.node_dim
    }

    /// Step size used by the integrator.
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn diverged(&self) -> Option<Divergence> {
        self.diverged
    }
}

/// `max_i ‖xᵢ‖₂` over the nodes of a state; NaN propagates.
pub fn max_node_norm(x: &[f64], node_dim: usize) -> f64 {
    let mut best: f64 = 0.0;
    for node in x.chunks_exact(node_dim) {
        let norm = node.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() {
            return f64::NAN;
        }
        best = best.max(norm);
    }
    best
}

/// Integrates `system` from `(t0, y0)` to `t1`, calling `observe(k, t, y)`
/// after every step (and once for the initial state with `k = 0`). The
/// observer may stop the run early.
///
/// Step k ends at `t0 + k·dt`; the last step is shortened to land on `t1` if
/// the span is not a whole number of steps.
pub fn integrate_observed<S, F>(
    system: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    settings: &IntegrationSettings,
    mut observe: F,
) -> Result<Option<Divergence>, DynamicsError>
where
    S: OdeSystem + ?Sized,
    F: FnMut(usize, f64, &[f64]) -> ControlFlow<()>,
{
    let dt = settings.dt;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(DynamicsError::InvalidStep { dt });
    }
    if !(t0.is_finite() && t1.is_finite() && t1 > t0) {
        return Err(DynamicsError::InvalidSpan { t0, t1 });
    }
    let dim = system.dim();
    if y0.len() != dim {
        return Err(DynamicsError::Dimension {
            what: "initial state",
            expected: dim,
            got: y0.len(),
        });
    }
    let span = t1 - t0;
    let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;

    let tab = settings.method.tableau();
    let stages = tab.b.len();
    let mut k = vec![vec![0.0; dim]; stages];
    let mut y = y0.to_vec();
    let mut stage = vec![0.0; dim];
    let mut scratch = vec![0.0; system.scratch_len()];
    let node_dim = system.node_dim();

    if observe(0, t0, &y).is_break() {
        return Ok(None);
    }
    for step in 1..=steps {
        let t = t0 + (step - 1) as f64 * dt;
        let t_next = if step == steps { t1 } else { t0 + step as f64 * dt };
        let h = t_next - t;
        for s in 0..stages {
            stage.copy_from_slice(&y);
            for (j, &a) in tab.a[s].iter().enumerate() {
                if a != 0.0 {
                    let kj = &k[j];
                    for (st, kv) in stage.iter_mut().zip(kj) {
                        *st += h * a * kv;
                    }
                }
            }
            system.rhs(t + tab.c[s] * h, &stage, &mut k[s], &mut scratch);
        }
        for (s, &b) in tab.b.iter().enumerate() {
            if b != 0.0 {
                for (yv, kv) in y.iter_mut().zip(&k[s]) {
                    *yv += h * b * kv;
                }
            }
        }
        let norm = max_node_norm(&y, node_dim);
        if !norm.is_finite() {
            return Ok(Some(Divergence {
                kind: DivergenceKind::NonFinite,
                last_valid_time: t,
            }));
        }
        if observe(step, t_next, &y).is_break() {
            return Ok(None);
        }
        if norm > settings.divergence_guard {
            return Ok(Some(Divergence {
                kind: DivergenceKind::Guard,
                last_valid_time: t_next,
            }));
        }
    }
    Ok(None)
}

/// Integrates and stores every `stride`-th state plus the final one.
pub fn integrate<S: OdeSystem + ?Sized>(
    system: &S,
    y0: &[f64],
    t0: f64,
    t1: f64,
    settings: &IntegrationSettings,
) -> Result<Trajectory, DynamicsError> {
    let dim = system.dim();
    let stride = settings.stride.max(1);
    let mut times = Vec::new();
    let mut states = Vec::new();
    let mut last: Option<(usize, f64)> = None;
    let mut pending: Vec<f64> = Vec::new();
    let diverged = integrate_observed(system, y0, t0, t1, settings, |k, t, y| {
        if k % stride == 0 {
            times.push(t);
            states.extend_from_slice(y);
            last = None;
        } else {
            last = Some((k, t));
            pending.clear();
            pending.extend_from_slice(y);
        }
        ControlFlow::Continue(())
    })?;
    if let Some((_, t)) = last {
        times.push(t);
        states.extend_from_slice(&pending);
    }
    Ok(Trajectory {
        times,
        states,
        dim,
        node_dim: system.node_dim(),
        dt: settings.dt,
        diverged,
    })
}
