//! Synchronisation measurements: spread and error metrics, decay-rate fits,
//! classified runs, critical-coupling bisection, β-sweeps and persistence
//! under perturbations.

mod critical;
mod run;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::tolerances::SPREAD_FLOOR;
#[allow(unused_imports)]
use num_traits::Float;

pub use critical::{
    beta_sweep, find_critical_coupling, loglog_slope, point_seed, sweep_point, validate_grid,
    Bracket, CriticalCouplingResult, SweepOutcome, SweepPoint, SweepRow,
};
pub use run::{
    burnt_in_state, classify_run, initial_states, persistence_experiment, prepare_initial_state,
    sample_jacobians, PersistenceResult, RunConfig, SyncRunResult,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("{0}")]
    Domain(&'static str),
    #[error("invalid run configuration: {0}")]
    Config(&'static str),
    #[error("no synchronising coupling found up to α = {alpha_max}")]
    NoThreshold { alpha_max: f64 },
}

/// A sampled scalar time series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub t: Vec<f64>,
    pub v: Vec<f64>,
}

impl Series {
    pub fn push(&mut self, t: f64, v: f64) {
        self.t.push(t);
        self.v.push(v);
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn first(&self) -> Option<f64> {
        self.v.first().copied()
    }

    pub fn last(&self) -> Option<f64> {
        self.v.last().copied()
    }
}

fn node_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// `max_{i<j} ‖xᵢ − xⱼ‖₂`.
pub fn pairwise_spread(x: &[f64], m: usize) -> f64 {
    let nodes: Vec<&[f64]> = x.chunks_exact(m).collect();
    let mut best: f64 = 0.0;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            best = best.max(node_distance(nodes[i], nodes[j]));
        }
    }
    best
}

/// Average distance over ordered pairs, `Σ_{i≠j} ‖xᵢ − xⱼ‖ / (n(n−1))`.
pub fn sync_error(x: &[f64], m: usize) -> Result<f64, ExperimentError> {
    let nodes: Vec<&[f64]> = x.chunks_exact(m).collect();
    let n = nodes.len();
    if n < 2 {
        return Err(ExperimentError::Domain("synchronisation error needs at least two nodes"));
    }
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            total += node_distance(nodes[i], nodes[j]);
        }
    }
    Ok(2.0 * total / (n * (n - 1)) as f64)
}

/// Least-squares slope of `log s(t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted exponent; negative means contraction. `None` when the spread
    /// is exactly zero throughout.
    pub rate: Option<f64>,
    /// Points used in the fit.
    pub points: usize,
    /// The spread reached the floor before the window ended, or fewer than
    /// ten points were usable.
    pub floored: bool,
    pub exact_sync: bool,
}

/// Fits `log s ≈ a + rate·t` over the samples with `t` in `window`, stopping
/// at the first sample below `floor` (at least [`SPREAD_FLOOR`]).
pub fn estimate_decay_rate(series: &Series, window: (f64, f64), floor: f64) -> DecayFit {
    let floor = floor.max(SPREAD_FLOOR);
    let in_window = || {
        series
            .t
            .iter()
            .zip(&series.v)
            .filter(move |(t, _)| **t >= window.0 && **t <= window.1)
    };
    if in_window().all(|(_, s)| *s == 0.0) {
        return DecayFit {
            rate: None,
            points: 0,
            floored: false,
            exact_sync: true,
        };
    }
    let mut floored = false;
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for (&t, &s) in in_window() {
        if !(s > floor) {
            floored = true;
            break;
        }
        pts.push((t, s.ln()));
    }
    let points = pts.len();
    let rate = match points {
        0 => Some(f64::NEG_INFINITY),
        1 => Some(0.0),
        _ => {
            let mt = pts.iter().map(|p| p.0).sum::<f64>() / points as f64;
            let ml = pts.iter().map(|p| p.1).sum::<f64>() / points as f64;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for &(t, l) in &pts {
                sxy += (t - mt) * (l - ml);
                sxx += (t - mt) * (t - mt);
            }
            Some(if sxx > 0.0 { sxy / sxx } else { 0.0 })
        }
    };
    DecayFit {
        rate,
        points,
        floored: floored || points < 10,
        exact_sync: false,
    }
}
