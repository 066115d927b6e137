use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{classify_run, ExperimentError, RunConfig};
use crate::dynamics::NetworkSystem;
#[allow(unused_imports)]
use num_traits::Float;

/// A search interval `[lo, hi]` for a coupling strength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self, ExperimentError> {
        if !(lo >= 0.0 && hi > lo && hi.is_finite()) {
            return Err(ExperimentError::Config("bracket needs 0 ≤ lo < hi < ∞"));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCouplingResult {
    pub beta: f64,
    pub alpha_c: f64,
    /// `α_c·β`.
    pub rho_c: f64,
    /// `α_c·γ` when γ is known.
    pub rho_c_gamma: Option<f64>,
    pub bisection_width: f64,
    pub evaluations: usize,
    /// Final bracket.
    pub bracket: Bracket,
    /// The run already synchronised at the lower end of the bracket.
    pub lo_edge: bool,
    /// Whether a run at `2α_c` synchronised.
    pub spot_check: bool,
    /// Searches restarted above a failed spot check.
    pub restarts: u32,
}

const MAX_RESTARTS: u32 = 8;

/// Bisects on α for the coupling above which [`classify_run`] reports
/// synchrony. `hi` is doubled up to `max_doublings` times until it
/// synchronises; when a run at twice the result does not synchronise the
/// search restarts above it.
pub fn find_critical_coupling(
    system: &NetworkSystem,
    cfg: &RunConfig,
    bracket: Bracket,
    tol: f64,
    max_doublings: u32,
) -> Result<CriticalCouplingResult, ExperimentError> {
    if !(tol > 0.0) {
        return Err(ExperimentError::Config("bisection tolerance must be positive"));
    }
    let mut evaluations = 0usize;
    let mut synced = |alpha: f64| -> Result<bool, ExperimentError> {
        evaluations += 1;
        Ok(classify_run(&system.with_alpha(alpha)?, cfg)?.synchronised)
    };
    let Bracket { mut lo, mut hi } = bracket;
    if synced(lo)? {
        let spot_check = synced(2.0 * lo)?;
        return Ok(CriticalCouplingResult {
            beta: 1.0,
            alpha_c: lo,
            rho_c: lo,
            rho_c_gamma: None,
            bisection_width: 0.0,
            evaluations,
            bracket: Bracket { lo, hi: lo },
            lo_edge: true,
            spot_check,
            restarts: 0,
        });
    }
    let mut restarts = 0;
    loop {
        let mut doublings = 0;
        while !synced(hi)? {
            if doublings == max_doublings {
                return Err(ExperimentError::NoThreshold { alpha_max: hi });
            }
            lo = hi;
            hi *= 2.0;
            doublings += 1;
        }
        while hi - lo > tol {
            let mid = 0.5 * (lo + hi);
            if synced(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let alpha_c = 0.5 * (lo + hi);
        let spot_check = synced(2.0 * alpha_c)?;
        // A failed spot check means an isolated synchronising window; look
        // for the threshold above it.
        if spot_check || restarts == MAX_RESTARTS {
            return Ok(CriticalCouplingResult {
                beta: 1.0,
                alpha_c,
                rho_c: alpha_c,
                rho_c_gamma: None,
                bisection_width: hi - lo,
                evaluations,
                bracket: Bracket { lo, hi },
                lo_edge: false,
                spot_check,
                restarts,
            });
        }
        restarts += 1;
        lo = 2.0 * alpha_c;
        hi = 2.0 * lo;
    }
}

/// A network built for one value of β, with γ if it is known.
pub struct SweepPoint {
    pub system: NetworkSystem,
    pub gamma: Option<f64>,
}

/// One row of a β-sweep: a critical coupling or the reason there is none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub result: Option<CriticalCouplingResult>,
    pub gap: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    /// Slope of `log ρ_c` against `log β`; absent with fewer than two usable
    /// points.
    pub loglog_slope: Option<f64>,
}

/// Seed for grid point `index`, derived from the base seed.
pub fn point_seed(base: u64, index: usize) -> u64 {
    let mut z = base ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Critical coupling for one β. The bracket and tolerance are given on the
/// `ρ = α·β` scale.
pub fn sweep_point<F>(
    build: &F,
    cfg: &RunConfig,
    beta: f64,
    index: usize,
    rho_bracket: Bracket,
    rho_tol: f64,
    max_doublings: u32,
) -> SweepRow
where
    F: Fn(f64) -> Result<SweepPoint, ExperimentError> + ?Sized,
{
    let attempt = || -> Result<CriticalCouplingResult, ExperimentError> {
        let point = build(beta)?;
        let cfg = RunConfig {
            seed: point_seed(cfg.seed, index),
            ..cfg.clone()
        };
        let bracket = Bracket::new(rho_bracket.lo / beta, rho_bracket.hi / beta)?;
        let mut r = find_critical_coupling(&point.system, &cfg, bracket, rho_tol / beta, max_doublings)?;
        r.beta = beta;
        r.rho_c = r.alpha_c * beta;
        r.rho_c_gamma = point.gamma.map(|g| r.alpha_c * g);
        Ok(r)
    };
    match attempt() {
        Ok(r) => SweepRow {
            beta,
            result: Some(r),
            gap: None,
        },
        Err(e) => SweepRow {
            beta,
            result: None,
            gap: Some(e.to_string()),
        },
    }
}

/// Least-squares slope of `log ρ_c` against `log β` over rows with β in
/// `range` (all rows when absent) and a positive `ρ_c`.
pub fn loglog_slope(rows: &[SweepRow], range: Option<(f64, f64)>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| range.is_none_or(|(a, b)| r.beta >= a && r.beta <= b))
        .filter_map(|r| r.result.as_ref())
        .filter(|r| r.rho_c > 0.0 && !r.lo_edge)
        .map(|r| (r.beta.ln(), r.rho_c.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Sequential β-sweep. Each grid point uses [`point_seed`] so results do not
/// depend on evaluation order.
pub fn beta_sweep<F>(
    build: &F,
    cfg: &RunConfig,
    betas: &[f64],
    rho_bracket: Bracket,
    rho_tol: f64,
    max_doublings: u32,
    fit_range: Option<(f64, f64)>,
) -> Result<SweepOutcome, ExperimentError>
where
    F: Fn(f64) -> Result<SweepPoint, ExperimentError> + ?Sized,
{
    validate_grid(betas)?;
    let rows: Vec<SweepRow> = betas
        .iter()
        .enumerate()
        .map(|(i, &b)| sweep_point(build, cfg, b, i, rho_bracket, rho_tol, max_doublings))
        .collect();
    let loglog_slope = loglog_slope(&rows, fit_range);
    Ok(SweepOutcome { rows, loglog_slope })
}

pub fn validate_grid(betas: &[f64]) -> Result<(), ExperimentError> {
    if betas.is_empty() {
        return Err(ExperimentError::Config("β grid is empty"));
    }
    if !betas.iter().all(|b| *b > 0.0 && b.is_finite()) {
        return Err(ExperimentError::Config("β grid must be positive and finite"));
    }
    if !betas.windows(2).all(|w| w[0] < w[1]) {
        return Err(ExperimentError::Config("β grid must be strictly increasing"));
    }
    Ok(())
}
