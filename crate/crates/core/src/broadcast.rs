//! Superposition coding over the BSC/BEC broadcast channel.

use serde::{Deserialize, Serialize};

use crate::alignment::{classify_with, Verdict, DEFAULT_K_LB, DEFAULT_K_UB};
use crate::channel::{compose, Dmc, Ordering, Preprocessor};
use crate::exec::Execution;
use crate::{check_range, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub r1: f64,
    pub r2: f64,
}

fn check_params(alpha: f64, beta: f64, gamma: f64) -> Result<()> {
    check_range("alpha", alpha, 0.0, 0.5, "[0, 1/2]")?;
    check_range("beta", beta, 0.0, 1.0, "[0, 1]")?;
    check_range("gamma", gamma, 0.0, 0.5, "[0, 1/2]")
}

/// `(BSC(alpha) ∘ BSC(gamma), BEC(beta) ∘ BSC(gamma))`.
pub fn bc_channels(alpha: f64, beta: f64, gamma: f64) -> Result<(Dmc, Dmc)> {
    check_params(alpha, beta, gamma)?;
    let t = Preprocessor::bsc(gamma)?;
    Ok((compose(&Dmc::bsc(alpha)?, &t), compose(&Dmc::bec(beta)?, &t)))
}

/// Corner point with a uniform cloud centre `U` passed through `BSC(gamma)`:
/// the BSC receiver decodes `X` given `U`, the BEC receiver decodes `U`.
pub fn superposition_rates(alpha: f64, beta: f64, gamma: f64) -> Result<RatePair> {
    let (wbar, vbar) = bc_channels(alpha, beta, gamma)?;
    let r1 = Dmc::bsc(alpha)?.mutual_info(0.5) - wbar.mutual_info(0.5);
    let r2 = vbar.mutual_info(0.5);
    Ok(RatePair { r1: r1.max(0.0), r2: r2.max(0.0) })
}

pub fn bc_alignment(alpha: f64, beta: f64, gamma: f64) -> Result<Verdict> {
    bc_alignment_with(alpha, beta, gamma, DEFAULT_K_UB, DEFAULT_K_LB, Execution::default())
}

/// Below `beta = 4 alpha (1 - alpha)` the BEC side is less noisy, which gives
/// essential alignment without running the tests.
pub fn bc_alignment_with(alpha: f64, beta: f64, gamma: f64, k_ub: usize, k_lb: usize, exec: Execution) -> Result<Verdict> {
    check_params(alpha, beta, gamma)?;
    if beta <= 4.0 * alpha * (1.0 - alpha) {
        return Ok(Verdict::from_ordering(Ordering::LessNoisy));
    }
    let (wbar, vbar) = bc_channels(alpha, beta, gamma)?;
    classify_with(&wbar, &vbar, k_lb, k_ub, exec)
}

/// The `beta` at which both preprocessed channels have equal capacity.
pub fn equal_capacity_beta(alpha: f64, gamma: f64) -> Result<f64> {
    check_params(alpha, 0.0, gamma)?;
    let gap = |beta: f64| -> Result<f64> {
        let (w, v) = bc_channels(alpha, beta, gamma)?;
        Ok(v.mutual_info(0.5) - w.mutual_info(0.5))
    };
    let (mut lo, mut hi) = (0.0, 1.0);
    if gap(lo)? <= 0.0 {
        return Ok(0.0);
    }
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if gap(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
