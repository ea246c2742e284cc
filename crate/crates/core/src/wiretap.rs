//! Secrecy capacity and key-need classification for the BSC/BEC wiretap pairs.

use serde::{Deserialize, Serialize};

use crate::alignment::{check_alignment_with, check_nonalignment_with, LbResult};
use crate::channel::{compose, Dmc, Preprocessor, PriorDmc};
use crate::entropy::{binary_convolution as conv, h_b};
use crate::exec::Execution;
use crate::optimize::{maximize, maximize_2d};
use crate::polarize::{branch_intervals, check_epsilon, log2_exact, synthesize_prior_tree, classify_interval, Membership, Method, ZInterval};
use crate::{check_range, Error, Result};

/// Level of the nonalignment test used for the BEC/BSC key-need region.
pub const KEY_LB_LEVEL: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Eve's channel is less noisy than Bob's: nothing can be kept secret.
    EveLessNoisy,
    /// Bob's channel is less noisy than Eve's.
    BobLessNoisy,
    /// Bob's channel is more capable (but not less noisy) than Eve's.
    BobMoreCapable,
    /// Capacity needs preprocessing through an auxiliary input.
    Preprocessed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WiretapSolution {
    pub cs: f64,
    pub gamma_star: Option<f64>,
    pub r_star: Option<f64>,
    /// Optimal `P(X = 0)` when no preprocessing is used.
    pub input_prior: Option<f64>,
    pub regime: Regime,
}

fn check_params(alpha: f64, beta: f64) -> Result<()> {
    check_range("alpha", alpha, 0.0, 0.5, "[0, 1/2]")?;
    check_range("beta", beta, 0.0, 1.0, "[0, 1]")
}

/// Bob sees `BSC(alpha)`, Eve sees `BEC(beta)`; the auxiliary input passes
/// through `BSC(gamma)` with `gamma` in `[0, 1/2]`.
pub fn cs_bsc_bec(alpha: f64, beta: f64) -> Result<WiretapSolution> {
    check_params(alpha, beta)?;
    if beta <= 4.0 * alpha * (1.0 - alpha) {
        return Ok(WiretapSolution { cs: 0.0, gamma_star: None, r_star: None, input_prior: None, regime: Regime::EveLessNoisy });
    }
    let m = maximize(&|g| bsc_bec_objective(alpha, beta, g), 0.0, 0.5);
    Ok(WiretapSolution {
        cs: m.value.max(0.0),
        gamma_star: Some(m.x),
        r_star: None,
        input_prior: None,
        regime: Regime::Preprocessed,
    })
}

/// `I(U;Y) - I(U;Z)` for uniform `U` through `BSC(gamma)`.
pub fn bsc_bec_objective(alpha: f64, beta: f64, gamma: f64) -> f64 {
    (1.0 - h_b(conv(alpha, gamma))) - (1.0 - beta) * (1.0 - h_b(gamma))
}

/// `I(X;Y) - I(X;Z)` with Bob on `BEC(beta)`, Eve on `BSC(alpha)` and `P(X = 0) = p`.
pub fn bec_bsc_f(alpha: f64, beta: f64, p: f64) -> f64 {
    (1.0 - beta) * h_b(p) - (h_b(conv(alpha, p)) - h_b(alpha))
}

/// Objective over the auxiliary input: `P(U = 0) = r`, `U = 0` sends `X = 1`,
/// `U = 1` sends `X = 0` with probability `gamma`.
pub fn bec_bsc_objective(alpha: f64, beta: f64, r: f64, gamma: f64) -> f64 {
    let f = |p| bec_bsc_f(alpha, beta, p);
    f((1.0 - r) * gamma) - r * f(0.0) - (1.0 - r) * f(gamma)
}

/// Bob sees `BEC(beta)`, Eve sees `BSC(alpha)`.
pub fn cs_bec_bsc(alpha: f64, beta: f64) -> Result<WiretapSolution> {
    check_params(alpha, beta)?;
    if beta <= h_b(alpha) {
        let m = maximize(&|p| bec_bsc_f(alpha, beta, p), 0.0, 1.0);
        let regime = if beta <= 4.0 * alpha * (1.0 - alpha) { Regime::BobLessNoisy } else { Regime::BobMoreCapable };
        return Ok(WiretapSolution { cs: m.value.max(0.0), gamma_star: None, r_star: None, input_prior: Some(m.x), regime });
    }
    let m = maximize_2d(&|g, r| bec_bsc_objective(alpha, beta, r, g), (0.0, 1.0), (0.0, 1.0));
    Ok(WiretapSolution {
        cs: m.value.max(0.0),
        gamma_star: Some(m.x),
        r_star: Some(m.y),
        input_prior: None,
        regime: Regime::Preprocessed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KeyNeed {
    ZeroCapacity,
    NoKeyNeeded,
    NoKeyLessNoisy,
    NoKeyMoreCapable,
    KeyNeeded,
    Inconclusive,
}

impl KeyNeed {
    pub fn tag(&self) -> &'static str {
        match self {
            KeyNeed::ZeroCapacity => "zero-capacity",
            KeyNeed::NoKeyNeeded => "no-key",
            KeyNeed::NoKeyLessNoisy => "no-key-less-noisy",
            KeyNeed::NoKeyMoreCapable => "no-key-more-capable",
            KeyNeed::KeyNeeded => "key-needed",
            KeyNeed::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyNeedReport {
    pub need: KeyNeed,
    pub solution: WiretapSolution,
    /// `1 - Z(Bob) - F(Eve counterpart)` for the BSC/BEC pair.
    pub margin: Option<f64>,
    pub lb: Option<LbResult>,
}

/// Alignment margin of the preprocessed BSC/BEC pair at level 0, from the
/// closed forms of both fidelities.
pub fn bsc_bec_margin(alpha: f64, beta: f64, gamma: f64) -> f64 {
    let a = conv(alpha, gamma);
    1.0 - 2.0 * (a * (1.0 - a)).sqrt() - (1.0 - beta) * (1.0 - 2.0 * gamma)
}

pub fn key_need_bsc_bec(alpha: f64, beta: f64) -> Result<KeyNeedReport> {
    let solution = cs_bsc_bec(alpha, beta)?;
    let Some(g) = solution.gamma_star else {
        return Ok(KeyNeedReport { need: KeyNeed::ZeroCapacity, solution, margin: None, lb: None });
    };
    let margin = bsc_bec_margin(alpha, beta, g);
    let need = if margin >= -crate::alignment::UB_TOL { KeyNeed::NoKeyNeeded } else { KeyNeed::Inconclusive };
    Ok(KeyNeedReport { need, solution, margin: Some(margin), lb: None })
}

/// The same margin computed from the synthesized channels rather than closed forms.
pub fn bsc_bec_margin_generic(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    let (bob, eve) = bsc_bec_channels(alpha, beta, gamma)?;
    Ok(check_alignment_with(&bob, &eve, 0, Execution::Sequential)?.margins[0])
}

pub fn bsc_bec_channels(alpha: f64, beta: f64, gamma: f64) -> Result<(Dmc, Dmc)> {
    let t = Preprocessor::bsc(gamma)?;
    Ok((compose(&Dmc::bsc(alpha)?, &t), compose(&Dmc::bec(beta)?, &t)))
}

/// Bob's and Eve's channels from the auxiliary input, with its prior.
pub fn bec_bsc_channels(alpha: f64, beta: f64, r: f64, gamma: f64) -> Result<(PriorDmc, PriorDmc)> {
    let t = Preprocessor::z_channel(gamma)?;
    Ok((
        PriorDmc::new(r, compose(&Dmc::bec(beta)?, &t))?,
        PriorDmc::new(r, compose(&Dmc::bsc(alpha)?, &t))?,
    ))
}

pub fn key_need_bec_bsc(alpha: f64, beta: f64) -> Result<KeyNeedReport> {
    key_need_bec_bsc_with(alpha, beta, Execution::default())
}

pub fn key_need_bec_bsc_with(alpha: f64, beta: f64, exec: Execution) -> Result<KeyNeedReport> {
    let solution = cs_bec_bsc(alpha, beta)?;
    let need = match solution.regime {
        Regime::BobLessNoisy => KeyNeed::NoKeyLessNoisy,
        Regime::BobMoreCapable => KeyNeed::NoKeyMoreCapable,
        _ => {
            let (bob, eve) = bec_bsc_channels(alpha, beta, solution.r_star.unwrap_or(0.5), solution.gamma_star.unwrap_or(1.0))?;
            // the lower-bound test runs on the preprocessed channels with a uniform index input;
            // r* only selects the preprocessing
            let lb = check_nonalignment_with(&bob.channel, &eve.channel, KEY_LB_LEVEL, exec)?;
            let need = if lb.fired { KeyNeed::KeyNeeded } else { KeyNeed::Inconclusive };
            return Ok(KeyNeedReport { need, solution, margin: None, lb: Some(lb) });
        }
    };
    Ok(KeyNeedReport { need, solution, margin: None, lb: None })
}

/// Message, frozen-by-Bob, key and random index sets over `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WiretapSets {
    /// Good for Bob, bad for Eve.
    pub m_set: Vec<usize>,
    /// Good for Bob, not bad for Eve.
    pub a_set: Vec<usize>,
    /// Not good for Bob, bad for Eve.
    pub f_set: Vec<usize>,
    /// Neither good for Bob nor bad for Eve.
    pub k_set: Vec<usize>,
    pub undecided: Vec<usize>,
    pub n: usize,
    pub epsilon: f64,
}

fn prior_intervals(pc: &PriorDmc, k: usize, method: Method, exec: Execution) -> Result<Vec<ZInterval>> {
    match method {
        Method::Exact => Ok(synthesize_prior_tree(pc, k, exec)?
            .pop()
            .expect("root level")
            .iter()
            .map(|c| {
                let z = c.generalized_bhatt();
                ZInterval { lo: z, hi: z }
            })
            .collect()),
        Method::Bounds => {
            if pc.p != 0.5 {
                return Err(Error::Config("bound propagation needs a uniform input".into()));
            }
            branch_intervals(&pc.channel, k, Method::Bounds, exec)
        }
    }
}

pub fn wiretap_sets(bob: &PriorDmc, eve: &PriorDmc, n: usize, epsilon: f64, method: Method, exec: Execution) -> Result<WiretapSets> {
    check_epsilon(epsilon)?;
    let k = log2_exact(n)?;
    let zb = prior_intervals(bob, k, method, exec)?;
    let ze = prior_intervals(eve, k, method, exec)?;
    let mut s = WiretapSets {
        m_set: vec![],
        a_set: vec![],
        f_set: vec![],
        k_set: vec![],
        undecided: vec![],
        n,
        epsilon,
    };
    for i in 0..n {
        let good_bob = classify_interval(&zb[i], epsilon);
        let bad_eve = classify_interval(&ze[i], epsilon);
        let is_good = |m| m == Membership::Good;
        let is_bad = |m| m == Membership::Bad;
        // "not good" / "not bad" are only certified when the interval excludes the threshold.
        let not_good = |iv: &ZInterval| iv.lo > epsilon;
        let not_bad = |iv: &ZInterval| iv.hi < 1.0 - epsilon;
        let set = if is_good(good_bob) && is_bad(bad_eve) {
            &mut s.m_set
        } else if is_good(good_bob) && not_bad(&ze[i]) {
            &mut s.a_set
        } else if not_good(&zb[i]) && is_bad(bad_eve) {
            &mut s.f_set
        } else if not_good(&zb[i]) && not_bad(&ze[i]) {
            &mut s.k_set
        } else {
            &mut s.undecided
        };
        set.push(i + 1);
    }
    Ok(s)
}
