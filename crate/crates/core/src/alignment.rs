//! Level-k certificates for alignment and nonalignment of polarized sets.

use serde::{Deserialize, Serialize};

use crate::channel::{Dmc, Ordering, PriorDmc};
use crate::counterpart::counterpart;
use crate::cq::cq_level_fidelities;
use crate::exec::Execution;
use crate::polarize::{synthesize_level, synthesize_prior_tree, synthesize_tree, BranchLabel};
use crate::Result;

/// Minimum information gap for the nonalignment certificate to fire.
pub const LB_MARGIN: f64 = 1e-9;
/// Round-off allowance on the alignment inequality.
pub const UB_TOL: f64 = 1e-12;
pub const DEFAULT_K_LB: usize = 4;
pub const DEFAULT_K_UB: usize = 2;

/// Outcome of the nonalignment test `I(V_b) >= I(W_b) + margin`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LbResult {
    pub level: usize,
    pub fired: bool,
    /// First branch in lexicographic order at `level` that satisfies the test.
    pub witness: Option<BranchLabel>,
    /// Witness at the shallowest level where the test already fires.
    pub earliest: Option<BranchLabel>,
}

/// Outcome of the alignment test `F(W_b) + F((V^c)_{b complement}) <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UbResult {
    pub level: usize,
    pub holds: bool,
    /// `1 - F(W_b) - F((V^c)_{b complement})` for each `b` in level order.
    pub margins: Vec<f64>,
}

impl UbResult {
    pub fn min_margin(&self) -> f64 {
        self.margins.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Scans per-level information vectors for the first level and branch where
/// `iv[b] - iw[b] >= LB_MARGIN`.
pub(crate) fn lb_scan(iw: &[Vec<f64>], iv: &[Vec<f64>]) -> LbResult {
    let k = iw.len() - 1;
    let first = |l: usize| {
        iw[l].iter()
            .zip(&iv[l])
            .position(|(w, v)| v - w >= LB_MARGIN)
            .map(|i| BranchLabel::from_index(i, l).expect("level within cap"))
    };
    let witness = first(k);
    let earliest = if witness.is_some() { (0..=k).find_map(first) } else { None };
    LbResult { level: k, fired: witness.is_some(), witness, earliest }
}

fn infos(tree: &[Vec<Dmc>]) -> Vec<Vec<f64>> {
    tree.iter().map(|l| l.iter().map(|c| c.mutual_info(0.5)).collect()).collect()
}

pub fn check_nonalignment(w: &Dmc, v: &Dmc, k: usize) -> Result<LbResult> {
    check_nonalignment_with(w, v, k, Execution::default())
}

/// Fires when some branch of `v` carries strictly more information than the
/// same branch of `w`, which forces `|R(W) ∩ D(V)|` to grow linearly in `n`.
pub fn check_nonalignment_with(w: &Dmc, v: &Dmc, k: usize, exec: Execution) -> Result<LbResult> {
    let tw = synthesize_tree(w, k, exec)?;
    let tv = synthesize_tree(v, k, exec)?;
    Ok(lb_scan(&infos(&tw), &infos(&tv)))
}

/// Same test for a shared non-uniform input. Branch informations come from
/// the explicit joint of the synthesized inputs and outputs.
pub fn check_nonalignment_prior(w: &PriorDmc, v: &PriorDmc, k: usize, exec: Execution) -> Result<LbResult> {
    let infos = |pc: &PriorDmc| -> Result<Vec<Vec<f64>>> {
        Ok(synthesize_prior_tree(pc, k, exec)?
            .iter()
            .map(|l| l.iter().map(|c| c.mutual_info()).collect())
            .collect())
    };
    Ok(lb_scan(&infos(w)?, &infos(v)?))
}

pub fn check_alignment(w: &Dmc, v: &Dmc, k: usize) -> Result<UbResult> {
    check_alignment_with(w, v, k, Execution::default())
}

/// Pairs `W_b` with the counterpart of `V` synthesized along the complement
/// branch. When every pair has fidelities summing to at most one,
/// `R(W) ⊆ R(V)`.
pub fn check_alignment_with(w: &Dmc, v: &Dmc, k: usize, exec: Execution) -> Result<UbResult> {
    let zw: Vec<f64> = synthesize_level(w, k, exec)?.iter().map(Dmc::z).collect();
    let fv = cq_level_fidelities(&counterpart(v), k, exec)?;
    let last = zw.len() - 1;
    let margins: Vec<f64> = (0..zw.len()).map(|i| 1.0 - zw[i] - fv[last - i]).collect();
    let holds = margins.iter().all(|&m| m >= -UB_TOL);
    Ok(UbResult { level: k, holds, margins })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    /// `R(W) ⊆ R(V)` certified by the alignment test.
    AlignedRSubset,
    /// Containment up to `o(n)` exceptions, from a channel ordering.
    EssentiallyAligned,
    NotAligned,
    Inconclusive,
}

impl Outcome {
    pub fn tag(&self) -> &'static str {
        match self {
            Outcome::AlignedRSubset => "aligned",
            Outcome::EssentiallyAligned => "essentially-aligned",
            Outcome::NotAligned => "not-aligned",
            Outcome::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub outcome: Outcome,
    /// Set when the outcome comes from an ordering shortcut rather than the tests.
    pub ordering: Option<Ordering>,
    pub lb: Option<LbResult>,
    pub ub: Option<UbResult>,
}

impl Verdict {
    pub fn from_ordering(ordering: Ordering) -> Self {
        Verdict { outcome: Outcome::EssentiallyAligned, ordering: Some(ordering), lb: None, ub: None }
    }

    /// Level that decided the outcome: the shallowest firing level for
    /// `NotAligned`, the alignment level otherwise.
    pub fn level(&self) -> Option<usize> {
        match self.outcome {
            Outcome::NotAligned => self.lb.as_ref().and_then(|l| l.earliest).map(|b| b.len()),
            Outcome::AlignedRSubset | Outcome::Inconclusive => self.ub.as_ref().map(|u| u.level),
            Outcome::EssentiallyAligned => None,
        }
    }

    pub fn witness(&self) -> Option<BranchLabel> {
        self.lb.as_ref().and_then(|l| l.earliest)
    }

    pub fn margin(&self) -> Option<f64> {
        self.ub.as_ref().map(UbResult::min_margin)
    }
}

pub fn classify(w: &Dmc, v: &Dmc, k_lb: usize, k_ub: usize) -> Result<Verdict> {
    classify_with(w, v, k_lb, k_ub, Execution::default())
}

/// Alignment wins if certified; otherwise nonalignment if it fires;
/// otherwise inconclusive. Both raw results are kept.
pub fn classify_with(w: &Dmc, v: &Dmc, k_lb: usize, k_ub: usize, exec: Execution) -> Result<Verdict> {
    let ub = check_alignment_with(w, v, k_ub, exec)?;
    let lb = check_nonalignment_with(w, v, k_lb, exec)?;
    let outcome = if ub.holds {
        Outcome::AlignedRSubset
    } else if lb.fired {
        Outcome::NotAligned
    } else {
        Outcome::Inconclusive
    };
    Ok(Verdict { outcome, ordering: None, lb: Some(lb), ub: Some(ub) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(a: f64) -> Dmc {
        Dmc::bsc(a).unwrap()
    }

    fn bec(b: f64) -> Dmc {
        Dmc::bec(b).unwrap()
    }

    #[test]
    fn lb_examples() {
        let r = check_nonalignment(&bsc(0.1), &bec(0.4), 0).unwrap();
        assert!(r.fired);
        assert_eq!(r.witness, Some(BranchLabel::root()));
        assert!(!check_nonalignment(&bsc(0.1), &bec(0.6), 0).unwrap().fired);
        let w = Dmc::new(vec![(0.4, 0.1), (0.6, 0.9)]).unwrap();
        for k in 0..4 {
            assert!(!check_nonalignment(&w, &w, k).unwrap().fired);
        }
    }

    #[test]
    fn ub_examples() {
        let r = check_alignment(&bsc(0.1), &bec(0.7), 0).unwrap();
        assert!(r.holds);
        assert!((r.margins[0] - 0.1).abs() < 1e-12);
        for k in 0..3 {
            assert!(!check_alignment(&bsc(0.1), &bec(0.55), k).unwrap().holds);
        }
        assert!(check_alignment(&bsc(0.0), &bsc(0.3), 0).unwrap().holds);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&bsc(0.1), &bec(0.7), 0, 0).unwrap().outcome, Outcome::AlignedRSubset);
        let v = classify(&bsc(0.1), &bec(0.4), 0, 0).unwrap();
        assert_eq!(v.outcome, Outcome::NotAligned);
        assert_eq!(v.level(), Some(0));
        assert_eq!(classify(&bsc(0.1), &bec(0.55), 0, 0).unwrap().outcome, Outcome::Inconclusive);
    }
}
