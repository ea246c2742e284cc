//! Qubit Pauli channels with their induced amplitude and phase channels. The
//! level-k tests bound how many indices need preshared entanglement.
//!
//! The phase channel's two output states are diagonal in the Bell basis, so it
//! is exactly the classical channel `x -> (u, v xor x)` with probability `p_uv`.

use serde::{Deserialize, Serialize};

use crate::channel::{canonicalize, Dmc};
use crate::entropy::{entropy, h_b};
use crate::exec::Execution;
use crate::polarize::{branch_intervals, check_epsilon, classify_interval, log2_exact, synthesize_tree, BranchLabel, Membership, Method};
use crate::{check_range, Error, Result};

pub const ELB_MARGIN: f64 = 1e-9;
pub const EUB_TOL: f64 = 1e-12;

/// Results of the entanglement-need test only cover the six Pauli-frame
/// relabelings, not every amplitude basis.
pub const BASIS_CAVEAT: &str = "amplitude-basis quantifier restricted to the six Pauli-frame relabelings";

/// `probs[u][v]` is the weight of `X^u Z^v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PauliChannel {
    probs: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Depolarizing,
    Bb84,
    TwoPauli,
}

impl PauliChannel {
    /// Weights of `I`, `X`, `Z`, `Y`.
    pub fn new(p00: f64, p10: f64, p01: f64, p11: f64) -> Result<Self> {
        let all = [p00, p10, p01, p11];
        if all.iter().any(|&p| !(p.is_finite() && p >= 0.0)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidChannel(format!("Pauli weights {all:?} are not a distribution")));
        }
        Ok(PauliChannel { probs: [[p00, p01], [p10, p11]] })
    }

    pub fn depolarizing(p: f64) -> Result<Self> {
        check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        Self::new(1.0 - p, p / 3.0, p / 3.0, p / 3.0)
    }

    /// Independent bit flips with probability `qx` and phase flips with `qz`.
    pub fn bb84(qx: f64, qz: f64) -> Result<Self> {
        check_range("qx", qx, 0.0, 0.5, "[0, 1/2]")?;
        check_range("qz", qz, 0.0, 0.5, "[0, 1/2]")?;
        Self::new((1.0 - qx) * (1.0 - qz), qx * (1.0 - qz), qz * (1.0 - qx), qx * qz)
    }

    pub fn two_pauli(qx: f64, qz: f64) -> Result<Self> {
        check_range("qx", qx, 0.0, 0.5, "[0, 1/2]")?;
        check_range("qz", qz, 0.0, 0.5, "[0, 1/2]")?;
        Self::new(1.0 - qx - qz, qx, qz, 0.0)
    }

    pub fn prob(&self, u: usize, v: usize) -> f64 {
        self.probs[u][v]
    }

    /// Weights of `I`, `X`, `Z`, `Y`.
    pub fn weights(&self) -> [f64; 4] {
        [self.probs[0][0], self.probs[1][0], self.probs[0][1], self.probs[1][1]]
    }

    /// The six channels obtained by permuting which error is called `X`, `Z` and `Y`.
    pub fn frames(&self) -> [PauliChannel; 6] {
        let [i, x, z, y] = self.weights();
        [[x, z, y], [x, y, z], [z, x, y], [z, y, x], [y, x, z], [y, z, x]]
            .map(|[a, b, c]| PauliChannel { probs: [[i, b], [a, c]] })
    }
}

/// `(amplitude, phase)`.
pub fn induced_channels(p: &PauliChannel) -> (Dmc, Dmc) {
    let flip = p.probs[1][0] + p.probs[1][1];
    let amplitude = canonicalize(&Dmc::from_raw(vec![(1.0 - flip, flip), (flip, 1.0 - flip)]));
    let mut raw = Vec::with_capacity(4);
    for u in 0..2 {
        for s in 0..2 {
            raw.push((p.probs[u][s], p.probs[u][s ^ 1]));
        }
    }
    (amplitude, canonicalize(&Dmc::from_raw(raw)))
}

fn family_of(p: &PauliChannel) -> Vec<Family> {
    let [i, x, z, y] = p.weights();
    let tol = 1e-12;
    let mut out = Vec::new();
    if (x - z).abs() <= tol && (x - y).abs() <= tol {
        out.push(Family::Depolarizing);
    }
    let (qx, qz) = (x + y, z + y);
    if qx <= 0.5 + tol && qz <= 0.5 + tol && (y - qx * qz).abs() <= tol && (i - (1.0 - qx) * (1.0 - qz)).abs() <= tol {
        out.push(Family::Bb84);
    }
    if y <= tol && x <= 0.5 + tol && z <= 0.5 + tol {
        out.push(Family::TwoPauli);
    }
    out
}

/// Channel coherent information of the named family.
pub fn coherent_info(p: &PauliChannel, family: Family) -> Result<f64> {
    if !family_of(p).contains(&family) {
        return Err(Error::FamilyMismatch(format!("{:?} is not a {family:?} channel", p.weights())));
    }
    let [i, x, z, y] = p.weights();
    Ok(match family {
        Family::Depolarizing => 1.0 - entropy(&[i, x, z, y]),
        Family::Bb84 => 1.0 - h_b(x + y) - h_b(z + y),
        Family::TwoPauli => 1.0 - entropy(&[i, x, z]),
    })
}

type Tree = Vec<Vec<Dmc>>;

/// Both channels at depth `k`, in level order.
fn levels(p: &PauliChannel, k: usize, exec: Execution) -> Result<(Tree, Tree)> {
    let (a, ph) = induced_channels(p);
    Ok((synthesize_tree(&a, k, exec)?, synthesize_tree(&ph, k, exec)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntZeroResult {
    pub holds: bool,
    /// `1 - F(A_b) - F(P_{b complement})` per branch.
    pub margins: Vec<f64>,
}

pub fn ent_zero(p: &PauliChannel, k: usize) -> Result<bool> {
    Ok(ent_zero_with(p, k, Execution::default())?.holds)
}

/// Every amplitude branch paired with the complementary phase branch has
/// fidelities summing to at most one.
pub fn ent_zero_with(p: &PauliChannel, k: usize, exec: Execution) -> Result<EntZeroResult> {
    let (ta, tp) = levels(p, k, exec)?;
    let (a, ph) = (&ta[k], &tp[k]);
    let last = a.len() - 1;
    let margins: Vec<f64> = (0..a.len()).map(|i| 1.0 - a[i].z() - ph[last - i].z()).collect();
    Ok(EntZeroResult { holds: margins.iter().all(|&m| m >= -EUB_TOL), margins })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntNeededResult {
    pub needed: bool,
    /// Per frame, the first branch with `I(A_b) + I(P_{b complement}) <= 1 - margin`.
    pub witnesses: Vec<Option<BranchLabel>>,
    /// Shallowest level at which every frame already has a witness.
    pub earliest_level: Option<usize>,
    pub caveat: &'static str,
}

pub fn ent_needed(p: &PauliChannel, k: usize) -> Result<bool> {
    Ok(ent_needed_with(p, k, Execution::default())?.needed)
}

pub fn ent_needed_with(p: &PauliChannel, k: usize, exec: Execution) -> Result<EntNeededResult> {
    let frames = p.frames();
    let per_frame = exec.try_map(&frames, |f| -> Result<Vec<Option<BranchLabel>>> {
        let (ta, tp) = levels(f, k, exec)?;
        Ok((0..=k)
            .map(|l| {
                let (a, ph) = (&ta[l], &tp[l]);
                let last = a.len() - 1;
                (0..a.len())
                    .find(|&i| a[i].mutual_info(0.5) + ph[last - i].mutual_info(0.5) <= 1.0 - ELB_MARGIN)
                    .map(|i| BranchLabel::from_index(i, l).expect("level within cap"))
            })
            .collect())
    })?;
    let earliest_level = (0..=k).find(|&l| per_frame.iter().all(|w| w[l].is_some()));
    let witnesses: Vec<Option<BranchLabel>> = per_frame.iter().map(|w| w[k]).collect();
    Ok(EntNeededResult {
        needed: witnesses.iter().all(Option::is_some),
        witnesses,
        earliest_level,
        caveat: BASIS_CAVEAT,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntanglementSets {
    /// Good in both bases.
    pub q_set: Vec<usize>,
    /// Bad amplitude, good phase.
    pub a_set: Vec<usize>,
    /// Good amplitude, bad phase.
    pub p_set: Vec<usize>,
    /// Bad in both bases: needs preshared entanglement.
    pub e_set: Vec<usize>,
    pub undecided: Vec<usize>,
    pub n: usize,
    pub epsilon: f64,
}

/// Index `i` pairs amplitude branch `b(i-1)` with phase branch `b(i-1)` complemented.
pub fn entanglement_sets(p: &PauliChannel, n: usize, epsilon: f64, method: Method, exec: Execution) -> Result<EntanglementSets> {
    check_epsilon(epsilon)?;
    let k = log2_exact(n)?;
    let (a, ph) = induced_channels(p);
    let ia = branch_intervals(&a, k, method, exec)?;
    let ip = branch_intervals(&ph, k, method, exec)?;
    let mut s = EntanglementSets {
        q_set: vec![],
        a_set: vec![],
        p_set: vec![],
        e_set: vec![],
        undecided: vec![],
        n,
        epsilon,
    };
    for i in 0..n {
        let ma = classify_interval(&ia[i], epsilon);
        let mp = classify_interval(&ip[n - 1 - i], epsilon);
        let set = match (ma, mp) {
            (Membership::Good, Membership::Good) => &mut s.q_set,
            (Membership::Bad, Membership::Good) => &mut s.a_set,
            (Membership::Good, Membership::Bad) => &mut s.p_set,
            (Membership::Bad, Membership::Bad) => &mut s.e_set,
            _ => &mut s.undecided,
        };
        set.push(i + 1);
    }
    Ok(s)
}
