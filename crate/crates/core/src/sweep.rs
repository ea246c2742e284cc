//! Grid sweeps, boundary bisection and the CSV / JSON record formats.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::alignment::{check_alignment_with, check_nonalignment_with, classify_with, Verdict};
use crate::broadcast::{bc_alignment_with, bc_channels, equal_capacity_beta};
use crate::channel::Dmc;
use crate::entropy::h_b;
use crate::exec::Execution;
use crate::polarize::{branch_intervals, check_epsilon, classify_interval, log2_exact, BranchLabel, Membership, Method};
use crate::quantum::{coherent_info, ent_needed_with, ent_zero_with, Family, PauliChannel};
use crate::wiretap::{key_need_bec_bsc_with, key_need_bsc_bec, KeyNeed};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "param1,param2,param3,verdict,level,witness,margin";
pub const BISECT_TOL: f64 = 1e-6;

/// Inclusive arithmetic range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Range {
    pub fn new(min: f64, max: f64, step: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && step.is_finite()) || step <= 0.0 || max < min {
            return Err(Error::Config(format!("empty or invalid range {min}..{max} step {step}")));
        }
        Ok(Range { min, max, step })
    }

    pub fn single(x: f64) -> Self {
        Range { min: x, max: x, step: 1.0 }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| (self.min + i as f64 * self.step).min(self.max)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    pub params: [Option<f64>; 3],
    pub verdict: String,
    pub level: Option<usize>,
    pub witness: Option<String>,
    pub margin: Option<f64>,
}

impl RegionRecord {
    fn from_verdict(params: [Option<f64>; 3], v: &Verdict) -> Self {
        RegionRecord {
            params,
            verdict: v.outcome.tag().to_string(),
            level: v.level(),
            witness: v.witness().map(|b| b.to_string()),
            margin: v.margin(),
        }
    }
}

fn cmp_params(a: &[Option<f64>; 3], b: &[Option<f64>; 3]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = match (x, y) {
            (None, None) => std::cmp::Ordering::Equal,
            (None, Some(_)) => std::cmp::Ordering::Less,
            (Some(_), None) => std::cmp::Ordering::Greater,
            (Some(x), Some(y)) => x.total_cmp(y),
        };
        if o.is_ne() {
            return o;
        }
    }
    std::cmp::Ordering::Equal
}

pub fn sort_records(records: &mut [RegionRecord]) {
    records.sort_by(|a, b| cmp_params(&a.params, &b.params));
}

/// Twelve significant digits, printed in the shortest form that parses back
/// to the rounded value.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

pub fn to_csv(records: &[RegionRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let opt = |x: Option<f64>| x.map(format_float).unwrap_or_default();
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            opt(r.params[0]),
            opt(r.params[1]),
            opt(r.params[2]),
            r.verdict,
            r.level.map(|l| l.to_string()).unwrap_or_default(),
            r.witness.as_deref().unwrap_or(""),
            opt(r.margin),
        );
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<RegionRecord>> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Config("missing or wrong CSV header".into()));
    }
    let float = |s: &str, line: usize| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse().map(Some).map_err(|_| Error::Config(format!("line {line}: bad number {s:?}")))
        }
    };
    lines
        .enumerate()
        .map(|(i, l)| {
            let line = i + 2;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Config(format!("line {line}: expected 7 fields")));
            }
            Ok(RegionRecord {
                params: [float(f[0], line)?, float(f[1], line)?, float(f[2], line)?],
                verdict: f[3].to_string(),
                level: if f[4].is_empty() {
                    None
                } else {
                    Some(f[4].parse().map_err(|_| Error::Config(format!("line {line}: bad level")))?)
                },
                witness: (!f[5].is_empty()).then(|| f[5].to_string()),
                margin: float(f[6], line)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub version: String,
    pub config: serde_json::Value,
    pub caveat: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub records: Vec<RegionRecord>,
}

impl Report {
    pub fn new(config: serde_json::Value, caveat: Option<&str>, records: Vec<RegionRecord>) -> Self {
        Report {
            meta: Meta {
                version: env!("CARGO_PKG_VERSION").to_string(),
                config,
                caveat: caveat.map(str::to_string),
            },
            records,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("bad JSON report: {e}")))
    }
}

fn grid2(a: &Range, b: &Range) -> Vec<(f64, f64)> {
    let bs = b.values();
    a.values().into_iter().flat_map(|x| bs.iter().map(move |&y| (x, y))).collect()
}

fn run_grid<F>(points: &[(f64, f64)], exec: Execution, f: F) -> Result<Vec<RegionRecord>>
where
    F: Fn(f64, f64) -> Result<RegionRecord> + Sync + Send,
{
    // Points run in parallel; each evaluation itself stays sequential.
    let mut out = exec.try_map(points, |&(x, y)| f(x, y))?;
    sort_records(&mut out);
    Ok(out)
}

/// `BSC(alpha)` against `BEC(beta)` over the grid.
pub fn alignment_region(alpha: &Range, beta: &Range, k_lb: usize, k_ub: usize, exec: Execution) -> Result<Vec<RegionRecord>> {
    run_grid(&grid2(alpha, beta), exec, |a, b| {
        let v = classify_with(&Dmc::bsc(a)?, &Dmc::bec(b)?, k_lb, k_ub, Execution::Sequential)?;
        Ok(RegionRecord::from_verdict([Some(a), Some(b), None], &v))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum WiretapKind {
    BscBec,
    BecBsc,
}

pub fn wiretap_region(kind: WiretapKind, alpha: &Range, beta: &Range, exec: Execution) -> Result<Vec<RegionRecord>> {
    run_grid(&grid2(alpha, beta), exec, |a, b| {
        let r = match kind {
            WiretapKind::BscBec => key_need_bsc_bec(a, b)?,
            WiretapKind::BecBsc => key_need_bec_bsc_with(a, b, Execution::Sequential)?,
        };
        let earliest = r.lb.as_ref().and_then(|l| l.earliest);
        Ok(RegionRecord {
            params: [Some(a), Some(b), None],
            verdict: r.need.tag().to_string(),
            level: earliest.map(|w| w.len()).or(r.margin.map(|_| 0)),
            witness: earliest.map(|w| w.to_string()),
            margin: r.margin,
        })
    })
}

pub fn broadcast_region(gamma: f64, alpha: &Range, beta: &Range, k_lb: usize, k_ub: usize, exec: Execution) -> Result<Vec<RegionRecord>> {
    run_grid(&grid2(alpha, beta), exec, |a, b| {
        let v = bc_alignment_with(a, b, gamma, k_ub, k_lb, Execution::Sequential)?;
        Ok(RegionRecord::from_verdict([Some(a), Some(b), Some(gamma)], &v))
    })
}

/// How a Pauli family is parameterized in sweeps and bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuantumRay {
    Depolarizing,
    /// Fixed `qx`; the free parameter is `qz`.
    Bb84 { qx: f64 },
    TwoPauli { qx: f64 },
}

impl QuantumRay {
    pub fn channel(&self, x: f64) -> Result<PauliChannel> {
        match *self {
            QuantumRay::Depolarizing => PauliChannel::depolarizing(x),
            QuantumRay::Bb84 { qx } => PauliChannel::bb84(qx, x),
            QuantumRay::TwoPauli { qx } => PauliChannel::two_pauli(qx, x),
        }
    }

    pub fn family(&self) -> Family {
        match self {
            QuantumRay::Depolarizing => Family::Depolarizing,
            QuantumRay::Bb84 { .. } => Family::Bb84,
            QuantumRay::TwoPauli { .. } => Family::TwoPauli,
        }
    }

    fn fixed(&self) -> Option<f64> {
        match *self {
            QuantumRay::Depolarizing => None,
            QuantumRay::Bb84 { qx } | QuantumRay::TwoPauli { qx } => Some(qx),
        }
    }
}

fn quantum_record(ray: QuantumRay, x: f64, k_lb: usize, k_ub: usize) -> Result<RegionRecord> {
    let p = ray.channel(x)?;
    let zero = ent_zero_with(&p, k_ub, Execution::Sequential)?;
    let margin = zero.margins.iter().copied().fold(f64::INFINITY, f64::min);
    let (verdict, level, witness) = if zero.holds {
        ("ent-zero", Some(k_ub), None)
    } else {
        let need = ent_needed_with(&p, k_lb, Execution::Sequential)?;
        if need.needed {
            ("ent-needed", need.earliest_level, need.witnesses[0].map(|b| b.to_string()))
        } else {
            ("inconclusive", None, None)
        }
    };
    let q = coherent_info(&p, ray.family())?;
    let params = match ray.fixed() {
        None => [Some(x), None, Some(q)],
        Some(qx) => [Some(qx), Some(x), Some(q)],
    };
    Ok(RegionRecord { params, verdict: verdict.into(), level, witness, margin: Some(margin) })
}

/// Depolarizing sweeps use `p` as `param1`; the two-parameter families use
/// `(qx, qz)`. `param3` carries the coherent information.
pub fn quantum_region(family: Family, first: &Range, second: Option<&Range>, k_lb: usize, k_ub: usize, exec: Execution) -> Result<Vec<RegionRecord>> {
    let points: Vec<(f64, f64)> = match (family, second) {
        (Family::Depolarizing, _) => first.values().into_iter().map(|p| (p, f64::NAN)).collect(),
        (_, Some(s)) => grid2(first, s),
        (_, None) => return Err(Error::Config("this family needs a qz range".into())),
    };
    run_grid(&points, exec, |a, b| {
        let ray = match family {
            Family::Depolarizing => QuantumRay::Depolarizing,
            Family::Bb84 => QuantumRay::Bb84 { qx: a },
            Family::TwoPauli => QuantumRay::TwoPauli { qx: a },
        };
        quantum_record(ray, if family == Family::Depolarizing { a } else { b }, k_lb, k_ub)
    })
}

/// One record per index: `(i, lo, hi)` bounds on the branch Bhattacharyya value.
pub fn polar_set_records(w: &Dmc, n: usize, epsilon: f64, method: Method, exec: Execution) -> Result<Vec<RegionRecord>> {
    check_epsilon(epsilon)?;
    let k = log2_exact(n)?;
    let iv = branch_intervals(w, k, method, exec)?;
    Ok(iv
        .iter()
        .enumerate()
        .map(|(i, z)| RegionRecord {
            params: [Some((i + 1) as f64), Some(z.lo), Some(z.hi)],
            verdict: match classify_interval(z, epsilon) {
                Membership::Good => "good",
                Membership::Bad => "bad",
                Membership::Unknown => "undecided",
            }
            .into(),
            level: Some(k),
            witness: Some(BranchLabel::from_index(i, k).expect("depth checked").to_string()),
            margin: None,
        })
        .collect())
}

/// A region boundary along one free parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Curve {
    /// Alignment of `BSC(alpha)` with `BEC(beta)`, along `beta`.
    AlignmentUb { alpha: f64, level: usize },
    /// Nonalignment of `BSC(alpha)` with `BEC(beta)`, along `beta`.
    AlignmentLb { alpha: f64, level: usize },
    /// No key needed for the BSC/BEC wiretap pair, along `beta`.
    WiretapBscBec { alpha: f64 },
    /// Key needed for the BEC/BSC wiretap pair, along `beta`.
    WiretapBecBsc { alpha: f64 },
    BroadcastUb { alpha: f64, gamma: f64, level: usize },
    BroadcastLb { alpha: f64, gamma: f64, level: usize },
    /// Equal capacities of the preprocessed broadcast channels, along `beta`.
    EqualCapacity { alpha: f64, gamma: f64 },
    Eub { ray: QuantumRay, level: usize },
    Elb { ray: QuantumRay, level: usize },
    CoherentInfo { ray: QuantumRay },
}

impl Curve {
    pub fn name(&self) -> String {
        match self {
            Curve::AlignmentUb { level, .. } => format!("ub-level{level}"),
            Curve::AlignmentLb { level, .. } => format!("lb-level{level}"),
            Curve::WiretapBscBec { .. } => "wiretap-bsc-bec".into(),
            Curve::WiretapBecBsc { .. } => "wiretap-bec-bsc".into(),
            Curve::BroadcastUb { level, .. } => format!("bc-ub-level{level}"),
            Curve::BroadcastLb { level, .. } => format!("bc-lb-level{level}"),
            Curve::EqualCapacity { .. } => "equal-capacity".into(),
            Curve::Eub { level, .. } => format!("eub-level{level}"),
            Curve::Elb { level, .. } => format!("elb-level{level}"),
            Curve::CoherentInfo { .. } => "coherent-info".into(),
        }
    }

    /// Default search bracket for the free parameter.
    pub fn bracket(&self) -> (f64, f64) {
        match *self {
            Curve::AlignmentUb { .. } | Curve::AlignmentLb { .. } => (0.0, 1.0),
            Curve::BroadcastUb { .. } | Curve::BroadcastLb { .. } | Curve::EqualCapacity { .. } => (0.0, 1.0),
            Curve::WiretapBscBec { alpha } => (4.0 * alpha * (1.0 - alpha), 1.0),
            // the level-3 certificate only covers a thin band above the
            // more-capable threshold, so stay close to it
            Curve::WiretapBecBsc { alpha } => {
                let h = h_b(alpha);
                (4.0 * alpha * (1.0 - alpha), h + 0.05 * (1.0 - h))
            }
            Curve::Eub { .. } | Curve::Elb { .. } | Curve::CoherentInfo { .. } => (0.0, 0.5),
        }
    }

    pub fn fixed_param(&self) -> Option<f64> {
        match *self {
            Curve::AlignmentUb { alpha, .. }
            | Curve::AlignmentLb { alpha, .. }
            | Curve::WiretapBscBec { alpha }
            | Curve::WiretapBecBsc { alpha }
            | Curve::BroadcastUb { alpha, .. }
            | Curve::BroadcastLb { alpha, .. }
            | Curve::EqualCapacity { alpha, .. } => Some(alpha),
            Curve::Eub { ray, .. } | Curve::Elb { ray, .. } | Curve::CoherentInfo { ray } => ray.fixed(),
        }
    }

    /// Whether the point `x` on the ray lies inside the region.
    pub fn inside(&self, x: f64) -> Result<bool> {
        let seq = Execution::Sequential;
        match *self {
            Curve::AlignmentUb { alpha, level } => Ok(check_alignment_with(&Dmc::bsc(alpha)?, &Dmc::bec(x)?, level, seq)?.holds),
            Curve::AlignmentLb { alpha, level } => Ok(check_nonalignment_with(&Dmc::bsc(alpha)?, &Dmc::bec(x)?, level, seq)?.fired),
            Curve::WiretapBscBec { alpha } => Ok(key_need_bsc_bec(alpha, x)?.need == KeyNeed::NoKeyNeeded),
            Curve::WiretapBecBsc { alpha } => Ok(key_need_bec_bsc_with(alpha, x, seq)?.need == KeyNeed::KeyNeeded),
            Curve::BroadcastUb { alpha, gamma, level } => {
                let (w, v) = bc_channels(alpha, x, gamma)?;
                Ok(check_alignment_with(&w, &v, level, seq)?.holds)
            }
            Curve::BroadcastLb { alpha, gamma, level } => {
                let (w, v) = bc_channels(alpha, x, gamma)?;
                Ok(check_nonalignment_with(&w, &v, level, seq)?.fired)
            }
            Curve::EqualCapacity { alpha, gamma } => Ok(x <= equal_capacity_beta(alpha, gamma)?),
            Curve::Eub { ray, level } => Ok(ent_zero_with(&ray.channel(x)?, level, seq)?.holds),
            Curve::Elb { ray, level } => Ok(ent_needed_with(&ray.channel(x)?, level, seq)?.needed),
            Curve::CoherentInfo { ray } => Ok(coherent_info(&ray.channel(x)?, ray.family())? >= 0.0),
        }
    }
}

/// Boundary between the two verdicts along `[lo, hi]`, assuming the verdict
/// changes once. Errors when the endpoints agree.
pub fn bisect<F: Fn(f64) -> Result<bool>>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let at_lo = f(lo)?;
    let at_hi = f(hi)?;
    if at_lo == at_hi {
        return Err(Error::NoBoundary(format!("both ends of [{lo}, {hi}] give {at_lo}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if f(mid)? == at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

pub fn curve_threshold(curve: &Curve, bracket: Option<(f64, f64)>, tol: f64) -> Result<f64> {
    let (lo, hi) = bracket.unwrap_or_else(|| curve.bracket());
    bisect(|x| curve.inside(x), lo, hi, tol)
}

pub fn threshold_record(curve: &Curve, x: f64) -> RegionRecord {
    let level = match *curve {
        Curve::AlignmentUb { level, .. }
        | Curve::AlignmentLb { level, .. }
        | Curve::BroadcastUb { level, .. }
        | Curve::BroadcastLb { level, .. }
        | Curve::Eub { level, .. }
        | Curve::Elb { level, .. } => Some(level),
        _ => None,
    };
    let gamma = match *curve {
        Curve::BroadcastUb { gamma, .. } | Curve::BroadcastLb { gamma, .. } | Curve::EqualCapacity { gamma, .. } => Some(gamma),
        _ => None,
    };
    RegionRecord {
        params: [curve.fixed_param(), Some(x), gamma],
        verdict: curve.name(),
        level,
        witness: None,
        margin: None,
    }
}
