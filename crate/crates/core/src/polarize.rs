//! Channel splitting, tree synthesis and polarized sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{canonicalize_capped, Dmc, PriorDmc};
use crate::exec::Execution;
use crate::{check_depth, check_range, Error, Result, DEPTH_CAP};

/// Guard on the number of symbols produced by one split before merging.
const RAW_ALPHABET_CAP: usize = 1 << 23;

/// A node of the polarization tree. Bits are read most significant first, so
/// the first bit selects the top-level split and, at a fixed depth, the
/// numeric value of the bits is the node's index in level order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BranchLabel {
    bits: u32,
    len: u8,
}

impl BranchLabel {
    pub fn root() -> Self {
        BranchLabel { bits: 0, len: 0 }
    }

    pub fn from_index(index: usize, len: usize) -> Result<Self> {
        check_depth(len)?;
        if len < usize::BITS as usize && index >> len != 0 {
            return Err(Error::ParameterOutOfRange {
                name: "index",
                value: index as f64,
                range: "[0, 2^len)",
            });
        }
        Ok(BranchLabel { bits: index as u32, len: len as u8 })
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        check_depth(bits.len())?;
        let mut b = BranchLabel::root();
        for &x in bits {
            b = b.child(x);
        }
        Ok(b)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn index(&self) -> usize {
        self.bits as usize
    }

    pub fn bit(&self, i: usize) -> u8 {
        ((self.bits >> (self.len as usize - 1 - i)) & 1) as u8
    }

    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.len()).map(move |i| self.bit(i))
    }

    /// Appends one bit. Panics past the depth cap.
    pub fn child(&self, bit: u8) -> Self {
        assert!((self.len as usize) < DEPTH_CAP, "branch label deeper than {DEPTH_CAP}");
        BranchLabel { bits: (self.bits << 1) | (bit & 1) as u32, len: self.len + 1 }
    }

    pub fn complement(&self) -> Self {
        let mask = if self.len == 0 { 0 } else { (1u32 << self.len) - 1 };
        BranchLabel { bits: !self.bits & mask, len: self.len }
    }
}

impl fmt::Display for BranchLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 0 {
            return f.write_str("root");
        }
        for b in self.bits() {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl FromStr for BranchLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "root" || s.is_empty() {
            return Ok(BranchLabel::root());
        }
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Config(format!("bad branch label {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        BranchLabel::from_bits(&bits)
    }
}

fn raw_guard(size: usize) -> Result<()> {
    if size > RAW_ALPHABET_CAP {
        Err(Error::AlphabetOverflow { size, cap: RAW_ALPHABET_CAP })
    } else {
        Ok(())
    }
}

/// One step of channel splitting: `bit = 0` gives the minus channel with
/// outputs `(y1, y2)`, `bit = 1` the plus channel with outputs `(y1, y2, u1)`.
pub fn split(w: &Dmc, bit: u8) -> Result<Dmc> {
    let o = w.outputs();
    let n = o.len();
    let mut raw = Vec::new();
    if bit == 0 {
        raw_guard(n * n)?;
        raw.reserve(n * n);
        for &(a1, b1) in o {
            for &(a2, b2) in o {
                raw.push((0.5 * (a1 * a2 + b1 * b2), 0.5 * (b1 * a2 + a1 * b2)));
            }
        }
    } else {
        raw_guard(2 * n * n)?;
        raw.reserve(2 * n * n);
        for &(a1, b1) in o {
            for &(a2, b2) in o {
                raw.push((0.5 * a1 * a2, 0.5 * b1 * b2));
                raw.push((0.5 * b1 * a2, 0.5 * a1 * b2));
            }
        }
    }
    canonicalize_capped(raw)
}

pub fn synthesize(w: &Dmc, b: &BranchLabel) -> Result<Dmc> {
    let mut cur = crate::channel::canonicalize(w);
    for bit in b.bits() {
        cur = split(&cur, bit)?;
    }
    Ok(cur)
}

/// All `2^k` channels at depth `k`, in level order.
pub fn synthesize_level(w: &Dmc, k: usize, exec: Execution) -> Result<Vec<Dmc>> {
    Ok(synthesize_tree(w, k, exec)?.pop().expect("tree has a root level"))
}

/// Every level from the root down to depth `k`.
pub fn synthesize_tree(w: &Dmc, k: usize, exec: Execution) -> Result<Vec<Vec<Dmc>>> {
    check_depth(k)?;
    let mut levels = vec![vec![crate::channel::canonicalize(w)]];
    for _ in 0..k {
        let cur = levels.last().expect("nonempty");
        let tasks: Vec<(usize, u8)> = (0..cur.len()).flat_map(|i| [(i, 0), (i, 1)]).collect();
        let next = exec.try_map(&tasks, |&(i, bit)| split(&cur[i], bit))?;
        levels.push(next);
    }
    Ok(levels)
}

/// Splitting under a non-uniform input. The two inputs are i.i.d. with
/// `P(x = 0) = p`, `u1 = x1 xor x2`, `u2 = x2`.
pub fn split_prior(pc: &PriorDmc, bit: u8) -> Result<PriorDmc> {
    let p = pc.p;
    let pi = [p, 1.0 - p];
    let o = pc.channel.outputs();
    let n = o.len();
    let wy = |y: (f64, f64), x: usize| if x == 0 { y.0 } else { y.1 };
    if bit == 0 {
        raw_guard(n * n)?;
        let pu = [p * p + (1.0 - p) * (1.0 - p), 2.0 * p * (1.0 - p)];
        let mut raw = Vec::with_capacity(n * n);
        for &y1 in o {
            for &y2 in o {
                let mut cond = [0.0; 2];
                for u1 in 0..2 {
                    cond[u1] = if pu[u1] > 0.0 {
                        (0..2)
                            .map(|u2| pi[u1 ^ u2] * pi[u2] * wy(y1, u1 ^ u2) * wy(y2, u2))
                            .sum::<f64>()
                            / pu[u1]
                    } else {
                        (0..2).map(|u2| 0.5 * wy(y1, u1 ^ u2) * wy(y2, u2)).sum::<f64>()
                    };
                }
                raw.push((cond[0], cond[1]));
            }
        }
        Ok(PriorDmc { p: pu[0], channel: canonicalize_capped(raw)? })
    } else {
        raw_guard(2 * n * n)?;
        let mut raw = Vec::with_capacity(2 * n * n);
        for &y1 in o {
            for &y2 in o {
                for u1 in 0..2 {
                    raw.push((
                        pi[u1] * wy(y1, u1) * wy(y2, 0),
                        pi[u1 ^ 1] * wy(y1, u1 ^ 1) * wy(y2, 1),
                    ));
                }
            }
        }
        Ok(PriorDmc { p, channel: canonicalize_capped(raw)? })
    }
}

pub fn synthesize_prior(pc: &PriorDmc, b: &BranchLabel) -> Result<PriorDmc> {
    let mut cur = PriorDmc { p: pc.p, channel: crate::channel::canonicalize(&pc.channel) };
    for bit in b.bits() {
        cur = split_prior(&cur, bit)?;
    }
    Ok(cur)
}

pub fn synthesize_prior_tree(pc: &PriorDmc, k: usize, exec: Execution) -> Result<Vec<Vec<PriorDmc>>> {
    check_depth(k)?;
    let mut levels = vec![vec![PriorDmc { p: pc.p, channel: crate::channel::canonicalize(&pc.channel) }]];
    for _ in 0..k {
        let cur = levels.last().expect("nonempty");
        let tasks: Vec<(usize, u8)> = (0..cur.len()).flat_map(|i| [(i, 0), (i, 1)]).collect();
        let next = exec.try_map(&tasks, |&(i, bit)| split_prior(&cur[i], bit))?;
        levels.push(next);
    }
    Ok(levels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ZInterval {
    pub fn contains(&self, z: f64, tol: f64) -> bool {
        z >= self.lo - tol && z <= self.hi + tol
    }
}

/// Sound interval for `Z(W_b)` given only `Z(W)`. Exact along all-ones paths,
/// and everywhere when the root is a BEC.
pub fn z_bounds(z_root: f64, b: &BranchLabel, bec_exact: bool) -> Result<ZInterval> {
    check_range("z_root", z_root, 0.0, 1.0, "[0, 1]")?;
    let (mut lo, mut hi) = (z_root, z_root);
    for bit in b.bits() {
        if bit == 1 {
            lo *= lo;
            hi *= hi;
        } else {
            if bec_exact {
                lo = 2.0 * lo - lo * lo;
            }
            hi = 2.0 * hi - hi * hi;
        }
    }
    Ok(ZInterval { lo, hi: hi.max(lo) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    Bounds,
}

/// Index sets over `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizedSets {
    pub d_set: Vec<usize>,
    pub r_set: Vec<usize>,
    pub undecided: Vec<usize>,
    pub n: usize,
    pub epsilon: f64,
}

impl PolarizedSets {
    /// Classify exact branch values; `values[i]` belongs to index `i + 1`.
    pub fn from_values(values: &[f64], epsilon: f64) -> Self {
        let intervals: Vec<ZInterval> = values.iter().map(|&z| ZInterval { lo: z, hi: z }).collect();
        Self::from_intervals(&intervals, epsilon)
    }

    pub fn from_intervals(intervals: &[ZInterval], epsilon: f64) -> Self {
        let mut s = PolarizedSets {
            d_set: Vec::new(),
            r_set: Vec::new(),
            undecided: Vec::new(),
            n: intervals.len(),
            epsilon,
        };
        for (i, iv) in intervals.iter().enumerate() {
            match classify_interval(iv, epsilon) {
                Membership::Good => s.d_set.push(i + 1),
                Membership::Bad => s.r_set.push(i + 1),
                Membership::Unknown => s.undecided.push(i + 1),
            }
        }
        s
    }

    pub fn in_d(&self, i: usize) -> bool {
        self.d_set.binary_search(&i).is_ok()
    }

    pub fn in_r(&self, i: usize) -> bool {
        self.r_set.binary_search(&i).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Membership {
    Good,
    Bad,
    Unknown,
}

/// `D` is checked first, so for `epsilon >= 1/2` overlapping cases go to `D`.
pub(crate) fn classify_interval(iv: &ZInterval, epsilon: f64) -> Membership {
    if iv.hi <= epsilon {
        Membership::Good
    } else if iv.lo >= 1.0 - epsilon {
        Membership::Bad
    } else {
        Membership::Unknown
    }
}

pub(crate) fn log2_exact(n: usize) -> Result<usize> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::Config(format!("block length {n} is not a power of two")));
    }
    let k = n.trailing_zeros() as usize;
    check_depth(k)?;
    Ok(k)
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange { name: "epsilon", value: epsilon, range: "(0, 1)" })
    }
}

/// Branch Bhattacharyya intervals for every index at block length `2^k`.
pub fn branch_intervals(w: &Dmc, k: usize, method: Method, exec: Execution) -> Result<Vec<ZInterval>> {
    match method {
        Method::Exact => Ok(synthesize_level(w, k, exec)?
            .iter()
            .map(|c| {
                let z = c.z();
                ZInterval { lo: z, hi: z }
            })
            .collect()),
        Method::Bounds => {
            check_depth(k)?;
            let z = w.z();
            let bec = w.as_bec().is_some();
            Ok(exec.map_range(1 << k, |i| {
                z_bounds(z, &BranchLabel { bits: i as u32, len: k as u8 }, bec).expect("z in range")
            }))
        }
    }
}

pub fn polarized_sets(w: &Dmc, n: usize, epsilon: f64, method: Method, exec: Execution) -> Result<PolarizedSets> {
    check_epsilon(epsilon)?;
    let k = log2_exact(n)?;
    Ok(PolarizedSets::from_intervals(&branch_intervals(w, k, method, exec)?, epsilon))
}
