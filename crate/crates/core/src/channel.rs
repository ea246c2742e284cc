//! Binary-input discrete memoryless channels.

use serde::{Deserialize, Serialize};

use crate::entropy::{h_b, xlog2x};
use crate::{check_range, Error, Result, ALPHABET_CAP};

const SUM_TOL: f64 = 1e-12;
const LR_MERGE_TOL: f64 = 1e-10;

/// A binary-input DMC stored as one `(W(y|0), W(y|1))` pair per output symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dmc {
    outputs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelKind {
    Bsc(f64),
    Bec(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scalars {
    pub z: f64,
    pub mutual_info: f64,
    pub delta: f64,
    pub h_x_given_y: f64,
}

impl Dmc {
    /// Validates the weights; the symbol order is kept as given.
    pub fn new(outputs: Vec<(f64, f64)>) -> Result<Self> {
        if outputs.is_empty() {
            return Err(Error::InvalidChannel("empty output alphabet".into()));
        }
        let (mut s0, mut s1) = (0.0, 0.0);
        for &(a, b) in &outputs {
            if !(a.is_finite() && b.is_finite()) || a < 0.0 || b < 0.0 {
                return Err(Error::InvalidChannel(format!("bad weight pair ({a}, {b})")));
            }
            s0 += a;
            s1 += b;
        }
        if (s0 - 1.0).abs() > SUM_TOL || (s1 - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidChannel(format!("rows sum to {s0} and {s1}")));
        }
        Ok(Dmc { outputs })
    }

    pub(crate) fn from_raw(outputs: Vec<(f64, f64)>) -> Self {
        Dmc { outputs }
    }

    pub fn bsc(alpha: f64) -> Result<Self> {
        check_range("alpha", alpha, 0.0, 0.5, "[0, 1/2]")?;
        Ok(Dmc { outputs: vec![(1.0 - alpha, alpha), (alpha, 1.0 - alpha)] })
    }

    pub fn bec(beta: f64) -> Result<Self> {
        check_range("beta", beta, 0.0, 1.0, "[0, 1]")?;
        Ok(Dmc { outputs: vec![(1.0 - beta, 0.0), (0.0, 1.0 - beta), (beta, beta)] })
    }

    pub fn outputs(&self) -> &[(f64, f64)] {
        &self.outputs
    }

    pub fn len(&self) -> usize {
        self.outputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outputs.is_empty()
    }

    /// Bhattacharyya parameter.
    pub fn z(&self) -> f64 {
        self.outputs.iter().map(|&(a, b)| (a * b).sqrt()).sum::<f64>().min(1.0)
    }

    /// Mutual information between input and output when `P(X = 0) = prior`.
    pub fn mutual_info(&self, prior: f64) -> f64 {
        let (p, r) = (prior, 1.0 - prior);
        let mut acc = 0.0;
        for &(a, b) in &self.outputs {
            let q = p * a + r * b;
            if q <= 0.0 {
                continue;
            }
            if a > 0.0 {
                acc += p * a * (a / q).log2();
            }
            if b > 0.0 {
                acc += r * b * (b / q).log2();
            }
        }
        acc.max(0.0)
    }

    /// Total variation distance between the two output distributions.
    pub fn delta(&self) -> f64 {
        0.5 * self.outputs.iter().map(|&(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// `H(X|Y)` at the given prior, computed directly from the joint.
    pub fn conditional_entropy(&self, prior: f64) -> f64 {
        let (p, r) = (prior, 1.0 - prior);
        let mut acc = 0.0;
        for &(a, b) in &self.outputs {
            let (j0, j1) = (p * a, r * b);
            acc += xlog2x(j0 + j1) - xlog2x(j0) - xlog2x(j1);
        }
        acc.max(0.0)
    }

    pub fn scalars(&self, prior: f64) -> Scalars {
        let mutual_info = self.mutual_info(prior);
        Scalars {
            z: self.z(),
            mutual_info,
            delta: self.delta(),
            h_x_given_y: (h_b(prior) - mutual_info).max(0.0),
        }
    }

    /// Returns the erasure probability if the canonical form of this channel is a BEC.
    pub fn as_bec(&self) -> Option<f64> {
        let c = canonicalize(self);
        let mut erasure = 0.0;
        let (mut good0, mut good1) = (0.0, 0.0);
        for &(a, b) in c.outputs() {
            if b == 0.0 {
                good0 += a;
            } else if a == 0.0 {
                good1 += b;
            } else if ((a / b).ln()).abs() <= LR_MERGE_TOL {
                erasure += 0.5 * (a + b);
            } else {
                return None;
            }
        }
        ((good0 - good1).abs() <= 1e-12).then_some(erasure.clamp(0.0, 1.0))
    }
}

pub fn make_channel(kind: ChannelKind) -> Result<Dmc> {
    match kind {
        ChannelKind::Bsc(a) => Dmc::bsc(a),
        ChannelKind::Bec(b) => Dmc::bec(b),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
enum LrClass {
    NegInf,
    Finite(f64),
    PosInf,
}

fn lr_class(a: f64, b: f64) -> LrClass {
    if b == 0.0 {
        LrClass::PosInf
    } else if a == 0.0 {
        LrClass::NegInf
    } else {
        LrClass::Finite(a.ln() - b.ln())
    }
}

fn class_rank(c: &LrClass) -> (u8, f64) {
    match *c {
        LrClass::NegInf => (0, 0.0),
        LrClass::Finite(x) => (1, x),
        LrClass::PosInf => (2, 0.0),
    }
}

/// Drops zero-mass symbols, sorts by log-likelihood ratio and merges symbols
/// whose ratios agree to within `1e-10`.
pub fn canonicalize(w: &Dmc) -> Dmc {
    let mut keyed: Vec<((u8, f64), (f64, f64))> = w
        .outputs
        .iter()
        .filter(|&&(a, b)| a + b > 0.0)
        .map(|&(a, b)| (class_rank(&lr_class(a, b)), (a, b)))
        .collect();
    keyed.sort_by(|x, y| {
        x.0 .0
            .cmp(&y.0 .0)
            .then(x.0 .1.total_cmp(&y.0 .1))
            .then(x.1 .0.total_cmp(&y.1 .0))
            .then(x.1 .1.total_cmp(&y.1 .1))
    });
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(keyed.len());
    let mut run_start: Option<(u8, f64)> = None;
    for (key, (a, b)) in keyed {
        let same = match run_start {
            Some((c, x)) => c == key.0 && (c != 1 || key.1 - x <= LR_MERGE_TOL),
            None => false,
        };
        if same {
            let last = out.last_mut().expect("run has a symbol");
            last.0 += a;
            last.1 += b;
        } else {
            out.push((a, b));
            run_start = Some(key);
        }
    }
    Dmc { outputs: out }
}

pub(crate) fn canonicalize_capped(raw: Vec<(f64, f64)>) -> Result<Dmc> {
    let c = canonicalize(&Dmc::from_raw(raw));
    if c.len() > ALPHABET_CAP {
        return Err(Error::AlphabetOverflow { size: c.len(), cap: ALPHABET_CAP });
    }
    Ok(c)
}

/// Row-stochastic 2x2 matrix `rows[u][x] = P(x|u)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    rows: [[f64; 2]; 2],
}

impl Preprocessor {
    pub fn new(rows: [[f64; 2]; 2]) -> Result<Self> {
        for row in &rows {
            if row.iter().any(|&v| !(0.0..=1.0).contains(&v)) || (row[0] + row[1] - 1.0).abs() > SUM_TOL {
                return Err(Error::InvalidChannel(format!("preprocessor row {row:?} is not a distribution")));
            }
        }
        Ok(Preprocessor { rows })
    }

    pub fn identity() -> Self {
        Preprocessor { rows: [[1.0, 0.0], [0.0, 1.0]] }
    }

    pub fn bsc(gamma: f64) -> Result<Self> {
        check_range("gamma", gamma, 0.0, 0.5, "[0, 1/2]")?;
        Ok(Preprocessor { rows: [[1.0 - gamma, gamma], [gamma, 1.0 - gamma]] })
    }

    /// `u = 0` sends `x = 1`; `u = 1` sends `x = 0` with probability `gamma`.
    pub fn z_channel(gamma: f64) -> Result<Self> {
        check_range("gamma", gamma, 0.0, 1.0, "[0, 1]")?;
        Ok(Preprocessor { rows: [[0.0, 1.0], [gamma, 1.0 - gamma]] })
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        self.rows
    }

    /// Distribution of the channel input when `P(u = 0) = prior_u`.
    pub fn push_prior(&self, prior_u: f64) -> f64 {
        prior_u * self.rows[0][0] + (1.0 - prior_u) * self.rows[1][0]
    }
}

/// Serial concatenation `u -> t -> w`, canonicalized.
pub fn compose(w: &Dmc, t: &Preprocessor) -> Dmc {
    let r = t.rows;
    let raw = w
        .outputs
        .iter()
        .map(|&(a, b)| (r[0][0] * a + r[0][1] * b, r[1][0] * a + r[1][1] * b))
        .collect();
    canonicalize(&Dmc::from_raw(raw))
}

/// A channel together with the probability of input 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorDmc {
    pub p: f64,
    pub channel: Dmc,
}

impl PriorDmc {
    pub fn new(p: f64, channel: Dmc) -> Result<Self> {
        check_range("p", p, 0.0, 1.0, "[0, 1]")?;
        Ok(PriorDmc { p, channel })
    }

    pub fn uniform(channel: Dmc) -> Self {
        PriorDmc { p: 0.5, channel }
    }

    /// `2 sqrt(p(1-p)) Z(W)`.
    pub fn generalized_bhatt(&self) -> f64 {
        2.0 * (self.p * (1.0 - self.p)).sqrt() * self.channel.z()
    }

    pub fn mutual_info(&self) -> f64 {
        self.channel.mutual_info(self.p)
    }

    pub fn conditional_entropy(&self) -> f64 {
        self.channel.conditional_entropy(self.p)
    }
}

pub fn generalized_bhatt(pc: &PriorDmc) -> f64 {
    pc.generalized_bhatt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ordering {
    Degraded,
    LessNoisy,
    MoreCapable,
    Incomparable,
}

impl Ordering {
    pub fn tag(&self) -> &'static str {
        match self {
            Ordering::Degraded => "degraded",
            Ordering::LessNoisy => "less-noisy",
            Ordering::MoreCapable => "more-capable",
            Ordering::Incomparable => "incomparable",
        }
    }
}

/// How `BEC(beta)` relates to `BSC(alpha)`.
pub fn bsc_bec_ordering(alpha: f64, beta: f64) -> Result<Ordering> {
    check_range("alpha", alpha, 0.0, 0.5, "[0, 1/2]")?;
    check_range("beta", beta, 0.0, 1.0, "[0, 1]")?;
    Ok(if beta <= 2.0 * alpha {
        Ordering::Degraded
    } else if beta <= 4.0 * alpha * (1.0 - alpha) {
        Ordering::LessNoisy
    } else if beta <= h_b(alpha) {
        Ordering::MoreCapable
    } else {
        Ordering::Incomparable
    })
}
