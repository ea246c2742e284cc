//! The quantum counterpart of a classical binary-input channel.
//!
//! Output symbol `y` with `q_y = (W(y|0) + W(y|1)) / 2 > 0` contributes a flag
//! of weight `q_y` holding one of two pure states with real overlap
//! `(W(y|0) - W(y|1)) / (W(y|0) + W(y|1))`. The fidelity of the result is the
//! total variation distance of `W`.

use crate::channel::{canonicalize, Dmc};
use crate::cq::{embed_classical, Component, CqChannel, OverlapTable};
use crate::{check_range, Result};

pub fn counterpart(w: &Dmc) -> CqChannel {
    let c = canonicalize(w);
    let mut overlaps = Vec::with_capacity(c.len());
    let (mut r0, mut r1) = (Vec::new(), Vec::new());
    for (y, &(a, b)) in c.outputs().iter().enumerate() {
        let s = a + b;
        overlaps.push(((a - b) / s).clamp(-1.0, 1.0));
        let base = 2 * y as u16;
        r0.push(Component { weight: 0.5 * s, flag: y as u32, pure: vec![base] });
        r1.push(Component { weight: 0.5 * s, flag: y as u32, pure: vec![base + 1] });
    }
    CqChannel::from_parts(OverlapTable::from_pair_overlaps(&overlaps), r0, r1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CounterpartKind {
    Bec(f64),
    Bsc(f64),
    /// `BEC(beta)` after `BSC(alpha)`.
    BecBsc { alpha: f64, beta: f64 },
}

/// Small hand-built counterparts for the three standard families.
pub fn counterpart_closed_form(kind: CounterpartKind) -> Result<CqChannel> {
    match kind {
        CounterpartKind::Bec(beta) => {
            check_range("beta", beta, 0.0, 1.0, "[0, 1]")?;
            Ok(embed_classical(&Dmc::bec(1.0 - beta)?))
        }
        CounterpartKind::Bsc(alpha) => {
            check_range("alpha", alpha, 0.0, 0.5, "[0, 1/2]")?;
            CqChannel::pure_pair(1.0 - 2.0 * alpha)
        }
        CounterpartKind::BecBsc { alpha, beta } => {
            check_range("alpha", alpha, 0.0, 0.5, "[0, 1/2]")?;
            check_range("beta", beta, 0.0, 1.0, "[0, 1]")?;
            // Base symbols: theta_0, theta_1, the orthogonal pair 0~, 1~, and a unit vector.
            let c = 1.0 - 2.0 * alpha;
            let table = OverlapTable::new(vec![
                vec![1.0, c, 0.0, 0.0, 0.0],
                vec![c, 1.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0, 0.0],
                vec![0.0, 0.0, 0.0, 1.0, 0.0],
                vec![0.0, 0.0, 0.0, 0.0, 1.0],
            ])?;
            let state = |x: u16| {
                vec![
                    Component { weight: 1.0 - beta, flag: 0, pure: vec![x, 4] },
                    Component { weight: beta, flag: 1, pure: vec![x, 2 + x] },
                ]
            };
            Ok(CqChannel::from_parts(table, state(0), state(1)))
        }
    }
}
