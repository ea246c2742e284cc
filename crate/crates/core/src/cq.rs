//! Classical-quantum channels whose outputs are flagged mixtures of pure
//! states. Pure states are tensor products of base symbols, and only the
//! real overlap table of the base symbols is stored, never the vectors.

use std::collections::BTreeSet;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::channel::Dmc;
use crate::{Error, Result, COMPONENT_CAP};

const PSD_TOL: f64 = -1e-9;
const WEIGHT_TOL: f64 = 1e-12;
const RAW_COMPONENT_CAP: usize = 1 << 22;
const BLOCK_CAP: usize = 1 << 22;

/// Real symmetric table of inner products between base symbols.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapTable {
    n: usize,
    data: Vec<f64>,
}

impl OverlapTable {
    /// Checks symmetry, the unit diagonal and positive semidefiniteness.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || n > u16::MAX as usize + 1 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidChannel("overlap table must be square and nonempty".into()));
        }
        let data: Vec<f64> = rows.into_iter().flatten().collect();
        for i in 0..n {
            if (data[i * n + i] - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidChannel(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..i {
                if (data[i * n + j] - data[j * n + i]).abs() > 1e-12 || !data[i * n + j].is_finite() {
                    return Err(Error::InvalidChannel(format!("entries ({i},{j}) break symmetry")));
                }
            }
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &data));
        let min = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < PSD_TOL {
            return Err(Error::NonPsdGram(min));
        }
        Ok(OverlapTable { n, data })
    }

    /// Direct sum of 2x2 blocks `[[1, c], [c, 1]]`; PSD whenever `|c| <= 1`.
    pub(crate) fn from_pair_overlaps(cs: &[f64]) -> Self {
        let n = 2 * cs.len();
        let mut data = vec![0.0; n * n];
        for (y, &c) in cs.iter().enumerate() {
            let (i, j) = (2 * y, 2 * y + 1);
            data[i * n + i] = 1.0;
            data[j * n + j] = 1.0;
            data[i * n + j] = c;
            data[j * n + i] = c;
        }
        OverlapTable { n, data }
    }

    pub fn unit() -> Self {
        OverlapTable { n: 1, data: vec![1.0] }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: u16, j: u16) -> f64 {
        self.data[i as usize * self.n + j as usize]
    }

    /// Overlap of two tensor-product labels.
    pub fn overlap(&self, a: &[u16], b: &[u16]) -> f64 {
        let mut acc = 1.0;
        for (&x, &y) in a.iter().zip(b) {
            acc *= self.get(x, y);
            if acc == 0.0 {
                break;
            }
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub flag: u32,
    pub pure: Vec<u16>,
}

/// Mixture of pure states tagged by an orthogonal classical flag.
/// Components are kept sorted by `(flag, pure)` with duplicates merged.
#[derive(Debug, Clone, PartialEq)]
pub struct CqState {
    components: Vec<Component>,
}

impl CqState {
    pub fn new(components: Vec<Component>) -> Result<Self> {
        if components.iter().any(|c| !(c.weight.is_finite() && c.weight >= 0.0)) {
            return Err(Error::InvalidChannel("negative or non-finite component weight".into()));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::InvalidChannel(format!("component weights sum to {total}")));
        }
        let s = Self::normalized(components);
        if s.components.len() > COMPONENT_CAP {
            return Err(Error::ComponentOverflow { size: s.components.len(), cap: COMPONENT_CAP });
        }
        Ok(s)
    }

    fn normalized(mut components: Vec<Component>) -> Self {
        components.retain(|c| c.weight > 0.0);
        components.sort_by(|a, b| a.flag.cmp(&b.flag).then_with(|| a.pure.cmp(&b.pure)));
        let mut out: Vec<Component> = Vec::with_capacity(components.len());
        for c in components {
            match out.last_mut() {
                Some(last) if last.flag == c.flag && last.pure == c.pure => last.weight += c.weight,
                _ => out.push(c),
            }
        }
        CqState { components: out }
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    fn blocks(&self) -> impl Iterator<Item = (u32, &[Component])> {
        self.components
            .chunk_by(|a, b| a.flag == b.flag)
            .map(|chunk| (chunk[0].flag, chunk))
    }
}

/// `|| sqrt(rho_a) sqrt(rho_b) ||_1`. Within a flag block this is the nuclear
/// norm of the cross matrix `K_ij = sqrt(a_i b_j) <psi_i|phi_j>`, because
/// `rho_a = A A^T` and `rho_b = B B^T` give `|| sqrt(rho_a) sqrt(rho_b) ||_1 = || A^T B ||_1`.
pub fn fidelity(a: &CqState, b: &CqState, table: &OverlapTable) -> Result<f64> {
    let mut total = 0.0;
    let mut bi = b.blocks().peekable();
    for (flag, ca) in a.blocks() {
        while bi.peek().is_some_and(|(f, _)| *f < flag) {
            bi.next();
        }
        let Some(&(fb, cb)) = bi.peek() else { break };
        if fb != flag {
            continue;
        }
        total += block_fidelity(ca, cb, table)?;
    }
    Ok(total)
}

fn block_fidelity(ca: &[Component], cb: &[Component], table: &OverlapTable) -> Result<f64> {
    let (na, nb) = (ca.len(), cb.len());
    if na * nb > BLOCK_CAP {
        return Err(Error::ComponentOverflow { size: na * nb, cap: BLOCK_CAP });
    }
    let entry = |x: &Component, y: &Component| (x.weight * y.weight).sqrt() * table.overlap(&x.pure, &y.pure);
    if na == 1 && nb == 1 {
        return Ok(entry(&ca[0], &cb[0]).abs());
    }
    let k = DMatrix::from_fn(na, nb, |i, j| entry(&ca[i], &cb[j]));
    Ok(k.singular_values().iter().sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CqChannel {
    rho: [CqState; 2],
    table: Arc<OverlapTable>,
}

impl CqChannel {
    /// All pure labels must have the same number of tensor factors and refer
    /// to rows of `table`.
    pub fn new(table: OverlapTable, rho0: CqState, rho1: CqState) -> Result<Self> {
        let width = rho0.components.first().map(|c| c.pure.len());
        for c in rho0.components.iter().chain(&rho1.components) {
            if Some(c.pure.len()) != width {
                return Err(Error::InvalidChannel("pure labels have different lengths".into()));
            }
            if c.pure.iter().any(|&s| s as usize >= table.len()) {
                return Err(Error::InvalidChannel("pure label refers to a missing base symbol".into()));
            }
        }
        Ok(CqChannel { rho: [rho0, rho1], table: Arc::new(table) })
    }

    pub(crate) fn from_parts(table: OverlapTable, rho0: Vec<Component>, rho1: Vec<Component>) -> Self {
        CqChannel {
            rho: [CqState::normalized(rho0), CqState::normalized(rho1)],
            table: Arc::new(table),
        }
    }

    /// Two pure states with real overlap `c`.
    pub fn pure_pair(c: f64) -> Result<Self> {
        crate::check_range("overlap", c, -1.0, 1.0, "[-1, 1]")?;
        Ok(Self::from_parts(
            OverlapTable::from_pair_overlaps(&[c]),
            vec![Component { weight: 1.0, flag: 0, pure: vec![0] }],
            vec![Component { weight: 1.0, flag: 0, pure: vec![1] }],
        ))
    }

    pub fn rho(&self, x: usize) -> &CqState {
        &self.rho[x]
    }

    pub fn table(&self) -> &OverlapTable {
        &self.table
    }

    pub fn fidelity(&self) -> Result<f64> {
        fidelity(&self.rho[0], &self.rho[1], &self.table)
    }

    pub fn max_components(&self) -> usize {
        self.rho[0].len().max(self.rho[1].len())
    }
}

/// A classical channel as a cq channel: flag = output symbol, trivial pure part.
pub fn embed_classical(w: &Dmc) -> CqChannel {
    let comps = |x: usize| {
        w.outputs()
            .iter()
            .enumerate()
            .map(|(y, &(a, b))| Component { weight: if x == 0 { a } else { b }, flag: y as u32, pure: vec![0] })
            .collect()
    };
    CqChannel::from_parts(OverlapTable::unit(), comps(0), comps(1))
}

type RawKey = (u8, u32, u32);

/// One step of channel splitting for cq channels. The plus branch moves `u1`
/// into the flag; the minus branch mixes over `u2`.
///
/// Blocks whose flags differ only by the order of the two halves carry the
/// same conditional states up to swapping the tensor factors, so they are
/// folded onto the ordered flag. This changes no synthesized fidelity.
pub fn cq_split(ch: &CqChannel, bit: u8) -> Result<CqChannel> {
    let r = &ch.rho;
    let raw_size = 2 * r[0].len().max(r[1].len()).pow(2);
    if raw_size > RAW_COMPONENT_CAP {
        return Err(Error::ComponentOverflow { size: raw_size, cap: RAW_COMPONENT_CAP });
    }
    let build = |u: usize| -> Vec<(RawKey, f64, Vec<u16>)> {
        let mut out = Vec::new();
        for s in 0..2 {
            // bit 0: u = u1, s = u2; bit 1: u = u2, s = u1.
            let (first, second, tag) = if bit == 0 { (u ^ s, s, 0u8) } else { (s ^ u, u, s as u8) };
            for x in &r[first].components {
                for y in &r[second].components {
                    let w = 0.5 * x.weight * y.weight;
                    let foldable = bit == 0 || s == 0;
                    let (p, q) = if foldable && x.flag > y.flag { (y, x) } else { (x, y) };
                    let mut pure = Vec::with_capacity(p.pure.len() + q.pure.len());
                    pure.extend_from_slice(&p.pure);
                    pure.extend_from_slice(&q.pure);
                    out.push(((tag, p.flag, q.flag), w, pure));
                }
            }
        }
        out
    };
    let raw = [build(0), build(1)];
    let keys: BTreeSet<RawKey> = raw.iter().flatten().map(|(k, _, _)| *k).collect();
    let keys: Vec<RawKey> = keys.into_iter().collect();
    let id = |k: &RawKey| keys.binary_search(k).expect("key interned") as u32;
    let states = raw.map(|list| {
        CqState::normalized(
            list.into_iter()
                .map(|(k, weight, pure)| Component { weight, flag: id(&k), pure })
                .collect(),
        )
    });
    for s in &states {
        if s.len() > COMPONENT_CAP {
            return Err(Error::ComponentOverflow { size: s.len(), cap: COMPONENT_CAP });
        }
    }
    let [r0, r1] = states;
    Ok(CqChannel { rho: [r0, r1], table: ch.table.clone() })
}

pub fn cq_synthesize(ch: &CqChannel, b: &crate::polarize::BranchLabel) -> Result<CqChannel> {
    let mut cur = ch.clone();
    for bit in b.bits() {
        cur = cq_split(&cur, bit)?;
    }
    Ok(cur)
}

/// Fidelities of every node at depth `k`, in level order.
pub fn cq_level_fidelities(ch: &CqChannel, k: usize, exec: crate::exec::Execution) -> Result<Vec<f64>> {
    crate::check_depth(k)?;
    let mut level = vec![ch.clone()];
    for _ in 0..k {
        let tasks: Vec<(usize, u8)> = (0..level.len()).flat_map(|i| [(i, 0), (i, 1)]).collect();
        level = exec.try_map(&tasks, |&(i, bit)| cq_split(&level[i], bit))?;
    }
    exec.try_map(&level, |c| c.fidelity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polarize::split;

    #[test]
    fn pure_pair_fidelity() {
        let ch = CqChannel::pure_pair(-0.3).unwrap();
        assert!((ch.fidelity().unwrap() - 0.3).abs() < 1e-15);
        let p = cq_split(&ch, 1).unwrap();
        assert!((p.fidelity().unwrap() - 0.09).abs() < 1e-15);
    }

    #[test]
    fn classical_embedding() {
        let w = Dmc::new(vec![(0.5, 0.1), (0.2, 0.2), (0.3, 0.7)]).unwrap();
        let e = embed_classical(&w);
        assert!((e.fidelity().unwrap() - w.z()).abs() < 1e-12);
        for bit in 0..2 {
            let a = cq_split(&e, bit).unwrap().fidelity().unwrap();
            let b = split(&w, bit).unwrap().z();
            assert!((a - b).abs() < 1e-12, "{bit}: {a} vs {b}");
        }
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(matches!(
            OverlapTable::new(vec![vec![1.0, 0.9, 0.9], vec![0.9, 1.0, -0.9], vec![0.9, -0.9, 1.0]]),
            Err(Error::NonPsdGram(_))
        ));
        assert!(OverlapTable::new(vec![vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
        assert!(OverlapTable::new(vec![vec![0.9]]).is_err());
    }

    #[test]
    fn state_validation() {
        let c = |w, f| Component { weight: w, flag: f, pure: vec![0] };
        assert!(CqState::new(vec![c(0.5, 0), c(0.4, 1)]).is_err());
        let s = CqState::new(vec![c(0.5, 0), c(0.25, 1), c(0.25, 0)]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.components()[0].weight, 0.75);
    }
}
