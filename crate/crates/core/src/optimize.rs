//! Bounded scalar maximization: a uniform grid to locate the best cell, then
//! golden-section refinement inside it. Ties go to the smaller argument.

const GRID_STEP: f64 = 1e-3;
const ARG_TOL: f64 = 1e-10;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Max1 {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Max2 {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize;
    (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
}

/// Golden-section search for a maximum inside `[a, b]`.
pub fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> Max1 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    Max1 { x, value: f(x) }
}

pub fn maximize<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Max1 {
    maximize_with_step(f, lo, hi, GRID_STEP)
}

pub fn maximize_with_step<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, step: f64) -> Max1 {
    let xs = grid(lo, hi, step);
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut best = 0;
    for (i, &v) in vals.iter().enumerate() {
        if v > vals[best] {
            best = i;
        }
    }
    let grid_best = Max1 { x: xs[best], value: vals[best] };
    let a = xs[best.saturating_sub(1)];
    let b = xs[(best + 1).min(xs.len() - 1)];
    let refined = golden_max(f, a, b, ARG_TOL);
    if refined.value > grid_best.value || (refined.value == grid_best.value && refined.x < grid_best.x) {
        refined
    } else {
        grid_best
    }
}

/// Maximizes over the rectangle: a coarse grid picks the starting cell, then
/// the outer variable `x` is refined by golden section around it, with the
/// inner variable maximized in full for every outer probe.
pub fn maximize_2d<F: Fn(f64, f64) -> f64>(f: &F, (xlo, xhi): (f64, f64), (ylo, yhi): (f64, f64)) -> Max2 {
    const COARSE: usize = 200;
    let xs: Vec<f64> = (0..=COARSE).map(|i| xlo + (xhi - xlo) * i as f64 / COARSE as f64).collect();
    let ys: Vec<f64> = (0..=COARSE).map(|j| ylo + (yhi - ylo) * j as f64 / COARSE as f64).collect();
    let mut best = (0, 0, f64::NEG_INFINITY);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let v = f(x, y);
            if v > best.2 {
                best = (i, j, v);
            }
        }
    }
    let inner = |x: f64| maximize(&|y| f(x, y), ylo, yhi);
    let a = xs[best.0.saturating_sub(1)];
    let b = xs[(best.0 + 1).min(COARSE)];
    let outer = golden_max(&|x| inner(x).value, a, b, ARG_TOL);
    let y = inner(outer.x);
    let refined = Max2 { x: outer.x, y: y.x, value: y.value };
    let coarse = Max2 { x: xs[best.0], y: ys[best.1], value: best.2 };
    let at_coarse_x = inner(coarse.x);
    let mut out = Max2 { x: coarse.x, y: at_coarse_x.x, value: at_coarse_x.value };
    if refined.value > out.value {
        out = refined;
    }
    out
}
