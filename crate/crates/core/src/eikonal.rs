//! First-order upwind fast marching for `|∇T| = ρ` on rectilinear grids.
//!
//! Node spacing may vary along each axis, which lets callers grade the mesh
//! towards regions where the metric density varies quickly.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{invalid, Result};

/// A tensor-product grid given by strictly increasing node coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct RectGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl RectGrid {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        let increasing = |v: &[f64]| v.len() >= 2 && v.windows(2).all(|w| w[1] > w[0]);
        if !increasing(&xs) || !increasing(&ys) {
            return Err(invalid("grid coordinates must be strictly increasing with >= 2 nodes"));
        }
        Ok(Self { xs, ys })
    }

    pub fn uniform(x0: f64, x1: f64, nx: usize, y0: f64, y1: f64, ny: usize) -> Result<Self> {
        let lin = |a: f64, b: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
        };
        Self::new(lin(x0, x1, nx), lin(y0, y1, ny))
    }

    pub fn nx(&self) -> usize {
        self.xs.len()
    }

    pub fn ny(&self) -> usize {
        self.ys.len()
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx() + i
    }

    /// Largest spacing along either axis.
    pub fn max_spacing(&self) -> f64 {
        fn gap(v: &[f64]) -> f64 {
            v.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
        }
        gap(&self.xs).max(gap(&self.ys))
    }

    pub fn min_spacing(&self) -> f64 {
        fn gap(v: &[f64]) -> f64 {
            v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
        }
        gap(&self.xs).min(gap(&self.ys))
    }

    /// The grid with a midpoint inserted in every cell.
    pub fn refined(&self) -> Self {
        fn halve(v: &[f64]) -> Vec<f64> {
            let mut out = Vec::with_capacity(2 * v.len() - 1);
            for w in v.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.push(*v.last().unwrap());
            out
        }
        Self {
            xs: halve(&self.xs),
            ys: halve(&self.ys),
        }
    }

    pub fn map_nodes<T>(&self, mut f: impl FnMut(f64, f64) -> T) -> Vec<T> {
        let mut out = Vec::with_capacity(self.len());
        for &y in &self.ys {
            for &x in &self.xs {
                out.push(f(x, y));
            }
        }
        out
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    t: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then(other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Arrival times and, when targets were given, the first accepted target value.
#[derive(Clone, Debug)]
pub struct MarchResult {
    pub arrival: Vec<f64>,
    pub first_target: Option<f64>,
}

/// Solves `|∇T| = ρ` with `T = 0` on `sources`. When `targets` is given the
/// march stops at the first accepted target node.
pub fn march(
    grid: &RectGrid,
    density: &[f64],
    sources: &[bool],
    targets: Option<&[bool]>,
) -> MarchResult {
    let n = grid.len();
    assert_eq!(density.len(), n);
    assert_eq!(sources.len(), n);
    let (nx, ny) = (grid.nx(), grid.ny());
    let mut t = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    for (idx, &s) in sources.iter().enumerate() {
        if s {
            t[idx] = 0.0;
            heap.push(Entry { t: 0.0, idx });
        }
    }
    let mut first_target = None;
    while let Some(Entry { t: ti, idx }) = heap.pop() {
        if done[idx] || ti > t[idx] {
            continue;
        }
        done[idx] = true;
        if let Some(tg) = targets {
            if tg[idx] {
                first_target = Some(ti);
                break;
            }
        }
        let (i, j) = (idx % nx, idx / nx);
        let relax = |ii: usize, jj: usize, t: &mut Vec<f64>, heap: &mut BinaryHeap<Entry>| {
            let k = jj * nx + ii;
            if done[k] {
                return;
            }
            let cand = local_update(grid, density[k], t, &done, ii, jj);
            if cand < t[k] {
                t[k] = cand;
                heap.push(Entry { t: cand, idx: k });
            }
        };
        if i > 0 {
            relax(i - 1, j, &mut t, &mut heap);
        }
        if i + 1 < nx {
            relax(i + 1, j, &mut t, &mut heap);
        }
        if j > 0 {
            relax(i, j - 1, &mut t, &mut heap);
        }
        if j + 1 < ny {
            relax(i, j + 1, &mut t, &mut heap);
        }
    }
    MarchResult {
        arrival: t,
        first_target,
    }
}

/// Best accepted upwind neighbour along one axis: `(value, spacing)`.
fn upwind(
    lower: Option<(f64, f64)>,
    upper: Option<(f64, f64)>,
    rho: f64,
) -> Option<(f64, f64)> {
    match (lower, upper) {
        (Some(a), Some(b)) => {
            if a.0 + rho * a.1 <= b.0 + rho * b.1 {
                Some(a)
            } else {
                Some(b)
            }
        }
        (a, b) => a.or(b),
    }
}

fn local_update(
    grid: &RectGrid,
    rho: f64,
    t: &[f64],
    done: &[bool],
    i: usize,
    j: usize,
) -> f64 {
    let nx = grid.nx();
    let accepted = |ii: usize, jj: usize, h: f64| {
        let k = jj * nx + ii;
        if done[k] {
            Some((t[k], h))
        } else {
            None
        }
    };
    let xl = (i > 0).then(|| accepted(i - 1, j, grid.xs[i] - grid.xs[i - 1])).flatten();
    let xr = (i + 1 < nx)
        .then(|| accepted(i + 1, j, grid.xs[i + 1] - grid.xs[i]))
        .flatten();
    let yl = (j > 0).then(|| accepted(i, j - 1, grid.ys[j] - grid.ys[j - 1])).flatten();
    let yr = (j + 1 < grid.ny())
        .then(|| accepted(i, j + 1, grid.ys[j + 1] - grid.ys[j]))
        .flatten();
    let ax = upwind(xl, xr, rho);
    let ay = upwind(yl, yr, rho);
    match (ax, ay) {
        (Some((a, hx)), Some((b, hy))) => {
            let one_d = (a + rho * hx).min(b + rho * hy);
            // (T − a)²/hx² + (T − b)²/hy² = ρ²
            let (wx, wy) = (1.0 / (hx * hx), 1.0 / (hy * hy));
            let qa = wx + wy;
            let qb = -2.0 * (a * wx + b * wy);
            let qc = a * a * wx + b * b * wy - rho * rho;
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let root = (-qb + disc.sqrt()) / (2.0 * qa);
                if root >= a.max(b) {
                    return root.min(one_d);
                }
            }
            one_d
        }
        (Some((a, h)), None) | (None, Some((a, h))) => a + rho * h,
        (None, None) => f64::INFINITY,
    }
}
