//! Crossing length of the cone `T` with vertices `−u, ±iπ` in the pulled-back
//! disk metric `ρ(x) = 1 / (2 sinh |x|)` on the left half-strip.
//!
//! The length `l(u)` is the distance from `T` to `T + 2πi`. The metric does
//! not depend on `y` and both sets are symmetric under `y ↦ 2π − y`, so a
//! minimizing path crosses `y = π` and `l = 2 d(T, {y = π})`; the reduced
//! problem lives on `[−X, −δ] × [0, π]`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::eikonal::{march, RectGrid};
use crate::error::{invalid, Error, Result};

/// Lattice parameters for the cone problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeGrid {
    /// Left end `−X` of the strip is at `x = −x_extent`.
    pub x_extent: f64,
    /// Right cut-off `−δ` as a fraction of `u`.
    pub delta_frac: f64,
    /// Nodes per unit of `ln |x|` (and of `ln y`) in the graded parts.
    pub res: f64,
    /// Largest node spacing.
    pub h_max: f64,
}

impl Default for ConeGrid {
    fn default() -> Self {
        Self {
            x_extent: 2.0 * PI,
            delta_frac: 1.0 / 8.0,
            res: 40.0,
            h_max: 0.05,
        }
    }
}

impl ConeGrid {
    pub fn with_res(res: f64) -> Self {
        Self {
            res,
            ..Self::default()
        }
    }

    fn validate(&self, u: f64) -> Result<()> {
        if !(u > 0.0 && u < PI) {
            return Err(invalid(format!("cone parameter u must lie in (0, pi), got {u}")));
        }
        if !(self.x_extent >= PI) {
            return Err(invalid(format!("strip extent X must be >= pi, got {}", self.x_extent)));
        }
        if !(self.delta_frac > 0.0 && self.delta_frac <= 1.0 / 8.0) {
            return Err(invalid(format!(
                "cut-off delta must satisfy 0 < delta <= u/8, got {} u",
                self.delta_frac
            )));
        }
        if !(self.res >= 4.0 && self.h_max > 0.0) {
            return Err(invalid("grid resolution must be at least 4 nodes per e-fold"));
        }
        Ok(())
    }

    fn x_nodes(&self, u: f64) -> Vec<f64> {
        let delta = self.delta_frac * u;
        let h_min = delta / self.res;
        let mut xs = vec![-delta];
        let mut x = -delta;
        while x > -self.x_extent {
            let h = (x.abs() / self.res).clamp(h_min, self.h_max.max(h_min));
            x -= h;
            xs.push(x.max(-self.x_extent));
        }
        xs.push(-u);
        xs.sort_by(f64::total_cmp);
        xs.dedup_by(|a, b| (*a - *b).abs() < 1e-3 * h_min);
        xs
    }

    fn y_nodes(&self, u: f64) -> Vec<f64> {
        let h_min = (u / 32.0).min(0.02);
        let mut ys = vec![0.0];
        let mut y: f64 = 0.0;
        while y < PI {
            let h = (y / self.res).clamp(h_min, self.h_max.max(h_min));
            y += h;
            ys.push(y.min(PI));
        }
        ys.dedup();
        // avoid a sliver cell at the top
        if ys.len() > 2 {
            let n = ys.len();
            if ys[n - 1] - ys[n - 2] < 0.25 * h_min {
                ys.remove(n - 2);
            }
        }
        ys
    }

    /// The reduced lattice on `[−X, −δ] × [0, π]`.
    pub fn lattice(&self, u: f64) -> Result<RectGrid> {
        self.validate(u)?;
        let g = RectGrid::new(self.x_nodes(u), self.y_nodes(u))?;
        // spacing next to the singular edge must resolve δ
        let edge = g.xs[g.xs.len() - 1] - g.xs[g.xs.len() - 2];
        if edge > self.delta_frac * u / 4.0 * (1.0 + 1e-9) {
            return Err(invalid("grid too coarse next to the cut-off"));
        }
        Ok(g)
    }
}

/// Pulled-back density of the disk metric on `Re w < 0`.
pub fn cone_density(x: f64) -> f64 {
    1.0 / (2.0 * x.abs().sinh())
}

/// Closed membership in the cone `T` (vertices `−u`, `±iπ`), shifted by `iy0`.
pub fn in_cone(u: f64, x: f64, y: f64, y0: f64) -> bool {
    x >= -u && x <= 0.0 && (y - y0).abs() <= PI * (x + u) / u + 1e-12
}

fn reduced_length(u: f64, grid: &RectGrid) -> f64 {
    let rho = grid.map_nodes(|x, _| cone_density(x));
    let src = grid.map_nodes(|x, y| in_cone(u, x, y, 0.0));
    let top = *grid.ys.last().unwrap();
    let tgt = grid.map_nodes(|_, y| y == top);
    let r = march(grid, &rho, &src, Some(&tgt));
    2.0 * r.first_target.unwrap_or(f64::INFINITY)
}

/// Fast-marching estimate of `l(u)` with its coarse and refined grid values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConeLength {
    pub u: f64,
    pub coarse: f64,
    pub fine: f64,
    /// `2 fine − coarse`.
    pub richardson: f64,
    /// `|fine − coarse| / fine`.
    pub rel_change: f64,
}

impl ConeLength {
    pub fn value(&self) -> f64 {
        self.richardson
    }
}

/// `l(u)` on the reduced strip, refined by one grid halving.
pub fn cone_length(u: f64, params: &ConeGrid) -> Result<ConeLength> {
    let g = params.lattice(u)?;
    let coarse = reduced_length(u, &g);
    let fine = reduced_length(u, &g.refined());
    Ok(ConeLength {
        u,
        coarse,
        fine,
        richardson: 2.0 * fine - coarse,
        rel_change: (fine - coarse).abs() / fine,
    })
}

/// `l(u)` on the full strip `[−X, −δ] × [y0 − π, y0 + 3π]`, from `T + iy0` to
/// `T + i(y0 + 2π)`, without the symmetry reduction.
pub fn cone_length_full_strip(u: f64, params: &ConeGrid, y0: f64) -> Result<f64> {
    let base = params.lattice(u)?;
    let mut ys: Vec<f64> = Vec::with_capacity(4 * base.ys.len());
    for &g in &base.ys {
        ys.push(y0 - g);
        ys.push(y0 + g);
        ys.push(y0 + 2.0 * PI - g);
        ys.push(y0 + 2.0 * PI + g);
    }
    ys.sort_by(f64::total_cmp);
    ys.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let grid = RectGrid::new(base.xs.clone(), ys)?;
    let rho = grid.map_nodes(|x, _| cone_density(x));
    let src = grid.map_nodes(|x, y| in_cone(u, x, y, y0));
    let tgt = grid.map_nodes(|x, y| in_cone(u, x, y, y0 + 2.0 * PI));
    let r = march(&grid, &rho, &src, Some(&tgt));
    r.first_target
        .ok_or_else(|| invalid("target unreachable on the full strip"))
}

/// Length of the explicit path: left along `y = 0` to `−X`, across at `−X`,
/// and back. An upper bound on `l(u)` for the strip truncated at `X`.
pub fn cone_length_upper_bound(u: f64, x_extent: f64) -> f64 {
    let coth_half = |t: f64| 1.0 / (0.5 * t).tanh();
    (coth_half(u) / coth_half(x_extent)).ln() + PI / x_extent.sinh()
}

pub const CHOOSE_U_MIN: f64 = 1e-3;
pub const CHOOSE_U_MAX: f64 = 0.999 * PI;
/// Required ratio `l(u) / d`.
pub const SAFETY: f64 = 1.1;

fn choose_cache() -> &'static Mutex<HashMap<u64, f64>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Largest `u` on a bisection in `ln u` over `[10⁻³, 0.999π]` with
/// `l(u) > 1.1 d`. Results are memoized per `d`.
pub fn choose_u(d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(invalid(format!("step bound d must be positive, got {d}")));
    }
    if let Some(&u) = choose_cache().lock().expect("cache lock").get(&d.to_bits()) {
        return Ok(u);
    }
    let params = ConeGrid::default();
    let target = SAFETY * d;
    let l = |u: f64| cone_length(u, &params).map(|c| c.value());
    let u = if l(CHOOSE_U_MAX)? > target {
        CHOOSE_U_MAX
    } else {
        let l_min = l(CHOOSE_U_MIN)?;
        if l_min <= target {
            return Err(Error::NoConeParameter {
                d,
                u_min: CHOOSE_U_MIN,
                l_min,
            });
        }
        let (mut lo, mut hi) = (CHOOSE_U_MIN.ln(), CHOOSE_U_MAX.ln());
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if l(mid.exp())? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo.exp()
    };
    choose_cache()
        .lock()
        .expect("cache lock")
        .insert(d.to_bits(), u);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_contents() {
        let p = ConeGrid::default();
        let g = p.lattice(0.4).unwrap();
        assert!(g.xs.contains(&-0.4));
        assert_eq!(*g.xs.first().unwrap(), -2.0 * PI);
        assert_eq!(*g.ys.last().unwrap(), PI);
        assert!(p.lattice(3.5).is_err());
        let bad = ConeGrid {
            delta_frac: 0.5,
            ..p
        };
        assert!(bad.lattice(0.4).is_err());
    }

    #[test]
    fn density_is_the_pulled_back_metric() {
        // λ(e^w) |e^w| with λ(z) = 1/(1 − |z|²)
        for &x in &[-0.01, -0.5, -3.0] {
            let r: f64 = f64::exp(x);
            assert!((cone_density(x) - r / (1.0 - r * r)).abs() < 1e-12 * cone_density(x));
        }
    }

    #[test]
    fn below_the_explicit_path_bound() {
        for &u in &[0.1, 0.4] {
            let l = cone_length(u, &ConeGrid::default()).unwrap();
            let ub = cone_length_upper_bound(u, 2.0 * PI);
            assert!(l.fine <= ub * 1.01, "u={u}: {l:?} vs {ub}");
            assert!(l.rel_change < 0.02, "u={u}: {l:?}");
        }
    }

    #[test]
    fn choose_u_rejects_bad_d() {
        assert!(choose_u(0.0).is_err());
        assert!(matches!(choose_u(50.0), Err(Error::NoConeParameter { .. })));
    }
}
