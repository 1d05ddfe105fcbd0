//! Exact conformal radii of one-removal domains and the constants derived
//! from them.
//!
//! All hyperbolic quantities use the density `1/(1 − |z|²)` on the unit disk,
//! so that `d(0, x) = artanh x`.

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cylgeom::{triangle_area_cyl, Scale};
use crate::error::{invalid, Error, Result};

/// Below this depth `u/sinh u` is evaluated from its Taylor series.
const SERIES_CUTOFF: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateKind {
    Exact,
    MonteCarlo,
    UpperBound,
    LowerBound,
}

/// A value of `ln r` with its statistical standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadiusEstimate {
    pub ln_r: f64,
    pub std_err: f64,
    pub kind: EstimateKind,
}

impl RadiusEstimate {
    pub fn exact(ln_r: f64) -> Self {
        Self {
            ln_r,
            std_err: 0.0,
            kind: EstimateKind::Exact,
        }
    }

    pub fn r(&self) -> f64 {
        self.ln_r.exp()
    }
}

fn check_depth(u: f64) -> Result<()> {
    if u > 0.0 && u.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("depth u must be positive and finite, got {u}")))
    }
}

/// `ln sinh u` without overflow for large `u`.
fn ln_sinh(u: f64) -> f64 {
    if u > 20.0 {
        u - LN_2 + (-(-2.0 * u).exp()).ln_1p()
    } else {
        u.sinh().ln()
    }
}

/// `ln(u / sinh u)`.
pub fn ln_u_over_sinh(u: f64) -> f64 {
    if u < SERIES_CUTOFF {
        let u2 = u * u;
        -u2 / 6.0 + u2 * u2 / 180.0
    } else if u < 1.0 {
        // sinh u / u − 1 = Σ_{k≥1} u^{2k} / (2k+1)!, summed without cancellation
        let u2 = u * u;
        let (mut term, mut sum) = (1.0, 0.0);
        for k in 1..20 {
            term *= u2 / ((2 * k) as f64 * (2 * k + 1) as f64);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        -sum.ln_1p()
    } else {
        u.ln() - ln_sinh(u)
    }
}

/// `ln cosh u`.
fn ln_cosh(u: f64) -> f64 {
    if u > 20.0 {
        u - LN_2 + (-2.0 * u).exp().ln_1p()
    } else {
        u.cosh().ln()
    }
}

/// Conformal radius (universal covering) of `𝔻 \ {e^{−u}}`: `r = u / sinh u`.
pub fn r_point(u: f64) -> Result<RadiusEstimate> {
    check_depth(u)?;
    Ok(RadiusEstimate::exact(ln_u_over_sinh(u)))
}

/// Conformal radius of the component of 0 in `𝔻` cut along the geodesic
/// through `e^{−u}` orthogonal to the real axis: `r = 1 / cosh u`.
pub fn r_geodesic(u: f64) -> Result<RadiusEstimate> {
    check_depth(u)?;
    Ok(RadiusEstimate::exact(-ln_cosh(u)))
}

fn check_in_disk(z: Complex64) -> Result<()> {
    if z.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::OutsideDisk { re: z.re, im: z.im })
    }
}

/// Hyperbolic distance in the unit disk.
pub fn hyp_dist_disk(z1: Complex64, z2: Complex64) -> Result<f64> {
    check_in_disk(z1)?;
    check_in_disk(z2)?;
    Ok(hyp_dist_unchecked(z1, z2))
}

pub(crate) fn hyp_dist_unchecked(z1: Complex64, z2: Complex64) -> f64 {
    let num = (z1 - z2).norm();
    if num == 0.0 {
        return 0.0;
    }
    let den = (Complex64::new(1.0, 0.0) - z2.conj() * z1).norm();
    (num / den).min(1.0).atanh()
}

/// Disk automorphism `z ↦ e^{iθ} (z − a) / (1 − ā z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskAutomorphism {
    pub rotation: f64,
    pub a: Complex64,
}

impl DiskAutomorphism {
    pub fn new(rotation: f64, a: Complex64) -> Result<Self> {
        check_in_disk(a)?;
        Ok(Self { rotation, a })
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        Complex64::from_polar(1.0, self.rotation) * (z - self.a) / (one - self.a.conj() * z)
    }
}

/// The universal covering `(𝔻, 0) → (𝔻 \ {x}, 0)`, `x = e^{−u}`, written as
/// a Möbius map onto the left half-plane, the exponential, and a disk
/// automorphism sending `0` to `x`.
#[derive(Clone, Copy, Debug)]
pub struct SinglePunctureCover {
    u: f64,
    x: f64,
}

impl SinglePunctureCover {
    pub fn new(u: f64) -> Result<Self> {
        check_depth(u)?;
        Ok(Self { u, x: (-u).exp() })
    }

    pub fn puncture(&self) -> f64 {
        self.x
    }

    /// `ξ ↦ u (1 + ξ)/(ξ − 1) + iπ`, onto `{Re < 0}`, `0 ↦ −u + iπ`.
    fn to_half_plane(&self, xi: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        self.u * (one + xi) / (xi - one) + Complex64::new(0.0, PI)
    }

    fn from_half_plane(&self, zeta: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let s = (zeta - Complex64::new(0.0, PI)) / self.u;
        (s + one) / (s - one)
    }

    /// Inverse of `z ↦ (z − x)/(1 − x z)`.
    fn from_punctured(&self, w: Complex64) -> Complex64 {
        (w + self.x) / (1.0 + self.x * w)
    }

    pub fn map(&self, xi: Complex64) -> Complex64 {
        self.from_punctured(self.to_half_plane(xi).exp())
    }

    /// Deck transformation generated by `ζ ↦ ζ + 2πi` on the half-plane.
    pub fn deck(&self, xi: Complex64) -> Complex64 {
        self.from_half_plane(self.to_half_plane(xi) + Complex64::new(0.0, TAU))
    }

    /// `|F'(0)|` by the chain rule through the three factors.
    pub fn derivative_at_zero(&self) -> f64 {
        let one = Complex64::new(1.0, 0.0);
        let xi = Complex64::new(0.0, 0.0);
        let d_half = self.u * (-2.0) / ((xi - one) * (xi - one));
        let zeta = self.to_half_plane(xi);
        let w = zeta.exp();
        let d_exp = w;
        let denom = one + self.x * w;
        let d_aut = Complex64::new(1.0 - self.x * self.x, 0.0) / (denom * denom);
        (d_aut * d_exp * d_half).norm()
    }
}

/// `|F'(0)|` for the explicit single-puncture covering.
pub fn single_puncture_cover_deriv(u: f64) -> Result<f64> {
    Ok(SinglePunctureCover::new(u)?.derivative_at_zero())
}

/// `−ln r_point(u) / u²`.
pub fn point_loss_per_area(u: f64) -> f64 {
    -ln_u_over_sinh(u) / (u * u)
}

/// `|ln r_point(u)| · 2π / area T(−u)`.
pub fn point_quotient(u: f64) -> f64 {
    let area = triangle_area_cyl(u, Scale::One).expect("positive depth");
    -ln_u_over_sinh(u) * TAU / area
}

/// Infimum and supremum of a function on `[lo, hi]`, located on a dense
/// geometric-plus-uniform grid and refined by golden-section search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extrema {
    pub inf: f64,
    pub argmin: f64,
    pub sup: f64,
    pub argmax: f64,
    /// Largest gap between consecutive grid points near the extrema after refinement.
    pub resolution: f64,
}

fn golden_min(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a) > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

fn extremum_near(
    f: &dyn Fn(f64) -> f64,
    grid: &[f64],
    idx: usize,
    sign: f64,
) -> (f64, f64) {
    let lo = grid[idx.saturating_sub(1)];
    let hi = grid[(idx + 1).min(grid.len() - 1)];
    let g = |t: f64| sign * f(t);
    let (x, v) = golden_min(&g, lo, hi, 1e-9 * hi.max(1.0));
    // keep whichever is better, the endpoint can win when the extremum is at the boundary
    let candidates = [(x, v), (grid[idx], g(grid[idx])), (lo, g(lo)), (hi, g(hi))];
    let best = candidates
        .into_iter()
        .min_by(|p, q| p.1.total_cmp(&q.1))
        .unwrap();
    (best.0, sign * best.1)
}

pub fn certify_extrema(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> Extrema {
    let half = points / 2;
    let mut grid = Vec::with_capacity(2 * half + 1);
    let ratio = (hi / lo).ln();
    for k in 0..=half {
        grid.push(lo * (ratio * k as f64 / half as f64).exp());
        grid.push(lo + (hi - lo) * k as f64 / half as f64);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    *grid.last_mut().unwrap() = hi;
    let values: Vec<f64> = grid.iter().map(|&t| f(t)).collect();
    let imin = (0..grid.len())
        .min_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap();
    let imax = (0..grid.len())
        .max_by(|&i, &j| values[i].total_cmp(&values[j]))
        .unwrap();
    let (argmin, inf) = extremum_near(f, &grid, imin, 1.0);
    let (argmax, sup) = extremum_near(f, &grid, imax, -1.0);
    let resolution = grid
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);
    Extrema {
        inf,
        argmin,
        sup,
        argmax,
        resolution,
    }
}

/// Result of the certified infimum of `−ln r_point(u)/u²` over `(0, π]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct K1Bound {
    pub k1: f64,
    pub argmin: f64,
    pub sup: f64,
    /// The finite-difference derivative is negative at every grid point.
    pub decreasing: bool,
}

pub fn k1_bound() -> K1Bound {
    let ext = certify_extrema(&point_loss_per_area, 1e-6, PI, 20_000);
    let n = 10_000;
    let decreasing = (1..=n).all(|k| {
        let t = PI * k as f64 / n as f64;
        let h = 1e-6 * t.max(1e-3);
        point_loss_per_area(t + h) < point_loss_per_area(t - h)
    });
    K1Bound {
        k1: ext.inf,
        argmin: ext.argmin,
        sup: ext.sup,
        decreasing,
    }
}

/// Infimum and supremum of [`point_quotient`] over `(0, u_max]`.
pub fn point_quotient_bounds_on(u_max: f64) -> Extrema {
    certify_extrema(&point_quotient, 1e-6, u_max, 40_000)
}

/// [`point_quotient_bounds_on`] with `u_max = 20`; returns `(inf, sup)`.
pub fn point_quotient_bounds() -> (f64, f64) {
    let e = point_quotient_bounds_on(20.0);
    (e.inf, e.sup)
}

/// Brackets of `|ln r| / a` when a removed point has `|z| = e^{−u} ≤ e^{−π}`:
/// `(ln(sinh u / u) / u, u / (u − π/2))`.
pub fn small_module_bounds(u: f64) -> Result<(f64, f64)> {
    if !(u >= PI) || !u.is_finite() {
        return Err(invalid(format!("small-module bounds need u >= π, got {u}")));
    }
    Ok((-ln_u_over_sinh(u) / u, u / (u - PI / 2.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn r_point_values() {
        assert!((r_point(PI).unwrap().r() - PI / PI.sinh()).abs() < 1e-15);
        assert!((r_point(PI).unwrap().r() - 0.27202).abs() < 1e-5);
        assert!((r_point(1.0).unwrap().r() - 0.85092).abs() < 1e-5);
        assert!(r_point(0.0).is_err());
        assert!(r_point(-1.0).is_err());
        assert_eq!(r_point(2.0).unwrap().kind, EstimateKind::Exact);
        assert_eq!(r_point(2.0).unwrap().std_err, 0.0);
    }

    #[test]
    fn r_point_small_u_expansion() {
        for &u in &[1e-1, 1e-2, 1e-3] {
            let r = r_point(u).unwrap().r();
            assert!((r - (1.0 - u * u / 6.0)).abs() <= u * u * u, "u={u}");
        }
        // series and direct evaluation agree across the cutoff
        let a = ln_u_over_sinh(SERIES_CUTOFF * (1.0 - 1e-12));
        let b = ln_u_over_sinh(SERIES_CUTOFF * (1.0 + 1e-12));
        assert!((a - b).abs() < 1e-11 * a.abs());
    }

    #[test]
    fn r_geodesic_values() {
        assert!((r_geodesic(1.0).unwrap().r() - 0.64805).abs() < 1e-5);
        for &u in &[1e-1, 1e-2, 1e-3] {
            let r = r_geodesic(u).unwrap().r();
            assert!((r - (1.0 - u * u / 2.0)).abs() <= u * u * u);
        }
        for k in 1..200 {
            let u = 0.05 * k as f64;
            assert!(r_geodesic(u).unwrap().ln_r <= r_point(u).unwrap().ln_r);
        }
        assert!(r_geodesic(50.0).unwrap().ln_r.is_finite());
        assert!(r_point(800.0).unwrap().ln_r.is_finite());
    }

    #[test]
    fn radii_strictly_decreasing() {
        let mut prev = (0.0, 0.0);
        for k in 1..400 {
            let u = 0.02 * k as f64;
            let cur = (r_point(u).unwrap().ln_r, r_geodesic(u).unwrap().ln_r);
            assert!(cur.0 < prev.0 && cur.1 < prev.1);
            prev = cur;
        }
    }

    #[test]
    fn hyperbolic_distance_examples() {
        let z = |re, im| Complex64::new(re, im);
        assert!((hyp_dist_disk(z(0.0, 0.0), z(0.3, 0.0)).unwrap() - 0.3f64.atanh()).abs() < 1e-15);
        assert_eq!(hyp_dist_disk(z(0.2, 0.1), z(0.2, 0.1)).unwrap(), 0.0);
        assert!((hyp_dist_disk(z(0.5, 0.0), z(-0.5, 0.0)).unwrap() - 0.8f64.atanh()).abs() < 1e-14);
        assert!((0.8f64.atanh() - 1.0986).abs() < 1e-4);
        assert!(hyp_dist_disk(z(1.0, 0.0), z(0.0, 0.0)).is_err());
    }

    #[test]
    fn cover_derivative_matches_closed_form() {
        for &u in &[0.1, 1.0, PI] {
            let d = single_puncture_cover_deriv(u).unwrap();
            assert!((d - r_point(u).unwrap().r()).abs() < 1e-12, "u={u}");
        }
        for k in 0..100 {
            let u = 10f64.powf(-3.0 + 4.0 * k as f64 / 99.0);
            let d = single_puncture_cover_deriv(u).unwrap();
            let r = r_point(u).unwrap().r();
            assert!((d - r).abs() < 1e-12, "u={u}: {d} vs {r}");
        }
    }

    #[test]
    fn cover_fixes_origin() {
        let c = SinglePunctureCover::new(0.7).unwrap();
        assert!(c.map(Complex64::new(0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn constants_reproduced() {
        let k = k1_bound();
        assert!(k.k1 > 0.13 && k.k1 < 0.132, "{k:?}");
        assert!((k.argmin - PI).abs() < 1e-6);
        assert!(k.sup <= 1.0 / 6.0 + 1e-9);
        assert!(k.decreasing);
        let f_pi = (PI.sinh() / PI).ln() / (PI * PI);
        assert!((k.k1 - f_pi).abs() < 1e-12);
        assert!((f_pi - 0.13190).abs() < 1e-4);
    }

    #[test]
    fn quotient_bounds() {
        assert!((point_quotient(1e-5) - TAU / 6.0).abs() < 1e-6);
        assert!((point_quotient(PI) - (PI.sinh() / PI).ln() / (PI / 2.0)).abs() < 1e-14);
        assert!((point_quotient(PI) - 0.8287).abs() < 1e-3);
        let (lo, hi) = point_quotient_bounds();
        assert!(lo >= 0.75 && hi <= 1.05, "({lo}, {hi})");
    }

    #[test]
    fn small_module_examples() {
        let (lo, hi) = small_module_bounds(PI).unwrap();
        assert!((lo - 0.4144).abs() < 1e-4);
        assert!((hi - 2.0).abs() < 1e-15);
        let (lo, hi) = small_module_bounds(1e6).unwrap();
        assert!((lo - 1.0).abs() < 1e-4 && (hi - 1.0).abs() < 1e-5);
        assert!(small_module_bounds(3.0).is_err());
        let mut prev = small_module_bounds(PI).unwrap();
        for k in 1..=1000 {
            let u = PI + (30.0 - PI) * k as f64 / 1000.0;
            let cur = small_module_bounds(u).unwrap();
            assert!(cur.0 > prev.0 && cur.1 < prev.1);
            assert!(cur.0 >= 0.4 && cur.1 <= 2.0);
            prev = cur;
        }
    }
}
