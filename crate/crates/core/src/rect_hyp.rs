//! Hyperbolic distance inside an axis-aligned rectangle.
//!
//! The rectangle is mapped onto the upper half-plane by the elliptic sine,
//! after an affine normalisation onto `[−K, K] × [0, K']` with the modulus
//! chosen from the aspect ratio through the nome `q = exp(−2π H/W)`.
//! Rectangles wider than tall are rotated first so the nome stays small.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::elliptic::{modulus_from_nome, Jacobi, DEFAULT_TOL};
use crate::error::{invalid, Error, Result};

/// Largest accepted aspect ratio.
pub const MAX_ASPECT: f64 = 1e3;

/// Open axis-aligned rectangle given by its lower-left and upper-right corners.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RectDomain {
    pub lower: (f64, f64),
    pub upper: (f64, f64),
}

impl RectDomain {
    pub fn new(lower: (f64, f64), upper: (f64, f64)) -> Result<Self> {
        let (w, h) = (upper.0 - lower.0, upper.1 - lower.1);
        if !(w > 0.0 && h > 0.0) || !w.is_finite() || !h.is_finite() {
            return Err(invalid("rectangle needs positive finite side lengths"));
        }
        if w / h > MAX_ASPECT || h / w > MAX_ASPECT {
            return Err(invalid(format!(
                "rectangle aspect ratio {} exceeds {MAX_ASPECT}",
                (w / h).max(h / w)
            )));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper.0 - self.lower.0
    }

    pub fn height(&self) -> f64 {
        self.upper.1 - self.lower.1
    }

    pub fn contains_strictly(&self, p: (f64, f64)) -> bool {
        p.0 > self.lower.0 && p.0 < self.upper.0 && p.1 > self.lower.1 && p.1 < self.upper.1
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            lower: (self.lower.0 * s, self.lower.1 * s),
            upper: (self.upper.0 * s, self.upper.1 * s),
        }
    }
}

/// Above this aspect ratio `k < 10⁻⁶⁸` and `sn` equals `sin` on each half of
/// the normalised rectangle to machine precision.
const SIN_REGIME_ASPECT: f64 = 50.0;

/// A point of the upper half-plane stored as `m · e^{e}`, either as `sn(z)`
/// (lower half of the normalised rectangle) or as `−1/sn(z)` (upper half),
/// with the derivative of that chart in the same scale.
#[derive(Clone, Copy, Debug)]
struct ChartPoint {
    upper: bool,
    m: Complex64,
    dm: Complex64,
    e: f64,
}

impl ChartPoint {
    fn ln_im(&self) -> f64 {
        self.m.im.ln() + self.e
    }
}

/// `sin z` and `cos z` divided by `e^{|Im z|}`.
fn scaled_sin_cos(z: Complex64) -> (Complex64, Complex64) {
    let (s, c) = z.re.sin_cos();
    let t = (-2.0 * z.im.abs()).exp();
    let sg = z.im.signum();
    let sin = Complex64::new(0.5 * s * (1.0 + t), 0.5 * sg * c * (1.0 - t));
    let cos = Complex64::new(0.5 * c * (1.0 + t), -0.5 * sg * s * (1.0 - t));
    (sin, cos)
}

/// The conformal map of a rectangle onto the upper half-plane.
#[derive(Clone, Copy, Debug)]
pub struct RectUniformizer {
    rect: RectDomain,
    jacobi: Jacobi,
    /// `true` when the rectangle is rotated by a quarter turn before mapping.
    rotated: bool,
    scale: f64,
    /// Height `K'` of the normalised rectangle.
    kp: f64,
    ln_k: f64,
    sin_regime: bool,
}

impl RectUniformizer {
    pub fn new(rect: RectDomain, tol: f64) -> Self {
        let (w, h) = (rect.width(), rect.height());
        let rotated = w > h;
        // after rotation the long side is vertical
        let (ww, hh) = if rotated { (h, w) } else { (w, h) };
        let aspect = hh / ww;
        let sin_regime = aspect > SIN_REGIME_ASPECT;
        let (jacobi, kk, ln_k) = if sin_regime {
            // k = 4 √q (1 + O(q)) with q = e^{−2π aspect}
            (Jacobi::new(0.0, 1.0, tol), PI / 2.0, 4f64.ln() - PI * aspect)
        } else {
            let (k, kc) = modulus_from_nome((-2.0 * PI * aspect).exp(), tol);
            let j = Jacobi::new(k, kc, tol);
            (j, j.periods().0, k.ln())
        };
        let scale = 2.0 * kk / ww;
        Self {
            rect,
            jacobi,
            rotated,
            scale,
            kp: hh * scale,
            ln_k,
            sin_regime,
        }
    }

    /// Position in the normalised rectangle `[−K, K] × [0, K']`.
    fn normalise(&self, p: (f64, f64)) -> Complex64 {
        let r = &self.rect;
        let (xi, eta) = if self.rotated {
            (p.1 - 0.5 * (r.lower.1 + r.upper.1), r.upper.0 - p.0)
        } else {
            (p.0 - 0.5 * (r.lower.0 + r.upper.0), p.1 - r.lower.1)
        };
        Complex64::new(xi, eta) * self.scale
    }

    fn chart(&self, p: (f64, f64)) -> ChartPoint {
        let z = self.normalise(p);
        let upper = z.im > 0.5 * self.kp;
        // −1/sn(z) = −k sn(z − iK')
        let zz = if upper { z - Complex64::new(0.0, self.kp) } else { z };
        let sign = if upper { -1.0 } else { 1.0 };
        let (m, dm, e) = if self.sin_regime {
            let (s, c) = scaled_sin_cos(zz);
            (s, c, zz.im.abs())
        } else {
            let (s, c, d) = self.jacobi.sn_cn_dn(zz);
            (s, c * d, 0.0)
        };
        ChartPoint {
            upper,
            m: m * sign,
            dm: dm * sign,
            e: e + if upper { self.ln_k } else { 0.0 },
        }
    }

    /// Image in the upper half-plane. Overflows for very elongated rectangles;
    /// distances do not go through this value.
    pub fn map(&self, p: (f64, f64)) -> Complex64 {
        self.jacobi.sn(self.normalise(p))
    }

    /// Hyperbolic density of the rectangle at `p` (normalisation `d(0,x) = artanh x`).
    pub fn density(&self, p: (f64, f64)) -> f64 {
        let c = self.chart(p);
        c.dm.norm() * self.scale / (2.0 * c.m.im)
    }

    /// Hyperbolic distance between the images of `p` and `q`.
    fn distance(&self, p: (f64, f64), q: (f64, f64)) -> f64 {
        let (a, b) = (self.chart(p), self.chart(q));
        // ρ = |N| / |D| and 1 − ρ² = 4 Im a Im b / |D|²
        let (ln_n, ln_d) = if a.upper == b.upper {
            let e = a.e.max(b.e);
            let (ma, mb) = (a.m * (a.e - e).exp(), b.m * (b.e - e).exp());
            ((ma - mb).norm().ln() + e, (ma - mb.conj()).norm().ln() + e)
        } else {
            // a ↦ −1/a relates the charts: ρ = |1 + a B| / |1 + a B̄|
            let prod = a.m * b.m;
            let prod_c = a.m * b.m.conj();
            let ln = prod.norm().ln() + a.e + b.e;
            if ln > 0.0 {
                let t = (-ln).exp();
                let (u, uc) = (prod / prod.norm(), prod_c / prod_c.norm());
                ((u + t).norm().ln() + ln, (uc + t).norm().ln() + ln)
            } else {
                let s = (a.e + b.e).exp();
                ((1.0 + prod * s).norm().ln(), (1.0 + prod_c * s).norm().ln())
            }
        };
        if ln_n == f64::NEG_INFINITY {
            return 0.0;
        }
        let rho = (ln_n - ln_d).exp().min(1.0);
        let ln_one_minus_rho2 = 4f64.ln() + a.ln_im() + b.ln_im() - 2.0 * ln_d;
        // artanh ρ = ln(1 + ρ) − ½ ln(1 − ρ²)
        rho.ln_1p() - 0.5 * ln_one_minus_rho2.min(0.0)
    }
}

pub fn rect_hyp_distance_with_tol(
    rect: &RectDomain,
    p: (f64, f64),
    q: (f64, f64),
    tol: f64,
) -> Result<f64> {
    for pt in [p, q] {
        if !rect.contains_strictly(pt) {
            return Err(Error::OutsideDomain(pt.0, pt.1));
        }
    }
    let d = RectUniformizer::new(*rect, tol).distance(p, q);
    if !d.is_finite() || d < 0.0 {
        return Err(invalid(format!(
            "elliptic map left the floating-point range for points {p:?}, {q:?}"
        )));
    }
    Ok(d)
}

/// Hyperbolic distance between two interior points of `rect`.
pub fn rect_hyp_distance(rect: &RectDomain, p: (f64, f64), q: (f64, f64)) -> Result<f64> {
    rect_hyp_distance_with_tol(rect, p, q, DEFAULT_TOL)
}

/// The rectangle `[−3u, 0] × [−u, u]` flush against the imaginary axis.
pub fn detour_rectangle(u: f64) -> Result<RectDomain> {
    RectDomain::new((-3.0 * u, -u), (0.0, u))
}

pub fn c2_constant_at_scale(u: f64, tol: f64) -> Result<f64> {
    let rect = detour_rectangle(u)?;
    rect_hyp_distance_with_tol(&rect, (-2.0 * u, 0.0), (-u, 0.0), tol)
}

/// Distance from `ln x²` to `ln x` in the detour rectangle, `u = 1`.
pub fn c2_constant() -> f64 {
    c2_constant_at_scale(1.0, DEFAULT_TOL).expect("fixed rectangle is valid")
}

/// `exp(−2 c2) (1 − e^{−π}) / π`.
pub fn c1_constant(c2: f64) -> Result<f64> {
    if !(c2 >= 0.0) || !c2.is_finite() {
        return Err(invalid(format!("c2 must be non-negative, got {c2}")));
    }
    Ok((-2.0 * c2).exp() * (1.0 - (-PI).exp()) / PI)
}

/// The chain of estimates behind the ratio bound for the model domain: with
/// `d = artanh x + c2` and `x' = tanh d`, returns `ln x' / ln x`.
pub fn lemma_e_chain_ratio(x: f64, c2: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(invalid(format!("x must lie in (0, 1), got {x}")));
    }
    let d = x.atanh() + c2;
    // −ln tanh d = ln coth d, written to avoid cancellation for large d
    let minus_ln_xp = -(-(-2.0 * d).exp()).ln_1p() + (-2.0 * d).exp().ln_1p();
    Ok(minus_ln_xp / -x.ln())
}
