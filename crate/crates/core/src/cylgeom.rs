//! Geometry of the log-cylinder ℂ/2πiℤ.
//!
//! A point `z` of the punctured unit disk is represented by a logarithm
//! `w = x + iy` with `x < 0` and `y ∈ [0, 2π)`. The triangle `T(w)` attached
//! to `w` is the right isosceles triangle with apex `w` and hypotenuse on the
//! imaginary axis:
//!
//! ```text
//! T(w) = { ζ : Re w ≤ Re ζ ≤ 0, |Im ζ − Im w| ≤ Re ζ − Re w }
//! ```
//!
//! with the `Im` difference read on the circle. `T₅(w) = T(5 Re w + i Im w)`.
//! Every cross-section of a union of triangles at a fixed abscissa is a union
//! of circle arcs whose endpoints move with slope ±1, which is what makes the
//! exact area sweep in [`union_area`] possible.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Tolerance used when deciding whether consecutive closed arcs leave a gap.
pub const GAP_TOL: f64 = 1e-12;

/// Reduces an angle to `[0, 2π)`.
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, π]`.
pub fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Logarithmic coordinate of a point of the punctured unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogPoint {
    x: f64,
    y: f64,
}

impl LogPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !x.is_finite() || !y.is_finite() {
            return Err(invalid(format!("non-finite log point ({x}, {y})")));
        }
        if x >= 0.0 {
            return Err(invalid(format!("log point needs Re w < 0, got {x}")));
        }
        Ok(Self { x, y: wrap_angle(y) })
    }

    /// The logarithm of a nonzero point of the open unit disk.
    pub fn from_disk(z: Complex64) -> Result<Self> {
        let m = z.norm();
        if !(m > 0.0 && m < 1.0) {
            return Err(invalid(format!(
                "point ({}, {}) is not in the punctured unit disk",
                z.re, z.im
            )));
        }
        Self::new(m.ln(), z.arg())
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// `u = −Re w = −ln |z|`.
    pub fn depth(&self) -> f64 {
        -self.x
    }

    pub fn to_disk(&self) -> Complex64 {
        Complex64::from_polar(self.x.exp(), self.y)
    }
}

/// Horizontal scale of a triangle: `T` or `T₅`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Scale {
    One,
    Five,
}

impl Scale {
    pub fn factor(self) -> f64 {
        match self {
            Scale::One => 1.0,
            Scale::Five => 5.0,
        }
    }
}

/// The region `T(w)` (scale one) or `T₅(w)` (scale five).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Triangle {
    pub apex: LogPoint,
    pub scale: Scale,
}

impl Triangle {
    pub fn new(apex: LogPoint, scale: Scale) -> Self {
        Self { apex, scale }
    }

    pub fn unit(apex: LogPoint) -> Self {
        Self::new(apex, Scale::One)
    }

    pub fn five(apex: LogPoint) -> Self {
        Self::new(apex, Scale::Five)
    }

    /// Abscissa of the effective apex, `s · Re w`.
    pub fn apex_x(&self) -> f64 {
        self.scale.factor() * self.apex.x
    }

    /// Effective height `s · u`.
    pub fn height(&self) -> f64 {
        -self.apex_x()
    }

    pub fn center(&self) -> f64 {
        self.apex.y
    }

    /// Half-length of the cross-section arc at abscissa `x`, or `None` when
    /// `x` lies outside the triangle's horizontal extent.
    pub fn half_width_at(&self, x: f64) -> Option<f64> {
        let ax = self.apex_x();
        if x < ax || x > 0.0 {
            None
        } else {
            Some(x - ax)
        }
    }

    /// Area in the quotient cylinder.
    pub fn area(&self) -> f64 {
        area_for_height(self.height())
    }

    pub fn contains(&self, w: LogPoint) -> bool {
        triangle_contains(self, w)
    }

    /// Vertices in the unrolled plane: apex, upper base corner, lower base corner.
    pub fn vertices(&self) -> [(f64, f64); 3] {
        let h = self.height();
        let y = self.apex.y;
        [(-h, y), (0.0, y + h), (0.0, y - h)]
    }
}

fn area_for_height(h: f64) -> f64 {
    if h <= PI {
        h * h
    } else {
        TAU * (h - PI / 2.0)
    }
}

/// Area of `T(−u)` at scale `s`, measured in the quotient cylinder.
pub fn triangle_area_cyl(u: f64, s: Scale) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(invalid(format!("triangle depth must be positive, got {u}")));
    }
    Ok(area_for_height(s.factor() * u))
}

/// Closed membership test with the `Im` coordinate read on the circle.
pub fn triangle_contains(t: &Triangle, w: LogPoint) -> bool {
    match t.half_width_at(w.x) {
        Some(h) => circ_dist(w.y, t.apex.y) <= h,
        None => false,
    }
}

/// Measure of the cross-section at abscissa `x` of the union of `triangles`.
pub fn cross_section(triangles: &[Triangle], x: f64) -> f64 {
    let arcs: Vec<CircleInterval> = triangles
        .iter()
        .filter_map(|t| {
            t.half_width_at(x)
                .map(|h| CircleInterval::new_unchecked(t.apex.y, h))
        })
        .collect();
    arcs_union_measure(&arcs)
}

/// Exact quotient-cylinder area of the union of `triangles`.
///
/// The cross-section measure is continuous and piecewise linear in `x`, with
/// breakpoints only at apex abscissas, at abscissas where two arcs start
/// touching (on either side of the circle) and where one arc wraps the whole
/// circle. The trapezoid rule between consecutive breakpoints is exact.
pub fn union_area(triangles: &[Triangle]) -> f64 {
    if triangles.is_empty() {
        return 0.0;
    }
    let x_min = triangles
        .iter()
        .map(Triangle::apex_x)
        .fold(f64::INFINITY, f64::min);

    let mut events = Vec::with_capacity(triangles.len() * triangles.len() + 2);
    events.push(x_min);
    events.push(0.0);
    let mut push = |x: f64| {
        if x > x_min && x < 0.0 {
            events.push(x);
        }
    };
    for (i, a) in triangles.iter().enumerate() {
        let ax = a.apex_x();
        push(ax);
        push(ax + PI);
        for b in &triangles[i + 1..] {
            let bx = b.apex_x();
            let d = circ_dist(a.apex.y, b.apex.y);
            let start = ax.max(bx);
            for sep in [d, TAU - d] {
                let x = 0.5 * (sep + ax + bx);
                if x >= start {
                    push(x);
                }
            }
        }
    }
    events.sort_by(f64::total_cmp);
    events.dedup();

    let mut area = 0.0;
    let mut prev_x = events[0];
    let mut prev_m = cross_section(triangles, prev_x);
    for &x in &events[1..] {
        let m = cross_section(triangles, x);
        area += 0.5 * (prev_m + m) * (x - prev_x);
        prev_x = x;
        prev_m = m;
    }
    area
}

/// A closed arc of ℝ/2πℤ given by center and half-length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleInterval {
    center: f64,
    half_length: f64,
}

impl CircleInterval {
    pub fn new(center: f64, half_length: f64) -> Result<Self> {
        if !center.is_finite() || !(half_length >= 0.0) {
            return Err(invalid(format!(
                "circle interval needs finite center and half-length >= 0, got ({center}, {half_length})"
            )));
        }
        Ok(Self::new_unchecked(center, half_length))
    }

    fn new_unchecked(center: f64, half_length: f64) -> Self {
        Self {
            center: wrap_angle(center),
            half_length: half_length.min(PI),
        }
    }

    pub fn full() -> Self {
        Self::new_unchecked(0.0, PI)
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn length(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn is_full(&self) -> bool {
        self.half_length >= PI
    }

    pub fn contains(&self, angle: f64) -> bool {
        self.is_full() || circ_dist(angle, self.center) <= self.half_length
    }

    /// Closed intervals sharing at least one point.
    pub fn intersects(&self, other: &CircleInterval) -> bool {
        self.is_full()
            || other.is_full()
            || circ_dist(self.center, other.center) <= self.half_length + other.half_length
    }

    /// Same center, half-length multiplied by `factor` (capped at the full circle).
    pub fn dilated(&self, factor: f64) -> Self {
        Self::new_unchecked(self.center, self.half_length * factor)
    }

    /// Pieces of the arc as sub-intervals of `[0, 2π]`.
    fn linear_pieces(&self) -> ([f64; 2], Option<[f64; 2]>) {
        if self.is_full() {
            return ([0.0, TAU], None);
        }
        let start = wrap_angle(self.center - self.half_length);
        let end = start + 2.0 * self.half_length;
        if end <= TAU {
            ([start, end], None)
        } else {
            ([start, TAU], Some([0.0, end - TAU]))
        }
    }
}

fn sorted_pieces(intervals: &[CircleInterval]) -> Vec<[f64; 2]> {
    let mut pieces = Vec::with_capacity(2 * intervals.len());
    for iv in intervals {
        let (a, b) = iv.linear_pieces();
        pieces.push(a);
        if let Some(b) = b {
            pieces.push(b);
        }
    }
    pieces.sort_by(|p, q| p[0].total_cmp(&q[0]));
    pieces
}

/// Lebesgue measure of a union of arcs, in `[0, 2π]`.
pub fn arcs_union_measure(intervals: &[CircleInterval]) -> f64 {
    if intervals.iter().any(CircleInterval::is_full) {
        return TAU;
    }
    let mut total = 0.0;
    let mut current: Option<[f64; 2]> = None;
    for p in sorted_pieces(intervals) {
        match current.as_mut() {
            Some(c) if p[0] <= c[1] => c[1] = c[1].max(p[1]),
            _ => {
                if let Some(c) = current {
                    total += c[1] - c[0];
                }
                current = Some(p);
            }
        }
    }
    if let Some(c) = current {
        total += c[1] - c[0];
    }
    total.min(TAU)
}

/// An angle not covered by the union of the closed intervals, if any.
pub fn coverage_gap(intervals: &[CircleInterval]) -> Option<f64> {
    if intervals.iter().any(CircleInterval::is_full) {
        return None;
    }
    let mut reach = 0.0;
    for p in sorted_pieces(intervals) {
        if p[0] > reach + GAP_TOL {
            return Some(0.5 * (reach + p[0]));
        }
        reach = f64::max(reach, p[1]);
    }
    if reach < TAU - GAP_TOL {
        Some(wrap_angle(0.5 * (reach + TAU)))
    } else {
        None
    }
}

pub fn intervals_cover_circle(intervals: &[CircleInterval]) -> bool {
    coverage_gap(intervals).is_none()
}

/// The interval `I(z)` of center `Im w` and length `2π |Re w| / u`.
pub fn interval_i(w: LogPoint, u: f64) -> Result<CircleInterval> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(invalid(format!("interval parameter u must be positive, got {u}")));
    }
    CircleInterval::new(w.y, PI * w.depth() / u)
}

/// Greedy selection of pairwise-disjoint intervals, longest first (ties broken
/// by smaller center), whose tripled copies cover the circle.
pub fn greedy_triple_cover(intervals: &[CircleInterval]) -> Result<Vec<CircleInterval>> {
    if let Some(gap) = coverage_gap(intervals) {
        return Err(Error::NotCovering { gap });
    }
    let mut order: Vec<&CircleInterval> = intervals.iter().collect();
    order.sort_by(|a, b| {
        b.half_length
            .total_cmp(&a.half_length)
            .then(a.center.total_cmp(&b.center))
    });
    let mut selected: Vec<CircleInterval> = Vec::new();
    for cand in order {
        if selected.iter().all(|s| !s.intersects(cand)) {
            selected.push(*cand);
        }
    }
    let tripled: Vec<CircleInterval> = selected.iter().map(|s| s.dilated(3.0)).collect();
    if let Some(gap) = coverage_gap(&tripled) {
        // Cannot happen for a covering input; surfaced rather than hidden.
        return Err(Error::NotCovering { gap });
    }
    Ok(selected)
}

/// The profile `h` of the model domain: `−1` for `|t| ≥ 2`, `0` for `|t| ≤ 1`,
/// affine in between.
pub fn bump_profile(t: f64) -> f64 {
    let a = t.abs();
    if a <= 1.0 {
        0.0
    } else if a >= 2.0 {
        -1.0
    } else {
        1.0 - a
    }
}

/// The model domain `E(z) = exp(D(w))`, `D(w) = { Re ζ ≤ u h((Im ζ − Im w)/u) }`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelDomainE {
    pub anchor: LogPoint,
}

impl ModelDomainE {
    pub fn new(anchor: LogPoint) -> Self {
        Self { anchor }
    }

    pub fn depth(&self) -> f64 {
        self.anchor.depth()
    }

    /// Upper bound on `ln |ζ|` for points of `E` at angle `theta`. The image
    /// under `exp` of overlapping translates is the union, so the bound is
    /// taken at the nearest translate.
    pub fn log_radius_bound(&self, theta: f64) -> f64 {
        let u = self.depth();
        u * bump_profile(circ_dist(theta, self.anchor.y) / u)
    }

    /// Closed membership in `E` for a point of the punctured disk.
    pub fn contains_log(&self, w: LogPoint) -> bool {
        w.x <= self.log_radius_bound(w.y)
    }

    pub fn contains(&self, z: Complex64) -> bool {
        if z.norm() == 0.0 {
            return true;
        }
        match LogPoint::from_disk(z) {
            Ok(w) => self.contains_log(w),
            Err(_) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(x: f64, y: f64) -> LogPoint {
        LogPoint::new(x, y).unwrap()
    }

    #[test]
    fn log_point_rejects_nonnegative_real_part() {
        assert!(LogPoint::new(0.0, 1.0).is_err());
        assert!(LogPoint::new(0.3, 1.0).is_err());
        assert!(LogPoint::new(f64::NAN, 1.0).is_err());
        let w = lp(-1.0, -0.5);
        assert!((w.y() - (TAU - 0.5)).abs() < 1e-15);
    }

    #[test]
    fn area_examples() {
        let a = triangle_area_cyl(PI / 2.0, Scale::One).unwrap();
        assert!((a - PI * PI / 4.0).abs() < 1e-14);
        let a = triangle_area_cyl(TAU, Scale::One).unwrap();
        assert!((a - 3.0 * PI * PI).abs() < 1e-12);
        let a = triangle_area_cyl(PI / 5.0, Scale::Five).unwrap();
        assert!((a - PI * PI).abs() < 1e-12);
        assert!(triangle_area_cyl(0.0, Scale::One).is_err());
        assert!(triangle_area_cyl(-1.0, Scale::Five).is_err());
    }

    #[test]
    fn union_area_examples() {
        assert_eq!(union_area(&[]), 0.0);
        let one = [Triangle::unit(lp(-1.0, 0.0))];
        assert!((union_area(&one) - 1.0).abs() < 1e-14);
        let two = [Triangle::unit(lp(-1.0, 0.0)), Triangle::unit(lp(-1.0, PI))];
        assert!((union_area(&two) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn union_area_single_triangle_matches_closed_form() {
        for &u in &[0.01, 0.5, 1.0, PI - 1e-9, PI, 3.5, 7.0] {
            for s in [Scale::One, Scale::Five] {
                let t = Triangle::new(lp(-u, 1.3), s);
                let exact = triangle_area_cyl(u, s).unwrap();
                assert!(
                    (union_area(&[t]) - exact).abs() < 1e-10 * exact.max(1.0),
                    "u={u} s={s:?}"
                );
            }
        }
    }

    #[test]
    fn overlapping_pair_has_inclusion_exclusion_area() {
        // Two unit-depth triangles with centers 1 apart: the overlap is a
        // triangle of depth 1/2 hanging from the base, area 1/4.
        let t = [Triangle::unit(lp(-1.0, 0.0)), Triangle::unit(lp(-1.0, 1.0))];
        assert!((union_area(&t) - 1.75).abs() < 1e-13);
    }

    #[test]
    fn cross_section_examples() {
        let t = [Triangle::unit(lp(-1.0, 0.0))];
        assert_eq!(cross_section(&t, -1.0), 0.0);
        assert!((cross_section(&t, 0.0) - 2.0).abs() < 1e-15);
        assert_eq!(cross_section(&t, -1.5), 0.0);
        let big = [Triangle::unit(lp(-4.0, 0.0))];
        assert!((cross_section(&big, 0.0) - TAU).abs() < 1e-15);
    }

    #[test]
    fn containment_examples() {
        let t = Triangle::unit(lp(-1.0, 0.0));
        assert!(t.contains(lp(-0.5, 0.0)));
        assert!(!t.contains(lp(-0.5, 0.6)));
        assert!(t.contains(lp(-0.5, TAU - 0.3)));
        assert!(!t.contains(lp(-1.2, 0.0)));
    }

    #[test]
    fn interval_examples() {
        let u = 0.7;
        let full = interval_i(lp(-u, 0.0), u).unwrap();
        assert_eq!(full.half_length(), PI);
        assert!(full.is_full());
        let half = interval_i(lp(-u / 2.0, 1.0), u).unwrap();
        assert!((half.center() - 1.0).abs() < 1e-15);
        assert!((half.half_length() - PI / 2.0).abs() < 1e-15);
        let q = interval_i(lp(-0.1, 2.0), 0.4).unwrap();
        assert!((q.half_length() - PI / 4.0).abs() < 1e-15);
        assert!((q.length() - TAU * 0.1 / 0.4).abs() < 1e-14);
        assert!(interval_i(lp(-0.1, 2.0), 0.0).is_err());
    }

    #[test]
    fn cover_examples() {
        let thirds: Vec<_> = (0..3)
            .map(|k| CircleInterval::new(k as f64 * TAU / 3.0, TAU / 3.0).unwrap())
            .collect();
        assert!(intervals_cover_circle(&thirds));
        let almost = [CircleInterval::new(0.0, PI - 0.01).unwrap()];
        let gap = coverage_gap(&almost).unwrap();
        assert!(circ_dist(gap, PI) <= 0.01);
        assert!(!intervals_cover_circle(&[]));
        assert!(intervals_cover_circle(&[CircleInterval::full()]));
    }

    #[test]
    fn greedy_examples() {
        let full = [CircleInterval::full()];
        assert_eq!(greedy_triple_cover(&full).unwrap(), full.to_vec());
        let thirds: Vec<_> = (0..3)
            .map(|k| CircleInterval::new(k as f64 * TAU / 3.0, TAU / 3.0).unwrap())
            .collect();
        let sel = greedy_triple_cover(&thirds).unwrap();
        assert!(!sel.is_empty() && sel.len() <= 2);
        assert_eq!(sel[0].center(), 0.0);
        let tripled: Vec<_> = sel.iter().map(|s| s.dilated(3.0)).collect();
        assert!(intervals_cover_circle(&tripled));
        let gappy = [CircleInterval::new(0.0, 1.0).unwrap()];
        assert!(matches!(
            greedy_triple_cover(&gappy),
            Err(Error::NotCovering { .. })
        ));
    }

    #[test]
    fn model_domain_profile() {
        let e = ModelDomainE::new(lp(-0.5, 0.0));
        assert_eq!(e.log_radius_bound(0.0), 0.0);
        assert_eq!(e.log_radius_bound(0.5), 0.0);
        assert!((e.log_radius_bound(0.75) + 0.25).abs() < 1e-15);
        assert_eq!(e.log_radius_bound(PI), -0.5);
        // contains the disk of radius |z| and z itself
        assert!(e.contains(Complex64::from_polar(0.5f64.exp().recip() * 0.999, 2.0)));
        assert!(e.contains(e.anchor.to_disk()));
        assert!(!e.contains(Complex64::from_polar(0.9, PI)));
        assert!(e.contains(Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn arc_measure_wraps() {
        let a = CircleInterval::new(0.1, 0.3).unwrap();
        assert!((arcs_union_measure(&[a]) - 0.6).abs() < 1e-15);
        let b = CircleInterval::new(TAU - 0.1, 0.3).unwrap();
        assert!((arcs_union_measure(&[a, b]) - 0.8).abs() < 1e-14);
    }
}
