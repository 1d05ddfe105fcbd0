//! Greedy selection of pairwise-disjoint triangles by dyadic depth bands.
//!
//! Band `n` collects apexes with `Re w ∈ [−π/2ⁿ, −π/2ⁿ⁺¹)`. Bands are
//! processed from the deepest down; inside a band the deeper apex goes
//! first. Every rejected triangle then meets a chosen one at least half as
//! deep, which places it inside the chosen triangle's five-fold dilation.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::cylgeom::{circ_dist, union_area, LogPoint, Triangle};
use crate::error::{invalid, Result};

/// Triangle-level factor between the selection and the whole union.
pub const C3: f64 = 25.0;

/// Raster resolution per triangle in [`containment_check`].
pub const RASTER: usize = 64;

/// Outcome of [`select_disjoint`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Selection {
    /// Chosen apexes in selection order.
    pub chosen: Vec<LogPoint>,
    /// `(band index, chosen members of that band)` for every non-empty band.
    pub bands: Vec<(u32, Vec<LogPoint>)>,
}

impl Selection {
    pub fn triangles(&self) -> Vec<Triangle> {
        self.chosen.iter().copied().map(Triangle::unit).collect()
    }
}

/// Index `n` with `π/2ⁿ⁺¹ < |x| ≤ π/2ⁿ`.
pub fn band_index(x: f64) -> Result<u32> {
    if !(x >= -PI && x < 0.0) {
        return Err(invalid(format!(
            "apex abscissa {x} outside [-pi, 0); deep points take the small-module route"
        )));
    }
    let mut n = 0u32;
    let mut upper = PI;
    while -x <= 0.5 * upper {
        upper *= 0.5;
        n += 1;
    }
    Ok(n)
}

fn orient(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn on_segment(a: (f64, f64), b: (f64, f64), p: (f64, f64)) -> bool {
    p.0 >= a.0.min(b.0) && p.0 <= a.0.max(b.0) && p.1 >= a.1.min(b.1) && p.1 <= a.1.max(b.1)
}

/// Closed segment intersection by orientation signs.
fn segments_meet(p1: (f64, f64), p2: (f64, f64), q1: (f64, f64), q2: (f64, f64)) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn point_in_closed_triangle(v: &[(f64, f64); 3], p: (f64, f64)) -> bool {
    let a = orient(v[0], v[1], p);
    let b = orient(v[1], v[2], p);
    let c = orient(v[2], v[0], p);
    (a >= 0.0 && b >= 0.0 && c >= 0.0) || (a <= 0.0 && b <= 0.0 && c <= 0.0)
}

fn planar_triangles_meet(a: &[(f64, f64); 3], b: &[(f64, f64); 3]) -> bool {
    for i in 0..3 {
        for j in 0..3 {
            if segments_meet(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]) {
                return true;
            }
        }
    }
    point_in_closed_triangle(a, b[0]) || point_in_closed_triangle(b, a[0])
}

/// Intersection of two closed triangles in the quotient, tested in the
/// unrolled plane against the copies of `b` shifted by `0, ±2π`.
pub fn triangles_intersect(a: &Triangle, b: &Triangle) -> bool {
    let va = a.vertices();
    let vb = b.vertices();
    [-TAU, 0.0, TAU].iter().any(|&shift| {
        let vs = vb.map(|(x, y)| (x, y + shift));
        planar_triangles_meet(&va, &vs)
    })
}

/// Disjointness through the bases: sections shrink towards the apex, so two
/// triangles meet iff their base arcs do.
pub fn bases_disjoint(a: &Triangle, b: &Triangle) -> bool {
    circ_dist(a.apex.y(), b.apex.y()) > a.height() + b.height()
}

/// Greedy band-major selection of pairwise-disjoint `T(w)`.
pub fn select_disjoint(points: &[LogPoint]) -> Result<Selection> {
    let mut order = Vec::with_capacity(points.len());
    for p in points {
        order.push((band_index(p.x())?, *p));
    }
    order.sort_by(|(na, a), (nb, b)| {
        na.cmp(nb)
            .then(a.x().total_cmp(&b.x()))
            .then(a.y().total_cmp(&b.y()))
    });
    let mut chosen: Vec<LogPoint> = Vec::new();
    let mut bands: Vec<(u32, Vec<LogPoint>)> = Vec::new();
    for (n, p) in order {
        let t = Triangle::unit(p);
        if chosen
            .iter()
            .any(|c| triangles_intersect(&Triangle::unit(*c), &t))
        {
            continue;
        }
        chosen.push(p);
        match bands.last_mut() {
            Some((m, members)) if *m == n => members.push(p),
            _ => bands.push((n, vec![p])),
        }
    }
    Ok(Selection { chosen, bands })
}

/// Deterministic sample of a closed triangle: a `RASTER × RASTER` lattice of
/// abscissas and relative heights, plus the three vertices.
pub fn raster_samples(t: &Triangle) -> Vec<(f64, f64)> {
    let ax = t.apex_x();
    let y0 = t.apex.y();
    let mut out = Vec::with_capacity(RASTER * RASTER + 3);
    for i in 0..RASTER {
        let x = ax * (1.0 - (i as f64 + 0.5) / RASTER as f64);
        let half = x - ax;
        for j in 0..RASTER {
            let s = -1.0 + 2.0 * (j as f64 + 0.5) / RASTER as f64;
            out.push((x, y0 + s * half));
        }
    }
    out.extend(t.vertices());
    out
}

/// Membership for points given in unrolled coordinates; `x = 0` is allowed.
fn contains_xy(t: &Triangle, p: (f64, f64)) -> bool {
    let ax = t.apex_x();
    p.0 >= ax && p.0 <= 0.0 && circ_dist(p.1, t.apex.y()) <= p.0 - ax + 1e-12
}

/// A sample point of an input triangle not covered by any `T₅` of the selection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub apex: LogPoint,
    pub sample: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub ok: bool,
    pub samples: usize,
    pub witness: Option<Witness>,
}

/// Checks `⋃ T(w) ⊂ ⋃ T₅(wᵢ)` on [`raster_samples`] of every input triangle.
pub fn containment_check(points: &[LogPoint], sel: &Selection) -> ContainmentReport {
    let fives: Vec<Triangle> = sel.chosen.iter().copied().map(Triangle::five).collect();
    let units = sel.triangles();
    let mut samples = 0;
    for p in points {
        let t = Triangle::unit(*p);
        // chosen triangles meeting T(w) are the likely covers; try them first
        let (mut cands, rest): (Vec<usize>, Vec<usize>) =
            (0..units.len()).partition(|&i| triangles_intersect(&units[i], &t));
        cands.extend(rest);
        for s in raster_samples(&t) {
            samples += 1;
            if !cands.iter().any(|&i| contains_xy(&fives[i], s)) {
                return ContainmentReport {
                    ok: false,
                    samples,
                    witness: Some(Witness {
                        apex: *p,
                        sample: s,
                    }),
                };
            }
        }
    }
    ContainmentReport {
        ok: true,
        samples,
        witness: None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AreaReport {
    pub sum_sel: f64,
    pub union_all: f64,
    /// `union_all / sum_sel`, or 1 for an empty input.
    pub ratio: f64,
    pub holds: bool,
}

/// Area of the selection against the area of the whole union.
pub fn area_inequalities(points: &[LogPoint], sel: &Selection) -> AreaReport {
    let sum_sel: f64 = sel.triangles().iter().map(Triangle::area).sum();
    let all: Vec<Triangle> = points.iter().copied().map(Triangle::unit).collect();
    let union_all = union_area(&all);
    let ratio = if sum_sel > 0.0 { union_all / sum_sel } else { 1.0 };
    let slack = 1e-12 * sum_sel.max(union_all);
    AreaReport {
        sum_sel,
        union_all,
        ratio,
        holds: sum_sel <= union_all + slack && union_all <= C3 * sum_sel + slack,
    }
}
