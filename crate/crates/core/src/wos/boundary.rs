//! Distance queries against the boundary of a slit disk.
//!
//! Curved edges of triangle and model-domain removals are straight in log
//! coordinates; they are exponentiated and flattened into a polyline by
//! midpoint-sag subdivision. Geodesic cuts stay analytic, as does the unit
//! circle.

use num_complex::Complex64;

use super::{Removal, DomainSpec};
use crate::error::{Error, Result};

/// Minimum number of segments per curved removal.
pub const MIN_SEGMENTS: usize = 32;

/// Segment count above which queries go through the bounding-volume tree.
pub const BVH_THRESHOLD: usize = 256;

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub a: Complex64,
    pub b: Complex64,
}

impl Segment {
    /// Closest point of the segment to `z` and the squared distance to it.
    #[inline]
    pub fn closest(&self, z: Complex64) -> (Complex64, f64) {
        let ab = self.b - self.a;
        let len2 = ab.norm_sqr();
        let t = if len2 > 0.0 {
            (((z - self.a) * ab.conj()).re / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let p = self.a + ab * t;
        (p, (z - p).norm_sqr())
    }
}

/// The disk `|z − c| < R` cut off by the geodesic through `x` orthogonal to
/// the real axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthoDisk {
    pub center: f64,
    pub radius: f64,
}

impl OrthoDisk {
    pub fn through(x: f64) -> Self {
        Self {
            center: (1.0 + x * x) / (2.0 * x),
            radius: (1.0 - x * x) / (2.0 * x),
        }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }

    fn closest(&self, z: Complex64) -> (Complex64, f64) {
        let v = z - self.center;
        let n = v.norm();
        let p = if n > 0.0 {
            self.center + v * (self.radius / n)
        } else {
            Complex64::new(self.center - self.radius, 0.0)
        };
        (p, (n - self.radius).max(0.0))
    }
}

#[derive(Clone, Copy, Debug)]
struct Aabb {
    lo: (f64, f64),
    hi: (f64, f64),
}

impl Aabb {
    fn of(s: &Segment) -> Self {
        Self {
            lo: (s.a.re.min(s.b.re), s.a.im.min(s.b.im)),
            hi: (s.a.re.max(s.b.re), s.a.im.max(s.b.im)),
        }
    }

    fn merge(&self, o: &Aabb) -> Self {
        Self {
            lo: (self.lo.0.min(o.lo.0), self.lo.1.min(o.lo.1)),
            hi: (self.hi.0.max(o.hi.0), self.hi.1.max(o.hi.1)),
        }
    }

    #[inline]
    fn dist2(&self, z: Complex64) -> f64 {
        let dx = (self.lo.0 - z.re).max(0.0).max(z.re - self.hi.0);
        let dy = (self.lo.1 - z.im).max(0.0).max(z.im - self.hi.1);
        dx * dx + dy * dy
    }
}

#[derive(Clone, Copy, Debug)]
enum NodeKind {
    Leaf { start: usize, end: usize },
    Inner { left: usize, right: usize },
}

#[derive(Clone, Copy, Debug)]
struct Node {
    bbox: Aabb,
    kind: NodeKind,
}

/// Bounding-volume hierarchy over a segment list, split at the median of the
/// longer axis.
#[derive(Clone, Debug)]
struct Bvh {
    nodes: Vec<Node>,
}

impl Bvh {
    /// Builds the tree, reordering `segments` so leaves own contiguous ranges.
    fn build(segments: &mut [Segment]) -> Self {
        let mut nodes = Vec::with_capacity(2 * segments.len() / LEAF_SIZE + 1);
        Self::build_rec(segments, 0, &mut nodes);
        Self { nodes }
    }

    fn build_rec(segs: &mut [Segment], offset: usize, nodes: &mut Vec<Node>) -> usize {
        let bbox = segs
            .iter()
            .map(Aabb::of)
            .reduce(|a, b| a.merge(&b))
            .expect("non-empty range");
        let id = nodes.len();
        if segs.len() <= LEAF_SIZE {
            nodes.push(Node {
                bbox,
                kind: NodeKind::Leaf {
                    start: offset,
                    end: offset + segs.len(),
                },
            });
            return id;
        }
        nodes.push(Node {
            bbox,
            kind: NodeKind::Leaf { start: 0, end: 0 },
        });
        let wide = bbox.hi.0 - bbox.lo.0 >= bbox.hi.1 - bbox.lo.1;
        let key = |s: &Segment| {
            let m = 0.5 * (s.a + s.b);
            if wide {
                m.re
            } else {
                m.im
            }
        };
        let mid = segs.len() / 2;
        segs.select_nth_unstable_by(mid, |a, b| key(a).total_cmp(&key(b)));
        let (l, r) = segs.split_at_mut(mid);
        let left = Self::build_rec(l, offset, nodes);
        let right = Self::build_rec(r, offset + mid, nodes);
        nodes[id].kind = NodeKind::Inner { left, right };
        id
    }

    fn nearest(&self, segs: &[Segment], z: Complex64, best: &mut (Complex64, f64)) {
        let mut stack = [0usize; 64];
        let mut top = 1;
        while top > 0 {
            top -= 1;
            let node = &self.nodes[stack[top]];
            if node.bbox.dist2(z) >= best.1 {
                continue;
            }
            match node.kind {
                NodeKind::Leaf { start, end } => {
                    for s in &segs[start..end] {
                        let (p, d2) = s.closest(z);
                        if d2 < best.1 {
                            *best = (p, d2);
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.nodes[left].bbox.dist2(z);
                    let dr = self.nodes[right].bbox.dist2(z);
                    // visit the nearer child first
                    let (near, far) = if dl <= dr { (left, right) } else { (right, left) };
                    stack[top] = far;
                    stack[top + 1] = near;
                    top += 2;
                }
            }
        }
    }
}

/// What the nearest boundary point belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hit {
    UnitCircle,
    Polyline,
    Geodesic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Nearest {
    pub dist: f64,
    pub point: Complex64,
    pub hit: Hit,
}

/// Polyline approximation of the removal boundaries plus the analytic parts.
#[derive(Clone, Debug)]
pub struct PolyBoundary {
    pub segments: Vec<Segment>,
    pub disks: Vec<OrthoDisk>,
    /// Segment count contributed by each removal, in spec order.
    pub per_removal: Vec<usize>,
    /// Largest flattening tolerance used.
    pub tolerance: f64,
    bvh: Option<Bvh>,
}

impl PolyBoundary {
    pub fn nearest(&self, z: Complex64) -> Nearest {
        let m = z.norm();
        let circle = 1.0 - m;
        let mut best = Nearest {
            dist: circle,
            point: if m > 0.0 { z / m } else { Complex64::new(1.0, 0.0) },
            hit: Hit::UnitCircle,
        };
        for d in &self.disks {
            let (p, dist) = d.closest(z);
            if dist < best.dist {
                best = Nearest {
                    dist,
                    point: p,
                    hit: Hit::Geodesic,
                };
            }
        }
        let mut seg_best = (best.point, best.dist * best.dist);
        match &self.bvh {
            Some(bvh) => bvh.nearest(&self.segments, z, &mut seg_best),
            None => {
                for s in &self.segments {
                    let (p, d2) = s.closest(z);
                    if d2 < seg_best.1 {
                        seg_best = (p, d2);
                    }
                }
            }
        }
        if seg_best.1 < best.dist * best.dist {
            best = Nearest {
                dist: seg_best.1.sqrt(),
                point: seg_best.0,
                hit: Hit::Polyline,
            };
        }
        best
    }

    /// Distance to the exact boundary is at least `nearest().dist − tolerance`.
    pub fn safe_radius(&self, z: Complex64) -> (f64, Nearest) {
        let n = self.nearest(z);
        ((n.dist - self.tolerance).max(0.0), n)
    }
}

/// A path that is affine in log coordinates, `x + iy ↦ exp(x + iy)`.
#[derive(Clone, Copy, Debug)]
struct LogEdge {
    from: (f64, f64),
    to: (f64, f64),
}

impl LogEdge {
    fn at(&self, t: f64) -> Complex64 {
        let x = self.from.0 + t * (self.to.0 - self.from.0);
        let y = self.from.1 + t * (self.to.1 - self.from.1);
        Complex64::from_polar(x.exp(), y)
    }

    fn log_length(&self) -> f64 {
        (self.to.0 - self.from.0).hypot(self.to.1 - self.from.1)
    }
}

/// The log-coordinate polyline of a curved removal's boundary.
fn log_edges(r: &Removal) -> Vec<LogEdge> {
    use std::f64::consts::PI;
    match r {
        Removal::Triangle(t) => {
            let (ax, y, h) = (t.apex_x(), t.apex.y(), t.height());
            let tm = h.min(PI);
            vec![
                LogEdge {
                    from: (ax + tm, y - tm),
                    to: (ax, y),
                },
                LogEdge {
                    from: (ax, y),
                    to: (ax + tm, y + tm),
                },
            ]
        }
        Removal::ModelE(e) => {
            let u = e.depth();
            let y = e.anchor.y();
            if u >= PI {
                return Vec::new();
            }
            if 2.0 * u <= PI {
                let p = [
                    (0.0, y + u),
                    (-u, y + 2.0 * u),
                    (-u, y + 2.0 * PI - 2.0 * u),
                    (0.0, y + 2.0 * PI - u),
                ];
                p.windows(2)
                    .filter(|w| w[0] != w[1])
                    .map(|w| LogEdge { from: w[0], to: w[1] })
                    .collect()
            } else {
                let m = (-(PI - u), y + PI);
                vec![
                    LogEdge {
                        from: (0.0, y + u),
                        to: m,
                    },
                    LogEdge {
                        from: m,
                        to: (0.0, y + 2.0 * PI - u),
                    },
                ]
            }
        }
        Removal::Puncture(_) | Removal::GeodesicCut(_) => Vec::new(),
    }
}

/// Flattens one edge, splitting while the chord midpoint sags more than `tol`.
fn flatten(edge: &LogEdge, min_pieces: usize, tol: f64, out: &mut Vec<Segment>) {
    fn rec(e: &LogEdge, t0: f64, t1: f64, a: Complex64, b: Complex64, tol: f64, depth: u32, out: &mut Vec<Segment>) {
        let tm = 0.5 * (t0 + t1);
        let m = e.at(tm);
        if depth < 40 && (m - 0.5 * (a + b)).norm() > tol {
            rec(e, t0, tm, a, m, tol, depth + 1, out);
            rec(e, tm, t1, m, b, tol, depth + 1, out);
        } else {
            out.push(Segment { a, b });
        }
    }
    for k in 0..min_pieces {
        let t0 = k as f64 / min_pieces as f64;
        let t1 = (k + 1) as f64 / min_pieces as f64;
        rec(edge, t0, t1, edge.at(t0), edge.at(t1), tol, 0, out);
    }
}

/// Builds the distance structure for a puncture-free spec.
pub fn polygonalize(spec: &DomainSpec) -> Result<PolyBoundary> {
    let mut segments = Vec::new();
    let mut disks = Vec::new();
    let mut per_removal = Vec::with_capacity(spec.removals.len());
    let mut tolerance: f64 = 0.0;
    for r in &spec.removals {
        match r {
            Removal::Puncture(z) => {
                return Err(Error::UnsupportedDomain(format!(
                    "puncture at ({}, {}) is invisible to Brownian motion; use a triangle proxy",
                    z.re, z.im
                )))
            }
            Removal::GeodesicCut(x) => {
                disks.push(OrthoDisk::through(*x));
                per_removal.push(0);
            }
            _ => {
                let edges = log_edges(r);
                if edges.is_empty() {
                    per_removal.push(0);
                    continue;
                }
                let pts: Vec<Complex64> = edges
                    .iter()
                    .flat_map(|e| (0..=16).map(move |k| e.at(k as f64 / 16.0)))
                    .collect();
                let (lo, hi) = pts.iter().fold(
                    ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY)),
                    |(lo, hi), p| ((lo.0.min(p.re), lo.1.min(p.im)), (hi.0.max(p.re), hi.1.max(p.im))),
                );
                let diam = (hi.0 - lo.0).hypot(hi.1 - lo.1);
                let tol = (1e-4 * diam).min(1e-5);
                tolerance = tolerance.max(tol);
                let total: f64 = edges.iter().map(LogEdge::log_length).sum();
                let before = segments.len();
                for e in &edges {
                    let share = (MIN_SEGMENTS as f64 * e.log_length() / total).ceil() as usize;
                    flatten(e, share.max(1), tol, &mut segments);
                }
                per_removal.push(segments.len() - before);
            }
        }
    }
    let bvh = (segments.len() > BVH_THRESHOLD).then(|| Bvh::build(&mut segments));
    Ok(PolyBoundary {
        segments,
        disks,
        per_removal,
        tolerance,
        bvh,
    })
}

/// Dense samples of the exact curved boundary, for Hausdorff checks.
pub fn boundary_samples(r: &Removal, per_edge: usize) -> Vec<Complex64> {
    log_edges(r)
        .iter()
        .flat_map(|e| (0..=per_edge).map(move |k| e.at(k as f64 / per_edge as f64)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cylgeom::{LogPoint, Scale, Triangle};

    fn spec(removals: Vec<Removal>) -> DomainSpec {
        DomainSpec { removals }
    }

    #[test]
    fn empty_spec_is_the_unit_circle() {
        let b = polygonalize(&spec(vec![])).unwrap();
        assert!(b.segments.is_empty() && b.disks.is_empty());
        let n = b.nearest(Complex64::new(0.3, 0.4));
        assert!((n.dist - 0.5).abs() < 1e-15 && n.hit == Hit::UnitCircle);
    }

    #[test]
    fn triangle_polyline_is_close_to_the_curve() {
        let t = Triangle::new(LogPoint::new(-1.0, 0.0).unwrap(), Scale::One);
        let r = Removal::Triangle(t);
        let b = polygonalize(&spec(vec![r])).unwrap();
        assert!(b.per_removal[0] >= MIN_SEGMENTS);
        let samples = boundary_samples(&r, 4000);
        let mut diam: f64 = 0.0;
        for p in &samples {
            for q in &samples {
                diam = diam.max((p - q).norm());
            }
        }
        // every true boundary point is near the polyline and vice versa
        let worst = samples
            .iter()
            .map(|p| b.segments.iter().map(|s| s.closest(*p).1).fold(f64::INFINITY, f64::min).sqrt())
            .fold(0.0, f64::max);
        assert!(worst <= 1e-4 * diam, "{worst}");
        let dense: Vec<Segment> = samples.windows(2).map(|w| Segment { a: w[0], b: w[1] }).collect();
        for s in &b.segments {
            let m = 0.5 * (s.a + s.b);
            let d = dense.iter().map(|q| q.closest(m).1).fold(f64::INFINITY, f64::min).sqrt();
            assert!(d <= 1e-4 * diam, "{d}");
        }
    }

    #[test]
    fn bvh_matches_brute_force() {
        let mut removals = Vec::new();
        for k in 0..12 {
            let apex = LogPoint::new(-0.1 - 0.03 * k as f64, 0.5 * k as f64).unwrap();
            removals.push(Removal::Triangle(Triangle::five(apex)));
        }
        let b = polygonalize(&spec(removals)).unwrap();
        assert!(b.segments.len() > BVH_THRESHOLD);
        for k in 0..200 {
            let z = Complex64::from_polar(0.95 * (k as f64 / 200.0).sqrt(), 0.37 * k as f64);
            let fast = b.nearest(z);
            let brute = b
                .segments
                .iter()
                .map(|s| s.closest(z).1)
                .fold((1.0 - z.norm()).powi(2), f64::min)
                .sqrt();
            assert!((fast.dist - brute).abs() < 1e-15, "{z}");
        }
    }

    #[test]
    fn geodesic_disk_passes_through_x() {
        let d = OrthoDisk::through(0.4);
        let (p, dist) = d.closest(Complex64::new(0.0, 0.0));
        assert!((p.re - 0.4).abs() < 1e-15 && (dist - 0.4).abs() < 1e-15);
        // orthogonal to the unit circle: c² = 1 + R²
        assert!((d.center * d.center - 1.0 - d.radius * d.radius).abs() < 1e-12);
    }

    #[test]
    fn model_domain_boundary_is_continuous() {
        for &u in &[0.3, 1.0, 2.0] {
            let e = crate::cylgeom::ModelDomainE::new(LogPoint::new(-u, 1.0).unwrap());
            let edges = log_edges(&Removal::ModelE(e));
            for w in edges.windows(2) {
                assert_eq!(w[0].to, w[1].from);
            }
            let first = edges.first().unwrap().at(0.0);
            let last = edges.last().unwrap().at(1.0);
            assert!((first.norm() - 1.0).abs() < 1e-15 && (last.norm() - 1.0).abs() < 1e-15);
        }
    }
}
