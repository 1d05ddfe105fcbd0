//! Closed chains of points with bounded hyperbolic steps that wind around the
//! origin, and the resulting upper bound on the conformal radius of the
//! punctured disk.

pub mod cone;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::closed_form::{hyp_dist_disk, ln_u_over_sinh};
use crate::crz::Constants;
use crate::cylgeom::{
    coverage_gap, greedy_triple_cover, interval_i, union_area, CircleInterval, LogPoint, Triangle,
};
use crate::error::{invalid, Error, Result};

pub use cone::{
    choose_u, cone_length, cone_length_full_strip, cone_length_upper_bound, ConeGrid, ConeLength,
};

/// Ratio bound used when a chain point lies in `|z| ≤ e^{−π}`.
pub const NEAR_ORIGIN_RATIO: f64 = 0.4;

const STEP_SLACK: f64 = 1e-9;

/// A closed chain `z₀, …, z_{n−1}` (indices mod `n`) with step bound `d`.
/// `paths[i]`, when present, joins `z_i` to `z_{i+1}` through its vertices by
/// geodesic pieces; otherwise a single geodesic is used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Chain {
    pub points: Vec<[f64; 2]>,
    pub d: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paths: Option<Vec<Vec<[f64; 2]>>>,
}

fn c(p: [f64; 2]) -> Complex64 {
    Complex64::new(p[0], p[1])
}

/// Signed angle swept about the origin by the geodesic from `a` to `b`; it
/// subtends less than a half-turn unless it passes through 0.
fn sweep(a: Complex64, b: Complex64) -> Result<f64> {
    let q = b / a;
    if q.im.abs() <= 1e-14 * q.norm() && q.re < 0.0 {
        return Err(Error::InvalidChain(
            "a step passes through the origin".into(),
        ));
    }
    Ok(q.arg())
}

/// Validated chain data shared by the bound and the cover check.
#[derive(Clone, Debug)]
struct Prepared {
    z: Vec<Complex64>,
    steps: Vec<f64>,
    winding: i64,
}

fn prepare(chain: &Chain) -> Result<Prepared> {
    let n = chain.points.len();
    if n == 0 {
        return Err(Error::InvalidChain("a chain needs at least one point".into()));
    }
    if !(chain.d > 0.0) || !chain.d.is_finite() {
        return Err(invalid(format!("step bound d must be positive, got {}", chain.d)));
    }
    let z: Vec<Complex64> = chain.points.iter().map(|&p| c(p)).collect();
    for &p in &z {
        if !(p.norm() < 1.0) {
            return Err(Error::OutsideDisk { re: p.re, im: p.im });
        }
        if p.norm() == 0.0 {
            return Err(Error::InvalidChain("chain points must be nonzero".into()));
        }
    }
    let mut steps = Vec::with_capacity(n);
    let mut turn = 0.0;
    match &chain.paths {
        None => {
            for i in 0..n {
                let (a, b) = (z[i], z[(i + 1) % n]);
                steps.push(hyp_dist_disk(a, b)?);
                turn += sweep(a, b)?;
            }
        }
        Some(paths) => {
            if paths.len() != n {
                return Err(Error::InvalidChain(format!(
                    "expected {n} paths, got {}",
                    paths.len()
                )));
            }
            for (i, path) in paths.iter().enumerate() {
                let pts: Vec<Complex64> = path.iter().map(|&p| c(p)).collect();
                if pts.len() < 2 {
                    return Err(Error::InvalidChain(format!("path {i} has fewer than 2 vertices")));
                }
                let (a, b) = (z[i], z[(i + 1) % n]);
                if (pts[0] - a).norm() > 1e-9 || (pts[pts.len() - 1] - b).norm() > 1e-9 {
                    return Err(Error::InvalidChain(format!(
                        "path {i} does not join point {i} to point {}",
                        (i + 1) % n
                    )));
                }
                let mut len = 0.0;
                for s in pts.windows(2) {
                    if !(s[1].norm() < 1.0) {
                        return Err(Error::OutsideDisk { re: s[1].re, im: s[1].im });
                    }
                    if s[1].norm() == 0.0 {
                        return Err(Error::InvalidChain(format!("path {i} meets the origin")));
                    }
                    len += hyp_dist_disk(s[0], s[1])?;
                    turn += sweep(s[0], s[1])?;
                }
                steps.push(len);
            }
        }
    }
    for (i, &s) in steps.iter().enumerate() {
        if s > chain.d * (1.0 + STEP_SLACK) {
            return Err(Error::InvalidChain(format!(
                "step {i} has hyperbolic length {s} > d = {}",
                chain.d
            )));
        }
    }
    let turns = turn / TAU;
    let winding = turns.round();
    if (turns - winding).abs() > 0.25 {
        return Err(Error::InvalidChain(format!(
            "path closure error: winding {turns} is not an integer"
        )));
    }
    let winding = winding as i64;
    if winding.abs() < 1 {
        return Err(Error::Winding(winding));
    }
    Ok(Prepared { z, steps, winding })
}

/// Whether the intervals `I(z_i)` of the chain cover the circle; on failure
/// the escaping angle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CoverCheck {
    pub u: f64,
    pub covered: bool,
    pub escaping_angle: Option<f64>,
}

fn intervals(z: &[Complex64], u: f64) -> Result<Vec<(LogPoint, CircleInterval)>> {
    z.iter()
        .map(|&p| {
            let w = LogPoint::from_disk(p)?;
            Ok((w, interval_i(w, u)?))
        })
        .collect()
}

/// Cover check for chains whose points all lie in `|z| > e^{−π}`.
pub fn verify_interval_cover(chain: &Chain, u: f64) -> Result<CoverCheck> {
    let p = prepare(chain)?;
    if p.z.iter().any(|z| z.norm() <= (-PI).exp()) {
        return Err(invalid("cover check applies only when every point has |z| > e^-pi"));
    }
    let ivs: Vec<CircleInterval> = intervals(&p.z, u)?.into_iter().map(|(_, i)| i).collect();
    let gap = coverage_gap(&ivs);
    Ok(CoverCheck {
        u,
        covered: gap.is_none(),
        escaping_angle: gap,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChainBranch {
    /// Some point lies in `|z| ≤ e^{−π}`.
    NearOrigin,
    /// The intervals cover the circle and a disjoint triple cover is used.
    Cover,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainReport {
    pub n: usize,
    pub winding: i64,
    pub max_step: f64,
    pub d: f64,
    /// `max |z_i|`.
    pub m: f64,
    pub u: f64,
    pub branch: ChainBranch,
    /// `K(d)` with `1/K(d) = min(0.4, K u / 6π)`.
    pub k_of_d: f64,
    /// `ln m / K(d)`.
    pub ln_r_upper: f64,
    /// Bound given by the branch actually taken.
    pub ln_r_branch: f64,
    /// Number of pairwise-disjoint intervals in the triple cover.
    pub selected: usize,
    /// `Σ (Re w)²` over the selected points.
    pub area_sum: f64,
    /// `Σ (Re w)² ≥ (u/3) |ln m|`.
    pub area_bound_holds: bool,
    /// `−K a` with the exact area functional of the chain's triangles.
    pub ln_r_area: f64,
    /// `min_i ln r_point(u_i)`, the radius bound from a single puncture.
    pub ln_r_point: f64,
}

/// Upper bound on `ln r` for `𝔻 ∖ {z_i}`, with its intermediate quantities.
pub fn chain_bound(chain: &Chain, constants: &Constants) -> Result<ChainReport> {
    let p = prepare(chain)?;
    let u = choose_u(chain.d)?;
    let k = constants.k;
    let k_of_d = 1.0 / NEAR_ORIGIN_RATIO.min(k * u / (6.0 * PI));
    let m = p.z.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let ln_m = m.ln();
    let logs: Vec<LogPoint> = p
        .z
        .iter()
        .map(|&z| LogPoint::from_disk(z))
        .collect::<Result<_>>()?;
    let ln_r_point = logs
        .iter()
        .map(|w| ln_u_over_sinh(w.depth()))
        .fold(f64::INFINITY, f64::min);
    let tris: Vec<Triangle> = logs.iter().map(|&w| Triangle::unit(w)).collect();
    let a_exact = union_area(&tris) / TAU;

    let near = p.z.iter().any(|z| z.norm() <= (-PI).exp());
    let (branch, ln_r_branch, selected, area_sum, area_bound_holds) = if near {
        (ChainBranch::NearOrigin, NEAR_ORIGIN_RATIO * ln_m, 0, 0.0, true)
    } else {
        let ivs = intervals(&p.z, u)?;
        let only: Vec<CircleInterval> = ivs.iter().map(|(_, i)| *i).collect();
        if let Some(gap) = coverage_gap(&only) {
            return Err(Error::CoverFailure {
                u,
                escaping_angle: gap,
            });
        }
        let chosen = greedy_triple_cover(&only).map_err(|e| match e {
            Error::NotCovering { gap } => Error::CoverFailure {
                u,
                escaping_angle: gap,
            },
            other => other,
        })?;
        // recover the depth of each selected interval; capped (full) intervals
        // take the smallest matching depth
        let mut used = vec![false; ivs.len()];
        let mut sum = 0.0;
        for s in &chosen {
            let best = ivs
                .iter()
                .enumerate()
                .filter(|(i, (_, iv))| !used[*i] && iv == s)
                .min_by(|a, b| a.1 .0.depth().total_cmp(&b.1 .0.depth()))
                .map(|(i, (w, _))| (i, w.depth()));
            if let Some((i, depth)) = best {
                used[i] = true;
                sum += depth * depth;
            }
        }
        let holds = sum >= (u / 3.0) * ln_m.abs() * (1.0 - 1e-12);
        let ln_r = -(k * u / (6.0 * PI)) * ln_m.abs();
        (ChainBranch::Cover, ln_r, chosen.len(), sum, holds)
    };
    Ok(ChainReport {
        n: p.z.len(),
        winding: p.winding,
        max_step: p.steps.iter().copied().fold(0.0, f64::max),
        d: chain.d,
        m,
        u,
        branch,
        k_of_d,
        ln_r_upper: ln_m / k_of_d,
        ln_r_branch,
        selected,
        area_sum,
        area_bound_holds,
        ln_r_area: -k * a_exact,
        ln_r_point,
    })
}

/// Holomorphic self-map of the disk fixing 0:
/// `z ↦ ρ e^{iθ} z ∏ (z − a_k)/(1 − ā_k z)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestMap {
    pub rotation: f64,
    pub zeros: Vec<[f64; 2]>,
    pub contraction: f64,
}

impl TestMap {
    pub fn rotation(theta: f64) -> Self {
        Self {
            rotation: theta,
            zeros: Vec::new(),
            contraction: 1.0,
        }
    }

    pub fn degree(&self) -> usize {
        1 + self.zeros.len()
    }

    pub fn apply(&self, z: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let mut f = z * Complex64::from_polar(self.contraction, self.rotation);
        for &a in &self.zeros {
            let a = c(a);
            f *= (z - a) / (one - a.conj() * z);
        }
        f
    }

    fn validate(&self) -> Result<()> {
        if !(self.contraction > 0.0 && self.contraction <= 1.0) {
            return Err(invalid("map contraction must lie in (0, 1]"));
        }
        if self.zeros.len() > 2 {
            return Err(invalid("test maps have degree at most 3"));
        }
        if self.zeros.iter().any(|&a| !(c(a).norm() < 1.0)) {
            return Err(invalid("map zeros must lie in the disk"));
        }
        Ok(())
    }
}

/// Rotations, Blaschke products of degree 2 and 3, and radial contractions.
pub fn standard_test_maps() -> Vec<TestMap> {
    vec![
        TestMap::rotation(0.0),
        TestMap::rotation(1.3),
        TestMap {
            rotation: 0.4,
            zeros: vec![[0.2, 0.1]],
            contraction: 1.0,
        },
        TestMap {
            rotation: -0.7,
            zeros: vec![[-0.3, 0.25]],
            contraction: 0.9,
        },
        TestMap {
            rotation: 2.1,
            zeros: vec![[0.15, -0.2], [-0.1, -0.25]],
            contraction: 1.0,
        },
        TestMap {
            rotation: 0.0,
            zeros: Vec::new(),
            contraction: 0.8,
        },
        TestMap {
            rotation: 0.9,
            zeros: vec![[0.6, 0.0]],
            contraction: 0.95,
        },
    ]
}

/// Hyperbolic distance between consecutive points of `r 𝕌_q`.
pub fn polygon_step(r: f64, q: u32) -> f64 {
    let a = Complex64::new(r, 0.0);
    let b = Complex64::from_polar(r, TAU / q as f64);
    crate::closed_form::hyp_dist_unchecked(a, b)
}

/// `R(d) = max q |ln r_q*|` over the feasible `q ∈ [3, q_max]`, where
/// `r_q* ∈ [e^{−1}, 1)` is the largest radius with step at most `d`.
pub fn threshold_r(d: f64, q_max: u32) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() || q_max < 3 {
        return Err(invalid("threshold needs d > 0 and q_max >= 3"));
    }
    let r_min = (-1.0f64).exp();
    let mut best: Option<f64> = None;
    for q in 3..=q_max {
        if polygon_step(r_min, q) > d {
            continue;
        }
        let (mut lo, mut hi) = (r_min, 1.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            if polygon_step(mid, q) <= d {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let v = q as f64 * lo.ln().abs();
        best = Some(best.map_or(v, |b: f64| b.max(v)));
    }
    best.ok_or_else(|| invalid(format!("no q <= {q_max} gives steps <= {d} with r >= e^-1")))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalLemmaCase {
    pub map: usize,
    pub degree: usize,
    pub report: ChainReport,
    /// `ln r / K(d)`.
    pub ln_r_final: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FinalLemmaReport {
    pub d: f64,
    pub r: f64,
    pub q: u32,
    pub threshold: f64,
    pub checked: usize,
    pub skipped: usize,
    pub failures: usize,
    pub cases: Vec<FinalLemmaCase>,
}

const ARC_SAMPLES: usize = 48;

/// Samples of the geodesic from `a` to `b`.
fn geodesic_samples(a: Complex64, b: Complex64, n: usize) -> Vec<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let phi = (b - a) / (one - a.conj() * b);
    (0..=n)
        .map(|k| {
            let t = phi * (k as f64 / n as f64);
            (t + a) / (one + a.conj() * t)
        })
        .collect()
}

/// Runs the chain bound on the images of `r 𝕌_q` under each test map. Maps
/// whose image chain violates a hypothesis (step, winding, origin) are
/// skipped and counted.
pub fn final_lemma_check(
    maps: &[TestMap],
    d: f64,
    r: f64,
    q: u32,
    constants: &Constants,
) -> Result<FinalLemmaReport> {
    if !(r > 0.0 && r < 1.0) || q < 3 {
        return Err(invalid("final check needs 0 < r < 1 and q >= 3"));
    }
    let threshold = threshold_r(d, 4096)?;
    let base: Vec<Complex64> = (0..q)
        .map(|k| Complex64::from_polar(r, TAU * k as f64 / q as f64))
        .collect();
    let mut cases = Vec::new();
    let mut skipped = 0;
    for (mi, map) in maps.iter().enumerate() {
        map.validate()?;
        let points: Vec<[f64; 2]> = base
            .iter()
            .map(|&z| {
                let w = map.apply(z);
                [w.re, w.im]
            })
            .collect();
        let paths: Vec<Vec<[f64; 2]>> = (0..q as usize)
            .map(|k| {
                geodesic_samples(base[k], base[(k + 1) % q as usize], ARC_SAMPLES)
                    .into_iter()
                    .enumerate()
                    .map(|(j, z)| {
                        // endpoints exactly on the chain points
                        let w = if j == 0 {
                            c(points[k])
                        } else if j == ARC_SAMPLES {
                            c(points[(k + 1) % q as usize])
                        } else {
                            map.apply(z)
                        };
                        [w.re, w.im]
                    })
                    .collect()
            })
            .collect();
        let chain = Chain {
            points,
            d,
            paths: Some(paths),
        };
        match chain_bound(&chain, constants) {
            Ok(report) => {
                let ln_r_final = r.ln() / report.k_of_d;
                let pass = report.k_of_d >= 1.0
                    && report.ln_r_upper < 0.0
                    && report.ln_r_upper <= ln_r_final + 1e-12
                    && report.area_bound_holds;
                cases.push(FinalLemmaCase {
                    map: mi,
                    degree: map.degree(),
                    report,
                    ln_r_final,
                    pass,
                });
            }
            Err(Error::InvalidChain(_)) | Err(Error::Winding(_)) | Err(Error::OutsideDisk { .. }) => {
                skipped += 1
            }
            Err(e) => return Err(e),
        }
    }
    let failures = cases.iter().filter(|c| !c.pass).count();
    Ok(FinalLemmaReport {
        d,
        r,
        q,
        threshold,
        checked: cases.len(),
        skipped,
        failures,
        cases,
    })
}
