//! Walk-on-spheres estimates of conformal radius and Green's function for
//! subdomains of the unit disk.
//!
//! For a simply connected `U ∋ 0`, `ln r = E[ln |Z|]` where `Z` is the exit
//! point of Brownian motion started at the origin. Each walk jumps to a
//! uniform point of the largest circle that fits, until it is within `eps`
//! of the boundary, where it is projected onto the nearest boundary point.

pub mod boundary;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{EstimateKind, RadiusEstimate};
use crate::cylgeom::{LogPoint, ModelDomainE, Scale, Triangle};
use crate::error::{invalid, Error, Result};

pub use boundary::{polygonalize, PolyBoundary};

/// Hard cap on steps per walk; a walk that reaches it is projected where it stands.
pub const MAX_STEPS: usize = 1_000_000;

pub const MIN_WALKS: usize = 1_000;
pub const EPS_RANGE: (f64, f64) = (1e-6, 1e-2);

/// One removed piece of the unit disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRemoval", into = "RawRemoval")]
pub enum Removal {
    Puncture(Complex64),
    Triangle(Triangle),
    /// The side away from the origin of the geodesic orthogonal to the real
    /// axis through `x ∈ (0, 1)`.
    GeodesicCut(f64),
    /// Complement of the model domain `E(z)`.
    ModelE(ModelDomainE),
}

/// The on-disk form of a [`Removal`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", deny_unknown_fields)]
pub enum RawRemoval {
    #[serde(rename = "puncture")]
    Puncture { z: [f64; 2] },
    #[serde(rename = "triangle")]
    Triangle { apex: [f64; 2] },
    #[serde(rename = "triangle5")]
    Triangle5 { apex: [f64; 2] },
    #[serde(rename = "geodesic")]
    Geodesic { x: f64 },
    #[serde(rename = "modelE")]
    ModelE { apex: [f64; 2] },
}

impl TryFrom<RawRemoval> for Removal {
    type Error = Error;

    fn try_from(raw: RawRemoval) -> Result<Self> {
        Ok(match raw {
            RawRemoval::Puncture { z } => {
                let z = Complex64::new(z[0], z[1]);
                if !(z.norm() > 0.0 && z.norm() < 1.0) {
                    return Err(invalid(format!(
                        "puncture ({}, {}) must lie in the punctured open disk",
                        z.re, z.im
                    )));
                }
                Removal::Puncture(z)
            }
            RawRemoval::Triangle { apex } => {
                Removal::Triangle(Triangle::unit(LogPoint::new(apex[0], apex[1])?))
            }
            RawRemoval::Triangle5 { apex } => {
                Removal::Triangle(Triangle::five(LogPoint::new(apex[0], apex[1])?))
            }
            RawRemoval::Geodesic { x } => {
                if !(x > 0.0 && x < 1.0) {
                    return Err(invalid(format!("geodesic cut needs x in (0, 1), got {x}")));
                }
                Removal::GeodesicCut(x)
            }
            RawRemoval::ModelE { apex } => {
                Removal::ModelE(ModelDomainE::new(LogPoint::new(apex[0], apex[1])?))
            }
        })
    }
}

impl From<Removal> for RawRemoval {
    fn from(r: Removal) -> Self {
        match r {
            Removal::Puncture(z) => RawRemoval::Puncture { z: [z.re, z.im] },
            Removal::Triangle(t) => {
                let apex = [t.apex.x(), t.apex.y()];
                match t.scale {
                    Scale::One => RawRemoval::Triangle { apex },
                    Scale::Five => RawRemoval::Triangle5 { apex },
                }
            }
            Removal::GeodesicCut(x) => RawRemoval::Geodesic { x },
            Removal::ModelE(e) => RawRemoval::ModelE {
                apex: [e.anchor.x(), e.anchor.y()],
            },
        }
    }
}

impl Removal {
    /// Closed membership of `z` in the removed set.
    pub fn contains(&self, z: Complex64) -> bool {
        match self {
            Removal::Puncture(p) => *p == z,
            Removal::Triangle(t) => match LogPoint::from_disk(z) {
                Ok(w) => t.contains(w),
                Err(_) => false,
            },
            Removal::GeodesicCut(x) => boundary::OrthoDisk::through(*x).contains(z),
            Removal::ModelE(e) => z.norm() > 0.0 && !e.contains(z),
        }
    }

    /// `|z|` of the removal point closest to the origin.
    pub fn inner_radius(&self) -> f64 {
        match self {
            Removal::Puncture(p) => p.norm(),
            Removal::Triangle(t) => t.apex_x().exp(),
            Removal::GeodesicCut(x) => *x,
            Removal::ModelE(e) => {
                if e.depth() >= PI {
                    1.0
                } else {
                    // the profile bottoms out at −u away from the bump, or at
                    // −(π − u) on the opposite side when the bump is wide
                    (-(e.depth().min(PI - e.depth()))).exp()
                }
            }
        }
    }
}

/// The unit disk minus a finite list of removals.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    pub removals: Vec<Removal>,
}

impl DomainSpec {
    pub fn new(removals: Vec<Removal>) -> Self {
        Self { removals }
    }

    pub fn has_punctures(&self) -> bool {
        self.removals.iter().any(|r| matches!(r, Removal::Puncture(_)))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.norm() < 1.0 && !self.removals.iter().any(|r| r.contains(z))
    }

    /// Concatenation of the two removal lists.
    pub fn union(&self, other: &DomainSpec) -> DomainSpec {
        let mut removals = self.removals.clone();
        removals.extend_from_slice(&other.removals);
        DomainSpec { removals }
    }
}

/// Walk parameters shared by the estimators.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub walks: usize,
    pub eps: f64,
    pub seed: u64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        Self {
            walks: 100_000,
            eps: 1e-4,
            seed: 0,
        }
    }
}

impl WalkConfig {
    pub fn new(walks: usize, eps: f64, seed: u64) -> Self {
        Self { walks, eps, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.walks < MIN_WALKS {
            return Err(invalid(format!(
                "at least {MIN_WALKS} walks are required, got {}",
                self.walks
            )));
        }
        if !(self.eps >= EPS_RANGE.0 && self.eps <= EPS_RANGE.1) {
            return Err(invalid(format!(
                "eps must lie in [{}, {}], got {}",
                EPS_RANGE.0, EPS_RANGE.1, self.eps
            )));
        }
        Ok(())
    }
}

/// Sample mean and standard error of the mean.
fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// One walk from `start`, returning `ln |exit point|`.
fn walk(b: &PolyBoundary, start: Complex64, eps: f64, rng: &mut ChaCha8Rng) -> f64 {
    let mut z = start;
    for _ in 0..MAX_STEPS {
        let (r, near) = b.safe_radius(z);
        if r <= eps {
            return near.point.norm().min(1.0).ln();
        }
        let theta: f64 = TAU * rng.gen::<f64>();
        z += Complex64::from_polar(r, theta);
    }
    b.nearest(z).point.norm().min(1.0).ln()
}

/// `ln |exit|` for every walk, in walk order.
pub fn exit_log_moduli(b: &PolyBoundary, start: Complex64, cfg: &WalkConfig) -> Vec<f64> {
    (0..cfg.walks as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(i);
            walk(b, start, cfg.eps, &mut rng)
        })
        .collect()
}

fn prepare(spec: &DomainSpec, cfg: &WalkConfig) -> Result<PolyBoundary> {
    cfg.validate()?;
    polygonalize(spec)
}

/// Monte-Carlo `ln r` of a puncture-free domain at the origin.
pub fn wos_ln_radius(spec: &DomainSpec, cfg: &WalkConfig) -> Result<RadiusEstimate> {
    let b = prepare(spec, cfg)?;
    let values = exit_log_moduli(&b, Complex64::new(0.0, 0.0), cfg);
    let (mean, se) = mean_and_error(&values);
    Ok(RadiusEstimate {
        ln_r: mean,
        std_err: se,
        kind: EstimateKind::MonteCarlo,
    })
}

/// Green's function `g(at, 0) = −ln |at| + E_at[ln |exit|]` and its standard error.
pub fn wos_green(spec: &DomainSpec, at: Complex64, cfg: &WalkConfig) -> Result<(f64, f64)> {
    let b = prepare(spec, cfg)?;
    if at.norm() == 0.0 || !spec.contains(at) {
        return Err(Error::OutsideDomain(at.re, at.im));
    }
    let values = exit_log_moduli(&b, at, cfg);
    let (mean, se) = mean_and_error(&values);
    Ok((-at.norm().ln() + mean, se))
}

/// `ln x′ / ln x` for the model domain anchored at `x`, where `x′` is the
/// modulus of the image of `x` under the uniformization of `E(x)` fixing 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LemmaERatio {
    pub x: f64,
    pub ratio: f64,
    pub std_err: f64,
}

pub fn lemma_e_ratio(x: f64, cfg: &WalkConfig) -> Result<LemmaERatio> {
    if !(x >= (-PI).exp() && x < 1.0) {
        return Err(invalid(format!("x must lie in [e^-pi, 1), got {x}")));
    }
    let anchor = LogPoint::new(x.ln(), 0.0)?;
    let spec = DomainSpec::new(vec![Removal::ModelE(ModelDomainE::new(anchor))]);
    let (g, se) = wos_green(&spec, Complex64::new(x, 0.0), cfg)?;
    let denom = -x.ln();
    Ok(LemmaERatio {
        x,
        ratio: g / denom,
        std_err: se / denom,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuperadditivityReport {
    pub ln_r_a: RadiusEstimate,
    pub ln_r_b: RadiusEstimate,
    pub ln_r_union: RadiusEstimate,
    /// `ln r(A ∪ B)`.
    pub lhs: f64,
    /// `ln r(A) + ln r(B)`.
    pub rhs: f64,
    pub combined_err: f64,
    pub pass: bool,
}

/// Compares `ln r(𝔻 \ (A ∪ B))` with `ln r(𝔻 \ A) + ln r(𝔻 \ B)` on shared seeds.
pub fn superadditivity_check(
    a: &DomainSpec,
    b: &DomainSpec,
    cfg: &WalkConfig,
) -> Result<SuperadditivityReport> {
    let ra = wos_ln_radius(a, cfg)?;
    let rb = wos_ln_radius(b, cfg)?;
    let ru = wos_ln_radius(&a.union(b), cfg)?;
    let combined = (ra.std_err.powi(2) + rb.std_err.powi(2) + ru.std_err.powi(2)).sqrt();
    let lhs = ru.ln_r;
    let rhs = ra.ln_r + rb.ln_r;
    Ok(SuperadditivityReport {
        ln_r_a: ra,
        ln_r_b: rb,
        ln_r_union: ru,
        lhs,
        rhs,
        combined_err: combined,
        pass: lhs >= rhs - 3.0 * combined,
    })
}

/// `−ln r / area(T₅)` for a single five-fold triangle of depth `u`, with the
/// planar area `(5u)²`.
pub fn five_triangle_ratio(u: f64, cfg: &WalkConfig) -> Result<(f64, f64)> {
    let apex = LogPoint::new(-u, 0.0)?;
    let t = Triangle::new(apex, Scale::Five);
    let est = wos_ln_radius(&DomainSpec::new(vec![Removal::Triangle(t)]), cfg)?;
    let area = (5.0 * u).powi(2);
    Ok((-est.ln_r / area, est.std_err / area))
}

/// Sets the global worker count from `FARADAY_THREADS` when it holds a
/// positive integer. Later calls are no-ops.
pub fn init_thread_pool() {
    if let Some(n) = std::env::var("FARADAY_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
