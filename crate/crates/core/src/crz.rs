//! Two-sided comparison of `−ln r` with the triangle area functional, and the
//! constant chain `K = 2π K₂ / C₃`, `K′ = 2π K₃ C₃`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::closed_form::{k1_bound, ln_u_over_sinh};
use crate::cylgeom::{union_area, LogPoint, ModelDomainE, Triangle};
use crate::error::{invalid, Result};
use crate::rect_hyp::{c1_constant, c2_constant};
use crate::vitali::C3;
use crate::wos::{wos_ln_radius, DomainSpec, Removal, WalkConfig};

/// Certified upper bound on the rectangle detour distance used in the chain.
pub const C2_BOUND: f64 = 1.0;

/// Upper constant for five-fold triangles: `8 / 2π`.
pub const K3: f64 = 8.0 / TAU;

/// Samples of the lower boundary used to express a model-domain removal as a
/// union of triangles.
const MODEL_E_SAMPLES: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Constants {
    #[serde(rename = "K1")]
    pub k1: f64,
    /// Computed detour distance.
    #[serde(rename = "C2")]
    pub c2: f64,
    /// The bound on `C2` that feeds the chain.
    #[serde(rename = "C2_bound")]
    pub c2_bound: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "K")]
    pub k: f64,
    #[serde(rename = "K3")]
    pub k3: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    #[serde(rename = "Kprime")]
    pub kprime: f64,
    #[serde(rename = "Kprime_over_K")]
    pub ratio: f64,
    /// `C1` and `K` recomputed from the computed `C2` instead of its bound.
    #[serde(rename = "C1_sharp")]
    pub c1_sharp: f64,
    #[serde(rename = "K_sharp")]
    pub k_sharp: f64,
}

/// Pass/fail of each stated inequality on the constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConstantChecks {
    pub k1_range: bool,
    pub c2_below_one: bool,
    pub c1_above: bool,
    pub kprime_is_200: bool,
    pub k_near_target: bool,
    pub ratio_near_target: bool,
}

impl ConstantChecks {
    pub fn all(&self) -> bool {
        self.k1_range
            && self.c2_below_one
            && self.c1_above
            && self.kprime_is_200
            && self.k_near_target
            && self.ratio_near_target
    }
}

impl Constants {
    pub fn checks(&self) -> ConstantChecks {
        ConstantChecks {
            k1_range: self.k1 > 0.13 && self.k1 <= 1.0 / 6.0,
            c2_below_one: self.c2 < 1.0,
            c1_above: self.c1 > 0.04,
            kprime_is_200: self.kprime == 200.0,
            k_near_target: self.k >= 1.0 / 40_000.0 && self.k <= 1.0 / 10_000.0,
            ratio_near_target: self.ratio >= 2e6 && self.ratio <= 8e6,
        }
    }
}

/// Assembles the constant chain from its computed ingredients.
pub fn assemble_constants() -> Result<Constants> {
    let k1 = k1_bound().k1;
    let c2 = c2_constant();
    let c1 = c1_constant(C2_BOUND)?;
    let k2 = c1 * c1 * k1;
    let k = TAU * k2 / C3;
    // 2π · (8/2π) · C3, kept exact
    let kprime = 8.0 * C3;
    let c1_sharp = c1_constant(c2)?;
    let k_sharp = TAU * c1_sharp * c1_sharp * k1 / C3;
    Ok(Constants {
        k1,
        c2,
        c2_bound: C2_BOUND,
        c1,
        k2,
        k,
        k3: K3,
        c3: C3,
        kprime,
        ratio: kprime / k,
        c1_sharp,
        k_sharp,
    })
}

/// Triangles standing in for one removal, and whether the stand-in is exact.
pub fn removal_triangles(r: &Removal) -> (Vec<Triangle>, bool) {
    match r {
        Removal::Puncture(z) => match LogPoint::from_disk(*z) {
            Ok(w) => (vec![Triangle::unit(w)], true),
            Err(_) => (Vec::new(), true),
        },
        Removal::Triangle(t) => (vec![*t], true),
        Removal::GeodesicCut(x) => (
            LogPoint::new(x.ln(), 0.0)
                .map(|w| vec![Triangle::unit(w)])
                .unwrap_or_default(),
            false,
        ),
        Removal::ModelE(e) => (model_e_triangles(e), false),
    }
}

/// The removed region above a 1-Lipschitz profile is the union of the
/// triangles with apex on the profile; this samples that family.
fn model_e_triangles(e: &ModelDomainE) -> Vec<Triangle> {
    (0..MODEL_E_SAMPLES)
        .filter_map(|k| {
            let y = e.anchor.y() + TAU * k as f64 / MODEL_E_SAMPLES as f64;
            let x = e.log_radius_bound(y);
            (x < 0.0).then(|| Triangle::unit(LogPoint::new(x, y).expect("x < 0")))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AreaFunctional {
    /// `union area / 2π`.
    pub a: f64,
    /// Some removal was replaced by an approximate triangle family.
    pub approximate: bool,
}

/// `a = area(⋃ triangles) / 2π` over the triangle families of all removals.
pub fn area_functional(spec: &DomainSpec) -> AreaFunctional {
    let mut all = Vec::new();
    let mut approximate = false;
    for r in &spec.removals {
        let (ts, exact) = removal_triangles(r);
        all.extend(ts);
        approximate |= !exact;
    }
    AreaFunctional {
        a: union_area(&all) / TAU,
        approximate,
    }
}

/// How the two sides of a sandwich were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SandwichMethod {
    /// Both sides from walk-on-spheres on the domain itself.
    Direct,
    /// Upper side from single punctures, lower side from five-fold proxies.
    PunctureProxy,
    /// Some puncture has `|z| ≤ e^{−π}`: single-puncture upper side and the
    /// inscribed-disk lower side.
    NearOrigin,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Sandwich {
    pub ln_r_lo: f64,
    pub ln_r_hi: f64,
    pub method: SandwichMethod,
}

/// `|z|` of the removal point nearest the origin; the inscribed disk of that
/// radius bounds `r` from below.
fn inner_radius(spec: &DomainSpec) -> f64 {
    spec.removals
        .iter()
        .map(Removal::inner_radius)
        .fold(1.0, f64::min)
}

/// Lower and upper bounds on `ln r`.
pub fn radius_sandwich(spec: &DomainSpec, cfg: &WalkConfig) -> Result<Sandwich> {
    cfg.validate()?;
    let schwarz = inner_radius(spec).ln();
    if !spec.has_punctures() {
        let e = wos_ln_radius(spec, cfg)?;
        return Ok(Sandwich {
            ln_r_lo: (e.ln_r - 3.0 * e.std_err).max(schwarz),
            ln_r_hi: (e.ln_r + 3.0 * e.std_err).min(0.0),
            method: SandwichMethod::Direct,
        });
    }
    let (punctures, rest): (Vec<Removal>, Vec<Removal>) = spec
        .removals
        .iter()
        .partition(|r| matches!(r, Removal::Puncture(_)));
    let depths: Vec<f64> = punctures
        .iter()
        .map(|r| match r {
            Removal::Puncture(z) => -z.norm().ln(),
            _ => unreachable!(),
        })
        .collect();
    let mut hi = depths
        .iter()
        .map(|&u| ln_u_over_sinh(u))
        .fold(0.0, f64::min);
    if !rest.is_empty() {
        let e = wos_ln_radius(&DomainSpec::new(rest.clone()), cfg)?;
        hi = hi.min(e.ln_r + 3.0 * e.std_err);
    }
    if depths.iter().any(|&u| u >= PI) {
        return Ok(Sandwich {
            ln_r_lo: schwarz.min(hi),
            ln_r_hi: hi,
            method: SandwichMethod::NearOrigin,
        });
    }
    let mut proxy = rest;
    for r in &punctures {
        if let Removal::Puncture(z) = r {
            proxy.push(Removal::Triangle(Triangle::five(LogPoint::from_disk(*z)?)));
        }
    }
    let e = wos_ln_radius(&DomainSpec::new(proxy), cfg)?;
    Ok(Sandwich {
        ln_r_lo: (e.ln_r - 3.0 * e.std_err).max(schwarz).min(hi),
        ln_r_hi: hi,
        method: SandwichMethod::PunctureProxy,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CrzReport {
    pub a: f64,
    pub ln_r_lo: f64,
    pub ln_r_hi: f64,
    /// `|ln_r_hi| / a`, the smallest ratio compatible with the sandwich.
    pub ratio_lo: f64,
    /// `|ln_r_lo| / a`, the largest ratio compatible with the sandwich.
    pub ratio_hi: f64,
    pub pass: bool,
    /// `false` when `ratio_hi / ratio_lo > 10`.
    pub informative: bool,
    pub approximate_area: bool,
    pub method: SandwichMethod,
}

/// Checks that the whole sandwich lies in `[K a, K′ a]`.
pub fn check_crz(spec: &DomainSpec, cfg: &WalkConfig, constants: &Constants) -> Result<CrzReport> {
    let area = area_functional(spec);
    if !(area.a > 0.0) {
        return Err(invalid("check needs at least one removal with positive area"));
    }
    let s = radius_sandwich(spec, cfg)?;
    let ratio_lo = s.ln_r_hi.abs() / area.a;
    let ratio_hi = s.ln_r_lo.abs() / area.a;
    Ok(CrzReport {
        a: area.a,
        ln_r_lo: s.ln_r_lo,
        ln_r_hi: s.ln_r_hi,
        ratio_lo,
        ratio_hi,
        pass: constants.k <= ratio_lo && ratio_hi <= constants.kprime,
        informative: ratio_hi <= 10.0 * ratio_lo,
        approximate_area: area.approximate,
        method: s.method,
    })
}

/// Families of generated test domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Campaign {
    RandomPunctures,
    PunctureRings,
    TriangleClouds,
    GeodesicCuts,
}

impl std::str::FromStr for Campaign {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random-punctures" => Ok(Campaign::RandomPunctures),
            "puncture-rings" => Ok(Campaign::PunctureRings),
            "triangle-clouds" => Ok(Campaign::TriangleClouds),
            "geodesic-cuts" => Ok(Campaign::GeodesicCuts),
            _ => Err(invalid(format!(
                "unknown campaign {s:?}; expected random-punctures, puncture-rings, triangle-clouds or geodesic-cuts"
            ))),
        }
    }
}

impl Campaign {
    pub fn name(self) -> &'static str {
        match self {
            Campaign::RandomPunctures => "random-punctures",
            Campaign::PunctureRings => "puncture-rings",
            Campaign::TriangleClouds => "triangle-clouds",
            Campaign::GeodesicCuts => "geodesic-cuts",
        }
    }

    /// The `index`-th domain of the family for `seed`.
    pub fn case(self, seed: u64, index: usize) -> DomainSpec {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index as u64 + ((self as u64) << 32));
        let removals = match self {
            Campaign::RandomPunctures => (0..20)
                .map(|_| {
                    let u: f64 = rng.gen_range(0.05..1.0);
                    let th = rng.gen_range(0.0..TAU);
                    Removal::Puncture(Complex64::from_polar((-u).exp(), th))
                })
                .collect(),
            Campaign::PunctureRings => {
                let n = rng.gen_range(2..=16usize);
                let u: f64 = rng.gen_range(0.1..1.0);
                let phase = rng.gen_range(0.0..TAU);
                (0..n)
                    .map(|k| {
                        Removal::Puncture(Complex64::from_polar(
                            (-u).exp(),
                            phase + TAU * k as f64 / n as f64,
                        ))
                    })
                    .collect()
            }
            Campaign::TriangleClouds => {
                let n = rng.gen_range(1..=6usize);
                (0..n)
                    .map(|_| {
                        let u: f64 = rng.gen_range(0.05..0.8);
                        let y = rng.gen_range(0.0..TAU);
                        Removal::Triangle(Triangle::unit(LogPoint::new(-u, y).expect("u > 0")))
                    })
                    .collect()
            }
            Campaign::GeodesicCuts => {
                let u: f64 = rng.gen_range(0.1..2.0);
                vec![Removal::GeodesicCut((-u).exp())]
            }
        };
        DomainSpec::new(removals)
    }
}

/// The `index`-th random pair `(A, B)` of single triangles for `seed`.
pub fn random_triangle_pair(seed: u64, index: usize) -> (DomainSpec, DomainSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + (4 << 32));
    let mut one = || {
        let u: f64 = rng.gen_range(0.05..1.0);
        let y = rng.gen_range(0.0..TAU);
        DomainSpec::new(vec![Removal::Triangle(Triangle::unit(
            LogPoint::new(-u, y).expect("u > 0"),
        ))])
    };
    let a = one();
    (a, one())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignCase {
    pub case_id: String,
    pub report: CrzReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub cases: usize,
    pub violations: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
}

pub fn summarize(cases: &[CampaignCase]) -> CampaignSummary {
    CampaignSummary {
        cases: cases.len(),
        violations: cases.iter().filter(|c| !c.report.pass).count(),
        min_ratio: cases.iter().map(|c| c.report.ratio_lo).fold(f64::INFINITY, f64::min),
        max_ratio: cases.iter().map(|c| c.report.ratio_hi).fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Runs `count` cases of a family; case `i` uses walk seed `cfg.seed + i`.
pub fn run_campaign(
    family: Campaign,
    count: usize,
    cfg: &WalkConfig,
    constants: &Constants,
) -> Result<Vec<CampaignCase>> {
    (0..count)
        .map(|i| {
            let spec = family.case(cfg.seed, i);
            let case_cfg = WalkConfig {
                seed: cfg.seed.wrapping_add(i as u64),
                ..*cfg
            };
            Ok(CampaignCase {
                case_id: format!("{}-{i:04}", family.name()),
                report: check_crz(&spec, &case_cfg, constants)?,
            })
        })
        .collect()
}
