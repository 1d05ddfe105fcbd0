use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};

use confrad::chain::{
    chain_bound, choose_u, cone_length, cone_length_full_strip, final_lemma_check, polygon_step,
    threshold_r, verify_interval_cover, Chain, ChainBranch, ConeGrid, TestMap,
};
use confrad::crz::{assemble_constants, Constants};
use confrad::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn constants() -> Constants {
    assemble_constants().unwrap()
}

/// `∫ dx / (2 sinh |x|)` between two points of `x < 0`.
fn density_integral(a: f64, b: f64) -> f64 {
    let f = |x: f64| 0.5 * (0.5 * x.abs()).tanh().ln();
    (f(a) - f(b)).abs()
}

/// Graph distance on a uniform lattice of the reduced strip with the
/// 16-neighbour stencil and exact edge weights, doubled.
fn dijkstra_cone_length(u: f64, h: f64) -> f64 {
    let delta = u / 8.0;
    let x0 = -2.0 * PI;
    let nx = ((-delta - x0) / h).round() as usize + 1;
    let ny = (PI / h).round() as usize + 1;
    let hx = (-delta - x0) / (nx - 1) as f64;
    let hy = PI / (ny - 1) as f64;
    let xs: Vec<f64> = (0..nx).map(|i| x0 + i as f64 * hx).collect();
    let at = |i: usize, j: usize| i * ny + j;
    let mut dist = vec![f64::INFINITY; nx * ny];
    let mut heap = BinaryHeap::new();
    for i in 0..nx {
        for j in 0..ny {
            let (x, y) = (xs[i], j as f64 * hy);
            if x >= -u && y <= PI * (x + u) / u {
                dist[at(i, j)] = 0.0;
                heap.push(Reverse((0u64, at(i, j))));
            }
        }
    }
    let stencil: Vec<(i64, i64)> = [(1, 0), (0, 1), (1, 1), (1, 2), (2, 1)]
        .iter()
        .flat_map(|&(a, b)| [(a, b), (-a, b), (a, -b), (-a, -b), (b, a), (-b, a), (b, -a), (-b, -a)])
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    while let Some(Reverse((bits, k))) = heap.pop() {
        let d = f64::from_bits(bits);
        if d > dist[k] {
            continue;
        }
        let (i, j) = (k / ny, k % ny);
        if j == ny - 1 {
            return 2.0 * d;
        }
        for &(di, dj) in &stencil {
            let (ii, jj) = (i as i64 + di, j as i64 + dj);
            if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= ny as i64 {
                continue;
            }
            let (ii, jj) = (ii as usize, jj as usize);
            let (dx, dy) = (xs[ii] - xs[i], (jj as f64 - j as f64) * hy);
            let len = dx.hypot(dy);
            let w = if di == 0 {
                len / (2.0 * xs[i].abs().sinh())
            } else {
                len / dx.abs() * density_integral(xs[i], xs[ii])
            };
            let nd = d + w;
            if nd < dist[at(ii, jj)] {
                dist[at(ii, jj)] = nd;
                // positive floats order like their bit patterns
                heap.push(Reverse((nd.to_bits(), at(ii, jj))));
            }
        }
    }
    f64::INFINITY
}

#[test]
fn cone_length_matches_graph_oracle() {
    for &(u, h) in &[(0.4, 0.01), (0.8, 0.02)] {
        let fm = cone_length(u, &ConeGrid::default()).unwrap().value();
        let graph = dijkstra_cone_length(u, h);
        assert!((fm - graph).abs() < 0.03 * graph, "u={u}: {fm} vs {graph}");
    }
}

#[test]
fn full_strip_agrees_with_reduced_problem() {
    let p = ConeGrid::default();
    let u = 0.4;
    let reduced = cone_length(u, &p).unwrap();
    let full = cone_length_full_strip(u, &p, 0.0).unwrap();
    let shifted = cone_length_full_strip(u, &p, 1.3).unwrap();
    assert!((full - reduced.fine).abs() < 0.02 * reduced.fine, "{full} vs {reduced:?}");
    assert!((full - shifted).abs() < 0.02 * full, "{full} vs {shifted}");
}

#[test]
fn cone_length_decreases_in_u() {
    let p = ConeGrid::default();
    let ls: Vec<f64> = [0.05, 0.2, 0.4, 0.8]
        .iter()
        .map(|&u| cone_length(u, &p).unwrap().value())
        .collect();
    assert!(ls.windows(2).all(|w| w[0] > w[1]), "{ls:?}");
    assert!(ls[0] > ls[3] + 1.0);
}

#[test]
fn chosen_cone_parameter_shrinks_with_d() {
    let us: Vec<f64> = [0.05, 0.5, 1.0, 2.0].iter().map(|&d| choose_u(d).unwrap()).collect();
    assert!(us.windows(2).all(|w| w[0] >= w[1]), "{us:?}");
    assert!(us[0] > 0.99 * PI);
    let everything = ConeGrid::default();
    let l = cone_length(us[2], &everything).unwrap().value();
    assert!(l > 1.1, "l(u(1)) = {l}");
}

fn polygon(q: u32, r: f64) -> Chain {
    let points = (0..q)
        .map(|k| {
            let z = Complex64::from_polar(r, TAU * k as f64 / q as f64);
            [z.re, z.im]
        })
        .collect();
    Chain {
        points,
        d: polygon_step(r, q),
        paths: None,
    }
}

#[test]
fn polygon_chains_are_covered() {
    for &q in &[3, 8, 64] {
        let chain = polygon(q, 0.6065);
        let u = choose_u(chain.d).unwrap();
        let cover = verify_interval_cover(&chain, u).unwrap();
        assert!(cover.covered, "q={q}: {cover:?}");
        let report = chain_bound(&chain, &constants()).unwrap();
        assert_eq!(report.branch, ChainBranch::Cover);
        assert!(report.area_bound_holds && report.ln_r_upper < 0.0, "q={q}: {report:?}");
        assert_eq!(report.winding, 1);
    }
}

#[test]
fn single_point_chain_does_not_wind() {
    let chain = Chain {
        points: vec![[0.5, 0.0]],
        d: 0.5,
        paths: None,
    };
    assert!(matches!(chain_bound(&chain, &constants()), Err(Error::Winding(0))));
}

#[test]
fn near_origin_point_takes_the_fixed_ratio() {
    let r0 = (-4.0f64).exp();
    let pts = [[r0, 0.0], [0.0, 0.5], [-0.5, 0.0], [0.0, -0.5]];
    let z: Vec<Complex64> = pts.iter().map(|p| Complex64::new(p[0], p[1])).collect();
    let d = (0..4)
        .map(|i| confrad::closed_form::hyp_dist_disk(z[i], z[(i + 1) % 4]).unwrap())
        .fold(0.0, f64::max);
    let chain = Chain {
        points: pts.to_vec(),
        d,
        paths: None,
    };
    let report = chain_bound(&chain, &constants()).unwrap();
    assert_eq!(report.branch, ChainBranch::NearOrigin);
    assert!((report.ln_r_branch - 0.4 * report.m.ln()).abs() < 1e-15);
}

#[test]
fn identity_and_blaschke_images() {
    let c = constants();
    let (q, r) = (16, 0.6065);
    let d = polygon_step(r, q);
    let id = final_lemma_check(&[TestMap::rotation(0.0)], d, r, q, &c).unwrap();
    assert_eq!((id.checked, id.failures), (1, 0));
    let blaschke = TestMap {
        rotation: 0.3,
        zeros: vec![[0.2, 0.1]],
        contraction: 1.0,
    };
    let b = final_lemma_check(&[blaschke], d, r, q, &c).unwrap();
    assert_eq!(b.checked, 1, "{b:?}");
    assert_eq!(b.cases[0].report.winding, 2);
    assert!(b.cases[0].pass);
}

#[test]
fn threshold_and_k_of_d_are_monotone() {
    let ds = [0.3, 0.6, 1.2];
    let rs: Vec<f64> = ds.iter().map(|&d| threshold_r(d, 4096).unwrap()).collect();
    assert!(rs.windows(2).all(|w| w[0] > w[1]), "{rs:?}");
    let c = constants();
    let ks: Vec<f64> = ds
        .iter()
        .map(|&d| {
            let mut chain = polygon(8, 0.6065);
            chain.d = chain.d.max(d);
            chain_bound(&chain, &c).unwrap().k_of_d
        })
        .collect();
    assert!(ks.iter().all(|&k| k >= 2.5), "{ks:?}");
    assert!(ks.windows(2).all(|w| w[0] <= w[1]), "{ks:?}");
}

/// Closed chains winding once with steps bounded by one of a few fixed `d`.
fn arb_chain() -> impl Strategy<Value = Chain> {
    (
        prop::collection::vec((0.2..1.0f64, 0.3..0.95f64), 6..40),
        0.0..TAU,
        any::<bool>(),
    )
        .prop_filter_map("steps exceed the largest d", |(raw, phase, reverse)| {
            let total: f64 = raw.iter().map(|p| p.0).sum();
            let mut theta = phase;
            let mut z = Vec::new();
            for &(w, rad) in &raw {
                z.push(Complex64::from_polar(rad, theta));
                theta += if reverse { -TAU } else { TAU } * w / total;
            }
            let step = (0..z.len())
                .map(|i| confrad::closed_form::hyp_dist_disk(z[i], z[(i + 1) % z.len()]).unwrap())
                .fold(0.0, f64::max);
            let d = [0.5, 1.0, 2.0, 4.0].into_iter().find(|&d| step <= d)?;
            Some(Chain {
                points: z.iter().map(|p| [p.re, p.im]).collect(),
                d,
                paths: None,
            })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn winding_chains_give_valid_bounds(chain in arb_chain()) {
        let report = chain_bound(&chain, &constants()).unwrap();
        prop_assert_eq!(report.winding.abs(), 1);
        prop_assert!(report.area_bound_holds, "{:?}", report);
        prop_assert!(report.ln_r_upper < 0.0);
        prop_assert!(report.k_of_d >= 2.5);
    }
}
