use std::f64::consts::{PI, TAU};

use confrad::cylgeom::{
    arcs_union_measure, coverage_gap, greedy_triple_cover, intervals_cover_circle,
    triangle_area_cyl, union_area, CircleInterval, LogPoint, Scale, Triangle,
};
use confrad::vitali::{
    area_inequalities, bases_disjoint, containment_check, select_disjoint, triangles_intersect, C3,
};
use proptest::prelude::*;

/// Midpoint-rule area of the union on an `n × n` raster of `[x0, 0] × [0, 2π)`.
fn raster_area(ts: &[Triangle], n: usize) -> f64 {
    let x0 = ts.iter().map(|t| t.apex_x()).fold(0.0, f64::min);
    let (dx, dy) = (-x0 / n as f64, TAU / n as f64);
    let mut hits = 0usize;
    for i in 0..n {
        let x = x0 + (i as f64 + 0.5) * dx;
        for j in 0..n {
            let y = (j as f64 + 0.5) * dy;
            // membership by explicit distance on the circle, not the library test
            let inside = ts.iter().any(|t| {
                let h = x - t.apex_x();
                let d = (y - t.center()).rem_euclid(TAU);
                h >= 0.0 && d.min(TAU - d) <= h
            });
            hits += inside as usize;
        }
    }
    hits as f64 * dx * dy
}

fn tri(x: f64, y: f64) -> Triangle {
    Triangle::unit(LogPoint::new(x, y).unwrap())
}

#[test]
fn union_area_matches_raster() {
    let clouds = vec![
        vec![tri(-0.5, 1.0)],
        vec![tri(-0.5, 1.0), tri(-0.3, 1.4)],
        vec![tri(-2.0, 0.1), tri(-0.7, 6.0), tri(-1.2, 3.0)],
        vec![tri(-4.0, 2.0)],
        vec![Triangle::five(LogPoint::new(-0.3, 5.9).unwrap()), tri(-0.2, 0.2)],
    ];
    for ts in &clouds {
        let exact = union_area(ts);
        let approx = raster_area(ts, 800);
        assert!(
            (exact - approx).abs() < 5e-3 * exact.max(0.1),
            "{ts:?}: {exact} vs {approx}"
        );
    }
}

#[test]
fn area_beyond_pi_is_the_cylinder_band() {
    // past height π the cross-section is the full circle
    let h = 4.0;
    let a = triangle_area_cyl(h, Scale::One).unwrap();
    assert!((a - (PI * PI + TAU * (h - PI))).abs() < 1e-12);
    assert!((raster_area(&[tri(-h, 0.3)], 1000) - a).abs() < 5e-3 * a);
}

fn brute_gap(ivs: &[CircleInterval]) -> bool {
    (0..20000).any(|k| {
        let a = TAU * (k as f64 + 0.5) / 20000.0;
        !ivs.iter().any(|i| i.contains(a))
    })
}

fn arb_interval() -> impl Strategy<Value = CircleInterval> {
    (0.0..TAU, 0.0..2.0f64).prop_map(|(c, h)| CircleInterval::new(c, h).unwrap())
}

fn arb_cloud(max: usize) -> impl Strategy<Value = Vec<LogPoint>> {
    prop::collection::vec(
        (-PI..-1e-3f64, 0.0..TAU).prop_map(|(x, y)| LogPoint::new(x, y).unwrap()),
        1..max,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn area_invariant_under_rotation(x in -5.0..-0.01f64, y in 0.0..TAU, s in 0.0..TAU) {
        let a = union_area(&[tri(x, y)]);
        let b = union_area(&[tri(x, y + s)]);
        prop_assert!((a - b).abs() < 1e-12);
        prop_assert!((a - triangle_area_cyl(-x, Scale::One).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn union_is_monotone_and_subadditive(cloud in arb_cloud(8)) {
        let ts: Vec<Triangle> = cloud.iter().map(|&w| Triangle::unit(w)).collect();
        let total = union_area(&ts);
        let sum: f64 = ts.iter().map(Triangle::area).sum();
        let max = ts.iter().map(Triangle::area).fold(0.0, f64::max);
        prop_assert!(total <= sum * (1.0 + 1e-12));
        prop_assert!(total >= max * (1.0 - 1e-12));
        let fewer = union_area(&ts[..ts.len() - 1]);
        prop_assert!(fewer <= total * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn covers_agree_with_brute_force(ivs in prop::collection::vec(arb_interval(), 1..12)) {
        let covered = intervals_cover_circle(&ivs);
        // the brute sample can miss gaps thinner than its spacing
        if brute_gap(&ivs) {
            prop_assert!(!covered);
        }
        if let Some(g) = coverage_gap(&ivs) {
            prop_assert!(!ivs.iter().any(|i| i.contains(g)));
        }
        prop_assert!(arcs_union_measure(&ivs) <= TAU + 1e-12);
    }

    #[test]
    fn triple_cover_selection(ivs in prop::collection::vec(arb_interval(), 1..16)) {
        match greedy_triple_cover(&ivs) {
            Ok(sel) => {
                for (i, a) in sel.iter().enumerate() {
                    for b in &sel[i + 1..] {
                        prop_assert!(!a.intersects(b));
                    }
                }
                let tripled: Vec<_> = sel.iter().map(|s| s.dilated(3.0)).collect();
                prop_assert!(intervals_cover_circle(&tripled));
            }
            Err(_) => prop_assert!(!intervals_cover_circle(&ivs)),
        }
    }

    #[test]
    fn vitali_selection_properties(cloud in arb_cloud(30)) {
        let sel = select_disjoint(&cloud).unwrap();
        let ts = sel.triangles();
        for (i, a) in ts.iter().enumerate() {
            for b in &ts[i + 1..] {
                prop_assert!(!triangles_intersect(a, b));
                prop_assert!(bases_disjoint(a, b));
            }
        }
        prop_assert!(containment_check(&cloud, &sel).ok);
        let areas = area_inequalities(&cloud, &sel);
        prop_assert!(areas.holds);
        prop_assert!(areas.ratio >= 1.0 - 1e-12 && areas.ratio <= C3);
    }
}
