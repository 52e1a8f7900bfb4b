use std::f64::consts::PI;

use coulomb_eq::bifurcation::{
    detect_threshold, fixing_effect_probe, polygon_bifurcation_set, polygon_region, torus_bifurcation_set,
    torus_region_vertex, trace_pitchfork, PolygonRegion, Stability,
};
use coulomb_eq::inverse::{
    stabilizing_charges_aligned, stabilizing_charges_torus, stabilizing_charges_triangle, verify_equilibrium,
    ChargeFamily, InverseKind,
};
use coulomb_eq::morse::{form_value, torus_aligned_hessian_form};
use coulomb_eq::solver::{critical_triangle, find_critical_points, line_segment};
use coulomb_eq::suite::triangle_region_draws;
use coulomb_eq::{
    ChargePath, ChargeVector, Configuration, Point, PolygonConfig, PotentialSpec, SolveSettings, Space, TorusConfig,
    TorusLabel,
};

fn qv(v: &[f64]) -> ChargeVector {
    ChargeVector::new(v.to_vec()).unwrap()
}

fn triangle() -> Space {
    Space::Polygon { n: 3 }
}

#[test]
fn polygon_region_examples() {
    let on: [f64; 3] = [1.0 / 9.0, 4.0 / 9.0, 4.0 / 9.0];
    assert!((1.0 / on[0].sqrt() - 1.0 / on[1].sqrt() - 1.0 / on[2].sqrt()).abs() < 1e-14);
    let eps = 1e-6;
    assert_eq!(polygon_region([on[0] - eps, on[1] + eps / 2.0, on[2] + eps / 2.0]), PolygonRegion::AlignedMinimum(0));
    assert_eq!(polygon_region([on[0] + eps, on[1] - eps / 2.0, on[2] - eps / 2.0]), PolygonRegion::TwoMinima);
    assert_eq!(polygon_region([1.0 / 3.0; 3]), PolygonRegion::TwoMinima);
    assert_eq!(polygon_region([1e-4, 0.5, 0.5 - 1e-4]), PolygonRegion::AlignedMinimum(0));
}

/// Proper intersection test for segments `ab` and `cd` in the plane.
fn cross(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let o = |p: [f64; 2], q: [f64; 2], r: [f64; 2]| (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    o(c, d, a) * o(c, d, b) <= 0.0 && o(a, b, c) * o(a, b, d) <= 0.0
}

#[test]
fn polygon_curves_do_not_cross() {
    let curves = polygon_bifurcation_set(200).unwrap();
    assert_eq!(curves.len(), 3);
    let proj = |q: [f64; 3]| [q[1] + 0.5 * q[2], q[2] * 3f64.sqrt() / 2.0];
    for a in 0..3 {
        for b in a + 1..3 {
            for s in curves[a].samples.windows(2) {
                for t in curves[b].samples.windows(2) {
                    assert!(!cross(proj(s[0].0), proj(s[1].0), proj(t[0].0), proj(t[1].0)));
                }
            }
        }
    }
}

#[test]
fn torus_curves_are_disjoint_and_cut_off_one_vertex_each() {
    for radii in [[1.0, 2.0, 3.0], [0.7, 1.9, 2.6], [1.0, 1.3, 4.0]] {
        let curves = torus_bifurcation_set(radii, 50).unwrap();
        assert_eq!(curves.len(), 3);
        for a in 0..3 {
            for b in a + 1..3 {
                let (sa, sb) = (&curves[a].samples, &curves[b].samples);
                let end = |s: &[coulomb_eq::ControlPoint], i: usize| [s[i].0[0], s[i].0[1]];
                assert!(!cross(end(sa, 0), end(sa, sa.len() - 1), end(sb, 0), end(sb, sb.len() - 1)), "{radii:?}");
            }
        }
        let mut vertices: Vec<usize> = [TorusLabel::PiPiZero, TorusLabel::ZeroPiPi, TorusLabel::PiZeroPi]
            .into_iter()
            .map(|l| torus_region_vertex(radii, l).unwrap().expect("form changes sign"))
            .collect();
        vertices.sort();
        assert_eq!(vertices, [0, 1, 2], "{radii:?}");
    }
    let c = torus_aligned_hessian_form([1.0, 2.0, 3.0], TorusLabel::PiPiZero).unwrap();
    let curve = &torus_bifurcation_set([1.0, 2.0, 3.0], 50).unwrap()[0];
    for s in &curve.samples {
        assert!(form_value(c, &s.0).abs() < 1e-12 * c.iter().map(|v| v.abs()).sum::<f64>());
    }
}

#[test]
fn thresholds_match_closed_forms() {
    let path = ChargePath::new([1.0, 0.0, 1.0], 1, 0.05, 0.6).unwrap();
    assert!((detect_threshold(&triangle(), &path).unwrap() - 0.25).abs() < 1e-4);
    let path = ChargePath::new([4.0, 0.0, 1.0], 1, 0.1, 0.8).unwrap();
    assert!((detect_threshold(&triangle(), &path).unwrap() - 4.0 / 9.0).abs() < 1e-4);

    let radii = [1.0, 2.0, 3.0];
    let small = 0.01;
    let c = torus_aligned_hessian_form(radii, TorusLabel::PiPiZero).unwrap();
    let zero = -(c[0] + c[1]) * small / c[2];
    let path = ChargePath::new([small, small, 0.0], 2, 0.1, 5.0).unwrap();
    let lc = detect_threshold(&Space::Torus { radii }, &path).unwrap();
    assert!((lc - zero).abs() < 1e-4, "{lc} vs {zero}");
}

#[test]
fn pitchfork_branches() {
    let path = ChargePath::new([1.0, 0.0, 1.0], 1, 0.05, 0.6).unwrap();
    let d = trace_pitchfork(&triangle(), &path, 24).unwrap();
    let mut saw_pair = false;
    for s in &d.samples {
        let q2 = s.lambda;
        if q2 < 0.25 - 1e-6 {
            assert!(s.off_axis.is_empty(), "pair below threshold at {q2}");
            assert_eq!(s.aligned.stability, Stability::Minimum);
        }
        if q2 > 0.25 + 1e-6 {
            assert_eq!(s.aligned.stability, Stability::Saddle);
            assert_eq!(s.off_axis.len(), 2, "pair missing at {q2}");
            saw_pair = true;
            let (u, l) = (&s.off_axis[0], &s.off_axis[1]);
            assert!((u.amplitude + l.amplitude).abs() < 1e-8);
            assert!(u.amplitude > 0.0);
            for b in [u, l] {
                assert_eq!(b.stability, Stability::Minimum);
                assert!(b.eigenvalues.iter().all(|e| *e > 0.0));
                assert!(b.energy < s.aligned.energy);
            }
            assert!(s.aligned.eigenvalues[0] < 0.0);
        }
        // the aligned branch stays at the closed-form segment whatever q2 is
        let seg = Configuration::Polygon(line_segment(s.charges, 1));
        assert!(s.aligned.config.chart_distance(&seg) < 1e-9);
    }
    assert!(saw_pair);
}

#[test]
fn fixing_effect_examples() {
    let r = fixing_effect_probe(1.0, 1.0, &[0.01, 0.1, 0.2]).unwrap();
    for e in &r.entries {
        assert!((e.d12 - 0.25).abs() < 1e-9, "{e:?}");
        assert!(e.excluded.is_none());
    }
    let r = fixing_effect_probe(4.0, 1.0, &[0.05, 0.2, 0.4, 0.5]).unwrap();
    assert!((r.threshold - 4.0 / 9.0).abs() < 1e-14);
    for e in &r.entries[..3] {
        assert!((e.d12 - 1.0 / 3.0).abs() < 1e-9, "{e:?}");
        assert!(e.alignment_defect < 1e-10);
    }
    let above = &r.entries[3];
    assert!(above.excluded.is_some());
    assert!(above.alignment_defect > 1e-3, "{above:?}");
}

fn sides_of(p: &PolygonConfig) -> [f64; 3] {
    let v = p.points();
    [(v[1] - v[2]).norm(), (v[2] - v[0]).norm(), (v[0] - v[1]).norm()]
}

fn normalized(q: &[f64]) -> Vec<f64> {
    let s: f64 = q.iter().sum();
    q.iter().map(|v| v / s).collect()
}

#[test]
fn triangle_inverse_examples() {
    let r = stabilizing_charges_triangle(1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0).unwrap();
    for v in r.charges.unwrap() {
        assert!((v - 1.0 / 3.0).abs() < 1e-14);
    }
    let r = stabilizing_charges_triangle(0.4, 0.4, 0.2).unwrap();
    let want = normalized(&[1.0, 1.0, 4.0]);
    for (a, b) in r.charges.unwrap().iter().zip(want) {
        assert!((a - b).abs() < 1e-14);
    }
    let r = stabilizing_charges_triangle(0.5, 0.3, 0.2).unwrap();
    assert_eq!(r.kind, InverseKind::OneParameterFamily);
    assert!(matches!(r.family, Some(ChargeFamily::Aligned { intermediate: 0, .. })));
    let r = stabilizing_charges_triangle(0.7, 0.2, 0.1).unwrap();
    assert_eq!(r.kind, InverseKind::Infeasible);
    assert!(r.charges.is_none());
}

#[test]
fn triangle_roundtrip_and_scale_invariance() {
    for q in triangle_region_draws(100, 99) {
        let tri = critical_triangle(&qv(&q)).unwrap().unwrap();
        let [l1, l2, l3] = sides_of(&tri);
        let r = stabilizing_charges_triangle(l1, l2, l3).unwrap();
        assert_eq!(r.kind, InverseKind::UniqueRay);
        for (a, b) in r.charges.unwrap().iter().zip(normalized(&q)) {
            assert!((a - b).abs() < 1e-8);
        }
        for c in [0.1, 1.0, 10.0] {
            let scaled = qv(&q.map(|v| v * c));
            let rep = verify_equilibrium(&tri.clone().into(), &scaled, &PotentialSpec::Coulomb).unwrap();
            assert!(rep.passed, "{q:?} scaled by {c}: {rep:?}");
        }
    }
}

#[test]
fn aligned_inverse_examples() {
    let r = stabilizing_charges_aligned(0.25, 0.25).unwrap();
    let Some(ChargeFamily::Aligned { intermediate, outer, minimality_bound }) = r.family else { panic!("{r:?}") };
    assert_eq!(intermediate, 1);
    assert!((outer[0] - outer[2]).abs() < 1e-14);
    assert!((minimality_bound - outer[0] / 4.0).abs() < 1e-14);

    let r = stabilizing_charges_aligned(1.0 / 3.0, 1.0 / 6.0).unwrap();
    let Some(ChargeFamily::Aligned { outer, minimality_bound, .. }) = r.family else { panic!("{r:?}") };
    assert!((outer[0] / outer[2] - 4.0).abs() < 1e-12);

    // critical for every intermediate charge, minimal only below the bound
    let seg: Configuration = PolygonConfig::from_points(vec![
        Point::new(0.0, 0.0),
        Point::new(1.0 / 3.0, 0.0),
        Point::new(0.5, 0.0),
    ])
    .unwrap()
    .into();
    let space = triangle();
    for q2 in [0.01, minimality_bound, 10.0 * minimality_bound] {
        let q = qv(&[outer[0], q2, outer[2]]);
        assert!(verify_equilibrium(&seg, &q, &PotentialSpec::Coulomb).unwrap().passed, "q2 = {q2}");
    }
    let bound_by_bisection = detect_threshold(
        &space,
        &ChargePath::new([outer[0], 0.0, outer[2]], 1, 0.2 * minimality_bound, 3.0 * minimality_bound).unwrap(),
    )
    .unwrap();
    assert!((bound_by_bisection - minimality_bound).abs() < 1e-8 * minimality_bound);
    let above = qv(&[outer[0], 2.0 * minimality_bound, outer[2]]);
    let pts = find_critical_points(&space, &above, &PotentialSpec::Coulomb, &SolveSettings::default()).unwrap();
    let at_seg = pts.iter().find(|p| p.config.chart_distance(&seg) < 1e-8).expect("segment stays critical");
    assert!(at_seg.is_saddle());
}

#[test]
fn verification_failures_and_torus_passes() {
    let eq = critical_triangle(&qv(&[1.0, 1.0, 1.0])).unwrap().unwrap();
    let rep = verify_equilibrium(&eq.into(), &qv(&[1.0, 1.0, 2.0]), &PotentialSpec::Coulomb).unwrap();
    assert!(!rep.passed);
    assert!(rep.normalized_residual > 1e-3);

    let t = TorusConfig::new([1.0; 3], [2.0 * PI / 3.0; 2]).unwrap();
    let rep = verify_equilibrium(&t.into(), &qv(&[1.0, 1.0, 1.0]), &PotentialSpec::Coulomb).unwrap();
    assert!(rep.passed, "{rep:?}");
}

#[test]
fn torus_inverse_recovers_charges_of_found_critical_points() {
    let spec = PotentialSpec::Coulomb;
    for (radii, q) in [([1.0, 2.0, 3.0], [1.0, 1.0, 1.0]), ([1.0, 1.5, 2.5], [0.5, 1.0, 2.0])] {
        let pts = find_critical_points(&Space::Torus { radii }, &qv(&q), &spec, &SolveSettings::default()).unwrap();
        let mut off_axis = 0;
        for p in pts {
            let Configuration::Torus(t) = &p.config else { unreachable!() };
            let r = stabilizing_charges_torus(t, &spec).unwrap();
            if p.aligned {
                assert_eq!(r.family, Some(ChargeFamily::PositiveOctant));
                continue;
            }
            off_axis += 1;
            assert_eq!(r.kind, InverseKind::UniqueRay);
            for (a, b) in r.charges.unwrap().iter().zip(normalized(&q)) {
                assert!((a - b).abs() < 1e-7, "{radii:?}: {a} vs {b}");
            }
        }
        assert!(off_axis >= 2, "{radii:?}");
    }
}

#[test]
fn polygon_curve_separates_minimum_counts() {
    for (q, expected) in [([0.3, 0.35, 0.35], 2), ([0.05, 0.5, 0.45], 1), ([0.6, 0.2, 0.2], 2)] {
        let pts = find_critical_points(&triangle(), &qv(&q), &PotentialSpec::Coulomb, &SolveSettings::default()).unwrap();
        let minima = pts.iter().filter(|p| p.is_minimum()).count();
        assert_eq!(minima, expected, "{q:?}");
        assert_eq!(minima == 2, polygon_region(q) == PolygonRegion::TwoMinima);
    }
}
