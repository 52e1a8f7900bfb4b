use std::f64::consts::PI;

use coulomb_eq::config::chord;
use coulomb_eq::morse::{aligned_polygon_blocks, euler_count_check, form_value, morse_index, torus_aligned_hessian_form, EulerCheck};
use coulomb_eq::potential::{default_fd_step, fd_gradient};
use coulomb_eq::solver::{classify, critical_triangle, enumerate_aligned, find_critical_points, line_segment, polish};
use coulomb_eq::suite::min_triple_area;
use coulomb_eq::{ChargeVector, Configuration, Point, PolygonConfig, PotentialSpec, SolveSettings, Space, TorusConfig, TorusLabel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn qv(v: &[f64]) -> ChargeVector {
    ChargeVector::new(v.to_vec()).unwrap()
}

/// Determinant of the torus Hessian in `(α1, α2)` from one-dimensional
/// finite differences of the three pair terms. The energy is
/// `f1(α1) + f2(α2) + f3(2π − α1 − α2)`, so the Hessian is
/// `[[h1 + h3, h3], [h3, h2 + h3]]` with determinant `h1 h2 + h1 h3 + h2 h3`.
fn fd_det(r: [f64; 3], q: [f64; 3], a: [f64; 2]) -> f64 {
    let h = 1e-4;
    let a3 = 2.0 * PI - a[0] - a[1];
    let second = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
    let h1 = second(&|t| q[1] * q[2] / chord(r[1], r[2], t), a[0]);
    let h2 = second(&|t| q[2] * q[0] / chord(r[2], r[0], t), a[1]);
    let h3 = second(&|t| q[0] * q[1] / chord(r[0], r[1], t), a3);
    h1 * h2 + h1 * h3 + h2 * h3
}

#[test]
fn equal_radii_torus_contains_equilateral_pair() {
    let space = Space::Torus { radii: [1.0; 3] };
    let pts = find_critical_points(&space, &qv(&[1.0, 1.0, 1.0]), &PotentialSpec::Coulomb, &SolveSettings::default()).unwrap();
    let t = 2.0 * PI / 3.0;
    for target in [[t, t], [-t, -t]] {
        let c = Configuration::Torus(TorusConfig::new([1.0; 3], target).unwrap());
        let hit = pts.iter().find(|p| p.config.chart_distance(&c) < 1e-8).expect("equilateral point found");
        assert_eq!(morse_index(hit).unwrap(), 0);
    }
}

#[test]
fn triangle_taxonomy_and_euler_counts() {
    let space = Space::Polygon { n: 3 };
    for (q, minima, saddles) in [([1.0, 1.0, 1.0], 2, 3), ([0.125, 1.0, 1.0], 1, 2)] {
        let pts = find_critical_points(&space, &qv(&q), &PotentialSpec::Coulomb, &SolveSettings::default()).unwrap();
        let s = euler_count_check(&pts, &space);
        assert_eq!((s.minima, s.saddles, s.maxima), (minima, saddles, 0), "{q:?}");
        assert_eq!(s.euler_value, Some(2));
        assert_eq!(s.euler_check, EulerCheck::Passed);
    }
}

#[test]
fn returned_points_pass_independent_checks() {
    let cases: Vec<(Space, Vec<f64>)> = vec![
        (Space::Polygon { n: 3 }, vec![1.0, 2.0, 3.0]),
        (Space::Polygon { n: 3 }, vec![0.3, 1.0, 0.7]),
        (Space::Torus { radii: [1.0, 2.0, 3.0] }, vec![1.0, 1.0, 1.0]),
        (Space::Torus { radii: [1.0, 1.5, 2.5] }, vec![0.2, 1.0, 3.0]),
    ];
    for (space, q) in cases {
        let q = qv(&q);
        let settings = SolveSettings::default();
        let pts = find_critical_points(&space, &q, &PotentialSpec::Coulomb, &settings).unwrap();
        for p in &pts {
            let fd = fd_gradient(&p.config, &q, &PotentialSpec::Coulomb, default_fd_step(&p.config)).unwrap();
            let scale = q.quadratic_scale() / p.config.min_distance().powi(2);
            assert!(fd.norm() < 1e-6 * scale, "{space}: fd gradient {:e}", fd.norm());
            let mirror = p.config.apply_involution();
            let partner = pts.iter().find(|o| o.config.chart_distance(&mirror) < settings.dedup_tol);
            let partner = partner.unwrap_or_else(|| panic!("{space}: mirror image missing"));
            assert_eq!(partner.morse_index, p.morse_index);
        }
        for w in pts.windows(2) {
            assert!(w[0].energy <= w[1].energy + 1e-10 * w[1].energy.abs());
        }
    }
}

#[test]
fn three_charge_non_aligned_points_are_the_closed_form_pair() {
    let space = Space::Polygon { n: 3 };
    for q in [[1.0, 1.0, 4.0], [0.5, 0.7, 0.9], [0.1, 1.0, 1.0]] {
        let q = qv(&q);
        let settings = SolveSettings::default().with_closed_form_seeds(false);
        let off: Vec<_> = find_critical_points(&space, &q, &PotentialSpec::Coulomb, &settings)
            .unwrap()
            .into_iter()
            .filter(|p| !p.aligned)
            .collect();
        match critical_triangle(&q).unwrap() {
            Some(t) => {
                let t = Configuration::Polygon(t);
                assert_eq!(off.len(), 2);
                for c in [t.clone(), t.apply_involution()] {
                    assert!(off.iter().any(|p| p.config.chart_distance(&c) < 1e-8));
                }
            }
            None => assert!(off.is_empty()),
        }
    }
}

#[test]
fn aligned_enumeration_is_stationary() {
    let q = qv(&[0.4, 1.3, 2.0]);
    for space in [Space::Polygon { n: 3 }, Space::Torus { radii: [1.0, 2.0, 3.0] }] {
        let list = enumerate_aligned(&space, &q).unwrap();
        assert_eq!(list.len(), if matches!(space, Space::Torus { .. }) { 4 } else { 3 });
        for (_, c) in list {
            let cp = classify(&c, &q, &PotentialSpec::Coulomb).unwrap();
            assert!(cp.grad_norm < 1e-11, "{space}: {:e}", cp.grad_norm);
        }
    }
}

#[test]
fn known_morse_indices() {
    let q = qv(&[1.0, 1.0, 1.0]);
    let tri = classify(&critical_triangle(&q).unwrap().unwrap().into(), &q, &PotentialSpec::Coulomb).unwrap();
    assert_eq!(morse_index(&tri).unwrap(), 0);
    for i in 0..3 {
        let seg = classify(&line_segment([1.0, 1.0, 1.0], i).into(), &q, &PotentialSpec::Coulomb).unwrap();
        assert_eq!(morse_index(&seg).unwrap(), 1);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let r = [0; 3].map(|_| rng.gen_range(0.5..3.0));
        let qt = qv(&[0; 3].map(|_| rng.gen_range(0.1..3.0)));
        let cp = classify(&TorusLabel::ZeroZeroZero.config(r).unwrap().into(), &qt, &PotentialSpec::Coulomb).unwrap();
        assert_eq!(morse_index(&cp).unwrap(), 2);
    }
}

#[test]
fn hessian_form_sign_matches_independent_determinant() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 100 {
        let r: [f64; 3] = [0; 3].map(|_| rng.gen_range(0.5..4.0));
        let q = [0; 3].map(|_| rng.gen_range(0.05..5.0_f64).powi(2));
        if (0..3).any(|i| (r[i] - r[(i + 1) % 3]).abs() < 0.05) {
            continue;
        }
        for label in TorusLabel::ALL {
            let c = torus_aligned_hessian_form(r, label).unwrap();
            let v = form_value(c, &q);
            let size: f64 = c.iter().zip(&q).map(|(a, b)| (a * b).abs()).sum();
            if v.abs() < 1e-3 * size {
                continue;
            }
            let [a1, a2, _] = label.angles();
            let det = fd_det(r, q, [a1, a2]);
            assert_eq!(det > 0.0, v > 0.0, "r {r:?} q {q:?} {label}: det {det:e} form {v:e}");
        }
        checked += 1;
    }
}

#[test]
fn degenerate_boundary_point_is_flagged() {
    // 1/sqrt(q1) = 1/sqrt(q2) + 1/sqrt(q3) with q2 = q3 = 1
    let q = [0.25, 1.0, 1.0];
    let cp = classify(&line_segment(q, 0).into(), &qv(&q), &PotentialSpec::Coulomb).unwrap();
    assert!(cp.degenerate);
    assert!(morse_index(&cp).is_err());
}

#[test]
fn small_intermediate_charges_fix_the_line() {
    for delta in [1e-3, 1e-4] {
        let q = qv(&[1.0, delta, delta, 1.0]);
        let seed = PolygonConfig::from_points([0.0, 0.1, 0.3, 0.5].map(|x| Point::new(x, 0.0)).to_vec()).unwrap();
        let root = polish(&seed.into(), &q, &PotentialSpec::Coulomb, &SolveSettings::default()).unwrap();
        assert!(root.is_aligned());
        let Configuration::Polygon(p) = &root else { unreachable!() };
        let blocks = aligned_polygon_blocks(p, &q, &PotentialSpec::Coulomb).unwrap();
        assert!(blocks.transverse_positive_definite(), "{:?}", blocks.transverse_eigenvalues());
        let cp = classify(&root, &q, &PotentialSpec::Coulomb).unwrap();
        assert_eq!(morse_index(&cp).unwrap(), blocks.line_index());
        assert_eq!(blocks.line_index(), 0);
    }
}

#[test]
fn convex_critical_pentagons_have_no_collinear_triples() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let settings = SolveSettings::default().with_max_seeds(600);
    let space = Space::Polygon { n: 5 };
    let mut seen = 0;
    for _ in 0..3 {
        let q = qv(&[0; 5].map(|_| rng.gen_range(0.3..2.0)));
        for p in find_critical_points(&space, &q, &PotentialSpec::Coulomb, &settings).unwrap() {
            if let Configuration::Polygon(c) = &p.config {
                if !p.aligned && c.is_convex() {
                    seen += 1;
                    assert!(min_triple_area(c.points()) > 1e-6);
                }
            }
        }
    }
    assert!(seen > 0, "no convex critical pentagon found");
}
