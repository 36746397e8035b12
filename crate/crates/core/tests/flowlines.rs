use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use conflux::conformal::make_pair;
use conflux::fields::catalog::{abc_flow, constant, hopf_stereographic, rotation_killing};
use conflux::fields::{ChartDomain, FieldKind, MetricField, SmoothField};
use conflux::flowlines::{geodesic_defect_along, poincare_section, trace, trace_many, write_lines_csv, write_lines_vtk, write_section_csv, StopReason, TraceMode};
use proptest::prelude::*;

fn on_torus(f: SmoothField) -> SmoothField {
    f.with_domain(ChartDomain::torus(3))
}

#[test]
fn constant_field_gives_a_straight_segment() {
    let f = constant(&[1.0, 0.0, 0.0]).with_domain(ChartDomain::boxed(vec![(-20.0, 20.0); 3]));
    let line = trace(&f, &[0.0; 3], 0.1, 100, TraceMode::Parameter).unwrap();
    let end = line.points.last().unwrap();
    assert!((end[0] - 10.0).abs() < 1e-12 && end[1].abs() < 1e-12 && end[2].abs() < 1e-12);
    assert_eq!(line.stop, StopReason::Completed);
    let defect = geodesic_defect_along(&line, &MetricField::euclidean(3), None).unwrap();
    assert!(defect < 1e-9, "{defect}");
}

#[test]
fn lines_stop_at_the_boundary() {
    let f = constant(&[1.0, 0.0]);
    let line = trace(&f, &[0.0, 0.0], 0.1, 100, TraceMode::Parameter).unwrap();
    assert_eq!(line.stop, StopReason::Boundary);
    assert!(line.points.last().unwrap()[0] <= 1.0 + 1e-12);
    assert!(trace(&f, &[3.0, 0.0], 0.1, 10, TraceMode::Parameter).is_err());
    assert!(trace(&f, &[0.0, 0.0], 0.0, 10, TraceMode::Parameter).is_err());
}

#[test]
fn periodic_lines_are_lifted() {
    let f = on_torus(constant(&[0.0, 0.0, 1.0]));
    let line = trace(&f, &[1.0, 1.0, 0.5], 0.01, 1000, TraceMode::Parameter).unwrap();
    assert_eq!(line.stop, StopReason::Completed);
    assert!((line.points.last().unwrap()[2] - 10.5).abs() < 1e-10);
    let wrapped = line.wrapped_points(&ChartDomain::torus(3));
    assert!((wrapped.last().unwrap()[2] - (10.5 - TAU)).abs() < 1e-10);
}

fn closure(f: &SmoothField, seed: &[f64], steps: usize) -> f64 {
    trace(f, seed, TAU / steps as f64, steps, TraceMode::Parameter).unwrap().closure_error()
}

#[test]
fn rotation_orbit_closes_at_fourth_order() {
    let f = rotation_killing(3);
    let (e1, e2) = (closure(&f, &[1.0, 0.0, 0.0], 50), closure(&f, &[1.0, 0.0, 0.0], 100));
    assert!(e1 / e2 >= 12.0, "{e1} {e2}");
    // every point stays on the unit circle to the same order
    let line = trace(&f, &[1.0, 0.0, 0.0], TAU / 100.0, 100, TraceMode::Parameter).unwrap();
    assert!(line.points.iter().all(|p| (p[0].hypot(p[1]) - 1.0).abs() < 1e-6));
}

#[test]
fn hopf_stereographic_orbits_close_at_fourth_order() {
    let f = hopf_stereographic(4.0);
    for seed in [[0.3, -0.2, 0.1], [0.5, 0.4, -0.6]] {
        let (e1, e2) = (closure(&f, &seed, 200), closure(&f, &seed, 400));
        assert!(e1 / e2 >= 12.0, "{seed:?}: {e1} {e2}");
        assert!(e2 < 1e-6);
    }
}

#[test]
fn arclength_mode_steps_by_chart_length() {
    let f = rotation_killing(3);
    let line = trace(&f, &[1.5, 0.0, 0.0], 0.01, 50, TraceMode::Arclength).unwrap();
    for w in line.points.windows(2) {
        let d = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        assert!((d - 0.01).abs() < 1e-7);
    }
}

#[test]
fn abc_lines_are_geodesics_of_the_canonical_metric() {
    let b = on_torus(abc_flow(1.0, 1.0, 1.0));
    let hat = MetricField::euclidean(3);
    let bar = make_pair(&b, &hat).unwrap().bar().clone();
    let torus = ChartDomain::torus(3);
    for seed in [[0.3, 1.1, 2.0], [4.0, 0.2, 5.5]] {
        let line = trace(&b, &seed, 1e-3, 3000, TraceMode::Parameter).unwrap();
        let flat = geodesic_defect_along(&line, &hat, Some(&torus)).unwrap();
        let canonical = geodesic_defect_along(&line, &bar, Some(&torus)).unwrap();
        assert!(canonical < 5e-4, "{canonical}");
        assert!(flat > 100.0 * canonical && flat > 0.1, "{flat} vs {canonical}");
    }
}

#[test]
fn canonical_defect_shrinks_under_refinement() {
    let b = on_torus(abc_flow(1.0, 1.0, 1.0));
    let bar = make_pair(&b, &MetricField::euclidean(3)).unwrap().bar().clone();
    let torus = ChartDomain::torus(3);
    let defect = |h: f64| {
        let line = trace(&b, &[0.3, 1.1, 2.0], h, (2.0 / h) as usize, TraceMode::Parameter).unwrap();
        geodesic_defect_along(&line, &bar, Some(&torus)).unwrap()
    };
    let (coarse, fine) = (defect(2e-2), defect(1e-2));
    assert!(fine < coarse / 2.0, "{coarse} {fine}");
}

#[test]
fn hopf_lines_are_round_geodesics() {
    let b = hopf_stereographic(4.0);
    let round = MetricField::stereographic_sphere();
    let line = trace(&b, &[0.5, 0.4, -0.6], 1e-3, 2000, TraceMode::Parameter).unwrap();
    let d_round = geodesic_defect_along(&line, &round, None).unwrap();
    let d_flat = geodesic_defect_along(&line, &MetricField::euclidean(3), None).unwrap();
    assert!(d_round < 1e-5, "{d_round}");
    assert!(d_flat > 0.1);
}

#[test]
fn vertical_lines_are_half_plane_geodesics() {
    let up = SmoothField::new("up", FieldKind::Vector, 2, Arc::new(|_| vec![0.0, 1.0])).with_domain(ChartDomain::boxed(vec![(-1.0, 1.0), (0.5, 3.0)]));
    let line = trace(&up, &[0.2, 0.6], 0.01, 200, TraceMode::Parameter).unwrap();
    let d = geodesic_defect_along(&line, &MetricField::half_plane(), None).unwrap();
    assert!(d < 1e-9, "{d}");
    // horizontal lines are not
    let right = SmoothField::new("right", FieldKind::Vector, 2, Arc::new(|_| vec![1.0, 0.0])).with_domain(ChartDomain::boxed(vec![(-1.0, 1.0), (0.5, 3.0)]));
    let line = trace(&right, &[-0.5, 1.0], 0.01, 100, TraceMode::Parameter).unwrap();
    assert!((geodesic_defect_along(&line, &MetricField::half_plane(), None).unwrap() - 1.0).abs() < 1e-3);
}

#[test]
fn defect_is_invariant_under_resampling() {
    let b = on_torus(abc_flow(1.0, 1.0, 1.0));
    let torus = ChartDomain::torus(3);
    // long enough that the largest defect is attained away from the ends
    let line = trace(&b, &[0.3, 1.1, 2.0], 5e-4, 24_000, TraceMode::Parameter).unwrap();
    let flat = MetricField::euclidean(3);
    let (full, half) = (geodesic_defect_along(&line, &flat, Some(&torus)).unwrap(), geodesic_defect_along(&line.decimated(), &flat, Some(&torus)).unwrap());
    assert!((full - half).abs() < 1e-6 * full.max(half), "{full} {half}");
    assert!(geodesic_defect_along(&trace(&b, &[0.3, 1.1, 2.0], 1e-3, 1, TraceMode::Parameter).unwrap(), &flat, None).is_err());
}

#[test]
fn sections_of_a_vertical_flow_return_at_fixed_points() {
    let f = on_torus(constant(&[0.0, 0.0, 1.0]));
    let res = poincare_section(&f, &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[vec![1.0, 2.0, 0.5]], 0.05, 5, 10_000);
    assert!(res[0].error.is_none());
    assert_eq!(res[0].crossings.len(), 5);
    for c in &res[0].crossings {
        assert_eq!(c.sign, 1);
        assert!((c.point[0] - 1.0).abs() < 1e-12 && (c.point[1] - 2.0).abs() < 1e-12);
        assert!(c.point[2].min(TAU - c.point[2]).abs() < 1e-9);
    }
}

#[test]
fn sections_of_the_rotation_hit_both_sides() {
    let f = rotation_killing(3);
    let res = poincare_section(&f, &[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[vec![0.0, 1.2, 0.1]], 0.01, 4, 10_000);
    let xs: Vec<f64> = res[0].crossings.iter().map(|c| c.point[0]).collect();
    assert_eq!(xs.len(), 4);
    for (i, x) in xs.iter().enumerate() {
        let expect = if i % 2 == 0 { -1.2 } else { 1.2 };
        assert!((x - expect).abs() < 1e-8, "{xs:?}");
    }
    // a line parallel to the plane never crosses it
    let f = on_torus(constant(&[1.0, 0.0, 0.0]));
    let res = poincare_section(&f, &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0], &[vec![0.0, 0.0, 1.0]], 0.1, 3, 500);
    assert!(res[0].error.is_some());
}

#[test]
fn abc_sections_and_exports_are_deterministic() {
    let f = on_torus(abc_flow(1.0, 1.0, 1.0));
    let seeds: Vec<Vec<f64>> = (0..20).map(|i| vec![0.3 * i as f64, 0.1 + 0.29 * i as f64, 0.0]).collect();
    let a = poincare_section(&f, &[0.0, 0.0, PI], &[0.0, 0.0, 1.0], &seeds, 0.05, 200, 200_000);
    let b = poincare_section(&f, &[0.0, 0.0, PI], &[0.0, 0.0, 1.0], &seeds, 0.05, 200, 200_000);
    assert_eq!(a, b);
    let (mut ca, mut cb) = (Vec::new(), Vec::new());
    write_section_csv(&a, &mut ca).unwrap();
    write_section_csv(&b, &mut cb).unwrap();
    assert_eq!(ca, cb);
    let lines: Vec<_> = trace_many(&f, &seeds[..3], 0.05, 100, TraceMode::Parameter).into_iter().map(Result::unwrap).collect();
    let mut csv = Vec::new();
    write_lines_csv(&lines, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 1 + 3 * 101);
    let mut vtk = Vec::new();
    write_lines_vtk(&lines, &mut vtk, "abc").unwrap();
    assert!(String::from_utf8(vtk).unwrap().contains("LINES 3 306"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn consecutive_points_respect_the_speed_bound(x in 0.0..TAU, y in 0.0..TAU, z in 0.0..TAU, h in 1e-3..0.2f64) {
        let f = on_torus(abc_flow(1.0, 1.0, 1.0));
        let line = trace(&f, &[x, y, z], h, 50, TraceMode::Parameter).unwrap();
        // |B| ≤ |A| + |B| + |C| = 3 for the unit ABC flow
        for w in line.points.windows(2) {
            let d = w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            prop_assert!(d <= 2.0 * h * 3.0);
        }
    }
}
