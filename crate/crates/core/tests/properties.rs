use std::f64::consts::PI;

use proptest::prelude::*;
use quermass::geometry::{delta_functionals, functionals, Configuration, MarkedPoint, RadiusBounds, Rect, Theta};
use quermass::oracle::{pixel_functionals, rasterize};
use quermass::validation::combination_bound;
use quermass::Error;

const R0: f64 = 0.5;
const R1: f64 = 1.0;

fn disk() -> impl Strategy<Value = MarkedPoint> {
    (0.0..8.0f64, 0.0..8.0f64, R0..=R1).prop_map(|(x, y, r)| MarkedPoint::new(x, y, r))
}

fn config(points: &[MarkedPoint]) -> Configuration {
    Configuration::with_points(Rect::square(8.0), RadiusBounds::new(R0, R1).unwrap(), points.iter().copied()).unwrap()
}

fn moved(points: &[MarkedPoint], f: impl Fn(f64, f64) -> (f64, f64)) -> Configuration {
    let moved: Vec<MarkedPoint> = points
        .iter()
        .map(|p| {
            let (x, y) = f(p.x, p.y);
            MarkedPoint::new(x, y, p.r)
        })
        .collect();
    Configuration::with_points(
        Rect::new(-100.0, -100.0, 100.0, 100.0),
        RadiusBounds::new(R0, R1).unwrap(),
        moved,
    )
    .unwrap()
}

fn is_degenerate<T>(r: &Result<T, Error>) -> bool {
    matches!(r, Err(Error::DegenerateGeometry(_)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn incremental_matches_recompute(points in prop::collection::vec(disk(), 0..25), p in disk()) {
        let cfg = config(&points);
        let d = delta_functionals(&p, &cfg);
        let before = functionals(&cfg);
        let mut with = cfg.clone();
        with.insert(p).unwrap();
        let after = functionals(&with);
        prop_assume!(!is_degenerate(&d) && !is_degenerate(&before) && !is_degenerate(&after));
        let (d, full) = (d.unwrap(), after.unwrap() - before.unwrap());
        prop_assert!((d.d_area - full.d_area).abs() <= 1e-9 * full.d_area.abs().max(1.0));
        prop_assert!((d.d_perimeter - full.d_perimeter).abs() <= 1e-9 * full.d_perimeter.abs().max(1.0));
        prop_assert_eq!(d.d_euler, full.d_euler);
        prop_assert_eq!(d.d_components, full.d_components);
        prop_assert_eq!(d.d_holes, full.d_holes);
    }

    #[test]
    fn functionals_are_isometry_invariant(
        points in prop::collection::vec(disk(), 1..25),
        angle in 0.0..(2.0 * PI),
        dx in -20.0..20.0f64,
        dy in -20.0..20.0f64,
    ) {
        let base = functionals(&config(&points));
        let (s, c) = angle.sin_cos();
        let rotated = functionals(&moved(&points, |x, y| (c * x - s * y + dx, s * x + c * y + dy)));
        let mirrored = functionals(&moved(&points, |x, y| (-x, y)));
        prop_assume!(!is_degenerate(&base) && !is_degenerate(&rotated) && !is_degenerate(&mirrored));
        let base = base.unwrap();
        for f in [rotated.unwrap(), mirrored.unwrap()] {
            prop_assert!((f.area - base.area).abs() <= 1e-9 * base.area.max(1.0));
            prop_assert!((f.perimeter - base.perimeter).abs() <= 1e-9 * base.perimeter.max(1.0));
            prop_assert_eq!((f.euler, f.components, f.holes), (base.euler, base.components, base.holes));
        }
    }

    #[test]
    fn local_changes_are_bounded(
        points in prop::collection::vec(disk(), 0..30),
        p in disk(),
        t1 in -1.0..1.0f64,
        t2 in -1.0..1.0f64,
        t3 in -1.0..1.0f64,
    ) {
        let d = delta_functionals(&p, &config(&points));
        prop_assume!(!is_degenerate(&d));
        let d = d.unwrap();
        let tol = 1e-9;
        prop_assert!(d.d_area >= -tol && d.d_area <= PI * R1 * R1 + tol);
        prop_assert!(d.d_perimeter >= -2.0 * PI * (R1 + R0).powi(2) / R0 - tol);
        prop_assert!(d.d_perimeter <= 2.0 * PI * R1 + tol);
        let dc = d.d_components as f64;
        prop_assert!(dc >= -PI * (1.0 + R1 / R0) && dc <= 1.0);
        let theta = Theta::new(t1, t2, t3);
        prop_assert!(t1 * d.d_area + t2 * d.d_perimeter + t3 * dc <= combination_bound(&theta, R0, R1) + tol);
    }

    #[test]
    fn oracle_refinement_is_stable(points in prop::collection::vec(disk(), 1..12)) {
        let cfg = config(&points);
        let coarse = pixel_functionals(&rasterize(&cfg, R0 / 32.0).unwrap());
        let fine = pixel_functionals(&rasterize(&cfg, R0 / 64.0).unwrap());
        prop_assume!(!coarse.degenerate && !fine.degenerate);
        prop_assert_eq!((coarse.components, coarse.holes), (fine.components, fine.holes));
        let exact = functionals(&cfg);
        prop_assume!(!is_degenerate(&exact));
        let exact = exact.unwrap();
        prop_assert!((coarse.area - exact.area).abs() <= 2.0 * (R0 / 32.0) * exact.perimeter);
        prop_assert!((fine.area - exact.area).abs() <= 2.0 * (R0 / 64.0) * exact.perimeter);
    }
}
