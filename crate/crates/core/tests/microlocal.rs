use std::sync::Arc;

use gradon::geometry::{make_euclidean, ConstantWeight, Domain};
use gradon::microlocal::{conormal_probe, decay_scan, default_ladder, fbi, fbi_limit, Verdict};
use gradon::phantom::Phantom;
use gradon::transform::{Grid, RadonTransform, ScalarField};
use gradon::Error;
use proptest::prelude::*;
use proptest::test_runner::Config;

fn grid(cells: usize) -> Grid {
    Grid::new(Domain::new(2, 1.0).unwrap(), cells).unwrap()
}

fn disk(cells: usize) -> ScalarField {
    Phantom::disk(0.5).render(&grid(cells), 16).unwrap()
}

fn directions() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0],
        vec![-1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, -1.0],
        vec![1.0, 1.0],
        vec![1.0, -1.0],
    ]
}

#[test]
fn zero_field_has_zero_transform() {
    let f = ScalarField::zeros(grid(64));
    let v = fbi(&f, &[0.1, 0.2], &[1.0, 0.0], 8.0).unwrap();
    assert_eq!(v.norm(), 0.0);
    let ladder = default_ladder(&f);
    assert!(matches!(
        decay_scan(&f, &[0.0, 0.0], &directions(), &ladder),
        Err(Error::DegenerateFit { .. })
    ));
}

#[test]
fn gaussian_matches_closed_form() {
    // ∫ e^{−iλy·ξ̂} e^{−λ|y|²/2} e^{−|y|²/(2σ²)} dy = (2π/a) e^{−λ²/(2a)}, a = λ + σ⁻²
    let sigma: f64 = 0.3;
    let f = Phantom::gaussian(2, sigma).render(&grid(128), 1).unwrap();
    for lambda in [8.0, 11.3, 16.0, 22.6, 32.0] {
        let a = lambda + sigma.powi(-2);
        let want = 2.0 * std::f64::consts::PI / a * (-lambda * lambda / (2.0 * a)).exp();
        for xi in [[1.0, 0.0], [0.6, -0.8]] {
            let got = fbi(&f, &[0.0, 0.0], &xi, lambda).unwrap().norm();
            assert!((got - want).abs() <= 0.01 * want, "λ={lambda}: {got} vs {want}");
        }
    }
}

#[test]
fn half_plane_decays_like_three_halves_power() {
    let g = grid(128);
    let f = ScalarField::from_fn(g, |x| {
        if x[0] > 0.0 && x[0] <= 1.0 && x[1].abs() <= 1.0 {
            1.0
        } else {
            0.0
        }
    });
    let scan = decay_scan(&f, &[0.0, 0.0], &[vec![1.0, 0.0]], &default_ladder(&f)).unwrap();
    let fit = &scan.fits[0];
    assert_eq!(fit.verdict, Verdict::WavefrontSuspect);
    assert!((fit.poly_exponent - 1.5).abs() < 0.15, "q = {}", fit.poly_exponent);
}

#[test]
fn disk_boundary_normals_and_tangents() {
    let f = disk(128);
    let ladder = default_ladder(&f);
    let scan = decay_scan(&f, &[0.5, 0.0], &directions(), &ladder).unwrap();
    let v: Vec<Verdict> = scan.fits.iter().map(|d| d.verdict).collect();
    assert_eq!(v[0], Verdict::WavefrontSuspect);
    assert_eq!(v[1], Verdict::WavefrontSuspect);
    for d in &v[2..] {
        assert_eq!(*d, Verdict::AnalyticRegular);
    }
    let last = ladder.len() - 1;
    let normal = scan.fits[0].magnitudes[last];
    for fit in &scan.fits[2..4] {
        assert!(normal >= 10.0 * fit.magnitudes[last]);
    }
    assert!(scan.to_csv().lines().count() == 1 + 6 * ladder.len());
}

#[test]
fn gaussian_is_regular_everywhere() {
    let f = Phantom::gaussian(2, 0.3).render(&grid(128), 1).unwrap();
    let ladder = default_ladder(&f);
    for x0 in [[0.0, 0.0], [0.2, -0.1], [0.5, 0.4]] {
        let scan = decay_scan(&f, &x0, &directions(), &ladder).unwrap();
        assert!(
            scan.fits.iter().all(|d| d.verdict == Verdict::AnalyticRegular),
            "{x0:?}"
        );
    }
}

#[test]
fn verdicts_survive_refinement() {
    let dirs = directions();
    let coarse = disk(128);
    let fine = disk(256);
    for x0 in [[0.5, 0.0], [0.8, 0.3]] {
        let a = decay_scan(&coarse, &x0, &dirs, &default_ladder(&coarse)).unwrap();
        let b = decay_scan(&fine, &x0, &dirs, &default_ladder(&fine)).unwrap();
        for (p, q) in a.fits.iter().zip(&b.fits) {
            assert_eq!(p.verdict, q.verdict, "{x0:?} {:?}", p.direction);
        }
    }
}

#[test]
fn conormal_reports_agree() {
    let g = grid(128);
    let op = RadonTransform::new(
        Arc::new(make_euclidean(2).unwrap()),
        Arc::new(ConstantWeight::unit(2).unwrap()),
        g,
        64,
    )
    .unwrap();
    let d = disk(128);
    let gauss = Phantom::gaussian(2, 0.3).render(&g, 1).unwrap();
    let ladder = default_ladder(&d);

    let tangent = conormal_probe(&op, &d, 0.5, &[1.0, 0.0], &ladder).unwrap();
    assert!(!tangent.sinogram_smooth);
    assert_eq!(tangent.points[0].fit.verdict, Verdict::WavefrontSuspect);
    assert_eq!(tangent.agreements(), 8);

    let smooth = conormal_probe(&op, &gauss, 0.5, &[1.0, 0.0], &ladder).unwrap();
    assert!(smooth.sinogram_smooth);
    assert!(smooth.points.iter().all(|p| p.fit.verdict == Verdict::AnalyticRegular));
    assert_eq!(smooth.agreements(), 8);

    let far = conormal_probe(&op, &d, 0.8, &[1.0, 0.0], &ladder).unwrap();
    assert!(far.sinogram_smooth);
    assert!(far.consistent());
}

#[test]
fn invalid_requests_are_rejected() {
    let f = disk(64);
    let limit = fbi_limit(&f);
    assert!(matches!(
        fbi(&f, &[0.0, 0.0], &[1.0, 0.0], 1.01 * limit),
        Err(Error::Nyquist { .. })
    ));
    assert!(fbi(&f, &[1.3, 0.0], &[1.0, 0.0], 8.0).is_err());
    assert!(fbi(&f, &[0.0, 0.0], &[0.0, 0.0], 8.0).is_err());
    assert!(decay_scan(&f, &[0.0, 0.0], &directions(), &[8.0, 16.0, 12.0, 20.0]).is_err());
    assert!(decay_scan(&f, &[0.0, 0.0], &directions(), &[8.0, 16.0]).is_err());
}

fn field(values: Vec<f64>) -> ScalarField {
    ScalarField::from_values(grid(16), values).unwrap()
}

proptest! {
    #![proptest_config(Config { cases: 40, failure_persistence: None, ..Config::default() })]

    #[test]
    fn linear_in_the_field(
        a in prop::collection::vec(-1.0f64..1.0, 256),
        b in prop::collection::vec(-1.0f64..1.0, 256),
        s in -3.0f64..3.0,
        lambda in 1.0f64..10.0,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let xi = [angle.cos(), angle.sin()];
        let x0 = [0.1, -0.2];
        let combo: Vec<f64> = a.iter().zip(&b).map(|(p, q)| s * p + q).collect();
        let lhs = fbi(&field(combo), &x0, &xi, lambda).unwrap();
        let rhs = fbi(&field(a.clone()), &x0, &xi, lambda).unwrap() * s + fbi(&field(b), &x0, &xi, lambda).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        let neg: Vec<f64> = a.iter().map(|v| -v).collect();
        let m = fbi(&field(a), &x0, &xi, lambda).unwrap().norm();
        prop_assert!((fbi(&field(neg), &x0, &xi, lambda).unwrap().norm() - m).abs() <= 1e-14 * (1.0 + m));
    }

    #[test]
    fn bounded_by_window_mass(
        a in prop::collection::vec(-1.0f64..1.0, 256),
        lambda in 1.0f64..10.0,
        x in -1.0f64..1.0,
        y in -1.0f64..1.0,
    ) {
        let f = field(a);
        let g = *f.grid();
        let x0 = [x, y];
        let bound: f64 = f
            .values()
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let p = g.point(i);
                let r2 = (p[0] - x) * (p[0] - x) + (p[1] - y) * (p[1] - y);
                (-0.5 * lambda * r2).exp() * v.abs()
            })
            .sum::<f64>()
            * g.cell_volume();
        let v = fbi(&f, &x0, &[0.0, 1.0], lambda).unwrap().norm();
        prop_assert!(v <= bound * (1.0 + 1e-12));
    }
}
