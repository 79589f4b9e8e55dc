use std::f64::consts::PI;
use std::sync::Arc;

use gradon::geometry::{make_euclidean, ConstantWeight, DefiningFunction, Domain, PolarFold, ScaledWeight, Weight};
use gradon::normal::{apply_normal, PrincipalSymbol};
use gradon::phantom::Phantom;
use gradon::recon::{
    cg_normal_solve, estimate_stability_constant, inverse_symbol, perturbation_sweep, precondition, sobolev_norm,
    sobolev_norm_periodic, CgOptions, PerturbationFamily, Preconditioner, SobolevOrder, SweepOptions,
};
use gradon::transform::{Grid, RadonTransform, ScalarField, Sinogram, SinogramLayout};
use gradon::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn euclidean() -> (Arc<dyn DefiningFunction>, Arc<dyn Weight>) {
    (
        Arc::new(make_euclidean(2).unwrap()),
        Arc::new(ConstantWeight::unit(2).unwrap()),
    )
}

fn grid(cells: usize) -> Grid {
    Grid::new(Domain::new(2, 1.0).unwrap(), cells).unwrap()
}

#[test]
fn sobolev_single_mode_on_torus() {
    let g = grid(32);
    let period = 32.0 * g.spacing();
    let k = [2.0 * PI * 3.0 / period, -2.0 * PI * 5.0 / period];
    let f = ScalarField::from_fn(g, |x| (k[0] * x[0] + k[1] * x[1]).cos());
    let k2 = k[0] * k[0] + k[1] * k[1];
    for m in [0.0, 1.0, 2.5] {
        let got = sobolev_norm_periodic(&f, SobolevOrder::new(m).unwrap());
        let want = (1.0 + k2).powf(0.5 * m) * f.norm();
        assert!((got - want).abs() <= 1e-12 * want, "m={m}: {got} vs {want}");
    }
}

#[test]
fn sobolev_order_zero_is_l2() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let g = grid(24);
    let f = ScalarField::from_fn(g, |_| rng.gen_range(-1.0..1.0));
    let got = sobolev_norm_periodic(&f, SobolevOrder::new(0.0).unwrap());
    assert!((got - f.norm()).abs() <= 1e-12 * f.norm());
    assert!(SobolevOrder::new(-1.0).is_err());
    assert!(SobolevOrder::new(f64::NAN).is_err());
}

#[test]
fn sobolev_refinement() {
    let order = SobolevOrder::new(1.0).unwrap();
    let coarse = sobolev_norm(&Phantom::gaussian(2, 0.2).render(&grid(64), 1).unwrap(), order);
    let fine = sobolev_norm(&Phantom::gaussian(2, 0.2).render(&grid(256), 1).unwrap(), order);
    assert!((coarse - fine).abs() < 0.01 * fine, "{coarse} vs {fine}");
}

#[test]
fn euclidean_inverse_symbol() {
    let (df, w) = euclidean();
    let sym = PrincipalSymbol::new(df, w).unwrap();
    for xi in [[3.0f64, 4.0], [-0.5, 0.0], [10.0, -10.0]] {
        let want = PI * (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        let got = inverse_symbol(&sym, &[0.0, 0.0], &xi).unwrap();
        assert!((got - want).abs() < 1e-10 * want);
    }
}

#[test]
fn preconditioner_undoes_normal_operator() {
    let g = grid(64);
    let (df, w) = euclidean();
    let op = RadonTransform::new(df.clone(), w.clone(), g, 128).unwrap();
    let sym = PrincipalSymbol::new(df, w).unwrap();
    let f = Phantom::gaussian(2, 0.2).render(&g, 1).unwrap();
    let nf = apply_normal(&op, &f).unwrap();
    let pf = precondition(&nf, &sym).unwrap();
    assert!(pf.relative_error(&f) < 0.5 * nf.relative_error(&f));
    let zero = precondition(&ScalarField::zeros(g), &sym).unwrap();
    assert!(zero.values().iter().all(|v| *v == 0.0));
}

#[test]
fn zero_data_zero_iterations() {
    let g = grid(16);
    let (df, w) = euclidean();
    let op = RadonTransform::new(df, w, g, 16).unwrap();
    let r = cg_normal_solve(&op, &Sinogram::zeros(op.layout().clone()), None, &CgOptions::default()).unwrap();
    assert_eq!(r.iterations, 0);
    assert!(r.converged);
    assert!(r.field.values().iter().all(|v| *v == 0.0));
    let bad = CgOptions {
        tol: 0.0,
        ..CgOptions::default()
    };
    assert!(cg_normal_solve(&op, &Sinogram::zeros(op.layout().clone()), None, &bad).is_err());
}

#[test]
fn cg_energy_decreases_and_error_improves_with_angles() {
    let g = grid(48);
    let (df, w) = euclidean();
    let sym = PrincipalSymbol::new(df.clone(), w.clone()).unwrap();
    let pre = Preconditioner::new(&sym, &g).unwrap();
    let truth = Phantom::disk(0.6).render(&g, 3).unwrap();
    let options = CgOptions {
        tol: 1e-10,
        max_iter: 60,
        stagnation_window: 60,
    };
    let mut errors = Vec::new();
    for n_theta in [45, 90, 180] {
        let layout = SinogramLayout::covering(df.as_ref(), &g, n_theta, 1.0).unwrap();
        let op = RadonTransform::with_layout(df.clone(), w.clone(), g, layout).unwrap();
        let data = op.forward(&truth).unwrap();
        let r = cg_normal_solve(&op, &data, Some(&pre), &options).unwrap();
        for pair in r.log.windows(2) {
            assert!(pair[1].energy <= pair[0].energy + 1e-12 * pair[0].energy.abs());
        }
        assert!(r.field.padding_nonzeros() == 0);
        errors.push(r.field.relative_error(&truth));
    }
    assert!(
        errors[1] <= errors[0] * 1.01 && errors[2] <= errors[1] * 1.01,
        "{errors:?}"
    );
    assert!(errors[2] < 0.1, "{errors:?}");
}

#[test]
fn stagnation_is_reported() {
    let g = grid(12);
    let (df, w) = euclidean();
    let op = RadonTransform::new(df, w, g, 24).unwrap();
    let data = op.forward(&Phantom::disk(0.5).render(&g, 2).unwrap()).unwrap();
    let options = CgOptions {
        tol: 1e-300,
        max_iter: 100_000,
        stagnation_window: 5,
    };
    let r = cg_normal_solve(&op, &data, None, &options);
    assert!(matches!(r, Err(Error::Stagnation { .. })), "{r:?}");
}

#[test]
fn stability_constant_scaling_and_bound() {
    let g = grid(16);
    let (df, w) = euclidean();
    let op = RadonTransform::new(df.clone(), w.clone(), g, 32).unwrap();
    let report = estimate_stability_constant(&op).unwrap();
    assert!(report.c_est.is_finite() && report.c_est > 0.0);
    assert!((report.sigma_min - report.sigma_min_eig).abs() < 1e-6 * report.sigma_min);

    let doubled: Arc<dyn Weight> = Arc::new(ScaledWeight::new(w, 2.0));
    let op2 = RadonTransform::new(df, doubled, g, 32).unwrap();
    let r2 = estimate_stability_constant(&op2).unwrap();
    assert!((r2.c_est * 4.0 - report.c_est).abs() < 1e-8 * report.c_est);

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let order = SobolevOrder::for_dim(2);
    for _ in 0..20 {
        let mut f = ScalarField::from_fn(g, |_| rng.gen_range(-1.0..1.0));
        f.restrict_to_m();
        let n = f.norm();
        f.scale(1.0 / n);
        let h = sobolev_norm(&apply_normal(&op, &f).unwrap(), order);
        assert!(1.0 <= 1.1 * report.c_est * h);
    }
}

#[test]
fn folded_geometry_is_noninjective() {
    let g = grid(16);
    let fold: Arc<dyn DefiningFunction> = Arc::new(PolarFold::new(2.0, 1.25).unwrap());
    let op = RadonTransform::new(fold, Arc::new(ConstantWeight::unit(2).unwrap()), g, 32).unwrap();
    let (df, w) = euclidean();
    let base = estimate_stability_constant(&RadonTransform::new(df, w, g, 32).unwrap()).unwrap();
    let sigma = match estimate_stability_constant(&op) {
        Ok(r) => r.sigma_min,
        Err(Error::NonInjective { sigma_min }) => sigma_min,
        Err(e) => panic!("{e}"),
    };
    assert!(sigma * 10.0 <= base.sigma_min);
}

#[test]
fn perturbation_sweep_is_linear_in_delta() {
    let g = grid(16);
    let w: Arc<dyn Weight> = Arc::new(ConstantWeight::unit(2).unwrap());
    let family = PerturbationFamily::standard(g.domain()).unwrap();
    let truth = Phantom::gaussian(2, 0.3).render(&g, 1).unwrap();
    let deltas = [0.0, 1e-3, 1e-2, 1e-1];
    let sweep = perturbation_sweep(&g, w, &family, &deltas, &truth, &SweepOptions::default()).unwrap();
    assert_eq!(sweep.rows[0].opnorm, 0.0);
    assert_eq!(sweep.rows[0].dist_c4, 0.0);
    assert!(sweep.rows[0].recon_err < 1e-4);
    let fit = sweep.fit.unwrap();
    assert!((fit.slope - 1.0).abs() <= 0.2, "{fit:?}");
    assert!(sweep.absorption_ok && sweep.margin_ok);
    for r in &sweep.rows {
        assert!(r.dist_c2 <= r.dist_c3 && r.dist_c3 <= r.dist_c4);
    }
    let csv = sweep.to_csv();
    assert_eq!(csv.lines().count(), deltas.len() + 2);
    assert!(csv.lines().last().unwrap().starts_with("# fit slope="));
}

#[test]
fn sweep_rejects_inadmissible_family() {
    let g = grid(12);
    let w: Arc<dyn Weight> = Arc::new(ConstantWeight::unit(2).unwrap());
    let family = PerturbationFamily::standard(g.domain()).unwrap();
    let truth = Phantom::gaussian(2, 0.3).render(&g, 1).unwrap();
    let r = perturbation_sweep(&g, w.clone(), &family, &[0.1, 50.0], &truth, &SweepOptions::default());
    assert!(matches!(r, Err(Error::BolkerFailure(_))), "{r:?}");
    let r = perturbation_sweep(&g, w, &family, &[0.1, 0.01], &truth, &SweepOptions::default());
    assert!(matches!(r, Err(Error::InvalidParameter { .. })));
}
