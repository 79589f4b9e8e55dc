use gradon::geometry::{check_bolker, make_euclidean, make_perturbed, Bump, DefiningFunction, Domain, PolarFold};
use proptest::prelude::*;
use proptest::test_runner::Config;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn families() -> Vec<Box<dyn DefiningFunction>> {
    let d2 = Domain::new(2, 1.0).unwrap();
    let d3 = Domain::new(3, 1.0).unwrap();
    vec![
        Box::new(make_euclidean(2).unwrap()),
        Box::new(make_euclidean(3).unwrap()),
        Box::new(make_perturbed(Bump::new(&[0.1, -0.2], 0.6, 1.0).unwrap(), 0.05, &d2, 33).unwrap()),
        Box::new(make_perturbed(Bump::new(&[0.0, 0.1, -0.1], 0.7, 1.0).unwrap(), 0.05, &d3, 17).unwrap()),
        Box::new(PolarFold::new(2.0, 1.25).unwrap()),
    ]
}

fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (Vec<f64>, Vec<f64>) {
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.2..1.2)).collect();
    let mut t: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    if t.iter().all(|c| c.abs() < 1e-3) {
        t[0] = 1.0;
    }
    (x, t)
}

fn shifted(v: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut w = v.to_vec();
    w[i] += h;
    w
}

/// Largest deviation of the analytic derivatives from central differences at step h,
/// over the same 50 points for each h.
fn fd_errors(df: &dyn DefiningFunction, h: f64) -> [f64; 3] {
    let n = df.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut err = [0.0f64; 3];
    let (mut gx, mut gt, mut hm) = (vec![0.0; n], vec![0.0; n], vec![0.0; n * n]);
    let (mut gp, mut gm) = (vec![0.0; n], vec![0.0; n]);
    for _ in 0..50 {
        let (x, t) = random_pair(&mut rng, n);
        df.grad_x(&x, &t, &mut gx);
        df.grad_theta(&x, &t, &mut gt);
        df.mixed_hessian(&x, &t, &mut hm);
        for i in 0..n {
            let dx = (df.eval(&shifted(&x, i, h), &t) - df.eval(&shifted(&x, i, -h), &t)) / (2.0 * h);
            let dt = (df.eval(&x, &shifted(&t, i, h)) - df.eval(&x, &shifted(&t, i, -h))) / (2.0 * h);
            err[0] = err[0].max((dx - gx[i]).abs());
            err[1] = err[1].max((dt - gt[i]).abs());
        }
        for j in 0..n {
            df.grad_x(&x, &shifted(&t, j, h), &mut gp);
            df.grad_x(&x, &shifted(&t, j, -h), &mut gm);
            for i in 0..n {
                let d = (gp[i] - gm[i]) / (2.0 * h);
                err[2] = err[2].max((d - hm[i * n + j]).abs());
            }
        }
    }
    err
}

#[test]
fn derivatives_are_second_order_accurate() {
    for df in families() {
        let coarse = fd_errors(df.as_ref(), 1e-2);
        let fine = fd_errors(df.as_ref(), 1e-3);
        for k in 0..3 {
            // derivatives exact to round-off have no measurable order
            if coarse[k] < 1e-9 {
                assert!(fine[k] < 1e-9, "{} component {k}", df.name());
                continue;
            }
            let order = (coarse[k] / fine[k]).log10();
            assert!(order >= 1.9, "{} component {k}: order {order}", df.name());
        }
    }
}

#[test]
fn euclidean_bolker_passes_at_every_resolution() {
    let domain = Domain::new(2, 1.0).unwrap();
    let df = make_euclidean(2).unwrap();
    for n_x in [8, 11, 16] {
        for n_theta in [8, 13, 32] {
            let r = check_bolker(&df, &domain, n_x, n_theta).unwrap();
            assert!(r.ok(), "{n_x}×{n_theta}: {}", r.summary());
        }
    }
    let domain = Domain::new(3, 1.0).unwrap();
    let r = check_bolker(&make_euclidean(3).unwrap(), &domain, 8, 8).unwrap();
    assert!(r.ok(), "{}", r.summary());
}

proptest! {
    #![proptest_config(Config { cases: 200, failure_persistence: None, ..Config::default() })]

    #[test]
    fn homogeneous_of_degree_one(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for df in families() {
            let (x, t) = random_pair(&mut rng, df.dim());
            let base = df.eval(&x, &t);
            for lambda in [0.5, 1.0, 2.0, 7.0] {
                let scaled: Vec<f64> = t.iter().map(|c| lambda * c).collect();
                let v = df.eval(&x, &scaled);
                let scale = lambda * (x.iter().map(|c| c * c).sum::<f64>() * t.iter().map(|c| c * c).sum::<f64>()).sqrt();
                prop_assert!((v - lambda * base).abs() <= 1e-10 * (lambda * base).abs().max(scale));
            }
        }
    }
}
