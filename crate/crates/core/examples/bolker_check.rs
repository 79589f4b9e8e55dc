//! Sampled Bolker checks for the euclidean, a perturbed and a folded family.
use gradon::geometry::{check_bolker, make_euclidean, make_perturbed, Bump, DefiningFunction, Domain, PolarFold};

fn main() -> gradon::Result<()> {
    let domain = Domain::new(2, 1.0)?;
    let families: Vec<Box<dyn DefiningFunction>> = vec![
        Box::new(make_euclidean(2)?),
        Box::new(make_perturbed(Bump::new(&[0.1, -0.1], 0.6, 1.0)?, 0.01, &domain, 33)?),
        Box::new(PolarFold::new(2.0, 1.25)?),
    ];
    for df in &families {
        let report = check_bolker(df.as_ref(), &domain, 24, 64)?;
        println!("{}: {}", df.name(), if report.ok() { "PASS" } else { "FAIL" });
        println!("{}\n", report.summary());
    }
    Ok(())
}
