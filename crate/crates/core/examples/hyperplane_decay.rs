//! How much of a ball lies near a hyperplane, and the fitted decay exponent.

use projdio::geometry::{normalize_point, ProjHyperplane};
use projdio::measure::{decay_ratio, fit_decay_exponent, MeasureModel};

pub fn run_example() -> projdio::Result<f64> {
    let model = MeasureModel::canonical(2)?;
    let x = normalize_point(&[1.0, 0.0, 0.0])?;
    let plane = ProjHyperplane::new(&[0.0, 0.0, 1.0])?;
    let r = 0.5;
    let mut rows = Vec::new();
    for (i, eps) in [0.2, 0.1, 0.05, 0.025].into_iter().enumerate() {
        let ratio = decay_ratio(&model, &plane, &x, r, eps, 100_000, i as u64)?;
        println!("eps/r = {:.3}: ratio {ratio:.4}", eps / r);
        rows.push((eps / r, ratio));
    }
    let eta = fit_decay_exponent(&rows).unwrap_or(f64::NAN);
    println!("fitted exponent {eta:.3}");
    Ok(eta)
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
