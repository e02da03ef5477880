//! Best approximations, approximation constants and Dirichlet witnesses.

use projdio::approx::{
    approx_constant, approx_constant_record, best_approx, dirichlet_witness, hurwitz_special_points,
    named_targets, HeightNorm,
};

pub fn run_example() -> projdio::Result<f64> {
    for (name, x) in named_targets() {
        let b = best_approx(&x, 1000)?;
        println!("{name:>14}: nearest of height <= 1000 is {:?} at δ = {:.3e}", b.best.coords(), b.dist);
    }
    let golden = &hurwitz_special_points()[0];
    let max = approx_constant(golden, 10_000)?;
    let euc = approx_constant_record(golden, 10_000, HeightNorm::Euclidean)?;
    println!("golden line: min H^2 δ = {max:.6} (max height), {:.6} (Euclidean size)", euc.normalized);
    if let Some(q) = dirichlet_witness(golden, 10_000, 0.5)? {
        println!("first witness for c = 0.5: {:?}", q.coords());
    }
    Ok(euc.normalized)
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
