//! Builds a nested-ball construction and certifies its leaves as badly
//! approximable up to the construction height.

use projdio::badset::{build_construction, certify_leaves, dimension_lower_stat, extract_bad_point, KtvParams};
use projdio::measure::MeasureModel;

pub fn run_example() -> projdio::Result<f64> {
    let params = KtvParams::new(1, 8.0, 2, MeasureModel::canonical(1)?)?;
    let tree = build_construction(&params)?;
    tree.check_invariants()?;
    for l in &tree.levels {
        println!("round {}: {} balls, {} pruned", l.round, l.balls.len(), l.pruned.len());
    }
    let first = extract_bad_point(&tree)?;
    println!(
        "first leaf {:?}: min H^2 δ = {:.4e} over H <= {} (witness {:?})",
        first.center.rep(),
        first.c_emp,
        first.h_verified,
        first.witness.coords()
    );
    let certs = certify_leaves(&tree)?;
    let worst = certs.iter().map(|c| c.c_emp).fold(f64::INFINITY, f64::min);
    println!("{} leaves, worst constant {worst:.3e} >= {:.3e}", certs.len(), params.c_bad);
    println!("dimension statistic {:.3}", dimension_lower_stat(&tree)?);
    Ok(worst)
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
