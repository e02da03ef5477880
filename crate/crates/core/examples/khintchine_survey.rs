//! Solution counts of δ(x, q) < ψ(H(q)) for random points: the convergent
//! and divergent sides of the Khintchine dichotomy.

use projdio::approx::{khintchine_survey, ArithmeticFunction};
use projdio::measure::MeasureModel;

pub fn run_example() -> projdio::Result<(f64, f64)> {
    let model = MeasureModel::canonical(1)?;
    let divergent = khintchine_survey(&model, 11, &ArithmeticFunction::power(1.0, 2.0)?, 10_000, 50)?;
    let convergent = khintchine_survey(&model, 11, &ArithmeticFunction::power(1.0, 3.0)?, 10_000, 50)?;
    println!("psi = m^-2: median count {}, max {}", divergent.median, divergent.max);
    println!(
        "psi = m^-3: median count {}, samples with solutions above 100: {:.0}%",
        convergent.median,
        100.0 * convergent.tail_fraction_above(100)
    );
    Ok((divergent.median, convergent.tail_fraction_above(100)))
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
