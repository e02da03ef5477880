//! Ball masses of the canonical and Cantor-slope measures and their power laws.

use projdio::geometry::slope_embed;
use projdio::measure::{ball_measure, monte_carlo_set_measure, verify_power_law, MeasureModel};

pub fn run_example() -> projdio::Result<(f64, f64)> {
    let canon = MeasureModel::canonical(2)?;
    let x = projdio::geometry::normalize_point(&[1.0, 1.0, 1.0])?;
    let r = 0.3;
    let closed = ball_measure(&canon, &x, r)?;
    let (mc, se) = monte_carlo_set_measure(2, |y| projdio::geometry::delta(&x, y).unwrap() <= r, 200_000, 5);
    println!("P^2 ball of radius {r}: closed form {closed:.6}, Monte Carlo {mc:.6} ± {se:.6}");

    let radii = [0.5, 0.1, 0.02, 0.004];
    let rep = verify_power_law(&canon, &radii, &[x.clone()])?;
    println!("canonical ratios m(B)/r^2 in [{:.4}, {:.4}]", rep.a_emp, rep.b_emp);

    let cantor = MeasureModel::cantor_slope();
    let centers = [slope_embed(0.25), slope_embed(2.0 / 3.0)];
    let rep = verify_power_law(&cantor, &radii, &centers)?;
    println!(
        "Cantor ratios m(B)/r^{:.4} in [{:.4}, {:.4}], reference window {:?}",
        cantor.regularity_exponent, rep.a_emp, rep.b_emp, rep.reference_window
    );
    Ok((closed, mc))
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
