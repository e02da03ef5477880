//! The sine metric on projective space and the slope chart of the line.

use projdio::geometry::{chart_distance, delta, dist_to_hyperplane, normalize_point, slope_embed, wedge_norm, ProjHyperplane};

pub fn run_example() -> projdio::Result<f64> {
    let x = normalize_point(&[1.0, 2.0, -2.0])?;
    let y = normalize_point(&[-3.0, -6.0, 6.0])?;
    println!("scaled copies coincide: δ = {}", delta(&x, &y)?);

    let e0 = normalize_point(&[1.0, 0.0, 0.0])?;
    let d = delta(&x, &e0)?;
    println!("δ([1,2,-2], e0) = {d:.6}  (|x ∧ e0| = {:.6})", wedge_norm(x.rep(), e0.rep())?);

    let plane = ProjHyperplane::new(&[0.0, 0.0, 1.0])?;
    println!("distance to x2 = 0: {:.6}", dist_to_hyperplane(&x, &plane)?);

    // On P^1 the chart s -> [1, s] gives δ in closed form.
    let s = 2f64.sqrt();
    let q = [5.0, 7.0];
    let closed = chart_distance(s, &q)?;
    let direct = delta(&slope_embed(s), &normalize_point(&q)?)?;
    println!("δ(√2, 7/5): chart {closed:.3e}, wedge {direct:.3e}");
    Ok(d)
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
