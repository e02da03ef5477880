//! Rational points of bounded height, shell by shell, and the ones inside a ball.

use projdio::geometry::{slope_embed, ProjBall};
use projdio::ratpoints::{enumerate_band, enumerate_up_to, rationals_in_ball};

pub fn run_example() -> projdio::Result<Vec<usize>> {
    let mut counts = Vec::new();
    for n in 1..=3 {
        let c = enumerate_up_to(n, 10)?.count();
        println!("P^{n}: {c} points of height <= 10");
        counts.push(c);
    }
    let shell: Vec<String> = enumerate_band(1, 3, 4)?
        .map(|q| format!("{:?}", q.coords()))
        .collect();
    println!("height 3 on the line: {}", shell.join(" "));

    let ball = ProjBall::new(slope_embed(0.5), 0.01)?;
    let near = rationals_in_ball(&ball, 1, 40)?;
    println!("{} points of height < 40 within 0.01 of slope 1/2", near.len());
    Ok(counts)
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
