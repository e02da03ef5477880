//! Volumes of simplices spanned by rational points against the height bound.

use projdio::geometry::normalize_point;
use projdio::ratpoints::make_rational;
use projdio::simplex::{simplex_lower_bound, simplex_measure_sandwich, simplex_volume, verify_simplex_lemma};

pub fn run_example() -> projdio::Result<u64> {
    let qs = [make_rational(&[3, 1, 0])?, make_rational(&[2, 1, 1])?, make_rational(&[3, 2, 1])?];
    let anchor = normalize_point(&[1.0, 0.5, 0.2])?;
    println!(
        "volume {:.5} >= bound {:.5}",
        simplex_volume(&qs, &anchor)?,
        simplex_lower_bound(&qs)?
    );
    let pair = [make_rational(&[1, 0])?, make_rational(&[1, 1])?];
    let s = simplex_measure_sandwich(&pair, &normalize_point(&[1.0, 0.4])?, 0.8, 100_000, 2)?;
    println!(
        "ball {:.4} >= simplex {:.4} ± {:.4} >= volume bound {:.4}",
        s.ball, s.simplex, s.simplex_stderr, s.lower_from_volume
    );
    let report = verify_simplex_lemma(2, 3)?;
    println!(
        "P^2, heights <= 3: {} tuples, {} non-coplanar, {} violations, min margin {:.4}",
        report.tuples_examined,
        report.non_coplanar,
        report.violations.len(),
        report.min_margin
    );
    Ok(report.violations.len() as u64)
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
