//! Bounded partial quotients versus the projective approximation constant.

use projdio::approx::golden_alpha;
use projdio::badset::{cf_bad_crosscheck, liouville_like, partial_quotients};

pub fn run_example() -> projdio::Result<Vec<bool>> {
    let panel = [
        ("golden", golden_alpha()),
        ("sqrt2 - 1", 2f64.sqrt() - 1.0),
        ("e - 2", std::f64::consts::E - 2.0),
        ("liouville", liouville_like(3.0, 4)),
    ];
    let mut flags = Vec::new();
    for (name, s) in panel {
        let q: Vec<String> = partial_quotients(s, 8).iter().map(|a| a.to_string()).collect();
        let c = cf_bad_crosscheck(s, 12, 10_000)?;
        println!(
            "{name:>10}: [0; {}, ...] bounded: {:5}, min H^2 δ = {:.3e}",
            q.join(", "),
            c.cf_bad,
            c.c_emp
        );
        flags.push(c.cf_bad);
    }
    Ok(flags)
}

fn main() -> projdio::Result<()> {
    run_example()?;
    Ok(())
}
