//! Approximation of points of `P^N(R)` by rational points.
//!
//! All searches are exhaustive over heights `<= B`. Small heights are scanned
//! in full; larger heights are visited in dyadic bands `[lo, 2 lo)`, each
//! restricted to the ball of the only radius that could still improve the
//! current answer (for instance `c* / lo^{(N+1)/N}` when minimizing
//! `H^{(N+1)/N} δ`), so no candidate that matters is ever skipped.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{delta, normalize_point, slope_embed, ProjPoint};
use crate::measure::MeasureModel;
use crate::ratpoints::{search_near, ProjRational};
use crate::sampling::task_rng;

/// Exponent `(N+1)/N` of the Dirichlet rate in `P^N`.
pub fn approx_exponent(n: usize) -> f64 {
    (n as f64 + 1.0) / n as f64
}

fn seed_height(n: usize) -> u64 {
    match n {
        1 => 16,
        2 => 6,
        _ => 3,
    }
}

/// Bands `[lo, hi)` covering heights `1..=bound`: the full-scan seed band
/// first, then dyadic bands.
fn bands(n: usize, bound: u64) -> Vec<(u64, u64)> {
    let seed = seed_height(n).min(bound);
    let mut out = vec![(1, seed + 1)];
    let mut lo = seed + 1;
    while lo <= bound {
        let hi = (2 * lo).min(bound + 1);
        out.push((lo, hi));
        lo = hi;
    }
    out
}

/// How the size of a rational point is measured in the normalized quantity
/// `size^{(N+1)/N} · δ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeightNorm {
    /// The height `max |q_i|` of the primitive vector.
    Max,
    /// The Euclidean norm of the primitive vector.
    Euclidean,
}

impl HeightNorm {
    fn size(self, q: &ProjRational) -> f64 {
        match self {
            HeightNorm::Max => q.height() as f64,
            HeightNorm::Euclidean => (q.norm_squared() as f64).sqrt(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ApproximationRecord {
    pub target: ProjPoint,
    pub best: ProjRational,
    pub dist: f64,
    pub height: u64,
    /// `size^{(N+1)/N} · dist`, with size the height unless stated otherwise.
    pub normalized: f64,
}

/// `ψ(m) = c · m^{-s} · log(m + 1)^{-p}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArithmeticFunction {
    pub c: f64,
    pub s: f64,
    pub p: f64,
}

impl ArithmeticFunction {
    pub fn new(c: f64, s: f64, p: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParameter(format!("psi scale c = {c} must be > 0")));
        }
        if !(s >= 0.0 && p >= 0.0 && s.is_finite() && p.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "psi exponents must be >= 0 (s = {s}, p = {p})"
            )));
        }
        Ok(Self { c, s, p })
    }

    pub fn constant(c: f64) -> Result<Self> {
        Self::new(c, 0.0, 0.0)
    }

    pub fn power(c: f64, s: f64) -> Result<Self> {
        Self::new(c, s, 0.0)
    }

    pub fn eval(&self, m: u64) -> f64 {
        let m = m as f64;
        let mut v = self.c;
        if self.s != 0.0 {
            v *= m.powf(-self.s);
        }
        if self.p != 0.0 {
            v *= (m + 1.0).ln().powf(-self.p);
        }
        v
    }

    /// `ψ(m) <= other(m)` for every `m` in `1..=bound`.
    pub fn dominated_by(&self, other: &ArithmeticFunction, bound: u64) -> bool {
        (1..=bound).all(|m| self.eval(m) <= other.eval(m))
    }
}

fn check_bound(bound: u64) -> Result<()> {
    if bound == 0 {
        return Err(Error::InvalidParameter("height bound must be >= 1".into()));
    }
    Ok(())
}

/// The rational point of height `<= bound` closest to `x`; ties go to the
/// smaller height, then to the lexicographically smaller coordinates.
pub fn best_approx(x: &ProjPoint, bound: u64) -> Result<ApproximationRecord> {
    check_bound(bound)?;
    let n = x.dim();
    let mut best: Option<(f64, ProjRational)> = None;
    for (i, (lo, hi)) in bands(n, bound).into_iter().enumerate() {
        let radius = if i == 0 { 2.0 } else { best.as_ref().unwrap().0 };
        search_near(x, radius, lo, hi, |q, d| {
            let better = match &best {
                None => true,
                Some((bd, bq)) => d < *bd || (d == *bd && q < bq),
            };
            if better {
                best = Some((d, q.clone()));
            }
        });
    }
    let (dist, q) = best.expect("height-1 points always exist");
    Ok(ApproximationRecord {
        target: x.clone(),
        height: q.height(),
        normalized: (q.height() as f64).powf(approx_exponent(n)) * dist,
        best: q,
        dist,
    })
}

/// The minimizer of `size(q)^{(N+1)/N} · δ(x, q)` over heights `<= bound`.
pub fn approx_constant_record(
    x: &ProjPoint,
    bound: u64,
    norm: HeightNorm,
) -> Result<ApproximationRecord> {
    check_bound(bound)?;
    let n = x.dim();
    let e = approx_exponent(n);
    let mut best: Option<(f64, f64, ProjRational)> = None;
    for (i, (lo, hi)) in bands(n, bound).into_iter().enumerate() {
        let radius = match &best {
            _ if i == 0 => 2.0,
            Some((v, _, _)) => v / (lo as f64).powf(e),
            None => unreachable!(),
        };
        if radius == 0.0 {
            break;
        }
        search_near(x, radius, lo, hi, |q, d| {
            let v = norm.size(q).powf(e) * d;
            let better = match &best {
                None => true,
                Some((bv, _, bq)) => v < *bv || (v == *bv && q < bq),
            };
            if better {
                best = Some((v, d, q.clone()));
            }
        });
    }
    let (normalized, dist, q) = best.expect("height-1 points always exist");
    Ok(ApproximationRecord {
        target: x.clone(),
        height: q.height(),
        best: q,
        dist,
        normalized,
    })
}

/// `min_{H(q) <= bound} H(q)^{(N+1)/N} δ(x, q)`; non-increasing in `bound` and
/// zero once `bound` reaches the height of a rational `x`.
pub fn approx_constant(x: &ProjPoint, bound: u64) -> Result<f64> {
    Ok(approx_constant_record(x, bound, HeightNorm::Max)?.normalized)
}

/// Some `q` with `H(q) <= bound` and `δ(x, q) < c · H(q)^{-(N+1)/N}`: the
/// one of least height, ties going to the closer point.
pub fn dirichlet_witness(x: &ProjPoint, bound: u64, c: f64) -> Result<Option<ProjRational>> {
    dirichlet_witness_in(x, 1, bound, c)
}

/// As [`dirichlet_witness`], restricted to heights in `[min_height, bound]`.
pub fn dirichlet_witness_in(
    x: &ProjPoint,
    min_height: u64,
    bound: u64,
    c: f64,
) -> Result<Option<ProjRational>> {
    check_bound(bound)?;
    if !(c > 0.0) {
        return Err(Error::InvalidParameter("c must be > 0".into()));
    }
    let min_height = min_height.max(1);
    let n = x.dim();
    let e = approx_exponent(n);
    for (lo, hi) in bands(n, bound) {
        if hi <= min_height {
            continue;
        }
        let lo = lo.max(min_height);
        let radius = c / (lo as f64).powf(e);
        let mut found: Option<(u64, f64, ProjRational)> = None;
        search_near(x, radius, lo, hi, |q, d| {
            if d < c / (q.height() as f64).powf(e) {
                let key = (q.height(), d);
                let better = found.as_ref().map_or(true, |(h, fd, f)| {
                    key < (*h, *fd) || (key == (*h, *fd) && q < f)
                });
                if better {
                    found = Some((key.0, d, q.clone()));
                }
            }
        });
        if let Some((_, _, q)) = found {
            let d = delta(x, &q.to_point())?;
            if d < c / (q.height() as f64).powf(e) {
                return Ok(Some(q));
            }
        }
    }
    Ok(None)
}

/// `α = (√5 - 1) / 2`.
pub fn golden_alpha() -> f64 {
    (5f64.sqrt() - 1.0) / 2.0
}

/// The lines `x_1 = α x_2`, `α x_1 = x_2`, `x_1 = -α x_2`, `α x_1 = -x_2`,
/// i.e. `φ(α, 1)`, `φ(1, α)`, `φ(-α, 1)`, `φ(1, -α)`.
pub fn hurwitz_special_points() -> [ProjPoint; 4] {
    let a = golden_alpha();
    [[a, 1.0], [1.0, a], [-a, 1.0], [1.0, -a]]
        .map(|v| normalize_point(&v).expect("nonzero"))
}

/// Fixed irrational slopes used as reproducible targets.
pub fn named_targets() -> Vec<(&'static str, ProjPoint)> {
    vec![
        ("sqrt2_minus_1", slope_embed(2f64.sqrt() - 1.0)),
        ("golden", slope_embed(golden_alpha())),
        ("e_minus_2", slope_embed(std::f64::consts::E - 2.0)),
        ("pi_minus_3", slope_embed(std::f64::consts::PI - 3.0)),
    ]
}

/// `min (δ(x,q) - 1/(√5 H^2)) · H^6` over `H(q) <= bound` restricted to
/// `δ < 1/(√5 H^2) + 1/H^4`, the second-order term of the refined Hurwitz
/// inequality on `P^1`. `None` when no such `q` exists.
pub fn refined_hurwitz_residual(x: &ProjPoint, bound: u64) -> Result<Option<f64>> {
    check_bound(bound)?;
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: x.dim(),
        });
    }
    let k = 1.0 / 5f64.sqrt();
    let mut best: Option<f64> = None;
    for (lo, hi) in bands(1, bound) {
        let l = lo as f64;
        let radius = k / (l * l) + 1.0 / (l * l * l * l);
        search_near(x, radius.min(2.0), lo, hi, |q, d| {
            let h = q.height() as f64;
            let first = k / (h * h);
            if d < first + 1.0 / h.powi(4) {
                let v = (d - first) * h.powi(6);
                if best.map_or(true, |b| v < b) {
                    best = Some(v);
                }
            }
        });
    }
    Ok(best)
}

/// Every `q` with `H(q) <= bound` and `δ(x, q) < ψ(H(q))`, in height order.
pub fn khintchine_solutions(
    x: &ProjPoint,
    psi: &ArithmeticFunction,
    bound: u64,
) -> Result<Vec<ProjRational>> {
    check_bound(bound)?;
    let mut out = Vec::new();
    let mut lo = 1;
    while lo <= bound {
        let hi = (2 * lo).min(bound + 1);
        // ψ is non-increasing, so ψ(lo) bounds the radius for the whole band.
        let mut band = Vec::new();
        search_near(x, psi.eval(lo), lo, hi, |q, d| {
            if d < psi.eval(q.height()) {
                band.push(q.clone());
            }
        });
        band.sort();
        out.extend(band);
        lo = hi;
    }
    Ok(out)
}

pub fn khintchine_count(x: &ProjPoint, psi: &ArithmeticFunction, bound: u64) -> Result<u64> {
    Ok(khintchine_solutions(x, psi, bound)?.len() as u64)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub sample_id: usize,
    pub point: ProjPoint,
    /// Heights of all solutions, non-decreasing.
    pub heights: Vec<u64>,
}

impl SampleOutcome {
    pub fn count(&self) -> u64 {
        self.heights.len() as u64
    }

    pub fn max_height(&self) -> u64 {
        self.heights.last().copied().unwrap_or(0)
    }

    pub fn count_up_to(&self, h: u64) -> u64 {
        self.heights.iter().filter(|&&x| x <= h).count() as u64
    }

    pub fn count_above(&self, h: u64) -> u64 {
        self.heights.iter().filter(|&&x| x > h).count() as u64
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurveySummary {
    pub bound: u64,
    pub outcomes: Vec<SampleOutcome>,
    pub mean: f64,
    pub median: f64,
    pub max: u64,
    /// Fraction of samples with a solution of height above `bound / 10`.
    pub tail_fraction: f64,
}

impl SurveySummary {
    pub fn tail_fraction_above(&self, h: u64) -> f64 {
        let hits = self.outcomes.iter().filter(|o| o.count_above(h) > 0).count();
        hits as f64 / self.outcomes.len() as f64
    }
}

/// Counts Khintchine solutions for `n_samples` points drawn from `model`.
/// Sample `i` uses its own random stream, so the result depends only on the
/// seed.
pub fn khintchine_survey(
    model: &MeasureModel,
    seed: u64,
    psi: &ArithmeticFunction,
    bound: u64,
    n_samples: usize,
) -> Result<SurveySummary> {
    check_bound(bound)?;
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let outcomes: Vec<SampleOutcome> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = task_rng(seed, i as u64);
            let point = model.sample(&mut rng);
            let heights = khintchine_solutions(&point, psi, bound)?
                .iter()
                .map(|q| q.height())
                .collect();
            Ok(SampleOutcome {
                sample_id: i,
                point,
                heights,
            })
        })
        .collect::<Result<_>>()?;
    let mut counts: Vec<u64> = outcomes.iter().map(|o| o.count()).collect();
    counts.sort_unstable();
    let mean = counts.iter().sum::<u64>() as f64 / counts.len() as f64;
    let mid = counts.len() / 2;
    let median = if counts.len() % 2 == 1 {
        counts[mid] as f64
    } else {
        (counts[mid - 1] + counts[mid]) as f64 / 2.0
    };
    let mut summary = SurveySummary {
        bound,
        max: *counts.last().unwrap(),
        outcomes,
        mean,
        median,
        tail_fraction: 0.0,
    };
    summary.tail_fraction = summary.tail_fraction_above(bound / 10);
    Ok(summary)
}
