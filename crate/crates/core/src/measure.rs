//! Measures on `P^N(R)`.
//!
//! Two models are built in:
//!
//! * the canonical measure, the normalized volume of the cone over a set
//!   inside the unit ball. A ball of radius `r = sin θ` has mass
//!   `2 Γ((N+1)/2) / (√π Γ(N/2)) ∫_0^θ sin^{N-1}(z) dz`, independent of its
//!   center, and the whole space has mass 1.
//! * the Cantor-slope measure on `P^1`, the push-forward of the middle-thirds
//!   Cantor measure on slopes `[0, 1]` through `s ↦ φ(1, s)`. Ball masses come
//!   from the Cantor function evaluated at the ends of the slope interval the
//!   ball cuts out.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    normalize_point, slope_embed, slope_extract, ProjHyperplane, ProjPoint,
    Slope,
};
use crate::sampling::{task_rng, uniform_direction, CHUNK};
use crate::tolerance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Canonical,
    CantorSlope,
}

/// A ball-measure provider with its regularity and decay exponents.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureModel {
    pub kind: MeasureKind,
    pub dim: usize,
    /// Exponent `δ` of the power law `a r^δ <= m(B(x, r)) <= b r^δ`.
    pub regularity_exponent: f64,
    /// Exponent `η` of the hyperplane-neighborhood decay bound.
    pub decay_exponent: f64,
}

impl MeasureModel {
    /// The canonical measure on `P^N(R)`. The decay exponent recorded is 1,
    /// the scaling of a codimension-one slab through a ball.
    pub fn canonical(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("dimension must be >= 1".into()));
        }
        Ok(Self {
            kind: MeasureKind::Canonical,
            dim,
            regularity_exponent: dim as f64,
            decay_exponent: 1.0,
        })
    }

    pub fn cantor_slope() -> Self {
        let d = 2f64.ln() / 3f64.ln();
        Self {
            kind: MeasureKind::CantorSlope,
            dim: 1,
            regularity_exponent: d,
            decay_exponent: d,
        }
    }

    pub fn from_kind(kind: MeasureKind, dim: usize) -> Result<Self> {
        match kind {
            MeasureKind::Canonical => Self::canonical(dim),
            MeasureKind::CantorSlope if dim == 1 => Ok(Self::cantor_slope()),
            MeasureKind::CantorSlope => Err(Error::InvalidParameter(
                "the Cantor-slope measure lives on P^1".into(),
            )),
        }
    }

    /// Whether `x` lies in the closed support (up to a small slope tolerance).
    pub fn in_support(&self, x: &ProjPoint) -> bool {
        if x.dim() != self.dim {
            return false;
        }
        match self.kind {
            MeasureKind::Canonical => true,
            MeasureKind::CantorSlope => match slope_extract(x) {
                Ok(Slope::Finite(s)) => cantor_contains(s, 1e-12),
                _ => false,
            },
        }
    }

    /// Draws one point distributed according to the measure.
    pub fn sample(&self, rng: &mut ChaCha8Rng) -> ProjPoint {
        match self.kind {
            MeasureKind::Canonical => normalize_point(&uniform_direction(rng, self.dim + 1))
                .expect("unit direction is nonzero"),
            MeasureKind::CantorSlope => {
                let mut s = 0.0;
                let mut w = 1.0;
                for _ in 0..40 {
                    w /= 3.0;
                    if rng.random::<bool>() {
                        s += 2.0 * w;
                    }
                }
                slope_embed(s)
            }
        }
    }
}

/// `Γ(k / 2)` for a positive integer `k`, by the recursion from `Γ(1/2) = √π`
/// and `Γ(1) = 1`.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1, "gamma_half needs k >= 1");
    let (mut g, mut arg2) = if k % 2 == 0 { (1.0, 2) } else { (PI.sqrt(), 1) };
    while arg2 < k {
        g *= arg2 as f64 / 2.0;
        arg2 += 2;
    }
    g
}

/// Lebesgue volume of the closed unit ball in `R^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0) / gamma_half(d as u32 + 2)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let diff = left + right - whole;
        if depth == 0 || diff.abs() <= 15.0 * tol {
            left + right + diff / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Canonical mass of any ball of radius `r` in `P^n(R)`, `0 <= r <= 1`.
pub fn canonical_ball_measure(n: usize, r: f64) -> f64 {
    let theta = r.clamp(0.0, 1.0).asin();
    let coef = 2.0 * gamma_half(n as u32 + 1) / (PI.sqrt() * gamma_half(n as u32));
    let integral = if n == 1 {
        theta
    } else {
        let e = (n - 1) as i32;
        adaptive_simpson(&|z: f64| z.sin().powi(e), 0.0, theta, tolerance::QUADRATURE)
    };
    (coef * integral).min(1.0)
}

pub fn ball_measure(model: &MeasureModel, x: &ProjPoint, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::RadiusOutOfRange(r));
    }
    if x.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: x.dim(),
        });
    }
    match model.kind {
        MeasureKind::Canonical => Ok(canonical_ball_measure(model.dim, r)),
        MeasureKind::CantorSlope => {
            let phi = support_angle(x)?;
            let theta = r.asin();
            Ok(cantor_mass_of_angles(phi - theta, phi + theta))
        }
    }
}

fn support_angle(x: &ProjPoint) -> Result<f64> {
    match slope_extract(x)? {
        Slope::Finite(s) if cantor_contains(s, 1e-12) => Ok(s.clamp(0.0, 1.0).atan()),
        _ => Err(Error::PointOutsideSupport),
    }
}

/// Cantor-slope mass of the chart arc of angles `[lo, hi]` (radians, with
/// `-π/2 <= lo <= hi <= 3π/4`). Only angles in `[0, π/4]` carry mass.
fn cantor_mass_of_angles(lo: f64, hi: f64) -> f64 {
    let lo = lo.max(0.0);
    let hi = hi.min(FRAC_PI_4);
    if hi <= lo {
        return 0.0;
    }
    let s_lo = if lo <= 0.0 { 0.0 } else { lo.tan() };
    let s_hi = if hi >= FRAC_PI_4 { 1.0 } else { hi.tan() };
    (cantor_cdf(s_hi) - cantor_cdf(s_lo)).max(0.0)
}

/// Whether `s` is within `tol` of the middle-thirds Cantor set.
pub fn cantor_contains(s: f64, tol: f64) -> bool {
    if s < -tol || s > 1.0 + tol {
        return false;
    }
    let (mut a, mut len) = (0.0f64, 1.0f64);
    while len > tol {
        let third = len / 3.0;
        if s <= a + third + tol {
            len = third;
        } else if s >= a + 2.0 * third - tol {
            a += 2.0 * third;
            len = third;
        } else {
            return false;
        }
    }
    true
}

/// The Cantor function in floating point.
pub fn cantor_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let (mut x, mut f, mut w) = (x, 0.0, 0.5);
    for _ in 0..70 {
        x *= 3.0;
        let d = x.floor();
        x -= d;
        if d == 1.0 {
            return f + w;
        }
        if d == 2.0 {
            f += w;
        }
        w *= 0.5;
    }
    f
}

/// The Cantor function evaluated exactly at a rational argument, through the
/// eventually periodic ternary expansion.
pub fn cantor_cdf_exact(x: &BigRational) -> BigRational {
    if !x.is_positive() {
        return BigRational::zero();
    }
    if *x >= BigRational::one() {
        return BigRational::one();
    }
    let q = x.denom().clone();
    let mut r = x.numer().clone();
    let three = BigInt::from(3);
    let mut bits: Vec<bool> = Vec::new();
    let mut seen: HashMap<BigInt, usize> = HashMap::new();
    let binary = |bits: &[bool]| -> BigRational {
        let mut acc = BigRational::zero();
        let mut w = BigRational::new(BigInt::one(), BigInt::from(2));
        for &b in bits {
            if b {
                acc += &w;
            }
            w /= BigInt::from(2);
        }
        acc
    };
    loop {
        if r.is_zero() {
            return binary(&bits);
        }
        if let Some(&start) = seen.get(&r) {
            let prefix = binary(&bits[..start]);
            let period = &bits[start..];
            let mut p = BigInt::zero();
            for &b in period {
                p = p * 2 + if b { 1 } else { 0 };
            }
            let cycle = (BigInt::one() << period.len()) - 1;
            let scale = BigInt::one() << start;
            return prefix + BigRational::new(p, cycle * scale);
        }
        seen.insert(r.clone(), bits.len());
        r *= &three;
        let d = &r / &q;
        r %= &q;
        if d == BigInt::one() {
            let mut f = binary(&bits);
            f += BigRational::new(BigInt::one(), BigInt::one() << (bits.len() + 1));
            return f;
        }
        bits.push(d == BigInt::from(2));
    }
}

/// The `(a, b)` power-law constants for the canonical measure as displayed in
/// the source derivation:
/// `a = 4·5^{N-1} Γ((N+1)/2) / (N √π 6^{N-1} Γ(N/2))` and
/// `b = 4·6^N Γ((N+1)/2) / (N √π 5^N Γ(N/2))`.
///
/// These carry an extra factor 2 relative to the normalized measure computed
/// by [`canonical_ball_measure`], whose ratios `m(B)/r^N` therefore sit in
/// `[a/2, b/2]`.
pub fn power_law_constants(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let g = gamma_half(n as u32 + 1) / (PI.sqrt() * gamma_half(n as u32));
    let a = 4.0 * (5.0f64 / 6.0).powi(n as i32 - 1) * g / nf;
    let b = 4.0 * (6.0f64 / 5.0).powi(n as i32) * g / nf;
    (a, b)
}

/// Window that contains `m(B(x, r)) / r^δ` for the Cantor-slope measure, for
/// every support point and `0 < r <= sin 1`: the slope interval cut out by the
/// ball has half-length between `r` and `π r`, and a slope interval of
/// half-length `l` around a Cantor point has mass in `[l^δ / 2, 4 l^δ]`.
pub fn cantor_ratio_window() -> (f64, f64) {
    let d = MeasureModel::cantor_slope().regularity_exponent;
    (0.5, 4.0 * PI.powf(d))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerLawRow {
    pub r: f64,
    pub center: usize,
    pub ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerLawReport {
    pub kind: MeasureKind,
    pub exponent: f64,
    pub rows: Vec<PowerLawRow>,
    pub a_emp: f64,
    pub b_emp: f64,
    /// The displayed `(a, b)` pair, canonical measure only.
    pub displayed_window: Option<(f64, f64)>,
    /// The window the ratios are checked against: `[a/2, b/2]` for the
    /// canonical measure, [`cantor_ratio_window`] for the Cantor-slope one.
    pub reference_window: (f64, f64),
    /// Some ratio falls outside the displayed `[a, b]` by more than 10%.
    pub displayed_window_flagged: bool,
    /// Some ratio falls outside the reference window.
    pub flagged: bool,
}

pub fn verify_power_law(
    model: &MeasureModel,
    radii: &[f64],
    centers: &[ProjPoint],
) -> Result<PowerLawReport> {
    let mut rows = Vec::with_capacity(radii.len() * centers.len());
    for &r in radii {
        if !(r > 0.0 && r <= tolerance::MAX_BALL_RADIUS) {
            return Err(Error::RadiusOutOfRange(r));
        }
        for (ci, c) in centers.iter().enumerate() {
            let m = ball_measure(model, c, r)?;
            rows.push(PowerLawRow {
                r,
                center: ci,
                ratio: m / r.powf(model.regularity_exponent),
            });
        }
    }
    let a_emp = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let b_emp = rows.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    let (displayed_window, reference_window) = match model.kind {
        MeasureKind::Canonical => {
            let (a, b) = power_law_constants(model.dim);
            (Some((a, b)), (a / 2.0, b / 2.0))
        }
        MeasureKind::CantorSlope => (None, cantor_ratio_window()),
    };
    let outside = |w: (f64, f64), slack: f64| {
        rows.iter()
            .any(|r| r.ratio < w.0 * (1.0 - slack) || r.ratio > w.1 * (1.0 + slack))
    };
    Ok(PowerLawReport {
        kind: model.kind,
        exponent: model.regularity_exponent,
        displayed_window_flagged: displayed_window.map_or(false, |w| outside(w, 0.1)),
        flagged: outside(reference_window, 0.0),
        rows,
        a_emp,
        b_emp,
        displayed_window,
        reference_window,
    })
}

/// Monte Carlo estimate of the canonical measure of `{x : member(x)}` in
/// `P^n(R)`, with its binomial standard error.
pub fn monte_carlo_set_measure<F>(n: usize, member: F, samples: u64, seed: u64) -> (f64, f64)
where
    F: Fn(&ProjPoint) -> bool + Sync,
{
    if samples == 0 {
        return (0.0, 0.0);
    }
    let chunks = samples.div_ceil(CHUNK as u64);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|ci| {
            let mut rng = task_rng(seed, ci);
            let take = (samples - ci * CHUNK as u64).min(CHUNK as u64);
            (0..take)
                .filter(|_| {
                    let u = uniform_direction(&mut rng, n + 1);
                    member(&normalize_point(&u).expect("unit direction"))
                })
                .count() as u64
        })
        .sum();
    let p = hits as f64 / samples as f64;
    (p, (p * (1.0 - p) / samples as f64).sqrt())
}

/// Uniform point of the spherical cap of angular radius `theta` around the
/// unit vector `axis`.
fn sample_cap(rng: &mut ChaCha8Rng, axis: &[f64], theta: f64) -> Vec<f64> {
    let len = axis.len();
    let n = len - 1;
    let z = if n == 1 {
        theta * rng.random::<f64>()
    } else {
        let top = theta.sin().powi(n as i32 - 1);
        loop {
            let z = theta * rng.random::<f64>();
            if rng.random::<f64>() * top <= z.sin().powi(n as i32 - 1) {
                break z;
            }
        }
    };
    let dir = loop {
        let g = uniform_direction(rng, len);
        let proj: f64 = g.iter().zip(axis).map(|(a, b)| a * b).sum();
        let t: Vec<f64> = g.iter().zip(axis).map(|(a, b)| a - proj * b).collect();
        let tn = t.iter().map(|c| c * c).sum::<f64>().sqrt();
        if tn > 1e-9 {
            break t.into_iter().map(|c| c / tn).collect::<Vec<f64>>();
        }
    };
    axis.iter()
        .zip(&dir)
        .map(|(a, d)| z.cos() * a + z.sin() * d)
        .collect()
}

/// Estimated `m(B(x, r) ∩ P^(ε)) / m(B(x, r))`, where `P^(ε)` is the open
/// ε-neighborhood of the hyperplane.
///
/// Canonical: Monte Carlo over the uniform distribution on the ball (a
/// spherical cap). Cantor-slope: exact arc intersection through the chart; for
/// `N = 1` the hyperplane is the single point orthogonal to its normal.
pub fn decay_ratio(
    model: &MeasureModel,
    plane: &ProjHyperplane,
    x: &ProjPoint,
    r: f64,
    eps: f64,
    samples: u64,
    seed: u64,
) -> Result<f64> {
    if !(r > 0.0 && r <= tolerance::MAX_BALL_RADIUS) {
        return Err(Error::RadiusOutOfRange(r));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    if plane.dim() != model.dim || x.dim() != model.dim {
        return Err(Error::DimensionMismatch {
            expected: model.dim,
            found: x.dim(),
        });
    }
    let whole = ball_measure(model, x, r)?;
    if whole <= 0.0 {
        return Err(Error::DegenerateBall);
    }
    match model.kind {
        MeasureKind::Canonical => {
            if samples == 0 {
                return Err(Error::InvalidParameter("samples must be >= 1".into()));
            }
            let theta = r.asin();
            let axis = x.rep().to_vec();
            let chunks = samples.div_ceil(CHUNK as u64);
            let hits: u64 = (0..chunks)
                .into_par_iter()
                .map(|ci| {
                    let mut rng = task_rng(seed, ci);
                    let take = (samples - ci * CHUNK as u64).min(CHUNK as u64);
                    let mut h = 0;
                    for _ in 0..take {
                        let u = sample_cap(&mut rng, &axis, theta);
                        let d: f64 = u.iter().zip(plane.normal()).map(|(a, b)| a * b).sum();
                        if d.abs() < eps {
                            h += 1;
                        }
                    }
                    h
                })
                .sum();
            Ok(hits as f64 / samples as f64)
        }
        MeasureKind::CantorSlope => {
            let phi = support_angle(x)?;
            let theta = r.asin();
            let n = plane.normal();
            let psi = (-n[0]).atan2(n[1]).rem_euclid(PI);
            let half = eps.min(1.0).asin();
            let mut m = 0.0;
            for k in [-1.0, 0.0, 1.0] {
                let c = psi + k * PI;
                let lo = (phi - theta).max(c - half);
                let hi = (phi + theta).min(c + half);
                if hi > lo {
                    m += cantor_mass_of_angles(lo, hi);
                }
            }
            Ok((m / whole).min(1.0))
        }
    }
}

/// Least-squares slope of `log(ratio)` against `log(eps / r)`; rows with a
/// zero ratio are skipped.
pub fn fit_decay_exponent(rows: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|(s, q)| *s > 0.0 && *q > 0.0)
        .map(|(s, q)| (s.ln(), q.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::dist_to_hyperplane;
    use num_bigint::BigInt;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn gamma_half_values() {
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half(3) - PI.sqrt() / 2.0).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
        assert!((unit_ball_volume(2) - PI).abs() < 1e-14);
        assert!((unit_ball_volume(3) - 4.0 * PI / 3.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_integrates_sine_powers() {
        // ∫_0^θ sin z dz = 1 - cos θ; ∫_0^θ sin^2 z dz = θ/2 - sin 2θ / 4
        for theta in [0.1, 0.7, 1.0, PI / 2.0] {
            let i1 = adaptive_simpson(&|z: f64| z.sin(), 0.0, theta, 1e-12);
            assert!((i1 - (1.0 - theta.cos())).abs() < 1e-11);
            let i2 = adaptive_simpson(&|z: f64| z.sin().powi(2), 0.0, theta, 1e-12);
            assert!((i2 - (theta / 2.0 - (2.0 * theta).sin() / 4.0)).abs() < 1e-11);
        }
    }

    #[test]
    fn canonical_examples() {
        let m = MeasureModel::canonical(1).unwrap();
        let x = slope_embed(0.3);
        let v = ball_measure(&m, &x, (PI / 4.0).sin()).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        for n in 1..=5 {
            let v = canonical_ball_measure(n, 1.0);
            assert!((v - 1.0).abs() < 1e-9, "n={n}: {v}");
        }
        // N = 2 closed form 1 - cos θ
        for r in [0.05, 0.3, 0.8] {
            let v = canonical_ball_measure(2, r);
            assert!((v - (1.0 - r.asin().cos())).abs() < 1e-10);
        }
        assert!(matches!(ball_measure(&m, &x, 0.0), Err(Error::RadiusOutOfRange(_))));
        assert!(ball_measure(&m, &x, 1.5).is_err());
    }

    #[test]
    fn canonical_is_monotone() {
        for n in 1..=4 {
            let mut prev = 0.0;
            for k in 1..=200 {
                let r = tolerance::MAX_BALL_RADIUS * k as f64 / 200.0;
                let v = canonical_ball_measure(n, r);
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn power_law_constant_values() {
        let (a, b) = power_law_constants(1);
        assert!((a - 4.0 / PI).abs() < 1e-14);
        assert!((b - 24.0 / (5.0 * PI)).abs() < 1e-14);
        // N = 2: Γ(3/2) / (√π Γ(1)) = 1/2, so a = 4·(5/6)/2 · 1/2, b = 4·(36/25)/2 · 1/2
        let (a2, b2) = power_law_constants(2);
        assert!((a2 - 5.0 / 6.0).abs() < 1e-14);
        assert!((b2 - 36.0 / 25.0).abs() < 1e-14);
        for n in 1..8 {
            let (a, b) = power_law_constants(n);
            assert!(a <= b);
        }
    }

    #[test]
    fn canonical_power_law_report() {
        let m = MeasureModel::canonical(1).unwrap();
        let radii = [0.8, 0.4, 0.2, 0.1, 0.05];
        let centers = [slope_embed(0.0), slope_embed(-2.7)];
        let rep = verify_power_law(&m, &radii, &centers).unwrap();
        for row in &rep.rows {
            let expected = 2.0 * row.r.asin() / PI / row.r;
            assert!((row.ratio - expected).abs() < 1e-12);
        }
        for pair in rep.rows.chunks(2) {
            assert!((pair[0].ratio - pair[1].ratio).abs() < 1e-12);
        }
        // the normalized ratios sit in [a/2, b/2] and below the displayed window
        assert!(!rep.flagged);
        assert!(rep.displayed_window_flagged);
        let (a, b) = rep.displayed_window.unwrap();
        assert!(rep.rows.iter().all(|r| 2.0 * r.ratio >= a && 2.0 * r.ratio <= b));
    }

    #[test]
    fn cantor_membership() {
        for s in [0.0, 1.0, 0.25, 0.75, 1.0 / 3.0, 2.0 / 3.0, 2.0 / 9.0] {
            assert!(cantor_contains(s, 1e-12), "{s}");
        }
        for s in [0.5, 0.4, 0.15, -0.1, 1.2] {
            assert!(!cantor_contains(s, 1e-12), "{s}");
        }
    }

    #[test]
    fn cantor_cdf_exact_values() {
        assert_eq!(cantor_cdf_exact(&rat(1, 3)), rat(1, 2));
        assert_eq!(cantor_cdf_exact(&rat(1, 2)), rat(1, 2));
        assert_eq!(cantor_cdf_exact(&rat(2, 3)), rat(1, 2));
        assert_eq!(cantor_cdf_exact(&rat(1, 4)), rat(1, 3));
        assert_eq!(cantor_cdf_exact(&rat(3, 4)), rat(2, 3));
        assert_eq!(cantor_cdf_exact(&rat(2, 9)), rat(1, 4));
        assert_eq!(cantor_cdf_exact(&rat(0, 1)), rat(0, 1));
        for (p, q) in [(1, 4), (3, 4), (7, 10), (1, 7), (13, 81)] {
            let exact = cantor_cdf_exact(&rat(p, q));
            let approx = cantor_cdf(p as f64 / q as f64);
            let e: f64 = exact.numer().to_string().parse::<f64>().unwrap()
                / exact.denom().to_string().parse::<f64>().unwrap();
            assert!((e - approx).abs() < 1e-9, "{p}/{q}");
        }
    }

    // Self-similarity of the Cantor function: F(x/3) = F(x)/2 and
    // F(2/3 + x/3) = 1/2 + F(x)/2, and each Cantor triadic interval splits its
    // mass evenly between its outer thirds.
    #[test]
    fn cantor_self_similarity_exact() {
        let half = rat(1, 2);
        for (p, q) in [(1, 5), (2, 7), (5, 11), (1, 4), (9, 10), (3, 13)] {
            let x = rat(p, q);
            let fx = cantor_cdf_exact(&x);
            assert_eq!(cantor_cdf_exact(&(&x / rat(3, 1))), &fx * &half);
            assert_eq!(
                cantor_cdf_exact(&(rat(2, 3) + &x / rat(3, 1))),
                &half + &fx * &half
            );
        }
        let mass = |a: &BigRational, b: &BigRational| cantor_cdf_exact(b) - cantor_cdf_exact(a);
        for (a, k) in [(rat(0, 1), 1u32), (rat(2, 9), 2), (rat(20, 27), 3)] {
            let len = BigRational::new(BigInt::one(), BigInt::from(3).pow(k));
            let third = &len / rat(3, 1);
            let whole = mass(&a, &(&a + &len));
            let left = mass(&a, &(&a + &third));
            let right = mass(&(&a + &third * rat(2, 1)), &(&a + &len));
            assert_eq!(&left + &right, whole);
            assert_eq!(left, right);
        }
    }

    #[test]
    fn cantor_ball_measures() {
        let m = MeasureModel::cantor_slope();
        let x = slope_embed(0.25);
        let v = ball_measure(&m, &x, 1.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = ball_measure(&m, &slope_embed(0.0), tolerance::MAX_BALL_RADIUS).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        assert!(matches!(
            ball_measure(&m, &slope_embed(0.5), 0.1),
            Err(Error::PointOutsideSupport)
        ));
    }

    #[test]
    fn cantor_power_law_window() {
        let m = MeasureModel::cantor_slope();
        let centers: Vec<_> = [0.0, 0.25, 2.0 / 3.0, 0.75, 1.0, 20.0 / 27.0]
            .iter()
            .map(|&s| slope_embed(s))
            .collect();
        let radii: Vec<f64> = (0..=30).map(|k| 0.8 * 2f64.powf(-(k as f64) / 3.0)).collect();
        let rep = verify_power_law(&m, &radii, &centers).unwrap();
        assert!(!rep.flagged, "a_emp {} b_emp {}", rep.a_emp, rep.b_emp);
        assert!(rep.a_emp <= rep.b_emp);
    }

    #[test]
    fn monte_carlo_basics() {
        let (p, se) = monte_carlo_set_measure(2, |_| true, 1000, 3);
        assert_eq!((p, se), (1.0, 0.0));
        let c = slope_embed(0.7);
        let r = (PI / 4.0).sin();
        let (p, se) = monte_carlo_set_measure(
            1,
            |y| crate::geometry::delta(&c, y).unwrap() <= r,
            200_000,
            11,
        );
        assert!((p - 0.5).abs() <= 4.0 * se, "{p} ± {se}");
        let again = monte_carlo_set_measure(
            1,
            |y| crate::geometry::delta(&c, y).unwrap() <= r,
            200_000,
            11,
        );
        assert_eq!((p, se), again);
    }

    #[test]
    fn decay_examples() {
        let m = MeasureModel::canonical(2).unwrap();
        let plane = ProjHyperplane::new(&[0.0, 0.0, 1.0]).unwrap();
        let x = normalize_point(&[1.0, 0.5, 0.0]).unwrap();
        let ratio = decay_ratio(&m, &plane, &x, 0.5, 0.6, 20_000, 5).unwrap();
        assert!(ratio <= 1.0 && ratio > 0.99);
        let ratio = decay_ratio(&m, &plane, &x, 0.5, 0.05, 200_000, 5).unwrap();
        let c = ratio / 0.1;
        assert!((0.5..=3.0).contains(&c), "c' = {c}");

        let cantor = MeasureModel::cantor_slope();
        let gap = ProjHyperplane::point_in_line(&slope_embed(0.5)).unwrap();
        let r = decay_ratio(&cantor, &gap, &slope_embed(1.0 / 3.0), 0.3, 1e-3, 0, 0).unwrap();
        assert_eq!(r, 0.0);
        let r = decay_ratio(&cantor, &gap, &slope_embed(1.0 / 3.0), 0.3, 0.9, 0, 0).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
    }

    // Cross-check: the global Monte Carlo estimate of B ∩ P^(ε) equals the
    // decay ratio times the closed-form ball mass.
    #[test]
    fn decay_numerator_matches_global_monte_carlo() {
        let m = MeasureModel::canonical(2).unwrap();
        let plane = ProjHyperplane::new(&[0.3, -0.4, 1.0]).unwrap();
        let x = normalize_point(&[0.2, 0.1, 1.0]).unwrap();
        let r = tolerance::MAX_BALL_RADIUS;
        let eps = 0.1;
        let ratio = decay_ratio(&m, &plane, &x, r, eps, 400_000, 21).unwrap();
        let numerator = ratio * ball_measure(&m, &x, r).unwrap();
        let (est, se) = monte_carlo_set_measure(
            2,
            |y| {
                crate::geometry::delta(&x, y).unwrap() <= r
                    && dist_to_hyperplane(y, &plane).unwrap() < eps
            },
            400_000,
            22,
        );
        assert!((est - numerator).abs() < 4.0 * se + 4e-3, "{est} vs {numerator}");
    }

    #[test]
    fn decay_fit() {
        let rows: Vec<(f64, f64)> = [0.01, 0.02, 0.05, 0.1].iter().map(|&s| (s, 1.3 * s)).collect();
        assert!((fit_decay_exponent(&rows).unwrap() - 1.0).abs() < 1e-12);
        assert!(fit_decay_exponent(&rows[..1]).is_none());
    }

    #[test]
    fn sampling_respects_support() {
        let m = MeasureModel::cantor_slope();
        let mut rng = task_rng(9, 0);
        for _ in 0..200 {
            assert!(m.in_support(&m.sample(&mut rng)));
        }
    }
}
