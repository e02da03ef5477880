//! Points, hyperplanes and balls of real projective space with the sine metric.
//!
//! A point of `P^N(R)` is stored as a unit vector in `R^{N+1}` whose first
//! coordinate exceeding [`tolerance::NORMALIZE`] in magnitude is positive, so
//! every line through the origin has exactly one stored representative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

/// A point of `P^N(R)`, held as a sign-normalized unit representative.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjPoint {
    rep: Vec<f64>,
}

impl ProjPoint {
    /// Projective dimension `N` (the representative has `N + 1` coordinates).
    pub fn dim(&self) -> usize {
        self.rep.len() - 1
    }

    pub fn rep(&self) -> &[f64] {
        &self.rep
    }

    pub fn from_integers(coords: &[i64]) -> Result<Self> {
        let v: Vec<f64> = coords.iter().map(|&c| c as f64).collect();
        normalize_point(&v)
    }

    /// Equality up to [`tolerance::EQUALITY`] in the sine metric.
    pub fn same_as(&self, other: &ProjPoint) -> bool {
        delta(self, other).map_or(false, |d| d < tolerance::EQUALITY)
    }
}

impl PartialEq for ProjPoint {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

/// Maps a nonzero vector to its projective point.
///
/// The vector is first divided by its largest-magnitude coordinate, so any two
/// inputs that differ by an exactly representable scaling produce bit-identical
/// representatives.
pub fn normalize_point(v: &[f64]) -> Result<ProjPoint> {
    if v.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: v.len(),
        });
    }
    if v.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("non-finite coordinate".into()));
    }
    let mut rep = v.to_vec();
    if !normalize_in_place(&mut rep) {
        return Err(Error::ZeroVector);
    }
    Ok(ProjPoint { rep })
}

/// Scales `v` to its sign-normalized unit representative; `false` for the
/// zero vector.
pub(crate) fn normalize_in_place(rep: &mut [f64]) -> bool {
    let (imax, vmax) = rep
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, c)| {
            if c.abs() > bv.abs() {
                (i, c)
            } else {
                (bi, bv)
            }
        });
    if vmax == 0.0 {
        return false;
    }
    for c in rep.iter_mut() {
        *c /= vmax;
    }
    rep[imax] = 1.0;
    let norm = rep.iter().map(|c| c * c).sum::<f64>().sqrt();
    for c in rep.iter_mut() {
        *c /= norm;
    }
    sign_normalize(rep);
    true
}

/// Flips `v` so that its first coordinate above the normalization tolerance
/// is positive. Works on unit vectors.
pub(crate) fn sign_normalize(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|c| c.abs() > tolerance::NORMALIZE) {
        if *first < 0.0 {
            for c in v.iter_mut() {
                *c = -*c;
            }
        }
    }
}

/// Euclidean norm of the bivector `x ∧ y`: the root of the sum of squared
/// 2x2 minors `x_i y_j - x_j y_i` over `i < j`.
pub fn wedge_norm(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: x.len(),
        });
    }
    Ok(wedge_norm_unchecked(x, y))
}

pub(crate) fn wedge_norm_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let m = x[i] * y[j] - x[j] * y[i];
            acc += m * m;
        }
    }
    acc.sqrt()
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Sine distance between the lines spanned by two nonzero vectors of equal
/// length. Uses `sqrt(1 - cos^2)` away from parallel and the explicit minors
/// near it.
pub(crate) fn sine_distance(x: &[f64], y: &[f64]) -> f64 {
    let nx = dot(x, x).sqrt();
    let ny = dot(y, y).sqrt();
    let cos = dot(x, y) / (nx * ny);
    let d = if cos.abs() > tolerance::NEAR_PARALLEL_DOT {
        wedge_norm_unchecked(x, y) / (nx * ny)
    } else {
        (1.0 - cos * cos).max(0.0).sqrt()
    };
    d.clamp(0.0, 1.0)
}

/// The projective sine metric `|x ∧ y| / (|x| |y|)`.
pub fn delta(x: &ProjPoint, y: &ProjPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            found: y.dim(),
        });
    }
    Ok(sine_distance(&x.rep, &y.rep))
}

/// A projective hyperplane, the image of the linear hyperplane orthogonal to
/// `normal`. For `N = 1` it is a single point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjHyperplane {
    normal: Vec<f64>,
}

impl ProjHyperplane {
    pub fn new(normal: &[f64]) -> Result<Self> {
        let p = normalize_point(normal)?;
        Ok(Self { normal: p.rep })
    }

    /// The hyperplane through the given points (exactly `N` of them in `P^N`).
    /// Only implemented for `N = 1` (the hyperplane is the point itself).
    pub fn point_in_line(p: &ProjPoint) -> Result<Self> {
        if p.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                found: p.dim(),
            });
        }
        let r = p.rep();
        Self::new(&[-r[1], r[0]])
    }

    pub fn dim(&self) -> usize {
        self.normal.len() - 1
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }
}

/// `inf_{y in P} delta(x, y)`, which equals `|<rep(x), normal(P)>|`.
pub fn dist_to_hyperplane(x: &ProjPoint, plane: &ProjHyperplane) -> Result<f64> {
    if x.dim() != plane.dim() {
        return Err(Error::DimensionMismatch {
            expected: plane.dim(),
            found: x.dim(),
        });
    }
    Ok(dot(&x.rep, &plane.normal).abs().min(1.0))
}

/// Value of the slope chart on `P^1`: `x = φ(1, s)`, or the vertical line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Slope {
    Finite(f64),
    Infinite,
}

pub fn slope_embed(s: f64) -> ProjPoint {
    normalize_point(&[1.0, s]).expect("(1, s) is never zero")
}

/// `δ(slope_embed(s), [v0, v1])` in closed form:
/// `|v1 - s v0| / (sqrt(1 + s^2) sqrt(v0^2 + v1^2))`.
pub fn chart_distance(s: f64, v: &[f64]) -> Result<f64> {
    if v.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: v.len(),
        });
    }
    let norm = v[0].hypot(v[1]);
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((v[1] - s * v[0]).abs() / ((1.0 + s * s).sqrt() * norm))
}

pub fn slope_extract(x: &ProjPoint) -> Result<Slope> {
    if x.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: x.dim(),
        });
    }
    let r = x.rep();
    if r[0].abs() <= tolerance::NORMALIZE {
        Ok(Slope::Infinite)
    } else {
        Ok(Slope::Finite(r[1] / r[0]))
    }
}

/// Closed ball `{ y : delta(center, y) <= radius }` with `0 < radius <= sin 1`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjBall {
    pub center: ProjPoint,
    pub radius: f64,
}

impl ProjBall {
    pub fn new(center: ProjPoint, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius <= tolerance::MAX_BALL_RADIUS) {
            return Err(Error::RadiusOutOfRange(radius));
        }
        Ok(Self { center, radius })
    }

    pub fn contains(&self, x: &ProjPoint) -> bool {
        delta(&self.center, x).map_or(false, |d| d <= self.radius)
    }
}
