//! Rational points of `P^N(Q)` enumerated by height.
//!
//! Points are generated shell by shell: the shell of height `h` holds every
//! primitive, sign-normalized integer vector whose largest coordinate
//! magnitude is exactly `h`. Within a shell the order is lexicographic on the
//! signed coordinates.

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_in_place, sine_distance, ProjBall, ProjPoint};
use crate::tolerance;

/// A point of `P^N(Q)` as a primitive integer vector whose first nonzero
/// coordinate is positive, together with its height `max |c_i|`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ProjRational {
    // Field order gives the (height, coords) ordering used everywhere.
    height: u64,
    coords: Vec<i64>,
}

impl ProjRational {
    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn to_point(&self) -> ProjPoint {
        ProjPoint::from_integers(&self.coords).expect("primitive vectors are nonzero")
    }

    pub fn coords_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|&c| c as f64).collect()
    }

    /// Squared Euclidean norm of the primitive vector.
    pub fn norm_squared(&self) -> u128 {
        self.coords
            .iter()
            .map(|&c| (c as i128 * c as i128) as u128)
            .sum()
    }

    /// Builds from coordinates already known to be primitive and canonical.
    pub(crate) fn from_canonical(coords: Vec<i64>) -> Self {
        let height = coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0);
        Self { height, coords }
    }
}

/// Reduces a nonzero integer vector to its canonical primitive representative.
pub fn make_rational(v: &[i64]) -> Result<ProjRational> {
    if v.len() < 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: v.len(),
        });
    }
    let g = v.iter().fold(0i64, |g, &c| g.gcd(&c));
    if g == 0 {
        return Err(Error::ZeroVector);
    }
    let first = *v.iter().find(|&&c| c != 0).expect("g != 0");
    let sign = if first < 0 { -1 } else { 1 };
    let coords = v.iter().map(|&c| sign * (c / g)).collect();
    Ok(ProjRational::from_canonical(coords))
}

/// All canonical primitive vectors of length `len` with height exactly `h`,
/// in lexicographic order.
pub(crate) fn shell(len: usize, h: i64) -> Vec<ProjRational> {
    let mut out = Vec::new();
    let mut buf = vec![0i64; len];
    shell_rec(0, false, false, 0, h, &mut buf, &mut out);
    out
}

fn shell_rec(
    pos: usize,
    leading: bool,
    reached: bool,
    g: i64,
    h: i64,
    buf: &mut Vec<i64>,
    out: &mut Vec<ProjRational>,
) {
    if pos == buf.len() {
        if reached && g == 1 {
            out.push(ProjRational::from_canonical(buf.clone()));
        }
        return;
    }
    let last = pos + 1 == buf.len();
    let start = if leading { -h } else { 0 };
    if last && !reached {
        // The final coordinate must carry the height.
        for v in [-h, h] {
            if v >= start {
                buf[pos] = v;
                shell_rec(pos + 1, true, true, g.gcd(&v), h, buf, out);
            }
        }
        return;
    }
    for v in start..=h {
        buf[pos] = v;
        shell_rec(
            pos + 1,
            leading || v != 0,
            reached || v.abs() == h,
            g.gcd(&v),
            h,
            buf,
            out,
        );
    }
}

/// Stream of rational points with heights in `[next, end)`, shell by shell.
pub struct HeightStream {
    len: usize,
    next: u64,
    end: u64,
    current: std::vec::IntoIter<ProjRational>,
}

impl Iterator for HeightStream {
    type Item = ProjRational;

    fn next(&mut self) -> Option<ProjRational> {
        loop {
            if let Some(q) = self.current.next() {
                return Some(q);
            }
            if self.next >= self.end {
                return None;
            }
            self.current = shell(self.len, self.next as i64).into_iter();
            self.next += 1;
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("projective dimension must be >= 1".into()));
    }
    Ok(())
}

/// Every point of `P^n(Q)` with height at most `bound`, ordered by height then
/// coordinates.
pub fn enumerate_up_to(n: usize, bound: u64) -> Result<HeightStream> {
    check_dim(n)?;
    if bound == 0 {
        return Err(Error::InvalidRange { lo: 1, hi: 1 });
    }
    Ok(HeightStream {
        len: n + 1,
        next: 1,
        end: bound + 1,
        current: Vec::new().into_iter(),
    })
}

/// Every point with `lo <= height < hi`.
pub fn enumerate_band(n: usize, lo: u64, hi: u64) -> Result<HeightStream> {
    check_dim(n)?;
    if lo == 0 || lo >= hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    if hi > i64::MAX as u64 {
        return Err(Error::Overflow("band upper end"));
    }
    Ok(HeightStream {
        len: n + 1,
        next: lo,
        end: hi,
        current: Vec::new().into_iter(),
    })
}

/// Band members within the closed ball, sorted by height then coordinates.
pub fn rationals_in_ball(ball: &ProjBall, lo: u64, hi: u64) -> Result<Vec<ProjRational>> {
    if !(ball.radius > 0.0 && ball.radius <= tolerance::MAX_BALL_RADIUS) {
        return Err(Error::RadiusOutOfRange(ball.radius));
    }
    if lo == 0 || lo >= hi {
        return Err(Error::InvalidRange { lo, hi });
    }
    let mut out = Vec::new();
    search_near(&ball.center, ball.radius, lo, hi, |q, _| out.push(q.clone()));
    out.sort();
    Ok(out)
}

/// Exhaustive search for every rational point `q` with `lo <= H(q) < hi` and
/// `delta(center, q) <= radius`; calls `visit(q, delta)` for each one.
///
/// When the radius is small relative to the largest coordinate of the center
/// (index `k`), every such `q` has `q_k != 0`, and writing `q = q_k (v + w)`
/// with `v = x / x_k` the perturbation obeys
/// `|w| <= r |v|^2 / (1 - r |v|)`, which bounds each remaining coordinate to a
/// short integer window per value of `q_k`. Otherwise the band is scanned in
/// full. Both paths visit in a deterministic order.
pub(crate) fn search_near(
    center: &ProjPoint,
    radius: f64,
    lo: u64,
    hi: u64,
    mut visit: impl FnMut(&ProjRational, f64),
) {
    if lo >= hi {
        return;
    }
    let x = center.rep();
    let len = x.len();
    let (k, xk) = x
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
    let vnorm = 1.0 / xk.abs();
    if radius < 0.0 {
        return;
    }
    if radius * vnorm > 0.5 {
        for h in lo..hi {
            for q in shell(len, h as i64) {
                let mut yf = q.coords_f64();
                normalize_in_place(&mut yf);
                let d = sine_distance(x, &yf);
                if d <= radius {
                    visit(&q, d);
                }
            }
        }
        return;
    }

    let v: Vec<f64> = x.iter().map(|c| c / xk).collect();
    let w = radius * vnorm * vnorm / (1.0 - radius * vnorm);
    let w = w * (1.0 + 1e-9) + 1e-15;
    let cap = (hi - 1) as i64;
    let m_lo = ((lo as f64) / (1.0 + w)).floor().max(1.0) as i64;
    let others: Vec<usize> = (0..len).filter(|&j| j != k).collect();
    let mut lows = vec![0i64; len];
    let mut highs = vec![0i64; len];
    let mut y = vec![0i64; len];
    let mut yf = vec![0f64; len];

    'outer: for m in m_lo..=cap {
        let mf = m as f64;
        for &j in &others {
            let c = mf * v[j];
            let spread = mf * w;
            let a = ((c - spread).ceil() as i64).max(-cap);
            let b = ((c + spread).floor() as i64).min(cap);
            if a > b {
                continue 'outer;
            }
            lows[j] = a;
            highs[j] = b;
            y[j] = a;
        }
        y[k] = m;
        loop {
            let height = y.iter().map(|c| c.unsigned_abs()).max().unwrap();
            if height >= lo && height < hi && y.iter().fold(0i64, |g, &c| g.gcd(&c)) == 1 {
                for (f, &c) in yf.iter_mut().zip(&y) {
                    *f = c as f64;
                }
                normalize_in_place(&mut yf);
                let d = sine_distance(x, &yf);
                if d <= radius {
                    let first = *y.iter().find(|&&c| c != 0).unwrap();
                    let coords = if first < 0 {
                        y.iter().map(|c| -c).collect()
                    } else {
                        y.clone()
                    };
                    visit(&ProjRational::from_canonical(coords), d);
                }
            }
            // odometer over the free coordinates
            let mut advanced = false;
            for &j in others.iter().rev() {
                if y[j] < highs[j] {
                    y[j] += 1;
                    advanced = true;
                    break;
                }
                y[j] = lows[j];
            }
            if !advanced {
                break;
            }
        }
    }
}
