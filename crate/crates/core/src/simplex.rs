//! Projective simplices spanned by rational points.
//!
//! `N + 1` rational points of `P^N` near a center `x` lift to unit vectors in
//! the half-space around `x`; the simplex they span with the origin has volume
//! `|det| / (N+1)!`, and that volume is bounded below by the reciprocal product
//! of heights unless the points are coplanar.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{delta, normalize_point, ProjPoint};
use crate::measure::{canonical_ball_measure, monte_carlo_set_measure, unit_ball_volume};
use crate::ratpoints::{enumerate_up_to, ProjRational};
use crate::tolerance;

/// Largest height accepted by [`verify_simplex_lemma`].
pub const MAX_VERIFY_HEIGHT: u64 = 12;
/// Largest number of tuples [`verify_simplex_lemma`] will examine.
pub const MAX_VERIFY_TUPLES: u128 = 500_000_000;

/// Unit lift of a rational point into the half-space labeled `+1` by the
/// anchor.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CanonicalRep {
    pub source: ProjRational,
    pub anchor: ProjPoint,
    pub rep: Vec<f64>,
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Side of the hyperplane orthogonal to the anchor on which `v` lies: the sign
/// of `<v, rep(anchor)>`, or `0` when `v` is (numerically) on it.
///
/// The anchor's representative is sign-normalized, so `+1` is the side holding
/// the first standard basis vector not orthogonal to the anchor.
pub fn half_space_sign(anchor: &ProjPoint, v: &[f64]) -> Result<i8> {
    if v.len() != anchor.rep().len() {
        return Err(Error::DimensionMismatch {
            expected: anchor.rep().len(),
            found: v.len(),
        });
    }
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let s: f64 = v.iter().zip(anchor.rep()).map(|(a, b)| a * b).sum();
    Ok(if s.abs() <= tolerance::NORMALIZE * norm {
        0
    } else if s > 0.0 {
        1
    } else {
        -1
    })
}

/// The unit lift of `q` on the anchor's positive side. Points on the boundary
/// fall back to the basis-vector cascade, which for a primitive vector means
/// "first nonzero coordinate positive".
pub fn canonical_representative(q: &ProjRational, anchor: &ProjPoint) -> Result<CanonicalRep> {
    let mut rep = q.coords_f64();
    let norm = (q.norm_squared() as f64).sqrt();
    for c in &mut rep {
        *c /= norm;
    }
    if half_space_sign(anchor, &rep)? < 0 {
        for c in &mut rep {
            *c = -*c;
        }
    }
    Ok(CanonicalRep {
        source: q.clone(),
        anchor: anchor.clone(),
        rep,
    })
}

fn check_tuple(qs: &[ProjRational]) -> Result<usize> {
    let n = qs.first().map(|q| q.dim()).ok_or(Error::DimensionMismatch {
        expected: 2,
        found: 0,
    })?;
    if qs.len() != n + 1 {
        return Err(Error::DimensionMismatch {
            expected: n + 1,
            found: qs.len(),
        });
    }
    if let Some(q) = qs.iter().find(|q| q.dim() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.dim(),
        });
    }
    Ok(n)
}

/// Exact determinant of a square integer matrix (Bareiss elimination).
pub fn integer_det(rows: &[Vec<i64>]) -> BigInt {
    let n = rows.len();
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&c| BigInt::from(c)).collect())
        .collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    if n == 0 {
        BigInt::one()
    } else {
        sign * &a[n - 1][n - 1]
    }
}

fn tuple_det(qs: &[ProjRational]) -> BigInt {
    let rows: Vec<Vec<i64>> = qs.iter().map(|q| q.coords().to_vec()).collect();
    integer_det(&rows)
}

/// Whether the points lie on a common projective hyperplane (exact).
pub fn coplanarity_test(qs: &[ProjRational]) -> Result<bool> {
    check_tuple(qs)?;
    Ok(tuple_det(qs).is_zero())
}

fn reps_det(qs: &[ProjRational], anchor: &ProjPoint) -> Result<f64> {
    let n = qs.len();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (j, q) in qs.iter().enumerate() {
        let c = canonical_representative(q, anchor)?;
        for (i, v) in c.rep.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    Ok(m.determinant())
}

/// Volume of the simplex spanned by the origin and the canonical
/// representatives: `|det| / (N+1)!`. Exactly zero for coplanar input.
pub fn simplex_volume(qs: &[ProjRational], anchor: &ProjPoint) -> Result<f64> {
    let n = check_tuple(qs)?;
    if anchor.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: anchor.dim(),
        });
    }
    if tuple_det(qs).is_zero() {
        return Ok(0.0);
    }
    Ok(reps_det(qs, anchor)?.abs() / factorial(n + 1))
}

/// `1 / ((N+1)! (N+1)^{(N+1)/2} ∏ H(q_i))`.
pub fn simplex_lower_bound(qs: &[ProjRational]) -> Result<f64> {
    let n = check_tuple(qs)?;
    let k = (n + 1) as f64;
    let heights: f64 = qs.iter().map(|q| q.height() as f64).product();
    Ok(1.0 / (factorial(n + 1) * k.powf(k / 2.0) * heights))
}

/// `c_N = 2 / ((N+1)! (N+1)^{(N+1)/2} λ(B(0,1)))`: the constant in the lower
/// bound `μ̂(S) >= c_N ∏ H(q_i)^{-1}` for the projective simplex `S`.
pub fn simplex_constant(n: usize) -> f64 {
    let k = (n + 1) as f64;
    2.0 / (factorial(n + 1) * k.powf(k / 2.0) * unit_ball_volume(n + 1))
}

/// Exact form of `volume >= bound`:
/// `det^2 (N+1)^{N+1} ∏ H^2 >= ∏ |q|^2`.
fn exact_bound_holds(qs: &[ProjRational], det: &BigInt) -> bool {
    let k = qs.len() as u32;
    let lhs = det * det
        * BigInt::from(k).pow(k)
        * qs.iter()
            .map(|q| BigInt::from(q.height()) * BigInt::from(q.height()))
            .fold(BigInt::one(), |a, b| a * b);
    let rhs = qs
        .iter()
        .map(|q| BigInt::from(q.norm_squared()))
        .fold(BigInt::one(), |a, b| a * b);
    lhs >= rhs
}

/// One examined tuple.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimplexRow {
    pub points: Vec<Vec<i64>>,
    pub heights: Vec<u64>,
    pub volume: f64,
    pub bound: f64,
    /// `volume / bound - 1`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimplexReport {
    pub n: usize,
    pub hmax: u64,
    pub tuples_examined: u64,
    pub non_coplanar: u64,
    /// Tuples whose float margin was too thin and were settled exactly.
    pub fallback_count: u64,
    /// Smallest `volume / bound - 1` over non-coplanar tuples.
    pub min_margin: f64,
    /// Non-coplanar tuples failing `|det reps| >= ∏ |q_i|^{-1}` (exact).
    pub chain_failures: u64,
    /// Tuples where the exact coplanarity test and the float determinant
    /// disagree.
    pub coplanarity_mismatches: u64,
    pub violations: Vec<SimplexRow>,
    pub rows: Option<Vec<SimplexRow>>,
}

impl SimplexReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.chain_failures == 0 && self.coplanarity_mismatches == 0
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) / (i + 1))
}

/// Centroid direction of the sign-normalized unit lifts. Sign-normalized
/// vectors are lexicographically positive, so their sum never vanishes.
fn centroid_anchor(qs: &[ProjRational]) -> ProjPoint {
    let len = qs[0].coords().len();
    let mut s = vec![0.0; len];
    for q in qs {
        let norm = (q.norm_squared() as f64).sqrt();
        for (a, &c) in s.iter_mut().zip(q.coords()) {
            *a += c as f64 / norm;
        }
    }
    normalize_point(&s).expect("lexicographically positive sum")
}

#[derive(Default)]
struct Partial {
    examined: u64,
    non_coplanar: u64,
    fallback: u64,
    min_margin: f64,
    chain_failures: u64,
    mismatches: u64,
    violations: Vec<SimplexRow>,
    rows: Vec<SimplexRow>,
}

fn check_one(qs: &[ProjRational], keep_rows: bool, acc: &mut Partial) {
    acc.examined += 1;
    let det = tuple_det(qs);
    let anchor = centroid_anchor(qs);
    let fdet = reps_det(qs, &anchor).expect("validated tuple").abs();
    if det.is_zero() {
        if fdet > 1e-12 {
            acc.mismatches += 1;
        }
        return;
    }
    if fdet == 0.0 {
        acc.mismatches += 1;
    }
    acc.non_coplanar += 1;
    // the intermediate inequality |det reps| >= ∏ |q|^{-1} is |det| >= 1
    if det.abs() < BigInt::one() {
        acc.chain_failures += 1;
    }
    let volume = fdet / factorial(qs.len());
    let bound = simplex_lower_bound(qs).expect("validated tuple");
    let margin = volume / bound - 1.0;
    let ok = if margin.abs() < tolerance::SIMPLEX_EXACT_MARGIN {
        acc.fallback += 1;
        exact_bound_holds(qs, &det)
    } else {
        margin > 0.0
    };
    acc.min_margin = acc.min_margin.min(margin);
    let row = || SimplexRow {
        points: qs.iter().map(|q| q.coords().to_vec()).collect(),
        heights: qs.iter().map(|q| q.height()).collect(),
        volume,
        bound,
        margin,
    };
    if !ok {
        acc.violations.push(row());
    }
    if keep_rows {
        acc.rows.push(row());
    }
}

/// Exhaustively checks `simplex_volume >= simplex_lower_bound` over every
/// `(N+1)`-tuple of distinct rational points with height at most `hmax`.
pub fn verify_simplex_lemma(n: usize, hmax: u64) -> Result<SimplexReport> {
    verify_simplex_lemma_with(n, hmax, false)
}

/// As [`verify_simplex_lemma`], optionally keeping a row per non-coplanar
/// tuple.
pub fn verify_simplex_lemma_with(n: usize, hmax: u64, keep_rows: bool) -> Result<SimplexReport> {
    if !(1..=2).contains(&n) {
        return Err(Error::BudgetExceeded(format!("simplex verification needs N in {{1, 2}}, got {n}")));
    }
    if hmax == 0 {
        return Err(Error::InvalidParameter("hmax must be >= 1".into()));
    }
    if hmax > MAX_VERIFY_HEIGHT {
        return Err(Error::BudgetExceeded(format!(
            "hmax {hmax} exceeds {MAX_VERIFY_HEIGHT}"
        )));
    }
    let pts: Vec<ProjRational> = enumerate_up_to(n, hmax)?.collect();
    let total = binomial(pts.len() as u128, n as u128 + 1);
    if total > MAX_VERIFY_TUPLES {
        return Err(Error::BudgetExceeded(format!(
            "{total} tuples exceed {MAX_VERIFY_TUPLES}"
        )));
    }
    let m = pts.len();
    let parts: Vec<Partial> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut acc = Partial {
                min_margin: f64::INFINITY,
                ..Default::default()
            };
            let mut tuple = Vec::with_capacity(n + 1);
            if n == 1 {
                for j in i + 1..m {
                    tuple.clear();
                    tuple.extend([pts[i].clone(), pts[j].clone()]);
                    check_one(&tuple, keep_rows, &mut acc);
                }
            } else {
                for j in i + 1..m {
                    for k in j + 1..m {
                        tuple.clear();
                        tuple.extend([pts[i].clone(), pts[j].clone(), pts[k].clone()]);
                        check_one(&tuple, keep_rows, &mut acc);
                    }
                }
            }
            acc
        })
        .collect();
    let mut report = SimplexReport {
        n,
        hmax,
        tuples_examined: 0,
        non_coplanar: 0,
        fallback_count: 0,
        min_margin: f64::INFINITY,
        chain_failures: 0,
        coplanarity_mismatches: 0,
        violations: Vec::new(),
        rows: keep_rows.then(Vec::new),
    };
    for p in parts {
        report.tuples_examined += p.examined;
        report.non_coplanar += p.non_coplanar;
        report.fallback_count += p.fallback;
        report.min_margin = report.min_margin.min(p.min_margin);
        report.chain_failures += p.chain_failures;
        report.coplanarity_mismatches += p.mismatches;
        report.violations.extend(p.violations);
        if let Some(rows) = report.rows.as_mut() {
            rows.extend(p.rows);
        }
    }
    Ok(report)
}

/// The three quantities of the measure sandwich
/// `μ̂(B) >= μ̂(S) >= 2 λ(C) / λ(B(0,1))`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sandwich {
    pub ball: f64,
    pub simplex: f64,
    pub simplex_stderr: f64,
    pub lower_from_volume: f64,
}

impl Sandwich {
    /// Both inequalities, each allowed `k` standard errors of slack.
    pub fn holds(&self, k: f64) -> bool {
        let slack = k * self.simplex_stderr + 1e-12;
        self.simplex <= self.ball + slack && self.simplex + slack >= self.lower_from_volume
    }
}

/// Monte Carlo estimate of the canonical measure of the projective simplex
/// spanned by `qs`, alongside the ball measure above it and the volume bound
/// below it.
pub fn simplex_measure_sandwich(
    qs: &[ProjRational],
    anchor: &ProjPoint,
    r: f64,
    samples: u64,
    seed: u64,
) -> Result<Sandwich> {
    let n = check_tuple(qs)?;
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::RadiusOutOfRange(r));
    }
    for q in qs {
        if delta(anchor, &q.to_point())? > r {
            return Err(Error::PointsOutsideBall);
        }
    }
    let ball = canonical_ball_measure(n, r);
    let volume = simplex_volume(qs, anchor)?;
    let lower_from_volume = 2.0 * volume / unit_ball_volume(n + 1);
    if volume == 0.0 {
        return Ok(Sandwich {
            ball,
            simplex: 0.0,
            simplex_stderr: 0.0,
            lower_from_volume,
        });
    }
    let mut q = DMatrix::<f64>::zeros(n + 1, n + 1);
    for (j, p) in qs.iter().enumerate() {
        for (i, v) in canonical_representative(p, anchor)?.rep.iter().enumerate() {
            q[(i, j)] = *v;
        }
    }
    let lu = q.lu();
    let (simplex, simplex_stderr) = monte_carlo_set_measure(
        n,
        |x| {
            let b = nalgebra::DVector::from_column_slice(x.rep());
            match lu.solve(&b) {
                Some(l) => l.iter().all(|&c| c >= 0.0) || l.iter().all(|&c| c <= 0.0),
                None => false,
            }
        },
        samples,
        seed,
    );
    Ok(Sandwich {
        ball,
        simplex,
        simplex_stderr,
        lower_from_volume,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratpoints::make_rational;

    fn rq(v: &[i64]) -> ProjRational {
        make_rational(v).unwrap()
    }

    fn pt(v: &[f64]) -> ProjPoint {
        normalize_point(v).unwrap()
    }

    #[test]
    fn half_space_examples() {
        let a = pt(&[1.0, 0.0]);
        assert_eq!(half_space_sign(&a, &[3.0, 5.0]).unwrap(), 1);
        assert_eq!(half_space_sign(&a, &[-3.0, 5.0]).unwrap(), -1);
        assert_eq!(half_space_sign(&pt(&[0.0, 1.0]), &[1.0, 0.0]).unwrap(), 0);
        assert!(matches!(half_space_sign(&a, &[0.0, 0.0]), Err(Error::ZeroVector)));
    }

    #[test]
    fn canonical_rep_examples() {
        let a = pt(&[1.0, 0.0]);
        let c = canonical_representative(&rq(&[-1, 2]), &a).unwrap();
        let s5 = 5f64.sqrt();
        assert!((c.rep[0] - 1.0 / s5).abs() < 1e-15 && (c.rep[1] + 2.0 / s5).abs() < 1e-15);
        assert_eq!(canonical_representative(&rq(&[1, 0]), &a).unwrap().rep, vec![1.0, 0.0]);
        let c = canonical_representative(&rq(&[1, 0]), &pt(&[1.0, 1.0])).unwrap();
        assert_eq!(c.rep, vec![1.0, 0.0]);
        // boundary case: the cascade keeps the primitive orientation
        let c = canonical_representative(&rq(&[1, 0]), &pt(&[0.0, 1.0])).unwrap();
        assert_eq!(c.rep, vec![1.0, 0.0]);
        assert!(c.source.to_point().same_as(&pt(&c.rep)));
    }

    #[test]
    fn bareiss_matches_cofactor_expansion() {
        assert_eq!(integer_det(&[vec![2, 3], vec![1, 4]]), BigInt::from(5));
        assert_eq!(integer_det(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        let m = [vec![2, -1, 3], vec![0, 4, 5], vec![1, 1, 1]];
        let cof = 2 * (4 - 5) - (-1) * (0 - 5) + 3 * (0 - 4);
        assert_eq!(integer_det(&m), BigInt::from(cof));
        assert_eq!(integer_det(&[vec![0, 0, 1], vec![0, 1, 0], vec![1, 0, 0]]), BigInt::from(-1));
    }

    #[test]
    fn coplanarity_examples() {
        assert!(coplanarity_test(&[rq(&[1, 0, 0]), rq(&[0, 1, 0]), rq(&[1, 1, 0])]).unwrap());
        assert!(!coplanarity_test(&[rq(&[1, 0]), rq(&[0, 1])]).unwrap());
        assert!(!coplanarity_test(&[rq(&[1, 0, 0]), rq(&[0, 1, 0]), rq(&[0, 0, 1])]).unwrap());
        assert!(matches!(
            coplanarity_test(&[rq(&[1, 0]), rq(&[0, 1]), rq(&[1, 1])]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn volume_examples() {
        let a = pt(&[1.0, 1.0]);
        let v = simplex_volume(&[rq(&[1, 0]), rq(&[0, 1])], &a).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let v = simplex_volume(&[rq(&[1, 1]), rq(&[1, 2])], &a).unwrap();
        assert!((v - 1.0 / (2.0 * 10f64.sqrt())).abs() < 1e-15);
        let a3 = pt(&[1.0, 1.0, 1.0]);
        assert_eq!(simplex_volume(&[rq(&[1, 0, 0]), rq(&[0, 1, 0]), rq(&[1, 1, 0])], &a3).unwrap(), 0.0);
    }

    #[test]
    fn volume_is_permutation_and_anchor_invariant() {
        let qs = [rq(&[1, 2, 3]), rq(&[2, -1, 1]), rq(&[0, 1, -3])];
        let base = simplex_volume(&qs, &pt(&[1.0, 0.5, 0.2])).unwrap();
        for anchor in [pt(&[0.0, 1.0, 0.0]), pt(&[-1.0, 2.0, 5.0])] {
            let perm = [qs[2].clone(), qs[0].clone(), qs[1].clone()];
            let v = simplex_volume(&perm, &anchor).unwrap();
            assert!((v - base).abs() < 1e-14 * base);
        }
    }

    #[test]
    fn lower_bound_examples() {
        assert_eq!(simplex_lower_bound(&[rq(&[1, 0]), rq(&[0, 1])]).unwrap(), 0.25);
        assert_eq!(simplex_lower_bound(&[rq(&[1, 1]), rq(&[1, 2])]).unwrap(), 0.125);
        let v = simplex_lower_bound(&[rq(&[1, 0, 0]), rq(&[0, 1, 0]), rq(&[0, 0, 1])]).unwrap();
        assert!((v - 1.0 / (6.0 * 27f64.sqrt())).abs() < 1e-15);
        assert!((v - 0.03207).abs() < 1e-5);
    }

    #[test]
    fn simplex_constant_values() {
        // N = 1: 2 / (2 · 2 · π)
        assert!((simplex_constant(1) - 1.0 / (2.0 * std::f64::consts::PI)).abs() < 1e-15);
        assert!(simplex_constant(2) > 0.0 && simplex_constant(2) < simplex_constant(1));
    }

    #[test]
    fn lemma_small_budgets() {
        let r = verify_simplex_lemma(1, 1).unwrap();
        assert_eq!(r.tuples_examined, 6);
        assert!(r.passed());
        let r = verify_simplex_lemma(1, 8).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.min_margin > 0.0);
        assert!(matches!(verify_simplex_lemma(3, 2), Err(Error::BudgetExceeded(_))));
        assert!(matches!(verify_simplex_lemma(1, 13), Err(Error::BudgetExceeded(_))));
    }

    #[test]
    fn exact_check_agrees_with_float_on_small_tuples() {
        let pts: Vec<ProjRational> = enumerate_up_to(1, 5).unwrap().collect();
        for i in 0..pts.len() {
            for j in i + 1..pts.len() {
                let qs = [pts[i].clone(), pts[j].clone()];
                let det = tuple_det(&qs);
                let v = simplex_volume(&qs, &centroid_anchor(&qs)).unwrap();
                let b = simplex_lower_bound(&qs).unwrap();
                assert_eq!(exact_bound_holds(&qs, &det), v >= b);
            }
        }
    }

    #[test]
    fn sandwich_examples() {
        let qs = [rq(&[1, 0]), rq(&[1, 1])];
        let anchor = pt(&[1.0, 0.4]);
        let s = simplex_measure_sandwich(&qs, &anchor, 0.8, 200_000, 3).unwrap();
        assert!(s.holds(4.0), "{s:?}");
        // the simplex is the arc of angle π/4: measure 1/4
        assert!((s.simplex - 0.25).abs() < 4.0 * s.simplex_stderr + 1e-9);
        let full = simplex_measure_sandwich(&qs, &anchor, 1.0, 10_000, 3).unwrap();
        assert_eq!(full.ball, 1.0);
        assert!(full.holds(4.0));
        let flat = [rq(&[1, 0, 0]), rq(&[0, 1, 0]), rq(&[1, 1, 0])];
        let s = simplex_measure_sandwich(&flat, &pt(&[1.0, 1.0, 0.1]), 1.0, 1000, 1).unwrap();
        assert_eq!(s.simplex, 0.0);
        assert!(matches!(
            simplex_measure_sandwich(&qs, &pt(&[0.0, 1.0]), 0.1, 10, 1),
            Err(Error::PointsOutsideBall)
        ));
    }
}
