//! Nested-ball constructions of badly approximable points.
//!
//! Round `n` takes each surviving ball `θB_n` (radius `θ ρ(t, n)`), packs it
//! with disjoint children of radius `2θ ρ(t, n+1)` and discards every child
//! whose center lies within that radius of a rational point of height in
//! `[t^n, t^{n+1})`. The next round works inside the half-size balls
//! `θB_{n+1}`, so every point of a surviving `θB_{n+1}` stays at distance
//! `> θ ρ(t, n+1)` from the band's rationals. Taken over all rounds this gives
//! `δ(x, q) >= θ t^{-(N+1)/N} H(q)^{-(N+1)/N}` for every `H(q) <= t^depth`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{approx_constant_record, approx_exponent, HeightNorm};
use crate::error::{Error, Result};
use crate::geometry::{delta, normalize_point, slope_embed, slope_extract, ProjBall, ProjPoint, Slope};
use crate::measure::{power_law_constants, MeasureKind, MeasureModel};
use crate::ratpoints::{search_near, ProjRational};
use crate::simplex::simplex_constant;
use crate::tolerance;

/// Smallest ball radius the construction will work with.
pub const MIN_RADIUS: f64 = 1e-12;
/// Absolute margin added to every containment, disjointness and pruning
/// decision, well above the rounding error of `δ` on unit vectors.
pub const GUARD: f64 = 1e-14;
/// Cap on the total number of kept balls across all levels.
pub const MAX_BALLS: usize = 2_000_000;

/// Largest `t^depth` for which bands can be enumerated exhaustively.
pub fn height_budget(n: usize) -> f64 {
    match n {
        1 => 1e5,
        2 => 1e3,
        _ => 1e2,
    }
}

/// `ρ(t, n) = t^{-n (N+1) / N}`.
pub fn rho(t: f64, n: u32, dim: usize) -> Result<f64> {
    if !(t > 1.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("t must be > 1, got {t}")));
    }
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(t.powf(-(n as f64) * approx_exponent(dim)))
}

/// `θ = c_N / (2 b_N t^{N+1})` with `c_N` the simplex constant and `b_N` the
/// upper power-law constant of the canonical measure.
pub fn default_theta(n: usize, t: f64) -> f64 {
    let (_, b) = power_law_constants(n);
    simplex_constant(n) / (2.0 * b * t.powi(n as i32 + 1))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KtvParams {
    pub n: usize,
    pub t: f64,
    pub theta: f64,
    pub depth: u32,
    pub measure: MeasureModel,
    /// Center of the root ball; must lie in the support of `measure`.
    pub root: ProjPoint,
    /// Avoidance constant certified for the leaves: `θ t^{-(N+1)/N}`.
    pub c_bad: f64,
}

/// Default root center: a generic point for the canonical measure, slope 1/4
/// (ternary 0.0202...) for the Cantor-slope measure.
pub fn default_root(measure: &MeasureModel) -> ProjPoint {
    match measure.kind {
        MeasureKind::CantorSlope => slope_embed(0.25),
        MeasureKind::Canonical => {
            let v: Vec<f64> = (0..=measure.dim)
                .map(|i| if i == 0 { 1.0 } else { 1.0 / (2.0 + (i as f64).sqrt() * 1.618_033_988_749_895) })
                .collect();
            normalize_point(&v).expect("nonzero")
        }
    }
}

impl KtvParams {
    /// Parameters with the default `θ` and root.
    pub fn new(n: usize, t: f64, depth: u32, measure: MeasureModel) -> Result<Self> {
        let root = default_root(&measure);
        Self::with(n, t, default_theta(n, t), depth, measure, root)
    }

    pub fn with(
        n: usize,
        t: f64,
        theta: f64,
        depth: u32,
        measure: MeasureModel,
        root: ProjPoint,
    ) -> Result<Self> {
        rho(t, 1, n)?;
        if measure.dim != n || root.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if measure.dim != n { measure.dim } else { root.dim() },
            });
        }
        if !(theta > 0.0 && theta <= tolerance::MAX_BALL_RADIUS) {
            return Err(Error::InvalidParameter(format!("theta must be in (0, sin 1], got {theta}")));
        }
        if depth == 0 {
            return Err(Error::InvalidParameter("depth must be >= 1".into()));
        }
        if !measure.in_support(&root) {
            return Err(Error::PointOutsideSupport);
        }
        Ok(Self {
            n,
            t,
            theta,
            depth,
            c_bad: theta * t.powf(-approx_exponent(n)),
            measure,
            root,
        })
    }

    /// Radius of the working ball `θB_n`.
    pub fn parent_radius(&self, n: u32) -> f64 {
        self.theta * self.t.powf(-(n as f64) * approx_exponent(self.n))
    }

    /// Radius `2θρ(t, n+1)` of the children packed in round `n`.
    pub fn child_radius(&self, n: u32) -> f64 {
        2.0 * self.parent_radius(n + 1)
    }

    /// Heights `[lo, hi)` avoided in round `n`: `t^n <= H < t^{n+1}`, with the
    /// last round also covering `H = t^depth`.
    pub fn band(&self, n: u32) -> (u64, u64) {
        let lo = self.t.powi(n as i32).ceil() as u64;
        let top = self.t.powi(n as i32 + 1);
        let hi = if n + 1 == self.depth {
            top.floor() as u64 + 1
        } else {
            top.ceil() as u64
        };
        (lo.max(1), hi.max(1))
    }

    /// Every height checked by the construction: `floor(t^depth)`.
    pub fn verified_height(&self) -> u64 {
        self.t.powi(self.depth as i32).floor() as u64
    }
}

/// A ball kept by the construction, stored at its packing radius.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeBall {
    pub center: ProjPoint,
    pub radius: f64,
    /// Index of the parent in the previous level (0 for the root).
    pub parent: usize,
}

/// A discarded child and the rational that disqualified it.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PruneEntry {
    pub parent: usize,
    pub center: ProjPoint,
    pub radius: f64,
    pub rational: ProjRational,
    pub distance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Level {
    /// Round index `n`; the balls here are the construction level `n + 1`.
    pub round: u32,
    pub band: (u64, u64),
    pub child_radius: f64,
    pub balls: Vec<TreeBall>,
    pub pruned: Vec<PruneEntry>,
    /// Packed / kept children per parent of the previous level.
    pub packed_per_parent: Vec<usize>,
    pub kept_per_parent: Vec<usize>,
    /// Branching the power law predicts: `t^{δ (N+1)/N}`.
    pub target_per_parent: f64,
}

impl Level {
    pub fn pruned_fraction(&self) -> f64 {
        let packed: usize = self.packed_per_parent.iter().sum();
        if packed == 0 {
            0.0
        } else {
            self.pruned.len() as f64 / packed as f64
        }
    }

    /// Smallest `packed / target` over parents: the achieved packing constant.
    pub fn achieved_kappa(&self) -> f64 {
        self.packed_per_parent
            .iter()
            .map(|&p| p as f64 / self.target_per_parent)
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConstructionTree {
    pub params: KtvParams,
    pub root: ProjBall,
    pub levels: Vec<Level>,
}

impl ConstructionTree {
    pub fn leaves(&self) -> &[TreeBall] {
        self.levels.last().map_or(&[], |l| &l.balls)
    }

    /// Checks nesting and disjointness on the stored values.
    ///
    /// Children are checked pairwise within each parent and for containment in
    /// the parent's working ball; since working balls sit inside disjoint
    /// packing balls, this implies disjointness across the whole level.
    pub fn check_invariants(&self) -> Result<()> {
        let p = &self.params;
        let mut prev: Vec<ProjPoint> = vec![self.root.center.clone()];
        for level in &self.levels {
            let parent_r = p.parent_radius(level.round);
            let r = level.child_radius;
            let mut by_parent: Vec<Vec<&TreeBall>> = vec![Vec::new(); prev.len()];
            for b in &level.balls {
                if (b.radius - r).abs() > 0.0 {
                    return Err(Error::InvariantViolation(format!("round {}: wrong radius", level.round)));
                }
                let d = delta(&b.center, &prev[b.parent])?;
                if d + b.radius > parent_r {
                    return Err(Error::InvariantViolation(format!(
                        "round {}: child escapes its parent ({d} + {} > {parent_r})",
                        level.round, b.radius
                    )));
                }
                by_parent[b.parent].push(b);
            }
            for kids in &by_parent {
                for (i, a) in kids.iter().enumerate() {
                    for b in &kids[i + 1..] {
                        if delta(&a.center, &b.center)? <= a.radius + b.radius {
                            return Err(Error::InvariantViolation(format!(
                                "round {}: overlapping children",
                                level.round
                            )));
                        }
                    }
                }
            }
            prev = level.balls.iter().map(|b| b.center.clone()).collect();
        }
        Ok(())
    }
}

fn tangent_basis(c: &[f64]) -> Vec<Vec<f64>> {
    let len = c.len();
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut order: Vec<usize> = (0..len).collect();
    // start from the axes least aligned with c
    order.sort_by(|&a, &b| c[a].abs().partial_cmp(&c[b].abs()).unwrap());
    for &i in &order {
        if basis.len() == len - 1 {
            break;
        }
        let mut v = vec![0.0; len];
        v[i] = 1.0;
        for _ in 0..2 {
            for u in std::iter::once(c).chain(basis.iter().map(|b| b.as_slice())) {
                let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
                for (x, y) in v.iter_mut().zip(u) {
                    *x -= d * y;
                }
            }
        }
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Tangent offsets (in units of the usable radius) for the canonical measure:
/// an even sweep for `N = 1`, Halton points in the unit disc otherwise.
fn canonical_offsets(dim: usize, ratio: f64) -> Vec<Vec<f64>> {
    if dim == 1 {
        let steps = ((16.0 * ratio).ceil() as usize).clamp(16, 1 << 16);
        return (0..=steps)
            .map(|i| vec![-1.0 + 2.0 * i as f64 / steps as f64])
            .collect();
    }
    let count = ((64.0 * ratio.powi(dim as i32)).ceil() as u64).clamp(256, 1 << 17);
    let mut out = vec![vec![0.0; dim]];
    for i in 1..=count {
        let u: Vec<f64> = (0..dim)
            .map(|k| 2.0 * radical_inverse(i, PRIMES[k % PRIMES.len()]) - 1.0)
            .collect();
        if u.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            out.push(u);
        }
    }
    out
}

/// Left and right endpoints of the level-`k` Cantor intervals meeting
/// `[lo, hi]`, ascending.
fn cantor_points(lo: f64, hi: f64, k: u32) -> Vec<f64> {
    fn rec(a: f64, len: f64, k: u32, lo: f64, hi: f64, out: &mut Vec<f64>) {
        if a > hi || a + len < lo {
            return;
        }
        if k == 0 {
            for s in [a, a + len] {
                if s >= lo && s <= hi && out.last().map_or(true, |&l| s > l) {
                    out.push(s);
                }
            }
            return;
        }
        let third = len / 3.0;
        rec(a, third, k - 1, lo, hi, out);
        rec(a + 2.0 * third, third, k - 1, lo, hi, out);
    }
    let mut out = Vec::new();
    rec(0.0, 1.0, k, lo, hi, &mut out);
    out
}

fn candidates(parent: &ProjBall, child_r: f64, measure: &MeasureModel) -> Vec<ProjPoint> {
    let reach = parent.radius - child_r;
    if reach < 0.0 {
        return Vec::new();
    }
    let c = parent.center.rep();
    match measure.kind {
        MeasureKind::Canonical => {
            // δ(c, normalize(c + u)) = |u| / sqrt(1 + |u|^2) for u ⟂ c
            let umax = reach / (1.0 - reach * reach).sqrt() * (1.0 - 1e-9);
            let basis = tangent_basis(c);
            canonical_offsets(measure.dim, parent.radius / child_r)
                .into_iter()
                .filter_map(|u| {
                    let mut v = c.to_vec();
                    for (coef, b) in u.iter().zip(&basis) {
                        for (x, y) in v.iter_mut().zip(b) {
                            *x += umax * coef * y;
                        }
                    }
                    normalize_point(&v).ok()
                })
                .collect()
        }
        MeasureKind::CantorSlope => {
            let phi = match slope_extract(&parent.center) {
                Ok(Slope::Finite(s)) => s.atan(),
                _ => return Vec::new(),
            };
            let alpha = reach.asin() * (1.0 - 1e-9);
            let lo = (phi - alpha).max(0.0).tan().max(0.0);
            let hi = (phi + alpha).min(std::f64::consts::FRAC_PI_4).tan().min(1.0);
            if lo > hi {
                return Vec::new();
            }
            let k = ((8.0 / child_r).ln() / 3f64.ln()).ceil().clamp(1.0, 33.0) as u32;
            cantor_points(lo, hi, k).into_iter().map(slope_embed).collect()
        }
    }
}

/// Outcome of packing one parent.
#[derive(Clone, Debug)]
pub struct Packing {
    pub children: Vec<ProjBall>,
    /// `(ρ(t, n) / ρ(t, n+1))^δ`, the branching the power law predicts.
    pub target: f64,
}

/// Greedily packs disjoint balls of radius `2θρ(t, n+1)`, centered in the
/// support of the measure, inside `parent` (the working ball `θB_n`).
/// Candidates are visited in a fixed low-discrepancy order and accepted when
/// disjoint from everything accepted so far.
pub fn pack_children(parent: &ProjBall, n: u32, params: &KtvParams) -> Result<Packing> {
    let r = params.child_radius(n);
    if parent.radius < MIN_RADIUS || r < MIN_RADIUS {
        return Err(Error::PackingFailed(format!(
            "radius below resolution (parent {}, child {r})",
            parent.radius
        )));
    }
    let mut kept: Vec<ProjPoint> = Vec::new();
    for cand in candidates(parent, r, &params.measure) {
        if delta(&cand, &parent.center)? + r > parent.radius - GUARD {
            continue;
        }
        let mut free = true;
        for k in &kept {
            if delta(&cand, k)? <= 2.0 * r + GUARD {
                free = false;
                break;
            }
        }
        if free {
            kept.push(cand);
        }
    }
    if kept.is_empty() {
        return Err(Error::PackingFailed(format!(
            "no child of radius {r} fits in a parent of radius {}",
            parent.radius
        )));
    }
    let target = params
        .t
        .powf(approx_exponent(params.n) * params.measure.regularity_exponent);
    Ok(Packing {
        children: kept
            .into_iter()
            .map(|center| ProjBall { center, radius: r })
            .collect(),
        target,
    })
}

/// Drops every child whose center is within its own radius of a rational
/// point with height in the round-`n` band; returns the survivors and a log of
/// the discarded ones (parent index left at 0).
pub fn prune_resonant(
    parent: &ProjBall,
    children: Vec<ProjBall>,
    n: u32,
    params: &KtvParams,
) -> (Vec<ProjBall>, Vec<PruneEntry>) {
    let (lo, hi) = params.band(n);
    let r = params.child_radius(n);
    let mut nearby: Vec<ProjRational> = Vec::new();
    search_near(&parent.center, parent.radius + r + GUARD, lo, hi, |q, _| nearby.push(q.clone()));
    if nearby.is_empty() {
        return (children, Vec::new());
    }
    let points: Vec<ProjPoint> = nearby.iter().map(|q| q.to_point()).collect();
    let mut kept = Vec::new();
    let mut log = Vec::new();
    for child in children {
        let hit = points
            .iter()
            .zip(&nearby)
            .map(|(p, q)| (delta(&child.center, p).expect("same dimension"), q))
            .filter(|(d, _)| *d <= r + GUARD)
            .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(b.1)));
        match hit {
            Some((distance, q)) => log.push(PruneEntry {
                parent: 0,
                center: child.center,
                radius: child.radius,
                rational: q.clone(),
                distance,
            }),
            None => kept.push(child),
        }
    }
    (kept, log)
}

/// Runs all `depth` pack/prune rounds from the root ball of radius `θ`.
pub fn build_construction(params: &KtvParams) -> Result<ConstructionTree> {
    let top = params.t.powf(params.depth as f64);
    if !top.is_finite() || top > height_budget(params.n) {
        return Err(Error::BudgetExceeded(format!(
            "t^depth = {top:e} exceeds the exhaustive budget {:e}",
            height_budget(params.n)
        )));
    }
    let smallest = params.child_radius(params.depth - 1);
    if !(smallest >= MIN_RADIUS) {
        return Err(Error::BudgetExceeded(format!("smallest radius {smallest:e} below {MIN_RADIUS:e}")));
    }
    let root = ProjBall::new(params.root.clone(), params.parent_radius(0))?;
    let mut parents: Vec<ProjPoint> = vec![root.center.clone()];
    let mut levels: Vec<Level> = Vec::new();
    let mut total = 0usize;
    for n in 0..params.depth {
        let working = params.parent_radius(n);
        let results: Vec<Result<(Packing, Vec<ProjBall>, Vec<PruneEntry>)>> = parents
            .par_iter()
            .map(|c| {
                let parent = ProjBall {
                    center: c.clone(),
                    radius: working,
                };
                let packing = pack_children(&parent, n, params)?;
                let (kept, log) = prune_resonant(&parent, packing.children.clone(), n, params);
                Ok((packing, kept, log))
            })
            .collect();
        let mut level = Level {
            round: n,
            band: params.band(n),
            child_radius: params.child_radius(n),
            balls: Vec::new(),
            pruned: Vec::new(),
            packed_per_parent: Vec::with_capacity(parents.len()),
            kept_per_parent: Vec::with_capacity(parents.len()),
            target_per_parent: 0.0,
        };
        for (pi, res) in results.into_iter().enumerate() {
            let (packing, kept, log) = res?;
            level.target_per_parent = packing.target;
            level.packed_per_parent.push(packing.children.len());
            level.kept_per_parent.push(kept.len());
            level.balls.extend(kept.into_iter().map(|b| TreeBall {
                center: b.center,
                radius: b.radius,
                parent: pi,
            }));
            level.pruned.extend(log.into_iter().map(|e| PruneEntry { parent: pi, ..e }));
        }
        total += level.balls.len();
        if total > MAX_BALLS {
            return Err(Error::BudgetExceeded(format!("more than {MAX_BALLS} balls")));
        }
        parents = level.balls.iter().map(|b| b.center.clone()).collect();
        levels.push(level);
        if parents.is_empty() {
            break;
        }
    }
    Ok(ConstructionTree {
        params: params.clone(),
        root,
        levels,
    })
}

/// A leaf center with its exhaustively verified approximation constant.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LeafCertificate {
    pub index: usize,
    pub center: ProjPoint,
    /// `min_{H(q) <= h_verified} H(q)^{(N+1)/N} δ(x, q)`.
    pub c_emp: f64,
    pub h_verified: u64,
    /// The rational attaining `c_emp`.
    pub witness: ProjRational,
    /// `c_emp >= c_bad`.
    pub certified: bool,
}

fn certificate(index: usize, center: &ProjPoint, h: u64, c_bad: f64) -> Result<LeafCertificate> {
    let rec = approx_constant_record(center, h, HeightNorm::Max)?;
    Ok(LeafCertificate {
        index,
        center: center.clone(),
        c_emp: rec.normalized,
        h_verified: h,
        witness: rec.best,
        certified: rec.normalized >= c_bad,
    })
}

/// The first leaf's center, its empirical constant, and the verified height.
pub fn extract_bad_point(tree: &ConstructionTree) -> Result<LeafCertificate> {
    let leaf = tree.leaves().first().ok_or(Error::EmptyTree)?;
    if tree.levels.len() < tree.params.depth as usize {
        return Err(Error::EmptyTree);
    }
    certificate(0, &leaf.center, tree.params.verified_height(), tree.params.c_bad)
}

/// Certificates for every leaf, in leaf order.
pub fn certify_leaves(tree: &ConstructionTree) -> Result<Vec<LeafCertificate>> {
    if tree.leaves().is_empty() || tree.levels.len() < tree.params.depth as usize {
        return Err(Error::EmptyTree);
    }
    let h = tree.params.verified_height();
    tree.leaves()
        .par_iter()
        .enumerate()
        .map(|(i, b)| certificate(i, &b.center, h, tree.params.c_bad))
        .collect()
}

/// `log(min kept branching) / ((N+1)/N · log t)`, the minimum taken over all
/// parents that kept at least one child.
pub fn dimension_lower_stat(tree: &ConstructionTree) -> Result<f64> {
    let min = tree
        .levels
        .iter()
        .flat_map(|l| l.kept_per_parent.iter().copied())
        .filter(|&k| k > 0)
        .min()
        .ok_or(Error::EmptyTree)?;
    Ok((min as f64).ln() / (approx_exponent(tree.params.n) * tree.params.t.ln()))
}

/// Continued-fraction quotients `[a_1, a_2, ...]` of `s ∈ (0, 1)`, computed
/// exactly from the binary value of `s`. Stops early if the expansion
/// terminates.
pub fn partial_quotients(s: f64, k: usize) -> Vec<BigInt> {
    let mut x = match BigRational::from_float(s) {
        Some(x) => x,
        None => return Vec::new(),
    };
    let mut out = Vec::new();
    x = x.fract();
    while out.len() < k && !x.is_zero() {
        let inv = x.recip();
        let a = inv.floor();
        out.push(a.to_integer());
        x = inv - a;
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CfCheck {
    pub slope: f64,
    /// All of the first `k` partial quotients are at most 50.
    pub cf_bad: bool,
    pub max_quotient: u64,
    /// `approx_constant(slope_embed(s), B)`.
    pub c_emp: f64,
}

pub const CF_QUOTIENT_LIMIT: u64 = 50;

/// Compares the continued-fraction criterion for bad approximability of the
/// slope `s` with the projective constant of `slope_embed(s)`.
pub fn cf_bad_crosscheck(s: f64, k: usize, bound: u64) -> Result<CfCheck> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("slope must lie in (0, 1), got {s}")));
    }
    let qs = partial_quotients(s, k);
    if qs.len() < k {
        return Err(Error::RationalInput);
    }
    let max_quotient = qs
        .iter()
        .map(|a| a.abs().to_u64().unwrap_or(u64::MAX))
        .max()
        .unwrap_or(0);
    let c_emp = approx_constant_record(&slope_embed(s), bound, HeightNorm::Max)?.normalized;
    Ok(CfCheck {
        slope: s,
        cf_bad: max_quotient <= CF_QUOTIENT_LIMIT,
        max_quotient,
        c_emp,
    })
}

/// `Σ_{k=1}^{terms} base^{-k!}`, a truncated Liouville-type number.
pub fn liouville_like(base: f64, terms: u32) -> f64 {
    let mut f = 1u64;
    let mut s = 0.0;
    for k in 1..=terms as u64 {
        f = f.saturating_mul(k);
        s += base.powf(-(f as f64));
    }
    s
}
