//! Numerical tolerances shared by every module.

/// Coordinates below this magnitude (relative to a unit representative) are
/// treated as zero for sign normalization, and unit norms are checked to it.
pub const NORMALIZE: f64 = 1e-12;

/// Two projective points are the same when their sine distance is below this.
pub const EQUALITY: f64 = 1e-10;

/// Above this value of `|<x, y>|` the sine distance is taken from the explicit
/// 2x2 minors instead of `sqrt(1 - <x,y>^2)`.
pub const NEAR_PARALLEL_DOT: f64 = 0.999;

/// Largest admissible ball radius, `sin 1`.
pub const MAX_BALL_RADIUS: f64 = 0.841_470_984_807_896_5;

/// Relative margin below which the simplex bound is re-decided exactly.
pub const SIMPLEX_EXACT_MARGIN: f64 = 1e-9;

/// Absolute tolerance of the adaptive quadrature used for cap measures.
pub const QUADRATURE: f64 = 1e-10;

#[cfg(test)]
mod tests {
    #[test]
    fn max_radius_is_sin_one() {
        assert_eq!(super::MAX_BALL_RADIUS, 1f64.sin());
    }
}
