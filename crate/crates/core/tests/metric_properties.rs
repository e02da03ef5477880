use projdio::geometry::{delta, normalize_point, wedge_norm};
use proptest::prelude::*;

fn vector(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len).prop_filter("nonzero", |v| v.iter().any(|c| c.abs() > 1e-3))
}

fn triple() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
    (2usize..6).prop_flat_map(|n| (vector(n), vector(n), vector(n)))
}

proptest! {
    #[test]
    fn symmetric_and_bounded((a, b, _) in triple()) {
        let (x, y) = (normalize_point(&a).unwrap(), normalize_point(&b).unwrap());
        let d = delta(&x, &y).unwrap();
        prop_assert_eq!(d, delta(&y, &x).unwrap());
        prop_assert!((0.0..=1.0).contains(&d));
        prop_assert_eq!(delta(&x, &x).unwrap(), 0.0);
    }

    #[test]
    fn triangle_inequality((a, b, c) in triple()) {
        let x = normalize_point(&a).unwrap();
        let y = normalize_point(&b).unwrap();
        let z = normalize_point(&c).unwrap();
        let (xy, yz, xz) = (delta(&x, &y).unwrap(), delta(&y, &z).unwrap(), delta(&x, &z).unwrap());
        prop_assert!(xz <= xy + yz + 1e-12);
    }

    #[test]
    fn scaling_invariance((a, b, _) in triple(), s in prop_oneof![-8.0f64..-0.1, 0.1f64..8.0]) {
        let scaled: Vec<f64> = a.iter().map(|c| c * s).collect();
        let y = normalize_point(&b).unwrap();
        let d1 = delta(&normalize_point(&a).unwrap(), &y).unwrap();
        let d2 = delta(&normalize_point(&scaled).unwrap(), &y).unwrap();
        prop_assert!((d1 - d2).abs() < 1e-12);
    }

    #[test]
    fn lagrange_identity((a, b, _) in triple()) {
        let w = wedge_norm(&a, &b).unwrap();
        let dot: f64 = a.iter().zip(&b).map(|(p, q)| p * q).sum();
        let na: f64 = a.iter().map(|p| p * p).sum();
        let nb: f64 = b.iter().map(|p| p * p).sum();
        let scale = na * nb;
        prop_assert!((w * w - (na * nb - dot * dot)).abs() <= 1e-10 * scale.max(1.0));
    }
}
