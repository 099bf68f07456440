use std::fs;

use lp2dt::engine::{dt_series, Cache, Engine, EngineConfig};
use lp2dt::{Error, Rational};

/// Coefficients of prod_{m>=1} (1 - q^m)^{-3}, one factor at a time.
fn cubed_partitions(len: usize) -> Vec<i64> {
    let mut a = vec![0i64; len];
    a[0] = 1;
    for _ in 0..3 {
        for m in 1..len {
            for n in m..len {
                a[n] += a[n - m];
            }
        }
    }
    a
}

fn engine_with(dir: Option<&std::path::Path>) -> Engine {
    Engine::new(EngineConfig {
        cache_dir: dir.map(|d| d.to_path_buf()),
        ..EngineConfig::default()
    })
}

#[test]
fn rank_one_matches_product_expansion() {
    let want = cubed_partitions(13);
    for l in [-2, 0, 5] {
        let rec = dt_series(1, l, 24).unwrap();
        for (d, v) in &rec.values {
            let w = if d % 2 == 0 { want[*d as usize / 2] } else { 0 };
            assert_eq!(*v, Rational::from_integer(w.into()), "D = {d}");
        }
    }
}

#[test]
fn rank_two_starts_at_three() {
    let rec = dt_series(2, 1, 3).unwrap();
    let got: Vec<_> = (0..=3).map(|d| rec.values[&d].clone()).collect();
    let want: Vec<_> = [0, 0, 0, 1].iter().map(|&x| Rational::from_integer(x.into())).collect();
    assert_eq!(got, want);
}

#[test]
fn depends_on_c1_modulo_rank() {
    for (r, l, order) in [(2, 1, 8), (3, 1, 6), (3, 2, 6)] {
        let a = engine_with(None).dt_series(r, l, order).unwrap();
        let b = engine_with(None).dt_series(r, l + r, order).unwrap();
        let c = engine_with(None).dt_series(r, l - r, order).unwrap();
        assert_eq!(a.values, b.values, "r = {r}, l = {l}");
        assert_eq!(a.values, c.values, "r = {r}, l = {l}");
    }
}

#[test]
fn coprime_values_are_integers() {
    for (r, l, order) in [(2, 1, 16), (3, 1, 16), (3, 2, 16)] {
        let rec = dt_series(r, l, order).unwrap();
        assert!(rec.is_integral(), "{rec:?}");
    }
}

#[test]
fn non_coprime_values_can_be_fractional() {
    let rec = dt_series(2, 0, 0).unwrap();
    assert_eq!(rec.values[&0], Rational::new(1.into(), 4.into()));
}

#[test]
fn duality_swaps_c1() {
    // the dual of a stable sheaf of class (r, l) has class (r, -l)
    let a = dt_series(3, 1, 16).unwrap();
    let b = dt_series(3, 2, 16).unwrap();
    assert_eq!(a.values, b.values);
}

#[test]
fn higher_order_extends_cached_values() {
    let dir = tempfile::tempdir().unwrap();
    let low = engine_with(Some(dir.path())).dt_series(2, 1, 3).unwrap();
    let high = engine_with(Some(dir.path())).dt_series(2, 1, 11).unwrap();
    for (d, v) in &low.values {
        assert_eq!(&high.values[d], v);
    }
    let (stored, _) = Cache::new(dir.path()).load(2, 1).unwrap().unwrap();
    assert_eq!(stored.order, 11);
    // a warm cache answers lower orders without recomputation
    let again = engine_with(Some(dir.path())).dt_series(2, 3, 5).unwrap();
    assert_eq!(again.values, high.truncated(5).values);
}

#[test]
fn cache_version_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    engine_with(Some(dir.path())).dt_series(2, 1, 3).unwrap();
    let path = dir.path().join("dt_r2_l1.json");
    let text = fs::read_to_string(&path).unwrap();
    let mut json: serde_json::Value = serde_json::from_str(&text).unwrap();
    json["version"] = "0.0.0".into();
    fs::write(&path, json.to_string()).unwrap();
    let err = engine_with(Some(dir.path())).dt_series(2, 1, 3).unwrap_err();
    assert!(matches!(err, Error::CacheVersion { .. }), "{err}");
}

#[test]
fn rank_limit_is_enforced() {
    let engine = Engine::new(EngineConfig {
        max_rank: 2,
        ..EngineConfig::default()
    });
    assert!(matches!(
        engine.dt_series(3, 1, 2),
        Err(Error::LimitExceeded { what: "rank", .. })
    ));
    assert!(matches!(engine.dt_series(0, 1, 2), Err(Error::InvalidInput(_))));
}

#[test]
fn single_worker_matches_default_pool() {
    let serial = Engine::new(EngineConfig {
        jobs: 1,
        ..EngineConfig::default()
    })
    .dt_series(3, 1, 10)
    .unwrap();
    assert_eq!(serial, dt_series(3, 1, 10).unwrap());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn shifting_c1_by_the_rank(r in 2i64..4, l in -3i64..4, k in -3i64..4) {
            let a = engine_with(None).dt_series(r, l, 8).unwrap();
            let b = engine_with(None).dt_series(r, l + k * r, 8).unwrap();
            prop_assert_eq!(a.values, b.values);
        }

        #[test]
        fn support_starts_at_zero_and_coprime_is_integral(r in 1i64..4, l in -3i64..4, order in 0u64..14) {
            let rec = dt_series(r, l, order).unwrap();
            prop_assert_eq!(rec.values.len() as u64, order + 1);
            if num_integer::gcd(r, l) == 1 {
                prop_assert!(rec.is_integral());
            }
        }
    }
}
