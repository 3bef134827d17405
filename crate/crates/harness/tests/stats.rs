#[path = "support/stats_oracle.rs"]
mod stats_oracle;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stats_oracle::{kendall_pairs, pearson_exact, pearson_raw};
use tabexec_harness::{kendall_tau, pearson, StatsError};

#[test]
fn analytic_values() {
    let a = [1.0f64, 2.0, 3.0, 4.0];
    let b = [1.0, 3.0, 2.0, 4.0];
    assert!((pearson(&[1.0f64, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-12);
    assert!((pearson(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(kendall_tau(&a, &a), Ok(1.0));
    assert_eq!(kendall_tau(&a, &[4.0, 3.0, 2.0, 1.0]), Ok(-1.0));
    // Five concordant pairs, one discordant: the (2,3) swap.
    assert!((kendall_pairs(&a, &b) - 2.0 / 3.0).abs() < 1e-12);
    assert!((kendall_tau(&a, &b).unwrap() - 2.0 / 3.0).abs() < 1e-12);
    assert!((pearson(&a, &b).unwrap() - 0.8).abs() < 1e-12);
    assert!((pearson_exact(&[1, 2, 3, 4], &[1, 3, 2, 4]) - 0.8).abs() < 1e-12);
}

#[test]
fn degenerate_inputs() {
    let deg = |r: Result<f64, StatsError>| matches!(r, Err(StatsError::DegenerateInput(_)));
    assert!(deg(pearson(&[1.0], &[2.0])));
    assert!(deg(pearson(&[1.0, 2.0], &[2.0])));
    assert!(deg(pearson(&[3.0, 3.0, 3.0], &[1.0, 2.0, 3.0])));
    assert!(deg(kendall_tau(&[1.0, 2.0, 3.0], &[5.0, 5.0, 5.0])));
    assert!(deg(kendall_tau(&[1.0, f64::NAN], &[1.0, 2.0])));
    assert!(kendall_tau(&[1.0, 1.0, 2.0], &[5.0, 6.0, 6.0]).is_ok());
}

#[test]
fn agrees_with_reference_implementations() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 1000 {
        let n = rng.gen_range(2..80);
        let spread = [3, 10, 1000][rng.gen_range(0..3)];
        let xi: Vec<i64> = (0..n).map(|_| rng.gen_range(-spread..=spread)).collect();
        let yi: Vec<i64> = (0..n).map(|_| rng.gen_range(-spread..=spread)).collect();
        let xs: Vec<f64> = xi.iter().map(|&v| v as f64).collect();
        let ys: Vec<f64> = yi.iter().map(|&v| v as f64).collect();
        let (Ok(r), Ok(t)) = (pearson(&xs, &ys), kendall_tau(&xs, &ys)) else { continue };
        assert!((r - pearson_exact(&xi, &yi)).abs() < 1e-12, "{xi:?} {yi:?}");
        assert!((r - pearson_raw(&xs, &ys)).abs() < 1e-12);
        assert!((t - kendall_pairs(&xs, &ys)).abs() < 1e-12, "{xi:?} {yi:?}");

        let fx: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let fy: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        assert!((pearson(&fx, &fy).unwrap() - pearson_raw(&fx, &fy)).abs() < 1e-12);
        assert!((kendall_tau(&fx, &fy).unwrap() - kendall_pairs(&fx, &fy)).abs() < 1e-12);
        checked += 1;
    }
}

#[test]
fn single_precision() {
    let r: f32 = pearson(&[1.0f32, 2.0, 4.0], &[2.0, 4.0, 8.0]).unwrap();
    assert!((r - 1.0).abs() < 1e-6);
    assert_eq!(kendall_tau(&[1.0f32, 2.0, 4.0], &[9.0, 4.0, 8.0]), Ok(-1.0 / 3.0));
}

proptest! {
    #[test]
    fn positive_affine_maps_change_nothing(
        pairs in proptest::collection::vec((-50i32..50, -50i32..50), 2..40),
        a in 0.01f64..100.0,
        b in -1000f64..1000.0,
    ) {
        let xs: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
        let ys: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
        let moved: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        if let Ok(r) = pearson(&xs, &ys) {
            prop_assert!((pearson(&moved, &ys).unwrap() - r).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&r));
        }
        if let Ok(t) = kendall_tau(&xs, &ys) {
            prop_assert_eq!(kendall_tau(&moved, &ys).unwrap(), t);
            prop_assert!((-1.0..=1.0).contains(&t));
        }
    }
}
