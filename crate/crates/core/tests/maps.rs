use approx::assert_relative_eq;
use oprenewal::grid::{GridObservable, YGrid};
use oprenewal::maps::*;
use proptest::prelude::*;

const CUBIC_ROOT: f64 = 0.341163901914009663684741869856;

#[test]
fn apply_examples() {
    let lsv2 = MapSpec::lsv(2.0).unwrap();
    assert_relative_eq!(apply_map(&lsv2, 0.25).unwrap(), 0.3125, max_relative = 1e-15);
    for s in [lsv2, MapSpec::lsv0(), MapSpec::lsv(1.0).unwrap()] {
        assert_eq!(apply_map(&s, 0.75).unwrap(), 0.5);
        assert!(apply_map(&s, 0.0).is_err());
        assert!(apply_map(&s, 1.0).is_err());
    }
    let l0 = MapSpec::lsv0();
    assert!((apply_map(&l0, 0.5f64.next_down()).unwrap() - 0.533833820809153172973).abs() < 1e-12);
}

#[test]
fn inverse_examples() {
    let lsv2 = MapSpec::lsv(2.0).unwrap();
    assert_relative_eq!(left_inverse(&lsv2, 0.3125).unwrap(), 0.25, max_relative = 1e-14);
    assert_relative_eq!(left_inverse(&lsv2, 0.5).unwrap(), CUBIC_ROOT, max_relative = 1e-14);
    let lsv1 = MapSpec::lsv(1.0).unwrap();
    assert_relative_eq!(left_inverse(&lsv1, 0.5).unwrap(), (5f64.sqrt() - 1.0) / 4.0, max_relative = 1e-14);
    assert!(left_inverse(&lsv2, 1.5).is_err());
}

#[test]
fn tail_sequence_examples() {
    let lsv2 = MapSpec::lsv(2.0).unwrap();
    let t = tail_sequence(&lsv2, 2).unwrap();
    assert_eq!(t.x(1), 0.5);
    assert_relative_eq!(t.x(2), CUBIC_ROOT, max_relative = 1e-14);
    assert_eq!(t.y(1), 0.75);
    let t = tail_sequence(&lsv2, 10_000).unwrap();
    let r = t.x(10_000) / (0.5 * 0.5f64.sqrt() * 1e4f64.powf(-0.5));
    assert!((0.99..=1.01).contains(&r), "{r}");
    assert!(tail_sequence(&lsv2, 0).is_err());
}

#[test]
fn tail_sequence_monotone() {
    for s in [MapSpec::lsv(2.0).unwrap(), MapSpec::lsv(1.5).unwrap(), MapSpec::lsv0()] {
        let t = tail_sequence(&s, 5000).unwrap();
        assert!(t.xs().windows(2).all(|w| w[1] < w[0]));
        assert!((1..5000).all(|n| t.y(n + 1) < t.y(n) && t.y(n + 1) > 0.5));
    }
}

#[test]
fn lsv_increments_bounded() {
    for alpha in [1.25, 2.0, 4.0] {
        let s = MapSpec::lsv(alpha).unwrap();
        let b = s.beta();
        let t = tail_sequence(&s, 10_001).unwrap();
        let vals: Vec<f64> = (100..=10_000).map(|n| (t.x(n) - t.x(n + 1)) * (n as f64).powf(b + 1.0)).collect();
        let (lo, hi) = vals.iter().fold((f64::INFINITY, 0.0f64), |(a, c), v| (a.min(*v), c.max(*v)));
        // Limit b^{b+1}/2 of the increment law.
        let lim = 0.5 * b.powf(b + 1.0);
        assert!(hi < 1.1 * lim && lo > 0.9 * lim, "alpha {alpha}: [{lo}, {hi}] vs {lim}");
    }
}

#[test]
fn lsv0_log_law_bounded() {
    let t = tail_sequence(&MapSpec::lsv0(), 100_000).unwrap();
    let dev = |n: usize| ((1.0 / t.x(n)).exp() - n as f64).abs() / (n as f64).ln();
    let decades: Vec<f64> = [(100, 1000), (1000, 10_000), (10_000, 100_000)]
        .iter()
        .map(|&(a, b)| (a..=b).map(dev).fold(0.0, f64::max))
        .collect();
    assert!(decades.iter().all(|d| *d < 10.0), "{decades:?}");
    assert!(decades[2] <= decades[0] * 1.05, "{decades:?}");
}

#[test]
fn return_time_tail_examples() {
    let g = YGrid::new(64).unwrap();
    let t = tail_sequence(&MapSpec::lsv(2.0).unwrap(), 10).unwrap();
    let h = GridObservable::constant(g, 2.0);
    assert!((return_time_tail(&t, &h, 0).unwrap() - 1.0).abs() < 1e-15);
    // 2(y_1 − 1/2) with y_1 = 3/4.
    assert!((return_time_tail(&t, &h, 1).unwrap() - 0.5).abs() < 1e-15);
    let tails: Vec<f64> = (0..=10).map(|n| return_time_tail(&t, &h, n).unwrap()).collect();
    assert!(tails.windows(2).all(|w| w[1] <= w[0]));
    assert!(return_time_tail(&t, &h, 11).is_err());
}

#[test]
fn level_sets() {
    let t = tail_sequence(&MapSpec::lsv(2.0).unwrap(), 20).unwrap();
    assert_eq!(x_level_sets(&t, 0).unwrap(), vec![(0.5, 1.0)]);
    let l = x_level_sets(&t, 1).unwrap();
    assert_relative_eq!(l[1].0, CUBIC_ROOT, max_relative = 1e-14);
    assert_eq!(l[1].1, 0.5);
    let l = x_level_sets(&t, 15).unwrap();
    for w in l.windows(2) {
        assert_eq!(w[1].1, w[0].0);
        assert!(w[1].0 < w[1].1);
    }
    assert_eq!(l.last().unwrap().0, t.x(16));
    assert!(x_level_sets(&t, 20).is_err());
}

proptest! {
    #[test]
    fn inverse_of_apply(alpha in 1.0f64..8.0, y in 1e-6f64..0.4999) {
        let s = MapSpec::lsv(alpha).unwrap();
        let x = apply_map(&s, y).unwrap();
        prop_assert!((left_inverse(&s, x).unwrap() - y).abs() <= 1e-12 * y.max(1e-3));
    }

    #[test]
    fn inverse_of_apply_lsv0(y in 1e-3f64..0.4999) {
        let s = MapSpec::lsv0();
        let x = apply_map(&s, y).unwrap();
        prop_assert!((left_inverse(&s, x).unwrap() - y).abs() <= 1e-12);
    }

    #[test]
    fn inverse_is_monotone(alpha in 1.0f64..8.0, a in 1e-6f64..0.5, b in 1e-6f64..0.5) {
        let s = MapSpec::lsv(alpha).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(left_inverse(&s, lo).unwrap() <= left_inverse(&s, hi).unwrap());
    }

    #[test]
    fn tail_of_decreasing_density(m in 4usize..64, k in 1usize..40) {
        let g = YGrid::new(m).unwrap();
        let h = GridObservable::from_fn(g, |y| 3.0 - 2.0 * y);
        let t = tail_sequence(&MapSpec::lsv(2.0).unwrap(), 40).unwrap();
        let a = return_time_tail(&t, &h, k - 1).unwrap();
        let b = return_time_tail(&t, &h, k).unwrap();
        prop_assert!(b <= a && b >= 0.0);
    }
}
