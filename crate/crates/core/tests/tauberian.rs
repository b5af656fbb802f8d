use num_complex::Complex64;
use oprenewal::grid::YGrid;
use oprenewal::induced::{assemble_rn, invariant_density, operator_tail_model};
use oprenewal::maps::MapSpec;
use oprenewal::quadrature::{gauss_legendre, integrate_points, QuadOptions};
use oprenewal::scalar_renewal::{renewal_sequence, ReturnDistribution};
use oprenewal::special_fn::gamma;
use oprenewal::tauberian::*;
use proptest::prelude::*;
use std::f64::consts::{E, PI};

const GAMMA_095: f64 = 1.0314533171290322265;

fn jump() -> f64 {
    (-1.0f64).exp()
}

fn g(x: f64) -> f64 {
    if x >= jump() {
        1.0
    } else {
        0.0
    }
}

/// `∫_0^1 (q − g) x^{-3/2} dx` with `x = s²`, by composite Gauss–Legendre split at the jump.
fn karamata_gap_oracle(q: &OneSidedPoly, panels: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(16);
    let sj = jump().sqrt();
    let mut total = 0.0;
    for (a0, b0) in [(0.0, sj), (sj, 1.0)] {
        for k in 0..panels {
            let a = a0 + (b0 - a0) * k as f64 / panels as f64;
            let b = a0 + (b0 - a0) * (k + 1) as f64 / panels as f64;
            for (t, w) in nodes.iter().zip(&weights) {
                let s = 0.5 * (a + b) + 0.5 * (b - a) * t;
                let x = s * s;
                total += 0.5 * (b - a) * w * 2.0 * (q.eval(x) - g(x)) / (s * s);
            }
        }
    }
    total
}

fn dt_beta_gap(q: impl Fn(f64) -> f64, beta: f64) -> f64 {
    let sj = 1.0;
    let mut pts = vec![0.0, sj];
    for k in 1..=200 {
        pts.push(sj + (60f64.powf(beta) - sj) * k as f64 / 200.0);
    }
    integrate_points(|s: f64| {
        let x = (-s.powf(1.0 / beta)).exp();
        (q(x) - g(x)).abs()
    }, &pts, &QuadOptions::with_tol(1e-13, 1e-11))
    .unwrap()
    .value
}

#[test]
fn fixed_quadratics() {
    let up = fixed_quadratic(Side::Upper);
    assert_eq!(up.coefficients(), vec![8.0, -7.0]);
    assert_eq!(up.eval(0.0), 0.0);
    assert!((up.eval(1.0) - 1.0).abs() < 1e-15);
    assert!(up.sign_check(10_000).passed());
    let lo = fixed_quadratic(Side::Lower);
    assert_eq!(lo.coefficients(), vec![-1.0, 2.0]);
    assert_eq!(lo.eval(0.0), 0.0);
    assert!(lo.sign_check(10_000).passed());
    assert!((up.gap - karamata_gap_oracle(&up, 400)).abs() < 1e-10);
}

#[test]
fn karamata_half() {
    let q = karamata_poly(0.5).unwrap();
    assert_eq!(q.side, Side::Upper);
    assert_eq!(q.eval(0.0), 0.0);
    assert!(q.sign_check(10_000).passed());
    let oracle = karamata_gap_oracle(&q, 400);
    assert!(oracle < 0.5 && oracle > 0.0, "{oracle}");
    assert!((oracle - q.gap).abs() < 1e-6, "{oracle} {}", q.gap);
    assert!(karamata_poly(0.0).is_err());
}

#[test]
fn freud_fits() {
    let fixed = fixed_quadratic(Side::Upper);
    let fixed_gap = dt_beta_gap(|x| fixed.eval(x), 0.5);
    let q2 = freud_one_sided(2, Side::Upper).unwrap();
    assert!(q2.gap <= fixed_gap + 1e-9, "{} {fixed_gap}", q2.gap);

    for side in [Side::Upper, Side::Lower] {
        let ms = [4usize, 8, 16, 32];
        let fits: Vec<OneSidedPoly> = ms.iter().map(|&m| freud_one_sided(m, side).unwrap()).collect();
        for (m, q) in ms.iter().zip(&fits) {
            assert_eq!(q.degree(), *m);
            assert_eq!(q.eval(0.0), 0.0);
            assert!(q.sign_check(10_000).passed(), "{side:?} m = {m}");
            assert!((q.gap - dt_beta_gap(|x| q.eval(x), 0.5)).abs() < 1e-6 * (1.0 + q.gap));
            assert!((*m as f64) * q.gap < 4.0);
        }
        assert!(fits.windows(2).all(|w| w[1].gap < w[0].gap));
        // log Σ|b_k| grows at most linearly in m.
        let logs: Vec<f64> = fits.iter().map(|q| q.coefficient_abs_sum().ln()).collect();
        let rate: Vec<f64> = logs.iter().zip(&ms).map(|(l, m)| l / *m as f64).collect();
        assert!(rate.iter().all(|r| *r < 3.0), "{rate:?}");
    }
}

#[test]
fn contour_b2_values() {
    let v = contour_b2(0.5).unwrap();
    let exact = 4.0 * PI.sqrt() / E;
    assert!((v.value.re - exact).abs() < 1e-6);
    assert!(v.value.im.abs() < 1e-8);
    let a = contour_b2(0.3).unwrap().value.re;
    let b = contour_b2(0.7).unwrap().value.re;
    let ratio = gamma(1.7).unwrap() / gamma(1.3).unwrap();
    assert!((a / b - ratio).abs() < 1e-6);
}

#[test]
fn contour_b1_values() {
    let v = contour_b1(0.5, 1.0, 1.0, 1e3).unwrap();
    assert!((v.value - PI.sqrt()).norm() < 1e3f64.powf(-0.5));
    let v = contour_b1(0.05, 1.0, 1.0, 1e3).unwrap();
    assert!((v.value - GAMMA_095).norm() < 1e-6);
    // Slow decay needs a path close to the imaginary axis.
    let b = 0.5;
    let dev = |r: f64| (contour_b1(b, 1e-8, 1.0, r).unwrap().value - gamma(1.0 - b).unwrap()).norm();
    let ratio = dev(1e2) / dev(1e4);
    let target = 10f64.powf(2.0 * b);
    assert!(ratio > target / 3.0 && ratio < target * 3.0, "{ratio}");
}

#[test]
fn contour_b3_values() {
    let (rho, gam) = (0.5, 0.25);
    for n in [100u64, 1000, 10_000] {
        let v = contour_b3(rho, gam, n).unwrap();
        let nf = n as f64;
        let main = 2.0 * PI / E * nf.powf(rho) / gamma(1.0 + rho).unwrap();
        let s = nf.powf(1.0 - gam);
        let bound = 2.0 * nf.powf(rho) * (s.powf(-rho - 1.0) + (rho + 1.0) * s.powf(-rho - 2.0));
        assert!((v.value - main).norm() <= bound, "n = {n}");
        assert!((v.value - main).norm() <= nf.powf(rho * gam));
    }
    let v = contour_b3(1.0, 0.25, 100).unwrap();
    let t = contour_b2_truncated(1.0, 100f64.powf(0.75)).unwrap();
    assert!((v.value - t.value * 100.0).norm() < 1e-11 * v.value.norm());
    assert!(contour_b3(0.5, 0.25, 5).is_err());
}

#[test]
fn kernel_examples() {
    let p = KernelParams::with_gamma(100, 0.25).unwrap().with_u_bound(1.0);
    let e = kernel_extract(|z| 1.0 / (1.0 - z), &p).unwrap();
    assert_eq!(e.last_index, 96);
    assert!((e.estimate - 97.0).abs() <= e.error_bar, "{e:?}");
    for n in [4usize, 10, 100] {
        let p = KernelParams::with_gamma(n.max(10), 0.25).unwrap();
        let e = kernel_extract(|_| Complex64::new(1.0, 0.0), &p).unwrap();
        assert!((e.estimate - 1.0).abs() < 0.1, "{e:?}");
    }
    assert!(KernelParams::with_gamma(100, 0.0).is_err());
    assert!(KernelParams::with_gamma(3, 0.25).is_err());
}

fn lsv_sequence() -> (ReturnDistribution, Vec<f64>) {
    let spec = MapSpec::lsv(4.0 / 3.0).unwrap();
    let op = assemble_rn(&spec, YGrid::new(128).unwrap(), 4000).unwrap();
    let h = invariant_density(&op).unwrap();
    let tm = operator_tail_model(&op, &h).unwrap();
    let dist = ReturnDistribution::from_tail(&tm.tail).unwrap();
    let u = renewal_sequence(&dist, 2000).u;
    (dist, u)
}

#[test]
fn kernel_identity_within_bound() {
    let (dist, lsv_u) = lsv_sequence();
    for n in [50usize, 100, 500] {
        let p = KernelParams::with_gamma(n, 0.25).unwrap().with_u_bound(1.0);
        let last = p.last_index();
        let cases: Vec<(f64, oprenewal::Result<KernelEstimate>)> = vec![
            ((last + 1) as f64, kernel_extract(|z| 1.0 / (1.0 - z), &p)),
            (1.0, kernel_extract(|_| Complex64::new(1.0, 0.0), &p)),
            (lsv_u[..=last].iter().sum(), kernel_extract(PowerSeries::renewal_generating(&dist), &p)),
        ];
        for (direct, e) in cases {
            let e = e.unwrap();
            assert!((e.estimate - direct).abs() <= e.error_bar, "n = {n}: {e:?} vs {direct}");
            assert!(e.imag.abs() <= e.error_bar);
        }
    }
}

#[test]
fn window_error_decay() {
    let mut consts = Vec::new();
    for n in [50usize, 100, 500, 2000] {
        let p = KernelParams::with_gamma(n, 0.25).unwrap();
        let a = p.alpha();
        let pp = p.p as i32;
        let lo = -(4 * n as i64);
        let errs = window_errors(&p, lo, 20 * n as i64);
        let c = errs
            .iter()
            .zip(lo..)
            .map(|(e, m)| e.abs() / (a.powi(2 * pp) / (a.powi(pp) * (m as f64).abs().powi(pp) + 1.0)))
            .fold(0.0, f64::max);
        consts.push(c);
    }
    let (lo, hi) = consts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), c| (a.min(*c), b.max(*c)));
    assert!(hi / lo < 10.0, "{consts:?}");
}

#[test]
fn boundary_factor_estimates() {
    for n in [10usize, 100, 1000, 100_000] {
        let r = (-1.0 / n as f64).exp();
        for k in 0..=2000 {
            let t = -PI / 2.0 + PI * k as f64 / 2000.0;
            let inv = 1.0 / (1.0 - Complex64::from_polar(r, t)).norm();
            assert!(inv <= 2.0 * (n as f64).min(1.0 / t.abs()));
        }
        for gam in [0.1, 0.25, 0.4] {
            let a = (n as f64).powf(-gam);
            let an = 1.0 - 2.0 * r * a.cos() + r * r;
            for k in 0..=500 {
                let t = -a + 2.0 * a * k as f64 / 500.0;
                let e = Complex64::from_polar(1.0, t);
                let at = 1.0 - 2.0 * e * a.cos() + e * e;
                assert!(at.norm() / an <= 4.0, "n {n} gamma {gam}");
            }
            assert!(1.0 / an <= 2.0 * (n as f64).powf(2.0 * gam));
        }
    }
}

#[test]
fn taub_binomial() {
    let gam = 0.5;
    let u = binomial_series(gam, 100_001);
    let ns = oprenewal::fit::log_grid(100, 100_000, 4).iter().map(|&n| n as usize).collect::<Vec<_>>();
    let path = [(1e-1, 0.5), (1e-2, 0.1), (1e-3, 0.01)];
    let r = taub_theorem_check(&u, &[(1.0, gam)], &ns, &path).unwrap();
    assert!(r.slope.unwrap() < gam / 2.0);
    for (_, _, res, trunc) in &r.hypothesis {
        assert!(*res < 1.0 + trunc);
    }
}

#[test]
fn taub_zero_sequence() {
    let u = vec![0.0; 1000];
    let r = taub_theorem_check(&u, &[], &[10, 100, 1000], &[(0.1, 0.1)]).unwrap();
    assert!(r.rows.iter().all(|x| x.residual == 0.0));
    assert!(r.hypothesis.iter().all(|h| h.2 == 0.0));
    assert!(r.slope.is_none());
}

#[test]
fn taub_two_terms() {
    let a = binomial_series(0.8, 100_001);
    let b = binomial_series(0.4, 100_001);
    let u: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let ns = oprenewal::fit::log_grid(100, 100_000, 4).iter().map(|&n| n as usize).collect::<Vec<_>>();
    let r = taub_theorem_check(&u, &[(1.0, 0.8), (1.0, 0.4)], &ns, &[(1e-2, 0.1)]).unwrap();
    let last = r.rows.last().unwrap();
    assert!(last.residual.abs() < 1e-3 * last.partial_sum);
    assert!(r.slope.unwrap() < 0.2);
    assert!(taub_theorem_check(&u, &[(1.0, 0.4), (1.0, 0.8)], &ns, &[]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn extraction_positivity(c in prop::collection::vec(0.0f64..1.0, 1..400), n in 20usize..200) {
        let series = PowerSeries::new(c);
        let p = KernelParams::with_gamma(n, 0.3).unwrap().with_u_bound(1.0);
        let e = kernel_extract(|z| series.eval(z), &p).unwrap();
        prop_assert!(e.estimate >= -e.error_bar);
    }

    #[test]
    fn upper_gap_monotone(m1 in 2usize..12, d in 1usize..12) {
        let a = freud_one_sided(m1, Side::Upper).unwrap();
        let b = freud_one_sided(m1 + d, Side::Upper).unwrap();
        prop_assert!(b.gap <= a.gap + 1e-9);
    }
}
