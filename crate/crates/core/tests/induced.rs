use num_complex::Complex64;
use oprenewal::grid::{GridObservable, YGrid};
use oprenewal::induced::*;
use oprenewal::linalg::{matvec_c, Lu};
use oprenewal::maps::{return_time_tail, x_level_sets, MapSpec, TailSequence};
use oprenewal::special_fn::gamma;
use std::sync::Arc;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn lsv2(m: usize, n: usize) -> (InducedOperator, GridObservable) {
    let spec = MapSpec::lsv(2.0).unwrap();
    let op = assemble_rn(&spec, YGrid::new(m).unwrap(), n).unwrap();
    let h = invariant_density(&op).unwrap();
    (op, h)
}

#[test]
fn doubling_has_single_branch() {
    let g = YGrid::new(32).unwrap();
    let op = InducedOperator::doubling(g, 5).unwrap();
    assert!(op.branch(1).len() > 0);
    for n in 2..=5 {
        assert!(op.branch(n).is_empty());
    }
    let h = invariant_density(&op).unwrap();
    for v in &h.values {
        assert!((v - 2.0).abs() < 1e-12);
    }
    let v = GridObservable::constant(g, 1.0);
    let acc = renewal_tn(&op, &h, &v, 5).unwrap();
    for n in 0..=5 {
        assert!(acc.tn(n).iter().all(|x| (x - 1.0).abs() < 1e-12));
    }
}

#[test]
fn mass_conservation() {
    let (op, _) = lsv2(64, 400);
    let g = op.grid();
    let w = g.width();
    let ones = vec![1.0; g.cells()];
    let mut total = 0.0;
    for n in 1..=op.n_trunc() {
        total += op.apply_rn(n, &ones).iter().sum::<f64>() * w;
    }
    let mass = 0.5;
    assert!((total - mass * (1.0 - op.mass_deficit())).abs() < 1e-12, "{total}");
    let r1 = op.r_of_z(c(1.0));
    let col: f64 = (0..g.cells()).map(|i| r1.iter().skip(i).step_by(g.cells()).map(|x| x.re).sum::<f64>()).sum();
    assert!((col * w - mass * (1.0 - op.mass_deficit())).abs() < 1e-12);
    let r0 = op.r_of_z(c(0.0));
    assert!(r0.iter().all(|x| x.norm() == 0.0));
}

#[test]
fn mass_deficit_matches_tail() {
    let spec = MapSpec::lsv(2.0).unwrap();
    let op = assemble_rn(&spec, YGrid::new(1024).unwrap(), 10_000).unwrap();
    let d = op.mass_deficit();
    assert!(d > 1e-3 && d < 1e-1, "{d}");
    let h = invariant_density(&op).unwrap();
    let tail = op.tail_sequence().unwrap();
    let mu = return_time_tail(tail, &h, 10_000).unwrap();
    // Lebesgue and μ tails differ by the density near 1/2.
    let ratio = mu / d;
    assert!((ratio - h.values[0] / 2.0).abs() < 0.01 * ratio, "{ratio} {}", h.values[0]);
}

#[test]
fn invariant_density_is_decreasing_fixed_point() {
    let (op, h) = lsv2(128, 2000);
    assert!((h.integral() - 1.0).abs() < 1e-12);
    assert!(h.values.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let a = op.dense_closed_real();
    let m = 128;
    let mut rh = vec![0.0; m];
    oprenewal::linalg::matvec(&a, &h.values, &mut rh);
    let res: f64 = rh.iter().zip(&h.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * h.grid.width();
    assert!(res <= 1e-10, "{res}");
}

#[test]
fn positivity() {
    let (op, h) = lsv2(64, 400);
    for n in [1, 2, 7, 100, 400] {
        for p in op.branch(n) {
            assert!(op.piece_values(p).iter().all(|v| *v >= 0.0));
        }
    }
    let v = GridObservable::from_fn(op.grid(), |y| (20.0 * y).sin().max(0.0));
    let acc = renewal_tn(&op, &h, &v, 300).unwrap();
    for n in 0..=300 {
        assert!(acc.tn(n).iter().all(|x| *x >= 0.0));
    }
}

#[test]
fn renewal_zero_steps_and_zero_observable() {
    let (op, h) = lsv2(32, 200);
    let v = GridObservable::from_fn(op.grid(), |y| y * y);
    let acc = renewal_tn(&op, &h, &v, 0).unwrap();
    for (a, b) in acc.partial_sum(0).iter().zip(&v.values) {
        assert!((a - b).abs() < 1e-14);
    }
    let z = GridObservable::constant(op.grid(), 0.0);
    let acc = renewal_tn(&op, &h, &z, 150).unwrap();
    let r = dual_ergodic_report(&op, &h, &z, &acc, &[10, 100, 150], ExpansionTerms::Full).unwrap();
    for row in &r.rows {
        assert_eq!(row.sup_dev, 0.0);
        assert_eq!(row.residual_max, 0.0);
        assert_eq!(row.residual_min, 0.0);
    }
    assert!(renewal_tn(&op, &h, &v, 201).is_err());
}

#[test]
fn renewal_matches_full_map_iteration() {
    let spec = MapSpec::lsv(2.0).unwrap();
    let g = YGrid::new(64).unwrap();
    let op = assemble_rn(&spec, g, 400).unwrap();
    let rho = GridObservable::from_fn(g, |y| 1.0 + y * y);
    let w = renewal_density(&op, &[rho.values.clone()], 25).unwrap();
    let mesh = Arc::new(Mesh::ladder(&spec, g, 30).unwrap());
    let fm = FullMapOperator::new(&spec, mesh.clone()).unwrap();
    let mut cur = MeshObservable::from_y(mesh, &rho).unwrap();
    for n in 1..=20 {
        cur = fm.apply(&cur, f64::INFINITY).unwrap();
        let y = cur.to_y(g);
        let d = y.values.iter().zip(&w[n * 64..(n + 1) * 64]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(d < 1e-8, "n = {n}: {d:e}");
    }
}

#[test]
fn full_map_examples() {
    let spec = MapSpec::lsv(2.0).unwrap();
    let mesh = Arc::new(Mesh::geometric(1e-3, 0.8, 256).unwrap());
    let mut ones = MeshObservable::zeros(mesh.clone());
    ones.values.iter_mut().for_each(|v| *v = 1.0);
    let l1 = full_map_l(&spec, mesh.clone(), &ones, 1.0).unwrap();
    // Cell containing 0.75 (an interior cell of the uniform part).
    let e = mesh.edges();
    let i = e.partition_point(|&x| x <= 0.75) - 1;
    let (a, b) = (e[i], e[i + 1]);
    let exact = oprenewal::quadrature::kronrod15(|x| 1.0 / spec.left_derivative(spec.left_inverse(x).unwrap()) + 0.5, a, b) / (b - a);
    assert!((l1.values[i] - exact).abs() < 1e-9, "{} {exact}", l1.values[i]);
    let at = 1.0 / spec.left_derivative(spec.left_inverse(0.75).unwrap()) + 0.5;
    assert!((l1.values[i] - at).abs() < 1e-2);

    let mut v = MeshObservable::zeros(mesh.clone());
    for (k, x) in v.values.iter_mut().enumerate() {
        let m = 0.5 * (e[k] + e[k + 1]);
        *x = if m > 0.1 && !(0.49..0.51).contains(&m) { (7.0 * m).cos().abs() } else { 0.0 };
    }
    let lv = full_map_l(&spec, mesh, &v, 1e-12).unwrap();
    assert!((lv.integral() - v.integral()).abs() < 1e-12);
}

#[test]
fn extended_density_is_invariant() {
    let spec = MapSpec::lsv(2.0).unwrap();
    let g = YGrid::new(64).unwrap();
    let op = assemble_rn(&spec, g, 400).unwrap();
    let h = invariant_density(&op).unwrap();
    let ext = extended_density(&op, &h, 30).unwrap();
    let fm = FullMapOperator::new(&spec, ext.mesh.clone()).unwrap();
    let lh = fm.apply(&ext, f64::INFINITY).unwrap();
    let floor = ext.mesh.floor();
    let e = ext.mesh.edges();
    let mut dev: f64 = 0.0;
    for i in 0..ext.mesh.cells() {
        if e[i] >= 1.5 * floor {
            dev = dev.max((lh.values[i] - ext.values[i]).abs() / ext.values[i]);
        }
    }
    assert!(dev < 1e-6, "{dev:e}");
}

#[test]
fn spread_push_examples() {
    let spec = MapSpec::lsv(2.0).unwrap();
    let g = YGrid::new(64).unwrap();
    let tail = TailSequence::new(spec, 10).unwrap();
    let lv = x_level_sets(&tail, 3).unwrap();

    let out = spread_push(&spec, g, |y| if y >= 0.5 { y } else { 0.0 }, (0.5, 1.0), 0).unwrap();
    assert_eq!(out.len(), 1);
    let v0 = GridObservable::from_fn(g, |y| y);
    for (a, b) in out[0].values.iter().zip(&v0.values) {
        assert!((a - b).abs() < 1e-14);
    }

    // v = 1_{X_1}: one left step lands in (x_1, 1] ∩ Y-side image.
    let (lo, hi) = lv[1];
    let ind = move |x: f64| if x > lo && x <= hi { 1.0 } else { 0.0 };
    let out = spread_push(&spec, g, ind, (lo, hi), 2).unwrap();
    assert!(out[0].values.iter().all(|v| *v == 0.0));
    let sup = out[1].support().unwrap();
    assert!(sup.0 >= 0.5 - 1e-15 && sup.1 <= 1.0 + 1e-15);
    assert!((out[1].integral() - (hi - lo)).abs() < 1e-10);
    assert!(out[2].values.iter().all(|v| *v == 0.0));

    // Mass is preserved across the spread.
    let f = |x: f64| if x > 0.05 { 1.0 + x } else { 0.0 };
    let k = (1..tail.len()).find(|&k| tail.x(k + 1) <= 0.05).unwrap_or(9);
    let tail = TailSequence::new(spec, 200).unwrap();
    let k = (1..200).find(|&k| tail.x(k + 1) <= 0.05).unwrap().max(k);
    let out = spread_push(&spec, g, f, (0.05, 1.0), k).unwrap();
    let total: f64 = out.iter().map(|o| o.integral()).sum();
    let exact = oprenewal::quadrature::integrate(f, 0.05, 1.0, &oprenewal::quadrature::QuadOptions::with_tol(1e-14, 1e-13)).unwrap().value;
    assert!((total - exact).abs() < 1e-8, "{total} {exact}");

    assert!(spread_push(&spec, g, f, (0.0, 1.0), 3).is_err());
}

fn series(op: &InducedOperator, rho: &[f64], k: usize, z: Complex64) -> Vec<Complex64> {
    let m = op.grid().cells();
    let w = renewal_density(op, &[rho.to_vec()], k).unwrap();
    let mut out = vec![c(0.0); m];
    let mut zp = c(1.0);
    for n in 0..=k {
        for (o, x) in out.iter_mut().zip(&w[n * m..(n + 1) * m]) {
            *o += zp * x;
        }
        zp *= z;
    }
    out
}

#[test]
fn renewal_identity_on_the_disk() {
    let (op, _) = lsv2(64, 600);
    let m = 64;
    let w = op.grid().width();
    let rho = GridObservable::from_fn(op.grid(), |y| 2.0 - y).values;
    let k = 600;
    let l1: f64 = rho.iter().sum::<f64>() * w;
    for z in [c(0.9), Complex64::from_polar(0.9, std::f64::consts::PI / 7.0)] {
        let t = series(&op, &rho, k, z);
        let r = op.r_of_z(z);
        let mut rt = vec![c(0.0); m];
        matvec_c(&r, &t, &mut rt);
        let res: f64 = (0..m).map(|i| (t[i] - rt[i] - rho[i]).norm()).sum::<f64>() * w;
        // Each T_n ρ has mass at most that of ρ.
        let bound = l1 * (k as f64 + 1.0) * z.norm().powi(k as i32 + 1);
        assert!(res <= bound + 1e-13 * l1, "{res:e} {bound:e}");
    }
}

#[test]
fn spectral_data_at_one() {
    let (op, h) = lsv2(64, 2000);
    let sd = spectral_data(&op, &h, c(1.0)).unwrap();
    assert!((sd.lambda - 1.0).norm() < 1e-9, "{}", sd.lambda);
    assert!(sd.v.iter().all(|x| (x - 1.0).norm() < 1e-8));
    let f: Vec<Complex64> = (0..64).map(|i| c((i as f64 * 0.3).sin() + 1.5)).collect();
    let mean = sd.mu_integral(&f);
    let p = sd.project(&f);
    assert!(p.iter().all(|x| (x - mean).norm() < 1e-9));
    let pp = sd.project(&p);
    assert!(pp.iter().zip(&p).all(|(a, b)| (a - b).norm() < 1e-10));

    let r = op.r_of_z(c((-0.01f64).exp()));
    let _ = r;
    let sd = spectral_data(&op, &h, c((-0.01f64).exp())).unwrap();
    assert!(sd.lambda.re > 0.0 && sd.lambda.re < 1.0 && sd.lambda.im.abs() < 1e-12);
    assert!(sd.residual < 1e-9);
    let pp = sd.project(&sd.project(&f));
    let p = sd.project(&f);
    assert!(pp.iter().zip(&p).all(|(a, b)| (a - b).norm() < 1e-9 * (1.0 + b.norm())));
}

#[test]
fn first_order_eigenvalue_law() {
    let (op, h) = lsv2(64, 100_000);
    let c0 = MapSpec::lsv(2.0).unwrap().tail_constant(h.values[0]);
    let u: f64 = 1e-3;
    let sd = spectral_data_with(&op, &h, c((-u).exp()), &SpectralOptions { min_gap: 0.0, ..Default::default() }).unwrap();
    let pred = c0 * gamma(0.5).unwrap() * u.sqrt();
    let rel = ((1.0 - sd.lambda.re) - pred).abs() / pred;
    assert!(rel < 0.05, "{rel}");

    let rows = first_order_law(&op, &h, &[1e-1, 1e-2, 1e-3, 1e-4]).unwrap();
    let devs: Vec<f64> = rows.iter().map(|(_, r)| (r - 1.0).abs()).collect();
    assert!(devs.windows(2).all(|w| w[1] < w[0]), "{devs:?}");
}

#[test]
fn resolvent_decomposition() {
    let (op, h) = lsv2(64, 800);
    let m = 64;
    let w = op.grid().width();
    let opts = SpectralOptions { closed: false, ..Default::default() };
    let f = GridObservable::from_fn(op.grid(), |y| 1.0 + (9.0 * y).cos());
    for z in [c(0.95), Complex64::from_polar(0.95, 0.3)] {
        let sd = spectral_data_with(&op, &h, z, &opts).unwrap();
        let fc: Vec<Complex64> = f.values.iter().map(|x| c(*x)).collect();
        let p = sd.project(&fc);
        let q: Vec<Complex64> = fc.iter().zip(&p).map(|(a, b)| a - b).collect();
        let mut a = op.r_of_z(z);
        for k in 0..m {
            for i in 0..m {
                a[k * m + i] *= -h.values[i] / h.values[k];
            }
            a[k * m + k] += 1.0;
        }
        let lu = Lu::new(a, m).unwrap();
        let rq = lu.solve(&q);
        let pred: Vec<Complex64> = p.iter().zip(&rq).map(|(x, y)| x / (1.0 - sd.lambda) + y).collect();
        // Truncated series in function semantics.
        let rho: Vec<f64> = f.values.iter().zip(&h.values).map(|(a, b)| a * b).collect();
        let t: Vec<Complex64> = series(&op, &rho, 800, z).iter().zip(&h.values).map(|(x, hh)| x / hh).collect();
        let dev = t.iter().zip(&pred).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let scale = pred.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let trunc = f.sup_norm() * 800.0 * z.norm().powi(801) / w;
        assert!(dev <= 1e-9 * scale + trunc, "{dev:e} {scale:e}");
    }
}

#[test]
fn resolvent_scaling_improves_towards_one() {
    let (op, h) = lsv2(64, 20_000);
    let path = [(1e-1, 1e-1), (1e-2, 1e-2), (1e-3, 1e-3)];
    let p = resolvent_norm_proxy(&op, &h, &path).unwrap();
    assert!(p.windows(2).all(|w| w[1] < w[0]), "{p:?}");
}

#[test]
fn tail_model_and_first_order_report() {
    let (op, h) = lsv2(128, 4000);
    let tm = operator_tail_model(&op, &h).unwrap();
    assert!((tm.tail[0] - 1.0).abs() < 1e-12);
    assert!(tm.tail.windows(2).all(|w| w[1] <= w[0]));
    let r = 1000usize;
    let pred = tm.c * (r as f64).powf(-0.5);
    assert!((tm.tail[r] - pred).abs() < 0.05 * pred);
}

#[test]
fn lsv0_density_lives_below_left_branch_image() {
    // The left branch maps [0, 1/2] onto [0, T(1/2)], so no mass reaches
    // (T(1/2), 1] except by halving, and the invariant density vanishes there.
    let spec = MapSpec::lsv0();
    let g = YGrid::new(128).unwrap();
    let op = assemble_rn(&spec, g, 10_000).unwrap();
    let h = invariant_density(&op).unwrap();
    let top = 0.5 * (1.0 + 0.5 * (-2.0f64).exp());
    let peak = h.values.iter().cloned().fold(0.0, f64::max);
    for (i, x) in h.values.iter().enumerate() {
        if g.edge(i) > top + g.width() {
            assert!(*x < 1e-6 * peak, "cell {i}: {x}");
        }
    }
    // From the support every excursion starts below 2 T(1/2) − 1, so returns
    // before e^{1/(2T(1/2)−1)} ≈ 2.6e6 carry almost no μ-mass.
    let tm = operator_tail_model(&op, &h).unwrap();
    assert!(tm.tail[10_000] > 0.99, "{}", tm.tail[10_000]);
    let v = GridObservable::constant(g, 1.0);
    let acc = renewal_tn(&op, &h, &v, 10_000).unwrap();
    let s = GridObservable::new(g, acc.partial_sum(10_000).to_vec()).unwrap().integral_against(&h);
    assert!((s - 1.0).abs() < 0.02, "{s}");
}
