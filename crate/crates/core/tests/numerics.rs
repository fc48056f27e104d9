use hasym_core::asympt::{
    eval_G_asympt, eval_Ginv_asympt, fit_c_for_data, remainder_study, AsymptoticModel,
};
use hasym_core::numerics::{
    compute_G, integrate_h, integrate_h_with_stops, invert_G, quadrature::integrate_adaptive, GProblem,
    InitialData, SolverConfig,
};
use hasym_core::Dd;

fn decades(lo: i32, hi: i32) -> Vec<Dd> {
    (lo..=hi).map(|e| Dd::from(10f64.powi(e))).collect()
}

fn unit_problem() -> (InitialData, GProblem, SolverConfig) {
    let cfg = SolverConfig::verification();
    let data = InitialData::new(0.0, 1.0, 1.0).unwrap();
    let prob = GProblem::from_initial_data(&data, &cfg).unwrap();
    (data, prob, cfg)
}

#[test]
fn g_squared_integral_identity() {
    let (_, prob, _) = unit_problem();
    for z in [Dd::from(4.0), Dd::from(1.0), Dd::from(0.01)] {
        // s = u^2 removes the endpoint singularity
        let integral = integrate_adaptive(
            |u| Ok((prob.g(u * u)? - 1.0) * 2.0),
            Dd::ZERO,
            z.sqrt(),
            0.0,
            1e-30,
        )
        .unwrap();
        let rhs = integral * 2.0 / (z * z.sqrt());
        let lhs = prob.g(z).unwrap().sqr();
        assert!((lhs - rhs).abs().to_f64() < 1e-22, "z = {}", z.to_f64());
    }
}

#[test]
fn g_of_h_reproduces_time() {
    let (data, prob, cfg) = unit_problem();
    let traj = integrate_h(&data, Dd::from(1e3), &cfg).unwrap();
    for t in [0.5, 1.0, 10.0, 100.0, 1e3] {
        let t = Dd::from(t);
        let h4 = traj.h(t).unwrap().powi(4);
        let g = compute_G(h4, &prob, &cfg).unwrap();
        assert!(((g - t * 4.0) / (t * 4.0)).abs().to_f64() < 1e-22, "t = {}", t.to_f64());
    }
}

#[test]
fn h_cubed_h_prime_is_g() {
    let (data, prob, cfg) = unit_problem();
    let traj = integrate_h(&data, Dd::from(1e3), &cfg).unwrap();
    for t in [0.25, 2.0, 10.0, 1e3] {
        let (h, hp) = traj.eval(Dd::from(t)).unwrap();
        let lhs = h.powi(3) * hp;
        let rhs = prob.g(Dd::from(4.0) / h.powi(4)).unwrap();
        assert!((lhs - rhs).abs().to_f64() < 1e-22, "t = {t}");
    }
}

#[test]
fn inverse_expansion_tracks_numeric_inverse() {
    let (_, prob, cfg) = unit_problem();
    let model = AsymptoticModel::new(prob.c(), 1).unwrap();
    let ratios: Vec<f64> = decades(3, 6)
        .into_iter()
        .map(|x| {
            let y = invert_G(x, &prob, &cfg).unwrap();
            let e = eval_Ginv_asympt(&model, 1, x).unwrap();
            ((y - e).abs() / (x.ln() / x).sqr()).to_f64()
        })
        .collect();
    let k = ratios.iter().copied().fold(0.0, f64::max);
    assert!(k < 10.0 * ratios[0], "{ratios:?}");
}

#[test]
fn g_expansion_error_decreases() {
    let (_, prob, cfg) = unit_problem();
    let errs: Vec<f64> = decades(2, 6)
        .into_iter()
        .map(|x| {
            let g = compute_G(x, &prob, &cfg).unwrap();
            (g - eval_G_asympt(prob.c(), 3, x).unwrap()).abs().to_f64()
        })
        .collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
}

#[test]
fn remainders_bounded_for_several_initial_data() {
    let cfg = SolverConfig::verification();
    let grid = decades(2, 6);
    for (h0, h1) in [(1.0, 1.0), (2.0, 0.5), (1.0, -1.0)] {
        let data = InitialData::new(0.0, h0, h1).unwrap();
        let c = GProblem::from_initial_data(&data, &cfg).unwrap().c();
        let traj = integrate_h_with_stops(&data, Dd::from(1e6), &grid, &cfg).unwrap();
        let model = AsymptoticModel::new(c, 3).unwrap();
        let rep = remainder_study(&model, &traj, 3, &grid, 10.0).unwrap();
        assert!(rep.passed, "({h0}, {h1}): {:?}", rep.summary);
        assert!(rep.entries.iter().all(|e| e.ratio.is_finite() && e.ratio > 0.0));
    }
}

#[test]
fn fit_route_obeys_shift_law() {
    let (data, prob, cfg) = unit_problem();
    let traj = integrate_h(&data, Dd::from(3.0), &cfg).unwrap();
    let s = 3.0;
    let (h, hp) = traj.eval(Dd::from(s)).unwrap();
    let shifted = InitialData::from_dd(Dd::ZERO, h, hp).unwrap();
    let (fit, report) = fit_c_for_data(&shifted, &cfg).unwrap();
    assert!((fit - (prob.c() - 4.0 * s)).abs().to_f64() < 1e-12, "{report:?}");
}

#[test]
fn dual_route_with_decreasing_start() {
    let cfg = SolverConfig::verification();
    let data = InitialData::new(0.0, 1.0, -1.0).unwrap();
    let prob = GProblem::from_initial_data(&data, &cfg).unwrap();
    assert!(prob.time_origin() > Dd::ZERO);
    let (fit, _) = fit_c_for_data(&data, &cfg).unwrap();
    assert!((fit - prob.c()).abs().to_f64() < 1e-12);
}

#[test]
fn nonzero_start_time_keeps_absolute_clock() {
    let cfg = SolverConfig::verification();
    let base = GProblem::from_initial_data(&InitialData::new(0.0, 1.0, 1.0).unwrap(), &cfg)
        .unwrap()
        .c();
    // the same orbit started at t0 = 2 is the original delayed by 2
    let late = GProblem::from_initial_data(&InitialData::new(2.0, 1.0, 1.0).unwrap(), &cfg)
        .unwrap()
        .c();
    assert!((late - (base + 8.0)).abs().to_f64() < 1e-20);
}

#[test]
fn trajectory_is_deterministic() {
    let cfg = SolverConfig::default();
    let data = InitialData::new(0.0, 1.0, 1.0).unwrap();
    let a = integrate_h(&data, Dd::from(1e3), &cfg).unwrap();
    let b = integrate_h(&data, Dd::from(1e3), &cfg).unwrap();
    let mut wa = Vec::new();
    let mut wb = Vec::new();
    a.write_csv(&mut wa).unwrap();
    b.write_csv(&mut wb).unwrap();
    assert_eq!(wa, wb);
}
