//! Acceptance gate. Each criterion prints one PASS/FAIL line; the test fails
//! if any criterion fails or exceeds its time budget.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use hasym_core::asympt::{fit_c_for_data, lambert_compare, remainder_study, AsymptoticModel};
use hasym_core::exact::{BivariatePoly, Rational};
use hasym_core::numerics::{
    compute_G, integrate_h, integrate_h_with_stops, invert_G, GProblem, InitialData, SolverConfig,
};
use hasym_core::recursions::{gen_alpha, gen_beta, gen_lambert_p, gen_p, gen_q, ode_residual_order};
use hasym_core::Dd;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, u64);

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn poly(terms: &[(u32, u32, i64, i64)]) -> BivariatePoly {
    BivariatePoly::from_terms(terms.iter().map(|&(c, z, n, d)| (c, z, r(n, d))))
}

fn decades(lo: i32, hi: i32) -> Vec<Dd> {
    (lo..=hi).map(|e| Dd::from(10f64.powi(e))).collect()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn criterion_1() -> Outcome {
    let beta = gen_beta(4).values;
    let want_beta = [r(1, 1), r(-3, 4), r(-21, 16), r(-165, 32), r(-7245, 256)];
    ensure(beta == want_beta, format!("beta = {beta:?}"))?;
    let alpha = gen_alpha(3).values;
    let want_alpha = [r(1, 1), r(3, 4), r(15, 8), r(483, 64)];
    ensure(alpha == want_alpha, format!("alpha = {alpha:?}"))?;
    Ok("beta_0..4 and alpha_0..3 equal the displayed rationals".into())
}

fn criterion_2() -> Outcome {
    let p = gen_p(3);
    let want_p = [
        poly(&[(0, 1, 9, 1), (0, 0, -21, 1), (1, 0, -3, 1)]),
        poly(&[
            (0, 2, -27, 2),
            (0, 1, 90, 1),
            (1, 1, 9, 1),
            (0, 0, -228, 1),
            (1, 0, -30, 1),
            (2, 0, -3, 2),
        ]),
        poly(&[
            (0, 3, 27, 1),
            (0, 2, -621, 2),
            (1, 2, -27, 1),
            (0, 1, 1638, 1),
            (1, 1, 207, 1),
            (2, 1, 9, 1),
            (0, 0, -3540, 1),
            (1, 0, -546, 1),
            (2, 0, -69, 2),
            (3, 0, -1, 1),
        ]),
    ];
    for (k, want) in want_p.iter().enumerate() {
        let got = p.get(k + 1).ok_or("missing p")?;
        ensure(got == want, format!("p_{} = {got}", k + 1))?;
    }
    let q = gen_q(3);
    let want_q = [
        poly(&[(0, 1, 3, 16), (1, 0, -1, 16)]),
        poly(&[
            (0, 2, -27, 512),
            (0, 1, 9, 64),
            (1, 1, 9, 256),
            (0, 0, -21, 64),
            (1, 0, -3, 64),
            (2, 0, -3, 512),
        ]),
        poly(&[
            (0, 3, 189, 8192),
            (0, 2, -135, 1024),
            (1, 2, -189, 8192),
            (0, 1, 549, 1024),
            (1, 1, 45, 512),
            (2, 1, 63, 8192),
            (0, 0, -57, 64),
            (1, 0, -183, 1024),
            (2, 0, -15, 1024),
            (3, 0, -7, 8192),
        ]),
    ];
    for (k, want) in want_q.iter().enumerate() {
        let got = q.get(k + 1).ok_or("missing q")?;
        ensure(got == want, format!("q_{} = {got}", k + 1))?;
    }
    let pt = gen_lambert_p(3);
    let want_pt = [
        poly(&[(0, 1, 1, 1)]),
        poly(&[(0, 1, 1, 1), (0, 2, -1, 2)]),
        poly(&[(0, 1, 1, 1), (0, 2, -3, 2), (0, 3, 1, 3)]),
    ];
    for (k, want) in want_pt.iter().enumerate() {
        let got = pt.get(k + 1).ok_or("missing Lambert polynomial")?;
        ensure(got == want, format!("pt_{} = {got}", k + 1))?;
    }
    Ok("p_1..3, q_1..3 and pt_1..3 match term by term".into())
}

fn criterion_3() -> Outcome {
    let a = gen_alpha(30).as_series();
    let b = gen_beta(30).as_series();
    let prod = a.mul(&b);
    ensure(prod.order() == 30, format!("product order {}", prod.order()))?;
    for (k, v) in prod.coeffs().iter().enumerate() {
        let want = if k == 0 { Rational::one() } else { Rational::zero() };
        ensure(*v == want, format!("coefficient {k} is {v}"))?;
    }
    Ok("alpha * beta = 1 through z^30".into())
}

fn criterion_4() -> Outcome {
    let mut worst = usize::MAX;
    for n in 1..=15 {
        let got = ode_residual_order(n);
        ensure(got > n, format!("residual order {got} for N = {n}"))?;
        worst = worst.min(got - n);
    }
    Ok(format!("residual order >= N + {worst} for N = 1..15"))
}

fn criterion_5() -> Outcome {
    let p = gen_p(20);
    let q = gen_q(20);
    for n in 1..=20 {
        let dp = p.get(n).and_then(BivariatePoly::z_degree).unwrap_or(0);
        let dq = q.get(n).and_then(BivariatePoly::z_degree).unwrap_or(0);
        ensure(dp as usize <= n, format!("deg_z p_{n} = {dp}"))?;
        ensure(dq as usize <= n, format!("deg_z q_{n} = {dq}"))?;
    }
    Ok("deg_z p_n <= n and deg_z q_n <= n for n = 1..20".into())
}

fn criterion_6() -> Outcome {
    let cfg = SolverConfig::verification();
    let mut parts = Vec::new();
    for (h0, h1) in [(1.0, 1.0), (2.0, 0.5)] {
        let data = InitialData::new(0.0, h0, h1).map_err(|e| e.to_string())?;
        let quad = GProblem::from_initial_data(&data, &cfg).map_err(|e| e.to_string())?.c();
        let (fit, _) = fit_c_for_data(&data, &cfg).map_err(|e| e.to_string())?;
        let d = (quad - fit).abs().to_f64();
        ensure(d <= 1e-6, format!("({h0}, {h1}): |dc| = {d:e}"))?;
        parts.push(format!("({h0},{h1}) c = {:.12} |dc| = {d:.1e}", quad.to_f64()));
    }
    Ok(parts.join("; "))
}

fn criterion_7() -> Outcome {
    let cfg = SolverConfig::verification();
    let data = InitialData::new(0.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let c = GProblem::from_initial_data(&data, &cfg).map_err(|e| e.to_string())?.c();
    let traj = integrate_h(&data, Dd::from(5.0), &cfg).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for s in [1.0, 5.0] {
        let (h, hp) = traj.eval(Dd::from(s)).map_err(|e| e.to_string())?;
        let shifted = InitialData::from_dd(Dd::ZERO, h, hp).map_err(|e| e.to_string())?;
        let cs = GProblem::from_initial_data(&shifted, &cfg).map_err(|e| e.to_string())?.c();
        let d = (cs - (c - 4.0 * s)).abs().to_f64();
        ensure(d <= 1e-6, format!("s = {s}: deviation {d:e}"))?;
        worst = worst.max(d);
    }
    Ok(format!("max |c_s - (c - 4s)| = {worst:.1e} for s in {{1, 5}}"))
}

fn criterion_8() -> Outcome {
    let cfg = SolverConfig::verification();
    let data = InitialData::new(0.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let c = GProblem::from_initial_data(&data, &cfg).map_err(|e| e.to_string())?.c();
    let grid = decades(2, 6);
    let traj = integrate_h_with_stops(&data, Dd::from(1e6), &grid, &cfg).map_err(|e| e.to_string())?;
    let model = AsymptoticModel::new(c, 3).map_err(|e| e.to_string())?;
    let rep = remainder_study(&model, &traj, 3, &grid, 10.0).map_err(|e| e.to_string())?;
    let growth: Vec<String> = rep.summary.iter().map(|s| format!("{:.2}", s.growth)).collect();
    ensure(rep.passed, format!("growth R_n(1e6)/R_n(1e2) = [{}]", growth.join(", ")))?;
    Ok(format!("R_n(1e6)/R_n(1e2) for n = 0..3: [{}]", growth.join(", ")))
}

fn criterion_9() -> Outcome {
    let cfg = SolverConfig::verification();
    let data = InitialData::new(0.0, 1.0, 1.0).map_err(|e| e.to_string())?;
    let prob = GProblem::from_initial_data(&data, &cfg).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for x in decades(2, 6) {
        let y = invert_G(x, &prob, &cfg).map_err(|e| e.to_string())?;
        let gy = compute_G(y, &prob, &cfg).map_err(|e| e.to_string())?;
        let d = (gy - x).abs().to_f64();
        ensure(d <= 1e-9, format!("x = {:e}: |G(G^-1(x)) - x| = {d:e}", x.to_f64()))?;
        worst = worst.max(d);
        let gx = compute_G(x, &prob, &cfg).map_err(|e| e.to_string())?;
        let gap = y - x;
        let bound = x / (x - 4.0) * (x - gx);
        ensure(
            gap >= Dd::ZERO && gap <= bound,
            format!("x = {:e}: sandwich 0 <= {} <= {} fails", x.to_f64(), gap.to_f64(), bound.to_f64()),
        )?;
    }
    Ok(format!("max round-trip error {worst:.1e}; sandwich holds on 1e2..1e6"))
}

fn criterion_10() -> Outcome {
    let rep = lambert_compare(3, &[10.0, 1e2, 1e3, 1e4, 1e5].map(Dd::from), 10.0).map_err(|e| e.to_string())?;
    ensure(rep.max_residual <= 1e-12, format!("root residual {:e}", rep.max_residual))?;
    let growth: Vec<String> = rep.summary.iter().map(|s| format!("{:.2}", s.growth)).collect();
    ensure(rep.passed, format!("growth [{}]", growth.join(", ")))?;
    Ok(format!(
        "max residual {:.1e}; growth for n = 0..3: [{}]",
        rep.max_residual,
        growth.join(", ")
    ))
}

fn criterion_11() -> Outcome {
    let cfg = SolverConfig::default();
    let grid = decades(2, 6);
    let mut parts = Vec::new();
    for (h0, h1) in [(1.0, 1.0), (2.0, 0.5), (1.0, -1.0)] {
        let data = InitialData::new(0.0, h0, h1).map_err(|e| e.to_string())?;
        let traj = integrate_h_with_stops(&data, Dd::from(1e6), &grid, &cfg).map_err(|e| e.to_string())?;
        let samples: Vec<_> = traj.samples().collect();
        ensure(samples.iter().all(|s| s.h > Dd::ZERO), "h <= 0 at a sample")?;
        // index after which h' stays positive
        let last_nonpos = samples.iter().rposition(|s| s.hprime <= Dd::ZERO);
        ensure(
            last_nonpos.is_none_or(|i| i + 1 < samples.len()),
            format!("({h0},{h1}): h' not eventually positive"),
        )?;
        let dev: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let h = traj.h(t).expect("grid inside trajectory");
                (h - t.qrt() * 2f64.sqrt()).abs().to_f64()
            })
            .collect();
        let max = dev.iter().copied().fold(0.0, f64::max);
        ensure(
            max <= 10.0 * dev[0],
            format!("({h0},{h1}): |h - sqrt(2) t^1/4| grows from {:e} to {max:e}", dev[0]),
        )?;
        parts.push(format!("({h0},{h1}) max dev {max:.3e}"));
    }
    Ok(parts.join("; "))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 11] = [
        ("exact coefficient suite", criterion_1, 1),
        ("exact polynomial suite", criterion_2, 1),
        ("reciprocity through order 30", criterion_3, 1),
        ("formal-solution residual", criterion_4, 5),
        ("degree bounds", criterion_5, 5),
        ("dual-route c", criterion_6, 30),
        ("shift law", criterion_7, 30),
        ("remainder scaling", criterion_8, 120),
        ("G inversion", criterion_9, 10),
        ("Lambert comparison", criterion_10, 10),
        ("trajectory properties", criterion_11, 30),
    ];
    let mut failures = Vec::new();
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over the {budget} s budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        println!(
            "criterion {:>2} {:<30} {status} ({:.2} s, budget {budget} s): {detail}",
            i + 1,
            name,
            elapsed.as_secs_f64()
        );
        if status == "FAIL" {
            failures.push(i + 1);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
