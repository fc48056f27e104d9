//! Text, CSV and JSON renderings of command results.

use std::fmt::Write as _;

use hasym_core::asympt::{FitReport, LambertReport, RemainderReport};
use hasym_core::exact::{BivariatePoly, Rational};
use hasym_core::numerics::{GProblem, Trajectory};
use hasym_core::recursions::{gen_alpha, gen_beta, gen_lambert_p, gen_p, gen_q, PolyFamily};
use hasym_core::Dd;
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Format, Kind};

fn kind_name(kind: Kind) -> &'static str {
    match kind {
        Kind::Alpha => "alpha",
        Kind::Beta => "beta",
        Kind::P => "p",
        Kind::Q => "q",
        Kind::Lambert => "lambert",
    }
}

pub fn series(kind: Kind, order: usize, format: Format) -> String {
    match kind {
        Kind::Alpha => sequence(kind, gen_alpha(order).values, format),
        Kind::Beta => sequence(kind, gen_beta(order).values, format),
        Kind::P => family(kind, &gen_p(order), format),
        Kind::Q => family(kind, &gen_q(order), format),
        Kind::Lambert => family(kind, &gen_lambert_p(order), format),
    }
}

fn sequence(kind: Kind, values: Vec<Rational>, format: Format) -> String {
    let name = kind_name(kind);
    match format {
        Format::Json => {
            let series = hasym_core::exact::TruncatedSeries::new(values.clone());
            let doc = json!({
                "kind": name,
                "order": values.len() - 1,
                "values": values.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "series": series,
            });
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Csv => {
            let mut out = String::from("k,value\n");
            for (k, v) in values.iter().enumerate() {
                let _ = writeln!(out, "{k},{v}");
            }
            out
        }
        Format::PaperTable => {
            let mut out = String::new();
            for (k, v) in values.iter().enumerate() {
                let _ = writeln!(out, "{name}_{k} = {v}");
            }
            out
        }
    }
}

fn poly_label(kind: Kind, k: usize) -> String {
    match kind {
        Kind::Lambert => format!("pt_{k}(z)"),
        _ => format!("{}_{k}(c;z)", kind_name(kind)),
    }
}

fn family(kind: Kind, fam: &PolyFamily, format: Format) -> String {
    match format {
        Format::Json => {
            #[derive(Serialize)]
            struct Entry<'a> {
                index: usize,
                display: String,
                poly: &'a BivariatePoly,
            }
            let polys: Vec<Entry> = fam
                .iter()
                .map(|(k, p)| Entry {
                    index: k,
                    display: p.to_table_string(),
                    poly: p,
                })
                .collect();
            let doc = json!({
                "kind": kind_name(kind),
                "start": fam.start,
                "polys": polys,
            });
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Csv => {
            let mut out = String::from("index,c_pow,z_pow,coeff\n");
            for (k, p) in fam.iter() {
                for (&(cp, zp), v) in p.terms() {
                    let _ = writeln!(out, "{k},{cp},{zp},{v}");
                }
            }
            out
        }
        Format::PaperTable => {
            let mut out = String::new();
            for (k, p) in fam.iter() {
                let _ = writeln!(out, "{} = {}", poly_label(kind, k), p.to_table_string());
            }
            out
        }
    }
}

pub fn trajectory_json(traj: &Trajectory) -> Value {
    let samples: Vec<Value> = traj
        .samples()
        .map(|s| json!({"t": s.t.to_f64(), "h": s.h.to_f64(), "hprime": s.hprime.to_f64()}))
        .collect();
    json!({"summary": traj.summary(), "samples": samples})
}

pub fn trajectory_table(traj: &Trajectory) -> String {
    let mut out = format!("{:>24} {:>24} {:>24}\n", "t", "h", "h'");
    for s in traj.samples() {
        let _ = writeln!(
            out,
            "{:>24.16e} {:>24.16e} {:>24.16e}",
            s.t.to_f64(),
            s.h.to_f64(),
            s.hprime.to_f64()
        );
    }
    out
}

fn digits(v: Dd) -> String {
    v.to_sci_string(32)
}

pub fn constant(
    format: Format,
    quad: Option<&GProblem>,
    fit: Option<&(Dd, FitReport)>,
    discrepancy: Option<f64>,
    agree_tol: f64,
) -> String {
    match format {
        Format::Json => {
            let mut doc = serde_json::Map::new();
            if let Some(q) = quad {
                doc.insert("quadrature".into(), json!(q.summary()));
            }
            if let Some((c, rep)) = fit {
                doc.insert("fit".into(), json!({"c_digits": digits(*c), "report": rep}));
            }
            if let Some(d) = discrepancy {
                doc.insert("discrepancy".into(), json!(d));
                doc.insert("agree_tol".into(), json!(agree_tol));
                doc.insert("agree".into(), json!(d <= agree_tol));
            }
            serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable") + "\n"
        }
        Format::Csv => {
            let mut out = String::from("method,c\n");
            if let Some(q) = quad {
                let _ = writeln!(out, "quadrature,{}", digits(q.c()));
            }
            if let Some((c, _)) = fit {
                let _ = writeln!(out, "fit,{}", digits(*c));
            }
            out
        }
        Format::PaperTable => {
            let mut out = String::new();
            if let Some(q) = quad {
                let _ = writeln!(out, "c (quadrature) = {}", digits(q.c()));
            }
            if let Some((c, rep)) = fit {
                let _ = writeln!(out, "c (fit, n = {}) = {}  spread {:.2e}", rep.n, digits(*c), rep.spread);
            }
            if let Some(d) = discrepancy {
                let _ = writeln!(out, "discrepancy = {d:.3e} (allowed {agree_tol:.1e})");
            }
            out
        }
    }
}

pub fn remainder_table(rep: &RemainderReport) -> String {
    let mut out = format!(
        "{:>3} {:>10} {:>24} {:>24} {:>12} {:>10}\n",
        "n", "t", "h", "A_n", "R_n", "err est"
    );
    for e in &rep.entries {
        let _ = writeln!(
            out,
            "{:>3} {:>10.3e} {:>24.16e} {:>24.16e} {:>12.5e} {:>10.2e}",
            e.n, e.t, e.h_num, e.a_n, e.ratio, e.error_estimate
        );
    }
    for s in &rep.summary {
        let _ = writeln!(
            out,
            "n = {}: growth {:.3} (limit {}) {}",
            s.n,
            s.growth,
            rep.growth_limit,
            if s.passed { "PASS" } else { "FAIL" }
        );
    }
    out
}

pub fn lambert_table(rep: &LambertReport) -> String {
    let mut out = format!(
        "{:>3} {:>10} {:>24} {:>24} {:>10} {:>12}\n",
        "n", "x", "y", "series", "residual", "ratio"
    );
    for r in &rep.rows {
        let _ = writeln!(
            out,
            "{:>3} {:>10.3e} {:>24.16e} {:>24.16e} {:>10.2e} {:>12.5e}",
            r.n, r.x, r.y_numeric, r.series, r.residual, r.ratio
        );
    }
    for s in &rep.summary {
        let _ = writeln!(
            out,
            "n = {}: growth {:.3} (limit {}) {}",
            s.n,
            s.growth,
            rep.growth_limit,
            if s.passed { "PASS" } else { "FAIL" }
        );
    }
    out
}
