use std::path::Path;

use rug::Rational;
use serde_json::{json, Value};
use sppfix_core::certify::certify_newton;
use sppfix_core::iterate::{dnm_run, kleene_run, newton_run, tangent_run, StopRule};
use sppfix_core::scalar::ceil_log2;
use sppfix_core::{
    catalog, scc_decompose, system_to_json, BinaryFloat, ExactRational, Field, Method, Scalar, ScalarKind, SppSystem,
};

use crate::input::{load, load_clean, Origin};
use crate::render::{json, row, table};
use crate::{CliError, Numeric, Report};

/// Runs `$body` with `$f` bound to the field selected by `$kind`.
macro_rules! with_field {
    ($kind:expr, $f:ident => $body:expr) => {
        match $kind {
            ScalarKind::Rational => {
                let $f = ExactRational::default();
                $body
            }
            ScalarKind::Float(bits) => {
                let $f = BinaryFloat::new(bits);
                $body
            }
        }
    };
}

fn render_vec<S: Scalar>(v: &[S]) -> Vec<String> {
    v.iter().map(Scalar::render).collect()
}

fn residual<F: Field>(field: &F, sys: &SppSystem, x: &[F::Elem]) -> Result<F::Elem, CliError> {
    let fx = sys.eval(field, x)?;
    Ok(fx.iter().zip(x).fold(field.zero(), |m, (a, b)| m.max_of(&a.sub(b).abs_val())))
}

struct Solution {
    values: Vec<String>,
    residual: String,
    iterations: usize,
    stop: String,
    steps_per_scc: Option<Vec<usize>>,
    trace: Option<Vec<Vec<String>>>,
}

fn solve_in<F: Field>(
    field: &F,
    sys: &SppSystem,
    method: Method,
    numeric: &Numeric,
    target_bits: Option<u32>,
    dnm_i: u64,
    keep_trace: bool,
) -> Result<Solution, CliError> {
    let mut stop = StopRule::iterations(numeric.max_iters);
    if let Some(bits) = target_bits {
        if method != Method::Newton {
            return Err(CliError::input("--target-bits needs --method newton".into()));
        }
        stop = stop.with_target_bits(bits);
    }
    let trace = match method {
        Method::Kleene => kleene_run(sys, field, &stop)?,
        Method::Newton => newton_run(sys, field, &stop)?,
        Method::Tangent => tangent_run(sys, field, &stop)?,
        Method::Dnm => {
            let r = dnm_run(sys, field, dnm_i)?;
            let res = residual(field, sys, &r.rho)?;
            return Ok(Solution {
                values: render_vec(&r.rho),
                residual: res.render(),
                iterations: r.total_steps,
                stop: "budget".into(),
                steps_per_scc: Some(r.steps_per_scc),
                trace: None,
            });
        }
    };
    let stop = serde_json::to_value(trace.stop_reason).expect("plain enum");
    Ok(Solution {
        values: render_vec(trace.last()),
        residual: trace.last_residual().render(),
        iterations: trace.steps(),
        stop: stop.as_str().unwrap_or_default().to_string(),
        steps_per_scc: None,
        trace: keep_trace.then(|| trace.iterates.iter().map(|x| render_vec(x)).collect()),
    })
}

pub fn solve(
    file: &Path,
    method: Method,
    numeric: &Numeric,
    target_bits: Option<u32>,
    dnm_i: u64,
    keep_trace: bool,
) -> Result<Report, CliError> {
    let c = load_clean(file)?;
    let sys = &c.system;
    let s = with_field!(numeric.scalar, f => solve_in(&f, sys, method, numeric, target_bits, dnm_i, keep_trace))?;

    let mut names: Vec<&String> = sys.variables().iter().collect();
    let mut values: Vec<String> = s.values.clone();
    for r in &c.removed {
        names.push(r);
        values.push("0".into());
    }
    if numeric.json {
        let mut out = json!({
            "command": "solve",
            "input": c.input.origin.as_str(),
            "method": method.to_string(),
            "scalar": numeric.scalar.to_string(),
            "iterations": s.iterations,
            "stop_reason": s.stop,
            "residual": s.residual,
            "solution": names.iter().zip(&values).map(|(n, v)| json!({"variable": n, "value": v})).collect::<Vec<_>>(),
            "removed": c.removed,
        });
        if let Some(steps) = &s.steps_per_scc {
            out["steps_per_scc"] = json!(steps);
            out["dnm_i"] = json!(dnm_i);
        }
        if let Some(trace) = &s.trace {
            out["trace"] = json!(trace);
        }
        return Ok(Report::ok(json(&out)));
    }
    let mut rows = vec![
        row(["method", &method.to_string()]),
        row(["scalar", &numeric.scalar.to_string()]),
        row(["iterations", &s.iterations.to_string()]),
        row(["stop", &s.stop]),
        row(["residual", &s.residual]),
    ];
    let mut out = table(&rows);
    out.push('\n');
    rows = vec![row(["variable", "value"])];
    rows.extend(names.iter().zip(&values).map(|(n, v)| vec![n.to_string(), v.clone()]));
    out.push_str(&table(&rows));
    if let Some(trace) = &s.trace {
        out.push('\n');
        let mut rows = vec![std::iter::once("k".to_string()).chain(sys.variables().iter().cloned()).collect()];
        for (k, x) in trace.iter().enumerate() {
            rows.push(std::iter::once(k.to_string()).chain(x.iter().cloned()).collect());
        }
        out.push_str(&table(&rows));
    }
    Ok(Report::ok(out))
}

fn certify_in<F: Field>(
    field: &F,
    sys: &SppSystem,
    numeric: &Numeric,
    target_bits: u32,
) -> Result<(Value, String, bool), CliError> {
    let names = sys.variables();
    let cert = certify_newton(sys, field, target_bits, numeric.max_iters)?;
    let var_names = |vars: &[usize]| vars.iter().map(|&v| names[v].clone()).collect::<Vec<_>>();

    let sccs: Vec<Value> = cert
        .sccs
        .iter()
        .map(|s| {
            json!({
                "variables": var_names(&s.variables),
                "iterations": s.iterations,
                "reached_target": s.reached_target,
                "certificate": s.certificate.as_ref().map(|c| c.to_json()),
            })
        })
        .collect();
    let composition = json!({
        "certified": cert.composition_certified,
        "variables": names,
        "lower": render_vec(&cert.lower),
        "upper": cert.upper.as_ref().map(|u| render_vec(u)),
        "bits": cert.certified_bits,
        "note": if cert.composition_certified {
            "enclosure of the least fixed point"
        } else {
            "not certified: errors of deeper SCCs propagate into the SCCs that depend on them"
        },
    });
    let value = json!({
        "command": "certify",
        "scalar": numeric.scalar.to_string(),
        "target_bits": target_bits,
        "max_iters": numeric.max_iters,
        "reached_target": cert.reached_target,
        "auxiliaries": cert.auxiliaries,
        "sccs": sccs,
        "composition": composition,
    });

    let mut out = String::new();
    for (i, s) in cert.sccs.iter().enumerate() {
        let bits = s.certificate.as_ref().map_or("none".to_string(), |c| c.certified_bits.to_string());
        out.push_str(&format!(
            "scc {}: {}  iterations {}  bits {}  {}\n",
            i + 1,
            var_names(&s.variables).join(" "),
            s.iterations,
            bits,
            if s.reached_target { "target reached" } else { "target NOT reached" }
        ));
        let mut rows = vec![row(["", "variable", "lower", "upper"])];
        for (j, &v) in s.variables.iter().enumerate() {
            let (lo, up) = match &s.certificate {
                Some(c) => (c.lower[j].render(), c.upper[j].render()),
                None => (cert.lower[v].render(), "-".into()),
            };
            rows.push(vec![String::new(), names[v].clone(), lo, up]);
        }
        out.push_str(&table(&rows));
    }
    out.push_str(&format!(
        "composition: {}\n",
        if cert.composition_certified {
            "certified".to_string()
        } else {
            "NOT certified (errors of deeper SCCs propagate)".to_string()
        }
    ));
    if cert.auxiliaries > 0 {
        out.push_str(&format!("auxiliary variables: {}\n", cert.auxiliaries));
    }
    Ok((value, out, cert.reached_target))
}

pub fn certify(file: &Path, numeric: &Numeric, target_bits: u32) -> Result<Report, CliError> {
    let c = load_clean(file)?;
    let (mut value, mut text, reached) = with_field!(numeric.scalar, f => certify_in(&f, &c.system, numeric, target_bits))?;
    value["removed"] = json!(c.removed);
    if !c.removed.is_empty() {
        text.push_str(&format!("removed (exactly 0): {}\n", c.removed.join(" ")));
    }
    let stdout = if numeric.json { json(&value) } else { text };
    let failure = (!reached).then(|| {
        CliError::budget(format!(
            "target of {target_bits} certified bits not reached within {} iterations",
            numeric.max_iters
        ))
    });
    Ok(Report { stdout, failure })
}

pub fn decompose(file: &Path, as_json: bool) -> Result<Report, CliError> {
    let c = load_clean(file)?;
    let names = c.system.variables();
    let d = scc_decompose(&c.system);
    let vars = |s: usize| d.sccs[s].vars.iter().map(|&v| names[v].clone()).collect::<Vec<_>>();
    if as_json {
        let sccs: Vec<Value> = d
            .topo_order
            .iter()
            .map(|&s| {
                json!({
                    "id": s,
                    "variables": vars(s),
                    "depth": d.depth[s],
                    "nontrivial": d.sccs[s].nontrivial,
                    "depends_on": d.edges[s],
                })
            })
            .collect();
        let value = json!({
            "command": "decompose",
            "height": d.height,
            "width": d.width,
            "sccs": sccs,
            "removed": c.removed,
        });
        return Ok(Report::ok(json(&value)));
    }
    let mut rows = vec![row(["scc", "depth", "kind", "depends on", "variables"])];
    for &s in &d.topo_order {
        let deps: Vec<String> = d.edges[s].iter().map(|t| t.to_string()).collect();
        rows.push(vec![
            s.to_string(),
            d.depth[s].to_string(),
            if d.sccs[s].nontrivial { "cyclic" } else { "trivial" }.to_string(),
            if deps.is_empty() { "-".into() } else { deps.join(",") },
            vars(s).join(" "),
        ]);
    }
    let mut out = format!("height {}  width {}\n", d.height, d.width);
    out.push_str(&table(&rows));
    if !c.removed.is_empty() {
        out.push_str(&format!("removed (exactly 0): {}\n", c.removed.join(" ")));
    }
    Ok(Report::ok(out))
}

pub fn convert(file: &Path, as_json: bool) -> Result<Report, CliError> {
    let input = load(file)?;
    if as_json {
        return Ok(Report::ok(system_to_json(&input.system) + "\n"));
    }
    let mut out = String::new();
    if input.origin == Origin::Ppda {
        for (name, t) in input.system.variables().iter().zip(&input.legend) {
            out.push_str(&format!("# {name} = [{} {} {}]\n", t.from, t.symbol, t.to));
        }
        for t in &input.zero_triples {
            out.push_str(&format!("# [{} {} {}] = 0\n", t.from, t.symbol, t.to));
        }
    }
    out.push_str(&input.system.to_dsl());
    Ok(Report::ok(out))
}

struct BenchRow {
    iterations: usize,
    bound_bits: usize,
    error: Rational,
}

fn valid_bits(err: &Rational) -> Option<i64> {
    (err.cmp0() == std::cmp::Ordering::Greater).then(|| (-ceil_log2(err)).max(0))
}

fn bench_in<F: Field>(field: &F, n: usize, k: usize) -> Result<Vec<BenchRow>, CliError> {
    let sys = catalog::worst_case_family(n);
    let period = 1usize << (n - 1);
    let trace = newton_run(&sys, field, &StopRule::iterations(k * period))?;
    Ok((1..=k)
        .map(|j| BenchRow {
            iterations: j * period,
            bound_bits: j,
            error: Rational::from(1) - trace.iterates[(j * period).min(trace.steps())][n - 1].to_rational(),
        })
        .collect())
}

pub fn bench(n: usize, k: usize, scalar: ScalarKind, as_json: bool) -> Result<Report, CliError> {
    if n == 0 || n > 20 || k == 0 {
        return Err(CliError::input("bench needs 1 <= n <= 20 and k >= 1".into()));
    }
    let rows = with_field!(scalar, f => bench_in(&f, n, k))?;
    let fmt_err = |e: &Rational| format!("{:.6e}", e.to_f64());
    let holds = |r: &BenchRow| r.error > (1, 1u64 << r.bound_bits.min(63));
    if as_json {
        let value = json!({
            "command": "bench",
            "n": n,
            "k": k,
            "scalar": scalar.to_string(),
            "rows": rows.iter().map(|r| json!({
                "iterations": r.iterations,
                "error": fmt_err(&r.error),
                "valid_bits": valid_bits(&r.error),
                "bound": format!("2^-{}", r.bound_bits),
                "error_exceeds_bound": holds(r),
            })).collect::<Vec<_>>(),
        });
        return Ok(Report::ok(json(&value)));
    }
    let mut out = format!("chain family n={n}, component X{n}, {scalar}\n");
    let mut t = vec![row(["iterations", "error", "valid bits", "bound", "error > bound"])];
    for r in &rows {
        t.push(vec![
            r.iterations.to_string(),
            fmt_err(&r.error),
            valid_bits(&r.error).map_or("exact".into(), |v| v.to_string()),
            format!("2^-{}", r.bound_bits),
            if holds(r) { "yes" } else { "no" }.to_string(),
        ]);
    }
    out.push_str(&table(&t));
    Ok(Report::ok(out))
}
