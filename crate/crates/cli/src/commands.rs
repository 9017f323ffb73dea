use std::fs::OpenOptions;
use std::io::Write;

use anyhow::{Context, Result};
use perfect_core::constants::{
    a_const_squared_with, a_const_with, ell, h_const, k_const, lemma2_check, v_const, vandiver_bound_check, GammaSource,
};
use perfect_core::cyclotomic::{
    bernoulli_exact, bernoulli_numerator_nn, heuristic_sum, irregular_pairs_upto, kurihara_component, l0_mod_p,
    vandiver_component_test, Verdict,
};
use perfect_core::torsion::{homology, lemma1_bound, parse_matrix, prop3_bound, smith_normal_form};
use perfect_core::voronoi::{build_complex, enumerate_perfect_with, EnumerateOptions};
use perfect_core::ChainComplexZ;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::cache::{Cache, Source};
use crate::checks;
use crate::{BoundsCmd, Command, CycloCmd, Global, Output, TorsionCmd, UsageError, VoronoiCmd};

const EXACT: &str = "exact";
const CERTIFIED: &str = "certified-precision";

fn plain(value: Value) -> Output {
    Output { value, text: None }
}

fn with_check(mut value: Value, check: Option<Value>) -> Value {
    if let Some(c) = check {
        value["check"] = c;
    }
    value
}

fn note_source(what: &str, s: Source) {
    match s {
        Source::Hit => eprintln!("{what}: served from cache"),
        Source::Recomputed => eprintln!("{what}: damaged cache entry recomputed"),
        Source::Computed => {}
    }
}

pub fn dispatch(cmd: &Command, g: &Global, cache: &Cache) -> Result<Output> {
    match cmd {
        Command::Voronoi(c) => voronoi(c, g, cache),
        Command::Torsion(c) => torsion(c, g),
        Command::Bounds(c) => bounds(c, g),
        Command::Cyclo(c) => cyclo(c, g),
    }
}

fn voronoi(cmd: &VoronoiCmd, g: &Global, cache: &Cache) -> Result<Output> {
    match *cmd {
        VoronoiCmd::Enumerate { n, allow_six } => {
            let request = json!({ "command": "voronoi enumerate", "n": n });
            let (value, source) = cache.get_or_compute(&request, || {
                let classes = enumerate_perfect_with(n, EnumerateOptions { allow_six })?;
                let records: Vec<Value> = classes
                    .iter()
                    .map(|c| {
                        let mut v = serde_json::to_value(c).expect("plain data");
                        v["pair_count"] = json!(c.pair_count());
                        v
                    })
                    .collect();
                Ok(json!({
                    "command": "voronoi enumerate",
                    "n": n,
                    "provenance": EXACT,
                    "class_count": classes.len(),
                    "pair_counts": classes.iter().map(|c| c.pair_count()).collect::<Vec<_>>(),
                    "classes": records,
                }))
            })?;
            note_source("voronoi enumerate", source);
            let check = if g.check { Some(checks::voronoi_enumerate(n, g.seed)?) } else { None };
            Ok(plain(with_check(value, check)))
        }
        VoronoiCmd::Complex { n, group } => {
            let request = json!({ "command": "voronoi complex", "n": n, "group": group.to_string() });
            let (value, source) = cache.get_or_compute(&request, || {
                let vc = build_complex(n, group)?;
                let homology: Vec<Value> = (0..=vc.complex.top_degree())
                    .map(|k| homology(&vc.complex, k).map(|h| serde_json::to_value(h).expect("plain data")))
                    .collect::<perfect_core::Result<_>>()?;
                Ok(json!({
                    "command": "voronoi complex",
                    "n": n,
                    "group": group,
                    "provenance": EXACT,
                    "classes": vc.classes,
                    "sizes": vc.complex.sizes(),
                    "orbit_counts": vc.orbit_counts,
                    "max_face_counts": vc.max_face_counts,
                    "cells": vc.cells,
                    "homology": homology,
                    "complex": vc.complex.to_json(),
                }))
            })?;
            note_source("voronoi complex", source);
            let complex = ChainComplexZ::from_json(&value["complex"])?;
            let check = if g.check { Some(checks::complex(&complex, n as u64 + 1)?) } else { None };
            let text = format!("# voronoi complex n={n} group={group}\n{}", complex.to_text());
            Ok(Output { value: with_check(value, check), text: Some(text) })
        }
    }
}

fn read_complex(path: &std::path::Path) -> Result<ChainComplexZ> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(&text).map_err(|e| perfect_core::Error::Parse(e.to_string()))?;
        let inner = v.get("complex").unwrap_or(&v);
        Ok(ChainComplexZ::from_json(inner)?)
    } else {
        Ok(ChainComplexZ::from_text(&text)?)
    }
}

fn torsion(cmd: &TorsionCmd, g: &Global) -> Result<Output> {
    match cmd {
        TorsionCmd::Snf { file } => {
            let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
            let m = parse_matrix(&text)?;
            let s = smith_normal_form(&m);
            let bound = if s.rank > 0 { Some(lemma1_bound(&m, None)?.to_string()) } else { None };
            let value = json!({
                "command": "torsion snf",
                "provenance": EXACT,
                "rows": m.rows(),
                "cols": m.cols(),
                "rank": s.rank,
                "invariant_factors": s.invariant_factors.iter().map(ToString::to_string).collect::<Vec<_>>(),
                "torsion": s.torsion().iter().map(ToString::to_string).collect::<Vec<_>>(),
                "torsion_card": s.torsion_card().to_string(),
                "column_product_bound": bound,
            });
            let check = if g.check { Some(checks::snf(&m, g.seed)) } else { None };
            Ok(plain(with_check(value, check)))
        }
        TorsionCmd::Bound { complex, k } => {
            let c = read_complex(complex)?;
            let degrees: Vec<usize> = match k {
                Some(k) => vec![*k],
                None => (0..=c.top_degree()).collect(),
            };
            let mut rows = Vec::new();
            for k in degrees {
                let h = homology(&c, k)?;
                let p = prop3_bound(&c, k)?;
                rows.push(json!({
                    "k": k,
                    "betti": h.betti,
                    "torsion": h.torsion.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "torsion_card": h.torsion_card().to_string(),
                    "bound": p,
                    "holds": p.bound_int >= h.torsion_card(),
                }));
            }
            let value = json!({ "command": "torsion bound", "provenance": EXACT, "sizes": c.sizes(), "degrees": rows });
            let check = if g.check { Some(checks::complex(&c, u64::MAX)?) } else { None };
            Ok(plain(with_check(value, check)))
        }
    }
}

fn bounds(cmd: &BoundsCmd, g: &Global) -> Result<Output> {
    let digits = g.digits as usize;
    let value = match *cmd {
        BoundsCmd::A { n, exact_hermite } => {
            let source = if exact_hermite { GammaSource::Exact } else { GammaSource::Bound };
            json!({
                "command": "bounds a",
                "n": n,
                "provenance": EXACT,
                "gamma_source": source,
                "a_squared": a_const_squared_with(n, source)?.to_string(),
                "a": a_const_with(n, source)?.to_string(),
            })
        }
        BoundsCmd::H { k, n } => {
            let b = h_const(k, n)?;
            let mut v = json!({ "command": "bounds h", "k": k, "n": n, "ell": ell(k, n)? });
            merge(&mut v, serde_json::to_value(b.report(digits)?)?);
            let check = if g.check { Some(checks::bound_refines(&b, digits)?) } else { None };
            with_check(v, check)
        }
        BoundsCmd::K { m } => {
            let b = k_const(m)?;
            let mut v = json!({ "command": "bounds k", "m": m });
            merge(&mut v, serde_json::to_value(b.report(digits)?)?);
            if m >= 6 {
                v["inequalities"] = serde_json::to_value(lemma2_check(m, digits)?)?;
            }
            let check = if g.check { Some(checks::bound_refines(&b, digits)?) } else { None };
            with_check(v, check)
        }
        BoundsCmd::V { n } => {
            let b = v_const(n)?;
            let mut v = json!({ "command": "bounds v", "n": n });
            merge(&mut v, serde_json::to_value(b.report(digits)?)?);
            if n >= 5 {
                v["inequalities"] = serde_json::to_value(vandiver_bound_check(n, digits)?)?;
            }
            let check = if g.check { Some(checks::bound_refines(&b, digits)?) } else { None };
            with_check(v, check)
        }
    };
    Ok(plain(value))
}

fn merge(into: &mut Value, from: Value) {
    if let (Some(a), Value::Object(b)) = (into.as_object_mut(), from) {
        a.extend(b);
    }
}

fn cyclo(cmd: &CycloCmd, g: &Global) -> Result<Output> {
    let value = match cmd {
        CycloCmd::Bernoulli { n } => {
            let b = bernoulli_exact(*n);
            let nn = if *n >= 2 && n % 2 == 0 { Some(bernoulli_numerator_nn(*n)?.to_string()) } else { None };
            let v = json!({ "command": "cyclo bernoulli", "n": n, "provenance": EXACT, "value": b.to_string(), "numerator_of_b_over_n": nn });
            with_check(v, if g.check { Some(checks::bernoulli()) } else { None })
        }
        CycloCmd::Irregular { max_p } => {
            let pairs = irregular_pairs_upto(*max_p);
            let mut primes: Vec<u64> = pairs.iter().map(|x| x.p).collect();
            primes.dedup();
            let v = json!({
                "command": "cyclo irregular",
                "max_p": max_p,
                "provenance": EXACT,
                "pair_count": pairs.len(),
                "irregular_primes": primes,
                "pairs": pairs,
            });
            with_check(v, if g.check { Some(checks::irregular(*max_p)?) } else { None })
        }
        CycloCmd::Vandiver { p, k, max_p, q_budget, store } => {
            let targets: Vec<(u64, u64)> = match (p, k, max_p) {
                (Some(p), Some(k), None) => vec![(*p, *k)],
                (None, None, Some(m)) => irregular_pairs_upto(*m).into_iter().map(|x| (x.p, x.k)).collect(),
                _ => return Err(UsageError("give either --p and --k, or --max-p".into()).into()),
            };
            let certs = targets
                .par_iter()
                .map(|&(p, k)| vandiver_component_test(p, k, *q_budget))
                .collect::<perfect_core::Result<Vec<_>>>()?;
            if let Some(path) = store {
                let mut f = OpenOptions::new()
                    .create(true)
                    .append(true)
                    .open(path)
                    .with_context(|| format!("opening {}", path.display()))?;
                let mut lines = String::new();
                for c in &certs {
                    lines.push_str(&c.to_json_line());
                    lines.push('\n');
                }
                f.write_all(lines.as_bytes())?;
            }
            let zero = certs.iter().filter(|c| c.verdict == Verdict::ComponentZero).count();
            let v = json!({
                "command": "cyclo vandiver",
                "provenance": EXACT,
                "q_budget": q_budget,
                "tested": certs.len(),
                "component_zero": zero,
                "inconclusive": certs.len() - zero,
                "certificates": certs,
            });
            with_check(v, if g.check { Some(checks::vandiver(&targets, *q_budget)?) } else { None })
        }
        CycloCmd::L0 { p, n } => {
            let v = json!({
                "command": "cyclo l0",
                "p": p,
                "n": n,
                "provenance": EXACT,
                "l0_mod_p": l0_mod_p(*p, *n)?,
                "component": kurihara_component(*p, *n)?,
            });
            with_check(v, if g.check { Some(checks::kurihara(*p)?) } else { None })
        }
        CycloCmd::Heuristic { x } => {
            let r = heuristic_sum(*x)?;
            let mut v = json!({ "command": "cyclo heuristic", "provenance": CERTIFIED });
            merge(&mut v, serde_json::to_value(&r)?);
            with_check(v, if g.check { Some(checks::heuristic(*x, &r)?) } else { None })
        }
    };
    Ok(plain(value))
}

pub fn check_summary(v: &Value) -> String {
    let failures = v["check"]["failures"].as_array().map(Vec::len).unwrap_or(0);
    let first = v["check"]["failures"][0].as_str().unwrap_or("");
    format!("{failures} failure(s); first: {first}")
}

/// Indented `key: value` lines; arrays of scalars on one line.
pub fn render_text(v: &Value) -> String {
    let mut out = String::new();
    render(v, 0, &mut out);
    out
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) => Some(s.clone()),
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            Some(xs.iter().filter_map(scalar).collect::<Vec<_>>().join(" "))
        }
        _ => None,
    }
}

fn render(v: &Value, depth: usize, out: &mut String) {
    let pad = "  ".repeat(depth);
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}{k}: {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render(x, depth + 1, out);
                    }
                }
            }
        }
        Value::Array(xs) => {
            for (i, x) in xs.iter().enumerate() {
                match scalar(x) {
                    Some(s) => out.push_str(&format!("{pad}[{i}] {s}\n")),
                    None => {
                        out.push_str(&format!("{pad}[{i}]\n"));
                        render(x, depth + 1, out);
                    }
                }
            }
        }
        other => out.push_str(&format!("{pad}{}\n", scalar(other).unwrap_or_default())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_rendering() {
        let v = json!({"a": 1, "b": [1, 2], "c": {"d": "x"}, "e": [{"f": null}]});
        assert_eq!(render_text(&v), "a: 1\nb: 1 2\nc:\n  d: x\ne:\n  [0]\n    f: -\n");
    }
}
