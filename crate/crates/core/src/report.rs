//! JSON renderings of solver results.
//!
//! Values are written as JSON numbers, or `"inf"` for `+inf`. In exact mode
//! a value also carries `{"num": N, "den": D}`. Keys come out sorted, so a
//! report is byte-for-byte reproducible.

use serde_json::{json, Map, Value};

use crate::chebyshev::ChebyshevSystem;
use crate::diameter::FeketeSystem;
use crate::energy::{ContinuumEstimate, EquilibriumResult, FrostmanReport, MinimaxEnergies, RendezvousResult};
use crate::kernel::Kernel;
use crate::measure::{DiscreteMeasure, MeasureLiteral};
use crate::numerics::{Certification, ExtReal, Scalar};
use crate::principles::{EquivalenceReport, MaxPrincipleVerdict, MaxPrincipleWitness};
use crate::trace::Trace;

/// A number, or `"inf"`.
pub fn value_json<T: Scalar>(v: &ExtReal<T>) -> Value {
    match v {
        ExtReal::Infinite => Value::String("inf".into()),
        ExtReal::Finite(x) => scalar_json(x),
    }
}

fn scalar_json<T: Scalar>(x: &T) -> Value {
    if let Some((n, d)) = x.ratio_parts() {
        if d == 1.into() {
            if let Ok(i) = i64::try_from(n) {
                return json!(i);
            }
        }
    }
    serde_json::Number::from_f64(x.to_f64())
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}

/// `{"num": N, "den": D}` for exact values; integers that overflow `i64`
/// are written as strings.
pub fn exact_json<T: Scalar>(v: &ExtReal<T>) -> Option<Value> {
    let (n, d) = v.as_finite()?.ratio_parts()?;
    let part = |b: num_bigint::BigInt| match i64::try_from(&b) {
        Ok(i) => json!(i),
        Err(_) => json!(b.to_string()),
    };
    Some(json!({"num": part(n), "den": part(d)}))
}

pub fn measure_json<T: Scalar>(mu: &DiscreteMeasure<T>) -> Value {
    serde_json::to_value(MeasureLiteral::from_measure(mu)).expect("measure literals serialize")
}

fn labels<T: Scalar>(k: &Kernel<T>, indices: &[usize]) -> Value {
    Value::Array(
        indices
            .iter()
            .map(|&i| Value::String(k.space().point(i).to_string()))
            .collect(),
    )
}

/// Common fields of a single quantity.
pub fn quantity<T: Scalar>(name: &str, v: &ExtReal<T>, certification: Certification) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("quantity".into(), json!(name));
    m.insert("value".into(), value_json(v));
    if let Some(e) = exact_json(v) {
        m.insert("exact".into(), e);
    }
    m.insert("certification".into(), json!(certification.as_str()));
    m
}

pub fn fekete_json<T: Scalar>(k: &Kernel<T>, n: usize, s: &FeketeSystem<T>) -> Value {
    let mut m = quantity("D_n", &s.value, s.certification);
    m.insert("n".into(), json!(n));
    m.insert(
        "witness".into(),
        json!({"points": s.indices, "labels": labels(k, &s.indices)}),
    );
    Value::Object(m)
}

pub fn chebyshev_json<T: Scalar>(k: &Kernel<T>, n: usize, s: &ChebyshevSystem<T>) -> Value {
    let mut m = quantity("M_n", &s.value, s.certification);
    m.insert("n".into(), json!(n));
    m.insert(
        "witness".into(),
        json!({"zeros": s.zeros, "labels": labels(k, &s.zeros)}),
    );
    Value::Object(m)
}

/// `name` is `D` or `M`; the running sup is a lower bound on the limit.
pub fn trace_json<T: Scalar>(name: &str, t: &Trace<T>) -> Value {
    let entries: Vec<Value> = t
        .entries
        .iter()
        .map(|e| {
            let mut m = Map::new();
            m.insert("n".into(), json!(e.n));
            m.insert("value".into(), value_json(&e.value));
            if let Some(x) = exact_json(&e.value) {
                m.insert("exact".into(), x);
            }
            m.insert("status".into(), json!(e.status()));
            m.insert("witness".into(), json!(e.witness));
            Value::Object(m)
        })
        .collect();
    let mut m = Map::new();
    m.insert("quantity".into(), json!(name));
    m.insert("entries".into(), Value::Array(entries));
    match &t.running_sup {
        Some(v) => {
            m.insert("running_sup".into(), value_json(v));
            m.insert("running_sup_bound".into(), json!("lower"));
        }
        None => {
            m.insert("running_sup".into(), Value::Null);
        }
    }
    m.insert("traces".into(), json!({ "csv": t.to_csv() }));
    Value::Object(m)
}

pub fn equilibrium_json<T: Scalar>(r: &EquilibriumResult<T>, continuum: Option<&ContinuumEstimate>) -> Value {
    let mut m = quantity("w", &r.w_value, r.certification);
    m.insert(
        "witness".into(),
        r.minimizer.as_ref().map_or(Value::Null, measure_json),
    );
    if let Some(c) = continuum {
        m.insert(
            "continuum_estimate".into(),
            json!({
                "value": value_json(&c.value),
                "method": c.method,
                "certification": Certification::HeuristicUpperBound.as_str(),
            }),
        );
    }
    Value::Object(m)
}

pub fn minimax_json<T: Scalar>(m: &MinimaxEnergies<T>) -> Value {
    let mut out = Map::new();
    out.insert("quantity".into(), json!("uvq"));
    out.insert("certification".into(), json!(Certification::certified::<T>().as_str()));
    let mut witnesses = Map::new();
    for (name, v, w) in [("u", &m.u, &m.u_witness), ("v", &m.v, &m.v_witness), ("q", &m.q, &m.q_witness)] {
        out.insert(name.into(), value_json(v));
        if let Some(e) = exact_json(v) {
            out.insert(format!("{name}_exact"), e);
        }
        witnesses.insert(name.into(), w.as_ref().map_or(Value::Null, measure_json));
    }
    out.insert("witnesses".into(), Value::Object(witnesses));
    Value::Object(out)
}

pub fn rendezvous_json<T: Scalar>(r: &RendezvousResult<T>) -> Value {
    let mut m = quantity("rendezvous", &r.r_value, Certification::certified::<T>());
    m.insert(
        "invariant_measure".into(),
        r.invariant_measure.as_ref().map_or(Value::Null, measure_json),
    );
    m.insert(
        "constancy_defect".into(),
        r.constancy_defect
            .as_ref()
            .map_or(Value::Null, |d| scalar_json(d)),
    );
    Value::Object(m)
}

pub fn frostman_json(r: &FrostmanReport) -> Value {
    let cond = |c: &crate::energy::ConditionCheck| json!({"ok": c.ok, "violations": c.violations});
    json!({
        "lower": cond(&r.lower),
        "support_upper": cond(&r.support_upper),
        "atom_equality": cond(&r.atom_equality),
        "exceptional_points": r.exceptional_points,
        "passes": r.passes(),
    })
}

pub fn witness_json<T: Scalar>(k: &Kernel<T>, w: &MaxPrincipleWitness<T>) -> Value {
    json!({
        "measure": measure_json(&w.measure),
        "exterior": w.exterior,
        "exterior_label": k.space().point(w.exterior).to_string(),
        "gap": value_json(&w.gap),
    })
}

pub fn verdict_json<T: Scalar>(k: &Kernel<T>, v: &MaxPrincipleVerdict<T>) -> Value {
    json!({
        "quantity": "max_principle",
        "holds": v.holds,
        "certification": Certification::certified::<T>().as_str(),
        "witness": v.witness.as_ref().map_or(Value::Null, |w| witness_json(k, w)),
        "pairs_checked": v.pairs_checked,
    })
}

pub fn equivalence_json<T: Scalar>(k: &Kernel<T>, r: &EquivalenceReport<T>) -> Value {
    let rows: Vec<Value> = r
        .rows
        .iter()
        .map(|row| {
            json!({
                "subset": row.subset,
                "q": value_json(&row.q),
                "w": value_json(&row.w),
                "equal": row.equal,
            })
        })
        .collect();
    json!({
        "mp_holds": r.mp_holds,
        "mp_witness": r.mp_witness.as_ref().map_or(Value::Null, |w| witness_json(k, w)),
        "consistent": r.consistent,
        "offending": r.offending,
        "rows": rows,
        "full_space": minimax_json(&r.full_space),
        "w": value_json(&r.w_full),
        "traces": {"D": r.d_trace.to_csv(), "M": r.m_trace.to_csv(), "subsets": r.table_csv()},
    })
}
