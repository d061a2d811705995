//! JSON encodings. Rationals are strings; any non-integer JSON number is rejected.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::folding::OntoMap;
use crate::iso::Graph;
use crate::linalg::{IVec, IndexSet};
use crate::lp::{LinearProgram, LpVerdict};
use crate::rational::{format_rat, parse_rat, Rat};
use crate::sdp::{SdpSet, SymSparse};
use crate::sos::{BlockCertificate, Monomial, PolySystem, Polynomial, PseudoExpectation};

/// Parses text, annotating syntax errors with line and column, and rejects floats.
pub fn parse(text: &str) -> Result<Value> {
    let v: Value = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))?;
    reject_floats(&v, "$")?;
    Ok(v)
}

fn reject_floats(v: &Value, path: &str) -> Result<()> {
    match v {
        Value::Number(n) if n.is_f64() => Err(Error::Parse(format!("{path}: floating-point number {n} is not allowed"))),
        Value::Array(a) => a.iter().enumerate().try_for_each(|(i, x)| reject_floats(x, &format!("{path}[{i}]"))),
        Value::Object(o) => o.iter().try_for_each(|(k, x)| reject_floats(x, &format!("{path}.{k}"))),
        _ => Ok(()),
    }
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("{path}: missing field \"{key}\"")))
}

fn as_str<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    v.as_str().ok_or_else(|| Error::Parse(format!("{path}: expected a string")))
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| Error::Parse(format!("{path}: expected an array")))
}

fn as_object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object().ok_or_else(|| Error::Parse(format!("{path}: expected an object")))
}

fn as_u64(v: &Value, path: &str) -> Result<u64> {
    v.as_u64().ok_or_else(|| Error::Parse(format!("{path}: expected a nonnegative integer")))
}

/// A rational given as a string.
pub fn rat_value(v: &Value, path: &str) -> Result<Rat> {
    match v {
        Value::String(s) => parse_rat(s).map_err(|e| Error::Parse(format!("{path}: {e}"))),
        _ => Err(Error::Parse(format!("{path}: rationals must be strings such as \"-3/4\""))),
    }
}

fn strings(v: &Value, path: &str) -> Result<Vec<String>> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| as_str(x, &format!("{path}[{i}]")).map(str::to_string))
        .collect()
}

fn sparse_entries(index: &IndexSet, v: &Value, path: &str) -> Result<Vec<Rat>> {
    let mut out = vec![Rat::from_integer(0.into()); index.len()];
    for (k, x) in as_object(v, path)? {
        let p = index
            .position(k)
            .ok_or_else(|| Error::IndexMismatch(format!("{path}: unknown index \"{k}\"")))?;
        out[p] = rat_value(x, &format!("{path}.{k}"))?;
    }
    Ok(out)
}

fn sparse_object(index: &IndexSet, values: &[Rat]) -> Value {
    let m: Map<String, Value> = index
        .labels()
        .iter()
        .zip(values)
        .filter(|(_, v)| *v != &Rat::from_integer(0.into()))
        .map(|(k, v)| (k.clone(), Value::String(format_rat(v))))
        .collect();
    Value::Object(m)
}

pub fn ivec_from_json(v: &Value) -> Result<IVec> {
    let index = IndexSet::new(strings(field(v, "index_set", "$")?, "$.index_set")?)?;
    let values = match v.get("entries") {
        Some(e) => sparse_entries(&index, e, "$.entries")?,
        None => vec![Rat::from_integer(0.into()); index.len()],
    };
    IVec::new(index, values)
}

pub fn ivec_to_json(v: &IVec) -> Value {
    json!({ "index_set": v.index.labels(), "entries": sparse_object(&v.index, &v.values) })
}

/// `{"classes": {label: class}}` with classes numbered from 1; labels keep the order of `domain`.
pub fn onto_map_from_json(v: &Value, domain: &IndexSet) -> Result<OntoMap> {
    let classes = as_object(field(v, "classes", "$")?, "$.classes")?;
    let mut out = Vec::with_capacity(domain.len());
    for label in domain.labels() {
        let c = classes
            .get(label)
            .ok_or_else(|| Error::IndexMismatch(format!("$.classes: no class for \"{label}\"")))?;
        out.push(as_u64(c, &format!("$.classes.{label}"))? as usize);
    }
    if classes.len() != domain.len() {
        return Err(Error::IndexMismatch("$.classes: labels outside the index set".into()));
    }
    OntoMap::new(domain.clone(), out)
}

pub fn onto_map_to_json(s: &OntoMap) -> Value {
    let m: Map<String, Value> = s
        .domain()
        .labels()
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), json!(s.class_of(i))))
        .collect();
    json!({ "classes": m })
}

/// `{"variables", "objective": {..}, "constraints": [{"name", "coefficients": {..}, "rhs"}]}`; minimizes.
pub fn lp_from_json(v: &Value) -> Result<LinearProgram> {
    let vars = IndexSet::new(strings(field(v, "variables", "$")?, "$.variables")?)?;
    let objective = match v.get("objective") {
        Some(o) => sparse_entries(&vars, o, "$.objective")?,
        None => vec![Rat::from_integer(0.into()); vars.len()],
    };
    let mut lp = LinearProgram::new(vars.clone(), objective)?;
    let cons = match v.get("constraints") {
        Some(c) => as_array(c, "$.constraints")?.clone(),
        None => Vec::new(),
    };
    for (i, c) in cons.iter().enumerate() {
        let path = format!("$.constraints[{i}]");
        let name = match c.get("name") {
            Some(n) => as_str(n, &format!("{path}.name"))?.to_string(),
            None => format!("c{i}"),
        };
        let row = sparse_entries(&vars, field(c, "coefficients", &path)?, &format!("{path}.coefficients"))?;
        let rhs = rat_value(field(c, "rhs", &path)?, &format!("{path}.rhs"))?;
        lp.add_constraint(name, row, rhs)?;
    }
    Ok(lp)
}

pub fn lp_verdict_to_json(v: &LpVerdict) -> Value {
    let verdict = match v.flag {
        0 => "OPTIMAL",
        1 => "UNBOUNDED",
        _ => "INFEASIBLE",
    };
    let mut out = json!({ "verdict": verdict, "flag": v.flag });
    if let Some(s) = &v.solution {
        out["solution"] = ivec_to_json(s);
    }
    if let Some(val) = &v.value {
        out["value"] = Value::String(format_rat(val));
    }
    out
}

/// `{"J", "M", "A": {id: [[i, j, "v"], ...]}, "b": {id: "v"}, "R"?}` with `i`, `j` labels of `J`.
/// Returns the set and the optional radius.
pub fn sdp_from_json(v: &Value) -> Result<(SdpSet, Option<Rat>)> {
    let j = IndexSet::new(strings(field(v, "J", "$")?, "$.J")?)?;
    let ids = strings(field(v, "M", "$")?, "$.M")?;
    let a = as_object(field(v, "A", "$")?, "$.A")?;
    let b = as_object(field(v, "b", "$")?, "$.b")?;
    let mut set = SdpSet::new(j.clone());
    for id in &ids {
        let path = format!("$.A.{id}");
        let entries = match a.get(id) {
            Some(e) => as_array(e, &path)?.clone(),
            None => Vec::new(),
        };
        let mut triples = Vec::new();
        for (k, e) in entries.iter().enumerate() {
            let p = format!("{path}[{k}]");
            let t = as_array(e, &p)?;
            if t.len() != 3 {
                return Err(Error::Parse(format!("{p}: expected [row, column, \"value\"]")));
            }
            let r = j.require(as_str(&t[0], &p)?)?;
            let c = j.require(as_str(&t[1], &p)?)?;
            triples.push((r.min(c), r.max(c), rat_value(&t[2], &p)?));
        }
        let rhs = rat_value(b.get(id).ok_or_else(|| Error::Parse(format!("$.b: missing \"{id}\"")))?, &format!("$.b.{id}"))?;
        set.add_constraint(id.clone(), SymSparse::from_entries(triples), rhs)?;
    }
    if a.keys().any(|k| !ids.contains(k)) || b.keys().any(|k| !ids.contains(k)) {
        return Err(Error::IndexMismatch("constraint ids in A or b missing from M".into()));
    }
    let radius = match v.get("R") {
        Some(r) => Some(rat_value(r, "$.R")?),
        None => None,
    };
    Ok((set, radius))
}

pub fn sdp_to_json(set: &SdpSet, radius: Option<&Rat>) -> Value {
    let labels = set.j.labels();
    let mut a = Map::new();
    let mut b = Map::new();
    for (i, id) in set.constraint_names.iter().enumerate() {
        let entries: Vec<Value> = set.a[i]
            .entries
            .iter()
            .map(|(r, c, v)| json!([labels[*r], labels[*c], format_rat(v)]))
            .collect();
        a.insert(id.clone(), Value::Array(entries));
        b.insert(id.clone(), Value::String(format_rat(&set.b[i])));
    }
    let mut out = json!({ "J": labels, "M": set.constraint_names, "A": a, "b": b });
    if let Some(r) = radius {
        out["R"] = Value::String(format_rat(r));
    }
    out
}

fn exponents_json(m: &Monomial, vars: &[String]) -> Value {
    let o: Map<String, Value> = m
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| (vars[i].clone(), json!(e)))
        .collect();
    Value::Object(o)
}

pub fn polynomial_to_json(p: &Polynomial, vars: &[String]) -> Value {
    let terms: Vec<Value> = p
        .terms()
        .map(|(m, c)| json!({ "coef": format_rat(c), "exponents": exponents_json(m, vars) }))
        .collect();
    Value::Array(terms)
}

fn polynomial_from_json(v: &Value, vars: &[String], path: &str) -> Result<Polynomial> {
    let n = vars.len();
    let mut p = Polynomial::zero(n);
    for (i, t) in as_array(v, path)?.iter().enumerate() {
        let tp = format!("{path}[{i}]");
        let coef = rat_value(field(t, "coef", &tp)?, &format!("{tp}.coef"))?;
        let mut exps = vec![0u32; n];
        if let Some(e) = t.get("exponents") {
            for (name, deg) in as_object(e, &format!("{tp}.exponents"))? {
                let k = vars
                    .iter()
                    .position(|x| x == name)
                    .ok_or_else(|| Error::Parse(format!("{tp}.exponents: undeclared variable \"{name}\"")))?;
                exps[k] = u32::try_from(as_u64(deg, &format!("{tp}.exponents.{name}"))?)
                    .map_err(|_| Error::Parse(format!("{tp}: exponent too large")))?;
            }
        }
        p.add_term(Monomial::from_exponents(exps), coef);
    }
    Ok(p)
}

/// `{"variables", "inequalities": [{"name", "terms"}], "equations": [...]}`.
pub fn poly_system_from_json(v: &Value) -> Result<PolySystem> {
    let vars = strings(field(v, "variables", "$")?, "$.variables")?;
    let mut sys = PolySystem::new(vars.clone())?;
    for (key, eq) in [("inequalities", false), ("equations", true)] {
        let Some(list) = v.get(key) else { continue };
        for (i, item) in as_array(list, &format!("$.{key}"))?.iter().enumerate() {
            let path = format!("$.{key}[{i}]");
            let name = match item.get("name") {
                Some(n) => as_str(n, &format!("{path}.name"))?.to_string(),
                None => format!("{key}{i}"),
            };
            let p = polynomial_from_json(field(item, "terms", &path)?, &vars, &format!("{path}.terms"))?;
            if eq {
                sys.add_equation(name, p)?;
            } else {
                sys.add_inequality(name, p)?;
            }
        }
    }
    Ok(sys)
}

/// Writes every stored polynomial as an inequality; equations appear as their two halves.
pub fn poly_system_to_json(sys: &PolySystem) -> Value {
    let ineqs: Vec<Value> = sys
        .polys
        .iter()
        .map(|(n, p)| json!({ "name": n, "terms": polynomial_to_json(p, &sys.variables) }))
        .collect();
    json!({ "variables": sys.variables, "inequalities": ineqs, "equations": [] })
}

pub fn graph_from_json(v: &Value) -> Result<Graph> {
    let vertices = strings(field(v, "vertices", "$")?, "$.vertices")?;
    let mut edges = Vec::new();
    if let Some(e) = v.get("edges") {
        for (i, pair) in as_array(e, "$.edges")?.iter().enumerate() {
            let p = strings(pair, &format!("$.edges[{i}]"))?;
            if p.len() != 2 {
                return Err(Error::Parse(format!("$.edges[{i}]: expected two vertices")));
            }
            edges.push((p[0].clone(), p[1].clone()));
        }
    }
    Graph::new(vertices, &edges)
}

pub fn graph_to_json(g: &Graph) -> Value {
    let edges: Vec<Value> = g.edges().into_iter().map(|(a, b)| json!([a, b])).collect();
    json!({ "vertices": g.vertices(), "edges": edges })
}

pub fn certificate_to_json(cert: &BlockCertificate, vars: &[String], epsilon: &Rat) -> Value {
    let blocks: Vec<Value> = cert
        .blocks
        .iter()
        .filter(|b| !b.entries.is_empty())
        .map(|b| {
            let basis = crate::sos::monomials_up_to(cert.n_vars, b.budget);
            let entries: Vec<Value> = b.entries.iter().map(|(i, j, v)| json!([i, j, format_rat(v)])).collect();
            json!({
                "name": b.name,
                "polynomial": polynomial_to_json(&b.poly, vars),
                "basis": basis.iter().map(|m| m.display(vars)).collect::<Vec<_>>(),
                "entries": entries,
            })
        })
        .collect();
    json!({ "degree": 2 * cert.degree, "epsilon": format_rat(epsilon), "blocks": blocks })
}

pub fn pseudoexpectation_to_json(f: &PseudoExpectation, vars: &[String]) -> Value {
    let values: BTreeMap<String, String> = f.values.iter().map(|(m, v)| (m.display(vars), format_rat(v))).collect();
    json!({ "degree_bound": f.degree_bound, "values": values })
}
