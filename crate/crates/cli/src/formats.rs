//! JSON file formats.
//!
//! Scalars are strings: rationals in canonical `"n"` / `"n/d"` form, floats
//! as decimals. Polynomials are arrays of coefficients in ascending degree.
//! Objects are emitted with sorted keys, so equal values give equal bytes.

use coupling_core::coupling::{CheckResult, VerificationReport};
use coupling_core::peakon::{ChSpectralData, Multipeakon, PeakonError};
use coupling_core::scalar::{parse_rational, Float, Rational, Scalar, ScalarKind};
use coupling_core::string::{DiscreteString, StringError, StringSpectralData};
use coupling_core::{
    CfTriple, ContinuedFraction, Coupling, CouplingData, CouplingError, HerglotzError, Polynomial,
    SolutionPair, SolverTrace,
};
use serde_json::{json, Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error(transparent)]
    Coupling(#[from] CouplingError),
    #[error(transparent)]
    Herglotz(#[from] HerglotzError),
    #[error(transparent)]
    String(#[from] StringError),
    #[error(transparent)]
    Peakon(#[from] PeakonError),
}

fn schema(path: &str, message: impl Into<String>) -> FormatError {
    FormatError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Names of the verification checks, in report order.
pub const CHECK_NAMES: [&str; 5] = ["C", "G", "N", "bound", "residue_signs"];

/// A coupling problem of either scalar kind.
#[derive(Clone, Debug, PartialEq)]
pub enum Problem {
    Rational(CouplingData<Rational>),
    Float(CouplingData<Float>),
}

impl Problem {
    pub fn kind(&self) -> ScalarKind {
        match self {
            Problem::Rational(_) => ScalarKind::Rational,
            Problem::Float(_) => ScalarKind::Float,
        }
    }
}

pub fn parse_kind(s: &str) -> Result<ScalarKind, String> {
    match s {
        "rational" => Ok(ScalarKind::Rational),
        "float" => Ok(ScalarKind::Float),
        other => Err(format!(
            "unknown kind `{other}` (expected rational or float)"
        )),
    }
}

fn to_json(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values are serializable");
    s.push('\n');
    s
}

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>, FormatError> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value, FormatError> {
    obj.get(key)
        .ok_or_else(|| schema(&format!("{path}.{key}"), "missing field"))
}

fn str_array<'a>(v: &'a Value, path: &str) -> Result<Vec<&'a str>, FormatError> {
    let items = v
        .as_array()
        .ok_or_else(|| schema(path, "expected an array of strings"))?;
    items
        .iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_str()
                .ok_or_else(|| schema(&format!("{path}[{i}]"), "expected a string"))
        })
        .collect()
}

fn scalar<T: Scalar>(s: &str, path: &str) -> Result<T, FormatError> {
    let r = parse_rational(s).map_err(|e| schema(path, e.to_string()))?;
    Ok(T::from_rational(&r))
}

fn scalars<T: Scalar>(
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<Vec<T>, FormatError> {
    let path = format!("{path}.{key}");
    str_array(field(obj, key, &path)?, &path)?
        .into_iter()
        .enumerate()
        .map(|(i, s)| scalar(s, &format!("{path}[{i}]")))
        .collect()
}

fn polynomial<T: Scalar>(
    obj: &Map<String, Value>,
    key: &str,
    path: &str,
) -> Result<Polynomial<T>, FormatError> {
    Ok(Polynomial::new(scalars(obj, key, path)?))
}

fn strings<T: Scalar>(xs: &[T]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

fn poly_value<T: Scalar>(p: &Polynomial<T>) -> Value {
    if p.is_zero() {
        json!(["0"])
    } else {
        strings(p.coeffs())
    }
}

fn coupling_str<T: Scalar>(e: &Coupling<T>) -> String {
    e.to_string()
}

/// Parses a problem file. `kind` overrides the file's `"kind"` field, which
/// defaults to rational. Floats take the current default precision.
pub fn parse_problem(bytes: &[u8], kind: Option<ScalarKind>) -> Result<Problem, FormatError> {
    let v: Value = serde_json::from_slice(bytes)?;
    let obj = object(&v, "$")?;
    let file_kind = match obj.get("kind") {
        None => ScalarKind::Rational,
        Some(k) => {
            let s = k
                .as_str()
                .ok_or_else(|| schema("$.kind", "expected a string"))?;
            parse_kind(s).map_err(|e| schema("$.kind", e))?
        }
    };
    Ok(match kind.unwrap_or(file_kind) {
        ScalarKind::Rational => Problem::Rational(problem_data(obj)?),
        ScalarKind::Float => Problem::Float(problem_data(obj)?),
    })
}

fn problem_data<T: Scalar>(obj: &Map<String, Value>) -> Result<CouplingData<T>, FormatError> {
    let sigma = scalars(obj, "sigma", "$")?;
    let eta_path = "$.eta";
    let eta = str_array(field(obj, "eta", "$")?, eta_path)?
        .into_iter()
        .enumerate()
        .map(|(i, s)| match s.trim() {
            "inf" => Ok(Coupling::Infinite),
            s => scalar(s, &format!("{eta_path}[{i}]")).map(Coupling::Finite),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CouplingData::from_parts(sigma, eta)?)
}

pub fn emit_problem<T: Scalar>(d: &CouplingData<T>) -> String {
    let eta: Vec<Value> = d
        .eta()
        .iter()
        .map(|e| Value::String(coupling_str(e)))
        .collect();
    to_json(&json!({
        "eta": eta,
        "kind": T::KIND.name(),
        "sigma": strings(d.sigma()),
    }))
}

pub fn trace_value<T: Scalar>(t: &SolverTrace<T>) -> Value {
    let cf: Vec<Value> =
        t.cf.triples
            .iter()
            .map(|c| {
                json!({
                    "l": c.l.to_string(),
                    "omega": c.omega.to_string(),
                    "upsilon": c.upsilon.to_string(),
                })
            })
            .collect();
    json!({
        "cf": cf,
        "delta": t.delta.to_string(),
        "n0": t.n0,
        "sigma_minus": strings(&t.sigma_minus),
        "sigma_plus": strings(&t.sigma_plus),
    })
}

fn parse_trace<T: Scalar>(v: &Value, path: &str) -> Result<SolverTrace<T>, FormatError> {
    let obj = object(v, path)?;
    let cf_path = format!("{path}.cf");
    let triples = field(obj, "cf", path)?
        .as_array()
        .ok_or_else(|| schema(&cf_path, "expected an array"))?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = format!("{cf_path}[{i}]");
            let o = object(t, &p)?;
            let get = |key: &str| -> Result<T, FormatError> {
                let kp = format!("{p}.{key}");
                let s = field(o, key, &p)?
                    .as_str()
                    .ok_or_else(|| schema(&kp, "expected a string"))?;
                scalar(s, &kp)
            };
            Ok(CfTriple {
                l: get("l")?,
                omega: get("omega")?,
                upsilon: get("upsilon")?,
            })
        })
        .collect::<Result<Vec<_>, FormatError>>()?;
    let n0 = field(obj, "n0", path)?
        .as_u64()
        .ok_or_else(|| schema(&format!("{path}.n0"), "expected a nonnegative integer"))?;
    let delta_path = format!("{path}.delta");
    let delta = field(obj, "delta", path)?
        .as_str()
        .ok_or_else(|| schema(&delta_path, "expected a string"))?;
    Ok(SolverTrace {
        cf: ContinuedFraction::new(triples)?,
        n0: n0 as usize,
        delta: scalar(delta, &delta_path)?,
        sigma_minus: scalars(obj, "sigma_minus", path)?,
        sigma_plus: scalars(obj, "sigma_plus", path)?,
    })
}

pub fn emit_trace<T: Scalar>(t: &SolverTrace<T>) -> String {
    to_json(&trace_value(t))
}

pub fn parse_trace_file<T: Scalar>(bytes: &[u8]) -> Result<SolverTrace<T>, FormatError> {
    parse_trace(&serde_json::from_slice(bytes)?, "$")
}

pub fn emit_solution<T: Scalar>(s: &SolutionPair<T>) -> String {
    let mut obj = Map::new();
    obj.insert("phi_minus".into(), poly_value(&s.phi_minus));
    obj.insert("phi_plus".into(), poly_value(&s.phi_plus));
    if let Some(t) = &s.trace {
        obj.insert("trace".into(), trace_value(t));
    }
    to_json(&Value::Object(obj))
}

pub fn parse_solution<T: Scalar>(bytes: &[u8]) -> Result<SolutionPair<T>, FormatError> {
    let v: Value = serde_json::from_slice(bytes)?;
    let obj = object(&v, "$")?;
    let trace = match obj.get("trace") {
        None | Some(Value::Null) => None,
        Some(t) => Some(parse_trace(t, "$.trace")?),
    };
    Ok(SolutionPair {
        phi_minus: polynomial(obj, "phi_minus", "$")?,
        phi_plus: polynomial(obj, "phi_plus", "$")?,
        trace,
    })
}

/// `{"checks": {name: "pass" | "fail"}, "failures": {name: [..]}, "passed": bool}`;
/// only failing checks appear under `failures`.
pub fn emit_report(r: &VerificationReport) -> String {
    let mut checks = Map::new();
    let mut failures = Map::new();
    for c in &r.checks {
        checks.insert(c.name.into(), json!(if c.passed { "pass" } else { "fail" }));
        if !c.failures.is_empty() {
            failures.insert(c.name.into(), json!(c.failures));
        }
    }
    to_json(&json!({
        "checks": checks,
        "failures": failures,
        "passed": r.passed(),
    }))
}

pub fn parse_report(bytes: &[u8]) -> Result<VerificationReport, FormatError> {
    let v: Value = serde_json::from_slice(bytes)?;
    let obj = object(&v, "$")?;
    let checks = object(field(obj, "checks", "$")?, "$.checks")?;
    let failures = match obj.get("failures") {
        Some(f) => object(f, "$.failures")?.clone(),
        None => Map::new(),
    };
    let mut out = Vec::with_capacity(CHECK_NAMES.len());
    for name in CHECK_NAMES {
        let Some(status) = checks.get(name) else {
            continue;
        };
        let path = format!("$.checks.{name}");
        let passed = match status.as_str() {
            Some("pass") => true,
            Some("fail") => false,
            _ => return Err(schema(&path, "expected \"pass\" or \"fail\"")),
        };
        let list = match failures.get(name) {
            Some(f) => str_array(f, &format!("$.failures.{name}"))?
                .into_iter()
                .map(String::from)
                .collect(),
            None => Vec::new(),
        };
        out.push(CheckResult {
            name,
            passed,
            failures: list,
        });
    }
    if let Some(unknown) = checks.keys().find(|k| !CHECK_NAMES.contains(&k.as_str())) {
        return Err(schema(&format!("$.checks.{unknown}"), "unknown check"));
    }
    Ok(VerificationReport { checks: out })
}

pub fn parse_string<T: Scalar>(bytes: &[u8]) -> Result<DiscreteString<T>, FormatError> {
    let v: Value = serde_json::from_slice(bytes)?;
    let obj = object(&v, "$")?;
    Ok(DiscreteString::new(
        scalars(obj, "positions", "$")?,
        scalars(obj, "masses", "$")?,
    )?)
}

pub fn emit_string<T: Scalar>(s: &DiscreteString<T>) -> String {
    to_json(&json!({
        "masses": strings(s.masses()),
        "positions": strings(s.positions()),
    }))
}

/// The `wronskian` field is informational: it is rebuilt from the
/// eigenvalues.
pub fn parse_spectral<T: Scalar>(bytes: &[u8]) -> Result<StringSpectralData<T>, FormatError> {
    let v: Value = serde_json::from_slice(bytes)?;
    let obj = object(&v, "$")?;
    Ok(StringSpectralData::new(
        scalars(obj, "eigenvalues", "$")?,
        scalars(obj, "norming_sq", "$")?,
    )?)
}

pub fn emit_spectral<T: Scalar>(d: &StringSpectralData<T>) -> String {
    to_json(&json!({
        "eigenvalues": strings(&d.eigenvalues),
        "norming_sq": strings(&d.norming_sq),
        "wronskian": poly_value(&d.wronskian),
    }))
}

pub fn parse_peakon(bytes: &[u8]) -> Result<Multipeakon<Float>, FormatError> {
    let v: Value = serde_json::from_slice(bytes)?;
    let obj = object(&v, "$")?;
    Ok(Multipeakon::new(
        scalars(obj, "q", "$")?,
        scalars(obj, "p", "$")?,
    )?)
}

pub fn emit_peakon(mp: &Multipeakon<Float>) -> String {
    to_json(&json!({
        "p": strings(mp.p()),
        "q": strings(mp.q()),
    }))
}

pub fn emit_ch_spectral(d: &ChSpectralData) -> String {
    to_json(&json!({
        "couplings0": strings(&d.couplings0),
        "eigenvalues": strings(&d.eigenvalues),
        "wronskian": poly_value(&d.wronskian),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> Rational {
        parse_rational(s).unwrap()
    }

    #[test]
    fn problem_examples() {
        let p = parse_problem(br#"{"sigma":["1"],"eta":["inf"],"kind":"rational"}"#, None).unwrap();
        let Problem::Rational(d) = p else {
            panic!("kind")
        };
        assert_eq!(d.sigma(), &[q("1")]);
        assert_eq!(d.eta(), &[Coupling::Infinite]);

        let p = parse_problem(
            br#"{"sigma":["3","9"],"eta":["1","-1"],"kind":"rational"}"#,
            None,
        )
        .unwrap();
        let Problem::Rational(d) = p else {
            panic!("kind")
        };
        assert_eq!(d.len(), 2);

        assert!(matches!(
            parse_problem(br#"{"sigma":["0"],"eta":["1"],"kind":"rational"}"#, None),
            Err(FormatError::Coupling(CouplingError::ZeroLambda))
        ));
        assert!(matches!(
            parse_problem(br#"{"sigma":["2","2"],"eta":["1","1"]}"#, None),
            Err(FormatError::Coupling(CouplingError::DuplicateLambda { .. }))
        ));
    }

    #[test]
    fn schema_errors_carry_a_path() {
        let e = parse_problem(br#"{"sigma":["1", 2],"eta":["1","1"]}"#, None).unwrap_err();
        assert_eq!(e.to_string(), "$.sigma[1]: expected a string");
        let e = parse_problem(br#"{"sigma":["1"]}"#, None).unwrap_err();
        assert_eq!(e.to_string(), "$.eta: missing field");
        let e = parse_problem(br#"{"sigma":["x"],"eta":["1"]}"#, None).unwrap_err();
        assert!(e.to_string().starts_with("$.sigma[0]:"), "{e}");
        let e =
            parse_problem(br#"{"sigma":["1"],"eta":["1"],"kind":"complex"}"#, None).unwrap_err();
        assert!(e.to_string().starts_with("$.kind:"), "{e}");
    }

    #[test]
    fn rationals_are_canonical() {
        let d = CouplingData::new(vec![
            (q("6/4"), Coupling::Finite(q("-4/18"))),
            (q("2"), Coupling::Infinite),
        ])
        .unwrap();
        let s = emit_problem(&d);
        assert!(
            s.contains("\"3/2\"")
                && s.contains("\"-2/9\"")
                && s.contains("\"2\"")
                && s.contains("\"inf\""),
            "{s}"
        );
        let back = parse_problem(s.as_bytes(), None).unwrap();
        assert_eq!(back, Problem::Rational(d));
    }

    #[test]
    fn report_shape() {
        let pass = VerificationReport {
            checks: CHECK_NAMES
                .iter()
                .map(|name| CheckResult {
                    name,
                    passed: true,
                    failures: vec![],
                })
                .collect(),
        };
        let s = emit_report(&pass);
        let v: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(
            v["checks"],
            json!({"C":"pass","G":"pass","N":"pass","bound":"pass","residue_signs":"pass"})
        );
        assert_eq!(parse_report(s.as_bytes()).unwrap(), pass);
    }
}
