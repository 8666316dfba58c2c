//! Request parsing and dispatch for the `scalelab` command line tool.
//!
//! A request is a single JSON document. Matrix entries are `"num/den"`
//! strings or element documents; lattices and subspaces are given by a
//! matrix whose columns generate them.

use std::fmt;

use scalelab::groups::{heis_report, shift_report};
use scalelab::localfield::ElementDoc;
use scalelab::matrixlat::Lattice;
use scalelab::spectral::{
    adapted_lattice, characteristic_decomposition, classify_linear, dynamical_from, exponent_to_string,
    inner_scale_gl, scale_by_module, scale_by_polygon, scale_linear, subquotient_scales, with_precision_retry,
};
use scalelab::tidy::{scale_by_index, scale_oracle, tidiness_report, tidy_ball, DEFAULT_BUDGET};
use scalelab::{Error, FieldSpec, Matrix, Result};
use serde::Deserialize;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Scale,
    Decompose,
    Adapt,
    Tidy,
    Oracle,
    Classify,
    InnerScale,
    Subquotient,
    ShiftReport,
    HeisReport,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Scale => "scale",
            Command::Decompose => "decompose",
            Command::Adapt => "adapt",
            Command::Tidy => "tidy",
            Command::Oracle => "oracle",
            Command::Classify => "classify",
            Command::InnerScale => "inner-scale",
            Command::Subquotient => "subquotient",
            Command::ShiftReport => "shift-report",
            Command::HeisReport => "heis-report",
        };
        f.write_str(name)
    }
}

/// Overrides given on the command line; they win over the request.
#[derive(Clone, Copy, Debug, Default)]
pub struct Options {
    pub precision: Option<u32>,
    pub window: Option<i64>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
}

type MatrixDoc = Vec<Vec<ElementDoc>>;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub field: Option<FieldSpec>,
    pub matrix: Option<MatrixDoc>,
    pub lattice: Option<MatrixDoc>,
    pub subspace: Option<MatrixDoc>,
    pub radius: Option<i64>,
    pub epsilon: Option<i64>,
    pub p: Option<u32>,
    pub window: Option<i64>,
    pub precision: Option<u32>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
}

/// Machine-readable report plus a one-line summary for humans.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub summary: String,
}

pub fn parse_request(text: &str) -> Result<Request> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn run_str(command: Command, text: &str, opts: &Options) -> Result<Outcome> {
    run(command, &parse_request(text)?, opts)
}

pub fn run(command: Command, req: &Request, opts: &Options) -> Result<Outcome> {
    if opts.budget == Some(0) || req.budget == Some(0) {
        return Err(Error::Parse("budget must be at least 1".into()));
    }
    let mut out = match command {
        Command::ShiftReport => shift(req, opts)?,
        Command::HeisReport => heis(req, opts)?,
        _ => with_matrix(command, req, opts)?,
    };
    if let Value::Object(map) = &mut out.report {
        map.insert("command".into(), json!(command.to_string()));
    }
    Ok(out)
}

fn field(req: &Request, opts: &Options) -> Result<FieldSpec> {
    let spec = req.field.ok_or_else(|| Error::Parse("missing \"field\"".into()))?;
    match opts.precision.or(req.precision) {
        Some(n) => spec.with_precision(n),
        None => Ok(spec),
    }
}

fn square(doc: &Option<MatrixDoc>, spec: FieldSpec) -> Result<Matrix> {
    let doc = doc.as_ref().ok_or_else(|| Error::Parse("missing \"matrix\"".into()))?;
    if doc.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    let m = Matrix::from_doc(doc, spec)?;
    if !m.is_square() {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    Ok(m)
}

fn columns(doc: &MatrixDoc, spec: FieldSpec, n: usize, what: &str) -> Result<Matrix> {
    let m = Matrix::from_doc(doc, spec)?;
    if m.rows() != n {
        return Err(Error::DimensionMismatch(format!("{what} must have {n} rows")));
    }
    Ok(m)
}

fn with_matrix(command: Command, req: &Request, opts: &Options) -> Result<Outcome> {
    let spec = field(req, opts)?;
    let (used, out) = with_precision_retry(spec, |s| {
        let a = square(&req.matrix, s)?;
        Ok((s, dispatch(command, &a, req, opts)?))
    })?;
    let mut out = out;
    if let Value::Object(map) = &mut out.report {
        map.insert("field".into(), json!(used));
        map.insert("precision_used".into(), json!(used.precision()));
    }
    Ok(out)
}

fn dispatch(command: Command, a: &Matrix, req: &Request, opts: &Options) -> Result<Outcome> {
    let spec = a.spec();
    let n = a.rows();
    match command {
        Command::Scale => {
            let s = scale_by_polygon(a)?;
            let module = scale_by_module(a)?;
            let index = scale_by_index(a)?;
            Ok(Outcome {
                summary: format!("scale {} over {spec}", s.value()),
                report: json!({
                    "scale": s,
                    "route": "polygon",
                    "cross_checks": { "module": module, "index": index },
                    "routes_agree": s == module && s == index,
                }),
            })
        }
        Command::Decompose => {
            let dec = characteristic_decomposition(a)?;
            let dyn_ = dynamical_from(&dec, n);
            let components: Vec<Value> = dec
                .components
                .iter()
                .map(|c| {
                    json!({
                        "rho_exponent": exponent_to_string(c.rho_exponent),
                        "multiplicity": c.multiplicity,
                        "basis": c.basis.to_doc(),
                    })
                })
                .collect();
            let subspaces: serde_json::Map<String, Value> = dyn_
                .named()
                .iter()
                .map(|(name, m)| (name.to_string(), json!({ "dim": m.cols(), "basis": m.to_doc() })))
                .collect();
            Ok(Outcome {
                summary: format!("{} characteristic components over {spec}", components.len()),
                report: json!({ "components": components, "dynamical_subspaces": subspaces, "route": "polygon" }),
            })
        }
        Command::Adapt => {
            let eps = req.epsilon.unwrap_or(1);
            let norm = adapted_lattice(a, eps)?;
            let r = req.radius.unwrap_or(0);
            let components: Vec<Value> = norm
                .components
                .iter()
                .map(|c| {
                    json!({
                        "rho_exponent": exponent_to_string(c.rho_exponent),
                        "basis": c.basis.to_doc(),
                        "denominator": c.denominator,
                        "levels": c.levels.iter().map(|l| l.to_doc()).collect::<Vec<_>>(),
                    })
                })
                .collect();
            Ok(Outcome {
                summary: format!("adapted norm with {} components over {spec}", components.len()),
                report: json!({
                    "components": components,
                    "epsilon_exponent": eps,
                    "radius": r,
                    "ball": norm.ball(r).to_doc(),
                }),
            })
        }
        Command::Tidy => {
            let l = match (&req.lattice, req.radius) {
                (Some(doc), _) => Lattice::from_generators(&columns(doc, spec, n, "lattice")?),
                (None, Some(r)) => tidy_ball(a, r)?,
                (None, None) => Lattice::standard(spec, n),
            };
            if !l.is_full_rank() {
                return Err(Error::RankMismatch);
            }
            let report = tidiness_report(a, &l)?;
            let mut v = report.to_json();
            v["tidy"] = json!(report.is_tidy());
            v["scale"] = json!(report.scale_claim);
            v["route"] = json!("index");
            let summary = match report.scale_claim {
                Some(s) => format!("tidy, scale {}", s.value()),
                None => format!("not tidy, displacement {}", report.displacement.value()),
            };
            Ok(Outcome { report: v, summary })
        }
        Command::Oracle => {
            let k = opts.window.or(req.window).unwrap_or(1);
            if !(0..=16).contains(&k) {
                return Err(Error::Parse("window exponent must lie in 0..=16".into()));
            }
            let budget = opts.budget.or(req.budget).unwrap_or(DEFAULT_BUDGET);
            let r = scale_oracle(a, k as u32, budget)?;
            let s = scale_linear(a)?;
            let mut v = r.to_json();
            v["route"] = json!("oracle");
            v["window"] = json!(k);
            v["budget"] = json!(budget);
            v["scale"] = json!({ "value": s, "route": "polygon" });
            v["bound_holds"] = json!(r.min_index.exponent >= s.exponent);
            Ok(Outcome {
                summary: format!("oracle minimum {} (scale {}) from {} candidates", r.min_index.value(), s.value(), r.candidates_examined),
                report: v,
            })
        }
        Command::Classify => {
            let class = classify_linear(a)?;
            let dec = characteristic_decomposition(a)?;
            let values: Vec<Value> = dec
                .components
                .iter()
                .map(|c| json!({ "rho_exponent": exponent_to_string(c.rho_exponent), "multiplicity": c.multiplicity }))
                .collect();
            Ok(Outcome {
                summary: json!(class).as_str().unwrap_or_default().to_string(),
                report: json!({ "classification": class, "characteristic_values": values, "route": "polygon" }),
            })
        }
        Command::InnerScale => {
            let s = inner_scale_gl(a)?;
            Ok(Outcome {
                summary: format!("inner scale {} over {spec}", s.value()),
                report: json!({ "scale": s, "route": "polygon", "conjugation_dim": n * n }),
            })
        }
        Command::Subquotient => {
            let doc = req.subspace.as_ref().ok_or_else(|| Error::Parse("missing \"subspace\"".into()))?;
            let f = columns(doc, spec, n, "subspace")?;
            let r = subquotient_scales(a, &f)?;
            Ok(Outcome {
                summary: format!("sub {} x quotient {} = total {}", r.sub.value(), r.quotient.value(), r.total.value()),
                report: json!({
                    "sub": r.sub,
                    "quotient": r.quotient,
                    "total": r.total,
                    "product_holds": r.total == r.sub.mul(&r.quotient),
                    "route": "polygon",
                }),
            })
        }
        Command::ShiftReport | Command::HeisReport => unreachable!("handled without a matrix"),
    }
}

fn prime(req: &Request) -> Result<u32> {
    req.p.ok_or_else(|| Error::Parse("missing \"p\"".into()))
}

fn shift(req: &Request, opts: &Options) -> Result<Outcome> {
    let p = prime(req)?;
    let w = opts.window.or(req.window).unwrap_or(4);
    if w > 64 {
        return Err(Error::Parse("window radius must be at most 64".into()));
    }
    let seed = opts.seed.or(req.seed).unwrap_or(0);
    let r = shift_report(p, w, seed)?;
    let ok = r.all_match();
    let mut v = serde_json::to_value(&r).map_err(|e| Error::Parse(e.to_string()))?;
    v["p"] = json!(p);
    v["window"] = json!(w);
    v["seed"] = json!(seed);
    Ok(Outcome { report: v, summary: format!("shift p={p} W={w}: all claims match = {ok}") })
}

fn heis(req: &Request, opts: &Options) -> Result<Outcome> {
    let p = prime(req)?;
    let n = opts.precision.or(req.precision).unwrap_or(16);
    let seed = opts.seed.or(req.seed).unwrap_or(0);
    let r = heis_report(p, n, seed)?;
    let ok = r.all_match();
    let mut v = serde_json::to_value(&r).map_err(|e| Error::Parse(e.to_string()))?;
    v["p"] = json!(p);
    v["precision"] = json!(n);
    v["seed"] = json!(seed);
    Ok(Outcome { report: v, summary: format!("heisenberg p={p} N={n}: all claims match = {ok}") })
}

pub fn exit_code(e: &Error) -> i32 {
    e.exit_code()
}
