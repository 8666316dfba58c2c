//! Functions behind the browser demo. Each takes plain strings or numbers
//! and returns a JSON document; failures come back as `{"error": ...}`.

use scalelab::groups::{heis_report, shift_report};
use scalelab::localfield::ElementDoc;
use scalelab::polynomials::newton_polygon;
use scalelab::spectral::{
    characteristic_decomposition, classify_linear, dynamical_from, exponent_to_string, scale_by_module,
    scale_by_polygon, with_precision_retry,
};
use scalelab::tidy::{scale_by_index, tidiness_report, tidy_ball};
use scalelab::{Error, FieldSpec, Matrix, Result};
use serde_json::{json, Value};

fn finish(r: Result<Value>) -> String {
    match r {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e.to_string() }).to_string(),
    }
}

fn parse_field(kind: &str, p: u32, precision: u32) -> Result<FieldSpec> {
    match kind {
        "Qp" => FieldSpec::qp(p, precision),
        "FpX" => FieldSpec::fpx(p, precision),
        other => Err(Error::InvalidSpec(format!("unknown field kind {other:?}"))),
    }
}

/// Rows separated by newlines or `;`, entries by whitespace or `,`.
fn parse_rows(text: &str) -> Result<Vec<Vec<ElementDoc>>> {
    let rows: Vec<Vec<ElementDoc>> = text
        .split(['\n', ';'])
        .map(|r| r.split([' ', ',', '\t']).filter(|s| !s.is_empty()).map(|s| ElementDoc::Rational(s.into())).collect::<Vec<_>>())
        .filter(|r| !r.is_empty())
        .collect();
    if rows.is_empty() {
        return Err(Error::Parse("empty matrix".into()));
    }
    Ok(rows)
}

fn square(rows: &[Vec<ElementDoc>], spec: FieldSpec) -> Result<Matrix> {
    let m = Matrix::from_doc(rows, spec)?;
    if !m.is_square() {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    Ok(m)
}

/// Newton polygon of the characteristic polynomial, the characteristic
/// values and the scale by three routes.
pub fn polygon_json(kind: &str, p: u32, precision: u32, matrix: &str) -> String {
    finish((|| {
        let spec = parse_field(kind, p, precision)?;
        let rows = parse_rows(matrix)?;
        with_precision_retry(spec, |s| {
            let a = square(&rows, s)?;
            let f = a.char_poly()?;
            let poly = newton_polygon(&f)?;
            let points: Vec<Value> = f
                .coeffs()
                .iter()
                .enumerate()
                .filter_map(|(i, c)| c.valuation().map(|v| json!([i, v])))
                .collect();
            let segments: Vec<Value> = poly
                .segments
                .iter()
                .map(|seg| {
                    json!({
                        "slope": exponent_to_string(Some(seg.slope)),
                        "length": seg.length,
                        "root_abs": format!("{}^({})", s.q(), exponent_to_string(Some(seg.slope))),
                    })
                })
                .collect();
            let classification = if a.det()?.is_zero() { Value::Null } else { json!(classify_linear(&a)?) };
            Ok(json!({
                "field": s,
                "char_poly": f.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "points": points,
                "vertices": poly.vertices,
                "segments": segments,
                "zero_roots": poly.zero_roots,
                "scale": { "polygon": scale_by_polygon(&a)?, "module": scale_by_module(&a)?, "index": scale_by_index(&a)? },
                "classification": classification,
            }))
        })
    })())
}

/// Characteristic decomposition, dynamical subspaces and the tidiness
/// report for the tidy ball of the given radius and for the standard
/// lattice.
pub fn tidy_json(kind: &str, p: u32, precision: u32, matrix: &str, radius: i64) -> String {
    finish((|| {
        let spec = parse_field(kind, p, precision)?;
        let rows = parse_rows(matrix)?;
        with_precision_retry(spec, |s| {
            let a = square(&rows, s)?;
            let n = a.rows();
            let dec = characteristic_decomposition(&a)?;
            let dyn_ = dynamical_from(&dec, n);
            let show = |m: &Matrix| -> Vec<Vec<String>> {
                (0..m.rows()).map(|i| m.row(i).iter().map(|x| x.to_string()).collect()).collect()
            };
            let components: Vec<Value> = dec
                .components
                .iter()
                .map(|c| json!({ "rho_exponent": exponent_to_string(c.rho_exponent), "basis": show(&c.basis) }))
                .collect();
            let dims: serde_json::Map<String, Value> =
                dyn_.named().iter().map(|(name, m)| (name.to_string(), json!(m.cols()))).collect();
            let ball = tidy_ball(&a, radius)?;
            let at_ball = tidiness_report(&a, &ball)?;
            let standard = tidiness_report(&a, &scalelab::Lattice::standard(s, n))?;
            let summary = |r: &scalelab::tidy::TidyReport| {
                json!({
                    "basis": show(&r.input_lattice.basis()),
                    "u_plus": show(&r.u_plus.basis()),
                    "u_minus": show(&r.u_minus.basis()),
                    "tidy_above": r.tidy_above,
                    "tidy_below": r.tidy_below,
                    "displacement": r.displacement,
                    "scale": r.scale_claim,
                })
            };
            Ok(json!({
                "field": s,
                "components": components,
                "dynamical_dims": dims,
                "ball": summary(&at_ball),
                "standard": summary(&standard),
            }))
        })
    })())
}

/// The report for the shift example (`"shift"`) or the Heisenberg
/// example (`"heisenberg"`).
pub fn group_json(example: &str, p: u32, size: u32, seed: u64) -> String {
    finish((|| {
        let r = match example {
            "shift" => shift_report(p, size as i64, seed)?,
            "heisenberg" => heis_report(p, size, seed)?,
            other => return Err(Error::Parse(format!("unknown example {other:?}"))),
        };
        Ok(json!({ "all_match": r.all_match(), "report": r }))
    })())
}

#[cfg(target_arch = "wasm32")]
mod wasm {
    use wasm_bindgen::prelude::*;

    #[wasm_bindgen]
    pub fn polygon(kind: &str, p: u32, precision: u32, matrix: &str) -> String {
        super::polygon_json(kind, p, precision, matrix)
    }

    #[wasm_bindgen]
    pub fn tidy(kind: &str, p: u32, precision: u32, matrix: &str, radius: i32) -> String {
        super::tidy_json(kind, p, precision, matrix, radius as i64)
    }

    #[wasm_bindgen]
    pub fn group(example: &str, p: u32, size: u32, seed: u32) -> String {
        super::group_json(example, p, size, seed as u64)
    }
}
