//! Polynomials over a local field, Newton polygons and slope factorization.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localfield::{AbsValue, ElementDoc, FieldElement, FieldSpec, EXACT};
use crate::matrixlat::Matrix;

/// Dense univariate polynomial, constant term first.
#[derive(Clone, Debug)]
pub struct Poly {
    spec: FieldSpec,
    coeffs: Vec<FieldElement>,
}

impl Poly {
    /// Trailing coefficients that vanish to precision are dropped.
    pub fn new(spec: FieldSpec, mut coeffs: Vec<FieldElement>) -> Result<Self> {
        if coeffs.iter().any(|c| c.spec() != spec) {
            return Err(Error::SpecMismatch);
        }
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Ok(Poly { spec, coeffs })
    }

    pub fn from_strs(spec: FieldSpec, coeffs: &[&str]) -> Result<Self> {
        let c = coeffs.iter().map(|s| FieldElement::parse(s, spec)).collect::<Result<Vec<_>>>()?;
        Self::new(spec, c)
    }

    pub fn zero(spec: FieldSpec) -> Self {
        Poly { spec, coeffs: Vec::new() }
    }

    pub fn one(spec: FieldSpec) -> Self {
        Poly { spec, coeffs: vec![FieldElement::one(spec)] }
    }

    /// `X - c`.
    pub fn linear(c: &FieldElement) -> Self {
        let spec = c.spec();
        Poly { spec, coeffs: vec![c.neg(), FieldElement::one(spec)] }
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn coeffs(&self) -> &[FieldElement] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> FieldElement {
        self.coeffs.get(i).cloned().unwrap_or_else(|| FieldElement::zero(self.spec))
    }

    pub fn leading(&self) -> Option<&FieldElement> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.eq_to_precision(&FieldElement::one(self.spec)))
    }

    pub fn monic(&self) -> Result<Self> {
        let lead = self.leading().ok_or(Error::ZeroPolynomial)?.inv()?;
        Ok(self.scale(&lead))
    }

    pub fn scale(&self, c: &FieldElement) -> Self {
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect();
        Poly::new(self.spec, coeffs).expect("same spec")
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).add(&other.coeff(i))).collect();
        Poly::new(self.spec, coeffs).expect("same spec")
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|i| self.coeff(i).sub(&other.coeff(i))).collect();
        Poly::new(self.spec, coeffs).expect("same spec")
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero(self.spec);
        }
        let mut out = vec![FieldElement::zero(self.spec); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        Poly::new(self.spec, out).expect("same spec")
    }

    /// Multiplication by `X^k`.
    pub fn shift(&self, k: usize) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![FieldElement::zero(self.spec); k];
        coeffs.extend(self.coeffs.iter().cloned());
        Poly { spec: self.spec, coeffs }
    }

    pub fn eval(&self, x: &FieldElement) -> FieldElement {
        let mut acc = FieldElement::zero(self.spec);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }

    /// Coefficientwise agreement to the certified precision.
    pub fn eq_to_precision(&self, other: &Poly) -> bool {
        self.sub(other).is_zero()
    }

    /// Number of leading (low-order) coefficients that vanish to precision.
    pub fn zero_root_multiplicity(&self) -> usize {
        self.coeffs.iter().take_while(|c| c.is_zero()).count()
    }

    /// Divides out `X^k` where `k` is the zero-root multiplicity.
    pub fn strip_zero_roots(&self) -> Poly {
        let k = self.zero_root_multiplicity();
        Poly { spec: self.spec, coeffs: self.coeffs[k..].to_vec() }
    }

    /// Smallest certified absolute precision among the coefficients.
    pub fn min_abs_precision(&self) -> i64 {
        self.coeffs.iter().map(|c| c.abs_precision()).min().unwrap_or(i64::MAX)
    }

    pub fn to_doc(&self) -> Vec<ElementDoc> {
        self.coeffs.iter().map(|c| c.to_doc()).collect()
    }

    pub fn from_doc(doc: &[ElementDoc], spec: FieldSpec) -> Result<Self> {
        let c = doc.iter().map(|d| FieldElement::from_doc(d, spec)).collect::<Result<Vec<_>>>()?;
        Self::new(spec, c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    #[serde(with = "crate::ratio_serde")]
    pub slope: Ratio<i64>,
    pub length: usize,
}

impl Segment {
    /// Valuation shared by the roots this segment accounts for.
    pub fn root_valuation(&self) -> Ratio<i64> {
        -self.slope
    }
}

/// Lower convex hull of the points `(i, v(a_i))`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonPolygon {
    pub vertices: Vec<(usize, i64)>,
    pub segments: Vec<Segment>,
    /// Roots at zero, split off before the hull is taken.
    pub zero_roots: usize,
}

impl NewtonPolygon {
    /// Sum of `slope * length` over the segments of positive slope, i.e.
    /// the exponent `m` with `prod_{|root| >= 1} |root| = q^m`.
    pub fn expanding_exponent(&self) -> Ratio<i64> {
        self.segments
            .iter()
            .filter(|s| s.slope > Ratio::from_integer(0))
            .map(|s| s.slope * s.length as i64)
            .sum()
    }

    /// Sum of root valuations of the nonzero roots.
    pub fn total_root_valuation(&self) -> Ratio<i64> {
        self.segments.iter().map(|s| s.root_valuation() * s.length as i64).sum()
    }
}

pub fn newton_polygon(f: &Poly) -> Result<NewtonPolygon> {
    let d = f.degree().ok_or(Error::ZeroPolynomial)?;
    let k = f.zero_root_multiplicity();
    let points: Vec<(usize, i64)> =
        (k..=d).filter_map(|i| f.coeffs[i].valuation().map(|v| (i, v))).collect();
    // monotone chain, lower hull
    let mut hull: Vec<(usize, i64)> = Vec::new();
    for &pt in &points {
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            let cross = (x2 as i128 - x1 as i128) * (pt.1 as i128 - y1 as i128)
                - (y2 as i128 - y1 as i128) * (pt.0 as i128 - x1 as i128);
            if cross <= 0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(pt);
    }
    // roots hidden in the vanishing low coefficients must be small
    let floor = points.iter().map(|p| p.1).min().unwrap_or(EXACT);
    if let Some(i) = (0..k).find(|&i| f.coeffs[i].abs_precision() <= floor) {
        return Err(Error::PrecisionExhausted(format!(
            "coefficient {i} is too imprecise to certify a root at zero"
        )));
    }
    // unknown coefficients may not undercut the hull
    for (i, c) in f.coeffs.iter().enumerate().skip(k) {
        if c.is_zero() && !c.is_exact_zero() {
            let w = hull.windows(2).find(|w| w[0].0 <= i && i <= w[1].0);
            if let Some(w) = w {
                let (x1, y1) = w[0];
                let (x2, y2) = w[1];
                let line = Ratio::from_integer(y1)
                    + Ratio::new(y2 - y1, (x2 - x1) as i64) * (i as i64 - x1 as i64);
                if Ratio::from_integer(c.abs_precision()) < line {
                    return Err(Error::PrecisionExhausted(format!(
                        "coefficient {i} is not certified above the Newton polygon"
                    )));
                }
            }
        }
    }
    let segments = hull
        .windows(2)
        .map(|w| Segment { slope: Ratio::new(w[1].1 - w[0].1, (w[1].0 - w[0].0) as i64), length: w[1].0 - w[0].0 })
        .collect();
    Ok(NewtonPolygon { vertices: hull, segments, zero_roots: k })
}

/// Absolute values of the roots in an algebraic closure, with multiplicity,
/// in increasing order.
pub fn root_abs_multiset(f: &Poly) -> Result<Vec<(AbsValue, usize)>> {
    let poly = newton_polygon(f)?;
    let q = f.spec.q();
    let mut out = Vec::new();
    if poly.zero_roots > 0 {
        out.push((AbsValue::zero(q), poly.zero_roots));
    }
    for s in &poly.segments {
        out.push((AbsValue::new(q, s.root_valuation()), s.length));
    }
    Ok(out)
}

const LIFT_STEPS: usize = 64;

/// Splits a monic `f` with `f(0) != 0` into monic factors, one per Newton
/// polygon segment, each with a single slope.
pub fn slope_factorize(f: &Poly) -> Result<Vec<(Ratio<i64>, Poly)>> {
    if f.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let f = if f.is_monic() { f.clone() } else { f.monic()? };
    if f.coeff(0).is_zero() {
        return Err(Error::PrecisionExhausted("constant term vanishes; strip zero roots first".into()));
    }
    let mut out = Vec::new();
    let mut rest = f;
    loop {
        let poly = newton_polygon(&rest)?;
        match poly.segments.len() {
            0 => break,
            1 => {
                out.push((poly.segments[0].slope, rest));
                break;
            }
            _ => {
                let split = poly.vertices[1].0;
                let (g, h) = split_at_vertex(&rest, split)?;
                let gp = newton_polygon(&g)?;
                if gp.segments.len() != 1 || gp.segments[0].slope != poly.segments[0].slope {
                    return Err(Error::PrecisionExhausted("factor does not have a single slope".into()));
                }
                out.push((poly.segments[0].slope, g));
                rest = h;
            }
        }
    }
    Ok(out)
}

/// Newton iteration on `g*h = f`, starting from the truncations of `f`
/// at the polygon vertex `i`.
fn split_at_vertex(f: &Poly, i: usize) -> Result<(Poly, Poly)> {
    let spec = f.spec;
    let d = f.degree().unwrap();
    let ai_inv = f.coeff(i).inv()?;
    let mut g = Poly::new(spec, (0..=i).map(|j| f.coeff(j).mul(&ai_inv)).collect())?;
    let mut h = Poly::new(spec, (i..=d).map(|j| f.coeff(j)).collect())?;
    for _ in 0..LIFT_STEPS {
        let r = f.sub(&g.mul(&h));
        if r.is_zero() {
            return Ok((g, h));
        }
        // g*dh + h*dg = r with deg dh < d-i, deg dg < i
        let mut sys = Matrix::zeros(spec, d, d);
        for j in 0..d - i {
            for (k, c) in g.coeffs.iter().enumerate() {
                if j + k < d {
                    sys.set(j + k, j, c.clone());
                }
            }
        }
        for j in 0..i {
            for (k, c) in h.coeffs.iter().enumerate() {
                if j + k < d {
                    sys.set(j + k, d - i + j, c.clone());
                }
            }
        }
        let rhs = Matrix::from_columns(spec, d, &[(0..d).map(|k| r.coeff(k)).collect()]);
        let sol = sys.solve(&rhs).map_err(|e| match e {
            Error::SingularToPrecision => Error::PrecisionExhausted("Sylvester system is singular".into()),
            other => other,
        })?;
        let dh = Poly::new(spec, (0..d - i).map(|k| sol.get(k, 0).clone()).collect())?;
        let dg = Poly::new(spec, (0..i).map(|k| sol.get(d - i + k, 0).clone()).collect())?;
        g = g.add(&dg);
        h = h.add(&dh);
    }
    Err(Error::PrecisionExhausted("Hensel lifting did not converge".into()))
}
