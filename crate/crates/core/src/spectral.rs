//! Characteristic values and subspaces, dynamical subspaces, adapted
//! lattices and the eigenvalue formula for the scale of a linear map.
//!
//! An exponent `e` stands for the absolute value `q^{-e}`; `None` stands
//! for `e = +inf`, i.e. the nilpotent part `E_0`.

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, FieldSpec};
use crate::matrixlat::{Lattice, Matrix};
use crate::polynomials::{newton_polygon, slope_factorize, Poly};

/// `q^exponent`, an integer power of the residue field size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Scale {
    pub base: u32,
    pub exponent: u64,
}

impl Scale {
    pub fn one(base: u32) -> Scale {
        Scale { base, exponent: 0 }
    }

    pub fn value(&self) -> BigUint {
        BigUint::from(self.base).pow(self.exponent as u32)
    }

    pub fn mul(&self, other: &Scale) -> Scale {
        assert_eq!(self.base, other.base);
        Scale { base: self.base, exponent: self.exponent + other.exponent }
    }

    pub fn divides(&self, other: &Scale) -> bool {
        self.base == other.base && self.exponent <= other.exponent
    }
}

impl Serialize for Scale {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Scale", 3)?;
        st.serialize_field("base", &self.base)?;
        st.serialize_field("exponent", &self.exponent)?;
        st.serialize_field("value", &self.value().to_string())?;
        st.end()
    }
}

/// Runs `f` at the precision of `spec`, then at twice and four times
/// that precision while it reports exhausted precision. `f` must rebuild
/// its inputs from the spec it is given.
pub fn with_precision_retry<T>(spec: FieldSpec, f: impl Fn(FieldSpec) -> Result<T>) -> Result<T> {
    let base = spec.precision();
    let mut last = None;
    for factor in [1, 2, 4] {
        match f(spec.with_precision(base * factor)?) {
            Err(e @ (Error::PrecisionExhausted(_) | Error::SaturationDiverged(_))) => last = Some(e),
            other => return other,
        }
    }
    Err(last.expect("at least one attempt"))
}

pub fn exponent_to_string(e: Option<Ratio<i64>>) -> String {
    match e {
        Some(r) => crate::ratio_serde::to_string(&r),
        None => "inf".into(),
    }
}

#[derive(Clone, Debug)]
pub struct Component {
    pub rho_exponent: Option<Ratio<i64>>,
    pub multiplicity: usize,
    /// `n x multiplicity`, columns spanning the component.
    pub basis: Matrix,
}

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub components: Vec<Component>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.components.iter().map(|c| c.multiplicity).sum()
    }

    /// Columns of all components spanning exponents accepted by `keep`.
    pub fn span_where(&self, n: usize, keep: impl Fn(Option<Ratio<i64>>) -> bool) -> Matrix {
        let spec = self.components.first().map(|c| c.basis.spec());
        let cols: Vec<Vec<FieldElement>> = self
            .components
            .iter()
            .filter(|c| keep(c.rho_exponent))
            .flat_map(|c| c.basis.columns())
            .collect();
        match spec {
            Some(spec) => Matrix::from_columns(spec, n, &cols),
            None => unreachable!("decomposition of a nonempty space"),
        }
    }

    pub fn full_basis(&self) -> Matrix {
        self.span_where(self.dim(), |_| true)
    }
}

/// Absolute values of the eigenvalues, grouped, in increasing order of
/// absolute value (`E_0` first).
pub fn characteristic_values(a: &Matrix) -> Result<Vec<(Option<Ratio<i64>>, usize)>> {
    let f = a.char_poly()?;
    let poly = newton_polygon(&f)?;
    let mut out: Vec<(Option<Ratio<i64>>, usize)> = Vec::new();
    if poly.zero_roots > 0 {
        out.push((None, poly.zero_roots));
    }
    out.extend(poly.segments.iter().map(|s| (Some(s.root_valuation()), s.length)));
    Ok(out)
}

pub fn characteristic_decomposition(a: &Matrix) -> Result<SpectralDecomposition> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch("matrix is not square".into()));
    }
    let n = a.rows();
    let f = a.char_poly()?;
    newton_polygon(&f)?;
    let k = f.zero_root_multiplicity();
    let mut components = Vec::new();
    if k > 0 {
        let basis = a.pow(k as u32)?.kernel_with_nullity(k)?;
        components.push(Component { rho_exponent: None, multiplicity: k, basis });
    }
    let invertible = f.strip_zero_roots();
    if invertible.degree().unwrap_or(0) > 0 {
        for (slope, c) in slope_factorize(&invertible)? {
            let m = c.degree().unwrap_or(0);
            let basis = a.eval_poly(&c)?.kernel_with_nullity(m)?;
            components.push(Component { rho_exponent: Some(-slope), multiplicity: m, basis });
        }
    }
    let dec = SpectralDecomposition { components };
    certify(a, &dec, n)?;
    Ok(dec)
}

fn certify(a: &Matrix, dec: &SpectralDecomposition, n: usize) -> Result<()> {
    if dec.dim() != n || dec.full_basis().det()?.is_zero() {
        return Err(Error::PrecisionExhausted("characteristic subspaces are not independent".into()));
    }
    for c in &dec.components {
        let r = a.restrict_to(&c.basis).map_err(|_| {
            Error::PrecisionExhausted("characteristic subspace not certified invariant".into())
        })?;
        if c.rho_exponent.is_some() && r.det()?.is_zero() {
            return Err(Error::PrecisionExhausted("restriction is not invertible".into()));
        }
    }
    Ok(())
}

/// Bases (as matrix columns) of the subspaces governing the dynamics.
#[derive(Clone, Debug)]
pub struct DynamicalSubspaces {
    pub cont_fwd: Matrix,
    pub cont_bwd: Matrix,
    pub levi: Matrix,
    pub par_fwd: Matrix,
    pub par_bwd: Matrix,
    pub fitting_zero: Matrix,
    pub fitting_pos: Matrix,
}

impl DynamicalSubspaces {
    pub fn named(&self) -> [(&'static str, &Matrix); 7] {
        [
            ("cont_fwd", &self.cont_fwd),
            ("cont_bwd", &self.cont_bwd),
            ("levi", &self.levi),
            ("par_fwd", &self.par_fwd),
            ("par_bwd", &self.par_bwd),
            ("fitting_zero", &self.fitting_zero),
            ("fitting_pos", &self.fitting_pos),
        ]
    }
}

pub fn dynamical_subspaces(a: &Matrix) -> Result<DynamicalSubspaces> {
    let dec = characteristic_decomposition(a)?;
    Ok(dynamical_from(&dec, a.rows()))
}

pub fn dynamical_from(dec: &SpectralDecomposition, n: usize) -> DynamicalSubspaces {
    let zero = Ratio::from_integer(0);
    let pos = |e: Option<Ratio<i64>>| e.is_none_or(|e| e > zero);
    DynamicalSubspaces {
        cont_fwd: dec.span_where(n, pos),
        cont_bwd: dec.span_where(n, |e| e.is_some_and(|e| e < zero)),
        levi: dec.span_where(n, |e| e == Some(zero)),
        par_fwd: dec.span_where(n, |e| e.is_none_or(|e| e >= zero)),
        par_bwd: dec.span_where(n, |e| e.is_some_and(|e| e <= zero)),
        fitting_zero: dec.span_where(n, |e| e.is_none()),
        fitting_pos: dec.span_where(n, |e| e.is_some()),
    }
}

fn to_scale(base: u32, e: Ratio<i64>) -> Result<Scale> {
    if !e.is_integer() || *e.numer() < 0 {
        return Err(Error::PrecisionExhausted(format!("scale exponent {e} is not a natural number")));
    }
    Ok(Scale { base, exponent: *e.numer() as u64 })
}

/// Product of `|lambda|` over eigenvalues with `|lambda| >= 1`, read off the
/// Newton polygon of the characteristic polynomial.
pub fn scale_by_polygon(a: &Matrix) -> Result<Scale> {
    let poly = newton_polygon(&a.char_poly()?)?;
    to_scale(a.spec().q(), poly.expanding_exponent())
}

/// `|det|` of the restriction to `E_{>=1}`.
pub fn scale_by_module(a: &Matrix) -> Result<Scale> {
    let dec = characteristic_decomposition(a)?;
    scale_by_module_from(a, &dec)
}

fn scale_by_module_from(a: &Matrix, dec: &SpectralDecomposition) -> Result<Scale> {
    let basis = dec.span_where(a.rows(), |e| e.is_some_and(|e| e <= Ratio::from_integer(0)));
    if basis.cols() == 0 {
        return Ok(Scale::one(a.spec().q()));
    }
    let module = a.restrict_to(&basis)?.module_of()?;
    let e = module.exponent().ok_or(Error::SingularToPrecision)?;
    to_scale(a.spec().q(), -e)
}

/// The scale of `a`; the polygon and module routes must agree.
pub fn scale_linear(a: &Matrix) -> Result<Scale> {
    let by_polygon = scale_by_polygon(a)?;
    let by_module = scale_by_module(a)?;
    if by_polygon != by_module {
        return Err(Error::PrecisionExhausted(format!(
            "scale routes disagree: polygon {} vs module {}",
            by_polygon.exponent, by_module.exponent
        )));
    }
    Ok(by_polygon)
}

/// One summand of an adapted norm. `levels[r]` is the filtration step
/// `F_r` for `0 <= r < b`, in the coordinates of `basis`; `F_{kb+r}` is
/// `pi^k F_r` and `B F_t = F_{t+a}` where `e = a/b`.
#[derive(Clone, Debug)]
pub struct AdaptedComponent {
    pub rho_exponent: Option<Ratio<i64>>,
    pub basis: Matrix,
    pub restriction: Matrix,
    pub denominator: i64,
    pub levels: Vec<Lattice>,
}

impl AdaptedComponent {
    /// Largest `t / b` with `w in F_t` (`None` for `w = 0`).
    pub fn norm_exponent(&self, w: &[FieldElement]) -> Option<Ratio<i64>> {
        let b = self.denominator;
        let c = self.levels[0].coordinates(w)?;
        let cmin = c.iter().filter_map(|x| x.valuation()).min()?;
        for t in (cmin * b..cmin * b + b).rev() {
            let (k, r) = t.div_mod_floor(&b);
            let scaled: Vec<FieldElement> = w.iter().map(|x| x.shift(-k)).collect();
            if self.levels[r as usize].contains_vector(&scaled) {
                return Some(Ratio::new(t, b));
            }
        }
        Some(Ratio::from_integer(cmin))
    }

    pub fn level(&self, t: i64) -> Lattice {
        let (k, r) = t.div_mod_floor(&self.denominator);
        self.levels[r as usize].scaled(k)
    }
}

#[derive(Clone, Debug)]
pub struct AdaptedNorm {
    pub components: Vec<AdaptedComponent>,
    pub epsilon_exponent: i64,
    coordinates: Matrix,
}

impl AdaptedNorm {
    /// Splits `v` into component coordinates.
    pub fn split(&self, v: &[FieldElement]) -> Vec<Vec<FieldElement>> {
        let w = self.coordinates.mul_vec(v);
        let mut out = Vec::new();
        let mut at = 0;
        for c in &self.components {
            let m = c.basis.cols();
            out.push(w[at..at + m].to_vec());
            at += m;
        }
        out
    }

    /// Exponent `t` with `||v|| = q^{-t}`; the norm is the maximum over
    /// components.
    pub fn norm_exponent(&self, v: &[FieldElement]) -> Option<Ratio<i64>> {
        self.split(v)
            .iter()
            .zip(&self.components)
            .filter_map(|(w, c)| c.norm_exponent(w))
            .min()
    }

    /// `{v : ||v|| <= q^{-r}}`.
    pub fn ball(&self, r: i64) -> Lattice {
        let n = self.coordinates.rows();
        let spec = self.coordinates.spec();
        let mut gens = Vec::new();
        for c in &self.components {
            for v in c.levels[0].scaled(r).basis_vectors() {
                gens.push(c.basis.mul_vec(v));
            }
        }
        Lattice::from_vectors(spec, n, gens)
    }
}

fn saturate(c: &Matrix, cap: usize) -> Result<Lattice> {
    let cinv = c.inverse()?;
    let mut l = Lattice::standard(c.spec(), c.rows());
    for _ in 0..cap {
        let next = l.sum(&l.image(c)?).sum(&l.image(&cinv)?);
        if next == l {
            return Ok(l);
        }
        l = next;
    }
    Err(Error::SaturationDiverged(cap))
}

/// Lattices realising an ultrametric norm adapted to `a`: a maximum norm
/// across characteristic subspaces, scaling exactly by `q^{-e}` on each
/// invertible component and with operator norm at most `q^{-epsilon}` on
/// `E_0`.
pub fn adapted_lattice(a: &Matrix, epsilon_exponent: i64) -> Result<AdaptedNorm> {
    let dec = characteristic_decomposition(a)?;
    adapted_from(a, &dec, epsilon_exponent)
}

pub fn adapted_from(a: &Matrix, dec: &SpectralDecomposition, epsilon_exponent: i64) -> Result<AdaptedNorm> {
    let spec = a.spec();
    let mut components = Vec::new();
    for comp in &dec.components {
        let m = comp.multiplicity;
        let b_mat = a.restrict_to(&comp.basis)?;
        match comp.rho_exponent {
            Some(e) => {
                let (num, den) = (*e.numer(), *e.denom());
                let c = b_mat.pow(den as u32)?.shift(-num);
                let l = saturate(&c, 64 * m)?;
                let mut levels = Vec::new();
                for r in 0..den {
                    let mut gens = Vec::new();
                    let mut bi = Matrix::identity(spec, m);
                    for i in 0..den {
                        let k = Integer::div_ceil(&(r - i * num), &den);
                        let g = bi.shift(k).mul(&l.basis())?;
                        gens.extend(g.columns());
                        bi = b_mat.mul(&bi)?;
                    }
                    levels.push(Lattice::from_vectors(spec, m, gens));
                }
                components.push(AdaptedComponent {
                    rho_exponent: Some(e),
                    basis: comp.basis.clone(),
                    restriction: b_mat,
                    denominator: den,
                    levels,
                });
            }
            None => {
                let mut gens = Vec::new();
                let mut nk = Matrix::identity(spec, m);
                for k in 0..m as i64 {
                    gens.extend(nk.shift(-epsilon_exponent * k).columns());
                    nk = b_mat.mul(&nk)?;
                }
                components.push(AdaptedComponent {
                    rho_exponent: None,
                    basis: comp.basis.clone(),
                    restriction: b_mat,
                    denominator: 1,
                    levels: vec![Lattice::from_vectors(spec, m, gens)],
                });
            }
        }
    }
    let coordinates = dec.full_basis().inverse()?;
    Ok(AdaptedNorm { components, epsilon_exponent, coordinates })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Contractive,
    ExpansiveMixed,
    Distal,
    OpenContraction,
    None,
}

/// Classification by the absolute values of the eigenvalues. Contractive
/// and open-contraction coincide for linear maps; `Contractive` is
/// reported. Every expansive map without unit eigenvalues is reported as
/// `ExpansiveMixed`.
pub fn classify_linear(a: &Matrix) -> Result<Classification> {
    if a.det()?.is_zero() {
        return Err(Error::SingularToPrecision);
    }
    let values = characteristic_values(a)?;
    let zero = Ratio::from_integer(0);
    let exps: Vec<Ratio<i64>> = values.iter().filter_map(|v| v.0).collect();
    Ok(if exps.iter().all(|&e| e > zero) {
        Classification::Contractive
    } else if exps.iter().all(|&e| e == zero) {
        Classification::Distal
    } else if exps.iter().all(|&e| e != zero) {
        Classification::ExpansiveMixed
    } else {
        Classification::None
    })
}

/// Matrix of `X -> g X g^{-1}` on row-major flattened `n x n` matrices.
pub fn conjugation_operator(g: &Matrix) -> Result<Matrix> {
    let ginv = g.inverse()?;
    Ok(g.kron(&ginv.transpose()))
}

pub fn inner_scale_gl(g: &Matrix) -> Result<Scale> {
    scale_linear(&conjugation_operator(g)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SubquotientScales {
    pub sub: Scale,
    pub quotient: Scale,
    pub total: Scale,
}

/// Scales of the restriction to the invariant subspace spanned by `f`,
/// of the induced map on the quotient, and of `a` itself.
pub fn subquotient_scales(a: &Matrix, f: &Matrix) -> Result<SubquotientScales> {
    let n = a.rows();
    let k = f.cols();
    if f.rows() != n || f.rank() != k {
        return Err(Error::DimensionMismatch("subspace basis must have independent columns".into()));
    }
    a.restrict_to(f)?;
    let spec = a.spec();
    let mut cols = f.columns();
    let id = Matrix::identity(spec, n);
    for i in 0..n {
        if cols.len() == n {
            break;
        }
        let mut trial = cols.clone();
        trial.push(id.column(i));
        if Matrix::from_columns(spec, n, &trial).rank() == trial.len() {
            cols = trial;
        }
    }
    let p = Matrix::from_columns(spec, n, &cols);
    let conj = p.solve(&a.mul(&p)?)?;
    let block = |r0: usize, c0: usize, r: usize, c: usize| {
        let mut out = Matrix::zeros(spec, r, c);
        for i in 0..r {
            for j in 0..c {
                out.set(i, j, conj.get(r0 + i, c0 + j).clone());
            }
        }
        out
    };
    if !block(k, 0, n - k, k).is_zero() {
        return Err(Error::NotInvariant);
    }
    let scale_of = |m: Matrix| {
        if m.rows() == 0 {
            Ok(Scale::one(spec.q()))
        } else {
            scale_linear(&m)
        }
    };
    Ok(SubquotientScales {
        sub: scale_of(block(0, 0, k, k))?,
        quotient: scale_of(block(k, k, n - k, n - k))?,
        total: scale_linear(a)?,
    })
}

/// Companion matrix of a monic polynomial (last column holds `-a_i`).
pub fn companion(f: &Poly) -> Result<Matrix> {
    let f = f.monic()?;
    let n = f.degree().ok_or(Error::ZeroPolynomial)?;
    let spec = f.spec();
    let mut m = Matrix::zeros(spec, n, n);
    for i in 1..n {
        m.set(i, i - 1, FieldElement::one(spec));
    }
    for i in 0..n {
        m.set(i, n - 1, f.coeff(i).neg());
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(spec: FieldSpec, rows: &[&[&str]]) -> Matrix {
        Matrix::from_strs(spec, rows).unwrap()
    }

    fn r(a: i64, b: i64) -> Option<Ratio<i64>> {
        Some(Ratio::new(a, b))
    }

    #[test]
    fn characteristic_value_examples() {
        let spec = FieldSpec::qp(3, 32).unwrap();
        let d = m(spec, &[&["3", "0", "0"], &["0", "1", "0"], &["0", "0", "1/3"]]);
        assert_eq!(characteristic_values(&d).unwrap(), vec![(r(1, 1), 1), (r(0, 1), 1), (r(-1, 1), 1)]);
        let comp = m(spec, &[&["0", "-3"], &["1", "3"]]);
        assert_eq!(characteristic_values(&comp).unwrap(), vec![(r(1, 2), 2)]);
        let nil = m(spec, &[&["0", "1", "0"], &["0", "0", "1"], &["0", "0", "0"]]);
        assert_eq!(characteristic_values(&nil).unwrap(), vec![(None, 3)]);
    }

    #[test]
    fn eigenvector_for_p() {
        let spec = FieldSpec::qp(5, 32).unwrap();
        let a = m(spec, &[&["1", "1"], &["0", "5"]]);
        let dec = characteristic_decomposition(&a).unwrap();
        let c = dec.components.iter().find(|c| c.rho_exponent == r(1, 1)).unwrap();
        let v = c.basis.column(0);
        let av = a.mul_vec(&v);
        let five = FieldElement::from_int(5, spec);
        for (x, y) in av.iter().zip(&v) {
            assert!(x.eq_to_precision(&y.mul(&five)));
        }
        // (1, p - 1) up to a unit
        let ratio = v[1].div(&v[0]).unwrap();
        assert!(ratio.eq_to_precision(&FieldElement::from_int(4, spec)));
    }

    #[test]
    fn nilpotent_block_plus_expanding() {
        let spec = FieldSpec::qp(2, 32).unwrap();
        let a = m(spec, &[&["0", "1", "0"], &["0", "0", "0"], &["0", "0", "1/2"]]);
        let dyn_ = dynamical_subspaces(&a).unwrap();
        assert_eq!(dyn_.fitting_zero.cols(), 2);
        assert_eq!(dyn_.cont_bwd.cols(), 1);
        assert!(dyn_.cont_bwd.get(0, 0).is_zero() && dyn_.cont_bwd.get(1, 0).is_zero());
        assert_eq!(dyn_.cont_fwd.cols(), 2);
    }

    #[test]
    fn scale_examples() {
        for spec in [FieldSpec::qp(2, 32).unwrap(), FieldSpec::qp(3, 32).unwrap(), FieldSpec::fpx(2, 32).unwrap()] {
            let p = spec.p().to_string();
            let pinv = format!("1/{p}");
            let q = spec.q();
            let d = m(spec, &[&[&pinv, "0"], &["0", &p]]);
            assert_eq!(scale_linear(&d).unwrap(), Scale { base: q, exponent: 1 });
            let mp = format!("-{p}");
            let comp = m(spec, &[&["0", &mp], &["1", &p]]);
            assert_eq!(scale_linear(&comp).unwrap(), Scale::one(q));
            let nil = m(spec, &[&["0", "1"], &["0", "0"]]);
            assert_eq!(scale_linear(&nil).unwrap(), Scale::one(q));
        }
    }

    #[test]
    fn saturation_of_unipotent() {
        let spec = FieldSpec::qp(3, 32).unwrap();
        let a = m(spec, &[&["1", "1/3"], &["0", "1"]]);
        let norm = adapted_lattice(&a, 1).unwrap();
        assert_eq!(norm.components.len(), 1);
        let l = &norm.components[0].levels[0];
        assert_eq!(*l, Lattice::diagonal(spec, &[-1, 0]));
        assert_eq!(l.image(&a).unwrap(), *l);
    }

    #[test]
    fn half_slope_filtration() {
        let spec = FieldSpec::qp(3, 32).unwrap();
        let a = m(spec, &[&["0", "3"], &["1", "0"]]);
        let norm = adapted_lattice(&a, 1).unwrap();
        let c = &norm.components[0];
        assert_eq!(c.denominator, 2);
        let f0 = c.level(0);
        let f1 = c.level(1);
        let f2 = c.level(2);
        assert!(f0.contains(&f1) && f1.contains(&f2) && f1 != f0 && f1 != f2);
        assert_eq!(f2, f0.scaled(1));
        assert_eq!(f0.image(&c.restriction).unwrap(), f1);
        let v = vec![FieldElement::one(spec), FieldElement::from_int(2, spec)];
        let e = norm.norm_exponent(&v).unwrap();
        let e2 = norm.norm_exponent(&a.mul_vec(&v)).unwrap();
        assert_eq!(e2 - e, Ratio::new(1, 2));
    }

    #[test]
    fn classification_examples() {
        let spec = FieldSpec::qp(5, 32).unwrap();
        let p_i = m(spec, &[&["5", "0", "0"], &["0", "5", "0"], &["0", "0", "5"]]);
        assert_eq!(classify_linear(&p_i).unwrap(), Classification::Contractive);
        let d = m(spec, &[&["5", "0"], &["0", "1/5"]]);
        assert_eq!(classify_linear(&d).unwrap(), Classification::ExpansiveMixed);
        let u = m(spec, &[&["1", "1"], &["1", "2"]]);
        assert_eq!(classify_linear(&u).unwrap(), Classification::Distal);
        let mixed = m(spec, &[&["5", "0"], &["0", "1"]]);
        assert_eq!(classify_linear(&mixed).unwrap(), Classification::None);
        let sing = m(spec, &[&["0", "1"], &["0", "0"]]);
        assert!(matches!(classify_linear(&sing), Err(Error::SingularToPrecision)));
    }

    #[test]
    fn inner_scale_examples() {
        let spec = FieldSpec::qp(3, 32).unwrap();
        assert_eq!(inner_scale_gl(&Matrix::identity(spec, 2)).unwrap(), Scale::one(3));
        let g = m(spec, &[&["3", "0"], &["0", "1"]]);
        assert_eq!(inner_scale_gl(&g).unwrap(), Scale { base: 3, exponent: 1 });
        let s = m(spec, &[&["3", "0"], &["0", "3"]]);
        assert_eq!(inner_scale_gl(&s).unwrap(), Scale::one(3));
    }

    #[test]
    fn subquotient_examples() {
        let spec = FieldSpec::qp(2, 32).unwrap();
        let s = |e| Scale { base: 2, exponent: e };
        let a = m(spec, &[&["1/2", "1"], &["0", "1/2"]]);
        let e1 = m(spec, &[&["1"], &["0"]]);
        let e2 = m(spec, &[&["0"], &["1"]]);
        let r = subquotient_scales(&a, &e1).unwrap();
        assert_eq!((r.sub, r.quotient, r.total), (s(1), s(1), s(2)));
        let d = m(spec, &[&["1/2", "0"], &["0", "2"]]);
        let r = subquotient_scales(&d, &e2).unwrap();
        assert_eq!((r.sub, r.quotient, r.total), (s(0), s(1), s(1)));
        let r = subquotient_scales(&d, &e1).unwrap();
        assert_eq!((r.sub, r.quotient, r.total), (s(1), s(0), s(1)));
        assert!(matches!(subquotient_scales(&a, &e2), Err(Error::NotInvariant)));
    }
}
