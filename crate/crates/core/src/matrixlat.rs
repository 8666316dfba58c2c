//! Matrices over a local field and lattices (finitely generated modules over
//! the valuation ring) inside `K^n`.
//!
//! All eliminations pivot on an entry of maximal absolute value, so every
//! multiplier lies in the valuation ring and column operations used on
//! lattice bases are unimodular.

#![allow(clippy::needless_range_loop)]

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::localfield::{AbsValue, ElementDoc, FieldElement, FieldSpec};
use crate::polynomials::{root_abs_multiset, Poly};

#[derive(Clone, Debug)]
pub struct Matrix {
    spec: FieldSpec,
    rows: usize,
    cols: usize,
    data: Vec<FieldElement>,
}

struct Echelon {
    a: Vec<Vec<FieldElement>>,
    col_perm: Vec<usize>,
    rank: usize,
    swaps: usize,
}

/// Full-pivot row reduction; pivots are searched in the first
/// `pivot_cols` columns and at most `limit` steps are taken.
fn echelon(m: &Matrix, pivot_cols: usize, limit: usize) -> Echelon {
    let (rows, cols) = (m.rows, m.cols);
    let mut a: Vec<Vec<FieldElement>> = (0..rows).map(|i| m.row(i)).collect();
    let mut col_perm: Vec<usize> = (0..cols).collect();
    let mut rank = 0;
    let mut swaps = 0;
    let steps = limit.min(rows).min(pivot_cols);
    for k in 0..steps {
        let mut best: Option<(usize, usize, i64)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().take(pivot_cols).skip(k) {
                if let Some(v) = x.valuation() {
                    if best.is_none_or(|b| v < b.2) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((pi, pj, _)) = best else { break };
        if pi != k {
            a.swap(pi, k);
            swaps += 1;
        }
        if pj != k {
            for row in a.iter_mut() {
                row.swap(pj, k);
            }
            col_perm.swap(pj, k);
            swaps += 1;
        }
        let inv = a[k][k].inv().expect("pivot is nonzero");
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom.iter_mut() {
            if row[k].is_zero() {
                row[k] = FieldElement::zero(m.spec);
                continue;
            }
            let f = row[k].mul(&inv);
            for j in k + 1..cols {
                if !pivot_row[j].is_exact_zero() {
                    row[j] = row[j].sub(&f.mul(&pivot_row[j]));
                }
            }
            row[k] = FieldElement::zero(m.spec);
        }
        rank += 1;
    }
    Echelon { a, col_perm, rank, swaps }
}

impl Echelon {
    /// Kernel vectors from the reduced rows, one per free column in
    /// `rank..ncols`, scaled so that each has minimal valuation zero.
    fn kernel(&self, spec: FieldSpec, ncols: usize) -> Vec<Vec<FieldElement>> {
        let r = self.rank;
        let mut out = Vec::new();
        for t in r..ncols {
            let mut x = vec![FieldElement::zero(spec); ncols];
            x[t] = FieldElement::one(spec);
            for k in (0..r).rev() {
                let mut acc = FieldElement::zero(spec);
                for j in k + 1..ncols {
                    if !x[j].is_exact_zero() {
                        acc = acc.add(&self.a[k][j].mul(&x[j]));
                    }
                }
                x[k] = acc.neg().div(&self.a[k][k]).expect("pivot is nonzero");
            }
            let mut v = vec![FieldElement::zero(spec); ncols];
            for (k, xk) in x.into_iter().enumerate() {
                v[self.col_perm[k]] = xk;
            }
            out.push(primitive(v));
        }
        out
    }

    /// Back substitution for the right-hand sides stored after `n` columns.
    fn back_substitute(&self, spec: FieldSpec, n: usize, rhs_cols: usize) -> Vec<Vec<FieldElement>> {
        let mut sol = vec![vec![FieldElement::zero(spec); rhs_cols]; n];
        for c in 0..rhs_cols {
            let mut x = vec![FieldElement::zero(spec); n];
            for k in (0..n).rev() {
                let mut acc = self.a[k][n + c].clone();
                for j in k + 1..n {
                    if !x[j].is_exact_zero() {
                        acc = acc.sub(&self.a[k][j].mul(&x[j]));
                    }
                }
                x[k] = acc.div(&self.a[k][k]).expect("pivot is nonzero");
            }
            for (k, xk) in x.into_iter().enumerate() {
                sol[self.col_perm[k]][c] = xk;
            }
        }
        sol
    }
}

/// Rescales a nonzero vector by a power of the uniformizer so that its
/// smallest valuation is zero.
pub fn primitive(v: Vec<FieldElement>) -> Vec<FieldElement> {
    match v.iter().filter_map(|x| x.valuation()).min() {
        Some(m) if m != 0 => v.into_iter().map(|x| x.shift(-m)).collect(),
        _ => v,
    }
}

/// `p - c q` computed coefficientwise, so imprecise low-order terms of
/// `c q` survive even when `c q` vanishes to precision.
fn sub_scaled(p: &Poly, q: &Poly, c: &FieldElement) -> Poly {
    let n = p.coeffs().len().max(q.coeffs().len());
    let coeffs = (0..n).map(|j| p.coeff(j).sub(&q.coeff(j).mul(c))).collect();
    Poly::new(p.spec(), coeffs).expect("same spec")
}

impl Matrix {
    pub fn zeros(spec: FieldSpec, rows: usize, cols: usize) -> Self {
        Matrix { spec, rows, cols, data: vec![FieldElement::zero(spec); rows * cols] }
    }

    pub fn identity(spec: FieldSpec, n: usize) -> Self {
        let mut m = Self::zeros(spec, n, n);
        for i in 0..n {
            m.set(i, i, FieldElement::one(spec));
        }
        m
    }

    pub fn diag(spec: FieldSpec, entries: &[FieldElement]) -> Self {
        let mut m = Self::zeros(spec, entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m.set(i, i, e.clone());
        }
        m
    }

    pub fn from_rows(spec: FieldSpec, rows: Vec<Vec<FieldElement>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let data: Vec<FieldElement> = rows.into_iter().flatten().collect();
        if data.iter().any(|x| x.spec() != spec) {
            return Err(Error::SpecMismatch);
        }
        Ok(Matrix { spec, rows: r, cols: c, data })
    }

    pub fn from_strs(spec: FieldSpec, rows: &[&[&str]]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|s| FieldElement::parse(s, spec)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(spec, rows)
    }

    /// Builds an `n x k` matrix from `k` column vectors of length `n`.
    pub fn from_columns(spec: FieldSpec, n: usize, columns: &[Vec<FieldElement>]) -> Self {
        let mut m = Self::zeros(spec, n, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &FieldElement {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, x: FieldElement) {
        self.data[i * self.cols + j] = x;
    }

    pub fn row(&self, i: usize) -> Vec<FieldElement> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<FieldElement> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<FieldElement>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!("{}x{} matrix is not square", self.rows, self.cols)))
        }
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        let mut out = Matrix::zeros(self.spec, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_exact_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_exact_zero() {
                        continue;
                    }
                    let idx = i * other.cols + j;
                    out.data[idx] = out.data[idx].add(&a.mul(b));
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[FieldElement]) -> Vec<FieldElement> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = FieldElement::zero(self.spec);
                for (j, x) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_exact_zero() && !x.is_exact_zero() {
                        acc = acc.add(&a.mul(x));
                    }
                }
                acc
            })
            .collect()
    }

    fn zip(&self, other: &Matrix, f: impl Fn(&FieldElement, &FieldElement) -> FieldElement) -> Result<Matrix> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch("shapes differ".into()));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect();
        Ok(Matrix { spec: self.spec, rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a.add(b))
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip(other, |a, b| a.sub(b))
    }

    pub fn scale(&self, c: &FieldElement) -> Matrix {
        Matrix { data: self.data.iter().map(|x| x.mul(c)).collect(), ..self.clone() }
    }

    /// Multiplication by `pi^k`.
    pub fn shift(&self, k: i64) -> Matrix {
        Matrix { data: self.data.iter().map(|x| x.shift(k)).collect(), ..self.clone() }
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zeros(self.spec, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch("row counts differ".into()));
        }
        let mut cols = self.columns();
        cols.extend(other.columns());
        Ok(Matrix::from_columns(self.spec, self.rows, &cols))
    }

    pub fn pow(&self, k: u32) -> Result<Matrix> {
        self.require_square()?;
        let mut result = Matrix::identity(self.spec, self.rows);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    /// Kronecker product.
    pub fn kron(&self, other: &Matrix) -> Matrix {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        let mut out = Matrix::zeros(self.spec, r, c);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                if a.is_exact_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a.mul(other.get(k, l)));
                    }
                }
            }
        }
        out
    }

    /// Smallest valuation among the entries (`None` if all vanish).
    pub fn min_valuation(&self) -> Option<i64> {
        self.data.iter().filter_map(|x| x.valuation()).min()
    }

    pub fn eq_to_precision(&self, other: &Matrix) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols)
            && self.data.iter().zip(&other.data).all(|(a, b)| a.eq_to_precision(b))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn rank(&self) -> usize {
        echelon(self, self.cols, self.cols).rank
    }

    pub fn det(&self) -> Result<FieldElement> {
        self.require_square()?;
        let n = self.rows;
        let e = echelon(self, n, n);
        let mut d = FieldElement::one(self.spec);
        for k in 0..e.rank {
            d = d.mul(&e.a[k][k]);
        }
        if e.rank < n {
            let abs = (e.rank..n)
                .flat_map(|i| (e.rank..n).map(move |j| (i, j)))
                .map(|(i, j)| e.a[i][j].abs_precision())
                .min()
                .unwrap_or(0);
            return Ok(FieldElement::zero_to(self.spec, abs).mul(&d));
        }
        Ok(if e.swaps % 2 == 1 { d.neg() } else { d })
    }

    /// Solves `self * X = rhs` for square invertible `self`.
    pub fn solve(&self, rhs: &Matrix) -> Result<Matrix> {
        self.require_square()?;
        let n = self.rows;
        let aug = self.hstack(rhs)?;
        let e = echelon(&aug, n, n);
        if e.rank < n {
            return Err(Error::SingularToPrecision);
        }
        let sol = e.back_substitute(self.spec, n, rhs.cols);
        Matrix::from_rows(self.spec, sol)
    }

    pub fn inverse(&self) -> Result<Matrix> {
        self.solve(&Matrix::identity(self.spec, self.rows))
    }

    /// Solves `self * X = rhs` where `self` has full column rank; `None`
    /// when some column of `rhs` is outside the column span.
    pub fn solve_in_span(&self, rhs: &Matrix) -> Result<Option<Matrix>> {
        let m = self.cols;
        let aug = self.hstack(rhs)?;
        let e = echelon(&aug, m, m);
        if e.rank < m {
            return Err(Error::SingularToPrecision);
        }
        for row in e.a.iter().skip(m) {
            if row[m..].iter().any(|x| !x.is_zero()) {
                return Ok(None);
            }
        }
        let sol = e.back_substitute(self.spec, m, rhs.cols);
        Matrix::from_rows(self.spec, sol).map(Some)
    }

    /// Kernel basis (columns), rank decided by zero-to-precision tests.
    pub fn kernel(&self) -> Matrix {
        let e = echelon(self, self.cols, self.cols);
        Matrix::from_columns(self.spec, self.cols, &e.kernel(self.spec, self.cols))
    }

    /// Kernel basis when its dimension is known in advance. Fails if the
    /// reduction cannot certify exactly that nullity.
    pub fn kernel_with_nullity(&self, nullity: usize) -> Result<Matrix> {
        if nullity > self.cols {
            return Err(Error::DimensionMismatch("nullity exceeds column count".into()));
        }
        let target = self.cols - nullity;
        let e = echelon(self, self.cols, target);
        if e.rank < target {
            return Err(Error::PrecisionExhausted(format!(
                "expected rank {target}, certified only {}",
                e.rank
            )));
        }
        for row in e.a.iter().skip(target) {
            if row[target..].iter().any(|x| !x.is_zero()) {
                return Err(Error::PrecisionExhausted(format!("kernel of dimension {nullity} not certified")));
            }
        }
        Ok(Matrix::from_columns(self.spec, self.cols, &e.kernel(self.spec, self.cols)))
    }

    /// `f(self)` by Horner's rule.
    pub fn eval_poly(&self, f: &Poly) -> Result<Matrix> {
        self.require_square()?;
        let n = self.rows;
        let mut acc = Matrix::zeros(self.spec, n, n);
        for c in f.coeffs().iter().rev() {
            acc = acc.mul(self)?;
            for i in 0..n {
                let v = acc.get(i, i).add(c);
                acc.set(i, i, v);
            }
        }
        Ok(acc)
    }

    /// Matrix of the restriction to the invariant subspace spanned by the
    /// columns of `basis`, in those coordinates.
    pub fn restrict_to(&self, basis: &Matrix) -> Result<Matrix> {
        let image = self.mul(basis)?;
        basis.solve_in_span(&image)?.ok_or(Error::NotInvariant)
    }

    /// Characteristic polynomial by Hessenberg reduction; for `n <= 4` it
    /// is cross-checked against cofactor expansion of `det(X - A)`.
    pub fn char_poly(&self) -> Result<Poly> {
        self.require_square()?;
        let hess = self.char_poly_hessenberg()?;
        if self.rows <= 4 {
            let expanded = self.char_poly_expansion()?;
            if !hess.eq_to_precision(&expanded) {
                return Err(Error::PrecisionExhausted(
                    "characteristic polynomial routes disagree".into(),
                ));
            }
        }
        Ok(hess)
    }

    pub fn char_poly_hessenberg(&self) -> Result<Poly> {
        self.require_square()?;
        let spec = self.spec;
        let n = self.rows;
        let mut h: Vec<Vec<FieldElement>> = (0..n).map(|i| self.row(i)).collect();
        for m in 1..n.saturating_sub(1) {
            let best = (m..n)
                .filter_map(|i| h[i][m - 1].valuation().map(|v| (i, v)))
                .min_by_key(|&(i, v)| (v, i));
            let Some((piv, _)) = best else { continue };
            if piv != m {
                h.swap(piv, m);
                for row in h.iter_mut() {
                    row.swap(piv, m);
                }
            }
            let inv = h[m][m - 1].inv()?;
            for i in m + 1..n {
                if h[i][m - 1].is_zero() {
                    continue;
                }
                let t = h[i][m - 1].mul(&inv);
                for j in 0..n {
                    let v = h[i][j].sub(&t.mul(&h[m][j]));
                    h[i][j] = v;
                }
                h[i][m - 1] = FieldElement::zero(spec);
                for row in h.iter_mut() {
                    let v = row[m].add(&t.mul(&row[i]));
                    row[m] = v;
                }
            }
        }
        let mut ps: Vec<Poly> = vec![Poly::one(spec)];
        for k in 0..n {
            let linear = Poly::new(spec, vec![h[k][k].neg(), FieldElement::one(spec)])?;
            let mut pk = linear.mul(&ps[k]);
            let mut prod = FieldElement::one(spec);
            for i in (0..k).rev() {
                prod = prod.mul(&h[i + 1][i]);
                let coef = h[i][k].mul(&prod);
                if !coef.is_exact_zero() {
                    pk = sub_scaled(&pk, &ps[i], &coef);
                }
            }
            ps.push(pk);
        }
        Ok(ps.pop().unwrap())
    }

    /// `det(X*I - A)` by cofactor expansion (division free).
    pub fn char_poly_expansion(&self) -> Result<Poly> {
        self.require_square()?;
        let spec = self.spec;
        let n = self.rows;
        let entries: Vec<Vec<Poly>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let c = self.get(i, j).neg();
                        if i == j {
                            Poly::new(spec, vec![c, FieldElement::one(spec)]).unwrap()
                        } else {
                            Poly::new(spec, vec![c]).unwrap()
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(poly_det(spec, &entries, &(0..n).collect::<Vec<_>>()))
    }

    /// `|det A|`, cross-checked against the product of the absolute values
    /// of the characteristic roots.
    pub fn module_of(&self) -> Result<AbsValue> {
        self.require_square()?;
        let d = self.det()?;
        if d.is_zero() {
            return Err(Error::SingularToPrecision);
        }
        let by_det = d.abs_value();
        let roots = root_abs_multiset(&self.char_poly()?)?;
        let by_roots = roots
            .iter()
            .fold(AbsValue::one(self.spec.q()), |acc, (a, m)| acc.mul(&a.pow(*m as i64)));
        if by_det != by_roots {
            return Err(Error::PrecisionExhausted("determinant and eigenvalue routes disagree".into()));
        }
        Ok(by_det)
    }

    pub fn smith_normal_form(&self) -> Result<Snf> {
        smith_normal_form(self)
    }

    pub fn to_doc(&self) -> Vec<Vec<ElementDoc>> {
        (0..self.rows).map(|i| self.row(i).iter().map(|x| x.to_doc()).collect()).collect()
    }

    pub fn from_doc(doc: &[Vec<ElementDoc>], spec: FieldSpec) -> Result<Matrix> {
        let rows = doc
            .iter()
            .map(|row| row.iter().map(|d| FieldElement::from_doc(d, spec)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Matrix::from_rows(spec, rows)
    }
}

fn poly_det(spec: FieldSpec, m: &[Vec<Poly>], cols: &[usize]) -> Poly {
    let row = m.len() - cols.len();
    if cols.is_empty() {
        return Poly::one(spec);
    }
    let mut acc = Poly::zero(spec);
    for (idx, &c) in cols.iter().enumerate() {
        let entry = &m[row][c];
        if entry.is_zero() && entry.coeffs().is_empty() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = entry.mul(&poly_det(spec, m, &rest));
        acc = if idx % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// `left * diag(pi^e_1, ..., pi^e_r, 0, ...) * right == input`, with
/// `left` and `right` invertible over the valuation ring.
#[derive(Clone, Debug)]
pub struct Snf {
    pub left: Matrix,
    pub diag_valuations: Vec<i64>,
    pub right: Matrix,
}

impl Snf {
    pub fn diagonal(&self) -> Matrix {
        let spec = self.left.spec();
        let mut d = Matrix::zeros(spec, self.left.rows(), self.right.rows());
        for (i, &e) in self.diag_valuations.iter().enumerate() {
            d.set(i, i, FieldElement::uniformizer_pow(spec, e));
        }
        d
    }

    pub fn recompose(&self) -> Result<Matrix> {
        self.left.mul(&self.diagonal())?.mul(&self.right)
    }
}

pub fn smith_normal_form(m: &Matrix) -> Result<Snf> {
    let spec = m.spec;
    let (r, c) = (m.rows, m.cols);
    let mut a: Vec<Vec<FieldElement>> = (0..r).map(|i| m.row(i)).collect();
    let mut linv: Vec<Vec<FieldElement>> = (0..r).map(|i| Matrix::identity(spec, r).row(i)).collect();
    let mut rinv: Vec<Vec<FieldElement>> = (0..c).map(|i| Matrix::identity(spec, c).row(i)).collect();
    let mut diag = Vec::new();
    for k in 0..r.min(c) {
        let mut best: Option<(usize, usize, i64)> = None;
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                if let Some(v) = x.valuation() {
                    if best.is_none_or(|b| v < b.2) {
                        best = Some((i, j, v));
                    }
                }
            }
        }
        let Some((pi, pj, e)) = best else { break };
        a.swap(pi, k);
        for row in linv.iter_mut() {
            row.swap(pi, k);
        }
        for row in a.iter_mut() {
            row.swap(pj, k);
        }
        rinv.swap(pj, k);
        // make the pivot exactly pi^e
        let u = a[k][k].shift(-e);
        let uinv = u.inv()?;
        for x in a[k].iter_mut() {
            *x = x.mul(&uinv);
        }
        for row in linv.iter_mut() {
            row[k] = row[k].mul(&u);
        }
        a[k][k] = FieldElement::uniformizer_pow(spec, e);
        for i in k + 1..r {
            if a[i][k].is_zero() {
                a[i][k] = FieldElement::zero(spec);
                continue;
            }
            let f = a[i][k].shift(-e);
            for j in k + 1..c {
                let v = a[i][j].sub(&f.mul(&a[k][j]));
                a[i][j] = v;
            }
            a[i][k] = FieldElement::zero(spec);
            for row in linv.iter_mut() {
                row[k] = row[k].add(&f.mul(&row[i]));
            }
        }
        for j in k + 1..c {
            if a[k][j].is_zero() {
                a[k][j] = FieldElement::zero(spec);
                continue;
            }
            let g = a[k][j].shift(-e);
            a[k][j] = FieldElement::zero(spec);
            let rj = rinv[j].clone();
            for (x, y) in rinv[k].iter_mut().zip(&rj) {
                *x = x.add(&g.mul(y));
            }
        }
        diag.push(e);
    }
    for row in a.iter().skip(diag.len()) {
        for x in row.iter().skip(diag.len()) {
            if !x.is_zero() {
                return Err(Error::PrecisionExhausted("residual block not certified zero".into()));
            }
        }
    }
    Ok(Snf {
        left: Matrix::from_rows(spec, linv)?,
        diag_valuations: diag,
        right: Matrix::from_rows(spec, rinv)?,
    })
}

struct ColumnReduction {
    done: Vec<Vec<FieldElement>>,
    pivots: Vec<(usize, i64)>,
    rest: Vec<Vec<FieldElement>>,
}

/// Column echelon over the valuation ring using only the first
/// `pivot_rows` coordinates for pivot decisions. Pivot entries are made
/// exactly `pi^e`. Columns left in `rest` vanish on those coordinates.
fn column_reduce(spec: FieldSpec, pivot_rows: usize, cols: Vec<Vec<FieldElement>>) -> ColumnReduction {
    let len = cols.first().map_or(0, |c| c.len());
    let mut rest = cols;
    let mut done: Vec<Vec<FieldElement>> = Vec::new();
    let mut pivots = Vec::new();
    for row in 0..pivot_rows {
        let best = rest
            .iter()
            .enumerate()
            .filter_map(|(j, c)| c[row].valuation().map(|v| (j, v)))
            .min_by_key(|&(j, v)| (v, j));
        let Some((j, e)) = best else {
            for c in rest.iter_mut() {
                c[row] = FieldElement::zero(spec);
            }
            continue;
        };
        let mut piv = rest.remove(j);
        let uinv = piv[row].shift(-e).inv().expect("pivot is nonzero");
        for x in piv.iter_mut() {
            *x = x.mul(&uinv);
        }
        piv[row] = FieldElement::uniformizer_pow(spec, e);
        for c in rest.iter_mut() {
            if c[row].is_zero() {
                c[row] = FieldElement::zero(spec);
                continue;
            }
            let f = c[row].shift(-e);
            for i in row + 1..len {
                if !piv[i].is_exact_zero() {
                    c[i] = c[i].sub(&f.mul(&piv[i]));
                }
            }
            c[row] = FieldElement::zero(spec);
        }
        done.push(piv);
        pivots.push((row, e));
    }
    ColumnReduction { done, pivots, rest }
}

/// Basis (as vectors) of `{x in O^c : M x = 0}`, for `M` given by columns.
fn integral_kernel(spec: FieldSpec, rows: usize, columns: &[Vec<FieldElement>]) -> Vec<Vec<FieldElement>> {
    let c = columns.len();
    let aug: Vec<Vec<FieldElement>> = columns
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let mut v = col.clone();
            v.extend((0..c).map(|i| if i == j { FieldElement::one(spec) } else { FieldElement::zero(spec) }));
            v
        })
        .collect();
    column_reduce(spec, rows, aug).rest.into_iter().map(|v| v[rows..].to_vec()).collect()
}

/// A finitely generated module over the valuation ring inside `K^n`, held
/// in column Hermite form: pivot entries are powers of the uniformizer,
/// entries above a pivot vanish and entries to the left of a pivot are
/// reduced modulo it.
#[derive(Clone, Debug)]
pub struct Lattice {
    spec: FieldSpec,
    dim: usize,
    basis: Vec<Vec<FieldElement>>,
    pivots: Vec<(usize, i64)>,
}

impl Lattice {
    pub fn from_generators(generators: &Matrix) -> Lattice {
        Self::from_vectors(generators.spec, generators.rows, generators.columns())
    }

    pub fn from_vectors(spec: FieldSpec, dim: usize, vectors: Vec<Vec<FieldElement>>) -> Lattice {
        if vectors.is_empty() {
            return Lattice::zero(spec, dim);
        }
        let ColumnReduction { mut done, pivots, .. } = column_reduce(spec, dim, vectors);
        for (k, &(row, _)) in pivots.iter().enumerate() {
            for x in done[k].iter_mut().take(row) {
                *x = FieldElement::zero(spec);
            }
        }
        for k in 0..done.len() {
            let (row, e) = pivots[k];
            for j in 0..k {
                let x = done[j][row].clone();
                let low = x.low_part(e);
                let high = x.sub(&low);
                if !high.is_zero() {
                    let c = high.shift(-e);
                    for i in row + 1..dim {
                        if !done[k][i].is_exact_zero() {
                            done[j][i] = done[j][i].sub(&c.mul(&done[k][i]));
                        }
                    }
                }
                done[j][row] = low;
            }
        }
        Lattice { spec, dim, basis: done, pivots }
    }

    pub fn zero(spec: FieldSpec, dim: usize) -> Lattice {
        Lattice { spec, dim, basis: Vec::new(), pivots: Vec::new() }
    }

    /// `O^n`.
    pub fn standard(spec: FieldSpec, dim: usize) -> Lattice {
        Self::diagonal(spec, &vec![0; dim])
    }

    /// `pi^e_1 O + ... + pi^e_n O`.
    pub fn diagonal(spec: FieldSpec, exponents: &[i64]) -> Lattice {
        let m = Matrix::diag(
            spec,
            &exponents.iter().map(|&e| FieldElement::uniformizer_pow(spec, e)).collect::<Vec<_>>(),
        );
        Self::from_generators(&m)
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.rank() == self.dim
    }

    pub fn basis(&self) -> Matrix {
        Matrix::from_columns(self.spec, self.dim, &self.basis)
    }

    pub fn basis_vectors(&self) -> &[Vec<FieldElement>] {
        &self.basis
    }

    /// `(row, exponent)` for each pivot.
    pub fn pivots(&self) -> &[(usize, i64)] {
        &self.pivots
    }

    /// Sum of pivot exponents; for full-rank lattices `[O^n : L] = q^this`.
    pub fn covolume_exponent(&self) -> i64 {
        self.pivots.iter().map(|&(_, e)| e).sum()
    }

    /// Coordinates in the canonical basis, if `v` lies in the span.
    pub fn coordinates(&self, v: &[FieldElement]) -> Option<Vec<FieldElement>> {
        let mut x: Vec<FieldElement> = Vec::with_capacity(self.rank());
        for (k, &(row, e)) in self.pivots.iter().enumerate() {
            let mut acc = v[row].clone();
            for (j, xj) in x.iter().enumerate() {
                acc = acc.sub(&self.basis[j][row].mul(xj));
            }
            let _ = k;
            x.push(acc.shift(-e));
        }
        for i in 0..self.dim {
            let mut acc = v[i].clone();
            for (j, xj) in x.iter().enumerate() {
                if !self.basis[j][i].is_exact_zero() {
                    acc = acc.sub(&self.basis[j][i].mul(xj));
                }
            }
            if !acc.is_zero() {
                return None;
            }
        }
        Some(x)
    }

    pub fn contains_vector(&self, v: &[FieldElement]) -> bool {
        match self.coordinates(v) {
            Some(x) => x.iter().all(|c| c.valuation().is_none_or(|val| val >= 0)),
            None => false,
        }
    }

    pub fn contains(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|v| self.contains_vector(v))
    }

    /// `pi^k * self`.
    pub fn scaled(&self, k: i64) -> Lattice {
        let vectors = self.basis.iter().map(|v| v.iter().map(|x| x.shift(k)).collect()).collect();
        Lattice::from_vectors(self.spec, self.dim, vectors)
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        let mut v = self.basis.clone();
        v.extend(other.basis.iter().cloned());
        Lattice::from_vectors(self.spec, self.dim, v)
    }

    pub fn intersect(&self, other: &Lattice) -> Lattice {
        if self.rank() == 0 || other.rank() == 0 {
            return Lattice::zero(self.spec, self.dim);
        }
        let mut relation = self.basis.clone();
        relation.extend(other.basis.iter().map(|v| v.iter().map(|x| x.neg()).collect()));
        let kernel = integral_kernel(self.spec, self.dim, &relation);
        let r1 = self.rank();
        let b = self.basis();
        let gens = kernel.iter().map(|k| b.mul_vec(&k[..r1])).collect();
        Lattice::from_vectors(self.spec, self.dim, gens)
    }

    /// `self ∩ span(columns of subspace)`.
    pub fn intersect_span(&self, subspace: &Matrix) -> Result<Lattice> {
        let m = subspace.cols();
        if m == 0 || self.rank() == 0 {
            return Ok(Lattice::zero(self.spec, self.dim));
        }
        if m >= self.dim {
            return Ok(self.clone());
        }
        let annihilator = subspace.transpose().kernel_with_nullity(self.dim - m)?.transpose();
        let eqs = annihilator.mul(&self.basis())?;
        let kernel = integral_kernel(self.spec, eqs.rows(), &eqs.columns());
        let b = self.basis();
        Ok(Lattice::from_vectors(self.spec, self.dim, kernel.iter().map(|k| b.mul_vec(k)).collect()))
    }

    /// `A(self)`.
    pub fn image(&self, a: &Matrix) -> Result<Lattice> {
        if a.cols() != self.dim {
            return Err(Error::DimensionMismatch("map does not act on this lattice".into()));
        }
        if self.rank() == 0 {
            return Ok(Lattice::zero(self.spec, a.rows()));
        }
        Ok(Lattice::from_generators(&a.mul(&self.basis())?))
    }

    /// `{x in within : A x in self}`.
    pub fn preimage_within(&self, a: &Matrix, within: &Lattice) -> Result<Lattice> {
        if a.rows() != self.dim || a.cols() != within.dim {
            return Err(Error::DimensionMismatch("map does not connect these lattices".into()));
        }
        if within.rank() == 0 {
            return Ok(within.clone());
        }
        let bu = within.basis();
        let mut relation = a.mul(&bu)?.columns();
        let ru = relation.len();
        relation.extend(self.basis.iter().map(|v| v.iter().map(|x| x.neg()).collect()));
        let kernel = integral_kernel(self.spec, self.dim, &relation);
        let gens = kernel.iter().map(|k| bu.mul_vec(&k[..ru])).collect();
        Ok(Lattice::from_vectors(self.spec, within.dim, gens))
    }

    pub fn to_doc(&self) -> LatticeDoc {
        LatticeDoc { ambient_dim: self.dim, basis: self.basis().to_doc() }
    }

    pub fn from_doc(doc: &LatticeDoc, spec: FieldSpec) -> Result<Lattice> {
        if doc.basis.is_empty() {
            return Ok(Lattice::zero(spec, doc.ambient_dim));
        }
        let m = Matrix::from_doc(&doc.basis, spec)?;
        if m.rows() != doc.ambient_dim {
            return Err(Error::DimensionMismatch("basis rows differ from ambient dimension".into()));
        }
        if m.rank() < m.cols() {
            return Err(Error::Parse("lattice basis columns are dependent".into()));
        }
        Ok(Lattice::from_generators(&m))
    }
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
            && self.dim == other.dim
            && self.pivots == other.pivots
            && self
                .basis
                .iter()
                .zip(&other.basis)
                .all(|(a, b)| a.iter().zip(b).all(|(x, y)| x.eq_to_precision(y)))
    }
}

/// Wire form: basis matrix (row major, columns are generators).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeDoc {
    pub ambient_dim: usize,
    pub basis: Vec<Vec<ElementDoc>>,
}

/// `[outer : inner]` for nested lattices of equal rank.
pub fn lattice_index(outer: &Lattice, inner: &Lattice) -> Result<BigUint> {
    if outer.rank() != inner.rank() {
        return Err(Error::RankMismatch);
    }
    if !outer.contains(inner) {
        return Err(Error::NotNested);
    }
    let rows_o: Vec<usize> = outer.pivots.iter().map(|p| p.0).collect();
    let rows_i: Vec<usize> = inner.pivots.iter().map(|p| p.0).collect();
    if rows_o != rows_i {
        return Err(Error::NotNested);
    }
    let e = inner.covolume_exponent() - outer.covolume_exponent();
    Ok(BigUint::from(outer.spec.q()).pow(e as u32))
}

/// `[A(L) : A(L) ∩ L]`, computed as `[L + A(L) : L]`.
pub fn displacement_index(a: &Matrix, l: &Lattice) -> Result<BigUint> {
    if !l.is_full_rank() {
        return Err(Error::RankMismatch);
    }
    let e = displacement_exponent(a, l)?;
    Ok(BigUint::from(l.spec.q()).pow(e as u32))
}

/// Exponent `k` with `[A(L) : A(L) ∩ L] = q^k`.
pub fn displacement_exponent(a: &Matrix, l: &Lattice) -> Result<i64> {
    let image = l.image(a)?;
    let total = l.sum(&image);
    if !total.is_full_rank() {
        return Err(Error::RankMismatch);
    }
    Ok(l.covolume_exponent() - total.covolume_exponent())
}

/// The same index through the image and the intersection.
pub fn displacement_index_via_intersection(a: &Matrix, l: &Lattice) -> Result<BigUint> {
    let image = l.image(a)?;
    let meet = image.intersect(l);
    lattice_index(&image, &meet)
}
