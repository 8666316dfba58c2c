//! Tidy lattices for linear maps: `U_+`, `U_-`, tidiness tests, tidy balls
//! and an exhaustive displacement-index minimiser used as an independent
//! check on the scale.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, FieldKind, FieldSpec, EXACT};
use crate::matrixlat::{displacement_exponent, lattice_index, Lattice, Matrix};
use crate::spectral::{adapted_lattice, dynamical_subspaces, DynamicalSubspaces, Scale};

#[derive(Clone, Debug)]
pub struct PlusMinus {
    pub u_plus: Lattice,
    pub u_minus: Lattice,
    /// `U_0 = L`, `U_{n+1} = L ∩ A(U_n)`.
    pub iterate_trace: Vec<Lattice>,
}

fn index_exponent(outer: &Lattice, inner: &Lattice) -> Result<u64> {
    let q = outer.spec().q();
    let idx = lattice_index(outer, inner)?;
    let mut e = 0;
    let mut x = BigUint::from(1u32);
    while x < idx {
        x *= q;
        e += 1;
    }
    Ok(e)
}

fn stabilise(start: Lattice, cap: usize, step: impl Fn(&Lattice) -> Result<Lattice>) -> Result<Lattice> {
    let mut cur = start;
    for _ in 0..cap {
        let next = step(&cur)?;
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
    Err(Error::PrecisionExhausted("intersection sequence did not stabilise".into()))
}

pub fn compute_plus_minus(a: &Matrix, l: &Lattice, n_max: usize) -> Result<PlusMinus> {
    let dyn_ = dynamical_subspaces(a)?;
    plus_minus_from(a, l, n_max, &dyn_)
}

fn plus_minus_from(a: &Matrix, l: &Lattice, n_max: usize, dyn_: &DynamicalSubspaces) -> Result<PlusMinus> {
    if !l.is_full_rank() {
        return Err(Error::RankMismatch);
    }
    let n = a.rows();
    let cap = 64 * (n + 1) + n_max;
    let u_plus = stabilise(l.intersect_span(&dyn_.par_bwd)?, cap, |p| Ok(p.intersect(&p.image(a)?)))?;
    let u_minus = stabilise(l.intersect_span(&dyn_.par_fwd)?, cap, |q| q.preimage_within(a, q))?;

    let mut iterate_trace = vec![l.clone()];
    for _ in 0..n_max {
        let last = iterate_trace.last().unwrap();
        iterate_trace.push(l.intersect(&last.image(a)?));
    }

    for b in u_minus.basis_vectors() {
        let mut x = b.clone();
        for _ in 0..n_max {
            x = a.mul_vec(&x);
            if !l.contains_vector(&x) {
                return Err(Error::PrecisionExhausted("forward orbit of U_- left the lattice".into()));
            }
        }
    }
    if u_plus.rank() > 0 {
        let v = &dyn_.par_bwd;
        let back = a.restrict_to(v)?.inverse()?;
        for b in u_plus.basis_vectors() {
            let col = Matrix::from_columns(a.spec(), n, std::slice::from_ref(b));
            let mut c = v.solve_in_span(&col)?.ok_or(Error::NotInvariant)?.column(0);
            for _ in 0..n_max {
                c = back.mul_vec(&c);
                if !l.contains_vector(&v.mul_vec(&c)) {
                    return Err(Error::PrecisionExhausted("regressive trajectory of U_+ left the lattice".into()));
                }
            }
        }
    }
    Ok(PlusMinus { u_plus, u_minus, iterate_trace })
}

#[derive(Clone, Debug)]
pub struct TidyReport {
    pub input_lattice: Lattice,
    pub u_plus: Lattice,
    pub u_minus: Lattice,
    pub iterate_trace: Vec<Lattice>,
    pub tidy_above: bool,
    pub tidy_below: bool,
    /// `U_- = (U_- ∩ cont) + (U_- ∩ U_+)`.
    pub u_minus_split: bool,
    /// Exponents `k` with `[A^{n+1} U_+ : A^n U_+] = q^k`.
    pub index_sequence: Vec<u64>,
    pub displacement: Scale,
    pub scale_claim: Option<Scale>,
}

impl TidyReport {
    pub fn is_tidy(&self) -> bool {
        self.tidy_above && self.tidy_below
    }

    pub fn to_json(&self) -> Value {
        let q = self.input_lattice.spec().q();
        let pow = |e: u64| Scale { base: q, exponent: e }.value().to_string();
        json!({
            "input_lattice": self.input_lattice.to_doc(),
            "u_plus": self.u_plus.to_doc(),
            "u_minus": self.u_minus.to_doc(),
            "iterate_trace": self.iterate_trace.iter().map(|l| l.to_doc()).collect::<Vec<_>>(),
            "tidy_above": self.tidy_above,
            "tidy_below": self.tidy_below,
            "u_minus_split": self.u_minus_split,
            "index_sequence": self.index_sequence.iter().map(|&e| pow(e)).collect::<Vec<_>>(),
            "displacement": self.displacement,
            "scale_claim": self.scale_claim,
        })
    }
}

pub fn tidiness_report(a: &Matrix, l: &Lattice) -> Result<TidyReport> {
    let n = a.rows();
    let n_check = n + 2;
    let dyn_ = dynamical_subspaces(a)?;
    let pm = plus_minus_from(a, l, n_check, &dyn_)?;
    let tidy_above = pm.u_plus.sum(&pm.u_minus) == *l;
    let mut index_sequence = Vec::new();
    let mut cur = pm.u_plus.clone();
    for _ in 0..=n_check {
        let next = cur.image(a)?;
        index_sequence.push(index_exponent(&next, &cur)?);
        cur = next;
    }
    let tidy_below = index_sequence.windows(2).all(|w| w[0] == w[1]);
    let cont_part = pm.u_minus.intersect_span(&dyn_.cont_fwd)?;
    let u_minus_split = cont_part.sum(&pm.u_minus.intersect(&pm.u_plus)) == pm.u_minus;
    let q = a.spec().q();
    let displacement = Scale { base: q, exponent: displacement_exponent(a, l)? as u64 };
    let scale_claim = (tidy_above && tidy_below).then(|| Scale { base: q, exponent: index_sequence[0] });
    Ok(TidyReport {
        input_lattice: l.clone(),
        u_plus: pm.u_plus,
        u_minus: pm.u_minus,
        iterate_trace: pm.iterate_trace,
        tidy_above,
        tidy_below,
        u_minus_split,
        index_sequence,
        displacement,
        scale_claim,
    })
}

/// The ball of radius `q^{-r}` for the adapted norm of `a`.
pub fn tidy_ball(a: &Matrix, radius_exponent: i64) -> Result<Lattice> {
    Ok(adapted_lattice(a, 1)?.ball(radius_exponent))
}

/// The scale as the displacement index of the tidy ball.
pub fn scale_by_index(a: &Matrix) -> Result<Scale> {
    let ball = tidy_ball(a, 0)?;
    Ok(Scale { base: a.spec().q(), exponent: displacement_exponent(a, &ball)? as u64 })
}

pub const DEFAULT_BUDGET: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub struct OracleResult {
    pub min_index: Scale,
    pub argmin: Lattice,
    pub candidates_examined: u64,
}

impl OracleResult {
    pub fn to_json(&self) -> Value {
        json!({
            "min_index": self.min_index.value().to_string(),
            "argmin_basis": self.argmin.to_doc().basis,
            "candidates_examined": self.candidates_examined,
        })
    }
}

/// Number of column Hermite forms of lattices between `pi^{2k} O^n` and
/// `O^n` with pivot exponents at most `2k` (before the containment filter).
pub fn window_candidates(q: u32, n: usize, k: u32) -> u128 {
    let mut total: u128 = 1;
    for i in 0..n as u32 {
        let mut row: u128 = 0;
        for e in 0..=2 * k {
            row = row.saturating_add((q as u128).saturating_pow(e * i));
        }
        total = total.saturating_mul(row);
    }
    total
}

fn digits_element(spec: FieldSpec, digits: &[u8]) -> FieldElement {
    match spec.kind() {
        FieldKind::Laurent => FieldElement::series_from_poly(spec, digits),
        FieldKind::Padic => FieldElement::from_digits(spec, 0, digits, EXACT),
    }
}

/// The `idx`-th candidate in the fixed enumeration order.
fn window_candidate(spec: FieldSpec, n: usize, k: u32, mut idx: u128) -> Lattice {
    let q = spec.q() as u128;
    let mut cols = vec![vec![FieldElement::zero(spec); n]; n];
    for i in 0..n {
        let sizes: Vec<u128> = (0..=2 * k).map(|e| q.pow(e * i as u32)).collect();
        let row_total: u128 = sizes.iter().sum();
        let mut r = idx % row_total;
        idx /= row_total;
        let mut e = 0;
        while r >= sizes[e] {
            r -= sizes[e];
            e += 1;
        }
        cols[i][i] = FieldElement::uniformizer_pow(spec, e as i64);
        for col in cols.iter_mut().take(i) {
            let digits: Vec<u8> = (0..e)
                .map(|_| {
                    let d = (r % q) as u8;
                    r /= q;
                    d
                })
                .collect();
            col[i] = digits_element(spec, &digits);
        }
    }
    Lattice::from_vectors(spec, n, cols)
}

/// Minimum of `[A(M) : A(M) ∩ M]` over all lattices `pi^k O^n ⊆ M ⊆
/// pi^{-k} O^n`. Ties go to the first candidate in enumeration order.
pub fn scale_oracle(a: &Matrix, k: u32, budget: u64) -> Result<OracleResult> {
    let spec = a.spec();
    let n = a.rows();
    let total = window_candidates(spec.q(), n, k);
    if total > budget as u128 {
        return Err(Error::BudgetExceeded(budget));
    }
    let floor = Lattice::standard(spec, n).scaled(2 * k as i64);
    let best = (0..total as u64)
        .into_par_iter()
        .map(|idx| -> Result<Option<(i64, u64)>> {
            let cand = window_candidate(spec, n, k, idx as u128);
            if !cand.contains(&floor) {
                return Ok(None);
            }
            let m = cand.scaled(-(k as i64));
            Ok(Some((displacement_exponent(a, &m)?, idx)))
        })
        .try_fold(|| None, |acc: Option<(i64, u64)>, x| x.map(|x| acc.into_iter().chain(x).min()))
        .try_reduce(|| None, |a, b| Ok(a.into_iter().chain(b).min()))?;
    let (e, idx) = best.expect("O^n is always a candidate");
    Ok(OracleResult {
        min_index: Scale { base: spec.q(), exponent: e as u64 },
        argmin: window_candidate(spec, n, k, idx as u128).scaled(-(k as i64)),
        candidates_examined: total as u64,
    })
}
