//! Finite truncations of two example groups: the shift on `F^Z` for a
//! cyclic group `F` of prime order, and the quotient of the p-adic
//! Heisenberg group by its central `Z_p`.

use std::collections::HashSet;

use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::localfield::{FieldElement, FieldSpec};
use crate::matrixlat::Matrix;
use crate::sampling;
use crate::spectral::scale_linear;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// `f(n) -> f(n - 1)`.
    Right,
    /// `f(n) -> f(n + 1)`.
    Left,
}

/// A value that left the window during a shift.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Truncation {
    pub index: i64,
    pub value: u8,
}

/// A configuration `Z -> Z/p` known on `[-W, W]`, constant equal to
/// `left_fill` below the window and `right_fill` above it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ShiftConfig {
    pub p: u32,
    pub window: i64,
    pub values: Vec<u8>,
    pub left_fill: u8,
    pub right_fill: u8,
    pub truncations: Vec<Truncation>,
}

impl ShiftConfig {
    pub fn zero(p: u32, window: i64) -> ShiftConfig {
        ShiftConfig {
            p,
            window,
            values: vec![0; (2 * window + 1) as usize],
            left_fill: 0,
            right_fill: 0,
            truncations: Vec::new(),
        }
    }

    pub fn constant(p: u32, window: i64, c: u8) -> ShiftConfig {
        let c = (c as u32 % p) as u8;
        ShiftConfig { values: vec![c; (2 * window + 1) as usize], left_fill: c, right_fill: c, ..Self::zero(p, window) }
    }

    pub fn delta(p: u32, window: i64, at: i64) -> ShiftConfig {
        let mut f = Self::zero(p, window);
        f.set(at, 1);
        f
    }

    pub fn get(&self, n: i64) -> u8 {
        if n < -self.window {
            self.left_fill
        } else if n > self.window {
            self.right_fill
        } else {
            self.values[(n + self.window) as usize]
        }
    }

    pub fn set(&mut self, n: i64, v: u8) {
        assert!(n.abs() <= self.window, "index outside window");
        self.values[(n + self.window) as usize] = (v as u32 % self.p) as u8;
    }

    /// Values on the window, ignoring fills and truncation records.
    pub fn window_values(&self) -> &[u8] {
        &self.values
    }

    pub fn support(&self) -> Vec<i64> {
        (-self.window..=self.window).filter(|&n| self.get(n) != 0).collect()
    }
}

pub fn shift_apply(f: &ShiftConfig, direction: Direction) -> ShiftConfig {
    let w = f.window;
    let mut g = f.clone();
    match direction {
        Direction::Right => {
            g.truncations.push(Truncation { index: w + 1, value: f.get(w) });
            for n in -w..=w {
                g.values[(n + w) as usize] = f.get(n - 1);
            }
        }
        Direction::Left => {
            g.truncations.push(Truncation { index: -w - 1, value: f.get(-w) });
            for n in -w..=w {
                g.values[(n + w) as usize] = f.get(n + 1);
            }
        }
    }
    g
}

/// All configurations with zero fills supported on `[lo, hi]`.
fn subgroup(p: u32, w: i64, lo: i64, hi: i64) -> Vec<ShiftConfig> {
    let len = (hi - lo + 1) as u32;
    (0..(p as u64).pow(len))
        .map(|mut code| {
            let mut f = ShiftConfig::zero(p, w);
            for n in lo..=hi {
                f.set(n, (code % p as u64) as u8);
                code /= p as u64;
            }
            f
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub name: String,
    pub value: Value,
    #[serde(rename = "paper_expectation")]
    pub expected: Value,
    #[serde(rename = "match")]
    pub matches: bool,
}

impl Claim {
    fn new(name: &str, value: Value, expectation: Value) -> Claim {
        let matches = value == expectation;
        Claim { name: name.into(), value, expected: expectation, matches }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub example: String,
    pub claims: Vec<Claim>,
}

impl Report {
    pub fn all_match(&self) -> bool {
        self.claims.iter().all(|c| c.matches)
    }

    pub fn claim(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }
}

const SHIFT_ENUMERATION_LIMIT: u64 = 1 << 20;

pub fn shift_report(p: u32, w: i64, seed: u64) -> Result<Report> {
    if !crate::localfield::is_prime(p) {
        return Err(Error::InvalidSpec(format!("{p} is not prime")));
    }
    if w < 2 {
        return Err(Error::InvalidSpec("window radius must be at least 2".into()));
    }
    let mut claims = Vec::new();

    // [U : alpha(U)] for U supported on [0, W]
    let u = subgroup(p, w, 0, w);
    let image: HashSet<Vec<u8>> =
        u.iter().map(|f| shift_apply(f, Direction::Right).window_values().to_vec()).collect();
    let inside = image.iter().all(|v| v[..w as usize + 1].iter().all(|&x| x == 0));
    let index = if inside && u.len().is_multiple_of(image.len()) { (u.len() / image.len()) as u64 } else { 0 };
    claims.push(Claim::new("delta_inverse", json!(index), json!(p)));

    // [alpha(U) : alpha(U) ∩ U] for the full window group U
    let full_size = (p as u64).saturating_pow((2 * w + 1) as u32);
    let mut rng = sampling::rng(seed);
    let samples: Vec<ShiftConfig> = if full_size <= SHIFT_ENUMERATION_LIMIT {
        subgroup(p, w, -w, w)
    } else {
        (0..4096)
            .map(|_| {
                let mut f = ShiftConfig::zero(p, w);
                for n in -w..=w {
                    f.set(n, rng.gen_range(0..p) as u8);
                }
                f
            })
            .collect()
    };
    let images: HashSet<ShiftConfig> = samples
        .iter()
        .map(|f| ShiftConfig { truncations: Vec::new(), ..shift_apply(f, Direction::Right) })
        .collect();
    let in_u = images.iter().filter(|g| g.left_fill == 0 && g.right_fill == 0).count();
    let compact_scale = if in_u > 0 && images.len().is_multiple_of(in_u) { images.len() / in_u } else { 0 };
    claims.push(Claim::new("scale_compact", json!(compact_scale), json!(1)));

    // linearisation: z -> X^{-1} z on F_p((X))
    let spec = FieldSpec::fpx(p, 16)?;
    let beta = Matrix::diag(spec, &[FieldElement::uniformizer_pow(spec, -1)]);
    let s_lin = scale_linear(&beta)?;
    claims.push(Claim::new("scale_linearization", json!(s_lin.value().to_string()), json!(p.to_string())));

    // every window pattern agrees on the window with a configuration whose
    // support is bounded below, and such configurations contract
    let mut dense = true;
    for f in samples.iter().take(4096) {
        let mut g = f.clone();
        g.left_fill = 0;
        g.right_fill = 1 % p as u8;
        let agree = g.window_values() == f.window_values();
        let mut h = g.clone();
        for _ in 0..(2 * w + 1) {
            h = shift_apply(&h, Direction::Right);
        }
        dense &= agree && h.support().is_empty();
    }
    claims.push(Claim::new("contraction_dense", json!(dense), json!(true)));

    Ok(Report { example: "shift".into(), claims })
}

/// `(x, y, z + Z_p)` with `z` stored as its fractional part.
#[derive(Clone, Debug)]
pub struct HeisElement {
    pub x: FieldElement,
    pub y: FieldElement,
    pub z_mod: FieldElement,
}

impl HeisElement {
    pub fn new(x: FieldElement, y: FieldElement, z: FieldElement) -> HeisElement {
        HeisElement { x, y, z_mod: z.fractional_part() }
    }

    pub fn identity(spec: FieldSpec) -> HeisElement {
        let z = FieldElement::zero(spec);
        HeisElement { x: z.clone(), y: z.clone(), z_mod: z }
    }

    pub fn inverse(&self) -> HeisElement {
        let z = self.z_mod.neg().add(&self.x.mul(&self.y));
        HeisElement::new(self.x.neg(), self.y.neg(), z)
    }

    pub fn eq_to_precision(&self, other: &HeisElement) -> bool {
        self.x.eq_to_precision(&other.x)
            && self.y.eq_to_precision(&other.y)
            && self.z_mod.sub(&other.z_mod).fractional_part().is_zero()
    }

    /// Whether the element lies in `{(x, y, xy + Z_p)}`.
    pub fn in_big_cell(&self) -> bool {
        self.z_mod.sub(&self.x.mul(&self.y)).fractional_part().is_zero()
    }

    pub fn to_json(&self) -> Value {
        json!({ "x": self.x.to_doc(), "y": self.y.to_doc(), "z_mod": self.z_mod.to_doc() })
    }
}

pub fn heis_mul(a: &HeisElement, b: &HeisElement) -> HeisElement {
    let z = a.z_mod.add(&b.z_mod).add(&a.x.mul(&b.y));
    HeisElement::new(a.x.add(&b.x), a.y.add(&b.y), z)
}

/// `(x, y, z) -> (p x, y / p, z)`.
pub fn heis_alpha(a: &HeisElement) -> HeisElement {
    HeisElement { x: a.x.shift(1), y: a.y.shift(-1), z_mod: a.z_mod.clone() }
}

pub fn heis_alpha_inv(a: &HeisElement) -> HeisElement {
    HeisElement { x: a.x.shift(-1), y: a.y.shift(1), z_mod: a.z_mod.clone() }
}

pub fn random_heis<R: Rng>(rng: &mut R, spec: FieldSpec) -> HeisElement {
    let part = |rng: &mut R| {
        if rng.gen_bool(0.1) {
            FieldElement::zero(spec)
        } else {
            sampling::scaled_unit(rng, spec, -3..=3, 6)
        }
    };
    let x = part(rng);
    let y = part(rng);
    let z = part(rng);
    HeisElement::new(x, y, z)
}

pub fn heis_report(p: u32, precision: u32, seed: u64) -> Result<Report> {
    if precision < 4 {
        return Err(Error::InvalidSpec("precision must be at least 4".into()));
    }
    let spec = FieldSpec::qp(p, precision)?;
    let mut rng = sampling::rng(seed);
    let zero = FieldElement::zero(spec);
    let steps = precision as i64;
    let mut claims = Vec::new();

    // (x,0,0) contracts, (0,y,0) contracts under alpha^{-1}, (0,0,z) is
    // fixed and nonzero cosets stay at distance >= p from the identity
    let mut contract = true;
    let mut anti = true;
    let mut levi = true;
    for _ in 0..64 {
        let x = sampling::scaled_unit(&mut rng, spec, -3..=3, 6);
        let v0 = x.valuation().unwrap();
        let mut g = HeisElement::new(x.clone(), zero.clone(), zero.clone());
        for k in 1..=steps {
            g = heis_alpha(&g);
            contract &= g.x.valuation() == Some(v0 + k) && g.y.is_zero() && g.z_mod.is_zero();
        }
        let mut h = HeisElement::new(zero.clone(), x.clone(), zero.clone());
        for k in 1..=steps {
            h = heis_alpha_inv(&h);
            anti &= h.y.valuation() == Some(v0 + k) && h.x.is_zero();
        }
        let z = sampling::scaled_unit(&mut rng, spec, -4..=-1, 6);
        let c = HeisElement::new(zero.clone(), zero.clone(), z);
        let fixed = heis_alpha(&c).eq_to_precision(&c);
        let far = c.z_mod.valuation().is_some_and(|v| v <= -1);
        let moved = HeisElement::new(x, zero.clone(), zero.clone());
        let unbounded = heis_alpha_inv(&moved).x.valuation() < moved.x.valuation();
        levi &= fixed && far && unbounded;
    }
    claims.push(Claim::new(
        "orbit_dynamics",
        json!({ "cont_fwd": contract, "cont_bwd": anti, "levi_discrete": levi }),
        json!({ "cont_fwd": true, "cont_bwd": true, "levi_discrete": true }),
    ));

    // cont_fwd * cont_bwd lies in S; shifting z by a non-integer leaves S
    let mut products_in = true;
    let mut perturbed_out = true;
    for _ in 0..64 {
        let x = sampling::scaled_unit(&mut rng, spec, -3..=3, 6);
        let y = sampling::scaled_unit(&mut rng, spec, -3..=3, 6);
        let g = heis_mul(
            &HeisElement::new(x, zero.clone(), zero.clone()),
            &HeisElement::new(zero.clone(), y, zero.clone()),
        );
        products_in &= g.in_big_cell();
        let bump = HeisElement::new(zero.clone(), zero.clone(), FieldElement::uniformizer_pow(spec, -1));
        perturbed_out &= !heis_mul(&g, &bump).in_big_cell();
    }
    claims.push(Claim::new(
        "big_cell_membership",
        json!({ "products_in_cell": products_in, "perturbed_outside": perturbed_out }),
        json!({ "products_in_cell": true, "perturbed_outside": true }),
    ));

    let pinv = FieldElement::uniformizer_pow(spec, -1);
    let pinv2 = FieldElement::uniformizer_pow(spec, -2);
    let u = HeisElement::new(pinv.clone(), pinv.clone(), pinv2.clone());
    let v = HeisElement::new(pinv.neg(), pinv.neg(), pinv2.clone());
    let uv = heis_mul(&u, &v);
    let expected = HeisElement::new(zero.clone(), zero.clone(), pinv2);
    let witness_ok = u.in_big_cell() && v.in_big_cell() && !uv.in_big_cell() && uv.eq_to_precision(&expected);
    claims.push(Claim {
        name: "non_subgroup_witness".into(),
        value: json!({ "u": u.to_json(), "v": v.to_json(), "uv": uv.to_json(), "uv_in_cell": uv.in_big_cell() }),
        expected: json!({ "uv_in_cell": false }),
        matches: witness_ok,
    });

    let lie = Matrix::diag(spec, &[FieldElement::from_int(p as i64, spec), pinv, FieldElement::one(spec)]);
    let s = scale_linear(&lie)?;
    claims.push(Claim {
        name: "scale".into(),
        value: json!({ "value": s.value().to_string(), "route": "polygon" }),
        expected: json!(p.to_string()),
        matches: s.value().to_string() == p.to_string(),
    });

    Ok(Report { example: "heisenberg".into(), claims })
}
