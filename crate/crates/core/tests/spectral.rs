use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use scalelab::sampling::{self, RationalMatrix};
use scalelab::spectral::{
    adapted_lattice, characteristic_decomposition, characteristic_values, classify_linear, conjugation_operator,
    dynamical_subspaces, inner_scale_gl, scale_by_module, scale_by_polygon, scale_linear, subquotient_scales,
    with_precision_retry, Classification, Scale,
};
use scalelab::tidy::scale_by_index;
use scalelab::{FieldElement, FieldSpec, Lattice, Matrix};

fn specs() -> Vec<FieldSpec> {
    vec![
        FieldSpec::qp(2, 32).unwrap(),
        FieldSpec::qp(3, 32).unwrap(),
        FieldSpec::qp(5, 32).unwrap(),
        FieldSpec::fpx(2, 32).unwrap(),
    ]
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(41), failure_persistence: None, ..ProptestConfig::default() }
}

fn pi(spec: FieldSpec, k: i64) -> FieldElement {
    FieldElement::uniformizer_pow(spec, k)
}

fn zero(spec: FieldSpec) -> FieldElement {
    FieldElement::zero(spec)
}

fn one(spec: FieldSpec) -> FieldElement {
    FieldElement::one(spec)
}

fn diag(spec: FieldSpec, exps: &[i64]) -> Matrix {
    Matrix::diag(spec, &exps.iter().map(|&e| pi(spec, e)).collect::<Vec<_>>())
}

fn rows(spec: FieldSpec, r: Vec<Vec<FieldElement>>) -> Matrix {
    Matrix::from_rows(spec, r).unwrap()
}

fn span(spec: FieldSpec, n: usize, idx: &[usize]) -> Matrix {
    Matrix::from_columns(spec, n, &idx.iter().map(|&i| Matrix::identity(spec, n).column(i)).collect::<Vec<_>>())
}

fn same_span(a: &Matrix, b: &Matrix) -> bool {
    a.cols() == b.cols() && (a.cols() == 0 || a.hstack(b).unwrap().rank() == a.cols())
}

fn scale(spec: FieldSpec, e: u64) -> Scale {
    Scale { base: spec.q(), exponent: e }
}

fn companion_x2_px_p(spec: FieldSpec) -> Matrix {
    let p = pi(spec, 1);
    rows(spec, vec![vec![zero(spec), p.neg()], vec![one(spec), p]])
}

fn jordan(spec: FieldSpec, n: usize) -> Matrix {
    let mut m = Matrix::zeros(spec, n, n);
    for i in 0..n - 1 {
        m.set(i, i + 1, one(spec));
    }
    m
}

#[test]
fn characteristic_value_examples() {
    for spec in specs() {
        let r = |n: i64, d: i64| Some(Ratio::new(n, d));
        assert_eq!(characteristic_values(&diag(spec, &[1, 0, -1])).unwrap(), vec![(r(1, 1), 1), (r(0, 1), 1), (r(-1, 1), 1)]);
        assert_eq!(characteristic_values(&companion_x2_px_p(spec)).unwrap(), vec![(r(1, 2), 2)]);
        assert_eq!(characteristic_values(&jordan(spec, 3)).unwrap(), vec![(None, 3)]);
    }
}

#[test]
fn decomposition_examples() {
    for spec in specs() {
        let dec = characteristic_decomposition(&diag(spec, &[1, 0, -1])).unwrap();
        for (i, c) in dec.components.iter().enumerate() {
            assert!(same_span(&c.basis, &span(spec, 3, &[i])));
        }

        let p = pi(spec, 1);
        let a = rows(spec, vec![vec![one(spec), one(spec)], vec![zero(spec), p.clone()]]);
        let dec = characteristic_decomposition(&a).unwrap();
        let unit = dec.components.iter().find(|c| c.rho_exponent == Some(Ratio::from_integer(0))).unwrap();
        assert!(same_span(&unit.basis, &span(spec, 2, &[0])));
        let small = dec.components.iter().find(|c| c.rho_exponent == Some(Ratio::from_integer(1))).unwrap();
        let v = small.basis.column(0);
        let av = a.mul_vec(&v);
        assert!(av.iter().zip(&v).all(|(x, y)| x.eq_to_precision(&p.mul(y))));
        let expected = Matrix::from_columns(spec, 2, &[vec![one(spec), p.sub(&one(spec))]]);
        assert!(same_span(&small.basis, &expected));

        let mut b = Matrix::zeros(spec, 3, 3);
        b.set(0, 1, one(spec));
        b.set(2, 2, pi(spec, -1));
        let dec = characteristic_decomposition(&b).unwrap();
        let e0 = dec.components.iter().find(|c| c.rho_exponent.is_none()).unwrap();
        assert!(same_span(&e0.basis, &span(spec, 3, &[0, 1])));
        let ep = dec.components.iter().find(|c| c.rho_exponent == Some(Ratio::from_integer(-1))).unwrap();
        assert!(same_span(&ep.basis, &span(spec, 3, &[2])));
    }
}

#[test]
fn dynamical_subspace_examples() {
    for spec in specs() {
        let d = dynamical_subspaces(&diag(spec, &[1, 0, -1])).unwrap();
        assert!(same_span(&d.cont_fwd, &span(spec, 3, &[0])));
        assert!(same_span(&d.levi, &span(spec, 3, &[1])));
        assert!(same_span(&d.cont_bwd, &span(spec, 3, &[2])));
        assert!(same_span(&d.par_fwd, &span(spec, 3, &[0, 1])));
        assert!(same_span(&d.par_bwd, &span(spec, 3, &[1, 2])));

        let h = dynamical_subspaces(&diag(spec, &[1, -1, 0])).unwrap();
        assert!(same_span(&h.cont_fwd, &span(spec, 3, &[0])));
        assert!(same_span(&h.cont_bwd, &span(spec, 3, &[1])));
        assert!(same_span(&h.levi, &span(spec, 3, &[2])));

        let u = rows(spec, vec![vec![one(spec), one(spec)], vec![zero(spec), one(spec)]]);
        let d = dynamical_subspaces(&u).unwrap();
        assert_eq!(d.levi.cols(), 2);
        assert_eq!(d.cont_fwd.cols() + d.cont_bwd.cols(), 0);
        assert_eq!((d.par_fwd.cols(), d.par_bwd.cols()), (2, 2));
    }
}

#[test]
fn scale_examples() {
    for spec in specs() {
        assert_eq!(scale_linear(&diag(spec, &[-1, 1])).unwrap(), scale(spec, 1));
        assert_eq!(scale_linear(&companion_x2_px_p(spec)).unwrap(), scale(spec, 0));
        assert_eq!(scale_linear(&jordan(spec, 2)).unwrap(), scale(spec, 0));
        assert_eq!(scale_linear(&diag(spec, &[-1, -1])).unwrap().value(), spec.q().pow(2).into());
        let d = dynamical_subspaces(&companion_x2_px_p(spec)).unwrap();
        assert_eq!(d.par_bwd.cols(), 0);
    }
}

#[test]
fn adapted_norm_examples() {
    let mut rng = sampling::rng(70);
    for spec in specs() {
        let a = diag(spec, &[1, -1]);
        let norm = adapted_lattice(&a, 1).unwrap();
        assert_eq!(norm.ball(0), Lattice::standard(spec, 2));
        let e1 = [pi(spec, 3), zero(spec)];
        assert_eq!(norm.norm_exponent(&a.mul_vec(&e1)), Some(Ratio::from_integer(4)));

        let u = rows(spec, vec![vec![one(spec), pi(spec, -1)], vec![zero(spec), one(spec)]]);
        let ball = adapted_lattice(&u, 1).unwrap().ball(0);
        assert_eq!(ball.image(&u).unwrap(), ball);
        assert_eq!(ball.image(&u.inverse().unwrap()).unwrap(), ball);
        assert_eq!(ball, Lattice::diagonal(spec, &[-1, 0]));

        let b = rows(spec, vec![vec![zero(spec), pi(spec, 1)], vec![one(spec), zero(spec)]]);
        let norm = adapted_lattice(&b, 1).unwrap();
        let c = &norm.components[0];
        assert_eq!(c.denominator, 2);
        assert!(c.level(0).contains(&c.level(1)) && c.level(1).contains(&c.level(2)));
        assert_ne!(c.level(0), c.level(1));
        assert_eq!(c.level(2), c.level(0).scaled(1));
        for _ in 0..100 {
            let v: Vec<FieldElement> = (0..2).map(|_| sampling::scaled_unit(&mut rng, spec, -3..=3, 6)).collect();
            let before = norm.norm_exponent(&v).unwrap();
            assert_eq!(norm.norm_exponent(&b.mul_vec(&v)), Some(before + Ratio::new(1, 2)));
        }
    }
}

#[test]
fn classification_examples() {
    for spec in specs() {
        assert_eq!(classify_linear(&diag(spec, &[1, 1, 1])).unwrap(), Classification::Contractive);
        assert_eq!(classify_linear(&diag(spec, &[1, -1])).unwrap(), Classification::ExpansiveMixed);
        let one_ = one(spec);
        let two = one_.add(&one_);
        let m = rows(spec, vec![vec![one_.clone(), one_.clone()], vec![one_.clone(), two]]);
        assert_eq!(classify_linear(&m).unwrap(), Classification::Distal);
        assert_eq!(classify_linear(&diag(spec, &[0, 1])).unwrap(), Classification::None);
    }
}

#[test]
fn inner_scale_examples() {
    for spec in specs() {
        assert_eq!(inner_scale_gl(&Matrix::identity(spec, 2)).unwrap(), scale(spec, 0));
        assert_eq!(inner_scale_gl(&diag(spec, &[1, 0])).unwrap(), scale(spec, 1));
        assert_eq!(inner_scale_gl(&diag(spec, &[1, 1])).unwrap(), scale(spec, 0));
    }
}

#[test]
fn subquotient_examples() {
    for spec in specs() {
        let a = rows(spec, vec![vec![pi(spec, -1), one(spec)], vec![zero(spec), pi(spec, -1)]]);
        let r = subquotient_scales(&a, &span(spec, 2, &[0])).unwrap();
        assert_eq!((r.sub, r.quotient, r.total), (scale(spec, 1), scale(spec, 1), scale(spec, 2)));
        let d = diag(spec, &[-1, 1]);
        let r = subquotient_scales(&d, &span(spec, 2, &[1])).unwrap();
        assert_eq!((r.sub, r.quotient, r.total), (scale(spec, 0), scale(spec, 1), scale(spec, 1)));
        let r = subquotient_scales(&d, &span(spec, 2, &[0])).unwrap();
        assert_eq!((r.sub, r.quotient, r.total), (scale(spec, 1), scale(spec, 0), scale(spec, 1)));
        assert!(subquotient_scales(&a, &span(spec, 2, &[1])).is_err());
    }
}

#[test]
fn scale_serializes_value_as_string() {
    let json = serde_json::to_value(Scale { base: 2, exponent: 70 }).unwrap();
    assert_eq!(json["value"], serde_json::json!("1180591620717411303424"));
    assert_eq!(json["exponent"], serde_json::json!(70));
}

proptest! {
    #![proptest_config(config(60))]

    #[test]
    fn scale_routes_agree(s in 0usize..4, seed in any::<u64>(), n in 2usize..5) {
        let mut rng = sampling::rng(seed);
        let m = RationalMatrix::random(&mut rng, n, n, 100);
        let routes = with_precision_retry(specs()[s].with_precision(64).unwrap(), |spec| {
            let a = m.at(spec);
            Ok((scale_by_polygon(&a)?, scale_by_module(&a)?, scale_by_index(&a)?))
        })
        .unwrap();
        prop_assert_eq!(routes.0, routes.1);
        prop_assert_eq!(routes.1, routes.2);
    }

    #[test]
    fn decomposition_is_certified(s in 0usize..4, seed in any::<u64>(), n in 2usize..5) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let a = sampling::sparse_matrix(&mut rng, spec, n, -1..=1, 0.4);
        let dec = characteristic_decomposition(&a).unwrap();
        prop_assert_eq!(dec.components.iter().map(|c| c.multiplicity).sum::<usize>(), n);
        prop_assert_eq!(dec.full_basis().rank(), n);
        for c in &dec.components {
            let r = a.restrict_to(&c.basis).unwrap();
            if c.rho_exponent.is_some() {
                prop_assert!(!r.det().unwrap().is_zero());
            }
        }
    }

    #[test]
    fn fitting_reduction(s in 0usize..4, seed in any::<u64>(), n in 2usize..5) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let a = sampling::sparse_matrix(&mut rng, spec, n, -1..=1, 0.5);
        let dec = characteristic_decomposition(&a).unwrap();
        let pos = dec.span_where(n, |e| e.is_some());
        let s_pos = if pos.cols() == 0 { Scale::one(spec.q()) } else { scale_linear(&a.restrict_to(&pos).unwrap()).unwrap() };
        prop_assert_eq!(scale_linear(&a).unwrap(), s_pos);
    }

    #[test]
    fn adapted_norm_law(s in 0usize..4, seed in any::<u64>(), n in 2usize..4) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let a = sampling::sparse_matrix(&mut rng, spec, n, -1..=1, 0.4);
        let norm = adapted_lattice(&a, 1).unwrap();
        for c in &norm.components {
            for _ in 0..20 {
                let coeffs: Vec<FieldElement> =
                    (0..c.basis.cols()).map(|_| sampling::scaled_unit(&mut rng, spec, -3..=3, 6)).collect();
                let v = c.basis.mul_vec(&coeffs);
                let before = norm.norm_exponent(&v).unwrap();
                let after = norm.norm_exponent(&a.mul_vec(&v));
                match c.rho_exponent {
                    Some(e) => prop_assert_eq!(after, Some(before + e)),
                    None => prop_assert!(after.is_none_or(|t| t >= before + Ratio::from_integer(1))),
                }
            }
        }
        let mixed: Vec<FieldElement> = (0..n).map(|_| sampling::scaled_unit(&mut rng, spec, -2..=2, 6)).collect();
        let parts = norm.split(&mixed);
        let each = parts.iter().zip(&norm.components).filter_map(|(w, c)| c.norm_exponent(w)).min();
        prop_assert_eq!(norm.norm_exponent(&mixed), each);
    }

    #[test]
    fn product_formula(s in 0usize..4, seed in any::<u64>(), k in 1usize..3, l in 1usize..3) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let n = k + l;
        let mut a = sampling::matrix(&mut rng, spec, n, n, 50);
        for r in k..n {
            for c in 0..k {
                a.set(r, c, zero(spec));
            }
        }
        let f = span(spec, n, &(0..k).collect::<Vec<_>>());
        let r = subquotient_scales(&a, &f).unwrap();
        prop_assert_eq!(r.total, r.sub.mul(&r.quotient));
        prop_assert!(r.sub.divides(&r.total));
    }

    #[test]
    fn bracket_closure(s in 0usize..4, seed in any::<u64>()) {
        let n = 2;
        let mut rng = sampling::rng(seed);
        let gm = RationalMatrix::random(&mut rng, n, n, 20);
        let base = specs()[s];
        prop_assume!(!gm.at(base).det().unwrap().is_zero());
        let (spec, d) = with_precision_retry(base, |sp| Ok((sp, dynamical_subspaces(&conjugation_operator(&gm.at(sp))?)?))).unwrap();
        for (name, sub) in d.named().into_iter().take(5) {
            if sub.cols() == 0 {
                continue;
            }
            let pick = |rng: &mut rand_chacha::ChaCha8Rng| {
                let c: Vec<FieldElement> = (0..sub.cols()).map(|_| sampling::integral(rng, spec, 6)).collect();
                let v = sub.mul_vec(&c);
                Matrix::from_rows(spec, v.chunks(n).map(|r| r.to_vec()).collect()).unwrap()
            };
            let x = pick(&mut rng);
            let y = pick(&mut rng);
            let br = x.mul(&y).unwrap().sub(&y.mul(&x).unwrap()).unwrap();
            let flat: Vec<FieldElement> = (0..n).flat_map(|r| br.row(r)).collect();
            let col = Matrix::from_columns(spec, n * n, &[flat]);
            prop_assert!(sub.solve_in_span(&col).unwrap().is_some(), "{} not closed", name);
        }
    }
}
