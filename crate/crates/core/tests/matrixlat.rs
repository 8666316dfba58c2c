use num_bigint::BigUint;
use num_rational::Ratio;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use scalelab::localfield::FieldSpec;
use scalelab::matrixlat::{displacement_index, displacement_index_via_intersection, lattice_index, LatticeDoc};
use scalelab::sampling;
use scalelab::spectral::companion;
use scalelab::{AbsValue, Error, FieldElement, Lattice, Matrix, Poly};

fn specs() -> Vec<FieldSpec> {
    vec![
        FieldSpec::qp(2, 32).unwrap(),
        FieldSpec::qp(3, 32).unwrap(),
        FieldSpec::fpx(2, 32).unwrap(),
        FieldSpec::fpx(3, 32).unwrap(),
    ]
}

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, rng_seed: RngSeed::Fixed(37), failure_persistence: None, ..ProptestConfig::default() }
}

fn pi(spec: FieldSpec, k: i64) -> FieldElement {
    FieldElement::uniformizer_pow(spec, k)
}

fn diag(spec: FieldSpec, exps: &[i64]) -> Matrix {
    Matrix::diag(spec, &exps.iter().map(|&e| pi(spec, e)).collect::<Vec<_>>())
}

fn jordan(spec: FieldSpec) -> Matrix {
    let mut m = Matrix::zeros(spec, 2, 2);
    m.set(0, 1, FieldElement::one(spec));
    m
}

fn q_pow(spec: FieldSpec, e: u32) -> BigUint {
    BigUint::from(spec.q()).pow(e)
}

/// Matrix in `GL_n` of the valuation ring.
fn unit_matrix(seed: u64, spec: FieldSpec, n: usize) -> Matrix {
    let mut rng = sampling::rng(seed);
    loop {
        let m = sampling::sparse_matrix(&mut rng, spec, n, 0..=2, 0.3);
        if m.det().unwrap().valuation() == Some(0) && m.min_valuation() == Some(0) {
            return m;
        }
    }
}

#[test]
fn char_poly_examples() {
    for spec in specs() {
        let p = pi(spec, 1);
        let one = FieldElement::one(spec);
        let f = Poly::new(spec, vec![p.clone(), p.neg(), one.clone()]).unwrap();
        assert!(companion(&f).unwrap().char_poly().unwrap().eq_to_precision(&f));

        let expected = Poly::new(spec, vec![one.clone(), p.add(&pi(spec, -1)).neg(), one.clone()]).unwrap();
        assert!(diag(spec, &[1, -1]).char_poly().unwrap().eq_to_precision(&expected));

        let x2 = Poly::one(spec).shift(2);
        assert!(jordan(spec).char_poly().unwrap().eq_to_precision(&x2));
    }
}

#[test]
fn module_examples() {
    for spec in specs() {
        let q = spec.q();
        assert_eq!(diag(spec, &[1, -1]).module_of().unwrap(), AbsValue::new(q, Ratio::from_integer(0)));
        assert_eq!(diag(spec, &[1, 1]).module_of().unwrap(), AbsValue::new(q, Ratio::from_integer(2)));
        let p = pi(spec, 1);
        let f = Poly::new(spec, vec![p.clone(), p.neg(), FieldElement::one(spec)]).unwrap();
        assert_eq!(companion(&f).unwrap().module_of().unwrap(), AbsValue::new(q, Ratio::from_integer(1)));
    }
}

#[test]
fn snf_examples() {
    for spec in specs() {
        let a = diag(spec, &[1, 0]);
        let snf = a.smith_normal_form().unwrap();
        assert_eq!(snf.diag_valuations, vec![0, 1]);
        assert!(snf.recompose().unwrap().eq_to_precision(&a));

        let one = FieldElement::one(spec);
        let b = Matrix::from_rows(
            spec,
            vec![vec![one.clone(), one.clone()], vec![one.clone(), one.add(&pi(spec, 1))]],
        )
        .unwrap();
        let snf = b.smith_normal_form().unwrap();
        assert_eq!(snf.diag_valuations, vec![0, 1]);
        assert!(snf.recompose().unwrap().eq_to_precision(&b));

        let z = Matrix::zeros(spec, 2, 3);
        assert!(z.smith_normal_form().unwrap().diag_valuations.is_empty());
    }
}

#[test]
fn sum_and_intersection_examples() {
    for spec in specs() {
        let e1 = Lattice::from_vectors(spec, 2, vec![vec![FieldElement::one(spec), FieldElement::zero(spec)]]);
        let e2 = Lattice::from_vectors(spec, 2, vec![vec![FieldElement::zero(spec), FieldElement::one(spec)]]);
        assert_eq!(e1.sum(&e2), Lattice::standard(spec, 2));
        assert_eq!(e1.intersect(&e2).rank(), 0);
        let l = Lattice::diagonal(spec, &[-1, 1]);
        assert_eq!(l.intersect(&Lattice::standard(spec, 2)), Lattice::diagonal(spec, &[0, 1]));
    }
}

#[test]
fn image_and_preimage_examples() {
    for spec in specs() {
        let o2 = Lattice::standard(spec, 2);
        assert_eq!(o2.image(&diag(spec, &[1, -1])).unwrap(), Lattice::diagonal(spec, &[1, -1]));
        let img = o2.image(&jordan(spec)).unwrap();
        assert_eq!(img.rank(), 1);
        assert!(img.contains_vector(&[FieldElement::one(spec), FieldElement::zero(spec)]));
        assert!(!img.contains_vector(&[pi(spec, -1), FieldElement::zero(spec)]));
        let pre = o2.preimage_within(&diag(spec, &[-1, 0]), &o2).unwrap();
        assert_eq!(pre, Lattice::diagonal(spec, &[1, 0]));
    }
}

#[test]
fn index_examples() {
    for spec in specs() {
        let o2 = Lattice::standard(spec, 2);
        assert_eq!(lattice_index(&o2, &o2.scaled(1)).unwrap(), q_pow(spec, 2));
        assert_eq!(lattice_index(&o2, &Lattice::diagonal(spec, &[0, 3])).unwrap(), q_pow(spec, 3));
        assert_eq!(lattice_index(&o2, &o2).unwrap(), BigUint::from(1u32));
        assert!(matches!(lattice_index(&o2.scaled(1), &o2), Err(Error::NotNested)));

        assert_eq!(displacement_index(&diag(spec, &[-1, 1]), &o2).unwrap(), q_pow(spec, 1));
        assert_eq!(displacement_index(&jordan(spec), &o2).unwrap(), BigUint::from(1u32));
        assert_eq!(displacement_index(&diag(spec, &[-1, -1]), &o2).unwrap(), q_pow(spec, 2));
    }
}

#[test]
fn lattice_serialization_round_trip() {
    let spec = FieldSpec::qp(5, 16).unwrap();
    let mut rng = sampling::rng(5);
    let l = sampling::lattice(&mut rng, spec, 3, -2..=2);
    let text = serde_json::to_string(&l.to_doc()).unwrap();
    let doc: LatticeDoc = serde_json::from_str(&text).unwrap();
    assert_eq!(Lattice::from_doc(&doc, spec).unwrap(), l);
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn snf_round_trip(s in 0usize..4, seed in any::<u64>(), rows in 1usize..5, cols in 1usize..5) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let m = sampling::matrix(&mut rng, spec, rows, cols, 50);
        let snf = m.smith_normal_form().unwrap();
        prop_assert!(snf.recompose().unwrap().eq_to_precision(&m));
        prop_assert_eq!(snf.diag_valuations.len(), m.rank());
        for w in snf.diag_valuations.windows(2) {
            prop_assert!(w[0] <= w[1]);
        }
        prop_assert_eq!(snf.left.det().unwrap().valuation(), Some(0));
        prop_assert_eq!(snf.right.det().unwrap().valuation(), Some(0));
    }

    #[test]
    fn index_is_multiplicative(s in 0usize..4, seed in any::<u64>(), n in 1usize..4) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let l = sampling::lattice(&mut rng, spec, n, -2..=2);
        let n_mid = l.intersect(&sampling::lattice(&mut rng, spec, n, -1..=3));
        let m = n_mid.intersect(&sampling::lattice(&mut rng, spec, n, 0..=3));
        let whole = lattice_index(&l, &m).unwrap();
        prop_assert_eq!(whole, lattice_index(&l, &n_mid).unwrap() * lattice_index(&n_mid, &m).unwrap());
    }

    #[test]
    fn module_matches_index(s in 0usize..4, seed in any::<u64>(), n in 1usize..4) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let a = sampling::invertible(&mut rng, spec, n, 20);
        let l = sampling::lattice(&mut rng, spec, n, -1..=1);
        let image = l.image(&a).unwrap();
        let module = a.module_of().unwrap();
        let q = spec.q();
        if image.contains(&l) {
            let idx = lattice_index(&image, &l).unwrap();
            let e = image.covolume_exponent() - l.covolume_exponent();
            prop_assert_eq!(idx, BigUint::from(q).pow((-e) as u32));
            prop_assert_eq!(module, AbsValue::new(q, Ratio::from_integer(e)));
        }
        if l.contains(&image) {
            let idx = lattice_index(&l, &image).unwrap();
            let e = image.covolume_exponent() - l.covolume_exponent();
            prop_assert_eq!(idx, BigUint::from(q).pow(e as u32));
            prop_assert_eq!(module, AbsValue::new(q, Ratio::from_integer(e)));
        }
    }

    #[test]
    fn char_poly_conjugation_invariant(s in 0usize..4, seed in any::<u64>(), n in 1usize..5) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let a = sampling::matrix(&mut rng, spec, n, n, 20);
        let u = unit_matrix(seed ^ 1, spec, n);
        let b = u.mul(&a).unwrap().mul(&u.inverse().unwrap()).unwrap();
        prop_assert!(b.char_poly().unwrap().eq_to_precision(&a.char_poly().unwrap()));
        prop_assert!(a.char_poly_hessenberg().unwrap().eq_to_precision(&a.char_poly_expansion().unwrap()));
    }

    #[test]
    fn displacement_is_equivariant(s in 0usize..4, seed in any::<u64>(), n in 1usize..4) {
        let spec = specs()[s];
        let mut rng = sampling::rng(seed);
        let a = sampling::sparse_matrix(&mut rng, spec, n, -2..=2, 0.3);
        let l = sampling::lattice(&mut rng, spec, n, -1..=1);
        let u = sampling::invertible(&mut rng, spec, n, 10);
        let b = u.mul(&a).unwrap().mul(&u.inverse().unwrap()).unwrap();
        let d = displacement_index(&a, &l).unwrap();
        prop_assert_eq!(displacement_index(&b, &l.image(&u).unwrap()).unwrap(), d.clone());
        if a.det().unwrap().is_zero() {
            return Ok(());
        }
        prop_assert_eq!(displacement_index_via_intersection(&a, &l).unwrap(), d);
    }
}

#[test]
fn imprecise_entries_reach_the_char_poly() {
    let spec = FieldSpec::qp(2, 16).unwrap();
    let vague = Matrix::diag(spec, &[FieldElement::zero_to(spec, -1)]);
    let f = vague.char_poly().unwrap();
    assert!(f.coeff(0).is_zero());
    assert_eq!(f.coeff(0).abs_precision(), -1);
    assert!(matches!(scalelab::spectral::scale_linear(&vague), Err(Error::PrecisionExhausted(_))));
}
