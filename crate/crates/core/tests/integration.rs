use num_complex::Complex64;
use proptest::prelude::*;

use thetalift::classnum::cohen_series;
use thetalift::discform::{frac, plus_to_vector, DiscriminantForm, GramLattice, PlusSign};
use thetalift::lift::{lambda_coeffs, FormCache, LambdaRoute, LiftEvaluator, LiftOptions, LiftSpec};
use thetalift::numth::rint;
use thetalift::thetaser::Hpoint;

/// Principal part exponents `-m` sit on cosets with `Q(μ) ≡ -m`.
#[test]
fn principal_part_matches_discriminant_form() {
    let df = DiscriminantForm::new(&GramLattice::sig12()).unwrap();
    for n in 1..=4 {
        let spec = LiftSpec::from_duke_jenkins(2, 0, 0, n).unwrap();
        for t in &spec.principal {
            let rep = match t.coset {
                0 => vec![rint(0), rint(0), rint(0)],
                _ => vec![rint(0), thetalift::numth::rat(1, 2), rint(0)],
            };
            let mu = df.coset_of(&rep).unwrap();
            assert_eq!(frac(df.norm(mu)), frac(&-t.m.clone()), "N = {n}, term {t:?}");
        }
    }
}

/// The plus space form and its vector-valued image carry the same principal data.
#[test]
fn cohen_series_vector_image() {
    let h = cohen_series(2, 40).unwrap();
    let v = plus_to_vector(&h, PlusSign::Minus).unwrap();
    assert_eq!(v.group().size(), 2);
    // H(3) = 1/3 sits at q^{3/4} on the odd coset
    let c = v.coeff(1, &thetalift::numth::rat(3, 4)).unwrap();
    assert_eq!(c.as_rat().unwrap(), &thetalift::numth::rat(1, 3));
}

/// Each Λ coefficient is a modular invariant function of z.
#[test]
fn lambda_coefficients_invariant() {
    let cache = FormCache::new();
    let opts = LiftOptions { tol: 1e-4, ..Default::default() };
    let z = Hpoint::new(0.21, 1.13).unwrap();
    let sz = Hpoint::from_c(-Complex64::new(1.0, 0.0) / z.c()).unwrap();
    let (a, _) = lambda_coeffs(2, 0, 0, z, 12, LambdaRoute::Generic, &opts, &cache).unwrap();
    let (b, _) = lambda_coeffs(2, 0, 0, sz, 12, LambdaRoute::Generic, &opts, &cache).unwrap();
    for d in [1, 4, 5, 8, 9, 12] {
        let (x, y) = (a.get(0, d).to_complex(), b.get(0, d).to_complex());
        assert!((x - y).norm() < 1e-3 * x.norm() + 1e-4, "D = {d}: {x} vs {y}");
    }
}

/// Lift inputs of higher level share the cached enumeration across points.
#[test]
fn level_two_lift_invariant() {
    let spec = LiftSpec::from_duke_jenkins(2, 0, 0, 2).unwrap();
    let ev = LiftEvaluator::new(spec, LiftOptions { tol: 1e-6, ..Default::default() });
    let z = Hpoint::new(0.13, 1.37).unwrap();
    let a = ev.eval(z).unwrap();
    let b = ev.eval(Hpoint::from_c(-Complex64::new(1.0, 0.0) / z.c()).unwrap()).unwrap();
    assert!((a.value() - b.value()).norm() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn lift_translation_invariant(x in -0.5f64..0.5, y in 0.9f64..2.5, shift in -3i32..=3) {
        let spec = LiftSpec::from_duke_jenkins(2, 0, 0, 1).unwrap();
        let ev = LiftEvaluator::new(spec, LiftOptions { tol: 1e-5, guard: 1e-2, ..Default::default() });
        let z = Hpoint::new(x, y).unwrap();
        let w = Hpoint::new(x + shift as f64, y).unwrap();
        match (ev.eval(z), ev.eval(w)) {
            (Ok(a), Ok(b)) => prop_assert!((a.value() - b.value()).norm() < 1e-4),
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "guard disagrees: {a:?} {b:?}"),
        }
    }
}
