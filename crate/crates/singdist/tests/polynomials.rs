use proptest::prelude::*;

use singdist::polynomials::{CompiledSystem, EvalWorkspace, Monomial, MultiPoly};
use singdist::scalar::C64;

const NVARS: usize = 3;

fn poly() -> impl Strategy<Value = MultiPoly> {
    prop::collection::vec((prop::collection::vec(0u16..4, NVARS), -3.0f64..3.0, -3.0f64..3.0), 1..6).prop_map(|terms| {
        MultiPoly::from_terms(terms.into_iter().map(|(e, re, im)| (Monomial::from_exponents(&e), C64::new(re, im))))
    })
}

fn point() -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| C64::new(a, b)), NVARS)
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() <= 1e-9 * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #[test]
    fn ring_operations_agree_with_evaluation(p in poly(), q in poly(), x in point()) {
        let (pv, qv) = (p.evaluate(&x).unwrap(), q.evaluate(&x).unwrap());
        prop_assert!(close((&p + &q).evaluate(&x).unwrap(), pv + qv));
        prop_assert!(close((&p - &q).evaluate(&x).unwrap(), pv - qv));
        prop_assert!(close((&p * &q).evaluate(&x).unwrap(), pv * qv));
        prop_assert!(close(p.pow(3).evaluate(&x).unwrap(), pv * pv * pv));
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn derivative_matches_complex_difference(p in poly(), x in point(), var in 0..NVARS) {
        let h = 1e-6;
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[var] += h;
        xm[var] -= h;
        let fd = (p.evaluate(&xp).unwrap() - p.evaluate(&xm).unwrap()) / (2.0 * h);
        let d = p.derivative(var).evaluate(&x).unwrap();
        prop_assert!((fd - d).norm() <= 1e-5 * (1.0 + d.norm()), "{fd} vs {d}");
    }

    #[test]
    fn compiled_evaluation_matches_direct(p in poly(), q in poly(), x in point()) {
        let eqs = vec![p.clone(), q.clone()];
        let sys = CompiledSystem::new(&eqs, NVARS);
        let mut ws = EvalWorkspace::default();
        let mut vals = vec![C64::new(0.0, 0.0); 2];
        let mut jac = vec![C64::new(0.0, 0.0); 2 * NVARS];
        sys.eval_with_jacobian(&x, &mut vals, &mut jac, &mut ws);
        for (i, e) in eqs.iter().enumerate() {
            prop_assert!(close(vals[i], e.evaluate(&x).unwrap()));
            for v in 0..NVARS {
                prop_assert!(close(jac[i * NVARS + v], e.derivative(v).evaluate(&x).unwrap()));
            }
        }
    }

    #[test]
    fn substitution_then_evaluation(p in poly(), x in point()) {
        let partial = p.substitute(&[Some(x[0]), None, None]);
        prop_assert!(!partial.uses_var(0));
        prop_assert!(close(partial.evaluate(&x).unwrap(), p.evaluate(&x).unwrap()));
    }
}
