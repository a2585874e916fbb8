//! Randomized invariants across the algebra, module, operator, and frame
//! layers. Each property draws a small algebra shape and a seed; all data is
//! then derived deterministically from the seed so failures replay exactly.

use num_complex::Complex64;
use proptest::prelude::*;

use starframe::algebra::{AlgebraElement, AlgebraShape, RandomKind, SpectralFn, Tolerance};
use starframe::frames::{self, FrameBounds};
use starframe::hilbert::{inner_product, module_action, vector_norm, ModuleVector};
use starframe::operators::AdjointableOperator;
use starframe::rng::SplitMix64;

fn shapes() -> Vec<AlgebraShape> {
    [vec![1], vec![2], vec![3], vec![1, 2], vec![2, 2], vec![2, 3]]
        .into_iter()
        .map(|d| AlgebraShape::new(d).unwrap())
        .collect()
}

fn tol() -> Tolerance {
    Tolerance::default()
}

prop_compose! {
    fn shape_and_seed()(idx in 0..6usize, seed in any::<u64>()) -> (AlgebraShape, u64) {
        (shapes()[idx].clone(), seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn adjoint_is_an_involution((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        prop_assert_eq!(a.adjoint().adjoint().sub(&a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn c_star_identity_holds((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let lhs = a.adjoint().mul(&a).unwrap().norm().unwrap();
        let rhs = a.norm().unwrap().powi(2);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + rhs), "{lhs} vs {rhs}");
    }

    #[test]
    fn order_survives_conjugation((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::Hermitian).unwrap();
        let p = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
        let c = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let b = a.add(&p).unwrap();
        prop_assert!(a.leq(&b, tol()).unwrap());
        let ca = c.adjoint().mul(&a).unwrap().mul(&c).unwrap();
        let cb = c.adjoint().mul(&b).unwrap().mul(&c).unwrap();
        prop_assert!(ca.leq(&cb, tol()).unwrap());
    }

    #[test]
    fn order_is_transitive((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::Hermitian).unwrap();
        let p = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
        let q = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
        let b = a.add(&p).unwrap();
        let c = b.add(&q).unwrap();
        prop_assert!(a.leq(&b, tol()).unwrap());
        prop_assert!(b.leq(&c, tol()).unwrap());
        prop_assert!(a.leq(&c, tol()).unwrap());
    }

    #[test]
    fn psd_square_root_squares_back((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let p = AlgebraElement::random(&shape, &mut rng, RandomKind::Psd).unwrap();
        let r = p.psd_calculus(SpectralFn::Sqrt, tol()).unwrap();
        let back = r.mul(&r).unwrap();
        let err = back.sub(&p).unwrap().norm().unwrap();
        prop_assert!(err <= 1e-8 * (1.0 + p.norm().unwrap()), "residual {err}");
    }

    #[test]
    fn inverse_multiplies_to_identity((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::Invertible).unwrap();
        let inv = a.invert(tol()).unwrap();
        let one = AlgebraElement::identity(&shape);
        let err = a.mul(&inv).unwrap().sub(&one).unwrap().norm().unwrap();
        prop_assert!(err <= 1e-8 * (1.0 + a.norm().unwrap()), "residual {err}");
    }

    #[test]
    fn inner_product_is_conjugate_symmetric((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let rank = 1 + (seed % 3) as usize;
        let x = ModuleVector::random(&shape, rank, &mut rng).unwrap();
        let y = ModuleVector::random(&shape, rank, &mut rng).unwrap();
        let xy = inner_product(&x, &y).unwrap();
        let yx = inner_product(&y, &x).unwrap();
        prop_assert!(xy.adjoint().sub(&yx).unwrap().max_abs() <= 1e-12);
    }

    #[test]
    fn inner_product_is_first_slot_linear((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let rank = 1 + (seed % 3) as usize;
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let x = ModuleVector::random(&shape, rank, &mut rng).unwrap();
        let y = ModuleVector::random(&shape, rank, &mut rng).unwrap();
        let lhs = inner_product(&module_action(&a, &x).unwrap(), &y).unwrap();
        let rhs = a.mul(&inner_product(&x, &y).unwrap()).unwrap();
        let err = lhs.sub(&rhs).unwrap().max_abs();
        prop_assert!(err <= 1e-10 * (1.0 + a.norm().unwrap()), "residual {err}");
    }

    #[test]
    fn gram_element_is_positive_and_faithful((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let rank = 1 + (seed % 3) as usize;
        let x = ModuleVector::random(&shape, rank, &mut rng).unwrap();
        let g = inner_product(&x, &x).unwrap();
        prop_assert!(g.is_positive(tol()).unwrap());
        let zero = ModuleVector::zero(&shape, rank).unwrap();
        let gz = inner_product(&zero, &zero).unwrap();
        prop_assert_eq!(gz.max_abs(), 0.0);
        // Faithfulness: a vector of non-negligible norm has ⟨x,x⟩ ≠ 0.
        if vector_norm(&x).unwrap() > 1e-6 {
            prop_assert!(g.norm().unwrap() > 1e-12);
        }
    }

    #[test]
    fn cauchy_schwarz_in_algebra_order((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let rank = 1 + (seed % 3) as usize;
        let x = ModuleVector::random(&shape, rank, &mut rng).unwrap();
        let y = ModuleVector::random(&shape, rank, &mut rng).unwrap();
        let xy = inner_product(&x, &y).unwrap();
        let lhs = xy.clone().mul(&xy.adjoint()).unwrap();
        let scale = inner_product(&y, &y).unwrap().norm().unwrap();
        let rhs = inner_product(&x, &x).unwrap()
            .scalar_mul(Complex64::new(scale, 0.0));
        // ⟨x,y⟩⟨y,x⟩ ⪯ ‖⟨y,y⟩‖·⟨x,x⟩, with a hair of slack for roundoff.
        let slack = AlgebraElement::identity(&shape)
            .scalar_mul(Complex64::new(1e-9 * (1.0 + scale), 0.0));
        prop_assert!(lhs.leq(&rhs.add(&slack).unwrap(), tol()).unwrap());
    }

    #[test]
    fn adjoint_moves_across_inner_product((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let m1 = 1 + (seed % 2) as usize;
        let m2 = 1 + ((seed >> 8) % 2) as usize;
        let t = AdjointableOperator::random(&shape, m1, m2, &mut rng).unwrap();
        let x = ModuleVector::random(&shape, m1, &mut rng).unwrap();
        let y = ModuleVector::random(&shape, m2, &mut rng).unwrap();
        let lhs = inner_product(&t.apply(&x).unwrap(), &y).unwrap();
        let rhs = inner_product(&x, &t.adjoint_op().apply(&y).unwrap()).unwrap();
        let err = lhs.sub(&rhs).unwrap().max_abs();
        prop_assert!(err <= 1e-10 * (1.0 + t.op_norm().unwrap()), "residual {err}");
    }

    #[test]
    fn operators_commute_with_the_module_action((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let m1 = 1 + (seed % 2) as usize;
        let m2 = 1 + ((seed >> 8) % 2) as usize;
        let t = AdjointableOperator::random(&shape, m1, m2, &mut rng).unwrap();
        let a = AlgebraElement::random(&shape, &mut rng, RandomKind::General).unwrap();
        let x = ModuleVector::random(&shape, m1, &mut rng).unwrap();
        let lhs = t.apply(&module_action(&a, &x).unwrap()).unwrap();
        let rhs = module_action(&a, &t.apply(&x).unwrap()).unwrap();
        for j in 0..lhs.rank() {
            prop_assert!(lhs.entry(j).sub(rhs.entry(j)).unwrap().max_abs() <= 1e-10);
        }
    }

    #[test]
    fn flattening_reverses_composition_and_preserves_adjoints((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let t = AdjointableOperator::random(&shape, 2, 2, &mut rng).unwrap();
        let u = AdjointableOperator::random(&shape, 2, 2, &mut rng).unwrap();
        let tu = t.compose(&u).unwrap().flatten();
        let ft = t.flatten();
        let fu = u.flatten();
        for k in 0..shape.num_factors() {
            let prod = fu.factor(k).mul(ft.factor(k));
            prop_assert!(tu.factor(k).sub(&prod).max_abs() <= 1e-10);
            let adj = t.adjoint_op().flatten();
            prop_assert!(adj.factor(k).sub(&ft.factor(k).adjoint()).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn operator_norm_sandwiches_the_gram((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let m1 = 1 + (seed % 2) as usize;
        let m2 = 1 + ((seed >> 8) % 2) as usize;
        let t = AdjointableOperator::random(&shape, m1, m2, &mut rng).unwrap();
        let x = ModuleVector::random(&shape, m1, &mut rng).unwrap();
        let tx = t.apply(&x).unwrap();
        let lhs = inner_product(&tx, &tx).unwrap();
        let n = t.op_norm().unwrap();
        let rhs = inner_product(&x, &x).unwrap()
            .scalar_mul(Complex64::new(n * n, 0.0));
        let slack = AlgebraElement::identity(&shape)
            .scalar_mul(Complex64::new(1e-9 * (1.0 + n * n), 0.0));
        // ⟨Tx,Tx⟩ ⪯ ‖T‖²⟨x,x⟩.
        prop_assert!(lhs.leq(&rhs.add(&slack).unwrap(), tol()).unwrap());
    }

    #[test]
    fn frame_operator_is_positive_and_equals_gram_of_transform((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let n = 2 + (seed % 3) as usize;
        let fam = frames::random_family(&shape, 2, n, &mut rng).unwrap();
        let s = frames::frame_operator(&fam).unwrap();
        prop_assert!(s.is_positive_op(tol()).unwrap());
        let r = frames::frame_transform(&fam).unwrap();
        let rr = r.adjoint_op().compose(&r).unwrap();
        let fs = s.flatten();
        let frr = rr.flatten();
        for k in 0..shape.num_factors() {
            prop_assert!(fs.factor(k).sub(frr.factor(k)).max_abs()
                <= 1e-9 * (1.0 + s.op_norm().unwrap()));
        }
    }

    #[test]
    fn frame_operator_ignores_member_order((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let fam = frames::random_family(&shape, 2, 4, &mut rng).unwrap();
        let mut reversed = fam.members().to_vec();
        reversed.reverse();
        let fam_rev = frames::OperatorFamily::new(reversed).unwrap();
        let a = frames::frame_operator(&fam).unwrap().flatten();
        let b = frames::frame_operator(&fam_rev).unwrap().flatten();
        for k in 0..shape.num_factors() {
            prop_assert!(a.factor(k).sub(b.factor(k)).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn verifier_and_sampler_agree((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let fam = frames::random_family(&shape, 2, 3, &mut rng).unwrap();
        let (a_opt, b_opt) = frames::optimal_scalar_bounds(&fam, tol()).unwrap();
        // Scan a handful of candidate bounds around the optimum: some valid,
        // some not.
        for (fa, fb) in [(1.0, 1.0), (0.5, 2.0), (1.2, 1.0), (1.0, 0.8), (2.0, 0.5)] {
            let lower = (a_opt * fa).max(1e-6);
            let upper = (b_opt * fb).max(lower);
            let bounds = FrameBounds::scalar(lower, upper);
            let report = frames::verify(&fam, &bounds, tol()).unwrap();
            let hit = frames::sampling_falsifier(&fam, &bounds, tol(), seed ^ 0x5eed, 300).unwrap();
            if report.is_valid() {
                prop_assert!(hit.is_none(), "sampler found a violation of accepted bounds");
            }
            if let Some((_, defect)) = hit {
                prop_assert!(!report.is_valid());
                prop_assert!(defect.min_eigenvalue().unwrap() < 0.0);
            }
        }
    }

    #[test]
    fn invalid_verdicts_come_with_confirmed_witnesses((shape, seed) in shape_and_seed()) {
        let mut rng = SplitMix64::new(seed);
        let fam = frames::random_family(&shape, 2, 3, &mut rng).unwrap();
        let (a_opt, b_opt) = frames::optimal_scalar_bounds(&fam, tol()).unwrap();
        // Deliberately push the lower bound above the optimum.
        let bounds = FrameBounds::scalar(a_opt.max(1e-6) * 4.0 + 1.0, (b_opt + 2.0) * 4.0);
        let report = frames::verify(&fam, &bounds, tol()).unwrap();
        prop_assert!(!report.is_valid());
        let x = report.witness.as_ref().expect("witness");
        let defect = report.witness_defect.as_ref().expect("defect");
        // Re-derive the defect from scratch at the witness.
        let sum = frames::frame_sum_at(&fam, x).unwrap();
        let g = inner_product(x, x).unwrap();
        let star = frames::scalar_to_star(&bounds, fam.shape()).unwrap();
        let (lo, _) = match star {
            FrameBounds::Star { lower, upper } => (lower, upper),
            FrameBounds::Scalar { .. } => unreachable!(),
        };
        let recomputed = sum.sub(&lo.mul(&g).unwrap().mul(&lo.adjoint()).unwrap()).unwrap();
        prop_assert!(recomputed.sub(defect).unwrap().max_abs() <= 1e-9 * (1.0 + g.norm().unwrap()));
        prop_assert!(defect.min_eigenvalue().unwrap() <= -1e-12);
    }
}
