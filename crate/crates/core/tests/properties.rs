use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cstar_morita::accontinuity::{ac_subspace, CPMap, DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL};
use cstar_morita::algebra::{
    c, id_kron_mul, identity, kron, kron_mul, min_eigenvalue, mul, operator_norm, r, separate, ComplexMatrix,
    ComplexVector,
};
use cstar_morita::instances::{random_instance, RandomInstance};
use cstar_morita::morita::random_ball_point;
use cstar_morita::representation::{sigma_dual, CovariantPair, SigmaDual};
use cstar_morita::scenario::{run_scenario, Kind, Report, Scenario};

fn setup(seed: u64) -> (RandomInstance, SigmaDual, ChaCha8Rng) {
    let inst = random_instance(seed).expect("random instance");
    let dual = sigma_dual(&inst.context.f, &inst.sigma).expect("dual");
    (inst, dual, ChaCha8Rng::seed_from_u64(seed ^ 0x5eed))
}

fn element(coeffs: &[f64], basis: &[ComplexMatrix]) -> ComplexMatrix {
    let n = basis[0].nrows();
    basis.iter().enumerate().fold(ComplexMatrix::zeros(n, n), |acc, (i, b)| {
        acc + b * c(coeffs[(2 * i) % coeffs.len()], coeffs[(2 * i + 1) % coeffs.len()])
    })
}

fn matrix(rows: usize, cols: usize, vals: &[f64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        c(vals[k % vals.len()], vals[(k + 1) % vals.len()])
    })
}

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn induced_cp_map_is_positive(seed in 0u64..10_000, coeffs in prop::collection::vec(-1.0f64..1.0, 8)) {
        let (_, dual, mut rng) = setup(seed);
        let z = random_ball_point(&dual, &mut rng);
        let phi = CPMap::from_pair(&CovariantPair::from_point(&dual, &z));
        let b = element(&coeffs, &phi.domain.basis);
        let a = b.adjoint() * &b;
        let scale = operator_norm(&a).max(1.0);
        prop_assert!(min_eigenvalue(&phi.apply(&a)) >= -1e-10 * scale);
        prop_assert!(phi.closure_residual() <= 1e-9);
    }

    #[test]
    fn powers_of_the_identity_decrease(seed in 0u64..10_000) {
        let (_, dual, mut rng) = setup(seed);
        let z = random_ball_point(&dual, &mut rng);
        let phi = CPMap::from_pair(&CovariantPair::from_point(&dual, &z));
        let mut current = identity(phi.space_dim());
        for _ in 0..6 {
            let next = phi.apply(&current);
            prop_assert!(min_eigenvalue(&(&current - &next)) >= -1e-10);
            current = next;
        }
    }

    #[test]
    fn cp_map_scales_quadratically(seed in 0u64..10_000, re in -1.0f64..1.0, im in -1.0f64..1.0) {
        let (_, dual, mut rng) = setup(seed);
        let z = random_ball_point(&dual, &mut rng);
        let lambda = c(re, im);
        let phi = CPMap::from_pair(&CovariantPair::from_point(&dual, &z));
        let scaled = CPMap::from_pair(&CovariantPair::from_point(&dual, &(&z * lambda)));
        let w = lambda.norm_sqr();
        for (a, b) in phi.images.iter().zip(&scaled.images) {
            prop_assert!(operator_norm(&(a * r(w) - b)) <= 1e-12 * (1.0 + operator_norm(a)));
        }
    }

    #[test]
    fn transform_is_linear_and_isometric(seed in 0u64..10_000, re in -2.0f64..2.0, im in -2.0f64..2.0) {
        let (inst, dual, mut rng) = setup(seed);
        let (z1, z2) = (random_ball_point(&dual, &mut rng), random_ball_point(&dual, &mut rng));
        let lambda = c(re, im);
        let ctx = &inst.context;
        let image = |z: &ComplexMatrix| ctx.transform(&CovariantPair::from_point(&dual, z)).unwrap().intertwiner.adjoint();
        let combined = image(&(&z1 + &z2 * lambda));
        let separate_images = image(&z1) + image(&z2) * lambda;
        prop_assert!(operator_norm(&(combined - separate_images)) <= 1e-10);
        let gap = (operator_norm(&image(&z1)) - operator_norm(&z1)).abs();
        prop_assert!(gap <= 1e-9, "norm gap {}", gap);
    }

    #[test]
    fn ac_subspace_grows_under_contraction(seed in 0u64..10_000, t in 0.05f64..0.99) {
        let (_, dual, mut rng) = setup(seed);
        let z = random_ball_point(&dual, &mut rng);
        let big = ac_subspace(&CovariantPair::from_point(&dual, &z), DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL).unwrap();
        let small = ac_subspace(&CovariantPair::from_point(&dual, &(&z * r(t))), DEFAULT_PURITY_DEPTH, DEFAULT_PURITY_TOL).unwrap();
        for p in [&big.projection, &small.projection] {
            prop_assert!(operator_norm(&(p * p - p)) <= 1e-9);
            prop_assert!(operator_norm(&(p - p.adjoint())) <= 1e-9);
        }
        // strict contractions are absolutely continuous
        prop_assert!(small.is_full(1e-8));
        prop_assert!(operator_norm(&(&small.projection * &big.projection - &big.projection)) <= 1e-8);
    }

    #[test]
    fn separation_orthonormalises(rank in 1usize..6, extra in 0usize..5, vals in prop::collection::vec(-1.0f64..1.0, 32)) {
        let v = matrix(rank + 2, rank + extra, &vals);
        let s = v.adjoint() * &v;
        let sep = separate(&s, 1e-10);
        let gram = sep.expand.adjoint() * &s * &sep.expand;
        prop_assert!(operator_norm(&(gram - identity(sep.pivots.len()))) <= 1e-8);
        prop_assert!(sep.pivots.len() <= rank + 2);
        // the quotient map is exact on the span: S = P^* P
        prop_assert!(operator_norm(&(sep.project.adjoint() * &sep.project - &s)) <= 1e-8 * operator_norm(&s).max(1.0));
    }

    #[test]
    fn structured_products_match_dense(p in 1usize..6, q in 1usize..6, d in 1usize..5, cols in 1usize..7,
                                       vals in prop::collection::vec(-1.0f64..1.0, 64)) {
        let a = matrix(p, q, &vals);
        let m = matrix(q * d, cols, &vals[3..]);
        let dense = kron(&a, &identity(d)) * &m;
        prop_assert!(operator_norm(&(kron_mul(&a, d, &m) - dense)) <= 1e-12);
        let dense = kron(&identity(d), &a) * &m;
        prop_assert!(operator_norm(&(id_kron_mul(d, &a, &m) - dense)) <= 1e-12);
        let big = matrix(40, 30, &vals);
        let other = matrix(30, 20, &vals[5..]);
        prop_assert!(operator_norm(&(mul(&big, &other) - &big * &other)) <= 1e-12);
    }

    #[test]
    fn dual_points_are_intertwiners(seed in 0u64..10_000, coeffs in prop::collection::vec(-1.0f64..1.0, 16)) {
        let (inst, dual, _) = setup(seed);
        let coords = ComplexVector::from_fn(dual.dim(), |i, _| c(coeffs[(2 * i) % 16], coeffs[(2 * i + 1) % 16]));
        let z = dual.point(&coords);
        for a in &inst.context.f.left_algebra.basis {
            let lhs = &z * inst.sigma.image(a);
            let rhs = dual.induced.left(a) * &z;
            prop_assert!(operator_norm(&(lhs - rhs)) <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 8, ..ProptestConfig::default() })]

    #[test]
    fn reports_round_trip_and_repeat(seed in any::<u64>(), kind_index in 0usize..6) {
        let kind = Kind::ALL[kind_index];
        let scenario = Scenario { seed, trials: 3, nmax: Some(2), ..Scenario::new(kind) };
        let first = run_scenario(&scenario).unwrap();
        let second = run_scenario(&scenario).unwrap();
        prop_assert_eq!(first.canonical(), second.canonical());
        let parsed = Report::from_machine(&first.to_machine(), "memory").unwrap();
        prop_assert_eq!(parsed.canonical(), first.canonical());
        prop_assert_eq!(first.pass, first.summary.iter().all(|s| s.pass) && first.trials.iter().all(|t| t.error.is_none()));
    }
}
