//! Property-level invariants of the series arithmetic, the solvers and the
//! closed-form series.

mod common;

use std::sync::Arc;

use num::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{monomial, newton_solve_standard, r};
use qsys_core::combinat::{
    densify_nu, despecialized, series_k, series_k_specialized, BinomialConvention,
};
use qsys_core::liedata::algebra;
use qsys_core::linalg::{self, Mat};
use qsys_core::qsolve::{
    check_residual, solve_general, solve_specialized, solve_standard, QSystemSpec, SysIndex,
};
use qsys_core::rat::{rat, rat_int, Rat};
use qsys_core::series::{Expo, TruncatedSeries, VarSet};

const CUTOFF: u32 = 6;

fn vars2() -> Arc<VarSet> {
    VarSet::unit(vec!["w1", "w2"])
}

#[derive(Clone, Debug)]
struct SmallSeries(TruncatedSeries);

fn series_strategy(unit_constant: bool) -> impl Strategy<Value = SmallSeries> {
    let term = (0u32..=4, 0u32..=4, -6i64..=6, 1i64..=3);
    prop::collection::vec(term, 0..6).prop_map(move |raw| {
        let vars = vars2();
        let mut terms: Vec<(Expo, Rat)> = raw
            .into_iter()
            .filter(|(e1, e2, p, _)| e1 + e2 <= CUTOFF && *p != 0 && (!unit_constant || e1 + e2 > 0))
            .map(|(e1, e2, p, q)| (Expo(vec![e1, e2]), rat(p, q)))
            .collect();
        if unit_constant {
            terms.push((Expo::zero(2), rat_int(1)));
        }
        SmallSeries(TruncatedSeries::from_terms(vars, CUTOFF, terms).unwrap())
    })
}

fn exponent_strategy() -> impl Strategy<Value = Rat> {
    prop::sample::select(vec![
        rat_int(-2),
        rat_int(-1),
        r(-1, 2),
        r(1, 2),
        rat_int(1),
        r(3, 2),
        rat_int(2),
        r(-2, 3),
    ])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn ring_axioms(f in series_strategy(false), g in series_strategy(false), h in series_strategy(false)) {
        let (f, g, h) = (&f.0, &g.0, &h.0);
        prop_assert_eq!(f.add(g).unwrap().add(h).unwrap(), f.add(&g.add(h).unwrap()).unwrap());
        prop_assert_eq!(f.mul(g).unwrap(), g.mul(f).unwrap());
        prop_assert_eq!(
            f.mul(g).unwrap().mul(h).unwrap(),
            f.mul(&g.mul(h).unwrap()).unwrap()
        );
        prop_assert_eq!(
            f.mul(&g.add(h).unwrap()).unwrap(),
            f.mul(g).unwrap().add(&f.mul(h).unwrap()).unwrap()
        );
    }

    #[test]
    fn pow_composes(f in series_strategy(true), a in exponent_strategy(), b in exponent_strategy()) {
        let f = &f.0;
        let lhs = f.pow(&a).unwrap().pow(&b).unwrap();
        let rhs = f.pow(&(&a * &b)).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(f.pow(&rat_int(1)).unwrap(), f.clone());
    }

    #[test]
    fn pow_inverse(f in series_strategy(true)) {
        let f = &f.0;
        let inv = f.powi(-1).unwrap();
        prop_assert!(f.mul(&inv).unwrap().is_one());
    }

    #[test]
    fn log_exp_inverse_pair(f in series_strategy(true), g in series_strategy(true)) {
        let (f, g) = (&f.0, &g.0);
        prop_assert_eq!(f.log().unwrap().exp().unwrap(), f.clone());
        // log(f·g) = log f + log g
        prop_assert_eq!(
            f.mul(g).unwrap().log().unwrap(),
            f.log().unwrap().add(&g.log().unwrap()).unwrap()
        );
    }

    #[test]
    fn exp_log_matches_pow(f in series_strategy(true), a in exponent_strategy()) {
        let f = &f.0;
        let via_log = f.log().unwrap().scale(&a).exp().unwrap();
        prop_assert_eq!(via_log, f.pow(&a).unwrap());
    }

    #[test]
    fn specialize_is_ring_homomorphism(f in series_strategy(false), g in series_strategy(false)) {
        // reinterpret the two w-variables as w₁^(1), w₂^(1): weights (1, 2)
        let wvars = VarSet::weighted(vec!["w(1,1)", "w(1,2)"], vec![1, 2]);
        let reweight = |s: &TruncatedSeries| {
            TruncatedSeries::from_terms(
                wvars.clone(),
                CUTOFF,
                s.terms()
                    .filter(|(e, _)| e.0[0] + 2 * e.0[1] <= CUTOFF)
                    .map(|(e, c)| (e.clone(), c.clone())),
            )
            .unwrap()
        };
        let (f, g) = (reweight(&f.0), reweight(&g.0));
        let y = VarSet::y_vars(1);
        let assign = [(0usize, 1u32), (0, 2)];
        let lhs = f.mul(&g).unwrap().specialize(&assign, &y, CUTOFF).unwrap();
        let rhs = f
            .specialize(&assign, &y, CUTOFF)
            .unwrap()
            .mul(&g.specialize(&assign, &y, CUTOFF).unwrap())
            .unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}

fn random_matrix(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64) -> Mat {
    (0..n)
        .map(|_| (0..n).map(|_| rat_int(rng.gen_range(lo..=hi))).collect())
        .collect()
}

fn random_rational_matrix(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    (0..n)
        .map(|_| {
            (0..n)
                .map(|_| rat(rng.gen_range(-2..=2), rng.gen_range(1..=2)))
                .collect()
        })
        .collect()
}

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    loop {
        let d = random_matrix(rng, n, -2, 2);
        if linalg::invert(&d).is_some() {
            return d;
        }
    }
}

fn plain(n: usize) -> Vec<SysIndex> {
    (1..=n).map(SysIndex::Plain).collect()
}

#[test]
fn fixed_point_and_newton_agree() {
    // two independent solution paths for the standard system
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..8 {
        let n = rng.gen_range(1..=3);
        let g = random_rational_matrix(&mut rng, n);
        let spec = Arc::new(QSystemSpec::standard(plain(n), g.clone()).unwrap());
        let fixed = solve_standard(&spec, 8).unwrap();
        let newton = newton_solve_standard(&g, 8);
        assert_eq!(fixed.members, newton);
    }
}

#[test]
fn general_solution_consistency() {
    // solve_general equals elementwise ∏_j (Q'_j)^((D⁻¹)_ij) with the powers
    // taken through the direct recursion, not the solver's log/exp path
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..6 {
        let n = rng.gen_range(1..=3);
        let d = random_invertible(&mut rng, n);
        let g = random_matrix(&mut rng, n, -2, 2);
        let spec = Arc::new(QSystemSpec::finite(plain(n), d, g).unwrap());
        let sol = solve_general(&spec, 7).unwrap();
        assert!(check_residual(&sol).unwrap().is_none());

        let std_spec = Arc::new(QSystemSpec::standard(plain(n), spec.g_prime.clone()).unwrap());
        let qp = solve_standard(&std_spec, 7).unwrap();
        for i in 0..n {
            let mut expect = TruncatedSeries::one(sol.vars(), 7);
            for j in 0..n {
                expect = expect
                    .mul(&qp.members[j].pow(&spec.d_inv[i][j]).unwrap())
                    .unwrap();
            }
            assert_eq!(sol.members[i], expect);
        }
    }
}

#[test]
fn projection_compatibility() {
    // solving deeper and truncating equals solving at the shallow cutoff
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    for _ in 0..5 {
        let n = rng.gen_range(1..=3);
        let g = random_rational_matrix(&mut rng, n);
        let spec = Arc::new(QSystemSpec::standard(plain(n), g).unwrap());
        let deep = solve_standard(&spec, 8).unwrap();
        let shallow = solve_standard(&spec, 5).unwrap();
        for (a, b) in deep.members.iter().zip(&shallow.members) {
            assert_eq!(a.truncate(5), *b);
        }
    }
}

#[test]
fn specialized_solution_is_specialization_of_window_solution() {
    // the canonical specialized solution equals the specialization of the
    // canonical solution of the unspecialized window system
    for sel in ["A1", "A2", "B2"] {
        let alg = algebra(sel).unwrap();
        let cutoff = 4u32;
        let spec = Arc::new(alg.kr_matrices(cutoff as usize));
        let direct = solve_specialized(&spec, cutoff).unwrap();

        let wspec = Arc::new(despecialized(&spec));
        let wsol = solve_general(&wspec, cutoff).unwrap();
        let y = VarSet::y_vars(alg.rank);
        let assign: Vec<(usize, u32)> = wspec
            .indices
            .iter()
            .map(|idx| match idx {
                SysIndex::Pair { node, level } => (node - 1, *level as u32),
                _ => unreachable!(),
            })
            .collect();
        for (pos, member) in wsol.members.iter().enumerate() {
            let specialized = member.specialize(&assign, &y, cutoff).unwrap();
            assert_eq!(specialized, direct.members[pos], "{sel} at {pos}");
        }
    }
}

#[test]
fn window_solution_checks_hold_in_w_picture() {
    // residual and inversion of the canonical window solution before
    // specialization; pair-indexed variables carry their level as weight
    let alg = algebra("B2").unwrap();
    let spec = Arc::new(despecialized(&alg.kr_matrices(4)));
    let sol = solve_general(&spec, 4).unwrap();
    assert!(check_residual(&sol).unwrap().is_none());
    assert!(
        qsys_core::qsolve::check_inversion_property(&sol, 3)
            .unwrap()
            .is_none()
    );
}

#[test]
fn k_series_reduces_to_standard_data() {
    // K^ν over (D, G) equals K^ν' over (I, G·D⁻¹) with ν'_i = Σ_j ν_j (D⁻¹)_ji
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    for _ in 0..6 {
        let n = rng.gen_range(1..=3);
        let d = random_invertible(&mut rng, n);
        let g = random_matrix(&mut rng, n, -2, 2);
        let spec = Arc::new(QSystemSpec::finite(plain(n), d, g).unwrap());
        let nu: Vec<(SysIndex, Rat)> = (1..=n)
            .map(|i| (SysIndex::Plain(i), rat_int(rng.gen_range(-2..=2))))
            .collect();
        let nu_dense = densify_nu(&spec, &nu).unwrap();
        let nu_prime: Vec<(SysIndex, Rat)> = (0..n)
            .map(|i| {
                let v = (0..n)
                    .map(|j| &nu_dense[j] * &spec.d_inv[j][i])
                    .fold(Rat::zero(), |s, x| s + x);
                (SysIndex::Plain(i + 1), v)
            })
            .collect();
        let std_spec = Arc::new(QSystemSpec::standard(plain(n), spec.g_prime.clone()).unwrap());
        let lhs = series_k(&spec, &nu, 6, BinomialConvention::TypeI).unwrap();
        let rhs = series_k(&std_spec, &nu_prime, 6, BinomialConvention::TypeI).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn specialized_series_is_specialization_of_k() {
    for sel in ["A1", "B2"] {
        let alg = algebra(sel).unwrap();
        let cutoff = 4u32;
        let spec = Arc::new(alg.kr_matrices(cutoff as usize));
        let wspec = Arc::new(despecialized(&spec));
        let nu = vec![(SysIndex::Pair { node: 1, level: 1 }, rat_int(1))];
        let kw = series_k(&wspec, &nu, cutoff, BinomialConvention::TypeI).unwrap();
        let y = VarSet::y_vars(alg.rank);
        let assign: Vec<(usize, u32)> = wspec
            .indices
            .iter()
            .map(|idx| match idx {
                SysIndex::Pair { node, level } => (node - 1, *level as u32),
                _ => unreachable!(),
            })
            .collect();
        let lhs = kw.specialize(&assign, &y, cutoff).unwrap();
        let rhs = series_k_specialized(&spec, &nu, cutoff, BinomialConvention::TypeI).unwrap();
        assert_eq!(lhs, rhs, "{sel}");
    }
}

#[test]
fn lower_triangular_k_series() {
    // strictly lower-triangular G: K^ν = ∏ (1−v_i)^(ν_i−1) = Q^(ν−1)
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..5 {
        let n = rng.gen_range(2..=3);
        let mut g = vec![vec![rat_int(0); n]; n];
        for i in 0..n {
            for j in 0..i {
                g[i][j] = rat_int(rng.gen_range(-2..=2));
            }
        }
        let spec = Arc::new(QSystemSpec::standard(plain(n), g.clone()).unwrap());
        let q = newton_solve_standard(&g, 6);
        let nu: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        let k = series_k(
            &spec,
            &nu.iter()
                .enumerate()
                .map(|(i, &v)| (SysIndex::Plain(i + 1), rat_int(v)))
                .collect::<Vec<_>>(),
            6,
            BinomialConvention::TypeI,
        )
        .unwrap();
        let mut expect = TruncatedSeries::one(q[0].vars().clone(), 6);
        for (i, qi) in q.iter().enumerate() {
            expect = expect.mul(&qi.powi(nu[i] - 1).unwrap()).unwrap();
        }
        assert_eq!(k, expect);
    }
}

#[test]
fn geometric_series_sanity() {
    // (1 − w)·(1 + w + w² + …) = 1 within the cutoff
    let vars = vars2();
    let one = TruncatedSeries::one(vars.clone(), CUTOFF);
    let f = one.sub(&monomial(&vars, CUTOFF, 0, 1)).unwrap();
    assert!(f.mul(&f.powi(-1).unwrap()).unwrap().is_one());
}
