//! Independent oracles shared by the integration suites.
//!
//! These deliberately avoid the production solution paths: the solver is
//! cross-checked by a Newton iteration on the inverse-map formulation, and
//! multiplicities by a highest-weight peeling of explicit weight systems.

// not every suite uses every oracle
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use num::Zero;

use qsys_core::liedata::{character_weights, AlgebraData};
use qsys_core::linalg::Mat;
use qsys_core::rat::{rat_int, Rat};
use qsys_core::series::{Expo, TruncatedSeries, VarSet};

/// Solves the standard system `Q_i + w_i·∏_j Q_j^(G_ij) = 1` by Newton
/// iteration on `R(Q) = Q + w·∏Q^G − 1`, with the series-valued Jacobian
/// inverted through its geometric series.  Quadratic convergence: the
/// residual order doubles per step.
pub fn newton_solve_standard(g: &Mat, cutoff: u32) -> Vec<TruncatedSeries> {
    let n = g.len();
    let vars = VarSet::unit((1..=n).map(|i| format!("w{i}")).collect::<Vec<_>>());
    let one = TruncatedSeries::one(vars.clone(), cutoff);
    let monos: Vec<TruncatedSeries> = (0..n)
        .map(|i| {
            TruncatedSeries::monomial(vars.clone(), cutoff, Expo::unit(n, i, 1), rat_int(1))
                .unwrap()
        })
        .collect();
    let mut q = vec![one.clone(); n];
    let steps = 32 - u32::leading_zeros(cutoff.max(1)) + 2;
    for _ in 0..steps {
        // T_i = w_i·∏_j Q_j^(G_ij), residual R_i = Q_i + T_i − 1
        let t: Vec<TruncatedSeries> = (0..n)
            .map(|i| {
                let mut prod = one.clone();
                for (j, e) in g[i].iter().enumerate() {
                    if e.is_zero() {
                        continue;
                    }
                    prod = prod.mul(&q[j].pow(e).unwrap()).unwrap();
                }
                monos[i].mul(&prod).unwrap()
            })
            .collect();
        let residual: Vec<TruncatedSeries> = (0..n)
            .map(|i| q[i].add(&t[i]).unwrap().sub(&one).unwrap())
            .collect();
        if residual.iter().all(TruncatedSeries::is_zero) {
            break;
        }
        // J = I + E with E_ik = T_i·G_ik/Q_k of positive order
        let e_mat: Vec<Vec<TruncatedSeries>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| {
                        if g[i][k].is_zero() {
                            TruncatedSeries::zero(vars.clone(), cutoff)
                        } else {
                            t[i].mul(&q[k].powi(-1).unwrap())
                                .unwrap()
                                .scale(&g[i][k])
                        }
                    })
                    .collect()
            })
            .collect();
        // Δ = −J⁻¹·R = −(Σ_t (−E)^t)·R, truncated by order
        let mut delta: Vec<TruncatedSeries> = residual.iter().map(TruncatedSeries::neg).collect();
        let mut term: Vec<TruncatedSeries> = delta.clone();
        for _ in 0..cutoff {
            let next: Vec<TruncatedSeries> = (0..n)
                .map(|i| {
                    let mut acc = TruncatedSeries::zero(vars.clone(), cutoff);
                    for k in 0..n {
                        acc = acc.add(&e_mat[i][k].mul(&term[k]).unwrap().neg()).unwrap();
                    }
                    acc
                })
                .collect();
            if next.iter().all(TruncatedSeries::is_zero) {
                break;
            }
            for i in 0..n {
                delta[i] = delta[i].add(&next[i]).unwrap();
            }
            term = next;
        }
        for i in 0..n {
            q[i] = q[i].add(&delta[i]).unwrap();
        }
    }
    // certify: the residual must vanish identically
    for i in 0..n {
        let mut prod = one.clone();
        for (j, e) in g[i].iter().enumerate() {
            if e.is_zero() {
                continue;
            }
            prod = prod.mul(&q[j].pow(e).unwrap()).unwrap();
        }
        let r = q[i]
            .add(&monos[i].mul(&prod).unwrap())
            .unwrap()
            .sub(&one)
            .unwrap();
        assert!(r.is_zero(), "newton oracle did not converge at row {i}");
    }
    q
}

/// Full weight system of a tensor product `⊗ V(λ_f)^(⊗ mult_f)` as a map
/// from Λ-coordinates to multiplicities.
pub fn product_weight_map(
    alg: &AlgebraData,
    factors: &[(Vec<i64>, u32)],
) -> HashMap<Vec<i64>, i64> {
    let mut acc: HashMap<Vec<i64>, i64> = HashMap::new();
    acc.insert(vec![0; alg.rank], 1);
    for (lambda, power) in factors {
        let weights = character_weights(alg, lambda).unwrap();
        for _ in 0..*power {
            let mut next: HashMap<Vec<i64>, i64> = HashMap::new();
            for (w1, m1) in &acc {
                for (w2, m2) in &weights {
                    let sum: Vec<i64> = w1.iter().zip(w2).map(|(a, b)| a + b).collect();
                    *next.entry(sum).or_insert(0) += m1 * m2;
                }
            }
            acc = next;
        }
    }
    acc
}

/// Decomposes a genuine character (nonnegative integer weight map) into
/// irreducibles by repeatedly peeling a maximal weight: a weight none of
/// whose simple-root shifts lies in the support is a highest weight of a
/// component.
pub fn decompose_weight_map(
    alg: &AlgebraData,
    mut map: HashMap<Vec<i64>, i64>,
) -> Vec<(Vec<i64>, i64)> {
    let mut out: Vec<(Vec<i64>, i64)> = Vec::new();
    loop {
        map.retain(|_, m| *m != 0);
        if map.is_empty() {
            break;
        }
        let mut top: Option<Vec<i64>> = None;
        'search: for w in map.keys() {
            for a in 0..alg.rank {
                let shifted: Vec<i64> = (0..alg.rank)
                    .map(|u| w[u] + alg.cartan[u][a])
                    .collect();
                if map.contains_key(&shifted) {
                    continue 'search;
                }
            }
            top = Some(w.clone());
            break;
        }
        let top = top.expect("nonempty weight map has a maximal element");
        assert!(
            top.iter().all(|&x| x >= 0),
            "maximal weight of a character must be dominant"
        );
        let mult = map[&top];
        assert!(mult > 0, "component multiplicity must be positive");
        for (w, m) in character_weights(alg, &top).unwrap() {
            *map.entry(w).or_insert(0) -= mult * m;
        }
        out.push((top, mult));
    }
    out.sort();
    out.reverse();
    out
}

/// Shared monomial helper.
pub fn monomial(vars: &Arc<VarSet>, cutoff: u32, var: usize, power: u32) -> TruncatedSeries {
    TruncatedSeries::monomial(
        vars.clone(),
        cutoff,
        Expo::unit(vars.len(), var, power),
        rat_int(1),
    )
    .unwrap()
}

/// `p/q` rationals convenience.
pub fn r(p: i64, q: i64) -> Rat {
    qsys_core::rat::rat(p, q)
}
