//! Direct evaluation of the combinatorial series `K^ν` and `R^ν` and their
//! specializations, from the closed-form coefficients
//!
//! ```text
//!   K(ν,N) = ∏_(i∈H(N)) C(P_i + N_i, N_i)
//!   R(ν,N) = det_(H(N)) F · ∏_(i∈H(N)) (1/N_i)·C(P_i + N_i − 1, N_i − 1)
//!   P_i    = −Σ_j ν_j (D⁻¹)_ji − Σ_j N_j (G·D⁻¹)_ji
//!   F_ij   = δ_ij P_j + (G·D⁻¹)_ij N_j
//! ```
//!
//! where `H(N)` is the support of the exponent vector `N` and `C(a, b)` is
//! the generalized binomial coefficient (the Γ-quotient limit, equal to the
//! falling factorial `a(a−1)…(a−b+1)/b!` for every rational `a`).

use num::Zero;

use crate::linalg::det_bareiss;
use crate::qsolve::{QsolveError, QSystemSpec, SysIndex, SystemKind};
use crate::rat::{is_integer, rat_int, Rat};
use crate::series::{Expo, TruncatedSeries, VarSet};

/// Binomial convention selector.
///
/// Type I is the Γ-limit value for every argument; type II additionally sets
/// `C(a, b) = 0` for integer `a < b`, which only differs from type I at
/// negative integer `a`.  No equivalence between the two is asserted
/// anywhere.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum BinomialConvention {
    #[default]
    TypeI,
    TypeII,
}

impl BinomialConvention {
    pub fn as_str(&self) -> &'static str {
        match self {
            BinomialConvention::TypeI => "type1",
            BinomialConvention::TypeII => "type2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "type1" | "type-1" | "typeI" | "type-i" => Some(BinomialConvention::TypeI),
            "type2" | "type-2" | "typeII" | "type-ii" => Some(BinomialConvention::TypeII),
            _ => None,
        }
    }
}

/// Generalized binomial coefficient `C(a, b)` for rational `a` and
/// nonnegative integer `b`.
pub fn gen_binom(a: &Rat, b: u32, convention: BinomialConvention) -> Rat {
    if convention == BinomialConvention::TypeII && is_integer(a) && *a < rat_int(b as i64) {
        return Rat::zero();
    }
    let mut num = rat_int(1);
    let mut den = rat_int(1);
    for t in 0..b {
        num *= a - rat_int(t as i64);
        den *= rat_int((t + 1) as i64);
    }
    num / den
}

/// Everything needed to evaluate one coefficient `K(ν,N)` or `R(ν,N)`.
pub struct CoeffContext<'a> {
    pub spec: &'a QSystemSpec,
    /// ν, dense over `spec.indices`.
    pub nu: &'a [Rat],
    /// N, dense over `spec.indices`.
    pub n: &'a [u32],
    pub convention: BinomialConvention,
}

impl CoeffContext<'_> {
    /// `P_i = −Σ_j ν_j (D⁻¹)_ji − Σ_j N_j G'_ji`, computed from the cached
    /// `G' = G·D⁻¹` of the spec.
    fn p_value(&self, i: usize) -> Rat {
        let mut p = Rat::zero();
        for (j, nu_j) in self.nu.iter().enumerate() {
            if !nu_j.is_zero() {
                p -= nu_j * &self.spec.d_inv[j][i];
            }
        }
        for (j, &n_j) in self.n.iter().enumerate() {
            if n_j != 0 {
                p -= rat_int(n_j as i64) * &self.spec.g_prime[j][i];
            }
        }
        p
    }

    fn support(&self) -> Vec<usize> {
        (0..self.n.len()).filter(|&i| self.n[i] != 0).collect()
    }
}

/// `K(D,G;ν,N)`; the empty product (N = 0) is 1.
pub fn coeff_k(ctx: &CoeffContext) -> Rat {
    let mut out = rat_int(1);
    for i in ctx.support() {
        let p = ctx.p_value(i);
        let arg = &p + rat_int(ctx.n[i] as i64);
        out *= gen_binom(&arg, ctx.n[i], ctx.convention);
        if out.is_zero() {
            return out;
        }
    }
    out
}

/// `R(D,G;ν,N)`; the empty determinant and product (N = 0) are 1.
pub fn coeff_r(ctx: &CoeffContext) -> Rat {
    let support = ctx.support();
    let p: Vec<Rat> = support.iter().map(|&i| ctx.p_value(i)).collect();
    let m: Vec<Vec<Rat>> = support
        .iter()
        .enumerate()
        .map(|(s, &i)| {
            support
                .iter()
                .enumerate()
                .map(|(t, &j)| {
                    let mut f = &ctx.spec.g_prime[i][j] * rat_int(ctx.n[j] as i64);
                    if s == t {
                        f += p[t].clone();
                    }
                    f
                })
                .collect()
        })
        .collect();
    let mut out = det_bareiss(&m);
    if out.is_zero() {
        return out;
    }
    for (t, &i) in support.iter().enumerate() {
        let n_i = ctx.n[i];
        let arg = &p[t] + rat_int(n_i as i64 - 1);
        out *= gen_binom(&arg, n_i - 1, ctx.convention) / rat_int(n_i as i64);
        if out.is_zero() {
            return out;
        }
    }
    out
}

/// Visits every exponent vector with `Σ weights_i·N_i ≤ cutoff` exactly once.
pub fn for_each_exponent(weights: &[u32], cutoff: u32, mut f: impl FnMut(&[u32])) {
    fn rec(weights: &[u32], pos: usize, budget: u32, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if pos == weights.len() {
            f(cur);
            return;
        }
        let w = weights[pos].max(1);
        for e in 0..=budget / w {
            cur[pos] = e;
            rec(weights, pos + 1, budget - e * w, cur, f);
        }
        cur[pos] = 0;
    }
    let mut cur = vec![0u32; weights.len()];
    rec(weights, 0, cutoff, &mut cur, &mut f);
}

/// Densifies a sparse ν over the spec's index set.
pub fn densify_nu(spec: &QSystemSpec, nu: &[(SysIndex, Rat)]) -> Result<Vec<Rat>, QsolveError> {
    let mut out = vec![Rat::zero(); spec.size()];
    for (idx, v) in nu {
        let pos = spec.position(idx).ok_or(QsolveError::UnknownIndex)?;
        out[pos] += v.clone();
    }
    Ok(out)
}

fn index_weights(spec: &QSystemSpec) -> Vec<u32> {
    spec.indices.iter().map(|i| i.weight()).collect()
}

fn series_from_coeffs(
    spec: &QSystemSpec,
    nu: &[(SysIndex, Rat)],
    cutoff: u32,
    convention: BinomialConvention,
    use_r: bool,
) -> Result<TruncatedSeries, QsolveError> {
    let nu_dense = densify_nu(spec, nu)?;
    let weights = index_weights(spec);
    let vars = spec.w_vars();
    let mut terms: Vec<(Expo, Rat)> = Vec::new();
    for_each_exponent(&weights, cutoff, |n| {
        let ctx = CoeffContext {
            spec,
            nu: &nu_dense,
            n,
            convention,
        };
        let c = if use_r { coeff_r(&ctx) } else { coeff_k(&ctx) };
        if !c.is_zero() {
            terms.push((Expo(n.to_vec()), c));
        }
    });
    Ok(TruncatedSeries::from_terms(vars, cutoff, terms)?)
}

/// `K^ν(w) = Σ_N K(ν,N)·w^N` over all `N` with weighted degree ≤ cutoff.
pub fn series_k(
    spec: &QSystemSpec,
    nu: &[(SysIndex, Rat)],
    cutoff: u32,
    convention: BinomialConvention,
) -> Result<TruncatedSeries, QsolveError> {
    series_from_coeffs(spec, nu, cutoff, convention, false)
}

/// `R^ν(w) = Σ_N R(ν,N)·w^N` over all `N` with weighted degree ≤ cutoff.
pub fn series_r(
    spec: &QSystemSpec,
    nu: &[(SysIndex, Rat)],
    cutoff: u32,
    convention: BinomialConvention,
) -> Result<TruncatedSeries, QsolveError> {
    series_from_coeffs(spec, nu, cutoff, convention, true)
}

fn series_specialized(
    spec: &QSystemSpec,
    nu: &[(SysIndex, Rat)],
    cutoff: u32,
    convention: BinomialConvention,
    use_r: bool,
) -> Result<TruncatedSeries, QsolveError> {
    if spec.kind != SystemKind::Specialized {
        return Err(QsolveError::KindMismatch);
    }
    let level = spec.level();
    if (level as u32) < cutoff {
        return Err(QsolveError::WindowTooSmall { level, cutoff });
    }
    let nu_dense = densify_nu(spec, nu)?;
    let weights = index_weights(spec);
    let vars = VarSet::y_vars(spec.rank);
    // group N by the image exponent M_a = Σ_m m·N_m^(a); only N with
    // weighted degree ≤ cutoff reach degrees ≤ cutoff
    let mut terms: Vec<(Expo, Rat)> = Vec::new();
    for_each_exponent(&weights, cutoff, |n| {
        let ctx = CoeffContext {
            spec,
            nu: &nu_dense,
            n,
            convention,
        };
        let c = if use_r { coeff_r(&ctx) } else { coeff_k(&ctx) };
        if c.is_zero() {
            return;
        }
        let mut m = vec![0u32; spec.rank];
        for (pos, &e) in n.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if let SysIndex::Pair { node, level } = spec.indices[pos] {
                m[node - 1] += level as u32 * e;
            }
        }
        terms.push((Expo(m), c));
    });
    Ok(TruncatedSeries::from_terms(vars, cutoff, terms)?)
}

/// Specialization `𝒦^ν(y) = K^ν(w(y))` computed by direct summation with
/// the substitution `w_m^(a) = y_a^m` applied per exponent vector.
pub fn series_k_specialized(
    spec: &QSystemSpec,
    nu: &[(SysIndex, Rat)],
    cutoff: u32,
    convention: BinomialConvention,
) -> Result<TruncatedSeries, QsolveError> {
    series_specialized(spec, nu, cutoff, convention, false)
}

/// Specialization `ℛ^ν(y) = R^ν(w(y))`.
pub fn series_r_specialized(
    spec: &QSystemSpec,
    nu: &[(SysIndex, Rat)],
    cutoff: u32,
    convention: BinomialConvention,
) -> Result<TruncatedSeries, QsolveError> {
    series_specialized(spec, nu, cutoff, convention, true)
}

/// One row per exponent vector, with both coefficients; rows come out in
/// graded order of `N`.
pub fn coeff_table(
    spec: &QSystemSpec,
    nu: &[(SysIndex, Rat)],
    cutoff: u32,
    convention: BinomialConvention,
) -> Result<Vec<(Vec<u32>, Rat, Rat)>, QsolveError> {
    let nu_dense = densify_nu(spec, nu)?;
    let weights = index_weights(spec);
    let mut rows = Vec::new();
    for_each_exponent(&weights, cutoff, |n| {
        let ctx = CoeffContext {
            spec,
            nu: &nu_dense,
            n,
            convention,
        };
        rows.push((n.to_vec(), coeff_k(&ctx), coeff_r(&ctx)));
    });
    rows.sort_by_key(|(n, _, _)| {
        let wd: u32 = n.iter().zip(&weights).map(|(&e, &w)| e * w).sum();
        (wd, n.clone())
    });
    Ok(rows)
}

/// Unspecialized window spec sharing the matrices of a specialized system,
/// used to compare `𝒦^ν` against `specialize(K^ν)`.
pub fn despecialized(spec: &QSystemSpec) -> QSystemSpec {
    let mut out = spec.clone();
    out.kind = SystemKind::InfiniteTruncated;
    out
}

pub use crate::qsolve::second_difference_spec_w;
