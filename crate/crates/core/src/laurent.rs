//! Sparse Laurent polynomials over exact rationals.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{One, Zero};

use crate::rat::{rat_int, Rat};
use crate::series::{SeriesError, TruncatedSeries, VarSet};

/// A signed exponent vector for Laurent monomials.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SignedExpo(pub Vec<i64>);

impl SignedExpo {
    pub fn zero(nvars: usize) -> Self {
        SignedExpo(vec![0; nvars])
    }

    pub fn add(&self, other: &SignedExpo) -> SignedExpo {
        SignedExpo(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl PartialOrd for SignedExpo {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SignedExpo {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa: i64 = self.0.iter().sum();
        let sb: i64 = other.0.iter().sum();
        sa.cmp(&sb).then_with(|| self.0.cmp(&other.0))
    }
}

/// Finitely supported Laurent polynomial; no zero coefficients are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LaurentPoly {
    vars: Arc<VarSet>,
    coeffs: BTreeMap<SignedExpo, Rat>,
}

impl LaurentPoly {
    pub fn zero(vars: Arc<VarSet>) -> Self {
        LaurentPoly {
            vars,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(vars: Arc<VarSet>) -> Self {
        Self::monomial(vars.clone(), SignedExpo::zero(vars.len()), rat_int(1))
    }

    pub fn monomial(vars: Arc<VarSet>, e: SignedExpo, c: Rat) -> Self {
        let mut p = Self::zero(vars);
        if !c.is_zero() {
            p.coeffs.insert(e, c);
        }
        p
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1
            && self
                .coeffs
                .get(&SignedExpo::zero(self.vars.len()))
                .map(|c| c.is_one())
                .unwrap_or(false)
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeff(&self, e: &SignedExpo) -> Rat {
        self.coeffs.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&SignedExpo, &Rat)> {
        self.coeffs.iter()
    }

    fn insert(&mut self, e: SignedExpo, c: Rat) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.coeffs.entry(e) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let sum = o.get() + &c;
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.vars != other.vars {
            return Err(SeriesError::VariableMismatch);
        }
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            out.insert(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -c.clone();
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        if self.vars != other.vars {
            return Err(SeriesError::VariableMismatch);
        }
        let mut out = Self::zero(self.vars.clone());
        for (p, a) in &self.coeffs {
            for (q, b) in &other.coeffs {
                out.insert(p.add(q), a * b);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, k: &Rat) -> Self {
        if k.is_zero() {
            return Self::zero(self.vars.clone());
        }
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = &*c * k;
        }
        out
    }

    /// Nonnegative integer power by repeated multiplication.
    pub fn pow_u(&self, n: u32) -> Result<Self, SeriesError> {
        let mut out = Self::one(self.vars.clone());
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Exact partial derivative `∂/∂x_v`.
    pub fn derivative(&self, v: usize) -> Self {
        let mut out = Self::zero(self.vars.clone());
        for (e, c) in &self.coeffs {
            let k = e.0[v];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2.0[v] -= 1;
            out.insert(e2, c * rat_int(k));
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.is_zero() {
                write!(f, "{c}")?;
                continue;
            }
            if !c.is_one() {
                write!(f, "{c}·")?;
            }
            let mut firstv = true;
            for (v, &x) in e.0.iter().enumerate() {
                if x == 0 {
                    continue;
                }
                if !firstv {
                    write!(f, "·")?;
                }
                firstv = false;
                write!(f, "{}", self.vars.names[v])?;
                if x != 1 {
                    write!(f, "^{x}")?;
                }
            }
        }
        Ok(())
    }
}

/// Reinterprets a truncated series as an exact Laurent polynomial.
///
/// The caller is responsible for the series being a genuine polynomial
/// within its cutoff (e.g. a stabilized truncation).
pub fn series_to_laurent(f: &TruncatedSeries) -> LaurentPoly {
    let mut out = LaurentPoly::zero(f.vars().clone());
    for (e, c) in f.terms() {
        let se = SignedExpo(e.0.iter().map(|&x| x as i64).collect());
        out.insert(se, c.clone());
    }
    out
}

/// Substitutes `y_a ↦ ∏_b x_b^(−g[a][b])` into a polynomial-within-cutoff
/// series over `y`, yielding an exact Laurent polynomial over `x`.
pub fn substitute_monomials(
    f: &TruncatedSeries,
    g: &[Vec<i64>],
    x_vars: &Arc<VarSet>,
) -> LaurentPoly {
    let mut out = LaurentPoly::zero(x_vars.clone());
    for (e, c) in f.terms() {
        let mut se = vec![0i64; x_vars.len()];
        for (a, &m) in e.0.iter().enumerate() {
            for (b, item) in se.iter_mut().enumerate() {
                *item -= g[a][b] * m as i64;
            }
        }
        out.insert(SignedExpo(se), c.clone());
    }
    out
}

/// Determinant of a square matrix of Laurent polynomials by cofactor
/// expansion; matrices here are at most rank-of-algebra sized.
pub fn laurent_det(m: &[Vec<LaurentPoly>], vars: &Arc<VarSet>) -> Result<LaurentPoly, SeriesError> {
    let n = m.len();
    if n == 0 {
        return Ok(LaurentPoly::one(vars.clone()));
    }
    if n == 1 {
        return Ok(m[0][0].clone());
    }
    let mut det = LaurentPoly::zero(vars.clone());
    for (j, entry) in m[0].iter().enumerate() {
        if entry.is_zero() {
            continue;
        }
        let minor: Vec<Vec<LaurentPoly>> = m[1..]
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(k, _)| *k != j)
                    .map(|(_, p)| p.clone())
                    .collect()
            })
            .collect();
        let sub = laurent_det(&minor, vars)?;
        let term = entry.mul(&sub)?;
        det = if j % 2 == 0 {
            det.add(&term)?
        } else {
            det.sub(&term)?
        };
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::Expo;

    #[test]
    fn substitute_single_variable() {
        // y₁ with g = [[2]] → x₁⁻²
        let y = VarSet::y_vars(1);
        let x = VarSet::x_vars(1);
        let f = TruncatedSeries::monomial(y.clone(), 2, Expo::unit(1, 0, 1), rat_int(1)).unwrap();
        let p = substitute_monomials(&f, &[vec![2]], &x);
        assert_eq!(p.coeff(&SignedExpo(vec![-2])), rat_int(1));
        assert_eq!(p.num_terms(), 1);

        let one = TruncatedSeries::one(y, 2);
        assert!(substitute_monomials(&one, &[vec![2]], &x).is_one());
    }

    #[test]
    fn sl2_two_dim_character() {
        // (1 + y₁) with g₁₁ = 2, times x₁, is x + x⁻¹
        let y = VarSet::y_vars(1);
        let x = VarSet::x_vars(1);
        let one = TruncatedSeries::one(y.clone(), 2);
        let ypoly = one
            .add(&TruncatedSeries::monomial(y, 2, Expo::unit(1, 0, 1), rat_int(1)).unwrap())
            .unwrap();
        let p = substitute_monomials(&ypoly, &[vec![2]], &x);
        let xc = LaurentPoly::monomial(x.clone(), SignedExpo(vec![1]), rat_int(1));
        let chi = p.mul(&xc).unwrap();
        assert_eq!(chi.coeff(&SignedExpo(vec![1])), rat_int(1));
        assert_eq!(chi.coeff(&SignedExpo(vec![-1])), rat_int(1));
        assert_eq!(chi.num_terms(), 2);
    }

    #[test]
    fn derivative_and_det() {
        // d/dx (x + x⁻¹) = 1 − x⁻²
        let x = VarSet::x_vars(1);
        let mut q = LaurentPoly::monomial(x.clone(), SignedExpo(vec![1]), rat_int(1));
        q = q
            .add(&LaurentPoly::monomial(x.clone(), SignedExpo(vec![-1]), rat_int(1)))
            .unwrap();
        let d = q.derivative(0);
        assert_eq!(d.coeff(&SignedExpo(vec![0])), rat_int(1));
        assert_eq!(d.coeff(&SignedExpo(vec![-2])), rat_int(-1));
        let det = laurent_det(&[vec![d.clone()]], &x).unwrap();
        assert_eq!(det, d);
    }
}
