//! Sparse truncated multivariate power series over exact rationals.
//!
//! A [`TruncatedSeries`] is a finitely supported map from exponent vectors to
//! rational coefficients, kept modulo the ideal of monomials whose *weighted*
//! total degree exceeds the cutoff.  Weights default to 1; a variable of
//! weight `m` contributes `m`-fold per exponent unit, which lets truncation
//! commute with the substitution `w ↦ y^m` performed by [`TruncatedSeries::specialize`].
//!
//! All values are immutable after construction and all operations are pure.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{One, Zero};
use thiserror::Error;

use crate::rat::{rat_int, Rat};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("series have mismatched variable sets")]
    VariableMismatch,
    #[error("series have mismatched cutoffs: {0} vs {1}")]
    CutoffMismatch(u32, u32),
    #[error("operation requires a unit constant term")]
    NonUnitConstantTerm,
    #[error("operation requires a zero constant term")]
    NonZeroConstantTerm,
    #[error("source cutoff {src} cannot determine target coefficients up to {dst}")]
    InsufficientCutoff { src: u32, dst: u32 },
    #[error("variable weight does not match its specialization degree")]
    WeightMismatch,
    #[error("exponent outside the series cutoff")]
    ExponentOutOfRange,
}

/// An exponent vector, dense over the variable list of its series.
///
/// Ordering is graded lexicographic (total degree first), which makes map
/// iteration canonical and equality structural.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Expo(pub Vec<u32>);

impl Expo {
    pub fn zero(nvars: usize) -> Self {
        Expo(vec![0; nvars])
    }

    /// `var^power` as an exponent vector.
    pub fn unit(nvars: usize, var: usize, power: u32) -> Self {
        let mut e = vec![0; nvars];
        e[var] = power;
        Expo(e)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn weighted_degree(&self, weights: &[u32]) -> u32 {
        self.0.iter().zip(weights).map(|(&e, &w)| e * w).sum()
    }

    pub fn add(&self, other: &Expo) -> Expo {
        Expo(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl PartialOrd for Expo {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Expo {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

/// Ordered variable list with per-variable positive weights.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VarSet {
    pub names: Vec<String>,
    pub weights: Vec<u32>,
}

impl VarSet {
    /// Variables of weight 1.
    pub fn unit<S: Into<String>>(names: Vec<S>) -> Arc<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let weights = vec![1; names.len()];
        Arc::new(VarSet { names, weights })
    }

    pub fn weighted<S: Into<String>>(names: Vec<S>, weights: Vec<u32>) -> Arc<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        assert_eq!(names.len(), weights.len());
        assert!(weights.iter().all(|&w| w >= 1), "weights must be positive");
        Arc::new(VarSet { names, weights })
    }

    /// `y1 .. yn`, all weight 1.
    pub fn y_vars(n: usize) -> Arc<Self> {
        VarSet::unit((1..=n).map(|a| format!("y{a}")).collect())
    }

    /// `x1 .. xn`, all weight 1.
    pub fn x_vars(n: usize) -> Arc<Self> {
        VarSet::unit((1..=n).map(|a| format!("x{a}")).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// A multivariate power series truncated at a weighted total degree.
///
/// Invariants: no stored coefficient is zero and every stored exponent has
/// weighted degree at most the cutoff.  Two series are equal iff their
/// variable sets, cutoffs and coefficient maps agree.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruncatedSeries {
    vars: Arc<VarSet>,
    cutoff: u32,
    coeffs: BTreeMap<Expo, Rat>,
}

impl TruncatedSeries {
    pub fn zero(vars: Arc<VarSet>, cutoff: u32) -> Self {
        TruncatedSeries {
            vars,
            cutoff,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(vars: Arc<VarSet>, cutoff: u32) -> Self {
        Self::constant(vars, cutoff, rat_int(1))
    }

    pub fn constant(vars: Arc<VarSet>, cutoff: u32, c: Rat) -> Self {
        let mut s = Self::zero(vars, cutoff);
        if !c.is_zero() {
            s.coeffs.insert(Expo::zero(s.vars.len()), c);
        }
        s
    }

    /// A single monomial `c · vars^expo`.
    pub fn monomial(vars: Arc<VarSet>, cutoff: u32, expo: Expo, c: Rat) -> Result<Self, SeriesError> {
        if expo.weighted_degree(&vars.weights) > cutoff {
            return Err(SeriesError::ExponentOutOfRange);
        }
        let mut s = Self::zero(vars, cutoff);
        if !c.is_zero() {
            s.coeffs.insert(expo, c);
        }
        Ok(s)
    }

    pub fn from_terms(
        vars: Arc<VarSet>,
        cutoff: u32,
        terms: impl IntoIterator<Item = (Expo, Rat)>,
    ) -> Result<Self, SeriesError> {
        let mut s = Self::zero(vars, cutoff);
        for (e, c) in terms {
            if e.weighted_degree(&s.vars.weights) > cutoff {
                return Err(SeriesError::ExponentOutOfRange);
            }
            if c.is_zero() {
                continue;
            }
            use std::collections::btree_map::Entry;
            match s.coeffs.entry(e) {
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
        Ok(s)
    }

    pub fn vars(&self) -> &Arc<VarSet> {
        &self.vars
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn coeff(&self, e: &Expo) -> Rat {
        self.coeffs.get(e).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&Expo::zero(self.vars.len()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs.len() == 1 && self.constant_term().is_one()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// Terms in graded-lex order of the *unweighted* key; see
    /// [`TruncatedSeries::terms_weighted_order`] for the JSON order.
    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &Rat)> {
        self.coeffs.iter()
    }

    /// Terms sorted by (weighted degree, exponent lex), the canonical order
    /// of the serialization contract.
    pub fn terms_weighted_order(&self) -> Vec<(&Expo, &Rat)> {
        let mut v: Vec<(&Expo, &Rat)> = self.coeffs.iter().collect();
        let w = &self.vars.weights;
        v.sort_by(|(a, _), (b, _)| {
            a.weighted_degree(w)
                .cmp(&b.weighted_degree(w))
                .then_with(|| a.0.cmp(&b.0))
        });
        v
    }

    fn check_compatible(&self, other: &Self) -> Result<(), SeriesError> {
        if self.vars != other.vars {
            return Err(SeriesError::VariableMismatch);
        }
        if self.cutoff != other.cutoff {
            return Err(SeriesError::CutoffMismatch(self.cutoff, other.cutoff));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        for (e, c) in &other.coeffs {
            use std::collections::btree_map::Entry;
            match out.coeffs.entry(e.clone()) {
                Entry::Vacant(v) => {
                    v.insert(c.clone());
                }
                Entry::Occupied(mut o) => {
                    let sum = o.get() + c;
                    if sum.is_zero() {
                        o.remove();
                    } else {
                        *o.get_mut() = sum;
                    }
                }
            }
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

    pub fn scale(&self, k: &Rat) -> Self {
        if k.is_zero() {
            return Self::zero(self.vars.clone(), self.cutoff);
        }
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = &*c * k;
        }
        out
    }

    /// Cauchy product truncated at the common cutoff.
    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        self.check_compatible(other)?;
        let w = &self.vars.weights;
        // group the smaller factor by weighted degree for pruning
        let (small, large) = if self.coeffs.len() <= other.coeffs.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut acc: BTreeMap<Expo, Rat> = BTreeMap::new();
        for (p, a) in &small.coeffs {
            let wp = p.weighted_degree(w);
            if wp > self.cutoff {
                continue;
            }
            let budget = self.cutoff - wp;
            for (q, b) in &large.coeffs {
                if q.weighted_degree(w) > budget {
                    continue;
                }
                let n = p.add(q);
                let prod = a * b;
                use std::collections::btree_map::Entry;
                match acc.entry(n) {
                    Entry::Vacant(v) => {
                        v.insert(prod);
                    }
                    Entry::Occupied(mut o) => {
                        let sum = o.get() + &prod;
                        if sum.is_zero() {
                            o.remove();
                        } else {
                            *o.get_mut() = sum;
                        }
                    }
                }
            }
        }
        Ok(TruncatedSeries {
            vars: self.vars.clone(),
            cutoff: self.cutoff,
            coeffs: acc,
        })
    }

    /// Splits the nonconstant terms by weighted degree: `levels[d]` holds the
    /// terms of weighted degree `d`.
    fn levels(&self) -> Vec<Vec<(Expo, Rat)>> {
        let w = &self.vars.weights;
        let mut levels: Vec<Vec<(Expo, Rat)>> = vec![Vec::new(); (self.cutoff + 1) as usize];
        for (e, c) in &self.coeffs {
            let d = e.weighted_degree(w) as usize;
            levels[d].push((e.clone(), c.clone()));
        }
        levels
    }

    /// The `α`-th power with unit constant term.
    ///
    /// Computed degree by degree from the Euler-derivation identity
    /// `f·θ(g) = α·g·θ(f)` for `g = f^α`, where `θ` is the weighted Euler
    /// operator; a single pass, no factorial denominators.
    pub fn pow(&self, alpha: &Rat) -> Result<Self, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::NonUnitConstantTerm);
        }
        if alpha.is_zero() {
            return Ok(Self::one(self.vars.clone(), self.cutoff));
        }
        let flevels = self.levels();
        let nvars = self.vars.len();
        let mut glevels: Vec<Vec<(Expo, Rat)>> = vec![Vec::new(); (self.cutoff + 1) as usize];
        glevels[0].push((Expo::zero(nvars), rat_int(1)));
        let alpha1 = alpha + rat_int(1);
        for d in 1..=self.cutoff {
            let mut acc: BTreeMap<Expo, Rat> = BTreeMap::new();
            for wp in 1..=d {
                for (p, fp) in &flevels[wp as usize] {
                    // ((α+1)·wdeg(P) − d) · f_P · g_{N−P}
                    let factor = &alpha1 * rat_int(wp as i64) - rat_int(d as i64);
                    if factor.is_zero() {
                        continue;
                    }
                    let fac = &factor * fp;
                    for (q, gq) in &glevels[(d - wp) as usize] {
                        let n = p.add(q);
                        let t = &fac * gq;
                        *acc.entry(n).or_insert_with(Rat::zero) += t;
                    }
                }
            }
            let dd = rat_int(d as i64);
            let level: Vec<(Expo, Rat)> = acc
                .into_iter()
                .filter_map(|(e, c)| {
                    let v = c / &dd;
                    if v.is_zero() {
                        None
                    } else {
                        Some((e, v))
                    }
                })
                .collect();
            glevels[d as usize] = level;
        }
        let mut coeffs = BTreeMap::new();
        for level in glevels {
            for (e, c) in level {
                coeffs.insert(e, c);
            }
        }
        Ok(TruncatedSeries {
            vars: self.vars.clone(),
            cutoff: self.cutoff,
            coeffs,
        })
    }

    /// Integer power convenience wrapper around [`TruncatedSeries::pow`].
    pub fn powi(&self, n: i64) -> Result<Self, SeriesError> {
        self.pow(&rat_int(n))
    }

    /// Logarithm of a unit-constant-term series; the result has zero
    /// constant term and `exp ∘ log = id` within the cutoff.
    pub fn log(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_one() {
            return Err(SeriesError::NonUnitConstantTerm);
        }
        let flevels = self.levels();
        let mut hlevels: Vec<Vec<(Expo, Rat)>> = vec![Vec::new(); (self.cutoff + 1) as usize];
        for d in 1..=self.cutoff {
            // h_N = f_N − (1/d) Σ_{P≠0} (d − wdeg P)·f_P·h_{N−P}
            let mut acc: BTreeMap<Expo, Rat> = BTreeMap::new();
            for (e, c) in &flevels[d as usize] {
                acc.insert(e.clone(), c.clone());
            }
            for wp in 1..d {
                for (p, fp) in &flevels[wp as usize] {
                    let factor = rat_int((d - wp) as i64) / rat_int(d as i64);
                    let fac = -(&factor * fp);
                    for (q, hq) in &hlevels[(d - wp) as usize] {
                        let n = p.add(q);
                        let t = &fac * hq;
                        *acc.entry(n).or_insert_with(Rat::zero) += t;
                    }
                }
            }
            hlevels[d as usize] = acc.into_iter().filter(|(_, c)| !c.is_zero()).collect();
        }
        let mut coeffs = BTreeMap::new();
        for level in hlevels {
            for (e, c) in level {
                coeffs.insert(e, c);
            }
        }
        Ok(TruncatedSeries {
            vars: self.vars.clone(),
            cutoff: self.cutoff,
            coeffs,
        })
    }

    /// Exponential of a zero-constant-term series.
    pub fn exp(&self) -> Result<Self, SeriesError> {
        if !self.constant_term().is_zero() {
            return Err(SeriesError::NonZeroConstantTerm);
        }
        let flevels = self.levels();
        let nvars = self.vars.len();
        let mut glevels: Vec<Vec<(Expo, Rat)>> = vec![Vec::new(); (self.cutoff + 1) as usize];
        glevels[0].push((Expo::zero(nvars), rat_int(1)));
        for d in 1..=self.cutoff {
            // g_N = (1/d) Σ_{P≠0} wdeg(P)·f_P·g_{N−P}
            let mut acc: BTreeMap<Expo, Rat> = BTreeMap::new();
            for wp in 1..=d {
                for (p, fp) in &flevels[wp as usize] {
                    let fac = rat_int(wp as i64) * fp;
                    for (q, gq) in &glevels[(d - wp) as usize] {
                        let n = p.add(q);
                        let t = &fac * gq;
                        *acc.entry(n).or_insert_with(Rat::zero) += t;
                    }
                }
            }
            let dd = rat_int(d as i64);
            glevels[d as usize] = acc
                .into_iter()
                .filter_map(|(e, c)| {
                    let v = c / &dd;
                    if v.is_zero() {
                        None
                    } else {
                        Some((e, v))
                    }
                })
                .collect();
        }
        let mut coeffs = BTreeMap::new();
        for level in glevels {
            for (e, c) in level {
                coeffs.insert(e, c);
            }
        }
        Ok(TruncatedSeries {
            vars: self.vars.clone(),
            cutoff: self.cutoff,
            coeffs,
        })
    }

    /// Reinterprets the series at an arbitrary cutoff: terms beyond the new
    /// cutoff are dropped, terms within are kept verbatim.  Raising the
    /// cutoff is only meaningful for values known to be genuine polynomials,
    /// e.g. stabilized truncations.
    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        let w = &self.vars.weights;
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| e.weighted_degree(w) <= cutoff)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        TruncatedSeries {
            vars: self.vars.clone(),
            cutoff,
            coeffs,
        }
    }

    /// The image under truncation to a smaller cutoff.
    pub fn truncate(&self, cutoff: u32) -> Self {
        let w = &self.vars.weights;
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| e.weighted_degree(w) <= cutoff)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        TruncatedSeries {
            vars: self.vars.clone(),
            cutoff: cutoff.min(self.cutoff),
            coeffs,
        }
    }

    /// Projection that sets the variables with `keep[v] == false` to zero,
    /// leaving the variable set unchanged.
    pub fn project(&self, keep: &[bool]) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(e, _)| e.0.iter().zip(keep).all(|(&x, &k)| k || x == 0))
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        TruncatedSeries {
            vars: self.vars.clone(),
            cutoff: self.cutoff,
            coeffs,
        }
    }

    /// Substitutes variable `v` by `y_{assign[v].0}` raised to `assign[v].1`.
    ///
    /// Faithfulness requires that each source variable carries exactly its
    /// substitution degree as weight, so that the weighted source truncation
    /// realizes the target ideal.
    pub fn specialize(
        &self,
        assign: &[(usize, u32)],
        y_vars: &Arc<VarSet>,
        y_cutoff: u32,
    ) -> Result<TruncatedSeries, SeriesError> {
        if assign.len() != self.vars.len() {
            return Err(SeriesError::VariableMismatch);
        }
        for (v, &(a, m)) in assign.iter().enumerate() {
            if self.vars.weights[v] != m || a >= y_vars.len() {
                return Err(SeriesError::WeightMismatch);
            }
        }
        if self.cutoff < y_cutoff {
            return Err(SeriesError::InsufficientCutoff {
                src: self.cutoff,
                dst: y_cutoff,
            });
        }
        let mut out = TruncatedSeries::zero(y_vars.clone(), y_cutoff);
        for (e, c) in &self.coeffs {
            let mut m = vec![0u32; y_vars.len()];
            for (v, &x) in e.0.iter().enumerate() {
                let (a, mult) = assign[v];
                m[a] += mult * x;
            }
            let me = Expo(m);
            if me.weighted_degree(&y_vars.weights) > y_cutoff {
                continue;
            }
            use std::collections::btree_map::Entry;
            match out.coeffs.entry(me) {
                Entry::Vacant(v) => {
                    v.insert(c.clone());
                }
                Entry::Occupied(mut o) => {
                    let sum = o.get() + c;
                    if sum.is_zero() {
                        o.remove();
                    } else {
                        *o.get_mut() = sum;
                    }
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms_weighted_order() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if e.is_zero() {
                write!(f, "{c}")?;
            } else {
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
                    if x > 1 {
                        write!(f, "^{x}")?;
                    }
                }
            }
        }
        Ok(())
    }
}
