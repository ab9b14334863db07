//! Solvers for finite, truncated-infinite and specialized Q-systems.
//!
//! A Q-system is the family of equations
//!
//! ```text
//!   ∏_j Q_j^(D_ij) + w_i·∏_j Q_j^(G_ij) = 1        (i ∈ H)
//! ```
//!
//! for unit-constant-term power series `Q_i`.  The standard case `D = I` has
//! a unique solution obtained by degree-graded fixed-point iteration; the
//! general case reduces to the standard one for `G' = G·D⁻¹` through
//! `Q_i = ∏_j (Q'_j)^((D⁻¹)_ij)`, which for truncated windows of infinite
//! systems is precisely the canonical solution.
//!
//! Infinite index sets are represented by their `H_L` windows.  Specialized
//! systems carry pair indices `(a, m)` and live in the variables `y_a` after
//! the substitution `w_m^(a) = y_a^m`; truncation is then modulo the ideal
//! generated by `y_a^(cutoff+1)`.

use std::sync::Arc;

use num::{One, Zero};
use thiserror::Error;

use crate::linalg::{self, Mat};
use crate::rat::{rat, rat_int, Rat};
use crate::series::{Expo, SeriesError, TruncatedSeries, VarSet};

#[derive(Debug, Error)]
pub enum QsolveError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("matrix D is not invertible")]
    SingularD,
    #[error("matrix dimensions do not match the index set")]
    ShapeMismatch,
    #[error("unsupported D shape for a truncated infinite system")]
    UnsupportedDShape,
    #[error("spec kind does not match the requested solver")]
    KindMismatch,
    #[error("index window L = {level} is smaller than the cutoff {cutoff}")]
    WindowTooSmall { level: usize, cutoff: u32 },
    #[error("family index range is too small for window L = {0}")]
    InsufficientIndexRange(usize),
    #[error("index not present in the system")]
    UnknownIndex,
    #[error("inconsistent system data: {0}")]
    Inconsistent(String),
}

/// Index into a Q-system: a plain site `i`, or a pair `(a, m)` for
/// specialized systems and their unspecialized windows.  Both are 1-based.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum SysIndex {
    Plain(usize),
    Pair { node: usize, level: usize },
}

impl SysIndex {
    /// Weight of the attached monomial: `w_i` has weight 1, `w_m^(a)` has
    /// weight `m`, so that truncation commutes with specialization.
    pub fn weight(&self) -> u32 {
        match self {
            SysIndex::Plain(_) => 1,
            SysIndex::Pair { level, .. } => *level as u32,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SysIndex::Plain(i) => format!("{i}"),
            SysIndex::Pair { node, level } => format!("({node},{level})"),
        }
    }

    pub fn var_name(&self) -> String {
        match self {
            SysIndex::Plain(i) => format!("w{i}"),
            SysIndex::Pair { node, level } => format!("w({node},{level})"),
        }
    }

    pub fn parse(s: &str) -> Option<SysIndex> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            let mut parts = inner.splitn(2, ',');
            let node = parts.next()?.trim().parse().ok()?;
            let level = parts.next()?.trim().parse().ok()?;
            if node == 0 || level == 0 {
                return None;
            }
            Some(SysIndex::Pair { node, level })
        } else {
            let i: usize = s.parse().ok()?;
            if i == 0 {
                return None;
            }
            Some(SysIndex::Plain(i))
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SystemKind {
    Standard,
    FiniteGeneral,
    InfiniteTruncated,
    Specialized,
}

impl SystemKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            SystemKind::Standard => "standard",
            SystemKind::FiniteGeneral => "finite-general",
            SystemKind::InfiniteTruncated => "infinite-truncated",
            SystemKind::Specialized => "specialized",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "standard" => Some(SystemKind::Standard),
            "finite-general" => Some(SystemKind::FiniteGeneral),
            "infinite-truncated" => Some(SystemKind::InfiniteTruncated),
            "specialized" => Some(SystemKind::Specialized),
            _ => None,
        }
    }
}

/// Closed-form matrix data of a Q-system of KR type, derived from a Cartan
/// matrix `A`, symmetrizers `d`, the node factors `ε` and the twist order.
/// Rows and columns can be evaluated at any level, beyond a finite window.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KrRule {
    pub cartan: Vec<Vec<i64>>,
    pub sym: Vec<i64>,
    pub eps: Vec<i64>,
    pub twist: usize,
}

impl KrRule {
    pub fn rank(&self) -> usize {
        self.cartan.len()
    }

    /// `g_ab = A_ba / ε_b`.
    pub fn g_small(&self, a: usize, b: usize) -> Rat {
        rat(self.cartan[b][a], self.eps[b])
    }

    /// Entry `G_(am),(bk)` of the exponent matrix of the recursion.
    pub fn g_entry(&self, a: usize, m: usize, b: usize, k: usize) -> Rat {
        let a_ba = self.cartan[b][a];
        let a_ab = self.cartan[a][b];
        if self.twist > 1 {
            return if m == k {
                rat(-a_ba, self.eps[b])
            } else {
                Rat::zero()
            };
        }
        let da = self.sym[a] as usize;
        let db = self.sym[b] as usize;
        if db == 2 * da {
            let c = if m + 1 == 2 * k {
                1
            } else if m == 2 * k {
                2
            } else if m == 2 * k + 1 {
                1
            } else {
                0
            };
            rat_int(-a_ba * c)
        } else if db == 3 * da {
            let c = if m + 2 == 3 * k {
                1
            } else if m + 1 == 3 * k {
                2
            } else if m == 3 * k {
                3
            } else if m == 3 * k + 1 {
                2
            } else if m == 3 * k + 2 {
                1
            } else {
                0
            };
            rat_int(-a_ba * c)
        } else if da * m == db * k {
            rat_int(-a_ab)
        } else {
            Rat::zero()
        }
    }

    /// Entry `G'_(am),(bk) = (G·D⁻¹)_(am),(bk)` of the infinite system.
    pub fn g_prime_entry(&self, a: usize, m: usize, b: usize, k: usize) -> Rat {
        let a_ba = self.cartan[b][a];
        if self.twist > 1 {
            rat(a_ba * m.min(k) as i64, self.eps[b])
        } else {
            let da = self.sym[a];
            let db = self.sym[b];
            // d_b·A_ba·min(m/d_b, k/d_a) = A_ba·min(m·d_a, k·d_b)/d_a
            let min = (m as i64 * da).min(k as i64 * db);
            rat(a_ba * min, da)
        }
    }
}

/// A Q-system: index set, the exponent matrices `D`, `G`, a certified
/// `D⁻¹` and the cached `G' = G·D⁻¹`.
#[derive(Clone, PartialEq, Debug)]
pub struct QSystemSpec {
    pub kind: SystemKind,
    pub indices: Vec<SysIndex>,
    pub d: Mat,
    pub d_inv: Mat,
    pub g: Mat,
    pub g_prime: Mat,
    /// Number of `y` variables for specialized systems, 0 otherwise.
    pub rank: usize,
    /// Closed-form row data when the system is a KR-type window.
    pub kr_rule: Option<KrRule>,
    tridiag: bool,
}

impl QSystemSpec {
    fn check_square(indices: &[SysIndex], mats: &[&Mat]) -> Result<(), QsolveError> {
        let n = indices.len();
        for m in mats {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(QsolveError::ShapeMismatch);
            }
        }
        Ok(())
    }

    /// Standard system `D = I`.
    pub fn standard(indices: Vec<SysIndex>, g: Mat) -> Result<Self, QsolveError> {
        Self::check_square(&indices, &[&g])?;
        let n = indices.len();
        Ok(QSystemSpec {
            kind: SystemKind::Standard,
            indices,
            d: linalg::identity(n),
            d_inv: linalg::identity(n),
            g_prime: g.clone(),
            g,
            rank: 0,
            kr_rule: None,
            tridiag: false,
        })
    }

    /// Finite general system; `D` is inverted exactly.
    pub fn finite(indices: Vec<SysIndex>, d: Mat, g: Mat) -> Result<Self, QsolveError> {
        Self::check_square(&indices, &[&d, &g])?;
        if linalg::is_identity(&d) {
            let mut s = Self::standard(indices, g)?;
            s.d = d;
            return Ok(s);
        }
        let d_inv = linalg::invert(&d).ok_or(QsolveError::SingularD)?;
        let g_prime = linalg::mat_mul(&g, &d_inv);
        Ok(QSystemSpec {
            kind: SystemKind::FiniteGeneral,
            indices,
            d,
            d_inv,
            g,
            g_prime,
            rank: 0,
            kr_rule: None,
            tridiag: false,
        })
    }

    /// `H_L` window of an infinite system over plain indices `1..=L`.
    ///
    /// `D` must be the identity or the second-difference pattern
    /// `D_ij = −2δ_ij + δ_(i,j−1) + δ_(i,j+1)`, whose infinite inverse is
    /// `(D⁻¹)_ij = −min(i,j)`; other shapes are rejected rather than
    /// approximated.
    pub fn infinite_truncated(indices: Vec<SysIndex>, d: Mat, g: Mat) -> Result<Self, QsolveError> {
        Self::check_square(&indices, &[&d, &g])?;
        if indices.iter().any(|i| !matches!(i, SysIndex::Plain(_))) {
            return Err(QsolveError::Inconsistent(
                "infinite-truncated systems use plain indices".into(),
            ));
        }
        let n = indices.len();
        let (d_inv, tridiag) = if linalg::is_identity(&d) {
            (linalg::identity(n), false)
        } else if is_second_difference_block(&d) {
            (neg_min_matrix(n), true)
        } else {
            return Err(QsolveError::UnsupportedDShape);
        };
        let g_prime = linalg::mat_mul(&g, &d_inv);
        Ok(QSystemSpec {
            kind: SystemKind::InfiniteTruncated,
            indices,
            d,
            d_inv,
            g,
            g_prime,
            rank: 0,
            kr_rule: None,
            tridiag,
        })
    }

    /// KR-type specialized system on the window `m ≤ level`, built from the
    /// closed-form matrices of the rule.
    pub fn kr(rule: KrRule, level: usize) -> Self {
        let n = rule.rank();
        let indices: Vec<SysIndex> = (1..=n)
            .flat_map(|node| (1..=level).map(move |lev| SysIndex::Pair { node, level: lev }))
            .collect();
        let size = indices.len();
        let mut d = vec![vec![rat_int(0); size]; size];
        let mut d_inv = vec![vec![rat_int(0); size]; size];
        let mut g = vec![vec![rat_int(0); size]; size];
        let mut g_prime = vec![vec![rat_int(0); size]; size];
        for (i, &ia) in indices.iter().enumerate() {
            let (a, m) = match ia {
                SysIndex::Pair { node, level } => (node - 1, level),
                _ => unreachable!(),
            };
            for (j, &jb) in indices.iter().enumerate() {
                let (b, k) = match jb {
                    SysIndex::Pair { node, level } => (node - 1, level),
                    _ => unreachable!(),
                };
                if a == b {
                    if m == k {
                        d[i][j] = rat_int(-2);
                    } else if m == k + 1 || m + 1 == k {
                        d[i][j] = rat_int(1);
                    }
                    d_inv[i][j] = rat_int(-(m.min(k) as i64));
                }
                g[i][j] = rule.g_entry(a, m, b, k);
                g_prime[i][j] = rule.g_prime_entry(a, m, b, k);
            }
        }
        QSystemSpec {
            kind: SystemKind::Specialized,
            indices,
            d,
            d_inv,
            g,
            g_prime,
            rank: n,
            kr_rule: Some(rule),
            tridiag: true,
        }
    }

    /// Specialized system from explicit window matrices, e.g. parsed from a
    /// spec file.  `D` must be blockwise identity or the KR second
    /// difference; `G'` is the window product `G·D⁻¹`.
    pub fn specialized_from_parts(
        indices: Vec<SysIndex>,
        d: Mat,
        g: Mat,
    ) -> Result<Self, QsolveError> {
        Self::check_square(&indices, &[&d, &g])?;
        let mut rank = 0usize;
        let mut level = 0usize;
        for idx in &indices {
            match idx {
                SysIndex::Pair { node, level: m } => {
                    rank = rank.max(*node);
                    level = level.max(*m);
                }
                _ => {
                    return Err(QsolveError::Inconsistent(
                        "specialized systems use pair indices".into(),
                    ))
                }
            }
        }
        let expected: Vec<SysIndex> = (1..=rank)
            .flat_map(|node| (1..=level).map(move |lev| SysIndex::Pair { node, level: lev }))
            .collect();
        if indices != expected {
            return Err(QsolveError::Inconsistent(
                "specialized index window must be {1..n}×{1..L} in (a,m) order".into(),
            ));
        }
        let n = indices.len();
        let (d_inv, tridiag) = if linalg::is_identity(&d) {
            (linalg::identity(n), false)
        } else if is_block_second_difference(&indices, &d, rank, level) {
            let mut inv = vec![vec![rat_int(0); n]; n];
            for (i, &ia) in indices.iter().enumerate() {
                for (j, &jb) in indices.iter().enumerate() {
                    if let (
                        SysIndex::Pair { node: na, level: m },
                        SysIndex::Pair { node: nb, level: k },
                    ) = (ia, jb)
                    {
                        if na == nb {
                            inv[i][j] = rat_int(-(m.min(k) as i64));
                        }
                    }
                }
            }
            (inv, true)
        } else {
            return Err(QsolveError::UnsupportedDShape);
        };
        let g_prime = linalg::mat_mul(&g, &d_inv);
        Ok(QSystemSpec {
            kind: SystemKind::Specialized,
            indices,
            d,
            d_inv,
            g,
            g_prime,
            rank,
            kr_rule: None,
            tridiag,
        })
    }

    pub fn size(&self) -> usize {
        self.indices.len()
    }

    /// Largest level of a pair-indexed window, or the largest plain index.
    pub fn level(&self) -> usize {
        self.indices
            .iter()
            .map(|i| match i {
                SysIndex::Plain(i) => *i,
                SysIndex::Pair { level, .. } => *level,
            })
            .max()
            .unwrap_or(0)
    }

    pub fn position(&self, idx: &SysIndex) -> Option<usize> {
        self.indices.iter().position(|i| i == idx)
    }

    pub fn is_tridiagonal(&self) -> bool {
        self.tridiag
    }

    /// Positions grouped into node blocks, each sorted by level.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        match self.indices.first() {
            Some(SysIndex::Pair { .. }) => {
                let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); self.rank.max(1)];
                for (pos, idx) in self.indices.iter().enumerate() {
                    if let SysIndex::Pair { node, .. } = idx {
                        blocks[node - 1].push(pos);
                    }
                }
                blocks
            }
            _ => vec![(0..self.indices.len()).collect()],
        }
    }

    /// Variable set of the untransformed (`w`) picture.
    pub fn w_vars(&self) -> Arc<VarSet> {
        let names = self.indices.iter().map(|i| i.var_name()).collect();
        let weights = self.indices.iter().map(|i| i.weight()).collect();
        VarSet::weighted(names, weights)
    }

    /// Variable set the solution family lives in.
    pub fn family_vars(&self) -> Arc<VarSet> {
        if self.kind == SystemKind::Specialized {
            VarSet::y_vars(self.rank)
        } else {
            self.w_vars()
        }
    }

    /// Monomial attached to row `pos`: `w_i`, or `y_a^m` when specialized.
    pub fn monomial(&self, vars: &Arc<VarSet>, cutoff: u32, pos: usize) -> TruncatedSeries {
        let expo = if self.kind == SystemKind::Specialized {
            match self.indices[pos] {
                SysIndex::Pair { node, level } => {
                    Expo::unit(vars.len(), node - 1, level as u32)
                }
                _ => unreachable!(),
            }
        } else {
            Expo::unit(vars.len(), pos, 1)
        };
        TruncatedSeries::monomial(vars.clone(), cutoff, expo, rat_int(1))
            .unwrap_or_else(|_| TruncatedSeries::zero(vars.clone(), cutoff))
    }

    /// Consistency of the stored matrices: exact inverse and `G' = G·D⁻¹`
    /// for finite kinds, window-interior identities for truncated ones.
    pub fn validate(&self) -> Result<(), QsolveError> {
        match self.kind {
            SystemKind::Standard => {
                if !linalg::is_identity(&self.d) {
                    return Err(QsolveError::Inconsistent("standard kind requires D = I".into()));
                }
            }
            SystemKind::FiniteGeneral => {
                if !linalg::is_identity(&linalg::mat_mul(&self.d, &self.d_inv)) {
                    return Err(QsolveError::Inconsistent("D·D⁻¹ ≠ I".into()));
                }
                if self.g_prime != linalg::mat_mul(&self.g, &self.d_inv) {
                    return Err(QsolveError::Inconsistent("G' ≠ G·D⁻¹".into()));
                }
            }
            SystemKind::InfiniteTruncated | SystemKind::Specialized => {
                // rows whose infinite support lies inside the window
                let prod = linalg::mat_mul(&self.d, &self.d_inv);
                let level = self.level();
                for (i, idx) in self.indices.iter().enumerate() {
                    let interior = match idx {
                        SysIndex::Plain(m) => !self.tridiag || *m < level,
                        SysIndex::Pair { level: m, .. } => !self.tridiag || *m < level,
                    };
                    if !interior {
                        continue;
                    }
                    for (j, x) in prod[i].iter().enumerate() {
                        let want = if i == j { Rat::one() } else { Rat::zero() };
                        if *x != want {
                            return Err(QsolveError::Inconsistent(format!(
                                "window D·D⁻¹ differs from identity at row {}",
                                self.indices[i].label()
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn is_second_difference_block(d: &Mat) -> bool {
    let n = d.len();
    (0..n).all(|i| {
        (0..n).all(|j| {
            let want = if i == j {
                rat_int(-2)
            } else if i + 1 == j || j + 1 == i {
                rat_int(1)
            } else {
                rat_int(0)
            };
            d[i][j] == want
        })
    })
}

fn is_block_second_difference(indices: &[SysIndex], d: &Mat, _rank: usize, _level: usize) -> bool {
    for (i, &ia) in indices.iter().enumerate() {
        for (j, &jb) in indices.iter().enumerate() {
            let want = match (ia, jb) {
                (
                    SysIndex::Pair { node: na, level: m },
                    SysIndex::Pair { node: nb, level: k },
                ) if na == nb => {
                    if m == k {
                        rat_int(-2)
                    } else if m == k + 1 || m + 1 == k {
                        rat_int(1)
                    } else {
                        rat_int(0)
                    }
                }
                _ => rat_int(0),
            };
            if d[i][j] != want {
                return false;
            }
        }
    }
    true
}

fn neg_min_matrix(n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| rat_int(-((i.min(j) + 1) as i64)))
                .collect()
        })
        .collect()
}

/// A family of unit-constant-term series solving (or claimed to solve) a
/// Q-system; immutable once constructed.
#[derive(Clone, PartialEq, Debug)]
pub struct SolutionFamily {
    pub spec: Arc<QSystemSpec>,
    pub cutoff: u32,
    pub members: Vec<TruncatedSeries>,
}

impl SolutionFamily {
    pub fn member(&self, idx: &SysIndex) -> Option<&TruncatedSeries> {
        self.spec.position(idx).map(|p| &self.members[p])
    }

    pub fn vars(&self) -> Arc<VarSet> {
        self.spec.family_vars()
    }
}

/// First discrepancy witnessing a failed check.
#[derive(Clone, PartialEq, Debug)]
pub struct Discrepancy {
    pub index: SysIndex,
    pub exponent: Expo,
    pub lhs: Rat,
    pub rhs: Rat,
}

fn first_nonzero(series: &TruncatedSeries, index: SysIndex) -> Option<Discrepancy> {
    series.terms().next().map(|(e, c)| Discrepancy {
        index,
        exponent: e.clone(),
        lhs: c.clone(),
        rhs: Rat::zero(),
    })
}

fn first_difference(
    lhs: &TruncatedSeries,
    rhs: &TruncatedSeries,
    index: SysIndex,
) -> Result<Option<Discrepancy>, QsolveError> {
    let diff = lhs.sub(rhs)?;
    let first = diff.terms().next().map(|(e, _)| e.clone());
    Ok(first.map(|e| Discrepancy {
        index,
        lhs: lhs.coeff(&e),
        rhs: rhs.coeff(&e),
        exponent: e,
    }))
}

/// `∏_j Q_j^(c_j)` computed through one exp of a log combination.
fn power_product(
    logs: &[TruncatedSeries],
    coeffs: impl Iterator<Item = (usize, Rat)>,
    vars: &Arc<VarSet>,
    cutoff: u32,
) -> Result<TruncatedSeries, QsolveError> {
    let mut acc = TruncatedSeries::zero(vars.clone(), cutoff);
    for (j, c) in coeffs {
        if c.is_zero() {
            continue;
        }
        acc = acc.add(&logs[j].scale(&c))?;
    }
    Ok(acc.exp()?)
}

/// Unique solution of the standard system `Q_i + mono_i·∏_j Q_j^(G_ij) = 1`
/// by full-sweep fixed-point iteration; each sweep is a pure function of the
/// previous iterate and gains at least one weighted degree of agreement.
fn solve_standard_system(
    g: &Mat,
    monos: &[TruncatedSeries],
    vars: &Arc<VarSet>,
    cutoff: u32,
) -> Result<Vec<TruncatedSeries>, QsolveError> {
    let n = monos.len();
    let one = TruncatedSeries::one(vars.clone(), cutoff);
    let mut q = vec![one.clone(); n];
    for _sweep in 0..=cutoff {
        let logs: Vec<TruncatedSeries> = q
            .iter()
            .map(|s| s.log())
            .collect::<Result<_, _>>()?;
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let prod = power_product(
                &logs,
                g[i].iter().cloned().enumerate(),
                vars,
                cutoff,
            )?;
            next.push(one.sub(&monos[i].mul(&prod)?)?);
        }
        let done = next == q;
        q = next;
        if done {
            break;
        }
    }
    Ok(q)
}

/// Solves a standard system (`D = I`), finite or a truncated-infinite window.
pub fn solve_standard(spec: &Arc<QSystemSpec>, cutoff: u32) -> Result<SolutionFamily, QsolveError> {
    if !linalg::is_identity(&spec.d) {
        return Err(QsolveError::KindMismatch);
    }
    let vars = spec.family_vars();
    let monos: Vec<TruncatedSeries> = (0..spec.size())
        .map(|i| spec.monomial(&vars, cutoff, i))
        .collect();
    let members = solve_standard_system(&spec.g, &monos, &vars, cutoff)?;
    Ok(SolutionFamily {
        spec: spec.clone(),
        cutoff,
        members,
    })
}

/// Solves a general system through the standard `G'` system and the
/// `D⁻¹`-powers; for truncated windows of infinite systems this is the
/// canonical solution.
pub fn solve_general(spec: &Arc<QSystemSpec>, cutoff: u32) -> Result<SolutionFamily, QsolveError> {
    if spec.kind == SystemKind::Specialized {
        return solve_specialized(spec, cutoff);
    }
    let vars = spec.family_vars();
    let monos: Vec<TruncatedSeries> = (0..spec.size())
        .map(|i| spec.monomial(&vars, cutoff, i))
        .collect();
    let q_std = solve_standard_system(&spec.g_prime, &monos, &vars, cutoff)?;
    if linalg::is_identity(&spec.d_inv) {
        return Ok(SolutionFamily {
            spec: spec.clone(),
            cutoff,
            members: q_std,
        });
    }
    let logs: Vec<TruncatedSeries> = q_std
        .iter()
        .map(|s| s.log())
        .collect::<Result<_, _>>()?;
    let members = (0..spec.size())
        .map(|i| {
            power_product(
                &logs,
                spec.d_inv[i].iter().cloned().enumerate(),
                &vars,
                cutoff,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SolutionFamily {
        spec: spec.clone(),
        cutoff,
        members,
    })
}

/// Canonical solution of a specialized system modulo `J_cutoff`.
///
/// Requires the window level `L ≥ cutoff`: levels `m ≤ cutoff` all influence
/// `y`-degrees up to the cutoff, while `m > L` cannot.
pub fn solve_specialized(
    spec: &Arc<QSystemSpec>,
    cutoff: u32,
) -> Result<SolutionFamily, QsolveError> {
    if spec.kind != SystemKind::Specialized {
        return Err(QsolveError::KindMismatch);
    }
    let level = spec.level();
    if (level as u32) < cutoff {
        return Err(QsolveError::WindowTooSmall { level, cutoff });
    }
    let vars = spec.family_vars();
    let monos: Vec<TruncatedSeries> = (0..spec.size())
        .map(|i| spec.monomial(&vars, cutoff, i))
        .collect();
    let q_std = solve_standard_system(&spec.g_prime, &monos, &vars, cutoff)?;
    if linalg::is_identity(&spec.d_inv) {
        return Ok(SolutionFamily {
            spec: spec.clone(),
            cutoff,
            members: q_std,
        });
    }
    let logs: Vec<TruncatedSeries> = q_std
        .iter()
        .map(|s| s.log())
        .collect::<Result<_, _>>()?;
    let members = (0..spec.size())
        .map(|i| {
            power_product(
                &logs,
                spec.d_inv[i].iter().cloned().enumerate(),
                &vars,
                cutoff,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SolutionFamily {
        spec: spec.clone(),
        cutoff,
        members,
    })
}

/// Dispatches on the spec kind.
pub fn solve(spec: &Arc<QSystemSpec>, cutoff: u32) -> Result<SolutionFamily, QsolveError> {
    match spec.kind {
        SystemKind::Standard => solve_standard(spec, cutoff),
        SystemKind::Specialized => solve_specialized(spec, cutoff),
        _ => solve_general(spec, cutoff),
    }
}

/// `∏_i Q_i^(ν_i)` over a finitely supported `ν`.
pub fn power_combination(
    sol: &SolutionFamily,
    nu: &[(SysIndex, Rat)],
) -> Result<TruncatedSeries, QsolveError> {
    let vars = sol.vars();
    let mut acc = TruncatedSeries::zero(vars.clone(), sol.cutoff);
    for (idx, c) in nu {
        if c.is_zero() {
            continue;
        }
        let pos = sol.spec.position(idx).ok_or(QsolveError::UnknownIndex)?;
        acc = acc.add(&sol.members[pos].log()?.scale(c))?;
    }
    Ok(acc.exp()?)
}

/// Evaluates the defining equations on a family; `None` means every row
/// vanishes identically within the cutoff.
///
/// Rows of truncated windows reference indices beyond the window edge: the
/// second-difference `D` row at `m = L` needs level `L+1`, and KR-rule `G`
/// rows reach up to `3m+2`.  Those factors are clamped to the window edge
/// `(b, L)`, which is exact modulo `J_L` for canonical solutions by the
/// convergence property and turns the boundary row into a canonicality test.
pub fn check_residual(sol: &SolutionFamily) -> Result<Option<Discrepancy>, QsolveError> {
    let spec = &sol.spec;
    let vars = sol.vars();
    let cutoff = sol.cutoff;
    let one = TruncatedSeries::one(vars.clone(), cutoff);
    let logs: Vec<TruncatedSeries> = sol
        .members
        .iter()
        .map(|s| s.log())
        .collect::<Result<_, _>>()?;
    let blocks = spec.blocks();
    let level = spec.level();

    for (i, idx) in spec.indices.iter().enumerate() {
        // D-side product with the boundary clamp for tridiagonal windows
        let mut d_acc = TruncatedSeries::zero(vars.clone(), cutoff);
        for (j, c) in spec.d[i].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            d_acc = d_acc.add(&logs[j].scale(c))?;
        }
        if spec.tridiag {
            let at_edge = match idx {
                SysIndex::Plain(m) => *m == level,
                SysIndex::Pair { level: m, .. } => *m == level,
            };
            if at_edge {
                let block = blocks
                    .iter()
                    .find(|b| b.contains(&i))
                    .expect("index belongs to a block");
                let last = *block.last().unwrap();
                d_acc = d_acc.add(&logs[last])?;
            }
        }
        let d_fac = d_acc.exp()?;

        // G-side product, extended beyond the window by the KR rule
        let mut g_acc = TruncatedSeries::zero(vars.clone(), cutoff);
        for (j, c) in spec.g[i].iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            g_acc = g_acc.add(&logs[j].scale(c))?;
        }
        if let (Some(rule), SysIndex::Pair { node, level: m }) = (&spec.kr_rule, idx) {
            let a = node - 1;
            for b in 0..rule.rank() {
                for k in level + 1..=3 * m + 2 {
                    let c = rule.g_entry(a, *m, b, k);
                    if c.is_zero() {
                        continue;
                    }
                    let edge = spec
                        .position(&SysIndex::Pair { node: b + 1, level })
                        .expect("window edge present");
                    g_acc = g_acc.add(&logs[edge].scale(&c))?;
                }
            }
        }
        let g_fac = g_acc.exp()?;

        let mono = spec.monomial(&vars, cutoff, i);
        let residual = d_fac.add(&mono.mul(&g_fac)?)?.sub(&one)?;
        if let Some(d) = first_nonzero(&residual, *idx) {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Convergence property at window `L`: `Q_m^(a) ≡ Q_L^(a) mod J_L` for all
/// `m > L` present in the family (with `Q_0 = 1` when `L = 0`).
pub fn check_convergence_property(
    sol: &SolutionFamily,
    l: usize,
) -> Result<Option<Discrepancy>, QsolveError> {
    if sol.spec.kind != SystemKind::Specialized {
        return Err(QsolveError::KindMismatch);
    }
    if l as u32 > sol.cutoff {
        return Err(QsolveError::Series(SeriesError::InsufficientCutoff {
            src: sol.cutoff,
            dst: l as u32,
        }));
    }
    let max_level = sol.spec.level();
    if max_level < l + 1 {
        return Err(QsolveError::InsufficientIndexRange(l));
    }
    let vars = sol.vars();
    for a in 1..=sol.spec.rank {
        let reference = if l == 0 {
            TruncatedSeries::one(vars.clone(), sol.cutoff).truncate(0)
        } else {
            sol.member(&SysIndex::Pair { node: a, level: l })
                .ok_or(QsolveError::UnknownIndex)?
                .truncate(l as u32)
        };
        for m in l + 1..=max_level {
            let idx = SysIndex::Pair { node: a, level: m };
            let q = sol.member(&idx).ok_or(QsolveError::UnknownIndex)?;
            if let Some(d) = first_difference(&q.truncate(l as u32), &reference, idx)? {
                return Ok(Some(d));
            }
        }
    }
    Ok(None)
}

/// Inversion property via the finite-window double product for tridiagonal
/// `D` (checking `(Q_L/Q_(L+1))^min(i,L)`-type factors directly), and the
/// equivalent window-stabilization criterion for specialized KR systems.
/// Finite systems pass unconditionally: the double product is a finite
/// rearrangement there.
pub fn check_inversion_property(
    sol: &SolutionFamily,
    l: usize,
) -> Result<Option<Discrepancy>, QsolveError> {
    match sol.spec.kind {
        SystemKind::Standard | SystemKind::FiniteGeneral => return Ok(None),
        SystemKind::InfiniteTruncated | SystemKind::Specialized => {
            if !sol.spec.tridiag {
                if linalg::is_identity(&sol.spec.d) {
                    return Ok(None);
                }
                return Err(QsolveError::UnsupportedDShape);
            }
        }
    }
    if l < 1 || sol.spec.level() < l + 1 {
        return Err(QsolveError::InsufficientIndexRange(l));
    }
    let specialized = sol.spec.kind == SystemKind::Specialized;
    if specialized && l as u32 > sol.cutoff {
        return Err(QsolveError::Series(SeriesError::InsufficientCutoff {
            src: sol.cutoff,
            dst: l as u32,
        }));
    }

    // projection to the window: kill w-variables beyond l, or reduce mod J_l
    let proj = |s: &TruncatedSeries| -> TruncatedSeries {
        if specialized {
            s.truncate(l as u32)
        } else {
            let keep: Vec<bool> = sol
                .spec
                .indices
                .iter()
                .map(|idx| match idx {
                    SysIndex::Plain(i) => *i <= l,
                    SysIndex::Pair { level, .. } => *level <= l,
                })
                .collect();
            s.project(&keep)
        }
    };

    for block in sol.spec.blocks() {
        let level_of = |pos: usize| match sol.spec.indices[pos] {
            SysIndex::Plain(i) => i,
            SysIndex::Pair { level, .. } => level,
        };
        let at = |m: usize| -> Option<usize> { block.iter().copied().find(|&p| level_of(p) == m) };
        let p_l = at(l).ok_or(QsolveError::InsufficientIndexRange(l))?;
        let p_l1 = at(l + 1).ok_or(QsolveError::InsufficientIndexRange(l))?;
        let q_l = proj(&sol.members[p_l]);
        let q_l1 = proj(&sol.members[p_l1]);
        let unit = proj(&TruncatedSeries::one(sol.vars(), sol.cutoff));

        for &pos in &block {
            let i = level_of(pos);
            let idx = sol.spec.indices[pos];
            let min_il = i.min(l) as i64;
            let min_il1 = i.min(l + 1) as i64;
            let mut lhs = if i <= l {
                proj(&sol.members[pos])
            } else {
                unit.clone()
            };
            lhs = lhs.mul(&q_l1.powi(-min_il)?)?;
            lhs = lhs.mul(&q_l.powi(min_il1)?)?;
            let rhs = proj(&sol.members[pos]);
            if let Some(d) = first_difference(&lhs, &rhs, idx)? {
                return Ok(Some(d));
            }
        }

        // equivalent stabilization criterion for the specialized picture
        if specialized {
            for &pos in &block {
                let m = level_of(pos);
                if m > l {
                    let idx = sol.spec.indices[pos];
                    if let Some(d) =
                        first_difference(&proj(&sol.members[pos]), &q_l, idx)?
                    {
                        return Ok(Some(d));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// Second-difference window system over plain indices `1..=l` with `G = 0`;
/// its canonical solution is `Q_i = ∏_j (1−w_j)^(−min(i,j))`.
pub fn second_difference_spec_w(l: usize) -> QSystemSpec {
    let indices: Vec<SysIndex> = (1..=l).map(SysIndex::Plain).collect();
    let mut d = vec![vec![rat_int(0); l]; l];
    for (i, row) in d.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i == j {
                *x = rat_int(-2);
            } else if i + 1 == j || j + 1 == i {
                *x = rat_int(1);
            }
        }
    }
    let g = vec![vec![rat_int(0); l]; l];
    QSystemSpec::infinite_truncated(indices, d, g).expect("valid window")
}

/// Rank-1 specialized second-difference system on levels `1..=l`, `G = 0`.
pub fn second_difference_spec_y(l: usize) -> QSystemSpec {
    let indices: Vec<SysIndex> = (1..=l)
        .map(|level| SysIndex::Pair { node: 1, level })
        .collect();
    let n = l;
    let mut d = vec![vec![rat_int(0); n]; n];
    for (i, row) in d.iter_mut().enumerate() {
        for (j, x) in row.iter_mut().enumerate() {
            if i == j {
                *x = rat_int(-2);
            } else if i + 1 == j || j + 1 == i {
                *x = rat_int(1);
            }
        }
    }
    let g = vec![vec![rat_int(0); n]; n];
    QSystemSpec::specialized_from_parts(indices, d, g).expect("valid window")
}

/// The general solution family `Q_i = Q₁^i·∏_(j<i) (1−w_j)^(i−j)` of the
/// `w`-picture second-difference system, for an arbitrary unit-constant
/// `Q₁`.  Canonical exactly for `Q₁ = ∏_j (1−w_j)^(−1)`; other choices give
/// the checkers their true negatives.
pub fn second_difference_family_w(
    spec: &Arc<QSystemSpec>,
    q1: &TruncatedSeries,
    cutoff: u32,
) -> Result<SolutionFamily, QsolveError> {
    let vars = spec.family_vars();
    let l = spec.size();
    let one = TruncatedSeries::one(vars.clone(), cutoff);
    let log_q1 = q1.log()?;
    let factor_logs: Vec<TruncatedSeries> = (0..l)
        .map(|j| {
            one.sub(&spec.monomial(&vars, cutoff, j))
                .and_then(|s| s.log())
        })
        .collect::<Result<_, _>>()?;
    let mut members = Vec::with_capacity(l);
    for i in 1..=l {
        let mut acc = log_q1.scale(&rat_int(i as i64));
        for (j, fl) in factor_logs.iter().enumerate().take(i - 1) {
            acc = acc.add(&fl.scale(&rat_int((i - 1 - j) as i64)))?;
        }
        members.push(acc.exp()?);
    }
    Ok(SolutionFamily {
        spec: spec.clone(),
        cutoff,
        members,
    })
}

/// Specialized analogue of [`second_difference_family_w`]:
/// `Q_m = Q₁^m·∏_(j<m) (1−y^j)^(m−j)` over a single `y` variable.
pub fn second_difference_family_y(
    spec: &Arc<QSystemSpec>,
    q1: &TruncatedSeries,
    cutoff: u32,
) -> Result<SolutionFamily, QsolveError> {
    let vars = spec.family_vars();
    let l = spec.level();
    let one = TruncatedSeries::one(vars.clone(), cutoff);
    let log_q1 = q1.log()?;
    let factor_logs: Vec<TruncatedSeries> = (1..=l)
        .map(|j| {
            let mono = TruncatedSeries::monomial(
                vars.clone(),
                cutoff,
                Expo::unit(vars.len(), 0, j as u32),
                rat_int(1),
            )
            .unwrap_or_else(|_| TruncatedSeries::zero(vars.clone(), cutoff));
            one.sub(&mono).and_then(|s| s.log())
        })
        .collect::<Result<_, _>>()?;
    let mut members = Vec::with_capacity(l);
    for m in 1..=l {
        let mut acc = log_q1.scale(&rat_int(m as i64));
        for j in 1..m {
            acc = acc.add(&factor_logs[j - 1].scale(&rat_int((m - j) as i64)))?;
        }
        members.push(acc.exp()?);
    }
    Ok(SolutionFamily {
        spec: spec.clone(),
        cutoff,
        members,
    })
}
