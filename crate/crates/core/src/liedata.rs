//! Lie-theoretic data: Cartan matrices, symmetrizers, twisted-type tables,
//! positive roots, Weyl denominators and an independent character oracle.
//!
//! Conventions.  The Cartan matrix is stored as `A[a][b] = ⟨α_b, α_a^∨⟩`, so
//! the simple root expands as `α_a = Σ_b A[b][a]·Λ_b` in the fundamental
//! weights, and `⟨μ, α_a^∨⟩` is just the `a`-th coordinate of `μ` in the
//! `Λ`-basis.  The symmetrizers `d_a` are the coprime positive integers with
//! `d_a·A[a][b]` symmetric, and `(α_a, α_b) = d_a·A[a][b]`.

use std::collections::HashMap;
use std::sync::Arc;

use num::{One, Zero};
use thiserror::Error;

use crate::laurent::{LaurentPoly, SignedExpo};
use crate::qsolve::{KrRule, QSystemSpec};
use crate::rat::{rat_int, Rat};
use crate::series::{Expo, SeriesError, TruncatedSeries, VarSet};

#[derive(Debug, Error)]
pub enum LieError {
    #[error("unrecognized or unsupported algebra selector `{0}`")]
    BadSelector(String),
    #[error("weight is not dominant integral")]
    NonDominantWeight,
    #[error("character has fractional x-exponents for this weight")]
    FractionalXPower,
    #[error("identity requires rank n ≥ {0}")]
    RankTooSmall(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum BaseType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl BaseType {
    pub fn letter(&self) -> char {
        match self {
            BaseType::A => 'A',
            BaseType::B => 'B',
            BaseType::C => 'C',
            BaseType::D => 'D',
            BaseType::E => 'E',
            BaseType::F => 'F',
            BaseType::G => 'G',
        }
    }
}

/// Cartan matrix of the simple type `(t, n)` in the convention above.
pub fn cartan_matrix(t: BaseType, n: usize) -> Vec<Vec<i64>> {
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize, aij: i64, aji: i64| {
        a[i][j] = aij;
        a[j][i] = aji;
    };
    match t {
        BaseType::A => {
            for i in 0..n.saturating_sub(1) {
                link(i, i + 1, -1, -1);
            }
        }
        BaseType::B => {
            // chain with a short root at the end: A[n−1][n] = −1, A[n][n−1] = −2
            for i in 0..n.saturating_sub(2) {
                link(i, i + 1, -1, -1);
            }
            if n >= 2 {
                link(n - 2, n - 1, -1, -2);
            }
        }
        BaseType::C => {
            // transpose of B
            for i in 0..n.saturating_sub(2) {
                link(i, i + 1, -1, -1);
            }
            if n >= 2 {
                link(n - 2, n - 1, -2, -1);
            }
        }
        BaseType::D => {
            assert!(n >= 2, "D_n needs n ≥ 2");
            for i in 0..n.saturating_sub(3) {
                link(i, i + 1, -1, -1);
            }
            if n >= 3 {
                link(n - 3, n - 2, -1, -1);
                link(n - 3, n - 1, -1, -1);
            }
            // n = 2: two disconnected nodes
        }
        BaseType::E => {
            assert!((6..=8).contains(&n));
            // Bourbaki: chain 1-3-4-5-…-n with node 2 attached to 4
            link(0, 2, -1, -1);
            link(1, 3, -1, -1);
            for i in 2..n - 1 {
                link(i, i + 1, -1, -1);
            }
        }
        BaseType::F => {
            assert_eq!(n, 4);
            link(0, 1, -1, -1);
            link(1, 2, -1, -2);
            link(2, 3, -1, -1);
        }
        BaseType::G => {
            assert_eq!(n, 2);
            link(0, 1, -1, -3);
        }
    }
    a
}

/// Coprime positive integers with `d_a·A[a][b]` symmetric, computed by
/// propagating ratios along the Dynkin graph.
pub fn symmetrizers(a: &[Vec<i64>]) -> Vec<i64> {
    let n = a.len();
    let mut d: Vec<Option<Rat>> = vec![None; n];
    for start in 0..n {
        if d[start].is_some() {
            continue;
        }
        d[start] = Some(Rat::one());
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if i == j || a[i][j] == 0 || d[j].is_some() {
                    continue;
                }
                // d_j = d_i·A[i][j]/A[j][i]
                let dj = d[i].clone().unwrap() * rat_int(a[i][j]) / rat_int(a[j][i]);
                d[j] = Some(dj);
                stack.push(j);
            }
        }
    }
    let d: Vec<Rat> = d.into_iter().map(|x| x.unwrap()).collect();
    let mut lcm = num::BigInt::one();
    for x in &d {
        lcm = num::integer::lcm(lcm, x.denom().clone());
    }
    let ints: Vec<num::BigInt> = d.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let mut gcd = num::BigInt::zero();
    for x in &ints {
        gcd = num::integer::gcd(gcd, x.clone());
    }
    use num::ToPrimitive;
    ints.iter().map(|x| (x / &gcd).to_i64().unwrap()).collect()
}

/// All positive roots in simple-root coordinates, generated level by level
/// with the root-string criterion; nothing is hardcoded, so ranks are not
/// artificially capped.
pub fn positive_roots(a: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    let mut roots: Vec<Vec<i64>> = Vec::new();
    let mut seen: std::collections::HashSet<Vec<i64>> = std::collections::HashSet::new();
    let mut current: Vec<Vec<i64>> = Vec::new();
    for i in 0..n {
        let mut e = vec![0i64; n];
        e[i] = 1;
        seen.insert(e.clone());
        roots.push(e.clone());
        current.push(e);
    }
    while !current.is_empty() {
        let mut next = Vec::new();
        for beta in &current {
            for u in 0..n {
                // q = longest descent β − kα_u inside the root set
                let mut q = 0i64;
                loop {
                    let mut down = beta.clone();
                    down[u] -= q + 1;
                    if down[u] < 0 || !seen.contains(&down) {
                        break;
                    }
                    q += 1;
                }
                let pairing: i64 = (0..n).map(|b| a[u][b] * beta[b]).sum();
                if q - pairing >= 1 {
                    let mut up = beta.clone();
                    up[u] += 1;
                    if seen.insert(up.clone()) {
                        roots.push(up.clone());
                        next.push(up);
                    }
                }
            }
        }
        current = next;
    }
    roots.sort_by_key(|r| (r.iter().sum::<i64>(), r.clone()));
    roots
}

fn expected_root_count(t: BaseType, n: usize) -> usize {
    match t {
        BaseType::A => n * (n + 1) / 2,
        BaseType::B | BaseType::C => n * n,
        BaseType::D => n * (n - 1),
        BaseType::E => match n {
            6 => 36,
            7 => 63,
            _ => 120,
        },
        BaseType::F => 24,
        BaseType::G => 6,
    }
}

/// Derived data of a simple or twisted-affine type: the fixed-subalgebra
/// Cartan matrix, symmetrizers, node factors, roots and the exponent matrix
/// `g_ab = A_ba/ε_b` of the variable maps.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AlgebraData {
    pub selector: String,
    pub base_type: BaseType,
    pub base_rank: usize,
    pub twist: usize,
    pub g0_type: BaseType,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    pub sym: Vec<i64>,
    pub eps: Vec<i64>,
    pub positive_roots: Vec<Vec<i64>>,
    pub g_matrix: Vec<Vec<i64>>,
}

/// Parses selectors like `A1`, `B3`, `A4^2`, `D4^3`.
pub fn parse_selector(s: &str) -> Result<(BaseType, usize, usize), LieError> {
    let bad = || LieError::BadSelector(s.to_string());
    let s = s.trim();
    let mut chars = s.chars();
    let t = match chars.next().ok_or_else(bad)? {
        'A' | 'a' => BaseType::A,
        'B' | 'b' => BaseType::B,
        'C' | 'c' => BaseType::C,
        'D' | 'd' => BaseType::D,
        'E' | 'e' => BaseType::E,
        'F' | 'f' => BaseType::F,
        'G' | 'g' => BaseType::G,
        _ => return Err(bad()),
    };
    let rest: String = chars.collect();
    let (rank_str, twist) = match rest.split_once('^') {
        Some((r, t)) => (r, t.parse::<usize>().map_err(|_| bad())?),
        None => (rest.as_str(), 1),
    };
    let n = rank_str.parse::<usize>().map_err(|_| bad())?;
    Ok((t, n, twist))
}

/// Builds the algebra data for `(base_type, N, r)`.
pub fn algebra_parts(t: BaseType, n: usize, r: usize) -> Result<AlgebraData, LieError> {
    let selector = if r == 1 {
        format!("{}{}", t.letter(), n)
    } else {
        format!("{}{}^{}", t.letter(), n, r)
    };
    let bad = || LieError::BadSelector(selector.clone());
    let (g0_type, rank, eps): (BaseType, usize, Vec<i64>) = match (t, r) {
        (_, 1) => {
            let ok = match t {
                BaseType::A => n >= 1,
                BaseType::B | BaseType::C => n >= 1,
                BaseType::D => n >= 2,
                BaseType::E => (6..=8).contains(&n),
                BaseType::F => n == 4,
                BaseType::G => n == 2,
            };
            if !ok {
                return Err(bad());
            }
            (t, n, vec![1; n])
        }
        (BaseType::A, 2) if n >= 2 && n.is_multiple_of(2) => {
            // (A_2n, 2) → B_n with ε = 2 at the short node
            let m = n / 2;
            let mut eps = vec![1i64; m];
            eps[m - 1] = 2;
            (BaseType::B, m, eps)
        }
        (BaseType::A, 2) if n >= 3 && n % 2 == 1 => {
            let m = n.div_ceil(2);
            (BaseType::C, m, vec![1; m])
        }
        (BaseType::D, 2) if n >= 3 => (BaseType::B, n - 1, vec![1; n - 1]),
        (BaseType::E, 2) if n == 6 => (BaseType::F, 4, vec![1; 4]),
        (BaseType::D, 3) if n == 4 => (BaseType::G, 2, vec![1; 2]),
        _ => return Err(bad()),
    };
    let cartan = cartan_matrix(g0_type, rank);
    let sym = symmetrizers(&cartan);
    let roots = positive_roots(&cartan);
    assert_eq!(
        roots.len(),
        expected_root_count(g0_type, rank),
        "root generation for {selector}"
    );
    let mut g_matrix = vec![vec![0i64; rank]; rank];
    for (a, row) in g_matrix.iter_mut().enumerate() {
        for (b, x) in row.iter_mut().enumerate() {
            let num = cartan[b][a];
            assert!(
                num % eps[b] == 0,
                "g_ab must be integral for supported types"
            );
            *x = num / eps[b];
        }
    }
    Ok(AlgebraData {
        selector,
        base_type: t,
        base_rank: n,
        twist: r,
        g0_type,
        rank,
        cartan,
        sym,
        eps,
        positive_roots: roots,
        g_matrix,
    })
}

/// Algebra data from a selector string.
pub fn algebra(selector: &str) -> Result<AlgebraData, LieError> {
    let (t, n, r) = parse_selector(selector)?;
    algebra_parts(t, n, r)
}

impl AlgebraData {
    pub fn is_a2n_twisted(&self) -> bool {
        self.twist == 2 && self.base_type == BaseType::A && self.base_rank.is_multiple_of(2)
    }

    pub fn is_classical_untwisted(&self) -> bool {
        self.twist == 1
            && matches!(
                self.base_type,
                BaseType::A | BaseType::B | BaseType::C | BaseType::D
            )
    }

    pub fn is_type_a(&self) -> bool {
        self.twist == 1 && self.base_type == BaseType::A
    }

    pub fn has_exceptional_g0(&self) -> bool {
        matches!(self.g0_type, BaseType::E | BaseType::F | BaseType::G)
    }

    /// `α_a` in fundamental-weight coordinates.
    pub fn simple_root_weight_coords(&self, a: usize) -> Vec<i64> {
        (0..self.rank).map(|u| self.cartan[u][a]).collect()
    }

    pub fn is_dominant(&self, w: &[i64]) -> bool {
        w.iter().all(|&x| x >= 0)
    }

    /// `(Σ c1_a α_a, Σ c2_b α_b)` in the normalization `(α_a,α_b) = d_a A_ab`.
    fn bilin_rr(&self, c1: &[i64], c2: &[i64]) -> i64 {
        let mut s = 0;
        for (a, &x) in c1.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (b, &y) in c2.iter().enumerate() {
                if y == 0 {
                    continue;
                }
                s += x * y * self.sym[a] * self.cartan[a][b];
            }
        }
        s
    }

    /// Λ-coordinates of `λ − Σ c_a α_a`.
    fn weight_at(&self, lambda: &[i64], c: &[i64]) -> Vec<i64> {
        (0..self.rank)
            .map(|u| lambda[u] - (0..self.rank).map(|a| self.cartan[u][a] * c[a]).sum::<i64>())
            .collect()
    }

    fn reflect(&self, lambda: &[i64], c: &[i64], up: bool) -> Vec<i64> {
        let mut c = c.to_vec();
        for _ in 0..100_000 {
            let mu = self.weight_at(lambda, &c);
            let pick = mu
                .iter()
                .position(|&x| if up { x > 0 } else { x < 0 });
            match pick {
                Some(u) => c[u] += mu[u],
                None => return c,
            }
        }
        panic!("reflection loop failed to terminate");
    }

    /// KR matrices for the window `m ≤ level`; the tridiagonal `D`, its
    /// closed-form window inverse, and the exponent matrices `G`, `G'`.
    pub fn kr_matrices(&self, level: usize) -> QSystemSpec {
        QSystemSpec::kr(
            KrRule {
                cartan: self.cartan.clone(),
                sym: self.sym.clone(),
                eps: self.eps.clone(),
                twist: self.twist,
            },
            level,
        )
    }

    /// `∏_(α∈Δ₊) (1 − y^α)` as an exact polynomial.
    pub fn weyl_denominator(&self) -> TruncatedSeries {
        let degree: u32 = self
            .positive_roots
            .iter()
            .map(|r| r.iter().sum::<i64>() as u32)
            .sum();
        self.weyl_denominator_mod(degree.max(1))
    }

    /// The same product reduced modulo the cutoff ideal; large root systems
    /// stay cheap this way.
    pub fn weyl_denominator_mod(&self, cutoff: u32) -> TruncatedSeries {
        let y = VarSet::y_vars(self.rank);
        let mut out = TruncatedSeries::one(y.clone(), cutoff);
        for root in &self.positive_roots {
            let e = Expo(root.iter().map(|&x| x as u32).collect());
            let mono = TruncatedSeries::monomial(y.clone(), cutoff, e, rat_int(1))
                .unwrap_or_else(|_| TruncatedSeries::zero(y.clone(), cutoff));
            let factor = TruncatedSeries::one(y.clone(), cutoff).sub(&mono).unwrap();
            out = out.mul(&factor).unwrap();
        }
        out
    }
}

/// Weight multiplicities of the irreducible module `V(λ)`, computed by the
/// Freudenthal recursion over the dominant weights and extended to the full
/// weight system by Weyl-invariance.
pub struct WeightTable {
    pub lambda: Vec<i64>,
    /// componentwise bound on `λ − μ` in root coordinates
    pub box_max: Vec<i64>,
    dominant_mult: HashMap<Vec<i64>, i64>,
}

impl WeightTable {
    /// Multiplicity of `λ − Σ c_a α_a`.
    pub fn multiplicity(&self, alg: &AlgebraData, c: &[i64]) -> i64 {
        if c.iter().any(|&x| x < 0) {
            return 0;
        }
        let rep = alg.reflect(&self.lambda, c, false);
        if rep.iter().any(|&x| x < 0) {
            return 0;
        }
        self.dominant_mult.get(&rep).copied().unwrap_or(0)
    }

    pub fn dimension(&self, alg: &AlgebraData) -> i64 {
        let mut dim = 0;
        let mut c = vec![0i64; alg.rank];
        loop {
            dim += self.multiplicity(alg, &c);
            // odometer over the box
            let mut pos = 0;
            loop {
                if pos == alg.rank {
                    return dim;
                }
                c[pos] += 1;
                if c[pos] <= self.box_max[pos] {
                    break;
                }
                c[pos] = 0;
                pos += 1;
            }
        }
    }
}

/// Freudenthal multiplicity table for dominant integral `λ` (Λ-coordinates).
pub fn freudenthal(alg: &AlgebraData, lambda: &[i64]) -> Result<WeightTable, LieError> {
    if lambda.len() != alg.rank || lambda.iter().any(|&x| x < 0) {
        return Err(LieError::NonDominantWeight);
    }
    // box bound: c(λ − w₀λ), with w₀λ reached by reflecting to antidominant
    let box_max = alg.reflect(lambda, &vec![0; alg.rank], true);

    // all dominant lattice points λ − c·α inside the box, by height
    let mut candidates: Vec<(i64, Vec<i64>)> = Vec::new();
    let mut c = vec![0i64; alg.rank];
    'outer: loop {
        if alg.is_dominant(&alg.weight_at(lambda, &c)) {
            candidates.push((c.iter().sum(), c.clone()));
        }
        let mut pos = 0;
        loop {
            if pos == alg.rank {
                break 'outer;
            }
            c[pos] += 1;
            if c[pos] <= box_max[pos] {
                break;
            }
            c[pos] = 0;
            pos += 1;
        }
    }
    candidates.sort();

    let mut table = WeightTable {
        lambda: lambda.to_vec(),
        box_max,
        dominant_mult: HashMap::new(),
    };
    for (height, c) in candidates {
        if height == 0 {
            table.dominant_mult.insert(c, 1);
            continue;
        }
        // ((λ+ρ)² − (μ+ρ)²)·m_μ = 2·Σ_(α>0) Σ_(k≥1) m(μ+kα)·(μ+kα, α)
        let denom =
            2 * (0..alg.rank).map(|a| c[a] * alg.sym[a] * (lambda[a] + 1)).sum::<i64>()
                - alg.bilin_rr(&c, &c);
        let mut numer = 0i64;
        for root in &alg.positive_roots {
            let lam_dot: i64 = (0..alg.rank).map(|a| root[a] * alg.sym[a] * lambda[a]).sum();
            let c_dot = alg.bilin_rr(&c, root);
            let r_dot = alg.bilin_rr(root, root);
            let mut k = 1i64;
            loop {
                let c2: Vec<i64> = (0..alg.rank).map(|a| c[a] - k * root[a]).collect();
                if c2.iter().any(|&x| x < 0) {
                    break;
                }
                let rep = alg.reflect(lambda, &c2, false);
                if let Some(&m2) = table.dominant_mult.get(&rep) {
                    numer += m2 * (lam_dot - c_dot + k * r_dot);
                }
                k += 1;
            }
        }
        let total = 2 * numer;
        assert!(denom > 0 && total % denom == 0, "Freudenthal division");
        let m = total / denom;
        if m != 0 {
            table.dominant_mult.insert(c, m);
        }
    }
    Ok(table)
}

/// All weights of `V(λ)` with their multiplicities, in Λ-coordinates.
pub fn character_weights(
    alg: &AlgebraData,
    lambda: &[i64],
) -> Result<Vec<(Vec<i64>, i64)>, LieError> {
    let table = freudenthal(alg, lambda)?;
    let mut out = Vec::new();
    let mut c = vec![0i64; alg.rank];
    'outer: loop {
        let m = table.multiplicity(alg, &c);
        if m != 0 {
            out.push((alg.weight_at(lambda, &c), m));
        }
        let mut pos = 0;
        loop {
            if pos == alg.rank {
                break 'outer;
            }
            c[pos] += 1;
            if c[pos] <= table.box_max[pos] {
                break;
            }
            c[pos] = 0;
            pos += 1;
        }
    }
    Ok(out)
}

/// Normalized character `e^(−λ)·ch V(λ)` as an exact polynomial in `y`,
/// with unit constant term.
pub fn normalized_character_y(alg: &AlgebraData, lambda: &[i64]) -> Result<TruncatedSeries, LieError> {
    let table = freudenthal(alg, lambda)?;
    let y = VarSet::y_vars(alg.rank);
    let degree: u32 = table.box_max.iter().sum::<i64>() as u32;
    let mut terms: Vec<(Expo, Rat)> = Vec::new();
    let mut c = vec![0i64; alg.rank];
    'outer: loop {
        let m = table.multiplicity(alg, &c);
        if m != 0 {
            terms.push((Expo(c.iter().map(|&x| x as u32).collect()), rat_int(m)));
        }
        let mut pos = 0;
        loop {
            if pos == alg.rank {
                break 'outer;
            }
            c[pos] += 1;
            if c[pos] <= table.box_max[pos] {
                break;
            }
            c[pos] = 0;
            pos += 1;
        }
    }
    Ok(TruncatedSeries::from_terms(y, degree.max(1), terms)?)
}

/// Character of `V(λ)` in the variables `x_a = e^(ε_a·Λ_a)` together with
/// its normalized `y`-form.  Requires every `λ_a` divisible by `ε_a`.
pub fn weyl_character(
    alg: &AlgebraData,
    lambda: &[i64],
) -> Result<(LaurentPoly, TruncatedSeries), LieError> {
    let normalized = normalized_character_y(alg, lambda)?;
    for (a, &l) in lambda.iter().enumerate() {
        if l % alg.eps[a] != 0 {
            return Err(LieError::FractionalXPower);
        }
    }
    let x = VarSet::x_vars(alg.rank);
    let g: Vec<Vec<i64>> = alg
        .g_matrix
        .iter()
        .map(|row| row.to_vec())
        .collect();
    let in_x = crate::laurent::substitute_monomials(&normalized, &g, &x);
    let top = SignedExpo(
        lambda
            .iter()
            .zip(&alg.eps)
            .map(|(&l, &e)| l / e)
            .collect(),
    );
    let chi = in_x
        .mul(&LaurentPoly::monomial(x, top, rat_int(1)))
        .map_err(LieError::Series)?;
    Ok((chi, normalized))
}

/// Weyl dimension `∏ (λ+ρ, α)/(ρ, α)` for cross-checks.
pub fn weyl_dimension(alg: &AlgebraData, lambda: &[i64]) -> Rat {
    let mut dim = rat_int(1);
    for root in &alg.positive_roots {
        let num: i64 = (0..alg.rank)
            .map(|a| root[a] * alg.sym[a] * (lambda[a] + 1))
            .sum();
        let den: i64 = (0..alg.rank).map(|a| root[a] * alg.sym[a]).sum();
        dim *= rat_int(num) / rat_int(den);
    }
    dim
}

/// The three classical Weyl-denominator identities relating the `C_n`,
/// `B_n` and `D_n` products under the variable identifications of their
/// shared rank-`n` subalgebra pictures.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DenominatorIdentity {
    /// `C_n` denominator = `∏_a (1 + ∏_(k=a..n) y_k)` × `B_n` denominator.
    CnViaBn,
    /// `B_n` denominator = `∏_a (1 − ∏_(k=a..n) y_k)` × `D_n` denominator.
    BnViaDn,
    /// `C_n` denominator = `∏_a (1 − y_n⁻¹·∏_(k=a..n) y_k²)` × `D_n` denominator.
    CnViaDn,
}

impl DenominatorIdentity {
    pub fn as_str(&self) -> &'static str {
        match self {
            DenominatorIdentity::CnViaBn => "cn-bn",
            DenominatorIdentity::BnViaDn => "bn-dn",
            DenominatorIdentity::CnViaDn => "cn-dn",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "cn-bn" => Some(DenominatorIdentity::CnViaBn),
            "bn-dn" => Some(DenominatorIdentity::BnViaDn),
            "cn-dn" => Some(DenominatorIdentity::CnViaDn),
            _ => None,
        }
    }
}

fn denominator_product(
    y: &Arc<VarSet>,
    roots: &[Vec<i64>],
    image: impl Fn(&[i64]) -> Vec<i64>,
) -> LaurentPoly {
    let mut out = LaurentPoly::one(y.clone());
    for root in roots {
        let mono = LaurentPoly::monomial(y.clone(), SignedExpo(image(root)), rat_int(1));
        let factor = LaurentPoly::one(y.clone()).sub(&mono).unwrap();
        out = out.mul(&factor).unwrap();
    }
    out
}

/// Checks one of the denominator identities exactly, as Laurent polynomials
/// in `y`, under the stated variable identifications.
pub fn denominator_identity_check(which: DenominatorIdentity, n: usize) -> Result<bool, LieError> {
    let min_rank = match which {
        DenominatorIdentity::CnViaBn => 1,
        _ => 2,
    };
    if n < min_rank {
        return Err(LieError::RankTooSmall(min_rank));
    }
    let y = VarSet::y_vars(n);
    let c_roots = positive_roots(&cartan_matrix(BaseType::C, n));
    let b_roots = positive_roots(&cartan_matrix(BaseType::B, n));
    let d_roots = if n >= 2 {
        positive_roots(&cartan_matrix(BaseType::D, n))
    } else {
        Vec::new()
    };
    let plain = |c: &[i64]| c.to_vec();
    let tail_monomial = |a: usize| {
        let mut e = vec![0i64; n];
        for item in e.iter_mut().take(n).skip(a) {
            *item = 1;
        }
        e
    };
    let ok = match which {
        DenominatorIdentity::CnViaBn => {
            // LHS over C_n roots with e^(−ὰ_a) = y_a^(ε_a), ε = (1,…,1,2)
            let lhs = denominator_product(&y, &c_roots, |c| {
                (0..n)
                    .map(|a| if a == n - 1 { 2 * c[a] } else { c[a] })
                    .collect()
            });
            let mut rhs = denominator_product(&y, &b_roots, plain);
            for a in 0..n {
                let mono = LaurentPoly::monomial(y.clone(), SignedExpo(tail_monomial(a)), rat_int(1));
                let factor = LaurentPoly::one(y.clone()).add(&mono).unwrap();
                rhs = rhs.mul(&factor).unwrap();
            }
            lhs == rhs
        }
        DenominatorIdentity::BnViaDn => {
            let lhs = denominator_product(&y, &b_roots, plain);
            // D_n roots under e^(−ὰ_a) = y_a (a ≤ n−1), e^(−ὰ_n) = y_(n−1)·y_n²
            let mut rhs = denominator_product(&y, &d_roots, |c| {
                let mut e = vec![0i64; n];
                for a in 0..n - 1 {
                    e[a] += c[a];
                }
                e[n - 2] += c[n - 1];
                e[n - 1] += 2 * c[n - 1];
                e
            });
            for a in 0..n {
                let mono = LaurentPoly::monomial(y.clone(), SignedExpo(tail_monomial(a)), rat_int(1));
                let factor = LaurentPoly::one(y.clone()).sub(&mono).unwrap();
                rhs = rhs.mul(&factor).unwrap();
            }
            lhs == rhs
        }
        DenominatorIdentity::CnViaDn => {
            let lhs = denominator_product(&y, &c_roots, plain);
            // D_n roots under e^(−ὰ_a) = y_a (a ≤ n−1), e^(−ὰ_n) = y_(n−1)·y_n
            let mut rhs = denominator_product(&y, &d_roots, |c| {
                let mut e = vec![0i64; n];
                for a in 0..n - 1 {
                    e[a] += c[a];
                }
                e[n - 2] += c[n - 1];
                e[n - 1] += c[n - 1];
                e
            });
            for a in 0..n {
                // 1 − y_n⁻¹·∏_(k=a..n) y_k²
                let mut e = vec![0i64; n];
                for item in e.iter_mut().take(n).skip(a) {
                    *item = 2;
                }
                e[n - 1] -= 1;
                let mono = LaurentPoly::monomial(y.clone(), SignedExpo(e), rat_int(1));
                let factor = LaurentPoly::one(y.clone()).sub(&mono).unwrap();
                rhs = rhs.mul(&factor).unwrap();
            }
            lhs == rhs
        }
    };
    Ok(ok)
}
