//! Root systems, Weyl groups and normal orderings of positive roots.
//!
//! Roots are stored as integer vectors of simple-root coordinates, coroots as
//! integer vectors of simple-coroot coordinates.  All pairings are computed
//! from the Cartan matrix, so nothing here depends on a choice of inner
//! product normalization.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

/// A root in simple-root coordinates.  Negative roots have all coordinates
/// non-positive; mixed-sign vectors are not roots of any finite system.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Root(pub Vec<i64>);

impl Root {
    pub fn neg(&self) -> Root {
        Root(self.0.iter().map(|c| -c).collect())
    }

    pub fn add(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Root) -> Root {
        Root(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// True when every coordinate is >= 0 and at least one is positive.
    pub fn is_positive(&self) -> bool {
        self.0.iter().all(|&c| c >= 0) && !self.is_zero()
    }

    pub fn height(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn simple(rank: usize, i: usize) -> Root {
        let mut v = vec![0i64; rank];
        v[i] = 1;
        Root(v)
    }
}

impl fmt::Debug for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self
            .0
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        write!(f, "[{}]", body)
    }
}

/// Root system of finite type built from a Cartan matrix.
///
/// Convention: `cartan[i][j]` is the pairing of the simple root `α_j` against
/// the simple coroot `h_i`, i.e. `α_j(h_{α_i})`.
#[derive(Clone, Debug)]
pub struct RootSystem {
    rank: usize,
    cartan: Vec<Vec<i64>>,
    /// Symmetrizers: minimal positive integers with d_i·a[i][j] = d_j·a[j][i].
    sym: Vec<i64>,
    /// Positive roots ordered by height, then lexicographically.
    positive: Vec<Root>,
    /// Position of each positive root in `positive`.
    index: HashMap<Root, usize>,
    /// Coroot coordinates of h_γ for each positive root γ.
    coroots: Vec<Vec<i64>>,
    /// Half root-lengths d_γ = (γ,γ)/2 for each positive root.
    half_norms: Vec<i64>,
    /// ρ(h_γ) for each positive root γ (always an integer).
    rho: Vec<i64>,
}

impl RootSystem {
    /// Builds the root system from a Cartan matrix of finite type.
    pub fn build(cartan: Vec<Vec<i64>>) -> Result<RootSystem> {
        let rank = cartan.len();
        if rank == 0 {
            return Err(EngineError::InvalidCartan("empty matrix".into()));
        }
        for (i, row) in cartan.iter().enumerate() {
            if row.len() != rank {
                return Err(EngineError::InvalidCartan("matrix is not square".into()));
            }
            if row[i] != 2 {
                return Err(EngineError::InvalidCartan(format!(
                    "diagonal entry a[{i}][{i}] = {} is not 2",
                    row[i]
                )));
            }
            for (j, &a) in row.iter().enumerate() {
                if i != j && a > 0 {
                    return Err(EngineError::InvalidCartan(format!(
                        "off-diagonal entry a[{i}][{j}] = {a} is positive"
                    )));
                }
                if i != j && (a == 0) != (cartan[j][i] == 0) {
                    return Err(EngineError::InvalidCartan(format!(
                        "a[{i}][{j}] = 0 but a[{j}][{i}] != 0"
                    )));
                }
            }
        }

        let sym = symmetrizers(&cartan)?;
        check_positive_definite(&cartan, &sym)?;

        // Closure by root strings: γ + α_i is a root iff q = p - <γ, h_i> > 0
        // where p is the largest integer with γ - p·α_i still a root.
        let mut roots: BTreeSet<Root> = (0..rank).map(|i| Root::simple(rank, i)).collect();
        let mut frontier: Vec<Root> = roots.iter().cloned().collect();
        let mut guard = 0usize;
        while !frontier.is_empty() {
            guard += 1;
            if guard > 10_000 {
                return Err(EngineError::InvalidCartan(
                    "root closure did not terminate; matrix is not of finite type".into(),
                ));
            }
            let mut next = Vec::new();
            for gamma in frontier {
                for i in 0..rank {
                    let alpha = Root::simple(rank, i);
                    let mut p = 0i64;
                    loop {
                        let mut down = gamma.clone();
                        for _ in 0..=p {
                            down = down.sub(&alpha);
                        }
                        if down.is_zero() || roots.contains(&down) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    let pairing: i64 = (0..rank).map(|j| cartan[i][j] * gamma.0[j]).sum();
                    if p - pairing > 0 {
                        let up = gamma.add(&alpha);
                        if roots.insert(up.clone()) {
                            next.push(up);
                        }
                    }
                }
            }
            frontier = next;
        }

        let mut positive: Vec<Root> = roots.into_iter().collect();
        positive.sort_by_key(|r| (r.height(), r.0.clone()));
        let index: HashMap<Root, usize> = positive
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i))
            .collect();

        // (γ,δ) = Σ m_i n_j d_i a[i][j]; d_γ = (γ,γ)/2; h_γ = Σ (m_i d_i / d_γ) h_i.
        let mut coroots = Vec::with_capacity(positive.len());
        let mut half_norms = Vec::with_capacity(positive.len());
        for gamma in &positive {
            let mut norm = 0i64;
            for i in 0..rank {
                for j in 0..rank {
                    norm += gamma.0[i] * gamma.0[j] * sym[i] * cartan[i][j];
                }
            }
            if norm <= 0 || norm % 2 != 0 {
                return Err(EngineError::Inconsistent(format!(
                    "root {gamma} has invalid squared length {norm}"
                )));
            }
            let d_gamma = norm / 2;
            let mut co = Vec::with_capacity(rank);
            for i in 0..rank {
                let num = gamma.0[i] * sym[i];
                if num % d_gamma != 0 {
                    return Err(EngineError::Inconsistent(format!(
                        "coroot of {gamma} is not integral"
                    )));
                }
                co.push(num / d_gamma);
            }
            coroots.push(co);
            half_norms.push(d_gamma);
        }

        let mut rs = RootSystem {
            rank,
            cartan,
            sym,
            positive,
            index,
            coroots,
            half_norms,
            rho: Vec::new(),
        };

        // ρ(h_γ) = ½ Σ_{α>0} α(h_γ); equals the coroot height, always integral.
        let mut rho = Vec::with_capacity(rs.positive.len());
        for k in 0..rs.positive.len() {
            let gamma = rs.positive[k].clone();
            let total: i64 = rs.positive.iter().map(|a| rs.pairing(a, &gamma)).sum();
            if total % 2 != 0 {
                return Err(EngineError::Inconsistent(format!(
                    "ρ(h_{gamma}) is not an integer"
                )));
            }
            rho.push(total / 2);
        }
        rs.rho = rho;

        for i in 0..rank {
            let alpha = Root::simple(rank, i);
            debug_assert_eq!(rs.rho_coroot(&alpha), 1);
            debug_assert_eq!(rs.pairing(&alpha, &alpha), 2);
        }

        Ok(rs)
    }

    /// Builds a root system from a type label such as "A2", "B2", "G2".
    pub fn from_label(label: &str) -> Result<RootSystem> {
        let label = label.trim().to_uppercase();
        let (family, rank_str) = label.split_at(1);
        let rank: usize = rank_str
            .parse()
            .map_err(|_| EngineError::InvalidCartan(format!("bad type label {label}")))?;
        if rank == 0 {
            return Err(EngineError::InvalidCartan(format!(
                "bad type label {label}"
            )));
        }
        let mut a = vec![vec![0i64; rank]; rank];
        for i in 0..rank {
            a[i][i] = 2;
            if i + 1 < rank {
                a[i][i + 1] = -1;
                a[i + 1][i] = -1;
            }
        }
        match family {
            "A" => {}
            "B" => {
                if rank < 2 {
                    return Err(EngineError::InvalidCartan(format!(
                        "bad type label {label}"
                    )));
                }
                // last simple root short
                a[rank - 1][rank - 2] = -2;
            }
            "C" => {
                if rank < 2 {
                    return Err(EngineError::InvalidCartan(format!(
                        "bad type label {label}"
                    )));
                }
                a[rank - 2][rank - 1] = -2;
            }
            "D" => {
                if rank < 3 {
                    return Err(EngineError::InvalidCartan(format!(
                        "bad type label {label}"
                    )));
                }
                a[rank - 1][rank - 2] = 0;
                a[rank - 2][rank - 1] = 0;
                a[rank - 1][rank - 3] = -1;
                a[rank - 3][rank - 1] = -1;
            }
            "G" => {
                if rank != 2 {
                    return Err(EngineError::InvalidCartan(format!(
                        "bad type label {label}"
                    )));
                }
                a[1][0] = -3;
            }
            "F" => {
                if rank != 4 {
                    return Err(EngineError::InvalidCartan(format!(
                        "bad type label {label}"
                    )));
                }
                a[2][1] = -2;
                a[1][2] = -1;
            }
            _ => {
                return Err(EngineError::InvalidCartan(format!(
                    "bad type label {label}"
                )));
            }
        }
        RootSystem::build(a)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cartan(&self) -> &[Vec<i64>] {
        &self.cartan
    }

    pub fn num_positive(&self) -> usize {
        self.positive.len()
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.positive
    }

    pub fn is_positive_root(&self, r: &Root) -> bool {
        self.index.contains_key(r)
    }

    /// True for members of Δ = Δ₊ ∪ −Δ₊.
    pub fn is_root(&self, r: &Root) -> bool {
        self.index.contains_key(r) || self.index.contains_key(&r.neg())
    }

    fn pos_index(&self, r: &Root) -> Result<usize> {
        self.index
            .get(r)
            .copied()
            .ok_or_else(|| EngineError::UnknownRoot(r.to_string()))
    }

    /// Coroot coordinates of h_γ; γ may be a negative root (h_{-γ} = -h_γ).
    pub fn coroot(&self, gamma: &Root) -> Vec<i64> {
        if let Some(&i) = self.index.get(gamma) {
            self.coroots[i].clone()
        } else {
            let i = *self
                .index
                .get(&gamma.neg())
                .unwrap_or_else(|| panic!("not a root: {gamma}"));
            self.coroots[i].iter().map(|c| -c).collect()
        }
    }

    /// Pairing γ(h_{α_i}) against a simple coroot; γ need not be a root.
    pub fn pairing_simple(&self, gamma: &Root, i: usize) -> i64 {
        (0..self.rank).map(|j| self.cartan[i][j] * gamma.0[j]).sum()
    }

    /// Pairing γ(h_δ) of an arbitrary lattice vector against the coroot of δ.
    pub fn pairing(&self, gamma: &Root, delta: &Root) -> i64 {
        let co = self.coroot(delta);
        (0..self.rank)
            .map(|i| co[i] * self.pairing_simple(gamma, i))
            .sum()
    }

    /// ρ(h_γ) where ρ is the half-sum of positive roots.
    pub fn rho_coroot(&self, gamma: &Root) -> i64 {
        if let Some(&i) = self.index.get(gamma) {
            self.rho[i]
        } else {
            let i = self.pos_index(&gamma.neg()).expect("not a root");
            -self.rho[i]
        }
    }

    /// Half squared length d_γ = (γ,γ)/2 in the normalization fixed by the
    /// integer symmetrizers.
    pub fn half_norm(&self, gamma: &Root) -> i64 {
        let g = if gamma.is_positive() {
            gamma.clone()
        } else {
            gamma.neg()
        };
        self.half_norms[self.pos_index(&g).expect("not a root")]
    }

    pub fn symmetrizers(&self) -> &[i64] {
        &self.sym
    }

    /// Reflection s_γ as an exact integer matrix on root coordinates.
    pub fn reflection(&self, gamma: &Root) -> WeylElement {
        let mut cols = Vec::with_capacity(self.rank);
        for j in 0..self.rank {
            let alpha = Root::simple(self.rank, j);
            let c = self.pairing(&alpha, gamma);
            let mut col = alpha.0;
            for t in 0..self.rank {
                col[t] -= c * gamma.0[t];
            }
            cols.push(col);
        }
        let m = Matrix { cols };
        WeylElement { inv: m.clone(), m }
    }

    pub fn identity_weyl(&self) -> WeylElement {
        let m = Matrix::identity(self.rank);
        WeylElement { inv: m.clone(), m }
    }

    pub fn simple_reflection(&self, i: usize) -> WeylElement {
        self.reflection(&Root::simple(self.rank, i))
    }

    /// Longest Weyl element, built by greedy length extension.
    pub fn longest_element(&self) -> WeylElement {
        let mut w = self.identity_weyl();
        loop {
            let mut extended = false;
            for i in 0..self.rank {
                let img = w.apply(&Root::simple(self.rank, i));
                if img.is_positive() {
                    w = w.compose(&self.simple_reflection(i));
                    extended = true;
                    break;
                }
            }
            if !extended {
                return w;
            }
        }
    }

    /// Inversion set Δ_w = {α ∈ Δ₊ : w⁻¹α < 0}.
    pub fn delta_w(&self, w: &WeylElement) -> Vec<Root> {
        self.positive
            .iter()
            .filter(|a| !w.apply_inverse(a).is_positive())
            .cloned()
            .collect()
    }

    pub fn length(&self, w: &WeylElement) -> usize {
        self.delta_w(w).len()
    }

    /// w(Δ₊ \ Δ_{w⁻¹}); equals {β_1,…,β_{k−1}} for any adapted ordering.
    pub fn w_complement_roots(&self, w: &WeylElement) -> Vec<Root> {
        let mut out: Vec<Root> = self
            .positive
            .iter()
            .filter(|a| w.apply(a).is_positive())
            .map(|a| w.apply(a))
            .collect();
        out.sort_by_key(|r| (r.height(), r.0.clone()));
        out
    }

    /// Lexicographically least reduced word of w (greedy descent search).
    pub fn lex_least_reduced_word(&self, w: &WeylElement) -> Vec<usize> {
        let mut word = Vec::new();
        let mut cur = w.clone();
        loop {
            let mut found = None;
            for i in 0..self.rank {
                // ℓ(s_i·cur) < ℓ(cur) iff cur⁻¹(α_i) < 0
                if !cur.apply_inverse(&Root::simple(self.rank, i)).is_positive() {
                    found = Some(i);
                    break;
                }
            }
            match found {
                Some(i) => {
                    word.push(i);
                    cur = self.simple_reflection(i).compose(&cur);
                }
                None => break,
            }
        }
        word
    }

    /// Applies a word of simple reflections; returns the corresponding element.
    pub fn weyl_from_word(&self, word: &[usize]) -> Result<WeylElement> {
        let mut w = self.identity_weyl();
        for &i in word {
            if i >= self.rank {
                return Err(EngineError::IndexRange(format!(
                    "simple reflection index {i} out of range for rank {}",
                    self.rank
                )));
            }
            w = w.compose(&self.simple_reflection(i));
        }
        Ok(w)
    }

    /// All reduced words of w, in lexicographic order, up to an optional cap.
    pub fn reduced_words(&self, w: &WeylElement, cap: Option<usize>) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut stack = vec![(w.clone(), Vec::new())];
        // depth-first with ascending generator indices yields lex order
        while let Some((cur, word)) = stack.pop() {
            if cur.is_identity() {
                out.push(word);
                if let Some(c) = cap {
                    if out.len() >= c {
                        break;
                    }
                }
                continue;
            }
            let mut branches = Vec::new();
            for i in 0..self.rank {
                if !cur.apply_inverse(&Root::simple(self.rank, i)).is_positive() {
                    let mut next_word = word.clone();
                    next_word.push(i);
                    branches.push((self.simple_reflection(i).compose(&cur), next_word));
                }
            }
            // push in reverse so the smallest index is explored first
            for b in branches.into_iter().rev() {
                stack.push(b);
            }
        }
        out
    }
}

fn symmetrizers(cartan: &[Vec<i64>]) -> Result<Vec<i64>> {
    let rank = cartan.len();
    let mut d = vec![BigRational::zero(); rank];
    let mut seen = vec![false; rank];
    for start in 0..rank {
        if seen[start] {
            continue;
        }
        d[start] = BigRational::one();
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for j in 0..rank {
                if i == j || cartan[i][j] == 0 {
                    continue;
                }
                // d_i a_ij = d_j a_ji
                let val = d[i].clone() * BigRational::from_integer(cartan[i][j].into())
                    / BigRational::from_integer(cartan[j][i].into());
                if seen[j] {
                    if d[j] != val {
                        return Err(EngineError::InvalidCartan(
                            "matrix is not symmetrizable".into(),
                        ));
                    }
                } else {
                    d[j] = val;
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
    }
    // scale to minimal positive integers
    let mut denom_lcm = num_bigint::BigInt::one();
    for v in &d {
        denom_lcm = num_integer_lcm(&denom_lcm, v.denom());
    }
    let ints: Vec<num_bigint::BigInt> = d
        .iter()
        .map(|v| (v * BigRational::from_integer(denom_lcm.clone())).to_integer())
        .collect();
    let mut g = num_bigint::BigInt::zero();
    for v in &ints {
        g = num_integer_gcd(&g, v);
    }
    ints.iter()
        .map(|v| {
            let r = v / &g;
            if r <= num_bigint::BigInt::zero() {
                Err(EngineError::InvalidCartan(
                    "matrix is not symmetrizable with positive weights".into(),
                ))
            } else {
                i64::try_from(&r)
                    .map_err(|_| EngineError::InvalidCartan("symmetrizer overflow".into()))
            }
        })
        .collect()
}

fn num_integer_gcd(a: &num_bigint::BigInt, b: &num_bigint::BigInt) -> num_bigint::BigInt {
    use num_traits::Zero as _;
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let t = &a % &b;
        a = b;
        b = t;
    }
    a
}

fn num_integer_lcm(a: &num_bigint::BigInt, b: &num_bigint::BigInt) -> num_bigint::BigInt {
    use num_traits::Zero as _;
    if a.is_zero() || b.is_zero() {
        return num_bigint::BigInt::zero();
    }
    (a / num_integer_gcd(a, b)) * b
}

/// Positive-definiteness of diag(d)·A via leading principal minors.
fn check_positive_definite(cartan: &[Vec<i64>], sym: &[i64]) -> Result<()> {
    let rank = cartan.len();
    let s: Vec<Vec<BigRational>> = (0..rank)
        .map(|i| {
            (0..rank)
                .map(|j| BigRational::from_integer((sym[i] * cartan[i][j]).into()))
                .collect()
        })
        .collect();
    for k in 1..=rank {
        let minor = det(&s, k);
        if minor <= BigRational::zero() {
            return Err(EngineError::InvalidCartan(
                "symmetrized matrix is not positive definite (not finite type)".into(),
            ));
        }
    }
    Ok(())
}

fn det(m: &[Vec<BigRational>], k: usize) -> BigRational {
    // Gaussian elimination on the leading k×k block.
    let mut a: Vec<Vec<BigRational>> = (0..k).map(|i| m[i][..k].to_vec()).collect();
    let mut result = BigRational::one();
    for col in 0..k {
        let pivot = (col..k).find(|&r| !a[r][col].is_zero());
        let Some(p) = pivot else {
            return BigRational::zero();
        };
        if p != col {
            a.swap(p, col);
            result = -result;
        }
        let pv = a[col][col].clone();
        result *= pv.clone();
        for r in col + 1..k {
            let f = a[r][col].clone() / pv.clone();
            for c in col..k {
                let sub = f.clone() * a[col][c].clone();
                a[r][c] -= sub;
            }
        }
    }
    result
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
struct Matrix {
    /// Column j = image of the j-th simple root, in root coordinates.
    cols: Vec<Vec<i64>>,
}

impl Matrix {
    fn identity(rank: usize) -> Matrix {
        Matrix {
            cols: (0..rank).map(|i| Root::simple(rank, i).0).collect(),
        }
    }

    fn apply(&self, v: &Root) -> Root {
        let rank = self.cols.len();
        let mut out = vec![0i64; rank];
        for (j, c) in v.0.iter().enumerate() {
            for t in 0..rank {
                out[t] += c * self.cols[j][t];
            }
        }
        Root(out)
    }

    fn mul(&self, rhs: &Matrix) -> Matrix {
        Matrix {
            cols: rhs
                .cols
                .iter()
                .map(|c| self.apply(&Root(c.clone())).0)
                .collect(),
        }
    }
}

/// Exact integer-matrix Weyl group element together with its inverse.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct WeylElement {
    m: Matrix,
    inv: Matrix,
}

impl WeylElement {
    pub fn apply(&self, v: &Root) -> Root {
        self.m.apply(v)
    }

    pub fn apply_inverse(&self, v: &Root) -> Root {
        self.inv.apply(v)
    }

    /// self ∘ rhs (apply rhs first is false: (self·rhs)(x) = self(rhs(x))).
    pub fn compose(&self, rhs: &WeylElement) -> WeylElement {
        WeylElement {
            m: self.m.mul(&rhs.m),
            inv: rhs.inv.mul(&self.inv),
        }
    }

    pub fn inverse(&self) -> WeylElement {
        WeylElement {
            m: self.inv.clone(),
            inv: self.m.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.m == Matrix::identity(self.m.cols.len())
    }
}

/// A normal (convex) ordering β_1,…,β_N of the positive roots: every sum-root
/// lies strictly between its summands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalOrdering {
    roots: Vec<Root>,
    pos: HashMap<Root, usize>,
}

impl NormalOrdering {
    pub fn roots(&self) -> &[Root] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    /// Zero-based position of a positive root.
    pub fn position(&self, r: &Root) -> Option<usize> {
        self.pos.get(r).copied()
    }

    /// One-based access matching the β_k notation.
    pub fn beta(&self, k: usize) -> &Root {
        &self.roots[k - 1]
    }
}

/// Betweenness predicate for normal orderings.
pub fn validate_normal_ordering(rs: &RootSystem, seq: &[Root]) -> bool {
    if seq.len() != rs.num_positive() {
        return false;
    }
    let mut pos = HashMap::new();
    for (i, r) in seq.iter().enumerate() {
        if !rs.is_positive_root(r) || pos.insert(r.clone(), i).is_some() {
            return false;
        }
    }
    for a in rs.positive_roots() {
        for b in rs.positive_roots() {
            if a >= b {
                continue;
            }
            let c = a.add(b);
            if let (Some(&pa), Some(&pb), Some(&pc)) = (pos.get(a), pos.get(b), pos.get(&c)) {
                let (lo, hi) = if pa < pb { (pa, pb) } else { (pb, pa) };
                if !(lo < pc && pc < hi) {
                    return false;
                }
            }
        }
    }
    true
}

/// Builds a normal ordering from a reduced word of the longest element:
/// β_t = s_{i_1}…s_{i_{t−1}}(α_{i_t}).
pub fn normal_ordering_from_reduced_word(
    rs: &RootSystem,
    word: &[usize],
) -> Result<NormalOrdering> {
    if word.len() != rs.num_positive() {
        return Err(EngineError::NonReducedWord(format!(
            "word length {} does not match the number of positive roots {}",
            word.len(),
            rs.num_positive()
        )));
    }
    let mut prefix = rs.identity_weyl();
    let mut roots = Vec::with_capacity(word.len());
    let mut seen = BTreeSet::new();
    for &i in word {
        if i >= rs.rank() {
            return Err(EngineError::IndexRange(format!(
                "simple reflection index {i} out of range"
            )));
        }
        let beta = prefix.apply(&Root::simple(rs.rank(), i));
        if !beta.is_positive() || !seen.insert(beta.clone()) {
            return Err(EngineError::NonReducedWord(format!(
                "word {:?} is not reduced (root {beta} repeated or negative)",
                word
            )));
        }
        roots.push(beta);
        prefix = prefix.compose(&rs.simple_reflection(i));
    }
    let ordering = NormalOrdering {
        pos: roots
            .iter()
            .enumerate()
            .map(|(i, r)| (r.clone(), i))
            .collect(),
        roots,
    };
    debug_assert!(validate_normal_ordering(rs, ordering.roots()));
    Ok(ordering)
}

/// The default deterministic ordering: lexicographically least reduced word
/// of the longest element.
pub fn default_ordering(rs: &RootSystem) -> NormalOrdering {
    let w0 = rs.longest_element();
    let word = rs.lex_least_reduced_word(&w0);
    normal_ordering_from_reduced_word(rs, &word).expect("w0 word is reduced")
}

/// All normal orderings (via deduplicated reduced words of w₀), optionally
/// capped; full enumeration explodes combinatorially beyond rank 3.
pub fn all_normal_orderings(rs: &RootSystem, cap: Option<usize>) -> Vec<NormalOrdering> {
    let w0 = rs.longest_element();
    rs.reduced_words(&w0, cap)
        .into_iter()
        .map(|word| normal_ordering_from_reduced_word(rs, &word).expect("reduced"))
        .collect()
}

/// w = s_{β_k}·…·s_{β_N} as an exact matrix; k = N+1 gives the identity.
pub fn weyl_from_suffix(
    rs: &RootSystem,
    ordering: &NormalOrdering,
    k: usize,
) -> Result<WeylElement> {
    let n = ordering.len();
    if k < 1 || k > n + 1 {
        return Err(EngineError::IndexRange(format!(
            "suffix index k = {k} not in 1..={}",
            n + 1
        )));
    }
    let mut w = rs.identity_weyl();
    for t in k..=n {
        w = w.compose(&rs.reflection(ordering.beta(t)));
    }
    Ok(w)
}

/// Produces an ordering with w = s_{β_k}…s_{β_N} and Δ_w = {β_k,…,β_N},
/// using s_{β_k}…s_{β_N} = u_{k−1}·w₀⁻¹ with u the prefix products of a
/// reduced word of w₀ extending one of w·w₀.
pub fn adapted_normal_ordering(
    rs: &RootSystem,
    w: &WeylElement,
) -> Result<(NormalOrdering, usize)> {
    let n = rs.num_positive();
    let w0 = rs.longest_element();
    let u = w.compose(&w0); // w·w₀, length N − ℓ(w)
    let mut word = rs.lex_least_reduced_word(&u);
    let k = word.len() + 1;
    let z = u.inverse().compose(&w0);
    word.extend(rs.lex_least_reduced_word(&z));
    if word.len() != n {
        return Err(EngineError::Inconsistent(format!(
            "adapted word has length {} instead of {n}",
            word.len()
        )));
    }
    let ordering = normal_ordering_from_reduced_word(rs, &word)?;
    let rebuilt = weyl_from_suffix(rs, &ordering, k)?;
    if &rebuilt != w {
        return Err(EngineError::Inconsistent(
            "adapted ordering does not reproduce w".into(),
        ));
    }
    let suffix: BTreeSet<Root> = ordering.roots()[k - 1..].iter().cloned().collect();
    let inversions: BTreeSet<Root> = rs.delta_w(w).into_iter().collect();
    if suffix != inversions {
        return Err(EngineError::Inconsistent(
            "suffix of adapted ordering is not the inversion set".into(),
        ));
    }
    Ok((ordering, k))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force closure oracle: all nonnegative integer vectors of bounded
    /// height that stay inside the additive closure generated from the simple
    /// roots by root strings, computed with a naive fixed point.
    fn closure_oracle(cartan: &[Vec<i64>], max_height: i64) -> BTreeSet<Root> {
        let rank = cartan.len();
        let mut roots: BTreeSet<Root> = (0..rank).map(|i| Root::simple(rank, i)).collect();
        loop {
            let mut added = false;
            let snapshot: Vec<Root> = roots.iter().cloned().collect();
            for a in &snapshot {
                for b in &snapshot {
                    let c = a.add(b);
                    if c.height() > max_height || roots.contains(&c) {
                        continue;
                    }
                    // c = a + b is a root iff the a-string through b reaches it:
                    // q - p = -<b, h_a> with p computed inside the current set.
                    let mut p = 0i64;
                    loop {
                        let mut down = b.clone();
                        for _ in 0..=p {
                            down = down.sub(a);
                        }
                        if down.is_zero() || roots.contains(&down) || roots.contains(&down.neg()) {
                            p += 1;
                        } else {
                            break;
                        }
                    }
                    let pairing: i64 = {
                        // b(h_a) with h_a computed from ratios of symmetrizers
                        let sym = symmetrizers(cartan).unwrap();
                        let mut norm = 0i64;
                        for i in 0..rank {
                            for j in 0..rank {
                                norm += a.0[i] * a.0[j] * sym[i] * cartan[i][j];
                            }
                        }
                        let d_a = norm / 2;
                        let mut s = 0i64;
                        for i in 0..rank {
                            let co = a.0[i] * sym[i];
                            let row: i64 = (0..rank).map(|j| cartan[i][j] * b.0[j]).sum();
                            s += co * row;
                        }
                        s / d_a
                    };
                    if p - pairing > 0 {
                        roots.insert(c);
                        added = true;
                    }
                }
            }
            if !added {
                return roots;
            }
        }
    }

    #[test]
    fn a1_positive_roots() {
        let rs = RootSystem::from_label("A1").unwrap();
        assert_eq!(rs.num_positive(), 1);
        assert_eq!(rs.positive_roots()[0], Root(vec![1]));
    }

    #[test]
    fn a2_closure_matches_oracle() {
        let rs = RootSystem::from_label("A2").unwrap();
        let oracle = closure_oracle(rs.cartan(), 10);
        let got: BTreeSet<Root> = rs.positive_roots().iter().cloned().collect();
        assert_eq!(got, oracle);
        assert_eq!(rs.num_positive(), 3);
        assert!(got.contains(&Root(vec![1, 1])));
    }

    #[test]
    fn g2_closure_matches_oracle() {
        let rs = RootSystem::from_label("G2").unwrap();
        let oracle = closure_oracle(rs.cartan(), 10);
        let got: BTreeSet<Root> = rs.positive_roots().iter().cloned().collect();
        assert_eq!(got, oracle);
        assert_eq!(rs.num_positive(), 6);
    }

    #[test]
    fn root_counts_match_type_tables() {
        for (label, count) in [
            ("A1", 1),
            ("A2", 3),
            ("B2", 4),
            ("A3", 6),
            ("G2", 6),
            ("B3", 9),
            ("C3", 9),
        ] {
            let rs = RootSystem::from_label(label).unwrap();
            assert_eq!(rs.num_positive(), count, "wrong N for {label}");
        }
    }

    #[test]
    fn rejects_invalid_matrices() {
        assert!(RootSystem::build(vec![vec![2, -1], vec![0, 2]]).is_err());
        assert!(RootSystem::build(vec![vec![1]]).is_err());
        assert!(RootSystem::build(vec![vec![2, -2], vec![-2, 2]]).is_err()); // affine A1~
        assert!(RootSystem::build(vec![vec![2, -1], vec![-5, 2]]).is_err()); // indefinite
    }

    #[test]
    fn pairing_and_rho_invariants() {
        for label in ["A2", "B2", "G2", "A3", "B3"] {
            let rs = RootSystem::from_label(label).unwrap();
            for alpha in rs.positive_roots() {
                assert_eq!(rs.pairing(alpha, alpha), 2, "{label}: α(h_α) ≠ 2");
            }
            for i in 0..rs.rank() {
                assert_eq!(rs.rho_coroot(&Root::simple(rs.rank(), i)), 1);
            }
        }
    }

    #[test]
    fn reflections_are_involutions() {
        let rs = RootSystem::from_label("B2").unwrap();
        for alpha in rs.positive_roots() {
            let s = rs.reflection(alpha);
            assert_eq!(s.apply(alpha), alpha.neg());
            assert!(s.compose(&s).is_identity());
            for beta in rs.positive_roots() {
                // reflections permute Δ and preserve the pairing
                let img = s.apply(beta);
                assert!(rs.is_root(&img));
                for gamma in rs.positive_roots() {
                    assert_eq!(rs.pairing(&s.apply(gamma), &img), rs.pairing(gamma, beta));
                }
            }
        }
    }

    #[test]
    fn normal_ordering_validation() {
        let rs = RootSystem::from_label("A2").unwrap();
        let a1 = Root(vec![1, 0]);
        let a2 = Root(vec![0, 1]);
        let theta = Root(vec![1, 1]);
        assert!(validate_normal_ordering(
            &rs,
            &[a1.clone(), theta.clone(), a2.clone()]
        ));
        assert!(!validate_normal_ordering(
            &rs,
            &[a1.clone(), a2.clone(), theta.clone()]
        ));
        let rs1 = RootSystem::from_label("A1").unwrap();
        assert!(validate_normal_ordering(&rs1, &[Root(vec![1])]));
    }

    #[test]
    fn ordering_from_word_examples() {
        let rs = RootSystem::from_label("A2").unwrap();
        let o = normal_ordering_from_reduced_word(&rs, &[1, 0, 1]).unwrap();
        assert_eq!(
            o.roots(),
            &[Root(vec![0, 1]), Root(vec![1, 1]), Root(vec![1, 0])]
        );
        let o2 = normal_ordering_from_reduced_word(&rs, &[0, 1, 0]).unwrap();
        assert_eq!(
            o2.roots(),
            &[Root(vec![1, 0]), Root(vec![1, 1]), Root(vec![0, 1])]
        );
        assert!(normal_ordering_from_reduced_word(&rs, &[0, 0, 1]).is_err());
    }

    #[test]
    fn all_orderings_are_valid() {
        for label in ["A2", "B2", "G2"] {
            let rs = RootSystem::from_label(label).unwrap();
            let orderings = all_normal_orderings(&rs, None);
            assert!(!orderings.is_empty());
            for o in &orderings {
                assert!(validate_normal_ordering(&rs, o.roots()), "{label}");
            }
        }
        // A2 has exactly two normal orderings
        let rs = RootSystem::from_label("A2").unwrap();
        assert_eq!(all_normal_orderings(&rs, None).len(), 2);
    }

    #[test]
    fn suffix_weyl_and_delta_w() {
        let rs = RootSystem::from_label("A2").unwrap();
        let o = normal_ordering_from_reduced_word(&rs, &[1, 0, 1]).unwrap();
        let n = o.len();
        // k = N+1 → identity
        assert!(weyl_from_suffix(&rs, &o, n + 1).unwrap().is_identity());
        // k = 3 on ordering (α₂, θ, α₁) → s_{α₁}
        let w = weyl_from_suffix(&rs, &o, 3).unwrap();
        assert_eq!(w, rs.reflection(&Root(vec![1, 0])));
        assert_eq!(rs.delta_w(&w), vec![Root(vec![1, 0])]);
        // k = 1 → longest element: sends Δ₊ to −Δ₊
        let w0 = weyl_from_suffix(&rs, &o, 1).unwrap();
        for a in rs.positive_roots() {
            assert!(!w0.apply(a).is_positive());
        }
        assert!(rs.delta_w(&rs.identity_weyl()).is_empty());
    }

    #[test]
    fn suffix_inversion_sets_exhaustive_rank_le_3() {
        for label in ["A1", "A2", "B2", "G2", "A3", "B3"] {
            let rs = RootSystem::from_label(label).unwrap();
            let cap = if rs.rank() >= 3 { Some(6) } else { None };
            for o in all_normal_orderings(&rs, cap) {
                for k in 1..=o.len() + 1 {
                    let w = weyl_from_suffix(&rs, &o, k).unwrap();
                    let suffix: BTreeSet<Root> = o.roots()[k - 1..].iter().cloned().collect();
                    let dw: BTreeSet<Root> = rs.delta_w(&w).into_iter().collect();
                    assert_eq!(suffix, dw, "{label}, k = {k}");
                }
            }
        }
    }

    #[test]
    fn w_of_inverse_inversions_is_minus_delta_w() {
        for label in ["A2", "B2", "G2", "A3"] {
            let rs = RootSystem::from_label(label).unwrap();
            let w0 = rs.longest_element();
            // enumerate the whole Weyl group by BFS
            let mut elems = vec![rs.identity_weyl()];
            let mut frontier = elems.clone();
            while !frontier.is_empty() {
                let mut next = Vec::new();
                for w in &frontier {
                    for i in 0..rs.rank() {
                        let nw = w.compose(&rs.simple_reflection(i));
                        if !elems.contains(&nw) {
                            elems.push(nw.clone());
                            next.push(nw);
                        }
                    }
                }
                frontier = next;
            }
            for w in &elems {
                let lhs: BTreeSet<Root> = rs
                    .delta_w(&w.inverse())
                    .iter()
                    .map(|a| w.apply(a))
                    .collect();
                let rhs: BTreeSet<Root> = rs.delta_w(w).iter().map(Root::neg).collect();
                assert_eq!(lhs, rhs, "{label}");
                // |w(Δ₊ \ Δ_{w⁻¹})| = N − ℓ(w), all members positive
                let comp = rs.w_complement_roots(w);
                assert_eq!(comp.len(), rs.num_positive() - rs.length(w));
                assert!(comp.iter().all(Root::is_positive));
            }
            assert_eq!(rs.length(&w0), rs.num_positive());
        }
    }

    #[test]
    fn adapted_ordering_examples() {
        let rs = RootSystem::from_label("A1").unwrap();
        let (o, k) = adapted_normal_ordering(&rs, &rs.simple_reflection(0)).unwrap();
        assert_eq!(k, 1);
        assert_eq!(o.roots(), &[Root(vec![1])]);

        let rs = RootSystem::from_label("A2").unwrap();
        let (o, k) = adapted_normal_ordering(&rs, &rs.identity_weyl()).unwrap();
        assert_eq!(k, o.len() + 1);

        let s1 = rs.simple_reflection(0);
        let (o, k) = adapted_normal_ordering(&rs, &s1).unwrap();
        assert_eq!(k, 3);
        assert_eq!(
            o.roots(),
            &[Root(vec![0, 1]), Root(vec![1, 1]), Root(vec![1, 0])]
        );
    }

    #[test]
    fn adapted_ordering_all_elements_rank_le_3() {
        for label in ["A2", "B2", "G2", "A3", "B3"] {
            let rs = RootSystem::from_label(label).unwrap();
            let mut elems = vec![rs.identity_weyl()];
            let mut i = 0;
            while i < elems.len() {
                let w = elems[i].clone();
                for j in 0..rs.rank() {
                    let nw = w.compose(&rs.simple_reflection(j));
                    if !elems.contains(&nw) {
                        elems.push(nw);
                    }
                }
                i += 1;
            }
            for w in &elems {
                let (o, k) = adapted_normal_ordering(&rs, w).unwrap();
                assert_eq!(weyl_from_suffix(&rs, &o, k).unwrap(), *w, "{label}");
            }
        }
    }
}
