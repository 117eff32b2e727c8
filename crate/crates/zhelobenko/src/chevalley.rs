//! Chevalley basis of g with exact integer structure constants, brackets,
//! nilpotent adjoint exponentials and the triangular decomposition of regular
//! Borel elements along a normal ordering.
//!
//! Normalization: [h_α, e_{±α}] = ±2·e_{±α} and [e_α, e_{−α}] = h_α for every
//! positive root α.  Signs are fixed by choosing N > 0 on extraspecial pairs
//! and propagating through the Jacobi identity; |N_{α,β}| = p+1 throughout.
//! The full Jacobi identity is re-verified exhaustively at build time for
//! rank ≤ 3.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};

use crate::coeffs::{q_int, Q};
use crate::error::{EngineError, Result};
use crate::roots::{NormalOrdering, Root, RootSystem};

/// Which sign the extraspecial pairs receive; both choices satisfy every
/// invariant, and the suites re-run a smoke subset under the flipped one.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum SignConvention {
    #[default]
    ExtraspecialPositive,
    ExtraspecialNegative,
}

/// Exact rational element of g in the Chevalley basis.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct LieElement {
    /// Coefficients of the simple coroots h_{α_1},…,h_{α_r}.
    pub h: Vec<Q>,
    /// Coefficients of the root vectors e_γ, γ ∈ Δ.
    pub e: BTreeMap<Root, Q>,
}

impl LieElement {
    pub fn zero(rank: usize) -> Self {
        LieElement {
            h: vec![Q::zero(); rank],
            e: BTreeMap::new(),
        }
    }

    pub fn cartan(h: Vec<Q>) -> Self {
        LieElement {
            h,
            e: BTreeMap::new(),
        }
    }

    pub fn root_vector(rank: usize, gamma: Root, c: Q) -> Self {
        let mut x = Self::zero(rank);
        x.add_e(gamma, c);
        x
    }

    pub fn rank(&self) -> usize {
        self.h.len()
    }

    pub fn is_zero(&self) -> bool {
        self.h.iter().all(Q::is_zero) && self.e.is_empty()
    }

    pub fn add_e(&mut self, gamma: Root, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.e.entry(gamma) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        for i in 0..out.h.len() {
            out.h[i] += rhs.h[i].clone();
        }
        for (g, c) in &rhs.e {
            out.add_e(g.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.rank());
        }
        LieElement {
            h: self.h.iter().map(|x| x * c).collect(),
            e: self.e.iter().map(|(g, x)| (g.clone(), x * c)).collect(),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(&-Q::one()))
    }

    pub fn coeff(&self, gamma: &Root) -> Q {
        self.e.get(gamma).cloned().unwrap_or_else(Q::zero)
    }

    /// Value α(h-part) for a root α.
    pub fn cartan_pairing(&self, rs: &RootSystem, alpha: &Root) -> Q {
        let mut acc = Q::zero();
        for (i, x) in self.h.iter().enumerate() {
            acc += x * q_int(rs.pairing_simple(alpha, i));
        }
        acc
    }

    pub fn h_part(&self) -> LieElement {
        LieElement::cartan(self.h.clone())
    }

    /// True when supported on b = h ⊕ n.
    pub fn in_borel(&self) -> bool {
        self.e.keys().all(Root::is_positive)
    }
}

impl fmt::Display for LieElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (i, c) in self.h.iter().enumerate() {
            if !c.is_zero() {
                parts.push(format!("{}*h[{}]", c, i + 1));
            }
        }
        for (g, c) in &self.e {
            parts.push(format!("{}*e{}", c, g));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Clone, Debug)]
enum BracketVal {
    /// [e_γ, e_δ] = c·e_{γ+δ}
    Root(Root, i64),
    /// [e_γ, e_{−γ}] = h_γ (coroot coordinates)
    Coroot(Vec<i64>),
}

/// A root system together with its Chevalley structure table; the shared
/// read-only context for all higher modules.
#[derive(Clone, Debug)]
pub struct Algebra {
    rs: RootSystem,
    brackets: HashMap<(Root, Root), BracketVal>,
}

impl Algebra {
    pub fn new(rs: RootSystem) -> Result<Algebra> {
        Self::with_sign_convention(rs, SignConvention::default())
    }

    pub fn from_label(label: &str) -> Result<Algebra> {
        Self::new(RootSystem::from_label(label)?)
    }

    pub fn with_sign_convention(rs: RootSystem, conv: SignConvention) -> Result<Algebra> {
        let pos_table = build_positive_table(&rs, conv)?;
        let brackets = assemble_full_table(&rs, &pos_table)?;
        let alg = Algebra { rs, brackets };
        if alg.rs.rank() <= 3 {
            alg.verify_jacobi()?;
        }
        alg.verify_magnitudes()?;
        Ok(alg)
    }

    pub fn rs(&self) -> &RootSystem {
        &self.rs
    }

    pub fn rank(&self) -> usize {
        self.rs.rank()
    }

    /// Structure constant N with [e_γ, e_δ] = N·e_{γ+δ}; zero when γ+δ is not
    /// a root (or when it is zero — use `bracket_basis` for the coroot case).
    pub fn struct_const(&self, gamma: &Root, delta: &Root) -> i64 {
        match self.brackets.get(&(gamma.clone(), delta.clone())) {
            Some(BracketVal::Root(_, c)) => *c,
            _ => 0,
        }
    }

    /// Bracket of two root-vector basis elements.
    pub fn bracket_basis(&self, gamma: &Root, delta: &Root) -> LieElement {
        match self.brackets.get(&(gamma.clone(), delta.clone())) {
            None => LieElement::zero(self.rank()),
            Some(BracketVal::Root(r, c)) => {
                LieElement::root_vector(self.rank(), r.clone(), q_int(*c))
            }
            Some(BracketVal::Coroot(co)) => {
                LieElement::cartan(co.iter().map(|&c| q_int(c)).collect())
            }
        }
    }

    /// Bilinear, antisymmetric extension of the structure table.
    pub fn bracket(&self, x: &LieElement, y: &LieElement) -> LieElement {
        let rank = self.rank();
        let mut out = LieElement::zero(rank);
        // [h-part of x, e-part of y] and [e-part of x, h-part of y]
        for (g, c) in &y.e {
            let v = x.cartan_pairing(&self.rs, g);
            out.add_e(g.clone(), v * c);
        }
        for (g, c) in &x.e {
            let v = y.cartan_pairing(&self.rs, g);
            out.add_e(g.clone(), -v * c);
        }
        // e × e
        for (g1, c1) in &x.e {
            for (g2, c2) in &y.e {
                let b = self.bracket_basis(g1, g2);
                out = out.add(&b.scale(&(c1.clone() * c2.clone())));
            }
        }
        out
    }

    fn verify_jacobi(&self) -> Result<()> {
        let rank = self.rank();
        let mut basis: Vec<LieElement> = Vec::new();
        for i in 0..rank {
            let mut h = vec![Q::zero(); rank];
            h[i] = Q::one();
            basis.push(LieElement::cartan(h));
        }
        for g in self.rs.positive_roots() {
            basis.push(LieElement::root_vector(rank, g.clone(), Q::one()));
            basis.push(LieElement::root_vector(rank, g.neg(), Q::one()));
        }
        for x in &basis {
            for y in &basis {
                for z in &basis {
                    let j = self
                        .bracket(&self.bracket(x, y), z)
                        .add(&self.bracket(&self.bracket(y, z), x))
                        .add(&self.bracket(&self.bracket(z, x), y));
                    if !j.is_zero() {
                        return Err(EngineError::Inconsistent(format!(
                            "Jacobi identity fails on ({x}, {y}, {z})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn verify_magnitudes(&self) -> Result<()> {
        for g in all_roots(&self.rs) {
            for d in all_roots(&self.rs) {
                let s = g.add(&d);
                if !self.rs.is_root(&s) {
                    continue;
                }
                let n = self.struct_const(&g, &d);
                let p = p_value(&self.rs, &g, &d);
                if n.unsigned_abs() as i64 != p + 1 {
                    return Err(EngineError::Inconsistent(format!(
                        "|N({g},{d})| = {} but p+1 = {}",
                        n.abs(),
                        p + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn all_roots(rs: &RootSystem) -> Vec<Root> {
    let mut v: Vec<Root> = rs.positive_roots().to_vec();
    v.extend(rs.positive_roots().iter().map(Root::neg));
    v
}

/// Largest p ≥ 0 with δ − p·γ a root.
fn p_value(rs: &RootSystem, gamma: &Root, delta: &Root) -> i64 {
    let mut p = 0i64;
    loop {
        let mut down = delta.clone();
        for _ in 0..=p {
            down = down.sub(gamma);
        }
        if rs.is_root(&down) {
            p += 1;
        } else {
            return p;
        }
    }
}

/// Structure constants for ordered pairs of positive roots, keyed by the pair.
type PosTable = HashMap<(Root, Root), i64>;

fn n_pos(table: &PosTable, a: &Root, b: &Root) -> i64 {
    table.get(&(a.clone(), b.clone())).copied().unwrap_or(0)
}

/// [e_γ, e_{−δ}] for positive γ ≠ δ, from the positive table via the Jacobi
/// triangle relations N_{δ,ξ}·d_δ/d_{δ+ξ} = N_{ξ,−δ−ξ}; returns the image
/// root and exact rational constant.
fn mixed_bracket(
    rs: &RootSystem,
    table: &PosTable,
    gamma: &Root,
    delta: &Root,
) -> Option<(Root, Q)> {
    let diff = gamma.sub(delta);
    if diff.is_zero() || !rs.is_root(&diff) {
        return None;
    }
    if diff.is_positive() {
        // ξ = γ − δ > 0: N(γ,−δ) = −N(δ,ξ)·d_ξ/d_γ
        let xi = diff;
        let n = n_pos(table, delta, &xi);
        let c = q_int(-n * rs.half_norm(&xi)) / q_int(rs.half_norm(gamma));
        Some((xi, c))
    } else {
        // ζ = δ − γ > 0: N(γ,−δ) = N(ζ,γ)·d_ζ/d_δ
        let zeta = diff.neg();
        let n = n_pos(table, &zeta, gamma);
        let c = q_int(n * rs.half_norm(&zeta)) / q_int(rs.half_norm(delta));
        Some((zeta.neg(), c))
    }
}

fn build_positive_table(rs: &RootSystem, conv: SignConvention) -> Result<PosTable> {
    let mut table = PosTable::new();
    let sign = match conv {
        SignConvention::ExtraspecialPositive => 1i64,
        SignConvention::ExtraspecialNegative => -1i64,
    };
    // positive roots come ordered by height then lex
    for theta in rs.positive_roots() {
        if theta.height() == 1 {
            continue;
        }
        // special pairs (α, β), α before β in the enumeration, α + β = θ
        let mut pairs = Vec::new();
        for (i, alpha) in rs.positive_roots().iter().enumerate() {
            let beta = theta.sub(alpha);
            if !beta.is_positive() || !rs.is_positive_root(&beta) {
                continue;
            }
            let j = rs.positive_roots().iter().position(|r| r == &beta).unwrap();
            if i < j {
                pairs.push((alpha.clone(), beta));
            }
        }
        if pairs.is_empty() {
            return Err(EngineError::Inconsistent(format!(
                "no special pair for {theta}"
            )));
        }
        let (eps, eta) = pairs[0].clone();
        let n_extra = sign * (p_value(rs, &eps, &eta) + 1);
        table.insert((eps.clone(), eta.clone()), n_extra);
        table.insert((eta.clone(), eps.clone()), -n_extra);

        for (alpha, beta) in pairs.iter().skip(1) {
            // Jacobi on (e_ε, e_η, e_{−α}):
            //   N(ε,η)·N(θ,−α) = c(e_ε,[e_η,e_{−α}]) − c(e_η,[e_ε,e_{−α}])
            // with N(θ,−α) = −N(α,β)·d_β/d_θ carrying the unknown.
            let mut rhs = Q::zero();
            if let Some((s, c1)) = mixed_bracket(rs, &table, &eta, alpha) {
                rhs += c1 * bracket_onto(rs, &table, &eps, &s, beta)?;
            }
            if let Some((t, c2)) = mixed_bracket(rs, &table, &eps, alpha) {
                rhs -= c2 * bracket_onto(rs, &table, &eta, &t, beta)?;
            }
            let denom = q_int(-n_extra * rs.half_norm(beta)) / q_int(rs.half_norm(theta));
            let u = rhs / denom;
            if !u.is_integer() {
                return Err(EngineError::Inconsistent(format!(
                    "non-integral structure constant for ({alpha},{beta})"
                )));
            }
            let u: i64 = i64::try_from(&u.to_integer())
                .map_err(|_| EngineError::Inconsistent("structure constant overflow".into()))?;
            table.insert((alpha.clone(), beta.clone()), u);
            table.insert((beta.clone(), alpha.clone()), -u);
        }
    }
    Ok(table)
}

/// Coefficient of e_target in [e_a, e_s] where a is positive and s has either
/// sign; only consults table entries for sums of smaller height.
fn bracket_onto(rs: &RootSystem, table: &PosTable, a: &Root, s: &Root, target: &Root) -> Result<Q> {
    let sum = a.add(s);
    if &sum != target {
        return Ok(Q::zero());
    }
    if s.is_positive() {
        Ok(q_int(n_pos(table, a, s)))
    } else {
        let d = s.neg();
        match mixed_bracket(rs, table, a, &d) {
            Some((r, c)) if &r == target => Ok(c),
            _ => Ok(Q::zero()),
        }
    }
}

fn assemble_full_table(
    rs: &RootSystem,
    pos: &PosTable,
) -> Result<HashMap<(Root, Root), BracketVal>> {
    let mut out = HashMap::new();
    let roots = all_roots(rs);
    for g in &roots {
        for d in &roots {
            let sum = g.add(d);
            if sum.is_zero() {
                let co = rs.coroot(g);
                out.insert((g.clone(), d.clone()), BracketVal::Coroot(co));
                continue;
            }
            if !rs.is_root(&sum) {
                continue;
            }
            let c: Q = match (g.is_positive(), d.is_positive()) {
                (true, true) => q_int(n_pos(pos, g, d)),
                (false, false) => q_int(-n_pos(pos, &g.neg(), &d.neg())),
                (true, false) => {
                    let (_, c) = mixed_bracket(rs, pos, g, &d.neg())
                        .ok_or_else(|| EngineError::Inconsistent("missing mixed bracket".into()))?;
                    c
                }
                (false, true) => {
                    let (_, c) = mixed_bracket(rs, pos, d, &g.neg())
                        .ok_or_else(|| EngineError::Inconsistent("missing mixed bracket".into()))?;
                    -c
                }
            };
            if !c.is_integer() {
                return Err(EngineError::Inconsistent(format!(
                    "non-integral constant at ({g},{d})"
                )));
            }
            let ci = i64::try_from(&c.to_integer())
                .map_err(|_| EngineError::Inconsistent("constant overflow".into()))?;
            if ci != 0 {
                out.insert((g.clone(), d.clone()), BracketVal::Root(sum, ci));
            }
        }
    }
    Ok(out)
}

/// Ad e^x applied to y as the finite exact series Σ (ad x)^n(y)/n!; x must be
/// supported on root vectors of a single sign.
pub fn ad_exp(alg: &Algebra, x: &LieElement, y: &LieElement) -> Result<LieElement> {
    if !x.h.iter().all(Q::is_zero) {
        return Err(EngineError::NotNilpotent(format!(
            "{x} has a Cartan component"
        )));
    }
    let pos = x.e.keys().any(|g| g.is_positive());
    let neg = x.e.keys().any(|g| !g.is_positive());
    if pos && neg {
        return Err(EngineError::NotNilpotent(format!(
            "{x} mixes positive and negative root vectors"
        )));
    }
    let mut acc = y.clone();
    let mut term = y.clone();
    let mut n: i64 = 1;
    let bound = 4 * alg.rs().num_positive() + 4;
    loop {
        term = alg.bracket(x, &term).scale(&(Q::one() / q_int(n)));
        if term.is_zero() {
            return Ok(acc);
        }
        acc = acc.add(&term);
        n += 1;
        if n as usize > bound {
            return Err(EngineError::NotNilpotent(format!(
                "ad {x} did not nilpotate within {bound} steps"
            )));
        }
    }
}

/// Result of the triangular decomposition of a regular Borel element:
/// `factors` lists (β_i, t_i) in processing order (β_N downwards), and
/// applying Ad e^{−t e_β} in reverse order to `h_part` reproduces the input.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub factors: Vec<(Root, Q)>,
    pub reduced: LieElement,
}

impl Decomposition {
    pub fn h_part(&self) -> &LieElement {
        &self.reduced
    }
}

/// Checks y ∈ b and regularity of its Cartan part.
fn check_borel_regular(alg: &Algebra, y: &LieElement) -> Result<()> {
    for g in y.e.keys() {
        if !g.is_positive() {
            return Err(EngineError::NotInBorel(format!("component on e{g}")));
        }
    }
    for alpha in alg.rs().positive_roots() {
        if y.cartan_pairing(alg.rs(), alpha).is_zero() {
            return Err(EngineError::NonRegular(alpha.to_string()));
        }
    }
    Ok(())
}

/// Full decomposition: processes β_N down to β_1, ending exactly on the
/// Cartan part.
pub fn decompose(
    alg: &Algebra,
    y: &LieElement,
    ordering: &NormalOrdering,
) -> Result<Decomposition> {
    let d = partial_decompose(alg, y, ordering, 1)?;
    debug_assert!(d.reduced.e.is_empty());
    Ok(d)
}

/// Partial decomposition: processes β_N down to β_k; the reduced element is
/// supported on h and {β_1,…,β_{k−1}}.
pub fn partial_decompose(
    alg: &Algebra,
    y: &LieElement,
    ordering: &NormalOrdering,
    k: usize,
) -> Result<Decomposition> {
    let n = ordering.len();
    if k < 1 || k > n + 1 {
        return Err(EngineError::IndexRange(format!(
            "partial index k = {k} not in 1..={}",
            n + 1
        )));
    }
    check_borel_regular(alg, y)?;
    let mut cur = y.clone();
    let mut factors = Vec::new();
    for i in (k..=n).rev() {
        let beta = ordering.beta(i).clone();
        let c = cur.coeff(&beta);
        let a = cur.cartan_pairing(alg.rs(), &beta);
        let t = c / a;
        let x = LieElement::root_vector(alg.rank(), beta.clone(), t.clone());
        cur = ad_exp(alg, &x, &cur)?;
        debug_assert!(cur.coeff(&beta).is_zero());
        factors.push((beta, t));
    }
    for g in cur.e.keys() {
        let pos = ordering.position(g).expect("positive root");
        if pos + 1 >= k {
            return Err(EngineError::Inconsistent(format!(
                "reduction left support on {g} at position {} ≥ k = {k}",
                pos + 1
            )));
        }
    }
    Ok(Decomposition {
        factors,
        reduced: cur,
    })
}

/// Replays a decomposition: Ad e^{−t_N e_{β_N}} ∘ … ∘ Ad e^{−t_k e_{β_k}}
/// applied to the reduced element, reproducing the original input exactly.
pub fn replay(alg: &Algebra, d: &Decomposition) -> Result<LieElement> {
    let mut cur = d.reduced.clone();
    for (beta, t) in d.factors.iter().rev() {
        let x = LieElement::root_vector(alg.rank(), beta.clone(), -t.clone());
        cur = ad_exp(alg, &x, &cur)?;
    }
    Ok(cur)
}
