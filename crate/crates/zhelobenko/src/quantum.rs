//! PBW engine for the localized enveloping algebra U(g)′ = U(g) ⊗_{U(h)} D(h),
//! the universal Verma module V = U(g)′/U(g)′n and its Weyl twists V_w, the
//! extremal projector p, and the quantum Zhelobenko operators q′_α and q_w.
//!
//! Canonical form: every element is a sum of monomials (left block)·φ(h)·
//! (right block), where the right block spans the quotient ideal n^w and the
//! left block its opposite; for the standard context the left block is
//! e_{−β_1}…e_{−β_N} and the right block e_{β_1}…e_{β_N} along the active
//! normal ordering.  Reduction modulo U(g)′n^w is then a term filter on the
//! right block.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::chevalley::{Algebra, LieElement};
use crate::coeffs::{q_int, CartanPoly, CorootShift, QuantumLocRat, Q};
use crate::error::{EngineError, Result};
use crate::roots::{weyl_from_suffix, NormalOrdering, Root};

/// Ordered PBW basis split into a left block and a right block; the right
/// block generates the ideal quotiented away by the module reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PbwContext {
    left: Vec<Root>,
    right: Vec<Root>,
    pos: HashMap<Root, usize>,
}

impl PbwContext {
    fn from_blocks(left: Vec<Root>, right: Vec<Root>) -> Arc<PbwContext> {
        let n = left.len();
        let mut pos = HashMap::new();
        for (i, r) in left.iter().enumerate() {
            pos.insert(r.clone(), i);
        }
        for (i, r) in right.iter().enumerate() {
            pos.insert(r.clone(), n + i);
        }
        Arc::new(PbwContext { left, right, pos })
    }

    /// Standard context for V: F-block e_{−β_i}, E-block e_{β_i}.
    pub fn standard(ordering: &NormalOrdering) -> Arc<PbwContext> {
        Self::from_blocks(
            ordering.roots().iter().map(Root::neg).collect(),
            ordering.roots().to_vec(),
        )
    }

    /// Context for V_w with w = s_{β_k}…s_{β_N}: right block e_{w(β_i)}
    /// spans n^w; k = N+1 recovers the standard context.
    pub fn twisted(alg: &Algebra, ordering: &NormalOrdering, k: usize) -> Result<Arc<PbwContext>> {
        let w = weyl_from_suffix(alg.rs(), ordering, k)?;
        let right: Vec<Root> = ordering.roots().iter().map(|b| w.apply(b)).collect();
        let left: Vec<Root> = right.iter().map(Root::neg).collect();
        Ok(Self::from_blocks(left, right))
    }

    pub fn size(&self) -> usize {
        self.left.len()
    }

    pub fn left_roots(&self) -> &[Root] {
        &self.left
    }

    pub fn right_roots(&self) -> &[Root] {
        &self.right
    }

    fn order_index(&self, r: &Root) -> usize {
        self.pos[r]
    }
}

/// One factor of a raw product before normalization.
#[derive(Clone, Debug)]
pub enum Atom {
    R(Root),
    C(QuantumLocRat),
}

type Key = (Vec<u32>, Vec<u32>);

/// Element of U(g)′ in PBW normal form relative to a context.
#[derive(Clone, Debug)]
pub struct UElement {
    ctx: Arc<PbwContext>,
    terms: std::collections::BTreeMap<Key, QuantumLocRat>,
}

impl PartialEq for UElement {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.left == other.ctx.left
            && self.ctx.right == other.ctx.right
            && self.terms == other.terms
    }
}

impl UElement {
    pub fn zero(ctx: Arc<PbwContext>) -> Self {
        UElement {
            ctx,
            terms: Default::default(),
        }
    }

    pub fn one(alg: &Algebra, ctx: Arc<PbwContext>) -> Self {
        Self::coefficient(ctx, QuantumLocRat::one(alg.rank()))
    }

    pub fn coefficient(ctx: Arc<PbwContext>, c: QuantumLocRat) -> Self {
        let mut u = Self::zero(ctx);
        if !c.is_zero() {
            let n = u.ctx.size();
            u.terms.insert((vec![0; n], vec![0; n]), c);
        }
        u
    }

    pub fn ctx(&self) -> &Arc<PbwContext> {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Key, &QuantumLocRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, alg: &Algebra, key: Key, c: QuantumLocRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(alg.rs(), &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, alg: &Algebra, rhs: &Self) -> Self {
        debug_assert_eq!(self.ctx, rhs.ctx);
        let mut out = self.clone();
        for (k, c) in &rhs.terms {
            out.insert(alg, k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, alg: &Algebra, rhs: &Self) -> Self {
        self.add(alg, &rhs.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.ctx.clone());
        }
        UElement {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.clone(), v.scale(c)))
                .collect(),
        }
    }

    /// Expands one canonical term back into an atom sequence.
    fn term_atoms(&self, key: &Key, c: &QuantumLocRat) -> Vec<Atom> {
        let mut atoms = Vec::new();
        for (i, &p) in key.0.iter().enumerate() {
            for _ in 0..p {
                atoms.push(Atom::R(self.ctx.left[i].clone()));
            }
        }
        atoms.push(Atom::C(c.clone()));
        for (i, &p) in key.1.iter().enumerate() {
            for _ in 0..p {
                atoms.push(Atom::R(self.ctx.right[i].clone()));
            }
        }
        atoms
    }

    pub fn to_atom_products(&self) -> Vec<Vec<Atom>> {
        self.terms
            .iter()
            .map(|(k, c)| self.term_atoms(k, c))
            .collect()
    }

    /// Total degree of the left block (the F-degree in the standard context).
    pub fn left_degree(&self, key: &Key) -> u32 {
        key.0.iter().sum()
    }

    /// The part with left block empty and right block empty: the D(h)-piece.
    pub fn cartan_part(&self) -> Self {
        UElement {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.0.iter().all(|&p| p == 0) && k.1.iter().all(|&p| p == 0))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops every term with a nonempty right block: reduction modulo
    /// U(g)′·n^w for the context's quotient ideal.
    pub fn reduce_right(&self) -> Self {
        UElement {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| k.1.iter().all(|&p| p == 0))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn has_right_support(&self) -> bool {
        self.terms.keys().any(|k| k.1.iter().any(|&p| p > 0))
    }

    /// True when every Cartan coefficient is a polynomial (no denominators):
    /// the termination domain of the Zhelobenko series.
    pub fn has_polynomial_coeffs(&self) -> bool {
        self.terms.values().all(QuantumLocRat::is_polynomial)
    }
}

impl fmt::Display for UElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let mut s = String::new();
            for (i, &p) in k.0.iter().enumerate() {
                if p > 0 {
                    s.push_str(&format!("F{}", self.ctx.left[i].neg()));
                    if p > 1 {
                        s.push_str(&format!("^{p}"));
                    }
                    s.push('*');
                }
            }
            s.push_str(&format!("({c})"));
            for (i, &p) in k.1.iter().enumerate() {
                if p > 0 {
                    s.push_str(&format!("*E{}", self.ctx.right[i]));
                    if p > 1 {
                        s.push_str(&format!("^{p}"));
                    }
                }
            }
            parts.push(s);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Straightens one sorted-word-plus-appended-root product into PBW form by
/// adjacent-transposition rewriting: x·y = y·x + [x,y], with the coefficient
/// carried at the front through weight shifts.  Terminates by the
/// (length, inversion-count) filtration.
fn straighten(
    alg: &Algebra,
    ctx: &Arc<PbwContext>,
    out: &mut UElement,
    coeff: QuantumLocRat,
    word: Vec<Root>,
) {
    let rank = alg.rank();
    let mut work: Vec<(QuantumLocRat, Vec<Root>)> = vec![(coeff, word)];
    while let Some((c, w)) = work.pop() {
        if c.is_zero() {
            continue;
        }
        // leftmost adjacent inversion
        let inv = (0..w.len().saturating_sub(1))
            .find(|&i| ctx.order_index(&w[i]) > ctx.order_index(&w[i + 1]));
        match inv {
            None => {
                // canonical: split into blocks, move the coefficient from the
                // front to the middle (shift by the left-block weight)
                let n = ctx.size();
                let mut fdeg = vec![0u32; n];
                let mut edeg = vec![0u32; n];
                let mut f_weight = Root(vec![0; rank]);
                for r in &w {
                    let idx = ctx.order_index(r);
                    if idx < n {
                        fdeg[idx] += 1;
                        f_weight = f_weight.add(r);
                    } else {
                        edeg[idx - n] += 1;
                    }
                }
                let mid = c.shifted(alg.rs(), &f_weight);
                out.insert(alg, (fdeg, edeg), mid);
            }
            Some(i) => {
                // w[i]·w[i+1] = w[i+1]·w[i] + [w[i], w[i+1]]
                let mut swapped = w.clone();
                swapped.swap(i, i + 1);
                work.push((c.clone(), swapped));
                let br = alg.bracket_basis(&w[i], &w[i + 1]);
                for (delta, coefficient) in &br.e {
                    let mut shorter = Vec::with_capacity(w.len() - 1);
                    shorter.extend_from_slice(&w[..i]);
                    shorter.push(delta.clone());
                    shorter.extend_from_slice(&w[i + 2..]);
                    work.push((c.scale(coefficient), shorter));
                }
                if br.h.iter().any(|x| !x.is_zero()) {
                    // Cartan piece: a polynomial atom at position i crossing
                    // the prefix to the front
                    let coeffs: Vec<i64> =
                        br.h.iter()
                            .map(|x| {
                                debug_assert!(x.is_integer());
                                i64::try_from(&x.to_integer()).expect("coroot coordinate")
                            })
                            .collect();
                    let hpoly =
                        QuantumLocRat::from_poly(CartanPoly::linear(rank, &coeffs, Q::zero()));
                    let mut prefix = Root(vec![0; rank]);
                    for r in &w[..i] {
                        prefix = prefix.add(r);
                    }
                    let fronted = hpoly.shifted(alg.rs(), &prefix.neg());
                    let mut shorter = Vec::with_capacity(w.len() - 2);
                    shorter.extend_from_slice(&w[..i]);
                    shorter.extend_from_slice(&w[i + 2..]);
                    work.push((c.mul(alg.rs(), &fronted), shorter));
                }
            }
        }
    }
}

/// Right-multiplies a canonical element by a single atom.  Coefficient atoms
/// migrate to the middle in one weight shift per term; root atoms re-enter
/// the straightener, and canonical merging after every atom keeps the term
/// count small.
pub fn mul_atom(alg: &Algebra, u: &UElement, atom: &Atom) -> UElement {
    let ctx = &u.ctx;
    let n = ctx.size();
    let mut out = UElement::zero(ctx.clone());
    match atom {
        Atom::C(phi) => {
            for (k, c) in u.terms.iter() {
                // φ crosses the E-word leftward: shift by −wt(E)
                let mut e_weight = Root(vec![0; alg.rank()]);
                for (i, &p) in k.1.iter().enumerate() {
                    for _ in 0..p {
                        e_weight = e_weight.add(&ctx.right[i]);
                    }
                }
                let shifted = phi.shifted(alg.rs(), &e_weight.neg());
                out.insert(alg, k.clone(), c.mul(alg.rs(), &shifted));
            }
        }
        Atom::R(r) => {
            for (k, c) in u.terms.iter() {
                // front coefficient = middle coefficient shifted back by wt(F)
                let mut f_weight = Root(vec![0; alg.rank()]);
                let mut word = Vec::new();
                for (i, &p) in k.0.iter().enumerate() {
                    for _ in 0..p {
                        word.push(ctx.left[i].clone());
                        f_weight = f_weight.add(&ctx.left[i]);
                    }
                }
                for (i, &p) in k.1.iter().enumerate() {
                    for _ in 0..p {
                        word.push(ctx.right[i].clone());
                    }
                }
                word.push(r.clone());
                let front = c.shifted(alg.rs(), &f_weight.neg());
                straighten(alg, ctx, &mut out, front, word);
            }
        }
    }
    let _ = n;
    out
}

/// Normal form of a scaled product of atoms, folded left to right.
pub fn normalize(alg: &Algebra, ctx: &Arc<PbwContext>, scale: Q, atoms: &[Atom]) -> UElement {
    let mut u = UElement::coefficient(ctx.clone(), QuantumLocRat::constant(alg.rank(), scale));
    for a in atoms {
        if u.is_zero() {
            return u;
        }
        u = mul_atom(alg, &u, a);
    }
    u
}

/// Normal form of an arbitrary product of basis symbols and coefficients.
pub fn pbw_normal_form(alg: &Algebra, ctx: &Arc<PbwContext>, atoms: &[Atom]) -> UElement {
    normalize(alg, ctx, Q::one(), atoms)
}

/// Re-expresses an element in another PBW context.
pub fn convert(alg: &Algebra, u: &UElement, ctx: &Arc<PbwContext>) -> UElement {
    let mut out = UElement::zero(ctx.clone());
    for (k, c) in u.terms.iter() {
        let atoms = u.term_atoms(k, c);
        out = out.add(alg, &normalize(alg, ctx, Q::one(), &atoms));
    }
    out
}

pub fn mul(alg: &Algebra, a: &UElement, b: &UElement) -> UElement {
    debug_assert_eq!(a.ctx, b.ctx);
    let mut out = UElement::zero(a.ctx.clone());
    for (kb, cb) in b.terms.iter() {
        let mut cur = a.clone();
        for atom in b.term_atoms(kb, cb) {
            cur = mul_atom(alg, &cur, &atom);
        }
        out = out.add(alg, &cur);
    }
    out
}

/// Embeds a Lie algebra element as a degree-one element of U(g)′.
pub fn from_lie(alg: &Algebra, ctx: &Arc<PbwContext>, x: &LieElement) -> UElement {
    let rank = alg.rank();
    let mut out = UElement::zero(ctx.clone());
    if x.h.iter().any(|c| !c.is_zero()) {
        let mut poly = CartanPoly::zero(rank);
        for (i, c) in x.h.iter().enumerate() {
            poly = poly.add(&CartanPoly::var(rank, i).scale(c));
        }
        out = out.add(
            alg,
            &UElement::coefficient(ctx.clone(), QuantumLocRat::from_poly(poly)),
        );
    }
    for (g, c) in &x.e {
        out = out.add(alg, &normalize(alg, ctx, c.clone(), &[Atom::R(g.clone())]));
    }
    out
}

/// ad e_α(u) = e_α·u − u·e_α.
pub fn ad_e(alg: &Algebra, alpha: &Root, u: &UElement) -> UElement {
    let e = from_lie(
        alg,
        &u.ctx.clone(),
        &LieElement::root_vector(alg.rank(), alpha.clone(), Q::one()),
    );
    mul(alg, &e, u).sub(alg, &mul(alg, u, &e))
}

/// Canonical vector of the (possibly twisted) universal Verma module: an
/// element with empty right block.
#[derive(Clone, Debug, PartialEq)]
pub struct VermaVector(UElement);

impl VermaVector {
    pub fn reduce(u: &UElement) -> VermaVector {
        VermaVector(u.reduce_right())
    }

    pub fn vacuum(alg: &Algebra, ctx: Arc<PbwContext>) -> VermaVector {
        VermaVector(UElement::one(alg, ctx))
    }

    pub fn as_u(&self) -> &UElement {
        &self.0
    }

    pub fn into_u(self) -> UElement {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn add(&self, alg: &Algebra, rhs: &Self) -> Self {
        VermaVector(self.0.add(alg, &rhs.0))
    }

    pub fn sub(&self, alg: &Algebra, rhs: &Self) -> Self {
        VermaVector(self.0.sub(alg, &rhs.0))
    }

    pub fn scale(&self, c: &Q) -> Self {
        VermaVector(self.0.scale(c))
    }

    /// The component of PBW left-degree zero: the D(h)·v₀ part.
    pub fn constant_component(&self) -> Self {
        VermaVector(self.0.cartan_part())
    }
}

impl fmt::Display for VermaVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_zero() {
            write!(f, "0")
        } else {
            write!(f, "({})*v0", self.0)
        }
    }
}

/// Left action of a Lie algebra element on a Verma vector.
pub fn act(alg: &Algebra, x: &LieElement, v: &VermaVector) -> VermaVector {
    let xe = from_lie(alg, v.0.ctx(), x);
    VermaVector::reduce(&mul(alg, &xe, &v.0))
}

fn act_root(alg: &Algebra, gamma: &Root, v: &VermaVector) -> VermaVector {
    act(
        alg,
        &LieElement::root_vector(alg.rank(), gamma.clone(), Q::one()),
        v,
    )
}

/// p_α(t) = Σ_n (−1)ⁿ/n!·f_{α,n}(t)^{−1}·e_{−α}ⁿ·e_αⁿ with
/// f_{α,n}(t) = Π_{j=1..n} (h_α + t + j), the inverse acting by left
/// multiplication; finite on V by local nilpotency of e_α.
pub fn p_alpha_t(alg: &Algebra, alpha: &Root, t: &Q, v: &VermaVector) -> Result<VermaVector> {
    if !t.is_integer() {
        return Err(EngineError::InadmissibleFactor(format!(
            "p_α parameter t = {t} must be an integer for denominators to stay in D(h)"
        )));
    }
    let t_int = i64::try_from(&t.to_integer())
        .map_err(|_| EngineError::InadmissibleFactor("t overflow".into()))?;
    let mut acc = v.clone();
    let mut y = v.clone();
    let mut n: u32 = 0;
    let mut sign = Q::one();
    let mut factorial = Q::one();
    let bound = 16 * (alg.rs().num_positive() as u32 + 1);
    loop {
        y = act_root(alg, alpha, &y);
        if y.is_zero() {
            return Ok(acc);
        }
        n += 1;
        if n > bound {
            return Err(EngineError::SeriesDiverges {
                root: alpha.to_string(),
                depth: bound as usize,
            });
        }
        sign = -sign;
        factorial *= q_int(n as i64);
        let keys: Vec<CorootShift> = (1..=n as i64)
            .map(|j| CorootShift {
                root: alpha.clone(),
                shift: t_int + j,
            })
            .collect();
        let f_inv = QuantumLocRat::one(alg.rank()).div_factors(alg.rs(), &keys);
        let mut atoms = vec![Atom::C(f_inv)];
        for _ in 0..n {
            atoms.push(Atom::R(alpha.neg()));
        }
        let left = normalize(alg, y.0.ctx(), Q::one(), &atoms);
        let term = mul(alg, &left, &y.0);
        acc = acc.add(
            alg,
            &VermaVector::reduce(&term).scale(&(sign.clone() / factorial.clone())),
        );
    }
}

/// Extremal projector p = p_{β_N}(ρ(h_{β_N}))·…·p_{β_1}(ρ(h_{β_1})),
/// applied with p_{β_1} first.
pub fn extremal_projector(
    alg: &Algebra,
    ordering: &NormalOrdering,
    v: &VermaVector,
) -> Result<VermaVector> {
    let mut cur = v.clone();
    for i in 1..=ordering.len() {
        let beta = ordering.beta(i);
        let t = q_int(alg.rs().rho_coroot(beta));
        cur = p_alpha_t(alg, beta, &t, &cur)?;
    }
    Ok(cur)
}

/// One Zhelobenko series factor
/// q′_α(x) = Σ_n (−1)ⁿ/n!·(ad e_α)ⁿ(x)·e_{−α}ⁿ·g_{α,n}^{−1} with
/// g_{α,n} = Π_{j=1..n} (h_α + 1 − j), the inverse multiplying on the right;
/// terminates exactly when the ad-chain vanishes, which holds for polynomial
/// Cartan coefficients.
pub fn zhelobenko_q_alpha(
    alg: &Algebra,
    alpha: &Root,
    u: &UElement,
    max_depth: usize,
) -> Result<UElement> {
    if !u.has_polynomial_coeffs() {
        // finite differences of genuinely rational coefficients never vanish;
        // the formal series lives in Zhelobenko's completion, out of scope
        return Err(EngineError::TerminationDomain(format!(
            "canonical Cartan coefficients are not polynomial; q'_{alpha} is a formal series here"
        )));
    }
    let mut acc = u.clone();
    let mut a = u.clone();
    let mut n: u32 = 0;
    let mut sign = Q::one();
    let mut factorial = Q::one();
    loop {
        a = ad_e(alg, alpha, &a);
        if a.is_zero() {
            return Ok(acc);
        }
        n += 1;
        if n as usize > max_depth {
            return Err(EngineError::SeriesDiverges {
                root: alpha.to_string(),
                depth: max_depth,
            });
        }
        sign = -sign;
        factorial *= q_int(n as i64);
        let keys: Vec<CorootShift> = (1..=n as i64)
            .map(|j| CorootShift {
                root: alpha.clone(),
                shift: 1 - j,
            })
            .collect();
        let g_inv = QuantumLocRat::one(alg.rank()).div_factors(alg.rs(), &keys);
        let mut term = a.clone();
        for _ in 0..n {
            term = mul_atom(alg, &term, &Atom::R(alpha.neg()));
        }
        term = mul_atom(alg, &term, &Atom::C(g_inv));
        acc = acc.add(alg, &term.scale(&(sign.clone() / factorial.clone())));
    }
}

/// Quantum Zhelobenko operator q_w: V_w → V for w = s_{β_k}…s_{β_N}, applied
/// to a representative in U(g)′.  Stage i applies q′_{β_i} and reduces the
/// result modulo U(g)′·n^{w_{i+1}} for the remaining suffix element w_{i+1};
/// the final stage reduces modulo U(g)′·n, landing in V.
pub fn zhelobenko_qw_representative(
    alg: &Algebra,
    ordering: &NormalOrdering,
    k: usize,
    rep: &UElement,
    max_depth: usize,
) -> Result<VermaVector> {
    let n = ordering.len();
    if k < 1 || k > n + 1 {
        return Err(EngineError::IndexRange(format!(
            "suffix index k = {k} not in 1..={}",
            n + 1
        )));
    }
    let mut cur = rep.clone();
    for i in k..=n {
        let ctx_next = PbwContext::twisted(alg, ordering, i + 1)?;
        let staged = convert(alg, &cur, &ctx_next);
        let out = zhelobenko_q_alpha(alg, ordering.beta(i), &staged, max_depth)?;
        cur = out.reduce_right();
    }
    if k == n + 1 {
        cur = convert(alg, &cur, &PbwContext::standard(ordering)).reduce_right();
    }
    Ok(VermaVector(cur))
}

/// q_w on a canonical twisted Verma vector.
pub fn zhelobenko_qw(
    alg: &Algebra,
    ordering: &NormalOrdering,
    k: usize,
    x: &VermaVector,
    max_depth: usize,
) -> Result<VermaVector> {
    zhelobenko_qw_representative(alg, ordering, k, x.as_u(), max_depth)
}
