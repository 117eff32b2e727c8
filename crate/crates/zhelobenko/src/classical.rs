//! Localized function algebras on g, on the Borel subalgebra and on its Weyl
//! twists, with the Hamiltonian action of the nilradical; the classical
//! projectors P_α, P and P_{≥k}; and the classical Zhelobenko operators Q_w,
//! both as geometric substitution along the triangular decomposition and as
//! the multiplicative series.
//!
//! Coordinates: the symbol ê_γ reads the coefficient of e_{−γ}, so functions
//! on b are polynomials in ê_{−α}, α ∈ Δ₊, and functions on b^w in ê_{−γ},
//! γ ∈ wΔ₊, all with coefficients in C\[h\]′.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};

use crate::chevalley::Algebra;
use crate::coeffs::{q_int, CartanPoly, ClassicalLocRat, DenKey, RootFactor, Q};
use crate::error::{EngineError, Result};
use crate::roots::{weyl_from_suffix, NormalOrdering, Root, RootSystem};

/// Which space a function lives on.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Carrier {
    /// All of g: symbols ê_γ for every γ ∈ Δ.
    Full,
    /// b = h ⊕ n: symbols ê_{−α}, α ∈ Δ₊.
    Borel,
    /// b^w: symbols ê_{−γ}, γ ∈ wΔ₊ (the set stores wΔ₊).
    Twisted(BTreeSet<Root>),
}

impl Carrier {
    fn allows(&self, rs: &RootSystem, sym: &Root) -> bool {
        match self {
            Carrier::Full => rs.is_root(sym),
            Carrier::Borel => rs.is_positive_root(&sym.neg()),
            Carrier::Twisted(wpos) => wpos.contains(&sym.neg()),
        }
    }
}

/// The twisted carrier of w realized by the suffix s_{β_k}…s_{β_N}.
pub fn twisted_carrier(alg: &Algebra, ordering: &NormalOrdering, k: usize) -> Result<Carrier> {
    let w = weyl_from_suffix(alg.rs(), ordering, k)?;
    Ok(Carrier::Twisted(
        alg.rs()
            .positive_roots()
            .iter()
            .map(|a| w.apply(a))
            .collect(),
    ))
}

/// Monomial in the ê-symbols.
pub type Monomial = BTreeMap<Root, u32>;

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = a.clone();
    for (g, &m) in b {
        *out.entry(g.clone()).or_insert(0) += m;
    }
    out
}

fn mono_height(m: &Monomial) -> i64 {
    m.iter().map(|(g, &p)| g.height().abs() * p as i64).sum()
}

/// Sparse polynomial in the ê-symbols with localized Cartan coefficients.
#[derive(Clone, PartialEq, Debug)]
pub struct PolyFunc {
    pub carrier: Carrier,
    terms: BTreeMap<Monomial, ClassicalLocRat>,
}

impl PolyFunc {
    pub fn zero(carrier: Carrier) -> Self {
        PolyFunc {
            carrier,
            terms: BTreeMap::new(),
        }
    }

    pub fn coefficient(carrier: Carrier, c: ClassicalLocRat) -> Self {
        let mut f = Self::zero(carrier);
        if !c.is_zero() {
            f.terms.insert(Monomial::new(), c);
        }
        f
    }

    pub fn one(rank: usize, carrier: Carrier) -> Self {
        Self::coefficient(carrier, ClassicalLocRat::one(rank))
    }

    /// The symbol ê_γ as a function.
    pub fn symbol(alg: &Algebra, carrier: Carrier, gamma: &Root) -> Result<Self> {
        if !carrier.allows(alg.rs(), gamma) {
            return Err(EngineError::CarrierMismatch(format!(
                "symbol e^{gamma} not allowed on this carrier"
            )));
        }
        let mut f = Self::zero(carrier);
        f.terms.insert(
            Monomial::from([(gamma.clone(), 1)]),
            ClassicalLocRat::one(alg.rank()),
        );
        Ok(f)
    }

    /// ĥ_γ = γ(h) as a coefficient-only function (γ any lattice vector).
    pub fn h_hat(alg: &Algebra, carrier: Carrier, gamma: &Root) -> Self {
        let rank = alg.rank();
        let coeffs: Vec<i64> = (0..rank)
            .map(|i| alg.rs().pairing_simple(gamma, i))
            .collect();
        Self::coefficient(
            carrier,
            ClassicalLocRat::from_poly(CartanPoly::linear(rank, &coeffs, Q::zero())),
        )
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &ClassicalLocRat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn insert(&mut self, rs: &RootSystem, m: Monomial, c: ClassicalLocRat) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add(rs, &c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, alg: &Algebra, rhs: &Self) -> Self {
        debug_assert_eq!(self.carrier, rhs.carrier);
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.insert(alg.rs(), m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, alg: &Algebra, rhs: &Self) -> Self {
        self.add(alg, &rhs.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.carrier.clone());
        }
        PolyFunc {
            carrier: self.carrier.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v.scale(c)))
                .collect(),
        }
    }

    pub fn mul_coeff(&self, alg: &Algebra, c: &ClassicalLocRat) -> Self {
        let mut out = Self::zero(self.carrier.clone());
        for (m, v) in &self.terms {
            out.insert(alg.rs(), m.clone(), v.mul(alg.rs(), c));
        }
        out
    }

    pub fn mul(&self, alg: &Algebra, rhs: &Self) -> Self {
        debug_assert_eq!(self.carrier, rhs.carrier);
        let mut out = Self::zero(self.carrier.clone());
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                out.insert(alg.rs(), mono_mul(m1, m2), c1.mul(alg.rs(), c2));
            }
        }
        out
    }

    pub fn pow(&self, alg: &Algebra, n: u32) -> Self {
        let mut out = Self::one(alg.rank(), self.carrier.clone());
        for _ in 0..n {
            out = out.mul(alg, self);
        }
        out
    }

    /// Division by the linear factor β(h), β ∈ Δ₊.
    pub fn div_cartan_factor(&self, alg: &Algebra, beta: &Root) -> Self {
        let key = RootFactor(beta.clone());
        PolyFunc {
            carrier: self.carrier.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.div_factor(alg.rs(), key.clone(), 1)))
                .collect(),
        }
    }

    /// Reinterprets the same expression on another carrier (symbols must
    /// remain admissible).
    pub fn cast(&self, alg: &Algebra, carrier: Carrier) -> Result<Self> {
        for m in self.terms.keys() {
            for g in m.keys() {
                if !carrier.allows(alg.rs(), g) {
                    return Err(EngineError::CarrierMismatch(format!(
                        "symbol e^{g} not allowed on target carrier"
                    )));
                }
            }
        }
        Ok(PolyFunc {
            carrier,
            terms: self.terms.clone(),
        })
    }

    /// Drops every monomial containing a symbol from the kill set (reduction
    /// modulo the ideal those symbols generate).
    pub fn reduce_mod(&self, kill: &BTreeSet<Root>) -> Self {
        PolyFunc {
            carrier: self.carrier.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.keys().all(|g| !kill.contains(g)))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// All ê-symbols set to zero: the constant-monomial part.
    pub fn constant_part(&self) -> Self {
        PolyFunc {
            carrier: self.carrier.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.is_empty())
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    pub fn max_height(&self) -> i64 {
        self.terms.keys().map(mono_height).max().unwrap_or(0)
    }
}

impl fmt::Display for PolyFunc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let mut s = format!("({c})");
            for (g, &p) in m {
                s.push_str(&format!("*E{g}"));
                if p > 1 {
                    s.push_str(&format!("^{p}"));
                }
            }
            parts.push(s);
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// Directional derivative of a localized coefficient along an integer
/// direction in the h-variables (quotient rule on each denominator factor).
fn coeff_deriv_dir(rs: &RootSystem, c: &ClassicalLocRat, dir: &[i64]) -> ClassicalLocRat {
    let rank = c.rank();
    let dnum: CartanPoly = (0..rank).fold(CartanPoly::zero(rank), |acc, i| {
        if dir[i] == 0 {
            acc
        } else {
            acc.add(&c.num().partial(i).scale(&q_int(dir[i])))
        }
    });
    let mut out = ClassicalLocRat::from_poly(dnum);
    for (k, &m) in c.den() {
        out = out.div_factor(rs, k.clone(), m);
    }
    // − Σ_k m_k · (∂p_k) · num / (p_k · Π p^m)
    for (k, &m) in c.den() {
        let form = k.form(rs);
        let dp: Q = (0..rank)
            .map(|i| form.partial(i).as_constant().unwrap_or_else(Q::zero) * q_int(dir[i]))
            .sum();
        if dp.is_zero() {
            continue;
        }
        let mut piece = ClassicalLocRat::from_poly(c.num().scale(&(-q_int(m as i64) * dp)));
        for (k2, &m2) in c.den() {
            piece = piece.div_factor(rs, k2.clone(), m2);
        }
        piece = piece.div_factor(rs, k.clone(), 1);
        out = out.add(rs, &piece);
    }
    out
}

/// The Hamiltonian derivation {ê_α, ·} of the adjoint action of e_α on
/// functions on g: ê_{−α} ↦ ĥ_α, ê_γ ↦ −N_{α,−γ−α}·ê_{γ+α}, and a coefficient
/// φ(ĥ) ↦ (derivative of φ along −h_α)·ê_α.
pub fn poisson_e(alg: &Algebra, alpha: &Root, f: &PolyFunc) -> Result<PolyFunc> {
    if f.carrier != Carrier::Full {
        return Err(EngineError::CarrierMismatch(
            "poisson_e acts on functions on g".into(),
        ));
    }
    if !alg.rs().is_positive_root(alpha) {
        return Err(EngineError::UnknownRoot(alpha.to_string()));
    }
    Ok(derive(alg, alpha, f, None))
}

/// Shared derivation core; with `kill` set it reduces term-by-term modulo the
/// ideal generated by those symbols (which the derivation preserves).
fn derive(alg: &Algebra, alpha: &Root, f: &PolyFunc, kill: Option<&BTreeSet<Root>>) -> PolyFunc {
    let rs = alg.rs();
    let rank = alg.rank();
    let h_alpha = ClassicalLocRat::from_poly(RootFactor(alpha.clone()).form(rs));
    let dir: Vec<i64> = rs.coroot(alpha).iter().map(|c| -c).collect();
    let killed = |g: &Root| kill.is_some_and(|k| k.contains(g));
    let mut out = PolyFunc::zero(f.carrier.clone());
    for (mono, c) in &f.terms {
        // Leibniz over the symbols of the monomial
        for (g, &p) in mono {
            let (new_sym, factor) = if g == &alpha.neg() {
                (None, h_alpha.clone())
            } else {
                let target = g.add(alpha);
                if !rs.is_root(&target) {
                    continue;
                }
                // [e_α, e_{−γ−α}] = N·e_{−γ}, so ê_γ moves to −N·ê_{γ+α}
                let n = alg.struct_const(alpha, &target.neg());
                (Some(target), ClassicalLocRat::constant(rank, q_int(-n)))
            };
            if factor.is_zero() {
                continue;
            }
            let mut m = mono.clone();
            let e = m.get_mut(g).unwrap();
            *e -= 1;
            if *e == 0 {
                m.remove(g);
            }
            if let Some(s) = new_sym {
                if killed(&s) {
                    continue;
                }
                *m.entry(s).or_insert(0) += 1;
            }
            if m.keys().any(killed) {
                continue;
            }
            let coeff = c.mul(rs, &factor).scale(&q_int(p as i64));
            out.insert(rs, m, coeff);
        }
        // coefficient part contributes (∂ c along −h_α)·ê_α·monomial
        if !killed(alpha) && !mono.keys().any(killed) {
            let dc = coeff_deriv_dir(rs, c, &dir);
            if !dc.is_zero() {
                let mut m = mono.clone();
                *m.entry(alpha.clone()).or_insert(0) += 1;
                out.insert(rs, m, dc);
            }
        }
    }
    out
}

/// Action of e_α on functions on b: the Poisson derivation of a lift,
/// reduced modulo the ideal I = (ê_β : β ∈ Δ₊); independent of the lift.
pub fn e_action(alg: &Algebra, alpha: &Root, f: &PolyFunc) -> Result<PolyFunc> {
    if f.carrier != Carrier::Borel {
        return Err(EngineError::CarrierMismatch(
            "e_action acts on functions on b".into(),
        ));
    }
    if !alg.rs().is_positive_root(alpha) {
        return Err(EngineError::UnknownRoot(alpha.to_string()));
    }
    let kill: BTreeSet<Root> = alg.rs().positive_roots().iter().cloned().collect();
    Ok(derive(alg, alpha, f, Some(&kill)))
}

/// Single-root projector P_α f = Σ_n (−1)ⁿ/n!·ĥ_α^{−n}·ê_{−α}ⁿ·(e_αⁿ f);
/// the series terminates because e_α strictly lowers the ê-height.
pub fn p_alpha(alg: &Algebra, alpha: &Root, f: &PolyFunc) -> Result<PolyFunc> {
    let mut acc = f.clone();
    let mut g = f.clone();
    let mut n: u32 = 0;
    let mut sign = Q::one();
    let mut factorial = Q::one();
    let bound = (f.max_height() + 2) as u32;
    loop {
        g = e_action(alg, alpha, &g)?;
        if g.is_zero() {
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
        // (−1)^n/n! · ĥ_α^{−n} ê_{−α}^n g
        let scaled = g.scale(&(sign.clone() / factorial.clone()));
        let mono = Monomial::from([(alpha.neg(), n)]);
        let mut term = PolyFunc::zero(scaled.carrier.clone());
        for (m, c) in &scaled.terms {
            let c = c.div_factor(alg.rs(), RootFactor(alpha.clone()), n);
            term.insert(alg.rs(), mono_mul(m, &mono), c);
        }
        acc = acc.add(alg, &term);
    }
}

/// Full projector P = P_{β_N}…P_{β_1} (P_{β_1} applied first).
pub fn project(alg: &Algebra, ordering: &NormalOrdering, f: &PolyFunc) -> Result<PolyFunc> {
    project_partial(alg, ordering, 1, f)
}

/// Partial projector P_{≥k} = P_{β_N}…P_{β_k}; k = N+1 is the identity.
pub fn project_partial(
    alg: &Algebra,
    ordering: &NormalOrdering,
    k: usize,
    f: &PolyFunc,
) -> Result<PolyFunc> {
    let n = ordering.len();
    if k < 1 || k > n + 1 {
        return Err(EngineError::IndexRange(format!(
            "partial projector index k = {k} not in 1..={}",
            n + 1
        )));
    }
    let mut cur = f.clone();
    for i in k..=n {
        cur = p_alpha(alg, ordering.beta(i), &cur)?;
    }
    Ok(cur)
}

/// Symbolic triangular reduction at the generic point of b′: the factor
/// coefficients t_i = c^{N−i}_{β_i}/β_i(h) and the reduced coordinates after
/// processing β_N down to β_k, all as functions on b.
#[derive(Clone, Debug)]
pub struct SymbolicReduction {
    /// (β_i, t_i) in processing order β_N, …, β_k.
    pub factors: Vec<(Root, PolyFunc)>,
    /// Reduced coordinate functions; zero for β_j with j ≥ k.
    pub coords: BTreeMap<Root, PolyFunc>,
}

pub fn symbolic_partial_decompose(
    alg: &Algebra,
    ordering: &NormalOrdering,
    k: usize,
) -> Result<SymbolicReduction> {
    let n = ordering.len();
    if k < 1 || k > n + 1 {
        return Err(EngineError::IndexRange(format!(
            "symbolic reduction index k = {k} not in 1..={}",
            n + 1
        )));
    }
    let rs = alg.rs();
    let mut coords: BTreeMap<Root, PolyFunc> = BTreeMap::new();
    for beta in rs.positive_roots() {
        coords.insert(
            beta.clone(),
            PolyFunc::symbol(alg, Carrier::Borel, &beta.neg())?,
        );
    }
    let mut factors = Vec::new();
    for i in (k..=n).rev() {
        let beta = ordering.beta(i).clone();
        let t = coords[&beta].div_cartan_factor(alg, &beta);
        // ad e_β on the generic point: the h-block contributes −β(h)·e_β once,
        // e-blocks move up by β with the structure constants
        let ad_once = |cur: &BTreeMap<Root, PolyFunc>, with_h: bool| -> BTreeMap<Root, PolyFunc> {
            let mut out: BTreeMap<Root, PolyFunc> = BTreeMap::new();
            for (delta, cf) in cur {
                if cf.is_zero() {
                    continue;
                }
                let target = delta.add(&beta);
                if rs.is_positive_root(&target) {
                    let nconst = alg.struct_const(&beta, delta);
                    if nconst != 0 {
                        let add = cf.scale(&q_int(nconst));
                        out.entry(target)
                            .and_modify(|v| *v = v.add(alg, &add))
                            .or_insert(add);
                    }
                }
            }
            if with_h {
                let minus_h_beta = PolyFunc::h_hat(alg, Carrier::Borel, &beta).scale(&-Q::one());
                out.entry(beta.clone())
                    .and_modify(|v| *v = v.add(alg, &minus_h_beta))
                    .or_insert(minus_h_beta);
            }
            out
        };
        // exp(t·ad e_β) applied to the generic point, finite by height
        let mut term = ad_once(&coords, true);
        let mut tpow = t.clone();
        let mut fact = Q::one();
        let mut step = 1u32;
        while !term.is_empty() {
            for (delta, cf) in &term {
                let add = cf.mul(alg, &tpow).scale(&(Q::one() / fact.clone()));
                if !add.is_zero() {
                    coords
                        .entry(delta.clone())
                        .and_modify(|v| *v = v.add(alg, &add))
                        .or_insert(add);
                }
            }
            term = ad_once(&term, false);
            step += 1;
            fact *= q_int(step as i64);
            tpow = tpow.mul(alg, &t);
            if step > 4 * n as u32 + 4 {
                return Err(EngineError::Inconsistent(
                    "symbolic exponential did not terminate".into(),
                ));
            }
        }
        if !coords[&beta].is_zero() {
            return Err(EngineError::Inconsistent(format!(
                "coordinate {beta} did not cancel in the symbolic reduction"
            )));
        }
        factors.push((beta, t));
    }
    for (j, beta) in ordering.roots().iter().enumerate() {
        if j + 1 >= k && !coords[beta].is_zero() {
            return Err(EngineError::Inconsistent(format!(
                "reduced coordinate {beta} nonzero at position {} ≥ k = {k}",
                j + 1
            )));
        }
    }
    Ok(SymbolicReduction { factors, coords })
}

/// Classical Zhelobenko operator Q_w by geometric substitution: evaluates a
/// function on b^w at the partially reduced point of the triangular
/// decomposition; the ordering must be adapted, w = s_{β_k}…s_{β_N}.
pub fn zhelobenko_classical(
    alg: &Algebra,
    ordering: &NormalOrdering,
    k: usize,
    f: &PolyFunc,
) -> Result<PolyFunc> {
    let expected = twisted_carrier(alg, ordering, k)?;
    if f.carrier != expected {
        return Err(EngineError::CarrierMismatch(
            "input must live on the twisted Borel carrier of w".into(),
        ));
    }
    let reduction = symbolic_partial_decompose(alg, ordering, k)?;
    let mut out = PolyFunc::zero(Carrier::Borel);
    'term: for (mono, c) in &f.terms {
        let mut acc = PolyFunc::coefficient(Carrier::Borel, c.clone());
        for (g, &p) in mono {
            // ê_g reads the e_{−g}-coordinate of the reduced point, which is
            // supported on h + span{e_{β_j} : j < k}
            let minus = g.neg();
            if !alg.rs().is_positive_root(&minus) {
                continue 'term; // g ∈ Δ_w: kernel direction
            }
            match ordering.position(&minus) {
                Some(j) if j + 1 < k => {
                    acc = acc.mul(alg, &reduction.coords[&minus].pow(alg, p));
                }
                _ => continue 'term,
            }
        }
        out = out.add(alg, &acc);
    }
    Ok(out)
}

/// One multiplicative factor Q_α with term-by-term reduction modulo the ideal
/// generated by the given symbols (which {ê_α,·} preserves).
fn q_alpha_series_mod(
    alg: &Algebra,
    alpha: &Root,
    f: &PolyFunc,
    kill: &BTreeSet<Root>,
    max_depth: usize,
) -> Result<PolyFunc> {
    let start = f.reduce_mod(kill);
    let mut acc = start.clone();
    let mut g = start;
    let mut n: u32 = 0;
    let mut sign = Q::one();
    let mut factorial = Q::one();
    loop {
        g = derive(alg, alpha, &g, Some(kill));
        if g.is_zero() {
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
        let mono = Monomial::from([(alpha.neg(), n)]);
        for (m, c) in g.terms.clone() {
            let c = c.scale(&(sign.clone() / factorial.clone())).div_factor(
                alg.rs(),
                RootFactor(alpha.clone()),
                n,
            );
            acc.insert(alg.rs(), mono_mul(&m, &mono), c);
        }
    }
}

/// Single-root series operator Q_α on a representative in C\[g\]′, reduced
/// modulo I term-by-term (final result is a function on b).
pub fn zhelobenko_alpha_series(
    alg: &Algebra,
    alpha: &Root,
    f: &PolyFunc,
    max_depth: usize,
) -> Result<PolyFunc> {
    if f.carrier != Carrier::Full {
        return Err(EngineError::CarrierMismatch(
            "series operator expects a representative on g".into(),
        ));
    }
    let kill: BTreeSet<Root> = alg.rs().positive_roots().iter().cloned().collect();
    let out = q_alpha_series_mod(alg, alpha, f, &kill, max_depth)?;
    out.cast(alg, Carrier::Borel)
}

/// Classical Zhelobenko operator along the multiplicative formula: Q_{β_k}
/// first, then …, then Q_{β_N}.  The stage for β_i works modulo I^{w_{i+1}}
/// for the remaining suffix element w_{i+1} (an ideal the derivation
/// preserves); the final stage reduces modulo I itself, landing in C\[b\]′.
pub fn zhelobenko_classical_series(
    alg: &Algebra,
    ordering: &NormalOrdering,
    k: usize,
    f: &PolyFunc,
    max_depth: usize,
) -> Result<PolyFunc> {
    let n = ordering.len();
    if k < 1 || k > n + 1 {
        return Err(EngineError::IndexRange(format!(
            "series index k = {k} not in 1..={}",
            n + 1
        )));
    }
    let mut cur = PolyFunc {
        carrier: Carrier::Full,
        terms: f.terms.clone(),
    };
    for i in k..=n {
        let w_next = weyl_from_suffix(alg.rs(), ordering, i + 1)?;
        let kill: BTreeSet<Root> = alg
            .rs()
            .positive_roots()
            .iter()
            .map(|a| w_next.apply(a))
            .collect();
        cur = q_alpha_series_mod(alg, ordering.beta(i), &cur, &kill, max_depth)?;
    }
    if k == n + 1 {
        let kill: BTreeSet<Root> = alg.rs().positive_roots().iter().cloned().collect();
        cur = cur.reduce_mod(&kill);
    }
    cur.cast(alg, Carrier::Borel)
}

/// A rational point of b (Cartan coordinates plus positive-root coefficients).
#[derive(Clone, Debug)]
pub struct BorelPoint {
    pub h: Vec<Q>,
    pub e: BTreeMap<Root, Q>,
}

impl BorelPoint {
    pub fn from_lie(x: &crate::chevalley::LieElement) -> Result<BorelPoint> {
        if !x.in_borel() {
            return Err(EngineError::NotInBorel(format!("{x}")));
        }
        Ok(BorelPoint {
            h: x.h.clone(),
            e: x.e.clone(),
        })
    }

    pub fn to_lie(&self) -> crate::chevalley::LieElement {
        let mut x = crate::chevalley::LieElement::cartan(self.h.clone());
        for (r, c) in &self.e {
            x.add_e(r.clone(), c.clone());
        }
        x
    }
}

/// Exact evaluation of a function on b at a rational point.
pub fn eval_on_borel(alg: &Algebra, f: &PolyFunc, point: &BorelPoint) -> Result<Q> {
    if f.carrier != Carrier::Borel {
        return Err(EngineError::CarrierMismatch(
            "evaluation expects a function on b".into(),
        ));
    }
    let mut acc = Q::zero();
    for (mono, c) in &f.terms {
        let mut v = c.eval(alg.rs(), &point.h)?;
        for (g, &p) in mono {
            let coord = point.e.get(&g.neg()).cloned().unwrap_or_else(Q::zero);
            for _ in 0..p {
                v *= coord.clone();
            }
        }
        acc += v;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chevalley::{partial_decompose, LieElement};
    use crate::coeffs::q_ratio;
    use crate::roots::{default_ordering, normal_ordering_from_reduced_word};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn a1() -> Algebra {
        Algebra::from_label("A1").unwrap()
    }

    fn sym_c(alg: &Algebra, beta: &Root) -> PolyFunc {
        PolyFunc::symbol(alg, Carrier::Borel, &beta.neg()).unwrap()
    }

    fn rand_q(rng: &mut StdRng) -> Q {
        q_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4))
    }

    fn rand_borel_func(alg: &Algebra, rng: &mut StdRng, with_denoms: bool) -> PolyFunc {
        let rank = alg.rank();
        let mut f = PolyFunc::zero(Carrier::Borel);
        for _ in 0..rng.gen_range(1..=3) {
            let mut mono = Monomial::new();
            for beta in alg.rs().positive_roots() {
                let p = rng.gen_range(0..=2u32);
                if p > 0 {
                    mono.insert(beta.neg(), p);
                }
            }
            let mut c = ClassicalLocRat::from_poly(CartanPoly::linear(
                rank,
                &(0..rank).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>(),
                rand_q(rng),
            ));
            if with_denoms && rng.gen_bool(0.5) {
                let roots = alg.rs().positive_roots();
                let b = roots[rng.gen_range(0..roots.len())].clone();
                c = c.div_factor(alg.rs(), RootFactor(b), 1);
            }
            f.insert(alg.rs(), mono, c);
        }
        f
    }

    fn rand_regular_point(alg: &Algebra, rng: &mut StdRng) -> BorelPoint {
        'outer: loop {
            let h: Vec<Q> = (0..alg.rank()).map(|_| rand_q(rng)).collect();
            let probe = LieElement::cartan(h.clone());
            for a in alg.rs().positive_roots() {
                if probe.cartan_pairing(alg.rs(), a).is_zero() {
                    continue 'outer;
                }
            }
            let e = alg
                .rs()
                .positive_roots()
                .iter()
                .map(|a| (a.clone(), rand_q(rng)))
                .collect();
            return BorelPoint { h, e };
        }
    }

    #[test]
    fn poisson_basic_relations() {
        let alg = a1();
        let alpha = Root(vec![1]);
        // {ê_α, constant} = 0
        let c = PolyFunc::one(1, Carrier::Full);
        assert!(poisson_e(&alg, &alpha, &c).unwrap().is_zero());
        // {ê_α, ê_{−α}} = ĥ_α
        let f = PolyFunc::symbol(&alg, Carrier::Full, &alpha.neg()).unwrap();
        assert_eq!(
            poisson_e(&alg, &alpha, &f).unwrap(),
            PolyFunc::h_hat(&alg, Carrier::Full, &alpha)
        );
        // {ê_α, 1/ĥ_α} = 2·ê_α/ĥ_α²
        let inv = PolyFunc::coefficient(
            Carrier::Full,
            ClassicalLocRat::one(1).div_factor(alg.rs(), RootFactor(alpha.clone()), 1),
        );
        let got = poisson_e(&alg, &alpha, &inv).unwrap();
        let expected = PolyFunc::symbol(&alg, Carrier::Full, &alpha)
            .unwrap()
            .mul_coeff(
                &alg,
                &ClassicalLocRat::constant(1, q_int(2)).div_factor(
                    alg.rs(),
                    RootFactor(alpha.clone()),
                    2,
                ),
            );
        assert_eq!(got, expected);
    }

    #[test]
    fn poisson_preserves_ideal() {
        // I is generated by the positive symbols; {ê_α, I} ⊆ I
        for label in ["A2", "B2"] {
            let alg = Algebra::from_label(label).unwrap();
            let mut rng = StdRng::seed_from_u64(11);
            for alpha in alg.rs().positive_roots() {
                for beta in alg.rs().positive_roots() {
                    let g = rand_borel_func(&alg, &mut rng, true)
                        .cast(&alg, Carrier::Full)
                        .unwrap()
                        .mul(&alg, &PolyFunc::symbol(&alg, Carrier::Full, beta).unwrap());
                    let d = poisson_e(&alg, alpha, &g).unwrap();
                    for (mono, _) in d.terms() {
                        assert!(
                            mono.keys().any(|s| s.is_positive()),
                            "{label}: derivative left the ideal"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn e_action_examples() {
        let alg = a1();
        let alpha = Root(vec![1]);
        let c_alpha = sym_c(&alg, &alpha);
        // e_action(α, C_α) = ĥ_α
        assert_eq!(
            e_action(&alg, &alpha, &c_alpha).unwrap(),
            PolyFunc::h_hat(&alg, Carrier::Borel, &alpha)
        );
        // e_action(α, C_α²) = 2·C_α·ĥ_α  (Leibniz)
        let sq = c_alpha.mul(&alg, &c_alpha);
        let expected = c_alpha
            .mul(&alg, &PolyFunc::h_hat(&alg, Carrier::Borel, &alpha))
            .scale(&q_int(2));
        assert_eq!(e_action(&alg, &alpha, &sq).unwrap(), expected);
        // Cartan coefficients die mod I
        let h = PolyFunc::h_hat(&alg, Carrier::Borel, &alpha);
        assert!(e_action(&alg, &alpha, &h).unwrap().is_zero());
    }

    #[test]
    fn p_alpha_examples() {
        let alg = a1();
        let alpha = Root(vec![1]);
        let c_alpha = sym_c(&alg, &alpha);
        // P_α(φ(ĥ)) = φ(ĥ)
        let phi = PolyFunc::h_hat(&alg, Carrier::Borel, &alpha);
        assert_eq!(p_alpha(&alg, &alpha, &phi).unwrap(), phi);
        // P_α(C_α) = 0 and P_α(C_α²) = 0
        assert!(p_alpha(&alg, &alpha, &c_alpha).unwrap().is_zero());
        assert!(p_alpha(&alg, &alpha, &c_alpha.mul(&alg, &c_alpha))
            .unwrap()
            .is_zero());
        // P_α is idempotent on a mixed input
        let mixed = phi.add(&alg, &c_alpha);
        let once = p_alpha(&alg, &alpha, &mixed).unwrap();
        assert_eq!(p_alpha(&alg, &alpha, &once).unwrap(), once);
    }

    #[test]
    fn project_equals_substitution_oracle() {
        for label in ["A1", "A2", "B2"] {
            let alg = Algebra::from_label(label).unwrap();
            let ordering = default_ordering(alg.rs());
            let mut rng = StdRng::seed_from_u64(43);
            for _ in 0..12 {
                let f = rand_borel_func(&alg, &mut rng, true);
                let p = project(&alg, &ordering, &f).unwrap();
                assert_eq!(p, f.constant_part(), "{label}: Pf ≠ f|_(ê→0)");
                // idempotence and N-invariance
                assert_eq!(project(&alg, &ordering, &p).unwrap(), p);
                for i in 0..alg.rank() {
                    let simple = Root::simple(alg.rank(), i);
                    assert!(e_action(&alg, &simple, &p).unwrap().is_zero());
                }
            }
        }
    }

    #[test]
    fn project_kernel_and_example() {
        let alg = Algebra::from_label("A2").unwrap();
        let ordering = default_ordering(alg.rs());
        let a1r = Root(vec![1, 0]);
        let a2r = Root(vec![0, 1]);
        // f = C_{α1}·C_{α2}/ĥ_{α1} projects to 0
        let f = sym_c(&alg, &a1r)
            .mul(&alg, &sym_c(&alg, &a2r))
            .div_cartan_factor(&alg, &a1r);
        assert!(project(&alg, &ordering, &f).unwrap().is_zero());
        // P(ê_{−α}·g) = 0 for random g
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..5 {
            let g = rand_borel_func(&alg, &mut rng, false);
            let prod = g.mul(&alg, &sym_c(&alg, &a2r));
            assert!(project(&alg, &ordering, &prod).unwrap().is_zero());
        }
    }

    #[test]
    fn projection_numeric_oracle() {
        // eval(Pf, y) = eval(f, h-component of y)
        let alg = Algebra::from_label("A2").unwrap();
        let ordering = default_ordering(alg.rs());
        let mut rng = StdRng::seed_from_u64(47);
        for _ in 0..10 {
            let f = rand_borel_func(&alg, &mut rng, true);
            let p = project(&alg, &ordering, &f).unwrap();
            let y = rand_regular_point(&alg, &mut rng);
            let h_only = BorelPoint {
                h: y.h.clone(),
                e: BTreeMap::new(),
            };
            assert_eq!(
                eval_on_borel(&alg, &p, &y).unwrap(),
                eval_on_borel(&alg, &f, &h_only).unwrap()
            );
        }
    }

    #[test]
    fn partial_projector_invariance() {
        let alg = Algebra::from_label("A2").unwrap();
        // ordering (α₁, θ, α₂)
        let ordering = normal_ordering_from_reduced_word(alg.rs(), &[0, 1, 0]).unwrap();
        let a2r = Root(vec![0, 1]);
        let a1r = Root(vec![1, 0]);
        let f = sym_c(&alg, &a2r);
        assert!(project_partial(&alg, &ordering, 3, &f).unwrap().is_zero());
        // C_{α1} is fixed by P_{β3} = P_{α2}
        let g = sym_c(&alg, &a1r);
        assert_eq!(project_partial(&alg, &ordering, 3, &g).unwrap(), g);
        // k = N+1 is the identity
        let mut rng = StdRng::seed_from_u64(53);
        let h = rand_borel_func(&alg, &mut rng, true);
        assert_eq!(project_partial(&alg, &ordering, 4, &h).unwrap(), h);
        // invariance under e_{β_j}, j ≥ k
        for k in 1..=4usize {
            let r = project_partial(&alg, &ordering, k, &h).unwrap();
            for j in k..=3 {
                assert!(e_action(&alg, ordering.beta(j), &r).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn symbolic_reduction_matches_numeric() {
        let alg = Algebra::from_label("A2").unwrap();
        let ordering = normal_ordering_from_reduced_word(alg.rs(), &[1, 0, 1]).unwrap();
        let mut rng = StdRng::seed_from_u64(59);
        for k in 1..=4usize {
            let red = symbolic_partial_decompose(&alg, &ordering, k).unwrap();
            for _ in 0..8 {
                let y = rand_regular_point(&alg, &mut rng);
                let numeric = partial_decompose(&alg, &y.to_lie(), &ordering, k).unwrap();
                for ((root_s, t_s), (root_n, t_n)) in red.factors.iter().zip(&numeric.factors) {
                    assert_eq!(root_s, root_n);
                    assert_eq!(&eval_on_borel(&alg, t_s, &y).unwrap(), t_n);
                }
                for beta in alg.rs().positive_roots() {
                    let sym_val = eval_on_borel(&alg, &red.coords[beta], &y).unwrap();
                    assert_eq!(sym_val, numeric.reduced.coeff(beta));
                }
            }
        }
        // A1: t for β₁ = α is C_α/ĥ_α
        let alg1 = a1();
        let o1 = default_ordering(alg1.rs());
        let red1 = symbolic_partial_decompose(&alg1, &o1, 1).unwrap();
        let alpha = Root(vec![1]);
        let expected = sym_c(&alg1, &alpha).div_cartan_factor(&alg1, &alpha);
        assert_eq!(red1.factors[0].1, expected);
    }

    #[test]
    fn zhelobenko_substitution_examples() {
        // A1, w = s_α: carrier spanned by h, e_{−α}; Q_w(ê_α) = 0, Q_w(φ(ĥ)) = φ(ĥ)
        let alg = a1();
        let ordering = default_ordering(alg.rs());
        let k = 1usize;
        let carrier = twisted_carrier(&alg, &ordering, k).unwrap();
        let alpha = Root(vec![1]);
        let f = PolyFunc::symbol(&alg, carrier.clone(), &alpha).unwrap();
        assert!(zhelobenko_classical(&alg, &ordering, k, &f)
            .unwrap()
            .is_zero());
        let phi = PolyFunc::h_hat(&alg, carrier.clone(), &alpha);
        assert_eq!(
            zhelobenko_classical(&alg, &ordering, k, &phi).unwrap(),
            PolyFunc::h_hat(&alg, Carrier::Borel, &alpha)
        );
        // carrier mismatch is rejected
        let wrong = PolyFunc::one(1, Carrier::Borel);
        assert!(zhelobenko_classical(&alg, &ordering, k, &wrong).is_err());
    }

    #[test]
    fn zhelobenko_substitution_eval_oracle() {
        // A2, w = s_{α1} via adapted ordering (α₂, θ, α₁), k = 3,
        // f = ê_{−α₂}: eval(Q_w f, y) = f(partial reduction of y)
        let alg = Algebra::from_label("A2").unwrap();
        let ordering = normal_ordering_from_reduced_word(alg.rs(), &[1, 0, 1]).unwrap();
        let k = 3usize;
        let carrier = twisted_carrier(&alg, &ordering, k).unwrap();
        let a2r = Root(vec![0, 1]);
        let f = PolyFunc::symbol(&alg, carrier, &a2r.neg()).unwrap();
        let qf = zhelobenko_classical(&alg, &ordering, k, &f).unwrap();
        let mut rng = StdRng::seed_from_u64(61);
        for _ in 0..10 {
            let y = rand_regular_point(&alg, &mut rng);
            let reduced = partial_decompose(&alg, &y.to_lie(), &ordering, k)
                .unwrap()
                .reduced;
            assert_eq!(eval_on_borel(&alg, &qf, &y).unwrap(), reduced.coeff(&a2r));
        }
    }

    #[test]
    fn series_agrees_with_substitution() {
        let alg = Algebra::from_label("A2").unwrap();
        let mut rng = StdRng::seed_from_u64(67);
        for word in [vec![0usize, 1, 0], vec![1usize, 0, 1]] {
            let ordering = normal_ordering_from_reduced_word(alg.rs(), &word).unwrap();
            for k in 1..=4usize {
                let carrier = twisted_carrier(&alg, &ordering, k).unwrap();
                let Carrier::Twisted(wpos) = carrier.clone() else {
                    unreachable!()
                };
                for _ in 0..6 {
                    // polynomial-coefficient input on b^w
                    let mut f = PolyFunc::zero(carrier.clone());
                    for _ in 0..2 {
                        let mut mono = Monomial::new();
                        for g in &wpos {
                            let p = rng.gen_range(0..=1u32);
                            if p > 0 {
                                mono.insert(g.neg(), p);
                            }
                        }
                        let c = ClassicalLocRat::from_poly(CartanPoly::linear(
                            2,
                            &[rng.gen_range(-2..=2), rng.gen_range(-2..=2)],
                            rand_q(&mut rng),
                        ));
                        f.insert(alg.rs(), mono, c);
                    }
                    let subst = zhelobenko_classical(&alg, &ordering, k, &f).unwrap();
                    let series = zhelobenko_classical_series(&alg, &ordering, k, &f, 64).unwrap();
                    assert_eq!(subst, series, "word {word:?}, k = {k}");
                }
            }
        }
    }

    #[test]
    fn single_alpha_series_example() {
        // A1, w = s_α, f = ê_α·ĥ_α: series = substitution ( = 0, kernel)
        let alg = a1();
        let ordering = default_ordering(alg.rs());
        let alpha = Root(vec![1]);
        let carrier = twisted_carrier(&alg, &ordering, 1).unwrap();
        let f = PolyFunc::symbol(&alg, carrier.clone(), &alpha)
            .unwrap()
            .mul(&alg, &PolyFunc::h_hat(&alg, carrier, &alpha));
        let subst = zhelobenko_classical(&alg, &ordering, 1, &f).unwrap();
        let rep = PolyFunc::symbol(&alg, Carrier::Full, &alpha)
            .unwrap()
            .mul(&alg, &PolyFunc::h_hat(&alg, Carrier::Full, &alpha));
        let series = zhelobenko_alpha_series(&alg, &alpha, &rep, 64).unwrap();
        assert_eq!(subst, series);
        assert!(series.is_zero());
        // a polynomial in ĥ only passes through
        let phi = PolyFunc::h_hat(&alg, Carrier::Full, &alpha);
        assert_eq!(
            zhelobenko_alpha_series(&alg, &alpha, &phi, 64).unwrap(),
            PolyFunc::h_hat(&alg, Carrier::Borel, &alpha)
        );
    }

    #[test]
    fn zhelobenko_invariance_and_kernel() {
        let alg = Algebra::from_label("A2").unwrap();
        let ordering = default_ordering(alg.rs());
        let mut rng = StdRng::seed_from_u64(71);
        for k in 1..=3usize {
            let w = weyl_from_suffix(alg.rs(), &ordering, k).unwrap();
            let carrier = twisted_carrier(&alg, &ordering, k).unwrap();
            let delta_w: Vec<Root> = alg.rs().delta_w(&w);
            for _ in 0..4 {
                let mut f = PolyFunc::zero(carrier.clone());
                let mut mono = Monomial::new();
                for g in alg.rs().positive_roots() {
                    if ordering.position(g).unwrap() + 1 < k && rng.gen_bool(0.7) {
                        mono.insert(g.neg(), 1);
                    }
                }
                f.insert(
                    alg.rs(),
                    mono,
                    ClassicalLocRat::constant(2, rand_q(&mut rng)),
                );
                let qf = zhelobenko_classical(&alg, &ordering, k, &f).unwrap();
                // N_w-invariance on the generators of n_w
                for a in &delta_w {
                    assert!(e_action(&alg, a, &qf).unwrap().is_zero());
                }
                // kernel: ê_α·g ↦ 0 for α ∈ Δ_w
                for a in &delta_w {
                    let killer = PolyFunc::symbol(&alg, carrier.clone(), a).unwrap();
                    let prod = f.mul(&alg, &killer);
                    assert!(zhelobenko_classical(&alg, &ordering, k, &prod)
                        .unwrap()
                        .is_zero());
                }
            }
        }
    }
}
