//! Text grammars for the engine's values: Lie algebra elements, functions on
//! the (twisted) Borel subalgebras, and PBW elements of U(g)′, with exact
//! round-trip printing, plus JSON mirrors of the same shapes.
//!
//! Conventions shared by all grammars: `[a,b,…]` is an integer vector in
//! simple-root coordinates; rationals are `p` or `p/q`.  `e[v]`/`E[v]` name
//! root vectors and coordinate symbols, `F[v]` is e_{−v}, `h[i]` a simple
//! coroot, `h[v]` the coroot of the root v, `H[v]` the linear form v(h).

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::chevalley::{Algebra, LieElement};
use crate::classical::{Carrier, PolyFunc};
use crate::coeffs::{
    q_int, CartanPoly, ClassicalLocRat, CorootShift, QuantumLocRat, RootFactor, Q,
};
use crate::error::{EngineError, Result};
use crate::quantum::{Atom, PbwContext, UElement, VermaVector};
use crate::roots::{Root, RootSystem};
use std::sync::Arc;

// ---------------------------------------------------------------------------
// tokenizer
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Comma,
    Colon,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

struct Lexer {
    toks: Vec<(usize, Tok)>,
    pos: usize,
}

fn err_at(at: usize, msg: impl Into<String>) -> EngineError {
    EngineError::Parse {
        at,
        msg: msg.into(),
    }
}

impl Lexer {
    fn new(src: &str) -> Result<Lexer> {
        let bytes = src.as_bytes();
        let mut toks = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i] as char;
            match c {
                ' ' | '\t' | '\n' | '\r' => i += 1,
                '[' => {
                    toks.push((i, Tok::LBracket));
                    i += 1;
                }
                ']' => {
                    toks.push((i, Tok::RBracket));
                    i += 1;
                }
                '(' => {
                    toks.push((i, Tok::LParen));
                    i += 1;
                }
                ')' => {
                    toks.push((i, Tok::RParen));
                    i += 1;
                }
                ',' => {
                    toks.push((i, Tok::Comma));
                    i += 1;
                }
                ':' => {
                    toks.push((i, Tok::Colon));
                    i += 1;
                }
                '+' => {
                    toks.push((i, Tok::Plus));
                    i += 1;
                }
                '-' => {
                    toks.push((i, Tok::Minus));
                    i += 1;
                }
                '*' => {
                    toks.push((i, Tok::Star));
                    i += 1;
                }
                '/' => {
                    toks.push((i, Tok::Slash));
                    i += 1;
                }
                '^' => {
                    toks.push((i, Tok::Caret));
                    i += 1;
                }
                '0'..='9' => {
                    let start = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    let n: i64 = src[start..i]
                        .parse()
                        .map_err(|_| err_at(start, "integer overflow"))?;
                    toks.push((start, Tok::Int(n)));
                }
                'a'..='z' | 'A'..='Z' => {
                    let start = i;
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                    {
                        i += 1;
                    }
                    toks.push((start, Tok::Ident(src[start..i].to_string())));
                }
                _ => return Err(err_at(i, format!("unexpected character '{c}'"))),
            }
        }
        toks.push((bytes.len(), Tok::End));
        Ok(Lexer { toks, pos: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn at(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<()> {
        if self.peek() == &t {
            self.bump();
            Ok(())
        } else {
            Err(err_at(self.at(), format!("expected {what}")))
        }
    }

    /// `[a,b,…]` integer vector.
    fn vector(&mut self) -> Result<Vec<i64>> {
        self.expect(Tok::LBracket, "'['")?;
        let mut out = Vec::new();
        loop {
            let neg = if self.peek() == &Tok::Minus {
                self.bump();
                true
            } else {
                false
            };
            match self.bump() {
                Tok::Int(n) => out.push(if neg { -n } else { n }),
                _ => return Err(err_at(self.at(), "expected integer")),
            }
            match self.bump() {
                Tok::Comma => continue,
                Tok::RBracket => return Ok(out),
                _ => return Err(err_at(self.at(), "expected ',' or ']'")),
            }
        }
    }

    fn uint(&mut self) -> Result<u32> {
        match self.bump() {
            Tok::Int(n) if n >= 0 => Ok(n as u32),
            _ => Err(err_at(self.at(), "expected nonnegative integer")),
        }
    }

    /// A positive rational `p` or `p/q` (sign handled by callers).
    fn rational(&mut self) -> Result<Q> {
        let n = match self.bump() {
            Tok::Int(n) => n,
            _ => return Err(err_at(self.at(), "expected number")),
        };
        if self.peek() == &Tok::Slash {
            // only treat as a fraction when a bare integer follows
            if let Tok::Int(_) = self.toks[self.pos + 1].1 {
                self.bump();
                let d = match self.bump() {
                    Tok::Int(d) if d != 0 => d,
                    _ => return Err(err_at(self.at(), "expected nonzero denominator")),
                };
                return Ok(Q::new(n.into(), d.into()));
            }
        }
        Ok(q_int(n))
    }
}

fn check_rank(rs: &RootSystem, v: &[i64], at: usize) -> Result<Root> {
    if v.len() != rs.rank() {
        return Err(err_at(
            at,
            format!("vector has {} entries, rank is {}", v.len(), rs.rank()),
        ));
    }
    Ok(Root(v.to_vec()))
}

// ---------------------------------------------------------------------------
// Lie elements:  h[1] + 3*e[1,0] - 1/2*e[-1,-1],  h:[2] (pairing coordinates)
// ---------------------------------------------------------------------------

pub fn parse_lie_element(rs: &RootSystem, src: &str) -> Result<LieElement> {
    let mut lx = Lexer::new(src)?;
    let x = parse_lie_sum(rs, &mut lx)?;
    lx.expect(Tok::End, "end of input")?;
    Ok(x)
}

fn parse_lie_sum(rs: &RootSystem, lx: &mut Lexer) -> Result<LieElement> {
    let mut acc = LieElement::zero(rs.rank());
    let mut sign = Q::one();
    if lx.peek() == &Tok::Minus {
        lx.bump();
        sign = -sign;
    }
    loop {
        let term = parse_lie_term(rs, lx)?;
        acc = acc.add(&term.scale(&sign));
        match lx.peek() {
            Tok::Plus => {
                lx.bump();
                sign = Q::one();
            }
            Tok::Minus => {
                lx.bump();
                sign = -Q::one();
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_lie_term(rs: &RootSystem, lx: &mut Lexer) -> Result<LieElement> {
    let mut coeff = Q::one();
    if let Tok::Int(_) = lx.peek() {
        coeff = lx.rational()?;
        if lx.peek() == &Tok::Star {
            lx.bump();
        } else {
            return Ok(LieElement::cartan(vec![Q::zero(); rs.rank()]).add(&{
                let mut z = LieElement::zero(rs.rank());
                // a bare constant is not a Lie element unless zero
                if !coeff.is_zero() {
                    return Err(err_at(lx.at(), "a bare constant is not a Lie element"));
                }
                z.h = vec![Q::zero(); rs.rank()];
                z
            }));
        }
    }
    let at = lx.at();
    match lx.bump() {
        Tok::Ident(id) if id == "e" => {
            let v = lx.vector()?;
            let root = check_rank(rs, &v, at)?;
            if !rs.is_root(&root) {
                return Err(err_at(at, format!("{root} is not a root")));
            }
            Ok(LieElement::root_vector(rs.rank(), root, coeff))
        }
        Tok::Ident(id) if id == "h" => {
            if lx.peek() == &Tok::Colon {
                // h:[a_1,…,a_r] — Cartan element with values α_i(h) = a_i
                lx.bump();
                let at2 = lx.at();
                let vals = lx.vector()?;
                if vals.len() != rs.rank() {
                    return Err(err_at(at2, "pairing vector has wrong length"));
                }
                let coords = solve_cartan_coords(rs, &vals)
                    .ok_or_else(|| err_at(at2, "Cartan matrix is singular"))?;
                Ok(LieElement::cartan(coords).scale(&coeff))
            } else {
                let at2 = lx.at();
                let v = lx.vector()?;
                let mut h = vec![Q::zero(); rs.rank()];
                if v.len() == 1 && v[0] >= 1 && (v[0] as usize) <= rs.rank() {
                    h[v[0] as usize - 1] = coeff;
                } else {
                    let root = check_rank(rs, &v, at2)?;
                    if !rs.is_root(&root) {
                        return Err(err_at(at2, format!("{root} is not a root")));
                    }
                    for (i, c) in rs.coroot(&root).into_iter().enumerate() {
                        h[i] = q_int(c) * coeff.clone();
                    }
                }
                Ok(LieElement::cartan(h))
            }
        }
        _ => Err(err_at(at, "expected 'e[…]', 'h[…]' or 'h:[…]'")),
    }
}

/// Solves α_i(h) = vals_i for the coroot coordinates of h.
fn solve_cartan_coords(rs: &RootSystem, vals: &[i64]) -> Option<Vec<Q>> {
    // system: Σ_j x_j·α_i(h_{α_j}) = vals_i, matrix m[i][j] = cartan[j]·α_i
    let r = rs.rank();
    let mut m: Vec<Vec<Q>> = (0..r)
        .map(|i| {
            (0..r)
                .map(|j| q_int(rs.pairing_simple(&Root::simple(r, i), j)))
                .collect()
        })
        .collect();
    let mut rhs: Vec<Q> = vals.iter().map(|&v| q_int(v)).collect();
    // gaussian elimination
    for col in 0..r {
        let p = (col..r).find(|&row| !m[row][col].is_zero())?;
        m.swap(col, p);
        rhs.swap(col, p);
        let pivot = m[col][col].clone();
        for row in 0..r {
            if row == col {
                continue;
            }
            let f = m[row][col].clone() / pivot.clone();
            for c in 0..r {
                let sub = f.clone() * m[col][c].clone();
                m[row][c] -= sub;
            }
            let sub = f * rhs[col].clone();
            rhs[row] -= sub;
        }
    }
    Some((0..r).map(|i| rhs[i].clone() / m[i][i].clone()).collect())
}

pub fn print_lie_element(x: &LieElement) -> String {
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (i, c) in x.h.iter().enumerate() {
        if !c.is_zero() {
            parts.push((c.is_negative(), format!("{}*h[{}]", rat(&c.abs()), i + 1)));
        }
    }
    for (g, c) in &x.e {
        parts.push((c.is_negative(), format!("{}*e{}", rat(&c.abs()), g)));
    }
    join_signed(parts)
}

fn rat(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn join_signed(parts: Vec<(bool, String)>) -> String {
    if parts.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (neg, body)) in parts.iter().enumerate() {
        if i == 0 {
            if *neg {
                out.push('-');
            }
        } else {
            out.push_str(if *neg { " - " } else { " + " });
        }
        out.push_str(body);
    }
    out
}

// ---------------------------------------------------------------------------
// Cartan polynomials and localized coefficients
// ---------------------------------------------------------------------------

/// h-polynomial expression: sums/products/powers of rationals, `h[i]` and
/// `h[v]` atoms.
fn parse_h_poly(rs: &RootSystem, lx: &mut Lexer) -> Result<CartanPoly> {
    let mut acc = parse_h_product(rs, lx)?;
    loop {
        match lx.peek() {
            Tok::Plus => {
                lx.bump();
                acc = acc.add(&parse_h_product(rs, lx)?);
            }
            Tok::Minus => {
                lx.bump();
                acc = acc.sub(&parse_h_product(rs, lx)?);
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_h_product(rs: &RootSystem, lx: &mut Lexer) -> Result<CartanPoly> {
    let mut acc = parse_h_factor(rs, lx)?;
    while lx.peek() == &Tok::Star {
        lx.bump();
        acc = acc.mul(&parse_h_factor(rs, lx)?);
    }
    Ok(acc)
}

fn parse_h_factor(rs: &RootSystem, lx: &mut Lexer) -> Result<CartanPoly> {
    let mut neg = false;
    while lx.peek() == &Tok::Minus {
        lx.bump();
        neg = !neg;
    }
    let at = lx.at();
    let base = match lx.peek().clone() {
        Tok::Int(_) => CartanPoly::constant(rs.rank(), lx.rational()?),
        Tok::LParen => {
            lx.bump();
            let inner = parse_h_poly(rs, lx)?;
            lx.expect(Tok::RParen, "')'")?;
            inner
        }
        Tok::Ident(id) if id == "h" => {
            lx.bump();
            h_atom(rs, lx)?
        }
        _ => return Err(err_at(at, "expected h-polynomial factor")),
    };
    let base = if lx.peek() == &Tok::Caret {
        lx.bump();
        base.pow(lx.uint()?)
    } else {
        base
    };
    Ok(if neg { base.neg() } else { base })
}

/// `h[i]` (simple coroot variable) or `h[v]` (coroot of the root v).
fn h_atom(rs: &RootSystem, lx: &mut Lexer) -> Result<CartanPoly> {
    let at = lx.at();
    let v = lx.vector()?;
    if v.len() == 1 && v[0] >= 1 && (v[0] as usize) <= rs.rank() {
        return Ok(CartanPoly::var(rs.rank(), v[0] as usize - 1));
    }
    let root = check_rank(rs, &v, at)?;
    if !rs.is_root(&root) {
        return Err(err_at(at, format!("{root} is not a root")));
    }
    Ok(CartanPoly::linear(rs.rank(), &rs.coroot(&root), Q::zero()))
}

pub fn print_cartan_poly(p: &CartanPoly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut parts: Vec<(bool, String)> = Vec::new();
    for (e, c) in p.terms() {
        let mono: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(i, &p)| {
                if p == 1 {
                    format!("h[{}]", i + 1)
                } else {
                    format!("h[{}]^{}", i + 1, p)
                }
            })
            .collect();
        let a = c.abs();
        let body = if mono.is_empty() {
            rat(&a)
        } else if a.is_one() {
            mono.join("*")
        } else {
            format!("{}*{}", rat(&a), mono.join("*"))
        };
        parts.push((c.is_negative(), body));
    }
    join_signed(parts)
}

// ---------------------------------------------------------------------------
// PolyFunc:  E[v], H[v], rationals, + - * ^, inv(H-products)
// ---------------------------------------------------------------------------

pub fn parse_polyfunc(alg: &Algebra, carrier: Carrier, src: &str) -> Result<PolyFunc> {
    let mut lx = Lexer::new(src)?;
    let f = parse_pf_sum(alg, &carrier, &mut lx)?;
    lx.expect(Tok::End, "end of input")?;
    Ok(f)
}

fn parse_pf_sum(alg: &Algebra, carrier: &Carrier, lx: &mut Lexer) -> Result<PolyFunc> {
    let mut acc = parse_pf_product(alg, carrier, lx)?;
    loop {
        match lx.peek() {
            Tok::Plus => {
                lx.bump();
                let t = parse_pf_product(alg, carrier, lx)?;
                acc = acc.add(alg, &t);
            }
            Tok::Minus => {
                lx.bump();
                let t = parse_pf_product(alg, carrier, lx)?;
                acc = acc.sub(alg, &t);
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_pf_product(alg: &Algebra, carrier: &Carrier, lx: &mut Lexer) -> Result<PolyFunc> {
    let mut acc = parse_pf_factor(alg, carrier, lx)?;
    while lx.peek() == &Tok::Star {
        lx.bump();
        let f = parse_pf_factor(alg, carrier, lx)?;
        acc = acc.mul(alg, &f);
    }
    Ok(acc)
}

fn parse_pf_factor(alg: &Algebra, carrier: &Carrier, lx: &mut Lexer) -> Result<PolyFunc> {
    let mut neg = false;
    while lx.peek() == &Tok::Minus {
        lx.bump();
        neg = !neg;
    }
    let at = lx.at();
    let base = match lx.peek().clone() {
        Tok::Int(_) => {
            let c = lx.rational()?;
            PolyFunc::coefficient(carrier.clone(), ClassicalLocRat::constant(alg.rank(), c))
        }
        Tok::LParen => {
            lx.bump();
            let inner = parse_pf_sum(alg, carrier, lx)?;
            lx.expect(Tok::RParen, "')'")?;
            inner
        }
        Tok::Ident(id) if id == "E" => {
            lx.bump();
            let at2 = lx.at();
            let v = lx.vector()?;
            let root = check_rank(alg.rs(), &v, at2)?;
            if !alg.rs().is_root(&root) {
                return Err(err_at(at2, format!("{root} is not a root")));
            }
            PolyFunc::symbol(alg, carrier.clone(), &root)?
        }
        Tok::Ident(id) if id == "H" => {
            lx.bump();
            let at2 = lx.at();
            let v = lx.vector()?;
            let gamma = check_rank(alg.rs(), &v, at2)?;
            PolyFunc::h_hat(alg, carrier.clone(), &gamma)
        }
        Tok::Ident(id) if id == "h" => {
            lx.bump();
            let p = h_atom(alg.rs(), lx)?;
            PolyFunc::coefficient(carrier.clone(), ClassicalLocRat::from_poly(p))
        }
        Tok::Ident(id) if id == "inv" => {
            lx.bump();
            lx.expect(Tok::LParen, "'(' after inv")?;
            let mut coeff = ClassicalLocRat::one(alg.rank());
            loop {
                let at2 = lx.at();
                match lx.bump() {
                    Tok::Ident(id) if id == "H" => {
                        let at3 = lx.at();
                        let v = lx.vector()?;
                        let root = check_rank(alg.rs(), &v, at3)?;
                        if !alg.rs().is_positive_root(&root) {
                            return Err(err_at(
                                at3,
                                format!("inv(...) requires positive-root H-factors, got {root}"),
                            ));
                        }
                        let p = if lx.peek() == &Tok::Caret {
                            lx.bump();
                            lx.uint()?
                        } else {
                            1
                        };
                        coeff = coeff.div_factor(alg.rs(), RootFactor(root), p);
                    }
                    Tok::Int(n) => {
                        let mut q = q_int(n);
                        if lx.peek() == &Tok::Slash {
                            lx.bump();
                            match lx.bump() {
                                Tok::Int(d) if d != 0 => q /= q_int(d),
                                _ => return Err(err_at(lx.at(), "bad rational in inv")),
                            }
                        }
                        if q.is_zero() {
                            return Err(EngineError::DivisionByZero);
                        }
                        coeff = coeff.scale(&(Q::one() / q));
                    }
                    _ => return Err(err_at(at2, "inv(...) takes products of H-factors")),
                }
                match lx.bump() {
                    Tok::Star => continue,
                    Tok::RParen => break,
                    _ => return Err(err_at(lx.at(), "expected '*' or ')' in inv")),
                }
            }
            PolyFunc::coefficient(carrier.clone(), coeff)
        }
        _ => return Err(err_at(at, "expected E[…], H[…], h[…], inv(…) or number")),
    };
    let base = if lx.peek() == &Tok::Caret {
        lx.bump();
        base.pow(alg, lx.uint()?)
    } else {
        base
    };
    Ok(if neg { base.scale(&-Q::one()) } else { base })
}

pub fn print_classical_locrat(c: &ClassicalLocRat) -> String {
    let num = print_cartan_poly(c.num());
    if c.den().is_empty() {
        return format!("({num})");
    }
    let den: Vec<String> = c
        .den()
        .iter()
        .map(|(k, &m)| {
            if m == 1 {
                format!("H{}", k.0)
            } else {
                format!("H{}^{}", k.0, m)
            }
        })
        .collect();
    format!("({num})*inv({})", den.join("*"))
}

/// Canonical print: monomials sorted by total height, then lexicographically.
pub fn print_polyfunc(f: &PolyFunc) -> String {
    if f.is_zero() {
        return "0".into();
    }
    let mut items: Vec<(i64, String)> = Vec::new();
    for (mono, c) in f.terms() {
        let mut s = print_classical_locrat(c);
        let mut height = 0;
        for (g, &p) in mono {
            height += g.height().abs() * p as i64;
            if p == 1 {
                s.push_str(&format!("*E{g}"));
            } else {
                s.push_str(&format!("*E{g}^{p}"));
            }
        }
        items.push((height, s));
    }
    items.sort();
    items
        .into_iter()
        .map(|(_, s)| s)
        .collect::<Vec<_>>()
        .join(" + ")
}

// ---------------------------------------------------------------------------
// UElement / Verma vectors:
//   F[1,1]^2 * (h[1]+1)/(h[1,0]+2) * E[1,0],  trailing v0 for module vectors
// ---------------------------------------------------------------------------

pub fn parse_uelement(alg: &Algebra, ctx: &Arc<PbwContext>, src: &str) -> Result<(UElement, bool)> {
    let mut lx = Lexer::new(src)?;
    let (u, isv) = parse_u_sum(alg, ctx, &mut lx)?;
    lx.expect(Tok::End, "end of input")?;
    Ok((u, isv))
}

pub fn parse_verma(alg: &Algebra, ctx: &Arc<PbwContext>, src: &str) -> Result<VermaVector> {
    let (u, _) = parse_uelement(alg, ctx, src)?;
    if u.has_right_support() {
        // the quotient map is still well defined; reduce canonically
        return Ok(VermaVector::reduce(&u));
    }
    Ok(VermaVector::reduce(&u))
}

fn parse_u_sum(alg: &Algebra, ctx: &Arc<PbwContext>, lx: &mut Lexer) -> Result<(UElement, bool)> {
    let mut acc = UElement::zero(ctx.clone());
    let mut any_v0 = false;
    let mut sign = Q::one();
    if lx.peek() == &Tok::Minus {
        lx.bump();
        sign = -sign;
    }
    loop {
        let (term, isv) = parse_u_term(alg, ctx, lx)?;
        any_v0 |= isv;
        acc = acc.add(alg, &term.scale(&sign));
        match lx.peek() {
            Tok::Plus => {
                lx.bump();
                sign = Q::one();
            }
            Tok::Minus => {
                lx.bump();
                sign = -Q::one();
            }
            _ => return Ok((acc, any_v0)),
        }
    }
}

fn parse_u_term(alg: &Algebra, ctx: &Arc<PbwContext>, lx: &mut Lexer) -> Result<(UElement, bool)> {
    let mut atoms: Vec<Atom> = Vec::new();
    let mut scale = Q::one();
    let mut saw_v0 = false;
    loop {
        let at = lx.at();
        match lx.peek().clone() {
            Tok::Int(_) => {
                let q = lx.rational()?;
                scale *= q;
            }
            Tok::LParen => {
                lx.bump();
                let p = parse_h_poly(alg.rs(), lx)?;
                lx.expect(Tok::RParen, "')'")?;
                let pow = if lx.peek() == &Tok::Caret {
                    lx.bump();
                    lx.uint()?
                } else {
                    1
                };
                atoms.push(Atom::C(QuantumLocRat::from_poly(p.pow(pow))));
            }
            Tok::Ident(id) if id == "F" || id == "E" || id == "e" => {
                lx.bump();
                let at2 = lx.at();
                let v = lx.vector()?;
                let mut root = check_rank(alg.rs(), &v, at2)?;
                if id == "F" {
                    root = root.neg();
                }
                if !alg.rs().is_root(&root) {
                    return Err(err_at(at2, format!("{root} is not a root")));
                }
                let pow = if lx.peek() == &Tok::Caret {
                    lx.bump();
                    lx.uint()?
                } else {
                    1
                };
                for _ in 0..pow {
                    atoms.push(Atom::R(root.clone()));
                }
            }
            Tok::Ident(id) if id == "h" => {
                lx.bump();
                let p = h_atom(alg.rs(), lx)?;
                let pow = if lx.peek() == &Tok::Caret {
                    lx.bump();
                    lx.uint()?
                } else {
                    1
                };
                atoms.push(Atom::C(QuantumLocRat::from_poly(p.pow(pow))));
            }
            Tok::Ident(id) if id == "v0" => {
                lx.bump();
                saw_v0 = true;
            }
            _ => return Err(err_at(at, "expected factor (F/E/h/(…)/v0/number)")),
        }
        match lx.peek() {
            Tok::Star => {
                lx.bump();
            }
            Tok::Slash => {
                lx.bump();
                let key = parse_u_divisor(alg, lx)?;
                let pow = if lx.peek() == &Tok::Caret {
                    lx.bump();
                    lx.uint()?
                } else {
                    1
                };
                atoms.push(Atom::C(QuantumLocRat::one(alg.rank()).div_factor(
                    alg.rs(),
                    key,
                    pow,
                )));
                if lx.peek() == &Tok::Star {
                    lx.bump();
                } else {
                    break;
                }
            }
            _ => break,
        }
    }
    Ok((crate::quantum::normalize(alg, ctx, scale, &atoms), saw_v0))
}

/// Divisor `(h[v] ± m)` or `h[v]`: must be a coroot linear form plus an
/// integer, i.e. an admissible D(h) factor.
fn parse_u_divisor(alg: &Algebra, lx: &mut Lexer) -> Result<CorootShift> {
    let at = lx.at();
    let poly = match lx.peek().clone() {
        Tok::LParen => {
            lx.bump();
            let p = parse_h_poly(alg.rs(), lx)?;
            lx.expect(Tok::RParen, "')'")?;
            p
        }
        Tok::Ident(id) if id == "h" => {
            lx.bump();
            h_atom(alg.rs(), lx)?
        }
        _ => return Err(err_at(at, "expected denominator factor")),
    };
    coroot_shift_of_poly(alg, &poly)
        .ok_or_else(|| EngineError::InadmissibleFactor(print_cartan_poly(&poly)))
}

/// Matches a linear polynomial against h_α + m for a positive root α.
fn coroot_shift_of_poly(alg: &Algebra, p: &CartanPoly) -> Option<CorootShift> {
    if p.total_degree() != 1 {
        return None;
    }
    let rank = alg.rank();
    let mut coeffs = vec![Q::zero(); rank];
    let mut constant = Q::zero();
    for (e, c) in p.terms() {
        let deg: u32 = e.iter().sum();
        if deg == 0 {
            constant = c.clone();
        } else {
            let i = e.iter().position(|&x| x == 1).unwrap();
            coeffs[i] = c.clone();
        }
    }
    if !constant.is_integer() {
        return None;
    }
    for alpha in alg.rs().positive_roots() {
        let co = alg.rs().coroot(alpha);
        if (0..rank).all(|i| coeffs[i] == q_int(co[i])) {
            return Some(CorootShift {
                root: alpha.clone(),
                shift: i64::try_from(&constant.to_integer()).ok()?,
            });
        }
    }
    None
}

pub fn print_quantum_locrat(c: &QuantumLocRat) -> String {
    let num = print_cartan_poly(c.num());
    let mut out = format!("({num})");
    for (k, &m) in c.den() {
        let factor = if k.shift == 0 {
            format!("h{}", k.root)
        } else if k.shift > 0 {
            format!("(h{}+{})", k.root, k.shift)
        } else {
            format!("(h{}{})", k.root, k.shift)
        };
        out.push_str(&format!("/{factor}"));
        if m > 1 {
            out.push_str(&format!("^{m}"));
        }
    }
    out
}

pub fn print_uelement(u: &UElement) -> String {
    if u.is_zero() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (key, c) in u.terms() {
        let mut s = String::new();
        for (i, &p) in key.0.iter().enumerate() {
            if p > 0 {
                let r = u.ctx().left_roots()[i].neg();
                s.push_str(&format!("F{r}"));
                if p > 1 {
                    s.push_str(&format!("^{p}"));
                }
                s.push('*');
            }
        }
        s.push_str(&print_quantum_locrat(c));
        for (i, &p) in key.1.iter().enumerate() {
            if p > 0 {
                let r = &u.ctx().right_roots()[i];
                s.push_str(&format!("*E{r}"));
                if p > 1 {
                    s.push_str(&format!("^{p}"));
                }
            }
        }
        parts.push(s);
    }
    parts.join(" + ")
}

pub fn print_verma(v: &VermaVector) -> String {
    if v.is_zero() {
        "0".into()
    } else {
        format!("{} * v0", print_uelement(v.as_u()))
    }
}

// ---------------------------------------------------------------------------
// JSON mirrors
// ---------------------------------------------------------------------------

pub fn lie_to_json(x: &LieElement) -> Value {
    json!({
        "h": x.h.iter().map(rat).collect::<Vec<_>>(),
        "e": x.e.iter().map(|(g, c)| json!({"root": g.0, "coeff": rat(c)})).collect::<Vec<_>>(),
    })
}

pub fn classical_locrat_to_json(c: &ClassicalLocRat) -> Value {
    json!({
        "num": c.num().terms().map(|(e, q)| json!({"exps": e, "coeff": rat(q)})).collect::<Vec<_>>(),
        "den": c.den().iter().map(|(k, m)| json!({"root": k.0.0, "power": m})).collect::<Vec<_>>(),
    })
}

pub fn quantum_locrat_to_json(c: &QuantumLocRat) -> Value {
    json!({
        "num": c.num().terms().map(|(e, q)| json!({"exps": e, "coeff": rat(q)})).collect::<Vec<_>>(),
        "den": c.den().iter().map(|(k, m)| json!({"root": k.root.0, "shift": k.shift, "power": m})).collect::<Vec<_>>(),
    })
}

pub fn polyfunc_to_json(f: &PolyFunc) -> Value {
    json!(f
        .terms()
        .map(|(mono, c)| {
            json!({
                "symbols": mono.iter().map(|(g, p)| json!({"root": g.0, "power": p})).collect::<Vec<_>>(),
                "coeff": classical_locrat_to_json(c),
            })
        })
        .collect::<Vec<_>>())
}

pub fn uelement_to_json(u: &UElement) -> Value {
    json!(u
        .terms()
        .map(|(key, c)| {
            json!({
                "f_word": key.0,
                "coeff": quantum_locrat_to_json(c),
                "e_word": key.1,
            })
        })
        .collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roots::default_ordering;

    #[test]
    fn lie_round_trip() {
        let rs = RootSystem::from_label("A2").unwrap();
        let x = parse_lie_element(&rs, "h[1] + 3*e[1,0] - 1/2*e[-1,-1]").unwrap();
        assert_eq!(x.h[0], Q::one());
        assert_eq!(x.coeff(&Root(vec![1, 0])), q_int(3));
        assert_eq!(x.coeff(&Root(vec![-1, -1])), Q::new((-1).into(), 2.into()));
        let printed = print_lie_element(&x);
        let re = parse_lie_element(&rs, &printed).unwrap();
        assert_eq!(x, re);
    }

    #[test]
    fn lie_pairing_coordinates() {
        let rs = RootSystem::from_label("A1").unwrap();
        // h:[2] is the Cartan element with α(h) = 2, i.e. h_α itself
        let x = parse_lie_element(&rs, "h:[2] + 3*e[1]").unwrap();
        assert_eq!(x.h, vec![Q::one()]);
        assert_eq!(x.coeff(&Root(vec![1])), q_int(3));
    }

    #[test]
    fn lie_rejects_garbage() {
        let rs = RootSystem::from_label("A2").unwrap();
        assert!(parse_lie_element(&rs, "e[2,0]").is_err());
        assert!(parse_lie_element(&rs, "e[1]").is_err());
        assert!(parse_lie_element(&rs, "q[1,0]").is_err());
    }

    #[test]
    fn polyfunc_round_trip() {
        let alg = Algebra::from_label("A2").unwrap();
        let f = parse_polyfunc(
            &alg,
            Carrier::Borel,
            "E[-1,0]^2*E[0,-1] - 1/3*H[1,1]*E[-1,-1] + inv(H[1,0]^2)*E[-1,0]",
        )
        .unwrap();
        let printed = print_polyfunc(&f);
        let re = parse_polyfunc(&alg, Carrier::Borel, &printed).unwrap();
        assert_eq!(f, re);
        // positive symbols are rejected on the Borel carrier
        assert!(parse_polyfunc(&alg, Carrier::Borel, "E[1,0]").is_err());
        // inv of non-positive-root forms is rejected
        assert!(parse_polyfunc(&alg, Carrier::Borel, "inv(H[1,-1])").is_err());
    }

    #[test]
    fn uelement_round_trip() {
        let alg = Algebra::from_label("A2").unwrap();
        let o = default_ordering(alg.rs());
        let ctx = PbwContext::standard(&o);
        let (u, isv) = parse_uelement(
            &alg,
            &ctx,
            "F[1,1]^2 * (h[1]+1)/(h[1,0]+2) * E[1,0] + 2*F[0,1]*v0",
        )
        .unwrap();
        assert!(isv);
        let printed = print_uelement(&u);
        let (re, _) = parse_uelement(&alg, &ctx, &printed).unwrap();
        assert_eq!(u, re);
    }

    #[test]
    fn uelement_divisor_validation() {
        let alg = Algebra::from_label("A2").unwrap();
        let o = default_ordering(alg.rs());
        let ctx = PbwContext::standard(&o);
        // h[1]+h[2] is the coroot of θ = α1+α2, so this is admissible
        assert!(parse_uelement(&alg, &ctx, "F[1,1]/(h[1]+h[2]+3)").is_ok());
        // 2h[1]+1 is not a coroot form
        assert!(parse_uelement(&alg, &ctx, "F[1,1]/(2*h[1]+1)").is_err());
        // non-integer shift is rejected
        assert!(parse_uelement(&alg, &ctx, "F[1,1]/(h[1]+1/2)").is_err());
    }

    #[test]
    fn verma_parse_reduces() {
        let alg = Algebra::from_label("A1").unwrap();
        let o = default_ordering(alg.rs());
        let ctx = PbwContext::standard(&o);
        let v = parse_verma(&alg, &ctx, "F[1]*(h[1])*E[1]*v0").unwrap();
        assert!(v.is_zero());
        let v2 = parse_verma(&alg, &ctx, "E[1]*F[1]*v0").unwrap();
        // EF v0 = h v0
        let hv = parse_verma(&alg, &ctx, "h[1]*v0").unwrap();
        assert_eq!(v2, hv);
        assert_eq!(print_verma(&v2), "(h[1]) * v0");
    }
}
