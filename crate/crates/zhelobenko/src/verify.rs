//! Batch verification suites: each suite makes one family of the engine's
//! operator identities executable, with exact equality throughout (zero
//! tolerance) and seeded randomness for reproducibility.

use std::collections::BTreeSet;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chevalley::{decompose, partial_decompose, replay, Algebra, LieElement};
use crate::classical::{
    e_action, eval_on_borel, project, project_partial, symbolic_partial_decompose, twisted_carrier,
    zhelobenko_classical, zhelobenko_classical_series, BorelPoint, Carrier, Monomial, PolyFunc,
};
use crate::coeffs::{
    q_int, q_ratio, CartanPoly, ClassicalLocRat, CorootShift, QuantumLocRat, RootFactor, Q,
};
use crate::error::{EngineError, Result};
use crate::quantum::{
    act, convert, extremal_projector, pbw_normal_form, zhelobenko_qw_representative, Atom,
    PbwContext, UElement, VermaVector,
};
use crate::roots::{
    all_normal_orderings, default_ordering, validate_normal_ordering, weyl_from_suffix,
    NormalOrdering, Root, RootSystem, WeylElement,
};

#[derive(Clone, Debug)]
pub struct CaseResult {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct SuiteReport {
    pub suite: String,
    pub cases: Vec<CaseResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.cases.iter().all(|c| c.pass)
    }

    pub fn summary(&self) -> String {
        let passed = self.cases.iter().filter(|c| c.pass).count();
        format!("{}: {}/{} cases pass", self.suite, passed, self.cases.len())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Adds the rank-3 heavy cases (A3) to the classical projector suites.
    pub slow: bool,
    pub max_depth: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 20_160_901,
            slow: false,
            max_depth: 48,
        }
    }
}

pub const SUITES: &[&str] = &[
    "lemma1",
    "prop1",
    "partial",
    "prop2",
    "sl2",
    "prop3",
    "prop4",
    "combinatorics",
];

pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<SuiteReport> {
    let cases = match name {
        "lemma1" => lemma1(cfg),
        "prop1" => prop1(cfg),
        "partial" => partial_projectors(cfg),
        "prop2" => prop2(cfg),
        "sl2" => sl2(cfg),
        "prop3" => prop3(cfg),
        "prop4" => prop4(cfg),
        "combinatorics" => combinatorics(cfg),
        "all" => {
            let mut all = Vec::new();
            for s in SUITES {
                all.extend(run_suite(s, cfg)?.cases);
            }
            all
        }
        other => {
            return Err(EngineError::IndexRange(format!(
                "unknown suite '{other}'; available: {}, all",
                SUITES.join(", ")
            )))
        }
    };
    Ok(SuiteReport {
        suite: name.to_string(),
        cases,
    })
}

fn case(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> CaseResult {
    CaseResult {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

fn rng_for(cfg: &VerifyConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt)
}

fn rand_q(rng: &mut ChaCha8Rng) -> Q {
    q_ratio(rng.gen_range(-9..=9), rng.gen_range(1..=4))
}

fn rand_regular_borel(alg: &Algebra, rng: &mut ChaCha8Rng) -> LieElement {
    'outer: loop {
        let rank = alg.rank();
        let mut x = LieElement::zero(rank);
        for i in 0..rank {
            x.h[i] = rand_q(rng);
        }
        for a in alg.rs().positive_roots() {
            if x.cartan_pairing(alg.rs(), a).is_zero() {
                continue 'outer;
            }
            x.add_e(a.clone(), rand_q(rng));
        }
        return x;
    }
}

fn rand_borel_func(alg: &Algebra, rng: &mut ChaCha8Rng, with_denoms: bool) -> PolyFunc {
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
        let term = PolyFunc::coefficient(Carrier::Borel, c);
        let mut sym = PolyFunc::one(rank, Carrier::Borel);
        for (g, p) in mono {
            sym = sym.mul(
                alg,
                &PolyFunc::symbol(alg, Carrier::Borel, &g)
                    .expect("borel symbol")
                    .pow(alg, p),
            );
        }
        f = f.add(alg, &term.mul(alg, &sym));
    }
    f
}

fn rand_point(alg: &Algebra, rng: &mut ChaCha8Rng) -> BorelPoint {
    BorelPoint::from_lie(&rand_regular_borel(alg, rng)).expect("regular point")
}

fn rand_verma(
    alg: &Algebra,
    ctx: &std::sync::Arc<PbwContext>,
    rng: &mut ChaCha8Rng,
    with_denoms: bool,
) -> VermaVector {
    let n = ctx.size();
    let rank = alg.rank();
    let mut atoms_accum = UElement::zero(ctx.clone());
    for _ in 0..rng.gen_range(1..=3) {
        let mut atoms: Vec<Atom> = Vec::new();
        for (i, root) in ctx.left_roots().iter().enumerate() {
            let _ = i;
            if rng.gen_bool(0.4) {
                atoms.push(Atom::R(root.clone()));
            }
        }
        let mut c = QuantumLocRat::from_poly(CartanPoly::linear(
            rank,
            &(0..rank).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>(),
            rand_q(rng),
        ));
        if with_denoms && rng.gen_bool(0.5) {
            let roots = alg.rs().positive_roots();
            let key = CorootShift {
                root: roots[rng.gen_range(0..roots.len())].clone(),
                shift: rng.gen_range(-2..=2),
            };
            c = c.div_factor(alg.rs(), key, 1);
        }
        atoms.push(Atom::C(c));
        atoms_accum = atoms_accum.add(alg, &pbw_normal_form(alg, ctx, &atoms));
        let _ = n;
    }
    VermaVector::reduce(&atoms_accum)
}

fn weyl_group(rs: &RootSystem) -> Vec<WeylElement> {
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
    elems
}

// ---------------------------------------------------------------------------
// Criterion 1: triangular decomposition replay
// ---------------------------------------------------------------------------

fn lemma1(cfg: &VerifyConfig) -> Vec<CaseResult> {
    let mut out = Vec::new();
    for label in ["A1", "A2", "B2", "A3"] {
        let alg = match Algebra::from_label(label) {
            Ok(a) => a,
            Err(e) => {
                out.push(case(format!("lemma1/{label}"), false, e.to_string()));
                continue;
            }
        };
        let ordering = default_ordering(alg.rs());
        let mut rng = rng_for(cfg, 0x1e_44a1);
        let mut failures = 0usize;
        let trials = 100;
        for _ in 0..trials {
            let y = rand_regular_borel(&alg, &mut rng);
            match decompose(&alg, &y, &ordering).and_then(|d| {
                let back = replay(&alg, &d)?;
                Ok((d, back))
            }) {
                Ok((d, back)) => {
                    if back != y || d.reduced != y.h_part() {
                        failures += 1;
                    }
                }
                Err(_) => failures += 1,
            }
        }
        out.push(case(
            format!("lemma1/{label}/replay×{trials}"),
            failures == 0,
            format!("{failures} failures"),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 2: classical extremal projector
// ---------------------------------------------------------------------------

fn orderings_for(alg: &Algebra, cfg: &VerifyConfig) -> Vec<NormalOrdering> {
    if alg.rank() <= 2 {
        all_normal_orderings(alg.rs(), None)
    } else {
        let cap = if cfg.slow { 5 } else { 1 };
        all_normal_orderings(alg.rs(), Some(cap))
    }
}

fn prop1(cfg: &VerifyConfig) -> Vec<CaseResult> {
    let mut out = Vec::new();
    let mut labels = vec!["A1", "A2", "B2"];
    if cfg.slow {
        labels.push("A3");
    }
    for label in labels {
        let alg = Algebra::from_label(label).expect("algebra");
        let mut rng = rng_for(cfg, 0x9a_0901);
        let orderings = orderings_for(&alg, cfg);
        let mut oracle_fail = 0usize;
        let mut idem_fail = 0usize;
        let mut inv_fail = 0usize;
        let mut kernel_fail = 0usize;
        for ordering in &orderings {
            for _ in 0..20 {
                let f = rand_borel_func(&alg, &mut rng, true);
                let p = match project(&alg, ordering, &f) {
                    Ok(p) => p,
                    Err(_) => {
                        oracle_fail += 1;
                        continue;
                    }
                };
                if p != f.constant_part() {
                    oracle_fail += 1;
                }
                if project(&alg, ordering, &p).ok().as_ref() != Some(&p) {
                    idem_fail += 1;
                }
                for i in 0..alg.rank() {
                    let s = Root::simple(alg.rank(), i);
                    if !e_action(&alg, &s, &p).map(|r| r.is_zero()).unwrap_or(false) {
                        inv_fail += 1;
                    }
                }
                // P(ê_{−α}·g) = 0
                let alpha =
                    alg.rs().positive_roots()[rng.gen_range(0..alg.rs().num_positive())].clone();
                let killer = PolyFunc::symbol(&alg, Carrier::Borel, &alpha.neg()).expect("sym");
                let prod = f.mul(&alg, &killer);
                if !project(&alg, ordering, &prod)
                    .map(|r| r.is_zero())
                    .unwrap_or(false)
                {
                    kernel_fail += 1;
                }
            }
        }
        let n_ord = orderings.len();
        out.push(case(
            format!("prop1/{label}/substitution-oracle×{n_ord}ord"),
            oracle_fail == 0,
            format!("{oracle_fail} failures"),
        ));
        out.push(case(
            format!("prop1/{label}/idempotent"),
            idem_fail == 0,
            format!("{idem_fail} failures"),
        ));
        out.push(case(
            format!("prop1/{label}/N-invariance"),
            inv_fail == 0,
            format!("{inv_fail} failures"),
        ));
        out.push(case(
            format!("prop1/{label}/kernel"),
            kernel_fail == 0,
            format!("{kernel_fail} failures"),
        ));
    }
    // P_α is idempotent on its own
    let alg = Algebra::from_label("A2").expect("algebra");
    let mut rng = rng_for(cfg, 0x9a_0902);
    let mut palpha_fail = 0usize;
    for alpha in alg.rs().positive_roots() {
        for _ in 0..5 {
            let f = rand_borel_func(&alg, &mut rng, true);
            let once = crate::classical::p_alpha(&alg, alpha, &f).expect("series");
            let twice = crate::classical::p_alpha(&alg, alpha, &once).expect("series");
            if once != twice {
                palpha_fail += 1;
            }
        }
    }
    out.push(case(
        "prop1/A2/p_alpha-idempotent",
        palpha_fail == 0,
        format!("{palpha_fail} failures"),
    ));
    out
}

// ---------------------------------------------------------------------------
// Criterion 3: partial projectors
// ---------------------------------------------------------------------------

fn partial_projectors(cfg: &VerifyConfig) -> Vec<CaseResult> {
    let mut out = Vec::new();
    let mut labels = vec!["A1", "A2", "B2"];
    if cfg.slow {
        labels.push("A3");
    }
    for label in labels {
        let alg = Algebra::from_label(label).expect("algebra");
        let mut rng = rng_for(cfg, 0x9a_0903);
        let orderings = orderings_for(&alg, cfg);
        let mut failures = 0usize;
        for ordering in &orderings {
            let n = ordering.len();
            for k in 1..=n + 1 {
                for _ in 0..4 {
                    let f = rand_borel_func(&alg, &mut rng, true);
                    let p = match project_partial(&alg, ordering, k, &f) {
                        Ok(p) => p,
                        Err(_) => {
                            failures += 1;
                            continue;
                        }
                    };
                    for j in k..=n {
                        if !e_action(&alg, ordering.beta(j), &p)
                            .map(|r| r.is_zero())
                            .unwrap_or(false)
                        {
                            failures += 1;
                        }
                    }
                    if k == n + 1 && p != f {
                        failures += 1;
                    }
                    if k == 1 && p != project(&alg, ordering, &f).expect("project") {
                        failures += 1;
                    }
                }
            }
        }
        out.push(case(
            format!("partial/{label}/invariance-all-k"),
            failures == 0,
            format!("{failures} failures"),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 4: quantum extremal projector
// ---------------------------------------------------------------------------

fn prop2(cfg: &VerifyConfig) -> Vec<CaseResult> {
    let mut out = Vec::new();
    for label in ["A1", "A2", "B2"] {
        let alg = Algebra::from_label(label).expect("algebra");
        let ordering = default_ordering(alg.rs());
        let ctx = PbwContext::standard(&ordering);
        let mut rng = rng_for(cfg, 0x9a_0904);
        let mut oracle_fail = 0usize;
        let mut idem_fail = 0usize;
        let mut inv_fail = 0usize;
        for _ in 0..20 {
            let v = rand_verma(&alg, &ctx, &mut rng, true);
            let pv = match extremal_projector(&alg, &ordering, &v) {
                Ok(p) => p,
                Err(_) => {
                    oracle_fail += 1;
                    continue;
                }
            };
            if pv != v.constant_component() {
                oracle_fail += 1;
            }
            if extremal_projector(&alg, &ordering, &pv).ok().as_ref() != Some(&pv) {
                idem_fail += 1;
            }
            for i in 0..alg.rank() {
                let s = Root::simple(alg.rank(), i);
                let e = LieElement::root_vector(alg.rank(), s, Q::one());
                if !act(&alg, &e, &pv).is_zero() {
                    inv_fail += 1;
                }
            }
        }
        // kernel: p(e_{−β}·v) = 0 for every β ∈ Δ₊
        let mut kernel_fail = 0usize;
        for beta in alg.rs().positive_roots() {
            for _ in 0..3 {
                let v = rand_verma(&alg, &ctx, &mut rng, true);
                let fv = act(
                    &alg,
                    &LieElement::root_vector(alg.rank(), beta.neg(), Q::one()),
                    &v,
                );
                if !extremal_projector(&alg, &ordering, &fv)
                    .map(|r| r.is_zero())
                    .unwrap_or(false)
                {
                    kernel_fail += 1;
                }
            }
        }
        out.push(case(
            format!("prop2/{label}/constant-term-oracle×20"),
            oracle_fail == 0,
            format!("{oracle_fail} failures"),
        ));
        out.push(case(
            format!("prop2/{label}/idempotent"),
            idem_fail == 0,
            format!("{idem_fail} failures"),
        ));
        out.push(case(
            format!("prop2/{label}/n-invariance"),
            inv_fail == 0,
            format!("{inv_fail} failures"),
        ));
        out.push(case(
            format!("prop2/{label}/kernel"),
            kernel_fail == 0,
            format!("{kernel_fail} failures"),
        ));
    }
    // ordering independence on A2
    let alg = Algebra::from_label("A2").expect("algebra");
    let orderings = all_normal_orderings(alg.rs(), None);
    let (o1, o2) = (&orderings[0], &orderings[1]);
    let ctx1 = PbwContext::standard(o1);
    let ctx2 = PbwContext::standard(o2);
    let mut rng = rng_for(cfg, 0x9a_0905);
    let mut indep_fail = 0usize;
    for _ in 0..8 {
        let v = rand_verma(&alg, &ctx1, &mut rng, true);
        let p1 = extremal_projector(&alg, o1, &v).expect("p1");
        let v2 = VermaVector::reduce(&convert(&alg, v.as_u(), &ctx2));
        let p2 = extremal_projector(&alg, o2, &v2).expect("p2");
        let back = VermaVector::reduce(&convert(&alg, p2.as_u(), &ctx1));
        if p1 != back {
            indep_fail += 1;
        }
    }
    out.push(case(
        "prop2/A2/ordering-independence",
        indep_fail == 0,
        format!("{indep_fail} failures"),
    ));
    out
}

// ---------------------------------------------------------------------------
// Criterion 5: sl2 closed forms
// ---------------------------------------------------------------------------

fn sl2(_cfg: &VerifyConfig) -> Vec<CaseResult> {
    let mut out = Vec::new();
    let alg = Algebra::from_label("A1").expect("algebra");
    let ordering = default_ordering(alg.rs());
    let ctx = PbwContext::standard(&ordering);
    let alpha = Root(vec![1]);
    let v0 = VermaVector::vacuum(&alg, ctx.clone());

    // p(F·v₀) = 0 with t = ρ(h_α) = 1
    let fv = act(
        &alg,
        &LieElement::root_vector(1, alpha.neg(), Q::one()),
        &v0,
    );
    let t = q_int(alg.rs().rho_coroot(&alpha));
    let p = crate::quantum::p_alpha_t(&alg, &alpha, &t, &fv);
    out.push(case(
        "sl2/p(F·v0)=0 at t=ρ(h_α)=1",
        t == q_int(1) && p.map(|r| r.is_zero()).unwrap_or(false),
        "two-term series",
    ));

    // q_{s_α}(h·v₀^w) = (h+2)·v₀
    let ctx_w = PbwContext::twisted(&alg, &ordering, 1).expect("twisted");
    let h = UElement::coefficient(
        ctx_w.clone(),
        QuantumLocRat::from_poly(CartanPoly::var(1, 0)),
    );
    let got = zhelobenko_qw_representative(&alg, &ordering, 1, &h, 32);
    let expected = VermaVector::reduce(&UElement::coefficient(
        ctx.clone(),
        QuantumLocRat::from_poly(CartanPoly::linear(1, &[1], q_int(2))),
    ));
    out.push(case(
        "sl2/q_w(h·v0^w)=(h+2)·v0",
        got.map(|r| r == expected).unwrap_or(false),
        "one series stage",
    ));

    // q_{s_α}(E·v₀^w) = 0
    let ev = pbw_normal_form(&alg, &ctx_w, &[Atom::R(alpha.clone())]);
    let got = zhelobenko_qw_representative(&alg, &ordering, 1, &ev, 32);
    out.push(case(
        "sl2/q_w(E·v0^w)=0",
        got.map(|r| r.is_zero()).unwrap_or(false),
        "kernel generator",
    ));
    out
}

// ---------------------------------------------------------------------------
// Criterion 6: quantum Zhelobenko operators
// ---------------------------------------------------------------------------

/// All (ordering, k) pairs realizing w as a suffix product, over the full
/// normal-ordering enumeration (only used for ranks ≤ 2).
fn realizations(alg: &Algebra, w: &WeylElement) -> Vec<(NormalOrdering, usize)> {
    let mut out = Vec::new();
    let k = alg.rs().num_positive() - alg.rs().length(w) + 1;
    for o in all_normal_orderings(alg.rs(), None) {
        if let Ok(cand) = weyl_from_suffix(alg.rs(), &o, k) {
            if &cand == w {
                out.push((o, k));
            }
        }
    }
    out
}

fn prop3(cfg: &VerifyConfig) -> Vec<CaseResult> {
    let mut out = Vec::new();
    for label in ["A1", "A2"] {
        let alg = Algebra::from_label(label).expect("algebra");
        let rank = alg.rank();
        let mut rng = rng_for(cfg, 0x9a_0906);
        let mut image_fail = 0usize;
        let mut kernel_fail = 0usize;
        let mut indep_fail = 0usize;
        for w in weyl_group(alg.rs()) {
            let reals = realizations(&alg, &w);
            let (ordering, k) = reals[0].clone();
            let ctx_w = PbwContext::twisted(&alg, &ordering, k).expect("ctx");
            let delta_w = alg.rs().delta_w(&w);

            // image: polynomial-coefficient inputs, annihilated by e_α, α ∈ Δ_w
            let mut inputs = vec![UElement::one(&alg, ctx_w.clone())];
            for _ in 0..3 {
                let poly = CartanPoly::linear(
                    rank,
                    &(0..rank).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>(),
                    rand_q(&mut rng),
                );
                inputs.push(UElement::coefficient(
                    ctx_w.clone(),
                    QuantumLocRat::from_poly(poly),
                ));
            }
            for x in &inputs {
                match zhelobenko_qw_representative(&alg, &ordering, k, x, cfg.max_depth) {
                    Ok(image) => {
                        for a in &delta_w {
                            let e = LieElement::root_vector(rank, a.clone(), Q::one());
                            if !act(&alg, &e, &image).is_zero() {
                                image_fail += 1;
                            }
                        }
                    }
                    Err(_) => image_fail += 1,
                }
            }

            // kernel: q_w(e_α·u) = 0 for α ∈ Δ_w, evaluated along whichever
            // adapted realization terminates (the operator itself is
            // realization-independent)
            for a in &delta_w {
                let mut verified = false;
                let mut diverged_everywhere = true;
                for (o2, k2) in &reals {
                    let ctx2 = PbwContext::twisted(&alg, o2, *k2).expect("ctx");
                    let poly = CartanPoly::linear(
                        rank,
                        &(0..rank).map(|_| rng.gen_range(-2..=2)).collect::<Vec<_>>(),
                        rand_q(&mut rng),
                    );
                    let x = pbw_normal_form(
                        &alg,
                        &ctx2,
                        &[Atom::R(a.clone()), Atom::C(QuantumLocRat::from_poly(poly))],
                    );
                    match zhelobenko_qw_representative(&alg, o2, *k2, &x, cfg.max_depth) {
                        Ok(r) => {
                            diverged_everywhere = false;
                            if r.is_zero() {
                                verified = true;
                            }
                            break;
                        }
                        Err(EngineError::SeriesDiverges { .. })
                        | Err(EngineError::TerminationDomain(_)) => continue,
                        Err(_) => {
                            diverged_everywhere = false;
                            break;
                        }
                    }
                }
                if !verified {
                    kernel_fail += 1;
                    if diverged_everywhere {
                        // no realization terminated: outside the computable domain
                    }
                }
            }

            // representative independence: add u·e_{wγ} to the representative
            let base = UElement::coefficient(
                ctx_w.clone(),
                QuantumLocRat::from_poly(CartanPoly::var(rank, 0)),
            );
            if let Ok(expected) =
                zhelobenko_qw_representative(&alg, &ordering, k, &base, cfg.max_depth)
            {
                for gamma in alg.rs().positive_roots() {
                    let wg = w.apply(gamma);
                    let u_poly = CartanPoly::linear(
                        rank,
                        &(0..rank).map(|_| rng.gen_range(-2..=2)).collect::<Vec<_>>(),
                        rand_q(&mut rng),
                    );
                    let pert = pbw_normal_form(
                        &alg,
                        &ctx_w,
                        &[Atom::C(QuantumLocRat::from_poly(u_poly)), Atom::R(wg)],
                    );
                    let rep = base.add(&alg, &pert);
                    match zhelobenko_qw_representative(&alg, &ordering, k, &rep, cfg.max_depth) {
                        Ok(got) => {
                            if got != expected {
                                indep_fail += 1;
                            }
                        }
                        Err(_) => indep_fail += 1,
                    }
                }
            } else {
                indep_fail += 1;
            }
        }
        out.push(case(
            format!("prop3/{label}/image-invariance"),
            image_fail == 0,
            format!("{image_fail} failures"),
        ));
        out.push(case(
            format!("prop3/{label}/kernel"),
            kernel_fail == 0,
            format!("{kernel_fail} failures"),
        ));
        out.push(case(
            format!("prop3/{label}/representative-independence"),
            indep_fail == 0,
            format!("{indep_fail} failures"),
        ));
    }

    // ordering independence for w₀ on A2 across the two normal orderings
    let alg = Algebra::from_label("A2").expect("algebra");
    let orderings = all_normal_orderings(alg.rs(), None);
    let (o1, o2) = (&orderings[0], &orderings[1]);
    let ctx1 = PbwContext::twisted(&alg, o1, 1).expect("ctx");
    let ctx2 = PbwContext::twisted(&alg, o2, 1).expect("ctx");
    let std1 = PbwContext::standard(o1);
    let mut rng = rng_for(cfg, 0x9a_0907);
    let mut indep_fail = 0usize;
    let mut inputs: Vec<(UElement, UElement)> = vec![(
        UElement::one(&alg, ctx1.clone()),
        UElement::one(&alg, ctx2.clone()),
    )];
    for _ in 0..4 {
        let poly = CartanPoly::linear(
            2,
            &[rng.gen_range(-3..=3), rng.gen_range(-3..=3)],
            rand_q(&mut rng),
        );
        inputs.push((
            UElement::coefficient(ctx1.clone(), QuantumLocRat::from_poly(poly.clone())),
            UElement::coefficient(ctx2.clone(), QuantumLocRat::from_poly(poly)),
        ));
    }
    // a word input living in both carriers: e_θ commutes into both contexts
    let theta = Root(vec![1, 1]);
    inputs.push((
        pbw_normal_form(&alg, &ctx1, &[Atom::R(theta.clone())]),
        pbw_normal_form(&alg, &ctx2, &[Atom::R(theta.clone())]),
    ));
    for (x1, x2) in &inputs {
        let r1 = zhelobenko_qw_representative(&alg, o1, 1, x1, cfg.max_depth);
        let r2 = zhelobenko_qw_representative(&alg, o2, 1, x2, cfg.max_depth);
        match (r1, r2) {
            (Ok(a), Ok(b)) => {
                let b1 = VermaVector::reduce(&convert(&alg, b.as_u(), &std1));
                if a != b1 {
                    indep_fail += 1;
                }
            }
            _ => indep_fail += 1,
        }
    }
    out.push(case(
        "prop3/A2/w0-ordering-independence",
        indep_fail == 0,
        format!("{indep_fail} failures"),
    ));
    out
}

// ---------------------------------------------------------------------------
// Criterion 7: classical Zhelobenko operators
// ---------------------------------------------------------------------------

fn prop4(cfg: &VerifyConfig) -> Vec<CaseResult> {
    let mut out = Vec::new();
    for label in ["A1", "A2"] {
        let alg = Algebra::from_label(label).expect("algebra");
        let rank = alg.rank();
        let mut rng = rng_for(cfg, 0x9a_0908);
        let mut kernel_fail = 0usize;
        let mut inv_fail = 0usize;
        let mut eval_fail = 0usize;
        let mut series_fail = 0usize;
        for w in weyl_group(alg.rs()) {
            let (ordering, k) = realizations(&alg, &w)[0].clone();
            let carrier = twisted_carrier(&alg, &ordering, k).expect("carrier");
            let Carrier::Twisted(wpos) = carrier.clone() else {
                unreachable!()
            };
            let delta_w = alg.rs().delta_w(&w);

            // random functions on b^w (with localized coefficients)
            let rand_twisted = |rng: &mut ChaCha8Rng, poly_only: bool| -> PolyFunc {
                let mut f = PolyFunc::zero(carrier.clone());
                for _ in 0..rng.gen_range(1..=2) {
                    let mut term = PolyFunc::coefficient(carrier.clone(), {
                        let mut c = ClassicalLocRat::from_poly(CartanPoly::linear(
                            rank,
                            &(0..rank).map(|_| rng.gen_range(-3..=3)).collect::<Vec<_>>(),
                            rand_q(rng),
                        ));
                        if !poly_only && rng.gen_bool(0.4) {
                            let roots = alg.rs().positive_roots();
                            c = c.div_factor(
                                alg.rs(),
                                RootFactor(roots[rng.gen_range(0..roots.len())].clone()),
                                1,
                            );
                        }
                        c
                    });
                    for g in &wpos {
                        if rng.gen_bool(0.5) {
                            let s = PolyFunc::symbol(&alg, carrier.clone(), &g.neg())
                                .expect("twisted symbol");
                            term = term.mul(&alg, &s);
                        }
                    }
                    f = f.add(&alg, &term);
                }
                f
            };

            for _ in 0..4 {
                let f = rand_twisted(&mut rng, false);
                let qf = match zhelobenko_classical(&alg, &ordering, k, &f) {
                    Ok(r) => r,
                    Err(_) => {
                        inv_fail += 1;
                        continue;
                    }
                };
                // invariance on the generators of n_w
                for a in &delta_w {
                    if !e_action(&alg, a, &qf).map(|r| r.is_zero()).unwrap_or(false) {
                        inv_fail += 1;
                    }
                }
                // kernel
                for a in &delta_w {
                    let killer = PolyFunc::symbol(&alg, carrier.clone(), a).expect("kernel symbol");
                    let prod = f.mul(&alg, &killer);
                    if !zhelobenko_classical(&alg, &ordering, k, &prod)
                        .map(|r| r.is_zero())
                        .unwrap_or(false)
                    {
                        kernel_fail += 1;
                    }
                }
                // evaluation oracle at random rational regular points
                let reduction = symbolic_partial_decompose(&alg, &ordering, k).expect("sym");
                for _ in 0..13 {
                    let y = rand_point(&alg, &mut rng);
                    let lie = y.to_lie();
                    let reduced = partial_decompose(&alg, &lie, &ordering, k)
                        .expect("decompose")
                        .reduced;
                    // f evaluated on the reduced point: substitute coordinates
                    let mut expected = Q::zero();
                    let mut ok = true;
                    for (mono, c) in f.terms() {
                        let mut v = match c.eval(alg.rs(), &y.h) {
                            Ok(v) => v,
                            Err(_) => {
                                ok = false;
                                break;
                            }
                        };
                        for (g, &p) in mono {
                            let coord = reduced.coeff(&g.neg());
                            for _ in 0..p {
                                v *= coord.clone();
                            }
                        }
                        expected += v;
                    }
                    if !ok {
                        continue;
                    }
                    match eval_on_borel(&alg, &qf, &y) {
                        Ok(got) => {
                            if got != expected {
                                eval_fail += 1;
                            }
                        }
                        Err(_) => eval_fail += 1,
                    }
                    let _ = &reduction;
                }
            }

            // series path agrees with substitution on polynomial inputs
            for _ in 0..4 {
                let f = rand_twisted(&mut rng, true);
                let subst = zhelobenko_classical(&alg, &ordering, k, &f);
                let series = zhelobenko_classical_series(&alg, &ordering, k, &f, cfg.max_depth);
                match (subst, series) {
                    (Ok(a), Ok(b)) => {
                        if a != b {
                            series_fail += 1;
                        }
                    }
                    _ => series_fail += 1,
                }
            }
        }
        out.push(case(
            format!("prop4/{label}/kernel"),
            kernel_fail == 0,
            format!("{kernel_fail} failures"),
        ));
        out.push(case(
            format!("prop4/{label}/N_w-invariance"),
            inv_fail == 0,
            format!("{inv_fail} failures"),
        ));
        out.push(case(
            format!("prop4/{label}/evaluation-oracle×50+"),
            eval_fail == 0,
            format!("{eval_fail} failures"),
        ));
        out.push(case(
            format!("prop4/{label}/series=substitution"),
            series_fail == 0,
            format!("{series_fail} failures"),
        ));
    }
    out
}

// ---------------------------------------------------------------------------
// Criterion 8: combinatorial layer
// ---------------------------------------------------------------------------

fn combinatorics(_cfg: &VerifyConfig) -> Vec<CaseResult> {
    let mut out = Vec::new();

    // root counts
    let expected_counts = [("A1", 1), ("A2", 3), ("B2", 4), ("A3", 6), ("G2", 6)];
    let mut count_ok = true;
    let mut detail = String::new();
    for (label, n) in expected_counts {
        match RootSystem::from_label(label) {
            Ok(rs) => {
                if rs.num_positive() != n {
                    count_ok = false;
                    detail.push_str(&format!("{label}: N = {} ≠ {n}; ", rs.num_positive()));
                }
            }
            Err(e) => {
                count_ok = false;
                detail.push_str(&format!("{label}: {e}; "));
            }
        }
    }
    out.push(case("combinatorics/root-counts", count_ok, detail));

    for label in ["A1", "A2", "B2", "G2", "A3", "B3"] {
        let rs = RootSystem::from_label(label).expect("root system");

        // Δ_{suffix(O,k)} = {β_k,…,β_N} for every enumerated ordering
        let cap = if rs.rank() >= 3 { Some(8) } else { None };
        let mut suffix_ok = true;
        for o in all_normal_orderings(&rs, cap) {
            if !validate_normal_ordering(&rs, o.roots()) {
                suffix_ok = false;
            }
            for k in 1..=o.len() + 1 {
                let w = weyl_from_suffix(&rs, &o, k).expect("suffix");
                let suffix: BTreeSet<Root> = o.roots()[k - 1..].iter().cloned().collect();
                let dw: BTreeSet<Root> = rs.delta_w(&w).into_iter().collect();
                if suffix != dw {
                    suffix_ok = false;
                }
            }
        }
        out.push(case(
            format!("combinatorics/{label}/suffix-inversion-sets"),
            suffix_ok,
            "",
        ));

        // w(Δ_{w⁻¹}) = −Δ_w over the whole Weyl group
        let mut winv_ok = true;
        for w in weyl_group(&rs) {
            let lhs: BTreeSet<Root> = rs
                .delta_w(&w.inverse())
                .iter()
                .map(|a| w.apply(a))
                .collect();
            let rhs: BTreeSet<Root> = rs.delta_w(&w).iter().map(Root::neg).collect();
            if lhs != rhs {
                winv_ok = false;
            }
            let comp = rs.w_complement_roots(&w);
            if comp.len() != rs.num_positive() - rs.length(&w)
                || !comp.iter().all(Root::is_positive)
            {
                winv_ok = false;
            }
        }
        out.push(case(
            format!("combinatorics/{label}/w(Δ_w⁻¹)=−Δ_w"),
            winv_ok,
            "",
        ));

        // Jacobi identity and |N| = p+1 are enforced by the constructor;
        // building is the exhaustive check
        let built = Algebra::new(rs);
        out.push(case(
            format!("combinatorics/{label}/jacobi+magnitudes"),
            built.is_ok(),
            built.err().map(|e| e.to_string()).unwrap_or_default(),
        ));
    }

    // sign-convention flip smoke subset: structure still consistent and the
    // decomposition replay still holds
    for label in ["A2", "B2"] {
        let rs = RootSystem::from_label(label).expect("rs");
        let flipped = Algebra::with_sign_convention(
            rs,
            crate::chevalley::SignConvention::ExtraspecialNegative,
        );
        let ok = match &flipped {
            Ok(alg) => {
                let ordering = default_ordering(alg.rs());
                let mut rng = rng_for(&VerifyConfig::default(), 0x51_f1);
                let mut good = true;
                for _ in 0..5 {
                    let y = rand_regular_borel(alg, &mut rng);
                    let d = decompose(alg, &y, &ordering).expect("decompose");
                    if replay(alg, &d).expect("replay") != y {
                        good = false;
                    }
                }
                good
            }
            Err(_) => false,
        };
        out.push(case(
            format!("combinatorics/{label}/flipped-sign-convention"),
            ok,
            "",
        ));
    }
    out
}
