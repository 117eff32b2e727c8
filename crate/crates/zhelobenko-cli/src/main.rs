//! Command-line front end for the zhelobenko engine: parse algebra, ordering
//! and expression inputs, dispatch to the symbolic operators, and print text
//! or JSON reports.
//!
//! Exit codes: 0 success, 2 input error, 3 engine error, 4 verification
//! failure.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zhelobenko::chevalley::{decompose, partial_decompose, Algebra};
use zhelobenko::classical::{
    project_partial, twisted_carrier, zhelobenko_classical, zhelobenko_classical_series,
};
use zhelobenko::error::EngineError;
use zhelobenko::expr;
use zhelobenko::quantum::{
    extremal_projector, zhelobenko_qw_representative, PbwContext, VermaVector,
};
use zhelobenko::roots::{
    all_normal_orderings, default_ordering, normal_ordering_from_reduced_word,
    validate_normal_ordering, weyl_from_suffix, NormalOrdering, Root, RootSystem,
};
use zhelobenko::verify::{run_suite, VerifyConfig, SUITES};

#[derive(Parser)]
#[command(
    name = "zhelobenko",
    about = "Exact projection and Zhelobenko operators for semisimple Lie algebras",
    version
)]
struct Cli {
    /// Algebra: a type label (A1, A2, B2, A3, G2, …) or a Cartan matrix like [[2,-1],[-1,2]]
    #[arg(long, global = true, default_value = "A1")]
    algebra: String,

    /// Normal ordering: "default", "word:i,j,…" (reduced word of the longest
    /// element, 1-based), or an explicit root list [[0,1],[1,1],[1,0]]
    #[arg(long, global = true, default_value = "default")]
    ordering: String,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Seed for randomized suites
    #[arg(long, global = true, default_value_t = 20_160_901)]
    seed: u64,

    /// Depth bound for the operator series
    #[arg(long, global = true, default_value_t = 48)]
    max_depth: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum QwPath {
    Subst,
    Series,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Positive roots, coroots and ρ-values of the algebra
    Roots,
    /// Enumerate normal orderings (deduplicated reduced words of w₀)
    Orderings {
        /// Cap on the number of orderings listed
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Triangular decomposition of a regular Borel element
    Decompose {
        /// The element, e.g. "h:[2] + 3*e[1]"
        #[arg(long)]
        at: String,
        /// Stop index k of the partial decomposition (default: full, k = 1)
        #[arg(long)]
        k: Option<usize>,
    },
    /// Classical extremal projector P (or the partial P_{≥k})
    Project {
        /// Function on b, e.g. "E[-1,0]^2 - 1/2*H[1,1]*E[0,-1]"
        #[arg(long)]
        expr: String,
        /// Partial index k (P_{≥k}); omitted means the full projector
        #[arg(long)]
        partial: Option<usize>,
    },
    /// Classical Zhelobenko operator Q_w
    ZhelobenkoClassical {
        /// Reduced word of w (1-based simple reflections), e.g. "1" or "1,2"
        #[arg(long)]
        w: String,
        /// Function on b^w in the E/H grammar
        #[arg(long)]
        expr: String,
        /// Which implementation to run
        #[arg(long, value_enum, default_value_t = QwPath::Subst)]
        path: QwPath,
    },
    /// Quantum extremal projector p on a Verma vector
    Extremal {
        /// Verma vector, e.g. "F[1]*v0" or "F[1,0]^2*(h[1]+1)*v0"
        #[arg(long)]
        expr: String,
    },
    /// Quantum Zhelobenko operator q_w on a twisted Verma vector
    ZhelobenkoQ {
        /// Reduced word of w (1-based simple reflections)
        #[arg(long)]
        w: String,
        /// Representative in U(g)′ written in the F/E/h grammar
        #[arg(long)]
        expr: String,
    },
    /// Run a verification suite and print a pass/fail table
    Verify {
        /// One of: lemma1, prop1, partial, prop2, sl2, prop3, prop4,
        /// combinatorics, all
        suite: String,
        /// Include the rank-3 heavy cases
        #[arg(long)]
        slow: bool,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    });
}

fn exit_code(e: &EngineError) -> i32 {
    match e {
        EngineError::Parse { .. }
        | EngineError::InvalidCartan(_)
        | EngineError::NonReducedWord(_)
        | EngineError::IndexRange(_)
        | EngineError::NotNormalOrdering(_)
        | EngineError::CarrierMismatch(_)
        | EngineError::UnknownRoot(_)
        | EngineError::InadmissibleFactor(_)
        | EngineError::NotInBorel(_) => 2,
        _ => 3,
    }
}

fn parse_algebra(spec: &str) -> Result<Algebra, EngineError> {
    let spec = spec.trim();
    if spec.starts_with('[') {
        let m: Vec<Vec<i64>> = serde_json::from_str(spec).map_err(|e| EngineError::Parse {
            at: 0,
            msg: format!("bad Cartan matrix JSON: {e}"),
        })?;
        Algebra::new(RootSystem::build(m)?)
    } else {
        Algebra::from_label(spec)
    }
}

fn parse_ordering(rs: &RootSystem, spec: &str) -> Result<NormalOrdering, EngineError> {
    let spec = spec.trim();
    if spec == "default" {
        return Ok(default_ordering(rs));
    }
    if let Some(word) = spec.strip_prefix("word:") {
        let idx: Result<Vec<usize>, _> =
            word.split(',').map(|t| t.trim().parse::<usize>()).collect();
        let idx = idx.map_err(|_| EngineError::Parse {
            at: 0,
            msg: "bad reduced word".into(),
        })?;
        let zero_based: Vec<usize> = idx
            .into_iter()
            .map(|i| {
                i.checked_sub(1).ok_or(EngineError::IndexRange(
                    "reflection indices are 1-based".into(),
                ))
            })
            .collect::<Result<_, _>>()?;
        return normal_ordering_from_reduced_word(rs, &zero_based);
    }
    // explicit JSON list of roots
    let roots: Vec<Vec<i64>> = serde_json::from_str(spec).map_err(|e| EngineError::Parse {
        at: 0,
        msg: format!("bad ordering JSON: {e}"),
    })?;
    let seq: Vec<Root> = roots.into_iter().map(Root).collect();
    if !validate_normal_ordering(rs, &seq) {
        return Err(EngineError::NotNormalOrdering(
            "sequence violates the betweenness condition".into(),
        ));
    }
    let mut words = all_normal_orderings(rs, None);
    words.retain(|o| o.roots() == seq.as_slice());
    words
        .pop()
        .ok_or_else(|| EngineError::NotNormalOrdering("ordering not realizable".into()))
}

/// Parses a 1-based reduced word and produces an adapted (ordering, k).
fn adapted_for_word(alg: &Algebra, w_spec: &str) -> Result<(NormalOrdering, usize), EngineError> {
    let idx: Result<Vec<usize>, _> = w_spec
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect();
    let idx = idx.map_err(|_| EngineError::Parse {
        at: 0,
        msg: "bad reduced word for w".into(),
    })?;
    let mut word = Vec::new();
    for i in idx {
        if i == 0 || i > alg.rank() {
            return Err(EngineError::IndexRange(format!(
                "reflection index {i} out of 1..={}",
                alg.rank()
            )));
        }
        word.push(i - 1);
    }
    let w = alg.rs().weyl_from_word(&word)?;
    if alg.rs().length(&w) != word.len() {
        return Err(EngineError::NonReducedWord(format!("{word:?}")));
    }
    zhelobenko::roots::adapted_normal_ordering(alg.rs(), &w)
}

fn emit(cli: &Cli, text: String, value: Value) -> i32 {
    match cli.format {
        Format::Text => println!("{text}"),
        Format::Json => println!(
            "{}",
            json!({"schema": 1, "algebra": cli.algebra, "result": value})
        ),
    }
    0
}

fn run(cli: &Cli) -> Result<i32, EngineError> {
    let alg = parse_algebra(&cli.algebra)?;
    match &cli.command {
        Command::Roots => {
            let rs = alg.rs();
            let mut lines = Vec::new();
            let mut items = Vec::new();
            for r in rs.positive_roots() {
                let co = rs.coroot(r);
                let rho = rs.rho_coroot(r);
                lines.push(format!(
                    "{r}  height {}  coroot {:?}  ρ(h) = {rho}",
                    r.height(),
                    co
                ));
                items.push(json!({"root": r.0, "coroot": co, "rho": rho}));
            }
            Ok(emit(
                cli,
                format!(
                    "positive roots of {} (N = {}):\n{}",
                    cli.algebra,
                    rs.num_positive(),
                    lines.join("\n")
                ),
                json!({"positive_roots": items, "count": rs.num_positive()}),
            ))
        }
        Command::Orderings { limit } => {
            let orderings = all_normal_orderings(alg.rs(), *limit);
            let mut lines = Vec::new();
            let mut items = Vec::new();
            for o in &orderings {
                let pretty: Vec<String> = o.roots().iter().map(|r| r.to_string()).collect();
                lines.push(pretty.join(" < "));
                items.push(json!(o
                    .roots()
                    .iter()
                    .map(|r| r.0.clone())
                    .collect::<Vec<_>>()));
            }
            Ok(emit(
                cli,
                format!(
                    "{} normal orderings:\n{}",
                    orderings.len(),
                    lines.join("\n")
                ),
                json!({"orderings": items}),
            ))
        }
        Command::Decompose { at, k } => {
            let ordering = parse_ordering(alg.rs(), &cli.ordering)?;
            let y = expr::parse_lie_element(alg.rs(), at)?;
            let k = k.unwrap_or(1);
            let d = partial_decompose(&alg, &y, &ordering, k)?;
            let mut lines = Vec::new();
            let mut items = Vec::new();
            for (root, t) in &d.factors {
                lines.push(format!("t[{root}] = {}", fmt_q(t)));
                items.push(json!({"root": root.0, "t": fmt_q(t)}));
            }
            let _ = decompose;
            let rest = expr::print_lie_element(&d.reduced);
            Ok(emit(
                cli,
                format!(
                    "factors (processing order β_N…β_{k}):\n{}\nreduced: {rest}",
                    lines.join("\n")
                ),
                json!({"factors": items, "reduced": expr::lie_to_json(&d.reduced)}),
            ))
        }
        Command::Project { expr: e, partial } => {
            let ordering = parse_ordering(alg.rs(), &cli.ordering)?;
            let f = expr::parse_polyfunc(&alg, zhelobenko::classical::Carrier::Borel, e)?;
            let k = partial.unwrap_or(1);
            let p = project_partial(&alg, &ordering, k, &f)?;
            Ok(emit(
                cli,
                expr::print_polyfunc(&p),
                json!({"projected": expr::polyfunc_to_json(&p), "k": k}),
            ))
        }
        Command::ZhelobenkoClassical { w, expr: e, path } => {
            let (ordering, k) = adapted_for_word(&alg, w)?;
            let carrier = twisted_carrier(&alg, &ordering, k)?;
            let f = expr::parse_polyfunc(&alg, carrier, e)?;
            let run_subst = matches!(path, QwPath::Subst | QwPath::Both);
            let run_series = matches!(path, QwPath::Series | QwPath::Both);
            let mut text = Vec::new();
            let mut val = serde_json::Map::new();
            let mut subst_out = None;
            if run_subst {
                let out = zhelobenko_classical(&alg, &ordering, k, &f)?;
                text.push(format!("substitution: {}", expr::print_polyfunc(&out)));
                val.insert("substitution".into(), expr::polyfunc_to_json(&out));
                subst_out = Some(out);
            }
            if run_series {
                let out = zhelobenko_classical_series(&alg, &ordering, k, &f, cli.max_depth)?;
                text.push(format!("series:       {}", expr::print_polyfunc(&out)));
                if let Some(s) = &subst_out {
                    text.push(format!("paths agree:  {}", s == &out));
                }
                val.insert("series".into(), expr::polyfunc_to_json(&out));
            }
            Ok(emit(cli, text.join("\n"), Value::Object(val)))
        }
        Command::Extremal { expr: e } => {
            let ordering = parse_ordering(alg.rs(), &cli.ordering)?;
            let ctx = PbwContext::standard(&ordering);
            let v = expr::parse_verma(&alg, &ctx, e)?;
            let pv = extremal_projector(&alg, &ordering, &v)?;
            Ok(emit(
                cli,
                expr::print_verma(&pv),
                json!({"projected": expr::uelement_to_json(pv.as_u())}),
            ))
        }
        Command::ZhelobenkoQ { w, expr: e } => {
            let (ordering, k) = adapted_for_word(&alg, w)?;
            let ctx_w = PbwContext::twisted(&alg, &ordering, k)?;
            let (rep, _) = expr::parse_uelement(&alg, &ctx_w, e)?;
            let out = zhelobenko_qw_representative(&alg, &ordering, k, &rep, cli.max_depth)?;
            let _ = weyl_from_suffix(alg.rs(), &ordering, k)?;
            let _: &VermaVector = &out;
            Ok(emit(
                cli,
                expr::print_verma(&out),
                json!({"image": expr::uelement_to_json(out.as_u())}),
            ))
        }
        Command::Verify { suite, slow } => {
            let cfg = VerifyConfig {
                seed: cli.seed,
                slow: *slow,
                max_depth: cli.max_depth,
            };
            let report = run_suite(suite, &cfg)?;
            let mut lines = Vec::new();
            let mut items = Vec::new();
            for c in &report.cases {
                lines.push(format!(
                    "[{}] {}{}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    if c.detail.is_empty() {
                        String::new()
                    } else {
                        format!("  ({})", c.detail)
                    }
                ));
                items.push(json!({"name": c.name, "pass": c.pass, "detail": c.detail}));
            }
            lines.push(report.summary());
            let ok = report.all_pass();
            let code = emit(
                cli,
                lines.join("\n"),
                json!({"suite": report.suite, "cases": items, "pass": ok,
                       "available_suites": SUITES}),
            );
            Ok(if ok { code } else { 4 })
        }
    }
}

fn fmt_q(q: &zhelobenko::coeffs::Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_specs_parse() {
        assert!(parse_algebra("A2").is_ok());
        assert!(parse_algebra("[[2,-1],[-1,2]]").is_ok());
        assert!(parse_algebra("[[2,0],[0,1]]").is_err());
        assert!(parse_algebra("Z9").is_err());
    }

    #[test]
    fn ordering_specs_parse() {
        let rs = RootSystem::from_label("A2").unwrap();
        assert!(parse_ordering(&rs, "default").is_ok());
        assert!(parse_ordering(&rs, "word:1,2,1").is_ok());
        assert!(parse_ordering(&rs, "word:1,1,2").is_err());
        assert!(parse_ordering(&rs, "[[1,0],[1,1],[0,1]]").is_ok());
        assert!(parse_ordering(&rs, "[[1,0],[0,1],[1,1]]").is_err());
    }
}
