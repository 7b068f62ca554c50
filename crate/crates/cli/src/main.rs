use clap::{Parser, Subcommand, ValueEnum};
use doubling::corpus::{load_dir, Entry};
use doubling::dimreg::{
    amplitude, eval_continued, integrate_gaussian, laurent_extract, BilinearForm, CircleOptions, DimregError,
    GaussianElement, SchwingerIntegrand, Subspace,
};
use doubling::graph::EdgeSet;
use doubling::hopf::{describe, kept_ids, Hopf, Tensor};
use doubling::laurent::LaurentSeries;
use doubling::rational::{fmt_q, fmt_sig};
use doubling::renorm::{
    birkhoff, block_dim, formally_equal, integrate_series, operators_equal, random_probes, render_op, Character,
    RenormError, Root, Scheme,
};
use doubling::theory::{SpecSub, SpecifiedGraph, Theory, TheoryError};
use num_complex::Complex64;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "renorm", version, about = "Doubling bialgebra, Birkhoff renormalization and dimensional regularization")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpaceArg {
    H,
    D,
}

#[derive(Clone, Copy, ValueEnum)]
enum SchemeArg {
    Minimal,
    Taylor,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Measure {
    Lebesgue,
    Normalized,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Suite {
    All,
    Coassociativity,
    P2,
    Group,
    Birkhoff,
}

#[derive(Subcommand)]
enum Cmd {
    /// Structural summary of a graph and its membership in the theory.
    Validate {
        graph: PathBuf,
        #[arg(long, default_value = "phi3")]
        theory: String,
    },
    /// Coproduct of a graph (space H) or of a pair (space D).
    Coproduct {
        #[arg(long, value_enum, default_value = "h")]
        space: SpaceArg,
        #[arg(long, default_value = "phi3")]
        theory: String,
        #[arg(long)]
        graph: PathBuf,
        /// Subgraph of the pair, `edges=h1,h2` by half-edge ids.
        #[arg(long)]
        pair: Option<String>,
        #[arg(long)]
        index: Option<u32>,
        /// Apply the quotient by degree-zero generators.
        #[arg(long)]
        quotient: bool,
    },
    /// Specified subgraphs entering the coproduct.
    Pairs {
        #[arg(long, default_value = "phi3")]
        theory: String,
        #[arg(long)]
        graph: PathBuf,
    },
    /// Birkhoff decomposition of a character on one pair.
    Birkhoff {
        #[arg(long, default_value = "phi3")]
        theory: String,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        subgraph: Option<String>,
        #[arg(long)]
        index: Option<u32>,
        #[arg(long, value_enum, default_value = "minimal")]
        scheme: SchemeArg,
        /// `feynman` or `synthetic:<seed>`.
        #[arg(long, default_value = "feynman")]
        character: String,
        /// Orders shown, `lo..hi`.
        #[arg(long, default_value = "-3..3", allow_hyphen_values = true)]
        window: String,
        /// Also apply φ₊ to the numeric Laurent coefficients of the amplitude.
        #[arg(long)]
        numeric: bool,
    },
    /// Value of a Schwinger integrand, or the exact Gaussian integral of a form.
    Integrate {
        #[arg(long, conflicts_with = "gaussian")]
        integrand: Option<PathBuf>,
        /// Form JSON `{"matrix": [[..]]}` to integrate exactly.
        #[arg(long)]
        gaussian: Option<PathBuf>,
        /// Retained coordinates for `--gaussian`, comma separated.
        #[arg(long, default_value = "")]
        keep: String,
        /// Dimension, `re` or `re,im`.
        #[arg(long, default_value = "4", allow_hyphen_values = true)]
        d: String,
        /// External form `C` as a JSON matrix of numbers.
        #[arg(long)]
        external: Option<String>,
        #[arg(long, value_enum, default_value = "lebesgue")]
        measure: Measure,
    },
    /// Laurent coefficients in `z = D − center`.
    Laurent {
        #[arg(long)]
        integrand: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        center: i64,
        #[arg(long, default_value = "-2..2", allow_hyphen_values = true)]
        window: String,
        #[arg(long)]
        external: Option<String>,
        #[arg(long, default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, value_enum, default_value = "lebesgue")]
        measure: Measure,
    },
    /// Invariant suites over a corpus directory.
    Check {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// Group-law suite; same as `check --suite group`.
    CheckGroup {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Graphviz rendering of a graph.
    ExportDot {
        graph: PathBuf,
        #[arg(long, default_value = "phi3")]
        theory: String,
    },
    /// Amplitude integrand of a graph as integrand JSON.
    Amplitude {
        #[arg(long, default_value = "phi3")]
        theory: String,
        #[arg(long)]
        graph: PathBuf,
    },
}

/// Error with its exit status: 1 parse, 2 precondition, 3 numeric, 4 failed check.
struct Failure {
    code: u8,
    kind: &'static str,
    detail: String,
}

fn parse_err(detail: impl ToString) -> Failure {
    Failure { code: 1, kind: "parse", detail: detail.to_string() }
}

fn precondition(detail: impl ToString) -> Failure {
    Failure { code: 2, kind: "precondition", detail: detail.to_string() }
}

impl From<TheoryError> for Failure {
    fn from(e: TheoryError) -> Self {
        match e {
            TheoryError::Parse(_) => parse_err(e),
            TheoryError::Graph(ref g) if matches!(g, doubling::graph::GraphError::Parse(_)) => parse_err(e),
            _ => precondition(e),
        }
    }
}

impl From<DimregError> for Failure {
    fn from(e: DimregError) -> Self {
        match e {
            DimregError::NotConvergent(_) | DimregError::QuadratureFailure { .. } => {
                Failure { code: 3, kind: "numeric", detail: e.to_string() }
            }
            _ => precondition(e),
        }
    }
}

impl From<RenormError> for Failure {
    fn from(e: RenormError) -> Self {
        match e {
            RenormError::Theory(t) => t.into(),
            RenormError::Dimreg(d) => d.into(),
            other => precondition(other),
        }
    }
}

type Res<T> = Result<T, Failure>;

fn read(p: &Path) -> Res<String> {
    std::fs::read_to_string(p).map_err(|e| parse_err(format!("{}: {e}", p.display())))
}

fn load_theory(s: &str) -> Res<Theory> {
    let p = Path::new(s);
    if p.exists() {
        let text = read(p)?;
        let t = if s.ends_with(".toml") { Theory::from_toml_str(&text) } else { Theory::from_json_str(&text) };
        return t.map_err(parse_err);
    }
    Theory::preset(s).map_err(precondition)
}

fn load_graph(t: &Theory, p: &Path) -> Res<SpecifiedGraph> {
    let text = read(p)?;
    Ok(SpecifiedGraph::from_json_str(t, &text)?)
}

fn parse_window(s: &str) -> Res<(i64, i64)> {
    let (a, b) = s.split_once("..").ok_or_else(|| parse_err(format!("window `{s}` is not lo..hi")))?;
    let lo = a.trim().parse().map_err(|_| parse_err(format!("bad window bound `{a}`")))?;
    let hi = b.trim().parse().map_err(|_| parse_err(format!("bad window bound `{b}`")))?;
    if lo > hi {
        return Err(precondition("empty window"));
    }
    Ok((lo, hi))
}

fn parse_d(s: &str) -> Res<Complex64> {
    let parts: Vec<&str> = s.split(',').collect();
    let num = |x: &str| x.trim().parse::<f64>().map_err(|_| parse_err(format!("bad dimension `{s}`")));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(parse_err(format!("bad dimension `{s}`"))),
    }
}

fn parse_external(s: &Option<String>) -> Res<Option<Vec<Vec<f64>>>> {
    s.as_ref().map(|x| serde_json::from_str(x).map_err(parse_err)).transpose()
}

/// Kept pairs named by half-edge ids, `edges=a,b` or `edges=a-b,...`.
fn parse_edges(sg: &SpecifiedGraph, s: &str) -> Res<EdgeSet> {
    let body = s.strip_prefix("edges=").unwrap_or(s);
    let g = &sg.graph;
    let mut kept = EdgeSet::EMPTY;
    for item in body.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let id = item.split('-').next().unwrap();
        let h = g.halfedge_index(id).ok_or_else(|| precondition(format!("unknown half-edge `{id}`")))?;
        let p = g.pair_of(h).ok_or_else(|| precondition(format!("`{id}` is an external leg")))?;
        kept.insert(p);
    }
    Ok(kept)
}

fn find_sub(sg: &SpecifiedGraph, t: &Theory, s: &Option<String>, index: Option<u32>) -> Res<SpecSub> {
    let Some(s) = s else { return Ok(sg.full()) };
    let kept = parse_edges(sg, s)?;
    sg.coproduct_subgraphs(t)?
        .into_iter()
        .find(|c| c.kept == kept && index.map_or(true, |j| c.spec.values().all(|&x| x == j)))
        .ok_or_else(|| precondition("not a specified subgraph of the graph in this theory"))
}

fn float(x: f64) -> String {
    fmt_sig(x, 12)
}

fn render_f64(s: &LaurentSeries<f64>) -> String {
    s.render(|c| float(*c))
}

fn cmd_validate(graph: &Path, theory: &str) -> Res<String> {
    let t = load_theory(theory)?;
    let (g, _) = doubling::graph::Graph::from_json_str(&read(graph)?).map_err(parse_err)?;
    let g = t.normalize_labels(&g);
    let omega = t.superficial_degree(&g)?;
    let mut out = format!(
        "L={}, 1PI={}, ω={}\n",
        g.loop_number(),
        if g.is_1pi() { "yes" } else { "no" },
        omega
    );
    out.push_str(&format!(
        "vertices={} halfedges={} pairs={} components={}\n",
        g.vertices().len(),
        g.halfedges().len(),
        g.num_pairs(),
        g.num_components()
    ));
    let sg = load_graph(&t, graph)?;
    out.push_str(&format!("in-theory=yes spec={:?}\n", sg.spec));
    Ok(out)
}

fn cmd_coproduct(space: SpaceArg, theory: &str, graph: &Path, pair: &Option<String>, index: Option<u32>, quotient: bool) -> Res<String> {
    let t = load_theory(theory)?;
    let sg = load_graph(&t, graph)?;
    let mut h = Hopf::new(t.clone());
    let (m, d) = match space {
        SpaceArg::H => {
            if pair.is_some() {
                return Err(precondition("--pair needs --space D"));
            }
            let m = h.register_graph(&sg);
            let d = h.coproduct_mono(&m)?;
            (m, d)
        }
        SpaceArg::D => {
            let sub = find_sub(&sg, &t, pair, index)?;
            let m = h.register_pair(&sg, &sub);
            let d = h.coproduct_mono(&m)?;
            (m, d)
        }
    };
    let d: Tensor = if quotient { h.quotient(&d) } else { d };
    let mut out = String::new();
    for k in &m {
        out.push_str(&format!("# {}\n", describe(&h, k)));
    }
    out.push_str(&h.render(&d));
    out.push_str(&format!("# terms: {}\n", d.len()));
    Ok(out)
}

fn cmd_pairs(theory: &str, graph: &Path) -> Res<String> {
    let t = load_theory(theory)?;
    let sg = load_graph(&t, graph)?;
    let mut out = String::new();
    for s in sg.coproduct_subgraphs(&t)? {
        let spec: Vec<String> = s.spec.values().map(|j| j.to_string()).collect();
        out.push_str(&format!(
            "|γ|={} edges=[{}] spec=[{}]\n",
            sg.loops(&s),
            kept_ids(&sg.graph, s.kept).join(","),
            spec.join(",")
        ));
    }
    Ok(out)
}

fn parse_character(s: &str) -> Res<Character> {
    if s == "feynman" {
        return Ok(Character::feynman(2));
    }
    if let Some(seed) = s.strip_prefix("synthetic:") {
        let seed = seed.parse().map_err(|_| parse_err(format!("bad seed in `{s}`")))?;
        return Ok(Character::synthetic(seed, 2));
    }
    Err(parse_err(format!("unknown character `{s}`")))
}

fn window_view(x: &doubling::renorm::LaurentOp, (lo, hi): (i64, i64)) -> doubling::renorm::LaurentOp {
    let terms = x.terms().filter(|(n, _)| (lo..=hi).contains(n)).map(|(n, c)| (n, c.clone()));
    LaurentSeries::from_terms(terms, x.trunc().min(hi))
}

#[allow(clippy::too_many_arguments)]
fn cmd_birkhoff(
    theory: &str,
    graph: &Path,
    subgraph: &Option<String>,
    index: Option<u32>,
    scheme: SchemeArg,
    character: &str,
    window: &str,
    numeric: bool,
) -> Res<String> {
    let t = load_theory(theory)?;
    let sg = load_graph(&t, graph)?;
    let sub = find_sub(&sg, &t, subgraph, index)?;
    let w = parse_window(window)?;
    let phi = parse_character(character)?;
    let scheme = match scheme {
        SchemeArg::Minimal => Scheme::Minimal,
        SchemeArg::Taylor => Scheme::Taylor,
    };
    let root = Root::new(&t, &sg);
    let (minus, plus, _) = birkhoff(&phi, scheme);
    let g = Some(&sg.graph);
    let v = phi.on_pair(&root, &sub)?;
    let m = minus.on_pair(&root, &sub)?;
    let p = plus.on_pair(&root, &sub)?;
    let mut out = format!("pair: edges=[{}] |γ|={}\n", kept_ids(&sg.graph, sub.kept).join(","), sg.loops(&sub));
    out.push_str(&format!("phi: {}\n", render_op(&window_view(&v, w), g)));
    out.push_str(&format!("phi_minus: {}\n", render_op(&window_view(&m, w), g)));
    out.push_str(&format!("phi_plus: {}\n", render_op(&window_view(&p, w), g)));
    let at_zero = p.coeff(0).map_err(precondition)?;
    out.push_str(&format!("renormalized z^0: {}\n", at_zero.render(g)));
    let rebuilt = minus.inverse().convolve(&plus).on_pair(&root, &sub)?;
    out.push_str(&format!("reconstruction: {}\n", if formally_equal(&rebuilt, &v) { "ok" } else { "FAILED" }));
    if numeric {
        if sub != sg.full() || sg.graph.num_components() != 1 {
            return Err(precondition("--numeric needs the full subgraph of a connected graph"));
        }
        let amp = amplitude(&t, &sg.graph)?;
        let a = laurent_extract(&amp.integrand, None, t.dimension, (w.0.min(-1), w.1.max(0)), CircleOptions::default())?;
        let r = integrate_series(&p, &a)?;
        out.push_str(&format!("amplitude: {}\n", render_f64(&a)));
        out.push_str(&format!("renormalized amplitude: {}\n", render_f64(&r)));
    }
    Ok(out)
}

fn cmd_integrate(
    integrand: &Option<PathBuf>,
    gaussian: &Option<PathBuf>,
    keep: &str,
    d: &str,
    external: &Option<String>,
    measure: Measure,
) -> Res<String> {
    let d = parse_d(d)?;
    let c = parse_external(external)?;
    if let Some(path) = gaussian {
        let form: BilinearForm = serde_json::from_str(&read(path)?).map_err(parse_err)?;
        let form = BilinearForm::new(form.matrix)?;
        let n = form.dim();
        let keep: Vec<usize> = keep
            .split(',')
            .map(str::trim)
            .filter(|x| !x.is_empty())
            .map(|x| x.parse().map_err(|_| parse_err(format!("bad index `{x}`"))))
            .collect::<Res<_>>()?;
        let f = Subspace::new(n, keep)?;
        let mut r = integrate_gaussian(&GaussianElement::of_form(&form), &f)?;
        if measure == Measure::Normalized {
            r = r.with_normalized_measure(n - f.dim());
        }
        let m = f.dim();
        let zero = vec![vec![0.0; m]; m];
        let v = r.value(c.as_deref().unwrap_or(&zero), d);
        let rows: Vec<String> = r
            .exponential
            .iter()
            .map(|row| format!("[{}]", row.iter().map(fmt_q).collect::<Vec<_>>().join(", ")))
            .collect();
        return Ok(format!(
            "prefactor: {}\nexponential: [{}]\nvalue: {} {}i\n",
            r.prefactor.render(),
            rows.join(", "),
            float(v.re),
            float(v.im)
        ));
    }
    let Some(path) = integrand else { return Err(parse_err("one of --integrand or --gaussian is required")) };
    let mut s = SchwingerIntegrand::from_json_str(&read(path)?)?;
    s.normalized_measure |= measure == Measure::Normalized;
    let v = eval_continued(&s, c.as_deref(), d)?;
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Failure { code: 3, kind: "numeric", detail: format!("no finite value at D = {d}") });
    }
    Ok(format!("value: {} {}i\n", float(v.re), float(v.im)))
}

#[allow(clippy::too_many_arguments)]
fn cmd_laurent(
    integrand: &Path,
    center: i64,
    window: &str,
    external: &Option<String>,
    radius: f64,
    samples: usize,
    measure: Measure,
) -> Res<String> {
    let mut s = SchwingerIntegrand::from_json_str(&read(integrand)?)?;
    s.normalized_measure |= measure == Measure::Normalized;
    let c = parse_external(external)?;
    let w = parse_window(window)?;
    let a = laurent_extract(&s, c.as_deref(), center, w, CircleOptions { radius, samples })?;
    let mut out = format!("{}\n", render_f64(&a));
    for n in w.0..=w.1 {
        out.push_str(&format!("a[{n}] = {}\n", float(a.coeff(n).unwrap_or(0.0))));
    }
    Ok(out)
}

struct Tally {
    pass: usize,
    fail: usize,
    lines: Vec<String>,
}

impl Tally {
    fn record(&mut self, ok: bool, what: String) {
        if ok {
            self.pass += 1;
        } else {
            self.fail += 1;
            self.lines.push(format!("FAIL {what}"));
        }
    }
}

fn suite_group(corpus: &[Entry], tally: &mut Tally) -> Res<()> {
    let chars = [
        ("feynman", Character::feynman(2)),
        ("synthetic:1", Character::synthetic(1, 2)),
        ("synthetic:2", Character::synthetic(2, 2)),
        ("synthetic:3", Character::synthetic(3, 2)),
    ];
    let unit = Character::unit();
    for e in corpus {
        let root = Root::new(&e.theory, &e.graph);
        let probes = random_probes(block_dim(&root, EdgeSet::EMPTY)?, 5, 7);
        let base = SpecSub::empty();
        for (i, (name, phi)) in chars.iter().enumerate() {
            let (psi, chi) = (&chars[(i + 1) % 4].1, &chars[(i + 2) % 4].1);
            let laws = [
                ("left unit", unit.convolve(phi), phi.clone()),
                ("right unit", phi.convolve(&unit), phi.clone()),
                ("associativity", phi.convolve(psi).convolve(chi), phi.convolve(&psi.convolve(chi))),
                ("right inverse", phi.convolve(&phi.inverse()), unit.clone()),
                ("left inverse", phi.inverse().convolve(phi), unit.clone()),
            ];
            for sub in root.pairs()? {
                for (law, a, b) in &laws {
                    let (x, y) = (a.on_pair(&root, &sub)?, b.on_pair(&root, &sub)?);
                    let ok = formally_equal(&x, &y) && operators_equal(&root, &base, &x, &y, &probes)?;
                    tally.record(ok, format!("group {law} {name} {}", e.name));
                }
            }
        }
    }
    Ok(())
}

fn suite_birkhoff(corpus: &[Entry], tally: &mut Tally) -> Res<()> {
    for e in corpus {
        let root = Root::new(&e.theory, &e.graph);
        for scheme in [Scheme::Minimal, Scheme::Taylor] {
            for phi in [Character::feynman(2), Character::synthetic(1, 2)] {
                let (minus, plus, _) = birkhoff(&phi, scheme);
                let rebuilt = minus.inverse().convolve(&plus);
                for sub in root.pairs()? {
                    let base = SpecSub::empty();
                    let v = phi.on_pair(&root, &sub)?;
                    let mut ok = formally_equal(&rebuilt.on_pair(&root, &sub)?, &v);
                    if root.degree(&base, &sub) > 0 {
                        ok &= scheme.in_minus(&root, &base, &sub, &minus.on_pair(&root, &sub)?);
                        ok &= scheme.in_plus(&root, &base, &sub, &plus.on_pair(&root, &sub)?);
                    }
                    tally.record(ok, format!("birkhoff {scheme:?} {}", e.name));
                }
            }
        }
    }
    Ok(())
}

fn cmd_check(corpus: &Path, suite: Suite) -> Res<String> {
    let entries = load_dir(corpus)?;
    let mut tally = Tally { pass: 0, fail: 0, lines: Vec::new() };
    let run = |s: Suite| suite == Suite::All || suite == s;
    let mut out = String::new();
    if run(Suite::Coassociativity) || run(Suite::P2) {
        for e in &entries {
            let mut h = Hopf::new(e.theory.clone());
            let mut monos = vec![h.register_graph(&e.graph)];
            for p in e.graph.coproduct_subgraphs(&e.theory)? {
                monos.push(h.register_pair(&e.graph, &p));
            }
            for (i, m) in monos.iter().enumerate() {
                if run(Suite::Coassociativity) {
                    let (l, r) = h.coassociativity(m)?;
                    tally.record(l == r, format!("coassociativity {}", e.name));
                }
                if run(Suite::P2) && i > 0 {
                    let d = h.coproduct_mono(m)?;
                    let lhs = h.p2_tensor(&d);
                    let pm = h.p2_mono(m);
                    let rhs = h.coproduct_mono(&pm)?;
                    tally.record(lhs == rhs, format!("p2 {}", e.name));
                }
            }
        }
    }
    if run(Suite::Group) {
        suite_group(&entries, &mut tally)?;
    }
    if run(Suite::Birkhoff) {
        suite_birkhoff(&entries, &mut tally)?;
    }
    for l in &tally.lines {
        out.push_str(l);
        out.push('\n');
    }
    out.push_str(&format!("graphs: {}\npassed: {}\nfailed: {}\n", entries.len(), tally.pass, tally.fail));
    if tally.fail > 0 {
        print!("{out}");
        return Err(Failure { code: 4, kind: "check-failed", detail: format!("{} checks failed", tally.fail) });
    }
    Ok(out)
}

fn cmd_export_dot(graph: &Path, theory: &str) -> Res<String> {
    let t = load_theory(theory)?;
    let sg = load_graph(&t, graph)?;
    let name = graph.file_stem().map(|s| s.to_string_lossy().to_string()).unwrap_or_default();
    Ok(sg.graph.to_dot(&name))
}

fn cmd_amplitude(theory: &str, graph: &Path) -> Res<String> {
    let t = load_theory(theory)?;
    let sg = load_graph(&t, graph)?;
    let a = amplitude(&t, &sg.graph)?;
    Ok(format!("{}\n", a.integrand.to_json()))
}

fn run(cli: Cli) -> Res<String> {
    match cli.cmd {
        Cmd::Validate { graph, theory } => cmd_validate(&graph, &theory),
        Cmd::Coproduct { space, theory, graph, pair, index, quotient } => {
            cmd_coproduct(space, &theory, &graph, &pair, index, quotient)
        }
        Cmd::Pairs { theory, graph } => cmd_pairs(&theory, &graph),
        Cmd::Birkhoff { theory, graph, subgraph, index, scheme, character, window, numeric } => {
            cmd_birkhoff(&theory, &graph, &subgraph, index, scheme, &character, &window, numeric)
        }
        Cmd::Integrate { integrand, gaussian, keep, d, external, measure } => {
            cmd_integrate(&integrand, &gaussian, &keep, &d, &external, measure)
        }
        Cmd::Laurent { integrand, center, window, external, radius, samples, measure } => {
            cmd_laurent(&integrand, center, &window, &external, radius, samples, measure)
        }
        Cmd::Check { corpus, suite } => cmd_check(&corpus, suite),
        Cmd::CheckGroup { corpus } => cmd_check(&corpus, Suite::Group),
        Cmd::ExportDot { graph, theory } => cmd_export_dot(&graph, &theory),
        Cmd::Amplitude { theory, graph } => cmd_amplitude(&theory, &graph),
    }
}

fn fail(f: Failure) -> ExitCode {
    eprintln!("{}", json!({ "error": f.kind, "detail": f.detail }));
    ExitCode::from(f.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail(parse_err(e.to_string().trim_end()));
        }
    };
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => fail(f),
    }
}
