//! `nccalc` command-line front end.
//!
//! Exit codes: 0 pass, 2 parse or input error, 3 evaluation error,
//! 4 invalid algebra or group data, 5 verification failure.

use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nccalc::geometry::{anholonomy, Frame};
use nccalc::liegroup::{display_rounded, GroupSource, LieGroup, Side, VerifyConfig, MAURER_TOL};
use nccalc::ncexpr::{central_difference, parse_expr, PolyMap};
use nccalc::random::{random_tuple, rng};
use nccalc::{Algebra, Error, Tuple};

#[derive(Parser)]
#[command(
    name = "nccalc",
    version,
    about = "Calculus over non-commutative algebras"
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct Opts {
    /// Built-in algebra (quaternion, complex, real, mat2) or a JSON definition file
    #[arg(long, global = true, default_value = "quaternion")]
    algebra: String,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Number of sample points
    #[arg(long, global = true, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    points: u64,
    #[arg(long, global = true, default_value_t = 1e-8, value_parser = positive)]
    tol_exact: f64,
    #[arg(long, global = true, default_value_t = 1e-5, value_parser = positive)]
    tol_fd: f64,
    #[arg(long, global = true, default_value_t = 1e-6, value_parser = positive)]
    tol_struct: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Pretty,
    Latex,
}

#[derive(Args)]
struct MapInput {
    /// File with the map source; `-` or omitted reads stdin
    input: Option<String>,
    /// Map source given inline
    #[arg(short, long, conflicts_with = "input")]
    expr: Option<String>,
    /// Number of input variables (inferred from the source by default)
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Symbolic derivative matrix of a map
    Derive {
        #[command(flatten)]
        map: MapInput,
        /// Point as `[[coords], ...]` or comma-separated constants like `i, j, k`
        #[arg(long)]
        at: Option<String>,
        /// Increment `dx` applied to the evaluated derivative
        #[arg(long, requires = "at")]
        dx: Option<String>,
    },
    /// Evaluate a map at a point
    Eval {
        #[command(flatten)]
        map: MapInput,
        #[arg(long)]
        at: String,
    },
    /// Compare symbolic derivatives with central differences
    FdCheck {
        #[command(flatten)]
        map: MapInput,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Identity suite, structure constants, Maurer residuals and brackets
    GroupVerify {
        /// Built-in group (quat-mult, quat-affine, complex-mult) or JSON spec file; `-` reads stdin
        group: String,
    },
    /// Structure constants of a group
    Structconst {
        group: String,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
    /// Lie bracket of two tangent vectors at the identity
    Bracket {
        group: String,
        /// Basis label (`i`, `j@2`) or `[[coords], ...]`
        v: String,
        w: String,
        #[arg(long, value_enum, default_value_t = SideArg::Left)]
        side: SideArg,
    },
    /// Anholonomy object of a frame given as JSON `{"n", "entries"}`
    Anholonomy {
        /// Frame file; `-` or omitted reads stdin
        input: Option<String>,
        #[arg(long)]
        at: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Left,
    Right,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Left => Side::Left,
            SideArg::Right => Side::Right,
        }
    }
}

fn positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("`{s}` is not a positive number")),
    }
}

/// Failure carrying its exit code.
struct Fail {
    code: u8,
    msg: String,
}

impl Fail {
    fn input(msg: impl Into<String>) -> Self {
        Fail {
            code: 2,
            msg: msg.into(),
        }
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let code = match &e {
            _ if e.is_parse() => 2,
            _ if e.is_evaluation() => 3,
            Error::InvalidTable(_)
            | Error::NonAssociative(..)
            | Error::NoUnit(_)
            | Error::SpecInvariant { .. } => 4,
            Error::SpreadTooLarge { .. } => 5,
            _ => 2,
        };
        Fail {
            code,
            msg: e.to_string(),
        }
    }
}

/// Document plus verdict.
struct Output {
    doc: Value,
    pretty: String,
    latex: Option<String>,
    pass: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            let text = match cli.opts.format {
                Format::Json => serde_json::to_string_pretty(&out.doc).expect("serializable"),
                Format::Pretty => out.pretty,
                Format::Latex => out.latex.unwrap_or(out.pretty),
            };
            let _ = writeln!(io::stdout().lock(), "{text}");
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(5)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Result<Output, Fail> {
    let o = &cli.opts;
    match &cli.cmd {
        Command::Derive { map, at, dx } => derive(o, map, at.as_deref(), dx.as_deref()),
        Command::Eval { map, at } => eval(o, map, at),
        Command::FdCheck { map, trials } => fd_check(o, map, *trials),
        Command::GroupVerify { group } => group_verify(o, group),
        Command::Structconst { group, side } => structconst(o, group, (*side).into()),
        Command::Bracket { group, v, w, side } => bracket(o, group, v, w, (*side).into()),
        Command::Anholonomy { input, at } => anholonomy_cmd(o, input.as_deref(), at),
    }
}

fn read_input(path: Option<&str>) -> Result<String, Fail> {
    match path {
        None | Some("-") => {
            let mut s = String::new();
            io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Fail::input(format!("reading stdin: {e}")))?;
            Ok(s)
        }
        Some(p) => fs::read_to_string(p).map_err(|e| Fail::input(format!("reading {p}: {e}"))),
    }
}

fn algebra(name: &str) -> Result<Algebra, Fail> {
    if let Some(a) = Algebra::builtin(name) {
        return Ok(a);
    }
    if Path::new(name).exists() {
        return Ok(Algebra::from_json(&read_input(Some(name))?)?);
    }
    Err(Fail::input(format!("unknown algebra `{name}`")))
}

fn load_map(o: &Opts, m: &MapInput) -> Result<PolyMap, Fail> {
    let alg = algebra(&o.algebra)?;
    let src = match &m.expr {
        Some(e) => e.clone(),
        None => read_input(m.input.as_deref())?,
    };
    let src = src.trim();
    Ok(match m.n {
        Some(n) => PolyMap::parse(src, n, &alg)?,
        None => PolyMap::parse_infer(src, &alg)?,
    })
}

/// Splits on top-level commas.
fn split_top(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&s[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&s[start..]);
    out
}

/// `[[coords], ...]` or comma-separated constant expressions.
fn parse_point(s: &str, alg: &Algebra) -> Result<Tuple, Fail> {
    let s = s.trim();
    if s.starts_with('[') {
        let coords: Vec<Vec<f64>> =
            serde_json::from_str(s).map_err(|e| Fail::input(format!("point `{s}`: {e}")))?;
        return Ok(Tuple::from_coords(alg, &coords)?);
    }
    let empty = Tuple(Vec::new());
    let comps = split_top(s)
        .into_iter()
        .map(|part| Ok(parse_expr(part.trim(), 0, alg)?.eval(alg, &empty)?))
        .collect::<Result<Vec<_>, Fail>>()?;
    Ok(Tuple(comps))
}

fn check_len(t: &Tuple, n: usize, what: &str) -> Result<(), Fail> {
    if t.len() != n {
        return Err(Fail::input(format!(
            "{what} has {} components, expected {n}",
            t.len()
        )));
    }
    Ok(())
}

fn derive(o: &Opts, m: &MapInput, at: Option<&str>, dx: Option<&str>) -> Result<Output, Fail> {
    let f = load_map(o, m)?;
    let alg = f.algebra().clone();
    let d = f.diff();
    let mut doc = serde_json::to_value(d.to_json()).expect("serializable");
    let rendered = d.render();
    let dy: Vec<String> = rendered
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let terms: Vec<String> = row
                .iter()
                .enumerate()
                .filter(|(_, e)| e.as_str() != "0")
                .map(|(i, e)| format!("({e}) ∘ dx{}", i + 1))
                .collect();
            let rhs = if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" + ")
            };
            format!("dy{} = {rhs}", k + 1)
        })
        .collect();
    doc["dy"] = json!(dy);
    let mut pretty: Vec<String> = rendered
        .iter()
        .enumerate()
        .flat_map(|(k, row)| {
            row.iter()
                .enumerate()
                .map(move |(i, e)| format!("∂y{}/∂x{} = {e}", k + 1, i + 1))
        })
        .collect();
    pretty.extend(dy.iter().cloned());
    if let Some(at) = at {
        let x = parse_point(at, &alg)?;
        check_len(&x, f.n_in(), "point")?;
        let mm = f.eval_derivative(&x)?;
        doc["at"] = serde_json::to_value(mm.to_json(true)).expect("serializable");
        doc["point"] = json!(x.coords());
        pretty.push(format!("at {x}:"));
        for (k, row) in mm.render().iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                pretty.push(format!("  ∂y{}/∂x{} = {e}", k + 1, i + 1));
            }
        }
        if let Some(dx) = dx {
            let h = parse_point(dx, &alg)?;
            check_len(&h, f.n_in(), "dx")?;
            let v = mm.apply_col(&h)?;
            doc["dy_value"] = json!(v.coords());
            pretty.push(format!("  dy = {v}"));
        }
    }
    Ok(Output {
        doc,
        pretty: pretty.join("\n"),
        latex: Some(d.to_latex()),
        pass: true,
    })
}

fn eval(o: &Opts, m: &MapInput, at: &str) -> Result<Output, Fail> {
    let f = load_map(o, m)?;
    let x = parse_point(at, f.algebra())?;
    check_len(&x, f.n_in(), "point")?;
    let y = f.eval(&x)?;
    Ok(Output {
        doc: json!({ "point": x.coords(), "value": y.coords() }),
        pretty: y.to_string(),
        latex: None,
        pass: true,
    })
}

fn fd_check(o: &Opts, m: &MapInput, trials: usize) -> Result<Output, Fail> {
    let f = load_map(o, m)?;
    let alg = f.algebra().clone();
    let mut r = rng(o.seed);
    let mut worst = 0.0_f64;
    let mut done = 0;
    let mut rejected = 0;
    while done < trials {
        let x = random_tuple(&alg, f.n_in(), &mut r);
        let h = random_tuple(&alg, f.n_in(), &mut r);
        let sym = f.eval_derivative(&x).and_then(|d| d.apply_col(&h));
        let fd = central_difference(|p| f.eval(p), &x, &h);
        match (sym, fd) {
            (Ok(sym), Ok(fd)) => {
                worst = worst.max(fd.dist(&sym) / sym.norm().max(1.0));
                done += 1;
            }
            (Err(e), _) | (_, Err(e)) => {
                if !e.is_evaluation() {
                    return Err(e.into());
                }
                rejected += 1;
                if rejected > 100 * trials.max(1) {
                    return Err(e.into());
                }
            }
        }
    }
    let pass = worst < o.tol_fd;
    Ok(Output {
        doc: json!({
            "seed": o.seed,
            "trials": trials,
            "resampled": rejected,
            "max_relative_deviation": worst,
            "tol": o.tol_fd,
            "pass": pass,
        }),
        pretty: format!(
            "{trials} trials ({rejected} resampled): max relative deviation {worst:e} (tol {:e}) {}",
            o.tol_fd,
            if pass { "PASS" } else { "FAIL" }
        ),
        latex: None,
        pass,
    })
}

fn load_group(o: &Opts, spec: &str) -> Result<LieGroup, Fail> {
    let g = if let Some(g) = LieGroup::builtin(spec) {
        g
    } else {
        let text = read_input(Some(spec))?;
        let src: GroupSource =
            serde_json::from_str(&text).map_err(|e| Fail::input(format!("group spec: {e}")))?;
        let alg = algebra(&src.algebra)?;
        LieGroup::from_source(&src, &alg)?
    };
    g.validate(o.seed)?;
    Ok(g)
}

fn verify_config(o: &Opts) -> VerifyConfig {
    VerifyConfig {
        seed: o.seed,
        points: o.points as usize,
        tol_exact: o.tol_exact,
        tol_fd: o.tol_fd,
        tol_struct: o.tol_struct,
        tol_maurer: MAURER_TOL,
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn group_verify(o: &Opts, spec: &str) -> Result<Output, Fail> {
    let g = load_group(o, spec)?;
    let rep = g.report(&verify_config(o))?;
    let mut lines = vec![format!(
        "group {} over {} (n = {}), seed {}, {} points",
        rep.group, rep.algebra, rep.n, rep.seed, rep.points
    )];
    for i in &rep.identities {
        lines.push(format!(
            "  {:<26} {:>10.3e}  {}  {}",
            i.name,
            i.max_residual,
            verdict(i.pass),
            i.eq
        ));
    }
    for s in &rep.structure_constants {
        lines.push(format!(
            "  structure constants ({}) spread {:.3e}  {}",
            s.side,
            s.spread,
            verdict(s.pass)
        ));
    }
    for m in &rep.maurer {
        lines.push(format!(
            "  maurer ({}) residual {:.3e}  {}",
            m.side,
            m.max_residual,
            verdict(m.pass)
        ));
    }
    for b in &rep.bracket_table {
        lines.push(format!("  [{}, {}]_{} = {}", b.v, b.w, b.side, b.value));
    }
    lines.push(verdict(rep.pass).to_uppercase());
    Ok(Output {
        pass: rep.pass,
        doc: serde_json::to_value(&rep).expect("serializable"),
        pretty: lines.join("\n"),
        latex: None,
    })
}

fn structconst(o: &Opts, spec: &str, side: Side) -> Result<Output, Fail> {
    let g = load_group(o, spec)?;
    let pts = g.random_points(&mut rng(o.seed), (o.points as usize).max(2))?;
    let sc = g.structure_constants(side, &pts, o.tol_struct)?;
    let mut lines = vec![format!("side {side}, spread {:.3e}", sc.spread())];
    for c in 0..g.n() {
        for t in 0..g.n() {
            for q in 0..g.n() {
                lines.push(format!(
                    "R^{}_{}{} = {}",
                    c + 1,
                    t + 1,
                    q + 1,
                    sc.get(c, t, q).render()
                ));
            }
        }
    }
    Ok(Output {
        doc: json!({
            "group": g.name(),
            "seed": o.seed,
            "side": side,
            "spread": sc.spread(),
            "tol": o.tol_struct,
            "flat3": sc.nested(),
        }),
        pretty: lines.join("\n"),
        latex: None,
        pass: true,
    })
}

fn tangent_vector(g: &LieGroup, s: &str) -> Result<Tuple, Fail> {
    let s = s.trim();
    if let Some((_, t)) = g.tangent_basis().into_iter().find(|(l, _)| l == s) {
        return Ok(t);
    }
    let t = parse_point(s, g.algebra())?;
    check_len(&t, g.n(), "tangent vector")?;
    Ok(t)
}

fn bracket(o: &Opts, spec: &str, v: &str, w: &str, side: Side) -> Result<Output, Fail> {
    let g = load_group(o, spec)?;
    let v = tangent_vector(&g, v)?;
    let w = tangent_vector(&g, w)?;
    let pts = g.random_points(&mut rng(o.seed), (o.points as usize).max(2))?;
    let sc = g.structure_constants(side, &pts, o.tol_struct)?;
    let b = sc.bracket(&v, &w);
    Ok(Output {
        doc: json!({
            "group": g.name(),
            "seed": o.seed,
            "side": side,
            "v": v.coords(),
            "w": w.coords(),
            "bracket": b.coords(),
            "spread": sc.spread(),
        }),
        pretty: display_rounded(&b),
        latex: None,
        pass: true,
    })
}

fn anholonomy_cmd(o: &Opts, input: Option<&str>, at: &str) -> Result<Output, Fail> {
    let alg = algebra(&o.algebra)?;
    let frame = Frame::from_json(&read_input(input)?, &alg)?;
    let x = parse_point(at, &alg)?;
    check_len(&x, frame.n(), "point")?;
    let om = anholonomy(&frame, &x)?;
    let n = frame.n();
    let mut lines = Vec::new();
    for i in 0..n {
        for k in 0..n {
            for l in 0..n {
                lines.push(format!(
                    "ω^{}_{}{} = {}",
                    i + 1,
                    k + 1,
                    l + 1,
                    om.get(i, k, l).render()
                ));
            }
        }
    }
    let mut doc = serde_json::to_value(om.to_json()).expect("serializable");
    doc["point"] = json!(x.coords());
    Ok(Output {
        doc,
        pretty: lines.join("\n"),
        latex: None,
        pass: true,
    })
}
