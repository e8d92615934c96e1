//! `teichlab`: surfaces, charts, verifications, pairings and Markov data
//! from the command line. Every file it reads or writes is JSON with
//! rationals as `"p/q"` strings.

mod input;
mod verify;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use teichlab::charts::{AChart, XChart};
use teichlab::laminations::{a_coordinates, intersection_number, reconstruct_a, reconstruct_x, x_coordinates, CurvePath, NormalMulticurve};
use teichlab::markov::{enumerate_solutions, markov_from_chart, markov_of_slope, markov_tree, verify_tree, Slope};
use teichlab::monodromy::{arc_path_a, build_rep_a, classify_and_length, edge_path, horocycle_distance, loop_monodromy_a, loop_monodromy_x, vertex_curve, ElementClass, ExactRatSqrt, Mat2, PositiveValue, Scalar};
use teichlab::pairings::{additive_pairing, additive_pairing_x, lamination_trace, mult_pairing_x, multiplicative_pairing, symbolic_trace};
use teichlab::semifield::{fmt_rat, parse_rat, rat, Semifield, SemifieldTag, TropQ, TropZ};
use teichlab::surface::{SurfaceSig, Triangulation};

use input::{load_chart, load_curve, load_curves, load_surface, Chart};

#[derive(Parser)]
#[command(name = "teichlab", version, about = "Coordinates on triangulated ciliated surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, inspect and flip triangulations; make charts on them.
    #[command(subcommand)]
    Surface(SurfaceCmd),
    /// Mutate a chart at one edge.
    Mutate {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        edge: usize,
        /// Read the chart values in this semifield instead of the one in the file.
        #[arg(long)]
        semifield: Option<SemifieldTag>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run property suites and print a pass/fail table.
    Verify {
        /// Suite name, or `all`.
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(["all", "pentagon", "flips", "tropical", "laminations", "monodromy", "pairings", "poisson", "markov"]))]
        suite: String,
        /// Check this triangulation instead of the built-in sample.
        #[arg(long)]
        surface: Option<PathBuf>,
        #[arg(long, env = "TEICHLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        cases: usize,
    },
    /// Pairings between laminations and points, and trace polynomials.
    #[command(subcommand)]
    Pair(PairCmd),
    /// Markov numbers, triples and the Farey tree.
    #[command(subcommand)]
    Markov(MarkovCmd),
    /// Monodromy of a curve, a hole, or an edge.
    Monodromy {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long, conflicts_with_all = ["vertex", "edge"])]
        curve: Option<PathBuf>,
        #[arg(long, conflicts_with = "edge")]
        vertex: Option<usize>,
        /// λ-length of an edge (A charts).
        #[arg(long)]
        edge: Option<usize>,
        /// Exact entries over ℚ(√ℚ); needs a posRat chart.
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Subcommand)]
enum SurfaceCmd {
    /// Standard triangulation of a signature, optionally scrambled by random flips.
    Build {
        #[arg(long, default_value_t = 0)]
        genus: u32,
        /// Cilia on each boundary component; 0 is a hole.
        #[arg(long, value_delimiter = ',', required = true)]
        boundary: Vec<u32>,
        #[arg(long, default_value_t = 0)]
        flips: usize,
        #[arg(long, env = "TEICHLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Counts, vertices and exchange matrix.
    Info {
        #[arg(long)]
        surface: PathBuf,
    },
    Flip {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        edge: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// A chart on a surface: all ones, random, or given values.
    Chart {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long = "type", value_enum, ignore_case = true)]
        kind: Kind,
        #[arg(long, default_value = "posRat")]
        semifield: SemifieldTag,
        /// Comma-separated values by edge id (X charts: internal edges only).
        #[arg(long, value_delimiter = ',', conflicts_with = "random")]
        values: Option<Vec<String>>,
        #[arg(long)]
        random: bool,
        #[arg(long, env = "TEICHLAB_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Lamination coordinates of a list of curves.
    Coords {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long)]
        curves: PathBuf,
        #[arg(long = "type", value_enum, ignore_case = true)]
        kind: Kind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curves of a tropical chart.
    Curves {
        #[arg(long)]
        chart: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    X,
    A,
}

#[derive(Subcommand)]
enum PairCmd {
    /// ℐ of a lamination chart and a positive chart of the other type.
    Additive {
        #[arg(long)]
        lamination: PathBuf,
        #[arg(long)]
        chart: PathBuf,
    },
    /// 𝕀 of an integral lamination chart and a positive chart of the other type.
    Multiplicative {
        #[arg(long)]
        lamination: PathBuf,
        #[arg(long)]
        chart: PathBuf,
    },
    /// 𝖨 of two lamination charts on the same triangulation.
    Intersection {
        #[arg(long)]
        lamination: PathBuf,
        #[arg(long)]
        with: PathBuf,
    },
    /// Trace polynomial of a closed curve, or of an A lamination.
    Trace {
        #[arg(long, required_unless_present = "lamination")]
        surface: Option<PathBuf>,
        #[arg(long, requires = "surface")]
        curve: Option<PathBuf>,
        #[arg(long, conflicts_with_all = ["surface", "curve"])]
        lamination: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        power: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum MarkovCmd {
    /// Farey faces with their Markov numbers.
    Tree {
        #[arg(long, default_value_t = 6)]
        depth: usize,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Markov number of a slope `p/q` (`1/0` is infinity).
    Slope { slope: String },
    /// Check every tree triple against the Markov equation.
    Check {
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// Sorted solutions with all entries at most `bound`.
    Solutions {
        #[arg(long)]
        bound: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Markov triple of a punctured-torus X chart.
    FromChart {
        #[arg(long)]
        chart: PathBuf,
    },
}

/// Input or usage problem, reported with exit code 2.
const EXIT_INPUT: u8 = 2;
/// A requested verification did not pass.
const EXIT_FAILED: u8 = 1;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
                _ => Ok(()),
            }
        }
    }
}

fn emit(v: &Value, out: Option<&Path>) -> Result<()> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    emit_text(&s, out)
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Surface(c) => surface(c),
        Command::Mutate { chart, edge, semifield, out } => {
            let c = load_chart(&chart, semifield)?;
            let v = with_chart!(c, |x| x.mutate(edge)?.to_json());
            emit(&v, out.as_deref())?;
            Ok(0)
        }
        Command::Verify { suite, surface, seed, cases } => {
            let cfg = verify::Config { surface: surface.as_deref().map(load_surface).transpose()?, seed, cases, explicit: suite != "all" };
            let rows = verify::run(&suite, &cfg)?;
            let width = rows.iter().map(|r| r.suite.len()).max().unwrap_or(0);
            let mut failed = false;
            for r in &rows {
                println!("{:width$}  {}  {}", r.suite, r.status.label(), r.detail);
                failed |= r.status == verify::Status::Fail;
            }
            Ok(if failed { EXIT_FAILED } else { 0 })
        }
        Command::Pair(c) => pair(c),
        Command::Markov(c) => markov(c),
        Command::Monodromy { chart, curve, vertex, edge, exact } => monodromy(&chart, curve.as_deref(), vertex, edge, exact),
    }
}

fn surface(cmd: SurfaceCmd) -> Result<u8> {
    match cmd {
        SurfaceCmd::Build { genus, boundary, flips, seed, out } => {
            let sig = SurfaceSig::new(genus, boundary);
            let t = if flips == 0 {
                Triangulation::standard(&sig)?
            } else {
                Triangulation::random(&sig, &mut ChaCha8Rng::seed_from_u64(seed), flips)?
            };
            emit(&t.to_json(), out.as_deref())?;
        }
        SurfaceCmd::Info { surface } => {
            let t = load_surface(&surface)?;
            let sig = t.sig();
            let vertices: Vec<Value> =
                t.vertices().iter().map(|v| json!({"kind": format!("{:?}", v.kind).to_lowercase(), "component": v.component, "corners": v.corners})).collect();
            let v = json!({
                "genus": sig.genus,
                "boundary": sig.boundary,
                "counts": sig.counts()?,
                "internal": t.internal_edges(),
                "external": t.external_edges(),
                "flippable": t.flippable_edges(),
                "vertices": vertices,
                "epsilon": t.epsilon_matrix().0,
            });
            emit(&v, None)?;
        }
        SurfaceCmd::Flip { surface, edge, out } => {
            let t = load_surface(&surface)?;
            emit(&t.flip(edge)?.new.to_json(), out.as_deref())?;
        }
        SurfaceCmd::Chart { surface, kind, semifield, values, random, seed, out } => {
            let t = load_surface(&surface)?;
            let edges: Vec<usize> = match kind {
                Kind::X => t.internal_edges(),
                Kind::A => (0..t.n_edges()).collect(),
            };
            let vals: Vec<BigRational> = if let Some(vs) = values {
                if vs.len() != edges.len() {
                    bail!("{} values given for {} edges", vs.len(), edges.len());
                }
                vs.iter().map(|s| parse_rat(s.trim())).collect::<teichlab::Result<_>>()?
            } else if random {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                edges
                    .iter()
                    .map(|_| if semifield.is_tropical() { rat(rng.gen_range(-9..10), 1) } else { rat(rng.gen_range(1..10), rng.gen_range(1..10)) })
                    .collect()
            } else {
                let one = if semifield.is_tropical() { 0 } else { 1 };
                vec![rat(one, 1); edges.len()]
            };
            let ty = match kind {
                Kind::X => "X",
                Kind::A => "A",
            };
            let map: serde_json::Map<String, Value> = edges.iter().zip(&vals).map(|(e, q)| (e.to_string(), Value::String(fmt_rat(q)))).collect();
            let raw = json!({"surface": t.to_json(), "type": ty, "semifield": semifield.name(), "values": map});
            // parse once so that out-of-domain values are rejected here
            let c = input::chart_from_json(raw, None)?;
            emit(&with_chart!(c, |x| x.to_json()), out.as_deref())?;
        }
        SurfaceCmd::Coords { surface, curves, kind, out } => {
            let t = load_surface(&surface)?;
            let cs = load_curves(&curves)?;
            let v = match kind {
                Kind::A => a_coordinates(&t, &cs)?.to_json(),
                Kind::X => x_coordinates(&t, &cs, None)?.to_json(),
            };
            emit(&v, out.as_deref())?;
        }
        SurfaceCmd::Curves { chart, out } => {
            let m = multicurve(load_chart(&chart, None)?)?;
            emit(&m.to_json(), out.as_deref())?;
        }
    }
    Ok(0)
}

fn tropz(c: &XChart<TropQ>) -> Result<XChart<TropZ>> {
    if let Some(v) = c.values().values().find(|v| !v.is_integer()) {
        bail!("X lamination value {} is not an integer", fmt_rat(v));
    }
    Ok(XChart::new(c.tri().clone(), c.values().iter().map(|(&e, v)| (e, v.to_integer())).collect())?)
}

fn multicurve(c: Chart) -> Result<NormalMulticurve> {
    Ok(match c {
        Chart::ATropQ(a) => reconstruct_a(&a)?,
        Chart::XTropZ(x) => reconstruct_x(&x)?,
        Chart::XTropQ(x) => reconstruct_x(&tropz(&x)?)?,
        _ => bail!("laminations are tropQ A charts or integral tropQ/tropZ X charts"),
    })
}

fn x_lamination(c: Chart) -> Option<XChart<TropQ>> {
    match c {
        Chart::XTropQ(x) => Some(x),
        Chart::XTropZ(x) => XChart::new(x.tri().clone(), x.values().iter().map(|(&e, v)| (e, BigRational::from_integer(v.clone()))).collect()).ok(),
        _ => None,
    }
}

fn value_json(kind: &str, v: f64) -> Value {
    json!({"pairing": kind, "value": v})
}

fn pair(cmd: PairCmd) -> Result<u8> {
    match cmd {
        PairCmd::Additive { lamination, chart } => {
            let v = pairing(&lamination, &chart, true)?;
            emit(&value_json("additive", v), None)?;
        }
        PairCmd::Multiplicative { lamination, chart } => {
            let v = pairing(&lamination, &chart, false)?;
            emit(&value_json("multiplicative", v), None)?;
        }
        PairCmd::Intersection { lamination, with } => {
            let m1 = multicurve(load_chart(&lamination, None)?)?;
            let m2 = multicurve(load_chart(&with, None)?)?;
            let i = intersection_number(&m1, &m2)?;
            emit(&json!({"pairing": "intersection", "value": fmt_rat(&i)}), None)?;
        }
        PairCmd::Trace { surface, curve, lamination, power } => {
            let p = match (lamination, surface, curve) {
                (Some(l), _, _) => match load_chart(&l, None)? {
                    Chart::ATropQ(a) => lamination_trace(&a)?,
                    _ => bail!("trace of a lamination needs a tropQ A chart"),
                },
                (None, Some(s), Some(c)) => symbolic_trace(&load_surface(&s)?, &load_curve(&c)?, power)?,
                _ => bail!("pass --surface with --curve, or --lamination"),
            };
            emit(&json!({"polynomial": p.to_json(), "text": p.to_string()}), None)?;
        }
    }
    Ok(0)
}

fn pairing(lamination: &Path, chart: &Path, additive: bool) -> Result<f64> {
    let l = load_chart(lamination, None)?;
    let c = load_chart(chart, None)?;
    if let Chart::ATropQ(la) = &l {
        let Chart::XPosRat(x) = &c else { bail!("an A lamination pairs with a posRat X chart") };
        return Ok(if additive { additive_pairing_x(x, la)? } else { mult_pairing_x(x, la)? });
    }
    let Some(lx) = x_lamination(l) else { bail!("lamination must be a tropQ/tropZ X chart or a tropQ A chart") };
    Ok(match (&c, additive) {
        (Chart::APosRat(a), true) => additive_pairing(&lx, a)?,
        (Chart::APosFloat(a), true) => additive_pairing(&lx, a)?,
        (Chart::APosRat(a), false) => multiplicative_pairing(&lx, a)?,
        (Chart::APosFloat(a), false) => multiplicative_pairing(&lx, a)?,
        _ => bail!("an X lamination pairs with a posRat or posFloat A chart"),
    })
}

fn parse_slope(s: &str) -> Result<Slope> {
    let q = parse_rat_or_inf(s)?;
    Ok(match q {
        Some(q) => Slope::from_rational(&q),
        None => Slope::infinity(),
    })
}

fn parse_rat_or_inf(s: &str) -> Result<Option<BigRational>> {
    let s = s.trim();
    if s == "inf" || s == "∞" {
        return Ok(None);
    }
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().context("bad numerator")?;
        let q: BigInt = q.trim().parse().context("bad denominator")?;
        if q.is_zero() {
            return Ok(None);
        }
        return Ok(Some(BigRational::new(p, q)));
    }
    Ok(Some(parse_rat(s)?))
}

fn markov(cmd: MarkovCmd) -> Result<u8> {
    match cmd {
        MarkovCmd::Tree { depth, format, out } => {
            let t = markov_tree(depth);
            match format {
                Format::Csv => emit_text(&t.to_csv(), out.as_deref())?,
                Format::Json => emit(&t.to_json(), out.as_deref())?,
            }
        }
        MarkovCmd::Slope { slope } => {
            let s = parse_slope(&slope)?;
            emit(&json!({"slope": s.to_string(), "markov": markov_of_slope(&s).to_string()}), None)?;
        }
        MarkovCmd::Check { depth } => {
            let (checked, bad) = verify_tree(depth);
            let status = if bad == 0 { "PASS" } else { "FAIL" };
            println!("markov  {status}  {checked} triples to depth {depth}, {bad} violations");
            return Ok(if bad == 0 { 0 } else { EXIT_FAILED });
        }
        MarkovCmd::Solutions { bound, format } => {
            let sols = enumerate_solutions(bound);
            match format {
                Format::Csv => {
                    let mut s = String::from("x,y,z\n");
                    for [x, y, z] in &sols {
                        s.push_str(&format!("{x},{y},{z}\n"));
                    }
                    emit_text(&s, None)?;
                }
                Format::Json => emit(&json!({"bound": bound, "solutions": sols}), None)?,
            }
        }
        MarkovCmd::FromChart { chart } => {
            let Chart::XPosRat(x) = load_chart(&chart, None)? else { bail!("needs a posRat X chart on the punctured torus") };
            let m = markov_from_chart(&x)?;
            emit(&json!({"triple": m.iter().map(|v| v.to_string()).collect::<Vec<_>>()}), None)?;
        }
    }
    Ok(0)
}

fn class_name(c: ElementClass) -> &'static str {
    match c {
        ElementClass::Hyperbolic => "hyperbolic",
        ElementClass::Parabolic => "parabolic",
        ElementClass::Elliptic => "elliptic",
    }
}

fn matrix_report<K: Scalar + std::fmt::Display>(m: &Mat2<K>) -> Value {
    let c = classify_and_length(m);
    json!({"matrix": m.to_json(), "trace": m.trace().to_string(), "class": class_name(c.class), "length": c.length})
}

fn x_loop<S: Semifield, K: Scalar + std::fmt::Display>(x: &XChart<S>, curve: &CurvePath) -> Result<Value>
where
    S::Elem: PositiveValue,
{
    Ok(matrix_report(&loop_monodromy_x::<S, K>(x, curve)?))
}

fn a_curve<S: Semifield, K: Scalar + std::fmt::Display>(a: &AChart<S>, curve: &CurvePath) -> Result<Value>
where
    S::Elem: PositiveValue,
{
    if curve.is_closed() {
        return Ok(matrix_report(&loop_monodromy_a::<S, K>(a, curve)?));
    }
    let g = build_rep_a::<S, f64>(a)?;
    Ok(json!({"horocycle_distance": horocycle_distance(&g, &arc_path_a(a.tri(), curve)?)?}))
}

fn monodromy(chart: &Path, curve: Option<&Path>, vertex: Option<usize>, edge: Option<usize>, exact: bool) -> Result<u8> {
    let c = load_chart(chart, None)?;
    if exact && !matches!(c, Chart::XPosRat(_) | Chart::APosRat(_)) {
        bail!("--exact needs a posRat chart");
    }
    let tri = with_chart!(&c, |x| x.tri().clone());
    let path = match (curve, vertex, edge) {
        (Some(p), None, None) => Some(load_curve(p)?),
        (None, Some(v), None) => Some(vertex_curve(&tri, v)?),
        (None, None, Some(_)) => None,
        _ => bail!("pass exactly one of --curve, --vertex, --edge"),
    };
    let v = match (&c, path) {
        (Chart::APosRat(a), None) => edge_length(a, edge.unwrap_or(0))?,
        (Chart::APosFloat(a), None) => edge_length(a, edge.unwrap_or(0))?,
        (_, None) => bail!("--edge needs a positive A chart"),
        (Chart::XPosRat(x), Some(p)) if exact => x_loop::<_, ExactRatSqrt>(x, &p)?,
        (Chart::XPosRat(x), Some(p)) => x_loop::<_, f64>(x, &p)?,
        (Chart::XPosFloat(x), Some(p)) => x_loop::<_, f64>(x, &p)?,
        (Chart::APosRat(a), Some(p)) if exact => a_curve::<_, ExactRatSqrt>(a, &p)?,
        (Chart::APosRat(a), Some(p)) => a_curve::<_, f64>(a, &p)?,
        (Chart::APosFloat(a), Some(p)) => a_curve::<_, f64>(a, &p)?,
        _ => bail!("monodromy needs a posRat or posFloat chart"),
    };
    emit(&v, None)?;
    Ok(0)
}

fn edge_length<S: Semifield>(a: &AChart<S>, e: usize) -> Result<Value>
where
    S::Elem: PositiveValue,
{
    let g = build_rep_a::<S, f64>(a)?;
    Ok(json!({"edge": e, "lambda": horocycle_distance(&g, &edge_path(a.tri(), e)?)?}))
}
