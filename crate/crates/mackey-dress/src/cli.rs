//! Command-line front end. Every subcommand prints one JSON document (or a
//! plain-text rendering with `--format table`) on standard output.
//!
//! Exit codes: 0 on success, 1 when the command reports a mathematical
//! verdict and that verdict is false (suppressed by `--exit-zero`), 2 on
//! usage errors and refused inputs.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::Value;

use crate::amitsur::{self, ChainData, ExactnessReport, RepairResult, Variant};
use crate::biset::{self, BisetFixture, BisetMorphism, BurnsideFixture, SignedFixture, ZeroFixture};
use crate::bqgr::bqgr;
use crate::burnside;
use crate::dress::{self, CoefficientTable, DressReport};
use crate::error::{spec_err, Error, Result};
use crate::group::{group_from_spec, Group};
use crate::gset::{parse_family, parse_gset, GSet};
use crate::mackey::{self, GreenReport, GreenRingData, MackeyData, Orientation, ValidationReport};
use crate::zlocal::Locale;

#[derive(Parser)]
#[command(name = "mackey-dress", version, about = "Mackey functors, p-local induction and Amitsur complexes for small finite groups")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Exit 0 even when the reported verdict is false.
    #[arg(long, global = true)]
    exit_zero: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Multiplication table and element labels.
    Group { spec: String },
    /// Conjugacy classes of subgroups.
    Subgroups { spec: String },
    /// Table of marks.
    Tom { spec: String },
    /// Mackey functor checks.
    #[command(subcommand)]
    Mackey(MackeyCommand),
    /// The quotient A_M of the Burnside ring acting on a functor.
    Bqgr(FunctorArgs),
    /// Dress generation and induction coefficients.
    #[command(subcommand)]
    Dress(DressCommand),
    /// Amitsur complexes, exactness and repair.
    Amitsur(AmitsurArgs),
    /// Bifree bisets and the functor j.
    #[command(subcommand)]
    Biset(BisetCommand),
}

#[derive(Args, Clone)]
struct FunctorArgs {
    /// burnside, permchar, fixed[:copies], zero or signed.
    #[arg(long)]
    functor: String,
    /// Group spec, e.g. S4, D5, E_2^3, C6.
    #[arg(long)]
    group: String,
    /// Orientation for the signed functor: trivial, sign, trivial-kernel or a
    /// class name of an index-2 kernel.
    #[arg(long, default_value = "trivial")]
    omega: String,
}

#[derive(Subcommand)]
enum MackeyCommand {
    /// Check the Mackey axioms (and the Green axioms with --green).
    Validate {
        #[command(flatten)]
        functor: FunctorArgs,
        #[arg(long)]
        green: bool,
    },
}

#[derive(Subcommand)]
enum DressCommand {
    /// Is the induction from X onto the point surjective at each prime?
    Check {
        #[command(flatten)]
        functor: FunctorArgs,
        /// G-set spec: class list (`C2:2,S3`) or keywords such as `cyclic`.
        #[arg(long)]
        set: String,
    },
    /// Coefficients a_H with Σ a_H Ind∘Res = 1 over Z_(p).
    Coefficients {
        #[command(flatten)]
        functor: FunctorArgs,
        /// Family spec, e.g. `p-hyperelementary:2` or a class list.
        #[arg(long)]
        family: String,
        #[arg(long)]
        prime: u64,
    },
    /// K(Y) + I(Y) = M(Y) at p.
    Cover {
        #[command(flatten)]
        functor: FunctorArgs,
        #[arg(long)]
        set: String,
        #[arg(long)]
        prime: u64,
    },
}

#[derive(Args)]
struct AmitsurArgs {
    #[arg(long)]
    functor: Option<String>,
    #[arg(long)]
    group: Option<String>,
    #[arg(long, default_value = "trivial")]
    omega: String,
    /// The covering set X.
    #[arg(long)]
    set: Option<String>,
    /// The base set Y.
    #[arg(long, default_value = "point")]
    base: String,
    /// Top degree N of the materialized complex.
    #[arg(long, default_value_t = 3)]
    degrees: usize,
    /// Localize exactness at p; also the filtration prime for --repair.
    #[arg(long)]
    prime: Option<u64>,
    #[arg(long, value_enum, default_value_t = VariantArg::Ho)]
    variant: VariantArg,
    /// Build the contraction from 1_X and repair.
    #[arg(long)]
    repair: bool,
    /// Repair modulo p^k.
    #[arg(long)]
    mod2k: Option<u32>,
    /// Repair chain data read from a JSON file instead.
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Ho,
    Co,
}

#[derive(Subcommand)]
enum BisetCommand {
    /// Balanced product of a chain of bisets, leftmost applied last.
    Compose {
        #[arg(long)]
        group: String,
        /// Biset specs `lower:H->K@g` or `upper:H->K@g`.
        #[arg(required = true, num_args = 1..)]
        bisets: Vec<String>,
    },
    /// Reverse a biset.
    Tau {
        #[arg(long)]
        group: String,
        biset: String,
    },
    /// j_* and j^* of a transitive G-map `H->K@g`.
    J {
        #[arg(long)]
        group: String,
        #[arg(long)]
        map: String,
    },
    /// Compose a built-in fixture with j and validate.
    Check {
        #[arg(long)]
        group: String,
        /// burnside, zero or signed.
        #[arg(long)]
        fixture: String,
        #[arg(long, default_value = "trivial")]
        omega: String,
    },
    /// Sampled associativity of balanced products.
    Associativity {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Result of one command: the document and its verdict, if it has one.
struct Outcome {
    doc: Value,
    verdict: Option<bool>,
    table: Option<String>,
}

impl Outcome {
    fn plain<T: Serialize>(v: &T) -> Result<Self> {
        Ok(Outcome { doc: to_value(v)?, verdict: None, table: None })
    }

    fn verdict<T: Serialize>(v: &T, verdict: bool) -> Result<Self> {
        Ok(Outcome { doc: to_value(v)?, verdict: Some(verdict), table: None })
    }
}

fn to_value<T: Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::Shape(format!("serialization: {e}")))
}

/// Run with `argv` (including the program name); returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command) {
        Ok(out) => {
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&out.doc).expect("values serialize") + "\n",
                Format::Table => out.table.unwrap_or_else(|| render_table(&out.doc)),
            };
            // A closed pipe downstream is not an error of ours.
            let _ = std::io::stdout().lock().write_all(text.as_bytes());
            match out.verdict {
                Some(false) if !cli.exit_zero => 1,
                _ => 0,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

enum Functor {
    Green(GreenRingData),
    Plain(MackeyData),
}

impl Functor {
    fn mackey(&self) -> &MackeyData {
        match self {
            Functor::Green(r) => r.mackey(),
            Functor::Plain(m) => m,
        }
    }
}

fn load_group(spec: &str) -> Result<Arc<Group>> {
    group_from_spec(spec)
}

fn load_functor(a: &FunctorArgs) -> Result<(Arc<Group>, Functor)> {
    let g = load_group(&a.group)?;
    let f = functor_by_name(&g, &a.functor, &a.omega)?;
    Ok((g, f))
}

fn functor_by_name(g: &Arc<Group>, name: &str, omega: &str) -> Result<Functor> {
    Ok(match name {
        "burnside" => Functor::Green(mackey::burnside_functor(g)),
        "permchar" => Functor::Green(mackey::perm_char_green_ring(g)),
        "zero" => Functor::Green(mackey::zero_functor(g)),
        "signed" => Functor::Plain(mackey::signed_pre_functor(g, &Orientation::parse(g, omega)?)),
        _ => match name.strip_prefix("fixed") {
            Some("") => Functor::Green(mackey::fixed_point_green_ring(g, 1)),
            Some(rest) => {
                let k = rest.strip_prefix(':').and_then(|k| k.parse().ok()).ok_or_else(|| spec_err(name, "expected fixed:<copies>"))?;
                Functor::Green(mackey::fixed_point_green_ring(g, k))
            }
            None => return Err(spec_err(name, "unknown functor")),
        },
    })
}

fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Group { spec } => Outcome::plain(&load_group(spec)?.export()),
        Command::Subgroups { spec } => {
            let g = load_group(spec)?;
            let mut out = Outcome::plain(&SubgroupsOut { group: g.name().to_string(), classes: g.class_export() })?;
            out.table = Some(subgroups_table(&g));
            Ok(out)
        }
        Command::Tom { spec } => {
            let g = load_group(spec)?;
            let tom = TomOut {
                group: g.name().to_string(),
                classes: (0..g.class_count()).map(|c| g.class(c).name.clone()).collect(),
                marks: burnside::table_of_marks(&g).clone(),
            };
            let mut out = Outcome::plain(&tom)?;
            out.table = Some(tom_table(&tom));
            Ok(out)
        }
        Command::Mackey(MackeyCommand::Validate { functor, green }) => {
            let (_, f) = load_functor(functor)?;
            let report = f.mackey().validate()?;
            let green_report = match (&f, green) {
                (Functor::Green(r), true) => Some(r.validate_green()),
                (Functor::Plain(_), true) => return Err(spec_err(&functor.functor, "not a Green ring")),
                _ => None,
            };
            let ok = report.is_empty() && green_report.as_ref().is_none_or(GreenReport::passed);
            Outcome::verdict(&ValidateOut { report, green: green_report }, ok)
        }
        Command::Bqgr(a) => {
            let (_, f) = load_functor(a)?;
            Outcome::plain(&bqgr(f.mackey())?.export())
        }
        Command::Dress(DressCommand::Check { functor, set }) => {
            let (g, f) = load_functor(functor)?;
            let x = parse_gset(&g, set)?;
            let r: DressReport = match &f {
                Functor::Green(r) => dress::is_dress_generating(r, &x)?,
                Functor::Plain(m) => dress::is_dress_generating_mackey(m, &x)?,
            };
            let ok = r.overall;
            Outcome::verdict(&r, ok)
        }
        Command::Dress(DressCommand::Coefficients { functor, family, prime }) => {
            let (g, f) = load_functor(functor)?;
            let fam = parse_family(&g, family)?;
            let t: CoefficientTable = dress::induction_coefficients(f.mackey(), &fam, *prime)?;
            let ok = t.verified;
            Outcome::verdict(&t, ok)
        }
        Command::Dress(DressCommand::Cover { functor, set, prime }) => {
            let (g, f) = load_functor(functor)?;
            let y = parse_gset(&g, set)?;
            let r = dress::kernel_image_cover_check(f.mackey(), &y, *prime)?;
            let ok = r.holds;
            Outcome::verdict(&r, ok)
        }
        Command::Amitsur(a) => run_amitsur(a),
        Command::Biset(b) => run_biset(b),
    }
}

#[derive(Serialize)]
struct SubgroupsOut {
    group: String,
    classes: Vec<crate::group::ClassExport>,
}

#[derive(Serialize)]
struct TomOut {
    group: String,
    classes: Vec<String>,
    marks: Vec<Vec<u64>>,
}

#[derive(Serialize)]
struct ValidateOut {
    report: ValidationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    green: Option<GreenReport>,
}

fn tom_table(t: &TomOut) -> String {
    let width = t.classes.iter().map(String::len).chain(t.marks.iter().flatten().map(|m| m.to_string().len())).max().unwrap_or(1);
    let mut s = format!("{:>width$}", "");
    for c in &t.classes {
        s.push_str(&format!(" {c:>width$}"));
    }
    s.push('\n');
    for (c, row) in t.classes.iter().zip(&t.marks) {
        s.push_str(&format!("{c:>width$}"));
        for m in row {
            s.push_str(&format!(" {m:>width$}"));
        }
        s.push('\n');
    }
    s
}

fn subgroups_table(g: &Group) -> String {
    let mut s = String::from("index name order normalizer conjugates\n");
    for c in g.class_export() {
        s.push_str(&format!("{} {} {} {} {}\n", c.index, c.name, c.order, c.normalizer_order, c.conjugates));
    }
    s
}

/// `path = value` lines for any document.
fn render_table(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x, out);
                }
            }
            Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
                out.push_str(&format!("{prefix} = [{}]\n", a.iter().map(scalar).collect::<Vec<_>>().join(", ")));
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}[{i}]"), x, out);
                }
            }
            _ => out.push_str(&format!("{prefix} = {}\n", scalar(v))),
        }
    }
    fn scalar(v: &Value) -> String {
        match v {
            Value::String(s) => s.clone(),
            other => other.to_string(),
        }
    }
    let mut out = String::new();
    walk("", v, &mut out);
    out
}

// Amitsur ---------------------------------------------------------------------

#[derive(Serialize)]
struct CompositionDefect {
    degree: usize,
    vanishes_mod_prime: bool,
}

#[derive(Serialize)]
struct AmitsurOut {
    functor: String,
    group: String,
    set: String,
    base: String,
    chain: ChainData,
    is_complex: bool,
    composition_defects: Vec<CompositionDefect>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exactness: Option<ExactnessReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    repair: Option<RepairOut>,
}

#[derive(Serialize)]
struct RepairOut {
    certified: bool,
    splits_first_boundary: bool,
    result: RepairResult,
}

fn repair_out(c: &ChainData, k: Option<u32>) -> Result<RepairOut> {
    let result = match k {
        Some(k) => amitsur::repair_filtered_truncated(c, k)?,
        None => amitsur::repair_pseudo_complex(c)?,
    };
    Ok(RepairOut { certified: result.certified(), splits_first_boundary: amitsur::splits_first_boundary(&result), result })
}

fn run_amitsur(a: &AmitsurArgs) -> Result<Outcome> {
    if let Some(path) = &a.input {
        let text = std::fs::read_to_string(path).map_err(|e| spec_err(&path.display().to_string(), e.to_string()))?;
        let c: ChainData = serde_json::from_str(&text).map_err(|e| spec_err(&path.display().to_string(), e.to_string()))?;
        let r = repair_out(&c, a.mod2k)?;
        let ok = r.certified;
        return Outcome::verdict(&r, ok);
    }
    let (Some(functor), Some(group), Some(set)) = (&a.functor, &a.group, &a.set) else {
        return Err(spec_err("amitsur", "--functor, --group and --set are required without --input"));
    };
    let g = load_group(group)?;
    let f = functor_by_name(&g, functor, &a.omega)?;
    let m = f.mackey();
    let x = parse_gset(&g, set)?;
    let y = parse_gset(&g, &a.base)?;
    let variant = if a.variant == VariantArg::Co { Variant::Cohomological } else { Variant::Homological };
    let p = a.prime.unwrap_or(2);
    let cx = amitsur::amitsur_complex(m, &x, &y, a.degrees, variant)?;
    let mut chain = cx.chain;
    let defects = chain.composition_defects();
    let q = BigInt::from(p);
    let composition_defects: Vec<CompositionDefect> =
        defects.iter().map(|(r, d)| CompositionDefect { degree: *r, vanishes_mod_prime: d.reduce_mod(&q).is_zero() }).collect();
    let is_complex = defects.is_empty();
    let exactness = if is_complex && a.degrees > 0 {
        let locale = a.prime.map_or(Locale::Integral, Locale::Prime);
        Some(amitsur::check_exactness(&chain, &(0..a.degrees).collect::<Vec<_>>(), locale)?)
    } else {
        None
    };
    let repair = if a.repair || a.mod2k.is_some() {
        if variant != Variant::Homological || y != GSet::point(&g) {
            return Err(spec_err("amitsur", "repair builds homological contractions over the point"));
        }
        let mut pseudo = amitsur::amitsur_pseudo_complex(m, &x, a.degrees, p)?;
        if a.mod2k.is_none() {
            pseudo.filtration = None;
        }
        chain = pseudo.clone();
        Some(repair_out(&pseudo, a.mod2k)?)
    } else {
        None
    };
    let verdict = match (&exactness, &repair) {
        (_, Some(r)) => Some(r.certified),
        (Some(e), None) => Some(e.exact),
        (None, None) => Some(false),
    };
    let out = AmitsurOut {
        functor: m.name().to_string(),
        group: g.name().to_string(),
        set: set.clone(),
        base: a.base.clone(),
        chain,
        is_complex,
        composition_defects,
        exactness,
        repair,
    };
    Ok(Outcome { doc: to_value(&out)?, verdict, table: None })
}

// Bisets ----------------------------------------------------------------------

/// `lower:H->K@g` or `upper:H->K@g` (element defaults to the identity).
fn parse_biset(g: &Group, spec: &str) -> Result<BisetMorphism> {
    let (kind, rest) = spec.split_once(':').ok_or_else(|| spec_err(spec, "expected lower:... or upper:..."))?;
    let (h, k, el) = parse_map(g, rest)?;
    let b = biset::j_lower_transitive(g, g.rep(h), g.rep(k), el)?;
    match kind {
        "lower" => Ok(BisetMorphism::from_biset(b)),
        "upper" => Ok(BisetMorphism::from_biset(b.tau(g))),
        _ => Err(spec_err(spec, "expected lower or upper")),
    }
}

fn parse_map(g: &Group, spec: &str) -> Result<(usize, usize, usize)> {
    let (arrow, el) = match spec.split_once('@') {
        Some((a, e)) => (a, g.parse_element(e).ok_or_else(|| spec_err(spec, format!("unknown element `{e}`")))?),
        None => (spec, g.identity()),
    };
    let (h, k) = arrow.split_once("->").ok_or_else(|| spec_err(spec, "expected H->K"))?;
    let h = g.parse_class(h).ok_or_else(|| spec_err(spec, format!("unknown class `{h}`")))?;
    let k = g.parse_class(k).ok_or_else(|| spec_err(spec, format!("unknown class `{k}`")))?;
    Ok((h, k, el))
}

#[derive(Serialize)]
struct JOut {
    lower: biset::BisetExport,
    upper: biset::BisetExport,
}

#[derive(Serialize)]
struct AssociativityOut {
    group: String,
    seed: u64,
    samples: usize,
    failures: usize,
}

fn run_biset(b: &BisetCommand) -> Result<Outcome> {
    match b {
        BisetCommand::Compose { group, bisets } => {
            let g = load_group(group)?;
            let mut acc: Option<BisetMorphism> = None;
            for s in bisets.iter().rev() {
                let x = parse_biset(&g, s)?;
                acc = Some(match acc {
                    None => x,
                    Some(y) => biset::balanced_product(&g, &x, &y)?,
                });
            }
            Outcome::plain(&acc.expect("at least one biset").export(&g))
        }
        BisetCommand::Tau { group, biset } => {
            let g = load_group(group)?;
            Outcome::plain(&parse_biset(&g, biset)?.tau(&g).export(&g))
        }
        BisetCommand::J { group, map } => {
            let g = load_group(group)?;
            let (h, k, el) = parse_map(&g, map)?;
            let lower = biset::j_lower_transitive(&g, g.rep(h), g.rep(k), el)?;
            Outcome::plain(&JOut { upper: lower.tau(&g).export(&g), lower: lower.export(&g) })
        }
        BisetCommand::Check { group, fixture, omega } => {
            let g = load_group(group)?;
            let fx: Box<dyn BisetFixture> = match fixture.as_str() {
                "burnside" => Box::new(BurnsideFixture),
                "zero" => Box::new(ZeroFixture),
                "signed" => Box::new(SignedFixture(Orientation::parse(&g, omega)?)),
                _ => return Err(spec_err(fixture, "unknown fixture")),
            };
            let r = biset::mackey_via_j_check(&g, fx.as_ref())?;
            let ok = r.is_empty();
            Outcome::verdict(&r, ok)
        }
        BisetCommand::Associativity { group, samples, seed } => {
            let g = load_group(group)?;
            let subs: Vec<_> = (0..g.class_count()).map(|c| g.rep(c).clone()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut failures = 0;
            for _ in 0..*samples {
                let hs: Vec<_> = (0..4).map(|_| &subs[rng.gen_range(0..subs.len())]).collect();
                let mut pick = |l: &crate::group::Subgroup, r: &crate::group::Subgroup| {
                    let all = biset::transitive_bisets(&g, l, r);
                    BisetMorphism::from_biset(all[rng.gen_range(0..all.len())].clone())
                };
                let x = pick(hs[3], hs[2]);
                let y = pick(hs[2], hs[1]);
                let z = pick(hs[1], hs[0]);
                let l = biset::balanced_product(&g, &biset::balanced_product(&g, &x, &y)?, &z)?;
                let r = biset::balanced_product(&g, &x, &biset::balanced_product(&g, &y, &z)?)?;
                if l != r {
                    failures += 1;
                }
            }
            let out = AssociativityOut { group: g.name().to_string(), seed: *seed, samples: *samples, failures };
            Outcome::verdict(&out, failures == 0)
        }
    }
}
