//! `cbpkit` command-line tool.
//!
//! Exit codes: 0 success or equivalent, 1 input error or failed self-test,
//! 2 not a circular bidiagonal pair, 3 not equivalent.

mod pairfile;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cbpkit::classify::{
    classify, family_form, is_affine_equivalent, is_isomorphic, CanonicalForm, Case, ClassifyError,
};
use cbpkit::exactla::Matrix;
use cbpkit::families::{
    dual_pair, hessenberg_export, make_cbp_p, make_cbp_q, make_p_p, make_p_q, make_raising_p,
    make_raising_q, Affine, FamilyParams, FamilyParamsP, FamilyParamsQ,
};
use cbpkit::sweep::{quadratic_extension, run_sweep, SweepConfig, SweepFamily, DEFAULT_SEED};
use cbpkit::{Element, Field};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pairfile::{Format, PairFile};

// stdout writes ignore errors so a closed pipe ends output quietly
macro_rules! say {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($t)*);
    }};
}

macro_rules! say_raw {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(
    name = "cbpkit",
    version,
    about = "Construct, verify and classify circular bidiagonal pairs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a family pair and write it as a pair file.
    Construct(ConstructArgs),
    /// Print the canonical form of a pair and a witness.
    Classify {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Decide isomorphism or affine equivalence of two pairs.
    Equiv {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Iso)]
        mode: Mode,
        #[arg(long)]
        json: bool,
    },
    /// Swap A and A*.
    Dual {
        path: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Circular Hessenberg parameters of the pair's canonical family.
    ExportHessenberg {
        path: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Run the identity sweeps and report per family.
    Selftest {
        /// Comma-separated family names.
        #[arg(long, value_delimiter = ',')]
        only: Vec<SweepFamily>,
        #[arg(long, default_value_t = 7)]
        d_max: usize,
        #[arg(long, env = "CBPKIT_SEED", default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyCase {
    Q,
    P,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Iso,
    Affine,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Args)]
struct OutArgs {
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to json for `.json` paths and text otherwise.
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(value_enum)]
    case: FamilyCase,
    #[arg(long)]
    prime: Option<u64>,
    /// Characteristic of an extension field GF(p^k).
    #[arg(long)]
    extension: Option<u64>,
    /// Coefficients of the monic modulus, constant term first. Optional for
    /// quadratic extensions.
    #[arg(long, requires = "extension")]
    modulus: Option<String>,
    #[arg(long)]
    cyclotomic: Option<u32>,
    #[arg(long)]
    d: usize,
    /// Primitive (d+1)-th root of unity; defaults to the first one found.
    #[arg(long, allow_hyphen_values = true)]
    q: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    gamma: Option<String>,
    #[arg(long)]
    with_transition: bool,
    #[arg(long)]
    with_raising: bool,
    #[arg(long)]
    label: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

enum Failure {
    Input(String),
    NotCbp(String),
    NotEquivalent,
    SelftestFailed,
}

impl From<ClassifyError> for Failure {
    fn from(e: ClassifyError) -> Self {
        match e {
            ClassifyError::NotCbp(_) => Failure::NotCbp(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::NotCbp(m)) => {
            eprintln!("{m}");
            ExitCode::from(2)
        }
        Err(Failure::NotEquivalent) => ExitCode::from(3),
        Err(Failure::SelftestFailed) => ExitCode::from(1),
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Construct(a) => construct(a),
        Command::Classify { path, json } => {
            let pf = read_pair(&path)?;
            let form = classify(&pf.pair)?;
            if json {
                print_json(json!({ "schema": "cbpkit.classify/1", "form": form.to_json() }));
            } else {
                say_raw!("{}", describe_form(&form));
            }
            Ok(())
        }
        Command::Equiv {
            first,
            second,
            mode,
            json,
        } => equiv(&first, &second, mode, json),
        Command::Dual { path, out } => {
            let pf = read_pair(&path)?;
            let mut d = PairFile::new(dual_pair(&pf.pair));
            d.label = pf.label;
            d.provenance = Some(format!("dual of {}", path.display()));
            write_pair(&d, &out)
        }
        Command::ExportHessenberg { path, json } => {
            let pf = read_pair(&path)?;
            let params = match family_form(&pf.pair) {
                Some(p) => p,
                None => match classify(&pf.pair)? {
                    CanonicalForm::Family(f) => f.params(),
                    CanonicalForm::Trivial => {
                        return Err(Failure::Input("a 1x1 pair has no Hessenberg data".into()))
                    }
                },
            };
            let h = hessenberg_export(&params).map_err(input)?;
            if json {
                print_json(
                    json!({ "schema": "cbpkit.hessenberg/1", "d": h.d, "entries": h.to_json() }),
                );
            } else {
                for (k, v) in h.entries() {
                    say!("{k} = {v}");
                }
            }
            Ok(())
        }
        Command::Selftest {
            only,
            d_max,
            seed,
            trials,
            samples,
        } => {
            let cfg = SweepConfig {
                seed,
                d_max,
                only,
                trials,
                samples,
            };
            let mut ok = true;
            for r in run_sweep(&cfg) {
                say!(
                    "{:<13} {} passed={} failed={}",
                    r.family.name(),
                    if r.ok() { "PASS" } else { "FAIL" },
                    r.passed,
                    r.failed
                );
                for f in &r.failures {
                    say!("    {f}");
                }
                ok &= r.ok();
            }
            if ok {
                Ok(())
            } else {
                Err(Failure::SelftestFailed)
            }
        }
    }
}

fn construct(a: ConstructArgs) -> Result<(), Failure> {
    let field = build_field(&a)?;
    let parse = |s: &str| field.parse_element(s).map_err(input);
    let (params, desc) = match a.case {
        FamilyCase::Q => {
            let q = match &a.q {
                Some(s) => parse(s)?,
                None => field
                    .find_primitive_nth_root(a.d as u64 + 1)
                    .map_err(input)?,
            };
            let eps = parse(
                a.eps
                    .as_deref()
                    .ok_or_else(|| input("the q case needs --eps"))?,
            )?;
            let desc = format!("q family over {field}, d = {}, q = {q}, eps = {eps}", a.d);
            (
                FamilyParams::Q(FamilyParamsQ::new(a.d, q, eps).map_err(input)?),
                desc,
            )
        }
        FamilyCase::P => {
            let gamma = parse(
                a.gamma
                    .as_deref()
                    .ok_or_else(|| input("the p case needs --gamma"))?,
            )?;
            let desc = format!("p family over {field}, d = {}, gamma = {gamma}", a.d);
            (
                FamilyParams::P(FamilyParamsP::new(a.d, gamma).map_err(input)?),
                desc,
            )
        }
    };
    let pair = match &params {
        FamilyParams::Q(p) => make_cbp_q(p),
        FamilyParams::P(p) => make_cbp_p(p),
    };
    let mut pf = PairFile::new(pair);
    if let Some(l) = &a.label {
        if l.trim().is_empty() || l.contains('\n') || l.trim() != l {
            return Err(input("label must be a single trimmed line"));
        }
        pf.label = Some(l.clone());
    }
    pf.provenance = Some(desc);
    if a.with_transition {
        let p = match &params {
            FamilyParams::Q(x) => make_p_q(x),
            FamilyParams::P(x) => make_p_p(x),
        };
        pf.add_extra("P", p).map_err(input)?;
    }
    if a.with_raising {
        let r = match &params {
            FamilyParams::Q(x) => make_raising_q(x),
            FamilyParams::P(x) => make_raising_p(x),
        };
        pf.add_extra("R", r).map_err(input)?;
    }
    write_pair(&pf, &a.out)
}

fn build_field(a: &ConstructArgs) -> Result<Field, Failure> {
    match (a.prime, a.extension, a.cyclotomic) {
        (Some(p), None, None) => Field::prime(p).map_err(input),
        (None, Some(p), None) => match &a.modulus {
            Some(m) => {
                let coeffs: Vec<u64> = m
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse()
                            .map_err(|_| input(format!("bad modulus coefficient {t:?}")))
                    })
                    .collect::<Result<_, _>>()?;
                Field::extension(p, coeffs).map_err(input)
            }
            None => {
                Field::prime(p).map_err(input)?;
                Ok(quadratic_extension(p))
            }
        },
        (None, None, Some(n)) => Field::cyclotomic(n).map_err(input),
        _ => Err(input(
            "give exactly one of --prime, --extension, --cyclotomic",
        )),
    }
}

fn equiv(first: &Path, second: &Path, mode: Mode, json: bool) -> Result<(), Failure> {
    let (p1, p2) = (read_pair(first)?, read_pair(second)?);
    if p1.pair.field() != p2.pair.field() {
        return Err(Failure::Input(format!(
            "field mismatch: {} vs {}",
            p1.pair.field(),
            p2.pair.field()
        )));
    }
    let found: Option<(Option<Affine>, Matrix)> = match mode {
        Mode::Iso => is_isomorphic(&p1.pair, &p2.pair)?.map(|s| (None, s)),
        Mode::Affine => is_affine_equivalent(&p1.pair, &p2.pair)?.map(|(w, s)| (Some(w), s)),
    };
    let mode_name = if mode == Mode::Iso { "iso" } else { "affine" };
    if json {
        let mut v =
            json!({ "schema": "cbpkit.equiv/1", "mode": mode_name, "equivalent": found.is_some() });
        if let Some((w, s)) = &found {
            v["sigma"] = s.rows_json();
            if let Some(w) = w {
                v["affine"] = w.to_json();
            }
        }
        print_json(v);
    } else {
        match &found {
            Some((w, s)) => {
                say!("equivalent ({mode_name})");
                if let Some(w) = w {
                    say!("{}", describe_affine(w));
                }
                say!("sigma:");
                say_raw!("{}", matrix_lines(s));
            }
            None => say!("not equivalent ({mode_name})"),
        }
    }
    match found {
        Some(_) => Ok(()),
        None => Err(Failure::NotEquivalent),
    }
}

fn describe_form(form: &CanonicalForm) -> String {
    let f = match form {
        CanonicalForm::Trivial => return "canonical form: trivial (d = 0)\n".into(),
        CanonicalForm::Family(f) => f,
    };
    let head = match f.case {
        Case::Q => format!("q family, d = {}, q = {}, eps = {}", f.d, f.q, f.param),
        Case::CharP => format!("p family, d = {}, gamma = {}", f.d, f.param),
    };
    let raw_name = if f.case == Case::Q { "eps" } else { "gamma" };
    format!(
        "canonical form: {head}\nnormalized {raw_name} before the orbit walk: {}\nwitness {}\nbasis change S:\n{}",
        f.raw_param,
        describe_affine(&f.witness.affine),
        matrix_lines(&f.witness.basis_change)
    )
}

fn describe_affine(w: &Affine) -> String {
    format!(
        "affine: s = {}, s* = {}, t = {}, t* = {}",
        w.s, w.s_star, w.t, w.t_star
    )
}

fn matrix_lines(m: &Matrix) -> String {
    m.rows()
        .iter()
        .map(|r| {
            let toks: Vec<String> = r.iter().map(Element::to_string).collect();
            format!("  {}\n", toks.join(" "))
        })
        .collect()
}

fn print_json(v: serde_json::Value) {
    say!(
        "{}",
        serde_json::to_string_pretty(&v).expect("values serialize")
    );
}

fn read_pair(path: &Path) -> Result<PairFile, Failure> {
    let src =
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    PairFile::parse(&src).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn write_pair(pf: &PairFile, out: &OutArgs) -> Result<(), Failure> {
    let fmt = match (out.format, &out.out) {
        (Some(FormatArg::Json), _) => Format::Json,
        (Some(FormatArg::Text), _) => Format::Text,
        (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => Format::Json,
        _ => Format::Text,
    };
    let s = pf.render(fmt);
    match &out.out {
        Some(p) => fs::write(p, s).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            say_raw!("{s}");
            Ok(())
        }
    }
}
