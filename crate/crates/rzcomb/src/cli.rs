//! Command-line front end. Every subcommand prints one JSON document with
//! sorted keys, so identical inputs give identical bytes.

use std::io::Write;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::eo_strata::{
    annotate_orthogonal, basic_labels, enumerate_jw, eo_hp_correspondence, jw_b_assignment,
    k3_dictionary, pretty_case_split, tmax, vertex_types, EOContext, QuadSpaceData,
};
use crate::ff_slopes::admissible_type_scan;
use crate::kottwitz::{
    bgmu_table, enumerate_bgmu, find_class, fully_hn_decomposable, gspin_datum, orthogonal_datum,
    rz_dimension_of, validate_datum, SigmaConjClass,
};
use crate::lattice_oracle::{
    check_cartesian_gl_pgl, dl_counts, enumerate_adlv, find_special_lattice, gl_b_representative,
    required_precision, special_lattice_chain, AdlvVariant, FiniteGroup, GaloisRing, QuadModel,
};
use crate::linalg::Q;
use crate::root_datum::{build_root_datum, Coweight, Family, Orth, RootDatum};
use crate::{fmt_qs, Error};

#[derive(Parser, Debug)]
#[command(
    name = "rzcomb",
    version,
    about = "Combinatorics of unramified local Shimura data"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// The Kottwitz set B(G, μ) with dimensions, defects and HN witnesses.
    Bgmu(Opts),
    /// Validate a local datum (G, μ, [b]) and classify it.
    Validate(Opts),
    /// Dimension of the reduced Rapoport–Zink space.
    Dim(Opts),
    /// Full Hodge–Newton decomposability.
    HnDecomp(Opts),
    /// The Ekedahl–Oort index set ^JW.
    Jw(Opts),
    /// The basic part ^JW^b and its Newton assignment.
    JwB(Opts),
    /// EO strata against vertex lattice types.
    EoHp(Opts),
    /// The supersingular K3 dictionary.
    K3Table(Opts),
    /// Maximal vertex lattice type.
    Tmax(Opts),
    /// Lattice enumeration of an affine Deligne–Lusztig set for GL_n.
    AdlvEnum(Opts),
    /// The GL_n → PGL_n cartesian square on a lattice window.
    CartesianCheck(Opts),
    /// Chain of a special lattice in a vertex model.
    SpecialChain(Opts),
    /// Deligne–Lusztig point counts.
    DlCount(Opts),
    /// Case scan of the basic orthogonal period domain.
    FfScan(Opts),
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Opts {
    /// GL, SL, PGL, Sp, GSp, SO, GSpin; for dl-count PGL2 or SO5.
    #[arg(long)]
    pub family: Option<String>,
    /// Rank parameter; for SO and GSpin, dim V = n + 2.
    #[arg(long)]
    pub n: Option<usize>,
    /// Working precision of the Galois ring.
    #[arg(long)]
    pub m: Option<u32>,
    /// Cocharacter, comma separated integers.
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    /// Newton point, comma separated rationals.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<String>,
    /// Select the basic class.
    #[arg(long)]
    pub basic: bool,
    /// det V = (−1)^{n/2} (plus) or not (minus).
    #[arg(long, default_value = "plus")]
    pub det: String,
    #[arg(long, default_value_t = 3)]
    pub p: i64,
    /// Residue degree of the Galois ring.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Half-width a of the window p^a Λ₀ ⊆ M ⊆ p^{−a} Λ₀.
    #[arg(long, default_value_t = 1)]
    pub window: u32,
    /// Vertex lattice type for special-chain.
    #[arg(long)]
    pub t: Option<usize>,
    /// Field size for dl-count.
    #[arg(long)]
    pub q: Option<i64>,
    /// Extension degree for dl-count.
    #[arg(long)]
    pub d: Option<u32>,
    /// Weyl word for dl-count, comma separated node indices.
    #[arg(long)]
    pub word: Option<String>,
    /// Use the closure Inv ≤ μ in adlv-enum.
    #[arg(long)]
    pub closure: bool,
    /// Negate ω in cartesian-check (negative control).
    #[arg(long)]
    pub negate_omega: bool,
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub pretty: bool,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize)]
pub struct OutputDocument {
    pub command: String,
    pub input: Value,
    pub result: Value,
    pub version: String,
}

/// Parse and execute, returning the document and an optional text
/// rendering.
pub fn execute<I, T>(args: I) -> Result<(OutputDocument, Option<String>), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    let (name, opts) = match &cli.command {
        Command::Bgmu(o) => ("bgmu", o),
        Command::Validate(o) => ("validate", o),
        Command::Dim(o) => ("dim", o),
        Command::HnDecomp(o) => ("hn-decomp", o),
        Command::Jw(o) => ("jw", o),
        Command::JwB(o) => ("jw-b", o),
        Command::EoHp(o) => ("eo-hp", o),
        Command::K3Table(o) => ("k3-table", o),
        Command::Tmax(o) => ("tmax", o),
        Command::AdlvEnum(o) => ("adlv-enum", o),
        Command::CartesianCheck(o) => ("cartesian-check", o),
        Command::SpecialChain(o) => ("special-chain", o),
        Command::DlCount(o) => ("dl-count", o),
        Command::FfScan(o) => ("ff-scan", o),
    };
    let result = dispatch(name, opts).map_err(CliError::Run)?;
    let text = if opts.pretty {
        Some(pretty(name, opts, &result).map_err(CliError::Run)?)
    } else {
        None
    };
    let doc = OutputDocument {
        command: name.to_string(),
        input: serde_json::to_value(opts).expect("options serialize"),
        result,
        version: env!("CARGO_PKG_VERSION").to_string(),
    };
    Ok((doc, text))
}

#[derive(Debug)]
pub enum CliError {
    Usage(clap::Error),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) => {
                if e.use_stderr() {
                    2
                } else {
                    0
                }
            }
            CliError::Run(Error::Resource(_) | Error::Precision(_)) => 3,
            CliError::Run(Error::Invalid(_) | Error::Unsupported(_) | Error::Dimension { .. }) => 2,
            CliError::Run(_) => 1,
        }
    }
}

/// Render a document as the canonical single-line JSON.
pub fn render(doc: &OutputDocument) -> String {
    serde_json::to_string(&serde_json::to_value(doc).expect("document serializes"))
        .expect("value renders")
}

pub fn run() -> i32 {
    match execute(std::env::args_os()) {
        Ok((doc, text)) => {
            let out = text.unwrap_or_else(|| render(&doc) + "\n");
            // a closed pipe downstream is not an error of ours
            let _ = std::io::stdout().write_all(out.as_bytes());
            0
        }
        Err(e) => {
            let code = e.exit_code();
            match e {
                CliError::Usage(u) => {
                    let _ = u.print();
                }
                CliError::Run(err) => eprintln!("error: {err}"),
            }
            code
        }
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("result serializes")
}

fn parse_ints(s: &str) -> Result<Vec<i64>, Error> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Invalid(format!("not an integer: {t:?}")))
        })
        .collect()
}

fn parse_qs(s: &str) -> Result<Vec<Q>, Error> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            let (n, d) = t.split_once('/').unwrap_or((t, "1"));
            match (n.parse::<i64>(), d.parse::<i64>()) {
                (Ok(n), Ok(d)) if d != 0 => Ok(Q::new(n, d)),
                _ => Err(Error::Invalid(format!("not a rational: {t:?}"))),
            }
        })
        .collect()
}

fn need<T: Copy>(x: Option<T>, flag: &str) -> Result<T, Error> {
    x.ok_or_else(|| Error::Invalid(format!("missing --{flag}")))
}

fn det_plus(o: &Opts) -> Result<bool, Error> {
    match o.det.as_str() {
        "plus" => Ok(true),
        "minus" => Ok(false),
        other => Err(Error::Invalid(format!(
            "--det must be plus or minus, got {other:?}"
        ))),
    }
}

fn family_name(o: &Opts) -> String {
    o.family
        .clone()
        .unwrap_or_else(|| "SO".into())
        .to_ascii_uppercase()
}

/// The datum named by the options. SO and GSpin default to `μ = e_1`.
fn datum(o: &Opts) -> Result<(RootDatum, Coweight, Option<QuadSpaceData>), Error> {
    let n = need(o.n, "n")?;
    let fam = family_name(o);
    let (rd, default_mu, quad) = match fam.as_str() {
        "SO" => {
            let (rd, mu) = orthogonal_datum(n, det_plus(o)?)?;
            (rd, Some(mu), Some(QuadSpaceData::new(n, det_plus(o)?)?))
        }
        "GSPIN" => {
            let (rd, mu) = gspin_datum(n, det_plus(o)?)?;
            (rd, Some(mu), None)
        }
        other => {
            let f = match other {
                "GL" => Family::GL,
                "SL" => Family::SL,
                "PGL" => Family::PGL,
                "SP" => Family::Sp,
                "GSP" => Family::GSp,
                "SO-ODD" => Family::SO(Orth::Odd),
                _ => return Err(Error::Unsupported(format!("family {other}"))),
            };
            (build_root_datum(f, n)?, None, None)
        }
    };
    let mu = match (&o.mu, default_mu) {
        (Some(s), _) => {
            let v = parse_ints(s)?;
            if v.len() != rd.dim {
                return Err(Error::Dimension {
                    expected: rd.dim,
                    got: v.len(),
                });
            }
            // an explicit μ drops the quadratic-space context
            return Ok((rd.clone(), rd.coweight_int(&v), None));
        }
        (None, Some(mu)) => mu,
        (None, None) => return Err(Error::Invalid("missing --mu".into())),
    };
    Ok((rd, mu, quad))
}

fn quad(o: &Opts) -> Result<QuadSpaceData, Error> {
    QuadSpaceData::new(need(o.n, "n")?, det_plus(o)?)
}

fn select_class(rd: &RootDatum, mu: &Coweight, o: &Opts) -> Result<Option<SigmaConjClass>, Error> {
    let classes = enumerate_bgmu(rd, mu)?;
    if o.basic {
        return Ok(classes.iter().find(|b| b.basic).cloned());
    }
    match &o.nu {
        Some(s) => {
            let nu = parse_qs(s)?;
            find_class(&classes, &nu, None)
                .cloned()
                .map(Some)
                .ok_or_else(|| Error::Invalid(format!("ν = {s} is not in B(G, μ)")))
        }
        None => Ok(None),
    }
}

fn dispatch(name: &str, o: &Opts) -> Result<Value, Error> {
    match name {
        "bgmu" => {
            let (rd, mu, _) = datum(o)?;
            Ok(to_value(&bgmu_table(&rd, &mu)?))
        }
        "validate" => {
            let (rd, mu, _) = datum(o)?;
            let b = select_class(&rd, &mu, o)?
                .ok_or_else(|| Error::Invalid("validate needs --basic or --nu".into()))?;
            Ok(to_value(&validate_datum(&rd, &mu, &b)?))
        }
        "dim" => {
            let (rd, mu, _) = datum(o)?;
            match select_class(&rd, &mu, o)? {
                Some(b) => Ok(json!({
                    "nu": to_value(&b.nu),
                    "dim": rz_dimension_of(&rd, &mu, &b)?,
                })),
                None => {
                    let rows = enumerate_bgmu(&rd, &mu)?
                        .iter()
                        .map(|b| {
                            Ok(json!({
                                "nu": to_value(&b.nu),
                                "basic": b.basic,
                                "dim": rz_dimension_of(&rd, &mu, b)?,
                            }))
                        })
                        .collect::<Result<Vec<Value>, Error>>()?;
                    Ok(Value::Array(rows))
                }
            }
        }
        "hn-decomp" => {
            let (rd, mu, _) = datum(o)?;
            Ok(to_value(&fully_hn_decomposable(&rd, &mu)?))
        }
        "jw" => {
            let (rd, mu, q) = datum(o)?;
            match q {
                Some(q) => {
                    let ctx = EOContext::orthogonal(q)?;
                    Ok(to_value(&annotate_orthogonal(&ctx, &q)?))
                }
                None => Ok(to_value(&enumerate_jw(&EOContext::new(rd, &mu)?))),
            }
        }
        "jw-b" => {
            let q = quad(o)?;
            let ctx = EOContext::orthogonal(q)?;
            Ok(json!({
                "basic": to_value(&basic_labels(&q)),
                "non_basic": to_value(&jw_b_assignment(&ctx, &q)?),
            }))
        }
        "eo-hp" => {
            let q = quad(o)?;
            let ctx = EOContext::orthogonal(q)?;
            Ok(to_value(&eo_hp_correspondence(&ctx, &q)?))
        }
        "k3-table" => Ok(to_value(&k3_dictionary()?)),
        "tmax" => {
            let q = quad(o)?;
            Ok(json!({
                "t_max": tmax(&q),
                "vertex_types": vertex_types(&q).iter().map(|v| v.t).collect::<Vec<_>>(),
            }))
        }
        "adlv-enum" | "cartesian-check" => adlv(name, o),
        "special-chain" => {
            let t = need(o.t, "t")?;
            let k = if o.k == 1 { t.max(2) } else { o.k };
            let m = o.m.unwrap_or(2 * (t as u32 + 2) + 2);
            let ring = GaloisRing::new(o.p, k, m)?;
            let model = QuadModel::vertex_model(ring, t)?;
            let l = find_special_lattice(&model, 1_000_000)?;
            Ok(to_value(&special_lattice_chain(&l, t.max(2))?))
        }
        "dl-count" => {
            let q = need(o.q, "q")?;
            let d = need(o.d, "d")?;
            let group = match family_name(o).as_str() {
                "PGL2" => FiniteGroup::Pgl2 { q },
                "SO5" => FiniteGroup::So5 { q },
                other => return Err(Error::Unsupported(format!("finite group {other}"))),
            };
            let counts = dl_counts(group, d)?;
            let rows: Vec<Value> = counts
                .iter()
                .map(|(w, c)| json!({"w": w, "count": c}))
                .collect();
            let mut out = json!({
                "flags": group.flag_count(d),
                "total": counts.values().sum::<i64>(),
                "counts": rows,
            });
            if let Some(word) = &o.word {
                let w: Vec<usize> = parse_ints(word)?
                    .into_iter()
                    .map(|x| usize::try_from(x).map_err(|_| Error::Invalid("negative node".into())))
                    .collect::<Result<_, _>>()?;
                let perm = group.word_to_permutation(&w);
                out["selected"] =
                    json!({"w": perm, "count": counts.get(&perm).copied().unwrap_or(0)});
            }
            Ok(out)
        }
        "ff-scan" => Ok(to_value(&admissible_type_scan(need(o.n, "n")? as u32)?)),
        _ => unreachable!("clap restricts subcommands"),
    }
}

fn adlv(name: &str, o: &Opts) -> Result<Value, Error> {
    let n = need(o.n, "n")?;
    if family_name(o) != "GL" {
        return Err(Error::Unsupported("lattice oracles model GL_n".into()));
    }
    let mu = parse_ints(
        o.mu.as_deref()
            .ok_or_else(|| Error::Invalid("missing --mu".into()))?,
    )?;
    if mu.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: mu.len(),
        });
    }
    let rd = build_root_datum(Family::GL, n)?;
    let classes = enumerate_bgmu(&rd, &rd.coweight_int(&mu))?;
    let nu = if o.basic {
        classes.iter().find(|b| b.basic).unwrap().nu.values()
    } else {
        parse_qs(
            o.nu.as_deref()
                .ok_or_else(|| Error::Invalid("missing --nu or --basic".into()))?,
        )?
    };
    let max_mu = *mu.iter().max().unwrap();
    let m =
        o.m.unwrap_or_else(|| required_precision(n, o.window, max_mu));
    let ring = GaloisRing::new(o.p, o.k, m)?;
    let b = gl_b_representative(&ring, &nu)?;
    if name == "cartesian-check" {
        let report = check_cartesian_gl_pgl(&ring, &b, &mu, o.window, o.negate_omega)?;
        return Ok(json!({
            "holds": report.holds(),
            "report": to_value(&report),
        }));
    }
    let variant = if o.closure {
        AdlvVariant::Closure
    } else {
        AdlvVariant::Exact
    };
    let set = enumerate_adlv(&ring, &b, &mu, o.window, variant)?;
    let in_bgmu = find_class(&classes, &nu, None).is_some();
    Ok(json!({
        "nu": fmt_qs(&nu),
        "in_bgmu": in_bgmu,
        "nonempty": !set.points.is_empty(),
        "summary": to_value(&set.summary(3)),
    }))
}

fn pretty(name: &str, o: &Opts, result: &Value) -> Result<String, Error> {
    match name {
        "jw" | "jw-b" | "eo-hp" | "tmax" if family_name(o) == "SO" => pretty_case_split(&quad(o)?),
        _ => Ok(serde_json::to_string_pretty(result).expect("value renders") + "\n"),
    }
}
