use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};

use cubitab::density::{self, decimal_string, DensityKind, DensityValue};
use cubitab::enumerate::{Enumerator, FieldTable, Sign};
use cubitab::maier::{self, ExponentConfig, MatrixParams};
use cubitab::progression::{self, format_rational, parse_rational, ProgressionCertificate, SettingParams};
use cubitab::table::{self, FieldCache, ImportFormat};
use cubitab::{discshape, genus, Error};

#[derive(Parser, Debug)]
#[command(name = "cubitab", version, about = "Cubic field tables, genus bounds and discriminant densities")]
struct Cli {
    /// Enumeration threads; results do not depend on this.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Directory for cached field tables.
    #[arg(long, global = true, env = "CUBITAB_CACHE")]
    cache: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Exponent of the 3-torsion bound used in informational reports.
    #[arg(long, global = true, default_value_t = density::KAPPA)]
    kappa: f64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List every cubic field with 0 < ±disc <= X.
    Enumerate {
        #[arg(long, value_parser = parse_sign, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long = "X", alias = "x")]
        x: i64,
    },
    /// N3±(X), optionally restricted to disc = a mod m (strict: |disc| < X).
    Count {
        #[arg(long, value_parser = parse_sign, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long = "X", alias = "x")]
        x: i64,
        #[arg(long, requires = "a")]
        m: Option<BigInt>,
        #[arg(long, requires = "m")]
        a: Option<BigInt>,
    },
    /// Decompose a discriminant as d f^2 3^w.
    Classify {
        #[arg(long, allow_negative_numbers = true)]
        delta: BigInt,
        /// Also count the cubic fields with this discriminant.
        #[arg(long)]
        fields: bool,
    },
    /// Genus number and class number lower bound.
    Genus {
        #[arg(long, allow_negative_numbers = true)]
        delta: BigInt,
    },
    /// Density of cubic discriminants in the class a mod m.
    Density {
        #[arg(long)]
        m: BigInt,
        #[arg(long, allow_negative_numbers = true)]
        a: BigInt,
        /// Also report the bound (1/m)(1 - epsilon)^t.
        #[arg(long, value_parser = parse_ratio)]
        epsilon: Option<BigRational>,
    },
    /// Construct a progression certificate.
    Setting {
        #[arg(long, value_parser = parse_sign, allow_hyphen_values = true, default_value = "+")]
        sign: Sign,
        #[arg(long, value_parser = parse_ratio)]
        epsilon: BigRational,
        #[arg(long)]
        k: u32,
        #[arg(long = "H", alias = "h")]
        h: u64,
        /// Require (q_i / p_ij) = 1 so that no local density vanishes.
        #[arg(long)]
        strengthen: bool,
        /// Wrap the certificate with its verification and density reports.
        #[arg(long)]
        check: bool,
        /// Read the certificate from a file instead of constructing it.
        #[arg(long, conflicts_with_all = ["strengthen"])]
        load: Option<PathBuf>,
    },
    /// Maier matrix over a progression, or the full pipeline for a certificate.
    Maier {
        #[arg(long, value_parser = parse_sign, allow_hyphen_values = true, default_value = "-")]
        sign: Sign,
        #[arg(long, default_value = "0")]
        a: BigInt,
        #[arg(long, default_value = "5")]
        m: BigInt,
        #[arg(long, default_value_t = 4)]
        k: u32,
        #[arg(long, default_value_t = 2000)]
        rows: u64,
        #[arg(long, value_parser = parse_ratio, default_value = "0")]
        delta: BigRational,
        /// Certificate JSON; runs the genus check on every field found.
        #[arg(long)]
        certificate: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long = "exp-epsilon", default_value_t = 0.01)]
        exp_epsilon: f64,
        /// Also write the matrix as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Report the multiplicity histogram for |disc| <= this bound instead.
        #[arg(long)]
        histogram: Option<i64>,
    },
    /// Compare an external table (CSV or JSON lines) with a fresh enumeration.
    VerifyImport {
        #[arg(long)]
        file: PathBuf,
        #[arg(long, value_parser = parse_sign, allow_hyphen_values = true)]
        sign: Sign,
        #[arg(long = "X", alias = "x")]
        x: i64,
    },
    /// List cached tables.
    CacheInfo,
}

fn parse_sign(s: &str) -> Result<Sign, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_ratio(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Output {
    Json(Value),
    Csv(Vec<u8>),
    Text(String),
}

fn to_json<T: Serialize>(v: &T) -> anyhow::Result<Value> {
    Ok(serde_json::to_value(v)?)
}

struct Ctx {
    enumerator: Enumerator,
    cache: Option<FieldCache>,
    format: Format,
    kappa: f64,
}

impl Ctx {
    fn table(&self, sign: Sign, x: i64) -> anyhow::Result<FieldTable> {
        match &self.cache {
            Some(cache) => {
                let (table, outcome) = cache.load_or_build(&self.enumerator, sign, x)?;
                eprintln!("cache: {outcome:?} for {sign} X = {x} in {}", cache.dir().display());
                Ok(table)
            }
            None => Ok(self.enumerator.enumerate(sign, x)?),
        }
    }

    fn unsupported(&self, what: &str) -> anyhow::Result<Output> {
        Err(UsageError(format!("--format {:?} is not available for {what}", self.format).to_lowercase()).into())
    }
}

#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn density_json(m: &BigInt, a: &BigInt, d: &DensityValue) -> Value {
    // an exactly vanishing density is reported as an exact value of 0
    let kind = match d.kind {
        DensityKind::Exact | DensityKind::Zero => "exact",
        DensityKind::LowerBound => "lower-bound",
    };
    json!({
        "m": m.to_string(),
        "a": a.to_string(),
        "value": fraction(&d.value),
        "decimal": decimal_string(&d.value),
        "kind": kind,
        "zero": d.kind == DensityKind::Zero,
        "implied": d.implied.as_ref().map(fraction),
        "provenance": d.provenance,
    })
}

fn fraction(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format_rational(r)
    }
}

fn run(cli: Cli) -> anyhow::Result<Output> {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let ctx = Ctx {
        enumerator: Enumerator::with_workers(workers),
        cache: cli.cache.map(FieldCache::new),
        format: cli.format,
        kappa: cli.kappa,
    };
    match cli.command {
        Command::Enumerate { sign, x } => {
            let t = ctx.table(sign, x)?;
            match ctx.format {
                Format::Json => {
                    let mut buf = Vec::new();
                    table::write_jsonl(&t.records, &mut buf)?;
                    Ok(Output::Csv(buf))
                }
                Format::Csv => {
                    let mut s = String::from("disc,a,b,c,d\n");
                    for r in &t.records {
                        let f = r.form;
                        s.push_str(&format!("{},{},{},{},{}\n", r.disc, f.a, f.b, f.c, f.d));
                    }
                    Ok(Output::Csv(s.into_bytes()))
                }
                Format::Text => {
                    let mut s = String::new();
                    for r in &t.records {
                        s.push_str(&format!("{:>12}  {}{}\n", r.disc, r.form, if r.galois { "  galois" } else { "" }));
                    }
                    s.push_str(&format!("{} fields with 0 < {}disc <= {x}\n", t.count(), sign));
                    Ok(Output::Text(s))
                }
            }
        }
        Command::Count { sign, x, m, a } => {
            let t = ctx.table(sign, (x - 1).max(0))?;
            let (m, a) = (m.unwrap_or_else(|| BigInt::from(1)), a.unwrap_or_default());
            let n = t.count_progression(&m, &a)?;
            let prediction = density::predict_count(sign, x, &m, &a).ok();
            let v = json!({
                "sign": sign,
                "X": x,
                "m": m.to_string(),
                "a": a.to_string(),
                "count": n,
                "main_term": prediction.as_ref().and_then(|p| p.value),
                "main_term_implied": prediction.as_ref().and_then(|p| p.implied),
            });
            match ctx.format {
                Format::Json => Ok(Output::Json(v)),
                Format::Csv => Ok(Output::Csv(format!("sign,X,m,a,count\n{sign},{x},{m},{a},{n}\n").into_bytes())),
                Format::Text => Ok(Output::Text(format!("N3{sign}({x}; {m}, {a}) = {n}\n"))),
            }
        }
        Command::Classify { delta, fields } => {
            let shape = discshape::decompose(&delta)?;
            let mut v = to_json(&shape)?;
            if fields {
                let d = i64::try_from(&delta).map_err(|_| Error::Capacity(format!("{delta} does not fit in 64 bits")))?;
                v["fields"] = to_json(&ctx.enumerator.fields_with_disc(d)?)?;
            }
            match ctx.format {
                Format::Json => Ok(Output::Json(v)),
                Format::Text => Ok(Output::Text(format!(
                    "{delta} = d f^2 3^w with d = {}, f = {}, w = {}; admissible: {}\n",
                    v["d"], v["f"], v["w"], shape.admissible
                ))),
                Format::Csv => ctx.unsupported("classify"),
            }
        }
        Command::Genus { delta } => {
            let g = genus::genus_of(&delta)?;
            match ctx.format {
                Format::Json => Ok(Output::Json(to_json(&g)?)),
                Format::Text => Ok(Output::Text(format!(
                    "{delta}: e = {}, genus number {}, 3-part of the class number >= {}\n",
                    g.e, g.genus_number, g.class_number_lower_bound
                ))),
                Format::Csv => ctx.unsupported("genus"),
            }
        }
        Command::Density { m, a, epsilon } => {
            let d = density::density(&m, &a)?;
            let mut v = density_json(&m, &a, &d);
            if let Some(eps) = &epsilon {
                let b = density::density_lower_bound(&m, &a, eps)?;
                v["lemma_bound"] = json!(fraction(&b.value));
            }
            match ctx.format {
                Format::Json => Ok(Output::Json(v)),
                Format::Csv => Ok(Output::Csv(
                    format!("m,a,value,decimal,kind\n{m},{a},{},{},{}\n", v["value"].as_str().unwrap_or(""), v["decimal"].as_str().unwrap_or(""), v["kind"].as_str().unwrap_or(""))
                        .into_bytes(),
                )),
                Format::Text => Ok(Output::Text(format!(
                    "C({m}, {a}) = {} ~ {} ({})\n",
                    fraction(&d.value),
                    decimal_string(&d.value),
                    v["kind"].as_str().unwrap_or("")
                ))),
            }
        }
        Command::Setting { sign, epsilon, k, h, strengthen, check, load } => {
            let cert: ProgressionCertificate = match load {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_str(&text)?
                }
                None => progression::construct_setting(&SettingParams::new(sign, epsilon, k, h)?, strengthen)?,
            };
            let v = if check {
                json!({
                    "certificate": cert,
                    "verification": progression::verify_certificate(&cert),
                    "density": density::setting_density_check(&cert)?,
                })
            } else {
                to_json(&cert)?
            };
            match ctx.format {
                Format::Json => Ok(Output::Json(v)),
                Format::Text => Ok(Output::Text(format!("{cert}\n"))),
                Format::Csv => ctx.unsupported("setting"),
            }
        }
        Command::Maier { sign, a, m, k, rows, delta, certificate, c, exp_epsilon, csv, histogram } => {
            let cfg = ExponentConfig { c, epsilon: exp_epsilon, kappa: ctx.kappa };
            if let Some(x) = histogram {
                let h = maier::multiplicity_histogram(&ctx.enumerator, sign, x, ctx.kappa)?;
                return match ctx.format {
                    Format::Json => Ok(Output::Json(to_json(&h)?)),
                    _ => ctx.unsupported("maier --histogram"),
                };
            }
            let (v, report) = match certificate {
                Some(path) => {
                    let text = std::fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
                    let cert: ProgressionCertificate = serde_json::from_str(&text)?;
                    let rep = maier::pipeline_check(&ctx.enumerator, &cert, rows, &cfg)?;
                    (to_json(&rep)?, rep.matrix)
                }
                None => {
                    let params = MatrixParams::new(sign, a, m, k, rows, delta)?;
                    let rep = maier::build_matrix(&ctx.enumerator, &params, &cfg)?;
                    (to_json(&rep)?, rep)
                }
            };
            if let Some(path) = csv {
                report.write_csv(std::fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?)?;
            }
            match ctx.format {
                Format::Json => Ok(Output::Json(v)),
                Format::Csv => {
                    let mut buf = Vec::new();
                    report.write_csv(&mut buf)?;
                    Ok(Output::Csv(buf))
                }
                Format::Text => Ok(Output::Text(format!(
                    "{} rows, {} fields, G = {} good rows above {}, reference curve {:.3}\n",
                    report.rows, report.total_fields, report.g, report.row_threshold, report.exponent_reference
                ))),
            }
        }
        Command::VerifyImport { file, sign, x } => {
            let reference = table::import_table(&file, ImportFormat::from_path(&file))?;
            let computed = ctx.table(sign, x)?;
            let report = table::cross_check(&reference, &computed);
            let clean = report.is_empty();
            let v = json!({ "file": file, "agree": clean, "report": report });
            if !clean {
                println!("{}", serde_json::to_string_pretty(&v)?);
                bail!(Error::Inconsistent(format!("{} disagrees with the enumeration", file.display())));
            }
            match ctx.format {
                Format::Json => Ok(Output::Json(v)),
                _ => Ok(Output::Text(format!("{}: agrees on {sign} |disc| <= {x}\n", file.display()))),
            }
        }
        Command::CacheInfo => {
            let Some(cache) = &ctx.cache else {
                return Err(UsageError("no cache directory: pass --cache or set CUBITAB_CACHE".into()).into());
            };
            let entries = cache.entries()?;
            match ctx.format {
                Format::Json => Ok(Output::Json(json!({
                    "dir": cache.dir(),
                    "schema_version": table::SCHEMA_VERSION,
                    "entries": entries,
                }))),
                _ => {
                    let mut s = String::new();
                    for e in &entries {
                        s.push_str(&format!("{} X = {:>10}  {:>10} bytes  {}\n", e.sign, e.bound, e.bytes, e.path.display()));
                    }
                    Ok(Output::Text(s))
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(out) => {
            let mut stdout = io::stdout().lock();
            let written = match out {
                Output::Json(v) => serde_json::to_writer_pretty(&mut stdout, &v)
                    .map_err(io::Error::from)
                    .and_then(|_| writeln!(stdout)),
                Output::Csv(bytes) => stdout.write_all(&bytes),
                Output::Text(s) => stdout.write_all(s.as_bytes()),
            };
            match written {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}
