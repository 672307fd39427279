//! Command-line front end.
//!
//! Every subcommand builds a JSON value (or CSV text) and writes it to stdout
//! or `--out`. Floats are printed with 17 significant digits so golden files
//! stay byte-stable.

use std::io::Read;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use crate::commutant::{self, enumerate_classes, gram, mho_coefficients, monomial_basis, orbit_size, weingarten, CommClass};
use crate::dense::{self, DenseOperator, StateVector};
use crate::error::{Error, Result};
use crate::gf::{FMatrix, GLTransform};
use crate::magic::magic_report;
use crate::monomial::Monomial;
use crate::verify::{self, Tier};

#[derive(Parser, Debug)]
#[command(name = "cliffcomm", version, about = "Clifford group commutant toolkit")]
struct Cli {
    #[command(flatten)]
    cfg: Config,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Options shared by every subcommand.
#[derive(Args, Debug, Clone)]
struct Config {
    /// number of qudits
    #[arg(short = 'n', long = "n", global = true)]
    n: Option<usize>,
    /// number of tensor copies
    #[arg(short = 'k', long = "k", global = true)]
    k: Option<usize>,
    /// local dimension (prime)
    #[arg(short = 'q', long = "q", global = true, default_value_t = 2)]
    q: u32,
    /// worker threads; output does not depend on it
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// pruning tolerance for numeric output
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// shard i/m of the V-subspaces
    #[arg(long, global = true, value_parser = parse_shard)]
    shard: Option<(usize, usize)>,
    /// cap on the dense dimension q^(n k)
    #[arg(long = "dense-cap", global = true, env = "COMMUTANT_DENSE_CAP")]
    dense_cap: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// commutant dimension, split by (m, r)
    Dim,
    /// admissible classes [V, G]
    Enumerate,
    /// mho basis descriptions, or the monomial basis with --kind monomial
    Basis {
        #[arg(long, default_value = "mho")]
        kind: String,
        /// also list the Pauli terms of each mho element
        #[arg(long)]
        terms: bool,
    },
    /// Gram matrix of the monomial basis as powers of d
    Gram,
    /// inverse Gram matrix at d = q^n
    Weingarten,
    /// twirl a matrix JSON over the Clifford group
    Twirl {
        /// matrix JSON: path, inline text or '-'
        #[arg(long)]
        input: String,
        #[arg(long, default_value = "exact")]
        method: String,
    },
    /// apply rewriting operations to a monomial JSON
    Rewrite {
        /// monomial JSON: path, inline text or '-'
        #[arg(long)]
        input: String,
        /// reduce, canonical, normal-form, classify, dagger, swap:i,j, add:t,s[,c], gl:<rows>
        #[arg(long = "op")]
        ops: Vec<String>,
    },
    /// magic report for a pure state
    Magic {
        /// T, zero, random, or a state JSON {"q","n","re","im"}
        #[arg(long, default_value = "T")]
        state: String,
        /// extra monomials whose Delta_Omega is reported
        #[arg(long = "monomial")]
        monomials: Vec<String>,
    },
    /// two-sided permutation classes of the monomial basis
    Table,
    /// acceptance checks
    Verify {
        #[arg(long, default_value = "quick")]
        tier: String,
        /// check ids to run (all when empty)
        ids: Vec<String>,
    },
}

fn parse_shard(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once('/').ok_or("expected i/m")?;
    let i = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
    let m = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
    if m == 0 || i >= m {
        return Err(format!("shard index {i} must be below count {m}"));
    }
    Ok((i, m))
}

/// Run with argv (program name first). Returns the exit status.
pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli) {
        Ok((text, status)) => {
            let written = match &cli.cfg.out {
                Some(p) => std::fs::write(p, &text).map_err(|e| e.to_string()),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return 1;
            }
            status
        }
        Err(Fail::Usage(msg)) => {
            eprintln!("error: {msg}\n\nRun with --help for the grammar.");
            2
        }
        Err(Fail::Domain(e)) => {
            eprintln!("{}: {}", e.name(), detail(&e));
            1
        }
    }
}

fn detail(e: &Error) -> String {
    let s = e.to_string();
    s.strip_prefix(&format!("{}: ", e.name())).map(str::to_string).unwrap_or(s)
}

enum Fail {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Domain(e)
    }
}

type Res<T> = std::result::Result<T, Fail>;

fn need(x: Option<usize>, flag: &str) -> Res<usize> {
    x.ok_or_else(|| Fail::Usage(format!("{flag} is required")))
}

fn execute(cli: &Cli) -> Res<(String, i32)> {
    let c = &cli.cfg;
    if let Some(cap) = c.dense_cap {
        dense::set_dense_cap(cap);
    }
    if c.workers == 0 {
        return Err(Fail::Usage("--workers must be positive".into()));
    }
    crate::gf::check_field(c.q)?;
    let out = match &cli.cmd {
        Cmd::Dim => {
            let r = commutant::dimension(need(c.n, "-n")?, need(c.k, "-k")?, c.q)?;
            match c.format {
                Format::Text => format!("{}\n", r.total),
                Format::Json => render(&r.to_json()),
                Format::Csv => r.to_csv(),
            }
        }
        Cmd::Enumerate => {
            let (n, k) = (need(c.n, "-n")?, need(c.k, "-k")?);
            let classes = classes(c, n, k)?;
            match c.format {
                Format::Text => classes.iter().map(|x| format!("{}\n", x.to_json())).collect(),
                Format::Json => render(&json!({"n": n, "k": k, "q": c.q, "shard": shard_json(c), "count": classes.len(), "classes": classes.iter().map(|x| x.to_json()).collect::<Vec<_>>()})),
                Format::Csv => {
                    let mut s = String::from("m,rank,V,G\n");
                    for x in &classes {
                        let v: Vec<String> = x.to_json()["V"].as_array().unwrap().iter().map(|c| c.as_str().unwrap().to_string()).collect();
                        s.push_str(&format!("{},{},{},{}\n", x.m(), x.graph_rank(), v.join(" "), x.g.to_text()));
                    }
                    s
                }
            }
        }
        Cmd::Basis { kind, terms } => basis(c, kind, *terms)?,
        Cmd::Gram => {
            let (n, k) = (need(c.n, "-n")?, need(c.k, "-k")?);
            let g = gram(n, k, c.q, &monomial_basis(k, c.q)?)?;
            match c.format {
                Format::Csv => g.exps.iter().map(|r| format!("{}\n", r.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))).collect(),
                _ => render(&g.to_json()),
            }
        }
        Cmd::Weingarten => {
            let (n, k) = (need(c.n, "-n")?, need(c.k, "-k")?);
            let g = gram(n, k, c.q, &monomial_basis(k, c.q)?)?;
            let w = weingarten(&g, n);
            match c.format {
                Format::Csv => (0..w.entries.nrows()).map(|i| format!("{}\n", (0..w.entries.ncols()).map(|j| fmt17(w.entries[(i, j)])).collect::<Vec<_>>().join(","))).collect(),
                _ => render(&w.to_json()),
            }
        }
        Cmd::Twirl { input, method } => twirl(c, input, method)?,
        Cmd::Rewrite { input, ops } => rewrite(c, input, ops)?,
        Cmd::Magic { state, monomials } => {
            let n = need(c.n, "-n")?;
            let (s, seed) = match state.as_str() {
                "T" | "t" => (StateVector::t_state(n)?, None),
                "zero" | "0" => (StateVector::zero(c.q, n)?, None),
                "random" => (StateVector::random(c.q, n, &mut ChaCha8Rng::seed_from_u64(c.seed))?, Some(c.seed)),
                other => (read_state(other, n)?, None),
            };
            let extra: Vec<Monomial> = monomials.iter().map(|m| Monomial::from_json(&read_json(m)?)).collect::<Result<_>>()?;
            let r = magic_report(&s, state, seed, &extra)?;
            match c.format {
                Format::Csv => {
                    let mut s = String::from("quantity,value\n");
                    if let Value::Object(o) = r.to_json() {
                        for (key, v) in o {
                            if let Some(x) = v.as_f64() {
                                s.push_str(&format!("{key},{}\n", fmt17(x)));
                            }
                        }
                    }
                    s
                }
                _ => render(&r.to_json()),
            }
        }
        Cmd::Table => {
            let k = need(c.k, "-k")?;
            let rows = commutant::class_table(k)?;
            let total = commutant::table_total(&rows);
            match c.format {
                Format::Text => {
                    let mut s: String = rows.iter().map(|r| format!("{}\t{}\n", r.size, r.representative.to_json())).collect();
                    s.push_str(&format!("total\t{total}\n"));
                    s
                }
                Format::Json => render(&json!({"k": k, "classes": rows.len(), "total": total, "rows": rows.iter().map(|r| json!({"representative": r.representative.to_json(), "size": r.size})).collect::<Vec<_>>()})),
                Format::Csv => {
                    let mut s = String::from("size,representative\n");
                    for r in &rows {
                        s.push_str(&format!("{},\"{}\"\n", r.size, r.representative.to_json().to_string().replace('"', "\"\"")));
                    }
                    s
                }
            }
        }
        Cmd::Verify { tier, ids } => {
            let tier = Tier::from_str(tier).map_err(|e| Fail::Usage(detail(&e)))?;
            let text = c.format == Format::Text;
            let checks = verify::run_selected(tier, ids, &mut |ch| {
                if text {
                    println!("{}", ch.line());
                }
            });
            let failed = checks.iter().filter(|x| !x.pass).count();
            let status = if failed == 0 { 0 } else { 1 };
            let s = match c.format {
                Format::Text => format!("{} passed, {} failed\n", checks.len() - failed, failed),
                Format::Json => render(&Value::Array(checks.iter().map(|x| x.to_json()).collect())),
                Format::Csv => {
                    let mut s = String::from("id,pass,seconds\n");
                    for x in &checks {
                        s.push_str(&format!("{},{},{}\n", x.id, x.pass, fmt17(x.seconds)));
                    }
                    s
                }
            };
            return Ok((s, status));
        }
    };
    Ok((out, 0))
}

fn shard_json(c: &Config) -> Value {
    match c.shard {
        Some((i, m)) => json!(format!("{i}/{m}")),
        None => Value::Null,
    }
}

/// Enumerate with `workers` threads. Worker j takes the V-subspaces with
/// global index i + m j mod m w, and the merge restores the serial order.
fn classes(c: &Config, n: usize, k: usize) -> Result<Vec<CommClass>> {
    let (i, m) = c.shard.unwrap_or((0, 1));
    let w = c.workers;
    let parts: Vec<Result<Vec<(usize, CommClass)>>> = std::thread::scope(|s| {
        let hs: Vec<_> = (0..w)
            .map(|j| {
                s.spawn(move || {
                    let mut it = enumerate_classes(n, k, c.q, Some((i + m * j, m * w)))?;
                    let mut out = Vec::new();
                    while let Some(x) = it.next() {
                        out.push((it.v_index(), x));
                    }
                    Ok(out)
                })
            })
            .collect();
        hs.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut all = Vec::new();
    for p in parts {
        all.extend(p?);
    }
    all.sort_by_key(|x| x.0);
    Ok(all.into_iter().map(|x| x.1).collect())
}

fn basis(c: &Config, kind: &str, terms: bool) -> Res<String> {
    let k = need(c.k, "-k")?;
    match kind {
        "monomial" => {
            let b = monomial_basis(k, c.q)?;
            Ok(match c.format {
                Format::Csv => {
                    let mut s = String::from("order,monomial\n");
                    for m in &b {
                        s.push_str(&format!("{},\"{}\"\n", m.order(), m.to_json().to_string().replace('"', "\"\"")));
                    }
                    s
                }
                _ => render(&json!({"k": k, "q": c.q, "size": b.len(), "basis": b.iter().map(|m| m.to_json()).collect::<Vec<_>>()})),
            })
        }
        "mho" => {
            let n = need(c.n, "-n")?;
            let mut rows = Vec::new();
            for cls in classes(c, n, k)? {
                let mut o = Map::new();
                o.insert("class".into(), cls.to_json());
                o.insert("orbit_size".into(), json!(orbit_size(&cls, n)?.to_string()));
                if terms {
                    let desc = mho_coefficients(&cls, n)?;
                    let ts: Vec<Value> = desc.terms.map(|(t, ph)| json!({"tensor": t.literal(), "phase": ph.to_string()})).collect();
                    o.insert("terms".into(), Value::Array(ts));
                }
                rows.push(Value::Object(o));
            }
            Ok(match c.format {
                Format::Csv => {
                    let mut s = String::from("m,rank,orbit_size,class\n");
                    for (r, cls) in rows.iter().zip(classes(c, n, k)?) {
                        s.push_str(&format!("{},{},{},\"{}\"\n", cls.m(), cls.graph_rank(), r["orbit_size"].as_str().unwrap(), cls.to_json().to_string().replace('"', "\"\"")));
                    }
                    s
                }
                _ => render(&json!({"n": n, "k": k, "q": c.q, "shard": shard_json(c), "count": rows.len(), "elements": rows})),
            })
        }
        other => Err(Fail::Usage(format!("unknown basis kind {other:?} (mho, monomial)"))),
    }
}

fn twirl(c: &Config, input: &str, method: &str) -> Res<String> {
    let mut v = read_json(input)?;
    if let Value::Object(o) = &mut v {
        for (key, x) in [("n", c.n), ("k", c.k)] {
            if let Some(x) = x {
                o.entry(key).or_insert(json!(x));
            }
        }
        o.entry("q").or_insert(json!(c.q));
    }
    let op = DenseOperator::from_json(&v)?;
    let mut t = match method {
        "exact" => dense::exact_twirl(&op)?,
        "haar" => dense::haar_twirl(&op)?,
        "weingarten" => {
            let b = monomial_basis(op.k, op.q)?;
            let w = weingarten(&gram(op.n, op.k, op.q, &b)?, op.n);
            dense::weingarten_twirl(&op, &b, &w)?
        }
        other => return Err(Fail::Usage(format!("unknown twirl method {other:?} (exact, weingarten, haar)"))),
    };
    if let Some(tol) = c.tol {
        for z in t.mat.iter_mut() {
            if z.re.abs() < tol {
                z.re = 0.0;
            }
            if z.im.abs() < tol {
                z.im = 0.0;
            }
        }
    }
    Ok(match c.format {
        Format::Csv => {
            let d = t.dim();
            let mut s = String::from("row,col,re,im\n");
            for r in 0..d {
                for col in 0..d {
                    s.push_str(&format!("{r},{col},{},{}\n", fmt17(t.mat[(r, col)].re), fmt17(t.mat[(r, col)].im)));
                }
            }
            s
        }
        _ => render(&t.to_json()),
    })
}

fn rewrite(c: &Config, input: &str, ops: &[String]) -> Res<String> {
    let start = Monomial::from_json(&read_json(input)?)?;
    let mut cur = start.clone();
    let default = ["reduce".to_string()];
    let ops = if ops.is_empty() { &default[..] } else { ops };
    let mut steps = Vec::new();
    let mut dpower = 0usize;
    for op in ops {
        let (name, arg) = op.split_once(':').unwrap_or((op.as_str(), ""));
        let nums = || -> Res<Vec<usize>> { arg.split(',').map(|x| x.trim().parse::<usize>().map_err(|_| Fail::Usage(format!("bad arguments in {op:?}")))).collect() };
        let col = |x: usize| -> Res<usize> { x.checked_sub(1).ok_or_else(|| Fail::Usage("columns are 1-based".into())) };
        let mut step = Map::new();
        step.insert("op".into(), json!(op));
        match name {
            "reduce" => {
                let r = cur.reduce();
                dpower += r.dpower;
                step.insert("dpower".into(), json!(r.dpower));
                step.insert("beta".into(), json!(r.beta));
                cur = r.reduced;
            }
            "canonical" => cur = cur.canonical(),
            "dagger" => cur = cur.dagger(),
            "normal-form" => {
                let nf = cur.normal_form();
                step.insert("projective".into(), nf.projective.to_json());
                step.insert("unitary".into(), nf.unitary.to_json());
            }
            "classify" => {
                step.insert("class".into(), json!(cur.classify().as_str()));
            }
            "swap" => {
                let a = nums()?;
                if a.len() != 2 {
                    return Err(Fail::Usage("swap takes i,j".into()));
                }
                cur = cur.swap_columns(col(a[0])?, col(a[1])?)?;
            }
            "add" => {
                let a = nums()?;
                if a.len() != 2 && a.len() != 3 {
                    return Err(Fail::Usage("add takes t,s[,c]".into()));
                }
                let mult = a.get(2).copied().unwrap_or(1) as u32;
                cur = cur.add_column_multiple(col(a[0])?, col(a[1])?, mult)?;
            }
            "gl" => {
                let g = GLTransform::new(FMatrix::parse(arg, cur.q())?)?;
                cur = cur.apply_gl(&g)?;
            }
            other => return Err(Fail::Usage(format!("unknown rewrite op {other:?}"))),
        }
        step.insert("result".into(), cur.to_json());
        steps.push(Value::Object(step));
    }
    let _ = c;
    Ok(render(&json!({"input": start.to_json(), "steps": steps, "result": cur.to_json(), "dpower": dpower})))
}

/// Inline JSON, '-' for stdin, or a path.
fn read_json(src: &str) -> Result<Value> {
    let text = if src.trim_start().starts_with('{') {
        src.to_string()
    } else if src == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Error::Parse(e.to_string()))?;
        s
    } else {
        std::fs::read_to_string(src).map_err(|e| Error::Parse(format!("{src}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

/// State JSON {"q", "n", "re", "im"}; amplitudes are normalized on load.
fn read_state(src: &str, n: usize) -> Result<StateVector> {
    let v = read_json(src)?;
    let q = v.get("q").and_then(Value::as_u64).unwrap_or(2) as u32;
    let n = v.get("n").and_then(Value::as_u64).map(|x| x as usize).unwrap_or(n);
    let read = |key: &str| -> Result<Vec<f64>> {
        match v.get(key) {
            None if key == "im" => Ok(vec![]),
            x => x.and_then(Value::as_array).ok_or_else(|| Error::Parse(format!("missing {key}")))?.iter().map(|x| x.as_f64().ok_or_else(|| Error::Parse("non-numeric amplitude".into()))).collect(),
        }
    };
    let re = read("re")?;
    let mut im = read("im")?;
    if im.is_empty() {
        im = vec![0.0; re.len()];
    }
    if re.len() != im.len() {
        return Err(Error::ShapeMismatch("re and im differ in length".into()));
    }
    let amps = re.iter().zip(&im).map(|(a, b)| num_complex::Complex64::new(*a, *b)).collect();
    StateVector::normalized(q, n, amps)
}

// ------------------------------------------------------------ formatting

/// 17 significant digits; fixed notation for moderate exponents.
pub fn fmt17(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return "0.0000000000000000".into();
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..17).contains(&e) {
        let s = format!("{:.*}", (16 - e) as usize, x);
        // rounding can carry into a new digit; re-round from the longer string
        let digits = s.chars().filter(|c| c.is_ascii_digit()).collect::<String>().trim_start_matches('0').len();
        if digits > 17 && e < 16 {
            return format!("{:.*}", (15 - e).max(0) as usize, x);
        }
        s
    } else {
        format!("{:.16e}", x)
    }
}

/// Pretty JSON with every float through `fmt17`.
pub fn render(v: &Value) -> String {
    let mut s = String::new();
    write_value(v, 0, &mut s);
    s.push('\n');
    s
}

fn write_value(v: &Value, ind: usize, s: &mut String) {
    let pad = |s: &mut String, i: usize| s.extend(std::iter::repeat_n(' ', 2 * i));
    match v {
        Value::Number(x) if x.is_f64() => s.push_str(&fmt17(x.as_f64().unwrap())),
        Value::Array(a) if a.is_empty() => s.push_str("[]"),
        Value::Array(a) if a.iter().all(|x| !x.is_array() && !x.is_object()) => {
            s.push('[');
            for (i, x) in a.iter().enumerate() {
                if i > 0 {
                    s.push_str(", ");
                }
                write_value(x, ind, s);
            }
            s.push(']');
        }
        Value::Array(a) => {
            s.push_str("[\n");
            for (i, x) in a.iter().enumerate() {
                pad(s, ind + 1);
                write_value(x, ind + 1, s);
                s.push_str(if i + 1 < a.len() { ",\n" } else { "\n" });
            }
            pad(s, ind);
            s.push(']');
        }
        Value::Object(o) if o.is_empty() => s.push_str("{}"),
        Value::Object(o) => {
            s.push_str("{\n");
            for (i, (key, x)) in o.iter().enumerate() {
                pad(s, ind + 1);
                s.push_str(&Value::String(key.clone()).to_string());
                s.push_str(": ");
                write_value(x, ind + 1, s);
                s.push_str(if i + 1 < o.len() { ",\n" } else { "\n" });
            }
            pad(s, ind);
            s.push('}');
        }
        other => s.push_str(&other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt17(0.75), "0.75000000000000000");
        assert_eq!(fmt17(30.0), "30.000000000000000");
        assert_eq!(fmt17(-1.0), "-1.0000000000000000");
        assert_eq!(fmt17(1e-9), "1.0000000000000001e-9");
        assert_eq!(fmt17(0.9999999999999999999), "1.0000000000000000");
    }
}
