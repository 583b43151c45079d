use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use cyltorsion::clasper::{one_loop_presentation, surgery_factor, OneLoopClasper};
use cyltorsion::cyclic::p_plus;
use cyltorsion::cylinder::{compose, mirror, torsion, torsion_mod_h, trivial};
use cyltorsion::johnson::es_trace;
use cyltorsion::verify::{self, Opts, SUITES};
use cyltorsion::{format_q, CyclicSeries, DegreeBound, Error, ExpansionAuto, K1Value, LabeledPresentation, Q};

const DEFAULT_CAP: usize = 4;

#[derive(Parser)]
#[command(name = "cyltorsion", version, about = "Exact K1-valued torsion of homology cylinders")]
struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized torsion of a presentation file.
    Torsion(TorsionArgs),
    /// Closed-form value of 1-loop clasper surgery.
    Surgery(SurgeryArgs),
    /// Johnson image and its trace for an automorphism file.
    Johnson(JohnsonArgs),
    /// Exact difference of two invariants.
    Compare(CompareArgs),
    /// Run property suites on seeded random instances.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct TorsionArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct SurgeryArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    genus: Option<usize>,
    /// Also compile the clasper into a presentation and compare.
    #[arg(long)]
    oracle: bool,
}

#[derive(Args)]
struct JohnsonArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct CompareArgs {
    /// Given twice; each file is a presentation or a K1 value.
    #[arg(long = "in", required = true)]
    input: Vec<PathBuf>,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    genus: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run; all of them when omitted.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(SUITES))]
    suite: Vec<String>,
    #[arg(long)]
    cap: Option<usize>,
    #[arg(long)]
    genus: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 64)]
    trials: usize,
}

enum Failure {
    Lib(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

/// A JSON report plus whether every check in it held.
struct Report {
    json: Value,
    summary: Vec<String>,
    ok: bool,
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn check_cap(cap: usize) -> Result<usize, Failure> {
    if cap == 0 {
        return Err(Error::PreconditionViolated("cap must be at least 1".into()).into());
    }
    Ok(cap)
}

fn check_genus(genus: Option<usize>) -> Result<Option<usize>, Failure> {
    if genus == Some(0) {
        return Err(Error::PreconditionViolated("genus must be at least 1".into()).into());
    }
    Ok(genus)
}

fn flatten(k1: &K1Value, mut rest: Value) -> Value {
    let v = k1.to_json();
    rest["det_eps"] = v["det_eps"].clone();
    rest["log"] = v["log"].clone();
    rest
}

fn run_torsion(a: &TorsionArgs) -> Result<Report, Failure> {
    let (p, file_cap) = LabeledPresentation::from_json(&read_json(&a.input)?)?;
    let cap = check_cap(a.cap.or(file_cap).unwrap_or(DEFAULT_CAP))?;
    let inv = torsion_mod_h(&p, cap)?;
    let mut rest = json!({
        "genus": p.genus(),
        "cap": cap,
        "sigma": inv.sigma.to_json(),
        "euler_shift": inv.euler_shift,
        "defined_mod_h": inv.defined_mod_h,
    });
    if let Some(t) = &inv.tau1 {
        rest["tau1"] = t.to_json();
    }
    if !inv.defined_mod_h {
        let double = torsion(&compose(&p, &mirror(&p))?, cap)?;
        rest["loop_part"] = p_plus(&double.torsion.log).scale(&Q::new((-1).into(), 2.into())).to_json();
    }
    let mut summary = vec![format!("torsion at cap {cap}: det ε = {}, log = {}", format_q(&inv.torsion.det_eps), inv.torsion.log)];
    if inv.defined_mod_h {
        summary.push("not Torelli: log is defined modulo homology classes".into());
    }
    Ok(Report { json: flatten(&inv.torsion, rest), summary, ok: true })
}

fn run_surgery(a: &SurgeryArgs) -> Result<Report, Failure> {
    let c = OneLoopClasper::from_json(&read_json(&a.input)?)?;
    let genus = check_genus(a.genus)?.unwrap_or(c.min_rank() / 2);
    let cap = check_cap(a.cap.unwrap_or(c.degree() + 2))?;
    let factor = surgery_factor(&c, 2 * genus, cap)?;
    let mut out = json!({"clasper": c.to_json(), "genus": genus, "cap": cap, "factor": factor.to_json()});
    let mut summary = vec![format!("surgery factor at cap {cap}: {}", factor.log)];
    let mut ok = true;
    if a.oracle {
        let base = trivial(genus);
        let after = torsion(&one_loop_presentation(&c, &base)?, cap)?;
        let before = torsion(&base, cap)?;
        let diff = after.torsion.log.sub(&before.torsion.log);
        ok = diff == factor.log;
        out["oracle"] = json!({"torsion_difference": diff.to_json(), "equal": ok});
        summary.push(format!("{} compiled presentation agrees with the closed factor", if ok { "PASS" } else { "FAIL" }));
    }
    Ok(Report { json: out, summary, ok })
}

fn run_johnson(a: &JohnsonArgs) -> Result<Report, Failure> {
    let v = read_json(&a.input)?;
    let cap = match a.cap {
        Some(c) => Some(check_cap(c)?),
        None => None,
    };
    let sigma = ExpansionAuto::from_json(&v, cap)?;
    let ia = sigma.ia_degree();
    let mut out = json!({"genus": sigma.rank() / 2, "cap": sigma.cap(), "ia_degree": ia.to_string()});
    let mut summary = vec![format!("IA degree {ia} at cap {}", sigma.cap())];
    if let DegreeBound::Finite(d) = ia {
        if d >= 1 && d + 1 <= sigma.cap() {
            let tau = sigma.tau(d)?;
            let tr = es_trace(&tau)?;
            summary.push(format!("Tr_{d} τ_{d} = {tr}"));
            out["tau"] = tau.to_json();
            out["trace"] = tr.to_json();
        }
    }
    Ok(Report { json: out, summary, ok: true })
}

fn max_letter_and_degree(log: &Value) -> (usize, usize) {
    let mut shape = (0, 0);
    for t in log.as_array().into_iter().flatten() {
        if let Some(w) = t.get("word").and_then(Value::as_array) {
            let top = w.iter().filter_map(Value::as_u64).max().unwrap_or(0) as usize;
            shape = (shape.0.max(top), shape.1.max(w.len()));
        }
    }
    shape
}

fn load_invariant(path: &Path, cap: Option<usize>) -> Result<(Value, Option<LabeledPresentation>), Failure> {
    let v = read_json(path)?;
    if v.get("relators").is_some() {
        let (p, file_cap) = LabeledPresentation::from_json(&v)?;
        let cap = check_cap(cap.or(file_cap).unwrap_or(DEFAULT_CAP))?;
        let t = torsion_mod_h(&p, cap)?;
        return Ok((t.torsion.to_json(), Some(p)));
    }
    if v.get("det_eps").is_none() {
        return Err(Failure::Input(format!("{}: neither a presentation nor a K1 value", path.display())));
    }
    Ok((v, None))
}

fn run_compare(a: &CompareArgs) -> Result<Report, Failure> {
    if a.input.len() != 2 {
        return Err(Failure::Input(format!("compare takes exactly two --in files, got {}", a.input.len())));
    }
    let genus = check_genus(a.genus)?;
    let (va, pa) = load_invariant(&a.input[0], a.cap)?;
    let (vb, pb) = load_invariant(&a.input[1], a.cap)?;
    let (ra, da) = max_letter_and_degree(&va["log"]);
    let (rb, db) = max_letter_and_degree(&vb["log"]);
    let from_pres = pa.iter().chain(&pb).map(LabeledPresentation::rank).max().unwrap_or(0);
    let rank = genus.map(|g| 2 * g).unwrap_or_else(|| (ra.max(rb).max(from_pres).max(2) + 1) / 2 * 2);
    let cap = a.cap.unwrap_or_else(|| if pa.is_some() || pb.is_some() { DEFAULT_CAP } else { da.max(db).max(1) });
    let x = K1Value::from_json(&va, rank, cap)?;
    let y = K1Value::from_json(&vb, rank, cap)?;
    let diff: CyclicSeries = x.log.sub(&y.log);
    let ratio = &x.det_eps / &y.det_eps;
    let equal = diff.is_zero() && ratio == Q::from_integer(1.into());
    let out = json!({
        "equal": equal,
        "det_eps_ratio": format_q(&ratio),
        "log_difference": diff.to_json(),
        "first": x.to_json(),
        "second": y.to_json(),
    });
    let summary = vec![if equal { "invariants agree".to_string() } else { format!("invariants differ: {diff}") }];
    Ok(Report { json: out, summary, ok: equal })
}

fn run_verify(a: &VerifyArgs) -> Result<Report, Failure> {
    let opts = Opts {
        seed: a.seed,
        trials: a.trials,
        cap: match a.cap {
            Some(c) => Some(check_cap(c)?),
            None => None,
        },
        genus: check_genus(a.genus)?,
    };
    let names: Vec<&str> = if a.suite.is_empty() { SUITES.to_vec() } else { a.suite.iter().map(String::as_str).collect() };
    let mut checks = Vec::new();
    for s in names {
        checks.extend(verify::run_suite(s, &opts)?);
    }
    let ok = checks.iter().all(|c| c.passed());
    let summary: Vec<String> = checks.iter().map(|c| c.line()).collect();
    let json = json!({
        "seed": a.seed,
        "trials": a.trials,
        "cap": a.cap,
        "genus": a.genus,
        "checks": checks.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        "passed": ok,
    });
    Ok(Report { json, summary, ok })
}

fn emit(json: &Value, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(json).expect("serializable") + "\n";
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match &cli.command {
        Command::Torsion(a) => run_torsion(a),
        Command::Surgery(a) => run_surgery(a),
        Command::Johnson(a) => run_johnson(a),
        Command::Compare(a) => run_compare(a),
        Command::Verify(a) => run_verify(a),
    };
    let outcome = result.and_then(|r| emit(&r.json, cli.out.as_deref()).map(|()| r));
    match outcome {
        Ok(r) => {
            for line in &r.summary {
                eprintln!("{line}");
            }
            if r.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, Error::Parse(_)) { 2 } else { 3 })
        }
    }
}
