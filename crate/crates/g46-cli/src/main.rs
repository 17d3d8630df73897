//! `g46`: expansion dumps, valuation scans, polynomial construction, and
//! irreducibility certificates on the command line.
//!
//! Exit codes: 0 success/verified, 1 check failed or certificate
//! inconclusive, 2 usage/format/domain errors. Expansions computed along the
//! way persist in a `G46CACHE v1` file (`--cache`, or the `G46_CACHE`
//! environment variable) written atomically at run end and flushed every 50
//! weights during long scans.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use g46::arith::v2_rat;
use g46::checks::{self, CheckSet, WitnessStatus};
use g46::expansion::{a_of, expand, Cache, Method, Route};
use g46::faber::{ek_polynomial, faber_combo, faber_square_combo, FaberPolynomial};
use g46::formats;
use g46::newton::{dumas, DumasCertificate, Verdict};
use g46::par::with_pool;
use g46::report::Envelope;
use g46::{Error, Rat, Result, V2};

#[derive(Parser)]
#[command(name = "g46", version, about = "Exact G4/G6 expansions, 2-adic valuation checks, and Newton-polygon irreducibility certificates")]
struct Cli {
    /// Expansion cache file, created on demand.
    #[arg(long, global = true, env = "G46_CACHE", default_value = "g46cache.txt")]
    cache: PathBuf,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads; 1 runs fully sequential.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..), default_value_t = default_jobs())]
    jobs: u64,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, ValueEnum)]
enum Form {
    /// Polynomial F with F(j) * Delta^D * E_{k'} = E_k.
    Ek,
    /// Halved sum of the weight-2k polynomial and the squared weight-k one.
    Sq2k,
    /// Dyadic combination of prime-power weights from a spec file.
    Combo,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print the G4/G6 expansion of one weight.
    Expand(ExpandArgs),
    /// Run valuation checks over every even weight up to a bound.
    Scan(ScanArgs),
    /// Report per-weight minimum-valuation witnesses.
    Witness(WitnessArgs),
    /// Build a polynomial in j and emit it in FABERPOLY form.
    Faber(FaberArgs),
    /// Certify irreducibility from the dyadic Newton polygon.
    Irreducible(IrreducibleArgs),
}

#[derive(Args)]
struct ExpandArgs {
    /// Even weight >= 4.
    #[arg(long)]
    weight: u64,
    /// Route: auto, classical, romik, mr0, or mr4.
    #[arg(long, default_value = "auto")]
    method: String,
}

#[derive(Args)]
struct ScanArgs {
    /// Largest weight to check.
    #[arg(long)]
    max: u64,
    /// Comma-separated subset of: theorem1, witness, powers2.
    #[arg(long, default_value = "theorem1,witness,powers2")]
    check: String,
}

#[derive(Args)]
#[command(group = ArgGroup::new("target").required(true).args(["weight", "max"]))]
struct WitnessArgs {
    /// Report a single weight.
    #[arg(long)]
    weight: Option<u64>,
    /// Report every even weight 6..=max.
    #[arg(long)]
    max: Option<u64>,
}

#[derive(Args)]
struct FaberArgs {
    /// Construction to run.
    #[arg(long, value_enum)]
    form: Form,
    /// Weight for ek (even >= 4) and sq2k (multiple of 12).
    #[arg(long)]
    weight: Option<u64>,
    /// Key=value spec file (D, l, a, m) for the combo form.
    #[arg(long)]
    combo_file: Option<PathBuf>,
    /// Write the polynomial file here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Build even when the combination hypotheses fail.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct IrreducibleArgs {
    /// Certify an existing FABERPOLY file.
    #[arg(long, conflicts_with_all = ["form", "weight", "combo_file", "force"])]
    file: Option<PathBuf>,
    /// Construct first (same selectors as `faber`).
    #[arg(long, value_enum)]
    form: Option<Form>,
    #[arg(long)]
    weight: Option<u64>,
    #[arg(long)]
    combo_file: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

fn default_jobs() -> u64 {
    std::thread::available_parallelism().map_or(1, |n| n.get() as u64)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs as usize;
    // A bounded pool when jobs > 1; library calls then use jobs=0 (current
    // pool) so `--jobs 1` is the only fully sequential path.
    match with_pool(jobs, || run(&cli, if jobs == 1 { 1 } else { 0 })) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Hypothesis(_) | Error::NotAForm { .. } => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(cli: &Cli, jobs: usize) -> Result<u8> {
    match &cli.command {
        Cmd::Expand(a) => cmd_expand(cli, a, jobs),
        Cmd::Scan(a) => cmd_scan(cli, a, jobs),
        Cmd::Witness(a) => cmd_witness(cli, a, jobs),
        Cmd::Faber(a) => cmd_faber(cli, a, jobs),
        Cmd::Irreducible(a) => cmd_irreducible(cli, a, jobs),
    }
}

fn load_cache(path: &Path) -> Result<Cache> {
    let cache = Cache::new();
    formats::load_cache_file(&cache, path)?;
    Ok(cache)
}

fn rat_str(w: &Rat) -> String {
    format!("{}/{}", w.numer(), w.denom())
}

fn route_name(r: Route) -> &'static str {
    match r {
        Route::Base => "base",
        Route::Classical => "classical",
        Route::Romik => "romik",
        Route::Mr0 => "mr0",
        Route::Mr4 => "mr4",
        Route::Product => "product",
        Route::Loaded => "loaded",
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report value serializes")
}

fn cmd_expand(cli: &Cli, a: &ExpandArgs, jobs: usize) -> Result<u8> {
    let started = Instant::now();
    let method = Method::parse(&a.method)?;
    let cache = load_cache(&cli.cache)?;
    let e = expand(&cache, a.weight, method, jobs)?;
    formats::write_cache_file(&cache, &cli.cache)?;
    let k = e.k();
    match cli.format {
        Format::Text => {
            println!("G_{k}: {} slot(s), route {}", e.len(), route_name(e.route()));
            for (b, w) in e.terms() {
                println!("  a={} b={b} w={} v2={}", a_of(k, b), rat_str(w), v2_rat(w));
            }
        }
        Format::Csv => {
            println!("a,b,w,v2");
            for (b, w) in e.terms() {
                println!("{},{b},{},{}", a_of(k, b), rat_str(w), v2_rat(w));
            }
        }
        Format::Json => {
            let mut env = Envelope::new(
                "expand",
                json!({"weight": k, "method": a.method, "route": route_name(e.route())}),
            );
            for (b, w) in e.terms() {
                env.push_result(json!({
                    "a": a_of(k, b),
                    "b": b,
                    "w": rat_str(w),
                    "v2": to_value(&v2_rat(w)),
                }));
            }
            env.timing_ms = started.elapsed().as_millis();
            println!("{}", env.render());
        }
    }
    Ok(0)
}

fn cmd_scan(cli: &Cli, a: &ScanArgs, jobs: usize) -> Result<u8> {
    let started = Instant::now();
    let checks_on = CheckSet::parse(&a.check)?;
    let cache = load_cache(&cli.cache)?;
    // Flush the cache every 50 new weights so an interrupted run resumes
    // from where it got to.
    let computed = AtomicU64::new(0);
    let cache_ref = &cache;
    let progress = |k: u64| {
        let n = computed.fetch_add(1, Ordering::Relaxed) + 1;
        if n % 50 == 0 {
            eprintln!("scan: computed through weight {k} ({n} new)");
            if let Err(e) = formats::write_cache_file(cache_ref, &cli.cache) {
                eprintln!("warning: cache flush failed: {e}");
            }
        }
    };
    let summary = checks::scan_range(&cache, a.max, &checks_on, jobs, Some(&progress))?;
    formats::write_cache_file(&cache, &cli.cache)?;
    match cli.format {
        Format::Text => {
            for f in &summary.failures {
                println!("FAIL k={} check={} {}", f.k, f.check, f.detail);
            }
            println!(
                "scan: {} weights through k={}, checks [{}]: {}",
                summary.weights_checked,
                a.max,
                checks_on.names().join(","),
                if summary.ok() {
                    "all passed".to_string()
                } else {
                    format!("{} failure(s)", summary.failures.len())
                }
            );
        }
        Format::Csv => {
            println!("k,check,detail");
            for f in &summary.failures {
                println!("{},{},{:?}", f.k, f.check, f.detail);
            }
        }
        Format::Json => {
            let mut env =
                Envelope::new("scan", json!({"max": a.max, "checks": checks_on.names()}));
            env.push_result(json!({
                "weights_checked": summary.weights_checked,
                "ok": summary.ok(),
            }));
            for f in &summary.failures {
                env.push_failure(to_value(f));
            }
            env.timing_ms = started.elapsed().as_millis();
            println!("{}", env.render());
        }
    }
    Ok(if summary.ok() { 0 } else { 1 })
}

fn cmd_witness(cli: &Cli, a: &WitnessArgs, jobs: usize) -> Result<u8> {
    let started = Instant::now();
    let cache = load_cache(&cli.cache)?;
    let ks: Vec<u64> = match (a.weight, a.max) {
        (Some(k), _) => vec![k],
        (None, Some(max)) => (6..=max).step_by(2).collect(),
        (None, None) => unreachable!("clap group requires one"),
    };
    let mut reports = Vec::with_capacity(ks.len());
    for &k in &ks {
        let e = cache.expansion(k, jobs)?;
        reports.push(checks::weight_report(&e)?);
    }
    formats::write_cache_file(&cache, &cli.cache)?;
    let failed: Vec<u64> =
        reports.iter().filter(|r| r.witness == WitnessStatus::Fail).map(|r| r.k).collect();
    match cli.format {
        Format::Text => {
            for r in &reports {
                println!(
                    "k={} s={} lambda={} mu={} min_v2={} argmin={:?} witness={}",
                    r.k,
                    r.s,
                    r.lambda,
                    r.mu,
                    r.min_v2,
                    r.argmin,
                    to_value(&r.witness).as_str().unwrap_or("?"),
                );
            }
            if !failed.is_empty() {
                println!("witness failures at k={failed:?}");
            }
        }
        Format::Csv => {
            println!("k,s,lambda,mu,min_v2,argmin,witness");
            for r in &reports {
                let argmin: Vec<String> = r.argmin.iter().map(u64::to_string).collect();
                println!(
                    "{},{},{},{},{},{},{}",
                    r.k,
                    r.s,
                    r.lambda,
                    r.mu,
                    r.min_v2,
                    argmin.join(";"),
                    to_value(&r.witness).as_str().unwrap_or("?"),
                );
            }
        }
        Format::Json => {
            let mut env = Envelope::new("witness", json!({"weights": ks}));
            for r in &reports {
                env.push_result(to_value(r));
            }
            for &k in &failed {
                env.push_failure(json!({"k": k, "check": "witness"}));
            }
            env.timing_ms = started.elapsed().as_millis();
            println!("{}", env.render());
        }
    }
    Ok(if failed.is_empty() { 0 } else { 1 })
}

fn build_polynomial(
    form: Form,
    weight: Option<u64>,
    combo_file: Option<&Path>,
    force: bool,
    cache: &Cache,
    jobs: usize,
) -> Result<FaberPolynomial> {
    match form {
        Form::Ek => {
            let k = weight
                .ok_or_else(|| Error::Domain("--form ek requires --weight".into()))?;
            ek_polynomial(cache, k, jobs)
        }
        Form::Sq2k => {
            let k = weight
                .ok_or_else(|| Error::Domain("--form sq2k requires --weight".into()))?;
            faber_square_combo(cache, k, jobs)
        }
        Form::Combo => {
            let path = combo_file
                .ok_or_else(|| Error::Domain("--form combo requires --combo-file".into()))?;
            let spec = formats::read_combo_file(path)?;
            faber_combo(cache, &spec, force, jobs)
        }
    }
}

/// FABERPOLY text plus a `#`-commented Newton table (r, v2(c_r), the Dumas
/// bound h(d-r)/d) that `parse_poly` skips on read-back.
fn poly_with_table(p: &FaberPolynomial) -> String {
    let mut out = formats::render_poly(p);
    let d = p.degree();
    let profile = p.v2_profile();
    out.push_str("# r v2 bound\n");
    for (r, v) in profile.iter().enumerate() {
        let bound = match profile[0] {
            V2::Finite(h) => rat_str(&Rat::new(
                (h * (d as i64 - r as i64)).into(),
                (d as i64).into(),
            )),
            V2::Infinite => "-".to_string(),
        };
        out.push_str(&format!("# {r} {v} {bound}\n"));
    }
    out
}

fn cmd_faber(cli: &Cli, a: &FaberArgs, jobs: usize) -> Result<u8> {
    let started = Instant::now();
    let cache = load_cache(&cli.cache)?;
    let p = build_polynomial(a.form, a.weight, a.combo_file.as_deref(), a.force, &cache, jobs)?;
    formats::write_cache_file(&cache, &cli.cache)?;
    let body = poly_with_table(&p);
    if let Some(out) = &a.out {
        formats::atomic_write(out, &body)?;
        eprintln!("wrote {} (degree {})", out.display(), p.degree());
    }
    match cli.format {
        Format::Text => {
            if a.out.is_none() {
                print!("{body}");
            }
        }
        Format::Csv => {
            println!("r,c,v2");
            for (r, (c, v)) in p.coeffs().iter().zip(p.v2_profile()).enumerate() {
                println!("{r},{},{v}", rat_str(c));
            }
        }
        Format::Json => {
            let mut env = Envelope::new(
                "faber",
                json!({
                    "form": format!("{:?}", a.form).to_lowercase(),
                    "weight": a.weight,
                    "combo_file": a.combo_file.as_ref().map(|p| p.display().to_string()),
                    "out": a.out.as_ref().map(|p| p.display().to_string()),
                    "force": a.force,
                }),
            );
            for (r, (c, v)) in p.coeffs().iter().zip(p.v2_profile()).enumerate() {
                env.push_result(json!({"r": r, "c": rat_str(c), "v2": to_value(&v)}));
            }
            env.timing_ms = started.elapsed().as_millis();
            println!("{}", env.render());
        }
    }
    Ok(0)
}

fn cmd_irreducible(cli: &Cli, a: &IrreducibleArgs, jobs: usize) -> Result<u8> {
    let started = Instant::now();
    let p = match (&a.file, a.form) {
        (Some(path), _) => formats::read_poly_file(path)?,
        (None, Some(form)) => {
            let cache = load_cache(&cli.cache)?;
            let p =
                build_polynomial(form, a.weight, a.combo_file.as_deref(), a.force, &cache, jobs)?;
            formats::write_cache_file(&cache, &cli.cache)?;
            p
        }
        (None, None) => {
            return Err(Error::Domain("provide --file or --form".into()));
        }
    };
    let cert = dumas(&p)?;
    render_certificate(cli, &cert, started);
    Ok(match cert.verdict {
        Verdict::Irreducible => 0,
        Verdict::Inconclusive => 1,
    })
}

fn render_certificate(cli: &Cli, cert: &DumasCertificate, started: Instant) {
    let verdict = to_value(&cert.verdict);
    let verdict = verdict.as_str().unwrap_or("?");
    let vertices: Vec<String> =
        cert.vertices.iter().map(|(x, y)| format!("({x},{y})")).collect();
    match cli.format {
        Format::Text => {
            println!(
                "verdict={verdict} degree={} h={} vertices={}",
                cert.degree,
                cert.h,
                vertices.join(" "),
            );
            if let Some(reason) = &cert.reason {
                println!("reason: {reason}");
            }
        }
        Format::Csv => {
            println!("verdict,degree,h,vertices,reason");
            println!(
                "{verdict},{},{},{},{}",
                cert.degree,
                cert.h,
                vertices.join(";"),
                cert.reason.as_deref().unwrap_or(""),
            );
        }
        Format::Json => {
            let mut env = Envelope::new("irreducible", json!({"degree": cert.degree}));
            env.push_result(to_value(cert));
            env.timing_ms = started.elapsed().as_millis();
            println!("{}", env.render());
        }
    }
}
