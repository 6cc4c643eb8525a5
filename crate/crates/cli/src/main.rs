use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use piwitt::normfield::insep_degree_probe;
use piwitt::ramification::elementary_data;
use piwitt::structure::{structure_polys, PiSymbol, PolyKind};
use piwitt::suite::{random_window, run_criterion, run_suite, SuiteReport, SuiteSize};
use piwitt::tower::{build_tower, cyclotomic, kummer, lubin_tate, PhiIterate, PhiTower, TowerDoc};
use piwitt::{Error, RingElt};

#[derive(Parser)]
#[command(name = "piwitt", version, about = "Ramified Witt vectors, Frobenius windows and phi-iterate towers")]
struct Cli {
    /// p-adic digits carried by the base ring
    #[arg(long, global = true, env = "PIWITT_PRECISION", default_value_t = 12)]
    precision: u32,
    /// Seed for randomized work; recorded in every output
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the JSON document here instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit universal sum, product and Frobenius polynomials
    WittPolys {
        #[arg(long)]
        q: u64,
        /// The prime p; the uniformizer is p unless --pi-poly is given
        #[arg(long)]
        pi: u64,
        /// Eisenstein polynomial for the uniformizer, constant term first, e.g. "-2,0,1"
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        pi_poly: Option<Vec<i64>>,
        #[arg(long)]
        len: usize,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Build or verify a phi-iterate tower
    Tower {
        #[command(subcommand)]
        action: TowerAction,
    },
    /// Canonical uniformizer window with its reduction and shift probes
    LiftUniformizer {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, default_value_t = 2)]
        length: usize,
    },
    /// Transition functions, breaks and constants of a tower
    Herbrand {
        #[command(flatten)]
        tower: TowerArgs,
        /// Also write sampled psi values as CSV
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        samples: u32,
    },
    /// Compare both theta maps on the uniformizer window and random windows
    Theta {
        #[command(flatten)]
        tower: TowerArgs,
        #[arg(long, default_value_t = 2)]
        length: usize,
        #[arg(long, default_value_t = 8)]
        samples: usize,
    },
    /// Run the acceptance criteria
    Suite {
        #[arg(long)]
        quick: bool,
        /// Run a single criterion
        #[arg(long)]
        criterion: Option<u8>,
    },
}

#[derive(Subcommand)]
enum TowerAction {
    /// Build a tower and emit its document and minimal polynomials
    Build(TowerArgs),
    /// Verify Eisenstein conditions and norm compatibility
    Check(TowerArgs),
}

#[derive(Args, Clone)]
struct TowerArgs {
    #[arg(long, value_enum, conflicts_with = "input")]
    preset: Option<Preset>,
    #[arg(long, default_value_t = 2)]
    p: u64,
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// Tower document (JSON) to use instead of a preset
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Kummer,
    Cyclotomic,
    LubinTate,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Sum,
    Product,
    Frobenius,
}

enum Failure {
    Module(Error),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Module(e)
    }
}

type Outcome = Result<(Value, bool), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, outcome) = dispatch(&cli);
    let (doc, code) = match outcome {
        Ok((result, passed)) => (
            json!({ "command": name, "seed": cli.seed, "precision": cli.precision, "result": result }),
            if passed { 0 } else { 1 },
        ),
        Err(Failure::Module(e)) => (
            json!({ "command": name, "seed": cli.seed, "error": { "kind": e.kind(), "message": e.to_string() } }),
            if e.is_input_error() { 2 } else { 1 },
        ),
        Err(Failure::Input(msg)) => (json!({ "command": name, "seed": cli.seed, "error": { "kind": "Input", "message": msg } }), 2),
    };
    let text = serde_json::to_string_pretty(&doc).expect("documents serialize");
    match &cli.output {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => {
            // a closed pipe is not an error for a report writer
            let _ = writeln!(std::io::stdout().lock(), "{text}");
        }
    }
    ExitCode::from(code)
}

fn dispatch(cli: &Cli) -> (&'static str, Outcome) {
    match &cli.command {
        Command::WittPolys { q, pi, pi_poly, len, kind } => ("witt-polys", witt_polys(*q, *pi, pi_poly.as_deref(), *len, *kind)),
        Command::Tower { action: TowerAction::Build(t) } => ("tower build", tower_build(cli, t)),
        Command::Tower { action: TowerAction::Check(t) } => ("tower check", tower_check(cli, t)),
        Command::LiftUniformizer { tower, length } => ("lift-uniformizer", lift_uniformizer(cli, tower, *length)),
        Command::Herbrand { tower, csv, samples } => ("herbrand", herbrand(cli, tower, csv.as_ref(), *samples)),
        Command::Theta { tower, length, samples } => ("theta", theta(cli, tower, *length, *samples)),
        Command::Suite { quick, criterion } => ("suite", suite(cli.seed, *quick, *criterion)),
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("documents serialize")
}

fn elt(x: &RingElt) -> Value {
    json!({ "coeffs": x.signed_coeffs().iter().map(BigInt::to_string).collect::<Vec<_>>(), "precision": x.prec() })
}

fn witt_polys(q: u64, p: u64, pi_poly: Option<&[i64]>, len: usize, kind: Option<KindArg>) -> Outcome {
    let pi = match pi_poly {
        Some(g) => PiSymbol::eisenstein(p, &g.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>())?,
        None => PiSymbol::prime(p),
    };
    let kinds = match kind {
        Some(KindArg::Sum) => vec![PolyKind::Sum],
        Some(KindArg::Product) => vec![PolyKind::Product],
        Some(KindArg::Frobenius) => vec![PolyKind::Frobenius],
        None => vec![PolyKind::Sum, PolyKind::Product, PolyKind::Frobenius],
    };
    let mut out = Vec::new();
    for k in kinds {
        let Some(set) = structure_polys(q, &pi, k, len)? else {
            return Err(Failure::Input(format!("{} polynomials for q={q}, length {len} exceed the generation budget", k.name())));
        };
        let polys: Vec<Value> = set
            .polys
            .iter()
            .map(|u| json!({ "index": u.index, "text": u.render(), "document": to_value(&u.to_doc()) }))
            .collect();
        out.push(json!({ "kind": k.name(), "polys": polys }));
    }
    Ok((json!({ "q": q, "p": p, "len": len, "sets": out }), true))
}

fn iterate(cli: &Cli, t: &TowerArgs) -> Result<(PhiIterate, usize), Failure> {
    if let Some(path) = &t.input {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let doc: TowerDoc = serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        return Ok((PhiIterate::from_doc(&doc)?, doc.depth));
    }
    let it = match t.preset.unwrap_or(Preset::Kummer) {
        Preset::Kummer => kummer(t.p, cli.precision)?,
        Preset::Cyclotomic => cyclotomic(t.p, cli.precision)?,
        Preset::LubinTate => lubin_tate(t.p, cli.precision)?,
    };
    Ok((it, t.depth))
}

fn tower(cli: &Cli, t: &TowerArgs) -> Result<PhiTower, Failure> {
    let (it, depth) = iterate(cli, t)?;
    Ok(build_tower(&it, depth)?)
}

fn tower_build(cli: &Cli, t: &TowerArgs) -> Outcome {
    let (it, depth) = iterate(cli, t)?;
    let tw = build_tower(&it, depth)?;
    let pis: Vec<Value> = (0..=depth).map(|i| elt(tw.pi(i))).collect();
    Ok((
        json!({
            "tower": to_value(&it.to_doc(depth)),
            "eisenstein": true,
            "minimal_polynomials": to_value(&tw.minpoly_docs()),
            "uniformizers": pis,
        }),
        true,
    ))
}

fn tower_check(cli: &Cli, t: &TowerArgs) -> Outcome {
    let tw = tower(cli, t)?;
    let report = tw.norm_compat_check()?;
    let passed = report.all_pass;
    Ok((json!({ "eisenstein": true, "norm_compatibility": to_value(&report) }), passed))
}

fn lift_uniformizer(cli: &Cli, t: &TowerArgs, length: usize) -> Outcome {
    let tw = tower(cli, t)?;
    let w = tw.uniformizer_window(length)?;
    let beta = w.beta()?;
    let fields = elementary_data(&tw)?.elementary;
    let shift = tw.find_shift(&w, &fields)?;
    let qd = insep_degree_probe(&tw, &w)?;
    Ok((
        json!({
            "window": to_value(&w.to_doc()),
            "beta": to_value(&beta.to_doc()),
            "shift": shift,
            "insep_degree": qd,
        }),
        shift.is_some(),
    ))
}

fn herbrand(cli: &Cli, t: &TowerArgs, csv: Option<&PathBuf>, samples: u32) -> Outcome {
    let tw = tower(cli, t)?;
    let data = elementary_data(&tw)?;
    if let Some(path) = csv {
        let text = data.psi.to_csv(&data.stable_below.0, samples, "psi");
        std::fs::write(path, text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    }
    let holds = data.d_checks.iter().all(|c| c.holds || !c.stable);
    Ok((to_value(&data), holds))
}

fn theta(cli: &Cli, t: &TowerArgs, length: usize, samples: usize) -> Outcome {
    let tw = tower(cli, t)?;
    let mut windows = vec![("uniformizer".to_string(), tw.uniformizer_window(length)?)];
    let wr = tw.witt_ring()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cli.seed);
    for k in 0..samples {
        windows.push((format!("random {k}"), random_window(&wr, length, length, &mut rng)?));
    }
    let mut rows = Vec::new();
    let mut all = true;
    for (name, w) in windows {
        let a = w.theta();
        let b = w.theta_classical()?;
        let n = a.prec().min(b.prec());
        let equal = a.eq_at(&b, n);
        all &= equal;
        rows.push(json!({ "window": name, "theta": elt(&a), "theta_classical": elt(&b), "compared_to": n, "equal": equal }));
    }
    Ok((json!({ "cases": rows, "all_equal": all }), all))
}

fn suite(seed: u64, quick: bool, criterion: Option<u8>) -> Outcome {
    let size = if quick { SuiteSize::quick() } else { SuiteSize::full() };
    match criterion {
        Some(id) if (1..=10).contains(&id) => {
            let r = run_criterion(id, seed, &size);
            let passed = r.passed;
            Ok((to_value(&r), passed))
        }
        Some(id) => Err(Failure::Input(format!("criterion {id} is not in 1..=10"))),
        None => {
            let r: SuiteReport = run_suite(seed, &size);
            let passed = r.all_pass;
            Ok((to_value(&r), passed))
        }
    }
}
