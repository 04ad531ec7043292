use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Value};

use thetalift::classnum::{cohen_coeff, hurwitz_csv, HurwitzMethod};
use thetalift::discform::{weil_matrices, DiscriminantForm, GramLattice};
use thetalift::lift::{grid_csv, lift_grid, local_maass_diagnose, LiftEvaluator, LiftOptions, LiftSpec};
use thetalift::numth::{parse_rat, rat_to_string};
use thetalift::relations::{check_kronecker_hurwitz, check_mertens_completion, check_mertens_relations, serre_pairing};
use thetalift::thetaser::{theta_posdef, Hpoint, SphericalPoly};
use thetalift::{Coeff, QSeries};

const EXIT_ERROR: u8 = 1;
const EXIT_CHECK_FAILED: u8 = 3;

#[derive(Parser)]
#[command(name = "thetalift", version, about = "Theta lifts, class numbers and their relations")]
struct Cli {
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Hurwitz class numbers H(n) as CSV.
    Hurwitz {
        #[arg(long)]
        max: i64,
        #[arg(long, value_enum, default_value = "forms")]
        method: Method,
    },
    /// Cohen numbers H(ℓ, n) as CSV.
    Cohen {
        #[arg(long)]
        ell: u32,
        #[arg(long)]
        max: i64,
    },
    /// Verify a class number relation; prints a JSON report.
    Relation {
        #[command(subcommand)]
        which: Relation,
    },
    /// Serre duality pairing of two q-series given as JSON files.
    SerrePair {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        f: PathBuf,
        /// Fail unless the pairing vanishes.
        #[arg(long)]
        check: bool,
    },
    /// Weil representation of a lattice given as JSON `{"gram": [[..]], "dual": bool}`.
    Weil {
        #[arg(long)]
        gram: PathBuf,
        /// Verify unitarity, the braid relation and the central element.
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Theta series of a positive definite lattice.
    Theta {
        #[arg(long)]
        gram: PathBuf,
        /// Precision as a rational exponent bound.
        #[arg(long, env = "THETALIFT_PREC")]
        prec: String,
        /// Harmonic polynomial as JSON `{"terms": [{"exp": [..], "coeff": "p/q"}]}`.
        #[arg(long)]
        poly: Option<PathBuf>,
    },
    /// Higher Siegel theta lift in signature (1,2).
    Lift {
        #[command(subcommand)]
        which: Lift,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Forms,
    Lfunction,
}

#[derive(Subcommand)]
enum Relation {
    Mertens {
        #[arg(long)]
        max: i64,
    },
    Kronecker {
        #[arg(long)]
        max: i64,
    },
    Completion {
        #[arg(long)]
        nu: u32,
        #[arg(long)]
        prec: i64,
    },
}

#[derive(Args, Clone)]
struct LiftArgs {
    #[arg(long)]
    ell: u32,
    #[arg(long, default_value_t = 0)]
    dplus: u32,
    #[arg(long, default_value_t = 0)]
    dminus: u32,
    /// Input form, `duke-jenkins:N`.
    #[arg(long)]
    input: String,
    #[arg(long, env = "THETALIFT_TOL", default_value_t = 1e-7)]
    tol: f64,
    /// Hyperbolic guard distance around the geodesics.
    #[arg(long, default_value_t = 1e-3)]
    guard: f64,
    #[arg(long, default_value_t = 1 << 14)]
    max_box: i64,
}

#[derive(Subcommand)]
enum Lift {
    Eval {
        #[command(flatten)]
        spec: LiftArgs,
        /// Point `X,Y` with `Y > 0`.
        #[arg(long, allow_hyphen_values = true)]
        at: String,
    },
    Grid {
        #[command(flatten)]
        spec: LiftArgs,
        #[arg(long, allow_hyphen_values = true)]
        xmin: f64,
        #[arg(long, allow_hyphen_values = true)]
        xmax: f64,
        #[arg(long)]
        ymin: f64,
        #[arg(long)]
        ymax: f64,
        #[arg(long)]
        step: f64,
    },
    Diagnose {
        #[command(flatten)]
        spec: LiftArgs,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        /// Finite difference step.
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        /// Bound on the T and S invariance residuals.
        #[arg(long, default_value_t = 1e-6)]
        invariance_tol: f64,
    },
}

/// Artifact plus whether every requested check passed.
struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text, passed: true }
    }
}

type Res<T> = std::result::Result<T, String>;

fn read_json(p: &Path) -> Res<Value> {
    let s = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
    serde_json::from_str(&s).map_err(|e| format!("{}: {e}", p.display()))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap();
    s.push('\n');
    s
}

fn parse_point(s: &str) -> Res<Hpoint> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("expected X,Y, got {s:?}"))?;
    let x: f64 = x.trim().parse().map_err(|e| format!("{x:?}: {e}"))?;
    let y: f64 = y.trim().parse().map_err(|e| format!("{y:?}: {e}"))?;
    Hpoint::new(x, y).map_err(|e| e.to_string())
}

fn evaluator(a: &LiftArgs) -> Res<LiftEvaluator> {
    let n = a
        .input
        .strip_prefix("duke-jenkins:")
        .ok_or_else(|| format!("unsupported input {:?}; expected duke-jenkins:N", a.input))?;
    let n: i64 = n.parse().map_err(|e| format!("{n:?}: {e}"))?;
    if a.tol.is_nan() || a.tol <= 0.0 || a.guard.is_nan() || a.guard < 0.0 {
        return Err("tolerance must be positive and guard nonnegative".into());
    }
    if a.max_box < LiftOptions::default().max_box {
        return Err(format!("--max-box must be at least {}", LiftOptions::default().max_box));
    }
    let spec = LiftSpec::from_duke_jenkins(a.ell, a.dplus, a.dminus, n).map_err(|e| e.to_string())?;
    Ok(LiftEvaluator::new(spec, LiftOptions { tol: a.tol, guard: a.guard, max_box: a.max_box }))
}

fn coeff_json(c: &Coeff) -> Value {
    match c {
        Coeff::Rat(r) => json!({"rat": rat_to_string(r)}),
        Coeff::Num(z) => json!({"re": z.re, "im": z.im}),
    }
}

fn cjson(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn run(cli: &Cli) -> Res<Outcome> {
    let lib = |e: thetalift::Error| e.to_string();
    match &cli.cmd {
        Command::Hurwitz { max, method } => {
            let m = match method {
                Method::Forms => HurwitzMethod::Forms,
                Method::Lfunction => HurwitzMethod::LFunction,
            };
            Ok(Outcome::ok(hurwitz_csv(*max, m).map_err(lib)?))
        }
        Command::Cohen { ell, max } => {
            let mut s = String::from("n,H\n");
            for n in 0..=*max {
                s.push_str(&format!("{n},{}\n", rat_to_string(&cohen_coeff(*ell, n).map_err(lib)?)));
            }
            Ok(Outcome::ok(s))
        }
        Command::Relation { which } => {
            let rep = match which {
                Relation::Mertens { max } => check_mertens_relations(*max),
                Relation::Kronecker { max } => check_kronecker_hurwitz(*max),
                Relation::Completion { nu, prec } => check_mertens_completion(*nu, *prec),
            }
            .map_err(lib)?;
            Ok(Outcome { text: rep.to_json() + "\n", passed: rep.passed() })
        }
        Command::SerrePair { g, f, check } => {
            let g = QSeries::from_json(&read_json(g)?).map_err(lib)?;
            let f = QSeries::from_json(&read_json(f)?).map_err(lib)?;
            let p = serre_pairing(&g, &f).map_err(lib)?;
            let passed = !*check || p.is_zero();
            Ok(Outcome { text: pretty(&json!({"pairing": coeff_json(&p), "zero": p.is_zero()})), passed })
        }
        Command::Weil { gram, check, tol } => {
            let (l, dual) = GramLattice::from_json(&read_json(gram)?).map_err(lib)?;
            let df = DiscriminantForm::new(&l).map_err(lib)?;
            let w = weil_matrices(&df, dual);
            let cosets: Vec<Value> = (0..df.size())
                .map(|i| {
                    json!({
                        "rep": df.rep(i).iter().map(rat_to_string).collect::<Vec<_>>(),
                        "norm": rat_to_string(df.norm(i)),
                    })
                })
                .collect();
            let mut out = json!({
                "signature": w.signature,
                "dual": dual,
                "orders": df.orders(),
                "cosets": cosets,
                "rho_t": w.rho_t.iter().map(|z| cjson(*z)).collect::<Vec<_>>(),
                "rho_s": w.rho_s.iter().map(|r| r.iter().map(|z| cjson(*z)).collect::<Vec<_>>()).collect::<Vec<_>>(),
            });
            let mut passed = true;
            if *check {
                let c = w.check();
                passed = c.max() <= *tol;
                out["check"] = json!({
                    "unitary_s": c.unitary_s,
                    "unitary_t": c.unitary_t,
                    "braid": c.braid,
                    "center": c.center,
                    "tolerance": tol,
                    "passed": passed,
                });
            }
            Ok(Outcome { text: pretty(&out), passed })
        }
        Command::Theta { gram, prec, poly } => {
            let (l, _) = GramLattice::from_json(&read_json(gram)?).map_err(lib)?;
            let p = match poly {
                Some(p) => SphericalPoly::from_json(&l, &read_json(p)?).map_err(lib)?,
                None => SphericalPoly::constant(l.rank()),
            };
            let prec = parse_rat(prec).map_err(lib)?;
            let th = theta_posdef(&l, &p, &prec).map_err(lib)?;
            Ok(Outcome::ok(pretty(&th.to_json())))
        }
        Command::Lift { which } => match which {
            Lift::Eval { spec, at } => {
                let ev = evaluator(spec)?;
                let v = ev.eval(parse_point(at)?).map_err(lib)?;
                Ok(Outcome::ok(pretty(&serde_json::to_value(&v).unwrap())))
            }
            Lift::Grid { spec, xmin, xmax, ymin, ymax, step } => {
                let ev = evaluator(spec)?;
                let rows = lift_grid(&ev, (*xmin, *xmax), (*ymin, *ymax), *step).map_err(lib)?;
                Ok(Outcome::ok(grid_csv(&rows)))
            }
            Lift::Diagnose { spec, at, h, invariance_tol } => {
                let ev = evaluator(spec)?;
                let r = local_maass_diagnose(&ev, parse_point(at)?, *h).map_err(lib)?;
                let passed = r.invariance_residuals.iter().all(|x| *x <= *invariance_tol);
                Ok(Outcome { text: r.to_json() + "\n", passed })
            }
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(o) => {
            let written = match &cli.out {
                Some(p) => fs::write(p, &o.text).map_err(|e| format!("{}: {e}", p.display())),
                None => {
                    print!("{}", o.text);
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(EXIT_ERROR);
            }
            if o.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(EXIT_CHECK_FAILED)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
