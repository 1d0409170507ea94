use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use focklab::carleson::{build_lattice, carleson_verdict, embedding_norm_bounds, DensityMeasure, MeasureJson, LADDER};
use focklab::classify::{classify_numeric, classify_symbolic, SpacePair, Tri, Verdict};
use focklab::error::FockError;
use focklab::fock::fock_norm;
use focklab::operators::{apply, OperatorSpec};
use focklab::quadrature::QuadSpec;
use focklab::suite::verify_suite;
use focklab::symbols::{c, Complex, Exponent, ExpPoly, FockParams, Poly};
use focklab::transforms::{
    berezin, criterion_sup, linear_radii, pointwise_profile, pointwise_shape, total_mass, CriterionKind,
    CriterionProfile, ProfilePoint, VerdictInputs, Weight,
};

#[derive(Parser)]
#[command(name = "focklab", version, about = "Operator-theoretic computations on weighted Fock spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write the radial profile as CSV (radius,value).
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    #[arg(long, global = true)]
    abs_tol: Option<f64>,
    #[arg(long, global = true)]
    max_radius: Option<f64>,
    #[arg(long, global = true)]
    base_rings: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fock norm of a symbol.
    Norm {
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: String,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate T f and (T f)′ at a point.
    Apply {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        symbol: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        at: String,
        #[command(flatten)]
        common: Common,
    },
    /// Criterion functions: pointwise profiles, Berezin-type transforms, integrals.
    Transform {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// g, or the multiplier u for `uinf`/`up`.
        #[arg(long)]
        g: PathBuf,
        /// Defaults to the identity.
        #[arg(long)]
        psi: Option<PathBuf>,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["sup", "total"])]
        w: Option<String>,
        #[arg(long, conflicts_with = "total")]
        sup: bool,
        #[arg(long)]
        total: bool,
        /// Profile radii 0, step, …, n·step.
        #[arg(long, default_value_t = 20)]
        radii: usize,
        #[arg(long, default_value_t = 1.0)]
        step: f64,
        #[command(flatten)]
        common: Common,
    },
    /// (∞,p) Fock–Carleson verdict for a density measure.
    Carleson {
        #[arg(long)]
        measure: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        /// Also bound the embedding norm (decaying densities only).
        #[arg(long)]
        bounds: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Boundedness and compactness of an operator between two Fock spaces.
    Classify {
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        source: String,
        #[arg(long)]
        target: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, conflicts_with = "symbolic_only")]
        numeric_only: bool,
        #[arg(long)]
        symbolic_only: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run the verification suite.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// A single check or group.
        #[arg(long)]
        only: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Binf,
    Minf,
    Uinf,
    Bp,
    Mp,
    Up,
}

/// Failure carrying its exit code.
struct Fail {
    code: u8,
    message: String,
}

impl From<FockError> for Fail {
    fn from(e: FockError) -> Self {
        let code = match e {
            FockError::Accuracy { .. } | FockError::Indeterminate(_) => 3,
            _ => 2,
        };
        Fail { code, message: e.to_string() }
    }
}

fn config(message: impl Into<String>) -> Fail {
    Fail { code: 2, message: message.into() }
}

struct Output {
    report: Value,
    profile: Vec<ProfilePoint>,
    code: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cmd: Command) -> Result<u8, Fail> {
    let common = match &cmd {
        Command::Norm { common, .. }
        | Command::Apply { common, .. }
        | Command::Transform { common, .. }
        | Command::Carleson { common, .. }
        | Command::Classify { common, .. }
        | Command::Verify { common, .. } => common.clone(),
    };
    let spec = quad_spec(&common)?;
    let out = match cmd {
        Command::Norm { symbol, alpha, p, .. } => norm(&symbol, alpha, &p, &spec)?,
        Command::Apply { op, symbol, at, .. } => apply_cmd(&op, &symbol, &at)?,
        Command::Transform { kind, g, psi, alpha, p, w, sup, total, radii, step, .. } => {
            transform(kind, &g, psi.as_deref(), alpha, p, w.as_deref(), sup, total, radii, step, &spec)?
        }
        Command::Carleson { measure, p, alpha, t, r, bounds, .. } => carleson(&measure, p, alpha, t, r, bounds, &spec)?,
        Command::Classify { op, source, target, alpha, numeric_only, symbolic_only, .. } => {
            classify(&op, &source, &target, alpha, numeric_only, symbolic_only, &spec)?
        }
        Command::Verify { suite, seed, only, .. } => verify(&suite, seed, only.as_deref(), &spec)?,
    };
    let mut report = out.report;
    report["version"] = json!(env!("CARGO_PKG_VERSION"));
    report["quadrature"] = to_value(&spec)?;
    let text = serde_json::to_string_pretty(&report).map_err(|e| config(e.to_string()))? + "\n";
    match &common.out {
        Some(path) => fs::write(path, text).map_err(|e| config(format!("{}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    if let Some(path) = &common.csv {
        let mut csv = String::from("radius,value\n");
        for pt in &out.profile {
            csv.push_str(&format!("{},{}\n", pt.radius, pt.value));
        }
        fs::write(path, csv).map_err(|e| config(format!("{}: {e}", path.display())))?;
    }
    Ok(out.code)
}

fn quad_spec(common: &Common) -> Result<QuadSpec, Fail> {
    let mut spec = QuadSpec::default();
    if let Ok(v) = std::env::var("FOCKLAB_MAX_RADIUS") {
        spec.max_radius = v.trim().parse().map_err(|_| config(format!("FOCKLAB_MAX_RADIUS: not a number: {v}")))?;
    }
    if let Some(v) = common.rel_tol {
        spec.rel_tol = v;
    }
    if let Some(v) = common.abs_tol {
        spec.abs_tol = v;
    }
    if let Some(v) = common.max_radius {
        spec.max_radius = v;
    }
    if let Some(v) = common.base_rings {
        spec.base_rings = v;
    }
    spec.validate()?;
    Ok(spec)
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, Fail> {
    serde_json::to_value(v).map_err(|e| config(e.to_string()))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| config(format!("{}: {e}", path.display())))
}

fn parse_exponent(s: &str) -> Result<Exponent, Fail> {
    match s.trim() {
        "inf" | "infinity" | "∞" => Ok(Exponent::Infinite),
        t => t.parse::<f64>().map(Exponent::Finite).map_err(|_| config(format!("exponent must be a number or inf, got {s:?}"))),
    }
}

fn parse_point(s: &str) -> Result<Complex, Fail> {
    let parts: Vec<&str> = s.split(',').collect();
    let [re, im] = parts[..] else {
        return Err(config(format!("point must be re,im, got {s:?}")));
    };
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| config(format!("point must be re,im, got {s:?}")));
    Ok(c(num(re)?, num(im)?))
}

fn exponent_value(p: Exponent) -> Value {
    match p {
        Exponent::Finite(p) => json!(p),
        Exponent::Infinite => json!("inf"),
    }
}

fn not_in_space(e: &FockError) -> bool {
    matches!(e, FockError::NotInSpace | FockError::Unbounded { .. } | FockError::Divergent { .. })
}

fn norm(symbol: &Path, alpha: f64, p: &str, spec: &QuadSpec) -> Result<Output, Fail> {
    let f: ExpPoly = read_json(symbol)?;
    let params = FockParams::new(alpha, parse_exponent(p)?)?;
    let inputs = json!({ "symbol": to_value(&f)?, "alpha": alpha, "p": exponent_value(params.p) });
    let result = match fock_norm(&f, params, spec) {
        Ok(r) => json!({ "value": r.value, "error_bound": r.error_bound, "in_space": true }),
        Err(e) if not_in_space(&e) => json!({ "value": null, "in_space": false, "detail": e.to_string() }),
        Err(e) => return Err(e.into()),
    };
    let anchor = "(alpha p / 2pi) int |f|^p e^{-p alpha |z|^2 / 2} dm, or sup |f| e^{-alpha |z|^2 / 2}";
    Ok(Output { report: json!({ "command": "norm", "inputs": inputs, "result": result, "anchor": anchor }), profile: vec![], code: 0 })
}

fn apply_cmd(op: &Path, symbol: &Path, at: &str) -> Result<Output, Fail> {
    let op: OperatorSpec = read_json(op)?;
    let f: ExpPoly = read_json(symbol)?;
    let z = parse_point(at)?;
    let tf = apply(&op, &f)?;
    let value = tf.eval(z)?;
    let derivative = tf.eval_derivative(z);
    let result = json!({
        "value": [value.re, value.im],
        "derivative": [derivative.re, derivative.im],
        "closed_form": tf.exact().map(to_value).transpose()?,
    });
    let inputs = json!({ "op": to_value(&op)?, "symbol": to_value(&f)?, "at": [z.re, z.im] });
    Ok(Output {
        report: json!({ "command": "apply", "inputs": inputs, "result": result, "anchor": format!("operator {}", op.kind) }),
        profile: vec![],
        code: 0,
    })
}

#[allow(clippy::too_many_arguments)]
fn transform(
    kind: KindArg,
    g: &Path,
    psi: Option<&Path>,
    alpha: f64,
    p: Option<f64>,
    w: Option<&str>,
    sup: bool,
    total: bool,
    radii: usize,
    step: f64,
    spec: &QuadSpec,
) -> Result<Output, Fail> {
    let sym: ExpPoly = read_json(g)?;
    let psi: Poly = match psi {
        Some(path) => read_json(path)?,
        None => Poly::identity(),
    };
    let (weight, ckind, pointwise) = match kind {
        KindArg::Binf => (Weight::B(sym.clone()), CriterionKind::Binf, true),
        KindArg::Minf => (Weight::M(sym.clone()), CriterionKind::Minf, true),
        KindArg::Uinf => (Weight::U(sym.clone()), CriterionKind::Uinf, true),
        KindArg::Bp => (Weight::B(sym.clone()), CriterionKind::Bp, false),
        KindArg::Mp => (Weight::M(sym.clone()), CriterionKind::Mp, false),
        KindArg::Up => (Weight::U(sym.clone()), CriterionKind::Up, false),
    };
    if !(step > 0.0 && step.is_finite()) {
        return Err(config("--step must be > 0"));
    }
    let rs = linear_radii(radii, step);
    let w = w.map(parse_point).transpose()?;
    let (profile, verdict_inputs, p_out) = if pointwise {
        let profile = pointwise_profile(&weight, &psi, alpha, &rs);
        let inputs = if let Some(w) = w {
            let l = pointwise_shape(&weight, &psi, alpha).eval(w);
            VerdictInputs::Value { w, value: l.exp(), error_bound: 0.0 }
        } else if total {
            return Err(config("--total needs an integral kind (bp, mp, up)"));
        } else {
            let _ = sup;
            match criterion_sup(&weight, &psi, alpha, spec) {
                Ok(s) => VerdictInputs::Sup { sup: s.sup, log_sup: s.log_sup, argmax: s.argmax, attained_inside: s.attained_inside },
                Err(FockError::Unbounded { log_value, radius }) => VerdictInputs::Unbounded { log_value, radius },
                Err(e) => return Err(e.into()),
            }
        };
        (profile, inputs, None)
    } else {
        let p = p.ok_or_else(|| config("integral kinds need --p"))?;
        let params = FockParams::finite(alpha, p)?;
        if sup {
            return Err(config("--sup needs a pointwise kind (binf, minf, uinf)"));
        }
        let inputs = match w {
            Some(w) => {
                let v = berezin(&weight, &psi, params, w, spec)?;
                VerdictInputs::Value { w, value: v.value, error_bound: v.error_bound }
            }
            None => VerdictInputs::Mass(total_mass(&weight, &psi, params, spec)?),
        };
        let profile = if total || w.is_some() { Vec::new() } else { pointwise_profile(&weight, &psi, alpha, &rs) };
        (profile, inputs, Some(p))
    };
    let cp = CriterionProfile { kind: ckind, alpha, p: p_out, radial_profile: profile.clone(), verdict_inputs };
    let inputs = json!({ "symbol": to_value(&sym)?, "psi": to_value(&psi)?, "alpha": alpha, "p": p });
    let anchor = match ckind {
        CriterionKind::Binf => "B^inf: |g'(z)|/(1+|z|) e^{(alpha/2)(|psi(z)|^2-|z|^2)}",
        CriterionKind::Minf => "M^inf: |g'(psi(z)) psi'(z)|/(1+|z|) e^{(alpha/2)(|psi(z)|^2-|z|^2)}",
        CriterionKind::Uinf => "|u(z)| e^{(alpha/2)(|psi(z)|^2-|z|^2)}",
        CriterionKind::Bp => "B(|g|^p)(w) = int |k_w(psi(z))|^p (|g'(z)|/(1+|z|))^p e^{-p alpha |z|^2/2} dm(z)",
        CriterionKind::Mp => "M(|g|^p)(w) = int |k_w(psi(z))|^p (|g'(psi(z)) psi'(z)|/(1+|z|))^p e^{-p alpha |z|^2/2} dm(z)",
        CriterionKind::Up => "int |k_w(psi(z))|^p |u(z)|^p e^{-p alpha |z|^2/2} dm(z)",
    };
    Ok(Output {
        report: json!({ "command": "transform", "inputs": inputs, "result": to_value(&cp)?, "anchor": anchor }),
        profile,
        code: 0,
    })
}

fn carleson(measure: &Path, p: f64, alpha: f64, t: f64, r: f64, bounds: bool, spec: &QuadSpec) -> Result<Output, Fail> {
    let mj: MeasureJson = read_json(measure)?;
    let mu = DensityMeasure::from_json(&mj)?;
    let rep = carleson_verdict(&mu, p, alpha, t, r, spec)?;
    let mut result = to_value(&rep)?;
    if bounds {
        let lat = build_lattice(r, LADDER[LADDER.len() - 1])?;
        result["embedding_bounds"] = to_value(&embedding_norm_bounds(&mu, p, alpha, &lat, spec)?)?;
    }
    let code = if rep.verdict == focklab::carleson::CarlesonVerdict::Inconclusive { 3 } else { 0 };
    let inputs = json!({ "measure": to_value(&mj)?, "p": p, "alpha": alpha, "t": t, "r": r });
    let anchor = rep.anchor.clone();
    Ok(Output { report: json!({ "command": "carleson", "inputs": inputs, "result": result, "anchor": anchor }), profile: vec![], code })
}

fn classify(
    op: &Path,
    source: &str,
    target: &str,
    alpha: f64,
    numeric_only: bool,
    symbolic_only: bool,
    spec: &QuadSpec,
) -> Result<Output, Fail> {
    let op: OperatorSpec = read_json(op)?;
    let pair = SpacePair::new(FockParams::new(alpha, parse_exponent(source)?)?, FockParams::new(alpha, parse_exponent(target)?)?)?;
    let symbolic = if numeric_only {
        None
    } else {
        match classify_symbolic(&op, &pair) {
            Ok(v) => Some(v),
            Err(FockError::OutOfScope(_)) if !symbolic_only => None,
            Err(e) => return Err(e.into()),
        }
    };
    let numeric = if symbolic_only { None } else { Some(classify_numeric(&op, &pair, spec)?) };
    let primary: &Verdict = numeric.as_ref().or(symbolic.as_ref()).expect("one classifier ran");
    let indeterminate = primary.bounded == Tri::Indeterminate || primary.compact == Tri::Indeterminate;
    let agree = match (&symbolic, &numeric) {
        (Some(s), Some(n)) => Some(s.bounded == n.bounded && s.compact == n.compact),
        _ => None,
    };
    let profile = primary.evidence.as_ref().map(|e| e.radial_profile.clone()).unwrap_or_default();
    let result = json!({
        "bounded": to_value(&primary.bounded)?,
        "compact": to_value(&primary.compact)?,
        "symbolic": symbolic.as_ref().map(to_value).transpose()?,
        "numeric": numeric.as_ref().map(to_value).transpose()?,
        "agree": agree,
    });
    let inputs = json!({
        "op": to_value(&op)?,
        "source": exponent_value(pair.source.p),
        "target": exponent_value(pair.target.p),
        "alpha": alpha,
    });
    let anchor = primary.rule.clone();
    Ok(Output {
        report: json!({ "command": "classify", "inputs": inputs, "result": result, "anchor": anchor }),
        profile,
        code: if indeterminate { 3 } else { 0 },
    })
}

fn verify(suite: &str, seed: u64, only: Option<&str>, spec: &QuadSpec) -> Result<Output, Fail> {
    if suite != "all" {
        return Err(config(format!("unknown suite {suite:?}; the only suite is \"all\"")));
    }
    let summary = verify_suite(seed, only, spec)?;
    for ch in &summary.checks {
        eprintln!("[{}] {}", if ch.passed { "PASS" } else { "FAIL" }, ch.name);
    }
    let code = if summary.all_passed { 0 } else { 1 };
    let inputs = json!({ "suite": suite, "seed": seed, "only": only });
    Ok(Output {
        report: json!({ "command": "verify", "inputs": inputs, "result": to_value(&summary)?, "anchor": "verification suite" }),
        profile: vec![],
        code,
    })
}
