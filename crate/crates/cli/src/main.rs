use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use heightlab::coadjoint::{self, discover_strata, StratumData};
use heightlab::counting::{self, CountConfig};
use heightlab::enveloping::{self, symmetrize};
use heightlab::geometry::{twist_pole_set, CompactificationModel};
use heightlab::rational::{fmt_q, fmt_q_list, parse_q_list};
use heightlab::report::SCHEMA_VERSION;
use heightlab::{data, group, verify, zeta, Error, LieAlgebra, Result, Vector, Q};

#[derive(Parser)]
#[command(name = "heightlab", version, about = "Exact nilpotent orbit computations, height zeta functions and point counts")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Structure of a nilpotent Lie algebra.
    Algebra {
        #[command(subcommand)]
        cmd: AlgebraCmd,
    },
    /// Coadjoint orbit of a functional.
    Orbit {
        #[command(subcommand)]
        cmd: OrbitCmd,
    },
    /// Vergne polarization at a functional.
    Polarize(OrbitArgs),
    /// Symmetrization and invariant operators.
    Envelope {
        #[command(subcommand)]
        cmd: EnvelopeCmd,
    },
    /// Local height integrals and Euler products.
    Zeta {
        #[command(subcommand)]
        cmd: ZetaCmd,
    },
    /// Rational points of bounded height.
    Count {
        #[command(subcommand)]
        cmd: CountCmd,
    },
    /// Seeded property suite: lie, group, coadjoint, enveloping, geometry,
    /// zeta, counting or all.
    Verify { suite: String },
}

#[derive(Args)]
struct AlgebraArg {
    /// Shipped name (h3, k4, ...) or path to an algebra file.
    #[arg(long = "algebra", value_name = "ALGEBRA")]
    flag: Option<String>,
    #[arg(value_name = "ALGEBRA")]
    positional: Option<String>,
}

impl AlgebraArg {
    fn name(&self) -> Result<String> {
        self.flag
            .clone()
            .or_else(|| self.positional.clone())
            .ok_or_else(|| Error::Parse("an algebra is required".into()))
    }
}

#[derive(Args)]
struct ModelArg {
    /// Shipped name (p1, blowup_p2, ...) or path to a model file.
    #[arg(long = "model", value_name = "MODEL")]
    flag: Option<String>,
    #[arg(value_name = "MODEL")]
    positional: Option<String>,
}

impl ModelArg {
    fn name(&self) -> Result<String> {
        self.flag
            .clone()
            .or_else(|| self.positional.clone())
            .ok_or_else(|| Error::Parse("a model is required".into()))
    }
}

#[derive(Subcommand)]
enum AlgebraCmd {
    Info {
        #[command(flatten)]
        algebra: AlgebraArg,
        /// Sample count for stratum discovery.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Args)]
struct OrbitArgs {
    #[command(flatten)]
    algebra: AlgebraArg,
    /// Functional as comma-separated rationals in the dual basis.
    #[arg(long, allow_hyphen_values = true)]
    ell: String,
}

#[derive(Subcommand)]
enum OrbitCmd {
    Analyze {
        #[command(flatten)]
        orbit: OrbitArgs,
        /// Prime for the multiplicity bound.
        #[arg(long)]
        p: Option<u64>,
    },
}

#[derive(Subcommand)]
enum EnvelopeCmd {
    /// Symmetrize the algebra's shipped invariant polynomials.
    Sym {
        #[command(flatten)]
        algebra: AlgebraArg,
    },
    /// Scalar eigenvalues of the invariant operators at a functional.
    Central {
        #[command(flatten)]
        orbit: OrbitArgs,
    },
}

#[derive(Args)]
struct LocalArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long)]
    p: u64,
    /// Exponents s_α as comma-separated rationals; defaults to κ.
    #[arg(long)]
    s: Option<String>,
}

#[derive(Subcommand)]
enum ZetaCmd {
    Local(LocalArgs),
    Twist {
        #[command(flatten)]
        local: LocalArgs,
        /// Shipped twist name or path.
        #[arg(long)]
        twist: String,
    },
    Predict {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 100_000)]
        prime_bound: u64,
    },
}

#[derive(Args)]
struct CountArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long = "max-B", default_value_t = 1_000_000)]
    max_b: u64,
    /// Number of log-spaced sample bounds over the two decades below max-B.
    #[arg(long, default_value_t = 9)]
    shells: usize,
    #[arg(long, default_value_t = 10_000)]
    prime_bound: u64,
    /// Maximum number of tuples an enumeration may touch.
    #[arg(long, default_value_t = 20_000_000_000)]
    budget: u128,
    /// Directory for resumable per-partition checkpoints.
    #[arg(long)]
    checkpoint_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum CountCmd {
    Run(CountArgs),
    Fit {
        #[command(flatten)]
        count: CountArgs,
        /// Fit samples read from a CSV written by `count run` instead of
        /// enumerating.
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

enum Report {
    Json(Value),
    Csv(String),
}

fn parse_ell(alg: &LieAlgebra, text: &str) -> Result<Vector> {
    let v = parse_q_list(text)?;
    if v.len() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), got: v.len() });
    }
    Ok(Vector(v))
}

fn vectors(vs: &[Vector]) -> Value {
    json!(vs.iter().map(|v| v.to_strings()).collect::<Vec<_>>())
}

fn stratum(s: &StratumData) -> Value {
    json!({
        "d": s.d,
        "I": StratumData::one_based(&s.i_set),
        "J": StratumData::one_based(&s.j_set),
    })
}

fn with_schema(kind: &str, mut body: Value) -> Value {
    let obj = body.as_object_mut().expect("reports are objects");
    obj.insert("schema_version".into(), json!(SCHEMA_VERSION));
    obj.insert("report".into(), json!(kind));
    body
}

fn algebra_info(name: &str, samples: usize, seed: u64) -> Result<Value> {
    let alg = data::algebra(name)?;
    let basis = alg.strong_malcev_basis();
    let series: Vec<usize> = alg.ascending_central_series()?.iter().map(|s| s.dim()).collect();
    let quadruple = match alg.kirillov_quadruple() {
        Ok(k) => json!({
            "Z": k.z.to_strings(), "Y": k.y.to_strings(), "X": k.x.to_strings(),
            "g0": vectors(&k.g0.generators()),
        }),
        Err(_) => Value::Null,
    };
    let universal = if alg.has_integral_constants() { json!(group::universal_scalar(&alg)?) } else { Value::Null };
    let strata: Vec<Value> = discover_strata(&alg, &basis, samples, seed)?
        .into_iter()
        .map(|(d, count)| json!({"d": d, "samples": count}))
        .collect();
    Ok(json!({
        "algebra": data::stem(name),
        "dim": alg.dim(),
        "basis": alg.labels(),
        "abelian": alg.is_abelian(),
        "nilpotency_class": alg.nilpotency_class(),
        "central_series_dims": series,
        "center": vectors(&alg.center().generators()),
        "strong_malcev_basis": vectors(&basis.vectors),
        "kirillov_quadruple": quadruple,
        "universal_scalar": universal,
        "strata": strata,
    }))
}

fn orbit_analyze(args: &OrbitArgs, p: Option<u64>, seed: u64) -> Result<Value> {
    let name = args.algebra.name()?;
    let alg = data::algebra(&name)?;
    let ell = parse_ell(&alg, &args.ell)?;
    let a = coadjoint::analyze(&alg, &ell)?;
    let basis = alg.strong_malcev_basis();
    let norm = match data::invariants(&name) {
        Ok(set) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = coadjoint::orbit_norm(&alg, &ell, &set.polys, &mut rng)?;
            json!({"exact": fmt_q(&n.exact), "value": n.value})
        }
        Err(_) => Value::Null,
    };
    let bound = match p {
        Some(p) => json!({"p": p, "bound": fmt_q(&coadjoint::multiplicity_bound(&alg, &ell, &basis, p)?)}),
        None => Value::Null,
    };
    Ok(json!({
        "algebra": data::stem(&name),
        "ell": ell.to_strings(),
        "stratum": stratum(&a.stratum),
        "orbit_dim": a.orbit_dim,
        "radical": vectors(&a.radical.generators()),
        "pfaffian": fmt_q(&a.pfaffian),
        "representative": a.representative.to_strings(),
        "group_element": a.element.to_strings(),
        "polarization": vectors(&a.polarization.generators()),
        "orbit_norm": norm,
        "multiplicity_bound": bound,
    }))
}

fn polarize(args: &OrbitArgs) -> Result<Value> {
    let name = args.algebra.name()?;
    let alg = data::algebra(&name)?;
    let ell = parse_ell(&alg, &args.ell)?;
    let m = coadjoint::vergne_polarization(&alg, &ell, &alg.strong_malcev_basis())?;
    let gens = m.generators();
    let closed = gens.iter().all(|x| gens.iter().all(|y| alg.bracket(x, y).map(|b| m.contains(&b)).unwrap_or(false)));
    Ok(json!({
        "algebra": data::stem(&name),
        "ell": ell.to_strings(),
        "polarization": vectors(&gens),
        "dim": m.dim(),
        "expected_dim": coadjoint::polarization_dim(&alg, &ell)?,
        "isotropic": coadjoint::is_isotropic(&alg, &ell, &m),
        "subalgebra": closed,
    }))
}

fn element_json(alg: &LieAlgebra, e: &enveloping::EnvelopingElement) -> Value {
    let terms: Vec<Value> = e
        .terms()
        .iter()
        .map(|(exp, c)| {
            let word: Vec<String> = exp
                .iter()
                .enumerate()
                .filter(|(_, k)| **k > 0)
                .map(|(i, k)| if *k == 1 { alg.labels()[i].clone() } else { format!("{}^{k}", alg.labels()[i]) })
                .collect();
            json!([word.join(" "), fmt_q(c)])
        })
        .collect();
    json!(terms)
}

fn envelope_sym(args: &AlgebraArg) -> Result<Value> {
    let name = args.name()?;
    let alg = data::algebra(&name)?;
    let set = data::invariants(&name)?;
    let mut out = Vec::new();
    for p in &set.polys {
        let u = symmetrize(&alg, p)?;
        out.push(json!({"symmetrized": element_json(&alg, &u), "central": enveloping::is_central(&alg, &u)}));
    }
    Ok(json!({"algebra": data::stem(&name), "invariants": out}))
}

fn envelope_central(args: &OrbitArgs, seed: u64) -> Result<Value> {
    let name = args.algebra.name()?;
    let alg = data::algebra(&name)?;
    let ell = parse_ell(&alg, &args.ell)?;
    let set = data::invariants(&name)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for p in &set.polys {
        let ev = enveloping::scalar_eigenvalue(&alg, p, &ell, &mut rng)?;
        let graded: Vec<Value> = ev.graded.iter().map(|(r, v)| json!({"degree": r, "coefficient": fmt_q(v)})).collect();
        out.push(json!({"graded": graded, "re": ev.re, "im": ev.im}));
    }
    Ok(json!({"algebra": data::stem(&name), "ell": ell.to_strings(), "eigenvalues": out}))
}

fn parse_s(m: &CompactificationModel, s: Option<&str>) -> Result<Vec<Q>> {
    match s {
        None => Ok(zeta::anticanonical_s(m)),
        Some(text) => {
            let v = parse_q_list(text)?;
            if v.len() != m.num_boundary() {
                return Err(Error::DimensionMismatch { expected: m.num_boundary(), got: v.len() });
            }
            Ok(v)
        }
    }
}

fn local_json(v: &zeta::LocalFactorValue) -> Value {
    json!({
        "p": v.p,
        "s": fmt_q_list(&v.s),
        "exact": v.exact.as_ref().map(fmt_q),
        "value": v.value,
    })
}

fn zeta_local(args: &LocalArgs) -> Result<Value> {
    let m = data::model(&args.model.name()?)?;
    let s = parse_s(&m, args.s.as_deref())?;
    let v = zeta::local_height_integral(&m, args.p, &s)?;
    Ok(json!({"model": m.name, "local_factor": local_json(&v)}))
}

fn zeta_twist(args: &LocalArgs, twist: &str) -> Result<Value> {
    let m = data::model(&args.model.name()?)?;
    let f = data::twist(&m, twist)?;
    let s = parse_s(&m, args.s.as_deref())?;
    let v = zeta::twisted_local_factor(&m, &f, args.p, &s)?;
    let poles = twist_pole_set(&m, &f)?;
    let a0: Vec<&str> = poles.a0.iter().map(|&i| m.boundary[i].as_str()).collect();
    Ok(json!({
        "model": m.name,
        "twist": f.name,
        "A0": a0,
        "pole_order": a0.len(),
        "degenerate": poles.degenerate,
        "local_factor": local_json(&v),
    }))
}

fn zeta_predict(model: &ModelArg, prime_bound: u64) -> Result<Value> {
    let m = data::model(&model.name()?)?;
    let e = zeta::euler_leading_constant(&m, prime_bound)?;
    let sample: Vec<Value> = e.factors_sample.iter().map(|(p, f)| json!({"p": p, "factor": f})).collect();
    Ok(json!({
        "model": e.model,
        "s": fmt_q_list(&zeta::anticanonical_s(&m)),
        "P": e.truncation_prime,
        "tau": e.tau,
        "pole_order": e.pole_order,
        "arch_density": e.archimedean_density,
        "euler_product": e.euler_product,
        "kappa_product": e.kappa_product,
        "leading_constant": e.leading_constant,
        "fitted_c": e.fitted_c,
        "factors_sample": sample,
        "tail_heuristic": e.tail_heuristic,
    }))
}

fn thresholds(max_b: u64, shells: usize) -> Result<Vec<u64>> {
    if shells < 3 {
        return Err(Error::precondition("sample_count", "at least 3 shells are needed"));
    }
    if max_b < 100 {
        return Err(Error::precondition("sample_span", "max-B must be at least 100"));
    }
    let hi = (max_b as f64).log10();
    let lo = hi - 2.0;
    let mut th: Vec<u64> = (0..shells)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (shells - 1) as f64).round() as u64)
        .collect();
    *th.last_mut().expect("nonempty") = max_b;
    th.dedup();
    Ok(th)
}

fn count_samples(args: &CountArgs, m: &CompactificationModel) -> Result<Vec<(u64, u64)>> {
    let cfg = CountConfig { budget: args.budget, checkpoint_dir: args.checkpoint_dir.clone(), ..CountConfig::default() };
    if let Some(dir) = &cfg.checkpoint_dir {
        fs::create_dir_all(dir)?;
    }
    counting::count_points(m, &thresholds(args.max_b, args.shells)?, &cfg)
}

fn read_samples(path: &PathBuf) -> Result<Vec<(u64, u64)>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| Error::Parse(e.to_string()))?;
        let field = |i: usize| -> Result<u64> {
            row.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Parse(format!("bad sample row {:?}", row)))
        };
        out.push((field(0)?, field(1)?));
    }
    Ok(out)
}

fn count(args: &CountArgs, input: Option<&PathBuf>, fit: bool, format: Format) -> Result<Report> {
    let m = data::model(&args.model.name()?)?;
    let samples = match input {
        Some(path) => read_samples(path)?,
        None => count_samples(args, &m)?,
    };
    let e = zeta::euler_leading_constant(&m, args.prime_bound)?;
    let b = e.pole_order;
    let report = if fit {
        counting::fit_and_compare(&m.name, &samples, b, e.leading_constant)?
    } else {
        // prediction only; the fit needs the same preconditions
        counting::CountReport {
            model: m.name.clone(),
            pole_order: b,
            samples: samples
                .iter()
                .map(|&(bb, n)| {
                    let l = (bb as f64).ln();
                    let pred = e.leading_constant / factorial(b - 1) * bb as f64 * l.powi(b as i32 - 1);
                    counting::Sample { b: bb, n, n_over_prediction: if pred > 0.0 { n as f64 / pred } else { f64::NAN } }
                })
                .collect(),
            coefficients: Vec::new(),
            fitted_leading: f64::NAN,
            predicted_leading: e.leading_constant / factorial(b - 1),
            relative_deviation: f64::NAN,
        }
    };
    if format == Format::Csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Parse(e.to_string());
        w.write_record(["B", "N", "N_over_prediction"]).map_err(io)?;
        for s in &report.samples {
            w.write_record([s.b.to_string(), s.n.to_string(), format!("{:.9}", s.n_over_prediction)]).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        return Ok(Report::Csv(String::from_utf8(bytes).expect("ascii")));
    }
    let mut v = serde_json::to_value(&report)?;
    if !fit {
        let obj = v.as_object_mut().expect("object");
        for k in ["coefficients", "fitted_leading", "relative_deviation"] {
            obj.remove(k);
        }
    }
    let obj = v.as_object_mut().expect("object");
    obj.insert("tau".into(), json!(e.tau));
    obj.insert("prime_bound".into(), json!(args.prime_bound));
    Ok(Report::Json(v))
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn run(cli: &Cli) -> Result<(Report, bool)> {
    let csv_ok = matches!(cli.command, Command::Count { .. } | Command::Verify { .. });
    if cli.format == Format::Csv && !csv_ok {
        return Err(Error::Parse("csv output is available for count and verify only".into()));
    }
    let json_report = |kind: &str, v: Value| Ok((Report::Json(with_schema(kind, v)), true));
    match &cli.command {
        Command::Algebra { cmd: AlgebraCmd::Info { algebra, samples } } => {
            json_report("algebra_info", algebra_info(&algebra.name()?, *samples, cli.seed)?)
        }
        Command::Orbit { cmd: OrbitCmd::Analyze { orbit, p } } => json_report("orbit", orbit_analyze(orbit, *p, cli.seed)?),
        Command::Polarize(args) => json_report("polarization", polarize(args)?),
        Command::Envelope { cmd: EnvelopeCmd::Sym { algebra } } => json_report("symmetrization", envelope_sym(algebra)?),
        Command::Envelope { cmd: EnvelopeCmd::Central { orbit } } => {
            json_report("eigenvalues", envelope_central(orbit, cli.seed)?)
        }
        Command::Zeta { cmd: ZetaCmd::Local(args) } => json_report("local_factor", zeta_local(args)?),
        Command::Zeta { cmd: ZetaCmd::Twist { local, twist } } => json_report("twisted_factor", zeta_twist(local, twist)?),
        Command::Zeta { cmd: ZetaCmd::Predict { model, prime_bound } } => {
            json_report("prediction", zeta_predict(model, *prime_bound)?)
        }
        Command::Count { cmd } => {
            let (args, input, fit) = match cmd {
                CountCmd::Run(a) => (a, None, false),
                CountCmd::Fit { count, input } => (count, input.as_ref(), true),
            };
            match count(args, input, fit, cli.format)? {
                Report::Json(v) => json_report(if fit { "count_fit" } else { "count" }, v),
                csv => Ok((csv, true)),
            }
        }
        Command::Verify { suite } => {
            let r = verify::run(suite, cli.seed)?;
            let passed = r.passed;
            if cli.format == Format::Csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Error::Parse(e.to_string());
                w.write_record(["check", "cases", "passed", "detail"]).map_err(io)?;
                for c in &r.checks {
                    w.write_record([c.name.clone(), c.cases.to_string(), c.passed.to_string(), c.detail.clone()])
                        .map_err(io)?;
                }
                let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
                return Ok((Report::Csv(String::from_utf8(bytes).expect("utf-8")), passed));
            }
            Ok((Report::Json(serde_json::to_value(&r)?), passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let (report, passed) = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let text = match report {
        Report::Json(v) => serde_json::to_string_pretty(&v).expect("serializable") + "\n",
        Report::Csv(s) => s,
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    if passed {
        ExitCode::SUCCESS
    } else {
        eprintln!("error: verification failed");
        ExitCode::from(2)
    }
}
