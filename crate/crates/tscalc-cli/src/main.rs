//! Command-line front end: evaluate monomials, check the comparison
//! lemmas, classify sampled functions, evaluate oscillation criteria, step
//! equations forward, and rebuild the worked examples end to end.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use tscalc::calculus::GridFn;
use tscalc::classify::{
    decay_check, kiguradze_profile, verify_philos, verify_philos_lambda, DecayEntry,
    KiguradzeProfile, LambdaBound, PhilosReport, DEFAULT_STRICT_TOL,
};
use tscalc::config::{parse_config, RunSettings};
use tscalc::expr::Expr;
use tscalc::monomials::{check_lemma_inequalities, g_poly, h_poly, LemmaSuiteReport};
use tscalc::oscillation::{
    conclude, criterion_exponential, criterion_windows, divergence_check, ConclusionReport,
    CriterionReport, DivergenceReport, ExampleId, ExampleParams, NeutralEquationSpec, Verdict,
};
use tscalc::scale::{GridWindow, TimeScale};
use tscalc::simulate::{reproduce_example, step_ivp, InitialData, SimulationSummary};
use tscalc::trace_io::{write_criterion_csv, write_trace_csv};

#[derive(Parser)]
#[command(
    name = "tscalc",
    about = "Calculus and oscillation criteria on discrete time scales",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a generalized monomial h_k(t, s) or g_k(t, s)
    Poly(PolyArgs),
    /// Check the four monomial comparison inequalities over a window
    Lemmas(LemmasArgs),
    /// Kiguradze sign classification of a sampled function
    Classify(ClassifyArgs),
    /// Verify the Philos-type lower bound on a sampled function
    Philos(PhilosArgs),
    /// Evaluate oscillation criteria for an equation config
    Criterion(CriterionArgs),
    /// Step an equation forward and emit its trace
    Simulate(SimulateArgs),
    /// Rebuild one worked example end to end
    Reproduce(ReproduceArgs),
}

/// Parse "uniform:h=1,t0=0" or "geometric:q=2,t0=1".
fn parse_scale(s: &str) -> Result<TimeScale, String> {
    let (kind, rest) = s
        .split_once(':')
        .ok_or_else(|| format!("expected kind:key=value,... in {s:?}"))?;
    let mut h = None;
    let mut q = None;
    let mut t0 = None;
    for pair in rest.split(',') {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("expected key=value in {pair:?}"))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("{value:?} is not a number"))?;
        match key.trim() {
            "h" => h = Some(value),
            "q" => q = Some(value),
            "t0" => t0 = Some(value),
            other => return Err(format!("unknown scale key {other:?}")),
        }
    }
    let t0 = t0.ok_or("scale needs t0=<anchor>")?;
    match kind {
        "uniform" => TimeScale::uniform(h.ok_or("uniform scale needs h=<step>")?, t0)
            .map_err(|e| e.to_string()),
        "geometric" => TimeScale::geometric(q.ok_or("geometric scale needs q=<ratio>")?, t0)
            .map_err(|e| e.to_string()),
        other => Err(format!(
            "unknown scale kind {other:?}; expected uniform or geometric"
        )),
    }
}

#[derive(Args)]
struct PolyArgs {
    /// scale, e.g. uniform:h=1,t0=0 or geometric:q=2,t0=1
    #[arg(long, value_parser = parse_scale)]
    scale: TimeScale,
    /// monomial order
    #[arg(long)]
    k: usize,
    /// second argument (anchor point)
    #[arg(long)]
    s: f64,
    /// first argument (evaluation point)
    #[arg(long)]
    t: f64,
    /// family: h (plain) or g (sigma-shifted)
    #[arg(long, default_value = "h")]
    kind: String,
}

fn run_poly(args: &PolyArgs) -> Result<()> {
    let value = match args.kind.as_str() {
        "h" => h_poly(&args.scale, args.k, args.t, args.s)?,
        "g" => g_poly(&args.scale, args.k, args.t, args.s)?,
        other => bail!("unknown monomial kind {other:?}; expected h or g"),
    };
    println!("{value}");
    Ok(())
}

#[derive(Args)]
struct LemmasArgs {
    /// scale to check on
    #[arg(long, value_parser = parse_scale, default_value = "uniform:h=1,t0=0")]
    scale: TimeScale,
    #[arg(long, default_value_t = 4)]
    kmax: usize,
    #[arg(long, default_value_t = 4)]
    lmax: usize,
    /// anchor point s (defaults to the scale anchor)
    #[arg(long)]
    s: Option<f64>,
    /// window depth in grid points past s
    #[arg(long, default_value_t = 32)]
    depth: i64,
    /// additionally check this many random explicit scales
    #[arg(long, default_value_t = 0)]
    random_scales: usize,
    /// seed for the random scales
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// emit the slack table as JSON instead of text
    #[arg(long)]
    json: bool,
}

#[derive(Serialize)]
struct LemmaLine {
    lemma: &'static str,
    min_slack: f64,
    min_normalized: f64,
    at: (usize, usize, i64),
    instances: usize,
}

fn lemma_lines(report: &LemmaSuiteReport) -> Vec<LemmaLine> {
    report
        .per_lemma
        .iter()
        .map(|l| LemmaLine {
            lemma: l.lemma,
            min_slack: l.slack,
            min_normalized: l.normalized,
            at: l.at,
            instances: l.instances,
        })
        .collect()
}

fn run_lemmas(args: &LemmasArgs) -> Result<()> {
    let s = args.s.unwrap_or(args.scale.point(0)?);
    let s_idx = args.scale.index_of(s)?;
    let window = GridWindow::new(args.scale.clone(), s_idx, s_idx + args.depth)?;
    let mut report = check_lemma_inequalities(&window, args.kmax, args.lmax, s_idx)?;
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    for _ in 0..args.random_scales {
        let mut points = vec![rng.gen_range(-5.0..5.0)];
        for _ in 0..40 {
            let next = points.last().unwrap() + rng.gen_range(0.05..2.0);
            points.push(next);
        }
        let ts = TimeScale::explicit(points)?;
        let w = GridWindow::new(ts, 0, 40)?;
        let extra = check_lemma_inequalities(&w, args.kmax, args.lmax, 0)?;
        for (agg, new) in report.per_lemma.iter_mut().zip(extra.per_lemma.iter()) {
            agg.instances += new.instances;
            if new.normalized < agg.normalized {
                agg.normalized = new.normalized;
                agg.at = new.at;
            }
            agg.slack = agg.slack.min(new.slack);
        }
    }
    if args.json {
        println!("{}", serde_json::to_string_pretty(&lemma_lines(&report))?);
    } else {
        for l in &report.per_lemma {
            println!(
                "{:<16} min slack {:+.3e} (normalized {:+.3e}) over {} instances, worst at (k={}, l={}, idx={})",
                l.lemma, l.slack, l.normalized, l.instances, l.at.0, l.at.1, l.at.2
            );
        }
        let ok = report.min_normalized() >= -1e-12;
        println!(
            "overall: {} (worst normalized slack {:+.3e})",
            if ok { "all inequalities hold" } else { "VIOLATION" },
            report.min_normalized()
        );
    }
    Ok(())
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, value_parser = parse_scale)]
    scale: TimeScale,
    /// expression for f(t), e.g. "t^0.5" or "1/(t+1)"
    #[arg(long)]
    f: String,
    /// derivative order n whose sign is semidefinite
    #[arg(long)]
    n: usize,
    /// window start point
    #[arg(long)]
    lo: f64,
    /// window end point
    #[arg(long)]
    hi: f64,
    /// per-order strictness tolerance (relative)
    #[arg(long, default_value_t = DEFAULT_STRICT_TOL)]
    strict_tol: f64,
}

fn sample_grid(scale: &TimeScale, expr_src: &str, lo: f64, hi: f64) -> Result<GridFn> {
    let expr = Expr::parse(expr_src).map_err(|e| anyhow!("cannot parse f: {e}"))?;
    let window = GridWindow::covering(scale.clone(), lo, hi)?;
    Ok(GridFn::sample(window, |t| expr.eval(t)))
}

fn run_classify(args: &ClassifyArgs) -> Result<()> {
    let f = sample_grid(&args.scale, &args.f, args.lo, args.hi)?;
    let profile = kiguradze_profile(&f, args.n, args.strict_tol)?;
    println!("{}", serde_json::to_string_pretty(&profile)?);
    Ok(())
}

#[derive(Args)]
struct PhilosArgs {
    #[arg(long, value_parser = parse_scale)]
    scale: TimeScale,
    #[arg(long)]
    f: String,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    lo: f64,
    #[arg(long)]
    hi: f64,
    #[arg(long, default_value_t = DEFAULT_STRICT_TOL)]
    strict_tol: f64,
    /// also locate the earliest start index of the lambda-weighted bound
    #[arg(long)]
    lambda: Option<f64>,
    /// anchor point for the lambda bound (defaults to the window start)
    #[arg(long)]
    t0: Option<f64>,
}

#[derive(Serialize)]
struct PhilosOut {
    profile: KiguradzeProfile,
    philos: PhilosReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_bound: Option<LambdaBound>,
    decay: Vec<DecayEntry>,
}

fn run_philos(args: &PhilosArgs) -> Result<()> {
    let f = sample_grid(&args.scale, &args.f, args.lo, args.hi)?;
    let profile = kiguradze_profile(&f, args.n, args.strict_tol)?;
    let philos = verify_philos(&f, args.n, &profile)?;
    let lambda_bound = match args.lambda {
        Some(lambda) => {
            let t0 = args.t0.unwrap_or(args.lo);
            let t0_idx = args.scale.snap_up_index(t0)?;
            Some(verify_philos_lambda(&f, args.n, lambda, t0_idx, &profile)?)
        }
        None => None,
    };
    let decay = decay_check(&f, args.n, &profile)?;
    let out = PhilosOut {
        profile,
        philos,
        lambda_bound,
        decay,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

#[derive(Args)]
struct CriterionArgs {
    /// JSON config file (use - for stdin)
    #[arg(long)]
    config: PathBuf,
    /// override the config's gamma
    #[arg(long)]
    gamma: Option<f64>,
    /// override the criterion window depth (indices past t0)
    #[arg(long)]
    window: Option<i64>,
    /// also run the exponential criterion (slower)
    #[arg(long)]
    exponential: bool,
    /// write liminf.csv / limsup.csv / exponential.csv here
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn read_config(path: &Path) -> Result<(NeutralEquationSpec, RunSettings)> {
    let text = if path.as_os_str() == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        buf
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?
    };
    Ok(parse_config(&text)?)
}

/// Criterion report without its trace body (traces go to CSV).
#[derive(Serialize)]
struct CriterionDigest {
    criterion: &'static str,
    threshold: f64,
    tail_estimate: f64,
    stable: bool,
    verdict: Verdict,
    skipped: usize,
    snapped: usize,
    points: usize,
}

impl CriterionDigest {
    fn of(r: &CriterionReport) -> Self {
        CriterionDigest {
            criterion: r.criterion,
            threshold: r.threshold,
            tail_estimate: r.tail_estimate,
            stable: r.stable,
            verdict: r.verdict,
            skipped: r.skipped,
            snapped: r.snapped,
            points: r.trace.len(),
        }
    }
}

#[derive(Serialize)]
struct CriterionOut {
    liminf: CriterionDigest,
    limsup: CriterionDigest,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponential: Option<CriterionDigest>,
    divergence: DivergenceReport,
    conclusion: ConclusionReport,
}

fn write_report_csv(dir: &Option<PathBuf>, name: &str, report: &CriterionReport) -> Result<()> {
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
        let path = dir.join(name);
        let file = fs::File::create(&path)
            .with_context(|| format!("creating {}", path.display()))?;
        write_criterion_csv(file, report)?;
    }
    Ok(())
}

fn run_criterion(args: &CriterionArgs) -> Result<()> {
    let (spec, settings) = read_config(&args.config)?;
    let gamma = args.gamma.unwrap_or(settings.gamma);
    let depth = args.window.unwrap_or(settings.window);
    let i0 = spec.scale.index_of(spec.t0)?;
    let window = GridWindow::new(spec.scale.clone(), i0, i0 + depth)?;
    let (liminf, limsup) = criterion_windows(&spec, gamma, &window)?;
    let exponential = if args.exponential {
        Some(criterion_exponential(&spec, &settings.lambda_grid, &window)?)
    } else {
        None
    };
    let divergence = divergence_check(&spec, &window)?;
    let satisfied = liminf.verdict == Verdict::Satisfied && limsup.verdict == Verdict::Satisfied;
    let conclusion = conclude(spec.n, spec.range_tag, satisfied, divergence.verdict);
    write_report_csv(&args.out_dir, "liminf.csv", &liminf)?;
    write_report_csv(&args.out_dir, "limsup.csv", &limsup)?;
    if let Some(exp) = &exponential {
        write_report_csv(&args.out_dir, "exponential.csv", exp)?;
    }
    let out = CriterionOut {
        liminf: CriterionDigest::of(&liminf),
        limsup: CriterionDigest::of(&limsup),
        exponential: exponential.as_ref().map(CriterionDigest::of),
        divergence,
        conclusion,
    };
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config file (use - for stdin)
    #[arg(long)]
    config: PathBuf,
    /// override the config's horizon (grid points past t0)
    #[arg(long)]
    horizon: Option<usize>,
    /// override the initial function phi(t)
    #[arg(long)]
    phi: Option<String>,
    /// override the left end of phi's validity
    #[arg(long)]
    t_start: Option<f64>,
    /// write the trace CSV here; without this the CSV goes to stdout
    /// and no summary is printed
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run_simulate(args: &SimulateArgs) -> Result<()> {
    let (spec, settings) = read_config(&args.config)?;
    let phi = match &args.phi {
        Some(src) => Expr::parse(src).map_err(|e| anyhow!("cannot parse phi: {e}"))?,
        None => settings.phi.clone(),
    };
    let init = InitialData {
        phi,
        t_start: args.t_start.unwrap_or(settings.t_start),
    };
    let horizon = args.horizon.unwrap_or(settings.horizon);
    let trace = step_ivp(&spec, &init, horizon)?;
    match &args.out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            let file = fs::File::create(path)
                .with_context(|| format!("creating {}", path.display()))?;
            write_trace_csv(file, &trace)?;
            let summary = SimulationSummary::from_trace(&trace);
            println!("{}", serde_json::to_string_pretty(&summary)?);
        }
        None => {
            write_trace_csv(std::io::stdout().lock(), &trace)?;
        }
    }
    Ok(())
}

#[derive(Args)]
struct ReproduceArgs {
    /// q-difference, difference or continuous
    #[arg(long)]
    example: String,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    a0: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    b0: Option<f64>,
    #[arg(long)]
    beta0: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// simulation length in grid points (default depends on the example)
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long, default_value_t = 0.25)]
    gamma: f64,
    /// run the continuous example on a fine grid instead of threshold-only
    #[arg(long)]
    simulate_continuous: bool,
}

fn run_reproduce(args: &ReproduceArgs) -> Result<()> {
    let example = ExampleId::parse(&args.example)?;
    let mut params = ExampleParams::default();
    if example == ExampleId::Continuous {
        params.n = 4;
        params.alpha0 = 2.0;
        params.beta0 = 2.0;
    }
    if let Some(n) = args.n {
        params.n = n;
    }
    if let Some(q) = args.q {
        params.q = q;
    }
    if let Some(a0) = args.a0 {
        params.a0 = a0;
    }
    if let Some(alpha0) = args.alpha0 {
        params.alpha0 = alpha0;
    }
    if let Some(b0) = args.b0 {
        params.b0 = b0;
    }
    if let Some(beta0) = args.beta0 {
        params.beta0 = beta0;
    }
    if let Some(p) = args.p {
        params.p = p;
    }
    let horizon = args.horizon.unwrap_or(match example {
        ExampleId::QDifference => 200,
        ExampleId::Difference => 4999,
        ExampleId::Continuous => 1500,
    });
    let report = reproduce_example(example, &params, horizon, args.gamma, args.simulate_continuous)?;
    // strip the bulky trace arrays; everything else passes through
    let mut value = serde_json::to_value(&report)?;
    for key in ["liminf", "limsup"] {
        if let Some(obj) = value.get_mut(key).and_then(|v| v.as_object_mut()) {
            if let Some(trace) = obj.remove("trace") {
                obj.insert(
                    "points".into(),
                    trace.as_array().map(|a| a.len()).unwrap_or(0).into(),
                );
            }
        }
    }
    println!("{}", serde_json::to_string_pretty(&value)?);
    Ok(())
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Poly(args) => run_poly(args),
        Command::Lemmas(args) => run_lemmas(args),
        Command::Classify(args) => run_classify(args),
        Command::Philos(args) => run_philos(args),
        Command::Criterion(args) => run_criterion(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Reproduce(args) => run_reproduce(args),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
