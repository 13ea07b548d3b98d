use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use witnesskit::analysis::{
    crossing, lambda_min_at, min_eig_curve, min_eig_surface, robustness_threshold, Axis, Family, MapTemplate, Point,
    SweepSpec, DEFAULT_TOL,
};
use witnesskit::biquad::{choi_form, form_from_map, numeric_min, scale_variables, Side};
use witnesskit::maps::{build_map, cj_witness_with, witness_value, MapParams, WitnessForm};
use witnesskit::mat::{min_eigval, partial_transpose, DensityMatrix, HermitianView, Subsystem};
use witnesskit::search::{ledger_header, ledger_row, run_search, SearchConfig};
use witnesskit::states::{t_factor_osaka, OsakaFamilyParams, T_SECTION};

/// Positive maps, entanglement witnesses and PPT entangled 3x3 states.
///
/// Results go to stdout as CSV or single values; diagnostics go to stderr.
/// Exit codes: 0 success, 1 usage error, 2 numeric failure.
#[derive(Parser, Debug)]
#[command(name = "witnesskit", version)]
struct Cli {
    /// Worker threads for parallel sweeps and searches [default: all cores]
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    /// File of `key=value` lines used as defaults for the subcommand's flags
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Least eigenvalue of (map (x) 1) rho over one or two varied parameters, as CSV
    Sweep(SweepArgs),
    /// Least-eigenvalue curve along the standard section of a family, as CSV
    Section(SectionArgs),
    /// Parameter value where the least eigenvalue changes sign
    Threshold(ThresholdArgs),
    /// Noise level at which the map stops detecting the state
    Robustness(RobustnessArgs),
    /// Witness value Tr(W rho) and least eigenvalue of (map (x) 1) rho
    Witness(WitnessArgs),
    /// Randomized search for PT-invariant states detected by one witness only
    Search(SearchArgs),
    /// Multi-start minimum of a bi-quadratic form over unit vectors
    FormCheck(FormCheckArgs),
    /// Trace, spectrum and partial-transpose checks of a state
    VerifyState(VerifyArgs),
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct StateArgs {
    /// State family: `choi` for rho(x, t), `osaka` for rho(y)
    #[arg(long, default_value = "choi")]
    family: Family,
    /// Family parameter x in [0, 1]
    #[arg(long)]
    x: Option<f64>,
    /// Family parameter t > 0
    #[arg(long)]
    t: Option<f64>,
    /// Family parameter y > 0
    #[arg(long)]
    y: Option<f64>,
    /// Fixed parameter, repeatable; `s` sets the osaka1x map parameter
    #[arg(long = "fix", value_name = "NAME=VALUE")]
    fix: Vec<String>,
}

impl StateArgs {
    fn point(&self) -> Result<Point, CliError> {
        let mut p = Point::new();
        for (name, v) in [("x", self.x), ("t", self.t), ("y", self.y)] {
            if let Some(v) = v {
                p.insert(name.to_string(), v);
            }
        }
        for f in &self.fix {
            let (k, v) = f.split_once('=').ok_or_else(|| usage(format!("--fix expects NAME=VALUE, got {f:?}")))?;
            let v: f64 = v.trim().parse().map_err(|_| usage(format!("bad number in --fix {f:?}")))?;
            p.insert(k.trim().to_string(), v);
        }
        Ok(p)
    }

    fn state(&self) -> Result<DensityMatrix, CliError> {
        let p = self.point()?;
        for name in p.keys() {
            if !self.family.param_names().contains(&name.as_str()) {
                return Err(usage(format!("parameter {name:?} does not belong to family {}", self.family)));
            }
        }
        self.family.state(&p).map_err(|e| usage(e.to_string()))
    }
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SweepArgs {
    #[command(flatten)]
    state: StateArgs,
    /// Map spec `name:p1,p2,...` (choi1, choi2, osaka, gen, transpose, id) or `osaka1x`
    #[arg(long, default_value = "gen:1.6,1,1")]
    map: MapTemplate,
    /// Varied parameter `name:lo:hi[:steps]`; give once for a curve, twice for a surface
    #[arg(long, value_name = "AXIS", required = true)]
    vary: Vec<String>,
    /// Grid points per axis when an axis omits `steps`
    #[arg(long, default_value_t = 50)]
    steps: usize,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SectionArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, default_value = "gen:1.6,1,1")]
    map: MapTemplate,
    /// Varied parameter [default: x:0:1:101 with t = 1/20 for choi, y:0.05:1:96 for osaka]
    #[arg(long, value_name = "AXIS")]
    vary: Option<String>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct ThresholdArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, default_value = "gen:1.6,1,1")]
    map: MapTemplate,
    /// Bracket `name:lo:hi[:steps]`; with steps > 2 the first sign change on that grid is bisected
    #[arg(long, value_name = "AXIS")]
    vary: String,
    /// Bisection tolerance in parameter units
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct RobustnessArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, default_value = "gen:1.6,1,1")]
    map: MapParams,
    /// Bisection tolerance on the noise level
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct WitnessArgs {
    #[command(flatten)]
    state: StateArgs,
    #[arg(long, default_value = "gen:1.6,1,1")]
    map: MapParams,
    /// Use the diagonal-only witness (1/sqrt d) sum_i |i><i| (x) map(|i><i|)
    #[arg(long)]
    literal: bool,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct SearchArgs {
    /// Master seed; iteration k uses seed + k
    #[arg(long, env = "WITNESSKIT_SEED", default_value_t = 0)]
    seed: u64,
    /// Number of random draws [default: 500]
    #[arg(long)]
    max_iters: Option<usize>,
    /// Required PT residual [default: 1e-10]
    #[arg(long)]
    residual_tol: Option<f64>,
    /// Coordinate-descent sweeps per draw [default: 500]
    #[arg(long)]
    max_sweeps: Option<usize>,
    /// Map whose witness must fire [default: osaka:1,6,0.16666666666666666]
    #[arg(long)]
    detect: Option<String>,
    /// Map whose witness must stay silent [default: choi1:1]
    #[arg(long)]
    reject: Option<String>,
    /// Interval `lo:hi` of the uniform draw on each pattern entry [default: -0.5:0.5]
    #[arg(long, allow_hyphen_values = true)]
    value_range: Option<String>,
    /// Center draws on the rho(y) factor at this y, or `none` [default: 0.35]
    #[arg(long)]
    center_y: Option<String>,
    /// `factor`, `diagonal` or 1-based `r,c;r,c;...` [default: factor]
    #[arg(long)]
    pattern: Option<String>,
    /// Write the candidate ledger here instead of stdout
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct FormCheckArgs {
    /// `choi` for the Choi form with parameter --mu, `map` for the form of --map
    #[arg(long, default_value = "choi")]
    form: String,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    /// Map spec used with `--form map`
    #[arg(long, default_value = "gen:1.6,1,1")]
    map: MapParams,
    /// Rescale the X variables by `a,b,c` before minimizing
    #[arg(long, value_name = "A,B,C")]
    scale: Option<String>,
    /// Number of random starts
    #[arg(long, default_value_t = 64)]
    starts: usize,
    /// Seed; start k uses seed + k
    #[arg(long, env = "WITNESSKIT_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
#[command(args_override_self = true)]
struct VerifyArgs {
    #[command(flatten)]
    state: StateArgs,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Numeric(witnesskit::Error),
    Io(io::Error),
}

fn usage(msg: String) -> CliError {
    CliError::Usage(msg)
}

impl From<witnesskit::Error> for CliError {
    fn from(e: witnesskit::Error) -> Self {
        match e {
            witnesskit::Error::InvalidParameter(msg) => CliError::Usage(msg),
            e => CliError::Numeric(e),
        }
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

const SUBCOMMANDS: [&str; 8] =
    ["sweep", "section", "threshold", "robustness", "witness", "search", "form-check", "verify-state"];

/// Finds `--config PATH` in raw arguments.
fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Turns `key=value` lines into flags. Inserted right after the subcommand,
/// so flags given on the command line take precedence.
fn config_flags(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("config line {}: expected key=value", n + 1))?;
        let flag = format!("--{}", k.trim().replace('_', "-"));
        match v.trim() {
            "true" => out.push(flag),
            "false" => {}
            v => {
                out.push(flag);
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

fn expand_args(mut args: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let extra = config_flags(&text)?;
    if let Some(pos) = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) {
        args.splice(pos + 1..pos + 1, extra);
    }
    Ok(args)
}

fn parse_axis(text: &str, default_steps: usize) -> Result<Axis, CliError> {
    Axis::parse(text, default_steps).map_err(|e| usage(e.to_string()))
}

fn run_sweep(a: &SweepArgs, out: &mut impl Write) -> Result<(), CliError> {
    let fixed = a.state.point()?;
    match a.vary.as_slice() {
        [one] => {
            let axis = parse_axis(one, a.steps)?;
            let curve = min_eig_curve(a.state.family, &a.map, &axis, &fixed)?;
            write!(out, "# family={} map={}", a.state.family, a.map)?;
            for (k, v) in &fixed {
                write!(out, " {k}={v}")?;
            }
            writeln!(out, "\n{},lambda_min", axis.name)?;
            for (v, l) in curve {
                writeln!(out, "{v:.16e},{l:.16e}")?;
            }
        }
        [first, second] => {
            let spec = SweepSpec {
                family: a.state.family,
                map: a.map,
                axis1: parse_axis(first, a.steps)?,
                axis2: parse_axis(second, a.steps)?,
                fixed,
            };
            let result = min_eig_surface(&spec)?;
            log::info!("{}", result.metadata);
            out.write_all(result.to_csv().as_bytes())?;
        }
        _ => return Err(usage("--vary takes one or two axes".into())),
    }
    Ok(())
}

fn run_section(a: &SectionArgs, out: &mut impl Write) -> Result<(), CliError> {
    let mut fix = a.state.fix.clone();
    let vary = match (&a.vary, a.state.family) {
        (Some(v), _) => v.clone(),
        (None, Family::Choi) => {
            if a.state.t.is_none() && !fix.iter().any(|f| f.starts_with("t=")) {
                fix.push(format!("t={T_SECTION}"));
            }
            "x:0:1:101".into()
        }
        (None, Family::Osaka) => "y:0.05:1:96".into(),
    };
    let state = StateArgs { family: a.state.family, x: a.state.x, t: a.state.t, y: a.state.y, fix };
    run_sweep(&SweepArgs { state, map: a.map, vary: vec![vary], steps: 2 }, out)
}

fn run_threshold(a: &ThresholdArgs, out: &mut impl Write) -> Result<(), CliError> {
    let axis = parse_axis(&a.vary, 2)?;
    let fixed = a.state.point()?;
    let v = crossing(a.state.family, &a.map, &axis, &fixed, a.tol)?;
    writeln!(out, "{v:.6}")?;
    Ok(())
}

fn run_robustness(a: &RobustnessArgs, out: &mut impl Write) -> Result<(), CliError> {
    let rho = a.state.state()?;
    let eps = robustness_threshold(&rho, &a.map, a.tol)?;
    writeln!(out, "{eps:.6}")?;
    Ok(())
}

fn run_witness(a: &WitnessArgs, out: &mut impl Write) -> Result<(), CliError> {
    let rho = a.state.state()?;
    let form = if a.literal { WitnessForm::DiagonalOnly } else { WitnessForm::Full };
    let w = cj_witness_with(&build_map(&a.map)?, form)?;
    let value = witness_value(&w, &rho)?;
    let lambda = lambda_min_at(a.state.family, &MapTemplate::Fixed(a.map), &a.state.point()?)?;
    writeln!(out, "witness_value,lambda_min")?;
    writeln!(out, "{value:.16e},{lambda:.16e}")?;
    Ok(())
}

fn run_search_cmd(a: &SearchArgs, out: &mut impl Write) -> Result<(), CliError> {
    let mut cfg = SearchConfig { seed: a.seed, ..SearchConfig::default() };
    let settings = [
        ("max_iters", a.max_iters.map(|v| v.to_string())),
        ("residual_tol", a.residual_tol.map(|v| v.to_string())),
        ("max_sweeps", a.max_sweeps.map(|v| v.to_string())),
        ("detect", a.detect.clone()),
        ("reject", a.reject.clone()),
        ("value_range", a.value_range.clone()),
        ("center_y", a.center_y.clone()),
        ("pattern", a.pattern.clone()),
    ];
    for (key, value) in settings {
        if let Some(v) = value {
            cfg.set(key, &v).map_err(|e| usage(e.to_string()))?;
        }
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let found = run_search(&cfg)?;
    let mut text = ledger_header();
    text.push('\n');
    for f in &found {
        text.push_str(&ledger_row(f));
        text.push('\n');
    }
    log::info!("{} candidates in {} iterations", found.len(), cfg.max_iters);
    match &a.out {
        Some(path) => fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run_form_check(a: &FormCheckArgs, out: &mut impl Write) -> Result<(), CliError> {
    let mut f = match a.form.as_str() {
        "choi" => choi_form(a.mu).map_err(|e| usage(e.to_string()))?,
        "map" => form_from_map(&build_map(&a.map)?),
        other => return Err(usage(format!("unknown form {other:?} (choi, map)"))),
    };
    if let Some(s) = &a.scale {
        let scales = s
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| usage(format!("bad --scale {s:?}")))?;
        f = scale_variables(&f, &scales, Side::X).map_err(|e| usage(e.to_string()))?;
    }
    let m = numeric_min(&f, a.starts, a.seed);
    let mut header = String::from("min,start");
    let mut row = format!("{:.16e},{}", m.value, m.start);
    for (name, v) in [("x", &m.x), ("y", &m.y)] {
        for (k, c) in v.iter().enumerate() {
            header.push_str(&format!(",{name}{}", k + 1));
            row.push_str(&format!(",{c:.16e}"));
        }
    }
    writeln!(out, "{header}\n{row}")?;
    Ok(())
}

fn run_verify(a: &VerifyArgs, out: &mut impl Write) -> Result<(), CliError> {
    let rho = a.state.state()?;
    let pt = partial_transpose(rho.matrix(), rho.dims(), Subsystem::Second)?;
    let pt_min = min_eigval(&HermitianView::new(pt.clone())?)?;
    writeln!(out, "quantity,value")?;
    writeln!(out, "trace,{:.16e}", rho.hermitian().trace())?;
    writeln!(out, "min_eigenvalue,{:.16e}", min_eigval(rho.hermitian())?)?;
    writeln!(out, "pt_min_eigenvalue,{pt_min:.16e}")?;
    writeln!(out, "pt_distance,{:.16e}", pt.distance(rho.matrix()))?;
    if a.state.family == Family::Osaka {
        let p = OsakaFamilyParams::new(a.state.point()?["y"])?;
        let gram = t_factor_osaka(&p).gram().scale(1.0 / p.normalization());
        writeln!(out, "factor_gap,{:.16e}", gram.max_abs_diff(rho.matrix()))?;
    }
    Ok(())
}

fn dispatch(cmd: &Command, out: &mut impl Write) -> Result<(), CliError> {
    match cmd {
        Command::Sweep(a) => run_sweep(a, out),
        Command::Section(a) => run_section(a, out),
        Command::Threshold(a) => run_threshold(a, out),
        Command::Robustness(a) => run_robustness(a, out),
        Command::Witness(a) => run_witness(a, out),
        Command::Search(a) => run_search_cmd(a, out),
        Command::FormCheck(a) => run_form_check(a, out),
        Command::VerifyState(a) => run_verify(a, out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = match expand_args(std::env::args().collect()) {
        Ok(a) => a,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = dispatch(&cli.command, &mut out).and_then(|()| out.flush().map_err(CliError::from));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numeric(e)) => {
            eprintln!("error: {e}");
            if matches!(e, witnesskit::Error::SameSign { .. } | witnesskit::Error::NoCrossing(_)) {
                eprintln!("hint: choose a bracket --vary name:lo:hi over which the sign changes");
            }
            ExitCode::from(2)
        }
        Err(CliError::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
