//! Command-line front end: `solve`, `bench`, `oracle` and `generate`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::gen::{self, TransportForm, TransportParams};
use crate::io;
use crate::problem::{self, NareProblem, Operator, Storage};
use crate::radi::{self, SolveOptions, SolveOutcome, StopCause};
use crate::shifts::{Orientation, ShiftStrategy};
use crate::sparse::Csc;
use crate::verify::{self, OracleConfig};
use crate::Mat;

pub const EXIT_CONVERGED: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;
pub const EXIT_STARVATION: i32 = 4;

pub fn exit_code(cause: StopCause) -> i32 {
    match cause {
        StopCause::Converged => EXIT_CONVERGED,
        StopCause::MaxIterations => EXIT_MAX_ITER,
        StopCause::Diverged => EXIT_DIVERGED,
        StopCause::ShiftStarvation => EXIT_STARVATION,
    }
}

#[derive(Parser, Debug)]
#[command(name = "nare", version, about = "Low-rank RADI-type solver for nonsymmetric algebraic Riccati equations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve one problem; writes the convergence CSV, factors and a manifest.
    Solve(RunArgs),
    /// Run the twelve-strategy grid on one problem.
    Bench(RunArgs),
    /// Run the dense verification suites.
    Oracle(OracleArgs),
    /// Write a generated problem as Matrix Market files plus a manifest.
    Generate(GenArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemSource {
    Transport,
    Random,
    Files,
    Care,
    Nash,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FormArg {
    Minimal,
    Raw,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum StrategyArg {
    Leja,
    Hami,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrientationArg {
    Consistent,
    PaperLiteral,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OnOff {
    On,
    Off,
}

#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    #[arg(long, value_enum, default_value_t = ProblemSource::Transport)]
    pub problem: ProblemSource,
    /// Transport size, or `n` of a random problem.
    #[arg(long, default_value_t = 2000)]
    pub n: usize,
    /// Rows of a random problem (defaults to `n`).
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    #[arg(long, default_value_t = 0.1)]
    pub density: f64,
    #[arg(long, default_value_t = 0.5)]
    pub c_alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub c_beta: f64,
    #[arg(long, value_enum, default_value_t = FormArg::Minimal)]
    pub transport_form: FormArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub a: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<PathBuf>,
    #[arg(long)]
    pub lb: Option<PathBuf>,
    /// Defaults to the transpose of `--lb`.
    #[arg(long)]
    pub rb: Option<PathBuf>,
    #[arg(long)]
    pub lc: Option<PathBuf>,
    /// Defaults to the transpose of `--lc`.
    #[arg(long)]
    pub rc: Option<PathBuf>,
    #[arg(long)]
    pub lphi: Option<PathBuf>,
    /// Defaults to the transpose of `--lphi`.
    #[arg(long)]
    pub rphi: Option<PathBuf>,
    /// Negate the matrix read from `--a` (or `--acare`).
    #[arg(long)]
    pub negate_a: bool,
    #[arg(long)]
    pub acare: Option<PathBuf>,
    #[arg(long)]
    pub bcare: Option<PathBuf>,
    #[arg(long)]
    pub ccare: Option<PathBuf>,
    #[arg(long)]
    pub ecare: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = StrategyArg::Leja)]
    pub strategy: StrategyArg,
    #[arg(long, default_value_t = 1)]
    pub s: usize,
    #[arg(long)]
    pub sprime: Option<usize>,
    #[arg(long)]
    pub recompute: bool,
    #[arg(long, value_enum, default_value_t = OrientationArg::Consistent)]
    pub orientation: OrientationArg,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[arg(long, default_value_t = 300)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e12)]
    pub div_threshold: f64,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    pub real_arith: OnOff,
    #[arg(long, default_value = "nare-out")]
    pub out: PathBuf,
    /// Key-value file whose entries override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 2024)]
    pub seed: u64,
    /// Longest shift list.
    #[arg(long, default_value_t = 6)]
    pub t: usize,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Perturb the named suite's reference (harness check).
    #[arg(long)]
    pub perturb: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, default_value = "nare-problem")]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn cfg_err(key: &str, value: &str) -> Error {
    Error::Config(format!("invalid value '{value}' for '{key}'"))
}

fn parse_val<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| cfg_err(key, value))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "on" | "yes" | "1" => Ok(true),
        "false" | "off" | "no" | "0" => Ok(false),
        _ => Err(cfg_err(key, value)),
    }
}

fn parse_enum<T: ValueEnum>(key: &str, value: &str) -> Result<T> {
    T::from_str(value, true).map_err(|_| cfg_err(key, value))
}

fn resolve(base: &Path, value: &str) -> PathBuf {
    let p = PathBuf::from(value);
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl ProblemArgs {
    /// Applies one config entry; `false` when the key is not a problem key.
    fn apply(&mut self, key: &str, value: &str, base: &Path) -> Result<bool> {
        let path = || Some(resolve(base, value));
        match key {
            "problem" => self.problem = parse_enum(key, value)?,
            "n" => self.n = parse_val(key, value)?,
            "m" => self.m = Some(parse_val(key, value)?),
            "p" => self.p = parse_val(key, value)?,
            "q" => self.q = parse_val(key, value)?,
            "density" => self.density = parse_val(key, value)?,
            "c-alpha" => self.c_alpha = parse_val(key, value)?,
            "c-beta" => self.c_beta = parse_val(key, value)?,
            "transport-form" => self.transport_form = parse_enum(key, value)?,
            "seed" => self.seed = parse_val(key, value)?,
            "a" => self.a = path(),
            "d" => self.d = path(),
            "lb" => self.lb = path(),
            "rb" => self.rb = path(),
            "lc" => self.lc = path(),
            "rc" => self.rc = path(),
            "lphi" => self.lphi = path(),
            "rphi" => self.rphi = path(),
            "negate-a" => self.negate_a = parse_bool(key, value)?,
            "acare" => self.acare = path(),
            "bcare" => self.bcare = path(),
            "ccare" => self.ccare = path(),
            "ecare" => self.ecare = path(),
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn manifest(&self, out: &mut BTreeMap<String, String>) {
        let mut put = |k: &str, v: String| {
            out.insert(k.to_string(), v);
        };
        put("problem", enum_name(self.problem));
        put("seed", self.seed.to_string());
        match self.problem {
            ProblemSource::Transport => {
                put("n", self.n.to_string());
                put("c-alpha", self.c_alpha.to_string());
                put("c-beta", self.c_beta.to_string());
                put("transport-form", enum_name(self.transport_form));
            }
            ProblemSource::Random => {
                put("n", self.n.to_string());
                put("m", self.m.unwrap_or(self.n).to_string());
                put("p", self.p.to_string());
                put("q", self.q.to_string());
                put("density", self.density.to_string());
            }
            _ => {
                let paths = [
                    ("a", &self.a),
                    ("d", &self.d),
                    ("lb", &self.lb),
                    ("rb", &self.rb),
                    ("lc", &self.lc),
                    ("rc", &self.rc),
                    ("lphi", &self.lphi),
                    ("rphi", &self.rphi),
                    ("acare", &self.acare),
                    ("bcare", &self.bcare),
                    ("ccare", &self.ccare),
                    ("ecare", &self.ecare),
                ];
                for (k, v) in paths {
                    if let Some(p) = v {
                        put(k, p.display().to_string());
                    }
                }
                put("negate-a", self.negate_a.to_string());
            }
        }
    }
}

fn enum_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value().map(|p| p.get_name().to_string()).unwrap_or_default()
}

fn apply_run_config(args: &mut RunArgs, path: &Path) -> Result<()> {
    let map = io::read_config(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    for (k, v) in &map {
        if args.problem.apply(k, v, &base)? {
            continue;
        }
        match k.as_str() {
            "strategy" => args.strategy = parse_enum(k, v)?,
            "s" => args.s = parse_val(k, v)?,
            "sprime" | "s-prime" => args.sprime = Some(parse_val(k, v)?),
            "recompute" => args.recompute = parse_bool(k, v)?,
            "orientation" => args.orientation = parse_enum(k, v)?,
            "tol" => args.tol = parse_val(k, v)?,
            "max-iter" => args.max_iter = parse_val(k, v)?,
            "div-threshold" => args.div_threshold = parse_val(k, v)?,
            "real-arith" => args.real_arith = parse_enum(k, v)?,
            "out" => args.out = resolve(&base, v),
            _ => return Err(Error::Config(format!("unknown key '{k}'"))),
        }
    }
    Ok(())
}

fn apply_gen_config(args: &mut GenArgs, path: &Path) -> Result<()> {
    let map = io::read_config(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    for (k, v) in &map {
        if args.problem.apply(k, v, &base)? {
            continue;
        }
        match k.as_str() {
            "out" => args.out = resolve(&base, v),
            _ => return Err(Error::Config(format!("unknown key '{k}'"))),
        }
    }
    Ok(())
}

fn need<'a>(p: &'a Option<PathBuf>, flag: &str) -> Result<&'a PathBuf> {
    p.as_ref().ok_or_else(|| Error::Config(format!("--{flag} is required for this problem source")))
}

fn read_dense(p: &Path) -> Result<Mat> {
    Ok(io::read_matrix_market(p)?.to_dense())
}

fn read_operator(p: &Path, negate: bool) -> Result<Operator> {
    let op = io::read_matrix_market(p)?.into_operator();
    Ok(if negate { op.negated() } else { op })
}

fn load_care(args: &ProblemArgs) -> Result<NareProblem> {
    let a = read_operator(need(&args.acare, "acare")?, args.negate_a)?;
    let b = read_dense(need(&args.bcare, "bcare")?)?;
    let c = read_dense(need(&args.ccare, "ccare")?)?;
    let e = args.ecare.as_deref().map(|p| read_operator(p, false)).transpose()?;
    problem::from_care(a, b, c, e)
}

pub fn build_problem(args: &ProblemArgs) -> Result<NareProblem> {
    match args.problem {
        ProblemSource::Transport => {
            let params = TransportParams::random(args.n, args.c_alpha, args.c_beta, args.seed);
            let form = match args.transport_form {
                FormArg::Minimal => TransportForm::Minimal,
                FormArg::Raw => TransportForm::Raw,
            };
            gen::transport_problem(&params, form)
        }
        ProblemSource::Random => {
            gen::gen_random_stable(args.m.unwrap_or(args.n), args.n, args.p, args.q, args.density, args.seed)
        }
        ProblemSource::Files => {
            let a = read_operator(need(&args.a, "a")?, args.negate_a)?;
            let d = read_operator(need(&args.d, "d")?, false)?;
            let lb = read_dense(need(&args.lb, "lb")?)?;
            let rb = match &args.rb {
                Some(p) => read_dense(p)?,
                None => lb.transpose(),
            };
            let lc = read_dense(need(&args.lc, "lc")?)?;
            let rc = match &args.rc {
                Some(p) => read_dense(p)?,
                None => lc.transpose(),
            };
            let problem = NareProblem::new(a, d, lb, rb, lc, rc)?;
            match &args.lphi {
                Some(p) => {
                    let lphi = read_dense(p)?;
                    let rphi = match &args.rphi {
                        Some(r) => read_dense(r)?,
                        None => lphi.transpose(),
                    };
                    problem.with_phi(lphi, rphi)
                }
                None => Ok(problem),
            }
        }
        ProblemSource::Care => load_care(args),
        ProblemSource::Nash => gen::gen_nash(&load_care(args)?, args.seed),
    }
}

pub fn build_strategy(args: &RunArgs) -> Result<ShiftStrategy> {
    if args.s == 0 {
        return Err(Error::Config("--s must be at least 1".into()));
    }
    let mut s = match args.strategy {
        StrategyArg::Leja => ShiftStrategy::leja(args.s, args.recompute),
        StrategyArg::Hami => ShiftStrategy::hamiltonian(args.s, args.recompute),
    };
    if let Some(sp) = args.sprime {
        if sp == 0 {
            return Err(Error::Config("--sprime must be at least 1".into()));
        }
        s.s_prime = Some(sp);
    }
    Ok(s.with_orientation(orientation(args.orientation)))
}

fn orientation(o: OrientationArg) -> Orientation {
    match o {
        OrientationArg::Consistent => Orientation::Consistent,
        OrientationArg::PaperLiteral => Orientation::PaperLiteral,
    }
}

pub fn build_options(args: &RunArgs) -> Result<SolveOptions> {
    if !(args.tol > 0.0) || !(args.div_threshold > 0.0) {
        return Err(Error::Config("--tol and --div-threshold must be positive".into()));
    }
    Ok(SolveOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        div_threshold: args.div_threshold,
        real_arith: args.real_arith == OnOff::On,
    })
}

fn run_manifest(args: &RunArgs) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    args.problem.manifest(&mut m);
    m.insert("strategy".into(), enum_name(args.strategy));
    m.insert("s".into(), args.s.to_string());
    if let Some(sp) = args.sprime {
        m.insert("sprime".into(), sp.to_string());
    }
    m.insert("recompute".into(), args.recompute.to_string());
    m.insert("orientation".into(), enum_name(args.orientation));
    m.insert("tol".into(), format!("{:e}", args.tol));
    m.insert("max-iter".into(), args.max_iter.to_string());
    m.insert("div-threshold".into(), format!("{:e}", args.div_threshold));
    m.insert("real-arith".into(), enum_name(args.real_arith));
    m
}

fn manifest_text(entries: &BTreeMap<String, String>, results: &[(&str, String)]) -> String {
    let mut s = String::new();
    for (k, v) in entries {
        let _ = writeln!(s, "{k} = {v}");
    }
    for (k, v) in results {
        let _ = writeln!(s, "# {k} = {v}");
    }
    s
}

fn outcome_summary(o: &SolveOutcome) -> Vec<(&'static str, String)> {
    let h = &o.state.history;
    let sum = |f: fn(&radi::ConvergenceRecord) -> f64| h.iter().map(f).sum::<f64>();
    vec![
        ("cause", o.cause.as_str().to_string()),
        ("iter", o.state.iter.to_string()),
        ("dim", o.state.lx.ncols().to_string()),
        ("nu", format!("{:e}", o.state.nu)),
        ("total_s", format!("{:.6}", o.seconds)),
        ("t_shift_s", format!("{:.6}", sum(|r| r.t_shift_s))),
        ("t_solve_s", format!("{:.6}", sum(|r| r.t_solve_s))),
        ("t_other_s", format!("{:.6}", sum(|r| r.t_other_s))),
        ("factorizations", o.factorizations.to_string()),
    ]
}

fn solve_cmd(mut args: RunArgs) -> Result<i32> {
    if let Some(c) = args.config.clone() {
        apply_run_config(&mut args, &c)?;
    }
    let strategy = build_strategy(&args)?;
    let options = build_options(&args)?;
    let problem = build_problem(&args.problem)?;
    let outcome = radi::solve(&problem, &strategy, &options)?;
    fs::create_dir_all(&args.out)?;
    io::write_convergence_csv(&outcome.state.history, &args.out.join("convergence.csv"))?;
    io::write_matrix_market_array(&outcome.state.lx, &args.out.join("lx.mtx"))?;
    io::write_matrix_market_array(&outcome.state.rx, &args.out.join("rx.mtx"))?;
    let summary = outcome_summary(&outcome);
    fs::write(args.out.join("manifest.txt"), manifest_text(&run_manifest(&args), &summary))?;
    let line: Vec<String> = summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("{} {}", strategy.label(), line.join(" "));
    Ok(exit_code(outcome.cause))
}

fn bench_cmd(mut args: RunArgs) -> Result<i32> {
    if let Some(c) = args.config.clone() {
        apply_run_config(&mut args, &c)?;
    }
    let options = build_options(&args)?;
    let problem = build_problem(&args.problem)?;
    fs::create_dir_all(&args.out)?;
    let mut table = String::from("strategy,iter,dim,total_s,t_shift_s,t_solve_s,t_other_s,nu,cause\n");
    println!("{:<10} {:>5} {:>5} {:>9} {:>9} {:>9} {:>9} {:>10}  cause", "strategy", "iter", "dim", "total_s", "t_shift", "t_solve", "t_other", "nu");
    for strat in ShiftStrategy::grid() {
        let strat = strat.with_orientation(orientation(args.orientation));
        let label = strat.label();
        let file = format!("{}.csv", label.replace(' ', "_"));
        let start = Instant::now();
        let row = match radi::solve(&problem, &strat, &options) {
            Ok(o) => {
                io::write_convergence_csv(&o.state.history, &args.out.join(&file))?;
                let h = &o.state.history;
                let sum = |f: fn(&radi::ConvergenceRecord) -> f64| h.iter().map(f).sum::<f64>();
                (
                    o.state.iter,
                    o.state.lx.ncols(),
                    o.seconds,
                    sum(|r| r.t_shift_s),
                    sum(|r| r.t_solve_s),
                    sum(|r| r.t_other_s),
                    o.state.nu,
                    o.cause.as_str().to_string(),
                )
            }
            Err(e) => (0, 0, start.elapsed().as_secs_f64(), 0.0, 0.0, 0.0, f64::NAN, format!("error: {e}")),
        };
        let _ = writeln!(
            table,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:e},{}",
            label,
            row.0,
            row.1,
            row.2,
            row.3,
            row.4,
            row.5,
            row.6,
            row.7.replace(',', ";")
        );
        println!(
            "{:<10} {:>5} {:>5} {:>9.4} {:>9.4} {:>9.4} {:>9.4} {:>10.3e}  {}",
            label, row.0, row.1, row.2, row.3, row.4, row.5, row.6, row.7
        );
    }
    fs::write(args.out.join("summary.csv"), table)?;
    fs::write(args.out.join("manifest.txt"), manifest_text(&run_manifest(&args), &[]))?;
    Ok(EXIT_CONVERGED)
}

fn oracle_cmd(args: OracleArgs) -> Result<i32> {
    let cfg = OracleConfig { seed: args.seed, trials: args.trials, t: args.t, perturb: args.perturb };
    let reports = verify::run_suites(&cfg)?;
    let mut failed = 0;
    for r in &reports {
        println!("{}", r.line());
        if !r.passed {
            failed += 1;
        }
    }
    println!("{} of {} suites passed", reports.len() - failed, reports.len());
    Ok(if failed == 0 { EXIT_CONVERGED } else { EXIT_USAGE })
}

fn write_operator(op: &Operator, path: &Path) -> Result<()> {
    match (op.storage(), op.is_transposed()) {
        (Storage::Sparse(a), false) => io::write_matrix_market_coordinate(a, path),
        (Storage::Sparse(a), true) => io::write_matrix_market_coordinate(&a.transpose(), path),
        (Storage::Diagonal(d), _) => {
            let trip: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
            io::write_matrix_market_coordinate(&Csc::from_triplets(d.len(), d.len(), &trip)?, path)
        }
        (Storage::Dense(_), _) => io::write_matrix_market_array(&op.to_dense(), path),
    }
}

fn generate_cmd(mut args: GenArgs) -> Result<i32> {
    if let Some(c) = args.config.clone() {
        apply_gen_config(&mut args, &c)?;
    }
    let problem = build_problem(&args.problem)?;
    if problem.has_mass() || problem.la.is_some() {
        return Err(Error::Config("generate writes plain and strengthened problems only".into()));
    }
    fs::create_dir_all(&args.out)?;
    let mut entries = BTreeMap::new();
    entries.insert("problem".to_string(), "files".to_string());
    let mut file = |key: &str, name: &str| {
        entries.insert(key.to_string(), name.to_string());
        args.out.join(name)
    };
    write_operator(&problem.a, &file("a", "a.mtx"))?;
    write_operator(&problem.d, &file("d", "d.mtx"))?;
    let transport = args.problem.problem == ProblemSource::Transport;
    io::write_matrix_market_array(&problem.lb, &file("lb", "lb.mtx"))?;
    io::write_matrix_market_array(&problem.lc, &file("lc", "lc.mtx"))?;
    if !transport {
        io::write_matrix_market_array(&problem.rb, &file("rb", "rb.mtx"))?;
        io::write_matrix_market_array(&problem.rc, &file("rc", "rc.mtx"))?;
    }
    if let Some(lphi) = &problem.lphi {
        io::write_matrix_market_array(lphi, &file("lphi", "lphi.mtx"))?;
        if !transport {
            if let Some(rphi) = &problem.rphi {
                io::write_matrix_market_array(rphi, &file("rphi", "rphi.mtx"))?;
            }
        }
    }
    let mut source = BTreeMap::new();
    args.problem.manifest(&mut source);
    let notes: Vec<(&str, String)> = source.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
    fs::write(args.out.join("manifest.txt"), manifest_text(&entries, &notes))?;
    println!("wrote {} files to {}", entries.len(), args.out.display());
    Ok(EXIT_CONVERGED)
}

pub fn run(cli: Cli) -> i32 {
    let res = match cli.command {
        Command::Solve(a) => solve_cmd(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Generate(a) => generate_cmd(a),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

/// Parses `argv` and runs; usage errors map to exit code 1.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(argv) {
        Ok(cli) => run(cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_USAGE
            } else {
                EXIT_CONVERGED
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_distinct() {
        let codes = [
            exit_code(StopCause::Converged),
            exit_code(StopCause::MaxIterations),
            exit_code(StopCause::Diverged),
            exit_code(StopCause::ShiftStarvation),
            EXIT_USAGE,
        ];
        assert_eq!(codes, [0, 2, 3, 4, 1]);
    }

    #[test]
    fn defaults_match_stopping_rule() {
        let cli = Cli::try_parse_from(["nare", "solve"]).unwrap();
        let Command::Solve(a) = cli.command else { panic!() };
        let o = build_options(&a).unwrap();
        assert_eq!((o.tol, o.max_iter, o.div_threshold, o.real_arith), (1e-12, 300, 1e12, true));
        assert_eq!(build_strategy(&a).unwrap(), ShiftStrategy::default());
    }

    #[test]
    fn config_overrides_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "strategy = hami\ns = 2\nrecompute = true\ntol = 1e-9\norientation = paper-literal\nn = 7\n").unwrap();
        let cli = Cli::try_parse_from(["nare", "solve", "--strategy", "leja", "--tol", "1e-3", "--config", cfg.to_str().unwrap()]).unwrap();
        let Command::Solve(mut a) = cli.command else { panic!() };
        apply_run_config(&mut a, &cfg).unwrap();
        assert_eq!(a.strategy, StrategyArg::Hami);
        assert_eq!((a.s, a.recompute, a.tol, a.problem.n), (2, true, 1e-9, 7));
        assert_eq!(build_strategy(&a).unwrap().label(), "hami c 2");
        fs::write(&cfg, "bogus = 1\n").unwrap();
        assert!(matches!(apply_run_config(&mut a, &cfg), Err(Error::Config(_))));
    }
}
