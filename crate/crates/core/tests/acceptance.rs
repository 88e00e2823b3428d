//! Acceptance harness: one PASS/FAIL line per criterion.

use std::time::Instant;

use nare::dense;
use nare::gen::{self, TransportForm, TransportParams};
use nare::oracle;
use nare::radi::{self, ConvergenceRecord};
use nare::solver::ShiftSolver;
use nare::verify::{self, OracleConfig};
use nare::{NareProblem, Orientation, ShiftPair, ShiftStrategy, SolveOptions, SolveOutcome, StopCause};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Line {
    id: usize,
    passed: bool,
    detail: String,
}

fn line(id: usize, passed: bool, detail: impl Into<String>) -> Line {
    Line { id, passed, detail: detail.into() }
}

fn run(problem: &NareProblem, strategy: &ShiftStrategy, options: &SolveOptions) -> (Option<SolveOutcome>, Vec<ShiftPair>, f64) {
    let mut shifts = Vec::new();
    let start = Instant::now();
    let mut sink = |r: &ConvergenceRecord| shifts.push(r.shift);
    let out = radi::solve_with(problem, strategy, options, &mut sink).ok();
    (out, shifts, start.elapsed().as_secs_f64())
}

fn transport(n: usize, form: TransportForm) -> NareProblem {
    gen::transport_problem(&TransportParams::random(n, 0.5, 0.5, 1), form).expect("transport problem")
}

fn criterion_1() -> Line {
    let problem = transport(20_000, TransportForm::Minimal);
    let (out, _, secs) = run(&problem, &ShiftStrategy::leja(1, true), &SolveOptions::default());
    match out {
        Some(o) => {
            let ok = o.cause == StopCause::Converged && o.state.iter <= 100 && o.state.nu <= 1e-12 && secs <= 10.0;
            line(1, ok, format!("n=20000 leja c 1: iter={} dim={} nu={:.2e} {:.3}s", o.state.iter, o.state.lx.ncols(), o.state.nu, secs))
        }
        None => line(1, false, "solve returned an error"),
    }
}

struct GridRow {
    label: String,
    cause: Option<StopCause>,
    iter: usize,
    nu: f64,
    shifts: Vec<ShiftPair>,
}

fn grid(problem: &NareProblem, orientation: Orientation) -> Vec<GridRow> {
    ShiftStrategy::grid()
        .into_iter()
        .map(|s| {
            let s = s.with_orientation(orientation);
            let (out, shifts, _) = run(problem, &s, &SolveOptions::default());
            GridRow {
                label: s.label(),
                cause: out.as_ref().map(|o| o.cause),
                iter: out.as_ref().map_or(0, |o| o.state.iter),
                nu: out.as_ref().map_or(f64::NAN, |o| o.state.nu),
                shifts,
            }
        })
        .collect()
}

fn grid_ok(rows: &[GridRow]) -> bool {
    rows.iter().all(|r| r.cause == Some(StopCause::Converged) && r.nu <= 1e-12 && r.iter <= 150)
}

fn same_sequence(a: &[ShiftPair], b: &[ShiftPair]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let sc = 1.0 + x.alpha.norm().max(x.beta.norm());
            ((x.alpha - y.alpha).norm().max((x.beta - y.beta).norm())) / sc
        })
        .fold(0.0, f64::max)
}

fn criterion_2(rows: &[GridRow]) -> Line {
    let iters: Vec<String> = rows.iter().map(|r| format!("{}:{}", r.label, r.iter)).collect();
    let pick = |l: &str| rows.iter().find(|r| r.label == l).map(|r| r.shifts.as_slice()).unwrap_or(&[]);
    let base = pick("leja 1");
    let dev = ["leja c 1", "hami 1", "hami c 1"].iter().map(|l| same_sequence(base, pick(l))).fold(0.0, f64::max);
    let ok = grid_ok(rows) && !base.is_empty() && dev <= 1e-12;
    line(2, ok, format!("n=2000 grid [{}]; (1,1) shift sequences max dev {:.1e}", iters.join(" "), dev))
}

fn suite_line(id: usize, reports: &[&verify::SuiteReport]) -> Line {
    let ok = reports.iter().all(|r| r.passed);
    let detail: Vec<String> = reports.iter().map(|r| format!("{} {:.1e}/{:.0e} n={}", r.name, r.max_dev, r.tol, r.trials)).collect();
    line(id, ok, detail.join("; "))
}

fn criterion_3(cfg: &OracleConfig) -> Line {
    let (eng, _) = verify::suite_engine(cfg, 50, 20).expect("engine suite");
    let (cf, res) = verify::suite_closed_forms(cfg, 50).expect("closed-form suite");
    suite_line(3, &[&eng, &cf, &res])
}

fn criterion_4() -> Line {
    let options = SolveOptions { max_iter: 60, ..SolveOptions::default() };
    let (mut worst_res, mut worst_err, mut worst_it) = (0.0f64, 0.0f64, 0usize);
    let mut failures = 0;
    for seed in 0..20u64 {
        let problem = gen::gen_random_stable(30, 30, 2, 2, 0.2, seed).expect("random problem");
        let dn = problem.to_dense_plain().expect("dense");
        let ok = (|| {
            let o = radi::solve(&problem, &ShiftStrategy::default(), &options).ok()?;
            let x = radi::assemble_dense(&o.state).ok()?;
            let res = &x * &dn.c * &x - &x * &dn.d - &dn.a * &x + &dn.b;
            let rel_res = res.norm() / dn.b.norm();
            let xs = oracle::schur_stabilizing_solution(&problem, &ShiftPair::real(-1.0, -1.0)).ok()?.x_star;
            let err = (&x - &xs).norm() / xs.norm();
            worst_res = worst_res.max(rel_res);
            worst_err = worst_err.max(err);
            worst_it = worst_it.max(o.state.iter);
            Some(o.cause == StopCause::Converged && rel_res <= 1e-10 && err <= 1e-8)
        })();
        if ok != Some(true) {
            failures += 1;
        }
    }
    line(
        4,
        failures == 0,
        format!("20 problems 30x30: max rel residual {worst_res:.1e}, max ||X-X_schur||/||X_schur|| {worst_err:.1e}, max iter {worst_it}, failures {failures}"),
    )
}

fn criterion_5() -> Line {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let (mut dev_x, mut dev_f, mut im_res) = (0.0f64, 0.0f64, 0.0f64);
    let mut cases = 0;
    let mut failures = 0;
    for _ in 0..20 {
        let problem = verify::random_dense_problem(rng.random(), 20, 3);
        let solver = ShiftSolver::new(&problem);
        for _ in 0..10 {
            let alpha = nare::C64::new(rng.random_range(0.5..1.5), rng.random_range(0.2..1.0));
            let beta = nare::C64::new(rng.random_range(0.5..1.5), rng.random_range(0.2..1.0) * if rng.random::<bool>() { 1.0 } else { -1.0 });
            let shift = ShiftPair::user(alpha, beta);
            let reference = oracle::fixed_point_run(&problem, &[shift, shift.conj()], 2, None);
            let mut real_state = radi::initialize(&problem).expect("init");
            let mut cplx_state = real_state.clone();
            let a = radi::step_complex_pair(&problem, &solver, &mut real_state, &shift);
            let b = radi::step_complex_pair_fallback(&problem, &solver, &mut cplx_state, &shift);
            let (Ok(xr), Ok(()), Ok(())) = (reference, a, b) else {
                failures += 1;
                continue;
            };
            let xref = &xr[1];
            let scale = dense::cnorm_fro(xref);
            im_res = im_res.max(dense::max_abs_im(xref) / scale);
            let x = radi::assemble_dense(&real_state).expect("assemble");
            let xc = radi::assemble_dense(&cplx_state).expect("assemble");
            dev_x = dev_x.max((&x - dense::re(xref)).norm() / scale).max((&x - &xc).norm() / xc.norm());
            let lr = &real_state.lb * &real_state.rb;
            let lc = &cplx_state.lb * &cplx_state.rb;
            dev_f = dev_f.max((&lr - &lc).norm() / lc.norm().max(f64::MIN_POSITIVE));
            let finite = real_state.lx.iter().chain(real_state.rx.iter()).all(|v| v.is_finite());
            if !finite || real_state.iter != 2 || real_state.lx.ncols() != 2 * problem.p() {
                failures += 1;
            }
            cases += 1;
        }
    }
    let ok = failures == 0 && cases == 200 && dev_x <= 1e-10 && dev_f <= 1e-10 && im_res <= 1e-12;
    line(5, ok, format!("{cases} cases: X dev {dev_x:.1e}, residual factor dev {dev_f:.1e}, reference imag residue {im_res:.1e}, failures {failures}"))
}

fn criterion_6(cfg: &OracleConfig) -> Line {
    let r = verify::suite_error_formula(cfg, 60).expect("error formula");
    line(
        6,
        r.report.passed,
        format!("|X_60-(2+sqrt3)|={:.1e}, measured rate {:.4} vs rho(R)rho(S) {:.4}", r.final_error, r.measured_rate, r.predicted_rate),
    )
}

fn criterion_7(cfg: &OracleConfig) -> Line {
    let r = verify::suite_identities(cfg, 100, 20).expect("identities");
    suite_line(7, &[&r])
}

fn summary(rows: &[GridRow]) -> String {
    let conv = rows.iter().filter(|r| r.cause == Some(StopCause::Converged)).count();
    let bad: Vec<String> = rows
        .iter()
        .filter(|r| r.cause != Some(StopCause::Converged))
        .map(|r| format!("{}={}", r.label, r.cause.map_or("error", |c| c.as_str())))
        .collect();
    if bad.is_empty() {
        format!("{conv}/12 converged")
    } else {
        format!("{conv}/12 converged, {}", bad.join(" "))
    }
}

fn criterion_8(default_rows: &[GridRow], c1: &Line) -> Line {
    let minimal = transport(2000, TransportForm::Minimal);
    let raw = transport(2000, TransportForm::Raw);
    let literal = grid(&minimal, Orientation::PaperLiteral);
    let raw_default = grid(&raw, Orientation::Consistent);
    let raw_literal = grid(&raw, Orientation::PaperLiteral);
    let default_ok = c1.passed && grid_ok(default_rows);
    let report = [
        format!("consistent/minimal: {}", summary(default_rows)),
        format!("paper-literal/minimal: {}", summary(&literal)),
        format!("consistent/raw: {}", summary(&raw_default)),
        format!("paper-literal/raw: {}", summary(&raw_literal)),
    ];
    line(8, default_ok, format!("default orientation=consistent; {}", report.join(" | ")))
}

fn criterion_9(cfg: &OracleConfig) -> Line {
    let (_, imp) = verify::suite_engine(&OracleConfig { seed: cfg.seed ^ 0x99, ..cfg.clone() }, 50, 30).expect("engine suite");
    suite_line(9, &[&imp])
}

fn main() {
    let start = Instant::now();
    let cfg = OracleConfig::default();
    let mut lines = Vec::new();
    let c1 = criterion_1();
    lines.push(c1);
    let rows = grid(&transport(2000, TransportForm::Minimal), Orientation::Consistent);
    lines.push(criterion_2(&rows));
    lines.push(criterion_3(&cfg));
    lines.push(criterion_4());
    lines.push(criterion_5());
    lines.push(criterion_6(&cfg));
    lines.push(criterion_7(&cfg));
    let c8 = criterion_8(&rows, &lines[0]);
    lines.push(c8);
    lines.push(criterion_9(&cfg));
    lines.sort_by_key(|l| l.id);
    let mut failed = 0;
    for l in &lines {
        println!("{} criterion {}: {}", if l.passed { "PASS" } else { "FAIL" }, l.id, l.detail);
        if !l.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {} criteria passed in {:.1}s", lines.len() - failed, lines.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
