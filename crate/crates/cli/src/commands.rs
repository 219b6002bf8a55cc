use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use slp_core::assembly::{assemble_gtilde_singular, assemble_qhat_regular, AssemblyPath};
use slp_core::basis::ProblemSpec;
use slp_core::correction::CorrectionConstants;
use slp_core::eigensolve;
use slp_core::expansion::FunctionExpr;
use slp_core::pipeline::{self, kappa_ratio_study, ConvergenceTable, Pipeline, Solution};
use slp_core::validation::{self, max_abs_diff, Oracle, OracleBasis, Order, ORACLE_NODES};
use slp_core::SlpError;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{Cell, Table};

const DEFAULT_N: usize = 64;
const DEFAULT_M: usize = 5;

/// Parallelism cap: `SLP_THREADS` if set, otherwise the available cores.
pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var("SLP_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Usage(format!("SLP_THREADS must be a positive integer, got `{v}`"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn pipeline(config: &RunConfig, spec: &ProblemSpec) -> Result<Pipeline, CliError> {
    Ok(match config.run.projection_tol {
        Some(tol) => Pipeline::with_tolerance(spec, tol)?,
        None => Pipeline::new(spec)?,
    })
}

fn corrected(config: &RunConfig) -> bool {
    config.run.correction.unwrap_or(true)
}

fn mu_or_lambda(config: &RunConfig, sol: &Solution, k: usize) -> f64 {
    if corrected(config) {
        sol.correction.values[k].mu
    } else {
        sol.eigen.pairs[k].lambda
    }
}

fn order_cell(o: Option<&Order>) -> Cell {
    match o {
        Some(Order::Value(v)) => Cell::Float(*v),
        Some(Order::Saturated) => Cell::Text("saturated".into()),
        None => Cell::Empty,
    }
}

fn log10_rel(value: f64, reference: f64) -> f64 {
    ((value - reference).abs() / reference.abs().max(f64::MIN_POSITIVE)).log10()
}

pub fn classify(config: &RunConfig) -> Result<Table, CliError> {
    let spec = config.spec()?;
    let class = spec.classify();
    if let Err(e) = spec.validate() {
        eprintln!("endpoint class: {}", class.label());
        return Err(e.into());
    }
    let p = pipeline(config, &spec)?;
    let constants = p.constants();
    let mut t = Table::new(&["key", "value"]);
    t.push(vec!["endpoint_class".into(), class.label().into()]);
    t.push(vec!["gamma".into(), spec.gamma.into()]);
    t.push(vec!["g_left".into(), spec.g_left().into()]);
    t.push(vec!["correction".into(), constants.label().into()]);
    t.push(vec!["order".into(), constants.order().into()]);
    if let CorrectionConstants::None { reason } = constants {
        t.push(vec!["note".into(), reason.as_str().into()]);
    }
    Ok(t)
}

pub fn solve(config: &RunConfig) -> Result<Table, CliError> {
    let spec = config.spec()?;
    let n = config.run.n.unwrap_or(DEFAULT_N);
    let m = config.run.m.unwrap_or(DEFAULT_M.min(n));
    if m == 0 || m > n {
        return Err(CliError::Usage(format!("need 1 <= M <= N, got M = {m}, N = {n}")));
    }
    let p = pipeline(config, &spec)?;
    let sol = p.solve(n, m)?;
    for w in &sol.eigen.warnings {
        eprintln!("warning: {w}");
    }
    if config.run.plot.unwrap_or(false) {
        let reference_n = config
            .run
            .reference_n
            .ok_or_else(|| CliError::Usage("plot output needs run.reference_n".into()))?;
        let reference = p.solve(reference_n, m)?;
        let mut t = Table::new(&["k", "log10_rel_error", "corrected"]);
        for k in 0..m {
            let r = mu_or_lambda(config, &reference, k);
            t.push(vec![(k + 1).into(), log10_rel(sol.eigen.pairs[k].lambda, r).into(), false.into()]);
            if corrected(config) {
                t.push(vec![(k + 1).into(), log10_rel(sol.correction.values[k].mu, r).into(), true.into()]);
            }
        }
        return Ok(t);
    }
    let mut t = Table::new(&["k", "lambda", "mu", "epsilon_bar", "low_confidence"]);
    for (k, (pair, v)) in sol.eigen.pairs.iter().zip(&sol.correction.values).enumerate() {
        let (mu, eps) = if corrected(config) { (v.mu, v.epsilon_bar) } else { (pair.lambda, 0.0) };
        t.push(vec![(k + 1).into(), pair.lambda.into(), mu.into(), eps.into(), v.low_confidence.into()]);
    }
    Ok(t)
}

/// Solve every size on up to `threads` workers, each with its own pipeline.
fn solve_sizes(
    config: &RunConfig,
    spec: &ProblemSpec,
    sizes: &[usize],
    m: usize,
    threads: usize,
) -> Result<Vec<Solution>, CliError> {
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(sizes[i]));
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Solution, CliError>>>> =
        Mutex::new((0..sizes.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.min(sizes.len()).max(1) {
            scope.spawn(|| {
                let p = match pipeline(config, spec) {
                    Ok(p) => Some(p),
                    Err(e) => {
                        results.lock().expect("results lock")[order[0]] = Some(Err(e));
                        None
                    }
                };
                loop {
                    let slot = next.fetch_add(1, Ordering::Relaxed);
                    let Some(&i) = order.get(slot) else { break };
                    let r = match &p {
                        Some(p) => p.solve(sizes[i], m).map_err(CliError::from),
                        None => Err(CliError::Usage("pipeline setup failed".into())),
                    };
                    results.lock().expect("results lock")[i] = Some(r);
                }
            });
        }
    });
    results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every size solved"))
        .collect()
}

pub fn converge(config: &RunConfig, threads: usize) -> Result<Table, CliError> {
    let spec = config.spec()?;
    spec.validate()?;
    let ns = config
        .run
        .n_list
        .clone()
        .ok_or_else(|| CliError::Usage("converge needs run.n_list".into()))?;
    pipeline::check_doubling(&ns).map_err(|e| CliError::Usage(e.to_string()))?;
    let ks = config.run.k_list.clone().unwrap_or_else(|| vec![1]);
    let m = ks.iter().copied().max().unwrap_or(1);
    if ks.contains(&0) || m > ns[0] {
        return Err(CliError::Usage(format!("k-list must lie in 1..={}", ns[0])));
    }
    let mut sizes = pipeline::convergence_sizes(&ns)?;
    let plot = config.run.plot.unwrap_or(false);
    if plot {
        if ks.len() != 1 {
            return Err(CliError::Usage("plot output needs exactly one k in run.k_list".into()));
        }
        if let Some(r) = config.run.reference_n {
            sizes.push(r);
        }
    }
    let mut solutions = solve_sizes(config, &spec, &sizes, m, threads)?;
    if plot {
        let k = ks[0] - 1;
        let reference = mu_or_lambda(config, solutions.last().expect("reference solve"), k);
        if config.run.reference_n.is_some() {
            solutions.pop();
        }
        let mut t = Table::new(&["n", "log10_rel_error", "corrected"]);
        for s in solutions.iter().take(ns.len()) {
            t.push(vec![s.n.into(), log10_rel(s.eigen.pairs[k].lambda, reference).into(), false.into()]);
            if corrected(config) {
                t.push(vec![s.n.into(), log10_rel(s.correction.values[k].mu, reference).into(), true.into()]);
            }
        }
        return Ok(t);
    }
    let table = ConvergenceTable::from_solutions(&ns, &ks, &solutions)?;
    let mut t = Table::new(&["n", "k", "delta_lambda", "order_lambda", "delta_mu", "order_mu"]);
    for col in &table.columns {
        for (i, &n) in ns.iter().enumerate() {
            let (dm, om) = if corrected(config) {
                (Cell::Float(col.delta_mu[i]), order_cell(col.order_mu.get(i)))
            } else {
                (Cell::Empty, Cell::Empty)
            };
            t.push(vec![
                n.into(),
                col.k.into(),
                col.delta_lambda[i].into(),
                order_cell(col.order_lambda.get(i)),
                dm,
                om,
            ]);
        }
    }
    Ok(t)
}

struct Checks {
    table: Table,
    failed: usize,
}

impl Checks {
    fn new() -> Self {
        Self {
            table: Table::new(&["check", "value", "tolerance", "pass"]),
            failed: 0,
        }
    }

    /// Record `value <= tolerance`.
    fn at_most(&mut self, name: &str, value: f64, tolerance: f64) {
        self.record(name, value, tolerance, value <= tolerance);
    }

    fn record(&mut self, name: &str, value: f64, tolerance: f64, pass: bool) {
        self.failed += usize::from(!pass);
        self.table
            .push(vec![name.into(), value.into(), tolerance.into(), pass.into()]);
    }
}

fn is_constant(e: &FunctionExpr) -> Option<f64> {
    let v = e.eval(0.0);
    [-1.0, -0.5, 0.3, 1.0]
        .iter()
        .all(|&x| e.eval(x) == v)
        .then_some(v)
}

pub fn validate(config: &RunConfig) -> Result<(Table, usize), CliError> {
    let spec = config.spec()?;
    let p = pipeline(config, &spec)?;
    let mut checks = Checks::new();

    let small = 8;
    let oracle = Oracle::new(&spec, ORACLE_NODES)?;
    let mut system = p.system(small)?;
    let pot = p.potential();
    let (inner, reference) = match system.path {
        AssemblyPath::Regular => (
            assemble_qhat_regular(small, &pot.f, &pot.g, pot.gamma)?.0,
            oracle.matrix(small + 2, OracleBasis::Legendre)?,
        ),
        AssemblyPath::Singular => (
            assemble_gtilde_singular(small, &pot.g, pot.gamma)?.0,
            oracle.matrix(small + 1, OracleBasis::Jacobi01)?,
        ),
    };
    let scale = reference.max_abs().max(1.0);
    checks.at_most("oracle_inner", max_abs_diff(&inner, &reference), 1e-10 * scale);
    if config.run.corrupt_q.unwrap_or(false) {
        let bump = 1e-6 * system.q.max_abs().max(1.0);
        system.q.add_to(0, 1, bump);
        system.q.add_to(1, 0, bump);
    }
    let q_ref = oracle.q_matrix(small, &system.basis);
    checks.at_most("oracle_q", max_abs_diff(&system.q, &q_ref), 1e-10 * q_ref.max_abs().max(1.0));
    let gram = validation::gram_by_quadrature(&system.basis, small)?;
    checks.at_most("oracle_b", max_abs_diff(&system.b.to_dense(), &gram), 1e-12);

    let n = config.run.n.unwrap_or(DEFAULT_N);
    let m = config.run.m.unwrap_or(DEFAULT_M.min(n));
    if m == 0 || m > n {
        return Err(CliError::Usage(format!("need 1 <= M <= N, got M = {m}, N = {n}")));
    }
    let system = p.system(n)?;
    let eigen = eigensolve::solve(&system, m)?;
    let (mut residual, mut ortho): (f64, f64) = (0.0, 0.0);
    for (i, a) in eigen.pairs.iter().enumerate() {
        residual = residual.max(eigensolve::relative_residual(&system, a));
        for (j, b) in eigen.pairs.iter().enumerate() {
            let want = if i == j { 1.0 } else { 0.0 };
            ortho = ortho.max((system.b.inner(&a.zeta, &b.zeta) - want).abs());
        }
    }
    checks.at_most("residual", residual, 1e-10);
    checks.at_most("b_orthonormality", ortho, 1e-10);

    let free = spec.f.is_literal_zero() && spec.g.is_literal_zero();
    if free {
        if let Ok(r) = validation::reference_trig(&spec.bc_left, &spec.bc_right, m) {
            let worst = eigen
                .pairs
                .iter()
                .zip(&r.eigenvalues)
                .map(|(a, w)| if *w == 0.0 { a.lambda.abs() } else { (a.lambda - w).abs() / w })
                .fold(0.0, f64::max);
            checks.at_most("reference_trig", worst, 1e-10);
        }
    }
    let bessel = spec.f.is_literal_zero()
        && spec.gamma == 2.0
        && spec.bc_left.is_dirichlet()
        && spec.bc_right.is_dirichlet();
    if let (true, Some(c)) = (bessel, is_constant(&spec.g)) {
        bessel_checks(&p, c, m, &mut checks)?;
    }
    if let Some(kn) = &config.run.kappa_n {
        let n_ref = config.run.kappa_ref.unwrap_or(4 * kn.iter().copied().max().unwrap_or(1));
        let rho = slp_core::correction::indicial_root(spec.g_left());
        let kappa = (2.0 * rho - 1.0) / (rho * rho);
        let ratios = kappa_ratio_study(&p, kn, n_ref, 1)?;
        let last = ratios.last().map_or(f64::NAN, |r| r.ratio);
        checks.at_most("kappa_ratio", (last - kappa).abs() / kappa, 0.05);
    }
    let failed = checks.failed;
    Ok((checks.table, failed))
}

fn bessel_checks(p: &Pipeline, c: f64, m: usize, checks: &mut Checks) -> Result<(), CliError> {
    let reference = match validation::reference_bessel(c, m) {
        Ok(r) => r.eigenvalues,
        Err(SlpError::Unsupported(msg)) => {
            eprintln!("note: Bessel reference skipped: {msg}");
            return Ok(());
        }
        Err(e) => return Err(e.into()),
    };
    let target = 4.0 * slp_core::correction::indicial_root(c) - 2.0;
    let errors = |n: usize| -> Result<(Vec<f64>, Vec<f64>), CliError> {
        let s = p.solve(n, m)?;
        Ok((
            s.lambdas().iter().zip(&reference).map(|(l, r)| (l - r).abs()).collect(),
            s.mus().iter().zip(&reference).map(|(l, r)| (l - r).abs()).collect(),
        ))
    };
    let (e1, _) = errors(255)?;
    let (e2, _) = errors(511)?;
    let worst = e1
        .iter()
        .zip(&e2)
        .map(|(a, b)| ((a / b).log2() - target).abs())
        .fold(0.0, f64::max);
    checks.at_most("bessel_order", worst, 0.05);
    let (raw, cor) = errors(256)?;
    let gain = raw
        .iter()
        .zip(&cor)
        .map(|(r, c)| if *c == 0.0 { f64::INFINITY } else { r / c })
        .fold(f64::INFINITY, f64::min);
    checks.record("bessel_correction_gain", gain, 10.0, gain >= 10.0);
    Ok(())
}
