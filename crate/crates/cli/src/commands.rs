use ehrenfest::cases::{network_commute_check, same_urn_stats, two_point_stats_for_states};
use ehrenfest::engine::{CtmcStats, TransformDomain, TransformSample};
use ehrenfest::model::materialize;
use ehrenfest::numeric::binomial;
use ehrenfest::oracle::oracle_summary;
use ehrenfest::sim::{sample_hitting, SimTarget};
use ehrenfest::special::{
    binomial_gap_expectation, g_closed_forms, g_prime_gap_closed_form, series_identities_check, SpecialFunctionContext,
};
use ehrenfest::{
    EnumeratedChain, Error, HittingEngine, HittingQuery, HittingSummary, ModelParams, Rational, SetDescriptor,
    SimConfig, SimMode, SimSummary, State,
};
use serde::Serialize;
use serde_json::json;

use crate::args::{CaseArgs, Command, NetworkArgs};
use crate::report::{case_label, Outcome, Quantity, Row, RunRequest};

/// Failure of a run, carrying its process exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                Error::NotSymmetric(_) => 3,
                Error::CapExceeded { .. } => 4,
                Error::Solve(_) | Error::Quadrature { .. } | Error::Io(_) => 1,
                _ => 2,
            },
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.code() {
            2 => "usage",
            3 => "not-symmetric",
            4 => "cap-exceeded",
            _ => "internal",
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(Error::CapExceeded { size, cap }) => {
                write!(f, "state space N^M = {size} exceeds the oracle cap {cap} (raise --cap or EHRENFEST_CAP)")
            }
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

const DEFAULT_U_GRID: [(i64, i64); 3] = [(1, 2), (1, 1), (2, 1)];
const DEFAULT_LAMBDA_GRID: [f64; 4] = [0.1, 0.5, 1.0, 2.0];
/// Size of the perturbation applied by `--corrupt-engine`.
const CORRUPTION: (i64, i64) = (1, 1_000_000);
const MC_SIGMAS: f64 = 4.0;
/// Rounding floor for Monte Carlo checks; matters only when the hitting time
/// is deterministic and the standard error collapses to summation noise.
const MC_FLOOR: f64 = 1e-9;
const LAMBDA_REL_TOL: f64 = 1e-15;
const QUADRATURE_TOL: f64 = 1e-8;

pub fn case_args(command: &Command) -> &CaseArgs {
    match command {
        Command::Exact(a)
        | Command::Oracle(a)
        | Command::Simulate(a)
        | Command::Compare(a)
        | Command::Identities(a) => a,
        Command::NetworkCheck(n) => &n.case,
    }
}

pub fn run(command: &Command) -> (RunRequest, Result<Outcome>) {
    let (name, a) = match command {
        Command::Exact(a) => ("exact", a),
        Command::Oracle(a) => ("oracle", a),
        Command::Simulate(a) => ("simulate", a),
        Command::Compare(a) => ("compare", a),
        Command::Identities(a) => ("identities", a),
        Command::NetworkCheck(n) => ("network-check", &n.case),
    };
    let mut request = RunRequest::new(name, a);
    let outcome = match command {
        Command::Exact(a) => exact(a),
        Command::Oracle(a) => oracle(a),
        Command::Simulate(a) => simulate(a),
        Command::Compare(a) => compare(a),
        Command::Identities(a) => identities(a),
        Command::NetworkCheck(n) => {
            request.levels = Some((n.h, n.k));
            network(n)
        }
    };
    (request, outcome)
}

fn params(a: &CaseArgs) -> Result<ModelParams> {
    Ok(ModelParams::new(a.urns, a.balls)?)
}

fn start(a: &CaseArgs, p: &ModelParams) -> Result<State> {
    let x = a.start.clone().ok_or_else(|| CliError::Usage("--start is required".into()))?;
    p.check_state(&x)?;
    Ok(x)
}

fn target(a: &CaseArgs) -> Result<&SetDescriptor> {
    a.set.as_ref().ok_or_else(|| CliError::Usage("--set is required".into()))
}

fn check_order(a: &CaseArgs) -> Result<()> {
    if a.order == 0 {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct ExitEntry {
    state: State,
    probability: Quantity,
}

#[derive(Serialize)]
struct CtmcQuantities {
    mean: Quantity,
    variance: Quantity,
}

/// Results of `exact` and `oracle`; both have this shape.
#[derive(Serialize)]
struct CaseResults {
    method: &'static str,
    case: String,
    mean: Quantity,
    variance: Quantity,
    raw_moments: Vec<Quantity>,
    ctmc: CtmcQuantities,
    transforms: Vec<TransformSample>,
    exit_distribution: Option<Vec<ExitEntry>>,
}

impl CaseResults {
    fn new(method: &'static str, case: String, s: &HittingSummary, balls: u32) -> Self {
        let ctmc = CtmcStats::from_discrete(&s.mean, &s.variance, balls);
        CaseResults {
            method,
            case,
            mean: (&s.mean).into(),
            variance: (&s.variance).into(),
            raw_moments: s.raw_moments.iter().map(Quantity::from).collect(),
            ctmc: CtmcQuantities { mean: (&ctmc.mean).into(), variance: (&ctmc.variance).into() },
            transforms: s.transform_samples.clone(),
            exit_distribution: s.exit_distribution.as_ref().map(|e| {
                e.iter().map(|(state, p)| ExitEntry { state: state.clone(), probability: p.into() }).collect()
            }),
        }
    }

    /// One row per quantity, values in the `exact` or `oracle` column.
    fn rows(&self, oracle: bool) -> Vec<Row> {
        let cell = |label: String, value: String| {
            let mut r = Row::new(&self.case, label);
            if oracle {
                r.oracle = Some(value);
            } else {
                r.exact = Some(value);
            }
            r
        };
        let mut out =
            vec![cell("mean".into(), self.mean.exact.clone()), cell("variance".into(), self.variance.exact.clone())];
        for (i, m) in self.raw_moments.iter().enumerate() {
            out.push(cell(format!("moment_{}", i + 1), m.exact.clone()));
        }
        out.push(cell("ctmc_mean".into(), self.ctmc.mean.exact.clone()));
        out.push(cell("ctmc_variance".into(), self.ctmc.variance.exact.clone()));
        for t in &self.transforms {
            out.push(cell(transform_label(t), t.display.clone()));
        }
        for e in self.exit_distribution.iter().flatten() {
            out.push(cell(format!("exit_{}", e.state), e.probability.exact.clone()));
        }
        out
    }
}

fn transform_label(t: &TransformSample) -> String {
    match t.domain {
        TransformDomain::U => format!("laplace_u({})", t.argument),
        TransformDomain::Lambda => format!("laplace_lambda({})", t.argument),
    }
}

/// Exit distribution from the closed forms, where one is available.
fn closed_form_exits(p: &ModelParams, x: &State, d: &SetDescriptor) -> Result<Option<Vec<(State, Rational)>>> {
    Ok(match d {
        SetDescriptor::Singleton(y) => Some(vec![(y.clone(), Rational::one())]),
        SetDescriptor::Diagonal => {
            let stats = same_urn_stats(p, x)?;
            Some((1..=p.urns()).map(|i| p.constant_state(i)).zip(stats.exit).collect())
        }
        SetDescriptor::Pair(y, z) => {
            let py = if x == y {
                Rational::one()
            } else if x == z {
                Rational::zero()
            } else {
                two_point_stats_for_states(p, x, y, z)?.exit_prob_y
            };
            let pz = Rational::one() - &py;
            let mut members = vec![(y.clone(), py), (z.clone(), pz)];
            members.sort_by(|a, b| a.0.cmp(&b.0));
            Some(members)
        }
        _ => None,
    })
}

fn exact(a: &CaseArgs) -> Result<Outcome> {
    let p = params(a)?;
    check_order(a)?;
    let (x, d) = (start(a, &p)?, target(a)?);
    let q = HittingQuery::new(p, x.clone(), d)?;
    let engine = HittingEngine::new(p);
    let mut summary = engine.summarize(&q, a.order, &a.u, &a.lambda, a.digits)?;
    summary.exit_distribution = closed_form_exits(&p, &x, d)?;
    let res = CaseResults::new("formula", case_label(&p, Some(&x), Some(d)), &summary, p.balls());
    let rows = res.rows(false);
    Ok(Outcome { results: serde_json::to_value(res).expect("serializable"), rows, judged: false })
}

fn oracle(a: &CaseArgs) -> Result<Outcome> {
    let p = params(a)?;
    check_order(a)?;
    let (x, d) = (start(a, &p)?, target(a)?);
    let chain = EnumeratedChain::new(p, a.cap)?;
    let set = materialize(d, &p)?;
    let summary = oracle_summary(&chain, &set, &x, a.order, &a.u, &a.lambda, a.digits)?;
    let res = CaseResults::new("oracle", case_label(&p, Some(&x), Some(d)), &summary, p.balls());
    let rows = res.rows(true);
    Ok(Outcome { results: serde_json::to_value(res).expect("serializable"), rows, judged: false })
}

fn sim_config(a: &CaseArgs, lambda: &[f64], u: &[Rational]) -> SimConfig {
    let mut cfg = SimConfig::new(a.replicas, a.seed, a.mode);
    match a.mode {
        SimMode::Discrete => cfg.lambda_grid = lambda.to_vec(),
        SimMode::Ctmc => cfg.u_grid = u.iter().map(Rational::to_f64).collect(),
    }
    cfg.workers = a.workers;
    cfg
}

fn simulate(a: &CaseArgs) -> Result<Outcome> {
    let p = params(a)?;
    let (x, d) = (start(a, &p)?, target(a)?);
    if a.mode == SimMode::Discrete && !a.u.is_empty() {
        return Err(CliError::Usage("--u needs --mode ctmc; use --lambda in discrete mode".into()));
    }
    if a.mode == SimMode::Ctmc && !a.lambda.is_empty() {
        return Err(CliError::Usage("--lambda needs --mode discrete; use --u in ctmc mode".into()));
    }
    let cfg = sim_config(a, &a.lambda, &a.u);
    cfg.validate()?;
    let summary = sample_hitting(&p, &x, &SimTarget::from_descriptor(d, &p)?, &cfg)?;
    let case = case_label(&p, Some(&x), Some(d));
    let mut rows =
        vec![Row { mc_mean: Some(summary.mean), mc_stderr: Some(summary.stderr), ..Row::new(&case, "mean") }];
    let arg_name = match a.mode {
        SimMode::Discrete => "laplace_lambda",
        SimMode::Ctmc => "laplace_u",
    };
    for t in &summary.transforms {
        rows.push(Row {
            mc_mean: Some(t.estimate),
            mc_stderr: Some(t.stderr),
            ..Row::new(&case, format!("{arg_name}({})", t.argument))
        });
    }
    Ok(Outcome { results: json!({ "case": case, "simulation": summary }), rows, judged: false })
}

/// Target kinds swept by `compare` when no `--set` is given.
fn default_targets(p: &ModelParams) -> Vec<SetDescriptor> {
    let y = p.constant_state(2);
    let mut z = y.positions().to_vec();
    z[0] = if p.urns() > 2 { p.urns() } else { 1 };
    let mut out =
        vec![SetDescriptor::Singleton(y.clone()), SetDescriptor::Pair(y, State::new(z)), SetDescriptor::Diagonal];
    out.extend((0..=p.balls()).map(SetDescriptor::count));
    if p.balls() <= p.urns() {
        out.push(SetDescriptor::Distinct);
    }
    out
}

#[derive(Serialize)]
struct ComparedCase {
    case: String,
    engine: CaseResults,
    oracle: CaseResults,
    simulation: SimSummary,
}

fn equal_row(case: &str, quantity: String, engine: &Rational, oracle: &Rational) -> Row {
    let pass = engine == oracle;
    Row { exact: Some(engine.to_string()), oracle: Some(oracle.to_string()), ..Row::new(case, quantity) }
        .judge(pass, Some("engine and oracle differ".into()))
}

fn within_sigmas(row: Row, exact: f64, mc_mean: f64, mc_stderr: f64) -> (Row, bool) {
    let ok = (mc_mean - exact).abs() <= MC_SIGMAS * mc_stderr + MC_FLOOR * exact.abs().max(1.0);
    (Row { mc_mean: Some(mc_mean), mc_stderr: Some(mc_stderr), ..row }, ok)
}

fn compare(a: &CaseArgs) -> Result<Outcome> {
    let p = params(a)?;
    check_order(a)?;
    let x = match &a.start {
        Some(x) => {
            p.check_state(x)?;
            x.clone()
        }
        None => p.constant_state(1),
    };
    let targets = match &a.set {
        Some(d) => vec![d.clone()],
        None => default_targets(&p),
    };
    let u: Vec<Rational> =
        if a.u.is_empty() { DEFAULT_U_GRID.iter().map(|&(n, d)| Rational::new(n, d)).collect() } else { a.u.clone() };
    let lambda: Vec<f64> = if a.lambda.is_empty() { DEFAULT_LAMBDA_GRID.to_vec() } else { a.lambda.clone() };
    let chain = EnumeratedChain::new(p, a.cap)?;
    let engine = HittingEngine::new(p);
    let cfg = sim_config(a, &lambda, &u);
    cfg.validate()?;

    let mut rows = Vec::new();
    let mut cases = Vec::new();
    for d in &targets {
        let case = case_label(&p, Some(&x), Some(d));
        let q = HittingQuery::new(p, x.clone(), d)?;
        let mut es = engine.summarize(&q, a.order, &u, &lambda, a.digits)?;
        if a.corrupt_engine {
            es.mean += Rational::new(CORRUPTION.0, CORRUPTION.1);
        }
        let os = oracle_summary(&chain, q.target(), &x, a.order, &u, &lambda, a.digits)?;
        let sim = sample_hitting(&p, &x, &SimTarget::from_descriptor(d, &p)?, &cfg)?;

        let mean_row = equal_row(&case, "mean".into(), &es.mean, &os.mean);
        let mean_ok = !mean_row.failed();
        rows.push(if a.mode == SimMode::Discrete {
            let (row, ok) = within_sigmas(mean_row, es.mean.to_f64(), sim.mean, sim.stderr);
            row.judge(mean_ok && ok, Some("engine, oracle and simulation disagree".into()))
        } else {
            mean_row
        });
        rows.push(equal_row(&case, "variance".into(), &es.variance, &os.variance));
        for (i, (e, o)) in es.raw_moments.iter().zip(&os.raw_moments).enumerate() {
            rows.push(equal_row(&case, format!("moment_{}", i + 1), e, o));
        }
        let ec = CtmcStats::from_discrete(&es.mean, &es.variance, p.balls());
        let oc = CtmcStats::from_discrete(&os.mean, &os.variance, p.balls());
        let ctmc_row = equal_row(&case, "ctmc_mean".into(), &ec.mean, &oc.mean);
        rows.push(if a.mode == SimMode::Ctmc {
            let ok = !ctmc_row.failed();
            let (row, mc_ok) = within_sigmas(ctmc_row, ec.mean.to_f64(), sim.mean, sim.stderr);
            row.judge(ok && mc_ok, Some("engine, oracle and simulation disagree".into()))
        } else {
            ctmc_row
        });

        let mut estimates = sim.transforms.iter();
        for (et, ot) in es.transform_samples.iter().zip(&os.transform_samples) {
            let label = transform_label(et);
            let mut row =
                Row { exact: Some(et.display.clone()), oracle: Some(ot.display.clone()), ..Row::new(&case, label) };
            let agree = match (&et.exact, &ot.exact) {
                (Some(e), Some(o)) => e == o,
                _ => (et.approx - ot.approx).abs() <= LAMBDA_REL_TOL * ot.approx.abs(),
            };
            let sampled = matches!(
                (et.domain, a.mode),
                (TransformDomain::U, SimMode::Ctmc) | (TransformDomain::Lambda, SimMode::Discrete)
            );
            let mut mc_ok = true;
            if sampled {
                let est = estimates.next().expect("one estimate per sampled argument");
                let (r, ok) = within_sigmas(row, et.approx, est.estimate, est.stderr);
                row = r;
                mc_ok = ok;
            }
            rows.push(row.judge(agree && mc_ok, Some("transform values disagree".into())));
        }
        cases.push(ComparedCase {
            case: case.clone(),
            engine: CaseResults::new("formula", case.clone(), &es, p.balls()),
            oracle: CaseResults::new("oracle", case, &os, p.balls()),
            simulation: sim,
        });
    }
    let network = network_rows(&p, None, None)?;
    rows.extend(network.1);
    Ok(Outcome { results: json!({ "cases": cases, "network": network.0 }), rows, judged: true })
}

#[derive(Serialize)]
struct NetworkEntry {
    h: u32,
    k: u32,
    lhs: String,
    rhs: String,
    equal: bool,
}

fn network_rows(p: &ModelParams, h: Option<u32>, k: Option<u32>) -> Result<(Vec<NetworkEntry>, Vec<Row>)> {
    let m = p.balls();
    let pairs: Vec<(u32, u32)> = match (h, k) {
        (Some(h), Some(k)) => vec![(h, k)],
        (None, None) => (1..=m).flat_map(|k| (0..k).map(move |h| (h, k))).collect(),
        _ => return Err(CliError::Usage("give both --h and --k, or neither".into())),
    };
    let case = format!("N={} M={} network", p.urns(), m);
    let mut entries = Vec::new();
    let mut rows = Vec::new();
    for (h, k) in pairs {
        let c = network_commute_check(p, h, k)?;
        rows.push(
            Row {
                exact: Some(c.lhs.to_string()),
                oracle: Some(c.rhs.to_string()),
                ..Row::new(&case, format!("commute({h},{k})"))
            }
            .judge(c.equal, Some("commute time differs from conductance times resistance".into())),
        );
        entries.push(NetworkEntry { h, k, lhs: c.lhs.to_string(), rhs: c.rhs.to_string(), equal: c.equal });
    }
    Ok((entries, rows))
}

fn network(n: &NetworkArgs) -> Result<Outcome> {
    let p = params(&n.case)?;
    let (entries, rows) = network_rows(&p, n.h, n.k)?;
    Ok(Outcome { results: json!({ "pairs": entries }), rows, judged: true })
}

fn identities(a: &CaseArgs) -> Result<Outcome> {
    let p = params(a)?;
    let case = case_label(&p, None, None);
    let (n, m) = (p.urns(), p.balls());
    let mut rows = Vec::new();
    let eq = |label: String, lhs: &Rational, rhs: &Rational| equal_row(&case, label, lhs, rhs);

    for arg in [Rational::zero(), Rational::from(n - 1), -Rational::one(), Rational::new(1, 2)] {
        let ok = series_identities_check(&p, &arg);
        rows.push(Row::new(&case, format!("power_sums(a={arg})")).judge(ok, Some("identity fails".into())));
    }
    let kernels = SpecialFunctionContext::all(p);
    let series: Vec<Rational> = kernels.iter().map(|c| c.g0()).collect();
    let closed = g_closed_forms(&p);
    rows.push(eq("g_0(0)".into(), &closed.g0, &series[0]));
    rows.push(eq("g_M(0)".into(), &closed.g_m, &series[m as usize]));
    for (k, gap) in closed.gaps.iter().enumerate() {
        rows.push(eq(format!("gap_{k}"), gap, &(&series[k + 1] - &series[k])));
    }
    let telescoped = &closed.g0 + closed.gaps.iter().sum::<Rational>();
    rows.push(eq("telescoping".into(), &telescoped, &closed.g_m));
    rows.push(eq("g_1(0)".into(), &(&closed.g0 + Rational::from(m).recip().expect("M >= 1")), &series[1]));
    let slope = |k: usize| kernels[k].g_derivative(1);
    rows.push(eq("derivative_gap".into(), &g_prime_gap_closed_form(&p), &(slope(0)? - slope(m as usize)?)));
    let prob = Rational::from(n - 1).recip().expect("N >= 2");
    for j in 0..m {
        let direct: Rational = (0..=j)
            .map(|i| {
                Rational::from(binomial(j as u64, i as i64))
                    * prob.pow(i as i32)
                    * (Rational::one() - &prob).pow((j - i) as i32)
                    * (&series[i as usize + 1] - &series[i as usize])
            })
            .sum();
        rows.push(eq(format!("binomial_gap(m={j})"), &binomial_gap_expectation(&p, j)?, &direct));
    }
    for ctx in &kernels {
        for u in [Rational::new(1, 4), Rational::one(), Rational::from(4i64)] {
            let exact = ctx.f(&u)?.to_f64();
            let quad = ctx.f_quadrature(u.to_f64())?;
            let ok = (exact - quad).abs() <= QUADRATURE_TOL;
            rows.push(
                Row {
                    exact: Some(exact.to_string()),
                    oracle: Some(quad.to_string()),
                    ..Row::new(&case, format!("quadrature(k={},u={u})", ctx.k()))
                }
                .judge(ok, Some("quadrature differs from the series".into())),
            );
        }
    }
    let failures = rows.iter().filter(|r| r.failed()).count();
    Ok(Outcome { results: json!({ "checks": rows.len(), "failures": failures }), rows, judged: true })
}
