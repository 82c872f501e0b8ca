//! The `standbyrel` command line.
//!
//! Exit status: 0 on success, 2 when the input is invalid, 3 when an
//! internal consistency check fails (implication chain, aging certificate,
//! analytic and numeric verdicts disagreeing), 1 for numerical failures.

use std::ffi::OsString;
use std::io::{self, Write};

use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use standbyrel_core::criteria::{self, CriterionResult, Verdict};
use standbyrel_core::general_cold::{
    self, ColdStart, GeneralColdConfig, Preference, RepairBranch, VolterraOptions,
};
use standbyrel_core::markov::{self, SystemKind};
use standbyrel_core::order::{self, OrderVerdict, Status};
use standbyrel_core::sim::{ClockPolicy, SystemSpec};
use standbyrel_core::{
    ColdConfig, Error, InitialState, LifetimeLaw, MarkovSystem, OrderRelation, WarmConfig,
};

use crate::literal::{self, ParseError};
use crate::output::{Cell, Format, Report, Table};
use crate::parallel;

#[derive(Debug, Parser)]
#[command(
    name = "standbyrel",
    version,
    about = "Lifetimes and stochastic comparisons of two-unit repairable standby systems",
    after_help = "Systems: --warm L1,L2,MU gives the principal failure rate, the standby failure rate \
and the repair rate; --cold LAMBDA,MU gives the failure and repair rates. Repeat the flags to describe \
a second system; systems are taken in command-line order. --x1/--x2/--y1/--y2 give the lifetime and \
repair laws of the two units of a general cold standby system as exp:RATE, det:T, weibull:SHAPE,SCALE \
or emp:PATH (one nonnegative value per line).\n\nSTANDBYREL_THREADS caps the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Survival, density and hazard curves of one system
    Eval(EvalArgs),
    /// Stochastic comparison of two systems, analytically and numerically
    Compare(CompareArgs),
    /// Mean time to failure
    Mttf(BasicArgs),
    /// Which unit of a general cold standby system should start working
    Allocate(BasicArgs),
    /// Monte Carlo simulation of one system
    Simulate(SimulateArgs),
    /// Aging class of each system, with its numeric certificate
    Aging(BasicArgs),
    /// Implication-chain and aging audit of two systems
    Audit(CompareArgs),
}

#[derive(Debug, Args)]
struct SystemArgs {
    /// Warm standby rates: principal failure, standby failure, repair
    #[arg(long, value_name = "L1,L2,MU", allow_hyphen_values = true)]
    warm: Vec<String>,
    /// Cold standby rates: failure, repair
    #[arg(long, value_name = "LAMBDA,MU", allow_hyphen_values = true)]
    cold: Vec<String>,
    /// Start every --warm/--cold system with one unit under repair
    #[arg(long)]
    star: bool,
    /// Lifetime law of unit 1
    #[arg(long, value_name = "DIST")]
    x1: Option<String>,
    /// Lifetime law of unit 2
    #[arg(long, value_name = "DIST")]
    x2: Option<String>,
    /// Repair law of unit 1
    #[arg(long, value_name = "DIST")]
    y1: Option<String>,
    /// Repair law of unit 2
    #[arg(long, value_name = "DIST")]
    y2: Option<String>,
    /// Initial condition of a general cold system: tau0 (unit 1 works, unit 2
    /// waits), tau1 (unit 2 works, unit 1 in repair), tau2, tau3
    #[arg(long, value_name = "TAU", default_value = "tau0")]
    start: String,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Closed,
    Laplace,
    Volterra,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PolicyArg {
    Carry,
    Redraw,
}

#[derive(Debug, Args)]
struct BasicArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Evaluation times, comma-separated
    #[arg(long, value_name = "T")]
    t: Option<String>,
    /// Evaluation grid
    #[arg(long, value_name = "TMIN,TMAX,N,log|lin")]
    grid: Option<String>,
    /// closed: closed form; laplace: transform inversion; volterra: renewal
    /// equation solver (cold systems only)
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Relations to check, comma-separated: lt, icv, st, hr, lr or all
    #[arg(long, value_name = "REL", default_value = "all")]
    rel: String,
    /// Grid for the numeric checks
    #[arg(long, value_name = "TMIN,TMAX,N,log|lin")]
    grid: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Number of replications
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// carry: residual lifetimes survive events; redraw: memoryless redraws
    #[arg(long, value_enum, default_value_t = PolicyArg::Carry)]
    policy: PolicyArg,
    /// Grid of the empirical survival function
    #[arg(long, value_name = "TMIN,TMAX,N,log|lin")]
    grid: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Inconsistent(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Parse(_) | Self::Usage(_) => 2,
            Self::Inconsistent(_) => 3,
            Self::Io(_) => 1,
            Self::Core(e) => match e {
                Error::ChainViolation { .. }
                | Error::CertificateFailed { .. }
                | Error::Consistency(_) => 3,
                Error::InvalidParameter { .. }
                | Error::NegativeTime(_)
                | Error::InvalidGrid(_)
                | Error::InvalidSpec(_)
                | Error::NotApplicable(_)
                | Error::UnsupportedRelation(_)
                | Error::DivergentMttf(_) => 2,
                _ => 1,
            },
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return 2;
        }
    };
    let sub = matches
        .subcommand()
        .map(|(_, m)| m)
        .expect("subcommand is required");
    for note in instant_repairs(cli.command.system()) {
        let _ = writeln!(err, "warning: {note}");
    }
    match dispatch(&cli.command, sub, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

impl Command {
    fn system(&self) -> &SystemArgs {
        match self {
            Command::Eval(a) => &a.system,
            Command::Compare(a) | Command::Audit(a) => &a.system,
            Command::Simulate(a) => &a.system,
            Command::Mttf(a) | Command::Allocate(a) | Command::Aging(a) => &a.system,
        }
    }
}

/// Repair laws with an atom at zero complete instantly, which the model
/// does not rule out but rarely intends.
fn instant_repairs(args: &SystemArgs) -> Vec<String> {
    [("--y1", &args.y1), ("--y2", &args.y2)]
        .into_iter()
        .filter_map(|(flag, token)| {
            let law = literal::parse_distribution(token.as_deref()?).ok()?;
            law.atoms().first().is_some_and(|&x| x == 0.0).then(|| {
                format!(
                    "{flag} {} puts mass at zero: some repairs complete instantly",
                    token.as_deref().unwrap_or_default()
                )
            })
        })
        .collect()
}

fn dispatch(command: &Command, sub: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Eval(a) => eval(a, sub, out),
        Command::Compare(a) => compare(a, sub, out),
        Command::Mttf(a) => mttf(a, sub, out),
        Command::Allocate(a) => allocate(a, sub, out),
        Command::Simulate(a) => simulate(a, sub, out),
        Command::Aging(a) => aging(a, sub, out),
        Command::Audit(a) => audit(a, sub, out),
    }
}

fn format(o: &OutputArgs) -> Format {
    match o.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    }
}

#[derive(Debug, Clone)]
enum System {
    Markov(MarkovSystem),
    General(GeneralColdConfig),
}

impl System {
    fn label(&self) -> String {
        match self {
            System::Markov(m) => {
                let c = m.config();
                let star = if m.state() == InitialState::DegradedStart {
                    "*"
                } else {
                    ""
                };
                match m.kind() {
                    SystemKind::Warm => {
                        format!("warm{star}({},{},{})", c.lambda1(), c.lambda2(), c.mu())
                    }
                    SystemKind::Cold => format!("cold{star}({},{})", c.lambda1(), c.mu()),
                }
            }
            System::General(g) => format!("general-cold({})", g.start.name()),
        }
    }

    fn markov(&self, what: &str) -> CliResult<&MarkovSystem> {
        match self {
            System::Markov(m) => Ok(m),
            System::General(_) => Err(usage(format!("{what} needs --warm or --cold systems"))),
        }
    }
}

fn parse_start(token: &str) -> CliResult<ColdStart> {
    ColdStart::ALL
        .into_iter()
        .find(|s| s.name() == token)
        .ok_or_else(|| {
            usage(format!(
                "unknown initial condition `{token}` (expected tau0..tau3)"
            ))
        })
}

/// Systems in command-line order.
fn systems(args: &SystemArgs, sub: &ArgMatches) -> CliResult<Vec<System>> {
    let state = if args.star {
        InitialState::DegradedStart
    } else {
        InitialState::FreshPair
    };
    let mut tagged: Vec<(usize, System)> = Vec::new();
    let indices = |id: &str| -> Vec<usize> {
        sub.indices_of(id)
            .map(Iterator::collect)
            .unwrap_or_default()
    };
    for (token, idx) in args.warm.iter().zip(indices("warm")) {
        let r = literal::parse_rates(token, &[false, true, true], "three (L1,L2,MU)")?;
        let cfg = WarmConfig::new(r[0], r[1], r[2]).map_err(|source| ParseError::Invalid {
            token: token.clone(),
            source,
        })?;
        tagged.push((idx, System::Markov(MarkovSystem::warm(cfg, state))));
    }
    for (token, idx) in args.cold.iter().zip(indices("cold")) {
        let r = literal::parse_rates(token, &[false, true], "two (LAMBDA,MU)")?;
        let cfg = ColdConfig::new(r[0], r[1]).map_err(|source| ParseError::Invalid {
            token: token.clone(),
            source,
        })?;
        tagged.push((idx, System::Markov(MarkovSystem::cold(cfg, state))));
    }
    let laws = [&args.x1, &args.x2, &args.y1, &args.y2];
    if laws.iter().any(|l| l.is_some()) {
        let [Some(x1), Some(x2), Some(y1), Some(y2)] = laws else {
            return Err(usage(
                "a general cold system needs all of --x1, --x2, --y1 and --y2",
            ));
        };
        let cfg = GeneralColdConfig::new(
            literal::parse_distribution(x1)?,
            literal::parse_distribution(x2)?,
            literal::parse_distribution(y1)?,
            literal::parse_distribution(y2)?,
            parse_start(&args.start)?,
        )?;
        let idx = indices("x1").first().copied().unwrap_or(usize::MAX);
        tagged.push((idx, System::General(cfg)));
    }
    tagged.sort_by_key(|(i, _)| *i);
    Ok(tagged.into_iter().map(|(_, s)| s).collect())
}

fn exactly<const N: usize>(systems: Vec<System>, command: &str) -> CliResult<[System; N]> {
    let count = systems.len();
    systems.try_into().map_err(|_| {
        usage(format!(
            "`{command}` needs exactly {N} system(s), got {count}"
        ))
    })
}

fn parse_times(token: &str) -> CliResult<Vec<f64>> {
    let times = token
        .split(',')
        .map(literal::parse_number)
        .collect::<Result<Vec<_>, _>>()?;
    if times.iter().any(|&t| t < 0.0) {
        return Err(ParseError::BadValue {
            token: token.to_string(),
            reason: "times must be nonnegative",
        }
        .into());
    }
    Ok(times)
}

fn user_grid(grid: &Option<String>) -> CliResult<Option<Vec<f64>>> {
    match grid {
        Some(g) => Ok(Some(literal::parse_grid(g)?.build()?)),
        None => Ok(None),
    }
}

fn with_origin(mut grid: Vec<f64>) -> Vec<f64> {
    grid.insert(0, 0.0);
    grid
}

fn as_general(m: &MarkovSystem) -> CliResult<GeneralColdConfig> {
    if m.kind() != SystemKind::Cold {
        return Err(usage("the volterra method handles cold systems only"));
    }
    let c = m.config();
    let start = match m.state() {
        InitialState::FreshPair => ColdStart::Tau0,
        InitialState::DegradedStart => ColdStart::Tau1,
    };
    Ok(GeneralColdConfig::exponential(
        c.lambda1(),
        c.lambda1(),
        c.mu(),
        c.mu(),
        start,
    )?)
}

fn volterra_values(cfg: &GeneralColdConfig, times: &[f64]) -> CliResult<Vec<f64>> {
    let horizon = times.iter().copied().fold(0.0, f64::max);
    if horizon == 0.0 {
        return Ok(vec![1.0; times.len()]);
    }
    let mut options = VolterraOptions::default();
    for _ in 0..6 {
        match general_cold::solve_volterra(cfg, horizon, options) {
            Ok(sol) => {
                let curve = sol.get(cfg.start);
                return Ok(times.iter().map(|&t| curve.interpolate(t)).collect());
            }
            Err(Error::RefineStep { suggested }) => options.step = Some(suggested),
            Err(e) => return Err(e.into()),
        }
    }
    Err(Error::RefineStep {
        suggested: options.step.unwrap_or(f64::NAN),
    }
    .into())
}

fn eval(a: &EvalArgs, sub: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    let [system] = exactly::<1>(systems(&a.system, sub)?, "eval")?;
    let times = match (&a.t, user_grid(&a.grid)?) {
        (Some(_), Some(_)) => return Err(usage("give either --t or --grid, not both")),
        (Some(t), None) => parse_times(t)?,
        (None, Some(g)) => g,
        (None, None) => match &system {
            System::Markov(m) => with_origin(order::default_grid(&[m])?),
            System::General(g) => {
                let mean = general_cold::mttf(g)?.get(g.start);
                literal::GridSpec {
                    lo: 0.0,
                    hi: 8.0 * mean,
                    points: 201,
                    spacing: literal::Spacing::Linear,
                }
                .build()?
            }
        },
    };
    let mut table = Table::new(vec!["t", "phi", "f", "r"]);
    let method;
    match &system {
        System::Markov(m) => {
            method = a.method.unwrap_or(MethodArg::Closed);
            match method {
                MethodArg::Closed => {
                    for &t in &times {
                        table.push(vec![
                            t.into(),
                            m.survival(t)?.into(),
                            m.density(t)?.into(),
                            m.hazard(t)?.into(),
                        ]);
                    }
                }
                MethodArg::Laplace => {
                    let lt = m.laplace_rational()?;
                    let (sf, pdf) = (
                        lt.partial_fractions()?,
                        lt.density_transform().partial_fractions()?,
                    );
                    for &t in &times {
                        let (phi, f) = (sf.eval(t)?, pdf.eval(t)?);
                        table.push(vec![t.into(), phi.into(), f.into(), (f / phi).into()]);
                    }
                }
                MethodArg::Volterra => {
                    let values = volterra_values(&as_general(m)?, &times)?;
                    for (&t, v) in times.iter().zip(values) {
                        table.push(vec![t.into(), v.into(), Cell::Empty, Cell::Empty]);
                    }
                }
            }
        }
        System::General(g) => {
            method = a.method.unwrap_or(MethodArg::Volterra);
            let values = match method {
                MethodArg::Volterra => volterra_values(g, &times)?,
                MethodArg::Closed if g.exponential_rates().is_none() => {
                    return Err(usage(
                        "the closed method needs exponential laws; use laplace or volterra",
                    ))
                }
                _ => times
                    .iter()
                    .map(|&t| general_cold::survival_by_inversion(g, t))
                    .collect::<Result<Vec<_>, _>>()?,
            };
            for (&t, v) in times.iter().zip(values) {
                table.push(vec![t.into(), v.into(), Cell::Empty, Cell::Empty]);
            }
        }
    }
    let method = method
        .to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string();
    Report::new("eval", "rows", table)
        .field("system", system.label())
        .field("method", method)
        .write(format(&a.output), out)?;
    Ok(())
}

fn parse_relations(token: &str) -> CliResult<Vec<OrderRelation>> {
    if token == "all" {
        return Ok(OrderRelation::CHAIN.to_vec());
    }
    token
        .split(',')
        .map(|t| {
            t.trim().parse::<OrderRelation>().map_err(|_| {
                usage(format!(
                    "unknown relation `{t}` (expected lt, icv, st, hr, lr or all)"
                ))
            })
        })
        .collect()
}

fn status_name(v: &OrderVerdict) -> &'static str {
    match v.status {
        Status::Holds => "holds",
        Status::Fails { .. } => "fails",
        Status::Inconclusive { .. } => "inconclusive",
    }
}

fn witness(v: &OrderVerdict) -> Option<f64> {
    match v.status {
        Status::Fails { witness, .. } => Some(witness),
        _ => None,
    }
}

fn verdict_name(r: &CriterionResult) -> &'static str {
    match r.verdict {
        Verdict::Holds => "holds",
        Verdict::DoesNotHold => "fails",
        Verdict::NotApplicable(_) => "n/a",
    }
}

/// `Some(agree)` when both sides are conclusive. A sufficient rule that
/// fires only claims `Holds`.
pub fn agreement(analytic: Option<&CriterionResult>, numeric: &OrderVerdict) -> Option<bool> {
    let a = analytic.filter(|r| r.is_conclusive())?;
    if !numeric.is_conclusive() {
        return None;
    }
    Some(a.holds() == numeric.holds())
}

fn compare(a: &CompareArgs, sub: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    let [s1, s2] = exactly::<2>(systems(&a.system, sub)?, "compare")?;
    let (m1, m2) = (s1.markov("compare")?, s2.markov("compare")?);
    let relations = parse_relations(&a.rel)?;
    let grid = match user_grid(&a.grid)? {
        Some(g) => g,
        None => order::default_grid(&[m1, m2])?,
    };
    let mut table = Table::new(vec![
        "relation",
        "analytic",
        "rule",
        "iff",
        "numeric",
        "witness",
        "min_margin",
        "agree",
    ]);
    let mut verdicts = [None; 5];
    let mut disagreements = Vec::new();
    for rel in relations {
        let results = criteria::analytic_verdicts(m1, m2, rel);
        let analytic = criteria::combine(&results);
        let numeric = order::check_order(m1, m2, rel, &grid, order::TOL_CLOSED_FORM)?;
        let agree = agreement(analytic, &numeric);
        if agree == Some(false) {
            disagreements.push(rel.name());
        }
        if let Some(slot) = OrderRelation::CHAIN.iter().position(|&r| r == rel) {
            verdicts[slot] = Some(numeric);
        }
        table.push(vec![
            rel.name().into(),
            analytic.map_or("n/a", verdict_name).into(),
            analytic.map_or(Cell::Empty, |r| r.rule.name().into()),
            analytic.map_or(Cell::Empty, |r| r.necessary_and_sufficient.into()),
            status_name(&numeric).into(),
            Cell::opt(witness(&numeric)),
            numeric.min_margin.into(),
            agree.map_or(Cell::Empty, Cell::Bool),
        ]);
    }
    Report::new("compare", "relations", table)
        .field("system_a", s1.label())
        .field("system_b", s2.label())
        .field("grid_points", grid.len())
        .write(format(&a.output), out)?;
    if !disagreements.is_empty() {
        return Err(CliError::Inconsistent(format!(
            "analytic and numeric verdicts disagree for {}",
            disagreements.join(", ")
        )));
    }
    order::AuditReport { verdicts }.check_chain()?;
    Ok(())
}

fn start_name(m: &MarkovSystem) -> &'static str {
    match m.state() {
        InitialState::FreshPair => "fresh",
        InitialState::DegradedStart => "degraded",
    }
}

fn mttf(a: &BasicArgs, sub: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    let all = systems(&a.system, sub)?;
    if all.is_empty() {
        return Err(usage("`mttf` needs at least one system"));
    }
    let mut table = Table::new(vec!["system", "start", "mean"]);
    for s in &all {
        match s {
            System::Markov(m) => table.push(vec![
                s.label().into(),
                start_name(m).into(),
                m.mean().into(),
            ]),
            System::General(g) => {
                let report = general_cold::mttf(g)?;
                for start in ColdStart::ALL {
                    table.push(vec![
                        s.label().into(),
                        start.name().into(),
                        report.get(start).into(),
                    ]);
                }
            }
        }
    }
    Report::new("mttf", "means", table).write(format(&a.output), out)?;
    Ok(())
}

fn allocate(a: &BasicArgs, sub: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    let [system] = exactly::<1>(systems(&a.system, sub)?, "allocate")?;
    let System::General(cfg) = system else {
        return Err(usage(
            "`allocate` needs a general cold system (--x1 --x2 --y1 --y2)",
        ));
    };
    let cfg = cfg.with_start(ColdStart::Tau0);
    let report = general_cold::allocation_compare(&cfg)?;
    let preferred = match report.preferred {
        Preference::Tau0 => "tau0",
        Preference::Tau3 => "tau3",
        Preference::Tie => "tie",
    };
    let mut table = Table::new(vec!["quantity", "value"]);
    let mut row = |k: &str, v: Cell| table.push(vec![k.into(), v]);
    row("preferred", preferred.into());
    row("e_tau0", report.mttf.means[0].into());
    row("e_tau3", report.mttf.means[3].into());
    row("margin", report.margin.into());
    row("p_x2_gt_y1", report.mttf.p21.into());
    row("p_x1_gt_y2", report.mttf.p12.into());
    for (rule, fired) in &report.rules {
        row(&format!("rule:{}", rule.name()), (*fired).into());
    }
    let (lt, lt_rule) = match cfg.exponential_rates() {
        Some(r) => {
            let c = general_cold::lt_allocation_criteria(r.lambda1, r.lambda2, r.mu1, r.mu2)?;
            (verdict_name(&c), c.rule.name())
        }
        None => {
            let grid = order::default_grid(&[&cfg.repair1 as &dyn LifetimeLaw, &cfg.repair2])
                .or_else(|_| order::default_grid(&[&cfg.lifetime1 as &dyn LifetimeLaw]))?;
            match general_cold::lt_allocation_general(&cfg, &grid) {
                Ok(o) => (
                    "holds",
                    match o.branch {
                        RepairBranch::Stochastic => "lt-allocation-repair-order:st",
                        RepairBranch::IncreasingConcave => "lt-allocation-repair-order:icv",
                    },
                ),
                Err(Error::NotApplicable(_)) => ("n/a", "lt-allocation-repair-order"),
                Err(e) => return Err(e.into()),
            }
        }
    };
    row("lt_tau0_over_tau3", lt.into());
    row("lt_rule", lt_rule.into());
    Report::new("allocate", "quantities", table)
        .field("preferred", preferred)
        .field("e_tau0", report.mttf.means[0])
        .field("e_tau3", report.mttf.means[3])
        .write(format(&a.output), out)?;
    Ok(())
}

fn simulate(a: &SimulateArgs, sub: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    let [system] = exactly::<1>(systems(&a.system, sub)?, "simulate")?;
    if a.n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let spec = match &system {
        System::Markov(m) => SystemSpec::from_markov(m)?,
        System::General(g) => SystemSpec::per_unit(g.clone()),
    };
    let policy = match a.policy {
        PolicyArg::Carry => ClockPolicy::CarryResidual,
        PolicyArg::Redraw => ClockPolicy::RedrawEachEvent,
    };
    let result = parallel::simulate(&spec, a.n, a.seed, policy, parallel::thread_count())?;
    let grid = match user_grid(&a.grid)? {
        Some(g) => g,
        None => {
            let hi = result
                .failure_times()
                .last()
                .copied()
                .unwrap_or(1.0)
                .max(f64::MIN_POSITIVE);
            standbyrel_core::curve::linear_grid(0.0, hi, 201)?
        }
    };
    let mut table = Table::new(vec!["t", "value"]);
    for &t in &grid {
        table.push(vec![t.into(), result.survival(t).into()]);
    }
    Report::new("simulate", "survival", table)
        .field("system", system.label())
        .field("n", result.n())
        .field("seed", Cell::Int(a.seed))
        .field("policy", format!("{:?}", a.policy).to_lowercase())
        .field("mean", result.mean())
        .field("std_error", result.std_error())
        .write(format(&a.output), out)?;
    Ok(())
}

fn aging_rows(all: &[System], table: &mut Table) -> (Vec<Value>, Option<Error>) {
    let mut failure = None;
    let mut docs = Vec::new();
    for s in all {
        let System::Markov(m) = s else { continue };
        match markov::aging_class(m) {
            Ok(r) => {
                let class = format!("{:?}", r.class).to_lowercase();
                table.push(vec![
                    "aging".into(),
                    s.label().into(),
                    class.clone().into(),
                    r.min_margin.into(),
                ]);
                docs.push(json!({"system": s.label(), "class": class, "shifts": r.shifts}));
            }
            Err(e) => {
                table.push(vec![
                    "aging".into(),
                    s.label().into(),
                    "violated".into(),
                    Cell::Empty,
                ]);
                failure.get_or_insert(e);
            }
        }
    }
    (docs, failure)
}

fn aging(a: &BasicArgs, sub: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    let all = systems(&a.system, sub)?;
    if all.is_empty() {
        return Err(usage("`aging` needs at least one system"));
    }
    for s in &all {
        s.markov("aging")?;
    }
    let mut table = Table::new(vec!["check", "subject", "status", "min_margin"]);
    let (docs, failure) = aging_rows(&all, &mut table);
    Report::new("aging", "checks", table)
        .json_field("certificates", Value::Array(docs))
        .write(format(&a.output), out)?;
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

fn audit(a: &CompareArgs, sub: &ArgMatches, out: &mut dyn Write) -> CliResult<()> {
    let all = exactly::<2>(systems(&a.system, sub)?, "audit")?;
    let (m1, m2) = (all[0].markov("audit")?, all[1].markov("audit")?);
    let grid = match user_grid(&a.grid)? {
        Some(g) => g,
        None => order::default_grid(&[m1, m2])?,
    };
    let report = order::audit_verdicts(m1, m2, &grid, order::TOL_CLOSED_FORM)?;
    let mut table = Table::new(vec!["check", "subject", "status", "min_margin"]);
    for v in report.verdicts.iter().flatten() {
        table.push(vec![
            "order".into(),
            v.relation.name().into(),
            status_name(v).into(),
            v.min_margin.into(),
        ]);
    }
    let chain = report.check_chain();
    table.push(vec![
        "chain".into(),
        "lr>hr>st>icv>lt".into(),
        if chain.is_ok() {
            "consistent"
        } else {
            "violated"
        }
        .into(),
        Cell::Empty,
    ]);
    let (_, aging_failure) = aging_rows(&all, &mut table);
    Report::new("audit", "checks", table)
        .field("system_a", all[0].label())
        .field("system_b", all[1].label())
        .write(format(&a.output), out)?;
    chain?;
    match aging_failure {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// Convenience for tests and scripts: runs with captured output.
pub fn run_captured<I, T>(args: I) -> (u8, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(args, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
