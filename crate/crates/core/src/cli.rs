//! Command-line front end.

use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::closed_form::ClosedForm;
use crate::error::Error;
use crate::graph::{Diagnostic, InfluenceNetwork};
use crate::presets::{self, FIGURES};
use crate::scenario::load_scenario;
use crate::solver::{solve_equilibrium, EquilibriumTrajectory, DEFAULT_SAMPLES};
use crate::verify::{
    deviation_test, evaluate_cost, nash_residual, stationarity_check, AgentStationarity, CostBreakdown,
    DeviationOutcome, DEFAULT_DEVIATION_TOLERANCE,
};

/// Largest accepted normalised best-response gap.
pub const NASH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Parser)]
#[command(name = "consensus-game", version, about = "Open-loop Nash equilibria of networked opinion games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// JSON scenario file
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario (fig1b, fig1c, fig2b, fig2c, fig3b, fig3c, fig1_k0 and aliases)
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Candidate {
    /// Everyone keeps their initial opinion.
    Constant,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve for the equilibrium and write the trajectory as CSV
    Simulate {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Append costate columns
        #[arg(long)]
        costate: bool,
    },
    /// Certify the Nash property by best responses, stationarity and random deviations
    Verify {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        /// Random deviations per agent
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Verify a fixed candidate instead of the solver output
        #[arg(long, value_enum)]
        candidate: Option<Candidate>,
    },
    /// Long-run limits and epsilon-consensus times from the closed forms
    Limits {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.05, 0.01])]
        eps: Vec<f64>,
    },
    /// Write CSV and gnuplot scripts for the figure presets
    Figures {
        /// fig1b, fig1c, fig2b, fig2c, fig3b, fig3c or all
        #[arg(default_value = "all")]
        which: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("solver failed: {0}")]
    Solver(String),
    #[error("{0}")]
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
            CliError::Unsupported(_) => 4,
        }
    }

    fn input(e: impl fmt::Display) -> Self {
        CliError::Input(e.to_string())
    }

    fn solver(e: Error) -> Self {
        match e {
            Error::Unsupported(msg) => CliError::Unsupported(msg),
            Error::Io(io) => CliError::Input(io.to_string()),
            other => CliError::Solver(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Loads the network named by `--scenario` or `--preset`, with warnings.
pub fn load_source(source: &Source) -> CliResult<(InfluenceNetwork<f64>, Vec<Diagnostic>)> {
    match (&source.scenario, &source.preset) {
        (Some(path), _) => {
            let (net, warnings) = load_scenario(path).map_err(CliError::input)?;
            let net = if net.name.is_some() {
                net
            } else {
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                net.with_name(stem)
            };
            Ok((net, warnings))
        }
        (None, Some(name)) => presets::preset(name).map(|p| (p.network, Vec::new())).ok_or_else(|| {
            CliError::Input(format!("unknown preset '{name}' (known: {})", presets::preset_names().join(", ")))
        }),
        (None, None) => Err(CliError::Input("one of --scenario or --preset is required".into())),
    }
}

fn scenario_name(net: &InfluenceNetwork<f64>) -> String {
    net.name.clone().unwrap_or_else(|| "scenario".into())
}

/// CSV with header `t,x1,…,xn` (then `p1,…,pn` with `costate`), 17 significant digits.
pub fn format_csv(traj: &EquilibriumTrajectory<f64>, costate: bool) -> String {
    let n = traj.agents();
    let mut out = String::from("t");
    for i in 1..=n {
        write!(out, ",x{i}").unwrap();
    }
    if costate {
        for i in 1..=n {
            write!(out, ",p{i}").unwrap();
        }
    }
    out.push('\n');
    for (r, t) in traj.grid.iter().enumerate() {
        write!(out, "{t:.16e}").unwrap();
        for v in traj.x.row(r) {
            write!(out, ",{v:.16e}").unwrap();
        }
        if costate {
            for v in traj.p.row(r) {
                write!(out, ",{v:.16e}").unwrap();
            }
        }
        out.push('\n');
    }
    out
}

/// Gnuplot script plotting every opinion column of `csv` against time.
pub fn gnuplot_script(name: &str, csv: &str, agents: usize) -> String {
    format!(
        "set datafile separator ','\n\
         set terminal pngcairo size 900,600\n\
         set output '{name}.png'\n\
         set title '{name}'\n\
         set xlabel 't'\n\
         set ylabel 'opinion'\n\
         set key outside right\n\
         plot for [i=2:{last}] '{csv}' using 1:i with lines title columnheader(i)\n",
        last = agents + 1
    )
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
        }
    }
    fs::write(path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Everything `simulate` and `verify` report.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub scenario: String,
    pub samples: usize,
    pub output: Option<PathBuf>,
    pub costs: Vec<CostBreakdown<f64>>,
    pub terminal: Vec<f64>,
    pub closed_form_error: Option<f64>,
    pub nash_residual: Option<f64>,
    pub stationarity: Vec<AgentStationarity<f64>>,
    pub deviations: Vec<DeviationOutcome<f64>>,
    pub seed: Option<u64>,
    pub passed: Option<bool>,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {}", self.scenario)?;
        writeln!(f, "samples:  {}", self.samples)?;
        if let Some(path) = &self.output {
            writeln!(f, "output:   {}", path.display())?;
        }
        if let Some(seed) = self.seed {
            writeln!(f, "seed:     {seed}")?;
        }
        if let Some(err) = self.closed_form_error {
            writeln!(f, "closed-form max deviation: {err:.3e}")?;
        }
        if let Some(r) = self.nash_residual {
            let verdict = if r <= NASH_TOLERANCE { "ok" } else { "FAIL" };
            writeln!(f, "nash residual: {r:.3e} (tolerance {NASH_TOLERANCE:.0e}) {verdict}")?;
        }
        if !self.costs.is_empty() {
            writeln!(f, "agent  x(T)          influence     stubbornness  control       total")?;
            for (c, x) in self.costs.iter().zip(&self.terminal) {
                writeln!(
                    f,
                    "{:>5}  {:<12.6}  {:<12.6e}  {:<12.6e}  {:<12.6e}  {:.6e}",
                    c.agent + 1,
                    x,
                    c.influence,
                    c.stubbornness,
                    c.control,
                    c.total
                )?;
            }
        }
        if !self.stationarity.is_empty() {
            writeln!(f, "agent  |u+p|       dx/dt       dp/dt       x(0)        p(T)        deviation gain  status")?;
            for (s, d) in self.stationarity.iter().zip(&self.deviations) {
                let ok = s.ok() && d.passed;
                writeln!(
                    f,
                    "{:>5}  {:<10.3e}  {:<10.3e}  {:<10.3e}  {:<10.3e}  {:<10.3e}  {:<14.3e}  {}",
                    s.agent + 1,
                    s.control.value,
                    s.state.value,
                    s.costate.value,
                    s.initial.value,
                    s.terminal.value,
                    d.worst_gain,
                    if ok { "ok" } else { "FAIL" }
                )?;
            }
        }
        if let Some(passed) = self.passed {
            writeln!(f, "verdict: {}", if passed { "PASS" } else { "FAIL" })?;
        }
        Ok(())
    }
}

fn closed_form_error(net: &InfluenceNetwork<f64>, traj: &EquilibriumTrajectory<f64>) -> CliResult<Option<f64>> {
    let Some(cf) = ClosedForm::for_network(net).map_err(CliError::solver)? else {
        return Ok(None);
    };
    let mut worst = 0.0f64;
    for (r, &t) in traj.grid.iter().enumerate() {
        let exact = cf.at(&net.x0, t).map_err(CliError::solver)?;
        for (a, b) in exact.iter().zip(traj.x.row(r)) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok(Some(worst))
}

pub fn cmd_simulate(net: &InfluenceNetwork<f64>, samples: usize, out: &Path, costate: bool) -> CliResult<RunReport> {
    let traj = solve_equilibrium(net, samples).map_err(CliError::solver)?;
    let name = scenario_name(net);
    let path = out.join(format!("{name}.csv"));
    write_file(&path, &format_csv(&traj, costate))?;
    let costs = (0..net.n).map(|i| evaluate_cost(net, &traj, i)).collect::<Result<_, _>>().map_err(CliError::solver)?;
    Ok(RunReport {
        scenario: name,
        samples,
        output: Some(path),
        costs,
        terminal: traj.terminal().to_vec(),
        closed_form_error: closed_form_error(net, &traj)?,
        ..RunReport::default()
    })
}

pub fn cmd_verify(
    net: &InfluenceNetwork<f64>,
    samples: usize,
    count: usize,
    seed: u64,
    candidate: Option<Candidate>,
) -> CliResult<RunReport> {
    let traj = match candidate {
        Some(Candidate::Constant) => EquilibriumTrajectory::constant(net, samples).map_err(CliError::input)?,
        None => solve_equilibrium(net, samples).map_err(CliError::solver)?,
    };
    let residual = nash_residual(net, &traj).map_err(CliError::solver)?;
    let stationarity = stationarity_check(net, &traj).map_err(CliError::solver)?;
    let deviations = (0..net.n)
        .map(|i| deviation_test(net, &traj, i, count, seed, DEFAULT_DEVIATION_TOLERANCE))
        .collect::<Result<Vec<_>, _>>()
        .map_err(CliError::solver)?;
    let costs = (0..net.n).map(|i| evaluate_cost(net, &traj, i)).collect::<Result<_, _>>().map_err(CliError::solver)?;
    let passed = residual <= NASH_TOLERANCE
        && stationarity.iter().all(AgentStationarity::ok)
        && deviations.iter().all(|d| d.passed);
    Ok(RunReport {
        scenario: scenario_name(net),
        samples,
        costs,
        terminal: traj.terminal().to_vec(),
        nash_residual: Some(residual),
        stationarity,
        deviations,
        seed: Some(seed),
        passed: Some(passed),
        ..RunReport::default()
    })
}

/// Closed-form limits of a complete-uniform or single-leader scenario.
#[derive(Debug, Clone)]
pub struct LimitsReport {
    pub scenario: String,
    pub topology: &'static str,
    pub horizon: f64,
    pub x0: Vec<f64>,
    pub terminal: Vec<f64>,
    pub limit: Vec<f64>,
    /// `(eps, time)`; `None` when not reached on `[0, T]`.
    pub epsilon_times: Vec<(f64, Option<f64>)>,
    /// `(label, ratio at T, limiting ratio)` of distance to initial distance.
    pub distance_ratios: Vec<(String, f64, f64)>,
}

impl fmt::Display for LimitsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "scenario: {} ({}), T = {}", self.scenario, self.topology, self.horizon)?;
        writeln!(f, "agent  x0          x(T)        limit")?;
        for i in 0..self.x0.len() {
            writeln!(f, "{:>5}  {:<10.6}  {:<10.6}  {:.6}", i + 1, self.x0[i], self.terminal[i], self.limit[i])?;
        }
        writeln!(f, "eps         consensus time")?;
        for (eps, t) in &self.epsilon_times {
            match t {
                Some(t) => writeln!(f, "{eps:<10}  {t:.6}")?,
                None => writeln!(f, "{eps:<10}  not reached")?,
            }
        }
        writeln!(f, "pair        ratio at T    limit ratio")?;
        for (label, at_t, lim) in &self.distance_ratios {
            writeln!(f, "{label:<10}  {at_t:<12.6e}  {lim:.6e}")?;
        }
        Ok(())
    }
}

pub fn cmd_limits(net: &InfluenceNetwork<f64>, eps: &[f64]) -> CliResult<LimitsReport> {
    let cf = ClosedForm::for_network(net).map_err(CliError::solver)?.ok_or_else(|| {
        CliError::Unsupported("no closed form for this topology; use simulate with a large T".into())
    })?;
    let horizon = net.horizon;
    let terminal = cf.at(&net.x0, horizon).map_err(CliError::solver)?;
    let limit = cf.limit(&net.x0).map_err(CliError::solver)?;
    let epsilon_times = eps
        .iter()
        .map(|&e| cf.epsilon_time(&net.x0, e).map(|t| (e, t)))
        .collect::<Result<_, _>>()
        .map_err(CliError::input)?;
    let (topology, distance_ratios) = match &cf {
        ClosedForm::Complete(p) => {
            let at_t = crate::closed_form::gamma(p, horizon).map_err(CliError::solver)?;
            ("complete uniform", vec![("all pairs".to_string(), at_t, p.k / p.lambda1)])
        }
        ClosedForm::Leader(p) => {
            let rows = (1..p.n())
                .map(|i| {
                    let lim = if p.lambda[i] == 0.0 { 1.0 } else { p.k[i] / p.lambda[i] };
                    (format!("{}-1", i + 1), p.weights(i, horizon).1, lim)
                })
                .collect();
            ("single leader", rows)
        }
    };
    Ok(LimitsReport {
        scenario: scenario_name(net),
        topology,
        horizon,
        x0: net.x0.clone(),
        terminal,
        limit,
        epsilon_times,
        distance_ratios,
    })
}

/// Writes `<fig>.csv` and `<fig>.gp` for each requested figure.
pub fn cmd_figures(which: &str, out: &Path, samples: usize) -> CliResult<Vec<PathBuf>> {
    let names: Vec<&str> = if which == "all" {
        FIGURES.to_vec()
    } else if FIGURES.contains(&which) {
        vec![which]
    } else {
        return Err(CliError::Input(format!("unknown figure '{which}' (expected one of {}, all)", FIGURES.join(", "))));
    };
    let mut written = Vec::new();
    for name in names {
        let preset = presets::preset(name).expect("figure preset exists");
        let traj = solve_equilibrium(&preset.network, samples).map_err(CliError::solver)?;
        let csv = out.join(format!("{name}.csv"));
        let script = out.join(format!("{name}.gp"));
        write_file(&csv, &format_csv(&traj, false))?;
        write_file(&script, &gnuplot_script(name, &format!("{name}.csv"), traj.agents()))?;
        written.push(csv);
        written.push(script);
    }
    Ok(written)
}

fn print_warnings(warnings: &[Diagnostic]) {
    for w in warnings {
        eprintln!("{w}");
    }
}

fn execute(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Simulate { source, samples, out, costate } => {
            let (net, warnings) = load_source(&source)?;
            print_warnings(&warnings);
            print!("{}", cmd_simulate(&net, samples, &out, costate)?);
            Ok(0)
        }
        Command::Verify { source, samples, count, seed, candidate } => {
            let (net, warnings) = load_source(&source)?;
            print_warnings(&warnings);
            let report = cmd_verify(&net, samples, count, seed, candidate)?;
            print!("{report}");
            Ok(if report.passed == Some(true) { 0 } else { 1 })
        }
        Command::Limits { source, eps } => {
            let (net, warnings) = load_source(&source)?;
            print_warnings(&warnings);
            print!("{}", cmd_limits(&net, &eps)?);
            Ok(0)
        }
        Command::Figures { which, out, samples } => {
            for path in cmd_figures(&which, &out, samples)? {
                println!("{}", path.display());
            }
            Ok(0)
        }
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
