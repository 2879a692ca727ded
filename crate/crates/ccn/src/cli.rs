//! The `ccn` command line.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use ccn_core::analyze::{
    constant_pattern_window, detect_phase_shift, pattern_on_interval, periodicity_report, stationary_cells,
    AnalyzeError, PeriodOptions,
};
use ccn_core::coloring::{
    brute_force_balanced, canonical_sort, enumerate_balanced_with, hasse_edges, quotient_network, ColoringError,
    DEFAULT_ENUMERATION_CAP,
};
use ccn_core::field::{parse_field_with, DslError};
use ccn_core::network::{input_isomorphisms, validate_network};
use ccn_core::sim::{integrate, IntegrateOptions, Method, SimError};
use ccn_core::{CellId, TypedNetwork};
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::experiment::{self, ExperimentError};
use crate::formats::{self, FormatError};
use crate::report::{
    derivative_source_name, AnalyzeReport, ColoringsReport, IsomorphismsReport, PatternSummary, PeriodicitySummary,
    PhaseSummary, QuotientReport, Section, SimulateReport, StationarySummary, ValidateReport, WindowsSummary,
};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    /// A domain verdict is negative: invalid network, unbalanced coloring,
    /// failed experiment claim.
    Negative = 1,
    Usage = 2,
    Runtime = 3,
}

/// An error with a stable machine-readable code.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub exit: Exit,
    pub message: String,
}

impl CliError {
    fn new(code: &'static str, exit: Exit, message: impl Into<String>) -> Self {
        Self { code, exit, message: message.into() }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        let exit = if matches!(e, FormatError::Io { .. }) { Exit::Runtime } else { Exit::Negative };
        Self::new(e.code(), exit, e.to_string())
    }
}

impl From<DslError> for CliError {
    fn from(e: DslError) -> Self {
        Self::new("dsl-error", Exit::Negative, format!("{} [{}]", e, e.kind.code()))
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidOptions(_) | SimError::InvalidSpan(..) => Self::new("usage", Exit::Usage, e.to_string()),
            SimError::Dimension(_) => Self::new("bad-state", Exit::Negative, e.to_string()),
            _ => Self::new("simulation-failed", Exit::Runtime, e.to_string()),
        }
    }
}

impl From<AnalyzeError> for CliError {
    fn from(e: AnalyzeError) -> Self {
        match e {
            AnalyzeError::EmptyInterval { .. } | AnalyzeError::OutOfSpan { .. } | AnalyzeError::InvalidShift { .. } => {
                Self::new("bad-interval", Exit::Usage, e.to_string())
            }
            AnalyzeError::LayoutMismatch => Self::new("bad-trajectory", Exit::Negative, e.to_string()),
            _ => Self::new("analysis-failed", Exit::Runtime, e.to_string()),
        }
    }
}

impl From<ColoringError> for CliError {
    fn from(e: ColoringError) -> Self {
        let code = match e {
            ColoringError::Unbalanced(..) => "unbalanced",
            ColoringError::TooManyCells { .. } => "too-many-cells",
            _ => "bad-coloring",
        };
        Self::new(code, Exit::Negative, e.to_string())
    }
}

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        let exit = if e.is_input_error() { Exit::Negative } else { Exit::Runtime };
        Self::new(e.code(), exit, e.to_string())
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::new("io", Exit::Runtime, format!("{}: {e}", path.display()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dopri5,
    Rk4,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let value: f64 = value.trim().parse().map_err(|_| format!("{value:?} is not a number"))?;
    if name.trim().is_empty() {
        return Err("empty parameter name".into());
    }
    Ok((name.trim().to_string(), value))
}

/// Typed coupled-cell networks: validation, balanced colorings, quotients,
/// simulation, synchrony analysis and perturbation experiments.
///
/// Network arguments take a network JSON file or `fixture:NAME` for a
/// built-in network (fig1, fig3, chain, single, pair-same, pair-distinct,
/// ring3, star5).
#[derive(Debug, Parser)]
#[command(name = "ccn", version)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Worker threads for per-seed work; results do not depend on it.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
    /// Seed base for every stochastic output, overriding config files.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override a field parameter: -P name=value.
    #[arg(short = 'P', global = true, value_name = "NAME=VALUE", value_parser = parse_param)]
    pub params: Vec<(String, f64)>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a network document against the network axioms.
    Validate {
        #[arg(long)]
        net: String,
    },
    /// List input isomorphisms B(c, c2).
    Isomorphisms {
        #[arg(long)]
        net: String,
        /// Source cell; all cells when omitted.
        #[arg(long)]
        from: Option<String>,
        /// Target cell; all cells when omitted.
        #[arg(long)]
        to: Option<String>,
        /// Show internal self-arrows in the maps.
        #[arg(long)]
        include_internal: bool,
    },
    /// Enumerate balanced colorings and their finer-than order.
    Colorings {
        #[arg(long)]
        net: String,
        /// Use exhaustive search over all partitions.
        #[arg(long)]
        brute_force: bool,
        /// Largest network the enumeration accepts.
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
        cap: usize,
    },
    /// Build the quotient network of a balanced coloring.
    Quotient {
        #[arg(long)]
        net: String,
        /// Coloring JSON file.
        #[arg(long)]
        coloring: PathBuf,
        /// Write the quotient network document here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integrate a DSL field from an initial state.
    Simulate {
        #[arg(long)]
        net: String,
        /// Field DSL file.
        #[arg(long)]
        field: PathBuf,
        /// Initial state JSON file.
        #[arg(long)]
        x0: PathBuf,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        t0: f64,
        #[arg(long, allow_negative_numbers = true)]
        t1: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Dopri5)]
        method: MethodArg,
        #[arg(long, default_value_t = Method::DEFAULT_RTOL)]
        rtol: f64,
        #[arg(long, default_value_t = Method::DEFAULT_ATOL)]
        atol: f64,
        /// Fixed step for rk4.
        #[arg(long)]
        step: Option<f64>,
        /// Store the solution on this many uniform intervals (dopri5).
        #[arg(long)]
        samples: Option<usize>,
        /// Trajectory CSV output.
        #[arg(long)]
        out: PathBuf,
        /// Binary trajectory cache output.
        #[arg(long)]
        cache: Option<PathBuf>,
        /// Gnuplot-ready data output.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
    },
    /// Synchrony, stationarity, periodicity and phase-shift analysis of a
    /// trajectory (CSV or binary cache).
    Analyze {
        #[arg(long)]
        traj: PathBuf,
        #[arg(long)]
        net: String,
        /// Phase shift to test.
        #[arg(long, allow_negative_numbers = true)]
        theta: Option<f64>,
        /// Equality tolerance (sup norm).
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Rate below which a cell counts as stationary.
        #[arg(long, default_value_t = 1e-6)]
        tol_rate: f64,
        /// Start of the analysis interval; trajectory start by default.
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        /// End of the analysis interval; trajectory end by default.
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
    },
    /// Run a perturbation experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Directory for results.json, summary.csv and plot data.
        #[arg(long)]
        out: PathBuf,
        /// Also write plot.dat with per-seed data.
        #[arg(long)]
        emit_plot_data: bool,
    },
    /// Write man pages generated from the flag registry.
    Man {
        /// Directory for one page per command; stdout gets the main page
        /// when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` and runs the command, writing results to `out` and errors
/// to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return Exit::Success as i32;
            }
            let message = e.render().to_string();
            let _ = writeln!(err, "error[usage]: {}", message.trim_end());
            return Exit::Usage as i32;
        }
    };
    match execute(&cli, out) {
        Ok(exit) => exit as i32,
        Err(e) => {
            match cli.format {
                Format::Table => {
                    let _ = writeln!(err, "error[{}]: {}", e.code, e.message);
                }
                Format::Json => {
                    let v = serde_json::json!({"error": {"code": e.code, "message": e.message, "exit": e.exit as i32}});
                    let _ = writeln!(err, "{v}");
                }
            }
            e.exit as i32
        }
    }
}

fn emit<T: Serialize>(out: &mut dyn Write, format: Format, value: &T, table: impl FnOnce(&T) -> String) -> Result<(), CliError> {
    let text = match format {
        Format::Json => formats::to_pretty(value),
        Format::Table => table(value),
    };
    out.write_all(text.as_bytes()).map_err(|e| io_error(Path::new("<stdout>"), e))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| io_error(path, e))
}

fn require_cell(net: &TypedNetwork, name: &str) -> Result<CellId, CliError> {
    net.cell_id(name).ok_or_else(|| CliError::new("unknown-cell", Exit::Usage, format!("unknown cell {name:?}")))
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<Exit, CliError> {
    let format = cli.format;
    match &cli.command {
        Command::Validate { net } => {
            let spec = formats::load_network_spec(net)?;
            let report = ValidateReport::new(&validate_network(&spec));
            emit(out, format, &report, ValidateReport::table)?;
            Ok(if report.valid { Exit::Success } else { Exit::Negative })
        }
        Command::Isomorphisms { net, from, to, include_internal } => {
            let net = formats::load_network(net)?;
            let pick = |name: &Option<String>| -> Result<Vec<CellId>, CliError> {
                match name {
                    Some(n) => Ok(vec![require_cell(&net, n)?]),
                    None => Ok(net.cells().collect()),
                }
            };
            let (sources, targets) = (pick(from)?, pick(to)?);
            let explicit = from.is_some() && to.is_some();
            let mut sets = Vec::new();
            for &c in &sources {
                for &c2 in &targets {
                    let isos = input_isomorphisms(&net, c, c2).expect("cells of the network");
                    if explicit || !isos.is_empty() {
                        sets.push((c, c2, isos));
                    }
                }
            }
            let report = IsomorphismsReport::new(&net, &sets, *include_internal);
            emit(out, format, &report, IsomorphismsReport::table)?;
            Ok(Exit::Success)
        }
        Command::Colorings { net, brute_force, cap } => {
            let net = formats::load_network(net)?;
            let mut colorings =
                if *brute_force { brute_force_balanced(&net)? } else { enumerate_balanced_with(&net, *cap)? };
            canonical_sort(&mut colorings);
            let edges = hasse_edges(&colorings);
            let method = if *brute_force { "brute-force" } else { "refinement" };
            let report = ColoringsReport::new(&net, method, &colorings, &edges);
            emit(out, format, &report, ColoringsReport::table)?;
            Ok(Exit::Success)
        }
        Command::Quotient { net, coloring, out: path } => {
            let net = formats::load_network(net)?;
            let col = formats::parse_coloring(&formats::read_text(coloring)?, &net)?;
            let q = quotient_network(&net, &col)?;
            let spec = q.network.to_spec();
            if let Some(path) = path {
                write_file(path, formats::network_to_json(&spec).as_bytes())?;
            }
            let projection: BTreeMap<String, String> = net
                .cells()
                .map(|c| (net.cell_name(c).to_string(), q.network.cell_name(q.projection[c.index()]).to_string()))
                .collect();
            let report = QuotientReport {
                version: crate::report::REPORT_VERSION,
                coloring: col.describe(&net),
                network: formats::NetworkFile::from_spec(&spec),
                projection,
            };
            emit(out, format, &report, QuotientReport::table)?;
            Ok(Exit::Success)
        }
        Command::Simulate {
            net,
            field,
            x0,
            t0,
            t1,
            method,
            rtol,
            atol,
            step,
            samples,
            out: path,
            cache,
            emit_plot_data,
        } => {
            let net = formats::load_network(net)?;
            let overrides: Vec<(&str, f64)> = cli.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
            let f = parse_field_with(&formats::read_text(field)?, &net, &overrides)?;
            let x = formats::parse_state(&formats::read_text(x0)?, &net)?;
            let mut opts = match method {
                MethodArg::Dopri5 => IntegrateOptions::dopri(*rtol, *atol),
                MethodArg::Rk4 => {
                    let h = step.ok_or_else(|| CliError::new("usage", Exit::Usage, "--method rk4 needs --step"))?;
                    IntegrateOptions::rk4(h)
                }
            };
            if let Some(n) = samples {
                if *n == 0 {
                    return Err(CliError::new("usage", Exit::Usage, "--samples must be positive"));
                }
                opts.output_times = Some((1..*n).map(|i| t0 + (t1 - t0) * i as f64 / *n as f64).collect());
            }
            let traj = integrate(&net, &f, &x, *t0, *t1, &opts)?;
            let mut csv = Vec::new();
            formats::write_trajectory_csv(&net, &traj, &mut csv)?;
            write_file(path, &csv)?;
            if let Some(p) = cache {
                write_file(p, &formats::encode_cache(&traj))?;
            }
            if let Some(p) = emit_plot_data {
                let mut header = vec!["t".to_string()];
                header.extend(formats::state_columns(&net));
                let rows: Vec<Vec<f64>> = (0..traj.len())
                    .map(|i| std::iter::once(traj.times()[i]).chain(traj.state(i).iter().copied()).collect())
                    .collect();
                let mut buf = Vec::new();
                formats::write_plot_data(&mut buf, &header, &rows).map_err(|e| io_error(p, e))?;
                write_file(p, &buf)?;
            }
            emit(out, format, &SimulateReport::new(&net, &traj), SimulateReport::table)?;
            Ok(Exit::Success)
        }
        Command::Analyze { traj, net, theta, tol, tol_rate, from, to } => {
            let net = formats::load_network(net)?;
            let traj = formats::load_trajectory(&net, traj)?;
            let (sigma, tau) = (from.unwrap_or(traj.t0()), to.unwrap_or(traj.t1()));
            let pattern = pattern_on_interval(&net, &traj, sigma, tau, *tol)?;
            let window = traj.window(sigma, tau).ok_or(AnalyzeError::EmptyInterval { sigma, tau })?;
            let stationary = stationary_cells(&net, &traj, sigma, tau, *tol_rate)?;
            let windows = constant_pattern_window(&net, &window, *tol).map(|w| WindowsSummary::new(&net, &w));
            let periodicity =
                periodicity_report(&net, &window, &PeriodOptions::default()).map(|r| PeriodicitySummary::new(&net, &r));
            let phase = match theta {
                Some(theta) => {
                    let r = detect_phase_shift(&net, &window, *theta, *tol);
                    if let Err(e @ AnalyzeError::InvalidShift { .. }) = r {
                        return Err(e.into());
                    }
                    Some(Section::from_result(r.map(|r| PhaseSummary::new(&net, &r))))
                }
                None => None,
            };
            let report = AnalyzeReport {
                version: crate::report::REPORT_VERSION,
                tol: *tol,
                tol_rate: *tol_rate,
                derivatives: derivative_source_name(traj.meta.derivatives).into(),
                pattern: PatternSummary::new(&net, &pattern),
                windows: Section::from_result(windows),
                stationary: StationarySummary::new(&net, &stationary),
                periodicity: Section::from_result(periodicity),
                phase,
            };
            emit(out, format, &report, AnalyzeReport::table)?;
            Ok(Exit::Success)
        }
        Command::Experiment { config, out: dir, emit_plot_data } => {
            let cfg = experiment::parse_config(&formats::read_text(config)?)?;
            let base_dir = config.parent().unwrap_or(Path::new("."));
            let prepared = experiment::prepare(cfg, base_dir, &cli.params, cli.seed)?;
            let results = experiment::run(&prepared, cli.jobs as usize)?;
            std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            write_file(&dir.join("results.json"), formats::to_pretty(&results).as_bytes())?;
            write_file(&dir.join("summary.csv"), results.summary_csv().as_bytes())?;
            if *emit_plot_data {
                let (header, rows) = results.plot_data();
                let mut buf = Vec::new();
                formats::write_plot_data(&mut buf, &header, &rows).map_err(|e| io_error(dir, e))?;
                write_file(&dir.join("plot.dat"), &buf)?;
            }
            emit(out, format, &results, experiment::ExperimentResults::table)?;
            Ok(if results.passed() { Exit::Success } else { Exit::Negative })
        }
        Command::Man { out: dir } => {
            let cmd = Cli::command();
            match dir {
                None => {
                    let mut buf = Vec::new();
                    clap_mangen::Man::new(cmd).render(&mut buf).map_err(|e| io_error(Path::new("<stdout>"), e))?;
                    out.write_all(&buf).map_err(|e| io_error(Path::new("<stdout>"), e))?;
                }
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
                    let mut buf = Vec::new();
                    clap_mangen::Man::new(cmd.clone()).render(&mut buf).map_err(|e| io_error(dir, e))?;
                    write_file(&dir.join("ccn.1"), &buf)?;
                    for sub in cmd.get_subcommands() {
                        let name = format!("ccn-{}", sub.get_name());
                        let page = sub.clone().name(name.clone());
                        let mut buf = Vec::new();
                        clap_mangen::Man::new(page).render(&mut buf).map_err(|e| io_error(dir, e))?;
                        write_file(&dir.join(format!("{name}.1")), &buf)?;
                    }
                }
            }
            Ok(Exit::Success)
        }
    }
}
