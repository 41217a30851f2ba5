//! Command-line front end: instance files in, reports and CSV files out.

pub mod bench;
pub mod instance_file;
pub mod output;

use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use shuttle_sched::oracle::{brute_noreturn, brute_return_ave_constant, brute_return_max};
use shuttle_sched::{
    check_feasible, eval_gave, eval_gmax, eval_gmax_alt, solve_instance, Error, Instance, SolveParams, SolveReport, Variant,
};

use crate::instance_file::{InstanceFile, Params};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_PARSE: i32 = 4;

/// Environment variable capping the number of bench worker threads.
pub const THREADS_ENV: &str = "SHUTTLE_SCHED_THREADS";

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Io(String),
    Core(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::Core(Error::Domain(_)) => EXIT_PARSE,
            CliError::Io(_) => EXIT_IO,
            CliError::Core(Error::Infeasible(_)) => EXIT_INFEASIBLE,
            CliError::Core(_) => EXIT_PRECONDITION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

#[derive(Debug, Parser)]
#[command(name = "shuttle-sched", version, about = "Shuttle timetabling against a cumulative demand curve")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Tuning {
    /// Interval width at which the binary search stops.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Grid resolution of the graph solvers.
    #[arg(long = "M", visible_alias = "m")]
    pub m: Option<usize>,
    /// Run the return graph solver with more than two shuttles.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve an instance and print the report as JSON.
    Solve {
        instance: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
        /// Write the schedule as CSV (j,d,y,load,shuttle).
        #[arg(long)]
        schedule: Option<PathBuf>,
        /// Write the JSON report to a file instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Directory receiving demand.csv and departures.csv for plotting.
        #[arg(long)]
        emit_plot_data: Option<PathBuf>,
        /// Also dump the searched graph as CSV.
        #[arg(long)]
        graph_dump: Option<PathBuf>,
        /// Report a wall time of zero so output is byte-for-byte reproducible.
        #[arg(long)]
        no_timing: bool,
    },
    /// Check a schedule CSV against the constraints of an instance.
    Check { instance: PathBuf, schedule: PathBuf },
    /// Print the maximum, alternative maximum and average waiting times.
    Eval { instance: PathBuf, schedule: PathBuf },
    /// Brute-force reference value for a small instance.
    Oracle {
        instance: PathBuf,
        /// Number of load grid steps.
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long)]
        no_timing: bool,
    },
    /// Run a benchmark table on the bundled synthetic curves.
    Bench {
        /// 1: binary search, 2: average graph, 3: return graph; or "all".
        #[arg(long, default_value = "1")]
        table: String,
        /// Comma-separated demand ids (1P, 2P, 1P/3.5, 2P/3.5).
        #[arg(long, value_delimiter = ',')]
        demand: Option<Vec<String>>,
        /// Comma-separated fleet sizes.
        #[arg(long, value_delimiter = ',')]
        shuttles: Option<Vec<usize>>,
        /// Comma-separated grid resolutions.
        #[arg(long = "M", visible_alias = "m", value_delimiter = ',')]
        m: Option<Vec<usize>>,
        #[arg(long, default_value_t = 1e-4)]
        rho: f64,
        #[arg(long)]
        force: bool,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Leave the CPU column empty.
        #[arg(long)]
        no_timing: bool,
    },
    /// Dump the step graph or the average-waiting graph as CSV.
    GraphDump {
        instance: PathBuf,
        #[arg(long = "M", visible_alias = "m")]
        m: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<(Instance, Params), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file = InstanceFile::parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let inst = file
        .to_instance()
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    Ok((inst, file.params))
}

fn params(file: &Params, tuning: &Tuning) -> SolveParams {
    let mut p = SolveParams::default();
    if let Some(rho) = tuning.rho.or(file.rho) {
        p.rho = rho;
    }
    if let Some(m) = tuning.m.or(file.m) {
        p = p.with_m(m);
    }
    p.force = tuning.force;
    p
}

fn report_json(report: &SolveReport, no_timing: bool) -> String {
    let mut r = report.clone();
    if no_timing {
        r.wall_time_s = 0.0;
    }
    serde_json::to_string_pretty(&r).expect("reports always serialize") + "\n"
}

fn write_text(path: Option<&PathBuf>, text: &str, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
    }
}

fn threads() -> usize {
    let default = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(default)
}

fn execute(cli: Cli, out: &mut dyn std::io::Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Solve {
            instance,
            tuning,
            schedule,
            report,
            emit_plot_data,
            graph_dump,
            no_timing,
        } => {
            let (inst, file_params) = load(&instance)?;
            let p = params(&file_params, &tuning);
            if let Some(rho) = tuning.rho {
                if !(rho.is_finite() && rho > 0.0) {
                    return Err(CliError::Parse(format!("--rho must be positive, got {rho}")));
                }
            }
            let r = solve_instance(&inst, &p)?;
            write_text(report.as_ref(), &report_json(&r, no_timing), out)?;
            if let Some(path) = schedule {
                output::write_schedule(&path, &r.schedule, inst.shuttles)?;
            }
            if let Some(dir) = emit_plot_data {
                output::emit_plot_data(&dir, &inst, &r.schedule)?;
            }
            if let Some(path) = graph_dump {
                output::graph_dump(&path, &inst, p.m_ave)?;
            }
            Ok(EXIT_OK)
        }
        Command::Check { instance, schedule } => {
            let (inst, _) = load(&instance)?;
            let s = output::read_schedule(&schedule)?;
            let rep = check_feasible(&inst, &s, inst.variant.allows_return());
            let text = serde_json::to_string_pretty(&rep).expect("reports always serialize") + "\n";
            write_text(None, &text, out)?;
            Ok(if rep.feasible { EXIT_OK } else { EXIT_INFEASIBLE })
        }
        Command::Eval { instance, schedule } => {
            let (inst, _) = load(&instance)?;
            let s = output::read_schedule(&schedule)?;
            let text = format!(
                "g_max = {}\ng_max_alt = {}\ng_ave = {}\n",
                eval_gmax(&inst, &s),
                eval_gmax_alt(&inst, &s),
                eval_gave(&inst, &s)
            );
            write_text(None, &text, out)?;
            Ok(EXIT_OK)
        }
        Command::Oracle {
            instance,
            grid,
            schedule,
            no_timing,
        } => {
            let (inst, file_params) = load(&instance)?;
            let grid = grid.or(file_params.grid).unwrap_or(8);
            let r = match inst.variant {
                Variant::NoreturnMax | Variant::NoreturnAve => brute_noreturn(&inst, grid, inst.variant.objective())?,
                Variant::ReturnMax => brute_return_max(&inst, grid)?,
                Variant::ReturnAveConstant => brute_return_ave_constant(&inst)?,
            };
            write_text(None, &report_json(&r, no_timing), out)?;
            if let Some(path) = schedule {
                output::write_schedule(&path, &r.schedule, inst.shuttles)?;
            }
            Ok(EXIT_OK)
        }
        Command::Bench {
            table,
            demand,
            shuttles,
            m,
            rho,
            force,
            out: path,
            no_timing,
        } => {
            let tables: Vec<u8> = match table.as_str() {
                "all" => vec![1, 2, 3],
                "1" => vec![1],
                "2" => vec![2],
                "3" => vec![3],
                other => return Err(CliError::Parse(format!("--table must be 1, 2, 3 or all, got '{other}'"))),
            };
            if !(rho.is_finite() && rho > 0.0) {
                return Err(CliError::Parse(format!("--rho must be positive, got {rho}")));
            }
            let mut cells = Vec::new();
            for t in tables {
                cells.extend(bench::matrix(t, demand.as_deref(), shuttles.as_deref(), m.as_deref(), rho));
            }
            let rows = bench::run(&cells, threads(), force)?;
            write_text(path.as_ref(), &bench::to_csv(&rows, !no_timing), out)?;
            Ok(EXIT_OK)
        }
        Command::GraphDump { instance, m, out: path } => {
            let (inst, file_params) = load(&instance)?;
            output::graph_dump(&path, &inst, m.or(file_params.m).unwrap_or(SolveParams::default().m_ave))?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `argv` (including the program name), runs the command and returns
/// the process exit code. Diagnostics go to standard error.
pub fn run<I, T>(argv: I, out: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("shuttle-sched: {e}");
            e.exit_code()
        }
    }
}
