//! Schedule CSV files, plot data and graph dumps.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use shuttle_sched::solver::noreturn_ave::AveGraph;
use shuttle_sched::solver::step::StepGraph;
use shuttle_sched::{CurveKind, Instance, Scalar, Schedule, Variant};

use crate::CliError;

#[derive(Debug, Serialize, Deserialize)]
struct ScheduleRow {
    j: usize,
    d: f64,
    y: f64,
    #[serde(default)]
    load: Option<f64>,
    #[serde(default)]
    shuttle: Option<usize>,
}

pub fn write_schedule(path: &Path, schedule: &Schedule, shuttles: usize) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for j in 1..=schedule.len() {
        w.serialize(ScheduleRow {
            j,
            d: schedule.d[j - 1],
            y: schedule.y[j - 1],
            load: Some(schedule.load(j)),
            shuttle: Some(Schedule::shuttle_of(j, shuttles)),
        })
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

/// Reads `j,d,y[,load,shuttle]` rows; `load` and `shuttle` are ignored.
pub fn read_schedule(path: &Path) -> Result<Schedule, CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut r = csv::Reader::from_reader(file);
    let mut d = Vec::new();
    let mut y = Vec::new();
    for (i, row) in r.deserialize::<ScheduleRow>().enumerate() {
        let row = row.map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
        if row.j != i + 1 {
            return Err(CliError::Parse(format!(
                "{}: row {} has j = {}, expected {}",
                path.display(),
                i + 1,
                row.j,
                i + 1
            )));
        }
        d.push(row.d);
        y.push(row.y);
    }
    Schedule::new(d, y).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<std::io::BufWriter<std::fs::File>, CliError> {
    std::fs::File::create(path)
        .map(std::io::BufWriter::new)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn io(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

/// Writes `demand.csv` with `(t, D(t))` samples and `departures.csv` with
/// `(j, d_j, wait)` where `wait = d_j - tau(y_{j-1})` is the wait of the
/// first user of departure `j`.
pub fn emit_plot_data(dir: &Path, instance: &Instance, schedule: &Schedule) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let curve = &instance.demand;
    let horizon = curve.horizon();
    let mut times: Vec<f64> = (0..=200).map(|i| horizon * i as f64 / 200.0).collect();
    times.extend(curve.anchors().iter().map(|a| a.0));
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut f = create(&dir.join("demand.csv"))?;
    writeln!(f, "t,D").map_err(io)?;
    for t in times {
        let v = curve.eval(t).map_err(CliError::Core)?;
        writeln!(f, "{t},{v}").map_err(io)?;
    }
    let mut f = create(&dir.join("departures.csv"))?;
    writeln!(f, "j,d,wait").map_err(io)?;
    for j in 1..=schedule.len() {
        let prev = if j > 1 { schedule.y[j - 2] } else { 0.0 };
        let wait = schedule.d[j - 1] - curve.float().tau(&prev);
        writeln!(f, "{j},{},{wait}", schedule.d[j - 1]).map_err(io)?;
    }
    Ok(())
}

/// Dumps the graph a solver would search: arcs of the step graph or of the
/// average-waiting graph. The return graph is too large to list.
pub fn graph_dump(path: &Path, instance: &Instance, m: usize) -> Result<(), CliError> {
    let mut f = create(path)?;
    let step_case = instance.demand.kind() == CurveKind::Step && instance.nu == 0.0 && !instance.variant.allows_return();
    if step_case {
        let g = StepGraph::build(instance).map_err(CliError::Core)?;
        writeln!(f, "from,to,from_load,to_load").map_err(io)?;
        for (v, yv) in g.vertices.iter().enumerate() {
            for (u, yu) in g.vertices.iter().enumerate().take(v + 1) {
                let x = yv.clone() - yu.clone();
                if x.to_f64() <= instance.capacity {
                    writeln!(f, "{u},{v},{},{}", yu.to_f64(), yv.to_f64()).map_err(io)?;
                }
            }
        }
        return Ok(());
    }
    match instance.variant {
        Variant::NoreturnAve => {
            let g = AveGraph::build(instance, m).map_err(CliError::Core)?;
            writeln!(f, "from_z,from_r,to_z,to_r,weight").map_err(io)?;
            for ((fz, fr), (tz, tr), w) in g.arcs() {
                writeln!(f, "{fz},{fr},{tz},{tr},{w}").map_err(io)?;
            }
            Ok(())
        }
        v => Err(CliError::Core(shuttle_sched::Error::Unsupported(format!(
            "graph dump is available for step demand without loading time and for noreturn_ave, not {v}"
        )))),
    }
}
