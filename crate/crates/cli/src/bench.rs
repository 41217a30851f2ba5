//! Benchmark matrix over the bundled synthetic curves.
//!
//! Table 1 runs the binary search for the maximum waiting time without
//! returns, table 2 the average-waiting graph, table 3 the return graph with
//! one shuttle on the curves scaled down by 3.5. Cells run on a pool of
//! worker threads and are reported in matrix order.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use shuttle_sched::report::gap_percent;
use shuttle_sched::solver::{noreturn_ave, noreturn_max, return_max};
use shuttle_sched::{synthetic, Result, SolveReport, Variant};

#[derive(Debug, Clone, PartialEq)]
pub enum Param {
    Rho(f64),
    M(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub table: u8,
    pub demand_id: String,
    pub shuttles: usize,
    pub param: Param,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub cell: Cell,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub cpu_s: f64,
}

impl Row {
    pub fn gap_column(&self) -> String {
        match gap_percent(self.lower_bound, self.upper_bound) {
            Some(g) => format!("{g:.1}"),
            None => "n/a".into(),
        }
    }
}

/// Cells of one table, optionally restricted to some curves, fleet sizes
/// and parameters.
pub fn matrix(table: u8, ids: Option<&[String]>, shuttles: Option<&[usize]>, ms: Option<&[usize]>, rho: f64) -> Vec<Cell> {
    let (default_ids, default_s, default_m): (&[&str], &[usize], &[usize]) = match table {
        1 => (&["1P", "2P"], &[100, 150, 200, 250], &[]),
        2 => (&["1P", "2P"], &[100, 200], &[32, 128]),
        _ => (&["1P/3.5", "2P/3.5"], &[1], &[16, 32]),
    };
    let ids: Vec<String> = match ids {
        Some(v) => v.to_vec(),
        None => default_ids.iter().map(|s| s.to_string()).collect(),
    };
    let s_list = shuttles.unwrap_or(default_s);
    let m_list = ms.unwrap_or(default_m);
    let mut out = Vec::new();
    for id in &ids {
        for &s in s_list {
            if table == 1 {
                out.push(Cell {
                    table,
                    demand_id: id.clone(),
                    shuttles: s,
                    param: Param::Rho(rho),
                });
            } else {
                for &m in m_list {
                    out.push(Cell {
                        table,
                        demand_id: id.clone(),
                        shuttles: s,
                        param: Param::M(m),
                    });
                }
            }
        }
    }
    out
}

pub fn run_cell(cell: &Cell, force: bool) -> Result<SolveReport> {
    let curve =
        synthetic::by_id(&cell.demand_id).ok_or_else(|| shuttle_sched::Error::Domain(format!("unknown demand id '{}'", cell.demand_id)))?;
    let variant = match cell.table {
        1 => Variant::NoreturnMax,
        2 => Variant::NoreturnAve,
        _ => Variant::ReturnMax,
    };
    let inst = synthetic::instance(variant, curve, cell.shuttles)?;
    match (&cell.param, cell.table) {
        (Param::Rho(rho), _) => noreturn_max::solve(&inst, *rho),
        (Param::M(m), 2) => noreturn_ave::solve(&inst, *m),
        (Param::M(m), _) => return_max::solve(&inst, *m, force),
    }
}

/// Runs every cell on up to `threads` workers and returns rows in input order.
pub fn run(cells: &[Cell], threads: usize, force: bool) -> Result<Vec<Row>> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<Result<Row>>>> = Mutex::new(vec![None; cells.len()]);
    std::thread::scope(|scope| {
        for _ in 0..threads.max(1).min(cells.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= cells.len() {
                    break;
                }
                let row = run_cell(&cells[i], force).map(|r| Row {
                    cell: cells[i].clone(),
                    lower_bound: r.lower_bound,
                    upper_bound: r.upper_bound,
                    cpu_s: r.wall_time_s,
                });
                results.lock().expect("no worker panics while holding the lock")[i] = Some(row);
            });
        }
    });
    results
        .into_inner()
        .expect("workers finished")
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

/// CSV text with columns `demand_id,S,param,LB,UB,gap_pct,cpu_s`. With
/// `timing` off the CPU column is left empty so the output is reproducible.
pub fn to_csv(rows: &[Row], timing: bool) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["demand_id", "S", "param", "LB", "UB", "gap_pct", "cpu_s"])
        .expect("in-memory write");
    for r in rows {
        let param = match r.cell.param {
            Param::Rho(rho) => format!("rho={rho}"),
            Param::M(m) => format!("M={m}"),
        };
        let cpu = if timing { format!("{:.3}", r.cpu_s) } else { String::new() };
        w.write_record([
            r.cell.demand_id.clone(),
            r.cell.shuttles.to_string(),
            param,
            format!("{:.4}", r.lower_bound),
            format!("{:.4}", r.upper_bound),
            r.gap_column(),
            cpu,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_shapes() {
        assert_eq!(matrix(1, None, None, None, 1e-4).len(), 8);
        assert_eq!(matrix(2, None, None, None, 1e-4).len(), 8);
        assert_eq!(matrix(3, None, None, None, 1e-4).len(), 4);
        let ids = vec!["2P".to_string()];
        let cells = matrix(1, Some(&ids), Some(&[100, 150, 200, 250]), None, 1e-4);
        assert_eq!(cells.len(), 4);
        assert!(cells.iter().all(|c| c.demand_id == "2P"));
    }

    #[test]
    fn table_one_has_zero_gaps() {
        let rows = run(&matrix(1, None, None, None, 1e-4), 2, false).unwrap();
        let csv = to_csv(&rows, false);
        assert_eq!(csv.lines().count(), 9);
        for r in &rows {
            assert_eq!(r.gap_column(), "0.0");
        }
    }
}
