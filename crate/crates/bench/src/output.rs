//! Runs the whole study and writes its tables.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde_json::json;

use crate::error::Result;
use crate::experiment::{
    run_contours, run_gap_experiment, run_l1_study, run_runtime_study, ContourSet,
    ExperimentConfig, GapStudy, L1Row, RuntimeRow,
};
use crate::report::Table;

#[derive(Debug, Clone)]
pub struct BenchOutputs {
    pub config: ExperimentConfig,
    pub gaps: GapStudy,
    pub l1: Vec<L1Row>,
    pub runtime: Vec<RuntimeRow>,
    /// Empty for models that are not two-dimensional.
    pub contours: Vec<ContourSet>,
    pub seconds: f64,
}

pub fn run_cobb_douglas(cfg: &ExperimentConfig) -> Result<BenchOutputs> {
    let start = Instant::now();
    let gaps = run_gap_experiment(cfg)?;
    let l1 = run_l1_study(cfg)?;
    let runtime = run_runtime_study(cfg)?;
    let contours = if cfg.model.dim() == 2 {
        run_contours(cfg)?
    } else {
        Vec::new()
    };
    Ok(BenchOutputs {
        config: cfg.clone(),
        gaps,
        l1,
        runtime,
        contours,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn gaps_table(study: &GapStudy) -> Table {
    let mut t = Table::new(&[
        "method",
        "J",
        "mean_gap_pct",
        "std_gap_pct",
        "max_gap_pct",
        "min_gap_pct",
    ]);
    for r in &study.rows {
        t.push(vec![
            r.method.name().into(),
            r.j.into(),
            r.mean.into(),
            r.std.into(),
            r.max.into(),
            r.min.into(),
        ]);
    }
    t
}

pub fn l1_table(rows: &[L1Row]) -> Table {
    let mut t = Table::new(&["method", "J", "l1_error"]);
    for r in rows {
        t.push(vec![r.method.name().into(), r.j.into(), r.l1.into()]);
    }
    t
}

/// Counts only; wall-clock times go to the metadata file.
pub fn runtime_table(rows: &[RuntimeRow]) -> Table {
    let mut t = Table::new(&[
        "J",
        "eval_lp_solves",
        "lp_budget",
        "milp_nodes",
        "milp_deviation",
        "solve_lp_solves",
    ]);
    for r in rows {
        t.push(vec![
            r.j.into(),
            r.eval_lp_solves.into(),
            r.budget.into(),
            r.milp_nodes.into(),
            r.milp_deviation.into(),
            r.solve_lp_solves.into(),
        ]);
    }
    t
}

pub fn contour_table(set: &ContourSet) -> Table {
    let mut t = Table::new(&["level", "segment", "x0", "y0", "x1", "y1"]);
    for (level, segs) in &set.levels {
        for (k, s) in segs.iter().enumerate() {
            t.push(vec![
                (*level).into(),
                k.into(),
                s[0].into(),
                s[1].into(),
                s[2].into(),
                s[3].into(),
            ]);
        }
    }
    t
}

fn write_table(dir: &Path, stem: &str, table: &Table, json: bool) -> Result<PathBuf> {
    let path = dir.join(format!("{stem}.{}", if json { "json" } else { "csv" }));
    table.write(BufWriter::new(File::create(&path)?), json)?;
    Ok(path)
}

/// Writes `gaps`, `l1`, `runtime`, one `contours_<method>` file per method
/// and `meta.json` into `dir`; returns the paths written.
pub fn write_outputs(out: &BenchOutputs, dir: &Path, json: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = vec![
        write_table(dir, "gaps", &gaps_table(&out.gaps), json)?,
        write_table(dir, "l1", &l1_table(&out.l1), json)?,
        write_table(dir, "runtime", &runtime_table(&out.runtime), json)?,
    ];
    for set in &out.contours {
        written.push(write_table(
            dir,
            &format!("contours_{}", set.name),
            &contour_table(set),
            json,
        )?);
    }
    let timings: Vec<_> = out
        .runtime
        .iter()
        .map(
            |r| json!({ "J": r.j, "eval_seconds": r.eval_seconds, "milp_seconds": r.milp_seconds }),
        )
        .collect();
    let meta = json!({
        "config": out.config,
        "optimum": { "x": out.gaps.optimum_x, "value": out.gaps.optimum },
        "all_replications_majorize": out.gaps.replications.iter().all(|r| r.majorizes),
        "timings": timings,
        "total_seconds": out.seconds,
        "generated_unix": SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
        "version": env!("CARGO_PKG_VERSION"),
    });
    let path = dir.join("meta.json");
    serde_json::to_writer_pretty(BufWriter::new(File::create(&path)?), &meta)?;
    written.push(path);
    Ok(written)
}
