use std::fs;
use std::io::Write;
use std::path::Path;

use qre_bench::experiment::ExperimentConfig;
use qre_bench::output::{run_cobb_douglas, write_outputs};
use qre_bench::report::{round_json, Cell, Table};
use qre_core::aspirational::{
    compute_acceptance, compute_acceptance_normalized, eval_target_representation,
};
use qre_core::envelope::{default_big_m, eval_psi, eval_psi_milp};
use qre_core::level_function::{solve_level_function, LevelFunctionOptions};
use qre_core::levelsets::levelset_hrep;
use qre_core::perminv::{augmented_sample, eval_psi_perm, solve_robust_perm, GroupShape};
use qre_core::problem::OutputMap;
use qre_core::solver::{solve_robust, SolveReport};

use crate::args::{
    AspirationalArgs, CobbArgs, EvalArgs, GroupArgs, LevelsetArgs, Method, SolveArgs,
};
use crate::error::{CliError, Result};
use crate::input::{emit, read_points, read_problem, read_sample, sink, RunConfig};

/// Environment variable capping the bench worker pool.
pub const THREADS_ENV: &str = "QRE_THREADS";

fn group_shape(g: &GroupArgs, cfg: &RunConfig) -> Result<Option<GroupShape>> {
    match (g.groups.or(cfg.groups), g.group_size.or(cfg.group_size)) {
        (Some(m), Some(k)) => Ok(Some(GroupShape::new(m, k))),
        (None, None) => Ok(None),
        _ => Err(CliError::Usage(
            "--groups and --group-size go together".into(),
        )),
    }
}

fn coordinate_headers(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|k| format!("{prefix}_{k}")).collect()
}

fn table(headers: &[String]) -> Table {
    Table::new(&headers.iter().map(String::as_str).collect::<Vec<_>>())
}

fn cells(x: &[f64]) -> Vec<Cell> {
    x.iter().map(|&v| Cell::Num(v)).collect()
}

pub fn eval(a: &EvalArgs, cfg: &RunConfig, json: bool) -> Result<()> {
    let s = read_sample(&a.sample, cfg)?;
    let shape = group_shape(&a.groups, cfg)?;
    let points = read_points(&a.points)?;
    let oracle_sample = match (&shape, a.oracle) {
        (Some(sh), true) => Some(augmented_sample(&s, sh)?),
        _ => None,
    };
    let mut headers = coordinate_headers("x", s.dim());
    headers.extend(["psi", "level_index", "lp_solves"].map(String::from));
    if a.oracle {
        headers.push("psi_milp".into());
    }
    let mut out = table(&headers);
    for x in &points {
        let ev = match &shape {
            Some(sh) => eval_psi_perm(&s, sh, x)?,
            None => eval_psi(&s, x)?,
        };
        let mut row = cells(x);
        row.extend([
            Cell::Num(ev.value),
            ev.level_index.into(),
            ev.lp_solves.into(),
        ]);
        if a.oracle {
            let base = oracle_sample.as_ref().unwrap_or(&s);
            let m = a
                .big_m
                .or(cfg.big_m)
                .unwrap_or_else(|| default_big_m(base, x));
            row.push(Cell::Num(eval_psi_milp(base, x, m)?));
        }
        out.push(row);
    }
    emit(&out, a.out.as_deref(), json)
}

pub fn levelset(a: &LevelsetArgs, cfg: &RunConfig, json: bool) -> Result<()> {
    let s = read_sample(&a.sample, cfg)?;
    let sets = a
        .levels
        .iter()
        .map(|&l| levelset_hrep(&s, l))
        .collect::<qre_core::Result<Vec<_>>>()?;
    let mut doc = if sets.len() == 1 {
        serde_json::to_value(&sets[0])?
    } else {
        serde_json::to_value(&sets)?
    };
    round_json(&mut doc);
    let mut w = sink(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &doc)?;
    writeln!(w)?;
    w.flush()?;

    if let Some(path) = &a.polyline {
        if s.dim() != 2 {
            return Err(CliError::Usage(
                "polylines need a two-dimensional sample".into(),
            ));
        }
        let upper = match &a.upper {
            Some(u) => [u[0], u[1]],
            None => s.points().iter().fold([f64::NEG_INFINITY; 2], |m, p| {
                [m[0].max(p[0]), m[1].max(p[1])]
            }),
        };
        let mut t = Table::new(&["level", "vertex", "x1", "x2"]);
        for set in &sets {
            for (i, v) in set.polyline(upper).unwrap_or_default().iter().enumerate() {
                t.push(vec![
                    Cell::Num(set.level),
                    i.into(),
                    Cell::Num(v[0]),
                    Cell::Num(v[1]),
                ]);
            }
        }
        emit(&t, Some(path), json)?;
    }
    Ok(())
}

fn trace_table(report: &SolveReport) -> Table {
    let mut t = Table::new(&["probe", "j", "value"]);
    for (i, p) in report.probes.iter().enumerate() {
        t.push(vec![(i + 1).into(), p.j.into(), Cell::Num(p.value)]);
    }
    t
}

pub fn solve(a: &SolveArgs, cfg: &RunConfig, json: bool) -> Result<()> {
    let s = read_sample(&a.sample, cfg)?;
    let rp = read_problem(&a.problem)?;
    let shape = group_shape(&a.groups, cfg)?;
    let (report, trace) = match (a.method, &shape) {
        (Method::Binary, None) => {
            let r = solve_robust(&s, &rp)?;
            let t = trace_table(&r);
            (r, t)
        }
        (Method::Binary, Some(sh)) => {
            let r = solve_robust_perm(&s, sh, &rp)?;
            let t = trace_table(&r);
            (r, t)
        }
        (Method::LevelFunction, Some(_)) => {
            return Err(CliError::Usage(
                "the level function has no permutation-invariant mode".into(),
            ))
        }
        (Method::LevelFunction, None) => {
            if rp.output != OutputMap::Identity {
                return Err(CliError::Usage(
                    "the level function needs the identity output map".into(),
                ));
            }
            let defaults = LevelFunctionOptions::default();
            let opts = LevelFunctionOptions {
                eps: a.eps.or(cfg.eps).unwrap_or(defaults.eps),
                max_iter: a.max_iter.or(cfg.max_iter).unwrap_or(defaults.max_iter),
            };
            let res = solve_level_function(&s, &rp.domain, &opts)?;
            let mut headers = vec!["iteration".to_string(), "value".into(), "gap".into()];
            headers.extend(coordinate_headers("x", s.dim()));
            let mut t = table(&headers);
            for (i, ((x, v), g)) in res
                .state
                .iterates
                .iter()
                .zip(&res.state.values)
                .zip(&res.state.gaps)
                .enumerate()
            {
                let mut row = vec![(i + 1).into(), Cell::Num(*v), Cell::Num(*g)];
                row.extend(cells(x));
                t.push(row);
            }
            let check = eval_psi(&s, &res.x)?.value;
            (res.to_report(Some(check)), t)
        }
    };
    if let Some(path) = &a.trace {
        emit(&trace, Some(path), json)?;
    }
    let mut w = sink(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &report)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn table_path(dir: &Path, stem: &str, json: bool) -> std::path::PathBuf {
    dir.join(format!("{stem}.{}", if json { "json" } else { "csv" }))
}

pub fn aspirational(a: &AspirationalArgs, cfg: &RunConfig, json: bool) -> Result<()> {
    let s = read_sample(&a.sample, cfg)?;
    let fam = if a.normalized {
        compute_acceptance_normalized(&s)?
    } else {
        compute_acceptance(&s)?
    };
    fs::create_dir_all(&a.out)?;

    let mut headers = vec!["j".to_string(), "value".into(), "c".into()];
    headers.extend(coordinate_headers("shift", s.dim()));
    let mut constants = table(&headers);
    for (j, (c, v)) in fam.constants.iter().zip(fam.sample().values()).enumerate() {
        let mut row = vec![(j + 1).into(), Cell::Num(*v), Cell::Num(*c)];
        row.extend(cells(&fam.shift));
        constants.push(row);
    }
    let path = table_path(&a.out, "constants", json);
    emit(&constants, Some(&path), json)?;
    println!("{}", path.display());

    if let Some(points) = &a.points {
        let mut headers = coordinate_headers("x", s.dim());
        headers.extend(["psi", "representation", "residual"].map(String::from));
        let mut t = table(&headers);
        let mut worst = 0.0f64;
        for x in read_points(points)? {
            let psi = eval_psi(&s, &x)?.value;
            let rep = eval_target_representation(&fam, &x)?;
            worst = worst.max((rep - psi).abs());
            let mut row = cells(&x);
            row.extend([Cell::Num(psi), Cell::Num(rep), Cell::Num(rep - psi)]);
            t.push(row);
        }
        let path = table_path(&a.out, "residuals", json);
        emit(&t, Some(&path), json)?;
        println!("{}", path.display());
        log::info!("largest representation residual {worst:e}");
    }
    Ok(())
}

fn env_threads() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Usage(format!("{THREADS_ENV}='{v}' is not a thread count"))),
        Err(_) => Ok(None),
    }
}

/// Defaults, then the config file's `bench` section and top-level
/// overrides, then the flags.
pub fn bench_config(a: &CobbArgs, cfg: &RunConfig) -> Result<ExperimentConfig> {
    let mut c = cfg.bench.clone().unwrap_or_default();
    c.seed = cfg.seed.unwrap_or(c.seed);
    c.lipschitz = cfg.lipschitz.unwrap_or(c.lipschitz);
    c.threads = cfg.threads.or(c.threads);
    if let Some(v) = &a.sizes {
        c.sizes = v.clone();
    }
    c.reps = a.reps.unwrap_or(c.reps);
    c.seed = a.seed.unwrap_or(c.seed);
    c.lipschitz = a.lipschitz.unwrap_or(c.lipschitz);
    if let Some(v) = &a.l1_sizes {
        c.l1_sizes = v.clone();
    }
    if let Some(v) = &a.runtime_sizes {
        c.runtime_sizes = v.clone();
    }
    c.l1_density = a.l1_density.unwrap_or(c.l1_density);
    c.clusters = a.clusters.or(c.clusters);
    if let Some(v) = &a.alpha {
        c.model.alpha = v.clone();
    }
    if let Some(v) = &a.cost {
        c.model.cost = v.clone();
    }
    c.model.x_min = a.x_min.unwrap_or(c.model.x_min);
    c.model.x_max = a.x_max.unwrap_or(c.model.x_max);
    c.threads = match a.threads.or(c.threads) {
        Some(t) => Some(t),
        None => env_threads()?,
    };
    c.validate()?;
    Ok(c)
}

pub fn bench_cobb(a: &CobbArgs, cfg: &RunConfig, json: bool) -> Result<()> {
    let c = bench_config(a, cfg)?;
    let out = run_cobb_douglas(&c)?;
    if out.gaps.replications.iter().any(|r| !r.majorizes) {
        log::warn!("the envelope missed a sampled value in some replication");
    }
    for path in write_outputs(&out, &a.out, json)? {
        println!("{}", path.display());
    }
    Ok(())
}
