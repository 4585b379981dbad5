//! Reading samples, points, problems and the config file; writing tables.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use qre_bench::experiment::ExperimentConfig;
use qre_bench::report::Table;
use qre_core::problem::RobustProblem;
use qre_core::sample::{RawSample, SortedSample};
use serde::Deserialize;

use crate::args::SampleArgs;
use crate::error::{CliError, Result};

/// Settings file given with `--config`. Every field is optional; command
/// line flags win over it.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lipschitz: Option<f64>,
    pub monotone: Option<bool>,
    pub big_m: Option<f64>,
    pub eps: Option<f64>,
    pub max_iter: Option<usize>,
    pub groups: Option<usize>,
    pub group_size: Option<usize>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
    pub bench: Option<ExperimentConfig>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => serde_json::from_reader(BufReader::new(open(p)?))
                .map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        }
    }
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleFile {
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    lipschitz: Option<f64>,
    monotone: Option<bool>,
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn parse_num(field: &str, path: &Path, line: usize) -> Result<f64> {
    field.trim().parse().map_err(|_| {
        CliError::Usage(format!(
            "{}:{line}: '{field}' is not a number",
            path.display()
        ))
    })
}

/// Sample from JSON or CSV. The Lipschitz constant and monotone flag come
/// from the flags, then the file, then the config; monotone defaults to on.
pub fn read_sample(args: &SampleArgs, cfg: &RunConfig) -> Result<SortedSample> {
    let path = &args.sample;
    let (points, values, file_l, file_m) = if is_csv(path) {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(open(path)?);
        let headers = rdr.headers()?.clone();
        let value_col = headers
            .iter()
            .position(|h| h == "value")
            .ok_or_else(|| CliError::Usage(format!("{}: no 'value' column", path.display())))?;
        let mut points = Vec::new();
        let mut values = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let mut p = Vec::with_capacity(rec.len().saturating_sub(1));
            for (k, field) in rec.iter().enumerate() {
                let v = parse_num(field, path, i + 2)?;
                if k == value_col {
                    values.push(v);
                } else {
                    p.push(v);
                }
            }
            points.push(p);
        }
        (points, values, None, None)
    } else {
        let f: SampleFile = serde_json::from_reader(BufReader::new(open(path)?))
            .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        (f.points, f.values, f.lipschitz, f.monotone)
    };
    let lipschitz = args
        .lipschitz
        .or(file_l)
        .or(cfg.lipschitz)
        .ok_or_else(|| CliError::Usage("no Lipschitz constant: pass --lipschitz".into()))?;
    let monotone = args.monotone.or(file_m).or(cfg.monotone).unwrap_or(true);
    Ok(SortedSample::new(RawSample::new(
        points, values, lipschitz, monotone,
    ))?)
}

/// Rows of numbers; a first row that does not parse is taken as a header.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(open(path)?);
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let parsed: Option<Vec<f64>> = rec.iter().map(|f| f.parse().ok()).collect();
        match parsed {
            Some(row) => rows.push(row),
            None if i == 0 => continue,
            None => {
                let bad = rec
                    .iter()
                    .find(|f| f.parse::<f64>().is_err())
                    .unwrap_or_default();
                return Err(CliError::Usage(format!(
                    "{}:{}: '{bad}' is not a number",
                    path.display(),
                    i + 1
                )));
            }
        }
    }
    Ok(rows)
}

pub fn read_problem(path: &Path) -> Result<RobustProblem> {
    RobustProblem::from_reader(BufReader::new(open(path)?)).map_err(|e| match CliError::from(e) {
        CliError::Usage(m) => CliError::Usage(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Writer to `path`, or standard output.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            CliError::Usage(format!("cannot write {}: {e}", p.display()))
        })?)),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn emit(table: &Table, path: Option<&Path>, json: bool) -> Result<()> {
    let mut w = sink(path)?;
    table.write(&mut w, json)?;
    w.flush()?;
    Ok(())
}
