//! File formats: observation CSV ("t,z"), chain trace CSV
//! ("iter,accept,logpost,x1..xn"), JSON chain summaries and JSON matrices.
//! All writers emit shortest-round-trip float text, so outputs are
//! byte-identical across reruns with the same seeds.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{DeltaRow, NoiseStudyReport};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::mcmc::ChainTrace;
use crate::ssm::ObservationSeries;

/// Writes a univariate observation series with header `t,z` (t is 1-based).
pub fn write_observations(path: &Path, data: &ObservationSeries<f64>) -> Result<()> {
    if data.obs_dim() != 1 {
        return Err(Error::Config("observation CSV format is univariate".into()));
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "z"])?;
    for (t, row) in data.iter_rows().enumerate() {
        w.write_record([(t + 1).to_string(), format!("{}", row[0])])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an observation series written by [`write_observations`].
pub fn read_observations(path: &Path) -> Result<ObservationSeries<f64>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.len() < 2 || headers.get(0) != Some("t") || headers.get(1) != Some("z") {
        return Err(Error::Config(format!(
            "expected observation CSV header \"t,z\", got {headers:?}"
        )));
    }
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let z: f64 = rec
            .get(1)
            .ok_or_else(|| Error::Config("missing z column".into()))?
            .parse()
            .map_err(|e| Error::Config(format!("bad z value: {e}")))?;
        values.push(z);
    }
    ObservationSeries::from_scalars(values)
}

/// Writes a trace with header `iter,accept,logpost,x1..xn`.
pub fn write_trace(path: &Path, trace: &ChainTrace<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["iter".to_string(), "accept".to_string(), "logpost".to_string()];
    for p in 0..trace.n_params() {
        header.push(format!("x{}", p + 1));
    }
    w.write_record(&header)?;
    for j in 0..trace.len() {
        let mut rec = vec![
            (j + 1).to_string(),
            u8::from(trace.accepted()[j]).to_string(),
            format!("{}", trace.log_post()[j]),
        ];
        for &v in trace.state(j) {
            rec.push(format!("{v}"));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Deterministic per-chain summary (timing lives in a sidecar).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChainSummary {
    pub iterations: usize,
    pub burn_in: usize,
    pub acceptance_rate: f64,
    pub esjd: f64,
    pub ess: Vec<f64>,
    pub min_ess: f64,
}

/// Timing sidecar, excluded from reproducibility comparisons.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimingSidecar {
    pub wall_secs: f64,
    pub min_ess_per_sec: f64,
}

pub fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub fn read_json<D: for<'de> Deserialize<'de>>(path: &Path) -> Result<D> {
    let f = BufReader::new(File::open(path)?);
    Ok(serde_json::from_reader(f)?)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MatrixJson {
    n: usize,
    rows: Vec<Vec<f64>>,
}

/// Persists a symmetric matrix (the pilot covariance) as JSON.
pub fn write_matrix(path: &Path, m: &SymMatrix<f64>) -> Result<()> {
    write_json(
        path,
        &MatrixJson {
            n: m.n(),
            rows: m.rows(),
        },
    )
}

pub fn read_matrix(path: &Path) -> Result<SymMatrix<f64>> {
    let mj: MatrixJson = read_json(path)?;
    let data: Vec<f64> = mj.rows.into_iter().flatten().collect();
    SymMatrix::from_rows(mj.n, data)
}

/// Writes noise-study rows with header `point_id,N,var_logpost,skew,kurt`.
pub fn write_noise_report(path: &Path, report: &NoiseStudyReport<f64>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["point_id", "N", "var_logpost", "skew", "kurt"])?;
    for r in &report.rows {
        w.write_record([
            r.point_id.to_string(),
            r.n_particles.to_string(),
            format!("{}", r.var_logpost),
            format!("{}", r.skewness),
            format!("{}", r.excess_kurtosis),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes regime-delta rows with header `rep,deltaA,deltaB,deltaC`.
pub fn write_delta_rows(path: &Path, rows: &[DeltaRow<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["rep", "deltaA", "deltaB", "deltaC"])?;
    for (i, r) in rows.iter().enumerate() {
        w.write_record([
            i.to_string(),
            format!("{}", r.delta_a),
            format!("{}", r.delta_b),
            format!("{}", r.delta_c),
        ])?;
    }
    w.flush()?;
    Ok(())
}
