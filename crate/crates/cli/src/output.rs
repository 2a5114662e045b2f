//! Writers and readers for the CSV and JSON files the commands produce.

use std::io::{BufRead, Write};

use nohide::circuit::GridPoint;
use nohide::nmrsim::ObservationRecord;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCAN_HEADER: [&str; 6] = ["theta_deg", "phi_deg", "stage", "spin", "re_signal", "im_signal"];

pub const SCAN_ORDERING: &str =
    "# mesh order: theta_deg ascending (outer), phi_deg ascending, stage input before output, spin ascending";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub stage: String,
    pub spin: usize,
    pub re_signal: f64,
    pub im_signal: f64,
}

/// Pairs records with their grid points: each point owns `records.len() / points.len()`
/// consecutive records.
pub fn scan_rows(points: &[GridPoint], records: &[ObservationRecord]) -> Vec<ScanRow> {
    let per_point = records.len() / points.len().max(1);
    records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let p = &points[k / per_point];
            ScanRow {
                theta_deg: p.theta_deg,
                phi_deg: p.phi_deg,
                stage: r.stage.as_str().to_string(),
                spin: r.spin,
                re_signal: r.signal.re,
                im_signal: r.signal.im,
            }
        })
        .collect()
}

pub fn write_scan<W: Write>(mut out: W, rows: &[ScanRow]) -> Result<(), CliError> {
    writeln!(out, "{SCAN_ORDERING}")?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(SCAN_HEADER)?;
    for r in rows {
        w.write_record([
            r.theta_deg.to_string(),
            r.phi_deg.to_string(),
            r.stage.clone(),
            r.spin.to_string(),
            r.re_signal.to_string(),
            r.im_signal.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a file written by [`write_scan`].
pub fn read_scan<R: BufRead>(input: R) -> Result<Vec<ScanRow>, CliError> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(SCAN_HEADER) {
        return Err(CliError::Io(format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(CliError::from)).collect()
}

pub fn write_json<W: Write, T: Serialize>(mut out: W, value: &T) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Io(e.to_string()))
}
