//! CSV ingestion of empirical rate data.
//!
//! Expected schema: a header `id,trials,successes` followed by one record
//! per row. Records below the minimum trial count are filtered out; the
//! survivors keep file order.

use std::io::Read;

use seqlab_core::RateRecord;

use crate::error::{CliError, CliResult};

pub fn ingest_csv<R: Read>(reader: R, min_trials: u64) -> CliResult<Vec<RateRecord>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv_reader
        .headers()
        .map_err(|e| CliError::Config(format!("cannot read CSV header: {e}")))?
        .clone();
    let expected = ["id", "trials", "successes"];
    let got: Vec<&str> = headers.iter().collect();
    if got != expected {
        return Err(CliError::Config(format!(
            "CSV header must be exactly {expected:?}, got {got:?}"
        )));
    }

    let mut records = Vec::new();
    for row in csv_reader.records() {
        let row = row.map_err(|e| CliError::Config(format!("malformed CSV row: {e}")))?;
        let line = row
            .position()
            .map(|p| p.line())
            .unwrap_or_default();
        if row.len() != 3 {
            return Err(CliError::Config(format!(
                "line {line}: expected 3 fields, got {}",
                row.len()
            )));
        }
        let id = row[0].to_string();
        let trials: u64 = row[1]
            .parse()
            .map_err(|_| CliError::Config(format!("line {line}: bad trials '{}'", &row[1])))?;
        let successes: u64 = row[2]
            .parse()
            .map_err(|_| CliError::Config(format!("line {line}: bad successes '{}'", &row[2])))?;
        let record = RateRecord::new(id, trials, successes)
            .map_err(|e| CliError::Config(format!("line {line}: {e}")))?;
        if record.trials >= min_trials {
            records.push(record);
        }
    }
    Ok(records)
}

/// Empirical rates of the ingested records, in file order.
pub fn rates(records: &[RateRecord]) -> Vec<f64> {
    records.iter().map(RateRecord::rate).collect()
}
