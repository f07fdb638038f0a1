//! The sweep CSV format. Hand-rolled so the byte layout is pinned:
//! deterministic row order, decimals at 17 significant digits.

use prasym::error::{Error, Result};

use crate::experiment::ExperimentRecord;

pub const CSV_HEADER: &str =
    "model,n,seed,alpha,preference,tv_error,max_relative_error,lambda2,degree_ratio,iterations,wall_time_ms,flags";

fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Serialize records (callers pass them already sorted by model, n,
/// seed). Errors on an empty batch.
pub fn records_to_csv(records: &[ExperimentRecord]) -> Result<String> {
    if records.is_empty() {
        return Err(Error::parameter("no records to serialize"));
    }
    let mut out = String::with_capacity(64 + records.len() * 160);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.model,
            r.n,
            r.seed,
            fmt(r.alpha),
            r.preference,
            fmt(r.tv_error),
            fmt(r.max_relative_error),
            fmt(r.lambda2),
            fmt(r.degree_ratio),
            r.iterations,
            fmt(r.wall_time_ms),
            r.flags
        ));
    }
    Ok(out)
}

/// Parse the format back; the round trip is exact (17 significant digits
/// pin every f64 bit pattern).
pub fn records_from_csv(text: &str) -> Result<Vec<ExperimentRecord>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?;
    if header != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected header '{header}'")));
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 12 {
            return Err(Error::Parse(format!(
                "line {}: expected 12 fields, found {}",
                lineno + 2,
                fields.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("line {}: bad {what} '{s}'", lineno + 2)))
        };
        let parse_u = |s: &str, what: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Parse(format!("line {}: bad {what} '{s}'", lineno + 2)))
        };
        records.push(ExperimentRecord {
            model: fields[0].to_string(),
            n: parse_u(fields[1], "n")? as usize,
            seed: parse_u(fields[2], "seed")?,
            alpha: parse_f(fields[3], "alpha")?,
            preference: fields[4].to_string(),
            tv_error: parse_f(fields[5], "tv_error")?,
            max_relative_error: parse_f(fields[6], "max_relative_error")?,
            lambda2: parse_f(fields[7], "lambda2")?,
            degree_ratio: parse_f(fields[8], "degree_ratio")?,
            iterations: parse_u(fields[9], "iterations")? as usize,
            wall_time_ms: parse_f(fields[10], "wall_time_ms")?,
            flags: fields[11].to_string(),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_record() -> ExperimentRecord {
        ExperimentRecord {
            model: "er".into(),
            n: 128,
            seed: 12345,
            alpha: 0.85,
            preference: "uniform".into(),
            tv_error: 0.012345678901234567,
            max_relative_error: 0.3,
            lambda2: 0.25,
            degree_ratio: 1.5,
            iterations: 42,
            wall_time_ms: 0.0,
            flags: String::new(),
        }
    }

    #[test]
    fn empty_batch_is_an_error() {
        assert!(records_to_csv(&[]).is_err());
    }

    #[test]
    fn single_record_is_two_lines() {
        let csv = records_to_csv(&[sample_record()]).unwrap();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with(CSV_HEADER));
    }

    #[test]
    fn round_trip_is_exact() {
        let mut a = sample_record();
        a.flags = "disconnected;lcc:100/128".into();
        let mut b = sample_record();
        b.seed = 99;
        b.tv_error = f64::NAN;
        let csv = records_to_csv(&[a.clone(), b.clone()]).unwrap();
        let parsed = records_from_csv(&csv).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0], a);
        // NaN != NaN; compare the serialized forms instead.
        let reserialized = records_to_csv(&parsed).unwrap();
        assert_eq!(csv, reserialized);
    }

    #[test]
    fn header_mismatch_rejected() {
        assert!(records_from_csv("model,n\n").is_err());
        assert!(records_from_csv("").is_err());
    }
}
