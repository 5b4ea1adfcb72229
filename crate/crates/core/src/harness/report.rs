use std::io::{Read, Write};
use std::path::Path;

use super::sweep::{StopReason, SweepResult, SweepRow};
use crate::error::{Error, Result};

const COLUMNS: [&str; 11] = [
    "snr_db",
    "iteration",
    "trials",
    "bits",
    "bit_errors",
    "ber",
    "avg_real_ops_per_bit",
    "avg_sweeps",
    "avg_restarts",
    "mse",
    "stopped_by",
];
const WALL_TIME: &str = "wall_time";

fn csv_err(e: csv::Error) -> Error {
    Error::Record(format!("csv: {e}"))
}

/// Writes `result` as CSV. Floats use the shortest text that round-trips.
/// The wall_time column appears only when some row carries a timing.
pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> Result<()> {
    let timed = result.rows.iter().any(|r| r.wall_time.is_some());
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = COLUMNS.to_vec();
    if timed {
        header.push(WALL_TIME);
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in &result.rows {
        let mut rec = vec![
            r.snr_db.to_string(),
            r.iteration.to_string(),
            r.trials.to_string(),
            r.bits.to_string(),
            r.bit_errors.to_string(),
            format!("{:e}", r.ber),
            format!("{:e}", r.avg_real_ops_per_bit),
            format!("{:e}", r.avg_sweeps),
            format!("{:e}", r.avg_restarts),
            r.mse.map(|v| format!("{v:e}")).unwrap_or_default(),
            r.stopped_by.as_str().to_string(),
        ];
        if timed {
            rec.push(r.wall_time.map(|v| format!("{v:e}")).unwrap_or_default());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::Record(e.to_string()))
}

/// Writes `result` to `path`, reporting I/O failures with the path.
pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut buf = std::io::BufWriter::new(file);
    write_csv(result, &mut buf)?;
    buf.flush().map_err(io)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let text = rec.get(idx).unwrap_or("");
    text.parse().map_err(|_| Error::Config {
        line,
        message: format!("column {} has unparsable value `{text}`", COLUMNS.get(idx).unwrap_or(&WALL_TIME)),
    })
}

fn optional(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<Option<f64>> {
    match rec.get(idx) {
        None | Some("") => Ok(None),
        Some(_) => field(rec, idx, line).map(Some),
    }
}

/// Reads CSV written by [`write_csv`].
pub fn parse_csv<R: Read>(input: R) -> Result<SweepResult> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(csv_err)?.clone();
    let names: Vec<&str> = header.iter().collect();
    let timed = match names.len() {
        11 => false,
        12 if names[11] == WALL_TIME => true,
        _ => return Err(Error::Config { line: 1, message: "unexpected CSV header".into() }),
    };
    if names[..11] != COLUMNS {
        return Err(Error::Config { line: 1, message: "unexpected CSV header".into() });
    }
    let mut rows = Vec::new();
    for (j, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = j + 2;
        let stopped_by = match rec.get(10) {
            Some("target_errors") => StopReason::TargetErrors,
            Some("max_trials") => StopReason::MaxTrials,
            _ => return Err(Error::Config { line, message: "bad stopped_by".into() }),
        };
        rows.push(SweepRow {
            snr_db: field(&rec, 0, line)?,
            iteration: field(&rec, 1, line)?,
            trials: field(&rec, 2, line)?,
            bits: field(&rec, 3, line)?,
            bit_errors: field(&rec, 4, line)?,
            ber: field(&rec, 5, line)?,
            avg_real_ops_per_bit: field(&rec, 6, line)?,
            avg_sweeps: field(&rec, 7, line)?,
            avg_restarts: field(&rec, 8, line)?,
            mse: optional(&rec, 9, line)?,
            stopped_by,
            wall_time: if timed { optional(&rec, 11, line)? } else { None },
        });
    }
    Ok(SweepResult { rows })
}

/// SNR at which a BER curve crosses `target`, interpolating linearly in
/// dB against log10 BER between the first bracketing pair of grid points.
pub fn interpolate_snr_at_ber(curve: &[(f64, f64)], target: f64) -> Result<f64> {
    if !(target > 0.0 && target.is_finite()) {
        return Err(Error::invalid("target_ber", "must be positive and finite"));
    }
    let mut pts: Vec<(f64, f64)> = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if let Some(&(snr, _)) = pts.iter().find(|p| p.1 == target) {
        return Ok(snr);
    }
    let lt = target.log10();
    for w in pts.windows(2) {
        let ((s0, b0), (s1, b1)) = (w[0], w[1]);
        if b0 <= 0.0 || b1 <= 0.0 {
            continue;
        }
        if (b0 - target) * (b1 - target) < 0.0 {
            let (l0, l1) = (b0.log10(), b1.log10());
            return Ok(s0 + (lt - l0) / (l1 - l0) * (s1 - s0));
        }
    }
    Err(Error::NotBracketed { target })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_linear_midpoint() {
        let s = interpolate_snr_at_ber(&[(8.0, 1e-2), (10.0, 1e-4)], 1e-3).unwrap();
        assert!((s - 9.0).abs() < 1e-12);
    }

    #[test]
    fn grid_point_on_target() {
        let s = interpolate_snr_at_ber(&[(6.0, 0.1), (8.0, 1e-2), (10.0, 1e-4)], 1e-2).unwrap();
        assert_eq!(s, 8.0);
    }

    #[test]
    fn unbracketed_target_is_rejected() {
        let curve = [(6.0, 0.1), (8.0, 1e-2)];
        assert!(matches!(interpolate_snr_at_ber(&curve, 1e-4), Err(Error::NotBracketed { .. })));
        assert!(interpolate_snr_at_ber(&[], 1e-2).is_err());
        assert!(interpolate_snr_at_ber(&[(1.0, 0.2), (3.0, 0.0)], 1e-2).is_err());
    }

    #[test]
    fn empty_result_is_header_only() {
        let mut buf = Vec::new();
        write_csv(&SweepResult::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{}\n", COLUMNS.join(",")));
    }
}
