use std::io::Write;

use super::{SweepRow, TrialRecord};
use crate::error::Result;
use crate::theory::RatePoint;

/// Column order of the sweep CSV.
pub const SWEEP_COLUMNS: [&str; 18] = [
    "n", "theta", "k", "design", "decoder", "m", "c", "delta", "trials", "successes", "success_rate", "mean_fp",
    "mean_fn", "mean_v0plus", "mean_v1plus", "mean_v1mm", "mean_m0", "seed",
];

/// One compact JSON object per line.
pub fn write_jsonl<W: Write>(records: &[TrialRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Header plus one line per row. Undefined values are empty fields.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if rows.is_empty() {
        w.write_record(SWEEP_COLUMNS)?;
    }
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// `theta,rate_inf,rate_alg` with a header line.
pub fn write_rate_curves_csv<W: Write>(points: &[RatePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if points.is_empty() {
        w.write_record(["theta", "rate_inf", "rate_alg"])?;
    }
    for p in points {
        w.serialize(p)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{sweep, ExperimentConfig, InfectedSpec, SweepConfig, TestsSpec};

    #[test]
    fn csv_header_is_the_documented_schema() {
        let base = ExperimentConfig::new(100, InfectedSpec::Theta(0.4), TestsSpec::Absolute(1)).with_seed(1);
        let rows = sweep(&SweepConfig { base, tests: vec![TestsSpec::RatioAlg(1.0)] }).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let header = text.lines().next().unwrap();
        assert_eq!(header, SWEEP_COLUMNS.join(","));
        assert_eq!(text.lines().count(), 3);

        let mut empty = Vec::new();
        write_sweep_csv(&[], &mut empty).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap().trim_end(), SWEEP_COLUMNS.join(","));
    }

    #[test]
    fn rate_curve_csv() {
        let points = crate::theory::rate_curves(&[0.25, 0.75]).unwrap();
        let mut buf = Vec::new();
        write_rate_curves_csv(&points, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "theta,rate_inf,rate_alg");
        assert!(lines[1].starts_with("0.25,0.693147"));
        assert_eq!(lines.len(), 3);
    }
}
