//! CSV and JSON persistence. CSV carries the plot-ready rows behind a
//! versioned schema comment; JSON carries the full record for machine
//! reprocessing. Floats are written with Rust's shortest round-trip
//! formatting, so identical results produce byte-identical files.

use crate::Result;
use crate::sweep::{OutageRecord, ResultRecord};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// Schema tag written as the first comment line of every result CSV.
pub const CSV_SCHEMA: &str = "# gpsm-sim results v1";
/// Schema tag for outage CDF files.
pub const OUTAGE_CSV_SCHEMA: &str = "# gpsm-sim outage v1";
/// Schema tag for scatter sample files.
pub const SCATTER_CSV_SCHEMA: &str = "# gpsm-sim scatter v1";

pub fn write_result_csv<W: Write>(w: &mut W, record: &ResultRecord) -> Result<()> {
    writeln!(w, "{CSV_SCHEMA}")?;
    writeln!(w, "snr_db,c_bob,c_eve,c_sec,se_bob,se_eve")?;
    for row in &record.rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            row.snr_db, row.c_bob, row.c_eve, row.c_sec, row.se_bob, row.se_eve
        )?;
    }
    Ok(())
}

pub fn write_outage_csv<W: Write>(w: &mut W, outage: &[(f64, f64)]) -> Result<()> {
    writeln!(w, "{OUTAGE_CSV_SCHEMA}")?;
    writeln!(w, "threshold_bits,probability")?;
    for (t, p) in outage {
        writeln!(w, "{t},{p}")?;
    }
    Ok(())
}

pub fn result_csv_bytes(record: &ResultRecord) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_result_csv(&mut buf, record)?;
    Ok(buf)
}

/// Write `<out>/<name>.csv` and `<out>/<name>.json` for one sweep record.
pub fn persist_record(out_dir: &Path, name: &str, record: &ResultRecord) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut csv = std::fs::File::create(out_dir.join(format!("{name}.csv")))?;
    write_result_csv(&mut csv, record)?;
    write_json(out_dir, name, record)
}

/// Write `<out>/<name>.json` for any serializable record.
pub fn write_json<T: Serialize>(out_dir: &Path, name: &str, value: &T) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let file = std::fs::File::create(out_dir.join(format!("{name}.json")))?;
    serde_json::to_writer_pretty(file, value)?;
    Ok(())
}

pub fn persist_outage(out_dir: &Path, name: &str, record: &OutageRecord) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let mut csv = std::fs::File::create(out_dir.join(format!("{name}.csv")))?;
    write_outage_csv(&mut csv, &record.outage_cdf)?;
    write_json(out_dir, name, record)
}

/// Render a float list as a compact suffix for sweep file names
/// (`0.3 -> 0p3`).
pub fn value_suffix(v: f64) -> String {
    format!("{v}").replace('.', "p").replace('-', "m")
}
