use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::engine::CountsRecord;
use crate::error::Result;

pub const CSV_HEADER: &str = "sweep_kind,setting,rate_per_min,rate_d2a,rate_d2b,shots,seed";

/// Six decimals, with negative zero printed as zero.
fn fixed(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

pub fn write_csv<W: Write>(records: &[CountsRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.sweep_kind,
            fixed(r.setting),
            fixed(r.rate_per_min()),
            fixed(r.rate_d2a),
            fixed(r.rate_d2b),
            r.shots,
            r.seed
        )?;
    }
    w.flush()
}

/// Writes `records` to `path`, replacing any existing file.
pub fn emit_csv(records: &[CountsRecord], path: &Path) -> Result<()> {
    let f = File::create(path)?;
    write_csv(records, BufWriter::new(f))?;
    Ok(())
}
