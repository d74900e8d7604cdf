use std::io::Write;

use crate::error::Result;
use crate::fields::CellField;

/// Writes fields as CSV rows `time,i,value` (1D) or `time,i,j,value` (2D).
pub fn write_snapshots_csv<W: Write>(out: &mut W, snapshots: &[CellField]) -> Result<()> {
    let two_d = snapshots.first().map_or(false, |s| s.grid().dim() == 2);
    if two_d {
        writeln!(out, "time,i,j,value")?;
    } else {
        writeln!(out, "time,i,value")?;
    }
    for snap in snapshots {
        let g = snap.grid();
        for (k, v) in snap.values().iter().enumerate() {
            let (i, j) = g.coords(k);
            if two_d {
                writeln!(out, "{},{},{},{}", snap.time(), i, j, v)?;
            } else {
                writeln!(out, "{},{},{}", snap.time(), i, v)?;
            }
        }
    }
    Ok(())
}
