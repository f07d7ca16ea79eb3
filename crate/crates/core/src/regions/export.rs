use std::io::Write;

use super::{Boundary, SphericalRegion};
use crate::error::{Error, Result};

/// `kind,center_1..center_d,sq_radius`, one row per region. All regions must share `d`.
pub fn write_regions_csv<W: Write>(regions: &[SphericalRegion], writer: W) -> Result<()> {
    let d = regions.first().map_or(0, |r| r.center.len());
    if regions.iter().any(|r| r.center.len() != d) {
        return Err(Error::domain("regions have different dimensions"));
    }
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["kind".to_string()];
    header.extend((1..=d).map(|j| format!("center_{j}")));
    header.push("sq_radius".into());
    w.write_record(&header)?;
    for r in regions {
        let mut rec = vec![r.kind.as_str().to_string()];
        rec.extend(r.center.iter().map(|v| format!("{v:?}")));
        rec.push(format!("{:?}", r.sq_radius));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// `angle,x,y`; rays without a boundary point are skipped.
pub fn write_boundary_csv<W: Write>(boundary: &Boundary, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["angle", "x", "y"])?;
    for p in &boundary.points {
        if let Some([x, y]) = p.point {
            w.write_record([format!("{:?}", p.angle), format!("{x:?}"), format!("{y:?}")])?;
        }
    }
    w.flush()?;
    Ok(())
}
