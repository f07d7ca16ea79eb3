use std::io::{Read, Write};

use super::SampleSet;
use crate::error::{Error, Result};

/// Writes one row per observation under a `y1..yd` header.
pub fn write_sample_csv<W: Write>(sample: &SampleSet, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record((1..=sample.d()).map(|j| format!("y{j}")))?;
    for row in sample.rows() {
        w.write_record(row.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a sample written by [`write_sample_csv`]. Column count comes from the header.
pub fn read_sample_csv<R: Read>(reader: R) -> Result<SampleSet> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let d = r.headers()?.len();
    let mut values = Vec::new();
    let mut n = 0;
    for record in r.records() {
        let record = record?;
        if record.len() != d {
            return Err(Error::domain(format!(
                "row {} has {} fields, header has {d}",
                n + 1,
                record.len()
            )));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::domain(format!("row {}: cannot parse {field:?} as a number", n + 1)))?;
            values.push(v);
        }
        n += 1;
    }
    SampleSet::from_flat(n, d, values)
}
