//! Kernel / step-graphon CSV: the first record is `n`, followed by `n` rows
//! of `n` comma-separated reals (row-major).

use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use super::{Partition, StepGraphon};
use crate::error::{Error, Result};
use crate::fmt_real;

pub fn read_step_graphon<R: Read>(reader: R) -> Result<StepGraphon> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Table("empty file".into()))??;
    if header.len() != 1 {
        return Err(Error::Table(format!(
            "first record must hold only n, found {} fields",
            header.len()
        )));
    }
    let n: usize = header[0]
        .parse()
        .map_err(|e| Error::Table(format!("bad size `{}`: {e}", &header[0])))?;
    let partition = Partition::new(n)?;
    let mut values = Vec::with_capacity(n * n);
    for (row, rec) in records.enumerate() {
        let rec = rec?;
        if rec.len() != n {
            return Err(Error::Table(format!(
                "row {row} has {} entries, expected {n}",
                rec.len()
            )));
        }
        for field in rec.iter() {
            let v: f64 = field
                .parse()
                .map_err(|e| Error::Table(format!("row {row}: bad number `{field}`: {e}")))?;
            values.push(v);
        }
    }
    if values.len() != n * n {
        return Err(Error::Table(format!(
            "expected {n} rows, found {}",
            values.len() / n.max(1)
        )));
    }
    StepGraphon::new(
        partition,
        Array2::from_shape_vec((n, n), values).expect("n*n values"),
    )
}

pub fn write_step_graphon<W: Write>(g: &StepGraphon, writer: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(writer);
    wtr.write_record([g.n().to_string()])?;
    for row in g.weights().rows() {
        wtr.write_record(row.iter().map(|&v| fmt_real(v)))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_step_graphon_csv(path: impl AsRef<Path>) -> Result<StepGraphon> {
    read_step_graphon(std::fs::File::open(path)?)
}

pub fn write_step_graphon_csv(g: &StepGraphon, path: impl AsRef<Path>) -> Result<()> {
    write_step_graphon(g, std::io::BufWriter::new(std::fs::File::create(path)?))
}
