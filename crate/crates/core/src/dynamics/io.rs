//! Trajectory CSV: header `t,phi_0,…,phi_{n-1}` optionally followed by the
//! row-major weight columns `w_0_0,…,w_{n-1}_{n-1}`, one row per snapshot.

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array1, Array2};

use super::state::{SystemState, Trajectory};
use crate::error::{Error, Result};
use crate::fmt_real;
use crate::model::TorusAngle;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrajectoryCsvOptions {
    pub include_weights: bool,
    /// Write phases reduced to `[0, 2π)` instead of their real lifts.
    pub wrap_phases: bool,
}

/// Snapshots read back from a trajectory CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub n: usize,
    pub times: Vec<f64>,
    pub phases: Vec<Array1<f64>>,
    pub weights: Option<Vec<Array2<f64>>>,
}

impl TrajectoryTable {
    /// Requires the weight columns.
    pub fn into_states(self) -> Result<Vec<SystemState>> {
        let weights = self
            .weights
            .ok_or_else(|| Error::Table("trajectory has no weight columns".into()))?;
        self.times
            .into_iter()
            .zip(self.phases)
            .zip(weights)
            .map(|((t, p), w)| SystemState::from_arrays(t, p, w))
            .collect()
    }
}

pub fn write_trajectory<W: Write>(tr: &Trajectory, writer: W, options: TrajectoryCsvOptions) -> Result<()> {
    let n = tr.n();
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec!["t".to_string()];
    header.extend((0..n).map(|i| format!("phi_{i}")));
    if options.include_weights {
        for i in 0..n {
            header.extend((0..n).map(|j| format!("w_{i}_{j}")));
        }
    }
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for s in tr.states() {
        record.clear();
        record.push(fmt_real(s.t()));
        record.extend(s.phase_values().iter().map(|&p| {
            fmt_real(if options.wrap_phases {
                TorusAngle(p).wrapped()
            } else {
                p
            })
        }));
        if options.include_weights {
            record.extend(s.weights().weights().iter().map(|&w| fmt_real(w)));
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_trajectory<R: Read>(reader: R) -> Result<TrajectoryTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("t") {
        return Err(Error::Table("first column must be `t`".into()));
    }
    let n = header.iter().skip(1).take_while(|h| h.starts_with("phi_")).count();
    if n == 0 {
        return Err(Error::Table("no phase columns".into()));
    }
    for (i, h) in header.iter().skip(1).take(n).enumerate() {
        if h != format!("phi_{i}") {
            return Err(Error::Table(format!("unexpected phase column `{h}`")));
        }
    }
    let extra = header.len() - 1 - n;
    let has_weights = match extra {
        0 => false,
        e if e == n * n => true,
        e => {
            return Err(Error::Table(format!(
                "{e} columns after the phases, expected 0 or {}",
                n * n
            )))
        }
    };

    let mut table = TrajectoryTable {
        n,
        times: Vec::new(),
        phases: Vec::new(),
        weights: has_weights.then(Vec::new),
    };
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let values = rec
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::Table(format!("row {row}: bad number `{f}`: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        table.times.push(values[0]);
        table.phases.push(Array1::from(values[1..=n].to_vec()));
        if let Some(ws) = table.weights.as_mut() {
            ws.push(Array2::from_shape_vec((n, n), values[n + 1..].to_vec()).expect("n*n values"));
        }
    }
    Ok(table)
}

pub fn write_trajectory_csv(tr: &Trajectory, path: impl AsRef<Path>, options: TrajectoryCsvOptions) -> Result<()> {
    write_trajectory(tr, std::io::BufWriter::new(std::fs::File::create(path)?), options)
}

pub fn read_trajectory_csv(path: impl AsRef<Path>) -> Result<TrajectoryTable> {
    read_trajectory(std::fs::File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::system::tests::scattered_state;
    use crate::dynamics::DiscreteSystem;
    use crate::graphon::Partition;
    use crate::metrics::d_interval_infty;
    use crate::model::make_berner;

    fn trajectory() -> Trajectory {
        let sys = DiscreteSystem::new(make_berner(2.0, 0.3, 0.1, 0.2, 0.0, 1.0).unwrap(), Partition::new(3).unwrap(), 4);
        sys.integrate(&scattered_state(3, 0.0), 0.1, 2).unwrap()
    }

    #[test]
    fn round_trip_with_weights_is_exact() {
        let tr = trajectory();
        let mut buf = Vec::new();
        write_trajectory(&tr, &mut buf, TrajectoryCsvOptions { include_weights: true, wrap_phases: false }).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,phi_0,phi_1,phi_2,w_0_0,w_0_1"));
        let states = read_trajectory(buf.as_slice()).unwrap().into_states().unwrap();
        assert_eq!(states, tr.states());
        assert_eq!(d_interval_infty(&states, tr.states()).unwrap(), 0.0);
    }

    #[test]
    fn phases_only_and_wrapped() {
        let tr = trajectory();
        let mut buf = Vec::new();
        write_trajectory(&tr, &mut buf, TrajectoryCsvOptions { include_weights: false, wrap_phases: true }).unwrap();
        let table = read_trajectory(buf.as_slice()).unwrap();
        assert!(table.weights.is_none());
        assert_eq!(table.times, tr.times());
        for p in table.phases.iter().flatten() {
            assert!((0.0..std::f64::consts::TAU).contains(p));
        }
        assert!(table.into_states().is_err());
    }

    #[test]
    fn rejects_bad_headers() {
        assert!(read_trajectory("x,phi_0\n0,1\n".as_bytes()).is_err());
        assert!(read_trajectory("t\n0\n".as_bytes()).is_err());
        assert!(read_trajectory("t,phi_0,phi_1,w_0_0\n0,1,2,3\n".as_bytes()).is_err());
        assert!(read_trajectory("t,phi_0\n0,abc\n".as_bytes()).is_err());
    }
}
