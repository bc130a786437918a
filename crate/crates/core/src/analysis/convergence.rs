use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{DiscreteSystem, SystemState, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::graphon::{check_assumptions, discretize_phases, discretize_weights_average, Kernel, Partition};
use crate::metrics::{state_distance, DistanceBreakdown};
use crate::model::ModelSpec;

/// Errors at or below this level count as zero: they are neither divided
/// into rates nor required to decrease.
pub const DEGENERATE_ERROR: f64 = 1e-10;

/// Inputs of a self-convergence study. `stride` counts reference steps
/// between compared snapshots.
#[derive(Debug, Clone)]
pub struct ConvergenceSetup {
    pub kernel: Kernel,
    pub model: ModelSpec,
    pub ns: Vec<usize>,
    pub n_ref: usize,
    pub dt: f64,
    pub dt_ref: f64,
    pub stride: usize,
    pub quadrature: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRecord {
    pub n: usize,
    pub dt: f64,
    /// Time-uniform distance to the lifted reference run.
    pub error: f64,
    pub phase_error: f64,
    pub weight_error: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RateRecord {
    pub from_n: usize,
    pub to_n: usize,
    /// `ln(e_k / e_{k+1}) / ln(n_{k+1} / n_k)`; absent when either error is
    /// degenerate.
    pub rate: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub model: String,
    pub compared_against: String,
    pub n_ref: usize,
    pub dt_ref: f64,
    pub stride: usize,
    pub snapshots: usize,
    pub records: Vec<ConvergenceRecord>,
    pub monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<RateRecord>>,
}

impl ConvergenceReport {
    pub fn errors(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.error).collect()
    }

    /// `error(last) / error(first)`.
    pub fn error_ratio(&self) -> Option<f64> {
        let first = self.records.first()?.error;
        let last = self.records.last()?.error;
        (first > 0.0).then(|| last / first)
    }

    /// Plot-ready `n,error` table.
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        wtr.write_record(["n", "error"])?;
        for r in &self.records {
            wtr.write_record([r.n.to_string(), crate::fmt_real(r.error)])?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("ascii"))
    }
}

impl ConvergenceSetup {
    /// Number of reference steps per coarse step.
    fn step_ratio(&self) -> Result<usize> {
        if self.ns.is_empty() {
            return Err(invalid("ns", "at least one resolution is required"));
        }
        for pair in self.ns.windows(2) {
            if pair[1] <= pair[0] {
                return Err(invalid("ns", "resolutions must be strictly increasing"));
            }
        }
        Partition::new(self.n_ref)?;
        for &n in &self.ns {
            Partition::new(n)?;
            if self.n_ref % n != 0 {
                return Err(Error::NotMultiple { n, target: self.n_ref });
            }
        }
        if !(self.dt > 0.0 && self.dt_ref > 0.0) {
            return Err(invalid("dt", "time steps must be positive"));
        }
        let ratio = (self.dt / self.dt_ref).round();
        if ratio < 4.0 || (ratio * self.dt_ref - self.dt).abs() > 1e-9 * self.dt {
            return Err(invalid(
                "dt_ref",
                format!("dt / dt_ref must be an integer of at least 4, got {}", self.dt / self.dt_ref),
            ));
        }
        let ratio = ratio as usize;
        if self.stride == 0 || self.stride % ratio != 0 {
            return Err(invalid(
                "stride",
                format!("stride {} must be a positive multiple of dt / dt_ref = {ratio}", self.stride),
            ));
        }
        Ok(ratio)
    }

    fn initial_state(&self, n: usize, phi0: &(impl Fn(f64) -> f64 + Sync)) -> Result<(DiscreteSystem, SystemState)> {
        let p = Partition::new(n)?;
        let w0 = discretize_weights_average(&self.kernel, p, self.quadrature);
        let phases = discretize_phases(phi0, p, self.quadrature);
        let sys = DiscreteSystem::new(self.model.clone(), p, self.quadrature);
        Ok((sys, SystemState::new(self.model.t0(), phases, w0)?))
    }
}

/// Runs every resolution in `setup.ns` and the reference `n_ref`, and
/// measures the time-uniform distance of each lifted coarse run to the
/// reference at the shared snapshot times.
pub fn self_convergence_study(
    setup: &ConvergenceSetup,
    phi0: impl Fn(f64) -> f64 + Sync,
) -> Result<ConvergenceReport> {
    let ratio = setup.step_ratio()?;
    let report = check_assumptions(&setup.kernel, &setup.model);
    if !report.all_passed() {
        return Err(Error::AssumptionsFailed(Box::new(report)));
    }

    let coarse: Vec<Option<Trajectory>> = setup
        .ns
        .par_iter()
        .map(|&n| {
            if n == setup.n_ref {
                return Ok(None);
            }
            let (sys, init) = setup.initial_state(n, &phi0)?;
            sys.integrate(&init, setup.dt, setup.stride / ratio).map(Some)
        })
        .collect::<Result<_>>()?;

    let mut worst = vec![DistanceBreakdown::new(0.0, 0.0); setup.ns.len()];
    let mut index = 0;
    let (sys, init) = setup.initial_state(setup.n_ref, &phi0)?;
    sys.integrate_with(&init, setup.dt_ref, setup.stride, |reference| {
        let distances = coarse
            .par_iter()
            .map(|run| match run {
                None => Ok(DistanceBreakdown::new(0.0, 0.0)),
                Some(tr) => {
                    let state = tr.states().get(index).ok_or_else(|| {
                        invalid("stride", "coarse and reference snapshot schedules differ")
                    })?;
                    let slack = 1e-9 * reference.t().abs().max(1.0);
                    if (state.t() - reference.t()).abs() > slack {
                        return Err(Error::TimeMismatch {
                            index,
                            left: state.t(),
                            right: reference.t(),
                        });
                    }
                    Ok(state_distance(state, reference))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        for (w, d) in worst.iter_mut().zip(distances) {
            *w = DistanceBreakdown {
                phase_part: w.phase_part.max(d.phase_part),
                weight_part: w.weight_part.max(d.weight_part),
                total: w.total.max(d.total),
            };
        }
        index += 1;
        Ok(())
    })?;

    let records: Vec<ConvergenceRecord> = setup
        .ns
        .iter()
        .zip(&worst)
        .map(|(&n, d)| ConvergenceRecord {
            n,
            dt: if n == setup.n_ref { setup.dt_ref } else { setup.dt },
            error: d.total,
            phase_error: d.phase_part,
            weight_error: d.weight_part,
            degenerate: d.total <= DEGENERATE_ERROR,
        })
        .collect();
    let monotone = records
        .windows(2)
        .all(|p| p[1].error < p[0].error || p[1].degenerate);
    let rates = (records.len() > 1).then(|| {
        records
            .windows(2)
            .map(|p| RateRecord {
                from_n: p[0].n,
                to_n: p[1].n,
                rate: (!p[0].degenerate && !p[1].degenerate)
                    .then(|| (p[0].error / p[1].error).ln() / (p[1].n as f64 / p[0].n as f64).ln()),
            })
            .collect()
    });

    Ok(ConvergenceReport {
        model: setup.model.to_string(),
        compared_against: format!("vs n_ref = {} reference (dt_ref = {})", setup.n_ref, setup.dt_ref),
        n_ref: setup.n_ref,
        dt_ref: setup.dt_ref,
        stride: setup.stride,
        snapshots: index,
        records,
        monotone,
        rates,
    })
}
