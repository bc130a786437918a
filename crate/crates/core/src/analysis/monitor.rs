use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::graphon::{berner_horizon_bound, positivity_threshold, Horizon};
use crate::metrics::distance_profile;

use super::BoundParams;

/// Positivity of the weights along one run.
#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub inf_initial: f64,
    pub threshold: f64,
    /// Whether `inf W(t0) ≥ ‖H‖∞ (e^{εT} - 1)` held.
    pub condition_held: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub berner_horizon: Option<Horizon>,
    pub min_weight: f64,
    pub min_weight_time: f64,
    /// `max |W(t0)| + ‖H‖∞`.
    pub weight_bound: f64,
    pub max_abs_weight: f64,
    pub weight_bound_held: bool,
    /// False only when the condition held and some weight was not positive,
    /// or when the a-priori bound was exceeded.
    pub passed: bool,
}

pub fn positivity_monitor(tr: &Trajectory) -> PositivityReport {
    let model = tr.model();
    let w0 = tr.initial().weights();
    let inf_initial = w0.min_entry();
    let threshold = positivity_threshold(&model.plasticity, model.epsilon(), model.horizon());
    let condition_held = inf_initial >= threshold;

    let (mut min_weight, mut min_weight_time) = (f64::INFINITY, model.t0());
    let mut max_abs_weight = 0.0_f64;
    for s in tr.states() {
        let m = s.weights().min_entry();
        if m < min_weight {
            min_weight = m;
            min_weight_time = s.t();
        }
        max_abs_weight = max_abs_weight.max(s.weights().max_abs_entry());
    }
    let weight_bound = w0.max_abs_entry() + model.plasticity.sup_norm();
    let weight_bound_held = max_abs_weight <= weight_bound * (1.0 + 1e-12);
    PositivityReport {
        inf_initial,
        threshold,
        condition_held,
        berner_horizon: berner_horizon_bound(inf_initial, model.epsilon()).ok(),
        min_weight,
        min_weight_time,
        weight_bound,
        max_abs_weight,
        weight_bound_held,
        passed: weight_bound_held && (!condition_held || min_weight > 0.0),
    }
}

/// Default relative slack of the envelope comparisons.
pub const ENVELOPE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvelopeKind {
    InitialCondition,
    Frequency,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeSample {
    pub t: f64,
    pub distance: f64,
    pub envelope: f64,
}

/// Comparison of `d_∞(t)` between two runs with an exponential envelope
/// `scale · e^{C₁ (t - t0)}`.
#[derive(Debug, Clone, Serialize)]
pub struct GronwallReport {
    pub kind: EnvelopeKind,
    pub c1: f64,
    pub scale: f64,
    pub slack: f64,
    pub samples: Vec<EnvelopeSample>,
    /// `min_t (envelope (1 + slack) - distance)`.
    pub tightest_margin: f64,
    pub passed: bool,
}

fn envelope_report(
    kind: EnvelopeKind,
    a: &Trajectory,
    b: &Trajectory,
    bounds: &BoundParams,
    scale: f64,
    slack: f64,
) -> Result<GronwallReport> {
    let t0 = a.model().t0();
    let c1 = bounds.c1();
    let samples: Vec<EnvelopeSample> = distance_profile(a.states(), b.states())?
        .into_iter()
        .map(|(t, d)| EnvelopeSample {
            t,
            distance: d.total,
            envelope: scale * (c1 * (t - t0)).exp(),
        })
        .collect();
    let tightest_margin = samples
        .iter()
        .map(|s| s.envelope * (1.0 + slack) - s.distance)
        .fold(f64::INFINITY, f64::min);
    Ok(GronwallReport {
        kind,
        c1,
        scale,
        slack,
        samples,
        tightest_margin,
        passed: tightest_margin >= 0.0,
    })
}

/// `d_∞(t) ≤ d_∞(t0) e^{C₁ (t - t0)}` for two runs of the same model.
pub fn gronwall_ic_check(base: &Trajectory, perturbed: &Trajectory, bounds: &BoundParams) -> Result<GronwallReport> {
    let d0 = crate::metrics::state_distance(base.initial(), perturbed.initial()).total;
    envelope_report(EnvelopeKind::InitialCondition, base, perturbed, bounds, d0, ENVELOPE_SLACK)
}

/// `d_∞(t) ≤ T ‖ω - ω̃‖∞ e^{C₁ (t - t0)}` for two runs from the same initial
/// data whose models differ in their frequencies.
pub fn gronwall_omega_check(tr1: &Trajectory, tr2: &Trajectory, bounds: &BoundParams) -> Result<GronwallReport> {
    let gap = tr1.model().omega.sup_distance(&tr2.model().omega);
    let scale = tr1.model().horizon() * gap;
    envelope_report(EnvelopeKind::Frequency, tr1, tr2, bounds, scale, ENVELOPE_SLACK)
}
