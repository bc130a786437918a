use serde::Serialize;

use crate::dynamics::contraction_constant;
use crate::graphon::{berner_horizon_bound, positivity_threshold, Horizon, StepGraphon};
use crate::model::ModelSpec;

/// Constants entering the continuous-dependence estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub lip_omega: f64,
    pub lip_d: f64,
    pub lip_h: f64,
    pub sup_d: f64,
    /// Bound on the fiber TV norm of the weights along the trajectory.
    pub eta_star: f64,
    pub epsilon: f64,
}

impl BoundParams {
    /// Uses the a-priori bound `‖η₀‖ + ‖H‖∞` for `eta_star`.
    pub fn from_model(model: &ModelSpec, w0: &StepGraphon) -> Self {
        Self {
            lip_omega: model.omega.lipschitz(),
            lip_d: model.coupling.lipschitz(),
            lip_h: model.plasticity.lipschitz(),
            sup_d: model.coupling.sup_norm(),
            eta_star: w0.tv_norm() + model.plasticity.sup_norm(),
            epsilon: model.epsilon(),
        }
    }

    /// `C₁ = Lip ω + 2 Lip D η* + 2 ε Lip H + ε + ‖D‖∞`.
    pub fn c1(&self) -> f64 {
        self.lip_omega + 2.0 * self.lip_d * self.eta_star + 2.0 * self.epsilon * self.lip_h + self.epsilon + self.sup_d
    }
}

/// Everything the `bounds` workflow prints for one model and initial weight
/// matrix.
#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub model: String,
    pub epsilon: f64,
    pub horizon: f64,
    pub sup_h: f64,
    pub c_w: f64,
    pub positivity_threshold: f64,
    pub positivity_condition: bool,
    /// Present when `c_w > 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub berner_horizon: Option<Horizon>,
    pub eta0_norm: f64,
    pub weight_bound: f64,
    pub c1: f64,
    pub m3: f64,
    pub picard_window: f64,
    pub params: BoundParams,
}

/// `c_w` is the infimum of the initial kernel.
pub fn bounds_report(model: &ModelSpec, w0: &StepGraphon, c_w: f64) -> BoundsReport {
    let params = BoundParams::from_model(model, w0);
    let threshold = positivity_threshold(&model.plasticity, model.epsilon(), model.horizon());
    let eta0 = w0.tv_norm();
    let m3 = contraction_constant(model, eta0);
    BoundsReport {
        model: model.to_string(),
        epsilon: model.epsilon(),
        horizon: model.horizon(),
        sup_h: model.plasticity.sup_norm(),
        c_w,
        positivity_threshold: threshold,
        positivity_condition: c_w >= threshold,
        berner_horizon: berner_horizon_bound(c_w, model.epsilon()).ok(),
        eta0_norm: eta0,
        weight_bound: eta0 + model.plasticity.sup_norm(),
        c1: params.c1(),
        m3,
        picard_window: if m3 > 0.0 { 0.5 / m3 } else { model.horizon() },
        params,
    }
}
