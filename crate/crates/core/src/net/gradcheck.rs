use super::{advantages, backward, segment_objective, Gradients, PolicyParams, Tape};
use crate::Result;

/// Below this magnitude, gradient differences are measured absolutely.
const RELATIVE_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheckReport {
    /// Largest `|analytic - numeric| / max(|analytic|, |numeric|, 1e-4)`.
    pub max_relative_error: f64,
    /// Parameter index where it occurred.
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// Compares analytic segment gradients with central finite differences over
/// every parameter. Meant for small networks.
pub fn grad_check(params: &PolicyParams, tape: &Tape, beta: f64, epsilon: f64) -> Result<GradCheckReport> {
    let analytic = backward(params, tape, beta)?.grads;
    grad_check_against(params, tape, beta, epsilon, &analytic)
}

/// Finite-difference check of caller-supplied gradients.
pub fn grad_check_against(
    params: &PolicyParams,
    tape: &Tape,
    beta: f64,
    epsilon: f64,
    analytic: &Gradients,
) -> Result<GradCheckReport> {
    let adv = advantages(params, tape)?;
    let mut probe = params.clone();
    let mut report = GradCheckReport { max_relative_error: 0.0, worst_index: 0, analytic: 0.0, numeric: 0.0 };
    for i in 0..params.len() {
        let base = params.as_slice()[i];
        probe.as_mut_slice()[i] = base + epsilon;
        let plus = segment_objective(&probe, tape, beta, &adv)?;
        probe.as_mut_slice()[i] = base - epsilon;
        let minus = segment_objective(&probe, tape, beta, &adv)?;
        probe.as_mut_slice()[i] = base;

        let numeric = (plus - minus) / (2.0 * epsilon);
        let a = analytic.data[i];
        let err = libm::fabs(a - numeric) / libm::fabs(a).max(libm::fabs(numeric)).max(RELATIVE_FLOOR);
        if err > report.max_relative_error {
            report = GradCheckReport { max_relative_error: err, worst_index: i, analytic: a, numeric };
        }
    }
    Ok(report)
}
