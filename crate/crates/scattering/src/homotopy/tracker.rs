//! Adaptive predictor-corrector tracking of one solution path.
//!
//! The predictor integrates the Davidenko equation `J_y y' = -dS/dtau` with
//! a classical 4th-order Runge-Kutta step; the corrector is Newton's method
//! on the square system at fixed tau. Steps halve on corrector failure and
//! grow by 1.5 after four consecutive successes.

use nalgebra::DVector;
use num_complex::Complex64;

use super::system::HomotopySystem;
use crate::report::PathStatus;

#[derive(Clone, Debug)]
pub struct TrackerConfig {
    pub tol_corrector: f64,
    pub max_steps: usize,
    pub min_step: f64,
    pub initial_step: f64,
    /// Step-size ceiling; keeps the predictor from leaping onto a
    /// neighboring path.
    pub max_step: f64,
    pub endpoint_newton_iters: usize,
    /// Paths stopping past this tau still get an endpoint attempt at t = 1.
    pub endgame_tau: f64,
    /// Fallback refinement parameter: boundary representatives are corrected
    /// at tau = 1 - refine_offset when Newton at t = 1 fails outright.
    pub refine_offset: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            tol_corrector: 1e-12,
            max_steps: 10_000,
            min_step: 1e-14,
            initial_step: 0.1,
            max_step: 0.1,
            endpoint_newton_iters: 50,
            endgame_tau: 0.999,
            refine_offset: 1e-6,
        }
    }
}

impl TrackerConfig {
    /// Short cautious steps for re-tracking paths that failed or collided.
    pub fn conservative(&self) -> Self {
        Self {
            initial_step: 0.02,
            max_step: 0.05,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrackedPath {
    pub start: DVector<Complex64>,
    pub status: PathStatus,
    pub endpoint: DVector<Complex64>,
    pub t_reached: f64,
    /// Normalized residual of the square system at the endpoint.
    pub newton_residual: f64,
    pub steps_taken: usize,
    /// Endpoint Newton converged only in residual, not in step size: the
    /// endpoint is a singular point of the square system (positive
    /// multiplicity) and its accuracy is limited to roughly sqrt(eps).
    pub stalled: bool,
}

const DIVERGENCE_NORM: f64 = 1e14;

fn inf_norm(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Newton iteration on the square system at fixed tau. Returns the corrected
/// point and whether the relative step dropped below `tol`.
fn newton_correct(
    sys: &HomotopySystem,
    y0: &DVector<Complex64>,
    tau: f64,
    max_iters: usize,
    tol: f64,
) -> Option<(DVector<Complex64>, bool)> {
    let mut y = y0.clone();
    for _ in 0..max_iters {
        let res = sys.eval(&y, tau);
        let jac = sys.jacobian(&y, tau);
        let delta = jac.lu().solve(&(-res))?;
        let rel = inf_norm(&delta) / inf_norm(&y).max(1.0);
        y += delta;
        if !rel.is_finite() {
            return None;
        }
        if rel <= tol {
            return Some((y, true));
        }
    }
    Some((y, false))
}

/// One RK4 predictor step of size `h` from `(y, tau)`.
fn rk4_predict(
    sys: &HomotopySystem,
    y: &DVector<Complex64>,
    tau: f64,
    h: f64,
) -> Option<DVector<Complex64>> {
    let slope = |yy: &DVector<Complex64>, tt: f64| -> Option<DVector<Complex64>> {
        let jac = sys.jacobian(yy, tt);
        let rhs = -sys.dtau(yy, tt);
        jac.lu().solve(&rhs)
    };
    let k1 = slope(y, tau)?;
    let k2 = slope(&(y + &k1 * Complex64::new(h / 2.0, 0.0)), tau + h / 2.0)?;
    let k3 = slope(&(y + &k2 * Complex64::new(h / 2.0, 0.0)), tau + h / 2.0)?;
    let k4 = slope(&(y + &k3 * Complex64::new(h, 0.0)), tau + h)?;
    Some(y + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
        * Complex64::new(h / 6.0, 0.0))
}

/// Newton refinement at t = 1 keeping the best-residual iterate. Singular
/// endpoints converge only linearly and stall near sqrt(eps); they are
/// accepted on the residual criterion.
fn endpoint_newton(
    sys: &HomotopySystem,
    y0: &DVector<Complex64>,
    cfg: &TrackerConfig,
) -> (DVector<Complex64>, f64, bool) {
    let mut y = y0.clone();
    let mut best = y.clone();
    let mut best_res = sys.endpoint_residual(&y);
    let mut step_converged = false;
    for _ in 0..cfg.endpoint_newton_iters {
        let res = sys.eval_at_t(&y, Complex64::new(1.0, 0.0));
        let jac = sys.jacobian_at_t(&y, Complex64::new(1.0, 0.0));
        let Some(delta) = jac.lu().solve(&(-res)) else {
            break;
        };
        let rel = inf_norm(&delta) / inf_norm(&y).max(1.0);
        y += delta;
        if !inf_norm(&y).is_finite() {
            break;
        }
        let r = sys.endpoint_residual(&y);
        if r < best_res {
            best_res = r;
            best = y.clone();
        }
        if rel <= cfg.tol_corrector {
            step_converged = true;
            break;
        }
    }
    (best, best_res, step_converged)
}

pub fn track_one(
    sys: &HomotopySystem,
    start: &DVector<Complex64>,
    cfg: &TrackerConfig,
) -> TrackedPath {
    let mut y = start.clone();
    let mut tau = 0.0_f64;
    let mut h = cfg.initial_step.min(cfg.max_step).min(1.0);
    let mut consecutive = 0usize;
    let mut steps = 0usize;

    let fail = |status: PathStatus, y: DVector<Complex64>, tau: f64, steps: usize| TrackedPath {
        start: start.clone(),
        status,
        newton_residual: sys.endpoint_residual(&y),
        endpoint: y,
        t_reached: tau,
        steps_taken: steps,
        stalled: false,
    };

    let mut exhausted = PathStatus::Success;
    while tau < 1.0 {
        if steps >= cfg.max_steps {
            exhausted = PathStatus::MaxSteps;
            break;
        }
        let last = h >= 1.0 - tau;
        let step = h.min(1.0 - tau);
        let target_tau = if last { 1.0 } else { tau + step };
        let accepted = rk4_predict(sys, &y, tau, target_tau - tau)
            .and_then(|pred| newton_correct(sys, &pred, target_tau, 3, cfg.tol_corrector))
            .and_then(|(corr, ok)| if ok { Some(corr) } else { None });
        match accepted {
            Some(corrected) => {
                y = corrected;
                tau = target_tau;
                steps += 1;
                consecutive += 1;
                if consecutive >= 4 {
                    h = (h * 1.5).min(cfg.max_step);
                    consecutive = 0;
                }
                if inf_norm(&y) > DIVERGENCE_NORM {
                    return fail(PathStatus::Diverged, y, tau, steps);
                }
            }
            None => {
                consecutive = 0;
                h /= 2.0;
                if h < cfg.min_step {
                    exhausted = PathStatus::MinStep;
                    break;
                }
            }
        }
    }

    if tau >= 1.0 || tau >= cfg.endgame_tau {
        let (refined, residual, step_converged) = endpoint_newton(sys, &y, cfg);
        if residual <= cfg.tol_corrector {
            return TrackedPath {
                start: start.clone(),
                status: PathStatus::Success,
                endpoint: refined,
                t_reached: 1.0,
                newton_residual: residual,
                steps_taken: steps,
                stalled: !step_converged,
            };
        }
        if tau < 1.0 {
            // stopped short and Newton at t = 1 fails: refine just below the
            // endpoint so that clustering still sees a stable representative
            let tau_ref = 1.0 - cfg.refine_offset;
            if let Some((yr, _)) = newton_correct(sys, &y, tau_ref, 10, cfg.tol_corrector) {
                let mut path = fail(exhausted, yr, tau, steps);
                path.stalled = true;
                return path;
            }
        }
    }
    let status = if exhausted == PathStatus::Success {
        PathStatus::MinStep
    } else {
        exhausted
    };
    fail(status, y, tau, steps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// A t-independent system: target equals start, no circuit rows.
    fn constant_system() -> (HomotopySystem, DVector<Complex64>) {
        // L = I_2, d = 1, n = 1; A^T = (0 1); patch chosen so the start
        // solution is y = (1, 0)
        let a = DMatrix::from_row_slice(1, 2, &[c(0.0, 0.0), c(1.0, 0.0)]);
        let patch = DVector::from_column_slice(&[c(1.0, 0.0), c(0.3, 0.0)]);
        let sys = HomotopySystem::new(
            1,
            1,
            a.clone(),
            a,
            vec![],
            DMatrix::zeros(0, 0),
            patch,
            c(0.0, 0.0),
        );
        let start = DVector::from_column_slice(&[c(1.0, 0.0), c(0.0, 0.0)]);
        (sys, start)
    }

    #[test]
    fn constant_path_takes_one_coarse_step() {
        let (sys, start) = constant_system();
        let cfg = TrackerConfig {
            initial_step: 1.0,
            max_step: 1.0,
            ..TrackerConfig::default()
        };
        let path = track_one(&sys, &start, &cfg);
        assert_eq!(path.status, PathStatus::Success);
        assert_eq!(path.steps_taken, 1);
        assert_eq!(path.t_reached, 1.0);
        assert!(inf_norm(&(path.endpoint - start)) < 1e-14);
    }

    #[test]
    fn truncated_budget_reports_max_steps() {
        let (sys, start) = constant_system();
        let cfg = TrackerConfig {
            max_steps: 0,
            ..TrackerConfig::default()
        };
        let path = track_one(&sys, &start, &cfg);
        assert_eq!(path.status, PathStatus::MaxSteps);
        assert!(path.t_reached < 1.0);
    }
}
