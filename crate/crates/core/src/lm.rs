//! Small dense Levenberg-Marquardt solver with numerical Jacobians and a
//! projection hook applied after every step (used to keep unit-vector
//! parameters normalized and joint angles inside their limits).

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Debug)]
pub struct LmConfig {
    pub max_iterations: usize,
    /// Relative decrease of the cost below which iteration stops.
    pub ftol: f64,
    /// Relative step size below which iteration stops.
    pub xtol: f64,
    /// Absolute cost below which the problem counts as solved.
    pub cost_floor: f64,
    /// Central-difference step for the Jacobian.
    pub diff_step: f64,
    pub initial_damping: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iterations: 200,
            ftol: 1e-15,
            xtol: 1e-14,
            cost_floor: 1e-30,
            diff_step: 1e-6,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LmReport {
    pub params: DVector<f64>,
    /// Final cost `½‖r‖²`.
    pub cost: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Cost after the start and after every accepted step.
    pub history: Vec<f64>,
}

fn cost_of(r: &DVector<f64>) -> f64 {
    0.5 * r.norm_squared()
}

/// Central-difference Jacobian of `f` at `x`.
pub fn numerical_jacobian<F>(f: &F, x: &DVector<f64>, r0_len: usize, h: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let n = x.len();
    let mut j = DMatrix::zeros(r0_len, n);
    let mut xp = x.clone();
    for k in 0..n {
        let orig = xp[k];
        xp[k] = orig + h;
        let rp = f(&xp);
        xp[k] = orig - h;
        let rm = f(&xp);
        xp[k] = orig;
        let col = (rp - rm) / (2.0 * h);
        j.set_column(k, &col);
    }
    j
}

/// Minimizes `½‖residual(x)‖²` starting from `x0`. `project` maps every
/// trial point back onto the admissible parameter set.
pub fn minimize<F, P>(x0: DVector<f64>, residual: F, project: P, cfg: &LmConfig) -> LmReport
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
    P: Fn(&mut DVector<f64>),
{
    let mut x = x0;
    project(&mut x);
    let mut r = residual(&x);
    let mut cost = cost_of(&r);
    let mut history = vec![cost];
    let mut mu = cfg.initial_damping;
    let n = x.len();
    if n == 0 || cost <= cfg.cost_floor {
        return LmReport {
            params: x,
            cost,
            iterations: 0,
            converged: true,
            history,
        };
    }

    let mut iterations = 0;
    let mut converged = false;
    'outer: while iterations < cfg.max_iterations {
        iterations += 1;
        let j = numerical_jacobian(&residual, &x, r.len(), cfg.diff_step);
        let jt = j.transpose();
        let a = &jt * &j;
        let g = &jt * &r;
        if g.amax() <= 1e-300 {
            converged = true;
            break;
        }
        loop {
            let mut damped = a.clone();
            for k in 0..n {
                damped[(k, k)] += mu * (a[(k, k)] + 1e-12);
            }
            let step = match damped.cholesky() {
                Some(ch) => ch.solve(&(-&g)),
                None => {
                    mu *= 10.0;
                    if mu > 1e20 {
                        converged = true;
                        break 'outer;
                    }
                    continue;
                }
            };
            let mut trial = &x + &step;
            project(&mut trial);
            let r_trial = residual(&trial);
            let c_trial = cost_of(&r_trial);
            if c_trial.is_finite() && c_trial < cost {
                let moved = (&trial - &x).norm();
                let decrease = cost - c_trial;
                x = trial;
                r = r_trial;
                cost = c_trial;
                history.push(cost);
                mu = (mu / 3.0).max(1e-12);
                if cost <= cfg.cost_floor
                    || decrease <= cfg.ftol * cost
                    || moved <= cfg.xtol * (x.norm() + cfg.xtol)
                {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            mu *= 4.0;
            if mu > 1e20 {
                // no descent direction left at machine precision
                converged = true;
                break 'outer;
            }
        }
    }

    LmReport {
        params: x,
        cost,
        iterations,
        converged,
        history,
    }
}
