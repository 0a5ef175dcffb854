//! Social optimum `x° = argmax Psi(x)` over the feasible box.

use crate::error::SolveError;
use crate::model::Scenario;
use crate::welfare::{self, area_welfare_derivative, gradient_into, upper_bounds, WelfareFn};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Stop when the projected-gradient step `|P(x + g) - x|_inf` falls below this.
    pub grad_tol: f64,
    pub max_iters: usize,
    /// Interval width at which scalar bisections stop, relative to `1 + cap`.
    pub bisect_tol: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig { grad_tol: 1e-10, max_iters: 100_000, bisect_tol: 1e-12 }
    }
}

impl OptimizerConfig {
    pub fn check(&self) -> Result<(), SolveError> {
        if !(self.grad_tol > 0.0 && self.bisect_tol > 0.0 && self.max_iters > 0) {
            return Err(SolveError::Config("optimizer tolerances and max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Per-APO feasible intervals `[0, min(S_n, phi_n B_n)]`.
pub fn feasible_box(s: &Scenario) -> Vec<(f64, f64)> {
    upper_bounds(s).into_iter().map(|u| (0.0, u)).collect()
}

/// Smallest root of a nonincreasing function on `[0, cap]`, or an endpoint
/// when the sign never changes. Used for every scalar first-order condition.
pub(crate) fn decreasing_root(cap: f64, tol: f64, g: impl Fn(f64) -> f64) -> f64 {
    if cap <= 0.0 || g(0.0) <= 0.0 {
        return 0.0;
    }
    if g(cap) > 0.0 {
        return cap;
    }
    let (mut lo, mut hi) = (0.0, cap);
    let width = tol * (1.0 + cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= width {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Socially optimal offload profile.
///
/// Additive costs decouple into scalar problems solved by derivative bisection.
/// Coupled costs use projected gradient ascent from `x = 0` with Barzilai-Borwein
/// steps and Armijo backtracking. When the optimum is not unique the returned
/// point is the limit of that path, which is the symmetric point for symmetric instances.
pub fn socially_optimal(s: &Scenario, cfg: &OptimizerConfig) -> Result<Vec<f64>, SolveError> {
    cfg.check()?;
    let caps = upper_bounds(s);
    if s.mno.cost_model.is_additive() {
        return Ok((0..s.n())
            .map(|i| decreasing_root(caps[i], cfg.bisect_tol, |x| area_welfare_derivative(s, i, x)))
            .collect());
    }
    projected_gradient(s, &caps, cfg)
}

fn project(x: &mut [f64], caps: &[f64]) {
    for (v, &u) in x.iter_mut().zip(caps) {
        *v = v.clamp(0.0, u);
    }
}

fn stationarity(x: &[f64], g: &[f64], caps: &[f64]) -> f64 {
    x.iter().zip(g).zip(caps).map(|((&xi, &gi), &u)| ((xi + gi).clamp(0.0, u) - xi).abs()).fold(0.0, f64::max)
}

fn projected_gradient(s: &Scenario, caps: &[f64], cfg: &OptimizerConfig) -> Result<Vec<f64>, SolveError> {
    let n = s.n();
    let mut x = vec![0.0; n];
    let mut g = vec![0.0; n];
    gradient_into(s, &x, &mut g);
    let mut f = s.value(&x);
    let mut step = 1.0;
    let mut trial = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    for iter in 0..cfg.max_iters {
        let res = stationarity(&x, &g, caps);
        if res <= cfg.grad_tol {
            log::debug!("projected gradient converged in {iter} iterations");
            return Ok(x);
        }
        let mut alpha = step;
        let mut accepted = false;
        for _ in 0..80 {
            for i in 0..n {
                trial[i] = x[i] + alpha * g[i];
            }
            project(&mut trial, caps);
            let ascent: f64 = (0..n).map(|i| g[i] * (trial[i] - x[i])).sum();
            let f_trial = s.value(&trial);
            let slack = 8.0 * f64::EPSILON * (f.abs() + f_trial.abs());
            if f_trial >= f + 1e-4 * ascent - slack {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(SolveError::NotConverged {
                what: "projected gradient line search",
                iters: iter,
                residual: res,
                last: x,
            });
        }
        gradient_into(s, &trial, &mut g_new);
        // Barzilai-Borwein step for a concave objective: <s, s> / -<s, y>
        let (mut ss, mut sy) = (0.0, 0.0);
        for i in 0..n {
            let d = trial[i] - x[i];
            ss += d * d;
            sy -= d * (g_new[i] - g[i]);
        }
        step = if sy > 0.0 && ss > 0.0 { (ss / sy).clamp(1e-12, 1e12) } else { (alpha * 2.0).min(1e12) };
        std::mem::swap(&mut x, &mut trial);
        std::mem::swap(&mut g, &mut g_new);
        f = s.value(&x);
    }
    let residual = stationarity(&x, &g, caps);
    Err(SolveError::NotConverged { what: "projected gradient", iters: cfg.max_iters, residual, last: x })
}

/// Largest violation of the box KKT conditions at `x`: interior coordinates
/// need a zero gradient, lower-bound ones a nonpositive, upper-bound ones a nonnegative.
pub fn kkt_violation(s: &Scenario, x: &[f64]) -> f64 {
    let caps = upper_bounds(s);
    let g = welfare::welfare_gradient(s, x).map(|g| g.g).unwrap_or_else(|_| vec![f64::INFINITY; s.n()]);
    let mut worst: f64 = 0.0;
    for i in 0..s.n() {
        let v = if caps[i] == 0.0 {
            0.0
        } else if x[i] <= 0.0 {
            g[i].max(0.0)
        } else if x[i] >= caps[i] {
            (-g[i]).max(0.0)
        } else {
            g[i].abs()
        };
        worst = worst.max(v);
    }
    worst
}
