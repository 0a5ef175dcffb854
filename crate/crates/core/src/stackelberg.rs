//! Non-cooperative benchmark: the operator posts a linear unit price to each
//! APO, each APO best-responds with an offload volume.
//!
//! AP-side efficiency is normalised to one here; scenarios with `phi_n != 1`
//! are rejected rather than reinterpreted.
//!
//! The leader problem is solved in offload space. Inducing `x` from APO `n`
//! takes the price `p_n(x) = w - (w - c) F(B - x)`, so the operator pays
//! `P_n(x) = p_n(x) x`, which is convex when the demand density is
//! nonincreasing. The operator's payoff `R(x) - sum P_n(x_n)` is then concave
//! and its optimum equalises `theta_n P_n'(x_n)` with the marginal cost.

use serde::Serialize;

use crate::error::SolveError;
use crate::model::{ApoParams, CostModel, Scenario};
use crate::optimizer::{decreasing_root, socially_optimal, OptimizerConfig};
use crate::welfare::{self, baseline_consumption, consumption_unchecked, profit_loss_unchecked};

/// Price below which an APO offloads nothing: `c + (w - c)(1 - F(B))`.
pub fn critical_price(apo: &ApoParams) -> f64 {
    apo.c_n + (apo.w_n - apo.c_n) * (1.0 - apo.demand.cdf(apo.b_n))
}

/// The APO's profit-maximising offload at unit price `p`.
pub fn apo_best_response(apo: &ApoParams, p: f64) -> f64 {
    if p < critical_price(apo) {
        0.0
    } else if p > apo.w_n {
        apo.b_n
    } else {
        let u = (apo.w_n - p) / (apo.w_n - apo.c_n);
        (apo.b_n - apo.demand.inverse_cdf(u)).clamp(0.0, apo.b_n)
    }
}

/// APO profit at price `p` and offload `x`: `p x + Q_n(x)`.
pub fn apo_payoff(apo: &ApoParams, p: f64, x: f64) -> f64 {
    p * x + profit_loss_unchecked(apo, x)
}

/// Price that induces offload `x` when the APO breaks ties in the operator's favour.
pub fn inducing_price(apo: &ApoParams, x: f64) -> f64 {
    apo.w_n - (apo.w_n - apo.c_n) * apo.demand.cdf(apo.b_n - x)
}

/// One-sided marginal payments `(P'(x-), P'(x+))` with `P(x) = inducing_price(x) x`.
fn marginal_payment(apo: &ApoParams, x: f64) -> (f64, f64) {
    let p = inducing_price(apo, x);
    let m = apo.w_n - apo.c_n;
    let t = apo.b_n - x;
    let left = p + x * m * apo.demand.pdf(t);
    // moving x right moves t left; at the bottom of the support there is no
    // feasible right side, so the left value stands in
    let right = if t > apo.demand.support().0 { p + x * m * apo.demand.pdf_left(t) } else { left };
    (left, right)
}

/// Largest offload an operator can buy: its own traffic, and no more than the
/// APO gives at the top of the price range.
fn leader_cap(apo: &ApoParams) -> f64 {
    apo.s_n.min(apo.b_n - apo.demand.support().0).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Binding {
    /// Price below the critical price; the APO offloads nothing.
    Inactive,
    Interior,
    /// Offload capped by the operator's traffic in the area.
    Traffic,
    /// Offload capped by the top of the APO's price range.
    Capacity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StackelbergOutcome {
    pub p_star: Vec<f64>,
    pub x: Vec<f64>,
    pub mno_payoff: f64,
    pub apo_payoffs: Vec<f64>,
    pub welfare: f64,
    /// Largest relative first-order-condition gap over interior coordinates.
    pub foc_residual: f64,
    /// Marginal payment `theta_n P_n'(x_n)` per APO; at a kink of `P_n`, the
    /// one-sided value closest to the operator's marginal saving.
    pub marginal_payments: Vec<f64>,
    pub binding: Vec<Binding>,
}

fn check_phi(s: &Scenario) -> Result<(), SolveError> {
    if let Some(i) = s.apos.iter().position(|a| a.phi_n != 1.0) {
        return Err(SolveError::Config(format!(
            "pricing benchmark needs phi = 1, APO {} has phi = {}",
            i + 1,
            s.apos[i].phi_n
        )));
    }
    Ok(())
}

/// Operator-side marginal saving for APO `i` at profile `x`.
fn marginal_saving(s: &Scenario, x: &[f64], i: usize) -> f64 {
    let apo = &s.apos[i];
    let shape = s.mno.cost_model.shape();
    match s.mno.cost_model {
        CostModel::AdditivePerArea(_) => shape.derivative((apo.s_n - x[i]) / apo.theta_n) / apo.theta_n,
        CostModel::CoupledTotal(_) => shape.derivative(consumption_unchecked(s, x)) / apo.theta_n,
    }
}

/// Leader-optimal offloads.
fn leader_offloads(s: &Scenario, tol: f64) -> Vec<f64> {
    let n = s.n();
    let caps: Vec<f64> = s.apos.iter().map(leader_cap).collect();
    let shape = *s.mno.cost_model.shape();
    let decoupled = s.mno.cost_model.is_additive() || shape.inverse_derivative(1.0).is_none();
    if decoupled {
        return (0..n)
            .map(|i| {
                let apo = &s.apos[i];
                decreasing_root(caps[i], tol, |xi| {
                    let mc = match s.mno.cost_model {
                        CostModel::AdditivePerArea(_) => shape.derivative((apo.s_n - xi) / apo.theta_n) / apo.theta_n,
                        CostModel::CoupledTotal(_) => shape.derivative(0.0) / apo.theta_n,
                    };
                    mc - marginal_payment(apo, xi).1
                })
            })
            .collect();
    }
    // Coupled, strictly convex cost: bisect on the marginal cost level.
    let b0 = baseline_consumption(s);
    let respond = |lambda: f64| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let apo = &s.apos[i];
                decreasing_root(caps[i], tol, |xi| lambda / apo.theta_n - marginal_payment(apo, xi).1)
            })
            .collect()
    };
    let consumption = |x: &[f64]| b0 - x.iter().zip(&s.apos).map(|(xi, a)| xi / a.theta_n).sum::<f64>();
    let b_min = b0 - caps.iter().zip(&s.apos).map(|(u, a)| u / a.theta_n).sum::<f64>();
    let (mut lo, mut hi) = (shape.derivative(b_min.max(0.0)), shape.derivative(b0));
    if hi <= lo {
        return respond(hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if shape.derivative(consumption(&respond(mid))) > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // Offloads can jump where a marginal payment is flat. Start from the
    // low side and fill the gap to the target consumption, lowest index first.
    let mut x = respond(lo);
    let x_hi = respond(hi);
    let target = shape.inverse_derivative(hi).expect("strictly convex cost").max(b_min);
    let mut excess = consumption(&x) - target;
    for i in 0..n {
        if excess <= 0.0 {
            break;
        }
        let room = x_hi[i] - x[i];
        let take = room.min(excess * s.apos[i].theta_n).max(0.0);
        x[i] += take;
        excess -= take / s.apos[i].theta_n;
    }
    x
}

/// Operator-optimal prices and the resulting equilibrium.
pub fn mno_optimal_prices(s: &Scenario, cfg: &OptimizerConfig) -> Result<StackelbergOutcome, SolveError> {
    cfg.check()?;
    check_phi(s)?;
    let n = s.n();
    let x = leader_offloads(s, cfg.bisect_tol);
    let caps: Vec<f64> = s.apos.iter().map(leader_cap).collect();
    let mut p_star = vec![0.0; n];
    let mut apo_payoffs = vec![0.0; n];
    let mut marginal_payments = vec![0.0; n];
    let mut binding = vec![Binding::Interior; n];
    let mut foc_residual: f64 = 0.0;
    for (i, apo) in s.apos.iter().enumerate() {
        if x[i] <= 0.0 {
            binding[i] = Binding::Inactive;
            continue;
        }
        p_star[i] = inducing_price(apo, x[i]);
        apo_payoffs[i] = apo_payoff(apo, p_star[i], x[i]);
        let mc = marginal_saving(s, &x, i);
        // The solver places x to within `nudge` of a kink, so the FOC is
        // tested against the one-sided marginals over that neighbourhood.
        let nudge = 1e3 * cfg.bisect_tol * (1.0 + caps[i]);
        let left = marginal_payment(apo, (x[i] - nudge).max(0.0)).0;
        let right = marginal_payment(apo, (x[i] + nudge).min(caps[i])).1;
        // at a kink, the element of the subdifferential closest to the saving
        marginal_payments[i] = apo.theta_n * mc.clamp(left.min(right), left.max(right));
        if x[i] >= caps[i] {
            binding[i] = if apo.s_n <= apo.b_n - apo.demand.support().0 { Binding::Traffic } else { Binding::Capacity };
            continue;
        }
        let gap = if mc < left {
            left - mc
        } else if mc > right {
            mc - right
        } else {
            0.0
        };
        foc_residual = foc_residual.max(gap / mc.abs().max(f64::MIN_POSITIVE));
    }
    let welfare = welfare::social_welfare(s, &x)?;
    let paid: f64 = p_star.iter().zip(&x).map(|(p, xi)| p * xi).sum();
    let mno_payoff = welfare::cost_reduction(s, &x)? - paid;
    Ok(StackelbergOutcome { p_star, x, mno_payoff, apo_payoffs, welfare, foc_residual, marginal_payments, binding })
}

/// Operator payoff when every APO best-responds to `p` (no traffic cap applied).
pub fn mno_payoff_at_prices(s: &Scenario, p: &[f64]) -> f64 {
    let x: Vec<f64> = s.apos.iter().zip(p).map(|(a, &pi)| apo_best_response(a, pi)).collect();
    let reduction = match s.mno.cost_model {
        CostModel::CoupledTotal(shape) => {
            shape.value(baseline_consumption(s)) - shape.value(consumption_unchecked(s, &x))
        }
        CostModel::AdditivePerArea(shape) => s
            .apos
            .iter()
            .zip(&x)
            .map(|(a, xi)| shape.value(a.s_n / a.theta_n) - shape.value((a.s_n - xi) / a.theta_n))
            .sum(),
    };
    reduction - p.iter().zip(&x).map(|(pi, xi)| pi * xi).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub x_nbs: Vec<f64>,
    pub x_ne: Vec<f64>,
    pub p_star: Vec<f64>,
    /// `sum |x_nbs - x_ne| / sum x_nbs`.
    pub weighted_difference: f64,
    /// Set when nothing is offloaded at the social optimum, so the difference is reported as 0.
    pub degenerate: bool,
    pub welfare_nbs: f64,
    pub welfare_ne: f64,
    pub welfare_gap: f64,
}

/// Social optimum against the pricing equilibrium.
pub fn compare_nbs_ne(s: &Scenario, cfg: &OptimizerConfig) -> Result<ComparisonReport, SolveError> {
    let x_nbs = socially_optimal(s, cfg)?;
    let ne = mno_optimal_prices(s, cfg)?;
    let total: f64 = x_nbs.iter().sum();
    let degenerate = total <= 0.0;
    let weighted_difference =
        if degenerate { 0.0 } else { x_nbs.iter().zip(&ne.x).map(|(a, b)| (a - b).abs()).sum::<f64>() / total };
    let welfare_nbs = welfare::social_welfare(s, &x_nbs)?;
    Ok(ComparisonReport {
        weighted_difference,
        degenerate,
        welfare_gap: welfare_nbs - ne.welfare,
        welfare_nbs,
        welfare_ne: ne.welfare,
        p_star: ne.p_star,
        x_ne: ne.x,
        x_nbs,
    })
}
