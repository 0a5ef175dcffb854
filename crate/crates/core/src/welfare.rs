//! Economic quantities of an offload profile: resource use, cost reduction,
//! APO profit loss and social welfare, plus their derivatives.

use crate::error::Infeasible;
use crate::model::{ApoParams, CostModel, DemandDistribution, Scenario};

/// Relative slack allowed when checking `x` against the feasible box.
const BOX_SLACK: f64 = 1e-12;

/// Anything whose value is a social welfare over an offload vector.
///
/// Bargaining only needs this much, which lets tests drive it with tabulated
/// welfare functions as well as full scenarios.
pub trait WelfareFn: Sync {
    fn dim(&self) -> usize;
    /// Welfare at `x`; callers guarantee `x` is feasible.
    fn value(&self, x: &[f64]) -> f64;
}

impl WelfareFn for Scenario {
    fn dim(&self) -> usize {
        self.n()
    }

    fn value(&self, x: &[f64]) -> f64 {
        welfare_unchecked(self, x)
    }
}

/// `Psi(x) = psi(sum x)` with `psi` linear between the integer points of a table.
///
/// Models the symmetric example where each of `n` identical APOs offloads one unit.
#[derive(Debug, Clone)]
pub struct SymmetricTableWelfare {
    n: usize,
    psi: Vec<f64>,
}

impl SymmetricTableWelfare {
    /// `psi[k]` is the welfare when `k` units are offloaded in total; needs `psi.len() == n + 1`.
    pub fn new(n: usize, psi: Vec<f64>) -> Self {
        assert_eq!(psi.len(), n + 1, "table needs one entry per total 0..=n");
        SymmetricTableWelfare { n, psi }
    }

    pub fn table(&self) -> &[f64] {
        &self.psi
    }
}

impl WelfareFn for SymmetricTableWelfare {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        let t = x.iter().sum::<f64>().clamp(0.0, self.n as f64);
        let k = (t.floor() as usize).min(self.n.saturating_sub(1));
        if self.n == 0 {
            return self.psi[0];
        }
        let frac = t - k as f64;
        if frac == 0.0 {
            self.psi[k]
        } else {
            self.psi[k] + frac * (self.psi[k + 1] - self.psi[k])
        }
    }
}

/// Per-APO feasible intervals `[0, min(S_n, phi_n B_n)]`, as upper ends.
pub fn upper_bounds(s: &Scenario) -> Vec<f64> {
    s.apos.iter().map(ApoParams::offload_cap).collect()
}

/// Rejects profiles outside the feasible box.
pub fn check_feasible(s: &Scenario, x: &[f64]) -> Result<(), Infeasible> {
    assert_eq!(x.len(), s.n(), "profile length must equal the number of APOs");
    for (index, (apo, &value)) in s.apos.iter().zip(x).enumerate() {
        let cap = apo.offload_cap();
        if !(value >= -BOX_SLACK * (1.0 + cap) && value <= cap + BOX_SLACK * (1.0 + cap)) {
            return Err(Infeasible { index, value, cap });
        }
    }
    Ok(())
}

fn one_apo_feasible(apo: &ApoParams, x: f64) -> Result<(), Infeasible> {
    let cap = apo.phi_n * apo.b_n;
    if x >= -BOX_SLACK * (1.0 + cap) && x <= cap + BOX_SLACK * (1.0 + cap) {
        Ok(())
    } else {
        Err(Infeasible { index: 0, value: x, cap })
    }
}

/// `b(x) = S0/theta0 + sum (S_n - x_n)/theta_n`.
pub fn resource_consumption(s: &Scenario, x: &[f64]) -> Result<f64, Infeasible> {
    check_feasible(s, x)?;
    Ok(consumption_unchecked(s, x))
}

pub(crate) fn consumption_unchecked(s: &Scenario, x: &[f64]) -> f64 {
    let mut b = s.mno.s0 / s.mno.theta0;
    for (apo, &xn) in s.apos.iter().zip(x) {
        b += (apo.s_n - xn) / apo.theta_n;
    }
    b
}

/// `b(0)`, the operator's consumption with nothing offloaded.
pub fn baseline_consumption(s: &Scenario) -> f64 {
    let mut b = s.mno.s0 / s.mno.theta0;
    for apo in &s.apos {
        b += apo.s_n / apo.theta_n;
    }
    b
}

/// `R(x) = C(b(0)) - C(b(x))`, or the per-area sum for an additive cost.
pub fn cost_reduction(s: &Scenario, x: &[f64]) -> Result<f64, Infeasible> {
    check_feasible(s, x)?;
    Ok(reduction_unchecked(s, x))
}

fn reduction_unchecked(s: &Scenario, x: &[f64]) -> f64 {
    match s.mno.cost_model {
        CostModel::CoupledTotal(shape) => {
            shape.value(baseline_consumption(s)) - shape.value(consumption_unchecked(s, x))
        }
        CostModel::AdditivePerArea(_) => (0..s.n()).map(|i| area_reduction(s, i, x[i])).sum(),
    }
}

/// `C(S_n/theta_n) - C((S_n - x_n)/theta_n)` for one area under an additive cost.
fn area_reduction(s: &Scenario, i: usize, xn: f64) -> f64 {
    let apo = &s.apos[i];
    let shape = s.mno.cost_model.shape();
    shape.value(apo.s_n / apo.theta_n) - shape.value((apo.s_n - xn) / apo.theta_n)
}

/// `E[min(cap, xi)]` under `dist`; see [`DemandDistribution::expected_min`].
pub fn expected_min_resource(dist: &DemandDistribution, cap: f64) -> f64 {
    dist.expected_min(cap)
}

/// `Q_n(x_n) = (w-c)[Emin(B - x/phi) - Emin(B)] - c x/phi`, always `<= 0`.
pub fn apo_profit_loss(apo: &ApoParams, x_n: f64) -> Result<f64, Infeasible> {
    one_apo_feasible(apo, x_n)?;
    Ok(profit_loss_unchecked(apo, x_n))
}

pub(crate) fn profit_loss_unchecked(apo: &ApoParams, x_n: f64) -> f64 {
    if x_n == 0.0 {
        return 0.0;
    }
    let used = x_n / apo.phi_n;
    let lost = apo.demand.expected_min(apo.b_n - used) - apo.demand.expected_min(apo.b_n);
    (apo.w_n - apo.c_n) * lost - apo.c_n * used
}

/// `Q_n'(x_n) = -[(w-c)(1 - F(B - x/phi)) + c] / phi`.
///
/// `Q_n'` is continuous because `F` is; the second derivative jumps when
/// `B - x/phi` hits a density knot.
pub fn apo_profit_loss_derivative(apo: &ApoParams, x_n: f64) -> f64 {
    let t = apo.b_n - x_n / apo.phi_n;
    -((apo.w_n - apo.c_n) * (1.0 - apo.demand.cdf(t)) + apo.c_n) / apo.phi_n
}

/// Right-hand second derivative of `Q_n` in `x_n`.
pub fn apo_profit_loss_second_derivative(apo: &ApoParams, x_n: f64) -> f64 {
    let t = apo.b_n - x_n / apo.phi_n;
    // increasing x moves t left, so the right limit in x is the left limit in t
    -(apo.w_n - apo.c_n) * apo.demand.pdf_left(t) / (apo.phi_n * apo.phi_n)
}

/// `Psi(x) = R(x) + sum Q_n(x_n)`.
pub fn social_welfare(s: &Scenario, x: &[f64]) -> Result<f64, Infeasible> {
    check_feasible(s, x)?;
    Ok(welfare_unchecked(s, x))
}

pub(crate) fn welfare_unchecked(s: &Scenario, x: &[f64]) -> f64 {
    let mut q = 0.0;
    for (apo, &xn) in s.apos.iter().zip(x) {
        q += profit_loss_unchecked(apo, xn);
    }
    reduction_unchecked(s, x) + q
}

/// Per-area welfare `Psi_n(x_n) = R_n(x_n) + Q_n(x_n)` under an additive cost.
///
/// Panics if the cost is coupled, where welfare does not decompose.
pub fn area_welfare(s: &Scenario, i: usize, x_n: f64) -> f64 {
    assert!(s.mno.cost_model.is_additive(), "area welfare needs an additive cost");
    area_reduction(s, i, x_n) + profit_loss_unchecked(&s.apos[i], x_n)
}

/// Derivative of [`area_welfare`].
pub fn area_welfare_derivative(s: &Scenario, i: usize, x_n: f64) -> f64 {
    let apo = &s.apos[i];
    let shape = s.mno.cost_model.shape();
    shape.derivative((apo.s_n - x_n) / apo.theta_n) / apo.theta_n + apo_profit_loss_derivative(apo, x_n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub g: Vec<f64>,
    /// Set when some `B_n - x_n/phi_n` sits on a density knot, so curvature is one-sided there.
    pub at_knot: bool,
}

/// Analytic gradient `dPsi/dx_n = C'(b(x))/theta_n + Q_n'(x_n)` (per-area `b` for additive cost).
pub fn welfare_gradient(s: &Scenario, x: &[f64]) -> Result<Gradient, Infeasible> {
    check_feasible(s, x)?;
    let mut g = vec![0.0; s.n()];
    gradient_into(s, x, &mut g);
    let at_knot = s.apos.iter().zip(x).any(|(apo, &xn)| apo.demand.is_knot(apo.b_n - xn / apo.phi_n));
    Ok(Gradient { g, at_knot })
}

pub(crate) fn gradient_into(s: &Scenario, x: &[f64], g: &mut [f64]) {
    let shape = s.mno.cost_model.shape();
    match s.mno.cost_model {
        CostModel::CoupledTotal(_) => {
            let marginal = shape.derivative(consumption_unchecked(s, x));
            for (i, apo) in s.apos.iter().enumerate() {
                g[i] = marginal / apo.theta_n + apo_profit_loss_derivative(apo, x[i]);
            }
        }
        CostModel::AdditivePerArea(_) => {
            for i in 0..s.n() {
                g[i] = area_welfare_derivative(s, i, x[i]);
            }
        }
    }
}
