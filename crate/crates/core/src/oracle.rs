//! Slow brute-force cross-checks for the bargaining solutions.
//!
//! Nothing here reuses the closed forms in [`crate::bargaining`]; every value
//! comes from literally maximising a Nash product over a grid.

use crate::error::SolveError;
use crate::model::Scenario;
use crate::welfare::WelfareFn;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridNbs {
    pub x: f64,
    pub pi: f64,
    pub x_cell: f64,
    pub pi_cell: f64,
}

/// Maximises `(Psi(x) - pi) pi` over a `cells x cells` grid on
/// `[0, cap] x [0, max Psi]`; ties go to the first point found.
pub fn grid_nbs(s: &Scenario, cells: usize) -> Result<GridNbs, SolveError> {
    if s.n() != 1 {
        return Err(SolveError::WrongSize { op: "grid oracle", expected: 1, got: s.n() });
    }
    let cells = cells.max(1);
    let cap = s.apos[0].offload_cap();
    let x_cell = cap / cells as f64;
    let psi: Vec<f64> = (0..=cells).map(|i| s.value(&[i as f64 * x_cell])).collect();
    let top = psi.iter().cloned().fold(0.0, f64::max);
    let pi_cell = top / cells as f64;
    let (mut best, mut arg) = (0.0, (0.0, 0.0));
    for (i, &v) in psi.iter().enumerate() {
        for j in 0..=cells {
            let pi = j as f64 * pi_cell;
            let product = (v - pi) * pi;
            if v - pi >= 0.0 && product > best {
                best = product;
                arg = (i as f64 * x_cell, pi);
            }
        }
    }
    Ok(GridNbs { x: arg.0, pi: arg.1, x_cell, pi_cell })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackwardInduction {
    /// Payoff of each APO on the all-agree path, in APO index order.
    pub pi: Vec<f64>,
    pub mno_payoff: f64,
    /// Payoff grid spacing; results are exact up to about `N * step`.
    pub step: f64,
}

/// Sequential bargaining solved step by step from the last APO back to the first.
///
/// At each step the operator and the current APO split the difference between
/// the operator's continuation values after agreement and after disagreement;
/// the split is found by grid search on the Nash product, and the continuation
/// values come from the same procedure at the next step. Offloads are held at
/// `x_star`. Limited to three APOs.
pub fn backward_induction_nbs<W: WelfareFn + ?Sized>(
    w: &W,
    x_star: &[f64],
    order: &[usize],
    cells: usize,
) -> Result<BackwardInduction, SolveError> {
    let n = w.dim();
    if n > 3 || n == 0 {
        return Err(SolveError::WrongSize { op: "backward induction oracle", expected: 3, got: n });
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(SolveError::Config("order must be a permutation of the APOs".into()));
    }
    let at = |mask: usize| -> f64 {
        let x: Vec<f64> = (0..n).map(|i| if mask >> i & 1 == 1 { x_star[i] } else { 0.0 }).collect();
        w.value(&x)
    };
    let scale = (0..1usize << n).map(|m| at(m).abs()).fold(0.0, f64::max);
    let step = if scale > 0.0 { scale / cells.max(1) as f64 } else { 1.0 };
    let mut pi = vec![0.0; n];
    let mno_payoff = continuation(&at, order, 0, 0, step, true, &mut pi);
    Ok(BackwardInduction { pi, mno_payoff, step })
}

/// Operator's value from step `k` on, given the set `mask` of APOs that agreed
/// earlier. Records payoffs into `pi` while on the all-agree path.
fn continuation(
    at: &dyn Fn(usize) -> f64,
    order: &[usize],
    k: usize,
    mask: usize,
    step: f64,
    on_path: bool,
    pi: &mut [f64],
) -> f64 {
    if k == order.len() {
        return at(mask);
    }
    let apo = order[k];
    let agree = continuation(at, order, k + 1, mask | 1 << apo, step, on_path, pi);
    let disagree = continuation(at, order, k + 1, mask, step, false, pi);
    let surplus = agree - disagree;
    let (mut best, mut v_best) = (0.0, 0.0);
    let mut j = 0usize;
    loop {
        let v = j as f64 * step;
        if v > surplus {
            break;
        }
        let product = (surplus - v) * v;
        if product > best {
            best = product;
            v_best = v;
        }
        j += 1;
    }
    if on_path {
        pi[apo] = v_best;
    }
    agree - v_best
}

/// `2^-N sum over I of Psi(I * x_star)`: welfare averaged over every agree/disagree pattern.
pub fn subset_mean_welfare<W: WelfareFn + ?Sized>(w: &W, x_star: &[f64]) -> f64 {
    let n = w.dim();
    assert!(n <= 30, "subset mean enumerates 2^N patterns");
    let mut x = vec![0.0; n];
    let mut total = 0.0;
    for mask in 0..1usize << n {
        for i in 0..n {
            x[i] = if mask >> i & 1 == 1 { x_star[i] } else { 0.0 };
        }
        total += w.value(&x);
    }
    total / (1usize << n) as f64
}
