//! Distributions of an access-point owner's own resource demand.

use serde::{Deserialize, Serialize};

/// Distribution of the owner's own demand `xi` on a bounded support `[lo, hi]`.
///
/// Both variants have a nonincreasing density, which the pricing benchmark
/// relies on. Piecewise-linear CDFs are checked for this in [`DemandDistribution::check`].
#[derive(Debug, Clone, PartialEq)]
pub enum DemandDistribution {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// Knots `(value, cdf)`; values strictly increasing, cdf from 0 to 1.
    PiecewiseLinearCdf {
        knots: Vec<(f64, f64)>,
    },
}

impl DemandDistribution {
    pub fn uniform(lo: f64, hi: f64) -> Self {
        DemandDistribution::Uniform { lo, hi }
    }

    pub fn piecewise(knots: Vec<(f64, f64)>) -> Self {
        DemandDistribution::PiecewiseLinearCdf { knots }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            DemandDistribution::Uniform { lo, hi } => (*lo, *hi),
            DemandDistribution::PiecewiseLinearCdf { knots } => {
                (knots.first().map_or(0.0, |k| k.0), knots.last().map_or(0.0, |k| k.0))
            }
        }
    }

    pub fn check(&self) -> Result<(), String> {
        match self {
            DemandDistribution::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite()) {
                    return Err("uniform demand bounds must be finite".into());
                }
                if *lo < 0.0 {
                    return Err(format!("demand support requires lo >= 0, got {lo}"));
                }
                if lo >= hi {
                    return Err(format!("demand support requires lo < hi, got [{lo}, {hi}]"));
                }
            }
            DemandDistribution::PiecewiseLinearCdf { knots } => {
                if knots.len() < 2 {
                    return Err("piecewise-linear CDF needs at least two knots".into());
                }
                if knots.iter().any(|(v, f)| !(v.is_finite() && f.is_finite())) {
                    return Err("piecewise-linear CDF knots must be finite".into());
                }
                if knots[0].0 < 0.0 {
                    return Err(format!("demand support requires lo >= 0, got {}", knots[0].0));
                }
                if knots[0].1 != 0.0 || knots[knots.len() - 1].1 != 1.0 {
                    return Err("piecewise-linear CDF must start at 0 and end at 1".into());
                }
                let mut prev_slope = f64::INFINITY;
                for pair in knots.windows(2) {
                    let ((v0, f0), (v1, f1)) = (pair[0], pair[1]);
                    if v1 <= v0 {
                        return Err("piecewise-linear CDF values must be strictly increasing".into());
                    }
                    if f1 <= f0 {
                        return Err("piecewise-linear CDF must be strictly increasing".into());
                    }
                    let slope = (f1 - f0) / (v1 - v0);
                    if slope > prev_slope * (1.0 + 1e-12) {
                        return Err("piecewise-linear CDF density must be nonincreasing".into());
                    }
                    prev_slope = slope;
                }
            }
        }
        Ok(())
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            DemandDistribution::Uniform { lo, hi } => ((t - lo) / (hi - lo)).clamp(0.0, 1.0),
            DemandDistribution::PiecewiseLinearCdf { knots } => {
                let (lo, hi) = self.support();
                if t <= lo {
                    return 0.0;
                }
                if t >= hi {
                    return 1.0;
                }
                let i = segment_index(knots, t);
                let ((v0, f0), (v1, f1)) = (knots[i], knots[i + 1]);
                f0 + (f1 - f0) * (t - v0) / (v1 - v0)
            }
        }
    }

    /// Density, taking the right-hand limit at knots.
    pub fn pdf(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t < lo || t >= hi {
            return 0.0;
        }
        match self {
            DemandDistribution::Uniform { .. } => 1.0 / (hi - lo),
            DemandDistribution::PiecewiseLinearCdf { knots } => {
                let i = segment_index(knots, t);
                let ((v0, f0), (v1, f1)) = (knots[i], knots[i + 1]);
                (f1 - f0) / (v1 - v0)
            }
        }
    }

    /// Density, taking the left-hand limit at knots.
    pub fn pdf_left(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t <= lo || t > hi {
            return 0.0;
        }
        match self {
            DemandDistribution::Uniform { .. } => 1.0 / (hi - lo),
            DemandDistribution::PiecewiseLinearCdf { knots } => {
                let i = knots.iter().position(|k| k.0 >= t).unwrap_or(knots.len() - 1).max(1) - 1;
                let ((v0, f0), (v1, f1)) = (knots[i], knots[i + 1]);
                (f1 - f0) / (v1 - v0)
            }
        }
    }

    /// True when `t` sits on a point where the density jumps.
    pub fn is_knot(&self, t: f64) -> bool {
        match self {
            DemandDistribution::Uniform { lo, hi } => t == *lo || t == *hi,
            DemandDistribution::PiecewiseLinearCdf { knots } => knots.iter().any(|k| k.0 == t),
        }
    }

    /// Generalized inverse `inf { t : F(t) >= u }` for `u` in `[0, 1]`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        match self {
            DemandDistribution::Uniform { lo, hi } => lo + u * (hi - lo),
            DemandDistribution::PiecewiseLinearCdf { knots } => {
                if u <= 0.0 {
                    return knots[0].0;
                }
                let i = knots.windows(2).position(|w| u <= w[1].1).unwrap_or(knots.len() - 2);
                let ((v0, f0), (v1, f1)) = (knots[i], knots[i + 1]);
                (v0 + (v1 - v0) * (u - f0) / (f1 - f0)).min(v1)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        self.expected_min(self.support().1)
    }

    /// `E[min(cap, xi)] = ∫_0^cap (1 - F(t)) dt`, computed exactly per segment.
    ///
    /// A cap below the support returns the cap itself; a cap above returns the mean.
    pub fn expected_min(&self, cap: f64) -> f64 {
        let cap = cap.max(0.0);
        match self {
            DemandDistribution::Uniform { lo, hi } => {
                if cap <= *lo {
                    cap
                } else {
                    let top = cap.min(*hi);
                    let len = top - lo;
                    lo + len - len * len / (2.0 * (hi - lo))
                }
            }
            DemandDistribution::PiecewiseLinearCdf { knots } => {
                let lo = knots[0].0;
                if cap <= lo {
                    return cap;
                }
                let mut total = lo;
                for w in knots.windows(2) {
                    let ((v0, f0), (v1, f1)) = (w[0], w[1]);
                    if cap <= v0 {
                        break;
                    }
                    let len = cap.min(v1) - v0;
                    let slope = (f1 - f0) / (v1 - v0);
                    total += len * (1.0 - f0) - 0.5 * slope * len * len;
                }
                total
            }
        }
    }
}

fn segment_index(knots: &[(f64, f64)], t: f64) -> usize {
    // last i with knots[i].0 <= t, limited to a valid segment start
    let i = knots.partition_point(|k| k.0 <= t);
    i.saturating_sub(1).min(knots.len() - 2)
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
enum DemandWire {
    Uniform([f64; 2]),
    PiecewiseLinearCdf(Vec<[f64; 2]>),
}

impl Serialize for DemandDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            DemandDistribution::Uniform { lo, hi } => DemandWire::Uniform([*lo, *hi]),
            DemandDistribution::PiecewiseLinearCdf { knots } => {
                DemandWire::PiecewiseLinearCdf(knots.iter().map(|&(v, f)| [v, f]).collect())
            }
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DemandDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(match DemandWire::deserialize(deserializer)? {
            DemandWire::Uniform([lo, hi]) => DemandDistribution::Uniform { lo, hi },
            DemandWire::PiecewiseLinearCdf(k) => {
                DemandDistribution::PiecewiseLinearCdf { knots: k.into_iter().map(|[v, f]| (v, f)).collect() }
            }
        })
    }
}
