//! Operator serving-cost functions.

use serde::{Deserialize, Serialize};

/// A convex, strictly increasing cost shape `C(b)` on `b >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostShape {
    /// `C(b) = a * b`
    Linear { a: f64 },
    /// `C(b) = a * b + q * b^2`
    Quadratic { a: f64, q: f64 },
    /// `C(b) = a * (exp(k * b) - 1)`
    Exponential { a: f64, k: f64 },
}

impl CostShape {
    pub fn value(&self, b: f64) -> f64 {
        match *self {
            CostShape::Linear { a } => a * b,
            CostShape::Quadratic { a, q } => a * b + q * b * b,
            CostShape::Exponential { a, k } => a * (k * b).exp_m1(),
        }
    }

    pub fn derivative(&self, b: f64) -> f64 {
        match *self {
            CostShape::Linear { a } => a,
            CostShape::Quadratic { a, q } => a + 2.0 * q * b,
            CostShape::Exponential { a, k } => a * k * (k * b).exp(),
        }
    }

    pub fn second_derivative(&self, b: f64) -> f64 {
        match *self {
            CostShape::Linear { .. } => 0.0,
            CostShape::Quadratic { q, .. } => 2.0 * q,
            CostShape::Exponential { a, k } => a * k * k * (k * b).exp(),
        }
    }

    /// Smallest `b >= 0` with `C'(b) >= slope`; `None` when the marginal cost
    /// is constant (linear shape) and does not pin down a unique level.
    pub fn inverse_derivative(&self, slope: f64) -> Option<f64> {
        match *self {
            CostShape::Linear { .. } => None,
            CostShape::Quadratic { a, q } => {
                if q == 0.0 {
                    None
                } else {
                    Some(((slope - a) / (2.0 * q)).max(0.0))
                }
            }
            CostShape::Exponential { a, k } => Some(((slope / (a * k)).ln() / k).max(0.0)),
        }
    }

    /// Parameter constraints that make the shape strictly increasing and convex on `b >= 0`.
    pub fn check(&self) -> Result<(), String> {
        let ok = |v: f64| v.is_finite();
        match *self {
            CostShape::Linear { a } => {
                if !(ok(a) && a > 0.0) {
                    return Err(format!("linear cost requires a > 0, got a = {a}"));
                }
            }
            CostShape::Quadratic { a, q } => {
                if !(ok(a) && a > 0.0) {
                    return Err(format!("quadratic cost requires a > 0, got a = {a}"));
                }
                if !(ok(q) && q >= 0.0) {
                    return Err(format!("quadratic cost requires q >= 0, got q = {q}"));
                }
            }
            CostShape::Exponential { a, k } => {
                if !(ok(a) && a > 0.0) {
                    return Err(format!("exponential cost requires a > 0, got a = {a}"));
                }
                if !(ok(k) && k > 0.0) {
                    return Err(format!("exponential cost requires k > 0, got k = {k}"));
                }
            }
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CostShape::Linear { .. } => "linear",
            CostShape::Quadratic { .. } => "quadratic",
            CostShape::Exponential { .. } => "exponential",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            CostShape::Linear { a } => vec![a],
            CostShape::Quadratic { a, q } => vec![a, q],
            CostShape::Exponential { a, k } => vec![a, k],
        }
    }

    pub fn from_parts(kind: &str, params: &[f64]) -> Result<Self, String> {
        match (kind, params) {
            ("linear", [a]) => Ok(CostShape::Linear { a: *a }),
            ("quadratic", [a, q]) => Ok(CostShape::Quadratic { a: *a, q: *q }),
            ("exponential", [a, k]) => Ok(CostShape::Exponential { a: *a, k: *k }),
            ("linear" | "quadratic" | "exponential", _) => {
                Err(format!("cost kind `{kind}` got {} parameters", params.len()))
            }
            _ => Err(format!("unknown cost kind `{kind}`")),
        }
    }
}

/// How the operator's cost aggregates over the macro-only area and the AP areas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostModel {
    /// `C(b)` applied separately to each area's resource consumption and summed.
    AdditivePerArea(CostShape),
    /// `C(b)` applied to the total resource consumption.
    CoupledTotal(CostShape),
}

impl CostModel {
    pub fn shape(&self) -> &CostShape {
        match self {
            CostModel::AdditivePerArea(s) | CostModel::CoupledTotal(s) => s,
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, CostModel::AdditivePerArea(_))
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct CostWire {
    kind: String,
    params: Vec<f64>,
    additive: bool,
}

impl Serialize for CostModel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        CostWire { kind: self.shape().kind().to_string(), params: self.shape().params(), additive: self.is_additive() }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CostModel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let wire = CostWire::deserialize(deserializer)?;
        let shape = CostShape::from_parts(&wire.kind, &wire.params).map_err(serde::de::Error::custom)?;
        Ok(if wire.additive { CostModel::AdditivePerArea(shape) } else { CostModel::CoupledTotal(shape) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn shapes() -> Vec<CostShape> {
        vec![
            CostShape::Linear { a: 0.7 },
            CostShape::Quadratic { a: 1.3, q: 0.1 },
            CostShape::Quadratic { a: 0.2, q: 0.0 },
            CostShape::Exponential { a: 0.5, k: 0.03 },
        ]
    }

    #[test]
    fn convexity_probe_on_log_grid() {
        for shape in shapes() {
            shape.check().unwrap();
            for i in 0..=240 {
                let b = 10f64.powf(-6.0 + 12.0 * i as f64 / 240.0);
                assert!(shape.derivative(b) > 0.0, "{shape:?} at {b}");
                assert!(shape.second_derivative(b) >= 0.0, "{shape:?} at {b}");
            }
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        for shape in shapes() {
            for &b in &[0.5, 3.0, 17.0] {
                let h = 1e-5 * b;
                let fd = (shape.value(b + h) - shape.value(b - h)) / (2.0 * h);
                assert!((fd - shape.derivative(b)).abs() <= 1e-7 * shape.derivative(b).abs().max(1.0));
                let fd2 = (shape.derivative(b + h) - shape.derivative(b - h)) / (2.0 * h);
                assert!((fd2 - shape.second_derivative(b)).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn inverse_derivative_round_trips() {
        let q = CostShape::Quadratic { a: 1.0, q: 0.25 };
        assert!((q.derivative(q.inverse_derivative(3.0).unwrap()) - 3.0).abs() < 1e-12);
        let e = CostShape::Exponential { a: 0.5, k: 0.1 };
        assert!((e.derivative(e.inverse_derivative(2.0).unwrap()) - 2.0).abs() < 1e-12);
        assert_eq!(CostShape::Linear { a: 1.0 }.inverse_derivative(2.0), None);
    }

    #[test]
    fn rejects_non_increasing_shapes() {
        assert!(CostShape::Linear { a: 0.0 }.check().is_err());
        assert!(CostShape::Quadratic { a: 1.0, q: -0.1 }.check().is_err());
        assert!(CostShape::Exponential { a: 1.0, k: 0.0 }.check().is_err());
        assert!(CostShape::from_parts("cubic", &[1.0]).is_err());
        assert!(CostShape::from_parts("quadratic", &[1.0]).is_err());
    }
}
