use serde::Serialize;

use crate::model::{ModelInstance, Sense, VarKind};

pub const VERIFY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Row name, or variable name for bound and integrality violations.
    pub name: String,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub feasible: bool,
    pub objective: f64,
    pub violations: Vec<Violation>,
}

/// Checks every row, bound, and integrality requirement of `model` at `x`,
/// independently of whichever backend produced it.
pub fn verify(model: &ModelInstance, x: &[f64]) -> VerificationReport {
    let mut violations = Vec::new();
    if x.len() != model.variables.len() {
        violations.push(Violation {
            name: "assignment length".into(),
            amount: (x.len() as f64 - model.variables.len() as f64).abs(),
        });
        return VerificationReport { feasible: false, objective: f64::NAN, violations };
    }
    for (v, &val) in model.variables.iter().zip(x) {
        if !val.is_finite() {
            violations.push(Violation { name: v.name.clone(), amount: f64::INFINITY });
            continue;
        }
        let out = (v.lower - val).max(val - v.upper);
        if out > VERIFY_TOLERANCE {
            violations.push(Violation { name: v.name.clone(), amount: out });
        }
        if v.kind == VarKind::Binary {
            let frac = (val - val.round()).abs();
            if frac > VERIFY_TOLERANCE {
                violations.push(Violation { name: v.name.clone(), amount: frac });
            }
        }
    }
    for c in &model.constraints {
        let a = c.activity(x);
        let amount = match c.sense {
            Sense::Le => a - c.rhs,
            Sense::Ge => c.rhs - a,
            Sense::Eq => (a - c.rhs).abs(),
        };
        if amount > VERIFY_TOLERANCE || amount.is_nan() {
            violations.push(Violation { name: c.name.clone(), amount });
        }
    }
    VerificationReport { feasible: violations.is_empty(), objective: model.objective_value(x), violations }
}
