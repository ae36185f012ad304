//! Polynomial matrix-coefficient fields and exact left-invariant derivatives.

mod poly;

pub use poly::{apply_field, generator_values, var_index, Derivation, Monomial, PolyField};

use crate::error::{Error, Result};
use crate::lie::group::{exp, identity};
use crate::lie::{AlgebraElement, Frame, GroupElement};

/// `(X_1 u, …, X_{2n} u)` over the horizontal fields.
pub fn horizontal_gradient(u: &PolyField, frame: &Frame) -> Result<Vec<PolyField>> {
    frame.horizontal().iter().map(|x| apply_field(x, u)).collect()
}

/// Horizontal components followed by the ε-scaled vertical ones.
pub fn full_gradient_eps(u: &PolyField, frame: &Frame) -> Result<Vec<PolyField>> {
    frame.fields().iter().map(|x| apply_field(x, u)).collect()
}

/// Exact derivative against a symmetric flow difference at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowCheck {
    pub exact: f64,
    pub finite_difference: f64,
    pub error: f64,
}

pub fn flow_derivative_check(
    x: &AlgebraElement,
    u: &PolyField,
    g: &GroupElement,
    h: f64,
) -> Result<FlowCheck> {
    if !(h > 0.0) {
        return Err(Error::OutOfRange(format!("step {h} must be positive")));
    }
    let exact = apply_field(x, u)?.evaluate(g)?;
    let plus = g * exp(&x.scale(h));
    let minus = g * exp(&x.scale(-h));
    let fd = (u.evaluate_unchecked(&plus) - u.evaluate_unchecked(&minus)) / (2.0 * h);
    Ok(FlowCheck { exact, finite_difference: fd, error: (exact - fd).abs() })
}

/// Sum of squares of the components, as a field.
pub fn squared_norm(components: &[PolyField]) -> PolyField {
    let n = components.first().map(|c| c.n()).unwrap_or(0);
    components
        .iter()
        .fold(PolyField::zero(n, 0), |acc, c| acc.add(&c.mul(c)))
}

/// Evaluate every component at `g`.
pub fn evaluate_all(components: &[PolyField], g: &GroupElement) -> Result<Vec<f64>> {
    components.iter().map(|c| c.evaluate(g)).collect()
}

/// Convenience: evaluate at the identity.
pub fn at_identity(u: &PolyField) -> f64 {
    u.evaluate_unchecked(&identity(u.n()))
}
