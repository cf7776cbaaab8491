//! Shared numeric tolerances for state and payoff comparisons.
//!
//! All equality checks on states and payoffs use a relative tolerance with an
//! absolute floor, sized for double-precision closed forms.

/// Relative tolerance for state/payoff equality.
pub const REL_TOL: f64 = 1e-9;

/// Absolute floor below which differences are always considered zero.
pub const ABS_FLOOR: f64 = 1e-12;

/// Tolerance for a comparison at the given magnitude scale.
#[inline]
pub fn tol(scale: f64) -> f64 {
    ABS_FLOOR.max(REL_TOL * scale.abs())
}

/// True if `a` and `b` agree within `REL_TOL` at scale `max(1, |a|, |b|)`.
#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= tol(1f64.max(a.abs()).max(b.abs()))
}

/// True if `a` and `b` agree within `REL_TOL` at an explicit scale.
#[inline]
pub fn approx_eq_scaled(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= tol(1f64.max(scale.abs()))
}
