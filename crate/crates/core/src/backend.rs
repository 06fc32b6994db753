//! The evaluation interface every diagram backend implements.
//!
//! A backend knows a fixed family of `n` variables, assigns each joint
//! variable a value in an abelian group, and knows how the variables act on
//! that group by conditioning. The diagram machinery in [`crate::diagram`]
//! only ever talks to a backend through this trait, so it works identically
//! for floating-point functionals (entropy, divergences) and for exact
//! finite algebraic models.

use crate::error::Error;
use crate::subset::VarSubset;

/// Default absolute and relative tolerance for floating-point zero tests.
pub const DEFAULT_TOLERANCE: Tolerance = Tolerance { abs: 1e-9, rel: 1e-9 };

/// Zero-test tolerance for real-valued backends.
///
/// A value `v` counts as zero when `|v| <= abs + rel * scale`, where `scale`
/// is the largest atom magnitude in the diagram being examined (at least 1).
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn is_zero(self, value: f64, scale: f64) -> bool {
        value.abs() <= self.abs + self.rel * scale.max(1.0)
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        DEFAULT_TOLERANCE
    }
}

/// A family of variables together with a group-valued function on them and
/// the conditioning action of variables on values.
pub trait Backend: Sync {
    /// Group element type. Real-valued backends use `f64`; exact backends
    /// use their own element representation with exact equality.
    type Value: Clone + PartialEq + Send + Sync + std::fmt::Debug;

    /// Number of variables in the family.
    fn num_vars(&self) -> usize;

    fn zero(&self) -> Self::Value;

    fn add(&self, a: &Self::Value, b: &Self::Value) -> Self::Value;

    fn neg(&self, v: &Self::Value) -> Self::Value;

    /// The conditioned degree-one term: the value of the joint variable over
    /// `target`, acted on (conditioned) by the joint variable over `cond`.
    fn eval(&self, cond: VarSubset, target: VarSubset) -> Result<Self::Value, Error>;

    /// `|v|` when values embed in the reals; `None` for exact backends,
    /// which then use exact equality for zero tests.
    fn magnitude(&self, v: &Self::Value) -> Option<f64>;

    /// Zero test at a given diagram scale. Exact backends compare against
    /// the group identity; real backends apply their tolerance.
    fn is_zero(&self, v: &Self::Value, scale: f64) -> bool;

    /// Sums values in the iterator's order. Real-valued backends override
    /// this with compensated summation; order is always caller-fixed so
    /// results are reproducible.
    fn sum<'a, I>(&self, values: I) -> Self::Value
    where
        I: Iterator<Item = &'a Self::Value>,
        Self::Value: 'a,
    {
        values.fold(self.zero(), |acc, v| self.add(&acc, v))
    }
}

/// Kahan compensated summation (Neumaier variant, which also survives the
/// case where a later term exceeds the running sum), used by all `f64`
/// backends so that sums over many atoms stay reproducible and accurate.
pub fn kahan_sum<'a, I: Iterator<Item = &'a f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for &v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_uses_scale_floor_of_one() {
        let tol = Tolerance { abs: 1e-9, rel: 1e-9 };
        // scale below 1 is clamped to 1, so the threshold is 2e-9.
        assert!(tol.is_zero(1.5e-9, 0.0));
        assert!(!tol.is_zero(3.0e-9, 0.0));
        // larger scale widens the band.
        assert!(tol.is_zero(5.0e-9, 10.0));
    }

    #[test]
    fn kahan_recovers_cancelled_terms() {
        // Naive summation of these loses the small term entirely.
        let vals = [1e16, 1.0, -1e16];
        assert_eq!(kahan_sum(vals.iter()), 1.0);
    }
}
