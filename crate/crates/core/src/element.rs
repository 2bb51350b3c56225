//! Element abstractions shared by the evaluators and the recursion.

use std::fmt::Debug;

use crate::dyadic::Dyadic;

/// An additive group with exact power-of-two scaling.
///
/// Scalars, matrices and collections of matrices all implement it, so one
/// straight-line-program interpreter drives every level of a recursion.
pub trait Linear: Clone {
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale_pow2(&self, e: i64) -> Self;
}

/// Scalar element type of a matrix product (64-bit floats or exact dyadics).
pub trait Element: Linear + PartialEq + Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn mul(&self, other: &Self) -> Self;
    /// Multiplication by a scheme coefficient.
    fn mul_coeff(&self, c: &Dyadic) -> Self;
    /// `self += a * b`, without fused rounding.
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self = self.add(&a.mul(b));
    }
}

impl Linear for f64 {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale_pow2(&self, e: i64) -> Self {
        let e = e.clamp(-2000, 2000) as i32;
        if (-1022..=1023).contains(&e) {
            self * crate::dyadic::pow2_f64(e)
        } else {
            // two steps keep the intermediate in range
            let h = e / 2;
            self * crate::dyadic::pow2_f64(h) * crate::dyadic::pow2_f64(e - h)
        }
    }
}

impl Element for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_coeff(&self, c: &Dyadic) -> Self {
        match c.as_signed_power_of_two() {
            Some((neg, e)) => {
                let v = self.scale_pow2(e);
                if neg {
                    -v
                } else {
                    v
                }
            }
            None => self * c.to_f64_rounded(),
        }
    }
    #[inline]
    fn mul_add_assign(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
}

impl Linear for Dyadic {
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale_pow2(&self, e: i64) -> Self {
        self.shift(e)
    }
}

impl Element for Dyadic {
    fn zero() -> Self {
        Dyadic::zero()
    }
    fn one() -> Self {
        Dyadic::one()
    }
    fn is_zero(&self) -> bool {
        Dyadic::is_zero(self)
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn mul_coeff(&self, c: &Dyadic) -> Self {
        self * c
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_scaling_is_exact() {
        assert_eq!(3.0f64.scale_pow2(-3), 0.375);
        assert_eq!(1.0f64.scale_pow2(-1074), 5e-324);
        assert_eq!(1.0f64.scale_pow2(-1060).scale_pow2(1060), 1.0);
        assert_eq!(1.0f64.scale_pow2(1023), 2f64.powi(1023));
        assert_eq!(5.0f64.mul_coeff(&Dyadic::normalize(-1, -3)), -0.625);
        assert_eq!(5.0f64.mul_coeff(&Dyadic::from(3)), 15.0);
    }
}
