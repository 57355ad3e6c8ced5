//! Exact computation of rationalized Gottlieb groups, evaluation subgroups of
//! fibre inclusions, Gottlieb homology and holonomy representations for
//! fibrations presented by finitely generated Koszul-Sullivan models.
//!
//! All arithmetic is exact over the rationals; there is no floating point
//! anywhere in this crate.
//!
//! Module map:
//! * [`linalg`] — dense exact-rational matrices, kernels, images, quotients.
//! * [`algebra`] — free graded-commutative DG algebras over Q with Koszul
//!   signs, Leibniz differentials, degreewise bases and cohomology.
//! * [`derivation`] — the chain complex `Der_*(A, B; phi)` of twisted
//!   derivations, its homology and the evaluation-subgroup machinery.
//! * [`fibration`] — Koszul-Sullivan models, twisting-derivation extraction,
//!   the classifying-map invariant, the rationalized Gottlieb sequence and
//!   the holonomy representation.
//! * [`corpus`] — seeded random generation of valid KS models for
//!   property-style cross checks.

pub mod algebra;
pub mod corpus;
pub mod derivation;
pub mod fibration;
pub mod linalg;

/// Exact rational scalar used throughout: arbitrary-precision numerator and
/// denominator, always normalized to lowest terms.
pub type Rat = num::BigRational;

/// Shorthand for building a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    assert!(den != 0, "zero denominator");
    Rat::new(num.into(), den.into())
}

/// The integer `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// Canonical "p/q" rendering used by machine reports; the denominator is
/// always present so the field is never mistaken for a float.
pub fn rat_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::Zero;

    #[test]
    fn rationals_are_reduced() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(rat(-3, -6), rat(1, 2));
        assert!((rat(1, 3) + rat(2, 3) - rat_int(1)).is_zero());
    }
}
