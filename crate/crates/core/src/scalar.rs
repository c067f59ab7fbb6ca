//! Scalar abstraction over exact rational and floating-point arithmetic.
//!
//! The regret engine never cares which number type a prediction uses; it
//! only needs ordered arithmetic plus two type-specific facts: how to view
//! an exact rational in the prediction's type, and how wide the tie band
//! around a decision threshold is. Exact types have a zero-width tie band,
//! so `φ ≤ t` is literal; floats get a small tolerance so that solver
//! round-off at a boundary resolves the same way the exact tie rule does.

use std::fmt;

use num_traits::{Num, Signed, ToPrimitive};

use crate::Rat;

/// Number type usable as a prediction value.
pub trait Scalar:
    Clone + PartialOrd + Num + Signed + Send + Sync + fmt::Debug + fmt::Display + 'static
{
    /// View an exact rational in this type (exact where possible).
    fn from_rat(r: &Rat) -> Self;

    /// Half-width of the tie band used when comparing against a threshold.
    ///
    /// A comparison with `|φ - t|` inside the band counts as a tie and is
    /// reported as a boundary event; ties choose treatment A.
    fn tie_tolerance() -> Self;
}

impl Scalar for Rat {
    fn from_rat(r: &Rat) -> Self {
        r.clone()
    }

    fn tie_tolerance() -> Self {
        num_traits::Zero::zero()
    }
}

impl Scalar for f64 {
    fn from_rat(r: &Rat) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn tie_tolerance() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn from_rat(r: &Rat) -> Self {
        r.to_f32().unwrap_or(f32::NAN)
    }

    fn tie_tolerance() -> Self {
        1e-5
    }
}

/// Parse an exact rational written as `"p/q"` or as a plain integer.
///
/// Decimal numerals are rejected on purpose: `0.25` silently becomes an
/// approximation in most pipelines, and exactness at threshold boundaries
/// is load-bearing here. The error tells the caller to write `1/4`.
pub fn parse_rational(s: &str) -> crate::Result<Rat> {
    use num_bigint::BigInt;

    let trimmed = s.trim();
    let fail = |reason: &str| crate::Error::ParseRational {
        input: s.to_string(),
        reason: reason.to_string(),
    };
    if trimmed.is_empty() {
        return Err(fail("empty string"));
    }
    if trimmed.contains('.') {
        return Err(fail(
            "decimal literals are not exact; write a fraction such as \"1/4\"",
        ));
    }
    let mut parts = trimmed.splitn(2, '/');
    let num_str = parts.next().unwrap().trim();
    let num: BigInt = num_str
        .parse()
        .map_err(|_| fail("numerator is not an integer"))?;
    match parts.next() {
        None => Ok(Rat::from_integer(num)),
        Some(den_str) => {
            let den: BigInt = den_str
                .trim()
                .parse()
                .map_err(|_| fail("denominator is not an integer"))?;
            if den == BigInt::from(0) {
                return Err(fail("denominator is zero"));
            }
            Ok(Rat::new(num, den))
        }
    }
}
