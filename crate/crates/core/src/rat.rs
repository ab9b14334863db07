//! Exact rational coefficients.

use num::bigint::BigInt;
use num::rational::BigRational;
use num::One;

/// Arbitrary-precision rational number, the coefficient field everywhere.
///
/// `num` keeps values in lowest terms with a positive denominator, which is
/// exactly the canonical form structural equality relies on.
pub type Rat = BigRational;

/// `n` as a rational.
pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `p/q` as a rational. Panics if `q == 0`.
pub fn rat(p: i64, q: i64) -> Rat {
    Rat::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p"` or `"p/q"`.
pub fn parse_rat(s: &str) -> Option<Rat> {
    s.trim().parse::<Rat>().ok()
}

/// Canonical `"p"` / `"p/q"` string, the form used in all JSON output.
pub fn format_rat(r: &Rat) -> String {
    r.to_string()
}

/// True if `r` has denominator 1.
pub fn is_integer(r: &Rat) -> bool {
    r.denom().is_one()
}

/// Integer value of `r`, if it is an integer that fits in `i64`.
pub fn as_i64(r: &Rat) -> Option<i64> {
    use num::ToPrimitive;
    if is_integer(r) {
        r.numer().to_i64()
    } else {
        None
    }
}
