//! Binary digit sums, carry counts, and the per-weight valuation targets
//! lambda(k) / mu(k) that drive the analysis scanners.

use serde::Serialize;

use crate::error::{Error, Result};

/// s(n): number of ones in the binary expansion of n.
pub fn digit_sum(n: u64) -> u32 {
    n.count_ones()
}

/// Number of carries when adding x and y in binary. Kummer's identity gives
/// carry_count(x, y) = s(x) + s(y) - s(x+y) = v_2(C(x+y, x)).
pub fn carry_count(x: u64, y: u64) -> u32 {
    digit_sum(x) + digit_sum(y) - digit_sum(x + y)
}

/// Exact power-of-two test by bit arithmetic.
pub fn is_power_of_two(n: u64) -> bool {
    n != 0 && n & (n - 1) == 0
}

/// Per-weight summary of the dyadic data controlling the coefficient
/// valuations of the weight-k expansion:
/// - `lambda` is the predicted minimum valuation: 0 when k is a power of
///   two, s(k) - 2 otherwise;
/// - `mu` is the G_6-exponent at which the witness level occurs: 0 when k is
///   a power of two, 2^(v2-1) otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ValuationProfile {
    pub k: u64,
    pub s: u32,
    pub v2: u32,
    pub lambda: u32,
    pub mu: u64,
}

/// Compute the profile for an even weight k >= 4.
pub fn profile(k: u64) -> Result<ValuationProfile> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::Domain(format!("profile requires even k >= 4, got {k}")));
    }
    let s = digit_sum(k);
    let v2 = k.trailing_zeros();
    let (lambda, mu) = if is_power_of_two(k) {
        (0, 0)
    } else {
        (s - 2, 1u64 << (v2 - 1))
    };
    Ok(ValuationProfile { k, s, v2, lambda, mu })
}
