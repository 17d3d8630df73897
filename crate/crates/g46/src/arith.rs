//! Arbitrary-precision integer/rational substrate with the combinatorial
//! helpers used throughout the crate: binomials, multinomials, factorials,
//! Bernoulli numbers, and 2-adic valuations.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Mutex;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision integer.
pub type Int = BigInt;

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator (the `Ratio` constructors maintain both).
pub type Rat = BigRational;

/// Build a rational from machine integers.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(Int::from(num), Int::from(den))
}

/// Build an integer rational.
pub fn rat_int(num: Int) -> Rat {
    Rat::from_integer(num)
}

/// A 2-adic valuation: either a finite integer or the +infinity sentinel
/// assigned to zero. The derived ordering places `Infinite` above every
/// finite value, which is exactly what minimum-valuation scans need.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum V2 {
    Finite(i64),
    Infinite,
}

impl V2 {
    /// The finite value, if any.
    pub fn finite(self) -> Option<i64> {
        match self {
            V2::Finite(v) => Some(v),
            V2::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, V2::Finite(_))
    }
}

impl fmt::Display for V2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            V2::Finite(v) => write!(f, "{v}"),
            V2::Infinite => write!(f, "inf"),
        }
    }
}

impl serde::Serialize for V2 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            V2::Finite(v) => s.serialize_i64(*v),
            V2::Infinite => s.serialize_str("inf"),
        }
    }
}

impl PartialEq<i64> for V2 {
    fn eq(&self, other: &i64) -> bool {
        matches!(self, V2::Finite(v) if v == other)
    }
}

impl PartialOrd<i64> for V2 {
    fn partial_cmp(&self, other: &i64) -> Option<Ordering> {
        match self {
            V2::Finite(v) => v.partial_cmp(other),
            V2::Infinite => Some(Ordering::Greater),
        }
    }
}

/// 2-adic valuation of an integer; zero maps to the sentinel.
pub fn v2_int(n: &Int) -> V2 {
    match n.trailing_zeros() {
        Some(t) => V2::Finite(t as i64),
        None => V2::Infinite,
    }
}

/// 2-adic valuation of a rational: v_2(num) - v_2(den), with v_2(0) = +inf.
pub fn v2_rat(q: &Rat) -> V2 {
    match (n_tz(q.numer()), n_tz(q.denom())) {
        (Some(n), Some(d)) => V2::Finite(n - d),
        _ => V2::Infinite,
    }
}

fn n_tz(n: &Int) -> Option<i64> {
    n.trailing_zeros().map(|t| t as i64)
}

/// Binomial coefficient C(n, r), by the multiplicative product rather than
/// factorial quotients so intermediate values stay small. Out-of-range `r`
/// (negative or above `n`) yields 0: the recurrence coefficients rely on
/// degenerate binomials vanishing.
pub fn binomial(n: u64, r: i64) -> Int {
    if r < 0 || (r as u64) > n {
        return Int::zero();
    }
    let r = (r as u64).min(n - r as u64);
    let mut acc = Int::one();
    for i in 1..=r {
        acc = acc * Int::from(n - r + i) / Int::from(i);
    }
    acc
}

/// Multinomial coefficient n! / (parts[0]! parts[1]! ...). The parts must sum
/// to `n` exactly.
pub fn multinomial(n: u64, parts: &[u64]) -> Result<Int> {
    let total: u64 = parts.iter().sum();
    if total != n {
        return Err(Error::Domain(format!(
            "multinomial parts sum to {total}, expected {n}"
        )));
    }
    let mut acc = Int::one();
    let mut left = n;
    for &p in parts {
        acc *= binomial(left, p as i64);
        left -= p;
    }
    Ok(acc)
}

/// n! as a big integer.
pub fn factorial(n: u64) -> Int {
    let mut acc = Int::one();
    for i in 2..=n {
        acc *= Int::from(i);
    }
    acc
}

/// Bernoulli number B_k for even k (B_0 = 1, B_2 = 1/6, ...). Odd indices are
/// rejected; internally the table holds every index so the defining
/// recurrence sum(j=0..m) C(m+1,j) B_j = 0 can be evaluated directly. The
/// table is compute-once: it only ever grows, and finished entries are
/// immutable.
pub fn bernoulli(k: u64) -> Result<Rat> {
    if k % 2 != 0 {
        return Err(Error::Domain(format!("bernoulli index must be even, got {k}")));
    }
    static TABLE: OnceLock<Mutex<Vec<Rat>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| Mutex::new(vec![Rat::one()]));
    let mut tab = table.lock().expect("bernoulli table poisoned");
    while tab.len() <= k as usize {
        let m = tab.len() as u64;
        if m == 1 {
            tab.push(rat(-1, 2));
            continue;
        }
        if m % 2 == 1 {
            tab.push(Rat::zero());
            continue;
        }
        // B_m = -1/(m+1) * sum_{j<m} C(m+1, j) B_j, with C updated in place.
        let mut c = Int::one();
        let mut acc = Rat::zero();
        for j in 0..m {
            if !tab[j as usize].is_zero() {
                acc += rat_int(c.clone()) * &tab[j as usize];
            }
            c = c * Int::from(m + 1 - j) / Int::from(j + 1);
        }
        let b = -acc / rat_int(Int::from(m + 1));
        tab.push(b);
    }
    Ok(tab[k as usize].clone())
}

/// Render a rational as `num/den`, always including the denominator
/// (so `1` prints as `1/1`). This is the canonical form used by every text
/// format in the crate.
pub fn rat_str(q: &Rat) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Parse the `num/den` form produced by [`rat_str`]; a bare integer is also
/// accepted. The result is normalized (lowest terms, positive denominator).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let bad = || Error::Format(format!("malformed rational {s:?}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: Int = num.parse().map_err(|_| bad())?;
    let den: Int = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(num, den))
}

/// True if the rational is positive.
pub fn is_positive(q: &Rat) -> bool {
    q.numer().is_positive()
}
