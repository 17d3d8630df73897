//! Exact q-expansions: the independent verification channel.
//!
//! Expansions computed by the recurrence engine are confirmed here by
//! comparing honest q-series. E_k is built from divisor sums, Delta and j
//! from their defining rational formulas, and the zeta factors relating G_k
//! to E_k are realized as exact rationals through Bernoulli numbers (powers
//! of pi cancel because the weights match on both sides).

use num_traits::{One, Pow, Zero};
use serde::Serialize;

use crate::arith::{bernoulli, factorial, rat_int, Int, Rat};
use crate::error::{Error, Result};
use crate::expansion::{a_of, Expansion};

/// A truncated Laurent series in q with exact rational coefficients.
/// `coeffs[i]` is the coefficient of `q^(start + i)`; the series is valid
/// (all coefficients known) through `q^(start + coeffs.len() - 1)`, and
/// coefficients below `start` are exactly zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QSeries {
    start: i64,
    coeffs: Vec<Rat>,
}

impl QSeries {
    /// Build from a starting exponent and coefficient list (may be empty).
    pub fn new(start: i64, coeffs: Vec<Rat>) -> QSeries {
        QSeries { start, coeffs }
    }

    /// The constant series `value`, valid through `q^through`.
    pub fn constant(value: Rat, through: i64) -> QSeries {
        let mut coeffs = vec![Rat::zero(); (through + 1).max(0) as usize];
        if !coeffs.is_empty() {
            coeffs[0] = value;
        }
        QSeries { start: 0, coeffs }
    }

    pub fn one(through: i64) -> QSeries {
        Self::constant(Rat::one(), through)
    }

    pub fn start(&self) -> i64 {
        self.start
    }

    /// Largest exponent whose coefficient is known.
    pub fn valid_through(&self) -> i64 {
        self.start + self.coeffs.len() as i64 - 1
    }

    /// Coefficient of q^m: zero below the start, `None` beyond the valid
    /// range.
    pub fn coeff(&self, m: i64) -> Option<Rat> {
        if m < self.start {
            return Some(Rat::zero());
        }
        self.coeffs.get((m - self.start) as usize).cloned()
    }

    /// Drop leading stored zeros (adjusting the start); used before division.
    fn trimmed(&self) -> QSeries {
        let lead = self.coeffs.iter().position(|c| !c.is_zero());
        match lead {
            Some(i) => QSeries {
                start: self.start + i as i64,
                coeffs: self.coeffs[i..].to_vec(),
            },
            None => QSeries { start: self.valid_through() + 1, coeffs: vec![] },
        }
    }

    /// True when every known coefficient is zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// First exponent with a nonzero known coefficient.
    pub fn first_nonzero(&self) -> Option<i64> {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map(|i| self.start + i as i64)
    }

    pub fn scale(&self, r: &Rat) -> QSeries {
        QSeries { start: self.start, coeffs: self.coeffs.iter().map(|c| c * r).collect() }
    }

    pub fn add(&self, other: &QSeries) -> QSeries {
        let start = self.start.min(other.start);
        let through = self.valid_through().min(other.valid_through());
        let len = (through - start + 1).max(0) as usize;
        let mut coeffs = vec![Rat::zero(); len];
        for (i, c) in coeffs.iter_mut().enumerate() {
            let m = start + i as i64;
            *c = self.coeff(m).unwrap() + other.coeff(m).unwrap();
        }
        QSeries { start, coeffs }
    }

    pub fn sub(&self, other: &QSeries) -> QSeries {
        self.add(&other.scale(&-Rat::one()))
    }

    /// Product; valid through `min(v1 + s2, v2 + s1)`.
    pub fn mul(&self, other: &QSeries) -> QSeries {
        let start = self.start + other.start;
        let through = (self.valid_through() + other.start).min(other.valid_through() + self.start);
        let len = (through - start + 1).max(0) as usize;
        let mut coeffs = vec![Rat::zero(); len];
        for (i, c1) in self.coeffs.iter().enumerate() {
            if c1.is_zero() || i >= len {
                continue;
            }
            for (j, c2) in other.coeffs.iter().enumerate() {
                if i + j >= len {
                    break;
                }
                if !c2.is_zero() {
                    coeffs[i + j] += c1 * c2;
                }
            }
        }
        QSeries { start, coeffs }
    }

    /// Integer power by repeated multiplication.
    pub fn pow(&self, e: u64) -> QSeries {
        let mut acc = QSeries::one(self.valid_through() - self.start);
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Series division by a divisor with a nonzero leading coefficient.
    pub fn div(&self, other: &QSeries) -> Result<QSeries> {
        let num = self.trimmed();
        let den = other.trimmed();
        if den.coeffs.is_empty() {
            return Err(Error::Domain("division by a zero series".into()));
        }
        let nn = num.coeffs.len() as i64 - 1;
        let nd = den.coeffs.len() as i64 - 1;
        // Special case 0 / den: zero series, valid as far as the inputs allow.
        if num.coeffs.is_empty() {
            let start = self.valid_through() + 1 - den.start;
            return Ok(QSeries { start, coeffs: vec![] });
        }
        let len = (nn.min(nd) + 1) as usize;
        let mut q = vec![Rat::zero(); len];
        let d0 = &den.coeffs[0];
        for m in 0..len {
            let mut acc = num.coeffs[m].clone();
            for i in 0..m {
                if !q[i].is_zero() && !den.coeffs[m - i].is_zero() {
                    acc -= &q[i] * &den.coeffs[m - i];
                }
            }
            q[m] = acc / d0;
        }
        Ok(QSeries { start: num.start - den.start, coeffs: q })
    }

    /// Truncate so the series is valid through `q^through` at most.
    pub fn truncated(&self, through: i64) -> QSeries {
        if through >= self.valid_through() {
            return self.clone();
        }
        let len = (through - self.start + 1).max(0) as usize;
        QSeries { start: self.start, coeffs: self.coeffs[..len].to_vec() }
    }

    /// Compare all coefficients from the smaller start through `through`
    /// (both series must be valid that far).
    pub fn eq_through(&self, other: &QSeries, through: i64) -> bool {
        debug_assert!(self.valid_through() >= through && other.valid_through() >= through);
        let start = self.start.min(other.start);
        (start..=through).all(|m| self.coeff(m) == other.coeff(m))
    }
}

/// Divisor power sum sigma_e(n) = sum of d^e over divisors d of n.
pub fn sigma(n: u64, e: u32) -> Int {
    let mut acc = Int::zero();
    for d in 1..=n {
        if n % d == 0 {
            acc += Int::from(d).pow(e);
        }
    }
    acc
}

/// q-expansion of the normalized Eisenstein series
/// `E_k = 1 - (2k / B_k) sum_{n>=1} sigma_{k-1}(n) q^n`, through `q^n_max`.
pub fn eisenstein_q(k: u64, n_max: u64) -> Result<QSeries> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::Domain(format!("eisenstein weight must be even >= 4, got {k}")));
    }
    let factor = -rat_int(Int::from(2 * k)) / bernoulli(k)?;
    let mut coeffs = Vec::with_capacity(n_max as usize + 1);
    coeffs.push(Rat::one());
    for n in 1..=n_max {
        coeffs.push(&factor * rat_int(sigma(n, k as u32 - 1)));
    }
    Ok(QSeries { start: 0, coeffs })
}

/// The discriminant Delta = (E_4^3 - E_6^2)/1728 (leading term q) and the
/// modular function j = E_4^3 / Delta (leading term q^-1), both valid
/// through `q^n_max`.
pub fn delta_j_q(n_max: u64) -> Result<(QSeries, QSeries)> {
    if n_max < 2 {
        return Err(Error::Domain(format!("delta/j need order >= 2, got {n_max}")));
    }
    let n = n_max + 2;
    let e4 = eisenstein_q(4, n)?;
    let e6 = eisenstein_q(6, n)?;
    let e4_cubed = e4.pow(3);
    let delta = e4_cubed.sub(&e6.pow(2)).scale(&Rat::new(Int::one(), Int::from(1728)));
    let j = e4_cubed.div(&delta)?;
    Ok((delta.truncated(n_max as i64), j.truncated(n_max as i64)))
}

/// The rational number 2 zeta(m) / pi^m for even m, via
/// `2 zeta(m) = -(2 pi i)^m B_m / m!` and `(2 pi i)^m = (-4)^{m/2} pi^m`:
/// the value is `-(-4)^{m/2} B_m / m!`.
pub fn zeta_ratio(m: u64) -> Result<Rat> {
    if m % 2 != 0 || m == 0 {
        return Err(Error::Domain(format!("zeta ratio needs positive even m, got {m}")));
    }
    let sign_pow = Rat::new(Int::from(-4), Int::one()).pow((m / 2) as i32);
    Ok(-sign_pow * bernoulli(m)? / rat_int(factorial(m)))
}

/// The rational number pi^k / zeta(k) = -2 k! / ((-4)^{k/2} B_k).
pub fn pi_pow_over_zeta(k: u64) -> Result<Rat> {
    Ok(rat_int(Int::from(2)) / zeta_ratio(k)?)
}

/// The E-normalized weight of the term at G_6-exponent b: multiplying the
/// G-coefficient by (2 zeta(4))^a (2 zeta(6))^b / (2 zeta(k)) turns the
/// G_4^a G_6^b expansion into an E_4^a E_6^b expansion of E_k, and all pi
/// powers cancel because 4a + 6b = k.
pub fn normalized_weight(k: u64, b: u64, w: &Rat) -> Result<Rat> {
    let a = a_of(k, b);
    let z4 = zeta_ratio(4)?;
    let z6 = zeta_ratio(6)?;
    let zk = zeta_ratio(k)?;
    Ok(w * z4.pow(a as i32) * z6.pow(b as i32) / zk)
}

/// Sum of the E-normalized weights; evaluating the expansion identity at the
/// cusp shows this is exactly 1 for every weight.
pub fn normalized_weight_sum(e: &Expansion) -> Result<Rat> {
    let mut acc = Rat::zero();
    for (b, w) in e.terms() {
        acc += normalized_weight(e.k(), b, w)?;
    }
    Ok(acc)
}

/// Default q-order for verification: the dimension scale of weight-k forms
/// plus margin.
pub fn default_verify_order(k: u64) -> u64 {
    k / 12 + 13
}

/// Outcome of one series verification.
#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub k: u64,
    /// q-order the comparison ran through.
    pub order: u64,
    pub ok: bool,
    /// First q-power whose coefficients differ, when not ok.
    pub first_mismatch: Option<i64>,
}

/// Verify an expansion against honest q-series: check that
/// `E_k = sum_b nw_b E_4^a E_6^b` through `q^order`, where `nw_b` is the
/// E-normalized weight. Failure is reported, not raised.
pub fn verify_expansion(e: &Expansion, order: u64) -> Result<VerifyReport> {
    let k = e.k();
    if order < k / 12 + 2 {
        return Err(Error::Domain(format!(
            "verification of weight {k} needs order >= {}, got {order}",
            k / 12 + 2
        )));
    }
    let n = order as i64;
    let lhs = eisenstein_q(k, order)?;
    let e4 = eisenstein_q(4, order)?;
    let e6 = eisenstein_q(6, order)?;

    // Across the slots, b ascends by 2 while a descends by 3; build both
    // power ladders once so each term costs a single multiplication.
    let slots: Vec<(u64, &Rat)> = e.terms().collect();
    let b_min = slots.first().expect("at least one slot").0;
    let a_min = a_of(k, slots.last().expect("at least one slot").0);
    let e4_cubed = e4.pow(3);
    let e6_squared = e6.pow(2);
    let mut pow4 = Vec::with_capacity(slots.len());
    pow4.push(e4.pow(a_min));
    let mut pow6 = Vec::with_capacity(slots.len());
    pow6.push(e6.pow(b_min));
    for i in 1..slots.len() {
        pow4.push(pow4[i - 1].mul(&e4_cubed));
        pow6.push(pow6[i - 1].mul(&e6_squared));
    }

    let mut rhs = QSeries::constant(Rat::zero(), n);
    for (i, &(b, w)) in slots.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let term = pow4[slots.len() - 1 - i].mul(&pow6[i]).scale(&normalized_weight(k, b, w)?);
        rhs = rhs.add(&term);
    }

    let mut first_mismatch = None;
    for m in 0..=n {
        if lhs.coeff(m) != rhs.coeff(m) {
            first_mismatch = Some(m);
            break;
        }
    }
    Ok(VerifyReport { k, order, ok: first_mismatch.is_none(), first_mismatch })
}
