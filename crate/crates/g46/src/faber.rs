//! Faber polynomials of modular forms and the combinations whose 2-adic
//! Newton polygons certify irreducibility.
//!
//! For a weight-k form f with k = 12D + k' (k' the least admissible
//! remainder weight), f / (Delta^D E_k') is a polynomial in j; its
//! coefficient vector is extracted here two independent ways: a closed
//! rational formula driven by the expansion coefficients of E_k (weights
//! divisible by 12), and literal q-series elimination against powers of j
//! (any weight). On top sit the certified families: the half-sum of
//! E_k^2 and E_2k, and integer combinations of powers of the closed-form
//! polynomials across a tower of weights.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Pow, Zero};

use crate::arith::{binomial, rat, rat_int, v2_rat, Int, Rat, V2};
use crate::error::{Error, Result};
use crate::expansion::Cache;
use crate::par;
use crate::qseries::{delta_j_q, eisenstein_q, pi_pow_over_zeta, QSeries};

/// A polynomial in j with exact rational coefficients, lowest degree first.
#[derive(Clone, Debug)]
pub struct FaberPolynomial {
    coeffs: Vec<Rat>,
    source: String,
}

impl FaberPolynomial {
    /// Build from coefficients (constant term first); trailing zeros are
    /// trimmed and the zero polynomial is rejected.
    pub fn new(mut coeffs: Vec<Rat>, source: impl Into<String>) -> Result<FaberPolynomial> {
        while coeffs.len() > 1 && coeffs.last().map(|c| c.is_zero()) == Some(true) {
            coeffs.pop();
        }
        if coeffs.is_empty() || (coeffs.len() == 1 && coeffs[0].is_zero()) {
            return Err(Error::Domain("the zero polynomial has no Faber data".into()));
        }
        Ok(FaberPolynomial { coeffs, source: source.into() })
    }

    pub fn degree(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn coeff(&self, r: usize) -> &Rat {
        &self.coeffs[r]
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last().map(|c| c.is_one()) == Some(true)
    }

    /// Divide by the leading coefficient; returns the monic polynomial and
    /// the divisor that was taken out.
    pub fn monic_normalized(self) -> (FaberPolynomial, Rat) {
        let lead = self.coeffs.last().expect("nonempty").clone();
        if lead.is_one() {
            return (self, Rat::one());
        }
        let coeffs = self.coeffs.iter().map(|c| c / &lead).collect();
        (FaberPolynomial { coeffs, source: self.source }, lead)
    }

    /// 2-adic valuation of each coefficient, constant term first.
    pub fn v2_profile(&self) -> Vec<V2> {
        self.coeffs.iter().map(v2_rat).collect()
    }
}

fn poly_mul(p: &[Rat], q: &[Rat]) -> Vec<Rat> {
    let mut out = vec![Rat::zero(); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        if a.is_zero() {
            continue;
        }
        for (j, b) in q.iter().enumerate() {
            if !b.is_zero() {
                out[i + j] += a * b;
            }
        }
    }
    out
}

fn poly_pow(p: &[Rat], e: u64) -> Vec<Rat> {
    let mut acc = vec![Rat::one()];
    for _ in 0..e {
        acc = poly_mul(&acc, p);
    }
    acc
}

/// Faber coefficients of E_k for k divisible by 12, by the closed rational
/// formula in the expansion coefficients W_{k,b}: with D = k/12,
///
/// ```text
/// t_r = (pi^k/zeta(k)) (-1)^(D-r)
///       sum_{A=0..r} W_{k,2(D-A)} 2^(8D-6r-2A-1)
///                    / (3^(3D+3r) 5^(2D+A) 7^(2D-2A)) C(D-A, D-r)
/// ```
///
/// for r < D, and t_D = 1. Results are memoized globally.
pub fn t_coeffs(cache: &Cache, k: u64, jobs: usize) -> Result<Arc<Vec<Rat>>> {
    if k == 0 || k % 12 != 0 {
        return Err(Error::Domain(format!(
            "closed-form Faber coefficients need 12 | k, got {k}"
        )));
    }
    static MEMO: OnceLock<Mutex<BTreeMap<u64, Arc<Vec<Rat>>>>> = OnceLock::new();
    let memo = MEMO.get_or_init(|| Mutex::new(BTreeMap::new()));
    if let Some(hit) = memo.lock().expect("t memo lock").get(&k) {
        return Ok(hit.clone());
    }

    let d = k / 12;
    let e = cache.expansion(k, jobs)?;
    let pz = pi_pow_over_zeta(k)?;
    let mut coeffs = par::map_collect(jobs, (0..d).collect::<Vec<_>>(), |r| {
        let mut acc = Rat::zero();
        for a in 0..=r {
            let w = e.get(2 * (d - a)).expect("valid slot");
            let num = Int::from(2).pow((8 * d - 6 * r - 2 * a - 1) as u32)
                * binomial(d - a, (d - r) as i64);
            let den = Int::from(3).pow((3 * d + 3 * r) as u32)
                * Int::from(5).pow((2 * d + a) as u32)
                * Int::from(7).pow((2 * d - 2 * a) as u32);
            acc += w * Rat::new(num, den);
        }
        let signed = if (d - r) % 2 == 0 { acc } else { -acc };
        signed * &pz
    });
    coeffs.push(Rat::one());

    let arc = Arc::new(coeffs);
    Ok(memo
        .lock()
        .expect("t memo lock")
        .entry(k)
        .or_insert(arc)
        .clone())
}

/// Split an even weight k >= 4 as 12D + k' with k' the least admissible
/// remainder weight (one of 0, 4, 6, 8, 10, 14).
pub fn weight_split(k: u64) -> Result<(u64, u64)> {
    if k < 4 || k % 2 != 0 {
        return Err(Error::Domain(format!("Faber weight must be even >= 4, got {k}")));
    }
    let kp = match k % 12 {
        0 => 0,
        2 => 14,
        r => r,
    };
    Ok(((k - kp) / 12, kp))
}

/// Faber polynomial of an arbitrary weight-k form given by its q-expansion,
/// by eliminating powers of j from f / (Delta^D E_k'). The input must carry
/// coefficients through q^(D+1) at least; a nonzero remainder after
/// elimination means f is not a weight-k form.
pub fn faber_general(f: &QSeries, k: u64, source: impl Into<String>) -> Result<FaberPolynomial> {
    let (d, kp) = weight_split(k)?;
    let need = d as i64 + 1;
    if f.valid_through() < need {
        return Err(Error::Domain(format!(
            "weight {k} elimination needs q-coefficients through q^{need}, have q^{}",
            f.valid_through()
        )));
    }
    let order = (f.valid_through() + d as i64 + 4) as u64;

    // Divisor Delta^D E_k' and the j powers, with enough working margin
    // that the input's validity is the only truncation bottleneck.
    let (delta, j) = delta_j_q(order)?;
    let mut den = delta.pow(d);
    if kp > 0 {
        den = den.mul(&eisenstein_q(kp, order)?);
    }
    let mut s = f.div(&den)?;

    let mut j_pows = Vec::with_capacity(d as usize + 1);
    j_pows.push(QSeries::one(order as i64));
    for m in 1..=d {
        j_pows.push(j_pows[m as usize - 1].mul(&j));
    }

    let mut coeffs = vec![Rat::zero(); d as usize + 1];
    for m in (0..=d as i64).rev() {
        let c = s
            .coeff(-m)
            .ok_or_else(|| Error::Domain("elimination ran out of coefficients".into()))?;
        if !c.is_zero() {
            s = s.sub(&j_pows[m as usize].scale(&c));
        }
        coeffs[m as usize] = c;
    }
    if let Some(power) = s.first_nonzero() {
        return Err(Error::NotAForm { weight: k, power });
    }
    FaberPolynomial::new(coeffs, source)
}

/// Faber polynomial of E_k: closed form when 12 | k, q-series elimination
/// otherwise.
pub fn ek_polynomial(cache: &Cache, k: u64, jobs: usize) -> Result<FaberPolynomial> {
    let source = format!("E_{k}");
    if k >= 12 && k % 12 == 0 {
        let t = t_coeffs(cache, k, jobs)?;
        FaberPolynomial::new(t.as_ref().clone(), source)
    } else {
        let (d, _) = weight_split(k)?;
        let f = eisenstein_q(k, d + 4)?;
        faber_general(&f, k, source)
    }
}

/// Faber polynomial of (E_k^2 + E_2k)/2 for k = 12D: degree 2D, monic, with
/// constant-term valuation 16D - 3.
pub fn faber_square_combo(cache: &Cache, k: u64, jobs: usize) -> Result<FaberPolynomial> {
    if k == 0 || k % 12 != 0 {
        return Err(Error::Domain(format!("square combination needs 12 | k, got {k}")));
    }
    let t = t_coeffs(cache, k, jobs)?;
    let t2 = t_coeffs(cache, 2 * k, jobs)?;
    let square = poly_mul(&t, &t);
    let half = rat(1, 2);
    let coeffs: Vec<Rat> = t2.iter().zip(square.iter()).map(|(a, b)| (a + b) * &half).collect();
    debug_assert!(coeffs.last().map(|c| c.is_one()) == Some(true));
    FaberPolynomial::new(coeffs, format!("(E_{k}^2 + E_{})/2", 2 * k))
}

/// An integer combination (1/M) sum_j m_j P_j^(N_j), where P_j is the
/// closed-form Faber polynomial at weight 2^(a_j) 12 D and N_j = 2^(l-a_j).
/// All terms have degree 2^l D, so the combination is monic of that degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComboSpec {
    /// Base degree D (a power of two).
    pub d: u64,
    /// Tower height l; the combination has degree 2^l D.
    pub ell: u32,
    /// Strictly increasing tower levels, each at most l.
    pub a: Vec<u32>,
    /// Integer multipliers, one per level.
    pub m: Vec<i64>,
}

impl ComboSpec {
    pub fn degree(&self) -> u64 {
        (1u64 << self.ell) * self.d
    }

    pub fn big_m(&self) -> i64 {
        self.m.iter().sum()
    }

    /// Multiplicity N_j = 2^(l - a_j) of the j-th term.
    pub fn n_exponent(&self, idx: usize) -> u64 {
        1u64 << (self.ell - self.a[idx])
    }

    /// Constant-term valuation predicted for a spec meeting the hypotheses:
    /// 8d - N_1 - 1 with d the total degree.
    pub fn predicted_h(&self) -> i64 {
        8 * self.degree() as i64 - self.n_exponent(0) as i64 - 1
    }

    /// Structural requirements; a failure here cannot be forced through.
    pub fn validate_structure(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Domain(msg));
        if self.d == 0 || !self.d.is_power_of_two() {
            return fail(format!("base degree D must be a power of two, got {}", self.d));
        }
        if self.ell > 16 || self.d > (1 << 16) {
            return fail("combination degree too large".into());
        }
        if self.a.is_empty() {
            return fail("at least one tower level is required".into());
        }
        if !self.a.windows(2).all(|w| w[0] < w[1]) {
            return fail(format!("tower levels must be strictly increasing, got {:?}", self.a));
        }
        if *self.a.last().unwrap() > self.ell {
            return fail(format!(
                "tower levels must stay within l = {}, got {:?}",
                self.ell, self.a
            ));
        }
        if self.m.len() != self.a.len() {
            return fail(format!(
                "need one multiplier per level: {} levels, {} multipliers",
                self.a.len(),
                self.m.len()
            ));
        }
        if self.big_m() == 0 {
            return fail("multipliers sum to zero; the combination cannot be normalized".into());
        }
        Ok(())
    }

    /// The arithmetic hypotheses behind the valuation prediction: the first
    /// multiplier is odd and half the multiplier sum is an odd integer.
    pub fn validate_hypotheses(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Hypothesis(msg));
        if self.m[0] % 2 == 0 {
            return fail(format!("first multiplier must be odd, got {}", self.m[0]));
        }
        let m = self.big_m();
        if m % 2 != 0 {
            return fail(format!("multiplier sum must be even, got {m}"));
        }
        if (m / 2) % 2 == 0 {
            return fail(format!("half the multiplier sum must be odd, got {}", m / 2));
        }
        Ok(())
    }
}

/// Build the combination polynomial. Hypothesis violations abort unless
/// `force` is set; structural violations always abort.
pub fn faber_combo(
    cache: &Cache,
    spec: &ComboSpec,
    force: bool,
    jobs: usize,
) -> Result<FaberPolynomial> {
    spec.validate_structure()?;
    if let Err(e) = spec.validate_hypotheses() {
        if !force {
            return Err(e);
        }
    }
    let degree = spec.degree() as usize;
    let mut acc = vec![Rat::zero(); degree + 1];
    for (idx, &level) in spec.a.iter().enumerate() {
        let kj = (1u64 << level) * 12 * spec.d;
        let t = t_coeffs(cache, kj, jobs)?;
        let p = poly_pow(&t, spec.n_exponent(idx));
        debug_assert_eq!(p.len(), degree + 1);
        let mult = rat(spec.m[idx], 1);
        for (slot, c) in acc.iter_mut().zip(p.into_iter()) {
            *slot += c * &mult;
        }
    }
    let m = rat_int(Int::from(spec.big_m()));
    let coeffs: Vec<Rat> = acc.into_iter().map(|c| c / &m).collect();
    debug_assert!(coeffs.last().map(|c| c.is_one()) == Some(true));
    FaberPolynomial::new(
        coeffs,
        format!("combo D={} l={} a={:?} m={:?}", spec.d, spec.ell, spec.a, spec.m),
    )
}
