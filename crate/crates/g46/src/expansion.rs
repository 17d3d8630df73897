//! The expansion engine.
//!
//! Every even weight k >= 4 has a unique expansion
//! `G_k = sum over (a,b) with 4a + 6b = k of w(a,k) G_4^a G_6^b`,
//! and the coefficients are computed here by lacunary recurrences that
//! express G_k through products of two strictly lower-weight series:
//!
//! - the classical convolution recurrence, valid for every even k >= 8;
//! - a sparse identity for k = 6n + 2 with symmetric coefficients c_j;
//! - a sparse identity for k = 6n with coefficients (a_j + b_j);
//! - a sparse identity for k = 6n + 4 with an integer left factor L.
//!
//! Coefficients are indexed by the G_6-exponent b (so `terms[b]` is the
//! W_{k,b} of the valuation analysis); a = (k - 6b)/4 recovers the
//! G_4-exponent. All coefficient formulas are built from binomial products,
//! never raw factorials, to keep intermediate sizes bounded.

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{binomial, Int, Rat};
use crate::error::{Error, Result};
use crate::par;

/// Which construction produced an expansion (advisory metadata: all routes
/// agree on the values).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// Generator weights 4 and 6.
    Base,
    /// Classical convolution recurrence.
    Classical,
    /// Sparse route for k = 6n + 2.
    Romik,
    /// Sparse route for k = 6n.
    Mr0,
    /// Sparse route for k = 6n + 4.
    Mr4,
    /// Product of two expansions.
    Product,
    /// Parsed from a cache file.
    Loaded,
}

/// Route selector for [`expand`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Auto,
    Classical,
    Romik,
    Mr0,
    Mr4,
}

impl Method {
    /// Parse the CLI spelling.
    pub fn parse(s: &str) -> Result<Method> {
        Ok(match s {
            "auto" => Method::Auto,
            "classical" => Method::Classical,
            "romik" => Method::Romik,
            "mr0" => Method::Mr0,
            "mr4" => Method::Mr4,
            other => return Err(Error::Domain(format!("unknown method {other:?}"))),
        })
    }
}

/// The coefficient vector of one weight, stored densely over the valid
/// G_6-exponents (which share one parity and step by 2).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expansion {
    k: u64,
    b_start: u64,
    coeffs: Vec<Rat>,
    route: Route,
}

/// Smallest valid G_6-exponent of weight k: 0 when 4 | k, else 1.
pub fn b_start_of(k: u64) -> u64 {
    if k % 4 == 0 {
        0
    } else {
        1
    }
}

/// Number of valid G_6-exponents of weight k.
pub fn slot_count(k: u64) -> usize {
    let s = b_start_of(k);
    if k / 6 < s {
        0
    } else {
        ((k / 6 - s) / 2 + 1) as usize
    }
}

/// G_4-exponent paired with G_6-exponent b at weight k.
pub fn a_of(k: u64, b: u64) -> u64 {
    debug_assert!(6 * b <= k && (k - 6 * b) % 4 == 0);
    (k - 6 * b) / 4
}

impl Expansion {
    fn check_weight(k: u64) -> Result<()> {
        if k < 4 || k % 2 != 0 {
            return Err(Error::Domain(format!("weight must be even and >= 4, got {k}")));
        }
        Ok(())
    }

    /// The generator expansion of weight 4: {b=0 -> 1}.
    pub fn base4() -> Expansion {
        Expansion { k: 4, b_start: 0, coeffs: vec![Rat::one()], route: Route::Base }
    }

    /// The generator expansion of weight 6: {b=1 -> 1}.
    pub fn base6() -> Expansion {
        Expansion { k: 6, b_start: 1, coeffs: vec![Rat::one()], route: Route::Base }
    }

    /// Build from explicit (b, coefficient) terms; every b must be a valid
    /// slot of weight k and appear at most once. Missing valid slots are
    /// filled with zero.
    pub fn from_terms(k: u64, terms: &[(u64, Rat)], route: Route) -> Result<Expansion> {
        Self::check_weight(k)?;
        let b0 = b_start_of(k);
        let mut coeffs = vec![Rat::zero(); slot_count(k)];
        let mut seen = vec![false; coeffs.len()];
        for (b, w) in terms {
            if 6 * b > k || (k - 6 * b) % 4 != 0 {
                return Err(Error::Domain(format!("b={b} is not a valid slot of weight {k}")));
            }
            let i = ((b - b0) / 2) as usize;
            if seen[i] {
                return Err(Error::Domain(format!("duplicate slot b={b} at weight {k}")));
            }
            seen[i] = true;
            coeffs[i] = w.clone();
        }
        Ok(Expansion { k, b_start: b0, coeffs, route })
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn route(&self) -> Route {
        self.route
    }

    /// Coefficient at G_6-exponent b, if b is one of the stored slots.
    pub fn get(&self, b: u64) -> Option<&Rat> {
        if b < self.b_start || (b - self.b_start) % 2 != 0 {
            return None;
        }
        self.coeffs.get(((b - self.b_start) / 2) as usize)
    }

    /// Iterate stored (b, coefficient) pairs, b ascending.
    pub fn terms(&self) -> impl Iterator<Item = (u64, &Rat)> {
        let b0 = self.b_start;
        self.coeffs.iter().enumerate().map(move |(i, w)| (b0 + 2 * i as u64, w))
    }

    /// Number of stored slots.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Graded product: weight adds, and the coefficient at b is the
    /// convolution sum over b1 + b2 = b. The result stores exactly the
    /// convolution support of the two factors.
    pub fn mul(&self, other: &Expansion) -> Expansion {
        let mut coeffs = vec![Rat::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, c1) in self.coeffs.iter().enumerate() {
            if c1.is_zero() {
                continue;
            }
            for (j, c2) in other.coeffs.iter().enumerate() {
                if !c2.is_zero() {
                    coeffs[i + j] += c1 * c2;
                }
            }
        }
        Expansion {
            k: self.k + other.k,
            b_start: self.b_start + other.b_start,
            coeffs,
            route: Route::Product,
        }
    }
}

/// Integer form of a cached expansion: numerators over one common
/// denominator. Products of two expansions then run on plain big integers
/// (no per-term gcd), which dominates the cost of large fills.
struct IntView {
    b_start: u64,
    nums: Vec<Int>,
    den: Int,
}

impl IntView {
    fn of(e: &Expansion) -> IntView {
        let mut den = Int::one();
        for c in &e.coeffs {
            den = den.lcm(c.denom());
        }
        let nums = e.coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        IntView { b_start: e.b_start, nums, den }
    }
}

/// One j-term of a sparse route: coefficient times the product of the two
/// cached lower-weight expansions.
struct Piece {
    coeff: Rat,
    w1: u64,
    w2: u64,
}

fn assemble(cache: &Cache, k: u64, pieces: Vec<Piece>, route: Route, jobs: usize) -> Result<Expansion> {
    // Each piece reads only cached lower weights (through their memoized
    // integer views), so pieces are independent and map in parallel; the
    // pure-integer partial sums are then merged over one global denominator
    // and reduced to rationals once per output slot.
    let b0 = b_start_of(k);
    let n_slots = slot_count(k);
    let deps: Result<Vec<(Rat, Arc<IntView>, Arc<IntView>)>> = pieces
        .into_iter()
        .map(|p| {
            let v1 = cache.int_view(p.w1).ok_or_else(|| missing_dep(k, p.w1))?;
            let v2 = cache.int_view(p.w2).ok_or_else(|| missing_dep(k, p.w2))?;
            Ok((p.coeff, v1, v2))
        })
        .collect();
    let deps = deps?;
    let partials = par::map_collect(jobs, deps, |(coeff, v1, v2)| {
        debug_assert_eq!((v1.b_start + v2.b_start) % 2, b0 % 2);
        let base = ((v1.b_start + v2.b_start - b0) / 2) as usize;
        let mut ints = vec![Int::zero(); n_slots];
        for (i, n1) in v1.nums.iter().enumerate() {
            if n1.is_zero() {
                continue;
            }
            for (j, n2) in v2.nums.iter().enumerate() {
                if !n2.is_zero() {
                    ints[base + i + j] += n1 * n2;
                }
            }
        }
        // Denominator of every entry: the coefficient's times both views'.
        let den = coeff.denom() * &v1.den * &v2.den;
        (coeff.numer().clone(), ints, den)
    });
    let mut global_den = Int::one();
    for (_, _, den) in &partials {
        global_den = global_den.lcm(den);
    }
    let mut totals = vec![Int::zero(); n_slots];
    for (num, ints, den) in partials {
        if num.is_zero() {
            continue;
        }
        let scale = num * (&global_den / &den);
        for (slot, n) in ints.into_iter().enumerate() {
            if !n.is_zero() {
                totals[slot] += n * &scale;
            }
        }
    }
    let coeffs = totals.into_iter().map(|n| Rat::new(n, global_den.clone())).collect();
    Ok(Expansion { k, b_start: b0, coeffs, route })
}

fn missing_dep(k: u64, dep: u64) -> Error {
    Error::Domain(format!("weight {k} requires cached weight {dep}; fill the cache first"))
}

/// Classical convolution recurrence, valid for every even k >= 8 (n = k/2):
/// `(n-3)(2n-1)(2n+1) G_2n = 3 sum_{p+q=n, p,q>=2} (2p-1)(2q-1) G_2p G_2q`.
pub fn expand_classical(cache: &Cache, k: u64, jobs: usize) -> Result<Expansion> {
    Expansion::check_weight(k)?;
    if k < 8 {
        return Err(Error::Domain(format!("classical route requires k >= 8, got {k}")));
    }
    cache.ensure_through(k - 2, jobs, None)?;
    let n = k / 2;
    let den = Int::from(n - 3) * Int::from(2 * n - 1) * Int::from(2 * n + 1);
    let pieces = (2..=n - 2)
        .map(|p| {
            let q = n - p;
            let num = Int::from(3) * Int::from(2 * p - 1) * Int::from(2 * q - 1);
            Piece { coeff: Rat::new(num, den.clone()), w1: 2 * p, w2: 2 * q }
        })
        .collect();
    assemble(cache, k, pieces, Route::Classical, jobs)
}

/// Coefficient c_j of the k = 6n + 2 route, in binomial-product form:
/// `c_j = (2n+1) C(4n+1, 2n) C(2n, 2j-1) / ((6n+1) C(6n, 2n+2j-1))`.
/// Symmetric: c_j = c_{n-j+1}.
pub fn romik_coefficient(n: u64, j: u64) -> Rat {
    let num = Int::from(2 * n + 1) * binomial(4 * n + 1, (2 * n) as i64)
        * binomial(2 * n, (2 * j - 1) as i64);
    let den = Int::from(6 * n + 1) * binomial(6 * n, (2 * n + 2 * j - 1) as i64);
    Rat::new(num, den)
}

/// Sparse route for k = 6n + 2 (n >= 1):
/// `G_k = sum_{j=1..n} c_j G_{2n+2j} G_{4n-2j+2}`.
pub fn expand_romik(cache: &Cache, k: u64, jobs: usize) -> Result<Expansion> {
    Expansion::check_weight(k)?;
    if k % 6 != 2 || k < 8 {
        return Err(Error::Domain(format!("k = 6n+2 route does not apply to k={k}")));
    }
    cache.ensure_through(k - 2, jobs, None)?;
    let n = (k - 2) / 6;
    let pieces = (1..=n)
        .map(|j| Piece {
            coeff: romik_coefficient(n, j),
            w1: 2 * n + 2 * j,
            w2: 4 * n - 2 * j + 2,
        })
        .collect();
    assemble(cache, k, pieces, Route::Romik, jobs)
}

/// Combined coefficient a_j + b_j of the k = 6n route, including the
/// 1/C(6n+1, 2n) denominator:
/// `a_j = C(2n+2j-1, 2n) C(4n-2j-1, 2n) / C(6n+1, 2n)` and
/// `b_j = 2 C(2n+2j-1, 2n) C(4n-2j-1, 2n-2) / C(6n+1, 2n)`.
/// Out-of-range binomials vanish, which silences exactly the terms the
/// identity omits at the boundary.
pub fn mr0_coefficient(n: u64, j: u64) -> Rat {
    let common = binomial(2 * n + 2 * j - 1, (2 * n) as i64);
    let bracket = binomial(4 * n - 2 * j - 1, (2 * n) as i64)
        + Int::from(2) * binomial(4 * n - 2 * j - 1, (2 * n - 2) as i64);
    Rat::new(common * bracket, binomial(6 * n + 1, (2 * n) as i64))
}

/// Sparse route for k = 6n (n >= 2):
/// `G_k = sum_{j=1..n} (a_j + b_j) G_{2n+2j} G_{4n-2j}`.
pub fn expand_mr0(cache: &Cache, k: u64, jobs: usize) -> Result<Expansion> {
    Expansion::check_weight(k)?;
    if k % 6 != 0 || k < 12 {
        return Err(Error::Domain(format!("k = 6n route does not apply to k={k}")));
    }
    cache.ensure_through(k - 2, jobs, None)?;
    let n = k / 6;
    let pieces = (1..=n)
        .map(|j| Piece { coeff: mr0_coefficient(n, j), w1: 2 * n + 2 * j, w2: 4 * n - 2 * j })
        .collect();
    assemble(cache, k, pieces, Route::Mr0, jobs)
}

/// Integer left factor of the k = 6n + 4 route:
/// `L = C(6n+3, 2n+2) + 2 C(6n+3, 2n)`.
pub fn mr4_left_factor(n: u64) -> Int {
    binomial(6 * n + 3, (2 * n + 2) as i64) + Int::from(2) * binomial(6 * n + 3, (2 * n) as i64)
}

/// Combined coefficient (a_j + b_j)/L of the k = 6n + 4 route:
/// `a_j = C(2n+2j-1, 2n) C(4n-2j+3, 2n)`,
/// `b_j = 2 C(2n+2j-1, 2n) C(4n-2j+3, 2n+2)`.
pub fn mr4_coefficient(n: u64, j: u64) -> Rat {
    let common = binomial(2 * n + 2 * j - 1, (2 * n) as i64);
    let bracket = binomial(4 * n - 2 * j + 3, (2 * n) as i64)
        + Int::from(2) * binomial(4 * n - 2 * j + 3, (2 * n + 2) as i64);
    Rat::new(common * bracket, mr4_left_factor(n))
}

/// Sparse route for k = 6n + 4 (n >= 1):
/// `G_k = (1/L) sum_{j=1..n+1} (a_j + b_j) G_{2n+2j} G_{4n-2j+4}`.
pub fn expand_mr4(cache: &Cache, k: u64, jobs: usize) -> Result<Expansion> {
    Expansion::check_weight(k)?;
    if k % 6 != 4 || k < 10 {
        return Err(Error::Domain(format!("k = 6n+4 route does not apply to k={k}")));
    }
    cache.ensure_through(k - 2, jobs, None)?;
    let n = (k - 4) / 6;
    let pieces = (1..=n + 1)
        .map(|j| Piece {
            coeff: mr4_coefficient(n, j),
            w1: 2 * n + 2 * j,
            w2: 4 * n - 2 * j + 4,
        })
        .collect();
    assemble(cache, k, pieces, Route::Mr4, jobs)
}

/// Compute the expansion of weight k by the requested route.
///
/// `Method::Auto` consults the cache (computing and memoizing on demand, so
/// repeated calls return the identical object) and dispatches on the residue
/// class: base cases for 4 and 6, the classical recurrence for 8 (a
/// determinism tie-break; the sparse k = 6n+2 route is also valid there),
/// then the sparse route matching k mod 6. Explicit methods always recompute
/// fresh — that is what makes cross-route agreement tests meaningful — but
/// read their lower-weight inputs from the cache.
pub fn expand(cache: &Cache, k: u64, method: Method, jobs: usize) -> Result<Arc<Expansion>> {
    match method {
        Method::Auto => cache.expansion(k, jobs),
        Method::Classical => expand_classical(cache, k, jobs).map(Arc::new),
        Method::Romik => expand_romik(cache, k, jobs).map(Arc::new),
        Method::Mr0 => expand_mr0(cache, k, jobs).map(Arc::new),
        Method::Mr4 => expand_mr4(cache, k, jobs).map(Arc::new),
    }
}

fn compute_auto(cache: &Cache, k: u64, jobs: usize) -> Result<Expansion> {
    match k {
        4 => Ok(Expansion::base4()),
        6 => Ok(Expansion::base6()),
        8 => expand_classical(cache, k, jobs),
        _ if k % 6 == 2 => expand_romik(cache, k, jobs),
        _ if k % 6 == 0 => expand_mr0(cache, k, jobs),
        _ => expand_mr4(cache, k, jobs),
    }
}

/// Weight-indexed memo cache of expansions.
///
/// Writes happen strictly in weight order (every route needs all lower
/// weights), so [`Cache::ensure_through`] fills sequentially by weight while
/// each weight's product terms run data-parallel. Once stored, expansions
/// are immutable and shared by `Arc`; concurrent fills of the same weight
/// resolve to one canonical entry.
pub struct Cache {
    map: RwLock<BTreeMap<u64, Arc<Expansion>>>,
    views: RwLock<BTreeMap<u64, Arc<IntView>>>,
}

impl Default for Cache {
    fn default() -> Self {
        Self::new()
    }
}

impl Cache {
    /// Fresh cache holding only the two generators.
    pub fn new() -> Cache {
        let mut map = BTreeMap::new();
        map.insert(4, Arc::new(Expansion::base4()));
        map.insert(6, Arc::new(Expansion::base6()));
        Cache { map: RwLock::new(map), views: RwLock::new(BTreeMap::new()) }
    }

    /// The cached expansion of weight k, if present.
    pub fn peek(&self, k: u64) -> Option<Arc<Expansion>> {
        self.map.read().expect("cache lock").get(&k).cloned()
    }

    /// Memoized integer view of a cached weight (first stored view wins;
    /// expansions are immutable once cached).
    fn int_view(&self, w: u64) -> Option<Arc<IntView>> {
        if let Some(v) = self.views.read().expect("view lock").get(&w) {
            return Some(v.clone());
        }
        let e = self.peek(w)?;
        let v = Arc::new(IntView::of(&e));
        Some(self.views.write().expect("view lock").entry(w).or_insert(v).clone())
    }

    /// All cached weights, ascending.
    pub fn weights(&self) -> Vec<u64> {
        self.map.read().expect("cache lock").keys().copied().collect()
    }

    /// All cached expansions, weight-ascending (for persistence).
    pub fn entries(&self) -> Vec<Arc<Expansion>> {
        self.map.read().expect("cache lock").values().cloned().collect()
    }

    /// Install an expansion parsed from a cache file. Weights already
    /// present are left untouched (the stored value is canonical).
    pub fn insert_loaded(&self, e: Expansion) {
        self.map.write().expect("cache lock").entry(e.k).or_insert_with(|| Arc::new(e));
    }

    /// The memoized expansion of weight k, computing it (and any missing
    /// lower weights) on demand.
    pub fn expansion(&self, k: u64, jobs: usize) -> Result<Arc<Expansion>> {
        Expansion::check_weight(k)?;
        self.ensure_through(k, jobs, None)?;
        Ok(self.peek(k).expect("ensured weight must be cached"))
    }

    /// Fill the cache for every even weight 4 <= k <= k_max, in weight
    /// order. `progress` (if given) is invoked after each weight that had to
    /// be computed. `jobs` bounds the data parallelism of each weight's
    /// product terms; the weight loop itself is sequential because each
    /// weight consumes all lower ones.
    pub fn ensure_through(
        &self,
        k_max: u64,
        jobs: usize,
        progress: Option<&(dyn Fn(u64) + Sync)>,
    ) -> Result<()> {
        let mut k = 4;
        while k <= k_max {
            if self.peek(k).is_none() {
                let e = compute_auto(self, k, jobs)?;
                self.map
                    .write()
                    .expect("cache lock")
                    .entry(k)
                    .or_insert_with(|| Arc::new(e));
                if let Some(cb) = progress {
                    cb(k);
                }
            }
            k += 2;
        }
        Ok(())
    }
}
