//! 2-adic valuation checks on expansion coefficients.
//!
//! Three machine checks run over any range of weights:
//! * `theorem1` — the minimum 2-adic valuation over all coefficients of
//!   weight k equals s(k) - 2, except that it equals 0 when k is a power
//!   of two (s = binary digit sum).
//! * `powers2` — for k a power of two, the pure G_4 coefficient (b = 0)
//!   is the unique valuation minimizer at valuation 0.
//! * `witness` — the minimum is attained at a predictable slot: at
//!   b = mu(k) = 2^(v_2(k)-1) with valuation lambda(k) = s(k) - 2 and
//!   strictly larger valuations below mu (case a), strengthened for
//!   k = 6n with n a power of two to v_2 = 0 at b = n, v_2 = 1 at b = 0,
//!   and v_2 > 1 elsewhere (case b).

use serde::Serialize;

use crate::arith::{v2_rat, V2};
use crate::dyadic::{self, is_power_of_two};
use crate::error::{Error, Result};
use crate::expansion::{a_of, Cache, Expansion};
use crate::par;

/// Valuation of one stored coefficient.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BVal {
    pub b: u64,
    pub a: u64,
    pub v2: V2,
}

/// One failed check at one weight.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Failure {
    pub k: u64,
    pub check: String,
    pub detail: String,
}

impl Failure {
    fn new(k: u64, check: &str, detail: String) -> Failure {
        Failure { k, check: check.into(), detail }
    }
}

/// How a weight relates to the attained-minimum prediction.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum WitnessStatus {
    /// Minimum attained at b = mu(k), strictly larger below.
    CaseAPass,
    /// k = 6n with n a power of two: valuations (0 at b=n, 1 at b=0, >1 else).
    CaseBPass,
    Fail,
    /// k is a power of two (covered by the powers2 check instead).
    NotApplicable,
}

/// Per-coefficient valuations, b ascending.
pub fn per_b(e: &Expansion) -> Vec<BVal> {
    e.terms()
        .map(|(b, w)| BVal { b, a: a_of(e.k(), b), v2: v2_rat(w) })
        .collect()
}

/// Minimum valuation over all coefficients and the set of b attaining it.
pub fn min_valuation(e: &Expansion) -> (V2, Vec<u64>) {
    let vals = per_b(e);
    let min = vals.iter().map(|v| v.v2).min().expect("expansion has at least one slot");
    let argmin = vals.iter().filter(|v| v.v2 == min).map(|v| v.b).collect();
    (min, argmin)
}

/// The predicted minimum valuation at weight k.
pub fn expected_min(k: u64) -> i64 {
    if is_power_of_two(k) {
        0
    } else {
        dyadic::digit_sum(k) as i64 - 2
    }
}

/// Check the minimum-valuation formula; `None` means pass.
pub fn check_theorem1(e: &Expansion) -> Option<Failure> {
    let k = e.k();
    let want = expected_min(k);
    let (got, argmin) = min_valuation(e);
    if got == want {
        None
    } else {
        Some(Failure::new(
            k,
            "theorem1",
            format!("min v2 is {got} at b in {argmin:?}, predicted {want}"),
        ))
    }
}

/// Check the power-of-two refinement; errors unless k is a power of two.
pub fn check_powers_of_two(e: &Expansion) -> Result<Option<Failure>> {
    let k = e.k();
    if !is_power_of_two(k) || k < 4 {
        return Err(Error::Domain(format!("powers2 check needs a power of two >= 4, got {k}")));
    }
    for bv in per_b(e) {
        let pass = if bv.b == 0 { bv.v2 == 0 } else { bv.v2 > 0 };
        if !pass {
            return Ok(Some(Failure::new(
                k,
                "powers2",
                format!("v2 at b={} is {}, expected {}", bv.b, bv.v2, if bv.b == 0 { "0" } else { "> 0" }),
            )));
        }
    }
    Ok(None)
}

/// Classify a weight and check the attained-minimum prediction for its case.
pub fn check_witness(e: &Expansion) -> (WitnessStatus, Option<Failure>) {
    let k = e.k();
    if is_power_of_two(k) {
        return (WitnessStatus::NotApplicable, None);
    }
    // The two remaining cases cannot overlap with the power-of-two branch:
    // a multiple of 6 has the odd factor 3.
    assert!(k % 6 != 0 || !is_power_of_two(k));

    let fail = |detail: String| (WitnessStatus::Fail, Some(Failure::new(k, "witness", detail)));

    if k % 6 == 0 && is_power_of_two(k / 6) {
        // Case b: k = 6n, n a power of two.
        let n = k / 6;
        for bv in per_b(e) {
            let ok = if bv.b == n {
                bv.v2 == 0
            } else if bv.b == 0 {
                bv.v2 == 1
            } else {
                bv.v2 > 1
            };
            if !ok {
                let want = if bv.b == n { "0" } else if bv.b == 0 { "1" } else { "> 1" };
                return fail(format!("case b: v2 at b={} is {}, expected {}", bv.b, bv.v2, want));
            }
        }
        (WitnessStatus::CaseBPass, None)
    } else {
        // Case a: minimum attained at b = mu(k), strictly above for b < mu.
        let profile = dyadic::profile(k).expect("even weight >= 4");
        let (mu, lambda) = (profile.mu, profile.lambda as i64);
        for bv in per_b(e) {
            if bv.b == mu && bv.v2 != lambda {
                return fail(format!("case a: v2 at b=mu={mu} is {}, expected {lambda}", bv.v2));
            }
            if bv.b < mu && bv.v2 <= lambda {
                return fail(format!(
                    "case a: v2 at b={} is {}, expected > {lambda}",
                    bv.b, bv.v2
                ));
            }
        }
        (WitnessStatus::CaseAPass, None)
    }
}

/// Everything the valuation checks know about one weight.
#[derive(Clone, Debug, Serialize)]
pub struct WeightReport {
    pub k: u64,
    pub s: u32,
    pub lambda: u32,
    pub mu: u64,
    pub min_v2: V2,
    pub argmin: Vec<u64>,
    pub theorem1_ok: bool,
    pub witness: WitnessStatus,
    pub per_b: Vec<BVal>,
}

pub fn weight_report(e: &Expansion) -> Result<WeightReport> {
    let profile = dyadic::profile(e.k())?;
    let (min_v2, argmin) = min_valuation(e);
    Ok(WeightReport {
        k: e.k(),
        s: profile.s,
        lambda: profile.lambda,
        mu: profile.mu,
        min_v2,
        argmin,
        theorem1_ok: check_theorem1(e).is_none(),
        witness: check_witness(e).0,
        per_b: per_b(e),
    })
}

/// Which checks a scan runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckSet {
    pub theorem1: bool,
    pub powers2: bool,
    pub witness: bool,
}

impl Default for CheckSet {
    fn default() -> CheckSet {
        CheckSet { theorem1: true, powers2: true, witness: true }
    }
}

impl CheckSet {
    /// Parse a comma-separated list of check names.
    pub fn parse(s: &str) -> Result<CheckSet> {
        let mut set = CheckSet { theorem1: false, powers2: false, witness: false };
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "theorem1" => set.theorem1 = true,
                "powers2" => set.powers2 = true,
                "witness" => set.witness = true,
                other => return Err(Error::Domain(format!("unknown check '{other}'"))),
            }
        }
        if set == (CheckSet { theorem1: false, powers2: false, witness: false }) {
            return Err(Error::Domain("no checks selected".into()));
        }
        Ok(set)
    }

    pub fn names(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.theorem1 {
            out.push("theorem1");
        }
        if self.powers2 {
            out.push("powers2");
        }
        if self.witness {
            out.push("witness");
        }
        out
    }
}

/// Result of scanning all even weights 4..=k_max.
#[derive(Clone, Debug, Serialize)]
pub struct ScanSummary {
    pub k_max: u64,
    pub checks: Vec<String>,
    pub weights_checked: u64,
    pub failures: Vec<Failure>,
}

impl ScanSummary {
    pub fn ok(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Run the selected checks over every even weight 4..=k_max, filling the
/// cache first. `progress` is invoked with each weight as its expansion
/// gets computed.
pub fn scan_range(
    cache: &Cache,
    k_max: u64,
    checks: &CheckSet,
    jobs: usize,
    progress: Option<&(dyn Fn(u64) + Sync)>,
) -> Result<ScanSummary> {
    if k_max < 4 {
        return Err(Error::Domain(format!("scan needs k_max >= 4, got {k_max}")));
    }
    cache.ensure_through(k_max, jobs, progress)?;
    let ks: Vec<u64> = (4..=k_max).step_by(2).collect();
    let weights_checked = ks.len() as u64;
    let per_weight = par::map_collect(jobs, ks, |k| {
        let e = cache.peek(k).expect("cache filled through k_max");
        let mut fails = Vec::new();
        if checks.theorem1 {
            fails.extend(check_theorem1(&e));
        }
        if checks.powers2 && is_power_of_two(k) {
            fails.extend(check_powers_of_two(&e).expect("k is a power of two"));
        }
        if checks.witness {
            fails.extend(check_witness(&e).1);
        }
        fails
    });
    Ok(ScanSummary {
        k_max,
        checks: checks.names().iter().map(|s| s.to_string()).collect(),
        weights_checked,
        failures: per_weight.into_iter().flatten().collect(),
    })
}
