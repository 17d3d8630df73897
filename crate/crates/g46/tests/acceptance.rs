//! Acceptance suite: the eight shipping criteria, run in order inside a
//! single test so timed criteria own the machine, each printing a
//! `ACCEPTANCE n (...): PASS` / `FAIL` line (use `-- --nocapture` to watch
//! them as they complete). Every criterion runs even if an earlier one
//! fails; the test itself fails if any line failed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use g46::checks::{self, CheckSet, WitnessStatus};
use g46::dyadic;
use g46::expansion::{expand, Cache, Expansion, Method};
use g46::faber::{faber_combo, faber_square_combo, t_coeffs, ComboSpec, FaberPolynomial};
use g46::newton::{dumas, polygon, Verdict};
use g46::qseries::verify_expansion;
use g46::{Rat, V2};

fn criterion(failed: &mut Vec<u32>, n: u32, name: &str, body: impl FnOnce()) {
    let start = Instant::now();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(()) => println!("ACCEPTANCE {n} ({name}): PASS [{:.1}s]", start.elapsed().as_secs_f64()),
        Err(cause) => {
            let msg = cause
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| cause.downcast_ref::<&str>().copied())
                .unwrap_or("panic");
            println!("ACCEPTANCE {n} ({name}): FAIL — {msg}");
            failed.push(n);
        }
    }
}

fn shared(k_max: u64) -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Cache::new);
    cache.ensure_through(k_max, 0, None).unwrap();
    cache
}

fn terms_of(e: &Expansion) -> Vec<(u64, Rat)> {
    e.terms().map(|(b, w)| (b, w.clone())).collect()
}

fn rat_of(s: &str) -> Rat {
    g46::arith::parse_rat(s).unwrap()
}

#[test]
fn acceptance() {
    let mut failed = Vec::new();

    criterion(&mut failed, 1, "min-valuation formula, even k <= 512", || {
        let start = Instant::now();
        let cache = Cache::new();
        let summary = checks::scan_range(
            &cache,
            512,
            &CheckSet { theorem1: true, powers2: false, witness: false },
            0,
            None,
        )
        .unwrap();
        let elapsed = start.elapsed();
        assert!(summary.ok(), "failures: {:?}", summary.failures);
        assert_eq!(summary.weights_checked, 255);
        assert!(
            elapsed < Duration::from_secs(600),
            "fresh scan took {elapsed:?}, budget 10 minutes"
        );
    });

    criterion(&mut failed, 2, "power-of-two unique minimum, k = 2^t, t <= 10", || {
        let cache = shared(1024);
        for t in 2..=10u32 {
            let k = 1u64 << t;
            let e = cache.peek(k).unwrap();
            assert!(
                checks::check_powers_of_two(&e).unwrap().is_none(),
                "refinement failed at k={k}"
            );
            let (min, argmin) = checks::min_valuation(&e);
            assert_eq!(min, 0, "k={k}");
            assert_eq!(argmin, vec![0], "k={k}: minimum not unique at b=0");
        }
    });

    criterion(&mut failed, 3, "attained-minimum witness, even 6 <= k <= 512", || {
        let cache = shared(512);
        for k in (6..=512u64).step_by(2) {
            if dyadic::is_power_of_two(k) {
                continue;
            }
            let (status, failure) = checks::check_witness(&cache.peek(k).unwrap());
            assert!(
                matches!(status, WitnessStatus::CaseAPass | WitnessStatus::CaseBPass),
                "k={k}: {failure:?}"
            );
        }
        // Named instances: weight 12 and weight 24 attain the minimum at
        // the top slot with the bottom slot exactly one step higher.
        let e12 = cache.peek(12).unwrap();
        assert_eq!(g46::arith::v2_rat(e12.get(2).unwrap()), 0);
        assert_eq!(g46::arith::v2_rat(e12.get(0).unwrap()), 1);
        let e24 = cache.peek(24).unwrap();
        assert_eq!(g46::arith::v2_rat(e24.get(4).unwrap()), 0);
        assert_eq!(g46::arith::v2_rat(e24.get(0).unwrap()), 1);
        for (b, w) in e24.terms() {
            if b != 0 && b != 4 {
                assert!(g46::arith::v2_rat(w) > 1, "k=24 b={b}");
            }
        }
    });

    criterion(&mut failed, 4, "route agreement + q-series check, even 8 <= k <= 240", || {
        let cache = shared(240);
        for k in (8..=240u64).step_by(2) {
            let auto = cache.peek(k).unwrap();
            let reference = terms_of(&auto);
            let mut routes = vec![Method::Classical];
            match k % 6 {
                2 => routes.push(Method::Romik),
                0 if k >= 12 => routes.push(Method::Mr0),
                4 if k >= 10 => routes.push(Method::Mr4),
                _ => {}
            }
            for method in routes {
                let e = expand(cache, k, method, 0).unwrap();
                assert_eq!(terms_of(&e), reference, "k={k} route {method:?} disagrees");
            }
            let report = verify_expansion(&auto, 25).unwrap();
            assert!(report.ok, "k={k}: q-series mismatch at {:?}", report.first_mismatch);
        }
    });

    criterion(&mut failed, 5, "pinned coefficient and polynomial values", || {
        let cache = shared(24);
        assert_eq!(cache.peek(8).unwrap().get(0).unwrap(), &rat_of("3/7"));
        assert_eq!(cache.peek(10).unwrap().get(1).unwrap(), &rat_of("5/11"));
        let e12 = cache.peek(12).unwrap();
        assert_eq!(e12.get(0).unwrap(), &rat_of("18/143"));
        assert_eq!(e12.get(2).unwrap(), &rat_of("25/143"));
        assert_eq!(cache.peek(14).unwrap().get(1).unwrap(), &rat_of("30/143"));

        let t12 = t_coeffs(cache, 12, 0).unwrap();
        assert_eq!(t12[0], rat_of("-432000/691"));
        assert_eq!(g46::arith::v2_rat(&t12[0]), 8 - 1);

        let sq12 = faber_square_combo(cache, 12, 0).unwrap();
        assert_eq!(sq12.v2_profile()[0], 16 - 3);
    });

    criterion(&mut failed, 6, "square-combination certificates, D in {1,2,4,8}", || {
        let cache = shared(96);
        for d in [1u64, 2, 4] {
            let cert = dumas(&faber_square_combo(cache, 12 * d, 0).unwrap()).unwrap();
            assert_eq!(cert.verdict, Verdict::Irreducible, "D={d}");
            assert_eq!(cert.vertices, vec![(0, 16 * d as i64 - 3), (2 * d, 0)], "D={d}");
        }
        // D = 8 carries the budget; time it including its expansions.
        let start = Instant::now();
        let cert = dumas(&faber_square_combo(cache, 96, 0).unwrap()).unwrap();
        let elapsed = start.elapsed();
        assert_eq!(cert.verdict, Verdict::Irreducible, "D=8");
        assert_eq!(cert.vertices, vec![(0, 125), (16, 0)]);
        assert!(elapsed < Duration::from_secs(300), "D=8 took {elapsed:?}, budget 5 minutes");
    });

    criterion(&mut failed, 7, "tower combinations: certificates, rejection, force", || {
        let cache = shared(48);
        let valid: [(u64, u32, &[u32], &[i64]); 7] = [
            (1, 1, &[0, 1], &[1, 1]),
            (1, 2, &[0, 1, 2], &[1, 3, 2]),
            (2, 1, &[0, 1], &[1, 1]),
            (1, 2, &[0, 2], &[1, 1]),
            (2, 2, &[0, 1, 2], &[1, 3, 2]),
            (1, 1, &[0, 1], &[3, -1]),
            (1, 2, &[0, 1], &[1, 1]),
        ];
        assert!(valid.len() >= 5);
        assert!(valid.contains(&(1, 2, &[0, 1, 2][..], &[1, 3, 2][..])));
        for (d, ell, a, m) in valid {
            let spec = ComboSpec { d, ell, a: a.to_vec(), m: m.to_vec() };
            spec.validate_hypotheses().expect("spec satisfies the hypotheses");
            let p = faber_combo(cache, &spec, false, 0).unwrap();
            let cert = dumas(&p).unwrap();
            assert_eq!(cert.verdict, Verdict::Irreducible, "{spec:?}");
            assert_eq!(cert.h, spec.predicted_h(), "{spec:?}: h must be 8d - N_1 - 1 exactly");
        }

        // Hypothesis violations: rejected plainly, and never certified
        // "reducible" when forced (the verdict type has no such value; the
        // frozen outcomes are one irreducible and two inconclusive).
        let violating: [(&[i64], Verdict); 3] = [
            (&[2, 1], Verdict::Irreducible),
            (&[1, 2], Verdict::Inconclusive),
            (&[1, 3], Verdict::Inconclusive),
        ];
        for (m, expected) in violating {
            let spec = ComboSpec { d: 1, ell: 1, a: vec![0, 1], m: m.to_vec() };
            assert!(
                matches!(faber_combo(cache, &spec, false, 0), Err(g46::Error::Hypothesis(_))),
                "m={m:?} must be rejected without force"
            );
            let p = faber_combo(cache, &spec, true, 0).unwrap();
            let cert = dumas(&p).unwrap();
            assert_eq!(cert.verdict, expected, "m={m:?}");
        }
    });

    criterion(&mut failed, 8, "digit-sum, strictness, hull, multinomial properties", || {
        // Digit-sum lemma: s(x) + s(y) >= 1 + v2(2x + y + 1) whenever the
        // target is not a power of two.
        for x in 0..=512u64 {
            for y in 0..=512u64 {
                let n = 2 * x + y + 1;
                if dyadic::is_power_of_two(n) {
                    continue;
                }
                assert!(
                    dyadic::digit_sum(x) + dyadic::digit_sum(y) >= 1 + n.trailing_zeros(),
                    "x={x} y={y}"
                );
            }
        }

        // Strictness: 2 s(n) never equals 1 + v2(3n + 1).
        for n in 1..=4096u64 {
            assert!(2 * dyadic::digit_sum(n) != 1 + (3 * n + 1).trailing_zeros(), "n={n}");
        }

        // Newton hulls match a brute-force chord envelope on 500 random
        // monic polynomials of degree <= 8.
        use rand::Rng;
        let mut rng = rand::thread_rng();
        for trial in 0..500 {
            let d: usize = rng.gen_range(2..=8);
            let mut coeffs: Vec<Rat> = (0..d)
                .map(|_| {
                    if rng.gen_ratio(1, 6) {
                        Rat::from_integer(0.into())
                    } else {
                        let v: i32 = rng.gen_range(-4..=12);
                        let odd = 2 * rng.gen_range(0i64..500) + 1;
                        rat_of(&odd.to_string()) * rat_of("2/1").pow(v)
                    }
                })
                .collect();
            coeffs.push(Rat::from_integer(1.into()));
            let p = FaberPolynomial::new(coeffs, "rand").unwrap();
            let poly = polygon(&p);
            let finite: Vec<(u64, i64)> = poly
                .points
                .iter()
                .filter_map(|&(r, v)| match v {
                    V2::Finite(v) => Some((r, v)),
                    V2::Infinite => None,
                })
                .collect();
            for x in 0..=(d as u64) {
                let brute = brute_hull_height(&finite, x);
                let mine = poly
                    .segments
                    .iter()
                    .find(|s| s.x0 <= x && x <= s.x1)
                    .map(|s| {
                        rat_of(&s.y0.to_string())
                            + s.slope() * rat_of(&(x as i64 - s.x0 as i64).to_string())
                    })
                    .or_else(|| {
                        (poly.vertices.len() == 1 && poly.vertices[0].0 == x)
                            .then(|| rat_of(&poly.vertices[0].1.to_string()))
                    });
                assert_eq!(brute, mine, "trial {trial} x={x} points {finite:?}");
            }
        }

        // Multinomial bound: v2(N!/(A!B!C!)) + C >= (B+C)/N for N a power
        // of two up to 64, excluding the two endpoint cases A = N, B = N.
        for n in [2u64, 4, 8, 16, 32, 64] {
            for a in 0..=n {
                for b in 0..=(n - a) {
                    if a == n || b == n {
                        continue;
                    }
                    let c = n - a - b;
                    let coeff = g46::arith::multinomial(n, &[a, b, c]).unwrap();
                    let v = match g46::arith::v2_int(&coeff) {
                        V2::Finite(v) => v,
                        V2::Infinite => unreachable!(),
                    };
                    assert!((v + c as i64) * n as i64 >= (b + c) as i64, "N={n} A={a} B={b} C={c}");
                }
            }
        }
    });

    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

/// The sweep matching the strongest published bound; run explicitly with
/// `cargo test -p g46 --test acceptance -- --ignored`.
#[test]
#[ignore = "long run: the full k <= 3500 sweep has no time budget"]
fn acceptance_long_min_valuation_to_3500() {
    let cache = Cache::new();
    let summary = checks::scan_range(
        &cache,
        3500,
        &CheckSet { theorem1: true, powers2: false, witness: false },
        0,
        None,
    )
    .unwrap();
    assert!(summary.ok(), "failures: {:?}", summary.failures);
    println!("ACCEPTANCE 1-long (min-valuation formula to 3500): PASS");
}

/// Lower hull height at integer x as the minimum over all chords between
/// finite valuation points (the chord envelope is the hull boundary).
fn brute_hull_height(pts: &[(u64, i64)], x: u64) -> Option<Rat> {
    let mut best: Option<Rat> = None;
    for &(xi, yi) in pts {
        for &(xj, yj) in pts {
            if !(xi <= x && x <= xj) {
                continue;
            }
            let y = if xi == xj {
                if xi != x {
                    continue;
                }
                rat_of(&yi.to_string())
            } else {
                rat_of(&yi.to_string())
                    + rat_of(&(yj - yi).to_string()) * rat_of(&(x - xi).to_string())
                        / rat_of(&(xj - xi).to_string())
            };
            best = match best {
                Some(b) if b <= y => Some(b),
                _ => Some(y),
            };
        }
    }
    best
}
