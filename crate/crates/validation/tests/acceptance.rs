//! Acceptance criteria, one line each. Exits nonzero if any criterion fails.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use pskz::algebra::PolyZ;
use pskz::grid::{run_bundle, run_convergence, run_suites, BundleConfig, GridConfig, Suite};
use pskz::hypergeometric::{digit_polys, lambda_range, Z_VARS};
use pskz::padic::{
    count_nonvanishing, intersection_degree, intersection_product, limit_vector, DomainOracle, Fq,
    Unramified,
};
use pskz::report::CheckRecord;

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn summarize(records: &[CheckRecord], checks: &[&str]) -> (bool, String) {
    let mut per: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for c in checks {
        per.insert(c, (0, 0));
    }
    for r in records {
        if let Some(e) = per.get_mut(r.check.as_str()) {
            e.0 += 1;
            if r.pass {
                e.1 += 1;
            }
        }
    }
    let pass = per.values().all(|&(n, ok)| n > 0 && n == ok);
    let detail = per
        .iter()
        .map(|(c, (n, ok))| format!("{c} {ok}/{n}"))
        .collect::<Vec<_>>()
        .join(", ");
    (pass, detail)
}

fn grid(suite: Suite) -> Vec<CheckRecord> {
    run_suites(&[suite], &GridConfig::default()).expect("grid runs")
}

fn closed_form() -> Outcome {
    let (pass, detail) = summarize(&grid(Suite::Construction), &["closed_form_equals_direct"]);
    outcome(pass, detail)
}

fn gradient() -> Outcome {
    let (pass, detail) = summarize(&grid(Suite::Construction), &["gradient_identity"]);
    outcome(pass, detail)
}

fn dynamical() -> Outcome {
    let recs = grid(Suite::Dynamical);
    let (pass, detail) = summarize(&recs, &["dynamical"]);
    let recorded = recs.iter().all(|r| r.observed.is_some());
    let exact = recs
        .iter()
        .filter(|r| r.observed.is_some_and(|o| o.min_with(u32::MAX) == u32::MAX))
        .count();
    outcome(pass && recorded, format!("{detail}; {exact} exactly zero"))
}

fn qkz() -> Outcome {
    let recs = grid(Suite::Qkz);
    let (pass, detail) = summarize(&recs, &["qkz_rational", "qkz_cleared", "qkz_implication"]);
    outcome(pass, detail)
}

fn dwork() -> Outcome {
    let mut recs = grid(Suite::Dwork);
    // reach the shifted congruence with e = 2 for p = 3
    let cfg = GridConfig {
        primes: vec![3],
        s_max: Some(5),
        ..GridConfig::default()
    };
    recs.extend(
        run_suites(&[Suite::Dwork], &cfg)
            .expect("grid runs")
            .into_iter()
            .filter(|r| r.params["s"] == 5),
    );
    let (pass, detail) = summarize(
        &recs,
        &[
            "dwork_first",
            "dwork_second",
            "dwork_vector",
            "dwork_vector_derivative",
            "dwork_shifted",
        ],
    );
    let e2_shifted = recs
        .iter()
        .any(|r| r.check == "dwork_shifted" && r.params["e"] == 2);
    outcome(pass && e2_shifted, detail)
}

fn factorization() -> Outcome {
    let (pass, detail) = summarize(
        &grid(Suite::Factor),
        &[
            "factor_T",
            "factor_I1",
            "factor_I2",
            "nonvanishing_T_mod_p",
            "nonvanishing_h_mod_p",
            "nonvanishing_g1_mod_p",
            "nonvanishing_g2_mod_p",
        ],
    );
    outcome(pass, detail)
}

fn special_points() -> Outcome {
    // reference values: point -> (I_1, I_2) as rationals
    let expected = [
        ((0, 1), [(-1, 1), (1, 2)]),
        ((1, 0), [(1, 2), (-1, 1)]),
        ((1, 1), [(-1, 2), (-1, 2)]),
    ];
    let mut pass = true;
    let mut notes = Vec::new();
    for p in [3u64, 5] {
        let ctx = Unramified::new(p, 1, 3).unwrap();
        let fq = ctx.residue_field();
        let oracle = DomainOracle::new(fq).unwrap();
        for ((x, y), want) in expected {
            let a = [
                ctx.teichmuller(&fq.from_int(x)),
                ctx.teichmuller(&fq.from_int(y)),
            ];
            let got = limit_vector(&oracle, 1, &a, false)
                .expect("special point lies in the domain")
                .values;
            let want = want.map(|(n, d)| ctx.from_ratio(n, d).unwrap());
            if got != want {
                pass = false;
                notes.push(format!(
                    "p={p} ({x},{y}): got ({}, {}) want ({}, {}) mod {p}^3",
                    got[0], got[1], want[0], want[1]
                ));
            }
        }
    }
    outcome(
        pass,
        if pass {
            "all six values match".into()
        } else {
            notes.join("; ")
        },
    )
}

fn convergence() -> Outcome {
    let mut total = 0;
    let mut failed = 0;
    let mut min_per_cell = usize::MAX;
    for (p, s_max) in [(3u64, 5u32), (5, 3), (7, 3)] {
        let mut lambdas = lambda_range(p, 1).unwrap();
        lambdas.extend([p as i64 + 2, -(p as i64) - 2]);
        let recs = run_convergence(p, 2, &lambdas, 20, s_max, 11).expect("sampling succeeds");
        for &l in &lambdas {
            let samples: std::collections::BTreeSet<i64> = recs
                .iter()
                .filter(|r| r.params["lambda"] == l)
                .map(|r| r.params["sample"])
                .collect();
            min_per_cell = min_per_cell.min(samples.len());
        }
        total += recs.len();
        failed += recs.iter().filter(|r| !r.pass).count();
    }
    outcome(
        failed == 0 && min_per_cell >= 20,
        format!(
            "{} of {total} level comparisons hold, >= {min_per_cell} points per (p, lambda)",
            total - failed
        ),
    )
}

fn bundle() -> Outcome {
    let cfg = BundleConfig {
        p: 3,
        m: 3,
        precision: 2,
        lambdas: vec![-3, -1, 1, 3],
        samples: 10,
        seed: 2024,
    };
    let recs = run_bundle(&cfg).expect("bundle runs");
    let mut samples_ok = true;
    for l in &cfg.lambdas {
        let n: std::collections::BTreeSet<i64> = recs
            .iter()
            .filter(|r| r.check == "bundle_nonvanishing" && r.params["lambda"] == *l)
            .map(|r| r.params["sample"])
            .collect();
        samples_ok &= n.len() >= 10;
    }
    let (pass, detail) = summarize(
        &recs,
        &[
            "bundle_samples",
            "bundle_nonvanishing",
            "bundle_dynamical",
            "bundle_compatibility",
            "bundle_qkz",
            "limit_proportionality",
            "limit_qkz_relation",
            "limit_derivative_relation",
        ],
    );
    outcome(pass && samples_ok, detail)
}

fn count_oracle_m1(p: u64, b: &PolyZ) -> u64 {
    let pm = num_bigint::BigInt::from(p);
    let mut count = 0;
    for x in 0..p {
        for y in 0..p {
            let mut v = num_bigint::BigInt::from(0);
            for (e, c) in b.term_list() {
                v += c
                    * num_bigint::BigInt::from(x).pow(e[0])
                    * num_bigint::BigInt::from(y).pow(e[1]);
            }
            if (v % &pm) != num_bigint::BigInt::from(0) {
                count += 1;
            }
        }
    }
    count
}

fn counting() -> Outcome {
    let poly =
        |terms: &[(Vec<u32>, i64)]| PolyZ::from_terms(&Z_VARS, terms.iter().cloned()).unwrap();
    let mut pass = true;
    let mut notes = Vec::new();
    for (p, m) in [(3u64, 1u32), (3, 2), (5, 1), (3, 3)] {
        let fq = Fq::new(p, m).unwrap();
        let polys = vec![
            ("z1", poly(&[(vec![1, 0], 1)])),
            ("z1-z2", poly(&[(vec![1, 0], 1), (vec![0, 1], -1)])),
            ("z1z2+1", poly(&[(vec![1, 1], 1), (vec![0, 0], 1)])),
            ("z1^2+z2", poly(&[(vec![2, 0], 1), (vec![0, 1], 1)])),
            ("h(z;1)", digit_polys(p, 1).unwrap().h),
            ("intersection", intersection_product(p).unwrap()),
        ];
        let mut applicable = 0;
        for (name, b) in &polys {
            let r = count_nonvanishing(&fq, b).unwrap();
            if m == 1 && r.count != count_oracle_m1(p, b) {
                pass = false;
                notes.push(format!(
                    "{name} over F_{p}: count disagrees with direct evaluation"
                ));
            }
            if let Some(bound) = r.bound {
                applicable += 1;
                if r.count < bound {
                    pass = false;
                    notes.push(format!("{name} over F_{p}^{m}: {} < {bound}", r.count));
                }
            }
            if *name == "intersection" {
                if r.degree as u64 != intersection_degree(p) {
                    pass = false;
                    notes.push(format!("intersection degree {} for p={p}", r.degree));
                }
                if m >= 3 && r.count == 0 {
                    pass = false;
                    notes.push(format!("empty intersection over F_{p}^{m}"));
                }
                if m >= 3 {
                    notes.push(format!("intersection over F_{p}^{m}: {} points", r.count));
                }
            }
        }
        notes.push(format!(
            "(p,m)=({p},{m}): bound applicable to {applicable}/{}",
            polys.len()
        ));
        pass &= applicable >= 1;
    }
    outcome(pass, notes.join("; "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (
            "closed form equals direct expansion",
            closed_form,
            Duration::from_secs(120),
        ),
        ("gradient identity", gradient, Duration::from_secs(30)),
        ("dynamical congruence", dynamical, Duration::from_secs(300)),
        ("qKZ congruence", qkz, Duration::from_secs(300)),
        ("Dwork congruences", dwork, Duration::from_secs(600)),
        (
            "mod-p factorization and nonvanishing",
            factorization,
            Duration::from_secs(60),
        ),
        (
            "special-point limits",
            special_points,
            Duration::from_secs(60),
        ),
        ("convergence rate", convergence, Duration::from_secs(300)),
        ("bundle certification", bundle, Duration::from_secs(600)),
        ("nonvanishing counts", counting, Duration::from_secs(300)),
    ];
    let mut failures = 0;
    for (k, (name, f, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let in_time = elapsed <= *budget;
        let pass = result.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {}: {} ({:.1}s) {}{}",
            k + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            result.detail,
            if in_time { "" } else { " [over time budget]" }
        );
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
