//! Acceptance criteria, one line each. Runs as a plain binary so the lines are
//! always shown; exits non-zero if any criterion fails.

use std::f64::consts::{LN_2, PI};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use gibbs_mixing::asymptotics::{
    bec_limit_mean, first_order_moment, hp_asymptote, low_density_gap_prediction, second_order_moment,
    shannon_entropy_log_gamma, BEC_VARIANCE_LIMIT,
};
use gibbs_mixing::dimensions::{dim_sector, SectorDimensionTable};
use gibbs_mixing::exactmath::{binomial, compensated_sum};
use gibbs_mixing::mixing_entropy::*;
use gibbs_mixing::oracle::{dimension_grid, verification_grid, Oracle};
use gibbs_mixing::spin_algebra::{pj_orthogonal, pj_partial, SpinAngle};
use gibbs_mixing::Statistics;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `H(p)` for `n = m`, from a 40-digit log-gamma evaluation.
const HP_GOLDEN: [(u64, f64); 4] = [
    (64, 2.680_175_274_342_919_1),
    (256, 3.369_600_825_997_460_1),
    (1024, 4.061_641_394_122_501_3),
    (4096, 4.754_469_088_693_595_4),
];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn scenario(n: u64, m: u64, d: u64, stat: Statistics) -> MixingScenario {
    MixingScenario::new(n, m, d, stat).expect("valid scenario")
}

fn both() -> [Statistics; 2] {
    [Statistics::Boson, Statistics::Fermion]
}

fn worked_example() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for d in (2..=100u64).step_by(2) {
        let df = d as f64;
        let b = scenario(1, 1, d, Statistics::Boson);
        let f = scenario(1, 1, d, Statistics::Fermion);
        let checks = [
            (delta_s_ignorant(&b).unwrap(), 0.5 * (-1.0 / (df * df)).ln_1p() + LN_2),
            (delta_s_identical(&b).unwrap(), (1.0 / df).ln_1p() + LN_2),
            (delta_s_identical(&f).unwrap(), (-1.0 / df).ln_1p() + LN_2),
            (delta_s_informed(&b), 2.0 * LN_2),
            (delta_s_informed(&f), 2.0 * LN_2),
        ];
        for (got, want) in checks {
            worst = worst.max((got - want).abs());
        }
    }
    let elapsed = start.elapsed();
    verdict(
        worst <= 1e-12 && elapsed < Duration::from_secs(1),
        format!("max error {worst:.1e}, {elapsed:.2?}"),
    )
}

fn oracle_equivalence() -> Verdict {
    let start = Instant::now();
    let oracle = Oracle::with_cap(1500);
    let grid = verification_grid(&oracle);
    let (mut worst_ds, mut worst_pj) = (0.0f64, 0.0f64);
    let mut failures = Vec::new();
    for case in &grid {
        let s = scenario(case.n, case.m, case.d, case.statistics);
        let formula = delta_s_ignorant_partial(&s, case.theta).unwrap();
        let outcome = oracle.run_case(case).unwrap();
        let diff = (formula - outcome.delta_s_ignorant).abs();
        let mut pj_diff: f64 = 0.0;
        for (j, p) in pj_partial(case.n, case.m, case.theta).unwrap() {
            let q = outcome.sector_probabilities.get(&j).copied().unwrap_or(0.0);
            pj_diff = pj_diff.max((p - q).abs());
        }
        worst_ds = worst_ds.max(diff);
        worst_pj = worst_pj.max(pj_diff);
        if diff > 1e-7 || pj_diff > 1e-7 {
            failures.push(format!("{case:?}"));
        }
    }
    let mut dims = 0;
    for (total, d) in dimension_grid(&oracle) {
        for stat in both() {
            for (j, count) in oracle.sector_dimensions_bruteforce(total, d, stat).unwrap() {
                let expected = dim_sector(stat, total, d, j).unwrap_or_default();
                dims += 1;
                if expected != BigInt::from(count) {
                    failures.push(format!("dimension N={total} d={d} {stat} J={j}"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "{} cases, max |dS| diff {worst_ds:.1e}, max p_J diff {worst_pj:.1e}, {dims} dimensions, {} failures, {elapsed:.1?}",
            grid.len(),
            failures.len()
        ),
    )
}

fn exactness_identities() -> Verdict {
    let mut checked = 0;
    let mut bad = Vec::new();
    for total in 1..=12u64 {
        for n in 0..=total {
            let dist = pj_orthogonal(n, total - n).unwrap();
            let sum: BigRational = dist.probabilities().into_iter().map(|(_, p)| p).sum();
            checked += 1;
            if !sum.is_one() {
                bad.push(format!("sum p n={n} m={}", total - n));
            }
        }
        for d in 2..=8u64 {
            for stat in both() {
                let table = SectorDimensionTable::new(total, d, stat).unwrap();
                let expected = match stat {
                    Statistics::Boson => binomial(total + 2 * d - 1, total as i64),
                    Statistics::Fermion => binomial(2 * d, total as i64),
                };
                checked += 1;
                if table.total_dimension() != expected {
                    bad.push(format!("sum rule N={total} d={d} {stat}"));
                }
            }
        }
    }
    verdict(bad.is_empty(), format!("{checked} exact identities, {} failures {bad:?}", bad.len()))
}

fn expansion_identities() -> Verdict {
    let mut ok = true;
    for n in 1..=50u64 {
        for stat in both() {
            let expect = BigRational::new(BigInt::from(-((n * n) as i64)), BigInt::from(2));
            ok &= first_order_moment(n, stat).unwrap().is_zero();
            ok &= second_order_moment(n, stat).unwrap() == expect;
        }
    }
    let mut ratios = Vec::new();
    for stat in both() {
        for n in [2u64, 4, 8] {
            let residual = |d: u64| {
                let s = scenario(n, n, d, stat);
                delta_s_informed(&s) - delta_s_ignorant(&s).unwrap() - low_density_gap_prediction(n, d).unwrap()
            };
            let ratio = residual(1000) / residual(2000);
            ok &= (6.0..=10.0).contains(&ratio);
            ratios.push(format!("{stat} n={n}: {ratio:.3}"));
        }
    }
    verdict(ok, format!("moments exact for n <= 50; residual ratios {}", ratios.join(", ")))
}

fn large_n_asymptotes() -> Verdict {
    let ladder = [64u64, 256, 1024, 4096];
    let mut notes = Vec::new();
    let mut ok = true;

    let mut last = f64::INFINITY;
    let mut hp_gaps = Vec::new();
    for &(n, golden) in &HP_GOLDEN {
        let exact = pj_orthogonal(n, n).unwrap().shannon_entropy();
        let log_space = shannon_entropy_log_gamma(n, n).unwrap();
        ok &= (exact - golden).abs() <= 1e-9 && (log_space - golden).abs() <= 1e-9;
        let gap = (exact - hp_asymptote(n)).abs();
        ok &= gap < last;
        last = gap;
        hp_gaps.push(format!("{gap:.2e}"));
    }
    ok &= last < 0.02;
    notes.push(format!("|H - asym| {}", hp_gaps.join(" > ")));

    let mut bec_ok = true;
    let mut last = f64::INFINITY;
    let mut bec = Vec::new();
    for n in ladder {
        let v = delta_s_ignorant(&scenario(n, n, 2, Statistics::Boson)).unwrap() - bec_limit_mean(n);
        bec_ok &= v.abs() < last;
        last = v.abs();
        bec.push(format!("{v:+.2e}"));
    }
    ok &= bec_ok;
    notes.push(format!(
        "d=2 mean residual {} ({})",
        bec.join(", "),
        if bec_ok { "decreasing" } else { "NOT monotone" }
    ));

    let variance = work_variance(&scenario(1024, 1024, 2, Statistics::Boson)).unwrap();
    let rel = variance / BEC_VARIANCE_LIMIT - 1.0;
    ok &= rel.abs() <= 0.05;
    notes.push(format!("variance n=1024 {variance:.6} ({:+.2}% of pi^2/24)", 100.0 * rel));
    verdict(ok, notes.join("; "))
}

fn fermion_minimal_dimension() -> Verdict {
    let mut worst: f64 = 0.0;
    for n in 1..=500u64 {
        // ln C(2n, n) = Σ_{k=n+1}^{2n} ln k - Σ_{k=1}^{n} ln k
        let ln_c = compensated_sum((n + 1..=2 * n).map(|k| (k as f64).ln()).chain((1..=n).map(|k| -(k as f64).ln())));
        let got = delta_s_informed(&scenario(n, n, 2 * n, Statistics::Fermion));
        worst = worst.max((got - 2.0 * ln_c).abs());
    }
    let ignorant = delta_s_ignorant(&scenario(500, 500, 1000, Statistics::Fermion)).unwrap();
    let ratio = ignorant / (2000.0 * LN_2);
    verdict(
        worst <= 1e-10 && (0.9..=1.0).contains(&ratio),
        format!("max informed error {worst:.1e}; ignorant / (4n ln 2) at n=500 = {ratio:.6}"),
    )
}

fn run_sweep(args: &[&str]) -> Vec<Vec<f64>> {
    let out = Command::new(env!("CARGO_BIN_EXE_gibbs-mix"))
        .arg("sweep")
        .args(args)
        .output()
        .expect("sweep runs");
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let mut rdr = csv::Reader::from_reader(out.stdout.as_slice());
    rdr.records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect()
}

fn figure_reproduction() -> Verdict {
    let mut ok = true;
    let mut notes = Vec::new();
    for (n, step) in [(4u64, 2u64), (24, 48)] {
        let d_max = 10 * n * n;
        for stat in ["boson", "fermion"] {
            let rows = run_sweep(&[
                "--n", &n.to_string(), "--statistics", stat, "--param", "d",
                "--from", &(2 * n).to_string(), "--to", &d_max.to_string(), "--step", &step.to_string(),
            ]);
            let last = rows.last().unwrap();
            ok &= last[0] == d_max as f64;
            let classical = 2.0 * n as f64 * LN_2;
            let info_rel = last[1] / classical - 1.0;
            let gap_rel = (last[1] - last[2]) / last[6] - 1.0;
            ok &= info_rel.abs() <= 0.02 && gap_rel.abs() <= 0.05;
            notes.push(format!("n={n} {stat}: info {:+.2}%, gap/H {:+.3}%", 100.0 * info_rel, 100.0 * gap_rel));
        }
    }
    let rows = run_sweep(&[
        "--n", "15", "--m", "15", "--d", "50", "--statistics", "boson", "--param", "theta",
        "--from", "0", "--to", &PI.to_string(), "--step", &(PI / 100.0).to_string(),
    ]);
    let last = rows.last().unwrap();
    ok &= last[0] == PI;
    for col in [1, 2] {
        ok &= rows[..rows.len() - 1].iter().all(|r| r[col] < last[col]);
    }
    let identical = delta_s_identical(&scenario(15, 15, 50, Statistics::Boson)).unwrap();
    let first = &rows[0];
    let err0 = (first[1] - identical).abs().max((first[2] - identical).abs());
    ok &= first[0] == 0.0 && err0 <= 1e-10;
    notes.push(format!("theta sweep: {} rows, max at pi, |dS(0) - dS_iden| {err0:.1e}", rows.len()));
    verdict(ok, notes.join("; "))
}

fn theta_endpoints() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in 0..=10u64 {
        for m in 0..=10u64 {
            if n + m == 0 {
                continue;
            }
            for d in (2..=40u64).step_by(2) {
                for stat in both() {
                    let Ok(s) = MixingScenario::new(n, m, d, stat) else { continue };
                    let identical = delta_s_identical(&s).unwrap();
                    let pairs = [
                        (delta_s_informed_partial(&s, SpinAngle::ORTHOGONAL).unwrap(), delta_s_informed(&s)),
                        (delta_s_informed_partial(&s, SpinAngle::IDENTICAL).unwrap(), identical),
                        (delta_s_ignorant_partial(&s, SpinAngle::ORTHOGONAL).unwrap(), delta_s_ignorant(&s).unwrap()),
                        (delta_s_ignorant_partial(&s, SpinAngle::IDENTICAL).unwrap(), identical),
                    ];
                    for (a, b) in pairs {
                        worst = worst.max((a - b).abs());
                    }
                    count += 1;
                }
            }
        }
    }
    verdict(worst <= 1e-12, format!("{count} scenarios, max difference {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("worked example closed forms", worked_example),
        ("oracle equivalence", oracle_equivalence),
        ("exactness identities", exactness_identities),
        ("expansion identities and low-density residual", expansion_identities),
        ("large-n asymptotes", large_n_asymptotes),
        ("fermion minimal dimension", fermion_minimal_dimension),
        ("figure reproduction", figure_reproduction),
        ("theta endpoint consistency", theta_endpoints),
    ];
    let mut failed = 0;
    for (index, (name, check)) in criteria.iter().enumerate() {
        let v = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            verdict(false, format!("panicked: {msg}"))
        });
        if !v.pass {
            failed += 1;
        }
        println!("criterion {} [{}] {name}: {}", index + 1, if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
