//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::collections::HashMap;
use std::process::Command;
use std::time::{Duration, Instant};

use ordsym::generators::{
    generate, power_experiment, subordinate, Innovation, Marginal, ProcessSpec,
};
use ordsym::spectral::{eigenpairs, operator_matrix};
use ordsym::{
    count_patterns, gaussian_partition, pattern_codes, pattern_sequence, reflection_partition,
    reversal_partition, run_test, symbolic_correlation, u_statistic, Partition, PatternCounts,
    TestConfig,
};
use ordsym_cli::reproduce::mismatched_partition;
use ordsym_cli::{run_experiment, Experiment, ReproduceOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

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

// ---------- independent oracles ----------

/// All permutations of 1..=d in lexicographic order.
fn permutations(d: usize) -> Vec<Vec<u8>> {
    fn rec(prefix: &mut Vec<u8>, left: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if left.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..left.len() {
            let v = left.remove(i);
            prefix.push(v);
            rec(prefix, left, out);
            prefix.pop();
            left.insert(i, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (1..=d as u8).collect(), &mut out);
    out
}

/// Positions (1-based) of the window sorted ascending, ties putting the
/// later position first.
fn oracle_pattern(window: &[f64]) -> Vec<u8> {
    let mut idx: Vec<usize> = (0..window.len()).collect();
    idx.sort_by(|&a, &b| window[a].partial_cmp(&window[b]).unwrap().then(b.cmp(&a)));
    idx.into_iter().map(|i| (i + 1) as u8).collect()
}

fn oracle_codes(series: &[f64], d: usize, lookup: &HashMap<Vec<u8>, u32>) -> Vec<u32> {
    series
        .windows(d)
        .map(|w| lookup[&oracle_pattern(w)])
        .collect()
}

fn oracle_h(x: u32, y: u32, partition: &Partition) -> f64 {
    let mut v = if x == y { -1.0 } else { 0.0 };
    for g in partition.groups() {
        if g.contains(&x) && g.contains(&y) {
            v += 1.0 / g.len() as f64;
        }
    }
    v
}

fn builders(d: usize) -> Vec<Partition> {
    vec![
        reversal_partition(d).unwrap(),
        reflection_partition(d).unwrap(),
        gaussian_partition(d).unwrap(),
    ]
}

// ---------- criteria ----------

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for case in 0..100 {
        let d = 2 + case % 3;
        let lookup: HashMap<Vec<u8>, u32> = permutations(d)
            .into_iter()
            .enumerate()
            .map(|(i, p)| (p, i as u32))
            .collect();
        let len = rng.random_range(d + 1..=200);
        // coarse grid values so that ties occur
        let x: Vec<f64> = (0..len)
            .map(|_| rng.random_range(0..40) as f64 / 4.0)
            .collect();
        let codes = oracle_codes(&x, d, &lookup);
        if pattern_codes(&x, d).unwrap() != codes {
            return outcome(
                false,
                format!("pattern codes differ from oracle in case {case}"),
            );
        }
        let n = codes.len();
        let counts = PatternCounts::from_codes(d, &codes).unwrap();
        let mut same = 0u64;
        for i in 0..n {
            for j in 0..n {
                if i != j && codes[i] == codes[j] {
                    same += 1;
                }
            }
        }
        let s_brute = same as f64 / (n * (n - 1)) as f64;
        worst = worst.max((symbolic_correlation(&counts).unwrap() - s_brute).abs());
        for p in builders(d) {
            let mut sum = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        sum += oracle_h(codes[i], codes[j], &p);
                    }
                }
            }
            let u_brute = sum / (n * n) as f64;
            worst = worst.max((u_statistic(&counts, &p).unwrap() - u_brute).abs());
            checked += 1;
        }
    }
    outcome(
        worst <= 1e-12,
        format!("100 series, {checked} partition checks, max |count - pairwise| = {worst:.2e}"),
    )
}

fn spectral_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let (mut eig_err, mut orth_err, mut trace_err, mut degen_err) = (0f64, 0f64, 0f64, 0f64);
    for case in 0..20 {
        let d = 2 + case % 3;
        let parts = builders(d);
        let part = &parts[case % parts.len()];
        let weights: Vec<f64> = (0..part.num_groups())
            .map(|_| rng.random_range(0.1..1.0))
            .collect();
        let total: f64 = weights
            .iter()
            .zip(part.groups())
            .map(|(w, g)| w * g.len() as f64)
            .sum();
        let means: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let per: Vec<f64> = (0..part.num_patterns() as u32)
            .map(|id| means[part.group_of(id)])
            .collect();
        let (values, vectors, _) = eigenpairs(part, &means).unwrap();
        let op = operator_matrix(part, &per).unwrap();
        for (i, &lambda) in values.iter().enumerate() {
            let g = vectors.column(i);
            let mg = &op * g;
            for k in 0..per.len() {
                eig_err = eig_err.max((mg[k] - lambda * g[k]).abs());
            }
            for j in 0..values.len() {
                let h = vectors.column(j);
                let ip: f64 = (0..per.len()).map(|k| g[k] * h[k] * per[k]).sum();
                orth_err = orth_err.max((ip - if i == j { 1.0 } else { 0.0 }).abs());
            }
        }
        let trace: f64 = values.iter().sum();
        trace_err = trace_err.max((trace - (means.iter().sum::<f64>() - 1.0)).abs());
        for x in 0..per.len() as u32 {
            let s: f64 = (0..per.len() as u32)
                .map(|y| oracle_h(x, y, part) * per[y as usize])
                .sum();
            degen_err = degen_err.max(s.abs());
        }
    }
    outcome(
        eig_err <= 1e-10 && orth_err <= 1e-10 && trace_err <= 1e-12 && degen_err <= 1e-14,
        format!(
            "eigen {eig_err:.1e}, orthonormality {orth_err:.1e}, trace {trace_err:.1e}, degeneracy {degen_err:.1e}"
        ),
    )
}

fn setting_a_moments() -> Outcome {
    let opts = ReproduceOptions::new(Experiment::SettingA, TestConfig::default().seed);
    let rep = run_experiment(Experiment::SettingA, &opts).unwrap();
    let null = &rep.illustrations[0].null;
    outcome(
        (0.30..=0.40).contains(&null.mean) && (0.18..=0.29).contains(&null.variance),
        format!(
            "N = {} draws: mean {:.4} (want [0.30, 0.40]), variance {:.4} (want [0.18, 0.29])",
            null.count, null.mean, null.variance
        ),
    )
}

fn rate(spec: &str, partition: &Partition, n: usize) -> f64 {
    let spec: ProcessSpec = spec.parse().unwrap();
    power_experiment(&spec, partition, n, 300, &TestConfig::default())
        .unwrap()
        .rejection_rate
}

fn size_control() -> Outcome {
    let r = rate(
        "ma1(theta=0.5,innov=gaussian)|subordinate(pareto(1,2))",
        &gaussian_partition(3).unwrap(),
        2000,
    );
    outcome(
        (0.02..=0.09).contains(&r),
        format!(
            "Pareto-subordinated MA(1), n = 2000, 300 replicates: rate {r:.3} (want [0.02, 0.09])"
        ),
    )
}

fn power() -> Outcome {
    let part = mismatched_partition();
    let ar = rate("ar1(theta=0.5)", &part, 500);
    let ma = rate("ma1(theta=0.5)", &part, 500);
    outcome(
        ar >= 0.90 && ma >= 0.97,
        format!(
            "n = 500, 300 replicates: AR(1) {ar:.3} (want >= 0.90), MA(1) {ma:.3} (want >= 0.97)"
        ),
    )
}

fn innovation_contrast() -> Outcome {
    let part = gaussian_partition(3).unwrap();
    let lognormal = rate("ar1(theta=0.5,innov=lognormal)", &part, 500);
    let t_one = rate("ar1(theta=0.5,innov=t(1))", &part, 250);
    outcome(
        lognormal >= 0.95 && t_one <= 0.30,
        format!(
            "AR(1) lognormal n = 500: {lognormal:.3} (want >= 0.95); AR(1) t1 n = 250: {t_one:.3} (want <= 0.30)"
        ),
    )
}

fn subordination_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let marginals = [
        Marginal::Pareto {
            scale: 1.0,
            shape: 2.0,
        },
        Marginal::Laplace { mu: 1.0, b: 4.0 },
        Marginal::Logistic { mu: 100.0, s: 1.0 },
        Marginal::Cauchy {
            mu: 1.0,
            gamma: 12.0,
        },
    ];
    for k in 0..20 {
        let theta = rng.random_range(-0.9..0.9);
        let spec = if k % 2 == 0 {
            ProcessSpec::ar1(theta, Innovation::Gaussian)
        } else {
            ProcessSpec::ma1(theta, Innovation::Gaussian)
        };
        let n = rng.random_range(50..2000);
        let y = generate(&spec, n, rng.random()).unwrap();
        let (mu, sigma) = spec.gaussian_moments();
        let base = pattern_sequence(&y, 3).unwrap();
        for m in &marginals {
            let x = subordinate(&y, m, mu, sigma).unwrap();
            if pattern_sequence(&x, 3).unwrap() != base {
                return outcome(false, format!("series {k} changed patterns under {m}"));
            }
        }
    }
    outcome(
        true,
        "20 Gaussian series x 4 marginals: identical pattern sequences",
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ordsym");
    let run = |threads: &str| {
        Command::new(bin)
            .args(["--threads", threads, "reproduce", "settingA", "--seed", "7"])
            .output()
            .expect("binary runs")
    };
    let one = run("1");
    let eight = run("8");
    if !one.status.success() || !eight.status.success() {
        return outcome(
            false,
            format!("non-zero exit: {}", String::from_utf8_lossy(&one.stderr)),
        );
    }
    outcome(
        one.stdout == eight.stdout && !one.stdout.is_empty(),
        format!(
            "reproduce settingA --seed 7: {} bytes, threads 1 vs 8 identical = {}",
            one.stdout.len(),
            one.stdout == eight.stdout
        ),
    )
}

fn iid_calibration() -> Outcome {
    let x = generate(&ProcessSpec::iid(Innovation::Gaussian), 100_000, 2025).unwrap();
    let counts = count_patterns(&x, 3).unwrap();
    let s = symbolic_correlation(&counts).unwrap();
    let max_dev = counts
        .frequencies()
        .iter()
        .map(|f| (f - 1.0 / 6.0).abs())
        .fold(0.0, f64::max);
    let report = run_test(
        &x,
        3,
        &gaussian_partition(3).unwrap(),
        &TestConfig::default(),
    )
    .unwrap();
    let c = report.c_hat;
    outcome(
        (s - 1.0 / 6.0).abs() <= 0.005 && max_dev <= 0.01 && (c - 1.0 / 6.0).abs() <= 0.01,
        format!("S_n {s:.5}, max |freq - 1/6| {max_dev:.5}, c_hat {c:.5}"),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "1 oracle equivalence",
            oracle_equivalence,
            Duration::from_secs(10),
        ),
        (
            "2 spectral correctness",
            spectral_correctness,
            Duration::from_secs(5),
        ),
        (
            "3 null moments, Gaussian MA(1)",
            setting_a_moments,
            Duration::from_secs(120),
        ),
        (
            "4 size under subordination",
            size_control,
            Duration::from_secs(900),
        ),
        (
            "5 power, mismatched partition",
            power,
            Duration::from_secs(600),
        ),
        (
            "6 non-Gaussian innovations",
            innovation_contrast,
            Duration::from_secs(600),
        ),
        (
            "7 subordination invariance",
            subordination_invariance,
            Duration::from_secs(60),
        ),
        (
            "8 thread-count determinism",
            determinism,
            Duration::from_secs(120),
        ),
        (
            "9 i.i.d. calibration",
            iid_calibration,
            Duration::from_secs(60),
        ),
    ];
    let mut failed = 0;
    for (name, check, budget) in criteria {
        let t0 = Instant::now();
        let out = check();
        let elapsed = t0.elapsed();
        let pass = out.pass && elapsed <= budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {name}: {} [{:.2}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 9 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
