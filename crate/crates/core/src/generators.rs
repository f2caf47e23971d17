//! Synthetic stationary processes for size and power studies.
//!
//! Linear AR(1)/MA(1) models and i.i.d. noise with a choice of innovation
//! law, optionally pushed through `g(y) = F⁻¹(Φ((y - μ)/σ))` to give a
//! Gaussian process a prescribed marginal `F` while keeping its ordinal
//! structure.
//!
//! Specs are written as `ma1(theta=0.5,innov=gaussian)` or
//! `ar1(theta=0.5)|subordinate(pareto(1,2))`.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Cauchy, Distribution, Exp1, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::nulldist::{run_test, TestConfig};
use crate::partitions::Partition;
use crate::rng::derive_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ar1,
    Ma1,
    Iid,
}

/// Innovation law of the linear recursion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    Gaussian,
    /// `exp(Z) - e^{1/2}` with `Z ~ N(0, 1)`.
    LognormalCentered,
    /// `Z²`.
    Chi2One,
    ExpOne,
    StudentT(f64),
    Cauchy,
}

impl Innovation {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Innovation::Gaussian => StandardNormal.sample(rng),
            Innovation::LognormalCentered => {
                let z: f64 = StandardNormal.sample(rng);
                z.exp() - 0.5f64.exp()
            }
            Innovation::Chi2One => {
                let z: f64 = StandardNormal.sample(rng);
                z * z
            }
            Innovation::ExpOne => Exp1.sample(rng),
            Innovation::StudentT(nu) => StudentT::new(nu).expect("validated dof").sample(rng),
            Innovation::Cauchy => Cauchy::new(0.0, 1.0).expect("unit scale").sample(rng),
        }
    }
}

impl fmt::Display for Innovation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Innovation::Gaussian => f.write_str("gaussian"),
            Innovation::LognormalCentered => f.write_str("lognormal"),
            Innovation::Chi2One => f.write_str("chi2"),
            Innovation::ExpOne => f.write_str("exp"),
            Innovation::StudentT(nu) => write!(f, "t({nu})"),
            Innovation::Cauchy => f.write_str("cauchy"),
        }
    }
}

impl FromStr for Innovation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_call(s.trim())?;
        let no_args = |inn: Innovation| {
            if args.is_empty() {
                Ok(inn)
            } else {
                Err(Error::InvalidSpec(format!(
                    "innovation '{name}' takes no arguments"
                )))
            }
        };
        match name.as_str() {
            "gaussian" | "normal" => no_args(Innovation::Gaussian),
            "lognormal" | "lognormal_centered" => no_args(Innovation::LognormalCentered),
            "chi2" | "chi2_1" => no_args(Innovation::Chi2One),
            "exp" | "exp_1" => no_args(Innovation::ExpOne),
            "cauchy" => no_args(Innovation::Cauchy),
            "t" | "student_t" => {
                let nu = match args.as_slice() {
                    [] => 1.0,
                    [nu] => parse_num(nu)?,
                    _ => return Err(Error::InvalidSpec("t takes one argument".into())),
                };
                if !(nu > 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "degrees of freedom {nu} must be > 0"
                    )));
                }
                Ok(Innovation::StudentT(nu))
            }
            "t1" => no_args(Innovation::StudentT(1.0)),
            other => Err(Error::InvalidSpec(format!("unknown innovation '{other}'"))),
        }
    }
}

/// Target marginal law for subordination, evaluated through its quantile
/// function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Marginal {
    Normal { mu: f64, sigma: f64 },
    Pareto { scale: f64, shape: f64 },
    Laplace { mu: f64, b: f64 },
    Logistic { mu: f64, s: f64 },
    Cauchy { mu: f64, gamma: f64 },
}

impl Marginal {
    /// Quantile at probability `lower`, with `upper = 1 - lower` supplied
    /// separately to keep precision in the right tail.
    pub fn quantile_split(&self, lower: f64, upper: f64) -> f64 {
        match *self {
            Marginal::Normal { mu, sigma } => {
                if lower < 0.5 {
                    mu + sigma * normal_quantile(lower)
                } else {
                    mu - sigma * normal_quantile(upper)
                }
            }
            Marginal::Pareto { scale, shape } => scale * upper.powf(-1.0 / shape),
            Marginal::Laplace { mu, b } => {
                if lower < 0.5 {
                    mu + b * (2.0 * lower).ln()
                } else {
                    mu - b * (2.0 * upper).ln()
                }
            }
            Marginal::Logistic { mu, s } => mu + s * (lower.ln() - upper.ln()),
            Marginal::Cauchy { mu, gamma } => {
                if lower < 0.5 {
                    mu - gamma / (PI * lower).tan()
                } else {
                    mu + gamma / (PI * upper).tan()
                }
            }
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.quantile_split(u, 1.0 - u)
    }

    fn validate(&self) -> Result<()> {
        let (name, scale) = match *self {
            Marginal::Normal { sigma, .. } => ("normal", sigma),
            Marginal::Pareto { scale, shape } => {
                if !(shape > 0.0) {
                    return Err(Error::InvalidSpec(format!(
                        "pareto shape {shape} must be > 0"
                    )));
                }
                ("pareto", scale)
            }
            Marginal::Laplace { b, .. } => ("laplace", b),
            Marginal::Logistic { s, .. } => ("logistic", s),
            Marginal::Cauchy { gamma, .. } => ("cauchy", gamma),
        };
        if !(scale > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "{name} scale {scale} must be > 0"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Marginal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marginal::Normal { mu, sigma } => write!(f, "normal({mu},{sigma})"),
            Marginal::Pareto { scale, shape } => write!(f, "pareto({scale},{shape})"),
            Marginal::Laplace { mu, b } => write!(f, "laplace({mu},{b})"),
            Marginal::Logistic { mu, s } => write!(f, "logistic({mu},{s})"),
            Marginal::Cauchy { mu, gamma } => write!(f, "cauchy({mu},{gamma})"),
        }
    }
}

impl FromStr for Marginal {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_call(s.trim())?;
        let nums = args
            .iter()
            .map(|a| parse_num(a))
            .collect::<Result<Vec<_>>>()?;
        let two = |a: f64, b: f64| -> Result<(f64, f64)> {
            match nums.as_slice() {
                [] => Ok((a, b)),
                [x, y] => Ok((*x, *y)),
                _ => Err(Error::InvalidSpec(format!("{name} takes two parameters"))),
            }
        };
        let m = match name.as_str() {
            "normal" | "gaussian" => {
                let (mu, sigma) = two(0.0, 1.0)?;
                Marginal::Normal { mu, sigma }
            }
            "pareto" => {
                let (scale, shape) = two(1.0, 2.0)?;
                Marginal::Pareto { scale, shape }
            }
            "laplace" => {
                let (mu, b) = two(1.0, 4.0)?;
                Marginal::Laplace { mu, b }
            }
            "logistic" => {
                let (mu, s) = two(100.0, 1.0)?;
                Marginal::Logistic { mu, s }
            }
            "cauchy" => {
                let (mu, gamma) = two(1.0, 12.0)?;
                Marginal::Cauchy { mu, gamma }
            }
            other => return Err(Error::UnknownMarginal(other.to_string())),
        };
        m.validate()?;
        Ok(m)
    }
}

/// Standard normal CDF as `(Φ(z), 1 - Φ(z))`, each accurate in its tail.
pub fn normal_cdf_split(z: f64) -> (f64, f64) {
    (0.5 * erfc(-z / SQRT_2), 0.5 * erfc(z / SQRT_2))
}

/// Standard normal quantile: Acklam's rational approximation refined by
/// one Halley step.
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let p_low = 0.024_25;
    let x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    // Halley refinement
    let e = normal_cdf_split(x).0 - p;
    let u = e * (2.0 * PI).sqrt() * (x * x / 2.0).exp();
    x - u / (1.0 + x * u / 2.0)
}

/// Applies `g(y) = F⁻¹(Φ((y - μ)/σ))` elementwise.
pub fn subordinate(series: &[f64], marginal: &Marginal, mu: f64, sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument(format!("sigma {sigma} must be > 0")));
    }
    marginal.validate()?;
    Ok(series
        .iter()
        .map(|&y| {
            let (lower, upper) = normal_cdf_split((y - mu) / sigma);
            marginal.quantile_split(lower, upper)
        })
        .collect())
}

/// A synthetic process: family, coefficient, innovations and optional
/// subordination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessSpec {
    pub family: Family,
    pub theta: f64,
    pub innovation: Innovation,
    pub subordination: Option<Marginal>,
    pub burn_in: usize,
}

impl ProcessSpec {
    pub fn new(family: Family, theta: f64, innovation: Innovation) -> Self {
        ProcessSpec {
            family,
            theta,
            innovation,
            subordination: None,
            burn_in: 1000,
        }
    }

    pub fn ar1(theta: f64, innovation: Innovation) -> Self {
        Self::new(Family::Ar1, theta, innovation)
    }

    pub fn ma1(theta: f64, innovation: Innovation) -> Self {
        Self::new(Family::Ma1, theta, innovation)
    }

    pub fn iid(innovation: Innovation) -> Self {
        Self::new(Family::Iid, 0.0, innovation)
    }

    pub fn subordinated(mut self, marginal: Marginal) -> Self {
        self.subordination = Some(marginal);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.theta.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "theta {} is not finite",
                self.theta
            )));
        }
        if self.family == Family::Ar1 {
            if self.theta.abs() >= 1.0 {
                return Err(Error::UnstableAr(self.theta));
            }
            if self.burn_in < 100 {
                return Err(Error::InvalidSpec(format!(
                    "AR(1) burn-in {} is below 100",
                    self.burn_in
                )));
            }
        }
        if let Innovation::StudentT(nu) = self.innovation {
            if !(nu > 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "degrees of freedom {nu} must be > 0"
                )));
            }
        }
        if let Some(m) = &self.subordination {
            m.validate()?;
            if self.innovation != Innovation::Gaussian {
                return Err(Error::InvalidSpec(
                    "subordination needs a Gaussian base process (innov=gaussian)".into(),
                ));
            }
        }
        Ok(())
    }

    /// Stationary mean and standard deviation of the Gaussian base process.
    pub fn gaussian_moments(&self) -> (f64, f64) {
        let var = match self.family {
            Family::Ar1 => 1.0 / (1.0 - self.theta * self.theta),
            Family::Ma1 => 1.0 + self.theta * self.theta,
            Family::Iid => 1.0,
        };
        (0.0, var.sqrt())
    }
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Ar1 => write!(
                f,
                "ar1(theta={},innov={},burn_in={})",
                self.theta, self.innovation, self.burn_in
            )?,
            Family::Ma1 => write!(f, "ma1(theta={},innov={})", self.theta, self.innovation)?,
            Family::Iid => write!(f, "iid(innov={})", self.innovation)?,
        }
        if let Some(m) = &self.subordination {
            write!(f, "|subordinate({m})")?;
        }
        Ok(())
    }
}

impl FromStr for ProcessSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut stages = s.split('|');
        let base = stages.next().unwrap_or("").trim();
        let (name, args) = split_call(base)?;
        let family = match name.as_str() {
            "ar1" => Family::Ar1,
            "ma1" => Family::Ma1,
            "iid" => Family::Iid,
            other => return Err(Error::InvalidSpec(format!("unknown process '{other}'"))),
        };
        let mut spec = ProcessSpec::new(family, 0.0, Innovation::Gaussian);
        for arg in args {
            let (key, value) = arg
                .split_once('=')
                .ok_or_else(|| Error::InvalidSpec(format!("expected key=value, got '{arg}'")))?;
            match key.trim() {
                "theta" if family != Family::Iid => spec.theta = parse_num(value)?,
                "innov" | "innovation" => spec.innovation = value.parse()?,
                "burn_in" | "burnin" => {
                    spec.burn_in = value
                        .trim()
                        .parse()
                        .map_err(|_| Error::InvalidSpec(format!("bad burn-in '{value}'")))?
                }
                other => {
                    return Err(Error::InvalidSpec(format!(
                        "unknown parameter '{other}' for {name}"
                    )))
                }
            }
        }
        for stage in stages {
            let (op, inner) = split_call(stage.trim())?;
            if op != "subordinate" || inner.len() != 1 {
                return Err(Error::InvalidSpec(format!(
                    "expected subordinate(<marginal>), got '{}'",
                    stage.trim()
                )));
            }
            spec.subordination = Some(inner[0].parse()?);
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Splits `name(a, b(c, d))` into the name and its top-level arguments.
fn split_call(s: &str) -> Result<(String, Vec<String>)> {
    let Some(open) = s.find('(') else {
        return Ok((s.to_ascii_lowercase(), Vec::new()));
    };
    let inner = s[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::InvalidSpec(format!("unbalanced parentheses in '{s}'")))?;
    let mut args = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in inner.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                args.push(std::mem::take(&mut current).trim().to_string());
                continue;
            }
            _ => {}
        }
        if depth < 0 {
            return Err(Error::InvalidSpec(format!(
                "unbalanced parentheses in '{s}'"
            )));
        }
        current.push(ch);
    }
    if depth != 0 {
        return Err(Error::InvalidSpec(format!(
            "unbalanced parentheses in '{s}'"
        )));
    }
    if !current.trim().is_empty() || !args.is_empty() {
        args.push(current.trim().to_string());
    }
    Ok((s[..open].trim().to_ascii_lowercase(), args))
}

fn parse_num(s: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::InvalidSpec(format!("bad number '{}'", s.trim())))
}

/// Generates `n` observations; deterministic given `seed`.
pub fn generate(spec: &ProcessSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::InvalidArgument("series length must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = spec.theta;
    let innov = spec.innovation;
    let series: Vec<f64> = match spec.family {
        Family::Iid => (0..n).map(|_| innov.sample(&mut rng)).collect(),
        Family::Ma1 => {
            let mut prev = innov.sample(&mut rng);
            (0..n)
                .map(|_| {
                    let e = innov.sample(&mut rng);
                    let x = e + theta * prev;
                    prev = e;
                    x
                })
                .collect()
        }
        Family::Ar1 => {
            let mut x = 0.0;
            for _ in 0..spec.burn_in {
                x = theta * x + innov.sample(&mut rng);
            }
            (0..n)
                .map(|_| {
                    x = theta * x + innov.sample(&mut rng);
                    x
                })
                .collect()
        }
    };
    match &spec.subordination {
        Some(m) => {
            let (mu, sigma) = spec.gaussian_moments();
            subordinate(&series, m, mu, sigma)
        }
        None => Ok(series),
    }
}

/// Rejection rate over independent replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerResult {
    pub process: String,
    pub partition: String,
    pub n: usize,
    pub replicates: usize,
    pub alpha: f64,
    pub rejection_rate: f64,
    pub mean_p_value: f64,
    pub p_values: Vec<f64>,
    pub statistics: Vec<f64>,
}

/// Runs the test on `replicates` independent series of length `n`.
///
/// Replicate `r` draws its series from seed `derive_seed(seed, r, 0)` and
/// its null sample from `derive_seed(seed, r, 1)`.
pub fn power_experiment(
    spec: &ProcessSpec,
    partition: &Partition,
    n: usize,
    replicates: usize,
    config: &TestConfig,
) -> Result<PowerResult> {
    if replicates == 0 {
        return Err(Error::InvalidArgument("need at least one replicate".into()));
    }
    spec.validate()?;
    let d = partition.d();
    let outcomes: Vec<Result<(f64, f64, bool)>> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let series = generate(spec, n, derive_seed(config.seed, r as u64, 0))?;
            let cfg = TestConfig {
                seed: derive_seed(config.seed, r as u64, 1),
                ..config.clone()
            };
            let rep = run_test(&series, d, partition, &cfg)?;
            Ok((rep.p_value, rep.statistic, rep.reject))
        })
        .collect();
    let mut p_values = Vec::with_capacity(replicates);
    let mut statistics = Vec::with_capacity(replicates);
    let mut rejections = 0usize;
    for o in outcomes {
        let (p, s, rej) = o?;
        p_values.push(p);
        statistics.push(s);
        rejections += rej as usize;
    }
    Ok(PowerResult {
        process: spec.to_string(),
        partition: partition.name().to_string(),
        n,
        replicates,
        alpha: config.alpha,
        rejection_rate: rejections as f64 / replicates as f64,
        mean_p_value: p_values.iter().sum::<f64>() / replicates as f64,
        p_values,
        statistics,
    })
}
