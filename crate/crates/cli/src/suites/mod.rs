//! Verification suites. Every check draws from its own generator, seeded
//! from the run seed and the check id, so a check reports the same
//! residual whether it runs alone or inside `all`.

use std::hash::{DefaultHasher, Hash, Hasher};
use std::time::Instant;

use kepler_geom::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{CheckRecord, VerificationReport};

mod families;
mod flows;
mod metrics;
mod regularization;
mod structures;
mod toric;

pub type Rng64 = ChaCha8Rng;

pub struct Check {
    pub id: &'static str,
    pub invariant: &'static str,
    pub tolerance: f64,
    /// Default sample count; `--samples` replaces it.
    pub samples: usize,
    pub run: fn(&mut Rng64, usize) -> Result<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Suite {
    Regularization,
    Structures,
    Metrics,
    Toric,
    Families,
    Flows,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Regularization => "regularization",
            Suite::Structures => "structures",
            Suite::Metrics => "metrics",
            Suite::Toric => "toric",
            Suite::Families => "families",
            Suite::Flows => "flows",
            Suite::All => "all",
        }
    }
}

pub fn checks(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Regularization => regularization::checks(),
        Suite::Structures => structures::checks(),
        Suite::Metrics => metrics::checks(),
        Suite::Toric => toric::checks(),
        Suite::Families => families::checks(),
        Suite::Flows => flows::checks(),
        Suite::All => {
            [Suite::Regularization, Suite::Structures, Suite::Metrics, Suite::Toric, Suite::Families, Suite::Flows]
                .into_iter()
                .flat_map(checks)
                .collect()
        }
    }
}

pub fn check_rng(seed: u64, id: &str) -> Rng64 {
    let mut h = DefaultHasher::new();
    (seed, id).hash(&mut h);
    ChaCha8Rng::seed_from_u64(h.finish())
}

pub fn run_check(check: &Check, seed: u64, samples: Option<usize>, tol_scale: f64) -> CheckRecord {
    let n = samples.unwrap_or(check.samples).max(1);
    let mut rng = check_rng(seed, check.id);
    let tolerance = check.tolerance * tol_scale;
    let (residual, error) = match (check.run)(&mut rng, n) {
        Ok(r) => (r, None),
        Err(e) => (f64::NAN, Some(e.to_string())),
    };
    CheckRecord {
        id: check.id.into(),
        invariant: check.invariant.into(),
        residual,
        tolerance,
        pass: residual <= tolerance,
        samples: n,
        error,
    }
}

pub fn run_suite(suite: Suite, seed: u64, samples: Option<usize>, tol_scale: f64) -> VerificationReport {
    let start = Instant::now();
    let records: Vec<CheckRecord> = checks(suite).iter().map(|c| run_check(c, seed, samples, tol_scale)).collect();
    let passed = records.iter().filter(|r| r.pass).count();
    VerificationReport {
        suite: suite.name().into(),
        seed,
        tol_scale,
        failed: records.len() - passed,
        passed,
        checks: records,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Largest value of `f(k)` over `k < samples`; NaN wins.
pub(crate) fn worst(samples: usize, mut f: impl FnMut(usize) -> Result<f64>) -> Result<f64> {
    let mut m: f64 = 0.0;
    for k in 0..samples {
        let v = f(k)?;
        if v.is_nan() {
            return Ok(f64::NAN);
        }
        m = m.max(v);
    }
    Ok(m)
}

pub(crate) fn uniform(n: usize, r: &mut Rng64, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| r.gen_range(lo..hi)).collect()
}
