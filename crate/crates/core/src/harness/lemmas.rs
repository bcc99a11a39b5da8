//! Seeded property suites for the disc lemma and the tail lemma.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::bpbcorrect::tail_bound_check;
use crate::cmodulus::{DeltaProfile, ProfileSpec};
use crate::coperator::{op_norm, CKOperator, OracleConfig};
use crate::cspace::{lemma_basic_l_bound, ComplexScalar, ComplexVec, SpaceDescriptor};
use crate::error::Result;
use crate::measures::PointSet;

#[derive(Clone, Debug, PartialEq)]
pub struct BasicLReport {
    pub samples: usize,
    pub draws: usize,
    pub exceptions: usize,
    pub min_slack: f64,
}

/// Draws `samples` points `(w, λ, t)` in the closed disc satisfying
/// `Re(wλ) > 1 − t`, concentrated near the boundary where the bound is
/// tight, and counts violations of `|w − λ̄| < √(2t)`.
pub fn basic_l_suite(samples: usize, seed: u64) -> Result<BasicLReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = BasicLReport {
        samples: 0,
        draws: 0,
        exceptions: 0,
        min_slack: f64::INFINITY,
    };
    while report.samples < samples {
        report.draws += 1;
        let t = 10f64.powf(rng.random_range(-8.0..-0.001));
        let lam_r = 1.0 - t * rng.random::<f64>().powi(2);
        let lam = ComplexScalar::from_polar(lam_r, rng.random_range(0.0..std::f64::consts::TAU));
        let spread = 1.2 * (2.0 * t).sqrt();
        let w = ComplexScalar::from_polar(
            1.0 - t * rng.random::<f64>().powi(2),
            -lam.arg() + rng.random_range(-spread..spread),
        );
        let r = lemma_basic_l_bound(w, lam, t)?;
        if !r.holds_hypothesis {
            continue;
        }
        report.samples += 1;
        report.min_slack = report.min_slack.min(r.slack());
        if !(r.slack() > 0.0) {
            report.exceptions += 1;
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TailSuiteReport {
    pub triples: usize,
    pub draws: usize,
    pub exceptions: usize,
    /// Smallest `ε − ‖T(I − P_A)‖` seen.
    pub min_slack: f64,
}

const TAIL_SPACES: [(f64, usize); 4] = [(2.0, 1), (2.0, 2), (1.0, 2), (3.0, 3)];
const TAIL_EPS: [f64; 4] = [0.2, 0.4, 0.6, 0.8];

/// Draws `triples` applicable `(T, A, ε)` (unit `T` whose columns off `A`
/// are shrunk so the premise tends to hold) and checks
/// `‖T(I − P_A)‖ ≤ ε + tol`.
pub fn tail_bound_suite(triples: usize, seed: u64, tol: f64) -> Result<TailSuiteReport> {
    let profiles: Vec<DeltaProfile> = TAIL_SPACES
        .iter()
        .map(|&(p, m)| DeltaProfile::new(SpaceDescriptor::lp(p, m)?, ProfileSpec::Auto))
        .collect::<Result<_>>()?;
    for profile in &profiles {
        for &eps in &TAIL_EPS {
            profile.evaluate(eps);
        }
    }
    let oracle = OracleConfig::default();
    let outcomes: Vec<(usize, f64)> = (0..triples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut draws = 0;
            loop {
                draws += 1;
                let k = rng.random_range(0..profiles.len());
                let profile = &profiles[k];
                let space = *profile.space();
                let eps = TAIL_EPS[rng.random_range(0..TAIL_EPS.len())];
                let n = rng.random_range(2..=5);
                let a = PointSet::filter(n, |_| rng.random_bool(0.5));
                if a.is_empty() || a.len() == n {
                    continue;
                }
                let shrink = 10f64.powf(rng.random_range(-4.0..-0.5));
                let columns = (0..n)
                    .map(|j| {
                        let scale = if a.contains(j) { 1.0 } else { shrink };
                        ComplexVec::from_raw(
                            (0..space.dim)
                                .map(|_| {
                                    let re: f64 = rng.sample(StandardNormal);
                                    let im: f64 = rng.sample(StandardNormal);
                                    ComplexScalar::new(re, im) * scale
                                })
                                .collect(),
                        )
                    })
                    .collect();
                let raw = CKOperator::new(columns, space).expect("consistent dimensions");
                let norm = op_norm(&raw, &oracle).value;
                if norm <= 0.0 {
                    continue;
                }
                let t = raw.scale(ComplexScalar::new(1.0 / norm, 0.0));
                let report = tail_bound_check(&t, &a, eps, profile, &oracle);
                if report.applicable {
                    return (draws, report.bound - report.tail_norm);
                }
            }
        })
        .collect();
    Ok(TailSuiteReport {
        triples,
        draws: outcomes.iter().map(|o| o.0).sum(),
        exceptions: outcomes.iter().filter(|o| !(o.1 >= -tol)).count(),
        min_slack: outcomes.iter().map(|o| o.1).fold(f64::INFINITY, f64::min),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_l_small_run() {
        let r = basic_l_suite(2000, 1).unwrap();
        assert_eq!(r.samples, 2000);
        assert_eq!(r.exceptions, 0);
        assert!(r.min_slack > 0.0);
    }

    #[test]
    fn tail_small_run() {
        let r = tail_bound_suite(20, 2, 1e-9).unwrap();
        assert_eq!(r.triples, 20);
        assert_eq!(r.exceptions, 0);
    }
}
