use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::cmodulus::{parameter_pack, DeltaProfile, ProfileSpec};
use crate::coperator::{op_norm, CKOperator, OracleConfig};
use crate::cspace::{ComplexScalar, ComplexVec, SpaceDescriptor};
use crate::error::{Error, Result};

/// How `f0` was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstanceMode {
    /// `f0` is the oracle's maximizer.
    Attain,
    /// The maximizer with tiny entrywise phase noise.
    Perturb,
    /// Supplied by the user.
    Custom,
}

impl fmt::Display for InstanceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InstanceMode::Attain => "attain",
            InstanceMode::Perturb => "perturb",
            InstanceMode::Custom => "custom",
        })
    }
}

impl FromStr for InstanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "attain" => Ok(InstanceMode::Attain),
            "perturb" => Ok(InstanceMode::Perturb),
            "custom" => Ok(InstanceMode::Custom),
            other => Err(Error::InvalidConfig(format!(
                "unknown mode `{other}` (expected attain, perturb or custom)"
            ))),
        }
    }
}

/// A correction problem: a unit operator, a unit function, and a target ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct Instance {
    pub n: usize,
    pub space: SpaceDescriptor,
    pub operator: CKOperator,
    pub f0: ComplexVec,
    pub epsilon: f64,
    pub mode: InstanceMode,
}

#[derive(Deserialize)]
struct RawInstance {
    n: usize,
    space: SpaceDescriptor,
    operator: CKOperator,
    f0: ComplexVec,
    epsilon: f64,
    mode: InstanceMode,
}

impl TryFrom<RawInstance> for Instance {
    type Error = String;

    fn try_from(raw: RawInstance) -> std::result::Result<Self, String> {
        if raw.operator.n() != raw.n {
            return Err(format!(
                "field `operator` has {} columns but `n` is {}",
                raw.operator.n(),
                raw.n
            ));
        }
        if raw.f0.len() != raw.n {
            return Err(format!(
                "field `f0` has length {} but `n` is {}",
                raw.f0.len(),
                raw.n
            ));
        }
        if *raw.operator.range() != raw.space {
            return Err(format!(
                "field `space` is {} but the operator maps into {}",
                raw.space,
                raw.operator.range()
            ));
        }
        if !raw.epsilon.is_finite() {
            return Err("field `epsilon` must be finite".into());
        }
        Ok(Instance {
            n: raw.n,
            space: raw.space,
            operator: raw.operator,
            f0: raw.f0,
            epsilon: raw.epsilon,
            mode: raw.mode,
        })
    }
}

const MAX_ATTEMPTS: u64 = 5;

fn gaussian(rng: &mut ChaCha8Rng) -> ComplexScalar {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    ComplexScalar::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws a random unit operator with complex Gaussian columns and a unit
/// `f0` at (attain) or next to (perturb) its norming point. Deterministic
/// in all arguments.
pub fn gen_instance(
    seed: u64,
    n: usize,
    space: SpaceDescriptor,
    mode: InstanceMode,
    epsilon: f64,
) -> Result<Instance> {
    gen_instance_with_profile(
        seed,
        n,
        &DeltaProfile::new(space, ProfileSpec::Auto)?,
        mode,
        epsilon,
    )
}

/// [`gen_instance`] with the profile that sizes perturbations supplied by
/// the caller (its space is the range space), so repeated calls can share
/// one memoized estimate.
pub fn gen_instance_with_profile(
    seed: u64,
    n: usize,
    profile: &DeltaProfile,
    mode: InstanceMode,
    epsilon: f64,
) -> Result<Instance> {
    let space = *profile.space();
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if mode == InstanceMode::Custom {
        return Err(Error::InvalidConfig(
            "custom instances are read from a file, not generated".into(),
        ));
    }
    let mut last_sweeps = 0;
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let columns: Vec<ComplexVec> = (0..n)
            .map(|_| ComplexVec::from_raw((0..space.dim).map(|_| gaussian(&mut rng)).collect()))
            .collect();
        let raw = CKOperator::new(columns, space)?;
        let oracle = OracleConfig {
            seed: rng.random(),
            ..OracleConfig::default()
        };
        let first = op_norm(&raw, &oracle);
        if !first.converged || first.value <= 0.0 {
            last_sweeps = first.iterations;
            continue;
        }
        let operator = raw.scale(ComplexScalar::new(1.0 / first.value, 0.0));
        let norm = op_norm(&operator, &oracle);
        if !norm.converged {
            last_sweeps = norm.iterations;
            continue;
        }
        let f0 = match mode {
            InstanceMode::Attain => norm.maximizer,
            _ => {
                // ‖T f0 − T h‖ ≤ amplitude · Σ_j ‖T e_j‖, so this amplitude keeps
                // ‖T f0‖ > 1 − s even where 1 − s rounds to 1.
                let s = parameter_pack(epsilon, profile)?.s;
                let col_sum: f64 = operator
                    .columns()
                    .iter()
                    .map(|c| space.norm_of(c.as_slice()))
                    .sum();
                let amplitude = (s / 2.0).min(1e-13) / col_sum.max(1.0);
                ComplexVec::from_raw(
                    norm.maximizer
                        .iter()
                        .map(|&h| {
                            let angle = rng.random_range(-1.0..=1.0) * amplitude;
                            h * ComplexScalar::from_polar(1.0, angle)
                        })
                        .collect(),
                )
            }
        };
        return Ok(Instance {
            n,
            space,
            operator,
            f0,
            epsilon,
            mode,
        });
    }
    Err(Error::OracleNotConverged {
        sweeps: last_sweeps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coperator::apply;

    #[test]
    fn generation_is_deterministic() {
        let l2 = SpaceDescriptor::lp(2.0, 3).unwrap();
        let a = gen_instance(7, 3, l2, InstanceMode::Attain, 0.6).unwrap();
        let b = gen_instance(7, 3, l2, InstanceMode::Attain, 0.6).unwrap();
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }

    #[test]
    fn attain_mode_hits_the_norm() {
        let l3 = SpaceDescriptor::lp(3.0, 2).unwrap();
        let inst = gen_instance(11, 4, l3, InstanceMode::Attain, 0.3).unwrap();
        let norm = op_norm(&inst.operator, &OracleConfig::default()).value;
        let value = l3.norm_of(apply(&inst.operator, &inst.f0).unwrap().as_slice());
        assert!((value - norm).abs() <= 1e-12);
        assert!((norm - 1.0).abs() <= 1e-9);
        assert!((inst.f0.sup_norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn perturb_mode_keeps_the_hypothesis() {
        let c = SpaceDescriptor::complex_line();
        let inst = gen_instance(3, 3, c, InstanceMode::Perturb, 0.9).unwrap();
        let profile = DeltaProfile::new(c, ProfileSpec::Auto).unwrap();
        let s = parameter_pack(0.9, &profile).unwrap().s;
        let value = c.norm_of(apply(&inst.operator, &inst.f0).unwrap().as_slice());
        assert!(value > 1.0 - s);
    }

    #[test]
    fn perturb_mode_stays_within_the_gap() {
        // s ≈ 1e-17 here, below the resolution of 1 − s.
        let l3 = SpaceDescriptor::lp(3.0, 2).unwrap();
        let inst = gen_instance(31, 2, l3, InstanceMode::Perturb, 0.3).unwrap();
        let attain = gen_instance(31, 2, l3, InstanceMode::Attain, 0.3).unwrap();
        assert_eq!(inst.operator, attain.operator);
        let profile = DeltaProfile::new(l3, ProfileSpec::Auto).unwrap();
        let s = parameter_pack(0.3, &profile).unwrap().s;
        assert!(inst.f0.sub(&attain.f0).sup_norm() <= s / 2.0);
    }

    #[test]
    fn custom_mode_is_not_generated() {
        let c = SpaceDescriptor::complex_line();
        assert!(matches!(
            gen_instance(1, 2, c, InstanceMode::Custom, 0.5),
            Err(Error::InvalidConfig(_))
        ));
    }
}
