//! The ℂ-modulus of convexity
//!
//! ```text
//! δ(ε) = inf { sup_{|λ|=1} ‖x + λεy‖ − 1 : ‖x‖ = ‖y‖ = 1 }
//! ```
//!
//! and the constants of the correction derived from a lower bound on it.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::circle::maximize_on_circle;
use crate::cspace::{lp_norm, ComplexScalar, ComplexVec, Exponent, SpaceDescriptor};
use crate::error::{Error, Result};

/// Unit-norm tolerance for the arguments of [`circle_sup`].
const UNIT_TOL: f64 = 1e-9;

/// `sup_{|λ|=1} ‖x + λ·eps·y‖ − 1` for unit `x`, `y`.
pub fn circle_sup(
    space: &SpaceDescriptor,
    x: &ComplexVec,
    y: &ComplexVec,
    eps: f64,
) -> Result<f64> {
    let nx = lp_norm(x, space)?;
    let ny = lp_norm(y, space)?;
    if (nx - 1.0).abs() > UNIT_TOL || (ny - 1.0).abs() > UNIT_TOL {
        return Err(Error::Domain(format!(
            "circle_sup needs unit vectors, got norms {nx} and {ny}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps = {eps} must be positive")));
    }
    Ok(circle_sup_raw(space, x.as_slice(), y.as_slice(), eps, 64))
}

fn circle_sup_raw(
    space: &SpaceDescriptor,
    x: &[ComplexScalar],
    y: &[ComplexScalar],
    eps: f64,
    samples: usize,
) -> f64 {
    let mut buf = vec![ComplexScalar::new(0.0, 0.0); x.len()];
    let peak = maximize_on_circle(
        |theta| {
            let lam = ComplexScalar::from_polar(eps, theta);
            for ((b, &a), &c) in buf.iter_mut().zip(x).zip(y) {
                *b = a + lam * c;
            }
            space.norm_of(&buf)
        },
        samples,
        1e-12,
        None,
    );
    peak.value - 1.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    /// Random unit pairs `(x, y)` refined independently.
    pub starts: usize,
    pub circle_samples: usize,
    /// Pattern-search step at which refinement stops.
    pub min_step: f64,
    pub seed: u64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            starts: 64,
            circle_samples: 64,
            min_step: 1e-7,
            seed: 0xde17a,
        }
    }
}

fn normalize(space: &SpaceDescriptor, v: &mut [ComplexScalar]) -> bool {
    let n = space.norm_of(v);
    if n == 0.0 || !n.is_finite() {
        return false;
    }
    for z in v.iter_mut() {
        *z /= n;
    }
    true
}

fn random_unit(space: &SpaceDescriptor, rng: &mut ChaCha8Rng) -> Vec<ComplexScalar> {
    loop {
        let mut v: Vec<ComplexScalar> = (0..space.dim)
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                ComplexScalar::new(re, im)
            })
            .collect();
        if normalize(space, &mut v) {
            return v;
        }
    }
}

/// Alternating compass search on `(x, y)` with renormalization after every
/// move. Returns the smallest objective reached.
fn refine_pair(
    space: &SpaceDescriptor,
    mut x: Vec<ComplexScalar>,
    mut y: Vec<ComplexScalar>,
    eps: f64,
    cfg: &EstimatorConfig,
) -> f64 {
    let objective = |x: &[ComplexScalar], y: &[ComplexScalar]| {
        circle_sup_raw(space, x, y, eps, cfg.circle_samples)
    };
    let mut best = objective(&x, &y);
    let mut step = 0.5;
    let moves = [
        ComplexScalar::new(1.0, 0.0),
        ComplexScalar::new(-1.0, 0.0),
        ComplexScalar::new(0.0, 1.0),
        ComplexScalar::new(0.0, -1.0),
    ];
    while step >= cfg.min_step {
        let mut improved = false;
        for block in 0..2 {
            for k in 0..space.dim {
                for dir in moves {
                    let (mut tx, mut ty) = (x.clone(), y.clone());
                    let target = if block == 0 { &mut tx } else { &mut ty };
                    target[k] += dir * step;
                    if !normalize(space, target) {
                        continue;
                    }
                    let value = objective(&tx, &ty);
                    if value < best {
                        best = value;
                        x = tx;
                        y = ty;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

/// Upper estimate of `δ(eps)`: the least objective found over
/// `cfg.starts` refined random unit pairs.
pub fn estimate_delta(space: &SpaceDescriptor, eps: f64, cfg: &EstimatorConfig) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut best = f64::INFINITY;
    for _ in 0..cfg.starts.max(1) {
        let x = random_unit(space, &mut rng);
        let y = random_unit(space, &mut rng);
        best = best.min(refine_pair(space, x, y, eps, cfg));
    }
    best.max(0.0)
}

/// `δ(ε) = ε` on ℂ.
pub fn delta_complex_line(eps: f64) -> f64 {
    eps
}

/// `δ(ε) = √(1+ε²) − 1` on complex Hilbert space, attained at orthogonal pairs.
pub fn delta_hilbert(eps: f64) -> f64 {
    let e2 = eps * eps;
    e2 / ((1.0 + e2).sqrt() + 1.0)
}

/// How a [`DeltaProfile`] obtains its lower bound on `δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ProfileSpec {
    /// Analytic where known (ℂ, `ℓ_2`), otherwise estimated with safety 0.5.
    Auto,
    AnalyticComplex,
    AnalyticHilbert,
    Estimated {
        safety: f64,
    },
}

pub const DEFAULT_SAFETY: f64 = 0.5;

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Auto => write!(f, "auto"),
            ProfileSpec::AnalyticComplex => write!(f, "analytic:c"),
            ProfileSpec::AnalyticHilbert => write!(f, "analytic:l2"),
            ProfileSpec::Estimated { safety } => write!(f, "estimated:{safety}"),
        }
    }
}

impl FromStr for ProfileSpec {
    type Err = Error;

    /// `auto`, `analytic:c`, `analytic:l2`, `estimated`, `estimated:<r>` or
    /// `estimated:safety=<r>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "auto" => return Ok(ProfileSpec::Auto),
            "analytic:c" => return Ok(ProfileSpec::AnalyticComplex),
            "analytic:l2" => return Ok(ProfileSpec::AnalyticHilbert),
            "estimated" => {
                return Ok(ProfileSpec::Estimated {
                    safety: DEFAULT_SAFETY,
                })
            }
            _ => {}
        }
        let rest = s
            .strip_prefix("estimated:")
            .ok_or_else(|| Error::InvalidConfig(format!("unknown delta profile `{s}`")))?;
        let value = rest.strip_prefix("safety=").unwrap_or(rest);
        let safety: f64 = value
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("bad safety factor `{value}`")))?;
        if !(safety > 0.0 && safety <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "safety factor {safety} must lie in (0, 1]"
            )));
        }
        Ok(ProfileSpec::Estimated { safety })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProfileKind {
    Analytic,
    Estimated,
}

/// A lower bound `ε ↦ δ(ε)` for one range space. Estimated values are
/// memoized per `ε`, so clones share work.
#[derive(Clone, Debug)]
pub struct DeltaProfile {
    space: SpaceDescriptor,
    spec: ProfileSpec,
    estimator: EstimatorConfig,
    cache: Arc<Mutex<HashMap<u64, f64>>>,
}

impl DeltaProfile {
    pub fn new(space: SpaceDescriptor, spec: ProfileSpec) -> Result<Self> {
        Self::with_estimator(space, spec, EstimatorConfig::default())
    }

    pub fn with_estimator(
        space: SpaceDescriptor,
        spec: ProfileSpec,
        estimator: EstimatorConfig,
    ) -> Result<Self> {
        let spec = match spec {
            ProfileSpec::Auto if space.is_complex_line() => ProfileSpec::AnalyticComplex,
            ProfileSpec::Auto if space.p == Exponent::Finite(2.0) => ProfileSpec::AnalyticHilbert,
            ProfileSpec::Auto => ProfileSpec::Estimated {
                safety: DEFAULT_SAFETY,
            },
            ProfileSpec::AnalyticComplex if !space.is_complex_line() => {
                return Err(Error::InvalidConfig(format!(
                    "analytic:c applies to one-dimensional spaces, not {space}"
                )))
            }
            ProfileSpec::AnalyticHilbert if space.p != Exponent::Finite(2.0) => {
                return Err(Error::InvalidConfig(format!(
                    "analytic:l2 applies to p = 2, not {space}"
                )))
            }
            other => other,
        };
        Ok(DeltaProfile {
            space,
            spec,
            estimator,
            cache: Arc::new(Mutex::new(HashMap::new())),
        })
    }

    pub fn space(&self) -> &SpaceDescriptor {
        &self.space
    }

    /// The resolved spec (never `Auto`).
    pub fn spec(&self) -> ProfileSpec {
        self.spec
    }

    pub fn kind(&self) -> ProfileKind {
        match self.spec {
            ProfileSpec::Estimated { .. } => ProfileKind::Estimated,
            _ => ProfileKind::Analytic,
        }
    }

    pub fn safety(&self) -> f64 {
        match self.spec {
            ProfileSpec::Estimated { safety } => safety,
            _ => 1.0,
        }
    }

    pub fn evaluate(&self, eps: f64) -> f64 {
        match self.spec {
            ProfileSpec::AnalyticComplex => delta_complex_line(eps),
            ProfileSpec::AnalyticHilbert => delta_hilbert(eps),
            ProfileSpec::Estimated { safety } => {
                let key = eps.to_bits();
                if let Some(&d) = self.cache.lock().expect("delta cache").get(&key) {
                    return d;
                }
                let d = safety * estimate_delta(&self.space, eps, &self.estimator);
                self.cache.lock().expect("delta cache").insert(key, d);
                d
            }
            ProfileSpec::Auto => unreachable!("auto is resolved at construction"),
        }
    }
}

/// The constants of the correction for a given `ε` and `d = δ(ε/9)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterPack {
    pub epsilon: f64,
    pub d: f64,
    pub eta: f64,
    pub s: f64,
    pub beta: f64,
    pub eps1: f64,
    /// `d/(1+d)`: the tail lemma is applied at `ε/9`.
    pub tail_threshold: f64,
}

impl ParameterPack {
    pub fn from_delta(epsilon: f64, d: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Domain(format!(
                "epsilon = {epsilon} must lie in (0, 1)"
            )));
        }
        if !(d > 0.0) {
            return Err(Error::NotUniformlyConvex { d });
        }
        let e2 = epsilon * epsilon;
        let ratio = d / (1.0 + d);
        let eta = e2 * ratio * ratio / 10945.0;
        let s = eta * (2.0 - epsilon) * e2 / (2.0 * (e2 + 2.0 * 144.0));
        Ok(ParameterPack {
            epsilon,
            d,
            eta,
            s,
            beta: e2 / (2.0 * 144.0),
            eps1: ratio / 6.0,
            tail_threshold: ratio,
        })
    }
}

pub fn parameter_pack(eps: f64, profile: &DeltaProfile) -> Result<ParameterPack> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Domain(format!("epsilon = {eps} must lie in (0, 1)")));
    }
    ParameterPack::from_delta(eps, profile.evaluate(eps / 9.0))
}
