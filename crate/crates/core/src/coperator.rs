//! Operators `C(K) → Y` on a finite `K`, stored as the images of the point
//! masses (one range-space column per point).
//!
//! The norm of such an operator is the maximum of `‖T h‖` over the unimodular
//! polytorus `{h : |h_j| = 1}`, since those are the extreme points of the unit
//! ball of `ℓ_∞^n(ℂ)`. [`op_norm`] searches the polytorus by multi-start
//! coordinate-wise phase ascent; [`op_norm_grid`] is a brute-force grid used
//! as an independent check.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circle::{golden_max, maximize_on_circle};
use crate::cspace::{pair_slices, ComplexScalar, ComplexVec, Exponent, SpaceDescriptor};
use crate::error::{Error, Result};
use crate::measures::{FiniteMeasure, PointSet};

/// Largest column count accepted by the grid oracle.
pub const GRID_MAX_COLUMNS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawOperator")]
pub struct CKOperator {
    columns: Vec<ComplexVec>,
    range: SpaceDescriptor,
}

#[derive(Deserialize)]
struct RawOperator {
    columns: Vec<ComplexVec>,
    range: SpaceDescriptor,
}

impl TryFrom<RawOperator> for CKOperator {
    type Error = Error;
    fn try_from(raw: RawOperator) -> Result<Self> {
        CKOperator::new(raw.columns, raw.range)
    }
}

impl CKOperator {
    pub fn new(columns: Vec<ComplexVec>, range: SpaceDescriptor) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::Domain("operator needs at least one column".into()));
        }
        for col in &columns {
            if col.len() != range.dim {
                return Err(Error::Dimension {
                    expected: range.dim,
                    found: col.len(),
                });
            }
        }
        Ok(CKOperator { columns, range })
    }

    pub fn zero(n: usize, range: SpaceDescriptor) -> Self {
        CKOperator {
            columns: vec![ComplexVec::zeros(range.dim); n],
            range,
        }
    }

    /// Number of points of `K`.
    pub fn n(&self) -> usize {
        self.columns.len()
    }

    pub fn range(&self) -> &SpaceDescriptor {
        &self.range
    }

    pub fn columns(&self) -> &[ComplexVec] {
        &self.columns
    }

    pub fn column(&self, j: usize) -> &ComplexVec {
        &self.columns[j]
    }

    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(ComplexVec::is_zero)
    }

    pub fn scale(&self, c: ComplexScalar) -> Self {
        CKOperator {
            columns: self.columns.iter().map(|col| col.scale(c)).collect(),
            range: self.range,
        }
    }

    /// `self − other`.
    pub fn sub(&self, other: &CKOperator) -> Result<Self> {
        if self.n() != other.n() || self.range != other.range {
            return Err(Error::Dimension {
                expected: self.n(),
                found: other.n(),
            });
        }
        Ok(CKOperator {
            columns: self
                .columns
                .iter()
                .zip(&other.columns)
                .map(|(a, b)| a.sub(b))
                .collect(),
            range: self.range,
        })
    }

    /// Adds the rank-one operator `f ↦ (Σ_j coeffs_j f_j) · image`, i.e.
    /// column `j` gains `coeffs_j · image`.
    pub fn add_rank_one(&self, coeffs: &ComplexVec, image: &ComplexVec) -> Result<Self> {
        if coeffs.len() != self.n() {
            return Err(Error::Dimension {
                expected: self.n(),
                found: coeffs.len(),
            });
        }
        if image.len() != self.range.dim {
            return Err(Error::Dimension {
                expected: self.range.dim,
                found: image.len(),
            });
        }
        let columns = self
            .columns
            .iter()
            .zip(coeffs.iter())
            .map(|(col, &a)| {
                ComplexVec::from_raw(
                    col.iter()
                        .zip(image.iter())
                        .map(|(x, y)| x + a * y)
                        .collect(),
                )
            })
            .collect();
        Ok(CKOperator {
            columns,
            range: self.range,
        })
    }

    fn apply_slice(&self, f: &[ComplexScalar]) -> Vec<ComplexScalar> {
        let mut out = vec![ComplexScalar::new(0.0, 0.0); self.range.dim];
        for (col, &fj) in self.columns.iter().zip(f) {
            if fj == ComplexScalar::new(0.0, 0.0) {
                continue;
            }
            for (o, &c) in out.iter_mut().zip(col.iter()) {
                *o += fj * c;
            }
        }
        out
    }

    /// `‖T f‖` in the range space.
    pub fn image_norm(&self, f: &ComplexVec) -> Result<f64> {
        let y = apply(self, f)?;
        Ok(self.range.norm_of(y.as_slice()))
    }
}

/// `T f = Σ_j f_j · columns_j`.
pub fn apply(t: &CKOperator, f: &ComplexVec) -> Result<ComplexVec> {
    if f.len() != t.n() {
        return Err(Error::Dimension {
            expected: t.n(),
            found: f.len(),
        });
    }
    Ok(ComplexVec::from_raw(t.apply_slice(f.as_slice())))
}

/// The measure `T*(y*)`: mass `j` is `y*(columns_j)`.
pub fn adjoint_measure(t: &CKOperator, ystar: &ComplexVec) -> Result<FiniteMeasure> {
    if ystar.len() != t.range.dim {
        return Err(Error::Dimension {
            expected: t.range.dim,
            found: ystar.len(),
        });
    }
    let masses = t
        .columns
        .iter()
        .map(|col| pair_slices(ystar.as_slice(), col.as_slice()))
        .collect();
    Ok(FiniteMeasure::new(ComplexVec::from_raw(masses)))
}

/// `T P_B`: columns outside `b` are zeroed.
pub fn project_columns(t: &CKOperator, b: &PointSet) -> CKOperator {
    let zero = ComplexVec::zeros(t.range.dim);
    CKOperator {
        columns: t
            .columns
            .iter()
            .enumerate()
            .map(|(j, col)| {
                if b.contains(j) {
                    col.clone()
                } else {
                    zero.clone()
                }
            })
            .collect(),
        range: t.range,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub starts: usize,
    pub circle_samples: usize,
    pub tol: f64,
    pub max_sweeps: usize,
    pub seed: u64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            starts: 32,
            circle_samples: 64,
            tol: 1e-12,
            max_sweeps: 200,
            seed: 0x0b9b_5eed,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NormResult {
    pub value: f64,
    pub maximizer: ComplexVec,
    pub converged: bool,
    /// Sweeps performed by the winning start.
    pub iterations: usize,
}

/// `‖r + z·c‖` without materializing the sum.
fn combo_norm(r: &[ComplexScalar], c: &[ComplexScalar], z: ComplexScalar, p: Exponent) -> f64 {
    let entry = |k: usize| r[k] + z * c[k];
    let max = (0..r.len()).fold(0.0_f64, |m, k| m.max(entry(k).norm()));
    match p {
        Exponent::Infinity => max,
        _ if max == 0.0 => 0.0,
        Exponent::Finite(1.0) => (0..r.len()).map(|k| entry(k).norm()).sum(),
        Exponent::Finite(2.0) => {
            let s: f64 = (0..r.len()).map(|k| (entry(k) / max).norm_sqr()).sum();
            max * s.sqrt()
        }
        Exponent::Finite(p) if p.fract() == 0.0 && p <= 16.0 => {
            let k_pow = p as i32;
            let s: f64 = (0..r.len())
                .map(|k| (entry(k).norm() / max).powi(k_pow))
                .sum();
            max * s.powf(1.0 / p)
        }
        Exponent::Finite(p) => {
            let s: f64 = (0..r.len()).map(|k| (entry(k).norm() / max).powf(p)).sum();
            max * s.powf(1.0 / p)
        }
    }
}

struct Ascent {
    value: f64,
    h: Vec<ComplexScalar>,
    converged: bool,
    sweeps: usize,
}

/// Coordinate-wise phase ascent from one unimodular start.
fn ascend(t: &CKOperator, start: Vec<ComplexScalar>, cfg: &OracleConfig) -> Ascent {
    let p = t.range.p;
    let mut h = start;
    let mut y = t.apply_slice(&h);
    let mut value = t.range.norm_of(&y);
    let mut converged = false;
    let mut sweeps = 0;
    let mut r = vec![ComplexScalar::new(0.0, 0.0); t.range.dim];
    while sweeps < cfg.max_sweeps {
        sweeps += 1;
        let before = value;
        for (j, col) in t.columns.iter().enumerate() {
            if col.is_zero() {
                continue;
            }
            let c = col.as_slice();
            for k in 0..r.len() {
                r[k] = y[k] - h[j] * c[k];
            }
            let peak = maximize_on_circle(
                |theta| combo_norm(&r, c, ComplexScalar::from_polar(1.0, theta), p),
                cfg.circle_samples,
                cfg.tol,
                Some(h[j].arg()),
            );
            h[j] = ComplexScalar::from_polar(1.0, peak.theta);
            for k in 0..r.len() {
                y[k] = r[k] + h[j] * c[k];
            }
        }
        y = t.apply_slice(&h);
        value = t.range.norm_of(&y);
        if value - before < cfg.tol {
            converged = true;
            break;
        }
    }
    Ascent {
        value,
        h,
        converged,
        sweeps,
    }
}

/// Multi-start polytorus ascent for `‖T‖`. The value is a certified lower
/// bound (it is `‖T h‖` for the returned unimodular `h`).
pub fn op_norm(t: &CKOperator, cfg: &OracleConfig) -> NormResult {
    op_norm_with_hints(t, cfg, &[])
}

/// Like [`op_norm`], with extra starting points tried right after the
/// all-ones start. Hints are projected onto the polytorus entrywise.
pub fn op_norm_with_hints(t: &CKOperator, cfg: &OracleConfig, hints: &[ComplexVec]) -> NormResult {
    let n = t.n();
    if t.is_zero() {
        return NormResult {
            value: 0.0,
            maximizer: ComplexVec::ones(n),
            converged: true,
            iterations: 0,
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts: Vec<Vec<ComplexScalar>> = Vec::with_capacity(cfg.starts.max(1) + hints.len());
    starts.push(vec![ComplexScalar::new(1.0, 0.0); n]);
    for hint in hints.iter().filter(|h| h.len() == n) {
        starts.push(hint.phases().into_inner());
    }
    for _ in 1..cfg.starts.max(1) {
        starts.push(
            (0..n)
                .map(|_| ComplexScalar::from_polar(1.0, rng.random::<f64>() * TAU))
                .collect(),
        );
    }
    let mut best: Option<Ascent> = None;
    for start in starts {
        let run = ascend(t, start, cfg);
        // Ties keep the earlier start.
        if best.as_ref().is_none_or(|b| run.value > b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one start");
    NormResult {
        value: best.value,
        maximizer: ComplexVec::from_raw(best.h),
        converged: best.converged,
        iterations: best.sweeps,
    }
}

fn grid_phases(t: &CKOperator, g: usize) -> Result<(usize, Vec<ComplexScalar>)> {
    let n = t.n();
    if n > GRID_MAX_COLUMNS {
        return Err(Error::Complexity {
            columns: n,
            max: GRID_MAX_COLUMNS,
        });
    }
    if g == 0 {
        return Err(Error::Domain(
            "grid needs at least one point per phase".into(),
        ));
    }
    let roots = (0..g)
        .map(|k| ComplexScalar::from_polar(1.0, TAU * k as f64 / g as f64))
        .collect();
    Ok((n, roots))
}

/// Best grid point `h_j = e^{2πi k_j/G}`. The first phase is pinned to 1,
/// which loses nothing: `‖T(ωh)‖ = ‖T h‖` and the grid is closed under
/// rotation by grid angles.
fn check_grid_size(t: &CKOperator) -> Result<()> {
    if t.n() > GRID_MAX_COLUMNS {
        return Err(Error::Complexity {
            columns: t.n(),
            max: GRID_MAX_COLUMNS,
        });
    }
    Ok(())
}

fn grid_argmax(t: &CKOperator, g: usize) -> Result<(f64, Vec<usize>)> {
    let (n, roots) = grid_phases(t, g)?;
    let mut idx = vec![0usize; n];
    let mut best = (f64::NEG_INFINITY, idx.clone());
    let mut h = vec![ComplexScalar::new(1.0, 0.0); n];
    loop {
        for j in 0..n {
            h[j] = roots[idx[j]];
        }
        let value = t.range.norm_of(&t.apply_slice(&h));
        if value > best.0 {
            best = (value, idx.clone());
        }
        // Odometer over coordinates 1..n.
        let mut j = 1;
        loop {
            if j >= n {
                return Ok(best);
            }
            idx[j] += 1;
            if idx[j] < g {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
    }
}

/// Brute-force maximum of `‖T h‖` over the phase grid with `g` points per
/// coordinate. Exponential in the column count, so limited to
/// [`GRID_MAX_COLUMNS`] columns.
pub fn op_norm_grid(t: &CKOperator, g: usize) -> Result<f64> {
    check_grid_size(t)?;
    if t.is_zero() {
        return Ok(0.0);
    }
    Ok(grid_argmax(t, g)?.0)
}

/// Grid maximum followed by a local golden-section polish that keeps every
/// phase inside its winning grid cell.
pub fn op_norm_grid_refined(t: &CKOperator, g: usize) -> Result<f64> {
    check_grid_size(t)?;
    if t.is_zero() {
        return Ok(0.0);
    }
    let (mut value, idx) = grid_argmax(t, g)?;
    let cell = TAU / g as f64;
    let centers: Vec<f64> = idx.iter().map(|&k| cell * k as f64).collect();
    let mut theta = centers.clone();
    let eval = |theta: &[f64]| {
        let h: Vec<ComplexScalar> = theta
            .iter()
            .map(|&a| ComplexScalar::from_polar(1.0, a))
            .collect();
        t.range.norm_of(&t.apply_slice(&h))
    };
    for _ in 0..500 {
        let before = value;
        for j in 1..t.n() {
            let mut trial = theta.clone();
            let peak = golden_max(
                |a| {
                    trial[j] = a;
                    eval(&trial)
                },
                centers[j] - cell,
                centers[j] + cell,
                1e-13,
            );
            if peak.value > value {
                value = peak.value;
                theta[j] = peak.theta;
            }
        }
        if value - before <= 1e-15 {
            break;
        }
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn op(cols: &[&[(f64, f64)]], range: SpaceDescriptor) -> CKOperator {
        CKOperator::new(
            cols.iter()
                .map(|col| ComplexVec::from_pairs(col).unwrap())
                .collect(),
            range,
        )
        .unwrap()
    }

    fn identity2(p: f64) -> CKOperator {
        op(
            &[&[(1.0, 0.0), (0.0, 0.0)], &[(0.0, 0.0), (1.0, 0.0)]],
            SpaceDescriptor::lp(p, 2).unwrap(),
        )
    }

    fn skew() -> CKOperator {
        op(
            &[&[(1.0, 0.0), (0.0, 0.0)], &[(0.6, 0.0), (0.0, 0.8)]],
            SpaceDescriptor::lp(2.0, 2).unwrap(),
        )
    }

    #[test]
    fn apply_examples() {
        let f = ComplexVec::from_pairs(&[(1.0, 0.0), (0.0, 1.0)]).unwrap();
        assert_eq!(apply(&identity2(2.0), &f).unwrap(), f);
        assert!(apply(&skew(), &ComplexVec::zeros(2)).unwrap().is_zero());
        let single = op(&[&[(0.0, 2.0)]], SpaceDescriptor::complex_line());
        let out = apply(&single, &ComplexVec::from_pairs(&[(0.5, 0.0)]).unwrap()).unwrap();
        assert_eq!(out[0], c(0.0, 1.0));
        assert!(matches!(
            apply(&single, &ComplexVec::ones(2)),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn adjoint_examples() {
        let mu = adjoint_measure(
            &identity2(2.0),
            &ComplexVec::from_pairs(&[(1.0, 0.0), (0.0, 0.0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(mu.masses().as_slice(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let ab = ComplexVec::from_pairs(&[(0.3, -1.0), (2.0, 0.5)]).unwrap();
        let mu = adjoint_measure(&identity2(2.0), &ab).unwrap();
        assert_eq!(mu.masses(), &ab);
        let mu = adjoint_measure(
            &skew(),
            &ComplexVec::from_pairs(&[(1.0, 0.0), (0.0, 0.0)]).unwrap(),
        )
        .unwrap();
        assert_eq!(mu.masses().as_slice(), &[c(1.0, 0.0), c(0.6, 0.0)]);
    }

    #[test]
    fn projection_examples() {
        let t = skew();
        assert_eq!(project_columns(&t, &PointSet::full(2)), t);
        assert!(project_columns(&t, &PointSet::empty(2)).is_zero());
        let p = project_columns(&identity2(2.0), &PointSet::new(2, [0]).unwrap());
        assert_eq!(p.column(0)[0], c(1.0, 0.0));
        assert!(p.column(1).is_zero());
    }

    #[test]
    fn op_norm_examples() {
        let cfg = OracleConfig::default();
        let single = op(
            &[&[(3.0, 0.0), (0.0, 4.0)]],
            SpaceDescriptor::lp(2.0, 2).unwrap(),
        );
        let r = op_norm(&single, &cfg);
        assert!((r.value - 5.0).abs() < 1e-12);
        assert_eq!(r.maximizer[0], c(1.0, 0.0));
        assert!(r.converged);

        assert!((op_norm(&identity2(1.0), &cfg).value - 2.0).abs() < 1e-12);
        assert!((op_norm(&skew(), &cfg).value - 3.2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_operator_norm() {
        let r = op_norm(
            &CKOperator::zero(3, SpaceDescriptor::lp(2.0, 2).unwrap()),
            &OracleConfig::default(),
        );
        assert_eq!(r.value, 0.0);
        assert_eq!(r.maximizer, ComplexVec::ones(3));
    }

    #[test]
    fn grid_examples() {
        let single = op(
            &[&[(3.0, 0.0), (0.0, 4.0)]],
            SpaceDescriptor::lp(2.0, 2).unwrap(),
        );
        assert!((op_norm_grid(&single, 8).unwrap() - 5.0).abs() < 1e-14);
        assert!((op_norm_grid(&identity2(1.0), 4).unwrap() - 2.0).abs() < 1e-14);
        // Aligned phases lie on the grid, so G = 96 hits sqrt(3.2) exactly.
        assert!((op_norm_grid(&skew(), 96).unwrap() - 3.2f64.sqrt()).abs() < 1e-3);
        let wide = CKOperator::zero(5, SpaceDescriptor::complex_line());
        assert!(matches!(
            op_norm_grid(&wide, 4),
            Err(Error::Complexity { columns: 5, .. })
        ));
    }

    #[test]
    fn grid_refinement_reaches_off_grid_optimum() {
        // Optimum at relative phase 0.1 rad, far from every 8-point grid angle.
        let t = op(
            &[
                &[(1.0, 0.0), (0.0, 0.0)],
                &[(0.8 * 0.1f64.cos(), -0.8 * 0.1f64.sin()), (0.3, 0.0)],
            ],
            SpaceDescriptor::lp(2.0, 2).unwrap(),
        );
        let exact = (1.0f64 + 0.64 + 1.6 + 0.09).sqrt();
        assert!(op_norm_grid(&t, 8).unwrap() < exact - 1e-4);
        assert!((op_norm_grid_refined(&t, 8).unwrap() - exact).abs() < 1e-12);
    }

    fn arb_operator() -> impl Strategy<Value = CKOperator> {
        (
            1usize..4,
            1usize..4,
            prop_oneof![Just(1.0), Just(2.0), Just(3.0)],
        )
            .prop_flat_map(|(n, m, p)| {
                prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * m).prop_map(
                    move |entries| {
                        let cols = entries
                            .chunks(m)
                            .map(|chunk| ComplexVec::from_pairs(chunk).unwrap())
                            .collect();
                        CKOperator::new(cols, SpaceDescriptor::lp(p, m).unwrap()).unwrap()
                    },
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn projection_is_idempotent(t in arb_operator(), mask in prop::collection::vec(any::<bool>(), 4)) {
            let b = PointSet::filter(t.n(), |j| mask[j]);
            let once = project_columns(&t, &b);
            prop_assert_eq!(project_columns(&once, &b), once);
        }

        #[test]
        fn adjoint_identity(
            t in arb_operator(),
            f in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
            ys in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
        ) {
            let f = ComplexVec::from_pairs(&f[..t.n()]).unwrap();
            let ys = ComplexVec::from_pairs(&ys[..t.range().dim]).unwrap();
            let lhs = ys.pair(&apply(&t, &f).unwrap()).unwrap();
            let rhs = adjoint_measure(&t, &ys).unwrap().integrate(&f).unwrap();
            prop_assert!((lhs - rhs).norm() <= 1e-12);
        }

        #[test]
        fn oracle_bounds_images_and_matches_grid(
            t in arb_operator(),
            f in prop::collection::vec((0.0f64..1.0, 0.0f64..TAU), 4),
        ) {
            let r = op_norm(&t, &OracleConfig::default());
            prop_assert!(r.maximizer.iter().all(|z| (z.norm() - 1.0).abs() <= 1e-14));
            prop_assert!((t.image_norm(&r.maximizer).unwrap() - r.value).abs() <= 1e-12);
            let f = ComplexVec::new(f[..t.n()].iter().map(|&(a, th)| ComplexScalar::from_polar(a, th)).collect()).unwrap();
            prop_assert!(t.image_norm(&f).unwrap() <= r.value * f.sup_norm() + 1e-9);
            prop_assert!(r.value >= op_norm_grid(&t, 24).unwrap() - 1e-9);
        }
    }
}
