//! Complex scalar and vector primitives.
//!
//! A [`ComplexVec`] plays two roles: a function on the finite point set `L`
//! (normed by the sup-norm, i.e. `ℓ_∞`) and an element of a range space
//! `ℓ_p^m`. The [`SpaceDescriptor`] says which norm applies.

use std::fmt;
use std::ops::{Index, IndexMut};
use std::str::FromStr;

use num_complex::Complex64;
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type ComplexScalar = Complex64;

/// Absolute tolerance for primitive comparisons.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Unimodular phase of `z`, with `phase(0) = 1`.
#[inline]
pub fn phase(z: ComplexScalar) -> ComplexScalar {
    let r = z.norm();
    if r == 0.0 {
        ComplexScalar::new(1.0, 0.0)
    } else {
        z / r
    }
}

/// The disc truncation `Φ(z) = z` for `|z| ≤ 1`, `z/|z|` otherwise.
#[inline]
pub fn truncate_scalar(z: ComplexScalar) -> ComplexScalar {
    let r = z.norm();
    if r <= 1.0 {
        z
    } else {
        z / r
    }
}

/// A finite, nonempty sequence of complex scalars.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVec(Vec<ComplexScalar>);

impl ComplexVec {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<ComplexScalar>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Domain("complex vector must have length >= 1".into()));
        }
        if let Some(j) = entries.iter().position(|z| !z.is_finite()) {
            return Err(Error::Domain(format!("entry {j} is not finite")));
        }
        Ok(ComplexVec(entries))
    }

    pub(crate) fn from_raw(entries: Vec<ComplexScalar>) -> Self {
        debug_assert!(!entries.is_empty());
        ComplexVec(entries)
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            pairs
                .iter()
                .map(|&(re, im)| ComplexScalar::new(re, im))
                .collect(),
        )
    }

    pub fn zeros(n: usize) -> Self {
        ComplexVec(vec![ComplexScalar::new(0.0, 0.0); n])
    }

    pub fn ones(n: usize) -> Self {
        ComplexVec(vec![ComplexScalar::new(1.0, 0.0); n])
    }

    /// Indicator function of `set` on `n` points.
    pub fn indicator(n: usize, set: &[usize]) -> Self {
        let mut v = Self::zeros(n);
        for &j in set {
            v.0[j] = ComplexScalar::new(1.0, 0.0);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[ComplexScalar] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ComplexScalar> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<ComplexScalar> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn scale(&self, c: ComplexScalar) -> Self {
        ComplexVec(self.0.iter().map(|z| z * c).collect())
    }

    pub fn conj(&self) -> Self {
        ComplexVec(self.0.iter().map(|z| z.conj()).collect())
    }

    /// Entrywise difference. Panics on length mismatch.
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        ComplexVec(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// Entrywise product. Panics on length mismatch.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.len(), other.len());
        ComplexVec(self.0.iter().zip(&other.0).map(|(a, b)| a * b).collect())
    }

    /// Bilinear pairing `Σ_j self_j · y_j` (no conjugation).
    pub fn pair(&self, y: &Self) -> Result<ComplexScalar> {
        if self.len() != y.len() {
            return Err(Error::Dimension {
                expected: self.len(),
                found: y.len(),
            });
        }
        Ok(pair_slices(&self.0, &y.0))
    }

    /// Sup-norm of the entrywise difference restricted to `set`.
    pub fn sup_dist_on(&self, other: &Self, set: &[usize]) -> f64 {
        set.iter()
            .fold(0.0, |m, &j| m.max((self.0[j] - other.0[j]).norm()))
    }

    pub fn phases(&self) -> Self {
        ComplexVec(self.0.iter().map(|&z| phase(z)).collect())
    }
}

pub(crate) fn pair_slices(a: &[ComplexScalar], b: &[ComplexScalar]) -> ComplexScalar {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Index<usize> for ComplexVec {
    type Output = ComplexScalar;
    fn index(&self, j: usize) -> &ComplexScalar {
        &self.0[j]
    }
}

impl IndexMut<usize> for ComplexVec {
    fn index_mut(&mut self, j: usize) -> &mut ComplexScalar {
        &mut self.0[j]
    }
}

impl Serialize for ComplexVec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for z in &self.0 {
            seq.serialize_element(&[z.re, z.im])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexVec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let pairs: Vec<[f64; 2]> = Vec::deserialize(deserializer)?;
        let entries = pairs
            .into_iter()
            .map(|[re, im]| ComplexScalar::new(re, im))
            .collect();
        ComplexVec::new(entries).map_err(de::Error::custom)
    }
}

/// Exponent `p ∈ [1, ∞]` of an `ℓ_p` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p == f64::INFINITY {
            Ok(Exponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Exponent::Finite(p))
        } else {
            Err(Error::Domain(format!(
                "exponent p = {p} is outside [1, inf]"
            )))
        }
    }

    /// Conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(1.0) => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Exponent::Finite(_))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Infinity => write!(f, "inf"),
            Exponent::Finite(p) => write!(f, "{p}"),
        }
    }
}

/// The space `ℓ_p^dim` over ℂ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpaceDescriptor {
    pub p: Exponent,
    pub dim: usize,
}

impl SpaceDescriptor {
    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("space dimension must be positive".into()));
        }
        Ok(SpaceDescriptor {
            p: Exponent::new(p)?,
            dim,
        })
    }

    /// The scalar field ℂ, i.e. `ℓ_2^1` (every `ℓ_p^1` coincides with it).
    pub fn complex_line() -> Self {
        SpaceDescriptor {
            p: Exponent::Finite(2.0),
            dim: 1,
        }
    }

    pub fn sup(dim: usize) -> Self {
        SpaceDescriptor {
            p: Exponent::Infinity,
            dim,
        }
    }

    pub fn is_complex_line(&self) -> bool {
        self.dim == 1
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            return Err(Error::Dimension {
                expected: self.dim,
                found: len,
            });
        }
        Ok(())
    }

    /// Norm without the dimension check; used on hot paths.
    pub(crate) fn norm_of(&self, v: &[ComplexScalar]) -> f64 {
        norm_slice(v, self.p)
    }
}

impl fmt::Display for SpaceDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "lp:{}:{}", self.p, self.dim)
    }
}

impl FromStr for SpaceDescriptor {
    type Err = Error;

    /// Accepts `lp:<p>:<dim>` (with `p` a number or `inf`) and `c` for ℂ.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("c") {
            return Ok(SpaceDescriptor::complex_line());
        }
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["lp", p, dim] => {
                let p = if p.eq_ignore_ascii_case("inf") {
                    f64::INFINITY
                } else {
                    p.parse::<f64>()
                        .map_err(|_| Error::Domain(format!("bad exponent `{p}` in `{s}`")))?
                };
                let dim = dim
                    .parse::<usize>()
                    .map_err(|_| Error::Domain(format!("bad dimension `{dim}` in `{s}`")))?;
                SpaceDescriptor::lp(p, dim)
            }
            _ => Err(Error::Domain(format!(
                "space `{s}` is not of the form lp:<p>:<dim> or c"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawExponent {
    Number(f64),
    Text(String),
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    #[serde(rename = "type")]
    kind: String,
    p: RawExponent,
    dim: usize,
}

impl Serialize for SpaceDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let p = match self.p {
            Exponent::Infinity => RawExponent::Text("inf".into()),
            Exponent::Finite(p) => RawExponent::Number(p),
        };
        RawSpace {
            kind: "lp".into(),
            p,
            dim: self.dim,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SpaceDescriptor {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawSpace::deserialize(deserializer)?;
        if raw.kind != "lp" {
            return Err(de::Error::custom(format!(
                "unknown space kind `{}` in field `type` (expected `lp`)",
                raw.kind
            )));
        }
        let p = match raw.p {
            RawExponent::Number(p) => p,
            RawExponent::Text(t) if t == "inf" => f64::INFINITY,
            RawExponent::Text(t) => {
                return Err(de::Error::custom(format!(
                    "field `p` must be a number or \"inf\", got `{t}`"
                )))
            }
        };
        SpaceDescriptor::lp(p, raw.dim).map_err(de::Error::custom)
    }
}

fn norm_slice(v: &[ComplexScalar], p: Exponent) -> f64 {
    let max = v.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
    match p {
        Exponent::Infinity => max,
        _ if max == 0.0 => 0.0,
        Exponent::Finite(1.0) => v.iter().map(|z| z.norm()).sum(),
        Exponent::Finite(2.0) => {
            let s: f64 = v.iter().map(|z| (z / max).norm_sqr()).sum();
            max * s.sqrt()
        }
        Exponent::Finite(p) => {
            let s: f64 = v.iter().map(|z| (z.norm() / max).powf(p)).sum();
            max * s.powf(1.0 / p)
        }
    }
}

/// `ℓ_p` norm of `v` in `space`.
pub fn lp_norm(v: &ComplexVec, space: &SpaceDescriptor) -> Result<f64> {
    space.check_len(v.len())?;
    Ok(norm_slice(v.as_slice(), space.p))
}

/// Norm of `v` in the dual of `space`, i.e. the `ℓ_q` norm.
pub fn dual_norm(v: &ComplexVec, space: &SpaceDescriptor) -> Result<f64> {
    space.check_len(v.len())?;
    Ok(norm_slice(v.as_slice(), space.p.conjugate()))
}

/// A unit dual vector `y*` with `Σ_j y*_j y_j = ‖y‖_p`.
pub fn norming_functional(y: &ComplexVec, space: &SpaceDescriptor) -> Result<ComplexVec> {
    space.check_len(y.len())?;
    let p = match space.p {
        Exponent::Infinity => {
            return Err(Error::Domain(
                "norming functionals are only produced for p < inf".into(),
            ))
        }
        Exponent::Finite(p) => p,
    };
    if y.is_zero() {
        return Err(Error::ZeroVector);
    }
    if p == 1.0 {
        return Ok(ComplexVec::from_raw(
            y.iter().map(|&z| phase(z).conj()).collect(),
        ));
    }
    let norm = norm_slice(y.as_slice(), space.p);
    let entries = y
        .iter()
        .map(|&z| {
            let r = z.norm();
            if r == 0.0 {
                ComplexScalar::new(0.0, 0.0)
            } else {
                (z / r).conj() * (r / norm).powf(p - 1.0)
            }
        })
        .collect();
    Ok(ComplexVec::from_raw(entries))
}

/// Entrywise disc truncation `Φ`.
pub fn truncate_disc(v: &ComplexVec) -> ComplexVec {
    ComplexVec::from_raw(v.iter().map(|&z| truncate_scalar(z)).collect())
}

/// Outcome of checking the elementary disc lemma at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscLemmaReport {
    /// `Re(w·λ) > 1 − t`.
    pub holds_hypothesis: bool,
    /// `Re(w·λ) − (1 − t)`.
    pub hypothesis_margin: f64,
    /// `|w − conj(λ)|`.
    pub distance: f64,
    /// `√(2t)`.
    pub bound: f64,
}

impl DiscLemmaReport {
    /// `bound − distance`.
    pub fn slack(&self) -> f64 {
        self.bound - self.distance
    }
}

/// Evaluates both sides of: `Re(w·λ) > 1 − t` implies `|w − conj(λ)| < √(2t)`.
pub fn lemma_basic_l_bound(
    w: ComplexScalar,
    lam: ComplexScalar,
    t: f64,
) -> Result<DiscLemmaReport> {
    if !(w.norm() <= 1.0 + DEFAULT_TOL && lam.norm() <= 1.0 + DEFAULT_TOL) {
        return Err(Error::Domain(format!(
            "inputs must lie in the closed unit disc (|w| = {}, |lam| = {})",
            w.norm(),
            lam.norm()
        )));
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::Domain(format!("t = {t} must lie in (0, 1)")));
    }
    let margin = (w * lam).re - (1.0 - t);
    Ok(DiscLemmaReport {
        holds_hypothesis: margin > 0.0,
        hypothesis_margin: margin,
        distance: (w - lam.conj()).norm(),
        bound: (2.0 * t).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn v(pairs: &[(f64, f64)]) -> ComplexVec {
        ComplexVec::from_pairs(pairs).unwrap()
    }

    #[test]
    fn lp_norm_examples() {
        let l2 = SpaceDescriptor::lp(2.0, 2).unwrap();
        assert!((lp_norm(&v(&[(3.0, 0.0), (0.0, 4.0)]), &l2).unwrap() - 5.0).abs() < 1e-15);
        let l1 = SpaceDescriptor::lp(1.0, 3).unwrap();
        let x = v(&[(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0)]);
        assert!((lp_norm(&x, &l1).unwrap() - 3.0).abs() < 1e-15);
        let l3 = SpaceDescriptor::lp(3.0, 2).unwrap();
        let ones = ComplexVec::ones(2);
        assert!((lp_norm(&ones, &l3).unwrap() - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((lp_norm(&x, &SpaceDescriptor::sup(3)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lp_norm_rejects_dimension_mismatch() {
        let l2 = SpaceDescriptor::lp(2.0, 3).unwrap();
        assert!(matches!(
            lp_norm(&ComplexVec::ones(2), &l2),
            Err(Error::Dimension {
                expected: 3,
                found: 2
            })
        ));
    }

    #[test]
    fn norming_functional_examples() {
        let l2 = SpaceDescriptor::lp(2.0, 2).unwrap();
        let y = v(&[(3.0, 0.0), (0.0, 4.0)]);
        let ys = norming_functional(&y, &l2).unwrap();
        assert!((ys[0] - c(0.6, 0.0)).norm() < 1e-15);
        assert!((ys[1] - c(0.0, -0.8)).norm() < 1e-15);
        assert!((ys.pair(&y).unwrap() - c(5.0, 0.0)).norm() < 1e-14);

        let l1 = SpaceDescriptor::lp(1.0, 2).unwrap();
        let y = v(&[(0.0, 2.0), (-1.0, 0.0)]);
        let ys = norming_functional(&y, &l1).unwrap();
        assert!((ys[0] - c(0.0, -1.0)).norm() < 1e-15);
        assert!((ys[1] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((ys.pair(&y).unwrap() - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn norming_functional_p3_closed_form() {
        // Oracle: the closed form evaluated by hand, 2^{-2/3} per entry.
        let l3 = SpaceDescriptor::lp(3.0, 2).unwrap();
        let y = ComplexVec::ones(2);
        let ys = norming_functional(&y, &l3).unwrap();
        let expected = 2f64.powf(-2.0 / 3.0);
        for z in ys.iter() {
            assert!((z - c(expected, 0.0)).norm() < 1e-15);
        }
        let pairing = ys.pair(&y).unwrap();
        assert!((pairing.re - lp_norm(&y, &l3).unwrap()).abs() < 1e-15);
        assert!(pairing.im.abs() < 1e-15);
        assert!((dual_norm(&ys, &l3).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn norming_functional_errors() {
        let l2 = SpaceDescriptor::lp(2.0, 2).unwrap();
        assert!(matches!(
            norming_functional(&ComplexVec::zeros(2), &l2),
            Err(Error::ZeroVector)
        ));
        assert!(matches!(
            norming_functional(&ComplexVec::ones(2), &SpaceDescriptor::sup(2)),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn p1_functional_uses_unit_phase_at_zero() {
        let l1 = SpaceDescriptor::lp(1.0, 2).unwrap();
        let ys = norming_functional(&v(&[(2.0, 0.0), (0.0, 0.0)]), &l1).unwrap();
        assert_eq!(ys[1], c(1.0, 0.0));
    }

    #[test]
    fn truncate_disc_examples() {
        assert_eq!(truncate_disc(&v(&[(0.5, 0.0)])), v(&[(0.5, 0.0)]));
        assert!((truncate_disc(&v(&[(0.0, 2.0)]))[0] - c(0.0, 1.0)).norm() < 1e-15);
        let out = truncate_disc(&v(&[(1.0, 1.0), (0.0, 0.0)]));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((out[0] - c(r, r)).norm() < 1e-15);
        assert_eq!(out[1], c(0.0, 0.0));
    }

    #[test]
    fn disc_lemma_examples() {
        let one = c(1.0, 0.0);
        let r = lemma_basic_l_bound(one, one, 0.5).unwrap();
        assert!(r.holds_hypothesis);
        assert_eq!(r.distance, 0.0);
        assert!((r.bound - 1.0).abs() < 1e-15);

        let lam = ComplexScalar::from_polar(1.0, 0.1);
        let r = lemma_basic_l_bound(one, lam, 0.005).unwrap();
        assert!(r.holds_hypothesis);
        // |1 - e^{-0.1i}| = 2 sin(0.05)
        assert!((r.distance - 2.0 * 0.05f64.sin()).abs() < 1e-15);
        assert!(r.distance < r.bound);

        let r = lemma_basic_l_bound(one, c(-1.0, 0.0), 0.5).unwrap();
        assert!(!r.holds_hypothesis);
        assert!((r.distance - 2.0).abs() < 1e-15);
    }

    #[test]
    fn disc_lemma_domain_errors() {
        assert!(lemma_basic_l_bound(c(1.5, 0.0), c(1.0, 0.0), 0.5).is_err());
        assert!(lemma_basic_l_bound(c(1.0, 0.0), c(1.0, 0.0), 1.0).is_err());
        assert!(lemma_basic_l_bound(c(1.0, 0.0), c(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn space_parsing() {
        let s: SpaceDescriptor = "lp:2:3".parse().unwrap();
        assert_eq!(s, SpaceDescriptor::lp(2.0, 3).unwrap());
        let s: SpaceDescriptor = "lp:inf:2".parse().unwrap();
        assert_eq!(s.p, Exponent::Infinity);
        assert_eq!("c".parse::<SpaceDescriptor>().unwrap().dim, 1);
        assert!("lp:0.5:2".parse::<SpaceDescriptor>().is_err());
        assert!("hilbert:2".parse::<SpaceDescriptor>().is_err());
        assert_eq!(s.to_string(), "lp:inf:2");
    }

    #[test]
    fn space_json_schema() {
        let s = SpaceDescriptor::sup(2);
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"type":"lp","p":"inf","dim":2}"#
        );
        let err = serde_json::from_str::<SpaceDescriptor>(r#"{"type":"orlicz","p":2,"dim":2}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("`type`"), "{err}");
    }

    fn arb_vec(n: usize) -> impl Strategy<Value = ComplexVec> {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n)
            .prop_map(|pairs| ComplexVec::from_pairs(&pairs).unwrap())
    }

    fn arb_p() -> impl Strategy<Value = f64> {
        prop_oneof![
            Just(1.0),
            Just(2.0),
            Just(3.0),
            Just(f64::INFINITY),
            1.0f64..6.0
        ]
    }

    proptest! {
        #[test]
        fn norm_is_subadditive_and_homogeneous(
            p in arb_p(), u in arb_vec(4), w in arb_vec(4),
            a in (-2.0f64..2.0, -2.0f64..2.0),
        ) {
            let space = SpaceDescriptor::lp(p, 4).unwrap();
            let nu = lp_norm(&u, &space).unwrap();
            let nw = lp_norm(&w, &space).unwrap();
            let sum = ComplexVec::from_raw(u.iter().zip(w.iter()).map(|(x, y)| x + y).collect());
            let ns = lp_norm(&sum, &space).unwrap();
            prop_assert!(ns <= (nu + nw) * (1.0 + 1e-12) + 1e-300);
            let a = c(a.0, a.1);
            let na = lp_norm(&u.scale(a), &space).unwrap();
            prop_assert!((na - a.norm() * nu).abs() <= 1e-12 * (1.0 + na));
        }

        #[test]
        fn norming_functional_is_unit_and_norming(p in arb_p(), y in arb_vec(3)) {
            prop_assume!(!y.is_zero());
            let p = if p.is_finite() { p } else { 4.0 };
            let space = SpaceDescriptor::lp(p, 3).unwrap();
            let ys = norming_functional(&y, &space).unwrap();
            let ny = lp_norm(&y, &space).unwrap();
            prop_assert!((dual_norm(&ys, &space).unwrap() - 1.0).abs() <= 1e-12);
            let pairing = ys.pair(&y).unwrap();
            prop_assert!((pairing.re - ny).abs() <= 1e-12 * (1.0 + ny));
            prop_assert!(pairing.im.abs() <= 1e-12 * (1.0 + ny));
        }

        #[test]
        fn truncation_is_idempotent_and_lipschitz(
            a in (-3.0f64..3.0, -3.0f64..3.0), b in (-3.0f64..3.0, -3.0f64..3.0),
        ) {
            let (za, zb) = (c(a.0, a.1), c(b.0, b.1));
            let ta = truncate_scalar(za);
            prop_assert!(ta.norm() <= 1.0 + 1e-15);
            prop_assert!((truncate_scalar(ta) - ta).norm() <= 1e-15);
            prop_assert!((ta - truncate_scalar(zb)).norm() <= 2.0 * (za - zb).norm() + 1e-15);
        }
    }
}
