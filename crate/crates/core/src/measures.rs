//! Complex measures on a finite point set `L = {0, …, n−1}`.

use serde::{Deserialize, Serialize};

use crate::cspace::{ComplexScalar, ComplexVec};
use crate::error::{Error, Result};

/// A subset of `{0, …, n−1}`, kept sorted and duplicate-free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointSet {
    n: usize,
    members: Vec<usize>,
}

impl PointSet {
    pub fn new(n: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut members: Vec<usize> = members.into_iter().collect();
        if let Some(&bad) = members.iter().find(|&&j| j >= n) {
            return Err(Error::Domain(format!(
                "point {bad} is outside the point set of size {n}"
            )));
        }
        members.sort_unstable();
        members.dedup();
        Ok(PointSet { n, members })
    }

    pub fn full(n: usize) -> Self {
        PointSet {
            n,
            members: (0..n).collect(),
        }
    }

    pub fn empty(n: usize) -> Self {
        PointSet {
            n,
            members: Vec::new(),
        }
    }

    /// Points `j` with `pred(j)` true.
    pub fn filter(n: usize, mut pred: impl FnMut(usize) -> bool) -> Self {
        PointSet {
            n,
            members: (0..n).filter(|&j| pred(j)).collect(),
        }
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, j: usize) -> bool {
        self.members.binary_search(&j).is_ok()
    }

    pub fn complement(&self) -> Self {
        PointSet::filter(self.n, |j| !self.contains(j))
    }

    /// `self \ other`.
    pub fn minus(&self, other: &PointSet) -> Self {
        PointSet {
            n: self.n,
            members: self
                .members
                .iter()
                .copied()
                .filter(|&j| !other.contains(j))
                .collect(),
        }
    }

    pub fn union(&self, other: &PointSet) -> Self {
        PointSet::filter(self.n, |j| self.contains(j) || other.contains(j))
    }

    pub fn is_subset_of(&self, other: &PointSet) -> bool {
        self.members.iter().all(|&j| other.contains(j))
    }

    pub fn indicator(&self) -> ComplexVec {
        ComplexVec::indicator(self.n, &self.members)
    }
}

/// A complex measure on `L`, one mass per point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteMeasure {
    masses: ComplexVec,
}

/// `μ = phase · |μ|`, the finite Radon–Nikodým decomposition.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarDecomposition {
    pub variation: Vec<f64>,
    pub phase: ComplexVec,
    pub total: f64,
}

impl FiniteMeasure {
    pub fn new(masses: ComplexVec) -> Self {
        FiniteMeasure { masses }
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn masses(&self) -> &ComplexVec {
        &self.masses
    }

    pub fn mass(&self, j: usize) -> ComplexScalar {
        self.masses[j]
    }

    /// `μ(f) = Σ_j f_j · μ_j`.
    pub fn integrate(&self, f: &ComplexVec) -> Result<ComplexScalar> {
        f.pair(&self.masses)
    }

    pub fn total_variation(&self) -> f64 {
        self.masses.iter().map(|z| z.norm()).sum()
    }
}

pub fn polar_decompose(mu: &FiniteMeasure) -> PolarDecomposition {
    let variation: Vec<f64> = mu.masses.iter().map(|z| z.norm()).collect();
    let total = variation.iter().sum();
    PolarDecomposition {
        phase: mu.masses.phases(),
        variation,
        total,
    }
}

/// `|μ|(E)`.
pub fn variation_on(mu: &FiniteMeasure, e: &PointSet) -> Result<f64> {
    if e.universe() != mu.len() {
        return Err(Error::Domain(format!(
            "point set over {} points used with a measure on {} points",
            e.universe(),
            mu.len()
        )));
    }
    Ok(e.members().iter().map(|&j| mu.masses[j].norm()).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> ComplexScalar {
        ComplexScalar::new(re, im)
    }

    fn sample() -> FiniteMeasure {
        FiniteMeasure::new(ComplexVec::from_pairs(&[(3.0, 4.0), (0.0, 0.0), (-1.0, 0.0)]).unwrap())
    }

    #[test]
    fn polar_examples() {
        let pd = polar_decompose(&sample());
        assert_eq!(pd.variation, vec![5.0, 0.0, 1.0]);
        assert!((pd.phase[0] - c(0.6, 0.8)).norm() < 1e-15);
        assert_eq!(pd.phase[1], c(1.0, 0.0));
        assert_eq!(pd.phase[2], c(-1.0, 0.0));
        assert_eq!(pd.total, 6.0);

        let zero = polar_decompose(&FiniteMeasure::new(ComplexVec::zeros(3)));
        assert_eq!(zero.total, 0.0);
        assert!(zero.phase.iter().all(|&z| z == c(1.0, 0.0)));

        let pd = polar_decompose(&FiniteMeasure::new(
            ComplexVec::from_pairs(&[(0.0, 1.0)]).unwrap(),
        ));
        assert_eq!(pd.variation, vec![1.0]);
        assert_eq!(pd.phase[0], c(0.0, 1.0));
    }

    #[test]
    fn variation_on_examples() {
        let mu = sample();
        assert_eq!(
            variation_on(&mu, &PointSet::new(3, [0, 2]).unwrap()).unwrap(),
            6.0
        );
        assert_eq!(variation_on(&mu, &PointSet::empty(3)).unwrap(), 0.0);
        assert_eq!(
            variation_on(&mu, &PointSet::new(3, [1]).unwrap()).unwrap(),
            0.0
        );
    }

    #[test]
    fn out_of_range_points_are_rejected() {
        assert!(PointSet::new(3, [3]).is_err());
        assert!(variation_on(&sample(), &PointSet::full(4)).is_err());
    }

    #[test]
    fn set_algebra() {
        let a = PointSet::new(5, [4, 1, 1, 2]).unwrap();
        assert_eq!(a.members(), &[1, 2, 4]);
        assert_eq!(a.complement().members(), &[0, 3]);
        let b = PointSet::new(5, [2, 3]).unwrap();
        assert_eq!(a.minus(&b).members(), &[1, 4]);
        assert_eq!(a.union(&b).members(), &[1, 2, 3, 4]);
        assert!(PointSet::new(5, [2]).unwrap().is_subset_of(&b));
    }

    fn arb_measure() -> impl Strategy<Value = FiniteMeasure> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..8)
            .prop_map(|pairs| FiniteMeasure::new(ComplexVec::from_pairs(&pairs).unwrap()))
    }

    proptest! {
        #[test]
        fn polar_recomposes(mu in arb_measure()) {
            let pd = polar_decompose(&mu);
            for j in 0..mu.len() {
                prop_assert!((pd.phase[j].norm() - 1.0).abs() <= 1e-15);
                let back = pd.phase[j] * pd.variation[j];
                prop_assert!((back - mu.mass(j)).norm() <= 1e-15 * (1.0 + pd.variation[j]));
            }
        }

        #[test]
        fn variation_is_additive(mu in arb_measure(), mask in prop::collection::vec(any::<bool>(), 8)) {
            let e = PointSet::filter(mu.len(), |j| mask[j]);
            let total = variation_on(&mu, &e).unwrap() + variation_on(&mu, &e.complement()).unwrap();
            prop_assert!((total - mu.total_variation()).abs() <= 1e-12);
        }

        #[test]
        fn pairing_bounded_by_total_variation(
            mu in arb_measure(),
            f in prop::collection::vec((0.0f64..1.0, 0.0f64..std::f64::consts::TAU), 8),
        ) {
            let f = ComplexVec::new(
                f[..mu.len()].iter().map(|&(r, t)| ComplexScalar::from_polar(r, t)).collect(),
            ).unwrap();
            let value = mu.integrate(&f).unwrap().norm();
            prop_assert!(value <= mu.total_variation() + 1e-12);
        }
    }
}
