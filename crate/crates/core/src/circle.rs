//! Maximization of smooth 2π-periodic objectives: uniform sampling to
//! bracket the global maximum, then golden-section refinement.

use std::f64::consts::TAU;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Best angle and value found on the circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CirclePeak {
    pub theta: f64,
    pub value: f64,
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`, stopping once
/// the bracket is narrower than `tol`.
pub fn golden_max(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> CirclePeak {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // ~200 iterations shrink any bracket below 1e-40 of its width.
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        CirclePeak {
            theta: x1,
            value: f1,
        }
    } else {
        CirclePeak {
            theta: x2,
            value: f2,
        }
    }
}

/// Maximizes a 2π-periodic `f`. `incumbent`, when given, is evaluated too and
/// kept unless beaten by more than rounding noise.
pub fn maximize_on_circle(
    mut f: impl FnMut(f64) -> f64,
    samples: usize,
    tol: f64,
    incumbent: Option<f64>,
) -> CirclePeak {
    let samples = samples.max(3);
    let step = TAU / samples as f64;
    let mut best = CirclePeak {
        theta: 0.0,
        value: f64::NEG_INFINITY,
    };
    for k in 0..samples {
        let theta = k as f64 * step;
        let value = f(theta);
        if value > best.value {
            best = CirclePeak { theta, value };
        }
    }
    let refined = golden_max(&mut f, best.theta - step, best.theta + step, tol);
    if refined.value > best.value {
        best = refined;
    }
    if let Some(theta) = incumbent {
        let value = f(theta);
        // Rounding can make an equivalent point look a few ulps better.
        if value >= best.value - 8.0 * f64::EPSILON * best.value.abs().max(1.0) {
            best = CirclePeak { theta, value };
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_cosine_peak() {
        let peak = maximize_on_circle(|t| (t - 1.3).cos(), 64, 1e-12, None);
        assert!((peak.value - 1.0).abs() < 1e-15);
        assert!((peak.theta - 1.3).abs() < 1e-7);
    }

    #[test]
    fn handles_peak_near_wraparound() {
        let peak = maximize_on_circle(|t| (t + 0.01).cos(), 64, 1e-12, None);
        assert!((peak.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn incumbent_is_kept_on_ties() {
        let peak = maximize_on_circle(|_| 2.0, 16, 1e-12, Some(0.7));
        assert_eq!(peak.theta, 0.7);
        assert_eq!(peak.value, 2.0);
    }

    #[test]
    fn golden_on_interval() {
        let peak = golden_max(|x| -(x - 0.25) * (x - 0.25), 0.0, 1.0, 1e-12);
        assert!((peak.theta - 0.25).abs() < 1e-7);
    }
}
