//! Points of the probability simplex and the majorization preorder.
//!
//! A [`SimplexPoint`] is a nonnegative vector of `m >= 2` coordinates summing
//! to one. Inputs slightly outside the simplex (within [`EPS_MASS`]) are
//! clamped and renormalized; anything farther out is rejected.
//!
//! Majorization compares decreasing rearrangements through their prefix sums:
//! `x ≺ y` when every k-prefix sum of `x↓` is at most the matching prefix sum
//! of `y↓`. On the simplex the full sums agree, so only the first `m - 1`
//! prefixes carry information.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute band for simplex membership.
pub const EPS_MASS: f64 = 1e-10;

/// Default tolerance for prefix-sum comparisons.
pub const EPS_CMP: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Validates `coords` against the simplex, clamping tiny negatives and
    /// renormalizing the mass.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let m = coords.len();
        if m < 2 {
            return Err(Error::InvalidDimension { m });
        }
        let mut coords = coords;
        for (index, c) in coords.iter_mut().enumerate() {
            if !c.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if *c < -EPS_MASS {
                return Err(Error::NegativeCoordinate { index, value: *c });
            }
            if *c < 0.0 {
                *c = 0.0;
            }
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > EPS_MASS {
            return Err(Error::MassViolation { sum });
        }
        if sum != 1.0 {
            for c in coords.iter_mut() {
                *c /= sum;
            }
        }
        Ok(Self { coords })
    }

    /// Vertex `e_k` (0-based `k`).
    pub fn vertex(m: usize, k: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidDimension { m });
        }
        if k >= m {
            return Err(Error::DimensionMismatch { expected: m, got: k + 1 });
        }
        let mut coords = vec![0.0; m];
        coords[k] = 1.0;
        Ok(Self { coords })
    }

    /// The barycenter `(1/m, …, 1/m)`.
    pub fn barycenter(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidDimension { m });
        }
        Ok(Self {
            coords: vec![1.0 / m as f64; m],
        })
    }

    /// Convex combination `λ·a + (1 − λ)·b`.
    pub fn mix(a: &Self, b: &Self, lambda: f64) -> Result<Self> {
        check_same_dim(a, b)?;
        let coords = a
            .coords
            .iter()
            .zip(&b.coords)
            .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
            .collect();
        Self::new(coords)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }

    /// Infinity-norm distance.
    pub fn dist_inf(&self, other: &Self) -> f64 {
        dist_inf(&self.coords, &other.coords)
    }

    /// Relabels species: the returned point has `y[perm[i]] = x[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut coords = vec![0.0; self.dim()];
        for (i, &p) in perm.iter().enumerate() {
            coords[p] = self.coords[i];
        }
        Self { coords }
    }
}

impl<'de> Deserialize<'de> for SimplexPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let coords = Vec::<f64>::deserialize(d)?;
        SimplexPoint::new(coords).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn dist_inf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_same_dim(x: &SimplexPoint, y: &SimplexPoint) -> Result<()> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    Ok(())
}

/// Coordinates sorted in nonincreasing order; ties keep their original order.
pub fn decreasing_rearrangement(x: &SimplexPoint) -> Vec<f64> {
    sorted_desc(&x.coords)
}

pub(crate) fn sorted_desc(v: &[f64]) -> Vec<f64> {
    let mut out = v.to_vec();
    // slice::sort_by is stable
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Relation {
    /// First argument majorizes the second (`x ≻ y`).
    Majorizes,
    /// First argument is majorized by the second (`x ≺ y`).
    MajorizedBy,
    /// Both directions hold; the rearrangements agree.
    Equivalent,
    Incomparable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorizationVerdict {
    pub relation: Relation,
    /// `min_k Σ_{i≤k} (x_[i] − y_[i])`: nonnegative iff `x ≻ y`.
    pub min_slack_forward: f64,
    /// `min_k Σ_{i≤k} (y_[i] − x_[i])`: nonnegative iff `x ≺ y`.
    pub min_slack_backward: f64,
    /// Prefix length (1-based) at which the forward slack is attained.
    #[serde(skip)]
    pub forward_argmin: usize,
}

impl MajorizationVerdict {
    /// `x ≻ y` within tolerance.
    pub fn majorizes(&self) -> bool {
        matches!(self.relation, Relation::Majorizes | Relation::Equivalent)
    }

    /// `x ≺ y` within tolerance.
    pub fn majorized_by(&self) -> bool {
        matches!(self.relation, Relation::MajorizedBy | Relation::Equivalent)
    }
}

/// Compares `x` and `y` under majorization with tolerance `tol`.
pub fn compare_majorization(
    x: &SimplexPoint,
    y: &SimplexPoint,
    tol: f64,
) -> Result<MajorizationVerdict> {
    check_same_dim(x, y)?;
    Ok(compare_slices(&x.coords, &y.coords, tol))
}

pub(crate) fn compare_slices(x: &[f64], y: &[f64], tol: f64) -> MajorizationVerdict {
    let xs = sorted_desc(x);
    let ys = sorted_desc(y);
    let m = xs.len();
    let mut fwd = f64::INFINITY;
    let mut bwd = f64::INFINITY;
    let mut arg = 1;
    let (mut px, mut py) = (0.0, 0.0);
    for k in 0..m - 1 {
        px += xs[k];
        py += ys[k];
        let d = px - py;
        if d < fwd {
            fwd = d;
            arg = k + 1;
        }
        bwd = bwd.min(-d);
    }
    let relation = match (fwd >= -tol, bwd >= -tol) {
        (true, true) => Relation::Equivalent,
        (true, false) => Relation::Majorizes,
        (false, true) => Relation::MajorizedBy,
        (false, false) => Relation::Incomparable,
    };
    MajorizationVerdict {
        relation,
        min_slack_forward: fwd,
        min_slack_backward: bwd,
        forward_argmin: arg,
    }
}

/// Flat-Dirichlet sample: `m` unit exponentials, normalized.
pub fn sample_uniform<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<SimplexPoint> {
    if m < 2 {
        return Err(Error::InvalidDimension { m });
    }
    let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let sum: f64 = draws.iter().sum();
    Ok(SimplexPoint {
        coords: draws.into_iter().map(|d| d / sum).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(v: &[f64]) -> SimplexPoint {
        SimplexPoint::new(v.to_vec()).unwrap()
    }

    #[test]
    fn rearrangement_examples() {
        assert_eq!(decreasing_rearrangement(&pt(&[0.2, 0.5, 0.3])), vec![0.5, 0.3, 0.2]);
        let third = 1.0 / 3.0;
        let b = SimplexPoint::barycenter(3).unwrap();
        assert_eq!(decreasing_rearrangement(&b), vec![third; 3]);
        assert_eq!(
            decreasing_rearrangement(&pt(&[0.01, 0.5, 0.49])),
            vec![0.5, 0.49, 0.01]
        );
    }

    #[test]
    fn membership_band() {
        assert!(SimplexPoint::new(vec![0.5, 0.5 + 5e-11]).is_ok());
        assert!(matches!(
            SimplexPoint::new(vec![0.5, 0.6]),
            Err(Error::MassViolation { .. })
        ));
        assert!(matches!(
            SimplexPoint::new(vec![1.0 + 1e-9, -1e-9]),
            Err(Error::NegativeCoordinate { index: 1, .. })
        ));
        let p = SimplexPoint::new(vec![1.0 + 5e-11, -5e-11]).unwrap();
        assert_eq!(p.coords()[1], 0.0);
        assert!(matches!(
            SimplexPoint::new(vec![1.0]),
            Err(Error::InvalidDimension { m: 1 })
        ));
        assert!(matches!(
            SimplexPoint::new(vec![f64::NAN, 1.0]),
            Err(Error::NonFinite { index: 0 })
        ));
    }

    #[test]
    fn barycenter_is_majorized_by_vertex() {
        let v = compare_majorization(
            &SimplexPoint::barycenter(3).unwrap(),
            &SimplexPoint::vertex(3, 0).unwrap(),
            EPS_CMP,
        )
        .unwrap();
        assert_eq!(v.relation, Relation::MajorizedBy);
    }

    #[test]
    fn reflexive_point_is_equivalent() {
        let x = pt(&[0.7, 0.2, 0.1]);
        let v = compare_majorization(&x, &x, EPS_CMP).unwrap();
        assert_eq!(v.relation, Relation::Equivalent);
        assert_eq!(v.min_slack_forward, 0.0);
        assert_eq!(v.min_slack_backward, 0.0);
    }

    #[test]
    fn incomparable_pair_reports_both_slacks() {
        let x = pt(&[0.5, 0.49, 0.01]);
        let y = pt(&[0.745, 0.196, 0.059]);
        let v = compare_majorization(&x, &y, EPS_CMP).unwrap();
        assert_eq!(v.relation, Relation::Incomparable);
        assert!((v.min_slack_forward + 0.245).abs() < 1e-12);
        assert_eq!(v.forward_argmin, 1);
        assert!((v.min_slack_backward + 0.049).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let r = compare_majorization(&pt(&[0.5, 0.5]), &pt(&[0.2, 0.3, 0.5]), EPS_CMP);
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn m2_uses_single_prefix() {
        let v = compare_majorization(&pt(&[0.9, 0.1]), &pt(&[0.4, 0.6]), EPS_CMP).unwrap();
        assert_eq!(v.relation, Relation::Majorizes);
        assert!((v.min_slack_forward - 0.3).abs() < 1e-15);
    }

    #[test]
    fn sampling_is_deterministic_and_valid() {
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x = sample_uniform(3, &mut a).unwrap();
            assert_eq!(x, sample_uniform(3, &mut b).unwrap());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = sample_uniform(2, &mut rng).unwrap();
        assert!(p.coords().iter().all(|c| (0.0..=1.0).contains(c)));
        assert!((p.coords().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(matches!(
            sample_uniform(1, &mut rng),
            Err(Error::InvalidDimension { m: 1 })
        ));
    }

    #[test]
    fn sampling_mean_is_barycenter() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 100_000;
        let mut mean = [0.0; 3];
        for _ in 0..n {
            let x = sample_uniform(3, &mut rng).unwrap();
            for (m, c) in mean.iter_mut().zip(x.coords()) {
                *m += c / n as f64;
            }
        }
        for m in mean {
            assert!((m - 1.0 / 3.0).abs() < 0.01, "{m}");
        }
    }
}
