//! Iteration of stochastic operators and the analysis of their orbits.
//!
//! * [`iterate`] produces trajectories `x, Vx, V²x, …`,
//! * [`majorization_chain_check`] tests `x ≺ Vx ≺ V²x ≺ …` along one,
//! * [`lyapunov_phi`] evaluates the mass outside a set of species,
//! * [`cesaro`] follows the running means `(x + Vx + ⋯ + V^{n−1}x)/n`,
//! * [`omega_estimate`] clusters the tail of a trajectory,
//! * [`find_fixed_points`] and [`classify_fixed_point`] locate and classify
//!   fixed points by the spectrum of the Jacobian on `Σ v_i = 0`.

mod cesaro;
mod fixed;
mod logdomain;
mod omega;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::OperatorSpec;
use crate::simplex::{self, SimplexPoint};

pub use cesaro::{cesaro, cesaro_subsequence, CesaroOptions, CesaroResult, Schedule, WINDOW as CESARO_WINDOW};
pub use fixed::{
    classify_fixed_point, find_fixed_points, restricted_jacobian, FixedPointClass,
    FixedPointResult, Segment, FP_TOL, SPECTRAL_TOL,
};
pub use logdomain::LogStepper;
pub use omega::{dist_inf_to_segment, omega_estimate, Cluster, OmegaEstimate, CLUSTER_RADIUS, TAIL_FRACTION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    /// Plain evaluation, renormalized (or not) after every step.
    #[default]
    Linear,
    /// Coordinates carried as logarithms; keeps orbits that approach the
    /// boundary from underflowing to exact zeros.
    LogDomain,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateOptions {
    /// Renormalize the mass after each step (linear arithmetic only). When
    /// off, raw images are kept as long as they stay within the simplex
    /// membership band.
    pub renormalize: bool,
    pub arithmetic: Arithmetic,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            renormalize: true,
            arithmetic: Arithmetic::Linear,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<SimplexPoint>,
    pub op_name: String,
    pub renormalized: bool,
    /// Largest `|Σ_k (Vx)_k − 1|` observed before renormalization.
    pub mass_defect_max: f64,
    /// Per-step defects; `defects[t]` belongs to the step producing `points[t + 1]`.
    #[serde(skip)]
    pub defects: Vec<f64>,
}

impl Trajectory {
    pub fn last(&self) -> &SimplexPoint {
        self.points.last().expect("trajectories are nonempty")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn iterate(op: &OperatorSpec, x0: &SimplexPoint, n: usize) -> Result<Trajectory> {
    iterate_with(op, x0, n, IterateOptions::default())
}

pub fn iterate_with(
    op: &OperatorSpec,
    x0: &SimplexPoint,
    n: usize,
    opts: IterateOptions,
) -> Result<Trajectory> {
    if x0.dim() != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            got: x0.dim(),
        });
    }
    let mut points = Vec::with_capacity(n + 1);
    let mut defects = Vec::with_capacity(n);
    points.push(x0.clone());
    match opts.arithmetic {
        Arithmetic::Linear => {
            let mut buf = vec![0.0; op.dim()];
            for _ in 0..n {
                let cur = points.last().expect("nonempty");
                let mass = op.apply_raw(cur.coords(), &mut buf);
                defects.push((mass - 1.0).abs());
                if opts.renormalize {
                    buf.iter_mut().for_each(|v| *v /= mass);
                }
                points.push(SimplexPoint::new(buf.clone())?);
            }
        }
        Arithmetic::LogDomain => {
            let mut stepper = LogStepper::new(op, x0);
            for _ in 0..n {
                defects.push(stepper.step());
                points.push(stepper.point());
            }
        }
    }
    Ok(Trajectory {
        points,
        op_name: op.name.clone(),
        renormalized: opts.renormalize || opts.arithmetic == Arithmetic::LogDomain,
        mass_defect_max: defects.iter().copied().fold(0.0, f64::max),
        defects,
    })
}

/// Final point of an `n`-step linear trajectory without storing the orbit.
pub fn iterate_final(op: &OperatorSpec, x0: &SimplexPoint, n: usize) -> Result<SimplexPoint> {
    let mut x = x0.clone();
    for _ in 0..n {
        x = op.apply(&x)?;
    }
    Ok(x)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainCheck {
    pub holds: bool,
    /// Minimum over steps of the forward slack of `V^{t+1}x` against `V^t x`.
    pub min_slack: f64,
    /// First `t` where `V^{t+1}x ≻ V^t x` fails.
    pub first_violation: Option<usize>,
}

/// Checks `points[t+1] ≻ points[t]` for every consecutive pair.
pub fn majorization_chain_check(traj: &Trajectory, tol: f64) -> ChainCheck {
    let mut min_slack = f64::INFINITY;
    let mut first_violation = None;
    for (t, w) in traj.points.windows(2).enumerate() {
        let v = simplex::compare_slices(w[1].coords(), w[0].coords(), tol);
        min_slack = min_slack.min(v.min_slack_forward);
        if first_violation.is_none() && !v.majorizes() {
            first_violation = Some(t);
        }
    }
    if traj.points.len() < 2 {
        min_slack = 0.0;
    }
    ChainCheck {
        holds: first_violation.is_none(),
        min_slack,
        first_violation,
    }
}

/// `φ(x) = Σ_{i ∉ excluded} x_i`.
pub fn lyapunov_phi(x: &SimplexPoint, excluded: &[usize]) -> f64 {
    x.coords()
        .iter()
        .enumerate()
        .filter(|(i, _)| !excluded.contains(i))
        .map(|(_, v)| v)
        .sum()
}

/// Largest increase `φ(V^{t+1}x) − φ(V^t x)` along the trajectory; the
/// sequence is nonincreasing within `tol` when this is at most `tol`.
pub fn phi_max_increase(traj: &Trajectory, excluded: &[usize]) -> f64 {
    traj.points
        .windows(2)
        .map(|w| lyapunov_phi(&w[1], excluded) - lyapunov_phi(&w[0], excluded))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `‖(V^{n+1}x)↓ − (V^n x)↓‖_∞`.
pub fn sorted_step_change(traj: &Trajectory, n: usize) -> f64 {
    let a = simplex::decreasing_rearrangement(&traj.points[n]);
    let b = simplex::decreasing_rearrangement(&traj.points[n + 1]);
    simplex::dist_inf(&a, &b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{gallery, Params};
    use crate::simplex::EPS_CMP;

    fn op(name: &str) -> OperatorSpec {
        gallery(name, &Params::new()).unwrap()
    }

    #[test]
    fn identity_orbit_is_constant() {
        let x = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let t = iterate(&op("identity"), &x, 10).unwrap();
        assert_eq!(t.len(), 11);
        assert!(t.points.iter().all(|p| p.dist_inf(&x) < 1e-16));
        let c = majorization_chain_check(&t, EPS_CMP);
        assert!(c.holds);
        assert!(c.min_slack.abs() < 1e-15);
    }

    #[test]
    fn example_3d_first_step() {
        let t = iterate(&op("example-3d"), &SimplexPoint::barycenter(3).unwrap(), 1).unwrap();
        let want = [2.0 / 3.0, 2.0 / 9.0, 1.0 / 9.0];
        assert!(simplex::dist_inf(t.points[1].coords(), &want) < 1e-15);
        assert!(t.mass_defect_max <= 10.0 * 9.0 * f64::EPSILON);
    }

    #[test]
    fn counterexample_chain_breaks_immediately() {
        let x = SimplexPoint::new(vec![0.5, 0.49, 0.01]).unwrap();
        let t = iterate(&op("counterexample-necessary"), &x, 5).unwrap();
        let c = majorization_chain_check(&t, EPS_CMP);
        assert!(!c.holds);
        assert_eq!(c.first_violation, Some(0));
    }

    #[test]
    fn phi_examples() {
        let e1 = SimplexPoint::vertex(3, 0).unwrap();
        assert_eq!(lyapunov_phi(&e1, &[0]), 0.0);
        let x = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        assert!((lyapunov_phi(&x, &[0]) - 0.8).abs() < 1e-15);
    }

    #[test]
    fn form6_phi_decreases() {
        let o = op("form6-random");
        let x = SimplexPoint::barycenter(o.dim()).unwrap();
        let t = iterate(&o, &x, 100).unwrap();
        assert!(phi_max_increase(&t, &[0]) <= EPS_CMP);
    }

    #[test]
    fn log_domain_agrees_with_linear_away_from_boundary() {
        let o = op("example-3d");
        let x = SimplexPoint::new(vec![0.2, 0.3, 0.5]).unwrap();
        let a = iterate(&o, &x, 50).unwrap();
        let b = iterate_with(
            &o,
            &x,
            50,
            IterateOptions {
                arithmetic: Arithmetic::LogDomain,
                ..Default::default()
            },
        )
        .unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert!(p.dist_inf(q) < 1e-13);
        }
    }

    #[test]
    fn raw_mode_keeps_defects() {
        let o = op("form6-random");
        let x = SimplexPoint::barycenter(o.dim()).unwrap();
        let t = iterate_with(
            &o,
            &x,
            200,
            IterateOptions {
                renormalize: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(!t.renormalized);
        assert!(t.mass_defect_max < 1e-13);
    }
}
