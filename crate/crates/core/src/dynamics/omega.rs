//! Estimation of ω-limit sets from the tail of a trajectory.

use serde::Serialize;

use super::Trajectory;
use crate::error::{Error, Result};
use crate::simplex::{self, SimplexPoint};

pub const TAIL_FRACTION: f64 = 0.2;
pub const CLUSTER_RADIUS: f64 = 1e-4;
/// Shortest trajectory accepted by [`omega_estimate`].
pub const MIN_LEN: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub representative: SimplexPoint,
    pub visits: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaEstimate {
    pub clusters: Vec<Cluster>,
    pub cycle_order: Option<usize>,
    pub sorted_limit: Vec<f64>,
}

fn factorial_capped(m: usize, cap: usize) -> usize {
    let mut f: usize = 1;
    for i in 2..=m {
        f = f.saturating_mul(i);
        if f >= cap {
            return cap;
        }
    }
    f
}

/// Clusters the last `tail_fraction` of the trajectory greedily in the
/// `∞`-norm, newest point first; each cluster is represented by the first
/// point that opened it.
pub fn omega_estimate(
    traj: &Trajectory,
    tail_fraction: f64,
    cluster_radius: f64,
) -> Result<OmegaEstimate> {
    let len = traj.points.len();
    if len < MIN_LEN {
        return Err(Error::TrajectoryTooShort { len, min: MIN_LEN });
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::ParamOutOfRange {
            name: "tail_fraction".into(),
            value: tail_fraction,
            range: "(0, 1]".into(),
        });
    }
    if !(cluster_radius > 0.0) {
        return Err(Error::ParamOutOfRange {
            name: "cluster_radius".into(),
            value: cluster_radius,
            range: "(0, ∞)".into(),
        });
    }
    let n_tail = ((len as f64 * tail_fraction).ceil() as usize).clamp(1, len);
    let tail = &traj.points[len - n_tail..];

    let mut clusters: Vec<Cluster> = Vec::new();
    for p in tail.iter().rev() {
        match clusters
            .iter_mut()
            .find(|c| c.representative.dist_inf(p) <= cluster_radius)
        {
            Some(c) => c.visits += 1,
            None => clusters.push(Cluster {
                representative: p.clone(),
                visits: 1,
            }),
        }
    }

    let m = traj.points[0].dim();
    let max_p = factorial_capped(m, n_tail / 2);
    let cycle_order = (1..=max_p).find(|&p| {
        tail.iter()
            .zip(&tail[p..])
            .all(|(a, b)| a.dist_inf(b) <= cluster_radius)
    });

    Ok(OmegaEstimate {
        clusters,
        cycle_order,
        sorted_limit: simplex::decreasing_rearrangement(traj.last()),
    })
}

/// `min_{λ ∈ [0,1]} ‖x − (λa + (1−λ)b)‖_∞`.
pub fn dist_inf_to_segment(x: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let f = |lam: f64| {
        x.iter()
            .zip(a.iter().zip(b))
            .map(|(xi, (ai, bi))| (xi - (lam * ai + (1.0 - lam) * bi)).abs())
            .fold(0.0, f64::max)
    };
    // Convex in λ: golden-section search.
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    [f(0.0), f(1.0), fc, fd, f(0.5 * (lo + hi))]
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::iterate;
    use crate::operators::{gallery, Params};

    #[test]
    fn too_short() {
        let op = gallery("identity", &Params::new()).unwrap();
        let t = iterate(&op, &SimplexPoint::barycenter(3).unwrap(), 50).unwrap();
        assert!(matches!(
            omega_estimate(&t, TAIL_FRACTION, CLUSTER_RADIUS),
            Err(Error::TrajectoryTooShort { len: 51, .. })
        ));
    }

    #[test]
    fn identity_single_cluster() {
        let op = gallery("identity", &Params::new()).unwrap();
        let x = SimplexPoint::new(vec![0.1, 0.6, 0.3]).unwrap();
        let t = iterate(&op, &x, 200).unwrap();
        let w = omega_estimate(&t, TAIL_FRACTION, CLUSTER_RADIUS).unwrap();
        assert_eq!(w.clusters.len(), 1);
        assert_eq!(w.clusters[0].representative, x);
        assert_eq!(w.cycle_order, Some(1));
        assert_eq!(w.sorted_limit, vec![0.6, 0.3, 0.1]);
    }

    #[test]
    fn form6_converges_to_e1() {
        let op = gallery("form6-random", &Params::new()).unwrap();
        let x = SimplexPoint::barycenter(op.dim()).unwrap();
        let t = iterate(&op, &x, 2000).unwrap();
        let w = omega_estimate(&t, TAIL_FRACTION, CLUSTER_RADIUS).unwrap();
        assert_eq!(w.clusters.len(), 1);
        assert_eq!(w.cycle_order, Some(1));
        let e1 = SimplexPoint::vertex(op.dim(), 0).unwrap();
        assert!(w.clusters[0].representative.dist_inf(&e1) < 1e-8);
    }

    #[test]
    fn segment_distance() {
        let a = [1.0, 0.0, 0.0];
        let b = [0.0, 1.0, 0.0];
        assert!(dist_inf_to_segment(&[0.3, 0.7, 0.0], &a, &b) < 1e-15);
        let d = dist_inf_to_segment(&[0.4, 0.4, 0.2], &a, &b);
        assert!((d - 0.2).abs() < 1e-12);
    }
}
