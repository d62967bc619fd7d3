//! A segment of fixed points: every point of co{e1, e2} is fixed, each has
//! restricted spectrum {1, 0, 0}, and orbits land on the segment.
//!
//!     cargo run --example fixed_segment

use qso::dynamics::{
    classify_fixed_point, dist_inf_to_segment, find_fixed_points, iterate, omega_estimate,
    CLUSTER_RADIUS, FP_TOL, SPECTRAL_TOL, TAIL_FRACTION,
};
use qso::operators::{gallery, Params};
use qso::SimplexPoint;

fn main() -> qso::Result<()> {
    let op = gallery("form8-instance", &Params::new())?;
    let e1 = SimplexPoint::vertex(4, 0)?;
    let e2 = SimplexPoint::vertex(4, 1)?;

    for lam in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let x = SimplexPoint::mix(&e1, &e2, lam)?;
        let c = classify_fixed_point(&op, &x, SPECTRAL_TOL)?;
        println!("λ={lam:<4} residual {:e}  {:?}  moduli {:?}", c.residual, c.classification, c.restricted_eigenvalues);
    }

    for fp in find_fixed_points(&op, 32, FP_TOL, qso::DEFAULT_SEED)? {
        if let Some(seg) = &fp.endpoints {
            println!("continuum from {:?} to {:?}", seg.a.coords(), seg.b.coords());
        }
    }

    let x0 = SimplexPoint::new(vec![0.1, 0.2, 0.3, 0.4])?;
    let traj = iterate(&op, &x0, 2000)?;
    let w = omega_estimate(&traj, TAIL_FRACTION, CLUSTER_RADIUS)?;
    for c in &w.clusters {
        let d = dist_inf_to_segment(c.representative.coords(), e1.coords(), e2.coords());
        println!("ω cluster {:.6?} ({} visits), distance to segment {d:e}", c.representative.coords(), c.visits);
    }
    Ok(())
}
