//! Operators whose vertex rows all point at e1: orbits converge to e1, the
//! mass outside species 1 decreases, and e1 is the only fixed point.
//!
//!     cargo run --release --example regularity [seed]

use qso::dynamics::{find_fixed_points, iterate, phi_max_increase, FP_TOL};
use qso::operators::{gallery, Params};
use qso::SimplexPoint;

fn main() -> qso::Result<()> {
    let seed: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.0);
    let mut p = Params::new();
    p.insert("seed".into(), seed);
    let op = gallery("form6-random", &p)?;
    let e1 = SimplexPoint::vertex(op.dim(), 0)?;

    let traj = iterate(&op, &SimplexPoint::barycenter(op.dim())?, 10_000)?;
    for n in [0, 10, 100, 1000, 10_000] {
        println!("n={n:>5}  distance to e1 = {:.3e}", traj.points[n].dist_inf(&e1));
    }
    println!("largest increase of x2+..+xm: {:e}", phi_max_increase(&traj, &[0]));

    for fp in find_fixed_points(&op, 32, FP_TOL, qso::DEFAULT_SEED)? {
        println!(
            "fixed point {:?}: {:?}, moduli {:.4?}",
            fp.point.coords(),
            fp.classification,
            fp.restricted_eigenvalues
        );
    }
    Ok(())
}
