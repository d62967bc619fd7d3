//! Degree-3 operators: the same checks and dynamics as in the quadratic case.
//!
//!     cargo run --example cubic

use qso::dissipativity::{leading_bound, necessary_conditions, COEF_TOL};
use qso::dynamics::{cesaro, iterate, majorization_chain_check, CesaroOptions};
use qso::operators::{gallery, Params};
use qso::simplex::EPS_CMP;
use qso::SimplexPoint;

fn main() -> qso::Result<()> {
    let op = gallery("cubic-example", &Params::new())?;
    let nc = necessary_conditions(&op, COEF_TOL);
    println!(
        "degree {}: vertex rows pass {}, leading bound {:.4} violated {} times",
        op.degree(),
        nc.lemma_vertex_rows.iter().all(|r| r.pass),
        leading_bound(op.degree()),
        nc.lemma_half_bound.len()
    );

    let x0 = SimplexPoint::new(vec![0.2, 0.5, 0.3])?;
    let traj = iterate(&op, &x0, 1000)?;
    println!("chain holds: {}", majorization_chain_check(&traj, EPS_CMP).holds);
    println!("V^1000 x = {:?}", traj.last().coords());
    println!("J(x0) =\n{}", op.jacobian(&x0)?);

    let r = cesaro(&op, &x0, &CesaroOptions::new(10_000))?;
    println!("Cesàro mean at 1e4: {:?}", r.partial_means.last().map(|(_, p)| p.coords()));
    Ok(())
}
