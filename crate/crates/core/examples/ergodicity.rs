//! Cesàro means of a dissipative operator settle; those of the Zakharevich
//! operator keep swinging between the vertices.
//!
//!     cargo run --release --example ergodicity [n_max]

use qso::dynamics::{cesaro, majorization_chain_check, iterate, CesaroOptions};
use qso::operators::{gallery, Params};
use qso::simplex::EPS_CMP;
use qso::SimplexPoint;

fn main() -> qso::Result<()> {
    let n_max: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1_000_000);
    let x0 = SimplexPoint::new(vec![0.3, 0.3, 0.4])?;

    let diss = gallery("example-3d", &Params::new())?;
    let chain = majorization_chain_check(&iterate(&diss, &x0, 1000)?, EPS_CMP);
    println!("example-3d: x ≺ Vx ≺ V²x ≺ … holds: {} (min slack {:e})", chain.holds, chain.min_slack);

    for name in ["example-3d", "zakharevich"] {
        let op = gallery(name, &Params::new())?;
        let r = cesaro(&op, &x0, &CesaroOptions::new(n_max))?;
        println!("{name}: fluctuation {:.3e}, converged {}", r.fluctuation, r.converged);
        for (n, mean) in r.partial_means.iter().filter(|(n, _)| *n >= 1024) {
            println!("    n={n:>8}  mean={:.5?}", mean.coords());
        }
    }
    Ok(())
}
