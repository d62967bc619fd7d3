//! Walk through the built-in operators: apply each one at the barycenter and
//! check that its exported JSON validates back to the same tensor.
//!
//!     cargo run --example gallery_tour

use qso::operators::{gallery, roster, validate, Params};
use qso::SimplexPoint;

fn main() -> qso::Result<()> {
    for entry in roster() {
        let op = gallery(entry.name, &Params::new())?;
        let x = SimplexPoint::barycenter(op.dim())?;
        let y = op.apply(&x)?;
        let back = validate(&op.to_raw())?;
        println!(
            "{:<26} m={} degree={} V(bary)={:.4?} round-trip={}",
            entry.name,
            op.dim(),
            op.degree(),
            y.coords(),
            back.tensor == op.tensor
        );
    }

    // parameters are checked against their documented ranges
    let mut p = Params::new();
    p.insert("a".into(), 2.5);
    if let Err(e) = gallery("two-dim-family", &p) {
        println!("two-dim-family a=2.5: {e}");
    }
    Ok(())
}
