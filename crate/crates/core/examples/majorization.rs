//! Compare points of the simplex under majorization.
//!
//!     cargo run --example majorization

use qso::simplex::{compare_majorization, decreasing_rearrangement, SimplexPoint, EPS_CMP};

fn main() -> qso::Result<()> {
    let x = SimplexPoint::new(vec![0.2, 0.5, 0.3])?;
    let y = SimplexPoint::new(vec![0.6, 0.1, 0.3])?;
    println!("x↓ = {:?}", decreasing_rearrangement(&x));
    println!("y↓ = {:?}", decreasing_rearrangement(&y));

    let v = compare_majorization(&y, &x, EPS_CMP)?;
    println!(
        "y vs x: {:?} (forward slack {:.3}, backward slack {:.3})",
        v.relation, v.min_slack_forward, v.min_slack_backward
    );

    // every point sits between the barycenter and a vertex
    let bary = SimplexPoint::barycenter(3)?;
    let e1 = SimplexPoint::vertex(3, 0)?;
    println!("x vs barycenter: {:?}", compare_majorization(&x, &bary, EPS_CMP)?.relation);
    println!("e1 vs x: {:?}", compare_majorization(&e1, &x, EPS_CMP)?.relation);

    // incomparable pair
    let a = SimplexPoint::new(vec![0.6, 0.2, 0.2])?;
    let b = SimplexPoint::new(vec![0.5, 0.4, 0.1])?;
    println!("a vs b: {:?}", compare_majorization(&a, &b, EPS_CMP)?.relation);
    Ok(())
}
