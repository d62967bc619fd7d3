//! Exact necessary conditions and sampled certification of `Vx ≻ x`.
//!
//!     cargo run --release --example dissipativity_check

use qso::dissipativity::{certify_sampled, necessary_conditions, SamplingOptions, COEF_TOL};
use qso::operators::{gallery, Params};

fn report(name: &str, params: &[(&str, f64)]) -> qso::Result<()> {
    let p: Params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    let op = gallery(name, &p)?;
    let nc = necessary_conditions(&op, COEF_TOL);
    let rep = certify_sampled(&op, &SamplingOptions::default());
    println!(
        "{name} {params:?}: vertex rows {}, half-bound violations {}, third-entry violations {}, verdict {:?}",
        nc.lemma_vertex_rows.iter().all(|r| r.pass),
        nc.lemma_half_bound.len(),
        nc.lemma_third_zero.len(),
        rep.verdict
    );
    if let (Some(w), Some(s)) = (&rep.sampled.witness, rep.sampled.witness_slack) {
        println!("    witness {:?} with slack {s:.6}", w.coords());
    }
    Ok(())
}

fn main() -> qso::Result<()> {
    report("example-3d", &[])?;
    report("counterexample-necessary", &[])?;
    for a in [0.5, 0.99, 1.0, 1.5, 2.0] {
        report("two-dim-family", &[("a", a)])?;
    }
    report("zakharevich", &[])?;
    report("identity", &[])?;
    Ok(())
}
