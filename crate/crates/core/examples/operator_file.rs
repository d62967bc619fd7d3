//! Build an operator from coefficient entries (the JSON file layout),
//! validate it, and see how violations are reported.
//!
//!     cargo run --example operator_file

use qso::operators::{validate, RawEntry, RawOperator};

fn entry(i: usize, j: usize, k: usize, p: f64) -> RawEntry {
    RawEntry { i, j, l: None, k, p }
}

fn main() -> qso::Result<()> {
    // m = 2: (Vx)_1 = x1² + x2² + 1.5 x1x2, (Vx)_2 = 0.5 x1x2
    let mut raw = RawOperator {
        name: "two-species".into(),
        m: 2,
        degree: 2,
        entries: vec![
            entry(1, 1, 1, 1.0),
            entry(2, 2, 1, 1.0),
            entry(1, 2, 1, 0.75),
            entry(2, 1, 1, 0.75),
            entry(1, 2, 2, 0.25),
            entry(2, 1, 2, 0.25),
        ],
        symmetrize: false,
    };
    let op = validate(&raw)?;
    println!("valid: {}", serde_json::to_string(&op.to_raw())?);

    raw.entries[4].p = 0.15;
    raw.entries[5].p = 0.15;
    match validate(&raw) {
        Ok(_) => println!("unexpectedly valid"),
        Err(e) => println!("{}: {e}", e.code()),
    }
    Ok(())
}
