//! Check the Mackey axioms for the Burnside functor and watch the signed
//! pre-functor fail them.
//!
//! cargo run --example mackey_validate

use mackey_dress::group::group_from_spec;
use mackey_dress::mackey::{burnside_functor, signed_pre_functor, validate_mackey, Orientation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for spec in ["S3", "S4", "A5"] {
        let g = group_from_spec(spec)?;
        let b = burnside_functor(&g);
        let r = validate_mackey(b.mackey())?;
        println!("{spec}: burnside is_mackey={} squares={} unions={}", r.is_mackey, r.squares_checked, r.unions_checked);
        let green = b.validate_green();
        println!("{spec}: green identities checked={} passed={}", green.checks, green.passed());
    }
    let g = group_from_spec("S3")?;
    let m = signed_pre_functor(&g, &Orientation::parse(&g, "sign")?);
    let r = validate_mackey(&m)?;
    println!("S3 signed: is_mackey={} inner defects={} square failures={}", r.is_mackey, r.inner_defects.len(), r.square_failures.len());
    for d in r.inner_defects.iter().take(3) {
        println!("  conjugation by {} on {}", d.element, d.class);
    }
    Ok(())
}
