//! Repair the Amitsur pre-complex of a signed pre-functor modulo 2^k.
//!
//! cargo run --example amitsur_repair

use mackey_dress::amitsur::{amitsur_pseudo_complex, repair_filtered_truncated, splits_first_boundary};
use mackey_dress::group::group_from_spec;
use mackey_dress::gset::parse_gset;
use mackey_dress::mackey::{signed_pre_functor, Orientation};
use num_bigint::BigInt;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (spec, omega, set) in [("C2", "trivial-kernel", "free,point"), ("S3", "sign", "C2")] {
        let g = group_from_spec(spec)?;
        let m = signed_pre_functor(&g, &Orientation::parse(&g, omega)?);
        let x = parse_gset(&g, set)?;
        let c = amitsur_pseudo_complex(&m, &x, 3, 2)?;
        let odd = c.composition_defects_mod(&BigInt::from(2));
        println!("{spec} {omega} over {set}: ranks {:?}, complex {}, defects vanish mod 2 {}", c.ranks, c.is_complex(), odd.is_empty());
        for k in 1..=3 {
            let r = repair_filtered_truncated(&c, k)?;
            println!("  mod 2^{k}: certified {}, M(•) splits off {}, changed degrees {:?}", r.certified(), splits_first_boundary(&r), r.changed_degrees);
        }
    }
    Ok(())
}
