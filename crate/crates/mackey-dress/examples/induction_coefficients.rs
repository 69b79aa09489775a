//! Coefficients a_H with Σ a_H Ind∘Res = 1 on M(•) over Z_(p).
//!
//! cargo run --example induction_coefficients -- A5 2

use mackey_dress::dress::{induction_coefficients, kernel_image_cover_check};
use mackey_dress::group::group_from_spec;
use mackey_dress::gset::{gset_of_family, Family};
use mackey_dress::mackey::{burnside_functor, perm_char_green_ring};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let spec = args.next().unwrap_or_else(|| "A5".into());
    let p: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let g = group_from_spec(&spec)?;
    let r = perm_char_green_ring(&g);
    let table = induction_coefficients(r.mackey(), &Family::p_hyperelementary(&g, p), p)?;
    println!("{spec} at p = {p}: verified {}", table.verified);
    for c in &table.coefficients {
        println!("  a_{:<4} = {}", c.class, c.value);
    }
    let b = burnside_functor(&g);
    let cover = kernel_image_cover_check(b.mackey(), &gset_of_family(&Family::cyclic(&g)), p)?;
    println!("burnside K(Y) + I(Y) at p = {p}: {}", cover.holds);
    Ok(())
}
