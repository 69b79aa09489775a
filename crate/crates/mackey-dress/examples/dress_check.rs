//! Dress generation verdicts, per prime and generically.
//!
//! cargo run --example dress_check

use mackey_dress::dress::is_dress_generating;
use mackey_dress::group::group_from_spec;
use mackey_dress::gset::parse_gset;
use mackey_dress::mackey::{burnside_functor, perm_char_green_ring};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cases = [("A5", "permchar", "cyclic"), ("S4", "burnside", "cyclic"), ("S4", "burnside", "hyperelementary"), ("C2", "burnside", "free")];
    for (spec, functor, set) in cases {
        let g = group_from_spec(spec)?;
        let r = if functor == "burnside" { burnside_functor(&g) } else { perm_char_green_ring(&g) };
        let x = parse_gset(&g, set)?;
        let v = is_dress_generating(&r, &x)?;
        let primes: Vec<String> = v.per_prime.iter().map(|p| format!("{}:{}", p.prime, p.report.surjective)).collect();
        println!("{spec} {functor} {set}: {} [{}] generic cokernel {}", v.overall, primes.join(" "), v.generic.cokernel_text);
    }
    Ok(())
}
