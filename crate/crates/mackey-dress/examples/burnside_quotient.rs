//! The quotient A_M of the Burnside ring acting on permutation characters.
//!
//! cargo run --example burnside_quotient -- S4

use mackey_dress::bqgr::bqgr;
use mackey_dress::group::group_from_spec;
use mackey_dress::mackey::perm_char_green_ring;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "S4".into());
    let g = group_from_spec(&spec)?;
    let p = perm_char_green_ring(&g);
    let q = bqgr(p.mackey())?;
    for c in q.export().classes {
        println!("{:>4}: A rank {:>2}, ideal rank {:>2}, quotient free rank {}", c.class, c.burnside_rank, c.ideal_rank, c.quotient.free_rank);
    }
    Ok(())
}
