//! Amitsur complexes of a Green ring over a generating set are exact.
//!
//! cargo run --example amitsur_exactness

use mackey_dress::amitsur::{amitsur_complex, check_exactness, Variant};
use mackey_dress::group::group_from_spec;
use mackey_dress::gset::{parse_gset, GSet};
use mackey_dress::mackey::{burnside_functor, perm_char_green_ring};
use mackey_dress::zlocal::Locale;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = group_from_spec("S4")?;
    let p = perm_char_green_ring(&g);
    let x = parse_gset(&g, "hyperelementary")?;
    for v in [Variant::Homological, Variant::Cohomological] {
        let cx = amitsur_complex(p.mackey(), &x, &GSet::point(&g), 3, v)?;
        let rep = check_exactness(&cx.chain, &[0, 1, 2], Locale::Integral)?;
        println!("S4 permchar {v:?}: ranks {:?}, exact {}", cx.chain.ranks, rep.exact);
    }
    let c2 = group_from_spec("C2")?;
    let b = burnside_functor(&c2);
    let cx = amitsur_complex(b.mackey(), &GSet::free(&c2), &GSet::point(&c2), 2, Variant::Homological)?;
    for d in check_exactness(&cx.chain, &[0, 1], Locale::Integral)?.degrees {
        println!("C2 burnside over C2/e: H_{} = {}", d.degree, d.homology);
    }
    Ok(())
}
