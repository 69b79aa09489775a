//! Print the subgroup classes and table of marks of a group.
//!
//! cargo run --example table_of_marks -- S4

use mackey_dress::burnside::table_of_marks;
use mackey_dress::group::group_from_spec;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = std::env::args().nth(1).unwrap_or_else(|| "S4".into());
    let g = group_from_spec(&spec)?;
    println!("{} of order {}, {} subgroup classes", g.name(), g.order(), g.class_count());
    let names: Vec<&str> = (0..g.class_count()).map(|c| g.class(c).name.as_str()).collect();
    println!("{:>6} {}", "", names.iter().map(|n| format!("{n:>4}")).collect::<String>());
    for (k, row) in table_of_marks(&g).iter().enumerate() {
        println!("{:>6} {}", names[k], row.iter().map(|m| format!("{m:>4}")).collect::<String>());
    }
    Ok(())
}
