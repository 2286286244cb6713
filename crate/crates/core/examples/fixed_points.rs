//! Exact periodic points of the tent map and their growth rate.

use nds_entropy::bounds::fix_growth_entropy;
use nds_entropy::corpus::load_fixture;
use nds_entropy::systems::{fixed_point_count, fixed_points};

fn main() -> nds_entropy::Result<()> {
    let tent = load_fixture("tent")?.system;
    println!("Fix(T^3) = {:?}", fixed_points(&tent, 3)?);
    for n in [1, 4, 8, 12, 16] {
        println!("n = {n:>2}  N(Fix) = {}", fixed_point_count(&tent, n)?);
    }
    let ns: Vec<usize> = (1..=16).collect();
    println!("growth rate {:.4}", fix_growth_entropy(&tent, &ns)?.value);
    Ok(())
}
