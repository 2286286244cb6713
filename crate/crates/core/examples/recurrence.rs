//! Chain-recurrent set and chain classes of the two-attractor map, plus omega-limits.

use nds_entropy::corpus::load_fixture;
use nds_entropy::recurrence::{omega_limit_nodes, recurrence_report};
use nds_entropy::Grid;

fn main() -> nds_entropy::Result<()> {
    let f = load_fixture("two-attractor")?.system;
    let grid = Grid::new(200)?;
    let report = recurrence_report(&f, grid.spacing(), &grid, Some((0.05, 0.1)))?;
    println!("{}", report.to_json());

    for x in [0.1, 0.4, 0.6, 0.9] {
        let w = omega_limit_nodes(&f, x, 200, 20, 1e-6, &grid)?;
        let centres: Vec<f64> = w.iter().map(|&i| grid.center(i)).collect();
        println!("omega({x}) = {centres:?}");
    }
    Ok(())
}
