//! Periodic-pseudo-entropy from the spectral radius of the lifted transition graph,
//! with the trace-count regression as a cross-check.

use nds_entropy::corpus::load_fixture;
use nds_entropy::pseudograph::periodic_pseudo_entropy;
use nds_entropy::Grid;

fn main() -> nds_entropy::Result<()> {
    let grid = Grid::new(2000)?;
    for name in ["tent", "example-gh", "reflection", "two-attractor"] {
        let f = load_fixture(name)?.system;
        let r = periodic_pseudo_entropy(&f, grid.spacing(), &grid, 10, 30)?;
        println!(
            "{name:<14} H_p = {:.4}  trace fit = {:.4}  transitive = {}",
            r.value, r.trace_fit.value, r.transitive
        );
        for w in &r.warnings {
            println!("  warning: {w}");
        }
    }
    Ok(())
}
