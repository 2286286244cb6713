//! Measured chain mixing times against the Lipschitz lower bound, and the entropy
//! lower bound built from them.

use nds_entropy::bounds::{entropy_lower_bound, mixing_time_lower_bound};
use nds_entropy::corpus::load_fixture;
use nds_entropy::recurrence::{chain_mixing_time, default_confirm_horizon};
use nds_entropy::systems::lipschitz_constant;
use nds_entropy::Grid;

fn main() -> nds_entropy::Result<()> {
    let grid = Grid::new(2000)?;
    for name in ["tent", "identity"] {
        let f = load_fixture(name)?.system;
        let c = lipschitz_constant(&f);
        for (delta, eps) in [(0.05, 0.01), (0.1, 0.02)] {
            let m = chain_mixing_time(&f, eps, delta, &grid, default_confirm_horizon(&f))?;
            let bound = mixing_time_lower_bound(c, 1.0, delta, eps)?;
            println!(
                "{name:<9} δ={delta} ε={eps}  measured {:>3}  bound {bound:.3}",
                m.value
            );
        }
    }

    let tent = load_fixture("tent")?.system;
    let lb = entropy_lower_bound(&tent, &[0.02, 0.05, 0.1], 0.01, &grid)?;
    println!("{}", lb.report().to_json());
    Ok(())
}
