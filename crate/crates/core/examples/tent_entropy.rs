//! Bowen entropy of the tent map against the lap-number growth rate.

use nds_entropy::bowen::{entropy_estimate, BowenParams};
use nds_entropy::corpus::load_fixture;
use nds_entropy::systems::lap_count;

fn main() -> nds_entropy::Result<()> {
    let tent = load_fixture("tent")?.system;
    let params = BowenParams {
        epsilon: 0.05,
        n_min: 1,
        n_max: 5,
        grid_size: 2000,
    };
    let est = entropy_estimate(&tent, &params)?;
    print!("{}", est.series.to_csv());
    println!("{}", est.summary_json());

    let laps = (lap_count(&tent, 12)? as f64).ln() / 12.0;
    println!("lap growth at n = 12: {laps:.4}");
    Ok(())
}
