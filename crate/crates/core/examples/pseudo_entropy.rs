//! Pseudo-entropy of the alternating g, h system next to its Bowen entropy.

use nds_entropy::bowen::{entropy_estimate, BowenParams};
use nds_entropy::corpus::load_fixture;
use nds_entropy::pseudograph::pseudo_entropy;

fn main() -> nds_entropy::Result<()> {
    let f = load_fixture("example-gh")?.system;
    let params = BowenParams {
        epsilon: 0.05,
        n_min: 1,
        n_max: 5,
        grid_size: 2000,
    };
    let h = entropy_estimate(&f, &params)?;
    for factor in [1.0, 2.0, 4.0] {
        let alpha = factor / params.grid_size as f64;
        let hp = pseudo_entropy(&f, &params, alpha)?;
        println!(
            "alpha = {alpha:.5}  h_p = {:.4}  h = {:.4}",
            hp.value, h.value
        );
    }
    Ok(())
}
