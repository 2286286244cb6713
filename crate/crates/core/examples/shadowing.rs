//! Random pseudo-orbits of the tent map and the true orbits that trace them.

use nds_entropy::corpus::load_fixture;
use nds_entropy::pseudograph::{random_pseudo_orbit, shadowing_witness};
use nds_entropy::Grid;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> nds_entropy::Result<()> {
    let tent = load_fixture("tent")?.system;
    let grid = Grid::new(100_000)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (alpha, eps, len) = (1e-4, 1e-2, 50);
    let mut traced = 0;
    for _ in 0..20 {
        let p = random_pseudo_orbit(&tent, alpha, &grid, len, &mut rng)?;
        match shadowing_witness(&tent, &p, eps)? {
            Some(w) => {
                traced += 1;
                println!("start {:.6}  deviation {:.2e}", p.centers()[0], w.deviation);
            }
            None => println!("start {:.6}  not traced", p.centers()[0]),
        }
    }
    println!("{traced}/20 traced within {eps}");
    Ok(())
}
