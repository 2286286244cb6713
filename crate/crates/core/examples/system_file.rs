//! Define a system in TOML, estimate its entropy, and write it back out.

use nds_entropy::bowen::{entropy_estimate, BowenParams};
use nds_entropy::sysfile::{parse_system_str, serialize_system};

const DEFINITION: &str = r#"
kind = "periodic"
maps = [
  { breakpoints = [0, "1/3", "2/3", 1], values = [0, 1, 0, 1] },
  { breakpoints = [0, "1/2", 1], values = [1, 0, 1] },
]
"#;

fn main() -> nds_entropy::Result<()> {
    let f = parse_system_str(DEFINITION)?;
    let params = BowenParams {
        epsilon: 0.05,
        n_min: 1,
        n_max: 5,
        grid_size: 2000,
    };
    println!("h = {:.4}", entropy_estimate(&f, &params)?.value);
    print!("{}", serialize_system(&f));
    Ok(())
}
