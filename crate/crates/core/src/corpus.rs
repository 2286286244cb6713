//! Pinned fixture systems with expected values.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::systems::{MapSequence, PiecewiseLinearMap};

pub const FIXTURE_NAMES: [&str; 6] = [
    "example-gh",
    "tent",
    "reflection",
    "identity",
    "two-attractor",
    "tent-uniform-limit",
];

/// Horizon of the finite tent-uniform-limit sequence.
pub const UNIFORM_LIMIT_HORIZON: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Tag {
    Transitive,
    Mixing,
    ZeroEntropy,
    Expansive,
    Lipschitz(f64),
}

impl std::fmt::Display for Tag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Tag::Transitive => f.write_str("transitive"),
            Tag::Mixing => f.write_str("mixing"),
            Tag::ZeroEntropy => f.write_str("zero-entropy"),
            Tag::Expansive => f.write_str("expansive"),
            Tag::Lipschitz(c) => write!(f, "lipschitz-c={c}"),
        }
    }
}

/// Where an expected value comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Stated with the example's definition.
    Published,
    /// Immediate from the definitions.
    Elementary,
    /// Computed by an independent method, named here.
    Oracle(&'static str),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Golden {
    pub value: f64,
    pub tolerance: f64,
    pub provenance: Provenance,
}

impl Golden {
    pub fn accepts(&self, x: f64) -> bool {
        (x - self.value).abs() <= self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub name: &'static str,
    pub description: &'static str,
    pub system: MapSequence,
    pub tags: Vec<Tag>,
    pub goldens: BTreeMap<&'static str, Golden>,
}

impl Fixture {
    pub fn has_tag(&self, tag: Tag) -> bool {
        self.tags.contains(&tag)
    }

    pub fn lipschitz_tag(&self) -> Option<f64> {
        self.tags.iter().find_map(|t| match t {
            Tag::Lipschitz(c) => Some(*c),
            _ => None,
        })
    }
}

fn pl(bps: &[f64], vals: &[f64]) -> PiecewiseLinearMap {
    PiecewiseLinearMap::new(bps.to_vec(), vals.to_vec()).expect("fixture maps are valid")
}

pub fn map_g() -> PiecewiseLinearMap {
    pl(&[0.0, 0.25, 0.75, 1.0], &[0.5, 1.0, 0.0, 0.5])
}

pub fn map_h() -> PiecewiseLinearMap {
    pl(&[0.0, 0.5, 0.75, 1.0], &[0.5, 1.0, 0.0, 0.5])
}

/// Attracting fixed points at 1/4 and 3/4, repelling at 1/2; slopes 1/2 and 3/2.
pub fn map_two_attractor() -> PiecewiseLinearMap {
    pl(
        &[0.0, 0.25, 0.375, 0.5, 0.625, 0.75, 1.0],
        &[0.125, 0.25, 0.3125, 0.5, 0.6875, 0.75, 0.875],
    )
}

/// Tent map of slope s_k = 2 - 1/(k + 4); the peak s_k/2 is written as (2k+7)/(2k+8).
pub fn map_uniform_limit(k: usize) -> PiecewiseLinearMap {
    let peak = (2 * k + 7) as f64 / (2 * k + 8) as f64;
    pl(&[0.0, 0.5, 1.0], &[0.0, peak, 0.0])
}

fn goldens(items: &[(&'static str, f64, f64, Provenance)]) -> BTreeMap<&'static str, Golden> {
    items
        .iter()
        .map(|(k, v, t, p)| {
            (
                *k,
                Golden {
                    value: *v,
                    tolerance: *t,
                    provenance: p.clone(),
                },
            )
        })
        .collect()
}

pub fn load_fixture(name: &str) -> Result<Fixture> {
    use Provenance::*;
    let fx = match name {
        "example-gh" => Fixture {
            name: "example-gh",
            description: "period-2 system alternating g and h",
            system: MapSequence::periodic(vec![map_g(), map_h()])?,
            tags: vec![Tag::Transitive, Tag::Lipschitz(4.0)],
            goldens: goldens(&[
                ("entropy", LN_2, 0.15, Oracle("half the lap growth rate of h o g")),
                ("lipschitz", 4.0, 0.0, Published),
                ("laps_2", 6.0, 0.0, Oracle("exact composition")),
            ]),
        },
        "tent" => Fixture {
            name: "tent",
            description: "tent map T(x) = 1 - |1 - 2x|",
            system: MapSequence::autonomous(PiecewiseLinearMap::tent()),
            tags: vec![Tag::Transitive, Tag::Mixing, Tag::Lipschitz(2.0)],
            goldens: goldens(&[
                ("entropy", LN_2, 0.10, Oracle("lap count 2^n")),
                ("fix_growth", LN_2, 0.02, Oracle("per-piece root count 2^n")),
                ("lipschitz", 2.0, 0.0, Elementary),
                ("laps_4", 16.0, 0.0, Oracle("exact composition")),
                ("fixed_points_3", 8.0, 0.0, Oracle("per-piece root count")),
            ]),
        },
        "reflection" => Fixture {
            name: "reflection",
            description: "isometric involution x -> 1 - x",
            system: MapSequence::autonomous(PiecewiseLinearMap::reflection()),
            tags: vec![Tag::ZeroEntropy, Tag::Lipschitz(1.0)],
            goldens: goldens(&[
                ("entropy", 0.0, 0.02, Elementary),
                ("lipschitz", 1.0, 0.0, Elementary),
            ]),
        },
        "identity" => Fixture {
            name: "identity",
            description: "identity map",
            system: MapSequence::autonomous(PiecewiseLinearMap::identity()),
            tags: vec![Tag::ZeroEntropy, Tag::Lipschitz(1.0)],
            goldens: goldens(&[
                ("entropy", 0.0, 0.02, Elementary),
                ("lipschitz", 1.0, 0.0, Elementary),
            ]),
        },
        "two-attractor" => Fixture {
            name: "two-attractor",
            description: "attracting fixed points at 1/4 and 3/4, repelling fixed point at 1/2",
            system: MapSequence::autonomous(map_two_attractor()),
            tags: vec![Tag::ZeroEntropy, Tag::Lipschitz(1.5)],
            goldens: goldens(&[
                ("entropy", 0.0, 0.05, Oracle("lap count is constant")),
                ("lipschitz", 1.5, 0.0, Elementary),
                ("fixed_points_1", 3.0, 0.0, Oracle("per-piece root count")),
            ]),
        },
        "tent-uniform-limit" => Fixture {
            name: "tent-uniform-limit",
            description: "finite sequence of tent maps with slopes 2 - 1/(k+4) converging uniformly to the tent map",
            system: MapSequence::finite(
                (1..=UNIFORM_LIMIT_HORIZON).map(map_uniform_limit).collect(),
                UNIFORM_LIMIT_HORIZON,
            )?,
            tags: vec![Tag::Lipschitz(2.0 - 1.0 / (UNIFORM_LIMIT_HORIZON as f64 + 4.0))],
            goldens: goldens(&[("entropy_upper", LN_2, 0.05, Oracle("limit map lap count"))]),
        },
        other => {
            return Err(Error::UnknownFixture { name: other.to_string(), available: FIXTURE_NAMES.join(", ") })
        }
    };
    Ok(fx)
}

pub fn all_fixtures() -> Vec<Fixture> {
    FIXTURE_NAMES
        .iter()
        .map(|n| load_fixture(n).expect("registry names load"))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::{fixed_point_count, lap_count, lipschitz_constant};

    #[test]
    fn registry_loads() {
        for fx in all_fixtures() {
            assert!(FIXTURE_NAMES.contains(&fx.name));
            if let Some(c) = fx.lipschitz_tag() {
                assert!(
                    (lipschitz_constant(&fx.system) - c).abs() < 1e-12,
                    "{}",
                    fx.name
                );
            }
        }
    }

    #[test]
    fn unknown_name_lists_registry() {
        match load_fixture("doubling") {
            Err(Error::UnknownFixture { available, .. }) => {
                assert!(available.contains("two-attractor"))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn example_gh_maps() {
        let fx = load_fixture("example-gh").unwrap();
        assert_eq!(fx.system.period(), Some(2));
        assert!(fx.has_tag(Tag::Transitive));
        assert_eq!(fx.system.maps()[0].breakpoints(), &[0.0, 0.25, 0.75, 1.0]);
        assert_eq!(fx.system.maps()[1].breakpoints(), &[0.0, 0.5, 0.75, 1.0]);
        assert_eq!(fx.system.maps()[1].values(), &[0.5, 1.0, 0.0, 0.5]);
        assert_eq!(
            lap_count(&fx.system, 2).unwrap() as f64,
            fx.goldens["laps_2"].value
        );
    }

    #[test]
    fn integer_goldens_hold() {
        let tent = load_fixture("tent").unwrap();
        assert_eq!(
            lap_count(&tent.system, 4).unwrap() as f64,
            tent.goldens["laps_4"].value
        );
        assert_eq!(
            fixed_point_count(&tent.system, 3).unwrap() as f64,
            tent.goldens["fixed_points_3"].value
        );
        let two = load_fixture("two-attractor").unwrap();
        assert_eq!(
            fixed_point_count(&two.system, 1).unwrap() as f64,
            two.goldens["fixed_points_1"].value
        );
    }

    #[test]
    fn two_attractor_dynamics() {
        let m = map_two_attractor();
        for p in [0.25, 0.5, 0.75] {
            assert_eq!(m.eval(p), p);
        }
        assert!(m.eval(0.1) > 0.1 && m.eval(0.4) < 0.4 && m.eval(0.6) > 0.6 && m.eval(0.9) < 0.9);
    }
}
