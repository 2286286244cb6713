use nds_entropy::bounds::{box_dimension, grid_box_scales, mixing_time_lower_bound};
use nds_entropy::bowen::{max_separated_count, min_spanning_count};
use nds_entropy::corpus::load_fixture;
use nds_entropy::pseudograph::{count_periodic_pseudo_orbits, pseudo_orbit_class_counts};
use nds_entropy::recurrence::{
    chain_mixing_time, chain_recurrent_set, is_chain_transitive, nonwandering_nodes,
};
use nds_entropy::sysfile::{parse_system_str, serialize_system};
use nds_entropy::systems::{compose_orbit, lap_count, laps_of, lipschitz_constant};
use nds_entropy::{Grid, MapSequence, PiecewiseLinearMap};
use proptest::prelude::*;

/// Continuous PL maps with 1-4 pieces; values on a 1/64 lattice so flat pieces and exact
/// hits on the diagonal both occur.
fn pl_map() -> impl Strategy<Value = PiecewiseLinearMap> {
    (1usize..=4)
        .prop_flat_map(|k| {
            (
                prop::collection::vec(1u32..=1000, k),
                prop::collection::vec(0u32..=64, k + 1),
            )
        })
        .prop_map(|(gaps, vals)| {
            let total: u32 = gaps.iter().sum();
            let mut bps = vec![0.0];
            let mut acc = 0;
            for g in &gaps[..gaps.len() - 1] {
                acc += g;
                bps.push(acc as f64 / total as f64);
            }
            bps.push(1.0);
            PiecewiseLinearMap::new(bps, vals.iter().map(|&v| v as f64 / 64.0).collect()).unwrap()
        })
}

fn periodic_system() -> impl Strategy<Value = MapSequence> {
    prop::collection::vec(pl_map(), 1..=3).prop_map(|maps| MapSequence::periodic(maps).unwrap())
}

fn any_system() -> impl Strategy<Value = MapSequence> {
    prop_oneof![
        3 => periodic_system(),
        1 => (prop::collection::vec(pl_map(), 1..=3), 8usize..=12).prop_map(|(maps, h)| {
            let maps: Vec<_> = maps.iter().cycle().take(h).cloned().collect();
            MapSequence::finite(maps, h).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn cocycle(f in periodic_system(), i in 1usize..5, n in 0usize..6, m in 0usize..6, x in 0.0f64..=1.0) {
        let whole = compose_orbit(&f, i, n + m, x).unwrap();
        let split = compose_orbit(&f, i + n, m, compose_orbit(&f, i, n, x).unwrap()).unwrap();
        prop_assert!((whole - split).abs() <= 1e-9);
    }

    #[test]
    fn lipschitz_growth(f in periodic_system(), n in 0usize..6, x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
        let c = lipschitz_constant(&f);
        let d = (compose_orbit(&f, 1, n, x).unwrap() - compose_orbit(&f, 1, n, y).unwrap()).abs();
        prop_assert!(d <= c.powi(n as i32) * (x - y).abs() + 1e-9);
    }

    #[test]
    fn laps_are_submultiplicative(f in any_system(), n in 1usize..6) {
        let next = laps_of(f.map(n + 1).unwrap());
        prop_assert!(lap_count(&f, n + 1).unwrap() <= next * lap_count(&f, n).unwrap());
    }

    #[test]
    fn definition_file_round_trip(f in any_system()) {
        let again = parse_system_str(&serialize_system(&f)).unwrap();
        prop_assert_eq!(again, f);
    }

    #[test]
    fn mixing_bound_is_monotone(c in 1.0f64..5.0, d1 in 0.01f64..0.5, d2 in 0.01f64..0.5, e1 in 0.001f64..0.01, e2 in 0.001f64..0.01) {
        let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (el, eh) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let b = |c: f64, d: f64, e: f64| mixing_time_lower_bound(c, 1.0, d, e).unwrap();
        prop_assert!(b(c, dh, el) <= b(c, dl, el) + 1e-12);
        prop_assert!(b(c, dl, eh) <= b(c, dl, el) + 1e-12);
        if c > 1.0 {
            prop_assert!(b(c + 0.5, dl, el) <= b(c, dl, el) + 1e-12);
        }
    }

    #[test]
    fn union_of_intervals_has_dimension_one(
        cuts in prop::collection::vec(0.0f64..1.0, 2..=6),
    ) {
        let mut cuts = cuts;
        cuts.sort_by(f64::total_cmp);
        let grid = Grid::new(8192).unwrap();
        let intervals: Vec<(f64, f64)> = cuts
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| {
                let a = c[0].min(0.8);
                (a, c[1].max(a + 0.2).min(1.0))
            })
            .collect();
        let points: Vec<f64> = grid
            .centers()
            .into_iter()
            .filter(|p| intervals.iter().any(|&(a, b)| a <= *p && *p <= b))
            .collect();
        prop_assume!(!points.is_empty());
        let d = box_dimension(&points, &grid_box_scales(&grid)).unwrap();
        prop_assert!((d - 1.0).abs() <= 0.05, "d = {}", d);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn separated_spanning_sandwich(f in any_system(), n in 1usize..=4, eps in 0.1f64..0.3) {
        let grid = Grid::new(200).unwrap();
        let (s, _) = max_separated_count(&f, n, eps, &grid).unwrap();
        let (r, _) = min_spanning_count(&f, n, eps, &grid).unwrap();
        let (r_half, _) = min_spanning_count(&f, n, eps / 2.0, &grid).unwrap();
        prop_assert!(r <= s, "r = {r}, s = {s}");
        prop_assert!(s <= r_half, "s = {s}, r(ε/2) = {r_half}");
    }

    #[test]
    fn separated_count_monotone(f in any_system(), n in 1usize..=5, e1 in 0.2f64..0.6, e2 in 0.2f64..0.6) {
        // Small grids use the exact search, so the counts are true maxima.
        let grid = Grid::new(20).unwrap();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let s = |n, e| max_separated_count(&f, n, e, &grid).unwrap().0;
        prop_assert!(s(n, hi) <= s(n, lo));
        prop_assert!(s(n, lo) <= s(n + 1, lo));
    }

    #[test]
    fn counts_grow_with_alpha(f in any_system(), a1 in 0.55f64..4.0, a2 in 0.55f64..4.0) {
        let grid = Grid::new(60).unwrap();
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let (lo, hi) = (lo * grid.spacing(), hi * grid.spacing());
        let c_lo = pseudo_orbit_class_counts(&f, 6, 0.1, lo, &grid).unwrap();
        let c_hi = pseudo_orbit_class_counts(&f, 6, 0.1, hi, &grid).unwrap();
        for (a, b) in c_lo.iter().zip(&c_hi) {
            prop_assert!(a <= b);
        }
        if let Some(q) = f.period() {
            for n in (q..=6).step_by(q) {
                prop_assert!(
                    count_periodic_pseudo_orbits(&f, n, lo, &grid).unwrap()
                        <= count_periodic_pseudo_orbits(&f, n, hi, &grid).unwrap()
                );
            }
        }
        let cr_lo = chain_recurrent_set(&f, lo, &grid).unwrap();
        let cr_hi = chain_recurrent_set(&f, hi, &grid).unwrap();
        prop_assert!(cr_lo.iter().all(|x| cr_hi.binary_search(x).is_ok()));
    }

    #[test]
    fn transitive_means_everything_recurs(f in any_system(), a in 0.55f64..6.0) {
        let grid = Grid::new(80).unwrap();
        let alpha = a * grid.spacing();
        if is_chain_transitive(&f, alpha, &grid).unwrap() {
            prop_assert_eq!(chain_recurrent_set(&f, alpha, &grid).unwrap().len(), grid.size());
        }
    }

    #[test]
    fn nonwandering_within_chain_recurrent(f in periodic_system(), a in 0.55f64..4.0) {
        // An α-return of the open ball shadows to a grid chain with jumps below (c + 1)α.
        let grid = Grid::new(80).unwrap();
        let alpha = a * grid.spacing();
        let c = lipschitz_constant(&f).max(1.0);
        let q = f.period().unwrap();
        let nw = nonwandering_nodes(&f, alpha, &grid, 4 * q * grid.size()).unwrap();
        let cr = chain_recurrent_set(&f, (c + 1.0) * alpha, &grid).unwrap();
        prop_assert!(nw.iter().all(|x| cr.binary_search(x).is_ok()));
    }

    #[test]
    fn mixing_time_shrinks_with_bigger_balls(
        which in 0usize..3,
        e1 in 0.01f64..0.05, e2 in 0.01f64..0.05,
        d1 in 0.05f64..0.2, d2 in 0.05f64..0.2,
    ) {
        let name = ["tent", "identity", "reflection"][which];
        let f = load_fixture(name).unwrap().system;
        let grid = Grid::new(400).unwrap();
        let (el, eh) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let (dl, dh) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let m = |e, d| chain_mixing_time(&f, e, d, &grid, 12).map(|r| r.value);
        if let (Ok(base), Ok(wide_e), Ok(wide_d)) = (m(el, dl), m(eh, dl), m(el, dh)) {
            prop_assert!(wide_e <= base);
            prop_assert!(wide_d <= base);
        }
    }
}
