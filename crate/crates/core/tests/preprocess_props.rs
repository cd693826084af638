mod common;

use std::collections::{BTreeSet, HashSet};

use flexvector::graph::gen_power_law;
use flexvector::preprocess::{
    clamp_fixed_k, cross_tile_edges, edge_cut_partition, plan_tile, topk_fixed, vertex_cut,
    KPolicy, Partition, PlanParams, SparseTile, VrfMode,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Columns ordered by nonzero count, ties to the lower index.
fn ranked(tile: &SparseTile) -> Vec<u32> {
    let mut count = std::collections::BTreeMap::<u32, usize>::new();
    for r in &tile.rows {
        for &c in &r.col_idx {
            *count.entry(c).or_default() += 1;
        }
    }
    let mut cols: Vec<(u32, usize)> = count.into_iter().collect();
    cols.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    cols.into_iter().map(|(c, _)| c).collect()
}

fn feasible(tile: &SparseTile, k: usize, depth: usize, mode: VrfMode) -> bool {
    let fixed: HashSet<u32> = ranked(tile).into_iter().take(k).collect();
    let mut misses: Vec<usize> = tile
        .rows
        .iter()
        .map(|r| r.col_idx.iter().filter(|c| !fixed.contains(c)).count())
        .collect();
    misses.sort_unstable_by(|a, b| b.cmp(a));
    let m0 = misses.first().copied().unwrap_or(0);
    let m1 = misses.get(1).copied().unwrap_or(0);
    match mode {
        VrfMode::Single => k + m0 <= depth,
        VrfMode::Double => k + m0 + m1 <= depth,
    }
}

fn mode_strategy() -> impl Strategy<Value = VrfMode> {
    prop_oneof![Just(VrfMode::Single), Just(VrfMode::Double)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn vertex_cut_conserves_bounds_and_preserves_product(
        tile in common::tile_strategy(16),
        tau in 1usize..=8,
        seed in any::<u64>(),
    ) {
        let cut = vertex_cut(&tile, tau).unwrap();
        prop_assert_eq!(common::triples(&cut), common::triples(&tile));
        prop_assert!(cut.rows.iter().all(|r| r.nnz() <= tau));
        prop_assert_eq!(cut.max_rnz, cut.rows.iter().map(|r| r.nnz()).max().unwrap_or(0));
        let keys: HashSet<(u32, u32)> = cut.rows.iter().map(|r| (r.parent_row, r.split_seq)).collect();
        prop_assert_eq!(keys.len(), cut.rows.len());
        let d = common::dense(16, 5, seed);
        prop_assert_eq!(common::tile_product(&cut, &d), common::tile_product(&tile, &d));
    }

    #[test]
    fn topk_result_fits_and_is_maximal_on_monotone_tiles(
        tile in common::tile_strategy(16),
        tau in 1usize..=8,
        pct in prop_oneof![Just(0.25), Just(0.5), Just(1.0)],
        depth in 1usize..=32,
        mode in mode_strategy(),
    ) {
        let k = topk_fixed(&tile, tau, pct, depth, mode);
        prop_assert!(k <= depth);
        let feas: Vec<bool> = (0..=depth).map(|k| feasible(&tile, k, depth, mode)).collect();
        if feas.iter().any(|&f| f) {
            let start = ((tau as f64 * pct).ceil() as usize).min(depth);
            let prefix = feas.iter().skip_while(|&&f| f).all(|&f| !f);
            let suffix = feas.iter().skip_while(|&&f| !f).all(|&f| f);
            let best = feas.iter().rposition(|&f| f).unwrap();
            if prefix || (suffix && feas[start]) {
                prop_assert_eq!(k, best);
            }
            if feas[start] || feas[..start].iter().any(|&f| f) {
                prop_assert!(feas[k], "k={} infeasible", k);
            }
        } else {
            prop_assert_eq!(k, 0);
        }
        if mode == VrfMode::Single {
            prop_assert!(feas.iter().skip_while(|&&f| f).all(|&f| !f), "single-mode feasibility is a prefix");
        }
    }

    #[test]
    fn clamped_k_is_largest_feasible_below_request(
        tile in common::tile_strategy(12),
        depth in 1usize..=16,
        request in 0usize..=16,
        mode in mode_strategy(),
    ) {
        let k = clamp_fixed_k(&tile, request, depth, mode);
        let expected = (0..=request.min(depth)).rev().find(|&k| feasible(&tile, k, depth, mode)).unwrap_or(0);
        prop_assert_eq!(k, expected);
    }

    #[test]
    fn plan_invariants(
        tile in common::tile_strategy(16),
        tau in 1usize..=8,
        depth in 1usize..=16,
        mode in mode_strategy(),
        col in 0usize..4,
    ) {
        let mut tile = tile;
        tile.tile_col = col;
        let p = PlanParams { tile_rows: 16, tau, pct: 0.5, depth, mode, k_policy: KPolicy::TopK };
        let plan = plan_tile(&tile, &p);
        prop_assert_eq!(plan.k, plan.fixed_set.len());
        prop_assert!(plan.k <= depth);
        let ids: BTreeSet<u32> = plan.dense_row_ids.iter().copied().collect();
        prop_assert_eq!(ids.len(), plan.dense_row_ids.len());
        prop_assert!(plan.fixed_set.iter().all(|r| ids.contains(r)));
        let cols: BTreeSet<u32> = tile.rows.iter().flat_map(|r| r.col_idx.iter().copied()).collect();
        let mapped: BTreeSet<u32> = cols.iter().map(|&c| plan.global_row(16, c)).collect();
        prop_assert_eq!(mapped, ids);
    }
}

#[test]
fn edge_cut_beats_random_permutation_on_average() {
    let tile_rows = 16;
    let (mut greedy, mut random) = (0usize, 0usize);
    for seed in 0..20u64 {
        let a = gen_power_law(512, 1024, 2.1, seed).unwrap();
        greedy += cross_tile_edges(&a, &edge_cut_partition(&a, tile_rows).unwrap());
        let mut perm: Vec<u32> = (0..512).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed + 1000));
        random += cross_tile_edges(&a, &Partition::new(perm, tile_rows).unwrap());
    }
    assert!(greedy <= random, "greedy {greedy} random {random}");
}

#[test]
fn wide_row_split_reproduces_worked_example() {
    use flexvector::preprocess::SubRow;
    let row = |p: u32, cols: &[u32]| SubRow {
        parent_row: p,
        split_seq: 0,
        col_idx: cols.to_vec(),
        values: cols.iter().map(|&c| 10 + c as i32).collect(),
    };
    // columns 0, 1 and 2 are the most referenced, so they form the hit set at tau=3
    let tile = SparseTile::new(
        0,
        0,
        vec![
            row(0, &[1, 2, 3, 4, 5]),
            row(1, &[0, 1, 2]),
            row(2, &[0, 1, 2]),
            row(3, &[0]),
        ],
    );
    let cut = vertex_cut(&tile, 3).unwrap();
    assert_eq!(tile.max_rnz, 5);
    assert_eq!(cut.max_rnz, 3);
    assert_eq!(cut.rows[0].col_idx, vec![2, 3, 4]);
    assert_eq!(cut.rows[1].col_idx, vec![1, 5]);
    assert_eq!((cut.rows[0].split_seq, cut.rows[1].split_seq), (0, 1));
}
