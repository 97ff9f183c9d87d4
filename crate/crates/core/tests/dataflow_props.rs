//! Engine-level properties: partition-count invariance, operator algebra,
//! and oracle checks against plain sequential folds.

use std::collections::HashMap;

use gsamp_core::ExecutionContext;
use proptest::prelude::*;

fn ctx(p: usize) -> ExecutionContext {
    ExecutionContext::new(p, 99).unwrap()
}

fn sorted(mut v: Vec<u64>) -> Vec<u64> {
    v.sort_unstable();
    v
}

fn sorted_pairs(mut v: Vec<(u64, u64)>) -> Vec<(u64, u64)> {
    v.sort_unstable();
    v
}

#[test]
fn every_operation_is_partition_count_invariant() {
    let items: Vec<u64> = (0..257).map(|i| i * 31 % 101).collect();
    let keyed: Vec<(u64, u64)> = items.iter().map(|&x| (x % 13, x)).collect();

    let reference_filter = sorted(ctx(1).dataset(items.clone()).filter(|x| x % 3 == 0).collect());
    let reference_map = sorted(ctx(1).dataset(items.clone()).map(|x| x * 2 + 1).collect());
    let reference_reduce = sorted_pairs(
        ctx(1)
            .dataset(keyed.clone())
            .reduce_by_key(|a, b| a + b)
            .collect(),
    );
    let reference_join = {
        let c = ctx(1);
        let left = c.dataset(keyed.clone());
        let right = c.dataset(vec![(3u64, 100u64), (5, 200), (12, 300)]);
        sorted_pairs(left.join(&right, |v, w| (*v, *w)).collect())
    };

    for p in [2, 4, 8] {
        let c = ctx(p);
        let d = c.dataset(items.clone());
        assert_eq!(
            sorted(d.filter(|x| x % 3 == 0).collect()),
            reference_filter,
            "filter at P={p}"
        );
        assert_eq!(
            sorted(d.map(|x| x * 2 + 1).collect()),
            reference_map,
            "map at P={p}"
        );
        let k = c.dataset(keyed.clone());
        assert_eq!(
            sorted_pairs(k.reduce_by_key(|a, b| a + b).collect()),
            reference_reduce,
            "reduce at P={p}"
        );
        let right = c.dataset(vec![(3u64, 100u64), (5, 200), (12, 300)]);
        assert_eq!(
            sorted_pairs(k.join(&right, |v, w| (*v, *w)).collect()),
            reference_join,
            "join at P={p}"
        );
        assert_eq!(d.count(), items.len(), "count at P={p}");
        assert_eq!(
            sorted(
                k.repartition_by_key(3)
                    .unwrap()
                    .map(|(_, v)| *v)
                    .collect()
            ),
            sorted(items.clone()),
            "repartition at P={p}"
        );
    }
}

proptest! {
    /// filter(filter(d, p), q) == filter(d, p && q) as multisets.
    #[test]
    fn filter_composition_fuses(items in prop::collection::vec(0u64..1000, 0..200)) {
        let c = ctx(4);
        let d = c.dataset(items);
        let two_step = d.filter(|x| x % 2 == 0).filter(|x| x % 3 == 0);
        let fused = d.filter(|x| x % 2 == 0 && x % 3 == 0);
        prop_assert_eq!(sorted(two_step.collect()), sorted(fused.collect()));
    }

    /// reduce_by_key with sum over shuffled input equals a sequential fold.
    #[test]
    fn reduce_matches_sequential_fold(
        records in prop::collection::vec((0u64..20, 0u64..1000), 0..300),
        parallelism in 1usize..6,
    ) {
        let mut expected: HashMap<u64, u64> = HashMap::new();
        for &(k, v) in &records {
            *expected.entry(k).or_insert(0) += v;
        }
        let mut expected: Vec<(u64, u64)> = expected.into_iter().collect();
        expected.sort_unstable();

        let c = ctx(parallelism);
        let got = sorted_pairs(c.dataset(records).reduce_by_key(|a, b| a + b).collect());
        prop_assert_eq!(got, expected);
    }

    /// |join(L, R)| == Σ_k |L_k| · |R_k| over shared keys.
    #[test]
    fn join_cardinality_matches_bruteforce(
        left in prop::collection::vec((0u64..8, 0u64..100), 0..100),
        right in prop::collection::vec((0u64..8, 0u64..100), 0..100),
        parallelism in 1usize..5,
    ) {
        let mut left_counts: HashMap<u64, usize> = HashMap::new();
        for &(k, _) in &left {
            *left_counts.entry(k).or_insert(0) += 1;
        }
        let mut right_counts: HashMap<u64, usize> = HashMap::new();
        for &(k, _) in &right {
            *right_counts.entry(k).or_insert(0) += 1;
        }
        let expected: usize = left_counts
            .iter()
            .map(|(k, l)| l * right_counts.get(k).copied().unwrap_or(0))
            .sum();

        let c = ctx(parallelism);
        let l = c.dataset(left);
        let r = c.dataset(right);
        prop_assert_eq!(l.join(&r, |a, b| (*a, *b)).count(), expected);
    }

    /// Repartitioning never drops or duplicates records, and co-locates keys.
    #[test]
    fn repartition_preserves_multiset_and_colocates(
        records in prop::collection::vec((0u64..50, 0u64..100), 0..200),
        target in 1usize..9,
    ) {
        let c = ctx(3);
        let d = c.dataset(records.clone());
        let r = d.repartition_by_key(target).unwrap();
        prop_assert_eq!(r.partition_count(), target);
        let mut got: Vec<(u64, u64)> = r.collect();
        got.sort_unstable();
        let mut expected = records;
        expected.sort_unstable();
        prop_assert_eq!(got, expected);
        for i in 0..r.partition_count() {
            for (k, _) in r.partition(i) {
                prop_assert_eq!((k % target as u64) as usize, i);
            }
        }
    }
}
