//! Deterministic multi-core dataflow engine over partitioned in-memory
//! datasets.
//!
//! A [`PartitionedDataset`] is a typed collection split into P element
//! buffers. Transformations run one task per partition, and the engine joins
//! all partition tasks before the next transformation starts (stage barrier).
//! User functions must be pure; datasets are immutable after construction and
//! cheap to share across threads.
//!
//! Keyed data is partitioned by `key % P`; unkeyed data round-robin. All
//! transformations preserve the element multiset independently of the
//! partition count.

use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Execution environment: worker count and the master seed from which every
/// randomized operator derives its decisions.
#[derive(Clone)]
pub struct ExecutionContext {
    inner: Arc<ContextInner>,
}

struct ContextInner {
    parallelism: usize,
    master_seed: u64,
    // None when parallelism == 1; stages then run on the calling thread.
    pool: Option<rayon::ThreadPool>,
}

impl ExecutionContext {
    pub fn new(parallelism: usize, master_seed: u64) -> Result<Self> {
        if parallelism == 0 {
            return Err(Error::ZeroParallelism);
        }
        let pool = if parallelism == 1 {
            None
        } else {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(parallelism)
                    .build()
                    .map_err(|e| Error::WorkerPool(e.to_string()))?,
            )
        };
        Ok(Self {
            inner: Arc::new(ContextInner {
                parallelism,
                master_seed,
                pool,
            }),
        })
    }

    pub fn parallelism(&self) -> usize {
        self.inner.parallelism
    }

    pub fn master_seed(&self) -> u64 {
        self.inner.master_seed
    }

    /// Builds a dataset by distributing `items` round-robin over
    /// `parallelism` partitions.
    pub fn dataset<T: Send + Sync>(&self, items: Vec<T>) -> PartitionedDataset<T> {
        let p = self.parallelism();
        let mut partitions: Vec<Vec<T>> = (0..p).map(|_| Vec::new()).collect();
        for (i, item) in items.into_iter().enumerate() {
            partitions[i % p].push(item);
        }
        PartitionedDataset::from_partitions(self.clone(), partitions)
    }

    /// Runs `task(index)` for every index in 0..n concurrently and collects
    /// the outputs in index order.
    pub(crate) fn run_stage<O, F>(&self, n: usize, task: F) -> Vec<O>
    where
        O: Send,
        F: Fn(usize) -> O + Sync + Send,
    {
        match &self.inner.pool {
            Some(pool) if n > 1 => pool.install(|| (0..n).into_par_iter().map(task).collect()),
            _ => (0..n).map(task).collect(),
        }
    }

    /// Runs a closure inside this context's worker pool (or inline when
    /// parallelism is 1), so nested rayon iterators use these workers.
    pub(crate) fn install<R, F>(&self, f: F) -> R
    where
        R: Send,
        F: FnOnce() -> R + Send,
    {
        match &self.inner.pool {
            Some(pool) => pool.install(f),
            None => f(),
        }
    }

    /// Runs `task(i, &mut items[i], inputs[i])` for every index concurrently,
    /// collecting outputs in index order. Both slices must have equal length.
    pub(crate) fn run_stage_zip<A, B, O, F>(&self, items: &mut [A], inputs: Vec<B>, task: F) -> Vec<O>
    where
        A: Send,
        B: Send,
        O: Send,
        F: Fn(usize, &mut A, B) -> O + Sync + Send,
    {
        debug_assert_eq!(items.len(), inputs.len());
        match &self.inner.pool {
            Some(pool) if items.len() > 1 => pool.install(|| {
                items
                    .par_iter_mut()
                    .zip(inputs)
                    .enumerate()
                    .map(|(i, (a, b))| task(i, a, b))
                    .collect()
            }),
            _ => items
                .iter_mut()
                .zip(inputs)
                .enumerate()
                .map(|(i, (a, b))| task(i, a, b))
                .collect(),
        }
    }
}

impl std::fmt::Debug for ExecutionContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExecutionContext")
            .field("parallelism", &self.parallelism())
            .field("master_seed", &self.master_seed())
            .finish()
    }
}

/// An immutable typed collection split into partitions; the unit of parallel
/// transformation.
pub struct PartitionedDataset<T> {
    ctx: ExecutionContext,
    partitions: Arc<Vec<Vec<T>>>,
}

impl<T> std::fmt::Debug for PartitionedDataset<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sizes: Vec<usize> = self.partitions.iter().map(Vec::len).collect();
        f.debug_struct("PartitionedDataset")
            .field("partition_sizes", &sizes)
            .finish()
    }
}

impl<T> Clone for PartitionedDataset<T> {
    fn clone(&self) -> Self {
        Self {
            ctx: self.ctx.clone(),
            partitions: Arc::clone(&self.partitions),
        }
    }
}

impl<T: Send + Sync> PartitionedDataset<T> {
    pub(crate) fn from_partitions(ctx: ExecutionContext, partitions: Vec<Vec<T>>) -> Self {
        debug_assert!(!partitions.is_empty());
        Self {
            ctx,
            partitions: Arc::new(partitions),
        }
    }

    pub fn context(&self) -> &ExecutionContext {
        &self.ctx
    }

    pub fn partition_count(&self) -> usize {
        self.partitions.len()
    }

    /// Elements of one partition, for inspection and tests.
    pub fn partition(&self, index: usize) -> &[T] {
        &self.partitions[index]
    }

    /// Exact element count, independent of the partition count.
    pub fn count(&self) -> usize {
        self.partitions.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.iter().all(Vec::is_empty)
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.partitions.iter().flat_map(|p| p.iter())
    }

    /// Keeps exactly the elements for which `predicate` is true. The
    /// predicate must be pure (deterministic given the element and the
    /// master seed).
    pub fn filter<F>(&self, predicate: F) -> Self
    where
        T: Clone,
        F: Fn(&T) -> bool + Sync,
    {
        let parts = self.ctx.run_stage(self.partition_count(), |i| {
            self.partitions[i]
                .iter()
                .filter(|t| predicate(t))
                .cloned()
                .collect()
        });
        Self::from_partitions(self.ctx.clone(), parts)
    }

    /// One-to-one transformation: element i of every partition maps to
    /// `f(element i)`.
    pub fn map<U, F>(&self, f: F) -> PartitionedDataset<U>
    where
        U: Send + Sync,
        F: Fn(&T) -> U + Sync,
    {
        let parts = self.ctx.run_stage(self.partition_count(), |i| {
            self.partitions[i].iter().map(&f).collect()
        });
        PartitionedDataset::from_partitions(self.ctx.clone(), parts)
    }

    /// Concatenates two datasets. With equal partition counts the result
    /// keeps that count (partitions are merged pairwise); otherwise the
    /// partition lists are appended.
    pub fn union(&self, other: &Self) -> Self
    where
        T: Clone,
    {
        let parts = if self.partition_count() == other.partition_count() {
            self.ctx.run_stage(self.partition_count(), |i| {
                let mut out = self.partitions[i].clone();
                out.extend_from_slice(&other.partitions[i]);
                out
            })
        } else {
            self.partitions
                .iter()
                .chain(other.partitions.iter())
                .cloned()
                .collect()
        };
        Self::from_partitions(self.ctx.clone(), parts)
    }

    /// Copies all elements out, in partition order.
    pub fn collect(&self) -> Vec<T>
    where
        T: Clone,
    {
        let mut out = Vec::with_capacity(self.count());
        for p in self.partitions.iter() {
            out.extend_from_slice(p);
        }
        out
    }
}

/// Keyed transformations. The key is the grouping/join attribute; equal keys
/// compare equal across partitions.
impl<V: Send + Sync + Clone> PartitionedDataset<(u64, V)> {
    /// Shuffles records so all records with equal key land in the same
    /// partition (`key % partitions`), preserving the multiset.
    pub fn repartition_by_key(&self, partitions: usize) -> Result<Self> {
        if partitions == 0 {
            return Err(Error::ZeroPartitions);
        }
        // Scatter in parallel per source partition, then concatenate each
        // target bucket in source-partition order so the layout is a pure
        // function of (input order, partition count).
        let scattered: Vec<Vec<Vec<(u64, V)>>> = self.ctx.run_stage(self.partition_count(), |i| {
            let hint = self.partitions[i].len() / partitions + 1;
            let mut buckets: Vec<Vec<(u64, V)>> =
                (0..partitions).map(|_| Vec::with_capacity(hint)).collect();
            for record in &self.partitions[i] {
                buckets[(record.0 % partitions as u64) as usize].push(record.clone());
            }
            buckets
        });
        let mut parts: Vec<Vec<(u64, V)>> = (0..partitions).map(|_| Vec::new()).collect();
        for (t, part) in parts.iter_mut().enumerate() {
            part.reserve(scattered.iter().map(|s| s[t].len()).sum());
        }
        for mut source in scattered {
            for (t, bucket) in source.iter_mut().enumerate() {
                parts[t].append(bucket);
            }
        }
        Ok(Self::from_partitions(self.ctx.clone(), parts))
    }

    /// Folds all values sharing a key into a single record per distinct key.
    /// `combine` must be associative and commutative so the result is
    /// independent of partition count and arrival order. Output partitions
    /// are sorted by key.
    pub fn reduce_by_key<F>(&self, combine: F) -> Self
    where
        F: Fn(V, V) -> V + Sync,
    {
        let shuffled = self
            .repartition_by_key(self.ctx.parallelism())
            .expect("parallelism is nonzero");
        let parts = shuffled.ctx.run_stage(shuffled.partition_count(), |i| {
            let records = &shuffled.partitions[i];
            let mut sorted: Vec<(u64, V)> = records.clone();
            sorted.sort_by_key(|(k, _)| *k);
            let mut out: Vec<(u64, V)> = Vec::new();
            for (k, v) in sorted {
                match out.last_mut() {
                    Some((lk, lv)) if *lk == k => {
                        let prev = lv.clone();
                        *lv = combine(prev, v);
                    }
                    _ => out.push((k, v)),
                }
            }
            out
        });
        Self::from_partitions(self.ctx.clone(), parts)
    }

    /// Inner equi-join: one output element per (l, r) pair with equal keys;
    /// unmatched records on either side are dropped.
    pub fn join<W, R, F>(&self, right: &PartitionedDataset<(u64, W)>, f: F) -> PartitionedDataset<R>
    where
        W: Send + Sync + Clone,
        R: Send + Sync,
        F: Fn(&V, &W) -> R + Sync,
    {
        let p = self.ctx.parallelism();
        let left = self.repartition_by_key(p).expect("parallelism is nonzero");
        let right = right.repartition_by_key(p).expect("parallelism is nonzero");
        let parts = self.ctx.run_stage(p, |i| {
            let mut table: HashMap<u64, Vec<&W>> = HashMap::with_capacity(right.partitions[i].len());
            for (k, w) in &right.partitions[i] {
                table.entry(*k).or_default().push(w);
            }
            let mut out = Vec::new();
            for (k, v) in &left.partitions[i] {
                if let Some(ws) = table.get(k) {
                    for w in ws {
                        out.push(f(v, w));
                    }
                }
            }
            out
        });
        PartitionedDataset::from_partitions(self.ctx.clone(), parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(p: usize) -> ExecutionContext {
        ExecutionContext::new(p, 42).unwrap()
    }

    #[test]
    fn rejects_zero_parallelism() {
        assert!(matches!(
            ExecutionContext::new(0, 0),
            Err(Error::ZeroParallelism)
        ));
    }

    #[test]
    fn filter_keeps_matching_elements() {
        let d = ctx(2).dataset(vec![1u64, 2, 3, 4]);
        let mut kept = d.filter(|x| x % 2 == 0).collect();
        kept.sort_unstable();
        assert_eq!(kept, vec![2, 4]);
    }

    #[test]
    fn filter_on_empty_input_is_empty() {
        let d = ctx(3).dataset(Vec::<u64>::new());
        assert!(d.filter(|_| true).is_empty());
    }

    #[test]
    fn filter_always_true_is_identity() {
        let d = ctx(1).dataset(vec![5u64]);
        assert_eq!(d.filter(|_| true).collect(), vec![5]);
    }

    #[test]
    fn map_is_one_to_one() {
        let d = ctx(2).dataset(vec![1i64, 2, 3]);
        let out = d.map(|x| x + 1);
        assert_eq!(out.count(), d.count());
        let mut v = out.collect();
        v.sort_unstable();
        assert_eq!(v, vec![2, 3, 4]);
    }

    #[test]
    fn map_on_empty_input_is_empty() {
        let d = ctx(2).dataset(Vec::<i64>::new());
        assert!(d.map(|x| x * 2).is_empty());
    }

    #[test]
    fn map_can_rewrite_fields() {
        let d = ctx(1).dataset(vec![("a", false)]);
        assert_eq!(d.map(|(s, _)| (*s, true)).collect(), vec![("a", true)]);
    }

    #[test]
    fn reduce_by_key_sums_groups() {
        let d = ctx(2).dataset(vec![(1u64, 2u64), (1, 3), (2, 5)]);
        let mut out = d.reduce_by_key(|a, b| a + b).collect();
        out.sort_unstable();
        assert_eq!(out, vec![(1, 5), (2, 5)]);
    }

    #[test]
    fn reduce_by_key_singleton_group() {
        let d = ctx(4).dataset(vec![(7u64, 1u64)]);
        assert_eq!(d.reduce_by_key(|a, b| a + b).collect(), vec![(7, 1)]);
    }

    #[test]
    fn reduce_by_key_empty() {
        let d = ctx(2).dataset(Vec::<(u64, u64)>::new());
        assert!(d.reduce_by_key(|a, b| a + b).is_empty());
    }

    #[test]
    fn join_fans_out_on_key_match() {
        let c = ctx(2);
        let left = c.dataset(vec![(1u64, "a")]);
        let right = c.dataset(vec![(1u64, "x"), (1, "y")]);
        let mut out = left.join(&right, |l, r| format!("{l}{r}")).collect();
        out.sort();
        assert_eq!(out, vec!["ax".to_string(), "ay".to_string()]);
    }

    #[test]
    fn join_drops_unmatched_keys() {
        let c = ctx(2);
        let left = c.dataset(vec![(1u64, "a")]);
        let right = c.dataset(vec![(2u64, "x")]);
        assert!(left.join(&right, |_, _| ()).is_empty());
    }

    #[test]
    fn join_with_empty_side_is_empty() {
        let c = ctx(2);
        let left = c.dataset(Vec::<(u64, &str)>::new());
        let right = c.dataset(vec![(1u64, "x")]);
        assert!(left.join(&right, |_, _| ()).is_empty());
    }

    #[test]
    fn count_matches_cardinality() {
        assert_eq!(ctx(2).dataset(Vec::<u8>::new()).count(), 0);
        assert_eq!(ctx(2).dataset(vec![1u8, 2, 3]).count(), 3);
    }

    #[test]
    fn repartition_rejects_zero() {
        let d = ctx(2).dataset(vec![(1u64, ())]);
        assert!(matches!(
            d.repartition_by_key(0),
            Err(Error::ZeroPartitions)
        ));
    }

    #[test]
    fn repartition_colocates_equal_keys() {
        let d = ctx(2).dataset(vec![(1u64, "a"), (1, "b"), (2, "c")]);
        let r = d.repartition_by_key(2).unwrap();
        // key 1 -> partition 1, key 2 -> partition 0
        assert_eq!(r.partition(1).len(), 2);
        assert!(r.partition(1).iter().all(|(k, _)| *k == 1));
        assert_eq!(r.partition(0), &[(2, "c")]);
    }

    #[test]
    fn repartition_to_one_merges_everything() {
        let d = ctx(4).dataset(vec![(1u64, 1), (2, 2), (3, 3)]);
        let r = d.repartition_by_key(1).unwrap();
        assert_eq!(r.partition_count(), 1);
        assert_eq!(r.count(), 3);
    }

    #[test]
    fn repartition_preserves_count() {
        let records: Vec<(u64, u64)> = (0..1000)
            .map(|i| (crate::hash::mix64(i) % 97, i))
            .collect();
        let d = ctx(3).dataset(records);
        assert_eq!(d.repartition_by_key(8).unwrap().count(), 1000);
    }

    #[test]
    fn union_preserves_both_sides() {
        let c = ctx(2);
        let a = c.dataset(vec![1u64, 2]);
        let b = c.dataset(vec![3u64]);
        let mut out = a.union(&b).collect();
        out.sort_unstable();
        assert_eq!(out, vec![1, 2, 3]);
    }
}
