//! Execution strategy for the data-parallel kernels.
//!
//! With the `parallel` feature (on by default) [`Exec::Parallel`] runs work
//! items on the current rayon pool; without it both variants run sequentially.
//! Results are always returned in item order, so reductions are identical.

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// Applies `f` to `0..n` and collects the results in index order.
    pub fn map<T, F>(self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        match self {
            Exec::Sequential => (0..n).map(f).collect(),
            Exec::Parallel => par_map(n, f),
        }
    }

    /// Worker count the strategy will use.
    pub fn threads(self) -> usize {
        match self {
            Exec::Sequential => 1,
            Exec::Parallel => pool_threads(),
        }
    }
}

#[cfg(feature = "parallel")]
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..n).map(f).collect()
}

#[cfg(feature = "parallel")]
fn pool_threads() -> usize {
    rayon::current_num_threads()
}

#[cfg(not(feature = "parallel"))]
fn pool_threads() -> usize {
    1
}

/// Splits `0..total` into `parts` contiguous ranges of near-equal length.
pub fn split_range(total: u64, parts: u64) -> Vec<std::ops::Range<u64>> {
    let parts = parts.max(1).min(total.max(1));
    let base = total / parts;
    let extra = total % parts;
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let len = base + u64::from(i < extra);
            let r = start..start + len;
            start += len;
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_paths_agree() {
        let f = |i: usize| i * i;
        assert_eq!(Exec::Sequential.map(100, f), Exec::Parallel.map(100, f));
    }

    #[test]
    fn ranges_cover() {
        for (total, parts) in [(10, 3), (0, 4), (5, 10), (1 << 20, 64)] {
            let r = split_range(total, parts);
            assert_eq!(r.first().unwrap().start, 0);
            assert_eq!(r.last().unwrap().end, total);
            for w in r.windows(2) {
                assert_eq!(w[0].end, w[1].start);
            }
        }
    }
}
