//! Sequential and data-parallel evaluation over index ranges.
//!
//! Every helper returns the same value under either strategy; results are
//! collected in index order and searches report the lowest matching index.
//! Without the `parallel` feature, [`Execution::Parallel`] runs sequentially.

/// Evaluation strategy for exhaustive scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// `f(i)` for each `i` in `0..len`, in index order.
pub fn map_range<T, F>(exec: Execution, len: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Lowest `i` in `0..len` for which `f` yields `Some`, with its payload.
pub fn find_first<T, F>(exec: Execution, len: u64, f: F) -> Option<T>
where
    T: Send,
    F: Fn(u64) -> Option<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().find_map_first(f);
    }
    let _ = exec;
    (0..len).find_map(f)
}

/// Indices in `0..len` satisfying `pred`, ascending.
pub fn filter_range<F>(exec: Execution, len: u64, pred: F) -> Vec<u64>
where
    F: Fn(u64) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..len).into_par_iter().filter(|&i| pred(i)).collect();
    }
    let _ = exec;
    (0..len).filter(|&i| pred(i)).collect()
}

/// Applies `f` to each item of a slice, preserving order.
pub fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategies_agree() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(map_range(exec, 5, |i| i * i), vec![0, 1, 4, 9, 16]);
            assert_eq!(find_first(exec, 1000, |i| (i % 7 == 3 && i > 10).then_some(i)), Some(17));
            assert_eq!(filter_range(exec, 10, |i| i % 3 == 0), vec![0, 3, 6, 9]);
            assert_eq!(map_slice(exec, &[1, 2, 3], |x| x + 1), vec![2, 3, 4]);
        }
    }
}
