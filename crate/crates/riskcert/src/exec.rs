//! Data-parallel helpers with a sequential fallback.
//!
//! With the default `parallel` feature the workload fans out over rayon;
//! without it the same entry points run sequentially. Callers are written
//! so both paths produce identical results (per-item work is independent
//! and merged in index order).

/// Maps `f` over `0..n`, failing fast on the first error. Output order
/// matches index order in both modes.
pub fn try_map_indexed<R, E, F>(n: usize, f: F) -> Result<Vec<R>, E>
where
    R: Send,
    E: Send,
    F: Fn(usize) -> Result<R, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Counts indices in `0..n` where `f` returns `Ok(true)`.
pub fn try_count<E, F>(n: u64, f: F) -> Result<u64, E>
where
    E: Send,
    F: Fn(u64) -> Result<bool, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .try_fold(|| 0u64, |acc, i| f(i).map(|hit| acc + hit as u64))
            .try_reduce(|| 0u64, |a, b| Ok(a + b))
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut acc = 0u64;
        for i in 0..n {
            acc += f(i)? as u64;
        }
        Ok(acc)
    }
}

/// Sequential twin of [`try_count`], always available; the bench suite
/// uses it to compare against the parallel path.
pub fn try_count_seq<E, F>(n: u64, f: F) -> Result<u64, E>
where
    F: Fn(u64) -> Result<bool, E>,
{
    let mut acc = 0u64;
    for i in 0..n {
        acc += f(i)? as u64;
    }
    Ok(acc)
}
