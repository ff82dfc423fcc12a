//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature, [`ExecMode::Parallel`] runs on the current
//! rayon pool. Without it every mode runs sequentially. Results are returned
//! in index order either way, so output never depends on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExecMode {
    Sequential,
    #[default]
    Parallel,
}

impl ExecMode {
    /// Whether this mode actually fans out work in the current build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == ExecMode::Parallel
    }
}

/// Applies `f(row_index, row)` to each `width`-long row of `data`.
pub fn map_rows<T, R, F>(data: &mut [T], width: usize, mode: ExecMode, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(usize, &mut [T]) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return data
            .par_chunks_mut(width)
            .enumerate()
            .map(|(y, row)| f(y, row))
            .collect();
    }
    let _ = mode;
    data.chunks_mut(width).enumerate().map(|(y, row)| f(y, row)).collect()
}

/// Evaluates `f(i)` for `i in 0..n`.
pub fn map_range<R, F>(n: usize, mode: ExecMode, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if mode.is_parallel() {
        return (0..n).into_par_iter().map(f).collect();
    }
    let _ = mode;
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modes_agree() {
        let mut a: Vec<u32> = (0..100).collect();
        let mut b = a.clone();
        let f = |y: usize, row: &mut [u32]| {
            row.iter_mut().for_each(|v| *v *= 2);
            row.iter().sum::<u32>() + y as u32
        };
        let ra = map_rows(&mut a, 10, ExecMode::Sequential, f);
        let rb = map_rows(&mut b, 10, ExecMode::Parallel, f);
        assert_eq!(ra, rb);
        assert_eq!(a, b);
        assert_eq!(
            map_range(17, ExecMode::Sequential, |i| i * i),
            map_range(17, ExecMode::Parallel, |i| i * i)
        );
    }
}
