//! Ordered data-parallel map with a sequential fallback.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How sample evaluation is scheduled. Results are identical either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses rayon when the `parallel` feature is enabled, otherwise runs
    /// sequentially.
    #[default]
    Parallel,
}

/// Maps `f` over `items`, keeping input order in the output.
pub fn map_ordered<T, R, F>(exec: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => items.par_iter().map(f).collect(),
        _ => items.iter().map(f).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_schedules_agree() {
        let xs: Vec<u64> = (0..10_000).collect();
        let f = |x: &u64| x.wrapping_mul(0x9e37_79b9_7f4a_7c15) >> 7;
        assert_eq!(
            map_ordered(Execution::Sequential, &xs, f),
            map_ordered(Execution::Parallel, &xs, f)
        );
    }
}
