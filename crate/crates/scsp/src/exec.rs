//! Execution-mode switch shared by the compiler and the policy oracle.
//!
//! Both have data-parallel inner loops whose results are merged in a fixed
//! order, so the parallel path produces bit-identical output to the
//! sequential one. `Parallel` falls back to sequential when the crate is
//! built without the `parallel` feature.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    Sequential,
    Parallel,
}

impl Default for ExecMode {
    fn default() -> ExecMode {
        if cfg!(feature = "parallel") {
            ExecMode::Parallel
        } else {
            ExecMode::Sequential
        }
    }
}

/// Maps `f` over `items`, preserving order. Work is split in coarse runs:
/// per-item cost is small, so fine-grained stealing would cost more than it
/// saves.
pub(crate) fn map_ordered<T, U, F>(items: &[T], mode: ExecMode, f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if mode == ExecMode::Parallel {
            use rayon::prelude::*;
            return items.par_iter().with_min_len(64).map(&f).collect();
        }
    }
    let _ = mode;
    items.iter().map(f).collect()
}
