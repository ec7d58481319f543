//! Sequential / data-parallel execution switch.
//!
//! With the `parallel` feature (on by default) independent work items are spread
//! over the rayon pool. The mode can be flipped at runtime; without the feature
//! every call runs sequentially. Exact rational arithmetic makes the result
//! independent of the mode.

use std::sync::atomic::{AtomicBool, Ordering};

static PARALLEL: AtomicBool = AtomicBool::new(cfg!(feature = "parallel"));

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sequential,
    Parallel,
}

/// Selects the execution mode. Returns the mode actually in effect, which is
/// `Sequential` when the crate was built without the `parallel` feature.
pub fn set_mode(mode: Mode) -> Mode {
    let on = mode == Mode::Parallel && cfg!(feature = "parallel");
    PARALLEL.store(on, Ordering::Relaxed);
    current_mode()
}

pub fn current_mode() -> Mode {
    if PARALLEL.load(Ordering::Relaxed) {
        Mode::Parallel
    } else {
        Mode::Sequential
    }
}

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if current_mode() == Mode::Parallel && items.len() > 1 {
            use rayon::prelude::*;
            return items.par_iter().map(f).collect();
        }
    }
    items.iter().map(f).collect()
}

/// Like [`map`] but short-circuits on the first error in item order.
pub fn try_map<T, R, E, F>(items: &[T], f: F) -> Result<Vec<R>, E>
where
    T: Sync,
    R: Send,
    E: Send,
    F: Fn(&T) -> Result<R, E> + Sync + Send,
{
    map(items, f).into_iter().collect()
}
