//! Loop drivers. With the `parallel` feature grid loops and sample batches
//! run on the rayon pool; without it they run in order. Every driver writes
//! each output slot from exactly one closure call, so results never depend on
//! the number of workers.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Points handed to a worker at a time.
#[cfg(feature = "parallel")]
const MIN_CHUNK: usize = 512;

/// Fill `out` in blocks of `width`, calling `f(point, block)` once per block.
pub fn fill_points<F>(out: &mut [f64], width: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync + Send,
{
    if width == 0 {
        return;
    }
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(width)
            .with_min_len(MIN_CHUNK)
            .enumerate()
            .for_each(|(p, o)| f(p, o));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(width).enumerate().for_each(|(p, o)| f(p, o));
    }
}

/// Map over `0..len`, keeping output order.
pub fn map_indices<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Map over a slice of independent work items (samples, trajectories),
/// keeping output order.
pub fn map_items<I, T, F>(items: &[I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

pub fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}
