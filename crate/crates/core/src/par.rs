//! Thin switch between rayon data-parallel loops and sequential fallbacks.
//!
//! Compiled with the `parallel` feature (default) the combinators dispatch to
//! rayon; without it they run plain loops with identical semantics. All
//! numerical results are independent of the mode: work items never share
//! mutable state and reductions are per-item.

/// Caps the rayon worker count. Call once, before any parallel work; later
/// calls are ignored by rayon. No-op in sequential builds.
#[cfg(feature = "parallel")]
pub fn configure_threads(n: usize) {
    if n > 0 {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

#[cfg(not(feature = "parallel"))]
pub fn configure_threads(_n: usize) {}

/// "parallel" or "sequential", for logs and bench labels.
pub fn mode() -> &'static str {
    if cfg!(feature = "parallel") {
        "parallel"
    } else {
        "sequential"
    }
}

/// Maps `f` over `0..len` and collects results in index order.
#[cfg(feature = "parallel")]
pub fn map_indexed<U: Send>(len: usize, f: impl Fn(usize) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    (0..len).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indexed<U>(len: usize, f: impl Fn(usize) -> U) -> Vec<U> {
    (0..len).map(f).collect()
}

/// Splits `data` into consecutive chunks of `chunk` elements (last one may be
/// shorter) and applies `f(chunk_index, chunk)` to each.
#[cfg(feature = "parallel")]
pub fn for_each_chunk_mut<T: Send>(
    data: &mut [T],
    chunk: usize,
    f: impl Fn(usize, &mut [T]) + Sync + Send,
) {
    use rayon::prelude::*;
    data.par_chunks_mut(chunk.max(1))
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

#[cfg(not(feature = "parallel"))]
pub fn for_each_chunk_mut<T>(data: &mut [T], chunk: usize, f: impl Fn(usize, &mut [T])) {
    for (i, c) in data.chunks_mut(chunk.max(1)).enumerate() {
        f(i, c);
    }
}
