// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Row-parallel helpers. Sequential without the `std` feature.

use alloc::vec::Vec;

#[cfg(feature = "std")]
use rayon::prelude::*;

/// Calls `f(row_index, row)` for each `cols`-wide chunk of `data`.
pub(crate) fn for_each_row<T, F>(data: &mut [T], cols: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    if cols == 0 {
        return;
    }
    #[cfg(feature = "std")]
    data.par_chunks_mut(cols).enumerate().for_each(|(i, r)| f(i, r));
    #[cfg(not(feature = "std"))]
    data.chunks_mut(cols).enumerate().for_each(|(i, r)| f(i, r));
}

/// Collects `f(i)` for `i in 0..n`, in index order.
pub(crate) fn map_range<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "std")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "std"))]
    {
        (0..n).map(f).collect()
    }
}
