//! Amplitude-group kernels.
//!
//! A single-atom operator touches amplitudes in independent groups: every
//! group shares all other atoms' digits and differs only in the target
//! atom's digit. Both back-ends below visit the same groups and produce the
//! same result; the parallel one is only compiled with the `parallel`
//! feature.

use num_complex::Complex64;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Registers smaller than this run sequentially under [`Backend::auto`].
pub const PARALLEL_MIN_LEN: usize = 1 << 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Backend {
    Sequential,
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Backend {
    /// Parallel for large vectors when the feature is enabled, sequential otherwise.
    pub fn auto(len: usize) -> Self {
        #[cfg(feature = "parallel")]
        if len >= PARALLEL_MIN_LEN {
            return Backend::Parallel;
        }
        let _ = len;
        Backend::Sequential
    }
}

/// Where one atom's digit lives inside the flat index, and which of its
/// levels a block acts on.
#[derive(Clone, Debug)]
pub(crate) struct GroupLayout {
    pub stride: usize,
    pub dim: usize,
    pub levels: Vec<usize>,
    /// level index -> position inside `levels`
    pub slot: Vec<Option<usize>>,
}

impl GroupLayout {
    pub fn new(stride: usize, dim: usize, levels: &[usize]) -> Self {
        let mut slot = vec![None; dim];
        for (j, &l) in levels.iter().enumerate() {
            slot[l] = Some(j);
        }
        Self {
            stride,
            dim,
            levels: levels.to_vec(),
            slot,
        }
    }

    fn width(&self) -> usize {
        self.levels.len()
    }
}

/// In-place `group <- block * group` for every group whose base index (target
/// digit zero) is admitted by `admit`. `block` is row-major, `w x w` with
/// `w = layout.levels.len()`.
pub(crate) fn apply_block<F>(
    backend: Backend,
    amps: &mut [Complex64],
    layout: &GroupLayout,
    block: &[Complex64],
    admit: F,
) where
    F: Fn(usize) -> bool + Sync,
{
    match backend {
        Backend::Sequential => apply_block_seq(amps, layout, block, &admit),
        #[cfg(feature = "parallel")]
        Backend::Parallel => apply_block_par(amps, layout, block, &admit),
    }
}

fn apply_block_seq<F>(amps: &mut [Complex64], layout: &GroupLayout, block: &[Complex64], admit: &F)
where
    F: Fn(usize) -> bool,
{
    let span = layout.stride * layout.dim;
    for (c, chunk) in amps.chunks_mut(span).enumerate() {
        apply_chunk(chunk, c * span, layout, block, admit);
    }
}

fn apply_chunk<F>(chunk: &mut [Complex64], offset: usize, layout: &GroupLayout, block: &[Complex64], admit: &F)
where
    F: Fn(usize) -> bool,
{
    let w = layout.width();
    let s = layout.stride;
    let mut gathered = [Complex64::new(0.0, 0.0); 8];
    let mut spill = Vec::new();
    let g: &mut [Complex64] = if w <= 8 {
        &mut gathered[..w]
    } else {
        spill.resize(w, Complex64::new(0.0, 0.0));
        &mut spill
    };
    for inner in 0..s {
        if !admit(offset + inner) {
            continue;
        }
        for (j, &l) in layout.levels.iter().enumerate() {
            g[j] = chunk[inner + l * s];
        }
        for (row, &l) in layout.levels.iter().enumerate() {
            let coeffs = &block[row * w..(row + 1) * w];
            chunk[inner + l * s] = coeffs.iter().zip(g.iter()).map(|(b, x)| b * x).sum();
        }
    }
}

#[cfg(feature = "parallel")]
/// The target levels' stride-long runs inside one chunk, in block order.
fn level_slices<'a>(chunk: &'a mut [Complex64], layout: &GroupLayout) -> Vec<&'a mut [Complex64]> {
    let mut runs: Vec<Option<&mut [Complex64]>> = chunk.chunks_mut(layout.stride).map(Some).collect();
    layout
        .levels
        .iter()
        .map(|&l| runs[l].take().expect("distinct levels"))
        .collect()
}

#[cfg(feature = "parallel")]
/// Group `i` is `slices[j][i]` over `j`; its base index is `base + i`.
fn apply_groups<F>(slices: &mut [&mut [Complex64]], base: usize, block: &[Complex64], admit: &F)
where
    F: Fn(usize) -> bool,
{
    let w = slices.len();
    let mut gathered = [Complex64::new(0.0, 0.0); 8];
    let mut gathered_vec = Vec::new();
    let g: &mut [Complex64] = if w <= 8 {
        &mut gathered[..w]
    } else {
        gathered_vec.resize(w, Complex64::new(0.0, 0.0));
        &mut gathered_vec
    };
    for i in 0..slices[0].len() {
        if !admit(base + i) {
            continue;
        }
        for (j, s) in slices.iter().enumerate() {
            g[j] = s[i];
        }
        for (row, s) in slices.iter_mut().enumerate() {
            let coeffs = &block[row * w..(row + 1) * w];
            s[i] = coeffs.iter().zip(g.iter()).map(|(b, x)| b * x).sum();
        }
    }
}

#[cfg(feature = "parallel")]
const GRAIN: usize = 1 << 12;

// Chunks are independent; when there are too few of them (a high-order target
// atom) the groups inside each chunk are split recursively instead.
#[cfg(feature = "parallel")]
fn apply_block_par<F>(amps: &mut [Complex64], layout: &GroupLayout, block: &[Complex64], admit: &F)
where
    F: Fn(usize) -> bool + Sync,
{
    let span = layout.stride * layout.dim;
    if amps.len() / span >= 4 * rayon::current_num_threads() {
        amps.par_chunks_mut(span)
            .enumerate()
            .for_each(|(c, chunk)| apply_chunk(chunk, c * span, layout, block, admit));
    } else {
        for (c, chunk) in amps.chunks_mut(span).enumerate() {
            split_groups(level_slices(chunk, layout), c * span, block, admit);
        }
    }
}

#[cfg(feature = "parallel")]
fn split_groups<F>(mut slices: Vec<&mut [Complex64]>, base: usize, block: &[Complex64], admit: &F)
where
    F: Fn(usize) -> bool + Sync,
{
    let len = slices[0].len();
    if len <= GRAIN {
        apply_groups(&mut slices, base, block, admit);
        return;
    }
    let mid = len / 2;
    let (lo, hi): (Vec<_>, Vec<_>) = slices.into_iter().map(|s| s.split_at_mut(mid)).unzip();
    rayon::join(
        || split_groups(lo, base, block, admit),
        || split_groups(hi, base + mid, block, admit),
    );
}

/// `dst += block * src` groupwise, no filter. Used to apply a sum of local
/// operators without forming the full matrix.
pub(crate) fn accumulate_block(
    backend: Backend,
    src: &[Complex64],
    dst: &mut [Complex64],
    layout: &GroupLayout,
    block: &[Complex64],
) {
    let w = layout.width();
    let s = layout.stride;
    let kernel = |i: usize, out: &mut Complex64| {
        let digit = (i / s) % layout.dim;
        if let Some(row) = layout.slot[digit] {
            let base = i - digit * s;
            let coeffs = &block[row * w..(row + 1) * w];
            *out += coeffs
                .iter()
                .zip(&layout.levels)
                .map(|(b, &l)| b * src[base + l * s])
                .sum::<Complex64>();
        }
    };
    match backend {
        Backend::Sequential => dst.iter_mut().enumerate().for_each(|(i, o)| kernel(i, o)),
        #[cfg(feature = "parallel")]
        Backend::Parallel => dst.par_iter_mut().enumerate().for_each(|(i, o)| kernel(i, o)),
    }
}
