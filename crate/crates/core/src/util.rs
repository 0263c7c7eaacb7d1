//! Small numeric helpers shared across modules.

use num_complex::Complex64;

/// Types the chunked accumulator can sum.
pub trait AddZero: Copy + core::ops::Add<Output = Self> {
    const ZERO: Self;
}

impl AddZero for f64 {
    const ZERO: Self = 0.0;
}

impl AddZero for Complex64 {
    const ZERO: Self = Complex64::new(0.0, 0.0);
}

const BLOCK: usize = 1024;

/// Streaming accumulator: terms are summed sequentially in blocks of 1024,
/// block sums are then combined pairwise. The reduction tree depends only on
/// the number of terms pushed, so a sum is bit-reproducible no matter how the
/// surrounding work is scheduled.
pub struct ChunkedSum<T: AddZero> {
    block: T,
    in_block: usize,
    blocks: Vec<T>,
}

impl<T: AddZero> Default for ChunkedSum<T> {
    fn default() -> Self {
        Self { block: T::ZERO, in_block: 0, blocks: Vec::new() }
    }
}

impl<T: AddZero> ChunkedSum<T> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, v: T) {
        self.block = self.block + v;
        self.in_block += 1;
        if self.in_block == BLOCK {
            self.blocks.push(self.block);
            self.block = T::ZERO;
            self.in_block = 0;
        }
    }

    pub fn finish(mut self) -> T {
        if self.in_block > 0 {
            self.blocks.push(self.block);
        }
        pairwise(&self.blocks)
    }
}

/// Pairwise (cascade) summation of a slice.
pub fn pairwise<T: AddZero>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::ZERO,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise(&xs[..mid]) + pairwise(&xs[mid..])
        }
    }
}

/// Pairwise sum of an iterator of f64 terms.
pub fn sum_f64(iter: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = ChunkedSum::<f64>::new();
    for v in iter {
        acc.push(v);
    }
    acc.finish()
}

/// Volume of the unit ball in dimension `n`.
///
/// Uses the two-step recurrence `v_n = v_{n-2} · 2π/n` with `v_0 = 1`,
/// `v_1 = 2`, avoiding any gamma-function evaluation.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(n - 2) * core::f64::consts::TAU / n as f64,
    }
}

/// Surface measure of the unit sphere in dimension `n` (`n ≥ 1`).
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Relative difference `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}
