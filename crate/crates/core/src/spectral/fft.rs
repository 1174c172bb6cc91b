//! Four-dimensional complex FFT built from batched 1D transforms.
//!
//! Data is stored row-major with the last axis contiguous. Every pass
//! transposes the strided lines of one axis into a contiguous buffer, runs
//! the batch through `rustfft` and scatters back.
//!
//! Both directions accept a `cutoff` that prunes work for fields supported in
//! the cube `|k_j| <= cutoff`: the inverse skips lines that are identically
//! zero, the forward skips lines whose outputs are discarded. The pruned
//! forward transform zeroes every site outside the cube.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::num_traits::Zero;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Fft4 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

/// Indices along one axis whose wavenumber satisfies `|k| <= cutoff`,
/// together with the contiguous runs they form.
struct AxisKeep {
    indices: Vec<usize>,
    runs: Vec<(usize, usize)>,
}

impl AxisKeep {
    fn new(n: usize, cutoff: Option<usize>) -> Self {
        let indices: Vec<usize> = match cutoff {
            Some(c) if 2 * c + 1 < n => (0..=c).chain(n - c..n).collect(),
            _ => (0..n).collect(),
        };
        let mut runs: Vec<(usize, usize)> = Vec::new();
        for &i in &indices {
            match runs.last_mut() {
                Some((start, len)) if *start + *len == i => *len += 1,
                _ => runs.push((i, 1)),
            }
        }
        AxisKeep { indices, runs }
    }
}

impl Fft4 {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Fft4 {
            n,
            forward,
            inverse,
            scratch_len,
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn len(&self) -> usize {
        self.n.pow(4)
    }

    /// Unnormalized inverse transform: `u(x) = sum_k c(k) exp(+i k.x)`.
    /// Entries outside the cutoff cube must already be zero.
    pub(crate) fn inverse(&self, data: &mut [Complex64], cutoff: Option<usize>) {
        assert_eq!(data.len(), self.len());
        let keep = AxisKeep::new(self.n, cutoff);
        let mut buf = vec![Complex64::zero(); self.len()];
        let mut scratch = vec![Complex64::zero(); self.scratch_len];
        let fft = self.inverse.as_ref();
        for axis in (0..4).rev() {
            self.pass(data, axis, fft, &keep, &mut buf, &mut scratch);
        }
    }

    /// Forward transform normalized by `1/n^4`, so that it inverts
    /// [`Fft4::inverse`]. Sites outside the cutoff cube are set to zero.
    pub(crate) fn forward(&self, data: &mut [Complex64], cutoff: Option<usize>) {
        assert_eq!(data.len(), self.len());
        let keep = AxisKeep::new(self.n, cutoff);
        let mut buf = vec![Complex64::zero(); self.len()];
        let mut scratch = vec![Complex64::zero(); self.scratch_len];
        let fft = self.forward.as_ref();
        for axis in 0..4 {
            self.pass(data, axis, fft, &keep, &mut buf, &mut scratch);
        }
        let scale = 1.0 / self.len() as f64;
        if keep.indices.len() == self.n {
            data.iter_mut().for_each(|c| *c *= scale);
            return;
        }
        let n = self.n;
        let mut kept = vec![false; n];
        for &i in &keep.indices {
            kept[i] = true;
        }
        for (line, chunk) in data.chunks_exact_mut(n).enumerate() {
            let (i0, i1, i2) = (line / (n * n), (line / n) % n, line % n);
            if kept[i0] && kept[i1] && kept[i2] {
                for (i3, c) in chunk.iter_mut().enumerate() {
                    *c = if kept[i3] { *c * scale } else { Complex64::zero() };
                }
            } else {
                chunk.fill(Complex64::zero());
            }
        }
    }

    fn pass(
        &self,
        data: &mut [Complex64],
        axis: usize,
        fft: &dyn Fft<f64>,
        keep: &AxisKeep,
        buf: &mut [Complex64],
        scratch: &mut [Complex64],
    ) {
        let n = self.n;
        let stride = n.pow(3 - axis as u32);
        let block = n * stride;
        let full = keep.indices.len() == n;

        if axis == 3 {
            if full {
                fft.process_with_scratch(data, scratch);
                return;
            }
            for &i0 in &keep.indices {
                for &i1 in &keep.indices {
                    for &(start, len) in &keep.runs {
                        let base = ((i0 * n + i1) * n + start) * n;
                        fft.process_with_scratch(&mut data[base..base + len * n], scratch);
                    }
                }
            }
            return;
        }

        let mut run_block = |base: usize, data: &mut [Complex64]| {
            let src = &mut data[base..base + block];
            let dst = &mut buf[..block];
            for r in 0..n {
                let row = &src[r * stride..(r + 1) * stride];
                for (c, v) in row.iter().enumerate() {
                    dst[c * n + r] = *v;
                }
            }
            fft.process_with_scratch(dst, scratch);
            for r in 0..n {
                let row = &mut src[r * stride..(r + 1) * stride];
                for (c, v) in row.iter_mut().enumerate() {
                    *v = dst[c * n + r];
                }
            }
        };

        match axis {
            0 => run_block(0, data),
            1 => {
                for &i0 in &keep.indices {
                    run_block(i0 * block, data);
                }
            }
            _ => {
                for &i0 in &keep.indices {
                    for &i1 in &keep.indices {
                        run_block((i0 * n + i1) * block, data);
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn idx(n: usize, i: [usize; 4]) -> usize {
        ((i[0] * n + i[1]) * n + i[2]) * n + i[3]
    }

    fn wrap(n: usize, k: i64) -> usize {
        k.rem_euclid(n as i64) as usize
    }

    #[test]
    fn single_mode_inverse_matches_direct_evaluation() {
        let n = 6;
        let fft = Fft4::new(n);
        let k = [1i64, -2, 0, 1];
        let mut data = vec![Complex64::zero(); fft.len()];
        data[idx(n, [wrap(n, k[0]), wrap(n, k[1]), wrap(n, k[2]), wrap(n, k[3])])] =
            Complex64::new(0.5, -0.25);
        fft.inverse(&mut data, Some(2));
        for (p, v) in data.iter().enumerate() {
            let x = [p / (n * n * n), (p / (n * n)) % n, (p / n) % n, p % n];
            let phase: f64 = (0..4)
                .map(|j| k[j] as f64 * 2.0 * PI * x[j] as f64 / n as f64)
                .sum();
            let expect = Complex64::new(0.5, -0.25) * Complex64::from_polar(1.0, phase);
            assert!((v - expect).norm() < 1e-13);
        }
    }

    #[test]
    fn pruned_round_trip_recovers_cube() {
        let n = 8;
        let cutoff = 2;
        let fft = Fft4::new(n);
        let mut data = vec![Complex64::zero(); fft.len()];
        let keep = AxisKeep::new(n, Some(cutoff));
        let mut seed = 1u64;
        for &a in &keep.indices {
            for &b in &keep.indices {
                for &c in &keep.indices {
                    for &d in &keep.indices {
                        seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
                        let re = (seed >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
                        data[idx(n, [a, b, c, d])] = Complex64::new(re, 0.3 * re);
                    }
                }
            }
        }
        let original = data.clone();
        fft.inverse(&mut data, Some(cutoff));
        let mut full = original.clone();
        fft.inverse(&mut full, None);
        for (a, b) in data.iter().zip(&full) {
            assert!((a - b).norm() < 1e-12);
        }
        fft.forward(&mut data, Some(cutoff));
        for (a, b) in data.iter().zip(&original) {
            assert!((a - b).norm() < 1e-14);
        }
    }
}
