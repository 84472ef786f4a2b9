//! Iterative radix-2 FFT. Grid sizes are always powers of two.

use alloc::vec::Vec;
use num_complex::Complex64;

/// Precomputed twiddles and bit-reversal permutation for one length.
#[derive(Debug, Clone)]
pub struct Fft {
    n: usize,
    // e^{-2 pi i k / n} for k < n/2
    twiddles: Vec<Complex64>,
    bitrev: Vec<u32>,
}

impl Fft {
    /// Panics unless `n` is a power of two.
    pub fn new(n: usize) -> Self {
        assert!(n.is_power_of_two(), "FFT length {n} is not a power of two");
        let twiddles = (0..n / 2)
            .map(|k| {
                let angle = -crate::TAU * k as f64 / n as f64;
                Complex64::new(libm::cos(angle), libm::sin(angle))
            })
            .collect();
        let bits = n.trailing_zeros();
        let bitrev = (0..n as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Self {
            n,
            twiddles,
            bitrev,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// In-place `X_k = sum_j x_j e^{-2 pi i jk/n}`.
    pub fn forward(&self, buf: &mut [Complex64]) {
        self.run(buf, false);
    }

    /// In-place `x_j = sum_k X_k e^{+2 pi i jk/n}` (unnormalized).
    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.run(buf, true);
    }

    fn run(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.n;
        assert_eq!(buf.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if inverse {
                        w = w.conj();
                    }
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
    }

    /// Transforms every axis of a row-major `n^dim` array.
    pub fn run_nd(&self, data: &mut [Complex64], dim: usize, inverse: bool) {
        let n = self.n;
        assert_eq!(data.len(), n.pow(dim as u32));
        if dim == 1 {
            self.run(data, inverse);
            return;
        }
        let mut lane = alloc::vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..dim {
            let stride = n.pow((dim - 1 - axis) as u32);
            let block = stride * n;
            for outer in (0..data.len()).step_by(block) {
                for inner in 0..stride {
                    let base = outer + inner;
                    for (j, slot) in lane.iter_mut().enumerate() {
                        *slot = data[base + j * stride];
                    }
                    self.run(&mut lane, inverse);
                    for (j, v) in lane.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, v)| {
                        let a = -crate::TAU * (j * k) as f64 / n as f64;
                        v * Complex64::new(libm::cos(a), libm::sin(a))
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1usize, 2, 4, 8, 32, 64] {
            let x: Vec<_> = (0..n)
                .map(|j| Complex64::new(libm::sin(j as f64 * 0.7), libm::cos(j as f64 * 1.3)))
                .collect();
            let mut y = x.clone();
            Fft::new(n).forward(&mut y);
            for (a, b) in y.iter().zip(naive_dft(&x)) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_undoes_forward_2d() {
        let n = 8;
        let fft = Fft::new(n);
        let x: Vec<_> = (0..n * n)
            .map(|j| Complex64::new(j as f64, -libm::sqrt(j as f64)))
            .collect();
        let mut y = x.clone();
        fft.run_nd(&mut y, 2, false);
        fft.run_nd(&mut y, 2, true);
        for (a, b) in y.iter().zip(&x) {
            assert!((a / (n * n) as f64 - b).norm() < 1e-10);
        }
    }
}
