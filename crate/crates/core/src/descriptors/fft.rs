//! Complex FFT for arbitrary lengths: iterative radix-2 for powers of two,
//! Bluestein's chirp-z otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const ZERO: Complex = Complex { re: 0.0, im: 0.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn cis(theta: f64) -> Self {
        Self::new(libm::cos(theta), libm::sin(theta))
    }

    pub fn conj(self) -> Self {
        Self::new(self.re, -self.im)
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.re * s, self.im * s)
    }

    pub fn abs(self) -> f64 {
        libm::hypot(self.re, self.im)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, o: Complex) -> Complex {
        Complex::new(self.re + o.re, self.im + o.im)
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, o: Complex) -> Complex {
        Complex::new(self.re - o.re, self.im - o.im)
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, o: Complex) -> Complex {
        Complex::new(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)
    }
}

/// Precomputed transform of one length. Forward uses `exp(-2πi·jk/n)`; the
/// inverse is unscaled.
pub(crate) struct Fft {
    n: usize,
    plan: Plan,
}

enum Plan {
    Radix2 { twiddles: Vec<Complex> },
    Bluestein { m: usize, chirp: Vec<Complex>, kernel_hat: Vec<Complex>, inner: Vec<Complex> },
}

fn radix2_twiddles(n: usize) -> Vec<Complex> {
    (0..n / 2).map(|k| Complex::cis(-2.0 * PI * k as f64 / n as f64)).collect()
}

fn radix2(buf: &mut [Complex], twiddles: &[Complex], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..len / 2 {
                let mut w = twiddles[k * stride];
                if inverse {
                    w = w.conj();
                }
                let a = buf[start + k];
                let b = buf[start + k + len / 2] * w;
                buf[start + k] = a + b;
                buf[start + k + len / 2] = a - b;
            }
        }
        len <<= 1;
    }
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        if n.is_power_of_two() {
            return Self { n, plan: Plan::Radix2 { twiddles: radix2_twiddles(n) } };
        }
        let m = (2 * n - 1).next_power_of_two();
        let inner = radix2_twiddles(m);
        // chirp[k] = exp(-πi k²/n); k² taken mod 2n to keep the angle small
        let chirp: Vec<Complex> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128) % (2 * n as u128);
                Complex::cis(-PI * k2 as f64 / n as f64)
            })
            .collect();
        let mut kernel = vec![Complex::ZERO; m];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[m - k] = chirp[k].conj();
        }
        radix2(&mut kernel, &inner, false);
        Self { n, plan: Plan::Bluestein { m, chirp, kernel_hat: kernel, inner } }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn process(&self, buf: &mut [Complex], inverse: bool) {
        assert_eq!(buf.len(), self.n);
        match &self.plan {
            Plan::Radix2 { twiddles } => radix2(buf, twiddles, inverse),
            Plan::Bluestein { m, chirp, kernel_hat, inner } => {
                // inverse DFT = conj(DFT(conj(x)))
                if inverse {
                    for v in buf.iter_mut() {
                        *v = v.conj();
                    }
                }
                let mut a = vec![Complex::ZERO; *m];
                for k in 0..self.n {
                    a[k] = buf[k] * chirp[k];
                }
                radix2(&mut a, inner, false);
                for (x, k) in a.iter_mut().zip(kernel_hat) {
                    *x = *x * *k;
                }
                radix2(&mut a, inner, true);
                let scale = 1.0 / *m as f64;
                for k in 0..self.n {
                    buf[k] = (a[k] * chirp[k]).scale(scale);
                }
                if inverse {
                    for v in buf.iter_mut() {
                        *v = v.conj();
                    }
                }
            }
        }
    }
}

/// In-place 2-D transform of a row-major `n × n` buffer. The inverse is
/// scaled by `1/n²`.
pub(crate) fn fft2(buf: &mut [Complex], fft: &Fft, inverse: bool) {
    let n = fft.len();
    assert_eq!(buf.len(), n * n);
    for row in buf.chunks_exact_mut(n) {
        fft.process(row, inverse);
    }
    let mut col = vec![Complex::ZERO; n];
    for c in 0..n {
        for r in 0..n {
            col[r] = buf[r * n + c];
        }
        fft.process(&mut col, inverse);
        for r in 0..n {
            buf[r * n + c] = col[r];
        }
    }
    if inverse {
        let s = 1.0 / (n * n) as f64;
        for v in buf.iter_mut() {
            *v = v.scale(s);
        }
    }
}
