//! Exact finite sinc sums on rational grids.
//!
//! Both the test-signal prototype and the uniform-sampling reconstruction
//! are finite sinc series evaluated on a uniform output grid whose spacing
//! is a rational multiple of the input spacing. Placing input and output
//! on their common refinement turns the sum into a linear convolution,
//! which is computed exactly (up to rounding) with one small forward FFT,
//! a pointwise product with a cached kernel spectrum, a spectral fold and
//! one inverse FFT. No kernel truncation or windowing is involved.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Normalized sinc, `sin(pi x) / (pi x)`.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Evaluates `sum_k x[k] * sinc((offset + q*j - p*k) / p)` for
/// `j = 0..n_out` by plain summation. Quadratic cost; used for small
/// problems and as a cross-check of [`SincSum`].
pub fn sinc_sum_direct(x: &[f64], p: usize, q: usize, offset: i64, n_out: usize) -> Vec<f64> {
    let (p, q) = (p as i64, q as i64);
    (0..n_out as i64)
        .map(|j| {
            x.iter()
                .enumerate()
                .map(|(k, &xk)| xk * kernel_at(offset + q * j - p * k as i64, p))
                .sum()
        })
        .collect()
}

/// `sinc(d / p)` with exact zeros and the unit peak on the knots.
fn kernel_at(d: i64, p: i64) -> f64 {
    if d % p == 0 {
        if d == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        sinc(d as f64 / p as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct SumKey {
    p: usize,
    q: usize,
    offset: i64,
    n_in: usize,
    n_out: usize,
}

/// Precomputed plan for one (input grid, output grid) geometry.
///
/// Input sample `k` sits at fine index `p*k`, output sample `j` at fine
/// index `offset + q*j`; the sinc kernel has its zeros at multiples of `p`
/// fine steps.
pub struct SincSum {
    key: SumKey,
    /// circular convolution length; a multiple of both `p` and `q`
    size: usize,
    in_len: usize,
    out_len: usize,
    spectrum: Vec<Complex64>,
    fft_in: Arc<dyn Fft<f64>>,
    ifft_out: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for SincSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SincSum")
            .field("p", &self.key.p)
            .field("q", &self.key.q)
            .field("offset", &self.key.offset)
            .field("n_in", &self.key.n_in)
            .field("n_out", &self.key.n_out)
            .field("size", &self.size)
            .finish()
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn is_smooth(mut n: usize) -> bool {
    for f in [2, 3, 5] {
        while n.is_multiple_of(f) {
            n /= f;
        }
    }
    n == 1
}

impl SincSum {
    pub fn new(p: usize, q: usize, offset: i64, n_in: usize, n_out: usize) -> Self {
        assert!(p > 0 && q > 0 && n_in > 0 && n_out > 0);
        let key = SumKey { p, q, offset, n_in, n_out };
        let lcm = p / gcd(p, q) * q;
        let span = p * (n_in - 1) + q * (n_out - 1) + 1;
        let needed = span.max(p * n_in).max(q * n_out);
        let mut m = needed.div_ceil(lcm);
        while !is_smooth(m) {
            m += 1;
        }
        let size = lcm * m;
        let (in_len, out_len) = (size / p, size / q);

        // kernel indexed by e = q*j - p*k, stored at e mod size
        let lo = -((p * (n_in - 1)) as i64);
        let hi = (q * (n_out - 1)) as i64;
        let mut kernel = vec![Complex64::new(0.0, 0.0); size];
        for e in lo..=hi {
            let idx = e.rem_euclid(size as i64) as usize;
            kernel[idx] = Complex64::new(kernel_at(e + offset, p as i64), 0.0);
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(size).process(&mut kernel);
        let fft_in = planner.plan_fft_forward(in_len);
        let ifft_out = planner.plan_fft_inverse(out_len);
        Self { key, size, in_len, out_len, spectrum: kernel, fft_in, ifft_out }
    }

    /// Shared plan from a process-wide cache.
    pub fn cached(p: usize, q: usize, offset: i64, n_in: usize, n_out: usize) -> Arc<Self> {
        static CACHE: OnceLock<Mutex<HashMap<SumKey, Arc<SincSum>>>> = OnceLock::new();
        let key = SumKey { p, q, offset, n_in, n_out };
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(plan) = cache.lock().expect("sinc plan cache poisoned").get(&key) {
            return Arc::clone(plan);
        }
        // built outside the lock; a racing duplicate is harmless
        let plan = Arc::new(Self::new(p, q, offset, n_in, n_out));
        cache
            .lock()
            .expect("sinc plan cache poisoned")
            .entry(key)
            .or_insert(plan)
            .clone()
    }

    pub fn n_in(&self) -> usize {
        self.key.n_in
    }

    pub fn n_out(&self) -> usize {
        self.key.n_out
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.key.n_in, "input length does not match the plan");
        let mut spec: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        spec.resize(self.in_len, Complex64::new(0.0, 0.0));
        self.fft_in.process(&mut spec);

        // the zero-stuffed input has a periodic spectrum, and decimating the
        // output by q folds the product spectrum q times
        let mut folded = vec![Complex64::new(0.0, 0.0); self.out_len];
        for (k, h) in self.spectrum.iter().enumerate() {
            folded[k % self.out_len] += spec[k % self.in_len] * h;
        }
        self.ifft_out.process(&mut folded);
        let scale = 1.0 / self.size as f64;
        folded[..self.key.n_out].iter().map(|c| c.re * scale).collect()
    }
}

/// Six-point Lagrange weights for nodes at offsets -2..=3 and fractional
/// position `mu` in [0, 1).
#[inline]
pub(crate) fn lagrange6(mu: f64) -> [f64; 6] {
    const DEN: [f64; 6] = [-120.0, 24.0, -12.0, 12.0, -24.0, 120.0];
    let d = [mu + 2.0, mu + 1.0, mu, mu - 1.0, mu - 2.0, mu - 3.0];
    let mut w = [0.0; 6];
    for k in 0..6 {
        let mut num = 1.0;
        for (m, dm) in d.iter().enumerate() {
            if m != k {
                num *= dm;
            }
        }
        w[k] = num / DEN[k];
    }
    w
}
