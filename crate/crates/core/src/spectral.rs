//! Fourier machinery on uniform periodic grids of one or two axes.
//!
//! Node layout is x-fastest: `index = iy * nx + ix`. Wavenumbers are in
//! coordinate units (`2π j / period`). First-derivative multipliers zero the
//! Nyquist mode so the differentiation matrix stays real and skew-symmetric.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

pub(crate) struct Spectral {
    nx: usize,
    ny: usize,
    /// Wavenumbers with the Nyquist entry kept (used for interpolation).
    kx_full: Vec<f64>,
    ky_full: Vec<f64>,
    /// Wavenumbers with the Nyquist entry zeroed (used for differentiation).
    kx: Vec<f64>,
    ky: Vec<f64>,
    fwd_x: Arc<dyn Fft<f64>>,
    inv_x: Arc<dyn Fft<f64>>,
    fwd_y: Option<Arc<dyn Fft<f64>>>,
    inv_y: Option<Arc<dyn Fft<f64>>>,
    /// Real transforms per axis, for single-axis derivatives.
    real: Vec<RealPlans>,
}

type RealPlans = (Arc<dyn RealToComplex<f64>>, Arc<dyn ComplexToReal<f64>>);

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("nx", &self.nx)
            .field("ny", &self.ny)
            .finish()
    }
}

fn wavenumbers(n: usize, period: f64) -> (Vec<f64>, Vec<f64>) {
    let base = 2.0 * PI / period;
    let full: Vec<f64> = (0..n)
        .map(|j| {
            let j = j as i64;
            let n = n as i64;
            let signed = if j <= n / 2 { j } else { j - n };
            base * signed as f64
        })
        .collect();
    let mut diff = full.clone();
    if n.is_multiple_of(2) {
        diff[n / 2] = 0.0;
    }
    (full, diff)
}

impl Spectral {
    pub(crate) fn new(sizes: &[usize], periods: &[f64]) -> Self {
        let mut planner = FftPlanner::<f64>::new();
        let nx = sizes[0];
        let (kx_full, kx) = wavenumbers(nx, periods[0]);
        let fwd_x = planner.plan_fft_forward(nx);
        let inv_x = planner.plan_fft_inverse(nx);
        let (ny, ky_full, ky, fwd_y, inv_y) = if sizes.len() > 1 {
            let ny = sizes[1];
            let (full, diff) = wavenumbers(ny, periods[1]);
            (
                ny,
                full,
                diff,
                Some(planner.plan_fft_forward(ny)),
                Some(planner.plan_fft_inverse(ny)),
            )
        } else {
            (1, vec![0.0], vec![0.0], None, None)
        };
        let mut real_planner = RealFftPlanner::<f64>::new();
        let real = sizes
            .iter()
            .map(|&n| (real_planner.plan_fft_forward(n), real_planner.plan_fft_inverse(n)))
            .collect();
        Self {
            real,
            nx,
            ny,
            kx_full,
            ky_full,
            kx,
            ky,
            fwd_x,
            inv_x,
            fwd_y,
            inv_y,
        }
    }

    pub(crate) fn len(&self) -> usize {
        self.nx * self.ny
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let (fx, fy) = if forward {
            (&self.fwd_x, &self.fwd_y)
        } else {
            (&self.inv_x, &self.inv_y)
        };
        fx.process(buf);
        if let Some(fy) = fy {
            let mut cols = transpose(buf, self.nx, self.ny);
            fy.process(&mut cols);
            buf.copy_from_slice(&transpose(&cols, self.ny, self.nx));
        }
    }

    /// First derivative along `axis`, transforming along that axis only.
    pub(crate) fn axis_derivative(&self, f: &[f64], axis: usize) -> Vec<f64> {
        debug_assert_eq!(f.len(), self.len());
        let (n, k) = if axis == 0 { (self.nx, &self.kx) } else { (self.ny, &self.ky) };
        let (r2c, c2r) = &self.real[axis];
        let rows = if axis == 0 { f.to_vec() } else { transpose(f, self.nx, self.ny) };
        let mut out = vec![0.0; rows.len()];
        let mut input = r2c.make_input_vec();
        let mut spec = r2c.make_output_vec();
        let mut scratch_f = r2c.make_scratch_vec();
        let mut scratch_b = c2r.make_scratch_vec();
        let scale = 1.0 / n as f64;
        for (src, dst) in rows.chunks(n).zip(out.chunks_mut(n)) {
            input.copy_from_slice(src);
            r2c.process_with_scratch(&mut input, &mut spec, &mut scratch_f)
                .expect("buffer lengths match the plan");
            for (c, &kj) in spec.iter_mut().zip(k) {
                *c *= Complex64::new(0.0, kj * scale);
            }
            c2r.process_with_scratch(&mut spec, dst, &mut scratch_b)
                .expect("derivative spectrum is real at DC and Nyquist");
        }
        if axis == 0 {
            out
        } else {
            transpose(&out, self.ny, self.nx)
        }
    }

    /// Unnormalized forward DFT.
    pub(crate) fn forward(&self, f: &[f64]) -> Vec<Complex64> {
        debug_assert_eq!(f.len(), self.len());
        let mut buf: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, true);
        buf
    }

    /// Inverse DFT including the `1/N` normalization; returns the real part.
    pub(crate) fn backward(&self, mut spec: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut spec, false);
        let scale = 1.0 / self.len() as f64;
        spec.into_iter().map(|c| c.re * scale).collect()
    }

    fn multiply<F>(&self, spec: &[Complex64], mult: F) -> Vec<Complex64>
    where
        F: Fn(f64, f64) -> Complex64,
    {
        let mut out = Vec::with_capacity(spec.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(spec[iy * self.nx + ix] * mult(self.kx[ix], self.ky[iy]));
            }
        }
        out
    }

    /// First derivative along `axis` from a precomputed spectrum.
    pub(crate) fn derivative_of(&self, spec: &[Complex64], axis: usize) -> Vec<f64> {
        let out = self.multiply(spec, |kx, ky| {
            let k = if axis == 0 { kx } else { ky };
            Complex64::new(0.0, k)
        });
        self.backward(out)
    }

    /// Second derivative `∂_a ∂_b` from a precomputed spectrum.
    pub(crate) fn second_derivative_of(&self, spec: &[Complex64], a: usize, b: usize) -> Vec<f64> {
        let out = self.multiply(spec, |kx, ky| {
            let ka = if a == 0 { kx } else { ky };
            let kb = if b == 0 { kx } else { ky };
            Complex64::new(-ka * kb, 0.0)
        });
        self.backward(out)
    }

    /// Normalized Fourier coefficients with signed wavenumbers, for evaluating
    /// the trigonometric interpolant off the grid.
    pub(crate) fn interpolant(&self, f: &[f64]) -> Interpolant {
        let spec = self.forward(f);
        let scale = 1.0 / self.len() as f64;
        Interpolant {
            nx: self.nx,
            ny: self.ny,
            kx: self.kx_full.clone(),
            ky: self.ky_full.clone(),
            coeffs: spec.into_iter().map(|c| c * scale).collect(),
        }
    }
}

/// Transpose of a row-major `rows × cols` array stored with `cols` fastest.
fn transpose<T: Copy>(buf: &[T], cols: usize, rows: usize) -> Vec<T> {
    let mut out = Vec::with_capacity(buf.len());
    for c in 0..cols {
        for r in 0..rows {
            out.push(buf[r * cols + c]);
        }
    }
    out
}

/// Band-limited trigonometric interpolant of grid samples.
#[derive(Debug, Clone)]
pub(crate) struct Interpolant {
    nx: usize,
    ny: usize,
    kx: Vec<f64>,
    ky: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl Interpolant {
    pub(crate) fn eval(&self, x: f64, y: f64) -> f64 {
        let ex: Vec<Complex64> = self.kx.iter().map(|&k| Complex64::from_polar(1.0, k * x)).collect();
        let mut total = 0.0;
        for iy in 0..self.ny {
            let ey = Complex64::from_polar(1.0, self.ky[iy] * y);
            let row = &self.coeffs[iy * self.nx..(iy + 1) * self.nx];
            let s: Complex64 = row.iter().zip(&ex).map(|(c, e)| c * e).sum();
            total += (s * ey).re;
        }
        total
    }

    /// Exact integral of the 1-d interpolant over `[lo, hi]`.
    pub(crate) fn integrate_interval(&self, lo: f64, hi: f64) -> f64 {
        debug_assert_eq!(self.ny, 1);
        let mut total = 0.0;
        for (c, &k) in self.coeffs.iter().zip(&self.kx) {
            if k == 0.0 {
                total += c.re * (hi - lo);
            } else {
                let d = Complex64::from_polar(1.0, k * hi) - Complex64::from_polar(1.0, k * lo);
                total += (c * d / Complex64::new(0.0, k)).re;
            }
        }
        total
    }
}
