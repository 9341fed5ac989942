//! Fourier transform and inverse on signals under the convention
//! `Ff(u) = ∫ f(x) e^{-2πi x·u} dx`, realized as scaled DFTs.
//!
//! The forward transform multiplies the DFT by the sample spacing and attaches
//! explicit pre/post twiddle factors for the grid origins, so it is exact for
//! any origin. The output lives on the reciprocal lattice forced symmetric
//! about zero, which keeps later moment integrals free of wraparound
//! bookkeeping.

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, Signal};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Applies `out[k] = post[k] · Σ_j in[j] · pre[j] · fft_kernel(j,k)` along one
/// axis of a flat row-major array.
pub(crate) fn axis_pass(
    data: &mut [Complex64],
    shape: &[usize],
    axis: usize,
    pre: &[Complex64],
    post: &[Complex64],
    fft: &Arc<dyn Fft<f64>>,
) {
    let m = shape[axis];
    let inner: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * m * inner + i;
            for j in 0..m {
                buf[j] = data[base + j * inner] * pre[j];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..m {
                data[base + k * inner] = buf[k] * post[k];
            }
        }
    }
}

/// Forward transform onto the centered reciprocal lattice.
pub fn fourier(f: &Signal) -> Result<Signal> {
    if f.domain() != Domain::Time {
        return Err(Error::WrongDomain { expected: "time" });
    }
    let grid = f.grid();
    let out_grid = grid.reciprocal();
    let mut data = f.samples().to_vec();
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..grid.dim() {
        let m = grid.count()[axis];
        let dx = grid.spacing()[axis];
        let x0 = grid.origin()[axis];
        let m0 = m / 2;
        // e^{-2πi jΔ u_k} = e^{2πi j m0 / m} · e^{-2πi jk/m} for u_k = (k - m0)·du
        let pre: Vec<Complex64> = (0..m)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * (j * m0 % m) as f64 / m as f64))
            .collect();
        let post: Vec<Complex64> = (0..m)
            .map(|k| {
                let u = out_grid.axis_coord(axis, k);
                Complex64::from_polar(dx, -2.0 * PI * x0 * u)
            })
            .collect();
        let fft = planner.plan_fft_forward(m);
        axis_pass(&mut data, grid.count(), axis, &pre, &post, &fft);
    }
    Ok(Signal::from_parts(out_grid, data, Domain::Frequency, f.truncated()))
}

/// Inverse transform onto the centered reciprocal of the spectrum's grid.
pub fn inverse_fourier(spec: &Signal) -> Result<Signal> {
    let target = spec.grid().reciprocal();
    inverse_fourier_onto(spec, &target)
}

/// Inverse transform onto an explicit commensurate time grid (same counts,
/// per-axis spacing `1/(count·Δu)`, arbitrary origin).
pub fn inverse_fourier_onto(spec: &Signal, target: &Grid) -> Result<Signal> {
    if spec.domain() != Domain::Frequency {
        return Err(Error::WrongDomain { expected: "frequency" });
    }
    let fgrid = spec.grid();
    if target.count() != fgrid.count() {
        return Err(Error::InvalidGrid("target counts do not match the spectrum".into()));
    }
    for axis in 0..fgrid.dim() {
        let expected = 1.0 / (fgrid.count()[axis] as f64 * fgrid.spacing()[axis]);
        let got = target.spacing()[axis];
        if (got - expected).abs() > 1e-12 * expected {
            return Err(Error::InvalidGrid(format!(
                "target spacing {got} on axis {axis} is not reciprocal to the spectrum ({expected})"
            )));
        }
    }
    let mut data = spec.samples().to_vec();
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..fgrid.dim() {
        let m = fgrid.count()[axis];
        let du = fgrid.spacing()[axis];
        let u0 = fgrid.origin()[axis];
        let t0 = target.origin()[axis];
        // e^{2πi u_k t_j} = e^{2πi kΔu t0} · e^{2πi u0 t_j} · e^{2πi kj/m}
        let pre: Vec<Complex64> = (0..m)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 * du * t0))
            .collect();
        let post: Vec<Complex64> = (0..m)
            .map(|j| {
                let t = target.axis_coord(axis, j);
                Complex64::from_polar(du, 2.0 * PI * u0 * t)
            })
            .collect();
        let fft = planner.plan_fft_inverse(m);
        axis_pass(&mut data, fgrid.count(), axis, &pre, &post, &fft);
    }
    Ok(Signal::from_parts(target.clone(), data, Domain::Time, spec.truncated()))
}

/// Direct evaluation of the transform on an arbitrary frequency lattice,
/// `out[k] = weight · Σ_j f[j] e^{-2πi x_j·u_k}`. Exact twiddles, quadratic
/// cost; used where the target lattice is not the reciprocal one.
pub fn dft_onto(f: &Signal, target: &Grid) -> Result<Signal> {
    if f.domain() != Domain::Time {
        return Err(Error::WrongDomain { expected: "time" });
    }
    let grid = f.grid();
    if grid.dim() != target.dim() {
        return Err(Error::InvalidGrid("dimension mismatch".into()));
    }
    let dim = grid.dim();
    // Separable per-axis phase tables: e^{-2πi x_j u_k} = Π_a E_a[j_a][k_a].
    let mut tables: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
    for a in 0..dim {
        let mj = grid.count()[a];
        let mk = target.count()[a];
        let mut t = Vec::with_capacity(mj * mk);
        for j in 0..mj {
            let x = grid.axis_coord(a, j);
            for k in 0..mk {
                let u = target.axis_coord(a, k);
                t.push(Complex64::from_polar(1.0, -2.0 * PI * x * u));
            }
        }
        tables.push(t);
    }
    let weight = grid.weight();
    let mut out = vec![Complex64::new(0.0, 0.0); target.total()];
    for (kflat, out_k) in out.iter_mut().enumerate() {
        let kmi = target.multi_index(kflat);
        let mut acc = Complex64::new(0.0, 0.0);
        for (jflat, &s) in f.samples().iter().enumerate() {
            let jmi = grid.multi_index(jflat);
            let mut phase = Complex64::new(1.0, 0.0);
            for a in 0..dim {
                phase *= tables[a][jmi[a] * target.count()[a] + kmi[a]];
            }
            acc += s * phase;
        }
        *out_k = acc * weight;
    }
    Ok(Signal::from_parts(target.clone(), out, Domain::Frequency, f.truncated()))
}
