//! Distribution engine: the cross-Wigner core, kernel dispatch for the
//! catalog, a spectral-domain cross-validation route, and the Moyal residual.
//!
//! Discretization: the lag variable runs over even multiples of the sample
//! spacing, `y = 2mΔ`, so every lag product `f[n+m]·conj(g[n-m])` falls on
//! grid nodes with no interpolation. The paired frequency lattice therefore
//! has the half-sample step `1/(2MΔ)` per axis. Out-of-range lag indices
//! contribute zero, which the boundary-decay guard justifies. Dirac deltas
//! arising from the closed-form kernels are resolved analytically into
//! sifted index forms before discretization, never sampled.

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, Signal};
use crate::kernel::{classify, conjugate_multiplier, kernel_value, Kernel};
use crate::spectral::{axis_pass, dft_onto, fourier};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::Arc;

/// Relative spectral magnitude allowed at the distribution frequency edge;
/// above this the engine refuses the signal rather than alias silently.
pub const BANDWIDTH_LIMIT: f64 = 1e-6;

/// Node cap per axis for the cubic-cost tabulated-kernel quadrature.
pub const TABULATED_NODE_LIMIT: usize = 64;

/// Complex distribution over a (time-grid × frequency-grid) product,
/// time-major storage.
#[derive(Debug, Clone)]
pub struct Distribution {
    time_grid: Grid,
    freq_grid: Grid,
    values: Vec<Complex64>,
    kernel_tag: String,
}

impl Distribution {
    pub(crate) fn new(
        time_grid: Grid,
        freq_grid: Grid,
        values: Vec<Complex64>,
        kernel_tag: String,
    ) -> Self {
        debug_assert_eq!(values.len(), time_grid.total() * freq_grid.total());
        Self { time_grid, freq_grid, values, kernel_tag }
    }

    pub fn time_grid(&self) -> &Grid {
        &self.time_grid
    }

    pub fn freq_grid(&self) -> &Grid {
        &self.freq_grid
    }

    /// Flat values, time-major: `index = time_node * freq_total + freq_node`.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn kernel_tag(&self) -> &str {
        &self.kernel_tag
    }

    pub fn value(&self, time_node: usize, freq_node: usize) -> Complex64 {
        self.values[time_node * self.freq_grid.total() + freq_node]
    }

    /// Quadrature weight of one (x, w) cell.
    pub fn weight(&self) -> f64 {
        self.time_grid.weight() * self.freq_grid.weight()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn l2_norm(&self) -> f64 {
        let sq: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        (sq * self.weight()).sqrt()
    }

    /// 2-D quadrature of `∫∫ C_f conj(C_g)`.
    pub fn inner_product(&self, other: &Distribution) -> Result<Complex64> {
        if self.time_grid != other.time_grid || self.freq_grid != other.freq_grid {
            return Err(Error::IncompatibleGrids);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.values.iter().zip(&other.values) {
            acc += a * b.conj();
        }
        Ok(acc * self.weight())
    }

    pub(crate) fn with_tag(mut self, tag: String) -> Self {
        self.kernel_tag = tag;
        self
    }
}

/// Canonical lag value for a wrapped index on an axis of length `m`.
fn lag_of_index(j: usize, m: usize) -> isize {
    if j <= (m - 1) / 2 {
        j as isize
    } else {
        j as isize - m as isize
    }
}

fn forward_plans(grid: &Grid) -> Vec<Arc<dyn Fft<f64>>> {
    let mut planner = FftPlanner::<f64>::new();
    grid.count().iter().map(|&m| planner.plan_fft_forward(m)).collect()
}

/// Refuse signals the lag lattice cannot represent: dirty boundary decay or
/// spectral content at/beyond the half-sample frequency edge.
fn admit(f: &Signal) -> Result<()> {
    if f.domain() != Domain::Time {
        return Err(Error::WrongDomain { expected: "time" });
    }
    if f.truncated() {
        return Err(Error::TruncatedSignal { ratio: f.boundary_ratio() });
    }
    let spec = fourier(f)?;
    let peak = spec.max_abs();
    if peak == 0.0 {
        return Ok(());
    }
    let half = f.grid().half_reciprocal();
    let mut tail = 0.0f64;
    for (k, v) in spec.samples().iter().enumerate() {
        let u = spec.grid().node(k);
        let outside = u.iter().enumerate().any(|(a, &ua)| {
            let edge = half.count()[a] as f64 / 2.0 * half.spacing()[a];
            ua.abs() >= edge - 1e-12
        });
        if outside {
            tail = tail.max(v.norm());
        }
    }
    let ratio = tail / peak;
    if ratio > BANDWIDTH_LIMIT {
        return Err(Error::BandwidthLimit { ratio, limit: BANDWIDTH_LIMIT });
    }
    Ok(())
}

/// Cross-Wigner distribution of two signals on the same time grid:
/// for each time node n, the lag slice `r[m] = f[n+m]·conj(g[n-m])` is
/// transformed onto the half-sample frequency lattice and scaled by `2Δ`
/// per axis. The auto case `g = f` has Hermitian lag slices, so its values
/// are real up to rounding.
pub fn cross_wigner(f: &Signal, g: &Signal) -> Result<Distribution> {
    if f.grid() != g.grid() {
        return Err(Error::IncompatibleGrids);
    }
    if f.domain() != Domain::Time || g.domain() != Domain::Time {
        return Err(Error::WrongDomain { expected: "time" });
    }
    let grid = f.grid();
    let freq = grid.half_reciprocal();
    let plans = forward_plans(grid);
    let counts = grid.count().to_vec();
    let dim = grid.dim();
    let scale: f64 = grid.spacing().iter().map(|d| 2.0 * d).product();
    let lag_total = grid.total();

    let rows: Vec<Vec<Complex64>> = (0..grid.total())
        .into_par_iter()
        .map(|n| {
            let n_mi = grid.multi_index(n);
            let mut r = vec![Complex64::new(0.0, 0.0); lag_total];
            'lag: for j in 0..lag_total {
                let j_mi = grid.multi_index(j);
                let mut p = 0usize;
                let mut q = 0usize;
                let mut parity = 0i64;
                for a in 0..dim {
                    let m = lag_of_index(j_mi[a], counts[a]);
                    let pa = n_mi[a] as isize + m;
                    let qa = n_mi[a] as isize - m;
                    if pa < 0 || pa >= counts[a] as isize || qa < 0 || qa >= counts[a] as isize {
                        continue 'lag;
                    }
                    p = p * counts[a] + pa as usize;
                    q = q * counts[a] + qa as usize;
                    parity += m as i64;
                }
                let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                r[j] = f.samples()[p] * g.samples()[q].conj() * sign;
            }
            for (axis, plan) in plans.iter().enumerate() {
                let ones = vec![Complex64::new(1.0, 0.0); counts[axis]];
                axis_pass(&mut r, &counts, axis, &ones, &ones, plan);
            }
            for v in &mut r {
                *v *= scale;
            }
            r
        })
        .collect();

    let values = rows.into_iter().flatten().collect();
    Ok(Distribution::new(grid.clone(), freq, values, "cross-wigner".into()))
}

/// Cohen's-class distribution of `f` for a catalog kernel.
///
/// Dispatch: unit kernel → auto cross-Wigner; time multiplier → cross-Wigner
/// of `f` against `f·conj(φ)`; Kirkwood-Rihaczek → closed form
/// `f(x)·conj(Ff(w))·e^{-2πi x·w}`; Page → delta-sifted lag form; tabulated →
/// generic quadrature over (z, v, y).
pub fn cctfd(f: &Signal, k: &Kernel) -> Result<Distribution> {
    admit(f)?;
    let d = match k {
        Kernel::Unit => cross_wigner(f, f)?,
        Kernel::TimeMultiplier(_) => {
            let g = conjugate_multiplier(k, f)?;
            cross_wigner(f, &g)?
        }
        Kernel::KirkwoodRihaczek => kirkwood_rihaczek(f)?,
        Kernel::Page => page(f)?,
        Kernel::Tabulated(_) => tabulated_quadrature(f, k)?,
    };
    Ok(d.with_tag(k.tag()))
}

fn kirkwood_rihaczek(f: &Signal) -> Result<Distribution> {
    let grid = f.grid();
    let freq = grid.half_reciprocal();
    // The spectrum is needed on the half-sample lattice, which is not the
    // reciprocal lattice; evaluate it directly.
    let spec = dft_onto(f, &freq)?;
    let ft = freq.total();
    let values: Vec<Complex64> = (0..grid.total())
        .into_par_iter()
        .flat_map_iter(|n| {
            let x = grid.node(n);
            let fx = f.samples()[n];
            let freq = &freq;
            let spec = &spec;
            (0..ft).map(move |kx| {
                let w = freq.node(kx);
                let dot: f64 = x.iter().zip(&w).map(|(a, b)| a * b).sum();
                fx * spec.samples()[kx].conj() * Complex64::from_polar(1.0, -2.0 * PI * dot)
            })
        })
        .collect();
    Ok(Distribution::new(grid.clone(), freq, values, "krd".into()))
}

/// Page distribution via the sifted form: the inner transform of the kernel
/// collapses to `δ(x - z - ‖y‖₁)`, moving both signal arguments to
/// `x - ‖y‖₁ ± y/2`. One-dimensional only: the shift is not an integer
/// number of nodes per axis otherwise.
fn page(f: &Signal) -> Result<Distribution> {
    let grid = f.grid();
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension { dim: grid.dim(), what: "page distribution" });
    }
    let m = grid.count()[0];
    let freq = grid.half_reciprocal();
    let plans = forward_plans(grid);
    let scale = 2.0 * grid.spacing()[0];
    let counts = [m];

    let rows: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|n| {
            let mut r = vec![Complex64::new(0.0, 0.0); m];
            for (j, rj) in r.iter_mut().enumerate() {
                let lag = lag_of_index(j, m);
                let base = n as isize - 2 * lag.abs();
                let i1 = base + lag;
                let i2 = base - lag;
                if i1 < 0 || i1 >= m as isize || i2 < 0 || i2 >= m as isize {
                    continue;
                }
                let sign = if lag.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                *rj = f.samples()[i1 as usize] * f.samples()[i2 as usize].conj() * sign;
            }
            let ones = vec![Complex64::new(1.0, 0.0); m];
            axis_pass(&mut r, &counts, 0, &ones, &ones, &plans[0]);
            for v in &mut r {
                *v *= scale;
            }
            r
        })
        .collect();

    let values = rows.into_iter().flatten().collect();
    Ok(Distribution::new(grid.clone(), freq, values, "page".into()))
}

/// Generic quadrature over the joint kernel: the kernel's partial transform
/// over v is taken on the reciprocal lattice of the time grid, then the
/// (z, y) double sum runs over grid nodes and even lags. Cubic cost, so the
/// grid is capped at [`TABULATED_NODE_LIMIT`] nodes per axis.
fn tabulated_quadrature(f: &Signal, k: &Kernel) -> Result<Distribution> {
    let grid = f.grid();
    if grid.dim() != 1 {
        return Err(Error::UnsupportedDimension { dim: grid.dim(), what: "tabulated quadrature" });
    }
    let m = grid.count()[0];
    if m > TABULATED_NODE_LIMIT {
        return Err(Error::ResolutionLimit { limit: TABULATED_NODE_LIMIT, got: m });
    }
    let dx = grid.spacing()[0];
    let freq = grid.half_reciprocal();
    let vgrid = grid.reciprocal();
    let dv = vgrid.spacing()[0];

    // Partial transform of the kernel over v: Φ(a, y) = Σ_l φ(v_l, y) e^{-2πi v_l a} Δv,
    // tabulated for every node shift a = sΔ and even lag y = 2·lag·Δ.
    let shifts = 2 * m - 1; // s ∈ [-(m-1), m-1]
    let mut phi_table = vec![Complex64::new(0.0, 0.0); shifts * m];
    for s in 0..shifts {
        let a = (s as isize - (m as isize - 1)) as f64 * dx;
        for j in 0..m {
            let lag = lag_of_index(j, m);
            let y = [2.0 * lag as f64 * dx];
            let mut acc = Complex64::new(0.0, 0.0);
            for l in 0..m {
                let v = vgrid.node(l);
                acc += kernel_value(k, &v, &y)?
                    * Complex64::from_polar(1.0, -2.0 * PI * v[0] * a);
            }
            phi_table[s * m + j] = acc * dv;
        }
    }

    let plans = forward_plans(grid);
    let counts = [m];
    let scale = 2.0 * dx;
    let rows: Vec<Vec<Complex64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut r = vec![Complex64::new(0.0, 0.0); m];
            for (jj, rj) in r.iter_mut().enumerate() {
                let lag = lag_of_index(jj, m);
                let mut acc = Complex64::new(0.0, 0.0);
                for z in 0..m as isize {
                    let p = z + lag;
                    let q = z - lag;
                    if p < 0 || p >= m as isize || q < 0 || q >= m as isize {
                        continue;
                    }
                    let s = (i as isize - z + m as isize - 1) as usize;
                    acc += f.samples()[p as usize]
                        * f.samples()[q as usize].conj()
                        * phi_table[s * m + jj];
                }
                let sign = if lag.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                *rj = acc * dx * sign;
            }
            let ones = vec![Complex64::new(1.0, 0.0); m];
            axis_pass(&mut r, &counts, 0, &ones, &ones, &plans[0]);
            for v in &mut r {
                *v *= scale;
            }
            r
        })
        .collect();

    let values = rows.into_iter().flatten().collect();
    Ok(Distribution::new(grid.clone(), freq, values, "tabulated".into()))
}

/// Signal on the same lattice extended to twice the node count per axis,
/// zero beyond the original block. Its reciprocal lattice is the half-sample
/// lattice spanning the full Nyquist window.
fn zero_pad_double(f: &Signal) -> Signal {
    let grid = f.grid();
    let padded = Grid::new(
        grid.origin().to_vec(),
        grid.spacing().to_vec(),
        grid.count().iter().map(|&m| 2 * m).collect(),
    )
    .expect("doubling counts keeps the grid valid");
    let mut samples = vec![Complex64::new(0.0, 0.0); padded.total()];
    for (i, &s) in f.samples().iter().enumerate() {
        samples[padded.flat_index(&grid.multi_index(i))] = s;
    }
    Signal::from_parts(padded, samples, Domain::Time, f.truncated())
}

/// Spectral-domain route for time-multiplier kernels:
/// `C(x,w) = 2^N e^{-4πi x·w} ∫ Ff(u)·conj(F(fφ̄)(2w-u))·e^{4πi u·x} du`,
/// evaluated as a correlation over the half-sample frequency lattice spanning
/// the full Nyquist window (zero-padded spectra), so the shifted argument
/// stays on-lattice and `2w - u` beyond the window contributes zero. Used to
/// cross-validate the lag-domain route.
pub fn cctfd_freq(f: &Signal, k: &Kernel) -> Result<Distribution> {
    let g = match k {
        Kernel::Unit | Kernel::TimeMultiplier(_) => conjugate_multiplier(k, f)?,
        _ => return Err(Error::NoTimeForm),
    };
    admit(f)?;
    let grid = f.grid();
    let dim = grid.dim();
    let freq_half = grid.half_reciprocal();
    let ff = fourier(&zero_pad_double(f))?;
    let fg = fourier(&zero_pad_double(&g))?;
    let ugrid = ff.grid().clone();
    let counts = grid.count().to_vec();

    // Per-axis tables: E_a[l][n] = e^{4πi u_l x_n}, P_a[n][k] = e^{-4πi x_n w_k}.
    let mut mix = Vec::with_capacity(dim);
    let mut pre = Vec::with_capacity(dim);
    for a in 0..dim {
        let ma = counts[a];
        let mut ea = vec![Complex64::new(0.0, 0.0); 2 * ma * ma];
        let mut pa = vec![Complex64::new(0.0, 0.0); ma * ma];
        for l in 0..2 * ma {
            let u = ugrid.axis_coord(a, l);
            for n in 0..ma {
                let x = grid.axis_coord(a, n);
                ea[l * ma + n] = Complex64::from_polar(1.0, 4.0 * PI * u * x);
            }
        }
        for n in 0..ma {
            let x = grid.axis_coord(a, n);
            for kk in 0..ma {
                let w = freq_half.axis_coord(a, kk);
                pa[n * ma + kk] = Complex64::from_polar(1.0, -4.0 * PI * x * w);
            }
        }
        mix.push(ea);
        pre.push(pa);
    }

    let du: f64 = ugrid.spacing().iter().product();
    let amp = 2f64.powi(dim as i32) * du;
    let ft = freq_half.total();

    let rows: Vec<Vec<Complex64>> = (0..grid.total())
        .into_par_iter()
        .map(|n| {
            let n_mi = grid.multi_index(n);
            let mut row = vec![Complex64::new(0.0, 0.0); ft];
            for (kflat, out) in row.iter_mut().enumerate() {
                let k_mi = freq_half.multi_index(kflat);
                let mut acc = Complex64::new(0.0, 0.0);
                'src: for l in 0..ugrid.total() {
                    let l_mi = ugrid.multi_index(l);
                    // index of 2w_k - u_l on the u lattice; outside → zero
                    let mut jflat = 0usize;
                    let mut phase = Complex64::new(1.0, 0.0);
                    for a in 0..dim {
                        let ma = counts[a];
                        let j = 2 * k_mi[a] as isize - l_mi[a] as isize + ma as isize;
                        if j < 0 || j >= 2 * ma as isize {
                            continue 'src;
                        }
                        jflat = jflat * 2 * ma + j as usize;
                        phase *= mix[a][l_mi[a] * ma + n_mi[a]];
                    }
                    acc += ff.samples()[l] * fg.samples()[jflat].conj() * phase;
                }
                let mut prefactor = Complex64::new(amp, 0.0);
                for a in 0..dim {
                    prefactor *= pre[a][n_mi[a] * counts[a] + k_mi[a]];
                }
                *out = acc * prefactor;
            }
            row
        })
        .collect();

    let values = rows.into_iter().flatten().collect();
    Ok(Distribution::new(grid.clone(), freq_half, values, format!("{}(spectral)", k.tag())))
}

/// Moyal residual `|<Cf, Cg> - |<f,g>|²| / (‖f‖²‖g‖²)` for unit-modulus
/// kernels.
pub fn moyal_residual(f: &Signal, g: &Signal, k: &Kernel) -> Result<f64> {
    if !classify(k, f.grid()).unit_modulus {
        return Err(Error::NotUnitModulus);
    }
    let cf = cctfd(f, k)?;
    let cg = cctfd(g, k)?;
    let lhs = cf.inner_product(&cg)?;
    let rhs = f.inner_product(g)?.norm_sqr();
    let denom = f.l2_norm().powi(2) * g.l2_norm().powi(2);
    if denom == 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok((lhs - Complex64::new(rhs, 0.0)).norm() / denom)
}

/// Peak-relative deviation between the lag-domain and spectral-domain routes.
pub fn engine_agreement(f: &Signal, k: &Kernel) -> Result<f64> {
    let a = cctfd(f, k)?;
    let b = cctfd_freq(f, k)?;
    let peak = a.max_abs();
    if peak == 0.0 {
        return Ok(0.0);
    }
    let max_dev = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    Ok(max_dev / peak)
}
