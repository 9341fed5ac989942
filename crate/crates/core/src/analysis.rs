//! Moments, spreads, covariances, and uncertainty products in the time,
//! frequency, and distribution domains, plus the conversion-identity
//! residuals connecting them.
//!
//! Covariances need a reference point in each domain. The time reference is
//! the measured center of |f|²; the frequency reference is the phase-gradient
//! value at that center, which is the chirp-family parameter for every
//! constructed extremal signal (and coincides with the measured spectral
//! center whenever the gradient is affine). Explicit `_about` variants accept
//! arbitrary reference points.

use crate::engine::Distribution;
use crate::error::{Error, Result};
use crate::grid::{Domain, Signal, VectorField, SUPPORT_MASK_LIMIT};
use crate::kernel::{conjugate_multiplier, Kernel};
use crate::spectral::fourier;
use serde::{Deserialize, Serialize};

/// Spectral edge magnitude (relative to peak) that only warrants a warning.
pub const SPECTRAL_EDGE_WARN: f64 = 1e-6;
/// Spectral edge magnitude above which frequency moments are refused.
pub const SPECTRAL_EDGE_ERROR: f64 = 1e-3;

/// First and second moments of |f|² along its own grid.
#[derive(Debug, Clone)]
pub struct TimeMoments {
    pub center: Vec<f64>,
    pub spread: f64,
}

/// First and second moments of |Ff|².
#[derive(Debug, Clone)]
pub struct FreqMoments {
    pub center: Vec<f64>,
    pub spread: f64,
}

/// Signal-domain moment bundle.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentReport {
    pub x0: Vec<f64>,
    pub w0: Vec<f64>,
    pub spread_x: f64,
    pub spread_w: f64,
    pub cov: f64,
    pub abs_cov: f64,
    pub product: f64,
}

/// Distribution-domain moment bundle under the weight |C|²/‖C‖².
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistMomentReport {
    #[serde(rename = "x0_C")]
    pub x0: Vec<f64>,
    #[serde(rename = "w0_C")]
    pub w0: Vec<f64>,
    #[serde(rename = "spread_x_C")]
    pub spread_x: f64,
    #[serde(rename = "spread_w_C")]
    pub spread_w: f64,
    #[serde(rename = "product_C")]
    pub product: f64,
}

/// Relative residuals of the three spread/product conversion identities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConversionResiduals {
    pub spread_time: f64,
    pub spread_freq: f64,
    pub product: f64,
}

fn weighted_moments(signal: &Signal) -> Result<(Vec<f64>, f64)> {
    let grid = signal.grid();
    let w = grid.weight();
    let mut mass = 0.0;
    let mut first = vec![0.0; grid.dim()];
    for (i, s) in signal.samples().iter().enumerate() {
        let p = s.norm_sqr() * w;
        if p == 0.0 {
            continue;
        }
        mass += p;
        for (a, x) in grid.node(i).iter().enumerate() {
            first[a] += x * p;
        }
    }
    if mass <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    for c in &mut first {
        *c /= mass;
    }
    Ok((first, mass))
}

fn second_moment_about(signal: &Signal, center: &[f64]) -> Result<f64> {
    let grid = signal.grid();
    let w = grid.weight();
    let mut mass = 0.0;
    let mut acc = 0.0;
    for (i, s) in signal.samples().iter().enumerate() {
        let p = s.norm_sqr() * w;
        if p == 0.0 {
            continue;
        }
        mass += p;
        let r2: f64 = grid.node(i).iter().zip(center).map(|(x, c)| (x - c) * (x - c)).sum();
        acc += r2 * p;
    }
    if mass <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(acc / mass)
}

/// Center and spread of |f|² on the time grid.
pub fn time_moments(f: &Signal) -> Result<TimeMoments> {
    if f.domain() != Domain::Time {
        return Err(Error::WrongDomain { expected: "time" });
    }
    let (center, _) = weighted_moments(f)?;
    let spread = second_moment_about(f, &center)?;
    Ok(TimeMoments { center, spread })
}

/// Second moment of |f|² about an explicit center.
pub fn time_spread_about(f: &Signal, center: &[f64]) -> Result<f64> {
    second_moment_about(f, center)
}

/// |Ff| at an arbitrary (possibly off-lattice) frequency point, by direct
/// quadrature. Off-lattice probes near the edge expose leakage that the
/// lattice itself cannot see (the transform of a truncated constant is an
/// exact lattice delta, but half a bin away its tails are plain).
fn spectrum_probe(f: &Signal, point: &[f64]) -> f64 {
    let grid = f.grid();
    let mut acc = num_complex::Complex64::new(0.0, 0.0);
    for (i, s) in f.samples().iter().enumerate() {
        let dot: f64 = grid.node(i).iter().zip(point).map(|(x, u)| x * u).sum();
        acc += s * num_complex::Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * dot);
    }
    acc.norm() * grid.weight()
}

fn spectrum_guarded(f: &Signal) -> Result<Signal> {
    let spec = fourier(f)?;
    let peak = spec.max_abs();
    if peak > 0.0 {
        let fg = spec.grid();
        let mut edge = spec.boundary_ratio() * peak;
        for a in 0..fg.dim() {
            let lo = fg.origin()[a] + 0.5 * fg.spacing()[a];
            let hi = fg.axis_coord(a, fg.count()[a] - 1) - 0.5 * fg.spacing()[a];
            for u in [lo, hi] {
                let mut point = vec![0.0; fg.dim()];
                point[a] = u;
                edge = edge.max(spectrum_probe(f, &point));
            }
        }
        let ratio = edge / peak;
        if ratio > SPECTRAL_EDGE_ERROR {
            return Err(Error::SpectralTruncation { ratio, limit: SPECTRAL_EDGE_ERROR });
        }
    }
    Ok(spec)
}

/// Center and spread of |Ff|²; refuses signals whose spectrum has not decayed
/// at the frequency-grid edge.
pub fn freq_moments(f: &Signal) -> Result<FreqMoments> {
    let spec = spectrum_guarded(f)?;
    let (center, _) = weighted_moments(&spec)?;
    let spread = second_moment_about(&spec, &center)?;
    Ok(FreqMoments { center, spread })
}

/// Second moment of |Ff|² about an explicit frequency center.
pub fn freq_spread_about(f: &Signal, center: &[f64]) -> Result<f64> {
    let spec = spectrum_guarded(f)?;
    second_moment_about(&spec, center)
}

/// `Δx²·Δw²` with both spreads about their measured centers.
pub fn uncertainty_product_fourier(f: &Signal) -> Result<f64> {
    Ok(time_moments(f)?.spread * freq_moments(f)?.spread)
}

/// `Δx²·Δw²` with both spreads about explicit reference points.
pub fn uncertainty_product_about(f: &Signal, x0: &[f64], w0: &[f64]) -> Result<f64> {
    Ok(time_spread_about(f, x0)? * freq_spread_about(f, w0)?)
}

fn support_mask(f: &Signal) -> (Vec<bool>, f64) {
    let peak = f.max_abs();
    let cut = SUPPORT_MASK_LIMIT * peak;
    (f.samples().iter().map(|s| s.norm() > cut).collect(), peak)
}

fn covariance_kernel(
    f: &Signal,
    grad: &VectorField,
    x0: &[f64],
    w0: &[f64],
    absolute: bool,
) -> Result<f64> {
    if f.grid() != grad.grid() {
        return Err(Error::IncompatibleGrids);
    }
    let grid = f.grid();
    let w = grid.weight();
    let (mask, _) = support_mask(f);
    let mut mass = 0.0;
    let mut acc = 0.0;
    for (i, s) in f.samples().iter().enumerate() {
        let p = s.norm_sqr() * w;
        mass += p;
        if !mask[i] {
            continue;
        }
        let node = grid.node(i);
        for a in 0..grid.dim() {
            let ga = grad.component(i, a);
            if !ga.is_finite() {
                return Err(Error::NonFiniteGradient { index: i });
            }
            let dx = node[a] - x0[a];
            let dw = ga - w0[a];
            acc += if absolute { dx.abs() * dw.abs() * p } else { dx * dw * p };
        }
    }
    if mass <= 0.0 {
        return Err(Error::ZeroNorm);
    }
    Ok(acc / mass)
}

/// Reference points for the covariances: measured time center, and the phase
/// gradient interpolated at that center.
pub fn covariance_centers(f: &Signal, grad: &VectorField) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x0, _) = weighted_moments(f)?;
    let w0 = grad.value_at(&x0);
    Ok((x0, w0))
}

/// Signed covariance between position offset and phase-gradient offset,
/// weighted by |f|².
pub fn covariance(f: &Signal, grad: &VectorField) -> Result<f64> {
    let (x0, w0) = covariance_centers(f, grad)?;
    covariance_kernel(f, grad, &x0, &w0, false)
}

pub fn covariance_about(f: &Signal, grad: &VectorField, x0: &[f64], w0: &[f64]) -> Result<f64> {
    covariance_kernel(f, grad, x0, w0, false)
}

/// Element-wise absolute covariance; always at least |covariance|.
pub fn abs_covariance(f: &Signal, grad: &VectorField) -> Result<f64> {
    let (x0, w0) = covariance_centers(f, grad)?;
    covariance_kernel(f, grad, &x0, &w0, true)
}

pub fn abs_covariance_about(f: &Signal, grad: &VectorField, x0: &[f64], w0: &[f64]) -> Result<f64> {
    covariance_kernel(f, grad, x0, w0, true)
}

/// Bundle of all signal-domain moment quantities.
pub fn moment_report(f: &Signal, grad: &VectorField) -> Result<MomentReport> {
    let tm = time_moments(f)?;
    let fm = freq_moments(f)?;
    let cov = covariance(f, grad)?;
    let abs_cov = abs_covariance(f, grad)?;
    Ok(MomentReport {
        x0: tm.center,
        w0: fm.center,
        spread_x: tm.spread,
        spread_w: fm.spread,
        cov,
        abs_cov,
        product: tm.spread * fm.spread,
    })
}

/// Centers, spreads, and uncertainty product of a distribution under the
/// weight |C(x,w)|²/‖C‖².
pub fn distribution_moments(d: &Distribution) -> Result<DistMomentReport> {
    let cell = d.weight();
    let tg = d.time_grid();
    let fg = d.freq_grid();
    let ft = fg.total();
    let mut mass = 0.0;
    let mut x_first = vec![0.0; tg.dim()];
    let mut w_first = vec![0.0; fg.dim()];
    for (idx, v) in d.values().iter().enumerate() {
        let p = v.norm_sqr() * cell;
        if p == 0.0 {
            continue;
        }
        mass += p;
        let n = idx / ft;
        let k = idx % ft;
        for (a, x) in tg.node(n).iter().enumerate() {
            x_first[a] += x * p;
        }
        for (a, w) in fg.node(k).iter().enumerate() {
            w_first[a] += w * p;
        }
    }
    if mass <= 0.0 {
        return Err(Error::ZeroDistribution);
    }
    for c in x_first.iter_mut().chain(w_first.iter_mut()) {
        *c /= mass;
    }
    let mut sx = 0.0;
    let mut sw = 0.0;
    for (idx, v) in d.values().iter().enumerate() {
        let p = v.norm_sqr() * cell;
        if p == 0.0 {
            continue;
        }
        let n = idx / ft;
        let k = idx % ft;
        let rx: f64 =
            tg.node(n).iter().zip(&x_first).map(|(x, c)| (x - c) * (x - c)).sum();
        let rw: f64 =
            fg.node(k).iter().zip(&w_first).map(|(w, c)| (w - c) * (w - c)).sum();
        sx += rx * p;
        sw += rw * p;
    }
    sx /= mass;
    sw /= mass;
    Ok(DistMomentReport {
        x0: x_first,
        w0: w_first,
        spread_x: sx,
        spread_w: sw,
        product: sx * sw,
    })
}

/// Relative residuals of the three identities tying distribution-domain
/// spreads to signal-domain spreads for time-multiplier kernels:
/// `Δx²_C = Δx²_f/2`, `Δw²_C = (Δw²_f + Δw²_{fφ̄})/4`, and
/// `P_C = (P_f + P_{fφ̄})/8`.
pub fn conversion_identities(f: &Signal, k: &Kernel) -> Result<ConversionResiduals> {
    let fphi = conjugate_multiplier(k, f)?;
    let d = crate::engine::cctfd(f, k)?;
    let dm = distribution_moments(&d)?;

    let tm = time_moments(f)?;
    let fm = freq_moments(f)?;
    let fm_phi = freq_moments(&fphi)?;
    let tm_phi = time_moments(&fphi)?;

    let rhs_x = tm.spread / 2.0;
    let rhs_w = (fm.spread + fm_phi.spread) / 4.0;
    let rhs_p = (tm.spread * fm.spread + tm_phi.spread * fm_phi.spread) / 8.0;

    Ok(ConversionResiduals {
        spread_time: (dm.spread_x - rhs_x).abs() / rhs_x,
        spread_freq: (dm.spread_w - rhs_w).abs() / rhs_w,
        product: (dm.product - rhs_p).abs() / rhs_p,
    })
}

/// Fallback phase gradient: centered finite differences of the unwrapped
/// sample phase along each axis, masked where |f| is below the support
/// threshold.
pub fn phase_gradient_fd(f: &Signal) -> Result<VectorField> {
    let grid = f.grid();
    let dim = grid.dim();
    let total = grid.total();
    let (mask, _) = support_mask(f);
    let mut components = vec![0.0f64; total * dim];

    for axis in 0..dim {
        let m = grid.count()[axis];
        let inner: usize = grid.count()[axis + 1..].iter().product();
        let outer: usize = grid.count()[..axis].iter().product();
        let step = grid.spacing()[axis];
        let mut line_phase = vec![0.0f64; m];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * m * inner + i;
                // unwrap the phase along the line
                let mut prev = 0.0;
                for j in 0..m {
                    let raw = f.samples()[base + j * inner].arg();
                    if j == 0 {
                        line_phase[0] = raw;
                        prev = raw;
                    } else {
                        let mut d = raw - prev.rem_euclid(2.0 * std::f64::consts::PI);
                        while d > std::f64::consts::PI {
                            d -= 2.0 * std::f64::consts::PI;
                        }
                        while d < -std::f64::consts::PI {
                            d += 2.0 * std::f64::consts::PI;
                        }
                        line_phase[j] = line_phase[j - 1] + d;
                        prev = line_phase[j];
                    }
                }
                for j in 0..m {
                    let node = base + j * inner;
                    if !mask[node] {
                        continue;
                    }
                    let g = if j == 0 {
                        (line_phase[1] - line_phase[0]) / step
                    } else if j == m - 1 {
                        (line_phase[m - 1] - line_phase[m - 2]) / step
                    } else {
                        (line_phase[j + 1] - line_phase[j - 1]) / (2.0 * step)
                    };
                    // the samples carry e^{2πiφ}: convert radians to cycles
                    components[node * dim + axis] = g / (2.0 * std::f64::consts::PI);
                }
            }
        }
    }
    VectorField::new(grid.clone(), components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chirp::{optimal_chirp, optimal_gaussian, ChirpSpec};
    use crate::engine::cctfd;
    use crate::grid::Grid;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::line(-8.0, 8.0, 256).unwrap()
    }

    fn gaussian(g: &Grid) -> Signal {
        Signal::sample(g, Domain::Time, |x| Complex64::new((-PI * x[0] * x[0]).exp(), 0.0))
            .unwrap()
    }

    fn chirp(g: &Grid, c: f64) -> Signal {
        Signal::sample(g, Domain::Time, |x| {
            Complex64::from_polar((-PI * x[0] * x[0]).exp(), PI * c * x[0] * x[0])
        })
        .unwrap()
    }

    #[test]
    fn gaussian_time_moments() {
        // Δx² of e^{-x²/(2ζ)} is ζ/2; here ζ = 1/(2π)
        let tm = time_moments(&gaussian(&grid())).unwrap();
        assert_abs_diff_eq!(tm.center[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(tm.spread, 1.0 / (4.0 * PI), max_relative = 1e-4);
    }

    #[test]
    fn time_moments_shift_and_scale() {
        let g = grid();
        let shifted = Signal::sample(&g, Domain::Time, |x| {
            Complex64::new((-PI * (x[0] - 1.5) * (x[0] - 1.5)).exp(), 0.0)
        })
        .unwrap();
        let tm0 = time_moments(&gaussian(&g)).unwrap();
        let tm1 = time_moments(&shifted).unwrap();
        assert_abs_diff_eq!(tm1.center[0], 1.5, epsilon = 1e-9);
        assert_abs_diff_eq!(tm1.spread, tm0.spread, epsilon = 1e-9);

        let s = 2.0;
        let dilated = Signal::sample(&g, Domain::Time, |x| {
            Complex64::new((-PI * (x[0] / s) * (x[0] / s)).exp(), 0.0)
        })
        .unwrap();
        let tm2 = time_moments(&dilated).unwrap();
        assert_relative_eq!(tm2.spread, s * s * tm0.spread, max_relative = 1e-4);
    }

    #[test]
    fn zero_signal_has_no_moments() {
        let z = Signal::zero(&grid(), Domain::Time);
        assert!(matches!(time_moments(&z), Err(Error::ZeroNorm)));
    }

    #[test]
    fn gaussian_freq_moments() {
        // Δw² of the ζ-Gaussian is 1/(8π²ζ); ζ = 1/(2π) gives 1/(4π)
        let fm = freq_moments(&gaussian(&grid())).unwrap();
        assert_abs_diff_eq!(fm.center[0], 0.0, epsilon = 1e-10);
        assert_relative_eq!(fm.spread, 1.0 / (4.0 * PI), max_relative = 1e-4);
    }

    #[test]
    fn chirp_freq_spread() {
        // Δw² = (1+c²)/(4π) via the |f′|² route
        let fm = freq_moments(&chirp(&grid(), 1.0)).unwrap();
        assert_relative_eq!(fm.spread, 2.0 / (4.0 * PI), max_relative = 1e-3);
    }

    #[test]
    fn modulation_shifts_the_spectral_center() {
        let g = grid();
        let f = Signal::sample(&g, Domain::Time, |x| {
            Complex64::from_polar((-PI * x[0] * x[0]).exp(), 2.0 * PI * 0.8 * x[0])
        })
        .unwrap();
        let fm = freq_moments(&f).unwrap();
        assert_abs_diff_eq!(fm.center[0], 0.8, epsilon = 1e-6);
    }

    #[test]
    fn truncated_spectrum_is_refused() {
        let g = grid();
        let c = Signal::sample(&g, Domain::Time, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(matches!(freq_moments(&c), Err(Error::SpectralTruncation { .. })));
    }

    #[test]
    fn gaussian_product_is_scale_invariant() {
        let g = Grid::line(-16.0, 16.0, 512).unwrap();
        for zeta in [1.0 / (2.0 * PI), 1.0, 4.0] {
            let f = optimal_gaussian(zeta, &[0.0], 0.0, &g).unwrap();
            let p = uncertainty_product_fourier(&f).unwrap();
            assert_relative_eq!(p, 1.0 / (16.0 * PI * PI), max_relative = 1e-3);
        }
    }

    #[test]
    fn chirp_product_attains_the_covariance_bound() {
        let p = uncertainty_product_fourier(&chirp(&grid(), 1.0)).unwrap();
        assert_relative_eq!(p, 2.0 / (16.0 * PI * PI), max_relative = 1e-3);
    }

    #[test]
    fn covariance_of_real_signal_vanishes() {
        let g = grid();
        let f = gaussian(&g);
        let zero = VectorField::zero(&g);
        assert_abs_diff_eq!(covariance(&f, &zero).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(abs_covariance(&f, &zero).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn chirp_covariance_values() {
        let g = grid();
        let spec = ChirpSpec::one_dim(1.0 / (2.0 * PI), 1.0, 1);
        let (f, grad) = optimal_chirp(&spec, &g).unwrap();
        // Cov = c·Δx² with c = 1/ε = 1
        assert_relative_eq!(
            covariance(&f, &grad).unwrap(),
            1.0 / (4.0 * PI),
            max_relative = 1e-4
        );
        assert_relative_eq!(
            abs_covariance(&f, &grad).unwrap(),
            1.0 / (4.0 * PI),
            max_relative = 1e-4
        );
    }

    #[test]
    fn kinked_chirp_covariances() {
        let g = grid();
        let spec = ChirpSpec::one_dim(1.0 / (2.0 * PI), 1.0, 3);
        let (f, grad) = optimal_chirp(&spec, &g).unwrap();
        let cov = covariance(&f, &grad).unwrap();
        let abs = abs_covariance(&f, &grad).unwrap();
        assert_abs_diff_eq!(cov, 0.0, epsilon = 1e-6);
        assert_relative_eq!(abs, 1.0 / (4.0 * PI), max_relative = 1e-4);
        assert!(abs >= cov.abs() - 1e-9);
    }

    #[test]
    fn distribution_moments_of_the_gaussian_wigner() {
        let g = grid();
        let d = cctfd(&gaussian(&g), &Kernel::Unit).unwrap();
        let dm = distribution_moments(&d).unwrap();
        assert_abs_diff_eq!(dm.x0[0], 0.0, epsilon = 1e-4);
        assert_relative_eq!(dm.spread_x, 1.0 / (8.0 * PI), max_relative = 1e-3);
        assert_relative_eq!(dm.spread_w, 1.0 / (8.0 * PI), max_relative = 1e-3);
    }

    #[test]
    fn distribution_weights_sum_to_one() {
        let g = grid();
        let d = cctfd(&chirp(&g, 1.0), &Kernel::Unit).unwrap();
        let norm2 = d.l2_norm().powi(2);
        let total: f64 = d.values().iter().map(|v| v.norm_sqr() * d.weight()).sum();
        assert_relative_eq!(total / norm2, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn zero_distribution_is_refused() {
        let g = grid();
        let z = Signal::zero(&g, Domain::Time);
        let d = crate::engine::cross_wigner(&z, &z).unwrap();
        assert!(matches!(distribution_moments(&d), Err(Error::ZeroDistribution)));
    }

    #[test]
    fn conversion_identities_hold_for_the_catalog() {
        let g = grid();
        let signals = [gaussian(&g), chirp(&g, 1.0)];
        let kernels = [Kernel::Unit, Kernel::quadratic_chirp(2.0)];
        for f in &signals {
            for k in &kernels {
                let r = conversion_identities(f, k).unwrap();
                assert!(
                    r.spread_time <= 1e-3 && r.spread_freq <= 1e-3 && r.product <= 1e-3,
                    "kernel {} residuals {r:?}",
                    k.tag()
                );
            }
        }
    }

    #[test]
    fn multiplied_gaussian_freq_spread_value() {
        // spread of gauss·conj(rate-2 multiplier): (1 + 2²)/(4π)
        let g = grid();
        let fphi = conjugate_multiplier(&Kernel::quadratic_chirp(2.0), &gaussian(&g)).unwrap();
        let fm = freq_moments(&fphi).unwrap();
        assert_relative_eq!(fm.spread, 5.0 / (4.0 * PI), max_relative = 1e-3);
    }

    #[test]
    fn conversion_product_value_for_chirp_and_chirp_kernel() {
        // measured distribution product for (c = 1 chirp, rate-2 kernel)
        let g = grid();
        let f = chirp(&g, 1.0);
        let d = cctfd(&f, &Kernel::quadratic_chirp(2.0)).unwrap();
        let dm = distribution_moments(&d).unwrap();
        assert_relative_eq!(dm.product, 1.0 / (32.0 * PI * PI), max_relative = 1e-3);
    }

    #[test]
    fn time_spread_is_unchanged_by_unit_modulus_multipliers() {
        let g = grid();
        let f = chirp(&g, 1.0);
        let fphi = conjugate_multiplier(&Kernel::quadratic_chirp(2.0), &f).unwrap();
        let a = time_moments(&f).unwrap().spread;
        let b = time_moments(&fphi).unwrap().spread;
        assert_relative_eq!(a, b, max_relative = 1e-9);
        // hence both cross products in the conversion identity agree
        let pw = freq_moments(&fphi).unwrap().spread;
        assert_relative_eq!(a * pw, b * pw, max_relative = 1e-9);
    }

    #[test]
    fn conversion_identities_are_shift_and_modulation_stable() {
        let g = grid();
        let base = chirp(&g, 1.0);
        let shifted = Signal::sample(&g, Domain::Time, |x| {
            let t = x[0] - 0.75;
            Complex64::from_polar((-PI * t * t).exp(), PI * t * t)
        })
        .unwrap();
        let modulated = base.map(|i, s| {
            let x = g.node(i)[0];
            s * Complex64::from_polar(1.0, 2.0 * PI * 0.6 * x)
        });
        let k = Kernel::quadratic_chirp(2.0);
        let r0 = conversion_identities(&base, &k).unwrap();
        let r1 = conversion_identities(&shifted, &k).unwrap();
        let r2 = conversion_identities(&modulated, &k).unwrap();
        for (a, b) in [(&r0, &r1), (&r0, &r2)] {
            assert!(b.spread_time <= (2.0 * a.spread_time).max(1e-6));
            assert!(b.spread_freq <= (2.0 * a.spread_freq).max(1e-6));
            assert!(b.product <= (2.0 * a.product).max(1e-6));
        }
    }

    #[test]
    fn fd_gradient_matches_analytic_branches() {
        // fine grid so the kink node's one-off stencil error stays inside the
        // peak-relative budget
        let g = Grid::line(-8.0, 8.0, 8192).unwrap();
        for branch in [1usize, 3] {
            let spec = ChirpSpec::one_dim(1.0 / (2.0 * PI), 1.0, branch);
            let (f, grad) = optimal_chirp(&spec, &g).unwrap();
            let fd = phase_gradient_fd(&f).unwrap();
            let peak = f.max_abs();
            let scale = (0..g.total())
                .filter(|&i| f.samples()[i].norm() > 1e-6 * peak)
                .map(|i| grad.component(i, 0).abs())
                .fold(0.0, f64::max);
            let mut max_dev = 0.0f64;
            for i in 0..g.total() {
                if f.samples()[i].norm() <= 1e-6 * peak {
                    continue;
                }
                max_dev = max_dev.max((fd.component(i, 0) - grad.component(i, 0)).abs());
            }
            assert!(
                max_dev <= 1e-3 * scale,
                "branch {branch}: fd deviation {max_dev} vs scale {scale}"
            );
        }
    }

    #[test]
    fn off_node_kink_still_matches_fd() {
        let g = Grid::line(-8.0, 8.0, 8192).unwrap();
        let mut spec = ChirpSpec::one_dim(1.0 / (2.0 * PI), 1.0, 3);
        spec.x0 = vec![0.37];
        let (f, grad) = optimal_chirp(&spec, &g).unwrap();
        let fd = phase_gradient_fd(&f).unwrap();
        let peak = f.max_abs();
        let mut max_dev = 0.0f64;
        for i in 0..g.total() {
            if f.samples()[i].norm() <= 1e-6 * peak {
                continue;
            }
            max_dev = max_dev.max((fd.component(i, 0) - grad.component(i, 0)).abs());
        }
        let scale = 3.0; // |grad| reaches ≈ x-range of the support
        assert!(max_dev <= 1e-3 * scale, "fd deviation {max_dev}");
    }
}
