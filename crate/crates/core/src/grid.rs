//! Sampling lattices, complex sampled signals, and the inner-product/norm
//! primitives every other module consumes.
//!
//! Storage is dimension-generic: samples live in a flat row-major array
//! (last axis fastest) over a uniform lattice. Everything is immutable after
//! construction and safe to share across threads.

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Relative magnitude at the outermost grid layer above which a signal is
/// flagged as truncated.
pub const BOUNDARY_DECAY_LIMIT: f64 = 1e-6;

/// Mask threshold for "signal support": nodes with |f| below this fraction of
/// the peak are ignored by phase-sensitive estimators.
pub const SUPPORT_MASK_LIMIT: f64 = 1e-12;

/// Uniform sampling lattice: node `k` sits at `origin + k ∘ spacing`
/// (component-wise), `k` a multi-index with `0 <= k_a < count_a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    origin: Vec<f64>,
    spacing: Vec<f64>,
    count: Vec<usize>,
}

impl Grid {
    /// Build a lattice whose nodes tile `[origin, origin + count ∘ spacing)`.
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, count: Vec<usize>) -> Result<Self> {
        if origin.is_empty() || origin.len() != spacing.len() || origin.len() != count.len() {
            return Err(Error::InvalidGrid(format!(
                "axis data must be non-empty and consistent (origin {}, spacing {}, count {})",
                origin.len(),
                spacing.len(),
                count.len()
            )));
        }
        for (a, (&s, &c)) in spacing.iter().zip(&count).enumerate() {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidGrid(format!("spacing on axis {a} must be positive, got {s}")));
            }
            if c < 2 {
                return Err(Error::InvalidGrid(format!("count on axis {a} must be at least 2, got {c}")));
            }
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { origin, spacing, count })
    }

    /// One-dimensional lattice of `count` nodes covering `[lo, hi)`.
    pub fn line(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if !(hi > lo) {
            return Err(Error::InvalidGrid(format!("span [{lo}, {hi}) is empty")));
        }
        let spacing = (hi - lo) / count as f64;
        Self::new(vec![lo], vec![spacing], vec![count])
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    /// Total number of lattice nodes.
    pub fn total(&self) -> usize {
        self.count.iter().product()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn count(&self) -> &[usize] {
        &self.count
    }

    /// Quadrature weight of one node: the product of spacings.
    pub fn weight(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn axis_coord(&self, axis: usize, index: usize) -> f64 {
        self.origin[axis] + index as f64 * self.spacing[axis]
    }

    /// Row-major decomposition of a flat index (last axis fastest).
    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut mi = vec![0usize; self.dim()];
        for a in (0..self.dim()).rev() {
            mi[a] = flat % self.count[a];
            flat /= self.count[a];
        }
        mi
    }

    pub fn flat_index(&self, mi: &[usize]) -> usize {
        mi.iter().zip(&self.count).fold(0, |acc, (&i, &m)| acc * m + i)
    }

    /// Coordinates of the node at a flat index.
    pub fn node(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(a, &i)| self.axis_coord(a, i))
            .collect()
    }

    /// True when the node touches the outermost layer on any axis.
    pub fn is_boundary(&self, flat: usize) -> bool {
        self.multi_index(flat)
            .iter()
            .zip(&self.count)
            .any(|(&i, &m)| i == 0 || i + 1 == m)
    }

    /// Reciprocal lattice centered at zero: per-axis spacing `1/(count·spacing)`.
    pub fn reciprocal(&self) -> Grid {
        let spacing: Vec<f64> = self
            .spacing
            .iter()
            .zip(&self.count)
            .map(|(&d, &m)| 1.0 / (m as f64 * d))
            .collect();
        let origin: Vec<f64> = spacing
            .iter()
            .zip(&self.count)
            .map(|(&du, &m)| -((m / 2) as f64) * du)
            .collect();
        Grid { origin, spacing, count: self.count.clone() }
    }

    /// Half-sample frequency lattice paired with distributions over this time
    /// grid: per-axis spacing `1/(2·count·spacing)`, centered at zero.
    pub fn half_reciprocal(&self) -> Grid {
        let spacing: Vec<f64> = self
            .spacing
            .iter()
            .zip(&self.count)
            .map(|(&d, &m)| 1.0 / (2.0 * m as f64 * d))
            .collect();
        let origin: Vec<f64> = spacing
            .iter()
            .zip(&self.count)
            .map(|(&dw, &m)| -((m / 2) as f64) * dw)
            .collect();
        Grid { origin, spacing, count: self.count.clone() }
    }
}

/// Which axis a signal's samples are indexed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    Time,
    Frequency,
}

impl std::fmt::Display for Domain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Domain::Time => write!(f, "time"),
            Domain::Frequency => write!(f, "frequency"),
        }
    }
}

/// Complex samples on a [`Grid`]; the discrete stand-in for a square
/// integrable function.
#[derive(Debug, Clone)]
pub struct Signal {
    grid: Grid,
    samples: Vec<Complex64>,
    domain: Domain,
    truncated: bool,
}

impl Signal {
    /// Wrap samples, checking length and finiteness and evaluating the
    /// boundary-decay flag.
    pub fn new(grid: Grid, samples: Vec<Complex64>, domain: Domain) -> Result<Self> {
        if samples.len() != grid.total() {
            return Err(Error::InvalidGrid(format!(
                "sample count {} does not match grid total {}",
                samples.len(),
                grid.total()
            )));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.re.is_finite() && s.im.is_finite()) {
                return Err(Error::NonFiniteSample { index: i, coords: grid.node(i) });
            }
        }
        let truncated = boundary_ratio(&grid, &samples) > BOUNDARY_DECAY_LIMIT;
        Ok(Self { grid, samples, domain, truncated })
    }

    /// Evaluate a closed-form function on every grid node.
    pub fn sample<F>(grid: &Grid, domain: Domain, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64,
    {
        let mut samples = Vec::with_capacity(grid.total());
        for i in 0..grid.total() {
            let coords = grid.node(i);
            let v = f(&coords);
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFiniteSample { index: i, coords });
            }
            samples.push(v);
        }
        Self::new(grid.clone(), samples, domain)
    }

    pub fn zero(grid: &Grid, domain: Domain) -> Self {
        Self {
            grid: grid.clone(),
            samples: vec![Complex64::new(0.0, 0.0); grid.total()],
            domain,
            truncated: false,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// True when the signal does not decay at the grid boundary and numeric
    /// results may be polluted by truncation.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Largest boundary magnitude relative to the global peak (0 for the zero
    /// signal).
    pub fn boundary_ratio(&self) -> f64 {
        boundary_ratio(&self.grid, &self.samples)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.norm()).fold(0.0, f64::max)
    }

    /// Pointwise map onto the same grid; the warning flag is re-evaluated and
    /// OR-ed with the input's.
    pub fn map<F>(&self, f: F) -> Signal
    where
        F: Fn(usize, Complex64) -> Complex64,
    {
        let samples: Vec<Complex64> =
            self.samples.iter().enumerate().map(|(i, &s)| f(i, s)).collect();
        let truncated =
            self.truncated || boundary_ratio(&self.grid, &samples) > BOUNDARY_DECAY_LIMIT;
        Signal { grid: self.grid.clone(), samples, domain: self.domain, truncated }
    }

    pub(crate) fn from_parts(
        grid: Grid,
        samples: Vec<Complex64>,
        domain: Domain,
        carry_warning: bool,
    ) -> Signal {
        let truncated = carry_warning || boundary_ratio(&grid, &samples) > BOUNDARY_DECAY_LIMIT;
        Signal { grid, samples, domain, truncated }
    }

    /// Riemann-sum quadrature of `∫ f(z) conj(g(z)) dz` with uniform weight.
    pub fn inner_product(&self, other: &Signal) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::IncompatibleGrids);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.samples.iter().zip(&other.samples) {
            acc += a * b.conj();
        }
        Ok(acc * self.grid.weight())
    }

    /// `sqrt(<f, f>)`.
    pub fn l2_norm(&self) -> f64 {
        let sq: f64 = self.samples.iter().map(|s| s.norm_sqr()).sum();
        (sq * self.grid.weight()).sqrt()
    }
}

fn boundary_ratio(grid: &Grid, samples: &[Complex64]) -> f64 {
    let peak = samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let mut edge = 0.0f64;
    for (i, s) in samples.iter().enumerate() {
        if grid.is_boundary(i) {
            edge = edge.max(s.norm());
        }
    }
    edge / peak
}

/// Real vector field on a grid (one value per node and axis), used for
/// analytic phase gradients.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Grid,
    components: Vec<f64>, // node-major: [node * dim + axis]
}

impl VectorField {
    pub fn new(grid: Grid, components: Vec<f64>) -> Result<Self> {
        if components.len() != grid.total() * grid.dim() {
            return Err(Error::InvalidGrid(format!(
                "field length {} does not match grid total {} x dim {}",
                components.len(),
                grid.total(),
                grid.dim()
            )));
        }
        Ok(Self { grid, components })
    }

    pub fn from_fn<F>(grid: &Grid, f: F) -> Self
    where
        F: Fn(&[f64]) -> Vec<f64>,
    {
        let dim = grid.dim();
        let mut components = Vec::with_capacity(grid.total() * dim);
        for i in 0..grid.total() {
            let v = f(&grid.node(i));
            debug_assert_eq!(v.len(), dim);
            components.extend_from_slice(&v);
        }
        Self { grid: grid.clone(), components }
    }

    pub fn zero(grid: &Grid) -> Self {
        Self { grid: grid.clone(), components: vec![0.0; grid.total() * grid.dim()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn at(&self, node: usize) -> &[f64] {
        let d = self.grid.dim();
        &self.components[node * d..(node + 1) * d]
    }

    pub fn component(&self, node: usize, axis: usize) -> f64 {
        self.components[node * self.grid.dim() + axis]
    }

    /// Component-wise difference, e.g. the phase gradient of `f·conj(φ)` from
    /// the gradients of `f` and `φ`.
    pub fn sub(&self, other: &VectorField) -> Result<VectorField> {
        if self.grid != other.grid {
            return Err(Error::IncompatibleGrids);
        }
        let components =
            self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect();
        Ok(VectorField { grid: self.grid.clone(), components })
    }

    /// Multilinear interpolation of the field at an arbitrary point (clamped
    /// to the lattice hull).
    pub fn value_at(&self, point: &[f64]) -> Vec<f64> {
        let dim = self.grid.dim();
        assert_eq!(point.len(), dim);
        // Locate the cell and fractional offset per axis.
        let mut base = vec![0usize; dim];
        let mut frac = vec![0.0f64; dim];
        for a in 0..dim {
            let t = (point[a] - self.grid.origin()[a]) / self.grid.spacing()[a];
            let max_cell = self.grid.count()[a] - 2;
            let i = t.floor().clamp(0.0, max_cell as f64);
            base[a] = i as usize;
            frac[a] = (t - i).clamp(0.0, 1.0);
        }
        let mut out = vec![0.0f64; dim];
        for corner in 0..(1usize << dim) {
            let mut w = 1.0;
            let mut mi = base.clone();
            for a in 0..dim {
                if corner >> a & 1 == 1 {
                    mi[a] += 1;
                    w *= frac[a];
                } else {
                    w *= 1.0 - frac[a];
                }
            }
            let node = self.grid.flat_index(&mi);
            for a in 0..dim {
                out[a] += w * self.component(node, a);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn gaussian_grid() -> Grid {
        Grid::line(-8.0, 8.0, 256).unwrap()
    }

    fn gaussian(grid: &Grid) -> Signal {
        Signal::sample(grid, Domain::Time, |x| Complex64::new((-PI * x[0] * x[0]).exp(), 0.0))
            .unwrap()
    }

    #[test]
    fn grid_covers_expected_span() {
        let g = Grid::new(vec![-8.0], vec![1.0 / 16.0], vec![256]).unwrap();
        assert_eq!(g.total(), 256);
        assert_abs_diff_eq!(g.node(0)[0], -8.0);
        assert_abs_diff_eq!(g.node(255)[0], 8.0 - 1.0 / 16.0);
    }

    #[test]
    fn smallest_legal_grid() {
        let g = Grid::new(vec![0.0], vec![1.0], vec![2]).unwrap();
        assert_eq!(g.node(0), vec![0.0]);
        assert_eq!(g.node(1), vec![1.0]);
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(matches!(
            Grid::new(vec![-8.0], vec![0.0], vec![256]),
            Err(Error::InvalidGrid(_))
        ));
        assert!(matches!(Grid::new(vec![0.0], vec![1.0], vec![1]), Err(Error::InvalidGrid(_))));
        assert!(matches!(
            Grid::new(vec![0.0, 0.0], vec![1.0], vec![4, 4]),
            Err(Error::InvalidGrid(_))
        ));
    }

    #[test]
    fn multi_index_round_trip() {
        let g = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![5, 7]).unwrap();
        for flat in 0..g.total() {
            assert_eq!(g.flat_index(&g.multi_index(flat)), flat);
        }
        // last axis fastest
        assert_eq!(g.multi_index(1), vec![0, 1]);
    }

    #[test]
    fn zero_function_is_clean() {
        let f = Signal::sample(&gaussian_grid(), Domain::Time, |_| Complex64::new(0.0, 0.0))
            .unwrap();
        assert!(!f.truncated());
        assert_eq!(f.l2_norm(), 0.0);
    }

    #[test]
    fn gaussian_boundary_is_clean_constant_is_not() {
        let g = gaussian_grid();
        let f = gaussian(&g);
        assert!(!f.truncated());
        let c = Signal::sample(&g, Domain::Time, |_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(c.truncated());
    }

    #[test]
    fn non_finite_sampling_names_the_node() {
        let g = Grid::line(0.0, 4.0, 4).unwrap();
        let err = Signal::sample(&g, Domain::Time, |x| {
            Complex64::new(if x[0] == 2.0 { f64::NAN } else { 1.0 }, 0.0)
        })
        .unwrap_err();
        match err {
            Error::NonFiniteSample { index, coords } => {
                assert_eq!(index, 2);
                assert_eq!(coords, vec![2.0]);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn gaussian_norm_matches_closed_form() {
        // ∫ e^{-2πx²} dx = 2^{-1/2}, so the norm is 2^{-1/4}.
        let f = gaussian(&gaussian_grid());
        assert_relative_eq!(f.l2_norm(), 2f64.powf(-0.25), max_relative = 1e-6);
    }

    #[test]
    fn norm_is_homogeneous() {
        let f = gaussian(&gaussian_grid());
        let g = f.map(|_, s| 2.0 * s);
        assert_relative_eq!(g.l2_norm(), 2.0 * f.l2_norm(), max_relative = 1e-12);
    }

    #[test]
    fn even_odd_inner_product_vanishes() {
        let g = gaussian_grid();
        let f = gaussian(&g);
        let h = Signal::sample(&g, Domain::Time, |x| {
            Complex64::new(x[0] * (-PI * x[0] * x[0]).exp(), 0.0)
        })
        .unwrap();
        assert!(f.inner_product(&h).unwrap().norm() < 1e-12);
    }

    #[test]
    fn inner_product_is_conjugate_symmetric_and_consistent_with_norm() {
        let g = gaussian_grid();
        let f = Signal::sample(&g, Domain::Time, |x| {
            Complex64::new((-PI * x[0] * x[0]).exp(), 0.3 * (-x[0] * x[0]).exp())
        })
        .unwrap();
        let h = gaussian(&g);
        let fg = f.inner_product(&h).unwrap();
        let gf = h.inner_product(&f).unwrap();
        assert!((fg - gf.conj()).norm() < 1e-12);
        let ff = f.inner_product(&f).unwrap();
        assert!(ff.im.abs() < 1e-12);
        assert_abs_diff_eq!(f.l2_norm().powi(2), ff.re, epsilon = 1e-12);
    }

    #[test]
    fn grid_mismatch_is_an_error() {
        let f = gaussian(&gaussian_grid());
        let g2 = Grid::line(-8.0, 8.0, 128).unwrap();
        let h = gaussian(&g2);
        assert!(matches!(f.inner_product(&h), Err(Error::IncompatibleGrids)));
    }

    #[test]
    fn quadrature_refinement_is_converged() {
        let coarse = gaussian(&Grid::line(-8.0, 8.0, 256).unwrap());
        let fine = gaussian(&Grid::line(-8.0, 8.0, 512).unwrap());
        assert!((coarse.l2_norm() - fine.l2_norm()).abs() < 1e-8);
    }

    #[test]
    fn interpolation_reproduces_linear_fields() {
        let g = Grid::line(-2.0, 2.0, 32).unwrap();
        let field = VectorField::from_fn(&g, |x| vec![3.0 * x[0] + 1.0]);
        assert_relative_eq!(field.value_at(&[0.33])[0], 1.99, max_relative = 1e-12);
    }

    proptest! {
        // Sesquilinearity on random signal triples.
        #[test]
        fn inner_product_is_sesquilinear(
            a_re in -2.0f64..2.0, a_im in -2.0f64..2.0,
            b_re in -2.0f64..2.0, b_im in -2.0f64..2.0,
            seed in 0u64..1000,
        ) {
            let g = Grid::line(-4.0, 4.0, 64).unwrap();
            let mk = |s: u64| {
                Signal::sample(&g, Domain::Time, |x| {
                    let t = x[0] + s as f64 * 0.01;
                    Complex64::new((-t * t).exp(), (0.5 * t).sin() * (-x[0] * x[0]).exp())
                })
                .unwrap()
            };
            let f = mk(seed);
            let h = mk(seed + 7);
            let w = mk(seed + 13);
            let alpha = Complex64::new(a_re, a_im);
            let beta = Complex64::new(b_re, b_im);
            let combo = Signal::new(
                g.clone(),
                f.samples().iter().zip(h.samples()).map(|(x, y)| alpha * x + beta * y).collect(),
                Domain::Time,
            ).unwrap();
            let lhs = combo.inner_product(&w).unwrap();
            let rhs = alpha * f.inner_product(&w).unwrap() + beta * h.inner_product(&w).unwrap();
            let scale = lhs.norm().max(rhs.norm()).max(1e-30);
            prop_assert!((lhs - rhs).norm() / scale < 1e-10);
            // conjugate-linear in the second argument
            let lhs2 = w.inner_product(&combo).unwrap();
            let rhs2 = alpha.conj() * w.inner_product(&f).unwrap()
                + beta.conj() * w.inner_product(&h).unwrap();
            let scale2 = lhs2.norm().max(rhs2.norm()).max(1e-30);
            prop_assert!((lhs2 - rhs2).norm() / scale2 < 1e-10);
        }
    }
}
