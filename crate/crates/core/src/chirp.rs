//! Extremal signal generators: the optimal Gaussian family and the
//! Gaussian-enveloped chirp family with exact analytic phase gradients.
//!
//! A chirp axis behaves in one of four ways, chosen by the partition sets:
//! fixed positive or negative quadratic phase (j1/j2), or a sign-switching
//! quadratic phase whose gradient is `±|x - x0|/ε + w0` with a kink at the
//! center (j3/j4).

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, Signal, VectorField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Disjoint axis sets (1-based axis numbers) selecting the per-axis chirp
/// branch.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Partition {
    #[serde(default)]
    pub j1: Vec<usize>,
    #[serde(default)]
    pub j2: Vec<usize>,
    #[serde(default)]
    pub j3: Vec<usize>,
    #[serde(default)]
    pub j4: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Branch {
    PlusQuad,
    MinusQuad,
    PlusKink,
    MinusKink,
}

impl Partition {
    /// Branch per 0-based axis; errors unless the sets cover `{1..=dim}`
    /// exactly once.
    fn branches(&self, dim: usize) -> Result<Vec<Branch>> {
        let mut out = vec![None; dim];
        let sets = [
            (&self.j1, Branch::PlusQuad),
            (&self.j2, Branch::MinusQuad),
            (&self.j3, Branch::PlusKink),
            (&self.j4, Branch::MinusKink),
        ];
        for (set, branch) in sets {
            for &axis in set {
                if axis == 0 || axis > dim {
                    return Err(Error::InvalidPartition(format!(
                        "axis {axis} outside 1..={dim}"
                    )));
                }
                if out[axis - 1].is_some() {
                    return Err(Error::InvalidPartition(format!("axis {axis} assigned twice")));
                }
                out[axis - 1] = Some(branch);
            }
        }
        out.into_iter()
            .enumerate()
            .map(|(a, b)| {
                b.ok_or_else(|| Error::InvalidPartition(format!("axis {} unassigned", a + 1)))
            })
            .collect()
    }
}

/// Parameters of a Gaussian-enveloped chirp.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChirpSpec {
    /// Envelope width parameter ζ > 0: envelope `e^{-‖x-x0‖²/(2ζ)}`.
    pub zeta: f64,
    /// Chirp-rate reciprocal ε > 0: quadratic phase `η(x)·(x-x0)²/(2ε)`.
    pub eps: f64,
    pub x0: Vec<f64>,
    pub w0: Vec<f64>,
    /// Additive log-amplitude offset.
    #[serde(default)]
    pub amp_offset: f64,
    /// Per-orthant phase offsets keyed by a +/- sign pattern such as "+-";
    /// missing orthants default to 0.
    #[serde(default)]
    pub phase_offsets: BTreeMap<String, f64>,
    pub partition: Partition,
}

impl ChirpSpec {
    /// One-dimensional chirp centered at the origin with the given branch
    /// applied to the single axis (1 → j1, 2 → j2, 3 → j3, 4 → j4).
    pub fn one_dim(zeta: f64, eps: f64, branch: usize) -> ChirpSpec {
        let mut partition = Partition::default();
        match branch {
            1 => partition.j1 = vec![1],
            2 => partition.j2 = vec![1],
            3 => partition.j3 = vec![1],
            _ => partition.j4 = vec![1],
        }
        ChirpSpec {
            zeta,
            eps,
            x0: vec![0.0],
            w0: vec![0.0],
            amp_offset: 0.0,
            phase_offsets: BTreeMap::new(),
            partition,
        }
    }
}

/// Real positive Gaussian `e^{-‖x-x0‖²/(2ζ) + amp_offset}`; errors when the
/// grid is too narrow for the boundary-decay guard.
pub fn optimal_gaussian(zeta: f64, x0: &[f64], amp_offset: f64, grid: &Grid) -> Result<Signal> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::InvalidGrid(format!("zeta must be positive, got {zeta}")));
    }
    if x0.len() != grid.dim() {
        return Err(Error::InvalidGrid("x0 dimension mismatch".into()));
    }
    let f = Signal::sample(grid, Domain::Time, |x| {
        let r2: f64 = x.iter().zip(x0).map(|(a, b)| (a - b) * (a - b)).sum();
        Complex64::new((-r2 / (2.0 * zeta) + amp_offset).exp(), 0.0)
    })?;
    if f.truncated() {
        return Err(Error::TruncatedSignal { ratio: f.boundary_ratio() });
    }
    Ok(f)
}

/// Gaussian-enveloped chirp together with the exact branch phase gradient.
///
/// The signal is `e^{-‖x-x0‖²/(2ζ) + amp_offset} · e^{2πi φ(x)}` with
/// `φ(x) = Σ_a η_a(x)·(x_a - x0_a)²/(2ε) + w0·x + offset(orthant)`, where
/// `η_a` is +1, −1, `sgn(x_a - x0_a)` or `-sgn(x_a - x0_a)` by branch, and
/// `sgn(0) = +1`.
pub fn optimal_chirp(spec: &ChirpSpec, grid: &Grid) -> Result<(Signal, VectorField)> {
    let dim = grid.dim();
    if !(spec.zeta > 0.0 && spec.zeta.is_finite()) || !(spec.eps > 0.0 && spec.eps.is_finite()) {
        return Err(Error::InvalidGrid(format!(
            "zeta and eps must be positive, got {} and {}",
            spec.zeta, spec.eps
        )));
    }
    if spec.x0.len() != dim || spec.w0.len() != dim {
        return Err(Error::InvalidGrid("x0/w0 dimension mismatch".into()));
    }
    let branches = spec.partition.branches(dim)?;

    let eta = move |branch: Branch, d: f64| -> f64 {
        let sgn = if d < 0.0 { -1.0 } else { 1.0 };
        match branch {
            Branch::PlusQuad => 1.0,
            Branch::MinusQuad => -1.0,
            Branch::PlusKink => sgn,
            Branch::MinusKink => -sgn,
        }
    };

    let phase = |x: &[f64]| -> f64 {
        let mut p = 0.0;
        let mut orthant = String::with_capacity(dim);
        for a in 0..dim {
            let d = x[a] - spec.x0[a];
            p += eta(branches[a], d) * d * d / (2.0 * spec.eps);
            p += spec.w0[a] * x[a];
            orthant.push(if d < 0.0 { '-' } else { '+' });
        }
        p + spec.phase_offsets.get(&orthant).copied().unwrap_or(0.0)
    };

    let f = Signal::sample(grid, Domain::Time, |x| {
        let r2: f64 = x.iter().zip(&spec.x0).map(|(a, b)| (a - b) * (a - b)).sum();
        let amp = (-r2 / (2.0 * spec.zeta) + spec.amp_offset).exp();
        Complex64::from_polar(amp, 2.0 * PI * phase(x))
    })?;
    if f.truncated() {
        return Err(Error::TruncatedSignal { ratio: f.boundary_ratio() });
    }

    let x0 = spec.x0.clone();
    let w0 = spec.w0.clone();
    let eps = spec.eps;
    let grad = VectorField::from_fn(grid, move |x| {
        (0..dim)
            .map(|a| {
                let d = x[a] - x0[a];
                let g = match branches[a] {
                    Branch::PlusQuad => d / eps,
                    Branch::MinusQuad => -d / eps,
                    Branch::PlusKink => d.abs() / eps,
                    Branch::MinusKink => -d.abs() / eps,
                };
                g + w0[a]
            })
            .collect()
    });
    Ok((f, grad))
}
