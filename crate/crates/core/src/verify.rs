//! Lower-bound verification: the four kernel/function cases of the
//! distribution-domain uncertainty principle, and the first-power weak
//! functional with its dimension-only bound.

use crate::analysis::{covariance, abs_covariance, distribution_moments, freq_moments, time_moments};
use crate::engine::{cctfd, Distribution};
use crate::error::{Error, Result};
use crate::grid::{Domain, Signal, VectorField};
use crate::kernel::{classify, conjugate_multiplier, Kernel};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default relative tolerance for bound slack and equality detection.
pub const DEFAULT_REL_TOL: f64 = 1e-3;

/// Pointwise tolerance for the kernel/function identity preconditions.
const KERNEL_MATCH_TOL: f64 = 1e-6;

/// Relative imaginary content tolerated in signal realness checks.
const REALNESS_TOL: f64 = 1e-9;

/// The four kernel/function cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremCase {
    T1,
    T2,
    T3,
    T4,
}

impl TheoremCase {
    pub fn name(&self) -> &'static str {
        match self {
            TheoremCase::T1 => "T1",
            TheoremCase::T2 => "T2",
            TheoremCase::T3 => "T3",
            TheoremCase::T4 => "T4",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "T1" | "t1" => Ok(TheoremCase::T1),
            "T2" | "t2" => Ok(TheoremCase::T2),
            "T3" | "t3" => Ok(TheoremCase::T3),
            "T4" | "t4" => Ok(TheoremCase::T4),
            other => Err(Error::Parse {
                what: "theorem case".into(),
                detail: format!("expected T1..T4, got '{other}'"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Equality,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::Fail => write!(f, "fail"),
            Verdict::Equality => write!(f, "equality"),
        }
    }
}

/// Measured distribution-domain product against the case's lower bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundReport {
    pub case: TheoremCase,
    /// Dimension-only bound N²/(16π²).
    pub b_real: f64,
    pub b_cov_f: f64,
    pub b_abscov_f: f64,
    pub b_cov_fphi: f64,
    pub b_abscov_fphi: f64,
    pub theorem_bound_cov: f64,
    pub theorem_bound_abscov: f64,
    #[serde(rename = "measured_product_C")]
    pub measured_product: f64,
    pub slack: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

fn is_real(f: &Signal) -> bool {
    let peak = f.max_abs();
    if peak == 0.0 {
        return true;
    }
    f.samples().iter().all(|s| s.im.abs() <= REALNESS_TOL * peak)
}

/// φ values at the signal's grid nodes (unit kernel → 1).
fn kernel_time_values(k: &Kernel, f: &Signal) -> Result<Vec<Complex64>> {
    match k {
        Kernel::Unit => Ok(vec![Complex64::new(1.0, 0.0); f.grid().total()]),
        Kernel::TimeMultiplier(t) => {
            Ok((0..f.grid().total()).map(|i| (t.value)(&f.grid().node(i))).collect())
        }
        _ => Err(Error::NoTimeForm),
    }
}

/// Does φ agree pointwise with `sign·e^{2πi·φ_f}` on the signal support?
fn kernel_matches_signal_phase(phi: &[Complex64], f: &Signal, sign: f64) -> bool {
    let peak = f.max_abs();
    let cut = KERNEL_MATCH_TOL * peak;
    f.samples().iter().zip(phi).all(|(s, p)| {
        if s.norm() <= cut {
            return true;
        }
        let unit = s / s.norm();
        (p - unit * sign).norm() <= KERNEL_MATCH_TOL
    })
}

fn kernel_is_const(phi: &[Complex64], value: f64) -> bool {
    phi.iter().all(|p| (p - Complex64::new(value, 0.0)).norm() <= KERNEL_MATCH_TOL)
}

fn precondition(case: TheoremCase, ok: bool, condition: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::CasePrecondition { case: case.name(), condition: condition.to_string() })
    }
}

/// Check the case preconditions, assemble the Table-style bound from the
/// covariances of `f` and `f·conj(φ)`, measure the distribution-domain
/// product, and report the verdict. Equality is flagged when the slack
/// against the tighter (absolute-covariance) bound is within
/// `rel_tol · bound`.
pub fn verify_theorem(
    case: TheoremCase,
    f: &Signal,
    k: &Kernel,
    grad_f: &VectorField,
    grad_phi: &VectorField,
    rel_tol: f64,
) -> Result<BoundReport> {
    if f.domain() != Domain::Time {
        return Err(Error::WrongDomain { expected: "time" });
    }
    let phi = kernel_time_values(k, f)?;
    let f_real = is_real(f);
    let phi_is_one = kernel_is_const(&phi, 1.0);
    let phi_is_minus_one = kernel_is_const(&phi, -1.0);
    let phi_matches_plus = kernel_matches_signal_phase(&phi, f, 1.0);
    let phi_matches_minus = kernel_matches_signal_phase(&phi, f, -1.0);

    match case {
        TheoremCase::T1 => {
            precondition(case, f_real, "f must be real-valued")?;
            precondition(case, phi_is_one || phi_is_minus_one, "kernel must be constant +1 or -1")?;
        }
        TheoremCase::T2 => {
            precondition(case, !f_real, "f must be complex-valued")?;
            precondition(
                case,
                !phi_matches_plus && !phi_matches_minus,
                "kernel must differ from ±(signal phase factor)",
            )?;
        }
        TheoremCase::T3 => {
            precondition(case, f_real, "f must be real-valued")?;
            precondition(case, !phi_is_one && !phi_is_minus_one, "kernel must not be constant ±1")?;
        }
        TheoremCase::T4 => {
            precondition(
                case,
                phi_matches_plus || phi_matches_minus,
                "kernel must equal ±(signal phase factor)",
            )?;
        }
    }

    let dim = f.grid().dim() as f64;
    let b_real = dim * dim / (16.0 * PI * PI);

    let fphi = conjugate_multiplier(k, f)?;
    let grad_fphi = grad_f.sub(grad_phi)?;

    let cov_f = covariance(f, grad_f)?;
    let abscov_f = abs_covariance(f, grad_f)?;
    let cov_fphi = covariance(&fphi, &grad_fphi)?;
    let abscov_fphi = abs_covariance(&fphi, &grad_fphi)?;

    let b_cov_f = b_real + cov_f * cov_f;
    let b_abscov_f = b_real + abscov_f * abscov_f;
    let b_cov_fphi = b_real + cov_fphi * cov_fphi;
    let b_abscov_fphi = b_real + abscov_fphi * abscov_fphi;

    let (theorem_bound_cov, theorem_bound_abscov) = match case {
        TheoremCase::T1 => (b_real / 4.0, b_real / 4.0),
        TheoremCase::T2 => ((b_cov_f + b_cov_fphi) / 8.0, (b_abscov_f + b_abscov_fphi) / 8.0),
        TheoremCase::T3 => ((b_real + b_cov_fphi) / 8.0, (b_real + b_abscov_fphi) / 8.0),
        TheoremCase::T4 => ((b_cov_f + b_real) / 8.0, (b_abscov_f + b_real) / 8.0),
    };

    let d = cctfd(f, k)?;
    let measured = distribution_moments(&d)?.product;
    let slack = measured - theorem_bound_abscov;
    let tol = rel_tol * theorem_bound_abscov;
    let verdict = if slack.abs() <= tol {
        Verdict::Equality
    } else if slack >= -tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    Ok(BoundReport {
        case,
        b_real,
        b_cov_f,
        b_abscov_f,
        b_cov_fphi,
        b_abscov_fphi,
        theorem_bound_cov,
        theorem_bound_abscov,
        measured_product: measured,
        slack,
        tolerance: tol,
        verdict,
    })
}

/// The two first-power weak spreads `(a, b)`: the functional is
/// `a/T² + b·T²`. The distribution itself (not its square) is the weight, so
/// the components can only be trusted for marginal-property kernels.
pub fn flandrin_components(f: &Signal, k: &Kernel) -> Result<(f64, f64)> {
    if !classify(k, f.grid()).marginal {
        return Err(Error::NotMarginal);
    }
    let x0 = time_moments(f)?.center;
    let w0 = freq_moments(f)?.center;
    let d: Distribution = cctfd(f, k)?;
    let cell = d.weight();
    let tg = d.time_grid();
    let fg = d.freq_grid();
    let ft = fg.total();
    let mut acc_x = Complex64::new(0.0, 0.0);
    let mut acc_w = Complex64::new(0.0, 0.0);
    for (idx, v) in d.values().iter().enumerate() {
        let n = idx / ft;
        let kk = idx % ft;
        let rx: f64 = tg.node(n).iter().zip(&x0).map(|(x, c)| (x - c) * (x - c)).sum();
        let rw: f64 = fg.node(kk).iter().zip(&w0).map(|(w, c)| (w - c) * (w - c)).sum();
        acc_x += v * rx;
        acc_w += v * rw;
    }
    let norm2 = f.l2_norm().powi(2);
    if norm2 == 0.0 {
        return Err(Error::ZeroNorm);
    }
    let a = acc_x * cell / norm2;
    let b = acc_w * cell / norm2;
    for part in [a, b] {
        let scale = part.re.abs().max(1.0 / (4.0 * PI));
        if part.im.abs() > 1e-6 * scale {
            return Err(Error::ImaginaryResidue { im: part.im.abs(), scale });
        }
    }
    Ok((a.re, b.re))
}

/// First-power weak uncertainty functional
/// `∫∫ (‖x-x0‖²/T² + T²‖w-w0‖²)·C_f / ‖f‖²`, bounded below by `N/(2π)` for
/// marginal-property kernels.
pub fn flandrin(f: &Signal, k: &Kernel, t: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Parse {
            what: "flandrin scale".into(),
            detail: format!("T must be positive, got {t}"),
        });
    }
    let (a, b) = flandrin_components(f, k)?;
    Ok(a / (t * t) + b * t * t)
}
