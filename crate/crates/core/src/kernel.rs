//! The kernel catalog φ(v, y), its classification predicates, and the
//! time-multiplier product `f·conj(φ)`.
//!
//! The catalog carries the closed-form unit-modulus kernels (unit,
//! Kirkwood-Rihaczek, Page), time-multiplier kernels acting as a unit-modulus
//! factor φ(t) on the time variable, and tabulated joint kernels reachable
//! only through the generic quadrature path.

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid, Signal, VectorField};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub type TimeFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;
pub type PhaseFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type JointFn = Arc<dyn Fn(&[f64], &[f64]) -> Complex64 + Send + Sync>;

/// Tolerance for the pointwise kernel-classification probes.
pub const CLASSIFY_TOL: f64 = 1e-9;

/// Kernel acting as a multiplier φ(t) on the time variable. `phase` and
/// `phase_grad` are the optional analytic phase (φ = e^{2πi·phase}, up to
/// `sign`) and its gradient, used by the bound verifiers.
#[derive(Clone)]
pub struct TimeMultiplier {
    pub name: String,
    pub value: TimeFn,
    pub phase: Option<PhaseFn>,
    pub phase_grad: Option<GradFn>,
}

/// Joint kernel given as a complex function of (v, y); no closed-form fast
/// path, only the cubic-cost quadrature route.
#[derive(Clone)]
pub struct Tabulated {
    pub name: String,
    pub value: JointFn,
}

#[derive(Clone)]
pub enum Kernel {
    Unit,
    KirkwoodRihaczek,
    Page,
    TimeMultiplier(TimeMultiplier),
    Tabulated(Tabulated),
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Kernel({})", self.tag())
    }
}

impl Kernel {
    /// Short description used in distribution headers and reports.
    pub fn tag(&self) -> String {
        match self {
            Kernel::Unit => "unit".into(),
            Kernel::KirkwoodRihaczek => "krd".into(),
            Kernel::Page => "page".into(),
            Kernel::TimeMultiplier(t) => format!("timemul:{}", t.name),
            Kernel::Tabulated(t) => format!("table:{}", t.name),
        }
    }

    /// φ(t) = e^{πi·rate·‖t‖²}, the quadratic-phase time multiplier.
    pub fn quadratic_chirp(rate: f64) -> Kernel {
        Kernel::TimeMultiplier(TimeMultiplier {
            name: format!("quad({rate})"),
            value: Arc::new(move |t| {
                let s: f64 = t.iter().map(|x| x * x).sum();
                Complex64::from_polar(1.0, PI * rate * s)
            }),
            phase: Some(Arc::new(move |t| {
                0.5 * rate * t.iter().map(|x| x * x).sum::<f64>()
            })),
            phase_grad: Some(Arc::new(move |t| t.iter().map(|x| rate * x).collect())),
        })
    }

    /// φ(t) = e^{2πi·rate·Σ|t|³/3}, a kinked cubic-phase time multiplier.
    pub fn cubic_chirp(rate: f64) -> Kernel {
        Kernel::TimeMultiplier(TimeMultiplier {
            name: format!("cubic({rate})"),
            value: Arc::new(move |t| {
                let s: f64 = t.iter().map(|x| x.abs().powi(3)).sum();
                Complex64::from_polar(1.0, 2.0 * PI * rate * s / 3.0)
            }),
            phase: Some(Arc::new(move |t| {
                rate * t.iter().map(|x| x.abs().powi(3)).sum::<f64>() / 3.0
            })),
            phase_grad: Some(Arc::new(move |t| {
                t.iter().map(|x| rate * x * x.abs()).collect()
            })),
        })
    }

    /// φ(t) ≡ +1 or −1.
    pub fn constant_sign(sign: f64) -> Kernel {
        let s = if sign < 0.0 { -1.0 } else { 1.0 };
        Kernel::TimeMultiplier(TimeMultiplier {
            name: format!("const({s})"),
            value: Arc::new(move |_| Complex64::new(s, 0.0)),
            phase: Some(Arc::new(move |_| if s < 0.0 { 0.5 } else { 0.0 })),
            phase_grad: Some(Arc::new(|t| vec![0.0; t.len()])),
        })
    }

    /// Time multiplier `sign·e^{2πi·phase(t)}` from an analytic phase.
    pub fn from_phase(name: &str, sign: f64, phase: PhaseFn, grad: GradFn) -> Kernel {
        let s = if sign < 0.0 { -1.0 } else { 1.0 };
        let ph = phase.clone();
        Kernel::TimeMultiplier(TimeMultiplier {
            name: name.to_string(),
            value: Arc::new(move |t| {
                Complex64::from_polar(1.0, 2.0 * PI * ph(t)) * s
            }),
            phase: Some(phase),
            phase_grad: Some(grad),
        })
    }

    /// Joint kernel from a closure.
    pub fn tabulated(name: &str, value: JointFn) -> Kernel {
        Kernel::Tabulated(Tabulated { name: name.to_string(), value })
    }

    /// Parse a kernel specification string:
    /// `unit | krd | page | timemul:<builtin>(<param>) | table:<csv-path>`.
    pub fn parse(spec: &str) -> Result<Kernel> {
        let bad = |detail: String| Error::Parse { what: format!("kernel '{spec}'"), detail };
        match spec {
            "unit" => return Ok(Kernel::Unit),
            "krd" => return Ok(Kernel::KirkwoodRihaczek),
            "page" => return Ok(Kernel::Page),
            _ => {}
        }
        if let Some(rest) = spec.strip_prefix("timemul:") {
            let (name, arg) = match rest.find('(') {
                Some(p) if rest.ends_with(')') => {
                    let name = &rest[..p];
                    let arg: f64 = rest[p + 1..rest.len() - 1]
                        .parse()
                        .map_err(|e| bad(format!("bad parameter: {e}")))?;
                    (name, arg)
                }
                _ => return Err(bad("expected <builtin>(<param>)".into())),
            };
            return match name {
                "quad" => Ok(Kernel::quadratic_chirp(arg)),
                "cubic" => Ok(Kernel::cubic_chirp(arg)),
                "const" => {
                    if arg == 1.0 || arg == -1.0 {
                        Ok(Kernel::constant_sign(arg))
                    } else {
                        Err(bad("const takes 1 or -1".into()))
                    }
                }
                other => Err(bad(format!("unknown time-multiplier builtin '{other}'"))),
            };
        }
        if let Some(path) = spec.strip_prefix("table:") {
            return load_table_kernel(path);
        }
        Err(bad("unknown kernel name".into()))
    }
}

/// Classification flags established by closed-form rule or probe evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct KernelFlags {
    pub unit_modulus: bool,
    pub time_multiplier: bool,
    pub marginal: bool,
    pub energy_conserving: bool,
}

/// Evaluate the joint kernel value φ(v, y).
pub fn kernel_value(k: &Kernel, v: &[f64], y: &[f64]) -> Result<Complex64> {
    match k {
        Kernel::Unit => Ok(Complex64::new(1.0, 0.0)),
        Kernel::KirkwoodRihaczek => {
            let dot: f64 = v.iter().zip(y).map(|(a, b)| a * b).sum();
            Ok(Complex64::from_polar(1.0, PI * dot))
        }
        Kernel::Page => {
            let y1: f64 = y.iter().map(|a| a.abs()).sum();
            let vs: f64 = v.iter().sum();
            Ok(Complex64::from_polar(1.0, 2.0 * PI * y1 * vs))
        }
        Kernel::Tabulated(t) => Ok((t.value)(v, y)),
        Kernel::TimeMultiplier(_) => Err(Error::NoJointForm),
    }
}

/// Establish the flags; joint variants are probed on the grid's (v, y) cross
/// product, time multipliers on the grid's time nodes.
pub fn classify(k: &Kernel, probe: &Grid) -> KernelFlags {
    match k {
        Kernel::Unit => KernelFlags {
            unit_modulus: true,
            time_multiplier: true,
            marginal: true,
            energy_conserving: true,
        },
        Kernel::TimeMultiplier(t) => {
            let mut unit = true;
            for i in 0..probe.total() {
                let val = (t.value)(&probe.node(i));
                if (val.norm() - 1.0).abs() > CLASSIFY_TOL {
                    unit = false;
                    break;
                }
            }
            // φ(0,y), φ(v,0), φ(0,0) are undefined for a pure time multiplier,
            // so the marginal and energy conditions are reported false.
            KernelFlags {
                unit_modulus: unit,
                time_multiplier: unit,
                marginal: false,
                energy_conserving: false,
            }
        }
        _ => {
            let zero = vec![0.0; probe.dim()];
            let val = |v: &[f64], y: &[f64]| kernel_value(k, v, y).expect("joint form");
            let is_one = |c: Complex64| (c - Complex64::new(1.0, 0.0)).norm() <= CLASSIFY_TOL;
            let mut unit = true;
            for i in 0..probe.total() {
                let v = probe.node(i);
                for j in 0..probe.total() {
                    let y = probe.node(j);
                    if (val(&v, &y).norm() - 1.0).abs() > CLASSIFY_TOL {
                        unit = false;
                        break;
                    }
                }
                if !unit {
                    break;
                }
            }
            let mut marginal = true;
            for i in 0..probe.total() {
                let p = probe.node(i);
                if !is_one(val(&zero, &p)) || !is_one(val(&p, &zero)) {
                    marginal = false;
                    break;
                }
            }
            let energy = is_one(val(&zero, &zero));
            KernelFlags {
                unit_modulus: unit,
                time_multiplier: false,
                marginal,
                energy_conserving: energy,
            }
        }
    }
}

/// Build `f(t)·conj(φ(t))` for time-multiplier kernels (unit kernel acts as
/// φ ≡ 1).
pub fn conjugate_multiplier(k: &Kernel, f: &Signal) -> Result<Signal> {
    if f.domain() != Domain::Time {
        return Err(Error::WrongDomain { expected: "time" });
    }
    match k {
        Kernel::Unit => Ok(f.clone()),
        Kernel::TimeMultiplier(t) => {
            let grid = f.grid().clone();
            Ok(f.map(|i, s| s * (t.value)(&grid.node(i)).conj()))
        }
        _ => Err(Error::NoTimeForm),
    }
}

/// The phase gradient a kernel contributes to `f·conj(φ)`, as a field on the
/// signal grid. Zero for the unit kernel; an error when the kernel carries no
/// analytic gradient.
pub fn kernel_phase_gradient(k: &Kernel, grid: &Grid) -> Result<VectorField> {
    match k {
        Kernel::Unit => Ok(VectorField::zero(grid)),
        Kernel::TimeMultiplier(t) => match &t.phase_grad {
            Some(g) => {
                let g = g.clone();
                Ok(VectorField::from_fn(grid, move |x| g(x)))
            }
            None => Err(Error::NoTimeForm),
        },
        _ => Err(Error::NoTimeForm),
    }
}

/// Load a tabulated joint kernel from CSV: two grid header lines for the v
/// and y axes, then `iv,iy,re,im` rows. Values are interpolated bilinearly
/// and are zero outside the table.
fn load_table_kernel(path: &str) -> Result<Kernel> {
    let text = std::fs::read_to_string(path)?;
    let bad = |detail: String| Error::Parse { what: format!("kernel table {path}"), detail };
    let mut vgrid: Option<(f64, f64, usize)> = None;
    let mut ygrid: Option<(f64, f64, usize)> = None;
    let mut rows: Vec<(usize, usize, Complex64)> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            let target = if rest.starts_with("vgrid") {
                &mut vgrid
            } else if rest.starts_with("ygrid") {
                &mut ygrid
            } else {
                continue;
            };
            let mut origin = None;
            let mut spacing = None;
            let mut count = None;
            for tok in rest.split_whitespace().skip(1) {
                let (key, val) = tok
                    .split_once('=')
                    .ok_or_else(|| bad(format!("malformed header token '{tok}'")))?;
                match key {
                    "origin" => origin = Some(val.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                    "spacing" => spacing = Some(val.parse::<f64>().map_err(|e| bad(e.to_string()))?),
                    "count" => count = Some(val.parse::<usize>().map_err(|e| bad(e.to_string()))?),
                    _ => return Err(bad(format!("unknown header key '{key}'"))),
                }
            }
            *target = Some((
                origin.ok_or_else(|| bad("missing origin".into()))?,
                spacing.ok_or_else(|| bad("missing spacing".into()))?,
                count.ok_or_else(|| bad("missing count".into()))?,
            ));
            continue;
        }
        let mut parts = line.split(',');
        let iv: usize = parts
            .next()
            .ok_or_else(|| bad("missing iv".into()))?
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let iy: usize = parts
            .next()
            .ok_or_else(|| bad("missing iy".into()))?
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| bad(e.to_string()))?;
        let re: f64 = parts
            .next()
            .ok_or_else(|| bad("missing re".into()))?
            .trim()
            .parse()
            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
        let im: f64 = parts
            .next()
            .ok_or_else(|| bad("missing im".into()))?
            .trim()
            .parse()
            .map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
        rows.push((iv, iy, Complex64::new(re, im)));
    }
    let (v0, dv, nv) = vgrid.ok_or_else(|| bad("missing vgrid header".into()))?;
    let (y0, dy, ny) = ygrid.ok_or_else(|| bad("missing ygrid header".into()))?;
    let mut table = vec![Complex64::new(0.0, 0.0); nv * ny];
    for (iv, iy, val) in rows {
        if iv >= nv || iy >= ny {
            return Err(bad(format!("index ({iv},{iy}) outside table {nv}x{ny}")));
        }
        table[iv * ny + iy] = val;
    }
    let name = path.to_string();
    let value: JointFn = Arc::new(move |v: &[f64], y: &[f64]| {
        let tv = (v[0] - v0) / dv;
        let ty = (y[0] - y0) / dy;
        if tv < 0.0 || ty < 0.0 || tv > (nv - 1) as f64 || ty > (ny - 1) as f64 {
            return Complex64::new(0.0, 0.0);
        }
        let i0 = (tv.floor() as usize).min(nv - 2);
        let j0 = (ty.floor() as usize).min(ny - 2);
        let fv = tv - i0 as f64;
        let fy = ty - j0 as f64;
        let g = |i: usize, j: usize| table[i * ny + j];
        g(i0, j0) * (1.0 - fv) * (1.0 - fy)
            + g(i0 + 1, j0) * fv * (1.0 - fy)
            + g(i0, j0 + 1) * (1.0 - fv) * fy
            + g(i0 + 1, j0 + 1) * fv * fy
    });
    Ok(Kernel::Tabulated(Tabulated { name, value }))
}
