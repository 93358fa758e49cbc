//! The L-index as a count of crossings with the Maslov cycle.
//!
//! When the lower block of `PᵀB(t)P` is positive definite every crossing
//! is regular and positive, so `i_L = Σ_{0<s<T} ν_L(γ(s))`. Crossings are
//! located as zeros of the smallest singular value of the `V` block of the
//! orthonormalised image `γ_c(s)L0`.

use serde::Serialize;

use super::{Algorithm, IndexReport, Target};
use crate::error::{Error, Result};
use crate::path::SymplecticPath;
use crate::symplectic::{l0_angle_sines, LagrangianFrame, Mat};
use crate::tolerances::{CROSSING_DIM_TOL, CROSSING_TOL};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Crossing {
    pub s: f64,
    pub dim: usize,
    pub sigma: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossingReport {
    pub report: IndexReport,
    pub crossings: Vec<Crossing>,
    /// Smallest eigenvalue of the lower block over the path.
    pub positivity_margin: f64,
    /// Nullity at the right end, excluded from the count.
    pub endpoint_nullity: usize,
}

fn sines_at(path: &SymplecticPath, frame: &LagrangianFrame, p: &Mat, s: f64) -> Vec<f64> {
    let g = path.eval(s);
    let m = if frame.label() == crate::symplectic::FrameLabel::L0 { g } else { p.transpose() * g * p };
    l0_angle_sines(&m)
}

/// `(i_L, ν_L)` of a field-driven path on `[0, T]` by counting crossings.
pub fn index_l_crossings(path: &SymplecticPath, frame: &LagrangianFrame) -> Result<CrossingReport> {
    let field = path
        .field()
        .ok_or_else(|| Error::InvalidArgument("crossing counts need a path generated by a coefficient".into()))?;
    let t_end = path.t_end();
    let margin = field.min_lower_block_eigenvalue(frame, t_end);
    if margin <= 0.0 {
        return Err(Error::NotPositive(format!(
            "lower block of the conjugated coefficient has eigenvalue {margin:.3e}"
        )));
    }
    let p = frame.unitary_model();
    let samples = path.grid().len().max((40.0 * field.norm_bound() * t_end).ceil() as usize + 1);
    let grid: Vec<f64> = (0..samples).map(|i| t_end * i as f64 / (samples - 1) as f64).collect();
    let sigma: Vec<f64> = grid.iter().map(|&s| sines_at(path, frame, &p, s)[0]).collect();

    let mut crossings: Vec<Crossing> = Vec::new();
    let last = grid.len() - 1;
    for i in 1..=last {
        let local_min = if i < last {
            sigma[i] <= sigma[i - 1] && sigma[i] < sigma[i + 1]
        } else {
            sigma[i] < sigma[i - 1]
        };
        if !local_min {
            continue;
        }
        let (s, val) = golden_min(|s| sines_at(path, frame, &p, s)[0], grid[i - 1], grid[(i + 1).min(last)]);
        if val >= CROSSING_TOL || s <= 1e-9 * t_end || s >= t_end * (1.0 - 1e-9) {
            continue;
        }
        if crossings.last().is_some_and(|c| (c.s - s).abs() < 1e-9) {
            continue;
        }
        let dim = sines_at(path, frame, &p, s).iter().filter(|&&x| x < CROSSING_DIM_TOL).count();
        crossings.push(Crossing { s, dim, sigma: val });
    }
    let endpoint_nullity = crate::symplectic::nullity_l(path.endpoint(), frame);
    let index = crossings.iter().map(|c| c.dim as i64).sum();
    Ok(CrossingReport {
        report: IndexReport {
            index,
            nullity: endpoint_nullity,
            target: Target::Lagrangian(frame.label()),
            theta: None,
            algorithm: Algorithm::Crossing,
            m_used: None,
            d_used: None,
            stabilized: true,
            baseline_ok: true,
        },
        crossings,
        positivity_margin: margin,
        endpoint_nullity,
    })
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    const R: f64 = 0.618_033_988_749_894_8;
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-13 * (1.0 + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - R * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + R * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
