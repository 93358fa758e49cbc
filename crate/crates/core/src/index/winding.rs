//! The L-index as a winding number.
//!
//! After conjugating the path so that `L` becomes `L0`, the image of `L0`
//! under `γ(t)` is the Lagrangian subspace spanned by the columns of
//! `(V; U)`, and `det(U + iV)` never vanishes. The phase
//! `Θ = arg(conj(z)/z)`, `z = det(U + iV)`, depends only on that subspace.
//! The index counts how often `Θ` winds along the concatenation of
//!
//! 1. the pre-path `exp(φJ)`, `φ` from `π/2` down to `0`, which ends at `I`,
//! 2. the path itself,
//! 3. a contraction of the endpoint subspace, written as the graph of the
//!    symmetric `W = U V⁻¹` over `ℝⁿ × {0}`, down to `ℝⁿ × {0}`,
//!
//! so that the loop starts and ends on the subspace `ℝⁿ × {0}` which is the
//! image of `L0` under both `M₊` and `M₋`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use super::{Algorithm, IndexReport, Target};
use crate::error::{Error, Result};
use crate::path::SymplecticPath;
use crate::symplectic::{conjugate_to_l0, nullity_l, CMat, LagrangianFrame, Mat};
use crate::tolerances::PHASE_STEP_MAX;

/// Which of `M₊`, `M₋` the contraction lands on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Terminal {
    MPlus,
    MMinus,
}

#[derive(Clone, Debug, Serialize)]
pub struct WindingReport {
    pub report: IndexReport,
    pub terminal: Terminal,
    /// Total phase divided by `2π` before rounding.
    pub raw_winding: f64,
    /// Extra evaluations spent on refining steps of the path.
    pub refinements: usize,
}

/// `conj(z)/z` for `z = det(U + iV)` of `m`.
fn phase_point(m: &Mat) -> Complex64 {
    let n = m.nrows() / 2;
    let z = CMat::from_fn(n, n, |i, j| Complex64::new(m[(n + i, n + j)], m[(i, n + j)])).determinant();
    let u = z.conj() / z;
    u / u.norm()
}

fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg()
}

/// `(i_L, ν_L)` from the winding of the phase of `γ(t)L ∩ L`.
pub fn index_l_winding(path: &SymplecticPath, frame: &LagrangianFrame) -> Result<WindingReport> {
    let n = path.n();
    let end = conjugate_to_l0(path.endpoint(), frame);
    let nullity = nullity_l(path.endpoint(), frame);
    if nullity > 0 {
        return Err(Error::DegenerateEndpoint(nullity));
    }

    // Pre-path: exp(φJ) has z = e^{−inφ}, so Θ = 2nφ drops by nπ.
    let mut total = -(n as f64) * PI;

    // The path itself, refined until every phase step is small.
    let grid = path.grid();
    let mut refinements = 0usize;
    let mut prev_t = grid[0];
    let mut prev = phase_point(&conjugate_to_l0(&path.samples()[0], frame));
    for (i, &t) in grid.iter().enumerate().skip(1) {
        let next = phase_point(&conjugate_to_l0(&path.samples()[i], frame));
        total += refine(path, frame, prev_t, prev, t, next, 0, &mut refinements)?;
        prev_t = t;
        prev = next;
    }

    // Contraction of the graph of W = UV⁻¹ to the zero graph. Along
    // (I; sW) the phase is −2 Σ atan2(1, s w_k) for eigenvalues w_k of W.
    let v = end.view((0, n), (n, n)).into_owned();
    let u = end.view((n, n), (n, n)).into_owned();
    let vinv = v.clone().try_inverse().ok_or(Error::DegenerateEndpoint(n))?;
    let w = &u * vinv;
    let w = (&w + w.transpose()) * 0.5;
    let eig = SymmetricEigen::new(w).eigenvalues;
    total += eig.iter().map(|&wk| -2.0 * (FRAC_PI_2 - f64::atan2(1.0, wk))).sum::<f64>();

    let raw = total / TAU;
    let index = raw.round();
    if (raw - index).abs() > 1e-6 {
        return Err(Error::PhaseResolution(path.t_end()));
    }
    let terminal = if v.determinant() > 0.0 { Terminal::MPlus } else { Terminal::MMinus };
    Ok(WindingReport {
        report: IndexReport {
            index: index as i64,
            nullity,
            target: Target::Lagrangian(frame.label()),
            theta: None,
            algorithm: Algorithm::Winding,
            m_used: None,
            d_used: None,
            stabilized: true,
            baseline_ok: true,
        },
        terminal,
        raw_winding: raw,
        refinements,
    })
}

#[allow(clippy::too_many_arguments)]
fn refine(
    path: &SymplecticPath,
    frame: &LagrangianFrame,
    t0: f64,
    p0: Complex64,
    t1: f64,
    p1: Complex64,
    depth: usize,
    count: &mut usize,
) -> Result<f64> {
    let step = phase_step(p0, p1);
    if step.abs() < PHASE_STEP_MAX {
        return Ok(step);
    }
    if depth > 40 {
        return Err(Error::PhaseResolution(t0));
    }
    *count += 1;
    let tm = 0.5 * (t0 + t1);
    let pm = phase_point(&conjugate_to_l0(&path.eval(tm), frame));
    Ok(refine(path, frame, t0, p0, tm, pm, depth + 1, count)? + refine(path, frame, tm, pm, t1, p1, depth + 1, count)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::CoefficientPath;
    use std::sync::Arc;

    fn rot_path(b: f64) -> SymplecticPath {
        let c = Arc::new(CoefficientPath::constant(Mat::identity(2, 2) * b, 1.0).unwrap());
        SymplecticPath::unit(&c.field(), 1.0).unwrap()
    }

    #[test]
    fn rotations_wind_as_expected() {
        let l0 = LagrangianFrame::l0(1);
        assert_eq!(index_l_winding(&rot_path(FRAC_PI_2), &l0).unwrap().report.index, 0);
        assert_eq!(index_l_winding(&rot_path(3.0 * FRAC_PI_2), &l0).unwrap().report.index, 1);
        assert_eq!(index_l_winding(&rot_path(7.0), &l0).unwrap().report.index, 2);
    }

    #[test]
    fn degenerate_endpoint_is_refused() {
        let l0 = LagrangianFrame::l0(1);
        assert!(matches!(index_l_winding(&rot_path(PI), &l0), Err(Error::DegenerateEndpoint(1))));
    }

    #[test]
    fn orthogonal_endpoints_give_equal_l0_and_l1_indices() {
        let l1 = LagrangianFrame::l1(1);
        let l0 = LagrangianFrame::l0(1);
        for b in [0.7, 2.0, 4.4, 8.1] {
            let p = rot_path(b);
            assert_eq!(index_l_winding(&p, &l0).unwrap().report.index, index_l_winding(&p, &l1).unwrap().report.index);
        }
    }
}
