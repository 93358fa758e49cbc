//! Index computations: L-indices by three independent routes, the twisted
//! L-ω-indices, periodic ω-indices of the doubled path, splitting numbers
//! and mean indices.
//!
//! Fields passed in here are unit fields (see [`Field`]): the base interval
//! is `[0, 1]` and the brake extension has period 2.

pub mod crossing;
pub mod galerkin;
pub mod splitting;
pub mod winding;

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::coefficient::Field;
use crate::error::{Error, Result};
use crate::symplectic::{FrameLabel, LagrangianFrame};
use galerkin::{relative_morse_index, LagrangianSpace, PeriodicSpace, RelativeIndex, TruncationScheme};

pub use crossing::{index_l_crossings, CrossingReport};
pub use splitting::{mean_index_closed_form, spectral_profile, splitting_numbers, SpectralProfile};
pub use winding::{index_l_winding, WindingReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Galerkin,
    Winding,
    Crossing,
}

/// What the index is taken relative to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Lagrangian(FrameLabel),
    Periodic,
}

/// An `(index, nullity)` pair with enough provenance to reproduce it.
#[derive(Clone, Debug, Serialize)]
pub struct IndexReport {
    pub index: i64,
    pub nullity: usize,
    pub target: Target,
    /// Twist angle. `None` stands for `ω = 1` (no twist).
    pub theta: Option<f64>,
    pub algorithm: Algorithm,
    pub m_used: Option<usize>,
    pub d_used: Option<f64>,
    pub stabilized: bool,
    /// `m⁻_d(P_m A P_m)` matched its structural value at every level.
    pub baseline_ok: bool,
}

impl IndexReport {
    pub fn pair(&self) -> (i64, usize) {
        (self.index, self.nullity)
    }

    fn from_galerkin(r: &RelativeIndex, shift: i64, target: Target, theta: Option<f64>) -> Self {
        IndexReport {
            index: r.index + shift,
            nullity: r.nullity,
            target,
            theta,
            algorithm: Algorithm::Galerkin,
            m_used: Some(r.m),
            d_used: Some(r.d),
            stabilized: r.stabilized,
            baseline_ok: r.baseline_ok,
        }
    }
}

/// `(i_L, ν_L)` of the fundamental solution of `field` on `[0, 1]`, from
/// `i_L = I(A, A − B) − n`.
pub fn index_l_galerkin(field: &Field, frame: &LagrangianFrame, scheme: &TruncationScheme) -> Result<IndexReport> {
    check_frame(field, frame)?;
    let space = LagrangianSpace { field, frame: frame.basis().clone(), theta: 0.0 };
    let r = relative_morse_index(&space, scheme);
    Ok(IndexReport::from_galerkin(&r, -(field.n() as i64), Target::Lagrangian(frame.label()), None))
}

/// `(i^L_ω, ν^L_ω)` with `ω = e^{iθ}`, `θ ∈ (0, π)`: the boundary condition
/// at the right end is twisted to `e^{θJ}L`.
pub fn omega_index_l(field: &Field, frame: &LagrangianFrame, theta: f64, scheme: &TruncationScheme) -> Result<IndexReport> {
    check_frame(field, frame)?;
    if !(theta > 0.0 && theta < PI) {
        return Err(Error::InvalidArgument(format!("twist angle {theta} is outside (0, π)")));
    }
    let space = LagrangianSpace { field, frame: frame.basis().clone(), theta };
    let r = relative_morse_index(&space, scheme);
    Ok(IndexReport::from_galerkin(&r, 0, Target::Lagrangian(frame.label()), Some(theta)))
}

/// `(i_ω(γ²), ν_ω(γ²))` for `ω = e^{iφ}`, computed on the doubled
/// interval `[0, 2]` where the brake extension of the field lives.
pub fn omega_index_periodic(field: &Field, phi: f64, scheme: &TruncationScheme) -> Result<IndexReport> {
    let phi = phi.rem_euclid(TAU);
    // Snap angles that are 1 up to rounding so the trivial-twist shift is
    // applied consistently.
    let phi = if phi < 1e-14 || TAU - phi < 1e-14 { 0.0 } else { phi };
    let space = PeriodicSpace { field, phi };
    let r = relative_morse_index(&space, scheme);
    let (shift, theta) = if phi == 0.0 { (-(field.n() as i64), None) } else { (0, Some(phi)) };
    Ok(IndexReport::from_galerkin(&r, shift, Target::Periodic, theta))
}

/// The L-index from all routes that apply: Galerkin always, winding when
/// the endpoint is nondegenerate, crossings when the conjugated lower
/// block is positive definite.
#[derive(Clone, Debug, Serialize)]
pub struct OracleComparison {
    pub frame: FrameLabel,
    pub galerkin: IndexReport,
    pub winding: Option<i64>,
    pub crossing: Option<i64>,
}

impl OracleComparison {
    pub fn agree(&self) -> bool {
        let i = self.galerkin.index;
        self.winding.is_none_or(|w| w == i) && self.crossing.is_none_or(|c| c == i)
    }
}

pub fn compare_oracles(field: &Field, frame: &LagrangianFrame, scheme: &TruncationScheme) -> Result<OracleComparison> {
    let galerkin = index_l_galerkin(field, frame, scheme)?;
    let path = crate::path::SymplecticPath::unit(field, 1.0)?;
    let winding = match index_l_winding(&path, frame) {
        Ok(w) => Some(w.report.index),
        Err(Error::DegenerateEndpoint(_)) => None,
        Err(e) => return Err(e),
    };
    let crossing = match index_l_crossings(&path, frame) {
        Ok(c) => Some(c.report.index),
        Err(Error::NotPositive(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(OracleComparison { frame: frame.label(), galerkin, winding, crossing })
}

fn check_frame(field: &Field, frame: &LagrangianFrame) -> Result<()> {
    if field.n() != frame.n() {
        return Err(Error::Dimension(format!("field has n = {}, frame has n = {}", field.n(), frame.n())));
    }
    Ok(())
}
