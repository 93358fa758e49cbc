//! Splitting numbers of the period matrix `M = γ²(2)` and the mean index.
//!
//! `S±(θ)` is the one-sided jump of `φ ↦ i_{e^{iφ}}(γ²)` at `θ`. Off the
//! spectrum of `M` both vanish, so only the unit-circle eigenvalue
//! arguments of `M` (and `θ = 0`, which enters the iteration formulas
//! regardless) are evaluated.

use std::f64::consts::TAU;

use serde::Serialize;

use super::galerkin::TruncationScheme;
use super::omega_index_periodic;
use crate::coefficient::Field;
use crate::error::{Error, Result};
use crate::path::SymplecticPath;
use crate::symplectic::Mat;
use crate::tolerances::{ARGUMENT_MERGE_TOL, SPLITTING_EPS_FLOOR, UNIT_CIRCLE_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplittingEntry {
    /// Argument in `[0, 2π)`.
    pub theta: f64,
    pub s_plus: i64,
    pub s_minus: i64,
    /// Number of eigenvalues of `M` merged into this argument.
    pub multiplicity: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralProfile {
    #[serde(skip)]
    pub m: Mat,
    /// Entry for `θ = 0` first, then the other arguments in increasing order.
    pub entries: Vec<SplittingEntry>,
    /// `Σ_{θ ∈ (0, 2π)} S⁻(θ)`
    pub c: i64,
    pub eps: f64,
    /// `i_1(γ²)`
    pub i_one: i64,
    /// `ν_1(γ²)`
    pub nu_one: usize,
}

impl SpectralProfile {
    pub fn s_plus_one(&self) -> i64 {
        self.entries[0].s_plus
    }

    /// Entries with `θ ∈ (0, 2π)`.
    pub fn interior(&self) -> impl Iterator<Item = &SplittingEntry> {
        self.entries.iter().skip(1)
    }

    /// Largest violation of `S⁺(θ) = S⁻(2π − θ)`; zero when the identity holds.
    pub fn reflection_defect(&self) -> i64 {
        let find = |t: f64| {
            self.interior()
                .find(|e| (e.theta - t).abs() < 10.0 * ARGUMENT_MERGE_TOL)
                .map(|e| e.s_minus)
                .unwrap_or(0)
        };
        self.interior().map(|e| (e.s_plus - find(TAU - e.theta)).abs()).max().unwrap_or(0)
    }
}

/// Unit-circle eigenvalue arguments of `m` in `[0, 2π)` with multiplicity.
pub fn unit_circle_arguments(m: &Mat) -> Vec<(f64, usize)> {
    let eig = m.clone().complex_eigenvalues();
    let mut args: Vec<f64> = eig
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() < UNIT_CIRCLE_TOL)
        .map(|z| {
            let a = z.arg().rem_euclid(TAU);
            if TAU - a < ARGUMENT_MERGE_TOL {
                0.0
            } else {
                a
            }
        })
        .collect();
    args.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<(f64, usize)> = Vec::new();
    for a in args {
        match out.last_mut() {
            Some((b, k)) if (a - *b).abs() < ARGUMENT_MERGE_TOL => *k += 1,
            _ => out.push((a, 1)),
        }
    }
    out
}

/// `(S⁺(θ), S⁻(θ))` with a given one-sided offset `eps`.
pub fn splitting_numbers(field: &Field, theta: f64, eps: f64, scheme: &TruncationScheme) -> Result<(i64, i64)> {
    let at = omega_index_periodic(field, theta, scheme)?.index;
    let plus = omega_index_periodic(field, theta + eps, scheme)?.index;
    let minus = omega_index_periodic(field, theta - eps, scheme)?.index;
    Ok((plus - at, minus - at))
}

/// Splitting numbers at every spectral argument of `γ²(2)`, each checked at
/// `ε` and `ε/2`.
pub fn spectral_profile(field: &Field, scheme: &TruncationScheme) -> Result<SpectralProfile> {
    let m = SymplecticPath::unit(field, 2.0)?.endpoint().clone();
    spectral_profile_of(field, m, scheme)
}

/// As [`spectral_profile`] with the period matrix supplied by the caller.
pub fn spectral_profile_of(field: &Field, m: Mat, scheme: &TruncationScheme) -> Result<SpectralProfile> {
    let args = unit_circle_arguments(&m);
    let mut points: Vec<(f64, usize)> = vec![(0.0, 0)];
    for (a, k) in args {
        if a == 0.0 {
            points[0].1 = k;
        } else {
            points.push((a, k));
        }
    }
    let mut min_gap = TAU;
    for w in points.windows(2) {
        min_gap = min_gap.min(w[1].0 - w[0].0);
    }
    if points.len() > 1 {
        min_gap = min_gap.min(TAU - points.last().unwrap().0);
    }
    let eps = (0.25 * min_gap).min(0.5).max(SPLITTING_EPS_FLOOR);

    let base_one = omega_index_periodic(field, 0.0, scheme)?;
    let mut entries = Vec::with_capacity(points.len());
    for &(theta, mult) in &points {
        let full = splitting_numbers(field, theta, eps, scheme)?;
        let half = splitting_numbers(field, theta, 0.5 * eps, scheme)?;
        if full != half {
            return Err(Error::SplittingUnstable { theta });
        }
        entries.push(SplittingEntry { theta, s_plus: full.0, s_minus: full.1, multiplicity: mult });
    }
    let c = entries.iter().skip(1).map(|e| e.s_minus).sum();
    Ok(SpectralProfile { m, entries, c, eps, i_one: base_one.index, nu_one: base_one.nullity })
}

/// `½(i_1(γ²) + S⁺(1) − C) + Σ_{θ∈(0,2π)} (θ/2π)·S⁻(θ)`, the mean L0-index.
pub fn mean_index_closed_form(profile: &SpectralProfile) -> f64 {
    0.5 * (profile.i_one + profile.s_plus_one() - profile.c) as f64
        + profile.interior().map(|e| e.theta / TAU * e.s_minus as f64).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::CoefficientPath;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn rot(b: f64) -> Field {
        Arc::new(CoefficientPath::constant(Mat::identity(2, 2) * b, 1.0).unwrap()).field()
    }

    #[test]
    fn elliptic_rotation_profile() {
        let p = spectral_profile(&rot(2.0 * PI / 5.0), &TruncationScheme::default()).unwrap();
        assert_eq!(p.entries.len(), 3);
        assert_eq!((p.entries[1].s_plus, p.entries[1].s_minus), (0, 1));
        assert_eq!((p.entries[2].s_plus, p.entries[2].s_minus), (1, 0));
        assert_eq!(p.c, 1);
        assert_eq!(p.reflection_defect(), 0);
        assert!((mean_index_closed_form(&p) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn identity_period_matrix() {
        let p = spectral_profile(&rot(PI), &TruncationScheme::default()).unwrap();
        assert_eq!(p.s_plus_one(), 1);
        assert_eq!(p.c, 0);
        assert!((mean_index_closed_form(&p) - 1.0).abs() < 1e-12);
        let z = spectral_profile(&rot(0.0), &TruncationScheme::default()).unwrap();
        assert!(mean_index_closed_form(&z).abs() < 1e-12);
    }
}
