//! Brake orbits on ellipsoids `Σ (p_k² + q_k²)/r_k² = 1`.
//!
//! The Hamiltonian `H = j²` is quadratic, so each coordinate plane carries
//! a planar brake orbit rotating with angular speed `2/r_j²`, period
//! `τ_j = π r_j²`, and every orbit has the same constant linearisation.
//! Indices of the half-period problem are crossing counts of the plane
//! rotations and have a closed form, which is what the index engine is
//! checked against here.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficient::CoefficientPath;
use crate::error::{Error, Result};
use crate::index::galerkin::TruncationScheme;
use crate::index::splitting::spectral_profile;
use crate::index::{index_l_galerkin, mean_index_closed_form, omega_index_periodic};
use crate::iteration::OrbitData;
use crate::normal_form::{symmetric_normal_form, NormalFormCertificate};
use crate::path::SymplecticPath;
use crate::symplectic::{j_matrix, n_matrix, LagrangianFrame, Mat};

/// Largest denominator the resonance search considers.
pub const RESONANCE_MAX_DENOMINATOR: u64 = 50;
/// Distance to `p/q` below which a frequency ratio counts as rational.
pub const RESONANCE_TOL: f64 = 1e-9;

/// A pair of planes whose frequency ratio `r_j²/r_k²` is numerically `p/q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Resonance {
    pub j: usize,
    pub k: usize,
    pub ratio: f64,
    pub p: u64,
    pub q: u64,
}

/// Closest `p/q` with `q ≤ max_q` from the continued fraction convergents
/// of a positive `x`, if it is within `tol`.
pub fn rational_approximation(x: f64, max_q: u64, tol: f64) -> Option<(u64, u64)> {
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a > 1e12 {
            break;
        }
        let a = a as u64;
        let (h2, k2) = (a * h1 + h0, a * k1 + k0);
        if k2 > max_q {
            break;
        }
        if (x - h2 as f64 / k2 as f64).abs() < tol {
            return Some((h2, k2));
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a as f64;
        if frac < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipsoidModel {
    radii: Vec<f64>,
    resonances: Vec<Resonance>,
}

impl EllipsoidModel {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
            return Err(Error::InvalidArgument("ellipsoid radii must be positive and finite".into()));
        }
        let mut resonances = Vec::new();
        for j in 0..radii.len() {
            for k in j + 1..radii.len() {
                let ratio = (radii[j] / radii[k]).powi(2);
                if let Some((p, q)) = rational_approximation(ratio, RESONANCE_MAX_DENOMINATOR, RESONANCE_TOL) {
                    resonances.push(Resonance { j, k, ratio, p, q });
                }
            }
        }
        Ok(Self { radii, resonances })
    }

    /// `(1, 2^{1/4}, 3^{1/3})` followed by fourth roots of the primes from
    /// 5 on. All squared ratios are irrational.
    pub fn default_radii(n: usize) -> Vec<f64> {
        let mut out = vec![1.0, 2f64.powf(0.25), 3f64.powf(1.0 / 3.0)];
        let mut p = 5u64;
        while out.len() < n {
            if (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0) {
                out.push((p as f64).powf(0.25));
            }
            p += 2;
        }
        out.truncate(n);
        out
    }

    pub fn n(&self) -> usize {
        self.radii.len()
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn resonances(&self) -> &[Resonance] {
        &self.resonances
    }

    pub fn is_resonant(&self) -> bool {
        !self.resonances.is_empty()
    }

    /// `j(x) = sqrt(Σ (p_k² + q_k²)/r_k²)` for `x = (p, q)`.
    pub fn gauge(&self, x: &DVector<f64>) -> f64 {
        self.hamiltonian(x).sqrt()
    }

    /// `H = j²`.
    pub fn hamiltonian(&self, x: &DVector<f64>) -> f64 {
        let n = self.n();
        (0..n).map(|k| (x[k] * x[k] + x[n + k] * x[n + k]) / (self.radii[k] * self.radii[k])).sum()
    }

    /// `H'' = diag(2/r_k², 2/r_k²)`.
    pub fn hessian(&self) -> Mat {
        let n = self.n();
        Mat::from_diagonal(&DVector::from_fn(2 * n, |i, _| 2.0 / self.radii[i % n].powi(2)))
    }

    /// Constant linearisation along orbit `j` (zero based) with base length
    /// `τ_j/2`, certified brake symmetric.
    pub fn linearization(&self, j: usize) -> Result<CoefficientPath> {
        if j >= self.n() {
            return Err(Error::InvalidArgument(format!("orbit {j} out of range for n = {}", self.n())));
        }
        let mut c = CoefficientPath::constant(self.hessian(), 0.5 * PI * self.radii[j].powi(2))?;
        c.validate_brake_symmetry()?;
        Ok(c)
    }

    /// The `n` planar brake orbits.
    pub fn orbits(&self) -> Result<Vec<BrakeOrbit>> {
        let n = self.n();
        (0..n)
            .map(|j| {
                let r = self.radii[j];
                let mut x0 = DVector::zeros(2 * n);
                x0[n + j] = r;
                let mut xi = DVector::zeros(n);
                xi[j] = SQRT_2 / r;
                let mut eta = DVector::zeros(n);
                eta[j] = r / SQRT_2;
                Ok(BrakeOrbit {
                    j,
                    radius: r,
                    period: PI * r * r,
                    x0,
                    xi,
                    eta,
                    coefficient: Arc::new(self.linearization(j)?),
                })
            })
            .collect()
    }

    /// `(i_L0, ν_L0)` of orbit `j` iterated `m` times, counted in closed
    /// form: plane `k` turns by `mπ r_j²/r_k²` over the half periods.
    pub fn closed_form_l0(&self, j: usize, m: usize) -> (i64, usize) {
        let mut index = 0i64;
        let mut nullity = 0usize;
        for k in 0..self.n() {
            let turns = m as f64 * (self.radii[j] / self.radii[k]).powi(2);
            let near = turns.round();
            if (turns - near).abs() < 1e-9 {
                index += near as i64 - 1;
                nullity += 1;
            } else {
                index += turns.floor() as i64;
            }
        }
        (index, nullity)
    }

    /// `Σ_k r_j²/r_k²`, the growth rate of the closed-form count.
    pub fn closed_form_mean(&self, j: usize) -> f64 {
        (0..self.n()).map(|k| (self.radii[j] / self.radii[k]).powi(2)).sum()
    }
}

#[derive(Clone, Debug)]
pub struct BrakeOrbit {
    /// Plane index, zero based.
    pub j: usize,
    pub radius: f64,
    /// `τ_j = π r_j²`
    pub period: f64,
    /// `x(0) = (0, r_j e_j)`
    pub x0: DVector<f64>,
    /// `−ṗ(0)/√2`
    pub xi: DVector<f64>,
    /// `q(0)/√2`
    pub eta: DVector<f64>,
    pub coefficient: Arc<CoefficientPath>,
}

impl BrakeOrbit {
    /// `x(t)`: rotation in plane `j` with angular speed `2/r_j²`.
    pub fn state(&self, t: f64) -> DVector<f64> {
        let n = self.x0.len() / 2;
        let w = 2.0 / (self.radius * self.radius);
        let mut x = DVector::zeros(2 * n);
        x[self.j] = -self.radius * (w * t).sin();
        x[n + self.j] = self.radius * (w * t).cos();
        x
    }

    /// `ẋ(t) = J H'(x(t))`.
    pub fn velocity(&self, model: &EllipsoidModel, t: f64) -> DVector<f64> {
        let n = model.n();
        j_matrix(n) * model.hessian() * self.state(t)
    }

    /// `⟨J x(0), ẋ(0)⟩`, which equals `2H(x(0)) = 2` on the surface.
    pub fn action_density(&self, model: &EllipsoidModel) -> f64 {
        let n = model.n();
        (j_matrix(n) * &self.x0).dot(&self.velocity(model, 0.0))
    }

    /// Largest deviation from `x(−t) = N x(t)` at a few sample times.
    pub fn brake_defect(&self) -> f64 {
        let n = self.x0.len() / 2;
        let nm = n_matrix(n);
        (0..16)
            .map(|i| {
                let t = self.period * i as f64 / 16.0;
                (self.state(-t) - &nm * self.state(t)).amax()
            })
            .fold(0.0, f64::max)
    }

    pub fn orbit_data(&self) -> OrbitData {
        OrbitData { xi: self.xi.clone(), eta: self.eta.clone() }
    }

    /// Normal form of the half-period matrix built from `ξ`, `η`.
    pub fn normal_form(&self) -> Result<NormalFormCertificate> {
        let end = SymplecticPath::unit(&self.coefficient.field(), 1.0)?.endpoint().clone();
        symmetric_normal_form(&end, &self.xi, &self.eta)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitRow {
    /// Plane index, one based in reports.
    pub orbit: usize,
    pub m: usize,
    pub i_l0: i64,
    pub nu_l0: usize,
    pub i_l1: i64,
    pub nu_l1: usize,
    /// Periodic index and nullity of the doubled iterate.
    pub i_periodic: i64,
    pub nu_periodic: usize,
    /// Closed-form `(i_L0, ν_L0)`.
    pub closed_form: (i64, usize),
    pub stabilized: bool,
    /// The orbit's plane resonates with another plane.
    pub resonant: bool,
}

impl OrbitRow {
    /// Engine against closed form. Both L-indices equal the plane count
    /// and the periodic pair follows from `i(γ²) = i_L0 + i_L1 + n`.
    pub fn matches(&self, n: usize) -> bool {
        let (i, nu) = self.closed_form;
        self.i_l0 == i
            && self.nu_l0 == nu
            && self.i_l1 == i
            && self.nu_l1 == nu
            && self.i_periodic == 2 * i + n as i64
            && self.nu_periodic == 2 * nu
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitMean {
    pub orbit: usize,
    /// Mean index from the splitting numbers of the period matrix.
    pub from_profile: f64,
    /// `Σ_k r_j²/r_k²`
    pub closed_form: f64,
    /// `i_L0(γ^m)/m` at the largest tabulated `m`.
    pub tail_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitTable {
    pub radii: Vec<f64>,
    pub m_max: usize,
    pub rows: Vec<OrbitRow>,
    pub means: Vec<OrbitMean>,
}

impl OrbitTable {
    /// Rows where engine and closed form disagree, resonant rows excluded.
    pub fn mismatches(&self) -> Vec<&OrbitRow> {
        self.rows.iter().filter(|r| !r.resonant && !r.matches(self.radii.len())).collect()
    }

    /// Violations of `i_L0(m+1) ≥ i_L0(m) + ν_L0(m)` down each orbit column.
    pub fn monotonicity_violations(&self) -> usize {
        let mut bad = 0;
        for w in self.rows.windows(2) {
            if w[0].orbit == w[1].orbit && w[1].i_l0 < w[0].i_l0 + w[0].nu_l0 as i64 {
                bad += 1;
            }
        }
        bad
    }
}

/// Index table for every orbit and iterate `1..=m_max`, rows ordered by
/// `(orbit, m)`.
pub fn orbit_index_table(model: &EllipsoidModel, m_max: usize, scheme: &TruncationScheme) -> Result<OrbitTable> {
    if m_max == 0 {
        return Err(Error::InvalidArgument("m_max must be at least 1".into()));
    }
    let n = model.n();
    let orbits = model.orbits()?;
    let jobs: Vec<(usize, usize)> = (0..n).flat_map(|j| (1..=m_max).map(move |m| (j, m))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(j, m)| {
            let field = orbits[j].coefficient.field().iterated(m);
            let a0 = index_l_galerkin(&field, &LagrangianFrame::l0(n), scheme)?;
            let a1 = index_l_galerkin(&field, &LagrangianFrame::l1(n), scheme)?;
            let per = omega_index_periodic(&field, 0.0, scheme)?;
            Ok(OrbitRow {
                orbit: j + 1,
                m,
                i_l0: a0.index,
                nu_l0: a0.nullity,
                i_l1: a1.index,
                nu_l1: a1.nullity,
                i_periodic: per.index,
                nu_periodic: per.nullity,
                closed_form: model.closed_form_l0(j, m),
                stabilized: a0.stabilized && a1.stabilized && per.stabilized,
                resonant: model.resonances.iter().any(|r| r.j == j || r.k == j),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let means = orbits
        .iter()
        .map(|o| {
            let profile = spectral_profile(&o.coefficient.field(), scheme)?;
            let last = rows.iter().find(|r| r.orbit == o.j + 1 && r.m == m_max).expect("row present");
            Ok(OrbitMean {
                orbit: o.j + 1,
                from_profile: mean_index_closed_form(&profile),
                closed_form: model.closed_form_mean(o.j),
                tail_ratio: last.i_l0 as f64 / m_max as f64,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(OrbitTable { radii: model.radii.clone(), m_max, rows, means })
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityReport {
    pub orbit_count: usize,
    /// `[n/2] + 1`
    pub lower_bound: usize,
    pub meets_lower_bound: bool,
    /// Asymmetric brake orbits. Every planar orbit of an ellipsoid is
    /// symmetric, so this is zero and the sharper bound reads `n`.
    pub asymmetric: usize,
    pub meets_sharp_bound: bool,
    /// `ν_L0 = 1` for every orbit and `m ≤ m_checked`; `None` when the
    /// model is resonant and the check is skipped.
    pub nondegenerate: Option<bool>,
    pub m_checked: usize,
    pub resonances: Vec<Resonance>,
}

pub fn verify_multiplicity_bound(model: &EllipsoidModel, m_checked: usize, scheme: &TruncationScheme) -> Result<MultiplicityReport> {
    let n = model.n();
    let orbit_count = model.orbits()?.len();
    let nondegenerate = if model.is_resonant() {
        None
    } else {
        let table = orbit_index_table(model, m_checked, scheme)?;
        Some(table.rows.iter().all(|r| r.nu_l0 == 1))
    };
    Ok(MultiplicityReport {
        orbit_count,
        lower_bound: n / 2 + 1,
        meets_lower_bound: orbit_count > n / 2,
        asymmetric: 0,
        meets_sharp_bound: orbit_count == n,
        nondegenerate,
        m_checked,
        resonances: model.resonances.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two() -> EllipsoidModel {
        EllipsoidModel::new(vec![1.0, 2f64.powf(0.25)]).unwrap()
    }

    #[test]
    fn gauge_basics() {
        let e = two();
        let x = DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0]);
        assert_eq!(e.gauge(&DVector::zeros(4)), 0.0);
        assert!((e.gauge(&x) - 1.0).abs() < 1e-15);
        assert!((e.gauge(&(&x * 3.0)) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn default_radii_are_not_resonant() {
        let r = EllipsoidModel::default_radii(6);
        assert!((r[2] - 3f64.powf(1.0 / 3.0)).abs() < 1e-15);
        assert!(!EllipsoidModel::new(r).unwrap().is_resonant());
    }

    #[test]
    fn rational_detection() {
        assert_eq!(rational_approximation(2.0, 50, 1e-9), Some((2, 1)));
        assert_eq!(rational_approximation(0.75, 50, 1e-9), Some((3, 4)));
        assert_eq!(rational_approximation(SQRT_2, 50, 1e-9), None);
        assert!(EllipsoidModel::new(vec![1.0, SQRT_2]).unwrap().is_resonant());
        assert!(!two().is_resonant());
    }

    #[test]
    fn orbits_and_periods() {
        let e = two();
        let o = e.orbits().unwrap();
        assert_eq!(o.len(), 2);
        assert!((o[0].period - PI).abs() < 1e-15);
        assert!((o[1].period - PI * SQRT_2).abs() < 1e-14);
        for orbit in &o {
            assert!((orbit.action_density(&e) - 2.0).abs() < 1e-10);
            assert!(orbit.brake_defect() < 1e-12);
            assert!((e.hamiltonian(&orbit.x0) - 1.0).abs() < 1e-15);
            assert!(orbit.normal_form().unwrap().passes());
        }
    }

    #[test]
    fn first_rows_of_the_table() {
        let e = two();
        assert_eq!(e.closed_form_l0(0, 1), (0, 1));
        assert_eq!(e.closed_form_l0(1, 1), (1, 1));
        let t = orbit_index_table(&e, 3, &TruncationScheme::default()).unwrap();
        assert!(t.mismatches().is_empty());
        assert_eq!(t.monotonicity_violations(), 0);
    }
}
