//! Fundamental solutions `γ̇ = J B(t) γ`, `γ(0) = I`, and their iterates.
//!
//! The integrator is the fourth-order Magnus method: each step multiplies by
//! `exp(Ω)` with `Ω` a Hamiltonian matrix built from two Gauss–Legendre
//! samples of `J B`, so every step is symplectic up to rounding and constant
//! coefficients are integrated exactly. Step sizes are controlled by step
//! doubling.

use std::sync::Arc;

use crate::coefficient::{CoefficientPath, Field};
use crate::error::{Error, Result};
use crate::symplectic::{j_matrix, n_matrix, project_symplectic, symplectic_drift, symplectic_inverse, Mat};
use crate::tolerances::{MIN_SAMPLES_PER_UNIT, PROJECTION_PERIOD, STEP_DRIFT_TOL, STEP_LOCAL_TOL};

/// Statistics of one integration.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub projections: usize,
}

struct Magnus<'a> {
    field: &'a Field,
    j: Mat,
}

impl<'a> Magnus<'a> {
    fn new(field: &'a Field) -> Self {
        Self { field, j: j_matrix(field.n()) }
    }

    /// Propagator of one Magnus step from `t` to `t + h`.
    fn propagator(&self, t: f64, h: f64) -> Mat {
        const C: f64 = 0.288_675_134_594_812_9; // √3/6
        let a1 = &self.j * self.field.eval(t + (0.5 - C) * h);
        if self.field.is_constant() {
            return (a1 * h).exp();
        }
        let a2 = &self.j * self.field.eval(t + (0.5 + C) * h);
        let comm = &a2 * &a1 - &a1 * &a2;
        let omega = (&a1 + &a2) * (0.5 * h) + comm * (3f64.sqrt() / 12.0 * h * h);
        omega.exp()
    }

    /// Advances `y` from `t0` to `t1` with adaptive substeps.
    fn advance(&self, y: &Mat, t0: f64, t1: f64, stats: &mut StepStats) -> Result<Mat> {
        let mut y = y.clone();
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(y);
        }
        if self.field.is_constant() {
            let p = self.propagator(t0, span);
            stats.accepted += 1;
            return Ok(p * y);
        }
        let min_h = span.abs() * 1e-9;
        let mut t = t0;
        let mut h = span;
        while (t1 - t) * span.signum() > 0.0 {
            if (t + h - t1) * span.signum() > 0.0 {
                h = t1 - t;
            }
            let full = self.propagator(t, h);
            let half1 = self.propagator(t, 0.5 * h);
            let half2 = self.propagator(t + 0.5 * h, 0.5 * h);
            let fine = half2 * half1;
            let err = (&fine - &full).amax() / fine.amax().max(1.0);
            if err <= STEP_LOCAL_TOL && symplectic_drift(&fine) <= STEP_DRIFT_TOL * fine.amax().max(1.0).powi(2) {
                y = fine * y;
                t += h;
                stats.accepted += 1;
                if stats.accepted % PROJECTION_PERIOD == 0 {
                    y = project_symplectic(&y);
                    stats.projections += 1;
                }
                if err < STEP_LOCAL_TOL / 64.0 {
                    h *= 2.0;
                }
            } else {
                stats.rejected += 1;
                h *= 0.5;
                if h.abs() < min_h {
                    return Err(Error::Integration(format!("step size underflow near t = {t}")));
                }
            }
        }
        Ok(y)
    }
}

#[derive(Clone)]
enum PathSource {
    Flow(Field),
    Closure(Arc<dyn Fn(f64) -> Mat + Send + Sync>),
    Iterate(Arc<IterateData>),
}

struct IterateData {
    base: Arc<SymplecticPath>,
    k: usize,
    gamma1: Mat,
    /// `N γ(1)⁻¹ N γ(1)`
    twist: Mat,
    gamma2_powers: Vec<Mat>,
}

impl IterateData {
    fn assemble(&self, piece: &Mat, r: f64, q: usize) -> Mat {
        let n = self.base.n();
        let local = if r <= 1.0 {
            piece.clone()
        } else {
            let nm = n_matrix(n);
            &nm * piece * symplectic_inverse(&self.gamma1) * &nm * &self.gamma1
        };
        local * &self.gamma2_powers[q]
    }

    fn split(&self, t: f64) -> (usize, f64) {
        let mut q = (t / 2.0).floor() as i64;
        q = q.clamp(0, ((self.k as i64) - 1) / 2);
        let r = t - 2.0 * q as f64;
        (q as usize, r)
    }

    fn eval(&self, t: f64) -> Mat {
        let (q, r) = self.split(t);
        let piece = if r <= 1.0 { self.base.eval(r) } else { self.base.eval(2.0 - r) };
        self.assemble(&piece, r, q)
    }
}

/// A sampled symplectic path together with a way to evaluate it between
/// samples.
#[derive(Clone)]
pub struct SymplecticPath {
    n: usize,
    grid: Vec<f64>,
    samples: Vec<Mat>,
    max_drift: f64,
    stats: StepStats,
    source: PathSource,
}

impl std::fmt::Debug for SymplecticPath {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymplecticPath")
            .field("n", &self.n)
            .field("samples", &self.samples.len())
            .field("t_end", &self.t_end())
            .field("max_drift", &self.max_drift)
            .finish()
    }
}

impl SymplecticPath {
    /// Integrates the field on `[0, t_end]`, storing `intervals + 1` uniform
    /// samples.
    pub fn integrate(field: &Field, t_end: f64, intervals: usize) -> Result<Self> {
        if !(t_end > 0.0 && t_end.is_finite()) || intervals == 0 {
            return Err(Error::InvalidArgument("integration needs t_end > 0 and at least one step".into()));
        }
        let n = field.n();
        let magnus = Magnus::new(field);
        let mut stats = StepStats::default();
        let grid: Vec<f64> = (0..=intervals).map(|i| t_end * i as f64 / intervals as f64).collect();
        let mut samples = Vec::with_capacity(intervals + 1);
        let mut y = Mat::identity(2 * n, 2 * n);
        samples.push(y.clone());
        let step_prop = if field.is_constant() { Some(magnus.propagator(0.0, t_end / intervals as f64)) } else { None };
        for i in 0..intervals {
            y = match &step_prop {
                Some(p) => {
                    stats.accepted += 1;
                    p * &y
                }
                None => magnus.advance(&y, grid[i], grid[i + 1], &mut stats)?,
            };
            if step_prop.is_some() && (i + 1) % PROJECTION_PERIOD == 0 {
                y = project_symplectic(&y);
                stats.projections += 1;
            }
            samples.push(y.clone());
        }
        let max_drift = samples.iter().map(symplectic_drift).fold(0.0, f64::max);
        Ok(Self { n, grid, samples, max_drift, stats, source: PathSource::Flow(field.clone()) })
    }

    /// Integrates the unit field on `[0, s_end]` with the default density.
    pub fn unit(field: &Field, s_end: f64) -> Result<Self> {
        let density = (MIN_SAMPLES_PER_UNIT as f64).max(8.0 * field.norm_bound());
        let intervals = (density * s_end).ceil().max(1.0) as usize;
        Self::integrate(field, s_end, intervals)
    }

    /// A path given by a closure, sampled on a uniform grid.
    pub fn from_fn(n: usize, t_end: f64, intervals: usize, f: impl Fn(f64) -> Mat + Send + Sync + 'static) -> Self {
        let grid: Vec<f64> = (0..=intervals).map(|i| t_end * i as f64 / intervals as f64).collect();
        let samples: Vec<Mat> = grid.iter().map(|&t| f(t)).collect();
        let max_drift = samples.iter().map(symplectic_drift).fold(0.0, f64::max);
        Self { n, grid, samples, max_drift, stats: StepStats::default(), source: PathSource::Closure(Arc::new(f)) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn samples(&self) -> &[Mat] {
        &self.samples
    }

    pub fn t_end(&self) -> f64 {
        *self.grid.last().unwrap()
    }

    pub fn endpoint(&self) -> &Mat {
        self.samples.last().unwrap()
    }

    pub fn max_drift(&self) -> f64 {
        self.max_drift
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// The field this path integrates, if it came from one.
    pub fn field(&self) -> Option<&Field> {
        match &self.source {
            PathSource::Flow(f) => Some(f),
            PathSource::Iterate(d) => d.base.field(),
            PathSource::Closure(_) => None,
        }
    }

    /// `γ(t)` for any `t` in the sampled range.
    pub fn eval(&self, t: f64) -> Mat {
        let t = t.clamp(0.0, self.t_end());
        match &self.source {
            PathSource::Closure(f) => f(t),
            PathSource::Iterate(d) => d.eval(t),
            PathSource::Flow(field) => {
                let i = match self.grid.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
                    Ok(i) => return self.samples[i].clone(),
                    Err(i) => i.saturating_sub(1),
                };
                let magnus = Magnus::new(field);
                let mut stats = StepStats::default();
                // A failure here would already have failed the initial pass.
                magnus
                    .advance(&self.samples[i], self.grid[i], t, &mut stats)
                    .unwrap_or_else(|_| self.samples[i].clone())
            }
        }
    }
}

/// Fundamental solution of the raw coefficient on `[0, t_end]`.
pub fn integrate_fundamental(coefficient: &Arc<CoefficientPath>, t_end: f64, steps: usize) -> Result<SymplecticPath> {
    SymplecticPath::integrate(&coefficient.raw_field(), t_end, steps)
}

/// The `k`-th brake iterate `γᵏ` on `[0, k]` of a path `γ` on `[0, 1]`:
/// `γ(t − 2q)·γ(2)^q` on `[2q, 2q+1]` and
/// `N γ(2q + 2 − t) γ(1)⁻¹ N γ(1)·γ(2)^q` on `[2q+1, 2q+2]`.
///
/// The base path must come from a certified brake-symmetric coefficient,
/// be sampled uniformly, and end at `t = 1`.
pub fn iterate_path(base: &Arc<SymplecticPath>, k: usize) -> Result<SymplecticPath> {
    if k == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    let field = base.field().ok_or(Error::SymmetryNotCertified)?;
    if !field.source().is_certified() {
        return Err(Error::SymmetryNotCertified);
    }
    if (base.t_end() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("base path must live on [0, 1], ends at {}", base.t_end())));
    }
    let n = base.n();
    let nm = n_matrix(n);
    let gamma1 = base.endpoint().clone();
    let twist = &nm * symplectic_inverse(&gamma1) * &nm * &gamma1;
    let qmax = (k + 1) / 2;
    let mut gamma2_powers = vec![Mat::identity(2 * n, 2 * n)];
    for _ in 0..qmax {
        let next = gamma2_powers.last().unwrap() * &twist;
        gamma2_powers.push(next);
    }
    let data = Arc::new(IterateData { base: Arc::clone(base), k, gamma1, twist, gamma2_powers });

    let per_unit = base.grid().len() - 1;
    let intervals = per_unit * k;
    let mut grid = Vec::with_capacity(intervals + 1);
    let mut samples = Vec::with_capacity(intervals + 1);
    for i in 0..=intervals {
        let t = i as f64 / per_unit as f64;
        let (q, r) = data.split(t);
        // index of r on the base grid
        let ri = i - 2 * q * per_unit;
        let piece = if ri <= per_unit { &base.samples()[ri] } else { &base.samples()[2 * per_unit - ri] };
        grid.push(t);
        samples.push(data.assemble(piece, r, q));
    }
    let max_drift = samples.iter().map(symplectic_drift).fold(0.0, f64::max);
    Ok(SymplecticPath { n, grid, samples, max_drift, stats: base.stats(), source: PathSource::Iterate(data) })
}

impl SymplecticPath {
    /// `γ(2) = N γ(1)⁻¹ N γ(1)` for a path built by [`iterate_path`].
    pub fn period_matrix(&self) -> Option<&Mat> {
        match &self.source {
            PathSource::Iterate(d) => Some(&d.twist),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::rotation;
    use nalgebra::DVector;

    fn rot_coeff(b: f64) -> Arc<CoefficientPath> {
        let mut c = CoefficientPath::constant(Mat::identity(2, 2) * b, 1.0).unwrap();
        c.validate_brake_symmetry().unwrap();
        Arc::new(c)
    }

    #[test]
    fn constant_rotation_is_exact() {
        let b = 2.3;
        let p = integrate_fundamental(&rot_coeff(b), 1.0, 300).unwrap();
        for (t, m) in p.grid().iter().zip(p.samples()) {
            assert!((m - rotation(b * t)).amax() < 1e-12);
        }
        assert!((p.eval(0.123_456) - rotation(b * 0.123_456)).amax() < 1e-12);
    }

    #[test]
    fn iterate_of_rotation_continues_the_rotation() {
        let b = 1.7;
        let base = Arc::new(SymplecticPath::unit(&rot_coeff(b).field(), 1.0).unwrap());
        let it = iterate_path(&base, 5).unwrap();
        for (t, m) in it.grid().iter().zip(it.samples()) {
            assert!((m - rotation(b * t)).amax() < 1e-11, "t = {t}");
        }
        assert!((it.eval(3.3) - rotation(b * 3.3)).amax() < 1e-11);
    }

    #[test]
    fn fourier_matches_direct_integration() {
        use crate::coefficient::FourierTerm;
        let d = |v: &[f64]| Mat::from_diagonal(&DVector::from_vec(v.to_vec()));
        let sin = Mat::from_row_slice(2, 2, &[0.0, 0.6, 0.6, 0.0]);
        let term = FourierTerm { frequency: std::f64::consts::PI, cos: d(&[0.4, 0.3]), sin };
        let mut c = CoefficientPath::fourier(d(&[1.0, 1.5]), vec![term], 1.0).unwrap();
        c.validate_brake_symmetry().unwrap();
        let c = Arc::new(c);
        let field = c.field();
        let base = Arc::new(SymplecticPath::unit(&field, 1.0).unwrap());
        let it = iterate_path(&base, 4).unwrap();
        let direct = SymplecticPath::unit(&field, 4.0).unwrap();
        assert!((it.endpoint() - direct.endpoint()).amax() < 1e-8);
        assert!((it.eval(2.5) - direct.eval(2.5)).amax() < 1e-8);
        assert!(it.max_drift() < 1e-9);
    }

    #[test]
    fn uncertified_paths_are_refused() {
        let c = Arc::new(CoefficientPath::constant(Mat::identity(2, 2), 1.0).unwrap());
        let base = Arc::new(SymplecticPath::unit(&c.field(), 1.0).unwrap());
        assert!(matches!(iterate_path(&base, 2), Err(Error::SymmetryNotCertified)));
    }
}
