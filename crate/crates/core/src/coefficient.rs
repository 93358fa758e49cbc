//! Coefficient paths `B(t)` of linear Hamiltonian systems `ẋ = J B(t) x`.
//!
//! A path is given on a fundamental interval `[0, ℓ]` (`ℓ` is the
//! `base_length`). Brake-symmetric paths extend to all of `ℝ` with period
//! `2ℓ` and satisfy `B(ℓ + t) N = N B(ℓ − t)`; equivalently the diagonal
//! blocks are even and the off-diagonal blocks odd in `t`.
//!
//! Index computations never look at `B` directly. They work with a
//! [`Field`], the reparametrisation `s ↦ c·B(c·s)` that moves the base
//! interval (or `k` copies of it) onto `[0, 1]`.

use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic::{checked_symmetric, n_matrix, CMat, LagrangianFrame, Mat};
use crate::tolerances::{BRAKE_SYMMETRY_TOL, SYMMETRY_TOL};

/// One harmonic `cos(ω t)·C + sin(ω t)·S` of a Fourier coefficient path.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierTerm {
    pub frequency: f64,
    pub cos: Mat,
    pub sin: Mat,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientKind {
    Constant(Mat),
    Fourier { constant: Mat, terms: Vec<FourierTerm> },
    /// Piecewise-linear interpolation of samples on `[0, ℓ]`.
    Tabulated { times: Vec<f64>, values: Vec<Mat> },
}

/// A symmetric `2n × 2n` matrix function on `[0, ℓ]`.
#[derive(Clone, Debug)]
pub struct CoefficientPath {
    n: usize,
    base_length: f64,
    kind: CoefficientKind,
    certified: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryReport {
    pub max_violation: f64,
    pub worst_t: f64,
    pub samples: usize,
}

fn check_square(m: &Mat, n2: usize) -> Result<()> {
    if m.nrows() != n2 || m.ncols() != n2 {
        return Err(Error::Dimension(format!("expected {n2}x{n2}, got {}x{}", m.nrows(), m.ncols())));
    }
    Ok(())
}

impl CoefficientPath {
    pub fn constant(b: Mat, base_length: f64) -> Result<Self> {
        let n2 = b.nrows();
        if n2 == 0 || n2 % 2 != 0 {
            return Err(Error::Dimension(format!("coefficient must be 2n x 2n, got {n2}")));
        }
        check_square(&b, n2)?;
        let b = checked_symmetric(&b, SYMMETRY_TOL)?;
        Self::build(n2 / 2, base_length, CoefficientKind::Constant(b))
    }

    pub fn fourier(constant: Mat, terms: Vec<FourierTerm>, base_length: f64) -> Result<Self> {
        let n2 = constant.nrows();
        if n2 == 0 || n2 % 2 != 0 {
            return Err(Error::Dimension(format!("coefficient must be 2n x 2n, got {n2}")));
        }
        check_square(&constant, n2)?;
        let constant = checked_symmetric(&constant, SYMMETRY_TOL)?;
        let mut clean = Vec::with_capacity(terms.len());
        for t in terms {
            check_square(&t.cos, n2)?;
            check_square(&t.sin, n2)?;
            if !t.frequency.is_finite() {
                return Err(Error::InvalidArgument("non-finite Fourier frequency".into()));
            }
            clean.push(FourierTerm {
                frequency: t.frequency,
                cos: checked_symmetric(&t.cos, SYMMETRY_TOL)?,
                sin: checked_symmetric(&t.sin, SYMMETRY_TOL)?,
            });
        }
        Self::build(n2 / 2, base_length, CoefficientKind::Fourier { constant, terms: clean })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<Mat>, base_length: f64) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::InvalidArgument("a table needs at least two samples and one value per time".into()));
        }
        let n2 = values[0].nrows();
        if n2 == 0 || n2 % 2 != 0 {
            return Err(Error::Dimension(format!("coefficient must be 2n x 2n, got {n2}")));
        }
        if (times[0]).abs() > 1e-12 || (times[times.len() - 1] - base_length).abs() > 1e-12 * base_length.max(1.0) {
            return Err(Error::InvalidArgument("table times must start at 0 and end at the base length".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("table times must be strictly increasing".into()));
        }
        let mut clean = Vec::with_capacity(values.len());
        for v in &values {
            check_square(v, n2)?;
            clean.push(checked_symmetric(v, SYMMETRY_TOL)?);
        }
        Self::build(n2 / 2, base_length, CoefficientKind::Tabulated { times, values: clean })
    }

    fn build(n: usize, base_length: f64, kind: CoefficientKind) -> Result<Self> {
        if !(base_length.is_finite() && base_length > 0.0) {
            return Err(Error::InvalidArgument(format!("base length must be positive, got {base_length}")));
        }
        Ok(Self { n, base_length, kind, certified: false })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn base_length(&self) -> f64 {
        self.base_length
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.kind, CoefficientKind::Constant(_))
    }

    pub fn is_certified(&self) -> bool {
        self.certified
    }

    /// `B(t)`. Tabulated paths are extended outside `[0, ℓ]` by the brake
    /// reflection and `2ℓ`-periodicity.
    pub fn eval(&self, t: f64) -> Mat {
        match &self.kind {
            CoefficientKind::Constant(b) => b.clone(),
            CoefficientKind::Fourier { constant, terms } => {
                let mut b = constant.clone();
                for term in terms {
                    let (s, c) = (term.frequency * t).sin_cos();
                    b += &term.cos * c + &term.sin * s;
                }
                b
            }
            CoefficientKind::Tabulated { times, values } => {
                let l = self.base_length;
                let mut r = t.rem_euclid(2.0 * l);
                let reflect = r > l;
                if reflect {
                    r = 2.0 * l - r;
                }
                let b = interpolate(times, values, r);
                if reflect {
                    let nm = n_matrix(self.n);
                    &nm * b * &nm
                } else {
                    b
                }
            }
        }
    }

    /// Checks `B(t + 2ℓ) = B(t)` and `B(ℓ + t)N = N B(ℓ − t)` on a dense grid
    /// and marks the path as certified when both hold.
    pub fn validate_brake_symmetry(&mut self) -> Result<SymmetryReport> {
        let report = self.symmetry_report(512);
        let scale = 1.0 + self.sup_norm_estimate();
        if report.max_violation > BRAKE_SYMMETRY_TOL * scale {
            self.certified = false;
            return Err(Error::SymmetryViolated { violation: report.max_violation, at: report.worst_t });
        }
        self.certified = true;
        Ok(report)
    }

    pub fn symmetry_report(&self, samples: usize) -> SymmetryReport {
        let l = self.base_length;
        let nm = n_matrix(self.n);
        let mut worst = 0.0;
        let mut worst_t = 0.0;
        let mut note = |v: f64, t: f64| {
            if v > worst {
                worst = v;
                worst_t = t;
            }
        };
        // The tabulated extension satisfies the identities by construction;
        // what can fail is continuity at the reflection points.
        if let CoefficientKind::Tabulated { values, .. } = &self.kind {
            for (b, t) in [(&values[0], 0.0), (&values[values.len() - 1], l)] {
                note((&nm * b * &nm - b).amax(), t);
            }
        }
        for i in 0..=samples {
            let t = -l + 3.0 * l * i as f64 / samples as f64;
            note((self.eval(t + 2.0 * l) - self.eval(t)).amax(), t);
            note((self.eval(l + t) * &nm - &nm * self.eval(l - t)).amax(), t);
        }
        SymmetryReport { max_violation: worst, worst_t, samples }
    }

    /// Bound on the largest entry of `B` (exact for constants).
    pub fn sup_norm_estimate(&self) -> f64 {
        match &self.kind {
            CoefficientKind::Constant(b) => b.amax(),
            CoefficientKind::Fourier { constant, terms } => {
                constant.amax() + terms.iter().map(|t| t.cos.amax() + t.sin.amax()).sum::<f64>()
            }
            CoefficientKind::Tabulated { values, .. } => values.iter().map(|v| v.amax()).fold(0.0, f64::max),
        }
    }

    /// Bound on `sup_t ‖B(t)‖₂`.
    pub fn spectral_norm_estimate(&self) -> f64 {
        let norm = |m: &Mat| SymmetricEigen::new(m.clone()).eigenvalues.amax();
        match &self.kind {
            CoefficientKind::Constant(b) => norm(b),
            CoefficientKind::Fourier { constant, terms } => {
                norm(constant) + terms.iter().map(|t| norm(&t.cos) + norm(&t.sin)).sum::<f64>()
            }
            CoefficientKind::Tabulated { values, .. } => values.iter().map(norm).fold(0.0, f64::max),
        }
    }

    /// Returns the path with the base interval rescaled so that the
    /// coefficient lives on `[0, 1]`.
    pub fn field(self: &Arc<Self>) -> Field {
        Field { source: Arc::clone(self), stretch: self.base_length }
    }

    /// The raw path, `s ↦ B(s)`, with no rescaling.
    pub fn raw_field(self: &Arc<Self>) -> Field {
        Field { source: Arc::clone(self), stretch: 1.0 }
    }
}

fn interpolate(times: &[f64], values: &[Mat], t: f64) -> Mat {
    let last = times.len() - 1;
    if t <= times[0] {
        return values[0].clone();
    }
    if t >= times[last] {
        return values[last].clone();
    }
    let i = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => return values[i].clone(),
        Err(i) => i - 1,
    };
    let w = (t - times[i]) / (times[i + 1] - times[i]);
    &values[i] * (1.0 - w) + &values[i + 1] * w
}

/// One exponential term `e^{iκs}·K` of a coefficient written as a finite
/// exponential sum.
#[derive(Clone, Debug)]
pub struct ExpTerm {
    pub kappa: f64,
    pub matrix: CMat,
}

/// The rescaled coefficient `s ↦ c·B(c·s)`. With `c = ℓ` the base interval
/// becomes `[0, 1]`; with `c = kℓ` the `k`-fold iterate does.
#[derive(Clone, Debug)]
pub struct Field {
    source: Arc<CoefficientPath>,
    stretch: f64,
}

impl Field {
    pub fn source(&self) -> &Arc<CoefficientPath> {
        &self.source
    }

    pub fn n(&self) -> usize {
        self.source.n
    }

    pub fn stretch(&self) -> f64 {
        self.stretch
    }

    pub fn is_constant(&self) -> bool {
        self.source.is_constant()
    }

    /// The unit field of the `k`-fold iterate. Only meaningful for
    /// brake-symmetric sources.
    pub fn iterated(&self, k: usize) -> Field {
        Field { source: Arc::clone(&self.source), stretch: self.stretch * k as f64 }
    }

    pub fn eval(&self, s: f64) -> Mat {
        self.source.eval(self.stretch * s) * self.stretch
    }

    /// Bound on the largest entry of the field.
    pub fn sup_norm(&self) -> f64 {
        self.stretch * self.source.sup_norm_estimate()
    }

    /// Spectral-norm bound used to size truncations and grids.
    pub fn norm_bound(&self) -> f64 {
        self.stretch * self.source.spectral_norm_estimate()
    }

    /// The field as a finite exponential sum, when it is one.
    pub fn exp_terms(&self) -> Option<Vec<ExpTerm>> {
        let c = self.stretch;
        let cplx = |m: &Mat, f: Complex64| m.map(|x| f * x);
        match &self.source.kind {
            CoefficientKind::Constant(b) => {
                Some(vec![ExpTerm { kappa: 0.0, matrix: cplx(b, Complex64::new(c, 0.0)) }])
            }
            CoefficientKind::Fourier { constant, terms } => {
                let mut out = vec![ExpTerm { kappa: 0.0, matrix: cplx(constant, Complex64::new(c, 0.0)) }];
                for t in terms {
                    let w = t.frequency * c;
                    // C cos x + S sin x = e^{ix}(C − iS)/2 + e^{−ix}(C + iS)/2
                    let plus = t.cos.map(|x| Complex64::new(0.5 * c * x, 0.0))
                        + t.sin.map(|x| Complex64::new(0.0, -0.5 * c * x));
                    let minus = t.cos.map(|x| Complex64::new(0.5 * c * x, 0.0))
                        + t.sin.map(|x| Complex64::new(0.0, 0.5 * c * x));
                    out.push(ExpTerm { kappa: w, matrix: plus });
                    out.push(ExpTerm { kappa: -w, matrix: minus });
                }
                Some(out)
            }
            CoefficientKind::Tabulated { .. } => None,
        }
    }

    /// Points of `[0, s_end]` where the field may fail to be smooth.
    pub fn kinks(&self, s_end: f64) -> Vec<f64> {
        let CoefficientKind::Tabulated { times, .. } = &self.source.kind else {
            return Vec::new();
        };
        let l = self.source.base_length;
        let t_end = self.stretch * s_end;
        let mut out = Vec::new();
        let periods = (t_end / (2.0 * l)).ceil() as i64 + 1;
        for p in 0..=periods {
            let base = 2.0 * l * p as f64;
            for &t in times {
                for cand in [base + t, base + 2.0 * l - t] {
                    if cand > 0.0 && cand < t_end {
                        out.push(cand / self.stretch);
                    }
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        out
    }

    /// Smallest eigenvalue of the lower-right block of `PᵀB(s)P` over a grid
    /// of `[0, s_end]`, where `P` is the unitary model of `frame`.
    pub fn min_lower_block_eigenvalue(&self, frame: &LagrangianFrame, s_end: f64) -> f64 {
        let n = self.n();
        let p = frame.unitary_model();
        let lower = |s: f64| {
            let b = p.transpose() * self.eval(s) * &p;
            let blk = b.view((n, n), (n, n)).into_owned();
            SymmetricEigen::new(blk).eigenvalues.min()
        };
        if self.is_constant() {
            return lower(0.0);
        }
        let samples = 512usize.max((64.0 * s_end * (1.0 + self.norm_bound())) as usize);
        let mut grid: Vec<f64> = (0..=samples).map(|i| s_end * i as f64 / samples as f64).collect();
        grid.extend(self.kinks(s_end));
        grid.into_iter().map(lower).fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn diag(v: &[f64]) -> Mat {
        Mat::from_diagonal(&DVector::from_vec(v.to_vec()))
    }

    #[test]
    fn constant_commuting_with_n_is_brake_symmetric() {
        let mut c = CoefficientPath::constant(diag(&[1.0, 2.0]), 1.0).unwrap();
        c.validate_brake_symmetry().unwrap();
        assert!(c.is_certified());
    }

    #[test]
    fn off_diagonal_constant_is_not_brake_symmetric() {
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let mut c = CoefficientPath::constant(b, 1.0).unwrap();
        assert!(matches!(c.validate_brake_symmetry(), Err(Error::SymmetryViolated { .. })));
    }

    #[test]
    fn odd_off_diagonal_fourier_is_brake_symmetric() {
        let sin = Mat::from_row_slice(2, 2, &[0.0, 0.7, 0.7, 0.0]);
        let term = FourierTerm { frequency: std::f64::consts::PI, cos: diag(&[0.3, -0.2]), sin };
        let mut c = CoefficientPath::fourier(diag(&[1.0, 2.0]), vec![term], 1.0).unwrap();
        c.validate_brake_symmetry().unwrap();
    }

    #[test]
    fn asymmetric_matrix_is_rejected() {
        let b = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(CoefficientPath::constant(b, 1.0), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn tabulated_extension_reflects() {
        let v0 = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let v1 = Mat::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 4.0]);
        let mut c = CoefficientPath::tabulated(vec![0.0, 2.0], vec![v0, v1], 2.0).unwrap();
        c.validate_brake_symmetry().unwrap();
        // B(3) = N B(1) N, and B(1) is the midpoint.
        assert!((c.eval(3.0) - diag(&[2.0, 3.0])).amax() < 1e-14);
        assert!((c.eval(-1.0) - c.eval(1.0)).amax() < 1e-14);
    }

    #[test]
    fn field_rescales() {
        let c = Arc::new(CoefficientPath::constant(diag(&[1.0, 1.0]), 2.0).unwrap());
        let f = c.field();
        assert!((f.eval(0.3) - diag(&[2.0, 2.0])).amax() < 1e-15);
        assert!((f.iterated(3).eval(0.1) - diag(&[6.0, 6.0])).amax() < 1e-15);
    }

    #[test]
    fn exp_terms_reproduce_fourier_values() {
        let sin = Mat::from_row_slice(2, 2, &[0.0, 0.7, 0.7, 0.0]);
        let term = FourierTerm { frequency: 2.0, cos: diag(&[0.3, -0.2]), sin };
        let c = Arc::new(CoefficientPath::fourier(diag(&[1.0, 2.0]), vec![term], 1.5).unwrap());
        let f = c.field();
        let terms = f.exp_terms().unwrap();
        for &s in &[0.0, 0.37, 0.9] {
            let mut acc = CMat::zeros(2, 2);
            for t in &terms {
                acc += &t.matrix * Complex64::from_polar(1.0, t.kappa * s);
            }
            assert!((acc.map(|z| z.re) - f.eval(s)).amax() < 1e-13);
            assert!(acc.map(|z| z.im).amax() < 1e-13);
        }
    }
}
