//! Truncated quadratic forms and the relative Morse index.
//!
//! Two families of trial spaces are supported.
//!
//! * [`LagrangianSpace`]: real functions `exp((θ + jπ)tJ)·c` on `[0, 1]`
//!   with `|j| ≤ m` and `c` running over an orthonormal frame of a
//!   Lagrangian subspace `L`. With `θ = 0` this is the space of paths
//!   starting and ending in `L`; with `θ ∈ (0, π)` it is the twisted space
//!   used by the ω-indices relative to `L`.
//! * [`PeriodicSpace`]: complex functions `e^{i(φ/2 + jπ)t}·e_r` on `[0, 2]`,
//!   which satisfy `x(2) = e^{iφ} x(0)`.
//!
//! On each space `A` is the form `∫⟨−Jẋ, y⟩` and `B` the form `∫⟨B(t)x, y⟩`.
//! Eigenvalues are computed in the `W^{1/2}`-type scaling where the basis
//! function of frequency `j` is divided by `√(1 + |j|)`, which keeps the
//! spectrum of `A` bounded away from zero apart from its kernel.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use serde::Serialize;

use crate::coefficient::Field;
use crate::quadrature::composite;
use crate::symplectic::{j_matrix, CMat, Mat};
use crate::tolerances::{BLOCK_SPLIT_TOL, D_CAP, NEAR_ZERO_CLUSTER_RATIO, ZERO_EIGEN_TOL};

/// A Hermitian matrix, real when possible.
#[derive(Clone, Debug)]
pub enum Herm {
    Real(Mat),
    Complex(CMat),
}

impl Herm {
    pub fn dim(&self) -> usize {
        match self {
            Herm::Real(m) => m.nrows(),
            Herm::Complex(m) => m.nrows(),
        }
    }

    pub fn scaled(&self, w: &[f64]) -> Herm {
        let s: Vec<f64> = w.iter().map(|x| 1.0 / x.sqrt()).collect();
        match self {
            Herm::Real(m) => Herm::Real(Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * s[i] * s[j])),
            Herm::Complex(m) => Herm::Complex(CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (s[i] * s[j]))),
        }
    }

    pub fn minus(&self, other: &Herm) -> Herm {
        match (self, other) {
            (Herm::Real(a), Herm::Real(b)) => Herm::Real(a - b),
            (Herm::Complex(a), Herm::Complex(b)) => Herm::Complex(a - b),
            (Herm::Real(a), Herm::Complex(b)) => Herm::Complex(a.map(|x| Complex64::new(x, 0.0)) - b),
            (Herm::Complex(a), Herm::Real(b)) => Herm::Complex(a - b.map(|x| Complex64::new(x, 0.0))),
        }
    }

    fn times(&self, s: f64) -> Herm {
        match self {
            Herm::Real(a) => Herm::Real(a * s),
            Herm::Complex(a) => Herm::Complex(a * Complex64::new(s, 0.0)),
        }
    }

    fn abs_entry(&self, i: usize, j: usize) -> f64 {
        match self {
            Herm::Real(m) => m[(i, j)].abs(),
            Herm::Complex(m) => m[(i, j)].norm(),
        }
    }

    fn max_abs(&self) -> f64 {
        match self {
            Herm::Real(m) => m.amax(),
            Herm::Complex(m) => m.iter().map(|z| z.norm()).fold(0.0, f64::max),
        }
    }

    /// Eigenvalues, computed block by block after splitting the matrix into
    /// its connected components.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.dim();
        if n == 0 {
            return Vec::new();
        }
        let cut = BLOCK_SPLIT_TOL * self.max_abs();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if self.abs_entry(i, j) > cut {
                    let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
        for i in 0..n {
            let r = find(&mut parent, i);
            groups.entry(r).or_default().push(i);
        }
        let mut out = Vec::with_capacity(n);
        for idx in groups.values() {
            let k = idx.len();
            match self {
                Herm::Real(m) => {
                    if k == 1 {
                        out.push(m[(idx[0], idx[0])]);
                        continue;
                    }
                    let sub = Mat::from_fn(k, k, |a, b| m[(idx[a], idx[b])]);
                    out.extend(SymmetricEigen::new(sub).eigenvalues.iter());
                }
                Herm::Complex(m) => {
                    if k == 1 {
                        out.push(m[(idx[0], idx[0])].re);
                        continue;
                    }
                    let sub = CMat::from_fn(k, k, |a, b| m[(idx[a], idx[b])]);
                    out.extend(SymmetricEigen::new(sub).eigenvalues.iter());
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }
}

/// The forms `A` and `B` on one truncation, with the scaling weights of the
/// basis.
#[derive(Clone, Debug)]
pub struct FormPair {
    pub a: Herm,
    pub b: Herm,
    pub weights: Vec<f64>,
}

/// A family of trial spaces indexed by the truncation level `m`.
pub trait FormFamily: Sync {
    fn assemble(&self, m: usize) -> FormPair;
    /// Smallest level worth trying.
    fn m_start(&self) -> usize;
    /// `m⁻(P_m A P_m)` predicted by the structure of the space.
    fn expected_negative_a(&self, m: usize) -> usize;
}

/// How the d-window is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum DPolicy {
    /// `min(¼·smallest nonzero |λ|, 0.1)`, re-estimated at every level.
    Auto,
    Fixed(f64),
}

/// Truncation levels tried by [`relative_morse_index`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncationScheme {
    /// Overrides the family's own starting level.
    pub m_start: Option<usize>,
    pub m_step: usize,
    pub m_max: usize,
    /// Number of consecutive levels that must agree.
    pub window: usize,
    pub d: DPolicy,
}

impl Default for TruncationScheme {
    fn default() -> Self {
        Self { m_start: None, m_step: 2, m_max: 200, window: 3, d: DPolicy::Auto }
    }
}

impl TruncationScheme {
    pub fn with_m_max(mut self, m_max: usize) -> Self {
        self.m_max = m_max;
        self
    }

    /// A scheme starting `extra` levels above the family's own choice.
    pub fn finer(mut self, extra: usize) -> Self {
        self.m_start = Some(self.m_start.unwrap_or(0) + extra);
        self
    }
}

/// Counts at one truncation level.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelCount {
    pub m: usize,
    pub dim: usize,
    pub d: f64,
    /// `m⁻_d(P_m A P_m)`
    pub neg_a: usize,
    /// `m⁻_d(P_m (A − B) P_m)`
    pub neg_ab: usize,
    /// `m⁰_d(P_m (A − B) P_m)`
    pub zero_ab: usize,
    pub expected_neg_a: usize,
}

impl LevelCount {
    pub fn relative(&self) -> i64 {
        self.neg_ab as i64 - self.neg_a as i64
    }
}

/// `I(A, A − B)` and `m⁰` of the last level, with the levels visited.
#[derive(Clone, Debug, Serialize)]
pub struct RelativeIndex {
    pub index: i64,
    pub nullity: usize,
    pub m: usize,
    pub d: f64,
    pub stabilized: bool,
    /// `m⁻_d(P_m A P_m)` matched the structural prediction at every level.
    pub baseline_ok: bool,
    pub levels: Vec<LevelCount>,
}

fn pick_d(policy: DPolicy, spectra: &[&[f64]]) -> f64 {
    match policy {
        DPolicy::Fixed(d) => d,
        DPolicy::Auto => {
            let gap = spectra
                .iter()
                .flat_map(|s| s.iter())
                .map(|x| x.abs())
                .filter(|&x| x > ZERO_EIGEN_TOL)
                .fold(f64::INFINITY, f64::min);
            (0.25 * gap).min(D_CAP)
        }
    }
}

/// Counts of one level.
pub fn count_level(pair: &FormPair, m: usize, expected_neg_a: usize, policy: DPolicy) -> LevelCount {
    count_level_with_spectrum(pair, m, expected_neg_a, policy).0
}

fn count_level_with_spectrum(pair: &FormPair, m: usize, expected_neg_a: usize, policy: DPolicy) -> (LevelCount, Vec<f64>) {
    let a = pair.a.scaled(&pair.weights);
    let ab = pair.a.minus(&pair.b).scaled(&pair.weights);
    let la = a.eigenvalues();
    let lab = ab.eigenvalues();
    let d = pick_d(policy, &[&la, &lab]);
    let lc = LevelCount {
        m,
        dim: pair.a.dim(),
        d,
        neg_a: la.iter().filter(|&&x| x <= -d).count(),
        neg_ab: lab.iter().filter(|&&x| x <= -d).count(),
        zero_ab: lab.iter().filter(|&&x| x.abs() < d).count(),
        expected_neg_a,
    };
    (lc, lab)
}

/// Largest magnitude in a group of small eigenvalues set apart from the
/// rest of the spectrum by [`NEAR_ZERO_CLUSTER_RATIO`], when that group is
/// not yet below [`ZERO_EIGEN_TOL`].
fn unresolved_cluster(spectrum: &[f64]) -> Option<f64> {
    let mut mags: Vec<f64> = spectrum.iter().map(|x| x.abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for k in 1..mags.len().min(17) {
        let top = mags[k - 1];
        if top <= ZERO_EIGEN_TOL {
            continue;
        }
        return (top < NEAR_ZERO_CLUSTER_RATIO * mags[k]).then_some(top);
    }
    None
}

/// Raises the truncation level until `window` consecutive levels agree on
/// `(I, m⁰)`, or `m_max` is passed.
///
/// Agreement is not enough near a degenerate problem: a kernel direction
/// shows up at finite level as an eigenvalue of `A − B` that is small but
/// above the zero tolerance, and it shrinks only polynomially in `m`. When
/// such an isolated group is present the level keeps doubling until the
/// group falls below the tolerance or stops shrinking.
pub fn relative_morse_index(family: &dyn FormFamily, scheme: &TruncationScheme) -> RelativeIndex {
    let step = scheme.m_step.max(1);
    let window = scheme.window.max(1);
    let mut m = scheme.m_start.unwrap_or_else(|| family.m_start()).max(family.m_start().min(1));
    if let Some(s) = scheme.m_start {
        m = m.max(s);
    }
    let mut levels: Vec<LevelCount> = Vec::new();
    let mut spectrum;
    let stable = loop {
        let pair = family.assemble(m);
        let (lc, lab) = count_level_with_spectrum(&pair, m, family.expected_negative_a(m), scheme.d);
        spectrum = lab;
        levels.push(lc);
        let stable = levels.len() >= window
            && levels[levels.len() - window..]
                .iter()
                .all(|l| l.relative() == lc.relative() && l.zero_ab == lc.zero_ab);
        if stable || m + step > scheme.m_max {
            break stable;
        }
        m += step;
    };
    let mut cluster = unresolved_cluster(&spectrum);
    while let Some(c) = cluster {
        let next = (2 * m).min(scheme.m_max);
        if next <= m {
            break;
        }
        m = next;
        let pair = family.assemble(m);
        let (lc, lab) = count_level_with_spectrum(&pair, m, family.expected_negative_a(m), scheme.d);
        levels.push(lc);
        cluster = unresolved_cluster(&lab).filter(|&c2| c2 < 0.5 * c);
    }
    let last = *levels.last().unwrap();
    RelativeIndex {
        index: last.relative(),
        nullity: last.zero_ab,
        m: last.m,
        d: last.d,
        stabilized: stable,
        baseline_ok: levels.iter().all(|l| l.neg_a == l.expected_neg_a),
        levels,
    }
}

/// `−sf{A − sB, s ∈ [0, 1]}` on a single truncation, counted by tracking
/// the number of eigenvalues below `−d` along a grid in `s` that is refined
/// until no step changes the count by more than one.
pub fn spectral_flow_index(pair: &FormPair, d: f64) -> i64 {
    let a = pair.a.scaled(&pair.weights);
    let b = pair.b.scaled(&pair.weights);
    let count = |s: f64| a.minus(&b.times(s)).eigenvalues().iter().filter(|&&x| x <= -d).count() as i64;
    let mut flow = 0i64;
    let mut stack = vec![(0.0f64, count(0.0), 1.0f64, count(1.0))];
    let mut guard = 0;
    while let Some((s0, c0, s1, c1)) = stack.pop() {
        guard += 1;
        if (c1 - c0).abs() <= 1 || s1 - s0 < 1e-9 || guard > 10_000 {
            flow += c1 - c0;
            continue;
        }
        let sm = 0.5 * (s0 + s1);
        let cm = count(sm);
        stack.push((sm, cm, s1, c1));
        stack.push((s0, c0, sm, cm));
    }
    flow
}

/// `∫₀ᵀ e^{iλt} dt`.
fn exp_integral(lambda: f64, t: f64) -> Complex64 {
    let x = 0.5 * lambda * t;
    let sinc = if x.abs() < 1e-8 { 1.0 - x * x / 6.0 } else { x.sin() / x };
    Complex64::from_polar(t * sinc, x)
}

fn frequency_bound(field: &Field) -> f64 {
    field.exp_terms().map(|ts| ts.iter().map(|t| t.kappa.abs()).fold(0.0, f64::max)).unwrap_or(0.0)
}

fn default_m_start(field: &Field, horizon: f64) -> usize {
    // Modes with |j|π well above ‖B‖ (and above the field's own
    // frequencies) cannot change sign.
    let nb = field.norm_bound() + frequency_bound(field) / horizon.max(1.0);
    ((nb / PI).ceil() as usize + 2).max(field.n())
}

/// Trial space of functions `exp((θ + jπ)tJ)·c` on `[0, 1]`.
pub struct LagrangianSpace<'a> {
    pub field: &'a Field,
    /// Orthonormal frame of `L`, `2n × n`.
    pub frame: Mat,
    pub theta: f64,
}

impl<'a> LagrangianSpace<'a> {
    fn frequencies(&self, m: usize) -> Vec<f64> {
        let n = self.frame.ncols();
        let mut out = Vec::with_capacity((2 * m + 1) * n);
        for j in -(m as i64)..=(m as i64) {
            for _ in 0..n {
                out.push(self.theta + j as f64 * PI);
            }
        }
        out
    }

    fn weights(&self, m: usize) -> Vec<f64> {
        let n = self.frame.ncols();
        let mut out = Vec::with_capacity((2 * m + 1) * n);
        for j in -(m as i64)..=(m as i64) {
            for _ in 0..n {
                out.push(1.0 + j.unsigned_abs() as f64);
            }
        }
        out
    }

    fn b_exact(&self, m: usize) -> Option<Mat> {
        let terms = self.field.exp_terms()?;
        let n = self.frame.ncols();
        let n2 = 2 * n;
        let nu = self.frequencies(m);
        let dim = nu.len();
        let j = j_matrix(n).map(|x| Complex64::new(x, 0.0));
        let p_plus = (CMat::identity(n2, n2) - &j * Complex64::new(0.0, 1.0)) * Complex64::new(0.5, 0.0);
        let c = self.frame.map(|x| Complex64::new(x, 0.0));
        let a_one = &p_plus * &c; // 2n × n
        let mut a_plus = CMat::zeros(n2, dim);
        for p in 0..dim {
            a_plus.set_column(p, &a_one.column(p % n));
        }
        let a_minus = a_plus.map(|z| z.conj());
        let stacks = [(1.0, &a_plus), (-1.0, &a_minus)];
        let mut h = CMat::zeros(dim, dim);
        for term in &terms {
            for &(sp, ap) in &stacks {
                let ka = &term.matrix * ap;
                for &(sq, aq) in &stacks {
                    let prod = aq.transpose() * &ka;
                    for p in 0..dim {
                        for q in 0..dim {
                            let lam = sq * nu[q] + sp * nu[p] + term.kappa;
                            h[(q, p)] += prod[(q, p)] * exp_integral(lam, 1.0);
                        }
                    }
                }
            }
        }
        let re = h.map(|z| z.re);
        Some((&re + re.transpose()) * 0.5)
    }

    fn b_quadrature(&self, m: usize) -> Mat {
        let nu = self.frequencies(m);
        let dim = nu.len();
        let n = self.frame.ncols();
        let n2 = 2 * n;
        let max_freq = nu.iter().map(|x| x.abs()).fold(0.0, f64::max) + self.field.norm_bound();
        let panel = (2.0 / max_freq.max(1.0)).min(0.25);
        let rule = composite(0.0, 1.0, &self.field.kinks(1.0), panel, 16);
        let j = j_matrix(n);
        let id = Mat::identity(n2, n2);
        let mut g = Mat::zeros(dim, dim);
        let mut phi = Mat::zeros(n2, dim);
        for (t, w) in rule {
            for p in 0..dim {
                let (s, c) = (nu[p] * t).sin_cos();
                let e = &id * c + &j * s;
                phi.set_column(p, &(e * self.frame.column(p % n)));
            }
            let b = self.field.eval(t);
            g += phi.transpose() * b * &phi * w;
        }
        (&g + g.transpose()) * 0.5
    }
}

impl FormFamily for LagrangianSpace<'_> {
    fn assemble(&self, m: usize) -> FormPair {
        let nu = self.frequencies(m);
        // exp(νtJ)c are orthonormal in L²(0,1) across distinct j, and
        // cᵀJc' = 0 inside a Lagrangian frame, so A is diagonal.
        let a = Mat::from_diagonal(&nalgebra::DVector::from_vec(nu));
        let b = self.b_exact(m).unwrap_or_else(|| self.b_quadrature(m));
        FormPair { a: Herm::Real(a), b: Herm::Real(b), weights: self.weights(m) }
    }

    fn m_start(&self) -> usize {
        default_m_start(self.field, 1.0)
    }

    fn expected_negative_a(&self, m: usize) -> usize {
        self.frequencies(m).iter().filter(|&&x| x < 0.0).count()
    }
}

/// Trial space of functions `e^{i(φ/2 + jπ)t}·e_r` on `[0, 2]`.
pub struct PeriodicSpace<'a> {
    pub field: &'a Field,
    /// Argument of `ω = e^{iφ}`, taken in `[0, 2π)`.
    pub phi: f64,
}

impl<'a> PeriodicSpace<'a> {
    fn nus(&self, m: usize) -> Vec<f64> {
        (-(m as i64)..=(m as i64)).map(|j| 0.5 * self.phi + j as f64 * PI).collect()
    }

    fn weights(&self, m: usize) -> Vec<f64> {
        let n2 = 2 * self.field.n();
        let mut out = Vec::with_capacity((2 * m + 1) * n2);
        for j in -(m as i64)..=(m as i64) {
            for _ in 0..n2 {
                out.push(1.0 + j.unsigned_abs() as f64);
            }
        }
        out
    }

    fn b_exact(&self, m: usize) -> Option<CMat> {
        let terms = self.field.exp_terms()?;
        let n2 = 2 * self.field.n();
        let nus = self.nus(m);
        let dim = nus.len() * n2;
        let mut h = CMat::zeros(dim, dim);
        for term in &terms {
            for (jp, &np) in nus.iter().enumerate() {
                for (jq, &nq) in nus.iter().enumerate() {
                    let e = exp_integral(np - nq + term.kappa, 2.0);
                    if e.norm() == 0.0 {
                        continue;
                    }
                    for r in 0..n2 {
                        for s in 0..n2 {
                            h[(jq * n2 + s, jp * n2 + r)] += term.matrix[(s, r)] * e;
                        }
                    }
                }
            }
        }
        Some((&h + h.adjoint()) * Complex64::new(0.5, 0.0))
    }

    fn b_quadrature(&self, m: usize) -> CMat {
        let n2 = 2 * self.field.n();
        let nus = self.nus(m);
        let dim = nus.len() * n2;
        let max_freq = 2.0 * nus.iter().map(|x| x.abs()).fold(0.0, f64::max) + self.field.norm_bound();
        let panel = (2.0 / max_freq.max(1.0)).min(0.25);
        let rule = composite(0.0, 2.0, &self.field.kinks(2.0), panel, 16);
        let mut h = CMat::zeros(dim, dim);
        for (t, w) in rule {
            let b = self.field.eval(t);
            for (jp, &np) in nus.iter().enumerate() {
                for (jq, &nq) in nus.iter().enumerate() {
                    let e = Complex64::from_polar(w, (np - nq) * t);
                    for r in 0..n2 {
                        for s in 0..n2 {
                            h[(jq * n2 + s, jp * n2 + r)] += e * b[(s, r)];
                        }
                    }
                }
            }
        }
        (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
    }
}

impl FormFamily for PeriodicSpace<'_> {
    fn assemble(&self, m: usize) -> FormPair {
        let n = self.field.n();
        let n2 = 2 * n;
        let nus = self.nus(m);
        let dim = nus.len() * n2;
        // (A x_p, x_q) = 2 δ_{jk} ν_j (−iJ)_{sr}
        let j = j_matrix(n);
        let mut a = CMat::zeros(dim, dim);
        for (jj, &nu) in nus.iter().enumerate() {
            for r in 0..n2 {
                for s in 0..n2 {
                    a[(jj * n2 + s, jj * n2 + r)] = Complex64::new(0.0, -2.0 * nu * j[(s, r)]);
                }
            }
        }
        let b = self.b_exact(m).unwrap_or_else(|| self.b_quadrature(m));
        FormPair { a: Herm::Complex(a), b: Herm::Complex(b), weights: self.weights(m) }
    }

    fn m_start(&self) -> usize {
        default_m_start(self.field, 2.0)
    }

    fn expected_negative_a(&self, m: usize) -> usize {
        let n = self.field.n();
        self.nus(m).iter().filter(|x| x.abs() > 1e-14).count() * n
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficient::CoefficientPath;
    use crate::symplectic::LagrangianFrame;
    use std::sync::Arc;

    fn rot(b: f64) -> Field {
        Arc::new(CoefficientPath::constant(Mat::identity(2, 2) * b, 1.0).unwrap()).field()
    }

    #[test]
    fn exact_and_quadrature_assembly_agree() {
        use crate::coefficient::FourierTerm;
        use nalgebra::DVector;
        let d = |v: &[f64]| Mat::from_diagonal(&DVector::from_vec(v.to_vec()));
        let sin = Mat::from_row_slice(2, 2, &[0.0, 0.6, 0.6, 0.0]);
        let term = FourierTerm { frequency: PI, cos: d(&[0.4, 0.3]), sin };
        let c = Arc::new(CoefficientPath::fourier(d(&[1.0, 1.5]), vec![term], 1.0).unwrap());
        let f = c.field();
        let space = LagrangianSpace { field: &f, frame: LagrangianFrame::l0(1).basis().clone(), theta: 0.4 };
        let e = space.b_exact(4).unwrap();
        let q = space.b_quadrature(4);
        assert!((e - q).amax() < 1e-12);
        let ps = PeriodicSpace { field: &f, phi: 1.3 };
        let e = ps.b_exact(3).unwrap();
        let q = ps.b_quadrature(3);
        assert!((e - q).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn zero_coefficient_has_index_minus_n() {
        let f = rot(0.0);
        let space = LagrangianSpace { field: &f, frame: LagrangianFrame::l0(1).basis().clone(), theta: 0.0 };
        let r = relative_morse_index(&space, &TruncationScheme::default());
        assert!(r.stabilized && r.baseline_ok);
        assert_eq!((r.index - 1, r.nullity), (-1, 1));
    }

    #[test]
    fn spectral_flow_matches_relative_count() {
        let f = rot(5.0);
        let space = LagrangianSpace { field: &f, frame: LagrangianFrame::l0(1).basis().clone(), theta: 0.0 };
        let pair = space.assemble(6);
        let lc = count_level(&pair, 6, space.expected_negative_a(6), DPolicy::Auto);
        assert_eq!(spectral_flow_index(&pair, lc.d), lc.relative());
    }
}
