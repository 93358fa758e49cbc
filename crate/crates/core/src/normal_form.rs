//! Reduction of a half-period matrix of a symmetric brake orbit to
//! `(−I₂) ⋄ M̃`.
//!
//! The inputs are the matrix `M = [[A, B], [C, D]]` together with two vectors
//! `ξ, η ∈ ℝⁿ` satisfying `ξᵀη = 1`, `Bη = 0`, `Cξ = 0`, `Dη = −η` and
//! `Aξ = −ξ`. For an orbit these are `ξ = −ṗ(0)/√2` and `η = q(0)/√2`.

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::symplectic::{diamond, kernel_dim, symplectic_drift, Blocks, Mat};
use crate::tolerances::{KERNEL_TOL, NORMAL_FORM_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum NormalFormCase {
    /// `ξ` and `η` are parallel.
    Parallel,
    /// `ξ` and `η` span a plane.
    Plane,
}

/// How the path `ψ` from `I` to `(ξ F)` was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PathRoute {
    Linear,
    /// Givens factorisation of the orthogonal factor plus a straight path
    /// between triangular factors.
    QrGivens,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalFormCertificate {
    pub case: NormalFormCase,
    /// `n × (n−1)` completion of `ξ`.
    #[serde(skip)]
    pub f: Mat,
    /// `n × (n−1)` completion of `η`.
    #[serde(skip)]
    pub g: Mat,
    /// The reduced `(2n−2) × (2n−2)` matrix.
    #[serde(skip)]
    pub reduced: Mat,
    /// `max |diag((ηG)ᵀ,(ξF)ᵀ) M diag(ξF, ηG) − (−I₂) ⋄ M̃|`.
    pub residual: f64,
    /// `max |(ξF)ᵀ(ηG) − I|`.
    pub pairing_residual: f64,
    pub reduced_drift: f64,
    /// `dim ker B` along the path.
    pub nu1: usize,
    /// `dim ker C` along the path.
    pub nu2: usize,
    pub path_route: PathRoute,
    pub path_samples: usize,
    pub path_min_det: f64,
    pub nullities_constant: bool,
    /// `true` when `(ξ, η)` had to be replaced by `(−ξ, −η)` so that a path
    /// with positive determinant exists (only possible for `n = 1`).
    pub flipped_sign: bool,
}

impl NormalFormCertificate {
    pub fn passes(&self) -> bool {
        self.residual <= NORMAL_FORM_TOL
            && self.pairing_residual <= NORMAL_FORM_TOL
            && self.nullities_constant
            && self.path_min_det > 0.0
    }
}

fn check_hypotheses(bl: &Blocks, xi: &DVector<f64>, eta: &DVector<f64>) -> Result<()> {
    let scale = 1.0 + bl.s.amax().max(bl.v.amax()).max(bl.t.amax()).max(bl.u.amax());
    let vs = xi.amax().max(eta.amax()).max(1.0);
    let tol = 1e-8 * scale * vs;
    let checks = [
        ("ξᵀη = 1", (xi.dot(eta) - 1.0).abs()),
        ("Bη = 0", (&bl.v * eta).amax()),
        ("Cξ = 0", (&bl.t * xi).amax()),
        ("Dη = −η", (&bl.u * eta + eta).amax()),
        ("Aξ = −ξ", (&bl.s * xi + xi).amax()),
    ];
    for (what, r) in checks {
        if r > tol {
            return Err(Error::Precondition(format!("{what} fails by {r:.3e}")));
        }
    }
    Ok(())
}

/// Orthonormal completion of the given orthonormal columns to a basis of ℝⁿ.
fn complete_basis(cols: &[DVector<f64>], n: usize) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = cols.to_vec();
    for k in 0..n {
        if out.len() == n {
            break;
        }
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        for u in &out {
            let c = u.dot(&v);
            v -= u * c;
        }
        for u in &out {
            let c = u.dot(&v);
            v -= u * c;
        }
        let norm = v.norm();
        if norm > 1e-6 {
            out.push(v / norm);
        }
    }
    out
}

fn columns_to_mat(n: usize, cols: &[DVector<f64>]) -> Mat {
    let mut m = Mat::zeros(n, cols.len());
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    m
}

fn prepend(first: &DVector<f64>, rest: &Mat) -> Mat {
    let n = first.len();
    let mut m = Mat::zeros(n, rest.ncols() + 1);
    m.set_column(0, first);
    m.view_mut((0, 1), (n, rest.ncols())).copy_from(rest);
    m
}

fn completions(xi: &DVector<f64>, eta: &DVector<f64>) -> (NormalFormCase, Mat, Mat) {
    let n = xi.len();
    let lam = xi.norm();
    let e1 = xi / lam;
    let perp = eta - &e1 * e1.dot(eta);
    if perp.norm() <= 1e-10 * eta.norm() || n == 1 {
        let basis = complete_basis(&[e1], n);
        let mut f = columns_to_mat(n, &basis[1..]);
        if n > 1 && prepend(xi, &f).determinant() < 0.0 {
            let c = -f.column(0).into_owned();
            f.set_column(0, &c);
        }
        let g = f.clone();
        (NormalFormCase::Parallel, f, g)
    } else {
        let e2 = &perp / perp.norm();
        let r = e2.dot(eta);
        let basis = complete_basis(&[e1.clone(), e2.clone()], n);
        let first_f = &e1 * lam - &e2 / r;
        let first_g = -&e2 * r;
        let mut fcols = vec![first_f];
        let mut gcols = vec![first_g];
        fcols.extend(basis[2..].iter().cloned());
        gcols.extend(basis[2..].iter().cloned());
        let mut f = columns_to_mat(n, &fcols);
        let mut g = columns_to_mat(n, &gcols);
        if prepend(xi, &f).determinant() < 0.0 {
            let last = f.ncols() - 1;
            let cf = -f.column(last).into_owned();
            let cg = -g.column(last).into_owned();
            f.set_column(last, &cf);
            g.set_column(last, &cg);
        }
        (NormalFormCase::Plane, f, g)
    }
}

/// A rotation acting in the `(p, q)` coordinate plane.
#[derive(Clone, Copy, Debug)]
struct PlaneRotation {
    p: usize,
    q: usize,
    angle: f64,
}

impl PlaneRotation {
    fn matrix(&self, n: usize, s: f64) -> Mat {
        let mut g = Mat::identity(n, n);
        let (sn, cs) = (s * self.angle).sin_cos();
        g[(self.p, self.p)] = cs;
        g[(self.q, self.q)] = cs;
        g[(self.p, self.q)] = -sn;
        g[(self.q, self.p)] = sn;
        g
    }
}

/// Path in `GL⁺(n)` from `I` to `x`, which must have positive determinant.
struct PositivePath {
    n: usize,
    /// `x = G₁ᵀ(1)⋯G_mᵀ(1) · D(1) · R`.
    rotations: Vec<PlaneRotation>,
    flips: Vec<PlaneRotation>,
    r: Mat,
}

impl PositivePath {
    fn new(x: &Mat) -> Self {
        let n = x.nrows();
        let qr = x.clone().qr();
        let (mut q, mut r) = (qr.q(), qr.r());
        for i in 0..n {
            if r[(i, i)] < 0.0 {
                for j in 0..n {
                    r[(i, j)] = -r[(i, j)];
                    q[(j, i)] = -q[(j, i)];
                }
            }
        }
        // Reduce q to a diagonal of ±1 by Givens rotations from the left.
        let mut w = q.clone();
        let mut rotations = Vec::new();
        for col in 0..n {
            for row in (col + 1..n).rev() {
                let a = w[(row - 1, col)];
                let b = w[(row, col)];
                if b.abs() < 1e-300 {
                    continue;
                }
                // Rotation by −φ in the (row−1, row) plane kills w[row, col].
                let phi = b.atan2(a);
                let rot = PlaneRotation { p: row - 1, q: row, angle: -phi };
                w = rot.matrix(n, 1.0) * w;
                w[(row, col)] = 0.0;
                rotations.push(rot);
            }
        }
        let negatives: Vec<usize> = (0..n).filter(|&i| w[(i, i)] < 0.0).collect();
        let flips = negatives
            .chunks(2)
            .filter(|c| c.len() == 2)
            .map(|c| PlaneRotation { p: c[0], q: c[1], angle: std::f64::consts::PI })
            .collect();
        Self { n, rotations, flips, r }
    }

    fn at(&self, s: f64) -> Mat {
        let n = self.n;
        let mut q = Mat::identity(n, n);
        // w = G_m ⋯ G_1 q  ⇒  q = G_1ᵀ ⋯ G_mᵀ w
        for rot in &self.rotations {
            q *= rot.matrix(n, s).transpose();
        }
        for f in &self.flips {
            q *= f.matrix(n, s);
        }
        let tri = Mat::identity(n, n) * (1.0 - s) + &self.r * s;
        q * tri
    }
}

fn conjugate_by(m: &Mat, psi: &Mat) -> Option<Mat> {
    let n = psi.nrows();
    let inv = psi.clone().try_inverse()?;
    let mut left = Mat::zeros(2 * n, 2 * n);
    left.view_mut((0, 0), (n, n)).copy_from(&inv);
    left.view_mut((n, n), (n, n)).copy_from(&psi.transpose());
    let mut right = Mat::zeros(2 * n, 2 * n);
    right.view_mut((0, 0), (n, n)).copy_from(psi);
    right.view_mut((n, n), (n, n)).copy_from(&inv.transpose());
    Some(left * m * right)
}

/// Builds the reduction and certifies the connecting path.
pub fn symmetric_normal_form(
    m: &Mat,
    xi: &DVector<f64>,
    eta: &DVector<f64>,
) -> Result<NormalFormCertificate> {
    let n = m.nrows() / 2;
    if m.nrows() != 2 * n || m.ncols() != 2 * n || xi.len() != n || eta.len() != n || n == 0 {
        return Err(Error::Dimension("normal form needs a 2n x 2n matrix and vectors of length n".into()));
    }
    let bl = Blocks::of(m);
    check_hypotheses(&bl, xi, eta)?;

    let (mut xi, mut eta) = (xi.clone(), eta.clone());
    let mut flipped_sign = false;
    if n == 1 && xi[0] < 0.0 {
        xi = -xi;
        eta = -eta;
        flipped_sign = true;
    }
    let (case, f, g) = completions(&xi, &eta);
    let xf = prepend(&xi, &f);
    let eg = prepend(&eta, &g);
    let pairing_residual = (xf.transpose() * &eg - Mat::identity(n, n)).amax();

    let mut left = Mat::zeros(2 * n, 2 * n);
    left.view_mut((0, 0), (n, n)).copy_from(&eg.transpose());
    left.view_mut((n, n), (n, n)).copy_from(&xf.transpose());
    let mut right = Mat::zeros(2 * n, 2 * n);
    right.view_mut((0, 0), (n, n)).copy_from(&xf);
    right.view_mut((n, n), (n, n)).copy_from(&eg);
    let conj = left * m * right;

    let k = n - 1;
    let reduced = Blocks {
        s: g.transpose() * &bl.s * &f,
        v: g.transpose() * &bl.v * &g,
        t: f.transpose() * &bl.t * &f,
        u: f.transpose() * &bl.u * &g,
    }
    .assemble();
    let expected = if k == 0 { -Mat::identity(2, 2) } else { diamond(&(-Mat::identity(2, 2)), &reduced) };
    let residual = (conj - expected).amax();
    let reduced_drift = if k == 0 { 0.0 } else { symplectic_drift(&reduced) };

    let nu1 = kernel_dim(&bl.v, KERNEL_TOL);
    let nu2 = kernel_dim(&bl.t, KERNEL_TOL);

    const SAMPLES: usize = 64;
    let linear = |s: f64| Mat::identity(n, n) * (1.0 - s) + &xf * s;
    let min_det_of = |path: &dyn Fn(f64) -> Mat| {
        (0..=SAMPLES).map(|i| path(i as f64 / SAMPLES as f64).determinant()).fold(f64::INFINITY, f64::min)
    };
    let lin_min = min_det_of(&linear);
    let (path_route, path_min_det, path): (PathRoute, f64, Box<dyn Fn(f64) -> Mat>) = if lin_min > 0.0 {
        (PathRoute::Linear, lin_min, Box::new(linear))
    } else {
        let pp = PositivePath::new(&xf);
        let end_err = (pp.at(1.0) - &xf).amax();
        if end_err > 1e-9 * xf.amax().max(1.0) {
            return Err(Error::Precondition(format!("connecting path misses its endpoint by {end_err:.3e}")));
        }
        let md = min_det_of(&|s| pp.at(s));
        (PathRoute::QrGivens, md, Box::new(move |s| pp.at(s)))
    };

    let mut nullities_constant = true;
    for i in 0..=SAMPLES {
        let psi = path(i as f64 / SAMPLES as f64);
        match conjugate_by(m, &psi) {
            Some(c) => {
                let b = Blocks::of(&c);
                if kernel_dim(&b.v, KERNEL_TOL) != nu1 || kernel_dim(&b.t, KERNEL_TOL) != nu2 {
                    nullities_constant = false;
                }
            }
            None => nullities_constant = false,
        }
    }

    Ok(NormalFormCertificate {
        case,
        f,
        g,
        reduced,
        residual,
        pairing_residual,
        reduced_drift,
        nu1,
        nu2,
        path_route,
        path_samples: SAMPLES + 1,
        path_min_det,
        nullities_constant,
        flipped_sign,
    })
}
