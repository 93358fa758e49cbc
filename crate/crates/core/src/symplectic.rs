//! Symplectic matrices, standard blocks and Lagrangian frames.
//!
//! Phase space is `ℝ²ⁿ = ℝⁿ_p × ℝⁿ_q` with the standard structure
//! `J = [[0, −I], [I, 0]]`. A matrix is split into blocks as
//! `[[S, V], [T, U]]`; the upper-right block `V` decides whether the image of
//! the vertical Lagrangian `L0 = {0} × ℝⁿ` meets `L0` again.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerances::{KERNEL_TOL, SYMPLECTIC_TOL};

pub type Mat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Half the dimension of a `2n × 2n` matrix, or an error if it is not square
/// of even size.
pub fn half_dim(m: &Mat) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() % 2 != 0 || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "expected a square matrix of even size, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows() / 2)
}

/// The standard structure `J = [[0, −I], [I, 0]]`.
pub fn j_matrix(n: usize) -> Mat {
    let mut j = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = -1.0;
        j[(n + i, i)] = 1.0;
    }
    j
}

/// The brake involution `N = diag(−Iₙ, Iₙ)`.
pub fn n_matrix(n: usize) -> Mat {
    let mut d = DVector::from_element(2 * n, 1.0);
    d.rows_mut(0, n).fill(-1.0);
    Mat::from_diagonal(&d)
}

/// `[[0, Iₙ], [−Iₙ, 0]]`, the base point of the component of matrices whose
/// `V` block has positive determinant.
pub fn m_plus(n: usize) -> Mat {
    -j_matrix(n)
}

/// `[[0, Jₙ], [−Jₙ, 0]]` with `Jₙ = diag(−1, 1, …, 1)`.
pub fn m_minus(n: usize) -> Mat {
    let mut m = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        let s = if i == 0 { -1.0 } else { 1.0 };
        m[(i, n + i)] = s;
        m[(n + i, i)] = -s;
    }
    m
}

/// `exp(θJ) = cos θ·I + sin θ·J`.
pub fn exp_j(theta: f64, n: usize) -> Mat {
    Mat::identity(2 * n, 2 * n) * theta.cos() + j_matrix(n) * theta.sin()
}

/// The planar rotation `exp(θJ)` for `n = 1`.
pub fn rotation(theta: f64) -> Mat {
    exp_j(theta, 1)
}

/// Largest entry of `MᵀJM − J`.
pub fn symplectic_drift(m: &Mat) -> f64 {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    (m.transpose() * &j * m - j).amax()
}

pub fn is_symplectic(m: &Mat, tol: f64) -> bool {
    m.nrows() == m.ncols() && m.nrows() % 2 == 0 && symplectic_drift(m) <= tol
}

/// `M⁻¹ = −J Mᵀ J` for symplectic `M`.
pub fn symplectic_inverse(m: &Mat) -> Mat {
    let j = j_matrix(m.nrows() / 2);
    -(&j * m.transpose() * &j)
}

/// One Newton correction `M ← M(I + ½J E)` with `E = MᵀJM − J`, repeated
/// until the drift stops improving.
pub fn project_symplectic(m: &Mat) -> Mat {
    let n = m.nrows() / 2;
    let j = j_matrix(n);
    let id = Mat::identity(2 * n, 2 * n);
    let mut cur = m.clone();
    let mut drift = symplectic_drift(&cur);
    for _ in 0..4 {
        if drift < 1e-15 {
            break;
        }
        let e = cur.transpose() * &j * &cur - &j;
        let next = &cur * (&id + &j * e * 0.5);
        let d = symplectic_drift(&next);
        if d >= drift {
            break;
        }
        cur = next;
        drift = d;
    }
    cur
}

/// A `2n × 2n` matrix together with its measured symplectic drift.
#[derive(Clone, Debug, PartialEq)]
pub struct SymplecticMatrix {
    matrix: Mat,
    drift: f64,
}

impl SymplecticMatrix {
    /// Wraps `m`, rejecting it when the drift exceeds [`SYMPLECTIC_TOL`].
    pub fn new(m: Mat) -> Result<Self> {
        half_dim(&m)?;
        let drift = symplectic_drift(&m);
        if drift > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic(drift));
        }
        Ok(Self { matrix: m, drift })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: Mat::identity(2 * n, 2 * n), drift: 0.0 }
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn drift(&self) -> f64 {
        self.drift
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn blocks(&self) -> Blocks {
        Blocks::of(&self.matrix)
    }

    pub fn inverse(&self) -> Self {
        let inv = symplectic_inverse(&self.matrix);
        let drift = symplectic_drift(&inv);
        Self { matrix: inv, drift }
    }
}

/// The four `n × n` blocks of `[[S, V], [T, U]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Blocks {
    pub s: Mat,
    pub v: Mat,
    pub t: Mat,
    pub u: Mat,
}

impl Blocks {
    pub fn of(m: &Mat) -> Self {
        let n = m.nrows() / 2;
        Self {
            s: m.view((0, 0), (n, n)).into_owned(),
            v: m.view((0, n), (n, n)).into_owned(),
            t: m.view((n, 0), (n, n)).into_owned(),
            u: m.view((n, n), (n, n)).into_owned(),
        }
    }

    pub fn assemble(&self) -> Mat {
        let n = self.s.nrows();
        let mut m = Mat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.s);
        m.view_mut((0, n), (n, n)).copy_from(&self.v);
        m.view_mut((n, 0), (n, n)).copy_from(&self.t);
        m.view_mut((n, n), (n, n)).copy_from(&self.u);
        m
    }
}

/// The symplectic direct sum. For `Mᵢ = [[Aᵢ, Bᵢ], [Cᵢ, Dᵢ]]` of sizes
/// `2nᵢ`, the result interleaves the blocks so that the `p` coordinates of
/// all factors come first.
pub fn diamond(a: &Mat, b: &Mat) -> Mat {
    diamond_all(&[a.clone(), b.clone()])
}

pub fn diamond_all(factors: &[Mat]) -> Mat {
    let ns: Vec<usize> = factors.iter().map(|f| f.nrows() / 2).collect();
    let n: usize = ns.iter().sum();
    let mut out = Mat::zeros(2 * n, 2 * n);
    let mut off = 0;
    for (f, &k) in factors.iter().zip(&ns) {
        let bl = Blocks::of(f);
        out.view_mut((off, off), (k, k)).copy_from(&bl.s);
        out.view_mut((off, n + off), (k, k)).copy_from(&bl.v);
        out.view_mut((n + off, off), (k, k)).copy_from(&bl.t);
        out.view_mut((n + off, n + off), (k, k)).copy_from(&bl.u);
        off += k;
    }
    out
}

/// Number of singular values of `m` below `tol` times the larger of its
/// largest singular value and one.
pub fn kernel_dim(m: &Mat, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let scale = sv.max().max(1.0);
    sv.iter().filter(|&&s| s < tol * scale).count()
}

/// Complex version of [`kernel_dim`].
pub fn kernel_dim_complex(m: &CMat, tol: f64) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let scale = sv.max().max(1.0);
    sv.iter().filter(|&&s| s < tol * scale).count()
}

/// Orthonormal basis of the column span of a full-rank `2n × n` matrix.
pub fn orthonormalize(basis: &Mat) -> Result<Mat> {
    let k = basis.ncols();
    let qr = basis.clone().qr();
    let r = qr.r();
    let rmax = (0..k).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if (0..k).any(|i| r[(i, i)].abs() <= 1e-12 * rmax.max(1e-300)) {
        return Err(Error::NotLagrangian("basis is rank deficient".into()));
    }
    Ok(qr.q().columns(0, k).into_owned())
}

/// Dimension of the intersection of the column spans of two matrices with
/// orthonormal columns. Counts sines of principal angles below
/// [`KERNEL_TOL`].
pub fn frame_intersection_dim(a: &Mat, b: &Mat) -> usize {
    let proj = a * (a.transpose() * b);
    let resid = b - proj;
    let sv = resid.svd(false, false).singular_values;
    sv.iter().filter(|&&s| s < KERNEL_TOL).count()
}

/// Which Lagrangian subspace a frame spans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FrameLabel {
    /// `{0} × ℝⁿ`
    L0,
    /// `ℝⁿ × {0}`
    L1,
    Custom,
}

/// A Lagrangian subspace given by an orthonormal `2n × n` basis.
#[derive(Clone, Debug, PartialEq)]
pub struct LagrangianFrame {
    label: FrameLabel,
    basis: Mat,
}

impl LagrangianFrame {
    pub fn l0(n: usize) -> Self {
        let mut basis = Mat::zeros(2 * n, n);
        for i in 0..n {
            basis[(n + i, i)] = 1.0;
        }
        Self { label: FrameLabel::L0, basis }
    }

    pub fn l1(n: usize) -> Self {
        let mut basis = Mat::zeros(2 * n, n);
        for i in 0..n {
            basis[(i, i)] = 1.0;
        }
        Self { label: FrameLabel::L1, basis }
    }

    pub fn standard(label: FrameLabel, n: usize) -> Result<Self> {
        match label {
            FrameLabel::L0 => Ok(Self::l0(n)),
            FrameLabel::L1 => Ok(Self::l1(n)),
            FrameLabel::Custom => Err(Error::InvalidArgument(
                "a custom frame needs an explicit basis".into(),
            )),
        }
    }

    /// Validates and orthonormalises a user basis.
    pub fn custom(basis: &Mat) -> Result<Self> {
        let rows = basis.nrows();
        if rows % 2 != 0 || basis.ncols() * 2 != rows {
            return Err(Error::Dimension(format!(
                "a Lagrangian basis must be 2n x n, got {}x{}",
                rows,
                basis.ncols()
            )));
        }
        let q = orthonormalize(basis)?;
        let n = rows / 2;
        let iso = (q.transpose() * j_matrix(n) * &q).amax();
        if iso > 1e-9 {
            return Err(Error::NotLagrangian(format!("ω restricted to the span is {iso:.3e}")));
        }
        Ok(Self { label: FrameLabel::Custom, basis: q })
    }

    pub fn label(&self) -> FrameLabel {
        self.label
    }

    pub fn n(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// The orthogonal symplectic `P = [[A, −B], [B, A]]` with `P·L0 = L`.
    /// The frame is `(−B; A)`, so `A + iB` is unitary.
    pub fn unitary_model(&self) -> Mat {
        let n = self.n();
        let x = self.basis.rows(0, n).into_owned();
        let y = self.basis.rows(n, n).into_owned();
        let a = y;
        let b = -x;
        let mut p = Mat::zeros(2 * n, 2 * n);
        p.view_mut((0, 0), (n, n)).copy_from(&a);
        p.view_mut((0, n), (n, n)).copy_from(&(-&b));
        p.view_mut((n, 0), (n, n)).copy_from(&b);
        p.view_mut((n, n), (n, n)).copy_from(&a);
        p
    }

    /// Complex `A + iB` of the unitary model.
    pub fn unitary_matrix(&self) -> CMat {
        let n = self.n();
        let x = self.basis.rows(0, n);
        let y = self.basis.rows(n, n);
        CMat::from_fn(n, n, |i, j| Complex64::new(y[(i, j)], -x[(i, j)]))
    }
}

/// `γ_c = P⁻¹ γ P` where `P` carries `L0` to the frame's subspace.
pub fn conjugate_to_l0(m: &Mat, frame: &LagrangianFrame) -> Mat {
    if frame.label() == FrameLabel::L0 {
        return m.clone();
    }
    let p = frame.unitary_model();
    p.transpose() * m * p
}

/// `ν_L(M) = dim(M·L ∩ L)`, the dimension of the kernel of the `V` block of
/// the conjugated matrix.
pub fn nullity_l(m: &Mat, frame: &LagrangianFrame) -> usize {
    let image = m * frame.basis();
    match orthonormalize(&image) {
        Ok(q) => frame_intersection_dim(&q, frame.basis()),
        Err(_) => frame.n(),
    }
}

/// Sines of the principal angles between `M·L0` and `L0`, smallest first.
pub fn l0_angle_sines(m: &Mat) -> Vec<f64> {
    let n = m.nrows() / 2;
    let frame = m.columns(n, n).into_owned();
    let q = match orthonormalize(&frame) {
        Ok(q) => q,
        Err(_) => return vec![0.0; n],
    };
    let v = q.rows(0, n).into_owned();
    let mut sv: Vec<f64> = v.svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sv
}

/// Symmetric part, or an error when the input is visibly asymmetric.
pub fn checked_symmetric(m: &Mat, tol: f64) -> Result<Mat> {
    let asym = (m - m.transpose()).amax();
    let scale = m.amax().max(1.0);
    if asym > tol * scale {
        return Err(Error::NotSymmetric(asym));
    }
    Ok((m + m.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn standard_matrices_are_symplectic() {
        for n in 1..4 {
            assert!(is_symplectic(&j_matrix(n), 1e-15));
            assert!(is_symplectic(&m_plus(n), 1e-15));
            assert!(is_symplectic(&m_minus(n), 1e-15));
            assert_eq!(j_matrix(n) * j_matrix(n), -Mat::identity(2 * n, 2 * n));
            // N is anti-symplectic: NᵀJN = −J
            let nn = n_matrix(n);
            assert_eq!(nn.transpose() * j_matrix(n) * &nn, -j_matrix(n));
        }
    }

    #[test]
    fn m_minus_has_negative_v_determinant() {
        let b = Blocks::of(&m_minus(2));
        assert!(b.v.determinant() < 0.0);
        assert!(Blocks::of(&m_plus(2)).v.determinant() > 0.0);
    }

    #[test]
    fn diamond_of_rotations_is_block_rotation() {
        let r1 = rotation(0.3);
        let r2 = rotation(1.1);
        let d = diamond(&r1, &r2);
        assert!(is_symplectic(&d, 1e-14));
        let expected = Mat::from_row_slice(
            4,
            4,
            &[
                0.3f64.cos(), 0.0, -0.3f64.sin(), 0.0,
                0.0, 1.1f64.cos(), 0.0, -1.1f64.sin(),
                0.3f64.sin(), 0.0, 0.3f64.cos(), 0.0,
                0.0, 1.1f64.sin(), 0.0, 1.1f64.cos(),
            ],
        );
        assert_relative_eq!(d, expected, epsilon = 1e-15);
    }

    #[test]
    fn l1_conjugation_swaps_diagonal_blocks() {
        let g = Mat::from_diagonal(&DVector::from_vec(vec![2.0, 0.5]));
        let c = conjugate_to_l0(&g, &LagrangianFrame::l1(1));
        assert_relative_eq!(c, Mat::from_diagonal(&DVector::from_vec(vec![0.5, 2.0])), epsilon = 1e-15);
    }

    #[test]
    fn unitary_model_maps_l0_to_frame() {
        let basis = Mat::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let f = LagrangianFrame::custom(&basis).unwrap();
        let p = f.unitary_model();
        assert!(is_symplectic(&p, 1e-14));
        assert_relative_eq!(p.transpose() * &p, Mat::identity(4, 4), epsilon = 1e-14);
        let img = &p * LagrangianFrame::l0(2).basis();
        assert_eq!(frame_intersection_dim(&img, f.basis()), 2);
    }

    #[test]
    fn rotation_nullity() {
        let f = LagrangianFrame::l0(1);
        assert_eq!(nullity_l(&rotation(std::f64::consts::PI), &f), 1);
        assert_eq!(nullity_l(&rotation(1.0), &f), 0);
        assert_eq!(nullity_l(&Mat::identity(2, 2), &f), 1);
    }

    #[test]
    fn projection_repairs_drift() {
        let mut m = rotation(0.7);
        m[(0, 1)] += 1e-7;
        assert!(symplectic_drift(&m) > 1e-8);
        let p = project_symplectic(&m);
        assert!(symplectic_drift(&p) < 1e-14);
        assert!((p - m).amax() < 1e-6);
    }

    #[test]
    fn non_lagrangian_basis_is_rejected() {
        let basis = Mat::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(LagrangianFrame::custom(&basis), Err(Error::NotLagrangian(_))));
    }
}
