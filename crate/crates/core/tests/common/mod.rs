//! Generators shared by the integration tests.
#![allow(dead_code)]

use maslov_lab::symplectic::{diamond, Mat};
use nalgebra::DVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    (&g + g.transpose()) * 0.5
}

/// Invertible matrix with `det > 0` and condition number below 50.
pub fn random_positive_gl(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    loop {
        let p = Mat::identity(n, n) + Mat::from_fn(n, n, |_, _| rng.random_range(-0.8..0.8));
        let sv = p.clone().svd(false, false).singular_values;
        let cond = sv.max() / sv.min();
        if p.determinant() > 0.0 && cond < 50.0 {
            return p;
        }
    }
}

/// Rotation with `det = +1`, from the QR factor of a random matrix.
pub fn random_rotation(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let mut q = g.qr().q();
    if q.determinant() < 0.0 {
        let c = -q.column(0).into_owned();
        q.set_column(0, &c);
    }
    q
}

/// Product of shears and a block-diagonal factor, so symplectic by
/// construction.
pub fn random_symplectic(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    let mut up = Mat::identity(2 * n, 2 * n);
    up.view_mut((0, n), (n, n)).copy_from(&random_symmetric(rng, n, 1.0));
    let mut low = Mat::identity(2 * n, 2 * n);
    low.view_mut((n, 0), (n, n)).copy_from(&random_symmetric(rng, n, 1.0));
    let q = random_positive_gl(rng, n);
    let mut diag = Mat::zeros(2 * n, 2 * n);
    diag.view_mut((0, 0), (n, n)).copy_from(&q);
    diag.view_mut((n, n), (n, n)).copy_from(&q.clone().try_inverse().unwrap().transpose());
    up * diag * low
}

pub struct NormalFormInstance {
    pub m: Mat,
    pub xi: DVector<f64>,
    pub eta: DVector<f64>,
    /// The `(2n−2)`-dimensional factor put in.
    pub reduced: Mat,
}

/// `M = diag(P, P⁻ᵀ)·((−I₂) ⋄ M̃)·diag(P⁻¹, Pᵀ)` with `ξ = Pe₁`,
/// `η = P⁻ᵀe₁`. With `parallel` the change of basis is a rotation, which
/// makes `ξ = η`.
pub fn normal_form_instance(rng: &mut ChaCha8Rng, n: usize, parallel: bool) -> NormalFormInstance {
    let reduced = random_symplectic(rng, n - 1);
    let core = diamond(&(-Mat::identity(2, 2)), &reduced);
    let p = if parallel { random_rotation(rng, n) } else { random_positive_gl(rng, n) };
    let p_inv = p.clone().try_inverse().unwrap();
    let mut left = Mat::zeros(2 * n, 2 * n);
    left.view_mut((0, 0), (n, n)).copy_from(&p);
    left.view_mut((n, n), (n, n)).copy_from(&p_inv.transpose());
    let mut right = Mat::zeros(2 * n, 2 * n);
    right.view_mut((0, 0), (n, n)).copy_from(&p_inv);
    right.view_mut((n, n), (n, n)).copy_from(&p.transpose());
    let m = left * core * right;
    let xi = p.column(0).into_owned();
    let eta = p_inv.transpose().column(0).into_owned();
    NormalFormInstance { m, xi, eta, reduced }
}

/// `tr(Xʲ)` for `j = 1..=count`; equal lists mean equal spectra.
pub fn power_traces(x: &Mat, count: usize) -> Vec<f64> {
    let mut p = x.clone();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(p.trace());
        p = &p * x;
    }
    out
}

/// `#{μ ∈ ℕ, μ ≥ 1 : μ < t}` and whether `t` is a positive integer, by
/// stepping through the integers.
pub fn count_below(t: f64) -> (i64, usize) {
    let mut count = 0;
    let mut mu = 1.0;
    while mu < t - 1e-9 {
        count += 1;
        mu += 1.0;
    }
    let hit = usize::from(t >= 1.0 - 1e-9 && (t - t.round()).abs() < 1e-9);
    (count, hit)
}
