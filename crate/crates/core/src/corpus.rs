//! Reproducible random brake-symmetric coefficient paths.
//!
//! Each draw is `B(t) = C₀ + Σ_f [cos(fπt/ℓ)·C_f + sin(fπt/ℓ)·S_f]` where the
//! constant and cosine parts are block diagonal and the sine parts are
//! block off-diagonal; that is exactly what makes `B` 2ℓ-periodic with
//! even diagonal blocks and odd off-diagonal blocks around `t = ℓ`. Both
//! diagonal blocks are kept positive definite so that crossing counts
//! apply relative to `L0` and `L1`.
//!
//! Draws whose iterates sit in the numerical gray zone are discarded: an
//! endpoint within `1e-4` of the Maslov cycle for some iterate up to
//! [`CorpusOptions::k_max`], or a period matrix with eigenvalues within
//! `1e-4` of the unit circle without being on it, or with a spectral
//! argument `θ` such that `kθ/2π` is within `1e-4` of an integer. Exact
//! degeneracies have probability zero for these draws, so the filter only
//! removes cases that no finite tolerance could classify reliably.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coefficient::{CoefficientPath, FourierTerm};
use crate::error::Result;
use crate::path::SymplecticPath;
use crate::symplectic::{l0_angle_sines, n_matrix, symplectic_inverse, LagrangianFrame, Mat};

pub const DEFAULT_SEED: u64 = 0x6d61_736c_6f76;

#[derive(Clone, Debug)]
pub struct CorpusOptions {
    pub seed: u64,
    pub size: usize,
    /// Half-dimensions, used round-robin.
    pub dims: Vec<usize>,
    /// Largest iterate the degeneracy filter looks at.
    pub k_max: usize,
    /// Distance to degeneracy below which a draw is discarded.
    pub margin: f64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, size: 60, dims: vec![1, 2, 3], k_max: 6, margin: 1e-4 }
    }
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub id: usize,
    pub coefficient: Arc<CoefficientPath>,
    /// Draws discarded by the filter before this one was accepted.
    pub discarded: usize,
}

fn random_spd(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let q = g.qr().q();
    let d = Mat::from_diagonal(&nalgebra::DVector::from_fn(n, |_, _| rng.random_range(lo..hi)));
    &q * d * q.transpose()
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Mat {
    let g = Mat::from_fn(n, n, |_, _| rng.random_range(-scale..scale));
    (&g + g.transpose()) * 0.5
}

fn spectral_norm(m: &Mat) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.amax()
}

fn block_diag(a: &Mat, b: &Mat) -> Mat {
    let n = a.nrows();
    let mut m = Mat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((n, n), (n, n)).copy_from(b);
    m
}

fn draw(rng: &mut ChaCha8Rng, n: usize) -> CoefficientPath {
    loop {
        let base_length = rng.random_range(0.8..1.6);
        let upper = random_spd(rng, n, 0.5, 4.5);
        let lower = random_spd(rng, n, 0.5, 4.5);
        let harmonics = rng.random_range(1..=2usize);
        let mut terms = Vec::new();
        let (mut slack_u, mut slack_l) = (0.0, 0.0);
        for f in 1..=harmonics {
            let cu = random_sym(rng, n, 0.5);
            let cl = random_sym(rng, n, 0.5);
            slack_u += spectral_norm(&cu);
            slack_l += spectral_norm(&cl);
            let k = Mat::from_fn(n, n, |_, _| rng.random_range(-0.6..0.6));
            let mut s = Mat::zeros(2 * n, 2 * n);
            s.view_mut((0, n), (n, n)).copy_from(&k);
            s.view_mut((n, 0), (n, n)).copy_from(&k.transpose());
            terms.push(FourierTerm { frequency: f as f64 * PI / base_length, cos: block_diag(&cu, &cl), sin: s });
        }
        let min_u = SymmetricEigen::new(upper.clone()).eigenvalues.min();
        let min_l = SymmetricEigen::new(lower.clone()).eigenvalues.min();
        if min_u - slack_u < 0.2 || min_l - slack_l < 0.2 {
            continue;
        }
        let c = CoefficientPath::fourier(block_diag(&upper, &lower), terms, base_length)
            .expect("corpus draws are symmetric by construction");
        return c;
    }
}

/// Distance of a coefficient's iterates from the gray zone. Positive and
/// above `margin` means the draw is well conditioned.
pub fn conditioning(coefficient: &Arc<CoefficientPath>, k_max: usize) -> Result<f64> {
    let n = coefficient.n();
    let field = coefficient.field();
    let g1 = SymplecticPath::unit(&field, 1.0)?.endpoint().clone();
    let nm = n_matrix(n);
    let g2 = &nm * symplectic_inverse(&g1) * &nm * &g1;
    let l1 = LagrangianFrame::l1(n).unitary_model();
    let mut worst = f64::INFINITY;
    let mut powers = vec![Mat::identity(2 * n, 2 * n)];
    for _ in 0..k_max / 2 {
        let next = powers.last().unwrap() * &g2;
        powers.push(next);
    }
    for k in 1..=k_max {
        // γᵏ(k) = γ(1)γ(2)^q for k = 2q + 1 and γ(2)^q for k = 2q
        let end = if k % 2 == 1 { &g1 * &powers[k / 2] } else { powers[k / 2].clone() };
        worst = worst.min(l0_angle_sines(&end)[0]);
        worst = worst.min(l0_angle_sines(&(l1.transpose() * &end * &l1))[0]);
    }
    for z in g2.clone().complex_eigenvalues().iter() {
        let off = (z.norm() - 1.0).abs();
        if off > 1e-9 {
            worst = worst.min(off);
            continue;
        }
        let theta = z.arg().rem_euclid(TAU);
        for k in 1..=k_max {
            let x = k as f64 * theta / TAU;
            worst = worst.min((x - x.round()).abs());
        }
    }
    let args: Vec<f64> = g2
        .complex_eigenvalues()
        .iter()
        .filter(|z| (z.norm() - 1.0).abs() <= 1e-9)
        .map(|z| z.arg().rem_euclid(TAU))
        .collect();
    for (i, a) in args.iter().enumerate() {
        for b in &args[i + 1..] {
            let gap = (a - b).abs();
            // conjugate pairs sit apart by construction; near-collisions of
            // distinct eigenvalues are what the filter is after
            if gap > 1e-9 {
                worst = worst.min(gap.min(TAU - gap));
            }
        }
    }
    Ok(worst)
}

/// Draws `size` certified, well-conditioned coefficient paths.
pub fn brake_corpus(options: &CorpusOptions) -> Result<Vec<CorpusEntry>> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut out = Vec::with_capacity(options.size);
    let mut discarded = 0;
    while out.len() < options.size {
        let n = options.dims[out.len() % options.dims.len()];
        let mut c = draw(&mut rng, n);
        c.validate_brake_symmetry()?;
        let c = Arc::new(c);
        if conditioning(&c, options.k_max)? < options.margin {
            discarded += 1;
            continue;
        }
        out.push(CorpusEntry { id: out.len(), coefficient: c, discarded });
        discarded = 0;
    }
    Ok(out)
}
