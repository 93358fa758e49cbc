//! Iteration formulas for brake-symmetric paths, checked as integer
//! identities against direct computation on the iterated system.
//!
//! Throughout, `field` is the unit field of a certified coefficient, so
//! `γ` lives on `[0, 1]`, `γ²` on `[0, 2]` and `M = γ²(2)`. The `k`-th
//! iterate is computed directly as the index of `field.iterated(k)`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficient::Field;
use crate::error::{Error, Result};
use crate::index::galerkin::TruncationScheme;
use crate::index::splitting::{mean_index_closed_form, spectral_profile, SpectralProfile};
use crate::index::{index_l_galerkin, omega_index_l, omega_index_periodic, IndexReport};
use crate::normal_form::symmetric_normal_form;
use crate::symplectic::{
    conjugate_to_l0, frame_intersection_dim, kernel_dim_complex, orthonormalize, CMat, FrameLabel, LagrangianFrame,
    Mat,
};
use crate::tolerances::{KERNEL_TOL, RESONANCE_TOL, THETA_GRID};

/// `E(a) = min{k ∈ ℤ : k ≥ a}`.
pub fn ceil_e(a: f64) -> i64 {
    a.ceil() as i64
}

/// `[a] = max{k ∈ ℤ : k ≤ a}`.
pub fn floor_int(a: f64) -> i64 {
    a.floor() as i64
}

fn frame_of(label: FrameLabel, n: usize) -> Result<LagrangianFrame> {
    LagrangianFrame::standard(label, n)
}

fn require_certified(field: &Field) -> Result<()> {
    if field.source().is_certified() {
        Ok(())
    } else {
        Err(Error::SymmetryNotCertified)
    }
}

fn reduced(i: usize, k: usize) -> (usize, usize) {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let g = gcd(i, k).max(1);
    (i / g, k / g)
}

/// Periodic indices `i_ω(γ²)` at roots of unity, memoised by the reduced
/// fraction `p/q` of `ω = e^{2πi p/q}`.
struct RootCache<'a> {
    field: &'a Field,
    scheme: TruncationScheme,
    values: BTreeMap<(usize, usize), (i64, usize)>,
}

impl<'a> RootCache<'a> {
    fn new(field: &'a Field, scheme: &TruncationScheme) -> Self {
        Self { field, scheme: *scheme, values: BTreeMap::new() }
    }

    fn prefill(&mut self, ks: &[usize]) -> Result<()> {
        let mut need: Vec<(usize, usize)> = Vec::new();
        for &k in ks {
            for i in 1..=(k.saturating_sub(1)) / 2 {
                let key = reduced(i, k);
                if !self.values.contains_key(&key) && !need.contains(&key) {
                    need.push(key);
                }
            }
        }
        let field = self.field;
        let scheme = self.scheme;
        let got: Vec<Result<((usize, usize), (i64, usize))>> = need
            .par_iter()
            .map(|&(p, q)| {
                let r = omega_index_periodic(field, TAU * p as f64 / q as f64, &scheme)?;
                Ok(((p, q), r.pair()))
            })
            .collect();
        for g in got {
            let (key, v) = g?;
            self.values.insert(key, v);
        }
        Ok(())
    }

    fn get(&mut self, i: usize, k: usize) -> Result<(i64, usize)> {
        let key = reduced(i, k);
        if let Some(v) = self.values.get(&key) {
            return Ok(*v);
        }
        let r = omega_index_periodic(self.field, TAU * key.0 as f64 / key.1 as f64, &self.scheme)?;
        self.values.insert(key, r.pair());
        Ok(r.pair())
    }
}

/// Index pair predicted for the `k`-th iterate by the Bott-type formula:
/// the base pair, plus `i_{e^{2πi·i/k}}(γ²)` for `1 ≤ i < k/2`, plus the
/// twisted pair at `θ = π/2` when `k` is even.
fn predict(base: (i64, usize), twisted: Option<(i64, usize)>, k: usize, roots: &mut RootCache) -> Result<(i64, usize)> {
    let (mut i, mut nu) = base;
    for r in 1..=(k - 1) / 2 {
        let (a, b) = roots.get(r, k)?;
        i += a;
        nu += b;
    }
    if k % 2 == 0 {
        let (a, b) = twisted.ok_or_else(|| Error::InvalidArgument("even iterate needs the twisted index".into()))?;
        i += a;
        nu += b;
    }
    Ok((i, nu))
}

/// Predicted `(i_L, ν_L)` of the `k`-th iterate.
pub fn bott_predict(field: &Field, frame: FrameLabel, k: usize, scheme: &TruncationScheme) -> Result<(i64, usize)> {
    require_certified(field)?;
    if k == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    let fr = frame_of(frame, field.n())?;
    let base = index_l_galerkin(field, &fr, scheme)?.pair();
    let twisted = if k % 2 == 0 { Some(omega_index_l(field, &fr, FRAC_PI_2, scheme)?.pair()) } else { None };
    let mut roots = RootCache::new(field, scheme);
    predict(base, twisted, k, &mut roots)
}

#[derive(Clone, Debug, Serialize)]
pub struct BottRow {
    pub k: usize,
    pub frame: FrameLabel,
    pub direct: (i64, usize),
    pub predicted: (i64, usize),
    pub direct_stabilized: bool,
}

impl BottRow {
    pub fn exact(&self) -> bool {
        self.direct == self.predicted
    }
}

/// Direct and predicted index pairs for a range of iterates.
#[derive(Clone, Debug, Serialize)]
pub struct IterationLedger {
    pub rows: Vec<BottRow>,
}

impl IterationLedger {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.exact()).count()
    }
}

/// Direct `(i_L, ν_L)` of the `k`-th iterate.
pub fn direct_iterate(field: &Field, frame: FrameLabel, k: usize, scheme: &TruncationScheme) -> Result<IndexReport> {
    let fr = frame_of(frame, field.n())?;
    index_l_galerkin(&field.iterated(k), &fr, scheme)
}

pub fn bott_ledger(field: &Field, ks: &[usize], frames: &[FrameLabel], scheme: &TruncationScheme) -> Result<IterationLedger> {
    require_certified(field)?;
    if ks.contains(&0) {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    let mut roots = RootCache::new(field, scheme);
    roots.prefill(ks)?;
    let any_even = ks.iter().any(|k| k % 2 == 0);
    let mut rows = Vec::new();
    for &label in frames {
        let fr = frame_of(label, field.n())?;
        let base = index_l_galerkin(field, &fr, scheme)?.pair();
        let twisted = if any_even { Some(omega_index_l(field, &fr, FRAC_PI_2, scheme)?.pair()) } else { None };
        let direct: Vec<Result<IndexReport>> = ks.par_iter().map(|&k| direct_iterate(field, label, k, scheme)).collect();
        for (&k, d) in ks.iter().zip(direct) {
            let d = d?;
            rows.push(BottRow {
                k,
                frame: label,
                direct: d.pair(),
                predicted: predict(base, twisted, k, &mut roots)?,
                direct_stabilized: d.stabilized,
            });
        }
    }
    Ok(IterationLedger { rows })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub name: &'static str,
    pub lhs: i64,
    pub rhs: i64,
}

impl IdentityRow {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// The four identities relating indices of the doubled path to those of
/// the half path: at `ω = 1` against `L0` and `L1` indices, at `ω = −1`
/// against the twisted indices at `θ = π/2`.
pub fn periodic_identities(field: &Field, scheme: &TruncationScheme) -> Result<Vec<IdentityRow>> {
    require_certified(field)?;
    let n = field.n() as i64;
    let (l0, l1) = (LagrangianFrame::l0(field.n()), LagrangianFrame::l1(field.n()));
    let one = omega_index_periodic(field, 0.0, scheme)?;
    let minus = omega_index_periodic(field, PI, scheme)?;
    let a0 = index_l_galerkin(field, &l0, scheme)?;
    let a1 = index_l_galerkin(field, &l1, scheme)?;
    let t0 = omega_index_l(field, &l0, FRAC_PI_2, scheme)?;
    let t1 = omega_index_l(field, &l1, FRAC_PI_2, scheme)?;
    Ok(vec![
        IdentityRow { name: "periodic index = i_L0 + i_L1 + n", lhs: one.index, rhs: a0.index + a1.index + n },
        IdentityRow {
            name: "periodic nullity = nu_L0 + nu_L1",
            lhs: one.nullity as i64,
            rhs: (a0.nullity + a1.nullity) as i64,
        },
        IdentityRow { name: "antiperiodic index = twisted L0 + twisted L1", lhs: minus.index, rhs: t0.index + t1.index },
        IdentityRow {
            name: "antiperiodic nullity = twisted nullities",
            lhs: minus.nullity as i64,
            rhs: (t0.nullity + t1.nullity) as i64,
        },
    ])
}

/// Value of the closed-form iteration formula for `i_L0(γᵏ)`.
#[derive(Clone, Debug, Serialize)]
pub struct PreciseValue {
    pub k: usize,
    pub value: i64,
    /// Value with the other branch of `E(kθ/2π)` at resonant arguments.
    pub alternative: Option<i64>,
    pub resonant: bool,
}

/// Evaluates the closed form from `i_L0(γ)`, `i_L0(γ²)` (needed for even
/// `k` only) and the spectral profile of `M`.
pub fn precise_iteration_l0(k: usize, i_base: i64, i_double: Option<i64>, profile: &SpectralProfile) -> Result<PreciseValue> {
    if k == 0 {
        return Err(Error::InvalidArgument("iteration count must be at least 1".into()));
    }
    let slope = profile.i_one + profile.s_plus_one() - profile.c;
    let mut low = 0i64;
    let mut high = 0i64;
    let mut resonant = false;
    for e in profile.interior() {
        if e.s_minus == 0 {
            continue;
        }
        let a = k as f64 * e.theta / TAU;
        let r = a.round();
        if (a - r).abs() < RESONANCE_TOL {
            resonant = true;
            low += r as i64 * e.s_minus;
            high += (r as i64 + 1) * e.s_minus;
        } else {
            low += ceil_e(a) * e.s_minus;
            high += ceil_e(a) * e.s_minus;
        }
    }
    let head = if k % 2 == 1 {
        i_base + (k as i64 - 1) / 2 * slope - profile.c
    } else {
        let upper: i64 = profile.interior().filter(|e| e.theta > PI).map(|e| e.s_minus).sum();
        let i2 = i_double.ok_or_else(|| Error::InvalidArgument("even iterates need i_L0 of the doubled path".into()))?;
        i2 + (k as i64 / 2 - 1) * slope - profile.c - upper
    };
    Ok(PreciseValue {
        k,
        value: head + low,
        alternative: resonant.then_some(head + high),
        resonant,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PreciseRow {
    pub k: usize,
    pub direct: i64,
    pub formula: PreciseValue,
}

impl PreciseRow {
    pub fn exact(&self) -> bool {
        self.formula.resonant || self.direct == self.formula.value
    }
}

/// Closed form against direct computation for each `k`.
pub fn precise_ledger(field: &Field, ks: &[usize], scheme: &TruncationScheme) -> Result<(SpectralProfile, Vec<PreciseRow>)> {
    require_certified(field)?;
    let profile = spectral_profile(field, scheme)?;
    let l0 = LagrangianFrame::l0(field.n());
    let i1 = index_l_galerkin(field, &l0, scheme)?.index;
    let i2 = index_l_galerkin(&field.iterated(2), &l0, scheme)?.index;
    let direct: Vec<Result<IndexReport>> = ks.par_iter().map(|&k| direct_iterate(field, FrameLabel::L0, k, scheme)).collect();
    let mut rows = Vec::new();
    for (&k, d) in ks.iter().zip(direct) {
        rows.push(PreciseRow { k, direct: d?.index, formula: precise_iteration_l0(k, i1, Some(i2), &profile)? });
    }
    Ok((profile, rows))
}

// ---------------------------------------------------------------------
// Common index jumps

#[derive(Clone, Debug, Serialize)]
pub struct JumpCondition {
    pub system: usize,
    pub m: usize,
    /// `ν_L0(γ, 2m−1)`, `ν_L0(γ, 2m+1)` and `ν_L0(γ)`.
    pub nullities: (usize, usize, usize),
    /// `i_L0(γ, 2m−1) + ν_L0(γ, 2m−1)` against
    /// `R − (i_L1(γ) + n + S⁺_M(1) − ν_L0(γ))`.
    pub lower: (i64, i64),
    /// `i_L0(γ, 2m+1)` against `R + i_L0(γ)`.
    pub upper: (i64, i64),
}

impl JumpCondition {
    pub fn holds(&self) -> bool {
        self.nullities.0 == self.nullities.2
            && self.nullities.1 == self.nullities.2
            && self.lower.0 == self.lower.1
            && self.upper.0 == self.upper.1
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct JumpCertificate {
    pub r: i64,
    pub m: Vec<usize>,
    /// Conditions from the closed-form search.
    pub search: Vec<JumpCondition>,
    /// The same conditions recomputed directly with a finer truncation.
    pub verification: Vec<JumpCondition>,
    pub verified: bool,
}

/// Per-system data for the jump search.
struct JumpSystem {
    field: Field,
    n: usize,
    i_l0: i64,
    nu_l0: usize,
    i_l1: i64,
    s_plus_one: i64,
    mean: f64,
    profile: SpectralProfile,
    m: Mat,
    odd_cache: BTreeMap<usize, (i64, usize)>,
}

impl JumpSystem {
    fn new(field: &Field, scheme: &TruncationScheme) -> Result<Self> {
        require_certified(field)?;
        let n = field.n();
        let a0 = index_l_galerkin(field, &LagrangianFrame::l0(n), scheme)?;
        let a1 = index_l_galerkin(field, &LagrangianFrame::l1(n), scheme)?;
        let path = crate::path::SymplecticPath::unit(field, 2.0)?;
        let m = path.endpoint().clone();
        let profile = crate::index::splitting::spectral_profile_of(field, m.clone(), scheme)?;
        Ok(Self {
            field: field.clone(),
            n,
            i_l0: a0.index,
            nu_l0: a0.nullity,
            i_l1: a1.index,
            s_plus_one: profile.s_plus_one(),
            mean: mean_index_closed_form(&profile),
            profile,
            m,
            odd_cache: BTreeMap::new(),
        })
    }

    /// `ν_ω(γ²) = dim ker(M − ω)`.
    fn periodic_nullity(&self, phi: f64) -> usize {
        let w = Complex64::from_polar(1.0, phi);
        let d = self.m.nrows();
        let a = CMat::from_fn(d, d, |i, j| Complex64::new(self.m[(i, j)], 0.0) - if i == j { w } else { Complex64::new(0.0, 0.0) });
        kernel_dim_complex(&a, KERNEL_TOL)
    }

    /// `(i_L0, ν_L0)` of an odd iterate from the closed forms, falling back
    /// to direct computation at resonant arguments.
    fn odd(&mut self, k: usize, scheme: &TruncationScheme) -> Result<(i64, usize)> {
        if let Some(v) = self.odd_cache.get(&k) {
            return Ok(*v);
        }
        let f = precise_iteration_l0(k, self.i_l0, None, &self.profile)?;
        let v = if f.resonant {
            direct_iterate(&self.field, FrameLabel::L0, k, scheme)?.pair()
        } else {
            let mut nu = self.nu_l0;
            for i in 1..=(k - 1) / 2 {
                nu += self.periodic_nullity(TAU * i as f64 / k as f64);
            }
            (f.value, nu)
        };
        self.odd_cache.insert(k, v);
        Ok(v)
    }

    fn condition(&mut self, sys: usize, r: i64, m: usize, scheme: &TruncationScheme) -> Result<JumpCondition> {
        let below = self.odd(2 * m - 1, scheme)?;
        let above = self.odd(2 * m + 1, scheme)?;
        Ok(JumpCondition {
            system: sys,
            m,
            nullities: (below.1, above.1, self.nu_l0),
            lower: (
                below.0 + below.1 as i64,
                r - (self.i_l1 + self.n as i64 + self.s_plus_one - self.nu_l0 as i64),
            ),
            upper: (above.0, r + self.i_l0),
        })
    }
}

/// Direct recomputation of one system's conditions with a finer scheme.
fn verify_condition(field: &Field, sys: usize, r: i64, m: usize, scheme: &TruncationScheme) -> Result<JumpCondition> {
    let n = field.n();
    let l0 = LagrangianFrame::l0(n);
    let base = index_l_galerkin(field, &l0, scheme)?;
    let l1 = index_l_galerkin(field, &LagrangianFrame::l1(n), scheme)?;
    let s_plus = crate::index::splitting::splitting_numbers(field, 0.0, 0.25, scheme)?.0;
    let s_plus_half = crate::index::splitting::splitting_numbers(field, 0.0, 0.125, scheme)?.0;
    if s_plus != s_plus_half {
        return Err(Error::SplittingUnstable { theta: 0.0 });
    }
    let below = index_l_galerkin(&field.iterated(2 * m - 1), &l0, scheme)?;
    let above = index_l_galerkin(&field.iterated(2 * m + 1), &l0, scheme)?;
    Ok(JumpCondition {
        system: sys,
        m,
        nullities: (below.nullity, above.nullity, base.nullity),
        lower: (
            below.index + below.nullity as i64,
            r - (l1.index + n as i64 + s_plus - base.nullity as i64),
        ),
        upper: (above.index, r + base.index),
    })
}

/// Certificates `(R, m₁, …, m_q)` with `R ≤ r_max`, each with the
/// smallest admissible `m_j`, sorted by `R`. Every certificate is
/// recomputed directly with `verify_scheme` before it is returned.
///
/// The search covers `R ≤ r_max` only; it says nothing about larger `R`.
pub fn find_common_index_jump(
    fields: &[Field],
    r_max: i64,
    scheme: &TruncationScheme,
    verify_scheme: &TruncationScheme,
) -> Result<Vec<JumpCertificate>> {
    let mut systems = fields.iter().map(|f| JumpSystem::new(f, scheme)).collect::<Result<Vec<_>>>()?;
    for (j, s) in systems.iter().enumerate() {
        if s.mean <= 0.0 {
            return Err(Error::Precondition(format!("system {j} has mean index {} ≤ 0", s.mean)));
        }
    }
    let mut out = Vec::new();
    for r in 1..=r_max {
        let mut found = Vec::with_capacity(systems.len());
        for (j, s) in systems.iter_mut().enumerate() {
            let reach = (r + s.i_l0 + 2 * s.n as i64 + 2) as f64 / (2.0 * s.mean);
            let m_hi = reach.ceil() as usize + 2;
            let mut hit = None;
            for m in 1..=m_hi {
                let c = s.condition(j, r, m, scheme)?;
                if c.holds() {
                    hit = Some(c);
                    break;
                }
            }
            match hit {
                Some(c) => found.push(c),
                None => break,
            }
        }
        if found.len() < systems.len() {
            continue;
        }
        let verification = found
            .par_iter()
            .map(|c| verify_condition(&fields[c.system], c.system, r, c.m, verify_scheme))
            .collect::<Result<Vec<_>>>()?;
        let verified = verification.iter().all(JumpCondition::holds);
        out.push(JumpCertificate { r, m: found.iter().map(|c| c.m).collect(), search: found, verification, verified });
    }
    Ok(out)
}

// ---------------------------------------------------------------------
// Mean index

#[derive(Clone, Debug, Serialize)]
pub struct MeanIndexRow {
    pub k: usize,
    /// `i_L0(γᵏ)`
    pub direct: i64,
    pub algorithm: crate::index::Algorithm,
    pub closed_form: f64,
    /// `|i_L0(γᵏ)/k − closed form|`
    pub deviation: f64,
}

impl MeanIndexRow {
    pub fn within(&self, bound: f64) -> bool {
        self.deviation <= bound
    }
}

/// `i_L0(γᵏ)/k` against the closed-form mean index, with `i_L0(γᵏ)` from
/// the Galerkin route on the `k`-fold field.
///
/// Crossing counts along the reflected iterate are not used here: when the
/// period matrix is hyperbolic the iterate grows like `|λ|^{k/2}` and the
/// angles to the Maslov cycle lose all precision well before `k = 64`.
pub fn mean_index_convergence(field: &Field, k: usize, scheme: &TruncationScheme) -> Result<MeanIndexRow> {
    require_certified(field)?;
    let profile = spectral_profile(field, scheme)?;
    let direct = direct_iterate(field, FrameLabel::L0, k, scheme)?;
    let closed_form = mean_index_closed_form(&profile);
    Ok(MeanIndexRow {
        k,
        direct: direct.index,
        algorithm: direct.algorithm,
        closed_form,
        deviation: (direct.index as f64 / k as f64 - closed_form).abs(),
    })
}

// ---------------------------------------------------------------------
// Inequalities

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityRow {
    pub name: &'static str,
    pub checked: usize,
    pub violations: usize,
    pub verdict: Verdict,
    pub detail: String,
}

impl InequalityRow {
    fn tally(name: &'static str, checked: usize, violations: usize, detail: String) -> Self {
        let verdict = if violations == 0 { Verdict::Pass } else { Verdict::Fail };
        Self { name, checked, violations, verdict, detail }
    }

    fn skipped(name: &'static str, why: &str) -> Self {
        Self { name, checked: 0, violations: 0, verdict: Verdict::Skipped, detail: why.to_string() }
    }
}

/// Angles `θ ∈ (0, π)` where `γ(1)L ∩ e^{θJ}L ≠ 0`, with the dimension of
/// the intersection. These are the arguments `−arg(λ)/2` of the
/// eigenvalues `λ` of the unitary `Z Zᵀ`, `Z = Y + iX` built from an
/// orthonormal frame `(X; Y)` of `γ(1)L`.
pub fn twisted_crossing_angles(end: &Mat, frame: &LagrangianFrame) -> Vec<(f64, usize)> {
    let g = conjugate_to_l0(end, frame);
    let n = g.nrows() / 2;
    let image = g.columns(n, n).into_owned();
    let Ok(q) = orthonormalize(&image) else { return Vec::new() };
    let z = CMat::from_fn(n, n, |i, j| Complex64::new(q[(n + i, j)], q[(i, j)]));
    let w = &z * z.transpose();
    let eig = match w.clone().schur().eigenvalues() {
        Some(e) => e,
        None => return Vec::new(),
    };
    let mut angles: Vec<f64> = eig.iter().map(|l| (-l.arg() / 2.0).rem_euclid(PI)).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out: Vec<(f64, usize)> = Vec::new();
    for a in angles {
        if a < 1e-9 || PI - a < 1e-9 {
            continue;
        }
        match out.last_mut() {
            Some((b, k)) if (a - *b).abs() < 1e-7 => *k += 1,
            _ => out.push((a, 1)),
        }
    }
    out
}

/// One sample of the twisted index scan.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ThetaSample {
    pub theta: f64,
    pub index: i64,
    pub nullity: usize,
    /// `dim(γ(1)L ∩ e^{θJ}L)` computed from the frames.
    pub intersection: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThetaScan {
    pub frame: FrameLabel,
    pub base: (i64, usize),
    pub samples: Vec<ThetaSample>,
    pub crossing_angles: Vec<(f64, usize)>,
    pub eps: f64,
}

/// Scans `θ ↦ i^L_θ` on a uniform grid of [`THETA_GRID`] interior points
/// plus `θ*` and `θ* ± ε` at every crossing angle `θ*`, and at `ε` near
/// `θ = 0` for the right limit.
pub fn theta_scan(field: &Field, frame: &LagrangianFrame, end: &Mat, scheme: &TruncationScheme) -> Result<ThetaScan> {
    let base = index_l_galerkin(field, frame, scheme)?.pair();
    let crossings = twisted_crossing_angles(end, frame);
    let mut gaps: Vec<f64> = vec![1e-3];
    let mut marks: Vec<f64> = vec![0.0];
    marks.extend(crossings.iter().map(|c| c.0));
    marks.push(PI);
    for w in marks.windows(2) {
        gaps.push(0.25 * (w[1] - w[0]));
    }
    let eps = gaps.into_iter().fold(f64::INFINITY, f64::min).max(1e-7);
    let mut thetas: Vec<f64> = (1..=THETA_GRID)
        .map(|i| PI * i as f64 / (THETA_GRID + 1) as f64)
        .filter(|t| crossings.iter().all(|c| (t - c.0).abs() > 2.0 * eps))
        .collect();
    thetas.push(eps.min(0.5 * marks[1]));
    for c in &crossings {
        thetas.extend([c.0 - eps, c.0, c.0 + eps]);
    }
    thetas.retain(|t| *t > 0.0 && *t < PI);
    thetas.sort_by(|a, b| a.partial_cmp(b).unwrap());
    thetas.dedup();
    let g = conjugate_to_l0(end, frame);
    let n = g.nrows() / 2;
    let img = orthonormalize(&g.columns(n, n).into_owned()).ok();
    let samples = thetas
        .par_iter()
        .map(|&t| {
            let r = omega_index_l(field, frame, t, scheme)?;
            let target = crate::symplectic::exp_j(t, n) * LagrangianFrame::l0(n).basis();
            let intersection = img.as_ref().map_or(n, |q| frame_intersection_dim(q, &target));
            Ok(ThetaSample { theta: t, index: r.index, nullity: r.nullity, intersection })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaScan { frame: frame.label(), base, samples, crossing_angles: crossings, eps })
}

impl ThetaScan {
    /// `i_L ≤ i^L_θ ≤ i_L + n` at every sample.
    pub fn sandwich(&self, n: usize) -> InequalityRow {
        let bad = self
            .samples
            .iter()
            .filter(|s| s.index < self.base.0 || s.index > self.base.0 + n as i64)
            .count();
        InequalityRow::tally("twisted index between i_L and i_L + n", self.samples.len(), bad, format!("{:?}", self.frame))
    }

    /// Constancy away from crossing angles, jump bounds at them, the right
    /// limit at `θ = 0`, and nullity from the form against nullity from
    /// the frames.
    pub fn locality(&self, n: usize) -> InequalityRow {
        let _ = n;
        let mut checked = 0;
        let mut bad = 0;
        let at_crossing = |t: f64| self.crossing_angles.iter().find(|c| (c.0 - t).abs() < 1e-12).map(|c| c.1);
        for w in self.samples.windows(2) {
            let (a, b) = (w[0], w[1]);
            let between = self.crossing_angles.iter().any(|c| c.0 >= a.theta && c.0 <= b.theta);
            if !between {
                checked += 1;
                bad += usize::from(a.index != b.index);
            } else if let Some(nu) = at_crossing(a.theta).or(at_crossing(b.theta)) {
                checked += 1;
                bad += usize::from((a.index - b.index).unsigned_abs() as usize > nu);
            }
        }
        for s in &self.samples {
            checked += 1;
            let expected = at_crossing(s.theta).unwrap_or(0);
            bad += usize::from(s.nullity != s.intersection || s.nullity != expected);
        }
        // |i_L + n − i_{0+}| ≤ ν_L
        if let Some(first) = self.samples.first() {
            checked += 1;
            bad += usize::from((self.base.0 + n as i64 - first.index).unsigned_abs() as usize > self.base.1);
        }
        InequalityRow::tally("twisted index is locally constant with bounded jumps", checked, bad, format!("{:?}", self.frame))
    }
}

/// Data an orbit supplies beyond its coefficient path.
#[derive(Clone, Debug)]
pub struct OrbitData {
    /// `−ṗ(0)/√2`
    pub xi: DVector<f64>,
    /// `q(0)/√2`
    pub eta: DVector<f64>,
}

/// Runs every inequality whose hypotheses can be certified for this
/// system. `k_max` bounds the iterates used for the monotonicity chain.
pub fn check_inequalities(
    field: &Field,
    orbit: Option<&OrbitData>,
    k_max: usize,
    scheme: &TruncationScheme,
) -> Result<Vec<InequalityRow>> {
    require_certified(field)?;
    let n = field.n();
    let path = crate::path::SymplecticPath::unit(field, 2.0)?;
    let end = path.eval(1.0);
    let m = path.endpoint().clone();
    let l0 = LagrangianFrame::l0(n);
    let l1 = LagrangianFrame::l1(n);
    let a0 = index_l_galerkin(field, &l0, scheme)?;
    let a1 = index_l_galerkin(field, &l1, scheme)?;
    let mut rows = Vec::new();

    let d = (a0.index - a1.index).unsigned_abs() as usize;
    rows.push(InequalityRow::tally("|i_L0 - i_L1| <= n", 1, usize::from(d > n), format!("{d} vs {n}")));
    let s0 = a0.index + a0.nullity as i64;
    let s1 = a1.index + a1.nullity as i64;
    let d = (s0 - s1).unsigned_abs() as usize;
    rows.push(InequalityRow::tally("|(i+nu)_L0 - (i+nu)_L1| <= n", 1, usize::from(d > n), format!("{d} vs {n}")));

    for frame in [&l0, &l1] {
        let scan = theta_scan(field, frame, &end, scheme)?;
        rows.push(scan.sandwich(n));
        rows.push(scan.locality(n));
    }

    // Monotonicity of L0 indices along iterates needs B(t) > 0.
    let positive = min_eigenvalue_over_period(field) > 0.0;
    if positive {
        let direct = (1..=k_max + 1)
            .collect::<Vec<_>>()
            .par_iter()
            .map(|&k| direct_iterate(field, FrameLabel::L0, k, scheme).map(|r| r.pair()))
            .collect::<Result<Vec<_>>>()?;
        let mut bad = 0;
        let mut strict_bad = 0;
        for w in direct.windows(2) {
            // i(m+1) > i(m) + ν(m) − 1
            bad += usize::from(w[1].0 < w[0].0 + w[0].1 as i64);
            strict_bad += usize::from(w[1].0 - w[0].0 < 1);
        }
        rows.push(InequalityRow::tally(
            "i_L0(m+1) >= i_L0(m) + nu_L0(m)",
            direct.len() - 1,
            bad,
            format!("m = 1..{k_max}"),
        ));
        if orbit.is_some() {
            rows.push(InequalityRow::tally("i_L0(m+1) - i_L0(m) >= 1", direct.len() - 1, strict_bad, format!("m = 1..{k_max}")));
        } else {
            rows.push(InequalityRow::skipped("i_L0(m+1) - i_L0(m) >= 1", "needs an orbit, whose iterates are always L0-degenerate"));
        }
    } else {
        rows.push(InequalityRow::skipped("i_L0(m+1) >= i_L0(m) + nu_L0(m)", "coefficient is not positive definite"));
        rows.push(InequalityRow::skipped("i_L0(m+1) - i_L0(m) >= 1", "coefficient is not positive definite"));
    }

    // Estimates for symmetric orbits: certified through the normal form at
    // the half period.
    let certified_orbit = match orbit {
        Some(o) => symmetric_normal_form(&end, &o.xi, &o.eta).map(|c| c.passes()).unwrap_or(false),
        None => false,
    };
    let profile = if certified_orbit || has_symplectic_fixed_plane(&m) { Some(spectral_profile(field, scheme)?) } else { None };
    if certified_orbit {
        let p = profile.as_ref().unwrap();
        let d = (s0 - s1).unsigned_abs() as usize;
        rows.push(InequalityRow::tally(
            "|(i+nu)_L0 - (i+nu)_L1| <= n - 1",
            1,
            usize::from(d + 1 > n),
            format!("{d} vs {}", n as i64 - 1),
        ));
        // 2·(i_L1 + S⁺(1) − ν_L0) ≥ 1 − n
        let lhs = 2 * (a1.index + p.s_plus_one() - a0.nullity as i64);
        rows.push(InequalityRow::tally(
            "i_L1 + S+(1) - nu_L0 >= (1 - n)/2",
            1,
            usize::from(lhs < 1 - n as i64),
            format!("2*lhs = {lhs}"),
        ));
    } else {
        let why = if orbit.is_some() { "normal form at the half period did not certify" } else { "not a symmetric orbit" };
        rows.push(InequalityRow::skipped("|(i+nu)_L0 - (i+nu)_L1| <= n - 1", why));
        rows.push(InequalityRow::skipped("i_L1 + S+(1) - nu_L0 >= (1 - n)/2", why));
    }

    // i(γ², 2) + 2 S⁺_{M²}(1) − ν(γ², 2) ≥ n + 2 when M fixes a symplectic
    // plane and i(γ²) ≥ n.
    let i_one = omega_index_periodic(field, 0.0, scheme)?.index;
    if has_symplectic_fixed_plane(&m) && i_one >= n as i64 {
        let twice = field.iterated(2);
        let per = omega_index_periodic(&twice, 0.0, scheme)?;
        let sp = crate::index::splitting::splitting_numbers(&twice, 0.0, 1e-3, scheme)?.0;
        let lhs = per.index + 2 * sp - per.nullity as i64;
        rows.push(InequalityRow::tally(
            "i(2) + 2 S+(1) - nu(2) >= n + 2",
            1,
            usize::from(lhs < n as i64 + 2),
            format!("{lhs} vs {}", n + 2),
        ));
    } else {
        rows.push(InequalityRow::skipped(
            "i(2) + 2 S+(1) - nu(2) >= n + 2",
            "period matrix has no fixed symplectic plane or i(γ²) < n",
        ));
    }
    Ok(rows)
}

fn min_eigenvalue_over_period(field: &Field) -> f64 {
    let samples = 512usize.max((128.0 * (1.0 + field.norm_bound())) as usize);
    let mut grid: Vec<f64> = (0..=samples).map(|i| 2.0 * i as f64 / samples as f64).collect();
    grid.extend(field.kinks(2.0));
    grid.into_iter()
        .map(|s| nalgebra::SymmetricEigen::new(field.eval(s)).eigenvalues.min())
        .fold(f64::INFINITY, f64::min)
}

/// Whether `ker(M − I)` contains a 2-dimensional symplectic subspace.
pub fn has_symplectic_fixed_plane(m: &Mat) -> bool {
    let d = m.nrows();
    let a = m - Mat::identity(d, d);
    let svd = a.svd(false, true);
    let Some(vt) = svd.v_t else { return false };
    let scale = svd.singular_values.max().max(1.0);
    let kernel: Vec<usize> = (0..d).filter(|&i| svd.singular_values[i] < 1e-7 * scale).collect();
    if kernel.len() < 2 {
        return false;
    }
    let basis = Mat::from_fn(d, kernel.len(), |r, c| vt[(kernel[c], r)]);
    let n = d / 2;
    let form = basis.transpose() * crate::symplectic::j_matrix(n) * &basis;
    let sv = form.svd(false, false).singular_values;
    sv.iter().filter(|&&s| s > 1e-6).count() >= 2
}
