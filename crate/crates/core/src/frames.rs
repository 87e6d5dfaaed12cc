//! Frame systems `(x_j, f_j)`, their frame operators and classification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{seeded_rng, smallest_singular_value, CMatrix};
use crate::scalar::{decode_entries, encode_entries, CoordFunctional, CoordVector, ScalarRepr, C64, ONE, ZERO};
use crate::spaces::{NormSpec, SpaceSpec};

/// Default tolerance for [`classify`].
pub const CLASSIFY_TOL: f64 = 1e-8;
/// Tolerance of the normalization flag `‖x_j‖ = ‖f_j‖ = f_j(x_j) = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

const AUERBACH_STARTS: usize = 32;
const AUERBACH_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    pub x: CoordVector,
    pub f: CoordFunctional,
}

impl FramePair {
    pub fn new(x: CoordVector, f: CoordFunctional) -> Self {
        Self { x, f }
    }

    pub fn from_real(x: &[f64], f: &[f64]) -> Self {
        Self::new(CoordVector::from_real(x), CoordFunctional::from_real(f))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameSystem {
    space: SpaceSpec,
    pairs: Vec<FramePair>,
}

impl FrameSystem {
    pub fn new(space: SpaceSpec, pairs: Vec<FramePair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidFrame("a frame needs at least one pair".into()));
        }
        let n = space.dim();
        for p in &pairs {
            p.x.check_dim(n)?;
            p.f.check_dim(n)?;
            if !space.is_complex() && !(p.x.is_real() && p.f.is_real()) {
                return Err(Error::InvalidFrame("complex entries in a real-field frame".into()));
            }
            if p.x.entries().iter().chain(p.f.entries()).any(|z| !(z.re.is_finite() && z.im.is_finite())) {
                return Err(Error::InvalidFrame("non-finite entries".into()));
            }
        }
        Ok(Self { space, pairs })
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn pairs(&self) -> &[FramePair] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `‖x_j‖ = ‖f_j‖_* = f_j(x_j) = 1` for all `j`, within [`NORMALIZATION_TOL`].
    pub fn is_normalized(&self) -> bool {
        self.pairs.iter().all(|p| {
            let nx = self.space.norm(&p.x).unwrap_or(f64::NAN);
            let nf = self.space.dual_norm(&p.f).unwrap_or(f64::NAN);
            let fx = p.f.apply(&p.x);
            (nx - 1.0).abs() <= NORMALIZATION_TOL
                && (nf - 1.0).abs() <= NORMALIZATION_TOL
                && (fx - ONE).norm() <= NORMALIZATION_TOL
        })
    }

    /// `‖x_j‖·‖f_j‖_*` for every pair.
    pub fn pair_norm_products(&self) -> Vec<f64> {
        self.pairs
            .iter()
            .map(|p| self.space.norm(&p.x).unwrap_or(f64::NAN) * self.space.dual_norm(&p.f).unwrap_or(f64::NAN))
            .collect()
    }

    /// Concatenation of two frames on the same space.
    pub fn union(&self, other: &FrameSystem) -> Result<FrameSystem> {
        if self.space != other.space {
            return Err(Error::InvalidFrame("frames live on different spaces".into()));
        }
        let mut pairs = self.pairs.clone();
        pairs.extend(other.pairs.iter().cloned());
        FrameSystem::new(self.space.clone(), pairs)
    }

    /// The frame `(d·c_j·x_j, f_j/c_j)`, whose frame operator is `d·S`.
    pub fn rescaled(&self, d: f64, c: &[f64]) -> Result<FrameSystem> {
        if c.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: c.len(),
            });
        }
        let pairs = self
            .pairs
            .iter()
            .zip(c)
            .map(|(p, &cj)| FramePair::new(p.x.scaled_re(d * cj), p.f.scaled_re(1.0 / cj)))
            .collect();
        FrameSystem::new(self.space.clone(), pairs)
    }

    /// `(x_j/‖x_j‖, f_j/‖f_j‖_*)`.
    pub fn normalized_pairs(&self) -> Result<FrameSystem> {
        let mut pairs = Vec::with_capacity(self.len());
        for p in &self.pairs {
            let nx = self.space.norm(&p.x)?;
            let nf = self.space.dual_norm(&p.f)?;
            if nx == 0.0 || nf == 0.0 {
                return Err(Error::ZeroVector);
            }
            pairs.push(FramePair::new(p.x.scaled_re(1.0 / nx), p.f.scaled_re(1.0 / nf)));
        }
        FrameSystem::new(self.space.clone(), pairs)
    }
}

/// `n×n` matrix of a linear map in the canonical basis.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix(pub CMatrix);

impl OperatorMatrix {
    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n, n))
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
        }
        Ok(Self(CMatrix::from_fn(n, n, |i, k| C64::new(rows[i][k], 0.0))))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        Self(CMatrix::from_fn(n, n, |i, k| if i == k { C64::new(d[i], 0.0) } else { ZERO }))
    }

    /// `f ⊗ x : v ↦ f(v)·x`.
    pub fn rank_one(f: &CoordFunctional, x: &CoordVector) -> Self {
        let n = x.len();
        Self(CMatrix::from_fn(n, n, |i, k| x.0[i] * f.0[k]))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn apply(&self, x: &CoordVector) -> CoordVector {
        let n = self.dim();
        CoordVector::new((0..n).map(|i| (0..n).map(|k| self.0[(i, k)] * x.0[k]).sum()).collect())
    }

    /// `Tᵀh`, the adjoint acting on functionals.
    pub fn apply_adjoint(&self, h: &CoordFunctional) -> CoordFunctional {
        let n = self.dim();
        CoordFunctional::new((0..n).map(|k| (0..n).map(|i| h.0[i] * self.0[(i, k)]).sum()).collect())
    }

    pub fn scaled(&self, c: C64) -> Self {
        Self(self.0.map(|z| z * c))
    }

    pub fn trace(&self) -> C64 {
        crate::linalg::trace(&self.0)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `‖M − λI‖_F`.
    pub fn distance_to_scalar(&self, lambda: C64) -> f64 {
        let n = self.dim();
        let mut s = 0.0;
        for i in 0..n {
            for k in 0..n {
                let target = if i == k { lambda } else { ZERO };
                s += (self.0[(i, k)] - target).norm_sqr();
            }
        }
        s.sqrt()
    }

    pub fn is_real(&self) -> bool {
        self.0.iter().all(|z| z.im == 0.0)
    }
}

impl Serialize for OperatorMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let complex = !self.is_real();
        let rows: Vec<Vec<ScalarRepr>> = (0..self.dim())
            .map(|i| {
                let row: Vec<C64> = self.0.row(i).iter().cloned().collect();
                encode_entries(&row, complex)
            })
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for OperatorMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<ScalarRepr>>::deserialize(d)?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(serde::de::Error::custom("operator matrix must be square"));
        }
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| decode_entries(r)).collect();
        Ok(Self(CMatrix::from_fn(n, n, |i, k| rows[i][k])))
    }
}

/// `M_ik = Σ_j x_j[i]·f_j[k]`, so that `M v = Σ_j f_j(v) x_j`.
pub fn frame_operator(frame: &FrameSystem) -> OperatorMatrix {
    let n = frame.dim();
    let mut m = CMatrix::from_element(n, n, ZERO);
    for p in frame.pairs() {
        for i in 0..n {
            for k in 0..n {
                m[(i, k)] += p.x.0[i] * p.f.0[k];
            }
        }
    }
    OperatorMatrix(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Classification {
    Funtf { lambda: f64 },
    Schauder,
    Approximate,
    None,
}

impl Classification {
    pub fn is_funtf(&self) -> bool {
        matches!(self, Classification::Funtf { .. })
    }
}

/// Checked in order: FUNTF (normalized and `‖M − λI‖_F ≤ tol` with
/// `λ = tr(M)/n`), Schauder (`‖M − I‖_F ≤ tol`), approximate (`σ_min(M) > tol`).
pub fn classify(frame: &FrameSystem, tol: f64) -> Result<Classification> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let m = frame_operator(frame);
    let n = frame.dim() as f64;
    let lambda = m.trace() / n;
    if frame.is_normalized() && m.distance_to_scalar(lambda) <= tol {
        return Ok(Classification::Funtf { lambda: lambda.re });
    }
    if m.distance_to_scalar(ONE) <= tol {
        return Ok(Classification::Schauder);
    }
    if smallest_singular_value(&m.0) > tol {
        return Ok(Classification::Approximate);
    }
    Ok(Classification::None)
}

/// `‖S − I‖_F ≤ tol`, independent of normalization.
pub fn is_schauder(frame: &FrameSystem, tol: f64) -> bool {
    frame_operator(frame).distance_to_scalar(ONE) <= tol
}

/// `Σ_{j,k} |f_j(x_k)|²`.
pub fn naive_potential_sq(frame: &FrameSystem) -> f64 {
    let p = frame.pairs();
    p.iter()
        .flat_map(|a| p.iter().map(move |b| a.f.apply(&b.x).norm_sqr()))
        .sum()
}

/// `Σ_{j,k} |f_j(x_k)·f_k(x_j)|`.
pub fn naive_potential_sym(frame: &FrameSystem) -> f64 {
    let p = frame.pairs();
    p.iter()
        .flat_map(|a| p.iter().map(move |b| (a.f.apply(&b.x) * b.f.apply(&a.x)).norm()))
        .sum()
}

/// `|Σ_j f_j(x_j)|² / n`, which lower-bounds the frame potential.
pub fn trace_lower_bound(frame: &FrameSystem) -> f64 {
    let s: C64 = frame.pairs().iter().map(|p| p.f.apply(&p.x)).sum();
    s.norm_sqr() / frame.dim() as f64
}

/// An Auerbach basis: `n` normalized biorthogonal pairs.
///
/// The canonical basis is used for `ℓp` and weighted `ℓp`. Polytope norms
/// maximize `|det|` over the unit ball; since the determinant is linear in
/// each column, every column update is an exact maximization over the ball
/// vertices, and a coordinate-wise maximum is already Auerbach.
pub fn auerbach_basis(space: &SpaceSpec) -> Result<FrameSystem> {
    let n = space.dim();
    match space.norm_spec() {
        NormSpec::Lp { .. } | NormSpec::WeightedLp { .. } => {
            let pairs = (0..n)
                .map(|j| {
                    let e = CoordVector::unit(n, j);
                    let s = space.norm(&e)?;
                    Ok(FramePair::new(e.scaled_re(1.0 / s), CoordFunctional::unit(n, j).scaled_re(s)))
                })
                .collect::<Result<Vec<_>>>()?;
            FrameSystem::new(space.clone(), pairs)
        }
        NormSpec::Polytope { .. } => polytope_auerbach(space),
    }
}

fn polytope_auerbach(space: &SpaceSpec) -> Result<FrameSystem> {
    use nalgebra::DMatrix;
    use rand::Rng;

    let n = space.dim();
    let verts: Vec<Vec<f64>> = space
        .ball_vertices()
        .ok_or_else(|| Error::Unsupported("polytope without ball vertices".into()))?
        .iter()
        .map(|v| v.real_parts())
        .collect();
    let mut rng = seeded_rng(0xA0E7_BAC4);
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for _ in 0..AUERBACH_STARTS {
        let mut x = DMatrix::from_fn(n, n, |_, _| 0.0);
        for j in 0..n {
            let u = &verts[rng.random_range(0..verts.len())];
            x.set_column(j, &nalgebra::DVector::from_column_slice(u));
        }
        if x.determinant().abs() < 1e-12 {
            x = greedy_start(&verts, n);
        }
        let mut det = x.determinant().abs();
        let mut converged = false;
        for _ in 0..AUERBACH_MAX_SWEEPS {
            let mut improved = false;
            for j in 0..n {
                // det(X with column j = u) = c · u, c the cofactor vector
                let mut probe = x.clone();
                let c: Vec<f64> = (0..n)
                    .map(|i| {
                        probe.set_column(j, &nalgebra::DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 }));
                        probe.determinant()
                    })
                    .collect();
                let (arg, val) = verts
                    .iter()
                    .enumerate()
                    .map(|(k, u)| (k, u.iter().zip(&c).map(|(a, b)| a * b).sum::<f64>().abs()))
                    .fold((usize::MAX, det), |acc, cur| if cur.1 > acc.1 * (1.0 + 1e-13) { cur } else { acc });
                if arg != usize::MAX {
                    x.set_column(j, &nalgebra::DVector::from_column_slice(&verts[arg]));
                    det = val;
                    improved = true;
                }
            }
            if !improved {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "Auerbach determinant ascent".into(),
                iterations: AUERBACH_MAX_SWEEPS,
            });
        }
        if det > 0.0 && best.as_ref().is_none_or(|(d, _)| det > *d) {
            best = Some((det, x));
        }
    }
    let (_, x) = best.ok_or_else(|| Error::NonConvergence {
        what: "Auerbach determinant ascent".into(),
        iterations: AUERBACH_MAX_SWEEPS,
    })?;
    let inv = x.clone().try_inverse().ok_or_else(|| Error::NonConvergence {
        what: "Auerbach determinant ascent".into(),
        iterations: AUERBACH_MAX_SWEEPS,
    })?;
    let pairs = (0..n)
        .map(|j| {
            let xj: Vec<f64> = x.column(j).iter().cloned().collect();
            let fj: Vec<f64> = inv.row(j).iter().cloned().collect();
            FramePair::from_real(&xj, &fj)
        })
        .collect();
    FrameSystem::new(space.clone(), pairs)
}

/// Greedily picks vertices that keep the chosen columns independent.
fn greedy_start(verts: &[Vec<f64>], n: usize) -> nalgebra::DMatrix<f64> {
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    for v in verts {
        let mut trial = chosen.clone();
        trial.push(v.clone());
        let m = nalgebra::DMatrix::from_fn(n, trial.len(), |r, c| trial[c][r]);
        let rank = m.svd(false, false).singular_values.iter().filter(|&&s| s > 1e-10).count();
        if rank == trial.len() {
            chosen = trial;
        }
        if chosen.len() == n {
            break;
        }
    }
    nalgebra::DMatrix::from_fn(n, n, |r, c| chosen.get(c).map_or(0.0, |v| v[r]))
}

// ---- JSON --------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PairJson {
    x: Vec<ScalarRepr>,
    f: Vec<ScalarRepr>,
}

#[derive(Serialize, Deserialize)]
struct FrameJson {
    space: SpaceSpec,
    pairs: Vec<PairJson>,
}

impl Serialize for FrameSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let complex = self.space.is_complex();
        FrameJson {
            space: self.space.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|p| PairJson {
                    x: encode_entries(p.x.entries(), complex),
                    f: encode_entries(p.f.entries(), complex),
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FrameSystem {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FrameJson::deserialize(d)?;
        let pairs = raw
            .pairs
            .iter()
            .map(|p| FramePair::new(CoordVector::new(decode_entries(&p.x)), CoordFunctional::new(decode_entries(&p.f))))
            .collect();
        FrameSystem::new(raw.space, pairs).map_err(serde::de::Error::custom)
    }
}
