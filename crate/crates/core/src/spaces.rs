//! Finite-dimensional normed spaces over ℝ or ℂ.
//!
//! Three norm families are supported: `ℓp`, weighted `ℓp`, and real polytope
//! norms `‖x‖ = max_v |⟨v, x⟩|` given by the vertices of the dual unit ball.
//! Weighted norms are `‖(w_k^{1/p} x_k)‖_p` for finite `p` and
//! `max_k w_k |x_k|` for `p = ∞`; their duals transfer the weights as
//! `w → w^{-q/p}` (respectively `w → 1/w`).

use std::cmp::Ordering;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{gaussian, seeded_rng};
use crate::scalar::{phase_or, re, CoordFunctional, CoordVector, C64, ONE, ZERO};

/// Phase resolution used when complex extreme points are enumerated.
pub const PHASE_STEPS: usize = 16;

const POLYTOPE_ENUMERATION_CAP: u128 = 4_000_000;
const VERTEX_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub enum NormSpec {
    Lp { p: f64 },
    WeightedLp { p: f64, weights: Vec<f64> },
    Polytope { dual_vertices: Vec<Vec<f64>> },
}

/// A validated finite-dimensional normed space. Immutable after construction.
#[derive(Debug, Clone)]
pub struct SpaceSpec {
    dim: usize,
    field: Field,
    norm: NormSpec,
    // Vertices of the primal unit ball; only populated for polytope norms.
    ball_vertices: Option<Arc<Vec<Vec<f64>>>>,
}

impl PartialEq for SpaceSpec {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.field == other.field && self.norm == other.norm
    }
}

/// Extreme points of the dual unit ball, or a sample of them.
#[derive(Debug, Clone)]
pub struct DualPoints {
    pub points: Vec<CoordFunctional>,
    pub exhaustive: bool,
}

pub fn conjugate_exponent(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else if p.is_infinite() {
        1.0
    } else {
        p / (p - 1.0)
    }
}

/// `‖y‖_p` for the magnitudes `y`, rescaled by the largest entry before powering.
fn lp_of_magnitudes(mags: impl Iterator<Item = f64> + Clone, p: f64) -> f64 {
    if p.is_infinite() {
        return mags.fold(0.0, f64::max);
    }
    if p == 1.0 {
        return mags.sum();
    }
    let m = mags.clone().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = mags.map(|a| (a / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

fn lex_cmp(a: &[C64], b: &[C64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        let o = x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im));
        if o != Ordering::Equal {
            return o;
        }
    }
    Ordering::Equal
}

impl SpaceSpec {
    pub fn new(dim: usize, field: Field, norm: NormSpec) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidSpace("dimension must be positive".into()));
        }
        let check_p = |p: f64| {
            if p.is_nan() || p < 1.0 {
                Err(Error::InvalidSpace(format!("exponent p = {p} must satisfy p ≥ 1")))
            } else {
                Ok(())
            }
        };
        let mut ball_vertices = None;
        match &norm {
            NormSpec::Lp { p } => check_p(*p)?,
            NormSpec::WeightedLp { p, weights } => {
                check_p(*p)?;
                if weights.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: weights.len(),
                    });
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(Error::InvalidSpace("weights must be positive and finite".into()));
                }
            }
            NormSpec::Polytope { dual_vertices } => {
                if field == Field::Complex {
                    return Err(Error::Unsupported("polytope norms are real-field only".into()));
                }
                validate_polytope(dim, dual_vertices)?;
                ball_vertices = Some(Arc::new(enumerate_ball_vertices(dim, dual_vertices)?));
            }
        }
        Ok(Self {
            dim,
            field,
            norm,
            ball_vertices,
        })
    }

    pub fn lp(dim: usize, field: Field, p: f64) -> Result<Self> {
        Self::new(dim, field, NormSpec::Lp { p })
    }

    pub fn real_lp(dim: usize, p: f64) -> Result<Self> {
        Self::lp(dim, Field::Real, p)
    }

    pub fn complex_lp(dim: usize, p: f64) -> Result<Self> {
        Self::lp(dim, Field::Complex, p)
    }

    pub fn weighted_lp(dim: usize, field: Field, p: f64, weights: Vec<f64>) -> Result<Self> {
        Self::new(dim, field, NormSpec::WeightedLp { p, weights })
    }

    pub fn polytope(dim: usize, dual_vertices: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(dim, Field::Real, NormSpec::Polytope { dual_vertices })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_complex(&self) -> bool {
        self.field == Field::Complex
    }

    pub fn norm_spec(&self) -> &NormSpec {
        &self.norm
    }

    /// Exponent `p` for the `ℓp` families, `None` for polytopes.
    pub fn exponent(&self) -> Option<f64> {
        match &self.norm {
            NormSpec::Lp { p } | NormSpec::WeightedLp { p, .. } => Some(*p),
            NormSpec::Polytope { .. } => None,
        }
    }

    /// Coordinate scale `s` such that `‖x‖ = ‖s ∘ x‖_p`.
    pub(crate) fn coordinate_scale(&self) -> Option<Vec<f64>> {
        match &self.norm {
            NormSpec::Lp { .. } => Some(vec![1.0; self.dim]),
            NormSpec::WeightedLp { p, weights } => Some(if p.is_infinite() {
                weights.clone()
            } else {
                weights.iter().map(|w| w.powf(1.0 / p)).collect()
            }),
            NormSpec::Polytope { .. } => None,
        }
    }

    pub fn is_hilbert(&self) -> bool {
        self.exponent() == Some(2.0)
    }

    pub fn is_smooth(&self) -> bool {
        matches!(self.exponent(), Some(p) if p > 1.0 && p.is_finite())
    }

    /// Real field with a polyhedral unit ball (ℓ1, ℓ∞, weighted or polytope).
    pub fn is_real_polyhedral(&self) -> bool {
        self.field == Field::Real && !self.is_smooth()
    }

    /// Whether sign changes of coordinates preserve the norm.
    pub fn is_one_unconditional(&self) -> bool {
        match &self.norm {
            NormSpec::Lp { .. } | NormSpec::WeightedLp { .. } => true,
            NormSpec::Polytope { dual_vertices } => (0..self.dim).all(|k| {
                dual_vertices.iter().all(|v| {
                    let mut flipped = v.clone();
                    flipped[k] = -flipped[k];
                    dual_vertices.iter().any(|w| close(w, &flipped))
                })
            }),
        }
    }

    fn norm_unchecked(&self, x: &[C64]) -> f64 {
        match &self.norm {
            NormSpec::Lp { p } => lp_of_magnitudes(x.iter().map(|z| z.norm()), *p),
            NormSpec::WeightedLp { p, .. } => {
                let s = self.coordinate_scale().unwrap_or_default();
                lp_of_magnitudes(x.iter().zip(s).map(|(z, s)| s * z.norm()), *p)
            }
            NormSpec::Polytope { dual_vertices } => dual_vertices
                .iter()
                .map(|v| pair_real(v, x).norm())
                .fold(0.0, f64::max),
        }
    }

    fn dual_norm_unchecked(&self, f: &[C64]) -> f64 {
        match &self.norm {
            NormSpec::Lp { p } => lp_of_magnitudes(f.iter().map(|z| z.norm()), conjugate_exponent(*p)),
            NormSpec::WeightedLp { p, .. } => {
                let s = self.coordinate_scale().unwrap_or_default();
                lp_of_magnitudes(
                    f.iter().zip(s).map(|(z, s)| z.norm() / s),
                    conjugate_exponent(*p),
                )
            }
            NormSpec::Polytope { .. } => self
                .ball_vertices
                .as_ref()
                .map(|vs| vs.iter().map(|u| pair_real(u, f).norm()).fold(0.0, f64::max))
                .unwrap_or(f64::NAN),
        }
    }

    pub fn norm(&self, x: &CoordVector) -> Result<f64> {
        x.check_dim(self.dim)?;
        Ok(self.norm_unchecked(x.entries()))
    }

    pub fn dual_norm(&self, f: &CoordFunctional) -> Result<f64> {
        f.check_dim(self.dim)?;
        Ok(self.dual_norm_unchecked(f.entries()))
    }

    /// The dual space `X*`, with coordinates paired bilinearly against `X`.
    pub fn dual_space(&self) -> SpaceSpec {
        match &self.norm {
            NormSpec::Lp { p } => SpaceSpec {
                dim: self.dim,
                field: self.field,
                norm: NormSpec::Lp {
                    p: conjugate_exponent(*p),
                },
                ball_vertices: None,
            },
            NormSpec::WeightedLp { p, .. } => {
                let q = conjugate_exponent(*p);
                let s = self.coordinate_scale().unwrap_or_default();
                let weights = s
                    .iter()
                    .map(|s| if q.is_infinite() { 1.0 / s } else { s.powf(-q) })
                    .collect();
                SpaceSpec {
                    dim: self.dim,
                    field: self.field,
                    norm: NormSpec::WeightedLp { p: q, weights },
                    ball_vertices: None,
                }
            }
            NormSpec::Polytope { dual_vertices } => SpaceSpec {
                dim: self.dim,
                field: self.field,
                norm: NormSpec::Polytope {
                    dual_vertices: self.ball_vertices.as_ref().map(|v| v.to_vec()).unwrap_or_default(),
                },
                ball_vertices: Some(Arc::new(dual_vertices.clone())),
            },
        }
    }

    /// Vertices of the primal unit ball, for real polyhedral spaces.
    pub fn ball_vertices(&self) -> Option<Vec<CoordVector>> {
        if !self.is_real_polyhedral() {
            return None;
        }
        let n = self.dim;
        match &self.norm {
            NormSpec::Polytope { .. } => self
                .ball_vertices
                .as_ref()
                .map(|vs| vs.iter().map(|v| CoordVector::from_real(v)).collect()),
            _ => {
                let s = self.coordinate_scale()?;
                let p = self.exponent()?;
                if p == 1.0 {
                    Some(signed_units(n, &s.iter().map(|s| 1.0 / s).collect::<Vec<_>>()))
                } else {
                    Some(
                        sign_vectors(n)
                            .into_iter()
                            .map(|sg| CoordVector::from_real(&sg.iter().zip(&s).map(|(a, s)| a / s).collect::<Vec<_>>()))
                            .collect(),
                    )
                }
            }
        }
    }

    /// Extreme points of the dual unit ball. Exact for real polyhedral duals;
    /// otherwise `budget` quasi-uniform sphere points together with the
    /// normalized `±e_k*`, flagged non-exhaustive.
    pub fn dual_extreme_points(&self, budget: usize) -> Result<DualPoints> {
        if budget == 0 {
            return Err(Error::InvalidArgument("budget must be positive".into()));
        }
        let n = self.dim;
        if let NormSpec::Polytope { dual_vertices } = &self.norm {
            return Ok(DualPoints {
                points: dual_vertices.iter().map(|v| CoordFunctional::from_real(v)).collect(),
                exhaustive: true,
            });
        }
        let s = self.coordinate_scale().unwrap_or_default();
        let p = self.exponent().unwrap_or(2.0);
        match (self.field, p) {
            (Field::Real, p) if p == 1.0 => Ok(DualPoints {
                points: sign_vectors(n)
                    .into_iter()
                    .map(|sg| CoordFunctional::from_real(&sg.iter().zip(&s).map(|(a, s)| a * s).collect::<Vec<_>>()))
                    .collect(),
                exhaustive: true,
            }),
            (Field::Real, p) if p.is_infinite() => Ok(DualPoints {
                points: signed_units(n, &s)
                    .into_iter()
                    .map(|v| CoordFunctional::new(v.0))
                    .collect(),
                exhaustive: true,
            }),
            (Field::Complex, p) if p == 1.0 => {
                let total = (PHASE_STEPS as u128).pow(n as u32);
                if total > 1 << 20 {
                    return Err(Error::Unsupported(format!(
                        "phase enumeration of {total} points exceeds the cap"
                    )));
                }
                Ok(DualPoints {
                    points: phase_lattice(n, false)
                        .into_iter()
                        .map(|v| CoordFunctional::new(v.iter().zip(&s).map(|(z, s)| z * s).collect()))
                        .collect(),
                    exhaustive: false,
                })
            }
            (Field::Complex, p) if p.is_infinite() => {
                let mut points = Vec::with_capacity(PHASE_STEPS * n);
                for k in 0..n {
                    for t in 0..PHASE_STEPS {
                        let mut v = vec![ZERO; n];
                        v[k] = phase_step(t) * s[k];
                        points.push(CoordFunctional::new(v));
                    }
                }
                Ok(DualPoints {
                    points,
                    exhaustive: false,
                })
            }
            _ => Ok(DualPoints {
                points: self.sampled_dual_sphere(budget, 0x5eed),
                exhaustive: false,
            }),
        }
    }

    /// Normalized `±e_k*` followed by quasi-uniform dual-sphere samples, at
    /// least `budget` points in total.
    pub(crate) fn sampled_dual_sphere(&self, budget: usize, seed: u64) -> Vec<CoordFunctional> {
        let n = self.dim;
        let mut raw: Vec<Vec<C64>> = Vec::new();
        if n == 2 && self.field == Field::Real {
            let m = budget.max(4);
            for k in 0..m {
                let t = std::f64::consts::TAU * k as f64 / m as f64;
                raw.push(vec![re(t.cos()), re(t.sin())]);
            }
            for k in 0..2 {
                for sgn in [1.0, -1.0] {
                    let mut e = vec![ZERO; 2];
                    e[k] = re(sgn);
                    if !raw.iter().any(|v| (v[0] - e[0]).norm() + (v[1] - e[1]).norm() < 1e-12) {
                        raw.push(e);
                    }
                }
            }
        } else {
            for k in 0..n {
                for sgn in [1.0, -1.0] {
                    let mut e = vec![ZERO; n];
                    e[k] = re(sgn);
                    raw.push(e);
                }
            }
            let mut rng = seeded_rng(seed);
            while raw.len() < budget {
                let v: Vec<C64> = (0..n)
                    .map(|_| match self.field {
                        Field::Real => re(gaussian(&mut rng)),
                        Field::Complex => C64::new(gaussian(&mut rng), gaussian(&mut rng)),
                    })
                    .collect();
                raw.push(v);
            }
        }
        raw.into_iter()
            .filter_map(|v| {
                let d = self.dual_norm_unchecked(&v);
                (d > 0.0).then(|| CoordFunctional::new(v.into_iter().map(|z| z / d).collect()))
            })
            .collect()
    }

    /// A functional `f` with `‖f‖_* = 1` and `f(x) = ‖x‖`. At non-smooth points
    /// the lexicographically smallest optimal dual vertex is returned.
    pub fn normalizing_functional(&self, x: &CoordVector) -> Result<CoordFunctional> {
        x.check_dim(self.dim)?;
        if x.is_zero() {
            return Err(Error::ZeroVector);
        }
        let n = self.dim;
        if let NormSpec::Polytope { dual_vertices } = &self.norm {
            let nx = self.norm_unchecked(x.entries());
            let cutoff = nx - 1e-12 * nx.max(1.0);
            let best = dual_vertices
                .iter()
                .filter(|v| pair_real(v, x.entries()).re >= cutoff)
                .map(|v| v.iter().map(|&a| re(a)).collect::<Vec<_>>())
                .min_by(|a, b| lex_cmp(a, b))
                .expect("the norm is attained at some dual vertex");
            return Ok(CoordFunctional::new(best));
        }
        let s = self.coordinate_scale().unwrap_or_default();
        let p = self.exponent().unwrap_or(2.0);
        let y: Vec<C64> = x.entries().iter().zip(&s).map(|(z, s)| z * s).collect();
        let phi: Vec<C64> = if p == 1.0 {
            y.iter().map(|z| phase_or(*z, -ONE).conj()).collect()
        } else if p.is_infinite() {
            let m = y.iter().map(|z| z.norm()).fold(0.0, f64::max);
            (0..n)
                .filter(|&k| y[k].norm() == m)
                .map(|k| {
                    let mut v = vec![ZERO; n];
                    v[k] = phase_or(y[k], ONE).conj();
                    v
                })
                .min_by(|a, b| lex_cmp(a, b))
                .expect("maximum is attained")
        } else {
            let ny = lp_of_magnitudes(y.iter().map(|z| z.norm()), p);
            y.iter()
                .map(|z| phase_or(*z, ONE).conj() * (z.norm() / ny).powf(p - 1.0))
                .collect()
        };
        Ok(CoordFunctional::new(phi.iter().zip(&s).map(|(f, s)| f * s).collect()))
    }

    /// A unit vector `x` with `f(x) = ‖f‖_*`.
    pub fn norming_vector(&self, f: &CoordFunctional) -> Result<CoordVector> {
        let dual = self.dual_space();
        let g = dual.normalizing_functional(&CoordVector::new(f.0.clone()))?;
        Ok(CoordVector::new(g.0))
    }

    /// Whether `x` has a unique normalizing functional.
    pub fn is_smooth_at(&self, x: &CoordVector) -> bool {
        if x.is_zero() {
            return false;
        }
        match &self.norm {
            NormSpec::Polytope { dual_vertices } => {
                let nx = self.norm_unchecked(x.entries());
                let cutoff = nx - 1e-12 * nx.max(1.0);
                dual_vertices
                    .iter()
                    .filter(|v| pair_real(v, x.entries()).re >= cutoff)
                    .count()
                    == 1
            }
            _ => {
                let p = self.exponent().unwrap_or(2.0);
                if p == 1.0 {
                    x.entries().iter().all(|z| *z != ZERO)
                } else if p.is_infinite() {
                    let s = self.coordinate_scale().unwrap_or_default();
                    let mags: Vec<f64> = x.entries().iter().zip(&s).map(|(z, s)| s * z.norm()).collect();
                    let m = mags.iter().cloned().fold(0.0, f64::max);
                    mags.iter().filter(|&&a| a == m).count() == 1
                } else {
                    true
                }
            }
        }
    }
}

fn close(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12 * (1.0 + x.abs()))
}

fn pair_real(v: &[f64], x: &[C64]) -> C64 {
    v.iter().zip(x).map(|(a, z)| z * *a).sum()
}

fn phase_step(t: usize) -> C64 {
    C64::from_polar(1.0, std::f64::consts::TAU * t as f64 / PHASE_STEPS as f64)
}

/// All `PHASE_STEPS^n` unimodular vectors on the lattice, or only those with a
/// unit first coordinate when `fix_first` is set.
pub(crate) fn phase_lattice(n: usize, fix_first: bool) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = vec![Vec::new()];
    for k in 0..n {
        let steps = if fix_first && k == 0 { 1 } else { PHASE_STEPS };
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..steps).map(move |t| {
                    let mut v = prefix.clone();
                    v.push(phase_step(t));
                    v
                })
            })
            .collect();
    }
    out
}

/// `{±1}^n` in binary order with `+1` first.
pub(crate) fn sign_vectors(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << n)
        .map(|mask| {
            (0..n)
                .map(|k| if mask >> (n - 1 - k) & 1 == 0 { 1.0 } else { -1.0 })
                .collect()
        })
        .collect()
}

/// `±c_k e_k` for every coordinate.
fn signed_units(n: usize, c: &[f64]) -> Vec<CoordVector> {
    let mut out = Vec::with_capacity(2 * n);
    for k in 0..n {
        for sgn in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[k] = sgn * c[k];
            out.push(CoordVector::from_real(&v));
        }
    }
    out
}

fn validate_polytope(dim: usize, vertices: &[Vec<f64>]) -> Result<()> {
    if vertices.is_empty() {
        return Err(Error::InvalidSpace("polytope needs dual vertices".into()));
    }
    for v in vertices {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        if v.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidSpace("dual vertices must be finite".into()));
        }
        let neg: Vec<f64> = v.iter().map(|a| -a).collect();
        if !vertices.iter().any(|w| close(w, &neg)) {
            return Err(Error::InvalidSpace(format!(
                "dual vertex set is not symmetric: missing the negative of {v:?}"
            )));
        }
    }
    let m = DMatrix::from_fn(vertices.len(), dim, |i, j| vertices[i][j]);
    let sv = m.svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let rank = sv.iter().filter(|&&s| s > 1e-10 * smax.max(1e-300)).count();
    if rank < dim {
        return Err(Error::InvalidSpace(format!(
            "dual vertices span a subspace of dimension {rank} < {dim}"
        )));
    }
    Ok(())
}

/// One representative of each `±v` pair.
pub(crate) fn dedupe_sign(vertices: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vertices {
        let neg: Vec<f64> = v.iter().map(|a| -a).collect();
        if !out.iter().any(|w| close(w, v) || close(w, &neg)) {
            out.push(v.clone());
        }
    }
    out
}

/// Vertices of `{x : |⟨v, x⟩| ≤ 1 for all dual vertices v}` by enumerating
/// every choice of `dim` independent active constraints.
fn enumerate_ball_vertices(dim: usize, dual_vertices: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let half = dedupe_sign(dual_vertices);
    let m = half.len();
    let combos = binomial(m as u128, dim as u128).saturating_mul(1u128 << dim.min(100));
    if combos > POLYTOPE_ENUMERATION_CAP {
        return Err(Error::Unsupported(format!(
            "polytope with {m} vertex pairs in dimension {dim} is too large to enumerate"
        )));
    }
    let mut found: Vec<Vec<f64>> = Vec::new();
    for subset in combinations(m, dim) {
        let a = DMatrix::from_fn(dim, dim, |i, j| half[subset[i]][j]);
        let lu = a.clone().lu();
        let det = lu.determinant();
        let scale: f64 = subset
            .iter()
            .map(|&i| half[i].iter().map(|x| x * x).sum::<f64>().sqrt())
            .product();
        if det.abs() <= 1e-12 * scale.max(1e-300) {
            continue;
        }
        for signs in sign_vectors(dim) {
            let b = nalgebra::DVector::from_vec(signs);
            let Some(x) = lu.solve(&b) else { continue };
            let feasible = half.iter().all(|v| {
                let s: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                s.abs() <= 1.0 + VERTEX_TOL
            });
            if feasible {
                let xv: Vec<f64> = x.iter().cloned().collect();
                if !found
                    .iter()
                    .any(|w| w.iter().zip(&xv).all(|(a, b)| (a - b).abs() <= VERTEX_TOL))
                {
                    found.push(xv);
                }
            }
        }
    }
    if found.is_empty() {
        return Err(Error::InvalidSpace("polytope norm has no bounded unit ball".into()));
    }
    Ok(found)
}

pub(crate) fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut state: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let current = state.clone()?;
        let mut next = current.clone();
        let mut i = k;
        loop {
            if i == 0 {
                state = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                state = Some(next);
                break;
            }
        }
        Some(current)
    })
}

// ---- JSON --------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ExponentJson {
    Number(f64),
    Text(String),
}

impl ExponentJson {
    fn from_p(p: f64) -> Self {
        if p.is_infinite() {
            ExponentJson::Text("inf".into())
        } else {
            ExponentJson::Number(p)
        }
    }

    fn to_p(&self) -> Result<f64> {
        match self {
            ExponentJson::Number(p) => Ok(*p),
            ExponentJson::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "Infinity") => Ok(f64::INFINITY),
            ExponentJson::Text(s) => Err(Error::InvalidSpace(format!("unrecognized exponent {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum NormJson {
    Lp { p: ExponentJson },
    WeightedLp { p: ExponentJson, weights: Vec<f64> },
    Polytope { dual_vertices: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SpaceJson {
    dim: usize,
    field: Field,
    norm: NormJson,
}

impl Serialize for SpaceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let norm = match &self.norm {
            NormSpec::Lp { p } => NormJson::Lp {
                p: ExponentJson::from_p(*p),
            },
            NormSpec::WeightedLp { p, weights } => NormJson::WeightedLp {
                p: ExponentJson::from_p(*p),
                weights: weights.clone(),
            },
            NormSpec::Polytope { dual_vertices } => NormJson::Polytope {
                dual_vertices: dual_vertices.clone(),
            },
        };
        SpaceJson {
            dim: self.dim,
            field: self.field,
            norm,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for SpaceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = SpaceJson::deserialize(d)?;
        let norm = match raw.norm {
            NormJson::Lp { p } => NormSpec::Lp {
                p: p.to_p().map_err(serde::de::Error::custom)?,
            },
            NormJson::WeightedLp { p, weights } => NormSpec::WeightedLp {
                p: p.to_p().map_err(serde::de::Error::custom)?,
                weights,
            },
            NormJson::Polytope { dual_vertices } => NormSpec::Polytope { dual_vertices },
        };
        SpaceSpec::new(raw.dim, raw.field, norm).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> CoordVector {
        CoordVector::from_real(x)
    }

    fn f(x: &[f64]) -> CoordFunctional {
        CoordFunctional::from_real(x)
    }

    #[test]
    fn norms_of_named_vectors() {
        let l1 = SpaceSpec::real_lp(2, 1.0).unwrap();
        assert!((l1.norm(&v(&[0.25, -0.75])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(l1.norm(&v(&[0.0, 0.0])).unwrap(), 0.0);
        let l2 = SpaceSpec::real_lp(2, 2.0).unwrap();
        assert!((l2.norm(&v(&[3.0, 4.0])).unwrap() - 5.0).abs() < 1e-15);
        assert!((l1.dual_norm(&f(&[1.0, -1.0])).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(l1.dual_norm(&f(&[0.0, 0.0])).unwrap(), 0.0);
        assert!((l2.dual_norm(&f(&[3.0, 4.0])).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn large_p_does_not_overflow() {
        let s = SpaceSpec::real_lp(3, 400.0).unwrap();
        let n = s.norm(&v(&[1e200, 2e200, -3e200])).unwrap();
        assert!(n.is_finite() && (n / 3e200 - 1.0).abs() < 1e-2);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let s = SpaceSpec::real_lp(3, 2.0).unwrap();
        assert_eq!(
            s.norm(&v(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn invalid_spaces_are_rejected() {
        assert!(SpaceSpec::real_lp(2, 0.5).is_err());
        assert!(SpaceSpec::real_lp(0, 2.0).is_err());
        assert!(SpaceSpec::weighted_lp(2, Field::Real, 2.0, vec![1.0, 0.0]).is_err());
        assert!(SpaceSpec::polytope(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0]]).is_err());
        assert!(SpaceSpec::polytope(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(matches!(
            SpaceSpec::new(
                2,
                Field::Complex,
                NormSpec::Polytope {
                    dual_vertices: vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0]]
                }
            ),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn dual_extreme_points_of_polyhedral_spaces() {
        let l1 = SpaceSpec::real_lp(2, 1.0).unwrap();
        let pts = l1.dual_extreme_points(1).unwrap();
        assert!(pts.exhaustive);
        let mut got: Vec<Vec<f64>> = pts.points.iter().map(|p| p.real_parts()).collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            got,
            vec![vec![-1.0, -1.0], vec![-1.0, 1.0], vec![1.0, -1.0], vec![1.0, 1.0]]
        );
        let linf = SpaceSpec::real_lp(3, f64::INFINITY).unwrap();
        let pts = linf.dual_extreme_points(5).unwrap();
        assert_eq!(pts.points.len(), 6);
        for k in 0..3 {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; 3];
                e[k] = s;
                assert!(pts.points.iter().any(|p| p.real_parts() == e));
            }
        }
        assert!(matches!(l1.dual_extreme_points(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn sampled_dual_points_have_unit_norm() {
        let l2 = SpaceSpec::real_lp(2, 2.0).unwrap();
        let pts = l2.dual_extreme_points(8).unwrap();
        assert!(!pts.exhaustive);
        assert_eq!(pts.points.len(), 8);
        for p in &pts.points {
            assert!((l2.dual_norm(p).unwrap() - 1.0).abs() < 1e-12);
        }
        let l3c = SpaceSpec::complex_lp(3, 3.0).unwrap();
        for p in &l3c.dual_extreme_points(20).unwrap().points {
            assert!((l3c.dual_norm(p).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalizing_functionals_of_named_vectors() {
        let l2 = SpaceSpec::real_lp(2, 2.0).unwrap();
        assert_eq!(l2.normalizing_functional(&v(&[1.0, 0.0])).unwrap().real_parts(), vec![1.0, 0.0]);
        let l1 = SpaceSpec::real_lp(2, 1.0).unwrap();
        assert_eq!(
            l1.normalizing_functional(&v(&[0.25, -0.75])).unwrap().real_parts(),
            vec![1.0, -1.0]
        );
        assert_eq!(l1.normalizing_functional(&v(&[0.0, 0.0])), Err(Error::ZeroVector));
    }

    #[test]
    fn lexicographic_tie_breaking() {
        let l1 = SpaceSpec::real_lp(2, 1.0).unwrap();
        // zero coordinate is free in [-1, 1]; the smallest vertex picks -1
        assert_eq!(l1.normalizing_functional(&v(&[1.0, 0.0])).unwrap().real_parts(), vec![1.0, -1.0]);
        let linf = SpaceSpec::real_lp(2, f64::INFINITY).unwrap();
        // candidates e1* and e2*; e2* = (0, 1) precedes (1, 0)
        assert_eq!(linf.normalizing_functional(&v(&[1.0, 1.0])).unwrap().real_parts(), vec![0.0, 1.0]);
        // candidates e1* and -e2*; (0, -1) precedes (1, 0)
        assert_eq!(linf.normalizing_functional(&v(&[1.0, -1.0])).unwrap().real_parts(), vec![0.0, -1.0]);
    }

    #[test]
    fn lp_normalizing_functional_satisfies_both_equalities() {
        for p in [1.5, 3.0, 7.0] {
            let s = SpaceSpec::real_lp(3, p).unwrap();
            let x = v(&[0.3, -1.2, 0.7]);
            let nx = s.norm(&x).unwrap();
            let g = s.normalizing_functional(&x).unwrap();
            assert!((g.apply(&x).re - nx).abs() < 1e-12);
            assert!((s.dual_norm(&g).unwrap() - 1.0).abs() < 1e-12);
        }
        let c = SpaceSpec::complex_lp(2, 3.0).unwrap();
        let x = CoordVector::new(vec![C64::new(0.3, -0.4), C64::new(-1.0, 0.2)]);
        let g = c.normalizing_functional(&x).unwrap();
        assert!((g.apply(&x) - re(c.norm(&x).unwrap())).norm() < 1e-12);
        assert!((c.dual_norm(&g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_duality_transfers_weights() {
        for p in [1.0, 1.5, 2.0, 4.0, f64::INFINITY] {
            let s = SpaceSpec::weighted_lp(3, Field::Real, p, vec![0.5, 2.0, 3.0]).unwrap();
            let x = v(&[0.2, -0.9, 0.4]);
            let g = s.normalizing_functional(&x).unwrap();
            assert!((g.apply(&x).re - s.norm(&x).unwrap()).abs() < 1e-12, "p = {p}");
            assert!((s.dual_norm(&g).unwrap() - 1.0).abs() < 1e-12, "p = {p}");
            let d = s.dual_space();
            let h = f(&[0.7, -0.1, 0.25]);
            assert!((d.norm(&CoordVector::new(h.0.clone())).unwrap() - s.dual_norm(&h).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rotated_square_polytope() {
        let c = std::f64::consts::FRAC_1_SQRT_2;
        let s = SpaceSpec::polytope(
            2,
            vec![vec![c, -c], vec![-c, c], vec![c, c], vec![-c, -c]],
        )
        .unwrap();
        let verts = s.ball_vertices().unwrap();
        assert_eq!(verts.len(), 4);
        for u in &verts {
            assert!((s.norm(u).unwrap() - 1.0).abs() < 1e-12);
        }
        // the unit ball has vertices (±√2, 0) and (0, ±√2)
        assert!((s.dual_norm(&f(&[1.0, 0.0])).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert!((s.dual_norm(&f(&[c, c])).unwrap() - 1.0).abs() < 1e-12);
        let x = v(&[0.3, 0.9]);
        let g = s.normalizing_functional(&x).unwrap();
        assert!((g.apply(&x).re - s.norm(&x).unwrap()).abs() < 1e-12);
        assert!((s.dual_norm(&g).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn polytope_matches_l1_and_linf() {
        let cross = SpaceSpec::polytope(3, sign_vectors(3)).unwrap();
        let l1 = SpaceSpec::real_lp(3, 1.0).unwrap();
        let x = v(&[0.5, -2.0, 1.25]);
        assert!((cross.norm(&x).unwrap() - l1.norm(&x).unwrap()).abs() < 1e-12);
        assert!((cross.dual_norm(&f(&[0.5, -2.0, 1.25])).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(cross.ball_vertices().unwrap().len(), 6);
        assert!(cross.is_one_unconditional());
    }

    #[test]
    fn json_round_trip_and_schema() {
        let s: SpaceSpec =
            serde_json::from_str(r#"{"dim":2,"field":"real","norm":{"kind":"lp","p":"inf"}}"#).unwrap();
        assert_eq!(s, SpaceSpec::real_lp(2, f64::INFINITY).unwrap());
        let w = SpaceSpec::weighted_lp(2, Field::Complex, 3.0, vec![1.0, 2.0]).unwrap();
        let text = serde_json::to_string(&w).unwrap();
        assert_eq!(serde_json::from_str::<SpaceSpec>(&text).unwrap(), w);
        assert!(serde_json::from_str::<SpaceSpec>(r#"{"dim":2,"field":"real","norm":{"kind":"lp","p":0.5}}"#).is_err());
    }

    #[test]
    fn combinations_are_lexicographic() {
        let c: Vec<Vec<usize>> = combinations(4, 2).collect();
        assert_eq!(c, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
        assert_eq!(combinations(3, 0).count(), 1);
        assert_eq!(binomial(20, 3), 1140);
    }
}
