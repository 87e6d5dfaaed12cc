//! Pietsch weights by a log-det barrier method.
//!
//! With dual points `g_i` of the domain (`γ_i = conj(g_i)`) and Hermitian
//! forms `A_h` with `‖Tx‖²_Y = max_h xᴴA_h x`, the squared 2-summing norm is
//! the value of
//!
//! ```text
//! minimize Σ w_i  subject to  G_w = Σ w_i γ_i γ_iᴴ ⪰ A_h for all h,  w ≥ 0.
//! ```
//!
//! The barrier problem `t·Σw − Σ_h log det(G_w − A_h) − Σ log w_i` is
//! minimized by damped Newton steps for increasing `t`. Every iterate gives an
//! upper bound through its normalized weights, and `Z_h = (G_w − A_h)⁻¹/t`
//! is a dual point whose eigenvectors form an admissible sequence.

use nalgebra::DMatrix;

use super::ascent::{evaluate_sequence, merge_parallel, SequenceValue};
use crate::linalg::{cholesky, eigh, generalized_lambda_max, nnls, CMatrix, CVector};
use crate::scalar::{re, CoordFunctional, C64, ZERO};
use crate::spaces::{dedupe_sign, Field, NormSpec, SpaceSpec, PHASE_STEPS};

const GROWTH: f64 = 8.0;
const MAX_NEWTON: usize = 80;
// sampled sphere points for smooth norms; the cost per Newton step grows
// like forms × points²
const SMOOTH_POINT_CAP: usize = 64;

/// Dual points of the domain that carry the Pietsch weights.
pub(crate) struct DomainPoints {
    pub points: Vec<CoordFunctional>,
    pub exhaustive: bool,
}

pub(crate) fn domain_points(space: &SpaceSpec, budget: usize, seed: u64) -> DomainPoints {
    let n = space.dim();
    if let NormSpec::Polytope { dual_vertices } = space.norm_spec() {
        return DomainPoints {
            points: dedupe_sign(dual_vertices).iter().map(|v| CoordFunctional::from_real(v)).collect(),
            exhaustive: true,
        };
    }
    let s = space.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
    let p = space.exponent().unwrap_or(2.0);
    if p.is_infinite() {
        // extreme points are phases of s_k e_k*; |g(x)| ignores the phase
        let points = (0..n)
            .map(|k| {
                let mut v = vec![ZERO; n];
                v[k] = re(s[k]);
                CoordFunctional::new(v)
            })
            .collect();
        return DomainPoints {
            points,
            exhaustive: space.field() == Field::Real,
        };
    }
    if p == 1.0 {
        let raw: Vec<Vec<C64>> = match space.field() {
            Field::Real => sign_vectors_fixed_first(n)
                .into_iter()
                .map(|v| v.into_iter().map(re).collect())
                .collect(),
            Field::Complex => {
                let mut steps = PHASE_STEPS;
                while steps > 4 && steps.pow(n.saturating_sub(1) as u32) > budget.max(16) {
                    steps /= 2;
                }
                coarse_phase_lattice(n, steps)
            }
        };
        return DomainPoints {
            points: raw
                .into_iter()
                .map(|v| CoordFunctional::new(v.iter().zip(&s).map(|(z, s)| z * s).collect()))
                .collect(),
            exhaustive: space.field() == Field::Real,
        };
    }
    let mut points: Vec<CoordFunctional> = Vec::new();
    for g in space.sampled_dual_sphere(budget.min(SMOOTH_POINT_CAP), seed) {
        let dup = points.iter().any(|q| {
            let inner: C64 = q.0.iter().zip(&g.0).map(|(a, b)| a.conj() * b).sum();
            let na: f64 = q.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let nb: f64 = g.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            (inner.norm() - na * nb).abs() <= 1e-12 * na * nb
        });
        if !dup {
            points.push(g);
        }
    }
    DomainPoints {
        points,
        exhaustive: false,
    }
}

fn sign_vectors_fixed_first(n: usize) -> Vec<Vec<f64>> {
    crate::spaces::sign_vectors(n)
        .into_iter()
        .filter(|v| v[0] > 0.0)
        .collect()
}

/// Unimodular vectors with unit first coordinate and `steps` phases elsewhere.
pub(crate) fn coarse_phase_lattice(n: usize, steps: usize) -> Vec<Vec<C64>> {
    let mut out: Vec<Vec<C64>> = vec![vec![re(1.0)]];
    for _ in 1..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..steps).map(move |t| {
                    let mut v = prefix.clone();
                    v.push(C64::from_polar(1.0, std::f64::consts::TAU * t as f64 / steps as f64));
                    v
                })
            })
            .collect();
    }
    out
}

/// Hermitian forms bounding `‖Tx‖²_Y` from above, up to the factor
/// `inflation²`; `exact` when the bound is rigorous.
pub(crate) struct RangeForms {
    pub forms: Vec<CMatrix>,
    pub inflation: f64,
    pub exact: bool,
}

pub(crate) fn range_forms(t: &CMatrix, space: &SpaceSpec, budget: usize, seed: u64) -> RangeForms {
    let n = space.dim();
    let from_functionals = |hs: Vec<Vec<C64>>| -> Vec<CMatrix> {
        hs.into_iter()
            .map(|h| {
                // u = conj(Tᵀh), so |hᵀTx|² = xᴴ u uᴴ x
                let u = CVector::from_fn(n, |k, _| (0..n).map(|i| h[i] * t[(i, k)]).sum::<C64>().conj());
                &u * u.adjoint()
            })
            .collect()
    };
    if space.is_hilbert() {
        let s = space.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
        let d = CMatrix::from_fn(n, n, |i, k| if i == k { re(s[i] * s[i]) } else { ZERO });
        return RangeForms {
            forms: vec![t.adjoint() * d * t],
            inflation: 1.0,
            exact: true,
        };
    }
    if let NormSpec::Polytope { dual_vertices } = space.norm_spec() {
        return RangeForms {
            forms: from_functionals(
                dedupe_sign(dual_vertices)
                    .iter()
                    .map(|v| v.iter().map(|&a| re(a)).collect())
                    .collect(),
            ),
            inflation: 1.0,
            exact: true,
        };
    }
    let s = space.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
    let p = space.exponent().unwrap_or(2.0);
    if p.is_infinite() {
        let hs = (0..n)
            .map(|k| {
                let mut v = vec![ZERO; n];
                v[k] = re(s[k]);
                v
            })
            .collect();
        return RangeForms {
            forms: from_functionals(hs),
            inflation: 1.0,
            exact: true,
        };
    }
    if p == 1.0 {
        let (raw, inflation) = match space.field() {
            Field::Real => (
                sign_vectors_fixed_first(n)
                    .into_iter()
                    .map(|v| v.into_iter().map(re).collect())
                    .collect(),
                1.0,
            ),
            Field::Complex => {
                let mut steps = PHASE_STEPS;
                while steps > 4 && steps.pow(n.saturating_sub(1) as u32) > 64 {
                    steps /= 2;
                }
                // phases within π/steps of optimal recover cos(π/steps)·‖y‖₁
                (coarse_phase_lattice(n, steps), 1.0 / (std::f64::consts::PI / steps as f64).cos())
            }
        };
        let hs = raw
            .into_iter()
            .map(|v: Vec<C64>| v.iter().zip(&s).map(|(z, s)| z * s).collect())
            .collect();
        return RangeForms {
            forms: from_functionals(hs),
            inflation,
            exact: true,
        };
    }
    let hs = space
        .sampled_dual_sphere(budget.min(SMOOTH_POINT_CAP), seed ^ 0x9e37_79b9)
        .into_iter()
        .map(|g| g.0)
        .collect();
    RangeForms {
        forms: from_functionals(hs),
        inflation: 1.0,
        exact: false,
    }
}

pub(crate) struct Problem<'a> {
    pub op: &'a CMatrix,
    pub domain: &'a SpaceSpec,
    pub range: &'a SpaceSpec,
    pub points: DomainPoints,
    pub forms: RangeForms,
    gamma: CMatrix,
}

pub(crate) struct Solution {
    /// Normalized weights on `points`.
    pub weights: Vec<f64>,
    pub upper: f64,
    pub lower: SequenceValue,
}

impl<'a> Problem<'a> {
    pub fn new(op: &'a CMatrix, domain: &'a SpaceSpec, range: &'a SpaceSpec, budget: usize, seed: u64) -> Self {
        let points = domain_points(domain, budget, seed);
        let forms = range_forms(op, range, budget, seed);
        let n = domain.dim();
        let gamma = CMatrix::from_fn(n, points.points.len(), |r, c| points.points[c].0[r].conj());
        Self {
            op,
            domain,
            range,
            points,
            forms,
            gamma,
        }
    }

    fn m(&self) -> usize {
        self.gamma.ncols()
    }

    fn gram(&self, w: &[f64]) -> CMatrix {
        let scaled = CMatrix::from_fn(self.gamma.nrows(), self.m(), |r, c| self.gamma[(r, c)] * w[c]);
        scaled * self.gamma.adjoint()
    }

    fn barrier_value(&self, w: &[f64], t: f64) -> Option<f64> {
        if w.iter().any(|&x| !(x > 0.0)) {
            return None;
        }
        let g = self.gram(w);
        let mut f = t * w.iter().sum::<f64>() - w.iter().map(|x| x.ln()).sum::<f64>();
        for a in &self.forms.forms {
            let ch = cholesky(&(&g - a))?;
            f -= 2.0 * ch.l_dirty().diagonal().iter().map(|z| z.re.ln()).sum::<f64>();
        }
        f.is_finite().then_some(f)
    }

    /// Inverses `(G_w − A_h)⁻¹`, or `None` outside the feasible cone.
    fn resolvents(&self, w: &[f64]) -> Option<Vec<CMatrix>> {
        let g = self.gram(w);
        self.forms
            .forms
            .iter()
            .map(|a| cholesky(&(&g - a)).map(|ch| ch.inverse()))
            .collect()
    }

    /// `sup_x ‖Tx‖² / xᴴG_w x` at the normalized weights, with small uniform
    /// mixing tried when `G_w` is numerically singular. Every candidate is a
    /// probability measure, so the minimum over them is a valid bound.
    pub fn upper_from_weights(&self, w: &[f64]) -> (f64, Vec<f64>) {
        let m = self.m();
        let total: f64 = w.iter().sum();
        let wbar: Vec<f64> = w.iter().map(|x| x / total).collect();
        let mut best = (f64::INFINITY, wbar.clone());
        for delta in [0.0, 1e-14, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1.0] {
            let mixed: Vec<f64> = wbar.iter().map(|x| (1.0 - delta) * x + delta / m as f64).collect();
            let Some(ch) = cholesky(&self.gram(&mixed)) else { continue };
            let val = self
                .forms
                .forms
                .iter()
                .map(|a| generalized_lambda_max(&ch, a))
                .fold(0.0, f64::max);
            if val.is_finite() {
                let up = val.max(0.0).sqrt() * self.forms.inflation;
                if up < best.0 {
                    best = (up, mixed);
                }
                if delta > 0.0 {
                    break;
                }
            }
        }
        best
    }

    fn lower_from_resolvents(&self, resolvents: &[CMatrix], t: f64) -> SequenceValue {
        let mut vectors: Vec<CVector> = Vec::new();
        let mut all: Vec<(f64, CVector)> = Vec::new();
        for r in resolvents {
            let (vals, vecs) = eigh(&r.scale(1.0 / t));
            for (k, &lam) in vals.iter().enumerate() {
                if lam > 0.0 {
                    all.push((lam, vecs.column(k).scale(lam.sqrt())));
                }
            }
        }
        let top = all.iter().map(|p| p.0).fold(0.0, f64::max);
        for (lam, v) in all {
            if lam > 1e-9 * top {
                vectors.push(v);
            }
        }
        evaluate_sequence(self.op, self.domain, self.range, &merge_parallel(&vectors))
    }

    /// Witness from complementary slackness at fixed weights: the top
    /// generalized eigenvectors `v_k` of the active forms, combined with
    /// `c ≥ 0` so that `Σ_k c_k |γ_iᴴv_k|² = 1` on the support of `w`.
    /// Unlike the resolvents this stays well conditioned as the barrier
    /// parameter grows.
    fn lower_from_weights(&self, w: &[f64]) -> SequenceValue {
        let Some(ch) = cholesky(&self.gram(w)) else {
            return SequenceValue::empty();
        };
        let l = ch.l();
        let lh = l.adjoint();
        let mut pairs: Vec<(f64, CVector)> = Vec::new();
        for a in &self.forms.forms {
            let Some(la) = l.solve_lower_triangular(a) else { continue };
            let Some(b) = l.solve_lower_triangular(&la.adjoint()) else { continue };
            let (vals, vecs) = eigh(&b);
            for (k, &lam) in vals.iter().enumerate() {
                if let Some(v) = lh.solve_upper_triangular(&vecs.column(k).into_owned()) {
                    pairs.push((lam, v));
                }
            }
        }
        let top = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
        let wmax = w.iter().cloned().fold(0.0, f64::max);
        if !(top > 0.0) || !(wmax > 0.0) {
            return SequenceValue::empty();
        }
        let mut best = SequenceValue::empty();
        for active in [1e-12, 1e-10, 1e-8, 1e-6] {
            let vs: Vec<&CVector> = pairs.iter().filter(|p| p.0 >= top * (1.0 - active)).map(|p| &p.1).collect();
            for support in [1e-10, 1e-7] {
                let rows: Vec<usize> = (0..w.len()).filter(|&i| w[i] > support * wmax).collect();
                let m = DMatrix::<f64>::from_fn(rows.len(), vs.len(), |r, k| {
                    self.gamma.column(rows[r]).dotc(vs[k]).norm_sqr()
                });
                let c = nnls(&m, &nalgebra::DVector::from_element(rows.len(), 1.0));
                let xs: Vec<CVector> = vs
                    .iter()
                    .zip(c.iter())
                    .filter(|(_, &c)| c > 0.0)
                    .map(|(v, &c)| v.scale(c.sqrt()))
                    .collect();
                let cand = evaluate_sequence(self.op, self.domain, self.range, &merge_parallel(&xs));
                if cand.value > best.value {
                    best = cand;
                }
            }
        }
        best
    }

    fn newton_direction(&self, w: &[f64], t: f64, resolvents: &[CMatrix]) -> Option<(Vec<f64>, f64)> {
        let m = self.m();
        let mut grad: Vec<f64> = w.iter().map(|x| t - 1.0 / x).collect();
        let mut hess = DMatrix::<f64>::from_fn(m, m, |i, k| if i == k { 1.0 / (w[i] * w[i]) } else { 0.0 });
        for r in resolvents {
            let p = self.gamma.adjoint() * r * &self.gamma;
            for i in 0..m {
                grad[i] -= p[(i, i)].re;
                for k in 0..m {
                    hess[(i, k)] += p[(i, k)].norm_sqr();
                }
            }
        }
        let rhs = nalgebra::DVector::from_iterator(m, grad.iter().map(|g| -g));
        let mut shift = 0.0;
        let scale = (0..m).map(|i| hess[(i, i)]).fold(0.0, f64::max);
        loop {
            let mut h = hess.clone();
            for i in 0..m {
                h[(i, i)] += shift;
            }
            if let Some(ch) = nalgebra::Cholesky::new(h) {
                let d = ch.solve(&rhs);
                let dec: f64 = -grad.iter().zip(d.iter()).map(|(g, d)| g * d).sum::<f64>();
                if d.iter().all(|x| x.is_finite()) {
                    return Some((d.iter().cloned().collect(), dec));
                }
            }
            shift = if shift == 0.0 { 1e-14 * scale.max(1.0) } else { shift * 100.0 };
            if shift > scale.max(1.0) {
                return None;
            }
        }
    }

    /// Runs the barrier method until the interval `[lower, upper]` has
    /// relative width `rel_tol` or `max_outer` centering rounds are spent.
    pub fn solve(&self, rel_tol: f64, max_outer: usize) -> Solution {
        let m = self.m();
        let h = self.forms.forms.len();
        let n = self.gamma.nrows();
        let nu = (h * n + m) as f64;

        // start well inside the cone: c·G_1 ⪰ 2·A_h
        let g1 = self.gram(&vec![1.0; m]);
        let c = cholesky(&g1)
            .map(|ch| {
                self.forms
                    .forms
                    .iter()
                    .map(|a| generalized_lambda_max(&ch, a))
                    .fold(0.0, f64::max)
            })
            .unwrap_or(1.0);
        let mut w = vec![(2.0 * c).max(1e-3); m];
        let mut t = nu / w.iter().sum::<f64>();

        let (mut upper, mut best_w) = self.upper_from_weights(&w);
        let mut lower = SequenceValue::empty();
        let mut idle = 0;

        for _ in 0..max_outer {
            let mut f = match self.barrier_value(&w, t) {
                Some(f) => f,
                None => break,
            };
            let mut resolvents = match self.resolvents(&w) {
                Some(r) => r,
                None => break,
            };
            let mut stalled = false;
            for _ in 0..MAX_NEWTON {
                let Some((d, dec)) = self.newton_direction(&w, t, &resolvents) else {
                    stalled = true;
                    break;
                };
                if dec <= 1e-11 {
                    break;
                }
                let mut step = 1.0 / (1.0 + dec.sqrt()).max(1.0);
                if dec < 0.25 {
                    step = 1.0;
                }
                let mut accepted = false;
                for _ in 0..60 {
                    let trial: Vec<f64> = w.iter().zip(&d).map(|(x, d)| x + step * d).collect();
                    if let Some(ft) = self.barrier_value(&trial, t) {
                        if ft <= f - 0.01 * step * dec || (ft <= f && step * dec < 1e-12 * f.abs().max(1.0)) {
                            w = trial;
                            f = ft;
                            accepted = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                if !accepted {
                    stalled = true;
                    break;
                }
                match self.resolvents(&w) {
                    Some(r) => resolvents = r,
                    None => {
                        stalled = true;
                        break;
                    }
                }
            }

            let (up, wb) = self.upper_from_weights(&w);
            let lo = self.lower_from_resolvents(&resolvents, t);
            let mut progress = false;
            if up < upper * (1.0 - 1e-14) {
                progress = true;
            }
            if up < upper {
                upper = up;
                best_w = wb;
            }
            if lo.value > lower.value * (1.0 + 1e-14) {
                progress = true;
            }
            if lo.value > lower.value {
                lower = lo;
            }
            idle = if progress { 0 } else { idle + 1 };
            if upper - lower.value <= rel_tol * upper || stalled || idle >= 3 {
                break;
            }
            // the central path has reached rounding level
            if nu / t < 1e-14 * w.iter().sum::<f64>() {
                break;
            }
            t *= GROWTH;
        }
        let slack = self.lower_from_weights(&best_w);
        if slack.value > lower.value {
            lower = slack;
        }
        Solution {
            weights: best_w,
            upper,
            lower,
        }
    }
}
