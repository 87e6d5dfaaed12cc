//! Constructions of finite unit norm tight frames.

mod search;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{auerbach_basis, FramePair, FrameSystem};
use crate::scalar::{CoordFunctional, CoordVector, C64};
use crate::spaces::{Field, NormSpec, SpaceSpec};

pub use search::{search_funtf, SearchOptions, SearchOutcome};

/// Tolerance on `Σλ_j` for [`DiagonalTarget`] and on `Σt_j = 1`.
const SUM_TOL: f64 = 1e-9;

/// A diagonal operator `Σ λ_j e_j*⊗e_j` on a space whose canonical basis is
/// 1-unconditional.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTarget {
    space: SpaceSpec,
    lambdas: Vec<f64>,
}

impl DiagonalTarget {
    pub fn new(space: SpaceSpec, lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: lambdas.len(),
            });
        }
        if lambdas.iter().any(|l| !(l.is_finite() && *l >= 0.0)) {
            return Err(Error::InvalidArgument("diagonal entries must be finite and nonnegative".into()));
        }
        if !space.is_one_unconditional() {
            return Err(Error::Unsupported("the canonical basis is not 1-unconditional".into()));
        }
        Ok(Self { space, lambdas })
    }

    /// `λ_j = total/n` for every `j`.
    pub fn uniform(space: SpaceSpec, total: f64) -> Result<Self> {
        let n = space.dim();
        Self::new(space, vec![total / n as f64; n])
    }

    pub fn space(&self) -> &SpaceSpec {
        &self.space
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn total(&self) -> f64 {
        self.lambdas.iter().sum()
    }
}

/// `α` on the unit sphere of `X`, `β` on the unit sphere of `X*`, with
/// `α_j β_j = t_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LozFactorization {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

/// Lozanovskii factorization of a point `t` of the simplex.
///
/// For weighted `ℓp` with `‖x‖ = ‖s∘x‖_p` the factors are
/// `α_j = t_j^{1/p}/s_j` and `β_j = s_j t_j^{1/q}`. For 1-unconditional
/// polytopes `α` maximizes `Σ t_j log α_j` over the positive part of the unit
/// ball and `β_j = t_j/α_j`, which is the optimality condition.
pub fn lozanovskii(space: &SpaceSpec, t: &[f64]) -> Result<LozFactorization> {
    let n = space.dim();
    if t.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: t.len() });
    }
    if t.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
    }
    let sum: f64 = t.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidArgument(format!("weights must sum to 1, got {sum}")));
    }
    if !space.is_one_unconditional() {
        return Err(Error::Unsupported("the canonical basis is not 1-unconditional".into()));
    }
    match space.norm_spec() {
        NormSpec::Lp { p } | NormSpec::WeightedLp { p, .. } => {
            let s = space.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            let inv_q = 1.0 - inv_p;
            Ok(LozFactorization {
                alphas: t.iter().zip(&s).map(|(t, s)| t.powf(inv_p) / s).collect(),
                betas: t.iter().zip(&s).map(|(t, s)| s * t.powf(inv_q)).collect(),
            })
        }
        NormSpec::Polytope { dual_vertices } => polytope_factorization(space, dual_vertices, t),
    }
}

fn polytope_factorization(space: &SpaceSpec, dual_vertices: &[Vec<f64>], t: &[f64]) -> Result<LozFactorization> {
    let n = space.dim();
    let support: Vec<usize> = (0..n).filter(|&j| t[j] > 0.0).collect();
    let k = support.len();
    // constraints Σ_j |v_j| α_j ≤ 1, one per dual vertex
    let rows: Vec<Vec<f64>> = dual_vertices
        .iter()
        .map(|v| support.iter().map(|&j| v[j].abs()).collect())
        .collect();
    let tk: Vec<f64> = support.iter().map(|&j| t[j]).collect();
    let widest = rows.iter().map(|r| r.iter().sum::<f64>()).fold(0.0, f64::max);
    let mut a = vec![0.5 / widest; k];

    let objective = |a: &[f64], mu: f64| -> f64 {
        let mut val: f64 = tk.iter().zip(a).map(|(t, a)| t * a.ln()).sum();
        for r in &rows {
            let slack = 1.0 - r.iter().zip(a).map(|(r, a)| r * a).sum::<f64>();
            if slack <= 0.0 {
                return f64::NEG_INFINITY;
            }
            val += mu * slack.ln();
        }
        val
    };

    let mut mu = 1.0;
    let mut iterations = 0;
    while mu > 1e-15 {
        for _ in 0..100 {
            iterations += 1;
            let mut grad = DVector::from_fn(k, |i, _| tk[i] / a[i]);
            let mut hess = DMatrix::from_fn(k, k, |i, j| if i == j { tk[i] / (a[i] * a[i]) } else { 0.0 });
            for r in &rows {
                let slack = 1.0 - r.iter().zip(&a).map(|(r, a)| r * a).sum::<f64>();
                let rv = DVector::from_column_slice(r);
                grad -= &rv * (mu / slack);
                hess += &rv * rv.transpose() * (mu / (slack * slack));
            }
            let Some(chol) = hess.clone().cholesky() else {
                return Err(Error::NonConvergence {
                    what: "Lozanovskii factorization".into(),
                    iterations,
                });
            };
            let step = chol.solve(&grad);
            let decrement = grad.dot(&step);
            if decrement < 1e-24 {
                break;
            }
            let base = objective(&a, mu);
            let mut tau = 1.0;
            loop {
                let trial: Vec<f64> = a.iter().zip(step.iter()).map(|(a, d)| a + tau * d).collect();
                if trial.iter().all(|v| *v > 0.0) {
                    let val = objective(&trial, mu);
                    if val >= base + 0.25 * tau * decrement {
                        a = trial;
                        break;
                    }
                }
                tau *= 0.5;
                if tau < 1e-20 {
                    break;
                }
            }
            if tau < 1e-20 {
                break;
            }
        }
        mu *= 0.1;
    }

    let mut alphas = vec![0.0; n];
    let mut betas = vec![0.0; n];
    for (i, &j) in support.iter().enumerate() {
        alphas[j] = a[i];
        betas[j] = t[j] / a[i];
    }
    let na = space.norm(&CoordVector::from_real(&alphas))?;
    let nb = space.dual_norm(&CoordFunctional::from_real(&betas))?;
    Ok(LozFactorization {
        alphas: alphas.iter().map(|v| v / na).collect(),
        betas: betas.iter().map(|v| v / nb).collect(),
    })
}

/// `e^{-2πi m/n}`, reduced modulo `n` first.
fn root_of_unity(m: usize, n: usize) -> C64 {
    let angle = -std::f64::consts::TAU * (m % n) as f64 / n as f64;
    C64::from_polar(1.0, angle)
}

/// `n` normalized pairs whose frame operator is `diag(λ)`, where `Σλ_j = n`.
///
/// Complex field: `x_k = Σ_j ω^{k(j+1)} α_j e_j`, `f_k = Σ_j ω^{-k(j+1)} β_j e_j*`
/// with `ω = e^{-2πi/n}` and `(α, β)` the Lozanovskii factors of `λ/n`. The
/// real field is only handled for `n ≤ 2`, with `x = (α_1, ±α_2)`,
/// `f = (β_1, ±β_2)`.
pub fn dft_funtf(target: &DiagonalTarget) -> Result<FrameSystem> {
    let space = target.space();
    let n = space.dim();
    let total = target.total();
    if (total - n as f64).abs() > SUM_TOL {
        return Err(Error::InvalidArgument(format!(
            "diagonal must sum to the dimension {n}, got {total}"
        )));
    }
    if space.field() == Field::Real && n > 2 {
        return Err(Error::Unsupported(format!(
            "no construction is available for real spaces of dimension {n} > 2"
        )));
    }
    let t: Vec<f64> = target.lambdas().iter().map(|l| l / n as f64).collect();
    let loz = lozanovskii(space, &t)?;
    let pairs = match space.field() {
        Field::Complex => (0..n)
            .map(|k| {
                let x = (0..n).map(|j| root_of_unity(k * (j + 1), n) * loz.alphas[j]).collect();
                let f = (0..n)
                    .map(|j| root_of_unity(k * (j + 1), n).conj() * loz.betas[j])
                    .collect();
                FramePair::new(CoordVector::new(x), CoordFunctional::new(f))
            })
            .collect(),
        Field::Real => {
            let (a, b) = (&loz.alphas, &loz.betas);
            if n == 1 {
                vec![FramePair::from_real(&[a[0]], &[b[0]])]
            } else {
                vec![
                    FramePair::from_real(&[a[0], a[1]], &[b[0], b[1]]),
                    FramePair::from_real(&[a[0], -a[1]], &[b[0], -b[1]]),
                ]
            }
        }
    };
    FrameSystem::new(space.clone(), pairs)
}

/// Normalized pairs with frame operator `diag(λ)`, for any integer
/// `Σλ_j = N ≥ n`: while the trace exceeds `n`, the largest `λ_j` (lowest
/// index among ties) is decremented and the pair `(e_j/‖e_j‖, ‖e_j‖e_j*)`
/// appended; the remainder goes through [`dft_funtf`]. The DFT pairs come
/// first in the output.
pub fn funtf_from_diagonal(target: &DiagonalTarget) -> Result<FrameSystem> {
    let space = target.space();
    let n = space.dim();
    let total = target.total();
    let rounded = total.round();
    if (total - rounded).abs() > SUM_TOL || rounded < n as f64 {
        return Err(Error::InvalidArgument(format!(
            "diagonal must sum to an integer at least {n}, got {total}"
        )));
    }
    let mut lambdas = target.lambdas().to_vec();
    let mut basis_pairs = Vec::new();
    for _ in 0..(rounded as usize - n) {
        let max = lambdas.iter().cloned().fold(f64::MIN, f64::max);
        let j = lambdas.iter().position(|&l| l >= max - 1e-12).expect("nonempty diagonal");
        lambdas[j] -= 1.0;
        let e = CoordVector::unit(n, j);
        let ne = space.norm(&e)?;
        basis_pairs.push(FramePair::new(e.scaled_re(1.0 / ne), CoordFunctional::unit(n, j).scaled_re(ne)));
    }
    for l in lambdas.iter_mut() {
        // decrements of exact integers can leave -0.0 or tiny negatives
        *l = l.max(0.0);
    }
    let rest = dft_funtf(&DiagonalTarget::new(space.clone(), lambdas)?)?;
    let mut pairs = rest.pairs().to_vec();
    pairs.extend(basis_pairs);
    FrameSystem::new(space.clone(), pairs)
}

/// A FUNTF of length `len` with frame operator `(len/n)·I`.
pub fn funtf_of_length(space: &SpaceSpec, len: usize) -> Result<FrameSystem> {
    let n = space.dim();
    if len < n {
        return Err(Error::InvalidArgument(format!("length {len} is below the dimension {n}")));
    }
    funtf_from_diagonal(&DiagonalTarget::uniform(space.clone(), len as f64)?)
}

/// `copies` Auerbach bases side by side, a FUNTF of length `copies·n` for
/// any space.
pub fn auerbach_copies(space: &SpaceSpec, copies: usize) -> Result<FrameSystem> {
    if copies == 0 {
        return Err(Error::InvalidArgument("at least one copy is needed".into()));
    }
    let basis = auerbach_basis(space)?;
    let mut pairs = Vec::with_capacity(copies * basis.len());
    for _ in 0..copies {
        pairs.extend(basis.pairs().iter().cloned());
    }
    FrameSystem::new(space.clone(), pairs)
}

/// The parameter `a` of [`ell1_funtf_n_plus_1`], the root of
/// `−a + (n−3)(1−a)/(n−1) + 1/n = 0`.
pub fn ell1_n_plus_1_parameter(n: usize) -> f64 {
    let n = n as f64;
    (n * n - 2.0 * n - 1.0) / (n * (2.0 * n - 4.0))
}

/// A FUNTF of length `n+1` on real `ℓ1ⁿ`, `n ≥ 3`:
/// `x_j = a e_j − b Σ_{i≠j} e_i`, `f_j = e_j − Σ_{i≠j} e_i*` with
/// `b = (1−a)/(n−1)`, followed by `x = (1/n, …, 1/n)`, `f = (1, …, 1)`.
pub fn ell1_funtf_n_plus_1(n: usize) -> Result<FrameSystem> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "the n+1 family needs n ≥ 3, got {n}; use dft_funtf for n = 2"
        )));
    }
    let a = ell1_n_plus_1_parameter(n);
    let b = (1.0 - a) / (n - 1) as f64;
    let mut pairs: Vec<FramePair> = (0..n)
        .map(|j| {
            let x: Vec<f64> = (0..n).map(|i| if i == j { a } else { -b }).collect();
            let f: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { -1.0 }).collect();
            FramePair::from_real(&x, &f)
        })
        .collect();
    pairs.push(FramePair::from_real(&vec![1.0 / n as f64; n], &vec![1.0; n]));
    FrameSystem::new(SpaceSpec::real_lp(n, 1.0)?, pairs)
}

/// The explicit FUNTFs of lengths 5 on `ℓ1³` and 6, 7 on `ℓ1⁴`.
pub fn ell1_special(dim: usize, len: usize) -> Result<FrameSystem> {
    let pairs = match (dim, len) {
        (3, 5) => {
            let (a, b) = (1.0 / 6.0, 5.0 / 12.0);
            let mut pairs = vec![FramePair::from_real(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0])];
            for (s2, s3) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
                pairs.push(FramePair::from_real(&[-a, s2 * b, s3 * b], &[-1.0, s2, s3]));
            }
            pairs
        }
        (4, 6) => ell1_4_pairs(1.0 / 4.0, 3.0 / 8.0, 1.0 / 4.0, 3.0 / 4.0),
        (4, 7) => {
            let mut pairs = ell1_4_pairs(1.0 / 8.0, 7.0 / 16.0, 5.0 / 8.0, 3.0 / 8.0);
            pairs.push(FramePair::from_real(&[0.0, 0.0, 0.0, 1.0], &[0.0, 0.0, 0.0, 1.0]));
            pairs
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "no explicit ℓ1 frame for dimension {dim} and length {len}; available: (3,5), (4,6), (4,7)"
            )))
        }
    };
    FrameSystem::new(SpaceSpec::real_lp(dim, 1.0)?, pairs)
}

/// A FUNTF of length `len` on real `ℓ1ⁿ` assembled as a union of known
/// ones: Auerbach bases (length n), the n+1 family and the explicit frames
/// above. Every `len ≥ n(n−1)` is reachable; other lengths are attempted by
/// the same decomposition and reported unsupported when none exists.
pub fn ell1_funtf_of_length(n: usize, len: usize) -> Result<FrameSystem> {
    if n == 0 || len < n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ n ≤ len, got n = {n}, len = {len}")));
    }
    let space = SpaceSpec::real_lp(n, 1.0)?;
    if n <= 2 {
        return funtf_of_length(&space, len);
    }
    let mut blocks = vec![n, n + 1];
    match n {
        3 => blocks.push(5),
        4 => blocks.extend([6, 7]),
        _ => {}
    }
    // fewest blocks; ties keep the first block found in `blocks` order
    let mut best: Vec<Option<(usize, usize)>> = vec![None; len + 1];
    best[0] = Some((0, 0));
    for l in 1..=len {
        for &b in &blocks {
            if b <= l {
                if let Some((count, _)) = best[l - b] {
                    if best[l].is_none_or(|(c, _)| count + 1 < c) {
                        best[l] = Some((count + 1, b));
                    }
                }
            }
        }
    }
    if best[len].is_none() {
        return Err(Error::Unsupported(format!(
            "length {len} on real ℓ1^{n} is not a sum of the available lengths {blocks:?}"
        )));
    }
    let mut pairs = Vec::with_capacity(len);
    let mut rest = len;
    while rest > 0 {
        let (_, b) = best[rest].expect("reachable by construction");
        let part = if b == n {
            auerbach_basis(&space)?
        } else if b == n + 1 {
            ell1_funtf_n_plus_1(n)?
        } else {
            ell1_special(n, b)?
        };
        pairs.extend(part.pairs().iter().cloned());
        rest -= b;
    }
    FrameSystem::new(space, pairs)
}

// (a, ±b, ±b, 0) and (c, 0, 0, ±d) with functionals of the same sign pattern
fn ell1_4_pairs(a: f64, b: f64, c: f64, d: f64) -> Vec<FramePair> {
    let mut pairs = Vec::new();
    for (s2, s3) in [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)] {
        pairs.push(FramePair::from_real(&[a, s2 * b, s3 * b, 0.0], &[1.0, s2, s3, 0.0]));
    }
    for s4 in [1.0, -1.0] {
        pairs.push(FramePair::from_real(&[c, 0.0, 0.0, s4 * d], &[1.0, 0.0, 0.0, s4]));
    }
    pairs
}

#[cfg(test)]
mod tests;
