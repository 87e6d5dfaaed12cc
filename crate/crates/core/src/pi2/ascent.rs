//! Admissible sequences: the weak-ℓ₂ constant, the ratio they certify, and a
//! local search that improves them.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::pietsch::coarse_phase_lattice;
use crate::linalg::{gaussian, lambda_max, seeded_rng, CMatrix, CVector};
use crate::scalar::{CoordFunctional, CoordVector, C64};
use crate::spaces::{Field, SpaceSpec, PHASE_STEPS};

/// `sup_{‖g‖_* ≤ 1} Σ_j |g(x_j)|²`, and whether the value is rigorous.
pub(crate) fn admissibility(space: &SpaceSpec, xs: &[CVector]) -> (f64, bool) {
    let n = space.dim();
    if xs.is_empty() {
        return (0.0, true);
    }
    let weak = |g: &[C64]| -> f64 {
        xs.iter()
            .map(|x| g.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<C64>().norm_sqr())
            .sum()
    };
    if space.is_real_polyhedral() {
        let pts = match space.dual_extreme_points(1) {
            Ok(p) => p.points,
            Err(_) => return (f64::NAN, false),
        };
        return (pts.iter().map(|g| weak(&g.0)).fold(0.0, f64::max), true);
    }
    let s = space.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
    let p = space.exponent().unwrap_or(2.0);
    if p == 2.0 {
        let q = xs.iter().fold(CMatrix::from_element(n, n, C64::new(0.0, 0.0)), |acc, x| {
            let y = CVector::from_fn(n, |k, _| x[k] * s[k]);
            acc + &y * y.adjoint()
        });
        return (lambda_max(&q).max(0.0), true);
    }
    if p.is_infinite() {
        let c = (0..n)
            .map(|k| s[k] * s[k] * xs.iter().map(|x| x[k].norm_sqr()).sum::<f64>())
            .fold(0.0, f64::max);
        return (c, true);
    }
    if p == 1.0 && space.field() == Field::Complex && n <= 5 {
        // the exact maximizer is within π/K per phase of a lattice point
        let mut c_lat: f64 = 0.0;
        for ph in coarse_phase_lattice(n, PHASE_STEPS) {
            let g: Vec<C64> = ph.iter().zip(&s).map(|(z, s)| z * s).collect();
            c_lat = c_lat.max(weak(&g));
        }
        let eps = 2.0 * (std::f64::consts::PI / (2.0 * PHASE_STEPS as f64)).sin();
        let l1: f64 = xs
            .iter()
            .map(|x| {
                let a: f64 = x.iter().zip(&s).map(|(z, s)| s * z.norm()).sum();
                a * a
            })
            .sum();
        let root = c_lat.sqrt() + eps * l1.sqrt();
        return (root * root, true);
    }
    (sampled_admissibility(space, xs, 0xad), false)
}

/// Sampled dual-sphere maximum, refined by the convex ascent
/// `g ← J(Σ_j conj(g(x_j)) x_j)`, where `J` is the normalizing functional.
fn sampled_admissibility(space: &SpaceSpec, xs: &[CVector], seed: u64) -> f64 {
    let weak = |g: &[C64]| -> f64 {
        xs.iter()
            .map(|x| g.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<C64>().norm_sqr())
            .sum()
    };
    let mut scored: Vec<(f64, CoordFunctional)> = space
        .sampled_dual_sphere(512, seed)
        .into_iter()
        .map(|g| (weak(&g.0), g))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = scored.first().map_or(0.0, |p| p.0);
    for (mut val, mut g) in scored.into_iter().take(8) {
        for _ in 0..100 {
            let z: Vec<C64> = (0..space.dim())
                .map(|k| {
                    xs.iter()
                        .map(|x| {
                            let gx: C64 = g.0.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
                            gx.conj() * x[k]
                        })
                        .sum()
                })
                .collect();
            let Ok(next) = space.normalizing_functional(&CoordVector::new(z)) else { break };
            let nv = weak(&next.0);
            if nv <= val * (1.0 + 1e-14) {
                break;
            }
            val = nv;
            g = next;
        }
        best = best.max(val);
    }
    best
}

/// An admissible sequence with the lower bound `value` it certifies.
#[derive(Debug, Clone)]
pub(crate) struct SequenceValue {
    pub value: f64,
    /// Scaled so that the weak-ℓ₂ constant is at most one.
    pub vectors: Vec<CVector>,
    pub exact: bool,
}

impl SequenceValue {
    pub fn empty() -> Self {
        Self {
            value: 0.0,
            vectors: Vec::new(),
            exact: true,
        }
    }
}

fn numerator(op: &CMatrix, range: &SpaceSpec, xs: &[CVector]) -> f64 {
    xs.iter()
        .map(|x| {
            let y = op * x;
            let nrm = range
                .norm(&CoordVector::new(y.iter().cloned().collect()))
                .unwrap_or(0.0);
            nrm * nrm
        })
        .sum()
}

/// `sqrt(Σ‖Tx_j‖²_Y / c)` with `c` the weak-ℓ₂ constant of the sequence.
pub(crate) fn evaluate_sequence(op: &CMatrix, domain: &SpaceSpec, range: &SpaceSpec, xs: &[CVector]) -> SequenceValue {
    let (c, exact) = admissibility(domain, xs);
    if !(c > 0.0) || !c.is_finite() {
        return SequenceValue {
            value: 0.0,
            vectors: Vec::new(),
            exact,
        };
    }
    let num = numerator(op, range, xs);
    let scale = 1.0 / c.sqrt();
    SequenceValue {
        value: (num / c).sqrt(),
        vectors: xs.iter().map(|x| x.scale(scale)).collect(),
        exact,
    }
}

/// Merges vectors that are parallel up to a unimodular factor; both the
/// numerator and every `Σ|g(x_j)|²` are unchanged.
pub(crate) fn merge_parallel(xs: &[CVector]) -> Vec<CVector> {
    let mut out: Vec<CVector> = Vec::new();
    for x in xs {
        let nx = x.norm();
        if nx == 0.0 {
            continue;
        }
        let hit = out.iter_mut().find(|y| {
            let ny = y.norm();
            (y.dotc(x).norm() - nx * ny).abs() <= 1e-10 * nx * ny
        });
        match hit {
            Some(y) => {
                let ny = y.norm();
                let total = (nx * nx + ny * ny).sqrt();
                *y = y.scale(total / ny);
            }
            None => out.push(x.clone()),
        }
    }
    out
}

/// Keeps the `len` vectors with the largest `‖Tx‖_Y`.
pub(crate) fn truncate(op: &CMatrix, range: &SpaceSpec, xs: &[CVector], len: usize) -> Vec<CVector> {
    let mut scored: Vec<(f64, &CVector)> = xs.iter().map(|x| (numerator(op, range, std::slice::from_ref(x)), x)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    scored.into_iter().take(len).map(|(_, x)| x.clone()).collect()
}

fn perturb(xs: &[CVector], sigma: f64, field: Field, rng: &mut ChaCha8Rng) -> Vec<CVector> {
    let scale = (xs.iter().map(|x| x.norm_squared()).sum::<f64>() / xs.len().max(1) as f64).sqrt();
    xs.iter()
        .map(|x| {
            CVector::from_fn(x.len(), |k, _| {
                let noise = match field {
                    Field::Real => C64::new(gaussian(rng), 0.0),
                    Field::Complex => C64::new(gaussian(rng), gaussian(rng)) / 2f64.sqrt(),
                };
                x[k] + noise * sigma * scale
            })
        })
        .collect()
}

/// (1+1) evolution strategy on the ratio, accepting only improvements.
fn local_search(
    op: &CMatrix,
    domain: &SpaceSpec,
    range: &SpaceSpec,
    start: Vec<CVector>,
    iterations: usize,
    rng: &mut ChaCha8Rng,
) -> SequenceValue {
    let mut best = evaluate_sequence(op, domain, range, &start);
    if best.vectors.is_empty() {
        return best;
    }
    let mut sigma = 0.1;
    for _ in 0..iterations {
        let trial = perturb(&best.vectors, sigma, domain.field(), rng);
        let cand = evaluate_sequence(op, domain, range, &trial);
        if cand.value > best.value {
            best = cand;
            sigma = (sigma * 1.5).min(0.5);
        } else {
            sigma *= 0.9;
        }
        if sigma < 1e-12 {
            break;
        }
    }
    best
}

/// Improves `starts` by independent seeded local searches and returns the
/// best, ties broken by start order.
pub(crate) fn polish(
    op: &CMatrix,
    domain: &SpaceSpec,
    range: &SpaceSpec,
    starts: Vec<Vec<CVector>>,
    restarts: usize,
    seed: u64,
) -> SequenceValue {
    let mut jobs: Vec<(usize, Vec<CVector>)> = Vec::new();
    let mut rng = seeded_rng(seed);
    for s in starts.iter() {
        jobs.push((jobs.len(), s.clone()));
    }
    if let Some(first) = starts.first() {
        for _ in 0..restarts {
            let sigma = rng.random_range(0.05..0.5);
            jobs.push((jobs.len(), perturb(first, sigma, domain.field(), &mut rng)));
        }
    }
    let results: Vec<(usize, SequenceValue)> = jobs
        .into_par_iter()
        .map(|(idx, start)| {
            let mut local = seeded_rng(seed ^ (0x51ed_270b_u64.wrapping_mul(idx as u64 + 1)));
            (idx, local_search(op, domain, range, start, 300, &mut local))
        })
        .collect();
    results
        .into_iter()
        .fold(None::<(usize, SequenceValue)>, |acc, cur| match acc {
            Some(a) if a.1.value > cur.1.value || (a.1.value == cur.1.value && a.0 < cur.0) => Some(a),
            _ => Some(cur),
        })
        .map(|p| p.1)
        .unwrap_or_else(SequenceValue::empty)
}
