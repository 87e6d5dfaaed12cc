//! Operator norms and worst-case erasure errors of frames.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{classify, frame_operator, FrameSystem, OperatorMatrix};
use crate::linalg::{seeded_rng, CMatrix};
use crate::scalar::{CoordFunctional, CoordVector, C64, ONE};
use crate::spaces::{binomial, combinations, SpaceSpec};

/// Largest number of subsets [`erasure_error`] will enumerate.
pub const SUBSET_CAP: u128 = 1_000_000;

const ASCENT_STARTS: usize = 64;
const ASCENT_STEPS: usize = 200;

/// `‖T : X → Y‖`. `heuristic` marks a best-found lower estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatorNorm {
    pub value: f64,
    pub heuristic: bool,
}

/// Exact when the sup over the unit ball of `X` reduces to finitely many
/// points or to a singular value: real polyhedral or `ℓ1`-type domains (ball
/// vertices), `ℓ∞`-type ranges (dual norms of rows), or Hilbert domain and
/// range (largest singular value). Otherwise the best of 64 nonlinear power
/// ascents `x ← norming vector of Tᵀ J_Y(Tx)`, each nondecreasing in `‖Tx‖`.
pub fn operator_norm(op: &OperatorMatrix, domain: &SpaceSpec, range: &SpaceSpec) -> Result<OperatorNorm> {
    let n = domain.dim();
    for d in [op.dim(), range.dim()] {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    let image_norm = |x: &CoordVector| range.norm(&op.apply(x)).unwrap_or(f64::NAN);
    if let Some(vertices) = domain.ball_vertices() {
        let value = vertices.iter().map(image_norm).fold(0.0, f64::max);
        return Ok(OperatorNorm { value, heuristic: false });
    }
    if domain.exponent() == Some(1.0) {
        // the unit ball is the absolutely convex hull of e_k/‖e_k‖
        let value = (0..n)
            .map(|k| {
                let e = CoordVector::unit(n, k);
                image_norm(&e) / domain.norm(&e).unwrap_or(f64::NAN)
            })
            .fold(0.0, f64::max);
        return Ok(OperatorNorm { value, heuristic: false });
    }
    if range.exponent() == Some(f64::INFINITY) {
        let value = (0..n)
            .map(|i| {
                let row = CoordFunctional::new(op.0.row(i).iter().cloned().collect());
                let e = CoordVector::unit(n, i);
                range.norm(&e).unwrap_or(f64::NAN) * domain.dual_norm(&row).unwrap_or(f64::NAN)
            })
            .fold(0.0, f64::max);
        return Ok(OperatorNorm { value, heuristic: false });
    }
    if domain.is_hilbert() && range.is_hilbert() {
        let sx = domain.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
        let sy = range.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
        let m = CMatrix::from_fn(n, n, |i, k| op.0[(i, k)] * sy[i] / sx[k]);
        let value = m.singular_values().iter().cloned().fold(0.0, f64::max);
        return Ok(OperatorNorm { value, heuristic: false });
    }
    Ok(OperatorNorm {
        value: power_ascent(op, domain, range),
        heuristic: true,
    })
}

fn power_ascent(op: &OperatorMatrix, domain: &SpaceSpec, range: &SpaceSpec) -> f64 {
    let image_norm = |x: &CoordVector| range.norm(&op.apply(x)).unwrap_or(0.0);
    let mut starts: Vec<CoordVector> = domain
        .dual_extreme_points(ASCENT_STARTS)
        .map(|d| d.points)
        .unwrap_or_default()
        .iter()
        .filter_map(|g| domain.norming_vector(g).ok())
        .collect();
    starts.truncate(ASCENT_STARTS);
    let mut rng = seeded_rng(0xe4a5);
    while starts.len() < ASCENT_STARTS {
        let v: Vec<C64> = (0..domain.dim())
            .map(|_| {
                let re = crate::linalg::gaussian(&mut rng);
                let im = if domain.is_complex() { crate::linalg::gaussian(&mut rng) } else { 0.0 };
                C64::new(re, im)
            })
            .collect();
        let x = CoordVector::new(v);
        if let Ok(nx) = domain.norm(&x) {
            if nx > 0.0 {
                starts.push(x.scaled_re(1.0 / nx));
            }
        }
    }
    starts
        .par_iter()
        .map(|x0| {
            let mut x = x0.clone();
            let mut val = image_norm(&x);
            for _ in 0..ASCENT_STEPS {
                let y = op.apply(&x);
                let Ok(g) = range.normalizing_functional(&y) else { break };
                let h = op.apply_adjoint(&g);
                let Ok(next) = domain.norming_vector(&h) else { break };
                let nv = image_norm(&next);
                if nv <= val * (1.0 + 1e-15) {
                    break;
                }
                x = next;
                val = nv;
            }
            val
        })
        .reduce(|| 0.0, f64::max)
}

/// One entry of the optional per-subset table; indices are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetValue {
    pub subset: Vec<usize>,
    pub value: f64,
}

/// `e_m = max ‖Σ_{j∈K} f_j⊗x_j‖` over `m`-subsets `K`, with the first subset
/// (in lexicographic order) attaining it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasureReport {
    pub m: usize,
    pub value: f64,
    /// 1-based indices.
    pub argmax_subset: Vec<usize>,
    pub heuristic: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_subset: Option<Vec<SubsetValue>>,
}

pub fn erasure_error(frame: &FrameSystem, m: usize) -> Result<ErasureReport> {
    erasure_error_with_table(frame, m, false)
}

/// [`erasure_error`], optionally keeping the value of every subset.
///
/// For `m = 1` each value is `‖f_j‖_*·‖x_j‖`, the exact norm of a rank-one
/// map, so the report is never heuristic.
pub fn erasure_error_with_table(frame: &FrameSystem, m: usize, table: bool) -> Result<ErasureReport> {
    let big_n = frame.len();
    if m == 0 || m >= big_n {
        return Err(Error::InvalidArgument(format!(
            "erasure count must satisfy 1 ≤ m < N = {big_n}, got {m}"
        )));
    }
    let count = binomial(big_n as u128, m as u128);
    if count > SUBSET_CAP {
        return Err(Error::SubsetCap { count, cap: SUBSET_CAP });
    }
    let space = frame.space();
    let subsets: Vec<Vec<usize>> = combinations(big_n, m).collect();
    let values: Vec<Result<OperatorNorm>> = subsets
        .par_iter()
        .map(|subset| {
            if m == 1 {
                let p = &frame.pairs()[subset[0]];
                return Ok(OperatorNorm {
                    value: space.norm(&p.x)? * space.dual_norm(&p.f)?,
                    heuristic: false,
                });
            }
            let mut s = OperatorMatrix(CMatrix::zeros(space.dim(), space.dim()));
            for &j in subset {
                let p = &frame.pairs()[j];
                s.0 += OperatorMatrix::rank_one(&p.f, &p.x).0;
            }
            operator_norm(&s, space, space)
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    let mut heuristic = false;
    let mut rows = Vec::new();
    for (i, v) in values.into_iter().enumerate() {
        let v = v?;
        heuristic |= v.heuristic;
        if v.value > best.0 {
            best = (v.value, i);
        }
        if table {
            rows.push(SubsetValue {
                subset: subsets[i].iter().map(|j| j + 1).collect(),
                value: v.value,
            });
        }
    }
    Ok(ErasureReport {
        m,
        value: best.0,
        argmax_subset: subsets[best.1].iter().map(|j| j + 1).collect(),
        heuristic,
        per_subset: table.then_some(rows),
    })
}

/// Outcome of [`is_erasure_optimal`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErasureOptimality {
    /// `‖x_j‖‖f_j‖ = f_j(x_j) = n/N` for every `j`, within the tolerance.
    pub optimal: bool,
    pub target: f64,
    pub products: Vec<f64>,
    pub pairings: Vec<C64>,
    /// 1-based indices of the pairs breaking the condition.
    pub violating: Vec<usize>,
    /// Whether `(x_j/‖x_j‖, f_j/‖f_j‖)` classifies as a FUNTF.
    pub rescaled_is_funtf: bool,
}

/// Tests whether a Schauder frame minimizes the maximal error due to one
/// erasure, that is whether `‖x_j‖‖f_j‖ = f_j(x_j) = n/N` for all `j`.
///
/// The condition implies that the rescaled pairs form a FUNTF. The converse
/// needs the products to be equal: two Auerbach bases weighted `a` and `1−a`
/// form a Schauder frame whose rescaled pairs are a FUNTF for every `a`.
pub fn is_erasure_optimal(frame: &FrameSystem, tol: f64) -> Result<ErasureOptimality> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let distance = frame_operator(frame).distance_to_scalar(ONE);
    if !(distance <= tol) {
        return Err(Error::NotSchauder { distance });
    }
    let target = frame.dim() as f64 / frame.len() as f64;
    let products = frame.pair_norm_products();
    let pairings: Vec<C64> = frame.pairs().iter().map(|p| p.f.apply(&p.x)).collect();
    let violating: Vec<usize> = (0..frame.len())
        .filter(|&j| !((products[j] - target).abs() <= tol && (pairings[j] - target).norm() <= tol))
        .map(|j| j + 1)
        .collect();
    let rescaled_is_funtf = match frame.normalized_pairs() {
        Ok(r) => classify(&r, tol)?.is_funtf(),
        Err(Error::ZeroVector) => false,
        Err(e) => return Err(e),
    };
    Ok(ErasureOptimality {
        optimal: violating.is_empty(),
        target,
        products,
        pairings,
        violating,
        rescaled_is_funtf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{auerbach_copies, ell1_special, funtf_of_length};
    use crate::frames::tests::x_frame;
    use crate::frames::FramePair;
    use crate::spaces::Field;

    fn l1(n: usize) -> SpaceSpec {
        SpaceSpec::real_lp(n, 1.0).unwrap()
    }

    #[test]
    fn rank_one_norm_is_product() {
        let s = l1(2);
        let f = CoordFunctional::from_real(&[0.5, -2.0]);
        let x = CoordVector::from_real(&[3.0, 1.0]);
        let v = operator_norm(&OperatorMatrix::rank_one(&f, &x), &s, &s).unwrap();
        assert!((v.value - 2.0 * 4.0).abs() < 1e-14);
        assert!(!v.heuristic);
        // smooth spaces go through the ascent, which finds the norming vector of f
        let s = SpaceSpec::real_lp(3, 3.0).unwrap();
        let f = CoordFunctional::from_real(&[0.5, -2.0, 1.0]);
        let x = CoordVector::from_real(&[3.0, 1.0, -1.0]);
        let v = operator_norm(&OperatorMatrix::rank_one(&f, &x), &s, &s).unwrap();
        let exact = s.norm(&x).unwrap() * s.dual_norm(&f).unwrap();
        assert!(v.heuristic);
        assert!(v.value <= exact * (1.0 + 1e-12) && v.value >= exact * (1.0 - 1e-9));
    }

    #[test]
    fn identity_has_norm_one() {
        for s in [
            l1(3),
            SpaceSpec::real_lp(3, f64::INFINITY).unwrap(),
            SpaceSpec::complex_lp(2, 2.0).unwrap(),
            SpaceSpec::complex_lp(2, 1.0).unwrap(),
            SpaceSpec::real_lp(3, 4.0).unwrap(),
        ] {
            let v = operator_norm(&OperatorMatrix::identity(s.dim()), &s, &s).unwrap();
            assert!((v.value - 1.0).abs() < 1e-12, "{s:?}: {}", v.value);
        }
    }

    #[test]
    fn diagonal_on_l1_by_vertices() {
        let s = l1(2);
        let d = OperatorMatrix::diagonal(&[2.0, 1.0]);
        // brute force over ±e1, ±e2
        let brute = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]]
            .iter()
            .map(|v| s.norm(&d.apply(&CoordVector::from_real(v))).unwrap())
            .fold(0.0, f64::max);
        assert_eq!(operator_norm(&d, &s, &s).unwrap().value, brute);
        assert_eq!(brute, 2.0);
    }

    #[test]
    fn sup_range_uses_row_norms() {
        let x = SpaceSpec::real_lp(2, 3.0).unwrap();
        let y = SpaceSpec::real_lp(2, f64::INFINITY).unwrap();
        let op = OperatorMatrix::from_real_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        let v = operator_norm(&op, &x, &y).unwrap();
        let q = 1.5f64;
        let expected = (1.0f64 + 2f64.powf(q)).powf(1.0 / q);
        assert!((v.value - expected).abs() < 1e-12);
        assert!(!v.heuristic);
    }

    #[test]
    fn basis_erasure_is_one() {
        let frame = auerbach_copies(&l1(3), 1).unwrap();
        let r = erasure_error(&frame, 1).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.argmax_subset, vec![1]);
    }

    #[test]
    fn scaled_x_frame_erasure() {
        let scaled = x_frame().rescaled(2.0 / 3.0, &[1.0; 3]).unwrap();
        let r = erasure_error_with_table(&scaled, 1, true).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.per_subset.as_ref().unwrap().len(), 3);
        let opt = is_erasure_optimal(&scaled, 1e-9).unwrap();
        assert!(opt.optimal && opt.rescaled_is_funtf);
        let back = scaled.normalized_pairs().unwrap();
        for (a, b) in back.pairs().iter().zip(x_frame().pairs()) {
            assert!((a.x.sub(&b.x)).entries().iter().all(|z| z.norm() < 1e-15));
            assert!((a.f.sub(&b.f)).entries().iter().all(|z| z.norm() < 1e-15));
        }
    }

    #[test]
    fn two_erasures_match_direct_maximum() {
        let frame = ell1_special(3, 5).unwrap().rescaled(3.0 / 5.0, &[1.0; 5]).unwrap();
        let r = erasure_error_with_table(&frame, 2, true).unwrap();
        assert_eq!(r.per_subset.as_ref().unwrap().len(), 10);
        let max = r.per_subset.unwrap().iter().map(|s| s.value).fold(0.0, f64::max);
        assert_eq!(r.value, max);
        assert!(r.value <= 2.0 * 3.0 / 5.0 + 1e-12);
        assert_eq!(r.argmax_subset.len(), 2);
    }

    #[test]
    fn enumeration_matches_formula_for_one_erasure() {
        let frame = funtf_of_length(&SpaceSpec::complex_lp(2, 3.0).unwrap(), 5).unwrap();
        let r = erasure_error(&frame, 1).unwrap();
        let direct = frame
            .pairs()
            .iter()
            .map(|p| {
                let s = OperatorMatrix::rank_one(&p.f, &p.x);
                operator_norm(&s, frame.space(), frame.space()).unwrap().value
            })
            .fold(0.0, f64::max);
        assert!((r.value - direct).abs() < 1e-9);
    }

    #[test]
    fn erasure_errors() {
        let frame = x_frame();
        assert!(matches!(erasure_error(&frame, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(erasure_error(&frame, 3), Err(Error::InvalidArgument(_))));
        let big = auerbach_copies(&SpaceSpec::real_lp(2, 2.0).unwrap(), 30).unwrap();
        assert!(matches!(erasure_error(&big, 8), Err(Error::SubsetCap { .. })));
        assert!(matches!(is_erasure_optimal(&frame, 1e-9), Err(Error::NotSchauder { .. })));
    }

    #[test]
    fn unequal_products_are_not_optimal() {
        // x_j = S^{-1} u_j for a perturbed Parseval frame u_j with f_j = u_j
        let s = SpaceSpec::real_lp(2, 2.0).unwrap();
        let us = [[1.0, 0.1], [-0.4, 0.9], [-0.5, -0.8]];
        let mut m = nalgebra::Matrix2::<f64>::zeros();
        for u in &us {
            let v = nalgebra::Vector2::new(u[0], u[1]);
            m += v * v.transpose();
        }
        let inv = m.try_inverse().unwrap();
        let pairs: Vec<FramePair> = us
            .iter()
            .map(|u| {
                let x = inv * nalgebra::Vector2::new(u[0], u[1]);
                FramePair::from_real(&[x[0], x[1]], u)
            })
            .collect();
        let frame = FrameSystem::new(s, pairs).unwrap();
        let opt = is_erasure_optimal(&frame, 1e-9).unwrap();
        assert!(!opt.optimal);
        assert!(!opt.rescaled_is_funtf);
        assert!(!opt.violating.is_empty());
        let total: f64 = opt.products.iter().sum();
        assert!(total >= 2.0 - 1e-12);
    }

    #[test]
    fn weighted_bases_break_the_converse() {
        let s = SpaceSpec::lp(2, Field::Real, 1.0).unwrap();
        let basis = auerbach_copies(&s, 2).unwrap();
        let pairs = basis
            .pairs()
            .iter()
            .zip([0.3, 0.3, 0.7, 0.7])
            .map(|(p, a)| FramePair::new(p.x.scaled_re(a), p.f.clone()))
            .collect();
        let frame = FrameSystem::new(s, pairs).unwrap();
        let opt = is_erasure_optimal(&frame, 1e-9).unwrap();
        assert!(opt.rescaled_is_funtf);
        assert!(!opt.optimal);
        assert_eq!(opt.violating, vec![1, 2, 3, 4]);
    }
}
