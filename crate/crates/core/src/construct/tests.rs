use super::search::residual;
use super::*;
use crate::frames::{classify, frame_operator, Classification, CLASSIFY_TOL};
use crate::scalar::C64;

fn loz_invariants(space: &SpaceSpec, t: &[f64], loz: &LozFactorization, tol: f64) {
    let na = space.norm(&CoordVector::from_real(&loz.alphas)).unwrap();
    let nb = space.dual_norm(&CoordFunctional::from_real(&loz.betas)).unwrap();
    assert!((na - 1.0).abs() <= tol, "‖α‖ = {na}");
    assert!((nb - 1.0).abs() <= tol, "‖β‖ = {nb}");
    for j in 0..t.len() {
        assert!((loz.alphas[j] * loz.betas[j] - t[j]).abs() <= tol, "α_jβ_j at {j}");
    }
}

#[test]
fn lozanovskii_l1_is_t_and_ones() {
    let s = SpaceSpec::real_lp(3, 1.0).unwrap();
    let t = [0.5, 0.3, 0.2];
    let loz = lozanovskii(&s, &t).unwrap();
    assert_eq!(loz.alphas, t.to_vec());
    assert_eq!(loz.betas, vec![1.0; 3]);
}

#[test]
fn lozanovskii_hilbert_symmetric() {
    let s = SpaceSpec::real_lp(2, 2.0).unwrap();
    let loz = lozanovskii(&s, &[0.5, 0.5]).unwrap();
    let r = 0.5f64.sqrt();
    for v in loz.alphas.iter().chain(&loz.betas) {
        assert!((v - r).abs() < 1e-15);
    }
}

#[test]
fn lozanovskii_l3_powers() {
    let s = SpaceSpec::real_lp(3, 3.0).unwrap();
    let t = [0.5, 0.25, 0.25];
    let loz = lozanovskii(&s, &t).unwrap();
    for j in 0..3 {
        assert!((loz.alphas[j] - t[j].powf(1.0 / 3.0)).abs() < 1e-15);
        assert!((loz.betas[j] - t[j].powf(2.0 / 3.0)).abs() < 1e-15);
    }
    loz_invariants(&s, &t, &loz, 1e-12);
}

#[test]
fn lozanovskii_weighted_and_sup() {
    let s = SpaceSpec::weighted_lp(3, Field::Real, 1.5, vec![2.0, 0.5, 1.0]).unwrap();
    let t = [0.2, 0.7, 0.1];
    loz_invariants(&s, &t, &lozanovskii(&s, &t).unwrap(), 1e-12);
    let s = SpaceSpec::weighted_lp(3, Field::Real, f64::INFINITY, vec![2.0, 0.5, 1.0]).unwrap();
    loz_invariants(&s, &t, &lozanovskii(&s, &t).unwrap(), 1e-12);
}

#[test]
fn lozanovskii_unconditional_polytope() {
    // unit ball of max(|x1| + |x2|, 2|x3|, |x1| + |x3|)
    let mut dual = Vec::new();
    for s1 in [1.0, -1.0] {
        for s2 in [1.0, -1.0] {
            dual.push(vec![s1, s2, 0.0]);
            dual.push(vec![s1, 0.0, s2]);
        }
        dual.push(vec![0.0, 0.0, 2.0 * s1]);
    }
    let s = SpaceSpec::polytope(3, dual).unwrap();
    assert!(s.is_one_unconditional());
    for t in [[0.2, 0.5, 0.3], [1.0 / 3.0; 3], [0.6, 0.0, 0.4]] {
        loz_invariants(&s, &t, &lozanovskii(&s, &t).unwrap(), 1e-10);
    }
}

#[test]
fn lozanovskii_rejects_bad_input() {
    let s = SpaceSpec::real_lp(2, 2.0).unwrap();
    assert!(matches!(lozanovskii(&s, &[-0.1, 1.1]), Err(Error::InvalidArgument(_))));
    assert!(matches!(lozanovskii(&s, &[0.3, 0.3]), Err(Error::InvalidArgument(_))));
    let rotated = SpaceSpec::polytope(2, vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 1.0], vec![0.0, -1.0], vec![1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
    assert!(!rotated.is_one_unconditional());
    assert!(matches!(lozanovskii(&rotated, &[0.5, 0.5]), Err(Error::Unsupported(_))));
}

#[test]
fn dft_complex_l2_matches_hand_computation() {
    let s = SpaceSpec::complex_lp(2, 2.0).unwrap();
    let frame = dft_funtf(&DiagonalTarget::uniform(s, 2.0).unwrap()).unwrap();
    let r = 0.5f64.sqrt();
    let x0 = frame.pairs()[0].x.entries();
    let x1 = frame.pairs()[1].x.entries();
    assert!((x0[0] - C64::new(r, 0.0)).norm() < 1e-15 && (x0[1] - C64::new(r, 0.0)).norm() < 1e-15);
    assert!((x1[0] - C64::new(-r, 0.0)).norm() < 1e-15 && (x1[1] - C64::new(r, 0.0)).norm() < 1e-15);
    assert!(frame_operator(&frame).distance_to_scalar(C64::new(1.0, 0.0)) < 1e-12);
}

#[test]
fn dft_complex_l1_three() {
    let s = SpaceSpec::complex_lp(3, 1.0).unwrap();
    let frame = dft_funtf(&DiagonalTarget::uniform(s.clone(), 3.0).unwrap()).unwrap();
    assert_eq!(frame.len(), 3);
    assert!(frame.is_normalized());
    assert!(frame_operator(&frame).distance_to_scalar(C64::new(1.0, 0.0)) < 1e-12);
    for p in frame.pairs() {
        assert!((s.norm(&p.x).unwrap() - 1.0).abs() < 1e-14);
        assert!((s.dual_norm(&p.f).unwrap() - 1.0).abs() < 1e-14);
    }
}

#[test]
fn dft_real_two_dim_sign_construction() {
    let s = SpaceSpec::real_lp(2, 1.0).unwrap();
    let frame = dft_funtf(&DiagonalTarget::uniform(s, 2.0).unwrap()).unwrap();
    assert_eq!(frame.pairs()[0], FramePair::from_real(&[0.5, 0.5], &[1.0, 1.0]));
    assert_eq!(frame.pairs()[1], FramePair::from_real(&[0.5, -0.5], &[1.0, -1.0]));
    assert!(frame_operator(&frame).distance_to_scalar(C64::new(1.0, 0.0)) < 1e-15);
}

#[test]
fn dft_nonuniform_diagonal() {
    let s = SpaceSpec::complex_lp(3, 3.0).unwrap();
    let lambdas = [0.5, 1.75, 0.75];
    let frame = dft_funtf(&DiagonalTarget::new(s, lambdas.to_vec()).unwrap()).unwrap();
    let m = frame_operator(&frame);
    assert!((m.0 - OperatorMatrixLike::diag(&lambdas)).norm() < 1e-12);
    assert!(frame.is_normalized());
}

struct OperatorMatrixLike;
impl OperatorMatrixLike {
    fn diag(d: &[f64]) -> crate::linalg::CMatrix {
        crate::frames::OperatorMatrix::diagonal(d).0
    }
}

#[test]
fn dft_rejects_real_three_and_bad_trace() {
    let s = SpaceSpec::real_lp(3, 2.0).unwrap();
    assert!(matches!(dft_funtf(&DiagonalTarget::uniform(s, 3.0).unwrap()), Err(Error::Unsupported(_))));
    let s = SpaceSpec::complex_lp(2, 2.0).unwrap();
    assert!(matches!(dft_funtf(&DiagonalTarget::uniform(s, 3.0).unwrap()), Err(Error::InvalidArgument(_))));
}

#[test]
fn dft_off_diagonal_geometric_sums_vanish() {
    for n in 2..=8usize {
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let s: C64 = (0..n).map(|k| root_of_unity(k * (i + n - j), n)).sum();
                    assert!(s.norm() <= 1e-12 * n as f64);
                }
            }
        }
    }
}

#[test]
fn length_three_on_complex_l1_two() {
    let s = SpaceSpec::complex_lp(2, 1.0).unwrap();
    let frame = funtf_of_length(&s, 3).unwrap();
    assert_eq!(frame.len(), 3);
    match classify(&frame, CLASSIFY_TOL).unwrap() {
        Classification::Funtf { lambda } => assert!((lambda - 1.5).abs() < 1e-12),
        c => panic!("{c:?}"),
    }
}

#[test]
fn length_equal_dimension_is_dft() {
    let s = SpaceSpec::complex_lp(3, 2.0).unwrap();
    let a = funtf_of_length(&s, 3).unwrap();
    let b = dft_funtf(&DiagonalTarget::uniform(s, 3.0).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn double_length_matches_two_auerbach_copies() {
    for s in [SpaceSpec::complex_lp(3, 1.0).unwrap(), SpaceSpec::real_lp(2, f64::INFINITY).unwrap()] {
        let n = s.dim();
        let a = frame_operator(&funtf_of_length(&s, 2 * n).unwrap());
        let b = frame_operator(&auerbach_copies(&s, 2).unwrap());
        assert!((&a.0 - &b.0).norm() < 1e-12);
        assert!(a.distance_to_scalar(C64::new(2.0, 0.0)) < 1e-12);
    }
}

#[test]
fn induction_appends_basis_pairs_after_dft() {
    let s = SpaceSpec::weighted_lp(2, Field::Complex, 1.0, vec![2.0, 3.0]).unwrap();
    let frame = funtf_of_length(&s, 5).unwrap();
    // λ = (2.5, 2.5) → decrements at 0, 1, 0 leave (0.5, 1.5) for the DFT part
    let tail: Vec<usize> = frame.pairs()[2..]
        .iter()
        .map(|p| p.x.entries().iter().position(|z| z.norm() > 0.0).unwrap())
        .collect();
    assert_eq!(tail, vec![0, 1, 0]);
    assert!(classify(&frame, CLASSIFY_TOL).unwrap().is_funtf());
    assert!(matches!(funtf_of_length(&s, 1), Err(Error::InvalidArgument(_))));
}

fn bisect_parameter(n: usize) -> f64 {
    let n = n as f64;
    let g = |a: f64| -a + (n - 3.0) * (1.0 - a) / (n - 1.0) + 1.0 / n;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn n_plus_1_parameter_matches_bisection() {
    assert!((ell1_n_plus_1_parameter(3) - 1.0 / 3.0).abs() < 1e-15);
    assert!((ell1_n_plus_1_parameter(4) - 7.0 / 16.0).abs() < 1e-15);
    for n in 3..=12 {
        assert!((ell1_n_plus_1_parameter(n) - bisect_parameter(n)).abs() < 1e-14);
    }
}

#[test]
fn n_plus_1_family() {
    for n in 3..=8 {
        let frame = ell1_funtf_n_plus_1(n).unwrap();
        assert_eq!(frame.len(), n + 1);
        assert!(frame.is_normalized());
        let lambda = 1.0 + 1.0 / n as f64;
        let m = frame_operator(&frame);
        assert!(m.distance_to_scalar(C64::new(lambda, 0.0)) < 1e-10);
        for i in 0..n {
            for k in 0..n {
                if i != k {
                    assert!(m.0[(i, k)].norm() < 1e-12);
                }
            }
        }
        for p in frame.pairs() {
            let l1: f64 = p.x.entries().iter().map(|z| z.norm()).sum();
            assert!((l1 - 1.0).abs() < 1e-12);
        }
    }
    assert!(matches!(ell1_funtf_n_plus_1(2), Err(Error::InvalidArgument(_))));
}

#[test]
fn special_families() {
    for (dim, len) in [(3, 5), (4, 6), (4, 7)] {
        let frame = ell1_special(dim, len).unwrap();
        assert_eq!(frame.len(), len);
        assert!(frame.is_normalized());
        let m = frame_operator(&frame);
        assert!(m.distance_to_scalar(C64::new(len as f64 / dim as f64, 0.0)) < 1e-12);
    }
    // (3,5) operator is diag(1+4a, 4b, 4b)
    let m = frame_operator(&ell1_special(3, 5).unwrap());
    assert!((m.0[(0, 0)].re - (1.0 + 4.0 / 6.0)).abs() < 1e-15);
    assert!((m.0[(1, 1)].re - 4.0 * 5.0 / 12.0).abs() < 1e-15);
    assert!(matches!(ell1_special(3, 4), Err(Error::Unsupported(_))));
}

#[test]
fn search_hilbert_three_vectors() {
    let s = SpaceSpec::real_lp(2, 2.0).unwrap();
    let out = search_funtf(&s, 3, &SearchOptions::default()).unwrap();
    assert!(out.success, "residual {}", out.residual);
    assert!(classify(&out.frame, CLASSIFY_TOL).unwrap().is_funtf());
}

#[test]
fn search_smooth_l3() {
    let s = SpaceSpec::real_lp(2, 3.0).unwrap();
    let out = search_funtf(&s, 3, &SearchOptions::default()).unwrap();
    assert!(out.success, "residual {}", out.residual);
    assert!(classify(&out.frame, CLASSIFY_TOL).unwrap().is_funtf());
}

#[test]
fn search_l1_three_length_four() {
    let s = SpaceSpec::real_lp(3, 1.0).unwrap();
    let out = search_funtf(&s, 4, &SearchOptions::default()).unwrap();
    assert!(out.success, "residual {}", out.residual);
    assert!(classify(&out.frame, CLASSIFY_TOL).unwrap().is_funtf());
    // same contract as the closed form
    let closed = ell1_funtf_n_plus_1(3).unwrap();
    assert!(residual(&closed, 4.0 / 3.0) <= super::search::SUCCESS_RESIDUAL);
}

#[test]
fn search_l1_two_unrestricted_and_restricted() {
    let s = SpaceSpec::real_lp(2, 1.0).unwrap();
    let out = search_funtf(&s, 3, &SearchOptions::default()).unwrap();
    assert!(out.success, "residual {}", out.residual);
    let restricted = SearchOptions {
        min_coordinate: Some(0.05),
        ..SearchOptions::default()
    };
    let out = search_funtf(&s, 3, &restricted).unwrap();
    assert!(!out.success);
    assert!(out.residual >= 1e-3);
    for p in out.frame.pairs() {
        assert!(p.x.entries().iter().all(|z| z.re.abs() >= 0.05 - 1e-12));
    }
}

#[test]
fn search_is_deterministic_and_validates() {
    let s = SpaceSpec::real_lp(2, f64::INFINITY).unwrap();
    let opts = SearchOptions {
        seed: 7,
        ..SearchOptions::default()
    };
    let a = search_funtf(&s, 3, &opts).unwrap();
    let b = search_funtf(&s, 3, &opts).unwrap();
    assert_eq!(a.frame, b.frame);
    assert!(matches!(search_funtf(&s, 1, &opts), Err(Error::InvalidArgument(_))));
    let c = SpaceSpec::complex_lp(2, 2.0).unwrap();
    assert!(matches!(search_funtf(&c, 3, &opts), Err(Error::Unsupported(_))));
    let restricted = SearchOptions {
        min_coordinate: Some(0.05),
        ..opts
    };
    assert!(matches!(search_funtf(&s, 3, &restricted), Err(Error::Unsupported(_))));
}

#[test]
fn ell1_unions_cover_long_lengths() {
    for n in 1..=7usize {
        let start = if n <= 4 { n } else { n * (n - 1) };
        for len in start..=start + 2 * n + 1 {
            let frame = ell1_funtf_of_length(n, len).unwrap();
            assert_eq!(frame.len(), len);
            assert!(frame.is_normalized());
            let d = frame_operator(&frame).distance_to_scalar(C64::new(len as f64 / n as f64, 0.0));
            assert!(d < 1e-12, "n={n} len={len}: {d}");
        }
    }
    // n + 2 on ℓ1⁵ is not a union of lengths 5 and 6
    assert!(matches!(ell1_funtf_of_length(5, 7), Err(Error::Unsupported(_))));
    assert!(matches!(ell1_funtf_of_length(3, 2), Err(Error::InvalidArgument(_))));
}
