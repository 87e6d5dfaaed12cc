use funtf_core::*;
use proptest::prelude::*;

const EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, f64::INFINITY];

fn any_space() -> impl Strategy<Value = SpaceSpec> {
    (2usize..=4, 0usize..5, any::<bool>(), prop::option::of(prop::collection::vec(0.3f64..3.0, 4))).prop_map(
        |(n, pi, complex, weights)| {
            let field = if complex { Field::Complex } else { Field::Real };
            let p = EXPONENTS[pi];
            match weights {
                Some(w) => SpaceSpec::weighted_lp(n, field, p, w[..n].to_vec()).unwrap(),
                None => SpaceSpec::lp(n, field, p).unwrap(),
            }
        },
    )
}

fn real_polyhedral_2d() -> impl Strategy<Value = SpaceSpec> {
    prop_oneof![Just(SpaceSpec::real_lp(2, 1.0).unwrap()), Just(SpaceSpec::real_lp(2, f64::INFINITY).unwrap())]
}

fn entries(space: &SpaceSpec, raw: &[(f64, f64)]) -> Vec<C64> {
    raw.iter()
        .take(space.dim())
        .map(|&(a, b)| C64::new(a, if space.is_complex() { b } else { 0.0 }))
        .collect()
}

fn raw_vec() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 4)
}

fn raw_frame(max_len: usize) -> impl Strategy<Value = Vec<Vec<(f64, f64)>>> {
    prop::collection::vec(raw_vec(), 2..=max_len)
}

/// Pairs `(x_j/‖x_j‖, J(x_j))`.
fn normalized_frame(space: &SpaceSpec, raw: &[Vec<(f64, f64)>]) -> Option<FrameSystem> {
    let mut pairs = Vec::new();
    for r in raw {
        let x = CoordVector::new(entries(space, r));
        let nx = space.norm(&x).ok()?;
        if nx < 1e-3 {
            return None;
        }
        let x = x.scaled_re(1.0 / nx);
        let f = space.normalizing_functional(&x).ok()?;
        pairs.push(FramePair::new(x, f));
    }
    FrameSystem::new(space.clone(), pairs).ok()
}

/// Random pairs `(S⁻¹x_j, f_j)`, whose frame operator is the identity.
fn schauder_frame(space: &SpaceSpec, xs: &[Vec<(f64, f64)>], fs: &[Vec<(f64, f64)>]) -> Option<FrameSystem> {
    let raw: Vec<FramePair> = xs
        .iter()
        .zip(fs)
        .map(|(x, f)| FramePair::new(CoordVector::new(entries(space, x)), CoordFunctional::new(entries(space, f))))
        .collect();
    let frame = FrameSystem::new(space.clone(), raw).ok()?;
    let s = frame_operator(&frame);
    let sv = s.0.clone().svd(false, false).singular_values;
    if sv.iter().cloned().fold(f64::INFINITY, f64::min) < 0.05 {
        return None;
    }
    let inv = OperatorMatrix(s.0.try_inverse()?);
    let pairs = frame.pairs().iter().map(|p| FramePair::new(inv.apply(&p.x), p.f.clone())).collect();
    FrameSystem::new(space.clone(), pairs).ok()
}

fn random_operator(n: usize, raw: &[f64]) -> OperatorMatrix {
    let rows: Vec<Vec<f64>> = (0..n).map(|i| raw[i * n..(i + 1) * n].to_vec()).collect();
    OperatorMatrix::from_real_rows(&rows).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn duality_inequality(space in any_space(), xr in raw_vec(), fr in raw_vec()) {
        let x = CoordVector::new(entries(&space, &xr));
        let f = CoordFunctional::new(entries(&space, &fr));
        let lhs = f.apply(&x).norm();
        let rhs = space.dual_norm(&f).unwrap() * space.norm(&x).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn dual_of_dual_returns_the_space(space in any_space()) {
        let back = space.dual_space().dual_space();
        prop_assert_eq!(back.exponent(), space.exponent());
        prop_assert_eq!(back.field(), space.field());
        let p = space.exponent().unwrap();
        let q = space.dual_space().exponent().unwrap();
        prop_assert!((q - conjugate_exponent(p)).abs() < 1e-12 || (q.is_infinite() && p == 1.0));
        if let NormSpec::WeightedLp { weights, .. } = space.norm_spec() {
            if let NormSpec::WeightedLp { weights: w2, .. } = back.norm_spec() {
                for (a, b) in weights.iter().zip(w2) {
                    prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
                }
            }
        }
    }

    #[test]
    fn dual_extreme_points_have_unit_norm(space in any_space()) {
        prop_assume!(!(space.is_complex() && space.exponent() == Some(1.0) && space.dim() > 4));
        let pts = space.dual_extreme_points(64).unwrap();
        for g in &pts.points {
            prop_assert!((space.dual_norm(g).unwrap() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn normalizing_functional_is_norming(space in any_space(), xr in raw_vec()) {
        let x = CoordVector::new(entries(&space, &xr));
        prop_assume!(space.norm(&x).unwrap() > 1e-6);
        let f = space.normalizing_functional(&x).unwrap();
        let nx = space.norm(&x).unwrap();
        prop_assert!((space.dual_norm(&f).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert!((f.apply(&x) - C64::new(nx, 0.0)).norm() <= 1e-12 * nx.max(1.0));
    }

    #[test]
    fn trace_is_sum_of_pairings(space in any_space(), raw in raw_frame(6)) {
        let Some(frame) = normalized_frame(&space, &raw) else { return Ok(()) };
        let tr = frame_operator(&frame).trace();
        let s: C64 = frame.pairs().iter().map(|p| p.f.apply(&p.x)).sum();
        prop_assert!((tr - s).norm() <= 1e-10);
    }

    #[test]
    fn rescaling_scales_the_operator(space in any_space(), raw in raw_frame(5), d in 0.2f64..3.0, c in prop::collection::vec(0.2f64..3.0, 5)) {
        let Some(frame) = normalized_frame(&space, &raw) else { return Ok(()) };
        let c = &c[..frame.len()];
        let scaled = frame.rescaled(d, c).unwrap();
        let a = frame_operator(&frame).scaled(C64::new(d, 0.0));
        let b = frame_operator(&scaled);
        prop_assert!((&a.0 - &b.0).norm() <= 1e-12 * a.frobenius().max(1.0));
    }

    #[test]
    fn classify_is_scale_consistent(n in 2usize..=3, extra in 0usize..=3, pi in 0usize..5, d in 0.2f64..3.0) {
        let space = SpaceSpec::complex_lp(n, EXPONENTS[pi]).unwrap();
        let frame = funtf_of_length(&space, n + extra).unwrap();
        let lambda = (n + extra) as f64 / n as f64;
        let scaled = frame.rescaled(d, &vec![1.0; frame.len()]).unwrap();
        prop_assert!(frame_operator(&scaled).distance_to_scalar(C64::new(d * lambda, 0.0)) <= 1e-8 * d.max(1.0));
        match classify(&scaled.normalized_pairs().unwrap(), 1e-8).unwrap() {
            Classification::Funtf { lambda: l } => prop_assert!((l - lambda).abs() < 1e-10),
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn unions_of_funtfs_are_funtfs(n in 1usize..=3, a in 0usize..=3, b in 0usize..=3, pi in 0usize..5) {
        let space = SpaceSpec::complex_lp(n, EXPONENTS[pi]).unwrap();
        let u = funtf_of_length(&space, n + a).unwrap().union(&funtf_of_length(&space, n + b).unwrap()).unwrap();
        match classify(&u, 1e-8).unwrap() {
            Classification::Funtf { lambda } => prop_assert!((lambda - (2 * n + a + b) as f64 / n as f64).abs() < 1e-10),
            other => prop_assert!(false, "{:?}", other),
        }
    }

    #[test]
    fn constructors_produce_funtfs(n in 1usize..=4, extra in 0usize..=4, pi in 0usize..5, w in prop::collection::vec(0.3f64..3.0, 4)) {
        let space = SpaceSpec::weighted_lp(n, Field::Complex, EXPONENTS[pi], w[..n].to_vec()).unwrap();
        let frame = funtf_of_length(&space, n + extra).unwrap();
        prop_assert!(classify(&frame, 1e-8).unwrap().is_funtf());
    }

    #[test]
    fn lozanovskii_invariants(pi in 0usize..5, n in 1usize..=4, raw in prop::collection::vec(0.0f64..1.0, 4), complex in any::<bool>()) {
        let field = if complex { Field::Complex } else { Field::Real };
        let space = SpaceSpec::lp(n, field, EXPONENTS[pi]).unwrap();
        let total: f64 = raw[..n].iter().sum();
        prop_assume!(total > 1e-6);
        let t: Vec<f64> = raw[..n].iter().map(|v| v / total).collect();
        let loz = lozanovskii(&space, &t).unwrap();
        let na = space.norm(&CoordVector::from_real(&loz.alphas)).unwrap();
        let nb = space.dual_norm(&CoordFunctional::from_real(&loz.betas)).unwrap();
        prop_assert!((na - 1.0).abs() <= 1e-10);
        prop_assert!((nb - 1.0).abs() <= 1e-10);
        for j in 0..n {
            prop_assert!((loz.alphas[j] * loz.betas[j] - t[j]).abs() <= 1e-10);
        }
    }

    #[test]
    fn erasure_bounded_by_largest_products(space in any_space(), raw in raw_frame(6), m in 1usize..=3) {
        prop_assume!(!(space.is_smooth() && !space.is_hilbert() && m > 1));
        let Some(frame) = normalized_frame(&space, &raw) else { return Ok(()) };
        prop_assume!(m < frame.len());
        let r = erasure_error(&frame, m).unwrap();
        let mut products = frame.pair_norm_products();
        products.sort_by(|a, b| b.total_cmp(a));
        let bound: f64 = products[..m].iter().sum();
        prop_assert!(r.value <= bound * (1.0 + 1e-12));
        prop_assert_eq!(r.argmax_subset.len(), m);
    }

    #[test]
    fn one_erasure_is_largest_rank_one_norm(space in any_space(), raw in raw_frame(6)) {
        let Some(frame) = normalized_frame(&space, &raw) else { return Ok(()) };
        let r = erasure_error(&frame, 1).unwrap();
        let max = frame.pair_norm_products().into_iter().fold(0.0, f64::max);
        prop_assert!((r.value - max).abs() <= 1e-12);
        // the general operator-norm path agrees on rank-one maps
        for p in frame.pairs() {
            let direct = operator_norm(&OperatorMatrix::rank_one(&p.f, &p.x), &space, &space).unwrap().value;
            let product = space.norm(&p.x).unwrap() * space.dual_norm(&p.f).unwrap();
            prop_assert!((direct - product).abs() <= 1e-9 * product.max(1.0), "{} vs {}", direct, product);
        }
    }

    #[test]
    fn schauder_products_sum_to_at_least_n(space in any_space(), xs in raw_frame(6), fs in raw_frame(6)) {
        let len = xs.len().min(fs.len());
        prop_assume!(len >= space.dim());
        let Some(frame) = schauder_frame(&space, &xs[..len], &fs[..len]) else { return Ok(()) };
        let total: f64 = frame.pair_norm_products().iter().sum();
        prop_assert!(total >= space.dim() as f64 * (1.0 - 1e-10));
        let opt = is_erasure_optimal(&frame, 1e-8).unwrap();
        if opt.optimal {
            prop_assert!((erasure_error(&frame, 1).unwrap().value - opt.target).abs() <= 1e-9);
        }
    }

    #[test]
    fn scaled_funtfs_are_erasure_optimal(n in 1usize..=3, extra in 0usize..=3, pi in 0usize..5) {
        let space = SpaceSpec::complex_lp(n, EXPONENTS[pi]).unwrap();
        let len = n + extra;
        prop_assume!(len >= 2);
        let frame = funtf_of_length(&space, len).unwrap().rescaled(n as f64 / len as f64, &vec![1.0; len]).unwrap();
        let opt = is_erasure_optimal(&frame, 1e-8).unwrap();
        prop_assert!(opt.optimal && opt.rescaled_is_funtf);
        prop_assert!((erasure_error(&frame, 1).unwrap().value - n as f64 / len as f64).abs() <= 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pi2_lower_below_upper(space in real_polyhedral_2d(), raw in prop::collection::vec(-1.0f64..1.0, 4)) {
        let op = random_operator(2, &raw);
        prop_assume!(op.frobenius() > 1e-3);
        let (lo, seq) = pi2_lower(&op, &space, &space, &LowerOptions::default()).unwrap();
        let (hi, _) = pi2_upper(&op, &space, &space, 60, 1e-8).unwrap();
        prop_assert!(lo <= hi, "{} > {}", lo, hi);
        prop_assert!(seq.verified);
    }

    #[test]
    fn pi2_is_homogeneous(space in real_polyhedral_2d(), raw in prop::collection::vec(-1.0f64..1.0, 4), c in prop_oneof![-3.0f64..-0.2, 0.2f64..3.0]) {
        let op = random_operator(2, &raw);
        prop_assume!(op.frobenius() > 1e-3);
        let opts = Pi2Options::default();
        let a = pi2(&op, &space, &space, &opts).unwrap();
        let b = pi2(&op.scaled(C64::new(c, 0.0)), &space, &space, &opts).unwrap();
        prop_assert!((b.lower - c.abs() * a.lower).abs() <= 1e-9 * a.upper.max(1.0) * c.abs());
        prop_assert!((b.upper - c.abs() * a.upper).abs() <= 1e-9 * a.upper.max(1.0) * c.abs());
    }

    #[test]
    fn pi2_dominates_operator_norm(space in real_polyhedral_2d(), raw in prop::collection::vec(-1.0f64..1.0, 4), angles in prop::collection::vec(0.0f64..std::f64::consts::TAU, 16)) {
        let op = random_operator(2, &raw);
        let r = pi2(&op, &space, &space, &Pi2Options::default()).unwrap();
        let sampled = angles
            .iter()
            .map(|t| {
                let x = CoordVector::from_real(&[t.cos(), t.sin()]);
                let x = x.scaled_re(1.0 / space.norm(&x).unwrap());
                space.norm(&op.apply(&x)).unwrap()
            })
            .fold(0.0, f64::max);
        prop_assert!(r.lower >= sampled - 1e-6);
    }

    #[test]
    fn pi2_ideal_property(space in real_polyhedral_2d(), t in prop::collection::vec(-1.0f64..1.0, 4), a in prop::collection::vec(-1.0f64..1.0, 4), b in prop::collection::vec(-1.0f64..1.0, 4)) {
        let (t, a, b) = (random_operator(2, &t), random_operator(2, &a), random_operator(2, &b));
        prop_assume!(t.frobenius() > 1e-3);
        let atb = OperatorMatrix(&a.0 * &t.0 * &b.0);
        let opts = Pi2Options::default();
        let lhs = pi2(&atb, &space, &space, &opts).unwrap();
        let rhs = pi2(&t, &space, &space, &opts).unwrap();
        let na = operator_norm(&a, &space, &space).unwrap().value;
        let nb = operator_norm(&b, &space, &space).unwrap().value;
        prop_assert!(lhs.lower <= na * rhs.upper * nb * (1.0 + 1e-9) + 1e-12);
    }

    #[test]
    fn hilbert_interval_contains_frobenius(n in 1usize..=3, raw in prop::collection::vec(-1.0f64..1.0, 9)) {
        let space = SpaceSpec::real_lp(n, 2.0).unwrap();
        let op = random_operator(n, &raw);
        let r = pi2(&op, &space, &space, &Pi2Options::default()).unwrap();
        prop_assert!(r.contains(op.frobenius()));
    }
}
