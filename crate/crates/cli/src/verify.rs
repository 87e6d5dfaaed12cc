//! Bundled reproduction suite: every worked example with a published value,
//! recomputed and compared. Failures are reported as data.

use std::time::Instant;

use funtf_core::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `|observed − expected| ≤ tolerance`.
    Within,
    /// `observed ≥ expected − tolerance`.
    AtLeast,
    /// `observed ≤ expected + tolerance`.
    AtMost,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub id: &'static str,
    pub description: &'static str,
    pub observed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub relation: Relation,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
    pub passed: usize,
    pub failed: usize,
    pub seconds: f64,
}

struct Outcome {
    observed: f64,
    expected: f64,
    tolerance: f64,
    relation: Relation,
}

fn within(observed: f64, expected: f64, tolerance: f64) -> Outcome {
    Outcome {
        observed,
        expected,
        tolerance,
        relation: Relation::Within,
    }
}

fn flag(b: bool) -> Outcome {
    within(if b { 1.0 } else { 0.0 }, 1.0, 0.0)
}

type CheckFn = fn() -> Result<Outcome>;

struct Check {
    id: &'static str,
    description: &'static str,
    run: CheckFn,
}

const ONE: C64 = C64::new(1.0, 0.0);

fn l1(n: usize) -> SpaceSpec {
    SpaceSpec::real_lp(n, 1.0).expect("valid space")
}

fn l1_2_frame(rows: [([f64; 2], [f64; 2]); 3]) -> Result<FrameSystem> {
    FrameSystem::new(l1(2), rows.iter().map(|(x, f)| FramePair::from_real(x, f)).collect())
}

fn x_frame() -> Result<FrameSystem> {
    l1_2_frame([([1.0, 0.0], [1.0, 0.0]), ([0.25, -0.75], [1.0, -1.0]), ([0.25, 0.75], [1.0, 1.0])])
}

fn y_frame() -> Result<FrameSystem> {
    l1_2_frame([([1.0, 0.0], [1.0, 0.0]), ([0.5, -0.5], [1.0, -1.0]), ([0.5, 0.5], [1.0, 1.0])])
}

fn z_frame() -> Result<FrameSystem> {
    l1_2_frame([([1.0, 0.0], [1.0, -1.0]), ([0.0, 1.0], [0.0, 1.0]), ([0.5, 0.5], [1.0, 1.0])])
}

fn operator_distance(frame: &FrameSystem, lambda: f64) -> f64 {
    frame_operator(frame).distance_to_scalar(C64::new(lambda, 0.0))
}

fn identity_interval(space: SpaceSpec) -> Result<Outcome> {
    let n = space.dim();
    let r = pi2(&OperatorMatrix::identity(n), &space, &space, &Pi2Options::default())?;
    let root = (n as f64).sqrt();
    // The whole certified interval has to sit within 1e-3 of √n.
    let worst = (r.lower - root).abs().max((r.upper - root).abs());
    let observed = if r.certified { root + worst } else { f64::NAN };
    Ok(within(observed, root, 1e-3))
}

fn checks() -> Vec<Check> {
    vec![
        Check {
            id: "norm-l1",
            description: "‖(1/4, −3/4)‖₁ = 1",
            run: || Ok(within(l1(2).norm(&CoordVector::from_real(&[0.25, -0.75]))?, 1.0, 1e-15)),
        },
        Check {
            id: "dual-norm-linf",
            description: "‖e₁* − e₂*‖∞ = 1",
            run: || Ok(within(l1(2).dual_norm(&CoordFunctional::from_real(&[1.0, -1.0]))?, 1.0, 1e-15)),
        },
        Check {
            id: "normalizing-l1",
            description: "normalizing functional of (1/4, −3/4) on ℓ₁² is (1, −1)",
            run: || {
                let f = l1(2).normalizing_functional(&CoordVector::from_real(&[0.25, -0.75]))?;
                let want = [1.0, -1.0];
                let d = f.entries().iter().zip(want).map(|(z, w)| (z - w).norm()).fold(0.0, f64::max);
                Ok(within(d, 0.0, 1e-15))
            },
        },
        Check {
            id: "operator-x-frame",
            description: "frame operator of the ℓ₁² FUNTF is (3/2)I",
            run: || Ok(within(operator_distance(&x_frame()?, 1.5), 0.0, 1e-15)),
        },
        Check {
            id: "operator-y-frame",
            description: "frame operator of the y-frame is diag(2, 1)",
            run: || {
                let s = frame_operator(&y_frame()?);
                let d = OperatorMatrix(s.0 - OperatorMatrix::diagonal(&[2.0, 1.0]).0).frobenius();
                Ok(within(d, 0.0, 1e-15))
            },
        },
        Check {
            id: "classify-x-frame",
            description: "the ℓ₁² FUNTF classifies as funtf with λ = N/n = 3/2",
            run: || {
                let lambda = match classify(&x_frame()?, 1e-12)? {
                    Classification::Funtf { lambda } => lambda,
                    _ => f64::NAN,
                };
                Ok(within(lambda, 1.5, 1e-12))
            },
        },
        Check {
            id: "classify-y-frame",
            description: "the y-frame is approximate but not a FUNTF",
            run: || Ok(flag(classify(&y_frame()?, 1e-12)? == Classification::Approximate)),
        },
        Check {
            id: "auerbach-funtf",
            description: "Auerbach bases are FUNTFs of length n with λ = 1",
            run: || {
                let spaces = [
                    l1(3),
                    SpaceSpec::real_lp(2, f64::INFINITY)?,
                    SpaceSpec::complex_lp(2, 3.0)?,
                    SpaceSpec::weighted_lp(3, Field::Real, 1.5, vec![1.0, 2.0, 0.5])?,
                    SpaceSpec::polytope(
                        2,
                        vec![
                            vec![1.0, 0.0],
                            vec![-1.0, 0.0],
                            vec![0.0, 1.0],
                            vec![0.0, -1.0],
                            vec![1.0, 1.0],
                            vec![-1.0, -1.0],
                        ],
                    )?,
                ];
                let mut worst: f64 = 0.0;
                for s in &spaces {
                    let frame = auerbach_basis(s)?;
                    let ok = matches!(classify(&frame, 1e-9)?, Classification::Funtf { lambda } if (lambda - 1.0).abs() < 1e-9);
                    worst = worst.max(if ok { operator_distance(&frame, 1.0) } else { f64::INFINITY });
                }
                Ok(within(worst, 0.0, 1e-9))
            },
        },
        Check {
            id: "frameFail-sq",
            description: "Σ|x_j*(x_k)|² for the ℓ₁² FUNTF is 5 + 5/8",
            run: || Ok(within(naive_potential_sq(&x_frame()?), 45.0 / 8.0, 1e-12)),
        },
        Check {
            id: "frameFail-sq-y",
            description: "Σ|y_j*(y_k)|² for the non-tight y-frame is 5 + 1/2",
            run: || Ok(within(naive_potential_sq(&y_frame()?), 11.0 / 2.0, 1e-12)),
        },
        Check {
            id: "frameFail-sym",
            description: "Σ|x_j*(x_k) x_k*(x_j)| for the ℓ₁² FUNTF is 4 + 1/2",
            run: || Ok(within(naive_potential_sym(&x_frame()?), 9.0 / 2.0, 1e-12)),
        },
        Check {
            id: "frameFail-sym-z",
            description: "Σ|z_j*(z_k) z_k*(z_j)| for the z-frame is 4",
            run: || Ok(within(naive_potential_sym(&z_frame()?), 4.0, 1e-12)),
        },
        Check {
            id: "trace-bound",
            description: "trace lower bound of a normalized frame with N = 3, n = 2 is N²/n",
            run: || Ok(within(trace_lower_bound(&x_frame()?), 4.5, 1e-12)),
        },
        Check {
            id: "pi2-lower-l1-2",
            description: "admissible sequence of length 3 gives π₂(I) ≥ √2 − 1e−4 on ℓ₁²",
            run: || {
                let opts = LowerOptions {
                    seq_len: Some(3),
                    ..Default::default()
                };
                let (lower, _) = pi2_lower(&OperatorMatrix::identity(2), &l1(2), &l1(2), &opts)?;
                Ok(Outcome {
                    observed: lower,
                    expected: 2f64.sqrt(),
                    tolerance: 1e-4,
                    relation: Relation::AtLeast,
                })
            },
        },
        Check {
            id: "pi2-upper-l1-2",
            description: "Pietsch weights give π₂(I) ≤ √2 + 1e−4 on ℓ₁²",
            run: || {
                let (upper, _) = pi2_upper(&OperatorMatrix::identity(2), &l1(2), &l1(2), 60, 1e-6)?;
                Ok(Outcome {
                    observed: upper,
                    expected: 2f64.sqrt(),
                    tolerance: 1e-4,
                    relation: Relation::AtMost,
                })
            },
        },
        Check {
            id: "pi2-uniform-weights-l1-2",
            description: "the optimal Pietsch weights for I on ℓ₁² are uniform over the dual vertices",
            run: || {
                let (_, cert) = pi2_upper(&OperatorMatrix::identity(2), &l1(2), &l1(2), 60, 1e-6)?;
                let u = 1.0 / cert.weights.len() as f64;
                let dev = cert.weights.iter().map(|w| (w - u).abs()).fold(0.0, f64::max);
                Ok(within(dev, 0.0, 1e-6))
            },
        },
        Check {
            id: "pi2-identity-l1-3",
            description: "π₂(I) on real ℓ₁³ is √3",
            run: || identity_interval(l1(3)),
        },
        Check {
            id: "pi2-identity-linf-2",
            description: "π₂(I) on real ℓ∞² is √2",
            run: || identity_interval(SpaceSpec::real_lp(2, f64::INFINITY)?),
        },
        Check {
            id: "potential-x-frame",
            description: "frame potential of the ℓ₁² FUNTF is N²/n = 9/2",
            run: || {
                let r = frame_potential(&x_frame()?, &Pi2Options::default())?;
                let worst = (r.lower - 4.5).abs().max((r.upper - 4.5).abs());
                Ok(within(4.5 + worst, 4.5, 2e-3))
            },
        },
        Check {
            id: "dft-real-l1-2",
            description: "sign construction on real ℓ₁² with λ = (1, 1) has operator I",
            run: || {
                let frame = dft_funtf(&DiagonalTarget::new(l1(2), vec![1.0, 1.0])?)?;
                let ok = frame.is_normalized();
                Ok(within(if ok { operator_distance(&frame, 1.0) } else { f64::INFINITY }, 0.0, 1e-12))
            },
        },
        Check {
            id: "length-complex-l1-2-3",
            description: "a FUNTF of length 3 exists on complex ℓ₁²",
            run: || {
                let frame = funtf_of_length(&SpaceSpec::complex_lp(2, 1.0)?, 3)?;
                let lambda = match classify(&frame, 1e-10)? {
                    Classification::Funtf { lambda } => lambda,
                    _ => f64::NAN,
                };
                Ok(within(lambda, 1.5, 1e-10))
            },
        },
        Check {
            id: "auerbach-copies",
            description: "two Auerbach copies on ℓ₁³ have operator 2I",
            run: || Ok(within(operator_distance(&auerbach_copies(&l1(3), 2)?, 2.0), 0.0, 1e-15)),
        },
        Check {
            id: "ell1-3-5",
            description: "length-5 FUNTF on ℓ₁³ with a = 1/6, b = 5/12 has operator (5/3)I",
            run: || Ok(within(operator_distance(&ell1_special(3, 5)?, 5.0 / 3.0), 0.0, 1e-12)),
        },
        Check {
            id: "ell1-3-5-constants",
            description: "the length-5 ℓ₁³ FUNTF uses x₂ = (−1/6, 5/12, 5/12)",
            run: || {
                let frame = ell1_special(3, 5)?;
                let want = [-1.0 / 6.0, 5.0 / 12.0, 5.0 / 12.0];
                let d = frame.pairs()[1].x.entries().iter().zip(want).map(|(z, w)| (z - w).norm()).fold(0.0, f64::max);
                Ok(within(d, 0.0, 1e-15))
            },
        },
        Check {
            id: "ell1-4-6",
            description: "length-6 FUNTF on ℓ₁⁴ has operator (3/2)I",
            run: || Ok(within(operator_distance(&ell1_special(4, 6)?, 1.5), 0.0, 1e-12)),
        },
        Check {
            id: "ell1-4-7",
            description: "length-7 FUNTF on ℓ₁⁴ has operator (7/4)I",
            run: || Ok(within(operator_distance(&ell1_special(4, 7)?, 1.75), 0.0, 1e-12)),
        },
        Check {
            id: "ell1-n-plus-1",
            description: "length-(n+1) FUNTFs on ℓ₁ⁿ for n = 3..8 have operator (1 + 1/n)I",
            run: || {
                let mut worst: f64 = 0.0;
                for n in 3..=8 {
                    worst = worst.max(operator_distance(&ell1_funtf_n_plus_1(n)?, 1.0 + 1.0 / n as f64));
                }
                Ok(within(worst, 0.0, 1e-10))
            },
        },
        Check {
            id: "parity-l1-2-3",
            description: "length-3 FUNTFs on real ℓ₁² avoiding the canonical basis do not exist (64 seeds)",
            run: || {
                let mut least = f64::INFINITY;
                for seed in 0..64 {
                    let opts = SearchOptions {
                        seed,
                        min_coordinate: Some(0.05),
                        ..Default::default()
                    };
                    least = least.min(search_funtf(&l1(2), 3, &opts)?.residual);
                }
                Ok(Outcome {
                    observed: least,
                    expected: 1e-3,
                    tolerance: 0.0,
                    relation: Relation::AtLeast,
                })
            },
        },
        Check {
            id: "parity-unrestricted",
            description: "without the restriction the search finds a length-3 FUNTF on real ℓ₁²",
            run: || Ok(flag(search_funtf(&l1(2), 3, &SearchOptions::default())?.success)),
        },
        Check {
            id: "rank-one-norm",
            description: "‖f⊗x‖ = ‖f‖‖x‖ for f = (2, −1), x = (1, 3) on ℓ₁²",
            run: || {
                let op = OperatorMatrix::rank_one(&CoordFunctional::from_real(&[2.0, -1.0]), &CoordVector::from_real(&[1.0, 3.0]));
                Ok(within(operator_norm(&op, &l1(2), &l1(2))?.value, 8.0, 1e-12))
            },
        },
        Check {
            id: "erasure-scaled",
            description: "one erasure from the scaled ℓ₁² FUNTF ((2/3)x_j, x_j*) costs exactly n/N",
            run: || {
                let frame = x_frame()?.rescaled(2.0 / 3.0, &[1.0; 3])?;
                Ok(within(erasure_error(&frame, 1)?.value, 2.0 / 3.0, 1e-12))
            },
        },
        Check {
            id: "erasure-optimal",
            description: "the scaled ℓ₁² FUNTF is erasure optimal and rescales to the original",
            run: || {
                let x = x_frame()?;
                let verdict = is_erasure_optimal(&x.rescaled(2.0 / 3.0, &[1.0; 3])?, 1e-12)?;
                let back = x.rescaled(2.0 / 3.0, &[1.0; 3])?.normalized_pairs()?;
                let same = back
                    .pairs()
                    .iter()
                    .zip(x.pairs())
                    .all(|(a, b)| a.x.entries() == b.x.entries() && a.f.entries() == b.f.entries());
                Ok(flag(verdict.optimal && verdict.rescaled_is_funtf && same))
            },
        },
        Check {
            id: "schauder-identity",
            description: "basis pairs are a Schauder frame",
            run: || Ok(flag(frame_operator(&auerbach_basis(&l1(2))?).distance_to_scalar(ONE) == 0.0)),
        },
    ]
}

pub fn check_ids() -> Vec<(&'static str, &'static str)> {
    checks().iter().map(|c| (c.id, c.description)).collect()
}

/// Runs the checks whose ids are listed, or all of them when `only` is empty.
/// Unknown ids are returned as an error before anything runs.
pub fn verify_paper(only: &[String]) -> std::result::Result<VerifyReport, String> {
    let all = checks();
    if let Some(bad) = only.iter().find(|id| !all.iter().any(|c| c.id == id.as_str())) {
        return Err(format!("unknown check id '{bad}'"));
    }
    let start = Instant::now();
    let results: Vec<CheckResult> = all
        .iter()
        .filter(|c| only.is_empty() || only.iter().any(|id| id == c.id))
        .map(|c| {
            let t = Instant::now();
            let outcome = (c.run)();
            let seconds = t.elapsed().as_secs_f64();
            match outcome {
                Ok(o) => {
                    let passed = match o.relation {
                        Relation::Within => (o.observed - o.expected).abs() <= o.tolerance,
                        Relation::AtLeast => o.observed >= o.expected - o.tolerance,
                        Relation::AtMost => o.observed <= o.expected + o.tolerance,
                    };
                    CheckResult {
                        id: c.id,
                        description: c.description,
                        observed: o.observed,
                        expected: o.expected,
                        tolerance: o.tolerance,
                        relation: o.relation,
                        passed,
                        error: None,
                        seconds,
                    }
                }
                Err(e) => CheckResult {
                    id: c.id,
                    description: c.description,
                    observed: f64::NAN,
                    expected: f64::NAN,
                    tolerance: 0.0,
                    relation: Relation::Within,
                    passed: false,
                    error: Some(e.to_string()),
                    seconds,
                },
            }
        })
        .collect();
    let passed = results.iter().filter(|r| r.passed).count();
    Ok(VerifyReport {
        failed: results.len() - passed,
        passed,
        checks: results,
        seconds: start.elapsed().as_secs_f64(),
    })
}
