//! The 2-summing norm `π₂(T)` as a certified interval, and the frame
//! potential `π₂(S)²` of a frame operator.
//!
//! Upper bounds come from Pietsch weights on dual extreme points of the
//! domain, lower bounds from explicit weak-ℓ₂ admissible sequences. Both are
//! produced by one barrier solve; see [`pietsch`].

mod ascent;
mod pietsch;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frames::{frame_operator, FrameSystem, OperatorMatrix};
use crate::linalg::{eigh, gaussian, seeded_rng, CMatrix, CVector};
use crate::scalar::{decode_entries, encode_entries, CoordFunctional, CoordVector, ScalarRepr, C64};
use crate::spaces::{Field, SpaceSpec};

use ascent::{evaluate_sequence, merge_parallel, polish, truncate, SequenceValue};
use pietsch::Problem;

/// Relative interval width the solver aims for, independent of `tol`.
const SOLVER_REL_TOL: f64 = 1e-10;
const ROUNDING_PAD: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
pub struct Pi2Options {
    /// Interval width below which a result may be certified.
    pub tol: f64,
    /// Number of sampled dual points when the extreme points are not finite.
    pub budget: usize,
    pub max_outer: usize,
    pub seed: u64,
}

impl Default for Pi2Options {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            budget: 256,
            max_outer: 60,
            seed: 0,
        }
    }
}

/// Vectors with `Σ_j |f(x_j)|² ≤ ‖f‖²_*` for every functional `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleSequence {
    pub vectors: Vec<CoordVector>,
    /// Whether admissibility was verified exactly rather than on samples.
    pub verified: bool,
}

impl AdmissibleSequence {
    fn from_value(v: &SequenceValue) -> Self {
        Self {
            vectors: v.vectors.iter().map(to_coord).collect(),
            verified: v.exact,
        }
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Probability weights on dual points of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct PietschCertificate {
    pub points: Vec<CoordFunctional>,
    pub weights: Vec<f64>,
}

impl PietschCertificate {
    /// `G_w = Σ w_i conj(g_i) g_iᵀ`, so that `xᴴ G_w x = Σ w_i |g_i(x)|²`.
    pub fn gram(&self) -> CMatrix {
        let n = self.points.first().map_or(0, |p| p.len());
        let mut g = CMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for (p, w) in self.points.iter().zip(&self.weights) {
            let gamma = CVector::from_fn(n, |k, _| p.0[k].conj());
            g += (&gamma * gamma.adjoint()).scale(*w);
        }
        g
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pi2Result {
    pub lower: f64,
    pub upper: f64,
    pub certified: bool,
    /// One of the bounds rests on sampled rather than exhaustive dual points.
    pub heuristic: bool,
    pub witness: AdmissibleSequence,
    pub certificate: Option<PietschCertificate>,
}

impl Pi2Result {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }

    /// Both endpoints squared.
    pub fn squared(&self) -> Pi2Result {
        Pi2Result {
            lower: self.lower * self.lower,
            upper: self.upper * self.upper,
            ..self.clone()
        }
    }
}

fn to_coord(v: &CVector) -> CoordVector {
    CoordVector::new(v.iter().cloned().collect())
}

fn check_operator(op: &OperatorMatrix, domain: &SpaceSpec, range: &SpaceSpec) -> Result<()> {
    if op.0.nrows() != op.0.ncols() {
        return Err(Error::InvalidArgument("operator matrix must be square".into()));
    }
    for s in [domain, range] {
        if s.dim() != op.dim() {
            return Err(Error::DimensionMismatch {
                expected: s.dim(),
                found: op.dim(),
            });
        }
    }
    if domain.field() != range.field() {
        return Err(Error::Unsupported("domain and range must share the scalar field".into()));
    }
    if domain.field() == Field::Real && !op.is_real() {
        return Err(Error::InvalidArgument("complex operator on real spaces".into()));
    }
    Ok(())
}

fn certifiable(domain: &SpaceSpec, range: &SpaceSpec) -> bool {
    domain.is_real_polyhedral() && (range.is_real_polyhedral() || (range.is_hilbert() && range.field() == Field::Real))
}

/// `‖S_Y T S_X⁻¹‖_F` for weighted Hilbert spaces, with the scaled
/// orthonormal basis as witness.
fn hilbert_fast_path(op: &OperatorMatrix, domain: &SpaceSpec, range: &SpaceSpec) -> Pi2Result {
    let n = op.dim();
    let sx = domain.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
    let sy = range.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
    let mut total = 0.0;
    for i in 0..n {
        for k in 0..n {
            total += (op.0[(i, k)] * sy[i] / sx[k]).norm_sqr();
        }
    }
    let value = total.sqrt();
    let witness = (0..n).map(|k| CoordVector::unit(n, k).scaled_re(1.0 / sx[k])).collect();
    Pi2Result {
        lower: value * (1.0 - ROUNDING_PAD),
        upper: value * (1.0 + ROUNDING_PAD),
        certified: true,
        heuristic: false,
        witness: AdmissibleSequence {
            vectors: witness,
            verified: true,
        },
        certificate: None,
    }
}

/// `π₂(T)` for `T : X → Y` as an interval `[lower, upper]`.
///
/// Hilbert-to-Hilbert maps return the Hilbert–Schmidt norm. Otherwise the
/// result is `certified` when the domain is real polyhedral, the range is
/// real polyhedral or Hilbert, and the width is at most `opts.tol`.
pub fn pi2(op: &OperatorMatrix, domain: &SpaceSpec, range: &SpaceSpec, opts: &Pi2Options) -> Result<Pi2Result> {
    check_operator(op, domain, range)?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if opts.budget == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    if domain.is_hilbert() && range.is_hilbert() {
        return Ok(hilbert_fast_path(op, domain, range));
    }
    let fro = op.frobenius();
    if fro == 0.0 {
        let pts = pietsch::domain_points(domain, opts.budget, opts.seed).points;
        let w = vec![1.0 / pts.len() as f64; pts.len()];
        return Ok(Pi2Result {
            lower: 0.0,
            upper: 0.0,
            certified: certifiable(domain, range),
            heuristic: false,
            witness: AdmissibleSequence {
                vectors: Vec::new(),
                verified: true,
            },
            certificate: Some(PietschCertificate { points: pts, weights: w }),
        });
    }
    let tn = op.0.unscale(fro);
    let problem = Problem::new(&tn, domain, range, opts.budget, opts.seed);
    let sol = problem.solve(SOLVER_REL_TOL, opts.max_outer);
    // widen by a few ulps to absorb rounding in the final evaluations
    let lower = sol.lower.value * fro * (1.0 - ROUNDING_PAD);
    let mut upper = sol.upper * fro * (1.0 + ROUNDING_PAD);
    let heuristic = !problem.forms.exact || !sol.lower.exact;
    if !problem.forms.exact && upper < lower {
        // sampled range forms underestimate the norm
        upper = lower;
    }
    let certified = certifiable(domain, range) && problem.points.exhaustive && !heuristic && upper - lower <= opts.tol;
    Ok(Pi2Result {
        lower,
        upper,
        certified,
        heuristic,
        witness: AdmissibleSequence::from_value(&sol.lower),
        certificate: Some(PietschCertificate {
            points: problem.points.points.clone(),
            weights: sol.weights,
        }),
    })
}

/// Upper bound with its Pietsch weights.
pub fn pi2_upper(
    op: &OperatorMatrix,
    domain: &SpaceSpec,
    range: &SpaceSpec,
    max_iters: usize,
    tol: f64,
) -> Result<(f64, PietschCertificate)> {
    let r = pi2(
        op,
        domain,
        range,
        &Pi2Options {
            tol,
            max_outer: max_iters,
            ..Pi2Options::default()
        },
    )?;
    let cert = match r.certificate {
        Some(c) => c,
        None => {
            // Hilbert domain: the upper bound is attained only in the limit of
            // the uniform measure on the sphere; report the coordinate weights
            let n = domain.dim();
            let s = domain.coordinate_scale().unwrap_or_else(|| vec![1.0; n]);
            PietschCertificate {
                points: (0..n).map(|k| CoordFunctional::unit(n, k).scaled_re(s[k])).collect(),
                weights: vec![1.0 / n as f64; n],
            }
        }
    };
    Ok((r.upper, cert))
}

#[derive(Debug, Clone, Copy)]
pub struct LowerOptions {
    /// Defaults to `k(k+1)/2` (real) or `k²` (complex), `k = rank(T)`.
    pub seq_len: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for LowerOptions {
    fn default() -> Self {
        Self {
            seq_len: None,
            restarts: 8,
            seed: 0,
        }
    }
}

fn numerical_rank(m: &CMatrix) -> usize {
    let sv = m.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > 1e-12 * top).count()
}

/// Lower bound from an admissible sequence of length at most `seq_len`.
///
/// Starts from the sequence recovered from the barrier solve (parallel
/// vectors merged, then truncated) and from the top singular directions of
/// `T G_w^{-1/2}`, and improves them by seeded local search.
pub fn pi2_lower(
    op: &OperatorMatrix,
    domain: &SpaceSpec,
    range: &SpaceSpec,
    opts: &LowerOptions,
) -> Result<(f64, AdmissibleSequence)> {
    check_operator(op, domain, range)?;
    let fro = op.frobenius();
    if fro == 0.0 {
        return Ok((
            0.0,
            AdmissibleSequence {
                vectors: Vec::new(),
                verified: true,
            },
        ));
    }
    let k = numerical_rank(&op.0);
    let len = opts.seq_len.unwrap_or(match domain.field() {
        Field::Real => k * (k + 1) / 2,
        Field::Complex => k * k,
    });
    if len == 0 {
        return Err(Error::InvalidArgument("sequence length must be positive".into()));
    }
    let tn = op.0.unscale(fro);
    let base = Pi2Options::default();
    let problem = Problem::new(&tn, domain, range, base.budget, opts.seed);
    let sol = problem.solve(SOLVER_REL_TOL, base.max_outer);

    let mut starts: Vec<Vec<CVector>> = Vec::new();
    let merged = merge_parallel(&sol.lower.vectors);
    if !merged.is_empty() {
        starts.push(truncate(&tn, range, &merged, len));
    }
    let cert = PietschCertificate {
        points: problem.points.points.clone(),
        weights: sol.weights.clone(),
    };
    if let Some(s) = singular_start(&tn, &cert.gram(), len) {
        starts.push(s);
    }
    let best = polish(&tn, domain, range, starts, opts.restarts, opts.seed);
    let best = if best.vectors.len() <= len {
        best
    } else {
        evaluate_sequence(&tn, domain, range, &truncate(&tn, range, &best.vectors, len))
    };
    Ok((best.value * fro, AdmissibleSequence::from_value(&best)))
}

/// `x_j = G^{-1/2} v_j` for the top right singular vectors `v_j` of `T G^{-1/2}`.
fn singular_start(t: &CMatrix, g: &CMatrix, len: usize) -> Option<Vec<CVector>> {
    let (vals, vecs) = eigh(g);
    let top = vals.iter().cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return None;
    }
    let n = g.nrows();
    let inv_sqrt = {
        let mut acc = CMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for (k, &lam) in vals.iter().enumerate() {
            let lam = lam.max(1e-12 * top);
            let v = vecs.column(k).into_owned();
            acc += (&v * v.adjoint()).scale(1.0 / lam.sqrt());
        }
        acc
    };
    let b = t * &inv_sqrt;
    let svd = b.svd(false, true);
    let vt = svd.v_t?;
    let out: Vec<CVector> = (0..len.min(n))
        .map(|j| &inv_sqrt * vt.row(j).adjoint().scale(svd.singular_values[j]))
        .collect();
    Some(out)
}

/// Frame potential `π₂(S)²` of the frame operator `S`, as an interval.
pub fn frame_potential(frame: &FrameSystem, opts: &Pi2Options) -> Result<Pi2Result> {
    let s = frame_operator(frame);
    Ok(pi2(&s, frame.space(), frame.space(), opts)?.squared())
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeTrial {
    /// `min` over both endpoints of `‖S/π₂(S) − I/√n‖_F`.
    pub distance: f64,
    pub trace: f64,
    /// `√n − Re tr(S)/upper`.
    pub gap: f64,
    /// `√n − Re tr(S)/lower`; positive implies `gap` is positive for the true value.
    pub conservative_gap: f64,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    pub trials: Vec<ProbeTrial>,
    pub min_gap: f64,
    pub min_conservative_gap: f64,
    /// Every conservative gap is strictly positive.
    pub all_positive: bool,
}

/// Samples operators `S` with `π₂(S) = 1` away from `I/√n` and records how
/// far `tr(S)` stays below `√n`.
pub fn smoothness_probe(space: &SpaceSpec, trials: usize, seed: u64) -> Result<SmoothnessReport> {
    if !(certifiable(space, space) || space.is_hilbert()) {
        return Err(Error::Unsupported(
            "smoothness probe needs a certified 2-summing norm (real polyhedral or Hilbert space)".into(),
        ));
    }
    let n = space.dim();
    let root_n = (n as f64).sqrt();
    let mut rng = seeded_rng(seed);
    let opts = Pi2Options {
        tol: 1e-7,
        ..Pi2Options::default()
    };
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut found = None;
        for _ in 0..1000 {
            let r: f64 = rng.random_range(0.15..1.5);
            let e = CMatrix::from_fn(n, n, |_, _| match space.field() {
                Field::Real => C64::new(gaussian(&mut rng), 0.0),
                Field::Complex => C64::new(gaussian(&mut rng), gaussian(&mut rng)),
            });
            let e = e.unscale(e.norm()).scale(r);
            let s = OperatorMatrix(CMatrix::identity(n, n).unscale(root_n) + e);
            let res = pi2(&s, space, space, &opts)?;
            if !(res.lower > 0.0) {
                continue;
            }
            let dist = |scale: f64| (s.0.unscale(scale) - CMatrix::identity(n, n).unscale(root_n)).norm();
            let distance = dist(res.lower).min(dist(res.upper));
            if distance < 0.1 {
                continue;
            }
            let tr = s.trace().re;
            found = Some(ProbeTrial {
                distance,
                trace: tr,
                gap: root_n - tr / res.upper,
                conservative_gap: root_n - tr / res.lower,
                certified: res.certified,
            });
            break;
        }
        out.push(found.ok_or_else(|| Error::NonConvergence {
            what: "sampling operators away from the identity".into(),
            iterations: 1000,
        })?);
    }
    let min_gap = out.iter().map(|t| t.gap).fold(f64::INFINITY, f64::min);
    let min_conservative_gap = out.iter().map(|t| t.conservative_gap).fold(f64::INFINITY, f64::min);
    Ok(SmoothnessReport {
        all_positive: out.iter().all(|t| t.conservative_gap > 0.0),
        trials: out,
        min_gap,
        min_conservative_gap,
    })
}

// ---- JSON --------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct WeightJson {
    vertex: Vec<ScalarRepr>,
    w: f64,
}

#[derive(Serialize, Deserialize)]
struct Pi2Json {
    lower: f64,
    upper: f64,
    certified: bool,
    witness: Vec<Vec<ScalarRepr>>,
    pietsch_weights: Vec<WeightJson>,
}

impl Serialize for Pi2Result {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let complex = self.witness.vectors.iter().any(|v| !v.is_real())
            || self.certificate.as_ref().is_some_and(|c| c.points.iter().any(|p| !p.is_real()));
        Pi2Json {
            lower: self.lower,
            upper: self.upper,
            certified: self.certified,
            witness: self.witness.vectors.iter().map(|v| encode_entries(v.entries(), complex)).collect(),
            pietsch_weights: self
                .certificate
                .as_ref()
                .map(|c| {
                    c.points
                        .iter()
                        .zip(&c.weights)
                        .map(|(p, w)| WeightJson {
                            vertex: encode_entries(p.entries(), complex),
                            w: *w,
                        })
                        .collect()
                })
                .unwrap_or_default(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pi2Result {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = Pi2Json::deserialize(d)?;
        let certificate = (!raw.pietsch_weights.is_empty()).then(|| PietschCertificate {
            points: raw.pietsch_weights.iter().map(|w| CoordFunctional::new(decode_entries(&w.vertex))).collect(),
            weights: raw.pietsch_weights.iter().map(|w| w.w).collect(),
        });
        Ok(Pi2Result {
            lower: raw.lower,
            upper: raw.upper,
            certified: raw.certified,
            heuristic: !raw.certified,
            witness: AdmissibleSequence {
                vectors: raw.witness.iter().map(|v| CoordVector::new(decode_entries(v))).collect(),
                verified: raw.certified,
            },
            certificate,
        })
    }
}

/// `Σ_j |f(x_j)|²` for a witness, for external checks.
pub fn weak_sum(f: &CoordFunctional, seq: &AdmissibleSequence) -> f64 {
    seq.vectors.iter().map(|x| f.apply(x).norm_sqr()).sum()
}
