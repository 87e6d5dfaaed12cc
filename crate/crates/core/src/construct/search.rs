//! Numerical search for FUNTFs by minimizing `R = ‖S − (N/n)I‖²_F`.
//!
//! Real polyhedral spaces: every pair keeps `f_j(x_j) = ‖x_j‖ = ‖f_j‖_* = 1`
//! exactly by writing `x_j` as a convex combination of the ball vertices in
//! the face exposed by `f_j`, and `f_j` as a convex combination of the dual
//! vertices in the face exposed by `x_j`. With one side fixed `R` is a convex
//! quadratic of the other, so the search alternates accelerated projected
//! gradient solves over products of simplices, then polishes the final
//! supports with an equality-constrained least-squares step.
//!
//! Real smooth spaces: `f_j = J(x_j)` is determined by `x_j`, and the
//! residual is driven to zero by Levenberg-Marquardt on the sphere.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frames::{frame_operator, FramePair, FrameSystem};
use crate::linalg::{gaussian, seeded_rng};
use crate::scalar::{CoordFunctional, CoordVector, C64};
use crate::spaces::{Field, NormSpec, SpaceSpec};

/// Residual at or below which a search counts as successful.
pub const SUCCESS_RESIDUAL: f64 = 1e-10;

const FACE_TOL: f64 = 1e-9;
const INNER_ITERS: usize = 100;
const RESTART_BATCH: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    pub seed: u64,
    /// Budget of inner iterations per restart.
    pub max_iters: usize,
    pub restarts: usize,
    /// Real `ℓ1` only: keep every coordinate of every `x_j` at least this
    /// large in absolute value.
    pub min_coordinate: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            max_iters: 20_000,
            restarts: 8,
            min_coordinate: None,
        }
    }
}

/// Best frame found. On failure `frame` is the best iterate and `residual`
/// its value of `R`, computed on the stored (normalized) pairs.
#[derive(Debug, Clone, Serialize)]
pub struct SearchOutcome {
    pub success: bool,
    pub residual: f64,
    pub restart: usize,
    pub frame: FrameSystem,
}

pub fn search_funtf(space: &SpaceSpec, len: usize, opts: &SearchOptions) -> Result<SearchOutcome> {
    let n = space.dim();
    if len < n {
        return Err(Error::InvalidArgument(format!("length {len} is below the dimension {n}")));
    }
    if opts.max_iters == 0 || opts.restarts == 0 {
        return Err(Error::InvalidArgument("max_iters and restarts must be positive".into()));
    }
    if space.field() == Field::Complex {
        return Err(Error::Unsupported("search is implemented for real spaces only".into()));
    }
    if let Some(m) = opts.min_coordinate {
        if !matches!(space.norm_spec(), NormSpec::Lp { p } if *p == 1.0) {
            return Err(Error::Unsupported("the coordinate restriction is defined for real ℓ1 only".into()));
        }
        if !(m >= 0.0 && m * (n as f64) < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "min_coordinate must lie in [0, 1/{n}), got {m}"
            )));
        }
    }
    let target = len as f64 / n as f64;
    let mut best: Option<(f64, usize, FrameSystem)> = None;
    // restarts run in fixed batches so that stopping after the first
    // successful batch does not depend on the thread count
    for batch in (0..opts.restarts).collect::<Vec<_>>().chunks(RESTART_BATCH) {
        let runs: Vec<(usize, Result<FrameSystem>)> = batch
            .par_iter()
            .map(|&r| {
                let mut rng = seeded_rng(opts.seed ^ 0x9e37_79b9_7f4a_7c15_u64.wrapping_mul(r as u64 + 1));
                let frame = if space.is_smooth() {
                    smooth_search(space, len, opts.max_iters, &mut rng)
                } else {
                    polyhedral_search(space, len, opts.max_iters, opts.min_coordinate, &mut rng)
                };
                (r, frame)
            })
            .collect();
        for (r, frame) in runs {
            let frame = frame?;
            let res = residual(&frame, target);
            // strict comparison keeps the lowest restart index among ties
            if best.as_ref().is_none_or(|b| res < b.0 || b.0.is_nan()) {
                best = Some((res, r, frame));
            }
        }
        if best.as_ref().is_some_and(|b| b.0 <= SUCCESS_RESIDUAL && b.2.is_normalized()) {
            break;
        }
    }
    let (res, restart, frame) = best.expect("at least one restart");
    Ok(SearchOutcome {
        success: res <= SUCCESS_RESIDUAL && frame.is_normalized(),
        residual: res,
        restart,
        frame,
    })
}

/// `‖S − λI‖²_F`.
pub(crate) fn residual(frame: &FrameSystem, lambda: f64) -> f64 {
    frame_operator(frame).distance_to_scalar(C64::new(lambda, 0.0)).powi(2)
}

fn to_dvec(v: &[C64]) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().map(|z| z.re))
}

fn random_unit(space: &SpaceSpec, rng: &mut ChaCha8Rng) -> CoordVector {
    loop {
        let v: Vec<f64> = (0..space.dim()).map(|_| gaussian(rng)).collect();
        let x = CoordVector::from_real(&v);
        if let Ok(nx) = space.norm(&x) {
            if nx > 1e-3 {
                return x.scaled_re(1.0 / nx);
            }
        }
    }
}

fn objective(ps: &[DMatrix<f64>], qs: &[DVector<f64>], ws: &[DVector<f64>], lambda: f64) -> (f64, DMatrix<f64>) {
    let n = qs[0].len();
    let mut e = DMatrix::<f64>::identity(n, n) * -lambda;
    for ((p, q), w) in ps.iter().zip(qs).zip(ws) {
        e += (p * w) * q.transpose();
    }
    (e.norm_squared(), e)
}

/// Euclidean projection onto `{w ≥ lo, Σw = 1}`.
fn project_simplex(w: &DVector<f64>, lo: f64) -> DVector<f64> {
    let k = w.len();
    let radius = 1.0 - lo * k as f64;
    let mut sorted: Vec<f64> = w.iter().map(|v| v - lo).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        acc += v;
        let t = (acc - radius) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    w.map(|v| lo + (v - lo - theta).max(0.0))
}

/// Minimizes `‖Σ_j (P_j w_j) q_jᵀ − λI‖²_F` over `w_j` in shifted simplices
/// by FISTA with function-value restarts.
fn solve_blocks(
    ps: &[DMatrix<f64>],
    qs: &[DVector<f64>],
    lambda: f64,
    lo: f64,
    mut ws: Vec<DVector<f64>>,
    iters: usize,
) -> Vec<DVector<f64>> {
    let q_sq: f64 = qs.iter().map(|q| q.norm_squared()).sum();
    let p_sq = ps.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
    let step = 1.0 / (2.0 * q_sq * p_sq).max(1e-300);
    let mut ys = ws.clone();
    let mut t: f64 = 1.0;
    let (mut fval, _) = objective(ps, qs, &ws, lambda);
    for _ in 0..iters {
        let (_, e) = objective(ps, qs, &ys, lambda);
        let next: Vec<DVector<f64>> = ps
            .iter()
            .zip(qs)
            .zip(&ys)
            .map(|((p, q), y)| {
                let g = p.transpose() * (&e * q) * 2.0;
                project_simplex(&(y - g * step), lo)
            })
            .collect();
        let (nval, _) = objective(ps, qs, &next, lambda);
        if nval > fval {
            // restart the momentum from the last accepted point
            ys = ws.clone();
            t = 1.0;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let beta = (t - 1.0) / t_next;
        ys = next.iter().zip(&ws).map(|(a, b)| a + (a - b) * beta).collect();
        ws = next;
        t = t_next;
        fval = nval;
        if fval < 1e-30 {
            break;
        }
    }
    ws
}

/// Least-squares step on the weights above `lo`, keeping every block sum
/// fixed; accepted only if it stays feasible and lowers the objective.
fn polish_blocks(
    ps: &[DMatrix<f64>],
    qs: &[DVector<f64>],
    lambda: f64,
    lo: f64,
    ws: &[DVector<f64>],
) -> Option<Vec<DVector<f64>>> {
    let n = qs[0].len();
    let free: Vec<(usize, usize)> = ws
        .iter()
        .enumerate()
        .flat_map(|(j, w)| (0..w.len()).filter(move |&i| w[i] > lo + 1e-14).map(move |i| (j, i)))
        .collect();
    if free.is_empty() {
        return None;
    }
    let blocks = ws.len();
    let m = free.len();
    let (f0, e) = objective(ps, qs, ws, lambda);
    // columns: d vec(S)/d w_{j,i} = vec(P_j[:, i] q_jᵀ)
    let mut a = DMatrix::<f64>::zeros(n * n, m);
    for (c, &(j, i)) in free.iter().enumerate() {
        let col = ps[j].column(i) * qs[j].transpose();
        for (r, v) in col.iter().enumerate() {
            a[(r, c)] = *v;
        }
    }
    let rhs = DVector::from_iterator(n * n, e.iter().map(|v| -v));
    let mut kkt = DMatrix::<f64>::zeros(m + blocks, m + blocks);
    let ata = a.transpose() * &a;
    kkt.view_mut((0, 0), (m, m)).copy_from(&ata);
    for (c, &(j, _)) in free.iter().enumerate() {
        kkt[(m + j, c)] = 1.0;
        kkt[(c, m + j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m + blocks);
    b.rows_mut(0, m).copy_from(&(a.transpose() * rhs));
    let sol = kkt.svd(true, true).solve(&b, 1e-13).ok()?;
    let mut out = ws.to_vec();
    for (c, &(j, i)) in free.iter().enumerate() {
        out[j][i] += sol[c];
    }
    for w in out.iter_mut() {
        if w.iter().any(|v| *v < lo - 1e-13) {
            return None;
        }
        w.apply(|v| *v = v.max(lo));
        let s = w.sum();
        *w /= s;
    }
    let (f1, _) = objective(ps, qs, &out, lambda);
    (f1 < f0).then_some(out)
}

/// Columns are the points of `candidates` on which `g` is within
/// [`FACE_TOL`] of its maximum 1.
fn face(candidates: &[DVector<f64>], g: &DVector<f64>) -> DMatrix<f64> {
    let cols: Vec<&DVector<f64>> = candidates.iter().filter(|u| u.dot(g) >= 1.0 - FACE_TOL).collect();
    DMatrix::from_columns(&cols.iter().map(|c| (*c).clone()).collect::<Vec<_>>())
}

/// Weights on the columns of `p` that reproduce `v` as closely as possible.
fn weights_for(p: &DMatrix<f64>, v: &DVector<f64>, lo: f64) -> DVector<f64> {
    let k = p.ncols();
    let mut w = DVector::from_element(k, 1.0 / k as f64);
    let step = 1.0 / p.norm_squared().max(1e-300);
    for _ in 0..200 {
        let r = p * &w - v;
        if r.norm_squared() < 1e-30 {
            break;
        }
        w = project_simplex(&(&w - p.transpose() * r * step), lo);
    }
    w
}

/// Normalized pairs as coordinate vectors, with the vertex sets of both balls.
#[derive(Clone)]
struct Pairs {
    xs: Vec<DVector<f64>>,
    fs: Vec<DVector<f64>>,
}

struct Polyhedral<'a> {
    primal: Vec<DVector<f64>>,
    dual: Vec<DVector<f64>>,
    lambda: f64,
    lo: f64,
    budget: &'a mut usize,
}

impl Polyhedral<'_> {
    fn value(&self, st: &Pairs) -> f64 {
        let n = st.xs[0].len();
        let mut e = DMatrix::<f64>::identity(n, n) * -self.lambda;
        for (x, f) in st.xs.iter().zip(&st.fs) {
            e += x * f.transpose();
        }
        e.norm_squared()
    }

    fn x_step(&mut self, st: &mut Pairs) {
        let ps: Vec<DMatrix<f64>> = st.fs.iter().map(|f| face(&self.primal, f)).collect();
        let ws: Vec<DVector<f64>> = ps.iter().zip(&st.xs).map(|(p, x)| weights_for(p, x, self.lo)).collect();
        let ws = solve_blocks(&ps, &st.fs, self.lambda, self.lo, ws, INNER_ITERS);
        st.xs = ps.iter().zip(&ws).map(|(p, w)| p * w).collect();
        *self.budget = self.budget.saturating_sub(INNER_ITERS);
    }

    fn f_step(&mut self, st: &mut Pairs) {
        let ps: Vec<DMatrix<f64>> = st.xs.iter().map(|x| face(&self.dual, x)).collect();
        let cs: Vec<DVector<f64>> = ps.iter().zip(&st.fs).map(|(p, f)| weights_for(p, f, 0.0)).collect();
        let cs = solve_blocks(&ps, &st.xs, self.lambda, 0.0, cs, INNER_ITERS);
        st.fs = ps.iter().zip(&cs).map(|(p, c)| p * c).collect();
        *self.budget = self.budget.saturating_sub(INNER_ITERS);
    }

    /// Alternates until the value stalls, `rounds` runs out or the budget
    /// is spent.
    fn alternate(&mut self, st: &mut Pairs, rounds: usize) -> f64 {
        let mut last = self.value(st);
        for _ in 0..rounds {
            if *self.budget == 0 || last < 1e-28 {
                break;
            }
            self.x_step(st);
            self.f_step(st);
            let val = self.value(st);
            let stalled = val > last * (1.0 - 1e-12);
            last = last.min(val);
            if stalled {
                break;
            }
        }
        last
    }

    /// Candidate replacements for one pair: every dual vertex as the
    /// functional (the vector is then re-fitted on its facet) and, without a
    /// coordinate restriction, every ball vertex as the vector.
    fn moves(&self, st: &Pairs, j: usize) -> Vec<(DVector<f64>, DVector<f64>)> {
        let mut out = Vec::new();
        for v in &self.dual {
            let p = face(&self.primal, v);
            let w = weights_for(&p, &st.xs[j], self.lo);
            out.push((p * w, v.clone()));
        }
        if self.lo == 0.0 {
            for u in &self.primal {
                let g = face(&self.dual, u);
                let c = DVector::from_element(g.ncols(), 1.0 / g.ncols() as f64);
                out.push((u.clone(), g * c));
            }
        }
        out
    }

    /// Exact least-squares step on the final supports, alternating sides.
    fn polish(&mut self, st: &mut Pairs) {
        for _ in 0..4 {
            let ps: Vec<DMatrix<f64>> = st.fs.iter().map(|f| face(&self.primal, f)).collect();
            let ws: Vec<DVector<f64>> = ps.iter().zip(&st.xs).map(|(p, x)| weights_for(p, x, self.lo)).collect();
            if let Some(ws) = polish_blocks(&ps, &st.fs, self.lambda, self.lo, &ws) {
                st.xs = ps.iter().zip(&ws).map(|(p, w)| p * w).collect();
            }
            let ps: Vec<DMatrix<f64>> = st.xs.iter().map(|x| face(&self.dual, x)).collect();
            let cs: Vec<DVector<f64>> = ps.iter().zip(&st.fs).map(|(p, f)| weights_for(p, f, 0.0)).collect();
            if let Some(cs) = polish_blocks(&ps, &st.xs, self.lambda, 0.0, &cs) {
                st.fs = ps.iter().zip(&cs).map(|(p, c)| p * c).collect();
            }
        }
    }
}

/// A random point of a random face: a random subset of the vertices of a
/// random facet, mixed with random weights, paired with a random point of
/// the dual face it exposes.
fn random_pair(primal: &[DVector<f64>], dual: &[DVector<f64>], rng: &mut ChaCha8Rng) -> (DVector<f64>, DVector<f64>) {
    let v = &dual[rng.random_range(0..dual.len())];
    let facet: Vec<&DVector<f64>> = primal.iter().filter(|u| u.dot(v) >= 1.0 - FACE_TOL).collect();
    let k = rng.random_range(1..=facet.len());
    let mut idx: Vec<usize> = (0..facet.len()).collect();
    for i in 0..k {
        let r = rng.random_range(i..idx.len());
        idx.swap(i, r);
    }
    let mut x = DVector::<f64>::zeros(v.len());
    let mut total = 0.0;
    for &i in &idx[..k] {
        let w = -rng.random::<f64>().max(1e-300).ln();
        x += facet[i] * w;
        total += w;
    }
    x /= total;
    let g = face(dual, &x);
    let mut f = DVector::<f64>::zeros(v.len());
    let mut total = 0.0;
    for c in g.column_iter() {
        let w = -rng.random::<f64>().max(1e-300).ln();
        f += c * w;
        total += w;
    }
    (x, f / total)
}

fn polyhedral_search(
    space: &SpaceSpec,
    len: usize,
    max_iters: usize,
    min_coordinate: Option<f64>,
    rng: &mut ChaCha8Rng,
) -> Result<FrameSystem> {
    let n = space.dim();
    let primal: Vec<DVector<f64>> = space
        .ball_vertices()
        .ok_or_else(|| Error::Unsupported("ball vertices unavailable".into()))?
        .iter()
        .map(|v| to_dvec(&v.0))
        .collect();
    let dual: Vec<DVector<f64>> = space.dual_extreme_points(1)?.points.iter().map(|g| to_dvec(&g.0)).collect();

    let mut st = Pairs {
        xs: Vec::with_capacity(len),
        fs: Vec::with_capacity(len),
    };
    for _ in 0..len {
        let (x, f) = match min_coordinate {
            Some(m) => {
                // magnitudes uniform on the shifted simplex, signs uniform
                let raw: Vec<f64> = (0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
                let total: f64 = raw.iter().sum();
                let radius = 1.0 - m * n as f64;
                let signs: Vec<f64> = (0..n).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
                let x = DVector::from_fn(n, |i, _| signs[i] * (m + radius * raw[i] / total));
                (x, DVector::from_vec(signs))
            }
            None => random_pair(&primal, &dual, rng),
        };
        st.xs.push(x);
        st.fs.push(f);
    }

    let mut budget = max_iters;
    let mut solver = Polyhedral {
        primal,
        dual,
        lambda: len as f64 / n as f64,
        lo: min_coordinate.unwrap_or(0.0),
        budget: &mut budget,
    };
    let mut val = solver.alternate(&mut st, usize::MAX);
    'outer: while val >= 1e-28 && *solver.budget > 0 {
        for j in 0..len {
            for (x, f) in solver.moves(&st, j) {
                if *solver.budget == 0 {
                    break 'outer;
                }
                let mut trial = st.clone();
                trial.xs[j] = x;
                trial.fs[j] = f;
                let tv = solver.alternate(&mut trial, 3);
                if tv < val * (1.0 - 1e-6) {
                    st = trial;
                    val = solver.alternate(&mut st, usize::MAX);
                    continue 'outer;
                }
            }
        }
        break;
    }
    solver.polish(&mut st);
    assemble(space, &st.xs, &st.fs)
}

/// Pairs rescaled to unit norms, so that the reported residual is that of a
/// normalized system.
fn assemble(space: &SpaceSpec, xs: &[DVector<f64>], fs: &[DVector<f64>]) -> Result<FrameSystem> {
    let mut pairs = Vec::with_capacity(xs.len());
    for (x, f) in xs.iter().zip(fs) {
        let x = CoordVector::from_real(x.as_slice());
        let f = CoordFunctional::from_real(f.as_slice());
        let nx = space.norm(&x)?;
        let nf = space.dual_norm(&f)?;
        pairs.push(FramePair::new(x.scaled_re(1.0 / nx), f.scaled_re(1.0 / nf)));
    }
    FrameSystem::new(space.clone(), pairs)
}

fn smooth_residual(space: &SpaceSpec, flat: &[f64], n: usize, lambda: f64) -> Result<(DVector<f64>, Vec<DVector<f64>>, Vec<DVector<f64>>)> {
    let mut xs = Vec::new();
    let mut fs = Vec::new();
    let mut e = DMatrix::<f64>::identity(n, n) * -lambda;
    for chunk in flat.chunks(n) {
        let x = CoordVector::from_real(chunk);
        let nx = space.norm(&x)?;
        let x = x.scaled_re(1.0 / nx);
        let f = space.normalizing_functional(&x)?;
        let (xv, fv) = (to_dvec(&x.0), to_dvec(&f.0));
        e += &xv * fv.transpose();
        xs.push(xv);
        fs.push(fv);
    }
    Ok((DVector::from_column_slice(e.as_slice()), xs, fs))
}

fn smooth_search(space: &SpaceSpec, len: usize, max_iters: usize, rng: &mut ChaCha8Rng) -> Result<FrameSystem> {
    let n = space.dim();
    let lambda = len as f64 / n as f64;
    let mut flat: Vec<f64> = (0..len).flat_map(|_| random_unit(space, rng).real_parts()).collect();
    let (mut r, mut xs, mut fs) = smooth_residual(space, &flat, n, lambda)?;
    let mut damping = 1e-3;
    let h = 1e-7;
    for _ in 0..max_iters {
        let f0 = r.norm_squared();
        if f0 < 1e-28 {
            break;
        }
        let dim = flat.len();
        let mut jac = DMatrix::<f64>::zeros(n * n, dim);
        for c in 0..dim {
            let mut plus = flat.clone();
            let mut minus = flat.clone();
            plus[c] += h;
            minus[c] -= h;
            let (rp, _, _) = smooth_residual(space, &plus, n, lambda)?;
            let (rm, _, _) = smooth_residual(space, &minus, n, lambda)?;
            jac.set_column(c, &((rp - rm) / (2.0 * h)));
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut sys = jtj.clone();
            for d in 0..dim {
                sys[(d, d)] += damping * (1.0 + jtj[(d, d)]);
            }
            let Some(chol) = sys.cholesky() else {
                damping *= 4.0;
                continue;
            };
            let step = chol.solve(&(-&jtr));
            let trial: Vec<f64> = flat.iter().zip(step.iter()).map(|(a, d)| a + d).collect();
            let (rt, xt, ft) = smooth_residual(space, &trial, n, lambda)?;
            if rt.norm_squared() < f0 {
                // keep the parametrization on the unit sphere
                flat = xt.iter().flat_map(|x| x.iter().cloned().collect::<Vec<_>>()).collect();
                r = rt;
                xs = xt;
                fs = ft;
                damping = (damping / 3.0).max(1e-15);
                improved = true;
                break;
            }
            damping *= 4.0;
        }
        if !improved {
            break;
        }
    }
    assemble(space, &xs, &fs)
}
