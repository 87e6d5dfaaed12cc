//! Small dense Hermitian helpers on top of nalgebra.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Symmetrizes `m` to `(m + mᴴ)/2`, removing rounding asymmetry.
pub(crate) fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub(crate) fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub(crate) fn lambda_max(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(hermitian_part(m))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

pub(crate) fn cholesky(m: &CMatrix) -> Option<Cholesky<C64, Dyn>> {
    Cholesky::new(hermitian_part(m))
}

/// Largest generalized eigenvalue of `a` relative to the positive definite `g`,
/// i.e. `sup_x xᴴ a x / xᴴ g x`.
pub(crate) fn generalized_lambda_max(chol_g: &Cholesky<C64, Dyn>, a: &CMatrix) -> f64 {
    let l = chol_g.l();
    let la = l
        .solve_lower_triangular(a)
        .expect("cholesky factor is invertible");
    let b = l
        .solve_lower_triangular(&la.adjoint())
        .expect("cholesky factor is invertible");
    lambda_max(&b)
}

pub(crate) fn smallest_singular_value(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub(crate) fn trace(m: &CMatrix) -> C64 {
    (0..m.nrows().min(m.ncols())).map(|i| m[(i, i)]).sum()
}

/// Nonnegative least squares `min ‖Ax − b‖, x ≥ 0` by Lawson–Hanson.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * a.norm().max(1.0) * b.norm().max(1.0);
    for _ in 0..3 * n + 3 {
        let grad = a.transpose() * (b - a * &x);
        let Some(j) = (0..n)
            .filter(|&j| !passive[j] && grad[j] > tol)
            .max_by(|&p, &q| grad[p].total_cmp(&grad[q]))
        else {
            break;
        };
        passive[j] = true;
        loop {
            let cols: Vec<usize> = (0..n).filter(|&k| passive[k]).collect();
            let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
            let Ok(z) = sub.svd(true, true).solve(b, 1e-14) else {
                return x;
            };
            if z.iter().all(|&v| v > 0.0) {
                for (c, &k) in cols.iter().enumerate() {
                    x[k] = z[c];
                }
                break;
            }
            // step back to the boundary of the feasible region
            let mut alpha: f64 = 1.0;
            for (c, &k) in cols.iter().enumerate() {
                if z[c] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z[c]));
                }
            }
            for (c, &k) in cols.iter().enumerate() {
                x[k] += alpha * (z[c] - x[k]);
                if x[k] <= 1e-300 {
                    x[k] = 0.0;
                    passive[k] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}
