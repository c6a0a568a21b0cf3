//! Dense complex least squares and a damped Gauss–Newton driver.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub struct Lstsq {
    pub x: Vec<Complex64>,
    /// Euclidean norm of `Ax − b`.
    pub residual: f64,
    /// Ratio of largest to smallest singular value (infinite when rank deficient).
    pub condition: f64,
    pub rank: usize,
    pub singular_values: Vec<f64>,
}

pub fn to_matrix(rows: &[Vec<Complex64>]) -> DMatrix<Complex64> {
    let m = rows.len();
    let n = rows.first().map_or(0, |r| r.len());
    DMatrix::from_fn(m, n, |i, j| rows[i][j])
}

pub fn singular_values(a: &DMatrix<Complex64>) -> Vec<f64> {
    let mut s: Vec<f64> = a.clone().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn condition_number(a: &DMatrix<Complex64>) -> f64 {
    let s = singular_values(a);
    match (s.first(), s.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        (Some(_), Some(_)) => f64::INFINITY,
        _ => 1.0,
    }
}

/// Minimum-norm least-squares solution, truncating singular values below `rcond·σ_max`.
pub fn lstsq(a: &DMatrix<Complex64>, b: &[Complex64], rcond: f64) -> Lstsq {
    let (m, n) = a.shape();
    assert_eq!(m, b.len(), "right-hand side length");
    if n == 0 {
        let residual = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        return Lstsq { x: vec![], residual, condition: 1.0, rank: 0, singular_values: vec![] };
    }
    let rhs = DVector::from_column_slice(b);
    let svd = a.clone().svd(true, true);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let eps = (rcond * smax).max(f64::MIN_POSITIVE);
    let x = svd.solve(&rhs, eps).expect("svd computed with u and v");
    let r = a * &x - &rhs;
    sv.sort_by(|x, y| y.total_cmp(x));
    let rank = sv.iter().filter(|&&s| s > eps).count();
    let smin = sv.get(n.min(m).saturating_sub(1)).copied().unwrap_or(0.0);
    let condition = if rank < n.min(m) || smin == 0.0 { f64::INFINITY } else { smax / smin };
    Lstsq { x: x.iter().copied().collect(), residual: r.norm(), condition, rank, singular_values: sv }
}

#[derive(Clone, Debug)]
pub struct GaussNewton {
    pub x: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
    /// Singular values of the Jacobian at the returned point.
    pub jacobian_singular_values: Vec<f64>,
}

/// Minimizes `‖r(x)‖` for a residual holomorphic in `x`, with a central-difference
/// Jacobian and Levenberg–Marquardt damping.
pub fn gauss_newton(
    r: &dyn Fn(&[Complex64]) -> Vec<Complex64>,
    x0: Vec<Complex64>,
    max_iter: usize,
    tol: f64,
) -> GaussNewton {
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut x = x0;
    let mut res = r(&x);
    let mut rn = norm(&res);
    let mut mu = 1e-3;
    let mut iterations = 0;
    let jac = |x: &[Complex64]| -> DMatrix<Complex64> {
        let n = x.len();
        let m = res_len(r, x);
        let mut j = DMatrix::zeros(m, n);
        for k in 0..n {
            let h = 1e-6 * (1.0 + x[k].norm());
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[k] += h;
            xm[k] -= h;
            let rp = r(&xp);
            let rm = r(&xm);
            for i in 0..m {
                j[(i, k)] = (rp[i] - rm[i]) / (2.0 * h);
            }
        }
        j
    };
    while iterations < max_iter && rn > tol && !x.is_empty() {
        iterations += 1;
        let j = jac(&x);
        let n = x.len();
        let jh = j.adjoint();
        let jtj = &jh * &j;
        let g = &jh * DVector::from_column_slice(&res);
        let mut improved = false;
        for _ in 0..12 {
            let scale = (0..n).map(|k| jtj[(k, k)].re).fold(0.0, f64::max).max(1e-300);
            let mut a = jtj.clone();
            for k in 0..n {
                a[(k, k)] += Complex64::new(mu * scale, 0.0);
            }
            let step = match a.clone().lu().solve(&(-&g)) {
                Some(s) => s,
                None => {
                    mu *= 10.0;
                    continue;
                }
            };
            let xn: Vec<Complex64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let rnew = r(&xn);
            let nn = norm(&rnew);
            if nn < rn {
                x = xn;
                res = rnew;
                let gain = rn - nn;
                rn = nn;
                mu = (mu * 0.2).max(1e-15);
                improved = gain > 0.0;
                break;
            }
            mu *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let jacobian_singular_values = if x.is_empty() { vec![] } else { singular_values(&jac(&x)) };
    GaussNewton { x, residual: rn, iterations, jacobian_singular_values }
}

fn res_len(r: &dyn Fn(&[Complex64]) -> Vec<Complex64>, x: &[Complex64]) -> usize {
    r(x).len()
}
