//! Shock-wave functions `h_y = h_x h`, their symmetric functions, the operators
//! `D_H u = u_y − H_x u` and `L_H u = ∫₀^x D_H u`, multivaluate shock waves with a
//! prescribed trace, the characterization of `G` up to an `x`-affine term, and the
//! elementary-fraction decomposition of `x`-affine shock-wave sums.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryDataset;
use crate::branches::{roots_monic, sort_lex};
use crate::error::{Error, Result};
use crate::linalg::gauss_newton;
use crate::moments::Kernel;
use crate::series::{BivariateSeries, UnivariateSeries};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub const DEFAULT_ORDER: usize = 12;
/// Relative residual accepted for the trace equation.
pub const SHOCK_TOLERANCE: f64 = 1e-8;
/// A discriminant coefficient above this fraction of its natural scale proves `Discr ≢ 0`.
pub const DISCRIMINANT_FLOOR: f64 = 1e-8;

/// `h_y − h_x h`.
pub fn shock_residual(h: &BivariateSeries) -> BivariateSeries {
    &h.dy() - &(&h.dx() * h)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridResidual {
    /// Residual at interior nodes, `values[i][j]` for `(x₀ + i·step, y₀ + j·step)`, `1 ≤ i, j ≤ n − 2`.
    pub values: Vec<Vec<Complex64>>,
    pub max: f64,
    pub step: f64,
}

/// `h_y − h_x h` by centered differences on a square grid `h[i][j] = h(x₀ + i·step, y₀ + j·step)`.
pub fn shock_residual_grid(h: &[Vec<Complex64>], step: f64) -> Result<GridResidual> {
    let n = h.len();
    if n < 3 || h.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidGrid("shock residual needs a square grid of side ≥ 3".into()));
    }
    let mut values = Vec::with_capacity(n - 2);
    let mut max: f64 = 0.0;
    for i in 1..n - 1 {
        let mut row = Vec::with_capacity(n - 2);
        for j in 1..n - 1 {
            let hx = (h[i + 1][j] - h[i - 1][j]) / (2.0 * step);
            let hy = (h[i][j + 1] - h[i][j - 1]) / (2.0 * step);
            let r = hy - hx * h[i][j];
            max = max.max(r.norm());
            row.push(r);
        }
        values.push(row);
    }
    Ok(GridResidual { values, max, step })
}

/// Residuals `σ_pσ_{1,x} + σ_{p,y}` and `σ_kσ_{1,x} + σ_{k,y} − σ_{k+1,x}` (`k < p`), in that order.
pub fn symmetric_system_residual(sigma: &[BivariateSeries]) -> Vec<BivariateSeries> {
    let p = sigma.len();
    if p == 0 {
        return vec![];
    }
    let s1x = sigma[0].dx();
    let mut out = vec![&(&sigma[p - 1] * &s1x) + &sigma[p - 1].dy()];
    for k in 0..p - 1 {
        out.push(&(&(&sigma[k] * &s1x) + &sigma[k].dy()) - &sigma[k + 1].dx());
    }
    out
}

/// `D_H u = u_y − H_x u`.
pub fn op_d(h: &BivariateSeries, u: &BivariateSeries) -> BivariateSeries {
    &u.dy() - &(&h.dx() * u)
}

/// `D_H u` in the form `e^{A} ∂_y(u e^{−A})`, `A = ∫₀^y H_x`.
pub fn op_d_exponential(h: &BivariateSeries, u: &BivariateSeries) -> BivariateSeries {
    let a = h.dx().int_y();
    let e_minus = (-&a).exp();
    let e_plus = a.exp();
    &e_plus * &(u * &e_minus).dy()
}

/// `L_H u`: the `x`-antiderivative of `D_H u` vanishing on `x = 0`.
pub fn op_l(h: &BivariateSeries, u: &BivariateSeries) -> BivariateSeries {
    op_d(h, u).int_x()
}

/// Power sums `P₀..P_count` of the roots of `X^p + Σ s_k X^{p−k}`.
pub fn power_sums_of(s: &[BivariateSeries], count: usize) -> Vec<BivariateSeries> {
    let p = s.len();
    let order = s.first().map_or(0, |x| x.order());
    let mut out = vec![BivariateSeries::constant(order, Complex64::new(p as f64, 0.0))];
    for m in 1..=count {
        let mut acc = if m <= p { s[m - 1].scale(Complex64::new(m as f64, 0.0)) } else { BivariateSeries::zero(order) };
        for i in 1..=p.min(m - 1) {
            acc = &acc + &(&s[i - 1] * &out[m - i]);
        }
        if m > p {
            // s_i for i ≤ p only
        }
        out.push(-&acc);
    }
    out
}

fn det(m: &[Vec<BivariateSeries>]) -> BivariateSeries {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let order = m[0][0].order();
    let mut total = BivariateSeries::zero(order);
    for col in 0..n {
        let minor: Vec<Vec<BivariateSeries>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(c, _)| c != col).map(|(_, v)| v.clone()).collect())
            .collect();
        let term = &m[0][col] * &det(&minor);
        total = if col % 2 == 0 { &total + &term } else { &total - &term };
    }
    total
}

/// `Π_{i<j}(r_i − r_j)²` as the Hankel determinant of the power sums.
pub fn discriminant(s: &[BivariateSeries]) -> BivariateSeries {
    let p = s.len();
    if p == 0 {
        return BivariateSeries::constant(0, ONE);
    }
    let order = s[0].order();
    if p == 1 {
        return BivariateSeries::constant(order, ONE).with_valid(s[0].valid());
    }
    let ps = power_sums_of(s, 2 * p - 2);
    let hankel: Vec<Vec<BivariateSeries>> = (0..p).map(|i| (0..p).map(|j| ps[i + j].clone()).collect()).collect();
    det(&hankel)
}

/// Natural size of the discriminant: `(max_k ‖s_k‖^{1/k})^{p(p−1)}`, at least 1.
fn discriminant_scale(s: &[BivariateSeries]) -> f64 {
    let p = s.len();
    let root_size = s.iter().enumerate().map(|(k, sk)| sk.max_abs().powf(1.0 / (k + 1) as f64)).fold(1.0, f64::max);
    root_size.powi((p * p.saturating_sub(1)) as i32)
}

pub fn discriminant_nonzero(s: &[BivariateSeries]) -> bool {
    discriminant(s).max_abs() > DISCRIMINANT_FLOOR * discriminant_scale(s)
}

/// Monic `T = X^p + Σ s_k X^{p−k}` whose roots are shock waves with trace `H = −s₁`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ShockPolynomial {
    pub p: usize,
    pub s: Vec<BivariateSeries>,
    /// Relative size of `D_H s_p` up to its valid degree.
    pub residual: f64,
    pub discriminant: BivariateSeries,
}

impl ShockPolynomial {
    /// Roots of `T` at `(x, y)` by evaluating the truncated coefficients.
    pub fn roots_at(&self, x: Complex64, y: Complex64) -> Result<Vec<Complex64>> {
        let mut c = vec![ONE];
        c.extend(self.s.iter().map(|s| s.eval(x, y)));
        let mut r = roots_monic(&c)?.roots;
        sort_lex(&mut r);
        Ok(r)
    }
}

/// `s₁ = −H`, `s_{k+1} = L_H s_k + λ̃_k`.
pub fn symmetric_functions(h: &BivariateSeries, lambdas: &[UnivariateSeries]) -> Vec<BivariateSeries> {
    let order = h.order();
    let mut s = vec![-h];
    for l in lambdas {
        let prev = s.last().unwrap();
        let next = &op_l(h, prev) + &BivariateSeries::from_univariate(order, l);
        s.push(next);
    }
    s
}

fn relative_residual(h: &BivariateSeries, s: &[BivariateSeries]) -> (BivariateSeries, f64) {
    let r = op_d(h, s.last().unwrap());
    let size = r.max_abs() / h.max_abs().max(1.0);
    (r, size)
}

pub fn build_shock_polynomial(h: &BivariateSeries, lambdas: &[UnivariateSeries]) -> Result<ShockPolynomial> {
    let s = symmetric_functions(h, lambdas);
    let p = s.len();
    let (_, residual) = relative_residual(h, &s);
    if residual > SHOCK_TOLERANCE {
        return Err(Error::NotShockTrace { p, residual });
    }
    let disc = discriminant(&s);
    if disc.max_abs() <= DISCRIMINANT_FLOOR * discriminant_scale(&s) {
        return Err(Error::DegenerateDiscriminant);
    }
    Ok(ShockPolynomial { p, s, residual, discriminant: disc })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Attempt {
    pub p: usize,
    pub residual: f64,
    pub discriminant_nonzero: bool,
    /// Jacobian singular values below `1e-8·σ_max`.
    pub nullity: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Characterization {
    /// Smallest `p` passing both tests, if any.
    pub p: Option<usize>,
    pub a: UnivariateSeries,
    pub b: UnivariateSeries,
    pub lambdas: Vec<UnivariateSeries>,
    pub residual: f64,
    /// `max |G − (−s₁ − L)|` over the valid coefficients.
    pub reproduction: f64,
    pub attempts: Vec<Attempt>,
    pub order: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct CharacterizeOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for CharacterizeOptions {
    fn default() -> Self {
        Self { seed: 0, restarts: 6, max_iter: 200 }
    }
}

fn unpack(x: &[Complex64], k: usize, p: usize) -> (UnivariateSeries, UnivariateSeries, Vec<UnivariateSeries>) {
    // a: K coefficients, b: K + 1, each λ: K + 1
    let a = UnivariateSeries::new(x[..k].to_vec());
    let b = UnivariateSeries::new(x[k..2 * k + 1].to_vec());
    let lambdas = (0..p.saturating_sub(1))
        .map(|j| {
            let o = 2 * k + 1 + j * (k + 1);
            UnivariateSeries::new(x[o..o + k + 1].to_vec())
        })
        .collect();
    (a, b, lambdas)
}

/// `x ⊗ a + 1 ⊗ b`.
pub fn affine_series(order: usize, a: &UnivariateSeries, b: &UnivariateSeries) -> BivariateSeries {
    BivariateSeries::from_fn(order, |i, j| match i {
        0 => b.coeff(j),
        1 => a.coeff(j),
        _ => ZERO,
    })
}

/// Searches `p = 1..=p_max` for `a, b, λ₁..λ_{p−1}` such that `H = G + x⊗a + 1⊗b` is the
/// trace of a `p`-multivaluate shock wave, solving the truncated trace equation by damped
/// Gauss–Newton over the unknown coefficients.
pub fn characterize(g: &BivariateSeries, p_max: usize, opts: CharacterizeOptions) -> Result<Characterization> {
    let k = g.order();
    if k < 2 * p_max + 2 {
        return Err(Error::TruncationTooLow { order: k, required: 2 * p_max + 2 });
    }
    let scale = g.max_abs().max(1.0);
    if g.nonaffine_size() <= 1e-10 * scale {
        return Err(Error::AffineInput);
    }
    let mut attempts = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for p in 1..=p_max {
        let n = 2 * k + 1 + (p - 1) * (k + 1);
        let residual_fn = |x: &[Complex64]| -> Vec<Complex64> {
            let (a, b, lambdas) = unpack(x, k, p);
            let h = g + &affine_series(k, &a, &b);
            let s = symmetric_functions(&h, &lambdas);
            let r = op_d(&h, s.last().unwrap());
            let v = r.valid();
            let mut out = Vec::new();
            for i in 0..=v {
                for j in 0..=v - i {
                    out.push(r.get(i, j) / scale);
                }
            }
            out
        };
        let mut best: Option<crate::linalg::GaussNewton> = None;
        for attempt in 0..opts.restarts.max(1) {
            let x0: Vec<Complex64> = (0..n)
                .map(|_| {
                    if attempt == 0 {
                        ZERO
                    } else {
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * 0.5
                    }
                })
                .collect();
            let out = gauss_newton(&residual_fn, x0, opts.max_iter, 1e-15);
            let done = out.residual < SHOCK_TOLERANCE * 1e-2;
            if best.as_ref().is_none_or(|b| out.residual < b.residual) {
                best = Some(out);
            }
            if done {
                break;
            }
        }
        let best = best.unwrap();
        let residual = residual_fn(&best.x).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (a, b, lambdas) = unpack(&best.x, k, p);
        let h = g + &affine_series(k, &a, &b);
        let s = symmetric_functions(&h, &lambdas);
        let disc_ok = discriminant_nonzero(&s);
        let sv = &best.jacobian_singular_values;
        let smax = sv.first().copied().unwrap_or(0.0);
        let nullity = n - sv.iter().filter(|&&v| v > 1e-8 * smax).count();
        attempts.push(Attempt { p, residual, discriminant_nonzero: disc_ok, nullity });
        if residual < SHOCK_TOLERANCE && disc_ok {
            let l = affine_series(k, &a, &b);
            let reproduction = (&(&(-&s[0]) - &l) - g).max_abs();
            return Ok(Characterization { p: Some(p), a, b, lambdas, residual, reproduction, attempts, order: k });
        }
    }
    Ok(Characterization {
        p: None,
        a: UnivariateSeries::zero(k),
        b: UnivariateSeries::zero(k + 1),
        lambdas: vec![],
        residual: attempts.iter().map(|a| a.residual).fold(f64::INFINITY, f64::min),
        reproduction: f64::NAN,
        attempts,
        order: k,
    })
}

/// Coefficients of `G(base₀ + r x̂, base₁ + r ŷ)` in the scaled variables `(x̂, ŷ)`,
/// from an `m × m` torus FFT of `G`.
pub fn g_series(
    ds: &BoundaryDataset,
    base: (Complex64, Complex64),
    radius: f64,
    order: usize,
    m: usize,
) -> Result<BivariateSeries> {
    if m < 2 * order + 2 {
        return Err(Error::InvalidGrid(format!("torus grid {m} too small for order {order}")));
    }
    let kernel = Kernel::new(ds);
    let w = |k: usize| Complex64::from_polar(radius, 2.0 * std::f64::consts::PI * k as f64 / m as f64);
    let mut grid = vec![vec![ZERO; m]; m];
    for (k0, row) in grid.iter_mut().enumerate() {
        for (k1, v) in row.iter_mut().enumerate() {
            *v = kernel.g(base.0 + w(k0), base.1 + w(k1))?;
        }
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(m);
    for row in grid.iter_mut() {
        fft.process(row);
    }
    for col in 0..m {
        let mut c: Vec<Complex64> = grid.iter().map(|r| r[col]).collect();
        fft.process(&mut c);
        for (r, v) in grid.iter_mut().zip(c) {
            r[col] = v;
        }
    }
    let norm = (m * m) as f64;
    Ok(BivariateSeries::from_fn(order, |i, j| grid[i][j] / norm))
}

/// Base point and polydisk radius for the series of `G`: the chart origin when the line
/// `z₂ = 0` stays away from `f(γ)`, otherwise the candidate with the largest `p − q`
/// (ties broken by distance to the origin).
pub fn choose_base(ds: &BoundaryDataset) -> Result<((Complex64, Complex64), f64)> {
    let kernel = Kernel::new(ds);
    let f2: Vec<Complex64> = ds.f2().iter().flat_map(|s| s.values().iter().copied()).collect();
    let centroid = f2.iter().sum::<Complex64>() / f2.len() as f64;
    let spread = f2.iter().map(|z| (z - centroid).norm()).fold(0.0, f64::max).max(1e-3);
    let mut candidates = vec![ZERO];
    for ring in [0.5, 1.5, 2.5] {
        for k in 0..8 {
            let z2 = centroid + Complex64::from_polar(ring * spread, std::f64::consts::PI * k as f64 / 4.0);
            candidates.push(-z2);
        }
    }
    let floor = 0.05 * ds.f_scale();
    let mut best: Option<(i64, f64, Complex64)> = None;
    for xi0 in candidates {
        if kernel.line_distance(xi0, ZERO) < floor {
            continue;
        }
        let index = crate::moments::index_p_minus_q(ds, xi0, ZERO)?.index;
        let better = match best {
            None => true,
            Some((bi, bd, _)) => index > bi || (index == bi && xi0.norm() < bd - 1e-12),
        };
        if better {
            best = Some((index, xi0.norm(), xi0));
        }
    }
    let (_, _, xi0) = best.ok_or_else(|| Error::Invalid("no base point clears the boundary image".into()))?;
    let f1max = ds.f1().iter().map(|s| s.sup()).fold(0.0, f64::max);
    let radius = 0.5 * kernel.line_distance(xi0, ZERO) / (1.0 + f1max);
    Ok(((xi0, ZERO), radius))
}

/// One elementary term `h = q x/(1 − q y) + c/(1 − q y)^ℓ`; `ℓ = 1` is a shock wave,
/// `ℓ ≥ 2` satisfies `h_y − h_x h = (ℓ − 1) κ h_x^{ℓ+1}` with `κ = c/q^ℓ`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ShockTerm {
    pub q: Complex64,
    pub c: Complex64,
    pub ell: usize,
    pub kappa: Complex64,
}

impl ShockTerm {
    pub fn series(&self, order: usize) -> BivariateSeries {
        let inv = (&BivariateSeries::constant(order, ONE) - &BivariateSeries::y(order).scale(self.q))
            .recip()
            .expect("unit constant term");
        let x_part = &BivariateSeries::x(order).scale(self.q) * &inv;
        let c_part = inv.powu(self.ell).scale(self.c);
        &x_part + &c_part
    }

    /// `h_y − h_x h − (ℓ − 1) κ h_x^{ℓ+1}`.
    pub fn generalized_residual(&self, order: usize) -> BivariateSeries {
        let h = self.series(order);
        let hx = h.dx();
        let extra = hx.powu(self.ell + 1).scale(self.kappa * (self.ell as f64 - 1.0));
        &shock_residual(&h) - &extra
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AffineDecomposition {
    /// Coefficients of `Q₀`, `Q₁` in powers of `y`.
    pub q0: Vec<Complex64>,
    pub q1: Vec<Complex64>,
    pub terms: Vec<ShockTerm>,
    /// Constant left after removing the fractions (a shock wave with `q = 0`).
    pub constant: Complex64,
    /// `1 − ∫Q₁` has simple roots.
    pub generic: bool,
    /// Relative size of the coefficients of `Q₀`, `Q₁` beyond the degree cap.
    pub fit_residual: f64,
}

impl AffineDecomposition {
    pub fn series(&self, order: usize) -> BivariateSeries {
        self.terms.iter().fold(BivariateSeries::constant(order, self.constant), |acc, t| &acc + &t.series(order))
    }
}

fn poly_eval(c: &[Complex64], y: Complex64) -> Complex64 {
    c.iter().rev().fold(ZERO, |acc, &v| acc * y + v)
}

/// Taylor coefficients of `c(y₀ + t)`.
fn poly_shift(c: &[Complex64], y0: Complex64) -> Vec<Complex64> {
    let n = c.len();
    let mut out = c.to_vec();
    // repeated synthetic division
    for k in 0..n {
        for j in (k..n - 1).rev() {
            let v = out[j + 1] * y0;
            out[j] += v;
        }
    }
    out
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Recovers `Q₁ = a e^{−A}`, `Q₀ = b e^{−A}` (`A = ∫a`) of degree `< q_cap` and splits
/// `x⊗a + 1⊗b = (xQ₁ + Q₀)/(1 − ∫Q₁)` into elementary fractions.
pub fn affine_decompose(a: &UnivariateSeries, b: &UnivariateSeries, q_cap: usize) -> Result<AffineDecomposition> {
    let n = a.len().min(b.len());
    if n < 2 * q_cap.max(1) {
        return Err(Error::TruncationTooLow { order: n, required: 2 * q_cap.max(1) });
    }
    let a = a.truncated(n);
    let b = b.truncated(n);
    let e_minus = a.integral().truncated(n).scale(-ONE).exp();
    let q1s = a.mul(&e_minus);
    let q0s = b.mul(&e_minus);
    let size = q1s.max_abs().max(q0s.max_abs()).max(1.0);
    let tail = (q_cap..n).map(|k| q1s.coeff(k).norm().max(q0s.coeff(k).norm())).fold(0.0, f64::max);
    let fit_residual = tail / size;
    if fit_residual > SHOCK_TOLERANCE {
        return Err(Error::NotAffineDecomposable(fit_residual));
    }
    let q1: Vec<Complex64> = (0..q_cap).map(|k| q1s.coeff(k)).collect();
    let q0: Vec<Complex64> = (0..q_cap).map(|k| q0s.coeff(k)).collect();

    // D = 1 − ∫Q₁ = Π(1 − q_j y)^{α_j}
    let mut d = vec![ONE];
    d.extend(q1.iter().enumerate().map(|(k, c)| -c / (k + 1) as f64));
    let dscale = d.iter().map(|z| z.norm()).fold(0.0, f64::max);
    while d.len() > 1 && d.last().unwrap().norm() <= 1e-12 * dscale {
        d.pop();
    }
    let deg = d.len() - 1;
    if deg == 0 {
        let q0_scale = q0.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        if q0.iter().skip(1).any(|z| z.norm() > 1e-12 * q0_scale) {
            return Err(Error::NotAffineDecomposable(1.0));
        }
        let constant = q0.first().copied().unwrap_or(ZERO);
        return Ok(AffineDecomposition { q0, q1, terms: vec![], constant, generic: true, fit_residual });
    }
    let monic: Vec<Complex64> = d.iter().rev().map(|c| c / d[deg]).collect();
    let roots = roots_monic(&monic)?.roots;
    // cluster multiple roots
    let rscale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
    let mut clusters: Vec<(Complex64, usize)> = Vec::new();
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let members: Vec<usize> =
            (i..roots.len()).filter(|&j| !used[j] && (roots[j] - roots[i]).norm() < 1e-5 * rscale).collect();
        for &j in &members {
            used[j] = true;
        }
        let center = members.iter().map(|&j| roots[j]).sum::<Complex64>() / members.len() as f64;
        clusters.push((center, members.len()));
    }
    let generic = clusters.iter().all(|&(_, m)| m == 1);

    let mut terms = Vec::new();
    let mut fraction_sum_at_zero = ZERO;
    for (idx, &(yj, alpha)) in clusters.iter().enumerate() {
        let qj = ONE / yj;
        // R = Π_{i≠j}(1 − q_i y)^{α_i}
        let mut r = vec![ONE];
        for (i2, &(yi, ai)) in clusters.iter().enumerate() {
            if i2 != idx {
                for _ in 0..ai {
                    r = poly_mul(&r, &[ONE, -ONE / yi]);
                }
            }
        }
        let num = UnivariateSeries::new(poly_shift(&q0, yj)).truncated(alpha);
        let den = UnivariateSeries::new(poly_shift(&r, yj)).truncated(alpha);
        let g = num.div(&den)?;
        for ell in 1..=alpha {
            let k = alpha - ell;
            // expansion variable u = 1 − q_j y = −q_j (y − y_j)
            let c = g.coeff(k) * (-ONE / qj).powu(k as u32);
            fraction_sum_at_zero += c;
            terms.push(ShockTerm { q: qj, c, ell, kappa: c / qj.powu(ell as u32) });
        }
    }
    let constant = poly_eval(&q0, ZERO) / poly_eval(&d, ZERO) - fraction_sum_at_zero;
    Ok(AffineDecomposition { q0, q1, terms, constant, generic, fit_residual })
}
