//! Fiber recovery: power sums separated from the polynomials contributed by the points
//! at infinity, Newton–Girard, polynomial roots, branch tracking and point clouds.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::{DMatrix, DVector};

use crate::boundary::BoundaryDataset;
use crate::error::{Error, Result};
use crate::linalg::{condition_number, gauss_newton, to_matrix};
use crate::moments::{cluster_nodes, Kernel, MomentTable};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Relative residual below which a fiber size `p` is accepted.
pub const P_TOLERANCE: f64 = 1e-6;
/// Conditioning beyond which a node cluster is rejected.
pub const MAX_CONDITION: f64 = 1e12;
/// Largest estimated quadrature error accepted on a local cluster.
pub const RESOLUTION_TOLERANCE: f64 = 1e-8;
/// Cluster radius as a fraction of the distance from `ξ` to `f₂(γ)`.
pub const CLUSTER_RADIUS: f64 = 0.5;
/// Orders used beyond the minimal `2p + 1`.
pub const EXTRA_ORDERS: usize = 2;
/// Fiber points closer than this fraction of `max |f|` mark a near-discriminant node.
pub const DISCRIMINANT_GAP: f64 = 1e-4;

/// Orders `B` of the moment table used for fiber size `p`.
pub fn orders_for(p: usize) -> usize {
    2 * p + 1 + EXTRA_ORDERS
}

/// `e₁..e_p` from power sums `S₁..S_p`.
pub fn newton_girard(s: &[Complex64]) -> Vec<Complex64> {
    let p = s.len();
    let mut e = vec![ONE];
    for k in 1..=p {
        let mut acc = ZERO;
        for i in 1..=k {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[k - i] * s[i - 1];
        }
        e.push(acc / k as f64);
    }
    e.remove(0);
    e
}

/// Coefficients `[1, −e₁, e₂, …, (−1)^p e_p]` of `Π(X − r_j)`, highest degree first.
pub fn monic_from_elementary(e: &[Complex64]) -> Vec<Complex64> {
    std::iter::once(ONE).chain(e.iter().enumerate().map(|(k, &v)| if k % 2 == 0 { -v } else { v })).collect()
}

pub fn power_sums(roots: &[Complex64], count: usize) -> Vec<Complex64> {
    (1..=count).map(|m| roots.iter().map(|r| r.powu(m as u32)).sum()).collect()
}

/// Power sums `S_{p+1}..S_{count}` implied by `S₁..S_p` through Newton's identities.
fn extend_power_sums(s: &[Complex64], count: usize) -> Vec<Complex64> {
    let p = s.len();
    let e = newton_girard(s);
    let mut all = s.to_vec();
    for m in p + 1..=count {
        let mut acc = ZERO;
        for i in 1..=p {
            let sign = if i % 2 == 1 { 1.0 } else { -1.0 };
            acc += sign * e[i - 1] * all[m - i - 1];
        }
        all.push(acc);
    }
    all
}

fn horner(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut v = ZERO;
    let mut d = ZERO;
    for &c in coeffs {
        d = d * z + v;
        v = v * z + c;
    }
    (v, d)
}

#[derive(Clone, Debug)]
pub struct Roots {
    pub roots: Vec<Complex64>,
    /// `max |poly(root)|`.
    pub residual: f64,
    pub iterations: usize,
}

pub const ROOT_ITERATION_CAP: usize = 2000;

/// All roots of a monic polynomial (highest degree first) by Aberth–Ehrlich
/// simultaneous iteration, polished with Newton steps.
pub fn roots_monic(coeffs: &[Complex64]) -> Result<Roots> {
    if coeffs.len() < 2 {
        return Err(Error::Invalid("polynomial of degree < 1".into()));
    }
    let lead = coeffs[0];
    if lead.norm() == 0.0 {
        return Err(Error::Invalid("leading coefficient is zero".into()));
    }
    let c: Vec<Complex64> = coeffs.iter().map(|&a| a / lead).collect();
    let p = c.len() - 1;
    if p == 1 {
        return Ok(Roots { roots: vec![-c[1]], residual: 0.0, iterations: 0 });
    }
    let radius = (1..=p).map(|k| c[k].norm().powf(1.0 / k as f64)).fold(0.0, f64::max).max(1e-3) * 1.5;
    let mut z: Vec<Complex64> =
        (0..p).map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / p as f64)).collect();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < ROOT_ITERATION_CAP {
        iterations += 1;
        let mut biggest: f64 = 0.0;
        for k in 0..p {
            let (v, d) = horner(&c, z[k]);
            if v.norm() == 0.0 {
                continue;
            }
            let ratio = v / d;
            let sum: Complex64 = (0..p).filter(|&j| j != k).map(|j| ONE / (z[k] - z[j])).sum();
            let w = ratio / (ONE - ratio * sum);
            if w.is_finite() {
                z[k] -= w;
                biggest = biggest.max(w.norm() / (1.0 + z[k].norm()));
            }
        }
        if biggest < 1e-15 {
            converged = true;
            break;
        }
    }
    for _ in 0..3 {
        for r in z.iter_mut() {
            let (v, d) = horner(&c, *r);
            if d.norm() > 0.0 {
                let step = v / d;
                let cand = *r - step;
                if horner(&c, cand).0.norm() < v.norm() {
                    *r = cand;
                }
            }
        }
    }
    let residual = z.iter().map(|&r| horner(&c, r).0.norm()).fold(0.0, f64::max);
    let scale: f64 = z.iter().map(|r| 1.0 + r.norm()).fold(1.0, f64::max).powi(p as i32);
    if !converged && residual > 1e-8 * scale {
        return Err(Error::RootFailure { iterations, residual });
    }
    Ok(Roots { roots: z, residual, iterations })
}

/// Lexicographic order on `(re, im)`, used for unlabeled root sets.
pub fn sort_lex(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Outcome of splitting moments into power sums and infinity polynomials.
#[derive(Clone, Debug)]
pub struct Separation {
    pub p: usize,
    /// `C₀ = p − q`.
    pub index: i64,
    /// `S_m` at every node, `s[m][ν]`, `m = 0..B`.
    pub s: Vec<Vec<Complex64>>,
    /// `P_m` coefficients in powers of `ξ`, degree ≤ m.
    pub infinity_polys: Vec<Vec<Complex64>>,
    /// Weighted residual relative to the size of the moments.
    pub residual: f64,
    /// Conditioning of the node Vandermonde matrix.
    pub vandermonde_condition: f64,
    /// Conditioning of the fit at the solution (1 when no polynomial unknowns).
    pub fit_condition: f64,
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Coefficients in `ξ` of `Σ a_k ((ξ − c)/ρ)^k`.
pub(crate) fn local_to_global(a: &[Complex64], c: Complex64, rho: f64) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len()];
    for (k, &ak) in a.iter().enumerate() {
        let scaled = ak / rho.powi(k as i32);
        for j in 0..=k {
            out[j] += scaled * binomial(k, j) * (-c).powu((k - j) as u32);
        }
    }
    out
}

pub(crate) fn eval_poly(c: &[Complex64], x: Complex64) -> Complex64 {
    c.iter().rev().fold(ZERO, |acc, &a| acc * x + a)
}

/// Splits `C_m(ξ_ν) = S_m(ξ_ν) + P_m(ξ_ν)` assuming fiber size `p`.
///
/// `P₀ = C₀ − p` is the constant `−q`. With `q = 0` all `P_m` vanish and the
/// moments must themselves be power sums of `p` numbers. Otherwise the
/// polynomial coefficients are the unknowns of a nonlinear least-squares
/// problem: `S_m = C_m − P_m` for `m ≤ p` determines the fiber at each node and
/// Newton's identities must reproduce `C_m − P_m` for `m > p`.
pub fn separate_power_sums(table: &MomentTable, p: usize) -> Result<Separation> {
    let b = table.orders;
    let a = table.len();
    if b < 2 * p + 1 || a < b {
        return Err(Error::Invalid(format!("table with {a} nodes and {b} orders cannot separate p = {p}")));
    }
    let center = table.xi_nodes.iter().sum::<Complex64>() / a as f64;
    let rho = table.xi_nodes.iter().map(|x| (x - center).norm()).fold(0.0, f64::max).max(1e-300);
    let t: Vec<Complex64> = table.xi_nodes.iter().map(|x| (x - center) / rho).collect();
    let vander = to_matrix(&t.iter().map(|&x| (0..b).map(|k| x.powu(k as u32)).collect()).collect::<Vec<_>>());
    let vandermonde_condition = condition_number(&vander);
    if vandermonde_condition > MAX_CONDITION {
        return Err(Error::IllConditioned(vandermonde_condition));
    }

    let c0 = table.values[0].iter().map(|z| z.re).sum::<f64>() / a as f64;
    let index = c0.round() as i64;
    let spread = table.values[0].iter().map(|z| (z - index as f64).norm()).fold(0.0, f64::max);
    if spread > 0.1 {
        return Err(Error::Invalid(format!("zeroth moment not integer on the cluster (spread {spread:.3e})")));
    }
    let weights: Vec<f64> = (0..b).map(|m| 1.0 / table.f1_scale.max(1.0).powi(m as i32)).collect();
    let wref = &weights;
    let size = (1..b).flat_map(|m| table.values[m].iter().map(move |v| v.norm() * wref[m])).fold(1.0, f64::max);

    let q = p as i64 - index;
    let failed = |residual: f64| Separation {
        p,
        index,
        s: vec![],
        infinity_polys: vec![],
        residual,
        vandermonde_condition,
        fit_condition: f64::INFINITY,
    };
    if q < 0 {
        return Ok(failed(f64::INFINITY));
    }

    // residual at node ν given the P_m values there
    let node_residual = |nu: usize, pm: &dyn Fn(usize) -> Complex64, out: &mut Vec<Complex64>| {
        let s_low: Vec<Complex64> = (1..=p).map(|m| table.values[m][nu] - pm(m)).collect();
        let all = if p == 0 { vec![] } else { extend_power_sums(&s_low, b - 1) };
        for m in p + 1..b {
            let predicted = if p == 0 { ZERO } else { all[m - 1] };
            out.push((table.values[m][nu] - pm(m) - predicted) * weights[m] / size);
        }
    };

    let (coeffs_local, residual, fit_condition) = if q == 0 {
        let mut r = Vec::new();
        for nu in 0..a {
            node_residual(nu, &|_| ZERO, &mut r);
        }
        let res = r.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (vec![vec![]; b], res, 1.0)
    } else {
        // P_m for m > p enter linearly: project them out, leaving P_1..P_p as unknowns.
        let powers = |m: usize| -> DMatrix<Complex64> { DMatrix::from_fn(a, m + 1, |nu, k| t[nu].powu(k as u32)) };
        let fits: Vec<DMatrix<Complex64>> =
            (0..b).map(|m| powers(m).pseudo_inverse(1e-14).unwrap_or_else(|_| DMatrix::zeros(m + 1, a))).collect();
        let offsets: Vec<usize> = (0..=p)
            .scan(0, |acc, m| {
                let o = *acc;
                if m > 0 {
                    *acc += m + 1;
                }
                Some(if m == 0 { 0 } else { o })
            })
            .collect();
        let unknowns = p * (p + 3) / 2;
        // higher-order targets C_m − S_m^pred at each node
        let targets = |x: &[Complex64]| -> Vec<Vec<Complex64>> {
            let mut y = vec![vec![ZERO; a]; b];
            for nu in 0..a {
                let s_low: Vec<Complex64> = (1..=p)
                    .map(|m| table.values[m][nu] - eval_poly(&x[offsets[m]..offsets[m] + m + 1], t[nu]))
                    .collect();
                let all = extend_power_sums(&s_low, b - 1);
                for m in p + 1..b {
                    y[m][nu] = table.values[m][nu] - all[m - 1];
                }
            }
            y
        };
        let residual_fn = |x: &[Complex64]| -> Vec<Complex64> {
            let y = targets(x);
            let mut r = Vec::with_capacity(a * b);
            for m in p + 1..b {
                let v = DVector::from_column_slice(&y[m]);
                let fitted = powers(m) * (&fits[m] * &v);
                r.extend((0..a).map(|nu| (v[nu] - fitted[nu]) * weights[m] / size));
            }
            r
        };
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed ^ p as u64);
        let mut best: Option<crate::linalg::GaussNewton> = None;
        let max_norm = |x: &[Complex64]| residual_fn(x).iter().map(|z| z.norm()).fold(0.0, f64::max);
        for attempt in 0..12 {
            let x0: Vec<Complex64> = (1..=p)
                .flat_map(|m| (0..=m).map(move |k| (m, k)))
                .map(|(m, k)| {
                    if attempt == 0 || k > 0 {
                        ZERO
                    } else {
                        let mag = table.f1_scale.max(1.0).powi(m as i32) * q as f64;
                        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * mag
                    }
                })
                .collect();
            debug_assert_eq!(x0.len(), unknowns);
            let out = gauss_newton(&residual_fn, x0, 100, 1e-15);
            if best.as_ref().is_none_or(|b| out.residual < b.residual) {
                best = Some(out);
            }
            if max_norm(&best.as_ref().unwrap().x) < P_TOLERANCE * 1e-3 {
                break;
            }
        }
        let best = best.unwrap();
        let res = max_norm(&best.x);
        let sv = &best.jacobian_singular_values;
        let cond = match (sv.first(), sv.last()) {
            (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
            (Some(_), Some(_)) => f64::INFINITY,
            _ => 1.0,
        };
        let y = targets(&best.x);
        let mut coeffs = vec![vec![]; b];
        for m in 1..b {
            coeffs[m] = if m <= p {
                best.x[offsets[m]..offsets[m] + m + 1].to_vec()
            } else {
                (&fits[m] * DVector::from_column_slice(&y[m])).iter().copied().collect()
            };
        }
        (coeffs, res, cond)
    };

    let mut infinity_polys = vec![vec![Complex64::new(-(q as f64), 0.0)]];
    for coeffs in coeffs_local.iter().take(b).skip(1) {
        let local = if coeffs.is_empty() { vec![ZERO] } else { coeffs.clone() };
        let mut g = local_to_global(&local, center, rho);
        g.resize(g.len().max(1), ZERO);
        infinity_polys.push(g);
    }
    let s = (0..b)
        .map(|m| {
            table
                .xi_nodes
                .iter()
                .enumerate()
                .map(|(nu, &x)| table.values[m][nu] - eval_poly(&infinity_polys[m], x))
                .collect()
        })
        .collect();
    Ok(Separation { p, index, s, infinity_polys, residual, vandermonde_condition, fit_condition })
}

#[derive(Clone, Debug)]
pub struct PEstimate {
    pub p: usize,
    /// Residual for each tried `p`, starting at `max(C₀, 0)`.
    pub residuals: Vec<(usize, f64)>,
    pub separation: Separation,
}

/// Smallest `p ≤ p_max` whose separation residual is below [`P_TOLERANCE`].
pub fn estimate_p(table: &MomentTable, p_max: usize) -> Result<PEstimate> {
    let c0 = table.values[0].iter().map(|z| z.re).sum::<f64>() / table.len().max(1) as f64;
    let start = c0.round().max(0.0) as usize;
    let mut residuals = Vec::new();
    for p in start..=p_max {
        if table.orders < 2 * p + 1 {
            break;
        }
        let sep = separate_power_sums(table, p)?;
        residuals.push((p, sep.residual));
        if sep.residual < P_TOLERANCE {
            return Ok(PEstimate { p, residuals, separation: sep });
        }
    }
    Err(Error::EstimateFailed { p_max, residuals: residuals.into_iter().map(|r| r.1).collect() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Conditioning {
    pub vandermonde: f64,
    pub fit: f64,
    pub separation_residual: f64,
    pub root_residual: f64,
}

/// Fiber `Y_ξ` of the reconstructed curve.
#[derive(Clone, Debug)]
pub struct BranchSet {
    pub p: usize,
    pub q: usize,
    pub xi: Complex64,
    pub points: Vec<Complex64>,
    pub infinity_polys: Vec<Vec<Complex64>>,
    pub condition: Conditioning,
    /// Smallest distance between two fiber points (infinite when `p < 2`).
    pub min_gap: f64,
    /// Cluster nodes (center first) and the fiber over each of them.
    pub nodes: Vec<Complex64>,
    pub node_points: Vec<Vec<Complex64>>,
}

fn min_gap(points: &[Complex64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            g = g.min((points[i] - points[j]).norm());
        }
    }
    g
}

fn fiber_from_separation(table: &MomentTable, sep: Separation) -> Result<BranchSet> {
    let p = sep.p;
    let mut node_points = Vec::with_capacity(table.len());
    let mut root_residual: f64 = 0.0;
    for nu in 0..table.len() {
        if p == 0 {
            node_points.push(vec![]);
            continue;
        }
        let s: Vec<Complex64> = (1..=p).map(|m| sep.s[m][nu]).collect();
        let r = roots_monic(&monic_from_elementary(&newton_girard(&s)))?;
        root_residual = root_residual.max(r.residual);
        node_points.push(r.roots);
    }
    let points = node_points[0].clone();
    Ok(BranchSet {
        p,
        q: (p as i64 - sep.index).max(0) as usize,
        xi: table.xi_nodes[0],
        min_gap: min_gap(&points),
        points,
        infinity_polys: sep.infinity_polys,
        condition: Conditioning {
            vandermonde: sep.vandermonde_condition,
            fit: sep.fit_condition,
            separation_residual: sep.residual,
            root_residual,
        },
        nodes: table.xi_nodes.clone(),
        node_points,
    })
}

/// Moment table on the local cluster around `ξ`.
pub fn local_table(kernel: &Kernel, f1_scale: f64, xi: Complex64, orders: usize) -> Result<MomentTable> {
    let d = kernel.line_distance(-xi, ZERO);
    let radius = CLUSTER_RADIUS * d;
    let nodes = cluster_nodes(xi, radius, 2 * orders, 0.0);
    // the cluster node nearest to f₂(γ) has the slowest quadrature convergence
    let nearest = nodes
        .iter()
        .copied()
        .min_by(|a, b| kernel.line_distance(-a, ZERO).total_cmp(&kernel.line_distance(-b, ZERO)))
        .unwrap();
    let estimate = kernel.moment_resolution(orders, nearest, f1_scale)?;
    if estimate > RESOLUTION_TOLERANCE {
        return Err(Error::Unresolved { xi, estimate });
    }
    MomentTable::with_kernel(kernel, f1_scale, &nodes, orders, "local cluster")
}

pub(crate) fn f1_scale(ds: &BoundaryDataset) -> f64 {
    ds.f1().iter().map(|s| s.sup()).fold(0.0, f64::max)
}

/// Fiber over `ξ` for a known fiber size `p`.
pub fn fiber(ds: &BoundaryDataset, xi: Complex64, p: usize) -> Result<BranchSet> {
    fiber_with_kernel(&Kernel::new(ds), f1_scale(ds), xi, p)
}

pub fn fiber_with_kernel(kernel: &Kernel, f1_scale: f64, xi: Complex64, p: usize) -> Result<BranchSet> {
    let table = local_table(kernel, f1_scale, xi, orders_for(p))?;
    let sep = separate_power_sums(&table, p)?;
    if sep.residual >= P_TOLERANCE {
        return Err(Error::EstimateFailed { p_max: p, residuals: vec![sep.residual] });
    }
    fiber_from_separation(&table, sep)
}

/// Fiber over `ξ` with `p` estimated on the same cluster.
pub fn fiber_auto(kernel: &Kernel, f1_scale: f64, xi: Complex64, p_max: usize) -> Result<(BranchSet, PEstimate)> {
    let table = local_table(kernel, f1_scale, xi, orders_for(p_max))?;
    let est = estimate_p(&table, p_max)?;
    let set = fiber_from_separation(&table, est.separation.clone())?;
    Ok((set, est))
}

/// Fiber of the line `ξ₀ + ξ₁z₁ + z₂ = 0`, computed in the sheared chart.
pub fn line_fiber(ds: &BoundaryDataset, xi0: Complex64, xi1: Complex64, p_max: usize) -> Result<BranchSet> {
    let sheared = ds.sheared(xi1);
    let k = Kernel::new(&sheared);
    Ok(fiber_auto(&k, f1_scale(&sheared), -xi0, p_max)?.0)
}

/// Best and second-best assignment of `next` to `prev` by total distance.
fn assign(prev: &[Complex64], next: &[Complex64]) -> (Vec<usize>, f64, f64) {
    let p = prev.len();
    if p <= 8 {
        let mut perm: Vec<usize> = (0..p).collect();
        let mut best = (perm.clone(), f64::INFINITY);
        let mut second = f64::INFINITY;
        let cost = |perm: &[usize]| -> f64 { (0..p).map(|j| (prev[j] - next[perm[j]]).norm()).sum() };
        // Heap's algorithm
        let mut c = vec![0usize; p];
        let consider = |perm: &[usize], best: &mut (Vec<usize>, f64), second: &mut f64| {
            let v = cost(perm);
            if v < best.1 {
                *second = best.1;
                *best = (perm.to_vec(), v);
            } else if v < *second {
                *second = v;
            }
        };
        consider(&perm, &mut best, &mut second);
        let mut i = 0;
        while i < p {
            if c[i] < i {
                if i % 2 == 0 {
                    perm.swap(0, i);
                } else {
                    perm.swap(c[i], i);
                }
                consider(&perm, &mut best, &mut second);
                c[i] += 1;
                i = 0;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
        (best.0, best.1, second)
    } else {
        let mut used = vec![false; p];
        let mut perm = vec![0; p];
        let mut total = 0.0;
        let mut margin = f64::INFINITY;
        for j in 0..p {
            let mut d: Vec<(f64, usize)> =
                (0..p).filter(|&k| !used[k]).map(|k| ((prev[j] - next[k]).norm(), k)).collect();
            d.sort_by(|a, b| a.0.total_cmp(&b.0));
            perm[j] = d[0].1;
            used[d[0].1] = true;
            total += d[0].0;
            if d.len() > 1 {
                margin = margin.min(d[1].0 - d[0].0);
            }
        }
        (perm, total, total + 2.0 * margin)
    }
}

/// Fibers matched along a polyline in the `ξ`-plane.
#[derive(Clone, Debug)]
pub struct BranchTrack {
    pub path: Vec<Complex64>,
    /// `tracks[j][i]`: branch `j` at path vertex `i`.
    pub tracks: Vec<Vec<Complex64>>,
}

impl BranchTrack {
    /// For a closed path, `perm[j]` is the index of the starting point reached by branch `j`.
    pub fn permutation(&self) -> Vec<usize> {
        let start: Vec<Complex64> = self.tracks.iter().map(|t| t[0]).collect();
        self.tracks
            .iter()
            .map(|t| {
                let end = *t.last().unwrap();
                (0..start.len()).min_by(|&a, &b| (start[a] - end).norm().total_cmp(&(start[b] - end).norm())).unwrap()
            })
            .collect()
    }
}

pub const MAX_HALVINGS: usize = 6;

/// Continues the fiber along `path`, halving steps where matching is ambiguous.
pub fn continue_branches(ds: &BoundaryDataset, path: &[Complex64], p: usize) -> Result<BranchTrack> {
    let kernel = Kernel::new(ds);
    let s1 = f1_scale(ds);
    if path.is_empty() {
        return Ok(BranchTrack { path: vec![], tracks: vec![vec![]; p] });
    }
    let first = fiber_with_kernel(&kernel, s1, path[0], p)?.points;
    let mut track = BranchTrack { path: vec![path[0]], tracks: first.iter().map(|&z| vec![z]).collect() };
    let mut current = first;
    for w in path.windows(2) {
        advance(&kernel, s1, w[0], w[1], p, 0, &mut current, &mut track)?;
    }
    Ok(track)
}

#[allow(clippy::too_many_arguments)]
fn advance(
    kernel: &Kernel,
    s1: f64,
    from: Complex64,
    to: Complex64,
    p: usize,
    depth: usize,
    current: &mut Vec<Complex64>,
    track: &mut BranchTrack,
) -> Result<()> {
    let next = fiber_with_kernel(kernel, s1, to, p)?.points;
    let (perm, best, second) = assign(current, &next);
    let ambiguous = p > 1 && second < 2.0 * best;
    if ambiguous {
        if depth >= MAX_HALVINGS {
            return Err(Error::BranchCollision { xi: to, halvings: depth });
        }
        let mid = (from + to) * 0.5;
        advance(kernel, s1, from, mid, p, depth + 1, current, track)?;
        return advance(kernel, s1, mid, to, p, depth + 1, current, track);
    }
    let matched: Vec<Complex64> = perm.iter().map(|&k| next[k]).collect();
    track.path.push(to);
    for (j, z) in matched.iter().enumerate() {
        track.tracks[j].push(*z);
    }
    *current = matched;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudPoint {
    pub z1: Complex64,
    pub z2: Complex64,
    pub branch: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkippedNode {
    pub xi: Complex64,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct Cloud {
    pub points: Vec<CloudPoint>,
    pub skipped: Vec<SkippedNode>,
    pub fibers: Vec<BranchSet>,
}

/// Union of the fibers over `grid`, labeled by matching each fiber to its nearest
/// already-labeled neighbor, starting from the first recovered node.
pub fn sample_surface(ds: &BoundaryDataset, grid: &[Complex64], p_max: usize) -> Cloud {
    let kernel = Kernel::new(ds);
    let s1 = f1_scale(ds);
    let gap_floor = DISCRIMINANT_GAP * ds.f_scale();
    let results: Vec<std::result::Result<BranchSet, String>> = grid
        .par_iter()
        .map(|&xi| match fiber_auto(&kernel, s1, xi, p_max) {
            Ok((set, _)) if set.min_gap < gap_floor => Err(format!("near discriminant: fiber gap {:.3e}", set.min_gap)),
            Ok((set, _)) => Ok(set),
            Err(e) => Err(e.to_string()),
        })
        .collect();
    let mut cloud = Cloud::default();
    let mut fibers = Vec::new();
    for (xi, r) in grid.iter().zip(results) {
        match r {
            Ok(set) => fibers.push(set),
            Err(reason) => cloud.skipped.push(SkippedNode { xi: *xi, reason }),
        }
    }
    if fibers.is_empty() {
        return cloud;
    }
    // order by distance from the base node, label from the nearest labeled neighbor
    let base = fibers[0].xi;
    let mut order: Vec<usize> = (0..fibers.len()).collect();
    order.sort_by(|&a, &b| (fibers[a].xi - base).norm().total_cmp(&(fibers[b].xi - base).norm()));
    let mut labeled: Vec<usize> = Vec::new();
    for &i in &order {
        let p = fibers[i].p;
        let neighbor = labeled
            .iter()
            .copied()
            .filter(|&j| fibers[j].p == p)
            .min_by(|&a, &b| (fibers[a].xi - fibers[i].xi).norm().total_cmp(&(fibers[b].xi - fibers[i].xi).norm()));
        if let Some(j) = neighbor {
            let (perm, _, _) = assign(&fibers[j].points, &fibers[i].points);
            let reordered: Vec<Complex64> = perm.iter().map(|&k| fibers[i].points[k]).collect();
            fibers[i].points = reordered;
        }
        labeled.push(i);
    }
    for set in &fibers {
        for (branch, &z1) in set.points.iter().enumerate() {
            cloud.points.push(CloudPoint { z1, z2: set.xi, branch });
        }
    }
    cloud.fibers = fibers;
    cloud
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::make_scenario;
    use proptest::prelude::{prop_assert, prop_assume, proptest, ProptestConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn newton_girard_examples() {
        let xi = c(0.3, 0.1);
        let e = newton_girard(&[ZERO, 2.0 * xi]);
        assert!(e[0].norm() < 1e-15 && (e[1] + xi).norm() < 1e-15);
        let e = newton_girard(&[c(3.0, 0.0), c(5.0, 0.0)]);
        assert!((e[0] - c(3.0, 0.0)).norm() < 1e-15 && (e[1] - c(2.0, 0.0)).norm() < 1e-15);
        let mut r = roots_monic(&monic_from_elementary(&e)).unwrap().roots;
        sort_lex(&mut r);
        assert!((r[0] - c(1.0, 0.0)).norm() < 1e-12 && (r[1] - c(2.0, 0.0)).norm() < 1e-12);
        assert_eq!(newton_girard(&[c(0.7, 0.2)]), vec![c(0.7, 0.2)]);
    }

    #[test]
    fn roots_examples() {
        let mut r = roots_monic(&[ONE, ZERO, c(-0.09, 0.0)]).unwrap().roots;
        sort_lex(&mut r);
        assert!((r[0] - c(-0.3, 0.0)).norm() < 1e-14 && (r[1] - c(0.3, 0.0)).norm() < 1e-14);
        let mut r = roots_monic(&[ONE, c(-3.0, 0.0), c(2.0, 0.0)]).unwrap().roots;
        sort_lex(&mut r);
        assert!((r[0] - ONE).norm() < 1e-14 && (r[1] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn roots_of_degree_six() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut roots: Vec<Complex64> = (0..6).map(|_| c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0))).collect();
        let e = newton_girard(&power_sums(&roots, 6));
        let mut got = roots_monic(&monic_from_elementary(&e)).unwrap().roots;
        sort_lex(&mut roots);
        sort_lex(&mut got);
        for (a, b) in roots.iter().zip(&got) {
            assert!((a - b).norm() < 1e-8);
        }
    }

    #[test]
    fn double_root_is_found() {
        let r = roots_monic(&[ONE, c(-2.0, 0.0), ONE]).unwrap();
        assert!(r.roots.iter().all(|z| (z - ONE).norm() < 1e-6));
    }

    #[test]
    fn disk_fiber() {
        let (_, ds, _) = make_scenario("disk-z-z2", 256).unwrap();
        let set = fiber(&ds, c(0.09, 0.0), 2).unwrap();
        let mut pts = set.points.clone();
        sort_lex(&mut pts);
        assert!((pts[0] - c(-0.3, 0.0)).norm() < 1e-10 && (pts[1] - c(0.3, 0.0)).norm() < 1e-10);
        assert!(set.infinity_polys.iter().flatten().all(|z| z.norm() < 1e-6));
    }

    #[test]
    fn disk_separation_values() {
        let (_, ds, _) = make_scenario("disk-z-z2", 256).unwrap();
        let k = Kernel::new(&ds);
        let xi = c(0.3, 0.0);
        let table = local_table(&k, 1.0, xi, orders_for(2)).unwrap();
        let sep = separate_power_sums(&table, 2).unwrap();
        for (nu, x) in table.xi_nodes.iter().enumerate() {
            assert!(sep.s[1][nu].norm() < 1e-12);
            assert!((sep.s[2][nu] - 2.0 * x).norm() < 1e-12);
        }
    }

    #[test]
    fn pole_fiber_and_infinity_polys() {
        let (_, ds, _) = make_scenario("disk-pole", 256).unwrap();
        let k = Kernel::new(&ds);
        let table = local_table(&k, 1.0, c(4.0, 0.0), orders_for(1)).unwrap();
        let sep = separate_power_sums(&table, 1).unwrap();
        assert!(sep.residual < 1e-9, "{}", sep.residual);
        assert!((sep.infinity_polys[0][0] + 1.0).norm() < 1e-12);
        assert!((sep.infinity_polys[1][0] + 0.5).norm() < 1e-6 && sep.infinity_polys[1][1].norm() < 1e-6);
        for (nu, x) in table.xi_nodes.iter().enumerate() {
            assert!((sep.s[1][nu] - (0.5 + 1.0 / x)).norm() < 1e-7);
        }
        let set = fiber(&ds, c(4.0, 0.0), 1).unwrap();
        assert!((set.points[0] - c(0.75, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn zero_table_gives_empty_fiber() {
        let nodes = cluster_nodes(c(5.0, 0.0), 0.1, 6, 0.0);
        let table = MomentTable {
            xi_nodes: nodes.clone(),
            orders: 3,
            values: vec![vec![ZERO; nodes.len()]; 3],
            min_distance: vec![1.0; nodes.len()],
            f1_scale: 1.0,
            provenance: "zeros".into(),
        };
        let sep = separate_power_sums(&table, 0).unwrap();
        assert_eq!(sep.residual, 0.0);
        assert!(sep.infinity_polys.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn p_estimates() {
        let cases = [
            ("disk-z-z2", c(0.3, 0.1), 2),
            ("identity", c(0.2, 0.0), 1),
            ("disk-z-z2", c(2.0, 1.0), 0),
            ("disk-pole", c(4.0, 0.0), 1),
        ];
        for (name, xi, expect) in cases {
            let (_, ds, gt) = make_scenario(name, 256).unwrap();
            let k = Kernel::new(&ds);
            let (set, est) = fiber_auto(&k, 1.0, xi, 3).unwrap();
            assert_eq!(est.p, expect, "{name}");
            assert_eq!(set.p, gt.fiber(xi).len());
        }
    }

    #[test]
    fn identity_track_follows_path() {
        let (_, ds, _) = make_scenario("identity", 256).unwrap();
        let path: Vec<Complex64> = (0..10).map(|k| c(0.1 + 0.03 * k as f64, 0.05)).collect();
        let t = continue_branches(&ds, &path, 1).unwrap();
        for (a, b) in t.tracks[0].iter().zip(&path) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    #[test]
    fn square_root_monodromy() {
        let (_, ds, _) = make_scenario("disk-z-z2", 256).unwrap();
        let around: Vec<Complex64> =
            (0..=64).map(|k| Complex64::from_polar(0.25, 2.0 * std::f64::consts::PI * k as f64 / 64.0)).collect();
        assert_eq!(continue_branches(&ds, &around, 2).unwrap().permutation(), vec![1, 0]);
        let beside: Vec<Complex64> = (0..=64)
            .map(|k| c(0.5, 0.0) + Complex64::from_polar(0.2, 2.0 * std::f64::consts::PI * k as f64 / 64.0))
            .collect();
        assert_eq!(continue_branches(&ds, &beside, 2).unwrap().permutation(), vec![0, 1]);
    }

    #[test]
    fn path_and_reverse_compose_to_identity() {
        let (_, ds, _) = make_scenario("disk-z-z2", 256).unwrap();
        let mut path: Vec<Complex64> =
            (0..=32).map(|k| Complex64::from_polar(0.3, std::f64::consts::PI * k as f64 / 32.0)).collect();
        let back: Vec<Complex64> = path.iter().rev().skip(1).copied().collect();
        path.extend(back);
        assert_eq!(continue_branches(&ds, &path, 2).unwrap().permutation(), vec![0, 1]);
    }

    #[test]
    fn clouds() {
        let (_, ds, _) = make_scenario("disk-pole", 256).unwrap();
        let grid: Vec<Complex64> = (0..12).map(|k| Complex64::from_polar(3.0, 0.3 + k as f64 * 0.5)).collect();
        let cloud = sample_surface(&ds, &grid, 2);
        assert_eq!(cloud.points.len(), 12, "{:?}", cloud.skipped);
        for pt in &cloud.points {
            assert!((pt.z2 - 1.0 / (pt.z1 - 0.5)).norm() < 1e-7);
        }
        assert!(sample_surface(&ds, &[], 2).points.is_empty());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn newton_girard_round_trip(seed in 0u64..10_000, p in 1usize..=8) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut roots: Vec<Complex64> = (0..p).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            prop_assume!(min_gap(&roots) > 1e-2);
            let e = newton_girard(&power_sums(&roots, p));
            let mut got = roots_monic(&monic_from_elementary(&e)).unwrap().roots;
            sort_lex(&mut roots);
            sort_lex(&mut got);
            for (a, b) in roots.iter().zip(&got) {
                prop_assert!((a - b).norm() < 1e-8);
            }
        }
    }
}
