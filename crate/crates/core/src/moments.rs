//! Cauchy-type boundary integrals: moments `C_m(ξ)`, the function `G`, the forms `G̃_ℓ`,
//! the index `p − q`, orientation and intersection windings, Harvey–Lawson moments.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;

use crate::boundary::BoundaryDataset;
use crate::curve::{winding_on_curve, ClosedCurve, PeriodicSamples, Winding};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Denominators closer to zero than this fraction of `max |f|` are rejected.
pub const GUARD: f64 = 1e-3;

struct Part {
    /// `σ/(N i)`, turning a plain sum into `(1/2πi)∫` with orientation.
    weight: Complex64,
    f1: Vec<Complex64>,
    f2: Vec<Complex64>,
    df1: Vec<Complex64>,
    df2: Vec<Complex64>,
    theta: [Vec<Complex64>; 3],
}

/// Pre-differentiated boundary data, shared by all Cauchy integrals of one dataset.
pub struct Kernel {
    parts: Vec<Part>,
    scale: f64,
}

impl Kernel {
    pub fn new(ds: &BoundaryDataset) -> Self {
        let parts = ds
            .curve
            .components
            .iter()
            .zip(&ds.components)
            .map(|(comp, c)| Part {
                weight: Complex64::new(comp.orientation.sign() / comp.n as f64, 0.0) / I,
                f1: c.f[0].0.clone(),
                f2: c.f[1].0.clone(),
                df1: c.f[0].derivative().0,
                df2: c.f[1].derivative().0,
                theta: [c.theta[0].0.clone(), c.theta[1].0.clone(), c.theta[2].0.clone()],
            })
            .collect();
        Self { parts, scale: ds.f_scale() }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `max_γ |θ_ℓ|`, the natural size of the form moments.
    pub fn theta_scale(&self, ell: usize) -> f64 {
        self.parts.iter().flat_map(|p| p.theta[ell.min(2)].iter().map(|z| z.norm())).fold(0.0, f64::max)
    }

    /// `min_γ |ξ₀ + ξ₁f₁ + f₂|`.
    pub fn line_distance(&self, xi0: Complex64, xi1: Complex64) -> f64 {
        self.parts
            .iter()
            .flat_map(|p| p.f1.iter().zip(&p.f2).map(move |(a, b)| (xi0 + xi1 * a + b).norm()))
            .fold(f64::INFINITY, f64::min)
    }

    fn guard(&self, xi0: Complex64, xi1: Complex64) -> Result<()> {
        let distance = self.line_distance(xi0, xi1);
        let threshold = GUARD * self.scale;
        if distance < threshold {
            return Err(Error::XiTooClose { xi: -xi0, distance, threshold });
        }
        Ok(())
    }

    /// `C_m(ξ)` for `m = 0..count`.
    pub fn moments(&self, count: usize, xi: Complex64) -> Result<Vec<Complex64>> {
        self.guard(-xi, ZERO)?;
        let mut out = vec![ZERO; count];
        for p in &self.parts {
            let mut acc = vec![ZERO; count];
            for k in 0..p.f1.len() {
                let mut w = p.df2[k] / (p.f2[k] - xi);
                for a in acc.iter_mut() {
                    *a += w;
                    w *= p.f1[k];
                }
            }
            for (o, a) in out.iter_mut().zip(acc) {
                *o += a * p.weight;
            }
        }
        Ok(out)
    }

    /// Quadrature error estimate for `C_m(ξ)`, `m < count`: with `δ` the largest weighted
    /// change when every other sample is dropped, geometric convergence gives `δ²/size`.
    pub fn moment_resolution(&self, count: usize, xi: Complex64, f1_scale: f64) -> Result<f64> {
        self.guard(-xi, ZERO)?;
        let mut full = vec![ZERO; count];
        let mut half = vec![ZERO; count];
        for p in &self.parts {
            for k in 0..p.f1.len() {
                let mut w = p.df2[k] / (p.f2[k] - xi) * p.weight;
                for m in 0..count {
                    full[m] += w;
                    if k % 2 == 0 {
                        half[m] += 2.0 * w;
                    }
                    w *= p.f1[k];
                }
            }
        }
        let weight = |m: usize| 1.0 / f1_scale.max(1.0).powi(m as i32);
        let delta = (0..count).map(|m| (full[m] - half[m]).norm() * weight(m)).fold(0.0, f64::max);
        let size = (0..count).map(|m| full[m].norm() * weight(m)).fold(1.0, f64::max);
        Ok(delta * delta / size)
    }

    /// `(1/2πi)∫ f₁^m θ_ℓ/(f₂ − ξ)` for `m = 0..count`.
    pub fn theta_moments(&self, ell: usize, count: usize, xi: Complex64) -> Result<Vec<Complex64>> {
        check_ell(ell)?;
        self.guard(-xi, ZERO)?;
        let mut out = vec![ZERO; count];
        for p in &self.parts {
            let mut acc = vec![ZERO; count];
            for k in 0..p.f1.len() {
                let mut w = p.theta[ell][k] / (p.f2[k] - xi);
                for a in acc.iter_mut() {
                    *a += w;
                    w *= p.f1[k];
                }
            }
            for (o, a) in out.iter_mut().zip(acc) {
                *o += a * p.weight;
            }
        }
        Ok(out)
    }

    pub fn g(&self, xi0: Complex64, xi1: Complex64) -> Result<Complex64> {
        self.guard(xi0, xi1)?;
        let mut total = ZERO;
        for p in &self.parts {
            let s: Complex64 =
                (0..p.f1.len()).map(|k| p.f1[k] * (xi1 * p.df1[k] + p.df2[k]) / (xi0 + xi1 * p.f1[k] + p.f2[k])).sum();
            total += s * p.weight;
        }
        Ok(total)
    }

    pub fn g_tilde(&self, ell: usize, xi0: Complex64, xi1: Complex64) -> Result<Complex64> {
        check_ell(ell)?;
        self.guard(xi0, xi1)?;
        let mut total = ZERO;
        for p in &self.parts {
            let s: Complex64 = (0..p.f1.len()).map(|k| p.theta[ell][k] / (xi0 + xi1 * p.f1[k] + p.f2[k])).sum();
            total += s * p.weight;
        }
        Ok(total)
    }

    /// Samples of `ξ₀ + ξ₁f₁ + f₂` per component.
    pub fn line_samples(&self, xi0: Complex64, xi1: Complex64) -> Vec<PeriodicSamples> {
        self.parts
            .iter()
            .map(|p| PeriodicSamples(p.f1.iter().zip(&p.f2).map(|(a, b)| xi0 + xi1 * a + b).collect()))
            .collect()
    }
}

fn check_ell(ell: usize) -> Result<()> {
    if ell > 2 {
        return Err(Error::Invalid(format!("form index {ell} (must be 0, 1 or 2)")));
    }
    Ok(())
}

pub fn cauchy_moment(ds: &BoundaryDataset, m: usize, xi: Complex64) -> Result<Complex64> {
    Ok(Kernel::new(ds).moments(m + 1, xi)?[m])
}

pub fn g_function(ds: &BoundaryDataset, xi0: Complex64, xi1: Complex64) -> Result<Complex64> {
    Kernel::new(ds).g(xi0, xi1)
}

pub fn g_tilde(ds: &BoundaryDataset, ell: usize, xi0: Complex64, xi1: Complex64) -> Result<Complex64> {
    Kernel::new(ds).g_tilde(ell, xi0, xi1)
}

/// Winding of `ξ₀ + ξ₁f₁ + f₂` along `γ`: points of `Y` on the line minus points at infinity.
pub fn index_p_minus_q(ds: &BoundaryDataset, xi0: Complex64, xi1: Complex64) -> Result<Winding> {
    let k = Kernel::new(ds);
    k.guard(xi0, xi1)?;
    winding_on_curve(&ds.curve, &k.line_samples(xi0, xi1))
}

/// Polynomial in `(z₁, z₂)` given by its monomials.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BivariatePolynomial {
    pub terms: Vec<(u32, u32, Complex64)>,
}

impl BivariatePolynomial {
    pub fn new(terms: Vec<(u32, u32, Complex64)>) -> Self {
        Self { terms }
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        self.terms.iter().map(|&(i, j, c)| c * z1.powu(i) * z2.powu(j)).sum()
    }
}

/// Winding of `A(f₁, f₂)` along `γ`; nonnegative values are necessary for `γ` to bound.
pub fn orientation_test(ds: &BoundaryDataset, a: &BivariatePolynomial) -> Result<Winding> {
    let samples: Vec<PeriodicSamples> = ds
        .components
        .iter()
        .map(|c| PeriodicSamples(c.f[0].0.iter().zip(&c.f[1].0).map(|(&x, &y)| a.eval(x, y)).collect()))
        .collect();
    let min = samples.iter().map(|s| s.min_modulus()).fold(f64::INFINITY, f64::min);
    let scale = samples.iter().map(|s| s.sup()).fold(0.0, f64::max);
    if min < GUARD * scale {
        return Err(Error::LineTooClose { which: "A", distance: min });
    }
    winding_on_curve(&ds.curve, &samples)
}

/// Projective line `c₀w₀ + c₁w₁ + c₂w₂ = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectiveLine(pub [Complex64; 3]);

impl ProjectiveLine {
    /// `ξ₀ + ξ₁z₁ + z₂ = 0` in the affine chart.
    pub fn affine(xi0: Complex64, xi1: Complex64) -> Self {
        Self([xi0, xi1, Complex64::new(1.0, 0.0)])
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        self.0[0] + self.0[1] * z1 + self.0[2] * z2
    }
}

/// `I_{Δ_ξ} − I_Δ` as the winding of `L_ξ(1,f)/L(1,f)`.
pub fn intersection_shift(ds: &BoundaryDataset, l: &ProjectiveLine, l_xi: &ProjectiveLine) -> Result<Winding> {
    let eval = |line: &ProjectiveLine| -> Vec<PeriodicSamples> {
        ds.components
            .iter()
            .map(|c| PeriodicSamples(c.f[0].0.iter().zip(&c.f[1].0).map(|(&x, &y)| line.eval(x, y)).collect()))
            .collect()
    };
    let den = eval(l);
    let num = eval(l_xi);
    let scale = ds.f_scale() * l.0.iter().chain(l_xi.0.iter()).map(|c| c.norm()).fold(0.0, f64::max);
    for (which, s) in [("L", &den), ("L_xi", &num)] {
        let d = s.iter().map(|p| p.min_modulus()).fold(f64::INFINITY, f64::min);
        if d < GUARD * scale {
            return Err(Error::LineTooClose { which, distance: d });
        }
    }
    let ratio: Vec<PeriodicSamples> = num.iter().zip(&den).map(|(a, b)| a.zip_map(b, |x, y| x / y)).collect();
    winding_on_curve(&ds.curve, &ratio)
}

#[derive(Clone, Debug, PartialEq)]
pub struct AffineMomentReport {
    pub max_modulus: f64,
    pub worst: Vec<usize>,
    pub count: usize,
}

fn multi_indices(vars: usize, max_degree: usize) -> Vec<Vec<usize>> {
    fn rec(vars: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == vars {
            out.push(cur.clone());
            return;
        }
        for k in 0..=left {
            cur.push(k);
            rec(vars, left - k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(vars, max_degree, &mut Vec::new(), &mut out);
    out
}

/// `max |∫_γ h₀^{k₀}⋯h_N^{k_N} dh₀|` over `Σk ≤ max_degree`.
/// `h[j][c]` holds `h_j` on component `c`.
pub fn affine_moment_check(
    curve: &ClosedCurve,
    h: &[Vec<PeriodicSamples>],
    max_degree: usize,
) -> Result<AffineMomentReport> {
    if h.is_empty() {
        return Err(Error::Invalid("no functions given".into()));
    }
    for hj in h {
        if hj.len() != curve.len() {
            return Err(Error::InvalidGrid("function components do not match the curve".into()));
        }
    }
    let dh0: Vec<PeriodicSamples> = h[0].iter().map(|s| s.derivative()).collect();
    let idx = multi_indices(h.len(), max_degree);
    let mut report = AffineMomentReport { max_modulus: 0.0, worst: vec![0; h.len()], count: idx.len() };
    for k in idx {
        let integrand: Vec<PeriodicSamples> = (0..curve.len())
            .map(|c| {
                let mut s = dh0[c].clone();
                for (j, &kj) in k.iter().enumerate() {
                    if kj > 0 {
                        s = s.zip_map(&h[j][c], |a, b| a * b.powu(kj as u32));
                    }
                }
                s
            })
            .collect();
        let v = crate::curve::integrate_closed(curve, &integrand)?.norm();
        if v > report.max_modulus {
            report.max_modulus = v;
            report.worst = k;
        }
    }
    Ok(report)
}

/// Flux `∫_γ (Nu_ℓ) ds = 2 Im ∫_γ θu_ℓ`, which vanishes for genuine DN data.
pub fn primitive_precheck(ds: &BoundaryDataset) -> Result<[f64; 3]> {
    let mut out = [0.0; 3];
    for (l, o) in out.iter_mut().enumerate() {
        let parts: Vec<PeriodicSamples> = ds.components.iter().map(|c| c.theta[l].clone()).collect();
        *o = 2.0 * crate::curve::integrate_closed(&ds.curve, &parts)?.im;
    }
    Ok(out)
}

/// Table of `C_m(ξ_ν)`, `m < orders`.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub xi_nodes: Vec<Complex64>,
    pub orders: usize,
    /// `values[m][ν]`.
    pub values: Vec<Vec<Complex64>>,
    /// Guard distance `min_γ |f₂ − ξ_ν|` per node.
    pub min_distance: Vec<f64>,
    /// `max |f₁|` over the curve, the natural size of `f₁^m`.
    pub f1_scale: f64,
    pub provenance: String,
}

impl MomentTable {
    pub fn compute(ds: &BoundaryDataset, nodes: &[Complex64], orders: usize, provenance: &str) -> Result<Self> {
        let k = Kernel::new(ds);
        let f1_scale = ds.f1().iter().map(|s| s.sup()).fold(0.0, f64::max);
        Self::with_kernel(&k, f1_scale, nodes, orders, provenance)
    }

    pub fn with_kernel(
        k: &Kernel,
        f1_scale: f64,
        nodes: &[Complex64],
        orders: usize,
        provenance: &str,
    ) -> Result<Self> {
        for i in 0..nodes.len() {
            for j in i + 1..nodes.len() {
                if (nodes[i] - nodes[j]).norm() <= 1e-8 {
                    return Err(Error::Invalid(format!("nodes {i} and {j} coincide")));
                }
            }
        }
        let mut values = vec![Vec::with_capacity(nodes.len()); orders];
        let mut min_distance = Vec::with_capacity(nodes.len());
        for &xi in nodes {
            let c = k.moments(orders, xi)?;
            for (m, v) in c.into_iter().enumerate() {
                values[m].push(v);
            }
            min_distance.push(k.line_distance(-xi, ZERO));
        }
        Ok(Self {
            xi_nodes: nodes.to_vec(),
            orders,
            values,
            min_distance,
            f1_scale,
            provenance: provenance.to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.xi_nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi_nodes.is_empty()
    }
}

/// The center followed by `count` points on a circle of the given radius.
pub fn cluster_nodes(center: Complex64, radius: f64, count: usize, offset: f64) -> Vec<Complex64> {
    std::iter::once(center)
        .chain(
            (0..count)
                .map(|k| center + radius * Complex64::from_polar(1.0, offset + 2.0 * PI * k as f64 / count as f64)),
        )
        .collect()
}

/// Concentric rings around `center` with a random angular offset per ring.
pub fn concentric_nodes(center: Complex64, radii: &[f64], per_ring: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(radii.len() * per_ring);
    for &r in radii {
        let offset = rng.gen_range(0.0..2.0 * PI);
        for k in 0..per_ring {
            out.push(center + r * Complex64::from_polar(1.0, offset + 2.0 * PI * k as f64 / per_ring as f64));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::make_scenario;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

    fn disk() -> BoundaryDataset {
        make_scenario("disk-z-z2", 256).unwrap().1
    }

    #[test]
    fn moment_examples() {
        let ds = disk();
        let k = Kernel::new(&ds);
        let m = k.moments(3, c(0.3, 0.0)).unwrap();
        assert!((m[0] - 2.0).norm() < 1e-12 && m[1].norm() < 1e-12 && (m[2] - 0.6).norm() < 1e-12);
        assert!(k.moments(6, c(4.0, 0.0)).unwrap().iter().all(|z| z.norm() < 1e-12));
        let (_, pole, _) = make_scenario("disk-pole", 256).unwrap();
        let m = Kernel::new(&pole).moments(2, c(4.0, 0.0)).unwrap();
        assert!(m[0].norm() < 1e-12 && (m[1] - 0.25).norm() < 1e-12);
        assert!((cauchy_moment(&pole, 1, c(4.0, 0.0)).unwrap() - 0.25).norm() < 1e-12);
    }

    #[test]
    fn guard_rejects_boundary_image() {
        let ds = disk();
        assert!(matches!(cauchy_moment(&ds, 0, c(1.0, 0.0)), Err(Error::XiTooClose { .. })));
        assert!(matches!(g_function(&ds, c(-1.0, 0.0), ZERO), Err(Error::XiTooClose { .. })));
    }

    #[test]
    fn g_examples() {
        let (_, id, _) = make_scenario("identity", 256).unwrap();
        let (x0, x1) = (c(0.1, 0.05), c(0.2, -0.1));
        assert!((g_function(&id, x0, x1).unwrap() + x0 / (1.0 + x1)).norm() < 1e-12);
        let ds = disk();
        let (x0, x1) = (c(0.01, 0.02), c(0.1, 0.05));
        assert!((g_function(&ds, x0, x1).unwrap() + x1).norm() < 1e-12);
        let rev = ds.with_reversed_orientation();
        assert!((g_function(&rev, x0, x1).unwrap() - x1).norm() < 1e-12);
    }

    #[test]
    fn g_tilde_examples() {
        let ds = disk();
        let (x0, x1) = (c(0.01, 0.02), c(0.1, 0.05));
        let disc = (x1 * x1 - 4.0 * x0).sqrt();
        let roots = [(-x1 + disc) / 2.0, (-x1 - disc) / 2.0];
        let expect: Complex64 = roots.iter().map(|h| 0.5 / (x1 + 2.0 * h)).sum();
        assert!((g_tilde(&ds, 0, x0, x1).unwrap() - expect).norm() < 1e-12);

        let kernel = Kernel::new(&ds);
        let direct = kernel.g_tilde(1, x0, x1).unwrap();
        let via: Complex64 = ds
            .components
            .iter()
            .zip(&ds.curve.components)
            .map(|(cd, comp)| {
                let s: Complex64 = (0..comp.n)
                    .map(|k| cd.f[0].0[k] * cd.theta[0].0[k] / (x0 + x1 * cd.f[0].0[k] + cd.f[1].0[k]))
                    .sum();
                s * comp.orientation.sign() / (comp.n as f64 * Complex64::i())
            })
            .sum();
        assert!((direct - via).norm() < 1e-12);
        assert!(g_tilde(&ds, 3, x0, x1).is_err());
    }

    #[test]
    fn index_examples() {
        assert_eq!(index_p_minus_q(&disk(), c(-0.05, 0.01), c(0.02, 0.0)).unwrap().index, 2);
        let (_, pole, _) = make_scenario("disk-pole", 256).unwrap();
        assert_eq!(index_p_minus_q(&pole, c(-4.0, 0.0), ZERO).unwrap().index, 0);
        let (_, id, _) = make_scenario("identity", 256).unwrap();
        assert_eq!(index_p_minus_q(&id, c(0.1, 0.0), c(0.2, 0.0)).unwrap().index, 1);
    }

    #[test]
    fn orientation_examples() {
        let ds = disk();
        let z1 = BivariatePolynomial::new(vec![(1, 0, ONE)]);
        assert_eq!(orientation_test(&ds, &z1).unwrap().index, 1);
        assert_eq!(orientation_test(&ds.with_reversed_orientation(), &z1).unwrap().index, -1);
        let shifted = BivariatePolynomial::new(vec![(1, 0, ONE), (0, 0, c(-3.0, 0.0))]);
        assert_eq!(orientation_test(&ds, &shifted).unwrap().index, 0);
    }

    #[test]
    fn intersection_examples() {
        let ds = disk();
        let l = ProjectiveLine::affine(c(-3.0, 0.0), ZERO);
        let lx = ProjectiveLine::affine(c(-0.25, 0.0), ZERO);
        assert_eq!(intersection_shift(&ds, &l, &lx).unwrap().index, 2);
        assert_eq!(intersection_shift(&ds, &lx, &l).unwrap().index, -2);
        assert_eq!(intersection_shift(&ds, &l, &l).unwrap().index, 0);
        let bad = ProjectiveLine::affine(c(-1.0, 0.0), ZERO);
        assert!(matches!(intersection_shift(&ds, &l, &bad), Err(Error::LineTooClose { which: "L_xi", .. })));
    }

    #[test]
    fn affine_moments() {
        let ds = disk();
        let curve = &ds.curve;
        let h = vec![
            ds.components.iter().map(|c| c.f[0].clone()).collect(),
            ds.components.iter().map(|c| c.f[1].clone()).collect(),
        ];
        assert!(affine_moment_check(curve, &h, 6).unwrap().max_modulus < 1e-10);
        let conj: Vec<PeriodicSamples> = ds.components.iter().map(|c| c.f[0].map(|z| z.conj())).collect();
        let bad = vec![conj, ds.components.iter().map(|c| c.f[0].clone()).collect()];
        let r = affine_moment_check(curve, &bad, 1).unwrap();
        assert!(r.max_modulus > 1.0);
        assert_eq!(r.worst, vec![0, 1]);
        let constant = vec![vec![PeriodicSamples::from_fn(256, |_| c(2.0, 1.0)).unwrap()]];
        assert!(affine_moment_check(curve, &constant, 4).unwrap().max_modulus < 1e-14);
    }

    #[test]
    fn flux_vanishes_for_dn_data() {
        for v in primitive_precheck(&disk()).unwrap() {
            assert!(v.abs() < 1e-10);
        }
    }

    #[test]
    fn tables() {
        let ds = disk();
        let nodes = cluster_nodes(c(0.3, 0.1), 0.05, 6, 0.0);
        let t = MomentTable::compute(&ds, &nodes, 4, "disk").unwrap();
        assert_eq!((t.len(), t.orders), (7, 4));
        assert!(t.min_distance.iter().all(|&d| d > GUARD));
        let twice = [nodes[0], nodes[0]];
        assert!(MomentTable::compute(&ds, &twice, 2, "dup").is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn zeroth_moment_locally_constant(r in 0.05f64..0.8, phase in 0.0f64..6.28) {
            let ds = disk();
            let k = Kernel::new(&ds);
            let loop_pts: Vec<Complex64> = (0..16).map(|j| Complex64::from_polar(r, phase + j as f64 * 0.39)).collect();
            for xi in loop_pts {
                prop_assert!((k.moments(1, xi).unwrap()[0] - 2.0).norm() < 1e-10);
                prop_assert_eq!(index_p_minus_q(&ds, -xi, ZERO).unwrap().index, 2);
            }
        }

        #[test]
        fn g_minus_fiber_sum_is_affine(re in -0.2f64..0.2, im in -0.2f64..0.2) {
            // G − Σ h_j has vanishing second ξ₀-derivative
            let (_, ds, gt) = make_scenario("disk-pole", 256).unwrap();
            let x1 = c(0.3, 0.0);
            let base = c(-4.0 + re, im);
            let h = 1e-2;
            let val = |x0: Complex64| g_function(&ds, x0, x1).unwrap() - gt.line_fiber(x0, x1).iter().sum::<Complex64>();
            let d2 = (val(base + h) - 2.0 * val(base) + val(base - h)) / (h * h);
            prop_assert!(d2.norm() < 1e-5);
        }
    }
}
