//! Restricted DN data: the forms `θu_ℓ`, the embedding `f` and the component probe.

use num_complex::Complex64;

use crate::curve::{check_grid, diameter, ClosedCurve, Orientation, PeriodicSamples};
use crate::error::{Error, Result};

/// Relative floor below which `|λ₀|` counts as a zero.
pub const THETA_ZERO_FLOOR: f64 = 1e-12;
/// Separation floor of the embedding check, relative to the diameter of `f(γ)`.
pub const EMBEDDING_FLOOR: f64 = 1e-6;
/// Dead zone of the component probe, relative to the probe's sup norm.
pub const PROBE_ZERO: f64 = 1e-8;
pub const PROBE_NONZERO: f64 = 1e-7;

/// Data carried by one boundary component.
#[derive(Clone, Debug)]
pub struct ComponentData {
    pub u: [Vec<f64>; 3],
    /// `λ_ℓ` such that the pullback of `θu_ℓ` is `λ_ℓ(t) dt`.
    pub theta: [PeriodicSamples; 3],
    pub f: [PeriodicSamples; 2],
}

#[derive(Clone, Debug)]
pub struct BoundaryDataset {
    pub curve: ClosedCurve,
    pub components: Vec<ComponentData>,
}

/// Pullback coefficient of `θu = (1/2)(Nu − iTu)(ν* + iτ*)`:
/// `λ = (1/2)(du/dt + iσ·|γ'|·Nu)` with `σ` the orientation sign.
pub fn build_theta(u: &[f64], nu: &[f64], jacobian: &[f64], orientation: Orientation) -> Result<PeriodicSamples> {
    let n = u.len();
    check_grid(n)?;
    if nu.len() != n || jacobian.len() != n {
        return Err(Error::InvalidGrid("u, Nu and jacobian lengths differ".into()));
    }
    if let Some(index) = jacobian.iter().position(|&j| j <= 0.0 || !j.is_finite()) {
        return Err(Error::DegenerateParametrization { index });
    }
    let du = PeriodicSamples::from_real(u)?.derivative();
    let s = orientation.sign();
    Ok(PeriodicSamples((0..n).map(|k| Complex64::new(du.0[k].re, s * jacobian[k] * nu[k]) * 0.5).collect()))
}

/// `(λ₁/λ₀, λ₂/λ₀)` on every component, followed by the embedding check.
pub fn build_f(theta: &[[PeriodicSamples; 3]]) -> Result<Vec<[PeriodicSamples; 2]>> {
    let scale = theta.iter().flat_map(|t| t.iter()).map(|s| s.sup()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut out = Vec::with_capacity(theta.len());
    for (c, t) in theta.iter().enumerate() {
        if let Some(index) = t[0].0.iter().position(|z| z.norm() <= THETA_ZERO_FLOOR * scale) {
            return Err(Error::ThetaDivision { component: c, index, modulus: t[0].0[index].norm() });
        }
        out.push([t[1].zip_map(&t[0], |a, b| a / b), t[2].zip_map(&t[0], |a, b| a / b)]);
    }
    check_embedding(&out)?;
    Ok(out)
}

/// Injectivity of `f` on the sample set with a separation floor.
pub fn check_embedding(f: &[[PeriodicSamples; 2]]) -> Result<()> {
    let pts: Vec<((usize, usize), Complex64, Complex64)> = f
        .iter()
        .enumerate()
        .flat_map(|(c, pair)| (0..pair[0].len()).map(move |k| ((c, k), pair[0].0[k], pair[1].0[k])))
        .collect();
    let dist = |a: &(Complex64, Complex64), b: &(Complex64, Complex64)| {
        ((a.0 - b.0).norm_sqr() + (a.1 - b.1).norm_sqr()).sqrt()
    };
    let mut diam: f64 = 0.0;
    let mut best = (f64::INFINITY, (0, 0), (0, 0));
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let d = dist(&(pts[i].1, pts[i].2), &(pts[j].1, pts[j].2));
            diam = diam.max(d);
            if d < best.0 {
                best = (d, pts[i].0, pts[j].0);
            }
        }
    }
    if best.0 <= EMBEDDING_FLOOR * diam || diam == 0.0 {
        return Err(Error::NotAnEmbedding { a: best.1, b: best.2, distance: best.0 });
    }
    Ok(())
}

impl BoundaryDataset {
    /// Assembles a dataset and derives `f`, running the embedding check.
    pub fn new(curve: ClosedCurve, u: Vec<[Vec<f64>; 3]>, theta: Vec<[PeriodicSamples; 3]>) -> Result<Self> {
        if u.len() != curve.len() || theta.len() != curve.len() {
            return Err(Error::Invalid("data do not match the curve's component count".into()));
        }
        for (c, comp) in curve.components.iter().enumerate() {
            for l in 0..3 {
                if u[c][l].len() != comp.n || theta[c][l].len() != comp.n {
                    return Err(Error::InvalidGrid(format!(
                        "component {c}, l = {l}: length differs from n = {}",
                        comp.n
                    )));
                }
            }
        }
        let f = build_f(&theta)?;
        let components = u.into_iter().zip(theta).zip(f).map(|((u, theta), f)| ComponentData { u, theta, f }).collect();
        Ok(Self { curve, components })
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn f1(&self) -> Vec<&PeriodicSamples> {
        self.components.iter().map(|c| &c.f[0]).collect()
    }

    pub fn f2(&self) -> Vec<&PeriodicSamples> {
        self.components.iter().map(|c| &c.f[1]).collect()
    }

    /// `max |f|` over the curve, the scale for relative guards.
    pub fn f_scale(&self) -> f64 {
        self.components.iter().flat_map(|c| c.f.iter()).map(|s| s.sup()).fold(0.0, f64::max).max(1.0)
    }

    pub fn diameter_f(&self) -> f64 {
        let parts: Vec<&PeriodicSamples> = self.components.iter().flat_map(|c| c.f.iter()).collect();
        diameter(&parts)
    }

    /// Same surface seen in the chart where the second coordinate is `z₂ + ξ₁z₁`.
    pub fn sheared(&self, xi1: Complex64) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            c.f[1] = c.f[1].zip_map(&c.f[0], |a, b| a + xi1 * b);
            c.theta[2] = c.theta[2].zip_map(&c.theta[1], |a, b| a + xi1 * b);
            for k in 0..c.u[2].len() {
                // u₂ + ξ₁u₁ stays real only for real ξ₁; keep the real part, θ carries the data
                c.u[2][k] += xi1.re * c.u[1][k];
            }
        }
        out
    }

    pub fn with_reversed_orientation(&self) -> Self {
        Self { curve: self.curve.reversed(), components: self.components.clone() }
    }

    /// Largest violation of `du_ℓ = 2 Re λ_ℓ` and `λ_k = f_k λ₀`.
    pub fn invariant_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for c in &self.components {
            for l in 0..3 {
                let du = PeriodicSamples::from_real(&c.u[l]).map(|s| s.derivative());
                if let Ok(du) = du {
                    for k in 0..du.len() {
                        worst = worst.max((du.0[k].re - 2.0 * c.theta[l].0[k].re).abs());
                    }
                }
            }
            for k in 0..c.theta[0].len() {
                for j in 0..2 {
                    worst = worst.max((c.theta[j + 1].0[k] - c.f[j].0[k] * c.theta[0].0[k]).norm());
                }
            }
        }
        worst
    }
}

/// Query access to the Dirichlet-to-Neumann map of a hidden surface.
pub trait DnOracle: Sync {
    fn curve(&self) -> &ClosedCurve;
    /// `Nv` on every component, with `v` given per component.
    fn apply(&self, v: &[Vec<f64>]) -> Result<Vec<Vec<f64>>>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComponentCount {
    pub count: usize,
    /// Boundary component indices grouped by surface component.
    pub groups: Vec<Vec<usize>>,
}

/// Counts connected components of the surface by probing with functions
/// supported on one boundary component at a time.
pub fn count_components(oracle: &dyn DnOracle) -> Result<ComponentCount> {
    let curve = oracle.curve();
    let m = curve.len();
    let mut group = vec![usize::MAX; m];
    let mut groups = Vec::new();
    for start in 0..m {
        if group[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        let mut members = vec![start];
        group[start] = id;
        let mut frontier = vec![start];
        while let Some(c) = frontier.pop() {
            let probe: Vec<Vec<f64>> = (0..m)
                .map(|k| {
                    let n = curve.components[k].n;
                    if k == c {
                        crate::curve::nodes(n).into_iter().map(f64::cos).collect()
                    } else {
                        vec![0.0; n]
                    }
                })
                .collect();
            let response = oracle.apply(&probe)?;
            for k in 0..m {
                if k == c {
                    continue;
                }
                let sup = response[k].iter().map(|x| x.abs()).fold(0.0, f64::max);
                if sup < PROBE_ZERO {
                    continue;
                }
                if sup <= PROBE_NONZERO {
                    return Err(Error::AmbiguousResponse { component: k, sup });
                }
                if group[k] == usize::MAX {
                    group[k] = id;
                    members.push(k);
                    frontier.push(k);
                }
            }
        }
        members.sort_unstable();
        groups.push(members);
    }
    Ok(ComponentCount { count: groups.len(), groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::nodes;

    const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

    #[test]
    fn zero_data_gives_zero_theta() {
        let z = vec![0.0; 32];
        let one = vec![1.0; 32];
        let t = build_theta(&z, &z, &one, Orientation::Positive).unwrap();
        assert!(t.sup() == 0.0);
    }

    #[test]
    fn disk_real_part_of_z() {
        // Poisson multiplier |n| = 1: Nu = cos t for u = cos t.
        let n = 64;
        let u: Vec<f64> = nodes(n).iter().map(|t| t.cos()).collect();
        let one = vec![1.0; n];
        let lam = build_theta(&u, &u, &one, Orientation::Positive).unwrap();
        for (k, t) in nodes(n).into_iter().enumerate() {
            // pullback of (1/2)dz on z = e^{it}
            let expect = 0.5 * I * (I * t).exp();
            assert!((lam.0[k] - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn disk_real_part_of_z_squared() {
        let n = 64;
        let u: Vec<f64> = nodes(n).iter().map(|t| (2.0 * t).cos()).collect();
        let nu: Vec<f64> = u.iter().map(|x| 2.0 * x).collect();
        let lam = build_theta(&u, &nu, &vec![1.0; n], Orientation::Positive).unwrap();
        for (k, t) in nodes(n).into_iter().enumerate() {
            // ∂(Re z²) = z dz
            let z = (I * t).exp();
            assert!((lam.0[k] - z * I * z).norm() < 1e-12);
        }
    }

    #[test]
    fn jacobian_zero_rejected() {
        let mut j = vec![1.0; 32];
        j[5] = 0.0;
        let z = vec![0.0; 32];
        assert!(matches!(
            build_theta(&z, &z, &j, Orientation::Positive),
            Err(Error::DegenerateParametrization { index: 5 })
        ));
    }

    fn disk_theta(n: usize) -> [PeriodicSamples; 3] {
        let h = |k: i32| {
            PeriodicSamples::from_fn(n, move |t| {
                let z = (I * t).exp();
                0.5 * z.powi(k) * I * z
            })
            .unwrap()
        };
        [h(0), h(1), h(2)]
    }

    #[test]
    fn f_of_disk_scenario() {
        let f = build_f(&[disk_theta(64)]).unwrap();
        for (k, t) in nodes(64).into_iter().enumerate() {
            let z = (I * t).exp();
            assert!((f[0][0].0[k] - z).norm() < 1e-14);
            assert!((f[0][1].0[k] - z * z).norm() < 1e-14);
        }
    }

    #[test]
    fn constant_f_is_not_an_embedding() {
        let t = disk_theta(32);
        let theta = [t[0].clone(), t[0].clone(), t[0].clone()];
        assert!(matches!(build_f(&[theta]), Err(Error::NotAnEmbedding { .. })));
    }

    #[test]
    fn common_factor_cancels() {
        let t = disk_theta(32);
        let phi = PeriodicSamples::from_fn(32, |s| Complex64::new(2.0 + s.cos(), 0.3 * s.sin())).unwrap();
        let scaled = [0, 1, 2].map(|l| t[l].zip_map(&phi, |a, b| a * b));
        let f = build_f(&[t]).unwrap();
        let g = build_f(&[scaled]).unwrap();
        for j in 0..2 {
            for k in 0..32 {
                assert!((f[0][j].0[k] - g[0][j].0[k]).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn zero_theta0_names_index() {
        let mut t = disk_theta(32);
        t[0].0[7] = Complex64::new(0.0, 0.0);
        assert!(matches!(build_f(&[t]), Err(Error::ThetaDivision { component: 0, index: 7, .. })));
    }
}
