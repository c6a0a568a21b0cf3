//! Values of the quotients `∂ũ_ℓ/∂F₂` at fiber points and periods of the forms `Θ_ℓ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::BoundaryDataset;
use crate::branches::{continue_branches, f1_scale, fiber_with_kernel, local_to_global, BranchSet};
use crate::error::{Error, Result};
use crate::linalg::{lstsq, to_matrix};
use crate::moments::Kernel;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Singular values below this fraction of the largest count as rank loss.
pub const FORM_RCOND: f64 = 1e-10;
/// A period is considered zero below this multiple of the loop length.
pub const PERIOD_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FormFiber {
    pub xi: Complex64,
    pub ell: usize,
    /// Aligned with the points of the branch set.
    pub values: Vec<Complex64>,
    /// `Q_m` coefficients in powers of `ξ`.
    pub q_polys: Vec<Vec<Complex64>>,
    /// Weighted residual of the linear fit, relative to the data.
    pub residual: f64,
    pub condition: f64,
}

/// `(1/2πi)∫ f₁^m θ_ℓ/(f₂ − ξ)`.
pub fn theta_moment(ds: &BoundaryDataset, ell: usize, m: usize, xi: Complex64) -> Result<Complex64> {
    Ok(Kernel::new(ds).theta_moments(ell, m + 1, xi)?[m])
}

pub fn recover_form_values(ds: &BoundaryDataset, ell: usize, branch: &BranchSet) -> Result<FormFiber> {
    recover_with_kernel(&Kernel::new(ds), f1_scale(ds), ell, branch)
}

/// Solves `T_m(ξ_ν) = Σ_j h_j(ξ_ν)^m v_{j,ν} + Q_m(ξ_ν)` on the branch set's node cluster.
/// Without points at infinity the `Q_m` vanish and each node decouples.
pub fn recover_with_kernel(kernel: &Kernel, f1_scale: f64, ell: usize, branch: &BranchSet) -> Result<FormFiber> {
    let a = branch.nodes.len();
    let p = branch.p;
    let b = ((a.saturating_sub(1)) / 2).max(p + 1);
    let weights: Vec<f64> = (0..b).map(|m| 1.0 / f1_scale.max(1.0).powi(m as i32)).collect();
    let data: Vec<Vec<Complex64>> =
        branch.nodes.iter().map(|&x| kernel.theta_moments(ell, b, x)).collect::<Result<_>>()?;
    let size = data
        .iter()
        .flat_map(|row| row.iter().enumerate().map(|(m, v)| v.norm() * weights[m]))
        .fold(kernel.theta_scale(ell).max(f64::MIN_POSITIVE), f64::max);

    if branch.q == 0 {
        let mut values = Vec::with_capacity(p);
        let mut residual: f64 = 0.0;
        let mut condition: f64 = 1.0;
        for (nu, row) in data.iter().enumerate() {
            let h = &branch.node_points[nu];
            let mat: Vec<Vec<Complex64>> =
                (0..b).map(|m| h.iter().map(|z| z.powu(m as u32) * weights[m]).collect()).collect();
            let rhs: Vec<Complex64> = (0..b).map(|m| row[m] * weights[m]).collect();
            let sol = lstsq(&to_matrix(&mat), &rhs, FORM_RCOND);
            if sol.rank < p {
                if nu == 0 {
                    return Err(Error::IllPosedFiber { rank: sol.rank, cols: p });
                }
                continue;
            }
            residual = residual.max(sol.residual / size);
            if nu == 0 {
                condition = sol.condition;
                values = sol.x;
            }
        }
        return Ok(FormFiber { xi: branch.xi, ell, values, q_polys: vec![vec![ZERO]; b], residual, condition });
    }

    let center = branch.nodes.iter().sum::<Complex64>() / a as f64;
    let rho = branch.nodes.iter().map(|x| (x - center).norm()).fold(0.0, f64::max).max(1e-300);
    let q_offsets: Vec<usize> = (0..b).map(|m| p * a + m * (m + 1) / 2).collect();
    let cols = p * a + b * (b + 1) / 2;
    let mut rows = Vec::with_capacity(a * b);
    let mut rhs = Vec::with_capacity(a * b);
    for (nu, &x) in branch.nodes.iter().enumerate() {
        let t = (x - center) / rho;
        for m in 0..b {
            let mut row = vec![ZERO; cols];
            for (j, h) in branch.node_points[nu].iter().enumerate() {
                row[nu * p + j] = h.powu(m as u32) * weights[m];
            }
            for k in 0..=m {
                row[q_offsets[m] + k] = t.powu(k as u32) * weights[m];
            }
            rows.push(row);
            rhs.push(data[nu][m] * weights[m]);
        }
    }
    let sol = lstsq(&to_matrix(&rows), &rhs, FORM_RCOND);
    if sol.rank < cols {
        return Err(Error::IllPosedFiber { rank: sol.rank, cols });
    }
    let q_polys = (0..b).map(|m| local_to_global(&sol.x[q_offsets[m]..q_offsets[m] + m + 1], center, rho)).collect();
    Ok(FormFiber {
        xi: branch.xi,
        ell,
        values: sol.x[..p].to_vec(),
        q_polys,
        residual: sol.residual / size,
        condition: sol.condition,
    })
}

/// `∮ Θ_ℓ` along the lift of a closed `ξ`-loop through `branch`: `Θ_ℓ = v dξ` on the
/// lift, integrated with the trapezoid rule over the track.
pub fn period_integral(
    ds: &BoundaryDataset,
    ell: usize,
    path: &[Complex64],
    p: usize,
    branch: usize,
) -> Result<Complex64> {
    if branch >= p {
        return Err(Error::Invalid(format!("branch {branch} out of range for p = {p}")));
    }
    let kernel = Kernel::new(ds);
    let s1 = f1_scale(ds);
    let track = continue_branches(ds, path, p)?;
    let values: Vec<Complex64> = track
        .path
        .iter()
        .zip(&track.tracks[branch])
        .map(|(&xi, &z)| {
            let set = fiber_with_kernel(&kernel, s1, xi, p)?;
            let form = recover_with_kernel(&kernel, s1, ell, &set)?;
            let j = (0..p).min_by(|&a, &b| (set.points[a] - z).norm().total_cmp(&(set.points[b] - z).norm())).unwrap();
            Ok(form.values[j])
        })
        .collect::<Result<_>>()?;
    Ok((1..values.len()).map(|k| (values[k] + values[k - 1]) * 0.5 * (track.path[k] - track.path[k - 1])).sum())
}

/// Real period `Re ∮ Θ_ℓ`; it vanishes when `ũ_ℓ` is single valued.
pub fn period_check(ds: &BoundaryDataset, ell: usize, path: &[Complex64], p: usize, branch: usize) -> Result<f64> {
    Ok(period_integral(ds, ell, path, p, branch)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branches::fiber;
    use crate::oracle::make_scenario;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn circle(center: Complex64, r: f64, turns: usize, steps: usize) -> Vec<Complex64> {
        (0..=steps)
            .map(|k| center + Complex64::from_polar(r, 2.0 * PI * turns as f64 * k as f64 / steps as f64))
            .collect()
    }

    #[test]
    fn theta_moment_examples() {
        let (_, ds, _) = make_scenario("disk-z-z2", 256).unwrap();
        assert!((theta_moment(&ds, 0, 1, c(0.09, 0.0)).unwrap() - 0.5).norm() < 1e-12);
        assert!(theta_moment(&ds, 0, 0, c(0.09, 0.0)).unwrap().norm() < 1e-12);
    }

    #[test]
    fn disk_values() {
        let (_, ds, _) = make_scenario("disk-z-z2", 256).unwrap();
        let set = fiber(&ds, c(0.09, 0.0), 2).unwrap();
        let f0 = recover_form_values(&ds, 0, &set).unwrap();
        let f2 = recover_form_values(&ds, 2, &set).unwrap();
        for (j, h) in set.points.iter().enumerate() {
            assert!((f0.values[j] - 1.0 / (4.0 * h)).norm() < 1e-9);
            assert!((f2.values[j] - h / 4.0).norm() < 1e-9);
        }
        assert!(f0.q_polys.iter().flatten().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn pole_values_with_infinity() {
        let (_, ds, gt) = make_scenario("disk-pole", 256).unwrap();
        let xi = c(4.0, 0.5);
        let set = fiber(&ds, xi, 1).unwrap();
        for ell in 0..3 {
            let form = recover_form_values(&ds, ell, &set).unwrap();
            let expect = gt.form_values(ell, xi)[0];
            assert!(
                (form.values[0] - expect).norm() < 1e-6 * expect.norm().max(1.0),
                "{ell}: {} vs {expect}",
                form.values[0]
            );
        }
    }

    #[test]
    fn disk_period_vanishes() {
        let (_, ds, _) = make_scenario("disk-z-z2", 256).unwrap();
        // twice around the branch point lifts to a closed loop
        let around = circle(c(0.0, 0.0), 0.3, 2, 96);
        let beside = circle(c(0.4, 0.1), 0.2, 1, 48);
        for ell in 0..3 {
            assert!(period_check(&ds, ell, &around, 2, 0).unwrap().abs() < 1e-6);
            assert!(period_check(&ds, ell, &beside, 2, 1).unwrap().abs() < 1e-6);
        }
    }

    #[test]
    fn annulus_core_period() {
        let (_, ds, _) = make_scenario("annulus", 256).unwrap();
        // chord trapezoid: second order in the step
        let loop_pts = circle(c(0.0, 0.0), 0.5625, 2, 512);
        let v = period_integral(&ds, 0, &loop_pts, 2, 0).unwrap();
        assert!(v.re.abs() < 1e-6, "{v}");
        assert!((v.im - PI).abs() < 1e-3, "{v}");
        let back: Vec<Complex64> = loop_pts.iter().rev().copied().collect();
        let w = period_integral(&ds, 0, &back, 2, 0).unwrap();
        assert!((w.im + PI).abs() < 1e-3, "{w}");
    }
}
