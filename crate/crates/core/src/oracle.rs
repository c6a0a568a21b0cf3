//! Synthetic restricted DN data with exact answers, Fourier-multiplier DN maps,
//! and the planar Green-function and jump checks.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::boundary::{BoundaryDataset, DnOracle};
use crate::curve::{nodes, ClosedCurve, CurveComponent, Orientation, PeriodicSamples};
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

pub const SCENARIOS: [&str; 7] =
    ["disk-z-z2", "identity", "disk-pole", "annulus", "exterior-disk", "two-disks", "conformal"];

/// One term of a holomorphic function of the model variable `w`.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    /// `c·(w − center)^k`.
    Power { coef: Complex64, center: Complex64, k: i32 },
    /// `c·log(w − center)` with real `c`, so that `Re` is single valued.
    Log { coef: f64, center: Complex64 },
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Holo(pub Vec<Term>);

impl Holo {
    pub fn power(coef: f64, k: i32) -> Self {
        Self(vec![Term::Power { coef: Complex64::new(coef, 0.0), center: ZERO, k }])
    }

    pub fn plus(mut self, t: Term) -> Self {
        self.0.push(t);
        self
    }

    pub fn eval(&self, w: Complex64) -> Complex64 {
        self.0
            .iter()
            .map(|t| match *t {
                Term::Power { coef, center, k } => coef * (w - center).powi(k),
                Term::Log { coef, center } => coef * (w - center).ln(),
            })
            .sum()
    }

    pub fn derivative(&self) -> Self {
        Self(
            self.0
                .iter()
                .filter_map(|t| match *t {
                    Term::Power { k: 0, .. } => None,
                    Term::Power { coef, center, k } => Some(Term::Power { coef: coef * k as f64, center, k: k - 1 }),
                    Term::Log { coef, center } => Some(Term::Power { coef: Complex64::new(coef, 0.0), center, k: -1 }),
                })
                .collect(),
        )
    }

    /// `Re H(w)`, using `ln|w − c|` for logarithmic terms.
    pub fn real_part(&self, w: Complex64) -> f64 {
        self.0
            .iter()
            .map(|t| match *t {
                Term::Power { coef, center, k } => (coef * (w - center).powi(k)).re,
                Term::Log { coef, center } => coef * (w - center).norm().ln(),
            })
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Domain {
    Disk,
    /// `r < |w| < 1`.
    Annulus {
        inner: f64,
    },
    /// `|w| > 1` together with the point at infinity.
    ExteriorDisk,
    /// Union of the disks `|w − c| < R`.
    TwoDisks {
        disks: [(Complex64, f64); 2],
    },
    /// Image of the unit disk under the polynomial map `Σ a_k w^k`.
    ConformalImage {
        map: Vec<Complex64>,
    },
}

/// How the line `ξ₀ + ξ₁z₁ + z₂ = 0` meets `Y`, in closed form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum LineModel {
    /// `f = (w, w²)`.
    Square,
    /// `f = (w, w)`.
    Identity,
    /// `f = (w, 1/(w − a))`.
    Pole { a: f64 },
    /// `f = (1/w, 1/w²)`.
    InverseSquare,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: String,
    pub domain: Domain,
    pub h: [Holo; 3],
    pub n: usize,
    pub line_model: LineModel,
}

/// Boundary component in model coordinates.
struct Piece {
    orientation: Orientation,
    w: Box<dyn Fn(f64) -> Complex64>,
    dw: Box<dyn Fn(f64) -> Complex64>,
}

impl Scenario {
    fn pieces(&self) -> Vec<Piece> {
        let circle = |c: Complex64, r: f64, o: Orientation| Piece {
            orientation: o,
            w: Box::new(move |t| c + r * (I * t).exp()),
            dw: Box::new(move |t| I * r * (I * t).exp()),
        };
        match &self.domain {
            Domain::Disk | Domain::ConformalImage { .. } => vec![circle(ZERO, 1.0, Orientation::Positive)],
            Domain::Annulus { inner } => {
                vec![circle(ZERO, 1.0, Orientation::Positive), circle(ZERO, *inner, Orientation::Negative)]
            }
            Domain::ExteriorDisk => vec![circle(ZERO, 1.0, Orientation::Negative)],
            Domain::TwoDisks { disks } => disks.iter().map(|&(c, r)| circle(c, r, Orientation::Positive)).collect(),
        }
    }

    /// Planar position of a model point.
    pub fn planar(&self, w: Complex64) -> Complex64 {
        match &self.domain {
            Domain::ConformalImage { map } => map.iter().rev().fold(ZERO, |acc, &a| acc * w + a),
            _ => w,
        }
    }

    fn planar_derivative(&self, w: Complex64) -> Complex64 {
        match &self.domain {
            Domain::ConformalImage { map } => {
                map.iter().enumerate().skip(1).rev().fold(ZERO, |acc, (k, &a)| acc * w + a * k as f64)
            }
            _ => ONE,
        }
    }

    /// Whether the model point lies in the open domain.
    pub fn contains_model(&self, w: Complex64) -> bool {
        match &self.domain {
            Domain::Disk | Domain::ConformalImage { .. } => w.norm() < 1.0,
            Domain::Annulus { inner } => w.norm() < 1.0 && w.norm() > *inner,
            Domain::ExteriorDisk => w.norm() > 1.0,
            Domain::TwoDisks { disks } => disks.iter().any(|&(c, r)| (w - c).norm() < r),
        }
    }

    /// Planar boundary samples `(ζ, dζ/dt)` per component at `n` nodes.
    pub fn boundary(&self, n: usize) -> Vec<(Vec<Complex64>, Vec<Complex64>, Orientation)> {
        let ts = nodes(n);
        self.pieces()
            .into_iter()
            .map(|p| {
                let z = ts.iter().map(|&t| self.planar((p.w)(t))).collect();
                let dz = ts.iter().map(|&t| self.planar_derivative((p.w)(t)) * (p.dw)(t)).collect();
                (z, dz, p.orientation)
            })
            .collect()
    }

    pub fn curve(&self) -> Result<ClosedCurve> {
        ClosedCurve::new(
            self.boundary(self.n)
                .into_iter()
                .map(|(z, _, o)| CurveComponent { n: self.n, orientation: o, points: Some(PeriodicSamples(z)) })
                .collect(),
        )
    }

    /// Exact samples of `u_ℓ = Re H_ℓ` and `λ_ℓ = (1/2)H_ℓ'(w)w'(t)`.
    pub fn dataset(&self) -> Result<BoundaryDataset> {
        let ts = nodes(self.n);
        let dh: Vec<Holo> = self.h.iter().map(|h| h.derivative()).collect();
        let mut u = Vec::new();
        let mut theta = Vec::new();
        for (c, p) in self.pieces().iter().enumerate() {
            let ws: Vec<Complex64> = ts.iter().map(|&t| (p.w)(t)).collect();
            let dws: Vec<Complex64> = ts.iter().map(|&t| (p.dw)(t)).collect();
            if let Some(k) = ws.iter().position(|&w| dh[0].eval(w).norm() < 1e-12) {
                return Err(Error::Scenario(format!("H0' vanishes at component {c}, sample {k}")));
            }
            u.push([0, 1, 2].map(|l| ws.iter().map(|&w| self.h[l].real_part(w)).collect::<Vec<f64>>()));
            theta.push(
                [0, 1, 2]
                    .map(|l| PeriodicSamples(ws.iter().zip(&dws).map(|(&w, &dw)| 0.5 * dh[l].eval(w) * dw).collect())),
            );
        }
        BoundaryDataset::new(self.curve()?, u, theta)
    }

    /// Exact `f(w) = (H₁'/H₀', H₂'/H₀')`.
    pub fn f(&self, w: Complex64) -> (Complex64, Complex64) {
        let d0 = self.h[0].derivative().eval(w);
        (self.h[1].derivative().eval(w) / d0, self.h[2].derivative().eval(w) / d0)
    }

    /// `∂ũ_ℓ/∂F₂ = H_ℓ'/(2 f₂')` at a model point.
    pub fn form_quotient(&self, ell: usize, w: Complex64) -> Complex64 {
        let d0 = self.h[0].derivative();
        let d2 = self.h[2].derivative();
        let (a0, b0) = (d0.eval(w), d0.derivative().eval(w));
        let (a2, b2) = (d2.eval(w), d2.derivative().eval(w));
        let df2 = (b2 * a0 - a2 * b0) / (a0 * a0);
        self.h[ell].derivative().eval(w) / (2.0 * df2)
    }

    pub fn has_dn_oracle(&self) -> bool {
        matches!(self.domain, Domain::Disk | Domain::Annulus { .. } | Domain::TwoDisks { .. })
    }
}

/// Exact inverse quantities of a scenario.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroundTruth {
    pub name: String,
    pub line_model: LineModel,
    pub components: usize,
    /// Number of points of `Y` at infinity in the affine chart (poles of `f₂` inside).
    pub q: usize,
    /// `z₁` coordinates of those points; `L = Σ` of them for these models.
    pub infinity_z1: Vec<Complex64>,
    /// Model-domain description used to filter roots.
    #[serde(skip)]
    scenario: Option<Box<ScenarioRef>>,
}

#[derive(Clone, Debug)]
struct ScenarioRef(Scenario);

impl GroundTruth {
    fn new(s: &Scenario) -> Self {
        let (q, infinity_z1) = match s.line_model {
            LineModel::Pole { a } => (1, vec![Complex64::new(a, 0.0)]),
            _ => (0, vec![]),
        };
        let components = match s.domain {
            Domain::TwoDisks { .. } => 2,
            _ => 1,
        };
        Self {
            name: s.name.clone(),
            line_model: s.line_model,
            components,
            q,
            infinity_z1,
            scenario: Some(Box::new(ScenarioRef(s.clone()))),
        }
    }

    fn scenario(&self) -> &Scenario {
        &self.scenario.as_ref().expect("ground truth built from a scenario").0
    }

    /// Model points `w` where `ξ₀ + ξ₁f₁ + f₂` vanishes inside the domain.
    pub fn line_fiber_model(&self, xi0: Complex64, xi1: Complex64) -> Vec<Complex64> {
        let s = self.scenario();
        let ws: Vec<Complex64> = match self.line_model {
            LineModel::Square => quadratic(ONE, xi1, xi0),
            LineModel::Identity => linear(ONE + xi1, xi0),
            LineModel::Pole { a } => {
                let roots = quadratic(xi1, xi0 - a * xi1, ONE - a * xi0);
                roots.into_iter().filter(|w| (w - a).norm() > 1e-14).collect()
            }
            LineModel::InverseSquare => {
                quadratic(ONE, xi1, xi0).into_iter().filter(|s| s.norm() > 0.0).map(|s| 1.0 / s).collect()
            }
        };
        ws.into_iter().filter(|&w| s.contains_model(w)).collect()
    }

    /// `z₁` values of `Y ∩ {ξ₀ + ξ₁z₁ + z₂ = 0}`.
    pub fn line_fiber(&self, xi0: Complex64, xi1: Complex64) -> Vec<Complex64> {
        let s = self.scenario();
        let mut out: Vec<Complex64> = self.line_fiber_model(xi0, xi1).into_iter().map(|w| s.f(w).0).collect();
        if self.line_model == LineModel::InverseSquare {
            // s = 0 is w = ∞, which lies in the domain and maps to f = (0, 0)
            out.extend(quadratic(ONE, xi1, xi0).into_iter().filter(|r| r.norm() == 0.0).map(|_| ZERO));
        }
        out
    }

    pub fn fiber(&self, xi: Complex64) -> Vec<Complex64> {
        self.line_fiber(-xi, ZERO)
    }

    pub fn index(&self, xi0: Complex64, xi1: Complex64) -> i64 {
        self.line_fiber(xi0, xi1).len() as i64 - self.q as i64
    }

    /// `P_m(ξ)` coefficients in powers of `ξ`.
    pub fn infinity_poly(&self, m: usize) -> Vec<Complex64> {
        let mut c = vec![ZERO; m + 1];
        for &z in &self.infinity_z1 {
            c[0] -= z.powu(m as u32);
        }
        c
    }

    pub fn moment(&self, m: usize, xi: Complex64) -> Complex64 {
        self.fiber(xi).iter().map(|h| h.powu(m as u32)).sum::<Complex64>() + self.infinity_poly(m)[0]
    }

    /// `L`: contribution of the points at infinity to `G = Σh_j − L`.
    pub fn l_value(&self) -> Complex64 {
        self.infinity_z1.iter().sum()
    }

    pub fn g(&self, xi0: Complex64, xi1: Complex64) -> Complex64 {
        self.line_fiber(xi0, xi1).iter().sum::<Complex64>() - self.l_value()
    }

    /// Exact form quotients at the fiber over `ξ`, aligned with `fiber(ξ)`.
    pub fn form_values(&self, ell: usize, xi: Complex64) -> Vec<Complex64> {
        let s = self.scenario();
        self.line_fiber_model(-xi, ZERO).into_iter().map(|w| s.form_quotient(ell, w)).collect()
    }
}

fn linear(a: Complex64, b: Complex64) -> Vec<Complex64> {
    if a.norm() == 0.0 {
        vec![]
    } else {
        vec![-b / a]
    }
}

fn quadratic(a: Complex64, b: Complex64, c: Complex64) -> Vec<Complex64> {
    if a.norm() == 0.0 {
        return linear(b, c);
    }
    let d = (b * b - 4.0 * a * c).sqrt();
    // avoid cancellation
    let q = if (b.conj() * d).re >= 0.0 { -0.5 * (b + d) } else { -0.5 * (b - d) };
    if q.norm() == 0.0 {
        return vec![ZERO, ZERO];
    }
    vec![q / a, c / q]
}

/// Scenario by name, with an optional numeric parameter after a colon
/// (`annulus:0.4`, `disk-pole:0.3`).
pub fn scenario_by_name(spec: &str, n: usize) -> Result<Scenario> {
    let (name, param) = match spec.split_once(':') {
        Some((a, b)) => (a, Some(b.parse::<f64>().map_err(|_| Error::UnknownScenario(spec.to_string()))?)),
        None => (spec, None),
    };
    let cube = || [Holo::power(1.0, 1), Holo::power(0.5, 2), Holo::power(1.0 / 3.0, 3)];
    let c = |x: f64| Complex64::new(x, 0.0);
    let (domain, h, line_model) = match name {
        "disk-z-z2" => (Domain::Disk, cube(), LineModel::Square),
        "identity" => {
            (Domain::Disk, [Holo::power(1.0, 1), Holo::power(0.5, 2), Holo::power(0.5, 2)], LineModel::Identity)
        }
        "disk-pole" => {
            // H₀' = w − a, H₁' = w(w − a), H₂' = 1 gives f = (w, 1/(w − a)).
            let a = param.unwrap_or(0.5);
            if !(a.abs() < 1.0) {
                return Err(Error::Scenario(format!("pole {a} must lie inside the unit disk")));
            }
            let h0 = Holo(vec![Term::Power { coef: c(0.5), center: c(a), k: 2 }]);
            let h1 = Holo::power(1.0 / 3.0, 3).plus(Term::Power { coef: c(-a / 2.0), center: ZERO, k: 2 });
            let h2 = Holo::power(1.0, 1);
            (Domain::Disk, [h0, h1, h2], LineModel::Pole { a })
        }
        "annulus" => {
            let r = param.unwrap_or(0.5);
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::Scenario(format!("inner radius {r} outside (0, 1)")));
            }
            let h0 = Holo(vec![Term::Log { coef: 1.0, center: ZERO }]);
            (Domain::Annulus { inner: r }, [h0, Holo::power(1.0, 1), Holo::power(0.5, 2)], LineModel::Square)
        }
        "exterior-disk" => (
            Domain::ExteriorDisk,
            [Holo::power(1.0, -1), Holo::power(0.5, -2), Holo::power(1.0 / 3.0, -3)],
            LineModel::InverseSquare,
        ),
        "two-disks" => (Domain::TwoDisks { disks: [(c(-2.0), 1.0), (c(3.0), 0.5)] }, cube(), LineModel::Square),
        "conformal" => {
            let b = param.unwrap_or(0.2);
            if !(b.abs() < 0.5) {
                return Err(Error::Scenario(format!("map coefficient {b} breaks univalence")));
            }
            (Domain::ConformalImage { map: vec![ZERO, ONE, c(b)] }, cube(), LineModel::Square)
        }
        _ => return Err(Error::UnknownScenario(spec.to_string())),
    };
    crate::curve::check_grid(n)?;
    Ok(Scenario { name: spec.to_string(), domain, h, n, line_model })
}

/// Scenario, its exact dataset and its ground truth.
pub fn make_scenario(spec: &str, n: usize) -> Result<(Scenario, BoundaryDataset, GroundTruth)> {
    let s = scenario_by_name(spec, n)?;
    let ds = s.dataset()?;
    let gt = GroundTruth::new(&s);
    Ok((s, ds, gt))
}

fn fourier_real(v: &[f64]) -> Vec<Complex64> {
    use rustfft::FftPlanner;
    let n = v.len();
    let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);
    buf.iter_mut().for_each(|z| *z /= n as f64);
    buf
}

fn synth_real(c: Vec<Complex64>) -> Vec<f64> {
    use rustfft::FftPlanner;
    let n = c.len();
    let mut buf = c;
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut buf);
    buf.into_iter().map(|z| z.re).collect()
}

fn mode(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// DN map of the scenario applied to `v` given per boundary component.
pub fn dn_apply(s: &Scenario, v: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let pieces = s.pieces().len();
    if v.len() != pieces {
        return Err(Error::Invalid(format!("{} components given, scenario has {pieces}", v.len())));
    }
    for p in v {
        crate::curve::check_grid(p.len())?;
    }
    match &s.domain {
        Domain::Disk => Ok(vec![disk_dn(&v[0], 1.0)]),
        Domain::TwoDisks { disks } => Ok(vec![disk_dn(&v[0], disks[0].1), disk_dn(&v[1], disks[1].1)]),
        Domain::Annulus { inner } => annulus_dn(&v[0], &v[1], *inner),
        other => Err(Error::NotImplemented(format!("DN map of {other:?}"))),
    }
}

fn disk_dn(v: &[f64], radius: f64) -> Vec<f64> {
    let n = v.len();
    let c: Vec<Complex64> =
        fourier_real(v).into_iter().enumerate().map(|(j, z)| z * (mode(j, n).unsigned_abs() as f64 / radius)).collect();
    synth_real(c)
}

/// Per Fourier mode, the harmonic extension to `r < ρ < 1` is
/// `A ρ^{|k|} + B ρ^{−|k|}` (or `A + B ln ρ` for `k = 0`).
fn annulus_dn(outer: &[f64], inner: &[f64], r: f64) -> Result<Vec<Vec<f64>>> {
    let n = outer.len();
    if inner.len() != n {
        return Err(Error::InvalidGrid("annulus components must share n".into()));
    }
    let co = fourier_real(outer);
    let ci = fourier_real(inner);
    let mut no = vec![ZERO; n];
    let mut ni = vec![ZERO; n];
    for j in 0..n {
        let k = mode(j, n).unsigned_abs() as f64;
        if k == 0.0 {
            let b = (ci[j] - co[j]) / r.ln();
            no[j] = b;
            ni[j] = -b / r;
        } else {
            // A + B = co, A r^k + B r^{-k} = ci
            let rk = r.powf(k);
            let det = 1.0 / rk - rk;
            let a = (co[j] / rk - ci[j]) / det;
            let b = (ci[j] - co[j] * rk) / det;
            no[j] = k * (a - b);
            ni[j] = -k * (a * r.powf(k - 1.0) - b * r.powf(-k - 1.0));
        }
    }
    Ok(vec![synth_real(no), synth_real(ni)])
}

/// Scenario wrapped as a query-only DN oracle.
pub struct ScenarioOracle {
    scenario: Scenario,
    curve: ClosedCurve,
}

impl ScenarioOracle {
    pub fn new(scenario: Scenario) -> Result<Self> {
        if !scenario.has_dn_oracle() {
            return Err(Error::NotImplemented(format!("DN map of {:?}", scenario.domain)));
        }
        let curve = scenario.curve()?;
        Ok(Self { scenario, curve })
    }
}

impl DnOracle for ScenarioOracle {
    fn curve(&self) -> &ClosedCurve {
        &self.curve
    }

    fn apply(&self, v: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        dn_apply(&self.scenario, v)
    }
}

fn planar_parts(s: &Scenario, ds: &BoundaryDataset) -> Result<Vec<(Vec<Complex64>, Vec<Complex64>, f64)>> {
    if matches!(s.domain, Domain::ExteriorDisk) {
        return Err(Error::NotImplemented("Green kernel checks on unbounded domains".into()));
    }
    if ds.curve.len() != s.pieces().len() {
        return Err(Error::Invalid("dataset does not match the scenario".into()));
    }
    let mut out = Vec::new();
    for (c, comp) in ds.curve.components.iter().enumerate() {
        let b = s.boundary(comp.n);
        let (z, dz, _) = &b[c];
        out.push((z.clone(), dz.clone(), comp.orientation.sign()));
    }
    Ok(out)
}

/// Whether a planar point lies in the closed domain, to within `tol` of the boundary.
pub fn planar_placement(s: &Scenario, z: Complex64) -> (bool, f64) {
    let b = s.boundary(512);
    let dist = b.iter().flat_map(|(zs, _, _)| zs.iter().map(|&p| (p - z).norm())).fold(f64::INFINITY, f64::min);
    let mut wind = 0.0;
    for (zs, dzs, o) in &b {
        let w: Complex64 = zs.iter().zip(dzs).map(|(&p, &dp)| dp / (p - z)).sum::<Complex64>() / (zs.len() as f64 * I);
        wind += o.sign() * w.re;
    }
    (wind.round() as i64 > 0, dist)
}

/// Integrand `u ∂_ζ g + g conj(θu)` against the planar log kernel, per `ℓ`.
fn green_pairing(
    parts: &[(Vec<Complex64>, Vec<Complex64>, f64)],
    u: &[[Vec<f64>; 3]],
    lam: &[[Vec<Complex64>; 3]],
    z: Complex64,
) -> [Complex64; 3] {
    let mut out = [ZERO; 3];
    for (c, (zs, dzs, sign)) in parts.iter().enumerate() {
        let n = zs.len() as f64;
        for k in 0..zs.len() {
            let d = zs[k] - z;
            let dg = dzs[k] / (4.0 * PI * d);
            let g = d.norm().ln() / (2.0 * PI);
            for l in 0..3 {
                out[l] += (dg * u[c][l][k] + g * lam[c][l][k].conj()) * (sign * 2.0 * PI / n);
            }
        }
    }
    out
}

fn split(ds: &BoundaryDataset) -> (Vec<[Vec<f64>; 3]>, Vec<[Vec<Complex64>; 3]>) {
    let u = ds.components.iter().map(|c| c.u.clone()).collect();
    let lam =
        ds.components.iter().map(|c| [c.theta[0].0.clone(), c.theta[1].0.clone(), c.theta[2].0.clone()]).collect();
    (u, lam)
}

/// Green moments at a point outside the closed domain; all vanish for genuine data.
pub fn green_moment_check(s: &Scenario, ds: &BoundaryDataset, z: Complex64) -> Result<[Complex64; 3]> {
    let parts = planar_parts(s, ds)?;
    let (inside, dist) = planar_placement(s, z);
    if inside || dist < 1e-9 {
        return Err(Error::Placement(z));
    }
    let (u, lam) = split(ds);
    Ok(green_pairing(&parts, &u, &lam, z))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct JumpReport {
    pub point: Complex64,
    pub epsilon: f64,
    /// Extrapolated `F₊ − F₋` per `ℓ`.
    pub jump_u: [f64; 3],
    /// `|F₊ − F₋ − u_ℓ(p)|`.
    pub error_u: [f64; 3],
    /// `|(∂̄F₊ − ∂̄F₋)·conj(ζ') − conj(λ_ℓ)|`.
    pub error_theta: [f64; 3],
    /// Largest `|Im F|` over all evaluation points.
    pub max_imag: f64,
    pub grid: usize,
}

pub const JUMP_MAX_GRID: usize = 1 << 17;

/// Evaluates `F(z) = (2/i)∫ u ∂_ζ g_z + g_z conj(θu)` on both sides of the boundary
/// at sample `index` of component `component`, at offsets `ε` and `2ε` along the
/// normal, and extrapolates the one-sided limits.
pub fn jump_check(s: &Scenario, ds: &BoundaryDataset, component: usize, index: usize, eps: f64) -> Result<JumpReport> {
    let parts = planar_parts(s, ds)?;
    if component >= parts.len() || index >= parts[component].0.len() {
        return Err(Error::Invalid("boundary point out of range".into()));
    }
    let jmax = parts.iter().flat_map(|(_, dz, _)| dz.iter().map(|d| d.norm())).fold(0.0, f64::max);
    let n0 = parts[component].0.len();
    let needed = 2.0 * PI * jmax * 4.0 / (0.75 * eps);
    let mut m = n0;
    while (m as f64) < needed {
        m *= 2;
        if m > JUMP_MAX_GRID {
            return Err(Error::Resolution { eps, resolution: 2.0 * PI * jmax * 4.0 / (0.75 * JUMP_MAX_GRID as f64) });
        }
    }
    // spectral upsampling of the data, exact geometry
    let mut fine = Vec::new();
    let mut u = Vec::new();
    let mut lam = Vec::new();
    for (c, comp) in ds.components.iter().enumerate() {
        let mc = ds.curve.components[c].n * (m / n0);
        let b = &s.boundary(mc)[c];
        fine.push((b.0.clone(), b.1.clone(), parts[c].2));
        u.push([0, 1, 2].map(|l| {
            PeriodicSamples::from_real(&comp.u[l]).and_then(|p| p.resample(mc)).map(|p| p.real()).unwrap_or_default()
        }));
        lam.push([0, 1, 2].map(|l| comp.theta[l].resample(mc).map(|p| p.0).unwrap_or_default()));
    }
    let p = parts[component].0[index];
    let dp = parts[component].1[index];
    let sign = parts[component].2;
    let nu = -I * sign * dp / dp.norm();
    let f = |z: Complex64| -> [Complex64; 3] { green_pairing(&fine, &u, &lam, z).map(|v| v * (-2.0 * I)) };
    let mut max_imag: f64 = 0.0;
    let mut side = |dir: f64| -> ([Complex64; 3], [Complex64; 3]) {
        let mut vals = [[ZERO; 3]; 2];
        let mut dbar = [[ZERO; 3]; 2];
        for (s_i, scale) in [1.0, 2.0].into_iter().enumerate() {
            let z = p + dir * scale * eps * nu;
            let v = f(z);
            let h = eps / 4.0;
            let fx = {
                let a = f(z + h);
                let b = f(z - h);
                [0, 1, 2].map(|l| (a[l] - b[l]) / (2.0 * h))
            };
            let fy = {
                let a = f(z + I * h);
                let b = f(z - I * h);
                [0, 1, 2].map(|l| (a[l] - b[l]) / (2.0 * h))
            };
            for l in 0..3 {
                max_imag = max_imag.max(v[l].im.abs());
                vals[s_i][l] = v[l];
                dbar[s_i][l] = (fx[l] + I * fy[l]) * 0.5;
            }
        }
        // Richardson: F(0) ≈ 2F(ε) − F(2ε)
        ([0, 1, 2].map(|l| 2.0 * vals[0][l] - vals[1][l]), [0, 1, 2].map(|l| 2.0 * dbar[0][l] - dbar[1][l]))
    };
    let (inner, dbar_in) = side(-1.0);
    let (outer, dbar_out) = side(1.0);
    let c = &ds.components[component];
    let mut report = JumpReport {
        point: p,
        epsilon: eps,
        jump_u: [0.0; 3],
        error_u: [0.0; 3],
        error_theta: [0.0; 3],
        max_imag,
        grid: m,
    };
    for l in 0..3 {
        let j = inner[l] - outer[l];
        report.jump_u[l] = j.re;
        report.error_u[l] = (j - c.u[l][index]).norm();
        let jt = (dbar_in[l] - dbar_out[l]) * dp.conj();
        report.error_theta[l] = (jt - c.theta[l].0[index].conj()).norm();
    }
    Ok(report)
}
