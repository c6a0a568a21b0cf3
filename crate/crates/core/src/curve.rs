//! Periodic samples on closed curves: spectral differentiation, trapezoid
//! quadrature and winding numbers.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Winding numbers whose raw value is farther than this from an integer are rejected.
pub const WINDING_RESIDUAL_MAX: f64 = 0.1;
/// `min |g|` must exceed this multiple of the sampling resolution of `g`.
pub const NEAR_ZERO_FACTOR: f64 = 10.0;

pub fn check_grid(n: usize) -> Result<()> {
    if n < 16 || n % 2 != 0 {
        return Err(Error::InvalidGrid(format!("{n} samples (need even, >= 16)")));
    }
    Ok(())
}

/// Uniform parameter nodes `t_k = 2πk/n`.
pub fn nodes(n: usize) -> Vec<f64> {
    (0..n).map(|k| 2.0 * PI * k as f64 / n as f64).collect()
}

/// Complex values of a 2π-periodic function on the uniform grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicSamples(pub Vec<Complex64>);

impl PeriodicSamples {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        check_grid(values.len())?;
        Ok(Self(values))
    }

    pub fn from_fn(n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        check_grid(n)?;
        Ok(Self(nodes(n).into_iter().map(f).collect()))
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn real(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.re).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self(self.0.iter().map(|&z| f(z)).collect())
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.len(), other.len(), "grid mismatch");
        Self(self.0.iter().zip(&other.0).map(|(&a, &b)| f(a, b)).collect())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map(|z| z * c)
    }

    pub fn sup(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn min_modulus(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn derivative(&self) -> Self {
        spectral_derivative(self).expect("grid validated at construction")
    }

    /// Trapezoid rule `(2π/N) Σ s(t_k)` on this component alone.
    pub fn integrate(&self) -> Complex64 {
        let n = self.len() as f64;
        self.0.iter().sum::<Complex64>() * (2.0 * PI / n)
    }

    /// Trigonometric interpolation onto `m` uniform nodes.
    pub fn resample(&self, m: usize) -> Result<Self> {
        check_grid(self.len())?;
        check_grid(m)?;
        let n = self.len();
        let c = fourier_coefficients(&self.0);
        let mut padded = vec![Complex64::new(0.0, 0.0); m];
        let half = n.min(m) / 2;
        for k in 0..half {
            padded[k] = c[k];
            if k > 0 {
                padded[m - k] = c[n - k];
            }
        }
        let nyq = c[n / 2];
        if m > n {
            padded[n / 2] += nyq * 0.5;
            padded[m - n / 2] += nyq * 0.5;
        } else if m == n {
            padded[n / 2] = nyq;
        }
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_inverse(m).process(&mut padded);
        Ok(Self(padded))
    }

    /// Largest of the top quarter of Fourier coefficients relative to the largest coefficient.
    /// Small values mean the samples resolve a smooth function.
    pub fn spectral_tail(&self) -> f64 {
        let c = fourier_coefficients(&self.0);
        let n = c.len();
        let max = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        let tail = (3 * n / 8..=5 * n / 8).map(|k| c[k].norm()).fold(0.0, f64::max);
        tail / max
    }
}

/// `c_k` with `s(t) = Σ c_k e^{ikt}`, in FFT order.
fn fourier_coefficients(values: &[Complex64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|z| *z *= inv);
    buf
}

fn wavenumber(j: usize, n: usize) -> f64 {
    if j < n / 2 {
        j as f64
    } else if j == n / 2 {
        0.0
    } else {
        j as f64 - n as f64
    }
}

/// Derivative in `t` of the trigonometric interpolant (Nyquist mode dropped).
pub fn spectral_derivative(s: &PeriodicSamples) -> Result<PeriodicSamples> {
    let n = s.len();
    check_grid(n)?;
    let mut c = fourier_coefficients(&s.0);
    for (j, z) in c.iter_mut().enumerate() {
        *z *= I * wavenumber(j, n);
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_inverse(n).process(&mut c);
    Ok(PeriodicSamples(c))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn from_sign(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Orientation::Positive),
            -1 => Ok(Orientation::Negative),
            _ => Err(Error::Invalid(format!("orientation must be +1 or -1, got {s}"))),
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// One boundary component: its grid size, orientation and, when known, planar positions.
#[derive(Clone, Debug)]
pub struct CurveComponent {
    pub n: usize,
    pub orientation: Orientation,
    pub points: Option<PeriodicSamples>,
}

#[derive(Clone, Debug)]
pub struct ClosedCurve {
    pub components: Vec<CurveComponent>,
}

impl ClosedCurve {
    pub fn new(components: Vec<CurveComponent>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Invalid("curve without components".into()));
        }
        for (c, comp) in components.iter().enumerate() {
            check_grid(comp.n)?;
            if let Some(p) = &comp.points {
                if p.len() != comp.n {
                    return Err(Error::InvalidGrid(format!("component {c}: {} points for n = {}", p.len(), comp.n)));
                }
                if diameter(&[p]) == 0.0 {
                    return Err(Error::Invalid(format!("component {c} reduces to a point")));
                }
            }
        }
        Ok(Self { components })
    }

    /// Planar curve from sampled positions.
    pub fn planar(parts: Vec<(PeriodicSamples, Orientation)>) -> Result<Self> {
        Self::new(
            parts.into_iter().map(|(p, o)| CurveComponent { n: p.len(), orientation: o, points: Some(p) }).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn signs(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.orientation.sign()).collect()
    }

    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            c.orientation = c.orientation.reversed();
        }
        out
    }
}

/// Largest pairwise distance over all samples of the given components.
pub fn diameter(parts: &[&PeriodicSamples]) -> f64 {
    let all: Vec<Complex64> = parts.iter().flat_map(|p| p.0.iter().copied()).collect();
    let mut d: f64 = 0.0;
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            d = d.max((all[i] - all[j]).norm());
        }
    }
    d
}

/// `∫_γ` of an integrand already pulled back to the parameter, summed over
/// components with their orientation signs.
pub fn integrate_closed(curve: &ClosedCurve, s: &[PeriodicSamples]) -> Result<Complex64> {
    if s.len() != curve.len() {
        return Err(Error::InvalidGrid(format!(
            "{} integrand components for {} curve components",
            s.len(),
            curve.len()
        )));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (comp, part) in curve.components.iter().zip(s) {
        check_grid(part.len())?;
        if part.len() != comp.n {
            return Err(Error::InvalidGrid(format!("{} samples for n = {}", part.len(), comp.n)));
        }
        total += part.integrate() * comp.orientation.sign();
    }
    Ok(total)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Winding {
    pub index: i64,
    /// Real part of `(1/2πi)∮ dg/g` before rounding.
    pub raw: f64,
    /// `|raw − index|`, including any imaginary part of the integral.
    pub residual: f64,
}

/// Fourier mass of `g` in the band `|k| ≥ N/4`: a bound on how far the sampled
/// function may be from any smooth function the grid resolves.
fn resolution(g: &PeriodicSamples) -> f64 {
    let c = fourier_coefficients(&g.0);
    let n = c.len();
    (n / 4..=n - n / 4).map(|k| c[k].norm()).sum()
}

fn raw_winding(g: &PeriodicSamples) -> Result<Complex64> {
    check_grid(g.len())?;
    let min = g.min_modulus();
    let res = resolution(g);
    if min <= NEAR_ZERO_FACTOR * res {
        return Err(Error::NearZeroCrossing { min, resolution: res });
    }
    let dg = spectral_derivative(g)?;
    Ok(dg.zip_map(g, |a, b| a / b).integrate() / (2.0 * PI * I))
}

fn round_winding(raw: Complex64) -> Result<Winding> {
    let index = raw.re.round();
    let residual = (raw - index).norm();
    if residual > WINDING_RESIDUAL_MAX {
        return Err(Error::UnreliableWinding { raw: raw.re, residual });
    }
    Ok(Winding { index: index as i64, raw: raw.re, residual })
}

/// Winding number of `g` around 0 along one positively traversed component.
pub fn winding_number(g: &PeriodicSamples) -> Result<Winding> {
    round_winding(raw_winding(g)?)
}

/// Winding number along a whole oriented curve.
pub fn winding_on_curve(curve: &ClosedCurve, g: &[PeriodicSamples]) -> Result<Winding> {
    if g.len() != curve.len() {
        return Err(Error::InvalidGrid("component count mismatch".into()));
    }
    let mut raw = Complex64::new(0.0, 0.0);
    for (comp, part) in curve.components.iter().zip(g) {
        raw += raw_winding(part)? * comp.orientation.sign();
    }
    round_winding(raw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn circle(n: usize, k: i32) -> PeriodicSamples {
        PeriodicSamples::from_fn(n, |t| (I * (k as f64) * t).exp()).unwrap()
    }

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn derivative_of_exponential() {
        let s = circle(64, 1);
        let d = spectral_derivative(&s).unwrap();
        for (a, b) in d.0.iter().zip(&s.0) {
            assert!(close(*a, I * b, 1e-12));
        }
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let s = PeriodicSamples::from_fn(32, |_| Complex64::new(2.5, -1.0)).unwrap();
        assert!(spectral_derivative(&s).unwrap().sup() < 1e-13);
    }

    #[test]
    fn derivative_linearity() {
        let s = PeriodicSamples::from_fn(32, |t| (I * 3.0 * t).exp() + 2.0).unwrap();
        let d = spectral_derivative(&s).unwrap();
        for (k, t) in nodes(32).into_iter().enumerate() {
            assert!(close(d.0[k], 3.0 * I * (I * 3.0 * t).exp(), 1e-12));
        }
    }

    #[test]
    fn invalid_grids_rejected() {
        assert!(matches!(PeriodicSamples::new(vec![Complex64::new(0.0, 0.0); 15]), Err(Error::InvalidGrid(_))));
        assert!(matches!(PeriodicSamples::new(vec![Complex64::new(0.0, 0.0); 8]), Err(Error::InvalidGrid(_))));
        assert!(spectral_derivative(&PeriodicSamples(vec![Complex64::new(0.0, 0.0); 17])).is_err());
    }

    #[test]
    fn cauchy_integral_of_dz_over_z() {
        let n = 64;
        let s = PeriodicSamples::from_fn(n, |t| {
            let z = (I * t).exp();
            (I * z / z) / (2.0 * PI * I)
        })
        .unwrap();
        let curve = ClosedCurve::planar(vec![(circle(n, 1), Orientation::Positive)]).unwrap();
        assert!(close(integrate_closed(&curve, &[s.clone()]).unwrap(), Complex64::new(1.0, 0.0), 1e-14));
        let rev = curve.reversed();
        assert!(close(integrate_closed(&rev, &[s]).unwrap(), Complex64::new(-1.0, 0.0), 1e-14));
    }

    #[test]
    fn z_dz_integrates_to_zero() {
        let s = PeriodicSamples::from_fn(32, |t| (I * t).exp() * I * (I * t).exp()).unwrap();
        assert!(s.integrate().norm() < 1e-14);
    }

    #[test]
    fn trapezoid_converges_spectrally() {
        // ∮ e^{z}/(z − 0.5) dz = 2πi e^{0.5}, analytic integrand with a nearby pole.
        let exact = 2.0 * PI * I * 0.5f64.exp();
        let err = |n: usize| {
            PeriodicSamples::from_fn(n, |t| {
                let z = (I * t).exp();
                z.exp() / (z - 0.5) * I * z
            })
            .unwrap()
            .integrate()
                - exact
        };
        let e64 = err(16).norm();
        let e128 = err(32).norm();
        assert!(e128 < 1e-4 * e64, "{e64} {e128}");
    }

    #[test]
    fn winding_examples() {
        assert_eq!(winding_number(&circle(64, 1)).unwrap().index, 1);
        assert_eq!(winding_number(&circle(64, 2)).unwrap().index, 2);
        let g = circle(64, 1).map(|z| z - 2.0);
        assert_eq!(winding_number(&g).unwrap().index, 0);
        assert!(winding_number(&circle(64, 3)).unwrap().residual < 1e-12);
    }

    #[test]
    fn winding_rejects_near_zero() {
        let g = circle(64, 1).map(|z| z - 1.0);
        assert!(matches!(winding_number(&g), Err(Error::NearZeroCrossing { .. })));
        // a narrow spike through zero is not resolved by the grid
        let spike =
            PeriodicSamples::from_fn(64, |t| Complex64::new(1.0 - 1.2 * (-(t - 3.0).powi(2) * 400.0).exp(), 0.0))
                .unwrap();
        assert!(winding_number(&spike).is_err());
    }

    #[test]
    fn winding_rejects_underresolved_curve() {
        // 20 turns on 32 samples aliases to a different winding; the grid resolution check fires.
        let g = circle(32, 20);
        assert!(winding_number(&g).is_err());
    }

    #[test]
    fn resample_is_exact_for_trig_polynomials() {
        let s = PeriodicSamples::from_fn(32, |t| (I * 3.0 * t).exp() + (-2.0 * I * t).exp() * 0.5).unwrap();
        let r = s.resample(128).unwrap();
        for (k, t) in nodes(128).into_iter().enumerate() {
            let v = (I * 3.0 * t).exp() + (-2.0 * I * t).exp() * 0.5;
            assert!(close(r.0[k], v, 1e-13));
        }
        assert!(s.spectral_tail() < 1e-14);
    }

    proptest! {
        #[test]
        fn derivative_integrates_to_zero(coefs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..8)) {
            let s = PeriodicSamples::from_fn(256, |t| {
                let z = (I * t).exp();
                let mut v = Complex64::new(0.0, 0.0);
                for (k, (a, b)) in coefs.iter().enumerate() {
                    v += Complex64::new(*a, *b) * (z / (1.5 - 0.3 * z)).powu(k as u32);
                }
                v
            }).unwrap();
            let d = spectral_derivative(&s).unwrap();
            prop_assert!(d.integrate().norm() < 1e-10);
        }

        #[test]
        fn winding_is_additive(a in 1usize..4, b in 0usize..4, shift in 1.5f64..3.0) {
            let g = circle(128, a as i32);
            let h = circle(128, b as i32).map(|z| z + shift);
            let gh = g.zip_map(&h, |x, y| x * y);
            let wg = winding_number(&g).unwrap().index;
            let wh = winding_number(&h).unwrap().index;
            let wgh = winding_number(&gh).unwrap().index;
            prop_assert_eq!(wgh, wg + wh);
        }

        #[test]
        fn integration_is_linear(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let s1 = circle(32, 0).map(|z| z * 0.7);
            let s2 = PeriodicSamples::from_fn(32, |t| Complex64::new(t.cos(), t.sin() * t.sin())).unwrap();
            let comb = s1.zip_map(&s2, |x, y| x * a + y * b);
            let lhs = comb.integrate();
            let rhs = s1.integrate() * a + s2.integrate() * b;
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}
