//! Truncated power series in one and two variables.
//!
//! A [`BivariateSeries`] stores `c[i][j]` for `x^i y^j` with `i + j ≤ K` and tracks the
//! total degree up to which its coefficients are exact: differentiation lowers it by one,
//! `x`-antidifferentiation raises it by one (capped at `K`).

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct BivariateSeries {
    order: usize,
    valid: usize,
    coeffs: Vec<Complex64>,
}

/// Start of row `i`: `Σ_{r<i} (K − r + 1)`.
fn offset(order: usize, i: usize) -> usize {
    i * (order + 1) - i * i.saturating_sub(1) / 2
}

impl BivariateSeries {
    pub fn zero(order: usize) -> Self {
        let len = (order + 1) * (order + 2) / 2;
        Self { order, valid: order, coeffs: vec![ZERO; len] }
    }

    pub fn constant(order: usize, c: Complex64) -> Self {
        let mut s = Self::zero(order);
        s.set(0, 0, c);
        s
    }

    pub fn x(order: usize) -> Self {
        Self::monomial(order, 1, 0, ONE)
    }

    pub fn y(order: usize) -> Self {
        Self::monomial(order, 0, 1, ONE)
    }

    pub fn monomial(order: usize, i: usize, j: usize, c: Complex64) -> Self {
        let mut s = Self::zero(order);
        if i + j <= order {
            s.set(i, j, c);
        }
        s
    }

    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> Complex64) -> Self {
        let mut s = Self::zero(order);
        for i in 0..=order {
            for j in 0..=order - i {
                s.set(i, j, f(i, j));
            }
        }
        s
    }

    /// `λ(y)` viewed as a function of `(x, y)`.
    pub fn from_univariate(order: usize, l: &UnivariateSeries) -> Self {
        Self::from_fn(order, |i, j| if i == 0 { l.coeff(j) } else { ZERO })
    }

    /// Triangular rows `rows[i][j]`, `i + j ≤ K` with `K = rows.len() − 1`.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Invalid("series with no rows".into()));
        }
        let order = rows.len() - 1;
        for (i, r) in rows.iter().enumerate() {
            if r.len() != order - i + 1 {
                return Err(Error::Invalid(format!(
                    "series row {i} has {} entries, expected {}",
                    r.len(),
                    order - i + 1
                )));
            }
        }
        Ok(Self::from_fn(order, |i, j| rows[i][j]))
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        (0..=self.order).map(|i| (0..=self.order - i).map(|j| self.get(i, j)).collect()).collect()
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        offset(self.order, i) + j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Total degree up to which the coefficients are exact.
    pub fn valid(&self) -> usize {
        self.valid
    }

    pub fn with_valid(mut self, valid: usize) -> Self {
        self.valid = valid.min(self.order);
        self
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i + j > self.order {
            ZERO
        } else {
            self.coeffs[self.idx(i, j)]
        }
    }

    pub fn set(&mut self, i: usize, j: usize, c: Complex64) {
        let k = self.idx(i, j);
        self.coeffs[k] = c;
    }

    /// Largest coefficient modulus up to the valid degree.
    pub fn max_abs(&self) -> f64 {
        self.max_abs_to(self.valid)
    }

    pub fn max_abs_to(&self, degree: usize) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..=degree.min(self.order) {
            for j in 0..=degree.min(self.order) - i {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }

    /// Zeroes every coefficient of degree above `degree` and lowers the validity.
    pub fn truncate(&self, degree: usize) -> Self {
        let mut s = Self::from_fn(self.order, |i, j| if i + j <= degree { self.get(i, j) } else { ZERO });
        s.valid = self.valid.min(degree);
        s
    }

    /// Same coefficients at a different storage order.
    pub fn reorder(&self, order: usize) -> Self {
        let mut s = Self::from_fn(order, |i, j| self.get(i, j));
        s.valid = self.valid.min(order);
        s
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { order: self.order, valid: self.valid, coeffs: self.coeffs.iter().map(|z| z * c).collect() }
    }

    pub fn dx(&self) -> Self {
        let mut s = Self::from_fn(self.order, |i, j| self.get(i + 1, j) * (i + 1) as f64);
        s.valid = self.valid.saturating_sub(1);
        s
    }

    pub fn dy(&self) -> Self {
        let mut s = Self::from_fn(self.order, |i, j| self.get(i, j + 1) * (j + 1) as f64);
        s.valid = self.valid.saturating_sub(1);
        s
    }

    /// `x`-antiderivative vanishing on `x = 0`.
    pub fn int_x(&self) -> Self {
        let mut s = Self::from_fn(self.order, |i, j| if i == 0 { ZERO } else { self.get(i - 1, j) / i as f64 });
        s.valid = (self.valid + 1).min(self.order);
        s
    }

    /// `y`-antiderivative vanishing on `y = 0`.
    pub fn int_y(&self) -> Self {
        let mut s = Self::from_fn(self.order, |i, j| if j == 0 { ZERO } else { self.get(i, j - 1) / j as f64 });
        s.valid = (self.valid + 1).min(self.order);
        s
    }

    /// Restriction to `x = 0`.
    pub fn at_x0(&self) -> UnivariateSeries {
        UnivariateSeries::new((0..=self.valid).map(|j| self.get(0, j)).collect())
    }

    pub fn constant_term(&self) -> Complex64 {
        self.get(0, 0)
    }

    pub fn recip(&self) -> Result<Self> {
        let c0 = self.get(0, 0);
        if c0.norm() == 0.0 {
            return Err(Error::Invalid("series division by a non-unit".into()));
        }
        // r = 1/c0 · Σ (−t)^k with t = self/c0 − 1
        let t = &self.scale(ONE / c0) - &Self::constant(self.order, ONE);
        let mut acc = Self::constant(self.order, ONE);
        let mut power = Self::constant(self.order, ONE);
        for k in 1..=self.order {
            power = &power * &t;
            let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
            acc = &acc + &power.scale(Complex64::new(sign, 0.0));
        }
        let mut out = acc.scale(ONE / c0);
        out.valid = self.valid;
        Ok(out)
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    pub fn exp(&self) -> Self {
        let c0 = self.get(0, 0);
        let mut t = self.clone();
        t.set(0, 0, ZERO);
        let mut acc = Self::constant(self.order, ONE);
        let mut term = Self::constant(self.order, ONE);
        for k in 1..=self.order {
            term = (&term * &t).scale(Complex64::new(1.0 / k as f64, 0.0));
            acc = &acc + &term;
        }
        let mut out = acc.scale(c0.exp());
        out.valid = self.valid;
        out
    }

    pub fn powu(&self, n: usize) -> Self {
        let mut acc = Self::constant(self.order, ONE).with_valid(self.valid);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        let mut total = ZERO;
        for i in (0..=self.order).rev() {
            let mut row = ZERO;
            for j in (0..=self.order - i).rev() {
                row = row * y + self.get(i, j);
            }
            total = total * x + row;
        }
        total
    }

    /// `Σ_i c[i][j]` weights rescaled to the variables `(x/r, y/r)`: `c[i][j]·r^{i+j}`.
    pub fn rescale(&self, r: f64) -> Self {
        let mut s = Self::from_fn(self.order, |i, j| self.get(i, j) * r.powi((i + j) as i32));
        s.valid = self.valid;
        s
    }

    /// Largest modulus among the `x^i` coefficients with `i ≥ 2` (zero for affine in `x`).
    pub fn nonaffine_size(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 2..=self.valid {
            for j in 0..=self.valid - i {
                m = m.max(self.get(i, j).norm());
            }
        }
        m
    }
}

fn combine(a: &BivariateSeries, b: &BivariateSeries, f: impl Fn(Complex64, Complex64) -> Complex64) -> BivariateSeries {
    assert_eq!(a.order, b.order, "series orders differ");
    BivariateSeries {
        order: a.order,
        valid: a.valid.min(b.valid),
        coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(&x, &y)| f(x, y)).collect(),
    }
}

impl Add for &BivariateSeries {
    type Output = BivariateSeries;
    fn add(self, rhs: Self) -> BivariateSeries {
        combine(self, rhs, |a, b| a + b)
    }
}

impl Sub for &BivariateSeries {
    type Output = BivariateSeries;
    fn sub(self, rhs: Self) -> BivariateSeries {
        combine(self, rhs, |a, b| a - b)
    }
}

impl Neg for &BivariateSeries {
    type Output = BivariateSeries;
    fn neg(self) -> BivariateSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &BivariateSeries {
    type Output = BivariateSeries;
    fn mul(self, rhs: Self) -> BivariateSeries {
        assert_eq!(self.order, rhs.order, "series orders differ");
        let k = self.order;
        let mut out = BivariateSeries::zero(k);
        for i1 in 0..=k {
            for j1 in 0..=k - i1 {
                let a = self.get(i1, j1);
                if a == ZERO {
                    continue;
                }
                for i2 in 0..=k - i1 - j1 {
                    for j2 in 0..=k - i1 - j1 - i2 {
                        let b = rhs.get(i2, j2);
                        if b != ZERO {
                            let idx = out.idx(i1 + i2, j1 + j2);
                            out.coeffs[idx] += a * b;
                        }
                    }
                }
            }
        }
        out.valid = self.valid.min(rhs.valid);
        out
    }
}

#[derive(Serialize, Deserialize)]
struct SeriesFile {
    order: usize,
    valid: usize,
    coeffs: Vec<Vec<Complex64>>,
}

impl Serialize for BivariateSeries {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesFile { order: self.order, valid: self.valid, coeffs: self.rows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BivariateSeries {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = SeriesFile::deserialize(d)?;
        let s = Self::from_rows(&f.coeffs).map_err(serde::de::Error::custom)?;
        if f.order != s.order {
            return Err(serde::de::Error::custom("order does not match the coefficient rows"));
        }
        Ok(s.with_valid(f.valid))
    }
}

/// Power series in one variable, `coeffs[k]` for `y^k`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct UnivariateSeries {
    pub coeffs: Vec<Complex64>,
}

impl UnivariateSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn zero(len: usize) -> Self {
        Self { coeffs: vec![ZERO; len] }
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn derivative(&self) -> Self {
        Self::new((1..self.len()).map(|k| self.coeffs[k] * k as f64).collect())
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Self {
        Self::new(
            std::iter::once(ZERO).chain(self.coeffs.iter().enumerate().map(|(k, c)| c / (k + 1) as f64)).collect(),
        )
    }

    pub fn truncated(&self, len: usize) -> Self {
        Self::new((0..len).map(|k| self.coeff(k)).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.len().min(other.len());
        Self::new((0..n).map(|k| (0..=k).map(|i| self.coeff(i) * other.coeff(k - i)).sum()).collect())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        let d0 = other.coeff(0);
        if d0.norm() == 0.0 {
            return Err(Error::Invalid("series division by a non-unit".into()));
        }
        let n = self.len().min(other.len());
        let mut q = vec![ZERO; n];
        for k in 0..n {
            let acc: Complex64 = (1..=k).map(|i| other.coeff(i) * q[k - i]).sum();
            q[k] = (self.coeff(k) - acc) / d0;
        }
        Ok(Self::new(q))
    }

    pub fn exp(&self) -> Self {
        // e' = a' e
        let n = self.len();
        let d = self.derivative();
        let mut e = vec![ZERO; n];
        if n == 0 {
            return Self::new(e);
        }
        e[0] = self.coeff(0).exp();
        for k in 1..n {
            let acc: Complex64 = (0..k).map(|i| d.coeff(i) * e[k - 1 - i]).sum();
            e[k] = acc / k as f64;
        }
        Self::new(e)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|z| z * c).collect())
    }

    pub fn eval(&self, y: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * y + c)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Coefficients rescaled to the variable `y/r`.
    pub fn rescale(&self, r: f64) -> Self {
        Self::new(self.coeffs.iter().enumerate().map(|(k, c)| c * r.powi(k as i32)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, proptest, ProptestConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random(order: usize, seed: u64) -> BivariateSeries {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<Complex64>> = (0..=order)
            .map(|i| (0..=order - i).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect();
        BivariateSeries::from_rows(&rows).unwrap()
    }

    #[test]
    fn layout_round_trip() {
        let s = BivariateSeries::from_fn(5, |i, j| c(i as f64, j as f64));
        for i in 0..=5 {
            for j in 0..=5 - i {
                assert_eq!(s.get(i, j), c(i as f64, j as f64));
            }
        }
        assert_eq!(BivariateSeries::from_rows(&s.rows()).unwrap(), s);
    }

    #[test]
    fn calculus() {
        let k = 6;
        let x = BivariateSeries::x(k);
        let y = BivariateSeries::y(k);
        let xy2 = &(&x * &y) * &y;
        assert_eq!(xy2.get(1, 2), ONE);
        assert_eq!(xy2.dy().get(1, 1), c(2.0, 0.0));
        assert_eq!(xy2.dx().get(0, 2), ONE);
        assert_eq!(xy2.int_x().get(2, 2), c(0.5, 0.0));
        assert_eq!(xy2.dx().valid(), k - 1);
        assert_eq!(xy2.dx().int_x().valid(), k);
    }

    #[test]
    fn recip_and_exp() {
        let k = 8;
        let one_minus = &BivariateSeries::constant(k, ONE) - &BivariateSeries::x(k).scale(c(0.5, 0.0));
        let r = one_minus.recip().unwrap();
        for i in 0..=k {
            assert!((r.get(i, 0) - c(0.5f64.powi(i as i32), 0.0)).norm() < 1e-14);
        }
        let e = BivariateSeries::y(k).exp();
        let mut fact = 1.0;
        for j in 0..=k {
            if j > 0 {
                fact *= j as f64;
            }
            assert!((e.get(0, j) - 1.0 / fact).norm() < 1e-14);
        }
        assert!(BivariateSeries::x(k).recip().is_err());
    }

    #[test]
    fn univariate() {
        let a = UnivariateSeries::new(vec![ONE, c(-0.3, 0.0), ZERO, ZERO]);
        let inv = UnivariateSeries::new(vec![ONE, ZERO, ZERO, ZERO]).div(&a).unwrap();
        for k in 0..4 {
            assert!((inv.coeff(k) - 0.3f64.powi(k as i32)).norm() < 1e-15);
        }
        let e = UnivariateSeries::new(vec![ZERO, ONE, ZERO, ZERO, ZERO]).exp();
        assert!((e.coeff(4) - 1.0 / 24.0).norm() < 1e-15);
        assert_eq!(a.integral().derivative(), a);
    }

    #[test]
    fn json_round_trip() {
        let s = random(4, 3).with_valid(3);
        let text = serde_json::to_string(&s).unwrap();
        let back: BivariateSeries = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<BivariateSeries>(r#"{"order":1,"valid":1,"coeffs":[[[1,0]],[[0,0]]]}"#).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn product_rule(seed in 0u64..1000) {
            let a = random(7, seed);
            let b = random(7, seed + 7919);
            let lhs = (&a * &b).dy();
            let rhs = &(&a.dy() * &b) + &(&a * &b.dy());
            prop_assert!((&lhs - &rhs).max_abs_to(lhs.valid()) < 1e-12);
        }

        #[test]
        fn evaluation_is_multiplicative(seed in 0u64..1000) {
            let a = random(10, seed).truncate(4);
            let b = random(10, seed + 1).truncate(4);
            let (x, y) = (c(0.3, 0.1), c(-0.2, 0.25));
            prop_assert!(((&a * &b).eval(x, y) - a.eval(x, y) * b.eval(x, y)).norm() < 1e-12);
        }
    }
}
