// Split an affine function `a(y)x + b(y)` into single shock waves
// `q x/(1 − qy) + c/(1 − qy)^ℓ`.

use riemann_dn::series::UnivariateSeries;
use riemann_dn::shockwave::affine_decompose;
use riemann_dn::Complex64;

pub fn run_example() -> riemann_dn::Result<f64> {
    let n = 12;
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let pad = |v: &[Complex64]| UnivariateSeries::new((0..n).map(|k| v.get(k).copied().unwrap_or_default()).collect());
    // two waves with q = 0.5 and q = -0.25
    let d = [c(1.0, 0.0), c(-0.25, 0.0), c(-0.125, 0.0)];
    let a = pad(&[c(0.25, 0.0), c(0.25, 0.0)]).div(&pad(&d))?;
    let b = pad(&[c(1.0, 0.0), c(0.2, -0.1)]).div(&pad(&d))?;
    let dec = affine_decompose(&a, &b, 2)?;
    for t in &dec.terms {
        println!("q = {:.6}, c = {:.6}, multiplicity {}", t.q, t.c, t.ell);
    }
    let back = dec.series(n - 1);
    let worst = (0..n - 2)
        .map(|k| (back.get(1, k) - a.coeff(k)).norm().max((back.get(0, k) - b.coeff(k)).norm()))
        .fold(0.0, f64::max);
    println!("reassembled coefficients differ by {worst:.2e}");
    Ok(worst)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
