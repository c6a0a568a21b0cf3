// Values of `∂ũ_ℓ/∂F₂` at the fiber points, recovered from `θ`-moments.

use riemann_dn::branches::fiber;
use riemann_dn::forms::recover_form_values;
use riemann_dn::oracle::make_scenario;
use riemann_dn::Complex64;

pub fn run_example() -> riemann_dn::Result<f64> {
    let (_, ds, truth) = make_scenario("disk-z-z2", 256)?;
    let xi = Complex64::new(0.09, 0.0);
    let set = fiber(&ds, xi, 2)?;
    let mut worst: f64 = 0.0;
    for ell in 0..3 {
        let ff = recover_form_values(&ds, ell, &set)?;
        let exact = truth.form_values(ell, xi);
        for (z, v) in set.points.iter().zip(&ff.values) {
            // oracle values are listed in the oracle's fiber order
            let k = truth
                .fiber(xi)
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - z).norm().total_cmp(&(b.1 - z).norm()))
                .unwrap()
                .0;
            worst = worst.max((v - exact[k]).norm());
            println!("l = {ell}, z1 = {z:.6}: {v:.6}");
        }
    }
    println!("max error against the oracle: {worst:.2e}");
    Ok(worst)
}

#[allow(dead_code)]
fn main() {
    run_example().unwrap();
}
